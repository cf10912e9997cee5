use proptest::prelude::*;

use rankpipe::engine::drain_cycles;
use rankpipe::imaging::{
    filter_image_with, percentile_to_rank, window_offsets, Execution, FilterOptions,
};
use rankpipe::oracle::filter_image_oracle;
use rankpipe::{filter_image, BorderPolicy, EngineChoice, FilterParams, Image, Sample, WindowShape};

fn noise(w: usize, h: usize, seed: u32) -> Image {
    Image::from_fn(w, h, 255, |x, y| {
        let v = (x as u32).wrapping_mul(2654435761) ^ (y as u32).wrapping_mul(40503) ^ seed;
        (v.rotate_left(seed % 13) >> 7) as Sample & 0xff
    })
    .unwrap()
}

#[test]
fn median_removes_isolated_bright_pixel() {
    let mut px = vec![10; 25 * 20];
    px[7 * 25 + 12] = 255;
    let img = Image::new(25, 20, 255, px).unwrap();
    for engine in [EngineChoice::Single, EngineChoice::MultiChannel, EngineChoice::Sliding] {
        let out = filter_image(&img, &WindowShape::square(3), 5, engine, BorderPolicy::Clamp).unwrap();
        assert!(out.pixels().iter().all(|&p| p == 10), "{engine}");
    }
}

#[test]
fn window_order_does_not_matter() {
    let img = noise(20, 17, 3);
    let offsets = window_offsets(&WindowShape::Diamond(5)).unwrap();
    let mut shuffled = offsets.clone();
    shuffled.reverse();
    shuffled.rotate_left(5);
    let a = filter_image(&img, &WindowShape::Diamond(5), 7, EngineChoice::Single, BorderPolicy::Clamp).unwrap();
    let b = filter_image(&img, &WindowShape::Custom(shuffled), 7, EngineChoice::Single, BorderPolicy::Clamp).unwrap();
    assert_eq!(a, b);
}

#[test]
fn cycle_count_is_pixels_times_n_plus_drain() {
    let img = noise(40, 37, 9);
    let shape = WindowShape::square(5);
    let opts = FilterOptions::default();
    let out = filter_image_with(&img, &shape, 13, EngineChoice::Single, BorderPolicy::Clamp, &opts).unwrap();
    let drain = drain_cycles(&FilterParams::new(25, 13).unwrap()) as u64;
    assert_eq!(out.bands, 37usize.div_ceil(opts.band_rows));
    assert_eq!(out.cycles, 40 * 37 * 25 + out.bands as u64 * drain);
}

#[test]
fn sequential_and_parallel_agree() {
    let img = noise(50, 70, 21);
    let shape = WindowShape::rect(3, 5);
    for engine in [EngineChoice::Single, EngineChoice::MultiChannel] {
        let run = |execution| {
            let opts = FilterOptions { execution, ..FilterOptions::default() };
            filter_image_with(&img, &shape, 8, engine, BorderPolicy::Clamp, &opts).unwrap()
        };
        assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
    }
}

#[test]
fn valid_only_crops_to_interior() {
    let img = noise(30, 22, 5);
    let shape = WindowShape::rect(5, 3);
    for engine in [EngineChoice::Single, EngineChoice::MultiChannel] {
        let out = filter_image(&img, &shape, 4, engine, BorderPolicy::ValidOnly).unwrap();
        assert_eq!((out.width(), out.height()), (26, 20));
        assert_eq!(out, filter_image_oracle(&img, &shape, 4, BorderPolicy::ValidOnly).unwrap());
    }
}

#[test]
fn ensemble_engine_matches_reference_for_each_width() {
    let img = noise(23, 19, 8);
    for w in [3, 5, 7, 9] {
        let shape = WindowShape::square(w);
        let m = (w * w).div_ceil(2);
        for border in [BorderPolicy::Clamp, BorderPolicy::ValidOnly] {
            let out = filter_image(&img, &shape, m, EngineChoice::Ensemble9753, border).unwrap();
            assert_eq!(out, filter_image_oracle(&img, &shape, m, border).unwrap(), "{w}x{w} {border:?}");
        }
    }
}

#[test]
fn engines_reject_unsupported_shapes() {
    let img = noise(12, 12, 1);
    let cases = [
        (WindowShape::Diamond(5), EngineChoice::MultiChannel),
        (WindowShape::rect(3, 5), EngineChoice::Sliding),
        (WindowShape::square(11), EngineChoice::Ensemble9753),
    ];
    for (shape, engine) in cases {
        assert!(filter_image(&img, &shape, 1, engine, BorderPolicy::Clamp).is_err(), "{engine} {shape}");
    }
}

#[test]
fn sixteen_bit_images() {
    let img = Image::from_fn(16, 12, 4095, |x, y| ((x * 977 + y * 131) % 4096) as Sample).unwrap();
    let shape = WindowShape::square(3);
    let out = filter_image(&img, &shape, 2, EngineChoice::Sliding, BorderPolicy::Clamp).unwrap();
    assert_eq!(out, filter_image_oracle(&img, &shape, 2, BorderPolicy::Clamp).unwrap());
}

#[test]
fn percentiles_map_to_ranks() {
    assert_eq!(percentile_to_rank(0.5, 25).unwrap(), 13);
    assert_eq!(percentile_to_rank(1.0, 9).unwrap(), 9);
    assert_eq!(percentile_to_rank(1e-6, 9).unwrap(), 1);
    assert!(percentile_to_rank(0.0, 9).is_err());
    assert!(percentile_to_rank(1.5, 9).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn engines_agree_with_reference(
        w in 4usize..20,
        h in 4usize..20,
        seed in any::<u32>(),
        side in prop::sample::select(vec![1usize, 3, 5]),
        rank_seed in any::<usize>(),
    ) {
        let img = noise(w, h, seed);
        let shape = WindowShape::square(side);
        let m = rank_seed % (side * side) + 1;
        let reference = filter_image_oracle(&img, &shape, m, BorderPolicy::Clamp).unwrap();
        for engine in [EngineChoice::Single, EngineChoice::MultiChannel, EngineChoice::Sliding] {
            prop_assert_eq!(&filter_image(&img, &shape, m, engine, BorderPolicy::Clamp).unwrap(), &reference);
        }
    }
}
