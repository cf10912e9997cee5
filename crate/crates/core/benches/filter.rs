use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rankpipe::imaging::{filter_image_with, Execution, FilterOptions};
use rankpipe::{BorderPolicy, EngineChoice, FilterParams, Image, WindowShape};

fn test_image(width: usize, height: usize) -> Image {
    let mut s = 0x9e37_79b9_7f4a_7c15u64;
    Image::from_fn(width, height, 255, |_, _| {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 56) as u16
    })
    .unwrap()
}

fn image_filters(c: &mut Criterion) {
    let img = test_image(128, 96);
    let mut group = c.benchmark_group("filter_image");
    group.sample_size(10);
    for (engine, shape) in [
        (EngineChoice::Single, WindowShape::square(5)),
        (EngineChoice::MultiChannel, WindowShape::square(5)),
        (EngineChoice::Sliding, WindowShape::square(5)),
        (EngineChoice::Ensemble9753, WindowShape::square(5)),
    ] {
        for execution in [Execution::Sequential, Execution::Parallel] {
            let opts = FilterOptions {
                execution,
                ..FilterOptions::default()
            };
            let id = BenchmarkId::new(format!("{engine}/{shape}"), format!("{execution:?}"));
            group.bench_with_input(id, &opts, |b, opts| {
                b.iter(|| {
                    filter_image_with(
                        black_box(&img),
                        &shape,
                        13,
                        engine,
                        BorderPolicy::Clamp,
                        opts,
                    )
                    .unwrap()
                })
            });
        }
    }
    group.finish();
}

fn stream(c: &mut Criterion) {
    let params = FilterParams::new(25, 13).unwrap();
    let data: Vec<u16> = (0..25 * 400).map(|i| (i * 37 % 256) as u16).collect();
    c.bench_function("run_stream/25x400", |b| {
        b.iter(|| rankpipe::run_stream(params, black_box(&data)).unwrap())
    });
}

criterion_group!(benches, image_filters, stream);
criterion_main!(benches);
