use proptest::prelude::*;

use rankpipe::engine::{incgen, run_stream, PartialMedian};
use rankpipe::multichannel::{encode3, mc_incgen, run_columns, McEngine, McParams};
use rankpipe::oracle::select_desc;
use rankpipe::{FilterParams, Sample};

#[test]
fn encoder_counts_ones() {
    for v in 0u8..8 {
        let got = encode3(v & 4 != 0, v & 2 != 0, v & 1 != 0);
        assert_eq!(got as u32, v.count_ones());
    }
}

#[test]
fn adder_tree_matches_popcount_exhaustively() {
    // Every 3-lane column of 2-bit samples under every partial median.
    for prefix in [0u32, 4, 8, 12] {
        for resolved in [0u32, 2] {
            if resolved == 0 && prefix != 0 {
                continue;
            }
            let pm = PartialMedian::new(prefix, resolved, 4).unwrap();
            for code in 0..16u32.pow(3) {
                let col: Vec<Sample> = (0..3).map(|i| ((code >> (4 * i)) & 15) as Sample).collect();
                let mut want = (0, 0, 0);
                for &x in &col {
                    let f = incgen(x, pm, 4).unwrap();
                    want.0 += f.ge3 as u32;
                    want.1 += f.ge2 as u32;
                    want.2 += f.ge1 as u32;
                }
                assert_eq!(mc_incgen(&col, pm, 4).unwrap(), want, "{col:?} under {pm:?}");
            }
        }
    }
}

proptest! {
    #[test]
    fn equals_flattened_single_channel(
        k in 1usize..8,
        cw in 1usize..8,
        sets in 1usize..4,
        seed in any::<u64>(),
    ) {
        let n = k * cw;
        let m = (seed as usize % n) + 1;
        let params = McParams::new(k, cw, m).unwrap();
        let columns: Vec<Vec<Sample>> = (0..cw * sets)
            .map(|c| (0..k).map(|l| ((seed >> ((c + l) % 40)) as u8 ^ (c * 31 + l * 7) as u8) as Sample).collect())
            .collect();
        let flat: Vec<Sample> = columns.concat();
        let single = run_stream(FilterParams::new(n, m).unwrap(), &flat).unwrap();
        let got = run_columns(params, &columns).unwrap();
        prop_assert_eq!(&got, &single);
        let want: Vec<Sample> = flat.chunks(n).map(|s| select_desc(s, m).unwrap()).collect();
        prop_assert_eq!(got, want);
    }
}

#[test]
fn results_arrive_every_cw_clocks() {
    let params = McParams::new(9, 9, 41).unwrap();
    let mut engine = McEngine::new(params).unwrap();
    let mut dv = Vec::new();
    let sets = 6;
    for t in 0..(9 * sets + params.drain_cycles()) {
        let col: Vec<Sample> = (0..9).map(|l| ((t * 13 + l * 29) % 256) as Sample).collect();
        let d1st = t < 9 * sets && t % 9 == 0;
        let col = if t < 9 * sets { col } else { vec![0; 9] };
        if engine.clock(&col, d1st).unwrap().dv {
            dv.push(t);
        }
    }
    assert_eq!(dv.len(), sets);
    assert!(dv.windows(2).all(|w| w[1] - w[0] == 9), "{dv:?}");
    assert_eq!(dv[0], engine.latency());
}

#[test]
fn rejects_wrong_column_width() {
    let mut engine = McEngine::new(McParams::new(3, 3, 5).unwrap()).unwrap();
    assert!(engine.clock(&[1, 2], true).is_err());
}
