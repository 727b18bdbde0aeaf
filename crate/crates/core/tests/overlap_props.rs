use std::collections::BTreeSet;

use dodeuri_core::overlap::{binarize, integer_overlap, run_lengths, validate_s_scale, MatrixKind};
use dodeuri_testkit::{node_sets, random_cycles, rng, window_scan_overlap};
use rand::Rng;

fn instance(seed: u64) -> (Vec<usize>, Vec<BTreeSet<usize>>, usize) {
    let mut g = rng(seed);
    let q = g.gen_range(2..=10);
    let d = g.gen_range(1..=50);
    let k = g.gen_range(0..=5);
    let cycles = node_sets(&random_cycles(&mut g, q, k, 1, q.min(5)));
    let flow = (0..d).map(|_| g.gen_range(0..q)).collect();
    (flow, cycles, g.gen_range(1..=6))
}

#[test]
fn integer_overlap_matches_window_scan_and_membership() {
    for seed in 0..400 {
        let (flow, cycles, s) = instance(seed);
        let m = integer_overlap(&flow, &cycles, s).unwrap();
        assert_eq!(m.kind(), MatrixKind::Integer);
        assert_eq!(m.rows(), window_scan_overlap(&flow, &cycles, s).as_slice());
        assert!(validate_s_scale(&m, s));
        for (i, row) in m.rows().iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    assert_eq!(v as usize, flow[j] + 1);
                    assert!(cycles[i].contains(&flow[j]));
                }
                if !cycles[i].contains(&flow[j]) {
                    assert_eq!(v, 0);
                }
            }
        }
    }
}

#[test]
fn support_shrinks_as_scale_grows() {
    for seed in 400..600 {
        let (flow, cycles, s) = instance(seed);
        let a = binarize(&integer_overlap(&flow, &cycles, s).unwrap());
        let b = binarize(&integer_overlap(&flow, &cycles, s + 1).unwrap());
        for (ra, rb) in a.rows().iter().zip(b.rows()) {
            assert!(ra.iter().zip(rb).all(|(&x, &y)| x >= y));
            assert!(run_lengths(rb).iter().all(|&n| n > s));
        }
    }
}
