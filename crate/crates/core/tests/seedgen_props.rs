use dodeuri_core::overlap::{binarize, block_counts, integer_overlap, validate_s_scale, OverlapMatrix};
use dodeuri_core::rng::seeded;
use dodeuri_core::seedgen::{seed_columnwise, seed_elementwise, seed_rowwise};
use dodeuri_testkit::{cyclic_flow, node_sets, random_cycles, rng};
use rand::Rng;
use std::collections::BTreeSet;

fn source(seed: u64) -> (OverlapMatrix, Vec<BTreeSet<usize>>, usize) {
    let mut g = rng(seed);
    let q = g.gen_range(8..=20);
    let d = g.gen_range(40..=120);
    let count = g.gen_range(1..=5);
    let raw = random_cycles(&mut g, q, count, 3, 5);
    let cycles = node_sets(&raw);
    let flow = cyclic_flow(&mut g, d, q, &raw, 3, 8);
    let s = g.gen_range(2..=4);
    (integer_overlap(&flow, &cycles, s).unwrap(), cycles, s)
}

#[test]
fn elementwise_keeps_support_and_cycle_membership() {
    for seed in 0..80 {
        let (m, cycles, _) = source(seed);
        let out = seed_elementwise(&m, &cycles, &mut seeded(seed)).unwrap();
        assert_eq!(binarize(&out), binarize(&m));
        for (i, row) in out.rows().iter().enumerate() {
            assert!(row.iter().filter(|&&v| v != 0).all(|&v| cycles[i].contains(&(v as usize - 1))));
        }
    }
}

#[test]
fn rowwise_keeps_block_counts() {
    let mut done = 0;
    for seed in 0..80 {
        let (m, cycles, s) = source(seed);
        match seed_rowwise(&m, &cycles, s, &mut seeded(seed)) {
            Ok(out) => {
                assert_eq!(block_counts(&out), block_counts(&m));
                assert!(validate_s_scale(&out, s));
                done += 1;
            }
            Err(dodeuri_core::Error::SeedPlacementFailed(_)) => {}
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
    assert!(done >= 60, "only {done} placements succeeded");
}

#[test]
fn columnwise_respects_scale_and_block_counts() {
    for seed in 0..80 {
        let (m, cycles, s) = source(seed);
        let out = seed_columnwise(&m, &cycles, s, &mut seeded(seed)).unwrap();
        assert!(validate_s_scale(&out, s), "seed {seed}");
        for (a, b) in block_counts(&out).iter().zip(block_counts(&m)) {
            assert!(a.abs_diff(b) <= 1);
        }
        let source_columns: BTreeSet<Vec<u32>> = m.columns().into_iter().collect();
        assert!(out.columns().iter().all(|c| source_columns.contains(c)));
    }
}
