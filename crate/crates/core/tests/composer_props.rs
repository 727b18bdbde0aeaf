use dodeuri_core::composer::{compose, verify_pattern, CompositionContext, Policy};
use dodeuri_core::nodepool::NodePool;
use dodeuri_core::overlap::{binarize, integer_overlap};
use dodeuri_core::rng::seeded;
use dodeuri_testkit::{cyclic_flow, four_case_violations, node_sets, random_cycles, rng};
use rand::Rng;

#[test]
fn compositions_satisfy_the_pattern() {
    for seed in 0..120 {
        let mut g = rng(seed);
        let q = g.gen_range(8..=16);
        let d = g.gen_range(q..=60);
        let count = g.gen_range(1..=4);
        let raw = random_cycles(&mut g, q, count, 2, 4);
        let cycles = node_sets(&raw);
        let flow = cyclic_flow(&mut g, d, q, &raw, 2, 6);
        let s = g.gen_range(1..=3);
        let m = binarize(&integer_overlap(&flow, &cycles, s).unwrap());
        let pool = NodePool::from_frequencies((0..q).map(|_| g.gen_range(1..10)).collect()).unwrap();
        let ctx = CompositionContext::new(&m, &cycles, &pool, Policy::Strict).unwrap();
        let out = compose(&ctx, &mut seeded(seed)).unwrap();
        assert!(out.fallbacks.is_empty());
        assert!(verify_pattern(&out.notes, &ctx).passed);
        assert!(four_case_violations(&out.notes, m.rows(), &cycles, q).is_empty(), "seed {seed}");
    }
}

#[test]
fn checker_and_verifier_agree_on_corrupted_output() {
    let mut g = rng(77);
    let raw = vec![vec![0, 1, 2], vec![2, 3, 4]];
    let cycles = node_sets(&raw);
    let flow = cyclic_flow(&mut g, 40, 10, &raw, 3, 6);
    let m = binarize(&integer_overlap(&flow, &cycles, 3).unwrap());
    let pool = NodePool::from_frequencies(vec![1; 10]).unwrap();
    let ctx = CompositionContext::new(&m, &cycles, &pool, Policy::Strict).unwrap();
    let mut out = compose(&ctx, &mut seeded(1)).unwrap().notes;
    for j in 0..out.len() {
        out[j] = (out[j] + 5) % 10;
    }
    let report = verify_pattern(&out, &ctx);
    assert_eq!(report.violations, four_case_violations(&out, m.rows(), &cycles, 10));
}
