//! Independent reference implementations and instance generators for tests.
//!
//! Nothing here depends on the main crate: every oracle works on plain
//! vectors so that it can be compared against the real implementation.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- graphs

/// Random connected symmetric weight matrix with `q` nodes.
///
/// A random spanning tree guarantees connectivity; extra edges are added
/// with probability `density`. Weights are drawn from `1..=max_weight`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, q: usize, density: f64, max_weight: u32) -> Vec<Vec<u32>> {
    let mut w = vec![vec![0u32; q]; q];
    let mut order: Vec<usize> = (0..q).collect();
    order.shuffle(rng);
    for i in 1..q {
        let a = order[i];
        let b = order[rng.gen_range(0..i)];
        let x = rng.gen_range(1..=max_weight);
        w[a][b] = x;
        w[b][a] = x;
    }
    for i in 0..q {
        for j in i + 1..q {
            if w[i][j] == 0 && rng.gen_bool(density) {
                let x = rng.gen_range(1..=max_weight);
                w[i][j] = x;
                w[j][i] = x;
            }
        }
    }
    w
}

/// Minimum over simple paths of (hop count, Σ 1/w, node sequence), found
/// by enumerating every simple path from `from` to `to`.
pub fn brute_force_route(w: &[Vec<u32>], from: usize, to: usize) -> Option<(usize, BigRational, Vec<usize>)> {
    fn walk(
        w: &[Vec<u32>],
        to: usize,
        path: &mut Vec<usize>,
        cost: BigRational,
        best: &mut Option<(usize, BigRational, Vec<usize>)>,
    ) {
        let here = *path.last().expect("path starts non-empty");
        if here == to {
            let candidate = (path.len() - 1, cost, path.clone());
            if best.as_ref().is_none_or(|b| candidate < *b) {
                *best = Some(candidate);
            }
            return;
        }
        for next in 0..w.len() {
            if w[here][next] == 0 || path.contains(&next) {
                continue;
            }
            let step = BigRational::new(BigInt::one(), BigInt::from(w[here][next]));
            path.push(next);
            walk(w, to, path, &cost + step, best);
            path.pop();
        }
    }
    let mut best = None;
    walk(w, to, &mut vec![from], BigRational::zero(), &mut best);
    best
}

/// Pairwise distances: the route cost, zero on the diagonal.
pub fn brute_force_distances(w: &[Vec<u32>]) -> Option<Vec<Vec<BigRational>>> {
    let q = w.len();
    let mut out = vec![vec![BigRational::zero(); q]; q];
    for i in 0..q {
        for j in 0..q {
            if i != j {
                out[i][j] = brute_force_route(w, i, j)?.1;
            }
        }
    }
    Some(out)
}

// ---------------------------------------------------------- persistence

/// `(dimension, birth, death)`; `None` death means the class never dies.
pub type Bar = (usize, BigRational, Option<BigRational>);

/// Rips barcode in dimensions 0 and 1 by plain left-to-right reduction of
/// a dense boundary matrix over GF(2), without any optimisation.
///
/// Also returns, for every finite 1-dimensional bar, the vertex set of the
/// reduced column that killed it.
pub fn naive_barcode(dist: &[Vec<BigRational>]) -> (Vec<Bar>, Vec<(Bar, BTreeSet<usize>)>) {
    let q = dist.len();
    let mut simplices: Vec<(BigRational, Vec<usize>)> = Vec::new();
    for a in 0..q {
        simplices.push((BigRational::zero(), vec![a]));
    }
    for a in 0..q {
        for b in a + 1..q {
            simplices.push((dist[a][b].clone(), vec![a, b]));
        }
    }
    for a in 0..q {
        for b in a + 1..q {
            for c in b + 1..q {
                let v = [&dist[a][b], &dist[a][c], &dist[b][c]].into_iter().max().expect("three").clone();
                simplices.push((v, vec![a, b, c]));
            }
        }
    }
    simplices.sort_by(|x, y| (&x.0, x.1.len(), &x.1).cmp(&(&y.0, y.1.len(), &y.1)));
    let n = simplices.len();
    let index_of = |vs: &[usize]| simplices.iter().position(|s| s.1 == vs).expect("face present");
    let mut columns: Vec<Vec<bool>> = vec![vec![false; n]; n];
    for (col, (_, vs)) in simplices.iter().enumerate() {
        if vs.len() > 1 {
            for skip in 0..vs.len() {
                let face: Vec<usize> = vs.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                columns[col][index_of(&face)] = true;
            }
        }
    }
    let low = |c: &Vec<bool>| c.iter().rposition(|&b| b);
    let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
    for col in 0..n {
        while let Some(l) = low(&columns[col]) {
            match pivot_owner[l] {
                Some(other) => {
                    let src = columns[other].clone();
                    for (x, y) in columns[col].iter_mut().zip(src) {
                        *x ^= y;
                    }
                }
                None => {
                    pivot_owner[l] = Some(col);
                    break;
                }
            }
        }
    }
    let mut bars = Vec::new();
    let mut reps = Vec::new();
    for (row, owner) in pivot_owner.iter().enumerate() {
        let dim = simplices[row].1.len() - 1;
        if dim > 1 {
            continue;
        }
        let birth = simplices[row].0.clone();
        match owner {
            Some(col) => {
                let death = simplices[*col].0.clone();
                if death != birth {
                    let bar = (dim, birth, Some(death));
                    if dim == 1 {
                        let nodes = (0..n).filter(|&r| columns[*col][r]).flat_map(|r| simplices[r].1.clone()).collect();
                        reps.push((bar.clone(), nodes));
                    }
                    bars.push(bar);
                }
            }
            None => {
                let is_negative = columns[row].iter().any(|&b| b);
                if !is_negative {
                    bars.push((dim, birth, None));
                }
            }
        }
    }
    bars.sort();
    (bars, reps)
}

// --------------------------------------------------------------- overlap

/// Overlap rows by sliding every window of length `s` over the flow:
/// a position is marked when some all-in-cycle window covers it.
pub fn window_scan_overlap(flow: &[usize], cycles: &[BTreeSet<usize>], s: usize) -> Vec<Vec<u32>> {
    let d = flow.len();
    cycles
        .iter()
        .map(|c| {
            let mut row = vec![0u32; d];
            if s == 0 || s > d {
                return row;
            }
            for start in 0..=d - s {
                if flow[start..start + s].iter().all(|n| c.contains(n)) {
                    for j in start..start + s {
                        row[j] = flow[j] as u32 + 1;
                    }
                }
            }
            row
        })
        .collect()
}

/// Lengths of the maximal runs of non-zero entries.
pub fn runs(row: &[u32]) -> Vec<usize> {
    row.split(|&v| v == 0).map(<[u32]>::len).filter(|&n| n > 0).collect()
}

// -------------------------------------------------------------- composer

/// Checks the composition rule position by position against the binary
/// pattern `rows` (k × d) and the cycle node sets. Returns the positions
/// where it fails.
pub fn four_case_violations(output: &[usize], rows: &[Vec<u32>], cycles: &[BTreeSet<usize>], q: usize) -> Vec<usize> {
    let d = output.len();
    let intersection = |j: usize| -> Option<BTreeSet<usize>> {
        let mut acc: Option<BTreeSet<usize>> = None;
        for (i, row) in rows.iter().enumerate() {
            if row[j] != 0 {
                acc = Some(match acc {
                    None => cycles[i].clone(),
                    Some(a) => a.intersection(&cycles[i]).copied().collect(),
                });
            }
        }
        acc
    };
    (0..d)
        .filter(|&j| {
            let x = output[j];
            if x >= q {
                return true;
            }
            match intersection(j) {
                Some(set) => !set.contains(&x),
                None => {
                    let before = if j > 0 { intersection(j - 1) } else { None };
                    let after = if j + 1 < d { intersection(j + 1) } else { None };
                    before.is_some_and(|b| b.contains(&x)) || after.is_some_and(|a| a.contains(&x))
                }
            }
        })
        .collect()
}

// --------------------------------------------------------------- numeric

/// Central finite difference of `f` at `x` along coordinate `i`.
pub fn central_difference(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut plus = x.to_vec();
    let mut minus = x.to_vec();
    plus[i] += h;
    minus[i] -= h;
    (f(&plus) - f(&minus)) / (2.0 * h)
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

// ----------------------------------------------------------- generators

/// A random flow over `q` nodes that repeatedly walks inside the given
/// cycles, with filler notes in between, and uses every node at least once.
pub fn cyclic_flow<R: Rng>(rng: &mut R, d: usize, q: usize, cycles: &[Vec<usize>], min_run: usize, max_run: usize) -> Vec<usize> {
    assert!(d >= q, "flow must be long enough to contain every node");
    let mut flow = Vec::with_capacity(d);
    while flow.len() < d {
        if !cycles.is_empty() && rng.gen_bool(0.7) {
            let c = &cycles[rng.gen_range(0..cycles.len())];
            let len = rng.gen_range(min_run..=max_run);
            let mut pos = rng.gen_range(0..c.len());
            for _ in 0..len {
                flow.push(c[pos]);
                pos = if rng.gen_bool(0.8) { (pos + 1) % c.len() } else { (pos + c.len() - 1) % c.len() };
            }
        } else {
            for _ in 0..rng.gen_range(1..=3) {
                flow.push(rng.gen_range(0..q));
            }
        }
    }
    flow.truncate(d);
    let mut counts = vec![0usize; q];
    for &n in &flow {
        counts[n] += 1;
    }
    for node in 0..q {
        if counts[node] > 0 {
            continue;
        }
        let slot = loop {
            let slot = rng.gen_range(0..d);
            if counts[flow[slot]] > 1 {
                break slot;
            }
        };
        counts[flow[slot]] -= 1;
        counts[node] += 1;
        flow[slot] = node;
    }
    flow
}

/// `count` random node sets of size `min..=max` drawn from `0..q`.
pub fn random_cycles<R: Rng>(rng: &mut R, q: usize, count: usize, min: usize, max: usize) -> Vec<Vec<usize>> {
    (0..count)
        .map(|_| {
            let mut nodes: Vec<usize> = (0..q).collect();
            nodes.shuffle(rng);
            nodes.truncate(rng.gen_range(min..=max).min(q));
            nodes
        })
        .collect()
}

pub fn node_sets(cycles: &[Vec<usize>]) -> Vec<BTreeSet<usize>> {
    cycles.iter().map(|c| c.iter().copied().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn brute_force_prefers_fewer_hops() {
        // 0-1 weight 1, 0-2-1 weights 9 and 9: direct edge wins on hops.
        let w = vec![vec![0, 1, 9], vec![1, 0, 9], vec![9, 9, 0]];
        let (hops, cost, path) = brute_force_route(&w, 0, 1).unwrap();
        assert_eq!((hops, cost, path), (1, r(1, 1), vec![0, 1]));
    }

    #[test]
    fn square_barcode() {
        let one = r(1, 1);
        let two = r(2, 1);
        let z = BigRational::zero();
        let dist = vec![
            vec![z.clone(), one.clone(), two.clone(), one.clone()],
            vec![one.clone(), z.clone(), one.clone(), two.clone()],
            vec![two.clone(), one.clone(), z.clone(), one.clone()],
            vec![one.clone(), two.clone(), one.clone(), z.clone()],
        ];
        let (bars, reps) = naive_barcode(&dist);
        let ones: Vec<_> = bars.iter().filter(|b| b.0 == 1).collect();
        assert_eq!(ones, vec![&(1, one.clone(), Some(two.clone()))]);
        assert_eq!(bars.iter().filter(|b| b.0 == 0).count(), 4);
        assert_eq!(reps[0].1, BTreeSet::from([0, 1, 2, 3]));
    }

    #[test]
    fn window_scan_marks_runs() {
        let cycles = vec![BTreeSet::from([0, 1])];
        let rows = window_scan_overlap(&[0, 1, 2, 1, 0, 1, 0], &cycles, 3);
        assert_eq!(rows[0], vec![0, 0, 0, 2, 1, 2, 1]);
        assert_eq!(runs(&rows[0]), vec![4]);
    }

    #[test]
    fn four_case_checker() {
        let cycles = vec![BTreeSet::from([1, 2])];
        let rows = vec![vec![0, 1, 0]];
        assert!(four_case_violations(&[0, 2, 3], &rows, &cycles, 4).is_empty());
        assert_eq!(four_case_violations(&[1, 0, 3], &rows, &cycles, 4), vec![0, 1]);
    }

    #[test]
    fn cyclic_flow_uses_every_node() {
        let mut g = rng(3);
        let cycles = random_cycles(&mut g, 33, 8, 4, 6);
        let flow = cyclic_flow(&mut g, 440, 33, &cycles, 3, 8);
        assert_eq!(flow.len(), 440);
        assert!((0..33).all(|n| flow.contains(&n)));
    }
}
