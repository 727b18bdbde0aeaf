//! Vietoris–Rips persistent homology in dimensions 0 and 1 over GF(2).
//!
//! The filtration is ordered exactly: distinct distances are ranked as rationals
//! before anything is converted to floating point, so simplices that enter at the
//! same scale are never split by rounding. Zero-length intervals (birth and death
//! at the same rank) are not reported.

use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::network::DistanceMatrix;
use crate::FORMAT_VERSION;

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    /// Strictly increasing node indices; 1 to 3 of them.
    pub vertices: Vec<usize>,
    /// Position of the entry value among the distinct filtration values (vertices are 0).
    pub rank: usize,
    pub value: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Simplices in filtration order: (value, dimension, lexicographic vertices).
#[derive(Debug, Clone)]
pub struct Filtration {
    simplices: Vec<Simplex>,
}

impl Filtration {
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.dim() == dim).count()
    }
}

/// All vertices, edges and triangles of the Rips complex of `dist`.
pub fn build_rips(dist: &DistanceMatrix) -> Filtration {
    let q = dist.size();
    let mut levels: Vec<&BigRational> = Vec::with_capacity(q * q / 2);
    for i in 0..q {
        for j in (i + 1)..q {
            levels.push(dist.get(i, j));
        }
    }
    levels.sort();
    levels.dedup();
    let rank_of = |i: usize, j: usize| -> usize {
        1 + levels.binary_search(&dist.get(i, j)).expect("level was collected")
    };
    let values: Vec<f64> = std::iter::once(0.0)
        .chain(levels.iter().map(|v| v.to_f64().unwrap_or(f64::INFINITY)))
        .collect();

    let mut edge_rank = vec![0usize; q * q];
    for i in 0..q {
        for j in (i + 1)..q {
            let r = rank_of(i, j);
            edge_rank[i * q + j] = r;
            edge_rank[j * q + i] = r;
        }
    }

    let mut simplices = Vec::with_capacity(q + q * q / 2 + q * q * q / 6);
    for v in 0..q {
        simplices.push(Simplex { vertices: vec![v], rank: 0, value: 0.0 });
    }
    for i in 0..q {
        for j in (i + 1)..q {
            let rank = edge_rank[i * q + j];
            simplices.push(Simplex { vertices: vec![i, j], rank, value: values[rank] });
        }
    }
    for i in 0..q {
        for j in (i + 1)..q {
            for k in (j + 1)..q {
                let rank = edge_rank[i * q + j].max(edge_rank[i * q + k]).max(edge_rank[j * q + k]);
                simplices.push(Simplex { vertices: vec![i, j, k], rank, value: values[rank] });
            }
        }
    }
    simplices.sort_by(|a, b| {
        a.rank
            .cmp(&b.rank)
            .then(a.vertices.len().cmp(&b.vertices.len()))
            .then_with(|| a.vertices.cmp(&b.vertices))
    });
    Filtration { simplices }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceInterval {
    pub dim: usize,
    pub birth: f64,
    /// `None` for an interval that never dies.
    pub death: Option<f64>,
    pub birth_rank: usize,
    pub death_rank: Option<usize>,
}

impl PersistenceInterval {
    pub fn is_infinite(&self) -> bool {
        self.death.is_none()
    }
}

/// A 1-cycle killed by a triangle: the reduced boundary column of that triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Representative {
    pub interval: PersistenceInterval,
    pub edges: Vec<(usize, usize)>,
    pub nodes: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Persistence {
    /// Sorted by (dim, birth, death); infinite deaths last.
    pub intervals: Vec<PersistenceInterval>,
    /// One per finite dimension-1 interval.
    pub representatives: Vec<Representative>,
}

impl Persistence {
    pub fn dim(&self, dim: usize) -> impl Iterator<Item = &PersistenceInterval> {
        self.intervals.iter().filter(move |iv| iv.dim == dim)
    }
}

/// XOR of two sorted index columns.
fn add_columns(target: &mut Vec<u32>, other: &[u32]) {
    let mut out = Vec::with_capacity(target.len() + other.len());
    let (mut a, mut b) = (0, 0);
    while a < target.len() && b < other.len() {
        match target[a].cmp(&other[b]) {
            std::cmp::Ordering::Less => {
                out.push(target[a]);
                a += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(other[b]);
                b += 1;
            }
            std::cmp::Ordering::Equal => {
                a += 1;
                b += 1;
            }
        }
    }
    out.extend_from_slice(&target[a..]);
    out.extend_from_slice(&other[b..]);
    *target = out;
}

/// Standard column reduction with clearing, highest dimension first.
pub fn reduce(filtration: &Filtration) -> Persistence {
    let simplices = &filtration.simplices;
    let n = simplices.len();
    let index: HashMap<&[usize], u32> = simplices
        .iter()
        .enumerate()
        .map(|(i, s)| (s.vertices.as_slice(), i as u32))
        .collect();
    let boundary = |s: &Simplex| -> Vec<u32> {
        let mut col: Vec<u32> = match s.vertices.as_slice() {
            [_] => Vec::new(),
            [a, b] => vec![index[&[*a][..]], index[&[*b][..]]],
            [a, b, c] => vec![index[&[*a, *b][..]], index[&[*a, *c][..]], index[&[*b, *c][..]]],
            _ => unreachable!("rips complex is built up to triangles"),
        };
        col.sort_unstable();
        col
    };

    // paired_with[birth simplex] = death simplex
    let mut paired_with: Vec<Option<usize>> = vec![None; n];
    let mut is_death = vec![false; n];
    let mut reduced: HashMap<usize, Vec<u32>> = HashMap::new();

    for dim in [2usize, 1] {
        let mut pivot_owner: HashMap<u32, usize> = HashMap::new();
        let mut columns: HashMap<usize, Vec<u32>> = HashMap::new();
        for (j, s) in simplices.iter().enumerate() {
            if s.dim() != dim || paired_with[j].is_some() {
                continue;
            }
            let mut col = boundary(s);
            while let Some(&low) = col.last() {
                match pivot_owner.get(&low) {
                    Some(&owner) => add_columns(&mut col, &columns[&owner]),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                pivot_owner.insert(low, j);
                paired_with[low as usize] = Some(j);
                is_death[j] = true;
                if dim == 2 {
                    reduced.insert(j, col.clone());
                }
                columns.insert(j, col);
            }
        }
    }

    let mut intervals = Vec::new();
    let mut representatives = Vec::new();
    for (i, s) in simplices.iter().enumerate() {
        if is_death[i] || s.dim() > 1 {
            continue;
        }
        match paired_with[i] {
            Some(j) => {
                let t = &simplices[j];
                if t.rank == s.rank {
                    continue;
                }
                let iv = PersistenceInterval {
                    dim: s.dim(),
                    birth: s.value,
                    death: Some(t.value),
                    birth_rank: s.rank,
                    death_rank: Some(t.rank),
                };
                if s.dim() == 1 {
                    let edges: Vec<(usize, usize)> = reduced[&j]
                        .iter()
                        .map(|&e| {
                            let v = &simplices[e as usize].vertices;
                            (v[0], v[1])
                        })
                        .collect();
                    let nodes = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
                    representatives.push(Representative { interval: iv.clone(), edges, nodes });
                }
                intervals.push(iv);
            }
            None => intervals.push(PersistenceInterval {
                dim: s.dim(),
                birth: s.value,
                death: None,
                birth_rank: s.rank,
                death_rank: None,
            }),
        }
    }
    intervals.sort_by_key(|iv| (iv.dim, iv.birth_rank, iv.death_rank.is_none(), iv.death_rank));
    Persistence { intervals, representatives }
}

/// Convenience: filtration and reduction in one call.
pub fn rips_persistence(dist: &DistanceMatrix) -> Persistence {
    reduce(&build_rips(dist))
}

/// A persistent 1-cycle, numbered from 1 in order of death.
#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    pub ordinal: usize,
    pub nodes: BTreeSet<usize>,
    pub interval: PersistenceInterval,
}

/// Orders representatives by death, then birth, then node set, and numbers them.
pub fn extract_cycles(persistence: &Persistence) -> Vec<Cycle> {
    let mut reps: Vec<&Representative> = persistence.representatives.iter().collect();
    reps.sort_by(|a, b| {
        a.interval
            .death_rank
            .cmp(&b.interval.death_rank)
            .then(a.interval.birth_rank.cmp(&b.interval.birth_rank))
            .then_with(|| a.nodes.cmp(&b.nodes))
    });
    reps.into_iter()
        .enumerate()
        .map(|(i, r)| Cycle {
            ordinal: i + 1,
            nodes: r.nodes.clone(),
            interval: r.interval.clone(),
        })
        .collect()
}

pub fn cycle_node_sets(cycles: &[Cycle]) -> Vec<BTreeSet<usize>> {
    cycles.iter().map(|c| c.nodes.clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalEntry {
    pub dim: usize,
    pub birth: f64,
    pub death: Option<f64>,
}

/// `barcode.json`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarcodeDocument {
    pub format_version: u32,
    pub intervals: Vec<IntervalEntry>,
}

impl BarcodeDocument {
    pub fn new(p: &Persistence) -> BarcodeDocument {
        BarcodeDocument {
            format_version: FORMAT_VERSION,
            intervals: p
                .intervals
                .iter()
                .map(|iv| IntervalEntry { dim: iv.dim, birth: iv.birth, death: iv.death })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleEntry {
    pub ordinal: usize,
    pub nodes: Vec<usize>,
    pub birth: f64,
    pub death: Option<f64>,
}

/// `cycles.json`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclesDocument {
    pub format_version: u32,
    pub cycles: Vec<CycleEntry>,
}

impl CyclesDocument {
    pub fn new(cycles: &[Cycle]) -> CyclesDocument {
        CyclesDocument {
            format_version: FORMAT_VERSION,
            cycles: cycles
                .iter()
                .map(|c| CycleEntry {
                    ordinal: c.ordinal,
                    nodes: c.nodes.iter().copied().collect(),
                    birth: c.interval.birth,
                    death: c.interval.death,
                })
                .collect(),
        }
    }

    /// Node sets in ordinal order.
    pub fn node_sets(&self) -> Vec<BTreeSet<usize>> {
        let mut entries: Vec<&CycleEntry> = self.cycles.iter().collect();
        entries.sort_by_key(|c| c.ordinal);
        entries.iter().map(|c| c.nodes.iter().copied().collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn dist(q: usize, f: impl Fn(usize, usize) -> i64) -> DistanceMatrix {
        DistanceMatrix::from_fn(q, |i, j| BigRational::from_integer(BigInt::from(f(i, j)))).unwrap()
    }

    fn square() -> DistanceMatrix {
        // 0-1-2-3-0 sides at 1, diagonals 0-2 and 1-3 at 2
        dist(4, |i, j| if (i + 2) % 4 == j || (j + 2) % 4 == i { 2 } else { 1 })
    }

    #[test]
    fn equilateral_triangle_counts() {
        let f = build_rips(&dist(3, |_, _| 1));
        assert_eq!(f.count_dim(0), 3);
        assert_eq!(f.count_dim(1), 3);
        assert_eq!(f.count_dim(2), 1);
        assert!(f.simplices()[3..].iter().all(|s| s.value == 1.0));
    }

    #[test]
    fn triangle_count_for_33_nodes() {
        let f = build_rips(&dist(33, |i, j| (i + j) as i64 % 5 + 1));
        assert_eq!(f.count_dim(2), 5456);
        assert_eq!(f.count_dim(1), 528);
    }

    #[test]
    fn faces_precede_cofaces() {
        let f = build_rips(&square());
        let pos: HashMap<&[usize], usize> = f.simplices().iter().enumerate().map(|(i, s)| (s.vertices.as_slice(), i)).collect();
        for (i, s) in f.simplices().iter().enumerate() {
            for skip in 0..s.vertices.len() {
                if s.vertices.len() == 1 {
                    break;
                }
                let face: Vec<usize> = s.vertices.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v).collect();
                assert!(pos[face.as_slice()] < i);
            }
        }
        let diag: Vec<_> = f.simplices().iter().filter(|s| s.dim() == 1 && s.value == 2.0).map(|s| s.vertices.clone()).collect();
        assert_eq!(diag, vec![vec![0, 2], vec![1, 3]]);
        assert!(f.simplices().iter().filter(|s| s.dim() == 2).all(|s| s.value == 2.0));
    }

    #[test]
    fn square_has_one_loop() {
        let p = rips_persistence(&square());
        let h1: Vec<_> = p.dim(1).collect();
        assert_eq!(h1.len(), 1);
        assert_eq!((h1[0].birth, h1[0].death), (1.0, Some(2.0)));
        let h0: Vec<_> = p.dim(0).collect();
        assert_eq!(h0.len(), 4);
        assert_eq!(h0.iter().filter(|iv| iv.is_infinite()).count(), 1);
        let cycles = extract_cycles(&p);
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].ordinal, 1);
        assert_eq!(cycles[0].nodes, BTreeSet::from([0, 1, 2, 3]));
    }

    #[test]
    fn tree_metric_has_no_loops() {
        // path graph 0-1-2-3-4 with unit edges: d(i,j) = |i-j|
        let p = rips_persistence(&dist(5, |i, j| (j as i64 - i as i64).abs()));
        assert_eq!(p.dim(1).count(), 0);
        assert_eq!(p.dim(0).count(), 5);
    }

    #[test]
    fn representative_chains_are_cycles() {
        let d = dist(6, |i, j| ((i * 7 + j * 3) % 5 + 1) as i64);
        let p = rips_persistence(&d);
        for r in &p.representatives {
            let mut degree = HashMap::new();
            for &(a, b) in &r.edges {
                *degree.entry(a).or_insert(0) += 1;
                *degree.entry(b).or_insert(0) += 1;
            }
            assert!(degree.values().all(|d| d % 2 == 0));
            assert!(r.nodes.len() >= 3);
        }
    }

    #[test]
    fn cycles_order_by_death_then_birth() {
        let iv = |b: usize, d: usize| PersistenceInterval {
            dim: 1,
            birth: b as f64,
            death: Some(d as f64),
            birth_rank: b,
            death_rank: Some(d),
        };
        let rep = |b, d, nodes: &[usize]| Representative {
            interval: iv(b, d),
            edges: vec![],
            nodes: nodes.iter().copied().collect(),
        };
        let p = Persistence {
            intervals: vec![],
            representatives: vec![rep(2, 5, &[4, 5, 6]), rep(1, 5, &[7, 8, 9]), rep(1, 5, &[1, 2, 3]), rep(3, 4, &[0, 1, 2])],
        };
        let order: Vec<Vec<usize>> = extract_cycles(&p).iter().map(|c| c.nodes.iter().copied().collect()).collect();
        assert_eq!(order, vec![vec![0, 1, 2], vec![1, 2, 3], vec![7, 8, 9], vec![4, 5, 6]]);
    }
}
