//! Synthetic seed overlap matrices with the size and texture of a source matrix.
//!
//! Three generators, all producing an integer matrix of the same shape:
//! - [`seed_rowwise`] re-places each row's blocks at random, keeping the number
//!   of blocks per row and avoiding positions owned by cycles that never
//!   co-survive with that row;
//! - [`seed_elementwise`] keeps the support and redraws every payload from its
//!   row's cycle;
//! - [`seed_columnwise`] chains whole columns, drawing each next column from the
//!   observed successor statistics while keeping every block at least `s` long.

use std::collections::{BTreeMap, BTreeSet};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::error::{Error, Result};
use crate::overlap::{binarize, block_counts, run_lengths, validate_s_scale, MatrixKind, OverlapMatrix};

/// Upper bound on restarts before a generator gives up.
pub const MAX_RETRIES: usize = 1000;

/// Pattern statistics of a matrix, computed on its binary support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternStats {
    /// Maximal nonzero runs per row.
    pub block_counts: Vec<usize>,
    pub run_lengths: Vec<Vec<usize>>,
    /// Distinct binary columns, sorted, with how often each occurs.
    pub columns: Vec<(Vec<u32>, usize)>,
    /// For each distinct column, the lengths of its maximal repeats.
    pub repeats: Vec<Vec<usize>>,
    /// For each distinct column, how often each other column follows a repeat of it.
    pub successors: Vec<BTreeMap<usize, usize>>,
}

impl PatternStats {
    pub fn of(m: &OverlapMatrix) -> PatternStats {
        let b = binarize(m);
        let cols = b.columns();
        let mut freq: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        for c in &cols {
            *freq.entry(c.clone()).or_default() += 1;
        }
        let id: BTreeMap<&Vec<u32>, usize> = freq.keys().enumerate().map(|(i, c)| (c, i)).collect();
        let mut repeats = vec![Vec::new(); freq.len()];
        let mut successors = vec![BTreeMap::new(); freq.len()];
        let mut j = 0;
        while j < cols.len() {
            let c = id[&cols[j]];
            let mut end = j + 1;
            while end < cols.len() && cols[end] == cols[j] {
                end += 1;
            }
            repeats[c].push(end - j);
            if end < cols.len() {
                *successors[c].entry(id[&cols[end]]).or_default() += 1;
            }
            j = end;
        }
        PatternStats {
            block_counts: block_counts(&b),
            run_lengths: b.rows().iter().map(|r| run_lengths(r)).collect(),
            columns: freq.into_iter().collect(),
            repeats,
            successors,
        }
    }
}

fn check_input(m: &OverlapMatrix, cycles: &[BTreeSet<usize>]) -> Result<()> {
    m.require(MatrixKind::Integer)?;
    if cycles.len() != m.k() {
        return Err(Error::DimensionMismatch(format!("{} cycles for a matrix with {} rows", cycles.len(), m.k())));
    }
    Ok(())
}

fn pick<R: Rng + ?Sized>(rng: &mut R, set: &BTreeSet<usize>) -> usize {
    *set.iter().nth(rng.gen_range(0..set.len())).expect("nonempty set")
}

/// Row-by-row generator.
///
/// Cycle `i'` "does not overlap" cycle `i` when their rows never have a 1 in the
/// same column. Blocks in row `i` may not start at a position whose note (read
/// from the payloads of `m`) belongs to such a cycle. Each row gets as many
/// blocks as the source row, each exactly `s` long and separated from the others
/// by at least one empty column. Every nonzero column then takes one node drawn
/// from the union of its active cycles.
pub fn seed_rowwise<R: Rng + ?Sized>(m: &OverlapMatrix, cycles: &[BTreeSet<usize>], s: usize, rng: &mut R) -> Result<OverlapMatrix> {
    check_input(m, cycles)?;
    if s < 1 {
        return Err(Error::InvalidScale(s));
    }
    let (k, d) = (m.k(), m.d());
    let b = binarize(m);
    let counts = block_counts(&b);

    let note_at: Vec<Option<usize>> = (0..d)
        .map(|j| m.column(j).into_iter().find(|&v| v != 0).map(|v| v as usize - 1))
        .collect();

    let mut placed = vec![vec![0u32; d]; k];
    for i in 0..k {
        let disjoint: Vec<usize> = (0..k)
            .filter(|&o| o != i && (0..d).all(|j| b.get(i, j) == 0 || b.get(o, j) == 0))
            .collect();
        let foreign: BTreeSet<usize> = disjoint.iter().flat_map(|&o| cycles[o].iter().copied()).collect();
        let starts: Vec<usize> = if d >= s {
            (0..=d - s)
                .filter(|&j| note_at[j].is_none_or(|n| !foreign.contains(&n)))
                .collect()
        } else {
            Vec::new()
        };
        let chosen = place_blocks(rng, &starts, counts[i], s).ok_or_else(|| {
            Error::SeedPlacementFailed(format!(
                "row {} needs {} separated blocks of length {s} but only {} start positions are allowed",
                i + 1,
                counts[i],
                starts.len()
            ))
        })?;
        for start in chosen {
            placed[i][start..start + s].fill(1);
        }
    }

    let mut rows = vec![vec![0u32; d]; k];
    for j in 0..d {
        let active: Vec<usize> = (0..k).filter(|&i| placed[i][j] != 0).collect();
        if active.is_empty() {
            continue;
        }
        let union: BTreeSet<usize> = active.iter().flat_map(|&i| cycles[i].iter().copied()).collect();
        if union.is_empty() {
            return Err(Error::SeedPlacementFailed(format!("column {} has only empty cycles", j + 1)));
        }
        let node = pick(rng, &union) as u32 + 1;
        for &i in &active {
            rows[i][j] = node;
        }
    }
    OverlapMatrix::new(MatrixKind::Integer, s, d, rows)
}

/// Chooses `count` block starts from `allowed` so that blocks of length `len`
/// neither overlap nor touch. Restarts on dead ends.
fn place_blocks<R: Rng + ?Sized>(rng: &mut R, allowed: &[usize], count: usize, len: usize) -> Option<Vec<usize>> {
    if count == 0 {
        return Some(Vec::new());
    }
    'attempt: for _ in 0..MAX_RETRIES {
        let mut chosen: Vec<usize> = Vec::with_capacity(count);
        for _ in 0..count {
            let free: Vec<usize> = allowed
                .iter()
                .copied()
                .filter(|&a| chosen.iter().all(|&c| a.abs_diff(c) > len))
                .collect();
            if free.is_empty() {
                continue 'attempt;
            }
            chosen.push(free[rng.gen_range(0..free.len())]);
        }
        chosen.sort_unstable();
        return Some(chosen);
    }
    None
}

/// Element-by-element generator: same support, payloads redrawn uniformly from
/// each row's cycle.
pub fn seed_elementwise<R: Rng + ?Sized>(m: &OverlapMatrix, cycles: &[BTreeSet<usize>], rng: &mut R) -> Result<OverlapMatrix> {
    check_input(m, cycles)?;
    let mut rows = Vec::with_capacity(m.k());
    for (i, row) in m.rows().iter().enumerate() {
        let mut out = vec![0u32; m.d()];
        for (j, &v) in row.iter().enumerate() {
            if v == 0 {
                continue;
            }
            if cycles[i].is_empty() {
                return Err(Error::DimensionMismatch(format!("row {} is nonzero but its cycle is empty", i + 1)));
            }
            out[j] = pick(rng, &cycles[i]) as u32 + 1;
        }
        rows.push(out);
    }
    OverlapMatrix::new(MatrixKind::Integer, m.scale(), m.d(), rows)
}

/// Column-by-column generator.
///
/// Columns are drawn from the source's distinct binary columns: the first by
/// overall frequency, each later one from the columns observed right after the
/// current one (falling back to overall frequency when the current column was
/// never followed). Each draw is repeated by a length sampled from that column's
/// observed repeats. A transition is only taken if it closes no run shorter than
/// `s` and, when it opens a run, at least `s` columns remain; otherwise the
/// current column is extended by one. A draw is accepted when every row's block
/// count is within one of the source's. Payloads are copied from a random
/// source column with the same support.
pub fn seed_columnwise<R: Rng + ?Sized>(m: &OverlapMatrix, cycles: &[BTreeSet<usize>], s: usize, rng: &mut R) -> Result<OverlapMatrix> {
    check_input(m, cycles)?;
    if s < 1 {
        return Err(Error::InvalidScale(s));
    }
    let (k, d) = (m.k(), m.d());
    if d == 0 {
        return Ok(OverlapMatrix::zeros(MatrixKind::Integer, s, k, 0));
    }
    let stats = PatternStats::of(m);
    let binary = seed_columnwise_support(&stats, k, d, s, rng)?;

    // distinct integer columns grouped by support
    let mut by_support: BTreeMap<Vec<u32>, BTreeSet<Vec<u32>>> = BTreeMap::new();
    for col in m.columns() {
        let support: Vec<u32> = col.iter().map(|&v| u32::from(v != 0)).collect();
        by_support.entry(support).or_default().insert(col);
    }
    let columns: Vec<Vec<u32>> = binary
        .iter()
        .map(|support| {
            let options = &by_support[support];
            options.iter().nth(rng.gen_range(0..options.len())).expect("nonempty").clone()
        })
        .collect();
    Ok(OverlapMatrix::from_columns(MatrixKind::Integer, s, k, &columns))
}

fn seed_columnwise_support<R: Rng + ?Sized>(stats: &PatternStats, k: usize, d: usize, s: usize, rng: &mut R) -> Result<Vec<Vec<u32>>> {
    let all_weights: Vec<usize> = stats.columns.iter().map(|(_, f)| *f).collect();
    let overall = WeightedIndex::new(&all_weights).expect("at least one column with positive count");

    for _ in 0..MAX_RETRIES {
        let mut out: Vec<usize> = Vec::with_capacity(d);
        let mut run = vec![0usize; k];
        let place = |out: &mut Vec<usize>, run: &mut Vec<usize>, c: usize, times: usize| {
            for _ in 0..times {
                for (i, r) in run.iter_mut().enumerate() {
                    *r = if stats.columns[c].0[i] != 0 { *r + 1 } else { 0 };
                }
                out.push(c);
            }
        };
        let repeat = |rng: &mut R, c: usize| {
            let options = &stats.repeats[c];
            options[rng.gen_range(0..options.len())]
        };

        let mut current = overall.sample(rng);
        let times = repeat(rng, current).min(d);
        place(&mut out, &mut run, current, times);
        while out.len() < d {
            let remaining = d - out.len();
            let from = &stats.columns[current].0;
            let feasible = |c: usize| {
                let to = &stats.columns[c].0;
                (0..k).all(|i| {
                    let closes = from[i] != 0 && to[i] == 0;
                    let opens = from[i] == 0 && to[i] != 0;
                    (!closes || run[i] >= s) && (!opens || remaining >= s)
                })
            };
            let candidates: Vec<(usize, usize)> = if stats.successors[current].is_empty() {
                stats.columns.iter().enumerate().map(|(c, (_, f))| (c, *f)).collect()
            } else {
                stats.successors[current].iter().map(|(&c, &n)| (c, n)).collect()
            };
            let candidates: Vec<(usize, usize)> = candidates.into_iter().filter(|&(c, _)| c != current && feasible(c)).collect();
            if candidates.is_empty() {
                place(&mut out, &mut run, current, 1);
                continue;
            }
            let weights: Vec<usize> = candidates.iter().map(|&(_, w)| w).collect();
            let next = candidates[WeightedIndex::new(&weights).expect("positive weights").sample(rng)].0;
            let times = repeat(rng, next).min(remaining);
            place(&mut out, &mut run, next, times);
            current = next;
        }

        let support: Vec<Vec<u32>> = out.iter().map(|&c| stats.columns[c].0.clone()).collect();
        let candidate = OverlapMatrix::from_columns(MatrixKind::Binary, s, k, &support);
        let counts = block_counts(&candidate);
        let similar = counts.iter().zip(&stats.block_counts).all(|(&a, &b)| a.abs_diff(b) <= 1);
        if similar && validate_s_scale(&candidate, s) {
            return Ok(support);
        }
    }
    Err(Error::SeedPlacementFailed(format!(
        "no column sequence with block counts within one of {:?} after {MAX_RETRIES} attempts",
        stats.block_counts
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedAlgorithm {
    RowWise,
    ElementWise,
    ColumnWise,
}

impl SeedAlgorithm {
    pub fn from_number(n: u8) -> Option<SeedAlgorithm> {
        match n {
            1 => Some(SeedAlgorithm::RowWise),
            2 => Some(SeedAlgorithm::ElementWise),
            3 => Some(SeedAlgorithm::ColumnWise),
            _ => None,
        }
    }

    pub fn generate<R: Rng + ?Sized>(self, m: &OverlapMatrix, cycles: &[BTreeSet<usize>], s: usize, rng: &mut R) -> Result<OverlapMatrix> {
        match self {
            SeedAlgorithm::RowWise => seed_rowwise(m, cycles, s, rng),
            SeedAlgorithm::ElementWise => seed_elementwise(m, cycles, rng),
            SeedAlgorithm::ColumnWise => seed_columnwise(m, cycles, s, rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlap::integer_overlap;
    use crate::rng::seeded;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    fn integer(rows: Vec<Vec<u32>>, s: usize) -> OverlapMatrix {
        let d = rows[0].len();
        OverlapMatrix::new(MatrixKind::Integer, s, d, rows).unwrap()
    }

    #[test]
    fn stats_of_small_matrix() {
        let m = integer(vec![vec![1, 1, 0, 0, 2, 2, 2, 0]], 2);
        let st = PatternStats::of(&m);
        assert_eq!(st.block_counts, vec![2]);
        assert_eq!(st.run_lengths, vec![vec![2, 3]]);
        assert_eq!(st.columns, vec![(vec![0], 3), (vec![1], 5)]);
        assert_eq!(st.repeats, vec![vec![2, 1], vec![2, 3]]);
        assert_eq!(st.successors[0], BTreeMap::from([(1, 1)]));
        assert_eq!(st.successors[1], BTreeMap::from([(0, 2)]));
    }

    #[test]
    fn rowwise_two_blocks_in_twenty() {
        let mut row = vec![0u32; 20];
        row[1..6].fill(3);
        row[10..14].fill(4);
        let m = integer(vec![row], 4);
        let cycles = [set(&[2, 3])];
        for seed in 0..50 {
            let out = seed_rowwise(&m, &cycles, 4, &mut seeded(seed)).unwrap();
            let b = binarize(&out);
            assert_eq!(run_lengths(&b.rows()[0]), vec![4, 4]);
            assert!(validate_s_scale(&b, 4));
            assert!(out.rows()[0].iter().all(|&v| v == 0 || v == 3 || v == 4));
        }
    }

    #[test]
    fn rowwise_avoids_disjoint_cycle_positions() {
        // rows never co-survive; every note of cycle 2 is forbidden as a start for row 1
        let flow = [0, 1, 2, 3, 4, 5, 6, 7, 0, 1, 2, 3, 9, 9, 9, 9];
        let cycles = [set(&[0, 1, 2, 3]), set(&[4, 5, 6, 7])];
        let m = integer_overlap(&flow, &cycles, 4).unwrap();
        for seed in 0..30 {
            let out = seed_rowwise(&m, &cycles, 4, &mut seeded(seed)).unwrap();
            let row = &binarize(&out).rows()[0].clone();
            let starts: Vec<usize> = (0..row.len()).filter(|&j| row[j] == 1 && (j == 0 || row[j - 1] == 0)).collect();
            assert!(starts.iter().all(|&j| !(4..8).contains(&j)), "{starts:?}");
        }
    }

    #[test]
    fn rowwise_reports_infeasible_placement() {
        let mut row = vec![0u32; 9];
        row[0..4].fill(1);
        row[5..9].fill(1);
        let m = integer(vec![row, vec![0; 9]], 4);
        // pretend the second row's cycle covers every note so no start is allowed
        let out = seed_rowwise(&m, &[set(&[0]), set(&[0])], 4, &mut seeded(0));
        assert!(matches!(out, Err(Error::SeedPlacementFailed(_))));
    }

    #[test]
    fn elementwise_keeps_support() {
        let flow = [0, 1, 2, 3, 0, 5, 1, 2, 3, 0, 1];
        let cycles = [set(&[0, 1, 2, 3]), set(&[1, 2, 3])];
        let m = integer_overlap(&flow, &cycles, 3).unwrap();
        let out = seed_elementwise(&m, &cycles, &mut seeded(1)).unwrap();
        assert_eq!(binarize(&out), binarize(&m));
        for (i, row) in out.rows().iter().enumerate() {
            assert!(row.iter().all(|&v| v == 0 || cycles[i].contains(&(v as usize - 1))));
        }
    }

    #[test]
    fn elementwise_singleton_cycles_are_determined() {
        let m = integer(vec![vec![0, 5, 5, 5, 5, 0]], 4);
        let out = seed_elementwise(&m, &[set(&[4])], &mut seeded(2)).unwrap();
        assert_eq!(out, m);
    }

    #[test]
    fn columnwise_single_pattern() {
        let mut row = vec![0u32; 30];
        row[2..8].fill(1);
        row[15..21].fill(2);
        let m = integer(vec![row.clone(), row], 4);
        let cycles = [set(&[0, 1]), set(&[0, 1])];
        let out = seed_columnwise(&m, &cycles, 4, &mut seeded(4)).unwrap();
        let b = binarize(&out);
        assert!(validate_s_scale(&b, 4));
        for col in b.columns() {
            assert!(col == vec![0, 0] || col == vec![1, 1]);
        }
    }

    #[test]
    fn algorithms_are_deterministic() {
        let flow = [0, 1, 2, 3, 0, 1, 6, 6, 2, 3, 2, 3, 1, 0, 7, 7, 7, 1, 2, 3, 0];
        let cycles = [set(&[0, 1, 2, 3]), set(&[2, 3, 6])];
        let m = integer_overlap(&flow, &cycles, 3).unwrap();
        for algo in [SeedAlgorithm::RowWise, SeedAlgorithm::ElementWise, SeedAlgorithm::ColumnWise] {
            let a = algo.generate(&m, &cycles, 3, &mut seeded(8)).unwrap();
            let b = algo.generate(&m, &cycles, 3, &mut seeded(8)).unwrap();
            assert_eq!(a, b);
            assert_eq!((a.k(), a.d()), (m.k(), m.d()));
        }
    }

    #[test]
    fn binary_input_is_rejected() {
        let m = binarize(&integer(vec![vec![1, 1, 1, 1]], 4));
        assert!(matches!(seed_elementwise(&m, &[set(&[0])], &mut seeded(0)), Err(Error::WrongMatrixKind { .. })));
    }
}
