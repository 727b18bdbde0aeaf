//! Overlap matrices: where along the flow each persistent cycle is traced out by a
//! run of at least `s` consecutive notes.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::FORMAT_VERSION;

/// Default scale used throughout the pipeline.
pub const DEFAULT_SCALE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Binary,
    Integer,
}

impl MatrixKind {
    fn name(self) -> &'static str {
        match self {
            MatrixKind::Binary => "binary",
            MatrixKind::Integer => "integer",
        }
    }
}

/// A `k × d` overlap matrix of scale `s`.
///
/// Integer entries are `node index + 1`, with `0` meaning the cycle does not
/// survive at that position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapMatrix {
    kind: MatrixKind,
    scale: usize,
    d: usize,
    rows: Vec<Vec<u32>>,
}

impl OverlapMatrix {
    pub fn new(kind: MatrixKind, scale: usize, d: usize, rows: Vec<Vec<u32>>) -> Result<OverlapMatrix> {
        if scale < 1 {
            return Err(Error::InvalidScale(scale));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::DimensionMismatch(format!("row {i} has {} columns, expected {d}", r.len())));
        }
        if kind == MatrixKind::Binary && rows.iter().flatten().any(|&v| v > 1) {
            return Err(Error::InvalidConfig("binary matrix entries must be 0 or 1".into()));
        }
        Ok(OverlapMatrix { kind, scale, d, rows })
    }

    pub fn zeros(kind: MatrixKind, scale: usize, k: usize, d: usize) -> OverlapMatrix {
        OverlapMatrix { kind, scale: scale.max(1), d, rows: vec![vec![0; d]; k] }
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    /// Number of cycles (rows).
    pub fn k(&self) -> usize {
        self.rows.len()
    }

    /// Flow length (columns).
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.rows[i][j]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<u32>> {
        (0..self.d).map(|j| self.column(j)).collect()
    }

    /// Rebuilds a matrix of the same kind and scale from columns.
    pub fn from_columns(kind: MatrixKind, scale: usize, k: usize, columns: &[Vec<u32>]) -> OverlapMatrix {
        let d = columns.len();
        let mut rows = vec![vec![0; d]; k];
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                rows[i][j] = v;
            }
        }
        OverlapMatrix { kind, scale: scale.max(1), d, rows }
    }

    pub fn require(&self, kind: MatrixKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::WrongMatrixKind { expected: kind.name(), found: self.kind.name() })
        }
    }

    pub fn to_document(&self) -> OverlapDocument {
        OverlapDocument {
            format_version: FORMAT_VERSION,
            kind: self.kind,
            s: self.scale,
            k: self.k(),
            d: self.d,
            rows: self.rows.clone(),
        }
    }

    pub fn from_document(doc: OverlapDocument) -> Result<OverlapMatrix> {
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion { found: doc.format_version, expected: FORMAT_VERSION });
        }
        if doc.rows.len() != doc.k {
            return Err(Error::DimensionMismatch(format!("k = {} but {} rows given", doc.k, doc.rows.len())));
        }
        OverlapMatrix::new(doc.kind, doc.s, doc.d, doc.rows)
    }

    /// Rows as comma-separated values, one line per cycle.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Plain-text PGM image of the support: survivors black, everything else white.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n1\n", self.d, self.k());
        for row in &self.rows {
            let line: Vec<&str> = row.iter().map(|&v| if v > 0 { "0" } else { "1" }).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

/// `overlap.json`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapDocument {
    pub format_version: u32,
    pub kind: MatrixKind,
    pub s: usize,
    pub k: usize,
    pub d: usize,
    pub rows: Vec<Vec<u32>>,
}

/// Integer overlap matrix of scale `s` for a flow of node indices.
///
/// Row `i` carries `node + 1` at every position covered by a maximal run of
/// consecutive notes from cycle `i` that is at least `s` notes long, including a
/// run that reaches the end of the flow.
pub fn integer_overlap(flow: &[usize], cycles: &[BTreeSet<usize>], s: usize) -> Result<OverlapMatrix> {
    if s < 1 {
        return Err(Error::InvalidScale(s));
    }
    let d = flow.len();
    let rows = cycles
        .iter()
        .map(|cycle| {
            let mut row = vec![0u32; d];
            let mut j = 0;
            while j < d {
                // first position at or after j inside the cycle
                let Some(start) = (j..d).find(|&b| cycle.contains(&flow[b])) else {
                    break;
                };
                // first position after start outside the cycle, or d
                let end = ((start + 1)..d).find(|&g| !cycle.contains(&flow[g])).unwrap_or(d);
                if end - start >= s {
                    for col in start..end {
                        row[col] = flow[col] as u32 + 1;
                    }
                }
                j = end;
            }
            row
        })
        .collect();
    Ok(OverlapMatrix { kind: MatrixKind::Integer, scale: s, d, rows })
}

/// Binary overlap matrix: the support of the integer one.
pub fn binarize(m: &OverlapMatrix) -> OverlapMatrix {
    OverlapMatrix {
        kind: MatrixKind::Binary,
        scale: m.scale,
        d: m.d,
        rows: m.rows.iter().map(|r| r.iter().map(|&v| u32::from(v != 0)).collect()).collect(),
    }
}

/// Lengths of the maximal runs of nonzero entries in a row.
pub fn run_lengths(row: &[u32]) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut current = 0;
    for &v in row {
        if v != 0 {
            current += 1;
        } else if current > 0 {
            runs.push(current);
            current = 0;
        }
    }
    if current > 0 {
        runs.push(current);
    }
    runs
}

/// Number of maximal nonzero runs in each row.
pub fn block_counts(m: &OverlapMatrix) -> Vec<usize> {
    m.rows.iter().map(|r| run_lengths(r).len()).collect()
}

/// True iff every maximal run of nonzero entries in every row is at least `s` long.
pub fn validate_s_scale(m: &OverlapMatrix, s: usize) -> bool {
    m.rows.iter().all(|r| run_lengths(r).iter().all(|&len| len >= s))
}

/// Which cycles survive at each position, and the nodes they all share.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurvivalSet {
    /// 0-based cycle indices (row numbers) surviving at each position.
    pub survivors: Vec<BTreeSet<usize>>,
    /// Intersection of the surviving cycles' node sets; empty when nothing survives.
    pub intersections: Vec<BTreeSet<usize>>,
}

impl SurvivalSet {
    pub fn len(&self) -> usize {
        self.survivors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.survivors.is_empty()
    }

    pub fn any_survive(&self, j: usize) -> bool {
        !self.survivors[j].is_empty()
    }
}

pub fn survivors(m: &OverlapMatrix, cycles: &[BTreeSet<usize>]) -> Result<SurvivalSet> {
    if cycles.len() != m.k() {
        return Err(Error::DimensionMismatch(format!("{} cycles for a matrix with {} rows", cycles.len(), m.k())));
    }
    let mut survivors = Vec::with_capacity(m.d);
    let mut intersections = Vec::with_capacity(m.d);
    for j in 0..m.d {
        let alive: BTreeSet<usize> = (0..m.k()).filter(|&i| m.rows[i][j] != 0).collect();
        let mut common: Option<BTreeSet<usize>> = None;
        for &i in &alive {
            common = Some(match common {
                None => cycles[i].clone(),
                Some(c) => c.intersection(&cycles[i]).copied().collect(),
            });
        }
        survivors.push(alive);
        intersections.push(common.unwrap_or_default());
    }
    Ok(SurvivalSet { survivors, intersections })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    fn binary(rows: Vec<Vec<u32>>) -> OverlapMatrix {
        let d = rows.first().map_or(0, Vec::len);
        OverlapMatrix::new(MatrixKind::Binary, 4, d, rows).unwrap()
    }

    #[test]
    fn short_runs_are_dropped() {
        // nodes 0..=3 form the cycle, node 4 is outside; 1-based positions 1-4 kept, 6-7 dropped
        let flow = [0, 1, 2, 3, 4, 0, 1, 4];
        let m = integer_overlap(&flow, &[set(&[0, 1, 2, 3])], 4).unwrap();
        assert_eq!(m.rows()[0], vec![1, 2, 3, 4, 0, 0, 0, 0]);
    }

    #[test]
    fn run_reaching_the_end_is_kept() {
        let flow = [5, 5, 0, 1, 2, 3];
        let m = integer_overlap(&flow, &[set(&[0, 1, 2, 3])], 4).unwrap();
        assert_eq!(m.rows()[0], vec![0, 0, 1, 2, 3, 4]);
        let m = integer_overlap(&flow[..5], &[set(&[0, 1, 2, 3])], 4).unwrap();
        assert_eq!(m.rows()[0], vec![0; 5]);
    }

    #[test]
    fn scale_one_marks_every_member() {
        let flow = [0, 7, 1, 7];
        let m = integer_overlap(&flow, &[set(&[0, 1])], 1).unwrap();
        assert_eq!(m.rows()[0], vec![1, 0, 2, 0]);
    }

    #[test]
    fn zero_scale_is_an_error() {
        assert!(matches!(integer_overlap(&[0, 1], &[set(&[0])], 0), Err(Error::InvalidScale(0))));
    }

    #[test]
    fn binarize_zero_matrix() {
        let z = OverlapMatrix::zeros(MatrixKind::Integer, 4, 3, 10);
        let b = binarize(&z);
        assert_eq!(b.kind(), MatrixKind::Binary);
        assert!(b.rows().iter().flatten().all(|&v| v == 0));
    }

    #[test]
    fn s_scale_validation() {
        let mut row = vec![0u32; 10];
        row[..3].fill(1);
        assert!(!validate_s_scale(&binary(vec![row.clone()]), 4));
        row[3] = 1;
        assert!(validate_s_scale(&binary(vec![row]), 4));
        assert!(validate_s_scale(&binary(vec![vec![0; 10]; 3]), 7));
    }

    #[test]
    fn survival_sets_and_intersections() {
        let m = binary(vec![vec![1; 6], vec![0, 0, 1, 1, 1, 1]]);
        let cycles = [set(&[0, 1, 2, 3]), set(&[2, 3, 4, 5])];
        let s = survivors(&m, &cycles).unwrap();
        assert_eq!(s.survivors[0], set(&[0]));
        assert_eq!(s.intersections[0], cycles[0]);
        assert_eq!(s.survivors[3], set(&[0, 1]));
        assert_eq!(s.intersections[3], set(&[2, 3]));

        let empty = survivors(&binary(vec![vec![0; 6], vec![0; 6]]), &cycles).unwrap();
        assert!((0..6).all(|j| !empty.any_survive(j) && empty.intersections[j].is_empty()));
    }

    #[test]
    fn single_all_ones_row() {
        let m = binary(vec![vec![1; 8]]);
        let c = set(&[1, 2, 3, 4]);
        let s = survivors(&m, std::slice::from_ref(&c)).unwrap();
        assert!(s.survivors.iter().all(|sj| *sj == set(&[0])));
        assert!(s.intersections.iter().all(|ij| *ij == c));
    }

    #[test]
    fn document_round_trip_and_dumps() {
        let m = integer_overlap(&[0, 1, 2, 3, 9], &[set(&[0, 1, 2, 3]), set(&[9])], 4).unwrap();
        let doc = m.to_document();
        let back = OverlapMatrix::from_document(serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.to_csv(), "1,2,3,4,0\n0,0,0,0,0\n");
        assert!(m.to_pgm().starts_with("P2\n5 2\n1\n0 0 0 0 1\n"));
    }

    #[test]
    fn empty_cycle_list_gives_zero_rows() {
        let m = integer_overlap(&[0, 1, 0], &[], 4).unwrap();
        assert_eq!((m.k(), m.d()), (0, 3));
        assert!(validate_s_scale(&binarize(&m), 4));
    }
}
