//! The music network: distinct notes as nodes, temporal adjacency counts as
//! edge weights, and the hop-minimal path distance between every pair of nodes.

use std::cmp::Ordering;
use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::score::{Note, Score};
use crate::FORMAT_VERSION;

/// Distinct notes of a flow, sorted by pitch then duration, with occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeTable {
    nodes: Vec<Note>,
    index_of: BTreeMap<Note, usize>,
    frequency: Vec<u64>,
}

impl NodeTable {
    pub fn from_flow(flow: &[Note]) -> NodeTable {
        let mut counts: BTreeMap<Note, u64> = BTreeMap::new();
        for note in flow {
            *counts.entry(*note).or_default() += 1;
        }
        let nodes: Vec<Note> = counts.keys().copied().collect();
        let frequency = counts.values().copied().collect();
        let index_of = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        NodeTable { nodes, index_of, frequency }
    }

    /// Rebuilds a table from stored notes and counts; notes must be strictly ascending.
    pub fn from_parts(nodes: Vec<Note>, frequency: Vec<u64>) -> Result<NodeTable> {
        if nodes.len() != frequency.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} nodes but {} frequencies",
                nodes.len(),
                frequency.len()
            )));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("node table must be strictly ascending by (pitch, duration)".into()));
        }
        let index_of = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        Ok(NodeTable { nodes, index_of, frequency })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Note] {
        &self.nodes
    }

    pub fn note(&self, index: usize) -> Note {
        self.nodes[index]
    }

    pub fn index_of(&self, note: &Note) -> Option<usize> {
        self.index_of.get(note).copied()
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.frequency
    }

    pub fn total(&self) -> u64 {
        self.frequency.iter().sum()
    }

    /// Maps a flow of notes onto node indices; `None` if a note is not in the table.
    pub fn indices(&self, flow: &[Note]) -> Option<Vec<usize>> {
        flow.iter().map(|n| self.index_of(n)).collect()
    }

    /// Maps node indices back to a score.
    pub fn to_score(&self, indices: &[usize]) -> Result<Score> {
        let flow = indices
            .iter()
            .map(|&i| {
                self.nodes.get(i).copied().ok_or_else(|| {
                    Error::DimensionMismatch(format!("node index {i} outside table of {} nodes", self.nodes.len()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Score::new(flow)
    }
}

/// Symmetric edge-weight matrix with a zero diagonal; 0 means "no edge".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMatrix {
    q: usize,
    w: Vec<u32>,
}

impl WeightMatrix {
    pub fn zeros(q: usize) -> WeightMatrix {
        WeightMatrix { q, w: vec![0; q * q] }
    }

    pub fn from_rows(rows: Vec<Vec<u32>>) -> Result<WeightMatrix> {
        let q = rows.len();
        let mut m = WeightMatrix::zeros(q);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != q {
                return Err(Error::InvalidWeights(format!("row {i} has {} entries, expected {q}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                m.w[i * q + j] = v;
            }
        }
        for i in 0..q {
            if m.get(i, i) != 0 {
                return Err(Error::InvalidWeights(format!("diagonal entry ({i},{i}) must be 0")));
            }
            for j in 0..i {
                if m.get(i, j) != m.get(j, i) {
                    return Err(Error::InvalidWeights(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.q
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.w[i * self.q + j]
    }

    fn bump(&mut self, i: usize, j: usize) {
        self.w[i * self.q + j] += 1;
        self.w[j * self.q + i] += 1;
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.q).filter(move |&j| self.get(i, j) > 0)
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.w.chunks(self.q.max(1)).take(self.q).map(<[u32]>::to_vec).collect()
    }

    /// First pair `(0, j)` with no connecting path, if any.
    pub fn find_disconnected(&self) -> Option<(usize, usize)> {
        if self.q == 0 {
            return None;
        }
        let hops = self.hops_from(0);
        hops.iter().position(Option::is_none).map(|j| (0, j))
    }

    fn hops_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut hops = vec![None; self.q];
        hops[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let h = hops[u].unwrap_or(0);
            for v in self.neighbors(u) {
                if hops[v].is_none() {
                    hops[v] = Some(h + 1);
                    queue.push_back(v);
                }
            }
        }
        hops
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MusicNetwork {
    pub nodes: NodeTable,
    pub weights: WeightMatrix,
    /// The score's flow as node indices.
    pub flow: Vec<usize>,
}

pub fn build_network(score: &Score) -> Result<MusicNetwork> {
    let nodes = NodeTable::from_flow(score.flow());
    if nodes.len() < 2 {
        return Err(Error::TooFewDistinctNotes { found: nodes.len() });
    }
    let flow = nodes.indices(score.flow()).expect("table built from this flow");
    let mut weights = WeightMatrix::zeros(nodes.len());
    for (i, pair) in flow.windows(2).enumerate() {
        if pair[0] != pair[1] && !score.rest_before(i + 1) {
            weights.bump(pair[0], pair[1]);
        }
    }
    if let Some((from, to)) = weights.find_disconnected() {
        return Err(Error::DisconnectedNetwork { from, to });
    }
    Ok(MusicNetwork { nodes, weights, flow })
}

/// A candidate route: reciprocal-weight sum, then node sequence as tie-breaker.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Route {
    cost: BigRational,
    nodes: Vec<usize>,
}

impl Route {
    fn cmp_key(&self, other: &Route) -> Ordering {
        self.cost.cmp(&other.cost).then_with(|| self.nodes.cmp(&other.nodes))
    }
}

fn reciprocal(w: u32) -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(w))
}

/// Best hop-minimal route from `source` to every node.
///
/// Among paths with the fewest edges, the one with the smallest sum of reciprocal
/// weights wins; remaining ties go to the lexicographically smallest node sequence.
/// All minimal-hop prefixes to a node have equal length, so extending the best
/// prefix of each predecessor is enough.
fn routes_from(weights: &WeightMatrix, source: usize) -> Vec<Option<Route>> {
    let q = weights.size();
    let hops = weights.hops_from(source);
    let mut order: Vec<usize> = (0..q).filter(|&v| hops[v].is_some()).collect();
    order.sort_by_key(|&v| (hops[v], v));

    let mut best: Vec<Option<Route>> = vec![None; q];
    best[source] = Some(Route {
        cost: BigRational::zero(),
        nodes: vec![source],
    });
    for &v in order.iter().skip(1) {
        let hv = hops[v].expect("reachable");
        let mut chosen: Option<Route> = None;
        for u in weights.neighbors(v) {
            if hops[u] != Some(hv - 1) {
                continue;
            }
            let prefix = best[u].as_ref().expect("earlier layer is filled");
            let mut nodes = prefix.nodes.clone();
            nodes.push(v);
            let cand = Route {
                cost: &prefix.cost + reciprocal(weights.get(u, v)),
                nodes,
            };
            if chosen.as_ref().is_none_or(|c| cand.cmp_key(c) == Ordering::Less) {
                chosen = Some(cand);
            }
        }
        best[v] = chosen;
    }
    best
}

/// Node sequence of the hop-minimal path from `i` to `j` (see [`distance_matrix`]).
pub fn min_hop_path(weights: &WeightMatrix, i: usize, j: usize) -> Result<Vec<usize>> {
    let q = weights.size();
    if i >= q || j >= q {
        return Err(Error::DimensionMismatch(format!("node index out of range for {q} nodes")));
    }
    routes_from(weights, i)
        .swap_remove(j)
        .map(|r| r.nodes)
        .ok_or(Error::DisconnectedNetwork { from: i, to: j })
}

/// Edges of a node path as `(from, to)` pairs.
pub fn path_edges(path: &[usize]) -> Vec<(usize, usize)> {
    path.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Exact pairwise node distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    q: usize,
    values: Vec<BigRational>,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.q
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.values[i * self.q + j]
    }

    pub fn get_f64(&self, i: usize, j: usize) -> f64 {
        self.get(i, j).to_f64().unwrap_or(f64::INFINITY)
    }

    /// Builds a matrix from exact upper-triangle values; used for synthetic filtrations.
    pub fn from_fn(q: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Result<DistanceMatrix> {
        let mut values = vec![BigRational::zero(); q * q];
        for i in 0..q {
            for j in (i + 1)..q {
                let v = f(i, j);
                if v <= BigRational::zero() {
                    return Err(Error::InvalidWeights(format!("distance ({i},{j}) must be positive")));
                }
                values[i * q + j] = v.clone();
                values[j * q + i] = v;
            }
        }
        Ok(DistanceMatrix { q, values })
    }

    pub fn to_document(&self) -> DistancesDocument {
        let rows = |f: &dyn Fn(&BigRational) -> String| -> Vec<Vec<String>> {
            self.values.chunks(self.q.max(1)).take(self.q).map(|r| r.iter().map(f).collect()).collect()
        };
        DistancesDocument {
            format_version: FORMAT_VERSION,
            q: self.q,
            exact: rows(&|v| v.to_string()),
            values: (0..self.q).map(|i| (0..self.q).map(|j| self.get_f64(i, j)).collect()).collect(),
        }
    }
}

/// Distance matrix of a connected network.
pub fn distance_matrix(weights: &WeightMatrix) -> Result<DistanceMatrix> {
    let q = weights.size();
    if let Some((from, to)) = weights.find_disconnected() {
        return Err(Error::DisconnectedNetwork { from, to });
    }
    let mut values = vec![BigRational::zero(); q * q];
    for i in 0..q {
        let routes = routes_from(weights, i);
        for (j, route) in routes.into_iter().enumerate().skip(i + 1) {
            let route = route.ok_or(Error::DisconnectedNetwork { from: i, to: j })?;
            values[i * q + j] = route.cost.clone();
            values[j * q + i] = route.cost;
        }
    }
    Ok(DistanceMatrix { q, values })
}

impl MusicNetwork {
    pub fn distance_matrix(&self) -> Result<DistanceMatrix> {
        distance_matrix(&self.weights)
    }

    pub fn min_hop_path(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        min_hop_path(&self.weights, i, j)
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            format_version: FORMAT_VERSION,
            d: self.flow.len(),
            q: self.nodes.len(),
            nodes: node_entries(&self.nodes),
            weights: self.weights.rows(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub index: usize,
    pub name: String,
    #[serde(flatten)]
    pub note: Note,
    pub frequency: u64,
}

pub fn node_entries(table: &NodeTable) -> Vec<NodeEntry> {
    table
        .nodes()
        .iter()
        .zip(table.frequencies())
        .enumerate()
        .map(|(index, (note, &frequency))| NodeEntry {
            index,
            name: note.pitch.name(),
            note: *note,
            frequency,
        })
        .collect()
}

pub fn table_from_entries(entries: &[NodeEntry]) -> Result<NodeTable> {
    if entries.iter().enumerate().any(|(i, e)| e.index != i) {
        return Err(Error::InvalidConfig("node entries must be listed in index order".into()));
    }
    NodeTable::from_parts(
        entries.iter().map(|e| e.note).collect(),
        entries.iter().map(|e| e.frequency).collect(),
    )
}

/// `network.json`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub format_version: u32,
    pub d: usize,
    pub q: usize,
    pub nodes: Vec<NodeEntry>,
    pub weights: Vec<Vec<u32>>,
}

/// `distances.json`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistancesDocument {
    pub format_version: u32,
    pub q: usize,
    pub exact: Vec<Vec<String>>,
    pub values: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::{Duration, Pitch};

    fn n(p: i64) -> Note {
        Note::new(Pitch::new(p).unwrap(), Duration::whole(1).unwrap())
    }

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn alternating_pair_counts_adjacencies() {
        let s = Score::new(vec![n(60), n(62), n(60), n(62), n(60)]).unwrap();
        let net = build_network(&s).unwrap();
        assert_eq!(net.nodes.len(), 2);
        assert_eq!(net.weights.get(0, 1), 4);
        assert_eq!(net.flow, vec![0, 1, 0, 1, 0]);
        assert_eq!(net.distance_matrix().unwrap().get(0, 1), &ratio(1, 4));
    }

    #[test]
    fn repeated_note_adds_no_self_loop() {
        let s = Score::new(vec![n(60), n(60), n(62)]).unwrap();
        let net = build_network(&s).unwrap();
        assert_eq!(net.weights.get(0, 0), 0);
        assert_eq!(net.weights.get(0, 1), 1);
        assert_eq!(net.nodes.frequencies(), &[2, 1]);
    }

    #[test]
    fn single_distinct_note_is_rejected() {
        let s = Score::new(vec![n(60), n(60), n(60)]).unwrap();
        assert!(matches!(build_network(&s), Err(Error::TooFewDistinctNotes { found: 1 })));
    }

    #[test]
    fn nodes_sort_by_pitch_then_duration() {
        let long = Note::new(Pitch::new(60).unwrap(), Duration::new(5, 3).unwrap());
        let short = Note::new(Pitch::new(60).unwrap(), Duration::new(1, 3).unwrap());
        let low = Note::new(Pitch::new(56).unwrap(), Duration::whole(2).unwrap());
        let table = NodeTable::from_flow(&[long, short, low, short]);
        assert_eq!(table.nodes(), &[low, short, long]);
        assert_eq!(table.frequencies(), &[1, 2, 1]);
        assert_eq!(table.total(), 4);
    }

    #[test]
    fn star_path_goes_through_center() {
        // center 0, leaves 1 and 2
        let w = WeightMatrix::from_rows(vec![vec![0, 1, 3], vec![1, 0, 0], vec![3, 0, 0]]).unwrap();
        assert_eq!(min_hop_path(&w, 1, 2).unwrap(), vec![1, 0, 2]);
        assert_eq!(path_edges(&[1, 0, 2]), vec![(1, 0), (0, 2)]);
        assert_eq!(distance_matrix(&w).unwrap().get(1, 2), &ratio(4, 3));
    }

    #[test]
    fn two_hop_path_sums_reciprocals() {
        let w = WeightMatrix::from_rows(vec![vec![0, 2, 0], vec![2, 0, 5], vec![0, 5, 0]]).unwrap();
        assert_eq!(distance_matrix(&w).unwrap().get(0, 2), &ratio(7, 10));
    }

    #[test]
    fn heavier_two_hop_path_wins_ties_on_hops() {
        // 0-1-3 weights (4,4), 0-2-3 weights (1,1)
        let w = WeightMatrix::from_rows(vec![
            vec![0, 4, 1, 0],
            vec![4, 0, 0, 4],
            vec![1, 0, 0, 1],
            vec![0, 4, 1, 0],
        ])
        .unwrap();
        assert_eq!(min_hop_path(&w, 0, 3).unwrap(), vec![0, 1, 3]);
        assert_eq!(distance_matrix(&w).unwrap().get(0, 3), &ratio(1, 2));
    }

    #[test]
    fn fewer_hops_beat_lighter_paths() {
        // direct edge of weight 1 (distance 1) beats 0-1-2 with weights 10,10 (distance 1/5)
        let w = WeightMatrix::from_rows(vec![vec![0, 10, 1], vec![10, 0, 10], vec![1, 10, 0]]).unwrap();
        assert_eq!(min_hop_path(&w, 0, 2).unwrap(), vec![0, 2]);
        assert_eq!(distance_matrix(&w).unwrap().get(0, 2), &ratio(1, 1));
    }

    #[test]
    fn equal_cost_ties_break_lexicographically() {
        let w = WeightMatrix::from_rows(vec![
            vec![0, 2, 2, 0],
            vec![2, 0, 0, 2],
            vec![2, 0, 0, 2],
            vec![0, 2, 2, 0],
        ])
        .unwrap();
        assert_eq!(min_hop_path(&w, 0, 3).unwrap(), vec![0, 1, 3]);
        assert_eq!(min_hop_path(&w, 3, 0).unwrap(), vec![3, 1, 0]);
    }

    #[test]
    fn disconnected_weights_are_rejected() {
        let w = WeightMatrix::from_rows(vec![
            vec![0, 1, 0, 0],
            vec![1, 0, 0, 0],
            vec![0, 0, 0, 2],
            vec![0, 0, 2, 0],
        ])
        .unwrap();
        assert!(matches!(distance_matrix(&w), Err(Error::DisconnectedNetwork { from: 0, to: 2 })));
        assert!(matches!(min_hop_path(&w, 1, 3), Err(Error::DisconnectedNetwork { from: 1, to: 3 })));
    }

    #[test]
    fn rest_between_phrases_disconnects() {
        let text = "C4,1\nD4,1\nC4,1\nrest\nE4,1\nF4,1\n";
        let score = crate::score::parse_score(&format!("pitch,dur\n{text}"), crate::score::Format::Csv).unwrap();
        assert!(matches!(build_network(&score), Err(Error::DisconnectedNetwork { .. })));
        let joined = crate::score::parse_score(&format!("pitch,dur\n{}", text.replace("rest\n", "")), crate::score::Format::Csv).unwrap();
        assert!(build_network(&joined).is_ok());
    }

    #[test]
    fn asymmetric_weights_are_rejected() {
        assert!(WeightMatrix::from_rows(vec![vec![0, 1], vec![2, 0]]).is_err());
        assert!(WeightMatrix::from_rows(vec![vec![1, 1], vec![1, 0]]).is_err());
    }

    #[test]
    fn documents_round_trip_node_table() {
        let s = Score::new(vec![n(64), n(60), n(62), n(60)]).unwrap();
        let net = build_network(&s).unwrap();
        let doc = net.to_document();
        let back: NetworkDocument = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(table_from_entries(&back.nodes).unwrap(), net.nodes);
        let dist = net.distance_matrix().unwrap().to_document();
        assert_eq!(dist.exact[0][1], "1/2");
        assert_eq!(dist.values[0][0], 0.0);
    }
}
