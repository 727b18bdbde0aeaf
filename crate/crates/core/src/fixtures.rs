//! Reference data for three Dodeuri pieces: node frequencies, part of the
//! Suyeonjang node table, and the two Suyeonjang cycles whose node sets are
//! known.

use std::collections::BTreeSet;

use crate::nodepool::NodePool;
use crate::score::{Duration, Note, Pitch};

/// `(node, pitch name, duration numerator, duration denominator)`.
pub const SUYEONJANG_NODES: &[(usize, &str, i64, i64)] = &[
    (0, "G#3", 1, 3),
    (1, "G#3", 1, 1),
    (2, "G#3", 2, 1),
    (3, "A#3", 1, 3),
    (6, "A#3", 1, 1),
    (7, "A#3", 5, 3),
    (11, "C4", 1, 1),
    (12, "C4", 5, 3),
    (16, "D#4", 1, 3),
    (18, "D#4", 1, 1),
    (20, "F4", 1, 3),
    (21, "F4", 2, 3),
    (22, "F4", 1, 1),
    (23, "F4", 5, 3),
    (24, "F4", 2, 1),
    (25, "G#4", 1, 3),
    (26, "G#4", 2, 3),
    (27, "G#4", 1, 1),
    (29, "G#4", 2, 1),
    (30, "A#4", 2, 3),
];

/// `(node, frequency)`, most frequent first.
pub const SUYEONJANG_FREQUENCIES: &[(usize, u64)] = &[
    (18, 76), (6, 57), (11, 44), (22, 44), (1, 30), (20, 26), (27, 22), (3, 16), (28, 14), (12, 10), (16, 9),
    (26, 9), (31, 9), (2, 7), (4, 7), (23, 7), (9, 6), (10, 6), (5, 5), (8, 5), (13, 5), (0, 4), (7, 3),
    (17, 3), (19, 3), (21, 2), (25, 2), (29, 2), (30, 2), (32, 2), (14, 1), (15, 1), (24, 1),
];

pub const SONGKUYEO_FREQUENCIES: &[(usize, u64)] = &[
    (20, 65), (31, 53), (13, 45), (26, 44), (8, 27), (18, 23), (4, 18), (33, 18), (6, 11), (16, 11), (25, 11),
    (19, 10), (24, 10), (27, 10), (28, 9), (32, 8), (2, 6), (15, 5), (7, 4), (11, 3), (12, 3), (14, 3),
    (17, 3), (21, 3), (23, 3), (35, 3), (0, 2), (3, 2), (9, 2), (10, 2), (36, 2), (34, 2), (1, 1), (5, 1),
    (22, 1), (29, 1), (30, 1),
];

pub const TARYONG_FREQUENCIES: &[(usize, u64)] = &[
    (16, 38), (11, 28), (13, 23), (26, 18), (29, 17), (31, 15), (28, 15), (3, 14), (18, 13), (15, 11), (12, 10),
    (22, 10), (6, 9), (32, 8), (17, 7), (20, 7), (4, 5), (9, 4), (0, 3), (14, 3), (2, 2), (5, 2), (7, 2),
    (8, 2), (19, 2), (21, 2), (27, 2), (33, 2), (34, 2), (35, 2), (1, 1), (10, 1), (23, 1), (24, 1), (25, 1),
    (30, 1), (38, 1), (36, 1), (37, 1), (39, 1),
];

/// Two of the Suyeonjang cycles, as `(ordinal, nodes)`.
pub fn suyeonjang_cycles() -> Vec<(usize, BTreeSet<usize>)> {
    vec![(1, BTreeSet::from([18, 20, 22, 27])), (2, BTreeSet::from([3, 6, 12, 18]))]
}

pub fn suyeonjang_note(node: usize) -> Option<Note> {
    let &(_, name, n, d) = SUYEONJANG_NODES.iter().find(|e| e.0 == node)?;
    let pitch = Pitch::new(Pitch::parse_name(name)?)?;
    Some(Note::new(pitch, Duration::new(n, d)?))
}

/// Frequencies indexed by node; `None` if the labels are not `0..q`.
pub fn frequency_vector(table: &[(usize, u64)]) -> Option<Vec<u64>> {
    let mut out = vec![0; table.len()];
    for &(node, f) in table {
        let slot = out.get_mut(node)?;
        if *slot != 0 {
            return None;
        }
        *slot = f;
    }
    Some(out)
}

pub fn suyeonjang_pool() -> NodePool {
    NodePool::from_frequencies(frequency_vector(SUYEONJANG_FREQUENCIES).expect("contiguous labels"))
        .expect("positive frequencies")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suyeonjang_pool_matches_piece_length() {
        let pool = suyeonjang_pool();
        assert_eq!(pool.len(), 33);
        assert_eq!(pool.total(), 440);
        assert_eq!(pool.probability(18), 76.0 / 440.0);
    }

    #[test]
    fn other_tables_are_complete() {
        assert_eq!(frequency_vector(SONGKUYEO_FREQUENCIES).unwrap().len(), 37);
        assert_eq!(frequency_vector(TARYONG_FREQUENCIES).unwrap().len(), 40);
    }

    #[test]
    fn node_table_is_sorted_like_a_node_table() {
        let notes: Vec<Note> = SUYEONJANG_NODES.iter().map(|e| suyeonjang_note(e.0).unwrap()).collect();
        assert!(notes.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(suyeonjang_note(18).unwrap().pitch.name(), "D#4");
        assert!(suyeonjang_note(4).is_none());
    }

    #[test]
    fn known_cycles_share_node_18() {
        let c = suyeonjang_cycles();
        assert_eq!(c[0].1.intersection(&c[1].1).collect::<Vec<_>>(), vec![&18]);
    }
}
