use dodeuri_core::network::{distance_matrix, min_hop_path, WeightMatrix};
use dodeuri_testkit::{brute_force_route, random_connected_graph, rng};
use rand::Rng;

#[test]
fn distances_match_path_enumeration() {
    let mut g = rng(11);
    for _ in 0..300 {
        let q = g.gen_range(2..=7);
        let density = g.gen_range(0.0..0.8);
        let w = random_connected_graph(&mut g, q, density, 6);
        let weights = WeightMatrix::from_rows(w.clone()).unwrap();
        let dist = distance_matrix(&weights).unwrap();
        for i in 0..q {
            for j in 0..q {
                if i == j {
                    continue;
                }
                let (hops, cost, path) = brute_force_route(&w, i, j).unwrap();
                assert_eq!(dist.get(i, j), &cost, "graph {w:?}, pair ({i}, {j})");
                let found = min_hop_path(&weights, i, j).unwrap();
                assert_eq!(found.len() - 1, hops);
                assert_eq!(found, path);
            }
        }
    }
}

#[test]
fn distance_matrix_is_symmetric() {
    let mut g = rng(12);
    for _ in 0..50 {
        let q = g.gen_range(2..=12);
        let w = random_connected_graph(&mut g, q, 0.3, 9);
        let dist = distance_matrix(&WeightMatrix::from_rows(w).unwrap()).unwrap();
        for i in 0..q {
            for j in 0..q {
                assert_eq!(dist.get(i, j), dist.get(j, i));
            }
        }
    }
}
