//! Random instance generators shared by tests, the self-test and benchmarks.

use rand::Rng;

use crate::graph::{FlowNetwork, SINK, SOURCE};

/// A random network on `n` ground and `n_aux` auxiliary nodes with integer
/// capacities in `1..=max_cap`. Each ordered pair of nodes (terminals
/// included, no edges into `s` or out of `t`) gets an edge with
/// probability `density`.
pub fn generalized_cut<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    n_aux: usize,
    max_cap: u32,
    density: f64,
) -> FlowNetwork {
    let nodes = 2 + n + n_aux;
    let mut edges = Vec::new();
    for u in 0..nodes {
        for v in 0..nodes {
            if u == v || v == SOURCE || u == SINK || (u == SOURCE && v == SINK) {
                continue;
            }
            if rng.random_bool(density) {
                edges.push((u, v, rng.random_range(1..=max_cap) as f64));
            }
        }
    }
    FlowNetwork::build(n, n_aux, edges).expect("generated edges are valid")
}

/// Like [`generalized_cut`] but with real capacities in `(0, max_cap)`.
pub fn generalized_cut_real<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    n_aux: usize,
    max_cap: f64,
    density: f64,
) -> FlowNetwork {
    let nodes = 2 + n + n_aux;
    let mut edges = Vec::new();
    for u in 0..nodes {
        for v in 0..nodes {
            if u == v || v == SOURCE || u == SINK || (u == SOURCE && v == SINK) {
                continue;
            }
            if rng.random_bool(density) {
                edges.push((u, v, max_cap * rng.random_range(0.01..1.0)));
            }
        }
    }
    FlowNetwork::build(n, n_aux, edges).expect("generated edges are valid")
}

/// Directed edges `(i, j, c)` and a modular vector `a` for a transformed cut
/// function; capacities in `1..=max_cap`, `a_i` in `-max_cap..=max_cap`.
pub fn transformed_cut<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_cap: u32,
    density: f64,
) -> (Vec<(usize, usize, f64)>, Vec<f64>) {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(density) {
                edges.push((i, j, rng.random_range(1..=max_cap) as f64));
            }
        }
    }
    let m = max_cap as i64;
    let a = (0..n).map(|_| rng.random_range(-m..=m) as f64).collect();
    (edges, a)
}

/// `(d, w, y)` for a decomposable function with `terms` threshold terms and
/// integer entries.
pub fn decomposable<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    terms: usize,
    max_weight: u32,
) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let d = (0..n).map(|_| rng.random_range(1..=max_weight) as f64).collect();
    let w = (0..terms)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if rng.random_bool(0.6) {
                        rng.random_range(1..=max_weight) as f64
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let y = (0..terms)
        .map(|_| rng.random_range(1..=2 * max_weight) as f64)
        .collect();
    (d, w, y)
}

/// Undirected weighted edges `(i, j, w)`, `i < j`, each present with
/// probability `density`, integer weights in `1..=max_weight`.
pub fn density_graph<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_weight: u32,
    density: f64,
) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                edges.push((i, j, rng.random_range(1..=max_weight) as f64));
            }
        }
    }
    edges
}

/// Positive weights in `1..=max` (integral) or `(0.1, max)` (real).
pub fn weights<R: Rng + ?Sized>(rng: &mut R, n: usize, max: u32, integral: bool) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if integral {
                rng.random_range(1..=max) as f64
            } else {
                rng.random_range(0.1..max as f64)
            }
        })
        .collect()
}
