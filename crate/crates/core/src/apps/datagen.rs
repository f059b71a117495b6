//! Synthetic regression data with structured sparse ground truth.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use super::fista::DenseMatrix;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DataError {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct FusedData {
    pub design: DenseMatrix,
    pub targets: Vec<f64>,
    pub true_beta: Vec<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupData {
    pub design: DenseMatrix,
    pub targets: Vec<f64>,
    pub true_beta: Vec<f64>,
    pub groups: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
    pub causal_groups: Vec<usize>,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct GroupDataOptions {
    /// offset between consecutive group starts; `None` spreads the groups
    /// evenly over the features
    pub stride: Option<usize>,
    pub sigma: f64,
}

impl Default for GroupDataOptions {
    fn default() -> Self {
        Self {
            stride: None,
            sigma: 0.1,
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn noisy_targets(rng: &mut ChaCha8Rng, design: &DenseMatrix, beta: &[f64], sigma: f64) -> Vec<f64> {
    design
        .mul(beta)
        .into_iter()
        .map(|v| v + sigma * normal(rng))
        .collect()
}

fn gaussian_design(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| normal(rng)).collect();
    DenseMatrix::new(rows, cols, data).expect("sizes match")
}

/// Picks `k` causal features by a random walk: from the current feature the
/// walk moves to each neighbour with probability 0.4 and jumps uniformly to
/// one of the other features with total probability 0.2.
fn walk_support(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<bool> {
    let mut causal = vec![false; n];
    if k == n {
        causal.fill(true);
        return causal;
    }
    if k == 0 {
        return causal;
    }
    let mut current = rng.random_range(0..n);
    causal[current] = true;
    let mut chosen = 1;
    while chosen < k {
        let u: f64 = rng.random();
        let next = if u < 0.4 {
            current.checked_sub(1)
        } else if u < 0.8 {
            Some(current + 1).filter(|&j| j < n)
        } else {
            // uniform over features other than current and its neighbours
            let lo = current.saturating_sub(1);
            let hi = (current + 1).min(n - 1);
            let others = n - (hi - lo + 1);
            if others == 0 {
                None
            } else {
                let r = rng.random_range(0..others);
                Some(if r < lo { r } else { r + (hi - lo + 1) })
            }
        };
        if let Some(j) = next {
            current = j;
            if !causal[j] {
                causal[j] = true;
                chosen += 1;
            }
        }
    }
    causal
}

/// Gaussian design with `k` causal features chosen by a neighbour-biased
/// random walk, normal coefficients on them and `N(0, σ²)` noise.
pub fn gen_fused_data(n: usize, rows: usize, k: usize, sigma: f64, seed: u64) -> Result<FusedData, DataError> {
    if n == 0 || rows == 0 {
        return Err(DataError::InvalidDims(format!("n = {n} and N = {rows} must be positive")));
    }
    if k > n {
        return Err(DataError::InvalidDims(format!("k = {k} exceeds n = {n}")));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(DataError::InvalidDims(format!("sigma = {sigma} must be nonnegative")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let causal = walk_support(&mut rng, n, k);
    let true_beta: Vec<f64> = causal
        .iter()
        .map(|&c| if c { normal(&mut rng) } else { 0.0 })
        .collect();
    let design = gaussian_design(&mut rng, rows, n);
    let targets = noisy_targets(&mut rng, &design, &true_beta, sigma);
    Ok(FusedData {
        design,
        targets,
        true_beta,
        seed,
    })
}

/// Overlapping groups of `group_size` consecutive features, two of which
/// (one if there is only one group) carry the causal support.
pub fn gen_group_data(
    n: usize,
    rows: usize,
    n_groups: usize,
    group_size: usize,
    seed: u64,
) -> Result<GroupData, DataError> {
    gen_group_data_with(n, rows, n_groups, group_size, seed, GroupDataOptions::default())
}

pub fn gen_group_data_with(
    n: usize,
    rows: usize,
    n_groups: usize,
    group_size: usize,
    seed: u64,
    opts: GroupDataOptions,
) -> Result<GroupData, DataError> {
    if n == 0 || rows == 0 || n_groups == 0 || group_size == 0 {
        return Err(DataError::InvalidDims(format!(
            "n = {n}, N = {rows}, n_groups = {n_groups}, group_size = {group_size} must be positive"
        )));
    }
    if group_size > n {
        return Err(DataError::InvalidDims(format!("group_size = {group_size} exceeds n = {n}")));
    }
    if !(opts.sigma >= 0.0) || !opts.sigma.is_finite() {
        return Err(DataError::InvalidDims(format!("sigma = {} must be nonnegative", opts.sigma)));
    }
    let slots = n - group_size + 1;
    let starts: Vec<usize> = (0..n_groups)
        .map(|g| match opts.stride {
            Some(stride) => (g * stride) % slots,
            None if n_groups == 1 => 0,
            None => ((g * (slots - 1)) as f64 / (n_groups - 1) as f64).round() as usize,
        })
        .collect();
    let groups: Vec<Vec<usize>> = starts.iter().map(|&s| (s..s + group_size).collect()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<usize> = (0..n_groups).collect();
    ids.shuffle(&mut rng);
    let mut causal_groups: Vec<usize> = ids.into_iter().take(2).collect();
    causal_groups.sort_unstable();
    let mut causal = vec![false; n];
    for &g in &causal_groups {
        for &i in &groups[g] {
            causal[i] = true;
        }
    }
    let weights = (0..n_groups)
        .map(|g| if causal_groups.contains(&g) { 2.0 } else { 1.0 })
        .collect();
    let true_beta: Vec<f64> = causal
        .iter()
        .map(|&c| if c { normal(&mut rng) } else { 0.0 })
        .collect();
    let design = gaussian_design(&mut rng, rows, n);
    let targets = noisy_targets(&mut rng, &design, &true_beta, opts.sigma);
    Ok(GroupData {
        design,
        targets,
        true_beta,
        groups,
        weights,
        causal_groups,
        seed,
    })
}
