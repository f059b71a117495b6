use serde::Serialize;

use crate::decomp::{decompose, DecompError};
use crate::subfn::SubmodularSpec;
use crate::subset::GroundSubset;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityLevel {
    pub set: GroundSubset,
    pub k: usize,
    /// total weight of edges inside the set
    pub weight: f64,
    /// `weight / k`
    pub intensity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub levels: Vec<DensityLevel>,
    pub minimization_count: usize,
    pub flow_solves: usize,
}

/// Level sets of the min-norm base of `-θ` for an undirected graph with
/// nonnegative edge weights. Each level is a heaviest subset of its size.
pub fn densest_levels(n: usize, edges: &[(usize, usize, f64)]) -> Result<DensityReport, DecompError> {
    let spec = SubmodularSpec::from_negated_density(n, edges)?;
    let ones = vec![1.0; n];
    let (shifted, _) = spec.nondecreasing_shift(&ones)?;
    let chain = decompose(&shifted, &ones)?;

    // an edge enters at the level where its later endpoint does
    let mut level_of = vec![0; n];
    for j in 0..chain.len() {
        for &i in chain.block(j) {
            level_of[i] = j;
        }
    }
    let mut gained = vec![0.0; chain.len()];
    for &(i, j, w) in edges {
        gained[level_of[i].max(level_of[j])] += w;
    }

    let mut weight = 0.0;
    let mut levels = Vec::with_capacity(chain.len());
    for (j, g) in gained.into_iter().enumerate() {
        weight += g;
        let set = chain.set(j + 1);
        let k = set.len();
        levels.push(DensityLevel {
            set,
            k,
            weight,
            intensity: weight / k as f64,
        });
    }
    Ok(DensityReport {
        levels,
        minimization_count: chain.minimization_count,
        flow_solves: chain.flow_solves,
    })
}
