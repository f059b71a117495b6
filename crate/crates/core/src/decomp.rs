//! The decomposition algorithm: recovers the chain of maximal minimizers of
//! `f - αb` by recursive interval splitting, then reads off the optimal base.
//!
//! Each call on an interval `[T, T']` sets `α = (f(T') - f(T)) / b(T' \ T)` and
//! computes the maximal minimizer `T''` of `f - αb` among sets between `T` and
//! `T'`. Elements of `T` are contracted into the source and elements outside
//! `T'` into the sink, so the min cut only sees the free elements. If
//! `T'' = T'` the interval is a single block; otherwise both halves recurse.
//!
//! The chain is kept as a permutation of the ground set plus prefix lengths:
//! every interval is a contiguous segment of the permutation, which makes
//! "is this element below, inside or above the interval" an O(1) lookup.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::maxflow::FlowError;
use crate::subfn::{check_b, minimize_table, Placement, SubmodularError, SubmodularSpec};
use crate::subset::GroundSubset;
use crate::values_equal;

/// Ground-set limit for [`brute_force_chain`].
pub const MAX_CHAIN_ORACLE_N: usize = 12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DecompError {
    #[error(transparent)]
    Submodular(#[from] SubmodularError),
    #[error("block ratio is not finite")]
    NonFiniteRatio,
    #[error("block {block} has ratio {ratio}, but the objective needs positive components")]
    PositivityViolated { block: usize, ratio: f64 },
    #[error("invalid objective parameter: {0}")]
    InvalidParameter(String),
    #[error("exact arithmetic requested but the inputs are not integral")]
    ExactUnavailable,
    #[error("minimizers are not nested; the function is not submodular")]
    NotNested,
}

impl From<FlowError> for DecompError {
    fn from(e: FlowError) -> Self {
        DecompError::Submodular(e.into())
    }
}

type Result<T> = std::result::Result<T, DecompError>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ArithMode {
    /// exact when every capacity, shift and `b` is an integer, float otherwise
    #[default]
    Auto,
    Float,
    /// scale capacities by the denominator of `α` so all flows are integral
    Exact,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DecomposeOptions {
    pub mode: ArithMode,
}

/// The nested family `∅ = S_0 ⊂ S_1 ⊂ … ⊂ S_ℓ = V`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Chain {
    /// ground elements in block order; `S_j = order[..ends[j]]`
    order: Vec<usize>,
    ends: Vec<usize>,
    f_values: Vec<f64>,
    /// `α_j` for `j = 1..=ℓ`: the parameter at which `S_j` takes over
    breakpoints: Vec<f64>,
    pub minimization_count: usize,
    /// max-flow computations, including evaluations through auxiliary nodes
    pub flow_solves: usize,
}

impl Chain {
    fn assemble(
        order: Vec<usize>,
        mut bounds: Vec<(usize, f64)>,
        b: &[f64],
        minimization_count: usize,
        flow_solves: usize,
    ) -> Result<Self> {
        bounds.sort_by_key(|&(end, _)| end);
        bounds.dedup_by_key(|&mut (end, _)| end);
        let ends: Vec<usize> = bounds.iter().map(|&(e, _)| e).collect();
        let f_values: Vec<f64> = bounds.iter().map(|&(_, f)| f).collect();
        let mut breakpoints = Vec::with_capacity(ends.len().saturating_sub(1));
        for j in 0..ends.len() - 1 {
            let weight: f64 = order[ends[j]..ends[j + 1]].iter().map(|&i| b[i]).sum();
            let ratio = (f_values[j + 1] - f_values[j]) / weight;
            if !ratio.is_finite() {
                return Err(DecompError::NonFiniteRatio);
            }
            breakpoints.push(ratio);
        }
        Ok(Self {
            order,
            ends,
            f_values,
            breakpoints,
            minimization_count,
            flow_solves,
        })
    }

    /// `ℓ`, the number of blocks.
    pub fn len(&self) -> usize {
        self.ends.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// `S_j` for `j = 0..=ℓ`.
    pub fn set(&self, j: usize) -> GroundSubset {
        self.order[..self.ends[j]].iter().copied().collect()
    }

    pub fn sets(&self) -> Vec<GroundSubset> {
        (0..self.ends.len()).map(|j| self.set(j)).collect()
    }

    /// Sizes `|S_j|`.
    pub fn sizes(&self) -> &[usize] {
        &self.ends
    }

    /// `S_{j+1} \ S_j` as a slice of the block order.
    pub fn block(&self, j: usize) -> &[usize] {
        &self.order[self.ends[j]..self.ends[j + 1]]
    }

    pub fn f_values(&self) -> &[f64] {
        &self.f_values
    }

    /// Block ratios `(f(S_{j+1}) - f(S_j)) / b(S_{j+1} \ S_j)`, which are also
    /// the breakpoints `α_1 < … < α_ℓ`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Strictly increasing ratios and the `2n - 1` minimization budget.
    pub fn validate(&self, exact: bool) -> std::result::Result<(), String> {
        let n = self.n();
        if self.ends.first() != Some(&0) || self.ends.last() != Some(&n) {
            return Err("chain does not run from the empty set to V".into());
        }
        if self.ends.windows(2).any(|w| w[0] >= w[1]) {
            return Err("chain is not strictly nested".into());
        }
        for (j, w) in self.breakpoints.windows(2).enumerate() {
            if w[0] >= w[1] || values_equal(w[0], w[1], exact) {
                return Err(format!(
                    "ratios {} and {} of blocks {j} and {} are not strictly increasing",
                    w[0],
                    w[1],
                    j + 1
                ));
            }
        }
        if n > 0 && self.minimization_count > 2 * n - 1 {
            return Err(format!(
                "{} minimizations exceed the 2n - 1 = {} budget",
                self.minimization_count,
                2 * n - 1
            ));
        }
        Ok(())
    }
}

/// Runs the decomposition algorithm with default options.
pub fn decompose(spec: &SubmodularSpec, b: &[f64]) -> Result<Chain> {
    decompose_with(spec, b, DecomposeOptions::default())
}

pub fn decompose_with(spec: &SubmodularSpec, b: &[f64], opts: DecomposeOptions) -> Result<Chain> {
    let n = spec.n();
    check_b(b, n)?;
    let integral = spec.is_integral() && b.iter().copied().all(crate::is_integral);
    let exact = match opts.mode {
        ArithMode::Auto => integral,
        ArithMode::Float => false,
        ArithMode::Exact if integral => true,
        ArithMode::Exact => return Err(DecompError::ExactUnavailable),
    };
    let incremental = !spec.is_table() && !spec.has_aux();
    let max_cap = spec
        .network()
        .map_or(0.0, |net| net.max_finite_capacity())
        .max(spec.modular_shift().iter().fold(0.0, |m: f64, a| m.max(a.abs())));

    let mut perm: Vec<usize> = (0..n).collect();
    let mut pos: Vec<usize> = (0..n).collect();
    let f_empty = spec.evaluate_mask(&vec![false; n])?;
    let f_full = spec.evaluate_mask(&vec![true; n])?;
    let mut bounds = vec![(0, f_empty), (n, f_full)];
    let mut stack = Vec::new();
    if n > 0 {
        stack.push((0, n, f_empty, f_full));
    }
    let mut count = 0;
    let graph = !spec.is_table();
    let mut flows = if spec.has_aux() { 2 } else { 0 };

    while let Some((lo, hi, f_lo, f_hi)) = stack.pop() {
        let free = &perm[lo..hi];
        let b_free: f64 = free.iter().map(|&i| b[i]).sum();
        let rise = f_hi - f_lo;
        let alpha = rise / b_free;
        if !alpha.is_finite() {
            return Err(DecompError::NonFiniteRatio);
        }
        let a = spec.modular_shift();
        // scaled exact arithmetic: multiply everything by b(T' \ T)
        let exact_here = exact && (max_cap + rise.abs()) * b_free * 4.0 < 9.0e15;
        let (modular, scale): (Vec<f64>, f64) = if exact_here {
            (
                free.iter().map(|&i| a[i] * b_free - rise * b[i]).collect(),
                b_free,
            )
        } else {
            if exact {
                log::debug!("interval of size {} falls back to float arithmetic", hi - lo);
            }
            (free.iter().map(|&i| a[i] - alpha * b[i]).collect(), 1.0)
        };
        count += 1;
        flows += graph as usize;
        let chosen = spec.interval_minimizer(
            free,
            &modular,
            scale,
            |i| {
                let p = pos[i];
                if p < lo {
                    Placement::Below
                } else if p < hi {
                    Placement::Added
                } else {
                    Placement::Above
                }
            },
            |i| pos[i] - lo,
        )?;
        let k = chosen.iter().filter(|&&c| c).count();
        if k == hi - lo {
            continue;
        }
        if k == 0 {
            // impossible in exact arithmetic: T' ties with T at this α
            log::debug!("empty split on interval [{lo}, {hi}); closing it as one block");
            continue;
        }
        let (inside, outside): (Vec<usize>, Vec<usize>) = {
            let mut inside = Vec::with_capacity(k);
            let mut outside = Vec::with_capacity(hi - lo - k);
            for (&i, &c) in free.iter().zip(&chosen) {
                if c {
                    inside.push(i);
                } else {
                    outside.push(i);
                }
            }
            (inside, outside)
        };
        for (p, i) in (lo..hi).zip(inside.into_iter().chain(outside)) {
            perm[p] = i;
            pos[i] = p;
        }
        let mid = lo + k;
        let f_mid = if incremental {
            f_lo + spec.cut_increment(&perm[lo..mid], |i| {
                let p = pos[i];
                if p < lo {
                    Placement::Below
                } else if p < mid {
                    Placement::Added
                } else {
                    Placement::Above
                }
            })?
        } else {
            let mask: Vec<bool> = pos.iter().map(|&p| p < mid).collect();
            flows += spec.has_aux() as usize;
            spec.evaluate_mask(&mask)?
        };
        bounds.push((mid, f_mid));
        stack.push((mid, hi, f_mid, f_hi));
        stack.push((lo, mid, f_lo, f_mid));
    }

    let chain = Chain::assemble(perm, bounds, b, count, flows)?;
    debug_assert!(n == 0 || chain.minimization_count <= 2 * n - 1);
    Ok(chain)
}

/// One block of the optimal base: `x_i = ratio * b_i` for every member.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Block {
    pub members: GroundSubset,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaseVector {
    pub x: Vec<f64>,
    pub blocks: Vec<Block>,
}

impl BaseVector {
    /// `x_i / b_i` for each element, i.e. the ratio of its block.
    pub fn ratio_of(&self, i: usize) -> Option<f64> {
        self.blocks
            .iter()
            .find(|blk| blk.members.contains(i))
            .map(|blk| blk.ratio)
    }
}

/// The optimal solution of `min Σ x_i² / b_i` over `B(f)` from the chain.
/// Consecutive blocks with equal ratios (within tolerance) are merged.
pub fn base_from_chain(chain: &Chain, b: &[f64]) -> BaseVector {
    let n = chain.n();
    let mut x = vec![0.0; n];
    let mut blocks: Vec<(Vec<usize>, f64, f64, f64)> = Vec::new();
    for j in 0..chain.len() {
        let members = chain.block(j);
        let rise = chain.f_values[j + 1] - chain.f_values[j];
        let weight: f64 = members.iter().map(|&i| b[i]).sum();
        let ratio = rise / weight;
        for &i in members {
            x[i] = ratio * b[i];
        }
        match blocks.last_mut() {
            Some(last) if values_equal(last.1, ratio, false) => {
                last.0.extend_from_slice(members);
                last.2 += rise;
                last.3 += weight;
                last.1 = last.2 / last.3;
            }
            _ => blocks.push((members.to_vec(), ratio, rise, weight)),
        }
    }
    BaseVector {
        x,
        blocks: blocks
            .into_iter()
            .map(|(members, ratio, ..)| Block {
                members: members.into_iter().collect(),
                ratio,
            })
            .collect(),
    }
}

/// A member of the family of separable objectives sharing one optimum over
/// `B(f)` for nondecreasing `f`.
#[derive(Clone)]
pub enum ObjectiveVariant {
    /// `min Σ x_i² / b_i`
    QuadraticOverB,
    /// `min Σ x_i^{p+1} / b_i^p` for `p > 0`, `max` of the same for `p < 0`, `p ≠ -1`
    PowerP(f64),
    /// `max Σ b_i ln x_i`
    LogBarrier,
    /// `min Σ x_i ln(x_i / b_i) + b_i - x_i`
    Kl,
    /// `min Σ x_i g0(b_i / x_i)` for a differentiable strictly convex `g0`
    PerspectiveG0(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ObjectiveVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveVariant::QuadraticOverB => write!(f, "QuadraticOverB"),
            ObjectiveVariant::PowerP(p) => write!(f, "PowerP({p})"),
            ObjectiveVariant::LogBarrier => write!(f, "LogBarrier"),
            ObjectiveVariant::Kl => write!(f, "Kl"),
            ObjectiveVariant::PerspectiveG0(_) => write!(f, "PerspectiveG0(..)"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Domain {
    Any,
    NonNegative,
    Positive,
}

impl ObjectiveVariant {
    pub fn validate(&self) -> Result<()> {
        if let ObjectiveVariant::PowerP(p) = *self {
            if !p.is_finite() || p == 0.0 || p == -1.0 {
                return Err(DecompError::InvalidParameter(format!(
                    "exponent p = {p} must be finite, nonzero and not -1"
                )));
            }
        }
        Ok(())
    }

    pub fn sense(&self) -> Sense {
        match self {
            ObjectiveVariant::PowerP(p) if *p < 0.0 => Sense::Maximize,
            ObjectiveVariant::LogBarrier => Sense::Maximize,
            _ => Sense::Minimize,
        }
    }

    fn domain(&self) -> Domain {
        match self {
            ObjectiveVariant::QuadraticOverB => Domain::Any,
            ObjectiveVariant::PowerP(p) if *p < 0.0 => Domain::Positive,
            ObjectiveVariant::PowerP(_) | ObjectiveVariant::Kl => Domain::NonNegative,
            ObjectiveVariant::LogBarrier | ObjectiveVariant::PerspectiveG0(_) => Domain::Positive,
        }
    }

    /// Fails when a block ratio lies outside the variant's domain.
    pub fn check_admissible(&self, base: &BaseVector) -> Result<()> {
        let domain = self.domain();
        for (block, blk) in base.blocks.iter().enumerate() {
            let bad = match domain {
                Domain::Any => false,
                Domain::NonNegative => blk.ratio < 0.0,
                Domain::Positive => blk.ratio <= 0.0,
            };
            if bad {
                return Err(DecompError::PositivityViolated {
                    block,
                    ratio: blk.ratio,
                });
            }
        }
        Ok(())
    }

    /// The objective value at `x`.
    pub fn objective(&self, x: &[f64], b: &[f64]) -> f64 {
        let terms = x.iter().zip(b);
        match self {
            ObjectiveVariant::QuadraticOverB => terms.map(|(x, b)| x * x / b).sum(),
            ObjectiveVariant::PowerP(p) => terms.map(|(x, b)| x.powf(p + 1.0) / b.powf(*p)).sum(),
            ObjectiveVariant::LogBarrier => terms.map(|(x, b)| b * x.ln()).sum(),
            ObjectiveVariant::Kl => terms
                .map(|(&x, &b)| {
                    let entropy = if x == 0.0 { 0.0 } else { x * (x / b).ln() };
                    entropy + b - x
                })
                .sum(),
            ObjectiveVariant::PerspectiveG0(g0) => terms.map(|(x, b)| x * g0(b / x)).sum(),
        }
    }
}

/// Solves any member of the objective family over `B(f)` for nondecreasing
/// `f`. The computation is the same for every variant; the variant only
/// decides which block ratios are admissible.
pub fn solve_family(
    spec: &SubmodularSpec,
    b: &[f64],
    variant: &ObjectiveVariant,
) -> Result<BaseVector> {
    variant.validate()?;
    let chain = decompose(spec, b)?;
    let base = base_from_chain(&chain, b);
    variant.check_admissible(&base)?;
    Ok(base)
}

/// Exhaustive reference for [`decompose`]: breakpoints are read off the
/// lower convex hull of the points `(b(S), f(S))` over all subsets, and the
/// maximal minimizer of `f - αb` is found by enumeration at a parameter
/// inside every interval between consecutive breakpoints.
pub fn brute_force_chain(spec: &SubmodularSpec, b: &[f64]) -> Result<Chain> {
    let n = spec.n();
    if n > MAX_CHAIN_ORACLE_N {
        return Err(SubmodularError::GroundSetTooLarge {
            n,
            limit: MAX_CHAIN_ORACLE_N,
        }
        .into());
    }
    check_b(b, n)?;
    let table = spec.value_table()?;
    let weight = |bits: u64| -> f64 { (0..n).filter(|i| bits >> i & 1 == 1).map(|i| b[i]).sum() };
    let exact = spec.is_integral() && b.iter().copied().all(crate::is_integral);

    let mut points: Vec<(f64, f64)> = (0..table.len() as u64)
        .map(|bits| (weight(bits), table[bits as usize]))
        .collect();
    points.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    points.dedup_by(|q, p| p.0 == q.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in &points {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let slopes: Vec<f64> = hull
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();

    let mut probes = Vec::with_capacity(slopes.len() + 1);
    if let (Some(first), Some(last)) = (slopes.first(), slopes.last()) {
        probes.push(first - 1.0 - first.abs());
        probes.extend(slopes.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        probes.push(last + 1.0 + last.abs());
    } else {
        probes.push(0.0);
    }

    let mut sets: Vec<u64> = vec![0, (1u64 << n) - 1];
    for &alpha in &probes {
        let best = minimize_table(&table, n, |bits| -alpha * weight(bits), exact);
        sets.push(best.maximal.to_bits());
    }
    sets.sort_by_key(|s| (s.count_ones(), *s));
    sets.dedup();

    let mut order = Vec::with_capacity(n);
    let mut bounds = Vec::with_capacity(sets.len());
    let mut prev = 0u64;
    for &s in &sets {
        if s & prev != prev {
            return Err(DecompError::NotNested);
        }
        order.extend((0..n).filter(|i| (s & !prev) >> i & 1 == 1));
        bounds.push((order.len(), table[s as usize]));
        prev = s;
    }
    Chain::assemble(order, bounds, b, probes.len(), 0)
}

/// Largest violation of `x(S) <= f(S)` over all subsets, and the gap
/// `|x(V) - f(V)|`, against a bitmask-indexed table with `f(∅) = 0`.
pub fn base_violation(table: &[f64], x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let mut worst: f64 = 0.0;
    for bits in 0..table.len() {
        let xs: f64 = (0..n).filter(|i| bits >> i & 1 == 1).map(|i| x[i]).sum();
        worst = worst.max(xs - table[bits]);
    }
    let total: f64 = x.iter().sum();
    (worst, (total - table[table.len() - 1]).abs())
}
