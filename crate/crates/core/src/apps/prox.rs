//! Proximal operators of norms that are Lovász extensions of graph-cut
//! functions: `argmin_β ½‖β - s‖² + λ Ω(β)`.
//!
//! The dual is the min-norm point `t` of `B(g - s/λ)` and `β = -λ t`.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::decomp::{base_from_chain, decompose, DecompError};
use crate::graph::{FlowNetwork, SINK};
use crate::subfn::{SubmodularError, SubmodularSpec};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProxError {
    #[error("lambda = {0} must be positive and finite")]
    InvalidLambda(f64),
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("expected {expected} values for {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid group structure: {0}")]
    InvalidGroups(String),
    #[error("fused weight {index} is {value}; weights must be nonnegative")]
    NegativeWeight { index: usize, value: f64 },
    #[error(transparent)]
    Decomp(#[from] DecompError),
}

impl From<SubmodularError> for ProxError {
    fn from(e: SubmodularError) -> Self {
        ProxError::Decomp(e.into())
    }
}

#[derive(Clone, Debug)]
pub enum Regularizer {
    /// `Σ w_i |β_i - β_{i+1}|`, unit weights when `None`
    Fused { weights: Option<Vec<f64>> },
    /// `Σ_g d_g max_{i∈g} |β_i|`
    GroupLinf {
        groups: Vec<Vec<usize>>,
        weights: Vec<f64>,
    },
    /// the Lovász extension of a graph-backed function with `g(∅) = 0`
    GraphCut(SubmodularSpec),
}

impl Regularizer {
    pub fn fused() -> Self {
        Regularizer::Fused { weights: None }
    }

    fn check(&self, n: usize) -> Result<(), ProxError> {
        match self {
            Regularizer::Fused { weights: Some(w) } => {
                let expected = n.saturating_sub(1);
                if w.len() != expected {
                    return Err(ProxError::LengthMismatch {
                        what: "fused weights",
                        expected,
                        got: w.len(),
                    });
                }
                if let Some(index) = w.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return Err(ProxError::NegativeWeight {
                        index,
                        value: w[index],
                    });
                }
            }
            Regularizer::Fused { weights: None } => {}
            Regularizer::GroupLinf { groups, weights } => {
                if groups.len() != weights.len() {
                    return Err(ProxError::LengthMismatch {
                        what: "group weights",
                        expected: groups.len(),
                        got: weights.len(),
                    });
                }
                for (g, (members, &d)) in groups.iter().zip(weights).enumerate() {
                    if members.is_empty() {
                        return Err(ProxError::InvalidGroups(format!("group {g} is empty")));
                    }
                    if let Some(&i) = members.iter().find(|&&i| i >= n) {
                        return Err(ProxError::InvalidGroups(format!(
                            "group {g} contains {i}, outside 0..{n}"
                        )));
                    }
                    if !(d > 0.0) || !d.is_finite() {
                        return Err(ProxError::InvalidGroups(format!(
                            "group {g} has weight {d}; weights must be positive"
                        )));
                    }
                }
            }
            Regularizer::GraphCut(spec) => {
                if spec.n() != n {
                    return Err(ProxError::LengthMismatch {
                        what: "regularizer ground set",
                        expected: n,
                        got: spec.n(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The set function whose Lovász extension is the norm on `β ≥ 0`
    /// (and everywhere for the fused and graph-cut cases).
    pub fn spec(&self, n: usize) -> Result<SubmodularSpec, ProxError> {
        self.check(n)?;
        let spec = match self {
            Regularizer::Fused { weights } => {
                let mut edges = Vec::with_capacity(2 * n.saturating_sub(1));
                for i in 0..n.saturating_sub(1) {
                    let w = weights.as_ref().map_or(1.0, |w| w[i]);
                    edges.push((i, i + 1, w));
                    edges.push((i + 1, i, w));
                }
                SubmodularSpec::from_transformed_cut(n, &edges, &vec![0.0; n])?
            }
            Regularizer::GroupLinf { groups, weights } => {
                // coverage: u_g costs d_g once any member of g is in S
                let mut edges = Vec::new();
                for (g, (members, &d)) in groups.iter().zip(weights).enumerate() {
                    let u = 2 + n + g;
                    for &i in members {
                        edges.push((2 + i, u, d));
                    }
                    edges.push((u, SINK, d));
                }
                let net = FlowNetwork::build(n, groups.len(), edges).map_err(SubmodularError::from)?;
                SubmodularSpec::generalized_cut(net)?
            }
            Regularizer::GraphCut(spec) => spec.clone(),
        };
        Ok(spec)
    }

    /// `Ω(β)`.
    pub fn norm(&self, beta: &[f64]) -> Result<f64, ProxError> {
        let n = beta.len();
        self.check(n)?;
        Ok(match self {
            Regularizer::Fused { weights } => (0..n.saturating_sub(1))
                .map(|i| weights.as_ref().map_or(1.0, |w| w[i]) * (beta[i] - beta[i + 1]).abs())
                .sum(),
            Regularizer::GroupLinf { groups, weights } => groups
                .iter()
                .zip(weights)
                .map(|(members, d)| d * members.iter().fold(0.0, |m: f64, &i| m.max(beta[i].abs())))
                .sum(),
            Regularizer::GraphCut(spec) => spec.lovasz_extension(beta)?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct ProxProblem {
    pub s: Vec<f64>,
    pub lambda: f64,
    pub reg: Regularizer,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProxSolution {
    pub beta: Vec<f64>,
    /// the min-norm point of `B(g - s/λ)`; `beta = -lambda * t` where the
    /// sign trick is not in play
    pub t: Vec<f64>,
    pub minimization_count: usize,
    pub flow_solves: usize,
}

impl ProxProblem {
    /// `½‖β - s‖² + λ Ω(β)`.
    pub fn objective(&self, beta: &[f64]) -> Result<f64, ProxError> {
        let fit: f64 = beta.iter().zip(&self.s).map(|(b, s)| 0.5 * (b - s) * (b - s)).sum();
        Ok(fit + self.lambda * self.reg.norm(beta)?)
    }
}

fn check_inputs(s: &[f64], lambda: f64) -> Result<(), ProxError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(ProxError::InvalidLambda(lambda));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(ProxError::NonFinite("s"));
    }
    Ok(())
}

pub fn prox(p: &ProxProblem) -> Result<ProxSolution, ProxError> {
    let n = p.s.len();
    check_inputs(&p.s, p.lambda)?;
    let spec = p.reg.spec(n)?;
    match p.reg {
        Regularizer::GroupLinf { .. } => {
            // the norm is sign-symmetric and agrees with the Lovász extension
            // on β ≥ 0: solve at |s|, clip at zero, restore signs
            let abs: Vec<f64> = p.s.iter().map(|v| v.abs()).collect();
            let mut sol = prox_with_spec(&abs, p.lambda, &spec)?;
            for (b, s) in sol.beta.iter_mut().zip(&p.s) {
                *b = b.max(0.0).copysign(*s);
                if *s == 0.0 {
                    *b = 0.0;
                }
            }
            Ok(sol)
        }
        _ => prox_with_spec(&p.s, p.lambda, &spec),
    }
}

/// Prox of the Lovász extension of `spec`.
pub fn prox_with_spec(s: &[f64], lambda: f64, spec: &SubmodularSpec) -> Result<ProxSolution, ProxError> {
    let n = s.len();
    check_inputs(s, lambda)?;
    if spec.n() != n {
        return Err(ProxError::LengthMismatch {
            what: "s",
            expected: spec.n(),
            got: n,
        });
    }
    let ones = vec![1.0; n];
    let shift: Vec<f64> = s.iter().map(|v| -v / lambda).collect();
    let centered = spec.with_modular_shift(&shift)?;
    let (monotone, beta0) = centered.nondecreasing_shift(&ones)?;
    let chain = decompose(&monotone, &ones)?;
    let base = base_from_chain(&chain, &ones);
    let t: Vec<f64> = base.x.iter().map(|x| x - beta0).collect();
    let beta = t.iter().map(|t| -lambda * t).collect();
    Ok(ProxSolution {
        beta,
        t,
        minimization_count: chain.minimization_count,
        flow_solves: chain.flow_solves,
    })
}

/// Largest decrease of the prox objective found by stepping from `beta`
/// along `directions` random unit directions by each of `steps`. Zero means
/// no improving step was found.
pub fn certificate_violation<R: Rng + ?Sized>(
    p: &ProxProblem,
    beta: &[f64],
    directions: usize,
    steps: &[f64],
    rng: &mut R,
) -> Result<f64, ProxError> {
    let n = beta.len();
    let base = p.objective(beta)?;
    let mut worst: f64 = 0.0;
    let mut trial = vec![0.0; n];
    for _ in 0..directions {
        let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        d.iter_mut().for_each(|v| *v /= norm);
        for &delta in steps {
            for (k, t) in trial.iter_mut().enumerate() {
                *t = beta[k] + delta * d[k];
            }
            worst = worst.max(base - p.objective(&trial)?);
        }
    }
    Ok(worst)
}

/// Subgradient residual of the fused prox optimality conditions on a chain:
/// with `v_k = Σ_{i≤k} (s_i - β_i) / λ`, every `v_k` must lie in
/// `w_k · ∂|β_k - β_{k+1}|` and the total must vanish.
pub fn fused_subgradient_residual(
    s: &[f64],
    lambda: f64,
    weights: Option<&[f64]>,
    beta: &[f64],
    tie_tol: f64,
) -> f64 {
    let n = s.len();
    let mut v = 0.0;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        v += (s[k] - beta[k]) / lambda;
        if k + 1 == n {
            worst = worst.max(v.abs());
            break;
        }
        let w = weights.map_or(1.0, |w| w[k]);
        let jump = beta[k] - beta[k + 1];
        let r = if jump > tie_tol {
            (v - w).abs()
        } else if jump < -tie_tol {
            (v + w).abs()
        } else {
            (v.abs() - w).max(0.0)
        };
        worst = worst.max(r);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn fused_two_points() {
        let p = ProxProblem {
            s: vec![2.0, 0.0],
            lambda: 1.0,
            reg: Regularizer::fused(),
        };
        let sol = prox(&p).unwrap();
        assert!(close(&sol.beta, &[1.0, 1.0], 1e-9), "{:?}", sol.beta);
        let split = prox(&ProxProblem { lambda: 0.25, ..p }).unwrap();
        assert!(close(&split.beta, &[1.75, 0.25], 1e-9), "{:?}", split.beta);
    }

    #[test]
    fn weak_regularizer_is_identity() {
        let s = vec![0.3, -1.2, 4.0, 4.0, 0.0];
        let p = ProxProblem {
            s: s.clone(),
            lambda: 1e-6,
            reg: Regularizer::fused(),
        };
        assert!(close(&prox(&p).unwrap().beta, &s, 1e-4));
        let g = ProxProblem {
            reg: Regularizer::GroupLinf {
                groups: vec![vec![0, 1, 2], vec![2, 3, 4]],
                weights: vec![1.0, 2.0],
            },
            ..p
        };
        assert!(close(&prox(&g).unwrap().beta, &s, 1e-4));
    }

    #[test]
    fn group_linf_against_grid() {
        let p = ProxProblem {
            s: vec![3.0, 0.0],
            lambda: 1.0,
            reg: Regularizer::GroupLinf {
                groups: vec![vec![0, 1]],
                weights: vec![1.0],
            },
        };
        let beta = prox(&p).unwrap().beta;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for a in 0..=4000 {
            for b in -100..=100 {
                let (x, y) = (a as f64 * 1e-3, b as f64 * 1e-3);
                let v = p.objective(&[x, y]).unwrap();
                if v < best.0 {
                    best = (v, x, y);
                }
            }
        }
        assert!(close(&beta, &[best.1, best.2], 1e-3), "{beta:?} vs {best:?}");
        assert!(close(&beta, &[2.0, 0.0], 1e-9));
    }

    #[test]
    fn group_signs_and_weights() {
        let p = ProxProblem {
            s: vec![-3.0, 1.0, 0.5, 2.0],
            lambda: 0.7,
            reg: Regularizer::GroupLinf {
                groups: vec![vec![0, 1], vec![1, 2, 3]],
                weights: vec![2.0, 0.5],
            },
        };
        let beta = prox(&p).unwrap().beta;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gap = certificate_violation(&p, &beta, 1000, &[1e-3, 1e-4], &mut rng).unwrap();
        assert!(gap <= 1e-6, "gap {gap}, beta {beta:?}");
    }

    #[test]
    fn fused_subgradients() {
        let s = vec![1.0, 3.0, 2.5, -1.0, 0.0, 0.2];
        let p = ProxProblem {
            s: s.clone(),
            lambda: 0.6,
            reg: Regularizer::fused(),
        };
        let beta = prox(&p).unwrap().beta;
        assert!(fused_subgradient_residual(&s, 0.6, None, &beta, 1e-9) <= 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(certificate_violation(&p, &beta, 1000, &[1e-3, 1e-4], &mut rng).unwrap() <= 1e-6);
    }

    #[test]
    fn bad_inputs() {
        let p = ProxProblem {
            s: vec![1.0],
            lambda: 0.0,
            reg: Regularizer::fused(),
        };
        assert_eq!(prox(&p).unwrap_err(), ProxError::InvalidLambda(0.0));
        let g = ProxProblem {
            s: vec![1.0, 2.0],
            lambda: 1.0,
            reg: Regularizer::GroupLinf {
                groups: vec![vec![0, 2]],
                weights: vec![1.0],
            },
        };
        assert!(matches!(prox(&g), Err(ProxError::InvalidGroups(_))));
    }
}
