//! Accelerated proximal gradient for `½‖Xβ - y‖² + λ Ω(β)`.

use serde::Serialize;
use thiserror::Error;

use super::prox::{prox, ProxError, ProxProblem, Regularizer};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FistaError {
    #[error("{0} contains a non-finite value")]
    NonFiniteInput(&'static str),
    #[error("design is {rows}x{cols} but there are {targets} targets")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        targets: usize,
    },
    #[error("lambda = {0} must be positive")]
    InvalidLambda(f64),
    #[error(transparent)]
    Prox(#[from] ProxError),
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        Some(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `X v`
    pub fn mul(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Xᵀ r`
    pub fn mul_t(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &ri) in r.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * ri;
            }
        }
        out
    }

    /// Estimate of the largest eigenvalue of `XᵀX` by power iteration.
    pub fn spectral_norm_sq(&self, iterations: usize) -> f64 {
        let n = self.cols;
        if n == 0 || self.rows == 0 {
            return 0.0;
        }
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
        let mut estimate = 0.0;
        for _ in 0..iterations {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            let w = self.mul_t(&self.mul(&v));
            let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
            v = w;
            if (next - estimate).abs() <= 1e-10 * next.abs() {
                return next;
            }
            estimate = next;
        }
        estimate
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FistaOptions {
    /// stop when an accepted step changes the objective by less than this,
    /// relative to its magnitude
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FistaOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionRun {
    pub beta: Vec<f64>,
    /// objective at the iterate after each iteration, starting at β = 0
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub step: f64,
    pub minimization_count: usize,
    pub flow_solves: usize,
}

fn objective(x: &DenseMatrix, y: &[f64], lambda: f64, reg: &Regularizer, beta: &[f64]) -> Result<f64, ProxError> {
    let fit: f64 = x
        .mul(beta)
        .iter()
        .zip(y)
        .map(|(p, t)| 0.5 * (p - t) * (p - t))
        .sum();
    Ok(fit + lambda * reg.norm(beta)?)
}

/// Monotone FISTA with least-squares loss and step `1/L`.
pub fn fista_regress(
    design: &DenseMatrix,
    targets: &[f64],
    lambda: f64,
    reg: &Regularizer,
    opts: FistaOptions,
) -> Result<RegressionRun, FistaError> {
    if design.data.iter().any(|v| !v.is_finite()) {
        return Err(FistaError::NonFiniteInput("design"));
    }
    if targets.iter().any(|v| !v.is_finite()) {
        return Err(FistaError::NonFiniteInput("targets"));
    }
    if !lambda.is_finite() {
        return Err(FistaError::NonFiniteInput("lambda"));
    }
    if !(lambda > 0.0) {
        return Err(FistaError::InvalidLambda(lambda));
    }
    if design.rows != targets.len() {
        return Err(FistaError::DimensionMismatch {
            rows: design.rows,
            cols: design.cols,
            targets: targets.len(),
        });
    }
    let n = design.cols;
    // power iteration underestimates; pad the Lipschitz constant
    let lipschitz = design.spectral_norm_sq(500).max(f64::MIN_POSITIVE) * 1.01;
    let step = 1.0 / lipschitz;

    let mut beta = vec![0.0; n];
    let mut current = objective(design, targets, lambda, reg, &beta)?;
    let mut history = vec![current];
    let mut y_point = beta.clone();
    let mut t: f64 = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    let mut minimization_count = 0;
    let mut flow_solves = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let residual: Vec<f64> = design
            .mul(&y_point)
            .iter()
            .zip(targets)
            .map(|(p, t)| p - t)
            .collect();
        let grad = design.mul_t(&residual);
        let center: Vec<f64> = y_point.iter().zip(&grad).map(|(y, g)| y - step * g).collect();
        let sol = prox(&ProxProblem {
            s: center,
            lambda: lambda * step,
            reg: reg.clone(),
        })?;
        minimization_count += sol.minimization_count;
        flow_solves += sol.flow_solves;
        let z = sol.beta;
        let z_value = objective(design, targets, lambda, reg, &z)?;

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let accepted = z_value <= current;
        let previous = std::mem::take(&mut beta);
        let previous_value = current;
        if accepted {
            beta = z.clone();
            current = z_value;
        } else {
            beta = previous.clone();
        }
        history.push(current);
        y_point = (0..n)
            .map(|i| beta[i] + (t / t_next) * (z[i] - beta[i]) + ((t - 1.0) / t_next) * (beta[i] - previous[i]))
            .collect();
        t = t_next;

        if accepted {
            let change = (previous_value - current).abs() / previous_value.abs().max(f64::MIN_POSITIVE);
            if change < opts.tol {
                converged = true;
                break;
            }
        }
    }
    log::debug!("fista: {iterations} iterations, objective {current}, converged {converged}");
    Ok(RegressionRun {
        beta,
        history,
        iterations,
        converged,
        step,
        minimization_count,
        flow_solves,
    })
}
