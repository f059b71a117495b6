use std::path::Path;

use serde_json::json;

use subflow_core::apps::{gen_fused_data, gen_group_data_with, DenseMatrix, GroupDataOptions, Regularizer};

use crate::commands::regularizer_spec;
use crate::format::{DataSpec, Problem, ProblemFile, RegressPayload, FORMAT_VERSION};
use crate::CliError;

pub enum DataRequest {
    Fused {
        n: usize,
        rows: usize,
        k: usize,
        sigma: f64,
    },
    Group {
        n: usize,
        rows: usize,
        n_groups: usize,
        group_size: usize,
        stride: Option<usize>,
        sigma: f64,
    },
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("cannot write {}: {e}", path.display()))
}

fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_column(path: &Path, values: &[f64]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    for v in values {
        w.write_record([v.to_string()]).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Writes `design.csv`, `targets.csv`, `meta.json` and a `problem.json`
/// that regresses on them, and returns a JSON summary of what was written.
pub fn generate(req: DataRequest, lambda: f64, seed: u64, out_dir: &Path) -> Result<String, CliError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(CliError::Usage(format!("--lambda must be positive, got {lambda}")));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let (design, targets, meta, reg) = match req {
        DataRequest::Fused { n, rows, k, sigma } => {
            let d = gen_fused_data(n, rows, k, sigma, seed).map_err(|e| CliError::Usage(e.to_string()))?;
            let meta = json!({
                "kind": "fused",
                "seed": seed,
                "n": n,
                "rows": rows,
                "k": k,
                "sigma": sigma,
                "true_beta": d.true_beta,
            });
            (d.design, d.targets, meta, Regularizer::fused())
        }
        DataRequest::Group {
            n,
            rows,
            n_groups,
            group_size,
            stride,
            sigma,
        } => {
            let d = gen_group_data_with(n, rows, n_groups, group_size, seed, GroupDataOptions { stride, sigma })
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let meta = json!({
                "kind": "group",
                "seed": seed,
                "n": n,
                "rows": rows,
                "n_groups": n_groups,
                "group_size": group_size,
                "stride": stride,
                "sigma": sigma,
                "true_beta": d.true_beta,
                "groups": d.groups.iter().map(|g| g.iter().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "weights": d.weights,
                "causal_groups": d.causal_groups.iter().map(|g| g + 1).collect::<Vec<_>>(),
            });
            let reg = Regularizer::GroupLinf {
                groups: d.groups,
                weights: d.weights,
            };
            (d.design, d.targets, meta, reg)
        }
    };

    write_matrix(&out_dir.join("design.csv"), &design)?;
    write_column(&out_dir.join("targets.csv"), &targets)?;
    write_json(&out_dir.join("meta.json"), &meta)?;
    let problem = ProblemFile {
        version: FORMAT_VERSION,
        seed,
        problem: Problem::Regress(RegressPayload {
            data: DataSpec::Csv {
                design: "design.csv".into(),
                targets: "targets.csv".into(),
            },
            lambda,
            regularizer: regularizer_spec(&reg),
            tol: None,
            max_iter: None,
        }),
    };
    write_json(&out_dir.join("problem.json"), &problem)?;
    let summary = json!({
        "out_dir": out_dir.display().to_string(),
        "files": ["design.csv", "targets.csv", "meta.json", "problem.json"],
        "rows": design.rows(),
        "cols": design.cols(),
    });
    Ok(format!("{}\n", serde_json::to_string_pretty(&summary).expect("serializable")))
}
