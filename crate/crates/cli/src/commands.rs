use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use subflow_core::apps::{
    densest_levels, fista_regress, gen_fused_data, gen_group_data_with, min_ratio, prox, DenseMatrix,
    FistaError, FistaOptions, GroupDataOptions, ProxError, ProxProblem, Regularizer,
};
use subflow_core::maxflow::{self, CutKind};
use subflow_core::{
    base_from_chain, decompose_with, DecompError, DecomposeOptions, FlowNetwork, GroundSubset,
    SubmodularError, SINK, SOURCE,
};

use crate::format::{
    parse_problem, text_hash, CutChoice, DataSpec, MaxflowPayload, NetworkSpec, Problem, RegularizerSpec,
    ResultFile, VariantSpec,
};
use crate::CliError;

pub(crate) fn decomp_error(e: DecompError) -> CliError {
    match e {
        DecompError::Submodular(SubmodularError::Flow(f)) => CliError::Solver(f.to_string()),
        DecompError::Submodular(s) => CliError::Input(s.to_string()),
        DecompError::InvalidParameter(_) | DecompError::ExactUnavailable => CliError::Input(e.to_string()),
        DecompError::NonFiniteRatio | DecompError::PositivityViolated { .. } | DecompError::NotNested => {
            CliError::Solver(e.to_string())
        }
    }
}

fn prox_error(e: ProxError) -> CliError {
    match e {
        ProxError::Decomp(d) => decomp_error(d),
        other => CliError::Input(other.to_string()),
    }
}

fn fista_error(e: FistaError) -> CliError {
    match e {
        FistaError::Prox(p) => prox_error(p),
        other => CliError::Input(other.to_string()),
    }
}

/// 1-based element list.
pub(crate) fn one_based(set: &GroundSubset) -> Vec<usize> {
    set.iter().map(|i| i + 1).collect()
}

/// Replaces `-0.0` so that results print as `0.0`.
fn positive_zero(mut v: Vec<f64>) -> Vec<f64> {
    v.iter_mut().for_each(|x| *x += 0.0);
    v
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn render(result: &ResultFile) -> String {
    let mut text = serde_json::to_string_pretty(result).expect("results serialize");
    text.push('\n');
    text
}

fn node_label(net: &FlowNetwork, v: usize) -> String {
    match v {
        SOURCE => "s".into(),
        SINK => "t".into(),
        _ if v < 2 + net.n_ground() => format!("g{}", v - 1),
        _ => format!("a{}", v - 1 - net.n_ground()),
    }
}

fn maxflow_outputs(net: &FlowNetwork, cut: CutChoice) -> Result<Value, CliError> {
    let solved = maxflow::solve(net).map_err(|e| CliError::Solver(e.to_string()))?;
    let kind = match cut {
        CutChoice::Maximal => CutKind::Maximal,
        CutChoice::Minimal => CutKind::Minimal,
    };
    let side = solved.side(kind);
    let edge_flows: Vec<Value> = net
        .edges()
        .iter()
        .zip(&solved.flow.edge_flows)
        .map(|(e, f)| json!([node_label(net, e.tail), node_label(net, e.head), f]))
        .collect();
    Ok(json!({
        "value": solved.flow.value,
        "cut": cut,
        "side": one_based(&side.ground(net)),
        "aux_side": side.aux(net).iter().map(|j| j + 1).collect::<Vec<_>>(),
        "edge_flows": edge_flows,
    }))
}

/// `maxflow` accepts a JSON problem file or raw DIMACS text.
pub fn maxflow(input: &Path, cut: Option<CutChoice>) -> Result<String, CliError> {
    let text = read(input)?;
    let start = Instant::now();
    let (payload, hash) = if text.trim_start().starts_with('{') {
        let (file, hash) = parse_problem(&text)?;
        match file.problem {
            Problem::Maxflow(p) => (p, hash),
            other => {
                return Err(CliError::Usage(format!(
                    "--input holds a {} problem, not maxflow",
                    other.kind()
                )))
            }
        }
    } else {
        (
            MaxflowPayload {
                network: NetworkSpec::Dimacs { text: text.clone() },
                cut: None,
            },
            text_hash(&text),
        )
    };
    let net = payload.network.build()?;
    let choice = cut.or(payload.cut).unwrap_or(CutChoice::Maximal);
    let outputs = maxflow_outputs(&net, choice)?;
    let result = ResultFile::new("maxflow", hash, outputs, start.elapsed().as_secs_f64());
    Ok(render(&result))
}

/// Runs the non-maxflow subcommands; the problem kind must match `expected`.
pub fn by_kind(input: &Path, expected: &str) -> Result<String, CliError> {
    let text = read(input)?;
    let (file, hash) = parse_problem(&text)?;
    if file.problem.kind() != expected {
        return Err(CliError::Usage(format!(
            "--input holds a {} problem, not {expected}",
            file.problem.kind()
        )));
    }
    let base_dir = input.parent().map(Path::to_path_buf).unwrap_or_default();
    let start = Instant::now();
    let outputs = match file.problem {
        Problem::Maxflow(p) => {
            let net = p.network.build()?;
            maxflow_outputs(&net, p.cut.unwrap_or(CutChoice::Maximal))?
        }
        Problem::Solve(p) => {
            let spec = p.function.build()?;
            let b = p.b.unwrap_or_else(|| vec![1.0; spec.n()]);
            let variant = p.variant.unwrap_or(VariantSpec::Quadratic).variant();
            variant.validate().map_err(decomp_error)?;
            let chain = decompose_with(&spec, &b, DecomposeOptions { mode: p.mode.into() }).map_err(decomp_error)?;
            let base = base_from_chain(&chain, &b);
            variant.check_admissible(&base).map_err(decomp_error)?;
            let chain_sets: Vec<Vec<usize>> = (1..=chain.len()).map(|j| one_based(&chain.set(j))).collect();
            let blocks: Vec<Value> = base
                .blocks
                .iter()
                .map(|blk| json!({"members": one_based(&blk.members), "ratio": blk.ratio}))
                .collect();
            json!({
                "chain": chain_sets,
                "breakpoints": chain.breakpoints(),
                "f_values": chain.f_values(),
                "x": base.x,
                "blocks": blocks,
                "minimization_count": chain.minimization_count,
                "flow_solves": chain.flow_solves,
            })
        }
        Problem::Prox(p) => {
            let reg = p.regularizer.build()?;
            let sol = prox(&ProxProblem {
                s: p.s,
                lambda: p.lambda,
                reg,
            })
            .map_err(prox_error)?;
            json!({
                "beta": positive_zero(sol.beta),
                "minimization_count": sol.minimization_count,
                "flow_solves": sol.flow_solves,
            })
        }
        Problem::Densest(p) => {
            let edges = p.zero_based_edges()?;
            let report = densest_levels(p.n, &edges).map_err(decomp_error)?;
            let levels: Vec<Value> = report
                .levels
                .iter()
                .map(|l| json!({"set": one_based(&l.set), "k": l.k, "weight": l.weight, "intensity": l.intensity}))
                .collect();
            json!({
                "levels": levels,
                "minimization_count": report.minimization_count,
                "flow_solves": report.flow_solves,
            })
        }
        Problem::Minratio(p) => {
            let spec = p.function.build()?;
            let b = p.b.unwrap_or_else(|| vec![1.0; spec.n()]);
            let found = min_ratio(&spec, &b).map_err(decomp_error)?;
            json!({
                "ratio": found.ratio,
                "set": one_based(&found.set),
                "minimization_count": found.minimization_count,
            })
        }
        Problem::Regress(p) => {
            let data = load_data(&p.data, file.seed, &base_dir)?;
            let reg = match (data.groups, &p.regularizer) {
                (Some(reg), _) => reg,
                (None, Some(spec)) => spec.build()?,
                (None, None) => Regularizer::fused(),
            };
            let mut opts = FistaOptions::default();
            if let Some(tol) = p.tol {
                opts.tol = tol;
            }
            if let Some(max_iter) = p.max_iter {
                opts.max_iter = max_iter;
            }
            let run = fista_regress(&data.design, &data.targets, p.lambda, &reg, opts).map_err(fista_error)?;
            let mut out = json!({
                "beta": positive_zero(run.beta),
                "history": run.history,
                "iterations": run.iterations,
                "converged": run.converged,
                "step": run.step,
                "minimization_count": run.minimization_count,
                "flow_solves": run.flow_solves,
            });
            if let Some(truth) = data.true_beta {
                out["true_beta"] = json!(truth);
            }
            out
        }
    };
    let result = ResultFile::new(expected, hash, outputs, start.elapsed().as_secs_f64());
    Ok(render(&result))
}

struct LoadedData {
    design: DenseMatrix,
    targets: Vec<f64>,
    true_beta: Option<Vec<f64>>,
    /// set for group data, which fixes its own regularizer
    groups: Option<Regularizer>,
}

fn read_csv_rows(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let bad = |e: String| CliError::Input(format!("{}: {e}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let row = record
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| bad(format!("not a number: {v:?}"))))
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn load_data(spec: &DataSpec, seed: u64, base_dir: &Path) -> Result<LoadedData, CliError> {
    let ragged = || CliError::Input("design rows have different lengths".into());
    Ok(match spec {
        DataSpec::Inline { design, targets } => LoadedData {
            design: DenseMatrix::from_rows(design).ok_or_else(ragged)?,
            targets: targets.clone(),
            true_beta: None,
            groups: None,
        },
        DataSpec::Csv { design, targets } => {
            let rows = read_csv_rows(&resolve(base_dir, design))?;
            let target_rows = read_csv_rows(&resolve(base_dir, targets))?;
            let mut flat = Vec::with_capacity(target_rows.len());
            for row in target_rows {
                match row.as_slice() {
                    [v] => flat.push(*v),
                    _ => return Err(CliError::Input("targets CSV must have one column".into())),
                }
            }
            LoadedData {
                design: DenseMatrix::from_rows(&rows).ok_or_else(ragged)?,
                targets: flat,
                true_beta: None,
                groups: None,
            }
        }
        DataSpec::Fused { n, rows, k, sigma } => {
            let d = gen_fused_data(*n, *rows, *k, *sigma, seed).map_err(|e| CliError::Input(e.to_string()))?;
            LoadedData {
                design: d.design,
                targets: d.targets,
                true_beta: Some(d.true_beta),
                groups: None,
            }
        }
        DataSpec::Group {
            n,
            rows,
            n_groups,
            group_size,
            stride,
            sigma,
        } => {
            let opts = GroupDataOptions {
                stride: *stride,
                sigma: *sigma,
            };
            let d = gen_group_data_with(*n, *rows, *n_groups, *group_size, seed, opts)
                .map_err(|e| CliError::Input(e.to_string()))?;
            LoadedData {
                design: d.design,
                targets: d.targets,
                true_beta: Some(d.true_beta),
                groups: Some(Regularizer::GroupLinf {
                    groups: d.groups,
                    weights: d.weights,
                }),
            }
        }
    })
}

/// Problem-file form of a regularizer, for files written by `gen`.
pub(crate) fn regularizer_spec(reg: &Regularizer) -> Option<RegularizerSpec> {
    match reg {
        Regularizer::Fused { weights } => Some(RegularizerSpec::Fused {
            weights: weights.clone(),
        }),
        Regularizer::GroupLinf { groups, weights } => Some(RegularizerSpec::GroupLinf {
            groups: groups.iter().map(|g| g.iter().map(|i| i + 1).collect()).collect(),
            weights: weights.clone(),
        }),
        Regularizer::GraphCut(_) => None,
    }
}
