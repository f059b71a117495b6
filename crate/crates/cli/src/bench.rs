//! Benchmark profiles. Every instance derives its own seed from the base
//! seed and its position, so rows do not depend on `--jobs`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use subflow_core::apps::{densest_levels, fista_regress, gen_fused_data, prox, FistaOptions, ProxProblem, Regularizer};
use subflow_core::instances;

use crate::commands::decomp_error;
use crate::CliError;

pub const PROFILES: &[&str] = &["fused-scaling", "densest", "table1-desk"];

#[derive(Clone, Copy, Debug)]
enum Task {
    FusedProx { n: usize },
    Densest { n: usize, density: f64 },
    FusedRegress { n: usize, rows: usize },
}

#[derive(Debug, Serialize)]
struct Row {
    profile: String,
    instance: String,
    n: usize,
    rows: usize,
    edges: usize,
    seed: u64,
    /// empty for one-shot tasks
    iterations: Option<usize>,
    converged: Option<bool>,
    minimization_count: usize,
    flow_solves: usize,
    wall_seconds: f64,
}

fn tasks(profile: &str) -> Option<Vec<Task>> {
    Some(match profile {
        "fused-scaling" => [1_000, 10_000, 100_000].map(|n| Task::FusedProx { n }).to_vec(),
        "densest" => [(100, 0.1), (300, 0.05), (1_000, 0.01), (3_000, 0.003), (10_000, 0.001)]
            .map(|(n, density)| Task::Densest { n, density })
            .to_vec(),
        // the n = N = 500, k = 20 row and its larger neighbours
        "table1-desk" => [(500, 500), (1_000, 500), (500, 1_000), (1_000, 1_000)]
            .map(|(n, rows)| Task::FusedRegress { n, rows })
            .to_vec(),
        _ => return None,
    })
}

fn run_task(profile: &str, index: usize, task: Task, seed: u64) -> Result<Row, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let row = |instance: String, n, rows, edges, iterations, converged, minimization_count, flow_solves, secs| Row {
        profile: profile.to_string(),
        instance,
        n,
        rows,
        edges,
        seed,
        iterations,
        converged,
        minimization_count,
        flow_solves,
        wall_seconds: secs,
    };
    match task {
        Task::FusedProx { n } => {
            let s: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let start = Instant::now();
            let sol = prox(&ProxProblem {
                s,
                lambda: 0.5,
                reg: Regularizer::fused(),
            })
            .map_err(|e| CliError::Solver(e.to_string()))?;
            let secs = start.elapsed().as_secs_f64();
            Ok(row(
                format!("fused-prox-{index}"),
                n,
                0,
                n.saturating_sub(1),
                None,
                None,
                sol.minimization_count,
                sol.flow_solves,
                secs,
            ))
        }
        Task::Densest { n, density } => {
            let edges = instances::density_graph(&mut rng, n, 5, density);
            let start = Instant::now();
            let report = densest_levels(n, &edges).map_err(decomp_error)?;
            let secs = start.elapsed().as_secs_f64();
            Ok(row(
                format!("densest-{index}"),
                n,
                0,
                edges.len(),
                None,
                None,
                report.minimization_count,
                report.flow_solves,
                secs,
            ))
        }
        Task::FusedRegress { n, rows } => {
            let data = gen_fused_data(n, rows, 20, 1.0, seed).map_err(|e| CliError::Input(e.to_string()))?;
            let start = Instant::now();
            let run = fista_regress(&data.design, &data.targets, 50.0, &Regularizer::fused(), FistaOptions::default())
                .map_err(|e| CliError::Solver(e.to_string()))?;
            let secs = start.elapsed().as_secs_f64();
            Ok(row(
                format!("fused-regress-{index}"),
                n,
                rows,
                n.saturating_sub(1),
                Some(run.iterations),
                Some(run.converged),
                run.minimization_count,
                run.flow_solves,
                secs,
            ))
        }
    }
}

pub fn run(profile: &str, jobs: usize, seed: u64) -> Result<String, CliError> {
    let list = tasks(profile).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown --profile {profile:?} (expected one of {})",
            PROFILES.join(", ")
        ))
    })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    let rows: Vec<Result<Row, CliError>> = pool.install(|| {
        list.par_iter()
            .enumerate()
            .map(|(i, &task)| run_task(profile, i, task, seed.wrapping_add(i as u64)))
            .collect()
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        let row = row?;
        log::info!("{} n={} {:.3}s", row.instance, row.n, row.wall_seconds);
        w.serialize(row).map_err(|e| CliError::Solver(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Solver(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
