//! Small oracle-equivalence suites embedded in the binary.

use std::fmt::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subflow_core::apps::prox::certificate_violation;
use subflow_core::apps::{densest_levels, min_ratio, prox, ProxProblem, Regularizer};
use subflow_core::decomp::base_violation;
use subflow_core::maxflow::{self, check_flow, CutKind};
use subflow_core::subfn::table_is_submodular;
use subflow_core::{base_from_chain, brute_force_chain, decompose, instances, FlowNetwork, SubmodularSpec, SOURCE};

type Check = Result<String, String>;

struct Ctx {
    rng: ChaCha8Rng,
    /// comparison tolerance; the hidden fault flag makes it negative
    tol: f64,
}

impl Ctx {
    fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.tol * (1.0 + a.abs().max(b.abs()))
    }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn small_spec(rng: &mut ChaCha8Rng) -> (SubmodularSpec, Vec<f64>) {
    let n = rng.random_range(1..=7);
    let n_aux = rng.random_range(0..=3);
    let net = instances::generalized_cut(rng, n, n_aux, 20, 0.4);
    let integral = rng.random_bool(0.5);
    let b = instances::weights(rng, n, 4, integral);
    (SubmodularSpec::generalized_cut(net).expect("generated networks are valid"), b)
}

fn enumerate_cuts(net: &FlowNetwork) -> Vec<(u64, f64)> {
    let inner = net.node_count() - 2;
    (0u64..1 << inner)
        .filter_map(|bits| {
            let mut side = vec![false; net.node_count()];
            side[SOURCE] = true;
            for v in 0..inner {
                side[2 + v] = bits >> v & 1 == 1;
            }
            net.cut_capacity(&side).finite().map(|c| (bits, c))
        })
        .collect()
}

fn maxflow_duality(cx: &mut Ctx) -> Check {
    for case in 0..60 {
        let n = cx.rng.random_range(1..=7);
        let n_aux = cx.rng.random_range(0..=3);
        let net = instances::generalized_cut(&mut cx.rng, n, n_aux, 20, 0.4);
        let solved = maxflow::solve(&net).map_err(s)?;
        let best = enumerate_cuts(&net).iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let scale = 1.0 + net.max_finite_capacity() * net.edges().len() as f64;
        check_flow(&net, &solved.flow, cx.tol * scale).map_err(|e| format!("case {case}: {e}"))?;
        if !cx.close(solved.flow.value, best) {
            return Err(format!("case {case}: flow {} vs min cut {best}", solved.flow.value));
        }
    }
    Ok("60 networks".into())
}

fn cut_lattice(cx: &mut Ctx) -> Check {
    for case in 0..60 {
        let n = cx.rng.random_range(1..=7);
        let n_aux = cx.rng.random_range(0..=3);
        let net = instances::generalized_cut(&mut cx.rng, n, n_aux, 4, 0.5);
        let solved = maxflow::solve(&net).map_err(s)?;
        let bits = |kind| -> u64 { solved.side(kind).members().iter().fold(0, |acc, &v| acc | 1 << (v - 2)) };
        let (maximal, minimal) = (bits(CutKind::Maximal), bits(CutKind::Minimal));
        for (side, value) in enumerate_cuts(&net) {
            let is_min = cx.close(value, solved.flow.value);
            if is_min && (side & !maximal != 0 || minimal & !side != 0) {
                return Err(format!("case {case}: min cut {side:b} outside [{minimal:b}, {maximal:b}]"));
            }
            if (side == maximal || side == minimal) && !is_min {
                return Err(format!("case {case}: extremal side {side:b} has capacity {value}"));
            }
        }
    }
    Ok("60 networks".into())
}

fn submodularity(cx: &mut Ctx) -> Check {
    let mut checked = 0;
    for _ in 0..20 {
        let n = cx.rng.random_range(1..=7);
        let (edges, a) = instances::transformed_cut(&mut cx.rng, n, 10, 0.4);
        let (d, w, y) = instances::decomposable(&mut cx.rng, n, 3, 6);
        let dense = instances::density_graph(&mut cx.rng, n, 5, 0.5);
        let specs = [
            SubmodularSpec::from_transformed_cut(n, &edges, &a).map_err(s)?,
            SubmodularSpec::from_decomposable(&d, &w, &y).map_err(s)?,
            SubmodularSpec::from_negated_density(n, &dense).map_err(s)?,
            small_spec(&mut cx.rng).0,
        ];
        for spec in specs {
            let table = spec.value_table().map_err(s)?;
            if !table_is_submodular(&table, spec.n(), cx.tol) {
                return Err(format!("instance {checked} is not submodular"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} functions from 4 constructors"))
}

fn chain_oracle(cx: &mut Ctx) -> Check {
    for case in 0..60 {
        let (spec, b) = small_spec(&mut cx.rng);
        let chain = decompose(&spec, &b).map_err(s)?;
        let oracle = brute_force_chain(&spec, &b).map_err(s)?;
        if chain.sets() != oracle.sets() {
            return Err(format!("case {case}: chains differ"));
        }
        let (x, y) = (base_from_chain(&chain, &b).x, base_from_chain(&oracle, &b).x);
        if x.iter().zip(&y).any(|(p, q)| !cx.close(*p, *q)) {
            return Err(format!("case {case}: base {x:?} vs {y:?}"));
        }
        if spec.n() > 0 && chain.minimization_count > 2 * spec.n() - 1 {
            return Err(format!("case {case}: {} minimizations", chain.minimization_count));
        }
    }
    Ok("60 instances".into())
}

fn base_membership(cx: &mut Ctx) -> Check {
    for case in 0..60 {
        let (spec, b) = small_spec(&mut cx.rng);
        let x = base_from_chain(&decompose(&spec, &b).map_err(s)?, &b).x;
        let table = spec.value_table().map_err(s)?;
        let (worst, gap) = base_violation(&table, &x);
        let scale = 1.0 + table.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if worst > cx.tol * scale || gap.abs() > cx.tol * scale {
            return Err(format!("case {case}: violation {worst}, total gap {gap}"));
        }
    }
    Ok("60 instances".into())
}

fn prox_certificate(cx: &mut Ctx) -> Check {
    let pair = prox(&ProxProblem {
        s: vec![2.0, 0.0],
        lambda: 1.0,
        reg: Regularizer::fused(),
    })
    .map_err(s)?;
    if pair.beta.iter().any(|b| !cx.close(*b, 1.0)) {
        return Err(format!("fused (2, 0) gave {:?}", pair.beta));
    }
    for case in 0..30 {
        let n = cx.rng.random_range(1..=8);
        let sv: Vec<f64> = (0..n).map(|_| cx.rng.random_range(-3.0..3.0)).collect();
        let lambda = cx.rng.random_range(0.05..2.0);
        let lo = cx.rng.random_range(0..n);
        let hi = cx.rng.random_range(lo..n);
        for reg in [
            Regularizer::fused(),
            Regularizer::GroupLinf {
                groups: vec![(0..n).collect(), (lo..=hi).collect()],
                weights: vec![1.0, 0.5],
            },
        ] {
            let p = ProxProblem { s: sv.clone(), lambda, reg };
            let sol = prox(&p).map_err(s)?;
            let gap = certificate_violation(&p, &sol.beta, 200, &[1e-3, 1e-4], &mut cx.rng).map_err(s)?;
            // the certificate is checked at 1e-6 absolute
            if gap > cx.tol * 1e3 {
                return Err(format!("case {case}: certificate residual {gap}"));
            }
        }
    }
    Ok("fused (2, 0) -> (1, 1); 60 random prox solves".into())
}

fn min_ratio_suite(cx: &mut Ctx) -> Check {
    for case in 0..40 {
        let n = cx.rng.random_range(1..=9);
        let (d, w, y) = instances::decomposable(&mut cx.rng, n, 3, 6);
        let b = instances::weights(&mut cx.rng, n, 4, false);
        let spec = SubmodularSpec::from_decomposable(&d, &w, &y).map_err(s)?;
        let (g, _) = spec.nondecreasing_shift(&b).map_err(s)?;
        let found = min_ratio(&g, &b).map_err(s)?;
        let table = g.value_table().map_err(s)?;
        let weight = |bits: usize| (0..n).filter(|i| bits >> i & 1 == 1).map(|i| b[i]).sum::<f64>();
        let best = (1..table.len()).map(|bits| table[bits] / weight(bits)).fold(f64::INFINITY, f64::min);
        if !cx.close(found.ratio, best) {
            return Err(format!("case {case}: ratio {} vs exhaustive {best}", found.ratio));
        }
    }
    Ok("40 instances".into())
}

fn densest_suite(cx: &mut Ctx) -> Check {
    for case in 0..30 {
        let n = cx.rng.random_range(1..=9);
        let edges = instances::density_graph(&mut cx.rng, n, 5, 0.5);
        let report = densest_levels(n, &edges).map_err(s)?;
        let mut best = vec![f64::NEG_INFINITY; n + 1];
        for bits in 0u64..1 << n {
            let theta: f64 = edges
                .iter()
                .filter(|&&(i, j, _)| bits >> i & 1 == 1 && bits >> j & 1 == 1)
                .map(|e| e.2)
                .sum();
            let k = bits.count_ones() as usize;
            best[k] = best[k].max(theta);
        }
        for level in &report.levels {
            if !cx.close(level.weight, best[level.k]) {
                return Err(format!("case {case}: size-{} level has weight {}", level.k, level.weight));
            }
        }
    }
    Ok("30 graphs".into())
}

type Suite = (&'static str, fn(&mut Ctx) -> Check);

const SUITES: &[Suite] = &[
    ("maxflow-duality", maxflow_duality),
    ("cut-lattice", cut_lattice),
    ("submodularity", submodularity),
    ("chain-oracle", chain_oracle),
    ("base-membership", base_membership),
    ("prox-certificate", prox_certificate),
    ("min-ratio", min_ratio_suite),
    ("densest-levels", densest_suite),
];

/// Runs every suite and returns the report plus whether all passed.
pub fn run(seed: u64, inject_fault: bool) -> (String, bool) {
    let mut report = String::new();
    let mut all = true;
    for (k, (name, suite)) in SUITES.iter().enumerate() {
        let mut cx = Ctx {
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64)),
            tol: if inject_fault { -1e-9 } else { 1e-9 },
        };
        let start = Instant::now();
        let outcome = suite(&mut cx);
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => {
                let _ = writeln!(report, "PASS {name:<18} {msg} ({secs:.2}s)");
            }
            Err(msg) => {
                all = false;
                let _ = writeln!(report, "FAIL {name:<18} {msg}");
            }
        }
    }
    let _ = writeln!(
        report,
        "{} suites, {}",
        SUITES.len(),
        if all { "all passed" } else { "failures present" }
    );
    (report, all)
}
