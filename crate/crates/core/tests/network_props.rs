use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subflow_core::graph::{Capacity, FlowNetwork, SINK, SOURCE};
use subflow_core::maxflow::{self, CutKind};
use subflow_core::{instances, GroundSubset};

fn all_sides(net: &FlowNetwork) -> impl Iterator<Item = Vec<bool>> + '_ {
    let inner = net.node_count() - 2;
    (0u64..1 << inner).map(move |bits| {
        let mut side = vec![false; net.node_count()];
        side[SOURCE] = true;
        for v in 0..inner {
            side[2 + v] = bits >> v & 1 == 1;
        }
        side
    })
}

fn network_strategy() -> impl Strategy<Value = FlowNetwork> {
    (0u64..u64::MAX, 0usize..6, 0usize..4, any::<bool>()).prop_map(|(seed, n, n_aux, real)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if real {
            instances::generalized_cut_real(&mut rng, n, n_aux, 50.0, 0.4)
        } else {
            instances::generalized_cut(&mut rng, n, n_aux, 20, 0.4)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 100,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn dimacs_round_trip(net in network_strategy()) {
        let text = net.to_dimacs();
        let parsed = FlowNetwork::parse_dimacs(&text).unwrap();
        prop_assert_eq!(&parsed, &net);
        prop_assert_eq!(parsed.to_dimacs(), text);
    }

    #[test]
    fn cut_capacity_matches_outgoing_sums(net in network_strategy()) {
        // sum over source-side nodes of their outgoing capacity to the sink side
        for side in all_sides(&net) {
            let on = |v: usize| v == SOURCE || (v != SINK && side[v]);
            let mut total = Capacity::ZERO;
            for v in (0..net.node_count()).filter(|&v| on(v)) {
                for e in net.edges().iter().filter(|e| e.tail == v && !on(e.head)) {
                    total = total + e.cap;
                }
            }
            prop_assert_eq!(total, net.cut_capacity(&side));
        }
    }

    #[test]
    fn terminal_shifts(net in network_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = net.n_ground();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64).collect();
        let to_s = net.add_source_adjacent(&w).unwrap();
        let to_t = net.add_sink_adjacent(&w).unwrap();
        for side in all_sides(&net) {
            let inside: f64 = (0..n).filter(|&i| side[2 + i]).map(|i| w[i]).sum();
            let outside: f64 = w.iter().sum::<f64>() - inside;
            let base = net.cut_capacity(&side).as_f64();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + b.abs());
            prop_assert!(close(to_s.cut_capacity(&side).as_f64(), base + outside));
            prop_assert!(close(to_t.cut_capacity(&side).as_f64(), base + inside));
        }
    }

    #[test]
    fn contraction_keeps_respecting_cuts(net in network_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = net.n_ground();
        let mut up = Vec::new();
        let mut down = Vec::new();
        for i in 0..n {
            match rng.random_range(0..3) {
                0 => up.push(i),
                1 => down.push(i),
                _ => {}
            }
        }
        let (up, down) = (GroundSubset::from(up), GroundSubset::from(down));
        let contracted = net.contract(&up, &down).unwrap();
        for side in all_sides(&net) {
            let respects = up.iter().all(|i| side[2 + i]) && down.iter().all(|i| !side[2 + i]);
            let value = contracted.cut_capacity(&side);
            if respects {
                prop_assert_eq!(value, net.cut_capacity(&side));
            } else {
                prop_assert!(value.is_infinite());
            }
        }
    }
}

#[test]
fn unique_min_cut_has_equal_sides() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    for _ in 0..300 {
        let n = rng.random_range(1..=6);
        let n_aux = rng.random_range(0..=3);
        let net = instances::generalized_cut_real(&mut rng, n, n_aux, 10.0, 0.4);
        let values: Vec<f64> = all_sides(&net).map(|s| net.cut_capacity(&s).as_f64()).collect();
        let best = values.iter().copied().fold(f64::INFINITY, f64::min);
        if values.iter().filter(|&&v| (v - best).abs() <= 1e-9).count() != 1 {
            continue;
        }
        let solved = maxflow::solve(&net).unwrap();
        assert_eq!(solved.side(CutKind::Maximal), solved.side(CutKind::Minimal));
        checked += 1;
    }
    assert!(checked > 100, "{checked}");
}

#[test]
fn extraction_is_idempotent_and_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let n = rng.random_range(0..=8);
        let n_aux = rng.random_range(0..=3);
        let net = instances::generalized_cut(&mut rng, n, n_aux, 20, 0.35);
        let first = maxflow::solve(&net).unwrap();
        let second = maxflow::solve(&net).unwrap();
        assert_eq!(first.flow.value.fract(), 0.0);
        assert_eq!(first.flow.value, second.flow.value);
        for kind in [CutKind::Maximal, CutKind::Minimal] {
            assert_eq!(first.side(kind), second.side(kind));
            let cut = first.min_cut(&net, kind);
            assert_eq!(cut.value, first.flow.value);
        }
    }
}
