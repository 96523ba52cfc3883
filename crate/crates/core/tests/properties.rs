use pdmp_core::coupling::empirical_wasserstein;
use pdmp_core::engine::{advance_flow, rk4_flow};
use pdmp_core::models::MorrisLecarParams;
use pdmp_core::montecarlo::replicate;
use pdmp_core::{build_model, HybridState, Model, ModelSpec, PdmpModel, RandomSource};
use proptest::prelude::*;

/// Minimum over all matchings, for equal sizes.
fn brute_force_wasserstein(a: &[f64], b: &[f64], p: f64) -> f64 {
    fn permute(k: usize, idx: &mut Vec<usize>, a: &[f64], b: &[f64], p: f64, best: &mut f64) {
        if k == idx.len() {
            let cost: f64 = idx.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).abs().powf(p)).sum();
            *best = best.min(cost);
            return;
        }
        for s in k..idx.len() {
            idx.swap(k, s);
            permute(k + 1, idx, a, b, p, best);
            idx.swap(k, s);
        }
    }
    let mut best = f64::INFINITY;
    permute(0, &mut (0..b.len()).collect(), a, b, p, &mut best);
    (best / a.len() as f64).powf(1.0 / p)
}

fn repeat_each(v: &[f64], times: usize) -> Vec<f64> {
    v.iter().flat_map(|&x| std::iter::repeat_n(x, times)).collect()
}

fn sample(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 1..=max)
}

fn order() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), 1.0..4.0f64]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn wasserstein_matches_best_matching(
        (a, b) in (1usize..=6).prop_flat_map(|n| (prop::collection::vec(-10.0..10.0f64, n), prop::collection::vec(-10.0..10.0f64, n))),
        p in order(),
    ) {
        let fast = empirical_wasserstein(&a, &b, p).unwrap().value;
        let slow = brute_force_wasserstein(&a, &b, p);
        prop_assert!(close(fast, slow, 1e-10), "{fast} vs {slow}");
    }

    #[test]
    fn unequal_sizes_match_the_replicated_pairing(a in sample(12), b in sample(12), p in order()) {
        let direct = empirical_wasserstein(&a, &b, p).unwrap().value;
        let (n, m) = (a.len(), b.len());
        let mut ra = repeat_each(&a, m);
        let mut rb = repeat_each(&b, n);
        ra.sort_by(f64::total_cmp);
        rb.sort_by(f64::total_cmp);
        let paired = (ra.iter().zip(&rb).map(|(x, y)| (x - y).abs().powf(p)).sum::<f64>() / (n * m) as f64).powf(1.0 / p);
        prop_assert!(close(direct, paired, 1e-10), "{direct} vs {paired}");
    }

    #[test]
    fn wasserstein_is_a_metric(a in sample(20), b in sample(20), c in sample(20), p in order()) {
        let w = |u: &[f64], v: &[f64]| empirical_wasserstein(u, v, p).unwrap().value;
        prop_assert_eq!(w(&a, &b), w(&b, &a));
        prop_assert_eq!(w(&a, &a), 0.0);
        prop_assert!(w(&a, &c) <= w(&a, &b) + w(&b, &c) + 1e-12 * (1.0 + w(&a, &b) + w(&b, &c)));
    }

    #[test]
    fn wasserstein_of_a_shift_is_the_shift(a in sample(30), shift in -5.0..5.0f64, p in order()) {
        let moved: Vec<f64> = a.iter().map(|x| x + shift).collect();
        let w = empirical_wasserstein(&a, &moved, p).unwrap().value;
        prop_assert!(close(w, shift.abs(), 1e-12), "{w} vs {shift}");
    }

    #[test]
    fn uniforms_stay_in_the_open_interval(seed in any::<u64>(), stream in any::<u64>()) {
        let mut rng = RandomSource::new(seed, stream);
        for _ in 0..1000 {
            let u = rng.uniform();
            prop_assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn replicas_do_not_depend_on_worker_count(seed in any::<u64>(), workers in 1usize..8) {
        let job = |_: usize, rng: &mut RandomSource| (rng.next_u64(), rng.uniform().to_bits());
        prop_assert_eq!(replicate(seed, 40, Some(1), job), replicate(seed, 40, Some(workers), job));
    }

    #[test]
    fn flows_compose(case in 0usize..6, x in -2.0..2.0f64, s in 0.0..3.0f64, t in 0.0..3.0f64, mode in 0usize..2) {
        let (model, state) = flow_case(case, x, mode);
        let whole = advance_flow(&model, &state, s + t).unwrap();
        let split = advance_flow(&model, &advance_flow(&model, &state, s).unwrap(), t).unwrap();
        prop_assert_eq!(whole.mode, split.mode);
        for (a, b) in whole.x.iter().zip(&split.x) {
            prop_assert!(close(*a, *b, 1e-9), "{a} vs {b}");
        }
    }

    #[test]
    fn closed_forms_agree_with_rk4(case in 0usize..6, x in -2.0..2.0f64, t in 0.0..2.0f64, mode in 0usize..2) {
        let (model, state) = flow_case(case, x, mode);
        let exact = advance_flow(&model, &state, t).unwrap();
        let steps = 400;
        let h = t / steps as f64;
        let mut y = state.x.to_vec();
        let mut next = vec![0.0; y.len()];
        for _ in 0..steps {
            rk4_flow(|z, out| model.field(state.mode, z, out), &y, h, &mut next);
            std::mem::swap(&mut y, &mut next);
        }
        for (a, b) in exact.x.iter().zip(&y) {
            prop_assert!(close(*a, *b, 1e-8), "{a} vs {b}");
        }
    }

    #[test]
    fn spec_text_round_trips(a in 0.01..5.0f64, b in 0.01..5.0f64, c in 0.01..0.99f64) {
        let specs = [
            ModelSpec::Storage { alpha: a, beta: b },
            ModelSpec::Bandit { p: c, q: c / 2.0, g: b },
            ModelSpec::Tcp { lambda: a },
            ModelSpec::SwitchedLinear { alpha: c, r: b },
            ModelSpec::Dim1 { alpha0: a, alpha1: b, lambda0: b, lambda1: a },
            ModelSpec::PlanarRotation { lambda0: a, lambda1: b },
            ModelSpec::Telegraph { a, b: a + b },
        ];
        for spec in specs {
            let text = spec.to_text().unwrap();
            let back = ModelSpec::parse(&text).unwrap();
            prop_assert_eq!(back.to_text().unwrap(), text);
        }
    }
}

fn flow_case(case: usize, x: f64, mode: usize) -> (Model, HybridState) {
    let m = |spec| build_model(&spec).unwrap();
    match case {
        0 => (m(ModelSpec::Storage { alpha: 1.0, beta: 0.7 }), HybridState::scalar(x.abs(), 0)),
        1 => (m(ModelSpec::Tcp { lambda: 1.0 }), HybridState::scalar(x.abs(), 0)),
        2 => (m(ModelSpec::Dim1 { alpha0: 1.0, alpha1: 2.5, lambda0: 1.0, lambda1: 1.0 }), HybridState::scalar(x, mode)),
        3 => (m(ModelSpec::SwitchedLinear { alpha: 0.2, r: 3.0 }), HybridState::new(&[x, 1.0 - x], mode)),
        4 => (m(ModelSpec::PlanarRotation { lambda0: 1.0, lambda1: 2.0 }), HybridState::new(&[x, 0.5], mode)),
        _ => (
            m(ModelSpec::MorrisLecar(MorrisLecarParams::reference())),
            HybridState::scalar(10.0 * x, 12 + mode),
        ),
    }
}
