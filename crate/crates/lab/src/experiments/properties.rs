//! Engine and coupling properties: reproducibility, exactness of the jump-time
//! samplers, marginal correctness of the couplings and the metric axioms of
//! the empirical Wasserstein distance.

use pdmp_core::coupling::{couple_shared_noise, couple_switched, couple_tv_storage, couple_tv_tcp, empirical_wasserstein};
use pdmp_core::engine::{advance_flow, sample_at, sample_next_jump, simulate, Trajectory};
use pdmp_core::models::MorrisLecarParams;
use pdmp_core::montecarlo::replicate;
use pdmp_core::quadrature::Quadrature;
use pdmp_core::stats::{ks_one_sample, ks_two_sample};
use pdmp_core::{build_model, HybridState, Model, ModelSpec, PdmpModel, RandomSource};

use super::{collect, Ctx};
use crate::report::Row;

/// KS tests pass when the p-value exceeds this level.
const KS_LEVEL: f64 = 0.001;

fn model(spec: ModelSpec) -> Model {
    build_model(&spec).expect("fixed parameters are valid")
}

fn bits(traj: &Trajectory) -> Vec<u64> {
    let mut out = Vec::new();
    for e in &traj.events {
        out.push(e.time.to_bits());
        for s in [&e.pre, &e.post] {
            out.extend(s.x.iter().map(|v| v.to_bits()));
            out.push(s.mode as u64);
        }
    }
    out.extend(traj.terminal.x.iter().map(|v| v.to_bits()));
    out.push(traj.terminal.mode as u64);
    out
}

pub(super) fn run(ctx: &mut Ctx<'_>) {
    reproducibility(ctx);
    thinning(ctx);
    coupling_marginals(ctx);
    wasserstein_metric(ctx);
}

fn reproducibility(ctx: &mut Ctx<'_>) {
    let horizon = if ctx.cfg.entries.contains_key("horizon") { ctx.cfg.horizon } else { 20.0 };
    let cases = [
        ("bandit", model(ModelSpec::Bandit { p: 0.6, q: 0.3, g: 0.5 }), HybridState::scalar(0.5, 0)),
        ("telegraph", model(ModelSpec::Telegraph { a: 1.0, b: 2.0 }), HybridState::scalar(0.0, 0)),
        ("switched-linear", model(ModelSpec::SwitchedLinear { alpha: 0.1, r: 2.0 }), HybridState::new(&[0.0, 1.0], 0)),
        (
            "morris-lecar",
            model(ModelSpec::MorrisLecar(MorrisLecarParams::reference())),
            HybridState::scalar(30.0, 12),
        ),
    ];
    for (name, m, init) in &cases {
        let run = |stream| simulate(m, init, horizon, &mut RandomSource::new(ctx.cfg.seed, stream));
        let same = match (run(7), run(7)) {
            (Ok(a), Ok(b)) => bits(&a) == bits(&b) && !a.events.is_empty(),
            _ => false,
        };
        ctx.push(Row::check(
            format!("{name}: same seed and stream give a bit-identical trajectory"),
            same,
            format!("horizon {horizon}"),
        ));
        let terminal = |workers| {
            replicate(ctx.cfg.seed, 64, Some(workers), |_, rng| {
                simulate(m, init, horizon, rng).map(|t| bits(&t))
            })
        };
        let one = terminal(1);
        let many = terminal(4);
        let ok = one.iter().all(Result::is_ok) && one == many;
        ctx.push(Row::check(
            format!("{name}: 1 and 4 workers give identical replicas"),
            ok,
            "64 replicas",
        ));
    }
}

/// First jump times sampled by thinning against `1 - exp(-Λ(t))`.
fn thinning(ctx: &mut Ctx<'_>) {
    let n = ctx.cfg.samples;
    // Bandit: the rate q·y/g along y(s) = y* + (y0 - y*)e^{-ps} integrates in
    // closed form.
    let (p, q, g, y0) = (0.6, 0.3, 0.5, 0.5);
    let bandit = model(ModelSpec::Bandit { p, q, g });
    let init = HybridState::scalar(y0, 0);
    let times = first_jump_times(ctx, 1, &bandit, &init, n);
    let eq = (1.0 - p) / p;
    let cdf = |t: f64| {
        let t = t.max(0.0);
        let lam = q / g * (eq * t + (y0 - eq) * (1.0 - (-p * t).exp()) / p);
        1.0 - (-lam).exp()
    };
    let out = ks_one_sample(&times, cdf);
    ctx.push(
        Row::check("bandit: thinned first jump time KS", out.p_value > KS_LEVEL, format!("D = {:.5}, p = {:.4}", out.statistic, out.p_value)),
    );

    // Morris–Lecar: integrated rate along the voltage flow by quadrature.
    let ml = model(ModelSpec::MorrisLecar(MorrisLecarParams::reference()));
    let init = HybridState::scalar(30.0, 12);
    let mut times = first_jump_times(ctx, 2, &ml, &init, n);
    times.sort_by(f64::total_cmp);
    let rate = |s: f64| ml.rate(&advance_flow(&ml, &init, s).expect("bounded flow"));
    let quad = Quadrature::with_rel_tol(1e-10);
    let mut cumulative = Vec::with_capacity(times.len());
    let (mut last, mut lam) = (0.0, 0.0);
    for &t in &times {
        match quad.integrate(rate, last, t) {
            Ok(est) => lam += est.value,
            Err(e) => return ctx.push(Row::failure("morris-lecar integrated rate", e.to_string())),
        }
        last = t;
        cumulative.push(1.0 - (-lam).exp());
    }
    let lookup = |t: f64| {
        let i = times.partition_point(|&s| s < t);
        cumulative.get(i).copied().unwrap_or(1.0)
    };
    let out = ks_one_sample(&times, lookup);
    ctx.push(Row::check(
        "morris-lecar: thinned first jump time KS",
        out.p_value > KS_LEVEL,
        format!("D = {:.5}, p = {:.4}", out.statistic, out.p_value),
    ));
}

fn first_jump_times(ctx: &mut Ctx<'_>, block: u64, m: &Model, init: &HybridState, n: usize) -> Vec<f64> {
    let results = ctx.replicate(block, n, |_, rng| {
        sample_next_jump(m, init, rng, 1e6).map(|j| j.map_or(f64::INFINITY, |j| j.dt))
    });
    collect(ctx, "first jump", results)
}

/// Rounds to a 1e-12 grid. Laws with an atom (no jump before `t`) reach it by
/// flows split at different points in the two runs, which differ by an ulp and
/// would otherwise count as distinct values in the KS statistic.
fn snap(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

/// Each component of a coupled pair against an uncoupled simulation.
fn coupling_marginals(ctx: &mut Ctx<'_>) {
    let n = ctx.cfg.samples;
    let storage = model(ModelSpec::Storage { alpha: 1.0, beta: 2.0 });
    let tcp = model(ModelSpec::Tcp { lambda: 1.0 });
    let dim1 = model(ModelSpec::Dim1 { alpha0: 1.0, alpha1: 2.0, lambda0: 1.5, lambda1: 0.5 });
    let t = 2.0;
    let (x, y) = (2.0, 0.5);

    let mut block = 10u64;
    let mut compare = |ctx: &mut Ctx<'_>, name: &str, runs: Vec<[f64; 2]>, m: &Model, starts: [HybridState; 2]| {
        for (side, start) in starts.iter().enumerate() {
            let coupled: Vec<f64> = runs.iter().map(|r| snap(r[side])).collect();
            let results = ctx.replicate(block, n, |_, rng| sample_at(m, start, &[t], rng).map(|v| snap(v[0].x[0])));
            block += 1;
            let alone = collect(ctx, name, results);
            let out = ks_two_sample(&coupled, &alone);
            ctx.push(Row::check(
                format!("{name}: component {side} matches an uncoupled run"),
                out.p_value > KS_LEVEL,
                format!("D = {:.5}, p = {:.4}", out.statistic, out.p_value),
            ));
        }
    };
    let pair = |r: pdmp_core::coupling::CoupledRun| [r.first.x[0], r.second.x[0]];
    let scalar = [HybridState::scalar(x, 0), HybridState::scalar(y, 0)];

    let res = ctx.replicate(20, n, |_, rng| couple_tv_storage(x, y, t, 1.0, 2.0, rng).map(pair));
    let runs = collect(ctx, "tv storage", res);
    compare(ctx, "tv storage", runs, &storage, scalar.clone());

    let res = ctx.replicate(21, n, |_, rng| couple_tv_tcp(x, y, t, 1.0, rng).map(pair));
    let runs = collect(ctx, "tv tcp", res);
    compare(ctx, "tv tcp", runs, &tcp, scalar.clone());

    let res = ctx.replicate(22, n, |_, rng| couple_shared_noise(&tcp, x, y, t, &[t], rng).map(pair));
    let runs = collect(ctx, "shared-noise tcp", res);
    compare(ctx, "shared-noise tcp", runs, &tcp, scalar.clone());

    let starts = [HybridState::scalar(0.2, 0), HybridState::scalar(0.9, 1)];
    let res = ctx.replicate(23, n, |_, rng| couple_switched(&dim1, &starts[0], &starts[1], t, &[t], rng).map(pair));
    let runs = collect(ctx, "switched dim1", res);
    compare(ctx, "switched dim1", runs, &dim1, starts.clone());
}

fn wasserstein_metric(ctx: &mut Ctx<'_>) {
    let mut rng = RandomSource::new(ctx.cfg.seed, 1 << 40);
    let draw = |rng: &mut RandomSource| -> Vec<f64> {
        let len = 1 + (rng.uniform() * 40.0) as usize;
        let shift = 4.0 * rng.uniform() - 2.0;
        (0..len).map(|_| shift + rng.exp1() * if rng.uniform() < 0.5 { -1.0 } else { 1.0 }).collect()
    };
    let (mut symmetric, mut identity, mut triangle, mut total) = (true, true, true, 0);
    for _ in 0..300 {
        let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        for p in [1.0, 2.0, 3.0] {
            let w = |u: &[f64], v: &[f64]| empirical_wasserstein(u, v, p).map(|d| d.value).unwrap_or(f64::NAN);
            let (ab, ba, bc, ac) = (w(&a, &b), w(&b, &a), w(&b, &c), w(&a, &c));
            symmetric &= ab == ba;
            identity &= w(&a, &a) == 0.0;
            triangle &= ac <= ab + bc + 1e-12 * (1.0 + ab + bc);
            total += 1;
        }
    }
    ctx.push(Row::check("wasserstein: symmetric", symmetric, format!("{total} random pairs")));
    ctx.push(Row::check("wasserstein: zero on identical samples", identity, format!("{total} random samples")));
    ctx.push(Row::check("wasserstein: triangle inequality", triangle, format!("{total} random triples")));
}
