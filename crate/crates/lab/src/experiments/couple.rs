use pdmp_core::coupling::{
    couple_shared_noise, couple_switched, couple_tv_storage, couple_tv_tcp, CoupledRun,
};
use pdmp_core::stats::MeanEstimate;
use pdmp_core::{HybridState, Model};

use super::{collect, mean_se, Ctx};
use crate::config::CouplingKind;
use crate::report::{Cell, Row, Table};

/// Relative slack for identities that hold exactly in real arithmetic.
const ROUNDING: f64 = 1e-12;

pub(super) fn run(ctx: &mut Ctx<'_>) {
    let Some(model) = ctx.model() else { return };
    match ctx.cfg.coupling {
        Some(CouplingKind::SharedNoise) => shared_noise(ctx, &model),
        Some(CouplingKind::Tv) => tv(ctx, &model),
        Some(CouplingKind::Switched) => switched(ctx, &model),
        None => ctx.push(Row::failure("coupling", "no coupling selected")),
    }
}

fn coalescence_consistency(ctx: &mut Ctx<'_>, label: &str, runs: &[CoupledRun]) {
    let bad = runs
        .iter()
        .filter(|r| r.coalesced && r.first != r.second)
        .count();
    ctx.push(Row::check(
        format!("{label}: coalesced runs end equal"),
        bad == 0,
        format!("{bad} of {} runs violate", runs.len()),
    ));
}

fn shared_noise(ctx: &mut Ctx<'_>, model: &Model) {
    let cfg = ctx.cfg;
    let times = &cfg.times;
    let horizon = *times.last().expect("times is nonempty");
    let mut table = Table::new(&["x", "y", "t", "p", "mean_distance_pow", "std_err", "oracle"]);
    for (block, (&x, &y)) in cfg.x0.iter().zip(&cfg.y0).enumerate() {
        let label = format!("x={x}, y={y}");
        let results = ctx.replicate(block as u64, cfg.samples, |_, rng| {
            couple_shared_noise(model, x, y, horizon, times, rng)
        });
        let runs = collect(ctx, &label, results);
        if runs.is_empty() {
            continue;
        }
        let gap = (x - y).abs();
        match model {
            Model::Storage(m) => {
                // The distance is deterministic: |x - y| e^{-βt}.
                let worst = runs
                    .iter()
                    .flat_map(|r| r.distances.iter())
                    .map(|&(t, d)| (d - gap * (-m.beta * t).exp()).abs())
                    .fold(0.0, f64::max);
                ctx.push(
                    Row::within_abs(
                        format!("{label}: max |d - |x-y|e^(-beta t)|"),
                        worst,
                        0.0,
                        ROUNDING * gap.max(1.0),
                    )
                    .with_note("pathwise over every run and time"),
                );
            }
            Model::Tcp(_) => tcp_pathwise(ctx, &label, gap, &runs),
            _ => {}
        }
        for &p in &cfg.orders {
            let pf = p as f64;
            for (j, &t) in times.iter().enumerate() {
                let values: Vec<f64> = runs.iter().map(|r| r.distances[j].1.powf(pf)).collect();
                let (mean, se) = mean_se(&values);
                let oracle = match model {
                    Model::Tcp(m) => Some(gap.powf(pf) * (-m.lambda * (1.0 - 0.5f64.powi(p as i32)) * t).exp()),
                    // Storage distances are deterministic and checked pathwise above.
                    _ => None,
                };
                let name = format!("{label}: E|X-Y|^{p} at t={t}");
                ctx.push(match oracle {
                    Some(o) => Row::within_se(name, mean, se, o, cfg.se_tolerance),
                    None => Row::info(name, mean, Some(se)),
                });
                table.push(vec![x.into(), y.into(), t.into(), p.into(), mean.into(), se.into(), Cell::from(oracle)]);
            }
        }
    }
    ctx.table = Some(table);
}

/// `|X_t - Y_t| = |x - y| 2^{-N_t}`: checked against the jump count at the
/// horizon, and at earlier times as membership in `|x - y| 2^{-ℕ}` with
/// distances nonincreasing.
fn tcp_pathwise(ctx: &mut Ctx<'_>, label: &str, gap: f64, runs: &[CoupledRun]) {
    let tol = ROUNDING * gap.max(1.0);
    let mut terminal_err: f64 = 0.0;
    let mut lattice_err: f64 = 0.0;
    let mut increasing = 0usize;
    for r in runs {
        let expected = gap * 0.5f64.powi(r.jumps[0] as i32);
        terminal_err = terminal_err.max((r.distances.last().unwrap().1 - expected).abs());
        for w in r.distances.windows(2) {
            // Both copies add the same drift, which can move their difference by an ulp.
            if w[1].1 > w[0].1 + tol {
                increasing += 1;
            }
        }
        if gap > 0.0 {
            for &(_, d) in &r.distances {
                let k = (gap / d).log2().round().max(0.0);
                lattice_err = lattice_err.max((d - gap * 0.5f64.powf(k)).abs());
            }
        }
    }
    ctx.push(Row::within_abs(format!("{label}: max |d_T - |x-y|2^(-N_T)|"), terminal_err, 0.0, tol));
    ctx.push(Row::within_abs(format!("{label}: max distance off |x-y|2^(-k)"), lattice_err, 0.0, tol));
    ctx.push(Row::check(
        format!("{label}: distance nonincreasing in t"),
        increasing == 0,
        format!("{increasing} increases"),
    ));
}

/// Upper bound on `P(not coalesced)` for the TV couplings.
fn tv_bound(model: &Model, gap: f64, t: f64) -> Option<f64> {
    match model {
        Model::Storage(m) => {
            let (a, b) = (m.alpha, m.beta);
            Some(if (a - b).abs() <= 1e-12 * a.max(b) {
                (1.0 + gap * a * t) * (-a * t).exp()
            } else {
                (-a * t).exp() + gap * a * ((-b * t).exp() - (-a * t).exp()) / (a - b)
            })
        }
        Model::Tcp(m) => {
            let l = m.lambda;
            Some(l * (-l * t / 2.0).exp() * gap + (-l * t).exp())
        }
        _ => None,
    }
}

fn tv(ctx: &mut Ctx<'_>, model: &Model) {
    let cfg = ctx.cfg;
    let k = cfg.se_tolerance;
    let mut table = Table::new(&["x", "y", "t", "not_coalesced", "std_err", "bound"]);
    let mut block = 0u64;
    for (&x, &y) in cfg.x0.iter().zip(&cfg.y0) {
        let mut previous: Option<MeanEstimate> = None;
        let mut monotone = true;
        for &t in &cfg.times {
            let label = format!("x={x}, y={y}, t={t}");
            let results = ctx.replicate(block, cfg.samples, |_, rng| match model {
                Model::Storage(m) => couple_tv_storage(x, y, t, m.alpha, m.beta, rng),
                Model::Tcp(m) => couple_tv_tcp(x, y, t, m.lambda, rng),
                _ => unreachable!("validated by the config"),
            });
            block += 1;
            let runs = collect(ctx, &label, results);
            if runs.is_empty() {
                continue;
            }
            let missed = runs.iter().filter(|r| !r.coalesced).count();
            let est = MeanEstimate::proportion(missed, runs.len());
            let bound = tv_bound(model, (x - y).abs(), t).expect("tv model");
            ctx.push(Row::below_bound(
                format!("{label}: P(not coalesced)"),
                est.mean,
                est.std_err,
                bound,
                k,
            ));
            if x == y {
                let jumped: Vec<&CoupledRun> = runs.iter().filter(|r| r.jumps[0] >= 1).collect();
                let missed = jumped.iter().filter(|r| !r.coalesced).count();
                ctx.push(Row::within_abs(
                    format!("{label}: P(not coalesced | N_t >= 1)"),
                    missed as f64 / jumped.len().max(1) as f64,
                    0.0,
                    0.0,
                ));
            }
            coalescence_consistency(ctx, &label, &runs);
            if matches!(model, Model::Tcp(_)) {
                if let Some(prev) = previous {
                    // Nonincreasing within 2 SE of the difference.
                    let slack = 2.0 * (prev.std_err.powi(2) + est.std_err.powi(2)).sqrt();
                    monotone &= est.mean <= prev.mean + slack;
                }
                previous = Some(est);
            }
            table.push(vec![x.into(), y.into(), t.into(), est.mean.into(), est.std_err.into(), bound.into()]);
        }
        if matches!(model, Model::Tcp(_)) && cfg.times.len() > 1 {
            ctx.push(Row::check(
                format!("x={x}, y={y}: P(not coalesced) nonincreasing in t"),
                monotone,
                "within 2 se between consecutive times",
            ));
        }
    }
    ctx.table = Some(table);
}

fn switched(ctx: &mut Ctx<'_>, model: &Model) {
    let cfg = ctx.cfg;
    let x = HybridState::new(&cfg.x0, cfg.mode0);
    let y = HybridState::new(&cfg.y0, cfg.mode1);
    let times = &cfg.times;
    let horizon = *times.last().expect("times is nonempty");
    let results = ctx.replicate(0, cfg.samples, |_, rng| couple_switched(model, &x, &y, horizon, times, rng));
    let runs = collect(ctx, "switched", results);
    if runs.is_empty() {
        return;
    }
    let gap = cfg
        .x0
        .iter()
        .zip(&cfg.y0)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let same_mode = cfg.mode0 == cfg.mode1;
    match model {
        Model::PlanarRotation(_) if same_mode => {
            let worst = runs
                .iter()
                .flat_map(|r| r.distances.iter())
                .map(|&(t, d)| (d - gap * (-t).exp()).abs())
                .fold(0.0, f64::max);
            ctx.push(Row::within_abs("max |d - |x-y|e^(-t)|", worst, 0.0, 1e-9 * gap.max(1.0)));
        }
        Model::Dim1(m) if same_mode => {
            let rate = m.alpha[0].min(m.alpha[1]);
            let excess = runs
                .iter()
                .flat_map(|r| r.distances.iter())
                .map(|&(t, d)| d - gap * (-rate * t).exp())
                .fold(f64::NEG_INFINITY, f64::max);
            ctx.push(
                Row::check(
                    "d <= |x-y|e^(-min(alpha) t) pathwise",
                    excess <= 1e-12 * gap.max(1.0),
                    format!("largest excess {excess:e}"),
                ),
            );
        }
        _ => {}
    }
    coalescence_consistency(ctx, "switched", &runs);
    let mut table = Table::new(&["t", "mean_distance", "std_err", "coalesced_fraction"]);
    for (j, &t) in times.iter().enumerate() {
        let values: Vec<f64> = runs.iter().map(|r| r.distances[j].1).collect();
        let (mean, se) = mean_se(&values);
        let met = runs
            .iter()
            .filter(|r| r.coalescence_time.is_some_and(|c| c <= t))
            .count() as f64
            / runs.len() as f64;
        ctx.push(Row::info(format!("mean distance at t={t}"), mean, Some(se)));
        table.push(vec![t.into(), mean.into(), se.into(), met.into()]);
    }
    ctx.table = Some(table);
}
