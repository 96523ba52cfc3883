use pdmp_core::engine::{run as run_engine, sample_at};
use pdmp_core::models::{morris_lecar_rates, velocity, voltage_segment, MorrisLecarModel};
use pdmp_core::oracles::{dim1_mode_law, dim1_mode_weights};
use pdmp_core::stats::{ks_one_sample, MeanEstimate};
use pdmp_core::{HybridState, Model, PdmpModel, RandomSource};
use statrs::distribution::{Beta, ContinuousCDF, Exp, Gamma};

use super::{collect, Ctx};
use crate::report::{Cell, Row, Table};

pub(super) fn run(ctx: &mut Ctx<'_>) {
    let Some(model) = ctx.model() else { return };
    if let Model::MorrisLecar(m) = &model {
        return morris_lecar(ctx, m);
    }
    let cfg = ctx.cfg;
    let x0 = if cfg.x0.is_empty() {
        match &model {
            Model::Dim1(_) => vec![0.5],
            _ => vec![0.0],
        }
    } else {
        cfg.x0.clone()
    };
    let init = HybridState::new(&x0, cfg.mode0);
    let horizon = [cfg.horizon];
    let results = ctx.replicate(0, cfg.samples, |_, rng| {
        sample_at(&model, &init, &horizon, rng).map(|mut v| v.pop().expect("one time"))
    });
    let states = collect(ctx, "trajectories", results);
    if states.is_empty() {
        return;
    }
    let mut table = Table::new(&["law", "samples", "ks_statistic", "p_value"]);
    let mut ks = |ctx: &mut Ctx<'_>, law: &str, sample: &[f64], cdf: &dyn Fn(f64) -> f64| {
        let out = ks_one_sample(sample, cdf);
        ctx.push(
            Row::less_than(format!("KS statistic, {law}"), out.statistic, cfg.ks_max)
                .with_note(format!("n = {}, p = {:.4}", sample.len(), out.p_value)),
        );
        table.push(vec![Cell::from(law), sample.len().into(), out.statistic.into(), out.p_value.into()]);
    };
    match &model {
        Model::Storage(m) => {
            let shape = m.alpha / m.beta;
            let law = Gamma::new(shape, 1.0).expect("positive shape");
            let xs: Vec<f64> = states.iter().map(|s| s.x[0]).collect();
            ks(ctx, &format!("X vs Gamma({shape}, 1)"), &xs, &|x| law.cdf(x.max(0.0)));
        }
        Model::Dim1(m) => {
            let weights = dim1_mode_weights(m.lambda);
            for mode in 0..2 {
                let (a, b) = match dim1_mode_law(mode, m.alpha, m.lambda) {
                    Ok(v) => v,
                    Err(e) => return ctx.push(Row::failure("dim1 law", e.to_string())),
                };
                let law = Beta::new(a, b).expect("positive parameters");
                let xs: Vec<f64> = states.iter().filter(|s| s.mode == mode).map(|s| s.x[0]).collect();
                ks(ctx, &format!("X | mode {mode} vs Beta({a}, {b})"), &xs, &|x| law.cdf(x.clamp(0.0, 1.0)));
                let est = MeanEstimate::proportion(xs.len(), states.len());
                ctx.push(Row::within_se(
                    format!("P(mode {mode})"),
                    est.mean,
                    est.std_err,
                    weights[mode],
                    cfg.se_tolerance,
                ));
            }
        }
        Model::Telegraph(m) => {
            let law = Exp::new(m.b - m.a).expect("b > a");
            let xs: Vec<f64> = states.iter().map(|s| s.x[0].abs()).collect();
            ks(ctx, &format!("|X| vs Exp({})", m.b - m.a), &xs, &|x| law.cdf(x));
            let up = states.iter().filter(|s| velocity(s.mode) > 0.0).count();
            let est = MeanEstimate::proportion(up, states.len());
            ctx.push(Row::within_se("P(V = +1)", est.mean, est.std_err, 0.5, cfg.se_tolerance));
        }
        _ => unreachable!("validated by the config"),
    }
    ctx.table = Some(table);
}

/// Trajectories started in the invariant voltage segment must stay there, and
/// the channel rates must be positive with `α + β = 2c cosh(z/2)`.
fn morris_lecar(ctx: &mut Ctx<'_>, model: &MorrisLecarModel) {
    let cfg = ctx.cfg;
    let params = &model.params;
    let segment = match voltage_segment(params) {
        Ok(s) => s,
        Err(e) => return ctx.push(Row::failure("invariant segment", e.to_string())),
    };
    let modes = model.mode_count();
    let start = |rng: &mut RandomSource| -> HybridState {
        if cfg.x0.is_empty() {
            let v = segment.lo + (segment.hi - segment.lo) * rng.uniform();
            let mode = ((rng.uniform() * modes as f64) as usize).min(modes - 1);
            HybridState::scalar(v, mode)
        } else {
            HybridState::new(&cfg.x0, cfg.mode0)
        }
    };
    let results = ctx.replicate(0, cfg.samples, |_, rng| {
        let init = start(rng);
        let mut inside = segment.contains(init.x[0]);
        let summary = run_engine(model, &init, cfg.horizon, rng, |e| {
            inside &= segment.contains(e.pre.x[0]) && segment.contains(e.post.x[0]);
            Ok(())
        })?;
        inside &= segment.contains(summary.terminal.x[0]);
        Ok::<_, pdmp_core::engine::EngineError>((inside, summary.jumps))
    });
    let outcomes = collect(ctx, "trajectories", results);
    let escaped = outcomes.iter().filter(|(ok, _)| !ok).count();
    let jumps: usize = outcomes.iter().map(|(_, j)| j).sum();
    ctx.push(Row::check(
        format!("trajectories stay in [{}, {}]", segment.lo, segment.hi),
        escaped == 0 && outcomes.len() == cfg.samples,
        format!("{escaped} of {} left; {jumps} jumps checked", outcomes.len()),
    ));

    let n = cfg.grid_points;
    let mut table = Table::new(&["v", "channel", "alpha", "beta"]);
    let mut min_rate = f64::INFINITY;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let v = segment.lo + (segment.hi - segment.lo) * i as f64 / (n - 1) as f64;
        for channel in [1, 2] {
            let (a, b) = morris_lecar_rates(v, channel, params);
            let k = channel - 1;
            let z = (v - params.half_activation[k]) / params.slope[k];
            let expected = 2.0 * params.rate_scale[k] * (0.5 * z).cosh();
            min_rate = min_rate.min(a).min(b);
            worst = worst.max(((a + b) - expected).abs() / expected);
            table.push(vec![v.into(), channel.into(), a.into(), b.into()]);
        }
    }
    ctx.push(Row::check(
        "channel rates positive on the voltage grid",
        min_rate > 0.0,
        format!("smallest rate {min_rate:e} over {n} voltages"),
    ));
    ctx.push(
        Row::within_abs("max relative |alpha + beta - 2c cosh(z/2)|", worst, 0.0, 1e-12)
            .with_note(format!("{n} voltages, both channels")),
    );
    ctx.table = Some(table);
}
