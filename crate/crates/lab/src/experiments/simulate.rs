use pdmp_core::engine::sample_at;
use pdmp_core::oracles::{storage_mean, tcp_moment};
use pdmp_core::{HybridState, Model};

use super::{collect, mean_se, Ctx};
use crate::report::{Cell, Row, Table};

/// Mean of the first coordinate at time `t`, when a closed form exists.
fn mean_oracle(model: &Model, x0: &[f64], t: f64) -> Option<f64> {
    match model {
        Model::Storage(m) => Some(storage_mean(x0[0], t, m.alpha, m.beta)),
        Model::Tcp(m) => tcp_moment(1, x0[0], t, m.lambda).ok(),
        _ => None,
    }
}

pub(super) fn run(ctx: &mut Ctx<'_>) {
    let Some(model) = ctx.model() else { return };
    let cfg = ctx.cfg;
    let init = HybridState::new(&cfg.x0, cfg.mode0);
    let times = &cfg.times;
    let results = ctx.replicate(0, cfg.samples, |_, rng| sample_at(&model, &init, times, rng));
    let paths = collect(ctx, "trajectories", results);
    if paths.is_empty() {
        return;
    }
    let dim = cfg.x0.len();
    let mut table = Table::new(&["t", "coordinate", "mean", "std_err", "oracle"]);
    for (j, &t) in times.iter().enumerate() {
        for c in 0..dim {
            let values: Vec<f64> = paths.iter().map(|p| p[j].x[c]).collect();
            let (mean, se) = mean_se(&values);
            let oracle = if c == 0 { mean_oracle(&model, &cfg.x0, t) } else { None };
            let name = format!("mean x{c} at t={t}");
            ctx.push(match oracle {
                Some(o) => Row::within_se(name, mean, se, o, cfg.se_tolerance),
                None => Row::info(name, mean, Some(se)),
            });
            table.push(vec![t.into(), c.into(), mean.into(), se.into(), Cell::from(oracle)]);
        }
    }
    ctx.table = Some(table);
}
