use pdmp_core::engine::sample_at;
use pdmp_core::oracles::{tcp_invariant_moment, tcp_moment};
use pdmp_core::{HybridState, Model};

use super::{collect, mean_se, Ctx};
use crate::report::{Cell, Row, Table};

/// Monte Carlo moments `E_x[X_t^n]` of the TCP window against the closed form,
/// and optionally the stationary moments at a late time.
pub(super) fn run(ctx: &mut Ctx<'_>) {
    let Some(model) = ctx.model() else { return };
    let Model::Tcp(tcp) = &model else {
        unreachable!("validated by the config")
    };
    let lambda = tcp.lambda;
    let cfg = ctx.cfg;
    let k = cfg.se_tolerance;
    let mut table = Table::new(&["x", "t", "n", "mean", "std_err", "oracle"]);
    let mut block = 0u64;
    for &x in &cfg.x0 {
        let init = HybridState::scalar(x, 0);
        let results = ctx.replicate(block, cfg.samples, |_, rng| sample_at(&model, &init, &cfg.times, rng));
        block += 1;
        let paths = collect(ctx, &format!("x={x}"), results);
        if paths.is_empty() {
            continue;
        }
        for &n in &cfg.orders {
            for (j, &t) in cfg.times.iter().enumerate() {
                let values: Vec<f64> = paths.iter().map(|p| p[j].x[0].powi(n as i32)).collect();
                let (mean, se) = mean_se(&values);
                let name = format!("E[X_t^{n}] x={x} t={t}");
                match tcp_moment(n, x, t, lambda) {
                    Ok(o) => {
                        ctx.push(Row::within_se(name, mean, se, o, k));
                        table.push(vec![x.into(), t.into(), n.into(), mean.into(), se.into(), o.into()]);
                    }
                    Err(e) => ctx.push(Row::failure(name, e.to_string())),
                }
            }
        }
    }
    if let (Some(t), Some(&x)) = (cfg.stationary_time, cfg.x0.first()) {
        let init = HybridState::scalar(x, 0);
        let results = ctx.replicate(block, cfg.samples, |_, rng| sample_at(&model, &init, &[t], rng));
        let paths = collect(ctx, "stationary", results);
        if paths.is_empty() {
            return;
        }
        for &n in &cfg.orders {
            let values: Vec<f64> = paths.iter().map(|p| p[0].x[0].powi(n as i32)).collect();
            let (mean, se) = mean_se(&values);
            let name = format!("stationary E[X^{n}] at t={t}");
            match tcp_invariant_moment(n, lambda) {
                Ok(o) => {
                    ctx.push(Row::within_se(name, mean, se, o, k));
                    table.push(vec![x.into(), t.into(), n.into(), mean.into(), se.into(), Cell::from(o)]);
                }
                Err(e) => ctx.push(Row::failure(name, e.to_string())),
            }
        }
    }
    ctx.table = Some(table);
}
