//! Dispatch from a validated config to the simulations and oracles.

mod analytic;
mod couple;
mod invariant;
mod moments;
mod properties;
mod simulate;

use pdmp_core::montecarlo::replicate;
use pdmp_core::{build_model, Model, RandomSource};

use crate::config::{ExperimentConfig, Kind};
use crate::report::{ExperimentReport, Row, Table};

/// Execution settings that must not change the results.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
}

pub(crate) struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub workers: Option<usize>,
    pub rows: Vec<Row>,
    pub table: Option<Table>,
}

impl Ctx<'_> {
    /// Seed of an independent block of replicas. Blocks use distinct seeds so
    /// that replica `k` of every block still runs on stream `k`.
    pub fn block_seed(&self, block: u64) -> u64 {
        if block == 0 {
            return self.cfg.seed;
        }
        // SplitMix64 finalizer of (seed, block).
        let mut z = self
            .cfg
            .seed
            .wrapping_add(block.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn replicate<T, F>(&self, block: u64, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, &mut RandomSource) -> T + Sync + Send,
    {
        replicate(self.block_seed(block), count, self.workers, job)
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn model(&mut self) -> Option<Model> {
        let spec = self.cfg.model.as_ref()?;
        match build_model(spec) {
            Ok(m) => Some(m),
            Err(e) => {
                self.push(Row::failure("model", e.to_string()));
                None
            }
        }
    }
}

/// Runs the experiment described by `cfg`. Numerical failures are reported as
/// failed rows; the call itself does not fail.
pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> ExperimentReport {
    let mut ctx = Ctx {
        cfg,
        workers: opts.workers,
        rows: Vec::new(),
        table: None,
    };
    match cfg.kind {
        Kind::Simulate => simulate::run(&mut ctx),
        Kind::Couple => couple::run(&mut ctx),
        Kind::InvariantCheck => invariant::run(&mut ctx),
        Kind::Moments => moments::run(&mut ctx),
        Kind::Lyapunov => analytic::lyapunov(&mut ctx),
        Kind::Stability => analytic::stability(&mut ctx),
        Kind::Gcurve => analytic::gcurve(&mut ctx),
        Kind::Eigen => analytic::eigen(&mut ctx),
        Kind::Properties => properties::run(&mut ctx),
    }
    ExperimentReport {
        kind: cfg.kind.as_str().to_string(),
        config: cfg.entries.clone(),
        rows: ctx.rows,
        table: ctx.table,
    }
}

/// Splits per-replica results into successes and a failure row naming the
/// first error and the number of failed replicas.
pub(crate) fn collect<T, E: std::fmt::Display>(
    ctx: &mut Ctx<'_>,
    name: &str,
    results: Vec<Result<T, E>>,
) -> Vec<T> {
    let total = results.len();
    let mut ok = Vec::with_capacity(total);
    let mut first_err = None;
    let mut failed = 0;
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                failed += 1;
                first_err.get_or_insert_with(|| e.to_string());
            }
        }
    }
    if let Some(e) = first_err {
        ctx.push(Row::failure(
            format!("{name}: failed replicas"),
            format!("{failed} of {total} failed; first error: {e}"),
        ));
    }
    ok
}

/// `(mean, standard error)` of a sample.
pub(crate) fn mean_se(values: &[f64]) -> (f64, f64) {
    let est = pdmp_core::stats::MeanEstimate::from_samples(values);
    (est.mean, est.std_err)
}
