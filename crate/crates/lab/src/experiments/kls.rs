//! Transfer-matrix power laws for the random decaying potential.

use serde_json::json;
use spectrans_core::eigensolutions::{kls_dimension, kls_growth_exponent, power_law_realization, summarize_power_law, PowerLawOptions};
use spectrans_core::fit::mean_and_stderr;
use spectrans_core::PotentialSpec;

use super::Context;
use crate::config::{ExperimentName, ExponentEstimator, KlsExponentConfig};
use crate::error::{AtOp, LabResult};
use crate::output::{Cell, Gate, Report, Table};

pub fn run(c: &KlsExponentConfig, ctx: &Context) -> LabResult<Report> {
    let seeds = c.seeds.resolve(ctx.seed_override);
    let opts = PowerLawOptions {
        checkpoint_first: c.checkpoint_first,
        checkpoint_ratio: c.checkpoint_ratio,
        tail_power: c.tail_power,
        phase_grid: c.phase_grid,
        ..PowerLawOptions::default()
    };
    let jobs: Vec<(f64, u64)> = c.energies.iter().flat_map(|&e| seeds.iter().map(move |&s| (e, s))).collect();
    let mut reals = ctx
        .map(&jobs, |&(e, s)| {
            power_law_realization(e, &PotentialSpec::RandomDecaying { coupling: c.coupling, seed: s }, c.n_max, &opts).at("power_law_exponent")
        })?
        .into_iter();

    let mut table = Table::new(&["seed", "E", "n", "log_norm"]);
    let mut gates = Vec::new();
    let mut per_energy = Vec::new();
    for &e in &c.energies {
        let ens = summarize_power_law(e, reals.by_ref().take(seeds.len()).collect());
        for r in &ens.realizations {
            for &(n, l) in &r.log_norms {
                table.push(vec![Cell::from(r.seed), Cell::Float(e), Cell::from(n), Cell::Float(l)]);
            }
        }
        let theory = kls_growth_exponent(c.coupling, e);
        let (mean, stderr) = match c.estimator {
            ExponentEstimator::TailSlope => (ens.slope_mean, ens.slope_stderr),
            ExponentEstimator::Ratio => (ens.ratio_mean, ens.ratio_stderr),
        };
        let alpha_theory = kls_dimension(c.coupling, e);
        let alpha_est = 1.0 - 2.0 * mean;
        let flagged = ens.realizations.iter().filter(|r| r.flagged).count();
        let (phase_mean, _) = mean_and_stderr(&ens.realizations.iter().map(|r| r.min_phase).collect::<Vec<_>>());
        gates.push(Gate::new(
            format!("exponent E={e}"),
            (mean - theory).abs() <= c.exponent_tol,
            format!("mean {mean:.4} ± {stderr:.4} vs {theory:.4} (tol {})", c.exponent_tol),
        ));
        gates.push(Gate::new(
            format!("dimension E={e}"),
            (alpha_est - alpha_theory).abs() <= c.dimension_tol,
            format!("1 − 2·{mean:.4} = {alpha_est:.4} vs {alpha_theory:.4} (tol {})", c.dimension_tol),
        ));
        per_energy.push(json!({
            "E": e,
            "theory": theory,
            "estimator_mean": mean,
            "estimator_stderr": stderr,
            "ratio_mean": ens.ratio_mean,
            "ratio_stderr": ens.ratio_stderr,
            "slope_mean": ens.slope_mean,
            "slope_stderr": ens.slope_stderr,
            "decay_mean": ens.decay_mean,
            "decay_stderr": ens.decay_stderr,
            "alpha_estimate": alpha_est,
            "alpha_theory": alpha_theory,
            "flagged": flagged,
            "mean_min_phase": phase_mean,
            "seeds": ens.realizations.iter().map(|r| r.seed).collect::<Vec<_>>(),
            "growth_ratio": ens.realizations.iter().map(|r| r.growth_ratio).collect::<Vec<_>>(),
            "growth_slope": ens.realizations.iter().map(|r| r.growth_slope).collect::<Vec<_>>(),
            "decay_slope": ens.realizations.iter().map(|r| r.decay_slope).collect::<Vec<_>>(),
            "min_phase": ens.realizations.iter().map(|r| r.min_phase).collect::<Vec<_>>(),
        }));
    }
    let metrics = json!({ "coupling": c.coupling, "n_max": c.n_max, "estimator": c.estimator, "energies": per_energy });
    Ok(Report { experiment: ExperimentName::KlsExponent, table, metrics, gates })
}
