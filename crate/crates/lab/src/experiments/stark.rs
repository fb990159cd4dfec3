//! Amplitude envelope of the free Stark equation.

use serde_json::json;
use spectrans_core::eigensolutions::{default_stark_step, stark_envelope};

use super::Context;
use crate::config::{ExperimentName, StarkConfig};
use crate::error::{AtOp, LabResult};
use crate::output::{Cell, Gate, Report, Table};

pub fn run(c: &StarkConfig, ctx: &Context) -> LabResult<Report> {
    let fits = ctx.map(&c.energies, |&e| {
        let h = c.step.unwrap_or_else(|| default_stark_step(e, c.x_max));
        let coarse = stark_envelope(e, c.x_max, h).at("stark_envelope")?;
        let fine = stark_envelope(e, c.x_max, h / 2.0).at("stark_envelope")?;
        Ok((coarse, fine))
    })?;
    let mut table = Table::new(&["E", "step", "slope", "peaks", "intercept"]);
    let mut gates = Vec::new();
    for (&e, (coarse, fine)) in c.energies.iter().zip(&fits) {
        for s in [coarse, fine] {
            table.push(vec![Cell::Float(e), Cell::Float(s.step), Cell::Float(s.slope), s.peaks.into(), Cell::Float(s.fit.intercept)]);
        }
        gates.push(Gate::new(
            format!("slope E={e}"),
            (coarse.slope - c.target).abs() <= c.slope_tol,
            format!("{:.5} vs {} (tol {})", coarse.slope, c.target, c.slope_tol),
        ));
        let shift = (coarse.slope - fine.slope).abs();
        gates.push(Gate::new(format!("step halving E={e}"), shift < c.halving_tol, format!("|Δslope| = {shift:.2e} (tol {:.0e})", c.halving_tol)));
    }
    let metrics = json!({
        "x_max": c.x_max,
        "energies": c.energies.iter().zip(&fits).map(|(&e, (a, b))| json!({
            "E": e, "step": a.step, "slope": a.slope, "slope_half_step": b.slope, "peaks": a.peaks, "fit_rms": a.fit.rms,
        })).collect::<Vec<_>>(),
    });
    Ok(Report { experiment: ExperimentName::StarkEnvelope, table, metrics, gates })
}
