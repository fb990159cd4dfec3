//! Ball-norm growth of free half-line plane waves.

use serde_json::json;
use spectrans_core::eigensolutions::{analytic_solution, growth_exponent, AnalyticModel, GrowthEstimate};
use spectrans_core::LatticeDomain;

use super::{fmt_range, geometric_span, Context};
use crate::config::{ExperimentName, GrowthConfig};
use crate::error::{AtOp, LabResult};
use crate::output::{Cell, Gate, Report, Table};

pub(crate) fn push_growth_rows(table: &mut Table, lead: &[Cell], g: &GrowthEstimate) {
    for (j, (&r, &l)) in g.radii.iter().zip(&g.log_norm_sq).enumerate() {
        let slope = if j == 0 { f64::NAN } else { g.scaling.window_slopes[j - 1] };
        let mut row = lead.to_vec();
        row.extend([Cell::Float(r), Cell::Float(l.exp()), Cell::Float(slope)]);
        table.push(row);
    }
}

pub fn run(c: &GrowthConfig, ctx: &Context) -> LabResult<Report> {
    let radii: Vec<f64> = geometric_span(c.r_min, c.r_max, c.radii).iter().map(|r| r.floor()).collect();
    let domain = LatticeDomain::build_half_line(c.r_max.ceil() as usize + 2).at("build_half_line")?;
    let fits = ctx.map(&c.energies, |&e| {
        let u = analytic_solution(AnalyticModel::Free1D, e, &domain).at("analytic_solution")?;
        growth_exponent(&u, &domain, &radii).at("growth_exponent")
    })?;

    let mut table = Table::new(&["E", "R", "norm_sq", "window_slope"]);
    for (&e, g) in c.energies.iter().zip(&fits) {
        push_growth_rows(&mut table, &[Cell::Float(e)], g);
    }
    let exps: Vec<f64> = fits.iter().map(|g| g.exponent()).collect();
    let inside = exps.iter().filter(|x| **x >= c.exponent_range.0 && **x <= c.exponent_range.1).count();
    let lo = exps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gates = vec![Gate::new(
        "free-growth",
        inside == exps.len(),
        format!("{inside}/{} energies inside {}; exponents span [{lo:.4}, {hi:.4}]", exps.len(), fmt_range(c.exponent_range)),
    )];
    let metrics = json!({
        "energies": c.energies,
        "exponent": exps,
        "lower": fits.iter().map(|g| g.lower()).collect::<Vec<_>>(),
        "upper": fits.iter().map(|g| g.upper()).collect::<Vec<_>>(),
        "radii": radii,
    });
    Ok(Report { experiment: ExperimentName::Growth, table, metrics, gates })
}
