//! Spiral corridor: the free operator read along the corridor is the free
//! Jacobi matrix, while cube norms of the transported plane wave grow
//! like the area.

use serde_json::json;
use spectrans_core::eigensolutions::{analytic_solution, growth_exponent, AnalyticModel};
use spectrans_core::{LatticeDomain, PotentialSpec, SparseHermitianOperator};

use super::growth::push_growth_rows;
use super::{fmt_range, geometric_span, Context};
use crate::config::{ExperimentName, SpiralCompareConfig};
use crate::error::{AtOp, LabResult};
use crate::output::{Cell, Gate, Report, Table};

struct Identity {
    turns: usize,
    sites: usize,
    exact: bool,
}

fn identity(turns: usize) -> LabResult<Identity> {
    let domain = LatticeDomain::build_spiral(turns).at("build_spiral")?;
    let op = SparseHermitianOperator::assemble(&domain, &PotentialSpec::Free).at("assemble")?;
    let order = domain.unroll_spiral().at("unroll_spiral")?;
    let exact = match op.unrolled_jacobi(&order) {
        Some((diag, off)) => {
            off.len() + 1 == domain.len() && diag.iter().all(|&v| v == 0.0) && off.iter().all(|&v| v == 1.0) && domain.edge_count() == off.len()
        }
        None => false,
    };
    Ok(Identity { turns, sites: domain.len(), exact })
}

pub fn run(c: &SpiralCompareConfig, ctx: &Context) -> LabResult<Report> {
    let ids = ctx.map(&c.identity_turns, |&k| identity(k))?;

    let domain = LatticeDomain::build_spiral(c.growth_turns).at("build_spiral")?;
    let r_max = (domain.truncation_radius() - 1) as f64;
    let radii: Vec<f64> = geometric_span(c.r_min, r_max, c.radii).iter().map(|r| r.floor()).collect();
    let u = analytic_solution(AnalyticModel::Spiral, c.energy, &domain).at("analytic_solution")?;
    let g = growth_exponent(&u, &domain, &radii).at("growth_exponent")?;

    let mut table = Table::new(&["turns", "R", "norm_sq", "window_slope"]);
    push_growth_rows(&mut table, &[Cell::from(c.growth_turns)], &g);

    let failed: Vec<usize> = ids.iter().filter(|i| !i.exact).map(|i| i.turns).collect();
    let in_range = g.exponent() >= c.exponent_range.0 && g.exponent() <= c.exponent_range.1;
    let gates = vec![
        Gate::new(
            "spiral-jacobi-identity",
            failed.is_empty(),
            format!("unrolled free operator is the free Jacobi matrix for turns {:?}; failures {failed:?}", c.identity_turns),
        ),
        Gate::new(
            "spiral-growth",
            in_range,
            format!("exponent {:.4} (brackets [{:.4}, {:.4}]) inside {}, R ≤ {r_max}", g.exponent(), g.lower(), g.upper(), fmt_range(c.exponent_range)),
        ),
    ];
    let metrics = json!({
        "identity": ids.iter().map(|i| json!({"turns": i.turns, "sites": i.sites, "exact": i.exact})).collect::<Vec<_>>(),
        "growth_turns": c.growth_turns,
        "growth_sites": domain.len(),
        "exponent": g.exponent(),
        "lower": g.lower(),
        "upper": g.upper(),
        "radii": radii,
    });
    Ok(Report { experiment: ExperimentName::SpiralCompare, table, metrics, gates })
}
