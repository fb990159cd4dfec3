//! Borel-transform scaling: one-site atom, free chain and the random
//! decaying model at two truncation sizes.

use serde_json::{json, Value};
use spectrans_core::fit::median;
use spectrans_core::spectral::{borel_sweep, default_eps_grid, finite_spectral_measure, spacing_guard, BorelSweep};
use spectrans_core::{LatticeDomain, PotentialSpec, SparseHermitianOperator, C64};

use super::{fmt_range, origin_delta, Context};
use crate::config::{BorelConfig, ExperimentName};
use crate::error::{AtOp, LabResult};
use crate::output::{Cell, Gate, Report, Table};

struct Case {
    name: &'static str,
    length: usize,
    seed: Option<u64>,
    sweep: BorelSweep,
    /// Largest relative gap to the eigendecomposition sum.
    sum_rule: f64,
}

fn sweep_half_line(c: &BorelConfig, length: usize, spec: &PotentialSpec) -> LabResult<(BorelSweep, f64)> {
    let domain = LatticeDomain::build_half_line(length).at("build_half_line")?;
    let op = SparseHermitianOperator::assemble(&domain, spec).at("assemble")?;
    let (_, phi) = origin_delta(&domain);
    let measure = finite_spectral_measure(&op, &phi).at("finite_spectral_measure")?;
    let guard = spacing_guard(&op, Some(&measure), c.energy, c.guard_factor);
    let eps = default_eps_grid(c.eps_max, domain.truncation_radius(), c.c2);
    let sweep = borel_sweep(&op, &phi, c.energy, &eps, guard).at("borel_sweep")?;
    let sum_rule = sweep
        .eps
        .iter()
        .zip(&sweep.im_f)
        .map(|(&e, &f)| {
            let s = measure.borel_im(c.energy, e);
            (f - s).abs() / s.abs()
        })
        .fold(0.0, f64::max);
    Ok((sweep, sum_rule))
}

fn sweep_json(case: &Case) -> Value {
    let (lo, hi) = case.sweep.window_eps();
    json!({
        "case": case.name,
        "L": case.length,
        "seed": case.seed,
        "sigma": case.sweep.sigma,
        "sigma_lower": case.sweep.sigma_lower,
        "sigma_upper": case.sweep.sigma_upper,
        "guard": case.sweep.guard,
        "window_eps": [lo, hi],
        "sum_rule_max_relative": case.sum_rule,
    })
}

pub fn run(c: &BorelConfig, ctx: &Context) -> LabResult<Report> {
    // one site, v = atom, probed at its own energy
    let atom_domain = LatticeDomain::build_half_line(1).at("build_half_line")?;
    let atom_op = SparseHermitianOperator::with_diagonal(&atom_domain, vec![c.atom]).at("assemble")?;
    let atom_eps: Vec<f64> = (0..12).map(|j| 2f64.powi(-j)).collect();
    let atom = borel_sweep(&atom_op, &[C64::new(1.0, 0.0)], c.atom, &atom_eps, atom_eps[atom_eps.len() - 1]).at("borel_sweep")?;
    let q1_err = atom.q_values(1.0).iter().map(|q| (q - 1.0).abs()).fold(0.0, f64::max);

    let (free_sweep, free_sum) = sweep_half_line(c, c.free_length, &PotentialSpec::Free)?;
    let free = Case { name: "free", length: c.free_length, seed: None, sweep: free_sweep, sum_rule: free_sum };

    let seeds = c.kls_seeds.resolve(ctx.seed_override);
    let jobs: Vec<(usize, u64)> = [c.kls_lengths.0, c.kls_lengths.1].iter().flat_map(|&l| seeds.iter().map(move |&s| (l, s))).collect();
    let kls = ctx.map(&jobs, |&(l, s)| {
        let (sweep, sum_rule) = sweep_half_line(c, l, &PotentialSpec::RandomDecaying { coupling: c.kls_coupling, seed: s })?;
        Ok(Case { name: "kls", length: l, seed: Some(s), sweep, sum_rule })
    })?;
    let (small, large) = kls.split_at(seeds.len());
    let med_small = median(&small.iter().map(|k| k.sweep.sigma).collect::<Vec<_>>());
    let med_large = median(&large.iter().map(|k| k.sweep.sigma).collect::<Vec<_>>());

    let mut table = Table::new(&["case", "L", "seed", "E", "eps", "im_F", "in_window"]);
    let mut push = |name: &str, length: usize, seed: Option<u64>, s: &BorelSweep| {
        for (j, (&e, &f)) in s.eps.iter().zip(&s.im_f).enumerate() {
            let inside = (s.window.0..s.window.1).contains(&j) as usize;
            let seed = seed.map_or(Cell::Text(String::new()), Cell::from);
            table.push(vec![name.into(), length.into(), seed, Cell::Float(s.energy), Cell::Float(e), Cell::Float(f), inside.into()]);
        }
    };
    push("atom", 1, None, &atom);
    push(free.name, free.length, None, &free.sweep);
    for k in &kls {
        push(k.name, k.length, k.seed, &k.sweep);
    }

    let all_sweeps = std::iter::once(&atom).chain(std::iter::once(&free.sweep)).chain(kls.iter().map(|k| &k.sweep));
    let (mut herglotz, mut mass) = (true, 0.0f64);
    for s in all_sweeps {
        herglotz &= s.im_f.iter().all(|&f| f > 0.0);
        mass = s.eps.iter().zip(&s.im_f).map(|(e, f)| e * f).fold(mass, f64::max);
    }
    let kls_sum = kls.iter().map(|k| k.sum_rule).fold(0.0, f64::max);
    let in_range = |x: f64, r: (f64, f64)| x >= r.0 && x <= r.1;
    let gates = vec![
        Gate::new(
            "atomic",
            (atom.sigma - 1.0).abs() <= 1e-10 && q1_err <= 1e-10,
            format!("σ = {:.12}, max |εIm F − 1| = {q1_err:.2e}", atom.sigma),
        ),
        Gate::new(
            "free-sigma",
            in_range(free.sweep.sigma, c.free_sigma_range),
            format!("σ = {:.4} on ε ∈ [{:.3e}, {:.3e}], inside {}", free.sweep.sigma, free.sweep.window_eps().0, free.sweep.window_eps().1, fmt_range(c.free_sigma_range)),
        ),
        Gate::new("sum-rule", free.sum_rule <= c.sum_rule_tol, format!("max relative gap {:.2e} (tol {:.0e})", free.sum_rule, c.sum_rule_tol)),
        Gate::new("herglotz-mass", herglotz && mass <= 1.0 + 1e-9, format!("Im F > 0: {herglotz}; max ε·Im F = {mass:.12}")),
        Gate::new(
            "kls-sigma",
            in_range(med_small, c.kls_sigma_range),
            format!("median σ over {} seeds at L={}: {med_small:.4}, inside {}", seeds.len(), c.kls_lengths.0, fmt_range(c.kls_sigma_range)),
        ),
        Gate::new(
            "kls-doubling",
            (med_large - med_small).abs() < c.doubling_tol,
            format!("median at L={}: {med_large:.4}, shift {:.4} (tol {})", c.kls_lengths.1, (med_large - med_small).abs(), c.doubling_tol),
        ),
    ];
    let metrics = json!({
        "atom": { "sigma": atom.sigma, "q1_max_error": q1_err },
        "free": sweep_json(&free),
        "kls": kls.iter().map(sweep_json).collect::<Vec<_>>(),
        "kls_median_sigma": [med_small, med_large],
        "kls_sum_rule_max_relative": kls_sum,
    });
    Ok(Report { experiment: ExperimentName::Borel, table, metrics, gates })
}
