//! Time-averaged transport moments, ball survival and exponent gates.

use nalgebra::DMatrix;
use serde_json::{json, Value};
use spectrans_core::dynamics::{
    ball_survival, evolve, power_lower_bound, time_averaged_moments, transport_exponent, RadiusSchedule, RtSchedule, TransportExponent,
    TransportRecord,
};
use spectrans_core::eigensolutions::kls_dimension;
use spectrans_core::lattice::max_dist;
use spectrans_core::{LatticeDomain, SparseHermitianOperator, C64};

use super::{domain_label, geometric_span, origin_delta, Context};
use crate::config::{DenseOracleConfig, ExperimentName, PotentialConfig, ScheduleConfig, TransportCase, TransportConfig};
use crate::error::{AtOp, LabResult};
use crate::output::{Cell, Gate, Report, Table};

fn schedule(s: ScheduleConfig) -> LabResult<RadiusSchedule> {
    Ok(match s {
        ScheduleConfig::Constant { radius } => RadiusSchedule::Constant(radius),
        ScheduleConfig::Power { scale, power } => RadiusSchedule::Power { scale, power },
        ScheduleConfig::Rt { alpha, gamma, psi1_norm, c1, c2 } => {
            RadiusSchedule::Rt(RtSchedule::new(alpha, gamma, psi1_norm, c1, c2).at("rt_schedule")?)
        }
    })
}

struct SeedRun {
    seed: u64,
    record: TransportRecord,
    beta2: Option<TransportExponent>,
    spectral_width: f64,
    /// `(C, violations, tested)` of the lower-envelope test.
    envelope: Option<(f64, Vec<f64>, usize)>,
}

fn run_seed(case: &TransportCase, seed: u64, domain: &LatticeDomain, envelope_power: Option<f64>) -> LabResult<SeedRun> {
    let op = SparseHermitianOperator::assemble(domain, &case.potential.spec(seed)).at("assemble")?;
    let (_, psi) = origin_delta(domain);
    let t_grid = geometric_span(case.t_first, case.t_last, case.t_count);
    let record = match case.schedule {
        Some(s) => ball_survival(&op, &psi, schedule(s)?, &t_grid, &case.orders, case.dt).at("ball_survival")?,
        None => time_averaged_moments(&op, &psi, &t_grid, &case.orders, case.dt).at("time_averaged_moments")?,
    };
    let beta2 = if case.orders.contains(&2.0) { Some(transport_exponent(&record, 2.0).at("transport_exponent")?) } else { None };
    let envelope = match (envelope_power, &case.envelope) {
        (Some(p), Some(e)) => Some(power_lower_bound(&record, 2.0, p, e.fit_range, e.test_range).at("power_lower_bound")?),
        _ => None,
    };
    let (lo, hi) = op.bounds();
    Ok(SeedRun { seed, record, beta2, spectral_width: hi - lo, envelope })
}

/// Sup-norm gap to dense propagation and relative gap of `⟨⟨X²⟩⟩_T`.
fn dense_oracle(case: &TransportCase, o: &DenseOracleConfig, seed: u64) -> LabResult<(f64, f64)> {
    let domain = o.domain.build()?;
    let op = SparseHermitianOperator::assemble(&domain, &case.potential.spec(seed)).at("assemble")?;
    let n = op.dim();
    let (start, psi0) = origin_delta(&domain);
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (i, j, v) in op.triplets() {
        h[(i, j)] = v;
    }
    let eig = h.symmetric_eigen();
    let coeffs: Vec<f64> = (0..n).map(|k| eig.eigenvectors[(start, k)]).collect();
    let dense_at = |t: f64| -> Vec<C64> {
        let phases: Vec<C64> = (0..n).map(|k| C64::from_polar(coeffs[k], -eig.eigenvalues[k] * t)).collect();
        (0..n).map(|i| (0..n).map(|k| phases[k] * eig.eigenvectors[(i, k)]).sum()).collect()
    };
    let mut sup = 0.0f64;
    for &t in &o.times {
        let fast = evolve(&op, &psi0, t).at("evolve")?;
        let dense = dense_at(t);
        sup = fast.iter().zip(&dense).map(|(a, b)| (a - b).norm()).fold(sup, f64::max);
    }
    let times: Vec<f64> = o.times.iter().copied().filter(|&t| t > 0.0).collect();
    if times.is_empty() {
        return Ok((sup, 0.0));
    }
    let record = time_averaged_moments(&op, &psi0, &times, &[2.0], case.dt).at("time_averaged_moments")?;
    let center = domain.site(start);
    let r2: Vec<f64> = (0..n).map(|i| (max_dist(&domain.site(i), &center) as f64).powi(2)).collect();
    let x2 = |t: f64| dense_at(t).iter().zip(&r2).map(|(p, r)| p.norm_sqr() * r).sum::<f64>();
    let mut worst = 0.0f64;
    let (mut acc, mut prev, mut step) = (0.0, x2(0.0), 0usize);
    for (&t, &m) in record.t_grid.iter().zip(&record.moments[0]) {
        while (step as f64) * case.dt < t - 1e-9 {
            step += 1;
            let cur = x2(step as f64 * case.dt);
            acc += 0.5 * case.dt * (prev + cur);
            prev = cur;
        }
        worst = worst.max((m - acc / t).abs() / (acc / t));
    }
    Ok((sup, worst))
}

fn case_report(c: &TransportConfig, case: &TransportCase, ctx: &Context, table: &mut Table, gates: &mut Vec<Gate>) -> LabResult<Value> {
    let domain = case.domain.build()?;
    let seeds = if case.potential.is_random() { case.seeds.resolve(ctx.seed_override) } else { case.seeds.resolve(None) };
    let envelope_alpha = match (&case.potential, &case.envelope) {
        (PotentialConfig::RandomDecaying { coupling }, Some(e)) => Some(kls_dimension(*coupling, e.energy_window)),
        _ => None,
    };
    let envelope_power = envelope_alpha.zip(case.envelope.as_ref()).map(|(a, e)| 2.0 * a / e.gamma);
    let runs = ctx.map(&seeds, |&s| run_seed(case, s, &domain, envelope_power))?;

    for r in &runs {
        let rec = &r.record;
        for (j, &m) in rec.orders.iter().enumerate() {
            for (i, &t) in rec.t_grid.iter().enumerate() {
                let opt = |v: &Option<Vec<f64>>| v.as_ref().map_or(f64::NAN, |v| v[i]);
                table.push(vec![
                    case.name.clone().into(),
                    r.seed.into(),
                    Cell::Float(t),
                    Cell::Float(m),
                    Cell::Float(rec.moments[j][i]),
                    Cell::Float(opt(&rec.survival)),
                    Cell::Float(opt(&rec.escaped)),
                    Cell::Float(opt(&rec.radii)),
                ]);
            }
        }
    }

    let name = &case.name;
    let mut partition = 0.0f64;
    let mut survival_ok = true;
    let mut chain_ok = true;
    let mut drift_ok = true;
    let mut max_norm_drift = 0.0f64;
    let mut max_energy_drift = 0.0f64;
    for r in &runs {
        let rec = &r.record;
        max_norm_drift = max_norm_drift.max(rec.norm_drift);
        max_energy_drift = max_energy_drift.max(rec.energy_drift / r.spectral_width);
        drift_ok &= rec.norm_drift <= c.drift_tol && rec.energy_drift <= c.drift_tol * r.spectral_width;
        if let (Some(s), Some(e), Some(radii)) = (&rec.survival, &rec.escaped, &rec.radii) {
            for i in 0..s.len() {
                partition = partition.max((s[i] + e[i] - 1.0).abs());
                survival_ok &= s[i] >= 0.0 && s[i] <= 1.0 + 1e-8;
                for (j, &m) in rec.orders.iter().enumerate() {
                    chain_ok &= rec.moments[j][i] >= radii[i].powf(m) * e[i] * (1.0 - 1e-12);
                }
            }
        }
    }
    gates.push(Gate::new(
        format!("{name}: unitarity"),
        drift_ok,
        format!("max norm drift {max_norm_drift:.2e}, max energy drift / width {max_energy_drift:.2e} (tol {:.0e})", c.drift_tol),
    ));
    if case.schedule.is_some() {
        gates.push(Gate::new(
            format!("{name}: mass-partition"),
            partition <= c.partition_tol && survival_ok,
            format!("max |inside + outside − 1| = {partition:.2e}; survival within [0, 1+1e-8]: {survival_ok}"),
        ));
        gates.push(Gate::new(format!("{name}: chain-inequality"), chain_ok, "⟨⟨|X|^m⟩⟩_T ≥ R_T^m · outside mass at every T and m"));
    }

    let betas: Vec<f64> = runs.iter().filter_map(|r| r.beta2.as_ref().map(|b| b.beta)).collect();
    if let Some(tol) = case.free_law_tol {
        let rec = &runs[0].record;
        let j = rec.orders.iter().position(|&m| m == 2.0).expect("validated");
        let worst = rec.t_grid.iter().zip(&rec.moments[j]).map(|(t, m)| (m / (2.0 / 3.0 * t * t) - 1.0).abs()).fold(0.0, f64::max);
        gates.push(Gate::new(
            format!("{name}: (2/3)T² law"),
            worst <= tol,
            format!("max relative gap {worst:.2e} on T ∈ [{}, {}] (tol {tol})", case.t_first, case.t_last),
        ));
    }
    if let Some(tol) = case.ballistic_tol {
        let worst = betas.iter().map(|b| (b - 1.0).abs()).fold(0.0, f64::max);
        gates.push(Gate::new(format!("{name}: β₂ = 1"), worst <= tol, format!("β₂ = {betas:.4?} (tol {tol})")));
    }
    if let Some((min, fraction)) = case.min_beta {
        let need = (fraction * betas.len() as f64).ceil() as usize;
        let got = betas.iter().filter(|&&b| b >= min).count();
        gates.push(Gate::new(format!("{name}: β₂ ≥ {min}"), got >= need, format!("{got}/{} seeds (need {need}); β₂ = {betas:.3?}", betas.len())));
    }
    if let Some(max) = case.max_beta {
        let worst = betas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        gates.push(Gate::new(format!("{name}: β₂ ≤ {max}"), worst <= max, format!("β₂ = {betas:.4?}")));
    }
    if let (Some(power), Some(e)) = (envelope_power, &case.envelope) {
        let bad: Vec<(u64, &Vec<f64>)> =
            runs.iter().filter_map(|r| r.envelope.as_ref().filter(|v| !v.1.is_empty()).map(|v| (r.seed, &v.1))).collect();
        let tested: usize = runs.iter().filter_map(|r| r.envelope.as_ref().map(|v| v.2)).sum();
        gates.push(Gate::new(
            format!("{name}: lower envelope"),
            bad.is_empty(),
            format!(
                "⟨⟨X²⟩⟩_T ≥ C·T^{power:.4} (C fitted on T ∈ [{:.1}, {:.1}]) at {tested} times in [{:.1}, {:.1}]; violations {bad:?}",
                e.fit_range.0, e.fit_range.1, e.test_range.0, e.test_range.1
            ),
        ));
    }
    let mut oracle = Value::Null;
    if let Some(o) = &case.dense_oracle {
        let (sup, avg) = dense_oracle(case, o, seeds[0])?;
        gates.push(Gate::new(
            format!("{name}: dense oracle"),
            sup <= o.tol && avg <= o.tol,
            format!("{}: sup |ψ − ψ_dense| = {sup:.2e}, relative ⟨⟨X²⟩⟩ gap {avg:.2e} for t ≤ {:?} (tol {:.0e})", domain_label(&o.domain), o.times.iter().copied().fold(0.0, f64::max), o.tol),
        ));
        oracle = json!({ "sup_error": sup, "moment_relative_error": avg });
    }

    Ok(json!({
        "name": name,
        "domain": domain_label(&case.domain),
        "seeds": runs.iter().map(|r| json!({
            "seed": r.seed,
            "beta2": r.beta2.as_ref().map(|b| b.beta),
            "beta2_lower": r.beta2.as_ref().map(|b| b.lower),
            "beta2_upper": r.beta2.as_ref().map(|b| b.upper),
            "norm_drift": r.record.norm_drift,
            "energy_drift": r.record.energy_drift,
            "propagation_error_bound": r.record.propagation_error,
            "chebyshev_order": r.record.chebyshev_order,
            "envelope_constant": r.envelope.as_ref().map(|e| e.0),
        })).collect::<Vec<_>>(),
        "envelope_alpha": envelope_alpha,
        "envelope_power": envelope_power,
        "max_partition_error": partition,
        "dense_oracle": oracle,
    }))
}

pub fn run(c: &TransportConfig, ctx: &Context) -> LabResult<Report> {
    let mut table = Table::new(&["case", "seed", "T", "m", "moment", "survival", "escaped", "R_T"]);
    let mut gates = Vec::new();
    let mut cases = Vec::new();
    for case in &c.case {
        cases.push(case_report(c, case, ctx, &mut table, &mut gates)?);
    }
    Ok(Report { experiment: ExperimentName::Transport, table, metrics: json!({ "cases": cases }), gates })
}
