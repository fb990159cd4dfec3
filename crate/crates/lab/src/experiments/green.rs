//! Identity suite: discrete Green formula, cumulative Wronskian bound and
//! the resolvent norm identity on random data.

use serde_json::json;
use spectrans_core::lattice::max_dist;
use spectrans_core::operator::{cumulative_wronskian, green_formula_residual};
use spectrans_core::potentials::PotentialSpec;
use spectrans_core::rng::CounterRng;
use spectrans_core::spectral::lemma21_residual;
use spectrans_core::{SparseHermitianOperator, C64};

use super::{domain_label, Context};
use crate::config::{DomainConfig, ExperimentName, GreenCheckConfig};
use crate::error::{AtOp, LabResult};
use crate::output::{Cell, Gate, Report, Table};

const STREAM_GREEN: u64 = 0x6EE1;
const STREAM_PAIR: u64 = 0x6EE2;
const STREAM_RESOLVENT: u64 = 0x6EE3;

/// Sequential draws from one counter stream.
struct Draws {
    rng: CounterRng,
    next: u64,
}

impl Draws {
    fn new(seed: u64, stream: u64, trial: usize) -> Self {
        Self { rng: CounterRng::new(seed ^ (trial as u64).wrapping_mul(0x9E37_79B9), stream), next: 0 }
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.next += 1;
        self.rng.uniform(self.next, lo, hi)
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.uniform(0.0, 1.0) * n as f64) as usize).min(n - 1)
    }

    fn vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform(-1.0, 1.0)).collect()
    }
}

struct Row {
    check: &'static str,
    trial: usize,
    domain: String,
    value: f64,
    scale: f64,
}

pub fn run(c: &GreenCheckConfig, ctx: &Context) -> LabResult<Report> {
    let domains = c.domains.iter().map(DomainConfig::build).collect::<LabResult<Vec<_>>>()?;
    let trials: Vec<usize> = (0..c.triples).collect();
    let green = ctx.map(&trials, |&t| {
        let k = t % domains.len();
        let domain = &domains[k];
        let mut d = Draws::new(c.seed, STREAM_GREEN, t);
        let op = SparseHermitianOperator::assemble(domain, &PotentialSpec::Anderson { disorder: 4.0, seed: c.seed + t as u64 }).at("assemble")?;
        let n = domain.len();
        let (f, g) = (d.vector(n), d.vector(n));
        let set: Vec<usize> = if t % 2 == 0 {
            let center = domain.site(d.below(n));
            let r = d.below(domain.truncation_radius() + 1) as u32;
            (0..n).filter(|&i| max_dist(&domain.site(i), &center) <= r).collect()
        } else {
            let p = d.uniform(0.1, 0.9);
            (0..n).filter(|_| d.uniform(0.0, 1.0) < p).collect()
        };
        let check = green_formula_residual(&op, &f, &g, &set).at("green_formula_residual")?;
        Ok(Row { check: "green", trial: t, domain: domain_label(&c.domains[k]), value: check.residual, scale: check.scale })
    })?;

    let wdomain = c.wronskian_domain.build()?;
    let radius = wdomain.truncation_radius() - 1;
    let pairs: Vec<usize> = (0..c.wronskian_pairs).collect();
    let wronskian = ctx.map(&pairs, |&t| {
        let mut d = Draws::new(c.seed, STREAM_PAIR, t);
        let (f, g) = (d.vector(wdomain.len()), d.vector(wdomain.len()));
        let (sum, bound) = cumulative_wronskian(&f, &g, radius, &[0; 3], &wdomain).at("cumulative_wronskian")?;
        Ok(Row { check: "wronskian", trial: t, domain: domain_label(&c.wronskian_domain), value: sum, scale: bound })
    })?;

    let triples: Vec<usize> = (0..c.resolvent_triples).collect();
    let resolvent = ctx.map(&triples, |&t| {
        let mut d = Draws::new(c.seed, STREAM_RESOLVENT, t);
        let cap = c.resolvent_max_sites;
        let dc = match t % 3 {
            0 => DomainConfig::HalfLine { length: 1 + d.below(cap) },
            1 => {
                let hw = (((cap as f64).sqrt() - 1.0) / 2.0).floor().max(1.0) as usize;
                DomainConfig::Box { dim: 2, half_width: 1 + d.below(hw) }
            }
            _ => {
                let mut k = 1;
                while 8 * (k + 1) * (k + 1) + 4 * (k + 1) < cap {
                    k += 1;
                }
                DomainConfig::Spiral { turns: 1 + d.below(k) }
            }
        };
        let domain = dc.build()?;
        let w = d.uniform(0.0, 6.0);
        let op = SparseHermitianOperator::assemble(&domain, &PotentialSpec::Anderson { disorder: w, seed: c.seed + t as u64 }).at("assemble")?;
        let eta = 10f64.powf(d.uniform(-3.0, 0.0));
        let z = C64::new(d.uniform(-3.0, 3.0), eta);
        let phi: Vec<C64> = (0..domain.len()).map(|_| C64::new(d.uniform(-1.0, 1.0), d.uniform(-1.0, 1.0))).collect();
        let residual = lemma21_residual(&op, z, &phi).at("lemma21_residual")?;
        Ok(Row { check: "resolvent", trial: t, domain: domain_label(&dc), value: residual, scale: eta })
    })?;

    let mut table = Table::new(&["check", "trial", "domain", "value", "scale"]);
    for r in green.iter().chain(&wronskian).chain(&resolvent) {
        table.push(vec![r.check.into(), r.trial.into(), r.domain.clone().into(), Cell::Float(r.value), Cell::Float(r.scale)]);
    }

    let green_worst = green.iter().map(|r| if r.scale > 0.0 { r.value / r.scale } else { r.value }).fold(0.0, f64::max);
    let wr_worst = wronskian.iter().map(|r| r.value / r.scale).fold(0.0, f64::max);
    let res_worst = resolvent.iter().map(|r| r.value).fold(0.0, f64::max);
    let gates = vec![
        Gate::new("green-formula", green_worst <= c.green_tol, format!("max residual / (‖f‖‖g‖·2d) = {green_worst:.3e} over {} triples (tol {:.0e})", green.len(), c.green_tol)),
        Gate::new("cumulative-wronskian", wr_worst <= 1.0, format!("max Σ|w| / (d‖f‖‖g‖) = {wr_worst:.4} over {} pairs", wronskian.len())),
        Gate::new("resolvent-identity", res_worst <= c.resolvent_tol, format!("max residual = {res_worst:.3e} over {} triples (tol {:.0e})", resolvent.len(), c.resolvent_tol)),
    ];
    let metrics = json!({
        "green_max_relative": green_worst,
        "wronskian_max_ratio": wr_worst,
        "resolvent_max_residual": res_worst,
        "wronskian_radius": radius,
    });
    Ok(Report { experiment: ExperimentName::GreenCheck, table, metrics, gates })
}
