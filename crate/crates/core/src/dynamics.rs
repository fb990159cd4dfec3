//! Time evolution `e^{−iht}ψ` by Chebyshev expansion and the time-averaged
//! transport quantities built from one trajectory.
//!
//! The operator is rescaled into `[−1, 1]` using its cached Gershgorin
//! bounds, and the expansion `e^{−iht} = e^{−ict} Σ_k (2 − δ_{k0}) (−i)^k
//! J_k(at) T_k(h̃)` is truncated once the analytic Bessel tail bound drops
//! below [`TAIL_TOL`].

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fit::{scaling_fit, ScalingFit};
use crate::lattice::Site;
use crate::linalg::{inner, norm};
use crate::operator::SparseHermitianOperator;
use crate::C64;

pub const TAIL_TOL: f64 = 1e-12;
/// Default quadrature step.
pub const DEFAULT_DT: f64 = 0.25;
/// Default light-cone margin in sites.
pub const CONE_MARGIN: usize = 8;
/// Group speed per axis for unit hopping.
const GROUP_SPEED: f64 = 2.0;
/// Largest `a·Δt` handled by a single expansion in [`evolve`].
const MAX_ARG_PER_CHUNK: f64 = 25.0;

/// `J_0(x), …, J_{k_max}(x)` for `x ≥ 0` by Miller's backward recurrence,
/// normalized with `J_0 + 2 Σ_{k≥1} J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, k_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; k_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let m = k_max.max(x as usize) + 20 + (40.0 * (k_max.max(x as usize) as f64 + 1.0)).sqrt() as usize;
    let m = m + (m % 2);
    let (mut j_next, mut j_cur) = (0.0f64, 1e-300f64);
    let mut even_sum = 0.0;
    for k in (1..=m).rev() {
        // j_cur = J_k (unnormalized); produce J_{k-1}
        let j_prev = 2.0 * k as f64 / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        let idx = k - 1;
        if idx <= k_max {
            out[idx] = j_cur;
        }
        if idx % 2 == 0 && idx > 0 {
            even_sum += j_cur;
        }
        if j_cur.abs() > 1e250 {
            const S: f64 = 1e-250;
            j_cur *= S;
            j_next *= S;
            even_sum *= S;
            out.iter_mut().for_each(|v| *v *= S);
        }
    }
    let norm = j_cur + 2.0 * even_sum;
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

/// Smallest order `K ≥ x` with `Σ_{k>K} 2|J_k(x)| ≤ tol`, from
/// `|J_k(x)| ≤ (x/2)^k / k!`.
pub fn chebyshev_order(x: f64, tol: f64) -> usize {
    let half = 0.5 * x;
    let mut k = 0usize;
    // term = (x/2)^(k+1) / (k+1)!
    let mut term = half;
    loop {
        let ratio = half / (k + 2) as f64;
        if k as f64 >= x && ratio < 1.0 && 2.0 * term / (1.0 - ratio) <= tol {
            return k;
        }
        k += 1;
        term *= half / (k + 1) as f64;
    }
}

/// Single-step Chebyshev propagator `e^{−ihΔt}` for a fixed operator.
#[derive(Debug, Clone)]
pub struct Propagator {
    center: f64,
    half_width: f64,
    coeffs: Vec<C64>,
    dt: f64,
    bufs: [Vec<C64>; 3],
}

impl Propagator {
    pub fn new(op: &SparseHermitianOperator<'_>, dt: f64) -> Result<Self> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument("time step must be finite and non-negative"));
        }
        let (lo, hi) = op.bounds();
        let center = 0.5 * (lo + hi);
        let half_width = (0.5 * (hi - lo)).max(1e-12) * (1.0 + 1e-6);
        let x = half_width * dt;
        let k = chebyshev_order(x, TAIL_TOL);
        let j = bessel_j_sequence(x, k);
        let phase = C64::new((center * dt).cos(), -(center * dt).sin());
        let mut minus_i_pow = C64::new(1.0, 0.0);
        let coeffs = j
            .iter()
            .enumerate()
            .map(|(n, &jn)| {
                let c = phase * minus_i_pow * jn * if n == 0 { 1.0 } else { 2.0 };
                minus_i_pow *= C64::new(0.0, -1.0);
                c
            })
            .collect();
        let n = op.dim();
        Ok(Self { center, half_width, coeffs, dt, bufs: [vec![C64::zero(); n], vec![C64::zero(); n], vec![C64::zero(); n]] })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Replaces `psi` by `e^{−ihΔt} psi`.
    pub fn step(&mut self, op: &SparseHermitianOperator<'_>, psi: &mut [C64]) {
        let [prev, cur, next] = &mut self.bufs;
        prev.copy_from_slice(psi);
        let c0 = self.coeffs[0];
        if self.coeffs.len() == 1 {
            psi.iter_mut().for_each(|p| *p *= c0);
            return;
        }
        let inv = 1.0 / self.half_width;
        let center = self.center;
        let apply = |x: &[C64], out: &mut [C64]| {
            op.apply_into(x, out);
            for (o, xi) in out.iter_mut().zip(x) {
                *o = (*o - xi * center) * inv;
            }
        };
        apply(prev, cur);
        let c1 = self.coeffs[1];
        for k in 0..psi.len() {
            psi[k] = c0 * prev[k] + c1 * cur[k];
        }
        for &ck in &self.coeffs[2..] {
            apply(cur, next);
            for k in 0..psi.len() {
                let v = 2.0 * next[k] - prev[k];
                next[k] = v;
                psi[k] += ck * v;
            }
            core::mem::swap(prev, cur);
            core::mem::swap(cur, next);
        }
    }
}

/// Site carrying the largest `|ψ|²` (first on ties) and the max-norm radius
/// of the support of `ψ` about it.
pub fn state_center(op: &SparseHermitianOperator<'_>, psi: &[C64]) -> (Site, u32) {
    let domain = op.domain();
    let mut best = 0;
    for (i, p) in psi.iter().enumerate() {
        if p.norm_sqr() > psi[best].norm_sqr() {
            best = i;
        }
    }
    let center = domain.site(best);
    let reach = psi
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(i, _)| crate::lattice::max_dist(&domain.site(i), &center))
        .max()
        .unwrap_or(0);
    (center, reach)
}

/// Light-cone guard `2d·t + R_obs + margin ≤ distance to truncation`, with
/// the distance measured from the edge of the initial support.
pub fn cone_guard(op: &SparseHermitianOperator<'_>, psi: &[C64], t_max: f64, r_obs: f64, margin: usize) -> Result<()> {
    let domain = op.domain();
    let (center, reach) = state_center(op, psi);
    let Some(dist) = domain.distance_to_truncation(&center) else {
        return Ok(());
    };
    let available = dist as f64 - reach as f64;
    let needed = GROUP_SPEED * domain.dim() as f64 * t_max + r_obs + margin as f64;
    if needed > available {
        let required_radius = (needed + reach as f64 + (domain.truncation_radius() as f64 - dist as f64).max(0.0)).ceil() as usize;
        return Err(Error::ConeGuard { t: t_max, required_radius });
    }
    Ok(())
}

/// `e^{−iht} ψ` with the default cone guard (`R_obs = 0`).
pub fn evolve(op: &SparseHermitianOperator<'_>, psi: &[C64], t: f64) -> Result<Vec<C64>> {
    op.check_len(psi.len())?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument("evolution time must be non-negative"));
    }
    cone_guard(op, psi, t, 0.0, CONE_MARGIN)?;
    evolve_unguarded(op, psi, t)
}

/// `e^{−iht} ψ` with no light-cone check (for closed systems or oracles).
pub fn evolve_unguarded(op: &SparseHermitianOperator<'_>, psi: &[C64], t: f64) -> Result<Vec<C64>> {
    op.check_len(psi.len())?;
    let mut out = psi.to_vec();
    if t == 0.0 {
        return Ok(out);
    }
    let (lo, hi) = op.bounds();
    let a = (0.5 * (hi - lo)).max(1e-12);
    let chunks = (a * t / MAX_ARG_PER_CHUNK).ceil().max(1.0) as usize;
    let mut prop = Propagator::new(op, t / chunks as f64)?;
    for _ in 0..chunks {
        prop.step(op, &mut out);
    }
    Ok(out)
}

/// Observation schedule `T ↦ R_T = (‖ψ₁‖² T^α / (64 C₂ C₁))^{1/γ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtSchedule {
    pub alpha: f64,
    pub gamma: f64,
    pub psi1_norm: f64,
    pub c1: f64,
    pub c2: f64,
}

impl RtSchedule {
    pub fn new(alpha: f64, gamma: f64, psi1_norm: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidArgument("α must lie in (0, 1]"));
        }
        if !(gamma > 0.0 && gamma <= 3.0) {
            return Err(Error::InvalidArgument("γ must lie in (0, d]"));
        }
        if !(psi1_norm > 0.0 && c1 > 0.0 && c2 > 0.0) {
            return Err(Error::InvalidArgument("schedule constants must be positive"));
        }
        Ok(Self { alpha, gamma, psi1_norm, c1, c2 })
    }

    pub fn radius(&self, t: f64) -> f64 {
        (self.psi1_norm * self.psi1_norm * t.powf(self.alpha) / (64.0 * self.c2 * self.c1)).powf(1.0 / self.gamma)
    }
}

/// How the survival radius depends on `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusSchedule {
    Constant(f64),
    /// `R_T = scale · T^power`.
    Power { scale: f64, power: f64 },
    Rt(RtSchedule),
}

impl RadiusSchedule {
    pub fn radius(&self, t: f64) -> f64 {
        match *self {
            Self::Constant(r) => r,
            Self::Power { scale, power } => scale * t.powf(power),
            Self::Rt(s) => s.radius(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportRecord {
    pub origin: Site,
    /// Times actually used (multiples of `dt`).
    pub t_grid: Vec<f64>,
    pub dt: f64,
    pub orders: Vec<f64>,
    /// `moments[j][i] = ⟨⟨|X|^{orders[j]}⟩⟩_{t_grid[i]}`.
    pub moments: Vec<Vec<f64>>,
    /// `R_{T_i}` when a schedule was requested.
    pub radii: Option<Vec<f64>>,
    /// `⟨‖P_{R_T} ψ(t)‖²⟩_T`.
    pub survival: Option<Vec<f64>>,
    /// `⟨‖(1 − P_{R_T}) ψ(t)‖²⟩_T`, summed independently of `survival`.
    pub escaped: Option<Vec<f64>>,
    pub norm_drift: f64,
    pub energy_drift: f64,
    /// Accumulated truncation bound of the expansion.
    pub propagation_error: f64,
    pub chebyshev_order: usize,
}

impl TransportRecord {
    pub fn moment(&self, order: f64) -> Option<&[f64]> {
        self.orders.iter().position(|&m| m == order).map(|j| self.moments[j].as_slice())
    }
}

/// Trapezoid time averages over `[0, T_i]` from a single trajectory.
pub fn time_averaged_moments(
    op: &SparseHermitianOperator<'_>,
    psi: &[C64],
    t_grid: &[f64],
    orders: &[f64],
    dt: f64,
) -> Result<TransportRecord> {
    transport_run(op, psi, t_grid, orders, dt, None)
}

/// As [`time_averaged_moments`], additionally tracking the mass inside
/// `C_{R_T}` for each `T` of the grid.
pub fn ball_survival(
    op: &SparseHermitianOperator<'_>,
    psi: &[C64],
    schedule: RadiusSchedule,
    t_grid: &[f64],
    orders: &[f64],
    dt: f64,
) -> Result<TransportRecord> {
    transport_run(op, psi, t_grid, orders, dt, Some(schedule))
}

fn transport_run(
    op: &SparseHermitianOperator<'_>,
    psi0: &[C64],
    t_grid: &[f64],
    orders: &[f64],
    dt: f64,
    schedule: Option<RadiusSchedule>,
) -> Result<TransportRecord> {
    op.check_len(psi0.len())?;
    if !(dt > 0.0 && dt <= DEFAULT_DT) {
        return Err(Error::InvalidArgument("quadrature step must lie in (0, 0.25]"));
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| !(w[0] < w[1])) || !(t_grid[0] > 0.0) {
        return Err(Error::InvalidArgument("time grid must be positive and strictly increasing"));
    }
    let steps: Vec<usize> = t_grid.iter().map(|t| ((t / dt).round() as usize).max(1)).collect();
    if steps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("time grid is finer than the quadrature step"));
    }
    let t_used: Vec<f64> = steps.iter().map(|&s| s as f64 * dt).collect();
    let t_max = *t_used.last().unwrap();
    let radii: Option<Vec<f64>> = schedule.map(|s| t_used.iter().map(|&t| s.radius(t)).collect());
    let r_obs = radii.as_ref().map_or(0.0, |r| r.iter().copied().fold(0.0, f64::max));
    cone_guard(op, psi0, t_max, r_obs, CONE_MARGIN)?;

    let domain = op.domain();
    let (origin, _) = state_center(op, psi0);
    let dist = domain.distances_from(&origin);
    let max_r = dist.iter().copied().max().unwrap_or(0) as usize;
    let powers: Vec<Vec<f64>> = orders.iter().map(|&m| (0..=max_r).map(|r| (r as f64).powf(m)).collect()).collect();
    let cut: Option<Vec<usize>> = radii.as_ref().map(|rs| rs.iter().map(|&r| (r.max(0.0).floor() as usize).min(max_r + 1)).collect());

    let mut psi = psi0.to_vec();
    let mut hist = vec![0.0; max_r + 1];
    let mut hpsi = vec![C64::zero(); psi.len()];
    let norm0 = norm(&psi);
    op.apply_into(&psi, &mut hpsi);
    let energy0 = inner(&hpsi, &psi).re;
    let (mut norm_drift, mut energy_drift) = (0.0f64, 0.0f64);

    // per-time observables: moments, then (inside, outside) per T_i
    let observe = |psi: &[C64], hist: &mut Vec<f64>| {
        hist.iter_mut().for_each(|h| *h = 0.0);
        for (p, &d) in psi.iter().zip(&dist) {
            hist[d as usize] += p.norm_sqr();
        }
    };
    let moments_of = |hist: &[f64]| -> Vec<f64> { powers.iter().map(|pw| pw.iter().zip(hist).map(|(a, b)| a * b).sum()).collect() };
    let split_of = |hist: &[f64]| -> Vec<(f64, f64)> {
        match &cut {
            None => Vec::new(),
            Some(cs) => cs
                .iter()
                .map(|&c| {
                    let inside: f64 = hist[..c.min(hist.len() - 1) + 1].iter().sum();
                    let outside: f64 = hist.get(c + 1..).map_or(0.0, |h| h.iter().sum());
                    (inside, outside)
                })
                .collect(),
        }
    };

    observe(&psi, &mut hist);
    let mut prev_m = moments_of(&hist);
    let mut prev_s = split_of(&hist);
    let mut acc_m = vec![0.0; orders.len()];
    let mut acc_s = vec![(0.0, 0.0); prev_s.len()];
    let mut moments = vec![Vec::with_capacity(t_grid.len()); orders.len()];
    let mut survival = Vec::with_capacity(t_grid.len());
    let mut escaped = Vec::with_capacity(t_grid.len());

    let mut prop = Propagator::new(op, dt)?;
    let last = *steps.last().unwrap();
    let mut next_record = 0;
    for step in 1..=last {
        prop.step(op, &mut psi);
        observe(&psi, &mut hist);
        let cur_m = moments_of(&hist);
        let cur_s = split_of(&hist);
        for j in 0..orders.len() {
            acc_m[j] += 0.5 * dt * (prev_m[j] + cur_m[j]);
        }
        for (i, (a, (p, c))) in acc_s.iter_mut().zip(prev_s.iter().zip(&cur_s)).enumerate() {
            // each T_i integrates its own radius only up to T_i
            if step <= steps[i] {
                a.0 += 0.5 * dt * (p.0 + c.0);
                a.1 += 0.5 * dt * (p.1 + c.1);
            }
        }
        norm_drift = norm_drift.max((norm(&psi) - norm0).abs());
        op.apply_into(&psi, &mut hpsi);
        energy_drift = energy_drift.max((inner(&hpsi, &psi).re - energy0).abs());
        if step == steps[next_record] {
            let t = t_used[next_record];
            for j in 0..orders.len() {
                moments[j].push(acc_m[j] / t);
            }
            if cut.is_some() {
                survival.push(acc_s[next_record].0 / t);
                escaped.push(acc_s[next_record].1 / t);
            }
            next_record += 1;
        }
        prev_m = cur_m;
        prev_s = cur_s;
        if !norm_drift.is_finite() {
            return Err(Error::NonFinite("propagation"));
        }
    }
    let has_sched = cut.is_some();
    Ok(TransportRecord {
        origin,
        t_grid: t_used,
        dt,
        orders: orders.to_vec(),
        moments,
        radii,
        survival: has_sched.then_some(survival),
        escaped: has_sched.then_some(escaped),
        norm_drift,
        energy_drift,
        propagation_error: last as f64 * TAIL_TOL * norm0,
        chebyshev_order: prop.order(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportExponent {
    pub order: f64,
    /// `β_m`: least-squares slope of `log⟨⟨|X|^m⟩⟩_T` vs `log T`, over `m`.
    pub beta: f64,
    pub lower: f64,
    pub upper: f64,
    pub scaling: ScalingFit,
    pub used: usize,
}

/// Default transient discarded before fitting transport exponents.
pub const TRANSIENT_TIME: f64 = 10.0;

pub fn transport_exponent(record: &TransportRecord, order: f64) -> Result<TransportExponent> {
    transport_exponent_after(record, order, TRANSIENT_TIME)
}

pub fn transport_exponent_after(record: &TransportRecord, order: f64, transient: f64) -> Result<TransportExponent> {
    let values = record.moment(order).ok_or(Error::InvalidArgument("moment order was not recorded"))?;
    if !(order > 0.0) {
        return Err(Error::InvalidArgument("moment order must be positive"));
    }
    let from = record.t_grid.partition_point(|&t| t < transient);
    let used = record.t_grid.len() - from;
    if used < 4 {
        return Err(Error::InsufficientGrid { needed: 4, got: used });
    }
    let xs: Vec<f64> = record.t_grid[from..].iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = values[from..].iter().map(|v| v.ln()).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::NonFinite("transport moment (zero moment)"));
    }
    let scaling = scaling_fit(&xs, &ys, 0)?;
    Ok(TransportExponent {
        order,
        beta: scaling.fit.slope / order,
        lower: scaling.lower / order,
        upper: scaling.upper / order,
        scaling,
        used,
    })
}

/// Lower-envelope check of `⟨⟨|X|^m⟩⟩_T ≥ C T^p`: `C` is the smallest
/// `moment / T^p` over `fit_range`, then every `T` in `test_range` is
/// checked. Returns `C` and the times (in `test_range`) that violate it.
pub fn power_lower_bound(
    record: &TransportRecord,
    order: f64,
    power: f64,
    fit_range: (f64, f64),
    test_range: (f64, f64),
) -> Result<(f64, Vec<f64>, usize)> {
    let values = record.moment(order).ok_or(Error::InvalidArgument("moment order was not recorded"))?;
    let within = |t: f64, r: (f64, f64)| t >= r.0 * (1.0 - 1e-12) && t <= r.1 * (1.0 + 1e-12);
    let c = record
        .t_grid
        .iter()
        .zip(values)
        .filter(|(t, _)| within(**t, fit_range))
        .map(|(t, v)| v / t.powf(power))
        .fold(f64::INFINITY, f64::min);
    if !c.is_finite() {
        return Err(Error::InsufficientGrid { needed: 1, got: 0 });
    }
    let tested: Vec<(f64, f64)> =
        record.t_grid.iter().zip(values).filter(|(t, _)| within(**t, test_range)).map(|(t, v)| (*t, *v)).collect();
    if tested.is_empty() {
        return Err(Error::InsufficientGrid { needed: 1, got: 0 });
    }
    let violations = tested.iter().filter(|(t, v)| *v < c * t.powf(power)).map(|(t, _)| *t).collect();
    Ok((c, violations, tested.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeDomain;
    use crate::potentials::PotentialSpec;

    fn series_j(n: usize, x: f64) -> f64 {
        // direct power series, adequate for small x
        let mut term = (0.5 * x).powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
        let mut sum = term;
        for m in 1..60 {
            term *= -(0.25 * x * x) / (m as f64 * (m + n) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn bessel_matches_series() {
        for x in [0.1, 0.6, 2.0, 5.0] {
            let j = bessel_j_sequence(x, 12);
            for n in 0..=12 {
                assert!((j[n] - series_j(n, x)).abs() < 1e-13, "J_{n}({x})");
            }
        }
        assert_eq!(bessel_j_sequence(0.0, 3), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn order_grows_with_argument() {
        assert!(chebyshev_order(0.5, 1e-12) < chebyshev_order(5.0, 1e-12));
        assert!(chebyshev_order(50.0, 1e-12) >= 50);
    }

    #[test]
    fn zero_time_is_identity() {
        let d = LatticeDomain::build_half_line(30).unwrap();
        let op = SparseHermitianOperator::assemble(&d, &PotentialSpec::Free).unwrap();
        let mut psi = vec![C64::zero(); 30];
        psi[3] = C64::new(0.6, 0.8);
        assert_eq!(evolve(&op, &psi, 0.0).unwrap(), psi);
    }

    #[test]
    fn cone_guard_trips() {
        let d = LatticeDomain::build_box(1, 20).unwrap();
        let op = SparseHermitianOperator::assemble(&d, &PotentialSpec::Free).unwrap();
        let mut psi = vec![C64::zero(); d.len()];
        psi[20] = C64::new(1.0, 0.0);
        assert!(evolve(&op, &psi, 5.0).is_ok());
        assert!(matches!(evolve(&op, &psi, 7.0), Err(Error::ConeGuard { .. })));
    }

    #[test]
    fn schedule_formula() {
        let s = RtSchedule::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((s.radius(640.0) - 10.0).abs() < 1e-12);
        let h = RtSchedule::new(0.5, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((h.radius(6400.0) - 80.0 / 64.0).abs() < 1e-12);
        let s2 = RtSchedule::new(0.7, 2.0, 1.3, 0.4, 2.0).unwrap();
        let s1 = RtSchedule::new(0.7, 2.0, 1.3, 0.4, 1.0).unwrap();
        assert!((s2.radius(77.0) / s1.radius(77.0) - 2f64.powf(-0.5)).abs() < 1e-12);
        assert!(RtSchedule::new(1.5, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(RtSchedule::new(0.5, 1.0, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn quadrature_step_limit() {
        let d = LatticeDomain::build_box(1, 40).unwrap();
        let op = SparseHermitianOperator::assemble(&d, &PotentialSpec::Free).unwrap();
        let mut psi = vec![C64::zero(); d.len()];
        psi[40] = C64::new(1.0, 0.0);
        assert!(time_averaged_moments(&op, &psi, &[1.0, 2.0], &[2.0], 0.5).is_err());
    }
}
