//! Generalized eigenfunctions and their growth.
//!
//! Half-line solutions use the boundary phase convention `u(0) = sin θ`,
//! `u(1) = cos θ` (θ = 0 is Dirichlet with `u(1) = 1`). Transfer matrices
//! map `(u(1), u(0))` to `(u(n+1), u(n))` and are renormalized whenever
//! their norm passes [`RENORM_THRESHOLD`], the discarded scale being kept
//! in log space.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fit::{linear_fit, mean_and_stderr, scaling_fit, LineFit, ScalingFit};
use crate::lattice::{DomainKind, LatticeDomain};
use crate::operator::SparseHermitianOperator;
use crate::potentials::{DecayingStream, PotentialSpec};

pub const RENORM_THRESHOLD: f64 = 1e8;

/// How the solution is pinned at the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Half-line phase: `u(0) = sin θ`, `u(1) = cos θ`.
    Phase { theta: f64 },
    /// Dirichlet on the true boundary of `Ω`, normalized by the closed form.
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedSolution {
    pub energy: f64,
    /// Values in the index order of the domain the solution lives on.
    pub values: Vec<f64>,
    /// True values are `values · exp(log_scale)`.
    pub log_scale: f64,
    pub boundary: Boundary,
}

impl GeneralizedSolution {
    /// Value just outside the half-line (`u(0)`), scaled like `values`.
    fn outer_value(&self) -> f64 {
        match self.boundary {
            Boundary::Phase { theta } => theta.sin() * (-self.log_scale).exp(),
            Boundary::Dirichlet => 0.0,
        }
    }
}

/// Relative residual `max |(h u)(n) − E u(n)| / ((|E| + 2d + ‖v‖_∞)‖u‖_∞)`
/// over all sites except truncation sites. The half-line boundary value
/// `u(0)` is included as the neighbour of site 1.
pub fn eigen_residual(op: &SparseHermitianOperator<'_>, u: &GeneralizedSolution) -> Result<f64> {
    let domain = op.domain();
    op.check_len(u.values.len())?;
    let hu = op.apply_real(&u.values)?;
    let vmax = op.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let umax = u.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if umax == 0.0 {
        return Err(Error::InvalidArgument("solution is identically zero"));
    }
    let outer = match domain.kind() {
        DomainKind::HalfLine { .. } => u.outer_value(),
        _ => 0.0,
    };
    let mut worst = 0.0f64;
    for i in 0..domain.len() {
        if domain.is_truncation(i) {
            continue;
        }
        let mut r = hu[i] - u.energy * u.values[i];
        if i == 0 {
            r += outer;
        }
        worst = worst.max(r.abs());
    }
    let scale = (u.energy.abs() + 2.0 * domain.dim() as f64 + vmax) * umax;
    Ok(worst / scale)
}

enum HalfLineSampler<'a> {
    Decaying(DecayingStream),
    General(&'a PotentialSpec),
}

impl HalfLineSampler<'_> {
    fn new(spec: &PotentialSpec) -> HalfLineSampler<'_> {
        match spec {
            PotentialSpec::RandomDecaying { coupling, seed } => HalfLineSampler::Decaying(DecayingStream::new(*coupling, *seed)),
            other => HalfLineSampler::General(other),
        }
    }

    #[inline]
    fn value(&self, n: u64) -> Result<f64> {
        let v = match self {
            Self::Decaying(s) => s.value(n),
            Self::General(spec) => spec.eval_half_line(n)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinitePotential { site: [n as i32, 0, 0] })
        }
    }
}

/// Integer checkpoints `⌈first · ratio^j⌉ ≤ n_max`, deduplicated, always
/// ending at `n_max`.
pub fn checkpoint_grid(first: f64, ratio: f64, n_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut x = first.max(1.0);
    while x.ceil() < n_max as f64 {
        let k = x.ceil() as u64;
        if out.last() != Some(&k) {
            out.push(k);
        }
        x *= ratio;
    }
    out.push(n_max);
    out
}

pub type Mat2 = [[f64; 2]; 2];

/// Largest singular value of a 2×2 matrix.
#[inline]
pub fn spectral_norm(m: &Mat2) -> f64 {
    let [[a, b], [c, d]] = *m;
    let p = (a + d).hypot(b - c);
    let q = (a - d).hypot(b + c);
    0.5 * (p + q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub n: u64,
    /// Renormalized `T_E(n, 0)`; the true matrix is `matrix · exp(log_scale)`.
    pub matrix: Mat2,
    pub log_scale: f64,
}

impl Checkpoint {
    pub fn log_norm(&self) -> f64 {
        spectral_norm(&self.matrix).ln() + self.log_scale
    }

    /// `log ‖T_E(n,0) (cos θ, sin θ)‖`.
    pub fn log_norm_along(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let m = &self.matrix;
        let x = m[0][0] * c + m[0][1] * s;
        let y = m[1][0] * c + m[1][1] * s;
        x.hypot(y).ln() + self.log_scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrixProduct {
    pub energy: f64,
    pub steps: u64,
    pub matrix: Mat2,
    pub log_scale: f64,
    pub checkpoints: Vec<Checkpoint>,
}

impl TransferMatrixProduct {
    pub fn log_norm(&self) -> f64 {
        spectral_norm(&self.matrix).ln() + self.log_scale
    }

    /// `det T_E(n, 0)`, which is 1 in exact arithmetic.
    pub fn determinant(&self) -> f64 {
        let m = &self.matrix;
        (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * (2.0 * self.log_scale).exp()
    }

    /// `log ‖T(n)‖ / log n` at the last step.
    pub fn ratio_exponent(&self) -> f64 {
        self.log_norm() / (self.steps as f64).ln()
    }

    /// Least-squares slope of `log ‖T(n)‖` against `log n` over the
    /// checkpoints with `n ≥ tail_start`.
    pub fn tail_slope(&self, tail_start: u64) -> Result<LineFit> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .checkpoints
            .iter()
            .filter(|c| c.n >= tail_start)
            .map(|c| ((c.n as f64).ln(), c.log_norm()))
            .unzip();
        linear_fit(&xs, &ys)
    }

    pub fn tail_slope_along(&self, theta: f64, tail_start: u64) -> Result<LineFit> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .checkpoints
            .iter()
            .filter(|c| c.n >= tail_start)
            .map(|c| ((c.n as f64).ln(), c.log_norm_along(theta)))
            .unzip();
        linear_fit(&xs, &ys)
    }
}

/// `T_E(n_max, 0) = A_{n_max} ⋯ A_1` with `A_k = [[E − v(k), −1], [1, 0]]`,
/// recording the product at every checkpoint in `grid` (which must be
/// ascending and end at `n_max`).
pub fn transfer_product(energy: f64, potential: &PotentialSpec, n_max: u64, grid: &[u64]) -> Result<TransferMatrixProduct> {
    if n_max < 2 {
        return Err(Error::InvalidArgument("transfer product needs n_max ≥ 2"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid.last().is_some_and(|&k| k > n_max) {
        return Err(Error::InvalidArgument("checkpoint grid must be strictly ascending and ≤ n_max"));
    }
    let sampler = HalfLineSampler::new(potential);
    let mut m: Mat2 = [[1.0, 0.0], [0.0, 1.0]];
    let mut log_scale = 0.0;
    let mut checkpoints = Vec::with_capacity(grid.len());
    let mut next = grid.iter().peekable();
    for k in 1..=n_max {
        let a = energy - sampler.value(k)?;
        let top = [a * m[0][0] - m[1][0], a * m[0][1] - m[1][1]];
        m[1] = m[0];
        m[0] = top;
        // the max-entry test is cheap and within a factor 2 of the norm
        let big = m[0][0].abs().max(m[0][1].abs()).max(m[1][0].abs()).max(m[1][1].abs());
        if big > RENORM_THRESHOLD {
            let s = spectral_norm(&m);
            for row in m.iter_mut() {
                for x in row.iter_mut() {
                    *x /= s;
                }
            }
            log_scale += s.ln();
        }
        if next.peek() == Some(&&k) {
            next.next();
            checkpoints.push(Checkpoint { n: k, matrix: m, log_scale });
        }
    }
    if !log_scale.is_finite() || m.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("transfer product"));
    }
    Ok(TransferMatrixProduct { energy, steps: n_max, matrix: m, log_scale, checkpoints })
}

/// Solves `u(n+1) = (E − v(n)) u(n) − u(n−1)` from `u(0) = sin θ`,
/// `u(1) = cos θ`. The result lives on `LatticeDomain::build_half_line(n_max)`
/// (`values[n-1] = u(n)`).
pub fn solve_halfline(energy: f64, potential: &PotentialSpec, theta: f64, n_max: usize) -> Result<GeneralizedSolution> {
    if n_max < 2 {
        return Err(Error::InvalidArgument("half-line solution needs n_max ≥ 2"));
    }
    let sampler = HalfLineSampler::new(potential);
    let mut values = Vec::with_capacity(n_max);
    let mut log_scale = 0.0;
    let mut prev = theta.sin();
    let mut cur = theta.cos();
    values.push(cur);
    for n in 1..n_max {
        let next = (energy - sampler.value(n as u64)?) * cur - prev;
        prev = cur;
        cur = next;
        values.push(cur);
        if cur.abs() > 1e200 {
            const SHRINK: f64 = 1e-200;
            values.iter_mut().for_each(|x| *x *= SHRINK);
            prev *= SHRINK;
            cur *= SHRINK;
            log_scale -= SHRINK.ln();
        }
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("half-line recurrence"));
    }
    Ok(GeneralizedSolution { energy, values, log_scale, boundary: Boundary::Phase { theta } })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawOptions {
    pub checkpoint_first: f64,
    pub checkpoint_ratio: f64,
    /// Tail of the fit: checkpoints with `n ≥ n_max^tail_power`.
    pub tail_power: f64,
    pub phase_grid: usize,
    pub golden_tol: f64,
    /// Fits with RMS residual above this are flagged.
    pub max_fit_rms: f64,
}

impl Default for PowerLawOptions {
    fn default() -> Self {
        Self {
            checkpoint_first: 10.0,
            checkpoint_ratio: 1.25,
            tail_power: 0.5,
            phase_grid: 64,
            golden_tol: 1e-10,
            max_fit_rms: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationExponent {
    pub seed: u64,
    /// `log ‖T(n_max)‖ / log n_max`.
    pub growth_ratio: f64,
    /// Tail least-squares slope of `log ‖T(n)‖` vs `log n`.
    pub growth_slope: f64,
    /// Boundary phase of the minimal-growth solution.
    pub min_phase: f64,
    /// Tail slope of `log ‖T(n) u_θ‖` at the minimal phase (negative).
    pub decay_slope: f64,
    pub flagged: bool,
    /// `(n, log ‖T(n)‖)` at every checkpoint.
    pub log_norms: Vec<(u64, f64)>,
}

/// One realization of the power-law analysis for a half-line potential.
pub fn power_law_realization(energy: f64, potential: &PotentialSpec, n_max: u64, opts: &PowerLawOptions) -> Result<RealizationExponent> {
    let grid = checkpoint_grid(opts.checkpoint_first, opts.checkpoint_ratio, n_max);
    let product = transfer_product(energy, potential, n_max, &grid)?;
    let tail_start = (n_max as f64).powf(opts.tail_power) as u64;
    let growth = product.tail_slope(tail_start)?;
    let slope_at = |theta: f64| product.tail_slope_along(theta, tail_start).map(|f| f.slope);

    let m = opts.phase_grid.max(3);
    let mut best = (0.0, f64::INFINITY);
    for j in 0..m {
        let theta = PI * j as f64 / m as f64;
        let s = slope_at(theta)?;
        if s < best.1 {
            best = (theta, s);
        }
    }
    let h = PI / m as f64;
    let (theta, decay) = golden_section(|t| slope_at(t).unwrap_or(f64::INFINITY), best.0 - h, best.0 + h, opts.golden_tol);
    let (theta, decay) = if decay <= best.1 { (num_traits::Euclid::rem_euclid(&theta, &PI), decay) } else { best };
    let decay_fit = product.tail_slope_along(theta, tail_start)?;
    let seed = match potential {
        PotentialSpec::RandomDecaying { seed, .. } | PotentialSpec::Anderson { seed, .. } => *seed,
        _ => 0,
    };
    Ok(RealizationExponent {
        seed,
        growth_ratio: product.ratio_exponent(),
        growth_slope: growth.slope,
        min_phase: theta,
        decay_slope: decay,
        flagged: growth.rms > opts.max_fit_rms || decay_fit.rms > opts.max_fit_rms,
        log_norms: product.checkpoints.iter().map(|c| (c.n, c.log_norm())).collect(),
    })
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawEnsemble {
    pub energy: f64,
    pub realizations: Vec<RealizationExponent>,
    pub ratio_mean: f64,
    pub ratio_stderr: f64,
    pub slope_mean: f64,
    pub slope_stderr: f64,
    pub decay_mean: f64,
    pub decay_stderr: f64,
}

/// Aggregates realizations in the order given.
pub fn summarize_power_law(energy: f64, realizations: Vec<RealizationExponent>) -> PowerLawEnsemble {
    let col = |f: fn(&RealizationExponent) -> f64| -> Vec<f64> { realizations.iter().map(f).collect() };
    let (ratio_mean, ratio_stderr) = mean_and_stderr(&col(|r| r.growth_ratio));
    let (slope_mean, slope_stderr) = mean_and_stderr(&col(|r| r.growth_slope));
    let (decay_mean, decay_stderr) = mean_and_stderr(&col(|r| r.decay_slope));
    PowerLawEnsemble { energy, realizations, ratio_mean, ratio_stderr, slope_mean, slope_stderr, decay_mean, decay_stderr }
}

/// Sequential ensemble over `seeds` for the decaying model.
pub fn power_law_exponent(
    energy: f64,
    potential: &PotentialSpec,
    n_max: u64,
    seeds: &[u64],
    opts: &PowerLawOptions,
) -> Result<PowerLawEnsemble> {
    if !matches!(potential, PotentialSpec::RandomDecaying { .. }) {
        return Err(Error::InvalidArgument("power-law exponent needs the random decaying model"));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one realization is required"));
    }
    let reals = seeds
        .iter()
        .map(|&s| power_law_realization(energy, &potential.with_seed(s), n_max, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_power_law(energy, reals))
}

/// `λ² / (8 − 2E²)`.
pub fn kls_growth_exponent(coupling: f64, energy: f64) -> f64 {
    coupling * coupling / (8.0 - 2.0 * energy * energy)
}

/// `(4 − E² − λ²) / (4 − E²)`.
pub fn kls_dimension(coupling: f64, energy: f64) -> f64 {
    (4.0 - energy * energy - coupling * coupling) / (4.0 - energy * energy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticModel {
    /// `u(n) = sin(k n)` on the half-line.
    Free1D,
    /// The same sequence carried along the unrolled spiral.
    Spiral,
}

/// Closed-form plane wave `sin(arccos(E/2) n)`.
pub fn analytic_solution(model: AnalyticModel, energy: f64, domain: &LatticeDomain) -> Result<GeneralizedSolution> {
    if !(energy.abs() < 2.0) {
        return Err(Error::EnergyOutsideBand { energy });
    }
    let k = (energy / 2.0).acos();
    let values = match (model, domain.kind()) {
        (AnalyticModel::Free1D, DomainKind::HalfLine { .. }) => {
            domain.sites().iter().map(|s| (k * s[0] as f64).sin()).collect()
        }
        (AnalyticModel::Spiral, DomainKind::Spiral { .. }) => {
            let order = domain.unroll_spiral()?;
            let mut v = vec![0.0; domain.len()];
            for (p, &i) in order.iter().enumerate() {
                v[i] = (k * (p + 1) as f64).sin();
            }
            v
        }
        _ => return Err(Error::InvalidArgument("analytic model does not match the domain")),
    };
    let boundary = match model {
        AnalyticModel::Free1D => Boundary::Phase { theta: 0.0 },
        AnalyticModel::Spiral => Boundary::Dirichlet,
    };
    Ok(GeneralizedSolution { energy, values, log_scale: 0.0, boundary })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthEstimate {
    pub radii: Vec<f64>,
    /// `ln ‖u‖²_{C_R}` at each radius.
    pub log_norm_sq: Vec<f64>,
    pub scaling: ScalingFit,
}

impl GrowthEstimate {
    pub fn exponent(&self) -> f64 {
        self.scaling.fit.slope
    }

    pub fn lower(&self) -> f64 {
        self.scaling.lower
    }

    pub fn upper(&self) -> f64 {
        self.scaling.upper
    }
}

/// Geometric radius grid `R_max / 2^{count-1-j}`.
pub fn radius_grid(r_max: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| r_max / 2f64.powi((count - 1 - j) as i32)).collect()
}

/// Exponent of `‖u‖²_{C_R ∩ Ω}` in `R`, cubes centred at the origin.
pub fn growth_exponent(u: &GeneralizedSolution, domain: &LatticeDomain, radii: &[f64]) -> Result<GrowthEstimate> {
    const MARGIN: usize = 1;
    if radii.len() < 4 {
        return Err(Error::InsufficientGrid { needed: 4, got: radii.len() });
    }
    if u.values.len() != domain.len() {
        return Err(Error::LengthMismatch { expected: domain.len(), got: u.values.len() });
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) || !(radii[0] > 0.0) {
        return Err(Error::InvalidArgument("radius grid must be positive and strictly increasing"));
    }
    let limit = domain.truncation_radius().saturating_sub(MARGIN);
    let r_max = radii[radii.len() - 1];
    if r_max > limit as f64 {
        return Err(Error::RadiusTooLarge { radius: r_max, limit });
    }
    let dist = domain.distances_from(&[0; 3]);
    let mut shells = vec![0.0; limit + 1];
    for (d, v) in dist.iter().zip(&u.values) {
        if (*d as usize) <= limit {
            shells[*d as usize] += v * v;
        }
    }
    let mut cumulative = shells;
    for i in 1..cumulative.len() {
        cumulative[i] += cumulative[i - 1];
    }
    let log_norm_sq: Vec<f64> = radii.iter().map(|&r| cumulative[r as usize].ln() + 2.0 * u.log_scale).collect();
    if log_norm_sq.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("ball norm (solution vanishes on a ball)"));
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let scaling = scaling_fit(&xs, &log_norm_sq, radii.len() / 2)?;
    Ok(GrowthEstimate { radii: radii.to_vec(), log_norm_sq, scaling })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarkEnvelope {
    /// Slope of `log |u|` envelope against `log x`.
    pub slope: f64,
    pub fit: LineFit,
    pub peaks: usize,
    pub step: f64,
}

/// Step satisfying `h·sqrt(x_max + |E|) = 0.04`.
pub fn default_stark_step(energy: f64, x_max: f64) -> f64 {
    0.04 / (x_max + energy.abs()).sqrt()
}

/// Integrates `−u″ − x u = E u` by Numerov from `x = 1` with `u(1) = 1`,
/// `u′(1) = 0` and fits the local maxima of `|u|` on `[x_max/10, x_max]`.
pub fn stark_envelope(energy: f64, x_max: f64, step: f64) -> Result<StarkEnvelope> {
    if !(x_max >= 1e3) {
        return Err(Error::InvalidArgument("stark envelope needs x_max ≥ 1000"));
    }
    let product = step * (x_max + energy.abs()).sqrt();
    if !(step > 0.0) || product > 0.05 {
        return Err(Error::StepTooLarge { step, product });
    }
    // u'' = q(x) u with q = −(x + E)
    let q = |x: f64| -(x + energy);
    let x0 = 1.0;
    let h = step;
    let h2 = h * h / 12.0;
    // fifth-order Taylor start
    let (u0, du0) = (1.0, 0.0);
    let d2 = q(x0) * u0;
    let d3 = -u0 + q(x0) * du0;
    let d4 = -2.0 * du0 + q(x0) * d2;
    let d5 = -3.0 * d2 + q(x0) * d3;
    let u1 = u0 + h * du0 + h * h / 2.0 * d2 + h.powi(3) / 6.0 * d3 + h.powi(4) / 24.0 * d4 + h.powi(5) / 120.0 * d5;

    let steps = ((x_max - x0) / h).ceil() as u64;
    let fit_from = x_max / 10.0;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let (mut u_prev, mut u_cur) = (u0, u1);
    let mut w_prev = 1.0 - h2 * q(x0);
    let mut w_cur = 1.0 - h2 * q(x0 + h);
    // |u| at i-1, i for peak detection
    let (mut a_prev, mut a_cur) = (u_prev.abs(), u_cur.abs());
    for i in 1..steps {
        let x_next = x0 + (i + 1) as f64 * h;
        let w_next = 1.0 - h2 * q(x_next);
        let u_next = ((12.0 - 10.0 * w_cur) * u_cur - w_prev * u_prev) / w_next;
        let a_next = u_next.abs();
        if a_cur >= a_prev && a_cur > a_next {
            let x_i = x0 + i as f64 * h;
            if x_i >= fit_from {
                let curv = a_prev - 2.0 * a_cur + a_next;
                let (peak, shift) = if curv < 0.0 {
                    (a_cur - (a_next - a_prev).powi(2) / (8.0 * curv), 0.5 * (a_prev - a_next) / curv)
                } else {
                    (a_cur, 0.0)
                };
                xs.push((x_i + shift * h).ln());
                ys.push(peak.ln());
            }
        }
        u_prev = u_cur;
        u_cur = u_next;
        w_prev = w_cur;
        w_cur = w_next;
        a_prev = a_cur;
        a_cur = a_next;
        if !u_cur.is_finite() {
            return Err(Error::NonFinite("Numerov integration"));
        }
    }
    let fit = linear_fit(&xs, &ys)?;
    Ok(StarkEnvelope { slope: fit.slope, fit, peaks: xs.len(), step })
}
