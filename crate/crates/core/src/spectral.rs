//! Borel transforms `F(z) = ⟨(h − z)^{-1} φ, φ⟩` of finite-volume spectral
//! measures and the local scaling estimators built on them.
//!
//! Finite truncations have pure point spectrum, so every scaling exponent
//! here is read off a window of scales bounded below by a spacing guard
//! (a multiple of the local level spacing) and above by `ε_max / 4`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fit::{scaling_fit, ScalingFit};
use crate::linalg::{cocg, householder_tridiagonalize, inner, norm, tridiagonal_eigen, BandLu};
use crate::operator::SparseHermitianOperator;
use crate::C64;

/// Residual bound `‖(h − z)θ − φ‖ ≤ tol ‖φ‖` every solve must meet.
pub const RESOLVENT_TOL: f64 = 1e-10;
/// Dense diagonalization cap for [`finite_spectral_measure`].
pub const DENSE_BUDGET: usize = 4000;
/// Default multiple of the level spacing below which scales are not used.
pub const SPACING_GUARD: f64 = 10.0;
/// Band storage cap (complex entries) before switching to COCG.
const BAND_STORAGE_BUDGET: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventSolution {
    pub theta: Vec<C64>,
    /// `‖(h − z)θ − φ‖ / ‖φ‖`.
    pub residual: f64,
}

fn shifted_residual(op: &SparseHermitianOperator<'_>, z: C64, theta: &[C64], phi: &[C64], out: &mut [C64]) {
    op.apply_into(theta, out);
    for k in 0..out.len() {
        out[k] = phi[k] - (out[k] - z * theta[k]);
    }
}

/// `θ = (h − z)^{-1} φ`. Banded LU with partial pivoting and iterative
/// refinement when the band fits in memory, COCG otherwise; either way the
/// residual is the acceptance test.
pub fn resolvent_solve(op: &SparseHermitianOperator<'_>, z: C64, phi: &[C64]) -> Result<ResolventSolution> {
    op.check_len(phi.len())?;
    if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
        return Err(Error::InvalidArgument("resolvent needs a finite z with Im z ≠ 0"));
    }
    let pnorm = norm(phi);
    if pnorm == 0.0 {
        return Err(Error::InvalidArgument("probe vector is zero"));
    }
    let n = op.dim();
    let b = op.bandwidth();
    let mut work = vec![C64::zero(); n];
    let (theta, iterations) = if BandLu::storage(n, b) <= BAND_STORAGE_BUDGET {
        let lu = BandLu::factor(
            n,
            b,
            b,
            op.triplets().map(|(i, j, v)| (i, j, if i == j { C64::new(v, 0.0) - z } else { C64::new(v, 0.0) })),
        )?;
        let mut theta = phi.to_vec();
        lu.solve_in_place(&mut theta);
        let mut res = f64::INFINITY;
        for _ in 0..3 {
            shifted_residual(op, z, &theta, phi, &mut work);
            let r = norm(&work) / pnorm;
            if r <= 1e-14 || r >= 0.5 * res {
                break;
            }
            res = r;
            lu.solve_in_place(&mut work);
            theta.iter_mut().zip(&work).for_each(|(t, d)| *t += d);
        }
        (theta, 0)
    } else {
        let max_iter = 20 * n;
        let theta = cocg(
            |x, y| {
                op.apply_into(x, y);
                y.iter_mut().zip(x).for_each(|(yk, xk)| *yk -= z * xk);
            },
            phi,
            RESOLVENT_TOL * 1e-2,
            max_iter,
        )?;
        (theta, max_iter)
    };
    shifted_residual(op, z, &theta, phi, &mut work);
    let residual = norm(&work) / pnorm;
    if !(residual <= RESOLVENT_TOL) {
        return Err(Error::NoConvergence { residual, iterations });
    }
    Ok(ResolventSolution { theta, residual })
}

/// `F(z) = ⟨θ, φ⟩` for `θ = (h − z)^{-1} φ`.
pub fn borel_transform(op: &SparseHermitianOperator<'_>, z: C64, phi: &[C64]) -> Result<C64> {
    let sol = resolvent_solve(op, z, phi)?;
    Ok(inner(&sol.theta, phi))
}

/// `|Im z ‖θ‖² − Im ⟨θ, φ⟩| / ‖φ‖²`, zero in exact arithmetic.
pub fn lemma21_residual(op: &SparseHermitianOperator<'_>, z: C64, phi: &[C64]) -> Result<f64> {
    let sol = resolvent_solve(op, z, phi)?;
    let t2 = norm(&sol.theta).powi(2);
    let f = inner(&sol.theta, phi);
    Ok((z.im * t2 - f.im).abs() / norm(phi).powi(2))
}

/// Finite-volume spectral measure of `φ`: atoms at the eigenvalues of `h`
/// with weights `|⟨φ, ψ_k⟩|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpectralMeasure {
    pub eigenvalues: Vec<f64>,
    pub weights: Vec<f64>,
    pub mass: f64,
}

impl FiniteSpectralMeasure {
    /// `μ((a, b))`, open interval.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        let lo = self.eigenvalues.partition_point(|&e| e <= a);
        let hi = self.eigenvalues.partition_point(|&e| e < b);
        if hi <= lo {
            0.0
        } else {
            self.weights[lo..hi].iter().sum()
        }
    }

    /// Mean gap between the (up to) ten eigenvalues nearest `energy`.
    pub fn local_spacing(&self, energy: f64) -> f64 {
        let n = self.eigenvalues.len();
        if n < 2 {
            return 0.0;
        }
        let p = self.eigenvalues.partition_point(|&e| e < energy);
        let lo = p.saturating_sub(5);
        let hi = (lo + 10).min(n);
        let lo = hi.saturating_sub(10);
        (self.eigenvalues[hi - 1] - self.eigenvalues[lo]) / (hi - lo - 1) as f64
    }

    /// `Im F(E + iε) = Σ_k w_k ε / ((E_k − E)² + ε²)`.
    pub fn borel_im(&self, energy: f64, eps: f64) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| w * eps / ((e - energy).powi(2) + eps * eps))
            .sum()
    }
}

pub fn finite_spectral_measure(op: &SparseHermitianOperator<'_>, phi: &[C64]) -> Result<FiniteSpectralMeasure> {
    finite_spectral_measure_with_budget(op, phi, DENSE_BUDGET)
}

pub fn finite_spectral_measure_with_budget(op: &SparseHermitianOperator<'_>, phi: &[C64], budget: usize) -> Result<FiniteSpectralMeasure> {
    op.check_len(phi.len())?;
    let n = op.dim();
    if n > budget {
        return Err(Error::DenseBudget { sites: n, budget });
    }
    let mut rows = vec![phi.iter().map(|c| c.re).collect::<Vec<f64>>(), phi.iter().map(|c| c.im).collect()];
    let (diag, off) = if op.bandwidth() <= 1 {
        let off = (0..n.saturating_sub(1)).map(|i| op.entry(i, i + 1)).collect();
        (op.diagonal().to_vec(), off)
    } else {
        let mut dense = vec![0.0; n * n];
        for (i, j, v) in op.triplets() {
            dense[i * n + j] = v;
        }
        householder_tridiagonalize(&mut dense, n, &mut rows)
    };
    let eigenvalues = tridiagonal_eigen(&diag, &off, &mut rows)?;
    let weights: Vec<f64> = rows[0].iter().zip(&rows[1]).map(|(a, b)| a * a + b * b).collect();
    let mass: f64 = weights.iter().sum();
    let expected = norm(phi).powi(2);
    if (mass - expected).abs() > 1e-10 * expected.max(f64::MIN_POSITIVE) {
        return Err(Error::NoConvergence { residual: (mass - expected).abs(), iterations: 0 });
    }
    Ok(FiniteSpectralMeasure { eigenvalues, weights, mass })
}

/// Scale-window guard: `factor ·` local spacing when a measure is available,
/// otherwise `10 · (b_max − b_min) / N`.
pub fn spacing_guard(op: &SparseHermitianOperator<'_>, measure: Option<&FiniteSpectralMeasure>, energy: f64, factor: f64) -> f64 {
    match measure {
        Some(m) => factor * m.local_spacing(energy),
        None => {
            let (lo, hi) = op.bounds();
            10.0 * (hi - lo) / op.dim() as f64
        }
    }
}

/// `ε_max, ε_max/2, …` down to the coupling scale `c2 / L` (inclusive of
/// the last value above it).
pub fn default_eps_grid(eps_max: f64, truncation_radius: usize, c2: f64) -> Vec<f64> {
    let eps_min = c2 / truncation_radius.max(1) as f64;
    let mut eps = Vec::new();
    let mut e = eps_max;
    while e >= eps_min {
        eps.push(e);
        e *= 0.5;
    }
    eps
}

#[derive(Debug, Clone, PartialEq)]
pub struct BorelSweep {
    pub energy: f64,
    /// Descending scales.
    pub eps: Vec<f64>,
    pub im_f: Vec<f64>,
    pub guard: f64,
    /// Index range `lo..hi` of `eps` inside the scaling window.
    pub window: (usize, usize),
    /// Local exponent σ of `Im F ~ ε^{−σ}` (least squares over the window).
    pub sigma: f64,
    /// Windowed brackets of σ.
    pub sigma_lower: f64,
    pub sigma_upper: f64,
    pub scaling: ScalingFit,
}

impl BorelSweep {
    /// `ε^β Im F(E + iε)` at every sample.
    pub fn q_values(&self, beta: f64) -> Vec<f64> {
        self.eps.iter().zip(&self.im_f).map(|(e, f)| e.powf(beta) * f).collect()
    }

    pub fn window_eps(&self) -> (f64, f64) {
        (self.eps[self.window.1 - 1], self.eps[self.window.0])
    }
}

/// Samples `Im F(E + iε)` on `eps_grid` (descending) and fits σ over the
/// window `guard ≤ ε ≤ ε_max / 4`.
pub fn borel_sweep(op: &SparseHermitianOperator<'_>, phi: &[C64], energy: f64, eps_grid: &[f64], guard: f64) -> Result<BorelSweep> {
    if eps_grid.is_empty() || eps_grid.windows(2).any(|w| !(w[0] > w[1])) || !(eps_grid[eps_grid.len() - 1] > 0.0) {
        return Err(Error::InvalidArgument("ε grid must be positive and strictly decreasing"));
    }
    let im_f = eps_grid
        .iter()
        .map(|&e| borel_transform(op, C64::new(energy, e), phi).map(|f| f.im))
        .collect::<Result<Vec<f64>>>()?;
    let top = eps_grid[0] / 4.0;
    let lo = eps_grid.partition_point(|&e| e > top);
    let hi = eps_grid.partition_point(|&e| e >= guard);
    if hi < lo + 3 {
        return Err(Error::EmptyWindow { guard, top });
    }
    let xs: Vec<f64> = eps_grid[lo..hi].iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = im_f[lo..hi].iter().map(|f| f.ln()).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::NonFinite("Borel transform (Im F not positive)"));
    }
    let scaling = scaling_fit(&xs, &ys, 0)?;
    Ok(BorelSweep {
        energy,
        eps: eps_grid.to_vec(),
        im_f,
        guard,
        window: (lo, hi),
        sigma: -scaling.fit.slope,
        sigma_lower: -scaling.upper,
        sigma_upper: -scaling.lower,
        scaling,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaDerivative {
    pub alpha: f64,
    pub deltas: Vec<f64>,
    /// `μ(E − δ, E + δ) / δ^α` at every δ.
    pub ratios: Vec<f64>,
    pub window: (usize, usize),
    /// Max over the window: the finite-volume proxy for `D^α μ(E)`.
    pub estimate: f64,
}

/// Finite-volume proxy for `D^α μ(E) = limsup_{δ→0} μ(E−δ, E+δ) / δ^α`
/// on a descending δ grid; only `δ ≥ guard` enters the estimate.
pub fn upper_alpha_derivative(measure: &FiniteSpectralMeasure, energy: f64, alpha: f64, deltas: &[f64], guard: f64) -> Result<AlphaDerivative> {
    if deltas.windows(2).any(|w| !(w[0] > w[1])) || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidArgument("δ grid must be positive and strictly decreasing"));
    }
    let ratios: Vec<f64> = deltas.iter().map(|&d| measure.mass_in(energy - d, energy + d) / d.powf(alpha)).collect();
    let hi = deltas.partition_point(|&d| d >= guard);
    if hi == 0 {
        return Err(Error::EmptyWindow { guard, top: deltas.first().copied().unwrap_or(0.0) });
    }
    let estimate = ratios[..hi].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(AlphaDerivative { alpha, deltas: deltas.to_vec(), ratios, window: (0, hi), estimate })
}

/// Ratios `[μ(E−ε,E+ε)/ε^α] / [ε^{1−α} Im F(E+iε)]` at matched scales, with
/// their min and max (the empirical comparison constants).
pub fn borel_bridge(measure: &FiniteSpectralMeasure, energy: f64, alpha: f64, eps: &[f64]) -> (Vec<f64>, f64, f64) {
    let ratios: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let d = measure.mass_in(energy - e, energy + e) / e.powf(alpha);
            let q = e.powf(1.0 - alpha) * measure.borel_im(energy, e);
            d / q
        })
        .collect();
    let c1 = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let c2 = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (ratios, c1, c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeDomain;
    use crate::potentials::PotentialSpec;

    fn delta(n: usize, i: usize) -> Vec<C64> {
        let mut v = vec![C64::zero(); n];
        v[i] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn one_site_resolvent() {
        let d = LatticeDomain::build_half_line(2).unwrap();
        // two decoupled sites are not available, so use a diagonal table op
        let op = SparseHermitianOperator::with_diagonal(&d, vec![0.7, 0.0]).unwrap();
        let phi = vec![C64::new(1.0, 0.0), C64::zero()];
        let z = C64::new(0.2, 1.0);
        let sol = resolvent_solve(&op, z, &phi).unwrap();
        // (h − z)^{-1}_{11} for [[0.7,1],[1,0]]
        let det = (C64::new(0.7, 0.0) - z) * (-z) - 1.0;
        let expected = -z / det;
        assert!((sol.theta[0] - expected).norm() < 1e-14);
    }

    #[test]
    fn rejects_real_z_and_zero_probe() {
        let d = LatticeDomain::build_half_line(4).unwrap();
        let op = SparseHermitianOperator::assemble(&d, &PotentialSpec::Free).unwrap();
        assert!(resolvent_solve(&op, C64::new(0.1, 0.0), &delta(4, 0)).is_err());
        assert!(resolvent_solve(&op, C64::new(0.1, 1.0), &[C64::zero(); 4]).is_err());
    }

    #[test]
    fn three_site_measure() {
        let d = LatticeDomain::build_box(1, 1).unwrap();
        let op = SparseHermitianOperator::assemble(&d, &PotentialSpec::Free).unwrap();
        let m = finite_spectral_measure(&op, &delta(3, 1)).unwrap();
        let s2 = 2f64.sqrt();
        for (e, x) in m.eigenvalues.iter().zip([-s2, 0.0, s2]) {
            assert!((e - x).abs() < 1e-14);
        }
        for (w, x) in m.weights.iter().zip([0.5, 0.0, 0.5]) {
            assert!((w - x).abs() < 1e-14);
        }
    }

    #[test]
    fn dense_budget_enforced() {
        let d = LatticeDomain::build_half_line(50).unwrap();
        let op = SparseHermitianOperator::assemble(&d, &PotentialSpec::Free).unwrap();
        assert!(matches!(finite_spectral_measure_with_budget(&op, &delta(50, 0), 10), Err(Error::DenseBudget { .. })));
    }

    #[test]
    fn empty_window_is_an_error() {
        let d = LatticeDomain::build_half_line(20).unwrap();
        let op = SparseHermitianOperator::assemble(&d, &PotentialSpec::Free).unwrap();
        let err = borel_sweep(&op, &delta(20, 0), 0.0, &[1.0, 0.5, 0.25, 0.125], 0.2).unwrap_err();
        assert!(matches!(err, Error::EmptyWindow { .. }));
    }
}
