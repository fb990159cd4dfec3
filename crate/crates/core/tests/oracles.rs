//! Comparisons against dense linear algebra and closed forms.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use spectrans_core::dynamics::evolve_unguarded;
use spectrans_core::eigensolutions::{
    analytic_solution, checkpoint_grid, eigen_residual, growth_exponent, kls_dimension, kls_growth_exponent, stark_envelope,
    transfer_product, AnalyticModel,
};
use spectrans_core::operator::green_formula_residual;
use spectrans_core::rng::CounterRng;
use spectrans_core::spectral::{borel_transform, finite_spectral_measure, lemma21_residual, resolvent_solve};
use spectrans_core::{LatticeDomain, PotentialSpec, SparseHermitianOperator, C64};

fn dense(op: &SparseHermitianOperator<'_>) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    for (i, j, v) in op.triplets() {
        m[(i, j)] = v;
    }
    m
}

fn random_state(n: usize, seed: u64) -> Vec<C64> {
    let rng = CounterRng::new(seed, 99);
    (0..n).map(|k| C64::new(rng.uniform(2 * k as u64, -1.0, 1.0), rng.uniform(2 * k as u64 + 1, -1.0, 1.0))).collect()
}

fn delta(n: usize, at: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); n];
    v[at] = C64::new(1.0, 0.0);
    v
}

#[test]
fn green_bulk_and_boundary_match_dense_sums() {
    let domain = LatticeDomain::build_box(2, 6).unwrap();
    let op = SparseHermitianOperator::assemble(&domain, &PotentialSpec::Anderson { disorder: 3.0, seed: 4 }).unwrap();
    let h = dense(&op);
    let n = domain.len();
    for trial in 0..20u64 {
        let rng = CounterRng::new(trial, 7);
        let f: Vec<f64> = (0..n).map(|k| rng.uniform(k as u64, -1.0, 1.0)).collect();
        let g: Vec<f64> = (0..n).map(|k| rng.uniform((n + k) as u64, -1.0, 1.0)).collect();
        let set: Vec<usize> = (0..n).filter(|&k| rng.unit((3 * n + k) as u64) < 0.5).collect();
        let check = green_formula_residual(&op, &f, &g, &set).unwrap();

        let (fv, gv) = (DVector::from_vec(f.clone()), DVector::from_vec(g.clone()));
        let (hf, hg) = (&h * &fv, &h * &gv);
        let bulk: f64 = set.iter().map(|&i| hf[i] * g[i] - f[i] * hg[i]).sum();
        let mut inside = vec![false; n];
        set.iter().for_each(|&i| inside[i] = true);
        let mut edge = 0.0;
        for &i in &set {
            for &j in domain.neighbors(i) {
                if !inside[j] {
                    edge += f[j] * g[i] - f[i] * g[j];
                }
            }
        }
        assert!((check.bulk - bulk).abs() < 1e-12, "bulk {} vs {}", check.bulk, bulk);
        assert!((check.wronskian - edge).abs() < 1e-12, "wronskian {} vs {}", check.wronskian, edge);
        assert!(check.relative() < 1e-13);
    }
}

#[test]
fn resolvent_matches_dense_inverse() {
    let cases = [
        LatticeDomain::build_half_line(60).unwrap(),
        LatticeDomain::build_box(2, 5).unwrap(),
        LatticeDomain::build_spiral(2).unwrap(),
    ];
    for (c, domain) in cases.iter().enumerate() {
        let op = SparseHermitianOperator::assemble(domain, &PotentialSpec::Anderson { disorder: 2.0, seed: c as u64 }).unwrap();
        let n = op.dim();
        let hc = dense(&op).map(|x| C64::new(x, 0.0));
        for (k, z) in [C64::new(0.3, 0.05), C64::new(-1.7, 0.5), C64::new(2.5, 1e-3)].into_iter().enumerate() {
            let phi = random_state(n, (10 * c + k) as u64);
            let sol = resolvent_solve(&op, z, &phi).unwrap();
            let shifted = &hc - DMatrix::<C64>::identity(n, n) * z;
            let oracle = shifted.lu().solve(&DVector::from_vec(phi.clone())).unwrap();
            let err = sol.theta.iter().zip(oracle.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let scale = oracle.iter().map(|x| x.norm()).fold(0.0, f64::max);
            assert!(err <= 1e-10 * scale, "case {c} z={z}: {err:e}");
            assert!(lemma21_residual(&op, z, &phi).unwrap() < 1e-10);
        }
    }
}

#[test]
fn spectral_measure_matches_dense_eigendecomposition() {
    let domain = LatticeDomain::build_half_line(150).unwrap();
    let op = SparseHermitianOperator::assemble(&domain, &PotentialSpec::RandomDecaying { coupling: 1.0, seed: 2 }).unwrap();
    let phi = delta(op.dim(), 0);
    let measure = finite_spectral_measure(&op, &phi).unwrap();
    let eig = SymmetricEigen::new(dense(&op));
    let mut pairs: Vec<(f64, f64)> = (0..op.dim()).map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ours: Vec<(f64, f64)> = measure.eigenvalues.iter().copied().zip(measure.weights.iter().copied()).collect();
    ours.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert_eq!(ours.len(), pairs.len());
    for (a, b) in ours.iter().zip(&pairs) {
        assert!((a.0 - b.0).abs() < 1e-11 && (a.1 - b.1).abs() < 1e-11, "{a:?} vs {b:?}");
    }
    assert!((measure.mass - 1.0).abs() < 1e-12);

    // sum rule: F(z) = Σ w_k / (λ_k − z)
    for z in [C64::new(0.1, 0.2), C64::new(-1.0, 0.01)] {
        let f = borel_transform(&op, z, &phi).unwrap();
        let s: C64 = pairs.iter().map(|&(l, w)| C64::new(w, 0.0) / (C64::new(l, 0.0) - z)).sum();
        assert!((f - s).norm() < 1e-10 * s.norm());
    }
}

#[test]
fn three_site_chain_closed_forms() {
    let domain = LatticeDomain::build_half_line(3).unwrap();
    let op = SparseHermitianOperator::assemble(&domain, &PotentialSpec::Free).unwrap();
    let middle = domain.index_of(&[2, 0, 0]).unwrap();
    let phi = delta(3, middle);
    let m = finite_spectral_measure(&op, &phi).unwrap();
    let mut pairs: Vec<(f64, f64)> = m.eigenvalues.iter().copied().zip(m.weights.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let r2 = 2f64.sqrt();
    for ((l, w), (el, ew)) in pairs.iter().zip([(-r2, 0.5), (0.0, 0.0), (r2, 0.5)]) {
        assert!((l - el).abs() < 1e-14 && (w - ew).abs() < 1e-14, "({l}, {w})");
    }
    // ⟨δ₂, (h − z)^{-1} δ₂⟩ = −z / (z² − 2)
    for z in [C64::new(0.4, 0.3), C64::new(-3.0, 1e-4), C64::new(0.0, 2.0)] {
        let f = borel_transform(&op, z, &phi).unwrap();
        let exact = -z / (z * z - 2.0);
        assert!((f - exact).norm() < 1e-13 * exact.norm(), "{f} vs {exact}");
    }
}

#[test]
fn propagation_matches_dense_exponential() {
    let cases: Vec<(LatticeDomain, PotentialSpec, f64)> = vec![
        (LatticeDomain::build_half_line(200).unwrap(), PotentialSpec::Free, 30.0),
        (LatticeDomain::build_half_line(300).unwrap(), PotentialSpec::RandomDecaying { coupling: 1.0, seed: 1 }, 25.0),
        (LatticeDomain::build_half_line(400).unwrap(), PotentialSpec::Anderson { disorder: 4.0, seed: 2 }, 40.0),
        (LatticeDomain::build_box(1, 150).unwrap(), PotentialSpec::Periodic(vec![0.5, -0.5]), 20.0),
        (LatticeDomain::build_box(2, 8).unwrap(), PotentialSpec::Free, 6.0),
        (LatticeDomain::build_box(2, 9).unwrap(), PotentialSpec::Anderson { disorder: 1.0, seed: 3 }, 12.5),
        (LatticeDomain::build_box(3, 3).unwrap(), PotentialSpec::Free, 3.0),
        (LatticeDomain::build_spiral(3).unwrap(), PotentialSpec::Free, 17.3),
        (LatticeDomain::build_spiral(4).unwrap(), PotentialSpec::RandomDecaying { coupling: 2.0, seed: 5 }, 9.0),
        (LatticeDomain::build_half_line(100).unwrap(), PotentialSpec::Anderson { disorder: 10.0, seed: 6 }, 100.0),
    ];
    for (c, (domain, potential, t)) in cases.iter().enumerate() {
        assert!(domain.len() <= 400);
        let op = SparseHermitianOperator::assemble(domain, potential).unwrap();
        let psi0 = random_state(op.dim(), c as u64 + 100);
        let ours = evolve_unguarded(&op, &psi0, *t).unwrap();

        let eig = SymmetricEigen::new(dense(&op));
        let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
        let coeff = v.adjoint() * DVector::from_vec(psi0.clone());
        let phase = DVector::from_iterator(op.dim(), (0..op.dim()).map(|k| C64::from_polar(1.0, -eig.eigenvalues[k] * t) * coeff[k]));
        let oracle = &v * phase;
        let err = ours.iter().zip(oracle.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "case {c}: {err:e}");
    }
}

#[test]
fn transfer_product_matches_explicit_product() {
    let potential = PotentialSpec::RandomDecaying { coupling: 1.5, seed: 11 };
    let n = 400u64;
    let grid = checkpoint_grid(10.0, 1.25, n);
    for energy in [0.0, 0.7, -1.9, 2.5] {
        let t = transfer_product(energy, &potential, n, &grid).unwrap();
        let mut m = Matrix2::identity();
        let mut log_scale = 0.0;
        for k in 1..=n {
            let a = energy - potential.eval_half_line(k).unwrap();
            m = Matrix2::new(a, -1.0, 1.0, 0.0) * m;
            let s = m.norm();
            m /= s;
            log_scale += s.ln();
        }
        let oracle = m.svd(false, false).singular_values.max().ln() + log_scale;
        assert!((t.log_norm() - oracle).abs() < 1e-9, "E={energy}: {} vs {oracle}", t.log_norm());
        // det is recovered from a renormalized, nearly rank-one matrix, so
        // its rounding scales with ‖T‖²
        let norm_sq = (2.0 * t.log_norm()).exp();
        assert!((t.determinant() - 1.0).abs() < 1e-12 * norm_sq.max(1.0), "E={energy}: det {}", t.determinant());
        let last = t.checkpoints.last().unwrap();
        assert_eq!(last.n, n);
        assert!((last.log_norm() - oracle).abs() < 1e-9);
    }
}

#[test]
fn growth_closed_forms() {
    assert!((kls_growth_exponent(1.0, 0.0) - 0.125).abs() < 1e-15);
    assert!((kls_growth_exponent(1.0, 1.0) - 1.0 / 6.0).abs() < 1e-15);
    assert!((kls_dimension(1.0, 0.0) - 0.75).abs() < 1e-15);
    assert!((kls_dimension(1.0, 0.5) - (4.0 - 0.25 - 1.0) / 3.75).abs() < 1e-15);
}

#[test]
fn free_and_spiral_plane_waves() {
    let line = LatticeDomain::build_half_line(5000).unwrap();
    let op = SparseHermitianOperator::assemble(&line, &PotentialSpec::Free).unwrap();
    let radii: Vec<f64> = (0..16).map(|j| 10.0 * 400f64.powf(j as f64 / 15.0)).collect();
    for e in [-1.5, 0.0, 0.9] {
        let u = analytic_solution(AnalyticModel::Free1D, e, &line).unwrap();
        assert!(eigen_residual(&op, &u).unwrap() < 1e-12);
        let g = growth_exponent(&u, &line, &radii).unwrap();
        assert!((g.exponent() - 1.0).abs() < 0.05, "E={e}: {}", g.exponent());
    }

    let spiral = LatticeDomain::build_spiral(60).unwrap();
    let op = SparseHermitianOperator::assemble(&spiral, &PotentialSpec::Free).unwrap();
    let u = analytic_solution(AnalyticModel::Spiral, 0.0, &spiral).unwrap();
    // sin(k p) with k p up to ~5·10⁴ carries ~1e-11 rounding
    let res = eigen_residual(&op, &u).unwrap();
    assert!(res < 1e-10, "spiral residual {res:e}");
    let r_max = spiral.truncation_radius() as f64 - 2.0;
    let radii: Vec<f64> = (0..12).map(|j| 8.0 * (r_max / 8.0).powf(j as f64 / 11.0)).collect();
    let g = growth_exponent(&u, &spiral, &radii).unwrap();
    assert!((g.exponent() - 2.0).abs() < 0.1, "spiral exponent {}", g.exponent());
}

#[test]
fn stark_envelope_quarter_power() {
    for e in [0.0, -3.0] {
        let s = stark_envelope(e, 1e4, 0.04 / (1e4f64 + e.abs()).sqrt()).unwrap();
        assert!((s.slope + 0.25).abs() < 0.02, "E={e}: {}", s.slope);
    }
}
