//! Property tests for structural and dynamical invariants.

use proptest::prelude::*;
use spectrans_core::dynamics::{ball_survival, evolve_unguarded, time_averaged_moments, RadiusSchedule};
use spectrans_core::eigensolutions::{checkpoint_grid, transfer_product};
use spectrans_core::linalg::norm;
use spectrans_core::operator::{cumulative_wronskian, green_formula_residual};
use spectrans_core::rng::CounterRng;
use spectrans_core::spectral::{borel_sweep, default_eps_grid};
use spectrans_core::{LatticeDomain, PotentialSpec, SparseHermitianOperator, C64};

fn potential(kind: u8, seed: u64) -> PotentialSpec {
    match kind % 4 {
        0 => PotentialSpec::Free,
        1 => PotentialSpec::RandomDecaying { coupling: 1.0, seed },
        2 => PotentialSpec::Anderson { disorder: 4.0, seed },
        _ => PotentialSpec::Periodic(vec![1.0, 0.0, -1.0]),
    }
}

fn delta_at(domain: &LatticeDomain, site: [i32; 3]) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); domain.len()];
    v[domain.index_of(&site).unwrap()] = C64::new(1.0, 0.0);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spiral_size_and_unrolling(turns in 1usize..12) {
        let d = LatticeDomain::build_spiral(turns).unwrap();
        prop_assert_eq!(d.len(), 8 * turns * turns + 4 * turns + 1);
        let order = d.unroll_spiral().unwrap();
        let mut seen = order.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..d.len()).collect::<Vec<_>>());
        let op = SparseHermitianOperator::assemble(&d, &PotentialSpec::Free).unwrap();
        let (diag, off) = op.unrolled_jacobi(&order).unwrap();
        prop_assert!(diag.iter().all(|&x| x == 0.0));
        prop_assert!(off.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn balls_are_nested(dim in 1usize..4, hw in 2usize..8, r1 in 0.0f64..8.0, r2 in 0.0f64..8.0) {
        let d = LatticeDomain::build_box(dim, hw).unwrap();
        let limit = d.truncation_radius() as f64;
        let (a, b) = (r1.min(r2).min(limit), r1.max(r2).min(limit));
        let small = d.sites_in_ball(a, &[0, 0, 0]).unwrap();
        let large = d.sites_in_ball(b, &[0, 0, 0]).unwrap();
        prop_assert!(small.iter().all(|i| large.binary_search(i).is_ok()));
        let side = 2 * (b as usize) + 1;
        prop_assert_eq!(large.len(), side.pow(dim as u32));
    }

    #[test]
    fn operator_is_symmetric_with_bounded_spectrum(kind in 0u8..4, seed in 0u64..1000, hw in 2usize..6) {
        let d = LatticeDomain::build_box(2, hw).unwrap();
        let op = SparseHermitianOperator::assemble(&d, &potential(kind, seed)).unwrap();
        for (i, j, v) in op.triplets() {
            prop_assert_eq!(op.entry(j, i), v);
        }
        let (lo, hi) = op.bounds();
        let vmax = op.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(lo >= -4.0 - vmax - 1e-12 && hi <= 4.0 + vmax + 1e-12);
    }

    #[test]
    fn potentials_are_pure(seed in any::<u64>(), x in -50i32..50, y in -50i32..50) {
        for p in [PotentialSpec::RandomDecaying { coupling: 1.0, seed }, PotentialSpec::Anderson { disorder: 2.0, seed }] {
            let a = p.eval(&[x, y, 0]).unwrap();
            prop_assert_eq!(a, p.eval(&[x, y, 0]).unwrap());
            prop_assert!(a.abs() <= 3f64.sqrt() + 1.0);
        }
    }

    #[test]
    fn green_formula_holds(seed in any::<u64>(), dim in 1usize..4, frac in 0.05f64..0.95) {
        let d = LatticeDomain::build_box(dim, if dim == 3 { 3 } else { 6 }).unwrap();
        let op = SparseHermitianOperator::assemble(&d, &PotentialSpec::Anderson { disorder: 5.0, seed }).unwrap();
        let rng = CounterRng::new(seed, 1);
        let n = d.len();
        let f: Vec<f64> = (0..n).map(|k| rng.uniform(k as u64, -1.0, 1.0)).collect();
        let g: Vec<f64> = (0..n).map(|k| rng.uniform((n + k) as u64, -1.0, 1.0)).collect();
        let set: Vec<usize> = (0..n).filter(|&k| rng.unit((2 * n + k) as u64) < frac).collect();
        let check = green_formula_residual(&op, &f, &g, &set).unwrap();
        prop_assert!(check.relative() < 1e-12);
    }

    #[test]
    fn cumulative_wronskian_is_bounded(seed in any::<u64>(), radius in 1usize..10) {
        let d = LatticeDomain::build_box(2, 12).unwrap();
        let rng = CounterRng::new(seed, 2);
        let n = d.len();
        let f: Vec<f64> = (0..n).map(|k| rng.uniform(k as u64, -1.0, 1.0)).collect();
        let g: Vec<f64> = (0..n).map(|k| rng.uniform((n + k) as u64, -1.0, 1.0)).collect();
        let (sum, bound) = cumulative_wronskian(&f, &g, radius, &[0, 0, 0], &d).unwrap();
        prop_assert!(sum <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn transfer_determinant_is_one_in_band(seed in any::<u64>(), energy in -1.9f64..1.9) {
        let p = PotentialSpec::RandomDecaying { coupling: 1.0, seed };
        let t = transfer_product(energy, &p, 2000, &checkpoint_grid(10.0, 1.5, 2000)).unwrap();
        let norm_sq = (2.0 * t.log_norm()).exp();
        prop_assert!((t.determinant() - 1.0).abs() < 1e-12 * norm_sq.max(1.0));
    }

    #[test]
    fn borel_transform_is_herglotz_with_unit_mass(seed in any::<u64>(), energy in -1.5f64..1.5) {
        let d = LatticeDomain::build_half_line(200).unwrap();
        let op = SparseHermitianOperator::assemble(&d, &PotentialSpec::RandomDecaying { coupling: 1.0, seed }).unwrap();
        let phi = delta_at(&d, [1, 0, 0]);
        let eps = default_eps_grid(1.0, d.truncation_radius(), 1.0);
        let s = borel_sweep(&op, &phi, energy, &eps, eps[eps.len() - 1]).unwrap();
        for (&e, &f) in s.eps.iter().zip(&s.im_f) {
            prop_assert!(f > 0.0 && e * f <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn evolution_is_unitary(kind in 0u8..4, seed in 0u64..1000, t in 0.0f64..30.0) {
        let d = LatticeDomain::build_half_line(120).unwrap();
        let op = SparseHermitianOperator::assemble(&d, &potential(kind, seed)).unwrap();
        let rng = CounterRng::new(seed, 3);
        let psi: Vec<C64> = (0..d.len()).map(|k| C64::new(rng.uniform(k as u64, -1.0, 1.0), 0.0)).collect();
        let out = evolve_unguarded(&op, &psi, t).unwrap();
        prop_assert!((norm(&out) - norm(&psi)).abs() < 1e-11 * norm(&psi));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn survival_partition_and_chain_inequality(kind in 0u8..3, seed in 0u64..1000, r0 in 1.0f64..20.0) {
        let d = LatticeDomain::build_half_line(300).unwrap();
        let op = SparseHermitianOperator::assemble(&d, &potential(kind, seed)).unwrap();
        let psi = delta_at(&d, [1, 0, 0]);
        let t_grid = [10.0, 20.0, 40.0, 60.0];
        let orders = [1.0, 2.0];
        let rec = ball_survival(&op, &psi, RadiusSchedule::Power { scale: r0, power: 0.5 }, &t_grid, &orders, 0.25).unwrap();
        let (inside, outside, radii) = (rec.survival.clone().unwrap(), rec.escaped.clone().unwrap(), rec.radii.clone().unwrap());
        for i in 0..t_grid.len() {
            prop_assert!((inside[i] + outside[i] - 1.0).abs() <= 2.0 * rec.norm_drift + 1e-13, "partition {} at T={}", inside[i] + outside[i] - 1.0, t_grid[i]);
            prop_assert!(inside[i] >= -1e-14 && inside[i] <= 1.0 + 1e-10);
            for (j, &m) in orders.iter().enumerate() {
                prop_assert!(rec.moments[j][i] >= radii[i].floor().powf(m) * outside[i] * (1.0 - 1e-10));
            }
        }
    }
}

#[test]
fn free_moments_grow_monotonically() {
    let d = LatticeDomain::build_box(1, 400).unwrap();
    let op = SparseHermitianOperator::assemble(&d, &PotentialSpec::Free).unwrap();
    let psi = delta_at(&d, [0, 0, 0]);
    let t_grid: Vec<f64> = (1..=20).map(|k| 5.0 * k as f64).collect();
    let rec = time_averaged_moments(&op, &psi, &t_grid, &[1.0, 2.0], 0.25).unwrap();
    for row in &rec.moments {
        assert!(row.windows(2).all(|w| w[1] > w[0]));
    }
    // time average of 2t² is (2/3)T²
    let m2 = rec.moment(2.0).unwrap();
    for (t, m) in t_grid.iter().zip(m2).skip(2) {
        assert!((m / (2.0 / 3.0 * t * t) - 1.0).abs() < 0.02, "T={t}: {m}");
    }
}
