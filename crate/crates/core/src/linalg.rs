//! Dense and banded kernels: symmetric tridiagonal QL with projected
//! eigenvector accumulation, Householder tridiagonalization, banded complex
//! LU with partial pivoting, and COCG for complex-symmetric systems.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::C64;

/// Eigenvalues of the symmetric tridiagonal matrix `(diag, off)` by implicit
/// QL. Each vector in `rows` is expressed in the tridiagonal basis on entry
/// and holds its overlaps with the eigenvectors on return, i.e.
/// `rows[r][k] = ⟨ψ_k, y_r⟩`. Output is sorted ascending, with the rows
/// permuted to match.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], rows: &mut [Vec<f64>]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::InvalidArgument("off-diagonal must have length n - 1"));
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("projected rows must have length n"));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence { residual: e[l].abs(), iterations: iter });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in rows.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let sorted = order.iter().map(|&k| d[k]).collect();
    for row in rows.iter_mut() {
        let permuted: Vec<f64> = order.iter().map(|&k| row[k]).collect();
        *row = permuted;
    }
    Ok(sorted)
}

/// Reduces the dense symmetric `a` (row-major, `n × n`) to tridiagonal form
/// `Qᵀ a Q` with Householder reflections, applying `Qᵀ` to every vector in
/// `rows`. Returns `(diag, off)`; `a` is overwritten.
pub fn householder_tridiagonalize(a: &mut [f64], n: usize, rows: &mut [Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(a.len(), n * n);
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let norm = (lo..n).map(|i| a[i * n + k] * a[i * n + k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            off[k] = 0.0;
            continue;
        }
        let x0 = a[lo * n + k];
        let alpha = -norm.copysign(x0);
        for i in lo..n {
            v[i] = a[i * n + k];
        }
        v[lo] -= alpha;
        let vnorm = (lo..n).map(|i| v[i] * v[i]).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            off[k] = x0;
            continue;
        }
        for i in lo..n {
            v[i] /= vnorm;
        }
        for i in lo..n {
            p[i] = (lo..n).map(|j| a[i * n + j] * v[j]).sum();
        }
        let kk: f64 = (lo..n).map(|i| v[i] * p[i]).sum();
        for i in lo..n {
            p[i] = 2.0 * (p[i] - kk * v[i]);
        }
        for i in lo..n {
            for j in lo..n {
                a[i * n + j] -= v[i] * p[j] + p[i] * v[j];
            }
        }
        for i in lo + 1..n {
            a[i * n + k] = 0.0;
            a[k * n + i] = 0.0;
        }
        a[lo * n + k] = alpha;
        a[k * n + lo] = alpha;
        off[k] = alpha;
        for y in rows.iter_mut() {
            let dot: f64 = (lo..n).map(|i| v[i] * y[i]).sum();
            for i in lo..n {
                y[i] -= 2.0 * dot * v[i];
            }
        }
    }
    if n >= 2 {
        off[n - 2] = a[(n - 1) * n + n - 2];
    }
    let diag = (0..n).map(|i| a[i * n + i]).collect();
    (diag, off)
}

/// LU factorization with partial pivoting of a complex band matrix with
/// `kl` sub- and `ku` super-diagonals, in LAPACK band layout.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<C64>,
    piv: Vec<usize>,
}

impl BandLu {
    /// Number of stored entries needed for an `n × n` band of half-width `b`.
    pub fn storage(n: usize, b: usize) -> usize {
        n * (3 * b + 1)
    }

    /// `entries` yields `(row, col, value)`; entries outside the band are an
    /// error. Duplicates are summed.
    pub fn factor(n: usize, kl: usize, ku: usize, entries: impl IntoIterator<Item = (usize, usize, C64)>) -> Result<Self> {
        let ldab = 2 * kl + ku + 1;
        let mut lu = Self { n, kl, ku, ldab, ab: vec![C64::zero(); ldab * n], piv: vec![0; n] };
        for (i, j, v) in entries {
            if i >= n || j >= n || i + ku < j || j + kl < i {
                return Err(Error::InvalidArgument("band entry outside declared bandwidth"));
            }
            let at = lu.at(i, j);
            lu.ab[at] += v;
        }
        lu.decompose()?;
        Ok(lu)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        j * self.ldab + (self.kl + self.ku + i - j)
    }

    fn decompose(&mut self) -> Result<()> {
        let n = self.n;
        let ku_eff = self.kl + self.ku;
        for j in 0..n {
            let last = (j + self.kl).min(n - 1);
            let mut p = j;
            let mut best = self.ab[self.at(j, j)].norm_sqr();
            for i in j + 1..=last {
                let m = self.ab[self.at(i, j)].norm_sqr();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            self.piv[j] = p;
            if best == 0.0 {
                return Err(Error::NoConvergence { residual: f64::INFINITY, iterations: j });
            }
            let cmax = (j + ku_eff).min(n - 1);
            if p != j {
                for c in j..=cmax {
                    let (a, b) = (self.at(j, c), self.at(p, c));
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.at(j, j)];
            for i in j + 1..=last {
                let a = self.at(i, j);
                self.ab[a] /= pivot;
            }
            for c in j + 1..=cmax {
                let u = self.ab[self.at(j, c)];
                if u.is_zero() {
                    continue;
                }
                for i in j + 1..=last {
                    let l = self.ab[self.at(i, j)];
                    let a = self.at(i, c);
                    self.ab[a] -= l * u;
                }
            }
        }
        Ok(())
    }

    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            for i in j + 1..=(j + self.kl).min(n - 1) {
                b[i] -= self.ab[self.at(i, j)] * bj;
            }
        }
        let ku_eff = self.kl + self.ku;
        for j in (0..n).rev() {
            b[j] /= self.ab[self.at(j, j)];
            let bj = b[j];
            for i in j.saturating_sub(ku_eff)..j {
                b[i] -= self.ab[self.at(i, j)] * bj;
            }
        }
    }
}

/// Conjugate-orthogonal CG for complex-symmetric `A x = b`, with `A` given
/// as an operator. Stops when `‖b − A x‖ ≤ tol · ‖b‖`.
pub fn cocg(
    apply: impl Fn(&[C64], &mut [C64]),
    b: &[C64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<C64>> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![C64::zero(); n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut q = vec![C64::zero(); n];
    let mut rho = dot_u(&r, &r);
    for it in 0..max_iter {
        apply(&p, &mut q);
        let mu = dot_u(&p, &q);
        if mu.norm() == 0.0 {
            return Err(Error::NoConvergence { residual: norm(&r) / bnorm, iterations: it });
        }
        let alpha = rho / mu;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        let res = norm(&r) / bnorm;
        if res <= tol {
            return Ok(x);
        }
        let rho_new = dot_u(&r, &r);
        let beta = rho_new / rho;
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
    }
    Err(Error::NoConvergence { residual: norm(&r) / bnorm, iterations: max_iter })
}

/// Unconjugated bilinear form `Σ a_k b_k`.
#[inline]
pub fn dot_u(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hermitian inner product `⟨a, b⟩ = Σ a_k conj(b_k)` (linear in `a`).
#[inline]
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

#[inline]
pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[inline]
pub fn norm_real(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
