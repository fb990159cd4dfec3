//! Assembly of `h_v^Ω f(n) = Σ_{|m−n|=1, m∈Ω} f(m) + v(n) f(n)` with
//! Dirichlet conditions, and the discrete Green formula.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::{LatticeDomain, Site};
use crate::linalg::{norm_real, tridiagonal_eigen};
use crate::potentials::PotentialSpec;
use crate::C64;

/// Real-symmetric CSR matrix over a lattice domain. Off-diagonal entries
/// are exactly `1` on adjacency edges; the diagonal carries the potential.
#[derive(Debug, Clone)]
pub struct SparseHermitianOperator<'a> {
    domain: &'a LatticeDomain,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
    bounds: (f64, f64),
}

impl<'a> SparseHermitianOperator<'a> {
    pub fn assemble(domain: &'a LatticeDomain, potential: &PotentialSpec) -> Result<Self> {
        let diag = domain
            .sites()
            .iter()
            .map(|s| {
                let v = potential.eval(s)?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinitePotential { site: *s })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::with_diagonal(domain, diag)
    }

    /// Assembles with an explicit on-site array (index order of `domain`).
    pub fn with_diagonal(domain: &'a LatticeDomain, diag: Vec<f64>) -> Result<Self> {
        let n = domain.len();
        if diag.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: diag.len() });
        }
        if let Some(i) = diag.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinitePotential { site: domain.site(i) });
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(n + 2 * domain.edge_count());
        let mut vals = Vec::with_capacity(cols.capacity());
        row_ptr.push(0);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let nb = domain.neighbors(i);
            let split = nb.partition_point(|&j| j < i);
            for &j in &nb[..split] {
                cols.push(j);
                vals.push(1.0);
            }
            cols.push(i);
            vals.push(diag[i]);
            for &j in &nb[split..] {
                cols.push(j);
                vals.push(1.0);
            }
            row_ptr.push(cols.len());
            let radius = nb.len() as f64;
            lo = lo.min(diag[i] - radius);
            hi = hi.max(diag[i] + radius);
        }
        Ok(Self { domain, row_ptr, cols, vals, diag, bounds: (lo, hi) })
    }

    pub fn domain(&self) -> &'a LatticeDomain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Gershgorin enclosure `[b_min, b_max]` of the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    /// Stored entry, zero when absent.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    /// All stored entries `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim()).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// Largest `|i − j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.triplets().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
    }

    pub fn apply(&self, f: &[C64]) -> Result<Vec<C64>> {
        self.check_len(f.len())?;
        let mut out = vec![C64::zero(); f.len()];
        self.apply_into(f, &mut out);
        Ok(out)
    }

    /// `out = h f` without length checks.
    #[inline]
    pub fn apply_into(&self, f: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = C64::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += f[self.cols[k]] * self.vals[k];
            }
            *o = acc;
        }
    }

    pub fn apply_real(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f.len())?;
        Ok((0..f.len())
            .map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| f[self.cols[k]] * self.vals[k]).sum())
            .collect())
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len == self.dim() {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: self.dim(), got: len })
        }
    }

    /// Jacobi form of the operator read along `order`: `Some((diag, off))`
    /// when `h` is exactly tridiagonal under that permutation.
    pub fn unrolled_jacobi(&self, order: &[usize]) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        if order.len() != n {
            return None;
        }
        let mut pos = vec![usize::MAX; n];
        for (p, &i) in order.iter().enumerate() {
            pos[i] = p;
        }
        let mut off = vec![0.0; n.saturating_sub(1)];
        for (i, j, v) in self.triplets() {
            let (pi, pj) = (pos[i], pos[j]);
            match pi.abs_diff(pj) {
                0 => {}
                1 => off[pi.min(pj)] = v,
                _ => return None,
            }
        }
        Some((order.iter().map(|&i| self.diag[i]).collect(), off))
    }

    /// Ritz values after `steps` Lanczos iterations (full
    /// reorthogonalization) from `start`.
    pub fn ritz_values(&self, start: &[f64], steps: usize) -> Result<Vec<f64>> {
        self.check_len(start.len())?;
        let n0 = norm_real(start);
        if n0 == 0.0 {
            return Err(Error::InvalidArgument("Lanczos start vector is zero"));
        }
        let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|x| x / n0).collect()];
        let (mut alpha, mut beta) = (Vec::new(), Vec::new());
        for k in 0..steps.min(self.dim()) {
            let mut w = self.apply_real(&basis[k])?;
            let a: f64 = w.iter().zip(&basis[k]).map(|(x, y)| x * y).sum();
            alpha.push(a);
            for _ in 0..2 {
                for q in &basis {
                    let c: f64 = w.iter().zip(q).map(|(x, y)| x * y).sum();
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = norm_real(&w);
            if k + 1 == steps.min(self.dim()) || b < 1e-12 {
                break;
            }
            beta.push(b);
            basis.push(w.into_iter().map(|x| x / b).collect());
        }
        tridiagonal_eigen(&alpha, &beta, &mut [])
    }
}

fn membership(n: usize, set: &[usize]) -> Result<Vec<bool>> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("site subset S is empty"));
    }
    let mut mask = vec![false; n];
    for &i in set {
        if i >= n {
            return Err(Error::InvalidArgument("site subset index out of range"));
        }
        mask[i] = true;
    }
    Ok(mask)
}

/// `w_∂S[f,g] = Σ_{m∈∂S} ( f(m) Σ_{l∈N_S(m)} g(l) − g(m) Σ_{l∈N_S(m)} f(l) )`
/// where `∂S` are the domain sites outside `S` with a neighbour in `S`.
pub fn discrete_wronskian(f: &[f64], g: &[f64], set: &[usize], domain: &LatticeDomain) -> Result<f64> {
    let n = domain.len();
    for len in [f.len(), g.len()] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, got: len });
        }
    }
    let inside = membership(n, set)?;
    Ok(wronskian_with_mask(f, g, &inside, domain))
}

fn wronskian_with_mask(f: &[f64], g: &[f64], inside: &[bool], domain: &LatticeDomain) -> f64 {
    let mut w = 0.0;
    for m in 0..domain.len() {
        if inside[m] {
            continue;
        }
        let (mut sg, mut sf) = (0.0, 0.0);
        for &l in domain.neighbors(m) {
            if inside[l] {
                sg += g[l];
                sf += f[l];
            }
        }
        w += f[m] * sg - g[m] * sf;
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenCheck {
    /// `Σ_{n∈S} (hf·g − f·hg)(n)`.
    pub bulk: f64,
    pub wronskian: f64,
    pub residual: f64,
    /// `‖f‖‖g‖·2d`, the scale the residual is measured against.
    pub scale: f64,
}

impl GreenCheck {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual
        } else {
            self.residual / self.scale
        }
    }
}

pub fn green_formula_residual(op: &SparseHermitianOperator<'_>, f: &[f64], g: &[f64], set: &[usize]) -> Result<GreenCheck> {
    let domain = op.domain();
    let hf = op.apply_real(f)?;
    let hg = op.apply_real(g)?;
    let inside = membership(op.dim(), set)?;
    let bulk: f64 = set.iter().map(|&i| hf[i] * g[i] - f[i] * hg[i]).sum();
    let wronskian = wronskian_with_mask(f, g, &inside, domain);
    let scale = norm_real(f) * norm_real(g) * (2 * domain.dim()) as f64;
    Ok(GreenCheck { bulk, wronskian, residual: (bulk - wronskian).abs(), scale })
}

/// Running sum `Σ_{r=1}^{R} |w_{∂C_r}[f,g]|` over cubes about `center`
/// together with the bound `d · ‖f‖_{C_{R+1}} ‖g‖_{C_{R+1}}`.
pub fn cumulative_wronskian(
    f: &[f64],
    g: &[f64],
    radius: usize,
    center: &Site,
    domain: &LatticeDomain,
) -> Result<(f64, f64)> {
    let n = domain.len();
    for len in [f.len(), g.len()] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, got: len });
        }
    }
    if radius + 1 > domain.truncation_radius() {
        return Err(Error::RadiusTooLarge { radius: (radius + 1) as f64, limit: domain.truncation_radius() });
    }
    let dist = domain.distances_from(center);
    let mut total = 0.0;
    for r in 1..=radius as u32 {
        let inside: Vec<bool> = dist.iter().map(|&d| d <= r).collect();
        total += wronskian_with_mask(f, g, &inside, domain).abs();
    }
    let (mut nf, mut ng) = (0.0, 0.0);
    for i in 0..n {
        if dist[i] <= radius as u32 + 1 {
            nf += f[i] * f[i];
            ng += g[i] * g[i];
        }
    }
    Ok((total, domain.dim() as f64 * (nf * ng).sqrt()))
}
