//! Model potentials: free, periodic, random decaying, Anderson and explicit
//! tables. Random variants are evaluated through [`CounterRng`], so a value
//! depends only on `(seed, site)`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::lattice::{max_dist, Site};
use crate::rng::{site_counter, CounterRng};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

const STREAM_DECAYING: u64 = 0xD1;
const STREAM_ANDERSON: u64 = 0xA7;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Free,
    /// `v(n) = values[(n_1 - 1) mod p]` along the first coordinate.
    Periodic(Vec<f64>),
    /// `v(n) = λ · n^{-1/2} · a(n)` with `a(n)` i.i.d. uniform on
    /// `[-√3, √3]`, where `n` is the max-norm distance from the origin
    /// (the site index on the half-line). `v = 0` at the origin.
    RandomDecaying { coupling: f64, seed: u64 },
    /// i.i.d. uniform on `[-W/2, W/2]`.
    Anderson { disorder: f64, seed: u64 },
    Table(BTreeMap<Site, f64>),
}

impl PotentialSpec {
    pub fn eval(&self, site: &Site) -> Result<f64> {
        match self {
            Self::Free => Ok(0.0),
            Self::Periodic(values) => {
                if values.is_empty() {
                    return Err(Error::InvalidArgument("periodic potential needs at least one value"));
                }
                let p = values.len() as i64;
                Ok(values[(site[0] as i64 - 1).rem_euclid(p) as usize])
            }
            Self::RandomDecaying { coupling, seed } => {
                Ok(decaying_value(*coupling, *seed, max_dist(site, &[0; 3]) as u64))
            }
            Self::Anderson { disorder, seed } => {
                let g = CounterRng::new(*seed, STREAM_ANDERSON);
                Ok(g.uniform(site_counter(site), -0.5 * disorder, 0.5 * disorder))
            }
            Self::Table(map) => map.get(site).copied().ok_or(Error::MissingTableEntry { site: *site }),
        }
    }

    /// Half-line convenience: `eval([n, 0, 0])`.
    pub fn eval_half_line(&self, n: u64) -> Result<f64> {
        match self {
            Self::RandomDecaying { coupling, seed } => Ok(decaying_value(*coupling, *seed, n)),
            _ => self.eval(&[n as i32, 0, 0]),
        }
    }

    /// `sup |v|` guaranteed by construction, when one exists.
    pub fn envelope(&self, n: u64) -> Option<f64> {
        match self {
            Self::Free => Some(0.0),
            Self::RandomDecaying { coupling, .. } => {
                Some(if n == 0 { 0.0 } else { coupling.abs() * SQRT3 / (n as f64).sqrt() })
            }
            Self::Anderson { disorder, .. } => Some(0.5 * disorder.abs()),
            Self::Periodic(v) => v.iter().map(|x| x.abs()).reduce(f64::max),
            Self::Table(_) => None,
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Self::RandomDecaying { .. } | Self::Anderson { .. })
    }

    /// Copy of the spec with its seed replaced (no-op for deterministic
    /// variants).
    pub fn with_seed(&self, new_seed: u64) -> Self {
        match self {
            Self::RandomDecaying { coupling, .. } => Self::RandomDecaying { coupling: *coupling, seed: new_seed },
            Self::Anderson { disorder, .. } => Self::Anderson { disorder: *disorder, seed: new_seed },
            other => other.clone(),
        }
    }
}

/// The amplitude `a(n) ∈ [-√3, √3)` of the decaying model.
#[inline]
pub fn decaying_amplitude(seed: u64, n: u64) -> f64 {
    CounterRng::new(seed, STREAM_DECAYING).uniform(n, -SQRT3, SQRT3)
}

#[inline]
fn decaying_value(coupling: f64, seed: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    coupling * decaying_amplitude(seed, n) / (n as f64).sqrt()
}

/// Streams `v(1), v(2), …` of the decaying model without re-deriving the
/// key at every site.
#[derive(Debug, Clone)]
pub struct DecayingStream {
    rng: CounterRng,
    coupling: f64,
}

impl DecayingStream {
    pub fn new(coupling: f64, seed: u64) -> Self {
        Self { rng: CounterRng::new(seed, STREAM_DECAYING), coupling }
    }

    #[inline]
    pub fn value(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.coupling * self.rng.uniform(n, -SQRT3, SQRT3) / (n as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_and_periodic() {
        assert_eq!(PotentialSpec::Free.eval(&[3, -2, 0]).unwrap(), 0.0);
        let p = PotentialSpec::Periodic(alloc::vec![1.0, -1.0]);
        assert_eq!(p.eval_half_line(5).unwrap(), 1.0);
        assert_eq!(p.eval_half_line(6).unwrap(), -1.0);
    }

    #[test]
    fn decaying_envelope_at_large_n() {
        let s = PotentialSpec::RandomDecaying { coupling: 1.0, seed: 7 };
        let v = s.eval_half_line(10_000).unwrap();
        assert!(v.abs() <= SQRT3 * 1e-2);
        assert_eq!(s.eval_half_line(0).unwrap(), 0.0);
    }

    #[test]
    fn stream_matches_potential() {
        let s = PotentialSpec::RandomDecaying { coupling: 0.7, seed: 3 };
        let st = DecayingStream::new(0.7, 3);
        for n in [1u64, 2, 99, 123_456] {
            assert_eq!(s.eval_half_line(n).unwrap().to_bits(), st.value(n).to_bits());
            assert_eq!(s.eval(&[n as i32, 0, 0]).unwrap().to_bits(), st.value(n).to_bits());
        }
    }

    #[test]
    fn table_lookup() {
        let mut m = BTreeMap::new();
        m.insert([1, 0, 0], 2.5);
        let t = PotentialSpec::Table(m);
        assert_eq!(t.eval(&[1, 0, 0]).unwrap(), 2.5);
        assert_eq!(t.eval(&[2, 0, 0]), Err(Error::MissingTableEntry { site: [2, 0, 0] }));
    }

    #[test]
    fn anderson_range_and_seed_dependence() {
        let a = PotentialSpec::Anderson { disorder: 8.0, seed: 1 };
        let b = a.with_seed(2);
        let mut differ = false;
        for x in -20..20 {
            let va = a.eval(&[x, 3, 0]).unwrap();
            assert!((-4.0..4.0).contains(&va));
            differ |= va != b.eval(&[x, 3, 0]).unwrap();
        }
        assert!(differ);
    }
}
