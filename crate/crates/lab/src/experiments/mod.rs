//! One module per experiment. Each returns a [`Report`]; writing artifacts
//! is left to the caller.

use rayon::prelude::*;
use rayon::ThreadPool;
use spectrans_core::{LatticeDomain, C64};

use crate::config::{DomainConfig, ExperimentConfig, ExperimentName};
use crate::error::{LabError, LabResult};
use crate::output::Report;

pub mod borel;
pub mod dalpha;
pub mod green;
pub mod growth;
pub mod kls;
pub mod spiral;
pub mod stark;
pub mod transport;

/// Execution settings that must not change any payload.
pub struct Context {
    pool: ThreadPool,
    pub seed_override: Option<u64>,
}

impl Context {
    /// `jobs = 0` uses rayon's default thread count.
    pub fn new(jobs: usize, seed_override: Option<u64>) -> LabResult<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
        Ok(Self { pool, seed_override })
    }

    /// Ordered parallel map; the first error in input order wins.
    pub fn map<T, U, F>(&self, items: &[T], f: F) -> LabResult<Vec<U>>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> LabResult<U> + Sync + Send,
    {
        let results: Vec<LabResult<U>> = self.pool.install(|| items.par_iter().map(&f).collect());
        results.into_iter().collect()
    }
}

pub fn run(name: ExperimentName, config: &ExperimentConfig, ctx: &Context) -> LabResult<Report> {
    config.validate(name)?;
    match name {
        ExperimentName::GreenCheck => green::run(&config.green_check, ctx),
        ExperimentName::Growth => growth::run(&config.growth, ctx),
        ExperimentName::SpiralCompare => spiral::run(&config.spiral_compare, ctx),
        ExperimentName::KlsExponent => kls::run(&config.kls_exponent, ctx),
        ExperimentName::Borel => borel::run(&config.borel, ctx),
        ExperimentName::Dalpha => dalpha::run(&config.dalpha, ctx),
        ExperimentName::Transport => transport::run(&config.transport, ctx),
        ExperimentName::StarkEnvelope => stark::run(&config.stark_envelope, ctx),
    }
}

pub(crate) fn domain_label(d: &DomainConfig) -> String {
    match *d {
        DomainConfig::Box { dim, half_width } => format!("box({dim},{half_width})"),
        DomainConfig::HalfLine { length } => format!("half-line({length})"),
        DomainConfig::Spiral { turns } => format!("spiral({turns})"),
    }
}

/// Unit vector at the origin when it is a site, else at the first site.
pub(crate) fn origin_delta(domain: &LatticeDomain) -> (usize, Vec<C64>) {
    let i = domain.index_of(&[0; 3]).unwrap_or(0);
    let mut v = vec![C64::new(0.0, 0.0); domain.len()];
    v[i] = C64::new(1.0, 0.0);
    (i, v)
}

/// `count` geometric points from `first` to `last` inclusive.
pub(crate) fn geometric_span(first: f64, last: f64, count: usize) -> Vec<f64> {
    let ratio = (last / first).powf(1.0 / (count - 1) as f64);
    (0..count).map(|j| if j + 1 == count { last } else { first * ratio.powi(j as i32) }).collect()
}

pub(crate) fn fmt_range(r: (f64, f64)) -> String {
    format!("[{}, {}]", r.0, r.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_hits_endpoints() {
        let g = geometric_span(10.0, 1000.0, 3);
        assert_eq!(g[0], 10.0);
        assert!((g[1] - 100.0).abs() < 1e-12);
        assert_eq!(g[2], 1000.0);
    }

    #[test]
    fn ordered_map_reports_first_error() {
        let ctx = Context::new(2, None).unwrap();
        let items: Vec<u32> = (0..50).collect();
        let out = ctx.map(&items, |&x| Ok(x * 2)).unwrap();
        assert_eq!(out, (0..50).map(|x| x * 2).collect::<Vec<_>>());
        let err = ctx.map(&items, |&x| if x % 7 == 3 { Err(LabError::Config(x.to_string())) } else { Ok(x) });
        assert!(matches!(err, Err(LabError::Config(s)) if s == "3"));
    }
}
