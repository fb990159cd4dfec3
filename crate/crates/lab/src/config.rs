//! TOML experiment configuration. Every table rejects unknown keys and every
//! field has a default, so an empty file resolves to the reference run of
//! the chosen experiment.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use spectrans_core::{LatticeDomain, PotentialSpec, Site};

use crate::error::{config_err, AtOp, LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    GreenCheck,
    Growth,
    SpiralCompare,
    KlsExponent,
    Borel,
    Dalpha,
    Transport,
    StarkEnvelope,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 8] = [
        Self::GreenCheck,
        Self::Growth,
        Self::SpiralCompare,
        Self::KlsExponent,
        Self::Borel,
        Self::Dalpha,
        Self::Transport,
        Self::StarkEnvelope,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::GreenCheck => "green-check",
            Self::Growth => "growth",
            Self::SpiralCompare => "spiral-compare",
            Self::KlsExponent => "kls-exponent",
            Self::Borel => "borel",
            Self::Dalpha => "dalpha",
            Self::Transport => "transport",
            Self::StarkEnvelope => "stark-envelope",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = LabError;
    fn from_str(s: &str) -> LabResult<Self> {
        Self::ALL.into_iter().find(|e| e.as_str() == s).ok_or_else(|| config_err(format!("unknown experiment `{s}`")))
    }
}

/// Domain generator and parameters; never an explicit site list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainConfig {
    Box { dim: usize, half_width: usize },
    HalfLine { length: usize },
    Spiral { turns: usize },
}

impl DomainConfig {
    pub fn build(&self) -> LabResult<LatticeDomain> {
        match *self {
            Self::Box { dim, half_width } => LatticeDomain::build_box(dim, half_width),
            Self::HalfLine { length } => LatticeDomain::build_half_line(length),
            Self::Spiral { turns } => LatticeDomain::build_spiral(turns),
        }
        .at("build domain")
    }

    fn validate(&self, what: &str) -> LabResult<()> {
        let ok = match *self {
            Self::Box { dim, half_width } => (1..=3).contains(&dim) && half_width >= 1,
            Self::HalfLine { length } => length >= 1,
            Self::Spiral { turns } => turns >= 1,
        };
        ok.then_some(()).ok_or_else(|| config_err(format!("{what}: invalid domain parameters {self:?}")))
    }
}

/// Potential variant; random variants take their seed from the seed list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialConfig {
    Free,
    Periodic { values: Vec<f64> },
    RandomDecaying { coupling: f64 },
    Anderson { disorder: f64 },
    Table { entries: Vec<(Site, f64)> },
}

impl PotentialConfig {
    pub fn spec(&self, seed: u64) -> PotentialSpec {
        match self {
            Self::Free => PotentialSpec::Free,
            Self::Periodic { values } => PotentialSpec::Periodic(values.clone()),
            Self::RandomDecaying { coupling } => PotentialSpec::RandomDecaying { coupling: *coupling, seed },
            Self::Anderson { disorder } => PotentialSpec::Anderson { disorder: *disorder, seed },
            Self::Table { entries } => PotentialSpec::Table(entries.iter().copied().collect::<BTreeMap<_, _>>()),
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Self::RandomDecaying { .. } | Self::Anderson { .. })
    }

    fn validate(&self, what: &str) -> LabResult<()> {
        let ok = match self {
            Self::Free => true,
            Self::Periodic { values } => !values.is_empty() && values.iter().all(|v| v.is_finite()),
            Self::RandomDecaying { coupling } => coupling.is_finite() && *coupling >= 0.0,
            Self::Anderson { disorder } => disorder.is_finite() && *disorder >= 0.0,
            Self::Table { entries } => entries.iter().all(|(_, v)| v.is_finite()),
        };
        ok.then_some(()).ok_or_else(|| config_err(format!("{what}: invalid potential {self:?}")))
    }
}

/// Either an explicit list or `count` consecutive seeds from `base`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    List(Vec<u64>),
    Range { count: usize, base: u64 },
}

impl Seeds {
    pub fn range(count: usize, base: u64) -> Self {
        Self::Range { count, base }
    }

    pub fn resolve(&self, override_base: Option<u64>) -> Vec<u64> {
        match (self, override_base) {
            (Self::List(v), None) => v.clone(),
            (Self::List(v), Some(b)) => (0..v.len() as u64).map(|i| b + i).collect(),
            (Self::Range { count, base }, o) => (0..*count as u64).map(|i| o.unwrap_or(*base) + i).collect(),
        }
    }

    fn validate(&self, what: &str) -> LabResult<()> {
        let n = match self {
            Self::List(v) => v.len(),
            Self::Range { count, .. } => *count,
        };
        (n > 0).then_some(()).ok_or_else(|| config_err(format!("{what}: seed list is empty")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenCheckConfig {
    /// Domains for the Green-formula triples, used round-robin.
    pub domains: Vec<DomainConfig>,
    pub triples: usize,
    /// Pairs for the cumulative Wronskian bound.
    pub wronskian_domain: DomainConfig,
    pub wronskian_pairs: usize,
    /// Random operators (at most this many sites) for the resolvent identity.
    pub resolvent_triples: usize,
    pub resolvent_max_sites: usize,
    pub seed: u64,
    pub green_tol: f64,
    pub resolvent_tol: f64,
}

impl Default for GreenCheckConfig {
    fn default() -> Self {
        Self {
            domains: vec![
                DomainConfig::Box { dim: 1, half_width: 30 },
                DomainConfig::Box { dim: 2, half_width: 30 },
                DomainConfig::Spiral { turns: 4 },
            ],
            triples: 1000,
            wronskian_domain: DomainConfig::Box { dim: 2, half_width: 20 },
            wronskian_pairs: 200,
            resolvent_triples: 100,
            resolvent_max_sites: 500,
            seed: 1,
            green_tol: 1e-12,
            resolvent_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthConfig {
    pub energies: Vec<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub radii: usize,
    pub exponent_range: (f64, f64),
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self {
            energies: (0..20).map(|j| -1.9 + 3.8 * (j as f64 + 0.5) / 20.0).collect(),
            r_min: 10.0,
            r_max: 1e4,
            radii: 24,
            exponent_range: (0.95, 1.05),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpiralCompareConfig {
    /// Spiral sizes for the unrolled-Jacobi identity.
    pub identity_turns: Vec<usize>,
    pub growth_turns: usize,
    pub energy: f64,
    pub r_min: f64,
    pub radii: usize,
    pub exponent_range: (f64, f64),
}

impl Default for SpiralCompareConfig {
    fn default() -> Self {
        Self { identity_turns: (1..=5).collect(), growth_turns: 200, energy: 0.0, r_min: 8.0, radii: 16, exponent_range: (1.9, 2.1) }
    }
}

/// Which per-realization statistic the exponent gate averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentEstimator {
    /// Least-squares slope of `log ‖T(n)‖` against `log n` over the tail.
    TailSlope,
    /// `log ‖T(n_max)‖ / log n_max`.
    Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KlsExponentConfig {
    pub coupling: f64,
    pub energies: Vec<f64>,
    pub n_max: u64,
    pub seeds: Seeds,
    pub estimator: ExponentEstimator,
    pub checkpoint_first: f64,
    pub checkpoint_ratio: f64,
    pub tail_power: f64,
    pub phase_grid: usize,
    pub exponent_tol: f64,
    pub dimension_tol: f64,
}

impl Default for KlsExponentConfig {
    fn default() -> Self {
        Self {
            coupling: 1.0,
            energies: vec![0.0, 0.5, -0.5, 1.0, -1.0],
            n_max: 1_000_000,
            seeds: Seeds::range(100, 0),
            estimator: ExponentEstimator::TailSlope,
            checkpoint_first: 10.0,
            checkpoint_ratio: 1.25,
            tail_power: 0.5,
            phase_grid: 64,
            exponent_tol: 0.02,
            dimension_tol: 0.04,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BorelConfig {
    pub energy: f64,
    /// Potential value of the one-site atomic check.
    pub atom: f64,
    pub free_length: usize,
    pub eps_max: f64,
    /// `ε_min = c2 / L`.
    pub c2: f64,
    pub guard_factor: f64,
    pub free_sigma_range: (f64, f64),
    pub sum_rule_tol: f64,
    pub kls_coupling: f64,
    pub kls_lengths: (usize, usize),
    pub kls_seeds: Seeds,
    pub kls_sigma_range: (f64, f64),
    pub doubling_tol: f64,
}

impl Default for BorelConfig {
    fn default() -> Self {
        Self {
            energy: 0.0,
            atom: 0.3,
            free_length: 2000,
            eps_max: 1.0,
            c2: 1.0,
            guard_factor: spectrans_core::spectral::SPACING_GUARD,
            free_sigma_range: (-0.1, 0.1),
            sum_rule_tol: 1e-8,
            kls_coupling: 1.0,
            kls_lengths: (2000, 4000),
            kls_seeds: Seeds::range(20, 0),
            kls_sigma_range: (0.15, 0.35),
            doubling_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DalphaConfig {
    pub energy: f64,
    pub length: usize,
    pub potential: PotentialConfig,
    pub seed: u64,
    pub alphas: Vec<f64>,
    pub delta_max: f64,
    pub deltas: usize,
    pub guard_factor: f64,
}

impl Default for DalphaConfig {
    fn default() -> Self {
        Self {
            energy: 0.0,
            length: 2000,
            potential: PotentialConfig::Free,
            seed: 0,
            alphas: vec![0.5, 0.75, 1.0],
            delta_max: 1.0,
            deltas: 12,
            guard_factor: spectrans_core::spectral::SPACING_GUARD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleConfig {
    Constant { radius: f64 },
    Power { scale: f64, power: f64 },
    /// `R_T = (‖ψ₁‖² T^α / (64 C₂ C₁))^{1/γ}`.
    Rt { alpha: f64, gamma: f64, psi1_norm: f64, c1: f64, c2: f64 },
}

/// Dense-propagation cross-check on a smaller copy of the case's domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseOracleConfig {
    pub domain: DomainConfig,
    pub times: Vec<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportCase {
    pub name: String,
    pub domain: DomainConfig,
    pub potential: PotentialConfig,
    #[serde(default = "one_seed")]
    pub seeds: Seeds,
    /// Geometric grid `t_first · ratio^j`, `t_count` points.
    pub t_first: f64,
    pub t_last: f64,
    pub t_count: usize,
    #[serde(default = "default_orders")]
    pub orders: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub schedule: Option<ScheduleConfig>,
    /// Relative tolerance against `⟨⟨X²⟩⟩_T = (2/3) T²`.
    #[serde(default)]
    pub free_law_tol: Option<f64>,
    /// `|β₂ − 1| ≤ tol`.
    #[serde(default)]
    pub ballistic_tol: Option<f64>,
    /// `β₂ ≥ min_beta` for at least `min_fraction` of the seeds.
    #[serde(default)]
    pub min_beta: Option<(f64, f64)>,
    #[serde(default)]
    pub max_beta: Option<f64>,
    /// Lower-envelope test: exponent `2α₁/α₂` with α from the local
    /// dimension formula, minimized over `|E| ≤ energy_window`.
    #[serde(default)]
    pub envelope: Option<EnvelopeGate>,
    #[serde(default)]
    pub dense_oracle: Option<DenseOracleConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeGate {
    pub energy_window: f64,
    pub gamma: f64,
    pub fit_range: (f64, f64),
    pub test_range: (f64, f64),
}

fn one_seed() -> Seeds {
    Seeds::range(1, 0)
}

fn default_orders() -> Vec<f64> {
    vec![1.0, 2.0]
}

fn default_dt() -> f64 {
    spectrans_core::dynamics::DEFAULT_DT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportConfig {
    pub partition_tol: f64,
    pub drift_tol: f64,
    pub case: Vec<TransportCase>,
}

impl Default for TransportConfig {
    fn default() -> Self {
        let free = TransportCase {
            name: "free".into(),
            domain: DomainConfig::Box { dim: 1, half_width: 1000 },
            potential: PotentialConfig::Free,
            seeds: one_seed(),
            t_first: 10.0,
            t_last: 200.0,
            t_count: 14,
            orders: default_orders(),
            dt: default_dt(),
            schedule: Some(ScheduleConfig::Power { scale: 1.0, power: 0.5 }),
            free_law_tol: Some(0.01),
            ballistic_tol: Some(0.03),
            min_beta: None,
            max_beta: None,
            envelope: None,
            dense_oracle: Some(DenseOracleConfig {
                domain: DomainConfig::Box { dim: 1, half_width: 200 },
                times: vec![5.0, 10.0, 20.0, 30.0, 40.0],
                tol: 1e-8,
            }),
        };
        let kls = TransportCase {
            name: "kls".into(),
            domain: DomainConfig::HalfLine { length: 2500 },
            potential: PotentialConfig::RandomDecaying { coupling: 0.5 },
            seeds: Seeds::range(10, 0),
            t_first: 10.0,
            t_last: 1000.0,
            t_count: 21,
            orders: default_orders(),
            dt: default_dt(),
            schedule: Some(ScheduleConfig::Rt { alpha: 0.85, gamma: 1.0, psi1_norm: 1.0, c1: 0.125, c2: 0.125 }),
            free_law_tol: None,
            ballistic_tol: None,
            min_beta: Some((0.8, 0.8)),
            max_beta: None,
            envelope: Some(EnvelopeGate {
                energy_window: 1.5,
                gamma: 1.0,
                fit_range: (1e2, 10f64.powf(2.5)),
                test_range: (10f64.powf(2.5), 1e3),
            }),
            dense_oracle: None,
        };
        let anderson = TransportCase {
            name: "anderson".into(),
            domain: DomainConfig::HalfLine { length: 2500 },
            potential: PotentialConfig::Anderson { disorder: 8.0 },
            seeds: one_seed(),
            t_first: 10.0,
            t_last: 1000.0,
            t_count: 21,
            orders: default_orders(),
            dt: default_dt(),
            schedule: Some(ScheduleConfig::Constant { radius: 20.0 }),
            free_law_tol: None,
            ballistic_tol: None,
            min_beta: None,
            max_beta: Some(0.1),
            envelope: None,
            dense_oracle: None,
        };
        Self { partition_tol: 1e-8, drift_tol: 1e-8, case: vec![free, kls, anderson] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StarkConfig {
    pub energies: Vec<f64>,
    pub x_max: f64,
    /// Defaults to `0.04 / sqrt(x_max + |E|)` per energy.
    pub step: Option<f64>,
    pub target: f64,
    pub slope_tol: f64,
    pub halving_tol: f64,
}

impl Default for StarkConfig {
    fn default() -> Self {
        Self { energies: vec![0.0, 5.0], x_max: 1e4, step: None, target: -0.25, slope_tol: 0.02, halving_tol: 1e-3 }
    }
}

/// Operator export: coordinate text plus domain descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportConfig {
    pub domain: DomainConfig,
    pub potential: PotentialConfig,
    pub seed: u64,
}

impl Default for ExportConfig {
    fn default() -> Self {
        Self { domain: DomainConfig::Spiral { turns: 2 }, potential: PotentialConfig::Free, seed: 0 }
    }
}

impl ExportConfig {
    pub fn validate(&self) -> LabResult<()> {
        self.domain.validate("export.domain")?;
        self.potential.validate("export.potential")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Must match the subcommand when present.
    pub experiment: Option<ExperimentName>,
    /// Output directory name; defaults to a hash of the resolved config.
    pub run_id: Option<String>,
}

/// One config file; only the table of the selected experiment is read.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunSection,
    #[serde(rename = "green-check")]
    pub green_check: GreenCheckConfig,
    pub growth: GrowthConfig,
    #[serde(rename = "spiral-compare")]
    pub spiral_compare: SpiralCompareConfig,
    #[serde(rename = "kls-exponent")]
    pub kls_exponent: KlsExponentConfig,
    pub borel: BorelConfig,
    pub dalpha: DalphaConfig,
    pub transport: TransportConfig,
    #[serde(rename = "stark-envelope")]
    pub stark_envelope: StarkConfig,
    pub export: ExportConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> LabResult<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    /// The resolved table for `name`, as JSON.
    pub fn section_json(&self, name: ExperimentName) -> serde_json::Value {
        let v = match name {
            ExperimentName::GreenCheck => serde_json::to_value(&self.green_check),
            ExperimentName::Growth => serde_json::to_value(&self.growth),
            ExperimentName::SpiralCompare => serde_json::to_value(&self.spiral_compare),
            ExperimentName::KlsExponent => serde_json::to_value(&self.kls_exponent),
            ExperimentName::Borel => serde_json::to_value(&self.borel),
            ExperimentName::Dalpha => serde_json::to_value(&self.dalpha),
            ExperimentName::Transport => serde_json::to_value(&self.transport),
            ExperimentName::StarkEnvelope => serde_json::to_value(&self.stark_envelope),
        };
        v.expect("config sections serialize")
    }

    /// Checks the selected table before any computation.
    pub fn validate(&self, name: ExperimentName) -> LabResult<()> {
        if let Some(e) = self.run.experiment {
            if e != name {
                return Err(config_err(format!("config is for `{e}`, not `{name}`")));
            }
        }
        if let Some(id) = &self.run.run_id {
            if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) || id.starts_with('.') {
                return Err(config_err("run.run_id must be a plain file name"));
            }
        }
        let positive = |x: f64, what: &str| -> LabResult<()> {
            (x.is_finite() && x > 0.0).then_some(()).ok_or_else(|| config_err(format!("{what} must be positive")))
        };
        let range = |r: (f64, f64), what: &str| -> LabResult<()> {
            (r.0.is_finite() && r.1.is_finite() && r.0 <= r.1).then_some(()).ok_or_else(|| config_err(format!("{what} must be an ordered pair")))
        };
        match name {
            ExperimentName::GreenCheck => {
                let c = &self.green_check;
                if c.domains.is_empty() {
                    return Err(config_err("green-check.domains is empty"));
                }
                for d in &c.domains {
                    d.validate("green-check.domains")?;
                }
                c.wronskian_domain.validate("green-check.wronskian_domain")?;
                if c.resolvent_max_sites < 1 {
                    return Err(config_err("green-check.resolvent_max_sites must be at least 1"));
                }
                positive(c.green_tol, "green-check.green_tol")?;
                positive(c.resolvent_tol, "green-check.resolvent_tol")?;
            }
            ExperimentName::Growth => {
                let c = &self.growth;
                if c.energies.is_empty() || c.energies.iter().any(|e| !(e.abs() < 2.0)) {
                    return Err(config_err("growth.energies must be non-empty and inside (-2, 2)"));
                }
                positive(c.r_min, "growth.r_min")?;
                positive(c.r_max - c.r_min, "growth.r_max - r_min")?;
                if c.radii < 4 {
                    return Err(config_err("growth.radii must be at least 4"));
                }
                range(c.exponent_range, "growth.exponent_range")?;
            }
            ExperimentName::SpiralCompare => {
                let c = &self.spiral_compare;
                if c.identity_turns.contains(&0) || c.growth_turns < 3 {
                    return Err(config_err("spiral-compare turns must be positive (growth_turns ≥ 3)"));
                }
                if !(c.energy.abs() < 2.0) {
                    return Err(config_err("spiral-compare.energy must lie in (-2, 2)"));
                }
                positive(c.r_min, "spiral-compare.r_min")?;
                if c.radii < 4 {
                    return Err(config_err("spiral-compare.radii must be at least 4"));
                }
                range(c.exponent_range, "spiral-compare.exponent_range")?;
            }
            ExperimentName::KlsExponent => {
                let c = &self.kls_exponent;
                if c.energies.is_empty() || c.energies.iter().any(|e| !(e.abs() < 2.0)) {
                    return Err(config_err("kls-exponent.energies must be non-empty and inside (-2, 2)"));
                }
                if c.n_max < 100 {
                    return Err(config_err("kls-exponent.n_max must be at least 100"));
                }
                c.seeds.validate("kls-exponent.seeds")?;
                positive(c.coupling, "kls-exponent.coupling")?;
                positive(c.checkpoint_first, "kls-exponent.checkpoint_first")?;
                positive(c.checkpoint_ratio - 1.0, "kls-exponent.checkpoint_ratio - 1")?;
                if !(c.tail_power > 0.0 && c.tail_power < 1.0) {
                    return Err(config_err("kls-exponent.tail_power must lie in (0, 1)"));
                }
                if c.phase_grid < 3 {
                    return Err(config_err("kls-exponent.phase_grid must be at least 3"));
                }
                positive(c.exponent_tol, "kls-exponent.exponent_tol")?;
                positive(c.dimension_tol, "kls-exponent.dimension_tol")?;
            }
            ExperimentName::Borel => {
                let c = &self.borel;
                positive(c.eps_max, "borel.eps_max")?;
                positive(c.c2, "borel.c2")?;
                positive(c.guard_factor, "borel.guard_factor")?;
                if c.free_length < 4 || c.kls_lengths.0 < 4 || c.kls_lengths.1 < 4 {
                    return Err(config_err("borel lengths must be at least 4"));
                }
                c.kls_seeds.validate("borel.kls_seeds")?;
                range(c.free_sigma_range, "borel.free_sigma_range")?;
                range(c.kls_sigma_range, "borel.kls_sigma_range")?;
                positive(c.sum_rule_tol, "borel.sum_rule_tol")?;
                positive(c.doubling_tol, "borel.doubling_tol")?;
            }
            ExperimentName::Dalpha => {
                let c = &self.dalpha;
                c.potential.validate("dalpha.potential")?;
                if c.length < 4 || c.deltas < 2 || c.alphas.is_empty() || c.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
                    return Err(config_err("dalpha: need length ≥ 4, ≥ 2 deltas and α values in [0, 1]"));
                }
                positive(c.delta_max, "dalpha.delta_max")?;
                positive(c.guard_factor, "dalpha.guard_factor")?;
            }
            ExperimentName::Transport => {
                let c = &self.transport;
                if c.case.is_empty() {
                    return Err(config_err("transport needs at least one [[transport.case]]"));
                }
                positive(c.partition_tol, "transport.partition_tol")?;
                positive(c.drift_tol, "transport.drift_tol")?;
                let mut names = std::collections::BTreeSet::new();
                for case in &c.case {
                    let what = format!("transport.case `{}`", case.name);
                    if !names.insert(case.name.as_str()) {
                        return Err(config_err(format!("{what}: duplicate name")));
                    }
                    case.domain.validate(&what)?;
                    case.potential.validate(&what)?;
                    case.seeds.validate(&what)?;
                    positive(case.t_first, &format!("{what}.t_first"))?;
                    if !(case.t_last > case.t_first) || case.t_count < 2 {
                        return Err(config_err(format!("{what}: need t_last > t_first and t_count ≥ 2")));
                    }
                    if !(case.dt > 0.0 && case.dt <= spectrans_core::dynamics::DEFAULT_DT) {
                        return Err(config_err(format!("{what}: dt must lie in (0, 0.25]")));
                    }
                    if case.orders.is_empty() || case.orders.iter().any(|m| !(*m > 0.0)) {
                        return Err(config_err(format!("{what}: moment orders must be positive")));
                    }
                    if (case.free_law_tol.is_some() || case.ballistic_tol.is_some() || case.min_beta.is_some() || case.max_beta.is_some() || case.envelope.is_some())
                        && !case.orders.contains(&2.0)
                    {
                        return Err(config_err(format!("{what}: exponent gates need moment order 2")));
                    }
                    if let Some(ScheduleConfig::Rt { alpha, gamma, psi1_norm, c1, c2 }) = case.schedule {
                        spectrans_core::dynamics::RtSchedule::new(alpha, gamma, psi1_norm, c1, c2).map_err(|e| config_err(format!("{what}: {e}")))?;
                    }
                    if let Some(e) = &case.envelope {
                        range(e.fit_range, &format!("{what}.envelope.fit_range"))?;
                        range(e.test_range, &format!("{what}.envelope.test_range"))?;
                        if !matches!(case.potential, PotentialConfig::RandomDecaying { .. }) {
                            return Err(config_err(format!("{what}: envelope gate needs the random decaying potential")));
                        }
                        positive(e.gamma, &format!("{what}.envelope.gamma"))?;
                        if !(e.energy_window > 0.0 && e.energy_window < 2.0) {
                            return Err(config_err(format!("{what}: envelope.energy_window must lie in (0, 2)")));
                        }
                    }
                    if let Some(o) = &case.dense_oracle {
                        o.domain.validate(&format!("{what}.dense_oracle"))?;
                        positive(o.tol, &format!("{what}.dense_oracle.tol"))?;
                        if o.times.iter().any(|t| !(*t >= 0.0)) {
                            return Err(config_err(format!("{what}: dense_oracle.times must be non-negative")));
                        }
                    }
                }
            }
            ExperimentName::StarkEnvelope => {
                let c = &self.stark_envelope;
                if c.energies.is_empty() || c.energies.iter().any(|e| !e.is_finite()) {
                    return Err(config_err("stark-envelope.energies must be non-empty and finite"));
                }
                if !(c.x_max >= 1e3) {
                    return Err(config_err("stark-envelope.x_max must be at least 1000"));
                }
                if let Some(h) = c.step {
                    positive(h, "stark-envelope.step")?;
                }
                positive(c.slope_tol, "stark-envelope.slope_tol")?;
                positive(c.halving_tol, "stark-envelope.halving_tol")?;
            }
        }
        Ok(())
    }
}
