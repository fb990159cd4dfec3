//! Experiment driver for `spectrans-core`: TOML configs, parallel ensembles,
//! CSV/JSON artifacts and exchange formats.

pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

pub use config::{ExperimentConfig, ExperimentName};
pub use error::{LabError, LabResult};
pub use experiments::Context;
pub use output::{Gate, Report};

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub jobs: usize,
    pub seed_override: Option<u64>,
}

pub struct Outcome {
    pub report: Report,
    pub dir: PathBuf,
}

fn load(opts: &RunOptions) -> LabResult<ExperimentConfig> {
    match &opts.config {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

/// Validates, runs and writes one experiment.
pub fn execute(name: ExperimentName, opts: &RunOptions) -> LabResult<Outcome> {
    let config = load(opts)?;
    config.validate(name)?;
    let ctx = Context::new(opts.jobs, opts.seed_override)?;
    let resolved = json!({ "section": config.section_json(name), "seed_override": opts.seed_override });
    let run_id = config.run.run_id.clone().unwrap_or_else(|| output::default_run_id(&resolved));
    let start = Instant::now();
    let report = experiments::run(name, &config, &ctx)?;
    let root = output::output_root(opts.out.clone());
    let written = output::write_artifacts(&root, &run_id, resolved, &report, start.elapsed())?;
    Ok(Outcome { report, dir: written.dir })
}

/// Writes `operator.coo` and `domain.json` for the `[export]` table.
pub fn export(opts: &RunOptions) -> LabResult<PathBuf> {
    use error::AtOp;
    let config = load(opts)?;
    let e = &config.export;
    e.validate()?;
    let domain = e.domain.build()?;
    let op = spectrans_core::SparseHermitianOperator::assemble(&domain, &e.potential.spec(opts.seed_override.unwrap_or(e.seed))).at("assemble")?;
    let resolved = json!({ "export": serde_json::to_value(e)?, "seed_override": opts.seed_override });
    let run_id = config.run.run_id.clone().unwrap_or_else(|| output::default_run_id(&resolved));
    let dir = output::output_root(opts.out.clone()).join("export").join(run_id);
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |source| LabError::Io { path: p, source }
    };
    std::fs::create_dir_all(&dir).map_err(io(&dir))?;
    let coo = dir.join("operator.coo");
    std::fs::write(&coo, formats::coo_text(&op)).map_err(io(&coo))?;
    let desc = dir.join("domain.json");
    std::fs::write(&desc, serde_json::to_vec_pretty(&formats::domain_descriptor(&domain))?).map_err(io(&desc))?;
    Ok(dir)
}
