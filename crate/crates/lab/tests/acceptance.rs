//! Acceptance suite: runs every experiment with its reference configuration
//! and prints one PASS/FAIL line per criterion. Exits non-zero on any FAIL.

use std::process::ExitCode;
use std::time::Instant;

use spectrans::config::{ExperimentConfig, ExperimentName, Seeds};
use spectrans::{experiments, Context, Report};

struct Criterion {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn gates_matching(report: &Report, pred: impl Fn(&str) -> bool) -> Vec<&spectrans::Gate> {
    report.gates.iter().filter(|g| pred(&g.name)).collect()
}

fn criterion(name: &'static str, report: &Report, pred: impl Fn(&str) -> bool) -> Criterion {
    let gates = gates_matching(report, pred);
    let passed = !gates.is_empty() && gates.iter().all(|g| g.passed);
    let detail = if gates.is_empty() {
        "no gates produced".to_string()
    } else {
        gates.iter().map(|g| format!("[{}] {}: {}", if g.passed { "ok" } else { "x" }, g.name, g.detail)).collect::<Vec<_>>().join("; ")
    };
    Criterion { name, passed, detail }
}

fn run(name: ExperimentName, config: &ExperimentConfig, jobs: usize) -> Report {
    let ctx = Context::new(jobs, None).expect("thread pool");
    let start = Instant::now();
    let report = experiments::run(name, config, &ctx).unwrap_or_else(|e| panic!("{}: {e}", name.as_str()));
    eprintln!("  ran {} in {:.1}s", name.as_str(), start.elapsed().as_secs_f64());
    report
}

fn determinism() -> Criterion {
    let mut config = ExperimentConfig::default();
    config.green_check.triples = 50;
    config.green_check.wronskian_pairs = 20;
    config.green_check.resolvent_triples = 10;
    config.kls_exponent.n_max = 20_000;
    config.kls_exponent.seeds = Seeds::range(6, 0);
    let mut mismatched = Vec::new();
    for name in [ExperimentName::GreenCheck, ExperimentName::KlsExponent] {
        let a = run(name, &config, 1).table.to_csv().expect("csv");
        let b = run(name, &config, 2).table.to_csv().expect("csv");
        let c = run(name, &config, 2).table.to_csv().expect("csv");
        if a != b || b != c {
            mismatched.push(name.as_str());
        }
    }
    Criterion {
        name: "determinism (jobs 1 vs 2, byte-identical tables)",
        passed: mismatched.is_empty(),
        detail: if mismatched.is_empty() { "green-check, kls-exponent identical".into() } else { format!("differs: {mismatched:?}") },
    }
}

fn main() -> ExitCode {
    let config = ExperimentConfig::default();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());

    let green = run(ExperimentName::GreenCheck, &config, jobs);
    let growth = run(ExperimentName::Growth, &config, jobs);
    let spiral = run(ExperimentName::SpiralCompare, &config, jobs);
    let kls = run(ExperimentName::KlsExponent, &config, jobs);
    let borel = run(ExperimentName::Borel, &config, jobs);
    let dalpha = run(ExperimentName::Dalpha, &config, jobs);
    let transport = run(ExperimentName::Transport, &config, jobs);
    let stark = run(ExperimentName::StarkEnvelope, &config, jobs);

    let mut growth_both = criterion("generalized eigenfunction growth (free, spiral)", &growth, |n| n == "free-growth");
    let spiral_growth = criterion("", &spiral, |n| n == "spiral-growth");
    growth_both.passed &= spiral_growth.passed;
    growth_both.detail = format!("{}; {}", growth_both.detail, spiral_growth.detail);

    let criteria = vec![
        criterion("discrete Green formula", &green, |n| n == "green-formula"),
        criterion("cumulative Wronskian bound", &green, |n| n == "cumulative-wronskian"),
        criterion("resolvent identity", &green, |n| n == "resolvent-identity"),
        criterion("spiral Jacobi identity", &spiral, |n| n == "spiral-jacobi-identity"),
        growth_both,
        criterion("random decaying growth exponent", &kls, |n| n.starts_with("exponent ")),
        criterion("random decaying local dimension", &kls, |n| n.starts_with("dimension ")),
        criterion("Borel scaling (atom, free, sum rule, Herglotz)", &borel, |n| ["atomic", "free-sigma", "sum-rule", "herglotz-mass"].contains(&n)),
        criterion("Borel scaling (random decaying)", &borel, |n| n.starts_with("kls-")),
        criterion("α-derivative mass and bridge constants", &dalpha, |_| true),
        criterion("free transport ((2/3)T² law, β₂ = 1, dense oracle)", &transport, |n| n.starts_with("free:") && !n.ends_with("mass-partition") && !n.ends_with("chain-inequality")),
        criterion("unitarity, mass partition, chain inequality", &transport, |n| {
            n.ends_with("unitarity") || n.ends_with("mass-partition") || n.ends_with("chain-inequality")
        }),
        criterion("lower-envelope inequality", &transport, |n| n.ends_with("lower envelope")),
        criterion("β₂ trend (random decaying vs Anderson)", &transport, |n| n.contains("β₂ ≥") || n.contains("β₂ ≤")),
        criterion("Stark envelope slope", &stark, |_| true),
        determinism(),
    ];

    println!();
    for c in &criteria {
        println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
        println!("     {}", c.detail);
    }
    let failed = criteria.iter().filter(|c| !c.passed).count();
    println!("\n{} criteria, {} passed, {} failed", criteria.len(), criteria.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
