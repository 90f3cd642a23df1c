//! `bht verify`: the inequality and kernel suite against a constants baseline.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use bht_core::verify::{run_suite, Drift, SuiteConfig, SuiteReport};
use serde::{Deserialize, Serialize};

use super::{manifest, Clock, Globals};
use crate::config::RawConfig;
use crate::csv::{float, Table};
use crate::error::{CliError, CliResult};
use crate::manifest::{Manifest, RunWriter};

/// Relative drift of a measured constant that fails the run.
pub const DRIFT_TOL: f64 = 0.05;

const EMBEDDED: &str = include_str!("../../baselines/verify.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub constants: BTreeMap<String, f64>,
}

impl Baseline {
    pub fn embedded() -> CliResult<Self> {
        serde_json::from_str(EMBEDDED).map_err(|e| CliError::Io(format!("embedded baseline: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read baseline {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("baseline {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyArgs {
    pub only: Option<Vec<String>>,
    pub baseline: Option<PathBuf>,
    pub no_baseline: bool,
    pub write_baseline: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct VerifyFile<'a> {
    baseline: &'a str,
    passed: bool,
    drift: &'a [Drift],
    report: &'a SuiteReport,
}

pub fn run(raw: &RawConfig, globals: &Globals, args: &VerifyArgs) -> CliResult<Manifest> {
    let clock = Clock::start();
    let mut raw = raw.clone();
    if let Some(s) = globals.seed {
        raw.verify.seed = Some(s);
    }
    let suite = raw.suite()?;
    let report = run_suite(&suite, args.only.as_deref())?;

    let (origin, baseline) = if args.no_baseline {
        ("none".to_string(), None)
    } else if let Some(p) = &args.baseline {
        (p.display().to_string(), Some(Baseline::load(p)?))
    } else if suite == SuiteConfig::default() {
        ("embedded".to_string(), Some(Baseline::embedded()?))
    } else {
        ("none (suite differs from the default)".to_string(), None)
    };
    let ran: BTreeSet<&str> = report.reports.iter().map(|r| r.id.as_str()).collect();
    let drift = baseline.as_ref().map_or_else(Vec::new, |b| {
        let relevant: BTreeMap<String, f64> = b
            .constants
            .iter()
            .filter(|(id, _)| ran.contains(id.as_str()))
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        report.drift(&relevant, DRIFT_TOL)
    });

    print_table(&report, baseline.as_ref(), &drift);

    let mut constants = Table::new(&["id", "constant", "baseline", "relative_drift"]);
    for (id, c) in &report.constants {
        let base = baseline.as_ref().and_then(|b| b.constants.get(id)).copied();
        constants.push(vec![
            id.clone(),
            float(*c),
            base.map_or_else(String::new, float),
            base.map_or_else(String::new, |b| float(c / b - 1.0)),
        ]);
    }
    let passed = report.passed() && drift.is_empty();
    let file = VerifyFile {
        baseline: &origin,
        passed,
        drift: &drift,
        report: &report,
    };
    let derived = serde_json::json!({
        "suite_n": suite.n,
        "samples": suite.samples,
        "realizations": suite.realizations,
        "only": args.only,
        "baseline": origin,
        "drift_tolerance": DRIFT_TOL,
    });
    let m = manifest("verify", &raw, vec![suite.seed], derived, &clock)?;
    let mut w = RunWriter::create(&globals.out_dir(&raw))?;
    w.write_json("verify.json", &file)?;
    w.write("constants.csv", constants.to_text().as_bytes())?;
    let m = w.finish(m)?;

    if let Some(p) = &args.write_baseline {
        let b = Baseline {
            constants: report.constants.clone(),
        };
        let mut text = serde_json::to_string_pretty(&b)?;
        text.push('\n');
        std::fs::write(p, text)
            .map_err(|e| CliError::Io(format!("cannot write baseline {}: {e}", p.display())))?;
    }

    let failures: Vec<String> = report
        .failures()
        .map(|r| format!("{} [{}]", r.id, r.case))
        .collect();
    if !failures.is_empty() {
        return Err(CliError::Verification(format!(
            "{} case(s) failed: {}",
            failures.len(),
            failures.join(", ")
        )));
    }
    if !drift.is_empty() {
        let d: Vec<String> = drift
            .iter()
            .map(|d| match d.measured {
                Some(m) => format!("{} {:.6e} vs baseline {:.6e}", d.id, m, d.baseline),
                None => format!("{} not measured (baseline {:.6e})", d.id, d.baseline),
            })
            .collect();
        return Err(CliError::Verification(format!(
            "constants drifted more than {:.0}%: {}",
            DRIFT_TOL * 100.0,
            d.join("; ")
        )));
    }
    Ok(m)
}

fn print_table(report: &SuiteReport, baseline: Option<&Baseline>, drift: &[Drift]) {
    let mut ids: Vec<&str> = Vec::new();
    for r in &report.reports {
        if !ids.contains(&r.id.as_str()) {
            ids.push(&r.id);
        }
    }
    println!(
        "{:<22} {:>6} {:>6}  {:>14}  {:>14}  status",
        "check", "cases", "pass", "constant", "baseline"
    );
    for id in ids {
        let cases: Vec<_> = report.reports.iter().filter(|r| r.id == id).collect();
        let pass = cases.iter().filter(|r| r.pass).count();
        let c = report
            .constants
            .get(id)
            .map_or_else(|| "-".into(), |c| format!("{c:.6e}"));
        let b = baseline
            .and_then(|b| b.constants.get(id))
            .map_or_else(|| "-".into(), |c| format!("{c:.6e}"));
        let drifted = drift.iter().any(|d| d.id == id);
        let status = if pass < cases.len() {
            "FAIL"
        } else if drifted {
            "DRIFT"
        } else {
            "ok"
        };
        println!(
            "{id:<22} {:>6} {pass:>6}  {c:>14}  {b:>14}  {status}",
            cases.len()
        );
    }
}
