//! `bht report`: log-log tables with BHT reference lines for an ensemble run.

use std::f64::consts::PI;
use std::path::Path;

use bht_core::analysis::{bht_prediction, BhtConvention, FieldTag};

use super::ensemble::StatsFile;
use super::{Clock, Globals};
use crate::csv::{float, Table};
use crate::error::{CliError, CliResult};
use crate::manifest::{Manifest, RunWriter};

pub const HEADER: [&str; 11] = [
    "kappa",
    "log_kappa",
    "theta_shell",
    "log_theta_shell",
    "ref_shell_slope",
    "vartheta1_tail",
    "log_vartheta1_tail",
    "bht_prediction",
    "bht_consistent",
    "ref_tail_slope",
    "in_window",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub kappa: usize,
    pub theta_shell: f64,
    /// Line of slope `2β - 3` through the first in-window shell.
    pub ref_shell_slope: f64,
    /// `E‖∇ϑ¹^{>κ}‖₂²`
    pub vartheta1_tail: f64,
    pub bht_prediction: f64,
    pub bht_consistent: f64,
    /// Line of slope `2β` through the first in-window tail value.
    pub ref_tail_slope: f64,
    pub in_window: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub rows: Vec<ReportRow>,
}

impl Bundle {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&HEADER);
        for r in &self.rows {
            let k = r.kappa as f64;
            t.push(vec![
                r.kappa.to_string(),
                float(k.ln()),
                float(r.theta_shell),
                float(r.theta_shell.ln()),
                float(r.ref_shell_slope),
                float(r.vartheta1_tail),
                float(r.vartheta1_tail.ln()),
                float(r.bht_prediction),
                float(r.bht_consistent),
                float(r.ref_tail_slope),
                r.in_window.to_string(),
            ]);
        }
        t
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let t = Table::parse(text)?;
        if t.header != HEADER {
            return Err(CliError::Io(format!(
                "unexpected report header {:?}",
                t.header
            )));
        }
        let mut rows = Vec::with_capacity(t.rows.len());
        for i in 0..t.rows.len() {
            let row = &t.rows[i];
            let kappa = row[0]
                .parse()
                .map_err(|_| CliError::Io(format!("row {}: bad kappa {:?}", i + 1, row[0])))?;
            let in_window = row[10]
                .parse()
                .map_err(|_| CliError::Io(format!("row {}: bad flag {:?}", i + 1, row[10])))?;
            rows.push(ReportRow {
                kappa,
                theta_shell: t.f64_at(i, 2)?,
                ref_shell_slope: t.f64_at(i, 4)?,
                vartheta1_tail: t.f64_at(i, 5)?,
                bht_prediction: t.f64_at(i, 7)?,
                bht_consistent: t.f64_at(i, 8)?,
                ref_tail_slope: t.f64_at(i, 9)?,
                in_window,
            });
        }
        Ok(Self { rows })
    }
}

/// Mean column of one `(field, weight)` block of `spectra.csv`, indexed by shell - 1.
pub fn spectrum_means(spectra: &Table, field: FieldTag, weight: u32) -> CliResult<Vec<f64>> {
    let (cs, cm, cf, cw) = (
        spectra.column("shell")?,
        spectra.column("mean")?,
        spectra.column("field")?,
        spectra.column("weight")?,
    );
    let (name, w) = (field.as_str(), weight.to_string());
    let mut out = Vec::new();
    for (i, r) in spectra.rows.iter().enumerate() {
        if r[cf] == name && r[cw] == w {
            let shell: usize = r[cs]
                .parse()
                .map_err(|_| CliError::Io(format!("spectra.csv row {}: bad shell", i + 1)))?;
            if shell != out.len() + 1 {
                return Err(CliError::Io(format!(
                    "spectra.csv: {name} shells out of order"
                )));
            }
            out.push(spectra.f64_at(i, cm)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Io(format!(
            "spectra.csv has no {name} w={weight} rows"
        )));
    }
    Ok(out)
}

/// Builds the bundle from the files of an ensemble run directory.
pub fn build(run_dir: &Path) -> CliResult<(Manifest, Bundle)> {
    if !run_dir.join(crate::manifest::MANIFEST).exists() {
        return Err(CliError::Io(format!(
            "{} has no manifest.json; not a run directory",
            run_dir.display()
        )));
    }
    let m = Manifest::load(run_dir)?;
    if m.command != "ensemble" {
        return Err(CliError::Io(format!(
            "report needs an ensemble run, {} holds a {} run",
            run_dir.display(),
            m.command
        )));
    }
    m.validate_inventory(run_dir)?;
    let spectra = Table::parse(&std::fs::read_to_string(run_dir.join("spectra.csv"))?)?;
    let stats: StatsFile =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("stats.json"))?)?;

    let theta = spectrum_means(&spectra, FieldTag::Theta, 0)?;
    let v1 = spectrum_means(&spectra, FieldTag::Vartheta1, 1)?;
    // Tails from the CSV stop at κ_max; the neglected corner shells carry
    // round-off only for the first iterate.
    let mut tails = vec![0.0; v1.len()];
    let mut acc = 0.0;
    for i in (0..v1.len()).rev() {
        acc += v1[i];
        tails[i] = 4.0 * PI * PI * acc;
    }
    let p = &stats.velocity;
    let beta = p.beta();
    let kb = stats.kappa_bar;
    let grad_tau = stats.stats.scalar("grad_tau_sq")?.mean;
    let anchor = (stats.window.0.ceil() as usize).clamp(1, theta.len());
    let (t0, v0) = (theta[anchor - 1], tails[anchor - 1]);
    let a = anchor as f64;
    let rows = (1..=theta.len())
        .map(|kappa| {
            let k = kappa as f64;
            let stated = bht_prediction(k, kb, p, grad_tau, BhtConvention::Stated);
            let consistent = bht_prediction(k, kb, p, grad_tau, BhtConvention::Consistent);
            ReportRow {
                kappa,
                theta_shell: theta[kappa - 1],
                ref_shell_slope: t0 * (k / a).powf(2.0 * beta - 3.0),
                vartheta1_tail: tails[kappa - 1],
                bht_prediction: stated.value,
                bht_consistent: consistent.value,
                ref_tail_slope: v0 * (k / a).powf(2.0 * beta),
                in_window: k >= stats.window.0 && k <= stats.window.1,
            }
        })
        .collect();
    Ok((m, Bundle { rows }))
}

pub fn run(run_dir: &Path, globals: &Globals) -> CliResult<Manifest> {
    let clock = Clock::start();
    let (source, bundle) = build(run_dir)?;
    let out = globals
        .out
        .clone()
        .unwrap_or_else(|| run_dir.join("report"));
    let derived = serde_json::json!({
        "source_run_id": source.run_id,
        "source_dir": run_dir.display().to_string(),
        "rows": bundle.rows.len(),
    });
    let mut m = super::manifest(
        "report",
        &crate::config::RawConfig::default(),
        source.seeds.clone(),
        derived,
        &clock,
    )?;
    m.run_id = crate::manifest::run_id("report", &source.config, &source.seeds);
    m.config = source.config.clone();
    let mut w = RunWriter::create(&out)?;
    w.write("report.csv", bundle.to_table().to_text().as_bytes())?;
    w.finish(m)
}
