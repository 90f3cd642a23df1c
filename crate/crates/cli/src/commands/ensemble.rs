//! `bht ensemble`: Monte Carlo statistics and the derived tables.

use bht_core::analysis::{
    bht_ratio_report, fit_exponent, oracle_comparison, remainder_report, run_ensemble,
    tail_spectrum, BhtConvention, EnsembleRun, EnsembleStats, FieldTag, FitResult,
};
use bht_core::velocity::VelocityParams;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{manifest, push_spectrum, velocity_derived, Clock, Globals, SPECTRUM_HEADER};
use crate::config::{RawConfig, Resolved};
use crate::csv::{float, Table};
use crate::error::CliResult;
use crate::manifest::{Manifest, RunWriter};

/// Contents of `stats.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsFile {
    pub kappa_bar: f64,
    pub velocity: VelocityParams,
    pub window: (f64, f64),
    pub frozen_below: Option<f64>,
    pub summary: Summary,
    pub stats: EnsembleStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub members: usize,
    pub oracle_shells: (usize, usize),
    pub oracle_pass_fraction: f64,
    pub oracle_rms_relative_deviation: f64,
    pub bht_stated_mean_ratio: f64,
    pub bht_stated_constant: f64,
    pub bht_stated_deviation: f64,
    pub bht_consistent_mean_ratio: f64,
    pub bht_consistent_constant: f64,
    pub bht_consistent_deviation: f64,
    pub remainder_mean_ratio: f64,
    pub remainder_smallness: f64,
    pub vartheta1_tail_slope: f64,
    pub vartheta1_tail_slope_stderr: f64,
    pub theta_shell_slope: f64,
    pub theta_shell_slope_stderr: f64,
    pub h1_violations: usize,
    pub max_residual: f64,
    pub max_truncation_defect: Option<f64>,
    pub max_direct_gap: Option<f64>,
}

fn max_scalar(run: &EnsembleRun, name: &str) -> Option<f64> {
    run.records
        .iter()
        .filter_map(|r| r.scalar(name))
        .reduce(f64::max)
}

/// Ensemble tail and shell tables in the shape [`fit_exponent`] expects.
fn fit_table(points: impl Iterator<Item = (usize, f64)>) -> Vec<(f64, f64)> {
    points.map(|(k, v)| (k as f64, v)).collect()
}

pub fn run(raw: &RawConfig, globals: &Globals) -> CliResult<Manifest> {
    let clock = Clock::start();
    let mut raw = raw.clone();
    if let Some(s) = globals.seed {
        raw.ensemble.base_seed = s;
    }
    let Resolved {
        ensemble: cfg,
        kappa_bar_origin,
        c_prime,
        sigma,
    } = raw.ensemble()?;
    let kb = cfg.solve.kappa_bar;
    let lattice = cfg.lattice;
    let params = cfg.velocity;
    let seeds: Vec<u64> = (0..cfg.members).map(|i| cfg.seed(i)).collect();

    // Everything is computed before the first file is written.
    let run = run_ensemble(&cfg)?;
    let stats = &run.stats;
    let kmax = stats.kappa_max;

    let mut spectra = Table::new(&SPECTRUM_HEADER);
    let mut fields: Vec<_> = stats.shells.iter().collect();
    fields.sort_by_key(|f| (f.field, f.weight));
    for f in fields {
        push_spectrum(
            &mut spectra,
            f.field,
            f.weight,
            &f.counts,
            &f.mean,
            &f.variance,
            kmax,
        );
    }

    let oracle_shells = ((3.0 * kb).ceil() as usize, kmax);
    let oracle = oracle_comparison(stats, oracle_shells, sigma)?;
    let mut oracle_t = Table::new(&[
        "shell",
        "count",
        "oracle",
        "oracle_se",
        "mean",
        "se",
        "z",
        "pass",
    ]);
    for r in &oracle.rows {
        oracle_t.push(vec![
            r.shell.to_string(),
            r.count.to_string(),
            float(r.oracle),
            float(r.oracle_se),
            float(r.mean),
            float(r.se),
            float(r.z),
            r.pass.to_string(),
        ]);
    }

    let mut ratio_t = Table::new(&[
        "convention",
        "constant",
        "kappa",
        "ratio_ensemble",
        "ratio_per_realization",
        "prediction",
        "in_window",
    ]);
    let mut ratios = Vec::new();
    for (name, conv) in [
        ("stated", BhtConvention::Stated),
        ("consistent", BhtConvention::Consistent),
    ] {
        let rep = bht_ratio_report(&run, &params, kb, cfg.window, conv)?;
        for r in &rep.rows {
            ratio_t.push(vec![
                name.to_string(),
                float(rep.constant),
                r.kappa.to_string(),
                float(r.ratio_ensemble),
                float(r.ratio_per_realization),
                float(r.prediction),
                r.in_window.to_string(),
            ]);
        }
        ratios.push(rep);
    }

    let rem = remainder_report(stats, kb, &params, lattice, cfg.window)?;
    let mut rem_t = Table::new(&[
        "kappa",
        "leading",
        "vartheta_rem",
        "phi",
        "ratio",
        "leading_scaled",
        "vartheta_rem_scaled",
        "phi_scaled",
    ]);
    for r in &rem.rows {
        rem_t.push(vec![
            r.kappa.to_string(),
            float(r.leading),
            float(r.vartheta_rem),
            float(r.phi),
            float(r.ratio),
            float(r.leading_scaled),
            float(r.vartheta_rem_scaled),
            float(r.phi_scaled),
        ]);
    }

    let beta = params.beta();
    let tail = fit_exponent(
        &fit_table(tail_spectrum(stats, FieldTag::Vartheta1, 1)?.into_iter()),
        cfg.window,
    )?;
    let theta = stats.field(FieldTag::Theta, 0)?;
    let shell = fit_exponent(
        &fit_table(
            theta
                .mean
                .iter()
                .copied()
                .enumerate()
                .map(|(i, v)| (i + 1, v)),
        ),
        cfg.window,
    )?;
    let mut fits_t = Table::new(&[
        "name",
        "slope",
        "slope_stderr",
        "intercept",
        "expected",
        "window_lo",
        "window_hi",
        "points",
    ]);
    let fit_row = |name: &str, f: &FitResult, expected: f64| {
        vec![
            name.to_string(),
            float(f.slope),
            float(f.slope_stderr),
            float(f.intercept),
            float(expected),
            float(f.window.0),
            float(f.window.1),
            f.points.to_string(),
        ]
    };
    fits_t.push(fit_row("vartheta1_tail", &tail, 2.0 * beta));
    fits_t.push(fit_row("theta_shell", &shell, 2.0 * beta - 3.0));

    let summary = Summary {
        members: stats.members,
        oracle_shells,
        oracle_pass_fraction: oracle.pass_fraction,
        oracle_rms_relative_deviation: oracle.rms_relative_deviation,
        bht_stated_mean_ratio: ratios[0].mean_ratio,
        bht_stated_constant: ratios[0].constant,
        bht_stated_deviation: ratios[0].relative_deviation,
        bht_consistent_mean_ratio: ratios[1].mean_ratio,
        bht_consistent_constant: ratios[1].constant,
        bht_consistent_deviation: ratios[1].relative_deviation,
        remainder_mean_ratio: rem.mean_ratio,
        remainder_smallness: rem.smallness,
        vartheta1_tail_slope: tail.slope,
        vartheta1_tail_slope_stderr: tail.slope_stderr,
        theta_shell_slope: shell.slope,
        theta_shell_slope_stderr: shell.slope_stderr,
        h1_violations: stats.h1_violations,
        max_residual: max_scalar(&run, "residual").unwrap_or(0.0),
        max_truncation_defect: max_scalar(&run, "truncation_defect"),
        max_direct_gap: max_scalar(&run, "direct_gap"),
    };
    let stats_file = StatsFile {
        kappa_bar: kb,
        velocity: params,
        window: cfg.window,
        frozen_below: cfg.frozen_below,
        summary,
        stats: run.stats.clone(),
    };

    let mut derived = velocity_derived(&params, lattice);
    derived["kappa_bar"] = kb.into();
    derived["kappa_bar_origin"] = serde_json::to_value(&kappa_bar_origin)?;
    derived["c_prime"] = c_prime.into();
    derived["window"] = json!([cfg.window.0, cfg.window.1]);
    derived["frozen_below"] = json!(cfg.frozen_below);
    derived["members"] = cfg.members.into();
    let m = manifest("ensemble", &raw, seeds, derived, &clock)?;

    let mut w = RunWriter::create(&globals.out_dir(&raw))?;
    w.write("spectra.csv", spectra.to_text().as_bytes())?;
    w.write("oracle.csv", oracle_t.to_text().as_bytes())?;
    w.write("bht_ratio.csv", ratio_t.to_text().as_bytes())?;
    w.write("remainder.csv", rem_t.to_text().as_bytes())?;
    w.write("fits.csv", fits_t.to_text().as_bytes())?;
    w.write_json("stats.json", &stats_file)?;
    w.finish(m)
}
