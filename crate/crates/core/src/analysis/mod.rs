//! Ensembles, shell statistics, the expected-spectrum oracle and fits.

mod ensemble;
mod fit;
mod oracle;
mod remainder;
mod stats;

pub use ensemble::{
    default_window, derive_seed, realize, run_ensemble, tail_spectrum, EnsembleConfig, EnsembleRun,
    EnsembleStats, FieldShellStats, FieldTag, RealizationRecord,
};
pub use fit::{fit_exponent, FitResult};
pub use oracle::{
    bht_constant, bht_oracle, bht_prediction, expected_mode_power, BhtConvention, BhtPrediction,
    ModePower, OracleSpectrum,
};
pub use remainder::{remainder_report, RemainderReport, RemainderRow};
pub use stats::ScalarStat;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::velocity::VelocityParams;

/// Monte Carlo shell mean of the `ϑ¹_H` gradient spectrum against the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub shell: usize,
    pub count: usize,
    pub oracle: f64,
    /// Standard error of the oracle itself (zero when `τ` is frozen).
    pub oracle_se: f64,
    pub mean: f64,
    pub se: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub rows: Vec<OracleRow>,
    pub sigma: f64,
    pub pass_fraction: f64,
    /// `sqrt(mean((mean - oracle)² / oracle²))` over the rows.
    pub rms_relative_deviation: f64,
}

/// Compares shells `lo..=hi` with tolerance `sigma` standard errors.
///
/// The per-realization oracle is averaged like any other observable, so for
/// unfrozen ensembles its own sampling error enters the combined standard error.
pub fn oracle_comparison(
    stats: &EnsembleStats,
    shells: (usize, usize),
    sigma: f64,
) -> Result<OracleComparison> {
    let mc = stats.field(FieldTag::Vartheta1H, 1)?;
    let or = stats.field(FieldTag::OracleVartheta1H, 1)?;
    let (lo, hi) = shells;
    if lo == 0 || lo > hi || hi > mc.shells() {
        return param(format!("invalid oracle shell range [{lo}, {hi}]"));
    }
    let m = stats.members as f64;
    // Shells beyond the reach of the velocity band have a zero oracle and
    // round-off sized Monte Carlo values; judge those against the peak.
    let floor = 1e-12 * (lo..=hi).map(|s| or.mean[s - 1].abs()).fold(0.0, f64::max);
    let mut rows = Vec::new();
    let mut dev2 = 0.0;
    let mut counted = 0usize;
    for s in lo..=hi {
        let i = s - 1;
        if mc.counts[i] == 0 {
            continue;
        }
        let se = (mc.variance[i] / m).sqrt();
        let oracle_se = (or.variance[i] / m).sqrt();
        let diff = mc.mean[i] - or.mean[i];
        let combined = (se * se + oracle_se * oracle_se).sqrt();
        let z = if combined > 0.0 {
            diff / combined
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let pass = z.abs() <= sigma || diff.abs() <= floor;
        if or.mean[i] > floor {
            dev2 += (diff / or.mean[i]).powi(2);
            counted += 1;
        }
        rows.push(OracleRow {
            shell: s,
            count: mc.counts[i],
            oracle: or.mean[i],
            oracle_se,
            mean: mc.mean[i],
            se,
            z,
            pass,
        });
    }
    if rows.is_empty() {
        return param("no populated shells in the oracle range");
    }
    let pass_fraction = rows.iter().filter(|r| r.pass).count() as f64 / rows.len() as f64;
    Ok(OracleComparison {
        rows,
        sigma,
        pass_fraction,
        rms_relative_deviation: if counted > 0 {
            (dev2 / counted as f64).sqrt()
        } else {
            0.0
        },
    })
}

/// `E‖∇ϑ¹^{>κ}‖₂² κ^{-2β} / (U² E‖∇τ‖₂²)` at one κ, in both readings of `E‖∇τ‖₂²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BhtRatioRow {
    pub kappa: usize,
    /// Ensemble means in numerator and denominator.
    pub ratio_ensemble: f64,
    /// Mean over members of the per-member ratio.
    pub ratio_per_realization: f64,
    pub prediction: f64,
    pub in_window: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BhtRatioReport {
    pub convention: BhtConvention,
    pub constant: f64,
    pub rows: Vec<BhtRatioRow>,
    /// Window mean of `ratio_ensemble`.
    pub mean_ratio: f64,
    /// `mean_ratio / constant - 1`.
    pub relative_deviation: f64,
}

pub fn bht_ratio_report(
    run: &EnsembleRun,
    params: &VelocityParams,
    kappa_bar: f64,
    window: (f64, f64),
    convention: BhtConvention,
) -> Result<BhtRatioReport> {
    let u2 = params.amplitude * params.amplitude;
    if u2 == 0.0 {
        return param("the BHT ratio is undefined for zero amplitude");
    }
    let beta = params.beta();
    let constant = bht_constant(params, convention);
    let grad_tau = run.stats.scalar("grad_tau_sq")?.mean;
    let tails = tail_spectrum(&run.stats, FieldTag::Vartheta1, 1)?;
    let four_pi_sq = 4.0 * std::f64::consts::PI.powi(2);
    let per_member: Vec<(Vec<f64>, f64)> = run
        .records
        .iter()
        .map(|r| {
            let s = r.spectrum(FieldTag::Vartheta1, 1).expect("recorded");
            (s.tails(), r.scalar("grad_tau_sq").unwrap_or(f64::NAN))
        })
        .collect();
    let mut rows = Vec::new();
    for (kappa, tail) in tails {
        let k = kappa as f64;
        if k < window.0 || k > window.1 {
            continue;
        }
        let scale = k.powf(-2.0 * beta) / u2;
        let per = per_member
            .iter()
            .map(|(t, gt)| four_pi_sq * t[kappa - 1] * scale / gt)
            .sum::<f64>()
            / per_member.len() as f64;
        let pred = bht_prediction(k, kappa_bar, params, grad_tau, convention);
        rows.push(BhtRatioRow {
            kappa,
            ratio_ensemble: tail * scale / grad_tau,
            ratio_per_realization: per,
            prediction: pred.value,
            in_window: pred.in_window,
        });
    }
    if rows.is_empty() {
        return param(format!(
            "BHT window [{}, {}] holds no shells",
            window.0, window.1
        ));
    }
    let mean_ratio = rows.iter().map(|r| r.ratio_ensemble).sum::<f64>() / rows.len() as f64;
    Ok(BhtRatioReport {
        convention,
        constant,
        rows,
        mean_ratio,
        relative_deviation: mean_ratio / constant - 1.0,
    })
}
