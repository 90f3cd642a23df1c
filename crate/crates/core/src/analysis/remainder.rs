use serde::{Deserialize, Serialize};

use super::ensemble::{tail_spectrum, EnsembleStats, FieldTag};
use crate::error::{param, Result};
use crate::spectral::Lattice;
use crate::velocity::{analytic_norms, VelocityParams};

/// Remainders against the leading first iterate at one κ. All norms are RMS
/// over the ensemble, `sqrt(E‖∇f^{>κ}‖₂²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderRow {
    pub kappa: usize,
    pub leading: f64,
    /// `ϑ - ϑ¹`
    pub vartheta_rem: f64,
    pub phi: f64,
    /// `(vartheta_rem + phi) / leading`
    pub ratio: f64,
    /// The three norms above times `κ^{-β}`.
    pub leading_scaled: f64,
    pub vartheta_rem_scaled: f64,
    pub phi_scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderReport {
    pub kappa_bar: f64,
    pub window: (f64, f64),
    pub rows: Vec<RemainderRow>,
    /// Mean of `ratio` over the rows whose leading term is above round-off.
    pub mean_ratio: f64,
    /// `‖û‖₁ log²κ̄ / κ̄`; the remainders are subdominant when this is small.
    pub smallness: f64,
}

pub fn remainder_report(
    stats: &EnsembleStats,
    kappa_bar: f64,
    params: &VelocityParams,
    lattice: Lattice,
    window: (f64, f64),
) -> Result<RemainderReport> {
    let (lo, hi) = window;
    if !(lo >= 1.0 && lo <= hi) {
        return param(format!("invalid remainder window [{lo}, {hi}]"));
    }
    let lead = tail_spectrum(stats, FieldTag::Vartheta1, 1)?;
    let rem = tail_spectrum(stats, FieldTag::VarthetaRem, 1)?;
    let phi = tail_spectrum(stats, FieldTag::Phi, 1)?;
    let beta = params.beta();
    let mut rows = Vec::new();
    for i in 0..lead.len() {
        let kappa = lead[i].0;
        let k = kappa as f64;
        if k < lo || k > hi {
            continue;
        }
        let (l, r, p) = (lead[i].1.sqrt(), rem[i].1.sqrt(), phi[i].1.sqrt());
        let ratio = if l > 0.0 { (r + p) / l } else { 0.0 };
        let s = k.powf(-beta);
        rows.push(RemainderRow {
            kappa,
            leading: l,
            vartheta_rem: r,
            phi: p,
            ratio,
            leading_scaled: l * s,
            vartheta_rem_scaled: r * s,
            phi_scaled: p * s,
        });
    }
    let peak = rows.iter().map(|r| r.leading).fold(0.0, f64::max);
    let live: Vec<f64> = rows
        .iter()
        .filter(|r| r.leading > 1e-12 * peak)
        .map(|r| r.ratio)
        .collect();
    let mean_ratio = if live.is_empty() {
        0.0
    } else {
        live.iter().sum::<f64>() / live.len() as f64
    };
    let l1 = analytic_norms(params, lattice).l1_fourier_exact;
    Ok(RemainderReport {
        kappa_bar,
        window,
        rows,
        mean_ratio,
        smallness: l1 * kappa_bar.ln().powi(2) / kappa_bar,
    })
}
