use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    grad_l1_fourier, h1_norm, high_pass, vector_norms, SpectralField, VectorField,
};
use crate::velocity::VelocityParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaBarTerm {
    /// `κ_g`
    SourceBand,
    /// `‖û‖₁²`
    VelocitySup,
    /// `c' ‖û‖₁² ‖u‖₂^{1/β}`
    Mixed,
}

/// `κ̄ = 2^{m_β} max{κ_g, ‖û‖₁², c'‖û‖₁²‖u‖₂^{1/β}}` with its active term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaBar {
    pub value: f64,
    pub factor: f64,
    pub terms: [f64; 3],
    pub active: KappaBarTerm,
}

/// Evaluates the split-wavenumber formula without the resolution check.
pub fn kappa_bar_terms(
    params: &VelocityParams,
    u: &VectorField,
    kappa_g: f64,
    c_prime: f64,
) -> Result<KappaBar> {
    if !(c_prime > 0.0) {
        return Err(Error::Parameter(format!(
            "c_prime must be positive, got {c_prime}"
        )));
    }
    let nr = vector_norms(u);
    let s = nr.l1_fourier * nr.l1_fourier;
    let mixed = if nr.l2 > 0.0 {
        c_prime * s * nr.l2.powf(1.0 / params.beta())
    } else {
        0.0
    };
    let terms = [kappa_g, s, mixed];
    let (active, best) = [
        KappaBarTerm::SourceBand,
        KappaBarTerm::VelocitySup,
        KappaBarTerm::Mixed,
    ]
    .into_iter()
    .zip(terms)
    .fold(
        (KappaBarTerm::SourceBand, f64::NEG_INFINITY),
        |acc, (t, v)| if v > acc.1 { (t, v) } else { acc },
    );
    let factor = 2f64.powi(params.m_beta() as i32);
    Ok(KappaBar {
        value: factor * best,
        factor,
        terms,
        active,
    })
}

/// As [`kappa_bar_terms`], failing when `κ̄ > κ_max / 3`.
pub fn kappa_bar(
    params: &VelocityParams,
    u: &VectorField,
    kappa_g: f64,
    c_prime: f64,
) -> Result<KappaBar> {
    let kb = kappa_bar_terms(params, u, kappa_g, c_prime)?;
    let limit = u.lattice().kappa_max() as f64 / 3.0;
    if kb.value > limit {
        return Err(Error::EmptyWindow {
            kappa_bar: kb.value,
            limit,
        });
    }
    Ok(kb)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighModeRow {
    pub kappa: f64,
    /// `‖∇θ^{>κ}‖₂`
    pub tail: f64,
    /// `tail / (κ^β ‖u‖₂ Σ|k||θ̂_k|)`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighModeReport {
    pub rows: Vec<HighModeRow>,
    /// Largest ratio, the measured constant.
    pub max_ratio: f64,
}

/// Ratios `‖∇θ^{>κ}‖₂ / (κ^β ‖u‖₂ ‖∇θ‖∞)` with the Fourier majorant of `‖∇θ‖∞`.
pub fn highmode_bound_report(
    theta: &SpectralField,
    u: &VectorField,
    beta: f64,
    kappas: &[f64],
) -> HighModeReport {
    let ul2 = vector_norms(u).l2;
    let grad_sup = grad_l1_fourier(theta);
    let rows: Vec<HighModeRow> = kappas
        .iter()
        .map(|&kappa| {
            let tail = h1_norm(&high_pass(theta, kappa));
            let denom = kappa.powf(beta) * ul2 * grad_sup;
            let ratio = if tail == 0.0 { 0.0 } else { tail / denom };
            HighModeRow { kappa, tail, ratio }
        })
        .collect();
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    HighModeReport { rows, max_ratio }
}
