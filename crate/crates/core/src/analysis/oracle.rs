//! Exact expected spectrum of the high-velocity first iterate and the
//! asymptotic BHT prediction.
//!
//! For `|k| >= 3κ̄` and `τ` supported below κ̄,
//! `ϑ̂¹_{H,k} = U |k|^{-2} Σ_j |k-j|^{β-1} (k∧j) X_{k-j} τ̂_j`, and the phases
//! `X_{k-j}` are distinct for distinct `j`, so
//! `E|ϑ̂¹_{H,k}|² = U² |k|^{-4} Σ_j |k-j|^{2β-2} (k∧j)² E|τ̂_j|²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::spectral::Lattice;
use crate::velocity::{Family, VelocityParams};

/// `E|τ̂_j|²` on the modes where it is non-zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModePower {
    pub modes: Vec<([i64; 2], f64)>,
}

impl ModePower {
    /// Extracts the non-zero entries of a per-storage-slot power table.
    pub fn from_table(lattice: Lattice, power: &[f64]) -> Self {
        let modes = lattice
            .modes()
            .filter(|m| power[m.index] > 0.0)
            .map(|m| (m.k, power[m.index]))
            .collect();
        Self { modes }
    }

    /// `Σ_j |j|² E|τ̂_j|² (2π)²`, i.e. `E‖∇τ‖₂²`.
    pub fn grad_norm_sq(&self) -> f64 {
        4.0 * PI
            * PI
            * self
                .modes
                .iter()
                .map(|(j, p)| (j[0] * j[0] + j[1] * j[1]) as f64 * p)
                .sum::<f64>()
    }
}

/// `E|ϑ̂¹_{H,k}|²` at one wavevector, by direct summation over `j`.
pub fn expected_mode_power(
    k: [i64; 2],
    tau: &ModePower,
    params: &VelocityParams,
    lattice: Lattice,
) -> f64 {
    let beta = params.beta();
    let u2 = params.amplitude * params.amplitude;
    let kk = (k[0] * k[0] + k[1] * k[1]) as f64;
    let mut s = 0.0;
    for &(j, p) in &tau.modes {
        let d = [k[0] - j[0], k[1] - j[1]];
        if !lattice.contains(d[0], d[1]) {
            continue;
        }
        let dd = d[0] * d[0] + d[1] * d[1];
        if !params.active(dd) {
            continue;
        }
        let wedge = (k[0] * j[1] - k[1] * j[0]) as f64;
        s += (dd as f64).powf(beta - 1.0) * wedge * wedge * p;
    }
    u2 * s / (kk * kk)
}

/// Expected shell spectra of `ϑ¹_H` for shells `κ >= ceil(3κ̄)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpectrum {
    pub kappa_bar: f64,
    /// First valid shell.
    pub start: usize,
    /// `w0[κ - 1] = Σ_{shell κ} E|ϑ̂¹_{H,k}|²`, zero below `start`.
    pub w0: Vec<f64>,
    /// `w1[κ - 1] = Σ_{shell κ} |k|² E|ϑ̂¹_{H,k}|²`, zero below `start`.
    pub w1: Vec<f64>,
}

impl OracleSpectrum {
    /// Expected shell sum with weight exponent `w`.
    pub fn shell(&self, kappa: usize, w: u32) -> Result<f64> {
        if kappa < self.start {
            return param(format!(
                "oracle is only valid for shells >= 3*kappa_bar = {}, requested {kappa}",
                self.start
            ));
        }
        let v = if w == 0 { &self.w0 } else { &self.w1 };
        Ok(v.get(kappa - 1).copied().unwrap_or(0.0))
    }

    /// `Σ_{κ' >= κ}` of the `w = 1` shells, times `(2π)²`: `E‖∇ϑ¹_H^{>κ}‖₂²`.
    pub fn grad_tail(&self, kappa: usize) -> Result<f64> {
        self.shell(kappa, 1)?;
        Ok(4.0 * PI * PI * self.w1.iter().skip(kappa - 1).sum::<f64>())
    }
}

/// Evaluates the expected-spectrum double sum over the whole lattice.
pub fn bht_oracle(
    tau: &ModePower,
    params: &VelocityParams,
    kappa_bar: f64,
    lattice: Lattice,
) -> Result<OracleSpectrum> {
    if !(kappa_bar >= 1.0) {
        return param(format!("kappa_bar must be >= 1, got {kappa_bar}"));
    }
    let limit = kappa_bar * kappa_bar;
    if let Some((j, _)) = tau
        .modes
        .iter()
        .find(|(j, _)| (j[0] * j[0] + j[1] * j[1]) as f64 >= limit)
    {
        return param(format!(
            "tau has a mode at {j:?}, at or above kappa_bar = {kappa_bar}"
        ));
    }
    let start = (3.0 * kappa_bar).ceil() as usize;
    let shells = lattice.max_shell();
    let mut w0 = vec![0.0; shells];
    let mut w1 = vec![0.0; shells];
    for m in lattice.modes() {
        let s = m.shell();
        if s < start {
            continue;
        }
        let e = expected_mode_power(m.k, tau, params, lattice);
        w0[s - 1] += e;
        w1[s - 1] += m.norm_sq() as f64 * e;
    }
    Ok(OracleSpectrum {
        kappa_bar,
        start,
        w0,
        w1,
    })
}

/// Which normalization of the BHT constant to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BhtConvention {
    /// `4π³/(-2β)`, and `π³/4` for the Kraichnan family.
    Stated,
    /// `π/(-2β)`: the constant for which `E‖∇ϑ¹^{>κ}‖₂² ~ C κ^{2β} U² E‖∇τ‖₂²`
    /// holds with `L²` norms on both sides.
    Consistent,
}

pub fn bht_constant(params: &VelocityParams, convention: BhtConvention) -> f64 {
    let beta = params.beta();
    match (convention, params.family) {
        (BhtConvention::Stated, Family::Kraichnan { .. }) => PI.powi(3) / 4.0,
        (BhtConvention::Stated, Family::Steep { .. }) => 4.0 * PI.powi(3) / (-2.0 * beta),
        (BhtConvention::Consistent, _) => PI / (-2.0 * beta),
    }
}

/// Asymptotic `E‖∇ϑ¹^{>κ}‖₂² ≈ C κ^{2β} U² E‖∇τ‖₂²`.
///
/// Outside the validity window (`κ < 3κ̄`, or `κ >= κ_η/2` for Kraichnan)
/// the value is still returned with `in_window = false`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BhtPrediction {
    pub value: f64,
    pub in_window: bool,
}

pub fn bht_prediction(
    kappa: f64,
    kappa_bar: f64,
    params: &VelocityParams,
    grad_tau_sq: f64,
    convention: BhtConvention,
) -> BhtPrediction {
    let u2 = params.amplitude * params.amplitude;
    let value =
        kappa.powf(2.0 * params.beta()) * u2 * grad_tau_sq * bht_constant(params, convention);
    let upper = match params.family {
        Family::Kraichnan { cutoff } => cutoff as f64 / 2.0,
        Family::Steep { .. } => f64::INFINITY,
    };
    BhtPrediction {
        value,
        in_window: kappa >= 3.0 * kappa_bar && kappa <= upper,
    }
}
