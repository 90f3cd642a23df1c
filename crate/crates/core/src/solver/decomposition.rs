//! The split `θ = τ + ϑ + φ` around a wavenumber κ̄:
//!
//! ```text
//! -Δτ + (u·∇τ)^{<κ̄}  = g
//! -Δϑ + (u·∇ϑ)^{>κ̄}  = -(u·∇τ)^{>κ̄}
//! -Δφ +  u·∇φ        = -(u·∇ϑ)^{<κ̄}
//! ```
//!
//! Summing the three recovers the full equation for `θ`.

use serde::{Deserialize, Serialize};

use super::{Method, SolveConfig, SolveReport, TracerSystem};
use crate::error::{param, Error, Result};
use crate::spectral::{
    h1_norm, h2_norm, high_pass, l2_norm, low_pass, Advector, Band, SpectralField, VectorField,
};

/// Result of the low-mode system.
#[derive(Debug, Clone)]
pub struct LowModeSolution {
    pub tau: SpectralField,
    pub report: SolveReport,
    /// `‖Δ(τ - τ')‖₂` where `τ'` solves the same system with the full `u`;
    /// `None` when the check was skipped.
    pub truncation_defect: Option<f64>,
}

/// First Picard iterate `ϑ¹ = Δ^{-1}(u·∇τ)^{>κ̄}` and its split by `u^{<2κ̄}` / `u^{>2κ̄}`.
#[derive(Debug, Clone)]
pub struct FirstIterates {
    pub vartheta1: SpectralField,
    pub vartheta1_l: SpectralField,
    pub vartheta1_h: SpectralField,
}

#[derive(Debug, Clone)]
pub struct VarthetaIterates {
    pub first: FirstIterates,
    /// Last iterate `ϑ^{(n)}`.
    pub vartheta: SpectralField,
    /// `‖∇δϑ^{(n)}‖₂` for `n = 1, 2, …` with `δϑ^{(1)} = ϑ¹`.
    pub increments: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub tau: SpectralField,
    pub vartheta: SpectralField,
    pub first: FirstIterates,
    pub phi: SpectralField,
    /// Picard increment norms when ϑ came from the fixed-point path.
    pub increments: Vec<f64>,
    pub reports: DecompositionReports,
    pub truncation_defect: Option<f64>,
    /// `‖-Δθ + u·∇θ - g‖₂ / ‖g‖₂` for `θ = τ + ϑ + φ`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReports {
    pub tau: SolveReport,
    pub vartheta: Option<SolveReport>,
    pub phi: SolveReport,
}

impl Decomposition {
    pub fn theta(&self) -> SpectralField {
        let mut t = &self.tau + &self.vartheta;
        t += &self.phi;
        t
    }
}

/// `Δ^{-1} f`, i.e. `-f̂_k / |k|^2`.
fn inverse_laplacian(f: &SpectralField) -> SpectralField {
    f.map_radial(|k2| -1.0 / k2)
}

fn split_velocity(u: &VectorField, kappa: f64) -> (VectorField, VectorField) {
    (
        u.map(|c| low_pass(c, kappa)),
        u.map(|c| high_pass(c, kappa)),
    )
}

const DIVERGENCE_HINT: &str =
    "the split wavenumber is too small for this velocity; raise kappa_bar or use the Krylov path";

impl TracerSystem {
    /// Solves `-Δτ + (u·∇τ)^{<κ̄} = g`.
    pub fn solve_low_mode(
        &self,
        g: &SpectralField,
        cfg: &SolveConfig,
        check_truncation: bool,
    ) -> Result<LowModeSolution> {
        cfg.validate()?;
        let kb = cfg.kappa_bar;
        if !high_pass(g, kb).is_zero() {
            return param(format!(
                "kappa_bar = {kb} is below the source band limit; need kappa_bar >= kappa_g"
            ));
        }
        let gn = l2_norm(g);
        let band = Band::Below(kb);
        // τ only sees u^{<2κ̄}; solving with the truncated velocity makes τ
        // bitwise identical across members that share those modes.
        let (ul, _) = split_velocity(self.velocity(), 2.0 * kb);
        let (tau, report) =
            TracerSystem::new(&ul).solve_band(g, band, None, cfg.tol * gn, gn, cfg)?;
        let truncation_defect = if check_truncation {
            let (tau_full, _) = self.solve_band(g, band, None, cfg.tol * gn, gn, cfg)?;
            let d = h2_norm(&(&tau - &tau_full));
            // Both solves stop at tol·‖g‖, so they can differ by about that much.
            if d > 10.0 * cfg.tol * gn.max(f64::MIN_POSITIVE) {
                return Err(Error::Invariant(format!(
                    "low-mode solution depends on u^{{>2κ̄}}: ‖Δ(τ - τ')‖₂ = {d:.3e}"
                )));
            }
            Some(d)
        } else {
            None
        };
        Ok(LowModeSolution {
            tau,
            report,
            truncation_defect,
        })
    }

    pub fn first_iterates(&self, tau: &SpectralField, kappa_bar: f64) -> Result<FirstIterates> {
        let band = Band::From(kappa_bar);
        let vartheta1 = inverse_laplacian(&self.advector().apply_band(tau, band)?);
        let (ul, uh) = split_velocity(self.velocity(), 2.0 * kappa_bar);
        // u^{<2κ̄}·∇τ lives below 3κ̄; anything the transform leaves above is round-off.
        let vartheta1_l = inverse_laplacian(
            &Advector::new(&ul).apply_band(tau, Band::Between(kappa_bar, 3.0 * kappa_bar))?,
        );
        let vartheta1_h = inverse_laplacian(&Advector::new(&uh).apply_band(tau, band)?);
        Ok(FirstIterates {
            vartheta1,
            vartheta1_l,
            vartheta1_h,
        })
    }

    /// Picard iteration `Δϑ^{(n+1)} = (u·∇ϑ^{(n)})^{>κ̄} + (u·∇τ)^{>κ̄}` from `ϑ^{(0)} = 0`.
    ///
    /// Stops after `n_max` steps or once `‖∇δϑ^{(n)}‖₂ <= stop · ‖∇ϑ¹‖₂`;
    /// three consecutive increment growths abort with [`Error::Divergence`].
    pub fn iterate_vartheta(
        &self,
        tau: &SpectralField,
        kappa_bar: f64,
        n_max: usize,
        stop: f64,
    ) -> Result<VarthetaIterates> {
        let band = Band::From(kappa_bar);
        let first = self.first_iterates(tau, kappa_bar)?;
        let forcing = self.advector().apply_band(tau, band)?;
        let v1 = h1_norm(&first.vartheta1);
        let mut increments = vec![v1];
        let mut current = first.vartheta1.clone();
        let mut growth = 0;
        for step in 2..=n_max.max(1) {
            if v1 == 0.0 || *increments.last().unwrap() <= stop * v1 {
                break;
            }
            let mut rhs = self.advector().apply_band(&current, band)?;
            rhs += &forcing;
            let next = inverse_laplacian(&rhs);
            let inc = h1_norm(&(&next - &current));
            let prev = *increments.last().unwrap();
            growth = if inc > prev { growth + 1 } else { 0 };
            increments.push(inc);
            current = next;
            if growth >= 3 || !inc.is_finite() {
                return Err(Error::Divergence {
                    step,
                    ratio: inc / prev,
                    hint: DIVERGENCE_HINT,
                });
            }
        }
        Ok(VarthetaIterates {
            first,
            vartheta: current,
            increments,
        })
    }

    /// Krylov solve of `-Δϑ + (u·∇ϑ)^{>κ̄} = -(u·∇τ)^{>κ̄}`.
    pub fn solve_vartheta(
        &self,
        tau: &SpectralField,
        kappa_bar: f64,
        x0: Option<&SpectralField>,
        target: f64,
        reference: f64,
        cfg: &SolveConfig,
    ) -> Result<(SpectralField, SolveReport)> {
        let band = Band::From(kappa_bar);
        let rhs = -&self.advector().apply_band(tau, band)?;
        self.solve_band(&rhs, band, x0, target, reference, cfg)
    }

    /// Solves `-Δφ + u·∇φ = -(u·∇ϑ)^{<κ̄}`.
    pub fn solve_phi(
        &self,
        vartheta: &SpectralField,
        kappa_bar: f64,
        target: f64,
        reference: f64,
        cfg: &SolveConfig,
    ) -> Result<(SpectralField, SolveReport)> {
        let gamma = -&self
            .advector()
            .apply_band(vartheta, Band::Below(kappa_bar))?;
        self.solve_band(&gamma, Band::Full, None, target, reference, cfg)
    }

    /// Runs the whole split. The ϑ equation is solved by Picard iteration for
    /// [`Method::FixedPoint`] and by Krylov (seeded with ϑ¹) otherwise.
    pub fn decompose(
        &self,
        g: &SpectralField,
        cfg: &SolveConfig,
        check_truncation: bool,
    ) -> Result<Decomposition> {
        let kb = cfg.kappa_bar;
        let gn = l2_norm(g);
        let target = cfg.tol * gn;
        let low = self.solve_low_mode(g, cfg, check_truncation)?;
        let (first, vartheta, increments, vreport) = match cfg.method {
            Method::FixedPoint => {
                let it = self.iterate_vartheta(&low.tau, kb, cfg.n_max, cfg.picard_stop)?;
                (it.first, it.vartheta, it.increments, None)
            }
            Method::Krylov => {
                let first = self.first_iterates(&low.tau, kb)?;
                let (v, rep) =
                    self.solve_vartheta(&low.tau, kb, Some(&first.vartheta1), target, gn, cfg)?;
                (first, v, Vec::new(), Some(rep))
            }
        };
        let (phi, phi_report) = self.solve_phi(&vartheta, kb, target, gn, cfg)?;
        let mut theta = &low.tau + &vartheta;
        theta += &phi;
        let residual = if gn > 0.0 {
            self.residual(&theta, g)? / gn
        } else {
            0.0
        };
        Ok(Decomposition {
            tau: low.tau,
            vartheta,
            first,
            phi,
            increments,
            reports: DecompositionReports {
                tau: low.report,
                vartheta: vreport,
                phi: phi_report,
            },
            truncation_defect: low.truncation_defect,
            residual,
        })
    }
}

/// Solves the low-mode system for `u`, checking that `u^{>2κ̄}` is irrelevant.
pub fn solve_low_mode(
    u: &VectorField,
    g: &SpectralField,
    kappa_bar: f64,
    cfg: &SolveConfig,
) -> Result<LowModeSolution> {
    let cfg = SolveConfig {
        kappa_bar,
        ..cfg.clone()
    };
    TracerSystem::new(u).solve_low_mode(g, &cfg, true)
}

/// Picard iterates of the ϑ equation with the default stopping rule.
pub fn iterate_vartheta(
    u: &VectorField,
    tau: &SpectralField,
    kappa_bar: f64,
    n_max: usize,
) -> Result<VarthetaIterates> {
    TracerSystem::new(u).iterate_vartheta(tau, kappa_bar, n_max, SolveConfig::default().picard_stop)
}

/// Solves the φ equation to the configured relative tolerance of `‖Γ‖₂`.
pub fn solve_phi(
    u: &VectorField,
    vartheta: &SpectralField,
    kappa_bar: f64,
    cfg: &SolveConfig,
) -> Result<(SpectralField, SolveReport)> {
    let sys = TracerSystem::new(u);
    let gamma = sys
        .advector()
        .apply_band(vartheta, Band::Below(kappa_bar))?;
    let gn = l2_norm(&gamma);
    sys.solve_phi(vartheta, kappa_bar, cfg.tol * gn, gn, cfg)
}
