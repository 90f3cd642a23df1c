//! Steady tracer solves `-Δθ + u·∇θ = g` on the truncated lattice, the
//! small-amplitude Picard iteration, and the low/high-mode decomposition
//! `θ = τ + ϑ + φ`.

mod bounds;
mod decomposition;
mod krylov;
mod picard;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::spectral::{
    check_same_lattice, l2_norm, Advector, Band, Lattice, SpectralField, VectorField,
};

pub use bounds::{
    highmode_bound_report, kappa_bar, kappa_bar_terms, HighModeReport, HighModeRow, KappaBar,
    KappaBarTerm,
};
pub use decomposition::{
    iterate_vartheta, solve_low_mode, solve_phi, Decomposition, DecompositionReports,
    FirstIterates, LowModeSolution, VarthetaIterates,
};
pub use picard::{picard_small_u, PicardRun, PicardSummary};

/// Band-limited source `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub kappa_g: f64,
    pub field: SpectralField,
}

impl SourceSpec {
    /// Checks zero mean (by construction), Hermitian symmetry and the band limit.
    pub fn new(kappa_g: f64, field: SpectralField) -> Result<Self> {
        if !(kappa_g > 1.0) {
            return param(format!(
                "source band limit kappa_g must exceed 1, got {kappa_g}"
            ));
        }
        if field.hermitian_defect() > 1e-14 * crate::spectral::l1_fourier(&field).max(1.0) {
            return param("source coefficients are not Hermitian symmetric");
        }
        let outside = crate::spectral::high_pass(&field, kappa_g);
        if !outside.is_zero() {
            return param(format!("source has modes at or above kappa_g = {kappa_g}"));
        }
        Ok(Self { kappa_g, field })
    }

    /// `ĝ_k = 1` for every `1 <= |k| < κ_g`.
    pub fn unit_shells(lattice: Lattice, kappa_g: f64) -> Result<Self> {
        let f = SpectralField::from_half(lattice, |k1, k2| {
            let k2n = (k1 * k1 + k2 * k2) as f64;
            if k2n < kappa_g * kappa_g {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(kappa_g, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Richardson iteration on the preconditioned system; contracts only for small `u`.
    FixedPoint,
    /// Restarted GMRES on the preconditioned system.
    #[default]
    Krylov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Relative residual target `‖-Δθ + u·∇θ - g‖₂ / ‖g‖₂`.
    pub tol: f64,
    /// Operator applications allowed per solve.
    pub max_iter: usize,
    /// Krylov restart length.
    pub restart: usize,
    pub method: Method,
    /// Split wavenumber κ̄.
    pub kappa_bar: f64,
    /// Picard depth.
    pub n_max: usize,
    /// Picard stops once `‖∇δϑ‖₂ <= picard_stop · ‖∇ϑ¹‖₂`.
    pub picard_stop: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 4000,
            restart: 60,
            method: Method::Krylov,
            kappa_bar: 4.0,
            n_max: 20,
            picard_stop: 1e-3,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return param(format!(
                "solver tolerance must be positive, got {}",
                self.tol
            ));
        }
        if self.max_iter == 0 || self.restart == 0 {
            return param("max_iter and restart must be positive");
        }
        if !(self.kappa_bar >= 1.0) {
            return param(format!("kappa_bar must be >= 1, got {}", self.kappa_bar));
        }
        if !(self.picard_stop >= 0.0) {
            return param("picard_stop must be non-negative");
        }
        Ok(())
    }
}

/// Outcome of one linear solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub iterations: usize,
    /// Absolute residual `‖A θ - rhs‖₂` at exit.
    pub residual: f64,
    /// Residual divided by the reference norm (normally `‖g‖₂`).
    pub relative_residual: f64,
    /// Relative residual at each restart.
    pub residual_history: Vec<f64>,
    pub reference: f64,
}

impl SolveReport {
    fn trivial(method: Method, reference: f64) -> Self {
        Self {
            method,
            iterations: 0,
            residual: 0.0,
            relative_residual: 0.0,
            residual_history: vec![0.0],
            reference,
        }
    }
}

/// A fixed velocity with its transform cached, plus the pieces every solve needs.
pub struct TracerSystem {
    u: VectorField,
    adv: Advector,
    k2: Vec<f64>,
}

impl TracerSystem {
    pub fn new(u: &VectorField) -> Self {
        Self {
            u: u.clone(),
            adv: Advector::new(u),
            k2: u.lattice().norm_sq_table(),
        }
    }

    pub fn velocity(&self) -> &VectorField {
        &self.u
    }

    pub fn advector(&self) -> &Advector {
        &self.adv
    }

    pub fn lattice(&self) -> Lattice {
        self.u.lattice()
    }

    /// `-Δθ + P_band(u·∇θ)`
    pub fn apply(&self, theta: &SpectralField, band: Band) -> Result<SpectralField> {
        let mut out = self.adv.apply_band(theta, band)?;
        for ((o, t), &k2) in out
            .coeffs_mut()
            .iter_mut()
            .zip(theta.coeffs())
            .zip(&self.k2)
        {
            *o += t * k2;
        }
        Ok(out)
    }

    /// `‖-Δθ + u·∇θ - g‖₂`
    pub fn residual(&self, theta: &SpectralField, g: &SpectralField) -> Result<f64> {
        let r = &self.apply(theta, Band::Full)? - g;
        Ok(l2_norm(&r))
    }

    /// Solves `-Δθ + P_band(u·∇θ) = rhs` for `θ` supported in `band`, to an
    /// absolute residual of `target`. `rhs` must already lie in `band`.
    pub fn solve_band(
        &self,
        rhs: &SpectralField,
        band: Band,
        x0: Option<&SpectralField>,
        target: f64,
        reference: f64,
        cfg: &SolveConfig,
    ) -> Result<(SpectralField, SolveReport)> {
        check_same_lattice(self.lattice(), rhs.lattice())?;
        let lattice = self.lattice();
        if rhs.is_zero() && x0.is_none_or(|x| x.is_zero()) {
            return Ok((
                SpectralField::zeros(lattice),
                SolveReport::trivial(cfg.method, reference),
            ));
        }
        let in_band: Vec<bool> = self
            .k2
            .iter()
            .map(|&k2| k2 > 0.0 && band.contains_sq(k2))
            .collect();
        let inv: Vec<f64> = self
            .k2
            .iter()
            .zip(&in_band)
            .map(|(&k2, &b)| if b { 1.0 / k2 } else { 0.0 })
            .collect();
        let weights: Vec<f64> = self
            .k2
            .iter()
            .zip(&in_band)
            .map(|(&k2, &b)| if b { k2 } else { 0.0 })
            .collect();
        let true_w: Vec<f64> = weights.iter().map(|w| w * w).collect();
        let b: Vec<Complex64> = rhs.coeffs().iter().zip(&inv).map(|(c, s)| c * s).collect();
        let x0 = x0.map_or_else(
            || vec![Complex64::new(0.0, 0.0); lattice.len()],
            |x| {
                x.coeffs()
                    .iter()
                    .zip(&in_band)
                    .map(|(c, &m)| if m { *c } else { Complex64::new(0.0, 0.0) })
                    .collect()
            },
        );
        let mut apply = |x: &[Complex64]| -> Result<Vec<Complex64>> {
            let f = SpectralField::from_raw(lattice, x.to_vec());
            let a = self.adv.apply_band(&f, band)?;
            Ok(x.iter()
                .zip(a.coeffs())
                .zip(&inv)
                .map(|((xv, av), s)| xv + av * s)
                .collect())
        };
        let true_norm = |r: &[Complex64]| {
            2.0 * PI
                * r.iter()
                    .zip(&true_w)
                    .map(|(c, w)| c.norm_sqr() * w)
                    .sum::<f64>()
                    .sqrt()
        };
        let (x, iterations, history, residual) = match cfg.method {
            Method::Krylov => {
                let inner = krylov::Weighted { weights: &weights };
                let out = krylov::gmres(
                    &mut apply,
                    &b,
                    x0,
                    &inner,
                    &true_norm,
                    target,
                    cfg.restart,
                    cfg.max_iter,
                )?;
                (out.x, out.iterations, out.history, out.residual)
            }
            Method::FixedPoint => richardson(&mut apply, &b, x0, &true_norm, target, cfg.max_iter)?,
        };
        let scale = if reference > 0.0 {
            1.0 / reference
        } else {
            1.0
        };
        let report = SolveReport {
            method: cfg.method,
            iterations,
            residual,
            relative_residual: residual * scale,
            residual_history: history.iter().map(|h| h * scale).collect(),
            reference,
        };
        Ok((SpectralField::from_raw(lattice, x), report))
    }

    /// Full solve of `-Δθ + u·∇θ = g`.
    pub fn solve_direct(
        &self,
        g: &SpectralField,
        cfg: &SolveConfig,
    ) -> Result<(SpectralField, SolveReport)> {
        cfg.validate()?;
        let gn = l2_norm(g);
        self.solve_band(g, Band::Full, None, cfg.tol * gn, gn, cfg)
    }
}

fn richardson(
    apply: &mut dyn FnMut(&[Complex64]) -> Result<Vec<Complex64>>,
    b: &[Complex64],
    mut x: Vec<Complex64>,
    true_norm: &dyn Fn(&[Complex64]) -> f64,
    target: f64,
    max_iter: usize,
) -> Result<(Vec<Complex64>, usize, Vec<f64>, f64)> {
    let mut history = Vec::new();
    for it in 1..=max_iter {
        let bx = apply(&x)?;
        let r: Vec<Complex64> = b.iter().zip(&bx).map(|(a, c)| a - c).collect();
        let tr = true_norm(&r);
        history.push(tr);
        if tr <= target {
            return Ok((x, it, history, tr));
        }
        let n = history.len();
        if !tr.is_finite()
            || (n >= 4
                && history[n - 1] > history[n - 2]
                && history[n - 2] > history[n - 3]
                && history[n - 3] > history[n - 4])
        {
            return Err(crate::Error::NonConvergence {
                iterations: it,
                residual: tr,
                target,
            });
        }
        for (xv, rv) in x.iter_mut().zip(&r) {
            *xv += rv;
        }
    }
    Err(crate::Error::NonConvergence {
        iterations: max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
        target,
    })
}

/// Solves `-Δθ + u·∇θ = g` with the configured method.
pub fn solve_direct(
    u: &VectorField,
    g: &SpectralField,
    cfg: &SolveConfig,
) -> Result<(SpectralField, SolveReport)> {
    TracerSystem::new(u).solve_direct(g, cfg)
}
