//! Random-phase velocity synthesis.
//!
//! `û_k = i U |k|^{β-1} k^⊥ X_k` with `k^⊥ = (-k_2, k_1)` and unit-modulus
//! phases `X_k`, either on the whole lattice (steep family, `β < -2`) or on
//! `1 <= |k| < κ_η` with `β = -2` (Kraichnan family).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::spectral::{unit, Lattice, SpectralField, VectorField};

/// Spectral family of the synthetic velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Steep { beta: f64 },
    Kraichnan { cutoff: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityParams {
    pub amplitude: f64,
    #[serde(flatten)]
    pub family: Family,
}

impl VelocityParams {
    pub fn steep(amplitude: f64, beta: f64) -> Result<Self> {
        let p = Self {
            amplitude,
            family: Family::Steep { beta },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn kraichnan(amplitude: f64, cutoff: u32) -> Result<Self> {
        let p = Self {
            amplitude,
            family: Family::Kraichnan { cutoff },
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks the parameters that do not depend on the lattice.
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return param(format!(
                "velocity amplitude must be finite and >= 0, got {}",
                self.amplitude
            ));
        }
        match self.family {
            Family::Steep { beta } if !(beta < -2.0) || !beta.is_finite() => {
                param(format!("steep family needs beta < -2, got {beta}"))
            }
            Family::Kraichnan { cutoff } if cutoff < 4 => {
                param(format!("Kraichnan cutoff must be >= 4, got {cutoff}"))
            }
            _ => Ok(()),
        }
    }

    /// Checks the parameters against a lattice.
    pub fn validate_for(&self, lattice: Lattice) -> Result<()> {
        self.validate()?;
        if let Family::Kraichnan { cutoff } = self.family {
            if cutoff as usize > lattice.kappa_max() {
                return param(format!(
                    "Kraichnan cutoff {cutoff} exceeds kappa_max = {} for N = {}",
                    lattice.kappa_max(),
                    lattice.n()
                ));
            }
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        match self.family {
            Family::Steep { beta } => beta,
            Family::Kraichnan { .. } => -2.0,
        }
    }

    /// `m_β = ceil(-2β - 1)`
    pub fn m_beta(&self) -> u32 {
        (-2.0 * self.beta() - 1.0).ceil() as u32
    }

    /// Whether the mode `|k|^2 = norm_sq` carries energy.
    #[inline]
    pub fn active(&self, norm_sq: i64) -> bool {
        match self.family {
            Family::Steep { .. } => true,
            Family::Kraichnan { cutoff } => norm_sq < (cutoff as i64) * (cutoff as i64),
        }
    }

    /// Deterministic modulus `|û_k| = U |k|^β` (zero outside the active set).
    #[inline]
    pub fn modulus(&self, norm_sq: i64) -> f64 {
        if !self.active(norm_sq) {
            return 0.0;
        }
        self.amplitude * (norm_sq as f64).powf(0.5 * self.beta())
    }
}

/// Unit-modulus phases on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomPhaseField {
    pub seed: u64,
    pub frozen_below: Option<f64>,
    lattice: Lattice,
    /// Phase angle per storage slot; `ζ_{-k} = -ζ_k`.
    zeta: Vec<f64>,
}

impl RandomPhaseField {
    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn angle(&self, k1: i64, k2: i64) -> Option<f64> {
        self.lattice.index_of(k1, k2).map(|i| self.zeta[i])
    }

    /// `X_k` at a storage index.
    #[inline]
    pub fn phase_at(&self, index: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.zeta[index])
    }
}

/// Stream identifier for one half-lattice wavevector; independent of `N`.
#[inline]
fn stream_id(k1: i64, k2: i64) -> u64 {
    ((k1 as i32 as u32 as u64) << 32) | (k2 as i32 as u32 as u64)
}

/// Draws `ζ_k ~ U[0, 2π)` independently per half-lattice mode.
///
/// Each mode reads the first word of its own ChaCha stream keyed by
/// `(seed, k)`, so phases do not depend on iteration order or lattice size.
/// Modes with `|k| < frozen_below` are keyed by seed 0 instead.
pub fn sample_phases(seed: u64, lattice: Lattice, frozen_below: Option<f64>) -> RandomPhaseField {
    let mut live = ChaCha8Rng::seed_from_u64(seed);
    let mut frozen = ChaCha8Rng::seed_from_u64(0);
    let mut zeta = vec![0.0; lattice.len()];
    for m in lattice.half_modes() {
        let is_frozen = frozen_below.is_some_and(|kf| (m.norm_sq() as f64) < kf * kf);
        let rng = if is_frozen { &mut frozen } else { &mut live };
        rng.set_stream(stream_id(m.k[0], m.k[1]));
        rng.set_word_pos(0);
        let z = 2.0 * PI * unit(rng.next_u64());
        zeta[m.index] = z;
        zeta[lattice.conjugate_index(m.index)] = -z;
    }
    RandomPhaseField {
        seed,
        frozen_below,
        lattice,
        zeta,
    }
}

/// Builds `û_k = i U |k|^{β-1} k^⊥ X_k` on the phase lattice.
pub fn build_velocity(params: &VelocityParams, phases: &RandomPhaseField) -> Result<VectorField> {
    let lattice = phases.lattice();
    params.validate_for(lattice)?;
    let mut ux = vec![Complex64::new(0.0, 0.0); lattice.len()];
    let mut uy = vec![Complex64::new(0.0, 0.0); lattice.len()];
    let i = Complex64::new(0.0, 1.0);
    for m in lattice.modes() {
        let k2 = m.norm_sq();
        if !params.active(k2) {
            continue;
        }
        // |k|^{β-1}|k^⊥| = |k|^β
        let a = params.modulus(k2) / (k2 as f64).sqrt();
        let c = i * phases.phase_at(m.index) * a;
        ux[m.index] = c * (-m.k[1] as f64);
        uy[m.index] = c * (m.k[0] as f64);
    }
    VectorField::new(
        SpectralField::from_coeffs(lattice, ux)?,
        SpectralField::from_coeffs(lattice, uy)?,
    )
}

/// Deterministic norms of the synthetic velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticNorms {
    /// `‖u‖₂` by lattice summation.
    pub l2_exact: f64,
    /// `‖∇u‖₂` by lattice summation.
    pub h1_exact: f64,
    /// `‖Δu‖₂` by lattice summation.
    pub h2_exact: f64,
    /// `‖û‖₁` by lattice summation.
    pub l1_fourier_exact: f64,
    /// Continuum approximation of `‖u‖₂` over `|k| >= 1`.
    pub l2_continuum: f64,
    /// `‖u^{>κ}‖₂²` by lattice summation, indexed by integer shell `κ - 1`.
    pub l2_tail_sq: Vec<f64>,
}

impl AnalyticNorms {
    /// `‖u^{>κ}‖₂` from the lattice sum.
    pub fn l2_tail(&self, kappa: usize) -> f64 {
        if kappa <= 1 {
            return self.l2_exact;
        }
        self.l2_tail_sq
            .get(kappa - 1)
            .copied()
            .unwrap_or(0.0)
            .sqrt()
    }

    /// `‖u‖₂` restricted to shells at or beyond `κ_max`, the part the
    /// steep family loses to truncation is of the same order.
    pub fn truncation_tail(&self, lattice: Lattice) -> f64 {
        self.l2_tail(lattice.kappa_max())
    }
}

/// Continuum value of `‖u^{>κ}‖₂²` (for Kraichnan, `κ <= |k| < κ_η`).
pub fn l2_tail_continuum_sq(params: &VelocityParams, kappa: f64) -> f64 {
    let u2 = params.amplitude * params.amplitude;
    let c = (2.0 * PI).powi(3) * u2;
    match params.family {
        // ∫_κ^∞ r^{2β+1} dr = κ^{2β+2}/(-2β-2)
        Family::Steep { beta } => c * kappa.powf(2.0 * beta + 2.0) / (-2.0 * beta - 2.0),
        Family::Kraichnan { cutoff } => {
            let e = cutoff as f64;
            if kappa >= e {
                0.0
            } else {
                c * (kappa.powi(-2) - e.powi(-2)) / 2.0
            }
        }
    }
}

pub fn analytic_norms(params: &VelocityParams, lattice: Lattice) -> AnalyticNorms {
    let shells = lattice.max_shell();
    let mut shell_power = vec![0.0; shells];
    let (mut p1, mut p2, mut l1) = (0.0, 0.0, 0.0);
    for m in lattice.modes() {
        let k2 = m.norm_sq();
        let a = params.modulus(k2);
        let a2 = a * a;
        shell_power[m.shell() - 1] += a2;
        p1 += a2 * k2 as f64;
        p2 += a2 * (k2 * k2) as f64;
        l1 += a;
    }
    let mut tails = vec![0.0; shells];
    let mut acc = 0.0;
    for i in (0..shells).rev() {
        acc += shell_power[i];
        tails[i] = 4.0 * PI * PI * acc;
    }
    AnalyticNorms {
        l2_exact: tails.first().copied().unwrap_or(0.0).sqrt(),
        h1_exact: 2.0 * PI * p1.sqrt(),
        h2_exact: 2.0 * PI * p2.sqrt(),
        l1_fourier_exact: l1,
        l2_continuum: l2_tail_continuum_sq(params, 1.0).sqrt(),
        l2_tail_sq: tails,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::vector_norms;

    fn lat(n: usize) -> Lattice {
        Lattice::new(n).unwrap()
    }

    #[test]
    fn m_beta_values() {
        assert_eq!(VelocityParams::steep(1.0, -2.5).unwrap().m_beta(), 4);
        assert_eq!(VelocityParams::kraichnan(1.0, 8).unwrap().m_beta(), 3);
        assert_eq!(VelocityParams::steep(1.0, -3.0).unwrap().m_beta(), 5);
    }

    #[test]
    fn parameter_validation() {
        assert!(VelocityParams::steep(1.0, -2.0).is_err());
        assert!(VelocityParams::steep(-1.0, -2.5).is_err());
        assert!(VelocityParams::kraichnan(1.0, 3).is_err());
        let p = VelocityParams::kraichnan(1.0, 32).unwrap();
        assert!(p.validate_for(lat(64)).is_err());
        assert!(p.validate_for(lat(96)).is_ok());
    }

    #[test]
    fn phases_are_deterministic_and_unit() {
        let a = sample_phases(7, lat(16), None);
        let b = sample_phases(7, lat(16), None);
        assert_eq!(a, b);
        for m in lat(16).modes() {
            let x = a.phase_at(m.index);
            assert!((x.norm() - 1.0).abs() < 1e-15);
            let y = a.phase_at(lat(16).conjugate_index(m.index));
            assert!((y - x.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn phases_do_not_depend_on_lattice_size() {
        let a = sample_phases(11, lat(16), None);
        let b = sample_phases(11, lat(64), None);
        assert_eq!(a.angle(3, -5), b.angle(3, -5));
        assert_eq!(a.angle(-7, 7), b.angle(-7, 7));
    }

    #[test]
    fn frozen_modes_shared_across_seeds() {
        let a = sample_phases(1, lat(32), Some(8.0));
        let b = sample_phases(2, lat(32), Some(8.0));
        for m in lat(32).modes() {
            let same = a.phase_at(m.index) == b.phase_at(m.index);
            assert_eq!(same, m.norm_sq() < 64, "k = {:?}", m.k);
        }
    }

    #[test]
    fn velocity_direction_and_modulus() {
        let p = VelocityParams::steep(1.3, -2.5).unwrap();
        let ph = sample_phases(5, lat(16), None);
        let u = build_velocity(&p, &ph).unwrap();
        // k·k^⊥ vanishes identically; only the rounding of c·k_i survives.
        assert!(u.divergence_defect() <= 4.0 * f64::EPSILON);
        let i = lat(16).index_of(1, 2).unwrap();
        let (cx, cy) = (u.x.coeffs()[i], u.y.coeffs()[i]);
        // (ux, uy) ∥ (-2, 1): ux = -2 uy
        assert!((cx + cy * 2.0).norm() < 1e-15);
        for m in lat(16).modes() {
            let want = 1.3 * (m.norm_sq() as f64).powf(-1.25);
            assert!((u.modulus_at(m.index) - want).abs() < 1e-15 * want.max(1.0));
        }
    }

    #[test]
    fn kraichnan_cutoff_zeroes_high_modes() {
        let p = VelocityParams::kraichnan(1.0, 6).unwrap();
        let u = build_velocity(&p, &sample_phases(3, lat(32), None)).unwrap();
        for m in lat(32).modes() {
            assert_eq!(u.modulus_at(m.index) > 0.0, m.norm_sq() < 36);
        }
    }

    #[test]
    fn measured_norms_match_lattice_sums() {
        let p = VelocityParams::kraichnan(1.0, 8).unwrap();
        let lattice = lat(32);
        let an = analytic_norms(&p, lattice);
        for seed in [1, 2, 3] {
            let u = build_velocity(&p, &sample_phases(seed, lattice, None)).unwrap();
            let nr = vector_norms(&u);
            assert!((nr.l2 - an.l2_exact).abs() < 1e-13 * an.l2_exact);
            assert!((nr.h1 - an.h1_exact).abs() < 1e-13 * an.h1_exact);
            assert!((nr.l1_fourier - an.l1_fourier_exact).abs() < 1e-13 * an.l1_fourier_exact);
        }
    }

    #[test]
    fn kraichnan_l1_is_enstrophy_over_amplitude() {
        let p = VelocityParams::kraichnan(2.0, 10).unwrap();
        let an = analytic_norms(&p, lat(32));
        let want = an.h1_exact * an.h1_exact / (4.0 * PI * PI * 2.0);
        assert!((an.l1_fourier_exact - want).abs() < 1e-12 * want);
    }

    #[test]
    fn kraichnan_continuum_l2() {
        let p = VelocityParams::kraichnan(1.0, 32).unwrap();
        let want = (2.0 * PI).powi(3) * (1.0 - 32f64.powi(-2)) / 2.0;
        assert!((l2_tail_continuum_sq(&p, 1.0) - want).abs() < 1e-12 * want);
    }
}
