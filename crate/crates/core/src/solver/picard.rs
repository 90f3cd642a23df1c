use serde::{Deserialize, Serialize};

use super::TracerSystem;
use crate::error::{Error, Result};
use crate::spectral::{h1_norm, vector_norms, SpectralField, VectorField};

/// Small-amplitude Picard run: `τ₀ = -Δ^{-1}g`, `ϑ^{(n+1)} = Δ^{-1}(u·∇ϑ^{(n)} + u·∇τ₀)`.
#[derive(Debug, Clone)]
pub struct PicardRun {
    pub tau0: SpectralField,
    /// `ϑ^{(1)}, ϑ^{(2)}, …`
    pub iterates: Vec<SpectralField>,
    pub summary: PicardSummary,
}

/// Scalar diagnostics of a [`PicardRun`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardSummary {
    /// `‖∇δϑ^{(n)}‖₂`, `n = 1, 2, …`, with `δϑ^{(1)} = ϑ¹`.
    pub increments: Vec<f64>,
    /// `‖∇δϑ^{(n+1)}‖₂ / ‖∇δϑ^{(n)}‖₂`
    pub ratios: Vec<f64>,
    /// `‖û‖₁`, the majorant of `‖u‖∞` used as contraction bound.
    pub u_l1: f64,
    /// Every step satisfies `‖∇δϑ^{(n+1)}‖₂ <= ‖û‖₁ ‖∇δϑ^{(n)}‖₂` up to round-off.
    pub contraction_holds: bool,
    pub vartheta1_h1: f64,
    /// `‖∇(ϑ^{(n)} - ϑ¹)‖₂` for the last iterate.
    pub remainder_h1: f64,
    /// `‖∇ϑ¹‖₂ ‖û‖₁ / (1 - ‖û‖₁)`, infinite when `‖û‖₁ >= 1`.
    pub remainder_bound: f64,
}

impl PicardRun {
    pub fn vartheta(&self) -> Option<&SpectralField> {
        self.iterates.last()
    }
}

/// Round-off allowance on increment comparisons, relative to `‖∇ϑ¹‖₂`.
const ROUNDOFF: f64 = 1e-13;

/// Iterates until `n_max` steps or `‖∇δϑ^{(n)}‖₂ <= stop · ‖∇ϑ¹‖₂`.
pub fn picard_small_u(
    u: &VectorField,
    g: &SpectralField,
    n_max: usize,
    stop: f64,
) -> Result<PicardRun> {
    let sys = TracerSystem::new(u);
    let adv = sys.advector();
    let tau0 = g.map_radial(|k2| 1.0 / k2);
    let forcing = adv.apply(&tau0)?;
    let lap_inv = |f: &SpectralField| f.map_radial(|k2| -1.0 / k2);
    let u_l1 = vector_norms(u).l1_fourier;

    let v1 = lap_inv(&forcing);
    let v1n = h1_norm(&v1);
    let mut increments = vec![v1n];
    let mut iterates = vec![v1.clone()];
    let mut growth = 0;
    for step in 2..=n_max.max(1) {
        let last = *increments.last().unwrap();
        if v1n == 0.0 || last <= stop * v1n {
            break;
        }
        let current = iterates.last().unwrap();
        let mut rhs = adv.apply(current)?;
        rhs += &forcing;
        let next = lap_inv(&rhs);
        let inc = h1_norm(&(&next - current));
        growth = if inc > last { growth + 1 } else { 0 };
        increments.push(inc);
        iterates.push(next);
        if growth >= 3 || !inc.is_finite() {
            return Err(Error::Divergence {
                step,
                ratio: inc / last,
                hint: "the velocity is too large for the small-amplitude iteration; use the decomposition path",
            });
        }
    }

    let ratios: Vec<f64> = increments
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    let slack = ROUNDOFF * v1n;
    let contraction_holds = increments.windows(2).all(|w| w[1] <= u_l1 * w[0] + slack);
    let remainder_h1 = h1_norm(&(iterates.last().unwrap() - &v1));
    let remainder_bound = if u_l1 < 1.0 {
        v1n * u_l1 / (1.0 - u_l1)
    } else {
        f64::INFINITY
    };
    Ok(PicardRun {
        tau0,
        iterates,
        summary: PicardSummary {
            increments,
            ratios,
            u_l1,
            contraction_holds,
            vartheta1_h1: v1n,
            remainder_h1,
            remainder_bound,
        },
    })
}
