//! L¹ norms of the multiplier kernels `|∇|^{-s}` and `|∇|^{-s-1}∂₁`
//! restricted to high modes.
//!
//! The high-mode restriction is the square complement `max(|k₁|, |k₂|) >= κ/√2`,
//! which contains every `|k| >= κ`; on that set the kernel acts exactly like
//! the disk-restricted operator on fields supported in `|k| >= κ`. The symbol
//! is rolled off with a separable trapezoid between `B/2` and `B` so that the
//! kernel is a trigonometric polynomial, and `|kernel|` is integrated with the
//! trapezoidal rule on an `M x M` grid with `M >= 4B`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ladder::lm_ladder;
use crate::error::{param, Result};
use crate::spectral::fft::{plan, wrap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `|∇|^{-s}`
    T,
    /// `|∇|^{-s-1} ∂₁`
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub s: f64,
    /// High-mode cutoff; `1` keeps every non-zero mode.
    pub kappa: f64,
    /// Band limit `B` of the tapered symbol.
    pub band: usize,
    /// Grid points per axis.
    pub grid: usize,
}

impl KernelSpec {
    /// Band `8κ` (at least 64) and the smallest power-of-two grid `>= 4B`.
    pub fn new(kind: KernelKind, s: f64, kappa: f64) -> Self {
        let band = ((8.0 * kappa).ceil() as usize).max(64);
        Self {
            kind,
            s,
            kappa,
            band,
            grid: (4 * band).next_power_of_two(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0) {
            return param(format!(
                "kernel exponent s must be positive, got {}",
                self.s
            ));
        }
        if !(self.kappa >= 1.0) {
            return param(format!("kernel cutoff must be >= 1, got {}", self.kappa));
        }
        if (self.band as f64) < 2.0 * self.kappa {
            return param(format!(
                "band {} does not clear 2*kappa = {}",
                self.band,
                2.0 * self.kappa
            ));
        }
        if self.grid < 4 * self.band {
            return param(format!(
                "grid {} is below 4x the band limit {}; the L1 quadrature would be unresolved",
                self.grid, self.band
            ));
        }
        Ok(())
    }

    /// Low edge of the square complement.
    fn edge(&self) -> i64 {
        if self.kappa <= 1.0 {
            return 1;
        }
        (self.kappa / std::f64::consts::SQRT_2).ceil() as i64
    }

    /// Whether `k` lies where the synthesized symbol is exact (no taper, inside the high-mode set).
    pub fn exact_at(&self, k1: i64, k2: i64) -> bool {
        let h = (self.band / 2) as i64;
        let m = k1.abs().max(k2.abs());
        m >= self.edge() && m <= h && (k1 != 0 || k2 != 0)
    }

    /// Untapered symbol; purely imaginary for `R`.
    pub fn symbol(&self, k1: i64, k2: i64) -> Complex64 {
        let r2 = (k1 * k1 + k2 * k2) as f64;
        match self.kind {
            KernelKind::T => Complex64::new(r2.powf(-0.5 * self.s), 0.0),
            KernelKind::R => Complex64::new(0.0, k1 as f64 * r2.powf(-0.5 * (self.s + 1.0))),
        }
    }

    fn taper(&self, k: i64) -> f64 {
        let t = k.abs() as f64 / self.band as f64;
        if t <= 0.5 {
            1.0
        } else if t < 1.0 {
            2.0 * (1.0 - t)
        } else {
            0.0
        }
    }

    /// Kernel samples `Σ σ_k e^{ik·x}` in natural layout `[j1 * M + j2]`.
    pub fn samples(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let m = self.grid;
        let b = self.band as i64;
        let edge = self.edge();
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
        for k1 in -b..=b {
            for k2 in -b..=b {
                if k1.abs().max(k2.abs()) < edge {
                    continue;
                }
                let w = self.taper(k1) * self.taper(k2);
                if w > 0.0 {
                    buf[wrap(k1, m) * m + wrap(k2, m)] = self.symbol(k1, k2) * w;
                }
            }
        }
        synthesize(&mut buf, m);
        Ok(buf.iter().map(|z| z.re).collect())
    }
}

/// Spectral `[k1][k2]` to physical natural layout `[j1][j2]`.
fn synthesize(buf: &mut [Complex64], m: usize) {
    plan(m).inverse(buf, None);
    // inverse leaves [j2][j1]
    for i in 0..m {
        for j in i + 1..m {
            buf.swap(i * m + j, j * m + i);
        }
    }
}

/// Result of one kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelL1 {
    pub spec: KernelSpec,
    /// `(2π)^{-2} ∫ |K|`, the operator norm bound on every `L^p`.
    pub l1: f64,
    /// `l1 κ^s / L₂(2κ, s)` for `T`, `l1 κ^s / (s^{-1} L₂(2κ, s))` for `R`.
    pub ratio: f64,
}

pub fn kernel_l1(spec: &KernelSpec) -> Result<KernelL1> {
    let v = spec.samples()?;
    let l1 = v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64;
    let s = spec.s;
    let mut denom = lm_ladder(2.0 * spec.kappa, s, 2)?;
    if spec.kind == KernelKind::R {
        denom /= s;
    }
    Ok(KernelL1 {
        spec: *spec,
        l1,
        ratio: l1 * spec.kappa.powf(s) / denom,
    })
}

/// `max |K(-x₁, x₂) + K(x₁, x₂)|` relative to `max |K|`; zero for the `R` kernel.
pub fn antisymmetry_defect(samples: &[f64], m: usize) -> f64 {
    let peak = samples.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut worst = 0.0f64;
    for j1 in 0..m {
        let r1 = (m - j1) % m;
        for j2 in 0..m {
            worst = worst.max((samples[r1 * m + j2] + samples[j1 * m + j2]).abs());
        }
    }
    worst / peak.max(f64::MIN_POSITIVE)
}

/// Young witness on the kernel grid: for a random `w` supported where the
/// symbol is exact, `max|K*w| <= ‖K‖₁ max|w|` holds exactly for grid maxima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungWitness {
    pub applied_sup: f64,
    pub bound: f64,
}

pub fn kernel_young_witness(spec: &KernelSpec, seed: u64) -> Result<YoungWitness> {
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    let kernel = kernel_l1(spec)?;
    let m = spec.grid;
    let h = (spec.band / 2) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![Complex64::new(0.0, 0.0); m * m];
    let mut rw = vec![Complex64::new(0.0, 0.0); m * m];
    let kappa2 = spec.kappa * spec.kappa;
    for k1 in -h..=h {
        for k2 in 0..=h {
            if k2 == 0 && k1 <= 0 {
                continue;
            }
            let r2 = (k1 * k1 + k2 * k2) as f64;
            if r2 < kappa2 || !spec.exact_at(k1, k2) {
                continue;
            }
            let a = crate::spectral::unit(rng.next_u64()) - 0.5;
            let b = crate::spectral::unit(rng.next_u64()) - 0.5;
            let c = Complex64::new(a, b) / r2;
            let sym = spec.symbol(k1, k2);
            for (kk1, kk2, cc, ss) in [
                (k1, k2, c, sym),
                (-k1, -k2, c.conj(), spec.symbol(-k1, -k2)),
            ] {
                let i = wrap(kk1, m) * m + wrap(kk2, m);
                w[i] = cc;
                rw[i] = cc * ss;
            }
        }
    }
    synthesize(&mut w, m);
    synthesize(&mut rw, m);
    let sup = |v: &[Complex64]| v.iter().fold(0.0f64, |a, z| a.max(z.re.abs()));
    Ok(YoungWitness {
        applied_sup: sup(&rw),
        bound: kernel.l1 * sup(&w),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_rule_enforced() {
        let mut s = KernelSpec::new(KernelKind::T, 1.0, 8.0);
        assert!(s.validate().is_ok());
        s.grid = 2 * s.band;
        assert!(kernel_l1(&s).is_err());
    }

    #[test]
    fn r_kernel_is_odd_in_x1() {
        let s = KernelSpec::new(KernelKind::R, 1.0, 8.0);
        let v = s.samples().unwrap();
        assert!(antisymmetry_defect(&v, s.grid) < 1e-12);
        let t = KernelSpec::new(KernelKind::T, 1.0, 8.0);
        assert!(antisymmetry_defect(&t.samples().unwrap(), t.grid) > 1.0);
    }

    #[test]
    fn young_witness_holds() {
        for kind in [KernelKind::T, KernelKind::R] {
            let s = KernelSpec::new(kind, 0.5, 8.0);
            let y = kernel_young_witness(&s, 3).unwrap();
            assert!(y.applied_sup <= y.bound * (1.0 + 1e-12), "{kind:?}: {y:?}");
        }
    }
}
