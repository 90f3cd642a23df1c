use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::{self, embed, lattice_rows, padded_size, truncate};
use super::field::{check_same, SpectralField, VectorField};
use super::lattice::Lattice;
use crate::error::{param, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Radial band of wavenumbers, closed below and open above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Band {
    Full,
    /// `|k| < κ`
    Below(f64),
    /// `|k| >= κ`
    From(f64),
    /// `lo <= |k| < hi`
    Between(f64, f64),
}

impl Band {
    #[inline]
    pub fn contains_sq(&self, norm_sq: f64) -> bool {
        match *self {
            Band::Full => true,
            Band::Below(k) => norm_sq < k * k,
            Band::From(k) => norm_sq >= k * k,
            Band::Between(lo, hi) => norm_sq >= lo * lo && norm_sq < hi * hi,
        }
    }

    pub fn apply(&self, f: &SpectralField) -> SpectralField {
        if *self == Band::Full {
            return f.clone();
        }
        f.map_radial(|k2| if self.contains_sq(k2) { 1.0 } else { 0.0 })
    }
}

/// Spectral projection onto `κ_lo <= |k| < κ_hi` (`κ_hi` may be infinite).
pub fn project(f: &SpectralField, kappa_lo: f64, kappa_hi: f64) -> Result<SpectralField> {
    if !(kappa_lo >= 1.0) {
        return param(format!(
            "projection lower edge must be >= 1, got {kappa_lo}"
        ));
    }
    if !(kappa_lo < kappa_hi) {
        return param(format!("empty projection band [{kappa_lo}, {kappa_hi})"));
    }
    Ok(Band::Between(kappa_lo, kappa_hi).apply(f))
}

/// `f^{<κ}`
pub fn low_pass(f: &SpectralField, kappa: f64) -> SpectralField {
    Band::Below(kappa).apply(f)
}

/// `f^{>κ}`, which keeps `|k| >= κ`.
pub fn high_pass(f: &SpectralField, kappa: f64) -> SpectralField {
    Band::From(kappa).apply(f)
}

/// `|∇|^s f`.
pub fn fractional_laplacian(f: &SpectralField, s: f64) -> SpectralField {
    if s == 0.0 {
        return f.clone();
    }
    if s == 2.0 {
        return f.map_radial(|k2| k2);
    }
    if s == -2.0 {
        return f.map_radial(|k2| 1.0 / k2);
    }
    f.map_radial(|k2| k2.powf(0.5 * s))
}

pub fn gradient(f: &SpectralField) -> VectorField {
    VectorField {
        x: f.map_symbol(|k1, _| I * k1 as f64),
        y: f.map_symbol(|_, k2| I * k2 as f64),
    }
}

pub fn divergence(v: &VectorField) -> SpectralField {
    let a = v.x.map_symbol(|k1, _| I * k1 as f64);
    let b = v.y.map_symbol(|_, k2| I * k2 as f64);
    &a + &b
}

/// Truncated convolution of two real lattice fields via 3/2-rule padding.
pub fn dealiased_product(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    let lattice = a.lattice();
    check_same(lattice, b.lattice())?;
    let m = padded_size(lattice);
    let grid = fft::plan(m);
    let rows = lattice_rows(lattice, m);
    let (ca, cb) = (a.coeffs(), b.coeffs());
    let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
    // Both inputs are real, so one complex transform carries a + i b.
    embed(lattice, m, &mut buf, |i, _, _| ca[i] + I * cb[i]);
    grid.inverse(&mut buf, Some(&rows));
    for z in buf.iter_mut() {
        *z = Complex64::new(z.re * z.im, 0.0);
    }
    grid.forward(&mut buf, Some(&rows));
    Ok(truncate(lattice, m, &buf, |_| true))
}

/// Reusable dealiased advection operator `f ↦ u·∇f` for a fixed velocity.
///
/// The velocity is transformed once to the padded grid; each application
/// costs one inverse and one forward transform.
pub struct Advector {
    lattice: Padded,
    ux: Vec<f64>,
    uy: Vec<f64>,
}

struct Padded {
    lattice: Lattice,
    grid: Arc<fft::Grid2>,
    rows: Vec<usize>,
}

impl Advector {
    pub fn new(u: &VectorField) -> Self {
        let lattice = u.lattice();
        let m = padded_size(lattice);
        let handle = Padded {
            lattice,
            grid: fft::plan(m),
            rows: lattice_rows(lattice, m),
        };
        let (cx, cy) = (u.x.coeffs(), u.y.coeffs());
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
        embed(lattice, m, &mut buf, |i, _, _| cx[i] + I * cy[i]);
        handle.grid.inverse(&mut buf, Some(&handle.rows));
        Self {
            lattice: handle,
            ux: buf.iter().map(|z| z.re).collect(),
            uy: buf.iter().map(|z| z.im).collect(),
        }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice.lattice
    }

    /// `u·∇f`, dealiased.
    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        self.apply_band(f, Band::Full)
    }

    /// `P_band (u·∇f)`.
    pub fn apply_band(&self, f: &SpectralField, band: Band) -> Result<SpectralField> {
        let h = &self.lattice;
        check_same(h.lattice, f.lattice())?;
        let m = h.grid.m();
        let c = f.coeffs();
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
        // i k1 f + i (i k2 f): both gradient components in one transform.
        embed(h.lattice, m, &mut buf, |i, k1, k2| {
            c[i] * Complex64::new(-(k2 as f64), k1 as f64)
        });
        h.grid.inverse(&mut buf, Some(&h.rows));
        for ((z, &ux), &uy) in buf.iter_mut().zip(&self.ux).zip(&self.uy) {
            *z = Complex64::new(ux * z.re + uy * z.im, 0.0);
        }
        h.grid.forward(&mut buf, Some(&h.rows));
        Ok(truncate(h.lattice, m, &buf, |k2| band.contains_sq(k2)))
    }
}

/// Dealiased `u·∇f`.
pub fn advect(u: &VectorField, f: &SpectralField) -> Result<SpectralField> {
    check_same(u.lattice(), f.lattice())?;
    Advector::new(u).apply(f)
}

/// Norms of a field. `linf`/`w1inf` are oversampled grid maxima, hence lower
/// bounds; `l1_fourier` is the rigorous majorant of the supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldNorms {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub l1_fourier: f64,
    pub linf: f64,
    pub w1inf: f64,
}

/// `‖f‖₂ = 2π (Σ|f̂|²)^{1/2}`
pub fn l2_norm(f: &SpectralField) -> f64 {
    2.0 * PI * f.weighted_power(0.0).sqrt()
}

/// `‖∇f‖₂`
pub fn h1_norm(f: &SpectralField) -> f64 {
    2.0 * PI * f.weighted_power(1.0).sqrt()
}

/// `‖Δf‖₂`
pub fn h2_norm(f: &SpectralField) -> f64 {
    2.0 * PI * f.weighted_power(2.0).sqrt()
}

/// `‖|∇|^s f‖₂`
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    2.0 * PI * f.weighted_power(s).sqrt()
}

/// `Σ|f̂_k|`
pub fn l1_fourier(f: &SpectralField) -> f64 {
    f.coeffs().iter().map(|c| c.norm()).sum()
}

/// `Σ|k||f̂_k|`, the majorant of `‖∇f‖∞`.
pub fn grad_l1_fourier(f: &SpectralField) -> f64 {
    f.lattice()
        .modes()
        .map(|m| m.norm() * f.coeffs()[m.index].norm())
        .sum()
}

fn max_on_grid(f: &SpectralField, packed: impl Fn(usize, i64, i64) -> Complex64) -> f64 {
    let lattice = f.lattice();
    let m = 2 * lattice.n();
    let grid = fft::plan(m);
    let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
    embed(lattice, m, &mut buf, packed);
    grid.inverse(&mut buf, Some(&lattice_rows(lattice, m)));
    buf.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn norms(f: &SpectralField) -> FieldNorms {
    let c = f.coeffs();
    FieldNorms {
        l2: l2_norm(f),
        h1: h1_norm(f),
        h2: h2_norm(f),
        l1_fourier: l1_fourier(f),
        linf: max_on_grid(f, |i, _, _| Complex64::new(c[i].re, c[i].im)),
        w1inf: max_on_grid(f, |i, k1, k2| {
            c[i] * Complex64::new(-(k2 as f64), k1 as f64)
        }),
    }
}

/// Norms of a vector field; moduli are Euclidean (Frobenius for the gradient).
pub fn vector_norms(u: &VectorField) -> FieldNorms {
    let (cx, cy) = (u.x.coeffs(), u.y.coeffs());
    let lattice = u.lattice();
    let l1 = lattice.modes().map(|m| u.modulus_at(m.index)).sum();
    let linf = max_on_grid(&u.x, |i, _, _| cx[i] + I * cy[i]);
    let w1inf = {
        let m = 2 * lattice.n();
        let grid = fft::plan(m);
        let rows = lattice_rows(lattice, m);
        let mut gx = vec![Complex64::new(0.0, 0.0); m * m];
        let mut gy = vec![Complex64::new(0.0, 0.0); m * m];
        embed(lattice, m, &mut gx, |i, k1, k2| {
            cx[i] * Complex64::new(-(k2 as f64), k1 as f64)
        });
        embed(lattice, m, &mut gy, |i, k1, k2| {
            cy[i] * Complex64::new(-(k2 as f64), k1 as f64)
        });
        grid.inverse(&mut gx, Some(&rows));
        grid.inverse(&mut gy, Some(&rows));
        gx.iter()
            .zip(&gy)
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .fold(0.0, f64::max)
    };
    let pw = |w: f64| 2.0 * PI * u.weighted_power(w).sqrt();
    FieldNorms {
        l2: pw(0.0),
        h1: pw(1.0),
        h2: pw(2.0),
        l1_fourier: l1,
        linf,
        w1inf,
    }
}
