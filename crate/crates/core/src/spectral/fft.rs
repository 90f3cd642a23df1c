//! Square 2D transforms on `m x m` collocation grids.
//!
//! Spectral buffers use the FFT layout `[i1 * m + i2]`. The fast paths below
//! skip the final transpose, so physical buffers they produce are laid out as
//! `[j2 * m + j1]`; pointwise products do not care, and [`physical_grid`]
//! restores the natural layout when it matters.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::SpectralField;
use super::lattice::Lattice;
use crate::error::{param, Result};

pub(crate) struct Grid2 {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Grid2>>>> = OnceLock::new();

/// Cached plan for an `m x m` grid.
pub(crate) fn plan(m: usize) -> Arc<Grid2> {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(m)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Grid2 {
                m,
                fwd: planner.plan_fft_forward(m),
                inv: planner.plan_fft_inverse(m),
            })
        })
        .clone()
}

/// Dealiasing grid size for products of two lattice fields.
#[inline]
pub(crate) fn padded_size(lattice: Lattice) -> usize {
    3 * lattice.n() / 2
}

#[inline]
pub(crate) fn wrap(k: i64, m: usize) -> usize {
    if k >= 0 {
        k as usize
    } else {
        (k + m as i64) as usize
    }
}

impl Grid2 {
    #[inline]
    pub(crate) fn m(&self) -> usize {
        self.m
    }

    fn rows(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [Complex64], rows: Option<&[usize]>) {
        let m = self.m;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        match rows {
            None => plan.process_with_scratch(buf, &mut scratch),
            Some(rows) => {
                for &r in rows {
                    plan.process_with_scratch(&mut buf[r * m..(r + 1) * m], &mut scratch);
                }
            }
        }
    }

    /// Spectral layout to physical layout `[j2][j1]`, unnormalized `e^{+ikx}`.
    /// Only the listed spectral rows may be non-zero.
    pub(crate) fn inverse(&self, buf: &mut [Complex64], rows: Option<&[usize]>) {
        self.rows(&self.inv, buf, rows);
        transpose(buf, self.m);
        self.rows(&self.inv, buf, None);
    }

    /// Physical layout `[j2][j1]` to spectral layout, unnormalized `e^{-ikx}`.
    /// Only the listed spectral rows are valid afterwards.
    pub(crate) fn forward(&self, buf: &mut [Complex64], rows: Option<&[usize]>) {
        self.rows(&self.fwd, buf, None);
        transpose(buf, self.m);
        self.rows(&self.fwd, buf, rows);
    }
}

/// In-place transpose of a square row-major matrix.
fn transpose(buf: &mut [Complex64], m: usize) {
    const B: usize = 32;
    for bi in (0..m).step_by(B) {
        for bj in (bi..m).step_by(B) {
            for i in bi..(bi + B).min(m) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(m) {
                    buf.swap(i * m + j, j * m + i);
                }
            }
        }
    }
}

/// Padded-grid rows that hold retained lattice wavenumbers.
pub(crate) fn lattice_rows(lattice: Lattice, m: usize) -> Vec<usize> {
    let h = lattice.max_component();
    (-h..=h).map(|k| wrap(k, m)).collect()
}

/// Writes `value(index, k1, k2)` for every retained mode into a zeroed
/// `m x m` spectral buffer.
pub(crate) fn embed(
    lattice: Lattice,
    m: usize,
    buf: &mut [Complex64],
    mut value: impl FnMut(usize, i64, i64) -> Complex64,
) {
    buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
    let h = lattice.max_component();
    let n = lattice.n();
    for k1 in -h..=h {
        let row_lat = lattice.axis_index(k1) * n;
        let row_pad = wrap(k1, m) * m;
        for k2 in -h..=h {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            buf[row_pad + wrap(k2, m)] = value(row_lat + lattice.axis_index(k2), k1, k2);
        }
    }
}

/// Reads retained modes back out of a spectral buffer with scaling `1/m^2`,
/// keeping those for which `keep(|k|^2)` holds.
pub(crate) fn truncate(
    lattice: Lattice,
    m: usize,
    buf: &[Complex64],
    keep: impl Fn(f64) -> bool,
) -> SpectralField {
    let mut out = SpectralField::zeros(lattice);
    let scale = 1.0 / (m * m) as f64;
    let h = lattice.max_component();
    let n = lattice.n();
    let dst = out.coeffs_mut();
    for k1 in -h..=h {
        let row_lat = lattice.axis_index(k1) * n;
        let row_pad = wrap(k1, m) * m;
        for k2 in -h..=h {
            if (k1 == 0 && k2 == 0) || !keep((k1 * k1 + k2 * k2) as f64) {
                continue;
            }
            dst[row_lat + lattice.axis_index(k2)] = buf[row_pad + wrap(k2, m)] * scale;
        }
    }
    out
}

/// Values of `f` at `x_j = 2π j / m` in natural layout `[j1 * m + j2]`.
///
/// For real `f` the imaginary parts are round-off; they are returned so
/// realness can be checked.
pub fn physical_grid(f: &SpectralField, m: usize) -> Result<Vec<Complex64>> {
    let lattice = f.lattice();
    if m < lattice.n() {
        return param(format!(
            "grid size {m} is smaller than the lattice size {}",
            lattice.n()
        ));
    }
    let grid = plan(m);
    let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
    let c = f.coeffs();
    embed(lattice, m, &mut buf, |i, _, _| c[i]);
    grid.inverse(&mut buf, Some(&lattice_rows(lattice, m)));
    transpose(&mut buf, m);
    Ok(buf)
}

/// Truncating forward transform of real grid samples in natural layout.
pub fn from_physical_grid(values: &[f64], m: usize, lattice: Lattice) -> Result<SpectralField> {
    if values.len() != m * m {
        return param(format!(
            "expected {} grid samples, got {}",
            m * m,
            values.len()
        ));
    }
    if m < lattice.n() {
        return param(format!(
            "grid size {m} is smaller than the lattice size {}",
            lattice.n()
        ));
    }
    let grid = plan(m);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transpose(&mut buf, m);
    grid.forward(&mut buf, Some(&lattice_rows(lattice, m)));
    Ok(truncate(lattice, m, &buf, |_| true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn transpose_roundtrip() {
        for m in [5usize, 33, 70] {
            let orig: Vec<Complex64> = (0..m * m).map(|i| Complex64::new(i as f64, 0.0)).collect();
            let mut b = orig.clone();
            transpose(&mut b, m);
            assert_eq!(b[1], orig[m]);
            transpose(&mut b, m);
            assert_eq!(b, orig);
        }
    }

    #[test]
    fn single_mode_on_grid() {
        let lat = Lattice::new(8).unwrap();
        let f = SpectralField::zeros(lat)
            .with_mode(1, 2, Complex64::new(0.5, 0.0))
            .unwrap();
        let m = 12;
        let g = physical_grid(&f, m).unwrap();
        for j1 in 0..m {
            for j2 in 0..m {
                let x = 2.0 * PI * (j1 as f64) / m as f64;
                let y = 2.0 * PI * (j2 as f64) / m as f64;
                let want = (x + 2.0 * y).cos();
                let got = g[j1 * m + j2];
                assert!((got.re - want).abs() < 1e-13 && got.im.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn grid_roundtrip() {
        let lat = Lattice::new(16).unwrap();
        let f = SpectralField::random(lat, 9, 1.0);
        let g = physical_grid(&f, 24).unwrap();
        let re: Vec<f64> = g.iter().map(|c| c.re).collect();
        let back = from_physical_grid(&re, 24, lat).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-14);
    }
}
