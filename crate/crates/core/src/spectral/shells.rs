use serde::{Deserialize, Serialize};

use super::field::{SpectralField, VectorField};
use super::lattice::Lattice;
use crate::error::{param, Result};

/// Per-integer-shell sums of `|k|^{2w} |f̂_k|^2` over `κ <= |k| < κ+1`.
///
/// All shells that hold lattice modes are stored (up to [`Lattice::max_shell`])
/// so tail sums are exact; only shells up to `trusted` are free of truncation
/// effects in solver output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellSpectrum {
    pub weight: u32,
    pub trusted: usize,
    /// `counts[κ - 1]` is the number of modes in shell κ.
    pub counts: Vec<usize>,
    /// `sums[κ - 1]` is the weighted power in shell κ.
    pub sums: Vec<f64>,
}

impl ShellSpectrum {
    fn empty(lattice: Lattice, weight: u32) -> Self {
        let shells = lattice.max_shell();
        Self {
            weight,
            trusted: lattice.kappa_max(),
            counts: shell_counts(lattice),
            sums: vec![0.0; shells],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.sums.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    /// Weighted power in shell `kappa` (zero outside the stored range).
    pub fn get(&self, kappa: usize) -> f64 {
        if kappa == 0 {
            return 0.0;
        }
        self.sums.get(kappa - 1).copied().unwrap_or(0.0)
    }

    /// `Σ_{κ' >= κ}`, which equals `‖|∇|^w f^{>κ}‖₂² / (2π)²` for integer κ.
    pub fn tail(&self, kappa: usize) -> f64 {
        let start = kappa.max(1) - 1;
        self.sums.iter().skip(start).sum()
    }

    pub fn total(&self) -> f64 {
        self.tail(1)
    }

    /// All tails at once, `tails[κ - 1] = tail(κ)`.
    pub fn tails(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.sums.len()];
        let mut acc = 0.0;
        for i in (0..self.sums.len()).rev() {
            acc += self.sums[i];
            out[i] = acc;
        }
        out
    }
}

/// Number of lattice modes per shell, `counts[κ - 1]`.
pub fn shell_counts(lattice: Lattice) -> Vec<usize> {
    let mut counts = vec![0; lattice.max_shell()];
    for m in lattice.modes() {
        counts[m.shell() - 1] += 1;
    }
    counts
}

pub fn shell_spectrum(f: &SpectralField, w: u32) -> Result<ShellSpectrum> {
    if w > 1 {
        return param(format!("shell weight exponent must be 0 or 1, got {w}"));
    }
    let lattice = f.lattice();
    let mut s = ShellSpectrum::empty(lattice, w);
    let c = f.coeffs();
    for m in lattice.modes() {
        let p = c[m.index].norm_sqr();
        let wt = if w == 1 { m.norm_sq() as f64 } else { 1.0 };
        s.sums[m.shell() - 1] += wt * p;
    }
    Ok(s)
}

/// Shell spectrum of a vector field, summed over components.
pub fn vector_shell_spectrum(u: &VectorField, w: u32) -> Result<ShellSpectrum> {
    let mut a = shell_spectrum(&u.x, w)?;
    let b = shell_spectrum(&u.y, w)?;
    for (x, y) in a.sums.iter_mut().zip(&b.sums) {
        *x += y;
    }
    Ok(a)
}
