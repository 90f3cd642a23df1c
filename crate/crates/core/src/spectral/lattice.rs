use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Truncated zero-mean Fourier lattice with `n` storage slots per axis.
///
/// Wavenumbers satisfy `-n/2 < k_i < n/2` and `k != 0`. The Nyquist row and
/// column are allocated (storage follows the FFT layout) but never populated,
/// which keeps the retained set closed under `k -> -k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    n: usize,
}

/// One retained wavevector together with its storage index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mode {
    pub index: usize,
    pub k: [i64; 2],
}

impl Mode {
    #[inline]
    pub fn norm_sq(&self) -> i64 {
        self.k[0] * self.k[0] + self.k[1] * self.k[1]
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// Integer shell `s` with `s <= |k| < s + 1`.
    #[inline]
    pub fn shell(&self) -> usize {
        isqrt(self.norm_sq() as u64) as usize
    }
}

impl Lattice {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return param(format!("grid size N must be even and at least 4, got {n}"));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of storage slots (`n * n`), including unpopulated ones.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest shell that is trusted after dealiasing.
    #[inline]
    pub fn kappa_max(&self) -> usize {
        self.n / 3
    }

    /// Largest `|k_i|` on the lattice.
    #[inline]
    pub fn max_component(&self) -> i64 {
        self.n as i64 / 2 - 1
    }

    /// Largest shell index that contains any retained mode.
    pub fn max_shell(&self) -> usize {
        let m = self.max_component() as u64;
        isqrt(2 * m * m) as usize
    }

    #[inline]
    pub(crate) fn axis_k(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub(crate) fn axis_index(&self, k: i64) -> usize {
        if k >= 0 {
            k as usize
        } else {
            (k + self.n as i64) as usize
        }
    }

    /// Wavevector stored at `index` (meaningless for unpopulated slots).
    #[inline]
    pub fn wavevector(&self, index: usize) -> [i64; 2] {
        [self.axis_k(index / self.n), self.axis_k(index % self.n)]
    }

    #[inline]
    pub fn contains(&self, k1: i64, k2: i64) -> bool {
        let h = self.max_component();
        (k1 != 0 || k2 != 0) && k1.abs() <= h && k2.abs() <= h
    }

    #[inline]
    pub fn is_retained(&self, index: usize) -> bool {
        let [k1, k2] = self.wavevector(index);
        self.contains(k1, k2)
    }

    pub fn index_of(&self, k1: i64, k2: i64) -> Option<usize> {
        self.contains(k1, k2)
            .then(|| self.axis_index(k1) * self.n + self.axis_index(k2))
    }

    /// Storage index of `-k` given the storage index of `k`.
    #[inline]
    pub fn conjugate_index(&self, index: usize) -> usize {
        let (i1, i2) = (index / self.n, index % self.n);
        let flip = |i: usize| if i == 0 { 0 } else { self.n - i };
        flip(i1) * self.n + flip(i2)
    }

    /// Iterates over retained modes in storage order.
    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.len()).filter_map(move |index| {
            let k = self.wavevector(index);
            self.contains(k[0], k[1]).then_some(Mode { index, k })
        })
    }

    /// Retained modes on the half-lattice `{k2 > 0} ∪ {k2 = 0, k1 > 0}`.
    pub fn half_modes(&self) -> impl Iterator<Item = Mode> + '_ {
        self.modes()
            .filter(|m| m.k[1] > 0 || (m.k[1] == 0 && m.k[0] > 0))
    }

    pub fn mode_count(&self) -> usize {
        let side = 2 * self.max_component() as usize + 1;
        side * side - 1
    }

    /// `|k|^2` per storage slot, zero on unpopulated slots.
    pub fn norm_sq_table(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for m in self.modes() {
            out[m.index] = m.norm_sq() as f64;
        }
        out
    }
}

/// Floor of the square root of `v`, exact for all `u64`.
pub fn isqrt(v: u64) -> u64 {
    let mut r = (v as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > v) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= v) {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_tiny_grids() {
        assert!(Lattice::new(7).is_err());
        assert!(Lattice::new(2).is_err());
        assert!(Lattice::new(8).is_ok());
    }

    #[test]
    fn retained_set_excludes_zero_and_is_symmetric() {
        let lat = Lattice::new(16).unwrap();
        let mut count = 0;
        for m in lat.modes() {
            count += 1;
            assert_ne!(m.k, [0, 0]);
            let j = lat.index_of(-m.k[0], -m.k[1]).unwrap();
            assert_eq!(j, lat.conjugate_index(m.index));
        }
        assert_eq!(count, lat.mode_count());
        assert_eq!(count, 15 * 15 - 1);
        assert_eq!(lat.half_modes().count(), count / 2);
    }

    #[test]
    fn kappa_max_and_shells() {
        let lat = Lattice::new(128).unwrap();
        assert_eq!(lat.kappa_max(), 42);
        assert_eq!(lat.max_shell(), 89);
        assert_eq!(isqrt(24), 4);
        assert_eq!(isqrt(25), 5);
        assert_eq!(isqrt(u64::MAX), 4294967295);
    }
}
