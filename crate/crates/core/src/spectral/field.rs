use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::lattice::Lattice;
use crate::error::{param, Error, Result};

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

/// Fourier coefficients of a real zero-mean field on a [`Lattice`].
///
/// Both `k` and `-k` are stored; constructors keep `coeff(-k) = conj(coeff(k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    lattice: Lattice,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(lattice: Lattice) -> Self {
        Self {
            lattice,
            coeffs: vec![Complex64::new(0.0, 0.0); lattice.len()],
        }
    }

    /// Builds a field from a coefficient rule evaluated on the half-lattice;
    /// the conjugate half is filled in to keep the field real.
    pub fn from_half(lattice: Lattice, mut rule: impl FnMut(i64, i64) -> Complex64) -> Self {
        let mut f = Self::zeros(lattice);
        for m in lattice.half_modes() {
            let c = rule(m.k[0], m.k[1]);
            f.coeffs[m.index] = c;
            f.coeffs[lattice.conjugate_index(m.index)] = c.conj();
        }
        f
    }

    /// Wraps raw storage. The caller is responsible for the Hermitian invariant;
    /// unpopulated slots are cleared.
    pub fn from_coeffs(lattice: Lattice, mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return param(format!(
                "coefficient vector has length {}, lattice needs {}",
                coeffs.len(),
                lattice.len()
            ));
        }
        for (i, c) in coeffs.iter_mut().enumerate() {
            if !lattice.is_retained(i) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Self { lattice, coeffs })
    }

    /// Wraps storage produced by lattice-preserving arithmetic.
    pub(crate) fn from_raw(lattice: Lattice, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), lattice.len());
        Self { lattice, coeffs }
    }

    /// Sets the coefficient at `k` and its conjugate partner at `-k`.
    pub fn set_mode(&mut self, k1: i64, k2: i64, value: Complex64) -> Result<()> {
        let Some(i) = self.lattice.index_of(k1, k2) else {
            return param(format!(
                "wavevector ({k1},{k2}) is not on the N={} lattice",
                self.lattice.n()
            ));
        };
        let j = self.lattice.conjugate_index(i);
        if i == j {
            unreachable!("k = -k only at k = 0, which is excluded");
        }
        self.coeffs[i] = value;
        self.coeffs[j] = value.conj();
        Ok(())
    }

    pub fn with_mode(mut self, k1: i64, k2: i64, value: Complex64) -> Result<Self> {
        self.set_mode(k1, k2, value)?;
        Ok(self)
    }

    /// Deterministic random real field with amplitudes `|k|^-decay` and
    /// uniform random phases; used by the verification suite and tests.
    pub fn random(lattice: Lattice, seed: u64, decay: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_half(lattice, |k1, k2| {
            let r = ((k1 * k1 + k2 * k2) as f64).powf(-0.5 * decay);
            let a = unit(rng.next_u64()) - 0.5;
            let b = unit(rng.next_u64()) - 0.5;
            Complex64::new(a, b) * (2.0 * r)
        })
    }

    #[inline]
    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.lattice
            .index_of(k1, k2)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Largest violation of `coeff(-k) = conj(coeff(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        self.lattice
            .modes()
            .map(|m| {
                let j = self.lattice.conjugate_index(m.index);
                (self.coeffs[j] - self.coeffs[m.index].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Multiplies each retained coefficient by `symbol(k1, k2)`.
    pub fn map_symbol(&self, mut symbol: impl FnMut(i64, i64) -> Complex64) -> Self {
        let mut out = Self::zeros(self.lattice);
        for m in self.lattice.modes() {
            out.coeffs[m.index] = self.coeffs[m.index] * symbol(m.k[0], m.k[1]);
        }
        out
    }

    /// Multiplies each retained coefficient by a real radial factor `f(|k|^2)`.
    pub fn map_radial(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        let mut out = Self::zeros(self.lattice);
        for m in self.lattice.modes() {
            out.coeffs[m.index] = self.coeffs[m.index] * f(m.norm_sq() as f64);
        }
        out
    }

    /// `Σ |f̂_k|^2 |k|^{2w}` over the lattice.
    pub fn weighted_power(&self, w: f64) -> f64 {
        if w == 0.0 {
            return self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        }
        self.lattice
            .modes()
            .map(|m| self.coeffs[m.index].norm_sqr() * (m.norm_sq() as f64).powf(w))
            .sum()
    }

    /// Physical-space inner product `∫ a b dx = (2π)^2 Re Σ a_k conj(b_k)`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        check_same(self.lattice, other.lattice)?;
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        Ok(FOUR_PI_SQ * s)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            lattice: self.lattice,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &Self) {
        assert_eq!(self.lattice, x.lattice, "lattice mismatch in axpy");
        for (y, xv) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *y += xv * a;
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_same(a: Lattice, b: Lattice) -> Result<()> {
    if a != b {
        return Err(Error::LatticeMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    Ok(())
}

/// Uniform double in `[0, 1)` from the top 53 bits of a 64-bit word.
#[inline]
pub(crate) fn unit(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        assert_eq!(self.lattice, rhs.lattice, "lattice mismatch in add");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        assert_eq!(self.lattice, rhs.lattice, "lattice mismatch in sub");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scale(a)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

/// Two-component field on a common lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub x: SpectralField,
    pub y: SpectralField,
}

impl VectorField {
    pub fn new(x: SpectralField, y: SpectralField) -> Result<Self> {
        check_same(x.lattice(), y.lattice())?;
        Ok(Self { x, y })
    }

    pub fn zeros(lattice: Lattice) -> Self {
        Self {
            x: SpectralField::zeros(lattice),
            y: SpectralField::zeros(lattice),
        }
    }

    #[inline]
    pub fn lattice(&self) -> Lattice {
        self.x.lattice()
    }

    /// Componentwise map, e.g. a projection applied to both components.
    pub fn map(&self, mut f: impl FnMut(&SpectralField) -> SpectralField) -> Self {
        Self {
            x: f(&self.x),
            y: f(&self.y),
        }
    }

    /// `max_k |k · û_k|`.
    pub fn divergence_defect(&self) -> f64 {
        let (ux, uy) = (self.x.coeffs(), self.y.coeffs());
        self.lattice()
            .modes()
            .map(|m| (ux[m.index] * m.k[0] as f64 + uy[m.index] * m.k[1] as f64).norm())
            .fold(0.0, f64::max)
    }

    /// `|û_k|` (Euclidean modulus of the complex 2-vector) at a storage index.
    #[inline]
    pub fn modulus_at(&self, index: usize) -> f64 {
        (self.x.coeffs()[index].norm_sqr() + self.y.coeffs()[index].norm_sqr()).sqrt()
    }

    pub fn weighted_power(&self, w: f64) -> f64 {
        self.x.weighted_power(w) + self.y.weighted_power(w)
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        Ok(self.x.inner(&other.x)? + self.y.inner(&other.y)?)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_half_is_hermitian() {
        let lat = Lattice::new(16).unwrap();
        let f = SpectralField::random(lat, 3, 1.0);
        assert_eq!(f.hermitian_defect(), 0.0);
        assert!(!f.is_zero());
    }

    #[test]
    fn set_mode_rejects_off_lattice() {
        let lat = Lattice::new(8).unwrap();
        let mut f = SpectralField::zeros(lat);
        assert!(f.set_mode(4, 0, Complex64::new(1.0, 0.0)).is_err());
        assert!(f.set_mode(0, 0, Complex64::new(1.0, 0.0)).is_err());
        f.set_mode(-3, 2, Complex64::new(1.0, 2.0)).unwrap();
        assert_eq!(f.coeff(3, -2), Complex64::new(1.0, -2.0));
    }

    #[test]
    fn inner_product_uses_torus_measure() {
        let lat = Lattice::new(8).unwrap();
        let f = SpectralField::zeros(lat)
            .with_mode(1, 0, Complex64::new(0.5, 0.0))
            .unwrap();
        // cos(x) has ∫cos² = 2π².
        let v = f.inner(&f).unwrap();
        assert!((v - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn lattice_mismatch_is_reported() {
        let a = SpectralField::zeros(Lattice::new(8).unwrap());
        let b = SpectralField::zeros(Lattice::new(16).unwrap());
        assert!(matches!(
            a.inner(&b),
            Err(Error::LatticeMismatch { left: 8, right: 16 })
        ));
    }
}
