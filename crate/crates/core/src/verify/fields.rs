use std::f64::consts::PI;

use num_complex::Complex64;

use super::BoundReport;
use crate::error::{param, Result};
use crate::spectral::{
    advect, fractional_laplacian, grad_l1_fourier, h1_norm, high_pass, l1_fourier, l2_norm,
    low_pass, norms, physical_grid, sobolev_norm, vector_norms, SpectralField, VectorField,
};
use crate::velocity::{Family, VelocityParams};

/// Relative slack for inequalities that hold exactly on the lattice.
pub const EXACT_SLACK: f64 = 1e-12;

/// `‖v^{>κ}‖₂ <= κ^{-1} ‖∇v^{>κ}‖₂`
pub fn poincare(v: &SpectralField, kappa: f64) -> BoundReport {
    let h = high_pass(v, kappa);
    BoundReport::exact(
        "poi",
        format!("kappa={kappa}"),
        l2_norm(&h),
        h1_norm(&h) / kappa,
        EXACT_SLACK,
    )
}

/// `|∇|^{-1} ∇·u`, with coefficients `i (k/|k|)·û_k`.
pub fn riesz_divergence(u: &VectorField) -> SpectralField {
    let (cx, cy) = (u.x.coeffs(), u.y.coeffs());
    let lattice = u.lattice();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); lattice.len()];
    for m in lattice.modes() {
        let r = m.norm();
        coeffs[m.index] = Complex64::new(0.0, 1.0)
            * (cx[m.index] * m.k[0] as f64 + cy[m.index] * m.k[1] as f64)
            / r;
    }
    SpectralField::from_coeffs(lattice, coeffs).expect("Hermitian by construction")
}

/// `‖|∇|^{-1}∇·u‖₂ <= ‖u‖₂`
pub fn gbiu(u: &VectorField, case: impl Into<String>) -> BoundReport {
    let v = riesz_divergence(u);
    BoundReport::exact("gbiu", case, l2_norm(&v), vector_norms(u).l2, EXACT_SLACK)
}

/// Chain `‖v‖∞ <= ‖v̂‖₁ <= ‖û‖₁` for `v = |∇|^{-1}∇·u`, the common first half
/// of the Agmon and Brezis–Gallouët bounds.
fn sup_chain(u: &VectorField) -> (bool, f64, f64, f64) {
    let v = riesz_divergence(u);
    let sup = norms(&v).linf;
    let vl1 = l1_fourier(&v);
    let ul1 = vector_norms(u).l1_fourier;
    let ok = sup <= vl1 * (1.0 + EXACT_SLACK) && vl1 <= ul1 * (1.0 + EXACT_SLACK);
    (ok, sup, vl1, ul1)
}

/// `‖û‖₁ <= c ‖u‖₂^{1/2} ‖Δu‖₂^{1/2}` with measured `c`.
pub fn agmon(u: &VectorField, case: impl Into<String>) -> BoundReport {
    let (ok, sup, vl1, ul1) = sup_chain(u);
    let n = vector_norms(u);
    let mut r = BoundReport::measured("agmon", case, ul1, (n.l2 * n.h2).sqrt());
    r.pass &= ok;
    r.note = format!("grid sup {sup:.6e} <= |v^|_1 {vl1:.6e} <= |u^|_1");
    r
}

/// `‖û‖₁ <= c ‖∇u‖₂ (1 + log(‖Δu‖₂/‖∇u‖₂)^{1/2})` with measured `c`.
pub fn brezis_gallouet(u: &VectorField, case: impl Into<String>) -> BoundReport {
    let (ok, sup, vl1, ul1) = sup_chain(u);
    let n = vector_norms(u);
    let rhs = n.h1 * (1.0 + (n.h2 / n.h1).ln().max(0.0).sqrt());
    let mut r = BoundReport::measured("bgu", case, ul1, rhs);
    r.pass &= ok;
    r.note = format!("grid sup {sup:.6e} <= |v^|_1 {vl1:.6e} <= |u^|_1");
    r
}

/// `‖v^{<κ}‖∞² <= c log κ ‖∇v^{<κ}‖₂²` using the `‖v̂‖₁` majorant on the left.
///
/// Cauchy–Schwarz gives the lattice constant `Σ_{|k|<κ} |k|^{-2} / (4π² log κ)`,
/// which the measured constant never exceeds; `pass` checks exactly that.
pub fn kinfty(v: &SpectralField, kappa: f64) -> BoundReport {
    let low = low_pass(v, kappa);
    let left = l1_fourier(&low).powi(2);
    let right = kappa.ln() * h1_norm(&low).powi(2);
    let sum_inv: f64 = v
        .lattice()
        .modes()
        .filter(|m| (m.norm_sq() as f64) < kappa * kappa)
        .map(|m| 1.0 / m.norm_sq() as f64)
        .sum();
    let c_cs = sum_inv / (4.0 * PI * PI * kappa.ln());
    let mut r = BoundReport::measured("kinfty", format!("kappa={kappa}"), left, right);
    r.pass &= r.constant <= c_cs * (1.0 + EXACT_SLACK);
    r.note = format!("Cauchy-Schwarz lattice constant {c_cs:.6e}");
    r
}

/// `‖û‖₁ <= c (-2πU/(β+2))` for the steep family; `None` for Kraichnan.
pub fn u8_bound(u: &VectorField, params: &VelocityParams) -> Option<BoundReport> {
    let Family::Steep { beta } = params.family else {
        return None;
    };
    let l1 = vector_norms(u).l1_fourier;
    let mut r = BoundReport::measured(
        "u8",
        format!("beta={beta}"),
        l1,
        -2.0 * PI * params.amplitude / (beta + 2.0),
    );
    r.note = "lattice sum against the continuum integral".into();
    Some(r)
}

/// Global bounds on a converged solve of `-Δθ + u·∇θ = g`.
///
/// `residual` is `‖-Δθ + u·∇θ - g‖₂`; it perturbs `‖∇θ‖₂` by at most itself.
pub fn tracer_bounds(
    u: &VectorField,
    theta: &SpectralField,
    g: &SpectralField,
    residual: f64,
    case: &str,
) -> Vec<BoundReport> {
    let gi = sobolev_norm(g, -1.0);
    let un = vector_norms(u);
    let tn = norms(theta);
    let mut out = Vec::new();

    out.push(BoundReport::exact(
        "tht-h1",
        case,
        tn.h1,
        gi + residual,
        EXACT_SLACK,
    ));

    // ‖Δθ‖₂² <= |(u·∇θ, Δθ)| + ‖g‖₂‖Δθ‖₂, and the constant is the one in
    // |(u·∇θ, Δθ)| <= c ‖∇u‖₂ ‖∇θ‖₂ ‖Δθ‖₂.
    let cross = advect(u, theta)
        .and_then(|a| a.inner(&fractional_laplacian(theta, 2.0)))
        .map(f64::abs)
        .unwrap_or(f64::NAN);
    let mut h2 = BoundReport::measured("tht-h2", case, cross, un.h1 * tn.h1 * tn.h2);
    let bound = h2.constant * un.h1 * gi + l2_norm(g) + residual * (1.0 + h2.constant * un.h1);
    h2.pass &= tn.h2 <= bound * (1.0 + EXACT_SLACK);
    h2.note = format!("|lap theta|_2 = {:.6e} <= {bound:.6e}", tn.h2);
    out.push(h2);

    let log = (tn.h2 / tn.h1).ln().max(0.0).sqrt();
    let mut l8 = BoundReport::measured("tht-l8", case, tn.l1_fourier, tn.h1 * (1.0 + log));
    l8.pass &= tn.linf <= tn.l1_fourier * (1.0 + EXACT_SLACK);
    l8.note = format!("grid sup {:.6e} <= |theta^|_1", tn.linf);
    out.push(l8);

    let g_inv_l1: f64 = g
        .lattice()
        .modes()
        .map(|m| g.coeffs()[m.index].norm() / m.norm())
        .sum();
    let grad_major = grad_l1_fourier(theta);
    let mut w18 = BoundReport::measured(
        "tht-w18",
        case,
        (grad_major - g_inv_l1).max(0.0),
        un.l1_fourier * tn.l1_fourier,
    );
    w18.pass &= tn.w1inf <= grad_major * (1.0 + EXACT_SLACK);
    w18.note = "constant multiplies |u^|_1 |theta^|_1 after subtracting ||grad|^-1 g^|_1".into();
    out.push(w18);
    out
}

/// Runs every field inequality that applies to `(u, θ, g)` and each κ.
pub fn verify_field_inequalities(
    u: &VectorField,
    theta: &SpectralField,
    g: &SpectralField,
    residual: f64,
    kappas: &[f64],
    params: Option<&VelocityParams>,
) -> Result<Vec<BoundReport>> {
    crate::spectral::check_same_lattice(u.lattice(), theta.lattice())?;
    crate::spectral::check_same_lattice(theta.lattice(), g.lattice())?;
    let mut out = Vec::new();
    for &k in kappas {
        if !(k >= 1.0) {
            return param(format!("kappa must be >= 1, got {k}"));
        }
        out.push(poincare(theta, k));
        if k >= 2.0 {
            out.push(kinfty(theta, k));
        }
    }
    out.push(gbiu(u, "velocity"));
    out.push(agmon(u, "velocity"));
    out.push(brezis_gallouet(u, "velocity"));
    if let Some(p) = params {
        out.extend(u8_bound(u, p));
    }
    out.extend(tracer_bounds(u, theta, g, residual, "solve"));
    Ok(out)
}

/// Lebesgue exponent restricted to grid-computable values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    One,
    Two,
    Infinity,
}

impl Exponent {
    fn inv(self) -> f64 {
        match self {
            Exponent::One => 1.0,
            Exponent::Two => 0.5,
            Exponent::Infinity => 0.0,
        }
    }

    fn seq_norm(self, v: impl Iterator<Item = f64>) -> f64 {
        match self {
            Exponent::One => v.sum(),
            Exponent::Two => v.map(|x| x * x).sum::<f64>().sqrt(),
            Exponent::Infinity => v.fold(0.0, f64::max),
        }
    }

    /// Torus norm from samples on an `m x m` grid (exact for `p = 2` when the
    /// grid resolves squares; a quadrature or lower bound otherwise).
    fn grid_norm(self, samples: &[f64]) -> f64 {
        let area = 4.0 * PI * PI;
        let n = samples.len() as f64;
        match self {
            Exponent::One => area * samples.iter().map(|x| x.abs()).sum::<f64>() / n,
            Exponent::Two => (area * samples.iter().map(|x| x * x).sum::<f64>() / n).sqrt(),
            Exponent::Infinity => samples.iter().fold(0.0, |a, x| a.max(x.abs())),
        }
    }
}

/// Both forms of Young's inequality for `(p, q, r)` with `1 + 1/r = 1/p + 1/q`.
///
/// Fourier form: sequence norms of the full (untruncated) coefficient
/// convolution, exact. Physical form: `(f*g)(x) = ∫ f(x-y) g(y) dy` over the
/// torus, whose coefficients are `(2π)² f̂_k ĝ_k`; norms are taken on a grid
/// of `4N` points per axis.
pub fn young_convolution_check(
    f: &SpectralField,
    g: &SpectralField,
    p: Exponent,
    q: Exponent,
    r: Exponent,
) -> Result<[BoundReport; 2]> {
    crate::spectral::check_same_lattice(f.lattice(), g.lattice())?;
    if (1.0 + r.inv() - p.inv() - q.inv()).abs() > 1e-15 {
        return param(format!(
            "exponents {p:?}, {q:?}, {r:?} violate 1 + 1/r = 1/p + 1/q"
        ));
    }
    let lattice = f.lattice();
    let case = format!("p={p:?} q={q:?} r={r:?}");

    let modes: Vec<_> = lattice.modes().collect();
    let (fc, gc) = (f.coeffs(), g.coeffs());
    let span = 2 * lattice.max_component() as usize + 1;
    let width = 2 * span - 1;
    let off = (span - 1) as i64;
    let mut conv = vec![Complex64::new(0.0, 0.0); width * width];
    for a in &modes {
        for b in &modes {
            let k1 = (a.k[0] + b.k[0] + off) as usize;
            let k2 = (a.k[1] + b.k[1] + off) as usize;
            conv[k1 * width + k2] += fc[a.index] * gc[b.index];
        }
    }
    let left = r.seq_norm(conv.iter().map(|c| c.norm()));
    let right = p.seq_norm(modes.iter().map(|m| fc[m.index].norm()))
        * q.seq_norm(modes.iter().map(|m| gc[m.index].norm()));
    let fourier = BoundReport::exact("young", format!("fourier {case}"), left, right, EXACT_SLACK);

    let m = 4 * lattice.n();
    let real = |v: Vec<Complex64>| v.into_iter().map(|z| z.re).collect::<Vec<f64>>();
    let fs = real(physical_grid(f, m)?);
    let gs = real(physical_grid(g, m)?);
    let mut fg = f.clone().into_coeffs();
    for (i, c) in fg.iter_mut().enumerate() {
        *c *= gc[i] * (4.0 * PI * PI);
    }
    let fg = SpectralField::from_coeffs(lattice, fg)?;
    let hs = real(physical_grid(&fg, m)?);
    let mut phys = BoundReport::exact(
        "young",
        format!("physical {case}"),
        r.grid_norm(&hs),
        p.grid_norm(&fs) * q.grid_norm(&gs),
        1e-9,
    );
    phys.note = "norms over the torus of area 4 pi^2 by grid quadrature".into();
    Ok([fourier, phys])
}
