use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{param, Result};

fn rule(nodes: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(nodes).expect("positive node count"))
}

/// `L_m(κ, r) = log^m κ + (m/r) log^{m-1} κ + … + m!/r^m`.
pub fn lm_ladder(kappa: f64, r: f64, m: u32) -> Result<f64> {
    if !(kappa >= 1.0) || !(r > 0.0) {
        return param(format!(
            "ladder needs kappa >= 1 and r > 0, got kappa = {kappa}, r = {r}"
        ));
    }
    let l = kappa.ln();
    // term_i = m!/(m-i)! r^{-i} log^{m-i} κ
    let mut coef = 1.0;
    let mut sum = 0.0;
    for i in 0..=m {
        sum += coef * l.powi((m - i) as i32);
        coef *= (m - i) as f64 / r;
    }
    Ok(sum)
}

/// `r κ^r ∫_κ^∞ k^{-r-1} log^m k dk` by composite Gauss–Legendre after
/// substituting `k = κ e^t`; equals `L_m(κ, r)`.
pub fn ladder_quadrature(kappa: f64, r: f64, m: u32) -> Result<f64> {
    if !(kappa >= 1.0) || !(r > 0.0) {
        return param(format!(
            "ladder needs kappa >= 1 and r > 0, got kappa = {kappa}, r = {r}"
        ));
    }
    let l = kappa.ln();
    // e^{-rt} drops below 1e-30 at t = 70/r, far beyond any polynomial growth here.
    let end = 70.0 / r;
    let panels = 400;
    let h = end / panels as f64;
    let gl = rule(20);
    let integral: f64 = (0..panels)
        .map(|p| {
            let a = p as f64 * h;
            gl.integrate(a, a + h, |t| (-r * t).exp() * (l + t).powi(m as i32))
        })
        .sum();
    Ok(r * integral)
}

/// Which one-dimensional Dirichlet-type kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirichletVariant {
    /// `D_N(x) = Σ_{|k|<=N} e^{ikx}`
    D,
    /// `D̃_N(t) = Σ_{k=1}^{N} e^{ikt}`
    DTilde,
}

/// `(2π)^{-1} ∫_0^{2π} |kernel|` by Gauss–Legendre on each lobe between zeros.
///
/// `|D_N|` has `2N + 1` lobes and `|D̃_N|` has `N`; inside a lobe the modulus
/// is analytic so 24 nodes reach round-off.
pub fn dirichlet_l1(n: u32, variant: DirichletVariant) -> Result<f64> {
    let (min, lobes) = match variant {
        DirichletVariant::D => (1, 2 * n + 1),
        DirichletVariant::DTilde => (2, n),
    };
    if n < min {
        return param(format!("Dirichlet kernel order must be >= {min}, got {n}"));
    }
    let half = match variant {
        DirichletVariant::D => n as f64 + 0.5,
        DirichletVariant::DTilde => n as f64 / 2.0,
    };
    let gl = rule(24);
    let width = 2.0 * PI / lobes as f64;
    let total: f64 = (0..lobes)
        .map(|j| {
            let a = j as f64 * width;
            gl.integrate(a, a + width, |x| ((half * x).sin() / (0.5 * x).sin()).abs())
        })
        .sum();
    Ok(total / (2.0 * PI))
}

/// `(2π)^{-1} ‖D_1‖₁ = 1/3 + 2√3/π`, from the antiderivative `x + 2 sin x`.
pub fn dirichlet_one_exact() -> f64 {
    1.0 / 3.0 + 2.0 * 3f64.sqrt() / PI
}
