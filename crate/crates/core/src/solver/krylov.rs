//! Restarted GMRES with a diagonal-weight inner product.
//!
//! The tracer operator is applied in the form `B = I + (-Δ)^{-1} P (u·∇)`,
//! which is identity plus a skew-adjoint part in the `⟨∇·, ∇·⟩` inner product;
//! the weights passed in are `|k|^2` for that reason. Convergence is judged on
//! a separate "true" residual norm supplied by the caller.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) struct KrylovOutcome {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// True residual norm at the start of each cycle and at exit.
    pub history: Vec<f64>,
    pub residual: f64,
}

pub(crate) struct Weighted<'a> {
    pub weights: &'a [f64],
}

impl Weighted<'_> {
    #[inline]
    fn dot(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for ((x, y), &w) in a.iter().zip(b).zip(self.weights) {
            s += x * y.conj() * w;
        }
        s
    }

    #[inline]
    fn norm(&self, a: &[Complex64]) -> f64 {
        a.iter()
            .zip(self.weights)
            .map(|(x, &w)| x.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }
}

/// Solves `B x = b`.
///
/// `true_norm(r)` maps a residual `r = b - Bx` to the norm the caller wants
/// below `target`; iteration stops once it is, and fails after `max_iter`
/// operator applications or when restarts stop making progress.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gmres(
    apply: &mut dyn FnMut(&[Complex64]) -> Result<Vec<Complex64>>,
    b: &[Complex64],
    x0: Vec<Complex64>,
    inner: &Weighted<'_>,
    true_norm: &dyn Fn(&[Complex64]) -> f64,
    target: f64,
    restart: usize,
    max_iter: usize,
) -> Result<KrylovOutcome> {
    let n = b.len();
    let restart = restart.max(1);
    let mut x = x0;
    let mut iterations = 0;
    let mut history = Vec::new();
    let mut stalled = 0;

    loop {
        let bx = apply(&x)?;
        iterations += 1;
        let r: Vec<Complex64> = b.iter().zip(&bx).map(|(a, c)| a - c).collect();
        let tr = true_norm(&r);
        if let Some(&prev) = history.last() {
            stalled = if tr > 0.9 * prev { stalled + 1 } else { 0 };
        }
        history.push(tr);
        if tr <= target {
            return Ok(KrylovOutcome {
                x,
                iterations,
                history,
                residual: tr,
            });
        }
        if iterations >= max_iter || stalled >= 3 {
            return Err(Error::NonConvergence {
                iterations,
                residual: tr,
                target,
            });
        }
        let beta = inner.norm(&r);
        if beta == 0.0 {
            // The weighted norm vanishes only on modes the true norm ignores.
            return Ok(KrylovOutcome {
                x,
                iterations,
                history,
                residual: tr,
            });
        }
        // Aim a bit below the target, assuming both norms shrink alike.
        let eps = 0.5 * beta * target / tr;

        let mut v: Vec<Vec<Complex64>> = Vec::with_capacity(restart + 1);
        v.push(r.iter().map(|c| c / beta).collect());
        let mut h = vec![vec![Complex64::new(0.0, 0.0); restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![Complex64::new(0.0, 0.0); restart];
        let mut g = vec![Complex64::new(0.0, 0.0); restart + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k = 0;

        for j in 0..restart {
            let mut w = apply(&v[j])?;
            iterations += 1;
            for (i, vi) in v.iter().enumerate() {
                let hij = inner.dot(&w, vi);
                h[i][j] = hij;
                for (wv, a) in w.iter_mut().zip(vi) {
                    *wv -= hij * a;
                }
            }
            let hn = inner.norm(&w);
            h[j + 1][j] = Complex64::new(hn, 0.0);

            for i in 0..j {
                let (a, c) = (h[i][j], h[i + 1][j]);
                h[i][j] = a * cs[i] + sn[i] * c;
                h[i + 1][j] = -sn[i].conj() * a + c * cs[i];
            }
            let (a, c) = (h[j][j], h[j + 1][j]);
            let d = (a.norm_sqr() + c.norm_sqr()).sqrt();
            if d == 0.0 {
                break;
            }
            let phase = if a.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                a / a.norm()
            };
            cs[j] = a.norm() / d;
            sn[j] = phase * c.conj() / d;
            h[j][j] = phase * d;
            h[j + 1][j] = Complex64::new(0.0, 0.0);
            g[j + 1] = -sn[j].conj() * g[j];
            g[j] *= cs[j];
            k = j + 1;

            if g[j + 1].norm() <= eps || hn == 0.0 || iterations >= max_iter {
                break;
            }
            v.push(w.iter().map(|c| c / hn).collect());
        }

        let mut y = vec![Complex64::new(0.0, 0.0); k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for l in (i + 1)..k {
                s -= h[i][l] * y[l];
            }
            y[i] = s / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            for (xv, a) in x.iter_mut().zip(&v[i]) {
                *xv += yi * a;
            }
        }
        debug_assert_eq!(x.len(), n);
    }
}
