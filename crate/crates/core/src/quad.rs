//! Adaptive quadrature helpers shared by the symbol, MOC and criterion code.

use crate::error::{Error, Result};

/// Budget/tolerance knobs for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureParams {
    /// Relative tolerance on each panel.
    pub rel_tol: f64,
    /// Absolute floor below which refinement stops.
    pub abs_tol: f64,
    /// Maximum number of integrand evaluations.
    pub max_evals: usize,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        QuadratureParams {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_evals: 2_000_000,
        }
    }
}

struct Worker<'a, F: Fn(f64) -> f64> {
    f: &'a F,
    evals: usize,
    max_evals: usize,
    exhausted: bool,
}

impl<'a, F: Fn(f64) -> f64> Worker<'a, F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evals += 1;
        if self.evals > self.max_evals {
            self.exhausted = true;
        }
        (self.f)(x)
    }

    // Classic adaptive Simpson with Richardson correction.
    #[allow(clippy::too_many_arguments)]
    fn simpson(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let h = b - a;
        let left = h / 12.0 * (fa + 4.0 * flm + fm);
        let right = h / 12.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if self.exhausted || depth == 0 || delta.abs() <= 15.0 * tol {
            (left + right + delta / 15.0, delta.abs() / 15.0)
        } else {
            let (vl, el) = self.simpson(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
            let (vr, er) = self.simpson(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
            (vl + vr, el + er)
        }
    }
}

/// Adaptive Simpson integral of `f` over the finite interval [a, b].
///
/// Returns the value and an error estimate; errors out with the partial value
/// when the evaluation budget is exhausted before the tolerance is met.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, q: &QuadratureParams) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut w = Worker {
        f: &f,
        evals: 0,
        max_evals: q.max_evals,
        exhausted: false,
    };
    let fa = w.eval(a);
    let m = 0.5 * (a + b);
    let fm = w.eval(m);
    let fb = w.eval(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = q.abs_tol.max(q.rel_tol * whole.abs());
    let (value, err) = w.simpson(a, b, fa, fm, fb, whole, tol, 48);
    if w.exhausted && err > q.abs_tol.max(q.rel_tol * value.abs()) * 20.0 {
        return Err(Error::QuadratureNonConvergence {
            partial: value,
            err_estimate: err,
        });
    }
    Ok(value)
}

/// Integral over [a, b] split geometrically so that integrands varying over
/// many decades (singular endpoints, slow tails) are resolved panel by panel.
pub fn integrate_log_split<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    q: &QuadratureParams,
) -> Result<f64> {
    assert!(a > 0.0 && b > a);
    let decades = (b / a).log2().ceil().max(1.0) as usize;
    let ratio = (b / a).powf(1.0 / decades as f64);
    let mut lo = a;
    let mut total = 0.0;
    for i in 0..decades {
        let hi = if i + 1 == decades { b } else { lo * ratio };
        total += integrate(&f, lo, hi, q)?;
        lo = hi;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = QuadratureParams::default();
        let v = integrate(|x| x * x, 0.0, 3.0, &q).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
    }

    #[test]
    fn integrable_singularity() {
        // int_0^1 x^{-1/2} dx = 2, resolved through the log split.
        let q = QuadratureParams::default();
        let v = integrate_log_split(|x| x.powf(-0.5), 1e-12, 1.0, &q).unwrap();
        assert!((v - 2.0).abs() < 1e-5, "got {v}");
    }

    #[test]
    fn budget_exhaustion_reports_partial() {
        let q = QuadratureParams {
            rel_tol: 1e-15,
            abs_tol: 0.0,
            max_evals: 20,
        };
        let r = integrate(|x| (1e4 * x).sin().abs(), 0.0, 1.0, &q);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }
}
