use std::sync::LazyLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, GaussLegendre};

static RULE: LazyLock<GaussLegendre> = LazyLock::new(|| GaussLegendre::new(20));

/// Both sides of `∫_0^δ r^α e^{−μr} dr = Γ(α+1)/μ^{α+1} − ∫_δ^∞ r^α e^{−μr} dr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceIdentity {
    pub lhs: Complex64,
    pub gamma_term: Complex64,
    pub tail: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    /// `(2/ℜμ) e^{−ℜμ δ/2}`, present when `ℜμ ≥ 2α/e`.
    pub tail_bound: Option<f64>,
    pub tail_bound_holds: Option<bool>,
}

pub fn laplace_tail_identity(alpha: f64, mu: Complex64, delta: f64) -> Result<LaplaceIdentity> {
    if !(alpha > -1.0 && alpha.is_finite()) {
        return Err(Error::Quadrature(format!("exponent {alpha} must exceed -1")));
    }
    if !(mu.re > 0.0 && mu.is_finite()) {
        return Err(Error::Quadrature(format!("ℜμ = {} must be positive", mu.re)));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Quadrature(format!("δ = {delta} must be positive")));
    }
    let g = gamma(alpha + 1.0);
    if !g.is_finite() {
        return Err(Error::GammaOverflow(alpha + 1.0));
    }
    let tol = 1e-14;
    let floor = f64::MIN_POSITIVE;
    let lhs = if alpha >= 0.0 && alpha.fract() == 0.0 {
        adaptive(&RULE, 0.0, delta, tol, floor, &|r: f64| (-mu * r).exp() * r.powf(alpha))?
    } else if alpha > 0.0 {
        // r = s⁴ leaves the smoother weight 4 s^{4α+3}
        adaptive(&RULE, 0.0, delta.powf(0.25), tol, floor, &|s: f64| {
            let s4 = s.powi(4);
            (-mu * s4).exp() * (4.0 * s.powf(4.0 * alpha + 3.0))
        })?
    } else {
        // r = s^{1/(α+1)} removes the endpoint singularity
        let q = 1.0 / (alpha + 1.0);
        adaptive(&RULE, 0.0, delta.powf(alpha + 1.0), tol, floor, &|s: f64| {
            (-mu * s.powf(q)).exp() * q
        })?
    };
    // r = δ + s/(1 − s) maps [δ, ∞) onto [0, 1)
    let tail = adaptive(&RULE, 0.0, 1.0, tol, floor, &|s: f64| {
        let r = delta + s / (1.0 - s);
        (-mu * r).exp() * (r.powf(alpha) / ((1.0 - s) * (1.0 - s)))
    })?;
    let gamma_term = Complex64::new(g, 0.0) / mu.powf(alpha + 1.0);
    let rhs = gamma_term - tail;
    let (tail_bound, tail_bound_holds) = if mu.re >= 2.0 * alpha / std::f64::consts::E {
        let b = 2.0 / mu.re * (-mu.re * delta / 2.0).exp();
        (Some(b), Some(tail.norm() <= b))
    } else {
        (None, None)
    };
    Ok(LaplaceIdentity {
        lhs,
        gamma_term,
        tail,
        rhs,
        residual: (lhs - rhs).norm(),
        tail_bound,
        tail_bound_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn linear_weight_closed_form() {
        let l = laplace_tail_identity(1.0, c(2.0, 0.0), 1.0).unwrap();
        let e2 = (-2.0f64).exp();
        assert!((l.lhs.re - (1.0 - 3.0 * e2) / 4.0).abs() < 1e-14);
        assert!((l.lhs.re - 0.1484996).abs() < 2e-6);
        assert!((l.gamma_term.re - 0.25).abs() < 1e-15);
        assert!((l.tail.re - 3.0 * e2 / 4.0).abs() < 1e-14);
        assert!(l.residual < 1e-12);
    }

    #[test]
    fn unweighted_is_elementary() {
        for mu in [0.3, 1.0, 7.5] {
            let l = laplace_tail_identity(0.0, c(mu, 0.0), 0.8).unwrap();
            assert!((l.lhs.re - (1.0 - (-mu * 0.8f64).exp()) / mu).abs() < 1e-14);
        }
    }

    #[test]
    fn sweep() {
        for alpha in [0.0, 1.0, 2.5] {
            for mu in [c(1.0, 0.0), c(2.0, 1.0), c(10.0, 0.0)] {
                for delta in [0.5, 1.0, 2.0] {
                    let l = laplace_tail_identity(alpha, mu, delta).unwrap();
                    assert!(l.residual < 1e-10, "{alpha} {mu} {delta}: {}", l.residual);
                    if let Some(ok) = l.tail_bound_holds {
                        assert!(ok, "{alpha} {mu} {delta}");
                    }
                }
            }
        }
    }

    #[test]
    fn negative_exponent() {
        let l = laplace_tail_identity(-0.5, c(1.0, 0.5), 1.0).unwrap();
        assert!(l.residual < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(laplace_tail_identity(1.0, c(-1.0, 0.0), 1.0).is_err());
        assert!(laplace_tail_identity(-1.0, c(1.0, 0.0), 1.0).is_err());
        assert!(matches!(
            laplace_tail_identity(200.0, c(1.0, 0.0), 1.0),
            Err(Error::GammaOverflow(_))
        ));
    }
}
