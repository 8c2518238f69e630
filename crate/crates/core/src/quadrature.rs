//! Gauss–Legendre rules and an adaptive panel integrator for complex
//! integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum bisection depth of the adaptive integrator.
pub const MAX_DEPTH: usize = 20;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// `P_n` from the Chebyshev initial guesses.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// `∫_a^b f` with the rule mapped affinely.
    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s = s + f(c + h * x) * (w * h);
        }
        s
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive integration of a complex function on `[a, b]`: panels are
/// bisected until the two-half estimate agrees with the whole-panel estimate
/// to `rel_tol` relative to the running total (or `abs_floor`).
pub fn adaptive<F>(rule: &GaussLegendre, a: f64, b: f64, rel_tol: f64, abs_floor: f64, f: &F) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let whole = rule.integrate(a, b, f);
    let scale = whole.norm().max(abs_floor);
    recurse(rule, a, b, whole, rel_tol, scale, 0, f)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: Complex64,
    rel_tol: f64,
    scale: f64,
    depth: usize,
    f: &F,
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, f);
    let right = rule.integrate(m, b, f);
    let both = left + right;
    if (both - whole).norm() <= rel_tol * scale {
        return Ok(both);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature(format!(
            "no convergence on [{a}, {b}] after {MAX_DEPTH} bisections"
        )));
    }
    Ok(recurse(rule, a, m, left, rel_tol, scale, depth + 1, f)?
        + recurse(rule, m, b, right, rel_tol, scale, depth + 1, f)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_weights() {
        let g = GaussLegendre::new(5);
        let s: f64 = g.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // known node of the 5-point rule
        assert!((g.nodes[4] - 0.906_179_845_938_664).abs() < 1e-14);
        assert!((g.weights[4] - 0.236_926_885_056_189_1).abs() < 1e-14);
        assert_eq!(g.nodes[2], 0.0);
    }

    #[test]
    fn exact_for_polynomials() {
        let g = GaussLegendre::new(32);
        // degree 63 is integrated exactly
        let v: f64 = g.integrate(0.0, 1.0, |x| x.powi(62));
        assert!((v - 1.0 / 63.0).abs() < 1e-14);
        let s: f64 = g.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_oscillatory() {
        let g = GaussLegendre::new(16);
        let mu = Complex64::new(30.0, 50.0);
        let f = |r: f64| (-mu * r).exp();
        let v = adaptive(&g, 0.0, 1.0, 1e-13, 0.0, &f).unwrap();
        let exact = (Complex64::new(1.0, 0.0) - (-mu).exp()) / mu;
        assert!((v - exact).norm() < 1e-13 * exact.norm());
    }

    #[test]
    fn nonconvergence_reported() {
        // divergent at the left end, so the leftmost panel never settles
        let g = GaussLegendre::new(4);
        let f = |r: f64| Complex64::new(r.powf(-1.5), 0.0);
        assert!(adaptive(&g, 0.0, 1.0, 1e-15, 0.0, &f).is_err());
    }
}
