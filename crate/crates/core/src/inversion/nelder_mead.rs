//! Derivative-free simplex minimisation with standard coefficients
//! (reflection 1, expansion 2, contraction ½, shrink ½).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop once the simplex diameter is below this.
    pub tol_x: f64,
    /// Stop once the spread of simplex values is below this.
    pub tol_f: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evals: 100,
            tol_x: 1e-8,
            tol_f: 1e-14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// Best value after each iteration.
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Minimises `f` from the axis-aligned simplex `x0 + step_k e_k` using at
/// most `max_evals` evaluations of `f`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0;
    // never exceeds the budget: further points count as infinitely bad
    let max_evals = opts.max_evals;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        if *evals >= max_evals {
            return f64::INFINITY;
        }
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)));
    for k in 0..n {
        let mut x = x0.to_vec();
        x[k] += steps[k];
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let mut history = Vec::new();
    let mut converged = false;
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(w).map(|(a, b)| a + t * (b - a)).collect()
    };
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        history.push(simplex[0].1);
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let spread = simplex[n].1 - simplex[0].1;
        if diameter <= opts.tol_x || (spread.is_finite() && spread <= opts.tol_f) {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let xr = point(&centroid, &worst.0, -1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = point(&centroid, &worst.0, -2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let x = point(&centroid, &xr, 0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        } else {
            let x = point(&centroid, &worst.0, 0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for item in simplex.iter_mut().skip(1) {
            let x = point(&best, &item.0, 0.5);
            let v = eval(&x, &mut evals);
            *item = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        f: fx,
        evals,
        history,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let opts = NelderMeadOptions {
            max_evals: 2000,
            tol_x: 1e-10,
            tol_f: 0.0,
        };
        let r = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.1, 0.1],
            &opts,
        );
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{r:?}");
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn respects_budget_and_infinite_values() {
        let mut calls = 0;
        let r = nelder_mead(
            |x| {
                calls += 1;
                if x[0] < 0.0 {
                    f64::INFINITY
                } else {
                    (x[0] - 0.3).powi(2) + x[1].powi(2)
                }
            },
            &[0.05, 0.5],
            &[0.1, 0.1],
            &NelderMeadOptions {
                max_evals: 40,
                ..Default::default()
            },
        );
        assert_eq!(calls, r.evals);
        assert!(r.evals <= 40);
        assert!(r.f.is_finite());
    }
}
