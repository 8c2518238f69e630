use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::jet::{self, Jet};
use super::multi_index::{MultiIndex, Var};
use crate::error::{Error, Result};
use crate::expr::Expr;

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 5;

/// Piecewise-linear time factor `φ(t)`, constant beyond the first and last
/// knots. No knots means `φ ≡ 1`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeProfile {
    knots: Vec<(f64, f64)>,
}

impl TimeProfile {
    pub fn constant() -> Self {
        TimeProfile::default()
    }

    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
            return Err(Error::InvalidReaction("non-finite time profile knot".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidReaction(
                "time profile knots must be strictly increasing".into(),
            ));
        }
        Ok(TimeProfile { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = &self.knots;
        match k.len() {
            0 => 1.0,
            1 => k[0].1,
            _ => {
                if t <= k[0].0 {
                    return k[0].1;
                }
                if t >= k[k.len() - 1].0 {
                    return k[k.len() - 1].1;
                }
                let i = k.partition_point(|&(s, _)| s <= t) - 1;
                let (t0, p0) = k[i];
                let (t1, p1) = k[i + 1];
                p0 + (p1 - p0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

/// A Taylor coefficient `c(x)·φ(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField {
    pub spatial: Expr,
    #[serde(default)]
    pub time: TimeProfile,
}

impl CoefficientField {
    pub fn constant(c: f64) -> Self {
        CoefficientField {
            spatial: Expr::constant(c),
            time: TimeProfile::constant(),
        }
    }

    pub fn new(spatial: Expr, time: TimeProfile) -> Self {
        CoefficientField { spatial, time }
    }

    pub fn eval(&self, x: [f64; 2], t: f64) -> f64 {
        self.spatial.eval(x) * self.time.eval(t)
    }

    pub fn as_constant(&self) -> Option<f64> {
        if self.time.knots.is_empty() {
            self.spatial.as_constant()
        } else {
            None
        }
    }
}

/// Centred Taylor polynomial about `(u₀, 0)` for the chemical reaction terms.
///
/// `G_i(x,t,u,v) = Σ_α C_{i,α}(x,t) z^α / α!` with `z = (u − u₀, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorReaction {
    base: Vec<f64>,
    n_prey: usize,
    order: usize,
    terms: BTreeMap<(usize, MultiIndex), CoefficientField>,
}

impl TaylorReaction {
    pub fn new(base: Vec<f64>, n_prey: usize, order: usize) -> Result<Self> {
        if base.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidReaction(
                "base state must be finite and nonnegative".into(),
            ));
        }
        if !(2..=MAX_ORDER).contains(&order) {
            return Err(Error::InvalidReaction(format!(
                "truncation order {order} outside [2, {MAX_ORDER}]"
            )));
        }
        Ok(TaylorReaction {
            base,
            n_prey,
            order,
            terms: BTreeMap::new(),
        })
    }

    pub fn n_chem(&self) -> usize {
        self.base.len()
    }

    pub fn n_prey(&self) -> usize {
        self.n_prey
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    fn check_key(&self, component: usize, mi: &MultiIndex) -> Result<()> {
        if component >= self.n_chem() {
            return Err(Error::InvalidReaction(format!(
                "component {} out of range (N = {})",
                component + 1,
                self.n_chem()
            )));
        }
        for v in mi.vars() {
            let ok = match *v {
                Var::U(i) => i < self.n_chem(),
                Var::V(j) => j < self.n_prey,
            };
            if !ok {
                return Err(Error::InvalidReaction(format!(
                    "multi-index {mi} refers to a missing variable"
                )));
            }
        }
        Ok(())
    }

    /// Stores a coefficient; orders outside `[2, L]` are rejected.
    pub fn set(&mut self, component: usize, mi: MultiIndex, field: CoefficientField) -> Result<()> {
        self.check_key(component, &mi)?;
        if mi.order() < 2 || mi.order() > self.order {
            return Err(Error::InvalidReaction(format!(
                "multi-index {mi} has order {} outside [2, {}]",
                mi.order(),
                self.order
            )));
        }
        self.terms.insert((component, mi), field);
        Ok(())
    }

    /// Stores a coefficient without the order check. Used by tests to build
    /// inadmissible reactions.
    #[doc(hidden)]
    pub fn set_unchecked(&mut self, component: usize, mi: MultiIndex, field: CoefficientField) {
        self.terms.insert((component, mi), field);
    }

    pub fn coefficient(&self, component: usize, mi: &MultiIndex) -> Option<&CoefficientField> {
        self.terms.get(&(component, mi.clone()))
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &MultiIndex, &CoefficientField)> {
        self.terms.iter().map(|((c, m), f)| (*c, m, f))
    }

    /// Deviation vector `z = (u − u₀, v)`.
    pub fn deviation(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.base)
            .map(|(a, b)| a - b)
            .chain(v.iter().copied())
            .collect()
    }

    pub fn eval(&self, x: [f64; 2], t: f64, u: &[f64], v: &[f64]) -> Vec<f64> {
        let z = self.deviation(u, v);
        self.eval_deviation(x, t, &z)
    }

    pub fn eval_deviation(&self, x: [f64; 2], t: f64, z: &[f64]) -> Vec<f64> {
        let n = self.n_chem();
        let mut out = vec![0.0; n];
        for ((c, mi), f) in &self.terms {
            let mut p = f.eval(x, t) / mi.factorial();
            for v in mi.vars() {
                p *= z[v.flat(n)];
            }
            out[*c] += p;
        }
        out
    }

    /// Evaluates by summing over ordered index tuples, `Σ_{k₁..k_ℓ} C z_{k₁}..z_{k_ℓ} / ℓ!`,
    /// looking up every tuple through its sorted key.
    pub(crate) fn eval_ordered(&self, x: [f64; 2], t: f64, z: &[f64]) -> Vec<f64> {
        let n = self.n_chem();
        let nv = n + self.n_prey;
        let vars: Vec<Var> = (0..n)
            .map(Var::U)
            .chain((0..self.n_prey).map(Var::V))
            .collect();
        let mut out = vec![0.0; n];
        let max_order = self.terms.keys().map(|(_, m)| m.order()).max().unwrap_or(0);
        for ell in 1..=max_order {
            let fact: f64 = (1..=ell).map(|k| k as f64).product();
            let mut tuple = vec![0usize; ell];
            loop {
                let mi = MultiIndex::new(tuple.iter().map(|&k| vars[k]).collect());
                let zp: f64 = tuple.iter().map(|&k| z[k]).product();
                for (c, o) in out.iter_mut().enumerate() {
                    if let Some(f) = self.terms.get(&(c, mi.clone())) {
                        *o += f.eval(x, t) * zp / fact;
                    }
                }
                // odometer increment
                let mut pos = 0;
                loop {
                    if pos == ell {
                        break;
                    }
                    tuple[pos] += 1;
                    if tuple[pos] < nv {
                        break;
                    }
                    tuple[pos] = 0;
                    pos += 1;
                }
                if pos == ell {
                    break;
                }
            }
        }
        out
    }

    /// Jet of `G` along `z(ε)`, given jets of the deviations.
    pub fn eval_jet(&self, x: [f64; 2], t: f64, z: &[Jet]) -> Vec<Jet> {
        let n = self.n_chem();
        let mut out = vec![jet::ZERO; n];
        for ((c, mi), f) in &self.terms {
            let s = f.eval(x, t) / mi.factorial();
            let mut p: Jet = [s, 0.0, 0.0, 0.0];
            for v in mi.vars() {
                p = jet::mul(&p, &z[v.flat(n)]);
            }
            for k in 0..jet::JET_LEN {
                out[*c][k] += p[k];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(s: &str) -> MultiIndex {
        s.parse().unwrap()
    }

    #[test]
    fn single_term_example() {
        let mut r = TaylorReaction::new(vec![1.0], 0, 3).unwrap();
        r.set(0, mi("u1u1"), CoefficientField::constant(2.0)).unwrap();
        let g = r.eval([0.3, 0.3], 0.0, &[1.5], &[]);
        assert_eq!(g, vec![0.25]);
        assert_eq!(r.eval([0.3, 0.3], 0.0, &[1.0], &[]), vec![0.0]);
    }

    #[test]
    fn order_limits() {
        let mut r = TaylorReaction::new(vec![0.0, 0.0], 1, 3).unwrap();
        assert!(r.set(0, mi("u1"), CoefficientField::constant(1.0)).is_err());
        assert!(r.set(0, mi("u1u1u1u1"), CoefficientField::constant(1.0)).is_err());
        assert!(r.set(2, mi("u1u1"), CoefficientField::constant(1.0)).is_err());
        assert!(r.set(0, mi("v2v1"), CoefficientField::constant(1.0)).is_err());
        assert!(r.set(1, mi("u2v1"), CoefficientField::constant(1.0)).is_ok());
        assert!(TaylorReaction::new(vec![0.0], 0, 6).is_err());
        assert!(TaylorReaction::new(vec![-1.0], 0, 3).is_err());
    }

    #[test]
    fn ordered_sum_matches_canonical() {
        let mut r = TaylorReaction::new(vec![0.5, 0.0], 1, 3).unwrap();
        r.set(0, mi("u1u2"), CoefficientField::constant(1.3)).unwrap();
        r.set(0, mi("u1u1v1"), CoefficientField::constant(-0.7)).unwrap();
        r.set(1, mi("u2u2"), CoefficientField::new(Expr::parse("x1+1").unwrap(), TimeProfile::constant()))
            .unwrap();
        r.set(1, mi("u1u2v1"), CoefficientField::constant(0.4)).unwrap();
        let z = [0.3, -0.2, 0.6];
        let a = r.eval_deviation([0.2, 0.7], 0.0, &z);
        let b = r.eval_ordered([0.2, 0.7], 0.0, &z);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-14, "{p} vs {q}");
        }
    }

    #[test]
    fn jet_matches_polynomial() {
        let mut r = TaylorReaction::new(vec![0.0, 0.0], 0, 3).unwrap();
        r.set(0, mi("u1u2"), CoefficientField::constant(1.5)).unwrap();
        r.set(0, mi("u1u1u1"), CoefficientField::constant(0.8)).unwrap();
        // z(ε) = (ε a + ε² b, ε c)
        let (a, b, c) = (0.7, -0.4, 1.1);
        let z = [[0.0, a, b, 0.0], [0.0, c, 0.0, 0.0]];
        let j = r.eval_jet([0.0, 0.0], 0.0, &z);
        let g = |e: f64| r.eval_deviation([0.0, 0.0], 0.0, &[e * a + e * e * b, e * c])[0];
        // exact polynomial coefficients
        assert!((j[0][2] - 1.5 * a * c).abs() < 1e-14);
        assert!((j[0][3] - (1.5 * b * c + 0.8 * a * a * a / 6.0)).abs() < 1e-14);
        let e = 1e-3;
        let approx2 = (g(e) + g(-e)) / (2.0 * e * e);
        assert!((approx2 - j[0][2]).abs() < 1e-5);
    }

    #[test]
    fn time_profile() {
        let p = TimeProfile::new(vec![(0.0, 1.0), (1.0, 3.0)]).unwrap();
        assert_eq!(p.eval(-1.0), 1.0);
        assert_eq!(p.eval(0.5), 2.0);
        assert_eq!(p.eval(2.0), 3.0);
        assert_eq!(TimeProfile::constant().eval(7.0), 1.0);
        assert!(TimeProfile::new(vec![(1.0, 0.0), (1.0, 1.0)]).is_err());
    }
}
