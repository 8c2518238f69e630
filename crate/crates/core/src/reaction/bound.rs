//! A piecewise reaction sampled onto grid nodes.

use super::jet::{self, Jet};
use super::piecewise::{PiecewiseReaction, Side};
use super::taylor::TimeProfile;
use crate::geometry::{Grid, IndicatorField};

#[derive(Debug, Clone)]
enum Values {
    Const(f64),
    Nodal(Vec<f64>),
}

#[derive(Debug, Clone)]
struct BoundTerm {
    component: usize,
    vars: Vec<usize>,
    values: Values,
    time: TimeProfile,
}

impl BoundTerm {
    fn coeff(&self, k: usize, t: f64) -> f64 {
        let c = match &self.values {
            Values::Const(c) => *c,
            Values::Nodal(v) => v[k],
        };
        c * self.time.eval(t)
    }
}

/// Reaction with its branch fixed per node (interior when the node's
/// volume fraction is at least one half) and coefficients sampled at nodes.
#[derive(Debug, Clone)]
pub struct BoundReaction {
    n_chem: usize,
    n_prey: usize,
    base: Vec<f64>,
    interior: Vec<bool>,
    terms: [Vec<BoundTerm>; 2],
}

impl BoundReaction {
    pub fn new(r: &PiecewiseReaction, grid: &Grid, indicator: &IndicatorField) -> Self {
        let n = r.n_chem();
        let bind = |side: Side| -> Vec<BoundTerm> {
            r.branch(side)
                .terms()
                .map(|(c, m, f)| {
                    let inv = 1.0 / m.factorial();
                    let values = match f.spatial.as_constant() {
                        Some(v) => Values::Const(v * inv),
                        None => Values::Nodal(grid.sample(|x| f.spatial.eval(x) * inv)),
                    };
                    BoundTerm {
                        component: c,
                        vars: m.vars().iter().map(|v| v.flat(n)).collect(),
                        values,
                        time: f.time.clone(),
                    }
                })
                .collect()
        };
        BoundReaction {
            n_chem: n,
            n_prey: r.n_prey(),
            base: r.base().to_vec(),
            interior: indicator.inside_mask(),
            terms: [bind(Side::Exterior), bind(Side::Interior)],
        }
    }

    pub fn n_chem(&self) -> usize {
        self.n_chem
    }

    pub fn n_prey(&self) -> usize {
        self.n_prey
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.is_empty())
    }

    pub fn is_interior(&self, k: usize) -> bool {
        self.interior[k]
    }

    fn branch(&self, k: usize) -> &[BoundTerm] {
        &self.terms[self.interior[k] as usize]
    }

    /// Adds `G(x_k, t, ·)` at deviation `z = (u − u₀, v)` into `out`.
    pub fn eval_node(&self, k: usize, t: f64, z: &[f64], out: &mut [f64]) {
        for term in self.branch(k) {
            let mut p = term.coeff(k, t);
            for &v in &term.vars {
                p *= z[v];
            }
            out[term.component] += p;
        }
    }

    /// Jet version of [`eval_node`](Self::eval_node).
    pub fn eval_node_jet(&self, k: usize, t: f64, z: &[Jet], out: &mut [Jet]) {
        for term in self.branch(k) {
            let mut p: Jet = [term.coeff(k, t), 0.0, 0.0, 0.0];
            for &v in &term.vars {
                p = jet::mul(&p, &z[v]);
            }
            for (o, q) in out[term.component].iter_mut().zip(&p) {
                *o += q;
            }
        }
    }
}
