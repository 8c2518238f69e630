use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Grid;

/// Coefficients of the chemotaxis system.
///
/// `cross[i][j]` is `δ_ij`, `chi[i][j]` is `χ^i_j` (chemical `i` steering
/// prey `j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: Vec<f64>,
    pub delta: Vec<f64>,
    pub cross: Vec<Vec<f64>>,
    pub chi: Vec<Vec<u8>>,
    pub t_final: f64,
}

impl ModelParams {
    /// Uncoupled system: no cross-diffusion and no taxis.
    pub fn uncoupled(d: Vec<f64>, delta: Vec<f64>, t_final: f64) -> Self {
        let (n, m) = (d.len(), delta.len());
        ModelParams {
            d,
            delta,
            cross: vec![vec![0.0; m]; n],
            chi: vec![vec![0; m]; n],
            t_final,
        }
    }

    pub fn n_chem(&self) -> usize {
        self.d.len()
    }

    pub fn n_prey(&self) -> usize {
        self.delta.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.d.is_empty() {
            return bad("at least one chemical is required".into());
        }
        if self.d.iter().chain(&self.delta).any(|c| !(*c > 0.0) || !c.is_finite()) {
            return bad("diffusion coefficients must be positive and finite".into());
        }
        let (n, m) = (self.n_chem(), self.n_prey());
        if self.cross.len() != n || self.cross.iter().any(|r| r.len() != m) {
            return bad(format!("cross-diffusion matrix must be {n}x{m}"));
        }
        if self.chi.len() != n || self.chi.iter().any(|r| r.len() != m) {
            return bad(format!("taxis switch matrix must be {n}x{m}"));
        }
        if self.cross.iter().flatten().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return bad("cross-diffusion coefficients must be nonnegative".into());
        }
        if self.chi.iter().flatten().any(|c| *c > 1) {
            return bad("taxis switches must be 0 or 1".into());
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return bad("final time must be positive".into());
        }
        Ok(())
    }

    pub fn has_taxis(&self) -> bool {
        self.chi.iter().flatten().any(|c| *c == 1)
    }
}

/// Fields `u_1..u_N`, `v_1..v_M` on the grid at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub t: f64,
}

impl State {
    pub fn constant(grid: &Grid, u0: &[f64], n_prey: usize) -> Self {
        State {
            u: u0.iter().map(|&c| vec![c; grid.len()]).collect(),
            v: vec![vec![0.0; grid.len()]; n_prey],
            t: 0.0,
        }
    }

    pub fn fields(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.u.iter().chain(&self.v)
    }

    pub fn field_name(&self, f: usize) -> String {
        field_name(self.u.len(), f)
    }

    pub fn min_value(&self) -> f64 {
        self.fields().flatten().fold(f64::INFINITY, |m, x| m.min(*x))
    }

    /// First non-finite value as `(field name, node)`.
    pub fn check_finite(&self) -> Result<()> {
        for (f, field) in self.fields().enumerate() {
            if let Some(node) = field.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    field: self.field_name(f),
                    node,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn check_shape(&self, grid: &Grid, p: &ModelParams) -> Result<()> {
        if self.u.len() != p.n_chem()
            || self.v.len() != p.n_prey()
            || self.fields().any(|f| f.len() != grid.len())
        {
            return Err(Error::InvalidParams(
                "state does not match the grid or species counts".into(),
            ));
        }
        Ok(())
    }
}

/// `u1..uN, v1..vM` naming used in reports and CSV output.
pub fn field_name(n_chem: usize, f: usize) -> String {
    if f < n_chem {
        format!("u{}", f + 1)
    } else {
        format!("v{}", f - n_chem + 1)
    }
}

/// Boundary condition on `∂Ω`. Dirichlet values are given per boundary node
/// in counterclockwise order, one vector per field.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Neumann,
    Dirichlet { u: Vec<Vec<f64>>, v: Vec<Vec<f64>> },
}

impl Boundary {
    /// Dirichlet data taken from the boundary values of `s`.
    pub fn dirichlet_from(grid: &Grid, s: &State) -> Self {
        let nodes = grid.boundary_nodes();
        let trace = |f: &Vec<f64>| nodes.iter().map(|b| f[b.index]).collect();
        Boundary::Dirichlet {
            u: s.u.iter().map(trace).collect(),
            v: s.v.iter().map(trace).collect(),
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, Boundary::Dirichlet { .. })
    }
}

/// Full-grid Dirichlet data: mask of fixed nodes and per-field values.
#[derive(Debug, Clone)]
pub(crate) struct FixedNodes {
    pub mask: Vec<bool>,
    pub values: Vec<Vec<f64>>,
}

impl FixedNodes {
    pub fn new(grid: &Grid, p: &ModelParams, bc: &Boundary) -> Result<Option<Self>> {
        let Boundary::Dirichlet { u, v } = bc else {
            return Ok(None);
        };
        let nodes = grid.boundary_nodes();
        if u.len() != p.n_chem()
            || v.len() != p.n_prey()
            || u.iter().chain(v).any(|d| d.len() != nodes.len())
        {
            return Err(Error::InvalidParams(format!(
                "Dirichlet data must hold {} values per field",
                nodes.len()
            )));
        }
        let mut mask = vec![false; grid.len()];
        for b in &nodes {
            mask[b.index] = true;
        }
        let values = u
            .iter()
            .chain(v)
            .map(|d| {
                let mut full = vec![0.0; grid.len()];
                for (b, val) in nodes.iter().zip(d) {
                    full[b.index] = *val;
                }
                full
            })
            .collect();
        Ok(Some(FixedNodes { mask, values }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let mut p = ModelParams::uncoupled(vec![0.1, 0.2], vec![0.3], 1.0);
        assert!(p.validate().is_ok());
        p.chi[0][0] = 2;
        assert!(p.validate().is_err());
        p.chi[0][0] = 1;
        assert!(p.has_taxis());
        p.d[1] = 0.0;
        assert!(p.validate().is_err());
        let p = ModelParams::uncoupled(vec![0.1], vec![], 0.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn names() {
        assert_eq!(field_name(2, 0), "u1");
        assert_eq!(field_name(2, 2), "v1");
    }
}
