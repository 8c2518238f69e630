//! Damped Jacobian-free Newton–Krylov solve of the stationary system with
//! Dirichlet data, preconditioned by the decoupled linear diffusion operators.

use serde::{Deserialize, Serialize};

use super::measurement::{neumann_measurements, MeasurementSet};
use super::ops::FvOperators;
use super::params::{Boundary, FixedNodes, ModelParams, State};
use crate::error::{Error, Result};
use crate::geometry::{rasterize_inclusion, Grid};
use crate::linalg::{self, BandedCholesky};
use crate::reaction::{BoundReaction, PiecewiseReaction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    pub max_halvings: usize,
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 200,
            restart: 30,
            max_halvings: 8,
            fd_step: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryRun {
    pub state: State,
    pub measurements: MeasurementSet,
    pub iterations: usize,
    pub residual: f64,
}

struct Problem<'a> {
    grid: &'a Grid,
    params: &'a ModelParams,
    reaction: BoundReaction,
    ops: FvOperators,
    fixed: FixedNodes,
    precond: Vec<BandedCholesky>,
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.grid.len()
    }

    fn fields(&self) -> usize {
        self.params.n_chem() + self.params.n_prey()
    }

    fn split(&self, x: &[f64]) -> State {
        let n = self.n();
        let nc = self.params.n_chem();
        State {
            u: (0..nc).map(|i| x[i * n..(i + 1) * n].to_vec()).collect(),
            v: (nc..self.fields()).map(|f| x[f * n..(f + 1) * n].to_vec()).collect(),
            t: 0.0,
        }
    }

    fn residual(&self, x: &[f64], r: &mut [f64]) -> Result<()> {
        let n = self.n();
        let nc = self.params.n_chem();
        let s = self.split(x);
        let mut lap = vec![0.0; n];
        let base = self.reaction.base();
        let mut z = vec![0.0; self.fields()];
        let mut g = vec![0.0; nc];
        let mut react = vec![vec![0.0; n]; nc];
        if !self.reaction.is_zero() {
            for k in 0..n {
                for i in 0..nc {
                    z[i] = s.u[i][k] - base[i];
                }
                for (j, v) in s.v.iter().enumerate() {
                    z[nc + j] = v[k];
                }
                g.iter_mut().for_each(|o| *o = 0.0);
                // stationary limit of the time profiles
                self.reaction.eval_node(k, f64::INFINITY, &z, &mut g);
                for i in 0..nc {
                    react[i][k] = g[i];
                }
            }
        }
        for i in 0..nc {
            let mut w = s.u[i].clone();
            for (j, v) in s.v.iter().enumerate() {
                let c = self.params.cross[i][j];
                if c != 0.0 {
                    for (wk, (uk, vk)) in w.iter_mut().zip(s.u[i].iter().zip(v)) {
                        *wk += c * uk * vk;
                    }
                }
            }
            self.ops.laplacian(&w, &mut lap);
            let out = &mut r[i * n..(i + 1) * n];
            for k in 0..n {
                out[k] = -self.params.d[i] * lap[k] - react[i][k];
            }
        }
        let mut tx = vec![0.0; n];
        for j in 0..self.params.n_prey() {
            self.ops.laplacian(&s.v[j], &mut lap);
            let out = &mut r[(nc + j) * n..(nc + j + 1) * n];
            for k in 0..n {
                out[k] = -self.params.delta[j] * lap[k];
            }
            for i in 0..nc {
                if self.params.chi[i][j] == 1 {
                    self.ops.taxis(&s.v[j], &s.u[i], &mut tx);
                    for k in 0..n {
                        out[k] -= tx[k];
                    }
                }
            }
        }
        for f in 0..self.fields() {
            for k in 0..n {
                if self.fixed.mask[k] {
                    r[f * n + k] = x[f * n + k] - self.fixed.values[f][k];
                }
            }
        }
        Ok(())
    }

    fn coeff(&self, f: usize) -> f64 {
        let nc = self.params.n_chem();
        if f < nc {
            self.params.d[f]
        } else {
            self.params.delta[f - nc]
        }
    }

    /// Inverse of the block-diagonal operator `c V⁻¹K` (identity on `∂Ω`).
    fn apply_precond(&self, r: &[f64], y: &mut [f64]) {
        let n = self.n();
        for f in 0..self.fields() {
            let c = self.coeff(f);
            let rf = &r[f * n..(f + 1) * n];
            let mut rhs: Vec<f64> = rf.iter().zip(&self.ops.volumes).map(|(a, v)| a * v).collect();
            self.ops.eliminate(&mut rhs, c, &self.fixed.mask, rf);
            self.precond[f].solve(&mut rhs);
            y[f * n..(f + 1) * n].copy_from_slice(&rhs);
        }
    }
}

/// Solves the stationary system with Dirichlet data and returns the state
/// together with its Neumann traces.
pub fn solve_stationary(
    grid: &Grid,
    params: &ModelParams,
    reaction: &PiecewiseReaction,
    dirichlet: &Boundary,
    opts: &NewtonOptions,
) -> Result<StationaryRun> {
    params.validate()?;
    if reaction.n_chem() != params.n_chem() || reaction.n_prey() != params.n_prey() {
        return Err(Error::InvalidParams("reaction and model species counts differ".into()));
    }
    let fixed = FixedNodes::new(grid, params, dirichlet)?.ok_or_else(|| {
        Error::InvalidParams("the stationary problem needs Dirichlet data".into())
    })?;
    if fixed.values.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParams("Dirichlet data must be finite".into()));
    }
    let indicator = rasterize_inclusion(&reaction.inclusion, grid)?;
    let ops = FvOperators::new(grid);
    let zeros = vec![0.0; grid.len()];
    let fields = params.n_chem() + params.n_prey();
    let mut precond = Vec::with_capacity(fields);
    for f in 0..fields {
        let c = if f < params.n_chem() {
            params.d[f]
        } else {
            params.delta[f - params.n_chem()]
        };
        precond.push(ops.factor(&zeros, c, Some(&fixed.mask))?);
    }
    let prob = Problem {
        grid,
        params,
        reaction: BoundReaction::new(reaction, grid, &indicator),
        ops,
        fixed,
        precond,
    };
    let n = grid.len();
    let len = n * fields;

    // harmonic extension of the boundary data
    let mut b = vec![0.0; len];
    for f in 0..fields {
        for k in 0..n {
            if prob.fixed.mask[k] {
                b[f * n + k] = prob.fixed.values[f][k];
            }
        }
    }
    let mut x = vec![0.0; len];
    prob.apply_precond(&b, &mut x);

    let mut r = vec![0.0; len];
    prob.residual(&x, &mut r)?;
    let mut rnorm = linalg::norm_inf(&r);
    let mut iterations = 0;
    let mut trial = vec![0.0; len];
    let mut rt = vec![0.0; len];
    while rnorm >= opts.tol {
        if iterations >= opts.max_iter || !rnorm.is_finite() {
            return Err(Error::NewtonDivergence {
                iterations,
                residual: rnorm,
            });
        }
        iterations += 1;
        let xnorm = linalg::norm2(&x);
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let mut s = vec![0.0; len];
        let base_r = r.clone();
        let mut xp = vec![0.0; len];
        let jvp = |dir: &[f64], out: &mut [f64]| -> Result<()> {
            let dn = linalg::norm2(dir);
            if dn == 0.0 {
                out.iter_mut().for_each(|o| *o = 0.0);
                return Ok(());
            }
            let eta = opts.fd_step * (1.0 + xnorm) / dn;
            for k in 0..len {
                xp[k] = x[k] + eta * dir[k];
            }
            prob.residual(&xp, out)?;
            for k in 0..len {
                out[k] = (out[k] - base_r[k]) / eta;
            }
            Ok(())
        };
        linalg::gmres(
            jvp,
            |v, y| prob.apply_precond(v, y),
            &rhs,
            &mut s,
            opts.restart,
            1e-9,
            10 * opts.restart,
        )?;

        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            for k in 0..len {
                trial[k] = x[k] + lambda * s[k];
            }
            prob.residual(&trial, &mut rt)?;
            let tn = linalg::norm_inf(&rt);
            if tn.is_finite() && tn < rnorm {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted && !linalg::norm_inf(&rt).is_finite() {
            return Err(Error::NewtonDivergence {
                iterations,
                residual: f64::INFINITY,
            });
        }
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut r, &mut rt);
        rnorm = linalg::norm_inf(&r);
    }
    let state = prob.split(&x);
    state.check_finite()?;
    let measurements = neumann_measurements(grid, &state);
    Ok(StationaryRun {
        state,
        measurements,
        iterations,
        residual: rnorm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Inclusion;

    fn zero_reaction(n: usize, m: usize) -> PiecewiseReaction {
        PiecewiseReaction::zero(vec![0.0; n], m, 3, Inclusion::circle([0.5, 0.5], 0.2)).unwrap()
    }

    #[test]
    fn constant_data() {
        let g = Grid::unit(20).unwrap();
        let p = ModelParams::uncoupled(vec![0.5], vec![], 1.0);
        let s = State::constant(&g, &[0.8], 0);
        let bc = Boundary::dirichlet_from(&g, &s);
        let run = solve_stationary(&g, &p, &zero_reaction(1, 0), &bc, &NewtonOptions::default()).unwrap();
        for x in &run.state.u[0] {
            assert!((x - 0.8).abs() < 1e-12);
        }
        assert!(run.measurements.values().all(|d| d.abs() < 1e-9));
    }

    #[test]
    fn linear_data_gives_unit_flux() {
        let g = Grid::unit(24).unwrap();
        let p = ModelParams::uncoupled(vec![1.0], vec![], 1.0);
        let s = State {
            u: vec![g.sample(|x| x[0])],
            v: vec![],
            t: 0.0,
        };
        let bc = Boundary::dirichlet_from(&g, &s);
        let run = solve_stationary(&g, &p, &zero_reaction(1, 0), &bc, &NewtonOptions::default()).unwrap();
        for (a, b) in run.state.u[0].iter().zip(&s.u[0]) {
            assert!((a - b).abs() < 1e-12);
        }
        for (b, d) in g.boundary_nodes().iter().zip(&run.measurements.traces[0][0]) {
            assert!((d - b.normal[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn neumann_boundary_rejected() {
        let g = Grid::unit(16).unwrap();
        let p = ModelParams::uncoupled(vec![1.0], vec![], 1.0);
        assert!(solve_stationary(&g, &p, &zero_reaction(1, 0), &Boundary::Neumann, &NewtonOptions::default()).is_err());
    }
}
