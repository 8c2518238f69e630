//! IMEX time stepping for the time-dependent system.
//!
//! Chemicals: `(u⁺ − u)/dt = d L(a u⁺) + G(x, t, u, v)` with the frozen
//! cross-diffusion factor `a = 1 + Σ_j δ_ij v_j`, solved for `w = a u⁺`.
//! Prey: `(v⁺ − v)/dt = δ L v⁺ + Σ_i χ^i_j ∇·(v ∇u_i)` with the taxis term
//! taken at the old time level.

use serde::{Deserialize, Serialize};

use super::measurement::{extract_measurements, MeasurementSet};
use super::ops::FvOperators;
use super::params::{Boundary, FixedNodes, ModelParams, State};
use crate::error::{Error, Result};
use crate::geometry::{rasterize_inclusion, Grid};
use crate::linalg::BandedCholesky;
use crate::reaction::{BoundReaction, PiecewiseReaction};

/// Safety factor of the explicit taxis bound.
pub const STABILITY_FACTOR: f64 = 0.2;

struct ChemFactor {
    dt: f64,
    a: Vec<f64>,
    chol: BandedCholesky,
}

/// A discretised forward problem: grid, operators, bound reaction and
/// boundary condition, with cached factorisations.
pub struct ForwardModel {
    grid: Grid,
    params: ModelParams,
    reaction: BoundReaction,
    ops: FvOperators,
    fixed: Option<FixedNodes>,
    chem_cache: Vec<Option<ChemFactor>>,
    prey_cache: Vec<Option<(f64, BandedCholesky)>>,
}

/// Output of [`ForwardModel::solve_time_dependent`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardRun {
    pub measurements: MeasurementSet,
    pub final_state: State,
    pub trajectory: Option<Vec<State>>,
    pub steps: usize,
    pub dt: f64,
    /// Smallest field value seen at any step.
    pub min_value: f64,
}

impl ForwardModel {
    pub fn new(grid: &Grid, params: &ModelParams, reaction: &PiecewiseReaction, bc: &Boundary) -> Result<Self> {
        params.validate()?;
        if reaction.n_chem() != params.n_chem() || reaction.n_prey() != params.n_prey() {
            return Err(Error::InvalidParams(format!(
                "reaction has {} chemicals and {} prey, model has {} and {}",
                reaction.n_chem(),
                reaction.n_prey(),
                params.n_chem(),
                params.n_prey()
            )));
        }
        let indicator = rasterize_inclusion(&reaction.inclusion, grid)?;
        let bound = BoundReaction::new(reaction, grid, &indicator);
        Ok(ForwardModel {
            grid: grid.clone(),
            params: params.clone(),
            reaction: bound,
            ops: FvOperators::new(grid),
            fixed: FixedNodes::new(grid, params, bc)?,
            chem_cache: (0..params.n_chem()).map(|_| None).collect(),
            prey_cache: (0..params.n_prey()).map(|_| None).collect(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn ops(&self) -> &FvOperators {
        &self.ops
    }

    pub fn reaction(&self) -> &BoundReaction {
        &self.reaction
    }

    /// Largest admissible `dt` for the explicit taxis term at state `s`.
    pub fn stability_bound(&self, s: &State) -> f64 {
        if !self.params.has_taxis() {
            return f64::INFINITY;
        }
        let grads: Vec<f64> = s.u.iter().map(|u| self.ops.max_gradient(&self.grid, u)).collect();
        let speed = (0..self.params.n_prey())
            .map(|j| {
                (0..self.params.n_chem())
                    .filter(|&i| self.params.chi[i][j] == 1)
                    .map(|i| grads[i])
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        if speed == 0.0 {
            f64::INFINITY
        } else {
            STABILITY_FACTOR * self.grid.h_min() / speed
        }
    }

    /// Reaction term at every node for state `s`.
    pub fn reaction_field(&self, s: &State) -> Vec<Vec<f64>> {
        let n = self.params.n_chem();
        let mut g = vec![vec![0.0; self.grid.len()]; n];
        if self.reaction.is_zero() {
            return g;
        }
        let base = self.reaction.base();
        let mut z = vec![0.0; n + self.params.n_prey()];
        let mut out = vec![0.0; n];
        for k in 0..self.grid.len() {
            for i in 0..n {
                z[i] = s.u[i][k] - base[i];
            }
            for (j, v) in s.v.iter().enumerate() {
                z[n + j] = v[k];
            }
            out.iter_mut().for_each(|o| *o = 0.0);
            self.reaction.eval_node(k, s.t, &z, &mut out);
            for i in 0..n {
                g[i][k] = out[i];
            }
        }
        g
    }

    /// Solves `(diag(V/(a dt)) + d K) w = rhs` for chemical `i`.
    pub(crate) fn solve_chemical(&mut self, i: usize, a: &[f64], dt: f64, rhs: &mut [f64]) -> Result<()> {
        let reuse = matches!(&self.chem_cache[i], Some(c) if c.dt == dt && c.a == a);
        if !reuse {
            let m: Vec<f64> = self
                .ops
                .volumes
                .iter()
                .zip(a)
                .map(|(v, ak)| v / (ak * dt))
                .collect();
            let chol = self
                .ops
                .factor(&m, self.params.d[i], self.fixed.as_ref().map(|f| f.mask.as_slice()))?;
            self.chem_cache[i] = Some(ChemFactor {
                dt,
                a: a.to_vec(),
                chol,
            });
        }
        self.chem_cache[i].as_ref().expect("factor cached").chol.solve(rhs);
        Ok(())
    }

    pub(crate) fn solve_prey(&mut self, j: usize, dt: f64, rhs: &mut [f64]) -> Result<()> {
        let reuse = matches!(&self.prey_cache[j], Some((t, _)) if *t == dt);
        if !reuse {
            let m: Vec<f64> = self.ops.volumes.iter().map(|v| v / dt).collect();
            let chol = self.ops.factor(
                &m,
                self.params.delta[j],
                self.fixed.as_ref().map(|f| f.mask.as_slice()),
            )?;
            self.prey_cache[j] = Some((dt, chol));
        }
        self.prey_cache[j].as_ref().expect("factor cached").1.solve(rhs);
        Ok(())
    }

    pub(crate) fn fixed(&self) -> Option<&FixedNodes> {
        self.fixed.as_ref()
    }

    /// Cross-diffusion factor `a_i = 1 + Σ_j δ_ij v_j`.
    pub fn cross_factor(&self, i: usize, v: &[Vec<f64>]) -> Vec<f64> {
        let mut a = vec![1.0; self.grid.len()];
        for (j, vj) in v.iter().enumerate() {
            let c = self.params.cross[i][j];
            if c != 0.0 {
                for (ak, vk) in a.iter_mut().zip(vj) {
                    *ak += c * vk;
                }
            }
        }
        a
    }

    /// One IMEX step of length `dt`.
    pub fn step(&mut self, s: &State, dt: f64) -> Result<State> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParams(format!("time step {dt} must be positive")));
        }
        s.check_shape(&self.grid, &self.params)?;
        s.check_finite()?;
        let bound = self.stability_bound(s);
        if dt > bound {
            return Err(Error::Stability { dt, bound });
        }
        let n = self.grid.len();
        let g = self.reaction_field(s);
        let nc = self.params.n_chem();

        let mut u_new = Vec::with_capacity(nc);
        for i in 0..nc {
            let a = self.cross_factor(i, &s.v);
            if a.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::InvalidParams(format!(
                    "cross-diffusion factor of u{} is not positive",
                    i + 1
                )));
            }
            let mut rhs: Vec<f64> = (0..n)
                .map(|k| self.ops.volumes[k] * (s.u[i][k] / dt + g[i][k]))
                .collect();
            if let Some(fx) = &self.fixed {
                let w: Vec<f64> = fx.values[i].iter().zip(&a).map(|(x, ak)| x * ak).collect();
                self.ops.eliminate(&mut rhs, self.params.d[i], &fx.mask, &w);
            }
            self.solve_chemical(i, &a, dt, &mut rhs)?;
            for (w, ak) in rhs.iter_mut().zip(&a) {
                *w /= ak;
            }
            u_new.push(rhs);
        }

        let mut v_new = Vec::with_capacity(self.params.n_prey());
        let mut d = vec![0.0; n];
        for j in 0..self.params.n_prey() {
            let mut src = vec![0.0; n];
            for i in 0..nc {
                if self.params.chi[i][j] == 1 {
                    self.ops.taxis(&s.v[j], &s.u[i], &mut d);
                    for (a, b) in src.iter_mut().zip(&d) {
                        *a += b;
                    }
                }
            }
            let mut rhs: Vec<f64> = (0..n)
                .map(|k| self.ops.volumes[k] * (s.v[j][k] / dt + src[k]))
                .collect();
            if let Some(fx) = &self.fixed {
                self.ops
                    .eliminate(&mut rhs, self.params.delta[j], &fx.mask, &fx.values[nc + j]);
            }
            self.solve_prey(j, dt, &mut rhs)?;
            v_new.push(rhs);
        }
        let out = State {
            u: u_new,
            v: v_new,
            t: s.t + dt,
        };
        out.check_finite()?;
        Ok(out)
    }

    /// Number of steps and the step length that lands exactly on `T`.
    pub fn schedule(&self, dt: f64) -> Result<(usize, f64)> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParams(format!("time step {dt} must be positive")));
        }
        let t = self.params.t_final;
        let steps = ((t / dt) - 1e-9).ceil().max(1.0) as usize;
        Ok((steps, t / steps as f64))
    }

    /// Integrates to `T`, storing every `store_every`-th step and the last one.
    pub fn solve_time_dependent(
        &mut self,
        init: &State,
        dt: f64,
        store_every: usize,
        keep_trajectory: bool,
    ) -> Result<ForwardRun> {
        if store_every == 0 {
            return Err(Error::InvalidParams("store_every must be at least 1".into()));
        }
        init.check_shape(&self.grid, &self.params)?;
        let (steps, dt) = self.schedule(dt)?;
        let mut s = init.clone();
        s.t = 0.0;
        let mut min_value = s.min_value();
        let mut stored = Vec::new();
        for k in 1..=steps {
            s = self.step(&s, dt)?;
            if k == steps {
                s.t = self.params.t_final;
            }
            min_value = min_value.min(s.min_value());
            if k % store_every == 0 || k == steps {
                stored.push(s.clone());
            }
        }
        let measurements = extract_measurements(&self.grid, &stored)?;
        Ok(ForwardRun {
            measurements,
            final_state: s,
            trajectory: keep_trajectory.then_some(stored),
            steps,
            dt,
            min_value,
        })
    }
}

/// One IMEX step without keeping the model around.
pub fn step_parabolic(
    grid: &Grid,
    s: &State,
    params: &ModelParams,
    reaction: &PiecewiseReaction,
    bc: &Boundary,
    dt: f64,
) -> Result<State> {
    ForwardModel::new(grid, params, reaction, bc)?.step(s, dt)
}

/// Integrates the time-dependent system and returns its Cauchy data.
#[allow(clippy::too_many_arguments)]
pub fn solve_time_dependent(
    grid: &Grid,
    params: &ModelParams,
    reaction: &PiecewiseReaction,
    init: &State,
    bc: &Boundary,
    dt: f64,
    store_every: usize,
    keep_trajectory: bool,
) -> Result<ForwardRun> {
    ForwardModel::new(grid, params, reaction, bc)?.solve_time_dependent(init, dt, store_every, keep_trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Inclusion;
    use crate::reaction::{CoefficientField, TaylorReaction};

    fn benchmark_reaction(u0: f64) -> PiecewiseReaction {
        let mut g1 = TaylorReaction::new(vec![u0], 0, 3).unwrap();
        let mut g0 = g1.clone();
        g1.set(0, "u1u1".parse().unwrap(), CoefficientField::constant(1.0)).unwrap();
        g0.set(0, "u1u1".parse().unwrap(), CoefficientField::constant(0.5)).unwrap();
        PiecewiseReaction::new(g1, g0, Inclusion::circle([0.5, 0.5], 0.2)).unwrap()
    }

    #[test]
    fn constant_state_is_fixed_point() {
        let g = Grid::unit(24).unwrap();
        let p = ModelParams::uncoupled(vec![0.1], vec![], 1.0);
        let r = benchmark_reaction(0.7);
        let mut m = ForwardModel::new(&g, &p, &r, &Boundary::Neumann).unwrap();
        let s0 = State::constant(&g, &[0.7], 0);
        let s1 = m.step(&s0, 0.01).unwrap();
        for x in &s1.u[0] {
            assert!((x - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_diffusion_conserves_mass() {
        let g = Grid::unit(24).unwrap();
        let p = ModelParams::uncoupled(vec![0.3], vec![0.2], 1.0);
        let r = PiecewiseReaction::zero(vec![0.0], 1, 3, Inclusion::circle([0.5, 0.5], 0.2)).unwrap();
        let mut m = ForwardModel::new(&g, &p, &r, &Boundary::Neumann).unwrap();
        let mut s = State {
            u: vec![g.sample(|x| (-(x[0] - 0.3).powi(2) * 20.0).exp())],
            v: vec![g.sample(|x| x[1] * x[1])],
            t: 0.0,
        };
        let vol = m.ops.volumes.clone();
        let mass = |f: &[f64]| -> f64 { f.iter().zip(&vol).map(|(a, b)| a * b).sum() };
        let (mu, mv) = (mass(&s.u[0]), mass(&s.v[0]));
        for _ in 0..10 {
            s = m.step(&s, 0.01).unwrap();
        }
        assert!((mass(&s.u[0]) - mu).abs() < 1e-12);
        assert!((mass(&s.v[0]) - mv).abs() < 1e-12);
    }

    #[test]
    fn taxis_bound_is_enforced() {
        let g = Grid::unit(16).unwrap();
        let mut p = ModelParams::uncoupled(vec![0.1], vec![0.1], 1.0);
        p.chi[0][0] = 1;
        let r = PiecewiseReaction::zero(vec![0.0], 1, 3, Inclusion::circle([0.5, 0.5], 0.2)).unwrap();
        let mut m = ForwardModel::new(&g, &p, &r, &Boundary::Neumann).unwrap();
        let s = State {
            u: vec![g.sample(|x| 100.0 * x[0])],
            v: vec![vec![1.0; g.len()]],
            t: 0.0,
        };
        let bound = m.stability_bound(&s);
        assert!((bound - 0.2 * g.h_min() / 100.0).abs() < 1e-12);
        assert!(matches!(m.step(&s, 2.0 * bound), Err(Error::Stability { .. })));
        assert!(m.step(&s, 0.5 * bound).is_ok());
    }

    #[test]
    fn nan_is_located() {
        let g = Grid::unit(16).unwrap();
        let p = ModelParams::uncoupled(vec![0.1], vec![], 1.0);
        let r = benchmark_reaction(0.0);
        let mut m = ForwardModel::new(&g, &p, &r, &Boundary::Neumann).unwrap();
        let mut s = State::constant(&g, &[0.0], 0);
        s.u[0][37] = f64::NAN;
        match m.step(&s, 0.01) {
            Err(Error::NonFinite { field, node }) => {
                assert_eq!(field, "u1");
                assert_eq!(node, 37);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn storage_schedule() {
        let g = Grid::unit(16).unwrap();
        let p = ModelParams::uncoupled(vec![0.1], vec![], 0.1);
        let r = benchmark_reaction(0.0);
        let mut m = ForwardModel::new(&g, &p, &r, &Boundary::Neumann).unwrap();
        let init = State {
            u: vec![g.sample(|x| x[0])],
            v: vec![],
            t: 0.0,
        };
        let run = m.solve_time_dependent(&init, 0.01, 3, true).unwrap();
        assert_eq!(run.steps, 10);
        assert_eq!(run.measurements.times.len(), 4);
        assert!((run.measurements.times[0] - 0.03).abs() < 1e-12);
        assert_eq!(*run.measurements.times.last().unwrap(), 0.1);
        assert_eq!(run.trajectory.unwrap().len(), 4);
    }
}
