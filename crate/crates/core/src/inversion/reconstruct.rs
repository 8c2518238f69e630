use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::discrepancy::{discrepancy_l2, discrepancy_report, DiscrepancyReport};
use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use crate::error::{Error, Result};
use crate::forward::{
    solve_stationary, Boundary, ForwardModel, MeasurementSet, ModelParams, NewtonOptions, State,
};
use crate::geometry::{Grid, Inclusion};
use crate::reaction::PiecewiseReaction;

/// Largest supported parameter count.
pub const MAX_PARAMETERS: usize = 12;

/// How candidate inclusions are parametrised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Candidate {
    /// `[cx, cy, r]`.
    Circle,
    /// `[x1, y1, …, xk, yk]` with a fixed vertex count.
    Polygon { vertices: usize },
}

impl Candidate {
    pub fn dim(&self) -> usize {
        match self {
            Candidate::Circle => 3,
            Candidate::Polygon { vertices } => 2 * vertices,
        }
    }

    pub fn build(&self, p: &[f64]) -> Result<Inclusion> {
        if p.len() != self.dim() {
            return Err(Error::InvalidInclusion(format!(
                "expected {} parameters, got {}",
                self.dim(),
                p.len()
            )));
        }
        let inc = match self {
            Candidate::Circle => Inclusion::circle([p[0], p[1]], p[2]),
            Candidate::Polygon { .. } => Inclusion::polygon(p.chunks(2).map(|c| [c[0], c[1]]).collect()),
        };
        inc.validate()?;
        Ok(inc)
    }

    /// Parameters of a centred guess: circle of radius `size`, or a regular
    /// polygon inscribed in it.
    pub fn default_guess(&self, center: [f64; 2], size: f64) -> Vec<f64> {
        match self {
            Candidate::Circle => vec![center[0], center[1], size],
            Candidate::Polygon { vertices } => (0..*vertices)
                .flat_map(|k| {
                    let t = 2.0 * PI * k as f64 / *vertices as f64;
                    [center[0] + size * t.cos(), center[1] + size * t.sin()]
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimulationMode {
    Parabolic { dt: f64, store_every: usize },
    /// Dirichlet data taken from the initial state.
    Stationary,
}

/// Everything needed to simulate data for a candidate inclusion.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardSetup {
    pub grid: Grid,
    pub params: ModelParams,
    /// Reaction branches; the inclusion is replaced per candidate.
    pub reaction: PiecewiseReaction,
    pub initial: State,
    pub boundary: Boundary,
    pub mode: SimulationMode,
}

impl ForwardSetup {
    pub fn simulate(&self, inclusion: &Inclusion) -> Result<MeasurementSet> {
        let mut reaction = self.reaction.clone();
        reaction.inclusion = inclusion.clone();
        match self.mode {
            SimulationMode::Parabolic { dt, store_every } => {
                let mut m = ForwardModel::new(&self.grid, &self.params, &reaction, &self.boundary)?;
                Ok(m.solve_time_dependent(&self.initial, dt, store_every, false)?.measurements)
            }
            SimulationMode::Stationary => {
                let bc = Boundary::dirichlet_from(&self.grid, &self.initial);
                Ok(solve_stationary(&self.grid, &self.params, &reaction, &bc, &NewtonOptions::default())?.measurements)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub level: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseProblem {
    pub setup: ForwardSetup,
    pub observed: MeasurementSet,
    pub candidate: Candidate,
    pub noise: Option<NoiseSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub restarts: usize,
    /// Total forward solves over all restarts.
    pub max_solves: usize,
    pub seed: u64,
    /// First restart starts here; later ones are seeded perturbations of it.
    pub initial: Option<Vec<f64>>,
    /// Size of the initial simplex and of the restart perturbations.
    pub step: f64,
    pub tol_x: f64,
    /// Restarts are skipped once the misfit is at or below this.
    pub target_misfit: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            restarts: 3,
            max_solves: 300,
            seed: 1,
            initial: None,
            step: 0.05,
            tol_x: 1e-8,
            target_misfit: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub misfit: f64,
    pub solves: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub parameters: Vec<f64>,
    pub inclusion: Inclusion,
    /// `L²` misfit at the estimate (the objective).
    pub misfit: f64,
    pub discrepancy: DiscrepancyReport,
    /// Best misfit after each optimiser iteration, across restarts.
    pub history: Vec<f64>,
    pub restarts: Vec<RestartSummary>,
    pub solves: usize,
    /// Set when the best misfit stayed above the target.
    pub stagnated: bool,
    pub noise_seed: Option<u64>,
}

impl InverseProblem {
    pub fn validate(&self) -> Result<()> {
        self.observed.validate()?;
        if self.candidate.dim() == 0 || self.candidate.dim() > MAX_PARAMETERS {
            return Err(Error::InvalidParams(format!(
                "candidate has {} parameters, at most {MAX_PARAMETERS} supported",
                self.candidate.dim()
            )));
        }
        let expected_nodes = self.setup.grid.boundary_len();
        if self.observed.boundary_nodes != expected_nodes {
            return Err(Error::LayoutMismatch(format!(
                "observed data has {} boundary nodes, grid has {expected_nodes}",
                self.observed.boundary_nodes
            )));
        }
        Ok(())
    }

    /// Objective: `L²` misfit of the candidate's simulated data, or `+∞` for
    /// inadmissible or failing candidates.
    pub fn misfit(&self, p: &[f64]) -> f64 {
        let Ok(inc) = self.candidate.build(p) else {
            return f64::INFINITY;
        };
        match self.setup.simulate(&inc) {
            Ok(sim) => discrepancy_l2(&sim, &self.observed).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Nelder–Mead over the candidate parameters from seeded starting points.
pub fn reconstruct_inclusion(ip: &InverseProblem, opts: &ReconstructOptions) -> Result<ReconstructionResult> {
    ip.validate()?;
    let dim = ip.candidate.dim();
    let rect = &ip.setup.grid.bounds;
    let centre = [0.5 * (rect.x0 + rect.x1), 0.5 * (rect.y0 + rect.y1)];
    let size = 0.15 * (rect.x1 - rect.x0).min(rect.y1 - rect.y0);
    let base = match &opts.initial {
        Some(p) if p.len() == dim => p.clone(),
        Some(p) => {
            return Err(Error::InvalidParams(format!(
                "initial guess has {} entries, candidate needs {dim}",
                p.len()
            )))
        }
        None => ip.candidate.default_guess(centre, size),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut history = Vec::new();
    let mut restarts = Vec::new();
    let mut solves = 0;
    for k in 0..opts.restarts.max(1) {
        let remaining = opts.max_solves.saturating_sub(solves);
        if remaining <= dim + 1 {
            break;
        }
        if best.as_ref().is_some_and(|b| b.1 <= opts.target_misfit) {
            break;
        }
        let start: Vec<f64> = if k == 0 {
            base.clone()
        } else {
            base.iter()
                .map(|x| x + opts.step * (2.0 * rng.random::<f64>() - 1.0))
                .collect()
        };
        let share = remaining / (opts.restarts.max(1) - k);
        let nm = nelder_mead(
            |p| ip.misfit(p),
            &start,
            &vec![opts.step; dim],
            &NelderMeadOptions {
                max_evals: share,
                tol_x: opts.tol_x,
                tol_f: 0.0,
            },
        );
        solves += nm.evals;
        for h in &nm.history {
            let prev = history.last().copied().unwrap_or(f64::INFINITY);
            history.push(prev.min(*h));
        }
        restarts.push(RestartSummary {
            start,
            end: nm.x.clone(),
            misfit: nm.f,
            solves: nm.evals,
            converged: nm.converged,
        });
        if best.as_ref().is_none_or(|b| nm.f < b.1) {
            best = Some((nm.x, nm.f));
        }
    }
    let (parameters, misfit) = best.ok_or_else(|| Error::InvalidParams("solve budget too small".into()))?;
    if !misfit.is_finite() {
        return Err(Error::InvalidInclusion("no admissible candidate found".into()));
    }
    let inclusion = ip.candidate.build(&parameters)?;
    let discrepancy = discrepancy_report(&ip.setup.simulate(&inclusion)?, &ip.observed)?;
    Ok(ReconstructionResult {
        parameters,
        inclusion,
        misfit,
        discrepancy,
        history,
        restarts,
        solves,
        stagnated: misfit > opts.target_misfit,
        noise_seed: ip.noise.as_ref().map(|n| n.seed),
    })
}
