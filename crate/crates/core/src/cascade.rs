//! ε-derivatives of the discrete solution about the constant state `(u₀, 0)`.
//!
//! For data `u(0) = u₀ + εf₁ + ½ε²f₂`, `v(0) = εg₁ + ½ε²g₂`, the order-ℓ
//! field `u^(ℓ) = ∂_ε^ℓ u|_{ε=0}` satisfies the linear scheme obtained by
//! differentiating the forward scheme ℓ times. Sources come from lower orders:
//!
//! * reaction: `∂_ε^ℓ G` along the lower-order jet,
//! * cross-diffusion: `d L(Σ_{k=1}^{ℓ} C(ℓ,k) a^(k) u^(ℓ−k))` with
//!   `a^(k) = Σ_j δ_ij v_j^(k)` and `u^(0) = u₀`,
//! * taxis: `Σ_i χ^i_j Σ_{k=1}^{ℓ−1} C(ℓ,k) ∇·(v_j^(k) ∇u_i^(ℓ−k))`.
//!
//! The same stencils, step length and boundary handling as the forward
//! solver are used, so finite-difference quotients of forward solves converge
//! to these fields at the Taylor rate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit;
use crate::forward::{
    solve_stationary, Boundary, ForwardModel, ModelParams, NewtonOptions, State,
};
use crate::geometry::Grid;
use crate::linalg::BandedCholesky;
use crate::reaction::jet::{self, Jet};
use crate::reaction::PiecewiseReaction;

/// Highest supported cascade order.
pub const MAX_CASCADE_ORDER: usize = 3;

/// Default ε ladder.
pub const DEFAULT_LADDER: [f64; 4] = [1e-1, 5e-2, 2.5e-2, 1.25e-2];

const BINOM: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0],
    [1.0, 3.0, 3.0, 1.0],
];

/// The ε-family of initial (and, for Dirichlet problems, boundary) data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataFamily {
    pub base: Vec<f64>,
    pub f1: Vec<Vec<f64>>,
    pub f2: Vec<Vec<f64>>,
    pub g1: Vec<Vec<f64>>,
    pub g2: Vec<Vec<f64>>,
    pub eps: Vec<f64>,
}

impl DataFamily {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        let n = self.base.len();
        if self.f1.len() != n || self.f2.len() != n || self.g1.len() != self.g2.len() {
            return bad("data family field counts are inconsistent".into());
        }
        if self
            .f1
            .iter()
            .chain(&self.f2)
            .chain(&self.g1)
            .chain(&self.g2)
            .any(|f| f.len() != grid.len() || f.iter().any(|x| !x.is_finite()))
        {
            return bad("data family fields must be finite grid fields".into());
        }
        for (i, f) in self.f1.iter().enumerate() {
            if self.base[i] == 0.0 && f.iter().any(|x| *x < 0.0) {
                return bad(format!("f1 for u{} must be nonnegative when u0 = 0", i + 1));
            }
        }
        if self.g1.iter().flatten().any(|x| *x < 0.0) {
            return bad("g1 must be nonnegative".into());
        }
        if self.eps.len() < 4 {
            return bad(format!("ε ladder needs at least 4 entries, got {}", self.eps.len()));
        }
        if self.eps.iter().any(|e| !(*e > 0.0)) || self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return bad("ε ladder must be positive and strictly decreasing".into());
        }
        Ok(())
    }

    pub fn n_chem(&self) -> usize {
        self.base.len()
    }

    pub fn n_prey(&self) -> usize {
        self.g1.len()
    }

    /// `u(ε) = u₀ + εf₁ + ½ε²f₂`, `v(ε) = εg₁ + ½ε²g₂`.
    pub fn initial(&self, eps: f64) -> State {
        let mix = |c: f64, a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| c + eps * x + 0.5 * eps * eps * y).collect()
        };
        State {
            u: (0..self.n_chem())
                .map(|i| mix(self.base[i], &self.f1[i], &self.f2[i]))
                .collect(),
            v: (0..self.n_prey()).map(|j| mix(0.0, &self.g1[j], &self.g2[j])).collect(),
            t: 0.0,
        }
    }

    /// `∂_ε^ℓ` of the data: `(f₁, g₁)`, `(f₂, g₂)`, then zero.
    pub fn derivative(&self, order: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        match order {
            1 => (self.f1.clone(), self.g1.clone()),
            2 => (self.f2.clone(), self.g2.clone()),
            _ => {
                let n = self.f1.first().or(self.g1.first()).map_or(0, |f| f.len());
                (
                    vec![vec![0.0; n]; self.n_chem()],
                    vec![vec![0.0; n]; self.n_prey()],
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Neumann,
    /// Boundary values follow the data family.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CascadeMode {
    Parabolic { dt: f64 },
    Stationary,
}

/// One order of the cascade: `u[step][chemical][node]`, `v[step][prey][node]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFields {
    pub u: Vec<Vec<Vec<f64>>>,
    pub v: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeSolution {
    pub times: Vec<f64>,
    /// `orders[ℓ − 1]` holds order ℓ.
    pub orders: Vec<OrderFields>,
}

impl CascadeSolution {
    pub fn order(&self) -> usize {
        self.orders.len()
    }

    pub fn get(&self, order: usize) -> Option<&OrderFields> {
        order.checked_sub(1).and_then(|o| self.orders.get(o))
    }
}

/// Cascade solver bound to a grid, model and reaction.
pub struct Cascade {
    grid: Grid,
    params: ModelParams,
    reaction: PiecewiseReaction,
    kind: BoundaryKind,
    mode: CascadeMode,
    model: ForwardModel,
    steps: usize,
    dt: f64,
    elliptic: Vec<BandedCholesky>,
    mask: Option<Vec<bool>>,
    pub newton: NewtonOptions,
}

impl Cascade {
    pub fn new(
        grid: &Grid,
        params: &ModelParams,
        reaction: &PiecewiseReaction,
        kind: BoundaryKind,
        mode: CascadeMode,
    ) -> Result<Self> {
        let bc = match kind {
            BoundaryKind::Neumann => Boundary::Neumann,
            BoundaryKind::Dirichlet => {
                let b = grid.boundary_len();
                Boundary::Dirichlet {
                    u: vec![vec![0.0; b]; params.n_chem()],
                    v: vec![vec![0.0; b]; params.n_prey()],
                }
            }
        };
        let model = ForwardModel::new(grid, params, reaction, &bc)?;
        let mask = model.fixed().map(|f| f.mask.clone());
        let (steps, dt, elliptic) = match mode {
            CascadeMode::Parabolic { dt } => {
                let (s, d) = model.schedule(dt)?;
                (s, d, Vec::new())
            }
            CascadeMode::Stationary => {
                let Some(mask) = &mask else {
                    return Err(Error::InvalidParams(
                        "the stationary cascade needs Dirichlet data".into(),
                    ));
                };
                let zeros = vec![0.0; grid.len()];
                let coeffs = params.d.iter().chain(&params.delta);
                let el = coeffs
                    .map(|c| model.ops().factor(&zeros, *c, Some(mask)))
                    .collect::<Result<Vec<_>>>()?;
                (1, 0.0, el)
            }
        };
        Ok(Cascade {
            grid: grid.clone(),
            params: params.clone(),
            reaction: reaction.clone(),
            kind,
            mode,
            model,
            steps,
            dt,
            elliptic,
            mask,
            newton: NewtonOptions::default(),
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn mode(&self) -> CascadeMode {
        self.mode
    }

    fn times(&self) -> Vec<f64> {
        match self.mode {
            CascadeMode::Stationary => vec![0.0],
            CascadeMode::Parabolic { .. } => {
                let mut t = 0.0;
                let mut out = vec![0.0];
                for _ in 0..self.steps {
                    t += self.dt;
                    out.push(t);
                }
                out
            }
        }
    }

    fn check_family(&self, family: &DataFamily) -> Result<()> {
        family.validate(&self.grid)?;
        if family.n_chem() != self.params.n_chem() || family.n_prey() != self.params.n_prey() {
            return Err(Error::InvalidParams("data family species counts differ from the model".into()));
        }
        if family.base != self.reaction.base() {
            return Err(Error::InvalidParams(
                "data family base state differs from the reaction centre".into(),
            ));
        }
        Ok(())
    }

    pub fn solve_first_order(&mut self, family: &DataFamily) -> Result<CascadeSolution> {
        self.check_family(family)?;
        let first = self.solve_order(1, &[], family)?;
        Ok(CascadeSolution {
            times: self.times(),
            orders: vec![first],
        })
    }

    /// Order 2 (or 3 with `order = 3`) from a solution holding all lower orders.
    pub fn solve_second_order(
        &mut self,
        lower: &CascadeSolution,
        family: &DataFamily,
        order: usize,
    ) -> Result<CascadeSolution> {
        self.check_family(family)?;
        if !(2..=MAX_CASCADE_ORDER).contains(&order) {
            return Err(Error::InvalidParams(format!("cascade order {order} outside 2..=3")));
        }
        if lower.order() < order - 1 {
            return Err(Error::InvalidParams(format!(
                "order {order} needs orders 1..{} first",
                order - 1
            )));
        }
        if self.reaction.order() < order {
            return Err(Error::InvalidReaction(format!(
                "reaction truncated at order {} cannot drive cascade order {order}",
                self.reaction.order()
            )));
        }
        let prev = &lower.orders[..order - 1];
        let fields = self.solve_order(order, prev, family)?;
        let mut orders = prev.to_vec();
        orders.push(fields);
        Ok(CascadeSolution {
            times: self.times(),
            orders,
        })
    }

    /// Cascade up to `order` in one call.
    pub fn solve(&mut self, family: &DataFamily, order: usize) -> Result<CascadeSolution> {
        let mut sol = self.solve_first_order(family)?;
        for ell in 2..=order {
            sol = self.solve_second_order(&sol, family, ell)?;
        }
        Ok(sol)
    }

    /// `∂_ε^ℓ G` at every node for a step, given jets of all orders.
    fn reaction_source<'a>(
        &self,
        ell: usize,
        t: f64,
        fields_at: &dyn Fn(usize, usize) -> Option<&'a [f64]>,
    ) -> Vec<Vec<f64>> {
        let nc = self.params.n_chem();
        let nf = nc + self.params.n_prey();
        let n = self.grid.len();
        let mut g = vec![vec![0.0; n]; nc];
        let bound = self.model.reaction();
        if bound.is_zero() {
            return g;
        }
        let fact = [1.0, 1.0, 2.0, 6.0];
        let mut z: Vec<Jet> = vec![jet::ZERO; nf];
        let mut out: Vec<Jet> = vec![jet::ZERO; nc];
        // cache field slices: slices[m][f]
        let slices: Vec<Vec<Option<&'a [f64]>>> = (1..=ell)
            .map(|m| (0..nf).map(|f| fields_at(m, f)).collect())
            .collect();
        for k in 0..n {
            for (f, zf) in z.iter_mut().enumerate() {
                *zf = jet::ZERO;
                for m in 1..=ell {
                    if let Some(s) = slices[m - 1][f] {
                        zf[m] = s[k] / fact[m];
                    }
                }
            }
            out.iter_mut().for_each(|o| *o = jet::ZERO);
            bound.eval_node_jet(k, t, &z, &mut out);
            for i in 0..nc {
                g[i][k] = jet::derivative(&out[i], ell);
            }
        }
        g
    }

    fn solve_order(&mut self, ell: usize, lower: &[OrderFields], family: &DataFamily) -> Result<OrderFields> {
        match self.mode {
            CascadeMode::Parabolic { .. } => self.parabolic_order(ell, lower, family),
            CascadeMode::Stationary => self.stationary_order(ell, lower, family),
        }
    }

    fn parabolic_order(&mut self, ell: usize, lower: &[OrderFields], family: &DataFamily) -> Result<OrderFields> {
        let n = self.grid.len();
        let nc = self.params.n_chem();
        let np = self.params.n_prey();
        let dt = self.dt;
        let (u_init, v_init) = family.derivative(ell);
        let (bu, bv) = (u_init.clone(), v_init.clone());
        let mut out = OrderFields {
            u: vec![u_init],
            v: vec![v_init],
        };
        let ones = vec![1.0; n];
        let vol = self.model.ops().volumes.clone();
        let base = family.base.clone();
        let mut lap = vec![0.0; n];
        let mut tx = vec![0.0; n];
        let mut t = 0.0;
        for step in 0..self.steps {
            let g = {
                let cur = &out;
                let get = |m: usize, f: usize| -> Option<&[f64]> {
                    let of = if m == ell { cur } else { &lower[m - 1] };
                    if f < nc {
                        Some(of.u[step][f].as_slice())
                    } else {
                        Some(of.v[step][f - nc].as_slice())
                    }
                };
                self.reaction_source(ell, t, &get)
            };
            let mut u_next = Vec::with_capacity(nc);
            for i in 0..nc {
                let mut rhs: Vec<f64> = (0..n)
                    .map(|k| vol[k] * (out.u[step][i][k] / dt + g[i][k]))
                    .collect();
                if let Some(cross) = self.cross_term(i, ell, step, lower, &out, &base, true) {
                    self.model.ops().laplacian(&cross, &mut lap);
                    let d = self.params.d[i];
                    for k in 0..n {
                        rhs[k] += vol[k] * d * lap[k];
                    }
                }
                if let Some(mask) = &self.mask {
                    self.model.ops().eliminate(&mut rhs, self.params.d[i], mask, &bu[i]);
                }
                self.model.solve_chemical(i, &ones, dt, &mut rhs)?;
                u_next.push(rhs);
            }
            let mut v_next = Vec::with_capacity(np);
            for j in 0..np {
                let mut src = vec![0.0; n];
                for i in 0..nc {
                    if self.params.chi[i][j] != 1 {
                        continue;
                    }
                    for k in 1..ell {
                        let vk = &lower[k - 1].v[step][j];
                        let um = &lower[ell - k - 1].u[step][i];
                        self.model.ops().taxis(vk, um, &mut tx);
                        let c = BINOM[ell][k];
                        for (s, x) in src.iter_mut().zip(&tx) {
                            *s += c * x;
                        }
                    }
                }
                let mut rhs: Vec<f64> = (0..n)
                    .map(|k| vol[k] * (out.v[step][j][k] / dt + src[k]))
                    .collect();
                if let Some(mask) = &self.mask {
                    self.model.ops().eliminate(&mut rhs, self.params.delta[j], mask, &bv[j]);
                }
                self.model.solve_prey(j, dt, &mut rhs)?;
                v_next.push(rhs);
            }
            out.u.push(u_next);
            out.v.push(v_next);
            t += dt;
        }
        Ok(out)
    }

    /// `Σ_{k=1}^{ℓ} C(ℓ,k) a^(k) u^(ℓ−k)` for chemical `i`, or `None` when
    /// no cross-diffusion acts on it. `a^(k)` is taken at `step` and the
    /// chemical factor at `step + 1` (parabolic) or the same level
    /// (stationary).
    #[allow(clippy::too_many_arguments)]
    fn cross_term(
        &self,
        i: usize,
        ell: usize,
        step: usize,
        lower: &[OrderFields],
        cur: &OrderFields,
        base: &[f64],
        parabolic: bool,
    ) -> Option<Vec<f64>> {
        let cross = &self.params.cross[i];
        if cross.iter().all(|c| *c == 0.0) {
            return None;
        }
        let n = self.grid.len();
        let ulevel = if parabolic { step + 1 } else { step };
        let mut acc = vec![0.0; n];
        for k in 1..=ell {
            let of = if k == ell { cur } else { &lower[k - 1] };
            let mut a = vec![0.0; n];
            for (j, c) in cross.iter().enumerate() {
                if *c != 0.0 {
                    for (ak, vk) in a.iter_mut().zip(&of.v[step][j]) {
                        *ak += c * vk;
                    }
                }
            }
            let c = BINOM[ell][k];
            if k == ell {
                for (s, ak) in acc.iter_mut().zip(&a) {
                    *s += c * ak * base[i];
                }
            } else {
                let um = &lower[ell - k - 1].u[ulevel][i];
                for (s, (ak, uk)) in acc.iter_mut().zip(a.iter().zip(um)) {
                    *s += c * ak * uk;
                }
            }
        }
        Some(acc)
    }

    fn stationary_order(&mut self, ell: usize, lower: &[OrderFields], family: &DataFamily) -> Result<OrderFields> {
        let n = self.grid.len();
        let nc = self.params.n_chem();
        let np = self.params.n_prey();
        let mask = self.mask.clone().expect("stationary cascade has Dirichlet nodes");
        let (bu, bv) = family.derivative(ell);
        let vol = self.model.ops().volumes.clone();
        let mut tx = vec![0.0; n];
        let mut v_out = Vec::with_capacity(np);
        for j in 0..np {
            let mut src = vec![0.0; n];
            for i in 0..nc {
                if self.params.chi[i][j] != 1 {
                    continue;
                }
                for k in 1..ell {
                    self.model
                        .ops()
                        .taxis(&lower[k - 1].v[0][j], &lower[ell - k - 1].u[0][i], &mut tx);
                    for (s, x) in src.iter_mut().zip(&tx) {
                        *s += BINOM[ell][k] * x;
                    }
                }
            }
            let mut rhs: Vec<f64> = (0..n).map(|k| vol[k] * src[k]).collect();
            self.model.ops().eliminate(&mut rhs, self.params.delta[j], &mask, &bv[j]);
            self.elliptic[nc + j].solve(&mut rhs);
            v_out.push(rhs);
        }
        // order-ℓ prey are known; chemicals of order ℓ enter only through
        // first derivatives of F, which vanish for admissible reactions
        let partial = OrderFields {
            u: vec![vec![vec![0.0; n]; nc]],
            v: vec![v_out],
        };
        let g = {
            let get = |m: usize, f: usize| -> Option<&[f64]> {
                if m == ell {
                    return (f >= nc).then(|| partial.v[0][f - nc].as_slice());
                }
                if f < nc {
                    Some(lower[m - 1].u[0][f].as_slice())
                } else {
                    Some(lower[m - 1].v[0][f - nc].as_slice())
                }
            };
            self.reaction_source(ell, f64::INFINITY, &get)
        };
        let mut lap = vec![0.0; n];
        let mut u_out = Vec::with_capacity(nc);
        for i in 0..nc {
            let mut rhs: Vec<f64> = (0..n).map(|k| vol[k] * g[i][k]).collect();
            if let Some(cross) = self.cross_term(i, ell, 0, lower, &partial, &family.base, false) {
                self.model.ops().laplacian(&cross, &mut lap);
                for k in 0..n {
                    rhs[k] += vol[k] * self.params.d[i] * lap[k];
                }
            }
            self.model.ops().eliminate(&mut rhs, self.params.d[i], &mask, &bu[i]);
            self.elliptic[i].solve(&mut rhs);
            u_out.push(rhs);
        }
        Ok(OrderFields {
            u: vec![u_out],
            v: partial.v,
        })
    }

    /// Forward solution for data `ε`, at every step including `t = 0`.
    pub fn solve_nonlinear(&self, family: &DataFamily, eps: f64) -> Result<Vec<State>> {
        let init = family.initial(eps);
        let bc = match self.kind {
            BoundaryKind::Neumann => Boundary::Neumann,
            BoundaryKind::Dirichlet => Boundary::dirichlet_from(&self.grid, &init),
        };
        match self.mode {
            CascadeMode::Parabolic { .. } => {
                let mut model = ForwardModel::new(&self.grid, &self.params, &self.reaction, &bc)?;
                let mut states = Vec::with_capacity(self.steps + 1);
                let mut s = init;
                states.push(s.clone());
                for _ in 0..self.steps {
                    s = model.step(&s, self.dt)?;
                    states.push(s.clone());
                }
                Ok(states)
            }
            CascadeMode::Stationary => {
                let run = solve_stationary(&self.grid, &self.params, &self.reaction, &bc, &self.newton)?;
                Ok(vec![run.state])
            }
        }
    }

    /// Compares difference quotients of forward solves over the ε ladder
    /// with the first- and second-order cascade fields.
    pub fn finite_difference_check(
        &mut self,
        family: &DataFamily,
        tolerances: SlopeTolerances,
    ) -> Result<ConvergenceReport> {
        let sol = self.solve(family, 2)?;
        let zero = self.solve_nonlinear(family, 0.0)?;
        let this = &*self;
        let runs: Vec<Result<Vec<State>>> = family
            .eps
            .par_iter()
            .map(|&e| this.solve_nonlinear(family, e))
            .collect();
        let first = &sol.orders[0];
        let second = &sol.orders[1];
        let mut e1 = Vec::new();
        let mut e2 = Vec::new();
        for (run, &eps) in runs.into_iter().zip(&family.eps) {
            let run = run?;
            let (mut a, mut b) = (0.0f64, 0.0f64);
            for (step, s) in run.iter().enumerate() {
                let pairs = s
                    .u
                    .iter()
                    .zip(&zero[step].u)
                    .zip(first.u[step].iter().zip(&second.u[step]))
                    .chain(
                        s.v.iter()
                            .zip(&zero[step].v)
                            .zip(first.v[step].iter().zip(&second.v[step])),
                    );
                for ((fe, f0), (d1, d2)) in pairs {
                    for k in 0..fe.len() {
                        let diff = fe[k] - f0[k];
                        a = a.max((diff / eps - d1[k]).abs());
                        b = b.max((2.0 * (diff - eps * d1[k]) / (eps * eps) - d2[k]).abs());
                    }
                }
            }
            e1.push(a);
            e2.push(b);
        }
        Ok(ConvergenceReport::new(family.eps.clone(), e1, e2, tolerances))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeTolerances {
    pub first: f64,
    pub second: f64,
    /// Errors at or below this level count as exact.
    pub noise_floor: f64,
}

impl Default for SlopeTolerances {
    fn default() -> Self {
        SlopeTolerances {
            first: 0.25,
            second: 0.3,
            noise_floor: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub eps: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub slope1: Option<f64>,
    pub slope2: Option<f64>,
    pub monotone1: bool,
    pub monotone2: bool,
    pub exact1: bool,
    pub exact2: bool,
    pub pass1: bool,
    pub pass2: bool,
    pub tolerances: SlopeTolerances,
}

impl ConvergenceReport {
    fn new(eps: Vec<f64>, e1: Vec<f64>, e2: Vec<f64>, tol: SlopeTolerances) -> Self {
        let exact = |e: &[f64]| e.iter().all(|x| *x <= tol.noise_floor);
        let slope = |e: &[f64]| fit::power_law(&eps, e).ok().map(|f| f.exponent);
        let monotone = |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]);
        let (exact1, exact2) = (exact(&e1), exact(&e2));
        let (slope1, slope2) = (slope(&e1), slope(&e2));
        let ok = |s: Option<f64>, t: f64| s.is_some_and(|s| (s - 1.0).abs() <= t);
        ConvergenceReport {
            monotone1: monotone(&e1),
            monotone2: monotone(&e2),
            pass1: exact1 || ok(slope1, tol.first),
            pass2: exact2 || ok(slope2, tol.second),
            exact1,
            exact2,
            slope1,
            slope2,
            eps,
            e1,
            e2,
            tolerances: tol,
        }
    }
}
