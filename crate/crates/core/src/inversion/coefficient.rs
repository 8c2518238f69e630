//! Recovery of a second-order reaction coefficient next to an estimated
//! interface from the order-2 cascade fields.

use serde::{Deserialize, Serialize};

use super::reconstruct::{ForwardSetup, SimulationMode};
use crate::cascade::{BoundaryKind, Cascade, CascadeMode, DataFamily, DEFAULT_LADDER};
use crate::error::{Error, Result};
use crate::forward::ops::FvOperators;
use crate::geometry::{vec2, Inclusion};
use crate::reaction::{MultiIndex, Var};

/// Smallest admissible product of first-order factors.
pub const DIVISION_GUARD: f64 = 1e-6;

/// Offset of the sample node from the interface, in units of `h_max`.
pub const OUTSIDE_OFFSET: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSample {
    /// Point on the estimated interface.
    pub interface_point: [f64; 2],
    pub node: usize,
    pub node_point: [f64; 2],
    pub value: f64,
    /// Product of the first-order fields at the node.
    pub factor: f64,
}

/// Largest deviation of the samples from `truth`.
pub fn max_sample_error(samples: &[CoefficientSample], truth: f64) -> f64 {
    samples.iter().map(|s| (s.value - truth).abs()).fold(0.0, f64::max)
}

fn guarded_ratio(residual: f64, factor: f64, p: [f64; 2]) -> Result<f64> {
    if !(factor.abs() >= DIVISION_GUARD) {
        return Err(Error::DivisionGuard { value: factor, point: p });
    }
    Ok(residual / factor)
}

/// Samples `C_{component, α}` one step outside `∂ω̂` at `count` interface
/// points.
///
/// The setup's reaction generates the cascade. First-order data is `1` on
/// every variable in `α` and `0` elsewhere. The residual
/// `∂_t u'' − d Δu''` uses centred differences around the second-to-last
/// step and the solver's own Laplacian, and is divided by `(2/α!) Π u'`.
pub fn recover_boundary_coefficient(
    setup: &ForwardSetup,
    estimate: &Inclusion,
    component: usize,
    mi: &MultiIndex,
    count: usize,
) -> Result<Vec<CoefficientSample>> {
    let SimulationMode::Parabolic { dt, .. } = setup.mode else {
        return Err(Error::InvalidParams("coefficient recovery needs the time-dependent model".into()));
    };
    let nc = setup.params.n_chem();
    let np = setup.params.n_prey();
    if component >= nc {
        return Err(Error::InvalidParams(format!("component {component} out of range")));
    }
    if mi.order() != 2 {
        return Err(Error::InvalidReaction(format!("multi-index {mi} is not second order")));
    }
    for v in mi.vars() {
        let ok = match *v {
            Var::U(i) => i < nc,
            Var::V(j) => j < np,
        };
        if !ok {
            return Err(Error::InvalidReaction(format!("multi-index {mi} names a missing variable")));
        }
    }
    if count == 0 {
        return Err(Error::InvalidParams("need at least one sample".into()));
    }
    estimate.validate()?;
    let grid = &setup.grid;
    let n = grid.len();
    let active = |v: Var| mi.vars().contains(&v);
    let family = DataFamily {
        base: setup.reaction.base().to_vec(),
        f1: (0..nc)
            .map(|i| vec![if active(Var::U(i)) { 1.0 } else { 0.0 }; n])
            .collect(),
        f2: vec![vec![0.0; n]; nc],
        g1: (0..np)
            .map(|j| vec![if active(Var::V(j)) { 1.0 } else { 0.0 }; n])
            .collect(),
        g2: vec![vec![0.0; n]; np],
        eps: DEFAULT_LADDER.to_vec(),
    };
    let mut cascade = Cascade::new(
        grid,
        &setup.params,
        &setup.reaction,
        BoundaryKind::Neumann,
        CascadeMode::Parabolic { dt },
    )?;
    let steps = cascade.steps();
    if steps < 2 {
        return Err(Error::InvalidParams("coefficient recovery needs at least two time steps".into()));
    }
    let dt = cascade.dt();
    let sol = cascade.solve(&family, 2)?;
    let (first, second) = (&sol.orders[0], &sol.orders[1]);
    let at = steps - 1;
    let ops = FvOperators::new(grid);
    let d = setup.params.d[component];
    let scale = 2.0 / mi.factorial();
    let h = grid.h_max();
    estimate
        .boundary_points(count)
        .into_iter()
        .map(|p| {
            let (_, normal) = estimate.signed_distance(p);
            let node = grid.nearest_node(vec2::add(p, vec2::scale(normal, OUTSIDE_OFFSET * h)));
            let u2 = &second.u;
            let dudt = (u2[at + 1][component][node] - u2[at - 1][component][node]) / (2.0 * dt);
            let residual = dudt - d * ops.laplacian_at(&u2[at][component], node);
            let factor: f64 = mi
                .vars()
                .iter()
                .map(|v| match *v {
                    Var::U(i) => first.u[at][i][node],
                    Var::V(j) => first.v[at][j][node],
                })
                .product();
            Ok(CoefficientSample {
                interface_point: p,
                node,
                node_point: grid.point(node),
                value: guarded_ratio(residual, scale * factor, p)?,
                factor,
            })
        })
        .collect()
}
