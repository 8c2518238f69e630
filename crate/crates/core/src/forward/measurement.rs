use serde::{Deserialize, Serialize};

use super::params::State;
use crate::error::{Error, Result};
use crate::geometry::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementKind {
    /// Boundary traces over time plus the final snapshot.
    Cauchy,
    /// Normal derivatives on `∂Ω` of a stationary state.
    Neumann,
}

/// Boundary data. `traces[t][field][b]` is indexed by stored timestamp,
/// field (`u1..uN, v1..vM`) and boundary node in counterclockwise order
/// starting at the lower-left corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    pub kind: MeasurementKind,
    pub n_chem: usize,
    pub n_prey: usize,
    pub boundary_nodes: usize,
    pub times: Vec<f64>,
    pub traces: Vec<Vec<Vec<f64>>>,
    pub snapshot: Option<Vec<Vec<f64>>>,
}

impl MeasurementSet {
    pub fn trace_count(&self) -> usize {
        self.times.len() * self.boundary_nodes
    }

    /// Same kind, species counts, timestamps and array shapes.
    pub fn same_layout(&self, other: &MeasurementSet) -> bool {
        self.kind == other.kind
            && self.n_chem == other.n_chem
            && self.n_prey == other.n_prey
            && self.boundary_nodes == other.boundary_nodes
            && self.times == other.times
            && self.traces.len() == other.traces.len()
            && self
                .traces
                .iter()
                .zip(&other.traces)
                .all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(p, q)| p.len() == q.len()))
            && match (&self.snapshot, &other.snapshot) {
                (None, None) => true,
                (Some(a), Some(b)) => {
                    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| p.len() == q.len())
                }
                _ => false,
            }
    }

    /// All samples in a fixed order: traces, then the snapshot.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.traces
            .iter()
            .flatten()
            .flatten()
            .chain(self.snapshot.iter().flatten().flatten())
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.traces
            .iter_mut()
            .flatten()
            .flatten()
            .chain(self.snapshot.iter_mut().flatten().flatten())
    }

    pub fn validate(&self) -> Result<()> {
        let fields = self.n_chem + self.n_prey;
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::LayoutMismatch("timestamps not strictly increasing".into()));
        }
        if self.traces.len() != self.times.len()
            || self
                .traces
                .iter()
                .any(|t| t.len() != fields || t.iter().any(|f| f.len() != self.boundary_nodes))
        {
            return Err(Error::LayoutMismatch("trace array shape".into()));
        }
        Ok(())
    }
}

/// Cauchy data from stored states: their boundary traces and the last
/// state's full fields.
pub fn extract_measurements(grid: &Grid, trajectory: &[State]) -> Result<MeasurementSet> {
    let last = trajectory
        .last()
        .ok_or_else(|| Error::LayoutMismatch("empty trajectory".into()))?;
    let nodes = grid.boundary_nodes();
    let traces = trajectory
        .iter()
        .map(|s| {
            s.fields()
                .map(|f| nodes.iter().map(|b| f[b.index]).collect())
                .collect()
        })
        .collect();
    Ok(MeasurementSet {
        kind: MeasurementKind::Cauchy,
        n_chem: last.u.len(),
        n_prey: last.v.len(),
        boundary_nodes: nodes.len(),
        times: trajectory.iter().map(|s| s.t).collect(),
        traces,
        snapshot: Some(last.fields().cloned().collect()),
    })
}

/// Outward normal derivative at every boundary node by the one-sided
/// second-order stencil `(3u₀ − 4u₁ + u₂) / 2h` along the inward normal.
pub fn normal_derivative(grid: &Grid, f: &[f64]) -> Vec<f64> {
    grid.boundary_nodes()
        .iter()
        .map(|b| {
            let (di, dj) = (-b.normal[0] as isize, -b.normal[1] as isize);
            let h = if di != 0 { grid.hx() } else { grid.hy() };
            let at = |s: isize| {
                let i = (b.i as isize + s * di) as usize;
                let j = (b.j as isize + s * dj) as usize;
                f[grid.idx(i, j)]
            };
            (3.0 * at(0) - 4.0 * at(1) + at(2)) / (2.0 * h)
        })
        .collect()
}

pub fn neumann_measurements(grid: &Grid, s: &State) -> MeasurementSet {
    let traces = vec![s.fields().map(|f| normal_derivative(grid, f)).collect()];
    MeasurementSet {
        kind: MeasurementKind::Neumann,
        n_chem: s.u.len(),
        n_prey: s.v.len(),
        boundary_nodes: grid.boundary_len(),
        times: vec![0.0],
        traces,
        snapshot: None,
    }
}
