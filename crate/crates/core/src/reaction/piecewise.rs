use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::multi_index::MultiIndex;
use super::taylor::{CoefficientField, TaylorReaction};
use crate::error::{Error, Result};
use crate::geometry::{rasterize_inclusion, Grid, Inclusion};

static ZERO_FIELD: LazyLock<CoefficientField> = LazyLock::new(|| CoefficientField::constant(0.0));

/// Step for the central-difference first-derivative check.
const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-9;
const JUMP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Interior,
    Exterior,
}

/// Analytic regularity exponents. They have no discrete counterpart and are
/// carried through to the report untouched.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Regularity {
    pub gamma: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub alpha: Option<f64>,
}

/// `G = G⁰ + (G¹ − G⁰)χ_ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseReaction {
    pub interior: TaylorReaction,
    pub exterior: TaylorReaction,
    pub inclusion: Inclusion,
    pub regularity: Regularity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientJump {
    pub component: usize,
    pub multi_index: String,
    pub max_jump: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub vanishes_at_base: bool,
    pub first_derivatives_vanish: bool,
    pub symmetric: bool,
    pub orders_in_range: bool,
    pub has_jump: bool,
    pub admissible: bool,
    pub truncation_order: usize,
    pub sample_points: usize,
    pub jumps: Vec<CoefficientJump>,
    pub regularity: Regularity,
}

impl PiecewiseReaction {
    pub fn new(interior: TaylorReaction, exterior: TaylorReaction, inclusion: Inclusion) -> Result<Self> {
        if interior.base() != exterior.base()
            || interior.n_prey() != exterior.n_prey()
            || interior.order() != exterior.order()
        {
            return Err(Error::InvalidReaction(
                "interior and exterior branches must share base state, prey count and order".into(),
            ));
        }
        inclusion.validate()?;
        Ok(PiecewiseReaction {
            interior,
            exterior,
            inclusion,
            regularity: Regularity::default(),
        })
    }

    /// Both branches identically zero.
    pub fn zero(base: Vec<f64>, n_prey: usize, order: usize, inclusion: Inclusion) -> Result<Self> {
        let t = TaylorReaction::new(base, n_prey, order)?;
        PiecewiseReaction::new(t.clone(), t, inclusion)
    }

    pub fn n_chem(&self) -> usize {
        self.interior.n_chem()
    }

    pub fn n_prey(&self) -> usize {
        self.interior.n_prey()
    }

    pub fn order(&self) -> usize {
        self.interior.order()
    }

    pub fn base(&self) -> &[f64] {
        self.interior.base()
    }

    pub fn branch(&self, side: Side) -> &TaylorReaction {
        match side {
            Side::Interior => &self.interior,
            Side::Exterior => &self.exterior,
        }
    }

    pub fn branch_mut(&mut self, side: Side) -> &mut TaylorReaction {
        match side {
            Side::Interior => &mut self.interior,
            Side::Exterior => &mut self.exterior,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.interior.terms().next().is_none() && self.exterior.terms().next().is_none()
    }

    /// Branch-selected evaluation of `G(x,t,u,v)`.
    pub fn eval_reaction(&self, x: [f64; 2], t: f64, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n_chem() || v.len() != self.n_prey() {
            return Err(Error::InvalidReaction(format!(
                "state has {} chemicals and {} prey, reaction expects {} and {}",
                u.len(),
                v.len(),
                self.n_chem(),
                self.n_prey()
            )));
        }
        if !t.is_finite() || !x.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidReaction("non-finite evaluation point".into()));
        }
        let side = if self.inclusion.contains(x) {
            Side::Interior
        } else {
            Side::Exterior
        };
        Ok(self.branch(side).eval(x, t, u, v))
    }

    /// Stored coefficient for `(component, α)` on one side. Absent entries
    /// are the zero field.
    pub fn taylor_coefficient(
        &self,
        component: usize,
        mi: &MultiIndex,
        side: Side,
    ) -> Result<&CoefficientField> {
        if mi.order() < 2 || mi.order() > self.order() {
            return Err(Error::InvalidReaction(format!(
                "coefficient {mi} has order {}; only orders 2..={} exist",
                mi.order(),
                self.order()
            )));
        }
        if component >= self.n_chem() {
            return Err(Error::InvalidReaction(format!(
                "component {} out of range",
                component + 1
            )));
        }
        Ok(self
            .branch(side)
            .coefficient(component, mi)
            .unwrap_or(&ZERO_FIELD))
    }

    fn sample_times(&self) -> Vec<f64> {
        let mut ts = vec![0.0];
        for side in [Side::Interior, Side::Exterior] {
            for (_, _, f) in self.branch(side).terms() {
                ts.extend(f.time.knots().iter().map(|k| k.0));
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// Checks the admissibility conditions on sample points of `grid`:
    /// interface points of the rasterized inclusion plus a sparse node lattice.
    pub fn check_admissibility(&self, grid: &Grid) -> AdmissibilityReport {
        let interface: Vec<[f64; 2]> = match rasterize_inclusion(&self.inclusion, grid) {
            Ok(ind) => ind.boundary_cells.iter().map(|c| c.interface_point).collect(),
            Err(_) => self.inclusion.boundary_points(64),
        };
        let stride = (grid.nx / 8).max(1);
        let mut points = interface.clone();
        for j in (0..grid.ny).step_by(stride) {
            for i in (0..grid.nx).step_by(stride) {
                points.push(grid.point(grid.idx(i, j)));
            }
        }
        let times = self.sample_times();
        let n = self.n_chem();
        let nv = n + self.n_prey();
        let base_u = self.base().to_vec();
        let base_v = vec![0.0; self.n_prey()];

        let mut vanishes = true;
        let mut first = true;
        let mut symmetric = true;
        // Fixed probe state for the symmetry comparison.
        let probe: Vec<f64> = (0..nv).map(|k| 0.37 + 0.11 * k as f64).collect();
        for &x in &points {
            for &t in &times {
                let side = if self.inclusion.contains(x) {
                    Side::Interior
                } else {
                    Side::Exterior
                };
                let br = self.branch(side);
                if br.eval(x, t, &base_u, &base_v).iter().any(|g| *g != 0.0) {
                    vanishes = false;
                }
                let mut z = vec![0.0; nv];
                for k in 0..nv {
                    z[k] = FD_STEP;
                    let gp = br.eval_deviation(x, t, &z);
                    z[k] = -FD_STEP;
                    let gm = br.eval_deviation(x, t, &z);
                    z[k] = 0.0;
                    if gp.iter().zip(&gm).any(|(a, b)| ((a - b) / (2.0 * FD_STEP)).abs() > FD_TOL) {
                        first = false;
                    }
                }
                let a = br.eval_deviation(x, t, &probe);
                let b = br.eval_ordered(x, t, &probe);
                if a.iter().zip(&b).any(|(p, q)| (p - q).abs() > 1e-12 * (1.0 + p.abs())) {
                    symmetric = false;
                }
            }
        }
        let low_order = [Side::Interior, Side::Exterior]
            .iter()
            .any(|s| self.branch(*s).terms().any(|(_, m, _)| m.order() < 2));
        if low_order {
            first = false;
        }
        let orders_in_range = [Side::Interior, Side::Exterior].iter().all(|s| {
            self.branch(*s)
                .terms()
                .all(|(_, m, _)| m.order() >= 2 && m.order() <= self.order())
        });

        let mut keys: Vec<(usize, MultiIndex)> = Vec::new();
        for side in [Side::Interior, Side::Exterior] {
            for (c, m, _) in self.branch(side).terms() {
                keys.push((c, m.clone()));
            }
        }
        keys.sort();
        keys.dedup();
        let jumps: Vec<CoefficientJump> = keys
            .into_iter()
            .map(|(c, m)| {
                let ci = self.interior.coefficient(c, &m).unwrap_or(&ZERO_FIELD);
                let ce = self.exterior.coefficient(c, &m).unwrap_or(&ZERO_FIELD);
                let mut max_jump: f64 = 0.0;
                for &q in &interface {
                    for &t in &times {
                        max_jump = max_jump.max((ci.eval(q, t) - ce.eval(q, t)).abs());
                    }
                }
                CoefficientJump {
                    component: c + 1,
                    multi_index: m.to_string(),
                    max_jump,
                }
            })
            .collect();
        let has_jump = jumps.iter().any(|j| j.max_jump > JUMP_TOL);
        AdmissibilityReport {
            vanishes_at_base: vanishes,
            first_derivatives_vanish: first,
            symmetric,
            orders_in_range,
            has_jump,
            admissible: vanishes && first && symmetric && orders_in_range && has_jump,
            truncation_order: self.order(),
            sample_points: points.len(),
            jumps,
            regularity: self.regularity.clone(),
        }
    }

    /// `|c¹ − c⁰|` at the interface point nearest to `point`, at time `t`.
    pub fn jump_magnitude(
        &self,
        point: [f64; 2],
        component: usize,
        mi: &MultiIndex,
        t: f64,
        grid: &Grid,
    ) -> Result<f64> {
        let (sd, _) = self.inclusion.signed_distance(point);
        let limit = grid.h_max();
        if self.inclusion.is_empty() || sd.abs() > limit {
            return Err(Error::FarFromInterface {
                point,
                distance: sd.abs(),
                limit,
            });
        }
        let q = self.inclusion.project(point);
        let ci = self.taylor_coefficient(component, mi, Side::Interior)?;
        let ce = self.taylor_coefficient(component, mi, Side::Exterior)?;
        Ok((ci.eval(q, t) - ce.eval(q, t)).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::reaction::TimeProfile;

    fn mi(s: &str) -> MultiIndex {
        s.parse().unwrap()
    }

    fn benchmark(interior: f64, exterior: f64) -> PiecewiseReaction {
        let mut g1 = TaylorReaction::new(vec![0.0], 0, 3).unwrap();
        let mut g0 = g1.clone();
        g1.set(0, mi("u1u1"), CoefficientField::constant(interior)).unwrap();
        g0.set(0, mi("u1u1"), CoefficientField::constant(exterior)).unwrap();
        PiecewiseReaction::new(g1, g0, Inclusion::circle([0.5, 0.5], 0.2)).unwrap()
    }

    #[test]
    fn branch_selection() {
        let r = benchmark(1.0, 0.5);
        assert_eq!(r.eval_reaction([0.5, 0.5], 0.0, &[2.0], &[]).unwrap(), vec![2.0]);
        assert_eq!(r.eval_reaction([0.1, 0.1], 0.0, &[2.0], &[]).unwrap(), vec![1.0]);
        assert_eq!(r.eval_reaction([0.1, 0.1], 0.0, &[0.0], &[]).unwrap(), vec![0.0]);
        assert!(r.eval_reaction([0.1, 0.1], 0.0, &[0.0, 1.0], &[]).is_err());
    }

    #[test]
    fn symmetric_lookup_shares_storage() {
        let mut g = TaylorReaction::new(vec![0.0, 0.0], 0, 3).unwrap();
        g.set(0, mi("u2u1"), CoefficientField::constant(3.0)).unwrap();
        let r = PiecewiseReaction::new(g.clone(), g, Inclusion::circle([0.5, 0.5], 0.2)).unwrap();
        let a = r.taylor_coefficient(0, &mi("u1u2"), Side::Interior).unwrap();
        let b = r.taylor_coefficient(0, &mi("u2u1"), Side::Interior).unwrap();
        assert!(std::ptr::eq(a, b));
        assert!(r.taylor_coefficient(0, &mi("u1"), Side::Interior).is_err());
        let z = r.taylor_coefficient(1, &mi("u1u1"), Side::Exterior).unwrap();
        assert_eq!(z.as_constant(), Some(0.0));
    }

    #[test]
    fn admissibility_flags() {
        let grid = Grid::unit(32).unwrap();
        let rep = benchmark(1.0, 0.5).check_admissibility(&grid);
        assert!(rep.admissible, "{rep:?}");
        assert_eq!(rep.jumps.len(), 1);
        assert!((rep.jumps[0].max_jump - 0.5).abs() < 1e-15);

        let rep = benchmark(0.5, 0.5).check_admissibility(&grid);
        assert!(!rep.has_jump);
        assert!(!rep.admissible);

        let mut r = benchmark(1.0, 0.5);
        r.exterior.set_unchecked(0, mi("u1"), CoefficientField::constant(0.1));
        let rep = r.check_admissibility(&grid);
        assert!(!rep.first_derivatives_vanish);
        assert!(!rep.admissible);
        assert_eq!(rep, r.check_admissibility(&grid));
    }

    #[test]
    fn jump_at_interface() {
        let grid = Grid::unit(64).unwrap();
        let r = benchmark(1.0, 0.5);
        let j = r.jump_magnitude([0.7, 0.5], 0, &mi("u1u1"), 0.0, &grid).unwrap();
        assert_eq!(j, 0.5);
        assert!(r.jump_magnitude([0.1, 0.1], 0, &mi("u1u1"), 0.0, &grid).is_err());

        let mut g1 = TaylorReaction::new(vec![0.0], 0, 3).unwrap();
        let g0 = g1.clone();
        g1.set(
            0,
            mi("u1u1"),
            CoefficientField::new(Expr::parse("x1").unwrap(), TimeProfile::constant()),
        )
        .unwrap();
        let r = PiecewiseReaction::new(g1, g0, Inclusion::circle([0.5, 0.5], 0.2)).unwrap();
        let j = r.jump_magnitude([0.705, 0.5], 0, &mi("u1u1"), 0.0, &grid).unwrap();
        assert!((j - 0.7).abs() < grid.h_max());
    }
}
