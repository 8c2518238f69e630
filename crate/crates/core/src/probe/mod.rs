//! Complex geometrical optics probes `w = e^{τ(ξ+iξ⊥)·(x−x_c)}` and their
//! behaviour on truncated corners.

mod integral;
mod laplace;
mod report;

pub use integral::{boundary_norm_estimates, corner_integral, corner_integral_of, BoundaryNorms};
pub use laplace::{laplace_tail_identity, LaplaceIdentity};
pub use report::{asymptotic_fit, run_probe, CornerProbeResult, ProbeTolerances};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::vec2::n as vn;
use crate::geometry::{probe_direction, Grid, ProbeDirection, TruncatedCorner};

/// Points sampled when checking the cone condition.
pub const CONE_SAMPLES: usize = 10_000;

/// Exponents above this are treated as overflowing.
const EXP_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub corner: TruncatedCorner,
    pub direction: ProbeDirection,
    pub taus: Vec<f64>,
}

impl ProbeSpec {
    pub fn new(corner: TruncatedCorner, direction: ProbeDirection, taus: Vec<f64>) -> Result<Self> {
        let s = ProbeSpec {
            corner,
            direction,
            taus,
        };
        s.validate()?;
        Ok(s)
    }

    /// Probe with `ξ = −v_c` and `ρ = cos θ_c`.
    pub fn along_axis(corner: TruncatedCorner, taus: Vec<f64>) -> Result<Self> {
        let direction = probe_direction(&corner)?;
        ProbeSpec::new(corner, direction, taus)
    }

    pub fn dim(&self) -> usize {
        self.corner.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidCorner(m));
        let d = &self.direction;
        let dim = self.dim();
        if d.xi.len() != dim || d.xi_perp.len() != dim {
            return bad("probe direction dimension differs from the corner".into());
        }
        if (vn::norm(&d.xi) - 1.0).abs() > 1e-12 || (vn::norm(&d.xi_perp) - 1.0).abs() > 1e-12 {
            return bad("ξ and ξ⊥ must be unit vectors".into());
        }
        if vn::dot(&d.xi, &d.xi_perp).abs() > 1e-12 {
            return bad("ξ and ξ⊥ must be orthogonal".into());
        }
        if !(d.rho > 0.0 && d.rho <= 1.0) {
            return bad(format!("ρ = {} outside (0, 1]", d.rho));
        }
        if self.taus.is_empty()
            || self.taus.iter().any(|t| !(*t > 0.0) || !t.is_finite())
            || self.taus.windows(2).any(|w| w[1] <= w[0])
        {
            return bad("τ ladder must be positive and strictly increasing".into());
        }
        for x in self.corner.sample_points(CONE_SAMPLES, 0x5eed) {
            let dx = vn::sub(&x, &self.corner.apex);
            let c = vn::dot(&d.xi, &dx) / vn::norm(&dx);
            if c < -1.0 - 1e-12 || c > -d.rho + 1e-12 {
                return bad(format!("cone condition fails: ξ·x̂ = {c}, ρ = {}", d.rho));
            }
        }
        Ok(())
    }

    /// `ζ = ξ + iξ⊥` dotted with `d`.
    pub(crate) fn zeta_dot(&self, d: &[f64]) -> Complex64 {
        Complex64::new(vn::dot(&self.direction.xi, d), vn::dot(&self.direction.xi_perp, d))
    }

    /// Whether every ladder point satisfies `τρh ≥ 8`.
    pub fn large_tau(&self) -> bool {
        self.taus
            .first()
            .is_some_and(|t| t * self.direction.rho * self.corner.radius >= 8.0)
    }
}

/// `w(x)` for a single point.
pub fn cgo_value(spec: &ProbeSpec, tau: f64, x: &[f64]) -> Complex64 {
    let d = vn::sub(x, &spec.corner.apex);
    (spec.zeta_dot(&d) * tau).exp()
}

/// Nodal values of `w` on a planar grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgoField {
    pub tau: f64,
    pub values: Vec<Complex64>,
    /// Set when evaluation was restricted to the part of `B_h(x_c)` where
    /// `w` is representable; other nodes hold zero.
    pub clamped: bool,
    pub active: Vec<bool>,
}

pub fn cgo_field(spec: &ProbeSpec, tau: f64, grid: &Grid) -> Result<CgoField> {
    if spec.dim() != 2 {
        return Err(Error::InvalidCorner("grid evaluation needs a planar probe".into()));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidCorner(format!("τ = {tau} must be positive")));
    }
    let xi = &spec.direction.xi;
    let apex = &spec.corner.apex;
    let growth = (0..grid.len())
        .map(|k| {
            let p = grid.point(k);
            tau * (xi[0] * (p[0] - apex[0]) + xi[1] * (p[1] - apex[1]))
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let clamped = growth > EXP_LIMIT;
    let mut values = Vec::with_capacity(grid.len());
    let mut active = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let p = grid.point(k);
        let d = [p[0] - apex[0], p[1] - apex[1]];
        let inside = !clamped
            || (vn::norm(&d) < spec.corner.radius && tau * (xi[0] * d[0] + xi[1] * d[1]) <= EXP_LIMIT);
        active.push(inside);
        values.push(if inside { cgo_value(spec, tau, &p) } else { Complex64::new(0.0, 0.0) });
    }
    Ok(CgoField {
        tau,
        values,
        clamped,
        active,
    })
}

impl CgoField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest 5-point Laplacian over interior nodes whose stencil is active.
    pub fn laplacian_residual(&self, grid: &Grid) -> f64 {
        let (hx, hy) = (grid.hx(), grid.hy());
        let mut worst = 0.0f64;
        for j in 1..grid.ny - 1 {
            for i in 1..grid.nx - 1 {
                let ks = [
                    grid.idx(i, j),
                    grid.idx(i - 1, j),
                    grid.idx(i + 1, j),
                    grid.idx(i, j - 1),
                    grid.idx(i, j + 1),
                ];
                if ks.iter().any(|k| !self.active[*k]) {
                    continue;
                }
                let w = |k: usize| self.values[ks[k]];
                let lap = (w(1) - w(0) * 2.0 + w(2)) / (hx * hx) + (w(3) - w(0) * 2.0 + w(4)) / (hy * hy);
                worst = worst.max(lap.norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_6;

    fn sector_spec(h: f64) -> ProbeSpec {
        let c = TruncatedCorner::sector([0.5, 0.5], 0.3, FRAC_PI_6, h).unwrap();
        ProbeSpec::along_axis(c, vec![20.0, 40.0, 80.0, 160.0]).unwrap()
    }

    #[test]
    fn apex_value_is_one() {
        let s = sector_spec(0.2);
        assert_eq!(cgo_value(&s, 37.0, &[0.5, 0.5]), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn modulus_on_axis() {
        let s = sector_spec(0.2);
        let r = 0.13;
        let x = [0.5 + r * 0.3f64.cos(), 0.5 + r * 0.3f64.sin()];
        let w = cgo_value(&s, 25.0, &x);
        assert!((w.norm() - (-25.0 * r).exp()).abs() < 1e-15);
    }

    #[test]
    fn wrong_direction_rejected() {
        let s = sector_spec(0.2);
        let mut d = s.direction.clone();
        d.xi = d.xi.iter().map(|x| -x).collect();
        d.xi_perp = d.xi_perp.iter().map(|x| -x).collect();
        assert!(ProbeSpec::new(s.corner.clone(), d, vec![1.0]).is_err());
        assert!(ProbeSpec::new(s.corner.clone(), s.direction.clone(), vec![2.0, 1.0]).is_err());
    }

    #[test]
    fn discrete_laplacian_residual() {
        let g = Grid::unit(257).unwrap();
        let s = sector_spec(0.2);
        let tau = 20.0;
        let f = cgo_field(&s, tau, &g).unwrap();
        assert!(!f.clamped);
        let res = f.laplacian_residual(&g) / (tau * tau);
        assert!(res <= 1e-2 * f.max_abs(), "{res} vs {}", f.max_abs());
        // Taylor bound h²τ⁴|ζ₁⁴+ζ₂⁴|/12 · max|w| with |ζ₁⁴+ζ₂⁴| = 2
        let h = g.hx();
        assert!(f.laplacian_residual(&g) <= 1.05 * h * h * tau.powi(4) / 6.0 * f.max_abs());
    }

    #[test]
    fn large_tau_clamps_to_ball() {
        let g = Grid::unit(33).unwrap();
        let s = sector_spec(0.2);
        let f = cgo_field(&s, 5000.0, &g).unwrap();
        assert!(f.clamped);
        assert!(f.values.iter().all(|v| v.is_finite()));
        assert!(f.active.iter().any(|a| !a));
    }
}
