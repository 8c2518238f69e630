use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::Rect;
use super::inclusion::{polygon_is_convex, Inclusion};
use super::vec2::{self, n as vn};
use crate::error::{Error, Result};

/// Truncated polyhedral corner `K_h = K ∩ B_h(x_c)` in two or three
/// dimensions.
///
/// Edges are unit vectors. In 3-D they are stored sorted by azimuth around the
/// axis, so consecutive pairs span the faces of the cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedCorner {
    pub apex: Vec<f64>,
    pub edges: Vec<Vec<f64>>,
    pub radius: f64,
    pub axis: Vec<f64>,
    pub half_angle: f64,
}

/// CGO probe direction `ξ`, a unit vector `ξ⊥ ⟂ ξ`, and the cone constant `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeDirection {
    pub xi: Vec<f64>,
    pub xi_perp: Vec<f64>,
    pub rho: f64,
}

impl TruncatedCorner {
    /// Builds a corner from its apex and edge directions. The axis is the
    /// normalised sum of the unit edges and the half-angle the widest edge
    /// deviation from it.
    pub fn from_edges(apex: Vec<f64>, edges: Vec<Vec<f64>>, radius: f64) -> Result<Self> {
        let dim = apex.len();
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidCorner(format!("dimension {dim} not supported")));
        }
        if edges.len() < dim {
            return Err(Error::InvalidCorner(format!(
                "need at least {dim} edges, got {}",
                edges.len()
            )));
        }
        if dim == 2 && edges.len() != 2 {
            return Err(Error::InvalidCorner("a planar corner has exactly two edges".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidCorner(format!("radius must be positive, got {radius}")));
        }
        let mut unit = Vec::with_capacity(edges.len());
        for e in &edges {
            if e.len() != dim || !(vn::norm(e) > 0.0) {
                return Err(Error::InvalidCorner("degenerate edge vector".into()));
            }
            unit.push(vn::normalize(e));
        }
        for a in 0..unit.len() {
            for b in a + 1..unit.len() {
                if 1.0 - vn::dot(&unit[a], &unit[b]).abs() < 1e-12 {
                    return Err(Error::InvalidCorner(format!(
                        "edges {a} and {b} are linearly dependent"
                    )));
                }
            }
        }
        let mut sum = vec![0.0; dim];
        for e in &unit {
            for (s, x) in sum.iter_mut().zip(e) {
                *s += x;
            }
        }
        if vn::norm(&sum) < 1e-12 {
            return Err(Error::InvalidCorner("edges do not span a convex cone".into()));
        }
        let axis = vn::normalize(&sum);
        let half_angle = unit
            .iter()
            .map(|e| vn::dot(e, &axis).clamp(-1.0, 1.0).acos())
            .fold(0.0, f64::max);
        if half_angle >= 0.5 * PI {
            return Err(Error::InvalidCorner(format!(
                "opening half-angle {half_angle} is not below π/2"
            )));
        }
        if dim == 3 {
            sort_by_azimuth(&mut unit, &axis);
            let m = unit.len();
            for k in 0..m {
                let d = vn::det3(&unit[k], &unit[(k + 1) % m], &unit[(k + 2) % m]);
                if d <= 0.0 {
                    return Err(Error::InvalidCorner(
                        "edge set is not strictly convex around its axis".into(),
                    ));
                }
            }
        }
        Ok(TruncatedCorner {
            apex,
            edges: unit,
            radius,
            axis,
            half_angle,
        })
    }

    pub fn dim(&self) -> usize {
        self.apex.len()
    }

    /// Planar symmetric sector with the given axis angle and half-angle.
    pub fn sector(apex: [f64; 2], axis_angle: f64, half_angle: f64, radius: f64) -> Result<Self> {
        let e1 = vec![(axis_angle - half_angle).cos(), (axis_angle - half_angle).sin()];
        let e2 = vec![(axis_angle + half_angle).cos(), (axis_angle + half_angle).sin()];
        TruncatedCorner::from_edges(apex.to_vec(), vec![e1, e2], radius)
    }

    /// Rejects corners whose ball `B_h(x_c)` leaves the rectangle.
    pub fn check_within(&self, rect: &Rect) -> Result<()> {
        if self.dim() != 2 {
            return Ok(());
        }
        let d = rect.inner_distance([self.apex[0], self.apex[1]]);
        if d < self.radius {
            return Err(Error::InvalidCorner(format!(
                "ball of radius {} around the apex leaves the domain (clearance {d})",
                self.radius
            )));
        }
        Ok(())
    }

    /// Whether `x` lies in `K_h` (closed cone, open ball).
    pub fn contains(&self, x: &[f64]) -> bool {
        let d = vn::sub(x, &self.apex);
        let r = vn::norm(&d);
        if r == 0.0 {
            return true;
        }
        if r >= self.radius {
            return false;
        }
        match self.dim() {
            2 => {
                let (a, b) = (&self.edges[0], &self.edges[1]);
                let c1 = vec2::cross([a[0], a[1]], [d[0], d[1]]);
                let c2 = vec2::cross([d[0], d[1]], [b[0], b[1]]);
                let s = vec2::cross([a[0], a[1]], [b[0], b[1]]).signum();
                c1 * s >= 0.0 && c2 * s >= 0.0
            }
            _ => {
                let m = self.edges.len();
                (0..m).all(|k| vn::det3(&self.edges[k], &self.edges[(k + 1) % m], &d) >= 0.0)
            }
        }
    }

    /// `count` pseudo-random points of `K_h ∖ {x_c}`, reproducible from `seed`.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = self.dim();
        (0..count)
            .map(|_| {
                let mut dir = vec![0.0; dim];
                for e in &self.edges {
                    let w: f64 = rng.random::<f64>();
                    for (d, x) in dir.iter_mut().zip(e) {
                        *d += w * x;
                    }
                }
                let dir = vn::normalize(&dir);
                let r = self.radius * (1.0 - rng.random::<f64>());
                vn::axpy(r, &dir, &self.apex)
                    .into_iter()
                    .collect::<Vec<f64>>()
            })
            .collect()
    }
}

fn sort_by_azimuth(edges: &mut [Vec<f64>], axis: &[f64]) {
    let helper = if axis[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let along = vn::dot(&helper, axis);
    let b1 = vn::normalize(&vn::axpy(-along, axis, &helper));
    let b2 = vn::cross3(axis, &b1);
    edges.sort_by(|p, q| {
        let ap = vn::dot(p, &b2).atan2(vn::dot(p, &b1));
        let aq = vn::dot(q, &b2).atan2(vn::dot(q, &b1));
        ap.total_cmp(&aq)
    });
}

/// Corner of a convex polygon at `vertex_index`, truncated at radius `h`.
pub fn corner_from_polygon(inc: &Inclusion, vertex_index: usize, h: f64) -> Result<TruncatedCorner> {
    let Inclusion::Polygon { vertices } = inc else {
        return Err(Error::InvalidCorner("corner extraction needs a polygon".into()));
    };
    inc.validate()?;
    let n = vertices.len();
    if vertex_index >= n {
        return Err(Error::InvalidCorner(format!(
            "vertex index {vertex_index} out of range for {n} vertices"
        )));
    }
    let prev = vertices[(vertex_index + n - 1) % n];
    let v = vertices[vertex_index];
    let next = vertices[(vertex_index + 1) % n];
    if vec2::orient(prev, v, next) <= 0.0 {
        return Err(Error::InvalidCorner(format!(
            "interior angle at vertex {vertex_index} is not below π"
        )));
    }
    if !polygon_is_convex(vertices) {
        return Err(Error::InvalidCorner("polygon is not convex".into()));
    }
    let to_next = vec2::sub(next, v);
    let to_prev = vec2::sub(prev, v);
    let shortest = vec2::norm(to_next).min(vec2::norm(to_prev));
    if h > 0.5 * shortest * (1.0 + 1e-12) {
        return Err(Error::InvalidCorner(format!(
            "truncation radius {h} exceeds half the shorter adjacent edge {}",
            0.5 * shortest
        )));
    }
    TruncatedCorner::from_edges(v.to_vec(), vec![to_next.to_vec(), to_prev.to_vec()], h)
}

/// `ξ = -v_c`, `ξ⊥` its counterclockwise rotation in 2-D (any deterministic
/// orthogonal unit vector in 3-D), and `ρ = cos θ_c`.
pub fn probe_direction(c: &TruncatedCorner) -> Result<ProbeDirection> {
    if !(c.half_angle < 0.5 * PI) {
        return Err(Error::InvalidCorner(format!(
            "half-angle {} is not below π/2",
            c.half_angle
        )));
    }
    let xi: Vec<f64> = c.axis.iter().map(|x| -x).collect();
    let xi_perp = match c.dim() {
        2 => vec2::perp([xi[0], xi[1]]).to_vec(),
        _ => {
            let k = (0..3)
                .min_by(|&a, &b| xi[a].abs().total_cmp(&xi[b].abs()))
                .unwrap_or(0);
            let mut e = vec![0.0; 3];
            e[k] = 1.0;
            let along = vn::dot(&e, &xi);
            vn::normalize(&vn::axpy(-along, &xi, &e))
        }
    };
    Ok(ProbeDirection {
        xi,
        xi_perp,
        rho: c.half_angle.cos(),
    })
}
