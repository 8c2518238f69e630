use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grid::Rect;
use super::vec2;
use crate::error::{Error, Result};

/// Interior anomaly `ω`.
///
/// Star-shaped inclusions carry their radius as a real Fourier series
/// `r(θ) = a0 + Σ_k (a_k cos kθ + b_k sin kθ)`, stored flat as
/// `[a0, a1, b1, a2, b2, …]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Inclusion {
    Circle { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
    Star { center: [f64; 2], fourier: Vec<f64> },
}

impl Inclusion {
    pub fn circle(center: [f64; 2], radius: f64) -> Self {
        Inclusion::Circle { center, radius }
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Self {
        Inclusion::Polygon { vertices }
    }

    pub fn star(center: [f64; 2], fourier: Vec<f64>) -> Self {
        Inclusion::Star { center, fourier }
    }

    /// Structural checks independent of any grid.
    pub fn validate(&self) -> Result<()> {
        match self {
            Inclusion::Circle { center, radius } => {
                if !(radius.is_finite() && *radius >= 0.0) || !vec2::finite(*center) {
                    return Err(Error::InvalidInclusion(format!(
                        "circle radius must be finite and nonnegative, got {radius}"
                    )));
                }
            }
            Inclusion::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::InvalidInclusion(
                        "polygon needs at least three vertices".into(),
                    ));
                }
                if vertices.iter().any(|v| !vec2::finite(*v)) {
                    return Err(Error::InvalidInclusion("non-finite polygon vertex".into()));
                }
                if polygon_signed_area(vertices) <= 0.0 {
                    return Err(Error::InvalidInclusion(
                        "polygon must be counterclockwise with positive area".into(),
                    ));
                }
                if !polygon_is_simple(vertices) {
                    return Err(Error::InvalidInclusion("polygon is self-intersecting".into()));
                }
            }
            Inclusion::Star { center, fourier } => {
                if fourier.is_empty() || !vec2::finite(*center) {
                    return Err(Error::InvalidInclusion(
                        "star inclusion needs at least a mean radius".into(),
                    ));
                }
                let min_r = (0..720)
                    .map(|k| star_radius(fourier, 2.0 * PI * k as f64 / 720.0).0)
                    .fold(f64::INFINITY, f64::min);
                if !(min_r > 0.0) {
                    return Err(Error::InvalidInclusion(format!(
                        "star radius must stay positive, minimum {min_r}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `true` for inclusions that enclose no area (zero-radius circles).
    pub fn is_empty(&self) -> bool {
        matches!(self, Inclusion::Circle { radius, .. } if *radius == 0.0)
    }

    /// Exact (circle, polygon) or quadrature (star) area.
    pub fn area(&self) -> f64 {
        match self {
            Inclusion::Circle { radius, .. } => PI * radius * radius,
            Inclusion::Polygon { vertices } => polygon_signed_area(vertices),
            Inclusion::Star { fourier, .. } => {
                let n = 4096;
                let dt = 2.0 * PI / n as f64;
                (0..n)
                    .map(|k| {
                        let r = star_radius(fourier, k as f64 * dt).0;
                        0.5 * r * r * dt
                    })
                    .sum()
            }
        }
    }

    /// Signed distance (negative inside) together with the outward unit
    /// normal of the nearest interface point.
    ///
    /// Exact for circles and polygons. For star shapes the level function
    /// `|x - c| - r(θ)` is normalised by its gradient, which is exact on the
    /// interface and first-order accurate away from it.
    pub fn signed_distance(&self, p: [f64; 2]) -> (f64, [f64; 2]) {
        match self {
            Inclusion::Circle { center, radius } => {
                let d = vec2::sub(p, *center);
                let r = vec2::norm(d);
                if r == 0.0 {
                    (-radius, [1.0, 0.0])
                } else {
                    (r - radius, vec2::scale(d, 1.0 / r))
                }
            }
            Inclusion::Polygon { vertices } => polygon_signed_distance(vertices, p),
            Inclusion::Star { center, fourier } => {
                let d = vec2::sub(p, *center);
                let rho = vec2::norm(d);
                if rho < 1e-14 {
                    return (-star_radius(fourier, 0.0).0, [1.0, 0.0]);
                }
                let theta = d[1].atan2(d[0]);
                let (r, dr) = star_radius(fourier, theta);
                let radial = vec2::scale(d, 1.0 / rho);
                let angular = [-radial[1], radial[0]];
                let grad = vec2::sub(radial, vec2::scale(angular, dr / rho));
                let g = vec2::norm(grad);
                ((rho - r) / g, vec2::scale(grad, 1.0 / g))
            }
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        !self.is_empty() && self.signed_distance(p).0 < 0.0
    }

    /// Closest interface point (exact for circles and polygons).
    pub fn project(&self, p: [f64; 2]) -> [f64; 2] {
        let (d, n) = self.signed_distance(p);
        vec2::sub(p, vec2::scale(n, d))
    }

    /// `count` points on `∂ω`, ordered by parameter.
    pub fn boundary_points(&self, count: usize) -> Vec<[f64; 2]> {
        match self {
            Inclusion::Circle { center, radius } => (0..count)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / count as f64;
                    [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                })
                .collect(),
            Inclusion::Star { center, fourier } => (0..count)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / count as f64;
                    let r = star_radius(fourier, t).0;
                    [center[0] + r * t.cos(), center[1] + r * t.sin()]
                })
                .collect(),
            Inclusion::Polygon { vertices } => {
                let n = vertices.len();
                let lengths: Vec<f64> = (0..n)
                    .map(|k| vec2::norm(vec2::sub(vertices[(k + 1) % n], vertices[k])))
                    .collect();
                let total: f64 = lengths.iter().sum();
                (0..count)
                    .map(|k| {
                        let mut s = total * k as f64 / count as f64;
                        let mut e = 0;
                        while e + 1 < n && s > lengths[e] {
                            s -= lengths[e];
                            e += 1;
                        }
                        let t = (s / lengths[e]).min(1.0);
                        vec2::lerp(vertices[e], vertices[(e + 1) % n], t)
                    })
                    .collect()
            }
        }
    }

    /// Smallest distance from `∂ω` to the rectangle boundary (negative when
    /// the inclusion pokes out).
    pub fn clearance(&self, rect: &Rect) -> f64 {
        match self {
            Inclusion::Circle { center, radius } => rect.inner_distance(*center) - radius,
            Inclusion::Polygon { vertices } => vertices
                .iter()
                .map(|v| rect.inner_distance(*v))
                .fold(f64::INFINITY, f64::min),
            Inclusion::Star { .. } => self
                .boundary_points(1440)
                .into_iter()
                .map(|p| rect.inner_distance(p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Rejects inclusions whose closure comes closer than `margin` to `∂Ω`.
    pub fn check_inside(&self, rect: &Rect, margin: f64) -> Result<()> {
        self.validate()?;
        let c = self.clearance(rect);
        if c < margin {
            return Err(Error::InvalidInclusion(format!(
                "inclusion is {c:.4e} from the outer boundary, need at least {margin:.4e}"
            )));
        }
        Ok(())
    }

    /// Parameter vector used by the shape optimiser.
    pub fn parameters(&self) -> Vec<f64> {
        match self {
            Inclusion::Circle { center, radius } => vec![center[0], center[1], *radius],
            Inclusion::Polygon { vertices } => vertices.iter().flat_map(|v| [v[0], v[1]]).collect(),
            Inclusion::Star { center, fourier } => {
                let mut p = vec![center[0], center[1]];
                p.extend_from_slice(fourier);
                p
            }
        }
    }
}

/// Radius and its angular derivative.
fn star_radius(fourier: &[f64], theta: f64) -> (f64, f64) {
    let mut r = fourier[0];
    let mut dr = 0.0;
    for (k, pair) in fourier[1..].chunks(2).enumerate() {
        let m = (k + 1) as f64;
        let a = pair[0];
        let b = pair.get(1).copied().unwrap_or(0.0);
        let (s, c) = (m * theta).sin_cos();
        r += a * c + b * s;
        dr += m * (-a * s + b * c);
    }
    (r, dr)
}

pub(crate) fn polygon_signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|k| vec2::cross(v[k], v[(k + 1) % n]))
        .sum::<f64>()
}

fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let o1 = vec2::orient(a, b, c);
    let o2 = vec2::orient(a, b, d);
    let o3 = vec2::orient(c, d, a);
    let o4 = vec2::orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

pub(crate) fn polygon_is_simple(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    for a in 0..n {
        for b in a + 1..n {
            // adjacent edges share a vertex
            if b == a + 1 || (a == 0 && b == n - 1) {
                continue;
            }
            if segments_intersect(v[a], v[(a + 1) % n], v[b], v[(b + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// `true` when every vertex turns left (strictly convex, counterclockwise).
pub fn polygon_is_convex(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    (0..n).all(|k| vec2::orient(v[k], v[(k + 1) % n], v[(k + 2) % n]) > 0.0)
}

fn point_in_polygon(v: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Per-edge distance with vertex rounding; on exact ties the earlier edge wins.
fn polygon_signed_distance(v: &[[f64; 2]], p: [f64; 2]) -> (f64, [f64; 2]) {
    let n = v.len();
    let mut best = f64::INFINITY;
    let mut best_q = v[0];
    let mut best_edge = 0;
    for k in 0..n {
        let (a, b) = (v[k], v[(k + 1) % n]);
        let ab = vec2::sub(b, a);
        let t = (vec2::dot(vec2::sub(p, a), ab) / vec2::dot(ab, ab)).clamp(0.0, 1.0);
        let q = vec2::lerp(a, b, t);
        let d = vec2::norm(vec2::sub(p, q));
        if d < best {
            best = d;
            best_q = q;
            best_edge = k;
        }
    }
    let inside = point_in_polygon(v, p);
    let normal = if best > 0.0 {
        let u = vec2::scale(vec2::sub(p, best_q), 1.0 / best);
        if inside {
            vec2::scale(u, -1.0)
        } else {
            u
        }
    } else {
        let e = vec2::sub(v[(best_edge + 1) % n], v[best_edge]);
        vec2::normalize([e[1], -e[0]])
    };
    (if inside { -best } else { best }, normal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Inclusion {
        Inclusion::polygon(vec![[0.3, 0.3], [0.7, 0.3], [0.7, 0.7], [0.3, 0.7]])
    }

    #[test]
    fn circle_distance_and_normal() {
        let c = Inclusion::circle([0.5, 0.5], 0.2);
        let (d, n) = c.signed_distance([0.9, 0.5]);
        assert!((d - 0.2).abs() < 1e-15);
        assert_eq!(n, [1.0, 0.0]);
        assert!(c.contains([0.55, 0.45]));
        assert!(!c.contains([0.75, 0.5]));
    }

    #[test]
    fn polygon_distance_rounds_vertices() {
        let s = square();
        let (d, n) = s.signed_distance([0.8, 0.8]);
        assert!((d - (0.02f64).sqrt()).abs() < 1e-14);
        assert!((n[0] - n[1]).abs() < 1e-14 && n[0] > 0.0);
        let (d, n) = s.signed_distance([0.5, 0.35]);
        assert!((d + 0.05).abs() < 1e-14);
        assert!((n[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn polygon_orientation_and_simplicity() {
        assert!(square().validate().is_ok());
        let cw = Inclusion::polygon(vec![[0.3, 0.3], [0.3, 0.7], [0.7, 0.7], [0.7, 0.3]]);
        assert!(cw.validate().is_err());
        let bow = Inclusion::polygon(vec![[0.3, 0.3], [0.7, 0.7], [0.7, 0.3], [0.3, 0.7]]);
        assert!(bow.validate().is_err());
    }

    #[test]
    fn star_with_single_mode_is_a_circle() {
        let s = Inclusion::star([0.5, 0.5], vec![0.2]);
        let c = Inclusion::circle([0.5, 0.5], 0.2);
        for p in [[0.6, 0.51], [0.1, 0.2], [0.5, 0.75]] {
            assert!((s.signed_distance(p).0 - c.signed_distance(p).0).abs() < 1e-14);
        }
        assert!((s.area() - c.area()).abs() < 1e-12);
    }

    #[test]
    fn star_distance_vanishes_on_boundary() {
        let s = Inclusion::star([0.5, 0.5], vec![0.2, 0.03, -0.02, 0.0, 0.01]);
        s.validate().unwrap();
        for p in s.boundary_points(37) {
            assert!(s.signed_distance(p).0.abs() < 1e-12);
        }
    }

    #[test]
    fn clearance_detects_touching() {
        let r = Rect::UNIT;
        assert!(Inclusion::circle([0.5, 0.5], 0.2).check_inside(&r, 0.1).is_ok());
        assert!(Inclusion::circle([0.15, 0.5], 0.2).check_inside(&r, 0.0).is_err());
        assert!(square().check_inside(&r, 0.35).is_err());
    }

    #[test]
    fn polygon_boundary_points_lie_on_edges() {
        let s = square();
        for p in s.boundary_points(40) {
            assert!(s.signed_distance(p).0.abs() < 1e-14);
        }
    }
}
