//! Quadrature of `w` over `K_h` and its boundary in polar coordinates about
//! the apex. The radial factor is integrated adaptively, the angular part
//! with a fixed Gauss–Legendre rule (3-D spherical polygons are split into
//! triangles fanned from the first edge and mapped by a Duffy collapse).

use std::sync::LazyLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ProbeSpec;
use crate::error::{Error, Result};
use crate::geometry::vec2::n as vn;
use crate::quadrature::{adaptive, GaussLegendre};

/// Angular nodes.
pub const ANGULAR_NODES: usize = 32;
/// Relative tolerance of the radial refinement.
pub const RADIAL_TOL: f64 = 1e-12;

static ANGULAR: LazyLock<GaussLegendre> = LazyLock::new(|| GaussLegendre::new(ANGULAR_NODES));
static RADIAL: LazyLock<GaussLegendre> = LazyLock::new(|| GaussLegendre::new(16));

fn radial(mu: Complex64, power: f64, h: f64) -> Result<Complex64> {
    adaptive(&RADIAL, 0.0, h, RADIAL_TOL, f64::MIN_POSITIVE, &|r: f64| {
        (mu * r).exp() * r.powf(power)
    })
}

fn real_adaptive(a: f64, b: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    Ok(adaptive(&RADIAL, a, b, RADIAL_TOL, f64::MIN_POSITIVE, &|x: f64| Complex64::new(f(x), 0.0))?.re)
}

/// Start angle and opening of a planar corner.
fn planar_range(spec: &ProbeSpec) -> (f64, f64) {
    let (a, b) = (&spec.corner.edges[0], &spec.corner.edges[1]);
    let sweep = (a[0] * b[1] - a[1] * b[0]).atan2(vn::dot(a, b));
    let start = a[1].atan2(a[0]);
    (start + sweep.min(0.0), sweep.abs())
}

/// Fan triangles `(e₀, e_k, e_{k+1})` of a 3-D corner.
fn fan(spec: &ProbeSpec) -> Vec<[&[f64]; 3]> {
    let e = &spec.corner.edges;
    (1..e.len() - 1).map(|k| [&e[0][..], &e[k][..], &e[k + 1][..]]).collect()
}

/// Calls `f(p̂, weight)` on a Duffy-mapped tensor rule over the spherical
/// triangle; `weight` is the solid-angle element.
fn sphere_triangle(tri: [&[f64]; 3], mut f: impl FnMut(&[f64], f64) -> Result<()>) -> Result<()> {
    let [e0, e1, e2] = tri;
    let d01 = vn::sub(e1, e0);
    let d12 = vn::sub(e2, e1);
    let det = vn::det3(&d01, &d12, e0).abs();
    let g = &*ANGULAR;
    for (u, wu) in g.nodes.iter().zip(&g.weights) {
        let u = 0.5 * (u + 1.0);
        for (v, wv) in g.nodes.iter().zip(&g.weights) {
            let v = 0.5 * (v + 1.0);
            let p: Vec<f64> = (0..3).map(|c| e0[c] + u * d01[c] + u * v * d12[c]).collect();
            let norm = vn::norm(&p);
            let dir: Vec<f64> = p.iter().map(|x| x / norm).collect();
            f(&dir, 0.25 * wu * wv * u * det / norm.powi(3))?;
        }
    }
    Ok(())
}

/// `∫_{K_h} |x − x_c|^α w dx`.
pub fn corner_integral(spec: &ProbeSpec, tau: f64, alpha: f64) -> Result<Complex64> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidCorner(format!("weight exponent {alpha} must be nonnegative")));
    }
    integrate(spec, tau, |mu, power| radial(mu, power + alpha, spec.corner.radius))
}

/// `∫_{K_h} f(x) w dx` for a real weight `f`.
pub fn corner_integral_of(spec: &ProbeSpec, tau: f64, f: &dyn Fn(&[f64]) -> f64) -> Result<Complex64> {
    let apex = &spec.corner.apex;
    let h = spec.corner.radius;
    integrate_dir(spec, tau, |mu, power, dir| {
        adaptive(&RADIAL, 0.0, h, RADIAL_TOL, f64::MIN_POSITIVE, &|r: f64| {
            let x = vn::axpy(r, dir, apex);
            (mu * r).exp() * (r.powf(power) * f(&x))
        })
    })
}

fn integrate(
    spec: &ProbeSpec,
    tau: f64,
    radial_part: impl Fn(Complex64, f64) -> Result<Complex64>,
) -> Result<Complex64> {
    integrate_dir(spec, tau, |mu, power, _| radial_part(mu, power))
}

/// Sums `radial(τζ·x̂, n − 1, x̂)` over the angular rule.
fn integrate_dir(
    spec: &ProbeSpec,
    tau: f64,
    radial_part: impl Fn(Complex64, f64, &[f64]) -> Result<Complex64>,
) -> Result<Complex64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidCorner(format!("τ = {tau} must be positive")));
    }
    match spec.dim() {
        2 => {
            let (start, span) = planar_range(spec);
            let g = &*ANGULAR;
            let mut sum = Complex64::new(0.0, 0.0);
            for (x, w) in g.nodes.iter().zip(&g.weights) {
                let th = start + 0.5 * span * (x + 1.0);
                let dir = [th.cos(), th.sin()];
                sum += radial_part(spec.zeta_dot(&dir) * tau, 1.0, &dir)? * (0.5 * span * w);
            }
            Ok(sum)
        }
        _ => {
            let mut sum = Complex64::new(0.0, 0.0);
            for tri in fan(spec) {
                sphere_triangle(tri, |dir, w| {
                    sum += radial_part(spec.zeta_dot(dir) * tau, 2.0, dir)? * w;
                    Ok(())
                })?;
            }
            Ok(sum)
        }
    }
}

/// Norms of `w` on `∂K_h`. The full-boundary values include the flat faces;
/// the ratios against `e^{−ρhτ}` use the spherical cap `∂B_h ∩ K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryNorms {
    pub tau: f64,
    pub l2: f64,
    pub h1: f64,
    pub flux: f64,
    pub cap_l2: f64,
    pub cap_h1: f64,
    pub cap_flux: f64,
    /// `cap_h1 / ((2τ²+1)^{1/2} e^{−ρhτ})`.
    pub h1_ratio: f64,
    /// `cap_flux / (τ e^{−ρhτ})`.
    pub flux_ratio: f64,
}

/// Squared `L²` norms of `w` and `∂_ν w` over the flat faces.
fn faces(spec: &ProbeSpec, tau: f64) -> Result<(f64, f64)> {
    let h = spec.corner.radius;
    let xi = &spec.direction.xi;
    let (mut l2, mut flux) = (0.0, 0.0);
    if spec.dim() == 2 {
        let e = &spec.corner.edges;
        for (a, other) in [(&e[0], &e[1]), (&e[1], &e[0])] {
            let mut nu = vec![-a[1], a[0]];
            if vn::dot(&nu, other) > 0.0 {
                nu = vec![a[1], -a[0]];
            }
            let s = vn::dot(xi, a);
            let m = real_adaptive(0.0, h, |r| (2.0 * tau * r * s).exp())?;
            l2 += m;
            flux += tau * tau * spec.zeta_dot(&nu).norm_sqr() * m;
        }
        return Ok((l2, flux));
    }
    let e = &spec.corner.edges;
    let g = &*ANGULAR;
    for k in 0..e.len() {
        let (a, b) = (&e[k], &e[(k + 1) % e.len()]);
        let c = vn::cross3(a, b);
        let nu: Vec<f64> = vn::normalize(&c).iter().map(|x| -x).collect();
        let b2 = vn::normalize(&vn::axpy(-vn::dot(a, b), a, b));
        let open = vn::dot(a, b).clamp(-1.0, 1.0).acos();
        let zn = tau * tau * spec.zeta_dot(&nu).norm_sqr();
        for (x, w) in g.nodes.iter().zip(&g.weights) {
            let phi = 0.5 * open * (x + 1.0);
            let dir = vn::axpy(phi.sin(), &b2, &a.iter().map(|v| v * phi.cos()).collect::<Vec<_>>());
            let s = vn::dot(xi, &dir);
            let m = real_adaptive(0.0, spec.corner.radius, |r| r * (2.0 * tau * r * s).exp())?;
            l2 += 0.5 * open * w * m;
            flux += 0.5 * open * w * zn * m;
        }
    }
    Ok((l2, flux))
}

/// Squared `L²` norms of `w` and `∂_ν w` over the cap.
fn cap(spec: &ProbeSpec, tau: f64) -> Result<(f64, f64)> {
    let h = spec.corner.radius;
    let xi = &spec.direction.xi;
    if spec.dim() == 2 {
        let (start, span) = planar_range(spec);
        let dir = |th: f64| [th.cos(), th.sin()];
        let l2 = real_adaptive(start, start + span, |th| h * (2.0 * tau * h * vn::dot(xi, &dir(th))).exp())?;
        let flux = real_adaptive(start, start + span, |th| {
            let d = dir(th);
            h * tau * tau * spec.zeta_dot(&d).norm_sqr() * (2.0 * tau * h * vn::dot(xi, &d)).exp()
        })?;
        return Ok((l2, flux));
    }
    let (mut l2, mut flux) = (0.0, 0.0);
    for tri in fan(spec) {
        sphere_triangle(tri, |dir, w| {
            let m = h * h * w * (2.0 * tau * h * vn::dot(xi, dir)).exp();
            l2 += m;
            flux += tau * tau * spec.zeta_dot(dir).norm_sqr() * m;
            Ok(())
        })?;
    }
    Ok((l2, flux))
}

pub fn boundary_norm_estimates(spec: &ProbeSpec, tau: f64) -> Result<BoundaryNorms> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidCorner(format!("τ = {tau} must be positive")));
    }
    let (fl2, fflux) = faces(spec, tau)?;
    let (cl2, cflux) = cap(spec, tau)?;
    let grad = (2.0 * tau * tau + 1.0).sqrt();
    let bound = (-spec.direction.rho * spec.corner.radius * tau).exp();
    let cap_l2 = cl2.sqrt();
    let cap_flux = cflux.sqrt();
    let l2 = (fl2 + cl2).sqrt();
    Ok(BoundaryNorms {
        tau,
        l2,
        h1: grad * l2,
        flux: (fflux + cflux).sqrt(),
        cap_l2,
        cap_h1: grad * cap_l2,
        cap_flux,
        h1_ratio: cap_l2 / bound,
        flux_ratio: cap_flux / (tau * bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TruncatedCorner;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};

    fn sector(half: f64, h: f64) -> ProbeSpec {
        let c = TruncatedCorner::sector([0.0, 0.0], 1.1, half, h).unwrap();
        ProbeSpec::along_axis(c, vec![20.0, 40.0, 80.0, 160.0]).unwrap()
    }

    fn octant() -> ProbeSpec {
        let c = TruncatedCorner::from_edges(
            vec![0.0; 3],
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            1.0,
        )
        .unwrap();
        ProbeSpec::along_axis(c, vec![20.0, 40.0, 80.0, 160.0]).unwrap()
    }

    /// `∫∫ r e^{−μr}` on `[0,h]` in closed form, integrated over the sector
    /// angle with a high-order rule.
    fn sector_oracle(half: f64, h: f64, tau: f64) -> Complex64 {
        let g = GaussLegendre::new(64);
        g.integrate(-half, half, |phi| {
            let mu = Complex64::new(0.0, phi).exp() * tau;
            let tail = (-mu * h).exp() * (mu * h + 1.0) / (mu * mu);
            Complex64::new(1.0, 0.0) / (mu * mu) - tail
        })
    }

    #[test]
    fn sector_matches_closed_form() {
        let s = sector(FRAC_PI_6, 0.5);
        let i = corner_integral(&s, 40.0, 0.0).unwrap();
        let lead = (PI / 3.0).sin() / 1600.0;
        assert!((i.norm() - lead).abs() < 1e-3 * lead, "{i}");
        assert!((i.norm() - 5.413e-4).abs() < 1e-7);
        for tau in [20.0, 40.0, 80.0] {
            let i = corner_integral(&s, tau, 0.0).unwrap();
            let o = sector_oracle(FRAC_PI_6, 0.5, tau);
            assert!((i - o).norm() < 1e-10 * o.norm(), "{i} vs {o}");
        }
    }

    #[test]
    fn doubling_ratios() {
        let s = sector(FRAC_PI_6, 0.5);
        let a = corner_integral(&s, 40.0, 0.0).unwrap().norm();
        let b = corner_integral(&s, 80.0, 0.0).unwrap().norm();
        assert!((b / a - 0.25).abs() < 0.02 * 0.25);
        let a = corner_integral(&s, 40.0, 1.0).unwrap().norm();
        let b = corner_integral(&s, 80.0, 1.0).unwrap().norm();
        assert!((b / a - 0.125).abs() < 0.03 * 0.125);
    }

    #[test]
    fn octant_leading_term() {
        // Γ(3)/τ³ ∫ (−ζ·x̂)^{-3} dσ, the solid-angle integral done on the same
        // Duffy rule but with an independent integrand
        let s = octant();
        let tau = 40.0;
        let mut lead = Complex64::new(0.0, 0.0);
        for tri in fan(&s) {
            sphere_triangle(tri, |dir, w| {
                lead += Complex64::new(2.0, 0.0) / (-s.zeta_dot(dir) * tau).powi(3) * w;
                Ok(())
            })
            .unwrap();
        }
        let i = corner_integral(&s, tau, 0.0).unwrap();
        assert!((i - lead).norm() < 1e-6 * lead.norm(), "{i} vs {lead}");
        // solid angle of the octant
        let mut omega = 0.0;
        for tri in fan(&s) {
            sphere_triangle(tri, |_, w| {
                omega += w;
                Ok(())
            })
            .unwrap();
        }
        assert!((omega - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn general_weight_matches_power_weight() {
        let s = sector(FRAC_PI_6, 0.5);
        let apex = s.corner.apex.clone();
        let a = corner_integral(&s, 30.0, 1.0).unwrap();
        let b = corner_integral_of(&s, 30.0, &|x: &[f64]| vn::norm(&vn::sub(x, &apex))).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm());
        let z = corner_integral_of(&s, 30.0, &|_: &[f64]| 0.0).unwrap();
        assert_eq!(z, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn vanishing_radius_norms() {
        let h = 1e-6;
        let s = sector(FRAC_PI_4, h);
        let n = boundary_norm_estimates(&s, 20.0).unwrap();
        let perimeter = 2.0 * h + 2.0 * FRAC_PI_4 * h;
        assert!((n.l2 * n.l2 / perimeter - 1.0).abs() < 1e-3);
        let n2 = boundary_norm_estimates(&sector(FRAC_PI_4, 2.0 * h), 20.0).unwrap();
        assert!((n2.l2 / n.l2 - 2f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn cap_ratios_decrease() {
        for s in [sector(FRAC_PI_6, 0.6), octant()] {
            let norms: Vec<_> = s.taus.iter().map(|t| boundary_norm_estimates(&s, *t).unwrap()).collect();
            for w in norms.windows(2) {
                assert!(w[1].h1_ratio <= w[0].h1_ratio);
                assert!(w[1].flux_ratio <= w[0].flux_ratio);
                let bound = 2.0 * (-s.direction.rho * s.corner.radius * w[0].tau).exp();
                assert!(w[1].cap_flux <= bound * w[0].cap_flux);
            }
        }
    }
}
