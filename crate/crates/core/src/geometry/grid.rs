use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
    };

    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    /// Distance from `p` to the rectangle boundary, positive inside.
    pub fn inner_distance(&self, p: [f64; 2]) -> f64 {
        (p[0] - self.x0)
            .min(self.x1 - p[0])
            .min(p[1] - self.y0)
            .min(self.y1 - p[1])
    }
}

/// A node on `∂Ω` with its outward unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub index: usize,
    pub i: usize,
    pub j: usize,
    pub normal: [f64; 2],
}

/// Uniform node-centred tensor grid on a rectangle.
///
/// Node `(i, j)` lives at flat index `j * nx + i`. Every node owns the dual
/// control volume `[x_i - hx/2, x_i + hx/2] × [y_j - hy/2, y_j + hy/2]`
/// clipped to the rectangle, so boundary volumes are halved and corner
/// volumes quartered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub bounds: Rect,
}

pub const MIN_NODES: usize = 16;

impl Grid {
    pub fn new(nx: usize, ny: usize, bounds: Rect) -> Result<Self> {
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_NODES} nodes per axis, got {nx}×{ny}"
            )));
        }
        let w = bounds.x1 - bounds.x0;
        let h = bounds.y1 - bounds.y0;
        if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "nonpositive extent {w} × {h}"
            )));
        }
        Ok(Grid { nx, ny, bounds })
    }

    /// Square grid with `n` nodes per axis on the unit square.
    pub fn unit(n: usize) -> Result<Self> {
        Grid::new(n, n, Rect::UNIT)
    }

    #[inline]
    pub fn hx(&self) -> f64 {
        (self.bounds.x1 - self.bounds.x0) / (self.nx - 1) as f64
    }

    #[inline]
    pub fn hy(&self) -> f64 {
        (self.bounds.y1 - self.bounds.y0) / (self.ny - 1) as f64
    }

    #[inline]
    pub fn h_max(&self) -> f64 {
        self.hx().max(self.hy())
    }

    #[inline]
    pub fn h_min(&self) -> f64 {
        self.hx().min(self.hy())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.bounds.x0 + self.hx() * i as f64
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.bounds.y0 + self.hy() * j as f64
    }

    #[inline]
    pub fn point(&self, k: usize) -> [f64; 2] {
        let (i, j) = self.ij(k);
        [self.x(i), self.y(j)]
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }

    /// Area of the control volume owned by node `(i, j)`.
    #[inline]
    pub fn volume(&self, i: usize, j: usize) -> f64 {
        let wx = if i == 0 || i == self.nx - 1 { 0.5 } else { 1.0 };
        let wy = if j == 0 || j == self.ny - 1 { 0.5 } else { 1.0 };
        wx * wy * self.hx() * self.hy()
    }

    pub fn volumes(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let (i, j) = self.ij(k);
                self.volume(i, j)
            })
            .collect()
    }

    /// Control volume of node `(i, j)` as `[xmin, xmax, ymin, ymax]`.
    pub fn cell(&self, i: usize, j: usize) -> [f64; 4] {
        let (hx, hy) = (self.hx(), self.hy());
        let (x, y) = (self.x(i), self.y(j));
        [
            (x - 0.5 * hx).max(self.bounds.x0),
            (x + 0.5 * hx).min(self.bounds.x1),
            (y - 0.5 * hy).max(self.bounds.y0),
            (y + 0.5 * hy).min(self.bounds.y1),
        ]
    }

    pub fn boundary_len(&self) -> usize {
        2 * (self.nx - 1) + 2 * (self.ny - 1)
    }

    /// Boundary nodes counterclockwise from the lower-left corner.
    ///
    /// Each corner is attributed to the side that starts at it, and takes that
    /// side's normal: bottom `(0,-1)`, right `(1,0)`, top `(0,1)`, left `(-1,0)`.
    pub fn boundary_nodes(&self) -> Vec<BoundaryNode> {
        let (nx, ny) = (self.nx, self.ny);
        let mut out = Vec::with_capacity(self.boundary_len());
        let mut push = |i: usize, j: usize, normal: [f64; 2]| {
            out.push(BoundaryNode {
                index: j * nx + i,
                i,
                j,
                normal,
            })
        };
        for i in 0..nx - 1 {
            push(i, 0, [0.0, -1.0]);
        }
        for j in 0..ny - 1 {
            push(nx - 1, j, [1.0, 0.0]);
        }
        for i in (1..nx).rev() {
            push(i, ny - 1, [0.0, 1.0]);
        }
        for j in (1..ny).rev() {
            push(0, j, [-1.0, 0.0]);
        }
        out
    }

    /// Sample a function of position at every node.
    pub fn sample<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|k| f(self.point(k))).collect()
    }

    /// Bilinear interpolation of a nodal field at an arbitrary point (clamped
    /// to the rectangle).
    pub fn interpolate(&self, field: &[f64], p: [f64; 2]) -> f64 {
        let fx = ((p[0] - self.bounds.x0) / self.hx()).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((p[1] - self.bounds.y0) / self.hy()).clamp(0.0, (self.ny - 1) as f64);
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let (s, t) = (fx - i as f64, fy - j as f64);
        let f00 = field[self.idx(i, j)];
        let f10 = field[self.idx(i + 1, j)];
        let f01 = field[self.idx(i, j + 1)];
        let f11 = field[self.idx(i + 1, j + 1)];
        (1.0 - s) * (1.0 - t) * f00 + s * (1.0 - t) * f10 + (1.0 - s) * t * f01 + s * t * f11
    }

    /// Nearest node to `p`.
    pub fn nearest_node(&self, p: [f64; 2]) -> usize {
        let fi = ((p[0] - self.bounds.x0) / self.hx()).round();
        let fj = ((p[1] - self.bounds.y0) / self.hy()).round();
        let i = (fi.max(0.0) as usize).min(self.nx - 1);
        let j = (fj.max(0.0) as usize).min(self.ny - 1);
        self.idx(i, j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_on_unit_square() {
        let g = Grid::new(16, 16, Rect::UNIT).unwrap();
        assert_eq!(g.hx(), 1.0 / 15.0);
        assert_eq!(g.hy(), 1.0 / 15.0);
    }

    #[test]
    fn spacing_per_axis() {
        let g = Grid::new(16, 32, Rect::new(0.0, 2.0, 0.0, 1.0)).unwrap();
        assert_eq!(g.hx(), 2.0 / 15.0);
        assert_eq!(g.hy(), 1.0 / 31.0);
    }

    #[test]
    fn rejects_coarse_grid() {
        assert!(matches!(Grid::new(8, 8, Rect::UNIT), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn rejects_nonpositive_extent() {
        assert!(Grid::new(16, 16, Rect::new(0.0, 0.0, 0.0, 1.0)).is_err());
        assert!(Grid::new(16, 16, Rect::new(0.0, 1.0, 1.0, 0.5)).is_err());
    }

    #[test]
    fn volumes_tile_the_rectangle() {
        let g = Grid::new(17, 23, Rect::new(-1.0, 2.0, 0.0, 0.5)).unwrap();
        let total: f64 = g.volumes().iter().sum();
        assert!((total - 1.5).abs() < 1e-12);
    }

    #[test]
    fn boundary_is_counterclockwise_and_complete() {
        let g = Grid::unit(16).unwrap();
        let b = g.boundary_nodes();
        assert_eq!(b.len(), g.boundary_len());
        assert_eq!((b[0].i, b[0].j), (0, 0));
        assert_eq!((b[15].i, b[15].j), (15, 0));
        assert_eq!(b[15].normal, [1.0, 0.0]);
        let mut seen: Vec<usize> = b.iter().map(|n| n.index).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), b.len());
        for n in &b {
            assert!(g.is_boundary(n.i, n.j));
        }
    }

    #[test]
    fn coordinates_are_reproducible() {
        let g = Grid::unit(33).unwrap();
        for k in 0..g.len() {
            let (i, j) = g.ij(k);
            assert_eq!(g.point(k), [g.x(i), g.y(j)]);
        }
        assert_eq!(g.x(0), 0.0);
    }

    #[test]
    fn interpolation_is_exact_for_bilinear_fields() {
        let g = Grid::unit(16).unwrap();
        let f = g.sample(|p| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1]);
        let p = [0.3712, 0.811];
        let exact = 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1];
        assert!((g.interpolate(&f, p) - exact).abs() < 1e-13);
    }
}
