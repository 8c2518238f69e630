//! Finite-volume operators on the dual control volumes of a node-centred grid.
//!
//! Every operator is written as a sum over faces `(k, l, w)` with
//! `w = face length / node distance`, so boundary walls carry no flux and
//! `Σ_k V_k (L u)_k = 0` holds to roundoff.

use crate::geometry::Grid;
use crate::linalg::{BandedCholesky, BandedSym};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub k: usize,
    pub l: usize,
    pub w: f64,
}

#[derive(Debug, Clone)]
pub struct FvOperators {
    pub n: usize,
    pub nx: usize,
    pub volumes: Vec<f64>,
    pub faces: Vec<Face>,
    /// `faces` grouped by node, as indices into `faces`.
    adjacency: Vec<Vec<usize>>,
}

impl FvOperators {
    pub fn new(grid: &Grid) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let (hx, hy) = (grid.hx(), grid.hy());
        let mut faces = Vec::with_capacity(2 * grid.len());
        for j in 0..ny {
            // faces crossing the row have height hy, halved on the outer rows
            let len_y = if j == 0 || j == ny - 1 { 0.5 * hy } else { hy };
            for i in 0..nx - 1 {
                faces.push(Face {
                    k: grid.idx(i, j),
                    l: grid.idx(i + 1, j),
                    w: len_y / hx,
                });
            }
        }
        for j in 0..ny - 1 {
            for i in 0..nx {
                let len_x = if i == 0 || i == nx - 1 { 0.5 * hx } else { hx };
                faces.push(Face {
                    k: grid.idx(i, j),
                    l: grid.idx(i, j + 1),
                    w: len_x / hy,
                });
            }
        }
        let mut adjacency = vec![Vec::with_capacity(4); grid.len()];
        for (f, face) in faces.iter().enumerate() {
            adjacency[face.k].push(f);
            adjacency[face.l].push(f);
        }
        FvOperators {
            n: grid.len(),
            nx,
            volumes: grid.volumes(),
            faces,
            adjacency,
        }
    }

    /// `(L u)_k = V_k⁻¹ Σ w (u_l − u_k)`; the 5-point Laplacian in the
    /// interior with reflecting walls.
    pub fn laplacian(&self, u: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for &f in &self.adjacency[k] {
                let face = self.faces[f];
                let other = if face.k == k { face.l } else { face.k };
                s += face.w * (u[other] - u[k]);
            }
            *o = s / self.volumes[k];
        }
    }

    /// Laplacian at a single node.
    pub fn laplacian_at(&self, u: &[f64], k: usize) -> f64 {
        let mut s = 0.0;
        for &f in &self.adjacency[k] {
            let face = self.faces[f];
            let other = if face.k == k { face.l } else { face.k };
            s += face.w * (u[other] - u[k]);
        }
        s / self.volumes[k]
    }

    /// Flux-form `∇·(v ∇u)` with arithmetic-mean face values of `v`.
    pub fn taxis(&self, v: &[f64], u: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for &f in &self.adjacency[k] {
                let face = self.faces[f];
                let other = if face.k == k { face.l } else { face.k };
                s += face.w * 0.5 * (v[k] + v[other]) * (u[other] - u[k]);
            }
            *o = s / self.volumes[k];
        }
    }

    /// Largest difference quotient `|u_l − u_k| / dist` over faces.
    pub fn max_gradient(&self, grid: &Grid, u: &[f64]) -> f64 {
        let (hx, hy) = (grid.hx(), grid.hy());
        self.faces
            .iter()
            .map(|f| {
                let d = if f.l == f.k + 1 { hx } else { hy };
                (u[f.l] - u[f.k]).abs() / d
            })
            .fold(0.0, f64::max)
    }

    /// `diag(m) + c K`, with rows and columns of `fixed` nodes replaced by the
    /// identity. `K` is the stiffness matrix, `L = −V⁻¹K`.
    pub fn assemble(&self, m: &[f64], c: f64, fixed: Option<&[bool]>) -> BandedSym {
        let mut a = BandedSym::zeros(self.n, self.nx);
        let is_fixed = |k: usize| fixed.is_some_and(|f| f[k]);
        for k in 0..self.n {
            a.add(k, k, if is_fixed(k) { 1.0 } else { m[k] });
        }
        for face in &self.faces {
            let (fk, fl) = (is_fixed(face.k), is_fixed(face.l));
            if !fk {
                a.add(face.k, face.k, c * face.w);
            }
            if !fl {
                a.add(face.l, face.l, c * face.w);
            }
            if !fk && !fl {
                a.add(face.k, face.l, -c * face.w);
            }
        }
        a
    }

    pub fn factor(&self, m: &[f64], c: f64, fixed: Option<&[bool]>) -> Result<BandedCholesky> {
        self.assemble(m, c, fixed).cholesky()
    }

    /// Moves known values at fixed nodes to the right-hand side of a system
    /// built by [`assemble`](Self::assemble) and writes them into the fixed rows.
    pub fn eliminate(&self, rhs: &mut [f64], c: f64, fixed: &[bool], values: &[f64]) {
        for face in &self.faces {
            match (fixed[face.k], fixed[face.l]) {
                (false, true) => rhs[face.k] += c * face.w * values[face.l],
                (true, false) => rhs[face.l] += c * face.w * values[face.k],
                _ => {}
            }
        }
        for k in 0..self.n {
            if fixed[k] {
                rhs[k] = values[k];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_stencil_is_five_point() {
        let g = Grid::unit(20).unwrap();
        let ops = FvOperators::new(&g);
        let u = g.sample(|p| p[0] * p[0] + 3.0 * p[1] * p[1]);
        let mut out = vec![0.0; g.len()];
        ops.laplacian(&u, &mut out);
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                assert!((out[g.idx(i, j)] - 8.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn conservative() {
        let g = Grid::new(17, 23, crate::geometry::Rect::new(0.0, 2.0, -1.0, 0.5)).unwrap();
        let ops = FvOperators::new(&g);
        let u = g.sample(|p| (3.0 * p[0]).sin() + p[1] * p[1]);
        let v = g.sample(|p| 1.0 + p[0] * p[1]);
        let mut lu = vec![0.0; g.len()];
        let mut tv = vec![0.0; g.len()];
        ops.laplacian(&u, &mut lu);
        ops.taxis(&v, &u, &mut tv);
        let m1: f64 = lu.iter().zip(&ops.volumes).map(|(a, b)| a * b).sum();
        let m2: f64 = tv.iter().zip(&ops.volumes).map(|(a, b)| a * b).sum();
        assert!(m1.abs() < 1e-10 && m2.abs() < 1e-10);
    }

    #[test]
    fn implicit_matrix_matches_operator() {
        let g = Grid::unit(16).unwrap();
        let ops = FvOperators::new(&g);
        let u = g.sample(|p| (p[0] - 0.3).powi(3) + p[1]);
        let m: Vec<f64> = ops.volumes.iter().map(|v| v * 7.0).collect();
        let a = ops.assemble(&m, 0.4, None);
        let mut y = vec![0.0; g.len()];
        a.matvec(&u, &mut y);
        let mut lu = vec![0.0; g.len()];
        ops.laplacian(&u, &mut lu);
        for k in 0..g.len() {
            let want = ops.volumes[k] * (7.0 * u[k] - 0.4 * lu[k]);
            assert!((y[k] - want).abs() < 1e-12);
        }
    }
}
