//! The domain `Ω`, the inclusion `ω`, truncated corners and their
//! discretisations.

mod corner;
mod grid;
mod inclusion;
mod raster;
pub mod vec2;

pub use corner::{corner_from_polygon, probe_direction, ProbeDirection, TruncatedCorner};
pub use grid::{BoundaryNode, Grid, Rect, MIN_NODES};
pub use inclusion::{polygon_is_convex, Inclusion};
pub use raster::{rasterize_inclusion, BoundaryCell, IndicatorField};

/// Uniform grid constructor under its operational name.
pub fn build_grid(nx: usize, ny: usize, bounds: Rect) -> crate::Result<Grid> {
    Grid::new(nx, ny, bounds)
}
