//! Admissible reaction terms as centred Taylor polynomials about `(u₀, 0)`,
//! with an interior and an exterior branch.

mod bound;
pub mod jet;
mod multi_index;
mod piecewise;
mod taylor;

pub use bound::BoundReaction;
pub use multi_index::{MultiIndex, Var};
pub use piecewise::{AdmissibilityReport, CoefficientJump, PiecewiseReaction, Regularity, Side};
pub use taylor::{CoefficientField, TaylorReaction, TimeProfile, MAX_ORDER};
