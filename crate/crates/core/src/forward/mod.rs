//! Forward solvers: IMEX stepping of the time-dependent system, a
//! Newton–Krylov solver for the stationary system, and measurement maps.

mod measurement;
pub mod ops;
mod parabolic;
mod params;
mod stationary;

pub use measurement::{
    extract_measurements, neumann_measurements, normal_derivative, MeasurementKind, MeasurementSet,
};
pub use parabolic::{solve_time_dependent, step_parabolic, ForwardModel, ForwardRun, STABILITY_FACTOR};
pub use params::{field_name, Boundary, ModelParams, State};
pub use stationary::{solve_stationary, NewtonOptions, StationaryRun};
