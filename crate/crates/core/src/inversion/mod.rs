//! Identification from boundary data: measurement discrepancies, shape
//! reconstruction, coefficient recovery next to an estimated interface and
//! the apex-vanishing test.

mod apex;
mod coefficient;
mod discrepancy;
mod nelder_mead;
mod reconstruct;

pub use apex::{apex_vanishing_test, ApexClass, ApexResult, DEFAULT_EXTRA_DECAY, PLATEAU_SPREAD};
pub use coefficient::{
    max_sample_error, recover_boundary_coefficient, CoefficientSample, DIVISION_GUARD, OUTSIDE_OFFSET,
};
pub use discrepancy::{add_noise, discrepancy, discrepancy_l2, discrepancy_report, DiscrepancyReport};
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use reconstruct::{
    reconstruct_inclusion, Candidate, ForwardSetup, InverseProblem, NoiseSpec, ReconstructOptions,
    ReconstructionResult, RestartSummary, SimulationMode, MAX_PARAMETERS,
};
