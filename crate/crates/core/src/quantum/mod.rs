//! Quantized Anosov maps: propagator, eigenbases and eigenbasis statistics.

mod eigen;
mod propagator;
mod variance;

pub use eigen::{eigensolve, unitarity_check, EigenSystem};
pub use propagator::{egorov_defect, egorov_sweep, propagator, EgorovPoint, EgorovSweep};
pub use variance::{
    default_beta, default_beta_tilde, density_one_extract, matrix_elements, scale_at, small_scale_mass, variance,
    window_recurrence, DensityExtraction, MassReport, VarianceReport, WindowSelection, POSITION_DIM,
};
