//! Geodesic flow on a compact hyperbolic surface, realized as right
//! multiplication in SL(2, R) modulo a Fuchsian group.

pub mod frame;
pub mod geometry;
pub mod group;
pub mod observable;
pub mod sample;
pub mod stats;

pub use frame::{flow, flow_lifted, reduce, UnitTangentFrame, MAX_FLOW_TIME};
pub use group::{FuchsianGroup, REDUCTION_CAP};
pub use observable::{
    surface_holder, surface_observable, Centered, ConstantObservable, Observable, SurfaceBump, SurfaceBumpSpec,
    SCALE_CAP,
};
pub use sample::{domain_area, liouville_sample};
pub use stats::{
    ergodicity_rate_mc, mixing_fit, separation_rate, surface_correlation, trajectory, trajectory_csv, MixingFit,
    SeparationRate, SurfaceCorrelation, SurfaceErgodicity,
};
