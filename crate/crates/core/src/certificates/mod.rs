//! Certificates for hierarchical smoothing. Every hierarchical bound is the
//! lower-level bound evaluated at a `Delta`-adjusted budget and rescaled.

mod ablation;
mod ball;
mod delta;
mod discrete;
mod gaussian;

pub use ablation::{ablation_lower, ablation_upper};
pub use ball::{certify_ball, BallCertificate};
pub use delta::{delta_for, delta_levine, delta_nonuniform, delta_uniform, DeltaValue};
pub use discrete::{
    discrete_lp_lower, discrete_lp_upper, hier_discrete_lower, hier_discrete_upper, sparse_regions, Region,
    RegionTable,
};
pub use gaussian::{
    gaussian_lower_bound, gaussian_upper_bound, hier_gaussian_lower, hier_gaussian_max_radius, hier_gaussian_upper,
};
