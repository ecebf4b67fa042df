//! Certification engine for hierarchical randomized smoothing.
//!
//! Inputs are matrices whose rows are entities. The smoothing distribution
//! first selects rows with a Bernoulli draw, then perturbs only the selected
//! rows with a lower-level distribution (Gaussian, sparse bit flips or
//! ablation). The selection indicator is appended as an extra column so the
//! base classifier knows which rows were perturbed.
//!
//! Against adversaries controlling up to `r` rows, certificates reduce to the
//! lower-level certificate at an adjusted budget: with `Delta = 1 - p^r`, the
//! worst-case vote probability is `lower((p_y - Delta) / (1 - Delta)) * (1 - Delta)`.

pub mod certificates;
pub mod config;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod oracle;
pub mod record;
pub mod sampling;
pub mod stats;
pub mod sweep;
pub mod threat;

pub use config::{LowerLevel, Selection, SmoothingConfig};
pub use error::{Error, Result};
pub use matrix::{extend, row_distance, split, Domain, ExtendedMatrix, FeatureMatrix};
pub use record::{CertificateRecord, Prediction, Radius, VoteCounts};
pub use sampling::RngStream;
pub use threat::ThreatModel;
