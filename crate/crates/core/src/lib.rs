//! Two dipolar-coupled spin-1/2 nuclei relaxing under a GKSL generator, with
//! tools to detect and classify Mpemba-type crossings of their distances to
//! equilibrium.

pub mod cli;
pub mod closed_form;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod relaxation;
pub mod spectral;
pub mod spin_algebra;
pub mod state;

pub use error::{Error, Result};
pub use metrics::{Classification, Metric, MpembaReport};
pub use relaxation::{BathParams, LiouvillianOptions, Superoperator, SystemParams};
pub use state::{DensityMatrix, PopulationVector};
