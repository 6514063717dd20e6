//! Transfer integrals between 3D bodies evaluated through signed matrix-valued
//! distance, radii and chord-length distributions.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: primitives, CSG composition through interval algebra,
//!   containment, sampling and measures.
//! * [`scene`]: validated body collections, union aggregates and the
//!   overlap decomposition into disjoint pieces.
//! * [`signed_hist`]: histograms that admit negative weights and the
//!   symmetric matrix containers built from them.
//! * [`estimators`]: Monte Carlo estimators for point pairs, rays and lines.
//! * [`analytic`]: closed forms and quadrature oracles for spheres.
//! * [`transfer`]: kernels, the six transfer routes and the identity verifier.

pub mod analytic;
pub mod error;
pub mod estimators;
pub mod format;
pub mod geometry;
pub mod kernel;
pub mod rng;
pub mod scene;
pub mod signed_hist;
pub mod stats;
pub mod transfer;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{Body, CsgOp, DensityField, Interval, IntervalList, Shape, Vec3};
pub use kernel::Kernel;
pub use rng::RandomStream;
pub use scene::{PairStatus, Scene, SceneSpec};
pub use signed_hist::{DensityKind, MatrixDensity, SignedHistogram};
pub use stats::Estimate;
pub use transfer::{Route, TransferResult};
pub use verify::{IdentityCheck, Status, Suite, VerificationReport, VerifyConfig};
