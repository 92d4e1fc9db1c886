//! Barrier profiles, radial barriers, monotone grid solvers and numerical
//! checks of boundary decay and boundary Harnack estimates for fully
//! nonlinear elliptic equations in the plane.
//!
//! The geometric and algebraic core ([`geometry`], [`pucci`]) is generic over
//! [`Scalar`]; ODE shooting, grid solvers and verification work in `f64`.

pub mod barriers;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod numerics;
pub mod odi;
pub mod pucci;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod verify;

pub use error::{BarrierError, GeometryError, GridError, OdiError, OperatorError, VerifyError};
pub use report::VerificationReport;
pub use scalar::Scalar;

pub type Point2 = geometry::Point<f64>;
pub type Point2f = geometry::Point<f32>;
pub type Domain = geometry::DomainSpec<f64>;
pub type Domainf = geometry::DomainSpec<f32>;
pub type SymMatrix2 = pucci::SymMatrix<f64>;
pub type SymMatrix2f = pucci::SymMatrix<f32>;
