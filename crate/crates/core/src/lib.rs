//! Central configurations of the curved N-body problem on the hyperbolic plane.
//!
//! Bodies live on the hyperboloid `x² + y² − w² = −1`, interact through the
//! force function `U = Σ m_i m_j coth d_ij`, and a central configuration is a
//! critical point of `U` on a level set `I = c` of the moment of inertia.

pub mod cli;
pub mod configuration;
pub mod error;
pub mod geodesic;
pub mod geometry;
pub mod hessian;
pub mod io;
pub mod linalg;
pub mod morse;
pub mod potential;
pub mod search;
pub mod verify;
pub mod witness;

pub use configuration::{so2_rotate, Configuration, TangentVector};
pub use error::{CcError, Result};
pub use geometry::{ChartPoint, ChartTag, GraphPoint, HPoint};
