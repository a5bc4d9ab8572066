//! Canonical forms of complex symmetric and Hermitian matrices under the
//! complex orthogonal group, solution spaces of the associated Sylvester-type
//! equations, a recursive solver for the block-Toeplitz stabilizer equation,
//! closed-form stabilizer dimensions, and an independent tangent-space oracle
//! that cross-checks every dimension claim.

pub mod blocks;
pub mod classify;
pub mod dimensions;
pub mod error;
pub mod forms;
pub mod kernels;
pub mod mat;
pub mod oracle;
pub mod solution_space;
pub mod stab;
pub mod suite;
pub mod sylvester;
pub mod toeplitz;
pub mod tol;

pub use error::Error;
pub use mat::{C64, Mat};
pub use tol::TolPolicy;
