//! Spectral-Galerkin solver for the biharmonic equation on the 3D unit ball.
//!
//! The fourth-order problem Delta^2 u = f with simply supported conditions
//! (u = 0 and Delta u = 0 on the unit sphere) is decoupled through the
//! auxiliary variable sigma = -Delta u into two second-order solves. The
//! approximation space is spanned by boundary-vanishing combinations of ball
//! polynomials that diagonalize the gradient bilinear form, so each solve is
//! a diagonal scale plus a banded multiply: O(dof) algebra, no factorization.
//!
//! Module map:
//! - [`jacobi`]: Jacobi polynomials and Gauss-Jacobi quadrature (scalar kernel)
//! - [`harmonics`]: real orthonormal spherical harmonics and sphere quadrature
//! - [`ballbasis`]: ball polynomials, the boundary-vanishing basis, and the
//!   coefficient-space stiffness/mass operators
//! - [`transform`]: ball quadrature grids, forward analysis, point synthesis
//! - [`solver`]: the two-stage solve, manufactured solutions, error tables
//! - [`diagnostics`]: quadrature-based cross checks of the operator claims

pub mod ballbasis;
pub mod diagnostics;
pub mod error;
pub mod harmonics;
pub mod jacobi;
mod par;
pub mod report;
pub mod solver;
mod special;
pub mod transform;

pub use error::{Error, Result};
