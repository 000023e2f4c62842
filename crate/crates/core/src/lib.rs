//! Moutard-type transforms for the conductivity equation `div(σ ∇u) = 0`.
//!
//! The crate builds new conductivities together with exact solutions of the
//! transformed equations, using nothing but pointwise algebra and quadratures,
//! and checks every result with second-order finite-difference residuals.
//!
//! * [`field`]: grids, real and complex fields, Wirtinger derivatives, path
//!   quadrature and the field file format.
//! * [`gaf`]: generalized analytic functions, the potential `ω` and the simple
//!   Moutard transform.
//! * [`planar`]: the two-dimensional reductions (conductivity type, special
//!   conjugate solutions, transforms of `(σ, u, v)` and integrable families).
//! * [`multidim`]: the dimension-independent transform `σ → w²σ`, its
//!   composition law, and the zero-energy Schrödinger reduction.
//! * [`verify`]: residuals, masks and convergence orders.
//!
//! The guide in `book/` walks through each of these with runnable snippets.

pub mod error;
pub mod field;
pub mod gaf;
pub mod multidim;
pub mod planar;
pub mod sigma;
pub mod verify;

pub use error::{Error, Result};
pub use field::{ComplexField, Grid, Mask, ScalarField};
pub use sigma::{Conductivity, SingularMode};
