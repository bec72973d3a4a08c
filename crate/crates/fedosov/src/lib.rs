//! Exact symbolic deformation quantization on a symplectic coordinate patch.
//!
//! Everything is computed over truncated multivariate power series ("jets")
//! with arbitrary-precision rational coefficients, so every identity the
//! library claims is an exact statement about stored coefficients — there is
//! no floating point anywhere.
//!
//! The pipeline, bottom to top:
//!
//! * [`jet`] — the coefficient ring: jets in the base coordinates around a
//!   basepoint, plus matrix inversion over that ring.
//! * [`weyl`] — differential forms valued in the Weyl algebra bundle: graded
//!   elements with the fiberwise Moyal product and the Koszul operators
//!   `delta`, `delta_star`, `delta_inv`.
//! * [`geometry`] — symplectic structures and connections in coordinates:
//!   validation, Poisson bracket, musical isomorphisms, symplectization,
//!   curvature, and the lift of a connection to the Weyl bundle.
//! * [`quantize`] — the flat-connection recursion, flat sections, the star
//!   product, and a closed-form constant-coefficient oracle.
//! * [`expr`], [`manifold`], [`render`], [`cli`] — expression parsing,
//!   manifold description files, deterministic text/JSON output, and the
//!   command-line surface.
//!
//! See the crate examples for runnable walkthroughs of each capability.

pub mod cli;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod manifold;
pub mod quantize;
pub mod render;
pub mod weyl;

mod error;

pub use error::{Error, Result};
pub use geometry::{symplectize, weyl_curvature, Connection, NablaOperator, SymplecticStructure};
pub use jet::{matrix_inverse, Exponents, Jet, Rational};
pub use quantize::{
    moyal_reference, star_product, CoefficientSeries, ComplexCoefficient, CurvatureReport,
    FedosovConnection, FlatSection,
};
pub use weyl::{GradingView, TermKey, WeylContext, WeylElement};
