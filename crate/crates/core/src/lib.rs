//! Harmonic continuation on conductivity lattice strips.
//!
//! A strip is an `R x C` grid with a positive conductivity on every edge. The
//! values of a harmonic function on two adjacent columns determine it on the
//! whole strip; the map that carries them `s` columns to the right is linear.
//! Written on signed edge differences with the herringbone orientation, that
//! map is a product of elementary nonnegative steps, hence a nonsingular
//! totally nonnegative matrix, and its eigenvalues are positive.
//!
//! This crate builds those operators and certifies the claims exactly:
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`network`] | strips, potential fields, the harmonicity residual |
//! | [`marching`] | column-by-column continuation and a dense-solve oracle |
//! | [`transfer`] | charts, step matrices, the transfer operator and its oracle |
//! | [`tncheck`] | exhaustive minor certificates, Cauchy–Binet checks |
//! | [`spectral`] | exact characteristic polynomials and Sturm root isolation |
//! | [`dtn`] | Kirchhoff matrices and Dirichlet-to-Neumann maps |
//! | [`continuum`] | grid-refinement studies of the divergence-form equation |
//! | [`cli`] | the `hcont` command-line front end |
//!
//! ```
//! use harmonic_continuation::{network::StripNetwork, scalar::int, spectral, transfer};
//!
//! let net = StripNetwork::build_uniform(2, 3, int(1)).unwrap();
//! let h = transfer::modified_h(&net, 1).unwrap();
//! let report = spectral::certify_spectrum(&h.matrix).unwrap();
//! assert!(report.is_all_positive());
//! ```

pub mod cli;
pub mod continuum;
pub mod dtn;
pub mod error;
pub mod marching;
pub mod matrix;
pub mod network;
pub mod poly;
pub mod scalar;
pub mod spectral;
pub mod tncheck;
pub mod transfer;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use network::{PotentialField, StripNetwork, Vertex};
pub use scalar::{Rational, Scalar};
