//! Numerical laboratory for the spectra of doubly weighted diffusions with
//! sticky-reflecting (and optionally boundary-diffusing) behaviour on
//! triangulated planar domains, together with the Cheeger-type constants
//! that bound their spectral gaps from below.
//!
//! The crate is organized around six pieces:
//!
//! * [`mesh`] — weighted triangulations with boundary loops and metric
//!   handling (Euclidean chart or Poincare-disk conformal factor);
//! * [`assembly`] — P1 finite element matrix pairs for the Neumann,
//!   Dirichlet, Steklov, sticky-reflection and boundary-diffusion
//!   eigenvalue problems;
//! * [`eigensolver`] — dense and shift-inverted iterative solvers for the
//!   smallest eigenpairs of symmetric definite pencils;
//! * [`cheeger`] — exhaustive and sweep-based computation of the
//!   isoperimetric constants, with witness subsets;
//! * [`disk`] — semi-analytic unit-ball spectra via Bessel secular
//!   equations (Euclidean) and radial shooting (hyperbolic);
//! * [`sparse`] — the minimal sparse kernel behind the solvers.
//!
//! All numerical code is generic over the scalar type through
//! [`scalar::Real`]; `f64` aliases for the main types are exported at the
//! crate root.

pub mod assembly;
pub mod cheeger;
pub mod disk;
pub mod eigensolver;
pub mod mesh;
pub mod scalar;
pub mod sparse;

pub use scalar::Real;

/// `f64` working-precision aliases.
pub type WeightedMesh64 = mesh::WeightedMesh<f64>;
pub type TriangleSubset64<'a> = mesh::TriangleSubset<'a, f64>;

/// `f32` aliases, mostly useful for storage-constrained experimentation.
pub type WeightedMesh32 = mesh::WeightedMesh<f32>;
