//! Entanglement-breaking (EB) bipartite subspaces.
//!
//! A bipartite subspace `V ⊆ H_A ⊗ H_B` is *entanglement breaking* when
//! tracing out system `B` of any pure state in `V ⊗ H_ab` leaves a separable
//! state between `A` and the auxiliary pair `ab`. States supported on an EB
//! space have additive entanglement of formation, so their entanglement cost
//! equals their EOF — which is what makes these spaces worth certifying.
//!
//! The crate provides:
//! - [`tensor`]: dense complex linear algebra kernels (Kronecker products,
//!   partial trace/transpose, Hermitian eigendecompositions, Schmidt
//!   decompositions, numerical rank),
//! - [`pencil`]: rank-one point detection in matrix pencils, the workhorse
//!   for locating product vectors in 2-dimensional subspaces,
//! - [`states`]: pure states, density operators, subspaces, probe states,
//! - [`sep`]: exact separability decisions (PPT plus low-rank rules),
//! - [`certify`]: EB certification with structural certificates and a
//!   numeric falsifier,
//! - [`construct`]: EB space constructors (saturating bases, tensor
//!   products, B-direct sums, the parametric families, fixture spaces),
//! - [`eof`]: entanglement entropy, the two-qubit closed form, a convex-roof
//!   optimizer, additivity checks and entanglement cost,
//! - [`tc`]: the two-atom Tavis-Cummings model restricted to the
//!   two-excitation sector, with per-time EB flags and EOF/E_c curves.

pub mod certify;
pub mod construct;
pub mod eof;
pub mod error;
pub mod pencil;
pub mod rng;
pub mod sep;
pub mod states;
pub mod tc;
pub mod tensor;
pub mod tol;

pub use error::{Error, Result};
pub use states::{BipartiteSubspace, DensityOperator, ProbeState, ProductOperator, PureState};
pub use tensor::{CMat, CVec, SystemDims, C64};
