//! Numerical laboratory for entropy growth in generalized Ising spin chains.
//!
//! * [`dyadic`]: the doubling map, its transfer operator and the density
//!   entropy that increases along it.
//! * [`interaction`]: couplings J(|x|), summability norms and the
//!   Lieb–Robinson velocity.
//! * [`product`]: log-space infinite cosine products (Cloitre function,
//!   infinite-volume correlators) and sensitivity scans.
//! * [`finite`]: exact state-vector dynamics of finite chains, reduced
//!   density matrices and entropy functionals.
//! * [`quench`]: block-state preparation by a sudden transverse field,
//!   post-quench trajectories, the pointer observable and the time-arrow
//!   witness.
//!
//! Conventions: Pauli operators (eigenvalues ±1), natural logarithms,
//! k_B = 1. Site `x` of an `N`-site chain is bit `x` of a basis index; bit 0
//! is the σ³ = +1 (up) state.
//!
//! Data-parallel loops use rayon when the `parallel` feature is enabled
//! (default) and run sequentially otherwise; results are identical either
//! way.

pub mod dyadic;
pub mod finite;
pub mod interaction;
mod par;
pub mod product;
pub mod quench;
pub mod special;

pub use dyadic::{BinaryOrbit, DyadicDensity};
pub use finite::{ReducedDensityMatrix, SiteSpec, SiteState, SpinState};
pub use interaction::{CouplingModel, Velocity};
pub use product::ProductValue;
pub use quench::{CycleTrace, QuenchPlan};
