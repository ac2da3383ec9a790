//! # qglass
//!
//! Entanglement dynamics of disordered and complex Ising spin systems quenched
//! from the product state `|+⟩^⊗N`.
//!
//! All Hamiltonians handled here are diagonal in the `σ^z` basis, so every
//! reduced state is available in closed form. Each closed form is certified
//! against the brute-force state-vector evolution in [`oracle`].
//!
//! - [`qmat`]: dense complex matrices, Hermitian eigenvalues (cyclic Jacobi),
//!   partial transpose, logarithmic negativity, PPT test, pure-state fidelity.
//! - [`lattice`]: chain/honeycomb/square/cube geometries, random pair
//!   neighborhoods and small periodic lattices.
//! - [`ea`]: Edwards-Anderson glass, nearest-neighbor pair state and quenched
//!   averages of the logarithmic negativity.
//! - [`ball`]: separable-ball estimate of the long-time average entanglement.
//! - [`gate`]: measurement-based Hadamard gate under coupling disorder.
//! - [`lro`]: ordered infinite-range model `S²/N`, collapse and revival.
//! - [`hopfield`]: Hopfield-network Ising model with random patterns.
//! - [`oracle`]: full `2^N` evolution and partial traces.
//! - [`sampling`]: seeded per-sample random streams and order-stable parallel
//!   reductions.

pub mod ball;
pub mod ea;
pub mod error;
pub mod gate;
pub mod hopfield;
pub mod lattice;
pub mod lro;
pub mod oracle;
pub mod qmat;
pub mod sampling;
pub mod series;
pub mod stats;

pub use error::{Error, Result};
pub use qmat::{CMatrix, Cut, DensityMatrix, C64};
pub use series::LnTimeSeries;
