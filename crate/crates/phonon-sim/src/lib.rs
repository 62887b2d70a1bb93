//! Simulation and analysis toolkit for two bosonic (motional) modes coupled to
//! a single two-level emitter.
//!
//! The crate models a trapped-ion qubit whose two radial motional modes are
//! driven on their red sidebands by a single bichromatic field. In the
//! symmetric-coupling case the joint motional state organizes into collective
//! manifolds with one maximally *bright* state (enhanced coupling, matrix
//! element √(2N)·g) and one perfectly *dark* state (zero coupling despite a
//! nonzero phonon number) per total phonon number N.
//!
//! Modules:
//! - [`hilbert`]: truncated composite Hilbert space, state containers, and
//!   elementary operators.
//! - [`collective`]: the two-mode collective basis, bright/dark/coherent/
//!   product states, and decompositions.
//! - [`dynamics`]: interaction Hamiltonian, unitary propagation, and Lindblad
//!   integration with dephasing collapse operators.
//! - [`sequences`]: ideal carrier/sideband pulse primitives and the scripted
//!   state-preparation programs, including postselection.
//! - [`tomography`]: sideband Rabi-signal model and constrained least-squares
//!   extraction of phonon-number distributions.
//! - [`experiments`]: config-driven experiment runner producing plot-ready
//!   tables.
//! - [`verify`]: independent numerical oracles (Liouvillian exponentials,
//!   ladder-constructed bases, closed forms) and the self-check suite.
//!
//! Units: rates and couplings are cyclic frequencies in kHz, times are in ms.
//! Conversions to angular frequency (×2π, rad/ms) happen inside `dynamics`;
//! stored parameters stay quotable in kHz.

extern crate blas_src;

pub mod collective;
pub mod dynamics;
pub mod experiments;
pub mod hilbert;
pub mod sequences;
pub mod tomography;
pub mod verify;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
