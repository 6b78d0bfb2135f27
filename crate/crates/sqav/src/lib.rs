//! Simulator and verification suite for a self-tallying anonymous voting
//! protocol built on two families of entangled qudit states.
//!
//! The crate is organized around the life of one election:
//!
//! - [`qstate`] — sparse state-vector engine: the zero-sum resource state,
//!   the singlet resource state, local unitaries, and projective measurement
//!   in the computational and Fourier bases.
//! - [`theorems`] — numerical checkers for the algebraic facts the protocol's
//!   security rests on, with brute-force oracles at small size.
//! - [`protocol`] — the three-step voting state machine over simulated
//!   quantum channels and a simultaneous-broadcast synchronizer, producing a
//!   replayable transcript.
//! - [`adversary`] — attack injection (interception, state replacement,
//!   collusion families) and detection-probability measurement against
//!   closed-form predictions.
//! - [`amc`] — the generalization to anonymous multi-party computation,
//!   anonymous broadcast, and anonymous ranking.
//! - [`cli`] — scenario configs, report emission, and the `sqav` binary's
//!   command implementations.

pub mod adversary;
pub mod amc;
pub mod cli;
pub mod error;
pub mod protocol;
pub mod qstate;
pub mod rng;
pub mod theorems;

pub use error::{Error, Result};
pub use qstate::{Basis, BasisTuple, LocalUnitary, SparseState};
pub use rng::SeededRng;
