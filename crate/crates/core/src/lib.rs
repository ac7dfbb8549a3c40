//! Executable model of MERGE-based syntax coupled to oscillatory and spiking
//! neural codes.
//!
//! The crate is split by level:
//!
//! - [`syntax`]: workspaces, set-forming MERGE, labeling, tree metrics and
//!   derivation replay.
//! - [`script`]: line-oriented derivation scripts replayed against a lexicon.
//! - [`lexicon`]: lexical feature vectors, linear compression and recurrent
//!   composition of embeddings.
//! - [`signal`]: traveling waves, phase-amplitude coupled gamma banks, category
//!   phase codes and Kuramoto phase dynamics.
//! - [`spiking`]: phase-modulated inhomogeneous Poisson populations.
//! - [`hopf`]: oscillatory states as complex amplitudes with merge and
//!   comultiplication.
//! - [`codec`]: encode a labeled tree into traces and spike trains, and decode
//!   it back.
//! - [`sim`]: the stacked four-level state evolved by a fixed-step integrator
//!   with discrete composition events.

pub mod codec;
pub mod csv;
pub mod hopf;
pub mod lexicon;
pub mod phase;
pub mod script;
pub mod signal;
pub mod sim;
pub mod spiking;
pub mod syntax;

pub use phase::{circular_distance, wrap_phase};
