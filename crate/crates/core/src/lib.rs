//! Encryption-less "jigsaw" secure data transfer.
//!
//! Plaintext is torn into parts of arbitrary bounded bit length, each part is
//! fenced with `1` marker bits and embedded at a random offset into an
//! otherwise-zero block, and the blocks are masked with a pre-shared pad that
//! evolves after every run via a random block conveyed in the run's final
//! slot. Packets carry an HMAC over sequence number, flags and payload.
//!
//! The crate also ships the pieces needed to *study* the scheme: an
//! adversarial channel simulator, an executable two-round differencing attack
//! that breaks the base scheme, the linear all-or-nothing transform that
//! defeats that attack, and closed-form/instrumented operation accounting.
//!
//! This is a research artifact. The base scheme has a practical
//! known-plaintext break (see [`simnet`]); do not use it to protect real
//! data.

pub mod aont;
pub mod codec;
pub mod counts;
pub mod error;
pub mod field;
pub mod keymat;
pub mod mac;
pub mod rng;
pub mod simnet;
pub mod tear;
pub mod wire;

pub use error::{Error, Result};
pub use field::{Block, ReductionPoly};
