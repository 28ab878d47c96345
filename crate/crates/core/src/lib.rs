//! Group-anonymous, accountable device-to-device key exchange.
//!
//! The crate is organised bottom-up:
//!
//! * [`crypto`]: bilinear group, hashes, symmetric cipher, Diffie-Hellman.
//! * [`ibe`]: Boneh-Franklin identity-based encryption.
//! * [`dualenc`]: key-private and Linear encryption with the proof that both
//!   ciphertexts carry the same plaintext.
//! * [`handshake`]: the k-anonymous group/member selection functions.
//! * [`protocols`]: registration, the network-covered and network-absent
//!   key exchanges, tracing and revocation.
//! * [`asr`]: the authentication-success-rate model and its simulator.
//! * [`bench`]: primitive cost measurements.

pub mod crypto;
pub mod codec;
pub mod ibe;
pub mod dualenc;
pub mod handshake;
pub mod protocols;
pub mod asr;
pub mod bench;
