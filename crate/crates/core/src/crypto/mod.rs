//! Primitives shared by every protocol: the bilinear group, the hash/PRF
//! family, the symmetric cipher and Diffie-Hellman.

mod curve;
mod dh;
mod field;
mod group;
mod hash;
mod sym;

use thiserror::Error;

pub use dh::{dh_keygen, dh_shared, DhKeypair};
pub use group::{Backend, BilinearContext, GElem, GtElem, Scalar, MAX_TRIES};
pub use hash::{
    hash_fields, hash_h, hash_h1, hash_h2, prf_f0, prf_f1, Digest, F0Tag, Frame, Nonce,
    DIGEST_LEN, H2_LEN, NONCE_LEN,
};
pub use sym::{sym_decrypt, sym_encrypt, SymKey, SYM_KEY_LEN, SYM_OVERHEAD};

pub(crate) use hash::hash_to_scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("malformed encoding: {0}")]
    Encoding(&'static str),
    #[error("try-and-increment exhausted its counter")]
    HashToGroupExhausted,
    #[error("payload of {len} bytes exceeds embedding capacity {capacity}")]
    EmbedTooLong { len: usize, capacity: usize },
    #[error("authentication failure")]
    Authentication,
    #[error("degenerate key: identity element")]
    DegenerateKey,
    #[error("unknown backend {0:?}")]
    UnknownBackend(String),
}
