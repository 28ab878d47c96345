//! The hash and PRF family: `H`, `H1`, `H2`, `f0`, `f1`.
//!
//! Structured inputs are framed as length-prefixed fields (4-byte
//! big-endian length per field). `f0`, `f1`, `H1` and `H2` start their
//! frame with a domain tag, so none of them can collide with each other or
//! with plain `H` on the same raw bytes.

use std::fmt;

use num_bigint::BigUint;
use sha2::{Digest as _, Sha256};

use super::group::{BilinearContext, GElem, GtElem, Scalar};
use super::CryptoError;

pub const DIGEST_LEN: usize = 32;
pub const NONCE_LEN: usize = 16;
/// Width of `H2` output and of the IBE message space (`n`).
pub const H2_LEN: usize = 16;

/// A 256-bit output of `H` (or `f0`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(pub [u8; DIGEST_LEN]);

impl Digest {
    pub fn as_bytes(&self) -> &[u8; DIGEST_LEN] {
        &self.0
    }

    pub fn from_slice(bytes: &[u8]) -> Option<Self> {
        bytes.try_into().ok().map(Digest)
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", hex::encode(self.0))
    }
}

/// A 128-bit protocol nonce (`N_U`, `N_V`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Nonce(pub [u8; NONCE_LEN]);

impl Nonce {
    pub fn random<R: rand::RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut b = [0u8; NONCE_LEN];
        rng.fill_bytes(&mut b);
        Nonce(b)
    }
}

/// Length-prefixed field concatenation.
#[derive(Clone, Debug, Default)]
pub struct Frame {
    buf: Vec<u8>,
}

impl Frame {
    /// A frame whose first field is the domain tag.
    pub fn new(domain: &[u8]) -> Self {
        Self::untagged().field(domain)
    }

    pub fn untagged() -> Self {
        Self { buf: Vec::new() }
    }

    pub fn field(mut self, bytes: &[u8]) -> Self {
        self.push(bytes);
        self
    }

    pub fn push(&mut self, bytes: &[u8]) {
        let len = u32::try_from(bytes.len()).expect("field shorter than 4 GiB");
        self.buf.extend_from_slice(&len.to_be_bytes());
        self.buf.extend_from_slice(bytes);
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.buf
    }

    pub fn digest(&self) -> Digest {
        hash_h(&self.buf)
    }
}

/// `H`: plain SHA-256.
pub fn hash_h(data: &[u8]) -> Digest {
    Digest(Sha256::digest(data).into())
}

/// `H` over a sequence of fields.
pub fn hash_fields(fields: &[&[u8]]) -> Digest {
    let mut frame = Frame::untagged();
    for f in fields {
        frame.push(f);
    }
    frame.digest()
}

/// SHA-256 in counter mode, truncated to `len` bytes.
pub(crate) fn expand(data: &[u8], len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len + DIGEST_LEN);
    let mut ctr = 0u32;
    while out.len() < len {
        let mut h = Sha256::new();
        h.update(ctr.to_be_bytes());
        h.update(data);
        out.extend_from_slice(&h.finalize());
        ctr += 1;
    }
    out.truncate(len);
    out
}

/// Wide reduction of a framed input into `Z_p`.
pub(crate) fn hash_to_scalar(ctx: &BilinearContext, frame: &Frame) -> Scalar {
    let wide = expand(frame.as_bytes(), ctx.scalar_len() + 16);
    ctx.scalar(BigUint::from_bytes_be(&wide))
}

/// `H1: {0,1}* -> G*`.
pub fn hash_h1(ctx: &BilinearContext, data: &[u8]) -> Result<GElem, CryptoError> {
    ctx.hash_to_group(b"H1", data)
}

/// `H2: G_T -> {0,1}^128`.
pub fn hash_h2(ctx: &BilinearContext, t: &GtElem) -> [u8; H2_LEN] {
    let d = Frame::new(b"H2").field(&ctx.encode_gt(t)).digest();
    let mut out = [0u8; H2_LEN];
    out.copy_from_slice(&d.0[..H2_LEN]);
    out
}

/// The four uses of `f0` in the network-absent handshake.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum F0Tag {
    /// `sigma_0`; also the two-argument form `f0(a, b)`.
    Sigma0 = 0,
    Sigma1 = 1,
    Sigma2 = 2,
    SessionKey = 3,
}

/// `f0(a, b, tag)`.
pub fn prf_f0(ctx: &BilinearContext, a: &Scalar, b: &Scalar, tag: F0Tag) -> Digest {
    Frame::new(b"f0")
        .field(&ctx.encode_scalar(a))
        .field(&ctx.encode_scalar(b))
        .field(&u32::from(tag as u8).to_be_bytes())
        .digest()
}

/// `f1(N_u, N_v, labels...)` into `Z_p`.
pub fn prf_f1(ctx: &BilinearContext, n_u: &Nonce, n_v: &Nonce, labels: &[u32]) -> Scalar {
    assert!(!labels.is_empty(), "f1 needs at least one label");
    let mut frame = Frame::new(b"f1").field(&n_u.0).field(&n_v.0);
    for l in labels {
        frame.push(&l.to_be_bytes());
    }
    hash_to_scalar(ctx, &frame)
}
