//! Diffie-Hellman over `G`.

use rand::RngCore;

use super::group::{BilinearContext, GElem, Scalar};
use super::CryptoError;

#[derive(Clone, Debug)]
pub struct DhKeypair {
    pub secret: Scalar,
    pub public: GElem,
}

pub fn dh_keygen<R: RngCore + ?Sized>(ctx: &BilinearContext, rng: &mut R) -> DhKeypair {
    let secret = ctx.random_nonzero_scalar(rng);
    let public = ctx.exp_g(&secret);
    DhKeypair { secret, public }
}

/// `peer^x`; rejects the identity as a peer value.
pub fn dh_shared(ctx: &BilinearContext, x: &Scalar, peer: &GElem) -> Result<GElem, CryptoError> {
    if peer.is_identity() {
        return Err(CryptoError::DegenerateKey);
    }
    Ok(ctx.exp(peer, x))
}
