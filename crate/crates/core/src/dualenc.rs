//! Key-private and Linear encryption, and the proof that a pair of
//! ciphertexts under the two schemes carries the same plaintext.
//!
//! Plaintexts are group elements; callers map byte payloads in and out with
//! [`BilinearContext::embed`] / [`BilinearContext::unembed`] so that the
//! tracing authority can read them back after Linear decryption.
//!
//! All encodings here are fixed width, so a ciphertext or proof has the same
//! size whatever it carries.

use num_bigint::BigUint;
use rand::RngCore;

use crate::crypto::{hash_h, BilinearContext, CryptoError, Frame, GElem, GtElem, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KpKeypair {
    pub x: Scalar,
    pub public: GElem,
}

/// `C_1 = (Y, C) = (g^y, M * X^y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KpCiphertext {
    pub y: GElem,
    pub c: GElem,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinPublicKey {
    pub u: GElem,
    pub v: GElem,
    pub h: GElem,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinSecretKey {
    pub x_hat: Scalar,
    pub y_hat: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinKeypair {
    pub public: LinPublicKey,
    pub secret: LinSecretKey,
}

/// `C_2 = (C^, T1, T2) = (M * h^(b1+b2), u^b1, v^b2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinCiphertext {
    pub c_hat: GElem,
    pub t1: GElem,
    pub t2: GElem,
}

/// `(c, s_b1, s_b2, s_y, R1, R2, R3)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualProof {
    pub c: Scalar,
    pub s_b1: Scalar,
    pub s_b2: Scalar,
    pub s_y: Scalar,
    pub r1: GElem,
    pub r2: GElem,
    pub r3: GtElem,
}

/// Ephemerals of a Linear encryption, kept by the prover.
#[derive(Clone, Debug)]
pub struct LinEphemeral {
    pub beta1: Scalar,
    pub beta2: Scalar,
}

pub fn kp_keygen<R: RngCore + ?Sized>(ctx: &BilinearContext, rng: &mut R) -> KpKeypair {
    let x = ctx.random_nonzero_scalar(rng);
    KpKeypair {
        public: ctx.exp_g(&x),
        x,
    }
}

pub fn kp_encrypt<R: RngCore + ?Sized>(
    ctx: &BilinearContext,
    pk: &GElem,
    m: &GElem,
    rng: &mut R,
) -> (KpCiphertext, Scalar) {
    let y = ctx.random_nonzero_scalar(rng);
    let ct = KpCiphertext {
        y: ctx.exp_g(&y),
        c: ctx.mul(m, &ctx.exp(pk, &y)),
    };
    (ct, y)
}

pub fn kp_decrypt(ctx: &BilinearContext, x: &Scalar, ct: &KpCiphertext) -> GElem {
    ctx.div(&ct.c, &ctx.exp(&ct.y, x))
}

pub fn lin_keygen<R: RngCore + ?Sized>(ctx: &BilinearContext, rng: &mut R) -> LinKeypair {
    let h = loop {
        let h = ctx.random_element(rng);
        if !h.is_identity() {
            break h;
        }
    };
    let x_hat = ctx.random_nonzero_scalar(rng);
    let y_hat = ctx.random_nonzero_scalar(rng);
    // u = h^(1/x^), v = h^(1/y^), so u^x^ = v^y^ = h
    let u = ctx.exp(&h, &scalar_inv(ctx, &x_hat));
    let v = ctx.exp(&h, &scalar_inv(ctx, &y_hat));
    LinKeypair {
        public: LinPublicKey { u, v, h },
        secret: LinSecretKey { x_hat, y_hat },
    }
}

pub fn lin_encrypt<R: RngCore + ?Sized>(
    ctx: &BilinearContext,
    pk: &LinPublicKey,
    m: &GElem,
    rng: &mut R,
) -> (LinCiphertext, LinEphemeral) {
    let beta1 = ctx.random_nonzero_scalar(rng);
    let beta2 = ctx.random_nonzero_scalar(rng);
    let ct = LinCiphertext {
        c_hat: ctx.mul(m, &ctx.exp(&pk.h, &ctx.s_add(&beta1, &beta2))),
        t1: ctx.exp(&pk.u, &beta1),
        t2: ctx.exp(&pk.v, &beta2),
    };
    (ct, LinEphemeral { beta1, beta2 })
}

pub fn lin_decrypt(ctx: &BilinearContext, sk: &LinSecretKey, ct: &LinCiphertext) -> GElem {
    let mask = ctx.mul(&ctx.exp(&ct.t1, &sk.x_hat), &ctx.exp(&ct.t2, &sk.y_hat));
    ctx.div(&ct.c_hat, &mask)
}

/// Proves that `c1` (to recipient `x_pub`) and `c2` (to the Linear key
/// holder) encrypt the same element.
#[allow(clippy::too_many_arguments)]
pub fn enc_proof<R: RngCore + ?Sized>(
    ctx: &BilinearContext,
    c1: &KpCiphertext,
    c2: &LinCiphertext,
    eph: &LinEphemeral,
    y: &Scalar,
    x_pub: &GElem,
    lin: &LinPublicKey,
    rng: &mut R,
) -> DualProof {
    let r_b1 = ctx.random_scalar(rng);
    let r_b2 = ctx.random_scalar(rng);
    let r_y = ctx.random_scalar(rng);
    let r1 = ctx.exp(&lin.u, &r_b1);
    let r2 = ctx.exp(&lin.v, &r_b2);
    // e(h,g)^(a) * e(X,g)^(-b) = e(h^a * X^-b, g)
    let r3 = ctx.pair(
        &ctx.mul(
            &ctx.exp(&lin.h, &ctx.s_add(&r_b1, &r_b2)),
            &ctx.exp(x_pub, &ctx.s_neg(&r_y)),
        ),
        ctx.generator(),
    );
    let c = challenge(ctx, c1, c2, &r1, &r2, &r3, x_pub);
    DualProof {
        s_b1: ctx.s_add(&r_b1, &ctx.s_mul(&c, &eph.beta1)),
        s_b2: ctx.s_add(&r_b2, &ctx.s_mul(&c, &eph.beta2)),
        s_y: ctx.s_add(&r_y, &ctx.s_mul(&c, y)),
        c,
        r1,
        r2,
        r3,
    }
}

pub fn enc_verify(
    ctx: &BilinearContext,
    c1: &KpCiphertext,
    c2: &LinCiphertext,
    proof: &DualProof,
    x_pub: &GElem,
    lin: &LinPublicKey,
) -> bool {
    let neg_c = ctx.s_neg(&proof.c);
    let r1 = ctx.mul(&ctx.exp(&lin.u, &proof.s_b1), &ctx.exp(&c2.t1, &neg_c));
    if r1 != proof.r1 {
        return false;
    }
    let r2 = ctx.mul(&ctx.exp(&lin.v, &proof.s_b2), &ctx.exp(&c2.t2, &neg_c));
    if r2 != proof.r2 {
        return false;
    }
    // e(h,g)^(s_b1+s_b2) * e(X,g)^(-s_y) * e(C/C^, g)^c folded into one pairing
    let base = ctx.mul(
        &ctx.mul(
            &ctx.exp(&lin.h, &ctx.s_add(&proof.s_b1, &proof.s_b2)),
            &ctx.exp(x_pub, &ctx.s_neg(&proof.s_y)),
        ),
        &ctx.exp(&ctx.div(&c1.c, &c2.c_hat), &proof.c),
    );
    if ctx.pair(&base, ctx.generator()) != proof.r3 {
        return false;
    }
    challenge(ctx, c1, c2, &proof.r1, &proof.r2, &proof.r3, x_pub) == proof.c
}

/// `c = H(C1, C2, R1, R2, R3, T1, T2, X)` read as a big-endian integer mod p.
fn challenge(
    ctx: &BilinearContext,
    c1: &KpCiphertext,
    c2: &LinCiphertext,
    r1: &GElem,
    r2: &GElem,
    r3: &GtElem,
    x_pub: &GElem,
) -> Scalar {
    let frame = Frame::untagged()
        .field(&c1.to_bytes(ctx))
        .field(&c2.to_bytes(ctx))
        .field(&ctx.encode_g(r1))
        .field(&ctx.encode_g(r2))
        .field(&ctx.encode_gt(r3))
        .field(&ctx.encode_g(&c2.t1))
        .field(&ctx.encode_g(&c2.t2))
        .field(&ctx.encode_g(x_pub));
    let d = hash_h(frame.as_bytes());
    ctx.scalar(BigUint::from_bytes_be(&d.0))
}

fn scalar_inv(ctx: &BilinearContext, a: &Scalar) -> Scalar {
    let inv = a
        .as_biguint()
        .modinv(ctx.order())
        .expect("nonzero scalar is invertible mod a prime");
    ctx.scalar(inv)
}

/// Splits `bytes` into pieces of the given widths; `None` on any length
/// mismatch.
fn split_fixed<'a>(bytes: &'a [u8], widths: &[usize]) -> Option<Vec<&'a [u8]>> {
    if bytes.len() != widths.iter().sum::<usize>() {
        return None;
    }
    let mut out = Vec::with_capacity(widths.len());
    let mut rest = bytes;
    for w in widths {
        let (head, tail) = rest.split_at(*w);
        out.push(head);
        rest = tail;
    }
    Some(out)
}

const WIDTH: CryptoError = CryptoError::Encoding("fixed-width length");

impl KpCiphertext {
    pub fn encoded_len(ctx: &BilinearContext) -> usize {
        2 * ctx.g_len()
    }

    pub fn to_bytes(&self, ctx: &BilinearContext) -> Vec<u8> {
        [ctx.encode_g(&self.y), ctx.encode_g(&self.c)].concat()
    }

    pub fn from_bytes(ctx: &BilinearContext, bytes: &[u8]) -> Result<Self, CryptoError> {
        let g = ctx.g_len();
        let p = split_fixed(bytes, &[g, g]).ok_or(WIDTH)?;
        Ok(Self {
            y: ctx.decode_g(p[0])?,
            c: ctx.decode_g(p[1])?,
        })
    }
}

impl LinCiphertext {
    pub fn encoded_len(ctx: &BilinearContext) -> usize {
        3 * ctx.g_len()
    }

    pub fn to_bytes(&self, ctx: &BilinearContext) -> Vec<u8> {
        [
            ctx.encode_g(&self.c_hat),
            ctx.encode_g(&self.t1),
            ctx.encode_g(&self.t2),
        ]
        .concat()
    }

    pub fn from_bytes(ctx: &BilinearContext, bytes: &[u8]) -> Result<Self, CryptoError> {
        let g = ctx.g_len();
        let p = split_fixed(bytes, &[g, g, g]).ok_or(WIDTH)?;
        Ok(Self {
            c_hat: ctx.decode_g(p[0])?,
            t1: ctx.decode_g(p[1])?,
            t2: ctx.decode_g(p[2])?,
        })
    }
}

impl LinPublicKey {
    pub fn to_bytes(&self, ctx: &BilinearContext) -> Vec<u8> {
        [ctx.encode_g(&self.u), ctx.encode_g(&self.v), ctx.encode_g(&self.h)].concat()
    }

    pub fn from_bytes(ctx: &BilinearContext, bytes: &[u8]) -> Result<Self, CryptoError> {
        let g = ctx.g_len();
        let p = split_fixed(bytes, &[g, g, g]).ok_or(WIDTH)?;
        let pk = Self {
            u: ctx.decode_g(p[0])?,
            v: ctx.decode_g(p[1])?,
            h: ctx.decode_g(p[2])?,
        };
        if pk.u.is_identity() || pk.v.is_identity() || pk.h.is_identity() {
            return Err(CryptoError::DegenerateKey);
        }
        Ok(pk)
    }
}

impl LinSecretKey {
    pub fn to_bytes(&self, ctx: &BilinearContext) -> Vec<u8> {
        [ctx.encode_scalar(&self.x_hat), ctx.encode_scalar(&self.y_hat)].concat()
    }

    pub fn from_bytes(ctx: &BilinearContext, bytes: &[u8]) -> Result<Self, CryptoError> {
        let s = ctx.scalar_len();
        let p = split_fixed(bytes, &[s, s]).ok_or(WIDTH)?;
        Ok(Self {
            x_hat: ctx.decode_scalar(p[0])?,
            y_hat: ctx.decode_scalar(p[1])?,
        })
    }
}

impl DualProof {
    pub fn encoded_len(ctx: &BilinearContext) -> usize {
        4 * ctx.scalar_len() + 2 * ctx.g_len() + ctx.gt_len()
    }

    pub fn to_bytes(&self, ctx: &BilinearContext) -> Vec<u8> {
        [
            ctx.encode_scalar(&self.c),
            ctx.encode_scalar(&self.s_b1),
            ctx.encode_scalar(&self.s_b2),
            ctx.encode_scalar(&self.s_y),
            ctx.encode_g(&self.r1),
            ctx.encode_g(&self.r2),
            ctx.encode_gt(&self.r3),
        ]
        .concat()
    }

    pub fn from_bytes(ctx: &BilinearContext, bytes: &[u8]) -> Result<Self, CryptoError> {
        let (s, g) = (ctx.scalar_len(), ctx.g_len());
        let p = split_fixed(bytes, &[s, s, s, s, g, g, ctx.gt_len()]).ok_or(WIDTH)?;
        Ok(Self {
            c: ctx.decode_scalar(p[0])?,
            s_b1: ctx.decode_scalar(p[1])?,
            s_b2: ctx.decode_scalar(p[2])?,
            s_y: ctx.decode_scalar(p[3])?,
            r1: ctx.decode_g(p[4])?,
            r2: ctx.decode_g(p[5])?,
            r3: ctx.decode_gt(p[6])?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    struct Fixture {
        ctx: BilinearContext,
        rng: ChaCha20Rng,
        kp: KpKeypair,
        lin: LinKeypair,
    }

    fn fixture(seed: u64) -> Fixture {
        let ctx = BilinearContext::toy();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let kp = kp_keygen(&ctx, &mut rng);
        let lin = lin_keygen(&ctx, &mut rng);
        Fixture { ctx, rng, kp, lin }
    }

    fn honest(f: &mut Fixture, m: &GElem) -> (KpCiphertext, LinCiphertext, DualProof) {
        let (c1, y) = kp_encrypt(&f.ctx, &f.kp.public, m, &mut f.rng);
        let (c2, eph) = lin_encrypt(&f.ctx, &f.lin.public, m, &mut f.rng);
        let pi = enc_proof(&f.ctx, &c1, &c2, &eph, &y, &f.kp.public, &f.lin.public, &mut f.rng);
        (c1, c2, pi)
    }

    #[test]
    fn lin_keys_satisfy_relation() {
        let f = fixture(1);
        let LinKeypair { public: p, secret: s } = &f.lin;
        assert_eq!(f.ctx.exp(&p.u, &s.x_hat), p.h);
        assert_eq!(f.ctx.exp(&p.v, &s.y_hat), p.h);
    }

    #[test]
    fn kp_roundtrip_and_wrong_key() {
        let mut f = fixture(2);
        let m = f.ctx.random_element(&mut f.rng);
        let (c, _) = kp_encrypt(&f.ctx, &f.kp.public, &m, &mut f.rng);
        assert_eq!(kp_decrypt(&f.ctx, &f.kp.x, &c), m);
        let other = kp_keygen(&f.ctx, &mut f.rng);
        assert_ne!(kp_decrypt(&f.ctx, &other.x, &c), m);
        let (c, y) = kp_encrypt(&f.ctx, &f.kp.public, &GElem::identity(), &mut f.rng);
        assert_eq!(c.c, f.ctx.exp(&f.kp.public, &y));
        assert!(kp_decrypt(&f.ctx, &f.kp.x, &c).is_identity());
    }

    #[test]
    fn lin_roundtrip_and_homomorphism() {
        let mut f = fixture(3);
        let ctx = f.ctx.clone();
        let m1 = ctx.random_element(&mut f.rng);
        let m2 = ctx.random_element(&mut f.rng);
        let (a, _) = lin_encrypt(&ctx, &f.lin.public, &m1, &mut f.rng);
        let (b, _) = lin_encrypt(&ctx, &f.lin.public, &m2, &mut f.rng);
        assert_eq!(lin_decrypt(&ctx, &f.lin.secret, &a), m1);
        let prod = LinCiphertext {
            c_hat: ctx.mul(&a.c_hat, &b.c_hat),
            t1: ctx.mul(&a.t1, &b.t1),
            t2: ctx.mul(&a.t2, &b.t2),
        };
        assert_eq!(lin_decrypt(&ctx, &f.lin.secret, &prod), ctx.mul(&m1, &m2));
        let (c, _) = lin_encrypt(&ctx, &f.lin.public, &GElem::identity(), &mut f.rng);
        assert!(lin_decrypt(&ctx, &f.lin.secret, &c).is_identity());
    }

    #[test]
    fn honest_proofs_verify_and_trace_consistently() {
        let mut f = fixture(4);
        for _ in 0..20 {
            let m = f.ctx.random_element(&mut f.rng);
            let (c1, c2, pi) = honest(&mut f, &m);
            assert!(enc_verify(&f.ctx, &c1, &c2, &pi, &f.kp.public, &f.lin.public));
            assert_eq!(
                lin_decrypt(&f.ctx, &f.lin.secret, &c2),
                kp_decrypt(&f.ctx, &f.kp.x, &c1)
            );
        }
    }

    #[test]
    fn mismatched_plaintexts_fail() {
        let mut f = fixture(5);
        let ctx = f.ctx.clone();
        let m = ctx.random_element(&mut f.rng);
        let m2 = ctx.random_element(&mut f.rng);
        let (c1, y) = kp_encrypt(&ctx, &f.kp.public, &m, &mut f.rng);
        let (c2, eph) = lin_encrypt(&ctx, &f.lin.public, &m2, &mut f.rng);
        let pi = enc_proof(&ctx, &c1, &c2, &eph, &y, &f.kp.public, &f.lin.public, &mut f.rng);
        assert!(!enc_verify(&ctx, &c1, &c2, &pi, &f.kp.public, &f.lin.public));
    }

    #[test]
    fn response_and_challenge_mutations_fail() {
        let mut f = fixture(6);
        let ctx = f.ctx.clone();
        let m = ctx.random_element(&mut f.rng);
        let (c1, c2, pi) = honest(&mut f, &m);
        let x = f.kp.public.clone();
        let lin = f.lin.public.clone();
        for field in 0..4 {
            let mut bad = pi.clone();
            let r = ctx.random_scalar(&mut f.rng);
            match field {
                0 => bad.c = ctx.s_add(&bad.c, &Scalar::one()),
                1 => bad.s_b1 = r,
                2 => bad.s_b2 = r,
                _ => bad.s_y = r,
            }
            assert!(!enc_verify(&ctx, &c1, &c2, &bad, &x, &lin), "field {field}");
        }
        let swapped = LinCiphertext {
            c_hat: c2.c_hat.clone(),
            t1: c2.t2.clone(),
            t2: c2.t1.clone(),
        };
        assert!(!enc_verify(&ctx, &c1, &swapped, &pi, &x, &lin));
        // the proof is bound to the recipient key
        let other = kp_keygen(&ctx, &mut f.rng);
        assert!(!enc_verify(&ctx, &c1, &c2, &pi, &other.public, &lin));
    }

    #[test]
    fn challenge_order_is_fixed() {
        let mut f = fixture(7);
        let ctx = f.ctx.clone();
        let m = ctx.random_element(&mut f.rng);
        let (c1, c2, pi) = honest(&mut f, &m);
        let permuted = Frame::untagged()
            .field(&c2.to_bytes(&ctx))
            .field(&c1.to_bytes(&ctx))
            .field(&ctx.encode_g(&pi.r1))
            .field(&ctx.encode_g(&pi.r2))
            .field(&ctx.encode_gt(&pi.r3))
            .field(&ctx.encode_g(&c2.t1))
            .field(&ctx.encode_g(&c2.t2))
            .field(&ctx.encode_g(&f.kp.public));
        let c = ctx.scalar(BigUint::from_bytes_be(&hash_h(permuted.as_bytes()).0));
        assert_ne!(c, pi.c);
    }

    #[test]
    fn encodings_roundtrip_and_are_fixed_width() {
        let mut f = fixture(8);
        let ctx = f.ctx.clone();
        let m = ctx.random_element(&mut f.rng);
        let (c1, c2, pi) = honest(&mut f, &m);
        let pb = pi.to_bytes(&ctx);
        assert_eq!(pb.len(), DualProof::encoded_len(&ctx));
        assert_eq!(DualProof::from_bytes(&ctx, &pb).unwrap(), pi);
        assert_eq!(KpCiphertext::from_bytes(&ctx, &c1.to_bytes(&ctx)).unwrap(), c1);
        assert_eq!(LinCiphertext::from_bytes(&ctx, &c2.to_bytes(&ctx)).unwrap(), c2);
        let lp = &f.lin.public;
        assert_eq!(LinPublicKey::from_bytes(&ctx, &lp.to_bytes(&ctx)).unwrap(), *lp);
        let ls = &f.lin.secret;
        assert_eq!(LinSecretKey::from_bytes(&ctx, &ls.to_bytes(&ctx)).unwrap(), *ls);
        assert!(DualProof::from_bytes(&ctx, &pb[1..]).is_err());
    }
}
