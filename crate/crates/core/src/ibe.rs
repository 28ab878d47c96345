//! Boneh-Franklin identity-based encryption.
//!
//! [`ibe_encrypt`] / [`ibe_decrypt`] are the basic scheme over a 128-bit
//! message space. [`IbeMode::FullIdent`] adds the Fujisaki-Okamoto
//! transform for callers that want chosen-ciphertext security, and
//! [`ibe_seal`] / [`ibe_open`] carry payloads wider than 128 bits by
//! encrypting a fresh symmetric key.

use rand::RngCore;
use thiserror::Error;

use crate::codec::{CodecError, FieldReader, FieldWriter, LenWidth};
use crate::crypto::{
    hash_h1, hash_h2, sym_decrypt, sym_encrypt, Backend, BilinearContext, CryptoError, Frame,
    GElem, Scalar, SymKey, H2_LEN,
};

/// Width of the message space in bytes (`n = 128` bits).
pub const IBE_MSG_LEN: usize = H2_LEN;

const PARAMS_FORMAT: u8 = 0x01;
const MASTER_FORMAT: u8 = 0x02;
const PRIVATE_FORMAT: u8 = 0x03;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IbeError {
    #[error("identity must be non-empty")]
    EmptyIdentity,
    #[error("message must be exactly {IBE_MSG_LEN} bytes, got {0}")]
    MessageWidth(usize),
    #[error("ciphertext U component is the identity")]
    DegenerateCiphertext,
    #[error("ciphertext failed the validity check")]
    InvalidCiphertext,
    #[error("unsupported format tag {0:#04x}")]
    Format(u8),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum IbeMode {
    /// The scheme exactly as written: `(g^r, M xor H2(g_ID^r))`.
    #[default]
    Basic,
    /// Fujisaki-Okamoto strengthening with re-encryption check.
    FullIdent,
}

/// `{p, G, G_T, e, n, g, G_pub, H1, H2}`; everything but `G_pub` lives in
/// the bilinear context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IbeParams {
    ctx: BilinearContext,
    g_pub: GElem,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IbeMasterKey {
    s: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IbePrivateKey {
    id: Vec<u8>,
    d: GElem,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IbeCiphertext {
    pub u: GElem,
    pub v: [u8; IBE_MSG_LEN],
    /// Masked message under [`IbeMode::FullIdent`]; absent in basic mode.
    pub w: Option<[u8; IBE_MSG_LEN]>,
}

/// A payload of any length carried under an IBE-encrypted session key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SealedPayload {
    pub key: IbeCiphertext,
    pub body: Vec<u8>,
}

pub fn ibe_setup<R: RngCore + ?Sized>(backend: Backend, rng: &mut R) -> (IbeParams, IbeMasterKey) {
    ibe_setup_with(BilinearContext::new(backend), rng)
}

pub fn ibe_setup_with<R: RngCore + ?Sized>(
    ctx: BilinearContext,
    rng: &mut R,
) -> (IbeParams, IbeMasterKey) {
    let s = ctx.random_nonzero_scalar(rng);
    let g_pub = ctx.exp_g(&s);
    (IbeParams { ctx, g_pub }, IbeMasterKey { s })
}

pub fn ibe_extract(
    params: &IbeParams,
    msk: &IbeMasterKey,
    id: &[u8],
) -> Result<IbePrivateKey, IbeError> {
    if id.is_empty() {
        return Err(IbeError::EmptyIdentity);
    }
    let q_id = hash_h1(&params.ctx, id)?;
    Ok(IbePrivateKey {
        id: id.to_vec(),
        d: params.ctx.exp(&q_id, &msk.s),
    })
}

pub fn ibe_encrypt<R: RngCore + ?Sized>(
    params: &IbeParams,
    id: &[u8],
    m: &[u8],
    rng: &mut R,
) -> Result<IbeCiphertext, IbeError> {
    ibe_encrypt_mode(params, id, m, IbeMode::Basic, rng)
}

pub fn ibe_encrypt_mode<R: RngCore + ?Sized>(
    params: &IbeParams,
    id: &[u8],
    m: &[u8],
    mode: IbeMode,
    rng: &mut R,
) -> Result<IbeCiphertext, IbeError> {
    let m: [u8; IBE_MSG_LEN] = m.try_into().map_err(|_| IbeError::MessageWidth(m.len()))?;
    if id.is_empty() {
        return Err(IbeError::EmptyIdentity);
    }
    let ctx = &params.ctx;
    let g_id = ctx.pair(&hash_h1(ctx, id)?, &params.g_pub);
    match mode {
        IbeMode::Basic => {
            let r = ctx.random_nonzero_scalar(rng);
            let mask = hash_h2(ctx, &ctx.gt_exp(&g_id, &r));
            Ok(IbeCiphertext {
                u: ctx.exp_g(&r),
                v: xor16(&m, &mask),
                w: None,
            })
        }
        IbeMode::FullIdent => {
            let mut sigma = [0u8; IBE_MSG_LEN];
            rng.fill_bytes(&mut sigma);
            let r = fo_scalar(ctx, &sigma, &m);
            let mask = hash_h2(ctx, &ctx.gt_exp(&g_id, &r));
            Ok(IbeCiphertext {
                u: ctx.exp_g(&r),
                v: xor16(&sigma, &mask),
                w: Some(xor16(&m, &fo_mask(&sigma))),
            })
        }
    }
}

pub fn ibe_decrypt(
    params: &IbeParams,
    sk: &IbePrivateKey,
    c: &IbeCiphertext,
) -> Result<[u8; IBE_MSG_LEN], IbeError> {
    if c.u.is_identity() {
        return Err(IbeError::DegenerateCiphertext);
    }
    let ctx = &params.ctx;
    let mask = hash_h2(ctx, &ctx.pair(&sk.d, &c.u));
    let first = xor16(&c.v, &mask);
    match &c.w {
        None => Ok(first),
        Some(w) => {
            let m = xor16(w, &fo_mask(&first));
            let r = fo_scalar(ctx, &first, &m);
            if ctx.exp_g(&r) == c.u {
                Ok(m)
            } else {
                Err(IbeError::InvalidCiphertext)
            }
        }
    }
}

/// Hybrid encryption of an arbitrary payload to `id`.
pub fn ibe_seal<R: RngCore + ?Sized>(
    params: &IbeParams,
    id: &[u8],
    payload: &[u8],
    rng: &mut R,
) -> Result<SealedPayload, IbeError> {
    let k = SymKey::random(rng);
    let key = ibe_encrypt(params, id, &k.0, rng)?;
    let body = sym_encrypt(&k, payload, rng);
    Ok(SealedPayload { key, body })
}

pub fn ibe_open(
    params: &IbeParams,
    sk: &IbePrivateKey,
    sealed: &SealedPayload,
) -> Result<Vec<u8>, IbeError> {
    let k = SymKey(ibe_decrypt(params, sk, &sealed.key)?);
    Ok(sym_decrypt(&k, &sealed.body)?)
}

fn fo_scalar(ctx: &BilinearContext, sigma: &[u8], m: &[u8]) -> Scalar {
    crate::crypto::hash_to_scalar(ctx, &Frame::new(b"H3").field(sigma).field(m))
}

fn fo_mask(sigma: &[u8]) -> [u8; IBE_MSG_LEN] {
    let d = Frame::new(b"H4").field(sigma).digest();
    d.0[..IBE_MSG_LEN].try_into().expect("digest is wider than n")
}

fn xor16(a: &[u8; IBE_MSG_LEN], b: &[u8; IBE_MSG_LEN]) -> [u8; IBE_MSG_LEN] {
    std::array::from_fn(|i| a[i] ^ b[i])
}

impl IbeParams {
    pub fn ctx(&self) -> &BilinearContext {
        &self.ctx
    }

    pub fn g_pub(&self) -> &GElem {
        &self.g_pub
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = FieldWriter::new(LenWidth::U32);
        w.raw(&[PARAMS_FORMAT, self.ctx.backend().tag()]);
        w.field(&self.ctx.encode_g(&self.g_pub));
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IbeError> {
        let mut r = FieldReader::new(LenWidth::U32, bytes);
        let head = r.raw(2)?;
        if head[0] != PARAMS_FORMAT {
            return Err(IbeError::Format(head[0]));
        }
        let backend = Backend::from_tag(head[1]).ok_or(IbeError::Format(head[1]))?;
        let ctx = BilinearContext::new(backend);
        let g_pub = ctx.decode_g(r.field()?)?;
        r.finish()?;
        if g_pub.is_identity() {
            return Err(IbeError::Crypto(CryptoError::DegenerateKey));
        }
        Ok(Self { ctx, g_pub })
    }

    pub fn encode_ciphertext(&self, c: &IbeCiphertext) -> Vec<u8> {
        let mut out = self.ctx.encode_g(&c.u);
        out.extend_from_slice(&c.v);
        if let Some(w) = &c.w {
            out.extend_from_slice(w);
        }
        out
    }

    /// Inverse of [`IbeParams::encode_ciphertext`]; the mode follows from
    /// the length.
    pub fn decode_ciphertext(&self, bytes: &[u8]) -> Result<IbeCiphertext, IbeError> {
        let g = self.ctx.g_len();
        let w = match bytes.len().checked_sub(g + IBE_MSG_LEN) {
            Some(0) => None,
            Some(IBE_MSG_LEN) => Some(take16(&bytes[g + IBE_MSG_LEN..])),
            _ => return Err(IbeError::Crypto(CryptoError::Encoding("IBE ciphertext length"))),
        };
        Ok(IbeCiphertext {
            u: self.ctx.decode_g(&bytes[..g])?,
            v: take16(&bytes[g..g + IBE_MSG_LEN]),
            w,
        })
    }

    /// Basic-mode key ciphertext followed by the symmetric body.
    pub fn encode_sealed(&self, s: &SealedPayload) -> Vec<u8> {
        let mut out = self.encode_ciphertext(&s.key);
        out.extend_from_slice(&s.body);
        out
    }

    pub fn decode_sealed(&self, bytes: &[u8]) -> Result<SealedPayload, IbeError> {
        let head = self.ctx.g_len() + IBE_MSG_LEN;
        if bytes.len() < head {
            return Err(IbeError::Crypto(CryptoError::Encoding("sealed payload length")));
        }
        Ok(SealedPayload {
            key: self.decode_ciphertext(&bytes[..head])?,
            body: bytes[head..].to_vec(),
        })
    }
}

fn take16(b: &[u8]) -> [u8; IBE_MSG_LEN] {
    b.try_into().expect("caller sliced 16 bytes")
}

impl IbeMasterKey {
    /// `g^s`, for checking a master key against its parameters.
    pub fn public(&self, ctx: &BilinearContext) -> GElem {
        ctx.exp_g(&self.s)
    }

    pub fn to_bytes(&self, ctx: &BilinearContext) -> Vec<u8> {
        let mut w = FieldWriter::new(LenWidth::U32);
        w.raw(&[MASTER_FORMAT]);
        w.field(&ctx.encode_scalar(&self.s));
        w.finish()
    }

    pub fn from_bytes(ctx: &BilinearContext, bytes: &[u8]) -> Result<Self, IbeError> {
        let mut r = FieldReader::new(LenWidth::U32, bytes);
        let tag = r.raw(1)?[0];
        if tag != MASTER_FORMAT {
            return Err(IbeError::Format(tag));
        }
        let s = ctx.decode_scalar(r.field()?)?;
        r.finish()?;
        if s.is_zero() {
            return Err(IbeError::Crypto(CryptoError::DegenerateKey));
        }
        Ok(Self { s })
    }
}

impl IbePrivateKey {
    pub fn id(&self) -> &[u8] {
        &self.id
    }

    pub fn element(&self) -> &GElem {
        &self.d
    }

    /// Builds a key from raw parts; pair with [`IbePrivateKey::is_valid`].
    pub fn from_parts(id: Vec<u8>, d: GElem) -> Self {
        Self { id, d }
    }

    /// `e(d_ID, g) == e(H1(ID), G_pub)`, checkable without the master key.
    pub fn is_valid(&self, params: &IbeParams) -> bool {
        let ctx = &params.ctx;
        let Ok(q_id) = hash_h1(ctx, &self.id) else {
            return false;
        };
        ctx.pair(&self.d, ctx.generator()) == ctx.pair(&q_id, &params.g_pub)
    }

    pub fn to_bytes(&self, ctx: &BilinearContext) -> Vec<u8> {
        let mut w = FieldWriter::new(LenWidth::U32);
        w.raw(&[PRIVATE_FORMAT]);
        w.field(&self.id).field(&ctx.encode_g(&self.d));
        w.finish()
    }

    pub fn from_bytes(ctx: &BilinearContext, bytes: &[u8]) -> Result<Self, IbeError> {
        let mut r = FieldReader::new(LenWidth::U32, bytes);
        let tag = r.raw(1)?[0];
        if tag != PRIVATE_FORMAT {
            return Err(IbeError::Format(tag));
        }
        let id = r.field()?.to_vec();
        let d = ctx.decode_g(r.field()?)?;
        r.finish()?;
        Ok(Self { id, d })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup(seed: u64) -> (IbeParams, IbeMasterKey, ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (p, m) = ibe_setup(Backend::Toy, &mut rng);
        (p, m, rng)
    }

    #[test]
    fn setup_is_deterministic_per_seed() {
        let (p1, m1, _) = setup(3);
        let (p2, m2, _) = setup(3);
        assert_eq!(p1, p2);
        assert_eq!(m1, m2);
        assert_eq!(m1.public(p1.ctx()), *p1.g_pub());
    }

    #[test]
    fn extract_is_deterministic_and_valid() {
        let (p, m, _) = setup(4);
        let a = ibe_extract(&p, &m, b"alice").unwrap();
        let b = ibe_extract(&p, &m, b"alice").unwrap();
        assert_eq!(a, b);
        assert!(a.is_valid(&p));
        assert_eq!(ibe_extract(&p, &m, b""), Err(IbeError::EmptyIdentity));
    }

    #[test]
    fn extracted_key_satisfies_master_relation() {
        let (p, m, _) = setup(5);
        let ctx = p.ctx();
        let q = hash_h1(ctx, b"x").unwrap();
        let lhs = ctx.pair(&q, p.g_pub());
        let rhs = ctx.gt_exp(&ctx.pair(&q, ctx.generator()), &m.s);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn roundtrip_both_modes() {
        let (p, m, mut rng) = setup(6);
        let sk = ibe_extract(&p, &m, b"bob").unwrap();
        for mode in [IbeMode::Basic, IbeMode::FullIdent] {
            let mut msg = [0u8; 16];
            rng.fill_bytes(&mut msg);
            let c = ibe_encrypt_mode(&p, b"bob", &msg, mode, &mut rng).unwrap();
            assert_eq!(ibe_decrypt(&p, &sk, &c).unwrap(), msg);
        }
    }

    #[test]
    fn full_ident_rejects_mauled_ciphertext() {
        let (p, m, mut rng) = setup(7);
        let sk = ibe_extract(&p, &m, b"bob").unwrap();
        let mut c = ibe_encrypt_mode(&p, b"bob", &[9u8; 16], IbeMode::FullIdent, &mut rng).unwrap();
        c.w.as_mut().unwrap()[0] ^= 1;
        assert_eq!(ibe_decrypt(&p, &sk, &c), Err(IbeError::InvalidCiphertext));
    }

    #[test]
    fn wrong_width_and_degenerate_inputs() {
        let (p, m, mut rng) = setup(8);
        assert_eq!(
            ibe_encrypt(&p, b"id", &[0u8; 15], &mut rng),
            Err(IbeError::MessageWidth(15))
        );
        let sk = ibe_extract(&p, &m, b"id").unwrap();
        let c = IbeCiphertext {
            u: GElem::identity(),
            v: [0; 16],
            w: None,
        };
        assert_eq!(ibe_decrypt(&p, &sk, &c), Err(IbeError::DegenerateCiphertext));
    }

    #[test]
    fn fresh_randomness_per_encryption() {
        let (p, _, mut rng) = setup(9);
        let a = ibe_encrypt(&p, b"id", &[1u8; 16], &mut rng).unwrap();
        let b = ibe_encrypt(&p, b"id", &[1u8; 16], &mut rng).unwrap();
        assert_ne!(a.u, b.u);
    }

    #[test]
    fn sealed_payload_roundtrip() {
        let (p, m, mut rng) = setup(10);
        let sk = ibe_extract(&p, &m, b"carol").unwrap();
        let payload = vec![0xabu8; 300];
        let s = ibe_seal(&p, b"carol", &payload, &mut rng).unwrap();
        assert_eq!(ibe_open(&p, &sk, &s).unwrap(), payload);
        let other = ibe_extract(&p, &m, b"dave").unwrap();
        assert!(ibe_open(&p, &other, &s).is_err());
    }

    #[test]
    fn ciphertexts_serialize() {
        let (p, m, mut rng) = setup(12);
        let sk = ibe_extract(&p, &m, b"fay").unwrap();
        for mode in [IbeMode::Basic, IbeMode::FullIdent] {
            let c = ibe_encrypt_mode(&p, b"fay", &[3u8; 16], mode, &mut rng).unwrap();
            let back = p.decode_ciphertext(&p.encode_ciphertext(&c)).unwrap();
            assert_eq!(back, c);
        }
        let s = ibe_seal(&p, b"fay", b"payload", &mut rng).unwrap();
        let back = p.decode_sealed(&p.encode_sealed(&s)).unwrap();
        assert_eq!(ibe_open(&p, &sk, &back).unwrap(), b"payload");
        assert!(p.decode_ciphertext(&[0u8; 5]).is_err());
    }

    #[test]
    fn key_material_serializes() {
        let (p, m, _) = setup(11);
        let sk = ibe_extract(&p, &m, b"erin").unwrap();
        let ctx = p.ctx();
        assert_eq!(IbeParams::from_bytes(&p.to_bytes()).unwrap(), p);
        assert_eq!(IbeMasterKey::from_bytes(ctx, &m.to_bytes(ctx)).unwrap(), m);
        assert_eq!(IbePrivateKey::from_bytes(ctx, &sk.to_bytes(ctx)).unwrap(), sk);
        let mut bad = p.to_bytes();
        bad[0] = 0x7f;
        assert_eq!(IbeParams::from_bytes(&bad), Err(IbeError::Format(0x7f)));
    }
}
