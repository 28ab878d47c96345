//! The symmetric bilinear group `e: G x G -> G_T` used by every protocol.
//!
//! Two parameter sets ship with the crate:
//!
//! * [`Backend::Toy`]: a 160-bit base field. Bilinear and fast, with no
//!   meaningful security. Used by the bulk of the test suite.
//! * [`Backend::Standard`]: a 512-bit base field (1024-bit `G_T`), the
//!   usual strength for embedding-degree-2 curves.
//!
//! Both are the same curve family, so every algorithm above this module is
//! backend-agnostic and the same primitive suite runs against both.
//!
//! Group notation follows the protocols: `G` is written multiplicatively
//! (`mul`, `exp`, `div`) even though it is an elliptic-curve group.

use std::fmt;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::RngCore;

use super::curve::{Affine, Curve};
use super::field::Fq2;
use super::hash::{expand, Frame};
use super::CryptoError;

const TOY_ORDER: &str = "2800000000000000000000000000000000004477";
const TOY_Q: &str = "a0000000000000000000000000000000000111db";
const STANDARD_ORDER: &str = "280000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000456f1";
const STANDARD_Q: &str = "a0000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000115bc3";

/// Try-and-increment budget for hashing and embedding into `G`.
pub const MAX_TRIES: u32 = 255;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    Toy,
    Standard,
}

impl Backend {
    pub fn tag(self) -> u8 {
        match self {
            Backend::Toy => 1,
            Backend::Standard => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(Backend::Toy),
            2 => Some(Backend::Standard),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Backend::Toy => "toy",
            Backend::Standard => "standard",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = CryptoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "toy" => Ok(Backend::Toy),
            "standard" => Ok(Backend::Standard),
            other => Err(CryptoError::UnknownBackend(other.to_string())),
        }
    }
}

/// An element of `G`. `None` inside is the identity.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GElem(pub(crate) Option<Affine>);

impl GElem {
    pub fn identity() -> Self {
        GElem(None)
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_none()
    }
}

impl fmt::Debug for GElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            None => write!(f, "G(1)"),
            Some(a) => write!(f, "G({:x}, {:x})", a.x, a.y),
        }
    }
}

/// An element of the order-`p` subgroup of `F_{q^2}^*`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GtElem(pub(crate) Fq2);

impl GtElem {
    pub fn one() -> Self {
        GtElem(Fq2::one())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }
}

impl fmt::Debug for GtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GT({:x} + {:x}i)", self.0.re, self.0.im)
    }
}

/// An integer modulo the group order `p`, always reduced.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar(pub(crate) BigUint);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(BigUint::zero())
    }

    pub fn one() -> Self {
        Scalar(BigUint::one())
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({:x})", self.0)
    }
}

/// Public description of the bilinear group plus the arithmetic on it.
#[derive(Clone)]
pub struct BilinearContext {
    backend: Backend,
    curve: Curve,
    g: GElem,
    egg: GtElem,
    field_len: usize,
    scalar_len: usize,
    embed_capacity: usize,
}

impl fmt::Debug for BilinearContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BilinearContext")
            .field("backend", &self.backend)
            .field("order_bits", &self.curve.order.bits())
            .finish()
    }
}

impl PartialEq for BilinearContext {
    fn eq(&self, other: &Self) -> bool {
        self.backend == other.backend
    }
}

impl Eq for BilinearContext {}

impl BilinearContext {
    pub fn new(backend: Backend) -> Self {
        let (order, q) = match backend {
            Backend::Toy => (TOY_ORDER, TOY_Q),
            Backend::Standard => (STANDARD_ORDER, STANDARD_Q),
        };
        let order = BigUint::parse_bytes(order.as_bytes(), 16).expect("valid constant");
        let q = BigUint::parse_bytes(q.as_bytes(), 16).expect("valid constant");
        let field_len = q.bits().div_ceil(8) as usize;
        let scalar_len = order.bits().div_ceil(8) as usize;
        // x carries the payload followed by one counter byte and must stay below q
        let embed_capacity = ((q.bits() - 1) / 8) as usize - 1;
        let curve = Curve::new(q, order);
        let mut ctx = Self {
            backend,
            curve,
            g: GElem::identity(),
            egg: GtElem::one(),
            field_len,
            scalar_len,
            embed_capacity,
        };
        ctx.g = ctx
            .hash_to_group(b"graad generator", backend.name().as_bytes())
            .expect("generator derivation succeeds");
        ctx.egg = ctx.pair(&ctx.g, &ctx.g);
        ctx
    }

    pub fn toy() -> Self {
        Self::new(Backend::Toy)
    }

    pub fn standard() -> Self {
        Self::new(Backend::Standard)
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// The prime group order `p`.
    pub fn order(&self) -> &BigUint {
        &self.curve.order
    }

    /// The base field modulus `q`.
    pub fn field_modulus(&self) -> &BigUint {
        &self.curve.f.q
    }

    pub fn generator(&self) -> &GElem {
        &self.g
    }

    /// `e(g, g)`, cached.
    pub fn gt_generator(&self) -> &GtElem {
        &self.egg
    }

    pub fn scalar_len(&self) -> usize {
        self.scalar_len
    }

    pub fn g_len(&self) -> usize {
        1 + self.field_len
    }

    pub fn gt_len(&self) -> usize {
        2 * self.field_len
    }

    /// Bytes that [`BilinearContext::embed`] can carry in one element.
    pub fn embed_capacity(&self) -> usize {
        self.embed_capacity
    }

    // ---- scalars ----

    pub fn scalar(&self, v: BigUint) -> Scalar {
        Scalar(v % self.order())
    }

    pub fn scalar_u64(&self, v: u64) -> Scalar {
        self.scalar(BigUint::from(v))
    }

    pub fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        Scalar(rng.gen_biguint_below(self.order()))
    }

    /// Uniform in `[1, p)`.
    pub fn random_nonzero_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        let upper = self.order() - 1u32;
        Scalar(rng.gen_biguint_below(&upper) + 1u32)
    }

    pub fn s_add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.scalar(&a.0 + &b.0)
    }

    pub fn s_sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        if a.0 >= b.0 {
            Scalar(&a.0 - &b.0)
        } else {
            Scalar(self.order() - &b.0 + &a.0)
        }
    }

    pub fn s_mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.scalar(&a.0 * &b.0)
    }

    pub fn s_neg(&self, a: &Scalar) -> Scalar {
        self.s_sub(&Scalar::zero(), a)
    }

    // ---- G ----

    pub fn mul(&self, a: &GElem, b: &GElem) -> GElem {
        GElem(self.curve.add(&a.0, &b.0))
    }

    pub fn inv(&self, a: &GElem) -> GElem {
        GElem(self.curve.neg(&a.0))
    }

    pub fn div(&self, a: &GElem, b: &GElem) -> GElem {
        self.mul(a, &self.inv(b))
    }

    pub fn exp(&self, a: &GElem, k: &Scalar) -> GElem {
        GElem(self.curve.mul(&a.0, &k.0))
    }

    /// `g^k`.
    pub fn exp_g(&self, k: &Scalar) -> GElem {
        self.exp(&self.g, k)
    }

    pub fn random_element<R: RngCore + ?Sized>(&self, rng: &mut R) -> GElem {
        self.exp_g(&self.random_nonzero_scalar(rng))
    }

    /// Membership in the prime-order subgroup.
    pub fn is_in_group(&self, a: &GElem) -> bool {
        match &a.0 {
            None => true,
            Some(p) => self.curve.on_curve(p) && self.curve.mul(&a.0, self.order()).is_none(),
        }
    }

    // ---- G_T ----

    pub fn pair(&self, a: &GElem, b: &GElem) -> GtElem {
        GtElem(self.curve.pairing(&a.0, &b.0))
    }

    pub fn gt_mul(&self, a: &GtElem, b: &GtElem) -> GtElem {
        GtElem(self.curve.f.f2_mul(&a.0, &b.0))
    }

    /// Inverse in `G_T`; elements have norm one, so this is conjugation.
    pub fn gt_inv(&self, a: &GtElem) -> GtElem {
        GtElem(self.curve.f.f2_conj(&a.0))
    }

    pub fn gt_div(&self, a: &GtElem, b: &GtElem) -> GtElem {
        self.gt_mul(a, &self.gt_inv(b))
    }

    pub fn gt_exp(&self, a: &GtElem, k: &Scalar) -> GtElem {
        GtElem(self.curve.f.f2_pow(&a.0, &k.0))
    }

    pub fn is_in_gt(&self, a: &GtElem) -> bool {
        let f = &self.curve.f;
        a.0.re < f.q && a.0.im < f.q && f.f2_pow(&a.0, self.order()).is_one()
    }

    // ---- encodings ----

    pub fn encode_scalar(&self, s: &Scalar) -> Vec<u8> {
        to_fixed(&s.0, self.scalar_len)
    }

    pub fn decode_scalar(&self, bytes: &[u8]) -> Result<Scalar, CryptoError> {
        if bytes.len() != self.scalar_len {
            return Err(CryptoError::Encoding("scalar width"));
        }
        let v = BigUint::from_bytes_be(bytes);
        if &v >= self.order() {
            return Err(CryptoError::Encoding("scalar not reduced"));
        }
        Ok(Scalar(v))
    }

    /// Compressed encoding: `0x00 || 0..0` for the identity, otherwise
    /// `0x02 | parity(y) || x`.
    pub fn encode_g(&self, a: &GElem) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.g_len());
        match &a.0 {
            None => {
                out.push(0);
                out.extend(std::iter::repeat_n(0u8, self.field_len));
            }
            Some(p) => {
                out.push(if p.y.bit(0) { 3 } else { 2 });
                out.extend(to_fixed(&p.x, self.field_len));
            }
        }
        out
    }

    /// Decodes and checks subgroup membership.
    pub fn decode_g(&self, bytes: &[u8]) -> Result<GElem, CryptoError> {
        if bytes.len() != self.g_len() {
            return Err(CryptoError::Encoding("group element width"));
        }
        let (tag, xb) = (bytes[0], &bytes[1..]);
        if tag == 0 {
            return if xb.iter().all(|b| *b == 0) {
                Ok(GElem::identity())
            } else {
                Err(CryptoError::Encoding("malformed identity"))
            };
        }
        if tag != 2 && tag != 3 {
            return Err(CryptoError::Encoding("group element tag"));
        }
        let x = BigUint::from_bytes_be(xb);
        let p = self
            .point_from_x(&x, tag == 3)
            .ok_or(CryptoError::Encoding("not on curve"))?;
        let elem = GElem(Some(p));
        if !self.is_in_group(&elem) {
            return Err(CryptoError::Encoding("not in prime-order subgroup"));
        }
        Ok(elem)
    }

    pub fn encode_gt(&self, a: &GtElem) -> Vec<u8> {
        let mut out = to_fixed(&a.0.re, self.field_len);
        out.extend(to_fixed(&a.0.im, self.field_len));
        out
    }

    pub fn decode_gt(&self, bytes: &[u8]) -> Result<GtElem, CryptoError> {
        if bytes.len() != self.gt_len() {
            return Err(CryptoError::Encoding("target element width"));
        }
        let (re, im) = bytes.split_at(self.field_len);
        let elem = GtElem(Fq2 {
            re: BigUint::from_bytes_be(re),
            im: BigUint::from_bytes_be(im),
        });
        if !self.is_in_gt(&elem) {
            return Err(CryptoError::Encoding("not in target subgroup"));
        }
        Ok(elem)
    }

    fn point_from_x(&self, x: &BigUint, odd: bool) -> Option<Affine> {
        if x >= self.field_modulus() {
            return None;
        }
        let rhs = self.curve.rhs(x);
        let y = self.curve.f.sqrt(&rhs)?;
        let y = if y.bit(0) == odd {
            y
        } else {
            self.curve.f.neg(&y)
        };
        if y.bit(0) != odd {
            // y == 0 has no odd representative
            return None;
        }
        Some(Affine { x: x.clone(), y })
    }

    /// Try-and-increment hash into `G*`: hash a counter-suffixed input to an
    /// x-coordinate, lift, clear the cofactor.
    pub fn hash_to_group(&self, domain: &[u8], data: &[u8]) -> Result<GElem, CryptoError> {
        let wide = self.field_len + 16;
        for ctr in 0..=MAX_TRIES {
            let frame = Frame::new(domain).field(data).field(&[ctr as u8]);
            let bytes = expand(frame.as_bytes(), wide + 1);
            let x = BigUint::from_bytes_be(&bytes[..wide]) % self.field_modulus();
            if x.is_zero() {
                continue;
            }
            let Some(p) = self.point_from_x(&x, bytes[wide] & 1 == 1) else {
                continue;
            };
            let cleared = self.curve.mul(&Some(p), &self.curve.cofactor);
            if cleared.is_some() {
                return Ok(GElem(cleared));
            }
        }
        Err(CryptoError::HashToGroupExhausted)
    }

    /// Injective encoding of up to `embed_capacity()` bytes into `G`.
    ///
    /// The payload sits in the high bytes of the x-coordinate followed by a
    /// counter byte that is bumped until the point lands in the subgroup.
    pub fn embed(&self, data: &[u8]) -> Result<GElem, CryptoError> {
        if data.len() > self.embed_capacity {
            return Err(CryptoError::EmbedTooLong {
                len: data.len(),
                capacity: self.embed_capacity,
            });
        }
        let mut xb = vec![0u8; self.embed_capacity + 1];
        xb[self.embed_capacity - data.len()..self.embed_capacity].copy_from_slice(data);
        for ctr in 0..=MAX_TRIES {
            xb[self.embed_capacity] = ctr as u8;
            let x = BigUint::from_bytes_be(&xb);
            let Some(p) = self.point_from_x(&x, false) else {
                continue;
            };
            let elem = GElem(Some(p));
            if self.is_in_group(&elem) {
                return Ok(elem);
            }
        }
        Err(CryptoError::HashToGroupExhausted)
    }

    /// Inverse of [`BilinearContext::embed`]; returns `embed_capacity()`
    /// bytes (left-padded with zeros).
    pub fn unembed(&self, elem: &GElem) -> Result<Vec<u8>, CryptoError> {
        let p = elem.0.as_ref().ok_or(CryptoError::Encoding("identity carries no payload"))?;
        let x = to_fixed(&p.x, self.field_len);
        let used = self.embed_capacity + 1;
        let (high, low) = x.split_at(self.field_len - used);
        if high.iter().any(|b| *b != 0) {
            return Err(CryptoError::Encoding("not an embedded payload"));
        }
        Ok(low[..self.embed_capacity].to_vec())
    }
}

/// Fixed-width big-endian encoding.
pub(crate) fn to_fixed(v: &BigUint, len: usize) -> Vec<u8> {
    let raw = v.to_bytes_be();
    let raw: &[u8] = if v.is_zero() { &[] } else { &raw };
    assert!(raw.len() <= len, "value wider than its fixed encoding");
    let mut out = vec![0u8; len - raw.len()];
    out.extend_from_slice(raw);
    out
}
