//! Prime-field and quadratic-extension arithmetic for the pairing curve.
//!
//! `F_q` elements are plain `BigUint`s kept in `[0, q)`. `F_{q^2}` is
//! `F_q[i] / (i^2 + 1)`, which is a field because `q = 3 (mod 4)`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

#[derive(Clone, Debug)]
pub(crate) struct Fq {
    pub(crate) q: BigUint,
    /// (q + 1) / 4, the square-root exponent.
    sqrt_exp: BigUint,
}

impl Fq {
    pub(crate) fn new(q: BigUint) -> Self {
        let sqrt_exp = (&q + 1u32) >> 2;
        Self { q, sqrt_exp }
    }

    #[inline]
    pub(crate) fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if s >= self.q {
            s - &self.q
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.q - b + a
        }
    }

    #[inline]
    pub(crate) fn neg(&self, a: &BigUint) -> BigUint {
        if a.is_zero() {
            BigUint::zero()
        } else {
            &self.q - a
        }
    }

    #[inline]
    pub(crate) fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.q
    }

    #[inline]
    pub(crate) fn sqr(&self, a: &BigUint) -> BigUint {
        (a * a) % &self.q
    }

    #[inline]
    pub(crate) fn dbl(&self, a: &BigUint) -> BigUint {
        self.add(a, a)
    }

    pub(crate) fn small(&self, a: &BigUint, k: u32) -> BigUint {
        (a * k) % &self.q
    }

    pub(crate) fn inv(&self, a: &BigUint) -> Option<BigUint> {
        a.modinv(&self.q)
    }

    /// Square root for `q = 3 (mod 4)`; `None` for non-residues.
    pub(crate) fn sqrt(&self, a: &BigUint) -> Option<BigUint> {
        let r = a.modpow(&self.sqrt_exp, &self.q);
        if self.sqr(&r) == *a {
            Some(r)
        } else {
            None
        }
    }
}

/// An element `re + im * i` of `F_{q^2}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Fq2 {
    pub(crate) re: BigUint,
    pub(crate) im: BigUint,
}

impl Fq2 {
    pub(crate) fn one() -> Self {
        Self {
            re: BigUint::one(),
            im: BigUint::zero(),
        }
    }

    pub(crate) fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }
}

impl Fq {
    pub(crate) fn f2_mul(&self, a: &Fq2, b: &Fq2) -> Fq2 {
        // Karatsuba: (a0 + a1 i)(b0 + b1 i) with i^2 = -1.
        let t0 = self.mul(&a.re, &b.re);
        let t1 = self.mul(&a.im, &b.im);
        let s = self.mul(&self.add(&a.re, &a.im), &self.add(&b.re, &b.im));
        let re = self.sub(&t0, &t1);
        let im = self.sub(&self.sub(&s, &t0), &t1);
        Fq2 { re, im }
    }

    pub(crate) fn f2_sqr(&self, a: &Fq2) -> Fq2 {
        // (a0 + a1 i)^2 = (a0 + a1)(a0 - a1) + 2 a0 a1 i
        let re = self.mul(&self.add(&a.re, &a.im), &self.sub(&a.re, &a.im));
        let im = self.dbl(&self.mul(&a.re, &a.im));
        Fq2 { re, im }
    }

    pub(crate) fn f2_conj(&self, a: &Fq2) -> Fq2 {
        Fq2 {
            re: a.re.clone(),
            im: self.neg(&a.im),
        }
    }

    pub(crate) fn f2_inv(&self, a: &Fq2) -> Option<Fq2> {
        let norm = self.add(&self.sqr(&a.re), &self.sqr(&a.im));
        let n_inv = self.inv(&norm)?;
        Some(Fq2 {
            re: self.mul(&a.re, &n_inv),
            im: self.mul(&self.neg(&a.im), &n_inv),
        })
    }

    pub(crate) fn f2_pow(&self, a: &Fq2, e: &BigUint) -> Fq2 {
        let mut acc = Fq2::one();
        for i in (0..e.bits()).rev() {
            acc = self.f2_sqr(&acc);
            if e.bit(i) {
                acc = self.f2_mul(&acc, a);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_field() -> Fq {
        // 10007 = 3 (mod 4)
        Fq::new(BigUint::from(10007u32))
    }

    #[test]
    fn sqrt_roundtrip_on_residues() {
        let f = small_field();
        for a in 1u32..500 {
            let a = BigUint::from(a);
            let sq = f.sqr(&a);
            let r = f.sqrt(&sq).expect("square has a root");
            assert_eq!(f.sqr(&r), sq);
        }
    }

    #[test]
    fn f2_inverse_and_mul_agree() {
        let f = small_field();
        let a = Fq2 {
            re: BigUint::from(1234u32),
            im: BigUint::from(4321u32),
        };
        let inv = f.f2_inv(&a).unwrap();
        assert!(f.f2_mul(&a, &inv).is_one());
        assert_eq!(f.f2_sqr(&a), f.f2_mul(&a, &a));
    }

    #[test]
    fn f2_frobenius_is_conjugation() {
        let f = small_field();
        let a = Fq2 {
            re: BigUint::from(77u32),
            im: BigUint::from(9000u32),
        };
        assert_eq!(f.f2_pow(&a, &f.q.clone()), f.f2_conj(&a));
    }
}
