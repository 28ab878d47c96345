//! Supersingular curve `y^2 = x^3 + x` over `F_q`, `q = 3 (mod 4)`, with the
//! distortion-map Tate pairing.
//!
//! `#E(F_q) = q + 1 = cofactor * order` and the group is cyclic, so the
//! prime-order subgroup is exactly `cofactor * E(F_q)`. The distortion map
//! `(x, y) -> (-x, i*y)` sends the subgroup to an independent one over
//! `F_{q^2}`, which turns the reduced Tate pairing into a symmetric map.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::field::{Fq, Fq2};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Affine {
    pub(crate) x: BigUint,
    pub(crate) y: BigUint,
}

/// Jacobian coordinates; `z == 0` is the point at infinity.
#[derive(Clone, Debug)]
struct Jacobian {
    x: BigUint,
    y: BigUint,
    z: BigUint,
}

impl Jacobian {
    fn infinity() -> Self {
        Self {
            x: BigUint::one(),
            y: BigUint::one(),
            z: BigUint::zero(),
        }
    }

    fn is_infinity(&self) -> bool {
        self.z.is_zero()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Curve {
    pub(crate) f: Fq,
    pub(crate) order: BigUint,
    pub(crate) cofactor: BigUint,
}

impl Curve {
    pub(crate) fn new(q: BigUint, order: BigUint) -> Self {
        let cofactor = (&q + 1u32) / &order;
        debug_assert_eq!(&cofactor * &order, &q + 1u32);
        Self {
            f: Fq::new(q),
            order,
            cofactor,
        }
    }

    pub(crate) fn rhs(&self, x: &BigUint) -> BigUint {
        let x2 = self.f.sqr(x);
        self.f.add(&self.f.mul(&x2, x), x)
    }

    pub(crate) fn on_curve(&self, p: &Affine) -> bool {
        p.x < self.f.q && p.y < self.f.q && self.f.sqr(&p.y) == self.rhs(&p.x)
    }

    pub(crate) fn neg(&self, p: &Option<Affine>) -> Option<Affine> {
        p.as_ref().map(|a| Affine {
            x: a.x.clone(),
            y: self.f.neg(&a.y),
        })
    }

    fn to_jacobian(p: &Affine) -> Jacobian {
        Jacobian {
            x: p.x.clone(),
            y: p.y.clone(),
            z: BigUint::one(),
        }
    }

    fn to_affine(&self, j: &Jacobian) -> Option<Affine> {
        if j.is_infinity() {
            return None;
        }
        let zi = self.f.inv(&j.z).expect("nonzero z is invertible");
        let zi2 = self.f.sqr(&zi);
        let zi3 = self.f.mul(&zi2, &zi);
        Some(Affine {
            x: self.f.mul(&j.x, &zi2),
            y: self.f.mul(&j.y, &zi3),
        })
    }

    fn double_j(&self, p: &Jacobian) -> Jacobian {
        let f = &self.f;
        if p.is_infinity() || p.y.is_zero() {
            return Jacobian::infinity();
        }
        let xx = f.sqr(&p.x);
        let yy = f.sqr(&p.y);
        let yyyy = f.sqr(&yy);
        let zz = f.sqr(&p.z);
        let s = f.small(&f.mul(&p.x, &yy), 4);
        let m = f.add(&f.small(&xx, 3), &f.sqr(&zz));
        let x3 = f.sub(&f.sqr(&m), &f.dbl(&s));
        let y3 = f.sub(&f.mul(&m, &f.sub(&s, &x3)), &f.small(&yyyy, 8));
        let z3 = f.dbl(&f.mul(&p.y, &p.z));
        Jacobian {
            x: x3,
            y: y3,
            z: z3,
        }
    }

    fn add_mixed(&self, p: &Jacobian, q: &Affine) -> Jacobian {
        let f = &self.f;
        if p.is_infinity() {
            return Self::to_jacobian(q);
        }
        let z1z1 = f.sqr(&p.z);
        let u2 = f.mul(&q.x, &z1z1);
        let s2 = f.mul(&q.y, &f.mul(&p.z, &z1z1));
        let h = f.sub(&u2, &p.x);
        let r = f.sub(&s2, &p.y);
        if h.is_zero() {
            return if r.is_zero() {
                self.double_j(p)
            } else {
                Jacobian::infinity()
            };
        }
        let hh = f.sqr(&h);
        let hhh = f.mul(&h, &hh);
        let v = f.mul(&p.x, &hh);
        let x3 = f.sub(&f.sub(&f.sqr(&r), &hhh), &f.dbl(&v));
        let y3 = f.sub(&f.mul(&r, &f.sub(&v, &x3)), &f.mul(&p.y, &hhh));
        let z3 = f.mul(&p.z, &h);
        Jacobian {
            x: x3,
            y: y3,
            z: z3,
        }
    }

    pub(crate) fn add(&self, a: &Option<Affine>, b: &Option<Affine>) -> Option<Affine> {
        match (a, b) {
            (None, _) => b.clone(),
            (_, None) => a.clone(),
            (Some(pa), Some(pb)) => self.to_affine(&self.add_mixed(&Self::to_jacobian(pa), pb)),
        }
    }

    pub(crate) fn mul(&self, p: &Option<Affine>, k: &BigUint) -> Option<Affine> {
        let base = p.as_ref()?;
        let mut acc = Jacobian::infinity();
        for i in (0..k.bits()).rev() {
            acc = self.double_j(&acc);
            if k.bit(i) {
                acc = self.add_mixed(&acc, base);
            }
        }
        self.to_affine(&acc)
    }

    /// Reduced Tate pairing `f_{order,P}(psi(Q))^((q^2 - 1) / order)`.
    pub(crate) fn pairing(&self, p: &Option<Affine>, q: &Option<Affine>) -> Fq2 {
        let (Some(p), Some(q)) = (p, q) else {
            return Fq2::one();
        };
        let f = &self.f;
        let mut acc = Fq2::one();
        let mut t = Self::to_jacobian(p);
        let bits = self.order.bits();
        for i in (0..bits - 1).rev() {
            // tangent at T evaluated at psi(Q), scaled by 2 Y Z^3
            let zz = f.sqr(&t.z);
            let m = f.add(&f.small(&f.sqr(&t.x), 3), &f.sqr(&zz));
            let re = f.sub(
                &f.mul(&m, &f.add(&f.mul(&q.x, &zz), &t.x)),
                &f.dbl(&f.sqr(&t.y)),
            );
            let im = f.mul(&f.dbl(&f.mul(&t.y, &f.mul(&t.z, &zz))), &q.y);
            acc = f.f2_mul(&f.f2_sqr(&acc), &Fq2 { re, im });
            t = self.double_j(&t);

            if self.order.bit(i) {
                let zz = f.sqr(&t.z);
                let h = f.sub(&f.mul(&p.x, &zz), &t.x);
                if !h.is_zero() {
                    // chord through T and P, scaled by Z * H
                    let r = f.sub(&f.mul(&p.y, &f.mul(&t.z, &zz)), &t.y);
                    let zh = f.mul(&t.z, &h);
                    let re = f.sub(&f.mul(&r, &f.add(&q.x, &p.x)), &f.mul(&zh, &p.y));
                    let im = f.mul(&zh, &q.y);
                    acc = f.f2_mul(&acc, &Fq2 { re, im });
                }
                // a vertical line lies in F_q and dies in the final exponentiation
                t = self.add_mixed(&t, p);
            }
        }
        self.final_exponentiation(&acc)
    }

    fn final_exponentiation(&self, v: &Fq2) -> Fq2 {
        let f = &self.f;
        // v^(q - 1) = conj(v) / v, then raise to the cofactor (q + 1) / order
        let inv = f.f2_inv(v).expect("miller value is nonzero");
        let unitary = f.f2_mul(&f.f2_conj(v), &inv);
        f.f2_pow(&unitary, &self.cofactor)
    }
}
