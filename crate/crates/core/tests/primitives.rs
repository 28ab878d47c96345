//! Primitive and selection-function checks against independent oracles.

use std::collections::HashSet;

use graad::crypto::*;
use graad::handshake::{g_select, g_select_verify, u_select, u_select_verify, Group, GroupDirectory};
use graad::ibe::{ibe_decrypt, ibe_encrypt, ibe_extract, ibe_setup};
use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Plain Miller-Rabin, independent of the library.
fn is_probable_prime(n: &BigUint, rounds: usize, rng: &mut impl RngCore) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for small in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29] {
        if n % small == BigUint::zero() {
            return *n == BigUint::from(small);
        }
    }
    let n1 = n - 1u32;
    let mut d = n1.clone();
    let mut s = 0;
    while (&d % 2u32).is_zero() {
        d >>= 1;
        s += 1;
    }
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n1);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[test]
fn curve_parameters_are_sound() {
    let mut r = rng(1);
    for ctx in [BilinearContext::toy(), BilinearContext::standard()] {
        let p = ctx.order();
        let q = ctx.field_modulus();
        assert!(is_probable_prime(p, 32, &mut r), "group order is not prime");
        assert!(is_probable_prime(q, 32, &mut r), "field modulus is not prime");
        assert_eq!(q % 4u32, BigUint::from(3u32));
        assert!(((q + 1u32) % p).is_zero(), "p must divide q + 1");
        let g = ctx.generator();
        assert!(!g.is_identity());
        assert!(ctx.exp(g, &ctx.scalar(p.clone())).is_identity());
        let e = ctx.pair(g, g);
        assert!(!e.is_one());
        assert!(ctx.gt_exp(&e, &ctx.scalar(p - 1u32)) == ctx.gt_div(&GtElem::one(), &e));
    }
}

#[test]
fn bilinearity_on_random_exponents() {
    let ctx = BilinearContext::toy();
    let mut r = rng(2);
    for _ in 0..20 {
        let (a, b) = (ctx.random_scalar(&mut r), ctx.random_scalar(&mut r));
        let (p, q) = (ctx.random_element(&mut r), ctx.random_element(&mut r));
        let lhs = ctx.pair(&ctx.exp(&p, &a), &ctx.exp(&q, &b));
        let rhs = ctx.gt_exp(&ctx.pair(&p, &q), &ctx.s_mul(&a, &b));
        assert_eq!(lhs, rhs);
        assert_eq!(ctx.pair(&p, &q), ctx.pair(&q, &p));
    }
}

#[test]
fn hash_matches_published_vector() {
    assert_eq!(
        hex::encode(hash_h(b"").0),
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    );
    assert_eq!(
        hex::encode(hash_h(b"abc").0),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
    let mut r = rng(3);
    for _ in 0..10_000 {
        let mut m = vec![0u8; r.gen_range(0..64)];
        r.fill_bytes(&mut m);
        let mut m0 = m.clone();
        m0.push(0);
        assert_ne!(hash_h(&m), hash_h(&m0));
    }
}

#[test]
fn hash_to_group_never_hits_identity() {
    let ctx = BilinearContext::toy();
    let mut r = rng(4);
    for _ in 0..10_000 {
        let mut id = [0u8; 12];
        r.fill_bytes(&mut id);
        let h = hash_h1(&ctx, &id).unwrap();
        assert!(!h.is_identity());
    }
}

#[test]
fn h2_has_no_collisions_on_random_targets() {
    let ctx = BilinearContext::toy();
    let mut r = rng(5);
    let e = ctx.pair(ctx.generator(), ctx.generator());
    // Walk e^k for random k by multiplying in random steps; each element
    // is distinct with overwhelming probability.
    let mut t = ctx.gt_exp(&e, &ctx.random_scalar(&mut r));
    let step = ctx.gt_exp(&e, &ctx.random_nonzero_scalar(&mut r));
    let mut seen = HashSet::new();
    for _ in 0..10_000 {
        t = ctx.gt_mul(&t, &step);
        assert!(seen.insert(hash_h2(&ctx, &t)));
    }
}

#[test]
fn f1_depends_on_every_label() {
    let ctx = BilinearContext::toy();
    let mut r = rng(6);
    for _ in 0..1_000 {
        let (a, b) = (Nonce::random(&mut r), Nonce::random(&mut r));
        let z = r.gen_range(0..50);
        let s = r.gen_range(0..50);
        let base = prf_f1(&ctx, &a, &b, &[3, z, s]);
        assert_ne!(base, prf_f1(&ctx, &a, &b, &[3, z, s + 1]));
        assert_ne!(base, prf_f1(&ctx, &a, &b, &[3, z + 1, s]));
        assert_ne!(base, prf_f1(&ctx, &b, &a, &[3, z, s]));
    }
}

#[test]
fn ibe_with_the_wrong_identity_does_not_recover_the_message() {
    let mut r = rng(7);
    let (params, msk) = ibe_setup(Backend::Toy, &mut r);
    let sk_other = ibe_extract(&params, &msk, b"someone-else").unwrap();
    let mut hits = 0;
    for _ in 0..1_000 {
        let mut m = [0u8; 16];
        r.fill_bytes(&mut m);
        let ct = ibe_encrypt(&params, b"alice", &m, &mut r).unwrap();
        if ibe_decrypt(&params, &sk_other, &ct).ok() == Some(m) {
            hits += 1;
        }
    }
    assert_eq!(hits, 0);
}

fn directory(m: usize, w: usize, sizes: &[usize]) -> GroupDirectory {
    let groups = (0..m)
        .map(|g| Group {
            gid: format!("gid-{g}").into_bytes(),
            members: (0..sizes[g]).map(|u| format!("g{g}-m{u}").into_bytes()).collect(),
        })
        .collect();
    GroupDirectory::new(w, groups).unwrap()
}

#[test]
fn unselected_chunks_are_uniform() {
    // m = 4, w = 2: the other chunk's s_z should be a fair coin.
    let ctx = BilinearContext::toy();
    let dir = directory(4, 2, &[1, 1, 1, 1]);
    let mut r = rng(8);
    let mut counts = [0u32; 2];
    let n = 10_000;
    for _ in 0..n {
        let (a, b) = (Nonce::random(&mut r), Nonce::random(&mut r));
        let sel = g_select(&ctx, &dir, 0, 1, &a, &b, &mut r).unwrap();
        let s = g_select_verify(&ctx, &dir, &a, &b, &sel).unwrap();
        assert_eq!(s[0], 1);
        counts[s[1]] += 1;
    }
    let e = n as f64 / 2.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    // One degree of freedom: p = 0.001 at 10.83.
    assert!(chi2 < 10.83, "chi-square {chi2} for {counts:?}");
}

#[test]
fn wrong_nonce_is_rejected() {
    let ctx = BilinearContext::toy();
    let dir = directory(8, 2, &[2; 8]);
    let mut r = rng(9);
    let mut accepted = 0;
    for _ in 0..1_000 {
        let (a, b) = (Nonce::random(&mut r), Nonce::random(&mut r));
        let sel = g_select(&ctx, &dir, 1, 2, &a, &b, &mut r).unwrap();
        let other = Nonce::random(&mut r);
        accepted += usize::from(g_select_verify(&ctx, &dir, &a, &other, &sel).is_ok());
    }
    // A random s-vector collides with the committed one with probability
    // (w/m)^w = 1/16; the check is that acceptance is no better than chance.
    assert!(accepted < 100, "{accepted} of 1000 accepted");
}

#[test]
fn wrong_nonce_with_many_chunks_is_always_rejected() {
    let ctx = BilinearContext::toy();
    let dir = directory(40, 20, &[3; 40]);
    let mut r = rng(10);
    for _ in 0..1_000 {
        let (a, b) = (Nonce::random(&mut r), Nonce::random(&mut r));
        let sel = g_select(&ctx, &dir, 7, 1, &a, &b, &mut r).unwrap();
        let other = Nonce::random(&mut r);
        assert!(g_select_verify(&ctx, &dir, &a, &other, &sel).is_err());
    }
}

/// Recomputes `lambda_z = ((eta * x_z + theta2) mod p) mod |G|` directly.
fn brute_force_members(
    ctx: &BilinearContext,
    dir: &GroupDirectory,
    s: &[usize],
    a: &Nonce,
    b: &Nonce,
    theta2: &Scalar,
) -> Vec<Vec<u8>> {
    let p = ctx.order();
    let eta = prf_f1(ctx, a, b, &[2]).as_biguint().clone();
    let theta = theta2.as_biguint().clone();
    s.iter()
        .enumerate()
        .map(|(z, &sz)| {
            let g = dir.group(z, sz).unwrap();
            let x = prf_f1(ctx, a, b, &[3, z as u32, sz as u32]).as_biguint().clone();
            let v = (&eta * &x + &theta) % p;
            let idx = (v % BigUint::from(g.members.len())).to_u64_digits();
            g.members[idx.first().copied().unwrap_or(0) as usize].clone()
        })
        .collect()
}

#[test]
fn candidates_match_brute_force_recomputation() {
    let ctx = BilinearContext::toy();
    let dir = directory(6, 3, &[1, 2, 3, 4, 5, 6]);
    let mut r = rng(11);
    for _ in 0..300 {
        let (a, b) = (Nonce::random(&mut r), Nonce::random(&mut r));
        let chunk = r.gen_range(0..3);
        let sub = r.gen_range(0..2);
        let g = g_select(&ctx, &dir, chunk, sub, &a, &b, &mut r).unwrap();
        let s = g_select_verify(&ctx, &dir, &a, &b, &g).unwrap();
        let size = dir.group(chunk, sub).unwrap().members.len();
        let member = r.gen_range(0..size);
        let u = u_select(&ctx, &dir, &s, chunk, sub, member, &a, &b, &mut r).unwrap();
        let cands = u_select_verify(&ctx, &dir, &a, &b, &s, &u).unwrap();
        assert_eq!(cands.labels, brute_force_members(&ctx, &dir, &s, &a, &b, &u.theta2));
        assert_eq!(cands.labels[chunk], dir.group(chunk, sub).unwrap().members[member]);
    }
}

#[test]
fn same_group_peers_see_each_other() {
    let ctx = BilinearContext::toy();
    let dir = directory(8, 4, &[3; 8]);
    let mut r = rng(12);
    for _ in 0..200 {
        let (a, b) = (Nonce::random(&mut r), Nonce::random(&mut r));
        let chunk = r.gen_range(0..4);
        let sub = r.gen_range(0..2);
        let (mu, mv) = (r.gen_range(0..3), r.gen_range(0..3));
        // U selects; V checks and answers with its own member selection.
        let g = g_select(&ctx, &dir, chunk, sub, &a, &b, &mut r).unwrap();
        let s = g_select_verify(&ctx, &dir, &a, &b, &g).unwrap();
        let su = u_select(&ctx, &dir, &s, chunk, sub, mu, &a, &b, &mut r).unwrap();
        let sv = u_select(&ctx, &dir, &s, chunk, sub, mv, &a, &b, &mut r).unwrap();
        let seen_by_v = u_select_verify(&ctx, &dir, &a, &b, &s, &su).unwrap();
        let seen_by_u = u_select_verify(&ctx, &dir, &a, &b, &s, &sv).unwrap();
        let members = &dir.group(chunk, sub).unwrap().members;
        assert_eq!(seen_by_v.labels[chunk], members[mu]);
        assert_eq!(seen_by_u.labels[chunk], members[mv]);
    }
}

#[test]
fn selection_does_not_reveal_the_true_slot() {
    // theta1 for two different true sub-indices, same nonces: compare the
    // top-nibble histograms with a two-sample chi-square.
    let ctx = BilinearContext::toy();
    let dir = directory(4, 2, &[1; 4]);
    let mut r = rng(13);
    let (a, b) = (Nonce::random(&mut r), Nonce::random(&mut r));
    let bits = ctx.order().bits();
    let hist = |sub: usize, r: &mut ChaCha20Rng| {
        let mut h = [0f64; 8];
        for _ in 0..4_000 {
            let t = g_select(&ctx, &dir, 0, sub, &a, &b, r).unwrap().theta1;
            let top = (t.as_biguint() >> (bits - 3) as usize).to_u64_digits();
            h[top.first().copied().unwrap_or(0) as usize] += 1.0;
        }
        h
    };
    let (h0, h1) = (hist(0, &mut r), hist(1, &mut r));
    let chi2: f64 = h0
        .iter()
        .zip(&h1)
        .filter(|(x, y)| **x + **y > 0.0)
        .map(|(x, y)| (x - y).powi(2) / (x + y))
        .sum();
    // Seven degrees of freedom at most: p = 0.001 at 24.3.
    assert!(chi2 < 24.3, "chi-square {chi2}");
}
