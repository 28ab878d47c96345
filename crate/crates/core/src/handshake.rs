//! k-anonymous group and member selection.
//!
//! The `m` groups are split into `w` chunks of `m / w`. The prover picks a
//! single scalar `theta` so that, for every chunk `z`, the public map
//! `s_z = (eta * f1(.., z) + theta mod p) mod (m / w)` lands somewhere, and
//! in its own chunk it lands exactly on its own slot. The verifier learns
//! `w` candidate slots and cannot tell which one is real.

use std::fmt::Write as _;

use num_bigint::{BigUint, RandBigInt};
use num_traits::ToPrimitive;
use rand::RngCore;
use thiserror::Error;

use crate::crypto::{hash_fields, prf_f1, BilinearContext, Digest, Nonce, Scalar};

/// Redraw cap for `r`; each draw succeeds with probability at least 1/2.
const MAX_REDRAWS: usize = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HandshakeError {
    #[error("w = {w} must be positive and divide m = {m}")]
    ChunkDivisibility { m: usize, w: usize },
    #[error("group {0} has no members")]
    EmptyGroup(usize),
    #[error("member label {0} appears twice")]
    DuplicateLabel(String),
    #[error("slot (chunk {chunk}, sub {sub}) is outside the directory")]
    SlotOutOfRange { chunk: usize, sub: usize },
    #[error("member index {index} outside a group of {size}")]
    MemberOutOfRange { index: usize, size: usize },
    #[error("own group is not the selected group of its chunk")]
    SelfNotSelected,
    #[error("selection vector has {got} entries, expected {want}")]
    SelectionWidth { got: usize, want: usize },
    #[error("selection digest mismatch")]
    Mismatch,
    #[error("could not draw a pinning offset")]
    Exhausted,
    #[error("directory line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown member {0}")]
    UnknownMember(String),
}

/// One application group: its identifier and the IBE identity labels of
/// its members, in directory order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub gid: Vec<u8>,
    pub members: Vec<Vec<u8>>,
}

/// Position of a member: chunk `z`, sub-index within the chunk, member index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Slot {
    pub chunk: usize,
    pub sub: usize,
    pub member: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupDirectory {
    w: usize,
    groups: Vec<Group>,
    version: u64,
}

impl GroupDirectory {
    /// Groups are listed chunk-major: group `z * (m / w) + s` is sub-index
    /// `s` of chunk `z`.
    pub fn new(w: usize, groups: Vec<Group>) -> Result<Self, HandshakeError> {
        let dir = Self::roster(w, groups)?;
        dir.validate()?;
        Ok(dir)
    }

    /// A directory that may still contain empty groups, as held by the
    /// authority while members are being enrolled. Selection over an empty
    /// group fails; publish with [`GroupDirectory::validate`] first.
    pub fn roster(w: usize, groups: Vec<Group>) -> Result<Self, HandshakeError> {
        let dir = Self {
            w,
            groups,
            version: 0,
        };
        dir.check_shape()?;
        Ok(dir)
    }

    fn check_shape(&self) -> Result<(), HandshakeError> {
        let m = self.groups.len();
        if self.w == 0 || m == 0 || !m.is_multiple_of(self.w) {
            return Err(HandshakeError::ChunkDivisibility { m, w: self.w });
        }
        let mut seen = std::collections::HashSet::new();
        for g in &self.groups {
            for label in &g.members {
                if !seen.insert(label.as_slice()) {
                    return Err(HandshakeError::DuplicateLabel(hex::encode(label)));
                }
            }
        }
        Ok(())
    }

    /// Every group has at least one member.
    pub fn validate(&self) -> Result<(), HandshakeError> {
        match self.groups.iter().position(|g| g.members.is_empty()) {
            Some(i) => Err(HandshakeError::EmptyGroup(i)),
            None => Ok(()),
        }
    }

    pub fn find_gid(&self, gid: &[u8]) -> Option<usize> {
        self.groups.iter().position(|g| g.gid == gid)
    }

    pub fn m(&self) -> usize {
        self.groups.len()
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn chunk_size(&self) -> usize {
        self.groups.len() / self.w
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group_index(&self, chunk: usize, sub: usize) -> Result<usize, HandshakeError> {
        if chunk >= self.w || sub >= self.chunk_size() {
            return Err(HandshakeError::SlotOutOfRange { chunk, sub });
        }
        Ok(chunk * self.chunk_size() + sub)
    }

    pub fn group(&self, chunk: usize, sub: usize) -> Result<&Group, HandshakeError> {
        Ok(&self.groups[self.group_index(chunk, sub)?])
    }

    /// `(chunk, sub)` of a flat group index.
    pub fn split_index(&self, index: usize) -> Option<(usize, usize)> {
        (index < self.m()).then(|| (index / self.chunk_size(), index % self.chunk_size()))
    }

    pub fn locate(&self, label: &[u8]) -> Option<Slot> {
        self.groups.iter().enumerate().find_map(|(i, g)| {
            g.members.iter().position(|l| l == label).map(|member| Slot {
                chunk: i / self.chunk_size(),
                sub: i % self.chunk_size(),
                member,
            })
        })
    }

    pub fn label(&self, slot: Slot) -> Result<&[u8], HandshakeError> {
        let g = self.group(slot.chunk, slot.sub)?;
        g.members
            .get(slot.member)
            .map(Vec::as_slice)
            .ok_or(HandshakeError::MemberOutOfRange {
                index: slot.member,
                size: g.members.len(),
            })
    }

    pub fn add_member(&mut self, group_index: usize, label: Vec<u8>) -> Result<(), HandshakeError> {
        if self.locate(&label).is_some() {
            return Err(HandshakeError::DuplicateLabel(hex::encode(&label)));
        }
        let m = self.m();
        let g = self
            .groups
            .get_mut(group_index)
            .ok_or(HandshakeError::SlotOutOfRange {
                chunk: group_index,
                sub: m,
            })?;
        g.members.push(label);
        self.version += 1;
        Ok(())
    }

    /// Drops a member and bumps the version. The directory may be left
    /// with an empty group, which [`GroupDirectory::validate`] reports.
    pub fn remove_member(&mut self, label: &[u8]) -> Result<Slot, HandshakeError> {
        let slot = self
            .locate(label)
            .ok_or_else(|| HandshakeError::UnknownMember(hex::encode(label)))?;
        let idx = self.group_index(slot.chunk, slot.sub)?;
        self.groups[idx].members.remove(slot.member);
        self.version += 1;
        Ok(slot)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "graad-dir v1 m={} w={} version={}\n",
            self.m(),
            self.w,
            self.version
        );
        for (i, g) in self.groups.iter().enumerate() {
            let _ = writeln!(
                out,
                "chunk:{} sub:{} gid:{}",
                i / self.chunk_size(),
                i % self.chunk_size(),
                hex::encode(&g.gid)
            );
            for l in &g.members {
                let _ = writeln!(out, "  uid:{}", hex::encode(l));
            }
        }
        out
    }

    /// Strict loader: every invariant, including non-empty groups.
    pub fn from_text(text: &str) -> Result<Self, HandshakeError> {
        let dir = Self::roster_from_text(text)?;
        dir.validate()?;
        Ok(dir)
    }

    /// Loader that accepts empty groups.
    pub fn roster_from_text(text: &str) -> Result<Self, HandshakeError> {
        let err = |line: usize, msg: &str| HandshakeError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("graad-dir") || parts.next() != Some("v1") {
            return Err(err(1, "expected `graad-dir v1`"));
        }
        let (mut m, mut w, mut version) = (None, None, 0u64);
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(|| err(1, "expected key=value"))?;
            let n: u64 = v.parse().map_err(|_| err(1, "non-numeric header value"))?;
            match k {
                "m" => m = Some(n as usize),
                "w" => w = Some(n as usize),
                "version" => version = n,
                _ => return Err(err(1, "unknown header key")),
            }
        }
        let (m, w) = (
            m.ok_or_else(|| err(1, "missing m"))?,
            w.ok_or_else(|| err(1, "missing w"))?,
        );
        if w == 0 || m % w != 0 {
            return Err(HandshakeError::ChunkDivisibility { m, w });
        }
        let chunk_size = m / w;
        let mut groups: Vec<Group> = Vec::with_capacity(m);
        for (n, line) in lines {
            let n = n + 1;
            if let Some(uid) = line.strip_prefix("  uid:") {
                let g = groups.last_mut().ok_or_else(|| err(n, "member before any group"))?;
                g.members
                    .push(hex::decode(uid.trim()).map_err(|_| err(n, "bad member hex"))?);
                continue;
            }
            let mut f = line.split_whitespace();
            let mut field = |key: &str| {
                f.next()
                    .and_then(|t| t.strip_prefix(key))
                    .ok_or_else(|| err(n, "malformed group line"))
            };
            let chunk: usize = field("chunk:")?.parse().map_err(|_| err(n, "bad chunk"))?;
            let sub: usize = field("sub:")?.parse().map_err(|_| err(n, "bad sub"))?;
            let gid = hex::decode(field("gid:")?).map_err(|_| err(n, "bad gid hex"))?;
            let expect = groups.len();
            if chunk * chunk_size + sub != expect || sub >= chunk_size {
                return Err(err(n, "groups out of chunk-major order"));
            }
            groups.push(Group {
                gid,
                members: Vec::new(),
            });
        }
        if groups.len() != m {
            return Err(err(0, "group count differs from header m"));
        }
        let mut dir = Self::roster(w, groups)?;
        dir.version = version;
        Ok(dir)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSelection {
    pub theta1: Scalar,
    pub sigma_g: Digest,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserSelection {
    pub theta2: Scalar,
    pub sigma_u: Digest,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectedCandidates {
    /// `s_z` per chunk.
    pub groups: Vec<usize>,
    /// `lambda_z` per chunk.
    pub members: Vec<usize>,
    pub labels: Vec<Vec<u8>>,
}

fn small_mod(v: &Scalar, k: usize) -> usize {
    (v.as_biguint() % BigUint::from(k))
        .to_usize()
        .expect("residue below a usize modulus")
}

/// Solves `y = eta * x + theta (mod p)` for `theta`, where `y = target +
/// r * modulus` with `r` drawn from `0..=(p+1)/modulus`. Draws with
/// `y >= p` are redrawn so the reduction mod `p` never disturbs the residue.
fn pin<R: RngCore + ?Sized>(
    ctx: &BilinearContext,
    target: usize,
    modulus: usize,
    eta: &Scalar,
    x: &Scalar,
    rng: &mut R,
) -> Result<Scalar, HandshakeError> {
    let p = ctx.order();
    let bound = (p + 1u32) / BigUint::from(modulus) + 1u32;
    for _ in 0..MAX_REDRAWS {
        let r = rng.gen_biguint_below(&bound);
        let y = BigUint::from(target) + r * modulus;
        if &y < p {
            let y = ctx.scalar(y);
            return Ok(ctx.s_sub(&y, &ctx.s_mul(eta, x)));
        }
    }
    Err(HandshakeError::Exhausted)
}

fn slot_value(ctx: &BilinearContext, eta: &Scalar, x: &Scalar, theta: &Scalar) -> Scalar {
    ctx.s_add(&ctx.s_mul(eta, x), theta)
}

fn digest_of(values: &[usize]) -> Digest {
    let enc: Vec<[u8; 4]> = values.iter().map(|v| (*v as u32).to_be_bytes()).collect();
    let refs: Vec<&[u8]> = enc.iter().map(|e| e.as_slice()).collect();
    hash_fields(&refs)
}

/// `gSelect`: hides `(chunk, sub)` among one group per chunk.
pub fn g_select<R: RngCore + ?Sized>(
    ctx: &BilinearContext,
    dir: &GroupDirectory,
    chunk: usize,
    sub: usize,
    n_u: &Nonce,
    n_v: &Nonce,
    rng: &mut R,
) -> Result<GroupSelection, HandshakeError> {
    dir.group_index(chunk, sub)?;
    let eta = prf_f1(ctx, n_u, n_v, &[0]);
    let x = prf_f1(ctx, n_u, n_v, &[1, chunk as u32]);
    let theta1 = pin(ctx, sub, dir.chunk_size(), &eta, &x, rng)?;
    let s = group_slots(ctx, dir, n_u, n_v, &eta, &theta1);
    debug_assert_eq!(s[chunk], sub);
    Ok(GroupSelection {
        sigma_g: digest_of(&s),
        theta1,
    })
}

fn group_slots(
    ctx: &BilinearContext,
    dir: &GroupDirectory,
    n_u: &Nonce,
    n_v: &Nonce,
    eta: &Scalar,
    theta1: &Scalar,
) -> Vec<usize> {
    (0..dir.w())
        .map(|z| {
            let x = prf_f1(ctx, n_u, n_v, &[1, z as u32]);
            small_mod(&slot_value(ctx, eta, &x, theta1), dir.chunk_size())
        })
        .collect()
}

/// `gSelectVer`: the per-chunk group sub-indices, if `sigma_g` matches.
pub fn g_select_verify(
    ctx: &BilinearContext,
    dir: &GroupDirectory,
    n_u: &Nonce,
    n_v: &Nonce,
    sel: &GroupSelection,
) -> Result<Vec<usize>, HandshakeError> {
    let eta = prf_f1(ctx, n_u, n_v, &[0]);
    let s = group_slots(ctx, dir, n_u, n_v, &eta, &sel.theta1);
    if digest_of(&s) == sel.sigma_g {
        Ok(s)
    } else {
        Err(HandshakeError::Mismatch)
    }
}

/// `uSelect`: hides member `member` of the selected group in `chunk`.
#[allow(clippy::too_many_arguments)]
pub fn u_select<R: RngCore + ?Sized>(
    ctx: &BilinearContext,
    dir: &GroupDirectory,
    s: &[usize],
    chunk: usize,
    sub: usize,
    member: usize,
    n_u: &Nonce,
    n_v: &Nonce,
    rng: &mut R,
) -> Result<UserSelection, HandshakeError> {
    check_width(dir, s)?;
    if s.get(chunk) != Some(&sub) {
        return Err(HandshakeError::SelfNotSelected);
    }
    let size = dir.group(chunk, sub)?.members.len();
    if member >= size {
        return Err(HandshakeError::MemberOutOfRange {
            index: member,
            size,
        });
    }
    let eta = prf_f1(ctx, n_u, n_v, &[2]);
    let x = prf_f1(ctx, n_u, n_v, &[3, chunk as u32, sub as u32]);
    let theta2 = pin(ctx, member, size, &eta, &x, rng)?;
    let lambda = member_slots(ctx, dir, s, n_u, n_v, &eta, &theta2)?;
    debug_assert_eq!(lambda[chunk], member);
    Ok(UserSelection {
        sigma_u: digest_of(&lambda),
        theta2,
    })
}

fn check_width(dir: &GroupDirectory, s: &[usize]) -> Result<(), HandshakeError> {
    if s.len() != dir.w() {
        return Err(HandshakeError::SelectionWidth {
            got: s.len(),
            want: dir.w(),
        });
    }
    Ok(())
}

fn member_slots(
    ctx: &BilinearContext,
    dir: &GroupDirectory,
    s: &[usize],
    n_u: &Nonce,
    n_v: &Nonce,
    eta: &Scalar,
    theta2: &Scalar,
) -> Result<Vec<usize>, HandshakeError> {
    s.iter()
        .enumerate()
        .map(|(z, &sz)| {
            let size = dir.group(z, sz)?.members.len();
            if size == 0 {
                return Err(HandshakeError::EmptyGroup(dir.group_index(z, sz)?));
            }
            let x = prf_f1(ctx, n_u, n_v, &[3, z as u32, sz as u32]);
            Ok(small_mod(&slot_value(ctx, eta, &x, theta2), size))
        })
        .collect()
}

/// `uSelectVer`: the `w` candidate member labels, if `sigma_u` matches.
pub fn u_select_verify(
    ctx: &BilinearContext,
    dir: &GroupDirectory,
    n_u: &Nonce,
    n_v: &Nonce,
    s: &[usize],
    sel: &UserSelection,
) -> Result<SelectedCandidates, HandshakeError> {
    check_width(dir, s)?;
    let eta = prf_f1(ctx, n_u, n_v, &[2]);
    let lambda = member_slots(ctx, dir, s, n_u, n_v, &eta, &sel.theta2)?;
    if digest_of(&lambda) != sel.sigma_u {
        return Err(HandshakeError::Mismatch);
    }
    let labels = s
        .iter()
        .zip(&lambda)
        .enumerate()
        .map(|(z, (&sz, &l))| dir.group(z, sz).map(|g| g.members[l].clone()))
        .collect::<Result<_, _>>()?;
    Ok(SelectedCandidates {
        groups: s.to_vec(),
        members: lambda,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn dir(m: usize, w: usize, per_group: usize) -> GroupDirectory {
        let groups = (0..m)
            .map(|g| Group {
                gid: vec![g as u8],
                members: (0..per_group).map(|k| vec![g as u8, k as u8]).collect(),
            })
            .collect();
        GroupDirectory::new(w, groups).unwrap()
    }

    fn nonces(rng: &mut ChaCha20Rng) -> (Nonce, Nonce) {
        (Nonce::random(rng), Nonce::random(rng))
    }

    #[test]
    fn directory_invariants() {
        assert_eq!(
            GroupDirectory::new(3, dir(4, 2, 1).groups).unwrap_err(),
            HandshakeError::ChunkDivisibility { m: 4, w: 3 }
        );
        let mut groups = dir(4, 2, 1).groups;
        groups[2].members.clear();
        assert_eq!(
            GroupDirectory::new(2, groups).unwrap_err(),
            HandshakeError::EmptyGroup(2)
        );
        let mut groups = dir(4, 2, 1).groups;
        groups[3].members[0] = groups[0].members[0].clone();
        assert!(matches!(
            GroupDirectory::new(2, groups),
            Err(HandshakeError::DuplicateLabel(_))
        ));
    }

    #[test]
    fn text_roundtrip_and_membership_changes() {
        let mut d = dir(6, 3, 2);
        d.add_member(4, vec![0xaa]).unwrap();
        let back = GroupDirectory::from_text(&d.to_text()).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.version(), 1);
        assert_eq!(
            back.locate(&[0xaa]),
            Some(Slot {
                chunk: 2,
                sub: 0,
                member: 2
            })
        );
        d.remove_member(&[0xaa]).unwrap();
        assert_eq!(d.version(), 2);
        assert!(d.locate(&[0xaa]).is_none());
        let mut single = dir(2, 1, 1);
        single.remove_member(&[0, 0]).unwrap();
        assert_eq!(single.validate(), Err(HandshakeError::EmptyGroup(0)));
        let text = single.to_text();
        assert!(GroupDirectory::from_text(&text).is_err());
        assert_eq!(GroupDirectory::roster_from_text(&text).unwrap(), single);
    }

    #[test]
    fn text_loader_rejects_bad_input() {
        assert!(GroupDirectory::from_text("graad-dir v2 m=2 w=1\n").is_err());
        let bad_order = "graad-dir v1 m=2 w=1\nchunk:0 sub:1 gid:00\n  uid:01\nchunk:0 sub:0 gid:01\n  uid:02\n";
        assert!(GroupDirectory::from_text(bad_order).is_err());
        let empty = "graad-dir v1 m=2 w=1\nchunk:0 sub:0 gid:00\nchunk:0 sub:1 gid:01\n  uid:02\n";
        assert_eq!(
            GroupDirectory::from_text(empty),
            Err(HandshakeError::EmptyGroup(0))
        );
    }

    #[test]
    fn group_selection_pins_own_slot() {
        let ctx = BilinearContext::toy();
        let d = dir(4, 2, 1);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..50 {
            let (a, b) = nonces(&mut rng);
            let sel = g_select(&ctx, &d, 0, 1, &a, &b, &mut rng).unwrap();
            let s = g_select_verify(&ctx, &d, &a, &b, &sel).unwrap();
            assert_eq!(s[0], 1);
        }
    }

    #[test]
    fn group_selection_is_deterministic() {
        let ctx = BilinearContext::toy();
        let d = dir(4, 2, 1);
        let (a, b) = (Nonce([1; 16]), Nonce([2; 16]));
        let run = || {
            let mut rng = ChaCha20Rng::seed_from_u64(99);
            g_select(&ctx, &d, 1, 0, &a, &b, &mut rng).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn group_selection_binds_theta_and_nonces() {
        let ctx = BilinearContext::toy();
        let d = dir(8, 2, 1);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (a, b) = nonces(&mut rng);
        let sel = g_select(&ctx, &d, 1, 2, &a, &b, &mut rng).unwrap();
        let mut bumped = sel.clone();
        bumped.theta1 = ctx.s_add(&bumped.theta1, &Scalar::one());
        assert_eq!(
            g_select_verify(&ctx, &d, &a, &b, &bumped),
            Err(HandshakeError::Mismatch)
        );
        let mut false_accepts = 0;
        for _ in 0..200 {
            let other = Nonce::random(&mut rng);
            if g_select_verify(&ctx, &d, &a, &other, &sel).is_ok() {
                false_accepts += 1;
            }
        }
        // 4^2 possible s-vectors; a wrong nonce maps to a matching one
        // with probability 1/16 at most.
        assert!(false_accepts < 40, "{false_accepts}");
    }

    #[test]
    fn user_selection_pins_own_member() {
        let ctx = BilinearContext::toy();
        let d = dir(6, 3, 5);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for member in 0..5 {
            let (a, b) = nonces(&mut rng);
            let g = g_select(&ctx, &d, 2, 1, &a, &b, &mut rng).unwrap();
            let s = g_select_verify(&ctx, &d, &a, &b, &g).unwrap();
            let u = u_select(&ctx, &d, &s, 2, 1, member, &a, &b, &mut rng).unwrap();
            let c = u_select_verify(&ctx, &d, &a, &b, &s, &u).unwrap();
            assert_eq!(c.members[2], member);
            assert_eq!(c.labels[2], d.label(Slot { chunk: 2, sub: 1, member }).unwrap());
            assert_eq!(c.labels.len(), 3);
        }
    }

    #[test]
    fn user_selection_preconditions_and_binding() {
        let ctx = BilinearContext::toy();
        let d = dir(4, 2, 3);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (a, b) = nonces(&mut rng);
        let s = vec![0, 1];
        assert_eq!(
            u_select(&ctx, &d, &s, 0, 1, 0, &a, &b, &mut rng),
            Err(HandshakeError::SelfNotSelected)
        );
        let mut u = u_select(&ctx, &d, &s, 0, 0, 2, &a, &b, &mut rng).unwrap();
        u.sigma_u.0[0] ^= 1;
        assert_eq!(
            u_select_verify(&ctx, &d, &a, &b, &s, &u),
            Err(HandshakeError::Mismatch)
        );
    }

    #[test]
    fn transcript_size_is_independent_of_w() {
        let ctx = BilinearContext::toy();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let mut sizes = Vec::new();
        for w in [2, 10, 50] {
            let d = dir(w * 2, w, 2);
            let (a, b) = nonces(&mut rng);
            let g = g_select(&ctx, &d, 0, 0, &a, &b, &mut rng).unwrap();
            let s = g_select_verify(&ctx, &d, &a, &b, &g).unwrap();
            let u = u_select(&ctx, &d, &s, 0, 0, 1, &a, &b, &mut rng).unwrap();
            sizes.push(
                ctx.encode_scalar(&g.theta1).len()
                    + g.sigma_g.0.len()
                    + ctx.encode_scalar(&u.theta2).len()
                    + u.sigma_u.0.len(),
            );
        }
        assert!(sizes.windows(2).all(|p| p[0] == p[1]));
    }
}
