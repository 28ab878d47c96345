//! Network-absent group-anonymous key exchange with traceability.
//!
//! ```text
//! U -> V   NA1a  N_U
//! V -> U   NA1b  N_V
//! U -> V   NA1c  theta1, sigma_g, theta2, sigma_u
//! V -> U   NA2   theta2', sigma_u', E_V
//! U -> V   NA3   E_U, sigma_0, C1_U, C2_U, pi_U
//! V -> U   NA4   sigma_1, C1_V, C2_V, pi_V
//! U -> V   NA5   sigma_2
//! ```
//!
//! `E_U` / `E_V` carry `gamma || X_U` / `delta || X_V` to the peer's
//! candidate identity. The dual ciphertexts carry `gamma || i_U` /
//! `delta || i_V` to both the peer and the ProSe function, which can later
//! open them from a [`TraceEvidence`].
//!
//! Every failure, whatever the cause, emits the same abort record and
//! looks on the wire exactly like a timeout.

use rand::RngCore;
use thiserror::Error;

use super::bus::{Bus, Endpoint, Fault, NodeId, Outgoing, Transcript};
use super::registry::{Crl, UeCredentials};
use super::trace::TraceEvidence;
use super::wire::{na_abort_record, Message, MsgTag};
use super::SessionKey;
use crate::crypto::{
    prf_f0, BilinearContext, Digest, F0Tag, GElem, Nonce, Scalar, NONCE_LEN,
};
use crate::dualenc::{
    enc_proof, enc_verify, kp_decrypt, kp_encrypt, lin_encrypt, DualProof, KpCiphertext,
    LinCiphertext, LinPublicKey,
};
use crate::handshake::{
    g_select, g_select_verify, u_select, u_select_verify, GroupDirectory, GroupSelection, Slot,
    UserSelection,
};
use crate::ibe::{ibe_open, ibe_seal, IbeParams};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum NaFailure {
    #[error("device is not in its directory copy")]
    NotInDirectory,
    #[error("malformed or out-of-order message")]
    Malformed,
    #[error("selection does not verify")]
    Selection,
    #[error("peer candidate is revoked")]
    Revoked,
    #[error("no own group among the selected groups")]
    NotSelected,
    #[error("could not open the peer's identity ciphertext")]
    Open,
    #[error("sigma check failed")]
    Sigma,
    #[error("dual-encryption proof does not verify")]
    Proof,
    #[error("dual ciphertext carries the wrong plaintext")]
    Plaintext,
    #[error("peer aborted")]
    PeerAbort,
    #[error("no response")]
    Timeout,
}

/// Everything a device needs from the authorities to run the handshake:
/// its directory and CRL copies may be stale.
#[derive(Clone, Copy)]
pub struct NaView<'a> {
    pub params: &'a IbeParams,
    pub lin: &'a LinPublicKey,
    pub dir: &'a GroupDirectory,
    pub crl: &'a Crl,
}

impl NaView<'_> {
    fn ctx(&self) -> &BilinearContext {
        self.params.ctx()
    }

    /// Width of `gamma` / `delta`; the group index fills the rest of an
    /// embeddable plaintext.
    pub fn secret_len(&self) -> usize {
        self.ctx().embed_capacity() - 4
    }

    fn random_secret(&self, rng: &mut dyn RngCore) -> Vec<u8> {
        let mut b = vec![0u8; self.secret_len()];
        rng.fill_bytes(&mut b);
        b
    }

    fn f0(&self, a: &[u8], b: &[u8], tag: F0Tag) -> Digest {
        let ctx = self.ctx();
        prf_f0(ctx, &secret_scalar(ctx, a), &secret_scalar(ctx, b), tag)
    }

    /// `embed(secret || index)`.
    fn plaintext(&self, secret: &[u8], index: u32) -> GElem {
        let data = [secret, &index.to_be_bytes()].concat();
        self.ctx()
            .embed(&data)
            .expect("secret plus index fits the embedding capacity")
    }

    fn split_plaintext(&self, m: &GElem) -> Option<(Vec<u8>, u32)> {
        let data = self.ctx().unembed(m).ok()?;
        let (s, i) = data.split_at(self.secret_len());
        Some((s.to_vec(), u32::from_be_bytes(i.try_into().ok()?)))
    }

    /// `secret || X` sealed to `label`.
    fn seal(&self, label: &[u8], secret: &[u8], x: &GElem, rng: &mut dyn RngCore) -> Vec<u8> {
        let payload = [secret, &self.ctx().encode_g(x)].concat();
        let s = ibe_seal(self.params, label, &payload, rng).expect("label is non-empty");
        self.params.encode_sealed(&s)
    }

    fn open(&self, creds: &UeCredentials, bytes: &[u8]) -> Option<(Vec<u8>, GElem)> {
        let sealed = self.params.decode_sealed(bytes).ok()?;
        let payload = ibe_open(self.params, &creds.ibe_key, &sealed).ok()?;
        if payload.len() != self.secret_len() + self.ctx().g_len() {
            return None;
        }
        let (s, x) = payload.split_at(self.secret_len());
        let x = self.ctx().decode_g(x).ok()?;
        (!x.is_identity()).then(|| (s.to_vec(), x))
    }

    /// Both dual ciphertexts of `m` to `recipient`, with the proof.
    fn dual(
        &self,
        m: &GElem,
        recipient: &GElem,
        rng: &mut dyn RngCore,
    ) -> (KpCiphertext, LinCiphertext, DualProof) {
        let ctx = self.ctx();
        let (c1, y) = kp_encrypt(ctx, recipient, m, rng);
        let (c2, eph) = lin_encrypt(ctx, self.lin, m, rng);
        let pi = enc_proof(ctx, &c1, &c2, &eph, &y, recipient, self.lin, rng);
        (c1, c2, pi)
    }

    fn dual_fields(&self, c1: &KpCiphertext, c2: &LinCiphertext, pi: &DualProof) -> [Vec<u8>; 3] {
        let ctx = self.ctx();
        [c1.to_bytes(ctx), c2.to_bytes(ctx), pi.to_bytes(ctx)]
    }

    fn parse_dual(&self, f: &[Vec<u8>]) -> Option<(KpCiphertext, LinCiphertext, DualProof)> {
        let ctx = self.ctx();
        Some((
            KpCiphertext::from_bytes(ctx, &f[0]).ok()?,
            LinCiphertext::from_bytes(ctx, &f[1]).ok()?,
            DualProof::from_bytes(ctx, &f[2]).ok()?,
        ))
    }
}

/// `gamma` / `delta` as an element of `Z_p` (they are narrower than `p`).
fn secret_scalar(ctx: &BilinearContext, s: &[u8]) -> Scalar {
    ctx.scalar(num_bigint::BigUint::from_bytes_be(s))
}

fn nonce(b: &[u8]) -> Option<Nonce> {
    let a: [u8; NONCE_LEN] = b.try_into().ok()?;
    Some(Nonce(a))
}

fn group_selection(ctx: &BilinearContext, f: &[Vec<u8>]) -> Option<GroupSelection> {
    Some(GroupSelection {
        theta1: ctx.decode_scalar(&f[0]).ok()?,
        sigma_g: Digest::from_slice(&f[1])?,
    })
}

fn user_selection(ctx: &BilinearContext, f: &[Vec<u8>]) -> Option<UserSelection> {
    Some(UserSelection {
        theta2: ctx.decode_scalar(&f[0]).ok()?,
        sigma_u: Digest::from_slice(&f[1])?,
    })
}

fn own_slot(view: &NaView<'_>, creds: &UeCredentials) -> Result<(Slot, u32), NaFailure> {
    let slot = view.dir.locate(&creds.label()).ok_or(NaFailure::NotInDirectory)?;
    let index = view
        .dir
        .group_index(slot.chunk, slot.sub)
        .map_err(|_| NaFailure::NotInDirectory)?;
    Ok((slot, index as u32))
}

#[derive(Debug, Clone)]
enum Status {
    Running,
    Accepted(SessionKey),
    Aborted(NaFailure),
}

/// Material both roles keep for tracing.
#[derive(Clone)]
struct Record {
    peer_label: Vec<u8>,
    own_x: GElem,
    peer_x: GElem,
    mine: (KpCiphertext, LinCiphertext, DualProof),
    theirs: Option<(KpCiphertext, LinCiphertext, DualProof)>,
    sigma: [Option<Digest>; 3],
}

enum UState {
    Idle,
    AwaitNa1b { n_u: Nonce },
    AwaitNa2 { n_u: Nonce, n_v: Nonce, s: Vec<usize> },
    AwaitNa4 { gamma: Vec<u8>, delta: Vec<u8>, rec: Box<Record> },
    Finished { rec: Box<Record> },
    Dead,
}

/// UE_U, the initiator.
pub struct NaInitiator<'a> {
    view: NaView<'a>,
    creds: &'a UeCredentials,
    state: UState,
    status: Status,
}

impl<'a> NaInitiator<'a> {
    pub fn new(view: NaView<'a>, creds: &'a UeCredentials) -> Self {
        Self {
            view,
            creds,
            state: UState::Idle,
            status: Status::Running,
        }
    }

    pub fn start(&mut self, rng: &mut dyn RngCore) -> Outgoing {
        let n_u = Nonce::random(rng);
        self.state = UState::AwaitNa1b { n_u };
        Outgoing::new(NodeId::V, &Message::new(MsgTag::Na1a, vec![n_u.0.to_vec()]))
    }

    fn step(&mut self, bytes: &[u8], rng: &mut dyn RngCore) -> Result<Vec<Outgoing>, NaFailure> {
        let view = self.view;
        let ctx = view.ctx();
        let m = Message::decode(bytes).map_err(|_| NaFailure::Malformed)?;
        if m.tag == MsgTag::NaAbort {
            return Err(NaFailure::PeerAbort);
        }
        let expect = |tag| if m.tag == tag { Ok(()) } else { Err(NaFailure::Malformed) };
        match std::mem::replace(&mut self.state, UState::Dead) {
            UState::AwaitNa1b { n_u } => {
                expect(MsgTag::Na1b)?;
                let n_v = nonce(&m.fields[0]).ok_or(NaFailure::Malformed)?;
                let (me, _) = own_slot(&view, self.creds)?;
                let g = g_select(ctx, view.dir, me.chunk, me.sub, &n_u, &n_v, rng)
                    .map_err(|_| NaFailure::Selection)?;
                let s = g_select_verify(ctx, view.dir, &n_u, &n_v, &g).map_err(|_| NaFailure::Selection)?;
                let u = u_select(ctx, view.dir, &s, me.chunk, me.sub, me.member, &n_u, &n_v, rng)
                    .map_err(|_| NaFailure::Selection)?;
                let out = Message::new(
                    MsgTag::Na1c,
                    vec![
                        ctx.encode_scalar(&g.theta1),
                        g.sigma_g.0.to_vec(),
                        ctx.encode_scalar(&u.theta2),
                        u.sigma_u.0.to_vec(),
                    ],
                );
                self.state = UState::AwaitNa2 { n_u, n_v, s };
                Ok(vec![Outgoing::new(NodeId::V, &out)])
            }
            UState::AwaitNa2 { n_u, n_v, s } => {
                expect(MsgTag::Na2)?;
                let (me, i_u) = own_slot(&view, self.creds)?;
                let sel = user_selection(ctx, &m.fields[..2]).ok_or(NaFailure::Malformed)?;
                let cands = u_select_verify(ctx, view.dir, &n_u, &n_v, &s, &sel)
                    .map_err(|_| NaFailure::Selection)?;
                let target = cands.labels[me.chunk].clone();
                if view.crl.contains(&target) {
                    return Err(NaFailure::Revoked);
                }
                let gamma = view.random_secret(rng);
                let own_x = self.creds.kp.public.clone();
                let e_u = view.seal(&target, &gamma, &own_x, rng);
                // A failed open is not reported here: U carries on with junk
                // so the peer sees the failure at sigma_0, as a cross-group
                // peer would.
                let (delta, peer_x) = view.open(self.creds, &m.fields[2]).unwrap_or_else(|| {
                    let junk = view.random_secret(rng);
                    (junk, ctx.random_element(rng))
                });
                let sigma0 = view.f0(&gamma, &delta, F0Tag::Sigma0);
                let mine = view.dual(&view.plaintext(&gamma, i_u), &peer_x, rng);
                let [c1, c2, pi] = view.dual_fields(&mine.0, &mine.1, &mine.2);
                let out = Message::new(MsgTag::Na3, vec![e_u, sigma0.0.to_vec(), c1, c2, pi]);
                let rec = Record {
                    peer_label: target,
                    own_x,
                    peer_x,
                    mine,
                    theirs: None,
                    sigma: [Some(sigma0), None, None],
                };
                self.state = UState::AwaitNa4 {
                    gamma,
                    delta,
                    rec: Box::new(rec),
                };
                Ok(vec![Outgoing::new(NodeId::V, &out)])
            }
            UState::AwaitNa4 { gamma, delta, mut rec } => {
                expect(MsgTag::Na4)?;
                let (_, i_u) = own_slot(&view, self.creds)?;
                let sigma1 = view.f0(&gamma, &delta, F0Tag::Sigma1);
                if m.fields[0] != sigma1.0 {
                    return Err(NaFailure::Sigma);
                }
                let (c1, c2, pi) = view.parse_dual(&m.fields[1..]).ok_or(NaFailure::Malformed)?;
                if !enc_verify(ctx, &c1, &c2, &pi, &rec.own_x, view.lin) {
                    return Err(NaFailure::Proof);
                }
                let opened = view.split_plaintext(&kp_decrypt(ctx, &self.creds.kp.x, &c1));
                if opened != Some((delta.clone(), i_u)) {
                    return Err(NaFailure::Plaintext);
                }
                let sigma2 = view.f0(&gamma, &delta, F0Tag::Sigma2);
                rec.theirs = Some((c1, c2, pi));
                rec.sigma[1] = Some(sigma1);
                rec.sigma[2] = Some(sigma2);
                self.status = Status::Accepted(SessionKey(
                    view.f0(&gamma, &delta, F0Tag::SessionKey).0.to_vec(),
                ));
                self.state = UState::Finished { rec };
                let out = Message::new(MsgTag::Na5, vec![sigma2.0.to_vec()]);
                Ok(vec![Outgoing::new(NodeId::V, &out)])
            }
            UState::Idle | UState::Finished { .. } | UState::Dead => Err(NaFailure::Malformed),
        }
    }

    pub fn key(&self) -> Option<&SessionKey> {
        match &self.status {
            Status::Accepted(k) => Some(k),
            _ => None,
        }
    }

    pub fn failure(&self) -> Option<NaFailure> {
        match &self.status {
            Status::Aborted(f) => Some(*f),
            _ => None,
        }
    }

    /// Evidence for the ProSe function, once accepted.
    pub fn evidence(&self) -> Option<TraceEvidence> {
        let UState::Finished { rec } = &self.state else {
            return None;
        };
        let theirs = rec.theirs.clone()?;
        Some(TraceEvidence {
            label_u: self.creds.label(),
            label_v: rec.peer_label.clone(),
            c1_u: rec.mine.0.clone(),
            c2_u: rec.mine.1.clone(),
            pi_u: rec.mine.2.clone(),
            x_v: rec.peer_x.clone(),
            c1_v: theirs.0,
            c2_v: theirs.1,
            pi_v: theirs.2,
            x_u: rec.own_x.clone(),
            sigma: [rec.sigma[0]?, rec.sigma[1]?, rec.sigma[2]?],
        })
    }
}

enum VState {
    AwaitNa1a,
    AwaitNa1c { n_u: Nonce, n_v: Nonce },
    AwaitNa3 { delta: Vec<u8>, dummy: bool, target: Vec<u8> },
    AwaitNa5 { gamma: Vec<u8>, delta: Vec<u8>, rec: Box<Record> },
    Finished { rec: Box<Record> },
    Dead,
}

/// UE_V, the responder.
pub struct NaResponder<'a> {
    view: NaView<'a>,
    creds: &'a UeCredentials,
    state: VState,
    status: Status,
}

impl<'a> NaResponder<'a> {
    pub fn new(view: NaView<'a>, creds: &'a UeCredentials) -> Self {
        Self {
            view,
            creds,
            state: VState::AwaitNa1a,
            status: Status::Running,
        }
    }

    fn step(&mut self, bytes: &[u8], rng: &mut dyn RngCore) -> Result<Vec<Outgoing>, NaFailure> {
        let view = self.view;
        let ctx = view.ctx();
        let m = Message::decode(bytes).map_err(|_| NaFailure::Malformed)?;
        if m.tag == MsgTag::NaAbort {
            return Err(NaFailure::PeerAbort);
        }
        let expect = |tag| if m.tag == tag { Ok(()) } else { Err(NaFailure::Malformed) };
        match std::mem::replace(&mut self.state, VState::Dead) {
            VState::AwaitNa1a => {
                expect(MsgTag::Na1a)?;
                let n_u = nonce(&m.fields[0]).ok_or(NaFailure::Malformed)?;
                let n_v = Nonce::random(rng);
                self.state = VState::AwaitNa1c { n_u, n_v };
                Ok(vec![Outgoing::new(
                    NodeId::U,
                    &Message::new(MsgTag::Na1b, vec![n_v.0.to_vec()]),
                )])
            }
            VState::AwaitNa1c { n_u, n_v } => {
                expect(MsgTag::Na1c)?;
                let (me, _) = own_slot(&view, self.creds)?;
                let g = group_selection(ctx, &m.fields[..2]).ok_or(NaFailure::Malformed)?;
                let u = user_selection(ctx, &m.fields[2..]).ok_or(NaFailure::Malformed)?;
                let s = g_select_verify(ctx, view.dir, &n_u, &n_v, &g).map_err(|_| NaFailure::Selection)?;
                let cands = u_select_verify(ctx, view.dir, &n_u, &n_v, &s, &u)
                    .map_err(|_| NaFailure::Selection)?;
                // Not selected: answer with a well-formed selection for a
                // random slot so the reply looks like any other.
                let dummy = s[me.chunk] != me.sub;
                let (chunk, member) = if dummy {
                    let a = (rng.next_u32() as usize) % view.dir.w();
                    let size = view
                        .dir
                        .group(a, s[a])
                        .map_err(|_| NaFailure::Selection)?
                        .members
                        .len();
                    (a, (rng.next_u32() as usize) % size)
                } else {
                    (me.chunk, me.member)
                };
                let mine = u_select(ctx, view.dir, &s, chunk, s[chunk], member, &n_u, &n_v, rng)
                    .map_err(|_| NaFailure::Selection)?;
                let target = cands.labels[chunk].clone();
                if view.crl.contains(&target) {
                    return Err(NaFailure::Revoked);
                }
                let delta = view.random_secret(rng);
                let e_v = view.seal(&target, &delta, &self.creds.kp.public, rng);
                let out = Message::new(
                    MsgTag::Na2,
                    vec![ctx.encode_scalar(&mine.theta2), mine.sigma_u.0.to_vec(), e_v],
                );
                self.state = VState::AwaitNa3 { delta, dummy, target };
                Ok(vec![Outgoing::new(NodeId::U, &out)])
            }
            VState::AwaitNa3 { delta, dummy, target } => {
                expect(MsgTag::Na3)?;
                if dummy {
                    return Err(NaFailure::NotSelected);
                }
                let (_, i_v) = own_slot(&view, self.creds)?;
                let (gamma, peer_x) = view.open(self.creds, &m.fields[0]).ok_or(NaFailure::Open)?;
                let sigma0 = view.f0(&gamma, &delta, F0Tag::Sigma0);
                if m.fields[1] != sigma0.0 {
                    return Err(NaFailure::Sigma);
                }
                let (c1, c2, pi) = view.parse_dual(&m.fields[2..]).ok_or(NaFailure::Malformed)?;
                let own_x = self.creds.kp.public.clone();
                if !enc_verify(ctx, &c1, &c2, &pi, &own_x, view.lin) {
                    return Err(NaFailure::Proof);
                }
                let opened = view.split_plaintext(&kp_decrypt(ctx, &self.creds.kp.x, &c1));
                if opened != Some((gamma.clone(), i_v)) {
                    return Err(NaFailure::Plaintext);
                }
                let sigma1 = view.f0(&gamma, &delta, F0Tag::Sigma1);
                let mine = view.dual(&view.plaintext(&delta, i_v), &peer_x, rng);
                let [f1, f2, f3] = view.dual_fields(&mine.0, &mine.1, &mine.2);
                let out = Message::new(MsgTag::Na4, vec![sigma1.0.to_vec(), f1, f2, f3]);
                let rec = Record {
                    peer_label: target,
                    own_x,
                    peer_x,
                    mine,
                    theirs: Some((c1, c2, pi)),
                    sigma: [Some(sigma0), Some(sigma1), None],
                };
                self.state = VState::AwaitNa5 {
                    gamma,
                    delta,
                    rec: Box::new(rec),
                };
                Ok(vec![Outgoing::new(NodeId::U, &out)])
            }
            VState::AwaitNa5 { gamma, delta, mut rec } => {
                expect(MsgTag::Na5)?;
                let sigma2 = view.f0(&gamma, &delta, F0Tag::Sigma2);
                if m.fields[0] != sigma2.0 {
                    return Err(NaFailure::Sigma);
                }
                rec.sigma[2] = Some(sigma2);
                self.status = Status::Accepted(SessionKey(
                    view.f0(&gamma, &delta, F0Tag::SessionKey).0.to_vec(),
                ));
                self.state = VState::Finished { rec };
                Ok(vec![])
            }
            VState::Finished { .. } | VState::Dead => Err(NaFailure::Malformed),
        }
    }

    pub fn key(&self) -> Option<&SessionKey> {
        match &self.status {
            Status::Accepted(k) => Some(k),
            _ => None,
        }
    }

    pub fn failure(&self) -> Option<NaFailure> {
        match &self.status {
            Status::Aborted(f) => Some(*f),
            _ => None,
        }
    }

    /// The stored `sigma_2` and the rest of the evidence, once accepted.
    pub fn evidence(&self) -> Option<TraceEvidence> {
        let VState::Finished { rec } = &self.state else {
            return None;
        };
        let theirs = rec.theirs.clone()?;
        Some(TraceEvidence {
            label_u: rec.peer_label.clone(),
            label_v: self.creds.label(),
            c1_u: theirs.0,
            c2_u: theirs.1,
            pi_u: theirs.2,
            x_v: rec.own_x.clone(),
            c1_v: rec.mine.0.clone(),
            c2_v: rec.mine.1.clone(),
            pi_v: rec.mine.2.clone(),
            x_u: rec.peer_x.clone(),
            sigma: [rec.sigma[0]?, rec.sigma[1]?, rec.sigma[2]?],
        })
    }
}

macro_rules! na_endpoint {
    ($t:ident, $node:expr, $peer:expr) => {
        impl Endpoint for $t<'_> {
            fn node(&self) -> NodeId {
                $node
            }

            fn receive(&mut self, _: NodeId, bytes: &[u8], rng: &mut dyn RngCore) -> Vec<Outgoing> {
                match self.step(bytes, rng) {
                    Ok(out) => out,
                    Err(NaFailure::PeerAbort) => {
                        self.status = Status::Aborted(NaFailure::PeerAbort);
                        vec![]
                    }
                    Err(f) => {
                        log::debug!("{} aborts: {f}", $node);
                        self.status = Status::Aborted(f);
                        vec![Outgoing {
                            to: $peer,
                            bytes: na_abort_record(),
                        }]
                    }
                }
            }

            fn timeout(&mut self) -> Vec<Outgoing> {
                self.status = Status::Aborted(NaFailure::Timeout);
                vec![Outgoing {
                    to: $peer,
                    bytes: na_abort_record(),
                }]
            }

            fn is_done(&self) -> bool {
                match (&self.status, &self.state) {
                    (Status::Running, _) => false,
                    _ => true,
                }
            }
        }
    };
}

na_endpoint!(NaInitiator, NodeId::U, NodeId::V);
na_endpoint!(NaResponder, NodeId::V, NodeId::U);

#[derive(Clone)]
pub struct NaOutcome {
    pub transcript: Transcript,
    pub key_u: Option<SessionKey>,
    pub key_v: Option<SessionKey>,
    pub failure_u: Option<NaFailure>,
    pub failure_v: Option<NaFailure>,
    /// As assembled by U (V holds the same material).
    pub evidence: Option<TraceEvidence>,
    pub evidence_v: Option<TraceEvidence>,
}

impl NaOutcome {
    pub fn accepted(&self) -> bool {
        matches!((&self.key_u, &self.key_v), (Some(a), Some(b)) if a == b)
    }

    /// The failure that started the abort (the other side reports a peer
    /// abort or a timeout).
    pub fn cause(&self) -> Option<NaFailure> {
        [self.failure_u, self.failure_v]
            .into_iter()
            .flatten()
            .find(|f| !matches!(f, NaFailure::PeerAbort | NaFailure::Timeout))
            .or(self.failure_u.or(self.failure_v))
    }
}

impl std::fmt::Debug for NaOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NaOutcome")
            .field("accepted", &self.accepted())
            .field("failure_u", &self.failure_u)
            .field("failure_v", &self.failure_v)
            .finish()
    }
}

/// One network-absent session; each side uses its own view.
pub fn run_na(
    view_u: NaView<'_>,
    creds_u: &UeCredentials,
    view_v: NaView<'_>,
    creds_v: &UeCredentials,
    faults: Vec<Fault>,
    rng: &mut dyn RngCore,
) -> NaOutcome {
    let mut u = NaInitiator::new(view_u, creds_u);
    let mut v = NaResponder::new(view_v, creds_v);
    let first = u.start(rng);
    let transcript = Bus::with_faults(faults).run(&mut [&mut u, &mut v], vec![(NodeId::U, first)], rng);
    NaOutcome {
        transcript,
        key_u: u.key().cloned(),
        key_v: v.key().cloned(),
        failure_u: u.failure(),
        failure_v: v.failure(),
        evidence: u.evidence(),
        evidence_v: v.evidence(),
    }
}
