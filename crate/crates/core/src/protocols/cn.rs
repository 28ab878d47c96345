//! Network-covered group-anonymous key exchange (HSS/AuC and ProSe assisted).
//!
//! ```text
//! UE_i -> UE_j        CN1   sid, delta_i, X, E_i
//! UE_j -> HSS         CN2   sid, delta_i, delta_j, E_i, E_j, X, Y
//! HSS  -> UE_j        CN3   sid, E'_i, E'_j
//! UE_j -> UE_i        CN4   E'_i, Y
//! UE_i -> UE_j        CN5a  RES_i
//! UE_j -> HSS         CN5b  sid, RES_j
//! HSS  -> UE_j        CN6a  XRES_i, XRES_j
//! UE_j -> UE_i        CN6b  XRES_i
//! ```
//!
//! Each UE opens only the `E'` sealed under its own `K` and checks only its
//! own `ack`; `E'_i` reaches UE_i through UE_j.

use rand::RngCore;
use thiserror::Error;

use super::bus::{Bus, Endpoint, Fault, NodeId, Outgoing, Transcript};
use super::registry::{ack_tag, delta_tag, xor128, Hss, Id128, Prose, UeDevice, ID_LEN};
use super::wire::{Message, MsgTag};
use super::SessionKey;
use crate::crypto::{
    dh_keygen, dh_shared, hash_fields, sym_decrypt, sym_encrypt, BilinearContext, Digest, GElem,
    Scalar, DIGEST_LEN,
};
use crate::ibe::{ibe_decrypt, ibe_encrypt, IbeParams};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum CnFailure {
    #[error("malformed message")]
    Malformed,
    #[error("message out of order")]
    UnexpectedMessage,
    #[error("session id already seen")]
    Replay,
    #[error("session id does not match")]
    SessionMismatch,
    #[error("identity is not a subscriber")]
    UnknownIdentity,
    #[error("devices are not in the same group")]
    GroupMismatch,
    #[error("acknowledgement does not verify")]
    AckMismatch,
    #[error("challenge response does not verify")]
    ResponseMismatch,
    #[error("expected response does not verify")]
    XresMismatch,
    #[error("degenerate key share")]
    Degenerate,
    #[error("no response")]
    Timeout,
}

/// Where and why a role gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CnAbort {
    pub node: NodeId,
    pub step: u8,
    pub reason: CnFailure,
}

impl std::fmt::Display for CnAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} aborted at step {}: {}", self.node, self.step, self.reason)
    }
}

#[derive(Debug, Clone)]
enum Status {
    Running,
    Accepted(SessionKey),
    /// The HSS finished its part.
    Completed,
    Aborted(CnAbort),
}

fn tid(ctx: &BilinearContext, delta: &Digest, share: &GElem, sid: &Id128) -> Vec<u8> {
    [&delta.0[..], &ctx.encode_g(share), &sid[..]].concat()
}

fn xres(k: &[u8], sid: &Id128) -> Digest {
    hash_fields(&[k, sid])
}

/// `RES_i xor R` with `R` repeated over the width of `RES_i`.
fn xor_cyclic(data: &[u8], r: &Id128) -> Vec<u8> {
    data.iter()
        .zip(r.iter().cycle())
        .map(|(a, b)| a ^ b)
        .collect()
}

fn id128(b: &[u8]) -> Result<Id128, CnFailure> {
    b.try_into().map_err(|_| CnFailure::Malformed)
}

fn digest(b: &[u8]) -> Result<Digest, CnFailure> {
    Digest::from_slice(b).ok_or(CnFailure::Malformed)
}

/// Splits `ack || (sid xor R)` and checks the ack.
fn open_ack(plain: &[u8], ak: &Id128, sid: &Id128) -> Result<Id128, CnFailure> {
    if plain.len() != DIGEST_LEN + ID_LEN {
        return Err(CnFailure::Malformed);
    }
    let (ack, masked) = plain.split_at(DIGEST_LEN);
    if ack != ack_tag(ak, sid).0 {
        return Err(CnFailure::AckMismatch);
    }
    Ok(xor128(&id128(masked)?, sid))
}

enum InitiatorState {
    Idle,
    AwaitCn4 { sid: Id128, x: Scalar },
    AwaitCn6b { sid: Id128, x: Scalar, y_share: GElem },
    Done,
}

/// UE_i.
pub struct CnInitiator<'a> {
    dev: &'a mut UeDevice,
    params: &'a IbeParams,
    state: InitiatorState,
    status: Status,
}

impl<'a> CnInitiator<'a> {
    pub fn new(dev: &'a mut UeDevice, params: &'a IbeParams) -> Self {
        Self {
            dev,
            params,
            state: InitiatorState::Idle,
            status: Status::Running,
        }
    }

    /// Step 1: draws `sid`, `x_i` and sends CN1 to UE_j.
    pub fn start(&mut self, rng: &mut dyn RngCore) -> Outgoing {
        let ctx = self.params.ctx();
        let sid = loop {
            let mut s = [0u8; ID_LEN];
            rng.fill_bytes(&mut s);
            if self.dev.seen.insert(s) {
                break s;
            }
        };
        let kp = dh_keygen(ctx, rng);
        let creds = &self.dev.creds;
        let delta = delta_tag(&creds.ak, &sid);
        let e = ibe_encrypt(self.params, &tid(ctx, &delta, &kp.public, &sid), &creds.id, rng)
            .expect("TID is non-empty and ID is 128 bits");
        let msg = Message::new(
            MsgTag::Cn1,
            vec![
                sid.to_vec(),
                delta.0.to_vec(),
                ctx.encode_g(&kp.public),
                self.params.encode_ciphertext(&e),
            ],
        );
        self.state = InitiatorState::AwaitCn4 { sid, x: kp.secret };
        Outgoing::new(NodeId::UeJ, &msg)
    }

    fn step(&mut self, bytes: &[u8], rng: &mut dyn RngCore) -> Result<Vec<Outgoing>, (u8, CnFailure)> {
        let ctx = self.params.ctx();
        let creds = &self.dev.creds;
        match std::mem::replace(&mut self.state, InitiatorState::Done) {
            InitiatorState::AwaitCn4 { sid, x } => {
                let m = Message::expect(bytes, MsgTag::Cn4).map_err(|_| (5, CnFailure::Malformed))?;
                let plain = sym_decrypt(&creds.k, &m.fields[0]).map_err(|_| (5, CnFailure::AckMismatch))?;
                let r = open_ack(&plain, &creds.ak, &sid).map_err(|e| (5, e))?;
                let y_share = ctx.decode_g(&m.fields[1]).map_err(|_| (5, CnFailure::Malformed))?;
                if y_share.is_identity() {
                    return Err((5, CnFailure::Degenerate));
                }
                let res = sym_encrypt(&creds.k, &r, rng);
                self.state = InitiatorState::AwaitCn6b { sid, x, y_share };
                Ok(vec![Outgoing::new(NodeId::UeJ, &Message::new(MsgTag::Cn5a, vec![res]))])
            }
            InitiatorState::AwaitCn6b { sid, x, y_share } => {
                let m = Message::expect(bytes, MsgTag::Cn6b).map_err(|_| (6, CnFailure::Malformed))?;
                if m.fields[0] != xres(&creds.k.0, &sid).0 {
                    return Err((6, CnFailure::XresMismatch));
                }
                let k = dh_shared(ctx, &x, &y_share).map_err(|_| (6, CnFailure::Degenerate))?;
                self.status = Status::Accepted(SessionKey(ctx.encode_g(&k)));
                Ok(vec![])
            }
            InitiatorState::Idle | InitiatorState::Done => Err((0, CnFailure::UnexpectedMessage)),
        }
    }

    pub fn key(&self) -> Option<&SessionKey> {
        match &self.status {
            Status::Accepted(k) => Some(k),
            _ => None,
        }
    }

    pub fn abort(&self) -> Option<CnAbort> {
        match &self.status {
            Status::Aborted(a) => Some(*a),
            _ => None,
        }
    }
}

enum ResponderState {
    AwaitCn1,
    AwaitCn3 { sid: Id128, y: Scalar, x_share: GElem },
    AwaitCn5a { sid: Id128, y: Scalar, x_share: GElem, r: Id128 },
    AwaitCn6a { y: Scalar, x_share: GElem, sid: Id128 },
    Done,
}

/// UE_j.
pub struct CnResponder<'a> {
    dev: &'a mut UeDevice,
    params: &'a IbeParams,
    state: ResponderState,
    status: Status,
}

impl<'a> CnResponder<'a> {
    pub fn new(dev: &'a mut UeDevice, params: &'a IbeParams) -> Self {
        Self {
            dev,
            params,
            state: ResponderState::AwaitCn1,
            status: Status::Running,
        }
    }

    fn step(&mut self, bytes: &[u8], rng: &mut dyn RngCore) -> Result<Vec<Outgoing>, (u8, CnFailure)> {
        let ctx = self.params.ctx();
        match std::mem::replace(&mut self.state, ResponderState::Done) {
            ResponderState::AwaitCn1 => {
                let m = Message::expect(bytes, MsgTag::Cn1).map_err(|_| (2, CnFailure::Malformed))?;
                let sid = id128(&m.fields[0]).map_err(|e| (2, e))?;
                let x_share = ctx.decode_g(&m.fields[2]).map_err(|_| (2, CnFailure::Malformed))?;
                if x_share.is_identity() {
                    return Err((2, CnFailure::Degenerate));
                }
                if !self.dev.seen.insert(sid) {
                    return Err((2, CnFailure::Replay));
                }
                let creds = &self.dev.creds;
                let kp = dh_keygen(ctx, rng);
                let delta_j = delta_tag(&creds.ak, &sid);
                let e_j = ibe_encrypt(self.params, &tid(ctx, &delta_j, &kp.public, &sid), &creds.id, rng)
                    .expect("TID is non-empty and ID is 128 bits");
                let [sid_f, delta_i, x_f, e_i]: [Vec<u8>; 4] =
                    m.fields.try_into().expect("decoder fixed the count");
                let out = Message::new(
                    MsgTag::Cn2,
                    vec![
                        sid_f,
                        delta_i,
                        delta_j.0.to_vec(),
                        e_i,
                        self.params.encode_ciphertext(&e_j),
                        x_f,
                        ctx.encode_g(&kp.public),
                    ],
                );
                self.state = ResponderState::AwaitCn3 {
                    sid,
                    y: kp.secret,
                    x_share,
                };
                Ok(vec![Outgoing::new(NodeId::Hss, &out)])
            }
            ResponderState::AwaitCn3 { sid, y, x_share } => {
                let creds = &self.dev.creds;
                let m = Message::expect(bytes, MsgTag::Cn3).map_err(|_| (4, CnFailure::Malformed))?;
                if m.fields[0] != sid {
                    return Err((4, CnFailure::SessionMismatch));
                }
                let plain = sym_decrypt(&creds.k, &m.fields[2]).map_err(|_| (4, CnFailure::AckMismatch))?;
                let r = open_ack(&plain, &creds.ak, &sid).map_err(|e| (4, e))?;
                let y_share = ctx.exp_g(&y);
                let out = Message::new(MsgTag::Cn4, vec![m.fields[1].clone(), ctx.encode_g(&y_share)]);
                self.state = ResponderState::AwaitCn5a { sid, y, x_share, r };
                Ok(vec![Outgoing::new(NodeId::UeI, &out)])
            }
            ResponderState::AwaitCn5a { sid, y, x_share, r } => {
                let m = Message::expect(bytes, MsgTag::Cn5a).map_err(|_| (5, CnFailure::Malformed))?;
                let res_j = sym_encrypt(&self.dev.creds.k, &xor_cyclic(&m.fields[0], &r), rng);
                let out = Message::new(MsgTag::Cn5b, vec![sid.to_vec(), res_j]);
                self.state = ResponderState::AwaitCn6a { y, x_share, sid };
                Ok(vec![Outgoing::new(NodeId::Hss, &out)])
            }
            ResponderState::AwaitCn6a { y, x_share, sid } => {
                let m = Message::expect(bytes, MsgTag::Cn6a).map_err(|_| (6, CnFailure::Malformed))?;
                if m.fields[1] != xres(&self.dev.creds.k.0, &sid).0 {
                    return Err((6, CnFailure::XresMismatch));
                }
                let k = dh_shared(ctx, &y, &x_share).map_err(|_| (6, CnFailure::Degenerate))?;
                self.status = Status::Accepted(SessionKey(ctx.encode_g(&k)));
                let out = Message::new(MsgTag::Cn6b, vec![m.fields[0].clone()]);
                Ok(vec![Outgoing::new(NodeId::UeI, &out)])
            }
            ResponderState::Done => Err((0, CnFailure::UnexpectedMessage)),
        }
    }

    pub fn key(&self) -> Option<&SessionKey> {
        match &self.status {
            Status::Accepted(k) => Some(k),
            _ => None,
        }
    }

    pub fn abort(&self) -> Option<CnAbort> {
        match &self.status {
            Status::Aborted(a) => Some(*a),
            _ => None,
        }
    }
}

enum ServerState {
    AwaitCn2,
    AwaitCn5b { sid: Id128, r: Id128, k_i: [u8; 16], k_j: [u8; 16] },
    Done,
}

/// HSS/AuC, consulting ProSe over a trusted internal channel.
pub struct CnServer<'a> {
    hss: &'a Hss,
    prose: &'a Prose,
    state: ServerState,
    status: Status,
}

impl<'a> CnServer<'a> {
    pub fn new(hss: &'a Hss, prose: &'a Prose) -> Self {
        Self {
            hss,
            prose,
            state: ServerState::AwaitCn2,
            status: Status::Running,
        }
    }

    pub fn completed(&self) -> bool {
        matches!(self.status, Status::Completed)
    }

    pub fn abort(&self) -> Option<CnAbort> {
        match &self.status {
            Status::Aborted(a) => Some(*a),
            _ => None,
        }
    }

    fn open_identity(&self, delta: &Digest, share: &[u8], sid: &Id128, e: &[u8]) -> Result<Id128, CnFailure> {
        let ctx = self.hss.ctx();
        let share = ctx.decode_g(share).map_err(|_| CnFailure::Malformed)?;
        let d = self
            .hss
            .extract(&tid(ctx, delta, &share, sid))
            .map_err(|_| CnFailure::Malformed)?;
        let c = self.hss.params.decode_ciphertext(e).map_err(|_| CnFailure::Malformed)?;
        ibe_decrypt(&self.hss.params, &d, &c).map_err(|_| CnFailure::UnknownIdentity)
    }

    fn step(&mut self, bytes: &[u8], rng: &mut dyn RngCore) -> Result<Vec<Outgoing>, (u8, CnFailure)> {
        match std::mem::replace(&mut self.state, ServerState::Done) {
            ServerState::AwaitCn2 => {
                let m = Message::expect(bytes, MsgTag::Cn2).map_err(|_| (3, CnFailure::Malformed))?;
                let f = &m.fields;
                let sid = id128(&f[0]).map_err(|e| (3, e))?;
                let delta_i = digest(&f[1]).map_err(|e| (3, e))?;
                let delta_j = digest(&f[2]).map_err(|e| (3, e))?;
                if !self.hss.note_sid(sid) {
                    return Err((3, CnFailure::Replay));
                }
                let id_i = self.open_identity(&delta_i, &f[5], &sid, &f[3]).map_err(|e| (3, e))?;
                let id_j = self.open_identity(&delta_j, &f[6], &sid, &f[4]).map_err(|e| (3, e))?;
                let sub_i = self.hss.subscriber(&id_i).ok_or((3, CnFailure::UnknownIdentity))?;
                let sub_j = self.hss.subscriber(&id_j).ok_or((3, CnFailure::UnknownIdentity))?;
                if id_i == id_j {
                    return Err((3, CnFailure::UnknownIdentity));
                }
                let (ack_i, ack_j) = self
                    .prose
                    .group_check(&sid, &delta_i, &delta_j, &sub_i.aid, &sub_j.aid)
                    .map_err(|_| (3, CnFailure::UnknownIdentity))?
                    .ok_or((3, CnFailure::GroupMismatch))?;
                let mut r = [0u8; ID_LEN];
                rng.fill_bytes(&mut r);
                let masked = xor128(&sid, &r);
                let seal = |k, ack: &Digest, rng: &mut dyn RngCore| {
                    sym_encrypt(k, &[&ack.0[..], &masked[..]].concat(), rng)
                };
                let e_i = seal(&sub_i.k, &ack_i, rng);
                let e_j = seal(&sub_j.k, &ack_j, rng);
                self.state = ServerState::AwaitCn5b {
                    sid,
                    r,
                    k_i: sub_i.k.0,
                    k_j: sub_j.k.0,
                };
                let out = Message::new(MsgTag::Cn3, vec![sid.to_vec(), e_i, e_j]);
                Ok(vec![Outgoing::new(NodeId::UeJ, &out)])
            }
            ServerState::AwaitCn5b { sid, r, k_i, k_j } => {
                let m = Message::expect(bytes, MsgTag::Cn5b).map_err(|_| (6, CnFailure::Malformed))?;
                if m.fields[0] != sid {
                    return Err((6, CnFailure::SessionMismatch));
                }
                let fail = (6, CnFailure::ResponseMismatch);
                let inner = sym_decrypt(&crate::crypto::SymKey(k_j), &m.fields[1]).map_err(|_| fail)?;
                let res_i = xor_cyclic(&inner, &r);
                let got = sym_decrypt(&crate::crypto::SymKey(k_i), &res_i).map_err(|_| fail)?;
                if got != r {
                    return Err(fail);
                }
                self.status = Status::Completed;
                let out = Message::new(
                    MsgTag::Cn6a,
                    vec![xres(&k_i, &sid).0.to_vec(), xres(&k_j, &sid).0.to_vec()],
                );
                Ok(vec![Outgoing::new(NodeId::UeJ, &out)])
            }
            ServerState::Done => Err((0, CnFailure::UnexpectedMessage)),
        }
    }
}

macro_rules! cn_endpoint {
    ($t:ident, $node:expr) => {
        impl Endpoint for $t<'_> {
            fn node(&self) -> NodeId {
                $node
            }

            fn receive(&mut self, _: NodeId, bytes: &[u8], rng: &mut dyn RngCore) -> Vec<Outgoing> {
                match self.step(bytes, rng) {
                    Ok(out) => out,
                    Err((step, reason)) => {
                        self.status = Status::Aborted(CnAbort {
                            node: $node,
                            step,
                            reason,
                        });
                        vec![]
                    }
                }
            }

            fn timeout(&mut self) -> Vec<Outgoing> {
                self.status = Status::Aborted(CnAbort {
                    node: $node,
                    step: 0,
                    reason: CnFailure::Timeout,
                });
                vec![]
            }

            fn is_done(&self) -> bool {
                !matches!(self.status, Status::Running)
            }
        }
    };
}

cn_endpoint!(CnInitiator, NodeId::UeI);
cn_endpoint!(CnResponder, NodeId::UeJ);
cn_endpoint!(CnServer, NodeId::Hss);

#[derive(Debug, Clone)]
pub struct CnOutcome {
    pub transcript: Transcript,
    pub key_i: Option<SessionKey>,
    pub key_j: Option<SessionKey>,
    pub aborts: Vec<CnAbort>,
}

impl CnOutcome {
    /// Both devices accepted with the same key.
    pub fn accepted(&self) -> bool {
        matches!((&self.key_i, &self.key_j), (Some(a), Some(b)) if a == b)
    }

    /// The first abort, by step.
    pub fn first_abort(&self) -> Option<CnAbort> {
        self.aborts
            .iter()
            .filter(|a| a.reason != CnFailure::Timeout)
            .min_by_key(|a| a.step)
            .or_else(|| self.aborts.first())
            .copied()
    }
}

/// One network-covered session between `ue_i` and `ue_j`.
pub fn run_cn(
    hss: &Hss,
    prose: &Prose,
    ue_i: &mut UeDevice,
    ue_j: &mut UeDevice,
    faults: Vec<Fault>,
    rng: &mut dyn RngCore,
) -> CnOutcome {
    let mut a = CnInitiator::new(ue_i, &hss.params);
    let mut b = CnResponder::new(ue_j, &hss.params);
    let mut s = CnServer::new(hss, prose);
    let first = a.start(rng);
    let transcript = Bus::with_faults(faults).run(&mut [&mut a, &mut b, &mut s], vec![(NodeId::UeI, first)], rng);
    let aborts = [a.abort(), b.abort(), s.abort()].into_iter().flatten().collect();
    CnOutcome {
        transcript,
        key_i: a.key().cloned(),
        key_j: b.key().cloned(),
        aborts,
    }
}
