//! Registration, the two key-exchange protocols, tracing and revocation.
//!
//! Roles are [`bus::Endpoint`]s driven by a [`bus::Bus`]; [`cn::run_cn`]
//! and [`na::run_na`] wire up a full session between two devices.

pub mod bus;
pub mod cn;
pub mod na;
pub mod registry;
pub mod trace;
pub mod wire;

use std::fmt;

use thiserror::Error;

use crate::codec::CodecError;
use crate::crypto::CryptoError;
use crate::handshake::HandshakeError;
use crate::ibe::IbeError;

pub use bus::{Bus, Endpoint, Fault, FaultAction, NodeId, Outgoing, Selector, Transcript};
pub use cn::{run_cn, CnAbort, CnFailure, CnOutcome};
pub use na::{run_na, NaFailure, NaOutcome, NaView};
pub use registry::{
    register_ue, revoke_ue, Crl, Hss, Id128, Prose, UeCredentials, UeDevice, TRUE_TAG,
};
pub use trace::{trace_session, TraceEvidence, TraceRejection, TraceResult};
pub use wire::{na_abort_record, Message, MsgTag};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("identity already registered")]
    DuplicateId,
    #[error("no such group")]
    UnknownGroup,
    #[error("no such member")]
    UnknownMember,
    #[error("application identity unknown to ProSe")]
    UnknownAid,
    #[error("device is not in the directory")]
    NotInDirectory,
    #[error("invalid state: {0}")]
    State(&'static str),
    #[error(transparent)]
    Handshake(#[from] HandshakeError),
    #[error(transparent)]
    Ibe(#[from] IbeError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// A derived session key: `K_ij` encoded as a group element for the
/// network-covered protocol, `f0(gamma, delta, 3)` for the network-absent one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SessionKey(pub Vec<u8>);

impl fmt::Debug for SessionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SessionKey({}..)", hex::encode(&self.0[..4.min(self.0.len())]))
    }
}
