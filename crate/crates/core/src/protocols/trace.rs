//! Opening a network-absent session from its evidence.
//!
//! Either participant can hand the ProSe function the two dual ciphertexts,
//! their proofs, both `X` values and the three sigmas. The ProSe function
//! opens the Linear halves with its secret key and recovers
//! `(gamma, i_U)` and `(delta, i_V)`; the sigmas tie the two halves to the
//! same session, so evidence spliced from different sessions is refused.

use thiserror::Error;

use super::registry::{parse_label, Prose};
use crate::codec::{CodecError, KvDoc};
use crate::crypto::{prf_f0, BilinearContext, Digest, F0Tag, GElem};
use crate::dualenc::{enc_verify, lin_decrypt, DualProof, KpCiphertext, LinCiphertext};

const KIND: &str = "evidence";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvidence {
    pub label_u: Vec<u8>,
    pub label_v: Vec<u8>,
    pub c1_u: KpCiphertext,
    pub c2_u: LinCiphertext,
    pub pi_u: DualProof,
    /// Recipient key of U's ciphertext.
    pub x_v: GElem,
    pub c1_v: KpCiphertext,
    pub c2_v: LinCiphertext,
    pub pi_v: DualProof,
    pub x_u: GElem,
    pub sigma: [Digest; 3],
}

impl TraceEvidence {
    pub fn to_text(&self, ctx: &BilinearContext) -> String {
        let mut d = KvDoc::new();
        d.push_hex("label-u", &self.label_u)
            .push_hex("label-v", &self.label_v)
            .push_hex("c1-u", &self.c1_u.to_bytes(ctx))
            .push_hex("c2-u", &self.c2_u.to_bytes(ctx))
            .push_hex("pi-u", &self.pi_u.to_bytes(ctx))
            .push_hex("x-v", &ctx.encode_g(&self.x_v))
            .push_hex("c1-v", &self.c1_v.to_bytes(ctx))
            .push_hex("c2-v", &self.c2_v.to_bytes(ctx))
            .push_hex("pi-v", &self.pi_v.to_bytes(ctx))
            .push_hex("x-u", &ctx.encode_g(&self.x_u));
        for (i, s) in self.sigma.iter().enumerate() {
            d.push_hex(&format!("sigma-{i}"), &s.0);
        }
        d.to_text(KIND)
    }

    pub fn from_text(ctx: &BilinearContext, text: &str) -> Result<Self, CodecError> {
        let d = KvDoc::from_text(KIND, text)?;
        let bad = |f: &'static str| move |_| CodecError::Field(f);
        let g = |k: &'static str| ctx.decode_g(&d.get_hex(k)?).map_err(bad(k));
        let sigma = |i: usize| -> Result<Digest, CodecError> {
            Ok(Digest(d.get_array(&format!("sigma-{i}"))?))
        };
        Ok(Self {
            label_u: d.get_hex("label-u")?,
            label_v: d.get_hex("label-v")?,
            c1_u: KpCiphertext::from_bytes(ctx, &d.get_hex("c1-u")?).map_err(bad("c1-u"))?,
            c2_u: LinCiphertext::from_bytes(ctx, &d.get_hex("c2-u")?).map_err(bad("c2-u"))?,
            pi_u: DualProof::from_bytes(ctx, &d.get_hex("pi-u")?).map_err(bad("pi-u"))?,
            x_v: g("x-v")?,
            c1_v: KpCiphertext::from_bytes(ctx, &d.get_hex("c1-v")?).map_err(bad("c1-v"))?,
            c2_v: LinCiphertext::from_bytes(ctx, &d.get_hex("c2-v")?).map_err(bad("c2-v"))?,
            pi_v: DualProof::from_bytes(ctx, &d.get_hex("pi-v")?).map_err(bad("pi-v"))?,
            x_u: g("x-u")?,
            sigma: [sigma(0)?, sigma(1)?, sigma(2)?],
        })
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum TraceRejection {
    #[error("proof on U's ciphertext does not verify")]
    ProofU,
    #[error("proof on V's ciphertext does not verify")]
    ProofV,
    #[error("ciphertext does not open to an embedded payload")]
    Payload,
    #[error("sigmas do not match the recovered secrets")]
    Sigma,
    #[error("recovered group index is out of range")]
    Index,
    #[error("label does not belong to the recovered group")]
    Label,
    #[error("label is neither listed nor revoked")]
    UnknownLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceResult {
    pub gamma: Vec<u8>,
    pub delta: Vec<u8>,
    pub i_u: u32,
    pub i_v: u32,
}

/// Verifies and opens `ev`.
pub fn trace_session(
    ctx: &BilinearContext,
    prose: &Prose,
    ev: &TraceEvidence,
) -> Result<TraceResult, TraceRejection> {
    let lin = prose.lin_public();
    if ev.x_u.is_identity() || ev.x_v.is_identity() {
        return Err(TraceRejection::Payload);
    }
    if !enc_verify(ctx, &ev.c1_u, &ev.c2_u, &ev.pi_u, &ev.x_v, lin) {
        return Err(TraceRejection::ProofU);
    }
    if !enc_verify(ctx, &ev.c1_v, &ev.c2_v, &ev.pi_v, &ev.x_u, lin) {
        return Err(TraceRejection::ProofV);
    }
    let open = |c2: &LinCiphertext| -> Result<(Vec<u8>, u32), TraceRejection> {
        let data = ctx
            .unembed(&lin_decrypt(ctx, prose.lin_secret(), c2))
            .map_err(|_| TraceRejection::Payload)?;
        let (s, i) = data.split_at(data.len() - 4);
        Ok((s.to_vec(), u32::from_be_bytes(i.try_into().expect("four bytes"))))
    };
    let (gamma, i_u) = open(&ev.c2_u)?;
    let (delta, i_v) = open(&ev.c2_v)?;

    let a = ctx.scalar(num_bigint::BigUint::from_bytes_be(&gamma));
    let b = ctx.scalar(num_bigint::BigUint::from_bytes_be(&delta));
    let tags = [F0Tag::Sigma0, F0Tag::Sigma1, F0Tag::Sigma2];
    if tags.iter().zip(&ev.sigma).any(|(t, s)| prf_f0(ctx, &a, &b, *t) != *s) {
        return Err(TraceRejection::Sigma);
    }

    for (label, index) in [(&ev.label_u, i_u), (&ev.label_v, i_v)] {
        let group = prose
            .dir
            .groups()
            .get(index as usize)
            .ok_or(TraceRejection::Index)?;
        let (gid, _, _) = parse_label(label).ok_or(TraceRejection::Label)?;
        if group.gid != gid {
            return Err(TraceRejection::Label);
        }
        if prose.dir.locate(label).is_none() && !prose.crl.contains(label) {
            return Err(TraceRejection::UnknownLabel);
        }
    }
    Ok(TraceResult {
        gamma,
        delta,
        i_u,
        i_v,
    })
}
