mod common;

use common::World;
use graad::protocols::{
    revoke_ue, trace_session, CnFailure, Fault, FaultAction, MsgTag, NaFailure, Selector,
    TraceEvidence, TraceRejection,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn fault(tag: MsgTag, action: FaultAction) -> Fault {
    Fault {
        target: Selector::of(tag),
        action,
    }
}

#[test]
fn cn_same_group_agrees_cross_group_aborts() {
    let mut w = World::new(1, 4, 2, 2);
    let out = w.cn(0, 1, vec![], &mut rng(1));
    assert!(out.accepted(), "{:?}", out.aborts);
    let out = w.cn(1, 0, vec![], &mut rng(2));
    assert!(out.accepted());
    let out = w.cn(0, 2, vec![], &mut rng(3));
    assert!(!out.accepted());
    assert!(out.key_i.is_none() && out.key_j.is_none());
    assert_eq!(out.first_abort().unwrap().reason, CnFailure::GroupMismatch);
}

#[test]
fn cn_replayed_messages_abort_fresh_sessions() {
    let mut w = World::new(2, 4, 2, 2);
    let old = w.cn(0, 1, vec![], &mut rng(1));
    assert!(old.accepted());
    for e in &old.transcript.entries {
        let tag = e.tag.unwrap();
        let out = w.cn(0, 1, vec![fault(tag, FaultAction::Replace(e.bytes.clone()))], &mut rng(9));
        assert!(!out.accepted(), "replayed {} accepted", tag.name());
    }
}

#[test]
fn cn_tamper_aborts() {
    let mut w = World::new(3, 4, 2, 2);
    for tag in MsgTag::ALL.iter().copied().filter(|t| t.is_cn()) {
        let out = w.cn(2, 3, vec![fault(tag, FaultAction::Tamper { byte: 10, mask: 1 })], &mut rng(4));
        assert!(!out.accepted(), "tampered {} accepted", tag.name());
    }
}

#[test]
fn na_same_group_agrees_and_traces() {
    let w = World::new(4, 4, 2, 2);
    let out = w.na(0, 1, vec![], &mut rng(1));
    assert!(out.accepted(), "{out:?}");
    let ev = out.evidence.clone().unwrap();
    assert_eq!(Some(&ev), out.evidence_v.as_ref());
    let ctx = w.hss.ctx();
    let back = TraceEvidence::from_text(ctx, &ev.to_text(ctx)).unwrap();
    assert_eq!(back, ev);
    let t = trace_session(ctx, &w.prose, &ev).unwrap();
    assert_eq!((t.i_u, t.i_v), (0, 0));

    let out = w.na(6, 7, vec![], &mut rng(2));
    assert!(out.accepted());
    let t = trace_session(ctx, &w.prose, out.evidence.as_ref().unwrap()).unwrap();
    assert_eq!((t.i_u, t.i_v), (3, 3));
}

#[test]
fn na_cross_group_aborts_identically() {
    let w = World::new(5, 4, 2, 2);
    let out = w.na(0, 2, vec![], &mut rng(1));
    assert!(!out.accepted());
    assert!(out.key_u.is_none() && out.key_v.is_none());
    let out2 = w.na(0, 1, vec![fault(MsgTag::Na3, FaultAction::Tamper { byte: 40, mask: 4 })], &mut rng(1));
    assert!(!out2.accepted());
    let aborts = |o: &graad::protocols::NaOutcome| {
        o.transcript
            .messages(MsgTag::NaAbort)
            .map(|e| e.bytes.clone())
            .collect::<Vec<_>>()
    };
    assert_eq!(aborts(&out).first(), aborts(&out2).first());
    assert!(!aborts(&out).is_empty());
}

#[test]
fn spliced_evidence_is_rejected() {
    let w = World::new(6, 4, 2, 2);
    let a = w.na(0, 1, vec![], &mut rng(1)).evidence.unwrap();
    let b = w.na(2, 3, vec![], &mut rng(2)).evidence.unwrap();
    let ctx = w.hss.ctx();
    let mut s = a.clone();
    s.c1_v = b.c1_v.clone();
    s.c2_v = b.c2_v.clone();
    s.pi_v = b.pi_v.clone();
    s.x_u = b.x_u.clone();
    assert_eq!(trace_session(ctx, &w.prose, &s), Err(TraceRejection::Sigma));
    let mut s = a.clone();
    s.label_u = b.label_u.clone();
    assert_eq!(trace_session(ctx, &w.prose, &s), Err(TraceRejection::Label));
    let mut s = a.clone();
    s.x_v = b.x_v.clone();
    assert_eq!(trace_session(ctx, &w.prose, &s), Err(TraceRejection::ProofU));
}

#[test]
fn revoked_peer_is_refused() {
    let mut w = World::new(7, 4, 2, 3);
    let victim = w.creds(1).label();
    revoke_ue(&mut w.prose, &victim).unwrap();
    // Stale directory, fresh CRL: the revoked label may still be selected,
    // but nobody seals to it.
    let mut refused = 0;
    for s in 0..20 {
        let out = w.na(0, 1, vec![], &mut rng(s));
        assert!(!out.accepted());
        refused += usize::from(out.cause() == Some(NaFailure::Revoked));
    }
    assert!(refused > 0);
    let out = w.na(0, 2, vec![], &mut rng(99));
    assert!(out.accepted() || out.cause() == Some(NaFailure::Revoked));
}
