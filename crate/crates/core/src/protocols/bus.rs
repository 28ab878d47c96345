//! In-process message bus with fault injection and a transcript log.
//!
//! Every hop goes through [`Bus::run`], which applies any configured
//! [`Fault`] to the first message matching its selector and records what
//! was actually delivered. The eNB relays CN traffic to and from the HSS
//! unchanged; it shows up only in the route names.

use std::collections::{HashSet, VecDeque};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::RngCore;

use super::wire::{Message, MsgTag};

/// Upper bound on deliveries in one run; protocols here need at most 10.
const MAX_DELIVERIES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeId {
    UeI,
    UeJ,
    Hss,
    U,
    V,
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeId::UeI => "UE_i",
            NodeId::UeJ => "UE_j",
            NodeId::Hss => "HSS",
            NodeId::U => "U",
            NodeId::V => "V",
        })
    }
}

fn route(from: NodeId, to: NodeId) -> String {
    if from == NodeId::Hss || to == NodeId::Hss {
        format!("{from}->eNB->{to}")
    } else {
        format!("{from}->{to}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outgoing {
    pub to: NodeId,
    pub bytes: Vec<u8>,
}

impl Outgoing {
    pub fn new(to: NodeId, msg: &Message) -> Self {
        Self {
            to,
            bytes: msg.encode(),
        }
    }
}

/// One protocol role attached to the bus.
pub trait Endpoint {
    fn node(&self) -> NodeId;

    fn receive(&mut self, from: NodeId, bytes: &[u8], rng: &mut dyn RngCore) -> Vec<Outgoing>;

    /// Called once when the bus goes quiet while this endpoint is still
    /// waiting for input.
    fn timeout(&mut self) -> Vec<Outgoing> {
        Vec::new()
    }

    /// Accepted or aborted; nothing more will be sent.
    fn is_done(&self) -> bool;
}

/// `stepN` or `stepN.k`: which message a fault applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Selector {
    pub step: u8,
    pub part: Option<u8>,
}

impl Selector {
    pub fn matches(&self, tag: MsgTag) -> bool {
        let (step, part) = tag.step();
        step == self.step && self.part.is_none_or(|p| p == part)
    }

    pub fn of(tag: MsgTag) -> Self {
        let (step, part) = tag.step();
        Self {
            step,
            part: Some(part),
        }
    }
}

impl FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rest = s
            .strip_prefix("step")
            .ok_or_else(|| format!("selector {s:?} must start with `step`"))?;
        let (step, part) = match rest.split_once('.') {
            Some((a, b)) => (a, Some(b)),
            None => (rest, None),
        };
        let step = step.parse().map_err(|_| format!("bad step in {s:?}"))?;
        let part = part
            .map(|p| p.parse().map_err(|_| format!("bad part in {s:?}")))
            .transpose()?;
        Ok(Self { step, part })
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.part {
            Some(p) => write!(f, "step{}.{}", self.step, p),
            None => write!(f, "step{}", self.step),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaultAction {
    Drop,
    /// XOR `mask` into byte `byte` of the encoded message.
    Tamper { byte: usize, mask: u8 },
    /// Deliver these bytes instead (a replayed recording).
    Replace(Vec<u8>),
}

/// A one-shot fault on the first message matching `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fault {
    pub target: Selector,
    pub action: FaultAction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub from: NodeId,
    pub to: NodeId,
    pub tag: Option<MsgTag>,
    /// Bytes as delivered (after any fault); empty if dropped.
    pub bytes: Vec<u8>,
    pub note: Option<&'static str>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    /// One line per message: sequence, route, tag, hex payload.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, e) in self.entries.iter().enumerate() {
            let tag = e.tag.map_or("?", MsgTag::name);
            let _ = write!(out, "{:03} {} {}", i + 1, route(e.from, e.to), tag);
            match e.note {
                Some("dropped") => out.push_str(" dropped"),
                note => {
                    let _ = write!(out, " {}", hex::encode(&e.bytes));
                    if let Some(n) = note {
                        let _ = write!(out, " ({n})");
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parses the output of [`Transcript::to_text`] back into entries
    /// (enough to pick out recorded messages for replay).
    pub fn recorded_messages(text: &str) -> Vec<(MsgTag, Vec<u8>)> {
        text.lines()
            .filter_map(|l| {
                let mut it = l.split_whitespace().skip(2);
                let tag = it.next()?;
                let bytes = hex::decode(it.next()?).ok()?;
                let tag = MsgTag::ALL.into_iter().find(|t| t.name() == tag)?;
                Some((tag, bytes))
            })
            .collect()
    }

    pub fn messages(&self, tag: MsgTag) -> impl Iterator<Item = &TranscriptEntry> {
        self.entries.iter().filter(move |e| e.tag == Some(tag))
    }

    /// Total delivered bytes per tag, in transcript order.
    pub fn sizes(&self) -> Vec<(MsgTag, usize)> {
        self.entries
            .iter()
            .filter_map(|e| e.tag.map(|t| (t, e.bytes.len())))
            .collect()
    }
}

#[derive(Debug, Default)]
pub struct Bus {
    faults: Vec<Fault>,
}

impl Bus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_faults(faults: Vec<Fault>) -> Self {
        Self { faults }
    }

    /// Delivers `initial` and everything it triggers until every endpoint
    /// is done or the bus is quiet after timeouts.
    pub fn run(
        &mut self,
        endpoints: &mut [&mut dyn Endpoint],
        initial: Vec<(NodeId, Outgoing)>,
        rng: &mut dyn RngCore,
    ) -> Transcript {
        let mut queue: VecDeque<(NodeId, Outgoing)> = initial.into();
        let mut transcript = Transcript::default();
        let mut timed_out = HashSet::new();
        let mut deliveries = 0;
        loop {
            while let Some((from, out)) = queue.pop_front() {
                deliveries += 1;
                if deliveries > MAX_DELIVERIES {
                    return transcript;
                }
                let tag = Message::peek_tag(&out.bytes);
                let (bytes, note) = self.apply_faults(tag, out.bytes);
                transcript.entries.push(TranscriptEntry {
                    from,
                    to: out.to,
                    tag,
                    bytes: bytes.clone().unwrap_or_default(),
                    note,
                });
                let Some(bytes) = bytes else { continue };
                if let Some(ep) = endpoints.iter_mut().find(|e| e.node() == out.to) {
                    if ep.is_done() {
                        continue;
                    }
                    let sender = ep.node();
                    for o in ep.receive(from, &bytes, rng) {
                        queue.push_back((sender, o));
                    }
                }
            }
            let mut fired = false;
            for ep in endpoints.iter_mut() {
                if !ep.is_done() && timed_out.insert(ep.node()) {
                    fired = true;
                    let sender = ep.node();
                    for o in ep.timeout() {
                        queue.push_back((sender, o));
                    }
                }
            }
            if !fired && queue.is_empty() {
                return transcript;
            }
        }
    }

    fn apply_faults(
        &mut self,
        tag: Option<MsgTag>,
        bytes: Vec<u8>,
    ) -> (Option<Vec<u8>>, Option<&'static str>) {
        let Some(tag) = tag else {
            return (Some(bytes), None);
        };
        let Some(pos) = self.faults.iter().position(|f| f.target.matches(tag)) else {
            return (Some(bytes), None);
        };
        match self.faults.remove(pos).action {
            FaultAction::Drop => (None, Some("dropped")),
            FaultAction::Tamper { byte, mask } => {
                let mut b = bytes;
                if let Some(x) = b.get_mut(byte) {
                    *x ^= mask;
                }
                (Some(b), Some("tampered"))
            }
            FaultAction::Replace(r) => (Some(r), Some("replayed")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Answers every message with the next tag in a fixed list.
    struct Echo {
        id: NodeId,
        peer: NodeId,
        replies: Vec<MsgTag>,
        seen: Vec<Vec<u8>>,
    }

    impl Endpoint for Echo {
        fn node(&self) -> NodeId {
            self.id
        }

        fn receive(&mut self, _: NodeId, bytes: &[u8], _: &mut dyn RngCore) -> Vec<Outgoing> {
            self.seen.push(bytes.to_vec());
            match self.replies.pop() {
                Some(t) => vec![Outgoing::new(self.peer, &Message::new(t, vec![vec![7]; t.field_count()]))],
                None => vec![],
            }
        }

        fn is_done(&self) -> bool {
            self.replies.is_empty() && !self.seen.is_empty()
        }
    }

    fn endpoints() -> (Echo, Echo) {
        (
            Echo {
                id: NodeId::U,
                peer: NodeId::V,
                replies: vec![MsgTag::Na3],
                seen: vec![],
            },
            Echo {
                id: NodeId::V,
                peer: NodeId::U,
                replies: vec![MsgTag::Na4, MsgTag::Na2],
                seen: vec![],
            },
        )
    }

    fn start() -> Vec<(NodeId, Outgoing)> {
        vec![(
            NodeId::U,
            Outgoing::new(NodeId::V, &Message::new(MsgTag::Na1a, vec![vec![1]])),
        )]
    }

    #[test]
    fn delivers_and_records() {
        let (mut u, mut v) = endpoints();
        let t = Bus::new().run(&mut [&mut u, &mut v], start(), &mut rand::rngs::mock::StepRng::new(0, 1));
        let tags: Vec<_> = t.entries.iter().map(|e| e.tag.unwrap()).collect();
        assert_eq!(tags, [MsgTag::Na1a, MsgTag::Na2, MsgTag::Na3, MsgTag::Na4]);
        let text = t.to_text();
        assert!(text.starts_with("001 U->V NA1a 4744012101000101\n"));
        assert_eq!(Transcript::recorded_messages(&text).len(), 4);
    }

    #[test]
    fn faults_fire_once() {
        let (mut u, mut v) = endpoints();
        let mut bus = Bus::with_faults(vec![Fault {
            target: "step1".parse().unwrap(),
            action: FaultAction::Tamper { byte: 7, mask: 0xff },
        }]);
        let t = bus.run(&mut [&mut u, &mut v], start(), &mut rand::rngs::mock::StepRng::new(0, 1));
        assert_eq!(v.seen[0][7], 0x01 ^ 0xff);
        assert_eq!(t.entries[0].note, Some("tampered"));
        assert_eq!(t.entries[1].note, None);

        let (mut u, mut v) = endpoints();
        let mut bus = Bus::with_faults(vec![Fault {
            target: Selector::of(MsgTag::Na2),
            action: FaultAction::Drop,
        }]);
        let t = bus.run(&mut [&mut u, &mut v], start(), &mut rand::rngs::mock::StepRng::new(0, 1));
        assert_eq!(t.entries.len(), 2);
        assert!(u.seen.is_empty());
        assert!(t.to_text().contains("NA2 dropped"));
    }

    #[test]
    fn selector_parsing() {
        assert_eq!(
            "step5.2".parse::<Selector>().unwrap(),
            Selector {
                step: 5,
                part: Some(2)
            }
        );
        assert!("step5".parse::<Selector>().unwrap().matches(MsgTag::Cn5b));
        assert!(!"step5.1".parse::<Selector>().unwrap().matches(MsgTag::Cn5b));
        assert!("5.1".parse::<Selector>().is_err());
    }
}
