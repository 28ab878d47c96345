//! Key management: the HSS/AuC, the ProSe function, device credentials,
//! registration and revocation.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::sync::Mutex;

use rand::RngCore;

use super::ProtocolError;
use crate::codec::KvDoc;
use crate::crypto::{hash_h, Backend, BilinearContext, Digest, SymKey};
use crate::dualenc::{kp_keygen, lin_keygen, KpKeypair, LinKeypair, LinPublicKey, LinSecretKey};
use crate::handshake::{Group, GroupDirectory, Slot};
use crate::ibe::{ibe_extract, ibe_setup, IbeMasterKey, IbeParams, IbePrivateKey};

pub const ID_LEN: usize = 16;
pub type Id128 = [u8; ID_LEN];

/// `true` as XORed into 128-bit acknowledgement material.
pub const TRUE_TAG: Id128 = {
    let mut t = [0u8; ID_LEN];
    t[ID_LEN - 1] = 1;
    t
};

/// Capacity of the HSS's replay set.
pub const HSS_SEEN_CAPACITY: usize = 1 << 16;

pub fn xor128(a: &Id128, b: &Id128) -> Id128 {
    std::array::from_fn(|i| a[i] ^ b[i])
}

/// `AK = AID xor GID xor K_P`.
pub fn authorization_key(aid: &Id128, gid: &Id128, k_p: &Id128) -> Id128 {
    xor128(&xor128(aid, gid), k_p)
}

/// `delta = H(AK xor sid)`.
pub fn delta_tag(ak: &Id128, sid: &Id128) -> Digest {
    hash_h(&xor128(ak, sid))
}

/// `ack = H(AK xor sid xor true)`.
pub fn ack_tag(ak: &Id128, sid: &Id128) -> Digest {
    hash_h(&xor128(&xor128(ak, sid), &TRUE_TAG))
}

/// The IBE identity of a member for the handshake: `GID || AID || epoch`.
pub fn member_label(gid: &Id128, aid: &Id128, epoch: u32) -> Vec<u8> {
    [&gid[..], &aid[..], &epoch.to_be_bytes()].concat()
}

/// Splits a member label into `(GID, AID, epoch)`.
pub fn parse_label(label: &[u8]) -> Option<(Id128, Id128, u32)> {
    if label.len() != 2 * ID_LEN + 4 {
        return None;
    }
    let gid = label[..ID_LEN].try_into().ok()?;
    let aid = label[ID_LEN..2 * ID_LEN].try_into().ok()?;
    let epoch = u32::from_be_bytes(label[2 * ID_LEN..].try_into().ok()?);
    Some((gid, aid, epoch))
}

fn random_id<R: RngCore + ?Sized>(rng: &mut R) -> Id128 {
    let mut b = [0u8; ID_LEN];
    rng.fill_bytes(&mut b);
    b
}

/// Everything a device holds after registration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UeCredentials {
    pub id: Id128,
    pub aid: Id128,
    pub gid: Id128,
    pub k: SymKey,
    pub ak: Id128,
    pub epoch: u32,
    /// IBE key for [`UeCredentials::label`].
    pub ibe_key: IbePrivateKey,
    pub kp: KpKeypair,
}

impl UeCredentials {
    pub fn uid(&self) -> Vec<u8> {
        [&self.gid[..], &self.aid[..]].concat()
    }

    pub fn label(&self) -> Vec<u8> {
        member_label(&self.gid, &self.aid, self.epoch)
    }
}

/// Bounded replay set; the oldest entry is evicted first.
#[derive(Debug, Default)]
pub struct SeenSet {
    capacity: usize,
    set: HashSet<Id128>,
    order: VecDeque<Id128>,
}

impl SeenSet {
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            capacity,
            set: HashSet::new(),
            order: VecDeque::new(),
        }
    }

    /// `true` if `sid` was not seen before (and is now recorded).
    pub fn insert(&mut self, sid: Id128) -> bool {
        if !self.set.insert(sid) {
            return false;
        }
        self.order.push_back(sid);
        if self.order.len() > self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.set.remove(&old);
            }
        }
        true
    }

    pub fn contains(&self, sid: &Id128) -> bool {
        self.set.contains(sid)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Id128> {
        self.order.iter()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// A registered device: credentials plus the session ids it has seen.
#[derive(Debug)]
pub struct UeDevice {
    pub creds: UeCredentials,
    pub seen: SeenSet,
}

impl UeDevice {
    pub fn new(creds: UeCredentials) -> Self {
        Self {
            creds,
            seen: SeenSet::with_capacity(HSS_SEEN_CAPACITY),
        }
    }

    pub fn to_doc(&self, ctx: &BilinearContext) -> KvDoc {
        let c = &self.creds;
        let mut d = KvDoc::new();
        d.push_hex("id", &c.id)
            .push_hex("aid", &c.aid)
            .push_hex("gid", &c.gid)
            .push_hex("k", &c.k.0)
            .push_hex("ak", &c.ak)
            .push("epoch", c.epoch.to_string())
            .push_hex("ibe-key", &c.ibe_key.to_bytes(ctx))
            .push_hex("kp-secret", &ctx.encode_scalar(&c.kp.x))
            .push_hex("kp-public", &ctx.encode_g(&c.kp.public));
        for sid in self.seen.iter() {
            d.push_hex("seen", sid);
        }
        d
    }

    pub fn from_doc(ctx: &BilinearContext, d: &KvDoc) -> Result<Self, ProtocolError> {
        let creds = UeCredentials {
            id: d.get_array("id")?,
            aid: d.get_array("aid")?,
            gid: d.get_array("gid")?,
            k: SymKey(d.get_array("k")?),
            ak: d.get_array("ak")?,
            epoch: d.get_parsed("epoch")?,
            ibe_key: IbePrivateKey::from_bytes(ctx, &d.get_hex("ibe-key")?)?,
            kp: KpKeypair {
                x: ctx.decode_scalar(&d.get_hex("kp-secret")?)?,
                public: ctx.decode_g(&d.get_hex("kp-public")?)?,
            },
        };
        if ctx.exp_g(&creds.kp.x) != creds.kp.public {
            return Err(ProtocolError::State("key-private keypair mismatch"));
        }
        let mut dev = Self::new(creds);
        for s in d.all("seen") {
            let sid = hex::decode(s)
                .ok()
                .and_then(|b| Id128::try_from(b).ok())
                .ok_or(ProtocolError::State("bad seen sid"))?;
            dev.seen.insert(sid);
        }
        Ok(dev)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subscriber {
    pub aid: Id128,
    pub k: SymKey,
}

/// HSS/AuC: the IBE master key and the subscriber table.
#[derive(Debug)]
pub struct Hss {
    pub params: IbeParams,
    msk: IbeMasterKey,
    subscribers: BTreeMap<Id128, Subscriber>,
    seen: Mutex<SeenSet>,
}

impl Hss {
    pub fn setup<R: RngCore + ?Sized>(backend: Backend, rng: &mut R) -> Self {
        let (params, msk) = ibe_setup(backend, rng);
        Self {
            params,
            msk,
            subscribers: BTreeMap::new(),
            seen: Mutex::new(SeenSet::with_capacity(HSS_SEEN_CAPACITY)),
        }
    }

    pub fn ctx(&self) -> &BilinearContext {
        self.params.ctx()
    }

    pub fn subscriber(&self, id: &Id128) -> Option<&Subscriber> {
        self.subscribers.get(id)
    }

    pub fn subscribers(&self) -> impl Iterator<Item = (&Id128, &Subscriber)> {
        self.subscribers.iter()
    }

    /// IBE key for an arbitrary identity string (e.g. a `TID`).
    pub fn extract(&self, identity: &[u8]) -> Result<IbePrivateKey, ProtocolError> {
        Ok(ibe_extract(&self.params, &self.msk, identity)?)
    }

    /// Records `sid`; `false` if it was already seen.
    pub fn note_sid(&self, sid: Id128) -> bool {
        self.seen.lock().expect("seen-set lock").insert(sid)
    }

    pub fn to_doc(&self) -> KvDoc {
        let ctx = self.ctx();
        let mut d = KvDoc::new();
        d.push("backend", ctx.backend().name())
            .push_hex("params", &self.params.to_bytes())
            .push_hex("msk", &self.msk.to_bytes(ctx));
        for (id, s) in &self.subscribers {
            d.push(
                "subscriber",
                format!("{}:{}:{}", hex::encode(id), hex::encode(s.aid), hex::encode(s.k.0)),
            );
        }
        for sid in self.seen.lock().expect("seen-set lock").iter() {
            d.push_hex("seen", sid);
        }
        d
    }

    pub fn from_doc(d: &KvDoc) -> Result<Self, ProtocolError> {
        let params = IbeParams::from_bytes(&d.get_hex("params")?)?;
        let msk = IbeMasterKey::from_bytes(params.ctx(), &d.get_hex("msk")?)?;
        if msk.public(params.ctx()) != *params.g_pub() {
            return Err(ProtocolError::State("master key does not match parameters"));
        }
        let mut subscribers = BTreeMap::new();
        for line in d.all("subscriber") {
            let parts: Vec<_> = line.split(':').filter_map(|p| hex::decode(p).ok()).collect();
            let [id, aid, k] = parts.as_slice() else {
                return Err(ProtocolError::State("bad subscriber line"));
            };
            let bad = || ProtocolError::State("bad subscriber width");
            subscribers.insert(
                Id128::try_from(id.as_slice()).map_err(|_| bad())?,
                Subscriber {
                    aid: Id128::try_from(aid.as_slice()).map_err(|_| bad())?,
                    k: SymKey::from_slice(k)?,
                },
            );
        }
        let mut seen = SeenSet::with_capacity(HSS_SEEN_CAPACITY);
        for s in d.all("seen") {
            let sid = hex::decode(s)
                .ok()
                .and_then(|b| Id128::try_from(b).ok())
                .ok_or(ProtocolError::State("bad seen sid"))?;
            seen.insert(sid);
        }
        Ok(Self {
            params,
            msk,
            subscribers,
            seen: Mutex::new(seen),
        })
    }
}

/// Public revocation list of member labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Crl {
    labels: BTreeSet<Vec<u8>>,
}

impl Crl {
    pub fn contains(&self, label: &[u8]) -> bool {
        self.labels.contains(label)
    }

    pub fn insert(&mut self, label: Vec<u8>) -> bool {
        self.labels.insert(label)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("graad-crl v1\n");
        for l in &self.labels {
            out.push_str(&hex::encode(l));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ProtocolError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("graad-crl v1") {
            return Err(ProtocolError::State("CRL header"));
        }
        let mut crl = Self::default();
        for l in lines.map(str::trim).filter(|l| !l.is_empty()) {
            let label = hex::decode(l).map_err(|_| ProtocolError::State("CRL entry hex"))?;
            if parse_label(&label).is_none() {
                return Err(ProtocolError::State("CRL entry is not a member label"));
            }
            crl.insert(label);
        }
        Ok(crl)
    }
}

/// ProSe function: group membership, `K_P`, the Linear (tracing) keypair,
/// the directory and the revocation list.
#[derive(Debug)]
pub struct Prose {
    pub k_p: Id128,
    lin: LinKeypair,
    groups_of: BTreeMap<Id128, Id128>,
    pub dir: GroupDirectory,
    pub crl: Crl,
}

impl Prose {
    /// A ProSe function managing `gids.len()` groups in `w` chunks.
    pub fn setup<R: RngCore + ?Sized>(
        ctx: &BilinearContext,
        w: usize,
        gids: &[Id128],
        rng: &mut R,
    ) -> Result<Self, ProtocolError> {
        let groups = gids
            .iter()
            .map(|g| Group {
                gid: g.to_vec(),
                members: Vec::new(),
            })
            .collect();
        Ok(Self {
            k_p: random_id(rng),
            lin: lin_keygen(ctx, rng),
            groups_of: BTreeMap::new(),
            dir: GroupDirectory::roster(w, groups)?,
            crl: Crl::default(),
        })
    }

    pub fn lin_public(&self) -> &LinPublicKey {
        &self.lin.public
    }

    pub(crate) fn lin_secret(&self) -> &LinSecretKey {
        &self.lin.secret
    }

    pub fn group_of(&self, aid: &Id128) -> Option<&Id128> {
        self.groups_of.get(aid)
    }

    /// The ProSe side of the network-covered group gate. Checks that both
    /// `delta`s were made with the claimed devices' authorization keys and
    /// that the two share a group; on success returns `(ack_i, ack_j)`.
    pub fn group_check(
        &self,
        sid: &Id128,
        delta_i: &Digest,
        delta_j: &Digest,
        aid_i: &Id128,
        aid_j: &Id128,
    ) -> Result<Option<(Digest, Digest)>, ProtocolError> {
        let gid_i = self.group_of(aid_i).ok_or(ProtocolError::UnknownAid)?;
        let gid_j = self.group_of(aid_j).ok_or(ProtocolError::UnknownAid)?;
        let ak_i = authorization_key(aid_i, gid_i, &self.k_p);
        let ak_j = authorization_key(aid_j, gid_j, &self.k_p);
        if gid_i != gid_j || delta_tag(&ak_i, sid) != *delta_i || delta_tag(&ak_j, sid) != *delta_j
        {
            return Ok(None);
        }
        Ok(Some((ack_tag(&ak_i, sid), ack_tag(&ak_j, sid))))
    }

    /// The directory as published to devices; fails while any group is empty.
    pub fn publish(&self) -> Result<GroupDirectory, ProtocolError> {
        self.dir.validate()?;
        Ok(self.dir.clone())
    }

    pub fn to_doc(&self, ctx: &BilinearContext) -> KvDoc {
        let mut d = KvDoc::new();
        d.push_hex("k-p", &self.k_p)
            .push_hex("lin-public", &self.lin.public.to_bytes(ctx))
            .push_hex("lin-secret", &self.lin.secret.to_bytes(ctx));
        for (aid, gid) in &self.groups_of {
            d.push("member", format!("{}:{}", hex::encode(aid), hex::encode(gid)));
        }
        d
    }

    pub fn from_parts(
        ctx: &BilinearContext,
        d: &KvDoc,
        dir: GroupDirectory,
        crl: Crl,
    ) -> Result<Self, ProtocolError> {
        let public = LinPublicKey::from_bytes(ctx, &d.get_hex("lin-public")?)?;
        let secret = LinSecretKey::from_bytes(ctx, &d.get_hex("lin-secret")?)?;
        if ctx.exp(&public.u, &secret.x_hat) != public.h || ctx.exp(&public.v, &secret.y_hat) != public.h
        {
            return Err(ProtocolError::State("Linear keypair mismatch"));
        }
        let mut groups_of = BTreeMap::new();
        for line in d.all("member") {
            let (a, g) = line
                .split_once(':')
                .ok_or(ProtocolError::State("bad member line"))?;
            let parse = |h: &str| {
                hex::decode(h)
                    .ok()
                    .and_then(|b| Id128::try_from(b).ok())
                    .ok_or(ProtocolError::State("bad member id"))
            };
            groups_of.insert(parse(a)?, parse(g)?);
        }
        Ok(Self {
            k_p: d.get_array("k-p")?,
            lin: LinKeypair { public, secret },
            groups_of,
            dir,
            crl,
        })
    }
}

/// Enrols a device with both authorities.
pub fn register_ue<R: RngCore + ?Sized>(
    hss: &mut Hss,
    prose: &mut Prose,
    id: Id128,
    gid: &Id128,
    epoch: u32,
    rng: &mut R,
) -> Result<UeCredentials, ProtocolError> {
    if hss.subscribers.contains_key(&id) {
        return Err(ProtocolError::DuplicateId);
    }
    let group = prose.dir.find_gid(gid).ok_or(ProtocolError::UnknownGroup)?;
    let aid = loop {
        let a = random_id(rng);
        if !prose.groups_of.contains_key(&a) {
            break a;
        }
    };
    let k = SymKey::random(rng);
    let label = member_label(gid, &aid, epoch);
    let ibe_key = hss.extract(&label)?;
    let kp = kp_keygen(hss.ctx(), rng);
    prose.dir.add_member(group, label)?;
    prose.groups_of.insert(aid, *gid);
    hss.subscribers.insert(id, Subscriber { aid, k });
    Ok(UeCredentials {
        id,
        aid,
        gid: *gid,
        k,
        ak: authorization_key(&aid, gid, &prose.k_p),
        epoch,
        ibe_key,
        kp,
    })
}

/// Lists `label` on the CRL and drops it from the directory and the
/// group map. Constant work in the number of groups and devices beyond
/// locating the label.
pub fn revoke_ue(prose: &mut Prose, label: &[u8]) -> Result<Slot, ProtocolError> {
    let (_, aid, _) = parse_label(label).ok_or(ProtocolError::UnknownMember)?;
    let slot = prose
        .dir
        .remove_member(label)
        .map_err(|_| ProtocolError::UnknownMember)?;
    prose.crl.insert(label.to_vec());
    prose.groups_of.remove(&aid);
    Ok(slot)
}
