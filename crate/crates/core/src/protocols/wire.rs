//! On-the-wire message framing.
//!
//! `0x47 0x44 | version | tag | field-count | fields`, each field a 2-byte
//! big-endian length followed by its bytes. Every tag has a fixed field
//! count and the decoder rejects anything else, including trailing bytes.

use std::fmt;

use crate::codec::{CodecError, FieldReader, FieldWriter, LenWidth};

pub const MAGIC: [u8; 2] = [0x47, 0x44];
pub const WIRE_VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MsgTag {
    Cn1 = 0x11,
    Cn2 = 0x12,
    Cn3 = 0x13,
    Cn4 = 0x14,
    Cn5a = 0x15,
    Cn5b = 0x16,
    Cn6a = 0x17,
    Cn6b = 0x18,
    Na1a = 0x21,
    Na1b = 0x22,
    Na1c = 0x23,
    Na2 = 0x24,
    Na3 = 0x25,
    Na4 = 0x26,
    Na5 = 0x27,
    /// The single abort record of the network-absent protocol.
    NaAbort = 0x2f,
}

impl MsgTag {
    pub const ALL: [MsgTag; 16] = [
        MsgTag::Cn1,
        MsgTag::Cn2,
        MsgTag::Cn3,
        MsgTag::Cn4,
        MsgTag::Cn5a,
        MsgTag::Cn5b,
        MsgTag::Cn6a,
        MsgTag::Cn6b,
        MsgTag::Na1a,
        MsgTag::Na1b,
        MsgTag::Na1c,
        MsgTag::Na2,
        MsgTag::Na3,
        MsgTag::Na4,
        MsgTag::Na5,
        MsgTag::NaAbort,
    ];

    pub fn from_byte(b: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|t| *t as u8 == b)
    }

    pub fn field_count(self) -> usize {
        match self {
            MsgTag::Cn1 => 4,
            MsgTag::Cn2 => 7,
            MsgTag::Cn3 => 3,
            MsgTag::Cn4 => 2,
            MsgTag::Cn5a => 1,
            MsgTag::Cn5b => 2,
            MsgTag::Cn6a => 2,
            MsgTag::Cn6b => 1,
            MsgTag::Na1a | MsgTag::Na1b => 1,
            MsgTag::Na1c => 4,
            MsgTag::Na2 => 3,
            MsgTag::Na3 => 5,
            MsgTag::Na4 => 4,
            MsgTag::Na5 => 1,
            MsgTag::NaAbort => 0,
        }
    }

    /// `(step, part)` with `part` counted from 1 within a step, as used by
    /// fault selectors like `step5.2`.
    pub fn step(self) -> (u8, u8) {
        match self {
            MsgTag::Cn1 => (1, 1),
            MsgTag::Cn2 => (2, 1),
            MsgTag::Cn3 => (3, 1),
            MsgTag::Cn4 => (4, 1),
            MsgTag::Cn5a => (5, 1),
            MsgTag::Cn5b => (5, 2),
            MsgTag::Cn6a => (6, 1),
            MsgTag::Cn6b => (6, 2),
            MsgTag::Na1a => (1, 1),
            MsgTag::Na1b => (1, 2),
            MsgTag::Na1c => (1, 3),
            MsgTag::Na2 => (2, 1),
            MsgTag::Na3 => (3, 1),
            MsgTag::Na4 => (4, 1),
            MsgTag::Na5 => (5, 1),
            MsgTag::NaAbort => (0, 1),
        }
    }

    pub fn is_cn(self) -> bool {
        (self as u8) >> 4 == 1
    }

    pub fn name(self) -> &'static str {
        match self {
            MsgTag::Cn1 => "CN1",
            MsgTag::Cn2 => "CN2",
            MsgTag::Cn3 => "CN3",
            MsgTag::Cn4 => "CN4",
            MsgTag::Cn5a => "CN5a",
            MsgTag::Cn5b => "CN5b",
            MsgTag::Cn6a => "CN6a",
            MsgTag::Cn6b => "CN6b",
            MsgTag::Na1a => "NA1a",
            MsgTag::Na1b => "NA1b",
            MsgTag::Na1c => "NA1c",
            MsgTag::Na2 => "NA2",
            MsgTag::Na3 => "NA3",
            MsgTag::Na4 => "NA4",
            MsgTag::Na5 => "NA5",
            MsgTag::NaAbort => "ABORT",
        }
    }
}

impl fmt::Display for MsgTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub tag: MsgTag,
    pub fields: Vec<Vec<u8>>,
}

impl Message {
    pub fn new(tag: MsgTag, fields: Vec<Vec<u8>>) -> Self {
        assert_eq!(fields.len(), tag.field_count(), "{tag} field count");
        Self { tag, fields }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = FieldWriter::new(LenWidth::U16);
        w.raw(&MAGIC)
            .raw(&[WIRE_VERSION, self.tag as u8, self.fields.len() as u8]);
        for f in &self.fields {
            w.field(f);
        }
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = FieldReader::new(LenWidth::U16, bytes);
        if r.raw(2)? != MAGIC {
            return Err(CodecError::Header("magic"));
        }
        let head = r.raw(3)?;
        if head[0] != WIRE_VERSION {
            return Err(CodecError::Header("version"));
        }
        let tag = MsgTag::from_byte(head[1]).ok_or(CodecError::Header("tag"))?;
        let count = head[2] as usize;
        if count != tag.field_count() {
            return Err(CodecError::Header("field count"));
        }
        let fields = (0..count)
            .map(|_| r.field().map(<[u8]>::to_vec))
            .collect::<Result<_, _>>()?;
        r.finish()?;
        Ok(Self { tag, fields })
    }

    /// Decodes and insists on `tag`.
    pub fn expect(bytes: &[u8], tag: MsgTag) -> Result<Self, CodecError> {
        let m = Self::decode(bytes)?;
        if m.tag != tag {
            return Err(CodecError::Header("unexpected tag"));
        }
        Ok(m)
    }

    /// Peeks at the tag of an encoded message without a full decode.
    pub fn peek_tag(bytes: &[u8]) -> Option<MsgTag> {
        if bytes.len() < 5 || bytes[..2] != MAGIC {
            return None;
        }
        MsgTag::from_byte(bytes[3])
    }
}

/// The one abort record every NA failure path emits.
pub fn na_abort_record() -> Vec<u8> {
    Message::new(MsgTag::NaAbort, Vec::new()).encode()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn roundtrip(tag_ix in 0usize..16, seed in any::<u8>()) {
            let tag = MsgTag::ALL[tag_ix];
            let fields = (0..tag.field_count())
                .map(|i| vec![seed.wrapping_add(i as u8); i * 3 + 1])
                .collect();
            let m = Message::new(tag, fields);
            let bytes = m.encode();
            prop_assert_eq!(Message::peek_tag(&bytes), Some(tag));
            prop_assert_eq!(Message::decode(&bytes).unwrap(), m);
        }
    }

    #[test]
    fn rejects_malformed_frames() {
        let m = Message::new(MsgTag::Cn5a, vec![vec![1, 2, 3]]);
        let good = m.encode();
        let mut trailing = good.clone();
        trailing.push(0);
        assert_eq!(Message::decode(&trailing), Err(CodecError::Trailing));
        let mut bad_magic = good.clone();
        bad_magic[0] ^= 1;
        assert!(Message::decode(&bad_magic).is_err());
        let mut bad_count = good.clone();
        bad_count[4] = 2;
        assert!(Message::decode(&bad_count).is_err());
        assert!(Message::expect(&good, MsgTag::Cn6b).is_err());
        assert!(Message::decode(&good[..good.len() - 1]).is_err());
    }

    #[test]
    fn abort_record_is_fixed() {
        assert_eq!(na_abort_record(), vec![0x47, 0x44, 1, 0x2f, 0]);
    }

    #[test]
    fn tags_are_distinct_bytes() {
        let mut b: Vec<u8> = MsgTag::ALL.iter().map(|t| *t as u8).collect();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), MsgTag::ALL.len());
    }
}
