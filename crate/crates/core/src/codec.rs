//! Length-prefixed field framing shared by key files and wire messages.
//!
//! Wire messages use 2-byte lengths, on-disk state uses 4-byte lengths.
//! Readers are strict: a short buffer or trailing bytes is an error.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("truncated input")]
    Truncated,
    #[error("trailing bytes after last field")]
    Trailing,
    #[error("field of {0} bytes does not fit the length prefix")]
    FieldTooLong(usize),
    #[error("bad header: {0}")]
    Header(&'static str),
    #[error("bad field: {0}")]
    Field(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LenWidth {
    U16,
    U32,
}

impl LenWidth {
    fn size(self) -> usize {
        match self {
            LenWidth::U16 => 2,
            LenWidth::U32 => 4,
        }
    }
}

#[derive(Debug)]
pub struct FieldWriter {
    width: LenWidth,
    buf: Vec<u8>,
    count: usize,
}

impl FieldWriter {
    pub fn new(width: LenWidth) -> Self {
        Self {
            width,
            buf: Vec::new(),
            count: 0,
        }
    }

    /// Raw bytes, no length prefix (headers).
    pub fn raw(&mut self, bytes: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn field(&mut self, bytes: &[u8]) -> &mut Self {
        match self.width {
            LenWidth::U16 => {
                let len = u16::try_from(bytes.len()).expect("wire field under 64 KiB");
                self.buf.extend_from_slice(&len.to_be_bytes());
            }
            LenWidth::U32 => {
                let len = u32::try_from(bytes.len()).expect("file field under 4 GiB");
                self.buf.extend_from_slice(&len.to_be_bytes());
            }
        }
        self.buf.extend_from_slice(bytes);
        self.count += 1;
        self
    }

    pub fn u32_field(&mut self, v: u32) -> &mut Self {
        self.field(&v.to_be_bytes())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug)]
pub struct FieldReader<'a> {
    width: LenWidth,
    data: &'a [u8],
    pos: usize,
}

impl<'a> FieldReader<'a> {
    pub fn new(width: LenWidth, data: &'a [u8]) -> Self {
        Self {
            width,
            data,
            pos: 0,
        }
    }

    pub fn raw(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(n).ok_or(CodecError::Truncated)?;
        let out = self.data.get(self.pos..end).ok_or(CodecError::Truncated)?;
        self.pos = end;
        Ok(out)
    }

    pub fn field(&mut self) -> Result<&'a [u8], CodecError> {
        let lb = self.raw(self.width.size())?;
        let len = lb.iter().fold(0usize, |acc, b| (acc << 8) | *b as usize);
        self.raw(len)
    }

    pub fn u32_field(&mut self) -> Result<u32, CodecError> {
        let f = self.field()?;
        let arr: [u8; 4] = f.try_into().map_err(|_| CodecError::Field("u32 width"))?;
        Ok(u32::from_be_bytes(arr))
    }

    pub fn is_empty(&self) -> bool {
        self.pos == self.data.len()
    }

    pub fn finish(self) -> Result<(), CodecError> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(CodecError::Trailing)
        }
    }
}

/// Line-oriented `key: value` document with a `graad-<kind> v1` header,
/// used for the on-disk state of authorities and devices. Keys may repeat;
/// order is preserved.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KvDoc {
    pub entries: Vec<(String, String)>,
}

impl KvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.entries.push((key.to_string(), value.into()));
        self
    }

    pub fn push_hex(&mut self, key: &str, bytes: &[u8]) -> &mut Self {
        self.push(key, hex::encode(bytes))
    }

    pub fn get(&self, key: &str) -> Result<&str, CodecError> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or(CodecError::Field("missing key"))
    }

    pub fn get_hex(&self, key: &str) -> Result<Vec<u8>, CodecError> {
        hex::decode(self.get(key)?).map_err(|_| CodecError::Field("bad hex"))
    }

    pub fn get_array<const N: usize>(&self, key: &str) -> Result<[u8; N], CodecError> {
        self.get_hex(key)?
            .try_into()
            .map_err(|_| CodecError::Field("wrong width"))
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T, CodecError> {
        self.get(key)?
            .parse()
            .map_err(|_| CodecError::Field("unparsable value"))
    }

    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries
            .iter()
            .filter(move |(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self, kind: &str) -> String {
        let mut out = format!("graad-{kind} v1\n");
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(": ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn from_text(kind: &str, text: &str) -> Result<Self, CodecError> {
        let mut lines = text.lines();
        let header = format!("graad-{kind} v1");
        if lines.next().map(str::trim) != Some(header.as_str()) {
            return Err(CodecError::Header("document kind"));
        }
        let mut doc = Self::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once(": ")
                .ok_or(CodecError::Field("expected `key: value`"))?;
            doc.push(k.trim(), v.trim());
        }
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn fields_roundtrip(fields in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 0..300), 0..8)) {
            for width in [LenWidth::U16, LenWidth::U32] {
                let mut w = FieldWriter::new(width);
                for f in &fields {
                    w.field(f);
                }
                let bytes = w.finish();
                let mut r = FieldReader::new(width, &bytes);
                for f in &fields {
                    prop_assert_eq!(r.field().unwrap(), &f[..]);
                }
                prop_assert!(r.finish().is_ok());
            }
        }
    }

    #[test]
    fn trailing_and_truncated_inputs_are_rejected() {
        let mut w = FieldWriter::new(LenWidth::U16);
        w.field(b"abc");
        let mut bytes = w.finish();
        let mut r = FieldReader::new(LenWidth::U16, &bytes[..4]);
        assert_eq!(r.field(), Err(CodecError::Truncated));
        bytes.push(0);
        let mut r = FieldReader::new(LenWidth::U16, &bytes);
        r.field().unwrap();
        assert_eq!(r.finish(), Err(CodecError::Trailing));
    }

    #[test]
    fn kv_doc_roundtrip() {
        let mut d = KvDoc::new();
        d.push_hex("key", &[1, 2]).push("n", "7").push("n", "8");
        let text = d.to_text("test");
        assert!(text.starts_with("graad-test v1\nkey: 0102\n"));
        let back = KvDoc::from_text("test", &text).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.get_array::<2>("key").unwrap(), [1, 2]);
        assert_eq!(back.all("n").collect::<Vec<_>>(), ["7", "8"]);
        assert_eq!(back.get_parsed::<u32>("n").unwrap(), 7);
        assert!(KvDoc::from_text("other", &text).is_err());
    }
}
