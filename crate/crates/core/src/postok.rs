//! Prefix stripping for over-tokenized characters.
//!
//! Scripts such as Lao, Khmer, Gujarati and Telugu sit in UTF-8 blocks whose
//! characters are three bytes long and share one lead byte. Under byte
//! fallback every such character costs three tokens, the first of which is
//! always the same. [`compress`] drops that shared lead byte; [`decompress`]
//! puts it back. A stripped character starts with a continuation byte, which
//! can never start a character in valid UTF-8, so the scan is unambiguous.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PTK_MAGIC: &[u8; 4] = b"PTK1";
pub const PTK_HEADER_LEN: usize = 8;

const FIRST_LEAD: u8 = 0xE0;
const LAST_LEAD: u8 = 0xEF;

/// Three-byte character counts per lead byte over a corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CharCensus {
    /// Index `i` counts characters with lead byte `0xE0 + i`.
    pub lead_counts: [u64; 16],
    pub total_chars: u64,
    pub dominant_prefix: Option<u8>,
    /// Share of all characters that are three bytes long and carry the
    /// dominant lead byte.
    pub over_tokenized_char_fraction: f64,
}

impl CharCensus {
    pub fn count_for(&self, lead: u8) -> u64 {
        match lead {
            FIRST_LEAD..=LAST_LEAD => self.lead_counts[(lead - FIRST_LEAD) as usize],
            _ => 0,
        }
    }
}

pub fn census<'a, I>(corpus: I) -> CharCensus
where
    I: IntoIterator<Item = &'a str>,
{
    let mut lead_counts = [0u64; 16];
    let mut total_chars = 0u64;
    for text in corpus {
        for c in text.chars() {
            total_chars += 1;
            if c.len_utf8() == 3 {
                let mut buf = [0u8; 4];
                let lead = c.encode_utf8(&mut buf).as_bytes()[0];
                lead_counts[(lead - FIRST_LEAD) as usize] += 1;
            }
        }
    }
    // max_by_key keeps the last maximum, so scan from the top to favour smaller bytes
    let dominant_prefix = (0..16usize)
        .rev()
        .filter(|&i| lead_counts[i] > 0)
        .max_by_key(|&i| lead_counts[i])
        .map(|i| FIRST_LEAD + i as u8);
    let over_tokenized_char_fraction = match dominant_prefix {
        Some(p) if total_chars > 0 => {
            lead_counts[(p - FIRST_LEAD) as usize] as f64 / total_chars as f64
        }
        _ => 0.0,
    };
    CharCensus {
        lead_counts,
        total_chars,
        dominant_prefix,
        over_tokenized_char_fraction,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCodec")]
pub struct PrefixCodec {
    prefix_byte: u8,
}

#[derive(Deserialize)]
struct RawCodec {
    prefix_byte: u8,
}

impl TryFrom<RawCodec> for PrefixCodec {
    type Error = Error;

    fn try_from(raw: RawCodec) -> Result<Self> {
        Self::new(raw.prefix_byte)
    }
}

impl PrefixCodec {
    /// `prefix_byte` must be a three-byte lead, 0xE0 through 0xEF.
    pub fn new(prefix_byte: u8) -> Result<Self> {
        match prefix_byte {
            FIRST_LEAD..=LAST_LEAD => Ok(Self { prefix_byte }),
            other => Err(Error::InvalidPrefix(other)),
        }
    }

    pub fn prefix_byte(&self) -> u8 {
        self.prefix_byte
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("codec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn detect_prefix(census: &CharCensus) -> Option<PrefixCodec> {
    census
        .dominant_prefix
        .map(|p| PrefixCodec::new(p).expect("census leads are in range"))
}

pub fn compress(text: &str, codec: &PrefixCodec) -> Vec<u8> {
    let bytes = text.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let width = utf8_width(bytes[i]).expect("valid UTF-8");
        let ch = &bytes[i..i + width];
        if width == 3 && ch[0] == codec.prefix_byte {
            out.extend_from_slice(&ch[1..]);
        } else {
            out.extend_from_slice(ch);
        }
        i += width;
    }
    out
}

pub fn decompress(bytes: &[u8], codec: &PrefixCodec) -> Result<String> {
    let mut out = Vec::with_capacity(bytes.len() + bytes.len() / 2);
    let mut i = 0;
    while i < bytes.len() {
        let lead = bytes[i];
        let (width, stripped) = match lead {
            0x80..=0xBF => (2, true),
            _ => (
                utf8_width(lead).ok_or(Error::MalformedStream { offset: i, byte: lead })?,
                false,
            ),
        };
        if i + width > bytes.len() {
            return Err(Error::Truncated { offset: i });
        }
        let start = out.len();
        if stripped {
            out.push(codec.prefix_byte);
        }
        out.extend_from_slice(&bytes[i..i + width]);
        if std::str::from_utf8(&out[start..]).is_err() {
            return Err(Error::MalformedStream { offset: i, byte: lead });
        }
        i += width;
    }
    Ok(String::from_utf8(out).expect("validated per character"))
}

/// Character width implied by a lead byte; `None` for bytes that never
/// start a character.
fn utf8_width(lead: u8) -> Option<usize> {
    match lead {
        0x00..=0x7F => Some(1),
        0xC2..=0xDF => Some(2),
        0xE0..=0xEF => Some(3),
        0xF0..=0xF4 => Some(4),
        _ => None,
    }
}

/// `.ptk` file: magic, prefix byte, three zero bytes, payload.
pub fn write_ptk(codec: &PrefixCodec, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(PTK_HEADER_LEN + payload.len());
    out.extend_from_slice(PTK_MAGIC);
    out.extend_from_slice(&[codec.prefix_byte, 0, 0, 0]);
    out.extend_from_slice(payload);
    out
}

pub fn read_ptk(bytes: &[u8]) -> Result<(PrefixCodec, &[u8])> {
    if bytes.len() < PTK_HEADER_LEN {
        return Err(Error::PtkHeader(format!(
            "file is {} bytes, shorter than the {PTK_HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if &bytes[..4] != PTK_MAGIC {
        return Err(Error::PtkHeader("missing PTK1 magic".into()));
    }
    if bytes[5..8] != [0, 0, 0] {
        return Err(Error::PtkHeader("reserved header bytes are not zero".into()));
    }
    let codec = PrefixCodec::new(bytes[4])?;
    Ok((codec, &bytes[PTK_HEADER_LEN..]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::{byte_id, Tokenizer};

    fn lao() -> PrefixCodec {
        PrefixCodec::new(0xE0).unwrap()
    }

    #[test]
    fn census_examples() {
        let c = census(["hello", "world"]);
        assert_eq!(c.dominant_prefix, None);
        assert_eq!(c.over_tokenized_char_fraction, 0.0);
        assert!(detect_prefix(&c).is_none());

        let text = "ກ".repeat(10);
        let c = census([text.as_str()]);
        assert_eq!(c.dominant_prefix, Some(0xE0));
        assert_eq!(c.count_for(0xE0), 10);
        assert_eq!(c.over_tokenized_char_fraction, 1.0);
        let codec = detect_prefix(&c).unwrap();
        assert_eq!(byte_id(codec.prefix_byte()), 227);
    }

    #[test]
    fn census_tie_prefers_smaller_lead() {
        // ກ leads with E0, 饕 with E9
        let c = census(["ກ饕a"]);
        assert_eq!(c.dominant_prefix, Some(0xE0));
        assert!((c.over_tokenized_char_fraction - 1.0 / 3.0).abs() < 1e-12);
        let c = census(["饕ກ"]);
        assert_eq!(c.dominant_prefix, Some(0xE0));
    }

    #[test]
    fn compress_examples() {
        assert_eq!(compress("ກ", &lao()), [0xBA, 0x81]);
        assert_eq!(compress("abc", &lao()), b"abc");
        assert_eq!(compress("饕", &lao()), [0xE9, 0xA5, 0x95]);
        let ids = Tokenizer::byte_fallback().encode_bytes(&compress("ກ", &lao())).unwrap();
        assert_eq!(ids, [189, 132]);
    }

    #[test]
    fn decompress_examples() {
        assert_eq!(decompress(&[0xBA, 0x81], &lao()).unwrap(), "ກ");
        assert_eq!(decompress(b"abc", &lao()).unwrap(), "abc");
        assert!(matches!(decompress(&[0xBA], &lao()), Err(Error::Truncated { offset: 0 })));
        assert!(matches!(
            decompress(&[b'a', 0xFF], &lao()),
            Err(Error::MalformedStream { offset: 1, byte: 0xFF })
        ));
        // E0 80 80 would be an overlong encoding
        assert!(matches!(
            decompress(&[0x80, 0x80], &lao()),
            Err(Error::MalformedStream { offset: 0, .. })
        ));
        assert!(matches!(
            decompress(&[0xC3, b'a'], &lao()),
            Err(Error::MalformedStream { offset: 0, byte: 0xC3 })
        ));
    }

    #[test]
    fn codec_validation_and_json() {
        assert!(matches!(PrefixCodec::new(0xDF), Err(Error::InvalidPrefix(0xDF))));
        assert_eq!(lao().to_json(), r#"{"prefix_byte":224}"#);
        assert_eq!(PrefixCodec::from_json(r#"{"prefix_byte":224}"#).unwrap(), lao());
        assert!(PrefixCodec::from_json(r#"{"prefix_byte":65}"#).is_err());
    }

    #[test]
    fn ptk_round_trip() {
        let file = write_ptk(&lao(), &[0xBA, 0x81]);
        assert_eq!(&file[..8], b"PTK1\xE0\0\0\0");
        let (codec, payload) = read_ptk(&file).unwrap();
        assert_eq!(codec, lao());
        assert_eq!(payload, [0xBA, 0x81]);
        assert!(matches!(read_ptk(b"PTK1"), Err(Error::PtkHeader(_))));
        assert!(matches!(read_ptk(b"PTK2\xE0\0\0\0"), Err(Error::PtkHeader(_))));
        assert!(matches!(read_ptk(b"PTK1\xE0\0\x01\0"), Err(Error::PtkHeader(_))));
        assert!(matches!(read_ptk(b"PTK1\x41\0\0\0"), Err(Error::InvalidPrefix(0x41))));
    }
}
