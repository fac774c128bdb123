//! JSON vocabulary files. Byte strings are base64 so that partial UTF-8
//! sequences and the word-level end marker survive serialization.

use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::pretok::PreSplit;
use super::vocab::UnigramModel;
use super::{Mode, Tokenizer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct B64(pub Vec<u8>);

impl Serialize for B64 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&STANDARD.encode(&self.0))
    }
}

impl<'de> Deserialize<'de> for B64 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        STANDARD
            .decode(text.as_bytes())
            .map(B64)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceEntry {
    pub bytes: B64,
    pub score: f64,
}

/// On-disk form of a [`Tokenizer`]. For word-level BPE, `pieces` holds the
/// character alphabet (score 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabFile {
    pub mode: Mode,
    #[serde(default)]
    pub pre_split: PreSplit,
    #[serde(default)]
    pub merges: Vec<(B64, B64)>,
    #[serde(default)]
    pub pieces: Vec<PieceEntry>,
    #[serde(default)]
    pub extensions: Vec<B64>,
}

impl From<&Tokenizer> for VocabFile {
    fn from(t: &Tokenizer) -> Self {
        let pieces = match t.mode() {
            Mode::ByteBpe => Vec::new(),
            Mode::WordBpe => t
                .alphabet()
                .iter()
                .map(|a| PieceEntry {
                    bytes: B64(a.clone()),
                    score: 0.0,
                })
                .collect(),
            Mode::Unigram => t
                .unigram()
                .pieces
                .iter()
                .map(|(p, s)| PieceEntry {
                    bytes: B64(p.clone()),
                    score: *s,
                })
                .collect(),
        };
        Self {
            mode: t.mode(),
            pre_split: t.pre_split(),
            merges: t
                .merges()
                .iter()
                .map(|(l, r)| (B64(l.clone()), B64(r.clone())))
                .collect(),
            pieces,
            extensions: t.extensions().iter().cloned().map(B64).collect(),
        }
    }
}

impl TryFrom<VocabFile> for Tokenizer {
    type Error = Error;

    fn try_from(f: VocabFile) -> Result<Self> {
        let merges: Vec<_> = f.merges.into_iter().map(|(l, r)| (l.0, r.0)).collect();
        let base = match f.mode {
            Mode::ByteBpe | Mode::WordBpe => {
                if f.mode == Mode::ByteBpe && !f.pieces.is_empty() {
                    return Err(Error::VocabFormat("byte_bpe vocabularies carry no pieces".into()));
                }
                let alphabet = f.pieces.into_iter().map(|p| p.bytes.0).collect();
                Tokenizer::from_merges(f.mode, f.pre_split, alphabet, merges)?
            }
            Mode::Unigram => {
                if !merges.is_empty() {
                    return Err(Error::VocabFormat("unigram vocabularies carry no merges".into()));
                }
                let pieces = f.pieces.into_iter().map(|p| (p.bytes.0, p.score)).collect();
                Tokenizer::from_unigram(f.pre_split, UnigramModel { pieces })?
            }
        };
        base.with_extensions(f.extensions.into_iter().map(|e| e.0).collect())
    }
}

impl Tokenizer {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&VocabFile::from(self)).expect("vocab file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: VocabFile =
            serde_json::from_str(text).map_err(|e| Error::VocabFormat(e.to_string()))?;
        file.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
