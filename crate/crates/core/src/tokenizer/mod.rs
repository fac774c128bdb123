//! Byte-fallback tokenizers: byte-level BPE, word-level BPE and a simplified
//! unigram model, plus greedy vocabulary extension.
//!
//! Every mode shares one id space (see [`vocab`]): three specials, 256 byte
//! tokens and learned tokens from id 259. Any byte sequence can therefore be
//! encoded without an unknown token, and `decode(encode(x)) == x` holds for
//! every input.
//!
//! Encoding works on raw bytes. Text goes through [`Tokenizer::encode`];
//! streams that are not valid UTF-8 (such as prefix-stripped text from
//! [`crate::postok`]) go through [`Tokenizer::encode_bytes`].

mod bpe;
pub mod pretok;
mod serial;
mod unigram;
pub mod vocab;

use std::collections::{HashMap, HashSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use bpe::{train_bbpe, train_bpe};
pub use pretok::PreSplit;
pub use serial::VocabFile;
pub use unigram::{train_unigram, train_unigram_with, UnigramConfig};
pub use vocab::{byte_id, ByteVocab, MergeTable, TokenId, UnigramModel, BYTE_OFFSET, FIRST_LEARNED_ID};

use crate::error::{Error, Result};
use pretok::{runs, split_units, symbols};

/// End-of-word marker appended to every word in word-level BPE. 0xFF never
/// occurs in UTF-8, so the marker cannot collide with text bytes.
pub const END_OF_WORD: u8 = 0xFF;

const NO_ID: TokenId = TokenId::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ByteBpe,
    WordBpe,
    Unigram,
}

#[derive(Debug, Clone, Copy)]
struct Tok {
    id: TokenId,
    start: usize,
    end: usize,
}

#[derive(Debug, Clone)]
pub struct Tokenizer {
    mode: Mode,
    pre_split: PreSplit,
    vocab: ByteVocab,
    merges: MergeTable,
    unigram: UnigramModel,
    extensions: Vec<Vec<u8>>,
    alphabet_len: usize,

    merge_ranks: HashMap<(TokenId, TokenId), (usize, TokenId)>,
    rank_pairs: Vec<(TokenId, TokenId)>,
    pieces: HashMap<Vec<u8>, (TokenId, f64)>,
    max_piece_len: usize,
    ext_index: HashMap<Vec<u8>, TokenId>,
    ext_max_len: usize,
}

impl Tokenizer {
    /// Byte-level tokenizer with no merges: every byte is one token.
    pub fn byte_fallback() -> Self {
        Self::from_merges(Mode::ByteBpe, PreSplit::Whitespace, Vec::new(), Vec::new())
            .expect("empty merge table is valid")
    }

    /// Builds a BPE tokenizer. `alphabet` lists multi-byte base symbols
    /// (word-level BPE characters) that get ids before any merge result.
    pub fn from_merges(
        mode: Mode,
        pre_split: PreSplit,
        alphabet: Vec<Vec<u8>>,
        merges: Vec<(Vec<u8>, Vec<u8>)>,
    ) -> Result<Self> {
        if mode == Mode::Unigram {
            return Err(Error::InvalidArgument(
                "unigram tokenizers are built from scored pieces".into(),
            ));
        }
        let mut vocab = ByteVocab::new();
        for sym in alphabet {
            if sym.is_empty() {
                return Err(Error::VocabFormat("empty alphabet symbol".into()));
            }
            vocab.insert(sym);
        }
        let alphabet_len = vocab.learned().len();
        let mut merge_ranks = HashMap::new();
        let mut rank_pairs = Vec::with_capacity(merges.len());
        for (rank, (left, right)) in merges.iter().enumerate() {
            let operand = |b: &[u8]| {
                vocab.id_of(b).ok_or_else(|| {
                    Error::VocabFormat(format!(
                        "merge {rank}: operand {:?} is neither a byte nor an earlier merge",
                        String::from_utf8_lossy(b)
                    ))
                })
            };
            let l = operand(left)?;
            let r = operand(right)?;
            let id = vocab.insert([left.as_slice(), right.as_slice()].concat());
            merge_ranks.entry((l, r)).or_insert((rank, id));
            rank_pairs.push((l, r));
        }
        Ok(Self {
            mode,
            pre_split,
            vocab,
            merges: MergeTable { merges },
            unigram: UnigramModel::default(),
            extensions: Vec::new(),
            alphabet_len,
            merge_ranks,
            rank_pairs,
            pieces: HashMap::new(),
            max_piece_len: 0,
            ext_index: HashMap::new(),
            ext_max_len: 0,
        })
    }

    /// Builds a unigram tokenizer. Multi-byte pieces get learned ids in the
    /// given order; every single byte must be present.
    pub fn from_unigram(pre_split: PreSplit, model: UnigramModel) -> Result<Self> {
        let mut vocab = ByteVocab::new();
        let mut pieces = HashMap::new();
        let mut seen_bytes = [false; 256];
        for (piece, score) in &model.pieces {
            if !score.is_finite() {
                return Err(Error::VocabFormat(format!("non-finite score {score}")));
            }
            if piece.is_empty() {
                return Err(Error::VocabFormat("empty unigram piece".into()));
            }
            if pieces.contains_key(piece) {
                return Err(Error::VocabFormat(format!(
                    "duplicate unigram piece {:?}",
                    String::from_utf8_lossy(piece)
                )));
            }
            if let [b] = piece.as_slice() {
                seen_bytes[*b as usize] = true;
            }
            let id = vocab.insert(piece.clone());
            pieces.insert(piece.clone(), (id, *score));
        }
        if let Some(b) = seen_bytes.iter().position(|s| !s) {
            return Err(Error::VocabFormat(format!(
                "unigram model lacks single-byte piece 0x{b:02X}"
            )));
        }
        let max_piece_len = pieces.keys().map(Vec::len).max().unwrap_or(1);
        Ok(Self {
            mode: Mode::Unigram,
            pre_split,
            vocab,
            merges: MergeTable::default(),
            unigram: model,
            extensions: Vec::new(),
            alphabet_len: 0,
            merge_ranks: HashMap::new(),
            rank_pairs: Vec::new(),
            pieces,
            max_piece_len,
            ext_index: HashMap::new(),
            ext_max_len: 0,
        })
    }

    /// Appends extension tokens with ids after the current vocabulary.
    pub fn with_extensions(mut self, extensions: Vec<Vec<u8>>) -> Result<Self> {
        for ext in extensions {
            if ext.is_empty() {
                return Err(Error::VocabFormat("empty extension token".into()));
            }
            if self.vocab.id_of(&ext).is_some() || self.ext_index.contains_key(&ext) {
                return Err(Error::VocabFormat(format!(
                    "extension {:?} duplicates an existing token",
                    String::from_utf8_lossy(&ext)
                )));
            }
            let id = (self.vocab.len() + self.extensions.len()) as TokenId;
            self.ext_max_len = self.ext_max_len.max(ext.len());
            self.ext_index.insert(ext.clone(), id);
            self.extensions.push(ext);
        }
        Ok(self)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn pre_split(&self) -> PreSplit {
        self.pre_split
    }

    pub fn vocab(&self) -> &ByteVocab {
        &self.vocab
    }

    pub fn merges(&self) -> &MergeTable {
        &self.merges
    }

    pub fn unigram(&self) -> &UnigramModel {
        &self.unigram
    }

    pub fn extensions(&self) -> &[Vec<u8>] {
        &self.extensions
    }

    /// Multi-byte base symbols of word-level BPE.
    pub fn alphabet(&self) -> &[Vec<u8>] {
        &self.vocab.learned()[..self.alphabet_len]
    }

    /// Number of ids, extensions included.
    pub fn vocab_size(&self) -> usize {
        self.vocab.len() + self.extensions.len()
    }

    /// Learned multi-byte pieces, best first: merge order for BPE modes,
    /// descending score for unigram. Word-level pieces lose their end marker.
    pub fn ranked_pieces(&self) -> Vec<Vec<u8>> {
        match self.mode {
            Mode::ByteBpe => self.vocab.learned().to_vec(),
            Mode::WordBpe => self
                .vocab
                .learned()
                .iter()
                .map(|p| p.iter().copied().filter(|&b| b != END_OF_WORD).collect())
                .collect(),
            Mode::Unigram => {
                let mut multi: Vec<&(Vec<u8>, f64)> =
                    self.unigram.pieces.iter().filter(|(p, _)| p.len() > 1).collect();
                multi.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                multi.into_iter().map(|(p, _)| p.clone()).collect()
            }
        }
    }

    pub fn encode(&self, text: &str) -> Vec<TokenId> {
        self.encode_raw(text.as_bytes())
    }

    /// Validates `bytes` as UTF-8, then encodes.
    pub fn encode_utf8(&self, bytes: &[u8]) -> Result<Vec<TokenId>> {
        std::str::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
            offset: e.valid_up_to(),
        })?;
        Ok(self.encode_raw(bytes))
    }

    /// Encodes an arbitrary byte stream. Word-level BPE rejects 0xFF, which
    /// it reserves for the end-of-word marker.
    pub fn encode_bytes(&self, bytes: &[u8]) -> Result<Vec<TokenId>> {
        if self.mode == Mode::WordBpe {
            if let Some(offset) = bytes.iter().position(|&b| b == END_OF_WORD) {
                return Err(Error::MalformedStream {
                    offset,
                    byte: END_OF_WORD,
                });
            }
        }
        Ok(self.encode_raw(bytes))
    }

    fn encode_raw(&self, bytes: &[u8]) -> Vec<TokenId> {
        let mut out = Vec::with_capacity(bytes.len());
        if self.extensions.is_empty() {
            self.encode_base(bytes, &mut out);
            return out;
        }

        let syms = symbols(bytes);
        let mut boundary = vec![false; bytes.len() + 1];
        for s in &syms {
            boundary[s.start] = true;
        }
        boundary[bytes.len()] = true;

        let mut pending = 0;
        let mut pos = 0;
        while pos < bytes.len() {
            match self.longest_extension(bytes, pos, &boundary) {
                Some((len, id)) => {
                    self.encode_base(&bytes[pending..pos], &mut out);
                    out.push(id);
                    pos += len;
                    pending = pos;
                }
                None => {
                    pos += 1;
                    while !boundary[pos] {
                        pos += 1;
                    }
                }
            }
        }
        self.encode_base(&bytes[pending..], &mut out);
        out
    }

    fn longest_extension(&self, bytes: &[u8], pos: usize, boundary: &[bool]) -> Option<(usize, TokenId)> {
        let max = self.ext_max_len.min(bytes.len() - pos);
        (1..=max)
            .rev()
            .filter(|&len| boundary[pos + len])
            .find_map(|len| self.ext_index.get(&bytes[pos..pos + len]).map(|&id| (len, id)))
    }

    fn encode_base(&self, bytes: &[u8], out: &mut Vec<TokenId>) {
        match self.mode {
            Mode::ByteBpe => {
                for unit in split_units(bytes, self.pre_split) {
                    let mut toks = byte_toks(bytes, unit);
                    self.apply_merges(&mut toks);
                    out.extend(toks.iter().map(|t| t.id));
                }
            }
            Mode::Unigram => {
                for unit in split_units(bytes, self.pre_split) {
                    self.viterbi(&bytes[unit], out);
                }
            }
            Mode::WordBpe => {
                for run in runs(bytes) {
                    if run.ws {
                        out.extend(byte_toks(bytes, run.range).iter().map(|t| t.id));
                        continue;
                    }
                    let mut toks: Vec<Tok> = run
                        .symbols
                        .iter()
                        .map(|s| Tok {
                            id: self.vocab.id_of(&bytes[s.range()]).unwrap_or(NO_ID),
                            start: s.start,
                            end: s.end,
                        })
                        .collect();
                    toks.push(Tok {
                        id: byte_id(END_OF_WORD),
                        start: run.range.end,
                        end: run.range.end,
                    });
                    self.apply_merges(&mut toks);
                    for t in toks {
                        if t.id == NO_ID {
                            out.extend(bytes[t.start..t.end].iter().map(|&b| byte_id(b)));
                        } else {
                            out.push(t.id);
                        }
                    }
                }
            }
        }
    }

    /// Repeatedly merges every occurrence of the lowest-ranked adjacent pair.
    fn apply_merges(&self, toks: &mut Vec<Tok>) {
        if self.merge_ranks.is_empty() {
            return;
        }
        loop {
            let best = toks
                .windows(2)
                .filter_map(|w| self.merge_ranks.get(&(w[0].id, w[1].id)))
                .min_by_key(|(rank, _)| *rank);
            let Some(&(rank, merged)) = best else {
                break;
            };
            let (l, r) = self.rank_pairs[rank];
            let mut next = Vec::with_capacity(toks.len());
            let mut i = 0;
            while i < toks.len() {
                if i + 1 < toks.len() && toks[i].id == l && toks[i + 1].id == r {
                    next.push(Tok {
                        id: merged,
                        start: toks[i].start,
                        end: toks[i + 1].end,
                    });
                    i += 2;
                } else {
                    next.push(toks[i]);
                    i += 1;
                }
            }
            *toks = next;
        }
    }

    fn viterbi(&self, unit: &[u8], out: &mut Vec<TokenId>) {
        let (_, pieces) = unigram::viterbi(unit, self.max_piece_len, |p| self.pieces.get(p).copied())
            .expect("single-byte pieces cover every input");
        out.extend(pieces.into_iter().map(|(_, id)| id));
    }

    pub fn token_bytes(&self, id: TokenId) -> Option<&[u8]> {
        self.vocab.bytes_of(id).or_else(|| {
            let ext = (id as usize).checked_sub(self.vocab.len())?;
            self.extensions.get(ext).map(Vec::as_slice)
        })
    }

    /// Concatenated bytes of `ids`. Word-level end markers are dropped.
    pub fn decode_bytes(&self, ids: &[TokenId]) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for &id in ids {
            let bytes = self.token_bytes(id).ok_or(Error::UnknownId { id })?;
            if self.mode == Mode::WordBpe {
                out.extend(bytes.iter().filter(|&&b| b != END_OF_WORD));
            } else {
                out.extend_from_slice(bytes);
            }
        }
        Ok(out)
    }

    pub fn decode(&self, ids: &[TokenId]) -> Result<String> {
        crate::corpus::decode_utf8(self.decode_bytes(ids)?)
    }
}

fn byte_toks(bytes: &[u8], range: Range<usize>) -> Vec<Tok> {
    range
        .map(|i| Tok {
            id: byte_id(bytes[i]),
            start: i,
            end: i + 1,
        })
        .collect()
}

/// Adds the `size` best learned pieces of `learned` to `base` as extension
/// tokens. Pieces already representable as one base token are skipped.
///
/// Encoding with the result matches extension tokens greedily (longest
/// first, on character boundaries) and hands the gaps to the base tokenizer.
/// Over a byte-fallback base this never lengthens an encoding. Byte-level
/// pieces that split a character can only match in non-UTF-8 streams, so
/// character-aligned learners (word-level BPE, unigram) make better sources
/// for text.
pub fn extend_vocab(base: &Tokenizer, learned: &Tokenizer, size: usize) -> Result<Tokenizer> {
    if size == 0 {
        return Err(Error::InvalidArgument("extension size must be positive".into()));
    }
    let mut seen = HashSet::new();
    let candidates: Vec<Vec<u8>> = learned
        .ranked_pieces()
        .into_iter()
        .filter(|p| p.len() > 1)
        .filter(|p| base.vocab.id_of(p).is_none() && !base.ext_index.contains_key(p))
        .filter(|p| seen.insert(p.clone()))
        .collect();
    if size > candidates.len() {
        return Err(Error::ExtensionTooLarge {
            requested: size,
            available: candidates.len(),
        });
    }
    base.clone()
        .with_extensions(candidates.into_iter().take(size).collect())
}
