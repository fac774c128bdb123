//! BPE trainers over bytes (byte-level) and characters (word-level).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet};

use super::pretok::{runs, split_units, PreSplit};
use super::vocab::{byte_id, ByteVocab, TokenId, FIRST_LEARNED_ID};
use super::{Mode, Tokenizer, END_OF_WORD};
use crate::error::{Error, Result};

/// Pairs seen fewer times than this are never merged.
const MIN_PAIR_COUNT: i64 = 2;

type Pair = (TokenId, TokenId);

struct Word {
    toks: Vec<TokenId>,
    freq: i64,
}

#[derive(PartialEq, Eq)]
struct Candidate {
    count: i64,
    left: Vec<u8>,
    right: Vec<u8>,
    pair: Pair,
}

// Max-heap order: highest count, then the smallest (left, right) bytes.
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.left.cmp(&self.left))
            .then_with(|| other.right.cmp(&self.right))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn check_target(target_size: usize) -> Result<()> {
    if target_size < FIRST_LEARNED_ID as usize {
        return Err(Error::InvalidArgument(format!(
            "target vocabulary size {target_size} is below the {FIRST_LEARNED_ID} base ids"
        )));
    }
    Ok(())
}

fn check_corpus<S: AsRef<[u8]>>(corpus: &[S]) -> Result<()> {
    if corpus.iter().all(|s| s.as_ref().is_empty()) {
        return Err(Error::EmptyCorpus);
    }
    Ok(())
}

/// Trains byte-level BPE. Merges stay inside pre-split units; the result has
/// `min(target_size, 259 + possible merges)` ids.
pub fn train_bbpe<S: AsRef<[u8]>>(corpus: &[S], target_size: usize, pre_split: PreSplit) -> Result<Tokenizer> {
    check_target(target_size)?;
    check_corpus(corpus)?;

    let mut freqs: BTreeMap<&[u8], i64> = BTreeMap::new();
    for line in corpus {
        let line = line.as_ref();
        for unit in split_units(line, pre_split) {
            *freqs.entry(&line[unit]).or_default() += 1;
        }
    }
    let words = freqs
        .into_iter()
        .map(|(bytes, freq)| Word {
            toks: bytes.iter().map(|&b| byte_id(b)).collect(),
            freq,
        })
        .collect();

    let mut vocab = ByteVocab::new();
    let merges = learn_merges(words, &mut vocab, target_size);
    Tokenizer::from_merges(Mode::ByteBpe, pre_split, Vec::new(), merges)
}

/// Trains word-level BPE over the characters of whitespace-delimited words,
/// each followed by the end-of-word marker. Multi-byte characters seen in
/// training become base symbols ahead of any merge, so a large alphabet can
/// push the vocabulary past `target_size` with no merges at all.
pub fn train_bpe<S: AsRef<[u8]>>(corpus: &[S], target_size: usize) -> Result<Tokenizer> {
    check_target(target_size)?;
    check_corpus(corpus)?;

    let mut freqs: BTreeMap<&[u8], i64> = BTreeMap::new();
    for line in corpus {
        let line = line.as_ref();
        if let Some(offset) = line.iter().position(|&b| b == END_OF_WORD) {
            return Err(Error::MalformedStream {
                offset,
                byte: END_OF_WORD,
            });
        }
        for run in runs(line).into_iter().filter(|r| !r.ws) {
            *freqs.entry(&line[run.range]).or_default() += 1;
        }
    }

    let mut alphabet = BTreeSet::new();
    for word in freqs.keys() {
        for sym in super::pretok::symbols(word) {
            if sym.end - sym.start > 1 {
                alphabet.insert(&word[sym.range()]);
            }
        }
    }
    let mut vocab = ByteVocab::new();
    for sym in &alphabet {
        vocab.insert(sym.to_vec());
    }

    let words = freqs
        .into_iter()
        .map(|(word, freq)| {
            let mut toks: Vec<TokenId> = super::pretok::symbols(word)
                .iter()
                .map(|s| vocab.id_of(&word[s.range()]).expect("alphabet covers every symbol"))
                .collect();
            toks.push(byte_id(END_OF_WORD));
            Word { toks, freq }
        })
        .collect();

    let merges = learn_merges(words, &mut vocab, target_size);
    let alphabet = alphabet.into_iter().map(<[u8]>::to_vec).collect();
    Tokenizer::from_merges(Mode::WordBpe, PreSplit::Whitespace, alphabet, merges)
}

fn merge_word(toks: &[TokenId], (l, r): Pair, merged: TokenId) -> Vec<TokenId> {
    let mut out = Vec::with_capacity(toks.len());
    let mut i = 0;
    while i < toks.len() {
        if i + 1 < toks.len() && toks[i] == l && toks[i + 1] == r {
            out.push(merged);
            i += 2;
        } else {
            out.push(toks[i]);
            i += 1;
        }
    }
    out
}

/// Greedy merge loop with incremental pair counts. Stale heap entries are
/// skipped by comparing against the live count.
fn learn_merges(mut words: Vec<Word>, vocab: &mut ByteVocab, target_size: usize) -> Vec<(Vec<u8>, Vec<u8>)> {
    let mut counts: HashMap<Pair, i64> = HashMap::new();
    let mut occurs: HashMap<Pair, HashSet<usize>> = HashMap::new();
    for (wi, w) in words.iter().enumerate() {
        for p in w.toks.windows(2) {
            let pair = (p[0], p[1]);
            *counts.entry(pair).or_default() += w.freq;
            occurs.entry(pair).or_default().insert(wi);
        }
    }

    let candidate = |vocab: &ByteVocab, pair: Pair, count: i64| Candidate {
        count,
        left: vocab.bytes_of(pair.0).expect("live token").to_vec(),
        right: vocab.bytes_of(pair.1).expect("live token").to_vec(),
        pair,
    };
    let mut heap: BinaryHeap<Candidate> = counts
        .iter()
        .filter(|(_, &c)| c >= MIN_PAIR_COUNT)
        .map(|(&p, &c)| candidate(vocab, p, c))
        .collect();

    let mut merges = Vec::new();
    while vocab.len() < target_size {
        let Some(best) = heap.pop() else { break };
        if counts.get(&best.pair).copied().unwrap_or(0) != best.count {
            continue;
        }
        let pair = best.pair;
        let merged = vocab.insert([best.left.as_slice(), best.right.as_slice()].concat());
        merges.push((best.left, best.right));

        let mut touched: Vec<usize> = occurs.remove(&pair).unwrap_or_default().into_iter().collect();
        touched.sort_unstable();
        let mut changed = HashSet::new();
        for wi in touched {
            let w = &mut words[wi];
            if !w.toks.windows(2).any(|p| (p[0], p[1]) == pair) {
                continue;
            }
            for p in w.toks.windows(2) {
                let p = (p[0], p[1]);
                *counts.get_mut(&p).expect("counted pair") -= w.freq;
                changed.insert(p);
            }
            w.toks = merge_word(&w.toks, pair, merged);
            for p in w.toks.windows(2) {
                let p = (p[0], p[1]);
                *counts.entry(p).or_default() += w.freq;
                occurs.entry(p).or_default().insert(wi);
                changed.insert(p);
            }
        }
        counts.remove(&pair);
        for p in changed {
            match counts.get(&p).copied() {
                Some(c) if c >= MIN_PAIR_COUNT => heap.push(candidate(vocab, p, c)),
                Some(c) if c <= 0 => {
                    counts.remove(&p);
                }
                _ => {}
            }
        }
    }
    merges
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(merges: &[(Vec<u8>, Vec<u8>)]) -> Vec<(String, String)> {
        merges
            .iter()
            .map(|(l, r)| {
                (
                    String::from_utf8_lossy(l).into_owned(),
                    String::from_utf8_lossy(r).into_owned(),
                )
            })
            .collect()
    }

    #[test]
    fn aaaa_first_merge() {
        let corpus = vec!["aaaa"; 100];
        let t = train_bbpe(&corpus, 260, PreSplit::Whitespace).unwrap();
        assert_eq!(pairs(&t.merges().merges), [("a".into(), "a".into())]);
        assert_eq!(t.vocab_size(), 260);
        assert_eq!(t.encode("aaaa"), [259, 259]);
    }

    #[test]
    fn target_259_is_byte_fallback() {
        let t = train_bbpe(&["hello hello hello"], 259, PreSplit::Whitespace).unwrap();
        assert!(t.merges().is_empty());
        assert_eq!(t.encode("hi"), [byte_id(b'h'), byte_id(b'i')]);
    }

    #[test]
    fn bad_target_and_empty_corpus() {
        assert!(matches!(
            train_bbpe(&["a"], 258, PreSplit::Whitespace),
            Err(Error::InvalidArgument(_))
        ));
        let empty: [&str; 0] = [];
        assert!(matches!(train_bbpe(&empty, 300, PreSplit::Whitespace), Err(Error::EmptyCorpus)));
        assert!(matches!(train_bbpe(&[""], 300, PreSplit::Whitespace), Err(Error::EmptyCorpus)));
        assert!(matches!(train_bpe(&empty, 300), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn singleton_pairs_are_not_merged() {
        let t = train_bbpe(&["abcdef"], 1000, PreSplit::Whitespace).unwrap();
        assert!(t.merges().is_empty());
    }

    #[test]
    fn word_bpe_tie_break() {
        // (a,b) and (b,</w>) both occur 3 times; (a,b) has the smaller bytes
        let t = train_bpe(&["ab ab ab"], 260).unwrap();
        assert_eq!(t.merges().merges, [(b"a".to_vec(), b"b".to_vec())]);
        let t = train_bpe(&["ab ab ab"], 261).unwrap();
        assert_eq!(t.merges().merges[1], (b"ab".to_vec(), vec![END_OF_WORD]));
        assert_eq!(t.encode("ab ab"), [260, byte_id(b' '), 260]);
    }

    #[test]
    fn word_bpe_single_symbol_halts() {
        let t = train_bpe(&["x"], 10_000).unwrap();
        assert!(t.merges().is_empty());
        assert_eq!(t.vocab_size(), 259);
        assert_eq!(t.decode(&t.encode("x")).unwrap(), "x");
    }

    #[test]
    fn word_bpe_alphabet_comes_first() {
        let t = train_bpe(&["éa éa"], 300).unwrap();
        assert_eq!(t.vocab().learned()[0], "é".as_bytes());
        assert_eq!(t.decode(&t.encode("éa é")).unwrap(), "éa é");
    }
}
