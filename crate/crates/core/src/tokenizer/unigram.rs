//! Simplified unigram language-model trainer.
//!
//! Seeds are frequent substrings, scores are smoothed log relative
//! frequencies, and expectation is approximated by the single best (Viterbi)
//! segmentation. Each round runs a few EM iterations and then drops the
//! pieces whose removal costs the least likelihood, until the budget is met.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use rayon::prelude::*;

use super::pretok::{split_units, symbols, PreSplit};
use super::vocab::UnigramModel;
use super::Tokenizer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct UnigramConfig {
    /// Longest seed, in characters.
    pub max_piece_chars: usize,
    pub min_seed_freq: u64,
    /// Seeds kept before the first round, ranked by `freq * byte_len`.
    pub max_seeds: usize,
    pub em_iterations: usize,
    pub prune_fraction: f64,
}

impl Default for UnigramConfig {
    fn default() -> Self {
        Self {
            max_piece_chars: 8,
            min_seed_freq: 2,
            max_seeds: 200_000,
            em_iterations: 4,
            prune_fraction: 0.2,
        }
    }
}

/// Log-likelihood and the pieces covering a unit, in order.
pub(crate) type Segmentation<T> = (f64, Vec<(Range<usize>, T)>);

/// Best segmentation of `unit` under `lookup`.
/// Returns `None` when no segmentation exists.
pub(crate) fn viterbi<T: Copy>(
    unit: &[u8],
    max_len: usize,
    lookup: impl Fn(&[u8]) -> Option<(T, f64)>,
) -> Option<Segmentation<T>> {
    let n = unit.len();
    let mut best = vec![f64::NEG_INFINITY; n + 1];
    let mut back: Vec<Option<(usize, T)>> = vec![None; n + 1];
    best[0] = 0.0;
    for i in 0..n {
        if best[i] == f64::NEG_INFINITY {
            continue;
        }
        for len in 1..=max_len.min(n - i) {
            if let Some((tag, score)) = lookup(&unit[i..i + len]) {
                let v = best[i] + score;
                if v > best[i + len] {
                    best[i + len] = v;
                    back[i + len] = Some((i, tag));
                }
            }
        }
    }
    if n > 0 && back[n].is_none() {
        return None;
    }
    let mut pieces = Vec::new();
    let mut pos = n;
    while pos > 0 {
        let (prev, tag) = back[pos].expect("reachable position");
        pieces.push((prev..pos, tag));
        pos = prev;
    }
    pieces.reverse();
    Some((best[n], pieces))
}

struct Model {
    /// Multi-byte pieces with their current scores.
    multi: HashMap<Vec<u8>, f64>,
    bytes: [f64; 256],
    max_len: usize,
}

impl Model {
    fn from_counts(multi: &HashMap<Vec<u8>, u64>, bytes: &[u64; 256]) -> Self {
        let total: u64 = multi.values().sum::<u64>() + bytes.iter().sum::<u64>();
        let denom = total as f64 + 0.5 * (multi.len() + 256) as f64;
        let score = |c: u64| ((c as f64 + 0.5) / denom).ln();
        Self {
            multi: multi.iter().map(|(p, &c)| (p.clone(), score(c))).collect(),
            bytes: std::array::from_fn(|b| score(bytes[b])),
            max_len: multi.keys().map(Vec::len).max().unwrap_or(1),
        }
    }

    fn score(&self, piece: &[u8], skip: Option<&[u8]>) -> Option<f64> {
        match piece {
            [b] => Some(self.bytes[*b as usize]),
            _ if Some(piece) == skip => None,
            _ => self.multi.get(piece).copied(),
        }
    }

    fn segment(&self, unit: &[u8], skip: Option<&[u8]>) -> (f64, Vec<Range<usize>>) {
        let (ll, pieces) = viterbi(unit, self.max_len, |p| self.score(p, skip).map(|s| ((), s)))
            .expect("single bytes cover every input");
        (ll, pieces.into_iter().map(|(r, ())| r).collect())
    }

    /// Viterbi counts over the corpus, then fresh scores.
    fn em_step(&self, units: &[(&[u8], u64)]) -> Self {
        let zero = || (HashMap::<Vec<u8>, u64>::new(), [0u64; 256]);
        let (mut multi, bytes) = units
            .par_iter()
            .fold(zero, |(mut multi, mut bytes), &(unit, freq)| {
                for r in self.segment(unit, None).1 {
                    match &unit[r] {
                        [b] => bytes[*b as usize] += freq,
                        p => *multi.entry(p.to_vec()).or_default() += freq,
                    }
                }
                (multi, bytes)
            })
            .reduce(zero, |(mut ma, mut ba), (mb, bb)| {
                for (p, c) in mb {
                    *ma.entry(p).or_default() += c;
                }
                for (a, b) in ba.iter_mut().zip(bb) {
                    *a += b;
                }
                (ma, ba)
            });
        for p in self.multi.keys() {
            multi.entry(p.clone()).or_default();
        }
        Self::from_counts(&multi, &bytes)
    }

    fn counts(&self, units: &[(&[u8], u64)]) -> HashMap<Vec<u8>, u64> {
        units
            .par_iter()
            .fold(HashMap::new, |mut acc: HashMap<Vec<u8>, u64>, &(unit, freq)| {
                for r in self.segment(unit, None).1 {
                    if r.len() > 1 {
                        *acc.entry(unit[r].to_vec()).or_default() += freq;
                    }
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (p, c) in b {
                    *a.entry(p).or_default() += c;
                }
                a
            })
    }
}

/// Trains a unigram model with at most `target_size` pieces, 256 of which
/// are the single bytes.
pub fn train_unigram<S: AsRef<[u8]> + Sync>(
    corpus: &[S],
    target_size: usize,
    pre_split: PreSplit,
) -> Result<Tokenizer> {
    train_unigram_with(corpus, target_size, pre_split, &UnigramConfig::default())
}

pub fn train_unigram_with<S: AsRef<[u8]> + Sync>(
    corpus: &[S],
    target_size: usize,
    pre_split: PreSplit,
    config: &UnigramConfig,
) -> Result<Tokenizer> {
    if target_size < 256 {
        return Err(Error::InvalidArgument(format!(
            "target piece count {target_size} is below the 256 single bytes"
        )));
    }
    if corpus.iter().all(|s| s.as_ref().is_empty()) {
        return Err(Error::EmptyCorpus);
    }

    let mut unit_freq: BTreeMap<&[u8], u64> = BTreeMap::new();
    for line in corpus {
        let line = line.as_ref();
        for r in split_units(line, pre_split) {
            *unit_freq.entry(&line[r]).or_default() += 1;
        }
    }
    let units: Vec<(&[u8], u64)> = unit_freq.into_iter().collect();

    let mut seed_freq: HashMap<&[u8], u64> = HashMap::new();
    let mut byte_counts = [0u64; 256];
    for &(unit, freq) in &units {
        for &b in unit {
            byte_counts[b as usize] += freq;
        }
        let syms = symbols(unit);
        for i in 0..syms.len() {
            for j in i + 1..=syms.len().min(i + config.max_piece_chars) {
                let piece = &unit[syms[i].start..syms[j - 1].end];
                if piece.len() > 1 {
                    *seed_freq.entry(piece).or_default() += freq;
                }
            }
        }
    }
    let mut seeds: Vec<(&[u8], u64)> = seed_freq
        .into_iter()
        .filter(|&(_, f)| f >= config.min_seed_freq)
        .map(|(p, f)| (p, f * p.len() as u64))
        .collect();
    seeds.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    seeds.truncate(config.max_seeds);
    let seed_counts: HashMap<Vec<u8>, u64> = seeds.into_iter().map(|(p, c)| (p.to_vec(), c)).collect();

    let budget = target_size - 256;
    let mut model = Model::from_counts(&seed_counts, &byte_counts);
    loop {
        for _ in 0..config.em_iterations.max(1) {
            model = model.em_step(&units);
        }
        let m = model.multi.len();
        if m <= budget {
            break;
        }
        let counts = model.counts(&units);
        let mut ranked: Vec<(f64, f64, &Vec<u8>)> = model
            .multi
            .par_iter()
            .map(|(piece, &score)| {
                let count = counts.get(piece).copied().unwrap_or(0);
                let utility = if count == 0 {
                    0.0
                } else {
                    let alt = model.segment(piece, Some(piece)).0;
                    count as f64 * (score - alt)
                };
                (utility, score, piece)
            })
            .collect();
        ranked.sort_unstable_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then_with(|| a.1.total_cmp(&b.1))
                .then_with(|| b.2.cmp(a.2))
        });
        let drop = ((config.prune_fraction * m as f64).ceil() as usize).max(1).min(m - budget);
        let doomed: Vec<Vec<u8>> = ranked[..drop].iter().map(|r| r.2.clone()).collect();
        for piece in doomed {
            model.multi.remove(&piece);
        }
        model.max_len = model.multi.keys().map(Vec::len).max().unwrap_or(1);
    }

    let mut multi: Vec<(Vec<u8>, f64)> = model.multi.into_iter().collect();
    multi.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let pieces = (0..=255u8)
        .map(|b| (vec![b], model.bytes[b as usize]))
        .chain(multi)
        .collect();
    Tokenizer::from_unigram(pre_split, UnigramModel { pieces })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(t: &Tokenizer, piece: &str) -> f64 {
        t.unigram().score_of(piece.as_bytes()).unwrap()
    }

    #[test]
    fn floor_target_keeps_single_bytes() {
        let t = train_unigram(&["hello world hello"; 3], 256, PreSplit::Whitespace).unwrap();
        assert_eq!(t.unigram().pieces.len(), 256);
        assert!(t.unigram().pieces.iter().all(|(p, _)| p.len() == 1));
        assert_eq!(t.vocab_size(), 259);
    }

    #[test]
    fn abab_keeps_ab() {
        let t = train_unigram(&vec!["abab"; 50], 258, PreSplit::Whitespace).unwrap();
        let multi: Vec<&[u8]> = t
            .unigram()
            .pieces
            .iter()
            .filter(|(p, _)| p.len() > 1)
            .map(|(p, _)| p.as_slice())
            .collect();
        assert_eq!(multi.len(), 2);
        assert!(multi.contains(&b"ab".as_slice()));
        assert!(score(&t, "ab") >= score(&t, "a"));
        assert!(score(&t, "abab") > score(&t, "a"));
        assert_eq!(t.encode("abab"), [t.vocab().id_of(b"abab").unwrap()]);
    }

    #[test]
    fn used_piece_outscores_its_first_byte() {
        let mut corpus = vec!["ab"; 50];
        corpus.extend(["ba"; 10]);
        let t = train_unigram(&corpus, 257, PreSplit::Whitespace).unwrap();
        assert!(t.unigram().score_of(b"ba").is_none());
        assert!(score(&t, "ab") > score(&t, "a"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            train_unigram(&["a"], 255, PreSplit::Whitespace),
            Err(Error::InvalidArgument(_))
        ));
        let empty: [&str; 0] = [];
        assert!(matches!(train_unigram(&empty, 300, PreSplit::Whitespace), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn viterbi_reports_unreachable() {
        assert!(viterbi(b"ab", 1, |p| (p == b"a").then_some(((), 0.0))).is_none());
        let (ll, pieces) = viterbi(b"", 1, |_| Some(((), 0.0))).unwrap();
        assert_eq!((ll, pieces.len()), (0.0, 0));
    }
}
