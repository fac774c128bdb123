//! Over-tokenization ratio, token-set overlap and a corpus BLEU scorer.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::LanguageInfo;
use crate::postok::{compress, PrefixCodec};
use crate::tokenizer::{TokenId, Tokenizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizationReport {
    pub language: String,
    pub sentence_count: u64,
    pub total_tokens: u64,
    pub total_length_units: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub size_a: u64,
    pub size_b: u64,
    pub intersection_size: u64,
    pub ratio_over_a: f64,
    pub ratio_over_b: f64,
}

/// Words for space-separated languages, non-whitespace characters otherwise.
pub fn sentence_length(text: &str, space_separated: bool) -> usize {
    if space_separated {
        text.split(char::is_whitespace).filter(|w| !w.is_empty()).count()
    } else {
        text.chars().filter(|c| !c.is_whitespace()).count()
    }
}

/// Tokens per length unit, summed over the whole corpus before dividing.
pub fn tokenization_ratio<S: AsRef<str> + Sync>(
    corpus: &[S],
    tokenizer: &Tokenizer,
    lang: &LanguageInfo,
) -> Result<TokenizationReport> {
    ratio_with(corpus, lang, |s| tokenizer.encode(s).len())
}

/// As [`tokenization_ratio`], with every sentence prefix-stripped first.
pub fn tokenization_ratio_compressed<S: AsRef<str> + Sync>(
    corpus: &[S],
    tokenizer: &Tokenizer,
    lang: &LanguageInfo,
    codec: &PrefixCodec,
) -> Result<TokenizationReport> {
    ratio_with(corpus, lang, |s| {
        tokenizer
            .encode_bytes(&compress(s, codec))
            .map(|ids| ids.len())
            .expect("stripped text never contains 0xFF")
    })
}

fn ratio_with<S, F>(corpus: &[S], lang: &LanguageInfo, count_tokens: F) -> Result<TokenizationReport>
where
    S: AsRef<str> + Sync,
    F: Fn(&str) -> usize + Sync,
{
    let (total_tokens, total_length_units) = corpus
        .par_iter()
        .map(|s| {
            let s = s.as_ref();
            (count_tokens(s) as u64, sentence_length(s, lang.space_separated) as u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if total_length_units == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(TokenizationReport {
        language: lang.iso_code.clone(),
        sentence_count: corpus.len() as u64,
        total_tokens,
        total_length_units,
        ratio: total_tokens as f64 / total_length_units as f64,
    })
}

fn token_set<S: AsRef<str> + Sync>(corpus: &[S], tokenizer: &Tokenizer) -> HashSet<TokenId> {
    corpus
        .par_iter()
        .fold(HashSet::new, |mut set, s| {
            set.extend(tokenizer.encode(s.as_ref()));
            set
        })
        .reduce(HashSet::new, |mut a, b| {
            a.extend(b);
            a
        })
}

pub fn vocab_overlap<S: AsRef<str> + Sync>(
    corpus_a: &[S],
    corpus_b: &[S],
    tokenizer: &Tokenizer,
) -> Result<OverlapReport> {
    let a = token_set(corpus_a, tokenizer);
    let b = token_set(corpus_b, tokenizer);
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let inter = a.intersection(&b).count() as u64;
    let (size_a, size_b) = (a.len() as u64, b.len() as u64);
    Ok(OverlapReport {
        size_a,
        size_b,
        intersection_size: inter,
        ratio_over_a: inter as f64 / size_a as f64,
        ratio_over_b: inter as f64 / size_b as f64,
    })
}

const MAX_ORDER: usize = 4;

/// Corpus BLEU-4 on a 0 to 100 scale.
///
/// Unigram precision is unsmoothed; higher orders add one to both the
/// clipped match count and the n-gram total. The brevity penalty is
/// `exp(1 - r/c)` when the hypotheses are shorter than the references.
pub fn corpus_bleu<T: Eq + Hash>(hypotheses: &[Vec<T>], references: &[Vec<T>]) -> Result<f64> {
    if hypotheses.len() != references.len() {
        return Err(Error::PairedLength {
            src: hypotheses.len(),
            tgt: references.len(),
        });
    }
    let mut matches = [0u64; MAX_ORDER];
    let mut totals = [0u64; MAX_ORDER];
    let (mut c, mut r) = (0u64, 0u64);
    for (hyp, reference) in hypotheses.iter().zip(references) {
        c += hyp.len() as u64;
        r += reference.len() as u64;
        for n in 1..=MAX_ORDER {
            let ref_counts = ngram_counts(reference, n);
            for (gram, count) in ngram_counts(hyp, n) {
                matches[n - 1] += count.min(ref_counts.get(gram).copied().unwrap_or(0));
                totals[n - 1] += count;
            }
        }
    }
    if c == 0 || matches[0] == 0 {
        return Ok(0.0);
    }
    let log_precision: f64 = (0..MAX_ORDER)
        .map(|i| {
            let smooth = if i == 0 { 0.0 } else { 1.0 };
            ((matches[i] as f64 + smooth) / (totals[i] as f64 + smooth)).ln()
        })
        .sum::<f64>()
        / MAX_ORDER as f64;
    let bp = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    Ok(100.0 * bp * log_precision.exp())
}

fn ngram_counts<T: Eq + Hash>(seq: &[T], n: usize) -> HashMap<&[T], u64> {
    let mut counts = HashMap::new();
    if seq.len() >= n {
        for gram in seq.windows(n) {
            *counts.entry(gram).or_default() += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::LanguageRegistry;

    fn toks(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn sentence_length_examples() {
        assert_eq!(sentence_length("the cat sat", true), 3);
        assert_eq!(sentence_length("饕饕饕", false), 3);
        assert_eq!(sentence_length("  a  b ", true), 2);
        assert_eq!(sentence_length("ก ข\tค", false), 3);
        assert_eq!(sentence_length("", true), 0);
    }

    #[test]
    fn byte_fallback_ratio_on_three_byte_script() {
        let reg = LanguageRegistry::builtin();
        let th = reg.lookup("th").unwrap();
        let t = Tokenizer::byte_fallback();
        let report = tokenization_ratio(&["กขค", "งจ"], &t, th).unwrap();
        assert_eq!(report.total_tokens, 15);
        assert_eq!(report.total_length_units, 5);
        assert_eq!(report.ratio, 3.0);
    }

    #[test]
    fn compressed_ratio_is_two() {
        let reg = LanguageRegistry::builtin();
        let lo = reg.lookup("lo").unwrap();
        let codec = PrefixCodec::new(0xE0).unwrap();
        let report =
            tokenization_ratio_compressed(&["ກຂຄ"], &Tokenizer::byte_fallback(), lo, &codec).unwrap();
        assert_eq!(report.ratio, 2.0);
    }

    #[test]
    fn empty_corpus_ratio_fails() {
        let reg = LanguageRegistry::builtin();
        let en = reg.lookup("en").unwrap();
        let t = Tokenizer::byte_fallback();
        assert!(matches!(tokenization_ratio(&["  "], &t, en), Err(Error::EmptyCorpus)));
        let empty: [&str; 0] = [];
        assert!(matches!(tokenization_ratio(&empty, &t, en), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn overlap_examples() {
        let t = Tokenizer::byte_fallback();
        let same = vocab_overlap(&["abc"], &["cab"], &t).unwrap();
        assert_eq!((same.ratio_over_a, same.ratio_over_b), (1.0, 1.0));
        let disjoint = vocab_overlap(&["abc"], &["xyz"], &t).unwrap();
        assert_eq!((disjoint.ratio_over_a, disjoint.ratio_over_b), (0.0, 0.0));
        assert_eq!(disjoint.intersection_size, 0);
        assert!(vocab_overlap(&[""], &["x"], &t).is_err());
    }

    #[test]
    fn bleu_examples() {
        let x = vec![toks("the cat sat on the mat")];
        assert_eq!(corpus_bleu(&x, &x).unwrap(), 100.0);
        assert_eq!(corpus_bleu(&[toks("")], &[toks("abc")]).unwrap(), 0.0);
        assert!(corpus_bleu(&[toks("a")], &[]).is_err());
    }

    #[test]
    fn bleu_by_hand() {
        // p1 = 3/4, p2 = (2+1)/(3+1), p3 = (1+1)/(2+1), p4 = (0+1)/(1+1), equal lengths
        let expected = 100.0 * (0.75f64 * 0.75 * (2.0 / 3.0) * 0.5).powf(0.25);
        let got = corpus_bleu(&[toks("abcd")], &[toks("abce")]).unwrap();
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        assert!((got - 65.8037).abs() < 1e-3);
    }

    #[test]
    fn bleu_brevity_penalty() {
        // hypothesis of 2 against reference of 4: every precision is 1
        let got = corpus_bleu(&[toks("ab")], &[toks("abcd")]).unwrap();
        assert!((got - 100.0 * (1.0f64 - 2.0).exp()).abs() < 1e-9);
    }
}
