//! Monolingual and parallel corpora: loading, seeded sampling and
//! instruction-prompt rendering.
//!
//! Text is kept byte-for-byte as read. No Unicode normalization, case folding
//! or whitespace trimming happens anywhere in this module.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on sentence pairs drawn per language pair for fine-tuning data.
pub const DEFAULT_SAMPLE_SIZE: usize = 10_000;

const PROMPT_PREAMBLE: &str = "Below is an instruction that describes a task, paired with an input that provides further context. Write a response that appropriately completes the request.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub src_lang: String,
    pub tgt_lang: String,
    pub src_text: String,
    pub tgt_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorpusLanguage {
    Mono(String),
    Parallel(String, String),
}

/// An ordered list of records tagged with their language(s).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus<R> {
    pub language: CorpusLanguage,
    pub records: Vec<R>,
}

pub type MonoCorpus = Corpus<String>;
pub type ParallelCorpus = Corpus<SentencePair>;

impl<R> Corpus<R> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl<R: Clone> Corpus<R> {
    /// Draws `n` records uniformly without replacement, deterministic in `seed`.
    ///
    /// Corpora with at most `n` records are returned unchanged. Selected
    /// records keep their original relative order.
    ///
    /// The generator is SplitMix64 (64-bit state) feeding
    /// `rand::seq::index::sample`; equal seeds give equal samples for a given
    /// build of this crate.
    pub fn sample(&self, n: usize, seed: u64) -> Self {
        if self.records.len() <= n {
            return self.clone();
        }
        let mut rng = SplitMix64::seed_from_u64(seed);
        let mut picked = rand::seq::index::sample(&mut rng, self.records.len(), n).into_vec();
        picked.sort_unstable();
        Self {
            language: self.language.clone(),
            records: picked.into_iter().map(|i| self.records[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParallelFormat {
    Tsv,
    Jsonl,
}

/// Where a parallel corpus comes from.
#[derive(Debug, Clone, Copy)]
pub enum ParallelSource<'a> {
    Single(&'a Path, ParallelFormat),
    /// Two line-aligned plain-text files.
    Paired { src: &'a Path, tgt: &'a Path },
}

pub fn load_parallel(source: ParallelSource<'_>, src_lang: &str, tgt_lang: &str) -> Result<ParallelCorpus> {
    let texts = match source {
        ParallelSource::Single(path, ParallelFormat::Tsv) => parse_tsv(&read_utf8(path)?)?,
        ParallelSource::Single(path, ParallelFormat::Jsonl) => parse_jsonl(&read_utf8(path)?)?,
        ParallelSource::Paired { src, tgt } => {
            let src = read_utf8(src)?;
            let tgt = read_utf8(tgt)?;
            let src: Vec<&str> = lines(&src).collect();
            let tgt: Vec<&str> = lines(&tgt).collect();
            if src.len() != tgt.len() {
                return Err(Error::PairedLength {
                    src: src.len(),
                    tgt: tgt.len(),
                });
            }
            src.into_iter()
                .zip(tgt)
                .map(|(s, t)| (s.to_string(), t.to_string()))
                .collect()
        }
    };
    Ok(Corpus {
        language: CorpusLanguage::Parallel(src_lang.to_string(), tgt_lang.to_string()),
        records: texts
            .into_iter()
            .map(|(src_text, tgt_text)| SentencePair {
                src_lang: src_lang.to_string(),
                tgt_lang: tgt_lang.to_string(),
                src_text,
                tgt_text,
            })
            .collect(),
    })
}

/// One record per line of a UTF-8 text file.
pub fn load_monolingual(path: &Path, lang: &str) -> Result<MonoCorpus> {
    let text = read_utf8(path)?;
    Ok(Corpus {
        language: CorpusLanguage::Mono(lang.to_string()),
        records: lines(&text).map(str::to_string).collect(),
    })
}

pub fn read_utf8(path: &Path) -> Result<String> {
    decode_utf8(std::fs::read(path)?)
}

pub fn decode_utf8(bytes: Vec<u8>) -> Result<String> {
    String::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        offset: e.utf8_error().valid_up_to(),
    })
}

/// Splits on `\n`; a final line terminator does not start another record.
pub fn lines(text: &str) -> impl Iterator<Item = &str> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    (!text.is_empty()).then(|| body.split('\n')).into_iter().flatten()
}

fn parse_tsv(text: &str) -> Result<Vec<(String, String)>> {
    lines(text)
        .zip(1u64..)
        .map(|(line, no)| {
            let tabs = line.matches('\t').count();
            if tabs != 1 {
                return Err(Error::TsvRow { line: no, tabs });
            }
            let (src, tgt) = line.split_once('\t').expect("one tab");
            Ok((src.to_string(), tgt.to_string()))
        })
        .collect()
}

#[derive(Deserialize)]
struct JsonlRecord {
    src: String,
    tgt: String,
}

fn parse_jsonl(text: &str) -> Result<Vec<(String, String)>> {
    lines(text)
        .zip(1u64..)
        .map(|(line, no)| {
            serde_json::from_str::<JsonlRecord>(line)
                .map(|r| (r.src, r.tgt))
                .map_err(|e| Error::JsonlSchema {
                    line: no,
                    message: e.to_string(),
                })
        })
        .collect()
}

/// Serializes pairs as `src<TAB>tgt<NEWLINE>`.
pub fn write_tsv<W: Write>(mut out: W, pairs: &[SentencePair]) -> Result<()> {
    for p in pairs {
        out.write_all(p.src_text.as_bytes())?;
        out.write_all(b"\t")?;
        out.write_all(p.tgt_text.as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Renders a pair in the instruction-tuning layout used for translation
/// fine-tuning. Lines are joined with `\n`; no trailing newline.
pub fn format_instruction(pair: &SentencePair, src_name: &str, tgt_name: &str) -> String {
    format!(
        "{PROMPT_PREAMBLE}\nInstruction: Translate the following sentences from {src_name} to {tgt_name}.\nInput: {}\nResponse: {}",
        pair.src_text, pair.tgt_text
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &tempfile::TempDir, name: &str, bytes: &[u8]) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, bytes).unwrap();
        p
    }

    fn mono(n: usize) -> MonoCorpus {
        Corpus {
            language: CorpusLanguage::Mono("xx".into()),
            records: (0..n).map(|i| format!("line {i}")).collect(),
        }
    }

    #[test]
    fn tsv_pair() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "a.tsv",
            "Dogs are the main source of transmission of rabies to humans.\tLes chiens sont la principale source de transmission de la rage.\n".as_bytes(),
        );
        let c = load_parallel(ParallelSource::Single(&p, ParallelFormat::Tsv), "en", "fr").unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.records[0].src_lang, "en");
        assert_eq!(c.records[0].tgt_lang, "fr");
        assert!(c.records[0].tgt_text.starts_with("Les chiens"));
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "e.tsv", b"");
        let c = load_parallel(ParallelSource::Single(&p, ParallelFormat::Tsv), "en", "fr").unwrap();
        assert!(c.is_empty());
        let p = write(&dir, "e.jsonl", b"");
        let c = load_parallel(ParallelSource::Single(&p, ParallelFormat::Jsonl), "en", "fr").unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn tsv_tab_count_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "bad.tsv", b"a\tb\nno tab here\n");
        match load_parallel(ParallelSource::Single(&p, ParallelFormat::Tsv), "en", "fr") {
            Err(Error::TsvRow { line, tabs }) => assert_eq!((line, tabs), (2, 0)),
            other => panic!("{other:?}"),
        }
        let p = write(&dir, "bad2.tsv", b"a\tb\tc\n");
        assert!(matches!(
            load_parallel(ParallelSource::Single(&p, ParallelFormat::Tsv), "en", "fr"),
            Err(Error::TsvRow { line: 1, tabs: 2 })
        ));
    }

    #[test]
    fn invalid_utf8_offset() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "bad.tsv", b"ab\t\xE0\x80\n");
        assert!(matches!(
            load_parallel(ParallelSource::Single(&p, ParallelFormat::Tsv), "en", "fr"),
            Err(Error::InvalidUtf8 { offset: 3 })
        ));
    }

    #[test]
    fn jsonl_missing_tgt() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.jsonl", b"{\"src\":\"a\",\"tgt\":\"b\"}\n{\"src\":\"c\"}\n");
        match load_parallel(ParallelSource::Single(&p, ParallelFormat::Jsonl), "en", "fr") {
            Err(Error::JsonlSchema { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("tgt"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn paired_files() {
        let dir = tempfile::tempdir().unwrap();
        let s = write(&dir, "s.txt", b"one\ntwo\n");
        let t = write(&dir, "t.txt", b"un\ndeux\n");
        let c = load_parallel(ParallelSource::Paired { src: &s, tgt: &t }, "en", "fr").unwrap();
        assert_eq!(c.records[1].tgt_text, "deux");

        let t = write(&dir, "t2.txt", b"un\n");
        assert!(matches!(
            load_parallel(ParallelSource::Paired { src: &s, tgt: &t }, "en", "fr"),
            Err(Error::PairedLength { src: 2, tgt: 1 })
        ));
    }

    #[test]
    fn tsv_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let raw = "  padded \t trailing \r\nα\tβ\n\t\n";
        let p = write(&dir, "r.tsv", raw.as_bytes());
        let c = load_parallel(ParallelSource::Single(&p, ParallelFormat::Tsv), "en", "el").unwrap();
        let mut out = Vec::new();
        write_tsv(&mut out, &c.records).unwrap();
        assert_eq!(out, raw.as_bytes());
    }

    #[test]
    fn sample_small_corpus_unchanged() {
        let c = mono(5);
        assert_eq!(c.sample(10, 123), c);
        assert_eq!(c.sample(5, 9), c);
    }

    #[test]
    fn sample_is_deterministic_and_seed_sensitive() {
        let c = mono(100);
        let a = c.sample(10, 7);
        assert_eq!(a, c.sample(10, 7));
        assert_eq!(a.len(), 10);
        assert_ne!(a.records, c.sample(10, 8).records);
    }

    #[test]
    fn sample_preserves_order_and_membership() {
        let c = mono(1000);
        let s = c.sample(50, 42);
        let idx: Vec<usize> = s
            .records
            .iter()
            .map(|r| c.records.iter().position(|x| x == r).unwrap())
            .collect();
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn instruction_template() {
        let pair = SentencePair {
            src_lang: "en".into(),
            tgt_lang: "fr".into(),
            src_text: "Dogs are the main source of transmission of rabies to humans.".into(),
            tgt_text: "Les chiens sont la principale source de transmission de la rage.".into(),
        };
        let prompt = format_instruction(&pair, "English", "French");
        let expected = "Below is an instruction that describes a task, paired with an input that provides further context. Write a response that appropriately completes the request.\n\
Instruction: Translate the following sentences from English to French.\n\
Input: Dogs are the main source of transmission of rabies to humans.\n\
Response: Les chiens sont la principale source de transmission de la rage.";
        assert_eq!(prompt, expected);
        assert_eq!(prompt, format_instruction(&pair, "English", "French"));

        let empty = SentencePair {
            src_text: String::new(),
            ..pair
        };
        assert!(format_instruction(&empty, "English", "French").contains("\nInput: \nResponse: "));
    }
}
