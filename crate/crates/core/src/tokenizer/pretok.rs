//! Byte-level scanning and pre-splitting into merge units.
//!
//! Everything here works on raw bytes so that the same code path handles
//! ordinary UTF-8 text and prefix-stripped streams, which are not valid UTF-8.
//! Valid characters are symbols; any byte that is not part of a valid
//! character is a one-byte symbol of its own and never counts as whitespace.

use std::ops::Range;

use serde::{Deserialize, Serialize};

/// How text is cut into units before merging. Merges never cross units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreSplit {
    /// Words keep one preceding whitespace character; any further whitespace
    /// forms its own unit.
    #[default]
    Whitespace,
    /// Whole lines (terminator included) are units. Used for scripts written
    /// without inter-word spaces.
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Symbol {
    pub start: usize,
    pub end: usize,
    pub ws: bool,
}

impl Symbol {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }
}

pub(crate) fn symbols(bytes: &[u8]) -> Vec<Symbol> {
    let mut out = Vec::with_capacity(bytes.len());
    let mut pos = 0;
    for chunk in bytes.utf8_chunks() {
        for c in chunk.valid().chars() {
            let len = c.len_utf8();
            out.push(Symbol {
                start: pos,
                end: pos + len,
                ws: c.is_whitespace(),
            });
            pos += len;
        }
        for _ in chunk.invalid() {
            out.push(Symbol {
                start: pos,
                end: pos + 1,
                ws: false,
            });
            pos += 1;
        }
    }
    out
}

/// Byte ranges of the units of `bytes`; the ranges tile the input exactly.
pub(crate) fn split_units(bytes: &[u8], mode: PreSplit) -> Vec<Range<usize>> {
    match mode {
        PreSplit::Whitespace => split_whitespace(&symbols(bytes)),
        PreSplit::Line => split_lines(bytes),
    }
}

fn split_lines(bytes: &[u8]) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'\n' {
            out.push(start..i + 1);
            start = i + 1;
        }
    }
    if start < bytes.len() {
        out.push(start..bytes.len());
    }
    out
}

fn split_whitespace(syms: &[Symbol]) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < syms.len() {
        let run_start = i;
        let ws = syms[i].ws;
        while i < syms.len() && syms[i].ws == ws {
            i += 1;
        }
        let run = &syms[run_start..i];
        if ws {
            if i < syms.len() {
                // the last whitespace symbol is carried by the following word
                if run.len() > 1 {
                    out.push(run[0].start..run[run.len() - 1].start);
                }
            } else {
                out.push(run[0].start..run[run.len() - 1].end);
            }
        } else {
            let start = if run_start > 0 {
                syms[run_start - 1].start
            } else {
                run[0].start
            };
            out.push(start..run[run.len() - 1].end);
        }
    }
    out
}

/// A maximal run of symbols that are all whitespace or all non-whitespace.
pub(crate) struct Run {
    pub range: Range<usize>,
    pub ws: bool,
    pub symbols: Vec<Symbol>,
}

/// Alternating whitespace / non-whitespace runs, used by word-level BPE.
pub(crate) fn runs(bytes: &[u8]) -> Vec<Run> {
    let syms = symbols(bytes);
    let mut out: Vec<Run> = Vec::new();
    for s in syms {
        match out.last_mut() {
            Some(run) if run.ws == s.ws => {
                run.range.end = s.end;
                run.symbols.push(s);
            }
            _ => out.push(Run {
                range: s.range(),
                ws: s.ws,
                symbols: vec![s],
            }),
        }
    }
    out
}
