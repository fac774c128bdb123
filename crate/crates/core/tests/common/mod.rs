//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;

pub const MINI_CORPUS: &str = include_str!("../../../../fixtures/mini_multilingual.txt");

pub fn mini_lines() -> Vec<&'static str> {
    MINI_CORPUS.lines().collect()
}

/// Whitespace pre-split written from the boundary rule alone: a unit starts
/// at the first character, at whitespace that follows a non-space, and at
/// the last whitespace of a run when a word follows.
pub fn oracle_units(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let ws = |i: usize| chars[i].is_whitespace();
    let mut units: Vec<String> = Vec::new();
    for i in 0..chars.len() {
        let boundary = i == 0
            || (ws(i) && !ws(i - 1))
            || (ws(i) && ws(i - 1) && i + 1 < chars.len() && !ws(i + 1));
        if boundary {
            units.push(String::new());
        }
        units.last_mut().unwrap().push(chars[i]);
    }
    units
}

/// Brute-force byte-level BPE: recount every pair from scratch each round.
pub fn oracle_bbpe(lines: &[&str], target: usize) -> Vec<(Vec<u8>, Vec<u8>)> {
    let mut units: Vec<Vec<Vec<u8>>> = lines
        .iter()
        .flat_map(|l| oracle_units(l))
        .map(|u| u.bytes().map(|b| vec![b]).collect())
        .collect();
    let mut learned: BTreeSet<Vec<u8>> = BTreeSet::new();
    let mut merges = Vec::new();
    while 259 + learned.len() < target {
        let mut counts: std::collections::BTreeMap<(Vec<u8>, Vec<u8>), usize> = Default::default();
        for u in &units {
            for w in u.windows(2) {
                *counts.entry((w[0].clone(), w[1].clone())).or_default() += 1;
            }
        }
        // BTreeMap iterates in (left, right) order, so the first maximum wins ties
        // BTreeMap iterates in (left, right) order, so the first maximum wins ties;
        // starting at 1 skips pairs seen only once
        let mut best = None;
        let mut best_count = 1;
        for (pair, &c) in &counts {
            if c > best_count {
                best = Some(pair);
                best_count = c;
            }
        }
        let Some((l, r)) = best else { break };
        let (l, r) = (l.clone(), r.clone());
        for u in &mut units {
            let mut out = Vec::new();
            let mut i = 0;
            while i < u.len() {
                if i + 1 < u.len() && u[i] == l && u[i + 1] == r {
                    out.push([l.clone(), r.clone()].concat());
                    i += 2;
                } else {
                    out.push(u[i].clone());
                    i += 1;
                }
            }
            *u = out;
        }
        learned.insert([l.clone(), r.clone()].concat());
        merges.push((l, r));
    }
    merges
}

pub fn merge_list(pairs: &[(&str, &str)]) -> Vec<(Vec<u8>, Vec<u8>)> {
    pairs
        .iter()
        .map(|(l, r)| (l.as_bytes().to_vec(), r.as_bytes().to_vec()))
        .collect()
}

/// The low/lower/newest/widest micro-corpus, one word per line.
pub fn classic_corpus() -> Vec<&'static str> {
    let mut lines = Vec::new();
    for (word, n) in [("low", 5), ("lower", 2), ("newest", 6), ("widest", 3)] {
        lines.extend(std::iter::repeat(word).take(n));
    }
    lines
}

/// Any scalar value, weighted towards each UTF-8 width, with extra weight
/// on the 0xE0 lead block (Thai, Lao and friends) and whitespace.
pub fn any_char() -> impl Strategy<Value = char> {
    prop_oneof![
        3 => proptest::char::range('\u{0}', '\u{7F}'),
        2 => proptest::char::range('\u{80}', '\u{7FF}'),
        3 => proptest::char::range('\u{800}', '\u{FFFF}'),
        3 => proptest::char::range('\u{0E00}', '\u{0FFF}'),
        2 => proptest::char::range('\u{10000}', '\u{10FFFF}'),
        2 => prop_oneof![Just(' '), Just('\n'), Just('\t'), Just('\u{3000}')],
    ]
}

pub fn any_text(max_chars: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(any_char(), 0..=max_chars).prop_map(|v| v.into_iter().collect())
}

/// Characters whose UTF-8 form is three bytes with lead `lead`.
pub fn chars_with_lead(lead: u8) -> impl Strategy<Value = char> {
    let lo = ((lead as u32) & 0x0F) << 12;
    let lo = lo.max(0x800);
    // U+D800..U+DFFF are surrogates and share lead 0xED
    let hi = if lead == 0xED { 0xD7FF } else { (((lead as u32) & 0x0F) << 12) | 0xFFF };
    proptest::char::range(char::from_u32(lo).unwrap(), char::from_u32(hi).unwrap())
}
