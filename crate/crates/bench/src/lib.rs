//! Shared inputs for the benchmarks in `benches/`.

pub const MINI_CORPUS: &str = include_str!("../../../fixtures/mini_multilingual.txt");

/// The mini corpus repeated until it has at least `n` lines.
pub fn corpus(n: usize) -> Vec<&'static str> {
    MINI_CORPUS.lines().cycle().take(n).collect()
}
