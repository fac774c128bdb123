//! Quadrant classification of fine-tuned models by bilingual and
//! multilingual gain.
//!
//! A model tuned on language LG is scored on its own direction en-LG
//! (bilingual) and on the mean of en-af and en-ro (multilingual). Each score
//! is compared with the untuned baseline through
//!
//! ```text
//! Δ = P_post / P_pre - k             if P_pre >= T
//! Δ = (P_post - k·T) / max(P_pre, ε) otherwise
//! ```
//!
//! where T is the mean baseline score and k the significance factor. A gain
//! is Δ > 0. The low branch keeps near-zero baselines from turning noise into
//! huge ratios.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::SOURCE_LANGUAGE;

pub const BASELINE_ROW: &str = "__baseline__";
pub const DEFAULT_K: f64 = 2.0;
pub const EPSILON: f64 = 1e-6;

pub const TED_FIXTURE_CSV: &str = include_str!("../../../fixtures/ted_flores_devtest.csv");
const TED_LABELS_CSV: &str = include_str!("../../../fixtures/ted_quadrant_labels.csv");

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Direction {
    pub src: String,
    pub tgt: String,
}

impl Direction {
    pub fn new(src: &str, tgt: &str) -> Self {
        Self {
            src: src.to_string(),
            tgt: tgt.to_string(),
        }
    }

    /// The direction a model tuned on `lang` is scored on bilingually.
    pub fn from_source(lang: &str) -> Self {
        Self::new(SOURCE_LANGUAGE, lang)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.src, self.tgt)
    }
}

impl FromStr for Direction {
    type Err = Error;

    /// Accepts `en-xx` and `en→xx`.
    fn from_str(s: &str) -> Result<Self> {
        let (src, tgt) = s
            .split_once('-')
            .or_else(|| s.split_once('→'))
            .ok_or_else(|| Error::InvalidArgument(format!("direction `{s}` is not of the form en-xx")))?;
        let (src, tgt) = (src.trim(), tgt.trim());
        if src.is_empty() || tgt.is_empty() {
            return Err(Error::InvalidArgument(format!("direction `{s}` has an empty side")));
        }
        Ok(Self::new(src, tgt))
    }
}

impl TryFrom<String> for Direction {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Direction> for String {
    fn from(d: Direction) -> Self {
        d.to_string()
    }
}

pub type ScoreRow = BTreeMap<Direction, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceMatrix {
    /// Baseline directions in file order.
    pub directions: Vec<Direction>,
    pub baseline: ScoreRow,
    /// Tuned language to its scores.
    pub models: BTreeMap<String, ScoreRow>,
    pub mult_directions: [Direction; 2],
}

pub fn default_mult_directions() -> [Direction; 2] {
    [Direction::from_source("af"), Direction::from_source("ro")]
}

impl PerformanceMatrix {
    /// Reads `model_lang,direction,score` rows. Rows with model
    /// `__baseline__` form the baseline.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().map(str::trim).ne(["model_lang", "direction", "score"]) {
            return Err(Error::MalformedRow {
                line: 1,
                message: "expected header `model_lang,direction,score`".into(),
            });
        }

        let mut directions = Vec::new();
        let mut baseline = ScoreRow::new();
        let mut models: BTreeMap<String, ScoreRow> = BTreeMap::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let malformed = |message: String| Error::MalformedRow { line, message };
            if record.len() != 3 {
                return Err(malformed(format!("expected 3 fields, found {}", record.len())));
            }
            let model = record[0].trim();
            if model.is_empty() {
                return Err(malformed("empty model_lang".into()));
            }
            let direction: Direction = record[1].parse().map_err(|e: Error| malformed(e.to_string()))?;
            let score: f64 = record[2]
                .trim()
                .parse()
                .map_err(|_| malformed(format!("score `{}` is not a number", record[2].trim())))?;
            if !score.is_finite() || score < 0.0 {
                return Err(malformed(format!("score {score} must be finite and non-negative")));
            }

            let row = if model == BASELINE_ROW {
                if !baseline.contains_key(&direction) {
                    directions.push(direction.clone());
                }
                &mut baseline
            } else {
                models.entry(model.to_string()).or_default()
            };
            if row.insert(direction.clone(), score).is_some() {
                return Err(malformed(format!("duplicate score for {model} {direction}")));
            }
        }
        Self::new(directions, baseline, models, default_mult_directions())
    }

    pub fn new(
        directions: Vec<Direction>,
        baseline: ScoreRow,
        models: BTreeMap<String, ScoreRow>,
        mult_directions: [Direction; 2],
    ) -> Result<Self> {
        if baseline.is_empty() {
            return Err(Error::EmptyBaseline);
        }
        for d in &mult_directions {
            if !baseline.contains_key(d) {
                return Err(Error::MissingDirection {
                    row: BASELINE_ROW.into(),
                    direction: d.to_string(),
                });
            }
        }
        Ok(Self {
            directions,
            baseline,
            models,
            mult_directions,
        })
    }

    pub fn with_mult_directions(self, mult_directions: [Direction; 2]) -> Result<Self> {
        Self::new(self.directions, self.baseline, self.models, mult_directions)
    }
}

/// The bundled TED matrix: a baseline row and 50 single-language models,
/// each scored on the 12 representative directions.
pub fn ted_fixture() -> PerformanceMatrix {
    PerformanceMatrix::from_csv(TED_FIXTURE_CSV.as_bytes()).expect("bundled fixture is valid")
}

/// Published quadrant labels for the TED models, keyed by language.
pub fn ted_reference_labels() -> BTreeMap<String, Quadrant> {
    let mut rdr = csv::Reader::from_reader(TED_LABELS_CSV.as_bytes());
    rdr.records()
        .map(|r| {
            let r = r.expect("bundled labels are valid");
            (r[0].to_string(), r[1].parse().expect("bundled labels are valid"))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceParams {
    pub threshold: f64,
    pub k: f64,
}

impl SignificanceParams {
    pub fn new(threshold: f64, k: f64) -> Result<Self> {
        if !(threshold.is_finite() && threshold >= 0.0) {
            return Err(Error::InvalidArgument(format!("threshold {threshold} must be >= 0")));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidArgument(format!("k {k} must be > 0")));
        }
        Ok(Self { threshold, k })
    }

    /// T from the matrix baseline with the given k.
    pub fn for_matrix(matrix: &PerformanceMatrix, k: f64) -> Result<Self> {
        Self::new(threshold(&matrix.baseline)?, k)
    }
}

/// Mean baseline score.
pub fn threshold(baseline: &ScoreRow) -> Result<f64> {
    if baseline.is_empty() {
        return Err(Error::EmptyBaseline);
    }
    Ok(baseline.values().sum::<f64>() / baseline.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    HighPre,
    LowPre,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaResult {
    pub value: f64,
    pub gain: bool,
    pub branch: Branch,
}

pub fn delta(pre: f64, post: f64, params: &SignificanceParams) -> DeltaResult {
    let (value, branch) = if pre >= params.threshold {
        (post / pre - params.k, Branch::HighPre)
    } else {
        ((post - params.k * params.threshold) / pre.max(EPSILON), Branch::LowPre)
    };
    DeltaResult {
        value,
        gain: value > 0.0,
        branch,
    }
}

/// Mean of the row's scores on the two multilingual directions.
pub fn multilingual_score(row: &ScoreRow, row_name: &str, mult: &[Direction; 2]) -> Result<f64> {
    let get = |d: &Direction| {
        row.get(d).copied().ok_or_else(|| Error::MissingDirection {
            row: row_name.to_string(),
            direction: d.to_string(),
        })
    };
    Ok((get(&mult[0])? + get(&mult[1])?) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    Reciprocal,
    Altruistic,
    Selfish,
    Stagnant,
    /// No bilingual baseline; multilingual gain.
    MultOnlyGain,
    /// No bilingual baseline; no multilingual gain.
    MultOnlyNoGain,
}

impl Quadrant {
    pub const ALL: [Quadrant; 6] = [
        Quadrant::Reciprocal,
        Quadrant::Altruistic,
        Quadrant::Selfish,
        Quadrant::Stagnant,
        Quadrant::MultOnlyGain,
        Quadrant::MultOnlyNoGain,
    ];

    pub fn from_gains(bilingual: Option<bool>, multilingual: bool) -> Self {
        match (bilingual, multilingual) {
            (Some(true), true) => Quadrant::Reciprocal,
            (Some(false), true) => Quadrant::Altruistic,
            (Some(true), false) => Quadrant::Selfish,
            (Some(false), false) => Quadrant::Stagnant,
            (None, true) => Quadrant::MultOnlyGain,
            (None, false) => Quadrant::MultOnlyNoGain,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Quadrant::Reciprocal => "Reciprocal",
            Quadrant::Altruistic => "Altruistic",
            Quadrant::Selfish => "Selfish",
            Quadrant::Stagnant => "Stagnant",
            Quadrant::MultOnlyGain => "MultOnlyGain",
            Quadrant::MultOnlyNoGain => "MultOnlyNoGain",
        }
    }

    /// Whether the multilingual axis shows a gain.
    pub fn multilingual_gain(&self) -> bool {
        matches!(
            self,
            Quadrant::Reciprocal | Quadrant::Altruistic | Quadrant::MultOnlyGain
        )
    }
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quadrant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quadrant::ALL
            .into_iter()
            .find(|q| q.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown quadrant `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrantAssignment {
    pub language: String,
    pub bilingual_delta: Option<DeltaResult>,
    pub multilingual_delta: DeltaResult,
    pub quadrant: Quadrant,
}

/// Classifies every model, ordered by language code.
pub fn classify(matrix: &PerformanceMatrix, params: &SignificanceParams) -> Result<Vec<QuadrantAssignment>> {
    let mult_pre = multilingual_score(&matrix.baseline, BASELINE_ROW, &matrix.mult_directions)?;
    matrix
        .models
        .iter()
        .map(|(lang, row)| {
            let own = Direction::from_source(lang);
            let bilingual_delta = match matrix.baseline.get(&own) {
                Some(&pre) => {
                    let post = row.get(&own).copied().ok_or_else(|| Error::MissingDirection {
                        row: lang.clone(),
                        direction: own.to_string(),
                    })?;
                    Some(delta(pre, post, params))
                }
                None => None,
            };
            let mult_post = multilingual_score(row, lang, &matrix.mult_directions)?;
            let multilingual_delta = delta(mult_pre, mult_post, params);
            Ok(QuadrantAssignment {
                language: lang.clone(),
                quadrant: Quadrant::from_gains(bilingual_delta.map(|d| d.gain), multilingual_delta.gain),
                bilingual_delta,
                multilingual_delta,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrantCounts {
    pub reciprocal: usize,
    pub altruistic: usize,
    pub selfish: usize,
    pub stagnant: usize,
    pub mult_only_gain: usize,
    pub mult_only_no_gain: usize,
}

impl QuadrantCounts {
    pub fn tally(assignments: &[QuadrantAssignment]) -> Self {
        let mut c = Self::default();
        for a in assignments {
            *c.get_mut(a.quadrant) += 1;
        }
        c
    }

    pub fn get(&self, q: Quadrant) -> usize {
        match q {
            Quadrant::Reciprocal => self.reciprocal,
            Quadrant::Altruistic => self.altruistic,
            Quadrant::Selfish => self.selfish,
            Quadrant::Stagnant => self.stagnant,
            Quadrant::MultOnlyGain => self.mult_only_gain,
            Quadrant::MultOnlyNoGain => self.mult_only_no_gain,
        }
    }

    fn get_mut(&mut self, q: Quadrant) -> &mut usize {
        match q {
            Quadrant::Reciprocal => &mut self.reciprocal,
            Quadrant::Altruistic => &mut self.altruistic,
            Quadrant::Selfish => &mut self.selfish,
            Quadrant::Stagnant => &mut self.stagnant,
            Quadrant::MultOnlyGain => &mut self.mult_only_gain,
            Quadrant::MultOnlyNoGain => &mut self.mult_only_no_gain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: f64,
    pub threshold: f64,
    #[serde(flatten)]
    pub counts: QuadrantCounts,
}

/// Quadrant counts at each `k`, with T taken from the matrix baseline.
pub fn sweep(matrix: &PerformanceMatrix, k_values: &[f64]) -> Result<Vec<SweepRow>> {
    if k_values.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one k".into()));
    }
    let t = threshold(&matrix.baseline)?;
    k_values
        .iter()
        .map(|&k| {
            let params = SignificanceParams::new(t, k)?;
            Ok(SweepRow {
                k,
                threshold: t,
                counts: QuadrantCounts::tally(&classify(matrix, &params)?),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: f64) -> SignificanceParams {
        SignificanceParams::new(t, 2.0).unwrap()
    }

    fn by_lang(assignments: &[QuadrantAssignment]) -> BTreeMap<&str, Quadrant> {
        assignments.iter().map(|a| (a.language.as_str(), a.quadrant)).collect()
    }

    #[test]
    fn fixture_shape() {
        let m = ted_fixture();
        assert_eq!(m.directions.len(), 12);
        assert_eq!(m.models.len(), 50);
        assert!(m.models.values().all(|row| row.len() >= 12));
        assert_eq!(ted_reference_labels().len(), 50);
    }

    #[test]
    fn threshold_examples() {
        let t = threshold(&ted_fixture().baseline).unwrap();
        assert!((t - 25.1 / 12.0).abs() < 1e-12);
        assert!((t - 2.0917).abs() < 1e-4);
        let one: ScoreRow = [(Direction::from_source("xx"), 5.0)].into();
        assert_eq!(threshold(&one).unwrap(), 5.0);
        let zeros: ScoreRow = [(Direction::from_source("a"), 0.0), (Direction::from_source("b"), 0.0)].into();
        assert_eq!(threshold(&zeros).unwrap(), 0.0);
        assert!(matches!(threshold(&ScoreRow::new()), Err(Error::EmptyBaseline)));
    }

    #[test]
    fn delta_examples() {
        let t = 25.1 / 12.0;
        let d = delta(3.6, 15.5, &params(t));
        assert_eq!(d.branch, Branch::HighPre);
        assert!((d.value - (15.5 / 3.6 - 2.0)).abs() < 1e-12);
        assert!((d.value - 2.306).abs() < 1e-3);
        assert!(d.gain);

        let d = delta(t, 2.0 * t, &params(t));
        assert_eq!(d.value, 0.0);
        assert!(!d.gain);

        let d = delta(0.4, 0.1, &params(t));
        assert_eq!(d.branch, Branch::LowPre);
        assert!((d.value - (0.1 - 2.0 * t) / 0.4).abs() < 1e-12);
        assert!((d.value + 10.2).abs() < 0.05);
        assert!(!d.gain);

        let d = delta(0.0, 5.0, &params(t));
        assert!(d.value.is_finite() && d.gain);
    }

    #[test]
    fn multilingual_score_examples() {
        let m = ted_fixture();
        let he = multilingual_score(&m.models["he"], "he", &m.mult_directions).unwrap();
        assert!((he - 14.8).abs() < 1e-12);
        let base = multilingual_score(&m.baseline, BASELINE_ROW, &m.mult_directions).unwrap();
        assert!((base - 3.55).abs() < 1e-12);
        let row: ScoreRow = [(Direction::from_source("ro"), 1.0)].into();
        match multilingual_score(&row, "x", &m.mult_directions) {
            Err(Error::MissingDirection { direction, .. }) => assert_eq!(direction, "en-af"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_ted_at_k2() {
        let m = ted_fixture();
        let got = classify(&m, &SignificanceParams::for_matrix(&m, 2.0).unwrap()).unwrap();
        let q = by_lang(&got);
        assert_eq!(q["ro"], Quadrant::Reciprocal);
        for lang in ["he", "tr", "et", "th"] {
            assert_eq!(q[lang], Quadrant::Altruistic, "{lang}");
        }
        for lang in ["ta", "zh"] {
            assert_eq!(q[lang], Quadrant::Stagnant, "{lang}");
        }
        let full = got.iter().filter(|a| a.bilingual_delta.is_some()).count();
        assert_eq!(full, 7);
        let langs: Vec<_> = got.iter().map(|a| a.language.clone()).collect();
        let mut sorted = langs.clone();
        sorted.sort();
        assert_eq!(langs, sorted);
    }

    #[test]
    fn classify_requires_own_direction() {
        let m = ted_fixture();
        let mut broken = m.clone();
        broken.models.get_mut("ro").unwrap().remove(&Direction::from_source("ro"));
        assert!(matches!(
            classify(&broken, &params(2.0)),
            Err(Error::MissingDirection { .. })
        ));
    }

    #[test]
    fn sweep_examples() {
        let m = ted_fixture();
        let rows = sweep(&m, &[2.0]).unwrap();
        let single = QuadrantCounts::tally(&classify(&m, &SignificanceParams::for_matrix(&m, 2.0).unwrap()).unwrap());
        assert_eq!(rows[0].counts, single);
        assert_eq!((single.reciprocal, single.altruistic, single.stagnant, single.selfish), (1, 4, 2, 0));

        let rows = sweep(&m, &[20.0]).unwrap();
        assert_eq!(rows[0].counts.stagnant, 7);
        assert!(sweep(&m, &[]).is_err());
        assert!(sweep(&m, &[0.0]).is_err());
    }

    #[test]
    fn csv_errors() {
        let bad = "model_lang,direction,score\n__baseline__,en-af,x\n";
        assert!(matches!(
            PerformanceMatrix::from_csv(bad.as_bytes()),
            Err(Error::MalformedRow { line: 2, .. })
        ));
        let neg = "model_lang,direction,score\n__baseline__,en-af,-1\n";
        assert!(PerformanceMatrix::from_csv(neg.as_bytes()).is_err());
        let no_ro = "model_lang,direction,score\n__baseline__,en-af,1\n";
        assert!(matches!(
            PerformanceMatrix::from_csv(no_ro.as_bytes()),
            Err(Error::MissingDirection { .. })
        ));
        let empty = "model_lang,direction,score\n";
        assert!(matches!(PerformanceMatrix::from_csv(empty.as_bytes()), Err(Error::EmptyBaseline)));
        let dup = "model_lang,direction,score\n__baseline__,en-af,1\n__baseline__,en-af,2\n";
        assert!(PerformanceMatrix::from_csv(dup.as_bytes()).is_err());
    }

    #[test]
    fn direction_parsing() {
        assert_eq!("en-ro".parse::<Direction>().unwrap(), Direction::from_source("ro"));
        assert_eq!("en→ro".parse::<Direction>().unwrap(), Direction::from_source("ro"));
        assert!("enro".parse::<Direction>().is_err());
        assert_eq!(Direction::from_source("zh").to_string(), "en-zh");
    }
}
