//! Plot data for quadrant scatter plots and k sweeps.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrant::{Quadrant, QuadrantAssignment, SweepRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub labels: Vec<String>,
}

impl PlotSeries {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            x: Vec::new(),
            y: Vec::new(),
            labels: Vec::new(),
        }
    }

    fn push(&mut self, x: f64, y: f64, label: String) {
        self.x.push(x);
        self.y.push(y);
        self.labels.push(label);
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Bilingual Δ against multilingual Δ, one series per quadrant. Languages
/// without a bilingual Δ are left out; empty quadrants produce no series.
pub fn emit_quadrant_plot(assignments: &[QuadrantAssignment]) -> Vec<PlotSeries> {
    let order = [
        Quadrant::Reciprocal,
        Quadrant::Altruistic,
        Quadrant::Selfish,
        Quadrant::Stagnant,
    ];
    order
        .iter()
        .filter_map(|&q| {
            let mut s = PlotSeries::new(q.name());
            for a in assignments.iter().filter(|a| a.quadrant == q) {
                if let Some(bil) = a.bilingual_delta {
                    s.push(bil.value, a.multilingual_delta.value, a.language.clone());
                }
            }
            (!s.is_empty()).then_some(s)
        })
        .collect()
}

/// Quadrant counts against k, one series per quadrant.
pub fn emit_sweep_plot(rows: &[SweepRow]) -> Vec<PlotSeries> {
    Quadrant::ALL
        .iter()
        .map(|&q| {
            let mut s = PlotSeries::new(q.name());
            for r in rows {
                s.push(r.k, r.counts.get(q) as f64, format!("k={}", sig6(r.k)));
            }
            s
        })
        .collect()
}

/// Long-format CSV: `series,label,x,y`.
pub fn write_plot_csv<W: Write>(out: W, series: &[PlotSeries]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["series", "label", "x", "y"])?;
    for s in series {
        for i in 0..s.len() {
            w.write_record([s.name.as_str(), &s.labels[i], &sig6(s.x[i]), &sig6(s.y[i])])?;
        }
    }
    w.flush().map_err(Error::from)
}

/// `v` with six significant digits, trailing zeros trimmed.
pub fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-5..=15).contains(&magnitude) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    let v = if magnitude > 5 {
        let unit = 10f64.powi(magnitude - 5);
        (v / unit).round() * unit
    } else {
        v
    };
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}
