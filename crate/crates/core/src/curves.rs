//! Binned estimates of `a -> E[index | A = a]` and the integrated square
//! error between two such curves.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::compositions::WeightVector;
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 200;

/// Values of `A` this far outside `[lo, hi]` (relative to the range) are
/// rounding residue and are clamped into the end bins.
const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEstimate {
    pub bin_edges: Vec<f64>,
    /// `None` marks an empty bin.
    pub bin_means: Vec<Option<f64>>,
    pub bin_counts: Vec<u64>,
}

/// Integrated square error and the width of bins that could not be compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ise {
    pub value: f64,
    pub skipped_width: f64,
}

fn edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let width = hi - lo;
    let mut e: Vec<f64> = (0..bins).map(|k| lo + width * k as f64 / bins as f64).collect();
    e.push(hi);
    e
}

/// Bin of `a`, computed as `floor((a - lo) * bins / width)` so that doubling
/// `bins` splits every bin exactly in two.
fn bin_index(a: f64, lo: f64, width: f64, bins: usize) -> usize {
    let t = ((a - lo) * bins as f64) / width;
    (t.floor().max(0.0) as usize).min(bins - 1)
}

/// Curve over `[w_1, w_n]` with `bins` equal-width bins.
pub fn estimate_curve(pairs: &[(f64, f64)], w: &WeightVector, bins: usize) -> Result<CurveEstimate> {
    estimate_curve_on(pairs, w.first(), w.last(), bins)
}

/// Curve over an explicit range `[lo, hi]`; the last bin includes `hi`.
pub fn estimate_curve_on(pairs: &[(f64, f64)], lo: f64, hi: f64, bins: usize) -> Result<CurveEstimate> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 bins, got {bins}")));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid curve range [{lo}, {hi}]")));
    }
    let width = hi - lo;
    let slack = RANGE_SLACK * width.max(hi.abs());
    // running means keep a constant index exactly constant
    let mut means = vec![0.0; bins];
    let mut counts = vec![0u64; bins];
    for &(a, v) in pairs {
        if !(a >= lo - slack && a <= hi + slack) {
            return Err(Error::OutOfDomain {
                value: a,
                domain: format!("[{lo}, {hi}]"),
            });
        }
        let k = bin_index(a.clamp(lo, hi), lo, width, bins);
        counts[k] += 1;
        means[k] += (v - means[k]) / counts[k] as f64;
    }
    let bin_means = means.iter().zip(&counts).map(|(&m, &c)| (c > 0).then_some(m)).collect();
    Ok(CurveEstimate {
        bin_edges: edges(lo, hi, bins),
        bin_means,
        bin_counts: counts,
    })
}

impl CurveEstimate {
    pub fn bins(&self) -> usize {
        self.bin_counts.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    pub fn total_count(&self) -> u64 {
        self.bin_counts.iter().sum()
    }

    /// Merges adjacent bin pairs, weighting means by counts.
    pub fn coarsen(&self) -> Result<CurveEstimate> {
        if self.bins() % 2 != 0 {
            return Err(Error::InvalidArgument("bin count is odd".into()));
        }
        let mut means = Vec::with_capacity(self.bins() / 2);
        let mut counts = Vec::with_capacity(self.bins() / 2);
        for k in (0..self.bins()).step_by(2) {
            let c = self.bin_counts[k] + self.bin_counts[k + 1];
            let s: f64 = (k..k + 2)
                .filter_map(|i| self.bin_means[i].map(|m| m * self.bin_counts[i] as f64))
                .sum();
            counts.push(c);
            means.push((c > 0).then(|| s / c as f64));
        }
        let edges = self.bin_edges.iter().step_by(2).copied().collect();
        Ok(CurveEstimate {
            bin_edges: edges,
            bin_means: means,
            bin_counts: counts,
        })
    }

    /// CSV with columns `bin_left, bin_right, count, mean`; empty bins leave
    /// `mean` blank.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Serialization(e.to_string());
        wtr.write_record(["bin_left", "bin_right", "count", "mean"])
            .map_err(io)?;
        for k in 0..self.bins() {
            let mean = self.bin_means[k].map(|m| m.to_string()).unwrap_or_default();
            wtr.write_record([
                self.bin_edges[k].to_string(),
                self.bin_edges[k + 1].to_string(),
                self.bin_counts[k].to_string(),
                mean,
            ])
            .map_err(io)?;
        }
        wtr.flush().map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<CurveEstimate> {
        let mut rdr = csv::Reader::from_reader(input);
        let bad = |e: &dyn std::fmt::Display| Error::Serialization(e.to_string());
        let mut edges = Vec::new();
        let mut means = Vec::new();
        let mut counts = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| bad(&e))?;
            if rec.len() != 4 {
                return Err(Error::Serialization(format!("expected 4 columns, got {}", rec.len())));
            }
            let left: f64 = rec[0].parse().map_err(|e| bad(&e))?;
            let right: f64 = rec[1].parse().map_err(|e| bad(&e))?;
            if edges.is_empty() {
                edges.push(left);
            } else if edges.last() != Some(&left) {
                return Err(Error::Serialization("bins are not contiguous".into()));
            }
            edges.push(right);
            counts.push(rec[2].parse().map_err(|e| bad(&e))?);
            means.push(if rec[3].is_empty() {
                None
            } else {
                Some(rec[3].parse().map_err(|e| bad(&e))?)
            });
        }
        Ok(CurveEstimate {
            bin_edges: edges,
            bin_means: means,
            bin_counts: counts,
        })
    }
}

/// `sum (mean1 - mean2)^2 * width` over bins nonempty in both curves.
pub fn ise(c1: &CurveEstimate, c2: &CurveEstimate) -> Result<Ise> {
    if c1.bin_edges != c2.bin_edges {
        return Err(Error::MismatchedEdges);
    }
    let mut value = 0.0;
    let mut skipped_width = 0.0;
    for (k, e) in c1.bin_edges.windows(2).enumerate() {
        let width = e[1] - e[0];
        match (c1.bin_means[k], c2.bin_means[k]) {
            (Some(a), Some(b)) => value += (a - b).powi(2) * width,
            _ => skipped_width += width,
        }
    }
    Ok(Ise { value, skipped_width })
}
