//! Uniform-model outputs: distribution of `H`, density of `A` and the
//! conditional curves `E[H | A = a]` (and `E[L | A = a]` with an urban cover).

use std::path::Path;

use landdiv::quadrature::QuadConfig;
use landdiv::uniform::{
    appropriation_density_uniform, conditional_expectation_uniform, conditional_expectation_uniform_with,
    expected_appropriation_uniform, expected_shannon_uniform, monte_carlo_moments, CondMethod,
};
use landdiv::{l_index_parts, sample_uniform_simplex, shannon_index, WeightVector};
use serde::{Deserialize, Serialize};

use crate::error::{CliResult, StageContext};
use crate::output::{num, Outputs};
use crate::svg::{Plot, Series};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UniformOptions {
    pub grid_points: usize,
    pub samples: usize,
    pub seed: u64,
    pub hist_bins: usize,
    pub urban_index: Option<usize>,
    pub svg: bool,
}

impl Default for UniformOptions {
    fn default() -> Self {
        UniformOptions {
            grid_points: 101,
            samples: 1_000_000,
            seed: 1,
            hist_bins: 50,
            urban_index: None,
            svg: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformSummary {
    pub covers: usize,
    pub weights: Vec<f64>,
    pub expected_h: f64,
    pub expected_a: f64,
    pub monte_carlo_h: (f64, f64),
    pub monte_carlo_a: (f64, f64),
    pub samples: usize,
}

fn grid(w: &WeightVector, points: usize) -> Vec<f64> {
    let (lo, hi) = (w.first(), w.last());
    (0..points)
        .map(|k| {
            if k + 1 == points {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (points - 1) as f64
            }
        })
        .collect()
}

/// `E[index | A = a]`, with the vertex value 0 at the ends of the range.
fn conditional(a: f64, w: &WeightVector, urban: Option<usize>) -> CliResult<f64> {
    if a <= w.first() || a >= w.last() {
        return Ok(0.0);
    }
    let method = CondMethod::Quadrature(QuadConfig::default());
    match urban {
        None => conditional_expectation_uniform(a, w, &method),
        Some(u) => conditional_expectation_uniform_with(a, w, &method, |p| l_index_parts(p, u).unwrap_or(0.0)),
    }
    .stage("conditional expectation")
}

pub fn run_uniform(w: &WeightVector, opts: &UniformOptions, out: &mut Outputs) -> CliResult<UniformSummary> {
    let covers = w.len();
    let points = opts.grid_points.max(2);
    let quad = QuadConfig::default();

    let sample = sample_uniform_simplex(covers, opts.samples, opts.seed).stage("uniform sampling")?;
    let bins = opts.hist_bins.max(1);
    let mut counts = vec![0u64; bins];
    for p in &sample {
        let h = shannon_index(p, covers).stage("uniform sampling")?.clamp(0.0, 1.0);
        counts[((h * bins as f64) as usize).min(bins - 1)] += 1;
    }
    drop(sample);
    let total = opts.samples.max(1) as f64;
    out.csv(
        "h_distribution_histogram.csv",
        &["bin_left", "bin_right", "count", "density"],
        counts.iter().enumerate().map(|(k, &c)| {
            vec![
                num(k as f64 / bins as f64),
                num((k + 1) as f64 / bins as f64),
                c.to_string(),
                num(c as f64 / total * bins as f64),
            ]
        }),
    )?;

    let a_grid = grid(w, points);
    let density: Vec<f64> = a_grid
        .iter()
        .map(|&a| appropriation_density_uniform(a, w, &quad))
        .collect::<landdiv::Result<_>>()
        .stage("appropriation density")?;
    out.csv(
        "a_density.csv",
        &["a", "density"],
        a_grid.iter().zip(&density).map(|(&a, &d)| vec![num(a), num(d)]),
    )?;

    let h_curve: Vec<f64> = a_grid
        .iter()
        .map(|&a| conditional(a, w, None))
        .collect::<CliResult<_>>()?;
    let l_curve: Option<Vec<f64>> = match opts.urban_index {
        Some(u) => Some(
            a_grid
                .iter()
                .map(|&a| conditional(a, w, Some(u)))
                .collect::<CliResult<_>>()?,
        ),
        None => None,
    };
    let mut header = vec!["a", "expected_h"];
    if l_curve.is_some() {
        header.push("expected_l");
    }
    out.csv(
        "conditional_curve.csv",
        &header,
        (0..points).map(|k| {
            let mut row = vec![num(a_grid[k]), num(h_curve[k])];
            if let Some(l) = &l_curve {
                row.push(num(l[k]));
            }
            row
        }),
    )?;

    let [mc_a, mc_h] = monte_carlo_moments(w, opts.samples.max(2), opts.seed.wrapping_add(1)).stage("monte carlo")?;
    let summary = UniformSummary {
        covers,
        weights: w.as_slice().to_vec(),
        expected_h: expected_shannon_uniform(covers).stage("expected H")?,
        expected_a: expected_appropriation_uniform(w),
        monte_carlo_h: mc_h,
        monte_carlo_a: mc_a,
        samples: opts.samples,
    };
    out.json("summary.json", &summary)?;

    if opts.svg {
        let range = (w.first(), w.last());
        let dmax = density.iter().cloned().fold(0.0, f64::max) * 1.05;
        let plot = Plot {
            title: "Density of the appropriation A".into(),
            x_label: "A".into(),
            y_label: "density".into(),
            x_range: range,
            y_range: (0.0, if dmax > 0.0 { dmax } else { 1.0 }),
            series: vec![Series::line(
                "f_A",
                "black",
                a_grid.iter().zip(&density).map(|(&a, &d)| (a, Some(d))).collect(),
            )],
        };
        out.text("a_density.svg", &plot.render())?;
        let mut series = vec![Series::line(
            "E[H | A]",
            "red",
            a_grid.iter().zip(&h_curve).map(|(&a, &h)| (a, Some(h))).collect(),
        )];
        if let Some(l) = &l_curve {
            series.push(Series::line(
                "E[L | A]",
                "darkred",
                a_grid.iter().zip(l).map(|(&a, &v)| (a, Some(v))).collect(),
            ));
        }
        let plot = Plot {
            title: "Conditional expectation under the uniform law".into(),
            x_label: "A".into(),
            y_label: "index".into(),
            x_range: range,
            y_range: (0.0, 1.0),
            series,
        };
        out.text("conditional_curve.svg", &plot.render())?;
        let hmax = counts
            .iter()
            .map(|&c| c as f64 / total * bins as f64)
            .fold(0.0, f64::max)
            * 1.05;
        let plot = Plot {
            title: "Distribution of H".into(),
            x_label: "H".into(),
            y_label: "density".into(),
            x_range: (0.0, 1.0),
            y_range: (0.0, if hmax > 0.0 { hmax } else { 1.0 }),
            series: vec![Series::line(
                "histogram",
                "black",
                counts
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| ((k as f64 + 0.5) / bins as f64, Some(c as f64 / total * bins as f64)))
                    .collect(),
            )],
        };
        out.text("h_distribution.svg", &plot.render())?;
    }
    Ok(summary)
}

/// Convenience wrapper writing into `dir`.
pub fn run_uniform_to(w: &WeightVector, opts: &UniformOptions, dir: &Path) -> CliResult<(UniformSummary, Vec<String>)> {
    let mut out = Outputs::create(dir)?;
    let s = run_uniform(w, opts, &mut out)?;
    Ok((s, out.files().to_vec()))
}
