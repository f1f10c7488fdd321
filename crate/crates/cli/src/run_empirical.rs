//! The empirical pipeline: per-face bandwidths, the subsimplex mixture, a
//! simulated sample and the binned curves of `H` (and `L`) against `A`.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use landdiv::bandwidth::{select_lambda, BandwidthConfig, BandwidthReport};
use landdiv::curves::{estimate_curve, CurveEstimate};
use landdiv::mixture::{decompose, group_by_face, MixtureConfig};
use landdiv::quadrature::QuadConfig;
use landdiv::uniform::{conditional_expectation_uniform, CondMethod};
use landdiv::{
    appropriation, l_index, rng, sample_uniform_simplex, shannon_index, Composition, SubsimplexMask, WeightVector,
};
use serde::{Deserialize, Serialize};

use crate::dataset::CellDataset;
use crate::error::{CliError, CliResult, StageContext};
use crate::output::{num, opt_num, Outputs};
use crate::scenario::ScenarioConfig;
use crate::svg::{Plot, Series};

/// Labels for seeds derived from the master seed.
const SEED_MIXTURE: u64 = 2;
const SEED_SAMPLE: u64 = 3;
const SEED_UNIFORM: u64 = 4;
const SEED_BANDWIDTH: u64 = 1 << 20;

const HIST2D_BINS: usize = 50;
/// Grid of the quadrature reference curve for `H`.
const ANALYTIC_POINTS: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub mask: SubsimplexMask,
    pub covers: Vec<String>,
    pub count: usize,
    pub dim: usize,
    pub lambda: Option<f64>,
    pub ise: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub scenario: String,
    pub cells: usize,
    pub sample_size: usize,
    pub lambda_table: Vec<LambdaRow>,
    /// Share of bins (with data on both sides) where the empirical `H` curve
    /// is at or below the uniform one.
    pub bins_at_or_below_uniform_h: Option<f64>,
    pub bins_at_or_below_uniform_l: Option<f64>,
    pub seeds: BTreeMap<String, u64>,
}

/// Integer code of a mask with the first cover as the lowest bit; sorting by
/// it lists faces as 1000, 0100, 1100, 0010, ...
pub fn mask_code(mask: &SubsimplexMask) -> u64 {
    mask.present().iter().rev().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

/// All nonempty faces of the `dim`-cover simplex, in [`mask_code`] order.
pub fn all_faces(dim: usize) -> Vec<SubsimplexMask> {
    (1u64..(1 << dim))
        .map(|code| SubsimplexMask::new((0..dim).map(|i| code >> i & 1 == 1).collect()).expect("nonempty"))
        .collect()
}

pub fn bandwidth_config(cfg: &ScenarioConfig, mask: &SubsimplexMask) -> BandwidthConfig {
    BandwidthConfig {
        lambda_grid: cfg.lambda_grid.clone(),
        population_size: cfg.sizes.population,
        resample_size: cfg.sizes.resample,
        bins: cfg.bins,
        eta: cfg.eta,
        seed: rng::derive_seed(cfg.seed, SEED_BANDWIDTH + mask_code(mask)),
        path: cfg.path,
        safety: cfg.safety,
        probe_count: cfg.sizes.envelope_probes,
        ..BandwidthConfig::default()
    }
}

/// Runs `select_lambda` for every job on up to `available_parallelism`
/// threads. Each job has its own seed, so results do not depend on the
/// schedule.
fn select_all(
    jobs: &[(SubsimplexMask, Vec<Composition>, WeightVector)],
    cfg: &ScenarioConfig,
) -> Vec<landdiv::Result<BandwidthReport>> {
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(jobs.len())
        .max(1);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<landdiv::Result<BandwidthReport>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some((mask, points, w_face)) = jobs.get(k) else {
                    break;
                };
                log::info!("selecting bandwidth for face {mask} ({} points)", points.len());
                let r = select_lambda(points, w_face, &bandwidth_config(cfg, mask));
                results.lock().expect("no poisoned lock")[k] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .expect("no poisoned lock")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

struct Indices {
    a: f64,
    h: f64,
    l: Option<f64>,
}

fn indices(c: &Composition, w: &WeightVector, urban: Option<usize>) -> landdiv::Result<Indices> {
    let a = appropriation(c, w)?.clamp(w.first(), w.last());
    let h = shannon_index(c, w.len())?.clamp(0.0, 1.0);
    let l = match urban {
        Some(u) => Some(l_index(c, u)?.clamp(0.0, 1.0)),
        None => None,
    };
    Ok(Indices { a, h, l })
}

fn write_curve(out: &mut Outputs, name: &str, curve: &CurveEstimate) -> CliResult<()> {
    out.with_writer(name, |buf| curve.write_csv(buf).stage("curve output"))
}

fn share_at_or_below(empirical: &CurveEstimate, uniform: &CurveEstimate) -> Option<f64> {
    let (mut below, mut both) = (0usize, 0usize);
    for (e, u) in empirical.bin_means.iter().zip(&uniform.bin_means) {
        if let (Some(e), Some(u)) = (e, u) {
            both += 1;
            below += (e <= u) as usize;
        }
    }
    (both > 0).then(|| below as f64 / both as f64)
}

fn hist2d(points: &[(f64, f64)], w: &WeightVector) -> Vec<Vec<String>> {
    let (lo, hi) = (w.first(), w.last());
    let mut counts = vec![0u64; HIST2D_BINS * HIST2D_BINS];
    for &(a, v) in points {
        let i = (((a - lo) / (hi - lo) * HIST2D_BINS as f64) as usize).min(HIST2D_BINS - 1);
        let j = ((v * HIST2D_BINS as f64) as usize).min(HIST2D_BINS - 1);
        counts[i * HIST2D_BINS + j] += 1;
    }
    let mut rows = Vec::with_capacity(counts.len());
    for i in 0..HIST2D_BINS {
        for j in 0..HIST2D_BINS {
            rows.push(vec![
                num(lo + (hi - lo) * i as f64 / HIST2D_BINS as f64),
                num(lo + (hi - lo) * (i + 1) as f64 / HIST2D_BINS as f64),
                num(j as f64 / HIST2D_BINS as f64),
                num((j + 1) as f64 / HIST2D_BINS as f64),
                counts[i * HIST2D_BINS + j].to_string(),
            ]);
        }
    }
    rows
}

fn curve_series(label: &str, color: &str, c: &CurveEstimate) -> Series {
    Series::line(
        label,
        color,
        c.centers().into_iter().zip(c.bin_means.iter().copied()).collect(),
    )
}

fn overlay(title: &str, y_label: &str, w: &WeightVector, scatter: Vec<(f64, f64)>, series: Vec<Series>) -> String {
    let mut all = vec![Series::dots("simulated cells", "lightsteelblue", scatter)];
    all.extend(series);
    Plot {
        title: title.into(),
        x_label: "A".into(),
        y_label: y_label.into(),
        x_range: (w.first(), w.last()),
        y_range: (0.0, 1.0),
        series: all,
    }
    .render()
}

pub fn run_empirical(dataset: &CellDataset, cfg: &ScenarioConfig, out: &mut Outputs) -> CliResult<EmpiricalSummary> {
    cfg.validate()?;
    let w = cfg.weight_vector()?;
    let n = w.len();
    if dataset.covers.len() != n {
        return Err(CliError::Input(format!(
            "dataset has {} covers but the scenario has {n} weights",
            dataset.covers.len()
        )));
    }
    if !cfg.covers.is_empty() && cfg.covers != dataset.covers {
        log::warn!(
            "dataset cover names {:?} differ from scenario {:?}",
            dataset.covers,
            cfg.covers
        );
    }
    if dataset.is_empty() {
        return Err(CliError::Input("dataset has no accepted rows".into()));
    }
    let mut seeds = BTreeMap::new();
    seeds.insert("master".to_string(), cfg.seed);

    let points = dataset.compositions();
    let faces = group_by_face(&points, cfg.zero_tol).stage("decompose")?;
    let mut jobs = Vec::new();
    for (mask, pts) in &faces {
        if mask.face_dim() >= 1 && pts.len() >= cfg.min_count {
            let reduced = pts
                .iter()
                .map(|p| mask.restrict(p))
                .collect::<landdiv::Result<Vec<_>>>()
                .stage("decompose")?;
            let w_face = w.restrict(mask).stage("decompose")?;
            jobs.push((mask.clone(), reduced, w_face));
        }
    }

    let mut lambdas = BTreeMap::new();
    let mut reports = BTreeMap::new();
    for ((mask, _, _), result) in jobs.iter().zip(select_all(&jobs, cfg)) {
        let report = result.stage("bandwidth selection")?;
        log::info!("face {mask}: lambda = {}", report.chosen_lambda);
        seeds.insert(format!("bandwidth/{mask}"), bandwidth_config(cfg, mask).seed);
        out.json(&format!("bandwidth_{mask}.json"), &report)?;
        lambdas.insert(mask.clone(), report.chosen_lambda);
        reports.insert(mask.clone(), report);
    }

    let lambda_table: Vec<LambdaRow> = all_faces(n)
        .into_iter()
        .map(|mask| {
            let report = reports.get(&mask);
            LambdaRow {
                covers: mask.present_indices().map(|i| dataset.covers[i].clone()).collect(),
                count: faces.get(&mask).map_or(0, |v| v.len()),
                dim: mask.face_dim(),
                lambda: report.map(|r| r.chosen_lambda),
                ise: report.and_then(|r| r.chosen().ise),
                mask,
            }
        })
        .collect();
    out.csv(
        "lambda_table.csv",
        &["mask", "covers", "count", "dim", "lambda", "ise"],
        lambda_table.iter().map(|r| {
            vec![
                r.mask.to_string(),
                r.covers.join("+"),
                r.count.to_string(),
                r.dim.to_string(),
                r.lambda.map_or_else(|| "-".to_string(), num),
                r.ise.map_or_else(|| "-".to_string(), num),
            ]
        }),
    )?;

    let mix_seed = rng::derive_seed(cfg.seed, SEED_MIXTURE);
    seeds.insert("mixture".into(), mix_seed);
    let mixture = decompose(
        &points,
        &w,
        &lambdas,
        &MixtureConfig {
            min_count: cfg.min_count,
            eta: cfg.eta,
            safety: cfg.safety,
            probe_count: cfg.sizes.envelope_probes,
            zero_tol: cfg.zero_tol,
            path: cfg.path,
            seed: mix_seed,
        },
    )
    .stage("mixture")?;
    out.text("mixture.json", &(mixture.to_json().stage("mixture")? + "\n"))?;

    let sample_seed = rng::derive_seed(cfg.seed, SEED_SAMPLE);
    seeds.insert("sample".into(), sample_seed);
    let sample = mixture.sample(cfg.sizes.sample, sample_seed).stage("sampling")?;
    let sim: Vec<Indices> = sample
        .iter()
        .map(|c| indices(c, &w, cfg.urban_index))
        .collect::<landdiv::Result<_>>()
        .stage("indices")?;
    let mut header = vec!["a", "h"];
    if cfg.urban_index.is_some() {
        header.push("l");
    }
    out.csv(
        "scatter.csv",
        &header,
        sim.iter().map(|s| {
            let mut row = vec![num(s.a), num(s.h)];
            if s.l.is_some() {
                row.push(opt_num(s.l));
            }
            row
        }),
    )?;

    let ah: Vec<(f64, f64)> = sim.iter().map(|s| (s.a, s.h)).collect();
    let curve_h = estimate_curve(&ah, &w, cfg.bins).stage("curves")?;
    write_curve(out, "curve_h.csv", &curve_h)?;
    out.csv(
        "histogram2d_h.csv",
        &["a_lo", "a_hi", "h_lo", "h_hi", "count"],
        hist2d(&ah, &w),
    )?;
    let al: Option<Vec<(f64, f64)>> = cfg
        .urban_index
        .map(|_| sim.iter().map(|s| (s.a, s.l.expect("urban index set"))).collect());
    let curve_l = match &al {
        Some(al) => {
            let c = estimate_curve(al, &w, cfg.bins).stage("curves")?;
            write_curve(out, "curve_l.csv", &c)?;
            out.csv(
                "histogram2d_l.csv",
                &["a_lo", "a_hi", "l_lo", "l_hi", "count"],
                hist2d(al, &w),
            )?;
            Some(c)
        }
        None => None,
    };

    // Uniform reference: binned Monte Carlo for both indices, quadrature for H.
    let uni_seed = rng::derive_seed(cfg.seed, SEED_UNIFORM);
    seeds.insert("uniform".into(), uni_seed);
    let uni = sample_uniform_simplex(n, cfg.sizes.uniform_samples, uni_seed).stage("uniform reference")?;
    let uni: Vec<Indices> = uni
        .iter()
        .map(|c| indices(c, &w, cfg.urban_index))
        .collect::<landdiv::Result<_>>()
        .stage("uniform reference")?;
    let uni_h =
        estimate_curve(&uni.iter().map(|s| (s.a, s.h)).collect::<Vec<_>>(), &w, cfg.bins).stage("uniform reference")?;
    write_curve(out, "uniform_curve_h.csv", &uni_h)?;
    let uni_l = match cfg.urban_index {
        Some(_) => {
            let pairs: Vec<(f64, f64)> = uni.iter().map(|s| (s.a, s.l.expect("urban index set"))).collect();
            let c = estimate_curve(&pairs, &w, cfg.bins).stage("uniform reference")?;
            write_curve(out, "uniform_curve_l.csv", &c)?;
            Some(c)
        }
        None => None,
    };
    drop(uni);
    let method = CondMethod::Quadrature(QuadConfig::default());
    let analytic: Vec<(f64, f64)> = (0..ANALYTIC_POINTS)
        .map(|k| {
            let a = w.first() + (w.last() - w.first()) * k as f64 / (ANALYTIC_POINTS - 1) as f64;
            if k == 0 || k + 1 == ANALYTIC_POINTS {
                Ok((a, 0.0))
            } else {
                conditional_expectation_uniform(a, &w, &method).map(|h| (a, h))
            }
        })
        .collect::<landdiv::Result<_>>()
        .stage("uniform reference")?;
    out.csv(
        "uniform_analytic_h.csv",
        &["a", "expected_h"],
        analytic.iter().map(|&(a, h)| vec![num(a), num(h)]),
    )?;

    let below_h = share_at_or_below(&curve_h, &uni_h);
    let below_l = curve_l
        .as_ref()
        .zip(uni_l.as_ref())
        .and_then(|(e, u)| share_at_or_below(e, u));
    if let Some(s) = below_h {
        log::info!(
            "empirical H curve at or below the uniform curve in {:.1}% of bins",
            100.0 * s
        );
    }
    if let Some(s) = below_l {
        log::info!(
            "empirical L curve at or below the uniform curve in {:.1}% of bins",
            100.0 * s
        );
    }

    if cfg.svg {
        let stride = (ah.len() / 5000).max(1);
        let thin = |v: &[(f64, f64)]| v.iter().step_by(stride).copied().collect::<Vec<_>>();
        let svg = overlay(
            "H against A: uniform (red) and simulated (blue)",
            "H",
            &w,
            thin(&ah),
            vec![
                Series::line(
                    "uniform E[H | A]",
                    "red",
                    analytic.iter().map(|&(a, h)| (a, Some(h))).collect(),
                ),
                curve_series("simulated E[H | A]", "blue", &curve_h),
            ],
        );
        out.text("curve_h.svg", &svg)?;
        if let (Some(al), Some(cl), Some(ul)) = (&al, &curve_l, &uni_l) {
            let svg = overlay(
                "L against A: uniform (red) and simulated (blue)",
                "L",
                &w,
                thin(al),
                vec![
                    curve_series("uniform E[L | A]", "red", ul),
                    curve_series("simulated E[L | A]", "blue", cl),
                ],
            );
            out.text("curve_l.svg", &svg)?;
        }
    }

    let summary = EmpiricalSummary {
        scenario: cfg.name.clone(),
        cells: dataset.len(),
        sample_size: cfg.sizes.sample,
        lambda_table,
        bins_at_or_below_uniform_h: below_h,
        bins_at_or_below_uniform_l: below_l,
        seeds,
    };
    out.json("summary.json", &summary)?;
    Ok(summary)
}
