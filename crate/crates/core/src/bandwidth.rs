//! Bandwidth selection on one face through a Dirichlet proxy population.
//!
//! A Dirichlet law fitted to the face data stands in for the unknown truth.
//! A large population `Y` is drawn from it and a subsample `Z` of the data's
//! size is taken from `Y`. For each candidate bandwidth, a kernel estimate on
//! `Z` is resampled and its `(A, H)` curve compared with the curve of `Y`.
//! The bandwidth with the smallest integrated square error wins.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::compositions::{appropriation, shannon_index, Composition, WeightVector};
use crate::curves::{estimate_curve, ise, DEFAULT_BINS};
use crate::dirichlet::{self, mle_fit, DirichletParams};
use crate::error::{Error, Result};
use crate::kde::{DensityPath, KdeModel, DEFAULT_ETA};
use crate::mixture::{envelope_constant, FaceSampler, DEFAULT_PROBES, DEFAULT_SAFETY};
use crate::rng;

pub const DEFAULT_POPULATION: usize = 1_000_000;
pub const DEFAULT_RESAMPLE: usize = 10_000;

/// `count` log-spaced values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| {
            if k + 1 == count {
                hi
            } else {
                (a + (b - a) * k as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthConfig {
    pub lambda_grid: Vec<f64>,
    pub population_size: usize,
    pub resample_size: usize,
    pub bins: usize,
    pub eta: f64,
    pub seed: u64,
    pub path: DensityPath,
    pub safety: f64,
    pub probe_count: usize,
    pub mle_tol: f64,
    pub mle_max_iter: usize,
    /// Also report the leave-one-out log-likelihood of the face data per
    /// bandwidth. Never used for the choice.
    pub pseudo_likelihood: bool,
}

impl Default for BandwidthConfig {
    fn default() -> Self {
        BandwidthConfig {
            lambda_grid: log_grid(1e-4, 1e-1, 25),
            population_size: DEFAULT_POPULATION,
            resample_size: DEFAULT_RESAMPLE,
            bins: DEFAULT_BINS,
            eta: DEFAULT_ETA,
            seed: 0,
            path: DensityPath::EulerMaclaurin,
            safety: DEFAULT_SAFETY,
            probe_count: DEFAULT_PROBES,
            mle_tol: 1e-10,
            mle_max_iter: 100_000,
            pseudo_likelihood: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEvaluation {
    pub lambda: f64,
    /// `None` when the bandwidth was infeasible; see `failure`.
    pub ise: Option<f64>,
    pub skipped_width: Option<f64>,
    pub failure: Option<String>,
    pub pseudo_log_likelihood: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthReport {
    pub evaluations: Vec<LambdaEvaluation>,
    pub chosen_lambda: f64,
    pub proxy: DirichletParams,
    /// Log-likelihood of the face data under the fitted proxy.
    pub log_likelihood: f64,
    pub mle_iterations: usize,
}

impl BandwidthReport {
    pub fn chosen(&self) -> &LambdaEvaluation {
        self.evaluations
            .iter()
            .find(|e| e.lambda == self.chosen_lambda)
            .expect("chosen bandwidth is on the grid")
    }
}

fn validate(cfg: &BandwidthConfig) -> Result<()> {
    if cfg.lambda_grid.is_empty() {
        return Err(Error::InvalidArgument("empty bandwidth grid".into()));
    }
    if cfg.lambda_grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidArgument("bandwidths must be positive".into()));
    }
    if cfg.lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "bandwidth grid must be strictly increasing".into(),
        ));
    }
    if cfg.resample_size == 0 || cfg.population_size == 0 {
        return Err(Error::InvalidArgument("sample sizes must be positive".into()));
    }
    Ok(())
}

fn a_h_pairs(points: &[Composition], w: &WeightVector) -> Result<Vec<(f64, f64)>> {
    points
        .iter()
        .map(|p| Ok((appropriation(p, w)?, shannon_index(p, w.len())?)))
        .collect()
}

/// Runs the synthetic-population procedure on the reduced coordinates
/// `face_points` of one face with weights `w_face`.
pub fn select_lambda(
    face_points: &[Composition],
    w_face: &WeightVector,
    cfg: &BandwidthConfig,
) -> Result<BandwidthReport> {
    validate(cfg)?;
    if let Some(p) = face_points.iter().find(|p| p.len() != w_face.len()) {
        return Err(Error::DimensionMismatch {
            expected: w_face.len(),
            got: p.len(),
        });
    }
    let fit = mle_fit(face_points, cfg.mle_tol, cfg.mle_max_iter)?;
    let population = dirichlet::sample(&fit.params, cfg.population_size, rng::derive_seed(cfg.seed, 1));
    if face_points.len() > population.len() {
        return Err(Error::InvalidArgument("population smaller than the face sample".into()));
    }
    let mut rng = rng::seeded(rng::derive_seed(cfg.seed, 2), 0);
    let subsample: Vec<Composition> = index::sample(&mut rng, population.len(), face_points.len())
        .into_iter()
        .map(|i| population[i].clone())
        .collect();
    let reference = estimate_curve(&a_h_pairs(&population, w_face)?, w_face, cfg.bins)?;
    drop(population);

    let mut evaluations = Vec::with_capacity(cfg.lambda_grid.len());
    let mut first_error = None;
    for (k, &lambda) in cfg.lambda_grid.iter().enumerate() {
        let seed = rng::derive_seed(cfg.seed, 100 + k as u64);
        let outcome = (|| -> Result<(f64, f64)> {
            let mut model = KdeModel::build(subsample.clone(), lambda, cfg.eta)?;
            if cfg.path == DensityPath::EulerMaclaurin {
                model.prepare_euler_maclaurin()?;
            }
            let envelope = envelope_constant(&model, cfg.path, cfg.probe_count, cfg.safety, seed)?;
            let label = format!("lambda={lambda}");
            let sampler = FaceSampler {
                model: &model,
                envelope,
                path: cfg.path,
                label: &label,
            };
            let resampled = sampler.sample(cfg.resample_size, rng::derive_seed(seed, 1))?;
            let curve = estimate_curve(&a_h_pairs(&resampled, w_face)?, w_face, cfg.bins)?;
            let r = ise(&reference, &curve)?;
            Ok((r.value, r.skipped_width))
        })();
        let pseudo_log_likelihood = if cfg.pseudo_likelihood {
            Some(leave_one_out_log_likelihood(face_points, lambda, cfg.eta)?)
        } else {
            None
        };
        let eval = match outcome {
            Ok((v, skipped)) => LambdaEvaluation {
                lambda,
                ise: Some(v),
                skipped_width: Some(skipped),
                failure: None,
                pseudo_log_likelihood,
            },
            Err(e) => {
                log::warn!("bandwidth {lambda} infeasible: {e}");
                let eval = LambdaEvaluation {
                    lambda,
                    ise: None,
                    skipped_width: None,
                    failure: Some(e.to_string()),
                    pseudo_log_likelihood,
                };
                first_error.get_or_insert(e);
                eval
            }
        };
        log::debug!("lambda {lambda:.3e}: ise {:?}", eval.ise);
        evaluations.push(eval);
    }

    let mut best: Option<(f64, f64)> = None;
    for e in &evaluations {
        if let Some(v) = e.ise {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((e.lambda, v));
            }
        }
    }
    // With no feasible bandwidth, report why the first one failed.
    let Some((chosen_lambda, _)) = best else {
        return Err(first_error.expect("an empty grid is rejected up front"));
    };
    if !(1e-4..=1e-1).contains(&chosen_lambda) {
        log::info!("chosen bandwidth {chosen_lambda} lies outside [1e-4, 1e-1]");
    }
    Ok(BandwidthReport {
        evaluations,
        chosen_lambda,
        proxy: fit.params,
        log_likelihood: fit.log_likelihood,
        mle_iterations: fit.iterations,
    })
}

/// `sum_i ln f_{-i}(z_i)` for the kernel estimate on `points` (log-gamma path).
pub fn leave_one_out_log_likelihood(points: &[Composition], lambda: f64, eta: f64) -> Result<f64> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidArgument("leave-one-out needs at least 2 points".into()));
    }
    let model = KdeModel::build(points.to_vec(), lambda, eta)?;
    let mut total = 0.0;
    for p in points {
        let own = KdeModel::build(vec![p.clone()], lambda, eta)?.eval_loggamma(p)?;
        let all = model.eval_loggamma(p)? * n as f64;
        total += ((all - own).max(0.0) / (n - 1) as f64).ln();
    }
    Ok(total)
}
