//! Dirichlet-kernel density estimation on the simplex.
//!
//! Kernel `i` is the Dirichlet law with parameters `1 + z_ij / lambda`, whose
//! mode is the sample point `z_i`. The estimate is the average of the `N`
//! kernels. Two evaluation paths share the same log-sum-exp core and differ
//! only in how the per-kernel normalizer is computed:
//!
//! * log-gamma: `ln Gamma(n + 1/lambda) - sum_j ln Gamma(1 + z_ij/lambda)`;
//! * Euler-Maclaurin: a truncated Weierstrass series whose remainder is
//!   bounded so that the density ratio stays within `(1 + eta)^{+-1}`.

mod euler_maclaurin;

use serde::{Deserialize, Serialize};

use crate::compositions::Composition;
use crate::error::{Error, Result};
use crate::special::ln_gamma;

pub use euler_maclaurin::{EulerMaclaurinPlan, MAX_ORDER, MAX_START};

pub const DEFAULT_ETA: f64 = 1e-4;
pub const KDE_FORMAT_VERSION: u32 = 1;

/// Which normalizer a density evaluation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityPath {
    LogGamma,
    #[default]
    EulerMaclaurin,
}

#[derive(Debug, Clone)]
struct PreparedSeries {
    plan: EulerMaclaurinPlan,
    log_norm: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "KdeDocument", into = "KdeDocument")]
pub struct KdeModel {
    points: Vec<Composition>,
    lambda: f64,
    eta: f64,
    dim: usize,
    /// `z_ij / lambda`, row-major.
    exponents: Vec<f64>,
    log_norm: Vec<f64>,
    series: Option<PreparedSeries>,
}

impl PartialEq for KdeModel {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.lambda == other.lambda && self.eta == other.eta
    }
}

#[derive(Serialize, Deserialize)]
struct KdeDocument {
    format_version: u32,
    dim: usize,
    lambda: f64,
    eta: f64,
    points: Vec<Composition>,
}

impl From<KdeModel> for KdeDocument {
    fn from(m: KdeModel) -> Self {
        KdeDocument {
            format_version: KDE_FORMAT_VERSION,
            dim: m.dim,
            lambda: m.lambda,
            eta: m.eta,
            points: m.points,
        }
    }
}

impl TryFrom<KdeDocument> for KdeModel {
    type Error = Error;

    fn try_from(doc: KdeDocument) -> Result<Self> {
        if doc.format_version != KDE_FORMAT_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported KDE format version {}",
                doc.format_version
            )));
        }
        let model = KdeModel::build(doc.points, doc.lambda, doc.eta)?;
        if model.dim != doc.dim {
            return Err(Error::DimensionMismatch {
                expected: doc.dim,
                got: model.dim,
            });
        }
        Ok(model)
    }
}

impl KdeModel {
    pub fn build(points: Vec<Composition>, lambda: f64, eta: f64) -> Result<Self> {
        let dim = points
            .first()
            .ok_or_else(|| Error::InvalidArgument("KDE needs at least one point".into()))?
            .len();
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bandwidth must be positive, got {lambda}"
            )));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
        let u = 1.0 / lambda;
        let exponents: Vec<f64> = points
            .iter()
            .flat_map(|p| p.parts().iter().map(move |z| z * u))
            .collect();
        let head = ln_gamma(dim as f64 + u);
        let log_norm = exponents
            .chunks(dim)
            .map(|e| head - e.iter().map(|&a| ln_gamma(1.0 + a)).sum::<f64>())
            .collect();
        Ok(KdeModel {
            points,
            lambda,
            eta,
            dim,
            exponents,
            log_norm,
            series: None,
        })
    }

    pub fn points(&self) -> &[Composition] {
        &self.points
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Per-coordinate remainder target `ln(1 + eta) / n`.
    pub fn epsilon(&self) -> f64 {
        (1.0 + self.eta).ln() / self.dim as f64
    }

    fn distinct_coordinates(&self) -> Vec<f64> {
        let mut zs: Vec<f64> = self.points.iter().flat_map(|p| p.parts().iter().copied()).collect();
        zs.sort_by(f64::total_cmp);
        zs.dedup();
        zs
    }

    pub fn plan_euler_maclaurin(&self) -> Result<EulerMaclaurinPlan> {
        euler_maclaurin::find_plan(&self.distinct_coordinates(), 1.0 / self.lambda, self.dim, self.eta)
    }

    fn series_log_norms(&self, plan: &EulerMaclaurinPlan) -> Vec<f64> {
        let u = 1.0 / self.lambda;
        self.points
            .iter()
            .map(|p| euler_maclaurin::log_normalizer(p.parts(), u, plan))
            .collect()
    }

    /// Plans the series path and caches its normalizers so that
    /// [`KdeModel::eval`] with [`DensityPath::EulerMaclaurin`] costs the same
    /// as the log-gamma path.
    pub fn prepare_euler_maclaurin(&mut self) -> Result<&EulerMaclaurinPlan> {
        if self.series.is_none() {
            let plan = self.plan_euler_maclaurin()?;
            let log_norm = self.series_log_norms(&plan);
            self.series = Some(PreparedSeries { plan, log_norm });
        }
        Ok(&self.series.as_ref().expect("just prepared").plan)
    }

    pub fn prepared_plan(&self) -> Option<&EulerMaclaurinPlan> {
        self.series.as_ref().map(|p| &p.plan)
    }

    pub fn eval_loggamma(&self, x: &Composition) -> Result<f64> {
        self.mix(&self.log_norm, x)
    }

    pub fn eval_euler_maclaurin(&self, plan: &EulerMaclaurinPlan, x: &Composition) -> Result<f64> {
        match &self.series {
            Some(p) if &p.plan == plan => self.mix(&p.log_norm, x),
            _ => self.mix(&self.series_log_norms(plan), x),
        }
    }

    /// Density through the requested path. The series path must have been
    /// prepared with [`KdeModel::prepare_euler_maclaurin`].
    pub fn eval(&self, path: DensityPath, x: &Composition) -> Result<f64> {
        self.mix(self.path_log_norms(path)?, x)
    }

    /// Largest single log kernel at `x`. Since the density is a mean of
    /// kernels, `exp` of this bounds it from above.
    pub fn log_kernel_max(&self, path: DensityPath, x: &Composition) -> Result<f64> {
        let log_norm = self.path_log_norms(path)?;
        let mut max = f64::NEG_INFINITY;
        self.log_terms(log_norm, x, |t| max = max.max(t))?;
        Ok(max)
    }

    fn path_log_norms(&self, path: DensityPath) -> Result<&[f64]> {
        match path {
            DensityPath::LogGamma => Ok(&self.log_norm),
            DensityPath::EulerMaclaurin => match &self.series {
                Some(p) => Ok(&p.log_norm),
                None => Err(Error::InvalidArgument(
                    "Euler-Maclaurin path used before prepare_euler_maclaurin".into(),
                )),
            },
        }
    }

    /// Calls `f` with `log_norm_i + sum_j e_ij ln x_j` for every kernel.
    fn log_terms(&self, log_norm: &[f64], x: &Composition, mut f: impl FnMut(f64)) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let lx: Vec<f64> = x.parts().iter().map(|p| p.ln()).collect();
        let interior = x.parts().iter().all(|&p| p > 0.0);
        for (e, &ln) in self.exponents.chunks_exact(self.dim).zip(log_norm) {
            let t = if interior {
                ln + e.iter().zip(&lx).map(|(a, l)| a * l).sum::<f64>()
            } else {
                // a zero coordinate kills every kernel with a positive exponent there
                let mut t = ln;
                for (a, l) in e.iter().zip(&lx) {
                    if *a != 0.0 {
                        t += a * l;
                    }
                }
                t
            };
            f(t);
        }
        Ok(())
    }

    /// `(1/N) sum_i exp(log_norm_i + sum_j e_ij ln x_j)` by streaming log-sum-exp.
    fn mix(&self, log_norm: &[f64], x: &Composition) -> Result<f64> {
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        self.log_terms(log_norm, x, |t| {
            if t == f64::NEG_INFINITY {
                return;
            }
            if t > max {
                sum = sum * (max - t).exp() + 1.0;
                max = t;
            } else {
                sum += (t - max).exp();
            }
        })?;
        if sum == 0.0 {
            return Ok(0.0);
        }
        Ok((max + sum.ln()).exp() / self.points.len() as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
