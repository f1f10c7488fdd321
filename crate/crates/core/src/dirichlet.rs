//! Dirichlet law: density, sampling, maximum-likelihood fit.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::compositions::Composition;
use crate::error::{Error, Result};
use crate::rng;
use crate::special::{digamma, inv_digamma, ln_gamma};

/// Floor applied to zero coordinates before fitting.
pub const MLE_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletParams {
    alpha: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::InvalidArgument("Dirichlet needs at least 2 parameters".into()));
        }
        if let Some(a) = alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "Dirichlet parameter {a} is not positive"
            )));
        }
        Ok(DirichletParams { alpha })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// `ln B(alpha) = sum ln Gamma(alpha_j) - ln Gamma(sum alpha_j)`.
    pub fn ln_beta(&self) -> f64 {
        self.alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>() - ln_gamma(self.total())
    }

    pub fn mean(&self) -> Vec<f64> {
        let t = self.total();
        self.alpha.iter().map(|a| a / t).collect()
    }
}

/// Log density with respect to Lebesgue measure on the projected simplex.
pub fn log_density(params: &DirichletParams, x: &Composition) -> Result<f64> {
    if x.len() != params.len() {
        return Err(Error::DimensionMismatch {
            expected: params.len(),
            got: x.len(),
        });
    }
    let mut acc = -params.ln_beta();
    for (&a, &xj) in params.alpha.iter().zip(x.parts()) {
        if a == 1.0 {
            continue;
        }
        if xj == 0.0 {
            if a < 1.0 {
                return Err(Error::OutOfDomain {
                    value: xj,
                    domain: "interior of the simplex (some alpha < 1)".into(),
                });
            }
            return Ok(f64::NEG_INFINITY);
        }
        acc += (a - 1.0) * xj.ln();
    }
    Ok(acc)
}

/// One Dirichlet variate as normalized unit-scale gamma variates.
pub fn draw<R: Rng + ?Sized>(gammas: &[Gamma<f64>], rng: &mut R) -> Composition {
    loop {
        let g: Vec<f64> = gammas.iter().map(|d| d.sample(rng)).collect();
        let total: f64 = g.iter().sum();
        if total > 0.0 && total.is_finite() {
            if let Ok(c) = Composition::from_unnormalized(g) {
                return c;
            }
        }
    }
}

pub fn gamma_laws(params: &DirichletParams) -> Vec<Gamma<f64>> {
    params
        .alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("validated shape"))
        .collect()
}

/// `count` i.i.d. Dirichlet variates.
pub fn sample(params: &DirichletParams, count: usize, seed: u64) -> Vec<Composition> {
    let gammas = gamma_laws(params);
    let mut rng = rng::seeded(seed, 0);
    (0..count).map(|_| draw(&gammas, &mut rng)).collect()
}

/// Result of [`mle_fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletFit {
    pub params: DirichletParams,
    /// Total log-likelihood of the (clamped) sample at the estimate.
    pub log_likelihood: f64,
    pub iterations: usize,
}

/// Maximum-likelihood fit by the fixed point
/// `psi(alpha_j) = psi(sum alpha) + mean ln x_j`, started from the method
/// of moments. Zero coordinates are clamped to [`MLE_CLAMP`].
pub fn mle_fit(sample: &[Composition], tol: f64, max_iter: usize) -> Result<DirichletFit> {
    let first = sample
        .first()
        .ok_or_else(|| Error::DegenerateSample("empty sample".into()))?;
    let dim = first.len();
    if sample.iter().any(|c| c.len() != dim) {
        return Err(Error::InvalidArgument("sample points differ in length".into()));
    }
    if sample.iter().all(|c| c == first) {
        return Err(Error::DegenerateSample("all points are identical".into()));
    }
    if sample.len() < 3 {
        return Err(Error::DegenerateSample(format!(
            "need at least 3 points, got {}",
            sample.len()
        )));
    }
    if dim < 2 {
        return Err(Error::InvalidArgument("need at least 2 parts".into()));
    }
    let clamped: Vec<Vec<f64>> = sample
        .iter()
        .map(|c| {
            let v: Vec<f64> = c.parts().iter().map(|&p| p.max(MLE_CLAMP)).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|p| p / s).collect()
        })
        .collect();
    for j in 0..dim {
        if clamped.iter().all(|p| p[j] <= 2.0 * MLE_CLAMP) {
            return Err(Error::DegenerateSample(format!("coordinate {j} is identically zero")));
        }
    }

    let n = clamped.len() as f64;
    let mean_log: Vec<f64> = (0..dim)
        .map(|j| clamped.iter().map(|p| p[j].ln()).sum::<f64>() / n)
        .collect();
    let mean: Vec<f64> = (0..dim)
        .map(|j| clamped.iter().map(|p| p[j]).sum::<f64>() / n)
        .collect();
    let precisions: Vec<f64> = (0..dim)
        .filter_map(|j| {
            let var = clamped.iter().map(|p| (p[j] - mean[j]).powi(2)).sum::<f64>() / (n - 1.0);
            let s = mean[j] * (1.0 - mean[j]) / var - 1.0;
            (var > 0.0 && s.is_finite() && s > 0.0).then_some(s)
        })
        .collect();
    let precision = if precisions.is_empty() {
        1.0
    } else {
        precisions.iter().sum::<f64>() / precisions.len() as f64
    };
    let mut alpha: Vec<f64> = mean.iter().map(|m| (m * precision).max(1e-3)).collect();

    let residual = |alpha: &[f64]| {
        let psi_total = digamma(alpha.iter().sum());
        alpha
            .iter()
            .zip(&mean_log)
            .map(|(&a, &l)| (digamma(a) - psi_total - l).abs())
            .fold(0.0, f64::max)
    };

    let mut res = residual(&alpha);
    let mut iterations = 0;
    while res > tol {
        if iterations >= max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: res,
            });
        }
        let psi_total = digamma(alpha.iter().sum());
        for (a, &l) in alpha.iter_mut().zip(&mean_log) {
            *a = inv_digamma(psi_total + l);
        }
        if alpha.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return Err(Error::DegenerateSample("fixed point left the parameter domain".into()));
        }
        iterations += 1;
        res = residual(&alpha);
    }

    let params = DirichletParams::new(alpha)?;
    let log_likelihood = n
        * (-params.ln_beta()
            + params
                .alpha
                .iter()
                .zip(&mean_log)
                .map(|(a, l)| (a - 1.0) * l)
                .sum::<f64>());
    Ok(DirichletFit {
        params,
        log_likelihood,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compositions::sample_uniform_simplex;

    fn params(a: &[f64]) -> DirichletParams {
        DirichletParams::new(a.to_vec()).unwrap()
    }

    fn comp(p: &[f64]) -> Composition {
        Composition::new(p.to_vec()).unwrap()
    }

    #[test]
    fn density_examples() {
        let x = comp(&[0.2, 0.3, 0.5]);
        assert!((log_density(&params(&[1.0, 1.0, 1.0]), &x).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!(log_density(&params(&[1.0, 1.0]), &comp(&[0.3, 0.7])).unwrap().abs() < 1e-12);
        assert!(log_density(&params(&[1.0, 1.0]), &comp(&[0.0, 1.0])).unwrap().abs() < 1e-12);
        let v = log_density(&params(&[2.0, 1.0, 1.0]), &comp(&[0.5, 0.25, 0.25])).unwrap();
        assert!((v - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn density_errors() {
        assert!(DirichletParams::new(vec![1.0, 0.0]).is_err());
        assert!(DirichletParams::new(vec![1.0]).is_err());
        let p = params(&[0.5, 2.0]);
        assert!(log_density(&p, &comp(&[0.0, 1.0])).is_err());
        assert_eq!(
            log_density(&params(&[2.0, 2.0]), &comp(&[0.0, 1.0])).unwrap(),
            f64::NEG_INFINITY
        );
        assert!(log_density(&p, &comp(&[0.2, 0.3, 0.5])).is_err());
    }

    #[test]
    fn density_normalizes() {
        // E_uniform[f] = integral of f / volume, and the uniform density on
        // the projected simplex with 3 parts is 2.
        let probes = sample_uniform_simplex(3, 1_000_000, 17).unwrap();
        for a in [[1.0, 1.0, 1.0], [2.0, 3.0, 4.0], [1.5, 1.0, 2.5]] {
            let p = params(&a);
            let mean: f64 = probes.iter().map(|x| log_density(&p, x).unwrap().exp()).sum::<f64>() / probes.len() as f64;
            assert!((mean / 2.0 - 1.0).abs() < 0.02, "{a:?}: {}", mean / 2.0);
        }
    }

    #[test]
    fn sample_means() {
        let xs = sample(&params(&[5.0, 5.0]), 100_000, 1);
        let m = xs.iter().map(|c| c[0]).sum::<f64>() / xs.len() as f64;
        assert!((m - 0.5).abs() < 0.005);
        let xs = sample(&params(&[2.0, 1.0, 1.0]), 100_000, 2);
        let m = xs.iter().map(|c| c[0]).sum::<f64>() / xs.len() as f64;
        assert!((m - 0.5).abs() < 0.005);
        assert_eq!(sample(&params(&[2.0, 1.0]), 10, 3), sample(&params(&[2.0, 1.0]), 10, 3));
    }

    fn ecdf_distance(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    #[test]
    fn flat_dirichlet_is_uniform() {
        let d = sample(&params(&[1.0, 1.0, 1.0]), 100_000, 5);
        let u = sample_uniform_simplex(3, 100_000, 6).unwrap();
        for j in 0..3 {
            let dist = ecdf_distance(d.iter().map(|c| c[j]).collect(), u.iter().map(|c| c[j]).collect());
            assert!(dist < 0.01, "coordinate {j}: {dist}");
        }
    }

    #[test]
    fn marginal_matches_beta() {
        let alpha = [2.0, 3.0, 4.0];
        let xs = sample(&params(&alpha), 100_000, 8);
        let bins = 50;
        let mut counts = vec![0usize; bins];
        for c in &xs {
            counts[((c[0] * bins as f64) as usize).min(bins - 1)] += 1;
        }
        let (a, b) = (alpha[0], alpha[1] + alpha[2]);
        for (k, &count) in counts.iter().enumerate() {
            let lo = k as f64 / bins as f64;
            let hi = (k + 1) as f64 / bins as f64;
            let want = statrs::function::beta::beta_reg(a, b, hi) - statrs::function::beta::beta_reg(a, b, lo);
            let got = count as f64 / xs.len() as f64;
            assert!((got - want).abs() < 0.01, "bin {k}: {got} vs {want}");
        }
    }

    #[test]
    fn mle_recovers_parameters() {
        for (alpha, seed) in [([1.0, 1.0, 1.0], 10), ([3.0, 1.0, 0.5], 11), ([2.0, 3.0, 4.0], 12)] {
            let xs = sample(&params(&alpha), 100_000, seed);
            let fit = mle_fit(&xs, 1e-10, 10_000).unwrap();
            for (got, want) in fit.params.alpha().iter().zip(alpha) {
                assert!((got - want).abs() <= 0.05 * want, "{alpha:?}: {:?}", fit.params.alpha());
            }
            assert!(fit.log_likelihood.is_finite());
        }
    }

    #[test]
    fn mle_satisfies_first_order_conditions() {
        let xs = sample(&params(&[0.7, 2.0, 6.0, 1.2]), 5_000, 13);
        let tol = 1e-9;
        let fit = mle_fit(&xs, tol, 10_000).unwrap();
        let a = fit.params.alpha();
        let psi_total = digamma(a.iter().sum());
        for j in 0..4 {
            let mean_log = xs.iter().map(|c| c[j].max(MLE_CLAMP).ln()).sum::<f64>() / xs.len() as f64;
            assert!((digamma(a[j]) - psi_total - mean_log).abs() <= 1e-8);
        }
    }

    #[test]
    fn mle_degenerate_inputs() {
        let p = comp(&[0.2, 0.3, 0.5]);
        assert!(matches!(
            mle_fit(&[p.clone(), p.clone()], 1e-8, 100),
            Err(Error::DegenerateSample(_))
        ));
        let q = comp(&[0.3, 0.2, 0.5]);
        assert!(matches!(
            mle_fit(&[p.clone(), q.clone()], 1e-8, 100),
            Err(Error::DegenerateSample(_))
        ));
        let r = comp(&[0.5, 0.5, 0.0]);
        let s = comp(&[0.4, 0.6, 0.0]);
        let t = comp(&[0.7, 0.3, 0.0]);
        assert!(matches!(
            mle_fit(&[r, s, t], 1e-8, 100),
            Err(Error::DegenerateSample(_))
        ));
        let xs = sample(&params(&[2.0, 3.0]), 1000, 1);
        assert!(matches!(mle_fit(&xs, 1e-14, 1), Err(Error::NoConvergence { .. })));
    }
}
