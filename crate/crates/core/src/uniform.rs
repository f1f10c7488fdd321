//! Results under the uniform law on the simplex.
//!
//! With `c` covers and sorted weights `w_1 < ... < w_c`, the slice
//! `I_a = {p in simplex : A(p) = a}` is parametrized by the free coordinates
//! `p_1 .. p_{c-2}`; the last two parts follow from the two linear
//! constraints. Conditioned on `A = a`, a uniform point of the simplex is
//! uniform on `I_a` in those coordinates, so `E[H | A = a]` is an average of
//! `H` over the slice.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compositions::{self, xlnx, Composition, WeightVector};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};
use crate::rng;
use crate::special::{digamma, factorial, EULER_MASCHERONI};

/// Density of one coordinate of a uniform point of the simplex with
/// `covers` parts: `(covers - 1) (1 - p)^(covers - 2)`.
pub fn marginal_density_uniform(p: f64, covers: usize) -> Result<f64> {
    if covers < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 covers, got {covers}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfDomain {
            value: p,
            domain: "[0, 1]".into(),
        });
    }
    Ok((covers - 1) as f64 * (1.0 - p).powi(covers as i32 - 2))
}

/// Exact `E[H]` for the uniform law, `H` in base `covers`:
/// `(psi(c) + gamma - 1 + 1/c) / ln c`.
pub fn expected_shannon_uniform(covers: usize) -> Result<f64> {
    if covers < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 covers, got {covers}")));
    }
    let c = covers as f64;
    Ok((digamma(c) + EULER_MASCHERONI - 1.0 + 1.0 / c) / c.ln())
}

/// `E[A]` for the uniform law: the mean weight.
pub fn expected_appropriation_uniform(w: &WeightVector) -> f64 {
    w.mean()
}

/// Density of `A` under the uniform law.
///
/// With `s_i = w_c - w_i` the map `v_1 = sum s_i p_i`, `v_j = s_j p_j`
/// carries the projected simplex onto a polytope where the density is the
/// constant `n! prod 1/s_i` (`n = c - 1`). The density of `v_1 = w_c - a`
/// is that constant times the volume of the section, computed as an
/// iterated integral whose innermost level is exact.
pub fn appropriation_density_uniform(a: f64, w: &WeightVector, cfg: &QuadConfig) -> Result<f64> {
    let ws = w.as_slice();
    let c = ws.len();
    let (lo, hi) = (w.first(), w.last());
    if a < lo || a > hi {
        return Ok(0.0);
    }
    let n = c - 1;
    let s: Vec<f64> = ws[..n].iter().map(|wi| hi - wi).collect();
    let constant = factorial(n) / s.iter().product::<f64>();
    if n == 1 {
        return Ok(constant);
    }
    let v1 = hi - a;
    let section = VSection { s: &s, v1, cfg };
    Ok(constant * section.volume(1, 0.0, 0.0)?)
}

struct VSection<'a> {
    s: &'a [f64],
    v1: f64,
    cfg: &'a QuadConfig,
}

impl VSection<'_> {
    /// Volume over `v_{k+1} .. v_n` (0-based `k >= 1`) given the running
    /// sums of the earlier coordinates.
    fn volume(&self, k: usize, sum: f64, weighted: f64) -> Result<f64> {
        let s = self.s;
        let s1 = s[0];
        let coef = (s1 - s[k]) / (s1 * s[k]);
        let upper = (self.v1 - sum).min((1.0 - self.v1 / s1 - weighted) / coef);
        if upper <= 0.0 {
            return Ok(0.0);
        }
        if k == s.len() - 1 {
            return Ok(upper);
        }
        integrate(
            |v| self.volume(k + 1, sum + v, weighted + v * coef),
            0.0,
            upper,
            self.cfg,
        )
    }
}

/// Range `[lower, upper]` of the next free coordinate of the slice given a
/// feasible prefix. `lower > upper` flags an infeasible prefix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceInterval {
    pub lower: f64,
    pub upper: f64,
}

impl SliceInterval {
    pub fn is_empty(&self) -> bool {
        self.lower > self.upper
    }

    pub fn width(&self) -> f64 {
        (self.upper - self.lower).max(0.0)
    }
}

/// Per-coordinate bounds `m_k <= p_k <= M_k`, `k = 1 .. c-2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SliceBounds {
    /// Bounds of each coordinate of `free` given the coordinates before it.
    pub fn along(a: f64, w: &WeightVector, free: &[f64]) -> Result<SliceBounds> {
        let mut lower = Vec::with_capacity(free.len());
        let mut upper = Vec::with_capacity(free.len());
        for k in 0..free.len() {
            let iv = slice_bounds(a, w, &free[..k])?;
            lower.push(iv.lower);
            upper.push(iv.upper);
        }
        Ok(SliceBounds { lower, upper })
    }

    pub fn contains(&self, free: &[f64], tol: f64) -> bool {
        free.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&p, (&lo, &hi))| p >= lo - tol && p <= hi + tol)
    }

    /// Product of the widths.
    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| (hi - lo).max(0.0))
            .product()
    }
}

fn check_range(a: f64, w: &WeightVector) -> Result<()> {
    if a < w.first() || a > w.last() || !a.is_finite() {
        return Err(Error::OutOfDomain {
            value: a,
            domain: format!("[{}, {}]", w.first(), w.last()),
        });
    }
    Ok(())
}

/// Bounds of the free coordinate following `prefix` on the slice `A = a`:
///
/// `m = max(0, (w_{k+1} - a - sum_{i<k} (w_{k+1} - w_i) p_i) / (w_{k+1} - w_k))`,
/// `M = (w_c - a - sum_{i<k} (w_c - w_i) p_i) / (w_c - w_k)`.
pub fn slice_bounds(a: f64, w: &WeightVector, prefix: &[f64]) -> Result<SliceInterval> {
    check_range(a, w)?;
    let ws = w.as_slice();
    let c = ws.len();
    let k = prefix.len();
    if c < 3 || k > c - 3 {
        return Err(Error::InvalidArgument(format!(
            "coordinate {} is not free for {c} covers",
            k + 1
        )));
    }
    let next = ws[k + 1];
    let top = ws[c - 1];
    let low_num = next - a - prefix.iter().zip(ws).map(|(p, wi)| (next - wi) * p).sum::<f64>();
    let high_num = top - a - prefix.iter().zip(ws).map(|(p, wi)| (top - wi) * p).sum::<f64>();
    Ok(SliceInterval {
        lower: (low_num / (next - ws[k])).max(0.0),
        upper: high_num / (top - ws[k]),
    })
}

/// Bounding box of the slice in the free coordinates, from its vertices
/// (the points where `A = a` crosses an edge of the simplex).
pub fn slice_box(a: f64, w: &WeightVector) -> Result<SliceBounds> {
    check_range(a, w)?;
    let ws = w.as_slice();
    let c = ws.len();
    let free = c.saturating_sub(2);
    let mut lower = vec![f64::INFINITY; free];
    let mut upper = vec![f64::NEG_INFINITY; free];
    let mut any = false;
    for i in 0..c {
        for j in i + 1..c {
            if ws[i] <= a && a <= ws[j] {
                any = true;
                let pi = (ws[j] - a) / (ws[j] - ws[i]);
                let mut vertex = vec![0.0; c];
                vertex[i] = pi;
                vertex[j] = 1.0 - pi;
                for k in 0..free {
                    lower[k] = lower[k].min(vertex[k]);
                    upper[k] = upper[k].max(vertex[k]);
                }
            }
        }
    }
    if !any {
        return Err(Error::EmptySlice(a));
    }
    Ok(SliceBounds { lower, upper })
}

/// Completes free coordinates to a full point of the slice. Returns `None`
/// when the point leaves the simplex by more than `tol`.
fn complete_point(a: f64, ws: &[f64], free: &[f64], tol: f64) -> Option<Vec<f64>> {
    let c = ws.len();
    let top = ws[c - 1];
    let second = ws[c - 2];
    let mut parts = Vec::with_capacity(c);
    parts.extend_from_slice(free);
    let num = top - a - free.iter().zip(ws).map(|(p, wi)| (top - wi) * p).sum::<f64>();
    let p_second = num / (top - second);
    let p_last = 1.0 - free.iter().sum::<f64>() - p_second;
    if p_second < -tol || p_last < -tol {
        return None;
    }
    parts.push(p_second.max(0.0));
    parts.push(p_last.max(0.0));
    Some(parts)
}

/// How `E[index | A = a]` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CondMethod {
    /// Nested adaptive quadrature over the slice.
    Quadrature(QuadConfig),
    /// Average over `samples` uniform points of the slice.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for CondMethod {
    fn default() -> Self {
        CondMethod::Quadrature(QuadConfig::default())
    }
}

/// `E[H | A = a]` under the uniform law, `H` in base `c`.
pub fn conditional_expectation_uniform(a: f64, w: &WeightVector, method: &CondMethod) -> Result<f64> {
    let base = (w.len() as f64).ln();
    conditional_expectation_uniform_with(a, w, method, |p| -p.iter().map(|&x| xlnx(x)).sum::<f64>() / base)
}

/// `E[index(p) | A = a]` under the uniform law for any index of the parts.
pub fn conditional_expectation_uniform_with<F>(a: f64, w: &WeightVector, method: &CondMethod, index: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if !(a > w.first() && a < w.last()) {
        return Err(Error::OutOfDomain {
            value: a,
            domain: format!("({}, {})", w.first(), w.last()),
        });
    }
    let ws = w.as_slice();
    if ws.len() == 2 {
        let p1 = (ws[1] - a) / (ws[1] - ws[0]);
        return Ok(index(&[p1, 1.0 - p1]));
    }
    match method {
        CondMethod::Quadrature(cfg) => {
            let bbox = slice_box(a, w)?;
            let scale = bbox.volume();
            if !(scale > 0.0) {
                return Err(Error::EmptySlice(a));
            }
            let cfg = QuadConfig {
                abs_tol: cfg.abs_tol * scale,
                ..*cfg
            };
            let nested = SliceIntegral { a, w, cfg: &cfg };
            let volume = nested.integrate(&mut Vec::new(), &|_| 1.0)?;
            if !(volume > 0.0) {
                return Err(Error::EmptySlice(a));
            }
            let total = nested.integrate(&mut Vec::new(), &index)?;
            Ok(total / volume)
        }
        CondMethod::MonteCarlo { samples, seed } => {
            let points = sample_uniform_slice(a, w, *samples, *seed)?;
            Ok(points.iter().map(|c| index(c.parts())).sum::<f64>() / points.len() as f64)
        }
    }
}

struct SliceIntegral<'a> {
    a: f64,
    w: &'a WeightVector,
    cfg: &'a QuadConfig,
}

impl SliceIntegral<'_> {
    fn integrate(&self, prefix: &mut Vec<f64>, f: &dyn Fn(&[f64]) -> f64) -> Result<f64> {
        let free = self.w.len() - 2;
        let iv = slice_bounds(self.a, self.w, prefix)?;
        if iv.is_empty() || iv.width() == 0.0 {
            return Ok(0.0);
        }
        let last = prefix.len() + 1 == free;
        integrate(
            |x| {
                let mut p = prefix.clone();
                p.push(x);
                if last {
                    Ok(complete_point(self.a, self.w.as_slice(), &p, f64::INFINITY)
                        .map(|full| f(&full))
                        .unwrap_or(0.0))
                } else {
                    self.integrate(&mut p, f)
                }
            },
            iv.lower,
            iv.upper,
            self.cfg,
        )
    }
}

/// `count` i.i.d. uniform points of the slice `A = a`, by rejection from
/// the slice's bounding box in the free coordinates.
pub fn sample_uniform_slice(a: f64, w: &WeightVector, count: usize, seed: u64) -> Result<Vec<Composition>> {
    let bbox = slice_box(a, w)?;
    let ws = w.as_slice();
    let mut rng = rng::seeded(seed, 0);
    let mut out = Vec::with_capacity(count);
    let mut free = vec![0.0; bbox.lower.len()];
    let mut attempts: u64 = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 1000 && (out.len() as f64) < attempts as f64 * 1e-6 {
            return Err(Error::EmptySlice(a));
        }
        for (k, x) in free.iter_mut().enumerate() {
            let (lo, hi) = (bbox.lower[k], bbox.upper[k]);
            *x = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        }
        if let Some(parts) = complete_point(a, ws, &free, 0.0) {
            out.push(Composition::new(parts)?);
        }
    }
    Ok(out)
}

/// Monte Carlo estimate of `E[A]`, `E[H]` from uniform samples; returned as
/// (mean, standard error) pairs.
pub fn monte_carlo_moments(w: &WeightVector, samples: usize, seed: u64) -> Result<[(f64, f64); 2]> {
    let covers = w.len();
    let points = compositions::sample_uniform_simplex(covers, samples, seed)?;
    let mut acc = [(0.0, 0.0); 2];
    for c in &points {
        let vals = [
            compositions::appropriation(c, w)?,
            compositions::shannon_index(c, covers)?,
        ];
        for (slot, v) in acc.iter_mut().zip(vals) {
            slot.0 += v;
            slot.1 += v * v;
        }
    }
    let n = samples as f64;
    Ok(acc.map(|(s, s2)| {
        let mean = s / n;
        let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
        (mean, (var / n).sqrt())
    }))
}
