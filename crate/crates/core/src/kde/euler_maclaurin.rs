//! Euler-Maclaurin evaluation of the Dirichlet-kernel normalizer.
//!
//! With `u = 1/lambda` and `c = 1/n - z`, Weierstrass' product gives
//! `Gamma(1+u)^(1/n) / Gamma(1+z u) = exp(-gamma c u + sum_{k>=1} g(k))` where
//! `g(x) = c u / x + ln(1 + z u / x) - ln(1 + u / x) / n`.
//! The series is truncated at `m` and corrected with `s` Bernoulli terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{bernoulli_numbers, factorial, EULER_MASCHERONI};

pub const MAX_ORDER: usize = 3;
pub const MAX_START: usize = 100;

/// Ratio of the geometric grid used to inspect derivative signs.
const GRID_RATIO: f64 = 1.05;

/// Truncation point `m`, correction order `s` and the certificate that
/// goes with them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerMaclaurinPlan {
    pub m: usize,
    pub s: usize,
    /// `B_0 ..= B_{2s+2}`.
    pub bernoulli: Vec<f64>,
    /// Per-term target `ln(1 + eta) / n`.
    pub epsilon: f64,
    /// Largest remainder bound over all kernel coordinates.
    pub max_remainder: f64,
    /// True when the sign condition `g^(2s+2) g^(2s+4) > 0` held on the
    /// inspection grid for every coordinate, so the one-term bound applies.
    /// Otherwise the integral form of the remainder bound was used.
    pub sign_condition: bool,
}

/// The summand `g` for one kernel coordinate.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Summand {
    cu: f64,
    zu: f64,
    u: f64,
    inv_n: f64,
}

/// Remainder bound at a given `(m, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RemainderBound {
    pub value: f64,
    pub sharp: bool,
}

impl Summand {
    pub fn new(z: f64, u: f64, n: usize) -> Self {
        let inv_n = 1.0 / n as f64;
        Summand {
            cu: (inv_n - z) * u,
            zu: z * u,
            u,
            inv_n,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.cu / x + (self.zu / x).ln_1p() - self.inv_n * (self.u / x).ln_1p()
    }

    /// `g^(r)(x)` for `r >= 1`, differentiating the pole and the three
    /// logarithms `ln(x + zu) - ln(x + u)/n - (1 - 1/n) ln x` separately.
    pub fn derivative(&self, r: usize, x: f64) -> f64 {
        debug_assert!(r >= 1);
        let ri = r as i32;
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        let lower = factorial(r - 1);
        let pole = sign * self.cu * lower * r as f64 * x.powi(-ri - 1);
        let logs = (x + self.zu).powi(-ri) - self.inv_n * (x + self.u).powi(-ri) - (1.0 - self.inv_n) * x.powi(-ri);
        pole - sign * lower * logs
    }

    /// `int_m^inf g`. The logarithmic divergences of the three terms cancel.
    pub fn tail(&self, m: f64) -> f64 {
        -self.cu - (m + self.zu) * (self.zu / m).ln_1p() + self.inv_n * (m + self.u) * (self.u / m).ln_1p()
    }

    /// Truncated and corrected `sum_{k>=1} g(k)`.
    pub fn series(&self, m: usize, s: usize, bernoulli: &[f64]) -> f64 {
        let head: f64 = (1..m).map(|k| self.value(k as f64)).sum();
        let mf = m as f64;
        let corrections: f64 = (1..=s)
            .map(|r| bernoulli[2 * r] / factorial(2 * r) * self.derivative(2 * r - 1, mf))
            .sum();
        head + self.tail(mf) + 0.5 * self.value(mf) - corrections
    }

    /// `sum_{k>=1} g(k)` from log-gamma values.
    #[cfg(test)]
    pub fn exact_series(&self) -> f64 {
        self.inv_n * crate::special::ln_gamma(1.0 + self.u) - crate::special::ln_gamma(1.0 + self.zu)
            + EULER_MASCHERONI * self.cu
    }

    /// Lower limit of either bound form; cheap rejection before the grid scan.
    fn bound_floor(&self, m: usize, s: usize, bernoulli: &[f64]) -> f64 {
        let p = 2 * s + 2;
        bernoulli[p].abs() / factorial(p) * self.derivative(p - 1, m as f64).abs()
    }

    /// Bound on the Euler-Maclaurin remainder after `s` corrections from `m`.
    ///
    /// If `g^(2s+2) g^(2s+4) > 0` on the inspection grid the one-term bound
    /// `|B_{2s+2}|/(2s+2)! |g^(2s+1)(m)|` is returned. Otherwise the bound is
    /// `2 |B_{2s+2}|/(2s+2)! int_m^inf |g^(2s+2)|`, the integral taken piecewise
    /// between the sign changes of `g^(2s+2)` located on the grid.
    pub fn remainder_bound(&self, m: usize, s: usize, bernoulli: &[f64]) -> RemainderBound {
        let p = 2 * s + 2;
        let coeff = bernoulli[p].abs() / factorial(p);
        let x0 = m as f64;
        let at_start = self.derivative(p - 1, x0).abs();
        // both forms are at least this large
        let floor = coeff * at_start;
        if !floor.is_finite() {
            return RemainderBound {
                value: f64::INFINITY,
                sharp: false,
            };
        }

        let x_max = 1e4 * (self.u + 1.0) + x0;
        let mut grid = vec![x0];
        let mut x = x0;
        while x < x_max {
            x *= GRID_RATIO;
            grid.push(x);
        }
        let sharp = grid
            .iter()
            .all(|&x| self.derivative(p, x) * self.derivative(p + 2, x) > 0.0);
        if sharp {
            return RemainderBound { value: floor, sharp };
        }

        let mut integral = 0.0;
        let mut left = x0;
        let mut left_sign = self.derivative(p, x0).signum();
        for pair in grid.windows(2) {
            let sign = self.derivative(p, pair[1]).signum();
            if sign != left_sign && sign != 0.0 {
                let root = self.bisect_root(p, pair[0], pair[1]);
                integral += (self.derivative(p - 1, root) - self.derivative(p - 1, left)).abs();
                left = root;
                left_sign = sign;
            }
        }
        integral += self.derivative(p - 1, left).abs();
        RemainderBound {
            value: 2.0 * coeff * integral.max(at_start),
            sharp,
        }
    }

    fn bisect_root(&self, r: usize, mut a: f64, mut b: f64) -> f64 {
        let sa = self.derivative(r, a).signum();
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.derivative(r, mid).signum() == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }
}

/// `ln C = sum_{j=1}^{n-1} ln(n - j + u)`.
pub(crate) fn ln_prefactor(u: f64, n: usize) -> f64 {
    (1..n).map(|j| ((n - j) as f64 + u).ln()).sum()
}

/// Log normalizer of one kernel, `ln Gamma(n+u) - sum_j ln Gamma(1 + z_j u)`,
/// through the truncated series.
pub(crate) fn log_normalizer(z: &[f64], u: f64, plan: &EulerMaclaurinPlan) -> f64 {
    let n = z.len();
    let mut acc = ln_prefactor(u, n);
    for &zj in z {
        let g = Summand::new(zj, u, n);
        acc += -EULER_MASCHERONI * g.cu + g.series(plan.m, plan.s, &plan.bernoulli);
    }
    acc
}

/// Smallest plan whose remainder bound is within `epsilon` for every value
/// in `zs`, ordered by `m + s` with ties going to the smaller `s`.
pub(crate) fn find_plan(zs: &[f64], u: f64, n: usize, eta: f64) -> Result<EulerMaclaurinPlan> {
    let epsilon = (1.0 + eta).ln() / n as f64;
    let bernoulli = bernoulli_numbers(2 * MAX_ORDER + 4);
    let mut best: Option<(usize, usize)> = None;
    for s in 1..=MAX_ORDER {
        // the bound decreases in m, so the running m only ever grows
        let mut m = 1;
        let mut feasible = true;
        'values: for &z in zs {
            let g = Summand::new(z, u, n);
            while g.bound_floor(m, s, &bernoulli) > epsilon || g.remainder_bound(m, s, &bernoulli).value > epsilon {
                m += 1;
                if m > MAX_START {
                    feasible = false;
                    break 'values;
                }
            }
        }
        if feasible && best.is_none_or(|(bm, bs)| m + s < bm + bs) {
            best = Some((m, s));
        }
    }
    let (m, s) = best.ok_or(Error::NoFeasiblePlan {
        max_s: MAX_ORDER,
        max_m: MAX_START,
        epsilon,
    })?;

    let mut max_remainder: f64 = 0.0;
    let mut sign_condition = true;
    for &z in zs {
        let b = Summand::new(z, u, n).remainder_bound(m, s, &bernoulli);
        max_remainder = max_remainder.max(b.value);
        sign_condition &= b.sharp;
    }
    Ok(EulerMaclaurinPlan {
        m,
        s,
        bernoulli: bernoulli[..=2 * s + 2].to_vec(),
        epsilon,
        max_remainder,
        sign_condition,
    })
}
