//! Compositional value types and the per-cell indices.
//!
//! A [`Composition`] is a point of the standard simplex: the vector of
//! land-cover proportions of one cell. Diversity indices ([`shannon_index`],
//! [`l_index`], [`simpson_index`], [`berger_parker_index`]) and the
//! appropriation [`appropriation`] are pure functions of it.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Relative deviation of the part sum from 1 that construction repairs by
/// rescaling. Larger deviations are rejected.
pub const DEFAULT_SUM_TOL: f64 = 1e-6;

/// Below this deviation the parts are kept bit-for-bit.
pub const EXACT_SUM_TOL: f64 = 1e-12;

/// Parts at or below this value count as absent covers.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

/// A vector of non-negative proportions summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Composition(Vec<f64>);

impl Composition {
    /// Builds a composition, rescaling parts whose sum is within
    /// [`DEFAULT_SUM_TOL`] of one.
    pub fn new(parts: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(parts, DEFAULT_SUM_TOL)
    }

    /// Like [`Composition::new`] with an explicit sum tolerance.
    pub fn with_tolerance(mut parts: Vec<f64>, sum_tol: f64) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidComposition("no parts".into()));
        }
        for (i, &p) in parts.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidComposition(format!("part {i} is not finite")));
            }
            if p < 0.0 {
                return Err(Error::InvalidComposition(format!("part {i} is negative ({p})")));
            }
        }
        let sum: f64 = parts.iter().sum();
        let dev = (sum - 1.0).abs();
        if dev > sum_tol {
            return Err(Error::InvalidComposition(format!(
                "parts sum to {sum}, outside 1 +/- {sum_tol}"
            )));
        }
        if dev > EXACT_SUM_TOL {
            parts.iter_mut().for_each(|p| *p /= sum);
        }
        Ok(Composition(parts))
    }

    /// Rescales arbitrary non-negative weights with a positive total.
    pub fn from_unnormalized(mut parts: Vec<f64>) -> Result<Self> {
        let sum: f64 = parts.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) || parts.iter().any(|p| *p < 0.0) {
            return Err(Error::InvalidComposition(format!(
                "cannot normalize parts with sum {sum}"
            )));
        }
        parts.iter_mut().for_each(|p| *p /= sum);
        Ok(Composition(parts))
    }

    /// The `i`-th vertex of the simplex with `dim` parts.
    pub fn vertex(dim: usize, i: usize) -> Self {
        let mut parts = vec![0.0; dim];
        parts[i] = 1.0;
        Composition(parts)
    }

    pub fn parts(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_parts(self) -> Vec<f64> {
        self.0
    }
}

impl Index<usize> for Composition {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Composition {
    type Error = Error;
    fn try_from(parts: Vec<f64>) -> Result<Self> {
        Composition::new(parts)
    }
}

impl From<Composition> for Vec<f64> {
    fn from(c: Composition) -> Vec<f64> {
        c.0
    }
}

/// Per-cover appropriation percentages, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidWeights("need at least two weights".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidWeights("non-finite weight".into()));
        }
        if weights.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidWeights(format!(
                "weights must be strictly increasing: {weights:?}"
            )));
        }
        Ok(WeightVector(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Smallest weight, the lower end of the range of `A`.
    pub fn first(&self) -> f64 {
        self.0[0]
    }

    /// Largest weight, the upper end of the range of `A`.
    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// Weights of the covers present in `mask`, in index order.
    pub fn restrict(&self, mask: &SubsimplexMask) -> Result<WeightVector> {
        check_len(self.len(), mask.len())?;
        WeightVector::new(mask.present_indices().map(|i| self.0[i]).collect())
    }
}

impl Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(w: Vec<f64>) -> Result<Self> {
        WeightVector::new(w)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Vec<f64> {
        w.0
    }
}

/// Which covers are present in a cell; identifies a face of the simplex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubsimplexMask(Vec<bool>);

impl SubsimplexMask {
    pub fn new(present: Vec<bool>) -> Result<Self> {
        if !present.iter().any(|&b| b) {
            return Err(Error::InvalidArgument("mask has no present cover".into()));
        }
        Ok(SubsimplexMask(present))
    }

    /// The mask of the whole simplex with `dim` parts.
    pub fn full(dim: usize) -> Self {
        SubsimplexMask(vec![true; dim])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn present(&self) -> &[bool] {
        &self.0
    }

    /// Number of present covers (parts of the face).
    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Geometric dimension of the face: 0 for a vertex.
    pub fn face_dim(&self) -> usize {
        self.count() - 1
    }

    pub fn present_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// Reduced coordinates of `c` on this face.
    pub fn restrict(&self, c: &Composition) -> Result<Composition> {
        check_len(self.len(), c.len())?;
        Composition::from_unnormalized(self.present_indices().map(|i| c[i]).collect())
    }

    /// Embeds reduced face coordinates back into the full simplex, with
    /// exact zeros on absent covers.
    pub fn embed(&self, reduced: &Composition) -> Result<Composition> {
        check_len(self.count(), reduced.len())?;
        let mut parts = vec![0.0; self.len()];
        for (k, i) in self.present_indices().enumerate() {
            parts[i] = reduced[k];
        }
        Ok(Composition(parts))
    }
}

impl fmt::Display for SubsimplexMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for SubsimplexMask {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(Error::InvalidArgument(format!("bad mask character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        SubsimplexMask::new(bits)
    }
}

impl Serialize for SubsimplexMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SubsimplexMask {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `p ln p` with the continuous extension `0 ln 0 = 0`.
#[inline]
pub(crate) fn xlnx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// Shannon entropy of the parts in the given logarithm base.
///
/// `base` is the number of cover categories of the study, not the number of
/// covers present in this cell, so the result lies in `[0, 1]` when it
/// equals `c.len()`.
pub fn shannon_index(c: &Composition, base: usize) -> Result<f64> {
    if base < 2 {
        return Err(Error::InvalidArgument(format!("logarithm base {base} < 2")));
    }
    Ok(entropy_ln(c.parts()) / (base as f64).ln())
}

/// Natural-log entropy of raw parts.
pub(crate) fn entropy_ln(parts: &[f64]) -> f64 {
    let h = -parts.iter().map(|&p| xlnx(p)).sum::<f64>();
    h.max(0.0)
}

/// Human appropriation `A = sum w_i p_i`.
pub fn appropriation(c: &Composition, w: &WeightVector) -> Result<f64> {
    check_len(w.len(), c.len())?;
    Ok(c.parts().iter().zip(w.as_slice()).map(|(p, w)| p * w).sum())
}

/// Urban-penalized habitat diversity `L = (1 - p_u) H'`.
///
/// `H'` is the entropy of the non-urban parts renormalized to their own
/// total, in base equal to the number of non-urban categories.
pub fn l_index(c: &Composition, urban_index: usize) -> Result<f64> {
    l_index_parts(c.parts(), urban_index)
}

/// [`l_index`] on raw parts that already sum to one.
pub fn l_index_parts(parts: &[f64], urban_index: usize) -> Result<f64> {
    let n = parts.len();
    if urban_index >= n {
        return Err(Error::InvalidArgument(format!(
            "urban index {urban_index} out of range for {n} covers"
        )));
    }
    let categories = n - 1;
    let p_u = parts[urban_index];
    let rest = 1.0 - p_u;
    if categories < 2 || rest <= 0.0 {
        return Ok(0.0);
    }
    let non_urban: f64 = (0..n).filter(|&i| i != urban_index).map(|i| parts[i]).sum();
    if non_urban <= 0.0 {
        return Ok(0.0);
    }
    let h = -(0..n)
        .filter(|&i| i != urban_index)
        .map(|i| xlnx(parts[i] / non_urban))
        .sum::<f64>();
    let l = rest * h.max(0.0) / (categories as f64).ln();
    Ok(l.clamp(0.0, 1.0))
}

/// Simpson diversity `1 - sum p_i^2`.
pub fn simpson_index(c: &Composition) -> f64 {
    1.0 - c.parts().iter().map(|p| p * p).sum::<f64>()
}

/// Berger-Parker index `1 / max p_i`.
pub fn berger_parker_index(c: &Composition) -> Result<f64> {
    let max = c.parts().iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(Error::InvalidComposition("all parts are zero".into()));
    }
    Ok(1.0 / max)
}

/// One uniform point of the simplex with `dim` parts from normalized
/// unit-exponential spacings.
pub fn uniform_simplex_point<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Composition {
    let mut parts: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let sum: f64 = parts.iter().sum();
    parts.iter_mut().for_each(|p| *p /= sum);
    Composition(parts)
}

/// `count` i.i.d. uniform points of the simplex with `dim` parts.
pub fn sample_uniform_simplex(dim: usize, count: usize, seed: u64) -> Result<Vec<Composition>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut rng = rng::seeded(seed, 0);
    Ok((0..count).map(|_| uniform_simplex_point(&mut rng, dim)).collect())
}

/// The face on which `c` lies: covers with parts above `zero_tol`.
pub fn subsimplex_of(c: &Composition, zero_tol: f64) -> Result<SubsimplexMask> {
    let present: Vec<bool> = c.parts().iter().map(|&p| p > zero_tol).collect();
    if !present.iter().any(|&b| b) {
        return Err(Error::InvalidComposition(format!(
            "every part is at or below the zero tolerance {zero_tol}"
        )));
    }
    Ok(SubsimplexMask(present))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn comp(p: &[f64]) -> Composition {
        Composition::new(p.to_vec()).unwrap()
    }

    #[test]
    fn shannon_examples() {
        assert!((shannon_index(&comp(&[0.25; 4]), 4).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(shannon_index(&comp(&[1.0, 0.0, 0.0, 0.0]), 4).unwrap(), 0.0);
        // -(0.5 log4 0.5 + 2 * 0.25 log4 0.25) = 0.25 + 0.5
        assert!((shannon_index(&comp(&[0.5, 0.25, 0.25]), 4).unwrap() - 0.75).abs() < 1e-15);
        assert!(shannon_index(&comp(&[0.5, 0.5]), 1).is_err());
    }

    #[test]
    fn appropriation_examples() {
        let w = WeightVector::new(vec![10.0, 30.0, 90.0]).unwrap();
        assert_eq!(appropriation(&comp(&[1.0, 0.0, 0.0]), &w).unwrap(), 10.0);
        assert_eq!(appropriation(&comp(&[0.0, 0.0, 1.0]), &w).unwrap(), 90.0);
        let third = 1.0 / 3.0;
        let a = appropriation(&comp(&[third, third, third]), &w).unwrap();
        assert!((a - 130.0 / 3.0).abs() < 1e-12);
        assert!(appropriation(&comp(&[0.5, 0.5]), &w).is_err());
    }

    #[test]
    fn l_index_examples() {
        assert!((l_index(&comp(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]), 3).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(l_index(&comp(&[0.0, 0.0, 0.0, 1.0]), 3).unwrap(), 0.0);
        assert_eq!(l_index(&comp(&[0.0, 0.6, 0.0, 0.4]), 3).unwrap(), 0.0);
        assert_eq!(l_index(&comp(&[0.7, 0.0, 0.0, 0.3]), 3).unwrap(), 0.0);
        assert!(l_index(&comp(&[0.5, 0.5]), 2).is_err());
        // penalty is linear in the urban share
        let l = l_index(&comp(&[0.25, 0.25, 0.25, 0.25]), 3).unwrap();
        assert!((l - 0.75).abs() < 1e-12);
    }

    #[test]
    fn simpson_and_berger_parker() {
        assert_eq!(simpson_index(&comp(&[1.0, 0.0])), 0.0);
        assert_eq!(simpson_index(&comp(&[0.5, 0.5])), 0.5);
        assert_eq!(simpson_index(&comp(&[0.25; 4])), 0.75);
        assert_eq!(berger_parker_index(&comp(&[1.0, 0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(berger_parker_index(&comp(&[0.5, 0.5])).unwrap(), 2.0);
        assert_eq!(berger_parker_index(&comp(&[0.25, 0.25, 0.5])).unwrap(), 2.0);
    }

    #[test]
    fn construction_policy() {
        assert!(Composition::new(vec![0.5, 0.3, 0.2, 0.0]).is_ok());
        let c = Composition::new(vec![0.5, 0.5 + 5e-7]).unwrap();
        assert!((c.parts().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(Composition::new(vec![0.5, 0.51]).is_err());
        assert!(Composition::new(vec![1.1, -0.1]).is_err());
        assert!(Composition::new(vec![]).is_err());
        assert!(Composition::with_tolerance(vec![0.5, 0.499], 1e-2).is_ok());
        // already normalized input keeps its bits
        let raw = vec![0.1, 0.2, 0.7000000000000001];
        assert_eq!(Composition::new(raw.clone()).unwrap().parts(), &raw[..]);
    }

    #[test]
    fn weights_must_increase() {
        assert!(WeightVector::new(vec![1.0, 1.0]).is_err());
        assert!(WeightVector::new(vec![2.0, 1.0]).is_err());
        assert!(WeightVector::new(vec![1.0]).is_err());
        let w = WeightVector::new(vec![10.0, 20.0, 30.0, 90.0]).unwrap();
        let m: SubsimplexMask = "1010".parse().unwrap();
        assert_eq!(w.restrict(&m).unwrap().as_slice(), &[10.0, 30.0]);
    }

    #[test]
    fn subsimplex_examples() {
        let m = subsimplex_of(&comp(&[0.7, 0.3, 0.0, 0.0]), 1e-9).unwrap();
        assert_eq!(m.to_string(), "1100");
        let m = subsimplex_of(&comp(&[1.0, 0.0, 0.0, 0.0]), 1e-9).unwrap();
        assert_eq!(m.to_string(), "1000");
        assert_eq!(m.face_dim(), 0);
        let m = subsimplex_of(&comp(&[0.5, 1e-12, 0.5, 0.0]), 1e-9).unwrap();
        assert_eq!(m.to_string(), "1010");
        assert!(subsimplex_of(&comp(&[0.5, 0.5]), 0.6).is_err());
    }

    #[test]
    fn mask_restrict_embed() {
        let m: SubsimplexMask = "1 0 1 1".parse().unwrap();
        let c = comp(&[0.2, 0.0, 0.3, 0.5]);
        let r = m.restrict(&c).unwrap();
        assert_eq!(r.parts(), &[0.2, 0.3, 0.5]);
        assert_eq!(m.embed(&r).unwrap(), c);
        assert!("0000".parse::<SubsimplexMask>().is_err());
        assert!("10x".parse::<SubsimplexMask>().is_err());
    }

    #[test]
    fn uniform_sampler_basics() {
        let pts = sample_uniform_simplex(1, 5, 3).unwrap();
        assert!(pts.iter().all(|c| c.parts() == [1.0]));
        let a = sample_uniform_simplex(3, 100, 42).unwrap();
        let b = sample_uniform_simplex(3, 100, 42).unwrap();
        assert_eq!(a, b);
        assert!(sample_uniform_simplex(0, 1, 0).is_err());
    }

    #[test]
    fn uniform_sampler_moments_and_marginal() {
        let count = 1_000_000;
        let pts = sample_uniform_simplex(3, count, 7).unwrap();
        for j in 0..3 {
            let mean = pts.iter().map(|c| c[j]).sum::<f64>() / count as f64;
            assert!((mean - 1.0 / 3.0).abs() < 0.002, "coordinate {j} mean {mean}");
        }
        // Kolmogorov-Smirnov distance of p_1 against 1 - (1 - p)^2.
        let mut p1: Vec<f64> = pts.iter().map(|c| c[0]).collect();
        p1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = p1.len() as f64;
        let ks = p1
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let cdf = 1.0 - (1.0 - p).powi(2);
                (cdf - i as f64 / n).abs().max((cdf - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.005, "KS distance {ks}");
    }

    fn arb_composition(max_dim: usize) -> impl Strategy<Value = Composition> {
        prop::collection::vec(0.0f64..1.0, 2..=max_dim).prop_filter_map("positive total", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-6).then(|| Composition::from_unnormalized(v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn shannon_bounds(c in arb_composition(6)) {
            let h = shannon_index(&c, c.len()).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&h));
        }

        #[test]
        fn l_index_bounds(c in arb_composition(6), u in 0usize..6) {
            let u = u % c.len();
            let l = l_index(&c, u).unwrap();
            prop_assert!((0.0..=1.0).contains(&l));
        }

        #[test]
        fn appropriation_monotone(c in arb_composition(5), from in 0usize..5, to in 0usize..5, frac in 0.01f64..1.0) {
            let n = c.len();
            let (i, j) = (from % n, to % n);
            prop_assume!(i < j && c[i] > 1e-6);
            let w = WeightVector::new((0..n).map(|k| 10.0 + 7.0 * k as f64).collect()).unwrap();
            let mut moved = c.parts().to_vec();
            let eps = c[i] * frac;
            moved[i] -= eps;
            moved[j] += eps;
            let moved = Composition::from_unnormalized(moved).unwrap();
            prop_assert!(appropriation(&moved, &w).unwrap() > appropriation(&c, &w).unwrap());
        }

        #[test]
        fn shannon_evenness(c in arb_composition(6), frac in 0.001f64..0.05) {
            let n = c.len();
            let (jmin, &pmin) = c.parts().iter().enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap();
            prop_assume!(c.parts().iter().enumerate().all(|(k, &p)| k == jmin || p > pmin + 1e-6));
            let (jmax, &pmax) = c.parts().iter().enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap();
            // keep the donor the largest part and the receiver the smallest
            let second_min = c.parts().iter().enumerate().filter(|(k, _)| *k != jmin)
                .map(|(_, &p)| p).fold(f64::INFINITY, f64::min);
            let eps = frac * (second_min - pmin).min(pmax - pmin) / 2.0;
            let mut moved = c.parts().to_vec();
            moved[jmax] -= eps;
            moved[jmin] += eps;
            let moved = Composition::from_unnormalized(moved).unwrap();
            prop_assert!(shannon_index(&moved, n).unwrap() > shannon_index(&c, n).unwrap());
        }

        #[test]
        fn sampler_outputs_are_valid(dim in 1usize..7, seed in any::<u64>()) {
            for c in sample_uniform_simplex(dim, 20, seed).unwrap() {
                prop_assert!(c.parts().iter().all(|&p| p >= 0.0));
                prop_assert!((c.parts().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            }
        }

        #[test]
        fn json_roundtrip_is_exact(c in arb_composition(6)) {
            let s = serde_json::to_string(&c).unwrap();
            let back: Composition = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
