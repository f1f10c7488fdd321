//! Mixture of per-face laws and its acceptance/rejection sampler.
//!
//! Data on the simplex often sit on lower-dimensional faces (absent covers).
//! Each face `d` gets its own law: a Dirichlet-kernel estimate on the face's
//! reduced coordinates when it has enough points, the empirical distribution
//! of its points otherwise, or a point mass for a vertex. Faces are mixed
//! with their sample proportions `count_d / N`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compositions::{
    subsimplex_of, uniform_simplex_point, Composition, SubsimplexMask, WeightVector, DEFAULT_ZERO_TOL,
};
use crate::error::{Error, Result};
use crate::kde::{DensityPath, KdeModel, DEFAULT_ETA};
use crate::rng::{self, SimRng};

pub const DEFAULT_MIN_COUNT: usize = 30;
pub const DEFAULT_SAFETY: f64 = 1.2;
pub const DEFAULT_PROBES: usize = 10_000;
/// Proposals are abandoned when acceptance falls below this rate.
pub const ACCEPTANCE_GUARD: f64 = 1e-6;
pub const MIXTURE_FORMAT_VERSION: u32 = 1;

/// Points per independently seeded stream in [`MixtureModel::sample`].
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureConfig {
    pub min_count: usize,
    pub eta: f64,
    pub safety: f64,
    pub probe_count: usize,
    pub zero_tol: f64,
    pub path: DensityPath,
    /// Seed for the envelope probes.
    pub seed: u64,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        MixtureConfig {
            min_count: DEFAULT_MIN_COUNT,
            eta: DEFAULT_ETA,
            safety: DEFAULT_SAFETY,
            probe_count: DEFAULT_PROBES,
            zero_tol: DEFAULT_ZERO_TOL,
            path: DensityPath::EulerMaclaurin,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FaceLaw {
    /// Density estimate on the reduced face coordinates with envelope `C`.
    Kde { model: KdeModel, envelope: f64 },
    /// Equally probable stored points, in full coordinates.
    Discrete { points: Vec<Composition> },
    /// The vertex with cover `vertex` only.
    PointMass { vertex: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub mask: SubsimplexMask,
    pub count: u64,
    pub law: FaceLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureDocument", into = "MixtureDocument")]
pub struct MixtureModel {
    dim: usize,
    total: u64,
    path: DensityPath,
    components: Vec<Component>,
}

#[derive(Serialize, Deserialize)]
struct MixtureDocument {
    format_version: u32,
    dim: usize,
    total: u64,
    path: DensityPath,
    components: Vec<Component>,
}

impl From<MixtureModel> for MixtureDocument {
    fn from(m: MixtureModel) -> Self {
        MixtureDocument {
            format_version: MIXTURE_FORMAT_VERSION,
            dim: m.dim,
            total: m.total,
            path: m.path,
            components: m.components,
        }
    }
}

impl TryFrom<MixtureDocument> for MixtureModel {
    type Error = Error;

    fn try_from(mut doc: MixtureDocument) -> Result<Self> {
        if doc.format_version != MIXTURE_FORMAT_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported mixture format version {}",
                doc.format_version
            )));
        }
        if doc.components.iter().map(|c| c.count).sum::<u64>() != doc.total {
            return Err(Error::Serialization(
                "component counts do not add up to the total".into(),
            ));
        }
        for c in &mut doc.components {
            if c.mask.len() != doc.dim {
                return Err(Error::DimensionMismatch {
                    expected: doc.dim,
                    got: c.mask.len(),
                });
            }
            if let FaceLaw::Kde { model, .. } = &mut c.law {
                if doc.path == DensityPath::EulerMaclaurin {
                    model.prepare_euler_maclaurin()?;
                }
            }
        }
        Ok(MixtureModel {
            dim: doc.dim,
            total: doc.total,
            path: doc.path,
            components: doc.components,
        })
    }
}

/// `safety` times the largest density over the model's own points and
/// `probe_count` uniform points of the face.
pub fn envelope_constant(
    model: &KdeModel,
    path: DensityPath,
    probe_count: usize,
    safety: f64,
    seed: u64,
) -> Result<f64> {
    let mut max: f64 = 0.0;
    for p in model.points() {
        max = max.max(model.eval(path, p)?);
    }
    let mut rng = rng::seeded(seed, 0);
    for _ in 0..probe_count {
        let x = uniform_simplex_point(&mut rng, model.dim());
        max = max.max(model.eval(path, &x)?);
    }
    Ok(safety * max)
}

/// Acceptance/rejection draws from one face density with uniform proposals.
#[derive(Debug, Clone, Copy)]
pub struct FaceSampler<'a> {
    pub model: &'a KdeModel,
    pub envelope: f64,
    pub path: DensityPath,
    /// Face name used in diagnostics.
    pub label: &'a str,
}

impl FaceSampler<'_> {
    /// Whether the proposal `x` is accepted with uniform variate `u`.
    pub fn accepts(&self, x: &Composition, u: f64) -> Result<bool> {
        let level = u * self.envelope;
        // Most proposals are far below the level; rule them out without any exp.
        if self.model.log_kernel_max(self.path, x)? < level.ln() - 1e-9 {
            return Ok(false);
        }
        let f = self.model.eval(self.path, x)?;
        if f > self.envelope {
            return Err(Error::EnvelopeViolation {
                face: self.label.to_string(),
                value: f,
                envelope: self.envelope,
            });
        }
        Ok(level <= f)
    }

    /// One accepted point in reduced face coordinates.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Composition> {
        let limit = (10.0 / ACCEPTANCE_GUARD) as u64;
        for _ in 0..limit {
            let x = uniform_simplex_point(rng, self.model.dim());
            let u: f64 = rng.random();
            if self.accepts(&x, u)? {
                return Ok(x);
            }
        }
        Err(Error::AcceptanceCollapse {
            face: self.label.to_string(),
            rate: 1.0 / limit as f64,
        })
    }

    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Composition>> {
        let mut out = Vec::with_capacity(count);
        for (chunk, start) in (0..count).step_by(CHUNK).enumerate() {
            let mut rng = rng::seeded(seed, chunk as u64);
            for _ in start..(start + CHUNK).min(count) {
                out.push(self.draw(&mut rng)?);
            }
        }
        Ok(out)
    }
}

/// Groups `dataset` by face and fits one law per face.
pub fn decompose(
    dataset: &[Composition],
    w: &WeightVector,
    lambda_per_face: &BTreeMap<SubsimplexMask, f64>,
    cfg: &MixtureConfig,
) -> Result<MixtureModel> {
    let dim = w.len();
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    let faces = group_by_face(dataset, cfg.zero_tol)?;
    if let Some(c) = dataset.iter().find(|c| c.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: c.len(),
        });
    }
    let mut components = Vec::with_capacity(faces.len());
    for (mask, points) in faces {
        let count = points.len() as u64;
        let law = if mask.face_dim() == 0 {
            FaceLaw::PointMass {
                vertex: mask.present_indices().next().expect("nonempty mask"),
            }
        } else if points.len() < cfg.min_count {
            FaceLaw::Discrete {
                points: points
                    .iter()
                    .map(|p| mask.embed(&mask.restrict(p)?))
                    .collect::<Result<_>>()?,
            }
        } else {
            let lambda = *lambda_per_face
                .get(&mask)
                .ok_or_else(|| Error::MissingBandwidth(mask.to_string()))?;
            let reduced = points.iter().map(|p| mask.restrict(p)).collect::<Result<Vec<_>>>()?;
            let mut model = KdeModel::build(reduced, lambda, cfg.eta)?;
            if cfg.path == DensityPath::EulerMaclaurin {
                model.prepare_euler_maclaurin()?;
            }
            let seed = rng::derive_seed(cfg.seed, mask_label(&mask));
            let envelope = envelope_constant(&model, cfg.path, cfg.probe_count, cfg.safety, seed)?;
            FaceLaw::Kde { model, envelope }
        };
        components.push(Component { mask, count, law });
    }
    Ok(MixtureModel {
        dim,
        total: dataset.len() as u64,
        path: cfg.path,
        components,
    })
}

/// Points of each face, in input order, keyed by mask.
pub fn group_by_face(dataset: &[Composition], zero_tol: f64) -> Result<BTreeMap<SubsimplexMask, Vec<Composition>>> {
    let mut faces: BTreeMap<SubsimplexMask, Vec<Composition>> = BTreeMap::new();
    for c in dataset {
        faces.entry(subsimplex_of(c, zero_tol)?).or_default().push(c.clone());
    }
    Ok(faces)
}

/// Faces that need a bandwidth under `min_count`.
pub fn kde_faces(dataset: &[Composition], min_count: usize, zero_tol: f64) -> Result<Vec<SubsimplexMask>> {
    Ok(group_by_face(dataset, zero_tol)?
        .into_iter()
        .filter(|(m, pts)| m.face_dim() >= 1 && pts.len() >= min_count)
        .map(|(m, _)| m)
        .collect())
}

fn mask_label(mask: &SubsimplexMask) -> u64 {
    mask.present().iter().fold(1u64, |acc, &b| (acc << 1) | b as u64)
}

impl MixtureModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn path(&self) -> DensityPath {
        self.path
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, mask: &SubsimplexMask) -> Option<&Component> {
        self.components.iter().find(|c| &c.mask == mask)
    }

    /// `q_d = count_d / N` for each face.
    pub fn weights(&self) -> Vec<(SubsimplexMask, f64)> {
        self.components
            .iter()
            .map(|c| (c.mask.clone(), c.count as f64 / self.total as f64))
            .collect()
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> &Component {
        let mut k = rng.random_range(0..self.total);
        for c in &self.components {
            if k < c.count {
                return c;
            }
            k -= c.count;
        }
        unreachable!("counts add up to the total")
    }

    fn draw(&self, rng: &mut SimRng) -> Result<Composition> {
        let c = self.pick(rng);
        match &c.law {
            FaceLaw::PointMass { vertex } => Ok(Composition::vertex(self.dim, *vertex)),
            FaceLaw::Discrete { points } => Ok(points[rng.random_range(0..points.len())].clone()),
            FaceLaw::Kde { model, envelope } => {
                let label = c.mask.to_string();
                let sampler = FaceSampler {
                    model,
                    envelope: *envelope,
                    path: self.path,
                    label: &label,
                };
                c.mask.embed(&sampler.draw(rng)?)
            }
        }
    }

    /// `count` draws from the mixture. Chunk `k` of 4096 draws uses stream
    /// `k` of `seed`, so the output depends only on `seed` and `count`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Composition>> {
        let mut out = Vec::with_capacity(count);
        for (chunk, start) in (0..count).step_by(CHUNK).enumerate() {
            let mut rng = rng::seeded(seed, chunk as u64);
            for _ in start..(start + CHUNK).min(count) {
                out.push(self.draw(&mut rng)?);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
