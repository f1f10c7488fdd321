//! Synthetic land-cover tables with a prescribed face census.

use landdiv::dirichlet::{self, DirichletParams};
use landdiv::{rng, subsimplex_of, Composition, SubsimplexMask};
use serde::{Deserialize, Serialize};

use crate::dataset::{CellDataset, IngestReport, Provenance};
use crate::error::{CliError, CliResult};
use crate::scenario::COVERS;

/// Face masks in the order of the census columns below.
pub const TABLE2_MASKS: [&str; 15] = [
    "1000", "0100", "1100", "0010", "1010", "0110", "1110", "0001", "1001", "0101", "1101", "0011", "1011", "0111",
    "1111",
];
pub const TABLE2_1956: [usize; 15] = [228, 30, 109, 84, 787, 489, 1311, 1, 3, 8, 8, 39, 59, 105, 99];
pub const TABLE2_1973: [usize; 15] = [224, 27, 98, 78, 766, 454, 1208, 3, 12, 14, 13, 51, 111, 141, 160];
pub const TABLE2_2000: [usize; 15] = [226, 240, 1094, 24, 199, 212, 532, 7, 28, 144, 298, 24, 29, 136, 167];

/// Dirichlet parameter given to every present cover of a census face.
pub const TABLE2_ALPHA: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceSpec {
    pub mask: SubsimplexMask,
    pub count: usize,
    /// One parameter per present cover; ignored for vertices.
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub covers: Vec<String>,
    pub faces: Vec<FaceSpec>,
}

impl SynthSpec {
    pub fn table2(year: &str) -> Option<Self> {
        let counts = match year {
            "1956" => TABLE2_1956,
            "1973" => TABLE2_1973,
            "2000" => TABLE2_2000,
            _ => return None,
        };
        let faces = TABLE2_MASKS
            .iter()
            .zip(counts)
            .map(|(m, count)| {
                let mask: SubsimplexMask = m.parse().expect("valid mask");
                let alpha = vec![TABLE2_ALPHA; mask.count()];
                FaceSpec { mask, count, alpha }
            })
            .collect();
        Some(SynthSpec {
            covers: COVERS.iter().map(|s| s.to_string()).collect(),
            faces,
        })
    }

    pub fn total(&self) -> usize {
        self.faces.iter().map(|f| f.count).sum()
    }

    fn validate(&self) -> CliResult<()> {
        let n = self.covers.len();
        if n < 2 {
            return Err(CliError::Input("need at least two covers".into()));
        }
        for f in &self.faces {
            if f.mask.len() != n {
                return Err(CliError::Input(format!("mask {} does not have {n} covers", f.mask)));
            }
            if f.mask.count() > 1 && f.alpha.len() != f.mask.count() {
                return Err(CliError::Input(format!(
                    "face {} needs {} parameters",
                    f.mask,
                    f.mask.count()
                )));
            }
        }
        Ok(())
    }
}

/// Draws each face's points from its Dirichlet law on the face. Draws that
/// would fall on a smaller face under `zero_tol` are redrawn, so the census
/// of the output equals the spec exactly.
pub fn synth_data(spec: &SynthSpec, seed: u64, zero_tol: f64) -> CliResult<CellDataset> {
    spec.validate()?;
    let n = spec.covers.len();
    let mut rows = Vec::with_capacity(spec.total());
    for (k, face) in spec.faces.iter().enumerate() {
        if face.mask.count() == 1 {
            let vertex = face.mask.present_indices().next().expect("one cover");
            rows.extend((0..face.count).map(|_| Composition::vertex(n, vertex)));
            continue;
        }
        let params = DirichletParams::new(face.alpha.clone()).map_err(|e| CliError::Input(e.to_string()))?;
        let gammas = dirichlet::gamma_laws(&params);
        let mut rng = rng::seeded(rng::derive_seed(seed, k as u64), 0);
        let mut made = 0;
        while made < face.count {
            let reduced = dirichlet::draw(&gammas, &mut rng);
            let full = face.mask.embed(&reduced).map_err(|e| CliError::Input(e.to_string()))?;
            if subsimplex_of(&full, zero_tol).ok().as_ref() == Some(&face.mask) {
                rows.push(full);
                made += 1;
            }
        }
    }
    let width = rows.len().to_string().len();
    let rows: Vec<(String, Composition)> = rows
        .into_iter()
        .enumerate()
        .map(|(i, c)| (format!("cell{:0width$}", i + 1), c))
        .collect();
    Ok(CellDataset {
        covers: spec.covers.clone(),
        provenance: Provenance {
            source: None,
            report: IngestReport {
                accepted: rows.len(),
                ..IngestReport::default()
            },
        },
        rows,
    })
}
