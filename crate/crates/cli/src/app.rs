//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use landdiv::kde::DensityPath;

use crate::dataset::{ingest, DEFAULT_SUM_TOL};
use crate::error::{CliError, CliResult};
use crate::manifest::{sha256_file, InputDigest, Invocation, Manifest, MANIFEST_NAME};
use crate::output::Outputs;
use crate::run_empirical::run_empirical;
use crate::run_uniform::{run_uniform, UniformOptions};
use crate::scenario::{parse_lambda_grid, parse_weights, ScenarioConfig};
use crate::synth::{synth_data, SynthSpec};

#[derive(Debug, Parser)]
#[command(
    name = "landdiv",
    version,
    about = "Landscape diversity against appropriation of primary production"
)]
pub struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curves and densities under the uniform law on the simplex.
    Uniform(UniformArgs),
    /// Full pipeline on a land-cover table.
    Empirical(EmpiricalArgs),
    /// Writes a synthetic land-cover table with a census-shaped face count.
    Synth(SynthArgs),
    /// Validates a land-cover table and prints the ingestion report.
    Check(CheckArgs),
    /// Prints a built-in scenario as JSON, for use with --config.
    Scenario {
        /// 1956, 1973 or 2000.
        name: String,
    },
    /// Repeats a run from its manifest.
    Rerun {
        manifest: PathBuf,
        /// Output directory; defaults to the recorded one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct UniformArgs {
    /// Comma-separated weights, strictly increasing.
    #[arg(long, conflicts_with = "scenario")]
    pub weights: Option<String>,
    /// Built-in scenario supplying the weights.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long, default_value_t = 101)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 50)]
    pub hist_bins: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Zero-based index of the urban cover; adds E[L | A].
    #[arg(long)]
    pub urban_index: Option<usize>,
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EmpiricalArgs {
    /// Land-cover CSV: cell_id, then one proportion column per cover.
    pub input: PathBuf,
    /// Built-in scenario (1956, 1973, 2000).
    #[arg(long, conflicts_with = "config")]
    pub scenario: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Flags overriding scenario fields.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub min_count: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `lo:hi:count` (log-spaced) or a comma-separated list.
    #[arg(long)]
    pub lambda_grid: Option<String>,
    #[arg(long)]
    pub sample_size: Option<usize>,
    #[arg(long)]
    pub population_size: Option<usize>,
    #[arg(long)]
    pub resample_size: Option<usize>,
    #[arg(long)]
    pub uniform_samples: Option<usize>,
    #[arg(long)]
    pub probe_count: Option<usize>,
    #[arg(long)]
    pub safety: Option<f64>,
    /// euler-maclaurin or log-gamma.
    #[arg(long)]
    pub path: Option<String>,
    #[arg(long)]
    pub zero_tol: Option<f64>,
    #[arg(long)]
    pub sum_tol: Option<f64>,
    #[arg(long)]
    pub urban_index: Option<usize>,
    /// Disables the L index.
    #[arg(long, conflicts_with = "urban_index")]
    pub no_urban: bool,
    #[arg(long)]
    pub svg: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) -> CliResult<()> {
        if let Some(w) = &self.weights {
            cfg.weights = parse_weights(w)?;
            if cfg.covers.len() != cfg.weights.len() {
                // names then come from the table header
                cfg.covers.clear();
            }
        }
        if let Some(g) = &self.lambda_grid {
            cfg.lambda_grid = parse_lambda_grid(g)?;
        }
        if let Some(p) = &self.path {
            cfg.path = parse_path(p)?;
        }
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$($field).+ = v; })*
            };
        }
        set!(
            min_count => min_count,
            eta => eta,
            bins => bins,
            seed => seed,
            sample_size => sizes.sample,
            population_size => sizes.population,
            resample_size => sizes.resample,
            uniform_samples => sizes.uniform_samples,
            probe_count => sizes.envelope_probes,
            safety => safety,
            zero_tol => zero_tol,
            sum_tol => sum_tol,
        );
        if let Some(u) = self.urban_index {
            cfg.urban_index = Some(u);
        }
        if self.no_urban {
            cfg.urban_index = None;
        }
        cfg.svg |= self.svg;
        cfg.validate()
    }
}

fn parse_path(s: &str) -> CliResult<DensityPath> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| CliError::Input(format!("unknown density path {s:?}")))
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Census year (1956, 1973, 2000).
    #[arg(long, conflicts_with = "spec")]
    pub year: Option<String>,
    /// JSON face specification.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = landdiv::compositions::DEFAULT_ZERO_TOL)]
    pub zero_tol: f64,
    /// Output CSV.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = landdiv::compositions::DEFAULT_ZERO_TOL)]
    pub zero_tol: f64,
    #[arg(long, default_value_t = DEFAULT_SUM_TOL)]
    pub sum_tol: f64,
    /// Writes the accepted rows here.
    #[arg(long)]
    pub export: Option<PathBuf>,
}

fn builtin(name: &str) -> CliResult<ScenarioConfig> {
    ScenarioConfig::builtin(name).ok_or_else(|| CliError::Input(format!("unknown scenario {name:?}")))
}

/// Executes an invocation and writes its manifest into the output directory.
pub fn execute(invocation: Invocation, out_dir: &Path) -> CliResult<Manifest> {
    let mut manifest = Manifest::new(invocation.clone(), out_dir);
    let mut out = Outputs::create(out_dir)?;
    match &invocation {
        Invocation::Uniform { weights, options } => {
            let w = landdiv::WeightVector::new(weights.clone()).map_err(|e| CliError::Input(e.to_string()))?;
            manifest.seeds.insert("uniform".into(), options.seed);
            manifest
                .seeds
                .insert("monte-carlo".into(), options.seed.wrapping_add(1));
            run_uniform(&w, options, &mut out)?;
        }
        Invocation::Empirical { input, scenario } => {
            let dataset = ingest(input, scenario.zero_tol, scenario.sum_tol)?;
            manifest.inputs.push(InputDigest {
                path: input.clone(),
                sha256: sha256_file(input)?,
            });
            out.json("ingest_report.json", &dataset.provenance)?;
            let summary = run_empirical(&dataset, scenario, &mut out)?;
            manifest.seeds = summary.seeds;
        }
    }
    manifest.outputs.extend(out.files().iter().cloned());
    out.json(MANIFEST_NAME, &manifest)?;
    Ok(manifest)
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Uniform(a) => {
            let weights = match (&a.weights, &a.scenario) {
                (Some(w), _) => parse_weights(w)?,
                (None, Some(s)) => builtin(s)?.weights,
                (None, None) => return Err(CliError::Input("pass --weights or --scenario".into())),
            };
            let options = UniformOptions {
                grid_points: a.grid_points,
                samples: a.samples,
                seed: a.seed,
                hist_bins: a.hist_bins,
                urban_index: a.urban_index,
                svg: a.svg,
            };
            execute(Invocation::Uniform { weights, options }, &a.out)?;
        }
        Command::Empirical(a) => {
            let mut scenario = match (&a.scenario, &a.config) {
                (_, Some(path)) => ScenarioConfig::load(path)?,
                (Some(name), None) => builtin(name)?,
                (None, None) => ScenarioConfig::default(),
            };
            a.overrides.apply(&mut scenario)?;
            let input = std::fs::canonicalize(&a.input).map_err(crate::error::io_err(&a.input))?;
            execute(Invocation::Empirical { input, scenario }, &a.out)?;
        }
        Command::Synth(a) => {
            let spec = match (&a.year, &a.spec) {
                (_, Some(path)) => {
                    let text = std::fs::read_to_string(path).map_err(crate::error::io_err(path))?;
                    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
                }
                (Some(y), None) => {
                    SynthSpec::table2(y).ok_or_else(|| CliError::Input(format!("unknown year {y:?}")))?
                }
                (None, None) => return Err(CliError::Input("pass --year or --spec".into())),
            };
            let data = synth_data(&spec, a.seed, a.zero_tol)?;
            data.export(&a.output)?;
            println!("wrote {} cells to {}", data.len(), a.output.display());
        }
        Command::Check(a) => {
            let d = ingest(&a.input, a.zero_tol, a.sum_tol)?;
            let r = &d.provenance.report;
            println!(
                "{}: {} covers, {} accepted, {} renormalized, {} rejected",
                a.input.display(),
                d.covers.len(),
                r.accepted,
                r.renormalized.len(),
                r.rejected.len()
            );
            for rej in &r.rejected {
                println!("  row {} ({}): {}", rej.row, rej.cell_id, rej.reason);
            }
            if let Some(path) = &a.export {
                d.export(path)?;
            }
        }
        Command::Scenario { name } => {
            let cfg = builtin(&name)?;
            println!("{}", serde_json::to_string_pretty(&cfg).expect("serializable"));
        }
        Command::Rerun { manifest, out } => {
            let m = Manifest::load(&manifest)?;
            m.verify_inputs()?;
            let dir = out.unwrap_or_else(|| m.out_dir.clone());
            execute(m.invocation, &dir)?;
        }
    }
    Ok(())
}
