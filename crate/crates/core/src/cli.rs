//! Command-line front end: `test`, `decompose`, `generate` and `oracle`.
//!
//! A run is described by a [`RunConfig`], read from `--config` (JSON) when
//! given and then overridden field by field by command-line flags.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::adc::{adc_decompose, rank_contributions, ContributionRanking};
use crate::data::{load_csv, save_csv, validate, PairedDataset};
use crate::dcov::{centered_pair, CenteredPair};
use crate::error::{Error, Result};
use crate::inference::{permutation_test, PermutationResult, DEFAULT_PERMUTATIONS};
use crate::metrics::{load_precomputed, pairwise_matrix, MetricKind, MetricSpec, PairwiseMatrix};
use crate::numeric::fmt_sig6;
use crate::population::{oracle_report, support_matrix, FiniteJointDistribution, OracleReport};
use crate::synthetic::{generate, GeneratorSpec};
use crate::viz::{write_visualizations, Artifact, VizConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const DEFAULT_FEATURES: usize = 6;
const DEFAULT_TOP_K: usize = 10;

fn ser_display<T: Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn de_fromstr<'de, T, D>(d: D) -> std::result::Result<T, D::Error>
where
    T: FromStr,
    T::Err: Display,
    D: Deserializer<'de>,
{
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

fn ser_opt_display<T: Display, S: Serializer>(v: &Option<T>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

fn de_opt_fromstr<'de, T, D>(d: D) -> std::result::Result<Option<T>, D::Error>
where
    T: FromStr,
    T::Err: Display,
    D: Deserializer<'de>,
{
    Option::<String>::deserialize(d)?
        .map(|s| s.parse().map_err(serde::de::Error::custom))
        .transpose()
}

/// Everything needed to reproduce a `test` or `decompose` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    #[serde(serialize_with = "ser_opt_display", deserialize_with = "de_opt_fromstr")]
    pub generator: Option<GeneratorSpec>,
    /// Precomputed `n x n` matrices, an alternative to `input`/`generator`.
    pub x_matrix: Option<PathBuf>,
    pub y_matrix: Option<PathBuf>,
    pub x_cols: Vec<String>,
    pub y_cols: Vec<String>,
    #[serde(serialize_with = "ser_display", deserialize_with = "de_fromstr")]
    pub x_metric: MetricSpec,
    #[serde(serialize_with = "ser_display", deserialize_with = "de_fromstr")]
    pub y_metric: MetricSpec,
    pub permutations: usize,
    pub seed: u64,
    /// `(I, J)`; defaults to `min(6, n)` each.
    pub features: Option<[usize; 2]>,
    pub all_pairs: bool,
    pub viz: VizConfig,
    pub top_k: usize,
    pub threads: Option<usize>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            generator: None,
            x_matrix: None,
            y_matrix: None,
            x_cols: Vec::new(),
            y_cols: Vec::new(),
            x_metric: MetricSpec::euclidean(),
            y_metric: MetricSpec::euclidean(),
            permutations: DEFAULT_PERMUTATIONS,
            seed: 0,
            features: None,
            all_pairs: false,
            viz: VizConfig::default(),
            top_k: DEFAULT_TOP_K,
            threads: None,
            out: PathBuf::from("adcov-out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn check(&self) -> Result<()> {
        let sources = [self.input.is_some(), self.generator.is_some(), self.x_matrix.is_some() || self.y_matrix.is_some()];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(Error::Config(
                "give exactly one data source: --input, --generator, or --x-matrix with --y-matrix".into(),
            ));
        }
        if self.input.is_some() && (self.x_cols.is_empty() || self.y_cols.is_empty()) {
            return Err(Error::Config("--input needs --x-cols and --y-cols".into()));
        }
        if sources[2] && (self.x_matrix.is_none() || self.y_matrix.is_none()) {
            return Err(Error::Config("--x-matrix and --y-matrix must be given together".into()));
        }
        if self.permutations == 0 {
            return Err(Error::Config("--permutations must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        Ok(())
    }

    fn viz_for(&self, n: usize) -> VizConfig {
        let (fx, fy) = if self.all_pairs {
            (n, n)
        } else {
            let [fx, fy] = self.features.unwrap_or([DEFAULT_FEATURES.min(n), DEFAULT_FEATURES.min(n)]);
            (fx, fy)
        };
        VizConfig { features_x: fx, features_y: fy, ..self.viz.clone() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "adcov", version, about = "Distance covariance / HSIC with additive feature decomposition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Permutation test of independence; writes report.json.
    Test(RunArgs),
    /// Test plus decomposition, rankings and figures.
    Decompose(RunArgs),
    /// Draw a synthetic dataset to CSV.
    Generate(GenerateArgs),
    /// Check population identities on a finite-support joint distribution.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV file with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Synthetic source, e.g. `w_shape:n=500,seed=1,noise=0.1`.
    #[arg(long)]
    pub generator: Option<GeneratorSpec>,
    /// Comma-separated X column names.
    #[arg(long, value_delimiter = ',')]
    pub x_cols: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub y_cols: Option<Vec<String>>,
    /// `euclidean`, `polynomial:alpha=..,beta=..`, `double-exponential:theta=..`,
    /// `precomputed-distance` or `precomputed-kernel`.
    #[arg(long)]
    pub x_metric: Option<MetricSpec>,
    #[arg(long)]
    pub y_metric: Option<MetricSpec>,
    /// Headerless square CSV used with a precomputed metric.
    #[arg(long)]
    pub x_matrix: Option<PathBuf>,
    #[arg(long)]
    pub y_matrix: Option<PathBuf>,
    #[arg(long)]
    pub permutations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leading features shown, `I,J` or a single count for both.
    #[arg(long, value_parser = parse_features)]
    pub features: Option<[usize; 2]>,
    /// Show all n features on each side.
    #[arg(long)]
    pub all_pairs: bool,
    /// Number of top pairs printed.
    #[arg(long)]
    pub top: Option<usize>,
    /// Log-scale the weight-decay plot.
    #[arg(long)]
    pub log_scale: bool,
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_features(s: &str) -> std::result::Result<[usize; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<usize>().map_err(|_| format!("bad feature count `{t}`"));
    match parts.as_slice() {
        [a] => {
            let a = num(a)?;
            Ok([a, a])
        }
        [a, b] => Ok([num(a)?, num(b)?]),
        _ => Err(format!("expected I,J, got `{s}`")),
    }
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.input {
            cfg.input = Some(v.clone());
        }
        if let Some(v) = &self.generator {
            cfg.generator = Some(v.clone());
        }
        if let Some(v) = &self.x_cols {
            cfg.x_cols = v.clone();
        }
        if let Some(v) = &self.y_cols {
            cfg.y_cols = v.clone();
        }
        if let Some(v) = &self.x_metric {
            cfg.x_metric = v.clone();
        }
        if let Some(v) = &self.y_metric {
            cfg.y_metric = v.clone();
        }
        if let Some(v) = &self.x_matrix {
            cfg.x_matrix = Some(v.clone());
        }
        if let Some(v) = &self.y_matrix {
            cfg.y_matrix = Some(v.clone());
        }
        if let Some(v) = self.permutations {
            cfg.permutations = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.features {
            cfg.features = Some(v);
        }
        if let Some(v) = self.top {
            cfg.top_k = v;
        }
        if let Some(v) = self.threads {
            cfg.threads = Some(v);
        }
        cfg.all_pairs |= self.all_pairs;
        cfg.viz.log_scale |= self.log_scale;
        cfg.check()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// e.g. `case1_2d:n=500,seed=3`.
    #[arg(long)]
    pub generator: GeneratorSpec,
    /// Destination CSV file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// JSON list of atoms `{x: [..], y: [..], p: ..}`.
    pub fixture: PathBuf,
    #[arg(long, default_value = "euclidean")]
    pub x_metric: MetricSpec,
    #[arg(long, default_value = "euclidean")]
    pub y_metric: MetricSpec,
    /// `m x m` matrix over the atoms, used with a precomputed metric.
    #[arg(long)]
    pub x_matrix: Option<PathBuf>,
    #[arg(long)]
    pub y_matrix: Option<PathBuf>,
    /// Write the report as JSON to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Software {
    name: &'static str,
    version: &'static str,
}

const SOFTWARE: Software = Software { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") };

/// Contents of `report.json`.
#[derive(Debug, Serialize)]
pub struct TestReport {
    software: Software,
    pub command: String,
    pub n: usize,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub x_metric: String,
    pub y_metric: String,
    /// `distance` or `kernel`: which centered form the statistic was computed from.
    pub statistic_path: String,
    pub v_hat: f64,
    pub hsic_hat: f64,
    pub p_value: f64,
    pub permutations: usize,
    pub seed: u64,
    pub null_statistics: Vec<f64>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub top_pairs: Vec<crate::adc::RankedPair>,
    pub config: RunConfig,
}

/// Result of running `test` or `decompose`.
pub struct RunOutput {
    pub report: TestReport,
    pub centered: CenteredPair,
    pub permutation: PermutationResult,
    pub ranking: Option<ContributionRanking>,
    pub artifacts: Vec<Artifact>,
}

struct Source {
    data: Option<PairedDataset>,
    x: PairwiseMatrix,
    y: PairwiseMatrix,
    warnings: Vec<String>,
}

fn precomputed(path: &Path, spec: &MetricSpec) -> Result<PairwiseMatrix> {
    if !matches!(spec.kind, MetricKind::PrecomputedDistance | MetricKind::PrecomputedKernel) {
        return Err(Error::Config(format!(
            "a matrix file needs a precomputed metric, got `{spec}`"
        )));
    }
    load_precomputed(path, spec.matrix_kind())
}

fn load_source(cfg: &RunConfig) -> Result<Source> {
    if let (Some(xm), Some(ym)) = (&cfg.x_matrix, &cfg.y_matrix) {
        return Ok(Source {
            data: None,
            x: precomputed(xm, &cfg.x_metric)?,
            y: precomputed(ym, &cfg.y_metric)?,
            warnings: Vec::new(),
        });
    }
    let ds = match (&cfg.input, &cfg.generator) {
        (Some(path), _) => load_csv(path, &cfg.x_cols, &cfg.y_cols)?,
        (_, Some(spec)) => generate(spec)?,
        _ => unreachable!("checked by RunConfig::check"),
    };
    let warnings = validate(&ds).iter().map(ToString::to_string).collect();
    let x = pairwise_matrix(&ds.x, &cfg.x_metric)?;
    let y = pairwise_matrix(&ds.y, &cfg.y_metric)?;
    Ok(Source { data: Some(ds), x, y, warnings })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_matrix(path: &Path, m: &nalgebra::DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::Csv(e.to_string()))?;
    for r in 0..m.nrows() {
        w.write_record(m.row(r).iter().map(|v| v.to_string())).map_err(|e| Error::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_ranking(path: &Path, rank: &ContributionRanking) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv(e.to_string()))?;
    w.write_record(["rank", "i", "j", "contribution", "corr_sq", "lambda", "sigma", "cumulative_share"])
        .map_err(|e| Error::Csv(e.to_string()))?;
    for (k, (p, c)) in rank.pairs.iter().zip(&rank.cumulative_share).enumerate() {
        w.write_record([
            (k + 1).to_string(),
            p.i.to_string(),
            p.j.to_string(),
            p.contribution.to_string(),
            p.corr_sq.to_string(),
            p.lambda.to_string(),
            p.sigma.to_string(),
            c.to_string(),
        ])
        .map_err(|e| Error::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Config(e.to_string())),
    }
}

/// Runs the permutation test and writes `report.json` into `cfg.out`.
pub fn cmd_test(cfg: &RunConfig) -> Result<RunOutput> {
    run(cfg, false)
}

/// Runs the test and the decomposition, writing the report, `adc.json`,
/// the contribution ranking, matrix CSVs, figures and `bundle.json`.
pub fn cmd_decompose(cfg: &RunConfig) -> Result<RunOutput> {
    run(cfg, true)
}

fn run(cfg: &RunConfig, decompose: bool) -> Result<RunOutput> {
    cfg.check()?;
    with_threads(cfg.threads, || run_inner(cfg, decompose))?
}

fn run_inner(cfg: &RunConfig, decompose: bool) -> Result<RunOutput> {
    let src = load_source(cfg)?;
    let cp = centered_pair(&src.x, &src.y)?;
    let n = cp.n();
    let viz = cfg.viz_for(n);
    viz.check(n)?;
    let perm = permutation_test(&cp, cfg.permutations, cfg.seed)?;

    let out = &cfg.out;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut artifacts = Vec::new();
    let mut ranking = None;
    if decompose {
        let adc = adc_decompose(&cp)?;
        let rank = rank_contributions(&adc);
        write_json(&out.join("adc.json"), &adc.summary(viz.features_x, viz.features_y))?;
        artifacts.push(Artifact::new("adc.json", "json", "eigenvalues, leading features and correlation blocks"));
        write_ranking(&out.join("contributions.csv"), &rank)?;
        artifacts.push(Artifact::new("contributions.csv", "csv", "all feature pairs ranked by contribution"));
        write_matrix(&out.join("corr_matrix.csv"), &adc.corr)?;
        artifacts.push(Artifact::new("corr_matrix.csv", "csv", "n x n feature correlation matrix"));
        write_matrix(&out.join("contribution_matrix.csv"), &adc.contributions)?;
        artifacts.push(Artifact::new("contribution_matrix.csv", "csv", "n x n weighted contribution matrix"));
        if let Some(ds) = &src.data {
            artifacts.extend(write_visualizations(ds, &adc, &rank, &viz, out)?);
        } else {
            let (raw, weighted) = crate::viz::render_correlation_maps(&adc, &viz)?;
            for (file, svg, what) in [("corr_raw.svg", raw, "raw correlation map"), ("corr_weighted.svg", weighted, "weighted correlation map")] {
                std::fs::write(out.join(file), svg).map_err(|e| Error::io(out.join(file), e))?;
                artifacts.push(Artifact::new(file, "svg", what));
            }
            let decay = crate::viz::render_weight_decay(&adc.x_system, &adc.y_system, &viz);
            std::fs::write(out.join("weight_decay.svg"), decay).map_err(|e| Error::io(out.join("weight_decay.svg"), e))?;
            artifacts.push(Artifact::new("weight_decay.svg", "svg", "eigenvalue share decay"));
            let cov = crate::viz::render_coverage_curve(&rank, &viz)?;
            std::fs::write(out.join("coverage.svg"), cov).map_err(|e| Error::io(out.join("coverage.svg"), e))?;
            artifacts.push(Artifact::new("coverage.svg", "svg", "contribution coverage curve"));
        }
        ranking = Some(rank);
    }

    let report = TestReport {
        software: SOFTWARE,
        command: if decompose { "decompose" } else { "test" }.into(),
        n,
        p: src.data.as_ref().map(|d| d.x.dim()),
        q: src.data.as_ref().map(|d| d.y.dim()),
        x_metric: cfg.x_metric.to_string(),
        y_metric: cfg.y_metric.to_string(),
        statistic_path: cp.source.name().into(),
        v_hat: cp.v_hat,
        hsic_hat: cp.hsic_hat,
        p_value: perm.p_value,
        permutations: perm.num_permutations,
        seed: cfg.seed,
        null_statistics: perm.null_stats.clone(),
        warnings: src.warnings,
        top_pairs: ranking.as_ref().map(|r| r.pairs.iter().take(cfg.top_k).cloned().collect()).unwrap_or_default(),
        config: cfg.clone(),
    };
    write_json(&out.join("report.json"), &report)?;
    artifacts.insert(0, Artifact::new("report.json", "json", "statistic, p-value and provenance"));
    if decompose {
        write_json(&out.join("bundle.json"), &Bundle { software: SOFTWARE, artifacts: &artifacts })?;
    }
    Ok(RunOutput { report, centered: cp, permutation: perm, ranking, artifacts })
}

#[derive(Serialize)]
struct Bundle<'a> {
    software: Software,
    artifacts: &'a [Artifact],
}

/// Writes the generated dataset as CSV.
pub fn cmd_generate(spec: &GeneratorSpec, out: &Path) -> Result<PairedDataset> {
    let ds = generate(spec)?;
    save_csv(&ds, out)?;
    Ok(ds)
}

fn oracle_matrix(
    dist: &FiniteJointDistribution,
    y_side: bool,
    spec: &MetricSpec,
    path: Option<&PathBuf>,
) -> Result<PairwiseMatrix> {
    match path {
        Some(p) => precomputed(p, spec),
        None => support_matrix(dist, y_side, spec),
    }
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<OracleReport> {
    let dist = FiniteJointDistribution::load_json(&args.fixture)?;
    let kx = oracle_matrix(&dist, false, &args.x_metric, args.x_matrix.as_ref())?;
    let ky = oracle_matrix(&dist, true, &args.y_metric, args.y_matrix.as_ref())?;
    let report = oracle_report(&dist, &kx, &ky)?;
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    Ok(report)
}

fn print_summary(out: &RunOutput) {
    let r = &out.report;
    println!("n = {}  path = {}", r.n, r.statistic_path);
    println!("v_hat = {}  hsic_hat = {}", fmt_sig6(r.v_hat), fmt_sig6(r.hsic_hat));
    println!("p_value = {}  (B = {}, seed = {})", fmt_sig6(r.p_value), r.permutations, r.seed);
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
}

fn print_top_pairs(out: &RunOutput) {
    let Some(rank) = &out.ranking else { return };
    println!("{:>4} {:>4} {:>4} {:>12} {:>12} {:>12} {:>12} {:>10}", "rank", "i", "j", "lambda", "sigma", "corr^2", "contrib", "cum share");
    for (k, p) in out.report.top_pairs.iter().enumerate() {
        println!(
            "{:>4} {:>4} {:>4} {:>12} {:>12} {:>12} {:>12} {:>10}",
            k + 1,
            p.i,
            p.j,
            fmt_sig6(p.lambda),
            fmt_sig6(p.sigma),
            fmt_sig6(p.corr_sq),
            fmt_sig6(p.contribution),
            fmt_sig6(rank.cumulative_share[k])
        );
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        EXIT_NUMERIC
    } else {
        EXIT_INVALID
    }
}

/// Executes a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let result: Result<i32> = match cli.command {
        Command::Test(args) => args.resolve().and_then(|cfg| cmd_test(&cfg)).map(|out| {
            print_summary(&out);
            EXIT_OK
        }),
        Command::Decompose(args) => args.resolve().and_then(|cfg| cmd_decompose(&cfg)).map(|out| {
            print_summary(&out);
            print_top_pairs(&out);
            EXIT_OK
        }),
        Command::Generate(args) => cmd_generate(&args.generator, &args.out).map(|ds| {
            println!("wrote {} rows to {}", ds.n(), args.out.display());
            EXIT_OK
        }),
        Command::Oracle(args) => cmd_oracle(&args).map(|r| {
            println!("atoms = {}", r.atoms);
            println!("population_hsic = {}", fmt_sig6(r.population_hsic));
            println!("population_dcov = {}", fmt_sig6(r.population_dcov));
            println!("population_adc_sum = {}", fmt_sig6(r.population_adc_sum));
            println!("adc_residual = {}  dcov_residual = {}", fmt_sig6(r.adc_residual), fmt_sig6(r.dcov_residual));
            println!("max_feature_mean = {}  max_feature_variance_error = {}", fmt_sig6(r.max_feature_mean), fmt_sig6(r.max_feature_variance_error));
            if r.passed {
                println!("identities hold within tolerance");
                EXIT_OK
            } else {
                println!("identity residuals exceed tolerance");
                EXIT_NUMERIC
            }
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn features_flag() {
        assert_eq!(parse_features("4,3").unwrap(), [4, 3]);
        assert_eq!(parse_features("5").unwrap(), [5, 5]);
        assert!(parse_features("1,2,3").is_err());
        assert!(parse_features("a").is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = RunConfig {
            generator: Some("w_shape:n=50,seed=3".parse().unwrap()),
            x_metric: "polynomial:alpha=0.5,beta=0.5".parse().unwrap(),
            features: Some([3, 2]),
            ..RunConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains(r#""x_metric":"polynomial:alpha=0.5,beta=0.5""#));
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_config_uses_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"generator": "circle:n=20", "seed": 4}"#).unwrap();
        assert_eq!(cfg.permutations, DEFAULT_PERMUTATIONS);
        assert_eq!(cfg.seed, 4);
        assert!(cfg.check().is_ok());
        assert!(serde_json::from_str::<RunConfig>(r#"{"sede": 4}"#).is_err());
    }

    #[test]
    fn exactly_one_source() {
        assert!(RunConfig::default().check().is_err());
        let both = RunConfig {
            input: Some("a.csv".into()),
            x_cols: vec!["a".into()],
            y_cols: vec!["b".into()],
            generator: Some("circle:n=20".parse().unwrap()),
            ..RunConfig::default()
        };
        assert!(both.check().is_err());
        let half = RunConfig { x_matrix: Some("k.csv".into()), ..RunConfig::default() };
        assert!(half.check().is_err());
    }

    #[test]
    fn default_features_clamp_to_n() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.viz_for(4).features_x, 4);
        assert_eq!(cfg.viz_for(40).features_y, 6);
        let all = RunConfig { all_pairs: true, ..RunConfig::default() };
        assert_eq!(all.viz_for(40).features_x, 40);
    }
}
