//! Command-line front end. Every command writes one JSON report and maps its
//! outcome onto the exit codes in [`exit`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::derivable::{self, SaturateOptions, Verdict, VerificationReport, DEFAULT_ANGLE_TOL};
use crate::error::Error;
use crate::extract::{self, IdentityCheck, ImplementingOperator};
use crate::json;
use crate::linalg::{self, random_rank, sub_seed, ComplexMatrix, DEFAULT_RANK_TOL};
use crate::superop::SuperOperator;

pub mod exit {
    pub const OK: i32 = 0;
    /// Result contradicting the characterization, failed extraction or violated hypothesis.
    pub const FAILED: i32 = 1;
    pub const INCONCLUSIVE: i32 = 2;
    pub const BAD_INPUT: i32 = 64;
}

#[derive(Debug, Parser)]
#[command(
    name = "derivlab",
    version,
    about = "Derivable maps at a point of M_n(C): verification, extraction, intertwining"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Saturate the derivability constraints at G and compare with the derivations.
    Verify(CommonArgs),
    /// Run verify over every rank 0..=n for each dimension in --dim.
    Sweep(CommonArgs),
    /// Recover T with PHI = ad_T, block by block when G is rank-deficient.
    Extract {
        #[command(flatten)]
        common: CommonArgs,
        /// SuperOperator JSON file.
        phi: PathBuf,
    },
    /// Solve Y·phi(W) = psi(Y)·W for D with phi(W) = D·W and psi(Y) = Y·D.
    #[command(name = "thm22", visible_alias = "intertwine")]
    Intertwine {
        #[command(flatten)]
        common: CommonArgs,
        /// Matrix JSON of phi acting on vec of k x h matrices.
        phi: PathBuf,
        /// Matrix JSON of psi acting on vec of h x k matrices.
        psi: PathBuf,
        h: usize,
        k: usize,
    },
    /// Show that G = 0 admits the identity map as a non-derivation solution.
    CounterexampleZero(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Dimension n; sweep also accepts a list `2,3` or a range `2..4`.
    #[arg(long)]
    pub dim: Option<DimSpec>,
    /// file:PATH | named:e11|nilpotent|identity|zero | random_rank:R:SEED
    #[arg(long = "g")]
    pub g: Option<GSource>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub tol: f64,
    #[arg(long = "angle-tol", default_value_t = DEFAULT_ANGLE_TOL)]
    pub angle_tol: f64,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long = "max-pairs")]
    pub max_pairs: Option<usize>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimSpec(pub Vec<usize>);

impl FromStr for DimSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad dimension {t:?}: {e}"))
        };
        let dims = if let Some((lo, hi)) = s.split_once("..") {
            let (lo, hi) = (parse(lo)?, parse(hi.trim_start_matches('='))?);
            (lo..=hi).collect()
        } else {
            s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
        };
        if dims.is_empty() {
            return Err(format!("empty dimension list {s:?}"));
        }
        Ok(DimSpec(dims))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedG {
    E11,
    Nilpotent,
    Identity,
    Zero,
}

impl NamedG {
    pub const ALL: [NamedG; 4] = [
        NamedG::E11,
        NamedG::Nilpotent,
        NamedG::Identity,
        NamedG::Zero,
    ];

    pub fn matrix(self, n: usize) -> ComplexMatrix {
        match self {
            NamedG::E11 => ComplexMatrix::unit(n, n, 0, 0),
            NamedG::Nilpotent => ComplexMatrix::unit(n, n, 0, 1),
            NamedG::Identity => ComplexMatrix::identity(n),
            NamedG::Zero => ComplexMatrix::zeros(n, n),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedG::E11 => "e11",
            NamedG::Nilpotent => "nilpotent",
            NamedG::Identity => "identity",
            NamedG::Zero => "zero",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GSource {
    File(PathBuf),
    Named(NamedG),
    RandomRank { rank: usize, seed: u64 },
}

impl FromStr for GSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("expected KIND:VALUE, got {s:?}"))?;
        match kind {
            "file" => Ok(GSource::File(PathBuf::from(rest))),
            "named" => NamedG::ALL
                .into_iter()
                .find(|g| g.name() == rest)
                .map(GSource::Named)
                .ok_or_else(|| {
                    format!("unknown named G {rest:?}; expected e11, nilpotent, identity or zero")
                }),
            "random_rank" => {
                let (r, seed) = rest.split_once(':').ok_or("random_rank needs R:SEED")?;
                Ok(GSource::RandomRank {
                    rank: r.parse().map_err(|e| format!("bad rank {r:?}: {e}"))?,
                    seed: seed
                        .parse()
                        .map_err(|e| format!("bad seed {seed:?}: {e}"))?,
                })
            }
            other => Err(format!("unknown G source {other:?}")),
        }
    }
}

impl fmt::Display for GSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GSource::File(p) => write!(f, "file:{}", p.display()),
            GSource::Named(g) => write!(f, "named:{}", g.name()),
            GSource::RandomRank { rank, seed } => write!(f, "random_rank:{rank}:{seed}"),
        }
    }
}

/// Resolved settings shared by all commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dims: Option<Vec<usize>>,
    pub g: Option<GSource>,
    pub seed: u64,
    pub tol: f64,
    pub angle_tol: f64,
    pub batch: Option<usize>,
    pub max_pairs: Option<usize>,
    pub out: Option<PathBuf>,
}

impl From<&CommonArgs> for RunConfig {
    fn from(a: &CommonArgs) -> Self {
        RunConfig {
            dims: a.dim.as_ref().map(|d| d.0.clone()),
            g: a.g.clone(),
            seed: a.seed,
            tol: a.tol,
            angle_tol: a.angle_tol,
            batch: a.batch,
            max_pairs: a.max_pairs,
            out: a.out.clone(),
        }
    }
}

impl RunConfig {
    pub fn new(seed: u64) -> Self {
        RunConfig {
            dims: None,
            g: None,
            seed,
            tol: DEFAULT_RANK_TOL,
            angle_tol: DEFAULT_ANGLE_TOL,
            batch: None,
            max_pairs: None,
            out: None,
        }
    }

    fn single_dim(&self) -> Result<Option<usize>, CliError> {
        match self.dims.as_deref() {
            None => Ok(None),
            Some([n]) => Ok(Some(*n)),
            Some(_) => Err(CliError::input("--dim takes a single value here")),
        }
    }

    fn options(&self, n: usize) -> SaturateOptions {
        let mut opts = SaturateOptions::for_dim(n);
        opts.tol = self.tol;
        if let Some(b) = self.batch {
            opts.batch = b;
        }
        if let Some(m) = self.max_pairs {
            opts.max_pairs = m;
        }
        opts
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0
            && self.tol.is_finite()
            && self.angle_tol > 0.0
            && self.angle_tol.is_finite())
        {
            return Err(CliError::input(
                "--tol and --angle-tol must be positive and finite",
            ));
        }
        if self.batch == Some(0) {
            return Err(CliError::input("--batch must be positive"));
        }
        Ok(())
    }

    /// Builds `G`. `default_dim` applies when neither `--dim` nor a file fixes it.
    pub fn load_g(&self, default_dim: Option<usize>) -> Result<ComplexMatrix, CliError> {
        let source = self
            .g
            .as_ref()
            .ok_or_else(|| CliError::input("--g is required"))?;
        let dim = self.single_dim()?.or(default_dim);
        let g = match source {
            GSource::File(path) => {
                let g: ComplexMatrix = read_json(path)?;
                if !g.is_square() {
                    return Err(CliError::input(format!(
                        "G in {} is not square",
                        path.display()
                    )));
                }
                if let Some(n) = self.single_dim()? {
                    if n != g.rows() {
                        return Err(CliError::input(format!(
                            "--dim {n} but G in file is {}x{}",
                            g.rows(),
                            g.cols()
                        )));
                    }
                }
                g
            }
            GSource::Named(name) => {
                let n = dim.ok_or_else(|| CliError::input("--dim is required for named G"))?;
                if n < 2 {
                    return Err(CliError::input("named G needs n >= 2"));
                }
                name.matrix(n)
            }
            GSource::RandomRank { rank, seed } => {
                let n =
                    dim.ok_or_else(|| CliError::input("--dim is required for random_rank G"))?;
                if *rank > n {
                    return Err(CliError::input(format!(
                        "rank {rank} exceeds dimension {n}"
                    )));
                }
                random_rank(n, *rank, *seed)
            }
        };
        Ok(g)
    }
}

/// Error carrying the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: exit::BAD_INPUT,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Inconclusive { .. } => exit::INCONCLUSIVE,
            Error::HypothesisViolated { .. }
            | Error::NumericalTolerance { .. }
            | Error::ExtractionInconsistent { .. } => exit::FAILED,
            _ => exit::BAD_INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// A serialized report with its exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub json: String,
}

impl Outcome {
    fn new<T: Serialize>(code: i32, report: &T) -> Result<Self, CliError> {
        Ok(Outcome {
            code,
            json: json::to_string(report)?,
        })
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("malformed JSON in {}: {e}", path.display())))
}

fn verify_exit(report: &VerificationReport) -> i32 {
    if report.is_inconclusive() {
        exit::INCONCLUSIVE
    } else if report.theorem_consistent {
        exit::OK
    } else {
        exit::FAILED
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Option<u64>) {
    let start = std::time::Instant::now();
    let out = f();
    let ms = std::env::var_os("DERIVLAB_TIMING").map(|_| start.elapsed().as_millis() as u64);
    (out, ms)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let g = cfg.load_g(None)?;
    if g.rows() < 2 {
        return Err(CliError::input("verify needs n >= 2"));
    }
    let (result, ms) = timed(|| {
        derivable::verify_all_derivable(&g, cfg.seed, &cfg.options(g.rows()), cfg.angle_tol)
    });
    let (mut report, _, _) = result?;
    report.runtime_ms = ms;
    Outcome::new(verify_exit(&report), &report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub all_consistent: bool,
    pub degraded: bool,
    pub cells: usize,
    pub inconsistent_cells: usize,
    pub inconclusive_cells: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub reports: Vec<VerificationReport>,
    pub summary: SweepSummary,
}

/// Seed of the random `G` for sweep cell `(n, r)`.
pub fn sweep_cell_seed(seed: u64, n: usize, r: usize) -> u64 {
    sub_seed(seed, ((n as u64) << 32) | r as u64)
}

pub fn run_sweep(cfg: &RunConfig) -> Result<SweepReport, CliError> {
    cfg.validate()?;
    let dims = cfg.dims.clone().unwrap_or_else(|| vec![2, 3]);
    if let Some(&n) = dims.iter().find(|&&n| n < 2) {
        return Err(CliError::input(format!("sweep needs n >= 2, got {n}")));
    }
    let cells: Vec<(usize, usize)> = dims
        .iter()
        .flat_map(|&n| (0..=n).map(move |r| (n, r)))
        .collect();
    let reports = cells
        .par_iter()
        .map(|&(n, r)| {
            let cell_seed = sweep_cell_seed(cfg.seed, n, r);
            let g = random_rank(n, r, cell_seed);
            let (out, ms) = timed(|| {
                derivable::verify_all_derivable(&g, cell_seed, &cfg.options(n), cfg.angle_tol)
            });
            out.map(|(mut report, _, _)| {
                report.runtime_ms = ms;
                report
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let inconclusive_cells = reports.iter().filter(|r| r.is_inconclusive()).count();
    let inconsistent_cells = reports
        .iter()
        .filter(|r| !r.is_inconclusive() && !r.theorem_consistent)
        .count();
    let summary = SweepSummary {
        all_consistent: inconclusive_cells == 0 && inconsistent_cells == 0,
        degraded: inconclusive_cells > 0,
        cells: reports.len(),
        inconsistent_cells,
        inconclusive_cells,
        seed: cfg.seed,
    };
    Ok(SweepReport { reports, summary })
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let report = run_sweep(cfg)?;
    let code = if report.summary.inconsistent_cells > 0 {
        exit::FAILED
    } else if report.summary.degraded {
        exit::INCONCLUSIVE
    } else {
        exit::OK
    };
    Outcome::new(code, &report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractionReport {
    #[serde(flatten)]
    pub operator: ImplementingOperator,
    pub step_identities: Vec<IdentityCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn cmd_extract(cfg: &RunConfig, phi_file: &Path) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let phi: SuperOperator = read_json(phi_file)?;
    let n = phi.n();
    let g = cfg.load_g(Some(n))?;
    if g.rows() != n {
        return Err(CliError::input(format!(
            "G is {}x{} but PHI acts on {n}x{n}",
            g.rows(),
            g.cols()
        )));
    }
    let least_squares = extract::recover_implementing(&phi, DEFAULT_RANK_TOL)?;
    let rank = linalg::numerical_rank(&g, cfg.tol);
    if rank == 0 || rank == n {
        let code = if least_squares.residual <= cfg.tol {
            exit::OK
        } else {
            exit::FAILED
        };
        let report = ExtractionReport {
            operator: least_squares,
            step_identities: Vec::new(),
            error: None,
        };
        return Outcome::new(code, &report);
    }
    let bm = extract::block_maps(&phi, &g, cfg.tol)?;
    let step_identities = extract::block_identities(&bm, &g, cfg.tol)?;
    let report = match extract::blockwise_recover(&phi, &g, cfg.tol) {
        Ok(op) => ExtractionReport {
            operator: op,
            step_identities,
            error: None,
        },
        Err(e @ Error::ExtractionInconsistent { .. }) => {
            let failing: Vec<&str> = step_identities
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.name.as_str())
                .collect();
            let message = format!("{e}; failing identities: [{}]", failing.join("; "));
            let report = ExtractionReport {
                operator: least_squares,
                step_identities,
                error: Some(message),
            };
            return Outcome::new(exit::FAILED, &report);
        }
        Err(e) => return Err(e.into()),
    };
    let code = if report.operator.residual <= cfg.tol {
        exit::OK
    } else {
        exit::FAILED
    };
    Outcome::new(code, &report)
}

#[derive(Debug, Clone, Serialize)]
struct HypothesisViolation {
    error: &'static str,
    residual: f64,
    y_unit: (usize, usize),
    w_unit: (usize, usize),
}

pub fn cmd_intertwine(
    cfg: &RunConfig,
    phi_file: &Path,
    psi_file: &Path,
    h: usize,
    k: usize,
) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let phi: ComplexMatrix = read_json(phi_file)?;
    let psi: ComplexMatrix = read_json(psi_file)?;
    match extract::solve_intertwining(&phi, &psi, h, k, cfg.tol) {
        Ok(sol) => Outcome::new(exit::OK, &sol),
        Err(Error::HypothesisViolated {
            residual,
            y_unit,
            w_unit,
        }) => Outcome::new(
            exit::FAILED,
            &HypothesisViolation {
                error: "hypothesis_violated",
                residual,
                y_unit,
                w_unit,
            },
        ),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub n: usize,
    pub identity_constraint_residual: f64,
    pub identity_distance_to_solution_space: f64,
    pub dim_solution: usize,
    pub dim_derivation: usize,
    pub verdict: Verdict,
    pub pairs_used: usize,
    pub seed: u64,
    pub saturated: bool,
}

pub fn cmd_counterexample_zero(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let n = cfg.single_dim()?.unwrap_or(2);
    if n < 2 {
        return Err(CliError::input("counterexample-zero needs n >= 2"));
    }
    let g = ComplexMatrix::zeros(n, n);
    let (report, space, system) =
        derivable::verify_all_derivable(&g, cfg.seed, &cfg.options(n), cfg.angle_tol)?;
    let identity = SuperOperator::identity(n);
    let out = CounterexampleReport {
        n,
        identity_constraint_residual: system.residual(&identity),
        identity_distance_to_solution_space: space.relative_distance(&identity),
        dim_solution: report.dim_solution,
        dim_derivation: report.dim_derivation,
        verdict: report.verdict,
        pairs_used: report.pairs_used,
        seed: cfg.seed,
        saturated: report.saturated,
    };
    let code = if report.is_inconclusive() {
        exit::INCONCLUSIVE
    } else if out.identity_constraint_residual <= cfg.tol
        && out.dim_solution >= n * n
        && out.verdict == Verdict::NotAllDerivablePoint
    {
        exit::OK
    } else {
        exit::FAILED
    };
    Outcome::new(code, &out)
}

/// Dispatches a parsed command line.
pub fn execute(cli: &Cli) -> (Result<Outcome, CliError>, Option<PathBuf>) {
    let (common, result) = match &cli.command {
        Command::Verify(c) => (c, cmd_verify(&c.into())),
        Command::Sweep(c) => (c, cmd_sweep(&c.into())),
        Command::Extract { common, phi } => (common, cmd_extract(&common.into(), phi)),
        Command::Intertwine {
            common,
            phi,
            psi,
            h,
            k,
        } => (common, cmd_intertwine(&common.into(), phi, psi, *h, *k)),
        Command::CounterexampleZero(c) => (c, cmd_counterexample_zero(&c.into())),
    };
    (result, common.out.clone())
}

/// Parses `args`, runs, writes the report and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::BAD_INPUT
            } else {
                exit::OK
            };
        }
    };
    let (result, out) = execute(&cli);
    match result {
        Ok(outcome) => {
            let written = match &out {
                Some(path) => std::fs::write(path, &outcome.json),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(outcome.json.as_bytes())
                }
            };
            if let Err(e) = written {
                eprintln!("derivlab: cannot write report: {e}");
                return exit::BAD_INPUT;
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("derivlab: {e}");
            e.code
        }
    }
}
