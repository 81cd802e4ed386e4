//! Command-line front end.
//!
//! Exit codes: `0` success or PPT for every decomposition, `1` a violation
//! was found, `2` bad input, `3` no counterexample exists.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::lmi::{self, certify_abs_ppt, closed_form_p2_sides, lambda_matrix, lmi_p3, Status};
use crate::linalg::{CMatrix, HermitianMatrix, Spectrum};
use crate::oracle::{build_counterexample, random_falsify};
use crate::orderings::{enumerate_sigma, p_max, s_minus, s_plus, OrderingPair};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_COUNTEREXAMPLE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<std::io::Error> for CliError {
    fn from(source: std::io::Error) -> Self {
        CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "absppt",
    version,
    about = "Decide from a spectrum whether an operator is PPT under every n x m tensor decomposition"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the spectral certificate (exit 0: PPT for all decompositions, 1: not).
    Check(SpectrumArgs),
    /// List the ordering pairs behind the certificate for a given p as JSON.
    Enumerate {
        #[arg(long, short)]
        p: usize,
    },
    /// Write an explicit operator with the given spectrum that is not PPT.
    Counterexample {
        #[command(flatten)]
        input: SpectrumArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a violation with Haar-random unitaries.
    Oracle {
        #[command(flatten)]
        input: SpectrumArgs,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Debug, Args)]
#[group(skip)]
pub struct SpectrumArgs {
    /// Factor dimensions as NxM, e.g. 2x3.
    #[arg(long, value_parser = parse_dims)]
    pub dims: Option<(usize, usize)>,
    /// Comma-separated eigenvalues.
    #[arg(long, allow_hyphen_values = true, group = "source")]
    pub spectrum: Option<String>,
    /// File with one eigenvalue per line.
    #[arg(long, group = "source")]
    pub csv: Option<PathBuf>,
    /// File of the form {"n": int, "m": int, "eigenvalues": [...]}.
    #[arg(long, group = "source")]
    pub json: Option<PathBuf>,
    /// Tolerance relative to the largest eigenvalue.
    #[arg(long, default_value_t = lmi::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

pub fn parse_dims(s: &str) -> std::result::Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(['x', 'X', '×']).collect();
    if parts.len() != 2 {
        return Err(format!("expected NxM, got {s:?}"));
    }
    let n: usize = parts[0].trim().parse().map_err(|_| format!("bad n in {s:?}"))?;
    let m: usize = parts[1].trim().parse().map_err(|_| format!("bad m in {s:?}"))?;
    if n == 0 || m == 0 {
        return Err("dimensions must be positive".into());
    }
    Ok((n, m))
}

/// JSON spectrum file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub n: usize,
    pub m: usize,
    pub eigenvalues: Vec<f64>,
}

fn parse_number(tok: &str) -> CliResult<f64> {
    tok.trim()
        .parse()
        .map_err(|_| CliError::Input(format!("not a number: {tok:?}")))
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn require_dims(dims: Option<(usize, usize)>) -> CliResult<(usize, usize)> {
    dims.ok_or_else(|| CliError::Input("--dims is required with --spectrum and --csv".into()))
}

impl SpectrumArgs {
    /// Reads and validates the spectrum from whichever source was given.
    pub fn load(&self) -> CliResult<Spectrum> {
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(CliError::Input(format!("--tol must be non-negative, got {}", self.tol)));
        }
        let (raw, n, m) = if let Some(list) = &self.spectrum {
            let (n, m) = require_dims(self.dims)?;
            let raw = list
                .split([',', ' ', ';'])
                .filter(|t| !t.trim().is_empty())
                .map(parse_number)
                .collect::<CliResult<Vec<_>>>()?;
            (raw, n, m)
        } else if let Some(path) = &self.csv {
            let (n, m) = require_dims(self.dims)?;
            let raw = read_file(path)?
                .lines()
                .map(|l| l.trim().trim_end_matches(','))
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(parse_number)
                .collect::<CliResult<Vec<_>>>()?;
            (raw, n, m)
        } else if let Some(path) = &self.json {
            let file: SpectrumFile = serde_json::from_str(&read_file(path)?)?;
            if let Some((n, m)) = self.dims {
                if (n, m) != (file.n, file.m) {
                    return Err(CliError::Input(format!(
                        "--dims {n}x{m} disagrees with {}x{} in {}",
                        file.n,
                        file.m,
                        path.display()
                    )));
                }
            }
            (file.eigenvalues, file.n, file.m)
        } else {
            return Err(CliError::Input(
                "one of --spectrum, --csv or --json is required".into(),
            ));
        };
        Ok(Spectrum::new(&raw, n, m)?)
    }
}

/// `(k, l) -> rank`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEntry {
    pub pair: [usize; 2],
    pub rank: usize,
}

/// An ordering pair as explicit rank maps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub sigma_plus: Vec<RankEntry>,
    pub sigma_minus: Vec<RankEntry>,
}

impl PairReport {
    pub fn from_pair(pair: &OrderingPair) -> Self {
        let p = pair.p();
        PairReport {
            sigma_plus: s_plus(p)
                .into_iter()
                .map(|ip| RankEntry {
                    pair: [ip.k, ip.l],
                    rank: pair.sigma_plus(ip),
                })
                .collect(),
            sigma_minus: s_minus(p)
                .into_iter()
                .map(|ip| RankEntry {
                    pair: [ip.k, ip.l],
                    rank: pair.sigma_minus(ip),
                })
                .collect(),
        }
    }

    pub fn to_pair(&self, p: usize) -> crate::error::Result<OrderingPair> {
        let mut plus = vec![0; s_plus(p).len()];
        let mut minus = vec![0; s_minus(p).len()];
        for (entries, ranks, minus_side) in [
            (&self.sigma_plus, &mut plus, false),
            (&self.sigma_minus, &mut minus, true),
        ] {
            if entries.len() != ranks.len() {
                return Err(Error::NotABijection(ranks.len()));
            }
            for e in entries {
                let [k, l] = e.pair;
                if k == 0 || k > l || l > p || (minus_side && k == l) {
                    return Err(Error::NotABijection(ranks.len()));
                }
                let ip = crate::orderings::IndexPair::new(k, l);
                let idx = if minus_side { ip.minus_index() } else { ip.plus_index() };
                ranks[idx] = e.rank;
            }
        }
        OrderingPair::new(p, plus, minus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub tool_version: String,
    pub input: SpectrumFile,
    pub tol: f64,
    pub status: Status,
    pub margin: f64,
    pub boundary: bool,
    pub threshold: f64,
    pub failing_pair: Option<PairReport>,
    pub witness_x: Option<Vec<f64>>,
    pub per_pair_margins: Vec<f64>,
}

impl CheckReport {
    pub fn new(s: &Spectrum, v: &lmi::Verdict) -> Self {
        CheckReport {
            tool_version: VERSION.to_string(),
            input: echo(s),
            tol: v.tol,
            status: v.status,
            margin: v.margin,
            boundary: v.boundary,
            threshold: v.threshold,
            failing_pair: v.failing_pair.as_ref().map(PairReport::from_pair),
            witness_x: v.witness_x.clone(),
            per_pair_margins: v.per_pair.iter().map(|pm| pm.margin).collect(),
        }
    }
}

fn echo(s: &Spectrum) -> SpectrumFile {
    SpectrumFile {
        n: s.n(),
        m: s.m(),
        eigenvalues: s.values().to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerateEntry {
    pub index: usize,
    #[serde(flatten)]
    pub pair: PairReport,
    /// Log-space witness `y`; `exp(y)` realizes the ordering.
    pub witness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerateReport {
    pub p: usize,
    pub count: usize,
    pub pairs: Vec<EnumerateEntry>,
}

/// Complex numbers as `[re, im]`.
pub type JsonComplex = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleFile {
    pub n: usize,
    pub m: usize,
    pub eigenvalues: Vec<f64>,
    pub pair: PairReport,
    pub x: Vec<f64>,
    pub b: Vec<JsonComplex>,
    pub matrix: Vec<Vec<JsonComplex>>,
    /// `b* pt(M) b`.
    pub value: f64,
}

impl CounterexampleFile {
    /// Recomputes `b* pt(M) b` from the stored matrix and vector.
    pub fn recompute_value(&self) -> crate::error::Result<f64> {
        let d = self.n * self.m;
        if self.matrix.len() != d || self.matrix.iter().any(|r| r.len() != d) || self.b.len() != d
        {
            return Err(Error::DimMismatch {
                rows: self.matrix.len(),
                cols: self.b.len(),
                n: self.n,
                m: self.m,
            });
        }
        let m = CMatrix::from_fn(d, d, |i, j| {
            let [re, im] = self.matrix[i][j];
            Complex64::new(re, im)
        });
        let b: Vec<Complex64> = self.b.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        let h = HermitianMatrix::new(m)?;
        Ok(h.partial_transpose(self.n, self.m)?.expectation(&b))
    }

    pub fn matrix(&self) -> crate::error::Result<HermitianMatrix> {
        let d = self.matrix.len();
        HermitianMatrix::new(CMatrix::from_fn(d, d, |i, j| {
            let [re, im] = self.matrix[i][j];
            Complex64::new(re, im)
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub trial: u64,
    pub trial_seed: u64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub tool_version: String,
    pub input: SpectrumFile,
    pub tol: f64,
    pub trials: u64,
    pub seed: u64,
    pub violation: Option<Violation>,
}

fn fmt_matrix(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for r in 0..m.nrows() {
        s.push_str("  [");
        for c in 0..m.ncols() {
            let _ = write!(s, "{:>12.6}", m[(r, c)]);
        }
        s.push_str(" ]\n");
    }
    s
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn human_check(s: &Spectrum, v: &lmi::Verdict) -> CliResult<String> {
    let mut out = String::new();
    let status = match v.status {
        Status::AbsPpt => "ABS_PPT",
        Status::NotAbsPpt => "NOT_ABS_PPT",
    };
    let _ = writeln!(out, "dimensions: {}x{} (p = {})", s.n(), s.m(), s.p());
    let _ = writeln!(out, "verdict:    {status}{}", if v.boundary { " (boundary)" } else { "" });
    let _ = writeln!(
        out,
        "margin:     {:.6e} (threshold {:.3e}, {} ordering pairs)",
        v.margin,
        -v.threshold,
        v.per_pair.len()
    );
    let sigma = enumerate_sigma(s.p())?;
    let worst = lambda_matrix(s, &sigma.pairs[v.worst_index])?;
    let label = if v.failing_pair.is_some() { "failing" } else { "tightest" };
    let _ = writeln!(out, "{label} Λ + Λᵀ (pair #{}):", v.worst_index);
    out.push_str(&fmt_matrix(&worst.symmetrized()));
    if let Some(x) = &v.witness_x {
        let _ = writeln!(out, "witness x:  {}", fmt_vec(x));
    }
    match s.p() {
        2 => {
            let (lhs, rhs) = closed_form_p2_sides(s, 0.0)?;
            let _ = writeln!(
                out,
                "closed form: λ1 - λ{} = {lhs:.6} vs 2√(λ{}·λ{}) = {rhs:.6}",
                s.dim() - 1,
                s.dim(),
                s.dim() - 2
            );
        }
        3 => {
            let mins: Vec<String> = lmi_p3(s)?
                .into_iter()
                .map(|m| format!("{:.6e}", m.symmetric_eigenvalues().min()))
                .collect();
            let _ = writeln!(out, "closed form: λ_min of the two 3x3 LMIs = {}", mins.join(", "));
        }
        _ => {}
    }
    Ok(out)
}

fn cmd_check(args: &SpectrumArgs, out: &mut dyn Write) -> CliResult<i32> {
    let s = args.load()?;
    let v = certify_abs_ppt(&s, args.tol)?;
    match args.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&CheckReport::new(&s, &v))?)?,
        Format::Human => write!(out, "{}", human_check(&s, &v)?)?,
    }
    Ok(if v.is_abs_ppt() { EXIT_OK } else { EXIT_VIOLATION })
}

/// `Σ±(p)` as a report.
pub fn enumerate_report(p: usize) -> crate::error::Result<EnumerateReport> {
    if p == 0 {
        return Err(Error::PMismatch { expected: 1, got: 0 });
    }
    let sigma = enumerate_sigma(p)?;
    Ok(EnumerateReport {
        p,
        count: sigma.len(),
        pairs: sigma
            .pairs
            .iter()
            .zip(&sigma.witnesses)
            .enumerate()
            .map(|(index, (pair, w))| EnumerateEntry {
                index,
                pair: PairReport::from_pair(pair),
                witness: w.clone(),
            })
            .collect(),
    })
}

fn cmd_enumerate(p: usize, out: &mut dyn Write) -> CliResult<i32> {
    let report = enumerate_report(p)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    Ok(EXIT_OK)
}

fn cmd_counterexample(
    args: &SpectrumArgs,
    path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<i32> {
    let s = args.load()?;
    let v = certify_abs_ppt(&s, args.tol)?;
    let (Some(pair), Some(x)) = (&v.failing_pair, &v.witness_x) else {
        writeln!(
            err,
            "spectrum is PPT under every {}x{} decomposition (margin {:.3e}); no counterexample exists",
            s.n(),
            s.m(),
            v.margin
        )?;
        return Ok(EXIT_NO_COUNTEREXAMPLE);
    };
    let w = build_counterexample(&s, pair, x)?;
    let to_json = |z: &Complex64| [z.re, z.im];
    let m = w.matrix.matrix();
    let file = CounterexampleFile {
        n: s.n(),
        m: s.m(),
        eigenvalues: s.values().to_vec(),
        pair: PairReport::from_pair(pair),
        x: w.x.clone(),
        b: w.b.iter().map(to_json).collect(),
        matrix: (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| to_json(&m[(i, j)])).collect())
            .collect(),
        value: w.value,
    };
    let text = serde_json::to_string_pretty(&file)?;
    match path {
        Some(p) => {
            std::fs::write(p, text + "\n").map_err(|source| CliError::Io {
                path: p.to_owned(),
                source,
            })?;
            writeln!(out, "wrote {} (b* pt(M) b = {:.6e})", p.display(), w.value)?;
        }
        None => writeln!(out, "{text}")?,
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(args: &SpectrumArgs, trials: u64, seed: u64, out: &mut dyn Write) -> CliResult<i32> {
    let s = args.load()?;
    if s.dim() > 64 {
        return Err(CliError::Input(format!("nm = {} exceeds 64", s.dim())));
    }
    let hit = random_falsify(&s, trials, seed, args.tol);
    let report = OracleReport {
        tool_version: VERSION.to_string(),
        input: echo(&s),
        tol: args.tol,
        trials,
        seed,
        violation: hit.as_ref().map(|h| Violation {
            trial: h.trial,
            trial_seed: h.trial_seed,
            min_eigenvalue: h.min_eigenvalue,
        }),
    };
    match args.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
        Format::Human => match &report.violation {
            Some(v) => writeln!(
                out,
                "violation at trial {} (unitary seed {}): λ_min(pt) = {:.6e}",
                v.trial, v.trial_seed, v.min_eigenvalue
            )?,
            None => writeln!(out, "no violation in {trials} trials (seed {seed})")?,
        },
    }
    Ok(if hit.is_some() { EXIT_VIOLATION } else { EXIT_OK })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a, out),
        Command::Enumerate { p } => {
            if *p > p_max() {
                Err(Error::PTooLarge { p: *p, max: p_max() }.into())
            } else {
                cmd_enumerate(*p, out)
            }
        }
        Command::Counterexample { input, out: path } => {
            cmd_counterexample(input, path.as_deref(), out, err)
        }
        Command::Oracle { input, trials, seed } => cmd_oracle(input, *trials, *seed, out),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e}");
        EXIT_USAGE
    })
}
