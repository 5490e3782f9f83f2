//! Command-line harness: problem generation, end-to-end runs with the
//! backward-error metrics, and timing sweeps.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cmv::random_block_cmv;
use crate::densela::{eig_oracle, hessenberg_oracle, random_gaussian, random_unit_circle, spectrum_distance};
use crate::hessred::{backward_errors, step1, step2, step3, Problem, ReductionState};
use crate::lfr::{embed, random_block_hessenberg};
use crate::{DenseMatrix, Error, C64};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Largest size accepted with `--verify`.
pub const VERIFY_LIMIT: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Diag,
    Cmv,
    Hess,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Diag => "diag",
            Kind::Cmv => "cmv",
            Kind::Hess => "hess",
        }
    }

    fn parse(s: &str) -> Option<Kind> {
        match s {
            "diag" => Some(Kind::Diag),
            "cmv" => Some(Kind::Cmv),
            "hess" => Some(Kind::Hess),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemSpec {
    pub kind: Kind,
    pub n: usize,
    pub k: usize,
    pub scale: f64,
    pub seed: u64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Io(s) => write!(f, "i/o error: {s}"),
            CliError::Numerical(s) => write!(f, "numerical failure: {s}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.k == 0 || 2 * self.k > self.n {
            return Err(CliError::Usage(format!("need 1 <= k <= n/2, got n = {}, k = {}", self.n, self.k)));
        }
        if !(self.scale >= 1.0 && self.scale.is_finite()) {
            return Err(CliError::Usage(format!("scale must be a finite number >= 1, got {}", self.scale)));
        }
        Ok(())
    }

    /// Random instance. For `diag` the unitary part has uniform phases and
    /// `U`, `V` are complex Gaussian with `U` multiplied by `scale`; for the
    /// other kinds the correction `Z` is Gaussian times `scale`.
    pub fn generate(&self) -> Result<Problem, CliError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let s = C64::new(self.scale, 0.0);
        let (n, k) = (self.n, self.k);
        Ok(match self.kind {
            Kind::Diag => {
                let d = random_unit_circle(n, &mut rng);
                let u = random_gaussian(n, k, &mut rng).scale(s);
                let v = random_gaussian(n, k, &mut rng);
                Problem::Diagonal { d, u, v }
            }
            Kind::Cmv => {
                let g = random_block_cmv(n, k, &mut rng)?;
                let z = random_gaussian(n, k, &mut rng).scale(s);
                Problem::Cmv { g, z, k }
            }
            Kind::Hess => {
                let h = random_block_hessenberg(n, k, &mut rng)?;
                let z = random_gaussian(n, k, &mut rng).scale(s);
                Problem::BlockHessenberg { h, z, k }
            }
        })
    }
}

/// A problem together with the header fields of its file.
#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub kind: Kind,
    pub seed: u64,
    pub problem: Problem,
}

fn write_section(out: &mut String, name: &str, m: &DenseMatrix) {
    let _ = writeln!(out, "{name} {} {}", m.rows(), m.cols());
    for z in m.data() {
        let _ = writeln!(out, "{:.17e} {:.17e}", z.re, z.im);
    }
}

impl ProblemFile {
    pub fn to_text(&self) -> String {
        let p = &self.problem;
        let mut out = format!("LFRPROB v1 {} {} {} {}\n", self.kind.name(), p.n(), p.k(), self.seed);
        match p {
            Problem::Diagonal { d, u, v } => {
                write_section(&mut out, "D", &DenseMatrix::from_rows(d.len(), 1, d.clone()));
                write_section(&mut out, "U", u);
                write_section(&mut out, "V", v);
            }
            Problem::Cmv { g, z, .. } => {
                write_section(&mut out, "G", g);
                write_section(&mut out, "Z", z);
            }
            Problem::BlockHessenberg { h, z, .. } => {
                write_section(&mut out, "H", h);
                write_section(&mut out, "Z", z);
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = |s: &str| CliError::Io(format!("malformed problem file: {s}"));
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty"))?.split_whitespace().collect();
        if header.len() != 6 || header[0] != "LFRPROB" || header[1] != "v1" {
            return Err(bad("header"));
        }
        let kind = Kind::parse(header[2]).ok_or_else(|| bad("kind"))?;
        let n: usize = header[3].parse().map_err(|_| bad("n"))?;
        let k: usize = header[4].parse().map_err(|_| bad("k"))?;
        let seed: u64 = header[5].parse().map_err(|_| bad("seed"))?;
        let mut sections: Vec<(String, DenseMatrix)> = Vec::new();
        while let Some(line) = lines.next() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(line));
            }
            let rows: usize = f[1].parse().map_err(|_| bad(line))?;
            let cols: usize = f[2].parse().map_err(|_| bad(line))?;
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows * cols {
                let l = lines.next().ok_or_else(|| bad("truncated section"))?;
                let mut it = l.split_whitespace().map(str::parse::<f64>);
                match (it.next(), it.next()) {
                    (Some(Ok(re)), Some(Ok(im))) => data.push(C64::new(re, im)),
                    _ => return Err(bad(l)),
                }
            }
            sections.push((f[0].to_string(), DenseMatrix::from_rows(rows, cols, data)));
        }
        let mut take = |name: &str, rows: usize, cols: usize| -> Result<DenseMatrix, CliError> {
            let i = sections.iter().position(|(s, _)| s == name).ok_or_else(|| bad(&format!("missing section {name}")))?;
            let (_, m) = sections.swap_remove(i);
            if m.shape() != (rows, cols) {
                return Err(bad(&format!("section {name} has shape {:?}", m.shape())));
            }
            Ok(m)
        };
        let problem = match kind {
            Kind::Diag => {
                let d = take("D", n, 1)?.data().to_vec();
                Problem::Diagonal { d, u: take("U", n, k)?, v: take("V", n, k)? }
            }
            Kind::Cmv => Problem::Cmv { g: take("G", n, n)?, z: take("Z", n, k)?, k },
            Kind::Hess => Problem::BlockHessenberg { h: take("H", n, n)?, z: take("Z", n, k)?, k },
        };
        Ok(ProblemFile { kind, seed, problem })
    }
}

/// One row of a run report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "normA")]
    pub norm_a: f64,
    #[serde(rename = "eps_P")]
    pub eps_p: f64,
    #[serde(rename = "eps_B")]
    pub eps_b: f64,
    #[serde(rename = "eps_H")]
    pub eps_h: f64,
    pub time_ms: f64,
    pub rotations: u64,
}

pub const CSV_HEADER: &str = "n,k,normA,eps_P,eps_B,eps_H,time_ms,rotations";

pub fn reports_to_csv(reports: &[RunReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{}",
            r.n, r.k, r.norm_a, r.eps_p, r.eps_b, r.eps_h, r.time_ms, r.rotations
        );
    }
    out
}

pub fn reports_from_csv(text: &str) -> Result<Vec<RunReport>, CliError> {
    let bad = |s: &str| CliError::Io(format!("malformed report: {s}"));
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(bad("header"));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 8 {
                return Err(bad(l));
            }
            let real = |s: &str| s.parse::<f64>().map_err(|_| bad(l));
            Ok(RunReport {
                n: f[0].parse().map_err(|_| bad(l))?,
                k: f[1].parse().map_err(|_| bad(l))?,
                norm_a: real(f[2])?,
                eps_p: real(f[3])?,
                eps_b: real(f[4])?,
                eps_h: real(f[5])?,
                time_ms: real(f[6])?,
                rotations: f[7].parse().map_err(|_| bad(l))?,
            })
        })
        .collect()
}

pub fn reports_to_json(reports: &[RunReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

/// Result of running the pipeline on one problem.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub reduced: ReductionState,
    /// Dense represented matrix `S A S^H`.
    pub represented: DenseMatrix,
    /// Dense reconstructions after each stage, embedded first.
    pub stage_dense: Vec<DenseMatrix>,
}

/// Builds, embeds and reduces; times the embedding and the three steps
/// only.
pub fn run_problem(problem: &Problem) -> Result<RunOutcome, Error> {
    let (form, _) = problem.build()?;
    let mut stage_dense = Vec::with_capacity(4);
    let mut elapsed = 0.0;

    let clock = Instant::now();
    let s0 = ReductionState::from_embedded(&embed(&form)?);
    elapsed += clock.elapsed().as_secs_f64();
    stage_dense.push(s0.reconstruct());

    let clock = Instant::now();
    let s1 = step1(s0)?;
    elapsed += clock.elapsed().as_secs_f64();
    stage_dense.push(s1.reconstruct());

    let clock = Instant::now();
    let s2 = step2(s1)?;
    elapsed += clock.elapsed().as_secs_f64();
    stage_dense.push(s2.reconstruct());

    let clock = Instant::now();
    let s3 = step3(s2)?;
    elapsed += clock.elapsed().as_secs_f64();
    stage_dense.push(s3.reconstruct());

    let represented = form.to_dense();
    let metrics = backward_errors(&represented, &stage_dense[2], &s3);
    let report = RunReport {
        n: form.n,
        k: form.k,
        norm_a: metrics.norm_a,
        eps_p: metrics.eps_p,
        eps_b: metrics.eps_b,
        eps_h: metrics.eps_h,
        time_ms: elapsed * 1e3,
        rotations: s3.stats.rotations(),
    };
    Ok(RunOutcome { report, reduced: s3, represented, stage_dense })
}

/// Wall time in milliseconds of embedding plus the three steps.
pub fn time_pipeline(problem: &Problem) -> Result<(f64, u64), Error> {
    let (form, _) = problem.build()?;
    let clock = Instant::now();
    let s = step3(step2(step1(ReductionState::from_embedded(&embed(&form)?))?)?)?;
    Ok((clock.elapsed().as_secs_f64() * 1e3, s.stats.rotations()))
}

/// Largest eigenvalue mismatch between the reduced matrix and the dense
/// oracle on the input, with `k` zeros added for the embedding.
pub fn spectrum_check(problem: &Problem, reduced: &ReductionState) -> Result<f64, Error> {
    let mut h = reduced.reconstruct();
    let (rows, cols) = h.shape();
    for i in 0..rows {
        for j in 0..cols {
            if i > j + 1 {
                h[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    let got = eig_oracle(&h)?;
    let mut want = eig_oracle(&hessenberg_oracle(&problem.to_dense()).0)?;
    want.extend(std::iter::repeat_n(C64::new(0.0, 0.0), reduced.k));
    Ok(spectrum_distance(&got, &want))
}

/// One row of a timing sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingRow {
    pub k: usize,
    pub median_ms: f64,
    pub ratio: Option<f64>,
    pub rotations: u64,
}

pub fn timing_sweep(kind: Kind, n: usize, ks: &[usize], reps: usize, seed: u64, scale: f64) -> Result<Vec<TimingRow>, CliError> {
    if reps < 3 {
        return Err(CliError::Usage("a timing sweep needs at least 3 repetitions".into()));
    }
    let mut rows: Vec<TimingRow> = Vec::new();
    for &k in ks {
        let mut times = Vec::with_capacity(reps);
        let mut rotations = 0;
        for r in 0..reps {
            let spec = ProblemSpec { kind, n, k, scale, seed: seed + r as u64 };
            let (t, rot) = time_pipeline(&spec.generate()?)?;
            times.push(t);
            rotations = rot;
        }
        times.sort_by(f64::total_cmp);
        let median_ms = times[reps / 2];
        let ratio = rows.last().map(|p| median_ms / p.median_ms);
        rows.push(TimingRow { k, median_ms, ratio, rotations });
    }
    Ok(rows)
}

pub fn timing_to_csv(rows: &[TimingRow]) -> String {
    let mut out = String::from("k,median_ms,ratio,rotations\n");
    for r in rows {
        let ratio = r.ratio.map_or(String::new(), |x| format!("{x:.4}"));
        let _ = writeln!(out, "{},{:.6e},{},{}", r.k, r.median_ms, ratio, r.rotations);
    }
    out
}

#[derive(Parser, Debug)]
#[command(name = "lfr", version, about = "Hessenberg reduction of unitary plus low-rank matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "diag")]
    pub kind: Kind,
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Norm scaling of the low-rank part (at least 1).
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, env = "LFR_SEED", default_value_t = 1)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a random problem file.
    Gen {
        #[command(flatten)]
        spec: GenArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce problems and report backward errors.
    Run {
        /// Problem file; without it problems are generated from the flags.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        spec: GenArgs,
        /// Number of consecutive seeds to generate.
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compare eigenvalues against the dense oracle.
        #[arg(long)]
        verify: bool,
    },
    /// Median pipeline time over several seeds for a list of k.
    Bench {
        #[arg(long, value_enum, default_value = "diag")]
        kind: Kind,
        #[arg(long, default_value_t = 512)]
        n: usize,
        /// Comma separated block sizes.
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, env = "LFR_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

impl GenArgs {
    fn spec(&self) -> ProblemSpec {
        ProblemSpec { kind: self.kind, n: self.n, k: self.k, scale: self.scale, seed: self.seed }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen { spec, out } => {
            let s = spec.spec();
            let file = ProblemFile { kind: s.kind, seed: s.seed, problem: s.generate()? };
            emit(&file.to_text(), out.as_deref())
        }
        Command::Run { input, spec, reps, format, out, verify } => {
            let problems: Vec<Problem> = match input {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    vec![ProblemFile::parse(&text)?.problem]
                }
                None => {
                    let base = spec.spec();
                    (0..reps.max(1))
                        .map(|r| ProblemSpec { seed: base.seed + r as u64, ..base }.generate())
                        .collect::<Result<_, _>>()?
                }
            };
            if verify && problems.iter().any(|p| p.n() > VERIFY_LIMIT) {
                return Err(CliError::Usage(format!("--verify is limited to n <= {VERIFY_LIMIT}")));
            }
            let mut reports = Vec::with_capacity(problems.len());
            for p in &problems {
                let outcome = run_problem(p)?;
                if verify {
                    let dist = spectrum_check(p, &outcome.reduced)?;
                    if dist > 1e-8 {
                        return Err(CliError::Numerical(format!("eigenvalues differ from the dense oracle by {dist:.3e}")));
                    }
                    eprintln!("verify: n={} k={} eigenvalue distance {dist:.3e}", p.n(), p.k());
                }
                reports.push(outcome.report);
            }
            let text = match format {
                Format::Csv => reports_to_csv(&reports),
                Format::Json => reports_to_json(&reports) + "\n",
            };
            emit(&text, out.as_deref())
        }
        Command::Bench { kind, n, k, scale, seed, reps, format, out } => {
            for &kk in &k {
                ProblemSpec { kind, n, k: kk, scale, seed }.validate()?;
            }
            let rows = timing_sweep(kind, n, &k, reps, seed, scale)?;
            let text = match format {
                Format::Csv => timing_to_csv(&rows),
                Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
            };
            emit(&text, out.as_deref())
        }
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lfr: {e}");
            e.exit_code()
        }
    }
}
