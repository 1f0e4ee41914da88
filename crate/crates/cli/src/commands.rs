//! Command implementations. Every command writes to caller-supplied streams
//! and returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mlgame_core::driver::{solve_game, DriverOptions, Solution};
use mlgame_core::game::{random_game, GENERATOR_NAME};
use mlgame_core::tcp::{TcpInstance, DEFAULT_BIG_TENSOR_BUDGET};
use serde::Serialize;

use crate::bench;
use crate::format::{self, FormatError, GameFile, GeneratorInfo, ProfileFile, TensorFile, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mlgame", version, about = "Equilibria of multilinear games via tensor complementarity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a game file and certify the equilibrium.
    Solve(SolveArgs),
    /// Check a profile against a game: per-player gaps and values.
    Verify(VerifyArgs),
    /// Write a random game with entries in [0, 1).
    Generate(GenerateArgs),
    /// Solve seeded random games over a grid of shapes and report statistics.
    Bench(BenchArgs),
    /// Write the cubical complementarity tensor and q of a game.
    ExportTcp(ExportArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub game: PathBuf,
    /// Initial smoothing parameter of the first attempt.
    #[arg(long)]
    pub mu0: Option<f64>,
    /// Stop when the merit norm falls below this.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Starting point: one value for every entry, or a comma-separated list.
    #[arg(long)]
    pub y0: Option<String>,
    /// Include the iteration trace.
    #[arg(long)]
    pub trace: bool,
    /// Shift payoffs to be at least 1 before the first attempt.
    #[arg(long)]
    pub auto_shift: bool,
    /// Do not retry on shifted games after the restart schedule fails.
    #[arg(long)]
    pub no_shift_fallback: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub game: PathBuf,
    pub profile: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, num_args = 2.., required = true)]
    pub shape: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Shapes such as "2x2x6;3x5x12"; defaults to the 18 three-player rows.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub game: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Largest number of tensor entries allowed.
    #[arg(long, default_value_t = DEFAULT_BIG_TENSOR_BUDGET)]
    pub budget: u128,
}

/// Parses arguments (including the program name) and runs the command.
pub fn run_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            // --help and --version arrive here too
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                EXIT_INPUT
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Solve(a) => solve(&a, out),
        Command::Verify(a) => verify(&a, out),
        Command::Generate(a) => generate(&a, out),
        Command::Bench(a) => bench_cmd(&a, out),
        Command::ExportTcp(a) => export(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        input(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        input(e)
    }
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: e.to_string(),
    }
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| input(format!("{}: {e}", p.display()))),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn parse_y0(spec: &str, m: usize) -> Result<Vec<f64>, Failure> {
    let values = spec
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| input(format!("--y0: cannot parse {v:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(input("--y0: entries must be finite"));
    }
    match values.len() {
        1 => Ok(vec![values[0]; m]),
        n if n == m => Ok(values),
        n => Err(input(format!("--y0: expected 1 or {m} values, found {n}"))),
    }
}

#[derive(Debug, Serialize)]
pub struct TraceJson {
    pub attempt: usize,
    pub k: usize,
    pub mu: f64,
    pub h_norm: f64,
    pub step: f64,
    pub h_next: f64,
}

#[derive(Debug, Serialize)]
pub struct SolveJson {
    pub schema_version: u32,
    pub status: &'static str,
    pub certified: bool,
    pub iterations: usize,
    pub total_iterations: usize,
    pub restarts: usize,
    pub shift_applied: f64,
    pub mu0_used: f64,
    pub mu: f64,
    pub beta: f64,
    pub h_norm: f64,
    pub tcp_residual: f64,
    pub max_gap: Option<f64>,
    pub gaps: Option<Vec<f64>>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub profile: Option<Vec<Vec<f64>>>,
    pub lambdas: Option<Vec<f64>>,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceJson>>,
}

impl SolveJson {
    pub fn new(sol: &Solution<f64>, with_trace: bool) -> Self {
        let r = &sol.report;
        let corr = sol.correspondence.as_ref();
        Self {
            schema_version: SCHEMA_VERSION,
            status: r.status.as_str(),
            certified: sol.certified,
            iterations: r.iterations,
            total_iterations: sol.total_iterations,
            restarts: sol.restarts,
            shift_applied: sol.shift,
            mu0_used: r.mu0_used,
            mu: r.mu,
            beta: r.beta,
            h_norm: r.h_norm,
            tcp_residual: r.tcp_residual,
            max_gap: corr.map(|c| c.max_gap),
            gaps: corr.map(|c| c.gaps.clone()),
            y: r.y.clone(),
            s: r.s.clone(),
            profile: corr.map(|c| c.profile.blocks().to_vec()),
            lambdas: sol.values.as_ref().map(|v| v.lambdas.clone()),
            wall_time_s: sol.wall_time.as_secs_f64(),
            trace: with_trace.then(|| {
                r.trace
                    .iter()
                    .map(|t| TraceJson {
                        attempt: t.attempt,
                        k: t.k,
                        mu: t.mu,
                        h_norm: t.h_norm,
                        step: t.step,
                        h_next: t.h_next,
                    })
                    .collect()
            }),
        }
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", items.join(", "))
}

fn solve(a: &SolveArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (_, game) = format::read_game(&a.game)?;
    let mut opts = DriverOptions::default();
    if let Some(v) = a.mu0 {
        opts.solver.mu0 = v;
    }
    if let Some(v) = a.tol {
        opts.solver.tol = v;
    }
    if let Some(v) = a.max_iter {
        opts.solver.max_iter = v;
    }
    opts.solver.validate().map_err(input)?;
    if let Some(spec) = &a.y0 {
        opts.y0 = Some(parse_y0(spec, game.total_strategies())?);
    }
    opts.auto_shift = a.auto_shift;
    if a.no_shift_fallback {
        opts.fallback_shifts.clear();
    }
    let sol = solve_game(&game, &opts).map_err(|e| Failure {
        code: EXIT_SOLVER,
        message: e.to_string(),
    })?;
    let code = if sol.certified { EXIT_OK } else { EXIT_SOLVER };
    if a.json {
        out.write_all(format::to_json(&SolveJson::new(&sol, a.trace)).as_bytes())?;
        return Ok(code);
    }
    let r = &sol.report;
    writeln!(out, "status: {} ({})", r.status.as_str(), if sol.certified { "certified" } else { "not certified" })?;
    writeln!(
        out,
        "iterations: {} (total {}, restarts {}, mu0 {})",
        r.iterations, sol.total_iterations, sol.restarts, r.mu0_used
    )?;
    writeln!(out, "shift applied: {}", sol.shift)?;
    writeln!(out, "||H||: {:.3e}  tcp residual: {:.3e}", r.h_norm, r.tcp_residual)?;
    writeln!(out, "y: {}", fmt_vec(&r.y))?;
    writeln!(out, "s: {}", fmt_vec(&r.s))?;
    match &sol.correspondence {
        Some(c) => {
            for (k, b) in c.profile.blocks().iter().enumerate() {
                writeln!(out, "x[{}]: {}", k + 1, fmt_vec(b))?;
            }
            if let Some(v) = &sol.values {
                writeln!(out, "lambda: {}", fmt_vec(&v.lambdas))?;
            }
            writeln!(out, "max gap: {:.3e}", c.max_gap)?;
        }
        None => writeln!(out, "x: unavailable (a block of y vanishes)")?,
    }
    writeln!(out, "wall time: {:.4} s", sol.wall_time.as_secs_f64())?;
    if a.trace {
        writeln!(out, "{:>7} {:>4} {:>11} {:>11} {:>9} {:>11}", "attempt", "k", "mu", "||H||", "step", "||H'||")?;
        for t in &r.trace {
            writeln!(
                out,
                "{:>7} {:>4} {:>11.3e} {:>11.3e} {:>9.4} {:>11.3e}",
                t.attempt, t.k, t.mu, t.h_norm, t.step, t.h_next
            )?;
        }
    }
    Ok(code)
}

#[derive(Debug, Serialize)]
pub struct VerifyJson {
    pub schema_version: u32,
    pub equilibrium: bool,
    pub tol: f64,
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    pub lambdas: Vec<f64>,
}

fn verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (_, game) = format::read_game(&a.game)?;
    let label = a.profile.display().to_string();
    let pf: ProfileFile = format::parse(&format::read_text(&a.profile)?, &label)?;
    let x = pf.to_profile(&game, &label)?;
    let gaps = game.best_response_gap(&x).map_err(input)?;
    let lambdas = game.values(&x).map_err(input)?.lambdas;
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    let ok = max_gap <= a.tol;
    if a.json {
        let j = VerifyJson {
            schema_version: SCHEMA_VERSION,
            equilibrium: ok,
            tol: a.tol,
            gaps,
            max_gap,
            lambdas,
        };
        out.write_all(format::to_json(&j).as_bytes())?;
    } else {
        for (k, (g, l)) in gaps.iter().zip(&lambdas).enumerate() {
            writeln!(out, "player {}: gap {:.3e}  lambda {:.6}", k + 1, g, l)?;
        }
        writeln!(out, "max gap: {max_gap:.3e} ({})", if ok { "equilibrium" } else { "not an equilibrium" })?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_SOLVER })
}

fn generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let game = random_game::<f64>(&a.shape, a.seed).map_err(input)?;
    let mut file = GameFile::from_game(&game);
    file.name = Some(format!("random {} seed {}", bench::shape_label(&a.shape), a.seed));
    file.generator = Some(GeneratorInfo {
        name: GENERATOR_NAME.into(),
        seed: a.seed,
    });
    write_output(a.output.as_deref(), &format::to_json(&file), out)?;
    Ok(EXIT_OK)
}

fn bench_cmd(a: &BenchArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let grid = match &a.grid {
        Some(spec) => bench::parse_grid(spec).map_err(|e| input(format!("--grid: {e}")))?,
        None => bench::default_grid(),
    };
    if a.seeds == 0 {
        return Err(input("--seeds must be at least 1"));
    }
    let start = Instant::now();
    let rows = bench::run(&grid, a.seeds, &DriverOptions::default());
    let mut buf = Vec::new();
    bench::write_csv(&rows, &mut buf).map_err(input)?;
    match &a.csv {
        Some(path) => {
            std::fs::write(path, &buf).map_err(|e| input(format!("{}: {e}", path.display())))?;
            let solved: usize = rows.iter().map(bench::Row::solved).sum();
            let total: usize = rows.iter().map(|r| r.cells.len()).sum();
            writeln!(
                out,
                "{solved}/{total} certified over {} shapes in {:.2} s; wrote {}",
                rows.len(),
                start.elapsed().as_secs_f64(),
                path.display()
            )?;
        }
        None => out.write_all(&buf)?,
    }
    Ok(EXIT_OK)
}

fn export(a: &ExportArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (_, game) = format::read_game(&a.game)?;
    let tcp = TcpInstance::new(game);
    let big = tcp.assemble_big_tensor(a.budget).map_err(input)?;
    let file = TensorFile::new(&big, tcp.q());
    write_output(a.output.as_deref(), &format::to_json(&file), out)?;
    Ok(EXIT_OK)
}
