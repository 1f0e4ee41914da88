//! Seeded benchmark over a grid of game shapes.
//!
//! Each cell is one `(shape, seed)` game from [`random_game`], solved with
//! the default driver. Cells run on a rayon pool whose size is capped by
//! `MLGAME_THREADS`; rows are reported in grid order.

use std::io::Write;

use mlgame_core::driver::{solve_game, DriverOptions};
use mlgame_core::game::random_game;
use rayon::prelude::*;
use serde::Serialize;

pub const CSV_HEADER: [&str; 12] = [
    "shape", "m", "solved", "attempted", "AI", "MinI", "MaxI", "AT", "MinT", "MaxT", "ARes", "restarts",
];

/// Three-player shapes with `m = 10` and `m = 20`.
pub const DEFAULT_GRID: [[usize; 3]; 18] = [
    [2, 2, 6],
    [2, 3, 5],
    [2, 4, 4],
    [3, 5, 2],
    [3, 2, 5],
    [4, 4, 2],
    [4, 2, 4],
    [5, 3, 2],
    [6, 2, 2],
    [3, 5, 12],
    [3, 8, 9],
    [3, 12, 5],
    [4, 6, 10],
    [4, 8, 8],
    [4, 10, 6],
    [6, 5, 9],
    [8, 4, 8],
    [12, 5, 3],
];

pub fn default_grid() -> Vec<Vec<usize>> {
    DEFAULT_GRID.iter().map(|s| s.to_vec()).collect()
}

/// Parses `"2x2x6;3,5,12 4x4x2"`: shapes separated by `;` or whitespace,
/// entries by `x` or `,`.
pub fn parse_grid(spec: &str) -> Result<Vec<Vec<usize>>, String> {
    let mut grid = Vec::new();
    for item in spec.split(|c: char| c == ';' || c.is_whitespace()).filter(|s| !s.is_empty()) {
        let dims = item
            .split(['x', ','])
            .map(|d| d.trim().parse::<usize>().map_err(|_| format!("bad shape entry {d:?} in {item:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        if dims.len() < 2 || dims.contains(&0) {
            return Err(format!("shape {item:?} needs at least 2 positive entries"));
        }
        grid.push(dims);
    }
    if grid.is_empty() {
        return Err("empty grid".into());
    }
    Ok(grid)
}

pub fn shape_label(dims: &[usize]) -> String {
    dims.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub seed: u64,
    pub certified: bool,
    pub iterations: usize,
    pub seconds: f64,
    pub h_norm: f64,
    pub restarts: usize,
    pub shift: f64,
    /// Every accepted step kept μ > 0 and decreased ‖H‖.
    pub trace_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub shape: Vec<usize>,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

fn stats(values: impl Iterator<Item = f64>) -> Option<Stats> {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    Some(Stats {
        mean: v.iter().sum::<f64>() / v.len() as f64,
        min: v.iter().copied().fold(f64::INFINITY, f64::min),
        max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

impl Row {
    pub fn m(&self) -> usize {
        self.shape.iter().sum()
    }

    pub fn solved(&self) -> usize {
        self.cells.iter().filter(|c| c.certified).count()
    }

    fn solved_cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.certified)
    }

    pub fn iterations(&self) -> Option<Stats> {
        stats(self.solved_cells().map(|c| c.iterations as f64))
    }

    pub fn seconds(&self) -> Option<Stats> {
        stats(self.solved_cells().map(|c| c.seconds))
    }

    pub fn mean_residual(&self) -> Option<f64> {
        stats(self.solved_cells().map(|c| c.h_norm)).map(|s| s.mean)
    }

    pub fn restarts(&self) -> usize {
        self.cells.iter().map(|c| c.restarts).sum()
    }

    pub fn csv_record(&self) -> Vec<String> {
        let opt = |v: Option<f64>, f: fn(f64) -> String| v.map_or(String::new(), f);
        let it = self.iterations();
        let t = self.seconds();
        let fix2 = |v: f64| format!("{v:.2}");
        let int = |v: f64| format!("{v:.0}");
        let secs = |v: f64| format!("{v:.4}");
        let sci = |v: f64| format!("{v:.2e}");
        vec![
            shape_label(&self.shape),
            self.m().to_string(),
            self.solved().to_string(),
            self.cells.len().to_string(),
            opt(it.map(|s| s.mean), fix2),
            opt(it.map(|s| s.min), int),
            opt(it.map(|s| s.max), int),
            opt(t.map(|s| s.mean), secs),
            opt(t.map(|s| s.min), secs),
            opt(t.map(|s| s.max), secs),
            opt(self.mean_residual(), sci),
            self.restarts().to_string(),
        ]
    }
}

/// Pool size from `MLGAME_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("MLGAME_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn run_cell(dims: &[usize], seed: u64, opts: &DriverOptions<f64>) -> Cell {
    let game = random_game::<f64>(dims, seed).expect("grid shapes are validated");
    match solve_game(&game, opts) {
        Ok(sol) => Cell {
            seed,
            certified: sol.certified,
            iterations: sol.report.iterations,
            seconds: sol.wall_time.as_secs_f64(),
            h_norm: sol.report.h_norm,
            restarts: sol.restarts,
            shift: sol.shift,
            trace_ok: sol
                .report
                .trace
                .iter()
                .all(|r| r.mu > 0.0 && r.mu_next > 0.0 && r.h_next < r.h_norm),
        },
        Err(_) => Cell {
            seed,
            certified: false,
            iterations: 0,
            seconds: 0.0,
            h_norm: f64::NAN,
            restarts: 0,
            shift: 0.0,
            trace_ok: true,
        },
    }
}

/// Runs seeds `1..=seeds` for every shape.
pub fn run(grid: &[Vec<usize>], seeds: u64, opts: &DriverOptions<f64>) -> Vec<Row> {
    let jobs: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|r| (1..=seeds).map(move |s| (r, s)))
        .collect();
    let work = || -> Vec<Cell> {
        jobs.par_iter()
            .map(|&(r, s)| run_cell(&grid[r], s, opts))
            .collect()
    };
    let cells = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(work),
        None => work(),
    };
    let mut rows: Vec<Row> = grid
        .iter()
        .map(|s| Row {
            shape: s.clone(),
            cells: Vec::new(),
        })
        .collect();
    for ((r, _), cell) in jobs.into_iter().zip(cells) {
        rows[r].cells.push(cell);
    }
    rows
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.csv_record())?;
    }
    w.flush()?;
    Ok(())
}
