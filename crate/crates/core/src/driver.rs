//! End-to-end equilibrium search: solve the complementarity problem, map the
//! solution back to a profile and certify it.
//!
//! Adding a constant to every payoff leaves the equilibria unchanged but
//! changes the problem the solver sees. When the whole μ₀ schedule fails on
//! the game as given, the driver retries on shifted copies. Shift `τ` of the
//! fallback list adds `τ + max(0, -min_entry)`, so the smallest shifted
//! entry is at least `τ`.

use std::time::{Duration, Instant};

use crate::bridge::{certify, tcp_to_nash, CorrespondenceResult, Tolerances};
use crate::error::{check_len, Result};
use crate::game::{EquilibriumValues, MixedProfile, MultilinearGame};
use crate::scalar::{lit, Scalar};
use crate::solver::{default_start, solve, SolveReport, SolverConfig};
use crate::tcp::TcpInstance;

#[derive(Debug, Clone, PartialEq)]
pub struct DriverOptions<T> {
    pub solver: SolverConfig<T>,
    /// Starting point; `0.01 e` when absent.
    pub y0: Option<Vec<T>>,
    /// Apply [`MultilinearGame::auto_shift`] before the first attempt.
    pub auto_shift: bool,
    /// Fallback shift levels, tried in order after a failure.
    pub fallback_shifts: Vec<T>,
    pub tolerances: Tolerances<T>,
}

impl<T: Scalar> Default for DriverOptions<T> {
    fn default() -> Self {
        let tolerances = Tolerances::default();
        Self {
            solver: SolverConfig {
                residual_tol: Some(tolerances.tcp_residual * lit(1e-3)),
                ..SolverConfig::default()
            },
            y0: None,
            auto_shift: false,
            fallback_shifts: [1.0, 3.0, 10.0, 30.0].iter().map(|&v| lit(v)).collect(),
            tolerances,
        }
    }
}

impl<T: Scalar> DriverOptions<T> {
    /// Only the μ₀ schedule on the game as given, stopping at `‖H‖ <= tol`.
    pub fn plain() -> Self {
        Self {
            solver: SolverConfig::default(),
            fallback_shifts: Vec::new(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution<T> {
    /// Solver report for the reported shift.
    pub report: SolveReport<T>,
    /// Constant added to every payoff before solving.
    pub shift: T,
    /// Profile, residual and gaps; `None` when `y` has a vanishing block.
    /// Residual and `y` refer to the shifted game; gaps do not depend on it.
    pub correspondence: Option<CorrespondenceResult<T>>,
    /// Equilibrium values in the original game.
    pub values: Option<EquilibriumValues<T>>,
    pub certified: bool,
    /// Shifted games tried, including the first.
    pub shifts_tried: usize,
    /// Solver attempts beyond the first, over all shifts.
    pub restarts: usize,
    pub total_iterations: usize,
    pub wall_time: Duration,
}

impl<T: Scalar> Solution<T> {
    pub fn profile(&self) -> Option<&MixedProfile<T>> {
        self.correspondence.as_ref().map(|c| &c.profile)
    }
}

fn shift_sequence<T: Scalar>(game: &MultilinearGame<T>, opts: &DriverOptions<T>) -> Result<Vec<T>> {
    let first = if opts.auto_shift {
        game.auto_shift()?.1
    } else {
        T::zero()
    };
    let base = (-game.min_entry()).max(T::zero());
    let mut out = vec![first];
    for &tau in &opts.fallback_shifts {
        let c = tau + base;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

/// Solves `game` and certifies the result, retrying on shifted games.
pub fn solve_game<T: Scalar>(game: &MultilinearGame<T>, opts: &DriverOptions<T>) -> Result<Solution<T>> {
    opts.solver.validate()?;
    if let Some(y0) = &opts.y0 {
        check_len("y0", game.total_strategies(), y0.len())?;
    }
    let start = Instant::now();
    let mut restarts = 0;
    let mut total_iterations = 0;
    let mut tried = 0;
    let mut best: Option<Solution<T>> = None;
    let shifts = shift_sequence(game, opts)?;
    for (i, &c) in shifts.iter().enumerate() {
        let shifted = if c == T::zero() { game.clone() } else { game.shift(c)? };
        let tcp = TcpInstance::new(shifted.clone());
        let y0 = opts.y0.clone().unwrap_or_else(|| default_start(&tcp));
        let report = solve(&tcp, &y0, &opts.solver)?;
        tried = i + 1;
        restarts += report.restarts_used + usize::from(i > 0);
        total_iterations += report.total_iterations;

        let correspondence = match tcp_to_nash(&shifted, &report.y) {
            Ok(x) => Some(certify(&shifted, &x, &report.y, opts.tolerances)?),
            Err(_) => None,
        };
        let values = match &correspondence {
            Some(c) => Some(game.values(&c.profile)?),
            None => None,
        };
        let certified = report.converged() && correspondence.as_ref().is_some_and(|c| c.certified);
        let candidate = Solution {
            report,
            shift: c,
            correspondence,
            values,
            certified,
            shifts_tried: 0,
            restarts,
            total_iterations,
            wall_time: Duration::ZERO,
        };
        let better = best
            .as_ref()
            .is_none_or(|b| candidate.report.h_norm < b.report.h_norm);
        if certified || better {
            best = Some(candidate);
        }
        if certified {
            break;
        }
    }
    let mut sol = best.expect("shift sequence is never empty");
    sol.shifts_tried = tried;
    sol.restarts = restarts;
    sol.total_iterations = total_iterations;
    sol.wall_time = start.elapsed();
    Ok(sol)
}
