//! Smoothing Newton method for the complementarity problem.
//!
//! The problem `y >= 0, s = F(y) >= 0, <y, s> = 0` is rewritten as the root
//! of
//!
//! ```text
//! H(μ, y, s) = (μ, s - F(y), Φ(μ, y, s) + μ y),
//! φ(μ, a, b) = a + b - sqrt((a - b)^2 + 4μ),
//! ```
//!
//! which is smooth for `μ > 0`. Each iteration solves the perturbed Newton
//! system `H(z) + H'(z) Δz = (1/β) ‖H(z)‖ e0` and backtracks on the grid
//! `1, δ, δ², ...` until `‖H(z + λΔz)‖ <= (1 - σ(1 - 1/β)λ) ‖H(z)‖`. The
//! first component of the Newton system decouples, so `μ` stays positive
//! along the whole trajectory.
//!
//! Points `z` are flat vectors `[μ, y_1..y_m, s_1..s_m]`.

use std::time::{Duration, Instant};

use crate::error::{check_len, Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::scalar::{lit, norm2, to_f64, Scalar};
use crate::tcp::{complementarity_residual, TcpInstance};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    /// Backtracking ratio δ ∈ (0, 1).
    pub delta: T,
    /// Armijo constant σ ∈ (0, 1).
    pub sigma: T,
    /// Initial smoothing parameter of the first attempt.
    pub mu0: T,
    /// Stop when `‖H(z)‖ <= tol`.
    pub tol: T,
    pub max_iter: usize,
    /// Largest exponent `j` tried in the step `δ^j`.
    pub max_linesearch: usize,
    /// μ₀ values tried in order after a failed attempt.
    pub restart_mus: Vec<T>,
    /// LU pivots smaller than this mark the Newton system singular.
    pub pivot_tol: T,
    /// When set, an iterate with `‖H‖ <= tol` is accepted only once the
    /// complementarity residual of `y` is also below this value; until then
    /// the same iteration continues. A failure after `‖H‖ <= tol` was reached
    /// still counts as converged.
    pub residual_tol: Option<T>,
    /// Iterations allowed after `‖H‖ <= tol` is first reached while chasing
    /// `residual_tol`.
    pub max_refine_iter: usize,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            delta: lit(0.75),
            sigma: lit(1e-4),
            mu0: lit(0.1),
            tol: lit(1e-6),
            max_iter: 200,
            max_linesearch: 60,
            restart_mus: [0.01, 6.1, 9.1, 12.1, 15.1, 18.1]
                .iter()
                .map(|&v| lit(v))
                .collect(),
            pivot_tol: lit(1e-14),
            residual_tol: None,
            max_refine_iter: 20,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: T| v > T::zero() && v < T::one();
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !unit(self.delta) {
            return bad("delta must lie in (0, 1)");
        }
        if !unit(self.sigma) {
            return bad("sigma must lie in (0, 1)");
        }
        if !(self.mu0 > T::zero()) || self.restart_mus.iter().any(|&m| !(m > T::zero())) {
            return bad("every mu0 must be positive");
        }
        if !(self.tol > T::zero()) {
            return bad("tol must be positive");
        }
        if self.residual_tol.is_some_and(|r| !(r > T::zero())) {
            return bad("residual_tol must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        Ok(())
    }

    /// The μ₀ sequence: `mu0` followed by `restart_mus`.
    pub fn mu_schedule(&self) -> Vec<T> {
        std::iter::once(self.mu0)
            .chain(self.restart_mus.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    LineSearchFailure,
    SingularSystem,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::LineSearchFailure => "linesearch_failure",
            SolveStatus::SingularSystem => "singular_system",
        }
    }
}

/// One accepted step: iterate `k` had smoothing parameter `mu` and residual
/// norm `h_norm`, and the step length `step` led to `h_next`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<T> {
    pub attempt: usize,
    pub k: usize,
    pub mu: T,
    pub h_norm: T,
    pub step: T,
    pub h_next: T,
    pub mu_next: T,
}

#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub status: SolveStatus,
    pub y: Vec<T>,
    pub s: Vec<T>,
    pub mu: T,
    /// `‖H(z)‖` at the reported iterate.
    pub h_norm: T,
    /// Complementarity residual of `y` for the unsmoothed problem.
    pub tcp_residual: T,
    /// Iterations of the reported attempt.
    pub iterations: usize,
    /// Iterations summed over all attempts.
    pub total_iterations: usize,
    pub restarts_used: usize,
    pub mu0_used: T,
    pub beta: T,
    pub wall_time: Duration,
    pub trace: Vec<TraceRecord<T>>,
}

impl<T: Scalar> SolveReport<T> {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// `φ(μ, a, b) = a + b - sqrt((a - b)^2 + 4μ)`; equals `2 min(a, b)` at μ = 0.
#[inline]
pub fn phi<T: Scalar>(mu: T, a: T, b: T) -> T {
    let d = a - b;
    a + b - (d * d + lit::<T>(4.0) * mu).sqrt()
}

/// `(∂φ/∂a, ∂φ/∂b, ∂φ/∂μ)` for μ > 0.
#[inline]
pub fn phi_partials<T: Scalar>(mu: T, a: T, b: T) -> (T, T, T) {
    let d = a - b;
    let r = (d * d + lit::<T>(4.0) * mu).sqrt();
    (T::one() - d / r, T::one() + d / r, -lit::<T>(2.0) / r)
}

fn unpack<T: Scalar>(t: &TcpInstance<T>, z: &[T]) -> Result<(T, usize)> {
    let m = t.dim();
    check_len("z = (mu, y, s)", 1 + 2 * m, z.len())?;
    Ok((z[0], m))
}

/// Packs `(μ, y, s)` into a flat point.
pub fn pack<T: Scalar>(mu: T, y: &[T], s: &[T]) -> Vec<T> {
    let mut z = Vec::with_capacity(1 + y.len() + s.len());
    z.push(mu);
    z.extend_from_slice(y);
    z.extend_from_slice(s);
    z
}

/// `H(μ, y, s) = (μ, s - F(y), Φ(μ, y, s) + μ y)`.
pub fn eval_h<T: Scalar>(t: &TcpInstance<T>, z: &[T]) -> Result<Vec<T>> {
    let (mu, m) = unpack(t, z)?;
    let (y, s) = (&z[1..1 + m], &z[1 + m..]);
    let f = t.eval_f(y)?;
    let mut h = Vec::with_capacity(z.len());
    h.push(mu);
    h.extend(s.iter().zip(&f).map(|(&si, &fi)| si - fi));
    h.extend(y.iter().zip(s).map(|(&yi, &si)| phi(mu, yi, si) + mu * yi));
    Ok(h)
}

/// Jacobian of `H`, defined for μ > 0.
pub fn jacobian_h<T: Scalar>(t: &TcpInstance<T>, z: &[T]) -> Result<Matrix<T>> {
    let (mu, m) = unpack(t, z)?;
    if !(mu > T::zero()) {
        return Err(Error::NonpositiveMu(to_f64(mu)));
    }
    let (y, s) = (&z[1..1 + m], &z[1 + m..]);
    let jf = t.jacobian_f(y)?;
    let n = 1 + 2 * m;
    let mut jac = Matrix::zeros(n, n);
    jac[(0, 0)] = T::one();
    for i in 0..m {
        let row = 1 + i;
        for j in 0..m {
            jac[(row, 1 + j)] = -jf[(i, j)];
        }
        jac[(row, 1 + m + i)] = T::one();
    }
    for i in 0..m {
        let row = 1 + m + i;
        let (da, db, dmu) = phi_partials(mu, y[i], s[i]);
        jac[(row, 0)] = dmu + y[i];
        jac[(row, 1 + i)] = da + mu;
        jac[(row, 1 + m + i)] = db;
    }
    Ok(jac)
}

/// Solves `H'(z) Δz = (1/β) ‖H(z)‖ e0 - H(z)` by LU with partial pivoting.
pub fn newton_direction<T: Scalar>(
    t: &TcpInstance<T>,
    z: &[T],
    h: &[T],
    beta: T,
    pivot_tol: T,
) -> Result<Vec<T>> {
    let jac = jacobian_h(t, z)?;
    let target = norm2(h) / beta;
    let mut rhs: Vec<T> = h.iter().map(|&v| -v).collect();
    rhs[0] = rhs[0] + target;
    let dz = Lu::factor(jac, pivot_tol)?.solve(&rhs)?;
    debug_assert!(
        (dz[0] - (target - z[0])).abs() <= lit::<T>(1e-8) * (T::one() + z[0].abs()),
        "μ-row of the Newton system must decouple"
    );
    Ok(dz)
}

/// Outcome of an accepted line search.
#[derive(Debug, Clone)]
pub struct Step<T> {
    pub lambda: T,
    pub z: Vec<T>,
    pub h: Vec<T>,
    pub h_norm: T,
}

/// Largest `λ ∈ {1, δ, δ², ..., δ^max_linesearch}` satisfying the descent
/// test `‖H(z + λΔz)‖ <= (1 - σ(1 - 1/β)λ) ‖H(z)‖`.
pub fn line_search<T: Scalar>(
    t: &TcpInstance<T>,
    z: &[T],
    dz: &[T],
    h_norm: T,
    beta: T,
    config: &SolverConfig<T>,
) -> Result<Step<T>> {
    check_len("direction", z.len(), dz.len())?;
    let slope = config.sigma * (T::one() - T::one() / beta);
    let mut lambda = T::one();
    for _ in 0..=config.max_linesearch {
        let trial: Vec<T> = z.iter().zip(dz).map(|(&a, &d)| a + lambda * d).collect();
        // trial points with non-finite entries are rejected like any other
        if let Ok(h) = eval_h(t, &trial) {
            let hn = norm2(&h);
            if hn.is_finite() && hn <= (T::one() - slope * lambda) * h_norm {
                return Ok(Step {
                    lambda,
                    z: trial,
                    h,
                    h_norm: hn,
                });
            }
        }
        lambda = lambda * config.delta;
    }
    Err(Error::LineSearch(config.max_linesearch))
}

struct Attempt<T> {
    status: SolveStatus,
    z: Vec<T>,
    h_norm: T,
    beta: T,
    iterations: usize,
}

fn run_attempt<T: Scalar>(
    t: &TcpInstance<T>,
    y0: &[T],
    mu0: T,
    attempt: usize,
    config: &SolverConfig<T>,
    trace: &mut Vec<TraceRecord<T>>,
) -> Result<Attempt<T>> {
    let s0 = t.eval_f(y0)?;
    let mut z = pack(mu0, y0, &s0);
    let mut h = eval_h(t, &z)?;
    let mut h_norm = norm2(&h);
    let floor = T::one() + lit(1e-8);
    let beta = (h_norm / mu0).max(floor);
    let mut k = 0;
    let m = t.dim();
    let accepted = |z: &[T], h_norm: T| -> Result<bool> {
        if h_norm > config.tol {
            return Ok(false);
        }
        match config.residual_tol {
            None => Ok(true),
            Some(r) => Ok(t.residual(&z[1..1 + m])? <= r),
        }
    };
    let mut reached: Option<usize> = None;
    let status = loop {
        if accepted(&z, h_norm)? {
            break SolveStatus::Converged;
        }
        if h_norm <= config.tol {
            let k0 = *reached.get_or_insert(k);
            if k - k0 >= config.max_refine_iter {
                break SolveStatus::Converged;
            }
        }
        if k >= config.max_iter {
            break SolveStatus::MaxIter;
        }
        debug_assert!(z[0] > T::zero(), "μ must stay positive");
        let dz = match newton_direction(t, &z, &h, beta, config.pivot_tol) {
            Ok(dz) => dz,
            Err(Error::Singular { .. }) => break SolveStatus::SingularSystem,
            Err(e) => return Err(e),
        };
        let step = match line_search(t, &z, &dz, h_norm, beta, config) {
            Ok(step) => step,
            Err(Error::LineSearch(_)) => break SolveStatus::LineSearchFailure,
            Err(e) => return Err(e),
        };
        trace.push(TraceRecord {
            attempt,
            k,
            mu: z[0],
            h_norm,
            step: step.lambda,
            h_next: step.h_norm,
            mu_next: step.z[0],
        });
        z = step.z;
        h = step.h;
        h_norm = step.h_norm;
        k += 1;
    };
    let status = if h_norm <= config.tol {
        SolveStatus::Converged
    } else {
        status
    };
    Ok(Attempt {
        status,
        z,
        h_norm,
        beta,
        iterations: k,
    })
}

/// Runs the smoothing Newton method from `y0`, restarting with the next μ₀
/// of the schedule whenever an attempt fails. On total failure the attempt
/// with the smallest `‖H‖` is reported together with the last status.
pub fn solve<T: Scalar>(
    t: &TcpInstance<T>,
    y0: &[T],
    config: &SolverConfig<T>,
) -> Result<SolveReport<T>> {
    config.validate()?;
    check_len("y0", t.dim(), y0.len())?;
    let start = Instant::now();
    let m = t.dim();
    let mut trace = Vec::new();
    let mut total = 0;
    let mut best: Option<(Attempt<T>, T, usize)> = None;
    let mut last_status = SolveStatus::MaxIter;
    let schedule = config.mu_schedule();
    for (attempt, &mu0) in schedule.iter().enumerate() {
        let run = run_attempt(t, y0, mu0, attempt, config, &mut trace)?;
        total += run.iterations;
        last_status = run.status;
        let done = run.status == SolveStatus::Converged;
        let better = best.as_ref().is_none_or(|(b, _, _)| run.h_norm < b.h_norm);
        if done || better {
            best = Some((run, mu0, attempt));
        }
        if done {
            break;
        }
    }
    let (run, mu0_used, attempt) = best.expect("schedule is never empty");
    let y = run.z[1..1 + m].to_vec();
    let s = run.z[1 + m..].to_vec();
    let f = t.eval_f(&y)?;
    let status = if run.status == SolveStatus::Converged {
        SolveStatus::Converged
    } else {
        last_status
    };
    Ok(SolveReport {
        status,
        tcp_residual: complementarity_residual(&y, &f),
        mu: run.z[0],
        h_norm: run.h_norm,
        y,
        s,
        iterations: run.iterations,
        total_iterations: total,
        restarts_used: attempt,
        mu0_used,
        beta: run.beta,
        wall_time: start.elapsed(),
        trace,
    })
}

/// The standard starting point `y0 = 0.01 e`.
pub fn default_start<T: Scalar>(t: &TcpInstance<T>) -> Vec<T> {
    vec![lit(0.01); t.dim()]
}
