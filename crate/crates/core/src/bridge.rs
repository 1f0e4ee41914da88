//! Correspondence between equilibria of the game and solutions of its
//! complementarity problem.
//!
//! Forward: with `λ_k = A^k x^1 ... x^n > 0`, the vector with blocks
//! `y^k = ((λ_k)^{n-2} / Π_{i≠k} λ_i)^{1/(n-1)} x^k` solves the problem.
//! Backward: every solution has nonzero blocks and `x^k = y^k / (e^T y^k)`
//! is an equilibrium, with `λ_k = 1 / Π_{i≠k} e^T y^i`.

use crate::error::{check_len, Error, Result};
use crate::game::{EquilibriumValues, MixedProfile, MultilinearGame, TOL_SIMPLEX};
use crate::scalar::{lit, to_f64, Scalar};
use crate::tcp::{split, TcpInstance};

/// Scales an equilibrium profile into a complementarity solution.
///
/// The `(n-1)`-th root is taken in log space, so every `λ_k` must be
/// positive; otherwise [`Error::NonpositiveValue`] names the first offender.
pub fn nash_to_tcp<T: Scalar>(game: &MultilinearGame<T>, x: &MixedProfile<T>) -> Result<Vec<T>> {
    let values = equilibrium_values(game, x)?;
    nash_to_tcp_with_values(x, &values)
}

/// The forward scaling with caller-supplied values, e.g. the closed form
/// from [`values_from_tcp`], under which it inverts [`tcp_to_nash`] exactly.
pub fn nash_to_tcp_with_values<T: Scalar>(
    x: &MixedProfile<T>,
    values: &EquilibriumValues<T>,
) -> Result<Vec<T>> {
    check_len("equilibrium values", x.players(), values.lambdas.len())?;
    if let Some((player, v)) = values.first_nonpositive() {
        return Err(Error::NonpositiveValue {
            player,
            value: to_f64(v),
        });
    }
    let n = x.players();
    let logs: Vec<T> = values.lambdas.iter().map(|l| l.ln()).collect();
    let total = logs.iter().fold(T::zero(), |a, &v| a + v);
    let root = lit::<T>((n - 1) as f64);
    let mut y = Vec::new();
    for (k, block) in x.blocks().iter().enumerate() {
        // (n-2) ln λ_k - Σ_{i≠k} ln λ_i = (n-1) ln λ_k - Σ_i ln λ_i
        let scale = ((root * logs[k] - total) / root).exp();
        y.extend(block.iter().map(|&v| scale * v));
    }
    Ok(y)
}

/// Normalizes each block of a complementarity solution onto the simplex,
/// clipping negative entries down to `-1e-9`.
pub fn tcp_to_nash<T: Scalar>(game: &MultilinearGame<T>, y: &[T]) -> Result<MixedProfile<T>> {
    tcp_to_nash_with_clip(game, y, lit(TOL_SIMPLEX))
}

/// [`tcp_to_nash`] with an explicit clipping tolerance for negative dust.
pub fn tcp_to_nash_with_clip<T: Scalar>(
    game: &MultilinearGame<T>,
    y: &[T],
    clip: T,
) -> Result<MixedProfile<T>> {
    let blocks = split(game.dims(), y)?;
    for (k, b) in blocks.iter().enumerate() {
        let sum = b.iter().fold(T::zero(), |a, &v| a + v);
        if sum <= lit(1e-12) {
            return Err(Error::ZeroBlock {
                player: k,
                sum: to_f64(sum),
            });
        }
    }
    MixedProfile::normalize(blocks.iter().map(|b| b.to_vec()).collect(), clip)
}

/// `λ_k = utility(k, x)` for every player.
pub fn equilibrium_values<T: Scalar>(
    game: &MultilinearGame<T>,
    x: &MixedProfile<T>,
) -> Result<EquilibriumValues<T>> {
    game.values(x)
}

/// `λ_k = 1 / Π_{i≠k} e^T y^i`, the values implied by a complementarity
/// solution without forming the profile.
pub fn values_from_tcp<T: Scalar>(dims: &[usize], y: &[T]) -> Result<EquilibriumValues<T>> {
    let sums: Vec<T> = split(dims, y)?
        .iter()
        .map(|b| b.iter().fold(T::zero(), |a, &v| a + v))
        .collect();
    let lambdas = (0..sums.len())
        .map(|k| {
            let prod = sums
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .fold(T::one(), |a, (_, &s)| a * s);
            T::one() / prod
        })
        .collect();
    Ok(EquilibriumValues { lambdas })
}

/// Tolerances used by [`certify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    pub tcp_residual: T,
    pub gap: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            tcp_residual: lit(1e-6),
            gap: lit(1e-6),
        }
    }
}

impl<T: Scalar> Tolerances<T> {
    pub fn uniform(tol: T) -> Self {
        Self {
            tcp_residual: tol,
            gap: tol,
        }
    }
}

/// Both sides of the correspondence checked together.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceResult<T> {
    pub profile: MixedProfile<T>,
    pub y: Vec<T>,
    pub lambdas: EquilibriumValues<T>,
    pub tcp_residual: T,
    pub gaps: Vec<T>,
    pub max_gap: T,
    pub tolerances: Tolerances<T>,
    pub certified: bool,
}

/// Computes the complementarity residual of `y`, the equilibrium gaps of
/// `x` and the values `λ`. Never fails on numerical grounds; dimension
/// mismatches are still errors.
pub fn certify<T: Scalar>(
    game: &MultilinearGame<T>,
    x: &MixedProfile<T>,
    y: &[T],
    tolerances: Tolerances<T>,
) -> Result<CorrespondenceResult<T>> {
    let tcp = TcpInstance::new(game.clone());
    let tcp_residual = tcp.residual(y)?;
    let gaps = game.best_response_gap(x)?;
    let max_gap = gaps.iter().copied().fold(T::zero(), T::max);
    let lambdas = equilibrium_values(game, x)?;
    let certified = tcp_residual <= tolerances.tcp_residual && max_gap <= tolerances.gap;
    Ok(CorrespondenceResult {
        profile: x.clone(),
        y: y.to_vec(),
        lambdas,
        tcp_residual,
        gaps,
        max_gap,
        tolerances,
        certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bos() -> MultilinearGame<f64> {
        MultilinearGame::from_flat(
            vec![2, 2],
            vec![vec![2.0, -1.0, -1.0, 1.0], vec![1.0, -1.0, -1.0, 2.0]],
        )
        .unwrap()
    }

    fn bos_x() -> MixedProfile<f64> {
        MixedProfile::new(vec![vec![0.6, 0.4], vec![0.4, 0.6]]).unwrap()
    }

    #[test]
    fn forward_map_on_battle_of_the_sexes() {
        let y = nash_to_tcp(&bos(), &bos_x()).unwrap();
        for (a, b) in y.iter().zip([3.0, 2.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12, "{y:?}");
        }
    }

    #[test]
    fn forward_map_with_unit_values_is_identity() {
        let g = MultilinearGame::<f64>::from_flat(vec![2, 2, 2], vec![vec![1.0; 8]; 3]).unwrap();
        let x = MixedProfile::uniform(&[2, 2, 2]);
        let y = nash_to_tcp(&g, &x).unwrap();
        for (a, b) in y.iter().zip(x.to_flat()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn forward_map_rejects_nonpositive_values() {
        let g = MultilinearGame::<f64>::from_flat(
            vec![2, 2],
            vec![vec![1.0; 4], vec![-1.0; 4]],
        )
        .unwrap();
        assert!(matches!(
            nash_to_tcp(&g, &MixedProfile::uniform(&[2, 2])),
            Err(Error::NonpositiveValue { player: 1, .. })
        ));
    }

    #[test]
    fn backward_map_on_battle_of_the_sexes() {
        let x = tcp_to_nash(&bos(), &[3.0, 2.0, 2.0, 3.0]).unwrap();
        assert_eq!(x.block(0), &[0.6, 0.4]);
        assert_eq!(x.block(1), &[0.4, 0.6]);
    }

    #[test]
    fn backward_map_rejects_zero_block() {
        assert!(matches!(
            tcp_to_nash(&bos(), &[3.0, 2.0, 0.0, 0.0]),
            Err(Error::ZeroBlock { player: 1, .. })
        ));
        assert!(matches!(
            tcp_to_nash(&bos(), &[3.0, -2.0, 1.0, 0.0]),
            Err(Error::NegativeEntry { player: 0, .. })
        ));
    }

    #[test]
    fn values_examples() {
        let v = equilibrium_values(&bos(), &bos_x()).unwrap();
        assert!((v.lambdas[0] - 0.2).abs() < 1e-15 && (v.lambdas[1] - 0.2).abs() < 1e-15);
        let closed = values_from_tcp(&[2, 2], &[3.0, 2.0, 2.0, 3.0]).unwrap();
        assert_eq!(closed.lambdas, vec![0.2, 0.2]);

        let shifted = equilibrium_values(&bos().shift(1.5).unwrap(), &bos_x()).unwrap();
        for (a, b) in shifted.lambdas.iter().zip(&v.lambdas) {
            assert!((a - b - 1.5).abs() < 1e-14);
        }
    }

    #[test]
    fn certify_battle_of_the_sexes() {
        let r = certify(&bos(), &bos_x(), &[3.0, 2.0, 2.0, 3.0], Tolerances::default()).unwrap();
        assert!(r.certified);
        assert!(r.tcp_residual < 1e-12 && r.max_gap < 1e-12);

        let u = MixedProfile::uniform(&[2, 2]);
        let r = certify(&bos(), &u, &[1.0, 1.0, 1.0, 1.0], Tolerances::default()).unwrap();
        assert!(!r.certified);
        assert!(r.max_gap > 0.2);
    }
}
