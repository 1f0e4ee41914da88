//! The multilinear game: one payoff tensor per player, mixed strategy
//! profiles, utilities, payoff gradients and equilibrium checks.
//!
//! The complementarity reformulation characterizes profiles in which every
//! pure strategy a player uses attains the smallest entry of that player's
//! payoff gradient, and every unused strategy is at least as large. The gap
//! oracle [`MultilinearGame::best_response_gap`] measures exactly that
//! condition. Callers whose payoffs are rewards to be maximized can use
//! [`MultilinearGame::deviation_gain`], or pass `c - payoff` to the solver.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::scalar::{dot, lit, to_f64, Scalar};
use crate::tensor::{DenseTensor, Shape};

/// Tolerance on nonnegativity and on `e^T x = 1` for a mixed strategy.
pub const TOL_SIMPLEX: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearGame<T> {
    shape: Shape,
    payoffs: Vec<DenseTensor<T>>,
}

impl<T: Scalar> MultilinearGame<T> {
    /// Builds a game from one payoff tensor per player. All tensors must share
    /// the shape `(m_1, ..., m_n)` with `n` equal to the number of tensors.
    pub fn new(payoffs: Vec<DenseTensor<T>>) -> Result<Self> {
        let n = payoffs.len();
        if n < 2 {
            return Err(Error::InvalidGame(format!(
                "at least two players required, got {n}"
            )));
        }
        let shape = payoffs[0].shape().clone();
        if shape.order() != n {
            return Err(Error::InvalidGame(format!(
                "{n} players need order-{n} payoff tensors, got order {}",
                shape.order()
            )));
        }
        if let Some(k) = payoffs.iter().position(|p| p.shape() != &shape) {
            return Err(Error::InvalidGame(format!(
                "payoff tensor of player {} has shape {:?}, expected {:?}",
                k + 1,
                payoffs[k].dims(),
                shape.dims()
            )));
        }
        Ok(Self { shape, payoffs })
    }

    /// Convenience constructor from flat row-major payoff arrays.
    pub fn from_flat(dims: Vec<usize>, payoffs: Vec<Vec<T>>) -> Result<Self> {
        let tensors = payoffs
            .into_iter()
            .map(|data| DenseTensor::new(dims.clone(), data))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tensors)
    }

    pub fn players(&self) -> usize {
        self.payoffs.len()
    }

    /// Strategy counts `(m_1, ..., m_n)`.
    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// `m = Σ m_k`.
    pub fn total_strategies(&self) -> usize {
        self.dims().iter().sum()
    }

    pub fn payoff(&self, player: usize) -> Result<&DenseTensor<T>> {
        self.payoffs.get(player).ok_or(Error::PlayerOutOfRange {
            player,
            players: self.players(),
        })
    }

    pub fn payoffs(&self) -> &[DenseTensor<T>] {
        &self.payoffs
    }

    fn check_player(&self, player: usize) -> Result<()> {
        self.payoff(player).map(|_| ())
    }

    /// Checks that `x` has one block per player with matching lengths.
    pub fn check_profile(&self, x: &MixedProfile<T>) -> Result<()> {
        check_len("profile blocks", self.players(), x.blocks.len())?;
        for (k, (b, &m)) in x.blocks.iter().zip(self.dims()).enumerate() {
            check_len(format!("strategy vector of player {}", k + 1), m, b.len())?;
        }
        Ok(())
    }

    /// Expected payoff `A^k x^1 x^2 ... x^n` of player `player`.
    pub fn utility(&self, player: usize, x: &MixedProfile<T>) -> Result<T> {
        self.check_player(player)?;
        self.check_profile(x)?;
        self.payoffs[player].contract_all(&x.block_refs())
    }

    /// `∂/∂x^k A^k x^1 ... x^n`: the expected payoff of each pure strategy of
    /// player `player` against the others' mixed strategies.
    pub fn payoff_gradient(&self, player: usize, x: &MixedProfile<T>) -> Result<Vec<T>> {
        self.check_player(player)?;
        self.check_profile(x)?;
        let others: Vec<&[T]> = x
            .blocks
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != player)
            .map(|(_, b)| b.as_slice())
            .collect();
        self.payoffs[player].contract_except(player, &others)
    }

    /// Adds `c` to every payoff entry.
    pub fn shift(&self, c: T) -> Result<Self> {
        let payoffs = self
            .payoffs
            .iter()
            .map(|p| p.map(|a| a + c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(payoffs)
    }

    pub fn min_entry(&self) -> T {
        self.payoffs
            .iter()
            .flat_map(|p| p.data().iter().copied())
            .fold(T::infinity(), T::min)
    }

    /// Shifts so that every entry is at least 1 unless all entries are
    /// already positive. Returns the shifted game and the shift used.
    pub fn auto_shift(&self) -> Result<(Self, T)> {
        let min = self.min_entry();
        if min > T::zero() {
            Ok((self.clone(), T::zero()))
        } else {
            let c = T::one() - min;
            Ok((self.shift(c)?, c))
        }
    }

    /// Per-player gap `utility_k - min_i gradient_k[i]`, clamped at zero.
    ///
    /// Zero for every player exactly when `x` solves the equilibrium system
    /// encoded by the complementarity problem: the strategies in each
    /// support attain the minimal gradient entry. The gap is attained at a
    /// vertex of the simplex because the utility is linear in `x^k`.
    pub fn best_response_gap(&self, x: &MixedProfile<T>) -> Result<Vec<T>> {
        (0..self.players())
            .map(|k| {
                let g = self.payoff_gradient(k, x)?;
                let u = dot(&g, &x.blocks[k]);
                let best = g.iter().copied().fold(T::infinity(), T::min);
                Ok((u - best).max(T::zero()))
            })
            .collect()
    }

    /// Per-player `max_i gradient_k[i] - utility_k`: how much a player who
    /// maximizes payoff could gain by deviating.
    pub fn deviation_gain(&self, x: &MixedProfile<T>) -> Result<Vec<T>> {
        (0..self.players())
            .map(|k| {
                let g = self.payoff_gradient(k, x)?;
                let u = dot(&g, &x.blocks[k]);
                let best = g.iter().copied().fold(T::neg_infinity(), T::max);
                Ok((best - u).max(T::zero()))
            })
            .collect()
    }

    /// Equilibrium values `λ_k = A^k x^1 ... x^n` for every player.
    pub fn values(&self, x: &MixedProfile<T>) -> Result<EquilibriumValues<T>> {
        let lambdas = (0..self.players())
            .map(|k| self.utility(k, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(EquilibriumValues { lambdas })
    }
}

/// Name of the generator behind [`random_game`], recorded in game files.
pub const GENERATOR_NAME: &str = "chacha8-u53";

/// Game with entries i.i.d. uniform on `[0, 1)`.
///
/// The stream is ChaCha8 seeded through `seed_from_u64(seed)`; each entry is
/// `(next_u64() >> 11) * 2^-53`. Tensors are filled player by player in
/// row-major order. The same `(dims, seed)` always yields the same game.
pub fn random_game<T: Scalar>(dims: &[usize], seed: u64) -> Result<MultilinearGame<T>> {
    let shape = Shape::new(dims.to_vec())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (1u64 << 53) as f64;
    let payoffs = (0..dims.len())
        .map(|_| {
            let data = (0..shape.len())
                .map(|_| lit::<T>((rng.next_u64() >> 11) as f64 * scale))
                .collect();
            DenseTensor::from_shape(shape.clone(), data)
        })
        .collect::<Result<Vec<_>>>()?;
    MultilinearGame::new(payoffs)
}

/// A joint mixed strategy: one probability vector per player.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedProfile<T> {
    blocks: Vec<Vec<T>>,
}

impl<T: Scalar> MixedProfile<T> {
    /// Validates every block against the simplex within [`TOL_SIMPLEX`].
    pub fn new(blocks: Vec<Vec<T>>) -> Result<Self> {
        let tol = lit::<T>(TOL_SIMPLEX);
        for (k, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(Error::InvalidProfile {
                    player: k,
                    reason: "empty strategy vector".into(),
                });
            }
            if let Some(i) = b.iter().position(|v| !v.is_finite() || *v < -tol) {
                return Err(Error::InvalidProfile {
                    player: k,
                    reason: format!("entry {} is {}", i + 1, b[i]),
                });
            }
            let sum = b.iter().fold(T::zero(), |a, &v| a + v);
            if (sum - T::one()).abs() > tol {
                return Err(Error::InvalidProfile {
                    player: k,
                    reason: format!("entries sum to {sum}"),
                });
            }
        }
        Ok(Self { blocks })
    }

    /// Projects nonnegative weights onto the simplex by dividing by their sum.
    ///
    /// Entries in `[-clip, 0)` are treated as rounding dust and set to zero;
    /// anything more negative is an error, as is a block whose sum is at most
    /// `1e-12`.
    pub fn normalize(blocks: Vec<Vec<T>>, clip: T) -> Result<Self> {
        let mut out = Vec::with_capacity(blocks.len());
        for (k, mut b) in blocks.into_iter().enumerate() {
            for (i, v) in b.iter_mut().enumerate() {
                if *v < -clip || !v.is_finite() {
                    return Err(Error::NegativeEntry {
                        player: k,
                        index: i,
                        value: to_f64(*v),
                    });
                }
                if *v < T::zero() {
                    *v = T::zero();
                }
            }
            let sum = b.iter().fold(T::zero(), |a, &v| a + v);
            if sum <= lit(1e-12) {
                return Err(Error::ZeroBlock {
                    player: k,
                    sum: to_f64(sum),
                });
            }
            b.iter_mut().for_each(|v| *v = *v / sum);
            out.push(b);
        }
        Self::new(out)
    }

    /// Every player mixes uniformly.
    pub fn uniform(dims: &[usize]) -> Self {
        Self {
            blocks: dims
                .iter()
                .map(|&m| vec![T::one() / lit(m as f64); m])
                .collect(),
        }
    }

    /// Player `k` plays pure strategy `choice[k]` (0-based).
    pub fn pure(dims: &[usize], choice: &[usize]) -> Result<Self> {
        check_len("pure strategy choice", dims.len(), choice.len())?;
        let mut blocks = Vec::with_capacity(dims.len());
        for (k, (&m, &c)) in dims.iter().zip(choice).enumerate() {
            if c >= m {
                return Err(Error::InvalidProfile {
                    player: k,
                    reason: format!("pure strategy {} of {m}", c + 1),
                });
            }
            let mut b = vec![T::zero(); m];
            b[c] = T::one();
            blocks.push(b);
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[Vec<T>] {
        &self.blocks
    }

    pub fn block(&self, player: usize) -> &[T] {
        &self.blocks[player]
    }

    pub fn players(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_refs(&self) -> Vec<&[T]> {
        self.blocks.iter().map(Vec::as_slice).collect()
    }

    /// Concatenation `(x^1, ..., x^n)`.
    pub fn to_flat(&self) -> Vec<T> {
        self.blocks.concat()
    }

    pub fn into_blocks(self) -> Vec<Vec<T>> {
        self.blocks
    }
}

/// `λ_k = A^k x^1 ... x^n` at a candidate profile.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumValues<T> {
    pub lambdas: Vec<T>,
}

impl<T: Scalar> EquilibriumValues<T> {
    pub fn all_positive(&self) -> bool {
        self.lambdas.iter().all(|&l| l > T::zero())
    }

    /// First player whose value is not positive.
    pub fn first_nonpositive(&self) -> Option<(usize, T)> {
        self.lambdas
            .iter()
            .copied()
            .enumerate()
            .find(|&(_, l)| !(l > T::zero()))
    }
}
