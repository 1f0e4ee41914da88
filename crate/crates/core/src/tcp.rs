//! The tensor complementarity problem built from a multilinear game:
//! find `y >= 0` with `F(y) = A y^{m-1} + q >= 0` and `<y, F(y)> = 0`,
//! where `q = -e`.
//!
//! Block `k` of `F(y)` is the payoff gradient of player `k` evaluated at the
//! other players' blocks of `y`, minus one. `F` and its Jacobian are always
//! computed in this block form; the explicit big tensor `A` of order `n` and
//! dimension `m = Σ m_k` is assembled only for export and cross-checking.

use crate::error::{check_len, Error, Result};
use crate::game::MultilinearGame;
use crate::linalg::Matrix;
use crate::scalar::{dot, Scalar};
use crate::tensor::{next_index, DenseTensor, Shape};

/// Default cap on the number of entries of an assembled big tensor.
pub const DEFAULT_BIG_TENSOR_BUDGET: u128 = 100_000_000;

/// Splits a concatenated vector into blocks of the given lengths.
pub fn split<'a, T>(dims: &[usize], y: &'a [T]) -> Result<Vec<&'a [T]>> {
    check_len("concatenated vector", dims.iter().sum(), y.len())?;
    let mut out = Vec::with_capacity(dims.len());
    let mut rest = y;
    for &m in dims {
        let (head, tail) = rest.split_at(m);
        out.push(head);
        rest = tail;
    }
    Ok(out)
}

/// Concatenates blocks.
pub fn join<T: Clone>(blocks: &[&[T]]) -> Vec<T> {
    blocks.concat()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TcpInstance<T> {
    game: MultilinearGame<T>,
    offsets: Vec<usize>,
    dim: usize,
}

impl<T: Scalar> TcpInstance<T> {
    pub fn new(game: MultilinearGame<T>) -> Self {
        let mut offsets = Vec::with_capacity(game.players());
        let mut acc = 0;
        for &m in game.dims() {
            offsets.push(acc);
            acc += m;
        }
        Self {
            game,
            offsets,
            dim: acc,
        }
    }

    pub fn game(&self) -> &MultilinearGame<T> {
        &self.game
    }

    /// Total dimension `m = Σ m_k`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Start of each player's block in the concatenated vector.
    pub fn block_offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// `q = -e_m`.
    pub fn q(&self) -> Vec<T> {
        vec![-T::one(); self.dim]
    }

    pub fn split<'a>(&self, y: &'a [T]) -> Result<Vec<&'a [T]>> {
        split(self.game.dims(), y)
    }

    fn check_point(&self, y: &[T]) -> Result<()> {
        check_len("y", self.dim, y.len())?;
        match y.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite(i)),
            None => Ok(()),
        }
    }

    /// `F(y) = A y^{m-1} - e`, evaluated blockwise.
    pub fn eval_f(&self, y: &[T]) -> Result<Vec<T>> {
        self.check_point(y)?;
        let blocks = self.split(y)?;
        let mut out = Vec::with_capacity(self.dim);
        for (k, payoff) in self.game.payoffs().iter().enumerate() {
            let others: Vec<&[T]> = blocks
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, b)| *b)
                .collect();
            let grad = payoff.contract_except(k, &others)?;
            out.extend(grad.into_iter().map(|v| v - T::one()));
        }
        Ok(out)
    }

    /// Jacobian of `F`. Block `(k, j)` for `k != j` contracts `A^k` over all
    /// modes except `k` and `j`; diagonal blocks are identically zero.
    pub fn jacobian_f(&self, y: &[T]) -> Result<Matrix<T>> {
        self.check_point(y)?;
        let blocks = self.split(y)?;
        let n = self.game.players();
        let dims = self.game.dims();
        let mut jac = Matrix::zeros(self.dim, self.dim);
        for (k, payoff) in self.game.payoffs().iter().enumerate() {
            for j in (0..n).filter(|&j| j != k) {
                let vectors: Vec<Option<&[T]>> = (0..n)
                    .map(|i| if i == k || i == j { None } else { Some(blocks[i]) })
                    .collect();
                // free modes stay in increasing order: (min(k,j), max(k,j))
                let block = payoff.partial_contract(&vectors)?;
                let data = block.data();
                for a in 0..dims[k] {
                    for b in 0..dims[j] {
                        let v = if k < j {
                            data[a * dims[j] + b]
                        } else {
                            data[b * dims[k] + a]
                        };
                        jac[(self.offsets[k] + a, self.offsets[j] + b)] = v;
                    }
                }
            }
        }
        Ok(jac)
    }

    /// `max(|min(y,0)|_∞, |min(F(y),0)|_∞, |<y, F(y)>|)`.
    pub fn residual(&self, y: &[T]) -> Result<T> {
        let f = self.eval_f(y)?;
        Ok(complementarity_residual(y, &f))
    }

    /// Assembles the cubical order-n tensor `A` of dimension `m`, refusing if
    /// `m^n` exceeds `budget` entries.
    ///
    /// Player `k`'s entry `a^k[i_1, .., i_n]` lands at
    /// `(off_k + i_k, off_{j_1} + i_{j_1}, .., off_{j_{n-1}} + i_{j_{n-1}})`
    /// where `j_1 < .. < j_{n-1}` are the other players.
    pub fn assemble_big_tensor(&self, budget: u128) -> Result<DenseTensor<T>> {
        let n = self.game.players();
        let required = (self.dim as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if required > budget {
            return Err(Error::BudgetExceeded {
                required,
                allowed: budget,
            });
        }
        let shape = Shape::cubical(n, self.dim)?;
        let mut data = vec![T::zero(); shape.len()];
        let dims = self.game.dims();
        let mut big_index = vec![0; n];
        for (k, payoff) in self.game.payoffs().iter().enumerate() {
            let mut index = vec![0; n];
            for &value in payoff.data() {
                big_index[0] = self.offsets[k] + index[k];
                for (p, j) in (0..n).filter(|&j| j != k).enumerate() {
                    big_index[p + 1] = self.offsets[j] + index[j];
                }
                let off = shape.offset(&big_index).expect("big index in range");
                data[off] = value;
                next_index(&mut index, dims);
            }
        }
        DenseTensor::from_shape(shape, data)
    }
}

/// Residual of the complementarity conditions for a pair `(y, s = F(y))`.
pub fn complementarity_residual<T: Scalar>(y: &[T], f: &[T]) -> T {
    let neg = |v: &[T]| v.iter().fold(T::zero(), |a, &x| a.max(-x));
    neg(y).max(neg(f)).max(dot(y, f).abs())
}
