//! Dense tensors and multilinear contractions.
//!
//! Entries are stored flat in row-major order (the last index varies
//! fastest). Indices are 0-based here; file formats and messages use 1-based
//! numbering.

use crate::error::{check_len, Error, Result};
use crate::scalar::{dot, Element};

/// Dimensions `(m_1, ..., m_n)` of a tensor. The empty shape is the order-0
/// (scalar) tensor with a single entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    dims: Vec<usize>,
    len: usize,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidShape {
                reason: format!("dimension {} is zero", pos + 1),
                dims,
            });
        }
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&n| n <= isize::MAX as usize)
            .ok_or_else(|| Error::InvalidShape {
                dims: dims.clone(),
                reason: "element count overflows the address space".into(),
            })?;
        Ok(Self { dims, len })
    }

    pub fn scalar() -> Self {
        Self {
            dims: Vec::new(),
            len: 1,
        }
    }

    /// `order` copies of `dim`.
    pub fn cubical(order: usize, dim: usize) -> Result<Self> {
        Self::new(vec![dim; order])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// Number of entries, `Π m_j`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_cubical(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] == w[1])
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Flat offset of a multi-index, or `None` if out of bounds.
    pub fn offset(&self, index: &[usize]) -> Option<usize> {
        if index.len() != self.dims.len() {
            return None;
        }
        let mut off = 0;
        for (&i, &d) in index.iter().zip(&self.dims) {
            if i >= d {
                return None;
            }
            off = off * d + i;
        }
        Some(off)
    }

    /// Inverse of [`Shape::offset`].
    pub fn unravel(&self, mut offset: usize) -> Vec<usize> {
        let mut index = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            index[k] = offset % self.dims[k];
            offset /= self.dims[k];
        }
        index
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.order() {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                mode,
                order: self.order(),
            })
        }
    }
}

/// Advances a row-major multi-index; returns `false` after the last one.
pub(crate) fn next_index(index: &mut [usize], dims: &[usize]) -> bool {
    for k in (0..dims.len()).rev() {
        index[k] += 1;
        if index[k] < dims[k] {
            return true;
        }
        index[k] = 0;
    }
    false
}

/// An order-n array of finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T> {
    shape: Shape,
    data: Vec<T>,
}

impl<T: Element> DenseTensor<T> {
    pub fn new(dims: Vec<usize>, data: Vec<T>) -> Result<Self> {
        Self::from_shape(Shape::new(dims)?, data)
    }

    pub fn from_shape(shape: Shape, data: Vec<T>) -> Result<Self> {
        check_len_data(shape.len(), data.len())?;
        if let Some(pos) = data.iter().position(|x| !x.is_finite_value()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { shape, data })
    }

    /// Builds a tensor by evaluating `f` at every (0-based) multi-index.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let shape = Shape::new(dims)?;
        let mut data = Vec::with_capacity(shape.len());
        let mut index = vec![0; shape.order()];
        loop {
            data.push(f(&index));
            if !next_index(&mut index, shape.dims()) {
                break;
            }
        }
        Self::from_shape(shape, data)
    }

    pub fn filled(dims: Vec<usize>, value: T) -> Result<Self> {
        let shape = Shape::new(dims)?;
        let data = vec![value; shape.len()];
        Self::from_shape(shape, data)
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        Self::filled(dims, T::zero())
    }

    /// The order-0 tensor holding `value`.
    pub fn scalar(value: T) -> Self {
        Self {
            shape: Shape::scalar(),
            data: vec![value],
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn order(&self) -> usize {
        self.shape.order()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> Option<T> {
        self.shape.offset(index).map(|o| self.data[o])
    }

    /// The value of an order-0 tensor.
    pub fn as_scalar(&self) -> Option<T> {
        (self.order() == 0).then(|| self.data[0])
    }

    /// Entrywise map. The result must stay finite.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::from_shape(self.shape.clone(), self.data.iter().map(|&x| f(x)).collect())
    }

    /// k-mode product: contracts mode `mode` against `v`, dropping that mode.
    pub fn mode_product(&self, mode: usize, v: &[T]) -> Result<Self> {
        self.shape.check_mode(mode)?;
        let dims = self.dims();
        check_len(format!("vector for mode {}", mode + 1), dims[mode], v.len())?;
        let outer: usize = dims[..mode].iter().product();
        let inner: usize = dims[mode + 1..].iter().product();
        let m = dims[mode];
        let mut out = vec![T::zero(); outer * inner];
        for o in 0..outer {
            let base = o * m * inner;
            let dst = &mut out[o * inner..(o + 1) * inner];
            for (j, &w) in v.iter().enumerate() {
                let src = &self.data[base + j * inner..base + (j + 1) * inner];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d = *d + s * w;
                }
            }
        }
        let mut new_dims = dims.to_vec();
        new_dims.remove(mode);
        Ok(Self {
            shape: Shape::new(new_dims)?,
            data: out,
        })
    }

    /// Contracts every mode against the vector in the same slot; `None`
    /// leaves the mode free. Free modes keep their relative order.
    pub fn partial_contract(&self, vectors: &[Option<&[T]>]) -> Result<Self> {
        check_len("vector list", self.order(), vectors.len())?;
        for (mode, v) in vectors.iter().enumerate() {
            if let Some(v) = v {
                check_len(
                    format!("vector for mode {}", mode + 1),
                    self.dims()[mode],
                    v.len(),
                )?;
            }
        }
        // Contract from the back so that the remaining mode numbers stay valid.
        let mut acc: Option<Self> = None;
        for (mode, v) in vectors.iter().enumerate().rev() {
            if let Some(v) = v {
                let next = acc.as_ref().unwrap_or(self).mode_product(mode, v)?;
                acc = Some(next);
            }
        }
        Ok(acc.unwrap_or_else(|| self.clone()))
    }

    /// Full multilinear form `B u^1 u^2 ... u^n`.
    pub fn contract_all(&self, vectors: &[&[T]]) -> Result<T> {
        check_len("vector list", self.order(), vectors.len())?;
        if self.order() == 0 {
            return Ok(self.data[0]);
        }
        let opts: Vec<Option<&[T]>> = vectors.iter().map(|&v| Some(v)).collect();
        let out = self.partial_contract(&opts)?;
        Ok(out.data[0])
    }

    /// Gradient of the multilinear form with respect to mode `mode`.
    ///
    /// `others` holds one vector per mode except `mode`, in mode order.
    pub fn contract_except(&self, mode: usize, others: &[&[T]]) -> Result<Vec<T>> {
        self.shape.check_mode(mode)?;
        check_len("vector list", self.order() - 1, others.len())?;
        let mut it = others.iter();
        let opts: Vec<Option<&[T]>> = (0..self.order())
            .map(|j| if j == mode { None } else { it.next().copied() })
            .collect();
        Ok(self.partial_contract(&opts)?.data)
    }

    /// Moves mode `mode` to the front:
    /// `out[i_k, i_1, .., i_{k-1}, i_{k+1}, .., i_n] = self[i_1, .., i_n]`.
    pub fn bar_permute(&self, mode: usize) -> Result<Self> {
        self.shape.check_mode(mode)?;
        if mode == 0 {
            return Ok(self.clone());
        }
        let dims = self.dims();
        let mut new_dims = Vec::with_capacity(dims.len());
        new_dims.push(dims[mode]);
        new_dims.extend(dims.iter().enumerate().filter(|&(j, _)| j != mode).map(|(_, &d)| d));
        let shape = Shape::new(new_dims)?;
        let mut data = vec![T::zero(); self.data.len()];
        let mut index = vec![0; dims.len()];
        let mut permuted = vec![0; dims.len()];
        for &value in &self.data {
            permuted[0] = index[mode];
            let mut p = 1;
            for (j, &i) in index.iter().enumerate() {
                if j != mode {
                    permuted[p] = i;
                    p += 1;
                }
            }
            data[shape.offset(&permuted).expect("permuted index in range")] = value;
            next_index(&mut index, dims);
        }
        Ok(Self { shape, data })
    }

    /// `B u^{n-1}` for a cubical tensor: contracts modes 2..n with `u`.
    pub fn power_contract(&self, u: &[T]) -> Result<Vec<T>> {
        if self.order() == 0 || !self.shape.is_cubical() {
            return Err(Error::NotCubical(self.dims().to_vec()));
        }
        let m = self.dims()[0];
        check_len("vector", m, u.len())?;
        let mut acc: Vec<T> = self.data.clone();
        // Each pass contracts the current last mode.
        for _ in 1..self.order() {
            acc = acc.chunks_exact(m).map(|row| dot(row, u)).collect();
        }
        Ok(acc)
    }

    /// Number of entries different from zero.
    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|x| !x.is_zero()).count()
    }
}

fn check_len_data(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DataLength { expected, actual })
    }
}
