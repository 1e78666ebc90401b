use num_complex::Complex64 as C64;

use crate::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// One-leg operator with a diagonal and two off-diagonal bands at offset `K`:
/// `upper[n] = M[n, n+K]`, `lower[n] = M[n+K, n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    dim: usize,
    offset: usize,
    diagonal: Vec<C64>,
    upper: Vec<C64>,
    lower: Vec<C64>,
    freqs: Option<Vec<C64>>,
}

impl Tridiagonal {
    pub fn new(
        dim: usize,
        offset: usize,
        diagonal: Vec<C64>,
        upper: Vec<C64>,
        lower: Vec<C64>,
    ) -> Result<Self> {
        if dim == 0 || offset == 0 || offset >= dim {
            return Err(Error::InvalidOperator(format!(
                "offset {offset} invalid for dimension {dim}"
            )));
        }
        if diagonal.len() != dim || upper.len() != dim - offset || lower.len() != dim - offset {
            return Err(Error::InvalidOperator(format!(
                "band lengths ({}, {}, {}) do not fit dimension {dim} and offset {offset}",
                diagonal.len(),
                upper.len(),
                lower.len()
            )));
        }
        Ok(Tridiagonal {
            dim,
            offset,
            diagonal,
            upper,
            lower,
            freqs: None,
        })
    }

    /// Purely diagonal operator. For `dim == 1` the offset bands are empty.
    pub fn diagonal_from(diagonal: Vec<C64>) -> Self {
        let dim = diagonal.len();
        Tridiagonal {
            dim,
            offset: 1,
            diagonal,
            upper: vec![ZERO; dim.saturating_sub(1)],
            lower: vec![ZERO; dim.saturating_sub(1)],
            freqs: None,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal_from(vec![ONE; dim])
    }

    /// `n` on the diagonal.
    pub fn number(dim: usize) -> Self {
        Self::diagonal_from((0..dim).map(|n| C64::new(n as f64, 0.0)).collect())
    }

    /// Bosonic lowering operator truncated to `dim` levels: `M[n−1, n] = √n`.
    pub fn annihilation(dim: usize) -> Self {
        let mut op = Self::diagonal_from(vec![ZERO; dim]);
        op.upper = (1..dim).map(|n| C64::new((n as f64).sqrt(), 0.0)).collect();
        op
    }

    /// Adjoint of [`Tridiagonal::annihilation`].
    pub fn creation(dim: usize) -> Self {
        Self::annihilation(dim).adjoint()
    }

    /// Attaches interaction-picture frequencies, one per level.
    pub fn with_freqs(mut self, freqs: Vec<C64>) -> Result<Self> {
        if freqs.len() != self.dim {
            return Err(Error::InvalidOperator(format!(
                "{} frequencies for dimension {}",
                freqs.len(),
                self.dim
            )));
        }
        self.freqs = Some(freqs);
        Ok(self)
    }

    pub fn without_freqs(mut self) -> Self {
        self.freqs = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn diagonal(&self) -> &[C64] {
        &self.diagonal
    }

    pub fn upper(&self) -> &[C64] {
        &self.upper
    }

    pub fn lower(&self) -> &[C64] {
        &self.lower
    }

    pub fn freqs(&self) -> Option<&[C64]> {
        self.freqs.as_deref()
    }

    pub(crate) fn nonzero_bands(&self) -> (bool, bool, bool) {
        let nz = |v: &[C64]| v.iter().any(|c| *c != ZERO);
        (nz(&self.diagonal), nz(&self.upper), nz(&self.lower))
    }

    /// Entry `M[row, col]`.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        let k = self.offset;
        if row == col {
            self.diagonal[row]
        } else if col == row + k {
            self.upper[row]
        } else if row == col + k {
            self.lower[col]
        } else {
            ZERO
        }
    }

    /// Row-major dense matrix of the (undressed) entries.
    pub fn to_dense(&self) -> Vec<C64> {
        let n = self.dim;
        let mut m = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                m[r * n + c] = self.entry(r, c);
            }
        }
        m
    }

    pub fn scaled(mut self, factor: C64) -> Self {
        for v in self
            .diagonal
            .iter_mut()
            .chain(self.upper.iter_mut())
            .chain(self.lower.iter_mut())
        {
            *v *= factor;
        }
        self
    }

    /// Entrywise sum; offsets must agree. Frequencies of `self` are kept.
    pub fn plus(mut self, other: &Tridiagonal) -> Result<Self> {
        if self.dim != other.dim || self.offset != other.offset {
            return Err(Error::InvalidOperator(format!(
                "cannot add operators of shape ({}, K={}) and ({}, K={})",
                self.dim, self.offset, other.dim, other.offset
            )));
        }
        let add = |a: &mut Vec<C64>, b: &[C64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.diagonal, &other.diagonal);
        add(&mut self.upper, &other.upper);
        add(&mut self.lower, &other.lower);
        Ok(self)
    }

    /// Hermitian conjugate; dressing it uses the conjugate frequencies.
    pub fn adjoint(&self) -> Self {
        Tridiagonal {
            dim: self.dim,
            offset: self.offset,
            diagonal: self.diagonal.iter().map(|c| c.conj()).collect(),
            upper: self.lower.iter().map(|c| c.conj()).collect(),
            lower: self.upper.iter().map(|c| c.conj()).collect(),
            freqs: self
                .freqs
                .as_ref()
                .map(|f| f.iter().map(|c| c.conj()).collect()),
        }
    }

    /// Entrywise complex conjugate; frequencies become `−conj(ω)` so that
    /// dressing commutes with conjugation.
    pub fn conj(&self) -> Self {
        Tridiagonal {
            dim: self.dim,
            offset: self.offset,
            diagonal: self.diagonal.iter().map(|c| c.conj()).collect(),
            upper: self.upper.iter().map(|c| c.conj()).collect(),
            lower: self.lower.iter().map(|c| c.conj()).collect(),
            freqs: self
                .freqs
                .as_ref()
                .map(|f| f.iter().map(|c| -c.conj()).collect()),
        }
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        self.diagonal.iter().all(|d| d.im.abs() <= tolerance)
            && self
                .upper
                .iter()
                .zip(&self.lower)
                .all(|(u, l)| (l - u.conj()).norm() <= tolerance)
    }

    /// The operator in the interaction picture at time `t` (see the module
    /// docs for the phase convention). Unchanged without frequencies.
    pub fn dress(&self, t: f64) -> Self {
        let mut out = self.clone();
        let Some(freqs) = &self.freqs else {
            return out;
        };
        if t == 0.0 {
            return out;
        }
        let i = C64::new(0.0, 1.0);
        let k = self.offset;
        for n in 0..self.dim - k {
            let phase = (i * (freqs[n] - freqs[n + k]) * t).exp();
            out.upper[n] *= phase;
            out.lower[n] /= phase;
        }
        out
    }
}
