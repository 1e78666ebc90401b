//! Multi-leg quantum state containers.
//!
//! Both containers store dense amplitudes in row-major multi-index order. A
//! [`DensityOperator`] of rank `R` is a rank-`2R` tensor whose first `R` legs
//! are ket indices and whose last `R` legs are bra indices, so it can be
//! handed to the same leg-wise operator kernels as a [`StateVector`].

mod density;
mod eigen;

use std::ops::Mul;

use num_complex::Complex64 as C64;

use crate::{Error, Result};

pub use density::DensityOperator;
pub use eigen::{hermitian_eigenvalues, JACOBI_MAX_SWEEPS, JACOBI_OFF_TOLERANCE};

/// Largest supported number of legs.
pub const MAX_RANK: usize = 8;

pub(crate) fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("rank must be at least 1".into()));
    }
    if dims.len() > MAX_RANK {
        return Err(Error::InvalidDims(format!(
            "rank {} exceeds the supported maximum {MAX_RANK}",
            dims.len()
        )));
    }
    if let Some(leg) = dims.iter().position(|&d| d == 0) {
        return Err(Error::InvalidDims(format!("leg {leg} has dimension 0")));
    }
    Ok(())
}

/// Row-major strides: the last leg is contiguous.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for leg in (0..dims.len().saturating_sub(1)).rev() {
        s[leg] = s[leg + 1] * dims[leg + 1];
    }
    s
}

/// A sorted, duplicate-free, proper and non-empty subset of leg ordinals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartySelector {
    legs: Vec<usize>,
}

impl PartySelector {
    pub fn new(legs: &[usize], rank: usize) -> Result<Self> {
        let mut sorted = legs.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::ImproperParty(format!("duplicate leg in {legs:?}")));
        }
        if let Some(&bad) = sorted.iter().find(|&&l| l >= rank) {
            return Err(Error::ImproperParty(format!(
                "leg {bad} out of range for rank {rank}"
            )));
        }
        if sorted.is_empty() || sorted.len() == rank {
            return Err(Error::ImproperParty(format!(
                "{legs:?} is not a proper non-empty subset of the {rank} legs"
            )));
        }
        Ok(PartySelector { legs: sorted })
    }

    pub fn legs(&self) -> &[usize] {
        &self.legs
    }

    pub fn contains(&self, leg: usize) -> bool {
        self.legs.binary_search(&leg).is_ok()
    }

    pub fn complement(&self, rank: usize) -> Result<Self> {
        let rest: Vec<usize> = (0..rank).filter(|l| !self.contains(*l)).collect();
        PartySelector::new(&rest, rank)
    }

    fn check_rank(&self, rank: usize) -> Result<()> {
        match self.legs.last() {
            Some(&l) if l < rank && self.legs.len() < rank => Ok(()),
            _ => Err(Error::ImproperParty(format!(
                "{:?} is not a proper subset of the {rank} legs",
                self.legs
            ))),
        }
    }
}

/// Splits flat indices into (kept, rest) parts.
///
/// `table[k * rest_len + r]` is the flat index whose kept-leg digits form
/// `k` and whose remaining digits form `r`, both in ascending leg order.
pub(crate) struct IndexSplit {
    pub kept_dims: Vec<usize>,
    pub kept_len: usize,
    pub rest_len: usize,
    pub table: Vec<usize>,
}

impl IndexSplit {
    pub fn new(dims: &[usize], keep: &[usize]) -> Self {
        let kept_dims: Vec<usize> = keep.iter().map(|&l| dims[l]).collect();
        let rest_dims: Vec<usize> = (0..dims.len())
            .filter(|l| !keep.contains(l))
            .map(|l| dims[l])
            .collect();
        let kept_len: usize = kept_dims.iter().product();
        let rest_len: usize = rest_dims.iter().product();
        let total = kept_len * rest_len;
        let mut table = vec![0; total];
        let mut digits = vec![0usize; dims.len()];
        for flat in 0..total {
            let (mut k, mut r) = (0, 0);
            for (leg, &d) in digits.iter().enumerate() {
                if keep.contains(&leg) {
                    k = k * dims[leg] + d;
                } else {
                    r = r * dims[leg] + d;
                }
            }
            table[k * rest_len + r] = flat;
            // odometer increment, last leg fastest
            for leg in (0..dims.len()).rev() {
                digits[leg] += 1;
                if digits[leg] < dims[leg] {
                    break;
                }
                digits[leg] = 0;
            }
        }
        IndexSplit {
            kept_dims,
            kept_len,
            rest_len,
            table,
        }
    }
}

/// Pure state of a composite system: a dense complex tensor over the
/// truncated dimensions of its legs.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl StateVector {
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        validate_dims(dims)?;
        Ok(StateVector {
            dims: dims.to_vec(),
            data: vec![C64::new(0.0, 0.0); dims.iter().product()],
        })
    }

    pub fn from_amplitudes(dims: &[usize], data: Vec<C64>) -> Result<Self> {
        validate_dims(dims)?;
        let expected: usize = dims.iter().product();
        if data.len() != expected {
            return Err(Error::InvalidDims(format!(
                "{} amplitudes given for dimensions {dims:?} ({expected} expected)",
                data.len()
            )));
        }
        Ok(StateVector {
            dims: dims.to_vec(),
            data,
        })
    }

    /// The basis state with a single unit amplitude at `index`.
    pub fn basis(dims: &[usize], index: &[usize]) -> Result<Self> {
        let mut s = Self::zeros(dims)?;
        let flat = s.flat_index(index)?;
        s.data[flat] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.data
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// Dimensions and mutable amplitudes at once.
    pub fn split_mut(&mut self) -> (&[usize], &mut [C64]) {
        (&self.dims, &mut self.data)
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.data
    }

    pub fn flat_index(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.rank() || index.iter().zip(&self.dims).any(|(i, d)| i >= d) {
            return Err(Error::InvalidDims(format!(
                "index {index:?} out of range for dimensions {:?}",
                self.dims
            )));
        }
        Ok(index.iter().zip(&self.dims).fold(0, |acc, (i, d)| acc * d + i))
    }

    pub fn get(&self, index: &[usize]) -> Result<C64> {
        Ok(self.data[self.flat_index(index)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&mut self, factor: C64) {
        self.data.iter_mut().for_each(|c| *c *= factor);
    }

    /// Rescales to unit norm in place.
    pub fn renormalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / n;
        self.data.iter_mut().for_each(|c| *c *= inv);
        Ok(())
    }

    pub fn renormalized(mut self) -> Result<Self> {
        self.renormalize()?;
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Direct product with leg order `self` then `other`.
    pub fn direct_product(&self, other: &StateVector) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        validate_dims(&dims)?;
        let mut data = Vec::with_capacity(self.len() * other.len());
        for a in &self.data {
            data.extend(other.data.iter().map(|b| a * b));
        }
        Ok(StateVector { dims, data })
    }

    /// `|ψ⟩⟨ψ|`, trace equal to the squared norm.
    pub fn dyad(&self) -> DensityOperator {
        let n = self.len();
        let mut m = Vec::with_capacity(n * n);
        for a in &self.data {
            m.extend(self.data.iter().map(|b| a * b.conj()));
        }
        DensityOperator::from_parts(self.dims.clone(), m)
    }

    /// Reduced density operator on `keep` without forming the full dyad.
    pub fn reduced(&self, keep: &PartySelector) -> Result<DensityOperator> {
        keep.check_rank(self.rank())?;
        let split = IndexSplit::new(&self.dims, keep.legs());
        let (kl, rl) = (split.kept_len, split.rest_len);
        let mut m = vec![C64::new(0.0, 0.0); kl * kl];
        for k1 in 0..kl {
            for k2 in k1..kl {
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..rl {
                    acc += self.data[split.table[k1 * rl + r]]
                        * self.data[split.table[k2 * rl + r]].conj();
                }
                m[k1 * kl + k2] = acc;
                m[k2 * kl + k1] = acc.conj();
            }
        }
        Ok(DensityOperator::from_parts(split.kept_dims, m))
    }

    /// Reduced density operator of a single leg; the whole dyad for rank 1.
    pub fn reduced_leg(&self, leg: usize) -> Result<DensityOperator> {
        if self.rank() == 1 && leg == 0 {
            return Ok(self.dyad());
        }
        self.reduced(&PartySelector::new(&[leg], self.rank())?)
    }
}

impl Mul for &StateVector {
    type Output = StateVector;

    /// Direct product. Panics if the combined rank exceeds [`MAX_RANK`].
    fn mul(self, rhs: &StateVector) -> StateVector {
        self.direct_product(rhs)
            .expect("direct product exceeds the maximal rank")
    }
}

impl Mul for StateVector {
    type Output = StateVector;

    fn mul(self, rhs: StateVector) -> StateVector {
        &self * &rhs
    }
}
