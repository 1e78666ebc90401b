//! Structured one-leg operators and their application to single legs of
//! multi-leg states.
//!
//! Interaction-picture convention: a [`Tridiagonal`] carrying frequencies
//! `ω_n` represents `U⁻¹(t)·M·U(t)` with `U(t) = exp(−i·diag(ω)·t)`, that is
//!
//! ```text
//! M[m,n]  ->  M[m,n] · exp(i (ω_m − ω_n) t)
//! ```
//!
//! so `upper[n] = M[n, n+K]` gains `exp(i (ω_n − ω_{n+K}) t)` and
//! `lower[n] = M[n+K, n]` gains `exp(i (ω_{n+K} − ω_n) t)`. Frequencies are
//! complex so that a non-unitary ("full") interaction picture, where `U`
//! also absorbs loss, uses the same machinery. For a unitary picture they
//! are real and the dressing is the usual `U†MU`.

mod propagator;
mod tridiagonal;

use std::borrow::Cow;

use num_complex::Complex64 as C64;

use crate::qdata::StateVector;
use crate::{Error, Result};

pub use propagator::{DiagonalPropagator, Direction};
pub use tridiagonal::Tridiagonal;

pub(crate) fn check_same_dims(a: &[usize], b: &[usize]) -> Result<()> {
    if a != b {
        return Err(Error::LegDimensionMismatch(format!(
            "input has dimensions {a:?}, accumulator {b:?}"
        )));
    }
    Ok(())
}

/// `acc += prefactor · (op on leg `leg` of input)` on raw row-major buffers.
///
/// No dimension checks; callers validate.
pub(crate) fn apply_tridiagonal_raw(
    op: &Tridiagonal,
    dims: &[usize],
    leg: usize,
    input: &[C64],
    acc: &mut [C64],
    prefactor: C64,
) {
    let d = dims[leg];
    let stride: usize = dims[leg + 1..].iter().product();
    let block = d * stride;
    let outer = input.len() / block;
    let k = op.offset();
    let (diag, upper, lower) = (op.diagonal(), op.upper(), op.lower());
    let (has_diag, has_upper, has_lower) = op.nonzero_bands();

    for o in 0..outer {
        let base = o * block;
        for n in 0..d {
            let row = base + n * stride;
            if has_diag {
                let c = prefactor * diag[n];
                if c != C64::new(0.0, 0.0) {
                    for i in 0..stride {
                        acc[row + i] += c * input[row + i];
                    }
                }
            }
            if has_upper && n + k < d {
                let c = prefactor * upper[n];
                let src = base + (n + k) * stride;
                for i in 0..stride {
                    acc[row + i] += c * input[src + i];
                }
            }
            if has_lower && n >= k {
                let c = prefactor * lower[n - k];
                let src = base + (n - k) * stride;
                for i in 0..stride {
                    acc[row + i] += c * input[src + i];
                }
            }
        }
    }
}

/// `accumulator += prefactor · (op acting on leg `leg` of input)`.
pub fn apply_tridiagonal(
    op: &Tridiagonal,
    leg: usize,
    input: &StateVector,
    accumulator: &mut StateVector,
    prefactor: C64,
) -> Result<()> {
    check_same_dims(input.dims(), accumulator.dims())?;
    let d = *input.dims().get(leg).ok_or_else(|| {
        Error::LegDimensionMismatch(format!("leg {leg} out of range for rank {}", input.rank()))
    })?;
    if d != op.dim() {
        return Err(Error::LegDimensionMismatch(format!(
            "operator of dimension {} applied to leg {leg} of dimension {d}",
            op.dim()
        )));
    }
    apply_tridiagonal_raw(
        op,
        input.dims(),
        leg,
        input.amplitudes(),
        accumulator.amplitudes_mut(),
        prefactor,
    );
    Ok(())
}

/// A coefficient times a leg-wise product of tridiagonal factors.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTerm {
    coefficient: C64,
    factors: Vec<(usize, Tridiagonal)>,
}

impl ProductTerm {
    /// Factors are sorted by leg; legs must be distinct.
    pub fn new(coefficient: C64, mut factors: Vec<(usize, Tridiagonal)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidOperator("product term without factors".into()));
        }
        factors.sort_by_key(|(leg, _)| *leg);
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidOperator(
                "product term acts twice on the same leg".into(),
            ));
        }
        Ok(ProductTerm {
            coefficient,
            factors,
        })
    }

    pub fn single(coefficient: C64, leg: usize, op: Tridiagonal) -> Self {
        ProductTerm {
            coefficient,
            factors: vec![(leg, op)],
        }
    }

    pub fn coefficient(&self) -> C64 {
        self.coefficient
    }

    pub fn factors(&self) -> &[(usize, Tridiagonal)] {
        &self.factors
    }

    pub fn legs(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.iter().map(|(l, _)| *l)
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> Self {
        ProductTerm {
            coefficient: self.coefficient.conj(),
            factors: self
                .factors
                .iter()
                .map(|(l, op)| (*l, op.adjoint()))
                .collect(),
        }
    }

    /// Elementwise complex conjugate (used on bra legs of a density operator).
    pub fn conj(&self) -> Self {
        ProductTerm {
            coefficient: self.coefficient.conj(),
            factors: self.factors.iter().map(|(l, op)| (*l, op.conj())).collect(),
        }
    }

    /// Checks each factor's dimension against the leg it is mapped to.
    pub(crate) fn check_mapped(&self, leg_map: &[usize], dims: &[usize]) -> Result<()> {
        for (leg, op) in &self.factors {
            let target = *leg_map.get(*leg).ok_or_else(|| {
                Error::LegDimensionMismatch(format!("term leg {leg} has no mapping"))
            })?;
            let d = *dims.get(target).ok_or_else(|| {
                Error::LegDimensionMismatch(format!("leg {target} out of range"))
            })?;
            if d != op.dim() {
                return Err(Error::LegDimensionMismatch(format!(
                    "factor of dimension {} mapped to leg {target} of dimension {d}",
                    op.dim()
                )));
            }
        }
        Ok(())
    }

    /// `acc += prefactor · coefficient · (∏ dressed factors) input`, where
    /// term leg `l` acts on state leg `leg_map[l]`. Unchecked.
    pub(crate) fn apply_mapped_raw(
        &self,
        t: f64,
        leg_map: &[usize],
        dims: &[usize],
        input: &[C64],
        acc: &mut [C64],
        prefactor: C64,
    ) {
        let total = prefactor * self.coefficient;
        let last = self.factors.len() - 1;
        let mut current: Cow<'_, [C64]> = Cow::Borrowed(input);
        for (i, (leg, op)) in self.factors.iter().enumerate() {
            let op: Cow<'_, Tridiagonal> = if op.freqs().is_some() && t != 0.0 {
                Cow::Owned(op.dress(t))
            } else {
                Cow::Borrowed(op)
            };
            if i == last {
                apply_tridiagonal_raw(&op, dims, leg_map[*leg], &current, acc, total);
            } else {
                let mut next = vec![C64::new(0.0, 0.0); input.len()];
                apply_tridiagonal_raw(
                    &op,
                    dims,
                    leg_map[*leg],
                    &current,
                    &mut next,
                    C64::new(1.0, 0.0),
                );
                current = Cow::Owned(next);
            }
        }
    }

    /// `accumulator += coefficient · (∏ factors dressed at t) input`, legs
    /// taken literally as state legs.
    pub fn apply(&self, t: f64, input: &StateVector, accumulator: &mut StateVector) -> Result<()> {
        check_same_dims(input.dims(), accumulator.dims())?;
        let identity: Vec<usize> = (0..input.rank()).collect();
        self.check_mapped(&identity, input.dims())?;
        self.apply_mapped_raw(
            t,
            &identity,
            input.dims(),
            input.amplitudes(),
            accumulator.amplitudes_mut(),
            C64::new(1.0, 0.0),
        );
        Ok(())
    }
}
