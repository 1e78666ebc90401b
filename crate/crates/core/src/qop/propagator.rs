use num_complex::Complex64 as C64;

use crate::qdata::StateVector;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Exact free evolution of one leg: amplitude `n` is multiplied by
/// `exp(z_n · t)` going forward and by `exp(−z_n · t)` going backward.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalPropagator {
    leg: usize,
    exponents: Vec<C64>,
}

const UNITARITY_TOLERANCE: f64 = 1e-14;

impl DiagonalPropagator {
    pub fn new(leg: usize, exponents: Vec<C64>) -> Self {
        DiagonalPropagator { leg, exponents }
    }

    pub fn leg(&self) -> usize {
        self.leg
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[C64] {
        &self.exponents
    }

    pub fn is_unitary(&self) -> bool {
        self.exponents.iter().all(|z| z.re.abs() <= UNITARITY_TOLERANCE)
    }

    /// The same propagator attached to a different leg.
    pub fn on_leg(&self, leg: usize) -> Self {
        DiagonalPropagator {
            leg,
            exponents: self.exponents.clone(),
        }
    }

    /// Frequencies `ω_n = i·z_n`, so that `exp(z_n t) = exp(−i ω_n t)`.
    pub fn frequencies(&self) -> Vec<C64> {
        self.exponents.iter().map(|z| C64::new(0.0, 1.0) * z).collect()
    }

    /// Applies the propagator to `leg` of a raw buffer. With `conjugate`,
    /// `conj(z_n)` is used instead, which is what bra legs need for `UρU†`.
    pub(crate) fn apply_raw(
        &self,
        dims: &[usize],
        leg: usize,
        data: &mut [C64],
        t: f64,
        direction: Direction,
        conjugate: bool,
    ) {
        if t == 0.0 {
            return;
        }
        let d = dims[leg];
        let stride: usize = dims[leg + 1..].iter().product();
        let block = d * stride;
        let outer = data.len() / block;
        let sign = match direction {
            Direction::Forward => t,
            Direction::Backward => -t,
        };
        for (n, z) in self.exponents.iter().enumerate() {
            let z = if conjugate { z.conj() } else { *z };
            if z == C64::new(0.0, 0.0) {
                continue;
            }
            let factor = (z * sign).exp();
            for o in 0..outer {
                let start = o * block + n * stride;
                for amp in &mut data[start..start + stride] {
                    *amp *= factor;
                }
            }
        }
    }

    pub fn apply(&self, t: f64, state: &mut StateVector, direction: Direction) -> Result<()> {
        let d = state.dims().get(self.leg).copied();
        if d != Some(self.dim()) {
            return Err(Error::LegDimensionMismatch(format!(
                "propagator of dimension {} on leg {} of a state with dimensions {:?}",
                self.dim(),
                self.leg,
                state.dims()
            )));
        }
        let (dims, data) = state.split_mut();
        self.apply_raw(dims, self.leg, data, t, direction, false);
        Ok(())
    }
}
