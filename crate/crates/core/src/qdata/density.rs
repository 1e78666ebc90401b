use num_complex::Complex64 as C64;

use super::{eigen::hermitian_eigenvalues, strides, validate_dims, IndexSplit, PartySelector};
use crate::{Error, Result};

/// Density operator over the legs `dims`, stored as a dense `N × N` matrix
/// (`N` the product of `dims`) with the ket multi-index as row.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl DensityOperator {
    pub(crate) fn from_parts(dims: Vec<usize>, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), dims.iter().product::<usize>().pow(2));
        DensityOperator { dims, data }
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        validate_dims(dims)?;
        let n: usize = dims.iter().product();
        Ok(DensityOperator {
            dims: dims.to_vec(),
            data: vec![C64::new(0.0, 0.0); n * n],
        })
    }

    /// From a row-major `N × N` matrix.
    pub fn from_matrix(dims: &[usize], data: Vec<C64>) -> Result<Self> {
        validate_dims(dims)?;
        let n: usize = dims.iter().product();
        if data.len() != n * n {
            return Err(Error::InvalidDims(format!(
                "{} elements given for a {n}x{n} density operator",
                data.len()
            )));
        }
        Ok(DensityOperator {
            dims: dims.to_vec(),
            data,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    /// Matrix dimension `N`.
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Leg dimensions of the rank-`2R` tensor view: kets then bras.
    pub fn tensor_dims(&self) -> Vec<usize> {
        let mut d = self.dims.clone();
        d.extend_from_slice(&self.dims);
        d
    }

    pub fn elements(&self) -> &[C64] {
        &self.data
    }

    pub fn elements_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_elements(self) -> Vec<C64> {
        self.data
    }

    /// Element `ρ[row; col]` by flat multi-indices.
    pub fn at(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> C64 {
        let n = self.dim();
        (0..n).map(|i| self.data[i * n + i]).sum()
    }

    pub fn scale(&mut self, factor: C64) {
        self.data.iter_mut().for_each(|c| *c *= factor);
    }

    /// Adds `weight · other`; dimensions must agree.
    pub fn add_scaled(&mut self, other: &DensityOperator, weight: f64) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::LegDimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * weight;
        }
        Ok(())
    }

    /// Divides by the real part of the trace.
    pub fn normalized(mut self) -> Result<Self> {
        let tr = self.trace().re;
        if tr == 0.0 || !tr.is_finite() {
            return Err(Error::ZeroNorm);
        }
        self.scale(C64::new(1.0 / tr, 0.0));
        Ok(self)
    }

    /// `max |ρ[i;j] − conj(ρ[j;i])|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// Traces out every leg not in `keep`; kept legs stay in ascending order.
    pub fn partial_trace(&self, keep: &PartySelector) -> Result<DensityOperator> {
        keep.check_rank(self.rank())?;
        let n = self.dim();
        let split = IndexSplit::new(&self.dims, keep.legs());
        let (kl, rl) = (split.kept_len, split.rest_len);
        let mut m = vec![C64::new(0.0, 0.0); kl * kl];
        for k1 in 0..kl {
            for k2 in 0..kl {
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..rl {
                    acc += self.data[split.table[k1 * rl + r] * n + split.table[k2 * rl + r]];
                }
                m[k1 * kl + k2] = acc;
            }
        }
        Ok(DensityOperator::from_parts(split.kept_dims, m))
    }

    /// Swaps ket and bra indices of the legs in `party`.
    pub fn partial_transpose(&self, party: &PartySelector) -> Result<DensityOperator> {
        party.check_rank(self.rank())?;
        let n = self.dim();
        let st = strides(&self.dims);
        // party-leg part of each flat index
        let party_part: Vec<usize> = (0..n)
            .map(|flat| {
                party
                    .legs()
                    .iter()
                    .map(|&l| (flat / st[l]) % self.dims[l] * st[l])
                    .sum()
            })
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let (pi, pj) = (party_part[i], party_part[j]);
                let ni = i - pi + pj;
                let nj = j - pj + pi;
                out[ni * n + nj] = self.data[i * n + j];
            }
        }
        Ok(DensityOperator::from_parts(self.dims.clone(), out))
    }

    /// Ascending eigenvalues of the Hermitian matrix.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.data, self.dim())
    }

    /// Sum of the magnitudes of the negative eigenvalues of the partial
    /// transpose with respect to `party`, evaluated on `ρ / Tr ρ`.
    pub fn negativity(&self, party: &PartySelector) -> Result<f64> {
        let tr = self.trace().re;
        if tr == 0.0 || !tr.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let pt = self.partial_transpose(party)?;
        let lambdas = pt.eigenvalues()?;
        Ok(lambdas.iter().map(|l| (-l).max(0.0)).sum::<f64>() / tr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdata::StateVector;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> StateVector {
        let h = 1.0 / 2f64.sqrt();
        StateVector::from_amplitudes(&[2, 2], vec![c(h), c(0.0), c(0.0), c(h)]).unwrap()
    }

    #[test]
    fn bell_reduced_is_maximally_mixed() {
        let rho = bell().dyad();
        let r = rho.partial_trace(&PartySelector::new(&[0], 2).unwrap()).unwrap();
        let expected = [c(0.5), c(0.0), c(0.0), c(0.5)];
        for (a, b) in r.elements().iter().zip(expected) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn product_state_reduction() {
        let psi = StateVector::from_amplitudes(&[2], vec![c(0.6), C64::new(0.0, 0.8)]).unwrap();
        let phi = StateVector::from_amplitudes(&[3], vec![c(0.0), c(0.8), c(-0.6)]).unwrap();
        let rho = (&psi * &phi).dyad();
        let r = rho.partial_trace(&PartySelector::new(&[1], 2).unwrap()).unwrap();
        for (a, b) in r.elements().iter().zip(phi.dyad().elements()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert_eq!(r.dims(), &[3]);
    }

    #[test]
    fn improper_party_rejected() {
        let rho = bell().dyad();
        // a selector built for rank 3 that covers both legs of a rank-2 state
        let full = PartySelector::new(&[0, 1], 3).unwrap();
        assert!(matches!(rho.partial_trace(&full), Err(Error::ImproperParty(_))));
        assert!(matches!(rho.partial_transpose(&full), Err(Error::ImproperParty(_))));
    }

    #[test]
    fn diagonal_unchanged_by_partial_transpose() {
        let mut rho = DensityOperator::zeros(&[2, 3]).unwrap();
        for i in 0..6 {
            rho.elements_mut()[i * 6 + i] = c(i as f64 + 1.0);
        }
        let pt = rho.partial_transpose(&PartySelector::new(&[1], 2).unwrap()).unwrap();
        assert_eq!(pt, rho);
    }

    #[test]
    fn partial_transpose_involution() {
        let psi = StateVector::from_amplitudes(
            &[2, 3],
            (0..6).map(|k| C64::new(k as f64 * 0.3 - 0.7, (k * k) as f64 * 0.1)).collect(),
        )
        .unwrap();
        let rho = psi.dyad();
        let party = PartySelector::new(&[0], 2).unwrap();
        let twice = rho
            .partial_transpose(&party)
            .unwrap()
            .partial_transpose(&party)
            .unwrap();
        assert_eq!(twice, rho);
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let pt = bell()
            .dyad()
            .partial_transpose(&PartySelector::new(&[0], 2).unwrap())
            .unwrap();
        let ev = pt.eigenvalues().unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn negativity_examples() {
        let party = PartySelector::new(&[0], 2).unwrap();
        assert!((bell().dyad().negativity(&party).unwrap() - 0.5).abs() < 1e-12);

        let product = &StateVector::basis(&[2], &[1]).unwrap()
            * &StateVector::from_amplitudes(&[2], vec![c(0.6), c(0.8)]).unwrap();
        assert!(product.dyad().negativity(&party).unwrap().abs() < 1e-12);

        // Werner state at the separability threshold p = 1/3
        let p = 1.0 / 3.0;
        let mut werner = bell().dyad();
        werner.scale(c(p));
        for i in 0..4 {
            werner.elements_mut()[i * 4 + i] += c((1.0 - p) / 4.0);
        }
        assert!(werner.negativity(&party).unwrap().abs() < 1e-12);
    }
}
