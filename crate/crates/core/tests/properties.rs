//! Randomized invariants of the state algebra, the operator kernels and the
//! evolution drivers.

mod common;

use std::sync::Arc;

use common::*;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::Rng;
use qedsim::composite::{make_binary, Composite};
use qedsim::elements::{make_mode, make_qbit, JaynesCummings, ParsMode, ParsQbit, Picture};
use qedsim::evolution::{master_derivative, McwfTrajectory, ParsEvolution, QuantumState, TrajectoryState};
use qedsim::qdata::{DensityOperator, PartySelector, StateVector};
use qedsim::qop::{ProductTerm, Tridiagonal};
use qedsim::structure::Element;
use qedsim::trajio::{decode_state, encode_state, fmt_g};
use qedsim::C64;

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 2..=3)
}

fn party_of(rank: usize, mask: u8) -> Vec<usize> {
    let mut legs: Vec<usize> = (0..rank).filter(|l| mask >> l & 1 == 1).collect();
    if legs.is_empty() || legs.len() == rank {
        legs = vec![0];
    }
    legs
}

fn density(dims: &[usize], seed: u64) -> (Mat, DensityOperator) {
    let n: usize = dims.iter().product();
    let m = random_density(&mut rng(seed), n);
    (m.clone(), DensityOperator::from_matrix(dims, m).unwrap())
}

fn trace(m: &[C64]) -> C64 {
    let n = dim_of(&m.to_vec());
    (0..n).map(|i| m[i * n + i]).sum()
}

/// Negativity from the eigenvalues of the partial transpose, computed by
/// an external Hermitian eigensolver.
fn negativity_oracle(dims: &[usize], rho: &Mat, party: &[usize]) -> f64 {
    let pt = partial_transpose(dims, rho, party);
    let n = dim_of(&pt);
    let m = DMatrix::from_fn(n, n, |i, j| pt[i * n + j]);
    let abs_sum: f64 = SymmetricEigen::new(m).eigenvalues.iter().map(|l| l.abs()).sum();
    (abs_sum - 1.0) / 2.0
}

fn jc_system(picture: Picture, kappa: f64, gamma: f64, cutoff: usize, g: C64) -> Composite {
    let q: Arc<dyn Element> = Arc::new(
        make_qbit(&ParsQbit { gamma, delta: -0.4, eta: c(0.2, 0.1), ..Default::default() }, picture).unwrap(),
    );
    let m: Arc<dyn Element> = Arc::new(
        make_mode(&ParsMode { cutoff, kappa, delta: 0.7, eta: c(0.0, 0.3), ..Default::default() }, picture).unwrap(),
    );
    make_binary(Arc::new(JaynesCummings::new(q, m, g).unwrap())).unwrap()
}

fn random_state(dims: &[usize], seed: u64) -> StateVector {
    let n: usize = dims.iter().product();
    StateVector::from_amplitudes(dims, random_vec(&mut rng(seed), n)).unwrap().renormalized().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_preserves_trace_and_matches_index_sums(
        dims in dims_strategy(), seed in any::<u64>(), mask in any::<u8>()
    ) {
        let (m, rho) = density(&dims, seed);
        let keep = party_of(dims.len(), mask);
        let reduced = rho.partial_trace(&PartySelector::new(&keep, dims.len()).unwrap()).unwrap();
        prop_assert!((reduced.trace() - c(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(reduced.hermiticity_defect() < 1e-12);
        prop_assert!(max_diff(reduced.elements(), &partial_trace(&dims, &m, &keep)) < 1e-13);
    }

    #[test]
    fn partial_transpose_is_an_involution_preserving_trace(
        dims in dims_strategy(), seed in any::<u64>(), mask in any::<u8>()
    ) {
        let (_, rho) = density(&dims, seed);
        let party = PartySelector::new(&party_of(dims.len(), mask), dims.len()).unwrap();
        let once = rho.partial_transpose(&party).unwrap();
        prop_assert!((once.trace() - rho.trace()).norm() < 1e-13);
        prop_assert!(once.hermiticity_defect() < 1e-13);
        let twice = once.partial_transpose(&party).unwrap();
        prop_assert!(max_diff(twice.elements(), rho.elements()) == 0.0);
    }

    #[test]
    fn negativity_is_nonnegative_and_matches_an_external_eigensolver(
        dims in dims_strategy(), seed in any::<u64>(), mask in any::<u8>()
    ) {
        let (m, rho) = density(&dims, seed);
        let legs = party_of(dims.len(), mask);
        let party = PartySelector::new(&legs, dims.len()).unwrap();
        let neg = rho.negativity(&party).unwrap();
        prop_assert!(neg >= 0.0);
        prop_assert!((neg - negativity_oracle(&dims, &m, &legs)).abs() < 1e-10);
        let complement = party.complement(dims.len()).unwrap();
        prop_assert!((neg - rho.negativity(&complement).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn product_states_have_zero_negativity(
        d0 in 2usize..=4, d1 in 2usize..=4, s0 in any::<u64>(), s1 in any::<u64>()
    ) {
        let psi = random_state(&[d0], s0).direct_product(&random_state(&[d1], s1)).unwrap();
        let party = PartySelector::new(&[0], 2).unwrap();
        prop_assert!(psi.dyad().negativity(&party).unwrap() < 1e-12);
    }

    #[test]
    fn tridiagonal_terms_are_linear_and_adjoint_consistent(
        dim in 2usize..=6, seed in any::<u64>(), t in -2.0f64..2.0
    ) {
        let mut r = rng(seed);
        let offset = 1 + (seed as usize) % (dim - 1);
        let op = Tridiagonal::new(
            dim, offset, random_vec(&mut r, dim), random_vec(&mut r, dim - offset), random_vec(&mut r, dim - offset),
        )
        .unwrap()
        .with_freqs(random_vec(&mut r, dim).iter().map(|f| c(f.re, 0.0)).collect())
        .unwrap();
        let term = ProductTerm::single(random_complex(&mut r), 0, op);
        let (x, y) = (random_state(&[dim], r.random::<u64>()), random_state(&[dim], r.random::<u64>()));
        let (a, b) = (random_complex(&mut r), random_complex(&mut r));
        let apply = |term: &ProductTerm, v: &StateVector| {
            let mut acc = StateVector::zeros(&[dim]).unwrap();
            term.apply(t, v, &mut acc).unwrap();
            acc
        };
        let combo: Vec<C64> = x.amplitudes().iter().zip(y.amplitudes()).map(|(p, q)| a * p + b * q).collect();
        let lhs = apply(&term, &StateVector::from_amplitudes(&[dim], combo).unwrap());
        let (tx, ty) = (apply(&term, &x), apply(&term, &y));
        let rhs: Vec<C64> = tx.amplitudes().iter().zip(ty.amplitudes()).map(|(p, q)| a * p + b * q).collect();
        prop_assert!(max_diff(lhs.amplitudes(), &rhs) < 1e-12);
        // ⟨y, T x⟩ = ⟨T† y, x⟩ for real frequencies
        let left = y.inner(&tx);
        let right = apply(&term.adjoint(), &y).inner(&x);
        prop_assert!((left - right).norm() < 1e-12);
    }

    #[test]
    fn anti_hermitian_part_of_h_nh_is_the_jump_sum(
        kappa in 0.0f64..1.5, gamma in 0.0f64..1.5, cutoff in 2usize..=5, gr in -1.0f64..1.0, gi in -1.0f64..1.0
    ) {
        let sys = jc_system(Picture::Sch, kappa, gamma, cutoff, c(gr, gi));
        let dims = sys.dims().to_vec();
        let n = sys.total_dim();
        // columns of H_nh from dψ = −i H_nh ψ on basis vectors; J likewise
        let mut h = zeros(n);
        let mut jumps = vec![zeros(n); sys.channel_count()];
        for col in 0..n {
            let mut e = StateVector::zeros(&dims).unwrap();
            e.amplitudes_mut()[col] = c(1.0, 0.0);
            let mut d = StateVector::zeros(&dims).unwrap();
            sys.add_hamiltonian(0.0, &e, &mut d).unwrap();
            for row in 0..n {
                h[row * n + col] = I * d.amplitudes()[row];
            }
            for (m, jm) in jumps.iter_mut().enumerate() {
                let je = sys.apply_jump(m, &e).unwrap();
                for row in 0..n {
                    jm[row * n + col] = je.amplitudes()[row];
                }
            }
        }
        let defect = add(&h, &scale(&adjoint(&h), c(-1.0, 0.0)));
        let mut expected = zeros(n);
        for j in &jumps {
            expected = add(&expected, &matmul(&adjoint(j), j));
        }
        prop_assert!(max_diff(&defect, &scale(&expected, -I)) < 1e-12);
    }

    #[test]
    fn jump_rates_are_squared_norms(
        kappa in 0.0f64..1.5, gamma in 0.0f64..1.5, seed in any::<u64>()
    ) {
        let sys = jc_system(Picture::UIP, kappa, gamma, 4, c(0.6, 0.0));
        let psi = random_state(sys.dims(), seed);
        for info in sys.jumps(&psi).unwrap() {
            let norm = sys.apply_jump(info.index, &psi).unwrap().norm_sqr();
            prop_assert!((info.rate - norm).abs() < 1e-12);
        }
    }

    #[test]
    fn master_derivative_is_traceless_and_hermitian(
        kappa in 0.0f64..1.5, gamma in 0.0f64..1.5, seed in any::<u64>(), tau in 0.0f64..1.0
    ) {
        for picture in [Picture::Sch, Picture::UIP] {
            let sys = jc_system(picture, kappa, gamma, 3, c(0.8, -0.2));
            let (_, rho) = density(sys.dims(), seed);
            let d = master_derivative(&sys, tau, &rho).unwrap();
            prop_assert!(trace(d.elements()).norm() < 1e-12);
            prop_assert!(d.hermiticity_defect() < 1e-12);
        }
    }

    #[test]
    fn proximity_is_negative_exactly_on_jumps(
        seed in any::<u64>(), kappa in 0.1f64..2.0, gamma in 0.1f64..2.0
    ) {
        let sys = jc_system(Picture::UIP, kappa, gamma, 4, c(1.0, 0.0));
        let pars = ParsEvolution { dp_limit: 0.1, ..Default::default() };
        let mut traj = McwfTrajectory::new(&sys, random_state(sys.dims(), seed), &pars, seed).unwrap();
        let mut r = rng(seed ^ 0x5eed);
        let mut draw = move || -> f64 { r.random_range(0.0..0.3) };
        let mut jumps = 0;
        for k in 1..=20 {
            let report = traj.step_with_random(0.05 * k as f64, &mut draw).unwrap();
            let proximity = report.jump_proximity.expect("lossy system reports proximity");
            prop_assert_eq!(proximity < 0.0, report.jump.is_some());
            jumps += report.jump.is_some() as usize;
            prop_assert!((traj.state_vector().norm() - 1.0).abs() < 1e-12);
        }
        prop_assume!(jumps > 0);
    }

    #[test]
    fn formatted_numbers_keep_six_significant_digits(x in prop::num::f64::NORMAL) {
        let back: f64 = fmt_g(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-6 * x.abs());
    }

    #[test]
    fn state_files_round_trip(
        dims in dims_strategy(), seed in any::<u64>(), t in 0.0f64..100.0, dt in 1e-9f64..1.0,
        rng_bytes in prop::collection::vec(any::<u8>(), 0..64), mixed in any::<bool>()
    ) {
        let state = if mixed {
            QuantumState::Mixed(density(&dims, seed).1)
        } else {
            QuantumState::Pure(random_state(&dims, seed))
        };
        let saved = TrajectoryState { t, state, rng: rng_bytes.clone(), dt_next: dt };
        let decoded = decode_state(&encode_state(&saved)).unwrap();
        prop_assert_eq!(decoded.t, t);
        prop_assert_eq!(decoded.dt_next, dt);
        prop_assert_eq!(decoded.rng, rng_bytes);
        let (expected_dims, amps): (Vec<usize>, Vec<C64>) = match &saved.state {
            QuantumState::Pure(psi) => (dims.clone(), psi.amplitudes().to_vec()),
            QuantumState::Mixed(rho) => (dims.iter().chain(&dims).copied().collect(), rho.elements().to_vec()),
        };
        prop_assert_eq!(decoded.dims, expected_dims);
        prop_assert_eq!(decoded.amplitudes, amps);
    }
}
