//! Dense-matrix oracles shared by the integration tests. Matrices are
//! row-major `n×n` vectors; nothing here uses the library's kernels.

#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(r: &mut ChaCha8Rng) -> C64 {
    c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

pub fn random_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| random_complex(r)).collect()
}

pub fn zeros(n: usize) -> Mat {
    vec![c(0.0, 0.0); n * n]
}

pub fn eye(n: usize) -> Mat {
    let mut m = zeros(n);
    for i in 0..n {
        m[i * n + i] = c(1.0, 0.0);
    }
    m
}

pub fn dim_of(m: &Mat) -> usize {
    (m.len() as f64).sqrt().round() as usize
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (na, nb) = (dim_of(a), dim_of(b));
    let n = na * nb;
    let mut out = zeros(n);
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k) * n + j * nb + l] = a[i * na + j] * b[k * nb + l];
                }
            }
        }
    }
    out
}

/// `⊗_leg ops[leg]`, identity on legs without an operator.
pub fn lift_many(dims: &[usize], ops: &[(usize, Mat)]) -> Mat {
    let mut out = vec![c(1.0, 0.0)];
    for (leg, &d) in dims.iter().enumerate() {
        let factor = ops
            .iter()
            .find(|(l, _)| *l == leg)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| eye(d));
        out = kron(&out, &factor);
    }
    out
}

pub fn lift(dims: &[usize], leg: usize, op: &Mat) -> Mat {
    lift_many(dims, &[(leg, op.clone())])
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = dim_of(a);
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x == c(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += x * b[k * n + j];
            }
        }
    }
    out
}

pub fn matvec(a: &Mat, v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..n).map(|i| (0..n).map(|j| a[i * n + j] * v[j]).sum()).collect()
}

pub fn adjoint(a: &Mat) -> Mat {
    let n = dim_of(a);
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &Mat, s: C64) -> Mat {
    a.iter().map(|x| x * s).collect()
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn annihilation(n: usize) -> Mat {
    let mut m = zeros(n);
    for k in 1..n {
        m[(k - 1) * n + k] = c((k as f64).sqrt(), 0.0);
    }
    m
}

pub fn number(n: usize) -> Mat {
    let mut m = zeros(n);
    for k in 0..n {
        m[k * n + k] = c(k as f64, 0.0);
    }
    m
}

/// Schrödinger-picture `H_nh` and jump operator of a driven, damped
/// ladder system: `H = −δ n + i(η a† − η* a) − i·loss·n`, `J = √(2·loss) a`.
pub fn ladder(n: usize, delta: f64, loss: f64, eta: C64) -> (Mat, Mat) {
    let a = annihilation(n);
    let ad = adjoint(&a);
    let h = add(
        &scale(&number(n), c(-delta, -loss)),
        &add(&scale(&ad, I * eta), &scale(&a, -I * eta.conj())),
    );
    (h, scale(&a, c((2.0 * loss).sqrt(), 0.0)))
}

/// `i g* σ† a − i g σ a†` on legs (qbit, mode) of `dims`.
pub fn jaynes_cummings(dims: &[usize], qbit: usize, mode: usize, g: C64) -> Mat {
    let s = annihilation(2);
    let a = annihilation(dims[mode]);
    let up = lift_many(dims, &[(qbit, adjoint(&s)), (mode, a.clone())]);
    let down = lift_many(dims, &[(qbit, s), (mode, adjoint(&a))]);
    add(&scale(&up, I * g.conj()), &scale(&down, -I * g))
}

/// `k·(a_{l0} a_{l1} a_{l2}) + k*·h.c.`
pub fn ternary(dims: &[usize], legs: [usize; 3], k: C64) -> Mat {
    let lows: Vec<(usize, Mat)> = legs.iter().map(|&l| (l, annihilation(dims[l]))).collect();
    let ups: Vec<(usize, Mat)> = legs.iter().map(|&l| (l, adjoint(&annihilation(dims[l])))).collect();
    add(&scale(&lift_many(dims, &lows), k), &scale(&lift_many(dims, &ups), k.conj()))
}

/// `−i(H ρ − ρ H†) + Σ J ρ J†`.
pub fn lindblad(h: &Mat, jumps: &[Mat], rho: &Mat) -> Mat {
    let mut out = add(&matmul(h, rho), &scale(&matmul(rho, &adjoint(h)), c(-1.0, 0.0)));
    out = scale(&out, -I);
    for j in jumps {
        out = add(&out, &matmul(&matmul(j, rho), &adjoint(j)));
    }
    out
}

/// Reduced matrix on the kept legs (ascending), by explicit index sums.
pub fn partial_trace(dims: &[usize], rho: &Mat, keep: &[usize]) -> Mat {
    let n: usize = dims.iter().product();
    let kept: usize = keep.iter().map(|&l| dims[l]).product();
    let mut out = zeros(kept);
    let digits = |mut x: usize| {
        let mut d = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            d[k] = x % dims[k];
            x /= dims[k];
        }
        d
    };
    let reduced = |d: &[usize]| keep.iter().fold(0, |acc, &l| acc * dims[l] + d[l]);
    for i in 0..n {
        let di = digits(i);
        for j in 0..n {
            let dj = digits(j);
            let traced_equal = (0..dims.len()).all(|l| keep.contains(&l) || di[l] == dj[l]);
            if traced_equal {
                out[reduced(&di) * kept + reduced(&dj)] += rho[i * n + j];
            }
        }
    }
    out
}

/// Swaps ket and bra digits on the party's legs.
pub fn partial_transpose(dims: &[usize], rho: &Mat, party: &[usize]) -> Mat {
    let n: usize = dims.iter().product();
    let digits = |mut x: usize| {
        let mut d = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            d[k] = x % dims[k];
            x /= dims[k];
        }
        d
    };
    let flat = |d: &[usize]| d.iter().zip(dims).fold(0, |acc, (x, m)| acc * m + x);
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            let (mut di, mut dj) = (digits(i), digits(j));
            for &l in party {
                std::mem::swap(&mut di[l], &mut dj[l]);
            }
            out[flat(&di) * n + flat(&dj)] = rho[i * n + j];
        }
    }
    out
}

/// A random density matrix `B B† / Tr`.
pub fn random_density(r: &mut ChaCha8Rng, n: usize) -> Mat {
    let b = random_vec(r, n * n);
    let m = matmul(&b, &adjoint(&b));
    let tr: C64 = (0..n).map(|i| m[i * n + i]).sum();
    scale(&m, 1.0 / tr)
}
