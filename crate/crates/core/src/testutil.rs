//! Dense-matrix oracles for unit tests. Deliberately naive: explicit
//! Kronecker products and matrix-vector loops over flat indices.

use num_complex::Complex64 as C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Deterministic pseudo-random numbers in [-0.5, 0.5).
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1))
    }

    pub fn next(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    pub fn complex(&mut self) -> C64 {
        c(self.next(), self.next())
    }

    pub fn vec(&mut self, n: usize) -> Vec<C64> {
        (0..n).map(|_| self.complex()).collect()
    }
}

pub fn identity(n: usize) -> Vec<C64> {
    let mut m = vec![c(0.0, 0.0); n * n];
    for i in 0..n {
        m[i * n + i] = c(1.0, 0.0);
    }
    m
}

pub fn kron(a: &[C64], na: usize, b: &[C64], nb: usize) -> Vec<C64> {
    let n = na * nb;
    let mut m = vec![c(0.0, 0.0); n * n];
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    m[(i * nb + k) * n + (j * nb + l)] = a[i * na + j] * b[k * nb + l];
                }
            }
        }
    }
    m
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` at position `leg`.
pub fn lift(op: &[C64], dims: &[usize], leg: usize) -> Vec<C64> {
    let mut m = vec![c(1.0, 0.0)];
    let mut n = 1;
    for (l, &d) in dims.iter().enumerate() {
        let factor = if l == leg { op.to_vec() } else { identity(d) };
        m = kron(&m, n, &factor, d);
        n *= d;
    }
    m
}

pub fn matvec(m: &[C64], v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..n)
        .map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum())
        .collect()
}

pub fn matmul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut m = vec![c(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                m[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    m
}

pub fn adjoint(a: &[C64], n: usize) -> Vec<C64> {
    let mut m = vec![c(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = a[j * n + i].conj();
        }
    }
    m
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Dense matrix of a linear map given by its action on basis vectors.
pub fn columns(n: usize, f: impl Fn(&[C64]) -> Vec<C64>) -> Vec<C64> {
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        let col = f(&e);
        for i in 0..n {
            m[i * n + j] = col[i];
        }
    }
    m
}

/// Diagonal matrix.
pub fn diag(d: &[C64]) -> Vec<C64> {
    let n = d.len();
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for (i, v) in d.iter().enumerate() {
        m[i * n + i] = *v;
    }
    m
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}
