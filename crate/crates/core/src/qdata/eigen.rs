//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a[p][q]` with a
//! diagonal unitary, then applies the real symmetric Jacobi rotation that
//! annihilates the now real pivot.

use num_complex::Complex64 as C64;

use crate::{Error, Result};

pub const JACOBI_MAX_SWEEPS: usize = 100;
pub const JACOBI_OFF_TOLERANCE: f64 = 1e-12;
const HERMITICITY_TOLERANCE: f64 = 1e-9;

/// Ascending eigenvalues of the row-major `n × n` Hermitian matrix `m`.
pub fn hermitian_eigenvalues(m: &[C64], n: usize) -> Result<Vec<f64>> {
    if m.len() != n * n {
        return Err(Error::InvalidDims(format!(
            "{} elements for a {n}x{n} matrix",
            m.len()
        )));
    }
    let scale = m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let mut defect: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((m[i * n + j] - m[j * n + i].conj()).norm());
        }
    }
    if defect > HERMITICITY_TOLERANCE * scale {
        return Err(Error::NotHermitian(defect));
    }

    // work on the Hermitian part
    let mut a = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (m[i * n + j] + m[j * n + i].conj()) * 0.5;
        }
    }

    let off_norm = |a: &[C64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let tolerance = JACOBI_OFF_TOLERANCE * scale;
    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= tolerance {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, n, p, q);
            }
        }
        sweeps += 1;
    }

    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

fn rotate(a: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let abs = apq.norm();
    if abs < f64::MIN_POSITIVE {
        return;
    }
    let phase = apq / abs;
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = (aqq - app) / (2.0 * abs);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U = diag(1, conj(phase)) · [[c, s], [-s, c]] restricted to (p, q)
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * u_pp + akq * u_qp;
        a[k * n + q] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[q * n + k] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[p * n + q] = C64::new(0.0, 0.0);
    a[q * n + p] = C64::new(0.0, 0.0);
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;
}
