//! Embedded Cash–Karp 4(5) Runge–Kutta stepper with local error control.
//!
//! The controller is memoryless: the next stepsize depends only on the
//! error of the step just taken, so the stepsize alone is the full stepper
//! state.

use num_complex::Complex64 as C64;

use crate::{Error, Result};

const SAFETY: f64 = 0.9;
const GROW_EXPONENT: f64 = -0.2;
const SHRINK_EXPONENT: f64 = -0.25;
const MAX_GROWTH: f64 = 5.0;
const MIN_SHRINK: f64 = 0.1;
// Below this error ratio the growth is capped at MAX_GROWTH.
const ERRCON: f64 = 1.89e-4;

const A: [f64; 6] = [0.0, 0.2, 0.3, 0.6, 1.0, 0.875];
const B21: f64 = 0.2;
const B3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const B4: [f64; 3] = [0.3, -0.9, 1.2];
const B5: [f64; 4] = [-11.0 / 54.0, 2.5, -70.0 / 27.0, 35.0 / 27.0];
const B6: [f64; 5] = [
    1631.0 / 55296.0,
    175.0 / 512.0,
    575.0 / 13824.0,
    44275.0 / 110592.0,
    253.0 / 4096.0,
];
const C: [f64; 6] = [37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0];
const DC: [f64; 6] = [
    37.0 / 378.0 - 2825.0 / 27648.0,
    0.0,
    250.0 / 621.0 - 18575.0 / 48384.0,
    125.0 / 594.0 - 13525.0 / 55296.0,
    -277.0 / 14336.0,
    512.0 / 1771.0 - 0.25,
];

/// Outcome of one accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeStep {
    pub t: f64,
    pub dt_did: f64,
    pub dt_next: f64,
}

/// Reusable workspace plus tolerances.
#[derive(Clone, Debug)]
pub struct OdeStepper {
    eps: f64,
    eps_abs: f64,
    min_dt: f64,
    k: [Vec<C64>; 6],
    ytmp: Vec<C64>,
    yerr: Vec<C64>,
}

impl OdeStepper {
    /// `min_dt` is the stall threshold.
    pub fn new(len: usize, eps: f64, eps_abs: f64, min_dt: f64) -> Self {
        let z = || vec![C64::new(0.0, 0.0); len];
        OdeStepper {
            eps,
            eps_abs,
            min_dt,
            k: [z(), z(), z(), z(), z(), z()],
            ytmp: z(),
            yerr: z(),
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn eps_abs(&self) -> f64 {
        self.eps_abs
    }

    fn attempt<F>(&mut self, f: &mut F, t: f64, y: &[C64], h: f64)
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6] = &mut self.k;
        let ytmp = &mut self.ytmp;
        f(t, y, k1);
        for i in 0..n {
            ytmp[i] = y[i] + h * B21 * k1[i];
        }
        f(t + A[1] * h, ytmp, k2);
        for i in 0..n {
            ytmp[i] = y[i] + h * (B3[0] * k1[i] + B3[1] * k2[i]);
        }
        f(t + A[2] * h, ytmp, k3);
        for i in 0..n {
            ytmp[i] = y[i] + h * (B4[0] * k1[i] + B4[1] * k2[i] + B4[2] * k3[i]);
        }
        f(t + A[3] * h, ytmp, k4);
        for i in 0..n {
            ytmp[i] =
                y[i] + h * (B5[0] * k1[i] + B5[1] * k2[i] + B5[2] * k3[i] + B5[3] * k4[i]);
        }
        f(t + A[4] * h, ytmp, k5);
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (B6[0] * k1[i]
                    + B6[1] * k2[i]
                    + B6[2] * k3[i]
                    + B6[3] * k4[i]
                    + B6[4] * k5[i]);
        }
        f(t + A[5] * h, ytmp, k6);
        for i in 0..n {
            ytmp[i] = y[i] + h * (C[0] * k1[i] + C[2] * k3[i] + C[3] * k4[i] + C[5] * k6[i]);
            self.yerr[i] = h
                * (DC[0] * k1[i] + DC[2] * k3[i] + DC[3] * k4[i] + DC[4] * k5[i] + DC[5] * k6[i]);
        }
    }

    /// Advances `y` from `t` by at most `dt_try`, shrinking until the error
    /// of every component is within `eps·‖y‖ + epsAbs`.
    pub fn step<F>(&mut self, f: &mut F, t: f64, y: &mut [C64], dt_try: f64) -> Result<OdeStep>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        assert!(dt_try > 0.0, "proposed stepsize must be positive");
        debug_assert_eq!(y.len(), self.ytmp.len());
        let mut h = dt_try;
        loop {
            self.attempt(f, t, y, h);
            let norm = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let scale = self.eps * norm + self.eps_abs;
            let errmax = if scale > 0.0 {
                self.yerr.iter().map(|e| e.norm()).fold(0.0, f64::max) / scale
            } else {
                0.0
            };
            if errmax <= 1.0 {
                y.copy_from_slice(&self.ytmp);
                let dt_next = if errmax > ERRCON {
                    SAFETY * h * errmax.powf(GROW_EXPONENT)
                } else {
                    MAX_GROWTH * h
                };
                return Ok(OdeStep {
                    t: t + h,
                    dt_did: h,
                    dt_next,
                });
            }
            let shrunk = SAFETY * h * errmax.powf(SHRINK_EXPONENT);
            h = if shrunk.is_finite() { shrunk.max(MIN_SHRINK * h) } else { MIN_SHRINK * h };
            if h < self.min_dt {
                return Err(Error::StepperStalled {
                    t,
                    dt: h,
                    min: self.min_dt,
                });
            }
        }
    }
}

/// One adaptive step with a fresh workspace. Returns `(y_new, step)`.
pub fn ode_step<F>(
    mut f: F,
    y: &[C64],
    t: f64,
    proposed_dt: f64,
    eps: f64,
    eps_abs: f64,
    min_dt: f64,
) -> Result<(Vec<C64>, OdeStep)>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let mut stepper = OdeStepper::new(y.len(), eps, eps_abs, min_dt);
    let mut out = y.to_vec();
    let step = stepper.step(&mut f, t, &mut out, proposed_dt)?;
    Ok((out, step))
}
