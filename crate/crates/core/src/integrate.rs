//! Embedded Dormand-Prince 5(4) integrator over small complex state vectors.
//!
//! The per-mode systems are linear but non-autonomous, with coefficients that
//! vary smoothly through each critical time, so an adaptive explicit scheme
//! with step-to-output-time control is enough. Everything here is
//! deterministic: identical inputs take identical step sequences.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Dormand-Prince coefficients (the classical RK45 pair).
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
/// 5th-order weights minus 4th-order weights (error estimator).
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

pub const MAX_STEPS: u64 = 10_000_000;

/// Local error target as a fraction of the tolerance. Per-step errors
/// accumulate over long oscillatory integrations, so the controller aims an
/// order of magnitude below `tol` to keep the global error near it.
const SAFETY_FRACTION: f64 = 0.1;

/// Integrates dy/dt = rhs(t, y) writing the state at each requested output time.
///
/// `tol` is used as both relative and absolute tolerance. Output times must be
/// non-decreasing and start at or after `t0`; the first output may equal `t0`,
/// in which case the initial state is emitted exactly.
pub fn integrate<const N: usize, F>(
    rhs: F,
    t0: f64,
    y0: [Complex64; N],
    output_times: &[f64],
    tol: f64,
) -> Result<Vec<[Complex64; N]>>
where
    F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
{
    let tol = tol * SAFETY_FRACTION;
    let mut out = Vec::with_capacity(output_times.len());
    let mut t = t0;
    let mut y = y0;
    let mut k0 = rhs(t, &y);
    let mut h = initial_step(t, &y, &k0, tol);
    let mut steps: u64 = 0;

    for &t_out in output_times {
        debug_assert!(t_out >= t - 1e-12 * t.abs().max(1.0));
        while t < t_out {
            let clamped = h.min(t_out - t);
            let reached_output = clamped >= t_out - t - f64::EPSILON * t_out.abs().max(1.0);
            let trial = if reached_output { t_out - t } else { clamped };
            if trial < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t });
            }
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Stiff {
                    t,
                    max_steps: MAX_STEPS,
                });
            }

            let mut k = [[Complex64::new(0.0, 0.0); N]; 7];
            k[0] = k0;
            for stage in 0..6 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(stage + 1) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        for (dst, src) in ys.iter_mut().zip(kj.iter()) {
                            *dst += trial * a * src;
                        }
                    }
                }
                k[stage + 1] = rhs(t + C[stage] * trial, &ys);
            }
            // The 5th-order solution reuses stage 6 (FSAL).
            let mut y_new = y;
            for (j, kj) in k.iter().enumerate().take(6) {
                let a = A[5][j];
                if a != 0.0 {
                    for (dst, src) in y_new.iter_mut().zip(kj.iter()) {
                        *dst += trial * a * src;
                    }
                }
            }
            // Error estimate against the embedded 4th-order solution. A
            // non-finite estimate (NaN in the RHS) counts as infinitely bad so
            // the controller backs off instead of spinning.
            let mut err: f64 = 0.0;
            for i in 0..N {
                let mut e = Complex64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate() {
                    e += trial * E[j] * kj[i];
                }
                let scale = tol + tol * y[i].norm().max(y_new[i].norm());
                let contribution = e.norm() / scale;
                // f64::max would silently drop a NaN contribution and accept
                // the step.
                if contribution.is_finite() && y_new[i].is_finite() {
                    err = err.max(contribution);
                } else {
                    err = f64::INFINITY;
                    break;
                }
            }

            if err <= 1.0 {
                t += trial;
                y = y_new;
                k0 = k[6];
                if reached_output {
                    t = t_out;
                }
            } else {
                k0 = k[0];
            }
            let factor = if err == 0.0 {
                5.0
            } else if err.is_infinite() {
                0.2
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (trial * factor).max(f64::MIN_POSITIVE);
        }
        out.push(y);
    }
    Ok(out)
}

fn initial_step<const N: usize>(t: f64, y: &[Complex64; N], dy: &[Complex64; N], tol: f64) -> f64 {
    let ny: f64 = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let nd: f64 = dy.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let h = if nd > 1e-12 {
        0.01 * (ny.max(tol) / nd).min(1.0)
    } else {
        1e-3
    };
    h.max(1e-10 * t.abs().max(1.0)).min(1.0)
}
