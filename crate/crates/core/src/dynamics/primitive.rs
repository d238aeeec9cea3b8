//! Time integration of the per-mode primitive system in sheared coordinates.
//!
//! This is the single source of truth for trajectories: the good-unknown
//! systems in [`crate::dynamics::derived`] are integrated separately only to
//! cross-validate the reformulation.

use crate::error::{Error, Result};
use crate::integrate::integrate;
use crate::params::PhysicalParams;
use crate::symbols::{symbol_values, Mode};
use num_complex::Complex64;
use rayon::prelude::*;

/// Per-mode complex amplitudes of the primitive unknowns (b, u1, u2, u3).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrimitiveState {
    /// Density perturbation amplitude; the 1/eps scaling is applied by the
    /// functionals, not stored here.
    pub b: Complex64,
    pub u: [Complex64; 3],
}

impl PrimitiveState {
    pub fn new(b: Complex64, u: [Complex64; 3]) -> Self {
        Self { b, u }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    fn to_array(self) -> [Complex64; 4] {
        [self.b, self.u[0], self.u[1], self.u[2]]
    }

    fn from_array(a: [Complex64; 4]) -> Self {
        Self {
            b: a[0],
            u: [a[1], a[2], a[3]],
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.b.norm_sqr() + self.u.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        Self {
            b: alpha * self.b,
            u: [alpha * self.u[0], alpha * self.u[1], alpha * self.u[2]],
        }
    }
}

/// Evolution window and the times at which states are recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub output_times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, output_times: Vec<f64>) -> Result<Self> {
        if !(t0 >= 0.0) || !(t1 > t0) {
            return Err(Error::Grid(format!("bad time window [{t0}, {t1}]")));
        }
        if output_times.is_empty() {
            return Err(Error::Grid("no output times".into()));
        }
        let monotone = output_times.windows(2).all(|w| w[1] > w[0]);
        let inside = output_times[0] >= t0 && *output_times.last().unwrap() <= t1;
        if !monotone || !inside {
            return Err(Error::Grid(
                "output times must be strictly increasing within [t0, t1]".into(),
            ));
        }
        Ok(Self {
            t0,
            t1,
            output_times,
        })
    }

    /// n equally spaced outputs on [0, t1], starting at 0.
    pub fn linear(t1: f64, n: usize) -> Result<Self> {
        let times = (0..n).map(|i| t1 * i as f64 / (n - 1) as f64).collect();
        Self::new(0.0, t1, times)
    }

    /// t = 0 followed by n-1 geometrically spaced outputs on [t1/1000, t1].
    pub fn log(t1: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Self::new(0.0, t1, vec![0.0, t1]);
        }
        let mut times = vec![0.0];
        let lo = t1 * 1e-3;
        for i in 0..n - 1 {
            times.push(lo * (t1 / lo).powf(i as f64 / (n - 2) as f64));
        }
        Self::new(0.0, t1, times)
    }
}

/// Right-hand side of the primitive system at one (t, mode).
///
/// With iota = (ik, i(eta - kt), il), d = iota . u, p = |iota|^2:
///   db/dt   = -d
///   du_j/dt = -delta_{j1} u2 - iota_j b / eps^2 - mu p u_j + (lambda + mu) iota_j d
pub fn rhs_primitive(t: f64, mode: &Mode, st: &PrimitiveState, p: &PhysicalParams) -> PrimitiveState {
    let s = symbol_values(t, mode);
    let d = s.iota[0] * st.u[0] + s.iota[1] * st.u[1] + s.iota[2] * st.u[2];
    let inv_eps2 = 1.0 / (p.eps * p.eps);
    let lam_mu = p.lambda + p.mu;
    let mut du = [Complex64::new(0.0, 0.0); 3];
    for ((dj, &iota_j), &u_j) in du.iter_mut().zip(&s.iota).zip(&st.u) {
        *dj = -iota_j * st.b * inv_eps2 - p.mu * s.p * u_j + lam_mu * iota_j * d;
    }
    du[0] -= st.u[1];
    PrimitiveState { b: -d, u: du }
}

/// Integrates one mode over the time grid, returning the state at each output time.
pub fn integrate_mode(
    mode: &Mode,
    st0: &PrimitiveState,
    tg: &TimeGrid,
    p: &PhysicalParams,
    tol: f64,
) -> Result<Vec<PrimitiveState>> {
    let mode = *mode;
    let p = *p;
    let out = integrate(
        move |t, y: &[Complex64; 4]| {
            rhs_primitive(t, &mode, &PrimitiveState::from_array(*y), &p).to_array()
        },
        tg.t0,
        st0.to_array(),
        &tg.output_times,
        tol,
    )?;
    Ok(out.into_iter().map(PrimitiveState::from_array).collect())
}

/// States of every mode at every output time; `states[time][mode]` in grid order.
#[derive(Debug, Clone)]
pub struct EnsembleTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<PrimitiveState>>,
}

/// Integrates all modes independently (in parallel), collecting results in
/// grid order regardless of completion order.
pub fn integrate_ensemble(
    modes: &[Mode],
    states: &[PrimitiveState],
    tg: &TimeGrid,
    p: &PhysicalParams,
    tol: f64,
) -> Result<EnsembleTrajectory> {
    assert_eq!(modes.len(), states.len());
    let results: Vec<Result<Vec<PrimitiveState>>> = modes
        .par_iter()
        .zip(states.par_iter())
        .map(|(mode, st0)| integrate_mode(mode, st0, tg, p, tol))
        .collect();
    let total = results.len();
    let mut per_mode = Vec::with_capacity(total);
    let mut failed = 0usize;
    let mut first = String::new();
    for r in results {
        match r {
            Ok(tr) => per_mode.push(tr),
            Err(e) => {
                failed += 1;
                if first.is_empty() {
                    first = e.to_string();
                }
                per_mode.push(Vec::new());
            }
        }
    }
    if failed > 0 {
        return Err(Error::Ensemble {
            failed,
            total,
            first,
        });
    }
    let n_t = tg.output_times.len();
    let mut states_t = vec![Vec::with_capacity(total); n_t];
    for tr in &per_mode {
        for (i, st) in tr.iter().enumerate() {
            states_t[i].push(*st);
        }
    }
    Ok(EnsembleTrajectory {
        times: tg.output_times.clone(),
        states: states_t,
    })
}

/// Solves the zero-mode streamwise velocity by the explicit heat Duhamel formula
///
///   u1(t) = e^{-mu q t} u1_in - int_0^t e^{-mu q (t-s)} u2(s) ds,  q = eta^2 + l^2,
///
/// with the convolution evaluated by composite Simpson quadrature on the
/// uniform grid carrying `u2_series` (spacing `dt`). Returns u1 at the same
/// sample times.
pub fn duhamel_u1_zero(
    mode: &Mode,
    u1_in: Complex64,
    u2_series: &[Complex64],
    dt: f64,
    mu: f64,
) -> Result<Vec<Complex64>> {
    if mode.k != 0 {
        return Err(Error::RequiresZeroK { k: mode.k });
    }
    let q = mode.eta * mode.eta + (mode.l * mode.l) as f64;
    let n = u2_series.len();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let t = j as f64 * dt;
        // Integrand g(s) = e^{-mu q (t-s)} u2(s) sampled at s = 0..=j.
        let g = |i: usize| (-mu * q * (t - i as f64 * dt)).exp() * u2_series[i];
        let integral = if j == 0 {
            Complex64::new(0.0, 0.0)
        } else if j == 1 {
            if n > 2 {
                // Quadratic through the first three samples, integrated over
                // the first interval; keeps the first output at O(dt^4) like
                // the composite rule below.
                dt / 12.0 * (5.0 * g(0) + 8.0 * g(1) - g(2))
            } else {
                0.5 * dt * (g(0) + g(1))
            }
        } else {
            let mut acc = Complex64::new(0.0, 0.0);
            let even_end = if j % 2 == 0 { j } else { j - 3 };
            let mut i = 0;
            while i < even_end {
                acc += dt / 3.0 * (g(i) + 4.0 * g(i + 1) + g(i + 2));
                i += 2;
            }
            if j % 2 == 1 {
                // Simpson 3/8 on the last three intervals keeps O(dt^4).
                acc += 3.0 * dt / 8.0 * (g(j - 3) + 3.0 * g(j - 2) + 3.0 * g(j - 1) + g(j));
            }
            acc
        };
        out.push((-mu * q * t).exp() * u1_in - integral);
    }
    Ok(out)
}

/// Zero-mode energy balance along one k = 0 trajectory.
///
/// Integrates the mode together with an accumulator for the dissipation
///   D(t) = int_0^t 2 mu q |u~|^2 + 2 (lambda + mu) |d|^2 ds
/// and reports E(t) + D(t) - E(0) at each output time, where
/// E = |b/eps|^2 + |u~|^2 and u~ = (u2, u3). Exactly conserved in the
/// continuum; the residual measures integrator error.
pub struct ZeroModeBalance {
    pub states: Vec<PrimitiveState>,
    pub energy: Vec<f64>,
    pub dissipation: Vec<f64>,
    /// (E(t) + D(t) - E(0)) / E(0) per output time.
    pub relative_residual: Vec<f64>,
}

pub fn zero_mode_energy_balance(
    mode: &Mode,
    st0: &PrimitiveState,
    tg: &TimeGrid,
    p: &PhysicalParams,
    tol: f64,
) -> Result<ZeroModeBalance> {
    if mode.k != 0 {
        return Err(Error::RequiresZeroK { k: mode.k });
    }
    let mode_c = *mode;
    let p_c = *p;
    let q = mode.eta * mode.eta + (mode.l * mode.l) as f64;
    let inv_eps2 = 1.0 / (p.eps * p.eps);
    let y0 = [
        st0.b,
        st0.u[0],
        st0.u[1],
        st0.u[2],
        Complex64::new(0.0, 0.0),
    ];
    let out = integrate(
        move |t, y: &[Complex64; 5]| {
            let st = PrimitiveState {
                b: y[0],
                u: [y[1], y[2], y[3]],
            };
            let d = rhs_primitive(t, &mode_c, &st, &p_c);
            let div = Complex64::new(0.0, mode_c.eta) * st.u[1]
                + Complex64::new(0.0, mode_c.l as f64) * st.u[2];
            let tilde = st.u[1].norm_sqr() + st.u[2].norm_sqr();
            let diss =
                2.0 * p_c.mu * q * tilde + 2.0 * (p_c.lambda + p_c.mu) * div.norm_sqr();
            [d.b, d.u[0], d.u[1], d.u[2], Complex64::new(diss, 0.0)]
        },
        tg.t0,
        y0,
        &tg.output_times,
        tol,
    )?;
    let energy_of = |y: &[Complex64; 5]| {
        y[0].norm_sqr() * inv_eps2 + y[2].norm_sqr() + y[3].norm_sqr()
    };
    let e0 = energy_of(&out[0]).max(f64::MIN_POSITIVE);
    let mut states = Vec::with_capacity(out.len());
    let mut energy = Vec::with_capacity(out.len());
    let mut dissipation = Vec::with_capacity(out.len());
    let mut relative_residual = Vec::with_capacity(out.len());
    for y in &out {
        states.push(PrimitiveState {
            b: y[0],
            u: [y[1], y[2], y[3]],
        });
        let e = energy_of(y);
        energy.push(e);
        dissipation.push(y[4].re);
        relative_residual.push((e + y[4].re - energy_of(&out[0])) / e0);
    }
    Ok(ZeroModeBalance {
        states,
        energy,
        dissipation,
        relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mean_mode_lift_up_is_linear() {
        // Mode (0,0,0) with u = (0,1,0): u1(t) = -t exactly.
        let mode = Mode::new(0, 0.0, 0, 1.0);
        let st0 = PrimitiveState::new(c(0.0, 0.0), [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let p = PhysicalParams::new(1e-3, 0.0, 1.0);
        let d = rhs_primitive(0.0, &mode, &st0, &p);
        assert_eq!(d.u[0], c(-1.0, 0.0));
        assert_eq!(d.b, c(0.0, 0.0));
        assert_eq!(d.u[1], c(0.0, 0.0));

        let tg = TimeGrid::linear(5.0, 6).unwrap();
        let tr = integrate_mode(&mode, &st0, &tg, &p, 1e-11).unwrap();
        assert_eq!(tr[0], st0);
        for (i, &t) in tg.output_times.iter().enumerate() {
            assert_relative_eq!(tr[i].u[0].re, -t, epsilon = 1e-9);
        }
    }

    #[test]
    fn divergence_free_zero_mode_is_pure_heat() {
        // (0, eta, l) with iota.u = 0 and b = 0 decays as e^{-mu q t}.
        let (eta, l) = (1.5, 2i64);
        let mode = Mode::new(0, eta, l, 1.0);
        // u2 = l, u3 = -eta makes eta*u2 + l*u3 = 0; u1 = 0 avoids forcing.
        let st0 = PrimitiveState::new(c(0.0, 0.0), [c(0.0, 0.0), c(l as f64, 0.0), c(-eta, 0.0)]);
        let p = PhysicalParams::new(0.05, 0.1, 0.7);
        let q = eta * eta + (l * l) as f64;
        let tg = TimeGrid::linear(4.0, 5).unwrap();
        let tr = integrate_mode(&mode, &st0, &tg, &p, 1e-11).unwrap();
        for (i, &t) in tg.output_times.iter().enumerate() {
            let decay = (-p.mu * q * t).exp();
            assert_relative_eq!(tr[i].u[1].re, l as f64 * decay, max_relative = 1e-8);
            assert_relative_eq!(tr[i].u[2].re, -eta * decay, max_relative = 1e-8);
            assert!(tr[i].b.norm() < 1e-9);
        }
    }

    #[test]
    fn inviscid_acoustic_mode_conserves_energy() {
        // mu = lambda = 0, eps = 1, mode (0, eta, 0): |b|^2 + |u2|^2 conserved
        // and b oscillates at frequency |eta|.
        let eta = 2.0;
        let mode = Mode::new(0, eta, 0, 1.0);
        let st0 = PrimitiveState::new(c(1.0, 0.0), [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let p = PhysicalParams::new(0.0, 0.0, 1.0);
        let period = 2.0 * std::f64::consts::PI / eta;
        let tg = TimeGrid::new(0.0, 2.0 * period, vec![0.25 * period, 0.5 * period, period])
            .unwrap();
        let tr = integrate_mode(&mode, &st0, &tg, &p, 1e-12).unwrap();
        for st in &tr {
            assert_relative_eq!(
                st.b.norm_sqr() + st.u[1].norm_sqr(),
                1.0,
                max_relative = 1e-9
            );
        }
        // Quarter period: all energy in u2; full period: back in b.
        assert!(tr[0].b.norm() < 1e-8);
        assert!((tr[2].b - c(1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn matches_fixed_step_rk4_reference() {
        let mode = Mode::new(1, 0.5, 1, 1.0);
        let st0 = PrimitiveState::new(c(0.3, -0.2), [c(1.0, 0.1), c(-0.4, 0.7), c(0.2, 0.2)]);
        let p = PhysicalParams::new(1e-2, 0.05, 0.8);
        let tol = 1e-9;
        let t_end = 6.0;
        let tg = TimeGrid::new(0.0, t_end, vec![t_end]).unwrap();
        let adaptive = integrate_mode(&mode, &st0, &tg, &p, tol).unwrap();

        // Independent fixed-step RK4 at fine resolution.
        let n = 60_000;
        let h = t_end / n as f64;
        let mut y = st0;
        let mut t = 0.0;
        let f = |t: f64, y: &PrimitiveState| rhs_primitive(t, &mode, y, &p);
        let axpy = |y: &PrimitiveState, a: f64, d: &PrimitiveState| PrimitiveState {
            b: y.b + a * d.b,
            u: [y.u[0] + a * d.u[0], y.u[1] + a * d.u[1], y.u[2] + a * d.u[2]],
        };
        for _ in 0..n {
            let k1 = f(t, &y);
            let k2 = f(t + h / 2.0, &axpy(&y, h / 2.0, &k1));
            let k3 = f(t + h / 2.0, &axpy(&y, h / 2.0, &k2));
            let k4 = f(t + h, &axpy(&y, h, &k3));
            y = PrimitiveState {
                b: y.b + h / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b),
                u: [
                    y.u[0] + h / 6.0 * (k1.u[0] + 2.0 * k2.u[0] + 2.0 * k3.u[0] + k4.u[0]),
                    y.u[1] + h / 6.0 * (k1.u[1] + 2.0 * k2.u[1] + 2.0 * k3.u[1] + k4.u[1]),
                    y.u[2] + h / 6.0 * (k1.u[2] + 2.0 * k2.u[2] + 2.0 * k3.u[2] + k4.u[2]),
                ],
            };
            t += h;
        }
        let scale = y.norm_sqr().sqrt();
        let diff = (adaptive[0].b - y.b).norm()
            + (0..3)
                .map(|j| (adaptive[0].u[j] - y.u[j]).norm())
                .sum::<f64>();
        assert!(
            diff / scale <= 10.0 * tol,
            "deviation {} exceeds 10 tol",
            diff / scale
        );
    }

    #[test]
    fn ensemble_order_independent() {
        let modes = vec![
            Mode::new(1, 0.0, 0, 1.0),
            Mode::new(0, 1.0, 1, 1.0),
            Mode::new(-1, -0.5, 2, 1.0),
        ];
        let states: Vec<PrimitiveState> = (0..3)
            .map(|i| {
                PrimitiveState::new(
                    c(1.0 + i as f64, 0.0),
                    [c(0.1, 0.2), c(-0.3, 0.0), c(0.0, 0.5)],
                )
            })
            .collect();
        let p = PhysicalParams::new(1e-2, 0.0, 1.0);
        let tg = TimeGrid::linear(2.0, 4).unwrap();
        let a = integrate_ensemble(&modes, &states, &tg, &p, 1e-10).unwrap();

        let perm = [2usize, 0, 1];
        let modes_p: Vec<Mode> = perm.iter().map(|&i| modes[i]).collect();
        let states_p: Vec<PrimitiveState> = perm.iter().map(|&i| states[i]).collect();
        let b = integrate_ensemble(&modes_p, &states_p, &tg, &p, 1e-10).unwrap();
        for ti in 0..tg.output_times.len() {
            for (j, &i) in perm.iter().enumerate() {
                assert_eq!(a.states[ti][i], b.states[ti][j], "bitwise mismatch");
            }
        }
    }

    #[test]
    fn single_mode_ensemble_reduces_to_integrate_mode() {
        let mode = Mode::new(2, -1.0, 1, 0.5);
        let st0 = PrimitiveState::new(c(0.2, 0.1), [c(0.0, 1.0), c(0.5, 0.0), c(0.0, 0.0)]);
        let p = PhysicalParams::new(1e-2, 0.0, 1.0);
        let tg = TimeGrid::linear(3.0, 7).unwrap();
        let single = integrate_mode(&mode, &st0, &tg, &p, 1e-10).unwrap();
        let ens = integrate_ensemble(&[mode], &[st0], &tg, &p, 1e-10).unwrap();
        for ti in 0..tg.output_times.len() {
            assert_eq!(ens.states[ti][0], single[ti]);
        }
    }

    #[test]
    fn ensemble_aggregates_mode_failures() {
        let modes = vec![Mode::new(1, 0.0, 0, 1.0), Mode::new(1, 1.0, 0, 1.0)];
        let mut states = vec![
            PrimitiveState::new(c(1.0, 0.0), [c(0.0, 0.0); 3]),
            PrimitiveState::new(c(1.0, 0.0), [c(0.0, 0.0); 3]),
        ];
        states[1].b = c(f64::NAN, 0.0);
        let p = PhysicalParams::new(1e-2, 0.0, 1.0);
        let tg = TimeGrid::linear(1.0, 3).unwrap();
        match integrate_ensemble(&modes, &states, &tg, &p, 1e-9) {
            Err(crate::error::Error::Ensemble { failed, total, .. }) => {
                assert_eq!(failed, 1);
                assert_eq!(total, 2);
            }
            other => panic!("expected ensemble failure, got {other:?}"),
        }
    }

    #[test]
    fn log_grid_edge_cases() {
        let tg = TimeGrid::log(10.0, 2).unwrap();
        assert_eq!(tg.output_times, vec![0.0, 10.0]);
        let tg = TimeGrid::log(10.0, 50).unwrap();
        assert_eq!(tg.output_times.len(), 50);
        assert_eq!(tg.output_times[0], 0.0);
        assert!(tg.output_times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*tg.output_times.last().unwrap(), 10.0);
    }

    #[test]
    fn duhamel_pure_heat_and_mean_mode() {
        let mu = 0.05;
        // u2 = 0: pure heat decay of u1_in.
        let mode = Mode::new(0, 1.0, 2, 1.0);
        let q = 1.0 + 4.0;
        let n = 101;
        let dt = 0.05;
        let u2 = vec![c(0.0, 0.0); n];
        let out = duhamel_u1_zero(&mode, c(1.0, -0.5), &u2, dt, mu).unwrap();
        for (j, v) in out.iter().enumerate() {
            let t = j as f64 * dt;
            let expected = c(1.0, -0.5) * (-mu * q * t).exp();
            assert_relative_eq!(v.re, expected.re, max_relative = 1e-12, epsilon = 1e-12);
            assert_relative_eq!(v.im, expected.im, max_relative = 1e-12, epsilon = 1e-12);
        }
        // eta = l = 0, u1_in = 0, u2 = 1: u1(t) = -t.
        let mode0 = Mode::new(0, 0.0, 0, 1.0);
        let ones = vec![c(1.0, 0.0); n];
        let out = duhamel_u1_zero(&mode0, c(0.0, 0.0), &ones, dt, mu).unwrap();
        for (j, v) in out.iter().enumerate() {
            assert_relative_eq!(v.re, -(j as f64) * dt, epsilon = 1e-12);
        }
    }

    #[test]
    fn duhamel_rejects_nonzero_k() {
        let mode = Mode::new(1, 0.0, 0, 1.0);
        assert!(duhamel_u1_zero(&mode, c(0.0, 0.0), &[c(0.0, 0.0)], 0.1, 1e-3).is_err());
    }

    #[test]
    fn duhamel_matches_ode_on_random_zero_modes() {
        let p = PhysicalParams::new(2e-2, 0.1, 0.9);
        for trial in 0..5u64 {
            let eta = crate::rng::range_f64(3, trial * 4, -1.0, 1.0);
            let l = crate::rng::range_i64(3, trial * 4 + 1, -1, 1);
            let mode = Mode::new(0, eta, l, 1.0);
            let st0 = PrimitiveState::new(
                crate::rng::unit_disk(3, trial * 4 + 2),
                [
                    c(0.4, -0.1),
                    crate::rng::unit_disk(3, trial * 4 + 40),
                    crate::rng::unit_disk(3, trial * 4 + 80),
                ],
            );
            let n = 801;
            let t_end = 8.0;
            let tg = TimeGrid::linear(t_end, n).unwrap();
            let tr = integrate_mode(&mode, &st0, &tg, &p, 1e-11).unwrap();
            let u2: Vec<Complex64> = tr.iter().map(|s| s.u[1]).collect();
            let dt = t_end / (n - 1) as f64;
            let duh = duhamel_u1_zero(&mode, st0.u[0], &u2, dt, p.mu).unwrap();
            let scale = tr
                .iter()
                .map(|s| s.u[0].norm())
                .fold(0.0f64, f64::max)
                .max(1e-12);
            for (j, v) in duh.iter().enumerate() {
                assert!(
                    (v - tr[j].u[0]).norm() / scale <= 1e-6,
                    "trial {trial} t={} rel {}",
                    tg.output_times[j],
                    (v - tr[j].u[0]).norm() / scale
                );
            }
        }
    }

    #[test]
    fn zero_mode_energy_balance_closes() {
        let p = PhysicalParams::new(0.05, 0.2, 0.8);
        let mode = Mode::new(0, 1.3, -2, 1.0);
        let st0 = PrimitiveState::new(c(0.7, 0.2), [c(0.1, 0.0), c(-0.5, 0.4), c(0.3, -0.6)]);
        let tg = TimeGrid::linear(20.0, 21).unwrap();
        let bal = zero_mode_energy_balance(&mode, &st0, &tg, &p, 1e-11).unwrap();
        for r in &bal.relative_residual {
            assert!(r.abs() <= 1e-9, "residual {r}");
        }
        // Dissipation must be monotone.
        assert!(bal.dissipation.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn inviscid_zero_mode_energy_conserved() {
        let p = PhysicalParams::new(0.0, 0.0, 1.0);
        let mode = Mode::new(0, 2.0, 1, 1.0);
        let st0 = PrimitiveState::new(c(1.0, 0.0), [c(0.0, 0.0), c(0.3, 0.1), c(-0.2, 0.5)]);
        let tg = TimeGrid::linear(10.0, 11).unwrap();
        let bal = zero_mode_energy_balance(&mode, &st0, &tg, &p, 1e-11).unwrap();
        for (e, r) in bal.energy.iter().zip(&bal.relative_residual) {
            assert_relative_eq!(*e, bal.energy[0], max_relative = 1e-9);
            assert!(r.abs() <= 1e-9);
        }
    }
}
