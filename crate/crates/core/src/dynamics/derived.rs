//! The good-unknown systems for non-zero x-modes, plus the algebraic map from
//! primitive to derived variables.
//!
//! The derived unknowns are the sheared gradients of the density (B^i) and of
//! the velocity divergence (D^i), and the density-corrected incompressible
//! part W = (w^1 - B^2, w^2 + B^1, w^3) with w = Laplacian(u) - grad(div u).
//! Integrating them directly and comparing against `derive` applied to the
//! primitive trajectory validates the reformulation; the two routes share no
//! right-hand-side code.

use crate::error::{Error, Result};
use crate::integrate::integrate;
use crate::params::PhysicalParams;
use crate::symbols::{symbol_values, Mode, SymbolValues};
use crate::dynamics::primitive::{integrate_mode, PrimitiveState, TimeGrid};
use num_complex::Complex64;

/// Good unknowns of one mode: B = grad b, D = grad div u, W as above.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DerivedState {
    pub grad_b: [Complex64; 3],
    pub grad_div: [Complex64; 3],
    pub w: [Complex64; 3],
}

impl DerivedState {
    pub fn norm_sqr(&self) -> f64 {
        self.grad_b.iter().map(|c| c.norm_sqr()).sum::<f64>()
            + self.grad_div.iter().map(|c| c.norm_sqr()).sum::<f64>()
            + self.w.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// The uncorrected incompressible part (w^1, w^2, w^3).
    pub fn w_raw(&self) -> [Complex64; 3] {
        [
            self.w[0] + self.grad_b[1],
            self.w[1] - self.grad_b[0],
            self.w[2],
        ]
    }
}

/// Forcing exerted by the (B^1, D^1, W^2) block on the (B^2, D^2, W^1) block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingTriple {
    pub f: Complex64,
    pub g: Complex64,
    pub h: Complex64,
}

/// Algebraic map from primitive amplitudes to the good unknowns.
///
/// With d = iota . u: B^i = iota_i b, D^i = iota_i d, w^j = -p u_j - iota_j d,
/// then W^1 = w^1 - B^2, W^2 = w^2 + B^1, W^3 = w^3. At the mean mode all
/// entries vanish.
pub fn derive(t: f64, mode: &Mode, st: &PrimitiveState) -> DerivedState {
    let s = symbol_values(t, mode);
    let d = s.iota[0] * st.u[0] + s.iota[1] * st.u[1] + s.iota[2] * st.u[2];
    let mut grad_b = [Complex64::new(0.0, 0.0); 3];
    let mut grad_div = [Complex64::new(0.0, 0.0); 3];
    let mut w_raw = [Complex64::new(0.0, 0.0); 3];
    for j in 0..3 {
        grad_b[j] = s.iota[j] * st.b;
        grad_div[j] = s.iota[j] * d;
        w_raw[j] = -s.p * st.u[j] - s.iota[j] * d;
    }
    DerivedState {
        grad_b,
        grad_div,
        w: [w_raw[0] - grad_b[1], w_raw[1] + grad_b[0], w_raw[2]],
    }
}

/// Inverts `derive` for k != 0 without using W^1, going through div w = 0.
///
/// b = B^1/(ik), d = D^1/(ik), u_j = -(w^j + iota_j d)/p, where w^2, w^3 come
/// from the stored state and w^1 = -(iota_2 w^2 + iota_3 w^3)/(ik).
pub fn reconstruct_primitive(t: f64, mode: &Mode, ds: &DerivedState) -> Result<PrimitiveState> {
    if mode.k == 0 {
        return Err(Error::RequiresNonzeroK);
    }
    let s = symbol_values(t, mode);
    let ik = s.iota[0];
    let b = ds.grad_b[0] / ik;
    let d = ds.grad_div[0] / ik;
    let w2 = ds.w[1] - ds.grad_b[0];
    let w3 = ds.w[2];
    let w1 = -(s.iota[1] * w2 + s.iota[2] * w3) / ik;
    let u = [
        -(w1 + s.iota[0] * d) / s.p,
        -(w2 + s.iota[1] * d) / s.p,
        -(w3 + s.iota[2] * d) / s.p,
    ];
    Ok(PrimitiveState { b, u })
}

fn guard_nonzero_k(mode: &Mode) -> Result<()> {
    if mode.k == 0 {
        Err(Error::RequiresNonzeroK)
    } else {
        Ok(())
    }
}

/// d/dt of (B^1, D^1, W^2), the self-closed streamwise block.
pub fn rhs_lx(
    t: f64,
    mode: &Mode,
    s: &(Complex64, Complex64, Complex64),
    p: &PhysicalParams,
) -> Result<(Complex64, Complex64, Complex64)> {
    guard_nonzero_k(mode)?;
    let sy = symbol_values(t, mode);
    Ok(rhs_lx_inner(&sy, mode, s, p))
}

fn rhs_lx_inner(
    sy: &SymbolValues,
    mode: &Mode,
    (b1, d1, w2): &(Complex64, Complex64, Complex64),
    p: &PhysicalParams,
) -> (Complex64, Complex64, Complex64) {
    let kf = mode.k as f64;
    let coupling = w2 - b1;
    let db1 = -d1;
    let dd1 = (sy.p_prime / sy.p) * d1 - (2.0 * kf * kf / sy.p) * coupling
        + (sy.p / (p.eps * p.eps)) * b1
        - p.lam2mu() * sy.p * d1;
    let dw2 = -p.mu * sy.p * w2 + p.mu * sy.p * b1;
    (db1, dd1, dw2)
}

/// d/dt of (B^3, D^3, W^3); coupled to the streamwise block through W^2 - B^1.
pub fn rhs_lz(
    t: f64,
    mode: &Mode,
    s: &(Complex64, Complex64, Complex64),
    coupling: &(Complex64, Complex64),
    p: &PhysicalParams,
) -> Result<(Complex64, Complex64, Complex64)> {
    guard_nonzero_k(mode)?;
    let sy = symbol_values(t, mode);
    Ok(rhs_lz_inner(&sy, mode, s, coupling, p))
}

fn rhs_lz_inner(
    sy: &SymbolValues,
    mode: &Mode,
    (b3, d3, w3): &(Complex64, Complex64, Complex64),
    (b1, w2): &(Complex64, Complex64),
    p: &PhysicalParams,
) -> (Complex64, Complex64, Complex64) {
    let kl = (mode.k * mode.l) as f64;
    let coupling = w2 - b1;
    let db3 = -d3;
    let dd3 = (sy.p_prime / sy.p) * d3 - (2.0 * kl / sy.p) * coupling
        + (sy.p / (p.eps * p.eps)) * b3
        - p.lam2mu() * sy.p * d3;
    let dw3 = (sy.p_prime / sy.p) * w3 + (2.0 * kl / sy.p) * coupling - p.mu * sy.p * w3;
    (db3, dd3, dw3)
}

/// d/dt of (B^2, D^2, W^1) under the given forcing.
pub fn rhs_ly(
    t: f64,
    mode: &Mode,
    s: &(Complex64, Complex64, Complex64),
    forcing: &ForcingTriple,
    p: &PhysicalParams,
) -> Result<(Complex64, Complex64, Complex64)> {
    guard_nonzero_k(mode)?;
    let sy = symbol_values(t, mode);
    Ok(rhs_ly_inner(&sy, s, forcing, p))
}

fn rhs_ly_inner(
    sy: &SymbolValues,
    (b2, d2, w1): &(Complex64, Complex64, Complex64),
    forcing: &ForcingTriple,
    p: &PhysicalParams,
) -> (Complex64, Complex64, Complex64) {
    let r = sy.p_prime / sy.p;
    let db2 = -d2 + forcing.f;
    let dd2 = r * d2 + (sy.p / (p.eps * p.eps)) * b2 - p.lam2mu() * sy.p * d2 + forcing.g;
    let dw1 = r * (w1 + b2) - p.mu * sy.p * w1 - p.mu * sy.p * b2 + forcing.h;
    (db2, dd2, dw1)
}

/// Forcing (F, G, H) of the wall-normal block in terms of (B^1, D^1, W^2):
///   F = -B^1, G = -D^1 + (p'/p)(W^2 - B^1), H = 2B^1 - W^2 + (2k^2/p)(W^2 - B^1).
pub fn forcing_fgh(
    t: f64,
    mode: &Mode,
    s: &(Complex64, Complex64, Complex64),
) -> Result<ForcingTriple> {
    guard_nonzero_k(mode)?;
    let sy = symbol_values(t, mode);
    Ok(forcing_fgh_inner(&sy, mode, s))
}

fn forcing_fgh_inner(
    sy: &SymbolValues,
    mode: &Mode,
    (b1, d1, w2): &(Complex64, Complex64, Complex64),
) -> ForcingTriple {
    let kf = mode.k as f64;
    let coupling = w2 - b1;
    ForcingTriple {
        f: -b1,
        g: -d1 + (sy.p_prime / sy.p) * coupling,
        h: 2.0 * b1 - w2 + (2.0 * kf * kf / sy.p) * coupling,
    }
}

fn state_to_array(ds: &DerivedState) -> [Complex64; 9] {
    [
        ds.grad_b[0],
        ds.grad_div[0],
        ds.w[1],
        ds.grad_b[2],
        ds.grad_div[2],
        ds.w[2],
        ds.grad_b[1],
        ds.grad_div[1],
        ds.w[0],
    ]
}

fn array_to_state(y: &[Complex64; 9]) -> DerivedState {
    DerivedState {
        grad_b: [y[0], y[6], y[3]],
        grad_div: [y[1], y[7], y[4]],
        w: [y[8], y[2], y[5]],
    }
}

/// Integrates the coupled 9-component derived system from a derived initial state.
///
/// The (B^1, D^1, W^2) block feeds the other two through W^2 - B^1 and the
/// forcing triple, matching the dependency structure of the reformulation.
pub fn integrate_derived(
    mode: &Mode,
    ds0: &DerivedState,
    tg: &TimeGrid,
    p: &PhysicalParams,
    tol: f64,
) -> Result<Vec<DerivedState>> {
    guard_nonzero_k(mode)?;
    let mode = *mode;
    let p = *p;
    let out = integrate(
        move |t, y: &[Complex64; 9]| {
            let sy = symbol_values(t, &mode);
            let lx = (y[0], y[1], y[2]);
            let (db1, dd1, dw2) = rhs_lx_inner(&sy, &mode, &lx, &p);
            let (db3, dd3, dw3) =
                rhs_lz_inner(&sy, &mode, &(y[3], y[4], y[5]), &(y[0], y[2]), &p);
            let forcing = forcing_fgh_inner(&sy, &mode, &lx);
            let (db2, dd2, dw1) = rhs_ly_inner(&sy, &(y[6], y[7], y[8]), &forcing, &p);
            [db1, dd1, dw2, db3, dd3, dw3, db2, dd2, dw1]
        },
        tg.t0,
        state_to_array(ds0),
        &tg.output_times,
        tol,
    )?;
    Ok(out.iter().map(array_to_state).collect())
}

/// Result of the primitive/derived mutual-consistency oracle for one mode.
#[derive(Debug, Clone, Copy)]
pub struct ConsistencyResult {
    /// Max over output times of the discrepancy between the two derived
    /// trajectories, normalized by the running max of the trajectory norm.
    /// (The states decay by many e-folds over the window while integration
    /// error is injected at full scale, so normalizing by the instantaneous
    /// norm would measure the integrator tolerance against the decay factor
    /// rather than the reformulation.)
    pub max_residual: f64,
    /// Max over output times of |iota . w|, normalized the same way by the
    /// running max of sqrt(p) |w| along the derived run.
    pub max_divfree_residual: f64,
}

/// Integrates the primitive system and the derived system independently from
/// the same initial data and reports their maximal relative discrepancy.
pub fn consistency_check(
    mode: &Mode,
    st0: &PrimitiveState,
    tg: &TimeGrid,
    p: &PhysicalParams,
    tol: f64,
) -> Result<ConsistencyResult> {
    guard_nonzero_k(mode)?;
    let primitive = integrate_mode(mode, st0, tg, p, tol)?;
    let ds0 = derive(tg.t0, mode, st0);
    let derived = integrate_derived(mode, &ds0, tg, p, tol)?;
    let mut max_residual: f64 = 0.0;
    let mut max_divfree: f64 = 0.0;
    let mut running_scale: f64 = 0.0;
    let mut running_w_scale: f64 = 0.0;
    for (i, &t) in tg.output_times.iter().enumerate() {
        let via_primitive = derive(t, mode, &primitive[i]);
        let direct = derived[i];
        let mut diff = 0.0;
        for j in 0..3 {
            diff += (via_primitive.grad_b[j] - direct.grad_b[j]).norm_sqr()
                + (via_primitive.grad_div[j] - direct.grad_div[j]).norm_sqr()
                + (via_primitive.w[j] - direct.w[j]).norm_sqr();
        }
        running_scale = running_scale
            .max(via_primitive.norm_sqr().max(direct.norm_sqr()).sqrt());
        if running_scale > 1e-300 {
            max_residual = max_residual.max(diff.sqrt() / running_scale);
        }
        let sy = symbol_values(t, mode);
        let w = direct.w_raw();
        let div = sy.iota[0] * w[0] + sy.iota[1] * w[1] + sy.iota[2] * w[2];
        let wnorm = (w.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
        running_w_scale = running_w_scale.max(sy.p.sqrt() * wnorm);
        if running_w_scale > 1e-300 {
            max_divfree = max_divfree.max(div.norm() / running_w_scale);
        }
    }
    Ok(ConsistencyResult {
        max_residual,
        max_divfree_residual: max_divfree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rand_state(seed: u64) -> PrimitiveState {
        PrimitiveState::new(
            crate::rng::unit_disk(seed, 0),
            [
                crate::rng::unit_disk(seed, 2),
                crate::rng::unit_disk(seed, 4),
                crate::rng::unit_disk(seed, 6),
            ],
        )
    }

    #[test]
    fn gradient_field_has_zero_w_raw() {
        // u = iota * s: Laplacian(u) = grad(div u), so w = 0 and W = (-B^2, B^1, 0).
        let mode = Mode::new(2, 1.3, -1, 1.0);
        let t = 0.7;
        let sy = symbol_values(t, &mode);
        let scalar = c(0.4, -0.9);
        let st = PrimitiveState::new(
            c(0.3, 0.2),
            [sy.iota[0] * scalar, sy.iota[1] * scalar, sy.iota[2] * scalar],
        );
        let ds = derive(t, &mode, &st);
        for v in ds.w_raw() {
            assert!(v.norm() < 1e-12);
        }
        assert!((ds.w[0] + ds.grad_b[1]).norm() < 1e-12);
        assert!((ds.w[1] - ds.grad_b[0]).norm() < 1e-12);
        assert!(ds.w[2].norm() < 1e-12);
    }

    #[test]
    fn incompressible_field_keeps_plain_laplacian() {
        // b = 0, iota.u = 0: D = 0 and W^j = -p u_j.
        let mode = Mode::new(1, 2.0, 1, 1.0);
        let t = 0.5;
        let sy = symbol_values(t, &mode);
        // u orthogonal to iota: u = (i(eta-kt), -ik, 0) has iota.u = 0... use cross pattern.
        let u = [sy.iota[1], -sy.iota[0], c(0.0, 0.0)];
        let st = PrimitiveState::new(c(0.0, 0.0), u);
        let ds = derive(t, &mode, &st);
        for v in ds.grad_div {
            assert!(v.norm() < 1e-12);
        }
        for j in 0..3 {
            assert!((ds.w[j] + sy.p * u[j]).norm() < 1e-10);
        }
        let w = ds.w_raw();
        let div = sy.iota[0] * w[0] + sy.iota[1] * w[1] + sy.iota[2] * w[2];
        assert!(div.norm() < 1e-12);
    }

    #[test]
    fn divergence_of_w_vanishes_identically() {
        for seed in 0..50u64 {
            let mode = Mode::new(
                crate::rng::range_i64(seed, 100, 1, 4),
                crate::rng::range_f64(seed, 101, -5.0, 5.0),
                crate::rng::range_i64(seed, 102, -3, 3),
                1.0,
            );
            let t = crate::rng::range_f64(seed, 103, 0.0, 10.0);
            let st = rand_state(seed);
            let sy = symbol_values(t, &mode);
            let w = derive(t, &mode, &st).w_raw();
            let div = sy.iota[0] * w[0] + sy.iota[1] * w[1] + sy.iota[2] * w[2];
            let unorm = st.u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            assert!(div.norm() <= 1e-12 * sy.p * unorm.max(1.0));
        }
    }

    #[test]
    fn mean_mode_derives_to_zero() {
        let mode = Mode::new(0, 0.0, 0, 1.0);
        let ds = derive(3.0, &mode, &rand_state(5));
        assert_eq!(ds.norm_sqr(), 0.0);
    }

    #[test]
    fn lx_plugin_values() {
        // (B1, D1, W2) = (1, 0, 0) at t=0, k=1, eta=0, l=0, eps=1:
        // dD1 = -(2k^2/p)(W2 - B1) + p B1 = 2 + 1 = 3, dW2 = mu p B1 = mu.
        let p = PhysicalParams::new(0.3, 0.0, 1.0);
        let mode = Mode::new(1, 0.0, 0, 1.0);
        let s = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let (db1, dd1, dw2) = rhs_lx(0.0, &mode, &s, &p).unwrap();
        assert_eq!(db1, c(0.0, 0.0));
        assert_relative_eq!(dd1.re, 3.0);
        assert_relative_eq!(dw2.re, p.mu);
    }

    #[test]
    fn lx_coupling_cancels_when_w2_equals_b1() {
        let p = PhysicalParams::new(1e-2, 0.0, 0.5);
        let mode = Mode::new(1, 1.0, 2, 1.0);
        let v = c(0.7, -0.3);
        let s = (v, c(0.0, 0.0), v);
        let sy = symbol_values(1.2, &mode);
        let (_, dd1, _) = rhs_lx(1.2, &mode, &s, &p).unwrap();
        // Only the pressure term survives in dD1.
        let expected = (sy.p / (p.eps * p.eps)) * v;
        assert!((dd1 - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn lz_decouples_without_spanwise_wavenumber() {
        let p = PhysicalParams::new(1e-2, 0.1, 0.5);
        let mode = Mode::new(2, -1.0, 0, 1.0);
        let s = (c(0.3, 0.1), c(-0.2, 0.4), c(0.5, 0.0));
        let with = rhs_lz(0.8, &mode, &s, &(c(9.0, 0.0), c(-3.0, 1.0)), &p).unwrap();
        let without = rhs_lz(0.8, &mode, &s, &(c(0.0, 0.0), c(0.0, 0.0)), &p).unwrap();
        assert_eq!(with, without);
    }

    #[test]
    fn forcing_plugin_values() {
        // (B1, D1, W2) = (1, 0, 0), k=1, eta=0, l=0, t=0: p' = 0,
        // F = -1, G = 0, H = 2 - 0 + 2(0 - 1) = 0.
        let mode = Mode::new(1, 0.0, 0, 1.0);
        let s = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let f = forcing_fgh(0.0, &mode, &s).unwrap();
        assert_eq!(f.f, c(-1.0, 0.0));
        assert_eq!(f.g, c(0.0, 0.0));
        assert!((f.h - c(0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn forcing_without_coupling() {
        // W2 = B1, D1 = 0: G = 0 and H = 2 B1 - W2.
        let mode = Mode::new(1, 2.0, 1, 1.0);
        let v = c(0.4, 0.6);
        let f = forcing_fgh(1.0, &mode, &(v, c(0.0, 0.0), v)).unwrap();
        assert!(f.g.norm() < 1e-15);
        assert!((f.h - (2.0 * v - v)).norm() < 1e-15);
    }

    #[test]
    fn forcing_linear_and_zero_on_zero() {
        let mode = Mode::new(2, -0.7, 1, 1.0);
        let zero = forcing_fgh(0.3, &mode, &(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))).unwrap();
        assert_eq!(zero.f, c(0.0, 0.0));
        assert_eq!(zero.g, c(0.0, 0.0));
        assert_eq!(zero.h, c(0.0, 0.0));
        let s = (c(0.3, -0.1), c(0.2, 0.8), c(-0.5, 0.4));
        let f1 = forcing_fgh(0.3, &mode, &s).unwrap();
        let f2 = forcing_fgh(0.3, &mode, &(2.0 * s.0, 2.0 * s.1, 2.0 * s.2)).unwrap();
        assert!((f2.f - 2.0 * f1.f).norm() < 1e-14);
        assert!((f2.g - 2.0 * f1.g).norm() < 1e-14);
        assert!((f2.h - 2.0 * f1.h).norm() < 1e-14);
    }

    #[test]
    fn ly_without_forcing_is_closed_in_b2_d2() {
        // With F = G = H = 0, (B2, D2) evolve independently of W1.
        let p = PhysicalParams::new(1e-2, 0.0, 0.5);
        let mode = Mode::new(1, 1.5, -1, 1.0);
        let zero = ForcingTriple {
            f: c(0.0, 0.0),
            g: c(0.0, 0.0),
            h: c(0.0, 0.0),
        };
        let s1 = (c(0.4, -0.2), c(0.1, 0.9), c(0.0, 0.0));
        let s2 = (s1.0, s1.1, c(5.0, -7.0));
        let r1 = rhs_ly(0.8, &mode, &s1, &zero, &p).unwrap();
        let r2 = rhs_ly(0.8, &mode, &s2, &zero, &p).unwrap();
        assert_eq!(r1.0, r2.0);
        assert_eq!(r1.1, r2.1);
        assert_ne!(r1.2, r2.2);
    }

    #[test]
    fn consistency_residual_scales_with_tolerance() {
        // The residual is error-controlled: tightening tol by 100 must shrink
        // it by at least ~10 (observed scaling is linear in tol).
        let p = PhysicalParams::new(1e-2, 0.0, 1.0);
        let mode = Mode::new(2, -1.0, 2, 1.0);
        let st0 = rand_state(77);
        let tg = TimeGrid::linear(2.0 / p.mu.cbrt(), 9).unwrap();
        let loose = consistency_check(&mode, &st0, &tg, &p, 1e-8)
            .unwrap()
            .max_residual;
        let tight = consistency_check(&mode, &st0, &tg, &p, 1e-10)
            .unwrap()
            .max_residual;
        assert!(tight > 0.0 && tight * 10.0 < loose, "loose {loose}, tight {tight}");
    }

    #[test]
    fn derived_rhs_rejects_zero_k() {
        let p = PhysicalParams::new(1e-2, 0.0, 1.0);
        let mode = Mode::new(0, 1.0, 0, 1.0);
        let s = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert!(rhs_lx(0.0, &mode, &s, &p).is_err());
        assert!(forcing_fgh(0.0, &mode, &s).is_err());
    }

    #[test]
    fn consistency_zero_state() {
        let p = PhysicalParams::new(1e-2, 0.0, 1.0);
        let mode = Mode::new(1, 0.5, 1, 1.0);
        let tg = TimeGrid::linear(5.0, 6).unwrap();
        let r = consistency_check(&mode, &PrimitiveState::zero(), &tg, &p, 1e-10).unwrap();
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn consistency_on_random_modes() {
        let p = PhysicalParams::new(1e-2, 0.0, 1.0);
        let t_end = 2.0 / p.mu.cbrt();
        let tg = TimeGrid::linear(t_end, 9).unwrap();
        for seed in 0..8u64 {
            let mode = Mode::new(
                crate::rng::range_i64(seed, 300, 1, 2),
                crate::rng::range_f64(seed, 301, -2.0, 2.0),
                crate::rng::range_i64(seed, 302, -2, 2),
                1.0,
            );
            let st0 = rand_state(seed + 4000);
            let r = consistency_check(&mode, &st0, &tg, &p, 1e-10).unwrap();
            assert!(r.max_residual <= 1e-6, "seed {seed}: {}", r.max_residual);
            assert!(r.max_divfree_residual <= 1e-10);
        }
    }

    #[test]
    fn consistency_gradient_data() {
        // Gradient initial data: w vanishes at t = 0 (so W = (-B^2, B^1, 0)),
        // and the shear regenerates w through d/dt w^2 = D^1 - mu p w^2. Both
        // integration routes must agree on that regeneration.
        let p = PhysicalParams::new(1e-2, 0.05, 1.0);
        let mode = Mode::new(1, 1.0, 1, 1.0);
        let sy0 = symbol_values(0.0, &mode);
        let scalar = c(0.8, 0.1);
        let st0 = PrimitiveState::new(
            c(0.2, -0.4),
            [
                sy0.iota[0] * scalar,
                sy0.iota[1] * scalar,
                sy0.iota[2] * scalar,
            ],
        );
        let ds0 = derive(0.0, &mode, &st0);
        assert!(ds0.w_raw().iter().all(|v| v.norm() < 1e-12));
        let tg = TimeGrid::linear(6.0, 7).unwrap();
        let r = consistency_check(&mode, &st0, &tg, &p, 1e-11).unwrap();
        assert!(r.max_residual <= 1e-7, "residual {}", r.max_residual);
        assert!(r.max_divfree_residual <= 1e-11);
    }

    #[test]
    fn reconstruction_inverts_derive() {
        for seed in 0..30u64 {
            let mode = Mode::new(
                crate::rng::range_i64(seed, 500, 1, 3),
                crate::rng::range_f64(seed, 501, -4.0, 4.0),
                crate::rng::range_i64(seed, 502, -3, 3),
                1.0,
            );
            let t = crate::rng::range_f64(seed, 503, 0.0, 12.0);
            let st = rand_state(seed + 900);
            let back = reconstruct_primitive(t, &mode, &derive(t, &mode, &st)).unwrap();
            let scale = st.norm_sqr().sqrt();
            assert!((back.b - st.b).norm() <= 1e-10 * scale);
            for j in 0..3 {
                assert!((back.u[j] - st.u[j]).norm() <= 1e-10 * scale);
            }
        }
    }

    proptest! {
        // derive is exactly linear.
        #[test]
        fn derive_linearity(re in -2.0f64..2.0, im in -2.0f64..2.0,
                            t in 0.0f64..10.0, k in 1i64..4, l in -3i64..3) {
            let mode = Mode::new(k, 0.7, l, 1.0);
            let s1 = rand_state(17);
            let s2 = rand_state(18);
            let alpha = c(re, im);
            let combined = PrimitiveState {
                b: alpha * s1.b + s2.b,
                u: [
                    alpha * s1.u[0] + s2.u[0],
                    alpha * s1.u[1] + s2.u[1],
                    alpha * s1.u[2] + s2.u[2],
                ],
            };
            let lhs = derive(t, &mode, &combined);
            let d1 = derive(t, &mode, &s1);
            let d2 = derive(t, &mode, &s2);
            for j in 0..3 {
                prop_assert!((lhs.grad_b[j] - (alpha * d1.grad_b[j] + d2.grad_b[j])).norm() < 1e-10);
                prop_assert!((lhs.grad_div[j] - (alpha * d1.grad_div[j] + d2.grad_div[j])).norm() < 1e-10);
                prop_assert!((lhs.w[j] - (alpha * d1.w[j] + d2.w[j])).norm() < 1e-10);
            }
        }
    }
}
