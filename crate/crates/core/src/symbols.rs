//! Fourier wavenumber bookkeeping and the moving-frame symbols p, p', iota.
//!
//! In the sheared frame X = x - t*y the gradient acts per mode (k, eta, l) as
//! multiplication by iota = (ik, i(eta - k t), il), so every constant-coefficient
//! operator of the original system becomes a scalar symbol.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// One Fourier wavenumber triple together with its eta-quadrature weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// Streamwise wavenumber (x lives on the torus).
    pub k: i64,
    /// Wall-normal frequency (y lives on the line).
    pub eta: f64,
    /// Spanwise wavenumber (z lives on the torus).
    pub l: i64,
    /// Trapezoid weight for the eta integral; delta_eta in the interior.
    pub weight: f64,
}

impl Mode {
    pub fn new(k: i64, eta: f64, l: i64, weight: f64) -> Self {
        Self { k, eta, l, weight }
    }

    /// k^2 + l^2 as a float.
    pub fn kl_sq(&self) -> f64 {
        (self.k * self.k + self.l * self.l) as f64
    }
}

/// Uniform symmetric discretization of the eta line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeGrid {
    pub k_max: i64,
    pub l_max: i64,
    pub eta_max: f64,
    pub delta_eta: f64,
}

/// Moving-frame symbol values at one (t, mode).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolValues {
    /// p = k^2 + (eta - k t)^2 + l^2, the symbol of -Delta_L.
    pub p: f64,
    /// p' = -2 k (eta - k t) = dp/dt.
    pub p_prime: f64,
    /// Sheared gradient symbol (ik, i(eta - k t), il).
    pub iota: [Complex64; 3],
}

/// Evaluates p, p' and the sheared gradient symbol.
pub fn symbol_values(t: f64, mode: &Mode) -> SymbolValues {
    let kf = mode.k as f64;
    let lf = mode.l as f64;
    let sheared = mode.eta - kf * t;
    SymbolValues {
        p: kf * kf + sheared * sheared + lf * lf,
        p_prime: -2.0 * kf * sheared,
        iota: [
            Complex64::new(0.0, kf),
            Complex64::new(0.0, sheared),
            Complex64::new(0.0, lf),
        ],
    }
}

/// Enumerates the grid in a fixed order: k ascending, then l, then eta.
///
/// Interior eta points carry weight delta_eta, the two endpoints delta_eta/2,
/// so the weights telescope to 2*eta_max at fixed (k, l).
pub fn build_grid(g: &ModeGrid) -> Result<Vec<Mode>> {
    if !(g.delta_eta > 0.0) {
        return Err(Error::Grid(format!(
            "delta_eta must be positive, got {}",
            g.delta_eta
        )));
    }
    if g.eta_max < g.delta_eta {
        return Err(Error::Grid(format!(
            "eta_max ({}) must be at least delta_eta ({})",
            g.eta_max, g.delta_eta
        )));
    }
    if g.k_max < 0 || g.l_max < 0 {
        return Err(Error::Grid("k_max and l_max must be non-negative".into()));
    }
    let ratio = g.eta_max / g.delta_eta;
    let n = ratio.round() as i64;
    if (ratio - n as f64).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Grid(format!(
            "eta_max ({}) must be an integer multiple of delta_eta ({})",
            g.eta_max, g.delta_eta
        )));
    }
    let mut modes =
        Vec::with_capacity(((2 * g.k_max + 1) * (2 * g.l_max + 1) * (2 * n + 1)) as usize);
    for k in -g.k_max..=g.k_max {
        for l in -g.l_max..=g.l_max {
            for j in -n..=n {
                let weight = if j == -n || j == n {
                    g.delta_eta / 2.0
                } else {
                    g.delta_eta
                };
                modes.push(Mode::new(k, j as f64 * g.delta_eta, l, weight));
            }
        }
    }
    Ok(modes)
}
