//! Rate extraction and theorem-level audit logic over recorded time series.
//!
//! Audits are pure functions of their input series, so re-running them on a
//! saved CSV reproduces the report bitwise.

use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use serde::Serialize;

/// Result of a least-squares rate or exponent fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    /// Decay rate (exponential fits) or exponent (power-law fits).
    pub rate_or_exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - xm) * (x - xm);
        sxy += (x - xm) * (y - ym);
        syy += (y - ym) * (y - ym);
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    // A flat series has nothing to explain; rounding noise in syy would
    // otherwise turn r^2 into garbage.
    let r2 = if syy <= 1e-20 * n * (1.0 + ym * ym) {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (slope, intercept, r2)
}

fn windowed(series: &[(f64, f64)], window: (f64, f64)) -> Vec<(f64, f64)> {
    series
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .collect()
}

/// Fits log(value) = intercept - rate * t over the window; returns rate = -slope.
pub fn fit_exponential_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    let pts = windowed(series, window);
    if pts.len() < 5 {
        return Err(Error::TooFewPoints {
            found: pts.len(),
            needed: 5,
        });
    }
    if pts.iter().any(|(_, v)| *v <= 0.0) {
        return Err(Error::NonPositiveValue);
    }
    let xs: Vec<f64> = pts.iter().map(|(t, _)| *t).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let (slope, intercept, r2) = least_squares(&xs, &ys);
    Ok(RateFit {
        rate_or_exponent: -slope,
        intercept,
        r_squared: r2,
        window,
        n_points: pts.len(),
    })
}

/// Fits log(value) against log(1 + t); the slope is the power-law exponent.
pub fn fit_power_law(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    let pts = windowed(series, window);
    if pts.len() < 5 {
        return Err(Error::TooFewPoints {
            found: pts.len(),
            needed: 5,
        });
    }
    if pts.iter().any(|(_, v)| *v <= 0.0) {
        return Err(Error::NonPositiveValue);
    }
    let xs: Vec<f64> = pts.iter().map(|(t, _)| (1.0 + t).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let (slope, intercept, r2) = least_squares(&xs, &ys);
    Ok(RateFit {
        rate_or_exponent: slope,
        intercept,
        r_squared: r2,
        window,
        n_points: pts.len(),
    })
}

/// Max positive relative increment of e^{rate t} * value over consecutive samples:
/// max of (next * e^{rate dt} - prev) / max(prev, floor), with
/// floor = 1e-30 * max(series). Zero or negative means the envelope holds.
pub fn monotonicity_audit(series: &[(f64, f64)], envelope_rate: f64) -> f64 {
    let max_v = series.iter().map(|(_, v)| *v).fold(0.0f64, f64::max);
    let floor = (1e-30 * max_v).max(f64::MIN_POSITIVE);
    let mut worst = f64::NEG_INFINITY;
    for w in series.windows(2) {
        let (t0, v0) = w[0];
        let (t1, v1) = w[1];
        let inc = (v1 * (envelope_rate * (t1 - t0)).exp() - v0) / v0.max(floor);
        worst = worst.max(inc);
    }
    worst
}

/// Initial-data norms feeding the lift-up bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LiftupData {
    /// ||(u1_in)_0||_{L2}.
    pub u1_in: f64,
    /// ||P_{l != 0}(b_in/eps, u~_in)_0||_{L2}.
    pub lneq_in: f64,
    /// ||((b_in)_00/eps, (u2_in)_00)||_{L2 cap L1} = max of the two norms.
    pub data_00: f64,
}

/// Outcome of the lift-up bound audit.
#[derive(Debug, Clone, Serialize)]
pub struct LiftupAudit {
    /// Smallest constant C >= 1 making the bound hold at every sample.
    pub calibrated_c: f64,
    pub pass: bool,
    /// LHS(t) - RHS(t, calibrated_c) per sample; all <= 0 when pass.
    pub margins: Vec<(f64, f64)>,
}

/// Audits ||u1_0(t)|| + mu^{1/2} ||grad u1_0||_{L2(0,t) L2} against
///   ||u1_in|| + C/mu * lneq_in + C (lambda+2mu)^{-1/4} <t>^{3/4} data_00.
///
/// `u1_series` carries (t, ||u1_0(t)||); `grad_sq_series` carries
/// (t, ||grad u1_0(t)||^2), integrated here by the trapezoid rule.
pub fn liftup_bound_audit(
    u1_series: &[(f64, f64)],
    grad_sq_series: &[(f64, f64)],
    data: &LiftupData,
    phys: &PhysicalParams,
) -> Result<LiftupAudit> {
    if u1_series.len() != grad_sq_series.len() || u1_series.is_empty() {
        return Err(Error::Audit("series length mismatch".into()));
    }
    if data.data_00 == 0.0 && data.lneq_in == 0.0 {
        // The calibrated terms vanish; the bound degenerates.
        return Err(Error::MissingL1Data);
    }
    let lam2mu = phys.lam2mu();
    let mut required_c: f64 = 1.0;
    let mut cum = 0.0;
    let mut cum_at = Vec::with_capacity(u1_series.len());
    for (i, w) in grad_sq_series.windows(2).enumerate() {
        if i == 0 {
            cum_at.push(0.0);
        }
        let (t0, g0) = w[0];
        let (t1, g1) = w[1];
        cum += 0.5 * (g0 + g1) * (t1 - t0);
        cum_at.push(cum);
    }
    for (i, &(t, u1)) in u1_series.iter().enumerate() {
        let lhs = u1 + phys.mu.sqrt() * cum_at[i].sqrt();
        let denom = data.lneq_in / phys.mu
            + lam2mu.powf(-0.25) * (1.0 + t * t).powf(3.0 / 8.0) * data.data_00;
        let excess = lhs - data.u1_in;
        if excess > 0.0 {
            required_c = required_c.max(excess / denom);
        }
    }
    let margins = u1_series
        .iter()
        .enumerate()
        .map(|(i, &(t, u1))| {
            let lhs = u1 + phys.mu.sqrt() * cum_at[i].sqrt();
            let rhs = data.u1_in
                + required_c
                    * (data.lneq_in / phys.mu
                        + lam2mu.powf(-0.25) * (1.0 + t * t).powf(3.0 / 8.0) * data.data_00);
            (t, lhs - rhs)
        })
        .collect();
    Ok(LiftupAudit {
        calibrated_c: required_c,
        pass: required_c.is_finite(),
        margins,
    })
}

/// Theorem-level claims the rate audit knows how to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClaimId {
    T11B,
    T11U1,
    T11U2,
    T11U3,
    L32,
    L33K0,
    L33K1,
    P41,
}

impl ClaimId {
    pub const ALL: [ClaimId; 8] = [
        ClaimId::T11B,
        ClaimId::T11U1,
        ClaimId::T11U2,
        ClaimId::T11U3,
        ClaimId::L32,
        ClaimId::L33K0,
        ClaimId::L33K1,
        ClaimId::P41,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ClaimId::T11B => "T1.1-b",
            ClaimId::T11U1 => "T1.1-u1",
            ClaimId::T11U2 => "T1.1-u2",
            ClaimId::T11U3 => "T1.1-u3",
            ClaimId::L32 => "L3.2",
            ClaimId::L33K0 => "L3.3-k0",
            ClaimId::L33K1 => "L3.3-k1",
            ClaimId::P41 => "P4.1",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .find(|c| c.name() == name)
            .copied()
            .ok_or_else(|| Error::UnknownClaim {
                name: name.to_string(),
                available: Self::ALL.iter().map(|c| c.name().to_string()).collect(),
            })
    }

    /// Which energy-series column the claim audits.
    pub fn column(&self) -> &'static str {
        match self {
            ClaimId::T11B => "b_neq",
            ClaimId::T11U1 => "u1_neq",
            ClaimId::T11U2 => "u2_neq",
            ClaimId::T11U3 => "u3_neq",
            ClaimId::L32 => "zero_b_u_lneq",
            ClaimId::L33K0 => "b00_u2",
            ClaimId::L33K1 => "dy_b00_u2",
            ClaimId::P41 => "e1",
        }
    }

    fn is_power_law(&self) -> bool {
        matches!(self, ClaimId::L33K0 | ClaimId::L33K1)
    }

    /// Required decay rate (exponential claims) or exponent (power-law claims).
    pub fn required(&self, phys: &PhysicalParams) -> f64 {
        let m3 = phys.mu.cbrt();
        match self {
            ClaimId::T11B | ClaimId::T11U3 => m3 / 44.0,
            ClaimId::T11U1 | ClaimId::T11U2 => m3 / 88.0,
            ClaimId::L32 => phys.mu / 3.0,
            ClaimId::L33K0 => -0.25,
            ClaimId::L33K1 => -0.75,
            ClaimId::P41 => m3 / 22.0,
        }
    }
}

/// Audit verdict for one claim.
#[derive(Debug, Clone, Serialize)]
pub struct ClaimReport {
    pub claim: String,
    pub fitted: f64,
    pub required: f64,
    pub r2: f64,
    pub window: (f64, f64),
    pub pass: bool,
    /// Set when r^2 < 0.95: the fit is flagged rather than failed.
    pub inconclusive: bool,
}

/// Fits the claim's series over the window and compares against the theorem.
///
/// Exponential claims pass when the fitted rate reaches the required rate with
/// 5% slack; power-law claims when |fitted - required| <= 0.05 |required| + 0.03.
pub fn theorem_rate_audit(
    claim: ClaimId,
    series: &[(f64, f64)],
    window: (f64, f64),
    phys: &PhysicalParams,
) -> Result<ClaimReport> {
    let required = claim.required(phys);
    let fit = if claim.is_power_law() {
        fit_power_law(series, window)?
    } else {
        fit_exponential_rate(series, window)?
    };
    let inconclusive = fit.r_squared < 0.95;
    let pass = if inconclusive {
        false
    } else if claim.is_power_law() {
        (fit.rate_or_exponent - required).abs() <= 0.05 * required.abs() + 0.03
    } else {
        fit.rate_or_exponent >= 0.95 * required
    };
    Ok(ClaimReport {
        claim: claim.name().to_string(),
        fitted: fit.rate_or_exponent,
        required,
        r2: fit.r_squared,
        window,
        pass,
        inconclusive,
    })
}

/// Window helper for enhanced-dissipation fits: skips the transient before
/// 2 mu^{-1/3} where the critical-time slow-down dominates.
pub fn dissipation_window(phys: &PhysicalParams, t_end: f64) -> (f64, f64) {
    (2.0 / phys.mu.cbrt(), t_end)
}

/// Window helper for heat-type power-law fits: starts at `t_min` and stops
/// where the eta-grid resolution floor is reached (coeff * t * delta_eta^2 > 0.1).
pub fn power_law_window(t_min: f64, coeff: f64, delta_eta: f64, t_end: f64) -> (f64, f64) {
    (t_min, t_end.min(0.1 / (coeff * delta_eta * delta_eta)))
}
