//! Physical and algorithmic parameters with validation of the standing assumptions.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dimensionless physical parameters of the linearized system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Shear viscosity mu > 0.
    pub mu: f64,
    /// Second viscosity lambda, constrained through 2*mu + 3*lambda >= 0.
    pub lambda: f64,
    /// Mach number eps > 0; the pressure term scales as grad(b)/eps^2.
    pub eps: f64,
}

impl PhysicalParams {
    pub fn new(mu: f64, lambda: f64, eps: f64) -> Self {
        Self { mu, lambda, eps }
    }

    /// lambda + 2*mu, the divergence dissipation coefficient.
    pub fn lam2mu(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    pub fn mu_third(&self) -> f64 {
        self.mu.cbrt()
    }
}

/// Which set of standing assumptions to enforce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Non-zero x-mode theory (enhanced dissipation).
    NonzeroMode,
    /// Zero x-mode theory (energy bounds, heat-type decay, lift-up).
    ZeroMode,
    /// Both of the above.
    Both,
    /// Unit-test regime that additionally allows mu = lambda = 0 so exact
    /// energy conservation of the zero-mode system can be checked.
    TestInviscid,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::NonzeroMode => "nonzero-mode",
            Regime::ZeroMode => "zero-mode",
            Regime::Both => "both",
            Regime::TestInviscid => "test-inviscid",
        }
    }
}

/// Outcome of parameter validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub regime: String,
    pub ok: bool,
    /// Human-readable list of every violated inequality.
    pub violations: Vec<String>,
}

fn check(cond: bool, label: &str, violations: &mut Vec<String>) {
    if !cond {
        violations.push(label.to_string());
    }
}

/// Validates `p` against the inequalities of the requested regime.
pub fn validate_params(p: &PhysicalParams, regime: Regime) -> ValidationReport {
    let mut v = Vec::new();
    let finite = p.mu.is_finite() && p.lambda.is_finite() && p.eps.is_finite();
    check(finite, "all parameters finite", &mut v);
    if finite {
        check(p.eps > 0.0, "eps > 0", &mut v);
        check(
            2.0 * p.mu + 3.0 * p.lambda >= 0.0,
            "2*mu + 3*lambda >= 0",
            &mut v,
        );
        match regime {
            Regime::TestInviscid => {
                check(p.mu >= 0.0, "mu >= 0", &mut v);
            }
            _ => {
                check(p.mu > 0.0, "mu > 0", &mut v);
            }
        }
        let m3 = p.mu.cbrt();
        let l2m = p.lam2mu();
        if matches!(regime, Regime::NonzeroMode | Regime::Both) {
            check(l2m <= 1.0, "lambda + 2*mu <= 1", &mut v);
            check(m3 * p.eps <= 0.25, "mu^(1/3)*eps <= 1/4", &mut v);
            check(
                m3 * l2m * p.eps * p.eps <= 1.0,
                "mu^(1/3)*(lambda+2*mu)*eps^2 <= 1",
                &mut v,
            );
        }
        if matches!(regime, Regime::ZeroMode | Regime::Both) {
            check(l2m <= 1.0, "lambda + 2*mu <= 1", &mut v);
            check(l2m * p.eps <= 1.0, "(lambda+2*mu)*eps <= 1", &mut v);
            check(
                p.mu * (p.lambda + p.mu) * p.eps * p.eps <= 1.0,
                "mu*(lambda+mu)*eps^2 <= 1",
                &mut v,
            );
        }
    }
    v.dedup();
    ValidationReport {
        regime: regime.name().to_string(),
        ok: v.is_empty(),
        violations: v,
    }
}

/// Like [`validate_params`] but returning an error on rejection.
pub fn require_valid(p: &PhysicalParams, regime: Regime) -> Result<()> {
    let report = validate_params(p, regime);
    if report.ok {
        Ok(())
    } else {
        Err(Error::InvalidParams {
            regime: report.regime,
            violations: report.violations,
        })
    }
}

/// Constants entering the multiplier weights and the Lyapunov functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierParams {
    /// Growth-balancing constant N in m1 and m3.
    pub n_growth: f64,
    /// Cross-term weight: h^2 = c * M^2.
    pub c: f64,
    /// Coupling weight for the second energy functional.
    pub c0: f64,
    /// Sobolev regularity index s >= 0 in the weight M.
    pub s: f64,
}

/// Exact value used for c0; the theory only requires c0 <= 1/(32*4550).
pub const C0_DEFAULT: f64 = 1.0 / 145_600.0;

/// Default constants: N = 9(1+eps)^2, c = mu^(1/3)/8, c0 = 1/145600, s = 0.
pub fn default_multiplier_params(p: &PhysicalParams) -> MultiplierParams {
    MultiplierParams {
        n_growth: 9.0 * (1.0 + p.eps) * (1.0 + p.eps),
        c: p.mu.cbrt() / 8.0,
        c0: C0_DEFAULT,
        s: 0.0,
    }
}
