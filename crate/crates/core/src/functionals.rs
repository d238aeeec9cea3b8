//! Weighted quadrature norms over a mode ensemble and the Lyapunov functionals.
//!
//! Norms over the domain are approximated by weighted sums over the mode grid
//! (trapezoid in eta). All reductions run through a fixed pairwise tree in
//! grid order, so results do not depend on thread count.

use crate::dynamics::derived::{derive, DerivedState};
use crate::dynamics::primitive::PrimitiveState;
use crate::error::{Error, Result};
use crate::multipliers::{weights, MultiplierWeights};
use crate::params::{MultiplierParams, PhysicalParams};
use crate::symbols::{build_grid, symbol_values, Mode, ModeGrid};
use num_complex::Complex64;

/// A perturbation field: one primitive state per grid mode, in grid order.
#[derive(Debug, Clone)]
pub struct FieldEnsemble {
    pub grid: ModeGrid,
    pub modes: Vec<Mode>,
    pub states: Vec<PrimitiveState>,
}

impl FieldEnsemble {
    /// All-zero ensemble over the given grid.
    pub fn zero(grid: ModeGrid) -> Result<Self> {
        let modes = build_grid(&grid)?;
        let states = vec![PrimitiveState::zero(); modes.len()];
        Ok(Self {
            grid,
            modes,
            states,
        })
    }

    pub fn with_states(grid: ModeGrid, states: Vec<PrimitiveState>) -> Result<Self> {
        let modes = build_grid(&grid)?;
        if states.len() != modes.len() {
            return Err(Error::Grid(format!(
                "{} states for {} modes",
                states.len(),
                modes.len()
            )));
        }
        Ok(Self {
            grid,
            modes,
            states,
        })
    }

    pub fn index_of(&self, k: i64, eta: f64, l: i64) -> Option<usize> {
        self.modes
            .iter()
            .position(|m| m.k == k && m.l == l && (m.eta - eta).abs() < 1e-9)
    }
}

/// Deterministic pairwise summation; independent of any parallel schedule.
pub fn tree_sum(values: &[f64]) -> f64 {
    let mut buf = values.to_vec();
    let mut n = buf.len();
    if n == 0 {
        return 0.0;
    }
    while n > 1 {
        let half = n / 2;
        for i in 0..half {
            buf[i] = buf[2 * i] + buf[2 * i + 1];
        }
        if n % 2 == 1 {
            buf[half] = buf[n - 1];
        }
        n = half + n % 2;
    }
    buf[0]
}

/// Which per-mode amplitude a weighted norm reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    B,
    U(usize),
    GradB(usize),
    GradDiv(usize),
    W(usize),
}

/// Amplitude selection: a component, optionally multiplied by sqrt(p) and/or 1/eps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selector {
    pub component: Component,
    pub sqrt_neg_lap: bool,
    pub over_eps: bool,
}

impl Selector {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rest = text.trim();
        let over_eps = if let Some(s) = rest.strip_suffix("/eps") {
            rest = s.trim();
            true
        } else {
            false
        };
        let sqrt_neg_lap = if let Some(s) = rest.strip_prefix("sqrt_lap(") {
            rest = s
                .strip_suffix(')')
                .ok_or_else(|| Error::UnknownSelector(text.to_string()))?;
            true
        } else {
            false
        };
        let component = match rest {
            "b" => Component::B,
            "u1" => Component::U(0),
            "u2" => Component::U(1),
            "u3" => Component::U(2),
            "B1" => Component::GradB(0),
            "B2" => Component::GradB(1),
            "B3" => Component::GradB(2),
            "D1" => Component::GradDiv(0),
            "D2" => Component::GradDiv(1),
            "D3" => Component::GradDiv(2),
            "W1" => Component::W(0),
            "W2" => Component::W(1),
            "W3" => Component::W(2),
            _ => return Err(Error::UnknownSelector(text.to_string())),
        };
        Ok(Self {
            component,
            sqrt_neg_lap,
            over_eps,
        })
    }

    fn amplitude(
        &self,
        t: f64,
        mode: &Mode,
        st: &PrimitiveState,
        ds: &DerivedState,
        eps: f64,
    ) -> Complex64 {
        let base = match self.component {
            Component::B => st.b,
            Component::U(j) => st.u[j],
            Component::GradB(j) => ds.grad_b[j],
            Component::GradDiv(j) => ds.grad_div[j],
            Component::W(j) => ds.w[j],
        };
        let mut v = base;
        if self.sqrt_neg_lap {
            v *= symbol_values(t, mode).p.sqrt();
        }
        if self.over_eps {
            v /= eps;
        }
        v
    }
}

/// Multiplier weight applied inside a weighted norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Plain,
    M,
    M1,
    /// sqrt(dt m / m) * M
    SqrtDlogM,
    /// sqrt(dt m_i / m_i) * M for i = 1, 2, 3
    SqrtDlogMi(u8),
}

impl WeightKind {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "plain" => Ok(WeightKind::Plain),
            "M" => Ok(WeightKind::M),
            "M1" => Ok(WeightKind::M1),
            "sqrt_dlogm_M" => Ok(WeightKind::SqrtDlogM),
            "sqrt_dlogm1_M" => Ok(WeightKind::SqrtDlogMi(1)),
            "sqrt_dlogm2_M" => Ok(WeightKind::SqrtDlogMi(2)),
            "sqrt_dlogm3_M" => Ok(WeightKind::SqrtDlogMi(3)),
            other => Err(Error::UnknownSelector(other.to_string())),
        }
    }

    fn value(&self, w: &MultiplierWeights) -> f64 {
        match self {
            WeightKind::Plain => 1.0,
            WeightKind::M => w.big_m,
            WeightKind::M1 => w.big_m1,
            WeightKind::SqrtDlogM => w.dlog_m.sqrt() * w.big_m,
            WeightKind::SqrtDlogMi(1) => w.dlog_m1.sqrt() * w.big_m,
            WeightKind::SqrtDlogMi(2) => w.dlog_m2.sqrt() * w.big_m,
            WeightKind::SqrtDlogMi(3) => w.dlog_m3.sqrt() * w.big_m,
            WeightKind::SqrtDlogMi(_) => unreachable!(),
        }
    }
}

/// sqrt( sum_modes weight(t, mode)^2 |amplitude|^2 mode.weight ).
pub fn weighted_l2(
    ens: &FieldEnsemble,
    t: f64,
    selector: Selector,
    kind: WeightKind,
    phys: &PhysicalParams,
    mp: &MultiplierParams,
) -> f64 {
    let terms: Vec<f64> = ens
        .modes
        .iter()
        .zip(&ens.states)
        .map(|(mode, st)| {
            let ds = derive(t, mode, st);
            let w = match kind {
                WeightKind::Plain => 1.0,
                _ => kind.value(&weights(t, mode, phys, mp)),
            };
            let amp = selector.amplitude(t, mode, st, &ds, phys.eps);
            w * w * amp.norm_sqr() * mode.weight
        })
        .collect();
    tree_sum(&terms).sqrt()
}

fn per_mode_energy_terms(
    t: f64,
    mode: &Mode,
    st: &PrimitiveState,
    phys: &PhysicalParams,
    mp: &MultiplierParams,
) -> (f64, f64, f64, f64) {
    if mode.k == 0 {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let ds = derive(t, mode, st);
    let w = weights(t, mode, phys, mp);
    let s = symbol_values(t, mode);
    let m2 = w.big_m * w.big_m;
    let m12 = w.big_m1 * w.big_m1;
    let inv_eps2 = 1.0 / (phys.eps * phys.eps);
    let mut e1 = 0.0;
    for i in [0usize, 2] {
        e1 += m2 * s.p * ds.grad_b[i].norm_sqr() * inv_eps2;
        e1 += w.dlog_m * m2 * ds.grad_b[i].norm_sqr();
        e1 += m2 * ds.grad_div[i].norm_sqr();
    }
    e1 += m2 * ds.w[1].norm_sqr() + m12 * ds.w[2].norm_sqr();

    let gh = w.g * w.g - w.h * w.h;
    let cross1: f64 = [0usize, 2]
        .iter()
        .map(|&i| 2.0 * gh * (ds.grad_b[i] * ds.grad_div[i].conj()).re)
        .sum();

    let e2 = m2 * s.p * ds.grad_b[1].norm_sqr() * inv_eps2
        + w.dlog_m * m2 * ds.grad_b[1].norm_sqr()
        + m2 * ds.grad_div[1].norm_sqr()
        + m12 * ds.w[0].norm_sqr();
    let cross2 = 2.0 * gh * (ds.grad_b[1] * ds.grad_div[1].conj()).re;
    (
        e1 * mode.weight,
        cross1 * mode.weight,
        e2 * mode.weight,
        cross2 * mode.weight,
    )
}

/// The first energy functional over the (B^1, D^1, W^2, B^3, D^3, W^3) block:
/// sum of M-weighted squared norms of sqrt(p) B^i / eps, sqrt(dlog m) B^i, D^i
/// (i = 1, 3) plus M W^2 and M1 W^3.
pub fn energy_e1(ens: &FieldEnsemble, t: f64, phys: &PhysicalParams, mp: &MultiplierParams) -> f64 {
    let terms: Vec<f64> = ens
        .modes
        .iter()
        .zip(&ens.states)
        .map(|(m, s)| per_mode_energy_terms(t, m, s, phys, mp).0)
        .collect();
    tree_sum(&terms)
}

/// E1 plus the signed g/h cross terms; equivalent to E1 within [5/8, 11/8].
pub fn energy_cal_e1(
    ens: &FieldEnsemble,
    t: f64,
    phys: &PhysicalParams,
    mp: &MultiplierParams,
) -> f64 {
    let terms: Vec<f64> = ens
        .modes
        .iter()
        .zip(&ens.states)
        .map(|(m, s)| {
            let (e1, c1, _, _) = per_mode_energy_terms(t, m, s, phys, mp);
            e1 + c1
        })
        .collect();
    tree_sum(&terms)
}

/// The second energy functional over the (B^2, D^2, W^1) block.
pub fn energy_e2(ens: &FieldEnsemble, t: f64, phys: &PhysicalParams, mp: &MultiplierParams) -> f64 {
    let terms: Vec<f64> = ens
        .modes
        .iter()
        .zip(&ens.states)
        .map(|(m, s)| per_mode_energy_terms(t, m, s, phys, mp).2)
        .collect();
    tree_sum(&terms)
}

pub fn energy_cal_e2(
    ens: &FieldEnsemble,
    t: f64,
    phys: &PhysicalParams,
    mp: &MultiplierParams,
) -> f64 {
    let terms: Vec<f64> = ens
        .modes
        .iter()
        .zip(&ens.states)
        .map(|(m, s)| {
            let (_, _, e2, c2) = per_mode_energy_terms(t, m, s, phys, mp);
            e2 + c2
        })
        .collect();
    tree_sum(&terms)
}

/// All energy values at one time, including the named theorem norms.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub e1: f64,
    pub cal_e1: f64,
    pub e2: f64,
    pub cal_e2: f64,
    /// cal_e1 + c0 mu^{2/3} cal_e2, the combined Lyapunov functional.
    pub combined: f64,
    /// e1 + c0 mu^{2/3} e2, the paired plain combination.
    pub combined_plain: f64,
    pub norms: TheoremNorms,
}

/// Named norms appearing in the theorem-level statements.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TheoremNorms {
    pub b_neq: f64,
    pub u1_neq: f64,
    pub u2_neq: f64,
    pub u3_neq: f64,
    /// ||(b_0/eps, u~_0)|| over all k = 0 modes.
    pub zero_b_u: f64,
    /// Same, restricted to l != 0.
    pub zero_b_u_lneq: f64,
    /// ||(b_00/eps, u2_00)|| over k = l = 0.
    pub b00_u2: f64,
    /// eta-derivative weighted version of the line above.
    pub dy_b00_u2: f64,
    pub u3_00: f64,
    pub u1_0: f64,
    pub grad_u1_0: f64,
    /// Second-derivative dissipation quantity:
    /// mu (||grad grad_{x,z} b/eps||^2 + ||grad_{x,z} div u||^2 + ||w^2||^2)
    /// + mu^{4/3} ||w^3||^2 over k != 0.
    pub secder: f64,
}

impl TheoremNorms {
    pub const NAMES: [&'static str; 12] = [
        "b_neq",
        "u1_neq",
        "u2_neq",
        "u3_neq",
        "zero_b_u",
        "zero_b_u_lneq",
        "b00_u2",
        "dy_b00_u2",
        "u3_00",
        "u1_0",
        "grad_u1_0",
        "secder",
    ];

    pub fn values(&self) -> [f64; 12] {
        [
            self.b_neq,
            self.u1_neq,
            self.u2_neq,
            self.u3_neq,
            self.zero_b_u,
            self.zero_b_u_lneq,
            self.b00_u2,
            self.dy_b00_u2,
            self.u3_00,
            self.u1_0,
            self.grad_u1_0,
            self.secder,
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Self::NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values()[i])
    }
}

/// Computes every theorem norm in one pass over the ensemble.
pub fn theorem_norms(ens: &FieldEnsemble, t: f64, phys: &PhysicalParams) -> TheoremNorms {
    let n = ens.modes.len();
    let mut acc: [Vec<f64>; 12] = Default::default();
    for v in acc.iter_mut() {
        v.reserve(n);
    }
    let inv_eps2 = 1.0 / (phys.eps * phys.eps);
    for (mode, st) in ens.modes.iter().zip(&ens.states) {
        let w = mode.weight;
        let neq = mode.k != 0;
        acc[0].push(if neq { st.b.norm_sqr() * w } else { 0.0 });
        acc[1].push(if neq { st.u[0].norm_sqr() * w } else { 0.0 });
        acc[2].push(if neq { st.u[1].norm_sqr() * w } else { 0.0 });
        acc[3].push(if neq { st.u[2].norm_sqr() * w } else { 0.0 });
        let tilde = st.u[1].norm_sqr() + st.u[2].norm_sqr();
        let zero_bu = st.b.norm_sqr() * inv_eps2 + tilde;
        acc[4].push(if !neq { zero_bu * w } else { 0.0 });
        acc[5].push(if !neq && mode.l != 0 { zero_bu * w } else { 0.0 });
        let is00 = !neq && mode.l == 0;
        let bu2 = st.b.norm_sqr() * inv_eps2 + st.u[1].norm_sqr();
        acc[6].push(if is00 { bu2 * w } else { 0.0 });
        acc[7].push(if is00 {
            mode.eta * mode.eta * bu2 * w
        } else {
            0.0
        });
        acc[8].push(if is00 { st.u[2].norm_sqr() * w } else { 0.0 });
        acc[9].push(if !neq { st.u[0].norm_sqr() * w } else { 0.0 });
        let grad2 = mode.eta * mode.eta + (mode.l * mode.l) as f64;
        acc[10].push(if !neq { grad2 * st.u[0].norm_sqr() * w } else { 0.0 });
        if neq {
            let s = symbol_values(t, mode);
            let d = s.iota[0] * st.u[0] + s.iota[1] * st.u[1] + s.iota[2] * st.u[2];
            let w2 = -s.p * st.u[1] - s.iota[1] * d;
            let w3 = -s.p * st.u[2] - s.iota[2] * d;
            let klsq = mode.kl_sq();
            let q = phys.mu
                * (s.p * klsq * st.b.norm_sqr() * inv_eps2
                    + klsq * d.norm_sqr()
                    + w2.norm_sqr())
                + phys.mu.powf(4.0 / 3.0) * w3.norm_sqr();
            acc[11].push(q * w);
        } else {
            acc[11].push(0.0);
        }
    }
    let mut sums = [0.0f64; 12];
    for (i, v) in acc.iter().enumerate() {
        sums[i] = tree_sum(v);
    }
    TheoremNorms {
        b_neq: sums[0].sqrt(),
        u1_neq: sums[1].sqrt(),
        u2_neq: sums[2].sqrt(),
        u3_neq: sums[3].sqrt(),
        zero_b_u: sums[4].sqrt(),
        zero_b_u_lneq: sums[5].sqrt(),
        b00_u2: sums[6].sqrt(),
        dy_b00_u2: sums[7].sqrt(),
        u3_00: sums[8].sqrt(),
        u1_0: sums[9].sqrt(),
        grad_u1_0: sums[10].sqrt(),
        secder: sums[11],
    }
}

/// Full energy report at one time.
pub fn energy_report(
    ens: &FieldEnsemble,
    t: f64,
    phys: &PhysicalParams,
    mp: &MultiplierParams,
) -> EnergyReport {
    let mut e1_terms = Vec::with_capacity(ens.modes.len());
    let mut c1_terms = Vec::with_capacity(ens.modes.len());
    let mut e2_terms = Vec::with_capacity(ens.modes.len());
    let mut c2_terms = Vec::with_capacity(ens.modes.len());
    for (m, s) in ens.modes.iter().zip(&ens.states) {
        let (e1, c1, e2, c2) = per_mode_energy_terms(t, m, s, phys, mp);
        e1_terms.push(e1);
        c1_terms.push(c1);
        e2_terms.push(e2);
        c2_terms.push(c2);
    }
    let e1 = tree_sum(&e1_terms);
    let cal_e1 = e1 + tree_sum(&c1_terms);
    let e2 = tree_sum(&e2_terms);
    let cal_e2 = e2 + tree_sum(&c2_terms);
    let scale = mp.c0 * phys.mu.powf(2.0 / 3.0);
    EnergyReport {
        t,
        e1,
        cal_e1,
        e2,
        cal_e2,
        combined: cal_e1 + scale * cal_e2,
        combined_plain: e1 + scale * e2,
        norms: theorem_norms(ens, t, phys),
    }
}

/// The combined Lyapunov functional cal_E1 + c0 mu^{2/3} cal_E2 and its plain
/// pairing E1 + c0 mu^{2/3} E2.
pub fn combined_lyapunov(
    ens: &FieldEnsemble,
    t: f64,
    phys: &PhysicalParams,
    mp: &MultiplierParams,
) -> (f64, f64) {
    let r = energy_report(ens, t, phys, mp);
    (r.combined, r.combined_plain)
}

/// l-projection filter for zero-mode norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    All,
    LNonzero,
    LZero,
}

/// Sobolev flavor of the zero-mode norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroNormSpace {
    L2,
    /// Multiplies the squared integrand by (1 + eta^2 + l^2).
    H1,
}

/// Discrete norms of the k = 0 part: returns (b-part, u-part) with symbol
/// factors eta^{a1} l^{a2} and the optional H1 weight.
pub fn zero_mode_norm(
    ens: &FieldEnsemble,
    alpha: (u8, u8),
    projection: Projection,
    space: ZeroNormSpace,
    phys: &PhysicalParams,
) -> Result<(f64, f64)> {
    if alpha.0 > 1 || alpha.1 > 1 {
        return Err(Error::BadDerivativeOrder(alpha));
    }
    let inv_eps2 = 1.0 / (phys.eps * phys.eps);
    let mut b_terms = Vec::new();
    let mut u_terms = Vec::new();
    for (mode, st) in ens.modes.iter().zip(&ens.states) {
        if mode.k != 0 {
            continue;
        }
        let keep = match projection {
            Projection::All => true,
            Projection::LNonzero => mode.l != 0,
            Projection::LZero => mode.l == 0,
        };
        if !keep {
            continue;
        }
        let lf = mode.l as f64;
        let mut factor = 1.0;
        if alpha.0 == 1 {
            factor *= mode.eta * mode.eta;
        }
        if alpha.1 == 1 {
            factor *= lf * lf;
        }
        if let ZeroNormSpace::H1 = space {
            factor *= 1.0 + mode.eta * mode.eta + lf * lf;
        }
        b_terms.push(factor * st.b.norm_sqr() * inv_eps2 * mode.weight);
        u_terms.push(factor * (st.u[1].norm_sqr() + st.u[2].norm_sqr()) * mode.weight);
    }
    Ok((tree_sum(&b_terms).sqrt(), tree_sum(&u_terms).sqrt()))
}
