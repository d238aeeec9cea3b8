//! Initial-data generators for the mode ensemble.
//!
//! All randomness flows through the counter-based stream in [`crate::rng`],
//! with counters derived from the mode's position in the fixed grid order, so
//! the same (config, seed) always produces the same ensemble.

use super::config::{ExperimentConfig, InitialDataConfig};
use crate::error::{Error, Result};
use crate::functionals::FieldEnsemble;
use crate::rng;
use num_complex::Complex64;

fn missing(kind: &str, field: &str) -> Error {
    Error::Config(format!("initial_data kind `{kind}` needs `{field}`"))
}

/// Builds the initial ensemble described by the config.
pub fn build_initial_data(cfg: &ExperimentConfig) -> Result<FieldEnsemble> {
    let mut ens = FieldEnsemble::zero(cfg.grid)?;
    let spec = &cfg.initial_data;
    match spec.kind.as_str() {
        "single-mode" => single_mode(&mut ens, spec)?,
        "random-band" => random_band(&mut ens, spec, cfg.seed)?,
        "gaussian-00" => gaussian_00(&mut ens, spec)?,
        "gradient-field" => gradient_field(&mut ens, spec, cfg.seed)?,
        "custom-list" => custom_list(&mut ens, spec)?,
        other => {
            return Err(Error::Config(format!(
                "unknown initial_data kind `{other}`"
            )))
        }
    }
    if spec.conjugate_symmetric.unwrap_or(false) {
        symmetrize(&mut ens);
    }
    for st in &ens.states {
        if !st.norm_sqr().is_finite() {
            return Err(Error::Config("non-finite initial amplitude".into()));
        }
    }
    Ok(ens)
}

fn cpx(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn single_mode(ens: &mut FieldEnsemble, spec: &InitialDataConfig) -> Result<()> {
    let kind = "single-mode";
    let k = spec.k.ok_or_else(|| missing(kind, "k"))?;
    let eta = spec.eta.ok_or_else(|| missing(kind, "eta"))?;
    let l = spec.l.ok_or_else(|| missing(kind, "l"))?;
    let idx = ens
        .index_of(k, eta, l)
        .ok_or_else(|| Error::Config(format!("mode ({k}, {eta}, {l}) not on the grid")))?;
    ens.states[idx].b = cpx(spec.b.unwrap_or_default());
    ens.states[idx].u = [
        cpx(spec.u1.unwrap_or_default()),
        cpx(spec.u2.unwrap_or_default()),
        cpx(spec.u3.unwrap_or_default()),
    ];
    Ok(())
}

fn random_band(ens: &mut FieldEnsemble, spec: &InitialDataConfig, seed: u64) -> Result<()> {
    let kind = "random-band";
    let amplitude = spec.amplitude.ok_or_else(|| missing(kind, "amplitude"))?;
    let width = spec.eta_width.ok_or_else(|| missing(kind, "eta_width"))?;
    let include_zero_k = spec.include_zero_k.unwrap_or(false);
    for (i, (mode, st)) in ens.modes.iter().zip(ens.states.iter_mut()).enumerate() {
        if mode.k == 0 && !include_zero_k {
            continue;
        }
        let envelope = (-mode.eta * mode.eta / (2.0 * width * width)).exp();
        let ctr = i as u64 * 8;
        st.b = amplitude * envelope * rng::unit_disk(seed, ctr);
        for j in 0..3 {
            st.u[j] = amplitude * envelope * rng::unit_disk(seed, ctr + 2 * (j as u64 + 1));
        }
    }
    Ok(())
}

/// Closed-form norms of the physical profile A exp(-y^2 / (2 sigma^2)).
#[derive(Debug, Clone, Copy)]
pub struct GaussianNorms {
    /// L1(R) of the profile.
    pub l1: f64,
    /// L2(R) of the profile.
    pub l2_physical: f64,
    /// sqrt(int |fhat|^2 d eta); L2(R) = sqrt(2 pi) times this.
    pub l2_modesum: f64,
}

pub fn gaussian_norms(amplitude: f64, sigma: f64) -> GaussianNorms {
    let a = amplitude.abs();
    let l1 = a * sigma * (2.0 * std::f64::consts::PI).sqrt();
    let l2_physical = a * (sigma * std::f64::consts::PI.sqrt()).sqrt();
    GaussianNorms {
        l1,
        l2_physical,
        l2_modesum: l2_physical / (2.0 * std::f64::consts::PI).sqrt(),
    }
}

/// Amplitude of the mode transform of A exp(-y^2/(2 sigma^2)) at frequency eta.
pub fn gaussian_mode_amplitude(amplitude: f64, sigma: f64, eta: f64) -> f64 {
    amplitude * sigma / (2.0 * std::f64::consts::PI).sqrt()
        * (-0.5 * sigma * sigma * eta * eta).exp()
}

fn gaussian_00(ens: &mut FieldEnsemble, spec: &InitialDataConfig) -> Result<()> {
    let kind = "gaussian-00";
    let sigma = spec.sigma.ok_or_else(|| missing(kind, "sigma"))?;
    if !(sigma > 0.0) {
        return Err(Error::Config("sigma must be positive".into()));
    }
    let ab = spec.amplitude_b.unwrap_or(0.0);
    let a2 = spec.amplitude_u2.unwrap_or(0.0);
    let a3 = spec.amplitude_u3.unwrap_or(0.0);
    for (mode, st) in ens.modes.iter().zip(ens.states.iter_mut()) {
        if mode.k != 0 || mode.l != 0 {
            continue;
        }
        st.b = Complex64::new(gaussian_mode_amplitude(ab, sigma, mode.eta), 0.0);
        st.u[1] = Complex64::new(gaussian_mode_amplitude(a2, sigma, mode.eta), 0.0);
        st.u[2] = Complex64::new(gaussian_mode_amplitude(a3, sigma, mode.eta), 0.0);
    }
    Ok(())
}

fn gradient_field(ens: &mut FieldEnsemble, spec: &InitialDataConfig, seed: u64) -> Result<()> {
    let kind = "gradient-field";
    let amplitude = spec.amplitude.ok_or_else(|| missing(kind, "amplitude"))?;
    let width = spec.eta_width.ok_or_else(|| missing(kind, "eta_width"))?;
    for (i, (mode, st)) in ens.modes.iter().zip(ens.states.iter_mut()).enumerate() {
        if mode.k == 0 {
            continue;
        }
        let envelope = (-mode.eta * mode.eta / (2.0 * width * width)).exp();
        let ctr = i as u64 * 8;
        let scalar = amplitude * envelope * rng::unit_disk(seed, ctr);
        let iota0 = crate::symbols::symbol_values(0.0, mode).iota;
        for (uj, iota_j) in st.u.iter_mut().zip(&iota0) {
            *uj = iota_j * scalar;
        }
        st.b = amplitude * envelope * rng::unit_disk(seed, ctr + 6);
    }
    Ok(())
}

fn custom_list(ens: &mut FieldEnsemble, spec: &InitialDataConfig) -> Result<()> {
    let entries = spec
        .entries
        .as_ref()
        .ok_or_else(|| missing("custom-list", "entries"))?;
    for e in entries {
        let idx = ens.index_of(e.k, e.eta, e.l).ok_or_else(|| {
            Error::Config(format!("mode ({}, {}, {}) not on the grid", e.k, e.eta, e.l))
        })?;
        ens.states[idx].b = cpx(e.b);
        ens.states[idx].u = [cpx(e.u1), cpx(e.u2), cpx(e.u3)];
    }
    Ok(())
}

/// Enforces state(-k, -eta, -l) = conj(state(k, eta, l)) so the physical field
/// is real. Representative modes are those with (k, l, eta) lexicographically
/// positive; the central mode is forced real.
fn symmetrize(ens: &mut FieldEnsemble) {
    let n = ens.modes.len();
    for i in 0..n {
        let m = ens.modes[i];
        let positive =
            m.k > 0 || (m.k == 0 && (m.l > 0 || (m.l == 0 && m.eta > 0.0)));
        if positive {
            if let Some(j) = ens.index_of(-m.k, -m.eta, -m.l) {
                let src = ens.states[i];
                ens.states[j].b = src.b.conj();
                for c in 0..3 {
                    ens.states[j].u[c] = src.u[c].conj();
                }
            }
        } else if m.k == 0 && m.l == 0 && m.eta == 0.0 {
            ens.states[i].b = Complex64::new(ens.states[i].b.re, 0.0);
            for c in 0..3 {
                ens.states[i].u[c] = Complex64::new(ens.states[i].u[c].re, 0.0);
            }
        }
    }
}

/// L1(R) norms of the k = l = 0 projections of (b, u2), by dense quadrature of
/// the reconstructed y-profiles over one periodization window of the eta grid.
pub fn l1_norms_00(ens: &FieldEnsemble) -> (f64, f64) {
    let d_eta = ens.grid.delta_eta;
    let half_period = std::f64::consts::PI / d_eta;
    let dy = std::f64::consts::PI / (8.0 * ens.grid.eta_max);
    let n_y = (2.0 * half_period / dy).ceil() as usize;
    let modes00: Vec<(f64, Complex64, Complex64)> = ens
        .modes
        .iter()
        .zip(&ens.states)
        .filter(|(m, _)| m.k == 0 && m.l == 0)
        .map(|(m, s)| (m.eta, s.b * m.weight, s.u[1] * m.weight))
        .collect();
    let mut l1_b = 0.0;
    let mut l1_u2 = 0.0;
    for j in 0..=n_y {
        let y = -half_period + 2.0 * half_period * j as f64 / n_y as f64;
        let mut fb = Complex64::new(0.0, 0.0);
        let mut fu = Complex64::new(0.0, 0.0);
        for &(eta, b, u2) in &modes00 {
            let phase = Complex64::from_polar(1.0, eta * y);
            fb += b * phase;
            fu += u2 * phase;
        }
        let w = if j == 0 || j == n_y { 0.5 } else { 1.0 };
        l1_b += w * fb.norm() * (2.0 * half_period / n_y as f64);
        l1_u2 += w * fu.norm() * (2.0 * half_period / n_y as f64);
    }
    (l1_b, l1_u2)
}
