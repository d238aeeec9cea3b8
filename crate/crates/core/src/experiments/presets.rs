//! Preset experiments: canonical configurations bound to the claims they audit.

use super::config::{ExperimentConfig, InitialDataConfig, Spacing, TimeSpec};
use super::initial_data::l1_norms_00;
use super::run::{
    run_dynamics, write_audits, write_file, write_manifest, AuditRecord, RunOutput,
};
use crate::diagnostics::{
    dissipation_window, fit_exponential_rate, fit_power_law, liftup_bound_audit,
    power_law_window, theorem_rate_audit, ClaimId, LiftupData,
};
use crate::dynamics::derived::consistency_check;
use crate::dynamics::primitive::{duhamel_u1_zero, PrimitiveState, TimeGrid};
use crate::error::{Error, Result};
use crate::multipliers::{audit_samples, multiplier_inequality_audit, AuditRanges};
use crate::params::{PhysicalParams, Regime};
use crate::rng;
use crate::symbols::{Mode, ModeGrid};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

/// A preset name and the claims its audit bundle checks.
#[derive(Debug, Clone, Serialize)]
pub struct PresetInfo {
    pub name: &'static str,
    pub claims: &'static [&'static str],
}

/// The stable list of presets.
pub fn presets() -> Vec<PresetInfo> {
    vec![
        PresetInfo {
            name: "enhanced-dissipation",
            claims: &["T1.1-b", "T1.1-u1", "T1.1-u2", "T1.1-u3", "P4.1"],
        },
        PresetInfo {
            name: "second-derivative-dissipation",
            claims: &["T1.2-secder"],
        },
        PresetInfo {
            name: "zero-decay",
            claims: &["L3.2", "L3.3-k0", "L3.3-k1", "L3.3-u3"],
        },
        PresetInfo {
            name: "lift-up",
            claims: &["P3.4-exponent", "P3.4-bound", "P3.4-duhamel"],
        },
        PresetInfo {
            name: "oracle",
            claims: &["oracle-consistency", "oracle-divfree"],
        },
        PresetInfo {
            name: "multiplier-audit",
            claims: &["multiplier-inequalities", "claim-2.36"],
        },
        PresetInfo {
            name: "mu-sweep",
            claims: &["sweep-scaling"],
        },
    ]
}

fn unknown_preset(name: &str) -> Error {
    Error::UnknownPreset {
        name: name.to_string(),
        available: presets().iter().map(|p| p.name.to_string()).collect(),
    }
}

/// Canonical configuration of a preset, with an optional shear-viscosity
/// override (used by mu-sweep). Composite presets (zero-decay, oracle,
/// mu-sweep) are executed through [`execute_preset`] instead.
pub fn preset_config(name: &str, seed: u64, mu: Option<f64>) -> Result<ExperimentConfig> {
    match name {
        "enhanced-dissipation" | "second-derivative-dissipation" => {
            Ok(dissipation_config(name, seed, mu.unwrap_or(1e-3)))
        }
        "lift-up" => Ok(liftup_config(seed, mu.unwrap_or(1e-3))),
        "zero-decay" | "oracle" | "multiplier-audit" | "mu-sweep" => Err(Error::Config(format!(
            "preset `{name}` is composite; run it via execute_preset"
        ))),
        other => Err(unknown_preset(other)),
    }
}

fn dissipation_config(preset: &str, seed: u64, mu: f64) -> ExperimentConfig {
    ExperimentConfig {
        preset: preset.to_string(),
        seed,
        regime: Regime::NonzeroMode,
        tol: 1e-9,
        output_dir: None,
        write_trajectory: true,
        phys: PhysicalParams::new(mu, 0.0, 1.0),
        multiplier: None,
        grid: ModeGrid {
            k_max: 1,
            l_max: 0,
            eta_max: 1.0,
            delta_eta: 0.05,
        },
        time: TimeSpec {
            t_end: 3.0 / mu.cbrt(),
            n_outputs: 200,
            spacing: Spacing::Log,
        },
        initial_data: InitialDataConfig {
            kind: "random-band".into(),
            amplitude: Some(1.0),
            eta_width: Some(0.5),
            include_zero_k: Some(false),
            conjugate_symmetric: Some(false),
            ..Default::default()
        },
    }
}

fn zero_decay_lneq_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        preset: "zero-decay".into(),
        seed,
        regime: Regime::ZeroMode,
        tol: 1e-10,
        output_dir: None,
        write_trajectory: true,
        phys: PhysicalParams::new(0.05, 0.4, 1.0),
        multiplier: None,
        grid: ModeGrid {
            k_max: 0,
            l_max: 1,
            eta_max: 1.0,
            delta_eta: 1.0,
        },
        time: TimeSpec {
            t_end: 100.0,
            n_outputs: 200,
            spacing: Spacing::Log,
        },
        initial_data: InitialDataConfig {
            kind: "single-mode".into(),
            k: Some(0),
            eta: Some(1.0),
            l: Some(1),
            b: Some([1.0, 0.0]),
            u2: Some([1.0, 0.0]),
            u3: Some([-1.0, 0.0]),
            ..Default::default()
        },
    }
}

fn zero_decay_heat00_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        preset: "zero-decay".into(),
        seed,
        regime: Regime::ZeroMode,
        tol: 1e-9,
        output_dir: None,
        write_trajectory: false,
        phys: PhysicalParams::new(0.05, 0.4, 1.0),
        multiplier: None,
        grid: ModeGrid {
            k_max: 0,
            l_max: 0,
            eta_max: 2.5,
            delta_eta: 0.0125,
        },
        time: TimeSpec {
            t_end: 1280.0,
            n_outputs: 200,
            spacing: Spacing::Log,
        },
        initial_data: InitialDataConfig {
            kind: "gaussian-00".into(),
            amplitude_b: Some(1.0),
            amplitude_u2: Some(0.7),
            amplitude_u3: Some(1.0),
            sigma: Some(0.8),
            ..Default::default()
        },
    }
}

fn liftup_config(seed: u64, mu: f64) -> ExperimentConfig {
    ExperimentConfig {
        preset: "lift-up".into(),
        seed,
        regime: Regime::ZeroMode,
        tol: 1e-10,
        output_dir: None,
        write_trajectory: true,
        phys: PhysicalParams::new(mu, 0.0, 2.0),
        multiplier: None,
        grid: ModeGrid {
            k_max: 0,
            l_max: 0,
            eta_max: 0.6,
            delta_eta: 0.005,
        },
        time: TimeSpec {
            t_end: 0.1 / mu,
            n_outputs: 801,
            spacing: Spacing::Linear,
        },
        initial_data: InitialDataConfig {
            kind: "gaussian-00".into(),
            amplitude_u2: Some(1.0),
            sigma: Some(11.0),
            ..Default::default()
        },
    }
}

/// Outcome of a preset execution: audit records plus the run directory.
#[derive(Debug)]
pub struct PresetReport {
    pub dir: std::path::PathBuf,
    pub audits: Vec<AuditRecord>,
    pub pass: bool,
}

impl PresetReport {
    fn from_audits(dir: &Path, audits: Vec<AuditRecord>) -> Self {
        let pass = audits.iter().all(|a| a.pass);
        Self {
            dir: dir.to_path_buf(),
            audits,
            pass,
        }
    }
}

/// Runs a preset end to end into `out_dir`.
pub fn execute_preset(
    name: &str,
    seed: u64,
    mu: Option<f64>,
    out_dir: &Path,
) -> Result<PresetReport> {
    match name {
        "enhanced-dissipation" | "second-derivative-dissipation" | "lift-up" => {
            let config = preset_config(name, seed, mu)?;
            run_configured(&config, out_dir)
        }
        "zero-decay" => {
            let mut audits = Vec::new();
            let lneq = run_configured(&zero_decay_lneq_config(seed), &out_dir.join("lneq"))?;
            audits.extend(lneq.audits);
            let heat = run_configured(&zero_decay_heat00_config(seed), &out_dir.join("heat00"))?;
            audits.extend(heat.audits);
            write_audits(out_dir, &audits)?;
            Ok(PresetReport::from_audits(out_dir, audits))
        }
        "oracle" => run_oracle(seed, out_dir),
        "multiplier-audit" => run_multiplier_audit(seed, out_dir),
        "mu-sweep" => execute_mu_sweep("enhanced-dissipation", &[1e-2, 1e-3, 1e-4], seed, out_dir),
        other => Err(unknown_preset(other)),
    }
}

/// Runs a fully specified config and attaches the audit bundle of its preset.
pub fn run_configured(config: &ExperimentConfig, dir: &Path) -> Result<PresetReport> {
    let t0 = Instant::now();
    let out = run_dynamics(config, dir)?;
    let audits = match config.preset.as_str() {
        "enhanced-dissipation" => audit_enhanced_dissipation(&out)?,
        "second-derivative-dissipation" => audit_secder(&out)?,
        "zero-decay" => audit_zero_decay(&out)?,
        "lift-up" => audit_liftup(&out)?,
        other => return Err(unknown_preset(other)),
    };
    let mut wall = out.wall_times.clone();
    wall.insert("total_s".into(), t0.elapsed().as_secs_f64());
    write_audits(dir, &audits)?;
    write_manifest(dir, config, &wall, &audits)?;
    Ok(PresetReport::from_audits(dir, audits))
}

fn column_series(out: &RunOutput, column: &str) -> Result<Vec<(f64, f64)>> {
    let mut s = Vec::with_capacity(out.energy.len());
    for r in &out.energy {
        let v = match column {
            "e1" => r.e1,
            "cal_e1" => r.cal_e1,
            "e2" => r.e2,
            "cal_e2" => r.cal_e2,
            "combined" => r.combined,
            other => r
                .norms
                .get(other)
                .ok_or_else(|| Error::UnknownSelector(other.to_string()))?,
        };
        s.push((r.t, v));
    }
    Ok(s)
}

fn audit_enhanced_dissipation(out: &RunOutput) -> Result<Vec<AuditRecord>> {
    let window = dissipation_window(&out.config.phys, out.config.time.t_end);
    let mut audits = Vec::new();
    for claim in [
        ClaimId::T11B,
        ClaimId::T11U1,
        ClaimId::T11U2,
        ClaimId::T11U3,
        ClaimId::P41,
    ] {
        let series = column_series(out, claim.column())?;
        let report = theorem_rate_audit(claim, &series, window, &out.config.phys)?;
        audits.push(AuditRecord::from_claim(&report));
    }
    Ok(audits)
}

fn audit_secder(out: &RunOutput) -> Result<Vec<AuditRecord>> {
    let window = dissipation_window(&out.config.phys, out.config.time.t_end);
    let series = column_series(out, "secder")?;
    let fit = fit_exponential_rate(&series, window)?;
    let required = out.config.phys.mu.cbrt() / 22.0;
    let pass = fit.r_squared >= 0.95 && fit.rate_or_exponent >= 0.95 * required;
    let mut rec = AuditRecord::new("T1.2-secder", fit.rate_or_exponent, required, pass);
    rec.r2 = fit.r_squared;
    rec.window = window;
    Ok(vec![rec])
}

fn audit_zero_decay(out: &RunOutput) -> Result<Vec<AuditRecord>> {
    let phys = &out.config.phys;
    let t_end = out.config.time.t_end;
    let mut audits = Vec::new();
    match out.config.initial_data.kind.as_str() {
        "single-mode" => {
            let window = (0.3 * t_end, t_end);
            let series = column_series(out, ClaimId::L32.column())?;
            let report = theorem_rate_audit(ClaimId::L32, &series, window, phys)?;
            audits.push(AuditRecord::from_claim(&report));
        }
        _ => {
            let d_eta = out.config.grid.delta_eta;
            let window = power_law_window(t_end / 25.0, phys.lam2mu(), d_eta, t_end);
            for claim in [ClaimId::L33K0, ClaimId::L33K1] {
                let series = column_series(out, claim.column())?;
                let report = theorem_rate_audit(claim, &series, window, phys)?;
                audits.push(AuditRecord::from_claim(&report));
            }
            // u3_00 rides the plain heat flow at coefficient mu.
            let window = power_law_window(t_end / 25.0, phys.mu, d_eta, t_end);
            let series = column_series(out, "u3_00")?;
            let fit = fit_power_law(&series, window)?;
            let required = -0.25;
            let pass = fit.r_squared >= 0.95
                && (fit.rate_or_exponent - required).abs() <= 0.05 * required.abs() + 0.03;
            let mut rec = AuditRecord::new("L3.3-u3", fit.rate_or_exponent, required, pass);
            rec.r2 = fit.r_squared;
            rec.window = window;
            audits.push(rec);
        }
    }
    Ok(audits)
}

fn audit_liftup(out: &RunOutput) -> Result<Vec<AuditRecord>> {
    let phys = &out.config.phys;
    let window = (10.0, 0.1 / phys.mu);
    let u1_series = column_series(out, "u1_0")?;
    let fit = fit_power_law(&u1_series, window)?;
    let pass_exp = fit.r_squared >= 0.95 && (fit.rate_or_exponent - 0.75).abs() <= 0.1;
    let mut exp_rec = AuditRecord::new("P3.4-exponent", fit.rate_or_exponent, 0.75, pass_exp);
    exp_rec.r2 = fit.r_squared;
    exp_rec.window = window;

    // Bound audit with a calibrated constant.
    let grad_sq: Vec<(f64, f64)> = column_series(out, "grad_u1_0")?
        .into_iter()
        .map(|(t, v)| (t, v * v))
        .collect();
    let first = &out.energy[0];
    let (l1_b, l1_u2) = l1_norms_00(&out.ensemble0);
    let l1 = l1_b / phys.eps + l1_u2;
    let data = LiftupData {
        u1_in: first.norms.u1_0,
        lneq_in: first.norms.zero_b_u_lneq,
        data_00: first.norms.b00_u2.max(l1),
    };
    let bound = liftup_bound_audit(&u1_series, &grad_sq, &data, phys)?;
    let mut bound_rec = AuditRecord::new(
        "P3.4-bound",
        bound.calibrated_c,
        f64::INFINITY,
        bound.pass,
    );
    bound_rec.extra.insert("data_00".into(), data.data_00);
    bound_rec.extra.insert("u1_in".into(), data.u1_in);

    // Duhamel cross-check against the integrated u1 on every zero mode.
    let spacing = out.config.time.spacing;
    if spacing != Spacing::Linear {
        return Err(Error::Audit("lift-up preset needs linear outputs".into()));
    }
    let times = &out.trajectory.times;
    let dt = times[1] - times[0];
    let mut max_rel: f64 = 0.0;
    for (m_idx, mode) in out.ensemble0.modes.iter().enumerate() {
        let u2: Vec<Complex64> = out
            .trajectory
            .states
            .iter()
            .map(|st| st[m_idx].u[1])
            .collect();
        let duh = duhamel_u1_zero(mode, out.ensemble0.states[m_idx].u[0], &u2, dt, phys.mu)?;
        let scale = out
            .trajectory
            .states
            .iter()
            .map(|st| st[m_idx].u[0].norm())
            .fold(0.0f64, f64::max);
        if scale < 1e-14 {
            continue;
        }
        for (j, v) in duh.iter().enumerate() {
            let rel = (v - out.trajectory.states[j][m_idx].u[0]).norm() / scale;
            max_rel = max_rel.max(rel);
        }
    }
    let duh_rec = AuditRecord::new("P3.4-duhamel", max_rel, 1e-6, max_rel <= 1e-6);

    Ok(vec![exp_rec, bound_rec, duh_rec])
}

/// The reformulation oracle: consistency of the primitive and derived systems
/// on seeded random (mode, state) pairs for mu in {1e-2, 1e-3}.
pub fn run_oracle(seed: u64, out_dir: &Path) -> Result<PresetReport> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let tol = 1e-10;
    let mu_list = [1e-2, 1e-3];
    let cases: Vec<(f64, Mode, PrimitiveState)> = (0..100u64)
        .map(|i| {
            let mu = mu_list[(i % 2) as usize];
            let c = i * 16;
            let k = rng::range_i64(seed, c, 1, 2)
                * if rng::split_mix(seed, c + 1) & 1 == 0 { 1 } else { -1 };
            let l = rng::range_i64(seed, c + 2, -2, 2);
            let eta = rng::range_f64(seed, c + 3, -2.0, 2.0);
            let st = PrimitiveState::new(
                rng::unit_disk(seed, c + 4),
                [
                    rng::unit_disk(seed, c + 6),
                    rng::unit_disk(seed, c + 8),
                    rng::unit_disk(seed, c + 10),
                ],
            );
            (mu, Mode::new(k, eta, l, 1.0), st)
        })
        .collect();
    let results: Vec<Result<(f64, f64)>> = cases
        .par_iter()
        .map(|(mu, mode, st)| {
            let phys = PhysicalParams::new(*mu, 0.0, 1.0);
            let t_end = 2.0 / mu.cbrt();
            let tg = TimeGrid::linear(t_end, 17)?;
            let r = consistency_check(mode, st, &tg, &phys, tol)?;
            Ok((r.max_residual, r.max_divfree_residual))
        })
        .collect();

    let mut csv = String::from("k,eta,l,mu,residual,divfree_residual\n");
    let mut residuals = Vec::new();
    let mut divfrees = Vec::new();
    for ((mu, mode, _), res) in cases.iter().zip(results) {
        let (r, d) = res?;
        let _ = writeln!(
            csv,
            "{},{:e},{},{mu:e},{r:e},{d:e}",
            mode.k, mode.eta, mode.l
        );
        residuals.push(r);
        divfrees.push(d);
    }
    write_file(&out_dir.join("consistency.csv"), &csv)?;

    let max_res = residuals.iter().cloned().fold(0.0f64, f64::max);
    let max_div = divfrees.iter().cloned().fold(0.0f64, f64::max);
    let mut sorted = residuals.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let summary = serde_json::json!({
        "cases": residuals.len(),
        "max_residual": max_res,
        "median_residual": median,
        "max_divfree_residual": max_div,
    });
    write_file(
        &out_dir.join("consistency.json"),
        &serde_json::to_string_pretty(&summary).unwrap(),
    )?;

    let audits = vec![
        AuditRecord::new("oracle-consistency", max_res, 1e-6, max_res <= 1e-6),
        AuditRecord::new("oracle-divfree", max_div, 1e-10, max_div <= 1e-10),
    ];
    write_audits(out_dir, &audits)?;
    Ok(PresetReport::from_audits(out_dir, audits))
}

/// The multiplier inequality sweep; no dynamics involved.
pub fn run_multiplier_audit(seed: u64, out_dir: &Path) -> Result<PresetReport> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let mu_list = [1e-2, 1e-3, 1e-4];
    let n_growth = 9.0;
    let ranges = AuditRanges::default();
    let samples = 120_000;
    let report = multiplier_inequality_audit(samples, &mu_list, n_growth, seed, &ranges);

    let rows = audit_samples(samples.min(20_000), &mu_list, n_growth, seed, &ranges);
    let mut csv = String::from("t,k,eta,l,mu,m,m1,m2,m3,margin_233\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{:e},{},{:e},{},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.t, r.k, r.eta, r.l, r.mu, r.m, r.m1, r.m2, r.m3, r.margin_233
        );
    }
    write_file(&out_dir.join("multiplier_audit.csv"), &csv)?;
    let summary = serde_json::json!({
        "samples": report.samples,
        "violations": report.violations,
        "min_margin": report.min_margin_233,
        "empirical_m_constant": report.empirical_m_constant,
        "first_failures": report.first_failures,
    });
    write_file(
        &out_dir.join("multiplier_audit.json"),
        &serde_json::to_string_pretty(&summary).unwrap(),
    )?;

    let audits = vec![
        AuditRecord::new(
            "multiplier-inequalities",
            report.violations as f64,
            0.0,
            report.ok(),
        ),
        AuditRecord::new(
            "claim-2.36",
            report.min_margin_233,
            0.0,
            report.min_margin_233 >= 0.0,
        ),
    ];
    write_audits(out_dir, &audits)?;
    Ok(PresetReport::from_audits(out_dir, audits))
}

/// Wraps a preset over a list of shear viscosities and fits the scaling of the
/// leading fitted rate against mu.
pub fn execute_mu_sweep(
    wrapped: &str,
    mu_list: &[f64],
    seed: u64,
    out_dir: &Path,
) -> Result<PresetReport> {
    if mu_list.len() < 2 {
        return Err(Error::Config("mu-sweep needs at least two mu values".into()));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let mut audits = Vec::new();
    let mut rates = Vec::new();
    for &mu in mu_list {
        let sub = out_dir.join(format!("mu-{mu:e}"));
        let report = match wrapped {
            "enhanced-dissipation" | "second-derivative-dissipation" | "lift-up" => {
                let config = preset_config(wrapped, seed, Some(mu))?;
                run_configured(&config, &sub)?
            }
            other => return Err(unknown_preset(other)),
        };
        let leading = report
            .audits
            .first()
            .ok_or_else(|| Error::Audit("wrapped preset produced no audits".into()))?;
        rates.push((mu, leading.fitted));
        audits.extend(report.audits);
    }
    // log-log slope of rate against mu.
    let xs: Vec<f64> = rates.iter().map(|(mu, _)| mu.ln()).collect();
    let ys: Vec<f64> = rates.iter().map(|(_, r)| r.ln()).collect();
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let slope = sxy / sxx;
    let pass = (slope - 1.0 / 3.0).abs() <= 0.1;
    let mut rec = AuditRecord::new("sweep-scaling", slope, 1.0 / 3.0, pass);
    for (mu, r) in &rates {
        rec.extra.insert(format!("rate_mu_{mu:e}"), *r);
    }
    audits.push(rec);

    let mut sweep: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    sweep.insert("wrapped".into(), serde_json::json!(wrapped));
    sweep.insert("slope".into(), serde_json::json!(slope));
    sweep.insert("pass".into(), serde_json::json!(pass));
    sweep.insert(
        "rates".into(),
        serde_json::json!(rates
            .iter()
            .map(|(mu, r)| serde_json::json!({"mu": mu, "rate": r}))
            .collect::<Vec<_>>()),
    );
    write_file(
        &out_dir.join("sweep.json"),
        &serde_json::to_string_pretty(&sweep).unwrap(),
    )?;
    write_audits(out_dir, &audits)?;
    Ok(PresetReport::from_audits(out_dir, audits))
}

/// Re-audits a saved run directory for one claim; pure function of the CSVs.
pub fn audit_saved_run(run_dir: &Path, claim_name: &str) -> Result<AuditRecord> {
    let claim = ClaimId::parse(claim_name)?;
    let config = ExperimentConfig::load(&run_dir.join("config.toml"))?;
    let series = super::run::read_energies_csv(&run_dir.join("energies.csv"))?;
    let data = series.series(claim.column())?;
    let t_end = config.time.t_end;
    let window = match claim {
        ClaimId::L32 => (0.3 * t_end, t_end),
        ClaimId::L33K0 | ClaimId::L33K1 => power_law_window(
            t_end / 25.0,
            config.phys.lam2mu(),
            config.grid.delta_eta,
            t_end,
        ),
        _ => dissipation_window(&config.phys, t_end),
    };
    let report = theorem_rate_audit(claim, &data, window, &config.phys)?;
    Ok(AuditRecord::from_claim(&report))
}
