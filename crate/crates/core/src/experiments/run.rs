//! Run orchestration: integrate, reduce, persist, audit.
//!
//! A run directory holds `config.toml`, `energies.csv`, optionally
//! `trajectory.csv`, per-preset audit JSONs and a `manifest.json` with content
//! hashes of every CSV. CSVs are written from deterministic reductions, so a
//! rerun with the same config and seed is byte-identical.

use super::config::ExperimentConfig;
use super::initial_data::build_initial_data;
use crate::dynamics::primitive::{integrate_ensemble, EnsembleTrajectory};
use crate::error::{Error, Result};
use crate::functionals::{energy_report, EnergyReport, FieldEnsemble, TheoremNorms};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Environment variable that, when set, prefixes every output directory.
pub const OUTPUT_ROOT_ENV: &str = "COUETTE_OUTPUT_ROOT";

/// Resolves the effective output directory for a run.
pub fn resolve_output_dir(requested: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if requested.is_relative() => PathBuf::from(root).join(requested),
        _ => requested.to_path_buf(),
    }
}

/// One audit verdict, serialized into `audits.json`.
#[derive(Debug, Clone, Serialize)]
pub struct AuditRecord {
    pub claim: String,
    pub fitted: f64,
    pub required: f64,
    pub r2: f64,
    pub window: (f64, f64),
    pub pass: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl AuditRecord {
    pub fn new(claim: &str, fitted: f64, required: f64, pass: bool) -> Self {
        Self {
            claim: claim.to_string(),
            fitted,
            required,
            r2: f64::NAN,
            window: (0.0, 0.0),
            pass,
            extra: BTreeMap::new(),
        }
    }

    pub fn from_claim(report: &crate::diagnostics::ClaimReport) -> Self {
        Self {
            claim: report.claim.clone(),
            fitted: report.fitted,
            required: report.required,
            r2: report.r2,
            window: report.window,
            pass: report.pass,
            extra: BTreeMap::new(),
        }
    }
}

/// In-memory products of a dynamics run, kept for audits.
pub struct RunOutput {
    pub dir: PathBuf,
    pub config: ExperimentConfig,
    pub ensemble0: FieldEnsemble,
    pub trajectory: EnsembleTrajectory,
    pub energy: Vec<EnergyReport>,
    pub wall_times: BTreeMap<String, f64>,
}

fn fmt_f(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Integrates the configured ensemble and writes the CSV products.
pub fn run_dynamics(config: &ExperimentConfig, dir: &Path) -> Result<RunOutput> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut wall_times = BTreeMap::new();

    let ensemble0 = build_initial_data(config)?;
    let tg = config.time_grid()?;
    let t_int = Instant::now();
    let trajectory = integrate_ensemble(
        &ensemble0.modes,
        &ensemble0.states,
        &tg,
        &config.phys,
        config.tol,
    )?;
    wall_times.insert("integrate_s".into(), t_int.elapsed().as_secs_f64());

    let t_red = Instant::now();
    let mp = config.multiplier_params();
    let mut energy = Vec::with_capacity(trajectory.times.len());
    for (i, &t) in trajectory.times.iter().enumerate() {
        let ens = FieldEnsemble {
            grid: ensemble0.grid,
            modes: ensemble0.modes.clone(),
            states: trajectory.states[i].clone(),
        };
        energy.push(energy_report(&ens, t, &config.phys, &mp));
    }
    wall_times.insert("reduce_s".into(), t_red.elapsed().as_secs_f64());

    write_file(&dir.join("config.toml"), &config.to_toml())?;
    write_file(&dir.join("energies.csv"), &energies_csv(&energy))?;
    if config.write_trajectory {
        write_file(
            &dir.join("trajectory.csv"),
            &trajectory_csv(&ensemble0, &trajectory),
        )?;
    }

    Ok(RunOutput {
        dir: dir.to_path_buf(),
        config: config.clone(),
        ensemble0,
        trajectory,
        energy,
        wall_times,
    })
}

pub fn energies_csv(energy: &[EnergyReport]) -> String {
    let mut out = String::new();
    out.push_str("t,e1,cal_e1,e2,cal_e2,combined,combined_plain");
    for name in TheoremNorms::NAMES {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for r in energy {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f(r.t),
            fmt_f(r.e1),
            fmt_f(r.cal_e1),
            fmt_f(r.e2),
            fmt_f(r.cal_e2),
            fmt_f(r.combined),
            fmt_f(r.combined_plain)
        );
        for v in r.norms.values() {
            let _ = write!(out, ",{}", fmt_f(v));
        }
        out.push('\n');
    }
    out
}

pub fn trajectory_csv(ens0: &FieldEnsemble, tr: &EnsembleTrajectory) -> String {
    let mut out =
        String::from("t,k,eta,l,re_b,im_b,re_u1,im_u1,re_u2,im_u2,re_u3,im_u3\n");
    for (i, &t) in tr.times.iter().enumerate() {
        for (mode, st) in ens0.modes.iter().zip(&tr.states[i]) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                fmt_f(t),
                mode.k,
                fmt_f(mode.eta),
                mode.l,
                fmt_f(st.b.re),
                fmt_f(st.b.im),
                fmt_f(st.u[0].re),
                fmt_f(st.u[0].im),
                fmt_f(st.u[1].re),
                fmt_f(st.u[1].im),
                fmt_f(st.u[2].re),
                fmt_f(st.u[2].im),
            );
        }
    }
    out
}

/// A parsed energies.csv: times plus named columns.
pub struct EnergySeries {
    pub columns: BTreeMap<String, Vec<f64>>,
    pub times: Vec<f64>,
}

impl EnergySeries {
    pub fn series(&self, column: &str) -> Result<Vec<(f64, f64)>> {
        let col = self
            .columns
            .get(column)
            .ok_or_else(|| Error::UnknownSelector(column.to_string()))?;
        Ok(self.times.iter().copied().zip(col.iter().copied()).collect())
    }
}

pub fn read_energies_csv(path: &Path) -> Result<EnergySeries> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_energies_csv(&text)
}

pub fn parse_energies_csv(text: &str) -> Result<EnergySeries> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty energies csv".into()))?;
    let names: Vec<&str> = header.split(',').collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for line in lines {
        if line.is_empty() {
            continue;
        }
        for (i, field) in line.split(',').enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Config(format!("bad float `{field}`")))?;
            columns[i].push(v);
        }
    }
    let times = columns[0].clone();
    let map = names
        .iter()
        .skip(1)
        .zip(columns.into_iter().skip(1))
        .map(|(n, c)| (n.to_string(), c))
        .collect();
    Ok(EnergySeries {
        columns: map,
        times,
    })
}

fn sha256_hex(data: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub version: &'a str,
    pub config: &'a ExperimentConfig,
    pub hashes: BTreeMap<String, String>,
    pub wall_times: &'a BTreeMap<String, f64>,
    pub pass_summary: BTreeMap<String, bool>,
}

/// Hashes every CSV in the run directory and writes `manifest.json`.
pub fn write_manifest(
    dir: &Path,
    config: &ExperimentConfig,
    wall_times: &BTreeMap<String, f64>,
    audits: &[AuditRecord],
) -> Result<()> {
    let mut hashes = BTreeMap::new();
    let entries =
        std::fs::read_dir(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    for entry in entries.flatten() {
        let path = entry.path();
        if path.extension().map(|e| e == "csv").unwrap_or(false) {
            let data =
                std::fs::read(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            hashes.insert(name, sha256_hex(&data));
        }
    }
    let pass_summary = audits
        .iter()
        .map(|a| (a.claim.clone(), a.pass))
        .collect();
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        config,
        hashes,
        wall_times,
        pass_summary,
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(e.to_string()))?;
    write_file(&dir.join("manifest.json"), &json)
}

pub fn write_audits(dir: &Path, audits: &[AuditRecord]) -> Result<()> {
    let json =
        serde_json::to_string_pretty(audits).map_err(|e| Error::Config(e.to_string()))?;
    write_file(&dir.join("audits.json"), &json)
}
