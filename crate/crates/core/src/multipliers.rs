//! Time-dependent Fourier multipliers m, m1, m2, m3 and the composite weights.
//!
//! `m` freezes the transient stretching of the moving frame: it grows exactly
//! like p(t)/p(t_start) on the stretching interval around the critical time
//! t = eta/k and is constant elsewhere. `m1` and `m3` absorb the coupling
//! between the velocity divergence and the incompressible part, `m2` the
//! slow-down of dissipation near the critical time. All four are evaluated in
//! closed form, so no state is carried between calls.

use crate::params::{MultiplierParams, PhysicalParams};
use crate::rng;
use crate::symbols::{symbol_values, Mode};
use serde::Serialize;

/// All multiplier and weight values at one (t, mode).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierWeights {
    pub m: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    /// d/dt log m; nonzero only on the stretching intervals.
    pub dlog_m: f64,
    pub dlog_m1: f64,
    pub dlog_m2: f64,
    pub dlog_m3: f64,
    /// M = <k,eta,l>^s m^{-3/4} (m1 m2 m3)^{-1}, zero at k = 0.
    pub big_m: f64,
    /// Same as `big_m` with m^{-1} instead of m^{-3/4}.
    pub big_m1: f64,
    /// h = sqrt(c) M.
    pub h: f64,
    /// g = sqrt(dlog_m)/2 * M.
    pub g: f64,
}

/// Width of the stretching interval: 64 mu^{-1/3}.
fn stretch_span(mu: f64) -> f64 {
    64.0 / mu.cbrt()
}

/// The multiplier m and d/dt log m.
///
/// Piecewise in (sign of eta/k, position of t relative to the critical time);
/// at exact case boundaries the earlier case's formula applies, which is
/// observationally irrelevant because m is continuous there.
pub fn m_value(t: f64, mode: &Mode, mu: f64) -> (f64, f64) {
    if mode.k == 0 {
        return (1.0, 0.0);
    }
    let kf = mode.k as f64;
    let lf = mode.l as f64;
    let ratio = mode.eta / kf;
    let span = stretch_span(mu);
    let k2l2 = kf * kf + lf * lf;
    let frozen = kf * kf + (span * kf) * (span * kf) + lf * lf;
    if ratio <= -span {
        (1.0, 0.0)
    } else if ratio <= 0.0 {
        // Stretching starts immediately at t = 0.
        let p0 = kf * kf + mode.eta * mode.eta + lf * lf;
        if t <= ratio + span {
            let s = symbol_values(t, mode);
            (s.p / p0, s.p_prime / s.p)
        } else {
            (frozen / p0, 0.0)
        }
    } else if t < ratio {
        // Before the critical time the frame contracts; no weight needed.
        (1.0, 0.0)
    } else if t <= ratio + span {
        let s = symbol_values(t, mode);
        (s.p / k2l2, s.p_prime / s.p)
    } else {
        (frozen / k2l2, 0.0)
    }
}

/// Closed-form m1, m2, m3 and their logarithmic derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct M123 {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub dlog_m1: f64,
    pub dlog_m2: f64,
    pub dlog_m3: f64,
}

/// Integrates the defining ODEs of m1, m2, m3 exactly.
///
/// With a = sqrt(k^2 + l^2):
///   log m1 = N (k/a) (atan(eta/a) - atan((eta - k t)/a)),
///   log m2 = atan(mu^{1/3} (t - eta/k)) + atan(mu^{1/3} eta/k),
///   log m3 = log m1 with N k^2 replaced by N <kl>, <kl> = sqrt(1 + (kl)^2).
/// All three are 1 with zero derivative at k = 0.
pub fn m123_values(t: f64, mode: &Mode, mu: f64, n_growth: f64) -> M123 {
    if mode.k == 0 {
        return M123 {
            m1: 1.0,
            m2: 1.0,
            m3: 1.0,
            dlog_m1: 0.0,
            dlog_m2: 0.0,
            dlog_m3: 0.0,
        };
    }
    let kf = mode.k as f64;
    let lf = mode.l as f64;
    let a = (kf * kf + lf * lf).sqrt();
    let kl_bracket = (1.0 + (kf * lf) * (kf * lf)).sqrt();
    let s = symbol_values(t, mode);
    let arc = (mode.eta / a).atan() - ((mode.eta - kf * t) / a).atan();
    let m1 = (n_growth * (kf / a) * arc).exp();
    let m3 = (n_growth * kl_bracket / (kf * a) * arc).exp();
    let m3rd = mu.cbrt();
    let shift = t - mode.eta / kf;
    let m2 = ((m3rd * shift).atan() + (m3rd * mode.eta / kf).atan()).exp();
    M123 {
        m1,
        m2,
        m3,
        dlog_m1: n_growth * kf * kf / s.p,
        dlog_m2: m3rd / (1.0 + (m3rd * shift) * (m3rd * shift)),
        dlog_m3: n_growth * kl_bracket / s.p,
    }
}

/// Composes the multipliers into the energy weights M, M1, h, g.
pub fn weights(t: f64, mode: &Mode, phys: &PhysicalParams, mp: &MultiplierParams) -> MultiplierWeights {
    let (m, dlog_m) = m_value(t, mode, phys.mu);
    let m123 = m123_values(t, mode, phys.mu, mp.n_growth);
    let (big_m, big_m1, h, g) = if mode.k == 0 {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let kf = mode.k as f64;
        let lf = mode.l as f64;
        let sob = (1.0 + kf * kf + mode.eta * mode.eta + lf * lf).powf(mp.s / 2.0);
        let inv123 = 1.0 / (m123.m1 * m123.m2 * m123.m3);
        let big_m = sob * m.powf(-0.75) * inv123;
        let big_m1 = sob / m * inv123;
        (big_m, big_m1, mp.c.sqrt() * big_m, 0.5 * dlog_m.sqrt() * big_m)
    };
    MultiplierWeights {
        m,
        m1: m123.m1,
        m2: m123.m2,
        m3: m123.m3,
        dlog_m,
        dlog_m1: m123.dlog_m1,
        dlog_m2: m123.dlog_m2,
        dlog_m3: m123.dlog_m3,
        big_m,
        big_m1,
        h,
        g,
    }
}

/// Sampling box for the multiplier audits.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AuditRanges {
    pub t_max: f64,
    pub k_max: i64,
    pub l_max: i64,
    pub eta_max: f64,
}

impl Default for AuditRanges {
    fn default() -> Self {
        Self {
            t_max: 300.0,
            k_max: 8,
            l_max: 8,
            eta_max: 100.0,
        }
    }
}

fn sample_point(seed: u64, idx: u64, mu_list: &[f64], r: &AuditRanges) -> (f64, Mode, f64) {
    let c = idx * 8;
    let t = rng::range_f64(seed, c, 0.0, r.t_max);
    // k != 0 by construction.
    let k_abs = rng::range_i64(seed, c + 1, 1, r.k_max);
    let k = if rng::split_mix(seed, c + 2) & 1 == 0 { k_abs } else { -k_abs };
    let l = rng::range_i64(seed, c + 3, -r.l_max, r.l_max);
    let eta = rng::range_f64(seed, c + 4, -r.eta_max, r.eta_max);
    let mu = mu_list[(rng::split_mix(seed, c + 5) % mu_list.len() as u64) as usize];
    (t, Mode::new(k, eta, l, 1.0), mu)
}

/// One recorded violation or sample row.
#[derive(Debug, Clone, Serialize)]
pub struct AuditSample {
    pub t: f64,
    pub k: i64,
    pub eta: f64,
    pub l: i64,
    pub mu: f64,
    pub m: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub margin_233: f64,
}

/// Report of the dedicated dt(m2)/m2 + mu p >= mu^{1/3}/2 audit.
#[derive(Debug, Clone, Serialize)]
pub struct Claim233Report {
    pub samples: usize,
    pub violations: Vec<AuditSample>,
    pub min_margin: f64,
    /// (bin upper edge, count) over the normalized margin margin/mu^{1/3}.
    pub histogram: Vec<(f64, usize)>,
}

impl Claim233Report {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples (t, k != 0, eta, l, mu) and audits dt(m2)/m2 + mu p >= mu^{1/3}/2.
pub fn audit_claim_233(
    sample_count: usize,
    mu_list: &[f64],
    seed: u64,
    ranges: &AuditRanges,
) -> Claim233Report {
    let mut violations = Vec::new();
    let mut min_margin = f64::INFINITY;
    let n_bins = 20;
    let mut normalized = Vec::with_capacity(sample_count);
    for i in 0..sample_count {
        let (t, mode, mu) = sample_point(seed, i as u64, mu_list, ranges);
        let s = symbol_values(t, &mode);
        let m123 = m123_values(t, &mode, mu, 9.0);
        let margin = m123.dlog_m2 + mu * s.p - 0.5 * mu.cbrt();
        min_margin = min_margin.min(margin);
        normalized.push(margin / mu.cbrt());
        if margin < -1e-12 * mu.cbrt() {
            let (m, _) = m_value(t, &mode, mu);
            violations.push(AuditSample {
                t,
                k: mode.k,
                eta: mode.eta,
                l: mode.l,
                mu,
                m,
                m1: m123.m1,
                m2: m123.m2,
                m3: m123.m3,
                margin_233: margin,
            });
        }
    }
    let max_norm = normalized.iter().cloned().fold(f64::MIN, f64::max).max(1e-300);
    let mut histogram = vec![(0.0, 0usize); n_bins];
    for (b, slot) in histogram.iter_mut().enumerate() {
        slot.0 = max_norm * (b + 1) as f64 / n_bins as f64;
    }
    for &v in &normalized {
        let b = ((v / max_norm * n_bins as f64) as usize).min(n_bins - 1);
        histogram[b].1 += 1;
    }
    Claim233Report {
        samples: sample_count,
        violations,
        min_margin,
        histogram,
    }
}

/// Recomputes the sampled rows (same stream as the audits) for CSV export.
pub fn audit_samples(
    sample_count: usize,
    mu_list: &[f64],
    n_growth: f64,
    seed: u64,
    ranges: &AuditRanges,
) -> Vec<AuditSample> {
    (0..sample_count)
        .map(|i| {
            let (t, mode, mu) = sample_point(seed, i as u64, mu_list, ranges);
            let s = symbol_values(t, &mode);
            let (m, _) = m_value(t, &mode, mu);
            let m123 = m123_values(t, &mode, mu, n_growth);
            AuditSample {
                t,
                k: mode.k,
                eta: mode.eta,
                l: mode.l,
                mu,
                m,
                m1: m123.m1,
                m2: m123.m2,
                m3: m123.m3,
                margin_233: m123.dlog_m2 + mu * s.p - 0.5 * mu.cbrt(),
            }
        })
        .collect()
}

/// Summary of the full inequality sweep over all multiplier bounds.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityAuditReport {
    pub samples: usize,
    pub violations: usize,
    /// First few violation descriptions, for diagnosis.
    pub first_failures: Vec<String>,
    pub min_margin_233: f64,
    /// Empirical constant in m <~ mu^{-2/3}: max over samples of m * mu^{2/3}.
    pub empirical_m_constant: f64,
}

impl InequalityAuditReport {
    pub fn ok(&self) -> bool {
        self.violations == 0
    }
}

/// Sweeps every pointwise multiplier inequality on random (t, k != 0, eta, l, mu).
///
/// Checked with 1e-12 relative slack:
///   1 <= m <= p/(k^2+l^2), 1 <= m1,m3 <= e^{N pi}, 1 <= m2 <= e^{pi},
///   dt(m2)/m2 + mu p >= mu^{1/3}/2, 0 <= dt(m)/m <= |p'|/p <= 1,
///   and 1/p <= (1/N) dt(m1)/m1.
pub fn multiplier_inequality_audit(
    sample_count: usize,
    mu_list: &[f64],
    n_growth: f64,
    seed: u64,
    ranges: &AuditRanges,
) -> InequalityAuditReport {
    const SLACK: f64 = 1e-12;
    let cap13 = (n_growth * std::f64::consts::PI).exp();
    let cap2 = std::f64::consts::PI.exp();
    let mut violations = 0usize;
    let mut first_failures = Vec::new();
    let mut min_margin_233 = f64::INFINITY;
    let mut empirical_m_constant: f64 = 0.0;
    for i in 0..sample_count {
        let (t, mode, mu) = sample_point(seed, i as u64, mu_list, ranges);
        let s = symbol_values(t, &mode);
        let (m, dlog_m) = m_value(t, &mode, mu);
        let m123 = m123_values(t, &mode, mu, n_growth);
        empirical_m_constant = empirical_m_constant.max(m * mu.powf(2.0 / 3.0));
        let margin = m123.dlog_m2 + mu * s.p - 0.5 * mu.cbrt();
        min_margin_233 = min_margin_233.min(margin);
        let mut fail = |desc: String| {
            violations += 1;
            if first_failures.len() < 10 {
                first_failures.push(desc);
            }
        };
        let at = |what: &str| {
            format!(
                "{what} at (t={t}, k={}, eta={}, l={}, mu={mu})",
                mode.k, mode.eta, mode.l
            )
        };
        if m < 1.0 - SLACK {
            fail(at("m >= 1"));
        }
        if m > s.p / mode.kl_sq() * (1.0 + SLACK) {
            fail(at("m <= p/(k^2+l^2)"));
        }
        if m123.m1 < 1.0 - SLACK || m123.m1 > cap13 * (1.0 + SLACK) {
            fail(at("1 <= m1 <= e^{N pi}"));
        }
        if m123.m3 < 1.0 - SLACK || m123.m3 > cap13 * (1.0 + SLACK) {
            fail(at("1 <= m3 <= e^{N pi}"));
        }
        if m123.m2 < 1.0 - SLACK || m123.m2 > cap2 * (1.0 + SLACK) {
            fail(at("1 <= m2 <= e^{pi}"));
        }
        if margin < -SLACK * mu.cbrt() {
            fail(at("dt(m2)/m2 + mu p >= mu^{1/3}/2"));
        }
        let stretch = s.p_prime.abs() / s.p;
        if dlog_m < -SLACK || dlog_m > stretch + SLACK || stretch > 1.0 + SLACK {
            fail(at("0 <= dt(m)/m <= |p'|/p <= 1"));
        }
        if 1.0 / s.p > m123.dlog_m1 / n_growth * (1.0 + SLACK) {
            fail(at("1/p <= (1/N) dt(m1)/m1"));
        }
    }
    InequalityAuditReport {
        samples: sample_count,
        violations,
        first_failures,
        min_margin_233,
        empirical_m_constant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn m_is_one_at_zero_k() {
        let (m, d) = m_value(17.3, &Mode::new(0, -4.2, 3, 1.0), 1e-3);
        assert_eq!(m, 1.0);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn m_at_stretching_onset() {
        // k=1, eta=2, mu=1: entering the stretching interval at t = eta/k = 2.
        let (m, _) = m_value(2.0, &Mode::new(1, 2.0, 0, 1.0), 1.0);
        assert_relative_eq!(m, 1.0);
    }

    #[test]
    fn m_frozen_after_stretching() {
        // k=1, eta=2, mu=1: frozen value (1 + 64^2)/1 for t >= 66. At the
        // boundary t = 66 the stretching-case formula still applies (and
        // agrees); strictly past it the log-derivative drops to zero.
        for &t in &[66.0, 100.0, 1e4] {
            let (m, d) = m_value(t, &Mode::new(1, 2.0, 0, 1.0), 1.0);
            assert_relative_eq!(m, 4097.0);
            if t > 66.0 {
                assert_eq!(d, 0.0);
            }
        }
    }

    #[test]
    fn m123_start_at_one() {
        for &(k, eta, l) in &[(1, 0.5, 0), (-2, -3.0, 1), (3, 7.0, -2)] {
            let v = m123_values(0.0, &Mode::new(k, eta, l, 1.0), 1e-3, 9.0);
            assert_relative_eq!(v.m1, 1.0, max_relative = 1e-14);
            assert_relative_eq!(v.m2, 1.0, max_relative = 1e-14);
            assert_relative_eq!(v.m3, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn m2_long_time_limit() {
        let mu = 1e-3;
        let mode = Mode::new(2, 3.0, 1, 1.0);
        let v = m123_values(1e9, &mode, mu, 9.0);
        let expected = (std::f64::consts::FRAC_PI_2 + (mu.cbrt() * 1.5).atan()).exp();
        assert_relative_eq!(v.m2, expected, max_relative = 1e-6);
        assert!(v.m2 <= std::f64::consts::PI.exp());
    }

    #[test]
    fn m_monotone_in_time() {
        let mu = 1e-2;
        for &(k, eta, l) in &[(1, 5.0, 0), (1, -3.0, 2), (-2, 7.0, 1), (3, 0.0, 0)] {
            let mode = Mode::new(k, eta, l, 1.0);
            let mut prev = 0.0;
            for i in 0..4000 {
                let t = i as f64 * 0.1;
                let (m, _) = m_value(t, &mode, mu);
                assert!(m >= prev - 1e-12 * m, "m not monotone at t={t}");
                prev = m;
            }
        }
    }

    #[test]
    fn m_continuous_at_case_boundaries() {
        for &mu in &[1.0f64, 1e-2, 1e-4] {
            let span = 64.0 / mu.cbrt();
            for &(k, eta, l) in &[(1i64, 3.0, 0i64), (1, -3.0, 2), (-2, 5.0, 1), (2, 0.0, 3)] {
                let mode = Mode::new(k, eta, l, 1.0);
                let ratio = eta / k as f64;
                let mut boundaries = vec![ratio + span];
                if ratio > 0.0 {
                    boundaries.push(ratio);
                }
                for tb in boundaries {
                    if tb <= 0.0 {
                        continue;
                    }
                    let delta = 4.0 * f64::EPSILON * tb.max(1.0);
                    let (left, _) = m_value(tb - delta, &mode, mu);
                    let (right, _) = m_value(tb + delta, &mode, mu);
                    assert!(
                        (left - right).abs() <= 1e-12 * left.max(right),
                        "jump at t={tb}: {left} vs {right} (k={k}, eta={eta}, l={l}, mu={mu})"
                    );
                }
            }
        }
    }

    #[test]
    fn dlog_m_matches_finite_difference_of_log_m() {
        let mu = 1e-2;
        let mode = Mode::new(2, 5.0, 1, 1.0);
        let h = 1e-6;
        // One t per case: pre-critical, stretching, frozen.
        for &t in &[1.0, 3.0, 200.0] {
            let (m, dlog) = m_value(t, &mode, mu);
            let (mp, _) = m_value(t + h, &mode, mu);
            let (mm, _) = m_value(t - h, &mode, mu);
            let fd = (mp.ln() - mm.ln()) / (2.0 * h);
            assert_relative_eq!(fd, dlog, epsilon = 1e-7);
            assert!(m >= 1.0);
        }
    }

    #[test]
    fn weights_zero_at_zero_k() {
        let phys = PhysicalParams::new(1e-3, 0.0, 0.5);
        let mp = crate::params::default_multiplier_params(&phys);
        let w = weights(5.0, &Mode::new(0, 2.0, 1, 1.0), &phys, &mp);
        assert_eq!(w.big_m, 0.0);
        assert_eq!(w.big_m1, 0.0);
        assert_eq!(w.h, 0.0);
        assert_eq!(w.g, 0.0);
    }

    #[test]
    fn weights_all_factors_one_initially() {
        let phys = PhysicalParams::new(1e-3, 0.0, 0.5);
        let mut mp = crate::params::default_multiplier_params(&phys);
        mp.s = 0.0;
        let w = weights(0.0, &Mode::new(1, 0.0, 0, 1.0), &phys, &mp);
        assert_relative_eq!(w.m, 1.0);
        assert_relative_eq!(w.big_m, 1.0, max_relative = 1e-14);
        assert_relative_eq!(w.big_m1, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn g_squared_identity() {
        let phys = PhysicalParams::new(1e-2, 0.1, 0.5);
        let mp = crate::params::default_multiplier_params(&phys);
        for i in 0..200 {
            let t = 0.37 * i as f64;
            let mode = Mode::new(1 + (i % 3) as i64, (i as f64) * 0.11 - 9.0, (i % 5) as i64 - 2, 1.0);
            let w = weights(t, &mode, &phys, &mp);
            assert_relative_eq!(
                w.g * w.g,
                0.25 * w.dlog_m * w.big_m * w.big_m,
                max_relative = 1e-12,
                epsilon = 1e-300
            );
            assert!(w.big_m1 <= w.big_m * (1.0 + 1e-14));
        }
    }

    #[test]
    fn claim_233_margin_at_unit_offset() {
        // |t - eta/k| = mu^{-1/3}, k=1, l=0, eta=0: LHS = mu^{1/3}/2 + mu^{1/3}(mu^{2/3}+1).
        let mu = 1e-3f64;
        let mode = Mode::new(1, 0.0, 0, 1.0);
        let t = mu.powf(-1.0 / 3.0);
        let s = symbol_values(t, &mode);
        let v = m123_values(t, &mode, mu, 9.0);
        let lhs = v.dlog_m2 + mu * s.p;
        let expected = 0.5 * mu.cbrt() + mu.cbrt() * (mu.powf(2.0 / 3.0) + 1.0);
        assert_relative_eq!(lhs, expected, max_relative = 1e-12);
        assert!(lhs > 0.5 * mu.cbrt());
    }

    #[test]
    fn claim_233_small_sweep_clean() {
        let report = audit_claim_233(20_000, &[1e-2, 1e-3, 1e-4], 7, &AuditRanges::default());
        assert!(report.ok(), "violations: {:?}", report.violations.first());
        assert!(report.min_margin > 0.0);
        let total: usize = report.histogram.iter().map(|(_, c)| c).sum();
        assert_eq!(total, 20_000);
    }

    #[test]
    fn inequality_sweep_small_clean() {
        let report =
            multiplier_inequality_audit(20_000, &[1e-2, 1e-3, 1e-4], 9.0, 11, &AuditRanges::default());
        assert!(report.ok(), "failures: {:?}", report.first_failures);
    }

    // Closed forms vs an adaptive-Simpson quadrature of the defining ODEs.
    mod quadrature_oracle {
        use super::*;

        fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
            fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
                let m = 0.5 * (a + b);
                let fm = f(m);
                ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
            }
            #[allow(clippy::too_many_arguments)]
            fn recurse(
                f: &dyn Fn(f64) -> f64,
                a: f64,
                fa: f64,
                b: f64,
                fb: f64,
                whole: f64,
                m: f64,
                fm: f64,
                tol: f64,
                depth: u32,
            ) -> f64 {
                let (left, lm, flm) = simpson(f, a, fa, m, fm);
                let (right, rm, frm) = simpson(f, m, fm, b, fb);
                let delta = left + right - whole;
                if depth == 0 || delta.abs() <= 15.0 * tol {
                    left + right + delta / 15.0
                } else {
                    recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
                        + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
                }
            }
            let fa = f(a);
            let fb = f(b);
            let (whole, m, fm) = simpson(f, a, fa, b, fb);
            recurse(f, a, fa, b, fb, whole, m, fm, tol, 36)
        }

        #[test]
        fn closed_forms_match_quadrature() {
            let n_growth = 9.0;
            for i in 0..60u64 {
                let seed = 1234;
                let c = i * 8;
                let t = rng::range_f64(seed, c, 0.01, 200.0);
                let k = rng::range_i64(seed, c + 1, 1, 5)
                    * if rng::split_mix(seed, c + 2) & 1 == 0 { 1 } else { -1 };
                let l = rng::range_i64(seed, c + 3, -5, 5);
                let eta = rng::range_f64(seed, c + 4, -30.0, 30.0);
                let mu = [1e-2, 1e-3, 1e-4][(rng::split_mix(seed, c + 5) % 3) as usize];
                let mode = Mode::new(k, eta, l, 1.0);
                let v = m123_values(t, &mode, mu, n_growth);

                let kf = k as f64;
                let p_at = move |s: f64| {
                    let q = eta - kf * s;
                    kf * kf + q * q + (l * l) as f64
                };
                let i1 = adaptive_simpson(&|s| n_growth * kf * kf / p_at(s), 0.0, t, 1e-12);
                assert_relative_eq!(v.m1, i1.exp(), max_relative = 1e-10);

                let klb = (1.0 + (kf * l as f64).powi(2)).sqrt();
                let i3 = adaptive_simpson(&|s| n_growth * klb / p_at(s), 0.0, t, 1e-12);
                assert_relative_eq!(v.m3, i3.exp(), max_relative = 1e-10);

                let m3rd = mu.cbrt();
                let i2 = adaptive_simpson(
                    &|s| m3rd / (1.0 + (m3rd * (s - eta / kf)).powi(2)),
                    0.0,
                    t,
                    1e-12,
                );
                assert_relative_eq!(v.m2, i2.exp(), max_relative = 1e-10);
            }
        }
    }
}
