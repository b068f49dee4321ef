//! Grid norms, three-region splits, log-log regressions, and the counterexample verdict.

use crate::cusp::{CuspConfig, CuspError, CuspModel};
use crate::field::WaveField;
use crate::gallery::TransverseField;
use crate::params::{loss_exponent, make_params, sharp_q_recip, to_rational, ParamError, Q};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("exponent {0} outside [1, ∞]")]
    Exponent(f64),
    #[error("field contains non-finite samples")]
    NonFinite,
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("time grid is not uniform")]
    NonUniform,
    #[error("only {per_window:.1} time samples per essential window (need 8)")]
    CoarseTime { per_window: f64 },
    #[error("non-positive value {0} in a log-log fit")]
    NonPositive(f64),
    #[error("region {0} contains no grid points")]
    EmptyRegion(&'static str),
    #[error("region constants need M >= 2 and A <= a")]
    RegionSpec,
}

fn check_r(r: f64) -> Result<(), NormError> {
    if r >= 1.0 {
        Ok(())
    } else {
        Err(NormError::Exponent(r))
    }
}

fn trapezoid_x(i: usize, n: usize) -> f64 {
    if n > 1 && (i == 0 || i == n - 1) {
        0.5
    } else {
        1.0
    }
}

/// Σ w |u|^r over the rows selected by `keep`, or the max for r = ∞.
fn power_sum(field: &WaveField, r: f64, keep: impl Fn(f64) -> bool) -> Result<(f64, usize), NormError> {
    check_r(r)?;
    let g = &field.grid;
    let mut acc = 0.0;
    let mut rows = 0;
    for ix in 0..g.nx {
        if !keep(g.x(ix)) {
            continue;
        }
        rows += 1;
        let w = trapezoid_x(ix, g.nx) * g.dx * g.dy;
        for v in field.row(ix) {
            let a = v.norm();
            if !a.is_finite() {
                return Err(NormError::NonFinite);
            }
            if r.is_infinite() {
                acc = f64::max(acc, a);
            } else {
                acc += w * a.powf(r);
            }
        }
    }
    Ok((acc, rows))
}

fn finish(acc: f64, r: f64) -> f64 {
    if r.is_infinite() {
        acc
    } else {
        acc.powf(1.0 / r)
    }
}

pub fn lr_norm(field: &WaveField, r: f64) -> Result<f64, NormError> {
    let (acc, _) = power_sum(field, r, |_| true)?;
    Ok(finish(acc, r))
}

pub fn lr_norm_1d(f: &TransverseField, r: f64) -> Result<f64, NormError> {
    check_r(r)?;
    let mut acc = 0.0f64;
    for v in &f.values {
        let a = v.norm();
        if !a.is_finite() {
            return Err(NormError::NonFinite);
        }
        acc = if r.is_infinite() { acc.max(a) } else { acc + f.dy * a.powf(r) };
    }
    Ok(finish(acc, r))
}

/// Outer L^q over a uniform time grid (trapezoid) of precomputed inner norms.
/// `window`, when given, is the essential-window length that must hold >= 8 samples.
pub fn lqlr_from_norms(times: &[f64], norms: &[f64], q: f64, window: Option<f64>) -> Result<f64, NormError> {
    check_r(q)?;
    if times.is_empty() || times.len() != norms.len() {
        return Err(NormError::TooFewSamples { need: 1, got: times.len().min(norms.len()) });
    }
    if q.is_infinite() {
        return Ok(norms.iter().cloned().fold(0.0, f64::max));
    }
    if times.len() < 2 {
        return Err(NormError::TooFewSamples { need: 2, got: 1 });
    }
    let dt = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-300)) {
        return Err(NormError::NonUniform);
    }
    if let Some(len) = window {
        if len / dt < 8.0 - 1e-9 {
            return Err(NormError::CoarseTime { per_window: len / dt });
        }
    }
    let n = norms.len();
    let acc: f64 = norms.iter().enumerate().map(|(i, v)| trapezoid_x(i, n) * dt * v.powf(q)).sum();
    Ok(acc.powf(1.0 / q))
}

pub fn lqlr_norm(fields: &[WaveField], q: f64, r: f64, window: Option<f64>) -> Result<f64, NormError> {
    let times: Vec<f64> = fields.iter().map(|f| f.t).collect();
    let norms: Vec<f64> = fields.iter().map(|f| lr_norm(f, r)).collect::<Result<_, _>>()?;
    lqlr_from_norms(&times, &norms, q, window)
}

/// Split x <= M h^{2/3} | M h^{2/3} < x <= A | x > A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRegionSpec {
    pub m: f64,
    pub a_cap: f64,
    pub h: f64,
}

impl NormRegionSpec {
    pub fn new(m: f64, a_cap: f64, h: f64, a: f64) -> Result<Self, NormError> {
        if !(m >= 2.0) || !(a_cap <= a * (1.0 + 1e-12)) || !(a_cap > 0.0) {
            return Err(NormError::RegionSpec);
        }
        Ok(Self { m, a_cap, h })
    }

    pub fn inner_edge(&self) -> f64 {
        self.m * self.h.powf(2.0 / 3.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionNorms {
    pub inner: f64,
    pub middle: f64,
    pub outer: f64,
    pub total: f64,
}

pub fn region_norms(field: &WaveField, spec: &NormRegionSpec, r: f64) -> Result<RegionNorms, NormError> {
    let e = spec.inner_edge();
    let a = spec.a_cap;
    let (i, ni) = power_sum(field, r, |x| x <= e)?;
    let (m, nm) = power_sum(field, r, |x| x > e && x <= a)?;
    let (o, no) = power_sum(field, r, |x| x > a)?;
    for (n, name) in [(ni, "inner"), (nm, "middle"), (no, "outer")] {
        if n == 0 {
            return Err(NormError::EmptyRegion(name));
        }
    }
    let (t, _) = power_sum(field, r, |_| true)?;
    Ok(RegionNorms { inner: finish(i, r), middle: finish(m, r), outer: finish(o, r), total: finish(t, r) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

/// Ordinary least squares of log v on log h; at least two samples.
pub fn loglog_fit(samples: &[(f64, f64)]) -> Result<Fit, NormError> {
    if samples.len() < 2 {
        return Err(NormError::TooFewSamples { need: 2, got: samples.len() });
    }
    for &(h, v) in samples {
        if !(h > 0.0) {
            return Err(NormError::NonPositive(h));
        }
        if !(v > 0.0) {
            return Err(NormError::NonPositive(v));
        }
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = if samples.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(Fit { slope, intercept, stderr })
}

/// Log-log regression with at least four samples.
pub fn fit_exponent(samples: &[(f64, f64)]) -> Result<Fit, NormError> {
    if samples.len() < 4 {
        return Err(NormError::TooFewSamples { need: 4, got: samples.len() });
    }
    loglog_fit(samples)
}

/// y ≈ b1 x1 + b2 x2 + c; returns (b1, b2).
pub fn loglog_fit_2d(xs: &[(f64, f64)], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 3 {
        return None;
    }
    let m1 = xs.iter().map(|p| p.0).sum::<f64>() / n;
    let m2 = xs.iter().map(|p| p.1).sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut s11, mut s12, mut s22, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, y) in xs.iter().zip(ys) {
        let (a, b, c) = (p.0 - m1, p.1 - m2, y - my);
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
        s1y += a * c;
        s2y += b * c;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() < 1e-12 * (s11 * s22).max(1e-300) {
        return None;
    }
    Some(((s22 * s1y - s12 * s2y) / det, (s11 * s2y - s12 * s1y) / det))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormScanResult {
    pub q: f64,
    pub r: f64,
    pub t_window: (f64, f64),
    pub samples: Vec<(f64, f64)>,
    pub fitted_exponent: Option<f64>,
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regions: Option<Vec<RegionNorms>>,
    pub reliable: bool,
}

impl NormScanResult {
    pub fn from_samples(q: f64, r: f64, t_window: (f64, f64), samples: Vec<(f64, f64)>, reliable: bool) -> Self {
        let hmin = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let hmax = samples.iter().map(|s| s.0).fold(0.0, f64::max);
        let fit = if samples.len() >= 4 && (hmax / hmin).log10() >= 1.5 { fit_exponent(&samples).ok() } else { None };
        let stderr = fit.map(|f| f.stderr).or_else(|| loglog_fit(&samples).ok().map(|f| f.stderr));
        Self { q, r, t_window, samples, fitted_exponent: fit.map(|f| f.slope), stderr, regions: None, reliable }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,q,r,norm\n");
        for (h, v) in &self.samples {
            s.push_str(&format!("{h:e},{},{},{v:.10e}\n", self.q, self.r));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
    Unreliable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "NOT-APPLICABLE",
            Verdict::Unreliable => "UNRELIABLE",
        })
    }
}

/// One h of the counterexample scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterSample {
    pub h: f64,
    pub lambda: f64,
    pub n_reflections: u32,
    pub strichartz_norm: f64,
    pub initial_l2: f64,
    pub quotient: f64,
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub r: f64,
    pub q: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub fitted_exponent: Option<f64>,
    pub stderr: Option<f64>,
    pub verdict: Option<Verdict>,
    pub samples: Vec<CounterSample>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Cusp(#[from] CuspError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// Options of the counterexample scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub c0: f64,
    /// Added to β(r) - ε (0 for the verdict run, e.g. ε + 0.1 for the control).
    pub beta_shift: f64,
    /// Time samples per reflection period 4a^{1/2}(1+a)^{1/2}.
    pub samples_per_period: usize,
    pub cusp: CuspConfig,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { c0: 0.3, beta_shift: 0.0, samples_per_period: 64, cusp: CuspConfig::default() }
    }
}

/// ‖U_h‖_{L^q([0,1], L^r)} and ‖U_h(0)‖_{L²} for one h.
pub fn counter_sample(r: f64, q: f64, epsilon: f64, h: f64, opts: &ReportOptions) -> Result<CounterSample, ReportError> {
    let params = make_params(h, epsilon, opts.c0)?;
    let model = CuspModel::new(&params, &opts.cusp)?;
    let period = params.period();
    let dt = period / opts.samples_per_period as f64;
    let nt = (1.0 / dt).floor() as usize + 1;
    let times: Vec<f64> = (0..nt).map(|i| i as f64 * dt).collect();
    let per_time: Vec<(f64, bool)> = times
        .par_iter()
        .map(|&t| {
            let (f, ok) = model.total_field(t)?;
            Ok((lr_norm(&f, r)?, ok))
        })
        .collect::<Result<_, ReportError>>()?;
    let norms: Vec<f64> = per_time.iter().map(|p| p.0).collect();
    let mut reliable = per_time.iter().all(|p| p.1);
    let lq = lqlr_from_norms(&times, &norms, q, Some(params.sqrt_a()))?;
    let (u0, ok0) = model.total_field(0.0)?;
    reliable &= ok0;
    let l2 = lr_norm(&u0, 2.0)?;
    Ok(CounterSample {
        h,
        lambda: params.lambda,
        n_reflections: params.n_reflections,
        strichartz_norm: lq,
        initial_l2: l2,
        quotient: f64::NAN,
        reliable,
    })
}

/// The wave-sharp time exponent in d = 2: 1/q = (1/2)(1/2 - 1/r).
pub fn sharp_wave_q(r: f64) -> Result<f64, ParamError> {
    let iq: Q = sharp_q_recip(r, Q::new(1, 2))?;
    Ok(if *iq.numer() == 0 { f64::INFINITY } else { *iq.denom() as f64 / *iq.numer() as f64 })
}

pub fn verdict_from(samples: &[CounterSample], epsilon: f64) -> (Option<f64>, Option<f64>, Option<Verdict>) {
    if samples.len() < 2 {
        return (None, None, None);
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.h, s.quotient)).collect();
    let fit = match loglog_fit(&pts) {
        Ok(f) => f,
        Err(_) => return (None, None, Some(Verdict::Unreliable)),
    };
    if samples.iter().any(|s| !s.reliable) {
        return (Some(fit.slope), Some(fit.stderr), Some(Verdict::Unreliable));
    }
    let mut sorted = pts.clone();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let increasing = sorted.windows(2).all(|w| w[1].1 > w[0].1);
    let ok = increasing && fit.slope <= -epsilon / 2.0;
    (Some(fit.slope), Some(fit.stderr), Some(if ok { Verdict::Pass } else { Verdict::Fail }))
}

/// Q(h) = h^β ‖U_h‖_{L^q L^r} / ‖U_h(0)‖_{L²} with β = β(r) - ε + shift.
pub fn counterexample_report(
    r: f64,
    epsilon: f64,
    h_list: &[f64],
    opts: &ReportOptions,
) -> Result<CounterexampleReport, ReportError> {
    let q = if r > 4.0 { sharp_wave_q(r)? } else { f64::NAN };
    if !(r > 4.0) {
        return Ok(CounterexampleReport {
            r,
            q,
            epsilon,
            beta: f64::NAN,
            fitted_exponent: None,
            stderr: None,
            verdict: Some(Verdict::NotApplicable),
            samples: vec![],
        });
    }
    let _ = to_rational(r)?;
    let beta = loss_exponent(r)?.verdict_beta(epsilon) + opts.beta_shift;
    let samples: Vec<CounterSample> = h_list
        .par_iter()
        .map(|&h| {
            let mut s = counter_sample(r, q, epsilon, h, opts)?;
            s.quotient = h.powf(beta) * s.strichartz_norm / s.initial_l2;
            Ok(s)
        })
        .collect::<Result<_, ReportError>>()?;
    let (fitted_exponent, stderr, verdict) = verdict_from(&samples, epsilon);
    Ok(CounterexampleReport { r, q, epsilon, beta, fitted_exponent, stderr, verdict, samples })
}

/// Requotient an existing scan with a different β (norms are β-independent).
pub fn requotient(report: &CounterexampleReport, beta: f64) -> CounterexampleReport {
    let mut out = report.clone();
    out.beta = beta;
    for s in &mut out.samples {
        s.quotient = s.h.powf(beta) * s.strichartz_norm / s.initial_l2;
    }
    let (f, e, v) = verdict_from(&out.samples, out.epsilon);
    out.fitted_exponent = f;
    out.stderr = e;
    out.verdict = v;
    out
}


#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use crate::field::Grid;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field_from(nx: usize, ny: usize, dx: f64, dy: f64, f: impl Fn(f64, f64) -> f64) -> WaveField {
        let grid = Grid { x0: 0.0, dx, nx, y0: 0.0, dy, ny };
        let mut w = WaveField::zeros(grid, 0.0, 0.0);
        for ix in 0..nx {
            for iy in 0..ny {
                w.values[ix * ny + iy] = Complex64::new(f(grid.x(ix), grid.y(iy)), 0.0);
            }
        }
        w
    }

    #[test]
    fn constant_field_unit_square() {
        let f = field_from(101, 100, 0.01, 0.01, |_, _| 1.0);
        for r in [1.0, 2.0, 6.0, f64::INFINITY] {
            assert!((lr_norm(&f, r).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(lr_norm(&f, 0.5).is_err());
    }

    #[test]
    fn nonfinite_rejected() {
        let f = field_from(3, 3, 1.0, 1.0, |x, _| if x > 1.5 { f64::NAN } else { 1.0 });
        assert_eq!(lr_norm(&f, 2.0), Err(NormError::NonFinite));
    }

    #[test]
    fn width_halving_scaling() {
        // smooth bump in y with compact support, halved width
        let bump = |s: f64| if s.abs() < 1.0 { (-1.0 / (1.0 - s * s)).exp() } else { 0.0 };
        for r in [2.0, 3.0, 6.0] {
            let wide = field_from(2, 4000, 1.0, 0.001, |_, y| bump((y - 2.0) / 1.0));
            let narrow = field_from(2, 4000, 1.0, 0.001, |_, y| bump((y - 2.0) / 0.5));
            let ratio = lr_norm(&narrow, r).unwrap() / lr_norm(&wide, r).unwrap();
            assert!((ratio - 0.5f64.powf(1.0 / r)).abs() < 1e-6);
        }
    }

    #[test]
    fn gaussian_closed_form() {
        // e^{-(y-5)^2/2} e^{-x} on [0, 40] x [0, 10): ‖·‖_r^r = (1/r) √(2π/r)
        let f = field_from(40001, 1000, 0.001, 0.01, |x, y| (-(y - 5.0).powi(2) / 2.0 - x).exp());
        for r in [2.0, 4.0, 6.0] {
            let exact = ((1.0 / r) * (2.0 * std::f64::consts::PI / r).sqrt()).powf(1.0 / r);
            let got = lr_norm(&f, r).unwrap();
            assert!((got / exact - 1.0).abs() < 1e-6, "r={r}: {got} vs {exact}");
        }
    }

    #[test]
    fn lqlr_basics() {
        let times: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let norms = vec![2.0; 11];
        assert!((lqlr_from_norms(&times, &norms, 3.0, None).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(lqlr_from_norms(&[0.0], &[5.0], f64::INFINITY, None).unwrap(), 5.0);
        assert!(matches!(lqlr_from_norms(&times, &norms, 3.0, Some(0.5)), Err(NormError::CoarseTime { .. })));
        let f = field_from(11, 10, 0.1, 0.1, |_, _| 1.0);
        let single = lqlr_norm(std::slice::from_ref(&f), f64::INFINITY, 4.0, None).unwrap();
        assert_eq!(single, lr_norm(&f, 4.0).unwrap());
    }

    #[test]
    fn disjoint_windows_add_in_q() {
        // two separated bumps in time: ‖·‖_q^q is the sum over windows
        let times: Vec<f64> = (0..2001).map(|i| i as f64 * 0.0005).collect();
        let prof = |t: f64, c: f64| {
            let s = (t - c) / 0.1;
            if s.abs() < 1.0 {
                (-1.0 / (1.0 - s * s)).exp()
            } else {
                0.0
            }
        };
        let norms: Vec<f64> = times.iter().map(|&t| prof(t, 0.25) + 2.0 * prof(t, 0.75)).collect();
        let q = 6.0;
        let total = lqlr_from_norms(&times, &norms, q, None).unwrap().powf(q);
        let a: Vec<f64> = times.iter().map(|&t| prof(t, 0.25)).collect();
        let one = lqlr_from_norms(&times, &a, q, None).unwrap().powf(q);
        assert!((total / (one * (1.0 + 2f64.powf(q))) - 1.0).abs() < 0.1);
    }

    #[test]
    fn regions_are_additive() {
        let f = field_from(200, 10, 0.01, 0.1, |x, y| (1.0 + x) * (1.0 + y.sin()));
        let spec = NormRegionSpec { m: 2.0, a_cap: 1.2, h: 0.001 };
        let r = 3.0;
        let reg = region_norms(&f, &spec, r).unwrap();
        let sum = reg.inner.powf(r) + reg.middle.powf(r) + reg.outer.powf(r);
        assert!((sum / reg.total.powf(r) - 1.0).abs() < 1e-12);
        assert!(NormRegionSpec::new(1.0, 0.1, 0.001, 0.2).is_err());
        let far = NormRegionSpec { m: 2.0, a_cap: 5.0, h: 0.001 };
        assert_eq!(region_norms(&f, &far, r), Err(NormError::EmptyRegion("outer")));
    }

    #[test]
    fn exact_fits() {
        let sq: Vec<(f64, f64)> = (1..=6).map(|k| (10f64.powi(-k), 10f64.powi(-2 * k))).collect();
        assert!((fit_exponent(&sq).unwrap().slope - 2.0).abs() < 1e-12);
        let half: Vec<(f64, f64)> = (1..=6).map(|k| (2f64.powi(-k), 3.0 * 2f64.powf(-0.5 * k as f64))).collect();
        let f = fit_exponent(&half).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit_exponent(&[(1.0, 1.0), (0.1, -1.0), (0.01, 1.0), (0.001, 1.0)]).is_err());
    }

    #[test]
    fn noisy_fit_within_three_stderr() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut hits = 0;
        for _ in 0..50 {
            let s: Vec<(f64, f64)> = (0..12)
                .map(|k| {
                    let h = 10f64.powf(-0.25 * k as f64);
                    (h, h.powf(0.7) * (1.0 + 0.01 * rng.gen_range(-1.0..1.0)))
                })
                .collect();
            let f = fit_exponent(&s).unwrap();
            if (f.slope - 0.7).abs() <= 3.0 * f.stderr {
                hits += 1;
            }
        }
        assert!(hits >= 48);
    }

    #[test]
    fn not_applicable_below_four() {
        let rep = counterexample_report(3.0, 0.1, &[1e-4], &ReportOptions::default()).unwrap();
        assert_eq!(rep.verdict, Some(Verdict::NotApplicable));
        assert_eq!(sharp_wave_q(6.0).unwrap(), 6.0);
    }

    proptest! {
        #[test]
        fn two_d_fit_recovers_exponents(b1 in -1.0f64..1.0, b2 in -1.0f64..1.0) {
            let mut xs = vec![];
            let mut ys = vec![];
            for i in 0..5 {
                for j in 0..3 {
                    let (l, h) = ((30.0f64 * 2f64.powi(i)).ln(), (10f64.powi(-2 - j)).ln());
                    xs.push((l, h));
                    ys.push(b1 * l + b2 * h + 0.3);
                }
            }
            let (c1, c2) = loglog_fit_2d(&xs, &ys).unwrap();
            prop_assert!((c1 - b1).abs() < 1e-9 && (c2 - b2).abs() < 1e-9);
        }
    }
}
