//! Oscillatory integrals ∫ e^{iλφ(ξ)} a(ξ) dξ: adaptive panel quadrature, stationary-phase
//! expansions, and the dispersive suprema of the gallery flows.

use crate::gallery::{FrequencyWindow, TransverseFlow};
use crate::normlab::loglog_fit_2d;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OscError {
    #[error("tolerance {0} outside [1e-12, 1e-3]")]
    Tolerance(f64),
    #[error("empty or non-finite domain [{0}, {1}]")]
    Domain(f64, f64),
    #[error("quadrature did not converge within {panels} panels (error estimate {estimate:e})")]
    NonConvergence { panels: usize, estimate: f64 },
    #[error("fold: degenerate critical point near {at} (|phi''| = {second:e})")]
    Degenerate { at: f64, second: f64 },
    #[error("{} critical points at {points:?}; split the domain", points.len())]
    MultipleCritical { points: Vec<f64> },
    #[error("no critical point in the domain")]
    NoCriticalPoint,
    #[error("expansion order {0} not in 1..=3")]
    Order(usize),
    #[error("large parameter must be positive, got {0}")]
    LargeParam(f64),
    #[error("maximum of |J| attained on the z-grid boundary at z = {z} (lambda = {lambda})")]
    GridBoundary { z: f64, lambda: f64 },
    #[error("only d = 2 is supported, got {0}")]
    Dimension(u32),
    #[error("empty lambda grid")]
    EmptyGrid,
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if n == 0 { 1.0 } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * p - pm) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Self { nodes, weights }
    }

    pub fn order20() -> &'static GaussLegendre {
        static GL: OnceLock<GaussLegendre> = OnceLock::new();
        GL.get_or_init(|| GaussLegendre::new(20))
    }

    /// (node, weight) pairs of the composite rule with `panels` equal panels on [lo, hi].
    pub fn composite(&self, lo: f64, hi: f64, panels: usize) -> Vec<(f64, f64)> {
        let width = (hi - lo) / panels as f64;
        (0..panels)
            .flat_map(|k| {
                let c = lo + (k as f64 + 0.5) * width;
                self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + 0.5 * width * x, 0.5 * width * w))
            })
            .collect()
    }

    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, lo: f64, hi: f64, mut f: F) -> Complex64 {
        let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += f(c + r * x) * *w;
        }
        s * r
    }
}

#[derive(Clone)]
pub struct OscillatoryProblem {
    pub phase: RealFn,
    pub amplitude: RealFn,
    pub large_param: f64,
    pub domain: (f64, f64),
}

impl fmt::Debug for OscillatoryProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OscillatoryProblem")
            .field("large_param", &self.large_param)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl OscillatoryProblem {
    pub fn new(
        phase: impl Fn(f64) -> f64 + Send + Sync + 'static,
        amplitude: impl Fn(f64) -> f64 + Send + Sync + 'static,
        large_param: f64,
        domain: (f64, f64),
    ) -> Self {
        Self { phase: Arc::new(phase), amplitude: Arc::new(amplitude), large_param, domain }
    }

    fn integrand(&self, x: f64) -> Complex64 {
        let a = (self.amplitude)(x);
        if a == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(a, self.large_param * (self.phase)(x))
    }
}

const PANEL_BUDGET: usize = 200_000;

/// Adaptive quadrature; panels are split until λ·(phase spread) <= 8π, then refined on
/// the 20-point vs. 2x20-point Gauss-Legendre discrepancy.
pub fn quad_oscillatory(p: &OscillatoryProblem, tol: f64) -> Result<Complex64, OscError> {
    if !(1e-12..=1e-3).contains(&tol) {
        return Err(OscError::Tolerance(tol));
    }
    let (lo, hi) = p.domain;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(OscError::Domain(lo, hi));
    }
    let gl = GaussLegendre::order20();
    let total = hi - lo;
    let mut stack = vec![(lo, hi)];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut panels = 0usize;
    while let Some((a, b)) = stack.pop() {
        panels += 1;
        if panels > PANEL_BUDGET {
            return Err(OscError::NonConvergence { panels, estimate: err });
        }
        let (mut pmin, mut pmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=8 {
            let v = (p.phase)(a + (b - a) * i as f64 / 8.0);
            pmin = pmin.min(v);
            pmax = pmax.max(v);
        }
        if p.large_param.abs() * (pmax - pmin) > 8.0 * PI {
            let m = 0.5 * (a + b);
            stack.push((m, b));
            stack.push((a, m));
            continue;
        }
        let whole = gl.integrate(a, b, |x| p.integrand(x));
        let m = 0.5 * (a + b);
        let halves = gl.integrate(a, m, |x| p.integrand(x)) + gl.integrate(m, b, |x| p.integrand(x));
        let diff = (whole - halves).norm();
        let allowed = tol * (b - a) / total;
        if diff <= allowed || (b - a) < 1e-13 * total {
            sum += halves;
            err += diff;
        } else {
            stack.push((m, b));
            stack.push((a, m));
        }
    }
    Ok(sum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryPhaseExpansion {
    pub critical_point: f64,
    pub phase_value: f64,
    pub second_derivative: f64,
    /// L_j f for j < k.
    pub terms: Vec<Complex64>,
    pub error_bound: f64,
    pub value: Complex64,
}

/// Chebyshev interpolant on [c - r, c + r], returned as Taylor coefficients at c.
fn taylor_coeffs(f: &dyn Fn(f64) -> f64, c: f64, r: f64, order: usize) -> Vec<f64> {
    let mut n = 16;
    let cheb = loop {
        let vals: Vec<f64> =
            (0..n).map(|k| f(c + r * (PI * (k as f64 + 0.5) / n as f64).cos())).collect();
        let coef: Vec<f64> = (0..n)
            .map(|j| {
                let s: f64 = vals
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                    .sum();
                s * if j == 0 { 1.0 } else { 2.0 } / n as f64
            })
            .collect();
        let big = coef.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tail = coef[n - 3..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if tail <= 1e-14 * big.max(1e-300) || n >= 128 {
            break coef;
        }
        n *= 2;
    };
    // monomial coefficients in u = (x - c)/r
    let n = cheb.len();
    let mut mono = vec![0.0; n];
    let (mut tprev, mut tcur) = (vec![0.0; n + 1], vec![0.0; n + 1]);
    tprev[0] = 1.0;
    tcur[1] = 1.0;
    mono[0] += cheb[0];
    if n > 1 {
        mono[1] += cheb[1];
    }
    for j in 2..n {
        let mut next = vec![0.0; n + 1];
        for m in 0..n {
            next[m + 1] += 2.0 * tcur[m];
            next[m] -= tprev[m];
        }
        for m in 0..n {
            mono[m] += cheb[j] * next[m];
        }
        tprev = tcur;
        tcur = next;
    }
    (0..=order).map(|m| if m < n { mono[m] / r.powi(m as i32) } else { 0.0 }).collect()
}

fn poly_mul(a: &[f64], b: &[f64], deg: usize) -> Vec<f64> {
    let mut out = vec![0.0; deg + 1];
    for (i, x) in a.iter().enumerate().take(deg + 1) {
        for (j, y) in b.iter().enumerate() {
            if i + j > deg {
                break;
            }
            out[i + j] += x * y;
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// L_j f at the critical point from Taylor data of the remainder phase `g` and of `f`.
fn hormander_term(j: usize, second: f64, g: &[f64], f: &[f64]) -> Complex64 {
    let mut total = 0.0;
    for mu in 0..=2 * j {
        let nu = j + mu;
        if 2 * nu < 3 * mu {
            continue;
        }
        let deg = 2 * nu;
        let mut prod = f.to_vec();
        prod.resize(deg + 1, 0.0);
        for _ in 0..mu {
            prod = poly_mul(&prod, g, deg);
        }
        // <φ''^{-1} D, D>^ν with D = -i d/dx contributes (-1)^ν φ''^{-ν} d^{2ν}
        let deriv = prod[deg] * factorial(deg);
        let sign = if nu.is_multiple_of(2) { 1.0 } else { -1.0 };
        total += sign * deriv / (second.powi(nu as i32) * 2f64.powi(nu as i32) * factorial(mu) * factorial(nu));
    }
    // i^{-j}
    Complex64::new(0.0, -1.0).powi(j as i32) * total
}

fn fd_derivative(f: &dyn Fn(f64) -> f64, x: f64, scale: f64) -> f64 {
    let e = f64::EPSILON.cbrt() * scale.max(1e-3);
    (f(x + e) - f(x - e)) / (2.0 * e)
}

fn critical_points(p: &OscillatoryProblem) -> Result<Vec<f64>, OscError> {
    let (lo, hi) = p.domain;
    let scale = hi - lo;
    let phase = &*p.phase;
    let n = 2000;
    let xs: Vec<f64> = (0..=n).map(|i| lo + scale * i as f64 / n as f64).collect();
    let d: Vec<f64> = xs.iter().map(|&x| fd_derivative(phase, x, scale)).collect();
    let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut roots = Vec::new();
    let spacing = scale / n as f64;
    for i in 0..n {
        let r = if d[i] == 0.0 {
            xs[i]
        } else if d[i] * d[i + 1] < 0.0 {
            let (mut a, mut b) = (xs[i], xs[i + 1]);
            let fa = d[i];
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let fm = fd_derivative(phase, m, scale);
                if fm * fa > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        } else {
            continue;
        };
        if roots.last().is_none_or(|&q: &f64| (r - q).abs() > 2.0 * spacing) {
            roots.push(r);
        }
    }
    // touching zeros without a sign change are folds
    for i in 1..n {
        let (a, b, c) = (d[i - 1].abs(), d[i].abs(), d[i + 1].abs());
        if b <= a && b <= c && b < 1e-6 * dmax && d[i - 1].signum() == d[i + 1].signum()
            && !roots.iter().any(|r| (r - xs[i]).abs() < 2.0 * scale / n as f64) {
                return Err(OscError::Degenerate { at: xs[i], second: 0.0 });
            }
    }
    Ok(roots)
}

pub fn stationary_phase(p: &OscillatoryProblem, k: usize) -> Result<StationaryPhaseExpansion, OscError> {
    if !(1..=3).contains(&k) {
        return Err(OscError::Order(k));
    }
    let omega = p.large_param;
    if !(omega > 0.0) {
        return Err(OscError::LargeParam(omega));
    }
    let (lo, hi) = p.domain;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(OscError::Domain(lo, hi));
    }
    let roots = critical_points(p)?;
    let x0 = match roots.as_slice() {
        [] => return Err(OscError::NoCriticalPoint),
        [x] => *x,
        _ => return Err(OscError::MultipleCritical { points: roots }),
    };
    let dist = (x0 - lo).min(hi - x0);
    let r = (0.9 * dist).min(0.25 * (hi - lo)).max(1e-6 * (hi - lo));
    let order = 2 * (k + 1) + 2;
    let phi = taylor_coeffs(&*p.phase, x0, r, order);
    let f = taylor_coeffs(&*p.amplitude, x0, r, order);
    let second = 2.0 * phi[2];
    let curvature_floor = 1e-6 * (phi[1].abs() + phi[3].abs() * r + phi[2].abs()).max(1e-300);
    if second.abs() < 1e-8 || second.abs() < curvature_floor {
        return Err(OscError::Degenerate { at: x0, second: second.abs() });
    }
    let mut g = phi.clone();
    g[0] = 0.0;
    g[1] = 0.0;
    g[2] = 0.0;
    let terms: Vec<Complex64> = (0..=k + 1).map(|j| hormander_term(j, second, &g, &f)).collect();
    let phase_value = phi[0];
    let pref = Complex64::from_polar(
        (2.0 * PI / (omega * second.abs())).sqrt(),
        omega * phase_value + 0.25 * PI * second.signum(),
    );
    let value = pref
        * terms[..k].iter().enumerate().map(|(j, t)| t * omega.powi(-(j as i32))).sum::<Complex64>();
    let head = pref.norm() * omega.powi(-(k as i32)) * (terms[k].norm() + terms[k + 1].norm() / omega);
    // endpoint contributions of an amplitude that does not vanish at the ends
    let endpoint: f64 = [lo, hi]
        .iter()
        .map(|&x| {
            let a = (p.amplitude)(x).abs();
            if a == 0.0 {
                0.0
            } else {
                a / (omega * fd_derivative(&*p.phase, x, hi - lo).abs().max(1e-300))
            }
        })
        .sum();
    let error_bound = 2.0 * head + 2.0 * endpoint + 1e-12 * (1.0 + value.norm());
    Ok(StationaryPhaseExpansion {
        critical_point: x0,
        phase_value,
        second_derivative: second,
        terms: terms[..k].to_vec(),
        error_bound,
        value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    Schrodinger,
    Wave,
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowKind::Schrodinger => "schrodinger",
            FlowKind::Wave => "wave",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample {
    pub lambda: f64,
    pub h: f64,
    pub mu: f64,
    pub gamma: f64,
    /// Maximizing z (for the wave flow also reported as x with z = 1 + h^{2/3} x).
    pub z_star: f64,
    pub x_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionCurve {
    pub flow: FlowKind,
    pub d: u32,
    pub omega: f64,
    pub samples: Vec<DispersionSample>,
    pub fitted_lambda_exponent: Option<f64>,
    pub fitted_h_exponent: Option<f64>,
}

/// Minimum μ = λh^{2/3} for a wave sample to enter the exponent fit.
pub const MU_FIT_MIN: f64 = 4.0;

/// Default transverse mode for wave dispersion runs (ω ≈ 26.99). Lower modes
/// stay pre-asymptotic over λ ≤ 3000 at h = 1e-4.
pub const WAVE_MODE: usize = 29;

impl DispersionCurve {
    /// Combine curves (e.g. one per h) and refit.
    pub fn merge(curves: &[DispersionCurve]) -> Option<DispersionCurve> {
        let first = curves.first()?;
        let mut c = DispersionCurve {
            flow: first.flow,
            d: first.d,
            omega: first.omega,
            samples: curves.iter().flat_map(|c| c.samples.iter().copied()).collect(),
            fitted_lambda_exponent: None,
            fitted_h_exponent: None,
        };
        c.refit();
        Some(c)
    }

    /// Regress log γ on (log λ, log h) over the admissible samples; the h column is
    /// dropped when all samples share one h.
    pub fn refit(&mut self) {
        let used: Vec<&DispersionSample> = self
            .samples
            .iter()
            .filter(|s| s.gamma > 0.0 && (self.flow == FlowKind::Schrodinger || s.mu > MU_FIT_MIN))
            .collect();
        self.fitted_lambda_exponent = None;
        self.fitted_h_exponent = None;
        let lmin = used.iter().map(|s| s.lambda).fold(f64::INFINITY, f64::min);
        let lmax = used.iter().map(|s| s.lambda).fold(0.0, f64::max);
        if used.len() < 2 || (lmax / lmin).log10() < 1.5 - 1e-9 {
            return;
        }
        let xs: Vec<(f64, f64)> = used.iter().map(|s| (s.lambda.ln(), s.h.ln())).collect();
        let ys: Vec<f64> = used.iter().map(|s| s.gamma.ln()).collect();
        let distinct_h = used.iter().any(|s| (s.h / used[0].h - 1.0).abs() > 1e-12);
        if distinct_h {
            if let Some((bl, bh)) = loglog_fit_2d(&xs, &ys) {
                self.fitted_lambda_exponent = Some(bl);
                self.fitted_h_exponent = Some(bh);
            }
        } else {
            let n = xs.len() as f64;
            let mx = xs.iter().map(|p| p.0).sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxy: f64 = xs.iter().zip(&ys).map(|(p, y)| (p.0 - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|p| (p.0 - mx).powi(2)).sum();
            if sxx > 0.0 {
                self.fitted_lambda_exponent = Some(sxy / sxx);
            }
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("flow,d,h,lambda,mu,gamma\n");
        for p in &self.samples {
            s.push_str(&format!("{},{},{:e},{:.10e},{:.10e},{:.10e}\n", self.flow, self.d, p.h, p.lambda, p.mu, p.gamma));
        }
        s
    }
}

/// |J(z)| = |∫ e^{iλ(zη - G(η))} ψ(η) dη|.
fn j_abs(flow: &TransverseFlow, window: &FrequencyWindow, lambda: f64, z: f64) -> Result<f64, OscError> {
    let (lo, hi) = window.support();
    let flow = *flow;
    let w = *window;
    let p = OscillatoryProblem::new(move |eta| z * eta - flow.symbol(eta), move |eta| w.eval(eta), lambda, (lo, hi));
    Ok(quad_oscillatory(&p, 1e-10)?.norm())
}

fn sup_over_grid(
    flow: &TransverseFlow,
    window: &FrequencyWindow,
    lambda: f64,
    zs: &[f64],
) -> Result<(f64, f64), OscError> {
    let vals: Vec<f64> =
        zs.par_iter().map(|&z| j_abs(flow, window, lambda, z)).collect::<Result<_, _>>()?;
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[best] {
            best = i;
        }
    }
    if vals[best] > 0.0 && (best == 0 || best == zs.len() - 1) {
        return Err(OscError::GridBoundary { z: zs[best], lambda });
    }
    // three rounds of local refinement, tripling resolution each time
    let mut step = zs[1] - zs[0];
    let (mut zb, mut vb) = (zs[best], vals[best]);
    for _ in 0..3 {
        let local: Vec<f64> = (-3..=3).map(|i| zb + i as f64 * step / 3.0).collect();
        for &z in &local {
            let v = j_abs(flow, window, lambda, z)?;
            if v > vb {
                vb = v;
                zb = z;
            }
        }
        step /= 3.0;
    }
    Ok((zb, vb))
}

/// γ(λ; h) = sup_z |J| over a grid covering the stationary set {G'(η)} of the window support.
pub fn gamma_curve(
    flow: TransverseFlow,
    window: &FrequencyWindow,
    lambda_grid: &[f64],
) -> Result<DispersionCurve, OscError> {
    if lambda_grid.is_empty() {
        return Err(OscError::EmptyGrid);
    }
    let (lo, hi) = window.support();
    let derivs: Vec<f64> = (0..=200).map(|i| flow.group_velocity(lo + (hi - lo) * i as f64 / 200.0)).collect();
    let gmin = derivs.iter().cloned().fold(f64::INFINITY, f64::min);
    let gmax = derivs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let h23 = flow.h.powf(2.0 / 3.0);
    let mut samples = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let zero_window = (0..=64).all(|i| window.eval(lo + (hi - lo) * i as f64 / 64.0) == 0.0);
        let (z_star, gamma) = if zero_window {
            (gmin, 0.0)
        } else {
            let margin = (0.25 * (gmax - gmin)).max(8.0 / lambda.max(1e-3)).max(2.0 * h23);
            let (za, zb) = (gmin - margin, gmax + margin);
            let n = 240;
            let zs: Vec<f64> = (0..=n).map(|i| za + (zb - za) * i as f64 / n as f64).collect();
            sup_over_grid(&flow, window, lambda, &zs)?
        };
        samples.push(DispersionSample {
            lambda,
            h: flow.h,
            mu: lambda * h23,
            gamma,
            z_star,
            x_star: (z_star - 1.0) / h23,
        });
    }
    let mut c = DispersionCurve {
        flow: flow.kind_tag(),
        d: 2,
        omega: flow.omega,
        samples,
        fitted_lambda_exponent: None,
        fitted_h_exponent: None,
    };
    c.refit();
    Ok(c)
}

pub fn gamma_schrodinger(
    params: &crate::params::SemiclassicalParams,
    omega_k: f64,
    d: u32,
    lambda_grid: &[f64],
) -> Result<DispersionCurve, OscError> {
    if d != 2 {
        return Err(OscError::Dimension(d));
    }
    gamma_curve(TransverseFlow::schrodinger(omega_k, params.h), &FrequencyWindow::dispersion(), lambda_grid)
}

pub fn gamma_wave(
    params: &crate::params::SemiclassicalParams,
    omega_k: f64,
    d: u32,
    lambda_grid: &[f64],
) -> Result<DispersionCurve, OscError> {
    if d != 2 {
        return Err(OscError::Dimension(d));
    }
    gamma_curve(TransverseFlow::halfwave(omega_k, params.h), &FrequencyWindow::dispersion(), lambda_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gaussian(lambda: f64) -> OscillatoryProblem {
        OscillatoryProblem::new(|x| 0.5 * x * x, |x| (-0.5 * x * x).exp(), lambda, (-10.0, 10.0))
    }

    fn gaussian_exact(lambda: f64) -> Complex64 {
        (Complex64::new(2.0 * PI, 0.0) / Complex64::new(1.0, -lambda)).sqrt()
    }

    #[test]
    fn gauss_legendre_exact_on_polynomials() {
        let gl = GaussLegendre::new(7);
        let v = gl.integrate(0.0, 2.0, |x| Complex64::new(x.powi(13), 0.0));
        assert!((v.re - 2f64.powi(14) / 14.0).abs() < 1e-9);
    }

    #[test]
    fn quad_matches_gaussian_closed_form() {
        let v = quad_oscillatory(&gaussian(50.0), 1e-10).unwrap();
        assert!((v - gaussian_exact(50.0)).norm() < 1e-8, "{v} vs {}", gaussian_exact(50.0));
    }

    #[test]
    fn quad_trivial_cases() {
        let zero = OscillatoryProblem::new(|x| x * x, |_| 0.0, 100.0, (-1.0, 1.0));
        assert_eq!(quad_oscillatory(&zero, 1e-10).unwrap(), Complex64::new(0.0, 0.0));
        let flat = |lam| OscillatoryProblem::new(|_| 0.0, |x: f64| (1.0 - x * x).max(0.0), lam, (-1.0, 1.0));
        for lam in [1.0, 1e3] {
            let v = quad_oscillatory(&flat(lam), 1e-10).unwrap();
            assert!((v.re - 4.0 / 3.0).abs() < 1e-10 && v.im.abs() < 1e-12);
        }
        assert!(matches!(quad_oscillatory(&gaussian(1.0), 1e-14), Err(OscError::Tolerance(_))));
    }

    #[test]
    fn quad_is_linear_in_amplitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let (c1, c2): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let f1 = |x: f64| (-(x - 0.3).powi(2)).exp();
            let f2 = |x: f64| (x * 3.0).cos() * (-x * x).exp();
            let ph = |x: f64| x.powi(3) / 3.0 + x;
            let p = |f: Arc<dyn Fn(f64) -> f64 + Send + Sync>| OscillatoryProblem {
                phase: Arc::new(ph),
                amplitude: f,
                large_param: 40.0,
                domain: (-6.0, 6.0),
            };
            let a = quad_oscillatory(&p(Arc::new(f1)), 1e-12).unwrap();
            let b = quad_oscillatory(&p(Arc::new(f2)), 1e-12).unwrap();
            let ab = quad_oscillatory(&p(Arc::new(move |x| c1 * f1(x) + c2 * f2(x))), 1e-12).unwrap();
            let combo = a * c1 + b * c2;
            assert!((ab - combo).norm() <= 1e-10 * combo.norm().max(1e-2));
        }
    }

    #[test]
    fn leading_term_is_amplitude_at_critical_point() {
        let sp = stationary_phase(&gaussian(100.0), 1).unwrap();
        assert!((sp.terms[0].re - 1.0).abs() < 1e-10 && sp.terms[0].im.abs() < 1e-12);
        assert!(sp.critical_point.abs() < 1e-9);
        assert!((sp.second_derivative - 1.0).abs() < 1e-9);
    }

    #[test]
    fn first_correction_decays_like_inverse_omega() {
        let err = |lam: f64| (stationary_phase(&gaussian(lam), 1).unwrap().value - gaussian_exact(lam)).norm();
        let (e50, e100) = (err(50.0), err(100.0));
        assert!(e100 <= 5.0 * e50 / 2.0);
        assert!(e100 < 0.6 * e50, "ratio {}", e100 / e50);
    }

    #[test]
    fn gaussian_expansion_reproduces_exact_series() {
        let sp = stationary_phase(&gaussian(200.0), 3).unwrap();
        let exact = gaussian_exact(200.0);
        assert!((sp.value - exact).norm() < sp.error_bound);
        assert!((sp.value - exact).norm() < 1e-7);
    }

    #[test]
    fn fold_is_rejected() {
        let p = OscillatoryProblem::new(|u| u.powi(3) / 3.0, |u| (1.0 - u * u).max(0.0).powi(3), 50.0, (-1.0, 1.0));
        assert!(matches!(stationary_phase(&p, 1), Err(OscError::Degenerate { .. })));
        let q = OscillatoryProblem::new(|u| u.powi(4), |_| 1.0, 50.0, (-1.0, 1.0));
        assert!(matches!(stationary_phase(&q, 1), Err(OscError::Degenerate { .. })));
    }

    #[test]
    fn several_critical_points_are_rejected() {
        let p = OscillatoryProblem::new(|u| u.cos(), |_| 1.0, 50.0, (-4.0, 4.0));
        assert!(matches!(stationary_phase(&p, 1), Err(OscError::MultipleCritical { .. })));
    }

    #[test]
    fn schrodinger_gamma_zero_window() {
        let flow = TransverseFlow::schrodinger(2.338, 1e-3);
        let w = FrequencyWindow::zero();
        let c = gamma_curve(flow, &w, &[10.0]).unwrap();
        assert_eq!(c.samples[0].gamma, 0.0);
    }

    #[test]
    fn small_lambda_gamma_bounded_by_window_mass() {
        let flow = TransverseFlow::schrodinger(2.338, 1e-3);
        let w = FrequencyWindow::dispersion();
        let mass = w.mass();
        let c = gamma_curve(flow, &w, &[0.5, 1.0]).unwrap();
        for s in &c.samples {
            assert!(s.gamma <= mass * (1.0 + 1e-9));
        }
    }
}
