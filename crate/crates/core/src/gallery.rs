//! Whispering-gallery modes Ai(|η|^{2/3}x/h^{2/3} - ω_k) with transverse envelopes, their
//! Schrödinger and half-wave evolutions, and the Strichartz quotients they realize.

use crate::airy::{self, ai_pair, omega};
use crate::field::{EtaGrid, Grid, Synthesizer, WaveField};
use crate::normlab::{self, lqlr_from_norms, lr_norm, lr_norm_1d, NormScanResult};
use crate::oscillatory::FlowKind;
use crate::params::{check_admissible, ParamError};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GalleryError {
    #[error("window needs 0 < inner < outer < 1, got ({0}, {1})")]
    Window(f64, f64),
    #[error("windows are not nested (need psi1 = 1 on supp psi... psi = 1 on supp psi1, psi2 = 1 on supp psi)")]
    NotNested,
    #[error("eta = 0 is excluded")]
    ZeroFrequency,
    #[error("x-grid too short: {fraction:.3e} of the mass lies beyond x = {x_max:e}")]
    TailMass { fraction: f64, x_max: f64 },
    #[error("x-grid must reach 3 omega h^(2/3) = {need:e}, got {got:e}")]
    GridTooShort { need: f64, got: f64 },
    #[error("y-grid has {ny} points but the spectrum has {len}")]
    YGrid { ny: usize, len: usize },
    #[error("envelope is identically zero")]
    ZeroData,
    #[error("h must lie in (0, 1], got {0}")]
    BadH(f64),
    #[error("({q}, {r}) is not admissible for this flow")]
    NotAdmissible { q: f64, r: f64 },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Norm(#[from] normlab::NormError),
}

/// Smooth cutoff around η = 1: equal to 1 for |η-1| <= inner and to 0 for |η-1| >= outer.
/// `order` 0 uses the C^∞ exponential transition, k >= 1 the C^k polynomial smoothstep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyWindow {
    pub inner: f64,
    pub outer: f64,
    pub order: u32,
    #[serde(default = "one")]
    pub height: f64,
}

fn one() -> f64 {
    1.0
}

pub(crate) fn smooth_transition(s: f64, order: u32) -> f64 {
    let s = s.clamp(0.0, 1.0);
    if order == 0 {
        let g = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
        let (a, b) = (g(1.0 - s), g(s));
        a / (a + b)
    } else {
        // 1 - S_k(s), S_k the C^k smoothstep
        let k = order as i64;
        let binom = |n: i64, r: i64| -> f64 { (0..r).map(|i| (n - i) as f64 / (i + 1) as f64).product() };
        let poly: f64 = (0..=k).map(|j| binom(k + j, j) * binom(2 * k + 1, k - j) * (-s).powi(j as i32)).sum();
        1.0 - s.powi(k as i32 + 1) * poly
    }
}

impl FrequencyWindow {
    pub fn new(inner: f64, outer: f64, order: u32) -> Result<Self, GalleryError> {
        if !(0.0 < inner && inner < outer && outer < 1.0) {
            return Err(GalleryError::Window(inner, outer));
        }
        Ok(Self { inner, outer, order, height: 1.0 })
    }

    /// Window shared by the gallery experiments.
    pub fn standard() -> Self {
        Self { inner: 0.25, outer: 0.5, order: 0, height: 1.0 }
    }

    /// Window used for the dispersive suprema.
    pub fn dispersion() -> Self {
        Self::standard()
    }

    /// Ψ of the cusp construction.
    pub fn cusp() -> Self {
        Self { inner: 0.1, outer: 0.2, order: 0, height: 1.0 }
    }

    pub fn zero() -> Self {
        Self { height: 0.0, ..Self::standard() }
    }

    pub fn eval(&self, eta: f64) -> f64 {
        let s = ((eta - 1.0).abs() - self.inner) / (self.outer - self.inner);
        self.height * smooth_transition(s, self.order)
    }

    pub fn support(&self) -> (f64, f64) {
        (1.0 - self.outer, 1.0 + self.outer)
    }

    pub fn mass(&self) -> f64 {
        let (lo, hi) = self.support();
        let n = 4000;
        let step = (hi - lo) / n as f64;
        (0..n).map(|i| self.eval(lo + (i as f64 + 0.5) * step)).sum::<f64>() * step
    }

    /// ψ1 ψ = ψ1 and ψ ψ2 = ψ.
    pub fn nested(inner: &Self, mid: &Self, outer: &Self) -> bool {
        inner.outer <= mid.inner && mid.outer <= outer.inner
    }
}

pub fn eigenvalue(k: usize, eta: f64) -> Result<f64, GalleryError> {
    if eta == 0.0 {
        return Err(GalleryError::ZeroFrequency);
    }
    Ok(eta * eta + omega(k) * eta.abs().powf(4.0 / 3.0))
}

/// Transverse symbol G_s(η) = η² + ω h^{2/3}|η|^{4/3} or G_w = √G_s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseFlow {
    pub kind: FlowKind,
    pub omega: f64,
    pub h: f64,
}

impl TransverseFlow {
    pub fn schrodinger(omega: f64, h: f64) -> Self {
        Self { kind: FlowKind::Schrodinger, omega, h }
    }

    pub fn halfwave(omega: f64, h: f64) -> Self {
        Self { kind: FlowKind::Wave, omega, h }
    }

    pub fn kind_tag(&self) -> FlowKind {
        self.kind
    }

    fn schrodinger_symbol(&self, eta: f64) -> (f64, f64) {
        let c = self.omega * self.h.powf(2.0 / 3.0);
        let e = eta.abs();
        (e * e + c * e.powf(4.0 / 3.0), eta.signum() * (2.0 * e + 4.0 / 3.0 * c * e.powf(1.0 / 3.0)))
    }

    pub fn symbol(&self, eta: f64) -> f64 {
        let (g, _) = self.schrodinger_symbol(eta);
        match self.kind {
            FlowKind::Schrodinger => g,
            FlowKind::Wave => g.sqrt(),
        }
    }

    /// G'(η).
    pub fn group_velocity(&self, eta: f64) -> f64 {
        let (g, dg) = self.schrodinger_symbol(eta);
        match self.kind {
            FlowKind::Schrodinger => dg,
            FlowKind::Wave => 0.5 * dg / g.sqrt(),
        }
    }
}

/// How the transverse spectrum is advanced in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Propagator {
    /// e^{itG/h}; for the wave symbol this is the single half-wave exponential.
    Exponential,
    /// cos(tG/h), the wave solution with zero initial velocity.
    Cosine,
}

impl Propagator {
    pub fn for_flow(kind: FlowKind) -> Self {
        match kind {
            FlowKind::Schrodinger => Propagator::Exponential,
            FlowKind::Wave => Propagator::Cosine,
        }
    }

    fn multiplier(&self, phase: f64) -> Complex64 {
        match self {
            Propagator::Exponential => Complex64::from_polar(1.0, phase),
            Propagator::Cosine => Complex64::new(phase.cos(), 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryModeSpec {
    pub k: usize,
    pub omega_k: f64,
    pub h: f64,
    pub eta: EtaGrid,
    /// φ̂(η) with φ(y) = (1/2πh) ∫ e^{iyη/h} φ̂(η) dη.
    pub envelope_spectrum: Vec<Complex64>,
}

/// Spectral reach of a coherent state, in units of √h.
const COHERENT_REACH: f64 = 9.0;

impl GalleryModeSpec {
    pub fn from_spectrum(k: usize, h: f64, eta: EtaGrid, spectrum: Vec<Complex64>) -> Result<Self, GalleryError> {
        if !(h > 0.0 && h <= 1.0) {
            return Err(GalleryError::BadH(h));
        }
        assert_eq!(eta.len, spectrum.len());
        Ok(Self { k, omega_k: omega(k), h, eta, envelope_spectrum: spectrum })
    }

    /// Mode with coherent-state envelope h^{-1/4} e^{iyη0/h - y²/2h}; the y period is `y_len`.
    pub fn coherent(k: usize, h: f64, eta0: f64, y_len: f64) -> Result<Self, GalleryError> {
        let step = 2.0 * PI * h / y_len;
        let reach = COHERENT_REACH * h.sqrt();
        let eta = EtaGrid::covering((eta0 - reach).max(0.05), eta0 + reach, step);
        let spectrum = eta.iter().map(|e| Complex64::new(coherent_spectrum(eta0, h, e), 0.0)).collect();
        Self::from_spectrum(k, h, eta, spectrum)
    }

    /// ψ(hD_y) applied to the envelope.
    pub fn filtered(&self, w: &FrequencyWindow) -> Self {
        let mut out = self.clone();
        for (j, v) in out.envelope_spectrum.iter_mut().enumerate() {
            *v *= w.eval(self.eta.eta(j));
        }
        out
    }

    pub fn y_period(&self) -> f64 {
        self.eta.period(self.h)
    }

    fn eta_min(&self) -> f64 {
        self.eta.iter().zip(&self.envelope_spectrum).filter(|(_, v)| v.norm() > 0.0).map(|(e, _)| e).fold(f64::INFINITY, f64::min)
    }

    /// ∫_0^X |u|² dx dy computed from the spectrum (exact Airy antiderivative in x).
    pub fn spectral_l2_sq(&self, x_max: f64) -> f64 {
        let h23 = self.h.powf(2.0 / 3.0);
        let prim = |s: f64| {
            let (a, ap) = ai_pair(s);
            s * a * a - ap * ap
        };
        let mut total = 0.0;
        for (e, v) in self.eta.iter().zip(&self.envelope_spectrum) {
            if v.norm() == 0.0 {
                continue;
            }
            let scale = (self.h / e.abs()).powf(2.0 / 3.0);
            let s_max = e.abs().powf(2.0 / 3.0) * x_max / h23 - self.omega_k;
            total += v.norm_sqr() * scale * (prim(s_max) - prim(-self.omega_k));
        }
        total * self.eta.step / (2.0 * PI * self.h)
    }

    /// Fraction of the x-mass beyond `x_max` at the smallest populated η.
    pub fn tail_fraction(&self, x_max: f64) -> f64 {
        let e = self.eta_min();
        if !e.is_finite() {
            return 0.0;
        }
        let s = e.powf(2.0 / 3.0) * x_max / self.h.powf(2.0 / 3.0) - self.omega_k;
        let (a, ap) = ai_pair(s);
        let (_, ap0) = ai_pair(-self.omega_k);
        ((ap * ap - s * a * a) / (ap0 * ap0)).max(0.0)
    }
}

pub fn coherent_spectrum(eta0: f64, h: f64, eta: f64) -> f64 {
    h.powf(-0.25) * (2.0 * PI * h).sqrt() * (-(eta - eta0).powi(2) / (2.0 * h)).exp()
}

/// Grid request for a gallery field: x in [0, x_max] with nx points, y window of one
/// spectral period centred at `y_center` with ny points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeGrid {
    pub x_max: f64,
    pub nx: usize,
    pub y_center: f64,
    pub ny: usize,
}

impl ModeGrid {
    /// x out to s = ω + 12 on the Airy scale with ten points per h^{2/3}; ny the next power
    /// of two above 4 x (spectral points).
    pub fn auto(spec: &GalleryModeSpec, y_center: f64) -> Self {
        let h23 = spec.h.powf(2.0 / 3.0);
        let e = spec.eta_min().clamp(0.05, 1.0);
        let x_max = (spec.omega_k + 12.0) * h23 / e.powf(2.0 / 3.0);
        let nx = (x_max / (h23 / 10.0)).ceil() as usize + 1;
        let ny = (4 * spec.eta.len).next_power_of_two().max(64);
        Self { x_max, nx, y_center, ny }
    }
}

fn build_field(
    spec: &GalleryModeSpec,
    grid: &ModeGrid,
    t: f64,
    multiplier: impl Fn(f64) -> Complex64 + Sync,
) -> Result<WaveField, GalleryError> {
    let h23 = spec.h.powf(2.0 / 3.0);
    if grid.x_max < 3.0 * spec.omega_k * h23 {
        return Err(GalleryError::GridTooShort { need: 3.0 * spec.omega_k * h23, got: grid.x_max });
    }
    let frac = spec.tail_fraction(grid.x_max);
    if frac > 0.01 {
        return Err(GalleryError::TailMass { fraction: frac, x_max: grid.x_max });
    }
    if grid.ny < spec.eta.len {
        return Err(GalleryError::YGrid { ny: grid.ny, len: spec.eta.len });
    }
    let period = spec.y_period();
    let y0 = grid.y_center - 0.5 * period;
    let syn = Synthesizer::new(spec.eta, spec.h, y0, grid.ny);
    let dx = grid.x_max / (grid.nx - 1) as f64;
    let g = Grid { x0: 0.0, dx, nx: grid.nx, y0, dy: syn.dy(), ny: grid.ny };
    let mut field = WaveField::zeros(g, t, syn.carrier());
    let weighted: Vec<(f64, Complex64)> = spec
        .eta
        .iter()
        .zip(&spec.envelope_spectrum)
        .map(|(e, v)| (e.abs().powf(2.0 / 3.0) / h23, v * multiplier(e)))
        .collect();
    let table = airy::shared_table();
    field.values.par_chunks_mut(grid.ny).enumerate().for_each(|(ix, row)| {
        let x = ix as f64 * dx;
        let rowspec: Vec<Complex64> =
            weighted.iter().map(|(c, v)| if v.norm() == 0.0 { *v } else { v * table.eval(c * x - spec.omega_k) }).collect();
        syn.run(&rowspec, row);
    });
    Ok(field)
}

pub fn gallery_mode(spec: &GalleryModeSpec, grid: &ModeGrid) -> Result<WaveField, GalleryError> {
    build_field(spec, grid, 0.0, |_| Complex64::new(1.0, 0.0))
}

pub fn evolve(spec: &GalleryModeSpec, flow: &TransverseFlow, t: f64, grid: &ModeGrid) -> Result<WaveField, GalleryError> {
    evolve_with(spec, flow, Propagator::for_flow(flow.kind), t, grid)
}

pub fn evolve_with(
    spec: &GalleryModeSpec,
    flow: &TransverseFlow,
    prop: Propagator,
    t: f64,
    grid: &ModeGrid,
) -> Result<WaveField, GalleryError> {
    let h = spec.h;
    build_field(spec, grid, t, |e| prop.multiplier(t * flow.symbol(e) / h))
}

/// A y-only field (envelope times carrier e^{i carrier y}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransverseField {
    pub y0: f64,
    pub dy: f64,
    pub carrier: f64,
    pub values: Vec<Complex64>,
}

/// Coherent state h^{-1/4} e^{iyη0/h - y²/2h} sampled on `ny` points of [y0, y0 + ny dy).
pub fn coherent_state(eta0: f64, h: f64, y0: f64, dy: f64, ny: usize) -> TransverseField {
    let values = (0..ny)
        .map(|j| {
            let y = y0 + j as f64 * dy;
            Complex64::new(h.powf(-0.25) * (-y * y / (2.0 * h)).exp(), 0.0)
        })
        .collect();
    TransverseField { y0, dy, carrier: eta0 / h, values }
}

fn transverse(spec: &GalleryModeSpec, w: &FrequencyWindow, ny: usize) -> TransverseField {
    let period = spec.y_period();
    let syn = Synthesizer::new(spec.eta, spec.h, -0.5 * period, ny);
    let s: Vec<Complex64> =
        spec.eta.iter().zip(&spec.envelope_spectrum).map(|(e, v)| v * w.eval(e)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); ny];
    syn.run(&s, &mut out);
    TransverseField { y0: -0.5 * period, dy: syn.dy(), carrier: syn.carrier(), values: out }
}

/// (h^{-2/3r}‖ψ(hD)u‖ / ‖ψ1(hD)φ‖, ‖ψ2(hD)φ‖ / h^{-2/3r}‖ψ(hD)u‖); r = ∞ allowed.
pub fn norm_equivalence(
    spec: &GalleryModeSpec,
    r: f64,
    psi1: &FrequencyWindow,
    psi: &FrequencyWindow,
    psi2: &FrequencyWindow,
) -> Result<(f64, f64), GalleryError> {
    if !FrequencyWindow::nested(psi1, psi, psi2) {
        return Err(GalleryError::NotNested);
    }
    if spec.envelope_spectrum.iter().all(|v| v.norm() == 0.0) {
        return Err(GalleryError::ZeroData);
    }
    let grid = ModeGrid::auto(spec, 0.0);
    let u = gallery_mode(&spec.filtered(psi), &grid)?;
    let scale = if r.is_infinite() { 1.0 } else { spec.h.powf(-2.0 / (3.0 * r)) };
    let mid = scale * lr_norm(&u, r)?;
    let left = lr_norm_1d(&transverse(spec, psi1, grid.ny), r)?;
    let right = lr_norm_1d(&transverse(spec, psi2, grid.ny), r)?;
    if left == 0.0 || mid == 0.0 {
        return Err(GalleryError::ZeroData);
    }
    Ok((mid / left, right / mid))
}

/// Coherent-state data for the quotient scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientConfig {
    pub k: usize,
    pub eta0: f64,
    pub window: FrequencyWindow,
    pub t_window: (f64, f64),
    pub time_samples: usize,
}

impl Default for QuotientConfig {
    fn default() -> Self {
        Self { k: 0, eta0: 1.0, window: FrequencyWindow::standard(), t_window: (0.0, 1.0), time_samples: 48 }
    }
}

/// Per-h value of ‖u‖_{L^q_t L^r} / ‖u(0)‖_{L²} and whether the grid checks held.
pub fn quotient_at(kind: FlowKind, cfg: &QuotientConfig, q: f64, r: f64, h: f64) -> Result<(f64, bool), GalleryError> {
    let (t0, t1) = cfg.t_window;
    let tmax = t0.abs().max(t1.abs());
    let sh = h.sqrt();
    let flow = match kind {
        FlowKind::Schrodinger => TransverseFlow::schrodinger(omega(cfg.k), h),
        FlowKind::Wave => TransverseFlow::halfwave(omega(cfg.k), h),
    };
    let speed = flow.group_velocity(cfg.eta0).abs();
    // Schrödinger: one packet followed in a moving frame; wave: two packets at ±t
    let y_len = match kind {
        FlowKind::Schrodinger => 16.0 * sh * (1.0 + 4.0 * tmax * tmax).sqrt(),
        FlowKind::Wave => 2.0 * speed * tmax + 20.0 * sh,
    };
    let spec = GalleryModeSpec::coherent(cfg.k, h, cfg.eta0, y_len)?.filtered(&cfg.window);
    let base = ModeGrid::auto(&spec, 0.0);
    let n = cfg.time_samples.max(2);
    let times: Vec<f64> = (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect();
    let prop = Propagator::for_flow(kind);
    let norms: Vec<f64> = times
        .iter()
        .map(|&t| {
            let center = match kind {
                FlowKind::Schrodinger => -flow.group_velocity(cfg.eta0) * t,
                FlowKind::Wave => 0.0,
            };
            let f = evolve_with(&spec, &flow, prop, t, &ModeGrid { y_center: center, ..base })?;
            Ok(lr_norm(&f, r)?)
        })
        .collect::<Result<_, GalleryError>>()?;
    let u0 = gallery_mode(&spec, &base)?;
    let l2 = lr_norm(&u0, 2.0)?;
    let spectral = spec.spectral_l2_sq(base.x_max).sqrt();
    let reliable = (l2 / spectral - 1.0).abs() < 0.01 && spec.tail_fraction(base.x_max) < 0.01;
    let num = lqlr_from_norms(&times, &norms, q, None)?;
    Ok((num / l2, reliable))
}

pub fn strichartz_quotient(
    kind: FlowKind,
    cfg: &QuotientConfig,
    q: f64,
    r: f64,
    h_list: &[f64],
) -> Result<NormScanResult, GalleryError> {
    let alpha = match kind {
        FlowKind::Schrodinger => 1.0,
        FlowKind::Wave => 0.5,
    };
    if check_admissible(q, r, alpha)?.is_none() {
        return Err(GalleryError::NotAdmissible { q, r });
    }
    let mut samples = Vec::with_capacity(h_list.len());
    let mut reliable = true;
    for &h in h_list {
        let (v, ok) = quotient_at(kind, cfg, q, r, h)?;
        reliable &= ok;
        samples.push((h, v));
    }
    Ok(NormScanResult::from_samples(q, r, cfg.t_window, samples, reliable))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normlab::lr_norm;

    #[test]
    fn window_shape() {
        let w = FrequencyWindow::standard();
        assert_eq!(w.eval(1.0), 1.0);
        assert_eq!(w.eval(1.25), 1.0);
        assert_eq!(w.eval(0.5), 0.0);
        assert_eq!(w.eval(0.0), 0.0);
        for i in 0..200 {
            let v = w.eval(0.4 + i as f64 * 0.006);
            assert!((0.0..=1.0).contains(&v));
        }
        assert!(FrequencyWindow::new(0.5, 0.4, 0).is_err());
        let c4 = FrequencyWindow::new(0.1, 0.2, 4).unwrap();
        assert!((c4.eval(1.15) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_formula() {
        assert!((eigenvalue(0, 1.0).unwrap() - (1.0 + omega(0))).abs() < 1e-14);
        assert!(eigenvalue(3, 1.0).unwrap() > eigenvalue(2, 1.0).unwrap());
        assert_eq!(eigenvalue(0, 0.0), Err(GalleryError::ZeroFrequency));
    }

    fn spec(h: f64) -> GalleryModeSpec {
        GalleryModeSpec::coherent(0, h, 1.0, 24.0 * h.sqrt()).unwrap()
    }

    #[test]
    fn zero_envelope_gives_zero_field() {
        let mut s = spec(1e-3);
        s.envelope_spectrum.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let f = gallery_mode(&s, &ModeGrid::auto(&s, 0.0)).unwrap();
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn dirichlet_and_single_maximum() {
        let s = spec(1e-3);
        let f = gallery_mode(&s, &ModeGrid::auto(&s, 0.0)).unwrap();
        let peak = f.max_abs();
        assert!(f.row(0).iter().all(|v| v.norm() <= 1e-8 * peak));
        // x-profile through the packet centre
        let iy = (0..f.grid.ny).min_by(|a, b| f.grid.y(*a).abs().total_cmp(&f.grid.y(*b).abs())).unwrap();
        let prof: Vec<f64> = (0..f.grid.nx).map(|ix| f.at(ix, iy).norm()).collect();
        let maxima = (1..prof.len() - 1).filter(|&i| prof[i] > prof[i - 1] && prof[i] >= prof[i + 1]).count();
        assert_eq!(maxima, 1);
    }

    #[test]
    fn too_short_grid_is_rejected() {
        let s = spec(1e-3);
        let mut g = ModeGrid::auto(&s, 0.0);
        g.x_max = 2.9 * s.omega_k * 1e-2;
        assert!(matches!(gallery_mode(&s, &g), Err(GalleryError::GridTooShort { .. })));
        assert!(s.tail_fraction(1.2 * s.omega_k * 1e-2) > 0.01);
    }

    #[test]
    fn plancherel_and_unitarity() {
        let s = spec(2f64.powi(-10));
        let mut g = ModeGrid::auto(&s, 0.0);
        g.nx *= 4;
        let spectral = s.spectral_l2_sq(g.x_max);
        let flow = TransverseFlow::schrodinger(s.omega_k, s.h);
        for t in [0.0, 0.3] {
            let f = evolve(&s, &flow, t, &ModeGrid { y_center: -flow.group_velocity(1.0) * t, ..g }).unwrap();
            let l2 = lr_norm(&f, 2.0).unwrap().powi(2);
            assert!((l2 / spectral - 1.0).abs() < 1e-8, "t={t}: {}", l2 / spectral - 1.0);
        }
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let s = spec(1e-3);
        let g = ModeGrid::auto(&s, 0.0);
        let a = gallery_mode(&s, &g).unwrap();
        for flow in [TransverseFlow::schrodinger(s.omega_k, s.h), TransverseFlow::halfwave(s.omega_k, s.h)] {
            let b = evolve(&s, &flow, 0.0, &g).unwrap();
            assert_eq!(a.values, b.values);
        }
    }

    #[test]
    fn coherent_state_norms() {
        let h: f64 = 1e-3;
        let sh = h.sqrt();
        let c = coherent_state(1.0, h, -20.0 * sh, sh / 50.0, 2000);
        let l2 = lr_norm_1d(&c, 2.0).unwrap();
        assert!((l2 - PI.powf(0.25)).abs() < 1e-6);
        let linf = lr_norm_1d(&c, f64::INFINITY).unwrap();
        assert!((linf - h.powf(-0.25)).abs() < 1e-12);
    }

    #[test]
    fn halfwave_splits_into_two_packets() {
        let h = 2f64.powi(-12);
        let t = 0.2;
        let s = GalleryModeSpec::coherent(0, h, 1.0, 2.0 * t + 30.0 * h.sqrt()).unwrap();
        let flow = TransverseFlow::halfwave(s.omega_k, h);
        let f = evolve(&s, &flow, t, &ModeGrid::auto(&s, 0.0)).unwrap();
        // centroid of |u|² on each half-line of y
        let (mut m, mut c) = ([0.0; 2], [0.0; 2]);
        for ix in 0..f.grid.nx {
            for iy in 0..f.grid.ny {
                let y = f.grid.y(iy);
                let w = f.at(ix, iy).norm_sqr();
                let side = usize::from(y > 0.0);
                m[side] += w;
                c[side] += w * y;
            }
        }
        let speed = flow.group_velocity(1.0);
        let fd = (flow.symbol(1.0 + 1e-6) - flow.symbol(1.0 - 1e-6)) / 2e-6;
        assert!((speed - fd).abs() < 1e-6);
        assert!((m[0] / m[1] - 1.0).abs() < 1e-3);
        assert!((c[1] / m[1] - speed * t).abs() < 5e-3, "{} vs {}", c[1] / m[1], speed * t);
        assert!((c[0] / m[0] + speed * t).abs() < 5e-3);
    }

    #[test]
    fn norm_sandwich_bounded_in_h() {
        let psi1 = FrequencyWindow::new(0.05, 0.1, 0).unwrap();
        let psi = FrequencyWindow::new(0.1, 0.2, 0).unwrap();
        let psi2 = FrequencyWindow::new(0.2, 0.4, 0).unwrap();
        for r in [2.0, f64::INFINITY] {
            for e in [8, 11, 14] {
                let h = 2f64.powi(-e);
                let (lo, hi) = norm_equivalence(&spec(h), r, &psi1, &psi, &psi2).unwrap();
                assert!((0.5..=20.0).contains(&lo) && (0.5..=20.0).contains(&hi), "r={r} h=2^-{e}: {lo} {hi}");
            }
        }
        assert_eq!(norm_equivalence(&spec(1e-3), 2.0, &psi, &psi1, &psi2), Err(GalleryError::NotNested));
    }

    #[test]
    fn energy_pair_quotient_is_one() {
        let cfg = QuotientConfig { time_samples: 6, ..Default::default() };
        let (v, ok) = quotient_at(FlowKind::Schrodinger, &cfg, f64::INFINITY, 2.0, 2f64.powi(-10)).unwrap();
        assert!(ok);
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }
}
