//! Cusp packets u^n of the model domain x > 0 with metric -Δ_(x,y) + x∂_y², the reflected
//! symbols ϱ^n, boundary traces and residuals, and the billiard maps on the glancing set.
//!
//! Each packet is evaluated in Airy-reduced form: for fixed η the x-dependence is a
//! superposition of Ai((η/h)^{2/3}(x-a) + (ηλ)^{-1/3}ξ) over the symbol's spectrum ξ,
//! and the y-dependence comes from one inverse FFT over η.

use crate::airy::{shared_table, AiryBranchExpansion, AiryError, Branch};
use crate::field::{EtaGrid, Grid, Synthesizer, WaveField};
use crate::gallery::{smooth_transition, FrequencyWindow};
use crate::oscillatory::GaussLegendre;
use crate::params::{ParamError, SemiclassicalParams};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;
use thiserror::Error;

pub use crate::params::reflection_count;

/// Which side of a reflection: `Plus` is incoming, `Minus` outgoing.
pub type Sign = Branch;

#[derive(Debug, Error)]
pub enum CuspError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Airy(#[from] AiryError),
    #[error("symbol support must be [p - c0, p + c0] with integer p, got [{0}, {1}]")]
    Support(f64, f64),
    #[error("z-grid gives {0:.1} points per mollifier width, need at least 8")]
    GridTooCoarse(f64),
    #[error("symbol invariant violated: {0}")]
    Invariant(String),
    #[error("eta*lambda/n = {0:.3} is below 4")]
    Regime(f64),
    #[error("reflection index {n} exceeds N = {max}")]
    TooManyReflections { n: u32, max: u32 },
    #[error("spectral truncation dropped a fraction {0:.2e} of the symbol")]
    Truncation(f64),
    #[error("boundary cutoff clips {0:.3}% of the spectral mass")]
    Clip(f64),
    #[error("gliding point: tau^2 = {tau2} <= eta^2 = {eta2}; the billiard map needs a hyperbolic point tau^2 > eta^2 (gliding means {{p, gamma}} = 0 with {{{{p, gamma}}, p}} > 0)")]
    Gliding { tau2: f64, eta2: f64 },
    #[error("bad cusp config: {0}")]
    Config(String),
}

/// Numerical knobs of the cusp construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CuspConfig {
    /// χ is flat on |ζ| <= chi_c and vanishes for |ζ| >= 2 chi_c.
    pub chi_c: f64,
    pub chi_order: u32,
    /// Terms of the branch series inside the reflection coefficient.
    pub branch_terms: usize,
    /// Terms used when evaluating boundary traces.
    pub trace_terms: usize,
    pub psi: FrequencyWindow,
    /// Minimum period of the z-grid carrying the symbol.
    pub z_period: f64,
    pub reflection_phase: Complex64,
    /// Relative floor below which spectral samples are dropped.
    pub spectral_floor: f64,
    /// x-grid covers [0, x_extent * a] (at least a + 12 h^{2/3}).
    pub x_extent: f64,
    /// x points per h^{2/3}.
    pub x_per_h23: f64,
    /// Extra y-window, in units of h, on top of 6λh.
    pub y_margin: f64,
    /// y points per η sample (rounded up to a power of two overall). |u|^r has r/2 times
    /// the envelope bandwidth, so L^r sums need about r/2 of these.
    pub y_oversample: usize,
}

impl Default for CuspConfig {
    fn default() -> Self {
        Self {
            chi_c: 0.125,
            chi_order: 4,
            branch_terms: 3,
            trace_terms: 6,
            psi: FrequencyWindow::cusp(),
            z_period: 16.0,
            reflection_phase: Complex64::new(0.0, -1.0),
            spectral_floor: 1e-8,
            x_extent: 2.0,
            x_per_h23: 8.0,
            y_margin: 400.0,
            y_oversample: 4,
        }
    }
}

impl CuspConfig {
    fn validate(&self) -> Result<(), CuspError> {
        if !(self.chi_c > 0.0 && self.chi_c <= 0.25) {
            return Err(CuspError::Config(format!("chi_c = {} not in (0, 1/4]", self.chi_c)));
        }
        if !(self.z_period >= 4.0) {
            return Err(CuspError::Config(format!("z_period = {} < 4", self.z_period)));
        }
        if !(self.x_extent > 1.0 && self.x_per_h23 >= 2.0) {
            return Err(CuspError::Config("x-grid too small".into()));
        }
        if !(self.spectral_floor > 0.0 && self.spectral_floor < 1e-2) {
            return Err(CuspError::Config(format!("spectral_floor = {}", self.spectral_floor)));
        }
        Ok(())
    }
}

fn bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

/// Normalizing constant c with c ∫ exp(-1/(1-z²)) dz = 1.
pub fn mollifier_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let gl = GaussLegendre::new(64);
        let panels = 16;
        let mass: f64 = (0..panels)
            .map(|k| {
                let lo = -1.0 + 2.0 * k as f64 / panels as f64;
                gl.integrate(lo, lo + 2.0 / panels as f64, |z| Complex64::new(bump(z), 0.0)).re
            })
            .sum();
        1.0 / mass
    })
}

/// k_λ(z) = λ c exp(-1/(1-(λz)²)).
pub fn mollifier(z: f64, lambda: f64) -> f64 {
    lambda * mollifier_constant() * bump(lambda * z)
}

/// The profile ϱ̃ = exp(-1/(1-((z-p)/c0)²)) before mollification.
pub fn raw_profile(z: f64, center: f64, c0: f64) -> f64 {
    bump((z - center) / c0)
}

/// ϱ = ϱ̃ * k_λ on a periodic z-grid, or one of its reflected iterates ϱ^n(·; η).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspSymbol {
    pub center: i64,
    pub c0: f64,
    pub lambda: f64,
    pub n: u32,
    pub eta: Option<f64>,
    pub z0: f64,
    pub dz: f64,
    /// ϱ(z0 + j dz).
    pub values: Vec<Complex64>,
    /// ϱ̂(ξ_k) = ∫ ϱ e^{-izξ_k} dz in FFT order, ξ_k = 2πk/L.
    pub spectrum: Vec<Complex64>,
    /// sup |∂^α ϱ| for α = 0, 1, 2.
    pub bounds: [f64; 3],
}

impl CuspSymbol {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.dz * self.len() as f64
    }

    pub fn z(&self, j: usize) -> f64 {
        self.z0 + j as f64 * self.dz
    }

    pub fn xi(&self, k: usize) -> f64 {
        let n = self.len() as i64;
        let kk = if (k as i64) < n / 2 { k as i64 } else { k as i64 - n };
        2.0 * PI * kk as f64 / self.period()
    }

    /// Trigonometric interpolation of ϱ at any z.
    pub fn eval(&self, z: f64) -> Complex64 {
        let inv = 1.0 / self.period();
        self.spectrum
            .iter()
            .enumerate()
            .map(|(k, s)| s * Complex64::from_polar(inv, self.xi(k) * z))
            .sum()
    }

    /// ∫ |ϱ| over z outside [p - c0 - pad, p + c0 + pad], relative to ∫ |ϱ|.
    pub fn tail_fraction(&self, pad: f64) -> f64 {
        let p = self.center as f64;
        let (mut tail, mut total) = (0.0, 0.0);
        for (j, v) in self.values.iter().enumerate() {
            let a = v.norm();
            total += a;
            if (self.z(j) - p).abs() > self.c0 + pad {
                tail += a;
            }
        }
        if total > 0.0 {
            tail / total
        } else {
            0.0
        }
    }

    /// Rebuilds values and derivative bounds from `spectrum`.
    fn refresh(&mut self) {
        let n = self.len();
        let inv = FftPlanner::new().plan_fft_inverse(n);
        let l = self.period();
        let mut out = [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]];
        for k in 0..n {
            let xi = self.xi(k);
            let base = self.spectrum[k] * Complex64::from_polar(1.0 / l, xi * self.z0);
            out[0][k] = base;
            out[1][k] = base * Complex64::new(0.0, xi);
            out[2][k] = base * (-xi * xi);
        }
        for buf in out.iter_mut() {
            inv.process(buf);
        }
        for (b, buf) in self.bounds.iter_mut().zip(&out) {
            *b = buf.iter().fold(0.0, |m, v| m.max(v.norm()));
        }
        let [vals, _, _] = out;
        self.values = vals;
    }
}

fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// ϱ for support [p - c0, p + c0] with integer p; the grid period and density follow `cfg`.
pub fn make_symbol(support: (f64, f64), params: &SemiclassicalParams, cfg: &CuspConfig) -> Result<CuspSymbol, CuspError> {
    let (lo, hi) = support;
    let mid = 0.5 * (lo + hi);
    if !((mid - mid.round()).abs() < 1e-9 && (0.5 * (hi - lo) - params.c0).abs() < 1e-9) {
        return Err(CuspError::Support(lo, hi));
    }
    make_symbol_with(mid.round() as i64, params.c0, params.lambda, cfg, None)
}

/// The z-period actually used: `cfg.z_period`, enlarged at small λ where the reflection
/// kernel (only C^k in ζ) decays slowly in z and would wrap around.
pub fn effective_z_period(lambda: f64, cfg: &CuspConfig) -> f64 {
    let need = (320.0 / lambda).max(1.0);
    cfg.z_period.max(2f64.powf(need.log2().ceil()))
}

/// Explicit-grid variant; `nz` defaults to the smallest power of two with dz <= 1/(32λ),
/// which pushes the aliasing error of the discrete mollification below 1e-8.
pub fn make_symbol_with(
    center: i64,
    c0: f64,
    lambda: f64,
    cfg: &CuspConfig,
    nz: Option<usize>,
) -> Result<CuspSymbol, CuspError> {
    cfg.validate()?;
    let l = effective_z_period(lambda, cfg);
    let nz = nz.unwrap_or_else(|| next_pow2((l * 32.0 * lambda).ceil() as usize).max(256));
    let dz = l / nz as f64;
    let per_width = 2.0 / lambda / dz;
    if per_width < 8.0 {
        return Err(CuspError::GridTooCoarse(per_width));
    }
    if !(c0 > 0.0 && c0 + 1.0 / lambda < 0.5 * l - 1.0) {
        return Err(CuspError::Support(center as f64 - c0, center as f64 + c0));
    }
    let p = center as f64;
    let z0 = p - 0.5 * l;
    let fwd = FftPlanner::new().plan_fft_forward(nz);
    let mut prof: Vec<Complex64> = (0..nz).map(|j| Complex64::new(raw_profile(z0 + j as f64 * dz, p, c0), 0.0)).collect();
    let mut kern: Vec<Complex64> = (0..nz)
        .map(|j| {
            let s = if j < nz / 2 { j as f64 } else { j as f64 - nz as f64 };
            Complex64::new(mollifier(s * dz, lambda), 0.0)
        })
        .collect();
    fwd.process(&mut prof);
    fwd.process(&mut kern);
    // the discrete kernel is normalized to unit sum so ∫ϱ = ∫ϱ̃ exactly on the grid
    let k0 = kern[0].re;
    let mut sym = CuspSymbol {
        center,
        c0,
        lambda,
        n: 0,
        eta: None,
        z0,
        dz,
        values: vec![Complex64::new(0.0, 0.0); nz],
        spectrum: Vec::with_capacity(nz),
        bounds: [0.0; 3],
    };
    for k in 0..nz {
        let xi = sym.xi(k);
        sym.spectrum.push(prof[k] * dz * Complex64::from_polar(1.0, -xi * z0) * (kern[k] / k0));
    }
    sym.refresh();
    let tail = sym.tail_fraction(0.2);
    if tail > 0.05 {
        return Err(CuspError::Invariant(format!("mass outside the padded support is {tail:.3}")));
    }
    Ok(sym)
}

/// Reflection coefficient c(ζ; ηλ) and the boundary cutoff χ.
#[derive(Debug, Clone)]
pub struct ReflectionKernel {
    pub chi_c: f64,
    pub chi_order: u32,
    pub phase: Complex64,
    minus: AiryBranchExpansion,
    plus: AiryBranchExpansion,
}

impl ReflectionKernel {
    pub fn new(cfg: &CuspConfig) -> Result<Self, CuspError> {
        cfg.validate()?;
        Ok(Self {
            chi_c: cfg.chi_c,
            chi_order: cfg.chi_order,
            phase: cfg.reflection_phase,
            minus: AiryBranchExpansion::new(Branch::Minus, cfg.branch_terms)?,
            plus: AiryBranchExpansion::new(Branch::Plus, cfg.branch_terms)?,
        })
    }

    pub fn chi(&self, zeta: f64) -> f64 {
        smooth_transition((zeta.abs() - self.chi_c) / self.chi_c, self.chi_order)
    }

    /// χ vanishes for |ζ| at or beyond this.
    pub fn chi_edge(&self) -> f64 {
        2.0 * self.chi_c
    }

    /// Phase of one reflection: 2ζ - (4/3)(1 - (1-ζ)^{3/2}).
    pub fn phase_fn(zeta: f64) -> f64 {
        2.0 * zeta - 4.0 / 3.0 * (1.0 - (1.0 - zeta).powf(1.5))
    }

    /// S_- / S_+ with w^{3/2} = ηλ (1-ζ)^{3/2}.
    pub fn branch_ratio(&self, zeta: f64, eta_lambda: f64) -> Complex64 {
        let w = 1.0 / (eta_lambda * (1.0 - zeta).powf(1.5));
        self.minus.series_at(w) / self.plus.series_at(w)
    }

    pub fn c_symbol(&self, zeta: f64, eta_lambda: f64) -> Complex64 {
        let chi = self.chi(zeta);
        if chi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.phase * chi * chi * self.branch_ratio(zeta, eta_lambda)
    }

    /// Multiplier taking ϱ̂^n to ϱ̂^{n+1} at frequency ξ: -c(ζ) e^{iηλ f(ζ)}, ζ = ξ/(ηλ).
    pub fn step(&self, xi: f64, eta_lambda: f64) -> Complex64 {
        let zeta = xi / eta_lambda;
        let c = self.c_symbol(zeta, eta_lambda);
        if c == Complex64::new(0.0, 0.0) {
            return c;
        }
        -c * Complex64::from_polar(1.0, eta_lambda * Self::phase_fn(zeta))
    }
}

/// ϱ^n(·; η) = Op((-1)^n c^n e^{inηλ f}) ϱ, revalidated with the relaxed constant 4.
pub fn iterate_symbol(
    rho0: &CuspSymbol,
    n: u32,
    eta: f64,
    params: &SemiclassicalParams,
    cfg: &CuspConfig,
) -> Result<CuspSymbol, CuspError> {
    if n > params.n_reflections {
        return Err(CuspError::TooManyReflections { n, max: params.n_reflections });
    }
    let el = eta * params.lambda;
    if n > 0 && el / (n as f64) < 4.0 {
        return Err(CuspError::Regime(el / n as f64));
    }
    let kernel = ReflectionKernel::new(cfg)?;
    let mut out = rho0.clone();
    out.n = n;
    out.eta = Some(eta);
    for k in 0..out.len() {
        let m = kernel.step(out.xi(k), el);
        out.spectrum[k] = rho0.spectrum[k] * m.powu(n);
    }
    out.refresh();
    for (alpha, (&got, &base)) in out.bounds.iter().zip(&rho0.bounds).enumerate() {
        if got > 4.0 * base + 1e-12 {
            return Err(CuspError::Invariant(format!("sup |d^{alpha} rho^{n}| = {got:.3e} exceeds 4 x {base:.3e}")));
        }
    }
    Ok(out)
}

/// One η-slice of a packet's spectrum: weights ϱ̂^n(ξ_k) Δξ/2π on a contiguous ξ range.
#[derive(Debug, Clone)]
struct Row {
    eta: f64,
    /// Ψ(η) (h/η)^{1/3} e^{i(4/3)nηλ}.
    prefactor: Complex64,
    xi0: f64,
    weights: Vec<Complex64>,
}

#[derive(Debug, Clone)]
struct Piece {
    rows: Vec<Row>,
    dropped: f64,
    clip: f64,
}

/// Boundary values of one branch of u^n, sampled on the model's y-window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSignal {
    pub n: u32,
    pub sign: Sign,
    pub t: f64,
    pub y0: f64,
    pub dy: f64,
    pub carrier: f64,
    pub values: Vec<Complex64>,
    /// Fraction of the spectral mass removed by χ.
    pub clip: f64,
}

impl TraceSignal {
    pub fn l2(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dy).sqrt()
    }
}

/// All packets u^0..u^N for one parameter set, with per-n spectra built lazily.
pub struct CuspModel {
    params: SemiclassicalParams,
    cfg: CuspConfig,
    kernel: ReflectionKernel,
    traces: [AiryBranchExpansion; 2],
    symbol: CuspSymbol,
    eta: EtaGrid,
    ny: usize,
    dx: f64,
    nx: usize,
    pieces: Vec<OnceLock<Piece>>,
}

impl CuspModel {
    pub fn new(params: &SemiclassicalParams, cfg: &CuspConfig) -> Result<Self, CuspError> {
        cfg.validate()?;
        let h = params.h;
        let symbol = make_symbol_with(0, params.c0, params.lambda, cfg, None)?;
        let y_len = 6.0 * params.lambda * h + cfg.y_margin * h;
        let (lo, hi) = cfg.psi.support();
        let eta = EtaGrid::covering(lo, hi, 2.0 * PI * h / y_len);
        let ny = next_pow2(cfg.y_oversample.max(1) * eta.len).max(64);
        let h23 = h.powf(2.0 / 3.0);
        let dx = h23 / cfg.x_per_h23;
        let x_max = (cfg.x_extent * params.a).max(params.a + 12.0 * h23);
        let nx = (x_max / dx).ceil() as usize + 1;
        Ok(Self {
            params: params.clone(),
            cfg: *cfg,
            kernel: ReflectionKernel::new(cfg)?,
            traces: [
                AiryBranchExpansion::new(Branch::Plus, cfg.trace_terms)?,
                AiryBranchExpansion::new(Branch::Minus, cfg.trace_terms)?,
            ],
            symbol,
            eta,
            ny,
            dx,
            nx,
            pieces: (0..=params.n_reflections).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn params(&self) -> &SemiclassicalParams {
        &self.params
    }

    pub fn symbol(&self) -> &CuspSymbol {
        &self.symbol
    }

    pub fn eta_grid(&self) -> EtaGrid {
        self.eta
    }

    /// Default x-grid (x0, dx, nx).
    pub fn x_grid(&self) -> (f64, f64, usize) {
        (0.0, self.dx, self.nx)
    }

    fn check_n(&self, n: u32) -> Result<(), CuspError> {
        if n as usize >= self.pieces.len() {
            return Err(CuspError::TooManyReflections { n, max: self.params.n_reflections });
        }
        Ok(())
    }

    fn piece(&self, n: u32) -> &Piece {
        self.pieces[n as usize].get_or_init(|| self.build_piece(n))
    }

    fn build_piece(&self, n: u32) -> Piece {
        let sym = &self.symbol;
        let nz = sym.len();
        let dxi = 2.0 * PI / sym.period();
        let h = self.params.h;
        let (mut dropped, mut total, mut clipped) = (0.0, 0.0, 0.0);
        let mut rows = Vec::with_capacity(self.eta.len);
        for eta in self.eta.iter() {
            let psi = self.cfg.psi.eval(eta);
            let el = eta * self.params.lambda;
            // ascending ξ: k = -nz/2 .. nz/2
            let full: Vec<Complex64> = (0..nz)
                .map(|i| {
                    let k = (i + nz / 2) % nz;
                    let w = sym.spectrum[k] * (dxi / (2.0 * PI));
                    if n == 0 {
                        w
                    } else {
                        w * self.kernel.step(sym.xi(k), el).powu(n)
                    }
                })
                .collect();
            let peak = full.iter().fold(0.0f64, |m, v| m.max(v.norm()));
            let floor = peak * self.cfg.spectral_floor;
            let first = full.iter().position(|v| v.norm() > floor).unwrap_or(0);
            let last = full.iter().rposition(|v| v.norm() > floor).unwrap_or(0);
            let xi_at = |i: usize| (i as f64 - (nz / 2) as f64) * dxi;
            for (i, v) in full.iter().enumerate() {
                let a = v.norm() * psi;
                total += a;
                if i < first || i > last {
                    dropped += a;
                }
                clipped += a * (1.0 - self.kernel.chi(xi_at(i) / el));
            }
            if psi == 0.0 || peak == 0.0 {
                rows.push(Row { eta, prefactor: Complex64::new(0.0, 0.0), xi0: 0.0, weights: vec![] });
                continue;
            }
            // u^n = ∫∫ e^{iΦ_n/h} ϱ^n Ψ ds dη; the synthesizer divides by 2πh and the
            // s-integral contributes 2π(h/η)^{1/3} Ai, hence 4π²h overall
            let prefactor = 4.0 * PI * PI * h * psi * (h / eta).powf(1.0 / 3.0)
                * Complex64::from_polar(1.0, 4.0 / 3.0 * n as f64 * el);
            rows.push(Row { eta, prefactor, xi0: xi_at(first), weights: full[first..=last].to_vec() });
        }
        let frac = |x: f64| if total > 0.0 { x / total } else { 0.0 };
        Piece { rows, dropped: frac(dropped), clip: frac(clipped) }
    }

    /// Fraction of ϱ^n's spectral mass dropped by the floor.
    pub fn truncation(&self, n: u32) -> Result<f64, CuspError> {
        self.check_n(n)?;
        Ok(self.piece(n).dropped)
    }

    /// Fraction of ϱ^n's spectral mass outside χ = 1.
    pub fn clip_fraction(&self, n: u32) -> Result<f64, CuspError> {
        self.check_n(n)?;
        Ok(self.piece(n).clip)
    }

    /// Whether u^n is non-negligible at time t.
    pub fn is_alive(&self, n: u32, t: f64) -> bool {
        let z = self.params.symbol_arg(t, n);
        z.abs() <= 1.0 + self.params.c0 + 1.0 / self.params.lambda + 0.25
    }

    fn synthesizer(&self, t: f64) -> (Synthesizer, f64) {
        let p = &self.params;
        let y_len = self.eta.period(p.h);
        let center = -2.0 / 3.0 * p.symbol_arg(t, 0) * p.lambda * p.h;
        let y0_moving = center - 0.5 * y_len;
        let shift = t * (1.0 + p.a).sqrt();
        (Synthesizer::new(self.eta, p.h, y0_moving, self.ny), y0_moving + shift)
    }

    /// ξ-weighted Airy superposition for each (x, η), then synthesis in y.
    fn assemble(&self, n: u32, t: f64, xs: (f64, f64, usize), xi_weight: impl Fn(f64) -> f64) -> WaveField {
        let p = &self.params;
        let piece = self.piece(n);
        let z = p.symbol_arg(t, n);
        let (x0, dx, nx) = xs;
        let table = shared_table();
        let dxi = 2.0 * PI / self.symbol.period();
        let mut spec = vec![Complex64::new(0.0, 0.0); nx * self.eta.len];
        for (j, row) in piece.rows.iter().enumerate() {
            if row.weights.is_empty() {
                continue;
            }
            let rot = Complex64::from_polar(1.0, z * dxi);
            let mut ph = Complex64::from_polar(1.0, z * row.xi0);
            let coeffs: Vec<Complex64> = row
                .weights
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    let c = w * ph * xi_weight(row.xi0 + k as f64 * dxi);
                    ph *= rot;
                    c
                })
                .collect();
            let scale = (row.eta / p.h).powf(2.0 / 3.0);
            let slope = (row.eta * p.lambda).powf(-1.0 / 3.0);
            for i in 0..nx {
                let x = x0 + i as f64 * dx;
                let base = scale * (x - p.a) + slope * row.xi0;
                let step = slope * dxi;
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, c) in coeffs.iter().enumerate() {
                    let arg = base + step * k as f64;
                    if arg > 35.0 {
                        break;
                    }
                    acc += c * table.eval(arg);
                }
                spec[i * self.eta.len + j] = row.prefactor * acc;
            }
        }
        let (syn, y0) = self.synthesizer(t);
        let grid = Grid { x0, dx, nx, y0, dy: syn.dy(), ny: self.ny };
        let mut field = WaveField::zeros(grid, t, syn.carrier());
        for i in 0..nx {
            let row = &mut field.values[i * self.ny..(i + 1) * self.ny];
            syn.run(&spec[i * self.eta.len..(i + 1) * self.eta.len], row);
        }
        field
    }

    /// u^n(t) on the default grid.
    pub fn field(&self, n: u32, t: f64) -> Result<WaveField, CuspError> {
        self.check_n(n)?;
        Ok(self.assemble(n, t, self.x_grid(), |_| 1.0))
    }

    /// u^n(t) on a caller-chosen x-grid.
    pub fn field_on(&self, n: u32, t: f64, x0: f64, dx: f64, nx: usize) -> Result<WaveField, CuspError> {
        self.check_n(n)?;
        Ok(self.assemble(n, t, (x0, dx, nx), |_| 1.0))
    }

    /// The part of (∂_t² - Δ) u^n not cancelled by the Airy reduction:
    /// the -ξ² term, scaled by h^{-δ}/(4(1+a)).
    pub fn wave_residual(&self, n: u32, t: f64) -> Result<WaveField, CuspError> {
        self.check_n(n)?;
        let p = &self.params;
        let scale = p.h.powf(-p.delta) / (4.0 * (1.0 + p.a));
        let mut f = self.assemble(n, t, self.x_grid(), |xi| -xi * xi);
        f.values.iter_mut().for_each(|v| *v *= scale);
        Ok(f)
    }

    /// Tr_±(u^n) at time t: boundary values carried by χ(ζ) A^±(-(ηλ)^{2/3}(1-ζ)).
    pub fn trace(&self, n: u32, sign: Sign, t: f64) -> Result<TraceSignal, CuspError> {
        self.check_n(n)?;
        let p = &self.params;
        let piece = self.piece(n);
        let z = p.symbol_arg(t, n);
        let dxi = 2.0 * PI / self.symbol.period();
        let branch = match sign {
            Branch::Plus => &self.traces[0],
            Branch::Minus => &self.traces[1],
        };
        let spec: Vec<Complex64> = piece
            .rows
            .iter()
            .map(|row| {
                let el = row.eta * p.lambda;
                let el23 = el.powf(2.0 / 3.0);
                let edge = self.kernel.chi_edge();
                let sum: Complex64 = row
                    .weights
                    .iter()
                    .enumerate()
                    .filter_map(|(k, w)| {
                        let xi = row.xi0 + k as f64 * dxi;
                        let zeta = xi / el;
                        if zeta.abs() >= edge {
                            return None;
                        }
                        let chi = self.kernel.chi(zeta);
                        Some(w * Complex64::from_polar(chi, z * xi) * branch.eval_unchecked(el23 * (1.0 - zeta)))
                    })
                    .sum();
                row.prefactor * sum
            })
            .collect();
        let (syn, y0) = self.synthesizer(t);
        let mut values = vec![Complex64::new(0.0, 0.0); self.ny];
        syn.run(&spec, &mut values);
        Ok(TraceSignal { n, sign, t, y0, dy: syn.dy(), carrier: syn.carrier(), values, clip: piece.clip })
    }

    /// Σ_n u^n(t) over the live packets; the flag is false when any of them lost more
    /// than 0.1% of its spectrum to truncation.
    pub fn total_field(&self, t: f64) -> Result<(WaveField, bool), CuspError> {
        let mut total: Option<WaveField> = None;
        let mut reliable = true;
        for n in 0..=self.params.n_reflections {
            if !self.is_alive(n, t) {
                continue;
            }
            reliable &= self.piece(n).dropped <= 1e-3;
            let f = self.field(n, t)?;
            match total.as_mut() {
                None => total = Some(f),
                Some(acc) => acc.values.iter_mut().zip(&f.values).for_each(|(a, b)| *a += b),
            }
        }
        Ok(match total {
            Some(f) => (f, reliable),
            None => {
                let (syn, y0) = self.synthesizer(t);
                let grid = Grid { x0: 0.0, dx: self.dx, nx: self.nx, y0, dy: syn.dy(), ny: self.ny };
                (WaveField::zeros(grid, t, syn.carrier()), reliable)
            }
        })
    }
}

/// u^n(t) with the scales it was built at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspField {
    pub n: u32,
    pub t: f64,
    pub lambda: f64,
    pub truncation: f64,
    pub field: WaveField,
}

pub fn cusp_field(n: u32, t: f64, params: &SemiclassicalParams, cfg: &CuspConfig) -> Result<CuspField, CuspError> {
    let model = CuspModel::new(params, cfg)?;
    let field = model.field(n, t)?;
    let truncation = model.truncation(n)?;
    if truncation > 1e-3 {
        return Err(CuspError::Truncation(truncation));
    }
    Ok(CuspField { n, t, lambda: params.lambda, truncation, field })
}

pub fn trace(n: u32, sign: Sign, t: f64, params: &SemiclassicalParams, cfg: &CuspConfig) -> Result<TraceSignal, CuspError> {
    CuspModel::new(params, cfg)?.trace(n, sign, t)
}

/// ‖Tr_-(u^n) + Tr_+(u^{n+1})‖ / ‖Tr_-(u^n)‖ in L²(t, y) around the n-th reflection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualProfile {
    pub n: u32,
    pub lambda: f64,
    pub ratio: f64,
    pub clip: f64,
}

fn reflection_times(params: &SemiclassicalParams, n: u32, samples: usize) -> Vec<f64> {
    let mid = 2.0 * n as f64 + 1.0;
    let samples = samples.max(3);
    (0..samples)
        .map(|i| {
            let z = mid - 1.5 + 3.0 * i as f64 / (samples - 1) as f64;
            params.time_of(z, 0)
        })
        .collect()
}

impl CuspModel {
    pub fn residual_profile(&self, n: u32, samples: usize) -> Result<ResidualProfile, CuspError> {
        if n >= self.params.n_reflections {
            return Err(CuspError::TooManyReflections { n: n + 1, max: self.params.n_reflections });
        }
        let (mut num, mut den) = (0.0, 0.0);
        for t in reflection_times(&self.params, n, samples) {
            let out = self.trace(n, Branch::Minus, t)?;
            let inc = self.trace(n + 1, Branch::Plus, t)?;
            num += out.values.iter().zip(&inc.values).map(|(a, b)| (a + b).norm_sqr()).sum::<f64>();
            den += out.values.iter().map(|a| a.norm_sqr()).sum::<f64>();
        }
        let ratio = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
        let clip = self.piece(n).clip.max(self.piece(n + 1).clip);
        Ok(ResidualProfile { n, lambda: self.params.lambda, ratio, clip })
    }
}

pub fn residual_profile(n: u32, params: &SemiclassicalParams, cfg: &CuspConfig) -> Result<ResidualProfile, CuspError> {
    CuspModel::new(params, cfg)?.residual_profile(n, 65)
}

/// Like [`residual_profile`] but refuses when χ clips more than 1% of ϱ^n.
pub fn boundary_residual(n: u32, params: &SemiclassicalParams, cfg: &CuspConfig) -> Result<f64, CuspError> {
    let model = CuspModel::new(params, cfg)?;
    if n < params.n_reflections {
        let clip = model.clip_fraction(n)?;
        if clip > 0.01 {
            return Err(CuspError::Clip(100.0 * clip));
        }
    }
    Ok(model.residual_profile(n, 65)?.ratio)
}

/// sup_t ‖Σ_{n<N} Tr_-(u^n) + Σ_{n>0} Tr_+(u^n)‖ / sup_{t,n} ‖Tr_-(u^n)‖ over `samples`
/// times in [0, 1]. The unpaired Tr_+(u^0) and Tr_-(u^N) are left out.
pub fn dirichlet_residual(params: &SemiclassicalParams, cfg: &CuspConfig, samples: usize) -> Result<f64, CuspError> {
    let model = CuspModel::new(params, cfg)?;
    let big_n = params.n_reflections;
    let samples = samples.max(2);
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        let mut acc: Option<Vec<Complex64>> = None;
        let mut dy = 0.0;
        let mut add = |s: TraceSignal| {
            dy = s.dy;
            match acc.as_mut() {
                None => acc = Some(s.values),
                Some(a) => a.iter_mut().zip(&s.values).for_each(|(x, y)| *x += y),
            }
        };
        for n in 0..=big_n {
            if !model.is_alive(n, t) {
                continue;
            }
            if n < big_n {
                let out = model.trace(n, Branch::Minus, t)?;
                scale = scale.max(out.l2());
                add(out);
            }
            if n > 0 {
                add(model.trace(n, Branch::Plus, t)?);
            }
        }
        if let Some(a) = acc {
            worst = worst.max((a.iter().map(|v| v.norm_sqr()).sum::<f64>() * dy).sqrt());
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

/// Chooses the reflection phase among {1, i, -1, -i} by smallest first-reflection residual.
pub fn calibrate_reflection_phase(
    params: &SemiclassicalParams,
    cfg: &CuspConfig,
) -> Result<(Complex64, [f64; 4]), CuspError> {
    let candidates = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut scores = [0.0; 4];
    for (s, &c) in scores.iter_mut().zip(&candidates) {
        let trial = CuspConfig { reflection_phase: c, ..*cfg };
        *s = CuspModel::new(params, &trial)?.residual_profile(0, 33)?.ratio;
    }
    let best = (0..4).min_by(|&i, &j| scores[i].total_cmp(&scores[j])).unwrap_or(3);
    Ok((candidates[best], scores))
}

/// A point (y, t; η, τ) of the boundary cotangent bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    pub y: f64,
    pub t: f64,
    pub eta: f64,
    pub tau: f64,
}

fn billiard_step(p: &PhaseSpacePoint, sign: Sign) -> Result<(f64, f64), CuspError> {
    let (tau2, eta2) = (p.tau * p.tau, p.eta * p.eta);
    if !(tau2 > eta2) {
        return Err(CuspError::Gliding { tau2, eta2 });
    }
    let r = tau2 / eta2 - 1.0;
    let s = sign.sign();
    let root = r.sqrt();
    Ok((s * (4.0 * root + 8.0 / 3.0 * r * root), -s * 4.0 * root * p.tau / p.eta))
}

/// One billiard step δ^±; (η, τ) are conserved.
pub fn billiard(p: &PhaseSpacePoint, sign: Sign) -> Result<PhaseSpacePoint, CuspError> {
    let (dy, dt) = billiard_step(p, sign)?;
    Ok(PhaseSpacePoint { y: p.y + dy, t: p.t + dt, ..*p })
}

/// (δ^±)^n in closed form.
pub fn billiard_iterate(p: &PhaseSpacePoint, n: u32, sign: Sign) -> Result<PhaseSpacePoint, CuspError> {
    let (dy, dt) = billiard_step(p, sign)?;
    let k = n as f64;
    Ok(PhaseSpacePoint { y: p.y + k * dy, t: p.t + k * dt, ..*p })
}
