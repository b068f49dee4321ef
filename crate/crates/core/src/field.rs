//! Sampled complex fields on a half-plane (x >= 0, y periodic) grid.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Uniform (x, y) grid. x runs from `x0` with `nx` points (trapezoid weights in norms);
/// y is periodic with `ny` points starting at `y0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
    pub y0: f64,
    pub dy: f64,
    pub ny: usize,
}

impl Grid {
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dy
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.nx.saturating_sub(1))
    }
}

/// Field samples, row-major in x. The physical field is `e^{i carrier y} * values`;
/// keeping the carrier out lets coarse y-grids resolve semiclassical oscillations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveField {
    pub grid: Grid,
    pub t: f64,
    pub carrier: f64,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    grid: &'a Grid,
    t: f64,
    carrier: f64,
    h: Option<f64>,
    layout: &'static str,
}

impl WaveField {
    pub fn zeros(grid: Grid, t: f64, carrier: f64) -> Self {
        Self { grid, t, carrier, values: vec![Complex64::new(0.0, 0.0); grid.nx * grid.ny] }
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[ix * self.grid.ny + iy]
    }

    pub fn row(&self, ix: usize) -> &[Complex64] {
        &self.values[ix * self.grid.ny..(ix + 1) * self.grid.ny]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Raw little-endian (re, im) f64 pairs plus a JSON sidecar `<path>.json`.
    pub fn write_binary(&self, path: &Path, h: Option<f64>) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for v in &self.values {
            f.write_all(&v.re.to_le_bytes())?;
            f.write_all(&v.im.to_le_bytes())?;
        }
        f.flush()?;
        let side = Sidecar { grid: &self.grid, t: self.t, carrier: self.carrier, h, layout: "row-major x, complex f64 LE" };
        let mut name = path.as_os_str().to_owned();
        name.push(".json");
        std::fs::write(name, serde_json::to_vec_pretty(&side)?)
    }
}

/// Uniform η grid η_j = base + j*step used as the transverse spectral variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaGrid {
    pub base: f64,
    pub step: f64,
    pub len: usize,
}

impl EtaGrid {
    /// Grid aligned to integer multiples of `step` covering [lo, hi].
    pub fn covering(lo: f64, hi: f64, step: f64) -> Self {
        let j0 = (lo / step).ceil() as i64;
        let j1 = (hi / step).floor() as i64;
        Self { base: j0 as f64 * step, step, len: (j1 - j0 + 1).max(0) as usize }
    }

    pub fn eta(&self, j: usize) -> f64 {
        self.base + j as f64 * self.step
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|j| self.eta(j))
    }

    /// Period in y of the sampled transform: 2πh/step.
    pub fn period(&self, h: f64) -> f64 {
        2.0 * std::f64::consts::PI * h / self.step
    }
}

/// Maps spectral rows F(η_j) to y samples of (1/(2πh)) ∫ e^{iyη/h} F(η) dη, demodulated
/// by the carrier e^{i base y/h}. The y window is [y0, y0 + period) with `ny` points.
pub struct Synthesizer {
    eta: EtaGrid,
    h: f64,
    y0: f64,
    ny: usize,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    twiddle: Vec<Complex64>,
}

impl Synthesizer {
    pub fn new(eta: EtaGrid, h: f64, y0: f64, ny: usize) -> Self {
        assert!(ny >= eta.len, "y-grid must have at least as many points as the eta grid");
        let fft = FftPlanner::new().plan_fft_inverse(ny);
        let twiddle = (0..eta.len)
            .map(|j| Complex64::from_polar(eta.step / (2.0 * std::f64::consts::PI * h), j as f64 * eta.step * y0 / h))
            .collect();
        Self { eta, h, y0, ny, fft, twiddle }
    }

    pub fn dy(&self) -> f64 {
        self.eta.period(self.h) / self.ny as f64
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn carrier(&self) -> f64 {
        self.eta.base / self.h
    }

    /// Transforms `spec` (length eta.len) into `out` (length ny).
    pub fn run(&self, spec: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(spec.len(), self.eta.len);
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (o, (s, w)) in out.iter_mut().zip(spec.iter().zip(&self.twiddle)) {
            *o = s * w;
        }
        self.fft.process(out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthesizer_reproduces_gaussian() {
        // spectrum of e^{-y^2/(2h)} is √(2πh) e^{-η²/(2h)}
        let h = 0.01;
        let eta = EtaGrid::covering(-1.0, 1.0, 2.0 * std::f64::consts::PI * h / 8.0);
        let spec: Vec<Complex64> = eta
            .iter()
            .map(|e| Complex64::new((2.0 * std::f64::consts::PI * h).sqrt() * (-e * e / (2.0 * h)).exp(), 0.0))
            .collect();
        let syn = Synthesizer::new(eta, h, -4.0, 512);
        let mut out = vec![Complex64::new(0.0, 0.0); 512];
        syn.run(&spec, &mut out);
        for (k, v) in out.iter().enumerate() {
            let y = -4.0 + k as f64 * syn.dy();
            let phys = v * Complex64::from_polar(1.0, syn.carrier() * y);
            let exact = (-y * y / (2.0 * h)).exp();
            assert!((phys.re - exact).abs() < 1e-10 && phys.im.abs() < 1e-10, "y={y}");
        }
    }

    #[test]
    fn eta_grid_alignment() {
        let g = EtaGrid::covering(0.8, 1.2, 0.01);
        assert!((g.base - 0.8).abs() < 1e-12);
        assert_eq!(g.len, 41);
    }
}
