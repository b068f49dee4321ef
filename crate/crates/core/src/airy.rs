//! Airy function Ai, its zeros, and the two oscillatory branches A^± of Ai(-z).
//!
//! |z| <= 8 uses the Maclaurin series summed in double-double arithmetic, larger
//! |z| the classical asymptotic expansions, blended over a 10% window.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AiryError {
    #[error("at least one zero must be requested")]
    NoZeros,
    #[error("branch expansion needs z >= 2, got {0}")]
    OutsideAsymptotic(f64),
    #[error("at most {MAX_TERMS} branch terms supported, got {0}")]
    TooManyTerms(usize),
    #[error("airy table range [{0}, {1}] is empty")]
    EmptyTable(f64, f64),
}

pub const MAX_TERMS: usize = 6;
const SEAM: f64 = 8.0;
const BLEND: f64 = 0.4;

// Ai(0) and -Ai'(0) as (hi, lo) pairs.
const C1: Dd = Dd { hi: 0.3550280538878172, lo: 2.05233632436212e-17 };
const C2: Dd = Dd { hi: 0.2588194037928068, lo: -2.522243111610832e-17 };

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let s = Dd::two_sum(s.hi, s.lo + t.hi);
        Dd::two_sum(s.hi, s.lo + t.lo)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::two_sum(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let p = Dd::from(q1).mul(Dd::from(d));
        let r = self.add(Dd { hi: -p.hi, lo: -p.lo });
        Dd::two_sum(q1, r.hi / d)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// (Ai, Ai') from the Maclaurin series.
fn series(z: f64) -> (f64, f64) {
    let zd = Dd::from(z);
    let z3 = zd.mul(zd).mul(zd);
    // f, g and their derivatives
    let (mut tf, mut tg) = (Dd::from(1.0), zd);
    let (mut df, mut dg) = (zd.mul(zd).div_f64(2.0), Dd::from(1.0));
    let (mut f, mut g, mut fp, mut gp) = (tf, tg, df, dg);
    for k in 1..200 {
        let kf = k as f64;
        tf = tf.mul(z3).div_f64((3.0 * kf) * (3.0 * kf - 1.0));
        tg = tg.mul(z3).div_f64((3.0 * kf) * (3.0 * kf + 1.0));
        dg = dg.mul(z3).div_f64((3.0 * kf) * (3.0 * kf - 2.0));
        f = f.add(tf);
        g = g.add(tg);
        gp = gp.add(dg);
        if k >= 2 {
            df = df.mul(z3).div_f64((3.0 * kf - 1.0) * (3.0 * kf - 3.0));
            fp = fp.add(df);
        }
        let scale = f.hi.abs() + g.hi.abs() + 1.0;
        if tf.hi.abs() + tg.hi.abs() + df.hi.abs() + dg.hi.abs() < 1e-33 * scale {
            break;
        }
    }
    let ai = C1.mul(f).add(C2.mul(g).neg());
    let aip = C1.mul(fp).add(C2.mul(gp).neg());
    (ai.f64(), aip.f64())
}

/// u_k of the classical asymptotic series.
fn u_coeffs() -> &'static [f64; 40] {
    static U: OnceLock<[f64; 40]> = OnceLock::new();
    U.get_or_init(|| {
        let mut u = [0.0; 40];
        u[0] = 1.0;
        for k in 1..40 {
            let kf = k as f64;
            u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
        }
        u
    })
}

fn v_coeff(k: usize) -> f64 {
    let kf = k as f64;
    -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u_coeffs()[k]
}

fn asymptotic(z: f64) -> (f64, f64) {
    let u = u_coeffs();
    let x = z.abs();
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let q = x.powf(0.25);
    if z > 0.0 {
        let e = (-zeta).exp();
        if e == 0.0 {
            return (0.0, 0.0);
        }
        let (mut s, mut sp, mut last) = (0.0, 0.0, f64::INFINITY);
        let mut p = 1.0;
        for k in 0..u.len() {
            let t = u[k] * p;
            if t.abs() > last {
                break;
            }
            last = t.abs();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * t;
            sp += sign * v_coeff(k) * p;
            if t.abs() < 1e-17 {
                break;
            }
            p /= zeta;
        }
        let c = e / (2.0 * PI.sqrt());
        (c * s / q, -c * q * sp)
    } else {
        let (mut pe, mut po, mut ve, mut vo) = (0.0, 0.0, 0.0, 0.0);
        let mut p = 1.0;
        let mut last = f64::INFINITY;
        for k in 0..u.len() {
            let t = u[k] * p;
            if t.abs() > last {
                break;
            }
            last = t.abs();
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                pe += sign * t;
                ve += sign * v_coeff(k) * p;
            } else {
                po += sign * t;
                vo += sign * v_coeff(k) * p;
            }
            if t.abs() < 1e-17 {
                break;
            }
            p /= zeta;
        }
        let th = zeta - FRAC_PI_4;
        let (s, c) = th.sin_cos();
        let amp = 1.0 / PI.sqrt();
        (amp / q * (c * pe + s * po), amp * q * (s * ve - c * vo))
    }
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

/// (Ai(z), Ai'(z)).
pub fn ai_pair(z: f64) -> (f64, f64) {
    let x = z.abs();
    if x <= SEAM - BLEND {
        series(z)
    } else if x >= SEAM + BLEND {
        asymptotic(z)
    } else {
        let w = smoothstep((x - (SEAM - BLEND)) / (2.0 * BLEND));
        let (s, sp) = series(z);
        let (a, ap) = asymptotic(z);
        ((1.0 - w) * s + w * a, (1.0 - w) * sp + w * ap)
    }
}

pub fn ai(z: f64) -> f64 {
    ai_pair(z).0
}

pub fn ai_prime(z: f64) -> f64 {
    ai_pair(z).1
}

/// Positive ω_k with Ai(-ω_k) = 0, increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AiryZeros {
    pub values: Vec<f64>,
}

impl AiryZeros {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,omega\n");
        for (k, w) in self.values.iter().enumerate() {
            s.push_str(&format!("{k},{w:.15}\n"));
        }
        s
    }
}

fn zero_guess(k: usize) -> f64 {
    let t = 3.0 * PI * (4.0 * (k as f64 + 1.0) - 1.0) / 8.0;
    let t2 = t.powi(-2);
    t.powf(2.0 / 3.0) * (1.0 + 5.0 / 48.0 * t2 - 5.0 / 36.0 * t2 * t2)
}

fn refine_zero(guess: f64) -> f64 {
    let f = |w: f64| ai(-w);
    let (mut lo, mut hi) = (guess - 0.2, guess + 0.2);
    let mut n = 0;
    while f(lo).signum() == f(hi).signum() {
        lo -= 0.1;
        hi += 0.1;
        n += 1;
        assert!(n < 50, "failed to bracket an Airy zero near {guess}");
    }
    let flo = f(lo);
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // one Newton polish on the bracketed root
    let w = 0.5 * (lo + hi);
    let (v, d) = ai_pair(-w);
    let step = v / d;
    if step.abs() < hi - lo + 1e-12 {
        w + step
    } else {
        w
    }
}

pub fn airy_zeros(count: usize) -> Result<AiryZeros, AiryError> {
    if count == 0 {
        return Err(AiryError::NoZeros);
    }
    Ok(AiryZeros { values: (0..count).map(|k| refine_zero(zero_guess(k))).collect() })
}

/// ω_k from a process-wide cache.
pub fn omega(k: usize) -> f64 {
    static CACHE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = CACHE.get_or_init(|| airy_zeros(64).expect("nonzero count").values);
    if k < table.len() {
        table[k]
    } else {
        refine_zero(zero_guess(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// Truncated expansion A^±(-z) = z^{-1/4} e^{∓i((2/3)z^{3/2} - π/4)} Σ_j c_j z^{-3j/2}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AiryBranchExpansion {
    pub sign: Branch,
    pub terms: usize,
    pub coefficients: Vec<Complex64>,
}

impl AiryBranchExpansion {
    pub fn new(sign: Branch, terms: usize) -> Result<Self, AiryError> {
        if terms > MAX_TERMS {
            return Err(AiryError::TooManyTerms(terms));
        }
        let a0 = leading_constant();
        let u = u_coeffs();
        let rot = Complex64::new(0.0, sign.sign());
        let coefficients = (0..=terms)
            .map(|j| a0 * rot.powi(j as i32) * u[j] * 1.5f64.powi(j as i32))
            .collect();
        Ok(Self { sign, terms, coefficients })
    }

    /// A^±(-z) for z >= 2.
    pub fn eval(&self, z: f64) -> Result<Complex64, AiryError> {
        if !(z >= 2.0) {
            return Err(AiryError::OutsideAsymptotic(z));
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: f64) -> Complex64 {
        let phase = 2.0 / 3.0 * z * z.sqrt() - FRAC_PI_4;
        z.powf(-0.25) * Complex64::from_polar(1.0, -self.sign.sign() * phase) * self.series_at(z.powf(-1.5))
    }

    /// Σ_j c_j w^j.
    pub fn series_at(&self, w: f64) -> Complex64 {
        self.coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * w + c)
    }
}

pub fn airy_branch(z: f64, sign: Branch, terms: usize) -> Result<Complex64, AiryError> {
    AiryBranchExpansion::new(sign, terms)?.eval(z)
}

/// a_{±,0}, fitted by least squares so that A^+ + A^- reproduces ai(-z) on [10, 40].
pub fn leading_constant() -> f64 {
    static A0: OnceLock<f64> = OnceLock::new();
    *A0.get_or_init(|| {
        let u = u_coeffs();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=600 {
            let z = 10.0 + 30.0 * i as f64 / 600.0;
            let zeta = 2.0 / 3.0 * z * z.sqrt();
            let e = Complex64::from_polar(1.0, -(zeta - FRAC_PI_4));
            let s: Complex64 = (0..=MAX_TERMS)
                .map(|j| Complex64::new(0.0, 1.0).powi(j as i32) * u[j] * zeta.powi(-(j as i32)))
                .sum();
            let basis = 2.0 * (z.powf(-0.25) * e * s).re;
            num += ai(-z) * basis;
            den += basis * basis;
        }
        num / den
    })
}

/// Cubic-Hermite table of Ai on a uniform grid, for bulk evaluation.
#[derive(Debug, Clone)]
pub struct AiryTable {
    lo: f64,
    step: f64,
    vals: Vec<(f64, f64)>,
}

impl AiryTable {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self, AiryError> {
        if !(hi > lo) || !(step > 0.0) {
            return Err(AiryError::EmptyTable(lo, hi));
        }
        let n = ((hi - lo) / step).ceil() as usize + 2;
        let vals = (0..n).map(|i| ai_pair(lo + i as f64 * step)).collect();
        Ok(Self { lo, step, vals })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.lo + (self.vals.len() - 2) as f64 * self.step)
    }

    /// Interpolated Ai; falls back to direct evaluation off the table.
    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        let s = (z - self.lo) / self.step;
        if !(s >= 0.0) || s >= (self.vals.len() - 1) as f64 {
            return if z > 40.0 { 0.0 } else { ai(z) };
        }
        let i = s as usize;
        let t = s - i as f64;
        let (y0, d0) = self.vals[i];
        let (y1, d1) = self.vals[i + 1];
        let h = self.step;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * d1
    }
}

/// Shared table on [-400, 40], built on first use.
pub fn shared_table() -> &'static AiryTable {
    static T: OnceLock<AiryTable> = OnceLock::new();
    T.get_or_init(|| AiryTable::new(-400.0, 40.0, 2e-3).expect("static range"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn values_at_reference_points() {
        assert_abs_diff_eq!(ai(0.0), 0.3550280539, epsilon = 1e-10);
        assert!(ai(10.0).abs() < 1e-9 && ai(10.0) > 0.0);
        assert!(ai(-2.3381074105).abs() < 1e-8);
    }

    #[test]
    fn seam_is_continuous() {
        for &z in &[7.6, 8.0, 8.4, -7.6, -8.0, -8.4] {
            let (s, _) = series(z);
            let (a, _) = asymptotic(z);
            assert!((s - a).abs() < 1e-12, "z={z} series={s} asym={a}");
            if z > 0.0 {
                assert!((s - a).abs() / a.abs() < 1e-9, "relative seam error at {z}");
            }
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        for &z in &[-9.0, -3.3, 0.0, 1.7, 6.0, -12.0, 9.5] {
            let h = 1e-5;
            let fd = (ai(z + h) - ai(z - h)) / (2.0 * h);
            assert_abs_diff_eq!(ai_prime(z), fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn zeros_basic() {
        let z = airy_zeros(3).unwrap();
        assert!((z.values[0] - 2.3381074105).abs() < 1e-9);
        assert!(z.values.windows(2).all(|w| w[1] > w[0]));
        let g1 = z.values[1] - z.values[0];
        let g2 = z.values[2] - z.values[1];
        assert!(g2 < g1);
        assert_eq!(airy_zeros(0), Err(AiryError::NoZeros));
        for w in &z.values {
            assert!(ai(-w).abs() < 1e-10);
        }
    }

    #[test]
    fn branch_properties() {
        let p = airy_branch(4.0, Branch::Plus, 0).unwrap();
        let m = airy_branch(4.0, Branch::Minus, 0).unwrap();
        let env = 1.0 / (2.0 * PI.sqrt()) * 4f64.powf(-0.25);
        assert!((p.norm() - env).abs() < 1e-6 && (p.norm() - 0.1995).abs() < 1e-4);
        assert!((m - p.conj()).norm() < 1e-15);
        let s = airy_branch(9.0, Branch::Plus, 3).unwrap() + airy_branch(9.0, Branch::Minus, 3).unwrap();
        assert!(s.im.abs() < 1e-15);
        let envelope = 9f64.powf(-0.25) / PI.sqrt();
        assert!((s.re - ai(-9.0)).abs() / envelope < 1e-4);
        assert!(airy_branch(1.5, Branch::Plus, 3).is_err());
        assert!(airy_branch(3.0, Branch::Plus, 7).is_err());
    }

    #[test]
    fn calibrated_constant_is_classical() {
        assert!((leading_constant() - 0.5 / PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn table_interpolation() {
        let t = AiryTable::new(-40.0, 10.0, 2e-3).unwrap();
        for i in 0..997 {
            let z = -39.9 + 0.0501 * i as f64;
            assert!((t.eval(z) - ai(z)).abs() < 1e-10, "z={z}");
        }
    }
}
