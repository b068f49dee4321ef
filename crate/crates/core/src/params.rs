//! Semiclassical parameter algebra, admissible pairs and loss exponents.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational used for exponent bookkeeping.
pub type Q = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("h must lie in (0, 1], got {0}")]
    BadH(f64),
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("c0 must lie in (0, 1/3), got {0}")]
    BadC0(f64),
    #[error("lambda = {0} is not > 1; h is too large for the asymptotic regime")]
    LambdaTooSmall(f64),
    #[error("reflection count is 0 (a^(1/2) = {0} is too large)")]
    NoReflections(f64),
    #[error("exponents must be >= 2 (q = {q}, r = {r})")]
    ExponentRange { q: f64, r: f64 },
    #[error("(q, r, alpha) = (2, inf, 1) is the excluded endpoint")]
    ExcludedEndpoint,
    #[error("loss exponent needs r > 4, got {0}")]
    NoLoss(f64),
    #[error("{0} cannot be represented as a small rational")]
    NotRational(f64),
}

/// The coupled scales of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalParams {
    pub h: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub a: f64,
    pub lambda: f64,
    pub n_reflections: u32,
    pub c0: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// λ below this is accepted but flagged.
pub const MARGINAL_LAMBDA: f64 = 10.0;

pub fn make_params(h: f64, epsilon: f64, c0: f64) -> Result<SemiclassicalParams, ParamError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(ParamError::BadEpsilon(epsilon));
    }
    SemiclassicalParams::with_delta(h, epsilon, (1.0 - epsilon) / 2.0, c0)
}

impl SemiclassicalParams {
    /// Like [`make_params`] but with an explicit caustic exponent δ ∈ (0, 2/3).
    pub fn with_delta(h: f64, epsilon: f64, delta: f64, c0: f64) -> Result<Self, ParamError> {
        if !(h > 0.0 && h <= 1.0) {
            return Err(ParamError::BadH(h));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(ParamError::BadEpsilon(epsilon));
        }
        if !(c0 > 0.0 && c0 < 1.0 / 3.0) {
            return Err(ParamError::BadC0(c0));
        }
        assert!(delta > 0.0 && delta < 2.0 / 3.0, "delta out of (0, 2/3)");
        let a = h.powf(delta);
        let lambda = a.powf(1.5) / h;
        if lambda <= 1.0 + 1e-12 {
            return Err(ParamError::LambdaTooSmall(lambda));
        }
        let n_reflections = reflection_count(h, delta)?;
        let mut warnings = Vec::new();
        if lambda < MARGINAL_LAMBDA {
            warnings.push(format!("lambda = {lambda:.3} < {MARGINAL_LAMBDA}: asymptotic regime marginal"));
        }
        Ok(Self { h, epsilon, delta, a, lambda, n_reflections, c0, warnings })
    }

    /// Same scales as [`make_params`] but tolerates N = 0, for isolated-cusp experiments at coarse h.
    pub fn single_cusp(h: f64, epsilon: f64, c0: f64) -> Result<Self, ParamError> {
        let delta = (1.0 - epsilon) / 2.0;
        match Self::with_delta(h, epsilon, delta, c0) {
            Err(ParamError::NoReflections(_)) => {
                let a = h.powf(delta);
                let lambda = a.powf(1.5) / h;
                let mut warnings = vec!["no reflections fit in [0, 1]".to_string()];
                if lambda < MARGINAL_LAMBDA {
                    warnings.push(format!("lambda = {lambda:.3} < {MARGINAL_LAMBDA}: asymptotic regime marginal"));
                }
                Ok(Self { h, epsilon, delta, a, lambda, n_reflections: 0, c0, warnings })
            }
            other => other,
        }
    }

    pub fn sqrt_a(&self) -> f64 {
        self.a.sqrt()
    }

    /// Reflection period in t, 4 a^{1/2} (1+a)^{1/2}.
    pub fn period(&self) -> f64 {
        4.0 * self.sqrt_a() * (1.0 + self.a).sqrt()
    }

    /// Symbol variable at time t for the n-th cusp: t / (2 (1+a)^{1/2} a^{1/2}) - 2n.
    pub fn symbol_arg(&self, t: f64, n: u32) -> f64 {
        t / (2.0 * (1.0 + self.a).sqrt() * self.sqrt_a()) - 2.0 * n as f64
    }

    /// Inverse of [`Self::symbol_arg`].
    pub fn time_of(&self, z: f64, n: u32) -> f64 {
        (z + 2.0 * n as f64) * 2.0 * (1.0 + self.a).sqrt() * self.sqrt_a()
    }

    pub fn is_marginal(&self) -> bool {
        !self.warnings.is_empty()
    }
}

/// N from the fractional-part rule applied to x = 1/(4 a^{1/2}).
pub fn reflection_count(h: f64, delta: f64) -> Result<u32, ParamError> {
    let sqrt_a = h.powf(delta / 2.0);
    let x = 1.0 / (4.0 * sqrt_a);
    let base = x.floor();
    let n = if x - base < 0.5 { base } else { base + 1.0 };
    if n < 1.0 {
        return Err(ParamError::NoReflections(sqrt_a));
    }
    Ok(n as u32)
}

/// Reciprocal exponent 1/p kept exactly; p = ∞ is 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recip(pub Q);

impl Recip {
    pub fn of(p: f64) -> Result<Self, ParamError> {
        if p.is_infinite() {
            return Ok(Recip(Q::from_integer(0)));
        }
        let r = to_rational(p)?;
        Ok(Recip(r.recip()))
    }

    pub fn to_f64(self) -> f64 {
        ratio_f64(self.0)
    }
}

pub fn ratio_f64(r: Q) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Small-denominator rational for a float input (exact for the usual exponents).
pub fn to_rational(x: f64) -> Result<Q, ParamError> {
    if !x.is_finite() {
        return Err(ParamError::NotRational(x));
    }
    for den in 1..=720i64 {
        let num = (x * den as f64).round();
        if (num / den as f64 - x).abs() <= 1e-12 * x.abs().max(1.0) && num.abs() < 1e12 {
            return Ok(Q::new(num as i64, den));
        }
    }
    Err(ParamError::NotRational(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub q: f64,
    pub r: f64,
    pub alpha: f64,
    pub sharp: bool,
}

/// Tests 1/q + α/r ≤ α/2 in exact arithmetic. Returns `None` when not admissible.
pub fn check_admissible(q: f64, r: f64, alpha: f64) -> Result<Option<AdmissiblePair>, ParamError> {
    if q < 2.0 || r < 2.0 || q.is_nan() || r.is_nan() {
        return Err(ParamError::ExponentRange { q, r });
    }
    let al = to_rational(alpha)?;
    if q == 2.0 && r.is_infinite() && al == Q::from_integer(1) {
        return Err(ParamError::ExcludedEndpoint);
    }
    let (iq, ir) = (Recip::of(q)?.0, Recip::of(r)?.0);
    let lhs = iq + al * ir;
    let rhs = al / 2;
    if lhs > rhs {
        return Ok(None);
    }
    Ok(Some(AdmissiblePair { q, r, alpha, sharp: lhs == rhs }))
}

/// 1/q of the sharp α-admissible pair with space exponent r.
pub fn sharp_q_recip(r: f64, alpha: Q) -> Result<Q, ParamError> {
    let ir = Recip::of(r)?.0;
    Ok(alpha * (Q::new(1, 2) - ir))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossExponent {
    pub r: f64,
    /// 2(1/2 - 1/r) - 1/q at the sharp wave pair in d = 2.
    pub beta_free: f64,
    /// β(r) = 3/2(1/2 - 1/r) + 1/6(1/4 - 1/r).
    pub beta_loss: f64,
    /// Data regularity index before the ε budget (equals `beta_loss` at the sharp pair).
    pub theorem_index: f64,
}

/// Exact (free, loss) pair for rational r (r = ∞ allowed).
pub fn loss_exponent_exact(r: f64) -> Result<(Q, Q), ParamError> {
    if !(r > 4.0) {
        return Err(ParamError::NoLoss(r));
    }
    let ir = Recip::of(r)?.0;
    let half = Q::new(1, 2);
    let iq = sharp_q_recip(r, half)?;
    let free = Q::from_integer(2) * (half - ir) - iq;
    let gap = Q::new(1, 6) * (Q::new(1, 4) - ir);
    Ok((free, free + gap))
}

pub fn loss_exponent(r: f64) -> Result<LossExponent, ParamError> {
    let (free, loss) = loss_exponent_exact(r)?;
    Ok(LossExponent {
        r,
        beta_free: ratio_f64(free),
        beta_loss: ratio_f64(loss),
        theorem_index: ratio_f64(loss),
    })
}

impl LossExponent {
    /// β(r) - ε, the exponent used by the verdict.
    pub fn verdict_beta(&self, epsilon: f64) -> f64 {
        self.beta_loss - epsilon
    }

    /// Data regularity with a 2ε budget.
    pub fn theorem_beta(&self, epsilon: f64) -> f64 {
        self.theorem_index - 2.0 * epsilon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn reference_params() {
        let p = make_params(1e-4, 0.1, 0.2).unwrap();
        assert_relative_eq!(p.delta, 0.45, epsilon = 1e-15);
        // a = 10^{-1.8}, λ = 10^{1.3}
        assert_relative_eq!(p.a, 10f64.powf(-1.8), max_relative = 1e-12);
        assert_relative_eq!(p.lambda, 19.952623149688797, max_relative = 1e-12);
        assert_eq!(p.n_reflections, 2);
        let p6 = make_params(1e-6, 0.1, 0.2).unwrap();
        assert_relative_eq!(p6.lambda, 10f64.powf(1.95), max_relative = 1e-12);
        assert!(matches!(make_params(1.0, 0.1, 0.2), Err(ParamError::LambdaTooSmall(_))));
    }

    #[test]
    fn reflection_rule() {
        assert_eq!(reflection_count(1e-4, 0.45).unwrap(), 2);
        // x = 10^{1.8}/4 = 15.77, fractional part ≥ 1/2
        assert_eq!(reflection_count(1e-8, 0.45).unwrap(), 16);
        assert!(reflection_count(0.5, 0.45).is_err());
    }

    #[test]
    fn admissibility_examples() {
        assert!(check_admissible(6.0, 6.0, 0.5).unwrap().unwrap().sharp);
        // (∞, 2) sits on the line 1/q + α/r = α/2 for every α, so it is flagged sharp
        let energy = check_admissible(f64::INFINITY, 2.0, 0.5).unwrap().unwrap();
        assert!(energy.sharp);
        assert_eq!(check_admissible(2.0, f64::INFINITY, 1.0), Err(ParamError::ExcludedEndpoint));
        assert_eq!(check_admissible(2.0, 6.0, 0.5).unwrap(), None);
    }

    #[test]
    fn loss_examples() {
        assert_eq!(loss_exponent_exact(6.0).unwrap().1, Q::new(37, 72));
        assert_eq!(loss_exponent_exact(8.0).unwrap().1, Q::new(7, 12));
        assert_eq!(loss_exponent_exact(f64::INFINITY).unwrap().1, Q::new(19, 24));
        assert!(loss_exponent(4.0).is_err());
        assert!(loss_exponent(3.0).is_err());
    }

    #[test]
    fn params_json_names() {
        let p = make_params(1e-4, 0.1, 0.2).unwrap();
        let v: serde_json::Value = serde_json::to_value(&p).unwrap();
        for k in ["h", "epsilon", "delta", "a", "lambda", "n_reflections", "c0"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        let back: SemiclassicalParams = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn admissible_lattice_matches_brute_force() {
        // 10 x 10 lattice of rational exponents against a hand evaluation in i128
        let qs = [2, 3, 4, 5, 6, 8, 10, 12, 20, 100];
        let rs = [2, 3, 4, 5, 6, 8, 10, 12, 20, 100];
        for &q in &qs {
            for &r in &rs {
                for (an, ad) in [(1i128, 2i128), (1, 1)] {
                    // 1/q + an/(ad r) <= an/(2 ad)  <=>  2 ad r + 2 an q <= an q r
                    let lhs = 2 * ad * r as i128 + 2 * an * q as i128;
                    let rhs = an * q as i128 * r as i128;
                    let got = check_admissible(q as f64, r as f64, an as f64 / ad as f64).unwrap();
                    assert_eq!(got.is_some(), lhs <= rhs, "q={q} r={r}");
                    if let Some(p) = got {
                        assert_eq!(p.sharp, lhs == rhs);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn params_invariants(logh in -14.0f64..-2.0, eps in 0.02f64..0.6) {
            let h = 10f64.powf(logh);
            if let Ok(p) = make_params(h, eps, 0.2) {
                let sa = p.sqrt_a();
                prop_assert!((4.0 * p.n_reflections as f64 * sa - 1.0).abs() <= 2.0 * sa);
                let target = p.lambda * h.powf(eps);
                let n = p.n_reflections as f64;
                prop_assert!(n <= 4.0 * target && n >= target / 8.0);
                prop_assert!(p.delta > 0.0 && p.delta < 2.0 / 3.0);
                prop_assert!(p.lambda > 1.0);
            }
        }

        #[test]
        fn params_monotone(l1 in -12.0f64..-3.0, dl in 0.01f64..3.0, eps in 0.05f64..0.5) {
            let (h1, h2) = (10f64.powf(l1 - dl), 10f64.powf(l1));
            let (p1, p2) = (make_params(h1, eps, 0.2), make_params(h2, eps, 0.2));
            if let (Ok(p1), Ok(p2)) = (p1, p2) {
                prop_assert!(p1.lambda > p2.lambda);
                prop_assert!(p1.n_reflections >= p2.n_reflections);
            }
        }

        #[test]
        fn loss_gap_is_exact(r in 5i64..400) {
            let (free, loss) = loss_exponent_exact(r as f64).unwrap();
            let gap = Q::new(1, 6) * (Q::new(1, 4) - Q::new(1, r));
            prop_assert_eq!(loss - free, gap);
            prop_assert!(gap > Q::from_integer(0));
            // free exponent at the sharp pair equals 3/2 (1/2 - 1/r)
            prop_assert_eq!(free, Q::new(3, 2) * (Q::new(1, 2) - Q::new(1, r)));
        }
    }
}
