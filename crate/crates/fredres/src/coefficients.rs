//! Coefficient pairs (p, q) supported on [0, gamma], stored as piecewise polynomials.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One segment [a, b) with p and q given as polynomials in powers of (x - origin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub origin: f64,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default)]
    pub q: Vec<f64>,
}

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * s + v)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(j, &v)| j as f64 * v).collect()
}

fn product(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact integral of the polynomial over [lo, hi] in the shifted variable.
fn integral(c: &[f64], lo: f64, hi: f64) -> f64 {
    let prim = |s: f64| {
        c.iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (j, &v)| acc * s + v / (j as f64 + 1.0))
            * s
    };
    prim(hi) - prim(lo)
}

impl Segment {
    pub fn p_at(&self, x: f64) -> f64 {
        horner(&self.p, x - self.origin)
    }
    pub fn dp_at(&self, x: f64) -> f64 {
        horner(&derivative(&self.p), x - self.origin)
    }
    pub fn q_at(&self, x: f64) -> f64 {
        horner(&self.q, x - self.origin)
    }
    fn int_of(&self, c: &[f64]) -> f64 {
        integral(c, self.a - self.origin, self.b - self.origin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    gamma: f64,
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralConstants {
    pub c_star: f64,
    pub r_star: f64,
    pub p0: f64,
    pub q0: f64,
    /// (2 p0, q0): V0(k) = 2 k p0 + q0.
    pub v0_coeffs: (f64, f64),
}

impl StructuralConstants {
    pub fn v0(&self, k: Complex64) -> Complex64 {
        k * self.v0_coeffs.0 + self.v0_coeffs.1
    }
}

/// Relative tolerance for p continuity across breakpoints.
const CONTINUITY_TOL: f64 = 1e-12;

impl Coefficients {
    /// Segments must tile [0, gamma] in order; p must be continuous everywhere,
    /// including p(0) = p(gamma) = 0.
    pub fn new(gamma: f64, mut segments: Vec<Segment>) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidCoefficients(format!("gamma must be positive, got {gamma}")));
        }
        if segments.is_empty() {
            segments.push(Segment { a: 0.0, b: gamma, origin: 0.0, p: vec![], q: vec![] });
        }
        let scale = segments
            .iter()
            .flat_map(|s| s.p.iter().chain(s.q.iter()))
            .fold(1.0f64, |m, v| m.max(v.abs()));
        let mut left = 0.0;
        let mut p_left = 0.0;
        for (i, s) in segments.iter().enumerate() {
            if s.p.iter().chain(s.q.iter()).any(|v| !v.is_finite()) || !s.origin.is_finite() {
                return Err(Error::InvalidCoefficients(format!("segment {i}: non-finite coefficient")));
            }
            if (s.a - left).abs() > 1e-14 * gamma {
                return Err(Error::InvalidCoefficients(format!(
                    "segment {i} starts at {} but the previous one ends at {left}",
                    s.a
                )));
            }
            if !(s.b > s.a) {
                return Err(Error::InvalidCoefficients(format!("segment {i} is empty: [{}, {}]", s.a, s.b)));
            }
            let pa = s.p_at(s.a);
            if (pa - p_left).abs() > CONTINUITY_TOL * scale {
                return Err(Error::InvalidCoefficients(format!(
                    "p jumps at x = {}: {p_left} -> {pa}",
                    s.a
                )));
            }
            left = s.b;
            p_left = s.p_at(s.b);
        }
        if (left - gamma).abs() > 1e-14 * gamma {
            return Err(Error::InvalidCoefficients(format!("segments end at {left}, expected gamma = {gamma}")));
        }
        if p_left.abs() > CONTINUITY_TOL * scale {
            return Err(Error::InvalidCoefficients(format!("p jumps at x = gamma: {p_left} -> 0")));
        }
        Ok(Self { gamma, segments })
    }

    pub fn zero(gamma: f64) -> Self {
        Self::new(gamma, vec![]).expect("zero coefficients are admissible")
    }

    /// p = 0, q = height on [0, gamma].
    pub fn indicator(gamma: f64, height: f64) -> Self {
        Self::new(gamma, vec![Segment { a: 0.0, b: gamma, origin: 0.0, p: vec![], q: vec![height] }])
            .expect("indicator is admissible")
    }

    /// p = x(1 - x), q = sin(pi x) on [0, 1]. The sine is stored as its Taylor
    /// polynomial about 1/2, exact to rounding.
    pub fn bump_sine() -> Self {
        let mut q = vec![0.0; 29];
        let mut term = 1.0;
        for n in 0..15 {
            if n > 0 {
                term *= -std::f64::consts::PI.powi(2) / ((2 * n - 1) as f64 * (2 * n) as f64);
            }
            q[2 * n] = term;
        }
        // p in powers of (x - 1/2): 1/4 - s^2
        let seg = Segment { a: 0.0, b: 1.0, origin: 0.5, p: vec![0.25, 0.0, -1.0], q };
        Self::new(1.0, vec![seg]).expect("bump/sine pair is admissible")
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Interior breakpoints together with 0 and gamma.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.segments.iter().map(|s| s.a).collect();
        v.push(self.gamma);
        v
    }

    fn segment(&self, x: f64) -> Option<&Segment> {
        if !(x >= 0.0 && x < self.gamma) {
            return None;
        }
        let i = self.segments.partition_point(|s| s.b <= x);
        self.segments.get(i)
    }

    pub fn p(&self, x: f64) -> f64 {
        self.segment(x).map_or(0.0, |s| s.p_at(x))
    }

    /// Right limit of p' at breakpoints.
    pub fn dp(&self, x: f64) -> f64 {
        self.segment(x).map_or(0.0, |s| s.dp_at(x))
    }

    pub fn q(&self, x: f64) -> f64 {
        self.segment(x).map_or(0.0, |s| s.q_at(x))
    }

    /// q - i p'.
    pub fn q_minus_idp(&self, x: f64) -> Complex64 {
        Complex64::new(self.q(x), -self.dp(x))
    }

    /// V(x, k) = 2 k p(x) + q(x) - i p'(x).
    pub fn eval_v(&self, x: f64, k: Complex64) -> Complex64 {
        match self.segment(x) {
            None => Complex64::new(0.0, 0.0),
            Some(s) => k * (2.0 * s.p_at(x)) + Complex64::new(s.q_at(x), -s.dp_at(x)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(|s| s.p.iter().chain(s.q.iter()).all(|&v| v == 0.0))
    }

    pub fn has_p(&self) -> bool {
        self.segments.iter().any(|s| s.p.iter().any(|&v| v != 0.0))
    }

    fn sum_over<F: Fn(&Segment) -> f64>(&self, f: F) -> f64 {
        self.segments.iter().map(f).sum()
    }

    pub fn norm_p(&self) -> f64 {
        self.sum_over(|s| s.int_of(&product(&s.p, &s.p))).max(0.0).sqrt()
    }

    pub fn norm_dp(&self) -> f64 {
        self.sum_over(|s| {
            let d = derivative(&s.p);
            s.int_of(&product(&d, &d))
        })
        .max(0.0)
        .sqrt()
    }

    pub fn norm_q(&self) -> f64 {
        self.sum_over(|s| s.int_of(&product(&s.q, &s.q))).max(0.0).sqrt()
    }

    /// ||q - i p'||_2 = sqrt(||q||^2 + ||p'||^2) for real coefficients.
    pub fn norm_q_minus_idp(&self) -> f64 {
        self.norm_q().hypot(self.norm_dp())
    }

    pub fn p0(&self) -> f64 {
        self.sum_over(|s| s.int_of(&s.p))
    }

    pub fn q0(&self) -> f64 {
        self.sum_over(|s| s.int_of(&s.q))
    }

    /// ||V(., k)||_2 computed exactly from the polynomial data.
    pub fn norm_v(&self, k: Complex64) -> f64 {
        // |2kp + q - ip'|^2 = |2k|^2 p^2 + q^2 + p'^2 + 4 Re(k) p q + 4 Im(k) p p'
        self.sum_over(|s| {
            let d = derivative(&s.p);
            let pp = s.int_of(&product(&s.p, &s.p));
            let qq = s.int_of(&product(&s.q, &s.q));
            let dd = s.int_of(&product(&d, &d));
            let pq = s.int_of(&product(&s.p, &s.q));
            let pd = s.int_of(&product(&s.p, &d));
            4.0 * k.norm_sqr() * pp + qq + dd + 4.0 * k.re * pq + 4.0 * k.im * pd
        })
        .max(0.0)
        .sqrt()
    }

    pub fn structural_constants(&self) -> StructuralConstants {
        let c_star = 2.0 * self.gamma.sqrt() * (self.norm_q_minus_idp() + 2.0 * self.norm_p());
        let r_star = (4.0 / 3.0 * c_star).max(1.0);
        let p0 = self.p0();
        let q0 = self.q0();
        StructuralConstants { c_star, r_star, p0, q0, v0_coeffs: (2.0 * p0, q0) }
    }

    /// Same p, q replaced by -q.
    pub fn with_negated_q(&self) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| Segment { q: s.q.iter().map(|v| -v).collect(), ..s.clone() })
            .collect();
        Self { gamma: self.gamma, segments }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_jump_in_p() {
        let segs = vec![
            Segment { a: 0.0, b: 0.5, origin: 0.0, p: vec![0.0, 1.0], q: vec![] },
            Segment { a: 0.5, b: 1.0, origin: 0.0, p: vec![0.0], q: vec![] },
        ];
        assert!(Coefficients::new(1.0, segs).is_err());
    }

    #[test]
    fn rejects_gap() {
        let segs = vec![Segment { a: 0.0, b: 0.5, origin: 0.0, p: vec![], q: vec![1.0] }];
        assert!(Coefficients::new(1.0, segs).is_err());
    }

    #[test]
    fn hat_function_is_admissible() {
        let segs = vec![
            Segment { a: 0.0, b: 0.5, origin: 0.0, p: vec![0.0, 1.0], q: vec![] },
            Segment { a: 0.5, b: 1.0, origin: 1.0, p: vec![0.0, -1.0], q: vec![] },
        ];
        let c = Coefficients::new(1.0, segs).unwrap();
        assert_eq!(c.dp(0.5), -1.0);
        assert!((c.norm_dp() - 1.0).abs() < 1e-15);
        assert!((c.p0() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sine_polynomial_is_accurate() {
        let c = Coefficients::bump_sine();
        for i in 0..=100 {
            let x = i as f64 / 100.0 * 0.999_999;
            assert!((c.q(x) - (std::f64::consts::PI * x).sin()).abs() < 2e-15);
        }
        assert!((c.q0() - 2.0 / std::f64::consts::PI).abs() < 1e-15);
    }
}
