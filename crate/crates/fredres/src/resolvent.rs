//! Free resolvent kernels of the third-order operator, their analytic extensions and the k-plane sectors.
//!
//! With e± = exp(±2πi/3) and k± = e± k, the kernels are sums of three exponentials exp(i t kj)
//! over kj ∈ {k, k⁺, k⁻}, with different coefficients for t > 0 and t < 0.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::Coefficients;
use crate::error::{Error, Result};

pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// exp(2πi/3)
pub const E_PLUS: Complex64 = Complex64::new(-0.5, 0.866_025_403_784_438_6);
/// exp(-2πi/3)
pub const E_MINUS: Complex64 = Complex64::new(-0.5, -0.866_025_403_784_438_6);
/// exp(iπ/3)
pub const E_STAR: Complex64 = Complex64::new(0.5, 0.866_025_403_784_438_6);
/// exp(iπ/6)
pub const E_RAY: Complex64 = Complex64::new(0.866_025_403_784_438_6, 0.5);

/// Kernel evaluations refuse |k| below this.
pub const K_MIN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn other(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// Sectors of the k-plane bounded by the rays arg k ∈ {0, ±π/3, ±2π/3, π}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    /// arg k ∈ (0, π/3)
    KPlus,
    /// arg k ∈ (-π/3, 0)
    KMinus,
    /// arg k ∈ (π/3, 2π/3)
    KPlusPrime,
    /// arg k ∈ (2π/3, π)
    KPlusDoublePrime,
    /// arg k ∈ (-2π/3, -π/3)
    KMinusPrime,
    /// arg k ∈ (-π, -2π/3)
    KMinusDoublePrime,
    /// arg k = index·π/3 with index ∈ {-2, ..., 3}
    BoundaryRay(i8),
}

impl Sector {
    pub fn classify(k: Complex64) -> Self {
        let a = k.arg();
        let third = PI / 3.0;
        for idx in -2i8..=3 {
            if a == idx as f64 * third || (idx == 3 && a == -PI) {
                return Sector::BoundaryRay(idx);
            }
        }
        match a {
            a if a > 0.0 && a < third => Sector::KPlus,
            a if a > third && a < 2.0 * third => Sector::KPlusPrime,
            a if a > 2.0 * third => Sector::KPlusDoublePrime,
            a if a < 0.0 && a > -third => Sector::KMinus,
            a if a < -third && a > -2.0 * third => Sector::KMinusPrime,
            _ => Sector::KMinusDoublePrime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub k: Complex64,
    pub sector: Sector,
}

impl SpectralPoint {
    pub fn new(k: Complex64) -> Result<Self> {
        check_pole(k, 2)?;
        Ok(Self { k, sector: Sector::classify(k) })
    }
    pub fn k_plus(&self) -> Complex64 {
        E_PLUS * self.k
    }
    pub fn k_minus(&self) -> Complex64 {
        E_MINUS * self.k
    }
}

pub fn check_pole(k: Complex64, order: u32) -> Result<()> {
    if !(k.norm() >= K_MIN) {
        return Err(Error::PoleProximity { k, k_min: K_MIN, order });
    }
    Ok(())
}

/// The cube-root rotation constants used as kernel coefficients. The exponents always use the
/// true rotations; swapping the coefficient constants is a mutation hook for verification runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotations {
    pub ep: Complex64,
    pub em: Complex64,
}

impl Default for Rotations {
    fn default() -> Self {
        Self { ep: E_PLUS, em: E_MINUS }
    }
}

impl Rotations {
    pub fn swapped() -> Self {
        Self { ep: E_MINUS, em: E_PLUS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// R0(k)
    R0,
    /// ∂R0(k), ∂ = -i d/dx
    DR0,
}

/// A kernel in exponential-sum form: sum_j c_j exp(i t k_j) with coefficients `gt` for t > 0,
/// `lt` for t < 0 and the explicit limit `diag` at t = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpKernel {
    pub ks: [Complex64; 3],
    pub gt: [Complex64; 3],
    pub lt: [Complex64; 3],
    pub diag: Complex64,
    /// Power of 1/k in the prefactor (2 for R0, 1 for ∂R0).
    pub power: i32,
    pub k: Complex64,
}

/// Exponents (k, k⁺, k⁻).
pub fn rotations_of(k: Complex64) -> [Complex64; 3] {
    [k, E_PLUS * k, E_MINUS * k]
}

impl ExpKernel {
    pub fn new(kind: KernelKind, branch: Branch, k: Complex64, rot: Rotations) -> Self {
        let (ep, em) = (rot.ep, rot.em);
        let (pref, power) = match kind {
            KernelKind::R0 => (I / (3.0 * k * k), 2),
            KernelKind::DR0 => (I / (3.0 * k), 1),
        };
        // R0 and ∂R0 differ by the factor k_j / k on each exponential
        let (gt, lt, diag) = match (kind, branch) {
            (KernelKind::R0, Branch::Plus) => ([ONE, ep, ZERO], [ZERO, ZERO, -em], -em),
            (KernelKind::DR0, Branch::Plus) => ([ONE, em, ZERO], [ZERO, ZERO, -ep], -ep),
            (KernelKind::R0, Branch::Minus) => ([ZERO, ep, ZERO], [-ONE, ZERO, -em], ep),
            (KernelKind::DR0, Branch::Minus) => ([ZERO, em, ZERO], [-ONE, ZERO, -ep], em),
        };
        Self {
            ks: rotations_of(k),
            gt: gt.map(|c| c * pref),
            lt: lt.map(|c| c * pref),
            diag: diag * pref,
            power,
            k,
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        if t == 0.0 {
            return self.diag;
        }
        let c = if t > 0.0 { &self.gt } else { &self.lt };
        let mut s = ZERO;
        for j in 0..3 {
            if c[j] != ZERO {
                s += c[j] * (I * t * self.ks[j]).exp();
            }
        }
        s
    }

    /// Value of the t > 0 formula (the analytic continuation across t = 0).
    pub fn eval_gt(&self, t: f64) -> Complex64 {
        (0..3).filter(|&j| self.gt[j] != ZERO).map(|j| self.gt[j] * (I * t * self.ks[j]).exp()).sum()
    }

    /// Value of the t < 0 formula.
    pub fn eval_lt(&self, t: f64) -> Complex64 {
        (0..3).filter(|&j| self.lt[j] != ZERO).map(|j| self.lt[j] * (I * t * self.ks[j]).exp()).sum()
    }

    fn dk_of(&self, c: &[Complex64; 3], t: f64) -> Complex64 {
        let mut s = ZERO;
        for j in 0..3 {
            if c[j] != ZERO {
                let f = -(self.power as f64) / self.k + I * t * self.ks[j] / self.k;
                s += c[j] * f * (I * t * self.ks[j]).exp();
            }
        }
        s
    }

    /// Analytic k-derivative of the kernel at t.
    pub fn eval_dk(&self, t: f64) -> Complex64 {
        if t == 0.0 {
            return -(self.power as f64) * self.diag / self.k;
        }
        self.dk_of(if t > 0.0 { &self.gt } else { &self.lt }, t)
    }

    pub fn eval_dk_gt(&self, t: f64) -> Complex64 {
        self.dk_of(&self.gt, t)
    }

    pub fn eval_dk_lt(&self, t: f64) -> Complex64 {
        self.dk_of(&self.lt, t)
    }
}

fn kernel(kind: KernelKind, branch: Branch, k: Complex64, t: f64, order: u32) -> Result<Complex64> {
    check_pole(k, order)?;
    Ok(ExpKernel::new(kind, branch, k, Rotations::default()).eval(t))
}

/// R0(k, t) on the given branch, analytically extended to all k ≠ 0.
pub fn r0(branch: Branch, k: Complex64, t: f64) -> Result<Complex64> {
    kernel(KernelKind::R0, branch, k, t, 2)
}

/// ∂R0(k, t) on the given branch.
pub fn dr0(branch: Branch, k: Complex64, t: f64) -> Result<Complex64> {
    kernel(KernelKind::DR0, branch, k, t, 1)
}

pub fn r0_plus(k: Complex64, t: f64) -> Result<Complex64> {
    r0(Branch::Plus, k, t)
}

pub fn r0_minus(k: Complex64, t: f64) -> Result<Complex64> {
    r0(Branch::Minus, k, t)
}

pub fn dr0_plus(k: Complex64, t: f64) -> Result<Complex64> {
    dr0(Branch::Plus, k, t)
}

pub fn dr0_minus(k: Complex64, t: f64) -> Result<Complex64> {
    dr0(Branch::Minus, k, t)
}

/// Leading Laurent terms of R0⁺ near k = 0: (e₋ + i k t e₊) / (3 i k²). Diagnostic only.
pub fn r0_plus_laurent(k: Complex64, t: f64) -> Complex64 {
    (E_MINUS + I * k * t * E_PLUS) / (3.0 * I * k * k)
}

/// Kernel of the rank-one difference Y⁰₊ - Y⁰₋: (i/3k²) V(x,k) exp(i(x-y)k) 1[0,γ](y).
pub fn p_kernel(c: &Coefficients, k: Complex64, x: f64, y: f64) -> Result<Complex64> {
    check_pole(k, 2)?;
    if !(y >= 0.0 && y <= c.gamma()) {
        return Ok(ZERO);
    }
    Ok(I / (3.0 * k * k) * c.eval_v(x, k) * (I * (x - y) * k).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn diagonal_values() {
        let k = ONE;
        let v = r0_plus(k, 0.0).unwrap();
        assert!(close(v, Complex64::new(-3f64.sqrt() / 6.0, 1.0 / 6.0), 1e-15));
        assert!(close(r0_minus(k, 0.0).unwrap(), I * E_PLUS / 3.0, 1e-15));
        assert!(close(dr0_plus(k, 0.0).unwrap(), -I * E_PLUS / 3.0, 1e-15));
    }

    #[test]
    fn continuity_at_zero() {
        for &k in &[Complex64::new(1.3, 0.4), Complex64::new(-2.0, 0.7), Complex64::new(0.2, -3.0)] {
            for b in [Branch::Plus, Branch::Minus] {
                for kind in [KernelKind::R0, KernelKind::DR0] {
                    let e = ExpKernel::new(kind, b, k, Rotations::default());
                    assert!(close(e.eval_gt(0.0), e.eval_lt(0.0), 1e-13));
                    assert!(close(e.eval_gt(0.0), e.diag, 1e-13));
                }
            }
        }
    }

    #[test]
    fn pole_rejected() {
        assert!(matches!(r0_plus(Complex64::new(1e-9, 0.0), 0.1), Err(Error::PoleProximity { order: 2, .. })));
        assert!(matches!(dr0_minus(ZERO, 0.1), Err(Error::PoleProximity { order: 1, .. })));
    }

    #[test]
    fn sectors() {
        assert_eq!(Sector::classify(Complex64::from_polar(1.0, 0.5)), Sector::KPlus);
        assert_eq!(Sector::classify(Complex64::from_polar(1.0, 1.5)), Sector::KPlusPrime);
        assert_eq!(Sector::classify(Complex64::from_polar(1.0, 2.5)), Sector::KPlusDoublePrime);
        assert_eq!(Sector::classify(Complex64::from_polar(1.0, -0.5)), Sector::KMinus);
        assert_eq!(Sector::classify(Complex64::from_polar(1.0, -1.5)), Sector::KMinusPrime);
        assert_eq!(Sector::classify(Complex64::from_polar(1.0, -2.5)), Sector::KMinusDoublePrime);
        assert_eq!(Sector::classify(ONE), Sector::BoundaryRay(0));
        assert_eq!(Sector::classify(Complex64::new(-1.0, 0.0)), Sector::BoundaryRay(3));
    }

    #[test]
    fn dk_matches_finite_difference() {
        let k = Complex64::new(1.1, 0.6);
        let h = 1e-6;
        for kind in [KernelKind::R0, KernelKind::DR0] {
            for t in [-0.4, 0.0, 0.7] {
                let e = ExpKernel::new(kind, Branch::Plus, k, Rotations::default());
                let ep = ExpKernel::new(kind, Branch::Plus, k + h, Rotations::default());
                let em = ExpKernel::new(kind, Branch::Plus, k - h, Rotations::default());
                let fd = (ep.eval(t) - em.eval(t)) / (2.0 * h);
                assert!(close(fd, e.eval_dk(t), 1e-8));
            }
        }
    }
}
