//! ψ functionals, scattering amplitudes, S-matrix values and the Born-term diagnostics.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::fredholm::{determinant, Grid, Method, NystromSystem, SINGULAR_PIVOT};
use crate::quadrature::Rule;
use crate::resolvent::{check_pole, Branch, E_MINUS, E_PLUS, E_STAR, I, ONE, ZERO};

/// c_k = 2πi / (3k²).
pub fn c_k(k: Complex64) -> Complex64 {
    2.0 * PI * I / (3.0 * k * k)
}

/// ψ₁(k) as a row on the grid: √wⱼ e^{-ikxⱼ} / √2π.
pub fn psi1(grid: &Grid, k: Complex64) -> Vec<Complex64> {
    let s = 1.0 / (2.0 * PI).sqrt();
    grid.embed(|x| (-I * k * x).exp() * s)
}

/// ψ₂(k) as a column on the grid: √wᵢ e^{ikxᵢ} V(xᵢ, k) / √2π.
pub fn psi2(grid: &Grid, c: &Coefficients, k: Complex64) -> Vec<Complex64> {
    let s = 1.0 / (2.0 * PI).sqrt();
    grid.embed(|x| (I * k * x).exp() * c.eval_v(x, k) * s)
}

pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Stacked functionals at k⁺, k⁻: rows (ψ₁(k⁺), ψ₁(k⁻)) and columns (e₊ψ₂(k⁺), -e₋ψ₂(k⁻)).
#[derive(Debug, Clone)]
pub struct PsiFunctionals {
    pub k: Complex64,
    pub psi1: Vec<Complex64>,
    pub psi2: Vec<Complex64>,
    pub big_psi1: [Vec<Complex64>; 2],
    pub big_psi2: [Vec<Complex64>; 2],
}

impl PsiFunctionals {
    pub fn new(grid: &Grid, c: &Coefficients, k: Complex64) -> Self {
        let (kp, km) = (E_PLUS * k, E_MINUS * k);
        Self {
            k,
            psi1: psi1(grid, k),
            psi2: psi2(grid, c, k),
            big_psi1: [psi1(grid, kp), psi1(grid, km)],
            big_psi2: [
                psi2(grid, c, kp).into_iter().map(|v| v * E_PLUS).collect(),
                psi2(grid, c, km).into_iter().map(|v| -v * E_MINUS).collect(),
            ],
        }
    }
}

/// Born amplitude (2kp₀ + q₀) / 2π.
pub fn amplitude_born(c: &Coefficients, k: Complex64) -> Complex64 {
    (2.0 * k * c.p0() + c.q0()) / (2.0 * PI)
}

/// ψ₁(k) ψ₂(k) by quadrature.
pub fn amplitude_born_quadrature(c: &Coefficients, k: Complex64, n: usize) -> Result<Complex64> {
    let grid = Grid::new(c, n)?;
    Ok(dot(&psi1(&grid, k), &psi2(&grid, c, k)))
}

/// ψ₁ Y ψ₂ with Y = Y⁰ (I + Y⁰)⁻¹ on the given system.
fn psi_y_psi(sys: &NystromSystem, row: &[Complex64], col: &[Complex64]) -> Result<Complex64> {
    let pr = sys.determinant().pivot_ratio;
    if pr < SINGULAR_PIVOT {
        return Err(Error::Singular { k: sys.k, pivot_ratio: pr });
    }
    let mcol = sys.apply(col);
    let u = sys.solve(&mcol)?;
    Ok(dot(row, &u))
}

/// ψ₁(k) Y₊(k) ψ₂(k).
pub fn amplitude_correction(c: &Coefficients, k: Complex64, n: usize) -> Result<Complex64> {
    check_pole(k, 2)?;
    if c.is_zero() {
        return Ok(ZERO);
    }
    let sys = NystromSystem::build(c, k, Branch::Plus, n)?;
    psi_y_psi(&sys, &psi1(&sys.grid, k), &psi2(&sys.grid, c, k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringValue {
    pub k: Complex64,
    /// S from the amplitudes.
    pub s: Complex64,
    pub a0: Complex64,
    pub a1: Complex64,
    pub c_k: Complex64,
    /// S from the determinant ratio.
    pub s_det: Complex64,
    pub discrepancy: f64,
}

fn finish(k: Complex64, a0: Complex64, a1: Complex64, s_det: Complex64) -> ScatteringValue {
    let ck = c_k(k);
    let s = ONE - ck * (a0 - a1);
    let discrepancy = (s - s_det).norm() / s_det.norm().max(1e-300);
    ScatteringValue { k, s, a0, a1, c_k: ck, s_det, discrepancy }
}

/// S₊(k) = 1 - c_k (ψ₁ψ₂ - ψ₁Y₊ψ₂), checked against D₋(k)/D₊(k).
pub fn smatrix_plus(c: &Coefficients, k: Complex64, n: usize) -> Result<ScatteringValue> {
    check_pole(k, 2)?;
    if c.is_zero() {
        return Ok(finish(k, ZERO, ZERO, ONE));
    }
    let sys = NystromSystem::build(c, k, Branch::Plus, n)?;
    let d_plus = sys.determinant();
    if d_plus.d.norm() == 0.0 {
        return Err(Error::NearZero { k, modulus: 0.0 });
    }
    let (r, col) = (psi1(&sys.grid, k), psi2(&sys.grid, c, k));
    let a0 = dot(&r, &col);
    let a1 = psi_y_psi(&sys, &r, &col)?;
    let d_minus = determinant(c, k, Branch::Minus, Method::Nystrom { n })?;
    Ok(finish(k, a0, a1, d_minus / d_plus.d))
}

/// S₋(k) = 1 - c_k e₊ ψ₁(k⁺)(I - Y₊(k))ψ₂(k⁺), checked against D₋(e₋k)/D₊(k).
pub fn smatrix_minus(c: &Coefficients, k: Complex64, n: usize) -> Result<ScatteringValue> {
    check_pole(k, 2)?;
    if c.is_zero() {
        return Ok(finish(k, ZERO, ZERO, ONE));
    }
    let sys = NystromSystem::build(c, k, Branch::Plus, n)?;
    let d_plus = sys.determinant();
    let kp = E_PLUS * k;
    let (r, col) = (psi1(&sys.grid, kp), psi2(&sys.grid, c, kp));
    let a0 = E_PLUS * dot(&r, &col);
    let a1 = E_PLUS * psi_y_psi(&sys, &r, &col)?;
    let d_minus = determinant(c, E_MINUS * k, Branch::Minus, Method::Nystrom { n })?;
    Ok(finish(k, a0, a1, d_minus / d_plus.d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BornRegime {
    /// 0 ≤ arg k ≤ π/6: f₊(ζ) → 0
    Decay,
    /// π/6 < arg k ≤ π/3: |f₊(ζ)| → ∞
    Growth,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BornDiagnostics {
    pub k: Complex64,
    pub zeta: Complex64,
    /// ψ₁ Y₊⁰ ψ₂ from the Nyström matrix.
    pub t: Complex64,
    pub t1: Complex64,
    pub t2: Complex64,
    pub f_plus_zero: Complex64,
    pub f_plus_at_zeta: Complex64,
    pub f_minus_at_estar_zeta: Complex64,
    pub regime: BornRegime,
}

/// f₊(ζ) = ∫∫_{x > y} q(x) q(y) e^{i(x-y)ζ} dx dy by nested Gauss quadrature.
pub fn f_plus(c: &Coefficients, zeta: Complex64) -> Complex64 {
    let rule = Rule::gauss(16);
    let per_len = (1.0 + zeta.norm()).max(4.0);
    let pieces = |a: f64, b: f64| ((b - a) * per_len / 2.0).ceil().max(1.0) as usize;
    let bps = c.breakpoints();
    let mut total = ZERO;
    for w in bps.windows(2) {
        let np = pieces(w[0], w[1]);
        let h = (w[1] - w[0]) / np as f64;
        for m in 0..np {
            let (xs, ws) = rule.mapped(w[0] + m as f64 * h, w[0] + (m + 1) as f64 * h);
            for (&x, &wx) in xs.iter().zip(&ws) {
                let qx = c.q(x);
                if qx == 0.0 {
                    continue;
                }
                let mut inner = ZERO;
                for v in bps.windows(2) {
                    let (a, b) = (v[0], v[1].min(x));
                    if b <= a {
                        break;
                    }
                    let ni = pieces(a, b);
                    let hi = (b - a) / ni as f64;
                    for l in 0..ni {
                        inner += rule.integrate(a + l as f64 * hi, a + (l + 1) as f64 * hi, |y| {
                            (I * (x - y) * zeta).exp() * c.q(y)
                        });
                    }
                }
                total += inner * qx * wx;
            }
        }
    }
    total
}

/// f₋(ξ) = ∫∫_{x < y} q(x) q(y) e^{i(x-y)ξ} dx dy = f₊(-ξ).
pub fn f_minus(c: &Coefficients, xi: Complex64) -> Complex64 {
    f_plus(c, -xi)
}

pub fn born_term_diagnostics(c: &Coefficients, k: Complex64, n: usize) -> Result<BornDiagnostics> {
    check_pole(k, 2)?;
    if c.has_p() {
        return Err(Error::Domain("Born-term diagnostics assume p = 0".into()));
    }
    let zeta = (E_PLUS - ONE) * k;
    let omega = I / (6.0 * PI * k * k);
    let f0 = f_plus(c, ZERO);
    let fz = f_plus(c, zeta);
    let fm = f_minus(c, E_STAR * zeta);
    let t1 = omega * (f0 + E_PLUS * fz);
    let t2 = -E_MINUS * omega * fm;
    let t = if c.is_zero() {
        ZERO
    } else {
        let sys = NystromSystem::build(c, k, Branch::Plus, n)?;
        dot(&psi1(&sys.grid, k), &sys.apply(&psi2(&sys.grid, c, k)))
    };
    let a = k.arg();
    let regime = if (0.0..=PI / 6.0).contains(&a) {
        BornRegime::Decay
    } else if a > PI / 6.0 && a <= PI / 3.0 {
        BornRegime::Growth
    } else {
        BornRegime::Outside
    };
    Ok(BornDiagnostics { k, zeta, t, t1, t2, f_plus_zero: f0, f_plus_at_zeta: fz, f_minus_at_estar_zeta: fm, regime })
}
