//! Two-sided checks built on the Fredholm determinant: rank-one differences of Y⁰, the rotated-point
//! continuation identities, the resolvent trace of D'/D, sampled growth bounds and the λ-integral
//! trace identity.

use std::f64::consts::{FRAC_PI_3, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::fredholm::{det_and_log_derivative, determinant, ray_log, Grid, Method, NystromOptions, NystromSystem, Scheme};
use crate::quadrature::{barycentric_weights, lagrange_row, Rule};
use crate::resolvent::{check_pole, Branch, ExpKernel, KernelKind, Rotations, Sector, E_MINUS, E_PLUS, I, ONE, ZERO};
use crate::scattering::{c_k, dot, psi1, psi2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankOneResidual {
    pub k: Complex64,
    /// max |M₊(k) - M₋(k) - P(k)| / max |M₊(k)|
    pub first: f64,
    /// max |M₊(k) - M₋(k⁻) - P(k⁺)| / max |M₊(k)|
    pub second: f64,
    /// |det(I + M₋(k) + P(k)) - det(I + M₊(k))| / |det(I + M₊(k))|
    pub det_first: f64,
    /// |det(I + M₋(k⁻) + P(k⁺)) - det(I + M₊(k))| / |det(I + M₊(k))|
    pub det_second: f64,
}

fn plain(c: &Coefficients, k: Complex64, branch: Branch, n: usize, rot: Rotations) -> Result<NystromSystem> {
    NystromSystem::build_with(c, k, branch, NystromOptions { n, scheme: Scheme::Plain }, rot)
}

fn outer(col: &[Complex64], row: &[Complex64], scale: Complex64) -> DMatrix<Complex64> {
    DMatrix::from_fn(col.len(), row.len(), |i, j| col[i] * row[j] * scale)
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn det_plus_identity(m: &DMatrix<Complex64>) -> Complex64 {
    let mut a = m.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += ONE;
    }
    a.lu().determinant()
}

/// Y₊⁰(k) - Y₋⁰(k) = P(k) and Y₊⁰(k) - Y₋⁰(k⁻) = P(k⁺) on the plain quadrature matrices, where
/// P(k) = c_k ψ₂(k)ψ₁(k) and P(k⁺) = c_k e₊ ψ₂(k⁺)ψ₁(k⁺).
pub fn rank_one_residuals(c: &Coefficients, k: Complex64, n: usize, rot: Rotations) -> Result<RankOneResidual> {
    check_pole(k, 2)?;
    let plus = plain(c, k, Branch::Plus, n, rot)?;
    let minus = plain(c, k, Branch::Minus, n, rot)?;
    let km = E_MINUS * k;
    let kp = E_PLUS * k;
    let minus_rot = plain(c, km, Branch::Minus, n, rot)?;
    let g = &plus.grid;
    let ck = c_k(k);
    let p1 = outer(&psi2(g, c, k), &psi1(g, k), ck);
    let p2 = outer(&psi2(g, c, kp), &psi1(g, kp), ck * E_PLUS);
    let scale = max_abs(&plus.matrix).max(f64::MIN_POSITIVE);
    let d1 = &plus.matrix - &minus.matrix - &p1;
    let d2 = &plus.matrix - &minus_rot.matrix - &p2;
    let dp = det_plus_identity(&plus.matrix);
    let rel = |d: Complex64| if d == dp { 0.0 } else { (d - dp).norm() / dp.norm() };
    Ok(RankOneResidual {
        k,
        first: if c.is_zero() { 0.0 } else { max_abs(&d1) / scale },
        second: if c.is_zero() { 0.0 } else { max_abs(&d2) / scale },
        det_first: rel(det_plus_identity(&(&minus.matrix + &p1))),
        det_second: rel(det_plus_identity(&(&minus_rot.matrix + &p2))),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuationIdentity {
    /// k ∈ 𝕂′₊: D₊(k) = D₋(k⁻)(1 + c_k e₊ ψ₁(k⁺) 𝒥₋(k⁻) ψ₂(k⁺))
    RankOne,
    /// k ∈ 𝕂″₊: D₊(k) = D₊(k⁻) det(I₂ + c_k Ψ₁ 𝒥₊(k⁻) Ψ₂)
    Rotated,
    /// k ∈ 𝕂″₋: D₊(k) = D₋(k⁺) det(I₃ + c_k (Ψ₁; ψ₁) 𝒥₋(k⁺) (Ψ₂, ψ₂))
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationResidual {
    pub identity: ContinuationIdentity,
    pub k: Complex64,
    /// The rotated point where the reference determinant is evaluated.
    pub reference: Complex64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    /// For the rank-one identity: residual of the form without the e₊ factor on the rank-one term.
    pub residual_without_rotation_factor: Option<f64>,
}

/// The small determinant det(I + c_k R 𝒥 C) with 𝒥 = (I + M)⁻¹ from `sys`.
fn small_det(sys: &NystromSystem, rows: &[Vec<Complex64>], cols: &[Vec<Complex64>], ck: Complex64) -> Result<Complex64> {
    let m = rows.len();
    let solved: Vec<Vec<Complex64>> = cols.iter().map(|col| sys.solve(col)).collect::<Result<_>>()?;
    let g = DMatrix::from_fn(m, m, |a, b| (if a == b { ONE } else { ZERO }) + ck * dot(&rows[a], &solved[b]));
    Ok(g.determinant())
}

pub fn continuation_identity(c: &Coefficients, k: Complex64, n: usize) -> Result<ContinuationResidual> {
    check_pole(k, 2)?;
    let (kp, km) = (E_PLUS * k, E_MINUS * k);
    let identity = match Sector::classify(k) {
        Sector::KPlusPrime => ContinuationIdentity::RankOne,
        Sector::KPlusDoublePrime => ContinuationIdentity::Rotated,
        Sector::KMinusDoublePrime => ContinuationIdentity::Block,
        s => return Err(Error::Domain(format!("no continuation identity covers k = {k} (sector {s:?})"))),
    };
    let (reference, branch) = match identity {
        ContinuationIdentity::RankOne => (km, Branch::Minus),
        ContinuationIdentity::Rotated => (km, Branch::Plus),
        ContinuationIdentity::Block => (kp, Branch::Minus),
    };
    if c.is_zero() {
        return Ok(ContinuationResidual { identity, k, reference, lhs: ONE, rhs: ONE, residual: 0.0, residual_without_rotation_factor: Some(0.0) });
    }
    let lhs = NystromSystem::build(c, k, Branch::Plus, n)?.determinant().d;
    let sys = NystromSystem::build(c, reference, branch, n)?;
    let d_ref = sys.determinant().d;
    if d_ref.norm() < 1e-12 {
        return Err(Error::NearZero { k: reference, modulus: d_ref.norm() });
    }
    let g = &sys.grid;
    let ck = c_k(k);
    let rel = |v: Complex64| (v - lhs).norm() / lhs.norm();
    let (rhs, without) = match identity {
        ContinuationIdentity::RankOne => {
            let (r, col) = (psi1(g, kp), psi2(g, c, kp));
            let s = dot(&r, &sys.solve(&col)?);
            (d_ref * (ONE + ck * E_PLUS * s), Some(rel(d_ref * (ONE + ck * s))))
        }
        ContinuationIdentity::Rotated => {
            let rows = vec![psi1(g, kp), psi1(g, km)];
            let cols = vec![scaled(psi2(g, c, kp), E_PLUS), scaled(psi2(g, c, km), -E_MINUS)];
            (d_ref * small_det(&sys, &rows, &cols, ck)?, None)
        }
        ContinuationIdentity::Block => {
            let rows = vec![psi1(g, kp), psi1(g, km), psi1(g, k)];
            let cols = vec![scaled(psi2(g, c, kp), E_PLUS), scaled(psi2(g, c, km), -E_MINUS), psi2(g, c, k)];
            (d_ref * small_det(&sys, &rows, &cols, ck)?, None)
        }
    };
    Ok(ContinuationResidual { identity, k, reference, lhs, rhs, residual: rel(rhs), residual_without_rotation_factor: without })
}

fn scaled(v: Vec<Complex64>, s: Complex64) -> Vec<Complex64> {
    v.into_iter().map(|x| x * s).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventTrace {
    pub k: Complex64,
    /// (1/3k²) D₊'/D₊ from the semi-separable derivative.
    pub log_derivative: Complex64,
    /// Tr (I + Y⁰)⁻¹ V₂ R₀² V₁ with R₀² convolved numerically on the line.
    pub trace: Complex64,
    pub rel_error: f64,
}

/// ∫_ℝ a(t - s) b(s) ds for kernels decaying exponentially in both directions.
fn convolve_line(a: &ExpKernel, b: &ExpKernel, t: f64, decay: f64, scale: f64) -> Complex64 {
    let rule = Rule::gauss(16);
    let width = (0.5 / scale).min(0.25);
    let tail = 40.0 / decay;
    let (lo, hi) = (t.min(0.0), t.max(0.0));
    let f = |s: f64| a.eval(t - s) * b.eval(s);
    let mut total = ZERO;
    let mut piece = |x0: f64, x1: f64| {
        if x1 <= x0 {
            return;
        }
        let m = ((x1 - x0) / width).ceil().max(1.0) as usize;
        let h = (x1 - x0) / m as f64;
        for j in 0..m {
            total += rule.integrate(x0 + j as f64 * h, x0 + (j + 1) as f64 * h, f);
        }
    };
    piece(lo - tail, lo);
    piece(lo, hi);
    piece(hi, hi + tail);
    total
}

/// Chebyshev interpolant of a function on [a, b].
struct Cheb {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    bary: Vec<f64>,
    vals: Vec<Complex64>,
}

impl Cheb {
    fn new<F: Fn(f64) -> Complex64>(a: f64, b: f64, n: usize, f: F) -> Self {
        let nodes: Vec<f64> = (0..n).map(|j| -(PI * j as f64 / (n - 1) as f64).cos()).collect();
        let bary = barycentric_weights(&nodes);
        let vals = nodes.iter().map(|&s| f(a + 0.5 * (b - a) * (s + 1.0))).collect();
        Self { a, b, nodes, bary, vals }
    }
    fn eval(&self, x: f64) -> Complex64 {
        let s = 2.0 * (x - self.a) / (self.b - self.a) - 1.0;
        lagrange_row(&self.nodes, &self.bary, s).iter().zip(&self.vals).map(|(l, v)| v * *l).sum()
    }
}

/// (1/3k²) D₊'/D₊ against Tr(R₀ - R) = Tr (I + Y⁰)⁻¹ V₂ R₀² V₁ for k in the open sector 𝕂₊.
pub fn resolvent_trace(c: &Coefficients, k: Complex64, n: usize) -> Result<ResolventTrace> {
    check_pole(k, 2)?;
    if Sector::classify(k) != Sector::KPlus {
        return Err(Error::Domain(format!("resolvent trace identity needs k in the open sector 0 < arg k < pi/3, got {k}")));
    }
    if c.is_zero() {
        return Ok(ResolventTrace { k, log_derivative: ZERO, trace: ZERO, rel_error: 0.0 });
    }
    let (_, ld) = det_and_log_derivative(c, k, Branch::Plus, Method::Ode { steps_per_unit: None })?;
    let lhs = ld / (3.0 * k * k);
    let rot = Rotations::default();
    let r = ExpKernel::new(KernelKind::R0, Branch::Plus, k, rot);
    let d = ExpKernel::new(KernelKind::DR0, Branch::Plus, k, rot);
    let ks = [k, E_PLUS * k, E_MINUS * k];
    let decay = ks[0].im.min(ks[1].im).min(-ks[2].im);
    let gamma = c.gamma();
    let pts = 48;
    let g0 = [Cheb::new(-gamma, 0.0, pts, |t| convolve_line(&r, &r, t, decay, k.norm())), Cheb::new(0.0, gamma, pts, |t| convolve_line(&r, &r, t, decay, k.norm()))];
    let g1 = [Cheb::new(-gamma, 0.0, pts, |t| convolve_line(&d, &r, t, decay, k.norm())), Cheb::new(0.0, gamma, pts, |t| convolve_line(&d, &r, t, decay, k.norm()))];
    let side = |t: f64| usize::from(t >= 0.0);
    let sys = NystromSystem::build(c, k, Branch::Plus, n)?;
    let grid: &Grid = &sys.grid;
    let nn = grid.n();
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let w = DMatrix::from_fn(nn, nn, |i, j| {
        let (x, y) = (grid.nodes[i], grid.nodes[j]);
        let t = x - y;
        let s = side(t);
        let v = 2.0 * c.p(x) * g1[s].eval(t) + c.q_minus_idp(x) * g0[s].eval(t);
        v * (sw[i] * sw[j])
    });
    let j = sys.resolvent()?;
    let trace = (&j * &w).trace();
    Ok(ResolventTrace { k, log_derivative: lhs, trace, rel_error: (trace - lhs).norm() / lhs.norm().max(f64::MIN_POSITIVE) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthBound {
    /// |D₊(k)| ≤ 48 e^{2γ|k|}, |k| ≥ r*
    Global,
    /// |D₋(k)| ≤ 2 + (1 + e^{γ(Im k)₊})/3 on 𝕂₊
    MinusOnKPlus,
    /// |D₊(k)| ≤ 2 + e^{γ|Im k⁺|} on 𝕂′₊
    KPlusPrime,
    /// |D₊(k)| ≤ 4 e^{-γ√3 Re k} on 𝕂″₊
    KPlusDoublePrime,
    /// |D₊(k)| ≤ 48 e^{-2rγ sin(π/3 + φ)} for φ = arg k ∈ [π, 7π/6]
    LowerLeft,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSample {
    pub bound: GrowthBound,
    pub k: Complex64,
    pub value: f64,
    pub limit: f64,
    pub holds: bool,
}

/// Every growth bound that applies at k (all need |k| ≥ r*).
pub fn growth_bounds(c: &Coefficients, k: Complex64, method: Method) -> Result<Vec<BoundSample>> {
    let sc = c.structural_constants();
    if k.norm() < sc.r_star {
        return Err(Error::Domain(format!("growth bounds need |k| >= r* = {}", sc.r_star)));
    }
    let gamma = c.gamma();
    let dp = determinant(c, k, Branch::Plus, method)?.norm();
    let mut out = Vec::new();
    let mut push = |bound, value: f64, limit: f64| out.push(BoundSample { bound, k, value, limit, holds: value <= limit });
    push(GrowthBound::Global, dp, 48.0 * (2.0 * gamma * k.norm()).exp());
    let phi = k.arg();
    match Sector::classify(k) {
        Sector::KPlus => {
            let dm = determinant(c, k, Branch::Minus, method)?.norm();
            push(GrowthBound::MinusOnKPlus, dm, 2.0 + (1.0 + (gamma * k.im.max(0.0)).exp()) / 3.0);
        }
        Sector::KPlusPrime => push(GrowthBound::KPlusPrime, dp, 2.0 + (gamma * (E_PLUS * k).im.abs()).exp()),
        Sector::KPlusDoublePrime => push(GrowthBound::KPlusDoublePrime, dp, 4.0 * (-gamma * 3f64.sqrt() * k.re).exp()),
        _ => {}
    }
    // φ ∈ [π, 7π/6] is arg k ∈ [-π, -5π/6] or arg k = π
    if phi <= -5.0 * PI / 6.0 || phi == PI {
        let phi = if phi < 0.0 { phi + 2.0 * PI } else { phi };
        push(GrowthBound::LowerLeft, dp, 48.0 * (-2.0 * k.norm() * gamma * (FRAC_PI_3 + phi).sin()).exp());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceIdentityValue {
    /// Upper limit R of the |k| window; the λ window is |λ| ≤ R³.
    pub window: f64,
    pub integral: f64,
    /// 2p₀/3
    pub target: f64,
}

/// (1/π) ∫ Im f(λ + i0) dλ over |λ| ≤ R³ for f(λ) = i e^{iπ/3} log D₊(λ^{1/3}) / λ^{2/3}, written in
/// k = |λ|^{1/3} as (3/π) ∫₀^R [Im(i e^{iπ/3} L(r)) + Im(i e^{-iπ/3} L(r e^{iπ/3}))] dr with L the
/// continued log D₊. Below `eps` the log is replaced by its pole behaviour L ≈ L(ε) - m log(r/ε).
pub fn trace_identity(c: &Coefficients, windows: &[f64], m: u32, eps: f64, method: Method) -> Result<Vec<TraceIdentityValue>> {
    let target = 2.0 * c.p0() / 3.0;
    let top = windows.iter().copied().fold(0.0, f64::max);
    if c.is_zero() {
        return Ok(windows.iter().map(|&w| TraceIdentityValue { window: w, integral: 0.0, target }).collect());
    }
    if !(eps > 0.0 && eps < 1.0 && top > 1.0) {
        return Err(Error::Domain("trace identity needs 0 < eps < 1 < window".into()));
    }
    let rule = Rule::gauss(16);
    let mut cuts = Vec::new();
    let decades = (1.0 / eps).log10().ceil() as usize * 2;
    for j in 0..=decades {
        cuts.push(eps * (1.0 / eps).powf(j as f64 / decades as f64));
    }
    let mut r = 1.0;
    while r < top {
        r = (r + 1.0).min(top);
        cuts.push(r);
    }
    for &w in windows {
        if !cuts.iter().any(|&x| (x - w).abs() < 1e-12) {
            cuts.push(w);
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    let mut nodes = vec![eps];
    let mut weights = vec![0.0];
    for w in cuts.windows(2) {
        let (x, wt) = rule.mapped(w[0], w[1]);
        nodes.extend(x);
        weights.extend(wt);
    }
    let real = ray_log(c, 0.0, &nodes, method)?;
    let rotated = ray_log(c, FRAC_PI_3, &nodes, method)?;
    let ep = Complex64::from_polar(1.0, FRAC_PI_3);
    let h = |a: Complex64, b: Complex64| (I * ep * a).im + (I * ep.conj() * b).im;
    let mf = m as f64;
    // ∫₀^ε (L(ε) - m log(r/ε)) dr = ε (L(ε) + m)
    let near = h(real[0] + mf, rotated[0] + mf) * eps;
    let mut out = Vec::new();
    for &win in windows {
        let mut s = near;
        for i in 1..nodes.len() {
            if nodes[i] <= win {
                s += weights[i] * h(real[i], rotated[i]);
            }
        }
        out.push(TraceIdentityValue { window: win, integral: 3.0 / PI * s, target });
    }
    Ok(out)
}
