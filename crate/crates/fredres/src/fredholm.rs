//! Nyström discretization of Y⁰(k) = V₂ R₀(k) V₁ on [0, γ] and the Fredholm determinant D±(k).
//!
//! The kernel K(x, y) = 2p(x) ∂R₀(x - y) + (q - ip')(x) R₀(x - y) is continuous but has a kink on
//! the diagonal. Away from the diagonal panel the matrix is the usual √w K √w. On the diagonal panel
//! each row integrates the t > 0 and t < 0 formulas separately over [a, xᵢ] and [xᵢ, b] against the
//! panel's Lagrange basis. Interpolatory rows reproduce the operator spectrally but leave a small
//! trace defect on the diagonal blocks; the Volterra part of the kernel (the difference of the two
//! one-sided formulas) has determinant exactly 1, so the determinant is divided by the determinant of
//! its own discretization, which removes the defect.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::quadrature::{barycentric_weights, lagrange_row, Rule};
use crate::resolvent::{check_pole, Branch, ExpKernel, KernelKind, Rotations, E_MINUS, E_PLUS, E_RAY, I, ONE, ZERO};
use crate::semisep;

/// Nodes per panel.
pub const PANEL_ORDER: usize = 16;
/// Pivot ratio below which I + M is treated as singular for solves.
pub const SINGULAR_PIVOT: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Diagonal-panel rows integrated one-sidedly, determinant normalized by the Volterra part.
    Corrected,
    /// Plain √w K √w with the diagonal limit on the diagonal.
    Plain,
}

#[derive(Debug, Clone)]
struct SubRule {
    /// Physical offsets are a + h (s + 1) with h the panel half width.
    s: Vec<f64>,
    w: Vec<f64>,
    /// lag[l][j] = L_j(s_l)
    lag: Vec<Vec<f64>>,
}

/// Breakpoint-aligned Gauss-Legendre panels on [0, γ].
#[derive(Debug, Clone)]
pub struct Grid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Panel endpoints.
    pub panels: Vec<(f64, f64)>,
    pub order: usize,
    rule: Rule,
    left: Vec<SubRule>,
    right: Vec<SubRule>,
}

impl Grid {
    /// Node count is rounded to a whole number of panels, at least one per coefficient segment.
    pub fn new(c: &Coefficients, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::Domain(format!("node count {n} is below the minimum of 8")));
        }
        let order = PANEL_ORDER.min(n);
        let bps = c.breakpoints();
        let gamma = c.gamma();
        let total = (n / order).max(bps.len() - 1);
        let mut panels = Vec::new();
        for w in bps.windows(2) {
            let m = ((total as f64) * (w[1] - w[0]) / gamma).round().max(1.0) as usize;
            let h = (w[1] - w[0]) / m as f64;
            for j in 0..m {
                let a = w[0] + j as f64 * h;
                let b = if j + 1 == m { w[1] } else { a + h };
                panels.push((a, b));
            }
        }
        let rule = Rule::gauss(order);
        let mut nodes = Vec::with_capacity(panels.len() * order);
        let mut weights = Vec::with_capacity(panels.len() * order);
        for &(a, b) in &panels {
            let (x, w) = rule.mapped(a, b);
            nodes.extend(x);
            weights.extend(w);
        }
        let bary = barycentric_weights(&rule.nodes);
        let sub = |lo: f64, hi: f64| {
            let (s, w) = rule.mapped(lo, hi);
            let lag = s.iter().map(|&v| lagrange_row(&rule.nodes, &bary, v)).collect();
            SubRule { s, w, lag }
        };
        let left = rule.nodes.iter().map(|&xi| sub(-1.0, xi)).collect();
        let right = rule.nodes.iter().map(|&xi| sub(xi, 1.0)).collect();
        Ok(Self { nodes, weights, panels, order, rule, left, right })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    /// Quadrature vector √wᵢ f(xᵢ).
    pub fn embed<F: Fn(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| f(x) * w.sqrt()).collect()
    }
}

/// The pieces needed to evaluate the kernel at a fixed row x.
#[derive(Clone, Copy)]
struct RowKernel {
    p2: Complex64,
    qv: Complex64,
    r: ExpKernel,
    d: ExpKernel,
    deriv: bool,
}

impl RowKernel {
    fn gt(&self, t: f64) -> Complex64 {
        if self.deriv {
            self.p2 * self.d.eval_dk_gt(t) + self.qv * self.r.eval_dk_gt(t)
        } else {
            self.p2 * self.d.eval_gt(t) + self.qv * self.r.eval_gt(t)
        }
    }
    fn lt(&self, t: f64) -> Complex64 {
        if self.deriv {
            self.p2 * self.d.eval_dk_lt(t) + self.qv * self.r.eval_dk_lt(t)
        } else {
            self.p2 * self.d.eval_lt(t) + self.qv * self.r.eval_lt(t)
        }
    }
    fn at(&self, t: f64) -> Complex64 {
        if self.deriv {
            self.p2 * self.d.eval_dk(t) + self.qv * self.r.eval_dk(t)
        } else {
            self.p2 * self.d.eval(t) + self.qv * self.r.eval(t)
        }
    }
}

struct Assembled {
    m: DMatrix<Complex64>,
    vblocks: Vec<DMatrix<Complex64>>,
}

fn assemble(
    grid: &Grid,
    c: &Coefficients,
    k: Complex64,
    branch: Branch,
    rot: Rotations,
    scheme: Scheme,
    deriv: bool,
) -> Assembled {
    let n = grid.n();
    let q = grid.order;
    let r = ExpKernel::new(KernelKind::R0, branch, k, rot);
    let d = ExpKernel::new(KernelKind::DR0, branch, k, rot);
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let rows: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = grid.nodes[i];
            let rk = RowKernel { p2: Complex64::new(2.0 * c.p(x), 0.0), qv: c.q_minus_idp(x), r, d, deriv };
            let panel = i / q;
            let local = i % q;
            let mut row = vec![ZERO; n];
            for j in 0..n {
                if scheme == Scheme::Corrected && j / q == panel {
                    continue;
                }
                row[j] = sw[i] * rk.at(x - grid.nodes[j]) * sw[j];
            }
            let mut vrow = vec![ZERO; q];
            if scheme == Scheme::Corrected {
                let (a, b) = grid.panels[panel];
                let h = 0.5 * (b - a);
                let mut blk = vec![ZERO; q];
                for (side, sub) in [(true, &grid.left[local]), (false, &grid.right[local])] {
                    for (l, (&s, &w)) in sub.s.iter().zip(&sub.w).enumerate() {
                        let y = a + h * (s + 1.0);
                        let t = x - y;
                        let (g, lt) = (rk.gt(t), rk.lt(t));
                        let main = if side { g } else { lt };
                        let volt = match (branch, side) {
                            (Branch::Plus, true) => g - lt,
                            (Branch::Minus, false) => lt - g,
                            _ => ZERO,
                        };
                        for j in 0..q {
                            let f = h * w * sub.lag[l][j];
                            blk[j] += main * f;
                            vrow[j] += volt * f;
                        }
                    }
                }
                for j in 0..q {
                    let gj = panel * q + j;
                    let sim = sw[i] / sw[gj];
                    row[gj] = blk[j] * sim;
                    vrow[j] *= sim;
                }
            }
            (row, vrow)
        })
        .collect();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let npan = n / q;
    let mut vblocks = if scheme == Scheme::Corrected { vec![DMatrix::<Complex64>::zeros(q, q); npan] } else { vec![] };
    for (i, (row, vrow)) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            m[(i, j)] = v;
        }
        if scheme == Scheme::Corrected {
            for (j, v) in vrow.into_iter().enumerate() {
                vblocks[i / q][(i % q, j)] = v;
            }
        }
    }
    Assembled { m, vblocks }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NystromOptions {
    pub n: usize,
    pub scheme: Scheme,
}

impl Default for NystromOptions {
    fn default() -> Self {
        Self { n: 256, scheme: Scheme::Corrected }
    }
}

/// Discretized Y±⁰(k).
#[derive(Debug, Clone)]
pub struct NystromSystem {
    pub k: Complex64,
    pub branch: Branch,
    pub scheme: Scheme,
    pub grid: Grid,
    /// Symmetrized kernel matrix.
    pub matrix: DMatrix<Complex64>,
    /// Diagonal blocks of the discretized Volterra part (empty for the plain scheme).
    pub volterra_blocks: Vec<DMatrix<Complex64>>,
    /// Frobenius norm of `matrix` (Hilbert-Schmidt norm estimate).
    pub hs_norm: f64,
    rot: Rotations,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterminantValue {
    pub k: Complex64,
    pub d: Complex64,
    /// Continued branch of log D₊, where continuation succeeded.
    pub log_d: Option<Complex64>,
    pub branch_anchor: Option<Complex64>,
    /// min |Uᵢᵢ| / max |Uᵢᵢ| of the LU factors of I + M.
    pub pivot_ratio: f64,
}

fn lu_det(a: DMatrix<Complex64>) -> (Complex64, f64) {
    let lu = a.lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..u.nrows() {
        let v = u[(i, i)].norm();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lu.determinant(), if hi > 0.0 { lo / hi } else { 0.0 })
}

/// Tr(A⁻¹ B) for square A, B.
fn trace_solve(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, k: Complex64) -> Result<Complex64> {
    let lu = a.clone().lu();
    let x = lu.solve(b).ok_or(Error::Singular { k, pivot_ratio: 0.0 })?;
    Ok(x.trace())
}

impl NystromSystem {
    pub fn build(c: &Coefficients, k: Complex64, branch: Branch, n: usize) -> Result<Self> {
        Self::build_with(c, k, branch, NystromOptions { n, scheme: Scheme::Corrected }, Rotations::default())
    }

    pub fn build_with(c: &Coefficients, k: Complex64, branch: Branch, opts: NystromOptions, rot: Rotations) -> Result<Self> {
        check_pole(k, 2)?;
        let grid = Grid::new(c, opts.n)?;
        Ok(Self::on_grid(c, k, branch, grid, opts.scheme, rot))
    }

    /// Assemble on an existing grid.
    pub fn on_grid(c: &Coefficients, k: Complex64, branch: Branch, grid: Grid, scheme: Scheme, rot: Rotations) -> Self {
        let Assembled { m, vblocks } = assemble(&grid, c, k, branch, rot, scheme, false);
        let hs_norm = m.norm();
        Self { k, branch, scheme, grid, matrix: m, volterra_blocks: vblocks, hs_norm, rot }
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    fn identity_plus(&self) -> DMatrix<Complex64> {
        let mut a = self.matrix.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += ONE;
        }
        a
    }

    /// Product of det(I + Vₘ) over the diagonal Volterra blocks.
    pub fn volterra_determinant(&self) -> Complex64 {
        self.volterra_blocks
            .iter()
            .map(|b| {
                let mut a = b.clone();
                for i in 0..a.nrows() {
                    a[(i, i)] += ONE;
                }
                a.lu().determinant()
            })
            .product()
    }

    pub fn determinant(&self) -> DeterminantValue {
        let (raw, pivot_ratio) = lu_det(self.identity_plus());
        let d = if self.scheme == Scheme::Corrected { raw / self.volterra_determinant() } else { raw };
        DeterminantValue { k: self.k, d, log_d: None, branch_anchor: None, pivot_ratio }
    }

    /// Solve (I + M) u = v.
    pub fn solve(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let a = self.identity_plus();
        let lu = a.lu();
        let b = nalgebra::DVector::from_column_slice(v);
        let x = lu.solve(&b).ok_or(Error::Singular { k: self.k, pivot_ratio: 0.0 })?;
        Ok(x.iter().copied().collect())
    }

    /// Apply M.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let b = nalgebra::DVector::from_column_slice(v);
        (&self.matrix * b).iter().copied().collect()
    }

    /// (I + M)⁻¹, the discretized resolvent J = I - Y.
    pub fn resolvent(&self) -> Result<DMatrix<Complex64>> {
        let (_, ratio) = lu_det(self.identity_plus());
        if ratio < SINGULAR_PIVOT {
            return Err(Error::Singular { k: self.k, pivot_ratio: ratio });
        }
        self.identity_plus().try_inverse().ok_or(Error::Singular { k: self.k, pivot_ratio: ratio })
    }

    /// D'/D = Tr((I + M)⁻¹ M') with M' from the analytic k-derivative of the kernels.
    pub fn log_derivative(&self, c: &Coefficients) -> Result<Complex64> {
        let Assembled { m: dm, vblocks: dv } = assemble(&self.grid, c, self.k, self.branch, self.rot, self.scheme, true);
        let mut t = trace_solve(&self.identity_plus(), &dm, self.k)?;
        for (b, db) in self.volterra_blocks.iter().zip(&dv) {
            let mut a = b.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += ONE;
            }
            t -= trace_solve(&a, db, self.k)?;
        }
        Ok(t)
    }

    /// Σ wᵢ K(xᵢ, xᵢ).
    pub fn quadrature_trace(&self, c: &Coefficients) -> Complex64 {
        let r = ExpKernel::new(KernelKind::R0, self.branch, self.k, self.rot);
        let d = ExpKernel::new(KernelKind::DR0, self.branch, self.k, self.rot);
        self.grid
            .nodes
            .iter()
            .zip(&self.grid.weights)
            .map(|(&x, &w)| (d.diag * (2.0 * c.p(x)) + r.diag * c.q_minus_idp(x)) * w)
            .sum()
    }

    /// Tr(Mʲ) - Σₘ Tr(Vₘʲ) for j = 1..=count.
    pub fn power_traces(&self, count: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(count);
        let mut p = self.matrix.clone();
        let mut vp: Vec<DMatrix<Complex64>> = self.volterra_blocks.clone();
        for j in 1..=count {
            if j > 1 {
                p = &p * &self.matrix;
                vp = vp.iter().zip(&self.volterra_blocks).map(|(a, b)| a * b).collect();
            }
            let defect: Complex64 = vp.iter().map(|b| b.trace()).sum();
            out.push(p.trace() - defect);
        }
        out
    }
}

/// Closed-form trace of Y±⁰(k).
pub fn trace_closed_form(c: &Coefficients, k: Complex64, branch: Branch) -> Result<Complex64> {
    check_pole(k, 2)?;
    let (p0, q0) = (c.p0(), c.q0());
    Ok(match branch {
        Branch::Plus => 2.0 * E_PLUS * p0 / (3.0 * I * k) + E_MINUS * q0 / (3.0 * I * k * k),
        Branch::Minus => 2.0 * I * E_MINUS * p0 / (3.0 * k) + I * E_PLUS * q0 / (3.0 * k * k),
    })
}

/// (closed form, quadrature trace of the kernel diagonal).
pub fn trace_y(c: &Coefficients, k: Complex64, branch: Branch, n: usize) -> Result<(Complex64, Complex64)> {
    let closed = trace_closed_form(c, k, branch)?;
    let sys = NystromSystem::build(c, k, branch, n)?;
    Ok((closed, sys.quadrature_trace(c)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: Complex64,
    pub terms: usize,
    /// C*^(N+1) / |k|^(N+1).
    pub bound_stated: f64,
    /// 2 (2C*/3)^(N+1) / |k|^(N+1), the sharper constant carried through the estimate.
    pub bound_sharp: f64,
}

/// True when k lies in the closed sector 0 ≤ arg k ≤ π/3.
pub fn in_closed_k_plus(k: Complex64) -> bool {
    let a = k.arg();
    (0.0..=std::f64::consts::FRAC_PI_3).contains(&a)
}

/// Partial sum -Σ_{j ≤ N} (1/j) Tr(-Y₊⁰)ʲ.
pub fn log_det_series(c: &Coefficients, k: Complex64, terms: usize, n: usize) -> Result<SeriesValue> {
    let sc = c.structural_constants();
    if k.norm() < sc.r_star || !in_closed_k_plus(k) {
        return Err(Error::Domain(format!(
            "log-det series needs |k| >= r* = {} and 0 <= arg k <= pi/3, got k = {k}",
            sc.r_star
        )));
    }
    let sys = NystromSystem::build(c, k, Branch::Plus, n)?;
    let tr = sys.power_traces(terms);
    let value = tr
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let j = j as f64 + 1.0;
            // -(1/j) Tr(-M)^j = (-1)^(j+1) Tr(M^j) / j
            let sign = if (j as usize) % 2 == 1 { 1.0 } else { -1.0 };
            t * (sign / j)
        })
        .sum();
    let ratio = 1.0 / k.norm();
    let np1 = terms as i32 + 1;
    Ok(SeriesValue {
        value,
        terms,
        bound_stated: (sc.c_star * ratio).powi(np1),
        bound_sharp: 2.0 * (2.0 * sc.c_star / 3.0 * ratio).powi(np1),
    })
}

/// How D±(k) is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    /// Corrected Nyström matrix with n nodes.
    Nystrom { n: usize },
    /// Semi-separable ODE integration with the given steps per unit length (None: automatic).
    Ode { steps_per_unit: Option<usize> },
}

impl Default for Method {
    fn default() -> Self {
        Method::Nystrom { n: 128 }
    }
}

pub fn determinant(c: &Coefficients, k: Complex64, branch: Branch, method: Method) -> Result<Complex64> {
    check_pole(k, 2)?;
    if c.is_zero() {
        return Ok(ONE);
    }
    match method {
        Method::Nystrom { n } => Ok(NystromSystem::build(c, k, branch, n)?.determinant().d),
        Method::Ode { steps_per_unit } => Ok(semisep::determinant(c, k, branch, steps_per_unit).0),
    }
}

/// D(k) and its relative change when the resolution is doubled (2n nodes, or twice the ODE steps).
pub fn determinant_converged(c: &Coefficients, k: Complex64, branch: Branch, method: Method) -> Result<(Complex64, f64)> {
    check_pole(k, 2)?;
    if c.is_zero() {
        return Ok((ONE, 0.0));
    }
    let (d, fine) = match method {
        Method::Nystrom { n } => (determinant(c, k, branch, method)?, determinant(c, k, branch, Method::Nystrom { n: 2 * n })?),
        Method::Ode { steps_per_unit } => {
            let (d, steps) = semisep::determinant(c, k, branch, steps_per_unit);
            (d, semisep::determinant(c, k, branch, Some(2 * steps)).0)
        }
    };
    let change = if d == fine { 0.0 } else { (d - fine).norm() / fine.norm().max(f64::MIN_POSITIVE) };
    Ok((d, change))
}

/// (D(k), D'(k)/D(k)).
pub fn det_and_log_derivative(c: &Coefficients, k: Complex64, branch: Branch, method: Method) -> Result<(Complex64, Complex64)> {
    check_pole(k, 2)?;
    if c.is_zero() {
        return Ok((ONE, ZERO));
    }
    match method {
        Method::Nystrom { n } => {
            let sys = NystromSystem::build(c, k, branch, n)?;
            let d = sys.determinant().d;
            Ok((d, sys.log_derivative(c)?))
        }
        Method::Ode { steps_per_unit } => {
            let (d, dd) = semisep::determinant_with_derivative(c, k, branch, steps_per_unit);
            if d == ZERO {
                return Err(Error::NearZero { k, modulus: 0.0 });
            }
            Ok((d, dd / d))
        }
    }
}

/// D'/D with a central-difference cross-check of log D along the real and imaginary directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogDerivative {
    pub analytic: Complex64,
    pub finite_difference: Complex64,
    pub rel_error: f64,
}

pub fn log_derivative(c: &Coefficients, k: Complex64, branch: Branch, n: usize, step: f64) -> Result<LogDerivative> {
    let method = Method::Nystrom { n };
    let (d, analytic) = det_and_log_derivative(c, k, branch, method)?;
    if d.norm() < 1e-300 {
        return Err(Error::NearZero { k, modulus: d.norm() });
    }
    let dp = determinant(c, k + step, branch, method)?;
    let dm = determinant(c, k - step, branch, method)?;
    // log increments relative to the centre stay on the principal branch for small steps
    let fd = ((dp / d).ln() - (dm / d).ln()) / (2.0 * step);
    let scale = analytic.norm().max(fd.norm()).max(1e-300);
    let rel_error = if analytic == fd { 0.0 } else { (analytic - fd).norm() / scale };
    Ok(LogDerivative { analytic, finite_difference: fd, rel_error })
}

/// Anchor of the continued branch of log D₊.
pub fn branch_anchor(c: &Coefficients) -> Complex64 {
    let r = (2.0 * c.structural_constants().r_star).max(10.0);
    E_RAY * r
}

/// Continue log D₊ along `path` from its first point, which must be an anchor in the series regime.
/// Steps are bisected until the phase increment is below π/4.
pub fn continue_log(c: &Coefficients, path: &[Complex64], method: Method) -> Result<Vec<DeterminantValue>> {
    let Some(&start) = path.first() else {
        return Ok(Vec::new());
    };
    let sc = c.structural_constants();
    if start.norm() < sc.r_star || !in_closed_k_plus(start) {
        return Err(Error::Domain(format!("continuation must start at |k| >= r* inside the closed sector, got {start}")));
    }
    let eval = |k: Complex64| determinant(c, k, Branch::Plus, method);
    let d0 = eval(start)?;
    let mut out = vec![DeterminantValue { k: start, d: d0, log_d: Some(d0.ln()), branch_anchor: Some(start), pivot_ratio: f64::NAN }];
    let mut log = d0.ln();
    let mut prev = (start, d0);
    for &k in &path[1..] {
        let d1 = eval(k)?;
        log = extend_log(&eval, prev, (k, d1), log, 0)?;
        out.push(DeterminantValue { k, d: d1, log_d: Some(log), branch_anchor: Some(start), pivot_ratio: f64::NAN });
        prev = (k, d1);
    }
    Ok(out)
}

/// Continued log D₊ at the points r e^{iθ} for the given radii (any order), reached from the anchor
/// along the arc of radius |anchor| and then radially.
pub fn ray_log(c: &Coefficients, theta: f64, radii: &[f64], method: Method) -> Result<Vec<Complex64>> {
    if c.is_zero() {
        return Ok(vec![ZERO; radii.len()]);
    }
    let anchor = branch_anchor(c);
    let big = anchor.norm();
    let mut path = vec![anchor];
    let arc_steps = ((anchor.arg() - theta).abs() / 0.05).ceil().max(1.0) as usize;
    for j in 1..=arc_steps {
        let t = anchor.arg() + (theta - anchor.arg()) * j as f64 / arc_steps as f64;
        path.push(Complex64::from_polar(big, t));
    }
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
    let outward: Vec<usize> = order.iter().copied().filter(|&i| radii[i] >= big).collect();
    let inward: Vec<usize> = order.iter().rev().copied().filter(|&i| radii[i] < big).collect();
    let mut slots = Vec::with_capacity(radii.len());
    for &i in &outward {
        slots.push((path.len(), i));
        path.push(Complex64::from_polar(radii[i], theta));
    }
    // walk back down to the arc radius before heading inward
    if let Some(&last) = outward.last() {
        let mut r = radii[last];
        while r > big {
            r = (r - 1.0).max(big);
            path.push(Complex64::from_polar(r, theta));
        }
    }
    for &i in &inward {
        slots.push((path.len(), i));
        path.push(Complex64::from_polar(radii[i], theta));
    }
    let logs = continue_log(c, &path, method)?;
    let mut out = vec![ZERO; radii.len()];
    for (at, i) in slots {
        out[i] = logs[at].log_d.unwrap_or(ZERO);
    }
    Ok(out)
}

const MAX_BISECT: u32 = 40;

fn extend_log<F: Fn(Complex64) -> Result<Complex64>>(
    eval: &F,
    a: (Complex64, Complex64),
    b: (Complex64, Complex64),
    log_a: Complex64,
    depth: u32,
) -> Result<Complex64> {
    let (ka, da) = a;
    let (kb, db) = b;
    if db.norm() == 0.0 || !db.norm().is_finite() {
        return Err(Error::NearZero { k: kb, modulus: db.norm() });
    }
    let inc = (db / da).ln();
    if inc.im.abs() < std::f64::consts::FRAC_PI_4 && (inc.re.abs() < 1.0 || depth >= MAX_BISECT) {
        return Ok(log_a + inc);
    }
    if depth >= MAX_BISECT || (kb - ka).norm() < 1e-12 {
        return Err(Error::NearZero { k: 0.5 * (ka + kb), modulus: da.norm().min(db.norm()) });
    }
    let km = 0.5 * (ka + kb);
    let dm = eval(km)?;
    let log_m = extend_log(eval, a, (km, dm), log_a, depth + 1)?;
    extend_log(eval, (km, dm), b, log_m, depth + 1)
}
