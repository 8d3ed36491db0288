//! Zeros of the continued D₊: argument-principle counts, quadtree search with Newton polish,
//! counting function, pole order at 0, Hadamard data, trace formula and Breit-Wigner checks.

use std::f64::consts::{FRAC_PI_3, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::fredholm::{branch_anchor, continue_log, det_and_log_derivative, determinant, in_closed_k_plus, ray_log, Method};
use crate::quadrature::Rule;
use crate::resolvent::{Branch, E_RAY, I, ONE, ZERO};

/// Zero-finding never enters |k| < this.
pub const EXCLUSION_RADIUS: f64 = 1e-2;
/// Contour points need |D| ≥ GUARD × median |D| on the contour.
pub const GUARD: f64 = 1e-6;
const EDGE_TOL: f64 = 1e-8;
const MAX_EDGE_DEPTH: u32 = 14;

/// Evaluates (D₊, D₊'/D₊).
#[derive(Debug, Clone, Copy)]
pub struct Evaluator<'a> {
    pub c: &'a Coefficients,
    pub method: Method,
}

impl<'a> Evaluator<'a> {
    pub fn new(c: &'a Coefficients, method: Method) -> Self {
        Self { c, method }
    }
    pub fn both(&self, k: Complex64) -> Result<(Complex64, Complex64)> {
        det_and_log_derivative(self.c, k, Branch::Plus, self.method)
    }
    pub fn value(&self, k: Complex64) -> Result<Complex64> {
        determinant(self.c, k, Branch::Plus, self.method)
    }
}

/// A smooth path piece: radial segment or circular arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Edge {
    Line { from: Complex64, to: Complex64 },
    /// k = r e^{iθ}, θ from `t0` to `t1`.
    Arc { r: f64, t0: f64, t1: f64 },
}

impl Edge {
    fn point(&self, s: f64) -> (Complex64, Complex64) {
        match *self {
            Edge::Line { from, to } => (from + (to - from) * s, to - from),
            Edge::Arc { r, t0, t1 } => {
                let th = t0 + (t1 - t0) * s;
                let k = Complex64::from_polar(r, th);
                (k, I * k * (t1 - t0))
            }
        }
    }
}

/// Integrals of (D'/D, k D'/D) over an edge plus the sampled |D| values.
#[derive(Debug, Clone, Default)]
struct EdgeIntegral {
    zeroth: Complex64,
    first: Complex64,
    moduli: Vec<f64>,
}

fn gauss_on(ev: &Evaluator, edge: &Edge, rule: &Rule, a: f64, b: f64) -> Result<(Complex64, Complex64, Vec<f64>)> {
    let (s, w) = rule.mapped(a, b);
    let mut z = ZERO;
    let mut f = ZERO;
    let mut mods = Vec::with_capacity(s.len());
    for (si, wi) in s.iter().zip(&w) {
        let (k, dk) = edge.point(*si);
        let (d, ld) = ev.both(k)?;
        mods.push(d.norm());
        z += ld * dk * *wi;
        f += k * ld * dk * *wi;
    }
    Ok((z, f, mods))
}

fn integrate_edge(ev: &Evaluator, edge: &Edge) -> Result<EdgeIntegral> {
    let coarse = Rule::gauss(8);
    let fine = Rule::gauss(16);
    let mut out = EdgeIntegral::default();
    let mut stack = vec![(0.0, 1.0, 0u32)];
    while let Some((a, b, depth)) = stack.pop() {
        let (z1, _, _) = gauss_on(ev, edge, &coarse, a, b)?;
        let (z2, f2, m2) = gauss_on(ev, edge, &fine, a, b)?;
        if (z1 - z2).norm() <= EDGE_TOL * (1.0 + z2.norm()) || depth >= MAX_EDGE_DEPTH {
            out.zeroth += z2;
            out.first += f2;
            out.moduli.extend(m2);
        } else {
            let m = 0.5 * (a + b);
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
        }
    }
    Ok(out)
}

/// A closed contour made of edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub edges: Vec<Edge>,
}

impl Contour {
    /// Polygon through the given vertices, closed automatically.
    pub fn polygon(vertices: &[Complex64]) -> Self {
        let n = vertices.len();
        Self { edges: (0..n).map(|i| Edge::Line { from: vertices[i], to: vertices[(i + 1) % n] }).collect() }
    }

    pub fn circle(center: Complex64, r: f64) -> Self {
        // centred circles are arcs about the origin only when center = 0; otherwise use a fine polygon
        if center == ZERO {
            return Self { edges: vec![Edge::Arc { r, t0: -PI, t1: PI }] };
        }
        let m = 64;
        let v: Vec<Complex64> = (0..m).map(|j| center + Complex64::from_polar(r, 2.0 * PI * j as f64 / m as f64)).collect();
        Self::polygon(&v)
    }

    /// Boundary of the polar cell {r0 ≤ |k| ≤ r1, t0 ≤ arg k ≤ t1}, counter-clockwise.
    pub fn polar_cell(r0: f64, r1: f64, t0: f64, t1: f64) -> Self {
        let full = (t1 - t0 - 2.0 * PI).abs() < 1e-12;
        let mut edges = Vec::new();
        if !full {
            edges.push(Edge::Line { from: Complex64::from_polar(r0, t0), to: Complex64::from_polar(r1, t0) });
        }
        edges.push(Edge::Arc { r: r1, t0, t1 });
        if !full {
            edges.push(Edge::Line { from: Complex64::from_polar(r1, t1), to: Complex64::from_polar(r0, t1) });
        }
        if r0 > 0.0 {
            edges.push(Edge::Arc { r: r0, t0: t1, t1: t0 });
        }
        Self { edges }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingResult {
    pub count: i64,
    /// Value before rounding.
    pub raw: f64,
    /// (1/2πi) ∮ k D'/D dk: sum of the enclosed zeros minus nothing (no poles away from 0).
    pub first_moment: Complex64,
    pub median_modulus: f64,
    pub min_modulus: f64,
}

/// (1/2πi) ∮ D₊'/D₊ dk along the contour.
pub fn winding(ev: &Evaluator, contour: &Contour) -> Result<WindingResult> {
    let parts: Vec<Result<EdgeIntegral>> = contour.edges.par_iter().map(|e| integrate_edge(ev, e)).collect();
    let mut z = ZERO;
    let mut f = ZERO;
    let mut mods = Vec::new();
    for p in parts {
        let p = p?;
        z += p.zeroth;
        f += p.first;
        mods.extend(p.moduli);
    }
    mods.sort_by(|a, b| a.total_cmp(b));
    let median = mods.get(mods.len() / 2).copied().unwrap_or(0.0);
    let min = mods.first().copied().unwrap_or(0.0);
    let w = z / (2.0 * PI * I);
    let f = f / (2.0 * PI * I);
    if min < GUARD * median {
        let near = contour.edges.first().map(|e| e.point(0.0).0).unwrap_or(ZERO);
        return Err(Error::GuardViolation { near });
    }
    Ok(WindingResult { count: w.re.round() as i64, raw: w.re, first_moment: f, median_modulus: median, min_modulus: min })
}

/// Winding count rounded to an integer; refuses values more than 0.1 from an integer.
pub fn winding_count(c: &Coefficients, contour: &Contour, method: Method) -> Result<i64> {
    if c.is_zero() {
        return Ok(0);
    }
    let w = winding(&Evaluator::new(c, method), contour)?;
    if (w.raw - w.count as f64).abs() > 0.1 {
        return Err(Error::NonInteger { value: w.raw });
    }
    Ok(w.count)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub r_min: f64,
    pub r_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Region {
    pub fn annulus(r_min: f64, r_max: f64) -> Self {
        Self { r_min, r_max, theta_min: -PI, theta_max: PI }
    }
    pub fn contains(&self, k: Complex64) -> bool {
        let (r, t) = (k.norm(), k.arg());
        r >= self.r_min && r <= self.r_max && t >= self.theta_min && t <= self.theta_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub r0: f64,
    pub r1: f64,
    pub t0: f64,
    pub t1: f64,
    /// Radius of the smallest disc about the zero that contains the cell.
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub k: Complex64,
    pub multiplicity: u32,
    pub residual: f64,
    /// Median |D₊| on the certificate contour.
    pub local_scale: f64,
    pub newton_steps: u32,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet {
    pub region: Region,
    pub zeros: Vec<Resonance>,
    /// Winding count of the region boundary.
    pub boundary_count: i64,
    /// Clusters not resolved to simple zeros at the requested tolerance.
    pub clusters: Vec<Resonance>,
    /// Zeros found in the closed sector 0 ≤ arg k ≤ π/3 (defects; not stored in `zeros`).
    pub defects: Vec<Complex64>,
    pub exclusion_radius: f64,
}

impl ResonanceSet {
    pub fn total_multiplicity(&self) -> i64 {
        self.zeros.iter().chain(&self.clusters).map(|z| z.multiplicity as i64).sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    r0: f64,
    r1: f64,
    t0: f64,
    t1: f64,
}

impl Cell {
    fn contour(&self) -> Contour {
        Contour::polar_cell(self.r0, self.r1, self.t0, self.t1)
    }
    fn diameter(&self) -> f64 {
        let a = Complex64::from_polar(self.r0, self.t0);
        let b = Complex64::from_polar(self.r1, self.t1);
        let arc = self.r1 * (self.t1 - self.t0).abs();
        (a - b).norm().max(arc).max(self.r1 - self.r0)
    }
    fn contains(&self, k: Complex64) -> bool {
        let (r, t) = (k.norm(), k.arg());
        let t = if t < self.t0 - 1e-12 { t + 2.0 * PI } else { t };
        r >= self.r0 && r <= self.r1 && t >= self.t0 && t <= self.t1
    }
    fn center(&self) -> Complex64 {
        Complex64::from_polar(0.5 * (self.r0 + self.r1), 0.5 * (self.t0 + self.t1))
    }
    fn split(&self, shift: f64) -> [Cell; 4] {
        let rm = self.r0 + (0.5 + shift) * (self.r1 - self.r0);
        let tm = self.t0 + (0.5 + shift) * (self.t1 - self.t0);
        [
            Cell { r0: self.r0, r1: rm, t0: self.t0, t1: tm },
            Cell { r0: rm, r1: self.r1, t0: self.t0, t1: tm },
            Cell { r0: self.r0, r1: rm, t0: tm, t1: self.t1 },
            Cell { r0: rm, r1: self.r1, t0: tm, t1: self.t1 },
        ]
    }
}

/// Newton iteration k ← k - m D/D'.
pub fn newton_refine(ev: &Evaluator, start: Complex64, multiplicity: u32, max_steps: u32) -> Result<(Complex64, u32)> {
    let mut k = start;
    for step in 0..max_steps {
        let (_, ld) = match ev.both(k) {
            Ok(v) => v,
            Err(Error::NearZero { .. }) => return Ok((k, step)),
            Err(e) => return Err(e),
        };
        if ld == ZERO || !ld.norm().is_finite() {
            return Ok((k, step));
        }
        let dk = multiplicity as f64 / ld;
        k -= dk;
        if dk.norm() <= 1e-14 * k.norm().max(1.0) {
            return Ok((k, step + 1));
        }
    }
    Ok((k, max_steps))
}

fn certify(ev: &Evaluator, cell: &Cell) -> Result<WindingResult> {
    let w = winding(ev, &cell.contour())?;
    if (w.raw - w.count as f64).abs() > 0.1 {
        return Err(Error::NonInteger { value: w.raw });
    }
    Ok(w)
}

/// Subdivide until each cell holds a single zero, then polish it.
fn resolve(ev: &Evaluator, cell: Cell, w: WindingResult, tol: f64, out: &mut ResonanceSet) -> Result<()> {
    if w.count <= 0 {
        return Ok(());
    }
    if w.count == 1 || cell.diameter() < tol {
        let mult = w.count as u32;
        let guess = w.first_moment / w.count as f64;
        let guess = if cell.contains(guess) { guess } else { cell.center() };
        let (k, steps) = newton_refine(ev, guess, mult, 60)?;
        let k = if cell.contains(k) { k } else { guess };
        let residual = ev.value(k)?.norm();
        let certificate = Certificate {
            r0: cell.r0,
            r1: cell.r1,
            t0: cell.t0,
            t1: cell.t1,
            radius: [
                Complex64::from_polar(cell.r0, cell.t0),
                Complex64::from_polar(cell.r1, cell.t0),
                Complex64::from_polar(cell.r0, cell.t1),
                Complex64::from_polar(cell.r1, cell.t1),
            ]
            .iter()
            .map(|v| (v - k).norm())
            .fold(0.0, f64::max),
        };
        let z = Resonance { k, multiplicity: mult, residual, local_scale: w.median_modulus, newton_steps: steps, certificate };
        if in_closed_k_plus(k) {
            out.defects.push(k);
        } else if w.count == 1 {
            out.zeros.push(z);
        } else {
            out.clusters.push(z);
        }
        return Ok(());
    }
    let mut last_err = None;
    for shift in [0.0, 0.1, -0.1, 0.2, -0.2] {
        let kids = cell.split(shift);
        let res: Vec<Result<WindingResult>> = kids.par_iter().map(|k| certify(ev, k)).collect();
        if let Some(Err(e)) = res.iter().find(|r| r.is_err()) {
            last_err = Some(e.clone());
            continue;
        }
        let ws: Vec<WindingResult> = res.into_iter().map(|r| r.unwrap()).collect();
        let total: i64 = ws.iter().map(|w| w.count).sum();
        if total != w.count {
            last_err = Some(Error::NonInteger { value: total as f64 });
            continue;
        }
        for (kid, kw) in kids.into_iter().zip(ws) {
            resolve(ev, kid, kw, tol, out)?;
        }
        return Ok(());
    }
    Err(last_err.unwrap_or(Error::Cluster { center: cell.center(), size: cell.diameter(), multiplicity: w.count }))
}

/// Locate every zero of D₊ in the region. The region is split into an initial polar grid whose
/// cells are subdivided until each count is 0 or 1; boundaries hitting a zero are shifted.
pub fn find_resonances(c: &Coefficients, region: Region, tol: f64, method: Method) -> Result<ResonanceSet> {
    if region.r_min < EXCLUSION_RADIUS {
        return Err(Error::Domain(format!("region must exclude |k| < {EXCLUSION_RADIUS}")));
    }
    let mut out = ResonanceSet {
        region,
        zeros: Vec::new(),
        boundary_count: 0,
        clusters: Vec::new(),
        defects: Vec::new(),
        exclusion_radius: EXCLUSION_RADIUS,
    };
    if c.is_zero() {
        return Ok(out);
    }
    let ev = Evaluator::new(c, method);
    let whole = Cell { r0: region.r_min, r1: region.r_max, t0: region.theta_min, t1: region.theta_max };
    out.boundary_count = certify(&ev, &whole)?.count;
    // initial grid: angular cells of about unit arc length at the outer radius, radial cells of about 2
    let na = ((region.r_max * (region.theta_max - region.theta_min)) / 1.5).ceil().max(1.0) as usize;
    let nr = ((region.r_max - region.r_min) / 2.0).ceil().max(1.0) as usize;
    let mut cells = Vec::new();
    for i in 0..nr {
        for j in 0..na {
            cells.push(Cell {
                r0: region.r_min + (region.r_max - region.r_min) * i as f64 / nr as f64,
                r1: region.r_min + (region.r_max - region.r_min) * (i + 1) as f64 / nr as f64,
                t0: region.theta_min + (region.theta_max - region.theta_min) * j as f64 / na as f64,
                t1: region.theta_min + (region.theta_max - region.theta_min) * (j + 1) as f64 / na as f64,
            });
        }
    }
    let mut shifted: Vec<Cell> = Vec::new();
    for cell in cells {
        match certify(&ev, &cell) {
            Ok(w) => resolve(&ev, cell, w, tol, &mut out)?,
            Err(_) => shifted.push(cell),
        }
    }
    // cells whose boundary met a zero: merge each with its outward angular neighbour region by
    // re-resolving the union, which the recursive splitter handles with shifted cuts
    for cell in shifted {
        let w = certify(&ev, &cell).or_else(|_| {
            let grown = Cell { t1: cell.t1 + 0.05 * (cell.t1 - cell.t0), ..cell };
            certify(&ev, &grown)
        })?;
        resolve(&ev, cell, w, tol, &mut out)?;
    }
    out.zeros.sort_by(|a, b| a.k.norm().total_cmp(&b.k.norm()).then(a.k.arg().total_cmp(&b.k.arg())));
    Ok(out)
}

/// `find_resonances` on the region and, separately, on the inner annulus from the exclusion radius
/// to `region.r_min`; the union covers EXCLUSION_RADIUS ≤ |k| ≤ r_max and its boundary count is the
/// sum of the two certified counts.
pub fn find_resonances_from_exclusion(c: &Coefficients, region: Region, tol: f64, method: Method) -> Result<ResonanceSet> {
    let mut outer = find_resonances(c, region, tol, method)?;
    if region.r_min <= EXCLUSION_RADIUS {
        return Ok(outer);
    }
    let inner = find_resonances(c, Region { r_min: EXCLUSION_RADIUS, r_max: region.r_min, ..region }, tol, method)?;
    outer.region.r_min = EXCLUSION_RADIUS;
    outer.boundary_count += inner.boundary_count;
    outer.zeros.extend(inner.zeros);
    outer.clusters.extend(inner.clusters);
    outer.defects.extend(inner.defects);
    outer.zeros.sort_by(|a, b| a.k.norm().total_cmp(&b.k.norm()).then(a.k.arg().total_cmp(&b.k.arg())));
    Ok(outer)
}

/// 𝒩(r) and whether 𝒩(r) ≤ (16 + m log 2) + (6γ / log 2) r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingValue {
    pub r: f64,
    pub count: i64,
    pub bound: f64,
    pub bound_holds: bool,
}

pub fn counting_bound(gamma: f64, m: u32, r: f64) -> f64 {
    (16.0 + m as f64 * std::f64::consts::LN_2) + 6.0 * gamma / std::f64::consts::LN_2 * r
}

pub fn counting_function(res: &ResonanceSet, gamma: f64, m: u32, r: f64) -> Result<CountingValue> {
    if r > res.region.r_max || res.region.theta_max - res.region.theta_min < 2.0 * PI - 1e-12 {
        return Err(Error::Domain(format!("zeros are only certified inside the full annulus up to {}", res.region.r_max)));
    }
    let count: i64 = res.zeros.iter().chain(&res.clusters).filter(|z| z.k.norm() < r).map(|z| z.multiplicity as i64).sum();
    let bound = counting_bound(gamma, m, r);
    Ok(CountingValue { r, count, bound, bound_holds: (count as f64) <= bound })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleOrder {
    pub m: u32,
    pub c: Complex64,
    pub slope: f64,
    pub ray: f64,
    /// |k^m D₊(k)| along the ladder.
    pub compensated: Vec<f64>,
}

/// Fit log|D₊(k)| ≈ -m log|k| + log|C| along |k| ∈ [1e-3, 1e-1] on the ray arg k = `ray`.
pub fn estimate_pole_order(c: &Coefficients, ray: f64, method: Method) -> Result<PoleOrder> {
    if c.is_zero() {
        return Ok(PoleOrder { m: 0, c: ONE, slope: 0.0, ray, compensated: vec![1.0; 9] });
    }
    let radii: Vec<f64> = (0..9).map(|j| 10f64.powf(-1.0 - 0.25 * j as f64)).collect();
    let vals: Vec<Complex64> = radii
        .iter()
        .map(|&r| determinant(c, Complex64::from_polar(r, ray), Branch::Plus, method))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = vals.iter().map(|v| v.norm().ln()).collect();
    // slope from the lower half of the ladder, where higher Laurent terms are smallest
    let (xs2, ys2) = (&xs[4..], &ys[4..]);
    let n = xs2.len() as f64;
    let mx = xs2.iter().sum::<f64>() / n;
    let my = ys2.iter().sum::<f64>() / n;
    let sxy: f64 = xs2.iter().zip(ys2).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs2.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let mf = -slope;
    let m = mf.round();
    if (mf - m).abs() > 0.2 || !(0.0..=3.0).contains(&m) {
        return Err(Error::Indeterminate { slope });
    }
    let m = m as u32;
    let comp: Vec<Complex64> = radii.iter().zip(&vals).map(|(&r, v)| v * Complex64::from_polar(r, ray).powu(m)).collect();
    // linear extrapolation of k^m D(k) to k = 0 from the two smallest radii
    let (k1, k2) = (Complex64::from_polar(radii[8], ray), Complex64::from_polar(radii[7], ray));
    let cval = (comp[8] * k2 - comp[7] * k1) / (k2 - k1);
    Ok(PoleOrder { m, c: cval, slope, ray, compensated: comp.iter().map(|v| v.norm()).collect() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadamardData {
    pub m: u32,
    pub c: Complex64,
    pub b: Complex64,
    pub zeros_used: f64,
    pub zeros: Vec<Complex64>,
    /// Max relative error of the reconstruction on the held-out grid.
    pub reconstruction_error: f64,
}

impl HadamardData {
    /// (C/k^m) e^{bk} Π (1 - k/kₙ) e^{k/kₙ} over the truncated zero list.
    pub fn evaluate(&self, k: Complex64) -> Complex64 {
        let mut v = self.c / k.powu(self.m) * (self.b * k).exp();
        for &z in &self.zeros {
            let t = k / z;
            v *= (ONE - t) * t.exp();
        }
        v
    }

    /// log of the truncated product without the 2πiN ambiguity of a single log.
    fn log_product(&self, k: Complex64) -> Complex64 {
        self.zeros.iter().map(|&z| (ONE - k / z).ln() + k / z).sum()
    }

    /// k D'/D from the Hadamard data: -m + bk + k² Σ 1/(kₙ(k - kₙ)).
    pub fn k_log_derivative(&self, k: Complex64) -> Complex64 {
        let s: Complex64 = self.zeros.iter().map(|&z| ONE / (z * (k - z))).sum();
        -(self.m as f64) + self.b * k + k * k * s
    }
}

/// Anchors for b: arg k = π/6, |k| ∈ {2, 3, 4, 5} r*.
pub fn hadamard_anchors(c: &Coefficients) -> Vec<Complex64> {
    let rs = c.structural_constants().r_star;
    (2..=5).map(|j| E_RAY * (j as f64 * rs)).collect()
}

/// Fit b by least squares on differences of log D₊ between anchors on the symmetry ray, where the
/// unknown multiple of 2πi cancels, then report the reconstruction error on `held_out`.
pub fn hadamard_reconstruct(
    c: &Coefficients,
    zeros: &[Complex64],
    r_trunc: f64,
    order: &PoleOrder,
    anchors: &[Complex64],
    held_out: &[Complex64],
    method: Method,
) -> Result<HadamardData> {
    let zs: Vec<Complex64> = zeros.iter().copied().filter(|z| z.norm() <= r_trunc).collect();
    let mut h = HadamardData { m: order.m, c: order.c, b: ZERO, zeros_used: r_trunc, zeros: zs, reconstruction_error: 0.0 };
    if c.is_zero() {
        return Ok(h);
    }
    if anchors.len() < 2 {
        return Err(Error::Domain("need at least two anchors".into()));
    }
    // log D₊ continued along the ray through the anchors, ordered from the outermost one
    let mut path: Vec<Complex64> = anchors.to_vec();
    path.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let start = branch_anchor(c);
    let mut full = vec![start];
    if start.norm() < path[0].norm() {
        full = vec![path[0]];
    }
    full.extend(path.iter().copied());
    let logs = continue_log(c, &full, method)?;
    let ln_of = |k: Complex64| logs.iter().find(|v| v.k == k).and_then(|v| v.log_d).unwrap();
    // residual r(k) = log D - log C + m log k - Σ(...) = b k + const
    let resid: Vec<(Complex64, Complex64)> = path
        .iter()
        .map(|&k| (k, ln_of(k) - h.c.ln() + (h.m as f64) * k.ln() - h.log_product(k)))
        .collect();
    let (k0, r0) = resid[0];
    let mut num = ZERO;
    let mut den = 0.0;
    for &(k, r) in &resid[1..] {
        let dk = k - k0;
        num += dk.conj() * (r - r0);
        den += dk.norm_sqr();
    }
    h.b = num / den;
    let mut worst: f64 = 0.0;
    for &k in held_out {
        let d = determinant(c, k, Branch::Plus, method)?;
        worst = worst.max((h.evaluate(k) - d).norm() / d.norm());
    }
    h.reconstruction_error = worst;
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceFormulaSample {
    pub k: Complex64,
    /// k D₊'/D₊, which equals 3k³ Tr(R₀ - R).
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

pub fn verify_trace_formula(c: &Coefficients, h: &HadamardData, samples: &[Complex64], method: Method) -> Result<Vec<TraceFormulaSample>> {
    samples
        .iter()
        .map(|&k| {
            let (_, ld) = det_and_log_derivative(c, k, Branch::Plus, method)?;
            let lhs = k * ld;
            let rhs = h.k_log_derivative(k);
            Ok(TraceFormulaSample { k, lhs, rhs, residual: (lhs - rhs).norm() })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreitWignerSample {
    pub k: f64,
    /// φ_sc = Im log D₊ on the continued branch.
    pub phase: f64,
    /// Central difference of the phase.
    pub phase_derivative: f64,
    /// Im b + Σ (1/|kₙ - k|² - 1/|kₙ|²) Im kₙ.
    pub resonance_sum: f64,
    pub residual: f64,
}

pub fn breit_wigner_phase(c: &Coefficients, h: &HadamardData, ks: &[f64], step: f64, method: Method) -> Result<Vec<BreitWignerSample>> {
    let mut pts = Vec::with_capacity(3 * ks.len());
    for &k in ks {
        pts.extend([k - step, k, k + step]);
    }
    let mut sorted = pts.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted.dedup();
    let logs = ray_log(c, 0.0, &sorted, method)?;
    let phase_at = |k: f64| {
        let i = sorted.iter().position(|&v| v == k).unwrap();
        logs[i].im
    };
    Ok(ks
        .iter()
        .map(|&k| {
            let phase = phase_at(k);
            let phase_derivative = (phase_at(k + step) - phase_at(k - step)) / (2.0 * step);
            let kc = Complex64::new(k, 0.0);
            let sum: f64 = h.zeros.iter().map(|&z| z.im * (1.0 / (z - kc).norm_sqr() - 1.0 / z.norm_sqr())).sum();
            let resonance_sum = h.b.im + sum;
            BreitWignerSample { k, phase, phase_derivative, resonance_sum, residual: (phase_derivative - resonance_sum).abs() }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JensenCheck {
    pub r: f64,
    /// ∫₀^r 𝒩(t)/t dt = Σ log(r/|kₙ|).
    pub counting_side: f64,
    /// (1/2π)∫ log|F(re^{iθ})| dθ - log|F(0)| with F = k^m D₊.
    pub mean_side: f64,
    pub rel_diff: f64,
}

pub fn jensen_check(c: &Coefficients, zeros: &[Complex64], order: &PoleOrder, r: f64, nodes: usize, method: Method) -> Result<JensenCheck> {
    let counting_side: f64 = zeros.iter().filter(|z| z.norm() < r).map(|z| (r / z.norm()).ln()).sum();
    // periodic integrand: trapezoid rule is spectrally accurate
    let vals: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let k = Complex64::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / nodes as f64);
            determinant(c, k, Branch::Plus, method).map(|d| (d * k.powu(order.m)).norm().ln())
        })
        .collect::<Result<_>>()?;
    let mean_side = vals.iter().sum::<f64>() / nodes as f64 - order.c.norm().ln();
    let rel_diff = (counting_side - mean_side).abs() / counting_side.abs().max(mean_side.abs()).max(1e-300);
    Ok(JensenCheck { r, counting_side, mean_side, rel_diff })
}

/// Contour bounding {k : 0 < arg k < π/3, r0 ≤ |k| ≤ r1}.
pub fn k_plus_contour(r0: f64, r1: f64) -> Contour {
    Contour::polar_cell(r0, r1, 0.0, FRAC_PI_3)
}
