//! Named residual checks grouped into suites. Each check reports the worst residual over its samples
//! against a fixed tolerance. Samples come from a seeded ChaCha stream per suite, so a run is
//! reproducible and independent of which other suites are selected.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::Coefficients;
use crate::config::{BornSpec, JobConfig};
use crate::error::{Error, Result};
use crate::fredholm::{
    det_and_log_derivative, determinant, log_derivative, ray_log, trace_closed_form, trace_y, Grid, Method, NystromOptions,
    NystromSystem, Scheme,
};
use crate::identities::{continuation_identity, growth_bounds, rank_one_residuals, resolvent_trace, trace_identity, GrowthBound};
use crate::resolvent::{p_kernel, Branch, ExpKernel, KernelKind, Rotations, E_MINUS, E_PLUS, E_RAY, E_STAR, I, ONE};
use crate::resonances::{
    breit_wigner_phase, counting_function, estimate_pole_order, find_resonances_from_exclusion, hadamard_anchors,
    hadamard_reconstruct, jensen_check, k_plus_contour, verify_trace_formula, winding, Evaluator, Region,
};
use crate::scattering::{amplitude_born, amplitude_born_quadrature, f_minus, f_plus, norm2, psi1, psi2, smatrix_minus, smatrix_plus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Kernels,
    Determinant,
    Scattering,
    Identities,
    Bounds,
    Resonances,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Kernels, Suite::Determinant, Suite::Scattering, Suite::Identities, Suite::Bounds, Suite::Resonances];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Kernels => "kernels",
            Suite::Determinant => "determinant",
            Suite::Scattering => "scattering",
            Suite::Identities => "identities",
            Suite::Bounds => "bounds",
            Suite::Resonances => "resonances",
        }
    }
}

/// "all" or a comma-separated list of suite names.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if part == "all" {
            out.extend(Suite::ALL);
            continue;
        }
        match Suite::ALL.iter().find(|x| x.name() == part) {
            Some(&x) => out.push(x),
            None => return Err(Error::Config(format!("unknown suite {part:?}; expected all or one of kernels, determinant, scattering, identities, bounds, resonances"))),
        }
    }
    if out.is_empty() {
        return Err(Error::Config("no suite selected".into()));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub id: String,
    pub residual: f64,
    pub tolerance: f64,
    pub status: Status,
    pub note: String,
}

impl Check {
    /// PASS iff residual ≤ tolerance; NaN fails.
    fn at_most(suite: Suite, id: &str, residual: f64, tolerance: f64, note: impl Into<String>) -> Self {
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        Self { suite, id: id.into(), residual, tolerance, status, note: note.into() }
    }

    fn from_result(suite: Suite, id: &str, r: Result<f64>, tolerance: f64) -> Self {
        match r {
            Ok(v) => Self::at_most(suite, id, v, tolerance, ""),
            Err(e) => Self { suite, id: id.into(), residual: f64::NAN, tolerance, status: Status::Fail, note: e.to_string() },
        }
    }

    fn skip(suite: Suite, id: &str, reason: &str) -> Self {
        Self { suite, id: id.into(), residual: 0.0, tolerance: 0.0, status: Status::Skip, note: reason.into() }
    }

    fn with_note(mut self, note: String) -> Self {
        if self.note.is_empty() {
            self.note = note;
        } else {
            self.note = format!("{}; {note}", self.note);
        }
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<44} {:>10.3e} {:>9.1e} {}", self.id, self.residual, self.tolerance, self.status)?;
        if !self.note.is_empty() {
            write!(f, "  # {}", self.note)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub nodes: usize,
    pub seed: u64,
    pub bound_samples: usize,
    /// Evaluator for searches, continuation and sampled bounds.
    pub search: Method,
    pub region: Region,
    pub zero_tol: f64,
    pub counting_radii: Vec<f64>,
    pub truncations: Vec<f64>,
    pub born: BornSpec,
    /// Mutation hook: build kernels with e₊ and e₋ exchanged in their coefficients.
    pub swap_rotations: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        let cfg = JobConfig::default();
        Self::from_config(&cfg).expect("default config is valid")
    }
}

impl VerifyOptions {
    pub fn from_config(cfg: &JobConfig) -> Result<Self> {
        Ok(Self {
            nodes: cfg.numerics.nodes,
            seed: cfg.verify.seed,
            bound_samples: cfg.verify.bound_samples,
            search: cfg.numerics.search_method(),
            region: cfg.region.region()?,
            zero_tol: cfg.tolerances.zero,
            counting_radii: cfg.region.radii.clone(),
            truncations: cfg.region.truncations.clone(),
            born: cfg.born.clone(),
            swap_rotations: false,
        })
    }

    fn rotations(&self) -> Rotations {
        if self.swap_rotations {
            Rotations::swapped()
        } else {
            Rotations::default()
        }
    }

    fn nystrom(&self) -> Method {
        Method::Nystrom { n: self.nodes }
    }
}

pub fn run(c: &Coefficients, suites: &[Suite], opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    for &s in suites {
        let mut rng = Sampler::new(opts.seed, s);
        out.extend(match s {
            Suite::Kernels => kernels(c, opts, &mut rng),
            Suite::Determinant => determinant_suite(c, opts, &mut rng),
            Suite::Scattering => scattering(c, opts, &mut rng),
            Suite::Identities => identities(c, opts, &mut rng),
            Suite::Bounds => bounds(c, opts, &mut rng),
            Suite::Resonances => resonances(c, opts),
        });
    }
    out
}

pub fn any_failed(checks: &[Check]) -> bool {
    checks.iter().any(|c| c.status == Status::Fail)
}

struct Sampler(ChaCha8Rng);

impl Sampler {
    fn new(seed: u64, suite: Suite) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ suite as u64))
    }
    fn k(&mut self, r: (f64, f64), a: (f64, f64)) -> Complex64 {
        Complex64::from_polar(self.0.gen_range(r.0..r.1), self.0.gen_range(a.0..a.1))
    }
    fn ks(&mut self, count: usize, r: (f64, f64), a: (f64, f64)) -> Vec<Complex64> {
        (0..count).map(|_| self.k(r, a)).collect()
    }
    fn real(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.gen_range(lo..hi)
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    }
}

/// Worst value over the samples, evaluated in parallel; the first error wins.
fn worst<T: Sync, F: Fn(&T) -> Result<f64> + Sync + Send>(items: &[T], f: F) -> Result<f64> {
    let vals: Vec<Result<f64>> = items.par_iter().map(f).collect();
    let mut m: f64 = 0.0;
    for v in vals {
        let v = v?;
        if v.is_nan() {
            return Ok(f64::NAN);
        }
        m = m.max(v);
    }
    Ok(m)
}

/// Largest ratio between consecutive values (next / previous); ≤ 1 means non-increasing.
/// Zero over zero counts as 0.
fn step_ratio(vals: &[f64]) -> f64 {
    vals.windows(2)
        .map(|w| match (w[0], w[1]) {
            (_, b) if b == 0.0 => 0.0,
            (a, _) if a == 0.0 => f64::INFINITY,
            (a, b) => b / a,
        })
        .fold(0.0, f64::max)
}

fn list(vals: &[f64]) -> String {
    vals.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
}

const SIXTY_DEG: (f64, f64) = (0.0, FRAC_PI_3);
const FULL: (f64, f64) = (-PI, PI);

fn kernels(c: &Coefficients, opts: &VerifyOptions, rng: &mut Sampler) -> Vec<Check> {
    let s = Suite::Kernels;
    let rot = opts.rotations();
    let ker = |kind, b, k| ExpKernel::new(kind, b, k, rot);
    let scaled = |err: Complex64, rhs: Complex64| err.norm() / rhs.norm().max(1.0);
    let mut d = [0.0f64; 4];
    for _ in 0..40 {
        let k = rng.k((0.5, 3.0), FULL);
        let t = rng.real(-1.0, 1.0);
        let (kp, km) = (E_PLUS * k, E_MINUS * k);
        let r = |b, kk| ker(KernelKind::R0, b, kk).eval(t);
        let dr = |b, kk| ker(KernelKind::DR0, b, kk).eval(t);
        let rhs = I / (3.0 * k * k) * (I * t * k).exp();
        d[0] = d[0].max(scaled(r(Branch::Plus, k) - r(Branch::Minus, k) - rhs, rhs));
        let rhs = I * E_PLUS / (3.0 * k * k) * (I * t * kp).exp();
        d[1] = d[1].max(scaled(r(Branch::Plus, k) - r(Branch::Minus, km) - rhs, rhs));
        let rhs = I / (3.0 * k) * (I * t * k).exp();
        d[2] = d[2].max(scaled(dr(Branch::Plus, k) - dr(Branch::Minus, k) - rhs, rhs));
        let rhs = I * E_MINUS / (3.0 * k) * (I * t * kp).exp();
        d[3] = d[3].max(scaled(dr(Branch::Plus, k) - dr(Branch::Minus, km) - rhs, rhs));
    }
    let mut out = vec![
        Check::at_most(s, "kernel.difference", d[0], 1e-12, ""),
        Check::at_most(s, "kernel.rotated_difference", d[1], 1e-12, ""),
        Check::at_most(s, "kernel.derivative_difference", d[2], 1e-12, ""),
        Check::at_most(s, "kernel.derivative_rotated_difference", d[3], 1e-12, ""),
    ];

    let mut ray: f64 = 0.0;
    for _ in 0..20 {
        let v = ker(KernelKind::R0, Branch::Plus, E_RAY * rng.real(0.5, 5.0)).eval(rng.real(-1.0, 1.0));
        ray = ray.max((I * v).im.abs() / v.norm().max(1.0));
    }
    out.push(Check::at_most(s, "kernel.symmetry_ray_reality", ray, 1e-12, ""));

    let mut cont: f64 = 0.0;
    for _ in 0..20 {
        let k = rng.k((0.5, 5.0), FULL);
        for b in [Branch::Plus, Branch::Minus] {
            for kind in [KernelKind::R0, KernelKind::DR0] {
                let e = ker(kind, b, k);
                let scale = e.diag.norm().max(1.0);
                cont = cont.max((e.eval_gt(0.0) - e.eval_lt(0.0)).norm() / scale);
                cont = cont.max((e.eval_gt(0.0) - e.diag).norm() / scale);
            }
        }
    }
    out.push(Check::at_most(s, "kernel.continuity_at_zero", cont, 1e-13, ""));

    // ∂R₀ = -i d/dt R₀ by central differences away from t = 0
    let h = 1e-5;
    let mut pts = vec![(E_RAY, 0.3), (E_RAY, -0.3)];
    for _ in 0..10 {
        let t = rng.real(0.05, 1.0) * if rng.real(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
        pts.push((rng.k((0.5, 1.5), FULL), t));
    }
    let mut fd: f64 = 0.0;
    for (k, t) in pts {
        for b in [Branch::Plus, Branch::Minus] {
            let r = ker(KernelKind::R0, b, k);
            let num = -I * (r.eval(t + h) - r.eval(t - h)) / (2.0 * h);
            let v = ker(KernelKind::DR0, b, k).eval(t);
            fd = fd.max((v - num).norm() / v.norm().max(1.0));
        }
    }
    out.push(Check::at_most(s, "kernel.derivative_finite_difference", fd, 1e-8, ""));

    let rank = (|| -> Result<f64> {
        let grid = Grid::new(c, 64)?;
        let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
        let mut worst_ratio: f64 = 0.0;
        for k in [ONE, Complex64::new(1.5, 2.0), Complex64::new(-3.0, -0.5)] {
            let mut m = DMatrix::zeros(grid.nodes.len(), grid.nodes.len());
            for i in 0..grid.nodes.len() {
                for j in 0..grid.nodes.len() {
                    m[(i, j)] = p_kernel(c, k, grid.nodes[i], grid.nodes[j])? * (sw[i] * sw[j]);
                }
            }
            let sv = m.singular_values();
            let mut v: Vec<f64> = sv.iter().copied().collect();
            v.sort_by(|a, b| b.total_cmp(a));
            if v[0] > 0.0 {
                worst_ratio = worst_ratio.max(v[1] / v[0]);
            }
        }
        Ok(worst_ratio)
    })();
    out.push(Check::from_result(s, "kernel.difference_rank_one", rank, 1e-12));
    out
}

fn determinant_suite(c: &Coefficients, opts: &VerifyOptions, rng: &mut Sampler) -> Vec<Check> {
    let s = Suite::Determinant;
    let nm = opts.nystrom();
    let n = opts.nodes;
    let mut out = Vec::new();

    let ks = rng.ks(50, (0.5, 10.0), FULL);
    let r = worst(&ks, |&k| {
        let dp = determinant(c, k, Branch::Plus, nm)?;
        let dm = determinant(c, k.conj(), Branch::Minus, nm)?;
        Ok(rel(dm.conj(), dp))
    });
    out.push(Check::from_result(s, "determinant.conjugation", r, 1e-9));

    let ks = rng.ks(10, (0.5, 10.0), FULL);
    let r = worst(&ks, |&k| {
        let a = determinant(c, k, Branch::Plus, Method::Nystrom { n })?;
        let b = determinant(c, k, Branch::Plus, Method::Nystrom { n: 2 * n })?;
        Ok(rel(a, b))
    });
    out.push(Check::from_result(s, "determinant.node_doubling", r, 1e-8));

    let ks = rng.ks(10, (0.5, 10.0), FULL);
    let r = worst(&ks, |&k| {
        let a = determinant(c, k, Branch::Plus, nm)?;
        let b = determinant(c, k, Branch::Plus, Method::Ode { steps_per_unit: None })?;
        Ok(rel(b, a))
    });
    out.push(Check::from_result(s, "determinant.route_agreement", r, 1e-8));

    let ks = rng.ks(10, (0.5, 8.0), FULL);
    let neg = c.with_negated_q();
    let refl = |k: Complex64| E_STAR * k.conj();
    let r = worst(&ks, |&k| Ok(rel(determinant(c, k, Branch::Plus, nm)?.conj(), determinant(c, refl(k), Branch::Plus, nm)?)));
    out.push(Check::from_result(s, "determinant.ray_reflection", r, 1e-9));
    let r = worst(&ks, |&k| Ok(rel(determinant(&neg, k, Branch::Plus, nm)?.conj(), determinant(c, refl(k), Branch::Plus, nm)?)));
    out.push(Check::from_result(s, "determinant.ray_reflection_negated_q", r, 1e-9));

    let ks = rng.ks(20, (0.5, 10.0), FULL);
    let r = worst(&ks, |&k| {
        let mut m: f64 = 0.0;
        for b in [Branch::Plus, Branch::Minus] {
            let (closed, numeric) = trace_y(c, k, b, n)?;
            m = m.max(rel(numeric, closed));
        }
        Ok(m)
    });
    out.push(Check::from_result(s, "determinant.trace_closed_form", r, 1e-8));

    let ks = rng.ks(10, (0.5, 6.0), FULL);
    let r = worst(&ks, |&k| Ok(log_derivative(c, k, Branch::Plus, n, 1e-4)?.rel_error));
    out.push(Check::from_result(s, "determinant.log_derivative_finite_difference", r, 1e-6));
    out
}

fn scattering(c: &Coefficients, opts: &VerifyOptions, rng: &mut Sampler) -> Vec<Check> {
    let s = Suite::Scattering;
    let n = opts.nodes;
    let gamma = c.gamma();
    let mut out = Vec::new();

    let ks = rng.ks(10, (0.5, 5.0), FULL);
    let r = worst(&ks, |&k| Ok(rel(amplitude_born_quadrature(c, k, n)?, amplitude_born(c, k))));
    out.push(Check::from_result(s, "scattering.born_amplitude_quadrature", r, 1e-10));

    let reals: Vec<Complex64> = (0..15).map(|j| Complex64::new(1.0 + 0.5 * j as f64, 0.0)).collect();
    let vals: Vec<Result<_>> = reals.par_iter().map(|&k| smatrix_plus(c, k, n)).collect();
    let vals: Result<Vec<_>> = vals.into_iter().collect();
    out.push(Check::from_result(s, "scattering.birman_krein", vals.as_ref().map(|v| v.iter().map(|x| x.discrepancy).fold(0.0, f64::max)).map_err(Clone::clone), 1e-6));
    out.push(Check::from_result(
        s,
        "scattering.unitarity",
        vals.as_ref()
            .map(|v| v.iter().map(|x| (x.s.norm() - 1.0).abs().max((x.s_det.norm() - 1.0).abs())).fold(0.0, f64::max))
            .map_err(Clone::clone),
        1e-8,
    ));

    let ks: Vec<Complex64> = (1..=8).map(|j| E_STAR * j as f64).collect();
    let r = worst(&ks, |&k| Ok(smatrix_minus(c, k, n)?.discrepancy));
    out.push(Check::from_result(s, "scattering.rotated_birman_krein", r, 1e-6));

    let rs = c.structural_constants().r_star;
    let ks = rng.ks(20, (rs, rs + 8.0), SIXTY_DEG);
    let r = worst(&ks, |&k| {
        let v = smatrix_plus(c, k, n)?;
        Ok((v.s_det - ONE).norm() / ((1.0 + (gamma * k.im.max(0.0)).exp()) / 6.0))
    });
    out.push(Check::from_result(s, "scattering.s_minus_one_bound", r, 1.0));

    let ks = rng.ks(20, (0.5, 8.0), FULL);
    let r = (|| -> Result<f64> {
        let grid = Grid::new(c, n)?;
        let s2 = (2.0 * PI).sqrt();
        let mut m: f64 = 0.0;
        for &k in &ks {
            let b1 = gamma.sqrt() / s2 * (gamma * k.im.max(0.0)).exp();
            let b2 = c.norm_v(k) / s2 * (gamma * (-k.im).max(0.0)).exp();
            m = m.max(norm2(&psi1(&grid, k)) / b1);
            if b2 > 0.0 {
                m = m.max(norm2(&psi2(&grid, c, k)) / b2);
            }
        }
        Ok(m)
    })();
    out.push(Check::from_result(s, "scattering.psi_norm_bounds", r, 1.0 + 1e-10));

    if c.has_p() {
        for id in ["born.decay_trend", "born.growth_trend", "born.minus_decay_trend"] {
            out.push(Check::skip(s, id, "Born-term diagnostics assume p = 0"));
        }
        return out;
    }
    let series = |angle: f64, minus: bool| -> Vec<f64> {
        opts.born
            .radii
            .iter()
            .map(|&r| {
                let k = Complex64::from_polar(r, angle);
                let zeta = (E_PLUS - ONE) * k;
                if minus {
                    f_minus(c, E_STAR * zeta).norm()
                } else {
                    f_plus(c, zeta).norm()
                }
            })
            .collect()
    };
    let decay: Vec<f64> = opts.born.angles.iter().filter(|&&a| (0.0..=FRAC_PI_6).contains(&a)).copied().collect();
    let growth: Vec<f64> = opts.born.angles.iter().filter(|&&a| a > FRAC_PI_6 && a <= FRAC_PI_3).copied().collect();
    let mut worst_dec: f64 = 0.0;
    let mut notes = Vec::new();
    for &a in &decay {
        let v = series(a, false);
        worst_dec = worst_dec.max(step_ratio(&v));
        notes.push(format!("arg {a:.4}: {}", list(&v)));
    }
    out.push(Check::at_most(s, "born.decay_trend", worst_dec, 1.0, notes.join("; ")));
    let mut worst_inc: f64 = 0.0;
    let mut notes = Vec::new();
    for &a in &growth {
        let mut v = series(a, false);
        notes.push(format!("arg {a:.4}: {}", list(&v)));
        v.reverse();
        worst_inc = worst_inc.max(step_ratio(&v));
    }
    out.push(Check::at_most(s, "born.growth_trend", worst_inc, 1.0, notes.join("; ")));
    let mut worst_m: f64 = 0.0;
    let mut notes = Vec::new();
    for &a in &opts.born.angles {
        let v = series(a, true);
        worst_m = worst_m.max(step_ratio(&v));
        notes.push(format!("arg {a:.4}: {}", list(&v)));
    }
    out.push(Check::at_most(s, "born.minus_decay_trend", worst_m, 1.0, notes.join("; ")));
    out
}

fn identities(c: &Coefficients, opts: &VerifyOptions, rng: &mut Sampler) -> Vec<Check> {
    let s = Suite::Identities;
    let n = opts.nodes;
    let rot = opts.rotations();
    let mut out = Vec::new();

    let ks = rng.ks(5, (0.5, 5.0), FULL);
    let rr: Vec<Result<_>> = ks.par_iter().map(|&k| rank_one_residuals(c, k, n, rot)).collect();
    let rr: Result<Vec<_>> = rr.into_iter().collect();
    let pick = |f: fn(&crate::identities::RankOneResidual) -> f64| rr.as_ref().map(|v| v.iter().map(f).fold(0.0, f64::max)).map_err(Clone::clone);
    out.push(Check::from_result(s, "operator.rank_one_difference", pick(|r| r.first), 1e-10));
    out.push(Check::from_result(s, "operator.rotated_rank_one_difference", pick(|r| r.second), 1e-10));
    out.push(Check::from_result(s, "determinant.rank_one_update", pick(|r| r.det_first), 1e-10));
    out.push(Check::from_result(s, "determinant.rotated_rank_one_update", pick(|r| r.det_second), 1e-10));

    let margin = 0.1;
    let sectors = [
        ("continuation.rank_one", (FRAC_PI_3 + margin, 2.0 * FRAC_PI_3 - margin)),
        ("continuation.rotated", (2.0 * FRAC_PI_3 + margin, PI - margin)),
        ("continuation.block", (-PI + margin, -2.0 * FRAC_PI_3 - margin)),
    ];
    for (id, arc) in sectors {
        let ks = rng.ks(5, (1.0, 4.0), arc);
        let res: Vec<Result<_>> = ks.par_iter().map(|&k| continuation_identity(c, k, n)).collect();
        let res: Result<Vec<_>> = res.into_iter().collect();
        let check = Check::from_result(s, id, res.as_ref().map(|v| v.iter().map(|x| x.residual).fold(0.0, f64::max)).map_err(Clone::clone), 1e-6);
        let check = match &res {
            Ok(v) if id == "continuation.rank_one" && !c.is_zero() => match v.iter().filter_map(|x| x.residual_without_rotation_factor).reduce(f64::max) {
                Some(w) => check.with_note(format!("form without the e+ factor: {w:.3e}")),
                None => check,
            },
            _ => check,
        };
        out.push(check);
    }

    let ks = rng.ks(3, (1.0, 4.0), (0.1, FRAC_PI_3 - 0.1));
    let r = worst(&ks, |&k| Ok(resolvent_trace(c, k, n)?.rel_error));
    out.push(Check::from_result(s, "resolvent.trace_of_log_derivative", r, 1e-6));

    out.extend(asymptotics(c, opts));
    out.extend(trace_identity_checks(c, opts));
    out
}

/// log D₊ minus the two-term expansion along arg k = π/6 at |k| ∈ {20, 40, 80}.
fn asymptotics(c: &Coefficients, opts: &VerifyOptions) -> Vec<Check> {
    let s = Suite::Identities;
    let radii = [20.0, 40.0, 80.0];
    let res = (|| -> Result<Vec<f64>> {
        let logs = ray_log(c, FRAC_PI_6, &radii, opts.search)?;
        radii
            .iter()
            .zip(&logs)
            .map(|(&r, &l)| Ok((l - trace_closed_form(c, E_RAY * r, Branch::Plus)?).norm()))
            .collect()
    })();
    match res {
        Err(e) => vec![
            Check::from_result(s, "asymptotics.cube_law_window", Err(e.clone()), 2.0),
            Check::from_result(s, "asymptotics.error_order", Err(e), 1.0),
        ],
        Ok(v) if v.iter().all(|&x| x == 0.0) => vec![
            Check::at_most(s, "asymptotics.cube_law_window", 0.0, 2.0, "expansion is exact"),
            Check::at_most(s, "asymptotics.error_order", 0.0, 1.0, "expansion is exact"),
        ],
        Ok(v) => {
            let ratios: Vec<f64> = v.windows(2).map(|w| w[0] / w[1]).collect();
            let window = ratios.iter().map(|r| (r - 8.0).abs()).fold(0.0, f64::max);
            let scaled: Vec<f64> = v.iter().zip(&radii).map(|(x, r)| x * r * r * r).collect();
            let note = format!("residuals {}; ratios {}", list(&v), list(&ratios));
            vec![
                Check::at_most(s, "asymptotics.cube_law_window", window, 2.0, note.clone()),
                Check::at_most(s, "asymptotics.error_order", step_ratio(&scaled), 1.0, format!("|res| k^3: {}", list(&scaled))),
            ]
        }
    }
}

fn trace_identity_checks(c: &Coefficients, opts: &VerifyOptions) -> Vec<Check> {
    let s = Suite::Identities;
    let windows = [5.0, 10.0, 20.0, 40.0];
    let res = (|| -> Result<Vec<f64>> {
        let order = estimate_pole_order(c, PI / 12.0, opts.search)?;
        let vals = trace_identity(c, &windows, order.m, 1e-3, opts.search)?;
        Ok(vals.iter().map(|v| (v.integral - v.target).abs()).collect())
    })();
    match res {
        Err(e) => vec![
            Check::from_result(s, "trace_identity.window_trend", Err(e.clone()), 1.0),
            Check::from_result(s, "trace_identity.limit", Err(e), 1e-5),
        ],
        Ok(v) => vec![
            Check::at_most(s, "trace_identity.window_trend", step_ratio(&v), 1.0, format!("errors {}", list(&v))),
            Check::at_most(s, "trace_identity.limit", *v.last().unwrap(), 1e-5, format!("window |k| <= {}", windows[3])),
        ],
    }
}

fn bounds(c: &Coefficients, opts: &VerifyOptions, rng: &mut Sampler) -> Vec<Check> {
    let s = Suite::Bounds;
    let n = opts.nodes;
    let rs = c.structural_constants().r_star;
    let mut out = Vec::new();

    let ks = rng.ks(100, (rs, rs + 20.0), FULL);
    let r = worst(&ks, |&k| Ok(trace_closed_form(c, k, Branch::Plus)?.norm()));
    out.push(Check::from_result(s, "bounds.trace_quarter", r, 0.25));

    let ks = rng.ks(40, (rs, rs + 10.0), SIXTY_DEG);
    let vals: Vec<Result<(f64, f64, f64)>> = ks
        .par_iter()
        .map(|&k| {
            let plain = NystromSystem::build_with(c, k, Branch::Plus, NystromOptions { n, scheme: Scheme::Plain }, Rotations::default())?;
            let d = determinant(c, k, Branch::Plus, Method::Nystrom { n })?;
            let log = d.ln();
            let tr = trace_closed_form(c, k, Branch::Plus)?;
            Ok((plain.hs_norm, (log - tr).norm(), log.norm()))
        })
        .collect();
    let vals: Result<Vec<_>> = vals.into_iter().collect();
    let col = |j: usize| vals.as_ref().map(|v| v.iter().map(|t| [t.0, t.1, t.2][j]).fold(0.0, f64::max)).map_err(Clone::clone);
    out.push(Check::from_result(s, "bounds.hilbert_schmidt_half", col(0), 0.5));
    out.push(Check::from_result(s, "bounds.series_first_order", col(1), std::f64::consts::LN_2 - 0.5));
    out.push(Check::from_result(s, "bounds.log_modulus", col(2), 2.0));

    let ks = rng.ks(opts.bound_samples, (rs, rs + 8.0), FULL);
    let samples: Vec<Result<_>> = ks.par_iter().map(|&k| growth_bounds(c, k, opts.search)).collect();
    let samples: Result<Vec<_>> = samples.into_iter().collect();
    let ids = [
        (GrowthBound::Global, "bounds.global_growth"),
        (GrowthBound::MinusOnKPlus, "bounds.minus_on_k_plus"),
        (GrowthBound::KPlusPrime, "bounds.k_plus_prime"),
        (GrowthBound::KPlusDoublePrime, "bounds.k_plus_double_prime"),
        (GrowthBound::LowerLeft, "bounds.lower_left_sector"),
    ];
    for (which, id) in ids {
        match &samples {
            Err(e) => out.push(Check::from_result(s, id, Err(e.clone()), 1.0)),
            Ok(v) => {
                let hits: Vec<f64> = v.iter().flatten().filter(|b| b.bound == which).map(|b| b.value / b.limit).collect();
                let m = hits.iter().copied().fold(0.0, f64::max);
                out.push(Check::at_most(s, id, m, 1.0, format!("{} samples", hits.len())));
            }
        }
    }
    out
}

fn resonances(c: &Coefficients, opts: &VerifyOptions) -> Vec<Check> {
    let s = Suite::Resonances;
    let m = opts.search;
    let mut out = Vec::new();
    let r_max = opts.region.r_max;

    let w = winding(&Evaluator::new(c, m), &k_plus_contour(0.05, r_max));
    let w = if c.is_zero() { Ok(0.0) } else { w.map(|w| w.raw.abs()) };
    out.push(Check::from_result(s, "resonances.k_plus_zero_free", w, 0.05));

    let set = match find_resonances_from_exclusion(c, opts.region, opts.zero_tol, m) {
        Ok(v) => v,
        Err(e) => {
            out.push(Check::from_result(s, "resonances.certified_count", Err(e), 0.0));
            return out;
        }
    };
    let mismatch = (set.boundary_count - set.total_multiplicity()).abs() as f64;
    out.push(Check::at_most(
        s,
        "resonances.certified_count",
        mismatch,
        0.0,
        format!("boundary count {}, located {} on {} <= |k| <= {}", set.boundary_count, set.total_multiplicity(), set.region.r_min, r_max),
    ));
    out.push(Check::at_most(s, "resonances.closed_sector_defects", set.defects.len() as f64, 0.0, ""));

    let order = match estimate_pole_order(c, PI / 12.0, m) {
        Ok(o) => o,
        Err(e) => {
            out.push(Check::from_result(s, "resonances.pole_order_rays", Err(e), 0.0));
            return out;
        }
    };
    let other = estimate_pole_order(c, PI / 5.0, m);
    out.push(Check::from_result(s, "resonances.pole_order_rays", other.map(|o| (o.m as f64 - order.m as f64).abs()), 0.0).with_note(format!("m = {}", order.m)));
    let lo = order.compensated.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = order.compensated.iter().copied().fold(0.0, f64::max);
    out.push(Check::at_most(s, "resonances.compensated_pole_bounded", if lo > 0.0 { hi / lo } else { f64::INFINITY }, 2.0, ""));

    let mut worst_count: f64 = 0.0;
    for &r in &opts.counting_radii {
        match counting_function(&set, c.gamma(), order.m, r) {
            Ok(v) => worst_count = worst_count.max(v.count as f64 / v.bound),
            Err(e) => {
                out.push(Check::from_result(s, "resonances.counting_bound", Err(e), 1.0));
                worst_count = f64::NAN;
                break;
            }
        }
    }
    if !worst_count.is_nan() {
        out.push(Check::at_most(s, "resonances.counting_bound", worst_count, 1.0, "max N(r) / bound"));
    }

    let zeros: Vec<Complex64> = set.zeros.iter().chain(&set.clusters).flat_map(|z| std::iter::repeat_n(z.k, z.multiplicity as usize)).collect();
    let jr = (2.0 * r_max / 3.0).max(set.region.r_min * 2.0);
    let j = jensen_check(c, &zeros, &order, jr, 256, m).map(|j| j.rel_diff);
    out.push(Check::from_result(s, "resonances.jensen", j, 0.01).with_note(format!("r = {jr}")));

    let held: Vec<Complex64> = (0..12).map(|j| Complex64::from_polar(1.0 + 0.15 * j as f64, 0.3 + 0.5 * j as f64)).collect();
    let anchors = hadamard_anchors(c);
    let tf_point = [2.0 * E_RAY];
    let bw_grid: Vec<f64> = (0..9).map(|j| 1.0 + 0.5 * j as f64).collect();
    let mut recon = Vec::new();
    let mut tf = Vec::new();
    let mut bw = Vec::new();
    let mut bs = Vec::new();
    let mut last = None;
    for &rt in &opts.truncations {
        let step = (|| -> Result<_> {
            let h = hadamard_reconstruct(c, &zeros, rt, &order, &anchors, &held, m)?;
            let t = verify_trace_formula(c, &h, &tf_point, m)?;
            let b = breit_wigner_phase(c, &h, &bw_grid, 1e-4, m)?;
            Ok((h, t, b))
        })();
        match step {
            Ok((h, t, b)) => {
                recon.push(h.reconstruction_error);
                tf.push(t[0].residual);
                bw.push(b.iter().map(|x| x.residual).fold(0.0, f64::max));
                bs.push(h.b);
                last = Some((h, b));
            }
            Err(e) => {
                out.push(Check::from_result(s, "hadamard.truncation_trend", Err(e), 1.0));
                return out;
            }
        }
    }
    let rts = list(&opts.truncations);
    let bnote = bs.iter().map(|b| format!("{:.4}{:+.4}i", b.re, b.im)).collect::<Vec<_>>().join(", ");
    out.push(Check::at_most(s, "hadamard.truncation_trend", step_ratio(&recon), 1.0, format!("R {rts}: errors {}; b {bnote}", list(&recon))));
    out.push(Check::at_most(s, "hadamard.reconstruction_small_k", *recon.last().unwrap_or(&0.0), 0.05, format!("|k| <= 3, R = {}", opts.truncations.last().unwrap_or(&0.0))));
    out.push(Check::at_most(s, "trace_formula.truncation_trend", step_ratio(&tf), 1.0, format!("R {rts}: residuals {}", list(&tf))));
    out.push(Check::at_most(s, "breit_wigner.truncation_trend", step_ratio(&bw), 1.0, format!("R {rts}: residuals {}", list(&bw))));

    let k0 = tf_point[0];
    let lhs = (|| -> Result<f64> {
        let (_, a) = det_and_log_derivative(c, k0, Branch::Plus, Method::Nystrom { n: opts.nodes })?;
        let (_, b) = det_and_log_derivative(c, k0, Branch::Plus, Method::Nystrom { n: 2 * opts.nodes })?;
        Ok(rel(k0 * a, k0 * b))
    })();
    out.push(Check::from_result(s, "trace_formula.node_doubling", lhs, 1e-6));

    if let Some((_, b)) = last {
        let r = worst(&b, |x| {
            let sv = smatrix_plus(c, Complex64::new(x.k, 0.0), opts.nodes)?;
            Ok((sv.s - Complex64::from_polar(1.0, -2.0 * x.phase)).norm())
        });
        out.push(Check::from_result(s, "breit_wigner.phase_consistency", r, 1e-7));
    }
    out
}
