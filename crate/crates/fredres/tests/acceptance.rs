//! One PASS/FAIL line per acceptance criterion, at the stated tolerances.
//!
//! Criteria known to fail as stated are listed in `KNOWN_FAILING`; the test asserts that every
//! other criterion passes and that the listed ones still fail, so a change in either direction
//! shows up.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use fredres::fredholm::{determinant, trace_y, Method};
use fredres::resolvent::Branch;
use fredres::resonances::{find_resonances, Region};
use fredres::scattering::smatrix_plus;
use fredres::verify::{run, Check, Status, Suite, VerifyOptions};
use fredres::{Coefficients, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Ray reflection of the determinant for the same potential, the cube-law window of the
/// large-|k| residual, and monotone truncation trends of the trace and Breit-Wigner formulas.
const KNOWN_FAILING: [u32; 3] = [4, 8, 17];

struct Line {
    pass: bool,
    detail: String,
}

struct Report(BTreeMap<u32, Vec<Line>>);

impl Report {
    fn add(&mut self, criterion: u32, pass: bool, detail: impl Into<String>) {
        self.0.entry(criterion).or_default().push(Line { pass, detail: detail.into() });
    }

    fn checks(&mut self, criterion: u32, label: &str, checks: &[Check], ids: &[&str]) {
        for id in ids {
            let c = checks.iter().find(|c| c.id == *id).unwrap_or_else(|| panic!("missing check {id}"));
            let pass = c.status == Status::Pass;
            self.add(criterion, pass, format!("{label} {}: {:.3e} (tol {:.1e}) {}", c.id, c.residual, c.tolerance, c.note));
        }
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn zero_exactness(r: &mut Report) {
    let c = Coefficients::zero(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut dev: f64 = 0.0;
    for _ in 0..20 {
        let k = Complex64::from_polar(rng.gen_range(0.5..10.0), rng.gen_range(-PI..PI));
        for b in [Branch::Plus, Branch::Minus] {
            dev = dev.max((determinant(&c, k, b, Method::Nystrom { n: 64 }).unwrap() - 1.0).norm());
            dev = dev.max((determinant(&c, k, b, Method::Ode { steps_per_unit: None }).unwrap() - 1.0).norm());
            let (closed, numeric) = trace_y(&c, k, b, 64).unwrap();
            dev = dev.max(closed.norm()).max(numeric.norm());
        }
        let kr = Complex64::new(rng.gen_range(0.5..10.0), 0.0);
        let s = smatrix_plus(&c, kr, 64).unwrap();
        dev = dev.max((s.s - 1.0).norm()).max((s.s_det - 1.0).norm());
    }
    let set = find_resonances(&c, Region::annulus(0.5, 12.0), 1e-8, Method::Ode { steps_per_unit: None }).unwrap();
    let ok = dev <= 1e-15 && set.boundary_count == 0 && set.total_multiplicity() == 0;
    r.add(1, ok, format!("zero: max |D - 1|, |S - 1|, |Tr| = {dev:.1e}; zeros {}, boundary count {}", set.total_multiplicity(), set.boundary_count));
    let checks = run(&c, &Suite::ALL, &VerifyOptions::default());
    let failed: Vec<&str> = checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.id.as_str()).collect();
    r.add(1, failed.is_empty(), format!("zero: full verify, failing {failed:?}"));
}

fn kernel_oracle(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let branch = if i % 2 == 0 { Branch::Plus } else { Branch::Minus };
        let arg = rng.gen_range(0.15..PI / 3.0 - 0.15) * if branch == Branch::Plus { 1.0 } else { -1.0 };
        let k = Complex64::from_polar(rng.gen_range(0.5..3.0), arg);
        let t = rng.gen_range(0.1..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        worst = worst.max(rel(fredres::resolvent::r0(branch, k, t).unwrap(), common::fourier_kernel(k, t, 0)));
        worst = worst.max(rel(fredres::resolvent::dr0(branch, k, t).unwrap(), common::fourier_kernel(k, t, 1)));
    }
    r.add(2, worst <= 1e-8, format!("R0, dR0 vs Fourier integral at 20 points: max rel {worst:.3e} (tol 1e-8)"));
}

fn phase_scan(r: &mut Report) {
    let c = Coefficients::indicator(1.0, 1.0);
    let set = find_resonances(&c, Region::annulus(0.5, 12.0), 1e-8, Method::Ode { steps_per_unit: None }).unwrap();
    r.add(14, set.boundary_count == set.total_multiplicity(), format!("box: boundary count {}, located {} on 0.5 <= |k| <= 12", set.boundary_count, set.total_multiplicity()));
    let hits = common::phase_scan(common::box_determinant_plus, 0.5, 12.0, 0.02);
    let scanned: i64 = hits.iter().map(|h| h.1).sum();
    let located: Vec<Complex64> = set.zeros.iter().chain(&set.clusters).map(|z| z.k).collect();
    let unmatched = hits.iter().filter(|(k, _)| !located.iter().any(|z| (z - k).norm() <= 0.03)).count();
    r.add(14, scanned == set.total_multiplicity() && unmatched == 0, format!("box: phase scan at 0.02 finds {scanned} zeros, {unmatched} not among the located"));
}

fn potential(r: &mut Report, label: &str, c: &Coefficients) {
    let checks = run(c, &Suite::ALL, &VerifyOptions::default());
    let has_p = c.has_p();
    r.checks(3, label, &checks, &[
        "kernel.difference",
        "kernel.rotated_difference",
        "kernel.derivative_difference",
        "kernel.derivative_rotated_difference",
        "kernel.difference_rank_one",
        "operator.rank_one_difference",
        "operator.rotated_rank_one_difference",
    ]);
    r.checks(4, label, &checks, &["kernel.symmetry_ray_reality", "determinant.ray_reflection"]);
    r.checks(5, label, &checks, &["determinant.conjugation"]);
    r.checks(6, label, &checks, &["determinant.trace_closed_form", "bounds.trace_quarter"]);
    r.checks(7, label, &checks, &["bounds.series_first_order", "bounds.log_modulus"]);
    r.checks(8, label, &checks, &["asymptotics.cube_law_window"]);
    r.checks(9, label, &checks, &["trace_identity.window_trend", "trace_identity.limit"]);
    r.checks(10, label, &checks, &["scattering.birman_krein", "scattering.unitarity"]);
    if !has_p {
        r.checks(11, label, &checks, &["continuation.rank_one", "continuation.rotated", "continuation.block"]);
    }
    r.checks(12, label, &checks, &[
        "bounds.global_growth",
        "bounds.minus_on_k_plus",
        "bounds.k_plus_prime",
        "bounds.k_plus_double_prime",
        "bounds.lower_left_sector",
    ]);
    r.checks(13, label, &checks, &["resonances.k_plus_zero_free"]);
    r.checks(14, label, &checks, &["resonances.certified_count"]);
    r.checks(15, label, &checks, &["resonances.counting_bound"]);
    r.checks(16, label, &checks, &["resonances.jensen"]);
    r.checks(17, label, &checks, &["trace_formula.truncation_trend", "breit_wigner.truncation_trend", "breit_wigner.phase_consistency"]);
    if !has_p {
        r.checks(18, label, &checks, &["born.decay_trend", "born.growth_trend", "born.minus_decay_trend"]);
    }
    r.checks(19, label, &checks, &["determinant.node_doubling"]);
}

fn main() {
    let mut r = Report(BTreeMap::new());
    zero_exactness(&mut r);
    kernel_oracle(&mut r);
    potential(&mut r, "box", &Coefficients::indicator(1.0, 1.0));
    potential(&mut r, "smooth", &Coefficients::bump_sine());
    phase_scan(&mut r);

    let mut failing = Vec::new();
    for (n, lines) in &r.0 {
        let pass = lines.iter().all(|l| l.pass);
        if !pass {
            failing.push(*n);
        }
        println!("criterion {n:>2}: {}", if pass { "PASS" } else { "FAIL" });
        for l in lines {
            println!("    [{}] {}", if l.pass { "ok" } else { "x" }, l.detail);
        }
    }
    let unexpected: Vec<u32> = failing.iter().copied().filter(|n| !KNOWN_FAILING.contains(n)).collect();
    let fixed: Vec<u32> = KNOWN_FAILING.iter().copied().filter(|n| !failing.contains(n)).collect();
    println!("acceptance: {} of {} criteria pass; known failing {KNOWN_FAILING:?}", r.0.len() - failing.len(), r.0.len());
    if r.0.len() != 19 || !unexpected.is_empty() || !fixed.is_empty() {
        eprintln!("acceptance: unexpected failures {unexpected:?}, known failures now passing {fixed:?}");
        std::process::exit(1);
    }
}
