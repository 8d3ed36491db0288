mod common;

use std::f64::consts::PI;

use fredres::fredholm::{determinant, Method};
use fredres::resolvent::{dr0, r0, Branch};
use fredres::{Coefficients, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// k strictly inside the sector 0 < arg k < π/3 (plus) or -π/3 < arg k < 0 (minus).
fn sample(rng: &mut ChaCha8Rng, branch: Branch) -> (Complex64, f64) {
    let arg = rng.gen_range(0.15..PI / 3.0 - 0.15);
    let arg = if branch == Branch::Plus { arg } else { -arg };
    let k = Complex64::from_polar(rng.gen_range(0.5..3.0), arg);
    let t = rng.gen_range(0.1..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    (k, t)
}

#[test]
fn closed_form_kernels_match_fourier_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let branch = if i % 2 == 0 { Branch::Plus } else { Branch::Minus };
        let (k, t) = sample(&mut rng, branch);
        worst = worst.max(rel(r0(branch, k, t).unwrap(), common::fourier_kernel(k, t, 0)));
        worst = worst.max(rel(dr0(branch, k, t).unwrap(), common::fourier_kernel(k, t, 1)));
    }
    assert!(worst <= 1e-8, "max relative error {worst:e}");
}

#[test]
fn box_closed_form_matches_both_routes() {
    let c = Coefficients::indicator(1.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let k = Complex64::from_polar(rng.gen_range(0.5..10.0), rng.gen_range(-PI..PI));
        let exact = common::box_determinant_plus(k);
        let ny = determinant(&c, k, Branch::Plus, Method::Nystrom { n: 256 }).unwrap();
        let ode = determinant(&c, k, Branch::Plus, Method::Ode { steps_per_unit: None }).unwrap();
        assert!(rel(ny, exact) < 1e-9, "k = {k}: {ny} vs {exact}");
        assert!(rel(ode, exact) < 1e-9, "k = {k}: {ode} vs {exact}");
    }
}
