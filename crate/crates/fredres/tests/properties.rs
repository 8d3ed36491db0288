use std::f64::consts::PI;

use fredres::coefficients::Segment;
use fredres::config::{JobConfig, Preset};
use fredres::fredholm::{determinant, Method};
use fredres::resolvent::{r0, Branch, E_PLUS};
use fredres::resonances::counting_bound;
use fredres::{Coefficients, Complex64};
use proptest::prelude::*;

fn coefficients() -> impl Strategy<Value = Coefficients> {
    (0.5f64..2.0, prop::collection::vec(-1.0f64..1.0, 0..3), prop::collection::vec(-2.0f64..2.0, 1..4)).prop_map(|(gamma, p, q)| {
        // p vanishes at both ends so that p' has no jump at the support boundary
        let bump = [0.0, gamma, -1.0];
        let mut pp = vec![0.0; bump.len() + p.len().max(1) - 1];
        for (i, &a) in bump.iter().enumerate() {
            for (j, &b) in p.iter().enumerate() {
                pp[i + j] += a * b;
            }
        }
        if p.is_empty() {
            pp.clear();
        }
        Coefficients::new(gamma, vec![Segment { a: 0.0, b: gamma, origin: 0.0, p: pp, q }]).unwrap()
    })
}

fn spectral() -> impl Strategy<Value = Complex64> {
    (0.5f64..6.0, -PI..PI).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conjugation_symmetry(c in coefficients(), k in spectral()) {
        let dp = determinant(&c, k, Branch::Plus, Method::Nystrom { n: 96 }).unwrap();
        let dm = determinant(&c, k.conj(), Branch::Minus, Method::Nystrom { n: 96 }).unwrap();
        prop_assert!((dp - dm.conj()).norm() <= 1e-9 * dp.norm().max(1.0));
    }

    #[test]
    fn routes_agree(c in coefficients(), k in spectral()) {
        let a = determinant(&c, k, Branch::Plus, Method::Nystrom { n: 128 }).unwrap();
        let b = determinant(&c, k, Branch::Plus, Method::Ode { steps_per_unit: None }).unwrap();
        prop_assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn kernel_difference(k in spectral(), t in -2.0f64..2.0) {
        let lhs = r0(Branch::Plus, k, t).unwrap() - r0(Branch::Minus, E_PLUS.conj() * k, t).unwrap();
        let rhs = Complex64::new(0.0, 1.0) * E_PLUS / (3.0 * k * k) * (Complex64::new(0.0, t) * E_PLUS * k).exp();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn counting_bound_grows(gamma in 0.1f64..5.0, m in 0u32..5, r in 0.1f64..50.0, dr in 0.0f64..10.0) {
        prop_assert!(counting_bound(gamma, m, r + dr) >= counting_bound(gamma, m, r));
    }

    #[test]
    fn config_round_trip(preset in prop::sample::select(vec![Preset::Zero, Preset::Box, Preset::Smooth]), nodes in 8usize..512) {
        let mut cfg = JobConfig::preset(preset);
        cfg.numerics.nodes = nodes;
        let back = JobConfig::from_toml(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
