//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use fredres::Complex64;
use gauss_quad::legendre::GaussLegendre;
use nalgebra::Matrix4;
use rayon::prelude::*;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn e_plus() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / 3.0)
}

fn gauss(n: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(n).unwrap()).as_node_weight_pairs().to_vec()
}

/// Adaptive Gauss-Legendre along the straight path a → b in the complex plane.
pub fn adaptive<F: Fn(Complex64) -> Complex64 + Copy>(f: F, a: Complex64, b: Complex64, tol: f64) -> Complex64 {
    let lo = gauss(10);
    let hi = gauss(21);
    fn rule<F: Fn(Complex64) -> Complex64>(f: &F, a: Complex64, b: Complex64, g: &[(f64, f64)]) -> Complex64 {
        let (m, h) = ((a + b) * 0.5, (b - a) * 0.5);
        g.iter().map(|&(x, w)| f(m + h * x) * w).sum::<Complex64>() * h
    }
    fn rec<F: Fn(Complex64) -> Complex64>(f: &F, a: Complex64, b: Complex64, tol: f64, lo: &[(f64, f64)], hi: &[(f64, f64)], depth: u32) -> Complex64 {
        let (c, e) = (rule(f, a, b, hi), rule(f, a, b, lo));
        if (c - e).norm() <= tol || depth > 40 {
            return c;
        }
        let m = (a + b) * 0.5;
        rec(f, a, m, tol * 0.5, lo, hi, depth + 1) + rec(f, m, b, tol * 0.5, lo, hi, depth + 1)
    }
    rec(&f, a, b, tol, &lo, &hi, 0)
}

/// (1/2π) ∫ ξ^power e^{itξ} / (ξ³ - k³) dξ over the real line, t ≠ 0. The tails beyond |ξ| = L are
/// taken along vertical rays into the half-plane where e^{itξ} decays.
pub fn fourier_kernel(k: Complex64, t: f64, power: i32) -> Complex64 {
    let lam = k * k * k;
    let f = move |xi: Complex64| xi.powi(power) * (I * t * xi).exp() / (xi * xi * xi - lam);
    let l = 4.0 * k.norm() + 10.0;
    let tol = 1e-14;
    let mut s = Complex64::new(0.0, 0.0);
    let cuts: Vec<f64> = (0..=80).map(|j| -l + 2.0 * l * j as f64 / 80.0).collect();
    for w in cuts.windows(2) {
        s += adaptive(f, w[0].into(), w[1].into(), tol);
    }
    let dir = if t > 0.0 { I } else { -I };
    let height = 60.0 / t.abs();
    let steps = 60;
    for j in 0..steps {
        let (h0, h1) = (height * j as f64 / steps as f64, height * (j + 1) as f64 / steps as f64);
        s += adaptive(f, l + dir * h0, l + dir * h1, tol);
        s -= adaptive(f, -l + dir * h0, -l + dir * h1, tol);
    }
    s / (2.0 * PI)
}

/// D₊(k) for p = 0, q = 1 on [0, 1]. The kernel splits as c e^{ik⁻(x-y)} plus a Volterra part
/// Σ gⱼ e^{ikⱼ(x-y)} for x > y, so D₊ = 1 + c u₃(1) where u' = A u + 𝟙 is constant-coefficient and
/// u(1) is read off the exponential of the bordered 4×4 matrix.
pub fn box_determinant_plus(k: Complex64) -> Complex64 {
    let ep = e_plus();
    let em = ep.conj();
    let ks = [k, ep * k, em * k];
    let pref = I / (3.0 * k * k);
    let g = [pref, pref * ep, pref * em];
    let c = -pref * em;
    let mut m = Matrix4::<Complex64>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = -g[j];
        }
        m[(i, i)] += I * (ks[i] - ks[2]);
        m[(i, 3)] = Complex64::new(1.0, 0.0);
    }
    let e = m.exp();
    1.0 + c * e[(2, 3)]
}

/// Cells of a square grid (spacing h) over [-r_max, r_max]² with centre in r_min ≤ |k| ≤ r_max and
/// nonzero winding of `f` around the cell boundary. Returns (centre, winding).
pub fn phase_scan<F: Fn(Complex64) -> Complex64 + Sync>(f: F, r_min: f64, r_max: f64, h: f64) -> Vec<(Complex64, i64)> {
    let n = (2.0 * r_max / h).ceil() as usize;
    let at = |i: usize, j: usize| Complex64::new(-r_max + i as f64 * h, -r_max + j as f64 * h);
    let vals: Vec<Vec<Complex64>> = (0..=n).into_par_iter().map(|i| (0..=n).map(|j| f(at(i, j))).collect()).collect();
    let turn = |a: Complex64, b: Complex64| (b / a).arg();
    let mut hits = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let centre = at(i, j) + Complex64::new(0.5 * h, 0.5 * h);
            let r = centre.norm();
            if r < r_min || r > r_max {
                continue;
            }
            let (a, b, c, d) = (vals[i][j], vals[i + 1][j], vals[i + 1][j + 1], vals[i][j + 1]);
            let w = (turn(a, b) + turn(b, c) + turn(c, d) + turn(d, a)) / (2.0 * PI);
            let w = w.round() as i64;
            if w != 0 {
                hits.push((centre, w));
            }
        }
    }
    hits
}
