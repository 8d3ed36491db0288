//! Determinant via the semi-separable structure of the kernel.
//!
//! On the plus branch K(x, y) = c(x) e^{ik⁻(x-y)} + H(x-y) Σⱼ gⱼ(x) e^{ikⱼ(x-y)}; the Volterra part has
//! determinant 1, so D₊ = 1 + ∫ e^{-ik⁻y} φ(y) dy with φ solving a Volterra equation. Writing
//! uⱼ(x) = e^{-ik⁻x} ∫₀ˣ e^{ikⱼ(x-y)} φ(y) dy gives the linear system
//! u' = diag(i(kⱼ - k⁻)) u + 𝟙 (c - gᵀu), u(0) = 0, and D₊ = 1 + u₃(γ).
//! The minus branch is the mirror image, integrated from γ down to 0 with k⁺ in place of k⁻.
//! Integration uses Gauss-Legendre collocation (order 12) on breakpoint-aligned steps.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::coefficients::Coefficients;
use crate::quadrature::Rule;
use crate::resolvent::{rotations_of, Branch, E_MINUS, E_PLUS, I, ONE};

const STAGES: usize = 6;

struct Collocation {
    c: Vec<f64>,
    b: Vec<f64>,
    a: Vec<Vec<f64>>,
}

impl Collocation {
    fn gauss(s: usize) -> Self {
        let r = Rule::gauss(s);
        let c: Vec<f64> = r.nodes.iter().map(|t| 0.5 * (t + 1.0)).collect();
        let b: Vec<f64> = r.weights.iter().map(|w| 0.5 * w).collect();
        // a[i][j] = ∫₀^{cᵢ} ℓⱼ, integrated exactly with the same rule mapped to [0, cᵢ]
        let bary = crate::quadrature::barycentric_weights(&c);
        let a = c
            .iter()
            .map(|&ci| {
                let (xs, ws) = r.mapped(0.0, ci);
                let mut row = vec![0.0; s];
                for (x, w) in xs.iter().zip(&ws) {
                    for (j, l) in crate::quadrature::lagrange_row(&c, &bary, *x).iter().enumerate() {
                        row[j] += w * l;
                    }
                }
                row
            })
            .collect();
        Self { c, b, a }
    }
}

type M3 = SMatrix<Complex64, 3, 3>;
type V3 = SVector<Complex64, 3>;
const DS: usize = 3 * STAGES;

/// Coefficients of u' = A u + f at a point, with the k-derivatives (A_k, f_k) when requested.
struct Local {
    a: M3,
    f: V3,
    ak: M3,
    fk: V3,
}

struct System<'a> {
    coef: &'a Coefficients,
    k: Complex64,
    ks: [Complex64; 3],
    reference: Complex64,
    branch: Branch,
    with_derivative: bool,
}

impl System<'_> {
    fn eval(&self, x: f64) -> Local {
        let p2 = 2.0 * self.coef.p(x);
        let qv = self.coef.q_minus_idp(x);
        let alpha = [ONE, E_MINUS, E_PLUS];
        let beta = [ONE, E_PLUS, E_MINUS];
        // split by power of 1/k: (from p, from q - ip')
        let gp = alpha.map(|a| a * p2 * I / (3.0 * self.k));
        let gq = beta.map(|b| b * qv * I / (3.0 * self.k * self.k));
        let (cp, cq) = match self.branch {
            Branch::Plus => (-E_PLUS * p2 * I / (3.0 * self.k), -E_MINUS * qv * I / (3.0 * self.k * self.k)),
            Branch::Minus => (E_MINUS * p2 * I / (3.0 * self.k), E_PLUS * qv * I / (3.0 * self.k * self.k)),
        };
        // plus: u' = D u + 1(c - gᵀu); minus: u' = D u - 1(c + gᵀu)
        let sgn = match self.branch {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        };
        let mut l = Local { a: M3::zeros(), f: V3::zeros(), ak: M3::zeros(), fk: V3::zeros() };
        for i in 0..3 {
            for j in 0..3 {
                l.a[(i, j)] = -(gp[j] + gq[j]);
            }
            l.a[(i, i)] += I * (self.ks[i] - self.reference);
            l.f[i] = (cp + cq) * sgn;
        }
        if self.with_derivative {
            let inv = 1.0 / self.k;
            let dc = -(cp + 2.0 * cq) * inv;
            for i in 0..3 {
                for j in 0..3 {
                    l.ak[(i, j)] = (gp[j] + 2.0 * gq[j]) * inv;
                }
                l.ak[(i, i)] += I * (self.ks[i] - self.reference) * inv;
                l.fk[i] = dc * sgn;
            }
        }
        l
    }
}

fn default_steps(k: Complex64) -> usize {
    (12.0 + 1.5 * k.norm()).ceil() as usize
}

/// Integrate over [x0, x1] (x1 < x0 allowed) in `steps` collocation steps. The derivative block w
/// solves w' = A w + A_k u + f_k, so its stage system shares the matrix of the u stages.
fn integrate(sys: &System, col: &Collocation, u: &mut V3, w: &mut V3, x0: f64, x1: f64, steps: usize) {
    let s = STAGES;
    let h = (x1 - x0) / steps as f64;
    for st in 0..steps {
        let xs = x0 + st as f64 * h;
        let loc: Vec<Local> = col.c.iter().map(|&ci| sys.eval(xs + ci * h)).collect();
        let mut m = SMatrix::<Complex64, DS, DS>::identity();
        let mut rhs = SVector::<Complex64, DS>::zeros();
        for i in 0..s {
            for r in 0..3 {
                let mut v = u[r];
                for j in 0..s {
                    v += loc[j].f[r] * (h * col.a[i][j]);
                }
                rhs[i * 3 + r] = v;
            }
            for j in 0..s {
                let f = h * col.a[i][j];
                for r in 0..3 {
                    for cc in 0..3 {
                        m[(i * 3 + r, j * 3 + cc)] -= loc[j].a[(r, cc)] * f;
                    }
                }
            }
        }
        let lu = m.lu();
        let us = lu.solve(&rhs).expect("collocation system is nonsingular for small steps");
        let stage_u = |j: usize| V3::new(us[3 * j], us[3 * j + 1], us[3 * j + 2]);
        if sys.with_derivative {
            let mut rw = SVector::<Complex64, DS>::zeros();
            let forcing: Vec<V3> = (0..s).map(|j| loc[j].ak * stage_u(j) + loc[j].fk).collect();
            for i in 0..s {
                for r in 0..3 {
                    let mut v = w[r];
                    for j in 0..s {
                        v += forcing[j][r] * (h * col.a[i][j]);
                    }
                    rw[i * 3 + r] = v;
                }
            }
            let ws = lu.solve(&rw).expect("collocation system is nonsingular for small steps");
            for j in 0..s {
                let wj = V3::new(ws[3 * j], ws[3 * j + 1], ws[3 * j + 2]);
                *w += (loc[j].a * wj + forcing[j]) * Complex64::new(h * col.b[j], 0.0);
            }
        }
        for j in 0..s {
            *u += (loc[j].a * stage_u(j) + loc[j].f) * Complex64::new(h * col.b[j], 0.0);
        }
    }
}

fn run(c: &Coefficients, k: Complex64, branch: Branch, steps_per_unit: Option<usize>, with_derivative: bool) -> (V3, V3) {
    let ks = rotations_of(k);
    let reference = match branch {
        Branch::Plus => ks[2],
        Branch::Minus => ks[1],
    };
    let sys = System { coef: c, k, ks, reference, branch, with_derivative };
    let col = Collocation::gauss(STAGES);
    let (mut u, mut w) = (V3::zeros(), V3::zeros());
    let per_unit = steps_per_unit.unwrap_or_else(|| default_steps(k));
    let bps = c.breakpoints();
    let mut pieces: Vec<(f64, f64)> = bps.windows(2).map(|w| (w[0], w[1])).collect();
    if branch == Branch::Minus {
        pieces = pieces.into_iter().rev().map(|(a, b)| (b, a)).collect();
    }
    for (a, b) in pieces {
        let steps = ((per_unit as f64) * (b - a).abs()).ceil().max(1.0) as usize;
        integrate(&sys, &col, &mut u, &mut w, a, b, steps);
    }
    (u, w)
}

/// D±(k) and dD±/dk computed together.
pub fn determinant_with_derivative(c: &Coefficients, k: Complex64, branch: Branch, steps_per_unit: Option<usize>) -> (Complex64, Complex64) {
    let (u, w) = run(c, k, branch, steps_per_unit, true);
    let idx = match branch {
        Branch::Plus => 2,
        Branch::Minus => 1,
    };
    (ONE + u[idx], w[idx])
}

/// D±(k) and the number of collocation steps per unit length used.
pub fn determinant(c: &Coefficients, k: Complex64, branch: Branch, steps_per_unit: Option<usize>) -> (Complex64, usize) {
    if c.is_zero() {
        return (ONE, 0);
    }
    let (u, _) = run(c, k, branch, steps_per_unit, false);
    let idx = match branch {
        Branch::Plus => 2,
        Branch::Minus => 1,
    };
    (ONE + u[idx], steps_per_unit.unwrap_or_else(|| default_steps(k)))
}
