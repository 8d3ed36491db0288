//! Gauss-Legendre rules and panel helpers.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Gauss-Legendre rule on [-1, 1], nodes ascending.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn gauss(n: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
        let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let h = 0.5 * (b - a);
        let m = 0.5 * (b + a);
        (self.nodes.iter().map(|t| m + h * t).collect(), self.weights.iter().map(|w| h * w).collect())
    }

    pub fn integrate<F: FnMut(f64) -> T, T>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    {
        let h = 0.5 * (b - a);
        let m = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::default(), |acc, (t, w)| acc + f(m + h * t) * (h * w))
    }
}

/// Barycentric weights for interpolation on `nodes`.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            1.0 / nodes
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .map(|(_, &x)| nodes[j] - x)
                .product::<f64>()
        })
        .collect()
}

/// Lagrange basis values L_j(s) for all j.
pub fn lagrange_row(nodes: &[f64], bary: &[f64], s: f64) -> Vec<f64> {
    if let Some(j) = nodes.iter().position(|&x| x == s) {
        let mut row = vec![0.0; nodes.len()];
        row[j] = 1.0;
        return row;
    }
    let terms: Vec<f64> = nodes.iter().zip(bary).map(|(&x, &b)| b / (s - x)).collect();
    let sum: f64 = terms.iter().sum();
    terms.iter().map(|t| t / sum).collect()
}

/// Composite rule over [a, b] split at `cuts` (must be sorted, inside [a, b]) with `per` panels of the
/// given rule on every piece.
pub fn composite(rule: &Rule, cuts: &[f64], per: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for win in cuts.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b <= a {
            continue;
        }
        let h = (b - a) / per as f64;
        for m in 0..per {
            let (x, w) = rule.mapped(a + m as f64 * h, a + (m + 1) as f64 * h);
            xs.extend(x);
            ws.extend(w);
        }
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        let r = Rule::gauss(8);
        let v: f64 = r.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-10);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let r = Rule::gauss(6);
        let b = barycentric_weights(&r.nodes);
        let row = lagrange_row(&r.nodes, &b, 0.3);
        let f = |x: f64| 1.0 + x - 2.0 * x.powi(5);
        let v: f64 = row.iter().zip(&r.nodes).map(|(l, &x)| l * f(x)).sum();
        assert!((v - f(0.3)).abs() < 1e-14);
    }
}
