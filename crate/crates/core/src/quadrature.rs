//! Composite Gauss–Legendre quadrature on fixed panels.
//!
//! The panel layout is fixed (not adaptive) so every integral in the crate is
//! bit-reproducible for a given scenario.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule with `order` nodes, exact for polynomials of degree `2 * order - 1`.
    pub fn new(order: usize) -> Self {
        assert!(order > 0, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            // Tricomi initial guess, refined by Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[order - 1 - i] = x;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A Gauss–Legendre rule repeated over equal-width panels.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    rule: GaussLegendre,
    panels: usize,
}

impl CompositeRule {
    pub const DEFAULT_ORDER: usize = 8;
    pub const DEFAULT_PANELS: usize = 32;

    pub fn new(order: usize, panels: usize) -> Self {
        assert!(panels > 0, "panel count must be positive");
        Self {
            rule: GaussLegendre::new(order),
            panels,
        }
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn order(&self) -> usize {
        self.rule.order()
    }

    /// Quadrature points `(s, weight)` on `[a, b]`. Empty when `a == b`.
    pub fn points(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let panels = if a == b { 0 } else { self.panels };
        let h = (b - a) / self.panels as f64;
        (0..panels).flat_map(move |i| {
            let left = a + h * i as f64;
            self.rule
                .nodes
                .iter()
                .zip(&self.rule.weights)
                .map(move |(&x, &w)| (left + 0.5 * h * (x + 1.0), 0.5 * h * w))
        })
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.points(a, b).map(|(s, w)| w * f(s)).sum()
    }
}

impl Default for CompositeRule {
    fn default() -> Self {
        Self::new(Self::DEFAULT_ORDER, Self::DEFAULT_PANELS)
    }
}
