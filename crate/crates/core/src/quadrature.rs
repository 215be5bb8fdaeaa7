//! Composite Gauss-Legendre quadrature.

use std::f64::consts::PI;

/// Order of each Gauss-Legendre panel.
pub const PANEL_ORDER: usize = 23;

/// Default total node count for spectral integrals.
pub const DEFAULT_NODES: usize = 2001;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th root, refined by Newton.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A composite rule: `PANEL_ORDER`-point panels tiling an interval.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeRule {
    pub points: Vec<(f64, f64)>,
}

impl CompositeRule {
    /// Splits `[a, b]` into enough panels to use about `nodes` points.
    pub fn new(a: f64, b: f64, nodes: usize) -> Self {
        let panels = nodes.div_ceil(PANEL_ORDER).max(1);
        Self::with_panels(a, b, panels)
    }

    pub fn with_panels(a: f64, b: f64, panels: usize) -> Self {
        let (x, w) = gauss_legendre(PANEL_ORDER);
        let h = (b - a) / panels as f64;
        let mut points = Vec::with_capacity(panels * PANEL_ORDER);
        for p in 0..panels {
            let lo = a + h * p as f64;
            let mid = lo + 0.5 * h;
            for (xi, wi) in x.iter().zip(&w) {
                points.push((mid + 0.5 * h * xi, 0.5 * h * wi));
            }
        }
        CompositeRule { points }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().map(|&(x, w)| w * f(x)).sum()
    }
}
