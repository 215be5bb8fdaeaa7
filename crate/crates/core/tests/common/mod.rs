#![allow(dead_code)]

use decohere::qmat::{CMat, DensityMatrix, C64};
use proptest::prelude::*;

/// `B·B†/Tr` from an arbitrary complex `B`: full-rank mixed states.
pub fn density_from<const N: usize>(raw: &[f64]) -> DensityMatrix<N> {
    let b = CMat::<N>::from_fn(|i, j| C64::new(raw[2 * (i * N + j)], raw[2 * (i * N + j) + 1]));
    let m = b * b.adjoint();
    let tr = m.trace().re.max(1e-300);
    DensityMatrix::validate_symmetrized(m.scale_re(1.0 / tr)).unwrap()
}

pub fn ket_from<const N: usize>(raw: &[f64]) -> [C64; N] {
    let mut k = [C64::new(0.0, 0.0); N];
    for i in 0..N {
        k[i] = C64::new(raw[2 * i], raw[2 * i + 1]);
    }
    let norm = k.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    k.map(|z| z / norm)
}

pub fn density<const N: usize>() -> impl Strategy<Value = DensityMatrix<N>> {
    prop::collection::vec(-1.0f64..1.0, 2 * N * N)
        .prop_filter("degenerate", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| density_from::<N>(&v))
}

pub fn pure<const N: usize>() -> impl Strategy<Value = DensityMatrix<N>> {
    prop::collection::vec(-1.0f64..1.0, 2 * N)
        .prop_filter("degenerate", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| DensityMatrix::pure(ket_from::<N>(&v)).unwrap())
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}
