//! Oracles shared by the integration tests. None of them reuse library code.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn fixed(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * rule.iter().map(|(x, w)| w * f(mid + half * x)).sum::<f64>()
}

fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    rule: &[(f64, f64)],
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (l, r) = (fixed(f, a, m, rule), fixed(f, m, b, rule));
    if depth == 0 || (l + r - whole).abs() <= 1e-15 * (l + r).abs().max(1e-300) {
        l + r
    } else {
        adaptive(f, a, m, l, rule, depth - 1) + adaptive(f, m, b, r, rule, depth - 1)
    }
}

/// Adaptive bisection driven by a 64-point Gauss–Legendre panel.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let rule = gauss_legendre(64);
    let whole = fixed(&f, a, b, &rule);
    adaptive(&f, a, b, whole, &rule, 20)
}

pub fn k_quadrature(k: f64) -> f64 {
    integrate(
        |t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(),
        0.0,
        PI / 2.0,
    )
}

pub fn e_quadrature(k: f64) -> f64 {
    integrate(|t| (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, PI / 2.0)
}

/// `dn(x, k)` by integrating `dn′ = −k² sn cn` with classical RK4 on a
/// fine step.
pub fn dn_by_ode(x: f64, k: f64) -> f64 {
    let steps = 20_000;
    let h = x / steps as f64;
    let rhs = |y: [f64; 3]| [y[1] * y[2], -y[0] * y[2], -k * k * y[0] * y[1]];
    let mut y = [0.0, 1.0, 1.0];
    for _ in 0..steps {
        let add =
            |y: [f64; 3], d: [f64; 3], s: f64| [y[0] + s * d[0], y[1] + s * d[1], y[2] + s * d[2]];
        let k1 = rhs(y);
        let k2 = rhs(add(y, k1, h / 2.0));
        let k3 = rhs(add(y, k2, h / 2.0));
        let k4 = rhs(add(y, k3, h));
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y[2]
}

/// Discrete Fourier coefficient of mode `m` by the direct sum.
pub fn dft_cos(samples: &[f64], m: usize) -> f64 {
    let n = samples.len();
    samples
        .iter()
        .enumerate()
        .map(|(j, v)| v * (2.0 * PI * (m * j) as f64 / n as f64).cos())
        .sum::<f64>()
        / n as f64
}
