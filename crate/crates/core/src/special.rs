//! Complete elliptic integrals, Jacobi elliptic functions and hyperbolic helpers.
//!
//! Everything here is built on the arithmetic-geometric mean (AGM). The
//! elliptic modulus `k` is used throughout (not the parameter `m = k²`).

use std::f64::consts::FRAC_PI_2;

use crate::error::{domain, Result};

const AGM_MAX_ITER: usize = 30;
const AGM_REL_TOL: f64 = 1e-16;

/// `1 − k²` without the cancellation of the naive form near `k = 1`.
#[inline]
pub fn complementary_sq(k: f64) -> f64 {
    (1.0 - k) * (1.0 + k)
}

/// AGM sequence starting from `(1, b0)`. Returns the arithmetic means
/// `a_n` and the half-differences `c_n = (a_{n-1} − b_{n-1})/2`, with
/// `c_0` supplied by the caller.
struct AgmChain {
    a: Vec<f64>,
    c: Vec<f64>,
}

impl AgmChain {
    fn new(b0: f64, c0: f64) -> Self {
        let mut a = vec![1.0];
        let mut c = vec![c0];
        let mut an = 1.0_f64;
        let mut bn = b0;
        for _ in 0..AGM_MAX_ITER {
            if (an - bn).abs() <= AGM_REL_TOL * an {
                break;
            }
            let next_a = 0.5 * (an + bn);
            let next_b = (an * bn).sqrt();
            c.push(0.5 * (an - bn));
            an = next_a;
            bn = next_b;
            a.push(an);
        }
        Self { a, c }
    }

    fn mean(&self) -> f64 {
        *self.a.last().unwrap()
    }
}

/// Complete elliptic integral of the first kind, `K(k) = π / (2·AGM(1, k'))`.
pub fn complete_elliptic_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return domain(format!("K(k) requires 0 <= k < 1, got k = {k}"));
    }
    if k == 0.0 {
        return Ok(FRAC_PI_2);
    }
    let chain = AgmChain::new(complementary_sq(k).sqrt(), k);
    Ok(FRAC_PI_2 / chain.mean())
}

/// `K(k')` evaluated directly as `π / (2·AGM(1, k))`, which avoids forming
/// `k' = √(1−k²)` and losing digits when `k` is small.
pub fn complete_elliptic_k_complement(k: f64) -> Result<f64> {
    if !(k > 0.0 && k <= 1.0) {
        return domain(format!("K(k') requires 0 < k <= 1, got k = {k}"));
    }
    if k == 1.0 {
        return Ok(FRAC_PI_2);
    }
    let chain = AgmChain::new(k, complementary_sq(k).sqrt());
    Ok(FRAC_PI_2 / chain.mean())
}

/// Complete elliptic integral of the second kind,
/// `E = K·(1 − Σ 2^{n−1} c_n²)` over the AGM half-differences.
pub fn complete_elliptic_e(k: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&k) {
        return domain(format!("E(k) requires 0 <= k <= 1, got k = {k}"));
    }
    if k == 0.0 {
        return Ok(FRAC_PI_2);
    }
    if k == 1.0 {
        return Ok(1.0);
    }
    let chain = AgmChain::new(complementary_sq(k).sqrt(), k);
    let mut weight = 0.5;
    let mut sum = 0.0;
    for c in &chain.c {
        sum += weight * c * c;
        weight *= 2.0;
    }
    Ok(FRAC_PI_2 / chain.mean() * (1.0 - sum))
}

/// `K`, `E` and the complementary modulus at one modulus value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticValues {
    pub k: f64,
    pub k_big: f64,
    pub e_big: f64,
    pub k_prime: f64,
}

impl EllipticValues {
    pub fn new(k: f64) -> Result<Self> {
        Ok(Self {
            k,
            k_big: complete_elliptic_k(k)?,
            e_big: complete_elliptic_e(k)?,
            k_prime: complementary_sq(k).sqrt(),
        })
    }

    /// `E(k)K(k') + E(k')K(k) − K(k)K(k') − π/2`; zero in exact arithmetic.
    pub fn legendre_residual(&self) -> Result<f64> {
        let kp = complete_elliptic_k_complement(self.k)?;
        let ep = complete_elliptic_e(self.k_prime)?;
        Ok(self.e_big * kp + ep * self.k_big - self.k_big * kp - FRAC_PI_2)
    }
}

/// `(dK/dk, dE/dk)` from the closed identities
/// `dK/dk = (E − k'²K)/(k k'²)` and `dE/dk = (E − K)/k`.
pub fn elliptic_derivatives(k: f64) -> Result<(f64, f64)> {
    if !(k > 0.0 && k < 1.0) {
        return domain(format!(
            "elliptic derivatives require 0 < k < 1, got k = {k}"
        ));
    }
    let kk = complete_elliptic_k(k)?;
    let ee = complete_elliptic_e(k)?;
    let kp2 = complementary_sq(k);
    Ok(((ee - kp2 * kk) / (k * kp2), (ee - kk) / k))
}

/// Jacobi elliptic functions `(sn, cn, dn)` at argument `x` and modulus `k`.
///
/// Descending Landen (Gauss) transformation: run the AGM from `(1, k')`,
/// set the amplitude `φ_N = 2^N a_N x`, then recurse backwards with
/// `φ_{n−1} = (φ_n + asin(c_n sin φ_n / a_n)) / 2`.
pub fn jacobi_sn_cn_dn(x: f64, k: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..=1.0).contains(&k) {
        return domain(format!("Jacobi functions require 0 <= k <= 1, got k = {k}"));
    }
    if k == 0.0 {
        return Ok((x.sin(), x.cos(), 1.0));
    }
    if k == 1.0 {
        let s = sech(x);
        return Ok((x.tanh(), s, s));
    }
    let kp2 = complementary_sq(k);
    let chain = AgmChain::new(kp2.sqrt(), k);
    let steps = chain.a.len() - 1;
    let mut phi = 2f64.powi(steps as i32) * chain.mean() * x;
    for n in (1..=steps).rev() {
        let ratio = chain.c[n] / chain.a[n];
        phi = 0.5 * (phi + (ratio * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn² = k'² + k² cn² has no cancellation anywhere in the period.
    let dn = (kp2 + k * k * cn * cn).sqrt();
    Ok((sn, cn, dn))
}

/// Jacobi `dn(x, k)`; even, `2K`-periodic, with `k' ≤ dn ≤ 1`.
pub fn jacobi_dn(x: f64, k: f64) -> Result<f64> {
    jacobi_sn_cn_dn(x, k).map(|(_, _, dn)| dn)
}

#[inline]
pub fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// `1/sinh(y)`, evaluated as `−2e^{−|y|}/expm1(−2|y|)` so that it decays to
/// zero instead of overflowing for large `|y|`.
pub fn csch(y: f64) -> Result<f64> {
    if y == 0.0 || y.is_nan() {
        return domain("csch(y) is undefined at y = 0");
    }
    let ay = y.abs();
    let v = -2.0 * (-ay).exp() / (-2.0 * ay).exp_m1();
    Ok(v.copysign(y))
}
