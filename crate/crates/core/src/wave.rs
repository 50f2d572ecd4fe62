//! The explicit dnoidal traveling-wave family
//! `φ(x) = a + b[dn²(2Kx/L, k) − E/K]` of
//! `φ'''' − γφ'' + ωφ − φ³/3 + A = 0`, parameterized by the modulus `k`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{
    complete_elliptic_k_complement, csch, elliptic_derivatives, jacobi_dn, EllipticValues,
};
use crate::spectral::{max_abs, FourierGrid};

pub const K_MIN: f64 = 0.005;
pub const K_MAX: f64 = 0.995;
/// Range in which `Φ = ∂φ/∂k` can be formed by central differences.
pub const DK_K_MIN: f64 = 0.01;
pub const DK_K_MAX: f64 = 0.99;
pub const DK_STEP: f64 = 1e-5;

const SQRT10: f64 = 3.1622776601683795;

/// Coefficient of the third-derivative term; only the two integrable cases
/// with explicit solutions are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Gamma {
    Zero,
    One,
}

impl Gamma {
    pub fn value(self) -> f64 {
        match self {
            Gamma::Zero => 0.0,
            Gamma::One => 1.0,
        }
    }
}

impl TryFrom<u8> for Gamma {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Gamma::Zero),
            1 => Ok(Gamma::One),
            other => Err(format!("gamma must be 0 or 1, got {other}")),
        }
    }
}

impl From<Gamma> for u8 {
    fn from(g: Gamma) -> u8 {
        match g {
            Gamma::Zero => 0,
            Gamma::One => 1,
        }
    }
}

impl TryFrom<f64> for Gamma {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        if v == 0.0 {
            Ok(Gamma::Zero)
        } else if v == 1.0 {
            Ok(Gamma::One)
        } else {
            domain(format!("gamma must be 0 or 1, got {v}"))
        }
    }
}

/// A point `(L, k, γ) ↦ (a, b, ω, A)` on the smooth solution curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    #[serde(rename = "L")]
    pub period: f64,
    pub k: f64,
    pub gamma: Gamma,
    pub a: f64,
    pub b: f64,
    pub omega: f64,
    #[serde(rename = "A")]
    pub integration_constant: f64,
    #[serde(rename = "K")]
    pub k_big: f64,
    #[serde(rename = "E")]
    pub e_big: f64,
}

/// `a`, `ω`, `A` of the γ = 0 family.
fn gamma0_curves(ell: &EllipticValues, period: f64) -> (f64, f64, f64) {
    let k = ell.k;
    let kk = ell.k_big;
    let k2 = k * k;
    let l2 = period * period;
    let a = 8.0 * SQRT10 * kk * (kk * k2 - 2.0 * kk + 3.0 * ell.e_big) / l2;
    let omega = 384.0 * (k2 * k2 - k2 + 1.0) * kk.powi(4) / (l2 * l2);
    let a_const = -2048.0 * SQRT10 / 3.0 * (k2 - 2.0) * kk.powi(6) * (2.0 * k2 - 1.0) * (k2 + 1.0)
        / (l2 * l2 * l2);
    (a, omega, a_const)
}

/// Wave amplitude `b = 24√10 K²/L²`, common to both γ cases.
fn amplitude(kk: f64, period: f64) -> f64 {
    24.0 * SQRT10 * kk * kk / (period * period)
}

impl WaveParams {
    /// Parameters of the explicit wave with modulus `k` and period `L`.
    pub fn new(k: f64, period: f64, gamma: Gamma) -> Result<Self> {
        if !(K_MIN..=K_MAX).contains(&k) {
            return domain(format!("k must lie in [{K_MIN}, {K_MAX}], got {k}"));
        }
        Self::on_curve(k, period, gamma)
    }

    /// The `k → 0` end of the curve, where `φ` collapses to the constant `a`.
    pub fn small_amplitude_limit(period: f64, gamma: Gamma) -> Result<Self> {
        Self::on_curve(0.0, period, gamma)
    }

    fn on_curve(k: f64, period: f64, gamma: Gamma) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return domain(format!("period must be positive, got {period}"));
        }
        let ell = EllipticValues::new(k)?;
        let (a0, omega0, a_const0) = gamma0_curves(&ell, period);
        let b = amplitude(ell.k_big, period);
        let mut params = WaveParams {
            period,
            k,
            gamma,
            a: a0,
            b,
            omega: omega0,
            integration_constant: a_const0,
            k_big: ell.k_big,
            e_big: ell.e_big,
        };
        if gamma == Gamma::One {
            // The constant shift 1/√10 cancels the dn⁴ content of −φ''.
            params.a = a0 + SQRT10 / 10.0;
            params.omega = omega0 + 0.1;
            params.integration_constant = 0.0;
            params.integration_constant = -params.ode_lhs_at_origin(0.0)?;
        }
        Ok(params)
    }

    pub fn ratio_e_over_k(&self) -> f64 {
        self.e_big / self.k_big
    }

    /// `φ(x)` evaluated directly from the dn ansatz.
    pub fn phi(&self, x: f64) -> Result<f64> {
        let dn = jacobi_dn(2.0 * self.k_big * x / self.period, self.k)?;
        Ok(self.a + self.b * (dn * dn - self.ratio_e_over_k()))
    }

    /// Exponential decay rate `c = πK(k')/K(k)` of the Fourier coefficients.
    pub fn decay_rate(&self) -> Result<f64> {
        if self.k == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(PI * complete_elliptic_k_complement(self.k)? / self.k_big)
    }

    /// `Γ = bπ²/K²`.
    pub fn gamma_coefficient(&self) -> f64 {
        self.b * PI * PI / (self.k_big * self.k_big)
    }

    /// One-sided closed-form coefficients `φ̂(0) = a`,
    /// `φ̂(m) = (Γ/2) m csch(mπK'/K)` for `m = 1..=m_max`; `φ̂(−m) = φ̂(m)`.
    pub fn fourier_coefficients(&self, m_max: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(m_max + 1);
        out.push(self.a);
        if self.k == 0.0 {
            out.resize(m_max + 1, 0.0);
            return Ok(out);
        }
        let c = self.decay_rate()?;
        let half_gamma = 0.5 * self.gamma_coefficient();
        for m in 1..=m_max {
            let m = m as f64;
            out.push(half_gamma * m * csch(m * c)?);
        }
        Ok(out)
    }

    /// Left side `φ'''' − γφ'' + ωφ − φ³/3 + A` at `x = 0`, summed from the
    /// closed-form Fourier series with the integration constant replaced by
    /// `a_const`.
    fn ode_lhs_at_origin(&self, a_const: f64) -> Result<f64> {
        let coeffs = self.fourier_coefficients(512)?;
        let mut d2 = 0.0;
        let mut d4 = 0.0;
        for (m, c) in coeffs.iter().enumerate().skip(1).rev() {
            let xi = 2.0 * PI * m as f64 / self.period;
            d2 -= 2.0 * xi * xi * c;
            d4 += 2.0 * xi.powi(4) * c;
        }
        let phi0 = self.a + self.b * (1.0 - self.ratio_e_over_k());
        Ok(d4 - self.gamma.value() * d2 + self.omega * phi0 - phi0.powi(3) / 3.0 + a_const)
    }

    /// Closed-form `M(φ) = aL` (γ = 0 family).
    pub fn closed_form_m(&self) -> Result<f64> {
        self.require_gamma0("closed-form M")?;
        Ok(self.a * self.period)
    }

    /// Closed-form `F(φ) = 320(k⁴ − k² + 1)K⁴/L³` (γ = 0 family).
    pub fn closed_form_f(&self) -> Result<f64> {
        self.require_gamma0("closed-form F")?;
        let k2 = self.k * self.k;
        Ok(320.0 * (k2 * k2 - k2 + 1.0) * self.k_big.powi(4) / self.period.powi(3))
    }

    fn require_gamma0(&self, what: &str) -> Result<()> {
        if self.gamma != Gamma::Zero {
            return domain(format!("{what} is only available for gamma = 0"));
        }
        Ok(())
    }
}

pub fn build_wave_params(k: f64, period: f64, gamma: Gamma) -> Result<WaveParams> {
    WaveParams::new(k, period, gamma)
}

pub fn closed_form_m(k: f64, period: f64) -> Result<f64> {
    WaveParams::new(k, period, Gamma::Zero)?.closed_form_m()
}

pub fn closed_form_f(k: f64, period: f64) -> Result<f64> {
    WaveParams::new(k, period, Gamma::Zero)?.closed_form_f()
}

/// `∂ω/∂k`, `∂A/∂k`, `∂F(φ)/∂k`, `∂M(φ)/∂k` along the γ = 0 curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamDerivatives {
    pub d_omega_dk: f64,
    #[serde(rename = "dA_dk")]
    pub d_a_const_dk: f64,
    #[serde(rename = "dF_dk")]
    pub d_f_dk: f64,
    #[serde(rename = "dM_dk")]
    pub d_m_dk: f64,
}

/// Analytic derivatives of the closed forms `ω(k)`, `A(k)`, `F(φ)(k)` and
/// `M(φ)(k) = a(k)L`, using `dK/dk` and `dE/dk`.
pub fn param_derivatives(k: f64, period: f64) -> Result<ParamDerivatives> {
    if !(K_MIN..=K_MAX).contains(&k) {
        return domain(format!("k must lie in [{K_MIN}, {K_MAX}], got {k}"));
    }
    if !(period > 0.0) {
        return domain(format!("period must be positive, got {period}"));
    }
    let ell = EllipticValues::new(k)?;
    let (dkk, dee) = elliptic_derivatives(k)?;
    let kk = ell.k_big;
    let ee = ell.e_big;
    let k2 = k * k;
    let l = period;

    let p = k2 * k2 - k2 + 1.0;
    let dp = 4.0 * k2 * k - 2.0 * k;
    let d_quartic = dp * kk.powi(4) + 4.0 * p * kk.powi(3) * dkk;

    // (k²−2)(2k²−1)(k²+1) = 2k⁶ − 3k⁴ − 3k² + 2
    let q = 2.0 * k2 * k2 * k2 - 3.0 * k2 * k2 - 3.0 * k2 + 2.0;
    let dq = 12.0 * k2 * k2 * k - 12.0 * k2 * k - 6.0 * k;
    let d_sextic = dq * kk.powi(6) + 6.0 * q * kk.powi(5) * dkk;

    // L·a = 8√10[(k²−2)K² + 3KE]/L
    let d_al = 8.0
        * SQRT10
        * (2.0 * k * kk * kk + 2.0 * (k2 - 2.0) * kk * dkk + 3.0 * (dkk * ee + kk * dee));

    Ok(ParamDerivatives {
        d_omega_dk: 384.0 * d_quartic / l.powi(4),
        d_a_const_dk: -2048.0 * SQRT10 / 3.0 * d_sextic / l.powi(6),
        d_f_dk: 320.0 * d_quartic / l.powi(3),
        d_m_dk: d_al / l,
    })
}

/// Values of the conserved functionals and the Lyapunov functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValues {
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "G")]
    pub g: f64,
}

/// `M(u) = ∫u dx`.
pub fn functional_m(grid: &FourierGrid, u: &[f64]) -> f64 {
    grid.integrate(u)
}

/// `F(u) = ½∫u² dx`.
pub fn functional_f(grid: &FourierGrid, u: &[f64]) -> f64 {
    0.5 * grid.inner(u, u)
}

/// `P(u) = ½∫(u_xx² + γu_x² − u⁴/6) dx`.
pub fn functional_p(grid: &FourierGrid, u: &[f64], gamma: Gamma) -> f64 {
    let uxx = grid.derivative(u, 2);
    let mut density: Vec<f64> = uxx
        .iter()
        .zip(u)
        .map(|(d, v)| d * d - v.powi(4) / 6.0)
        .collect();
    if gamma == Gamma::One {
        let ux = grid.derivative(u, 1);
        density.iter_mut().zip(&ux).for_each(|(d, v)| *d += v * v);
    }
    0.5 * grid.integrate(&density)
}

/// Sampled wave together with its spectrum and `Φ = ∂φ/∂k`.
#[derive(Debug, Clone)]
pub struct WaveProfile {
    pub params: WaveParams,
    pub grid: FourierGrid,
    pub samples: Vec<f64>,
    /// One-sided closed-form coefficients for `m = 0..=n/2`.
    pub fourier: Vec<f64>,
    /// `Φ` on the grid; `None` when `k` is too close to the ends of the
    /// curve for the difference stencil.
    pub dk_samples: Option<Vec<f64>>,
}

/// Samples `φ` at `x_j = jL/n` and fills its coefficients and `Φ`.
pub fn sample_profile(params: &WaveParams, n: usize) -> Result<WaveProfile> {
    if !n.is_power_of_two() || n < 64 {
        return domain(format!("grid size must be a power of two >= 64, got {n}"));
    }
    let grid = FourierGrid::new(n, params.period);
    let samples = grid
        .points()
        .iter()
        .map(|&x| params.phi(x))
        .collect::<Result<Vec<_>>>()?;
    let fourier = params.fourier_coefficients(n / 2)?;
    let dk_samples = if (DK_K_MIN..=DK_K_MAX).contains(&params.k) {
        Some(dphi_dk_on(&grid, params)?)
    } else {
        None
    };
    Ok(WaveProfile {
        params: *params,
        grid,
        samples,
        fourier,
        dk_samples,
    })
}

/// `Φ = ∂φ/∂k` on an `n`-point grid.
pub fn dphi_dk(params: &WaveParams, n: usize) -> Result<Vec<f64>> {
    if !n.is_power_of_two() || n < 64 {
        return domain(format!("grid size must be a power of two >= 64, got {n}"));
    }
    dphi_dk_on(&FourierGrid::new(n, params.period), params)
}

/// Richardson-extrapolated central differences (steps `h`, `h/2`) of the
/// closed-form spectrum in `k`, synthesized on the grid. Differencing the
/// spectrum keeps the error of each mode proportional to that mode, so high
/// derivatives of `Φ` stay clean.
fn dphi_dk_on(grid: &FourierGrid, params: &WaveParams) -> Result<Vec<f64>> {
    let k = params.k;
    if !(DK_K_MIN..=DK_K_MAX).contains(&k) {
        return domain(format!(
            "dphi/dk requires k in [{DK_K_MIN}, {DK_K_MAX}], got {k}"
        ));
    }
    let m_max = grid.n() / 2;
    let spectrum_at = |kk: f64| -> Result<Vec<f64>> {
        WaveParams::new(kk, params.period, params.gamma)?.fourier_coefficients(m_max)
    };
    let central = |h: f64| -> Result<Vec<f64>> {
        let plus = spectrum_at(k + h)?;
        let minus = spectrum_at(k - h)?;
        Ok(plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect())
    };
    let coarse = central(DK_STEP)?;
    let fine = central(0.5 * DK_STEP)?;
    let one_sided: Vec<f64> = fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (4.0 * f - c) / 3.0)
        .collect();
    Ok(grid.inverse(&two_sided(grid, &one_sided)))
}

/// Expands one-sided real even coefficients into the full storage layout.
pub fn two_sided(grid: &FourierGrid, one_sided: &[f64]) -> Vec<Complex64> {
    let n = grid.n();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (m, &c) in one_sided.iter().enumerate().take(n / 2 + 1) {
        out[m] = Complex64::new(c, 0.0);
        if m > 0 && m < n / 2 {
            out[n - m] = Complex64::new(c, 0.0);
        }
    }
    out
}

impl WaveProfile {
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn points(&self) -> Vec<f64> {
        self.grid.points()
    }

    pub fn derivative(&self, order: u32) -> Vec<f64> {
        self.grid.derivative(&self.samples, order)
    }

    pub fn min_value(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive(&self) -> bool {
        self.min_value() > 0.0
    }

    pub fn dk(&self) -> Result<&[f64]> {
        self.dk_samples.as_deref().ok_or_else(|| {
            Error::Domain(format!(
                "dphi/dk unavailable at k = {} (needs k in [{DK_K_MIN}, {DK_K_MAX}])",
                self.params.k
            ))
        })
    }

    /// Max-norm ODE residual with spectral derivatives, normalized by
    /// `max|φ³/3|`.
    pub fn ode_residual(&self) -> f64 {
        let p = &self.params;
        let d4 = self.derivative(4);
        let d2 = self.derivative(2);
        let gamma = p.gamma.value();
        let residual: Vec<f64> = self
            .samples
            .iter()
            .zip(d4.iter().zip(&d2))
            .map(|(phi, (d4, d2))| {
                d4 - gamma * d2 + p.omega * phi - phi.powi(3) / 3.0 + p.integration_constant
            })
            .collect();
        let scale = self
            .samples
            .iter()
            .fold(0.0_f64, |m, v| m.max((v.powi(3) / 3.0).abs()));
        max_abs(&residual) / scale
    }

    pub fn functional_m(&self) -> f64 {
        functional_m(&self.grid, &self.samples)
    }

    pub fn functional_f(&self) -> f64 {
        functional_f(&self.grid, &self.samples)
    }

    pub fn functional_p(&self) -> f64 {
        functional_p(&self.grid, &self.samples, self.params.gamma)
    }

    /// `P`, `F`, `M` and `G = P + ωF + AM` at the wave.
    pub fn functional_g(&self) -> FunctionalValues {
        let p = self.functional_p();
        let f = self.functional_f();
        let m = self.functional_m();
        FunctionalValues {
            p,
            f,
            m,
            g: p + self.params.omega * f + self.params.integration_constant * m,
        }
    }
}

pub fn ode_residual(profile: &WaveProfile) -> f64 {
    profile.ode_residual()
}
