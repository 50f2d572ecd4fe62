//! The linearized operator `ℒ = ∂x⁴ − γ∂x² + ω − φ²` in a truncated Fourier
//! basis, its low spectrum, and the coefficient log-concavity criterion.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{complete_elliptic_k, complete_elliptic_k_complement, csch};
use crate::spectral::{chop, FourierGrid, CHOP_REL};
use crate::wave::{Gamma, WaveProfile};

/// Relative tolerance for the zero eigenvalue: `tol = ZERO_REL_TOL·(1 + |λ_min|)`.
pub const ZERO_REL_TOL: f64 = 1e-6;

/// Galerkin matrix of `ℒ` on modes `−m..=m`.
///
/// `hermitian` lives in the exponential basis `e^{iξ_n x}`; `real` is the
/// same operator in the orthonormal real basis `{1, √2 cos ξ_n x, √2 sin ξ_n x}`
/// (ordered `1, cos_1, sin_1, cos_2, …`), where it is real symmetric.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub modes: usize,
    pub gamma: Gamma,
    pub omega: f64,
    pub period: f64,
    /// Diagonal symbol `ξ_n⁴ + γξ_n² + ω` for `n = −m..=m`.
    pub symbol: Vec<f64>,
    pub hermitian: DMatrix<Complex64>,
    pub real: DMatrix<f64>,
    /// `φ′` truncated to the retained modes, in real-basis coordinates.
    pub zero_mode: DVector<f64>,
    grid: FourierGrid,
    basis: DMatrix<Complex64>,
}

fn xi(n: i64, period: f64) -> f64 {
    2.0 * PI * n as f64 / period
}

/// Unitary map from real-basis coordinates to exponential-basis coordinates.
fn real_basis(m: usize) -> DMatrix<Complex64> {
    let dim = 2 * m + 1;
    let mut u = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    let at = |n: i64| (n + m as i64) as usize;
    u[(at(0), 0)] = Complex64::new(1.0, 0.0);
    for n in 1..=m as i64 {
        let cos_col = 2 * n as usize - 1;
        let sin_col = 2 * n as usize;
        u[(at(n), cos_col)] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        u[(at(-n), cos_col)] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        u[(at(n), sin_col)] = Complex64::new(0.0, -FRAC_1_SQRT_2);
        u[(at(-n), sin_col)] = Complex64::new(0.0, FRAC_1_SQRT_2);
    }
    u
}

/// Assembles `ℒ` on `2m + 1` modes, with the potential taken from `φ²`
/// sampled on the (finer) profile grid.
pub fn assemble_operator(profile: &WaveProfile, m: usize) -> Result<OperatorMatrix> {
    let n = profile.n();
    if m == 0 || 3 * m > n {
        return Err(Error::Dimension(format!(
            "mode count {m} needs 1 <= m <= n/3 for a grid of {n} points"
        )));
    }
    let params = &profile.params;
    let grid = &profile.grid;
    let squared: Vec<f64> = profile.samples.iter().map(|v| v * v).collect();
    let potential = grid.forward(&squared);
    let potential_at = |d: i64| -> Complex64 {
        if d.unsigned_abs() as usize >= n / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            potential[grid.index(d)]
        }
    };

    let dim = 2 * m + 1;
    let mi = m as i64;
    let gamma = params.gamma.value();
    let symbol: Vec<f64> = (-mi..=mi)
        .map(|k| {
            let x = xi(k, params.period);
            x.powi(4) + gamma * x * x + params.omega
        })
        .collect();
    let hermitian = DMatrix::from_fn(dim, dim, |i, j| {
        let diag = if i == j { symbol[i] } else { 0.0 };
        Complex64::new(diag, 0.0) - potential_at(i as i64 - j as i64)
    });
    let basis = real_basis(m);
    let rotated = basis.adjoint() * &hermitian * &basis;
    let mut real = rotated.map(|c| c.re);
    real = (&real + real.transpose()) * 0.5;

    let mut phi_hat = grid.forward(&profile.samples);
    chop(&mut phi_hat, CHOP_REL);
    let derivative = DVector::from_fn(dim, |i, _| {
        let k = i as i64 - mi;
        phi_hat[grid.index(k)] * Complex64::new(0.0, xi(k, params.period))
    });
    let zero_mode = (basis.adjoint() * derivative).map(|c| c.re);

    Ok(OperatorMatrix {
        modes: m,
        gamma: params.gamma,
        omega: params.omega,
        period: params.period,
        symbol,
        hermitian,
        real,
        zero_mode,
        grid: grid.clone(),
        basis,
    })
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        2 * self.modes + 1
    }

    /// `max |H_ij − conj(H_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let h = &self.hermitian;
        let mut worst = 0.0_f64;
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Exponential-basis coefficients of a grid function on the retained modes.
    pub fn project(&self, u: &[f64]) -> DVector<Complex64> {
        let coeffs = self.grid.forward(u);
        let mi = self.modes as i64;
        DVector::from_fn(self.dim(), |i, _| coeffs[self.grid.index(i as i64 - mi)])
    }

    pub fn apply(&self, coeffs: &DVector<Complex64>) -> DVector<Complex64> {
        &self.hermitian * coeffs
    }

    /// `⟨ℒu, u⟩ = L Σ conj(û_p) H_pq û_q` on the retained modes.
    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        let c = self.project(u);
        let hc = self.apply(&c);
        self.period * c.dotc(&hc).re
    }

    /// `‖ℒw‖/‖w‖` for the truncated `φ′`; `None` when `φ′` vanishes.
    pub fn galerkin_zero_residual(&self) -> Option<f64> {
        let norm = self.zero_mode.norm();
        if norm <= f64::EPSILON * (1.0 + self.omega.abs()) {
            return None;
        }
        Some((&self.real * &self.zero_mode).norm() / norm)
    }

    /// Real-basis coordinates mapped back to exponential coefficients.
    pub fn to_exponential(&self, v: &DVector<f64>) -> DVector<Complex64> {
        &self.basis * v.map(|x| Complex64::new(x, 0.0))
    }
}

/// Low end of the spectrum of `ℒ` and the verdict on the hypothesis:
/// one simple negative eigenvalue and a simple zero eigenvalue spanned by `φ′`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub modes: usize,
    pub eigenvalues: Vec<f64>,
    pub n_negative: usize,
    pub n_zero: usize,
    pub tol_zero: f64,
    pub zero_residual: Option<f64>,
    pub zero_cosine: Option<f64>,
    pub zero_gap: f64,
    pub hypothesis_ok: bool,
}

/// Dense symmetric eigendecomposition with the lowest `count` eigenvalues
/// re-evaluated as Rayleigh quotients of their eigenvectors. The quotient
/// removes the `ε‖ℒ‖` absolute error that the quartic diagonal would
/// otherwise leave on the small eigenvalues.
pub fn low_spectrum(op: &OperatorMatrix, count: usize) -> Result<SpectrumReport> {
    let dim = op.dim();
    if count == 0 || count > dim {
        return Err(Error::Dimension(format!(
            "count {count} must lie in 1..={dim}"
        )));
    }
    let eig = SymmetricEigen::try_new(op.real.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen(format!("no convergence for dimension {dim}")))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut pairs: Vec<(f64, usize)> = order
        .iter()
        .enumerate()
        .map(|(rank, &i)| {
            if rank < count.max(3) {
                let v = eig.eigenvectors.column(i);
                let rv = &op.real * v;
                (v.dot(&rv) / v.dot(&v), i)
            } else {
                (eig.eigenvalues[i], i)
            }
        })
        .collect();
    // Polishing may swap members of a near-degenerate pair.
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let polished: Vec<f64> = pairs.iter().map(|p| p.0).collect();

    let lambda_min = polished[0];
    let tol_zero = ZERO_REL_TOL * (1.0 + lambda_min.abs());
    let n_negative = polished.iter().filter(|&&l| l < -tol_zero).count();
    let n_zero = polished.iter().filter(|&&l| l.abs() <= tol_zero).count();

    let (zero_rank, _) = polished
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap();
    let zero_gap = polished
        .iter()
        .enumerate()
        .filter(|(r, _)| *r != zero_rank)
        .map(|(_, l)| (l - polished[zero_rank]).abs())
        .fold(f64::INFINITY, f64::min);

    let w = &op.zero_mode;
    let zero_cosine = if w.norm() > 0.0 {
        let v = eig.eigenvectors.column(pairs[zero_rank].1);
        Some(v.dot(w).abs() / (v.norm() * w.norm()))
    } else {
        None
    };
    let zero_residual = op.galerkin_zero_residual();

    let third_clear = polished.get(2).is_some_and(|&l| l > tol_zero);
    let hypothesis_ok = n_negative == 1
        && n_zero == 1
        && third_clear
        && zero_residual.is_some_and(|r| r < tol_zero);

    Ok(SpectrumReport {
        modes: op.modes,
        eigenvalues: polished.into_iter().take(count).collect(),
        n_negative,
        n_zero,
        tol_zero,
        zero_residual,
        zero_cosine,
        zero_gap,
        hypothesis_ok,
    })
}

/// `ℒu` on the grid of `profile`: the constant-coefficient part is applied
/// in Fourier space to the round-off-chopped spectrum of `u`.
pub fn apply_linearized(profile: &WaveProfile, u: &[f64]) -> Vec<f64> {
    let grid = &profile.grid;
    let mut coeffs = grid.forward(u);
    chop(&mut coeffs, CHOP_REL);
    apply_linearized_coeffs(profile, &coeffs)
}

fn apply_linearized_coeffs(profile: &WaveProfile, coeffs: &[Complex64]) -> Vec<f64> {
    let grid = &profile.grid;
    let p = &profile.params;
    let gamma = p.gamma.value();
    let smooth = grid.inverse(coeffs);
    let linear: Vec<Complex64> = coeffs
        .iter()
        .zip(grid.wavenumbers())
        .map(|(c, x)| c * (x.powi(4) + gamma * x * x + p.omega))
        .collect();
    let linear = grid.inverse(&linear);
    linear
        .iter()
        .zip(&smooth)
        .zip(&profile.samples)
        .map(|((l, u), phi)| l - phi * phi * u)
        .collect()
}

/// `φ′` from the chopped spectrum of the samples.
pub fn profile_derivative_coeffs(profile: &WaveProfile) -> Vec<Complex64> {
    let grid = &profile.grid;
    let mut coeffs = grid.forward(&profile.samples);
    chop(&mut coeffs, CHOP_REL);
    grid.differentiate_coeffs(&coeffs, 1)
}

/// `‖ℒφ′‖₂ / ‖φ′‖₂` by direct application of `ℒ` to the spectral derivative.
pub fn zero_mode_residual(op: &OperatorMatrix, profile: &WaveProfile) -> Result<f64> {
    let p = &profile.params;
    if op.period != p.period || op.omega != p.omega || op.gamma != p.gamma {
        return Err(Error::Dimension(
            "operator was assembled for a different wave".into(),
        ));
    }
    let coeffs = profile_derivative_coeffs(profile);
    let derivative = profile.grid.inverse(&coeffs);
    let norm = profile.grid.l2_norm(&derivative);
    if norm <= 1e-12 * (1.0 + p.a.abs()) * p.period.sqrt() {
        return Err(Error::Degenerate(
            "phi' vanishes identically (constant profile)".into(),
        ));
    }
    let image = apply_linearized_coeffs(profile, &coeffs);
    Ok(profile.grid.l2_norm(&image) / norm)
}

/// `∂²/∂x² log g_k(x) = −1/x² + c² csch²(cx)` with `c = πK(k′)/K(k)`, where
/// `g_k(x) ∝ x csch(cx)` interpolates the Fourier coefficients of the wave.
pub fn log_concavity_d2(x: f64, k: f64) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return domain("log-concavity second derivative is undefined at x = 0");
    }
    if !(k > 0.0 && k < 1.0) {
        return domain(format!("modulus must lie in (0, 1), got {k}"));
    }
    let c = PI * complete_elliptic_k_complement(k)? / complete_elliptic_k(k)?;
    let y = c * x;
    if y.abs() < 0.25 {
        // c²·((y csch y)² − 1)/y², expanded to avoid cancellation near 0.
        let y2 = y * y;
        let series = -1.0 / 3.0
            + y2 * (1.0 / 15.0
                + y2 * (-2.0 / 189.0
                    + y2 * (1.0 / 675.0
                        + y2 * (-2.0 / 10395.0
                            + y2 * (1382.0 / 58046625.0 - y2 * 4.0 / 1403325.0)))));
        return Ok(c * c * series);
    }
    let s = csch(y)?;
    Ok(-1.0 / (x * x) + c * c * s * s)
}

/// Outcome of the three sufficient conditions for the spectral hypothesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionReport {
    pub min_phi: f64,
    pub positive: bool,
    pub coefficients_positive: bool,
    pub max_d2_log_g: f64,
    pub log_concave: bool,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.positive && self.coefficients_positive && self.log_concave
    }
}

/// `true` when every coefficient is positive, except a tail that has
/// underflowed to exactly zero.
pub fn coefficients_positive(coeffs: &[f64]) -> bool {
    let nonzero = coeffs.iter().take_while(|&&c| c != 0.0).count();
    nonzero >= 2
        && coeffs[..nonzero].iter().all(|&c| c > 0.0)
        && coeffs[nonzero..].iter().all(|&c| c == 0.0)
}

pub fn verify_proposition_criterion(profile: &WaveProfile, x_grid: &[f64]) -> CriterionReport {
    check_criterion(
        profile.min_value(),
        &profile.fourier,
        profile.params.k,
        x_grid,
    )
}

/// Criterion on explicit inputs; lets callers feed a modified coefficient
/// sequence.
pub fn check_criterion(min_phi: f64, coeffs: &[f64], k: f64, x_grid: &[f64]) -> CriterionReport {
    let mut max_d2 = f64::NEG_INFINITY;
    let mut log_concave = !x_grid.is_empty();
    for &x in x_grid {
        match log_concavity_d2(x, k) {
            Ok(v) => {
                max_d2 = max_d2.max(v);
                if !(v < 0.0) {
                    log_concave = false;
                }
            }
            Err(_) => log_concave = false,
        }
    }
    CriterionReport {
        min_phi,
        positive: min_phi > 0.0,
        coefficients_positive: coefficients_positive(coeffs),
        max_d2_log_g: max_d2,
        log_concave,
    }
}

/// Symmetric grid of `points` abscissae on `[−half_width, half_width]`
/// with the origin removed.
pub fn symmetric_grid(half_width: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points)
        .map(|i| -half_width + 2.0 * half_width * i as f64 / (points - 1) as f64)
        .filter(|x| x.abs() > 1e-12 * half_width)
        .collect()
}

/// `(x, ∂²log g_k)` rows for plotting.
pub fn log_concavity_curve(k: f64, x_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    x_grid
        .iter()
        .map(|&x| Ok((x, log_concavity_d2(x, k)?)))
        .collect()
}

/// Lowest eigenvalues at `m` and `2m` modes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementReport {
    pub coarse: SpectrumReport,
    pub fine: SpectrumReport,
    pub max_shift: f64,
    pub verdict_stable: bool,
}

pub fn refinement_study(profile: &WaveProfile, m: usize, count: usize) -> Result<RefinementReport> {
    let coarse = low_spectrum(&assemble_operator(profile, m)?, count)?;
    let fine = low_spectrum(&assemble_operator(profile, 2 * m)?, count)?;
    let max_shift = coarse
        .eigenvalues
        .iter()
        .zip(&fine.eigenvalues)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let verdict_stable = coarse.hypothesis_ok == fine.hypothesis_ok
        && coarse.n_negative == fine.n_negative
        && coarse.n_zero == fine.n_zero;
    Ok(RefinementReport {
        coarse,
        fine,
        max_shift,
        verdict_stable,
    })
}
