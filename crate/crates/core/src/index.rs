//! The stability index `I = ⟨ℒΦ, Φ⟩` with `Φ = ∂φ/∂k`, along the γ = 0 curve.
//!
//! Two independent routes are computed for every row: the closed-form
//! derivative composition `I = −ω_k F_k − A_k M_k`, and the quadratic form of
//! the assembled Galerkin operator on the numerically differentiated `Φ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::spectral::{max_abs, FourierGrid};
use crate::spectrum::{apply_linearized, assemble_operator};
use crate::wave::{
    functional_f, functional_m, param_derivatives, sample_profile, Gamma, WaveParams, DK_K_MAX,
    DK_K_MIN,
};

/// Grid used for the quadrature route.
pub const INDEX_GRID: usize = 512;
/// Modes retained in the Galerkin operator for the quadrature route.
pub const INDEX_MODES: usize = 64;
/// Allowed relative gap between the two routes.
pub const INDEX_REL_TOL: f64 = 1e-4;
/// Allowed relative residual of `ℒΦ = −ω_k φ − A_k`.
pub const IDENTITY_REL_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexReport {
    pub k: f64,
    #[serde(rename = "L")]
    pub period: f64,
    pub d_omega_dk: f64,
    #[serde(rename = "dA_dk")]
    pub d_a_const_dk: f64,
    #[serde(rename = "dF_dk")]
    pub d_f_dk: f64,
    #[serde(rename = "dM_dk")]
    pub d_m_dk: f64,
    #[serde(rename = "I")]
    pub index: f64,
    pub f: f64,
    #[serde(rename = "I_quadrature")]
    pub index_quadrature: f64,
    /// `‖ℒΦ + ω_kφ + A_k‖_∞ / ‖ω_kφ + A_k‖_∞`.
    pub identity_residual: f64,
}

impl IndexReport {
    pub fn relative_gap(&self) -> f64 {
        (self.index - self.index_quadrature).abs() / (self.index.abs() + 1e-30)
    }

    pub fn consistent(&self) -> bool {
        self.relative_gap() < INDEX_REL_TOL && self.identity_residual < IDENTITY_REL_TOL
    }
}

/// Weights of `Q(u) = ω_k F(u) + A_k M(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QWeights {
    pub omega_k: f64,
    pub a_k: f64,
}

impl QWeights {
    pub fn evaluate(&self, grid: &FourierGrid, u: &[f64]) -> f64 {
        self.omega_k * functional_f(grid, u) + self.a_k * functional_m(grid, u)
    }

    /// Fréchet derivative `Q′(u) = ω_k u + A_k` as a grid function.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|v| self.omega_k * v + self.a_k).collect()
    }
}

pub fn q_weights(k: f64, period: f64) -> Result<QWeights> {
    let d = param_derivatives(k, period)?;
    Ok(QWeights {
        omega_k: d.d_omega_dk,
        a_k: d.d_a_const_dk,
    })
}

pub fn stability_index(k: f64, period: f64) -> Result<IndexReport> {
    if !(DK_K_MIN..=DK_K_MAX).contains(&k) {
        return domain(format!(
            "stability index requires k in [{DK_K_MIN}, {DK_K_MAX}], got {k}"
        ));
    }
    let d = param_derivatives(k, period)?;
    let index = -d.d_omega_dk * d.d_f_dk - d.d_a_const_dk * d.d_m_dk;

    let params = WaveParams::new(k, period, Gamma::Zero)?;
    let profile = sample_profile(&params, INDEX_GRID)?;
    let phi_k = profile.dk()?;
    let op = assemble_operator(&profile, INDEX_MODES)?;
    let index_quadrature = op.quadratic_form(phi_k);

    let image = apply_linearized(&profile, phi_k);
    let forcing: Vec<f64> = profile
        .samples
        .iter()
        .map(|phi| d.d_omega_dk * phi + d.d_a_const_dk)
        .collect();
    let defect: Vec<f64> = image.iter().zip(&forcing).map(|(l, f)| l + f).collect();
    let identity_residual = max_abs(&defect) / max_abs(&forcing);

    Ok(IndexReport {
        k,
        period,
        d_omega_dk: d.d_omega_dk,
        d_a_const_dk: d.d_a_const_dk,
        d_f_dk: d.d_f_dk,
        d_m_dk: d.d_m_dk,
        index,
        f: -period.powi(7) * index,
        index_quadrature,
        identity_residual,
    })
}

/// Uniform-in-`k` table of index rows.
pub fn scan_index(k_min: f64, k_max: f64, steps: usize, period: f64) -> Result<Vec<IndexReport>> {
    if !(DK_K_MIN <= k_min && k_min < k_max && k_max <= DK_K_MAX) {
        return domain(format!(
            "scan needs {DK_K_MIN} <= k_min < k_max <= {DK_K_MAX}, got [{k_min}, {k_max}]"
        ));
    }
    if steps < 2 {
        return domain(format!("scan needs at least 2 steps, got {steps}"));
    }
    (0..steps)
        .into_par_iter()
        .map(|i| {
            let k = k_min + (k_max - k_min) * i as f64 / (steps - 1) as f64;
            stability_index(k, period)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexSummary {
    pub min_f: f64,
    pub max_f: f64,
    #[serde(rename = "all_negative_I")]
    pub all_negative_index: bool,
}

pub fn summarize(rows: &[IndexReport]) -> IndexSummary {
    IndexSummary {
        min_f: rows.iter().map(|r| r.f).fold(f64::INFINITY, f64::min),
        max_f: rows.iter().map(|r| r.f).fold(f64::NEG_INFINITY, f64::max),
        all_negative_index: !rows.is_empty() && rows.iter().all(|r| r.index < 0.0),
    }
}
