//! The full check battery over a grid of moduli, as run by `verify`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::index::{stability_index, IDENTITY_REL_TOL, INDEX_REL_TOL};
use crate::spectrum::{
    assemble_operator, low_spectrum, refinement_study, symmetric_grid,
    verify_proposition_criterion, zero_mode_residual, ZERO_REL_TOL,
};
use crate::wave::{sample_profile, Gamma, WaveParams};

/// Normalized ODE residual accepted for a sampled wave.
pub const ODE_TOL: f64 = 1e-7;
/// Largest eigenvalue shift accepted between successive mode counts.
pub const REFINEMENT_TOL: f64 = 1e-8;
/// Cosine between the computed zero eigenvector and `φ′`.
pub const COSINE_TOL: f64 = 1e-8;
const LOW_COUNT: usize = 6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub ks: Vec<f64>,
    #[serde(rename = "L")]
    pub period: f64,
    pub gammas: Vec<Gamma>,
    pub n: usize,
    pub m_modes: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            ks: (2..=9).map(|i| i as f64 / 10.0).collect(),
            period: 2.0 * PI,
            gammas: vec![Gamma::Zero, Gamma::One],
            n: 512,
            m_modes: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Hypotheses of the check do not hold; it neither passes nor fails.
    Skipped,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, ok: bool, value: f64, threshold: f64, detail: String) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Self {
            name: name.into(),
            status,
            value,
            threshold,
            detail,
        }
    }

    fn error(name: &str, err: impl std::fmt::Display) -> Self {
        Self {
            name: name.into(),
            status: Status::Fail,
            value: f64::NAN,
            threshold: f64::NAN,
            detail: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseReport {
    pub k: f64,
    #[serde(rename = "L")]
    pub period: f64,
    pub gamma: Gamma,
    pub checks: Vec<Check>,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub passed: bool,
    /// `"k=…,gamma=…:check"` for every failed check.
    pub failures: Vec<String>,
    pub cases: Vec<CaseReport>,
}

pub fn run_verify(config: &VerifyConfig) -> Result<VerifyReport> {
    if config.ks.is_empty() || config.gammas.is_empty() {
        return domain("verify needs at least one k and one gamma");
    }
    if config.m_modes == 0 || 4 * config.m_modes > config.n / 3 {
        return domain(format!(
            "m_modes must satisfy 1 <= 4*m_modes <= n/3 = {}, got {}",
            config.n / 3,
            config.m_modes
        ));
    }
    // Validates every point before any work is done.
    for &k in &config.ks {
        for &g in &config.gammas {
            WaveParams::new(k, config.period, g)?;
        }
    }
    let jobs: Vec<(f64, Gamma)> = config
        .ks
        .iter()
        .flat_map(|&k| config.gammas.iter().map(move |&g| (k, g)))
        .collect();
    let cases: Vec<CaseReport> = jobs
        .par_iter()
        .map(|&(k, g)| run_case(config, k, g))
        .collect();
    let failures: Vec<String> = cases
        .iter()
        .flat_map(|c| {
            c.checks
                .iter()
                .filter(|ch| ch.status == Status::Fail)
                .map(move |ch| format!("k={},gamma={}:{}", c.k, c.gamma.value(), ch.name))
        })
        .collect();
    Ok(VerifyReport {
        config: config.clone(),
        passed: failures.is_empty(),
        failures,
        cases,
    })
}

fn run_case(config: &VerifyConfig, k: f64, gamma: Gamma) -> CaseReport {
    let mut checks = Vec::new();
    let params = WaveParams::new(k, config.period, gamma).expect("validated before dispatch");
    let profile = match sample_profile(&params, config.n) {
        Ok(p) => p,
        Err(e) => {
            checks.push(Check::error("sample_profile", e));
            return CaseReport {
                k,
                period: config.period,
                gamma,
                checks,
            };
        }
    };

    let residual = profile.ode_residual();
    checks.push(Check::new(
        "ode_residual",
        residual < ODE_TOL,
        residual,
        ODE_TOL,
        String::new(),
    ));

    let crit = verify_proposition_criterion(&profile, &symmetric_grid(10.0, 2001));
    checks.push(if crit.positive {
        Check::new(
            "proposition_criterion",
            crit.passed(),
            crit.max_d2_log_g,
            0.0,
            format!(
                "min phi {:e}, coefficients positive {}",
                crit.min_phi, crit.coefficients_positive
            ),
        )
    } else {
        Check {
            name: "proposition_criterion".into(),
            status: Status::Skipped,
            value: crit.min_phi,
            threshold: 0.0,
            detail: "profile not positive; criterion does not apply".into(),
        }
    });

    let m = config.m_modes;
    match assemble_operator(&profile, m).and_then(|op| {
        let report = low_spectrum(&op, LOW_COUNT)?;
        let residual = zero_mode_residual(&op, &profile)?;
        Ok((report, residual))
    }) {
        Ok((report, residual)) => {
            checks.push(Check::new(
                "spectrum_hypothesis",
                report.hypothesis_ok,
                report.eigenvalues.get(2).copied().unwrap_or(f64::NAN),
                report.tol_zero,
                format!(
                    "{} negative, {} zero, lowest {:?}",
                    report.n_negative,
                    report.n_zero,
                    &report.eigenvalues[..report.eigenvalues.len().min(3)]
                ),
            ));
            let cos = report.zero_cosine.unwrap_or(0.0);
            checks.push(Check::new(
                "zero_mode_cosine",
                cos > 1.0 - COSINE_TOL,
                1.0 - cos,
                COSINE_TOL,
                String::new(),
            ));
            checks.push(Check::new(
                "zero_mode_residual",
                residual < ZERO_REL_TOL,
                residual,
                ZERO_REL_TOL,
                String::new(),
            ));
        }
        Err(e) => {
            checks.push(Check::error("spectrum_hypothesis", &e));
            checks.push(Check::error("zero_mode_residual", &e));
        }
    }

    let refinement = refinement_study(&profile, m, LOW_COUNT).and_then(|a| {
        let b = refinement_study(&profile, 2 * m, LOW_COUNT)?;
        Ok((a, b))
    });
    checks.push(match refinement {
        Ok((a, b)) => {
            let shift = a.max_shift.max(b.max_shift);
            let stable = a.verdict_stable && b.verdict_stable && a.coarse.hypothesis_ok;
            Check::new(
                "spectrum_refinement",
                stable && shift < REFINEMENT_TOL,
                shift,
                REFINEMENT_TOL,
                format!("modes {m}, {}, {}; verdict stable {stable}", 2 * m, 4 * m),
            )
        }
        Err(e) => Check::error("spectrum_refinement", e),
    });

    if gamma == Gamma::Zero {
        match stability_index(k, config.period) {
            Ok(r) => {
                checks.push(Check::new(
                    "index_consistency",
                    r.relative_gap() < INDEX_REL_TOL && r.index < 0.0,
                    r.relative_gap(),
                    INDEX_REL_TOL,
                    format!(
                        "I {:e}, quadrature {:e}, f {:e}",
                        r.index, r.index_quadrature, r.f
                    ),
                ));
                checks.push(Check::new(
                    "lphi_identity",
                    r.identity_residual < IDENTITY_REL_TOL,
                    r.identity_residual,
                    IDENTITY_REL_TOL,
                    String::new(),
                ));
            }
            Err(e) => {
                checks.push(Check::error("index_consistency", &e));
                checks.push(Check::error("lphi_identity", &e));
            }
        }
    }
    CaseReport {
        k,
        period: config.period,
        gamma,
        checks,
    }
}
