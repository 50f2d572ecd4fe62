//! Pseudospectral ETDRK4 integration of `u_t + u²u_x + γu_xxx − u_xxxxx = 0`
//! on a periodic domain, the orbit distance `ρ(u, φ)` in `H²`, and the
//! perturbed-wave experiment.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::spectral::{chop, FourierGrid, CHOP_REL};
use crate::wave::{sample_profile, Gamma, WaveParams, WaveProfile};

/// Points on the unit circle used to average the ETDRK4 φ-functions.
const CONTOUR_POINTS: usize = 32;
/// Highest mode carried by random perturbations; with `default_dt` the
/// fastest perturbed linear phase advances about one radian per step.
pub const PERTURB_MODES: usize = 4;
/// Spectral energy growth (relative to the start) treated as blow-up.
const BLOW_UP_FACTOR: f64 = 1e12;

/// `dt = 1e-3·(L/2π)⁵·(256/n)⁵`.
pub fn default_dt(period: f64, n: usize) -> f64 {
    1e-3 * (period / (2.0 * PI)).powi(5) * (256.0 / n as f64).powi(5)
}

/// `H²` weight `1 + ξ² + ξ⁴`.
#[inline]
fn h2_weight(xi: f64) -> f64 {
    1.0 + xi * xi + xi.powi(4)
}

/// `sqrt(L Σ (w0 + w1 ξ² + w2 ξ⁴)|û|²)` over the full coefficient vector.
pub fn weighted_norm(grid: &FourierGrid, coeffs: &[Complex64], weights: [f64; 3]) -> f64 {
    let sum: f64 = coeffs
        .iter()
        .zip(grid.wavenumbers())
        .map(|(c, x)| (weights[0] + weights[1] * x * x + weights[2] * x.powi(4)) * c.norm_sqr())
        .sum();
    (grid.length() * sum).sqrt()
}

/// `‖u‖_{H²}` with weights `(1, 1, 1)`.
pub fn h2_norm(grid: &FourierGrid, coeffs: &[Complex64]) -> f64 {
    weighted_norm(grid, coeffs, [1.0, 1.0, 1.0])
}

/// `‖u‖_{H²}` of a grid function.
pub fn h2_norm_of(grid: &FourierGrid, u: &[f64]) -> f64 {
    h2_norm(grid, &grid.forward(u))
}

/// Spectral state of a real periodic field.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub t: f64,
    pub gamma: Gamma,
    pub u_hat: Vec<Complex64>,
    grid: FourierGrid,
}

impl EvolutionState {
    pub fn from_grid(u: &[f64], period: f64, gamma: Gamma) -> Result<Self> {
        let n = u.len();
        if !n.is_power_of_two() || n < 8 {
            return domain(format!("grid size must be a power of two, got {n}"));
        }
        if !(period > 0.0) {
            return domain(format!("period must be positive, got {period}"));
        }
        let grid = FourierGrid::new(n, period);
        let mut state = Self {
            t: 0.0,
            gamma,
            u_hat: grid.forward(u),
            grid,
        };
        state.enforce_symmetry();
        Ok(state)
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn period(&self) -> f64 {
        self.grid.length()
    }

    pub fn to_grid(&self) -> Vec<f64> {
        self.grid.inverse(&self.u_hat)
    }

    /// Max-norm of the imaginary part of the synthesized field.
    pub fn imaginary_defect(&self) -> f64 {
        let mut buf = self.u_hat.clone();
        self.grid.inverse_complex(&mut buf);
        buf.iter().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    /// `max |û(−m) − conj(û(m))|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|j| (self.u_hat[(n - j) % n] - self.u_hat[j].conj()).norm())
            .fold(0.0, f64::max)
    }

    fn enforce_symmetry(&mut self) {
        let n = self.n();
        self.u_hat[0].im = 0.0;
        self.u_hat[n / 2].im = 0.0;
        for j in 1..n / 2 {
            let avg = 0.5 * (self.u_hat[j] + self.u_hat[n - j].conj());
            self.u_hat[j] = avg;
            self.u_hat[n - j] = avg.conj();
        }
    }

    pub fn h2_norm(&self) -> f64 {
        h2_norm(&self.grid, &self.u_hat)
    }

    pub fn functional_m(&self) -> f64 {
        self.period() * self.u_hat[0].re
    }

    pub fn functional_f(&self) -> f64 {
        0.5 * weighted_norm(&self.grid, &self.u_hat, [1.0, 0.0, 0.0]).powi(2)
    }

    pub fn functional_p(&self) -> f64 {
        let u = self.to_grid();
        let quartic: f64 = self
            .grid
            .integrate(&u.iter().map(|v| v.powi(4)).collect::<Vec<_>>());
        let gamma = self.gamma.value();
        let gradient = weighted_norm(&self.grid, &self.u_hat, [0.0, gamma, 1.0]).powi(2);
        0.5 * (gradient - quartic / 6.0)
    }

    /// Translated copy `u(· + s)`.
    pub fn translated(&self, s: f64) -> Self {
        let xi = self.grid.odd_wavenumbers();
        let mut out = self.clone();
        out.u_hat
            .iter_mut()
            .zip(xi)
            .for_each(|(c, x)| *c *= Complex64::from_polar(1.0, x * s));
        out
    }
}

/// Linear symbol `λ = i(ξ⁵ + γξ³)` of `u_t = −γu_xxx + u_xxxxx`.
fn linear_symbol(grid: &FourierGrid, gamma: Gamma) -> Vec<Complex64> {
    let g = gamma.value();
    grid.odd_wavenumbers()
        .into_iter()
        .map(|x| Complex64::new(0.0, x.powi(5) + g * x.powi(3)))
        .collect()
}

/// Exact linear propagation `û ← e^{λ dt} û`; `dt` may be negative.
pub fn linear_propagate(state: &mut EvolutionState, dt: f64) {
    let symbol = linear_symbol(&state.grid, state.gamma);
    state
        .u_hat
        .iter_mut()
        .zip(symbol)
        .for_each(|(c, l)| *c *= (l * dt).exp());
    state.t += dt;
}

/// Fourth-order exponential time differencing Runge–Kutta stepper with the
/// dispersive part integrated exactly.
#[derive(Debug, Clone)]
pub struct Etdrk4 {
    grid: FourierGrid,
    gamma: Gamma,
    dt: f64,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
    /// `−iξ/3` on the kept modes, zero on the top third.
    nonlinear: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Etdrk4 {
    pub fn new(n: usize, period: f64, gamma: Gamma, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return domain(format!("time step must be positive, got {dt}"));
        }
        if !n.is_power_of_two() || n < 8 {
            return domain(format!("grid size must be a power of two, got {n}"));
        }
        let grid = FourierGrid::new(n, period);
        let symbol = linear_symbol(&grid, gamma);
        let roots: Vec<Complex64> = (0..CONTOUR_POINTS)
            .map(|j| {
                Complex64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64)
            })
            .collect();
        let mean = |z: Complex64, f: &dyn Fn(Complex64) -> Complex64| -> Complex64 {
            roots.iter().map(|r| f(z + r)).sum::<Complex64>() / CONTOUR_POINTS as f64
        };
        let one = Complex64::new(1.0, 0.0);
        let mut e = Vec::with_capacity(n);
        let mut e2 = Vec::with_capacity(n);
        let mut q = Vec::with_capacity(n);
        let mut f1 = Vec::with_capacity(n);
        let mut f2 = Vec::with_capacity(n);
        let mut f3 = Vec::with_capacity(n);
        for l in &symbol {
            let z = l * dt;
            e.push(z.exp());
            e2.push((z * 0.5).exp());
            q.push(dt * mean(z, &|w| ((w * 0.5).exp() - one) / w));
            f1.push(
                dt * mean(z, &|w| {
                    (-4.0 - w + w.exp() * (4.0 - 3.0 * w + w * w)) / w.powi(3)
                }),
            );
            f2.push(dt * mean(z, &|w| (2.0 + w + w.exp() * (w - 2.0)) / w.powi(3)));
            f3.push(
                dt * mean(z, &|w| {
                    (-4.0 - 3.0 * w - w * w + w.exp() * (4.0 - w)) / w.powi(3)
                }),
            );
        }
        let cutoff = n / 3;
        let nonlinear = grid
            .odd_wavenumbers()
            .into_iter()
            .enumerate()
            .map(|(j, x)| {
                if grid.mode(j).unsigned_abs() as usize > cutoff {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, -x / 3.0)
                }
            })
            .collect();
        Ok(Self {
            grid,
            gamma,
            dt,
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            nonlinear,
            scratch: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `N̂(v) = −(1/3) iξ · FFT(u³)`, dealiased by the 2/3 rule.
    fn nonlinear_term(&mut self, v: &[Complex64]) -> Vec<Complex64> {
        self.scratch.copy_from_slice(v);
        self.grid.inverse_complex(&mut self.scratch);
        for c in self.scratch.iter_mut() {
            *c = Complex64::new(c.re.powi(3), 0.0);
        }
        self.grid.forward_complex(&mut self.scratch);
        self.scratch
            .iter()
            .zip(&self.nonlinear)
            .map(|(c, g)| c * g)
            .collect()
    }

    pub fn step(&mut self, state: &mut EvolutionState) -> Result<()> {
        if state.n() != self.grid.n()
            || state.period() != self.grid.length()
            || state.gamma != self.gamma
        {
            return Err(Error::Dimension(
                "state does not match the integrator grid".into(),
            ));
        }
        let v = &state.u_hat;
        let nv = self.nonlinear_term(v);
        let a: Vec<Complex64> = (0..v.len())
            .map(|j| self.e2[j] * v[j] + self.q[j] * nv[j])
            .collect();
        let na = self.nonlinear_term(&a);
        let b: Vec<Complex64> = (0..v.len())
            .map(|j| self.e2[j] * v[j] + self.q[j] * na[j])
            .collect();
        let nb = self.nonlinear_term(&b);
        let c: Vec<Complex64> = (0..v.len())
            .map(|j| self.e2[j] * a[j] + self.q[j] * (2.0 * nb[j] - nv[j]))
            .collect();
        let nc = self.nonlinear_term(&c);
        let next: Vec<Complex64> = (0..v.len())
            .map(|j| {
                self.e[j] * v[j]
                    + nv[j] * self.f1[j]
                    + 2.0 * (na[j] + nb[j]) * self.f2[j]
                    + nc[j] * self.f3[j]
            })
            .collect();
        state.u_hat = next;
        state.t += self.dt;
        state.enforce_symmetry();
        Ok(())
    }
}

/// One ETDRK4 step of size `dt`.
pub fn step(state: &EvolutionState, dt: f64) -> Result<EvolutionState> {
    let mut stepper = Etdrk4::new(state.n(), state.period(), state.gamma, dt)?;
    let mut next = state.clone();
    stepper.step(&mut next)?;
    Ok(next)
}

/// Minimizer and minimum of `y ↦ ‖u − φ(· + y)‖_{H²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitFit {
    pub rho: f64,
    pub shift: f64,
}

/// Reference wave prepared for repeated orbit-distance evaluations.
#[derive(Debug, Clone)]
pub struct OrbitReference {
    grid: FourierGrid,
    phi_hat: Vec<Complex64>,
    xi: Vec<f64>,
    weight: Vec<f64>,
}

impl OrbitReference {
    pub fn new(profile: &WaveProfile) -> Self {
        let grid = profile.grid.clone();
        let mut phi_hat = grid.forward(&profile.samples);
        chop(&mut phi_hat, CHOP_REL);
        Self::from_coeffs(grid, phi_hat)
    }

    pub fn from_coeffs(grid: FourierGrid, phi_hat: Vec<Complex64>) -> Self {
        let xi = grid.odd_wavenumbers();
        let weight = grid.wavenumbers().into_iter().map(h2_weight).collect();
        Self {
            grid,
            phi_hat,
            xi,
            weight,
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.phi_hat
    }

    /// `ρ(u, φ) = inf_y ‖u − φ(· + y)‖_{H²}`.
    ///
    /// The `H²` cross-correlation at all grid shifts comes from one inverse
    /// FFT; golden-section search brackets the continuous optimum to
    /// `1e-10·L` and Newton steps on the analytic derivative polish it.
    pub fn distance(&self, u_hat: &[Complex64]) -> Result<OrbitFit> {
        let n = self.grid.n();
        if u_hat.len() != n {
            return Err(Error::Dimension(format!(
                "field has {} modes, reference has {n}",
                u_hat.len()
            )));
        }
        let z: Vec<Complex64> = (0..n)
            .map(|j| self.weight[j] * u_hat[j].conj() * self.phi_hat[j])
            .collect();
        let mut corr = z.clone();
        self.grid.inverse_complex(&mut corr);
        let dx = self.grid.dx();
        let (best, _) = corr
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.re.total_cmp(&b.1.re))
            .unwrap();

        let correlation = |y: f64| -> f64 {
            z.iter()
                .zip(&self.xi)
                .map(|(c, x)| (c * Complex64::from_polar(1.0, x * y)).re)
                .sum()
        };
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        let mut lo = best as f64 * dx - dx;
        let mut hi = best as f64 * dx + dx;
        let mut y1 = hi - golden * (hi - lo);
        let mut y2 = lo + golden * (hi - lo);
        let mut c1 = correlation(y1);
        let mut c2 = correlation(y2);
        let tol = 1e-10 * self.grid.length();
        while hi - lo > tol {
            if c1 > c2 {
                hi = y2;
                y2 = y1;
                c2 = c1;
                y1 = hi - golden * (hi - lo);
                c1 = correlation(y1);
            } else {
                lo = y1;
                y1 = y2;
                c1 = c2;
                y2 = lo + golden * (hi - lo);
                c2 = correlation(y2);
            }
        }
        let mut y = 0.5 * (lo + hi);
        for _ in 0..4 {
            let (mut d1, mut d2) = (0.0, 0.0);
            for (c, x) in z.iter().zip(&self.xi) {
                let term = c * Complex64::from_polar(1.0, x * y);
                d1 -= x * term.im;
                d2 -= x * x * term.re;
            }
            if d2 >= 0.0 {
                break;
            }
            let delta = -d1 / d2;
            if !delta.is_finite() || delta.abs() > dx {
                break;
            }
            y += delta;
        }

        let l = self.grid.length();
        let rho2: f64 = (0..n)
            .map(|j| {
                let shifted = self.phi_hat[j] * Complex64::from_polar(1.0, self.xi[j] * y);
                self.weight[j] * (u_hat[j] - shifted).norm_sqr()
            })
            .sum();
        Ok(OrbitFit {
            rho: (l * rho2).sqrt(),
            shift: y.rem_euclid(l),
        })
    }
}

pub fn orbit_distance_rho(state: &EvolutionState, phi: &WaveProfile) -> Result<f64> {
    if state.n() != phi.n() || state.period() != phi.params.period {
        return Err(Error::Dimension(
            "state and wave live on different grids".into(),
        ));
    }
    Ok(OrbitReference::new(phi).distance(&state.u_hat)?.rho)
}

/// Sampled diagnostics of an evolution.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub rho: Vec<f64>,
    pub shift: Vec<f64>,
    #[serde(rename = "F")]
    pub f: Vec<f64>,
    #[serde(rename = "M")]
    pub m: Vec<f64>,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
}

fn relative_drift(series: &[f64], floor: f64) -> f64 {
    let Some(&first) = series.first() else {
        return 0.0;
    };
    series.iter().map(|v| (v - first).abs()).fold(0.0, f64::max) / (first.abs() + floor)
}

impl TimeSeries {
    fn record(&mut self, state: &EvolutionState, reference: &OrbitReference) -> Result<()> {
        let fit = reference.distance(&state.u_hat)?;
        self.times.push(state.t);
        self.rho.push(fit.rho);
        self.shift.push(fit.shift);
        self.f.push(state.functional_f());
        self.m.push(state.functional_m());
        self.p.push(state.functional_p());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_t |F(t) − F(0)| / |F(0)|`.
    pub fn f_drift(&self) -> f64 {
        relative_drift(&self.f, 0.0)
    }

    /// `max_t |M(t) − M(0)| / (|M(0)| + 1)`.
    pub fn m_drift(&self) -> f64 {
        relative_drift(&self.m, 1.0)
    }

    pub fn p_drift(&self) -> f64 {
        relative_drift(&self.p, 0.0)
    }

    pub fn rho_max(&self) -> f64 {
        self.rho.iter().copied().fold(0.0, f64::max)
    }

    /// Least-squares speed `c` of `u(t) ≈ φ(· − ct)`, from the unwrapped
    /// optimal shifts.
    pub fn fitted_speed(&self, period: f64) -> f64 {
        let mut unwrapped = Vec::with_capacity(self.shift.len());
        let mut offset = 0.0;
        for (i, &s) in self.shift.iter().enumerate() {
            if i > 0 {
                let prev = self.shift[i - 1];
                if s - prev > 0.5 * period {
                    offset -= period;
                } else if prev - s > 0.5 * period {
                    offset += period;
                }
            }
            unwrapped.push(s + offset);
        }
        let n = self.times.len() as f64;
        let mt = self.times.iter().sum::<f64>() / n;
        let my = unwrapped.iter().sum::<f64>() / n;
        let cov: f64 = self
            .times
            .iter()
            .zip(&unwrapped)
            .map(|(t, y)| (t - mt) * (y - my))
            .sum();
        let var: f64 = self.times.iter().map(|t| (t - mt).powi(2)).sum();
        -cov / var
    }
}

/// Evolves `initial` to `t_max` with steps of about `dt`, sampling every
/// `sample_every` steps (the first and last states are always sampled).
pub fn evolve(
    initial: &[f64],
    reference: &WaveProfile,
    t_max: f64,
    dt: f64,
    sample_every: usize,
) -> Result<(TimeSeries, EvolutionState)> {
    if !(t_max > 0.0) {
        return domain(format!("t_max must be positive, got {t_max}"));
    }
    if initial.len() != reference.n() {
        return Err(Error::Dimension(format!(
            "initial data has {} points, reference wave has {}",
            initial.len(),
            reference.n()
        )));
    }
    let period = reference.params.period;
    let mut state = EvolutionState::from_grid(initial, period, reference.params.gamma)?;
    let steps = (t_max / dt).round().max(1.0) as usize;
    let mut stepper = Etdrk4::new(state.n(), period, state.gamma, t_max / steps as f64)?;
    let orbit = OrbitReference::new(reference);
    let sample_every = sample_every.max(1);

    let mut series = TimeSeries::default();
    series.record(&state, &orbit)?;
    let energy0 = state.h2_norm().max(f64::MIN_POSITIVE);
    for i in 1..=steps {
        stepper.step(&mut state)?;
        if i == steps {
            state.t = t_max;
        }
        let energy = state.h2_norm();
        if !energy.is_finite() || energy > BLOW_UP_FACTOR * energy0 {
            return Err(Error::BlowUp {
                t: state.t,
                reason: format!("H2 norm reached {energy:e}"),
            });
        }
        if i % sample_every == 0 || i == steps {
            series.record(&state, &orbit)?;
        }
    }
    Ok((series, state))
}

/// `H²` distance between `u(T)` evolved from `φ` and the exact translate
/// `φ(· − ωT)`.
pub fn traveling_wave_error(profile: &WaveProfile, dt: f64, t_final: f64) -> Result<f64> {
    let period = profile.params.period;
    let mut state = EvolutionState::from_grid(&profile.samples, period, profile.params.gamma)?;
    let steps = (t_final / dt).round().max(1.0) as usize;
    let mut stepper = Etdrk4::new(state.n(), period, state.gamma, t_final / steps as f64)?;
    for _ in 0..steps {
        stepper.step(&mut state)?;
    }
    let exact = state
        .clone_with(&profile.samples)?
        .translated(-profile.params.omega * t_final);
    let diff: Vec<Complex64> = state
        .u_hat
        .iter()
        .zip(&exact.u_hat)
        .map(|(a, b)| a - b)
        .collect();
    Ok(h2_norm(&state.grid, &diff))
}

impl EvolutionState {
    fn clone_with(&self, u: &[f64]) -> Result<Self> {
        let mut s = Self::from_grid(u, self.period(), self.gamma)?;
        s.t = self.t;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Perturbation {
    /// Gaussian coefficients on modes `|m| ≤ PERTURB_MODES`, each scaled by
    /// `1/√(1+ξ²+ξ⁴)`, then normalized in `H²`.
    RandomH2Ball,
    /// `cos(2π m₀ x / L)`, normalized in `H²`.
    SingleMode { mode: usize },
}

/// Perturbation with `‖p‖_{H²} = delta`, deterministic in `seed`.
pub fn perturbation(
    grid: &FourierGrid,
    kind: Perturbation,
    delta: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = grid.n();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    match kind {
        Perturbation::RandomH2Ball => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let top = PERTURB_MODES.min(n / 3);
            for m in 0..=top {
                let scale = 1.0 / h2_weight(grid.wavenumber(m)).sqrt();
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = if m == 0 {
                    0.0
                } else {
                    StandardNormal.sample(&mut rng)
                };
                coeffs[m] = Complex64::new(re, im) * scale;
                if m > 0 {
                    coeffs[n - m] = coeffs[m].conj();
                }
            }
        }
        Perturbation::SingleMode { mode } => {
            if mode == 0 || mode > n / 3 {
                return domain(format!(
                    "perturbation mode must lie in 1..={}, got {mode}",
                    n / 3
                ));
            }
            coeffs[mode] = Complex64::new(0.5, 0.0);
            coeffs[n - mode] = Complex64::new(0.5, 0.0);
        }
    }
    let norm = h2_norm(grid, &coeffs);
    if delta == 0.0 {
        return Ok(vec![0.0; n]);
    }
    if !(delta > 0.0) {
        return domain(format!("delta must be non-negative, got {delta}"));
    }
    coeffs.iter_mut().for_each(|c| *c *= delta / norm);
    Ok(grid.inverse(&coeffs))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub k: f64,
    #[serde(rename = "L")]
    pub period: f64,
    pub gamma: Gamma,
    pub n: usize,
    pub dt: f64,
    pub delta: f64,
    pub t_max: f64,
    pub perturbation: Perturbation,
    pub seed: u64,
    pub sample_every: usize,
    /// Threshold for the verdict; defaults to `10·delta` (or `1e-5` when
    /// `delta = 0`).
    pub epsilon: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(k: f64, period: f64, delta: f64, t_max: f64) -> Self {
        Self {
            k,
            period,
            gamma: Gamma::Zero,
            n: 256,
            dt: default_dt(period, 256),
            delta,
            t_max,
            perturbation: Perturbation::RandomH2Ball,
            seed: 0,
            sample_every: 100,
            epsilon: None,
        }
    }
}

/// Amplification profile of one perturbed-wave run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub k: f64,
    #[serde(rename = "L")]
    pub period: f64,
    pub gamma: Gamma,
    pub delta: f64,
    pub rho_initial: f64,
    pub rho_max: f64,
    pub amplification: Option<f64>,
    pub epsilon: f64,
    pub t_final: f64,
    pub verdict: bool,
    pub f_drift: f64,
    pub m_drift: f64,
    pub p_drift: f64,
    pub seed: u64,
    pub perturbation: Perturbation,
}

pub fn stability_experiment(config: &ExperimentConfig) -> Result<(StabilityReport, TimeSeries)> {
    let params = WaveParams::new(config.k, config.period, config.gamma)?;
    let profile = sample_profile(&params, config.n)?;
    let bump = perturbation(
        &profile.grid,
        config.perturbation,
        config.delta,
        config.seed,
    )?;
    let initial: Vec<f64> = profile
        .samples
        .iter()
        .zip(&bump)
        .map(|(p, b)| p + b)
        .collect();
    let (series, state) = evolve(
        &initial,
        &profile,
        config.t_max,
        config.dt,
        config.sample_every,
    )?;
    let rho_max = series.rho_max();
    let epsilon = config.epsilon.unwrap_or(if config.delta > 0.0 {
        10.0 * config.delta
    } else {
        1e-5
    });
    let report = StabilityReport {
        k: config.k,
        period: config.period,
        gamma: config.gamma,
        delta: config.delta,
        rho_initial: series.rho[0],
        rho_max,
        amplification: (config.delta > 0.0).then(|| rho_max / config.delta),
        epsilon,
        t_final: state.t,
        verdict: rho_max < epsilon,
        f_drift: series.f_drift(),
        m_drift: series.m_drift(),
        p_drift: series.p_drift(),
        seed: config.seed,
        perturbation: config.perturbation,
    };
    Ok((report, series))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PI: f64 = 2.0 * PI;

    fn wave(k: f64, n: usize) -> WaveProfile {
        sample_profile(&WaveParams::new(k, TWO_PI, Gamma::Zero).unwrap(), n).unwrap()
    }

    #[test]
    fn constant_norm() {
        let grid = FourierGrid::new(64, 3.0);
        let c = -1.7;
        assert!((h2_norm_of(&grid, &vec![c; 64]) - c.abs() * 3f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn norm_matches_quadrature() {
        let grid = FourierGrid::new(64, TWO_PI);
        let x = grid.points();
        let u: Vec<f64> = x.iter().map(|x| x.cos()).collect();
        let density: Vec<f64> = x
            .iter()
            .map(|x| x.cos().powi(2) + x.sin().powi(2) + x.cos().powi(2))
            .collect();
        let quad = grid.integrate(&density).sqrt();
        assert!((h2_norm_of(&grid, &u) - quad).abs() < 1e-13);
        let f = 0.5 * grid.inner(&u, &u);
        assert!(
            (weighted_norm(&grid, &grid.forward(&u), [1.0, 0.0, 0.0]) - (2.0 * f).sqrt()).abs()
                < 1e-13
        );
    }

    #[test]
    fn constant_state_is_stationary() {
        let mut state = EvolutionState::from_grid(&vec![0.8; 64], TWO_PI, Gamma::One).unwrap();
        let before = state.u_hat.clone();
        let mut stepper = Etdrk4::new(64, TWO_PI, Gamma::One, 0.05).unwrap();
        for _ in 0..10 {
            stepper.step(&mut state).unwrap();
        }
        for (a, b) in state.u_hat.iter().zip(&before) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn orbit_distance_of_members() {
        let prof = wave(0.5, 128);
        let state = EvolutionState::from_grid(&prof.samples, TWO_PI, Gamma::Zero).unwrap();
        assert!(orbit_distance_rho(&state, &prof).unwrap() < 1e-10);
        let moved = state.translated(0.3);
        let fit = OrbitReference::new(&prof).distance(&moved.u_hat).unwrap();
        assert!(fit.rho < 1e-8, "{}", fit.rho);
        assert!((fit.shift - 0.3).abs() < 1e-9);
    }

    #[test]
    fn orbit_distance_upper_bound() {
        let prof = wave(0.5, 128);
        let bump = perturbation(&prof.grid, Perturbation::SingleMode { mode: 1 }, 1e-2, 0).unwrap();
        let u: Vec<f64> = prof.samples.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let state = EvolutionState::from_grid(&u, TWO_PI, Gamma::Zero).unwrap();
        let rho = orbit_distance_rho(&state, &prof).unwrap();
        assert!(rho <= 1e-2 * (1.0 + 1e-12));
    }

    #[test]
    fn linear_part_is_reversible() {
        let prof = wave(0.7, 128);
        let mut state = EvolutionState::from_grid(&prof.samples, TWO_PI, Gamma::One).unwrap();
        let start = state.u_hat.clone();
        linear_propagate(&mut state, 1e-3);
        linear_propagate(&mut state, -1e-3);
        let err = state
            .u_hat
            .iter()
            .zip(&start)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn perturbation_norm_and_determinism() {
        let grid = FourierGrid::new(128, TWO_PI);
        let a = perturbation(&grid, Perturbation::RandomH2Ball, 1e-3, 7).unwrap();
        let b = perturbation(&grid, Perturbation::RandomH2Ball, 1e-3, 7).unwrap();
        let c = perturbation(&grid, Perturbation::RandomH2Ball, 1e-3, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((h2_norm_of(&grid, &a) - 1e-3).abs() < 1e-15);
        assert!(perturbation(&grid, Perturbation::SingleMode { mode: 0 }, 1e-3, 0).is_err());
    }

    #[test]
    fn symmetry_kept_by_step() {
        let prof = wave(0.6, 64);
        let state = EvolutionState::from_grid(&prof.samples, TWO_PI, Gamma::Zero).unwrap();
        let next = step(&state, 1e-3).unwrap();
        assert_eq!(next.symmetry_defect(), 0.0);
        assert!(next.imaginary_defect() < 1e-12);
        assert!(step(&state, -1.0).is_err());
    }
}
