//! Classical `1/f` noise coupled uniformly to every qubit.
//!
//! Internal units: `ħ = τ = 1`. The noise enters as
//! `H_int(t) = λ Σ_α f_α(t) Σ_ℓ σ_α(ℓ)`, acting during one step interval of
//! length `τ`, so every qubit receives the same 2×2 unitary.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{apply_single, diagonal_all};
use crate::pauli::Pauli;
use crate::state::{Amplitudes, PureState};
use crate::unitary::Unitary2;

pub const DEFAULT_OMEGA_HIGH_FACTOR: f64 = 4.1;
pub const DEFAULT_SUBSTEPS: usize = 8192;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Coupling strength in units of `ħ/τ`.
    pub lambda: f64,
    pub components: Vec<Pauli>,
    /// `ω_high = factor · 2π/τ`.
    pub omega_high_factor: f64,
    /// Ensemble size `n_ν`.
    pub samples: usize,
    pub seed: u64,
    /// Pair realization `2k+1` with `2k` by shifting every phase by `π`.
    pub antithetic: bool,
    /// Substeps per interval when several non-commuting components are active.
    pub substeps: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0015,
            components: vec![Pauli::X],
            omega_high_factor: DEFAULT_OMEGA_HIGH_FACTOR,
            samples: 40,
            seed: 1,
            antithetic: true,
            substeps: DEFAULT_SUBSTEPS,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidNoiseConfig(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be finite and non-negative, got {}", self.lambda));
        }
        if self.samples == 0 {
            return bad("at least one realization is required".into());
        }
        if self.antithetic && !self.samples.is_multiple_of(2) {
            return bad(format!("antithetic sampling needs an even ensemble, got {}", self.samples));
        }
        if !(self.omega_high_factor > 0.0 && self.omega_high_factor.is_finite()) {
            return bad(format!("omega_high_factor must be positive, got {}", self.omega_high_factor));
        }
        if self.substeps == 0 {
            return bad("substeps must be positive".into());
        }
        let mut seen = [false; 3];
        for p in &self.components {
            if std::mem::replace(&mut seen[p.index()], true) {
                return bad(format!("component {p} listed twice"));
            }
        }
        Ok(())
    }

    pub fn is_active(&self, p: Pauli) -> bool {
        self.components.contains(&p)
    }

    /// Realizations that share one underlying draw.
    pub fn block_size(&self) -> usize {
        if self.antithetic {
            2
        } else {
            1
        }
    }
}

/// `ω_j = j·Δω` for `j = 1 ..= n`, with `Δω = 2π/τ_total`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    delta: f64,
    count: usize,
}

impl FrequencyGrid {
    pub fn new(tau_total: f64, omega_high_factor: f64) -> Result<Self> {
        if !(tau_total > 0.0) {
            return Err(Error::EmptyFrequencyGrid);
        }
        let delta = 2.0 * PI / tau_total;
        let omega_high = omega_high_factor * 2.0 * PI;
        let count = (omega_high / delta + 1e-9).floor();
        if !(count >= 1.0) {
            return Err(Error::EmptyFrequencyGrid);
        }
        Ok(Self { delta, count: count as usize })
    }

    /// Grid for a run of `q` steps: `τ_total = (q + 1)τ`.
    pub fn for_steps(q: usize, omega_high_factor: f64) -> Result<Self> {
        Self::new((q + 1) as f64, omega_high_factor)
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn omegas(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.count).map(move |j| j as f64 * self.delta)
    }

    /// Spectral amplitude `(ωτ)^{−1/2}`.
    pub fn amplitude(omega: f64) -> f64 {
        omega.powf(-0.5)
    }

    /// `C(τ) = Σ_ω (1/ωτ)(1 − cos ωτ)/ω²`, the ensemble mean of `Φ²`.
    pub fn autocorrelation(&self, tau: f64) -> f64 {
        self.omegas().map(|w| (1.0 - (w * tau).cos()) / (w * tau * w * w)).sum()
    }
}

/// One sample of the noise field: a phase per grid frequency per active component.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    pub index: usize,
    phases: [Option<Vec<f64>>; 3],
}

impl NoiseRealization {
    /// A realization with explicit phase tables; each must match the grid length.
    pub fn from_phases(index: usize, grid: &FrequencyGrid, tables: Vec<(Pauli, Vec<f64>)>) -> Result<Self> {
        let mut phases: [Option<Vec<f64>>; 3] = [None, None, None];
        for (p, th) in tables {
            if th.len() != grid.len() {
                return Err(Error::InvalidNoiseConfig(format!(
                    "phase table for {p} has {} entries, grid has {}",
                    th.len(),
                    grid.len()
                )));
            }
            phases[p.index()] = Some(th);
        }
        Ok(Self { index, phases })
    }

    pub fn phases(&self, p: Pauli) -> Option<&[f64]> {
        self.phases[p.index()].as_deref()
    }

    fn active_phases(&self, p: Pauli) -> Result<&[f64]> {
        self.phases(p).ok_or(Error::InactiveComponent(p.symbol()))
    }

    /// `f_α(t) = Σ_ω (ωτ)^{−1/2} cos(ωt + θ_α(ω))`.
    pub fn signal(&self, grid: &FrequencyGrid, p: Pauli, t: f64) -> Result<f64> {
        let th = self.active_phases(p)?;
        Ok(grid.omegas().zip(th).map(|(w, &t0)| FrequencyGrid::amplitude(w) * (w * t + t0).cos()).sum())
    }

    /// `∫_{t0}^{t1} f_α(t) dt`, per frequency in closed form.
    pub fn integral_between(&self, grid: &FrequencyGrid, p: Pauli, t0: f64, t1: f64) -> Result<f64> {
        let th = self.active_phases(p)?;
        Ok(grid
            .omegas()
            .zip(th)
            .map(|(w, &t)| FrequencyGrid::amplitude(w) * ((w * t1 + t).sin() - (w * t0 + t).sin()) / w)
            .sum())
    }
}

/// `θ ∈ (−π, π]` from the stream keyed by `(seed, unit, component)`.
fn draw_phases(seed: u64, unit: u64, p: Pauli, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((unit << 2) | p.index() as u64);
    (0..n).map(|_| PI - 2.0 * PI * rng.random::<f64>()).collect()
}

fn shift_by_pi(theta: f64) -> f64 {
    let t = theta + PI;
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

pub fn sample_realization(config: &NoiseConfig, grid: &FrequencyGrid, index: usize) -> NoiseRealization {
    let (unit, mirrored) =
        if config.antithetic { (index / 2, index % 2 == 1) } else { (index, false) };
    let mut phases: [Option<Vec<f64>>; 3] = [None, None, None];
    for &p in &config.components {
        let mut th = draw_phases(config.seed, unit as u64, p, grid.len());
        if mirrored {
            th.iter_mut().for_each(|t| *t = shift_by_pi(*t));
        }
        phases[p.index()] = Some(th);
    }
    NoiseRealization { index, phases }
}

/// `Φ_α = ∫_0^τ f_α(t) dt`.
pub fn noise_integral(realization: &NoiseRealization, grid: &FrequencyGrid, p: Pauli, tau: f64) -> Result<f64> {
    realization.integral_between(grid, p, 0.0, tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Autocorrelation {
    pub analytic: f64,
    pub monte_carlo: f64,
    pub stderr: f64,
}

/// `C_α(τ)` from the grid sum and from the sample mean of `Φ_α²`.
/// With no active component both are zero.
pub fn autocorrelation(config: &NoiseConfig, grid: &FrequencyGrid, tau: f64) -> Result<Autocorrelation> {
    config.validate()?;
    let Some(&p) = config.components.first() else {
        return Ok(Autocorrelation { analytic: 0.0, monte_carlo: 0.0, stderr: 0.0 });
    };
    let squares: Vec<f64> = (0..config.samples)
        .map(|nu| noise_integral(&sample_realization(config, grid, nu), grid, p, tau).map(|x| x * x))
        .collect::<Result<_>>()?;
    let est = crate::decoherence::Estimate::blocked(&squares, config.block_size())?;
    Ok(Autocorrelation { analytic: grid.autocorrelation(tau), monte_carlo: est.mean, stderr: est.stderr })
}

/// Field integrals of every active component over `n` equal substeps of
/// `[0, τ]`, via a rotating phasor per frequency.
fn substep_integrals(r: &NoiseRealization, grid: &FrequencyGrid, tau: f64, n: usize) -> [Vec<f64>; 3] {
    let dt = tau / n as f64;
    let mut out: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for p in Pauli::ALL {
        let Some(th) = r.phases(p) else { continue };
        let mut acc = vec![0.0; n];
        for (w, &t0) in grid.omegas().zip(th) {
            let c = FrequencyGrid::amplitude(w) / w;
            let rot = C64::from_polar(1.0, w * dt);
            let mut z = C64::from_polar(1.0, t0);
            let mut prev = z.im;
            for (k, slot) in acc.iter_mut().enumerate() {
                // renormalize occasionally against drift of the recurrence
                z = if k % 64 == 63 { C64::from_polar(1.0, w * dt * (k + 1) as f64 + t0) } else { z * rot };
                *slot += c * (z.im - prev);
                prev = z.im;
            }
        }
        out[p.index()] = acc;
    }
    out
}

/// Time-ordered product of per-substep exponentials `exp(−iλ Φ_k·σ)`.
pub fn substep_unitary(r: &NoiseRealization, grid: &FrequencyGrid, lambda: f64, tau: f64, n: usize) -> Unitary2 {
    let phi = substep_integrals(r, grid, tau, n);
    let mut u = Unitary2::identity();
    for k in 0..n {
        let v = [0, 1, 2].map(|a| phi[a].get(k).map_or(0.0, |x| lambda * x));
        u = Unitary2::exp_pauli(v) * u;
    }
    u
}

/// The one-step unitary on each qubit. Exact for a single component.
pub fn step_unitary(r: &NoiseRealization, grid: &FrequencyGrid, config: &NoiseConfig) -> Result<Unitary2> {
    let tau = 1.0;
    match config.components.as_slice() {
        [] => Ok(Unitary2::identity()),
        _ if config.lambda == 0.0 => Ok(Unitary2::identity()),
        [p] => {
            let mut n = [0.0; 3];
            n[p.index()] = config.lambda * noise_integral(r, grid, *p, tau)?;
            Ok(Unitary2::exp_pauli(n))
        }
        _ => Ok(substep_unitary(r, grid, config.lambda, tau, config.substeps)),
    }
}

/// `‖U(n) − U(n/2)‖` for the configured substep count.
pub fn substep_convergence(r: &NoiseRealization, grid: &FrequencyGrid, config: &NoiseConfig) -> f64 {
    let n = config.substeps.max(2);
    let fine = substep_unitary(r, grid, config.lambda, 1.0, n);
    let coarse = substep_unitary(r, grid, config.lambda, 1.0, n / 2);
    fine.distance(&coarse)
}

/// Applies `U` to every qubit of both registers.
pub fn apply_noise(state: &mut PureState, u: &Unitary2) -> Result<()> {
    let layout = *state.layout();
    match &mut state.amps {
        Amplitudes::Dense(v) => {
            if u.is_diagonal() {
                diagonal_all(v, layout.total_qubits(), u.0[0][0], u.0[1][1]);
            } else {
                for bit in 0..layout.total_qubits() {
                    apply_single(v, bit, u);
                }
            }
            Ok(())
        }
        Amplitudes::Structured { table, columns } => {
            if !u.is_diagonal() {
                return Err(Error::Unsupported(
                    "bit-flip noise can leave the group table; use the dense backend".into(),
                ));
            }
            let (d0, d1) = (u.0[0][0], u.0[1][1]);
            let (l1, l2) = (layout.l1(), layout.l2());
            let d = layout.r1_dim();
            for (j, &s) in table.elements().iter().enumerate() {
                let ones = s.count_ones() as i32;
                let r2 = d0.powi(l2 as i32 - ones) * d1.powi(ones);
                let col = &mut columns[j * d..(j + 1) * d];
                diagonal_all(col, l1, d0, d1);
                col.iter_mut().for_each(|a| *a *= r2);
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid75() -> FrequencyGrid {
        FrequencyGrid::for_steps(75, DEFAULT_OMEGA_HIGH_FACTOR).unwrap()
    }

    #[test]
    fn grid_size_and_cutoff() {
        assert_eq!(grid75().len(), 311);
        assert!(FrequencyGrid::new(0.1, 4.1).is_err());
        assert_eq!(FrequencyGrid::new(1.0, 4.1).unwrap().len(), 4);
    }

    #[test]
    fn antithetic_partner_negates_integral() {
        let g = grid75();
        let cfg = NoiseConfig { components: vec![Pauli::Z], ..Default::default() };
        let a = noise_integral(&sample_realization(&cfg, &g, 6), &g, Pauli::Z, 1.0).unwrap();
        let b = noise_integral(&sample_realization(&cfg, &g, 7), &g, Pauli::Z, 1.0).unwrap();
        assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn inactive_component_is_an_error() {
        let g = grid75();
        let cfg = NoiseConfig { components: vec![Pauli::Z], ..Default::default() };
        let r = sample_realization(&cfg, &g, 0);
        assert_eq!(noise_integral(&r, &g, Pauli::X, 1.0), Err(Error::InactiveComponent('x')));
    }

    #[test]
    fn validation() {
        let ok = NoiseConfig::default();
        assert!(ok.validate().is_ok());
        assert!(NoiseConfig { samples: 3, ..ok.clone() }.validate().is_err());
        assert!(NoiseConfig { samples: 3, antithetic: false, ..ok.clone() }.validate().is_ok());
        assert!(NoiseConfig { lambda: -1.0, ..ok.clone() }.validate().is_err());
        assert!(NoiseConfig { components: vec![Pauli::X, Pauli::X], ..ok }.validate().is_err());
    }
}
