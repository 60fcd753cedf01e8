//! Ensemble post-processing: fidelity, second Rényi entropy, decoherence
//! rate, per-step success probability and the quantities derived from them.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{log_log_slope, LinearFit};
use crate::layout::RegisterLayout;
use crate::noise::{apply_noise, sample_realization, step_unitary, FrequencyGrid, NoiseConfig, NoiseRealization};
use crate::number::{multiplicative_order, success_set, SuccessSet};
use crate::observables::{magnetization_fluct, Scope};
use crate::pauli::Pauli;
use crate::pipeline::{continue_from, run_clean, success_probability, CapturePolicy, CleanRun};
use crate::schedule::{Phase, Schedule};
use crate::state::{BackendKind, PureState};

/// Threshold below which `1 − F` is treated as zero.
pub const FIDELITY_DEGENERACY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Mean of `samples` with the standard error computed from consecutive
    /// blocks of `block` samples, which are treated as single draws.
    pub fn blocked(samples: &[f64], block: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let block = block.max(1);
        let means: Vec<f64> =
            samples.chunks(block).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let b = means.len();
        let stderr = if b < 2 {
            0.0
        } else {
            let m = means.iter().sum::<f64>() / b as f64;
            let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
            (var / b as f64).sqrt()
        };
        Ok(Self { mean, stderr })
    }

    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        Self::blocked(samples, 1)
    }
}

fn fidelity_samples(reference: &PureState, perturbed: &[PureState]) -> Result<Vec<f64>> {
    reference.check_normalized()?;
    perturbed
        .iter()
        .map(|p| reference.inner_product(p).map(|z| z.norm_sqr().min(1.0)))
        .collect()
}

/// `F = (1/n_ν) Σ_ν |⟨ψ|ψ′_ν⟩|²`.
pub fn fidelity_ensemble(reference: &PureState, perturbed: &[PureState]) -> Result<Estimate> {
    fidelity_ensemble_blocked(reference, perturbed, 1)
}

pub fn fidelity_ensemble_blocked(reference: &PureState, perturbed: &[PureState], block: usize) -> Result<Estimate> {
    if perturbed.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    Estimate::blocked(&fidelity_samples(reference, perturbed)?, block)
}

/// `G_{νμ} = |⟨ψ′_ν|ψ′_μ⟩|²`, symmetric with unit diagonal.
fn overlap_gram(states: &[PureState]) -> Result<Vec<Vec<f64>>> {
    let n = states.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| states[i].inner_product(&states[j]).map(|z| z.norm_sqr()))
        .collect::<Result<_>>()?;
    let mut g = vec![vec![1.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        g[i][j] = v;
        g[j][i] = v;
    }
    Ok(g)
}

fn entropy_of(g: &[Vec<f64>], keep: &[usize]) -> f64 {
    let n = keep.len() as f64;
    let purity: f64 = keep.iter().map(|&i| keep.iter().map(|&j| g[i][j]).sum::<f64>()).sum::<f64>() / (n * n);
    -purity.min(1.0).ln()
}

/// `S = −ln Tr[ρ′²]` with `ρ′ = (1/n_ν) Σ |ψ′_ν⟩⟨ψ′_ν|`, from pairwise overlaps.
pub fn entropy_ensemble(perturbed: &[PureState]) -> Result<Estimate> {
    entropy_ensemble_blocked(perturbed, 1)
}

/// As [`entropy_ensemble`], with a delete-one-block jackknife error.
pub fn entropy_ensemble_blocked(perturbed: &[PureState], block: usize) -> Result<Estimate> {
    if perturbed.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let g = overlap_gram(perturbed)?;
    let all: Vec<usize> = (0..perturbed.len()).collect();
    let mean = entropy_of(&g, &all);
    let blocks: Vec<&[usize]> = all.chunks(block.max(1)).collect();
    let b = blocks.len();
    let stderr = if b < 2 {
        0.0
    } else {
        let loo: Vec<f64> = (0..b)
            .map(|k| {
                let keep: Vec<usize> =
                    blocks.iter().enumerate().filter(|(i, _)| *i != k).flat_map(|(_, c)| c.iter().copied()).collect();
                entropy_of(&g, &keep)
            })
            .collect();
        let m = loo.iter().sum::<f64>() / b as f64;
        ((b - 1) as f64 / b as f64 * loo.iter().map(|x| (x - m).powi(2)).sum::<f64>()).sqrt()
    };
    Ok(Estimate { mean, stderr })
}

/// `Γ = S/(2τ)`.
pub fn gamma_from_entropy(entropy: f64, tau: f64) -> f64 {
    entropy / (2.0 * tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbativePrediction {
    pub fidelity: f64,
    /// `Γ` in units of `1/τ`.
    pub gamma: f64,
}

/// `F = 1 − λ²L² Σ_α C_α ⟨(ΔM_α)²⟩` and `Γ = (1 − F)/τ`, with every
/// component sharing the autocorrelation `c`.
pub fn perturbative_prediction(state: &PureState, lambda: f64, components: &[Pauli], c: f64) -> Result<PerturbativePrediction> {
    let l = state.layout().total_qubits() as f64;
    let mut loss = 0.0;
    for &p in components {
        loss += lambda * lambda * l * l * c * magnetization_fluct(state, p, Scope::All)?;
    }
    Ok(PerturbativePrediction { fidelity: 1.0 - loss, gamma: loss })
}

/// Prediction using the analytic `C(τ = 1)` of the configured grid.
pub fn perturbative_fidelity(state: &PureState, config: &NoiseConfig, grid: &FrequencyGrid) -> Result<PerturbativePrediction> {
    perturbative_prediction(state, config.lambda, &config.components, grid.autocorrelation(1.0))
}

/// `r_m = (T_clean − T_m)/(1 − F_m)`.
pub fn reduction_rate(t_clean: f64, t_m: f64, f_m: f64) -> Result<f64> {
    if f_m >= 1.0 - FIDELITY_DEGENERACY {
        return Err(Error::Degenerate(format!("fidelity {f_m} is indistinguishable from 1")));
    }
    Ok((t_clean - t_m) / (1.0 - f_m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepNoiseReport {
    pub step: usize,
    pub phase: Phase,
    pub lambda: f64,
    pub components: Vec<Pauli>,
    pub samples: usize,
    pub fidelity: Estimate,
    pub entropy: Estimate,
    pub gamma: Estimate,
    pub success: Option<Estimate>,
    /// Undefined when `F_m` is 1 or success was not computed.
    pub reduction_rate: Option<f64>,
    pub predicted: PerturbativePrediction,
}

/// Clean run, success set and noise realizations shared by many reports.
///
/// Realizations are drawn once for all three components; a component's
/// phases do not depend on which others are active, so reports for
/// different steps, couplings and component sets reuse the same draws.
pub struct NoiseScanner {
    layout: RegisterLayout,
    config: NoiseConfig,
    grid: FrequencyGrid,
    clean: CleanRun,
    set: SuccessSet,
    t_clean: f64,
    realizations: Vec<NoiseRealization>,
}

impl NoiseScanner {
    pub fn new(layout: RegisterLayout, config: NoiseConfig) -> Result<Self> {
        Self::with_capture(layout, config, CapturePolicy::All)
    }

    pub fn with_capture(layout: RegisterLayout, config: NoiseConfig, capture: CapturePolicy) -> Result<Self> {
        config.validate()?;
        let clean = run_clean(&layout, BackendKind::Dense, &capture)?;
        let grid = FrequencyGrid::for_steps(clean.schedule.len(), config.omega_high_factor)?;
        let order = multiplicative_order(layout.base(), layout.modulus())?;
        let set = success_set(&layout, order);
        let final_state = clean.final_state().ok_or(Error::MissingStep(clean.schedule.len()));
        let t_clean = match final_state {
            Ok(s) => success_probability(s, &set)?,
            Err(_) => {
                let mut st = PureState::init(layout, BackendKind::Dense)?;
                continue_from(&mut st, &clean.schedule, 0)?;
                success_probability(&st, &set)?
            }
        };
        let all = NoiseConfig { components: Pauli::ALL.to_vec(), ..config.clone() };
        let realizations = (0..config.samples).map(|nu| sample_realization(&all, &grid, nu)).collect();
        Ok(Self { layout, config, grid, clean, set, t_clean, realizations })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn config(&self) -> &NoiseConfig {
        &self.config
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn schedule(&self) -> &Schedule {
        &self.clean.schedule
    }

    pub fn t_clean(&self) -> f64 {
        self.t_clean
    }

    pub fn success_set(&self) -> &SuccessSet {
        &self.set
    }

    pub fn clean_state(&self, m: usize) -> Result<&PureState> {
        self.clean.state(m).ok_or(Error::MissingStep(m))
    }

    pub fn realizations(&self) -> &[NoiseRealization] {
        &self.realizations
    }

    fn unitaries(&self, lambda: f64, components: &[Pauli]) -> Result<Vec<crate::unitary::Unitary2>> {
        let cfg = NoiseConfig { lambda, components: components.to_vec(), ..self.config.clone() };
        cfg.validate()?;
        self.realizations.par_iter().map(|r| step_unitary(r, &self.grid, &cfg)).collect()
    }

    /// `ψ′_{m,ν}` for every realization.
    pub fn perturbed_ensemble(&self, m: usize, lambda: f64, components: &[Pauli]) -> Result<Vec<PureState>> {
        let clean = self.clean_state(m)?;
        self.unitaries(lambda, components)?
            .par_iter()
            .map(|u| {
                let mut st = clean.clone();
                apply_noise(&mut st, u)?;
                Ok(st)
            })
            .collect()
    }

    /// Report for noise acting right after step `m`, with the configured coupling.
    pub fn report(&self, m: usize, with_success: bool) -> Result<StepNoiseReport> {
        self.report_with(m, self.config.lambda, &self.config.components, with_success)
    }

    pub fn report_with(&self, m: usize, lambda: f64, components: &[Pauli], with_success: bool) -> Result<StepNoiseReport> {
        let clean = self.clean_state(m)?;
        let block = self.config.block_size();
        let mut ensemble = self.perturbed_ensemble(m, lambda, components)?;
        let fidelity = fidelity_ensemble_blocked(clean, &ensemble, block)?;
        let entropy = entropy_ensemble_blocked(&ensemble, block)?;
        let gamma = Estimate { mean: gamma_from_entropy(entropy.mean, 1.0), stderr: entropy.stderr / 2.0 };
        let predicted =
            perturbative_prediction(clean, lambda, components, self.grid.autocorrelation(1.0))?;
        let (success, reduction) = if with_success {
            let schedule = &self.clean.schedule;
            let set = &self.set;
            let ts: Vec<f64> = ensemble
                .par_iter_mut()
                .map(|st| {
                    continue_from(st, schedule, m)?;
                    st.check_normalized()?;
                    success_probability(st, set)
                })
                .collect::<Result<_>>()?;
            let t = Estimate::blocked(&ts, block)?;
            (Some(t), reduction_rate(self.t_clean, t.mean, fidelity.mean).ok())
        } else {
            (None, None)
        };
        Ok(StepNoiseReport {
            step: m,
            phase: self.clean.schedule.phase_of(m),
            lambda,
            components: components.to_vec(),
            samples: ensemble.len(),
            fidelity,
            entropy,
            gamma,
            success,
            reduction_rate: reduction,
            predicted,
        })
    }

    pub fn scan(&self, steps: &[usize], with_success: bool) -> Result<Vec<StepNoiseReport>> {
        steps.iter().map(|&m| self.report(m, with_success)).collect()
    }
}

/// Full per-step scan for the configured noise; `steps` defaults to `0..=Q`.
pub fn step_noise_scan(layout: &RegisterLayout, config: &NoiseConfig, steps: Option<&[usize]>) -> Result<Vec<StepNoiseReport>> {
    let scanner = NoiseScanner::new(*layout, config.clone())?;
    let all: Vec<usize> = (0..=scanner.schedule().len()).collect();
    scanner.scan(steps.unwrap_or(&all), true)
}

/// Reports for one state over a grid of couplings, one per component.
pub fn state_noise_sweep(scanner: &NoiseScanner, m: usize, lambdas: &[f64], components: &[Pauli]) -> Result<Vec<StepNoiseReport>> {
    let mut out = Vec::with_capacity(lambdas.len() * components.len());
    for &p in components {
        for &lambda in lambdas {
            out.push(scanner.report_with(m, lambda, &[p], true)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinedSuccess {
    /// `T_clean Π_m T_m/T_clean`.
    pub product: f64,
    /// `T/T_clean`.
    pub epsilon: f64,
    /// `T_clean exp(−Σ_m (T_clean − T_m)/T_clean)`.
    pub exponential: f64,
    pub exponential_epsilon: f64,
}

/// Success probability with noise acting in every interval of `required`.
pub fn combined_success_estimate(
    t_clean: f64,
    per_step: &BTreeMap<usize, f64>,
    required: RangeInclusive<usize>,
) -> Result<CombinedSuccess> {
    if !(t_clean > 0.0) {
        return Err(Error::Degenerate(format!("T_clean = {t_clean} must be positive")));
    }
    let mut log_eps = 0.0;
    let mut linear = 0.0;
    for m in required {
        let t = *per_step.get(&m).ok_or(Error::MissingStep(m))?;
        log_eps += (t / t_clean).ln();
        linear += (t_clean - t) / t_clean;
    }
    let epsilon = log_eps.exp();
    let exponential_epsilon = (-linear).exp();
    Ok(CombinedSuccess {
        product: t_clean * epsilon,
        epsilon,
        exponential: t_clean * exponential_epsilon,
        exponential_epsilon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FragilityFit {
    /// `1 + δ` in `Γ ~ K L^{1+δ}`.
    pub exponent: f64,
    pub delta: f64,
    pub fit: LinearFit,
}

pub fn fragility_fit(points: &[(usize, f64)]) -> Result<FragilityFit> {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(l, g)| (l as f64, g)).collect();
    let fit = log_log_slope(&pts)?;
    Ok(FragilityFit { exponent: fit.slope, delta: fit.slope - 1.0, fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocked_estimate() {
        let e = Estimate::blocked(&[1.0, 1.0, 3.0, 3.0], 2).unwrap();
        assert_eq!(e.mean, 2.0);
        assert!((e.stderr - 1.0).abs() < 1e-15);
        assert!(Estimate::blocked(&[], 1).is_err());
    }

    #[test]
    fn reduction_rate_examples() {
        assert_eq!(reduction_rate(0.3, 0.3, 0.9).unwrap(), 0.0);
        assert!((reduction_rate(0.228, 0.114, 0.5).unwrap() - 0.228).abs() < 1e-15);
        assert!(reduction_rate(0.3, 0.2, 1.0).is_err());
    }

    #[test]
    fn combined_success_examples() {
        let t = 0.228;
        let flat: BTreeMap<usize, f64> = (1..=75).map(|m| (m, t)).collect();
        let c = combined_success_estimate(t, &flat, 1..=75).unwrap();
        assert!((c.epsilon - 1.0).abs() < 1e-15 && (c.product - t).abs() < 1e-15);
        let dip: BTreeMap<usize, f64> = (1..=75).map(|m| (m, 0.99 * t)).collect();
        let c = combined_success_estimate(t, &dip, 1..=75).unwrap();
        assert!((c.epsilon - 0.99f64.powi(75)).abs() < 1e-12);
        assert!((c.epsilon - 0.471).abs() < 1e-3);
        assert_eq!(combined_success_estimate(t, &dip, 0..=75), Err(Error::MissingStep(0)));
    }

    #[test]
    fn fragility_examples() {
        let lin = fragility_fit(&[(15, 0.3), (30, 0.6)]).unwrap();
        assert!(lin.delta.abs() < 1e-12);
        let quad = fragility_fit(&[(15, 1.0), (30, 4.0), (45, 9.0)]).unwrap();
        assert!((quad.delta - 1.0).abs() < 1e-12);
        assert!(fragility_fit(&[(15, 1.0)]).is_err());
        assert!(fragility_fit(&[(15, 0.0), (30, 1.0)]).is_err());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_from_entropy(0.0, 1.0), 0.0);
        assert!((gamma_from_entropy(2.0 * (1.0 - 0.99), 1.0) - 0.01).abs() < 1e-15);
    }
}
