//! Size comparisons of the four landmark states of a run.

use serde::{Deserialize, Serialize};

use crate::decoherence::{fragility_fit, FragilityFit};
use crate::error::Result;
use crate::layout::RegisterLayout;
use crate::observables::{classify_series, fluctuation, AdditiveOperatorSpec, Scope, SeriesVerdict};
use crate::pauli::Pauli;
use crate::pipeline::{run_clean, CapturePolicy};
use crate::schedule::Schedule;
use crate::state::BackendKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Landmark {
    Init,
    Hadamard,
    ModExp,
    Final,
}

impl Landmark {
    pub const ALL: [Landmark; 4] = [Landmark::Init, Landmark::Hadamard, Landmark::ModExp, Landmark::Final];

    pub fn label(self) -> &'static str {
        match self {
            Landmark::Init => "init",
            Landmark::Hadamard => "ht",
            Landmark::ModExp => "me",
            Landmark::Final => "final",
        }
    }

    pub fn step(self, schedule: &Schedule) -> usize {
        schedule.boundaries()[self as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub total_qubits: usize,
    pub landmark: Landmark,
    pub spec: AdditiveOperatorSpec,
    pub fluct: f64,
}

/// Fluctuations of every spec at the four landmark states of one layout.
pub fn landmark_fluctuations(
    layout: &RegisterLayout,
    backend: BackendKind,
    specs: &[AdditiveOperatorSpec],
) -> Result<Vec<ScalingPoint>> {
    let run = run_clean(layout, backend, &CapturePolicy::PhaseBoundaries)?;
    let mut out = Vec::with_capacity(4 * specs.len());
    for lm in Landmark::ALL {
        let st = run.state(lm.step(&run.schedule)).expect("boundary state captured");
        for spec in specs {
            out.push(ScalingPoint {
                total_qubits: layout.total_qubits(),
                landmark: lm,
                spec: *spec,
                fluct: fluctuation(st, spec)?,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingVerdict {
    pub landmark: Landmark,
    pub spec: AdditiveOperatorSpec,
    pub verdict: SeriesVerdict,
}

/// Groups points by `(landmark, spec)` in first-seen order and classifies each series.
pub fn scaling_verdicts(points: &[ScalingPoint]) -> Result<Vec<ScalingVerdict>> {
    let mut keys: Vec<(Landmark, AdditiveOperatorSpec)> = Vec::new();
    for p in points {
        if !keys.contains(&(p.landmark, p.spec)) {
            keys.push((p.landmark, p.spec));
        }
    }
    keys.into_iter()
        .map(|(landmark, spec)| {
            let series: Vec<(usize, f64)> = points
                .iter()
                .filter(|p| p.landmark == landmark && p.spec == spec)
                .map(|p| (p.total_qubits, p.fluct))
                .collect();
            Ok(ScalingVerdict { landmark, spec, verdict: classify_series(&series)? })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragilityRow {
    pub landmark: Landmark,
    pub pauli: Pauli,
    /// `(L, Γ)` from the perturbative formula.
    pub points: Vec<(usize, f64)>,
    /// `None` with fewer than two sizes or when `Γ` vanishes at some size.
    pub fit: Option<FragilityFit>,
}

/// Perturbative `Γ = λ²L²C⟨(ΔM_α)²⟩` per landmark and component, fitted
/// against `L` with one autocorrelation `c` shared by every size.
pub fn perturbative_fragility(points: &[ScalingPoint], lambda: f64, c: f64) -> Result<Vec<FragilityRow>> {
    let mut out = Vec::new();
    for lm in Landmark::ALL {
        for p in Pauli::ALL {
            let spec = AdditiveOperatorSpec::magnetization(p, Scope::All);
            let series: Vec<(usize, f64)> = points
                .iter()
                .filter(|q| q.landmark == lm && q.spec == spec)
                .map(|q| {
                    let l = q.total_qubits as f64;
                    (q.total_qubits, lambda * lambda * l * l * c * q.fluct)
                })
                .collect();
            if series.is_empty() {
                continue;
            }
            let fit = if series.len() >= 2 && series.iter().all(|s| s.1 > 0.0) { Some(fragility_fit(&series)?) } else { None };
            out.push(FragilityRow { landmark: lm, pauli: p, points: series, fit });
        }
    }
    Ok(out)
}
