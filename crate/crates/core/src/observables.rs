//! Normalized additive operators built from single-site Pauli matrices,
//! their fluctuations, and the size-scaling index `p` read off from them.
//!
//! For `Â = Σ_ℓ w_ℓ σ_α(ℓ)` the fluctuation `⟨ΔÂ†ΔÂ⟩` equals
//! `‖Âψ‖² − |⟨ψ|Âψ⟩|²`, so one pass that forms the auxiliary vector
//! `Âψ` column by column gives both moments. Sites outside R1 can move an R2
//! value out of the stored column set; such targets are enumerated
//! explicitly so the structured backend needs no dense scratch space.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::ops::Add;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::log_log_slope;
use crate::kernel::ordered_sum;
use crate::layout::RegisterLayout;
use crate::pauli::Pauli;
use crate::schedule::{Phase, Schedule};
use crate::state::PureState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    All,
    R1,
    R2,
}

impl Scope {
    pub const ALL: [Scope; 3] = [Scope::All, Scope::R1, Scope::R2];

    pub fn label(self) -> &'static str {
        match self {
            Scope::All => "all",
            Scope::R1 => "r1",
            Scope::R2 => "r2",
        }
    }

    /// Global bit positions of the sites in scope, in site order `ℓ = 1, 2, …`.
    pub fn bits(self, layout: &RegisterLayout) -> std::ops::Range<usize> {
        match self {
            Scope::All => 0..layout.total_qubits(),
            Scope::R1 => 0..layout.l1(),
            Scope::R2 => layout.l1()..layout.total_qubits(),
        }
    }

    pub fn size(self, layout: &RegisterLayout) -> usize {
        self.bits(layout).len()
    }
}

impl std::str::FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "all" => Ok(Scope::All),
            "r1" | "R1" => Ok(Scope::R1),
            "r2" | "R2" => Ok(Scope::R2),
            _ => Err(format!("unknown scope {s:?}")),
        }
    }
}

/// `Â_k = (1/L_s) Σ_{ℓ ∈ scope} σ_α(ℓ) e^{−ikℓ}` with `k = 2π·n/L_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdditiveOperatorSpec {
    pub pauli: Pauli,
    pub scope: Scope,
    wave_index: i64,
}

impl AdditiveOperatorSpec {
    /// The uniform magnetization (`k = 0`).
    pub fn magnetization(pauli: Pauli, scope: Scope) -> Self {
        Self { pauli, scope, wave_index: 0 }
    }

    /// Fourier component with integer wave index `n`, `−L_s/2 < n ≤ L_s/2`.
    pub fn fourier(pauli: Pauli, scope: Scope, wave_index: i64, layout: &RegisterLayout) -> Result<Self> {
        let ls = scope.size(layout) as i64;
        if 2 * wave_index <= -ls || 2 * wave_index > ls {
            return Err(Error::OffGridWaveNumber(2.0 * PI * wave_index as f64 / ls as f64));
        }
        Ok(Self { pauli, scope, wave_index })
    }

    /// Fourier component from a wave number in radians per site; it must lie on
    /// the `2π/L_s` grid.
    pub fn with_wave_number(pauli: Pauli, scope: Scope, k: f64, layout: &RegisterLayout) -> Result<Self> {
        let ls = scope.size(layout) as f64;
        let n = k * ls / (2.0 * PI);
        if (n - n.round()).abs() > 1e-9 {
            return Err(Error::OffGridWaveNumber(k));
        }
        Self::fourier(pauli, scope, n.round() as i64, layout).map_err(|_| Error::OffGridWaveNumber(k))
    }

    pub fn wave_index(&self) -> i64 {
        self.wave_index
    }

    pub fn wave_number(&self, layout: &RegisterLayout) -> f64 {
        2.0 * PI * self.wave_index as f64 / self.scope.size(layout) as f64
    }

    /// `(bit, w_ℓ)` pairs with `w_ℓ = e^{−ikℓ}/L_s`.
    fn site_weights(&self, layout: &RegisterLayout) -> Vec<(usize, C64)> {
        let ls = self.scope.size(layout) as f64;
        let k = self.wave_number(layout);
        self.scope
            .bits(layout)
            .enumerate()
            .map(|(i, bit)| (bit, C64::from_polar(1.0 / ls, -k * (i + 1) as f64)))
            .collect()
    }
}

/// Every uniform magnetization over the three directions and three scopes.
pub fn magnetization_specs() -> Vec<AdditiveOperatorSpec> {
    Pauli::ALL
        .iter()
        .flat_map(|&p| Scope::ALL.iter().map(move |&s| AdditiveOperatorSpec::magnetization(p, s)))
        .collect()
}

#[derive(Clone, Copy, Default)]
struct Moments {
    norm_sqr: f64,
    overlap: C64,
}

impl Add for Moments {
    type Output = Moments;

    fn add(self, o: Moments) -> Moments {
        Moments { norm_sqr: self.norm_sqr + o.norm_sqr, overlap: self.overlap + o.overlap }
    }
}

impl std::iter::Sum for Moments {
    fn sum<I: Iterator<Item = Moments>>(iter: I) -> Moments {
        iter.fold(Moments::default(), Add::add)
    }
}

/// `(⟨ψ|Âψ⟩, ‖Âψ‖²)` for `Â = Σ w_ℓ σ_α(ℓ)`.
fn operator_moments(state: &PureState, pauli: Pauli, weights: &[(usize, C64)]) -> (C64, f64) {
    let layout = state.layout();
    let l1 = layout.l1();
    let d1 = layout.r1_dim();
    let r1: Vec<(usize, C64)> = weights.iter().filter(|(b, _)| *b < l1).copied().collect();
    let r2: Vec<(usize, C64)> =
        weights.iter().filter(|(b, _)| *b >= l1).map(|&(b, w)| (b - l1, w)).collect();
    let r1_flip: usize = if pauli.flips() { 1 } else { 0 };

    let mut targets = BTreeSet::new();
    for j in 0..state.column_count() {
        let s = state.column_value(j);
        targets.insert(s);
        if pauli.flips() {
            targets.extend(r2.iter().map(|&(k, _)| s ^ (1u64 << k)));
        }
    }

    let mut total = Moments::default();
    for t in targets {
        let own = state.column_position(t);
        // R2 terms: (coefficient, source column)
        let r2_terms: Vec<(C64, usize)> = r2
            .iter()
            .filter_map(|&(k, w)| {
                let coef = w * pauli.element((t >> k) & 1 == 1);
                let src = if pauli.flips() { t ^ (1u64 << k) } else { t };
                state.column_position(src).map(|j| (coef, j))
            })
            .collect();
        if own.is_none() && r2_terms.is_empty() {
            continue;
        }
        let own_col = own.map(|j| state.column(j));
        let r2_cols: Vec<(C64, &[C64])> = r2_terms.iter().map(|&(c, j)| (c, state.column(j))).collect();
        let m = ordered_sum(d1, |a| {
            let mut v = C64::new(0.0, 0.0);
            if let Some(col) = own_col {
                for &(bit, w) in &r1 {
                    let src = a ^ (r1_flip << bit);
                    v += w * pauli.element((a >> bit) & 1 == 1) * col[src];
                }
            }
            for &(c, col) in &r2_cols {
                v += c * col[a];
            }
            Moments {
                norm_sqr: v.norm_sqr(),
                overlap: own_col.map_or(C64::new(0.0, 0.0), |col| col[a].conj() * v),
            }
        });
        total = total + m;
    }
    (total.overlap, total.norm_sqr)
}

/// Expectation value `⟨ψ|Â|ψ⟩`.
pub fn expectation(state: &PureState, spec: &AdditiveOperatorSpec) -> C64 {
    operator_moments(state, spec.pauli, &spec.site_weights(state.layout())).0
}

/// `⟨ψ|ΔÂ†ΔÂ|ψ⟩` for any spec, including `k ≠ 0`.
pub fn fluctuation(state: &PureState, spec: &AdditiveOperatorSpec) -> Result<f64> {
    state.check_normalized()?;
    let (mean, second) = operator_moments(state, spec.pauli, &spec.site_weights(state.layout()));
    Ok((second - mean.norm_sqr()).max(0.0))
}

/// `⟨(ΔM_α)²⟩` of the uniform magnetization over `scope`.
pub fn magnetization_fluct(state: &PureState, pauli: Pauli, scope: Scope) -> Result<f64> {
    fluctuation(state, &AdditiveOperatorSpec::magnetization(pauli, scope))
}

/// `W_α = ⟨(ΔM_α^{(1)})²⟩ / ⟨(ΔM_α)²⟩`.
pub fn w_ratio(state: &PureState, pauli: Pauli) -> Result<f64> {
    let total = magnetization_fluct(state, pauli, Scope::All)?;
    if total <= 1e-14 {
        return Err(Error::Degenerate(format!("⟨(ΔM_{pauli})²⟩ = {total:e} vanishes")));
    }
    Ok(magnetization_fluct(state, pauli, Scope::R1)? / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationRecord {
    pub step: usize,
    pub phase: Phase,
    pub spec: AdditiveOperatorSpec,
    pub value: f64,
}

/// One record per captured step and spec, ordered by step then by spec.
pub fn trace_fluctuations(
    states: &BTreeMap<usize, PureState>,
    schedule: &Schedule,
    specs: &[AdditiveOperatorSpec],
) -> Result<Vec<FluctuationRecord>> {
    let mut out = Vec::with_capacity(states.len() * specs.len());
    for (&step, st) in states {
        for spec in specs {
            out.push(FluctuationRecord {
                step,
                phase: schedule.phase_of(step),
                spec: *spec,
                value: fluctuation(st, spec)?,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    /// Normally fluctuating, `p ≈ 1`.
    Nfs,
    /// Anomalously fluctuating, `p ≈ 2` with an `O(1)` fluctuation.
    Afs,
    Intermediate,
}

impl Classification {
    pub fn label(self) -> &'static str {
        match self {
            Classification::Nfs => "NFS",
            Classification::Afs => "AFS",
            Classification::Intermediate => "intermediate",
        }
    }
}

/// Fitted `p` at or above which a state may be called anomalous.
pub const AFS_MIN_P: f64 = 1.5;
/// Fitted `p` at or below which a state is called normal.
pub const NFS_MAX_P: f64 = 1.2;
/// Smallest fluctuation at the largest size that an AFS must reach.
pub const AFS_MIN_FLUCT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PIndexEstimate {
    /// `(L, ⟨ΔÂ†ΔÂ⟩)` points, sorted by `L`.
    pub points: Vec<(usize, f64)>,
    pub p: f64,
    pub classification: Classification,
}

pub fn classify(p: f64, fluct_at_largest: f64) -> Classification {
    if p >= AFS_MIN_P && fluct_at_largest >= AFS_MIN_FLUCT {
        Classification::Afs
    } else if p <= NFS_MAX_P {
        Classification::Nfs
    } else {
        Classification::Intermediate
    }
}

/// `p = 2 + slope` of `ln⟨ΔÂ²⟩` against `ln L`.
pub fn estimate_p(points: &[(usize, f64)]) -> Result<PIndexEstimate> {
    let mut pts = points.to_vec();
    pts.sort_by_key(|p| p.0);
    if pts.len() < 2 || pts.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Degenerate("need at least two distinct sizes".into()));
    }
    if let Some(&(l, v)) = pts.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::Degenerate(format!("fluctuation {v:e} at L = {l} is not positive")));
    }
    let fit = log_log_slope(&pts.iter().map(|&(l, v)| (l as f64, v)).collect::<Vec<_>>())?;
    let p = 2.0 + fit.slope;
    let largest = pts.last().map(|p| p.1).unwrap_or(0.0);
    Ok(PIndexEstimate { classification: classify(p, largest), points: pts, p })
}

/// Fluctuations at or below this are treated as exactly zero.
pub const VANISHING_FLUCT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesVerdict {
    pub points: Vec<(usize, f64)>,
    /// `None` when some size has a vanishing fluctuation.
    pub p: Option<f64>,
    pub classification: Classification,
}

/// Like [`estimate_p`], but tolerates exact zeros. A series that vanishes
/// at its largest size is normal; one that vanishes only at smaller sizes
/// cannot be fitted and is intermediate. Neither gets an index.
pub fn classify_series(points: &[(usize, f64)]) -> Result<SeriesVerdict> {
    let mut pts = points.to_vec();
    pts.sort_by_key(|p| p.0);
    if let Some(&(_, last)) = pts.last() {
        if pts.iter().any(|p| p.1.abs() <= VANISHING_FLUCT) {
            let classification =
                if last.abs() <= VANISHING_FLUCT { Classification::Nfs } else { Classification::Intermediate };
            return Ok(SeriesVerdict { points: pts, p: None, classification });
        }
    }
    let e = estimate_p(&pts)?;
    Ok(SeriesVerdict { points: e.points, p: Some(e.p), classification: e.classification })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::BackendKind;

    #[test]
    fn product_state_values() {
        let layout = RegisterLayout::new(21, 2).unwrap();
        let init = PureState::init(layout, BackendKind::Dense).unwrap();
        assert!(magnetization_fluct(&init, Pauli::Z, Scope::All).unwrap() < 1e-15);
        let fx = magnetization_fluct(&init, Pauli::X, Scope::All).unwrap();
        assert!((fx - 1.0 / 15.0).abs() < 1e-14);
        let fy = magnetization_fluct(&init, Pauli::Y, Scope::R1).unwrap();
        assert!((fy - 0.1).abs() < 1e-14);
    }

    #[test]
    fn off_grid_wave_numbers() {
        let layout = RegisterLayout::new(21, 2).unwrap();
        assert!(AdditiveOperatorSpec::with_wave_number(Pauli::Z, Scope::All, 0.1, &layout).is_err());
        let k = 2.0 * PI * 3.0 / 15.0;
        let s = AdditiveOperatorSpec::with_wave_number(Pauli::Z, Scope::All, k, &layout).unwrap();
        assert_eq!(s.wave_index(), 3);
        // n must satisfy −L/2 < n ≤ L/2
        assert!(AdditiveOperatorSpec::fourier(Pauli::Z, Scope::R1, 5, &layout).is_ok());
        assert!(AdditiveOperatorSpec::fourier(Pauli::Z, Scope::R1, -5, &layout).is_err());
        assert!(AdditiveOperatorSpec::fourier(Pauli::Z, Scope::R1, 6, &layout).is_err());
    }

    #[test]
    fn p_index_examples() {
        let e = estimate_p(&[(8, 1.0), (16, 1.0)]).unwrap();
        assert!((e.p - 2.0).abs() < 1e-12);
        assert_eq!(e.classification, Classification::Afs);
        let e = estimate_p(&[(8, 1.0 / 8.0), (16, 1.0 / 16.0)]).unwrap();
        assert!((e.p - 1.0).abs() < 1e-12);
        assert_eq!(e.classification, Classification::Nfs);
        let e = estimate_p(&[(15, 0.460), (30, 0.477)]).unwrap();
        assert!((e.p - (2.0 + (0.477f64 / 0.460).log2())).abs() < 1e-12);
        assert!((e.p - 2.05).abs() < 0.01);
        assert_eq!(e.classification, Classification::Afs);
        assert!(estimate_p(&[(8, 1.0)]).is_err());
        assert!(estimate_p(&[(8, 1.0), (8, 0.5)]).is_err());
        assert!(estimate_p(&[(8, 0.0), (16, 0.5)]).is_err());
    }

    #[test]
    fn vanishing_series() {
        let v = classify_series(&[(15, 0.0), (30, 1e-16)]).unwrap();
        assert_eq!((v.p, v.classification), (None, Classification::Nfs));
        let v = classify_series(&[(15, 0.3), (30, 0.0)]).unwrap();
        assert_eq!((v.p, v.classification), (None, Classification::Nfs));
        let v = classify_series(&[(15, 0.0), (30, 0.2)]).unwrap();
        assert_eq!((v.p, v.classification), (None, Classification::Intermediate));
    }

    #[test]
    fn small_but_constant_fluctuations_are_not_afs() {
        assert_eq!(classify(2.0, 0.05), Classification::Intermediate);
        assert_eq!(classify(1.3, 0.5), Classification::Intermediate);
    }
}
