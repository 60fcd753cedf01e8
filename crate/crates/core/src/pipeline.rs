//! Clean (noise-free) evolution through the schedule.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::layout::{bit_reverse, RegisterLayout};
use crate::number::SuccessSet;
use crate::schedule::Schedule;
use crate::state::{BackendKind, PureState};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum CapturePolicy {
    /// Every state `ψ_0 … ψ_Q`.
    #[default]
    All,
    /// `ψ_init`, `ψ_HT`, `ψ_ME` and `ψ_final` only.
    PhaseBoundaries,
    Steps(BTreeSet<usize>),
}

impl CapturePolicy {
    pub fn wants(&self, m: usize, schedule: &Schedule) -> bool {
        match self {
            CapturePolicy::All => true,
            CapturePolicy::PhaseBoundaries => schedule.boundaries().contains(&m),
            CapturePolicy::Steps(set) => set.contains(&m),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CleanRun {
    pub schedule: Schedule,
    pub states: BTreeMap<usize, PureState>,
}

impl CleanRun {
    pub fn state(&self, m: usize) -> Option<&PureState> {
        self.states.get(&m)
    }

    pub fn final_state(&self) -> Option<&PureState> {
        self.states.get(&self.schedule.len())
    }
}

/// Runs the whole schedule, calling `visit(m, ψ_m)` for `m = 0..=Q`, and
/// returns the final state.
pub fn evolve_clean<F>(
    layout: &RegisterLayout,
    backend: BackendKind,
    mut visit: F,
) -> Result<(Schedule, PureState)>
where
    F: FnMut(usize, &PureState) -> Result<()>,
{
    let schedule = Schedule::build(layout);
    let mut state = PureState::init(*layout, backend)?;
    visit(0, &state)?;
    for (i, step) in schedule.steps().iter().enumerate() {
        state.apply_step(step)?;
        visit(i + 1, &state)?;
    }
    Ok((schedule, state))
}

pub fn run_clean(
    layout: &RegisterLayout,
    backend: BackendKind,
    capture: &CapturePolicy,
) -> Result<CleanRun> {
    let schedule = Schedule::build(layout);
    let mut states = BTreeMap::new();
    evolve_clean(layout, backend, |m, st| {
        if capture.wants(m, &schedule) {
            states.insert(m, st.clone());
        }
        Ok(())
    })?;
    Ok(CleanRun { schedule, states })
}

/// Applies steps `after + 1 ..= Q` to a state that sits just after step `after`.
pub fn continue_from(state: &mut PureState, schedule: &Schedule, after: usize) -> Result<()> {
    if after > schedule.len() {
        return Err(Error::ValueOutOfRange { value: after as u64, bound: schedule.len() as u64 + 1 });
    }
    for step in &schedule.steps()[after..] {
        state.apply_step(step)?;
    }
    Ok(())
}

/// `T = Σ_{c̄ ∈ set} P(c)` with `c = bit_reverse(c̄)`.
pub fn success_probability(state: &PureState, set: &SuccessSet) -> Result<f64> {
    let l1 = state.layout().l1();
    let mut t = 0.0;
    for cbar in set.reversed_values() {
        t += state.register1_probability(bit_reverse(cbar, l1)?);
    }
    Ok(t.clamp(0.0, 1.0))
}
