use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::gates::GateStep;
use crate::layout::RegisterLayout;
use crate::number::pow_mod;

/// Which part of the algorithm produced the state after step `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Initial,
    Hadamard,
    ModularExponentiation,
    Fourier,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Initial => "init",
            Phase::Hadamard => "hadamard",
            Phase::ModularExponentiation => "modexp",
            Phase::Fourier => "dft",
        }
    }
}

/// The `Q = 2·L1 + L1(L1+1)/2` steps taking `ψ_init` to `ψ_final`.
///
/// Steps `1..=L1` are Hadamards, `L1+1..=2·L1` are the controlled
/// multipliers `x^{2^{ℓ−1}}`, and the rest is the Fourier transform written as
/// `QftHadamard(j)` followed by `ControlledPhase(j', j)` for `j' = j−1 … 1`,
/// for `j = L1 … 1`. There is no final swap network, so the output is read in
/// bit-reversed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    steps: Vec<GateStep>,
    l1: usize,
}

impl Schedule {
    pub fn build(layout: &RegisterLayout) -> Self {
        let l1 = layout.l1();
        let n = layout.modulus();
        let mut steps = Vec::with_capacity(2 * l1 + l1 * (l1 + 1) / 2);
        steps.extend((1..=l1).map(|target| GateStep::Hadamard { target }));
        steps.extend((1..=l1).map(|control| GateStep::ControlledModMul {
            control,
            multiplier: pow_mod(layout.base(), 1u64 << (control - 1), n),
        }));
        for j in (1..=l1).rev() {
            steps.push(GateStep::QftHadamard { target: j });
            for jp in (1..j).rev() {
                steps.push(GateStep::ControlledPhase {
                    control: jp,
                    target: j,
                    angle: PI / (1u64 << (j - jp)) as f64,
                });
            }
        }
        Self { steps, l1 }
    }

    /// Total step count `Q`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[GateStep] {
        &self.steps
    }

    /// The gate executed at step `m` (1-based).
    pub fn step(&self, m: usize) -> Option<&GateStep> {
        m.checked_sub(1).and_then(|i| self.steps.get(i))
    }

    pub fn hadamard_end(&self) -> usize {
        self.l1
    }

    pub fn modexp_end(&self) -> usize {
        2 * self.l1
    }

    pub fn dft_end(&self) -> usize {
        self.steps.len()
    }

    /// Phase that the state after step `m` belongs to.
    pub fn phase_of(&self, m: usize) -> Phase {
        if m == 0 {
            Phase::Initial
        } else if m <= self.hadamard_end() {
            Phase::Hadamard
        } else if m <= self.modexp_end() {
            Phase::ModularExponentiation
        } else {
            Phase::Fourier
        }
    }

    /// `0, L1, 2·L1, Q`.
    pub fn boundaries(&self) -> [usize; 4] {
        [0, self.hadamard_end(), self.modexp_end(), self.dft_end()]
    }
}
