//! Pure states of the two-register machine.
//!
//! Both backends store the state as columns of length `2^{L1}` (one column
//! per R2 value `s`, indexed by the R1 label `a`). The dense backend keeps a
//! column for every `s ∈ 0..2^{L2}`; the structured backend keeps one column
//! per element of the cyclic group `⟨x⟩ ⊂ Z_N^*`, which is the only set of R2
//! values the clean algorithm ever reaches from `|1⟩`.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::ordered_sum;
use crate::layout::RegisterLayout;
use crate::number::mul_mod;

/// Default ceiling on dense amplitudes (2^26, about 1 GiB).
pub const DEFAULT_DENSE_CAP: u64 = 1 << 26;

pub(crate) const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Dense,
    Structured,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dense" => Ok(BackendKind::Dense),
            "structured" => Ok(BackendKind::Structured),
            _ => Err(format!("unknown backend {s:?} (expected dense or structured)")),
        }
    }
}

/// The ordered powers `x^j mod N`, `j = 0..r−1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTable {
    elements: Vec<u64>,
    positions: HashMap<u64, usize>,
}

impl GroupTable {
    pub fn generated_by(base: u64, modulus: u64) -> Result<Self> {
        if crate::number::gcd(base, modulus) != 1 {
            return Err(Error::NotCoprime { a: base, b: modulus });
        }
        let mut elements = vec![1 % modulus];
        let mut v = base % modulus;
        while v != elements[0] {
            elements.push(v);
            v = mul_mod(v, base, modulus);
        }
        let positions = elements.iter().enumerate().map(|(j, &e)| (e, j)).collect();
        Ok(Self { elements, positions })
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn position(&self, s: u64) -> Option<usize> {
        self.positions.get(&s).copied()
    }

    pub fn is_closed_under(&self, multiplier: u64, modulus: u64) -> bool {
        self.elements
            .iter()
            .all(|&e| self.positions.contains_key(&mul_mod(e, multiplier, modulus)))
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Amplitudes {
    Dense(Vec<C64>),
    Structured { table: Arc<GroupTable>, columns: Vec<C64> },
}

/// A normalized pure state of R1 ⊗ R2.
#[derive(Debug, Clone)]
pub struct PureState {
    layout: RegisterLayout,
    pub(crate) amps: Amplitudes,
}

impl PureState {
    /// `|0⟩^{(1)} |1⟩^{(2)}` on the requested backend, with the default dense cap.
    pub fn init(layout: RegisterLayout, backend: BackendKind) -> Result<Self> {
        Self::init_with_cap(layout, backend, DEFAULT_DENSE_CAP)
    }

    pub fn init_with_cap(layout: RegisterLayout, backend: BackendKind, cap: u64) -> Result<Self> {
        let d1 = layout.r1_dim();
        match backend {
            BackendKind::Dense => {
                check_cap(&layout, cap)?;
                let mut v = vec![C64::new(0.0, 0.0); layout.dense_len() as usize];
                v[d1] = C64::new(1.0, 0.0);
                Ok(Self { layout, amps: Amplitudes::Dense(v) })
            }
            BackendKind::Structured => {
                let table = GroupTable::generated_by(layout.base(), layout.modulus())?;
                let mut columns = vec![C64::new(0.0, 0.0); table.order() * d1];
                // column 0 holds s = x^0 = 1
                columns[0] = C64::new(1.0, 0.0);
                Ok(Self { layout, amps: Amplitudes::Structured { table: Arc::new(table), columns } })
            }
        }
    }

    /// Wraps a dense amplitude vector (index `a + 2^{L1}·s`); it must be normalized.
    pub fn from_dense(layout: RegisterLayout, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() as u64 != layout.dense_len() {
            return Err(Error::InvalidLayout(format!(
                "expected {} amplitudes, got {}",
                layout.dense_len(),
                amplitudes.len()
            )));
        }
        let state = Self { layout, amps: Amplitudes::Dense(amplitudes) };
        state.check_normalized()?;
        Ok(state)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn backend(&self) -> BackendKind {
        match self.amps {
            Amplitudes::Dense(_) => BackendKind::Dense,
            Amplitudes::Structured { .. } => BackendKind::Structured,
        }
    }

    pub fn group_table(&self) -> Option<&GroupTable> {
        match &self.amps {
            Amplitudes::Dense(_) => None,
            Amplitudes::Structured { table, .. } => Some(table),
        }
    }

    pub fn dense_amplitudes(&self) -> Option<&[C64]> {
        match &self.amps {
            Amplitudes::Dense(v) => Some(v),
            Amplitudes::Structured { .. } => None,
        }
    }

    fn raw(&self) -> &[C64] {
        match &self.amps {
            Amplitudes::Dense(v) => v,
            Amplitudes::Structured { columns, .. } => columns,
        }
    }

    pub(crate) fn raw_mut(&mut self) -> &mut [C64] {
        match &mut self.amps {
            Amplitudes::Dense(v) => v,
            Amplitudes::Structured { columns, .. } => columns,
        }
    }

    /// Number of stored R2 columns.
    pub(crate) fn column_count(&self) -> usize {
        match &self.amps {
            Amplitudes::Dense(_) => self.layout.r2_dim(),
            Amplitudes::Structured { table, .. } => table.order(),
        }
    }

    /// R2 value held by column `j`.
    pub(crate) fn column_value(&self, j: usize) -> u64 {
        match &self.amps {
            Amplitudes::Dense(_) => j as u64,
            Amplitudes::Structured { table, .. } => table.elements[j],
        }
    }

    /// Column holding R2 value `s`, if the backend stores one.
    pub(crate) fn column_position(&self, s: u64) -> Option<usize> {
        match &self.amps {
            Amplitudes::Dense(_) => ((s as usize) < self.layout.r2_dim()).then_some(s as usize),
            Amplitudes::Structured { table, .. } => table.position(s),
        }
    }

    pub(crate) fn column(&self, j: usize) -> &[C64] {
        let d1 = self.layout.r1_dim();
        &self.raw()[j * d1..(j + 1) * d1]
    }

    /// Amplitude `⟨a, s|ψ⟩`.
    pub fn amplitude(&self, a: u64, s: u64) -> C64 {
        if a as usize >= self.layout.r1_dim() {
            return C64::new(0.0, 0.0);
        }
        match self.column_position(s) {
            Some(j) => self.column(j)[a as usize],
            None => C64::new(0.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        let raw = self.raw();
        ordered_sum(raw.len(), |i| raw[i].norm_sqr())
    }

    pub(crate) fn check_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(n));
        }
        Ok(())
    }

    /// Copy with every amplitude multiplied by `e^{iφ}`.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        let mut out = self.clone();
        let ph = C64::from_polar(1.0, phi);
        out.raw_mut().iter_mut().for_each(|a| *a *= ph);
        out
    }

    /// Dense copy of the state, subject to the default cap.
    pub fn densify(&self) -> Result<Self> {
        self.densify_with_cap(DEFAULT_DENSE_CAP)
    }

    pub fn densify_with_cap(&self, cap: u64) -> Result<Self> {
        match &self.amps {
            Amplitudes::Dense(_) => {
                check_cap(&self.layout, cap)?;
                Ok(self.clone())
            }
            Amplitudes::Structured { table, columns } => {
                check_cap(&self.layout, cap)?;
                let d1 = self.layout.r1_dim();
                let mut v = vec![C64::new(0.0, 0.0); self.layout.dense_len() as usize];
                for (j, &s) in table.elements().iter().enumerate() {
                    let dst = s as usize * d1;
                    v[dst..dst + d1].copy_from_slice(&columns[j * d1..(j + 1) * d1]);
                }
                Ok(Self { layout: self.layout, amps: Amplitudes::Dense(v) })
            }
        }
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`. Backends may differ.
    pub fn inner_product(&self, other: &PureState) -> Result<C64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..self.column_count() {
            let Some(k) = other.column_position(self.column_value(j)) else {
                continue;
            };
            let (x, y) = (self.column(j), other.column(k));
            acc += ordered_sum(x.len(), |a| x[a].conj() * y[a]);
        }
        Ok(acc)
    }

    /// `P(c) = Σ_s |⟨c, s|ψ⟩|²` for every R1 label `c`.
    pub fn register1_distribution(&self) -> Result<Vec<f64>> {
        self.check_normalized()?;
        let d1 = self.layout.r1_dim();
        let mut p = vec![0.0; d1];
        for j in 0..self.column_count() {
            for (pc, amp) in p.iter_mut().zip(self.column(j)) {
                *pc += amp.norm_sqr();
            }
        }
        Ok(p)
    }

    /// `P(c)` for a single R1 label.
    pub fn register1_probability(&self, c: u64) -> f64 {
        (0..self.column_count()).map(|j| self.column(j)[c as usize].norm_sqr()).sum()
    }
}

fn check_cap(layout: &RegisterLayout, cap: u64) -> Result<()> {
    let required = layout.dense_len();
    if required > cap {
        return Err(Error::MemoryCap { required, cap });
    }
    Ok(())
}
