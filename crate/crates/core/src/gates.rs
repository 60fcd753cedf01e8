//! The four elementary steps of the simplified algorithm and their action on
//! both backends. Qubit numbers are 1-based within R1, matching `a_ℓ`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel;
use crate::number::{gcd, mul_mod};
use crate::state::{Amplitudes, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateStep {
    /// Hadamard on R1 qubit `target` during the initial transform.
    Hadamard { target: usize },
    /// `|a⟩|s⟩ → |a⟩|u·s mod N⟩` when `a_control = 1` (identity on `s ≥ N`).
    ControlledModMul { control: usize, multiplier: u64 },
    /// Hadamard on R1 qubit `target` inside the Fourier transform.
    QftHadamard { target: usize },
    /// Phase `e^{i·angle}` on amplitudes with both R1 bits set.
    ControlledPhase { control: usize, target: usize, angle: f64 },
}

impl GateStep {
    pub fn name(&self) -> &'static str {
        match self {
            GateStep::Hadamard { .. } => "hadamard",
            GateStep::ControlledModMul { .. } => "controlled_mod_mul",
            GateStep::QftHadamard { .. } => "qft_hadamard",
            GateStep::ControlledPhase { .. } => "controlled_phase",
        }
    }
}

fn r1_bit(qubit: usize, l1: usize) -> Result<usize> {
    if qubit == 0 || qubit > l1 {
        return Err(Error::QubitOutOfRange { index: qubit, width: l1 });
    }
    Ok(qubit - 1)
}

impl PureState {
    /// Applies one step in place.
    pub fn apply_step(&mut self, step: &GateStep) -> Result<()> {
        let l1 = self.layout().l1();
        let d1 = self.layout().r1_dim();
        match *step {
            GateStep::Hadamard { target } | GateStep::QftHadamard { target } => {
                let bit = r1_bit(target, l1)?;
                // R1 bits are the low bits of every column, so one pass over the
                // flat buffer covers all columns of either backend
                kernel::hadamard(self.raw_mut(), bit);
            }
            GateStep::ControlledPhase { control, target, angle } => {
                let (c, t) = (r1_bit(control, l1)?, r1_bit(target, l1)?);
                if c == t {
                    return Err(Error::Unsupported("control and target coincide".into()));
                }
                kernel::controlled_phase(self.raw_mut(), c, t, C64::from_polar(1.0, angle));
            }
            GateStep::ControlledModMul { control, multiplier } => {
                let bit = r1_bit(control, l1)?;
                let n = self.layout().modulus();
                if gcd(multiplier, n) != 1 {
                    return Err(Error::NotCoprime { a: multiplier, b: n });
                }
                let r2 = self.layout().r2_dim();
                match &mut self.amps {
                    Amplitudes::Dense(v) => {
                        let src = v.clone();
                        for s in 0..(n as usize).min(r2) {
                            let t = mul_mod(s as u64, multiplier, n) as usize;
                            if t == s {
                                continue;
                            }
                            let (from, to) = (&src[s * d1..(s + 1) * d1], t * d1);
                            for a in (0..d1).filter(|a| (a >> bit) & 1 == 1) {
                                v[to + a] = from[a];
                            }
                        }
                    }
                    Amplitudes::Structured { table, columns } => {
                        let shift = table.position(multiplier % n).ok_or_else(|| {
                            Error::Unsupported(format!(
                                "multiplier {multiplier} is outside the group generated by {}",
                                table.elements().get(1).copied().unwrap_or(1)
                            ))
                        })?;
                        let r = table.order();
                        if shift != 0 {
                            let src = columns.clone();
                            // x^j · x^shift = x^{(j+shift) mod r}
                            for j in 0..r {
                                let k = (j + shift) % r;
                                let from = &src[j * d1..(j + 1) * d1];
                                let to = &mut columns[k * d1..(k + 1) * d1];
                                for a in 0..d1 {
                                    if (a >> bit) & 1 == 1 {
                                        to[a] = from[a];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::RegisterLayout;
    use crate::state::BackendKind;

    #[test]
    fn hadamard_on_single_qubit_register() {
        let layout = RegisterLayout::with_registers(3, 2, 1, 2).unwrap();
        let mut st = PureState::init(layout, BackendKind::Dense).unwrap();
        st.apply_step(&GateStep::Hadamard { target: 1 }).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((st.amplitude(0, 1).re - h).abs() < 1e-15);
        assert!((st.amplitude(1, 1).re - h).abs() < 1e-15);
        st.apply_step(&GateStep::Hadamard { target: 1 }).unwrap();
        assert!((st.amplitude(0, 1).re - 1.0).abs() < 1e-15);
        assert!(st.amplitude(1, 1).norm() < 1e-15);
    }

    #[test]
    fn controlled_mod_mul_moves_r2_value() {
        let layout = RegisterLayout::new(21, 2).unwrap();
        for backend in [BackendKind::Dense, BackendKind::Structured] {
            let mut st = PureState::init(layout, backend).unwrap();
            st.apply_step(&GateStep::Hadamard { target: 1 }).unwrap();
            st.apply_step(&GateStep::ControlledModMul { control: 1, multiplier: 2 }).unwrap();
            let h = std::f64::consts::FRAC_1_SQRT_2;
            assert!((st.amplitude(0, 1).re - h).abs() < 1e-15);
            assert!((st.amplitude(1, 2).re - h).abs() < 1e-15);
            assert!(st.amplitude(1, 1).norm() < 1e-15);
        }
        let mut v = vec![C64::new(0.0, 0.0); 1 << 15];
        v[1 + 1024] = C64::new(1.0, 0.0);
        let mut st = PureState::from_dense(layout, v).unwrap();
        st.apply_step(&GateStep::ControlledModMul { control: 1, multiplier: 2 }).unwrap();
        assert_eq!(st.amplitude(1, 2), C64::new(1.0, 0.0));
    }

    #[test]
    fn mod_mul_is_identity_above_modulus() {
        let layout = RegisterLayout::new(21, 2).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); 1 << 15];
        v[1 + 1024 * 25] = C64::new(1.0, 0.0);
        let mut st = PureState::from_dense(layout, v).unwrap();
        st.apply_step(&GateStep::ControlledModMul { control: 1, multiplier: 2 }).unwrap();
        assert_eq!(st.amplitude(1, 25), C64::new(1.0, 0.0));
    }

    #[test]
    fn index_errors() {
        let layout = RegisterLayout::new(21, 2).unwrap();
        let mut st = PureState::init(layout, BackendKind::Dense).unwrap();
        assert!(st.apply_step(&GateStep::Hadamard { target: 0 }).is_err());
        assert!(st.apply_step(&GateStep::Hadamard { target: 11 }).is_err());
        assert!(st
            .apply_step(&GateStep::ControlledPhase { control: 3, target: 3, angle: 0.1 })
            .is_err());
        assert!(st
            .apply_step(&GateStep::ControlledModMul { control: 1, multiplier: 7 })
            .is_err());
    }

    #[test]
    fn controlled_phase_only_touches_both_set() {
        let layout = RegisterLayout::with_registers(3, 2, 2, 2).unwrap();
        let v = vec![C64::new(0.5, 0.0); 4]
            .into_iter()
            .chain(std::iter::repeat_n(C64::new(0.0, 0.0), 12))
            .collect();
        let mut st = PureState::from_dense(layout, v).unwrap();
        st.apply_step(&GateStep::ControlledPhase { control: 1, target: 2, angle: 0.5 })
            .unwrap();
        let amps = st.dense_amplitudes().unwrap();
        assert_eq!(amps[0], C64::new(0.5, 0.0));
        assert_eq!(amps[1], C64::new(0.5, 0.0));
        assert_eq!(amps[2], C64::new(0.5, 0.0));
        assert!((amps[3] - C64::from_polar(0.5, 0.5)).norm() < 1e-15);
    }
}
