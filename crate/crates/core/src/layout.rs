//! Register sizes and the computational-basis conventions.
//!
//! Qubit `ℓ = 1` of a register is its least significant bit, so a basis label
//! is `a = Σ_ℓ a_ℓ 2^{ℓ-1}`. In a flat amplitude array the first register
//! occupies the low `l1` bits: `index = a + 2^{l1}·s`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number::gcd;

/// Largest total qubit count any backend will address.
pub const MAX_QUBITS: usize = 48;

/// Default `(L1, L2)` for modulus `N`: `L2 = ⌈log2 N⌉`, `L1 = 2·L2`.
pub fn default_sizes(modulus: u64) -> (usize, usize) {
    let l2 = ceil_log2(modulus);
    (2 * l2, l2)
}

/// The problem instance `(N, x)` together with the sizes of both registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegisterLayout {
    modulus: u64,
    base: u64,
    l1: usize,
    l2: usize,
}

impl RegisterLayout {
    /// Layout with the default register sizes `L2 = ⌈log2 N⌉`, `L1 = 2·L2`.
    ///
    /// `N` must be an odd composite and `x` a unit modulo `N`.
    pub fn new(modulus: u64, base: u64) -> Result<Self> {
        if modulus.is_multiple_of(2) || is_prime(modulus) {
            return Err(Error::InvalidLayout(format!(
                "N = {modulus} is not an odd composite"
            )));
        }
        let (l1, l2) = default_sizes(modulus);
        Self::with_registers(modulus, base, l1, l2)
    }

    /// Layout with explicit register sizes, for experiments that step outside
    /// the default sizing rule.
    pub fn with_registers(modulus: u64, base: u64, l1: usize, l2: usize) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidLayout(format!("N = {modulus} is too small")));
        }
        if base <= 1 || base >= modulus {
            return Err(Error::InvalidLayout(format!(
                "x = {base} must satisfy 1 < x < N = {modulus}"
            )));
        }
        if gcd(base, modulus) != 1 {
            return Err(Error::NotCoprime { a: base, b: modulus });
        }
        if l1 == 0 {
            return Err(Error::InvalidLayout("register R1 needs at least one qubit".into()));
        }
        if l1 + l2 > MAX_QUBITS {
            return Err(Error::InvalidLayout(format!(
                "{} qubits exceed the supported maximum of {MAX_QUBITS}",
                l1 + l2
            )));
        }
        if l2 < 64 && (1u64 << l2) < modulus {
            return Err(Error::InvalidLayout(format!(
                "R2 with {l2} qubits cannot hold residues modulo {modulus}"
            )));
        }
        Ok(Self { modulus, base, l1, l2 })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn l1(&self) -> usize {
        self.l1
    }

    pub fn l2(&self) -> usize {
        self.l2
    }

    /// `L = L1 + L2`.
    pub fn total_qubits(&self) -> usize {
        self.l1 + self.l2
    }

    /// Number of basis states of R1.
    pub fn r1_dim(&self) -> usize {
        1 << self.l1
    }

    /// Number of basis states of R2.
    pub fn r2_dim(&self) -> usize {
        1 << self.l2
    }

    pub fn dense_len(&self) -> u64 {
        1u64 << self.total_qubits()
    }

    /// Whether the sizes satisfy `2·log2 N ≤ L1` and `log2 N ≤ L2 < log2 N + 1`.
    pub fn follows_sizing_rule(&self) -> bool {
        let lg = (self.modulus as f64).log2();
        self.l1 as f64 >= 2.0 * lg && self.l2 as f64 >= lg && (self.l2 as f64) < lg + 1.0
    }
}

/// Reads the `width` low bits of `c` in reverse order.
pub fn bit_reverse(c: u64, width: usize) -> Result<u64> {
    if width > 63 || c >> width != 0 {
        return Err(Error::ValueOutOfRange {
            value: c,
            bound: 1u64.checked_shl(width as u32).unwrap_or(u64::MAX),
        });
    }
    if width == 0 {
        return Ok(0);
    }
    Ok(c.reverse_bits() >> (64 - width))
}

fn ceil_log2(n: u64) -> usize {
    (64 - (n - 1).leading_zeros()) as usize
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
