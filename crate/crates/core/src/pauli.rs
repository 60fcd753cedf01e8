use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::X => 'x',
            Pauli::Y => 'y',
            Pauli::Z => 'z',
        }
    }

    /// Bit flipped by `σ` (none for `σ_z`) and the matrix element
    /// `⟨i|σ|j⟩` as a function of the bit value of the output index `i`.
    #[inline]
    pub(crate) fn element(self, out_bit: bool) -> C64 {
        match (self, out_bit) {
            (Pauli::X, _) => C64::new(1.0, 0.0),
            (Pauli::Y, false) => C64::new(0.0, -1.0),
            (Pauli::Y, true) => C64::new(0.0, 1.0),
            (Pauli::Z, false) => C64::new(1.0, 0.0),
            (Pauli::Z, true) => C64::new(-1.0, 0.0),
        }
    }

    #[inline]
    pub(crate) fn flips(self) -> bool {
        !matches!(self, Pauli::Z)
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Pauli::X),
            "y" | "Y" => Ok(Pauli::Y),
            "z" | "Z" => Ok(Pauli::Z),
            _ => Err(Error::InvalidNoiseConfig(format!("unknown Pauli direction {s:?}"))),
        }
    }
}

/// Parses a component subset such as `"xz"` into sorted, de-duplicated directions.
pub fn parse_components(s: &str) -> Result<Vec<Pauli>> {
    let mut out = Vec::new();
    for ch in s.chars() {
        let p: Pauli = ch.to_string().parse()?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

pub fn components_label(components: &[Pauli]) -> String {
    components.iter().map(|p| p.symbol()).collect()
}
