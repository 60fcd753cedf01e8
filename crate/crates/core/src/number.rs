//! Classical number theory around order finding: modular arithmetic, the
//! continued-fraction readout of a measured register value and the set of
//! outcomes that recover the correct order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{bit_reverse, RegisterLayout};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Smallest `r ≥ 1` with `x^r ≡ 1 (mod N)`, found by direct iteration.
pub fn multiplicative_order(x: u64, modulus: u64) -> Result<u64> {
    if modulus < 2 || gcd(x, modulus) != 1 {
        return Err(Error::NotCoprime { a: x, b: modulus });
    }
    let mut value = x % modulus;
    let mut r = 1u64;
    while value != 1 {
        value = mul_mod(value, x, modulus);
        r += 1;
    }
    Ok(r)
}

/// Convergents `p/q` of the continued fraction of `num/den`, in order.
pub fn convergents(num: u64, den: u64) -> Vec<(u64, u64)> {
    assert!(den > 0, "denominator must be positive");
    let (mut n, mut d) = (num as u128, den as u128);
    // (p_{k-2}, q_{k-2}), (p_{k-1}, q_{k-1})
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut out = Vec::new();
    while d != 0 {
        let a = n / d;
        let (p, q) = (a * p1 + p0, a * q1 + q0);
        out.push((p as u64, q as u64));
        (p0, q0, p1, q1) = (p1, q1, p, q);
        (n, d) = (d, n - a * d);
    }
    out
}

/// Why a measured value did not yield the order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReadoutFailure {
    /// No convergent with denominator below `N` is within `2^{-(L1+1)}`.
    NoConvergent,
    /// A convergent was found but its denominator `q` has `x^q ≢ 1`.
    WrongOrder { q: u64 },
}

/// A convergent accepted by the readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Readout {
    /// Bit-reversed register value `c̄`.
    pub reversed: u64,
    pub numerator: u64,
    pub denominator: u64,
}

/// Recovers a candidate order from a measured R1 value `c`.
///
/// The readout works on `c̄ = bit_reverse(c)`. Among the convergents of
/// `c̄ / 2^{L1}` it takes the first with `q < N` and
/// `|c̄/2^{L1} − p/q| ≤ 2^{−(L1+1)}`; the outer `Ok` carries a verdict
/// rather than an error so callers can tell both failure modes apart.
pub fn order_from_measurement(
    c: u64,
    layout: &RegisterLayout,
) -> Result<std::result::Result<Readout, ReadoutFailure>> {
    let reversed = bit_reverse(c, layout.l1())?;
    Ok(readout_reversed(reversed, layout))
}

pub(crate) fn readout_reversed(
    reversed: u64,
    layout: &RegisterLayout,
) -> std::result::Result<Readout, ReadoutFailure> {
    let l1 = layout.l1() as u32;
    let den = 1u64 << l1;
    let n = layout.modulus();
    // |c̄/2^L1 − p/q| ≤ 2^-(L1+1)  ⇔  |2·c̄·q − 2^{L1+1}·p| ≤ q, in exact integers
    let hit = convergents(reversed, den).into_iter().find(|&(p, q)| {
        q < n && {
            let lhs = (2 * reversed as i128 * q as i128 - ((den as i128) << 1) * p as i128).abs();
            lhs <= q as i128
        }
    });
    match hit {
        None => Err(ReadoutFailure::NoConvergent),
        Some((p, q)) => {
            if pow_mod(layout.base(), q, n) == 1 {
                Ok(Readout { reversed, numerator: p, denominator: q })
            } else {
                Err(ReadoutFailure::WrongOrder { q })
            }
        }
    }
}

/// All bit-reversed outcomes `c̄` whose readout returns exactly the order `r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuccessSet {
    pub order: u64,
    /// Accepted `c̄` values with the convergent each one produced.
    pub accepted: BTreeMap<u64, Readout>,
}

impl SuccessSet {
    pub fn reversed_values(&self) -> impl Iterator<Item = u64> + '_ {
        self.accepted.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.accepted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepted.is_empty()
    }

    pub fn contains(&self, reversed: u64) -> bool {
        self.accepted.contains_key(&reversed)
    }
}

/// Scans every `c̄ ∈ 0..2^{L1}` and keeps those whose readout gives `q = r`.
pub fn success_set(layout: &RegisterLayout, order: u64) -> SuccessSet {
    let accepted = (0..layout.r1_dim() as u64)
        .filter_map(|cbar| match readout_reversed(cbar, layout) {
            Ok(readout) if readout.denominator == order => Some((cbar, readout)),
            _ => None,
        })
        .collect();
    SuccessSet { order, accepted }
}

/// `c̄·r mod 2^{L1}` folded into the symmetric range `(−2^{L1}/2, 2^{L1}/2]`.
pub fn symmetric_peak_offset(reversed: u64, order: u64, l1: usize) -> i64 {
    let m = 1i128 << l1;
    let v = (reversed as i128 * order as i128).rem_euclid(m);
    (if v > m / 2 { v - m } else { v }) as i64
}
