//! In-place kernels on flat amplitude slices. Bit `b` of the slice index is
//! the qubit being addressed. Large slices are processed in parallel over
//! fixed-size blocks; every amplitude is computed by the same arithmetic
//! whatever the split, so results do not depend on the thread count.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::unitary::Unitary2;

/// Slices shorter than this are handled on the calling thread.
const PAR_THRESHOLD: usize = 1 << 15;
/// Block length for deterministic parallel reductions.
const REDUCE_BLOCK: usize = 1 << 12;

#[inline]
fn pairwise<F>(amps: &mut [C64], bit: usize, f: F)
where
    F: Fn(&mut C64, &mut C64) + Sync,
{
    let half = 1usize << bit;
    let span = half << 1;
    debug_assert!(amps.len().is_multiple_of(span));
    let per_chunk = |chunk: &mut [C64]| {
        let (lo, hi) = chunk.split_at_mut(half);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a, b);
        }
    };
    if amps.len() < PAR_THRESHOLD {
        amps.chunks_mut(span).for_each(per_chunk);
    } else if span <= PAR_THRESHOLD {
        amps.par_chunks_mut(span).with_min_len(PAR_THRESHOLD / span).for_each(per_chunk);
    } else {
        amps.par_chunks_mut(span).for_each(|chunk| {
            let (lo, hi) = chunk.split_at_mut(half);
            lo.par_iter_mut()
                .zip(hi.par_iter_mut())
                .with_min_len(PAR_THRESHOLD)
                .for_each(|(a, b)| f(a, b));
        });
    }
}

pub fn apply_single(amps: &mut [C64], bit: usize, u: &Unitary2) {
    let m = u.0;
    pairwise(amps, bit, |a, b| {
        let (x, y) = (*a, *b);
        *a = m[0][0] * x + m[0][1] * y;
        *b = m[1][0] * x + m[1][1] * y;
    });
}

pub fn hadamard(amps: &mut [C64], bit: usize) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    pairwise(amps, bit, |a, b| {
        let (x, y) = (*a, *b);
        *a = (x + y) * h;
        *b = (x - y) * h;
    });
}

/// Multiplies amplitudes with both bits set by `phase`.
pub fn controlled_phase(amps: &mut [C64], control: usize, target: usize, phase: C64) {
    let mask = (1usize << control) | (1usize << target);
    let body = |(i, a): (usize, &mut C64)| {
        if i & mask == mask {
            *a *= phase;
        }
    };
    if amps.len() < PAR_THRESHOLD {
        amps.iter_mut().enumerate().for_each(body);
    } else {
        amps.par_iter_mut().enumerate().with_min_len(PAR_THRESHOLD).for_each(body);
    }
}

/// Applies a diagonal single-qubit unitary to every bit in `0..bits`.
pub fn diagonal_all(amps: &mut [C64], bits: usize, d0: C64, d1: C64) {
    let table: Vec<C64> = (0..=bits)
        .map(|ones| d0.powi((bits - ones) as i32) * d1.powi(ones as i32))
        .collect();
    let mask = (1usize << bits) - 1;
    let body = |(i, a): (usize, &mut C64)| {
        *a *= table[(i & mask).count_ones() as usize];
    };
    if amps.len() < PAR_THRESHOLD {
        amps.iter_mut().enumerate().for_each(body);
    } else {
        amps.par_iter_mut().enumerate().with_min_len(PAR_THRESHOLD).for_each(body);
    }
}

/// Deterministic sum of `f(i)` over `0..len`: fixed blocks, ordered combine.
pub fn ordered_sum<T, F>(len: usize, f: F) -> T
where
    T: Send + Copy + std::iter::Sum<T> + std::ops::Add<Output = T>,
    F: Fn(usize) -> T + Sync,
{
    if len < PAR_THRESHOLD {
        return (0..len).map(&f).sum();
    }
    let blocks = len.div_ceil(REDUCE_BLOCK);
    let partial: Vec<T> = (0..blocks)
        .into_par_iter()
        .map(|b| (b * REDUCE_BLOCK..((b + 1) * REDUCE_BLOCK).min(len)).map(&f).sum())
        .collect();
    partial.into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_single(amps: &[C64], bit: usize, u: &Unitary2) -> Vec<C64> {
        (0..amps.len())
            .map(|i| {
                let b = (i >> bit) & 1;
                let j0 = i & !(1 << bit);
                u.0[b][0] * amps[j0] + u.0[b][1] * amps[j0 | (1 << bit)]
            })
            .collect()
    }

    #[test]
    fn parallel_paths_match_naive() {
        let n = 17;
        let amps: Vec<C64> = (0..1usize << n)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let u = Unitary2::exp_pauli([0.2, -0.4, 0.9]);
        for bit in [0, 5, 14, 16] {
            let mut got = amps.clone();
            apply_single(&mut got, bit, &u);
            let want = naive_single(&amps, bit, &u);
            assert!(got.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-14));
        }
    }

    #[test]
    fn hadamard_matches_general_kernel() {
        let amps: Vec<C64> = (0..64).map(|i| C64::new(i as f64, -(i as f64) / 3.0)).collect();
        let mut a = amps.clone();
        let mut b = amps;
        hadamard(&mut a, 3);
        apply_single(&mut b, 3, &Unitary2::hadamard());
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-13));
    }

    #[test]
    fn ordered_sum_is_stable() {
        let f = |i: usize| 1.0 / (1.0 + i as f64);
        let a: f64 = ordered_sum(1 << 18, f);
        let b: f64 = ordered_sum(1 << 18, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
