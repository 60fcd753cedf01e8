//! Brute-force references shared by the integration tests. Everything here
//! works on explicit `2^L × 2^L` matrices built from Kronecker products and
//! does not call into the library's kernels.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use shor_afs::Pauli;

pub type Matrix = Vec<Vec<C64>>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()).collect()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            if a[i][j] == c(0.0, 0.0) {
                continue;
            }
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn pauli_matrix(p: Pauli) -> Matrix {
    match p {
        Pauli::X => vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        Pauli::Y => vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]],
        Pauli::Z => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]],
    }
}

pub fn hadamard_matrix() -> Matrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![vec![c(h, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(-h, 0.0)]]
}

/// `op` on bit `bit` of an `n`-bit index (bit 0 least significant).
pub fn on_bit(op: &Matrix, bit: usize, n: usize) -> Matrix {
    kron(&identity(1 << (n - bit - 1)), &kron(op, &identity(1 << bit)))
}

pub fn mat_vec(m: &Matrix, v: &[C64]) -> Vec<C64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn add_scaled(acc: &mut Matrix, m: &Matrix, w: C64) {
    for (ra, rm) in acc.iter_mut().zip(m) {
        for (a, b) in ra.iter_mut().zip(rm) {
            *a += w * b;
        }
    }
}

/// `Σ_ℓ w_ℓ σ(bit_ℓ)` as a full matrix.
pub fn additive_matrix(p: Pauli, weights: &[(usize, C64)], n: usize) -> Matrix {
    let mut acc = vec![vec![c(0.0, 0.0); 1 << n]; 1 << n];
    for &(bit, w) in weights {
        add_scaled(&mut acc, &on_bit(&pauli_matrix(p), bit, n), w);
    }
    acc
}

/// `⟨A†A⟩ − |⟨A⟩|²` by explicit matrix-vector products.
pub fn fluct_matrix(a: &Matrix, psi: &[C64]) -> f64 {
    let v = mat_vec(a, psi);
    let mean: C64 = psi.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
    v.iter().map(|x| x.norm_sqr()).sum::<f64>() - mean.norm_sqr()
}

/// Weights `e^{−ikℓ}/L_s` on bits `first .. first + len`.
pub fn fourier_weights(first: usize, len: usize, n_index: i64) -> Vec<(usize, C64)> {
    let k = 2.0 * PI * n_index as f64 / len as f64;
    (0..len).map(|i| (first + i, C64::from_polar(1.0 / len as f64, -k * (i + 1) as f64))).collect()
}

/// Gates of the circuit, spelled out independently of the library.
#[derive(Debug, Clone, Copy)]
pub enum NaiveGate {
    H(usize),
    Cmm(usize, u64),
    Cp(usize, usize, f64),
}

pub fn naive_gates(n: u64, x: u64, l1: usize) -> Vec<NaiveGate> {
    let mut g = Vec::new();
    for l in 1..=l1 {
        g.push(NaiveGate::H(l));
    }
    let mut u = x % n;
    for l in 1..=l1 {
        g.push(NaiveGate::Cmm(l, u));
        u = u * u % n;
    }
    for j in (1..=l1).rev() {
        g.push(NaiveGate::H(j));
        for jp in (1..j).rev() {
            g.push(NaiveGate::Cp(jp, j, PI / (1u64 << (j - jp)) as f64));
        }
    }
    g
}

pub fn naive_gate_matrix(gate: NaiveGate, n: u64, l1: usize, l2: usize) -> Matrix {
    let bits = l1 + l2;
    let dim = 1usize << bits;
    match gate {
        NaiveGate::H(l) => on_bit(&hadamard_matrix(), l - 1, bits),
        NaiveGate::Cmm(l, u) => {
            let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
            for i in 0..dim {
                let a = i % (1 << l1);
                let s = (i >> l1) as u64;
                let s2 = if (a >> (l - 1)) & 1 == 1 && s < n { u * s % n } else { s };
                m[a + ((s2 as usize) << l1)][i] = c(1.0, 0.0);
            }
            m
        }
        NaiveGate::Cp(cb, t, angle) => {
            let mut m = identity(dim);
            for (i, row) in m.iter_mut().enumerate() {
                if (i >> (cb - 1)) & 1 == 1 && (i >> (t - 1)) & 1 == 1 {
                    row[i] = C64::from_polar(1.0, angle);
                }
            }
            m
        }
    }
}

/// All states `ψ_0 … ψ_Q` of the brute-force run.
pub fn naive_run(n: u64, x: u64, l1: usize, l2: usize) -> Vec<Vec<C64>> {
    let mut psi = vec![c(0.0, 0.0); 1 << (l1 + l2)];
    psi[1 << l1] = c(1.0, 0.0);
    let mut out = vec![psi.clone()];
    for g in naive_gates(n, x, l1) {
        psi = mat_vec(&naive_gate_matrix(g, n, l1, l2), &psi);
        out.push(psi.clone());
    }
    out
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Prints one acceptance line and returns the verdict.
pub fn verdict(id: u32, title: &str, pass: bool, detail: &str) -> bool {
    use std::io::Write;
    // Written to the raw handle so the line shows up even when libtest captures output.
    let line = format!("[{}] criterion {id}: {title} | {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    pass
}
