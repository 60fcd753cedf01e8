use std::ops::Mul;

use num_complex::Complex64 as C64;

use crate::pauli::Pauli;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A 2×2 complex matrix acting on one qubit, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(pub [[C64; 2]; 2]);

impl Unitary2 {
    pub fn identity() -> Self {
        Unitary2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn hadamard() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Unitary2([[h, h], [h, -h]])
    }

    pub fn pauli(p: Pauli) -> Self {
        let i = C64::new(0.0, 1.0);
        match p {
            Pauli::X => Unitary2([[ZERO, ONE], [ONE, ZERO]]),
            Pauli::Y => Unitary2([[ZERO, -i], [i, ZERO]]),
            Pauli::Z => Unitary2([[ONE, ZERO], [ZERO, -ONE]]),
        }
    }

    /// `exp(−i n·σ)` for a real vector `n = (n_x, n_y, n_z)`.
    pub fn exp_pauli(n: [f64; 3]) -> Self {
        let theta = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if theta == 0.0 {
            return Self::identity();
        }
        let (s, c) = theta.sin_cos();
        let k = s / theta;
        let (x, y, z) = (n[0] * k, n[1] * k, n[2] * k);
        // cos θ·I − i sin θ·(n̂·σ)
        Unitary2([
            [C64::new(c, -z), C64::new(-y, -x)],
            [C64::new(y, -x), C64::new(c, z)],
        ])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Unitary2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn is_diagonal(&self) -> bool {
        self.0[0][1] == ZERO && self.0[1][0] == ZERO
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        // eigenvalues of A†A from its trace and determinant
        let a = self.adjoint() * *self;
        let tr = (a.0[0][0] + a.0[1][1]).re;
        let det = (a.0[0][0] * a.0[1][1] - a.0[0][1] * a.0[1][0]).re;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 + disc).max(0.0).sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let mut d = *self;
        for r in 0..2 {
            for c in 0..2 {
                d.0[r][c] -= other.0[r][c];
            }
        }
        d.operator_norm()
    }

    /// `‖U†U − I‖` in operator norm.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).distance(&Self::identity())
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Unitary2(out)
    }
}
