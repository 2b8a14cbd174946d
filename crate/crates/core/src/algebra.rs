//! One-mode fermion operators as 2×2 complex matrices.
//!
//! Basis ordering is |0⟩ = (1, 0)ᵀ, |1⟩ = (0, 1)ᵀ, so b = [[0, 1], [0, 0]]
//! (b|1⟩ = |0⟩) and N = b†b = diag(0, 1).

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::profile::{ProfileError, ProfileSet};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2(pub [C64; 2]);

impl Mat2 {
    pub const fn new(a00: C64, a01: C64, a10: C64, a11: C64) -> Self {
        Mat2([[a00, a01], [a10, a11]])
    }

    pub const fn zero() -> Self {
        Mat2([[ZERO; 2]; 2])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn diag(a: C64, b: C64) -> Self {
        Mat2([[a, ZERO], [ZERO, b]])
    }

    pub fn scale(self, s: C64) -> Self {
        let m = self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn adjoint(self) -> Self {
        let m = self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn frobenius_norm(self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(self, v: Vec2) -> Vec2 {
        let m = self.0;
        Vec2([
            m[0][0] * v.0[0] + m[0][1] * v.0[1],
            m[1][0] * v.0[0] + m[1][1] * v.0[1],
        ])
    }

    /// Both eigenvalues from the characteristic polynomial.
    pub fn eigenvalues(self) -> [C64; 2] {
        let half_tr = self.trace() * 0.5;
        let disc = (half_tr * half_tr - self.det()).sqrt();
        [half_tr - disc, half_tr + disc]
    }

    pub fn to_flat(self) -> [C64; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }

    pub fn from_flat(a: [C64; 4]) -> Self {
        Mat2([[a[0], a[1]], [a[2], a[3]]])
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        self.apply(v)
    }
}

impl Vec2 {
    pub const fn new(c0: C64, c1: C64) -> Self {
        Vec2([c0, c1])
    }

    pub const fn basis(n: usize) -> Self {
        if n == 0 {
            Vec2([ONE, ZERO])
        } else {
            Vec2([ZERO, ONE])
        }
    }

    pub fn norm(self) -> f64 {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr()).sqrt()
    }

    /// ⟨self|other⟩, antilinear in `self`.
    pub fn inner(self, other: Vec2) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn scale(self, s: C64) -> Vec2 {
        Vec2([self.0[0] * s, self.0[1] * s])
    }

    pub fn normalized(self) -> Vec2 {
        self.scale(C64::new(1.0 / self.norm(), 0.0))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

/// The fermion ladder operators and the half-spin generators built from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderOps {
    pub b: Mat2,
    pub b_dag: Mat2,
    pub n: Mat2,
    pub j_plus: Mat2,
    pub j_minus: Mat2,
    pub j1: Mat2,
    pub j2: Mat2,
    pub j3: Mat2,
}

pub fn ladder_ops() -> LadderOps {
    let b = Mat2::new(ZERO, ONE, ZERO, ZERO);
    let b_dag = b.adjoint();
    let n = b_dag * b;
    let half = C64::new(0.5, 0.0);
    LadderOps {
        b,
        b_dag,
        n,
        j_plus: b_dag,
        j_minus: b,
        j1: (b_dag + b).scale(half),
        j2: (b_dag - b).scale(C64::new(0.0, -0.5)),
        j3: n - Mat2::identity().scale(half),
    }
}

/// H = ω N + f b† + f* b + g = [[g, f*], [f, ω + g]].
pub fn hamiltonian(omega: f64, f: C64, g: f64) -> Mat2 {
    Mat2::new(C64::new(g, 0.0), f.conj(), f, C64::new(omega + g, 0.0))
}

pub fn hamiltonian_at(p: &ProfileSet, t: f64) -> Result<Mat2, ProfileError> {
    let (omega, f, g) = p.coefficients(t)?;
    Ok(hamiltonian(omega, f, g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketKind {
    Commutator,
    Anticommutator,
}

pub fn bracket(a: Mat2, b: Mat2, kind: BracketKind) -> Mat2 {
    match kind {
        BracketKind::Commutator => a * b - b * a,
        BracketKind::Anticommutator => a * b + b * a,
    }
}

pub fn commutator(a: Mat2, b: Mat2) -> Mat2 {
    bracket(a, b, BracketKind::Commutator)
}

pub fn anticommutator(a: Mat2, b: Mat2) -> Mat2 {
    bracket(a, b, BracketKind::Anticommutator)
}

pub fn frobenius_distance(a: Mat2, b: Mat2) -> f64 {
    (a - b).frobenius_norm()
}
