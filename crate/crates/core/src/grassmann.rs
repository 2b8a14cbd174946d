//! Grassmann algebra on the two generators ζ, ζ* and Grassmann-valued
//! two-component states.
//!
//! Elements are stored on the ordered monomials {1, ζ, ζ*, ζζ*}; the
//! generator order ζ < ζ* fixes every sign (ζ*ζ = −ζζ*).

use std::ops::{Add, Mul, Neg, Sub};

use crate::algebra::{Mat2, Vec2, C64, ONE, ZERO};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrassmannElement(pub [C64; 4]);

impl GrassmannElement {
    pub const fn new(one: C64, zeta: C64, zeta_star: C64, zeta_zeta_star: C64) -> Self {
        GrassmannElement([one, zeta, zeta_star, zeta_zeta_star])
    }

    pub const fn zero() -> Self {
        GrassmannElement([ZERO; 4])
    }

    pub const fn scalar(c: C64) -> Self {
        GrassmannElement([c, ZERO, ZERO, ZERO])
    }

    pub const fn one() -> Self {
        Self::scalar(ONE)
    }

    pub const fn zeta() -> Self {
        GrassmannElement([ZERO, ONE, ZERO, ZERO])
    }

    pub const fn zeta_star() -> Self {
        GrassmannElement([ZERO, ZERO, ONE, ZERO])
    }

    pub const fn zeta_zeta_star() -> Self {
        GrassmannElement([ZERO, ZERO, ZERO, ONE])
    }

    pub fn scale(self, s: C64) -> Self {
        GrassmannElement(self.0.map(|c| c * s))
    }

    pub fn even_part(self) -> Self {
        GrassmannElement([self.0[0], ZERO, ZERO, self.0[3]])
    }

    pub fn odd_part(self) -> Self {
        GrassmannElement([ZERO, self.0[1], self.0[2], ZERO])
    }

    /// Parity of a homogeneous element; `None` for mixed elements. Zero is
    /// reported as even.
    pub fn parity(self) -> Option<Parity> {
        let has_even = self.0[0] != ZERO || self.0[3] != ZERO;
        let has_odd = self.0[1] != ZERO || self.0[2] != ZERO;
        match (has_even, has_odd) {
            (_, false) => Some(Parity::Even),
            (false, true) => Some(Parity::Odd),
            (true, true) => None,
        }
    }

    pub fn max_abs(self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Product with reordering into canonical monomial order.
    pub fn gmul(self, other: Self) -> Self {
        let [a0, a1, a2, a3] = self.0;
        let [b0, b1, b2, b3] = other.0;
        GrassmannElement([
            a0 * b0,
            a0 * b1 + a1 * b0,
            a0 * b2 + a2 * b0,
            // ζ·ζ* = ζζ*, ζ*·ζ = −ζζ*
            a0 * b3 + a3 * b0 + a1 * b2 - a2 * b1,
        ])
    }

    /// Antilinear involution with ζ ↔ ζ*, reversing products: (ab)* = b*a*.
    /// (ζζ*)* = (ζ*)*ζ* = ζζ*, so the top monomial maps to itself.
    pub fn gconj(self) -> Self {
        let [a0, a1, a2, a3] = self.0;
        GrassmannElement([a0.conj(), a2.conj(), a1.conj(), a3.conj()])
    }
}

impl Add for GrassmannElement {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        GrassmannElement(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }
}

impl Sub for GrassmannElement {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        GrassmannElement(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }
}

impl Neg for GrassmannElement {
    type Output = Self;
    fn neg(self) -> Self {
        GrassmannElement(self.0.map(|c| -c))
    }
}

impl Mul for GrassmannElement {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.gmul(o)
    }
}

pub fn gmul(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement {
    a.gmul(b)
}

pub fn gconj(a: GrassmannElement) -> GrassmannElement {
    a.gconj()
}

/// Orthonormal basis pair a Grassmann state is expanded in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    /// {|0⟩, |1⟩}
    Static,
    /// {|0;t⟩, |1;t⟩} with their static-basis components.
    Dynamic { t: f64, frame: [Vec2; 2] },
}

/// c₀|e₀⟩ + c₁|e₁⟩ with Grassmann coefficients written to the left of the kets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrassmannState {
    pub c: [GrassmannElement; 2],
    pub basis: Basis,
}

impl GrassmannState {
    pub fn new(c0: GrassmannElement, c1: GrassmannElement, basis: Basis) -> Self {
        GrassmannState { c: [c0, c1], basis }
    }

    /// Ordinary (Grassmann-free) state.
    pub fn from_vec(v: Vec2, basis: Basis) -> Self {
        GrassmannState::new(
            GrassmannElement::scalar(v.0[0]),
            GrassmannElement::scalar(v.0[1]),
            basis,
        )
    }

    /// Left multiplication of both coefficients by a Grassmann element.
    pub fn left_mul(self, a: GrassmannElement) -> Self {
        GrassmannState::new(a * self.c[0], a * self.c[1], self.basis)
    }

    pub fn max_abs(self) -> f64 {
        self.c[0].max_abs().max(self.c[1].max_abs())
    }

    fn check_basis(&self, other: &Basis) -> Result<()> {
        if &self.basis != other {
            return Err(Error::BasisMismatch(format!(
                "{:?} vs {:?}",
                self.basis, other
            )));
        }
        Ok(())
    }

    /// Re-expands the state in the static basis.
    pub fn to_static(self) -> Self {
        match self.basis {
            Basis::Static => self,
            Basis::Dynamic { frame, .. } => {
                let comp =
                    |i: usize| self.c[0].scale(frame[0].0[i]) + self.c[1].scale(frame[1].0[i]);
                GrassmannState::new(comp(0), comp(1), Basis::Static)
            }
        }
    }
}

/// Applies an operator of definite parity; moving an odd operator past an odd
/// coefficient costs a sign.
pub fn apply_graded_op(
    m: Mat2,
    op_basis: &Basis,
    op_parity: Parity,
    s: &GrassmannState,
) -> Result<GrassmannState> {
    s.check_basis(op_basis)?;
    let passed = s.c.map(|c| match op_parity {
        Parity::Even => c,
        Parity::Odd => c.even_part() - c.odd_part(),
    });
    let row = |i: usize| passed[0].scale(m.0[i][0]) + passed[1].scale(m.0[i][1]);
    Ok(GrassmannState::new(row(0), row(1), s.basis))
}

/// |ζ⟩ = e^{−ζ*ζ/2}(|0⟩ − ζ|1⟩) with e^{−ζ*ζ/2} = 1 + ζζ*/2 exactly.
/// Without normalization the prefactor is dropped.
pub fn canonical_cs(normalize: bool) -> GrassmannState {
    coherent_in(Basis::Static, normalize)
}

/// The coherent-state expansion (1 + ζζ*/2)|e₀⟩ − ζ|e₁⟩ in a given basis.
pub fn coherent_in(basis: Basis, normalize: bool) -> GrassmannState {
    let c0 = if normalize {
        GrassmannElement::one() + GrassmannElement::zeta_zeta_star().scale(C64::new(0.5, 0.0))
    } else {
        GrassmannElement::one()
    };
    GrassmannState::new(c0, -GrassmannElement::zeta(), basis)
}

/// ⟨a|b⟩ = Σᵢ aᵢ* bᵢ
pub fn inner(a: &GrassmannState, b: &GrassmannState) -> Result<GrassmannElement> {
    a.check_basis(&b.basis)?;
    Ok(a.c[0].gconj() * b.c[0] + a.c[1].gconj() * b.c[1])
}

/// max coefficient of M·s − ζ·s.
pub fn eigen_residual(
    m: Mat2,
    op_basis: &Basis,
    op_parity: Parity,
    s: &GrassmannState,
) -> Result<f64> {
    let applied = apply_graded_op(m, op_basis, op_parity, s)?;
    let target = s.left_mul(GrassmannElement::zeta());
    Ok((0..2)
        .map(|i| (applied.c[i] - target.c[i]).max_abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ladder_ops;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn generator_products() {
        let z = GrassmannElement::zeta();
        let zs = GrassmannElement::zeta_star();
        assert_eq!(z * zs, GrassmannElement::zeta_zeta_star());
        assert_eq!(zs * z, -GrassmannElement::zeta_zeta_star());
        assert_eq!(z * z, GrassmannElement::zero());
        assert_eq!(zs * zs, GrassmannElement::zero());
    }

    #[test]
    fn gaussian_prefactor_squares() {
        // 1 − ζ*ζ/2 = 1 + ζζ*/2; its square is 1 + ζζ*
        let half = GrassmannElement::one() + GrassmannElement::zeta_zeta_star().scale(r(0.5));
        let sq = half * half;
        assert_eq!(
            sq,
            GrassmannElement::one() + GrassmannElement::zeta_zeta_star()
        );
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!(
            gconj(GrassmannElement::zeta()),
            GrassmannElement::zeta_star()
        );
        assert_eq!(
            gconj(GrassmannElement::zeta_zeta_star()),
            GrassmannElement::zeta_zeta_star()
        );
        let c = C64::new(1.5, -2.0);
        assert_eq!(
            gconj(GrassmannElement::scalar(c)),
            GrassmannElement::scalar(c.conj())
        );
        // consistent with (ζζ*)* = (ζ*)* ζ* via the product rule
        let z = GrassmannElement::zeta();
        let zs = GrassmannElement::zeta_star();
        assert_eq!(gconj(z * zs), gconj(zs) * gconj(z));
    }

    #[test]
    fn parity_of_monomials() {
        assert_eq!(GrassmannElement::one().parity(), Some(Parity::Even));
        assert_eq!(GrassmannElement::zeta().parity(), Some(Parity::Odd));
        assert_eq!(
            GrassmannElement::zeta_zeta_star().parity(),
            Some(Parity::Even)
        );
        assert_eq!(
            (GrassmannElement::one() + GrassmannElement::zeta()).parity(),
            None
        );
    }

    #[test]
    fn canonical_state_is_b_eigenstate() {
        let cs = canonical_cs(true);
        let ops = ladder_ops();
        let applied = apply_graded_op(ops.b, &Basis::Static, Parity::Odd, &cs).unwrap();
        assert_eq!(applied.c[0], GrassmannElement::zeta());
        assert_eq!(applied.c[1], GrassmannElement::zero());
        assert!(eigen_residual(ops.b, &Basis::Static, Parity::Odd, &cs).unwrap() <= 1e-15);
    }

    #[test]
    fn canonical_state_normalized() {
        let cs = canonical_cs(true);
        assert_eq!(inner(&cs, &cs).unwrap(), GrassmannElement::one());
        // without the prefactor the norm picks up ζζ*
        let raw = canonical_cs(false);
        assert_eq!(
            inner(&raw, &raw).unwrap(),
            GrassmannElement::one() - GrassmannElement::zeta_zeta_star()
        );
    }

    #[test]
    fn vanishing_generators_leave_vacuum() {
        let cs = canonical_cs(true);
        assert_eq!(cs.c[0].even_part().0[0], ONE);
        assert_eq!(cs.c[0].0[0], ONE);
        assert_eq!(cs.c[1].0[0], ZERO);
    }

    #[test]
    fn odd_operator_sign_on_one_fermion_term() {
        // b(ζ|1⟩) = −ζ b|1⟩ = −ζ|0⟩
        let s = GrassmannState::new(
            GrassmannElement::zero(),
            GrassmannElement::zeta(),
            Basis::Static,
        );
        let out = apply_graded_op(ladder_ops().b, &Basis::Static, Parity::Odd, &s).unwrap();
        assert_eq!(out.c[0], -GrassmannElement::zeta());
    }

    #[test]
    fn even_identity_is_neutral() {
        let cs = canonical_cs(true);
        let out = apply_graded_op(Mat2::identity(), &Basis::Static, Parity::Even, &cs).unwrap();
        assert_eq!(out, cs);
    }

    #[test]
    fn creation_operator_is_not_an_eigen_operator() {
        let cs = canonical_cs(true);
        let res = eigen_residual(ladder_ops().b_dag, &Basis::Static, Parity::Odd, &cs).unwrap();
        assert!(res >= 0.5);
    }

    #[test]
    fn inner_examples() {
        let zero = GrassmannState::from_vec(Vec2::basis(0), Basis::Static);
        let one = GrassmannState::from_vec(Vec2::basis(1), Basis::Static);
        assert_eq!(inner(&zero, &one).unwrap(), GrassmannElement::zero());
        let cs = canonical_cs(true);
        let c = C64::new(0.3, 0.4);
        let scaled = GrassmannState::new(cs.c[0].scale(c), cs.c[1].scale(c), Basis::Static);
        assert_eq!(
            inner(&scaled, &cs).unwrap(),
            inner(&cs, &cs).unwrap().scale(c.conj())
        );
    }

    #[test]
    fn basis_mismatch_is_reported() {
        let frame = [Vec2::basis(0), Vec2::basis(1)];
        let dyn_cs = coherent_in(Basis::Dynamic { t: 1.0, frame }, true);
        assert!(matches!(
            inner(&canonical_cs(true), &dyn_cs),
            Err(Error::BasisMismatch(_))
        ));
        assert!(apply_graded_op(ladder_ops().b, &Basis::Static, Parity::Odd, &dyn_cs).is_err());
        assert_eq!(dyn_cs.to_static(), canonical_cs(true));
    }
}
