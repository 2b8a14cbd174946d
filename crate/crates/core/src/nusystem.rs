//! Invariant ladder operators B(t) = ν₋J₋ + ν₊J₊ + ν₃J₃.
//!
//! The coefficient triple obeys the linear system
//!
//! ```text
//! ν̇₊ = i(ν₃ f − ν₊ ω)
//! ν̇₋ = i(ν₋ ω − ν₃ f*)
//! ν̇₃ = 2i(ν₊ f* − ν₋ f)
//! ```
//!
//! which is exactly ∂B/∂t = i[B, H] written in components. Two quadratic
//! combinations are conserved: λ₁ = ν₊ν₋ + ν₃²/4 (so B² = λ₁) and
//! λ₂ = |ν₋|² + |ν₊|² + |ν₃|²/2 (so {B, B†} = λ₂). B is a fermion
//! annihilator when λ₁ = 0 and λ₂ = 1.

use crate::algebra::{commutator, hamiltonian, hamiltonian_at, ladder_ops, Mat2, C64, I, ZERO};
use crate::error::{Error, Result};
use crate::ode::{integrate, uniform_grid, OdeOptions, OdeStats};
use crate::profile::ProfileSet;

/// Drive magnitude below which ∫ḟ/f is not tracked.
pub const DRIVE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuState {
    pub nu_plus: C64,
    pub nu_minus: C64,
    pub nu_3: C64,
}

impl NuState {
    pub const fn new(nu_plus: C64, nu_minus: C64, nu_3: C64) -> Self {
        NuState {
            nu_plus,
            nu_minus,
            nu_3,
        }
    }

    /// ν₋ = 1, ν₊ = ν₃ = 0, for which B(t₀) = b.
    pub const fn canonical() -> Self {
        NuState::new(ZERO, C64::new(1.0, 0.0), ZERO)
    }

    pub fn scale(self, s: C64) -> Self {
        NuState::new(self.nu_plus * s, self.nu_minus * s, self.nu_3 * s)
    }

    /// max-modulus distance between two triples.
    pub fn distance(self, other: NuState) -> f64 {
        (self.nu_plus - other.nu_plus)
            .norm()
            .max((self.nu_minus - other.nu_minus).norm())
            .max((self.nu_3 - other.nu_3).norm())
    }

    fn to_reals(self, out: &mut [f64]) {
        out[0] = self.nu_plus.re;
        out[1] = self.nu_plus.im;
        out[2] = self.nu_minus.re;
        out[3] = self.nu_minus.im;
        out[4] = self.nu_3.re;
        out[5] = self.nu_3.im;
    }

    fn from_reals(y: &[f64]) -> Self {
        NuState::new(
            C64::new(y[0], y[1]),
            C64::new(y[2], y[3]),
            C64::new(y[4], y[5]),
        )
    }
}

/// Result of checking the ladder conditions on an initial triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcReport {
    pub passed: bool,
    pub lambda1: C64,
    pub lambda2: f64,
    /// |ν₃² + 4ν₊ν₋|
    pub rank_residual: f64,
    /// ||ν₋| + |ν₊| − 1|
    pub norm_residual: f64,
}

pub fn validate_ic(ic: NuState, tol: f64) -> IcReport {
    let (lambda1, lambda2) = lambda_invariants(ic);
    let rank_residual = (ic.nu_3 * ic.nu_3 + ic.nu_plus * ic.nu_minus * 4.0).norm();
    let norm_residual = (ic.nu_minus.norm() + ic.nu_plus.norm() - 1.0).abs();
    IcReport {
        passed: rank_residual <= tol && norm_residual <= tol,
        lambda1,
        lambda2,
        rank_residual,
        norm_residual,
    }
}

/// (λ₁, λ₂) = (ν₊ν₋ + ν₃²/4, |ν₋|² + |ν₊|² + |ν₃|²/2).
pub fn lambda_invariants(s: NuState) -> (C64, f64) {
    let l1 = s.nu_plus * s.nu_minus + s.nu_3 * s.nu_3 * 0.25;
    let l2 = s.nu_minus.norm_sqr() + s.nu_plus.norm_sqr() + 0.5 * s.nu_3.norm_sqr();
    (l1, l2)
}

/// Right-hand side for given instantaneous ω and f.
pub fn nu_rhs_with(s: NuState, omega: f64, f: C64) -> NuState {
    NuState {
        nu_plus: I * (s.nu_3 * f - s.nu_plus * omega),
        nu_minus: I * (s.nu_minus * omega - s.nu_3 * f.conj()),
        nu_3: I * 2.0 * (s.nu_plus * f.conj() - s.nu_minus * f),
    }
}

pub fn nu_rhs(t: f64, s: NuState, p: &ProfileSet) -> Result<NuState> {
    let (omega, f, _) = p.coefficients(t)?;
    Ok(nu_rhs_with(s, omega, f))
}

/// B = ν₋J₋ + ν₊J₊ + ν₃J₃ = [[−ν₃/2, ν₋], [ν₊, ν₃/2]].
pub fn build_b(s: NuState) -> Mat2 {
    Mat2::new(-s.nu_3 * 0.5, s.nu_minus, s.nu_plus, s.nu_3 * 0.5)
}

/// I = B†B − 1/2.
pub fn hermitian_invariant(s: NuState) -> Mat2 {
    let b = build_b(s);
    b.adjoint() * b - Mat2::identity().scale(C64::new(0.5, 0.0))
}

/// ‖B(ν̇) − i[B(ν), H(t)]‖_F, zero up to rounding for every ν and t.
pub fn invariance_identity_residual(s: NuState, p: &ProfileSet, t: f64) -> Result<f64> {
    let (omega, f, g) = p.coefficients(t)?;
    let h = hamiltonian(omega, f, g);
    let lhs = build_b(nu_rhs_with(s, omega, f));
    let rhs = commutator(build_b(s), h).scale(I);
    Ok((lhs - rhs).frobenius_norm())
}

/// Closed form for f ≡ 0: ν₊ = ν₀₊ e^{−iQ}, ν₋ = ν₀₋ e^{+iQ}, ν₃ = ν₀₃ with
/// Q = ∫ω dτ. These signs follow from the ODE system above.
pub fn free_solution(ic: NuState, q_omega: f64) -> NuState {
    let phase = C64::from_polar(1.0, q_omega);
    NuState::new(ic.nu_plus * phase.conj(), ic.nu_minus * phase, ic.nu_3)
}

/// The free solution with the opposite exponent signs, ν± = ν₀± e^{±iQ}.
/// Kept only for the discrepancy report; it does not solve the ODE.
pub fn free_solution_swapped(ic: NuState, q_omega: f64) -> NuState {
    let phase = C64::from_polar(1.0, q_omega);
    NuState::new(ic.nu_plus * phase, ic.nu_minus * phase.conj(), ic.nu_3)
}

/// Fails when |f| exceeds `atol` anywhere on the grid.
pub fn require_free(p: &ProfileSet, grid: &[f64], atol: f64) -> Result<()> {
    for &t in grid {
        let magnitude = p.f.eval(t)?.norm();
        if magnitude > atol {
            return Err(Error::DriveNotZero { t, magnitude });
        }
    }
    Ok(())
}

/// Sampled solution of the ν-system with its quadrature channels.
#[derive(Debug, Clone, PartialEq)]
pub struct NuTrajectory {
    pub grid: Vec<f64>,
    pub states: Vec<NuState>,
    pub derivs: Vec<NuState>,
    /// ∫ω dτ
    pub q_omega: Vec<f64>,
    /// ∫(2g + ω) dτ
    pub q_g: Vec<f64>,
    /// ∫ḟ/f dτ on a continuous branch; `None` when f vanished somewhere.
    pub q_logf: Option<Vec<C64>>,
    pub stats: OdeStats,
}

impl NuTrajectory {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn b_at(&self, k: usize) -> Mat2 {
        build_b(self.states[k])
    }

    /// max_t |λ₁(t) − λ₁(t₀)| and max_t |λ₂(t) − λ₂(t₀)|.
    pub fn lambda_drift(&self) -> (f64, f64) {
        let (l1_0, l2_0) = lambda_invariants(self.states[0]);
        self.states.iter().fold((0.0, 0.0), |(d1, d2), s| {
            let (l1, l2) = lambda_invariants(*s);
            (d1.max((l1 - l1_0).norm()), d2.max((l2 - l2_0).abs()))
        })
    }
}

/// Integrates the ν-system together with ∫ω, ∫(2g+ω) and ∫ḟ/f.
pub fn integrate_nu(
    p: &ProfileSet,
    ic: NuState,
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
    dt_out: f64,
) -> Result<NuTrajectory> {
    let grid = uniform_grid(t0, t1, dt_out)?;
    integrate_nu_on(p, ic, &grid, &OdeOptions::new(rtol, atol))
}

pub fn integrate_nu_on(
    p: &ProfileSet,
    ic: NuState,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<NuTrajectory> {
    let mut y0 = [0.0; 10];
    ic.to_reals(&mut y0);
    let mut logf_ok = true;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let (omega, f, g) = p.coefficients(t)?;
        let s = NuState::from_reals(y);
        nu_rhs_with(s, omega, f).to_reals(dy);
        dy[6] = omega;
        dy[7] = 2.0 * g + omega;
        let (lre, lim) = if logf_ok && f.norm() > DRIVE_FLOOR {
            let r = p.f_dot(t)? / f;
            (r.re, r.im)
        } else {
            logf_ok = false;
            (0.0, 0.0)
        };
        dy[8] = lre;
        dy[9] = lim;
        Ok(())
    };
    let (ys, stats) = integrate(rhs, &y0, grid, opts)?;

    let states: Vec<NuState> = ys.iter().map(|y| NuState::from_reals(y)).collect();
    let derivs = grid
        .iter()
        .zip(&states)
        .map(|(&t, &s)| nu_rhs(t, s, p))
        .collect::<Result<Vec<_>>>()?;
    // the channel also has to be valid on the output grid itself
    let mut channel_ok = logf_ok;
    for &t in grid {
        if !channel_ok {
            break;
        }
        channel_ok = p.f.eval(t)?.norm() > DRIVE_FLOOR;
    }
    Ok(NuTrajectory {
        grid: grid.to_vec(),
        states,
        derivs,
        q_omega: ys.iter().map(|y| y[6]).collect(),
        q_g: ys.iter().map(|y| y[7]).collect(),
        q_logf: channel_ok.then(|| ys.iter().map(|y| C64::new(y[8], y[9])).collect()),
        stats,
    })
}

/// The su(2) generators expressed through B's coefficients; used by docs and
/// tests to confirm that `build_b` matches ν₋J₋ + ν₊J₊ + ν₃J₃.
pub fn build_b_from_generators(s: NuState) -> Mat2 {
    let ops = ladder_ops();
    ops.j_minus.scale(s.nu_minus) + ops.j_plus.scale(s.nu_plus) + ops.j3.scale(s.nu_3)
}

/// H(t) sampled on a grid.
pub fn hamiltonian_series(p: &ProfileSet, grid: &[f64]) -> Result<Vec<Mat2>> {
    grid.iter()
        .map(|&t| hamiltonian_at(p, t).map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{anticommutator, ONE};

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn ic_b() -> NuState {
        NuState::new(r(0.5), r(0.5), I)
    }

    #[test]
    fn ic_validation_examples() {
        let rep = validate_ic(NuState::canonical(), 1e-12);
        assert!(rep.passed);
        assert_eq!(rep.lambda1, ZERO);
        assert_eq!(rep.lambda2, 1.0);

        let rep = validate_ic(ic_b(), 1e-12);
        assert!(rep.passed);

        let rep = validate_ic(NuState::new(r(1.0), r(1.0), ZERO), 1e-12);
        assert!(!rep.passed);
        assert_eq!(rep.lambda1, ONE);
    }

    #[test]
    fn rhs_examples() {
        let p1 = ProfileSet::parse("2", "0", "0").unwrap();
        let d = nu_rhs(0.0, NuState::canonical(), &p1).unwrap();
        assert_eq!(d, NuState::new(ZERO, C64::new(0.0, 2.0), ZERO));

        let p = ProfileSet::parse("2", "0.5", "0").unwrap();
        let d = nu_rhs(0.0, NuState::canonical(), &p).unwrap();
        assert_eq!(
            d,
            NuState::new(ZERO, C64::new(0.0, 2.0), C64::new(0.0, -1.0))
        );
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_invariants(NuState::canonical()), (ZERO, 1.0));
        let (l1, l2) = lambda_invariants(ic_b());
        assert!(l1.norm() < 1e-15);
        assert!((l2 - 1.0).abs() < 1e-15);
        assert_eq!(
            lambda_invariants(NuState::new(ZERO, ZERO, r(2.0))),
            (ONE, 2.0)
        );
    }

    #[test]
    fn build_b_examples() {
        let ops = ladder_ops();
        assert_eq!(build_b(NuState::canonical()), ops.b);
        let b = build_b(ic_b());
        assert_eq!(
            b,
            Mat2::new(C64::new(0.0, -0.5), r(0.5), r(0.5), C64::new(0.0, 0.5))
        );
        assert!((b * b).max_abs() < 1e-15);
        let b0 = build_b(NuState::canonical());
        assert_eq!(anticommutator(b0, b0.adjoint()), Mat2::identity());
        for s in [
            NuState::canonical(),
            ic_b(),
            NuState::new(r(0.3), I, r(-1.2)),
        ] {
            assert!((build_b(s) - build_b_from_generators(s)).max_abs() < 1e-15);
        }
    }

    #[test]
    fn hermitian_invariant_spectrum() {
        assert_eq!(hermitian_invariant(NuState::canonical()), ladder_ops().j3);
        let inv = hermitian_invariant(ic_b());
        assert!((inv - inv.adjoint()).max_abs() < 1e-15);
        let mut ev = inv.eigenvalues().map(|z| z.re);
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 0.5).abs() < 1e-12 && (ev[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identity_residual_at_canonical() {
        let p1 = ProfileSet::parse("2", "0", "0").unwrap();
        assert!(invariance_identity_residual(NuState::canonical(), &p1, 0.0).unwrap() <= 1e-15);
    }

    #[test]
    fn free_solution_examples() {
        let t = 0.8;
        let s = free_solution(NuState::canonical(), 2.0 * t);
        assert!((s.nu_minus - C64::from_polar(1.0, 2.0 * t)).norm() < 1e-15);
        let s = free_solution(ic_b(), 1.234);
        assert!(lambda_invariants(s).0.norm() < 1e-15);
        assert_eq!(free_solution(ic_b(), 0.0), ic_b());
    }

    #[test]
    fn free_requirement() {
        let grid = [0.0, 1.0, 2.0];
        assert!(require_free(&ProfileSet::parse("2", "0", "0").unwrap(), &grid, 1e-12).is_ok());
        assert!(matches!(
            require_free(&ProfileSet::parse("2", "0.5", "0").unwrap(), &grid, 1e-12),
            Err(Error::DriveNotZero { .. })
        ));
    }

    #[test]
    fn logf_channel_disabled_for_free_oscillator() {
        let p1 = ProfileSet::parse("2", "0", "0").unwrap();
        let traj = integrate_nu(&p1, NuState::canonical(), 0.0, 1.0, 1e-10, 1e-12, 0.1).unwrap();
        assert!(traj.q_logf.is_none());
        let p4 = ProfileSet::parse("2+0.3*cos(t)", "0.4*exp(i*t)", "0").unwrap();
        let traj = integrate_nu(&p4, ic_b(), 0.0, 1.0, 1e-10, 1e-12, 0.1).unwrap();
        let q = traj.q_logf.unwrap();
        assert!((q[10] - C64::new(0.0, 1.0)).norm() < 1e-10);
    }
}
