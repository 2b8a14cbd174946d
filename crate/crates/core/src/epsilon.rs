//! Scalar linearization of the ν-system.
//!
//! With ν₊ = ε′²/2 the invariant condition reduces to the linear equation
//!
//! ```text
//! ε̈′ − (ḟ/f) ε̇′ + Ω′ ε′ = 0,   Ω′ = |f|² + ω²/4 + (i/2)ω̇ − (i/2)ω ḟ/f
//! ```
//!
//! and the gauge substitution ε′ = ε·exp(½∫ḟ/f) removes the first-derivative
//! term, leaving ε̈ + Ω ε = 0 with Ω = Ω′ + f̈/(2f) − 3ḟ²/(4f²). The other
//! coefficients follow as ν₃ = (ω ε′²/2 − iε′ε̇′)/f and ν₋ = −ν₃²/(2ε′²).
//!
//! Expanding λ₂ in terms of ε′ with X = (ω/2)ε′ − iε̇′ gives
//!
//! ```text
//! λ₂ = |ε′|⁴/4 + |ε′|²|X|²/(2|f|²) + |X|⁴/(4|f|⁴)
//! ```
//!
//! [`normalization_probe`] reports this next to the form
//! |ε′|⁴/4 · (1 + 2|X|²/|f|² + |X|⁴/|f|⁴), which differs from it in the last
//! two terms by a factor |ε′|² and |ε′|⁴ respectively.

use crate::algebra::{C64, I};
use crate::error::{Error, Result};
use crate::nusystem::{lambda_invariants, NuState, NuTrajectory, DRIVE_FLOOR};
use crate::ode::{integrate, uniform_grid, OdeOptions};
use crate::profile::{ProfileSample, ProfileSet};

/// Smallest |ν₊| for which the chain is considered nonsingular.
pub const NU_PLUS_FLOOR: f64 = 1e-10;
/// Smallest |ε′| accepted when reconstructing ν₋.
pub const EPS_PRIME_FLOOR: f64 = 1e-12;
/// The ε′ and ε equations are solved with tolerances this much tighter than
/// requested. Each carries a global error of order rtol, and the pointwise
/// gauge identity between them is checked at that same level.
pub const EPS_TOL_TIGHTENING: f64 = 0.1;

fn drive_checked(t: f64, s: &ProfileSample) -> Result<()> {
    let magnitude = s.f.norm();
    if magnitude <= DRIVE_FLOOR {
        return Err(Error::DriveVanishes { t, magnitude });
    }
    Ok(())
}

fn omega_primes_of(s: &ProfileSample) -> (C64, C64) {
    let log_rate = s.f_dot / s.f;
    let omega_p = C64::new(s.f.norm_sqr() + 0.25 * s.omega * s.omega, 0.5 * s.omega_dot)
        - I * 0.5 * s.omega * log_rate;
    let omega = omega_p + s.f_ddot / (s.f * 2.0) - log_rate * log_rate * 0.75;
    (omega_p, omega)
}

/// Fails with `DriveVanishes` at the first grid point where |f| ≤ 1e-12.
pub fn require_drive(p: &ProfileSet, grid: &[f64]) -> Result<()> {
    for &t in grid {
        drive_checked(t, &p.sample(t)?)?;
    }
    Ok(())
}

/// (Ω′(t), Ω(t)).
pub fn omega_primes(p: &ProfileSet, t: f64) -> Result<(C64, C64)> {
    let s = p.sample(t)?;
    drive_checked(t, &s)?;
    Ok(omega_primes_of(&s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsTrajectory {
    pub grid: Vec<f64>,
    /// (ε′, ε̇′)
    pub eps_prime: Vec<(C64, C64)>,
    /// (ε, ε̇)
    pub eps: Vec<(C64, C64)>,
    pub omega_prime: Vec<C64>,
    pub omega: Vec<C64>,
}

/// Integrates the ε′ and ε equations side by side from matched data:
/// ε(t₀) = ε′(t₀), ε̇(t₀) = ε̇′(t₀) − ε′(t₀) ḟ(t₀)/(2f(t₀)).
#[allow(clippy::too_many_arguments)]
pub fn integrate_eps_prime(
    p: &ProfileSet,
    eps0: C64,
    deps0: C64,
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
    dt_out: f64,
) -> Result<EpsTrajectory> {
    let grid = uniform_grid(t0, t1, dt_out)?;
    integrate_eps_prime_on(p, eps0, deps0, &grid, &OdeOptions::new(rtol, atol))
}

pub fn integrate_eps_prime_on(
    p: &ProfileSet,
    eps0: C64,
    deps0: C64,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<EpsTrajectory> {
    let mut samples = Vec::with_capacity(grid.len());
    for &t in grid {
        let s = p.sample(t)?;
        drive_checked(t, &s)?;
        samples.push(s);
    }
    let s0 = samples[0];
    let eps_dot0 = deps0 - eps0 * s0.f_dot / (s0.f * 2.0);
    let y0 = [
        eps0.re,
        eps0.im,
        deps0.re,
        deps0.im,
        eps0.re,
        eps0.im,
        eps_dot0.re,
        eps_dot0.im,
    ];
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let s = p.sample(t)?;
        drive_checked(t, &s)?;
        let (omega_p, omega) = omega_primes_of(&s);
        let ep = C64::new(y[0], y[1]);
        let dep = C64::new(y[2], y[3]);
        let e = C64::new(y[4], y[5]);
        let de = C64::new(y[6], y[7]);
        let ddep = s.f_dot / s.f * dep - omega_p * ep;
        let dde = -omega * e;
        dy.copy_from_slice(&[
            dep.re, dep.im, ddep.re, ddep.im, de.re, de.im, dde.re, dde.im,
        ]);
        Ok(())
    };
    let tight = OdeOptions {
        rtol: opts.rtol * EPS_TOL_TIGHTENING,
        atol: opts.atol * EPS_TOL_TIGHTENING,
        ..*opts
    };
    let (ys, _) = integrate(rhs, &y0, grid, &tight)?;
    let (omega_prime, omega): (Vec<C64>, Vec<C64>) = samples.iter().map(omega_primes_of).unzip();
    Ok(EpsTrajectory {
        grid: grid.to_vec(),
        eps_prime: ys
            .iter()
            .map(|y| (C64::new(y[0], y[1]), C64::new(y[2], y[3])))
            .collect(),
        eps: ys
            .iter()
            .map(|y| (C64::new(y[4], y[5]), C64::new(y[6], y[7])))
            .collect(),
        omega_prime,
        omega,
    })
}

/// max_t |ε′(t) − ε(t)·exp(Q_logf(t)/2)|, with Q_logf from the ν-integration.
pub fn gauge_residual(eps: &EpsTrajectory, nu: &NuTrajectory) -> Result<f64> {
    if eps.grid != nu.grid {
        return Err(Error::GridMismatch);
    }
    let q = nu
        .q_logf
        .as_ref()
        .ok_or_else(|| Error::SingularChain("the ∫ḟ/f channel is unavailable".into()))?;
    Ok(eps
        .eps_prime
        .iter()
        .zip(&eps.eps)
        .zip(q)
        .map(|(((ep, _), (e, _)), q)| (ep - e * (q * 0.5).exp()).norm())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqrtBranch {
    Principal,
    Negated,
}

/// ε′(t₀) = ±√(2ν₊), ε̇′(t₀) = ν̇₊ / ε′(t₀).
pub fn ic_from_nu(s: NuState, sdot: NuState, branch: SqrtBranch) -> Result<(C64, C64)> {
    if s.nu_plus.norm() <= NU_PLUS_FLOOR {
        return Err(Error::SingularChain(format!(
            "ν₊ = {} vanishes; the ε-chain needs ν₊ ≠ 0",
            s.nu_plus
        )));
    }
    let root = (s.nu_plus * 2.0).sqrt();
    let eps = match branch {
        SqrtBranch::Principal => root,
        SqrtBranch::Negated => -root,
    };
    Ok((eps, sdot.nu_plus / eps))
}

/// ν-triple from (ε′, ε̇′) given instantaneous ω and f.
pub fn nu_from_eps_prime_with(eps_p: C64, deps_p: C64, omega: f64, f: C64) -> Result<NuState> {
    if f.norm() <= DRIVE_FLOOR {
        return Err(Error::DriveVanishes {
            t: f64::NAN,
            magnitude: f.norm(),
        });
    }
    if eps_p.norm() <= EPS_PRIME_FLOOR {
        return Err(Error::SingularChain(format!("ε′ = {} vanishes", eps_p)));
    }
    let sq = eps_p * eps_p;
    let nu_plus = sq * 0.5;
    let nu_3 = (sq * (0.5 * omega) - I * eps_p * deps_p) / f;
    let nu_minus = -(nu_3 * nu_3) / (sq * 2.0);
    Ok(NuState::new(nu_plus, nu_minus, nu_3))
}

pub fn nu_from_eps_prime(eps_p: C64, deps_p: C64, p: &ProfileSet, t: f64) -> Result<NuState> {
    let (omega, f, _) = p.coefficients(t)?;
    nu_from_eps_prime_with(eps_p, deps_p, omega, f).map_err(|e| match e {
        Error::DriveVanishes { magnitude, .. } => Error::DriveVanishes { t, magnitude },
        other => other,
    })
}

/// ν(t) rebuilt from the ε′-trajectory at every grid point.
pub fn reconstruct(eps: &EpsTrajectory, p: &ProfileSet) -> Result<Vec<NuState>> {
    eps.grid
        .iter()
        .zip(&eps.eps_prime)
        .map(|(&t, &(ep, dep))| nu_from_eps_prime(ep, dep, p, t))
        .collect()
}

/// Sup-norm distance between two ν-sequences on the same grid.
pub fn chain_mismatch(a: &[NuState], b: &[NuState]) -> f64 {
    assert_eq!(a.len(), b.len(), "sequences must share a grid");
    a.iter()
        .zip(b)
        .map(|(x, y)| x.distance(*y))
        .fold(0.0, f64::max)
}

/// Residual of the second-order equation for ν₊
///
/// ```text
/// 2ν₊ν̈₊ − ν̇₊² − 2ν₊ν̇₊ ḟ/f + 4ν₊² Ω′
/// ```
///
/// evaluated along an integrated trajectory, normalized by
/// max(1, |ν₊|²|Ω′|). ν̈₊ comes from differentiating the right-hand side
/// along the flow. The expression equals 4f²λ₁ identically, so it is small
/// exactly when λ₁ = 0.
pub fn nonlinear_residual(traj: &NuTrajectory, p: &ProfileSet) -> Result<Vec<f64>> {
    traj.grid
        .iter()
        .zip(traj.states.iter().zip(&traj.derivs))
        .map(|(&t, (s, d))| {
            if s.nu_plus.norm() <= NU_PLUS_FLOOR {
                return Err(Error::SingularChain(format!("ν₊ vanishes at t = {}", t)));
            }
            let ps = p.sample(t)?;
            drive_checked(t, &ps)?;
            let (omega_p, _) = omega_primes_of(&ps);
            let ddnu_plus = I
                * (d.nu_3 * ps.f + s.nu_3 * ps.f_dot
                    - d.nu_plus * ps.omega
                    - s.nu_plus * ps.omega_dot);
            let np = s.nu_plus;
            let res = np * ddnu_plus * 2.0
                - d.nu_plus * d.nu_plus
                - np * d.nu_plus * (ps.f_dot / ps.f) * 2.0
                + np * np * omega_p * 4.0;
            Ok(res.norm() / (np.norm_sqr() * omega_p.norm()).max(1.0))
        })
        .collect()
}

/// One grid point of the normalization probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationSample {
    pub t: f64,
    /// λ₂ of the integrated ν-triple.
    pub lambda2_integrated: f64,
    /// λ₂ of the triple reconstructed from ε′.
    pub lambda2_reconstructed: f64,
    /// Direct expansion |ε′|⁴/4 + |ε′|²|X|²/(2|f|²) + |X|⁴/(4|f|⁴).
    pub expanded: f64,
    /// |ε′|⁴/4 · (1 + 2|X|²/|f|² + |X|⁴/|f|⁴).
    pub factored: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationProbe {
    pub samples: Vec<NormalizationSample>,
}

impl NormalizationProbe {
    /// max |λ₂(reconstructed) − λ₂(integrated)|
    pub fn max_direct_gap(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.lambda2_reconstructed - s.lambda2_integrated).abs())
            .fold(0.0, f64::max)
    }

    /// max |expanded − λ₂(reconstructed)|
    pub fn max_expansion_gap(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.expanded - s.lambda2_reconstructed).abs())
            .fold(0.0, f64::max)
    }

    /// max |factored − expanded|
    pub fn max_factored_gap(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.factored - s.expanded).abs())
            .fold(0.0, f64::max)
    }
}

pub fn normalization_probe(
    eps: &EpsTrajectory,
    nu: &NuTrajectory,
    p: &ProfileSet,
) -> Result<NormalizationProbe> {
    if eps.grid != nu.grid {
        return Err(Error::GridMismatch);
    }
    let mut samples = Vec::with_capacity(eps.grid.len());
    for (k, &t) in eps.grid.iter().enumerate() {
        let (omega, f, _) = p.coefficients(t)?;
        let (ep, dep) = eps.eps_prime[k];
        let rec = nu_from_eps_prime_with(ep, dep, omega, f)?;
        let x = ep * (0.5 * omega) - I * dep;
        let (a2, x2, f2) = (ep.norm_sqr(), x.norm_sqr(), f.norm_sqr());
        samples.push(NormalizationSample {
            t,
            lambda2_integrated: lambda_invariants(nu.states[k]).1,
            lambda2_reconstructed: lambda_invariants(rec).1,
            expanded: a2 * a2 / 4.0 + a2 * x2 / (2.0 * f2) + x2 * x2 / (4.0 * f2 * f2),
            factored: a2 * a2 / 4.0 * (1.0 + 2.0 * x2 / f2 + x2 * x2 / (f2 * f2)),
        });
    }
    Ok(NormalizationProbe { samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn omega_primes_constant_coefficients() {
        let p3 = ProfileSet::parse("2", "0.5", "0.1").unwrap();
        let (op, o) = omega_primes(&p3, 1.3).unwrap();
        assert!((op - r(1.25)).norm() < 1e-15);
        assert!((o - r(1.25)).norm() < 1e-15);
    }

    #[test]
    fn omega_primes_rotating_drive() {
        let p = ProfileSet::parse("2", "0.4*exp(i*t)", "0").unwrap();
        let t = 0.9;
        let (op, o) = omega_primes(&p, t).unwrap();
        // ḟ/f = i: Ω′ = 0.16 + 1 + 0 − (i/2)·2·i = 2.16
        assert!((op - r(2.16)).norm() < 1e-14);
        assert!((o - op - r(0.25)).norm() < 1e-14);
    }

    #[test]
    fn omega_dot_term_vanishes_for_constant_omega() {
        let p = ProfileSet::parse("3", "0.5", "0").unwrap();
        assert_eq!(omega_primes(&p, 0.4).unwrap().0.im, 0.0);
        let p = ProfileSet::parse("3+t", "0.5", "0").unwrap();
        assert_eq!(omega_primes(&p, 0.4).unwrap().0.im, 0.5);
    }

    #[test]
    fn omega_primes_reject_vanishing_drive() {
        let p1 = ProfileSet::parse("2", "0", "0").unwrap();
        assert!(matches!(
            omega_primes(&p1, 0.0),
            Err(Error::DriveVanishes { .. })
        ));
    }

    #[test]
    fn ic_examples() {
        let s = NuState::new(r(0.5), r(0.5), I);
        let d = NuState::new(C64::new(0.0, 1.0), r(0.0), r(0.0));
        let (e, de) = ic_from_nu(s, d, SqrtBranch::Principal).unwrap();
        assert_eq!(e, r(1.0));
        assert_eq!(de, C64::new(0.0, 1.0));
        let (e, _) = ic_from_nu(s, d, SqrtBranch::Negated).unwrap();
        assert_eq!(e, r(-1.0));
        assert!(matches!(
            ic_from_nu(NuState::canonical(), d, SqrtBranch::Principal),
            Err(Error::SingularChain(_))
        ));
    }

    #[test]
    fn reconstruction_from_stationary_eps() {
        let nu = nu_from_eps_prime_with(r(1.0), r(0.0), 2.0, r(0.5)).unwrap();
        assert_eq!(nu.nu_3, r(2.0));
        assert_eq!(nu.nu_plus, r(0.5));
        let (l1, _) = lambda_invariants(nu);
        assert!(l1.norm() <= 1e-14);
    }

    #[test]
    fn reconstructed_triples_have_zero_lambda1() {
        let samples = [
            (
                C64::new(0.3, -1.1),
                C64::new(2.0, 0.4),
                1.7,
                C64::new(0.2, 0.9),
            ),
            (
                C64::new(-2.0, 0.5),
                C64::new(-0.1, 0.0),
                -0.3,
                C64::new(1.5, -0.2),
            ),
            (
                C64::new(0.01, 0.02),
                C64::new(3.0, 3.0),
                5.0,
                C64::new(0.05, 0.0),
            ),
        ];
        for (ep, dep, w, f) in samples {
            let nu = nu_from_eps_prime_with(ep, dep, w, f).unwrap();
            let scale = nu.nu_3.norm_sqr().max(1.0);
            assert!(lambda_invariants(nu).0.norm() / scale <= 1e-14);
        }
    }

    #[test]
    fn eps_prime_constant_coefficient_closed_form() {
        let p3 = ProfileSet::parse("2", "0.5", "0.1").unwrap();
        let traj = integrate_eps_prime(&p3, r(1.0), r(0.0), 0.0, 10.0, 1e-10, 1e-12, 0.01).unwrap();
        let k = 1.25f64.sqrt();
        for (t, (ep, _)) in traj.grid.iter().zip(&traj.eps_prime) {
            assert!((ep - r((k * t).cos())).norm() < 1e-8, "t = {}", t);
        }
        // constant f: both equations coincide
        for ((a, da), (b, db)) in traj.eps_prime.iter().zip(&traj.eps) {
            assert!((a - b).norm() < 1e-12 && (da - db).norm() < 1e-12);
        }
    }

    #[test]
    fn eps_prime_is_linear_in_initial_data() {
        let p4 = ProfileSet::parse("2+0.3*cos(t)", "0.4*exp(i*t)", "0").unwrap();
        let (e0, de0) = (C64::new(0.7, 0.2), C64::new(-0.1, 0.5));
        let a = integrate_eps_prime(&p4, e0, de0, 0.0, 3.0, 1e-11, 1e-13, 0.05).unwrap();
        let b =
            integrate_eps_prime(&p4, e0 * 2.0, de0 * 2.0, 0.0, 3.0, 1e-11, 1e-13, 0.05).unwrap();
        for ((x, _), (y, _)) in a.eps_prime.iter().zip(&b.eps_prime) {
            assert!((y - x * 2.0).norm() < 1e-9);
        }
    }

    #[test]
    fn eps_integration_rejects_free_oscillator() {
        let p1 = ProfileSet::parse("2", "0", "0").unwrap();
        let res = integrate_eps_prime(&p1, r(1.0), r(0.0), 0.0, 1.0, 1e-8, 1e-10, 0.1);
        assert!(matches!(res, Err(Error::DriveVanishes { .. })));
    }
}
