//! Time-dependent Hamiltonian coefficients ω(t), f(t), g(t).
//!
//! Profiles are written in a small closed-form expression language (see
//! [`parse`]) and differentiated symbolically, so the derivatives ω̇, ḟ, f̈
//! used by the linearization chain carry no finite-difference error.

mod expr;
mod parse;

use num_complex::Complex64;
use thiserror::Error;

pub use expr::{Expr, Func};
pub use parse::parse;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("non-constant exponent under `^`{}", .offset.map(|o| format!(" at byte {}", o)).unwrap_or_default())]
    NonConstantExponent { offset: Option<usize> },
    #[error("division by zero at t = {t}")]
    DivisionByZero { t: f64 },
    #[error("{func} evaluated at its branch point at t = {t}")]
    BranchPoint { func: &'static str, t: f64 },
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("non-differentiable construct: {0}")]
    NotDifferentiable(String),
    #[error("profile `{name}` is not real: Im = {imag:e} at t = {t}")]
    NotReal {
        name: &'static str,
        t: f64,
        imag: f64,
    },
}

/// Outcome of a reality check over a sample grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealityReport {
    pub passed: bool,
    pub worst_t: f64,
    pub worst_imag: f64,
}

/// Checks that `e` is real (|Im| ≤ `tol`) at every grid point.
pub fn validate_real(e: &Expr, grid: &[f64], tol: f64) -> Result<RealityReport, ProfileError> {
    assert!(!grid.is_empty(), "validate_real needs a nonempty grid");
    let mut worst_t = grid[0];
    let mut worst_imag = 0.0_f64;
    for &t in grid {
        let im = e.eval(t)?.im.abs();
        if im > worst_imag {
            worst_imag = im;
            worst_t = t;
        }
    }
    Ok(RealityReport {
        passed: worst_imag <= tol,
        worst_t,
        worst_imag,
    })
}

/// All coefficient values needed at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub omega: f64,
    pub omega_dot: f64,
    pub f: Complex64,
    pub f_dot: Complex64,
    pub f_ddot: Complex64,
    pub g: f64,
}

/// ω, f, g together with their symbolic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSet {
    pub omega: Expr,
    pub f: Expr,
    pub g: Expr,
    omega_dot: Expr,
    f_dot: Expr,
    f_ddot: Expr,
}

impl ProfileSet {
    pub fn new(omega: Expr, f: Expr, g: Expr) -> Result<Self, ProfileError> {
        let omega_dot = omega.differentiate()?;
        let f_dot = f.differentiate()?;
        let f_ddot = f_dot.differentiate()?;
        Ok(ProfileSet {
            omega,
            f,
            g,
            omega_dot,
            f_dot,
            f_ddot,
        })
    }

    pub fn parse(omega: &str, f: &str, g: &str) -> Result<Self, ProfileError> {
        ProfileSet::new(parse(omega)?, parse(f)?, parse(g)?)
    }

    /// Checks ω and g for reality on the grid.
    pub fn validate(&self, grid: &[f64], tol: f64) -> Result<(), ProfileError> {
        for (name, e) in [("omega", &self.omega), ("g", &self.g)] {
            let report = validate_real(e, grid, tol)?;
            if !report.passed {
                return Err(ProfileError::NotReal {
                    name,
                    t: report.worst_t,
                    imag: report.worst_imag,
                });
            }
        }
        Ok(())
    }

    /// (ω, f, g) at `t`; ω and g are taken as their real parts.
    pub fn coefficients(&self, t: f64) -> Result<(f64, Complex64, f64), ProfileError> {
        Ok((self.omega.eval(t)?.re, self.f.eval(t)?, self.g.eval(t)?.re))
    }

    pub fn omega_dot(&self, t: f64) -> Result<f64, ProfileError> {
        Ok(self.omega_dot.eval(t)?.re)
    }

    pub fn f_dot(&self, t: f64) -> Result<Complex64, ProfileError> {
        self.f_dot.eval(t)
    }

    pub fn sample(&self, t: f64) -> Result<ProfileSample, ProfileError> {
        let (omega, f, g) = self.coefficients(t)?;
        Ok(ProfileSample {
            omega,
            omega_dot: self.omega_dot(t)?,
            f,
            f_dot: self.f_dot.eval(t)?,
            f_ddot: self.f_ddot.eval(t)?,
            g,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid_0_10() -> Vec<f64> {
        (0..=100).map(|k| k as f64 * 0.1).collect()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(
            parse("2+0.5*sin(t)").unwrap().eval(0.0).unwrap(),
            Complex64::new(2.0, 0.0)
        );
        let z = parse("exp(i*t)").unwrap().eval(PI).unwrap();
        assert!((z - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(
            parse("1/t").unwrap().eval(0.0),
            Err(ProfileError::DivisionByZero { t: 0.0 })
        );
        assert!(matches!(
            parse("ln(t)").unwrap().eval(0.0),
            Err(ProfileError::BranchPoint { func: "ln", .. })
        ));
        assert!(matches!(
            parse("sqrt(t-1)").unwrap().eval(1.0),
            Err(ProfileError::BranchPoint { func: "sqrt", .. })
        ));
    }

    #[test]
    fn derivative_examples() {
        let d = parse("sin(t)").unwrap().differentiate().unwrap();
        assert_eq!(d, parse("cos(t)").unwrap());
        let d = parse("0.4*exp(i*t)").unwrap().differentiate().unwrap();
        let want = parse("0.4*i*exp(i*t)").unwrap();
        for t in [0.0, 0.7, 2.3] {
            assert!((d.eval(t).unwrap() - want.eval(t).unwrap()).norm() < 1e-15);
        }
        let d = parse("t^3").unwrap().differentiate().unwrap();
        assert_eq!(d.eval(2.0).unwrap(), Complex64::new(12.0, 0.0));
    }

    #[test]
    fn reality_examples() {
        let grid = grid_0_10();
        assert!(
            validate_real(&parse("2+0.5*sin(t)").unwrap(), &grid, 1e-12)
                .unwrap()
                .passed
        );
        let r = validate_real(&parse("i*t").unwrap(), &grid, 1e-12).unwrap();
        assert!(!r.passed);
        assert_eq!(r.worst_t, 10.0);
        assert_eq!(r.worst_imag, 10.0);
        assert!(
            validate_real(&parse("exp(i*t)+exp(-i*t)").unwrap(), &grid, 1e-12)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn profile_set_rejects_complex_omega() {
        let p = ProfileSet::parse("i*t", "0", "0").unwrap();
        assert!(matches!(
            p.validate(&grid_0_10(), 1e-12),
            Err(ProfileError::NotReal { name: "omega", .. })
        ));
    }

    #[test]
    fn second_derivative_of_drive() {
        let p = ProfileSet::parse("2", "0.4*exp(i*t)", "0").unwrap();
        let s = p.sample(0.3).unwrap();
        assert!((s.f_dot / s.f - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((s.f_ddot / s.f + 1.0).norm() < 1e-15);
    }
}
