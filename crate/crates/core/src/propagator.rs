//! Brute-force evolution operator: i dU/dt = H(t) U, U(t₀) = 1.
//!
//! This is the independent oracle for everything built from the ν-system.
//! It shares only the integrator with [`crate::nusystem`].

use crate::algebra::{hamiltonian_at, Mat2, Vec2, C64, I};
use crate::error::Result;
use crate::ode::{integrate, uniform_grid, OdeOptions, OdeStats};
use crate::profile::ProfileSet;

#[derive(Debug, Clone, PartialEq)]
pub struct UTrajectory {
    pub grid: Vec<f64>,
    pub u: Vec<Mat2>,
    pub stats: OdeStats,
}

impl UTrajectory {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn max_unitarity_defect(&self) -> f64 {
        self.u
            .iter()
            .map(|&u| unitarity_defect(u))
            .fold(0.0, f64::max)
    }
}

fn mat_to_reals(m: Mat2, out: &mut [f64]) {
    for (k, z) in m.to_flat().iter().enumerate() {
        out[2 * k] = z.re;
        out[2 * k + 1] = z.im;
    }
}

fn mat_from_reals(y: &[f64]) -> Mat2 {
    Mat2::from_flat([
        C64::new(y[0], y[1]),
        C64::new(y[2], y[3]),
        C64::new(y[4], y[5]),
        C64::new(y[6], y[7]),
    ])
}

pub fn integrate_u(
    p: &ProfileSet,
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
    dt_out: f64,
) -> Result<UTrajectory> {
    let grid = uniform_grid(t0, t1, dt_out)?;
    integrate_u_on(p, &grid, &OdeOptions::new(rtol, atol))
}

pub fn integrate_u_on(p: &ProfileSet, grid: &[f64], opts: &OdeOptions) -> Result<UTrajectory> {
    let mut y0 = [0.0; 8];
    mat_to_reals(Mat2::identity(), &mut y0);
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let h = hamiltonian_at(p, t)?;
        mat_to_reals((h * mat_from_reals(y)).scale(-I), dy);
        Ok(())
    };
    let (ys, stats) = integrate(rhs, &y0, grid, opts)?;
    Ok(UTrajectory {
        grid: grid.to_vec(),
        u: ys.iter().map(|y| mat_from_reals(y)).collect(),
        stats,
    })
}

/// ‖U†U − 1‖_F
pub fn unitarity_defect(u: Mat2) -> f64 {
    (u.adjoint() * u - Mat2::identity()).frobenius_norm()
}

/// U B₀ U†
pub fn conjugated_invariant(u: Mat2, b0: Mat2) -> Mat2 {
    u * b0 * u.adjoint()
}

/// Unitary polar factor U(U†U)^{-1/2}, the unitary closest to `u` in the
/// Frobenius norm. Removes the integrator's unitarity drift.
pub fn nearest_unitary(u: Mat2) -> Mat2 {
    let p = u.adjoint() * u;
    // √P = (P + √det P)/√(tr P + 2√det P) for 2×2 positive P
    let sd = p.det().re.max(0.0).sqrt();
    let norm = (p.trace().re + 2.0 * sd).sqrt();
    let root = (p + Mat2::identity().scale(C64::new(sd, 0.0))).scale(C64::new(1.0 / norm, 0.0));
    let det = root.det();
    let inv = Mat2::new(root.0[1][1], -root.0[0][1], -root.0[1][0], root.0[0][0]).scale(1.0 / det);
    u * inv
}

pub fn evolve_state(u: Mat2, psi0: Vec2) -> Vec2 {
    u.apply(psi0)
}
