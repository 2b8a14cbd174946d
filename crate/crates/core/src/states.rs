//! Dynamic vacuum, Fock and coherent states, and the Lewis–Riesenfeld phases.
//!
//! The vacuum |0;t⟩ is the transported null vector U(t)|0_B(t₀)⟩ of the
//! invariant, which satisfies both B(t)|0;t⟩ = 0 and the Schrödinger
//! equation. Closed-form amplitude formulas are evaluated alongside it as
//! cross-checks only.

use std::f64::consts::PI;

use crate::algebra::{Mat2, Vec2, C64, ZERO};
use crate::error::{Error, Result};
use crate::grassmann::{coherent_in, Basis, GrassmannState};
use crate::nusystem::{build_b, lambda_invariants, NuTrajectory};
use crate::propagator::{conjugated_invariant, nearest_unitary, UTrajectory};

/// |λ₁| above which B(t₀) is not treated as rank one.
pub const RANK_ONE_TOL: f64 = 1e-10;
/// Smallest |ν±| at which the amplitude ratios are evaluated.
pub const AMPLITUDE_FLOOR: f64 = 1e-3;

/// Unit vector spanning the kernel of a rank-one 2×2 matrix, taken from the
/// better-conditioned row. `None` for the zero matrix.
pub fn null_vector(m: Mat2) -> Option<Vec2> {
    let a = Vec2::new(m.0[0][1], -m.0[0][0]);
    let b = Vec2::new(m.0[1][1], -m.0[1][0]);
    let v = if b.norm() > a.norm() { b } else { a };
    if v.norm() <= f64::MIN_POSITIVE {
        return None;
    }
    Some(v.normalized())
}

/// Phase convention: the larger-magnitude component (the first one on a tie)
/// is made real and positive.
pub fn fix_phase(v: Vec2) -> Vec2 {
    let lead = if v.0[1].norm() > v.0[0].norm() {
        v.0[1]
    } else {
        v.0[0]
    };
    if lead == ZERO {
        return v;
    }
    v.scale(lead.conj() / lead.norm())
}

/// Rotates `v` so that ⟨reference|v⟩ is real and positive.
pub fn align_phase(v: Vec2, reference: Vec2) -> Vec2 {
    let ov = v.inner(reference);
    if ov == ZERO {
        return v;
    }
    v.scale(ov / ov.norm())
}

/// Unwraps a sequence of angles so consecutive values differ by at most π.
pub fn unwrap_phases(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut offset = 0.0;
    for (k, &a) in raw.iter().enumerate() {
        if k > 0 {
            let prev = raw[k - 1];
            let mut d = a - prev;
            while d > PI {
                d -= 2.0 * PI;
                offset -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
                offset += 2.0 * PI;
            }
        }
        out.push(a + offset);
    }
    out
}

/// Dynamic Fock states and the frame used for coherent states.
#[derive(Debug, Clone, PartialEq)]
pub struct VacuumTrajectory {
    pub grid: Vec<f64>,
    /// |0;t⟩ = U(t)|0_B(t₀)⟩, fixed so the largest component at t₀ is real positive
    pub vacuum: Vec<Vec2>,
    /// |1;t⟩ = B†(t)|0;t⟩
    pub excited: Vec<Vec2>,
    /// Invariant B(t) = U(t)B₀U†(t) transported with the same propagator.
    pub invariant: Vec<Mat2>,
}

impl VacuumTrajectory {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn basis_at(&self, k: usize) -> Basis {
        Basis::Dynamic {
            t: self.grid[k],
            frame: [self.vacuum[k], self.excited[k]],
        }
    }

    /// max over the grid of |⟨0|0⟩ − 1|, |⟨1|1⟩ − 1|, |⟨0|1⟩|.
    pub fn orthonormality_defect(&self) -> f64 {
        self.vacuum
            .iter()
            .zip(&self.excited)
            .map(|(v0, v1)| {
                (v0.inner(*v0).re - 1.0)
                    .abs()
                    .max((v1.inner(*v1).re - 1.0).abs())
                    .max(v0.inner(*v1).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Transports the kernel of B₀ with the oracle propagator, projected onto
/// the nearest unitary at every point so the frame stays orthonormal.
pub fn vacuum_oracle(u: &UTrajectory, b0: Mat2) -> Result<VacuumTrajectory> {
    let lambda1 = (b0 * b0).max_abs();
    if lambda1 > RANK_ONE_TOL {
        return Err(Error::NotRankOne { lambda1 });
    }
    let null0 = fix_phase(null_vector(b0).ok_or(Error::NotRankOne { lambda1 })?);
    let excited0 = b0.adjoint().apply(null0);
    let w: Vec<Mat2> = u.u.iter().map(|m| nearest_unitary(*m)).collect();
    let vacuum: Vec<Vec2> = w.iter().map(|m| m.apply(null0)).collect();
    let excited: Vec<Vec2> = w.iter().map(|m| m.apply(excited0)).collect();
    let invariant = w.iter().map(|m| conjugated_invariant(*m, b0)).collect();
    Ok(VacuumTrajectory {
        grid: u.grid.clone(),
        vacuum,
        excited,
        invariant,
    })
}

/// max_t ‖B(t)|0;t⟩‖ with B from the ν-system.
pub fn null_transport_residual(vac: &VacuumTrajectory, nu: &NuTrajectory) -> Result<f64> {
    if vac.grid != nu.grid {
        return Err(Error::GridMismatch);
    }
    Ok(vac
        .vacuum
        .iter()
        .enumerate()
        .map(|(k, v)| nu.b_at(k).apply(*v).norm())
        .fold(0.0, f64::max))
}

/// Matrix elements ⟨e_m|M|e_n⟩ in a frame.
pub fn in_frame(m: Mat2, frame: &[Vec2; 2]) -> Mat2 {
    let el = |i: usize, j: usize| frame[i].inner(m.apply(frame[j]));
    Mat2::new(el(0, 0), el(0, 1), el(1, 0), el(1, 1))
}

/// |ζ;t⟩ = (1 + ζζ*/2)|0;t⟩ − ζ|1;t⟩ in the dynamic frame at grid index `k`.
pub fn coherent_state(vac: &VacuumTrajectory, k: usize) -> GrassmannState {
    coherent_in(vac.basis_at(k), true)
}

/// Amplitudes (α₀, α₁) of a candidate vacuum with the bras/kets it is
/// annihilated by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeSample {
    pub state: Vec2,
    /// ‖B(t)·state‖
    pub b_residual: f64,
    /// ‖B†(t)·state‖
    pub b_dag_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticVacuum {
    pub grid: Vec<f64>,
    /// α₁/α₀ = ν₃/(2ν₋), |α₀| = √|ν₋|, α₀ ∝ e^{(i/2)(arg ν₋ − ∫(2g+ω))}.
    pub derived: Vec<Option<AmplitudeSample>>,
    /// α₁/α₀ = ν₃*/(2ν₊*), α₀ = √|ν₊| e^{−(i/2)(arg ν₊ + ∫(2g+ω))}.
    pub conjugate: Vec<Option<AmplitudeSample>>,
}

/// B(t) in the dynamic frame at grid index `k`; equal to the static b up to
/// the propagator's unitarity defect.
pub fn invariant_in_frame(vac: &VacuumTrajectory, k: usize) -> Mat2 {
    in_frame(vac.invariant[k], &[vac.vacuum[k], vac.excited[k]])
}

/// Which operator a convention's state is annihilated by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConventionSummary {
    pub points: usize,
    pub max_b_residual: f64,
    pub max_b_dag_residual: f64,
    pub min_b_residual: f64,
    pub max_norm_defect: f64,
}

fn summarize(samples: &[Option<AmplitudeSample>]) -> Option<ConventionSummary> {
    let present: Vec<&AmplitudeSample> = samples.iter().flatten().collect();
    if present.is_empty() {
        return None;
    }
    Some(ConventionSummary {
        points: present.len(),
        max_b_residual: present.iter().map(|s| s.b_residual).fold(0.0, f64::max),
        max_b_dag_residual: present.iter().map(|s| s.b_dag_residual).fold(0.0, f64::max),
        min_b_residual: present
            .iter()
            .map(|s| s.b_residual)
            .fold(f64::INFINITY, f64::min),
        max_norm_defect: present
            .iter()
            .map(|s| (s.state.norm() - 1.0).abs())
            .fold(0.0, f64::max),
    })
}

impl AnalyticVacuum {
    pub fn derived_summary(&self) -> Option<ConventionSummary> {
        summarize(&self.derived)
    }

    pub fn conjugate_summary(&self) -> Option<ConventionSummary> {
        summarize(&self.conjugate)
    }

    /// min over well-conditioned points of |⟨oracle|derived⟩|, and the
    /// largest deviation of arg⟨oracle|derived⟩ from its first value.
    pub fn fidelity(&self, vac: &VacuumTrajectory) -> Result<Option<(f64, f64)>> {
        if vac.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        let overlaps: Vec<C64> = self
            .derived
            .iter()
            .zip(&vac.vacuum)
            .filter_map(|(d, v)| d.map(|d| v.inner(d.state)))
            .collect();
        let Some(first) = overlaps.first() else {
            return Ok(None);
        };
        let ref_phase = first / first.norm();
        let min_fid = overlaps
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min);
        let drift = overlaps
            .iter()
            .map(|z| (z * ref_phase.conj()).arg().abs())
            .fold(0.0, f64::max);
        Ok(Some((min_fid, drift)))
    }
}

fn amplitude_sample(b: Mat2, state: Vec2) -> AmplitudeSample {
    AmplitudeSample {
        state,
        b_residual: b.apply(state).norm(),
        b_dag_residual: b.adjoint().apply(state).norm(),
    }
}

/// Evaluates both closed-form amplitude conventions along a ν-trajectory.
pub fn vacuum_analytic(nu: &NuTrajectory) -> AnalyticVacuum {
    let arg_minus = unwrap_phases(
        &nu.states
            .iter()
            .map(|s| s.nu_minus.arg())
            .collect::<Vec<_>>(),
    );
    let arg_plus = unwrap_phases(
        &nu.states
            .iter()
            .map(|s| s.nu_plus.arg())
            .collect::<Vec<_>>(),
    );
    let mut derived = Vec::with_capacity(nu.len());
    let mut conjugate = Vec::with_capacity(nu.len());
    for (k, s) in nu.states.iter().enumerate() {
        let b = build_b(*s);
        let q = nu.q_g[k];
        derived.push((s.nu_minus.norm() >= AMPLITUDE_FLOOR).then(|| {
            let a0 = C64::from_polar(s.nu_minus.norm().sqrt(), 0.5 * (arg_minus[k] - q));
            let a1 = a0 * s.nu_3 / (s.nu_minus * 2.0);
            amplitude_sample(b, Vec2::new(a0, a1))
        }));
        conjugate.push((s.nu_plus.norm() >= AMPLITUDE_FLOOR).then(|| {
            let a0 = C64::from_polar(s.nu_plus.norm().sqrt(), -0.5 * (arg_plus[k] + q));
            let a1 = a0 * s.nu_3.conj() / (s.nu_plus.conj() * 2.0);
            amplitude_sample(b, Vec2::new(a0, a1))
        }));
    }
    AnalyticVacuum {
        grid: nu.grid.clone(),
        derived,
        conjugate,
    }
}

/// Normalized eigenvectors of the Hermitian invariant B†B at every grid
/// point: |0̃⟩ spans ker B, |1̃⟩ spans ker B†. Gauge: `fix_phase` at t₀, then
/// discrete parallel transport (successive overlaps real positive).
pub fn tilde_states(nu: &NuTrajectory) -> Result<Vec<[Vec2; 2]>> {
    let mut out: Vec<[Vec2; 2]> = Vec::with_capacity(nu.len());
    for k in 0..nu.len() {
        let b = nu.b_at(k);
        let (l1, _) = lambda_invariants(nu.states[k]);
        let e0 = null_vector(b).ok_or(Error::NotRankOne { lambda1: l1.norm() })?;
        let e1 = null_vector(b.adjoint()).ok_or(Error::NotRankOne { lambda1: l1.norm() })?;
        let pair = match out.last() {
            None => [fix_phase(e0), fix_phase(e1)],
            Some(prev) => [align_phase(e0, prev[0]), align_phase(e1, prev[1])],
        };
        out.push(pair);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSeries {
    pub grid: Vec<f64>,
    pub phi0: Vec<f64>,
    pub phi1: Vec<f64>,
}

/// φₙ(t) = unwrapped arg⟨ñ(t)|U(t)|ñ(t₀)⟩.
pub fn lr_phases(u: &UTrajectory, tilde: &[[Vec2; 2]]) -> Result<PhaseSeries> {
    if u.len() != tilde.len() {
        return Err(Error::GridMismatch);
    }
    let mut raw = [Vec::with_capacity(u.len()), Vec::with_capacity(u.len())];
    for (k, (m, pair)) in u.u.iter().zip(tilde).enumerate() {
        for n in 0..2 {
            let ov = pair[n].inner(m.apply(tilde[0][n]));
            if ov.norm() < 0.5 {
                return Err(Error::GridTooCoarse(format!(
                    "|⟨{}̃|U|{}̃(t₀)⟩| = {:.3} at t = {}",
                    n,
                    n,
                    ov.norm(),
                    u.grid[k]
                )));
            }
            raw[n].push(ov.arg());
        }
    }
    Ok(PhaseSeries {
        grid: u.grid.clone(),
        phi0: unwrap_phases(&raw[0]),
        phi1: unwrap_phases(&raw[1]),
    })
}

/// Cumulative integral on a (possibly nonuniform) grid using a three-point
/// quadratic rule per interval; falls back to trapezoid for two points.
pub fn cumulative_simpson(grid: &[f64], values: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * (grid[1] - grid[0]) * (values[0] + values[1]);
        return out;
    }
    for k in 0..n - 1 {
        // fit through three consecutive nodes that contain [t_k, t_{k+1}]
        let j = if k + 2 < n { k } else { k - 1 };
        let (x0, x1, x2) = (grid[j], grid[j + 1], grid[j + 2]);
        let (y0, y1, y2) = (values[j], values[j + 1], values[j + 2]);
        let (a, b) = (grid[k], grid[k + 1]);
        // ∫_a^b of the Lagrange interpolant, shifted to limit cancellation
        let shift = a;
        let shifted = |x: f64| {
            let (s0, s1, s2) = (x0 - shift, x1 - shift, x2 - shift);
            let l = |xa: f64, xb: f64, xi: f64| {
                let p = x * x * x / 3.0 - (xa + xb) * x * x / 2.0 + xa * xb * x;
                p / ((xi - xa) * (xi - xb))
            };
            y0 * l(s1, s2, s0) + y1 * l(s0, s2, s1) + y2 * l(s0, s1, s2)
        };
        out[k + 1] = out[k] + shifted(b - shift) - shifted(0.0);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSplit {
    /// φ = φ₁ − φ₀
    pub phi: Vec<f64>,
    pub geometric: Vec<f64>,
    pub dynamical: Vec<f64>,
    /// ⟨1̃|H|1̃⟩ − ⟨0̃|H|0̃⟩
    pub energy_gap: Vec<f64>,
}

/// φ^G = φ + ∫(⟨1̃|H|1̃⟩ − ⟨0̃|H|0̃⟩)dt, φ^D = φ − φ^G.
pub fn geometric_dynamical_split(
    phases: &PhaseSeries,
    tilde: &[[Vec2; 2]],
    hamiltonians: &[Mat2],
) -> Result<PhaseSplit> {
    let n = phases.grid.len();
    if tilde.len() != n || hamiltonians.len() != n {
        return Err(Error::GridMismatch);
    }
    let energy_gap: Vec<f64> = tilde
        .iter()
        .zip(hamiltonians)
        .map(|(pair, h)| pair[1].inner(h.apply(pair[1])).re - pair[0].inner(h.apply(pair[0])).re)
        .collect();
    let integral = cumulative_simpson(&phases.grid, &energy_gap);
    let phi: Vec<f64> = phases
        .phi1
        .iter()
        .zip(&phases.phi0)
        .map(|(a, b)| a - b)
        .collect();
    let geometric: Vec<f64> = phi.iter().zip(&integral).map(|(p, i)| p + i).collect();
    let dynamical = phi.iter().zip(&geometric).map(|(p, g)| p - g).collect();
    Ok(PhaseSplit {
        phi,
        geometric,
        dynamical,
        energy_gap,
    })
}

fn uniform_step(grid: &[f64], needed: usize) -> Result<f64> {
    if grid.len() < needed {
        return Err(Error::GridTooShort {
            needed,
            got: grid.len(),
        });
    }
    let h = grid[1] - grid[0];
    for w in grid.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300) {
            return Err(Error::NonUniformGrid { t: w[0] });
        }
    }
    Ok(h)
}

/// ‖i(ψ_{k+1} − ψ_{k−1})/(2h) − H ψ_k‖ at interior points.
pub fn schrodinger_residual(
    states: &[Vec2],
    grid: &[f64],
    hamiltonians: &[Mat2],
) -> Result<Vec<f64>> {
    if states.len() != grid.len() || hamiltonians.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let h = uniform_step(grid, 3)?;
    let i2h = C64::new(0.0, 1.0 / (2.0 * h));
    Ok((1..grid.len() - 1)
        .map(|k| {
            let dpsi = (states[k + 1] - states[k - 1]).scale(i2h);
            (dpsi - hamiltonians[k].apply(states[k])).norm()
        })
        .collect())
}

/// Largest mismatch in dφₙ/dt = ⟨ñ|(i∂_t − H)|ñ⟩ at interior points, with
/// both time derivatives taken as central differences.
pub fn rate_equation_residual(
    phi: &[f64],
    tilde_n: &[Vec2],
    grid: &[f64],
    hamiltonians: &[Mat2],
) -> Result<f64> {
    if phi.len() != grid.len() || tilde_n.len() != grid.len() || hamiltonians.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let h = uniform_step(grid, 3)?;
    let i2h = C64::new(0.0, 1.0 / (2.0 * h));
    Ok((1..grid.len() - 1)
        .map(|k| {
            let dphi = (phi[k + 1] - phi[k - 1]) / (2.0 * h);
            let i_dt = (tilde_n[k + 1] - tilde_n[k - 1]).scale(i2h);
            let rhs = tilde_n[k].inner(i_dt - hamiltonians[k].apply(tilde_n[k]));
            (C64::new(dphi, 0.0) - rhs).norm()
        })
        .fold(0.0, f64::max))
}

/// e^{iφₙ(t)}|ñ(t)⟩
pub fn phased_states(phi: &[f64], tilde_n: &[Vec2]) -> Vec<Vec2> {
    phi.iter()
        .zip(tilde_n)
        .map(|(p, v)| v.scale(C64::from_polar(1.0, *p)))
        .collect()
}

/// Static-basis vector for a frame component, used when emitting states.
pub fn frame_component(frame: &[Vec2; 2], n: usize) -> Vec2 {
    frame[n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ladder_ops, I};
    use crate::nusystem::NuState;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn null_vector_of_ic_b() {
        let b0 = build_b(NuState::new(r(0.5), r(0.5), I));
        let v = fix_phase(null_vector(b0).unwrap());
        let s = 0.5f64.sqrt();
        assert!((v - Vec2::new(r(s), C64::new(0.0, s))).norm() < 1e-15);
        assert!(b0.apply(v).norm() < 1e-15);
    }

    #[test]
    fn null_vector_of_b_is_vacuum() {
        assert_eq!(null_vector(ladder_ops().b), Some(Vec2::basis(0)));
        assert_eq!(null_vector(Mat2::zero()), None);
    }

    #[test]
    fn unwrap_removes_jumps() {
        let raw = [3.0, -3.0, -2.5, 3.1];
        let w = unwrap_phases(&raw);
        assert!((w[1] - (2.0 * PI - 3.0)).abs() < 1e-15);
        for pair in w.windows(2) {
            assert!((pair[1] - pair[0]).abs() <= PI);
        }
    }

    #[test]
    fn simpson_is_exact_for_quadratics() {
        let grid: Vec<f64> = (0..=7).map(|k| 0.3 * k as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|t| 1.0 + 2.0 * t - 3.0 * t * t).collect();
        let cum = cumulative_simpson(&grid, &vals);
        for (t, c) in grid.iter().zip(&cum) {
            let exact = t + t * t - t * t * t;
            assert!((c - exact).abs() < 1e-12, "t = {}", t);
        }
        assert_eq!(cumulative_simpson(&[0.0, 2.0], &[1.0, 3.0]), vec![0.0, 4.0]);
    }

    #[test]
    fn oracle_vacuum_rejects_full_rank() {
        let u = UTrajectory {
            grid: vec![0.0],
            u: vec![Mat2::identity()],
            stats: Default::default(),
        };
        assert!(matches!(
            vacuum_oracle(&u, Mat2::identity()),
            Err(Error::NotRankOne { .. })
        ));
    }

    #[test]
    fn schrodinger_residual_needs_three_points() {
        let grid = [0.0, 0.1];
        let states = [Vec2::basis(0); 2];
        let hs = [Mat2::zero(); 2];
        assert!(matches!(
            schrodinger_residual(&states, &grid, &hs),
            Err(Error::GridTooShort { .. })
        ));
        let grid = [0.0, 0.1, 0.3];
        let states = [Vec2::basis(0); 3];
        let hs = [Mat2::zero(); 3];
        assert!(matches!(
            schrodinger_residual(&states, &grid, &hs),
            Err(Error::NonUniformGrid { .. })
        ));
    }

    #[test]
    fn frame_matrix_of_b() {
        let frame = [Vec2::basis(0), Vec2::basis(1)];
        assert_eq!(in_frame(ladder_ops().b, &frame), ladder_ops().b);
        assert_eq!(frame_component(&frame, 1), Vec2::basis(1));
    }
}
