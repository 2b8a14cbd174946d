//! Dormand–Prince 5(4) integrator with PI step control and dense output.
//!
//! Complex systems are integrated as interleaved (re, im) real pairs. The
//! solution is reported on a caller-supplied output grid via the order-4
//! continuous extension of the method.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const C2: f64 = 0.2;
const C3: f64 = 0.3;
const C4: f64 = 0.8;
const C5: f64 = 8.0 / 9.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on the step size; `None` means the whole window.
    pub h_max: Option<f64>,
}

impl OdeOptions {
    pub fn new(rtol: f64, atol: f64) -> Self {
        OdeOptions {
            rtol,
            atol,
            max_steps: 2_000_000,
            h_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Output grid t0, t0 + dt, …, t1. The last point is t1 itself; if the
/// window is not a multiple of `dt` the final interval is shorter.
pub fn uniform_grid(t0: f64, t1: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t0.is_finite() && t1.is_finite() && dt.is_finite()) {
        return Err(Error::InvalidWindow("non-finite bounds".into()));
    }
    if t1 <= t0 {
        return Err(Error::InvalidWindow(format!(
            "t1 = {} must exceed t0 = {}",
            t1, t0
        )));
    }
    if dt <= 0.0 {
        return Err(Error::InvalidWindow(format!(
            "dt_out = {} must be positive",
            dt
        )));
    }
    let span = (t1 - t0) / dt;
    let n = (span - 1e-9).ceil().max(1.0) as usize;
    let mut grid: Vec<f64> = (0..n).map(|k| t0 + k as f64 * dt).collect();
    grid.push(t1);
    Ok(grid)
}

fn error_norm(y: &[f64], y_new: &[f64], err: &[f64], opts: &OdeOptions) -> f64 {
    let n = y.len() as f64;
    let sum: f64 = y
        .iter()
        .zip(y_new)
        .zip(err)
        .map(|((a, b), e)| {
            let sk = opts.atol + opts.rtol * a.abs().max(b.abs());
            (e / sk).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn initial_step<F>(
    rhs: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    h_max: f64,
    opts: &OdeOptions,
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let sk: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let dnf: f64 = f0
        .iter()
        .zip(&sk)
        .map(|(f, s)| (f / s).powi(2))
        .sum::<f64>()
        / n as f64;
    let dny: f64 = y.iter().zip(&sk).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n as f64;
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(h_max);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(v, f)| v + h * f).collect();
    let mut f1 = vec![0.0; n];
    rhs(t + h, &y1, &mut f1)?;
    let der2 = (f1
        .iter()
        .zip(f0)
        .zip(&sk)
        .map(|((a, b), s)| ((a - b) / s).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt()
        / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    Ok((100.0 * h).min(h1).min(h_max))
}

/// Integrates y' = rhs(t, y) from `grid[0]` and returns y at every grid point.
pub fn integrate<F>(
    mut rhs: F,
    y0: &[f64],
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<Vec<f64>>, OdeStats)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    assert!(!grid.is_empty(), "output grid must be nonempty");
    let n = y0.len();
    let t0 = grid[0];
    let t_end = *grid.last().unwrap();
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0.to_vec());
    let mut stats = OdeStats::default();
    if grid.len() == 1 {
        return Ok((out, stats));
    }

    let h_max = opts.h_max.unwrap_or(t_end - t0).min(t_end - t0);
    const SAFE: f64 = 0.9;
    const BETA: f64 = 0.04;
    const FACC1: f64 = 5.0; // 1 / fac1, fac1 = 0.2
    const FACC2: f64 = 0.1; // 1 / fac2, fac2 = 10
    let expo1 = 0.2 - BETA * 0.75;
    let mut facold: f64 = 1e-4;

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    rhs(t, &y, &mut k1)?;
    stats.rhs_evals += 1;
    let mut h = initial_step(&mut rhs, t, &y, &k1, h_max, opts)?;
    stats.rhs_evals += 1;

    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    let mut ytmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut cont = vec![[0.0; 5]; n];
    let mut next_out = 1;
    let mut reject = false;
    let mut last = false;

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::TooManySteps {
                t,
                limit: opts.max_steps,
            });
        }
        if h.abs() <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t });
        }
        if t + 1.01 * h >= t_end {
            h = t_end - t;
            last = true;
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs(t + C2 * h, &ytmp, &mut k2)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * h, &ytmp, &mut k3)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * h, &ytmp, &mut k4)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * h, &ytmp, &mut k5)?;
        for i in 0..n {
            ytmp[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t_end } else { t + h };
        rhs(t_new, &ytmp, &mut k6)?;
        for i in 0..n {
            y_new[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs(t_new, &y_new, &mut k7)?;
        stats.rhs_evals += 6;
        for i in 0..n {
            err[i] =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let e = error_norm(&y, &y_new, &err, opts);

        let fac11 = e.powf(expo1);
        if e <= 1.0 {
            // PI controller (Lund stabilization)
            let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(FACC2, FACC1);
            facold = e.max(1e-4);
            stats.accepted += 1;

            for i in 0..n {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                cont[i] = [
                    y[i],
                    ydiff,
                    bspl,
                    ydiff - h * k7[i] - bspl,
                    h * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i]),
                ];
            }
            while next_out < grid.len() && (grid[next_out] <= t_new || last) {
                let tq = grid[next_out];
                if tq == t_new {
                    out.push(y_new.clone());
                } else {
                    let s = (tq - t) / h;
                    let s1 = 1.0 - s;
                    out.push(
                        cont.iter()
                            .map(|c| c[0] + s * (c[1] + s1 * (c[2] + s * (c[3] + s1 * c[4]))))
                            .collect(),
                    );
                }
                next_out += 1;
            }

            std::mem::swap(&mut k1, &mut k7);
            std::mem::swap(&mut y, &mut y_new);
            t = t_new;
            if last {
                break;
            }
            let mut h_new = (h / fac).min(h_max);
            if reject {
                h_new = h_new.min(h);
            }
            reject = false;
            h = h_new;
        } else {
            stats.rejected += 1;
            reject = true;
            last = false;
            h /= FACC1.min(fac11 / SAFE);
        }
    }
    debug_assert_eq!(out.len(), grid.len());
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shapes() {
        let g = uniform_grid(0.0, 10.0, 0.01).unwrap();
        assert_eq!(g.len(), 1001);
        assert_eq!(g[1000], 10.0);
        assert!((g[500] - 5.0).abs() < 1e-12);
        let g = uniform_grid(0.0, 1.0, 0.3).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[4], 1.0);
        assert!(uniform_grid(1.0, 1.0, 0.1).is_err());
        assert!(uniform_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn exponential_decay_dense_output() {
        let grid = uniform_grid(0.0, 5.0, 0.01).unwrap();
        let opts = OdeOptions::new(1e-10, 1e-12);
        let (ys, stats) = integrate(
            |_t, y, dy| {
                dy[0] = -y[0];
                Ok(())
            },
            &[1.0],
            &grid,
            &opts,
        )
        .unwrap();
        for (t, y) in grid.iter().zip(&ys) {
            assert!((y[0] - (-t).exp()).abs() < 1e-10, "t = {}", t);
        }
        assert!(stats.accepted > 10);
    }

    #[test]
    fn harmonic_oscillator_phase() {
        // y'' = -y as (x, v); exact x = cos t
        let grid = uniform_grid(0.0, 10.0, 0.05).unwrap();
        let opts = OdeOptions::new(1e-11, 1e-13);
        let (ys, _) = integrate(
            |_t, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            &[1.0, 0.0],
            &grid,
            &opts,
        )
        .unwrap();
        let worst = grid
            .iter()
            .zip(&ys)
            .map(|(t, y)| (y[0] - t.cos()).abs().max((y[1] + t.sin()).abs()))
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "worst = {:e}", worst);
    }

    #[test]
    fn rhs_errors_propagate() {
        let grid = uniform_grid(0.0, 1.0, 0.1).unwrap();
        let res = integrate(
            |t, _y, _dy| {
                if t > 0.5 {
                    Err(Error::StepSizeUnderflow { t })
                } else {
                    Ok(())
                }
            },
            &[1.0],
            &grid,
            &OdeOptions::new(1e-8, 1e-10),
        );
        assert!(res.is_err());
    }

    #[test]
    fn blow_up_reports_underflow_or_step_limit() {
        // y' = y², y(0) = 1 blows up at t = 1
        let grid = uniform_grid(0.0, 2.0, 0.1).unwrap();
        let mut opts = OdeOptions::new(1e-8, 1e-10);
        opts.max_steps = 100_000;
        let res = integrate(
            |_t, y, dy| {
                dy[0] = y[0] * y[0];
                Ok(())
            },
            &[1.0],
            &grid,
            &opts,
        );
        match res {
            Err(Error::StepSizeUnderflow { t }) | Err(Error::TooManySteps { t, .. }) => {
                assert!(t < 1.0 + 1e-6 && t > 0.9, "t = {}", t)
            }
            other => panic!("expected failure, got {:?}", other.map(|_| ())),
        }
    }
}
