//! Task orchestration: integrates what the requested tasks need, checks
//! every residual against its tolerance and assembles the tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ffo_core::algebra::{anticommutator, frobenius_distance, Mat2, Vec2};
use ffo_core::epsilon::{
    chain_mismatch, gauge_residual, ic_from_nu, integrate_eps_prime_on, nonlinear_residual,
    normalization_probe, reconstruct, require_drive, EpsTrajectory, NormalizationProbe, SqrtBranch,
};
use ffo_core::grassmann::{canonical_cs, eigen_residual, inner, GrassmannElement, Parity};
use ffo_core::nusystem::{
    build_b, free_solution, free_solution_swapped, hamiltonian_series, integrate_nu_on,
    invariance_identity_residual, lambda_invariants, nu_rhs, require_free,
};
use ffo_core::ode::OdeOptions;
use ffo_core::propagator::{conjugated_invariant, integrate_u_on, unitarity_defect};
use ffo_core::states::{
    coherent_state, geometric_dynamical_split, invariant_in_frame, lr_phases,
    null_transport_residual, phased_states, rate_equation_residual, schrodinger_residual,
    tilde_states, vacuum_analytic, vacuum_oracle, AnalyticVacuum, PhaseSeries, PhaseSplit,
    VacuumTrajectory,
};
use ffo_core::{Error, NuState, NuTrajectory, UTrajectory};

use crate::ledger::{self, FreeDeviation};
use crate::report::{LedgerEntry, RunReport, Status, TaskReport};
use crate::scenario::{Scenario, Task};
use crate::table::{Row, Table};

/// Residual tolerances. The finite-difference checks scale with (dt/0.01)².
pub mod tol {
    pub const LAMBDA_DRIFT: f64 = 1e-9;
    pub const INVARIANCE_IDENTITY: f64 = 1e-12;
    pub const LADDER: f64 = 1e-9;
    pub const ORACLE_DISTANCE: f64 = 1e-7;
    pub const UNITARITY: f64 = 1e-9;
    pub const CHAIN: f64 = 1e-6;
    pub const NONLINEAR: f64 = 1e-7;
    pub const BRANCH: f64 = 1e-12;
    pub const GAUGE: f64 = 1e-10;
    pub const RECONSTRUCTED_LAMBDA1: f64 = 1e-12;
    pub const LAMBDA2_DIRECT: f64 = 1e-6;
    pub const LAMBDA2_EXPANSION: f64 = 1e-9;
    pub const NULL_TRANSPORT: f64 = 1e-8;
    pub const ORTHONORMALITY: f64 = 1e-8;
    pub const CS_EIGEN: f64 = 1e-10;
    pub const CS_NORM: f64 = 1e-12;
    pub const VACUUM_FIDELITY: f64 = 1e-6;
    pub const ANALYTIC_B: f64 = 1e-8;
    pub const FINITE_DIFFERENCE: f64 = 1e-4;
    pub const SPLIT: f64 = 1e-12;
    pub const FREE: f64 = 1e-9;
    /// Reference output step for [`FINITE_DIFFERENCE`].
    pub const REFERENCE_DT: f64 = 0.01;
}

/// Report plus the tables, keyed by file name.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub tables: BTreeMap<String, Table>,
}

impl RunOutput {
    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.get(file)
    }

    /// Writes every table, `report.json` and, when present, `ledger.json`.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, t) in &self.tables {
            let path = dir.join(name);
            t.write(&path).map_err(std::io::Error::other)?;
            written.push(path);
        }
        if !self.report.ledger.is_empty() {
            let path = dir.join("ledger.json");
            fs::write(&path, to_json(&self.report.ledger))?;
            written.push(path);
        }
        let path = dir.join("report.json");
        fs::write(&path, to_json(&self.report))?;
        written.push(path);
        Ok(written)
    }
}

pub fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report values serialize");
    s.push('\n');
    s
}

struct EpsChain {
    eps: EpsTrajectory,
    rebuilt: Vec<NuState>,
    rebuilt_negated: Vec<NuState>,
    probe: NormalizationProbe,
}

/// Lazily computed inputs shared between tasks.
struct Context<'a> {
    s: &'a Scenario,
    opts: OdeOptions,
    nu: Option<Result<NuTrajectory, Error>>,
    u: Option<Result<UTrajectory, Error>>,
    eps: Option<Result<EpsChain, Error>>,
    timings: BTreeMap<String, f64>,
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

impl<'a> Context<'a> {
    fn new(s: &'a Scenario) -> Self {
        Context {
            s,
            opts: OdeOptions::new(s.rtol, s.atol),
            nu: None,
            u: None,
            eps: None,
            timings: BTreeMap::new(),
        }
    }

    fn ensure_nu(&mut self) {
        if self.nu.is_none() {
            let start = Instant::now();
            let s = self.s;
            self.nu = Some(integrate_nu_on(&s.profiles, s.initial, &s.grid, &self.opts));
            self.timings.insert("integrate_nu".into(), millis(start));
        }
    }

    fn ensure_u(&mut self) {
        if self.u.is_none() {
            let start = Instant::now();
            self.u = Some(integrate_u_on(&self.s.profiles, &self.s.grid, &self.opts));
            self.timings.insert("integrate_u".into(), millis(start));
        }
    }

    fn ensure_eps(&mut self) {
        self.ensure_nu();
        if self.eps.is_none() {
            let start = Instant::now();
            let chain = match self.nu() {
                Ok(nu) => eps_chain(self.s, nu, &self.opts),
                Err(e) => Err(e.clone()),
            };
            self.eps = Some(chain);
            self.timings.insert("integrate_eps".into(), millis(start));
        }
    }

    fn nu(&self) -> Result<&NuTrajectory, Error> {
        self.nu
            .as_ref()
            .expect("ν computed")
            .as_ref()
            .map_err(Clone::clone)
    }

    fn u(&self) -> Result<&UTrajectory, Error> {
        self.u
            .as_ref()
            .expect("U computed")
            .as_ref()
            .map_err(Clone::clone)
    }

    fn eps(&self) -> Result<&EpsChain, Error> {
        self.eps
            .as_ref()
            .expect("ε computed")
            .as_ref()
            .map_err(Clone::clone)
    }
}

fn eps_chain(s: &Scenario, nu: &NuTrajectory, opts: &OdeOptions) -> Result<EpsChain, Error> {
    let p = &s.profiles;
    require_drive(p, &s.grid)?;
    let sdot = nu_rhs(s.t0, s.initial, p)?;
    let (e0, de0) = ic_from_nu(s.initial, sdot, SqrtBranch::Principal)?;
    let (n0, dn0) = ic_from_nu(s.initial, sdot, SqrtBranch::Negated)?;
    let eps = integrate_eps_prime_on(p, e0, de0, &s.grid, opts)?;
    let negated = integrate_eps_prime_on(p, n0, dn0, &s.grid, opts)?;
    let rebuilt = reconstruct(&eps, p)?;
    let rebuilt_negated = reconstruct(&negated, p)?;
    let probe = normalization_probe(&eps, nu, p)?;
    Ok(EpsChain {
        eps,
        rebuilt,
        rebuilt_negated,
        probe,
    })
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

/// 1e-4 at the reference step, growing as dt² above it.
fn rate_tolerance(dt: f64) -> f64 {
    tol::FINITE_DIFFERENCE * (dt / tol::REFERENCE_DT).powi(2).max(1.0)
}

/// Tolerance for a state-level central-difference residual. The
/// truncation term of i(ψ₊ − ψ₋)/2h is (h²/6)|ψ⃛| with |ψ⃛| ≈ ‖H‖³, so the
/// flat bound is widened to twice that when the spectrum is large.
fn fd_tolerance(dt: f64, hs: &[Mat2]) -> f64 {
    let flat = rate_tolerance(dt);
    let spectral = max_of(hs.iter().flat_map(|h| h.eigenvalues()).map(|e| e.norm()));
    flat.max(dt * dt / 3.0 * spectral.powi(3))
}

fn oracle_distances(nu: &NuTrajectory, u: &UTrajectory) -> Vec<f64> {
    let b0 = nu.b_at(0);
    (0..nu.len())
        .map(|k| frobenius_distance(nu.b_at(k), conjugated_invariant(u.u[k], b0)))
        .collect()
}

type TaskResult = Result<(TaskReport, Vec<(String, Table)>), Error>;

fn task_nu(c: &Context, with_oracle: bool) -> TaskResult {
    let nu = c.nu()?;
    let p = &c.s.profiles;
    let mut r = TaskReport::default();
    let (d1, d2) = nu.lambda_drift();
    r.check("lambda1_drift", d1, tol::LAMBDA_DRIFT);
    r.check("lambda2_drift", d2, tol::LAMBDA_DRIFT);
    let mut identity = 0.0f64;
    for (&t, s) in nu.grid.iter().zip(&nu.states) {
        identity = identity.max(invariance_identity_residual(*s, p, t)?);
    }
    r.check("invariance_identity", identity, tol::INVARIANCE_IDENTITY);
    if c.s.ic_admissible() {
        // B² = λ₁ and {B, B†} = λ₂ for a traceless B
        let (sq, anti) = nu.states.iter().fold((0.0f64, 0.0f64), |(a, b), s| {
            let m = build_b(*s);
            let ac = anticommutator(m, m.adjoint()) - Mat2::identity();
            (a.max((m * m).max_abs()), b.max(ac.max_abs()))
        });
        r.check("ladder_b_squared", sq, tol::LADDER);
        r.check("ladder_anticommutator", anti, tol::LADDER);
    }
    r.observe("rhs_evaluations", nu.stats.rhs_evals as f64);

    let distances = match (with_oracle, c.u.as_ref()) {
        (true, Some(Ok(u))) => Some(oracle_distances(nu, u)),
        _ => None,
    };
    let mut headers = vec!["t".to_string()];
    headers.extend(Table::complex_headers(&[
        "nu_plus", "nu_minus", "nu_3", "lambda1",
    ]));
    headers.extend(["lambda2", "q_omega"].map(String::from));
    headers.extend(Table::complex_headers(&["q_logf"]));
    headers.push("q_g".into());
    if distances.is_some() {
        headers.push("oracle_distance".into());
    }
    let mut t = Table::with_headers(headers);
    for k in 0..nu.len() {
        let s = nu.states[k];
        let (l1, l2) = lambda_invariants(s);
        let mut row = Row::default()
            .real(nu.grid[k])
            .complex(s.nu_plus)
            .complex(s.nu_minus)
            .complex(s.nu_3)
            .complex(l1)
            .real(l2)
            .real(nu.q_omega[k])
            .opt_complex(nu.q_logf.as_ref().map(|q| q[k]))
            .real(nu.q_g[k]);
        if let Some(d) = &distances {
            row = row.real(d[k]);
        }
        t.push(row);
    }
    Ok((r, vec![("nu.csv".into(), t)]))
}

fn task_oracle(c: &Context) -> TaskResult {
    let nu = c.nu()?;
    let u = c.u()?;
    let mut r = TaskReport::default();
    let distances = oracle_distances(nu, u);
    let defects: Vec<f64> = u.u.iter().map(|m| unitarity_defect(*m)).collect();
    r.check(
        "oracle_distance",
        max_of(distances.iter().copied()),
        tol::ORACLE_DISTANCE,
    );
    r.check(
        "unitarity_defect",
        max_of(defects.iter().copied()),
        tol::UNITARITY,
    );
    r.observe("rhs_evaluations", u.stats.rhs_evals as f64);

    let mut headers = vec!["t".to_string()];
    headers.extend(Table::complex_headers(&["u00", "u01", "u10", "u11"]));
    headers.extend(["unitarity_defect", "oracle_distance"].map(String::from));
    let mut t = Table::with_headers(headers);
    for k in 0..u.len() {
        let mut row = Row::default().real(u.grid[k]);
        for z in u.u[k].to_flat() {
            row = row.complex(z);
        }
        t.push(row.real(defects[k]).real(distances[k]));
    }
    Ok((r, vec![("oracle.csv".into(), t)]))
}

fn task_epsilon(c: &Context) -> TaskResult {
    let nu = c.nu()?;
    let chain = c.eps()?;
    let p = &c.s.profiles;
    let mut r = TaskReport::default();
    r.check(
        "chain_mismatch",
        chain_mismatch(&chain.rebuilt, &nu.states),
        tol::CHAIN,
    );
    let nonlinear = nonlinear_residual(nu, p)?;
    r.check(
        "nonlinear_residual",
        max_of(nonlinear.iter().copied()),
        tol::NONLINEAR,
    );
    r.check(
        "branch_independence",
        chain_mismatch(&chain.rebuilt_negated, &chain.rebuilt),
        tol::BRANCH,
    );
    r.check("gauge", gauge_residual(&chain.eps, nu)?, tol::GAUGE);
    let rebuilt_l1 = max_of(chain.rebuilt.iter().map(|s| lambda_invariants(*s).0.norm()));
    r.check(
        "reconstructed_lambda1",
        rebuilt_l1,
        tol::RECONSTRUCTED_LAMBDA1,
    );
    r.check(
        "lambda2_direct_gap",
        chain.probe.max_direct_gap(),
        tol::LAMBDA2_DIRECT,
    );
    r.check(
        "lambda2_expansion_gap",
        chain.probe.max_expansion_gap(),
        tol::LAMBDA2_EXPANSION,
    );
    r.observe("lambda2_stated_form_gap", chain.probe.max_factored_gap());

    let mut headers = vec!["t".to_string()];
    headers.extend(Table::complex_headers(&[
        "eps_prime",
        "eps_prime_dot",
        "eps",
        "eps_dot",
        "omega_prime",
        "omega",
        "rebuilt_nu_plus",
        "rebuilt_nu_minus",
        "rebuilt_nu_3",
    ]));
    headers.extend(
        [
            "lambda2_integrated",
            "lambda2_reconstructed",
            "lambda2_expanded",
            "lambda2_stated",
            "nonlinear_residual",
        ]
        .map(String::from),
    );
    let mut t = Table::with_headers(headers);
    let e = &chain.eps;
    for k in 0..e.grid.len() {
        let n = chain.probe.samples[k];
        let rb = chain.rebuilt[k];
        t.push(
            Row::default()
                .real(e.grid[k])
                .complex(e.eps_prime[k].0)
                .complex(e.eps_prime[k].1)
                .complex(e.eps[k].0)
                .complex(e.eps[k].1)
                .complex(e.omega_prime[k])
                .complex(e.omega[k])
                .complex(rb.nu_plus)
                .complex(rb.nu_minus)
                .complex(rb.nu_3)
                .real(n.lambda2_integrated)
                .real(n.lambda2_reconstructed)
                .real(n.expanded)
                .real(n.factored)
                .real(nonlinear[k]),
        );
    }
    Ok((r, vec![("epsilon.csv".into(), t)]))
}

fn is_canonical(s: NuState) -> bool {
    s == NuState::canonical()
}

fn task_states(c: &Context) -> TaskResult {
    let nu = c.nu()?;
    let u = c.u()?;
    let vac: VacuumTrajectory = vacuum_oracle(u, build_b(c.s.initial))?;
    let mut r = TaskReport::default();
    r.check(
        "null_transport",
        null_transport_residual(&vac, nu)?,
        tol::NULL_TRANSPORT,
    );
    let excited = max_of(
        vac.excited
            .iter()
            .enumerate()
            .map(|(k, v)| nu.b_at(k).adjoint().apply(*v).norm()),
    );
    r.check("excited_transport", excited, tol::NULL_TRANSPORT);
    r.check(
        "orthonormality",
        vac.orthonormality_defect(),
        tol::ORTHONORMALITY,
    );

    let (mut eigen, mut norm) = (0.0f64, 0.0f64);
    for k in 0..vac.len() {
        let cs = coherent_state(&vac, k);
        let b_frame = invariant_in_frame(&vac, k);
        eigen = eigen.max(eigen_residual(b_frame, &vac.basis_at(k), Parity::Odd, &cs)?);
        norm = norm.max((inner(&cs, &cs)? - GrassmannElement::one()).max_abs());
    }
    r.check("cs_eigen", eigen, tol::CS_EIGEN);
    r.check("cs_norm", norm, tol::CS_NORM);
    if is_canonical(c.s.initial) {
        let same = coherent_state(&vac, 0).to_static() == canonical_cs(true);
        r.check("cs_canonical_at_t0", if same { 0.0 } else { 1.0 }, 0.0);
    }

    let hs = hamiltonian_series(&c.s.profiles, &vac.grid)?;
    let sch = schrodinger_residual(&vac.vacuum, &vac.grid, &hs)?;
    r.check(
        "schrodinger_vacuum",
        max_of(sch),
        fd_tolerance(c.s.dt_out, &hs),
    );

    let analytic: AnalyticVacuum = vacuum_analytic(nu);
    if let Some(d) = analytic.derived_summary() {
        r.check("analytic_b_residual", d.max_b_residual, tol::ANALYTIC_B);
    }
    if let Some((fidelity, drift)) = analytic.fidelity(&vac)? {
        r.check("analytic_infidelity", 1.0 - fidelity, tol::VACUUM_FIDELITY);
        r.check("analytic_phase_drift", drift, tol::VACUUM_FIDELITY);
    }

    let mut headers = vec!["t".to_string()];
    headers.extend(Table::complex_headers(&[
        "vacuum_0",
        "vacuum_1",
        "excited_0",
        "excited_1",
        "analytic_0",
        "analytic_1",
        "stated_0",
        "stated_1",
    ]));
    headers.extend(
        [
            "null_residual",
            "analytic_b_residual",
            "stated_b_residual",
            "stated_bdag_residual",
        ]
        .map(String::from),
    );
    let mut t = Table::with_headers(headers);
    let split = |v: Option<Vec2>| match v {
        Some(v) => (Some(v.0[0]), Some(v.0[1])),
        None => (None, None),
    };
    for k in 0..vac.len() {
        let d = analytic.derived[k];
        let s = analytic.conjugate[k];
        let (d0, d1) = split(d.map(|a| a.state));
        let (s0, s1) = split(s.map(|a| a.state));
        t.push(
            Row::default()
                .real(vac.grid[k])
                .complex(vac.vacuum[k].0[0])
                .complex(vac.vacuum[k].0[1])
                .complex(vac.excited[k].0[0])
                .complex(vac.excited[k].0[1])
                .opt_complex(d0)
                .opt_complex(d1)
                .opt_complex(s0)
                .opt_complex(s1)
                .real(nu.b_at(k).apply(vac.vacuum[k]).norm())
                .opt_real(d.map(|a| a.b_residual))
                .opt_real(s.map(|a| a.b_residual))
                .opt_real(s.map(|a| a.b_dag_residual)),
        );
    }
    Ok((r, vec![("states.csv".into(), t)]))
}

fn task_phases(c: &Context) -> TaskResult {
    let nu = c.nu()?;
    let u = c.u()?;
    let tilde = tilde_states(nu)?;
    let ph: PhaseSeries = lr_phases(u, &tilde)?;
    let hs = hamiltonian_series(&c.s.profiles, &ph.grid)?;
    let split: PhaseSplit = geometric_dynamical_split(&ph, &tilde, &hs)?;
    let mut r = TaskReport::default();

    let t0: Vec<Vec2> = tilde.iter().map(|x| x[0]).collect();
    let t1: Vec<Vec2> = tilde.iter().map(|x| x[1]).collect();
    let rate = rate_equation_residual(&ph.phi0, &t0, &ph.grid, &hs)?
        .max(rate_equation_residual(&ph.phi1, &t1, &ph.grid, &hs)?);
    r.check("rate_equation", rate, rate_tolerance(c.s.dt_out));
    let phased = max_of(
        schrodinger_residual(&phased_states(&ph.phi0, &t0), &ph.grid, &hs)?
            .into_iter()
            .chain(schrodinger_residual(
                &phased_states(&ph.phi1, &t1),
                &ph.grid,
                &hs,
            )?),
    );
    r.check("schrodinger_phased", phased, fd_tolerance(c.s.dt_out, &hs));
    let additivity = max_of(
        (0..split.phi.len())
            .map(|k| (split.geometric[k] + split.dynamical[k] - split.phi[k]).abs()),
    );
    r.check("split_additivity", additivity, tol::SPLIT);
    r.observe(
        "max_abs_geometric",
        max_of(split.geometric.iter().map(|g| g.abs())),
    );

    let mut t = Table::new(&[
        "t",
        "phi_0",
        "phi_1",
        "phi",
        "phi_geometric",
        "phi_dynamical",
        "energy_gap",
    ]);
    for k in 0..ph.grid.len() {
        t.push(
            Row::default()
                .real(ph.grid[k])
                .real(ph.phi0[k])
                .real(ph.phi1[k])
                .real(split.phi[k])
                .real(split.geometric[k])
                .real(split.dynamical[k])
                .real(split.energy_gap[k]),
        );
    }
    Ok((r, vec![("phases.csv".into(), t)]))
}

fn free_available(c: &Context) -> bool {
    require_free(&c.s.profiles, &c.s.grid, c.s.atol).is_ok()
}

fn task_discrepancies(c: &Context) -> Result<(TaskReport, Vec<LedgerEntry>), Error> {
    let nu = c.nu()?;
    let mut r = TaskReport::default();
    let free = free_available(c).then(|| ledger::free_deviation(nu));
    if let Some(d) = free {
        r.check("free_implemented_deviation", d.consistent, tol::FREE);
        r.observe("free_stated_deviation", d.swapped);
    }
    let analytic = vacuum_analytic(nu);
    if let Some(a) = analytic.conjugate.first().and_then(Option::as_ref) {
        r.observe("stated_amplitude_b_residual_t0", a.b_residual);
        r.observe("stated_amplitude_bdag_residual_t0", a.b_dag_residual);
    }
    let probe = match c.eps() {
        Ok(chain) => {
            r.observe("lambda2_stated_form_gap", chain.probe.max_factored_gap());
            Ok(&chain.probe)
        }
        Err(e) => Err(format!("ε′ chain unavailable: {e}")),
    };
    let entries = vec![
        ledger::free_sign_entry(free),
        ledger::amplitude_entry(&analytic),
        ledger::normalization_entry(probe),
    ];
    Ok((r, entries))
}

fn task_free_compare(c: &Context) -> TaskResult {
    require_free(&c.s.profiles, &c.s.grid, c.s.atol)?;
    let nu = c.nu()?;
    let ic = nu.states[0];
    let d: FreeDeviation = ledger::free_deviation(nu);
    let mut r = TaskReport::default();
    r.check("implemented_deviation", d.consistent, tol::FREE);
    r.observe("stated_deviation", d.swapped);

    let mut headers = vec!["t".to_string()];
    headers.extend(Table::complex_headers(&[
        "nu_plus",
        "nu_minus",
        "nu_3",
        "implemented_nu_plus",
        "implemented_nu_minus",
        "implemented_nu_3",
        "stated_nu_plus",
        "stated_nu_minus",
        "stated_nu_3",
    ]));
    headers.extend(["implemented_deviation", "stated_deviation"].map(String::from));
    let mut t = Table::with_headers(headers);
    let triple = |row: Row, s: NuState| row.complex(s.nu_plus).complex(s.nu_minus).complex(s.nu_3);
    for k in 0..nu.len() {
        let s = nu.states[k];
        let a = free_solution(ic, nu.q_omega[k]);
        let b = free_solution_swapped(ic, nu.q_omega[k]);
        let row = triple(triple(triple(Row::default().real(nu.grid[k]), s), a), b);
        t.push(row.real(s.distance(a)).real(s.distance(b)));
    }
    Ok((r, vec![("free_compare.csv".into(), t)]))
}

/// Runs the scenario's tasks in dependency order. Nothing is written.
pub fn run(s: &Scenario) -> RunOutput {
    let mut c = Context::new(s);
    let wants = |t: Task| s.tasks.contains(&t);
    let needs_u = [Task::Oracle, Task::States, Task::Phases]
        .into_iter()
        .any(wants);
    let needs_eps = wants(Task::Epsilon) || wants(Task::Discrepancies);

    c.ensure_nu();
    if needs_u {
        c.ensure_u();
    }
    if needs_eps {
        c.ensure_eps();
    }

    let mut tasks = BTreeMap::new();
    let mut tables = BTreeMap::new();
    let mut ledger_entries = Vec::new();
    let mut timings = std::mem::take(&mut c.timings);
    for &task in &s.tasks {
        let start = Instant::now();
        let outcome = match task {
            Task::Nu => task_nu(&c, wants(Task::Oracle)),
            Task::Oracle => task_oracle(&c),
            Task::Epsilon => task_epsilon(&c),
            Task::States => task_states(&c),
            Task::Phases => task_phases(&c),
            Task::FreeCompare => task_free_compare(&c),
            Task::Discrepancies => task_discrepancies(&c).map(|(r, entries)| {
                ledger_entries = entries;
                (r, Vec::new())
            }),
        };
        let report = match outcome {
            Ok((r, ts)) => {
                tables.extend(ts);
                r
            }
            Err(e) => TaskReport::failed(&e),
        };
        timings.insert(task.name().into(), millis(start));
        tasks.insert(task.name().to_string(), report);
    }

    let status = tasks
        .values()
        .fold(Status::Ok, |acc: Status, r: &TaskReport| {
            acc.worst(r.status)
        });
    RunOutput {
        report: RunReport {
            scenario: s.name.clone(),
            status,
            exit_code: status.exit_code(),
            tasks,
            ledger: ledger_entries,
            warnings: s.warnings.clone(),
            timings_ms: timings,
        },
        tables,
    }
}
