//! The three known mismatches between printed formulas and the implemented
//! ones, each with the numbers that show it.

use ffo_core::epsilon::NormalizationProbe;
use ffo_core::nusystem::{free_solution, free_solution_swapped};
use ffo_core::states::{AnalyticVacuum, ConventionSummary};
use ffo_core::NuTrajectory;
use serde_json::{json, Value};

use crate::report::LedgerEntry;

pub const FREE_SIGN: &str = "free_solution_sign";
pub const AMPLITUDE_RATIO: &str = "vacuum_amplitude_ratio";
pub const NORMALIZATION: &str = "epsilon_normalization";

/// Both free closed forms measured against the integrated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeDeviation {
    pub consistent: f64,
    pub swapped: f64,
}

pub fn free_deviation(nu: &NuTrajectory) -> FreeDeviation {
    let ic = nu.states[0];
    let mut d = FreeDeviation {
        consistent: 0.0,
        swapped: 0.0,
    };
    for (s, &q) in nu.states.iter().zip(&nu.q_omega) {
        d.consistent = d.consistent.max(s.distance(free_solution(ic, q)));
        d.swapped = d.swapped.max(s.distance(free_solution_swapped(ic, q)));
    }
    d
}

/// `free` is `None` when the drive does not vanish on the grid.
pub fn free_sign_entry(free: Option<FreeDeviation>) -> LedgerEntry {
    let (evidence, note) = match free {
        Some(d) => (
            Some(json!({
                "implemented_max_deviation": d.consistent,
                "stated_max_deviation": d.swapped,
            })),
            None,
        ),
        None => (None, Some("f does not vanish on the grid".to_string())),
    };
    LedgerEntry {
        id: FREE_SIGN,
        stated_form: "ν₊(t) = ν₊(t₀)·exp(+i∫ω dτ), ν₋(t) = ν₋(t₀)·exp(−i∫ω dτ)",
        implemented_form: "ν₊(t) = ν₊(t₀)·exp(−i∫ω dτ), ν₋(t) = ν₋(t₀)·exp(+i∫ω dτ)",
        evidence,
        note,
    }
}

fn summary_json(s: Option<ConventionSummary>) -> Value {
    match s {
        Some(s) => json!({
            "points": s.points,
            "max_B_residual": s.max_b_residual,
            "min_B_residual": s.min_b_residual,
            "max_Bdag_residual": s.max_b_dag_residual,
            "max_norm_defect": s.max_norm_defect,
        }),
        None => Value::Null,
    }
}

pub fn amplitude_entry(analytic: &AnalyticVacuum) -> LedgerEntry {
    let at_start = |s: Option<&ffo_core::states::AmplitudeSample>| match s {
        Some(a) => json!({
            "B_residual": a.b_residual,
            "Bdag_residual": a.b_dag_residual,
        }),
        None => Value::Null,
    };
    let evidence = json!({
        "t0": {
            "stated": at_start(analytic.conjugate.first().and_then(Option::as_ref)),
            "implemented": at_start(analytic.derived.first().and_then(Option::as_ref)),
        },
        "trajectory": {
            "stated": summary_json(analytic.conjugate_summary()),
            "implemented": summary_json(analytic.derived_summary()),
        },
    });
    LedgerEntry {
        id: AMPLITUDE_RATIO,
        stated_form: "α₁/α₀ = ν₃*/(2ν₊*), |α₀| = √|ν₊|",
        implemented_form: "α₁/α₀ = ν₃/(2ν₋), |α₀| = √|ν₋|",
        evidence: Some(evidence),
        note: Some(
            "a sample is skipped where the amplitude it divides by is below 1e-3".to_string(),
        ),
    }
}

/// `probe` carries the reason as `Err` when the ε′ chain could not run.
pub fn normalization_entry(probe: Result<&NormalizationProbe, String>) -> LedgerEntry {
    let (evidence, note) = match probe {
        Ok(p) => {
            let s0 = p.samples[0];
            (
                Some(json!({
                    "t0": {
                        "stated": s0.factored,
                        "implemented": s0.expanded,
                        "lambda2": s0.lambda2_integrated,
                        "difference": s0.factored - s0.expanded,
                    },
                    "max_stated_minus_implemented": p.max_factored_gap(),
                    "max_implemented_minus_lambda2": p.max_expansion_gap(),
                    "max_reconstructed_minus_integrated_lambda2": p.max_direct_gap(),
                })),
                None,
            )
        }
        Err(reason) => (None, Some(reason)),
    };
    LedgerEntry {
        id: NORMALIZATION,
        stated_form: "λ₂ = |ε′|⁴/4·(1 + 2|X|²/|f|² + |X|⁴/|f|⁴), X = (ω/2)ε′ − iε̇′",
        implemented_form: "λ₂ = |ε′|⁴/4 + |ε′|²|X|²/(2|f|²) + |X|⁴/(4|f|⁴), X = (ω/2)ε′ − iε̇′",
        evidence,
        note,
    }
}
