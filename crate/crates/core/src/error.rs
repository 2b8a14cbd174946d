use thiserror::Error;

use crate::profile::ProfileError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("step limit of {limit} exceeded at t = {t}")]
    TooManySteps { t: f64, limit: usize },
    #[error("invalid time window: {0}")]
    InvalidWindow(String),
    #[error("f vanishes on grid: |f(t)| = {magnitude:e} at t = {t}")]
    DriveVanishes { t: f64, magnitude: f64 },
    #[error("free solution requires f = 0, but |f(t)| = {magnitude:e} at t = {t}")]
    DriveNotZero { t: f64, magnitude: f64 },
    #[error("singular linearization chain: {0}")]
    SingularChain(String),
    #[error("invariant at t0 is not rank one (|λ₁| = {lambda1:e})")]
    NotRankOne { lambda1: f64 },
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("grid too short: need at least {needed} points, got {got}")]
    GridTooShort { needed: usize, got: usize },
    #[error("output grid is not uniform near t = {t}")]
    NonUniformGrid { t: f64 },
    #[error("trajectories are sampled on different grids")]
    GridMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
