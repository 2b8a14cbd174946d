//! Scenario files: JSON in, validated [`Scenario`] out.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ffo_core::nusystem::{validate_ic, IcReport, NuState};
use ffo_core::ode::uniform_grid;
use ffo_core::profile::{parse, ProfileError};
use ffo_core::{ProfileSet, C64};
use serde::Deserialize;

/// Tolerance for |Im ω|, |Im g| on the output grid.
pub const REALITY_TOL: f64 = 1e-12;
/// Tolerance for the ladder conditions on the initial triple.
pub const IC_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    Nu,
    Oracle,
    Epsilon,
    States,
    Phases,
    Discrepancies,
    FreeCompare,
}

impl Task {
    /// Declaration order is dependency order.
    pub const ALL: [Task; 7] = [
        Task::Nu,
        Task::Oracle,
        Task::Epsilon,
        Task::States,
        Task::Phases,
        Task::Discrepancies,
        Task::FreeCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Nu => "nu",
            Task::Oracle => "oracle",
            Task::Epsilon => "epsilon",
            Task::States => "states",
            Task::Phases => "phases",
            Task::Discrepancies => "discrepancies",
            Task::FreeCompare => "free-compare",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown task `{s}`"))
    }
}

#[derive(Debug)]
pub enum LoadError {
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// JSON syntax or shape problem; `path` is the offending field path.
    Schema {
        path: String,
        message: String,
    },
    Profile {
        field: String,
        source: ProfileError,
    },
    Invalid {
        field: String,
        message: String,
    },
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io { path, source } => write!(f, "{}: {}", path.display(), source),
            LoadError::Schema { path, message } => write!(f, "schema error at `{path}`: {message}"),
            LoadError::Profile { field, source } => write!(f, "{field}: {source}"),
            LoadError::Invalid { field, message } => write!(f, "{field}: {message}"),
        }
    }
}

impl std::error::Error for LoadError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    hamiltonian: RawHamiltonian,
    initial: RawInitial,
    time: RawTime,
    tasks: Vec<String>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHamiltonian {
    omega: String,
    f: String,
    g: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    nu_minus: [f64; 2],
    nu_plus: [f64; 2],
    nu_3: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t0: f64,
    t1: f64,
    dt_out: f64,
    rtol: f64,
    atol: f64,
}

/// Profile texts as written in the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTexts {
    pub omega: String,
    pub f: String,
    pub g: String,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    /// File stem, or "scenario" for in-memory sources.
    pub name: String,
    /// Directory relative paths in the file are resolved against.
    pub base_dir: PathBuf,
    pub texts: ProfileTexts,
    pub profiles: ProfileSet,
    pub initial: NuState,
    pub t0: f64,
    pub t1: f64,
    pub dt_out: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Requested tasks, deduplicated, in dependency order.
    pub tasks: Vec<Task>,
    pub output_dir: Option<PathBuf>,
    pub grid: Vec<f64>,
    pub ic_report: IcReport,
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn ic_admissible(&self) -> bool {
        self.ic_report.passed
    }

    /// `output_dir` from the file, else `<stem>.out` next to it.
    pub fn default_output_dir(&self) -> PathBuf {
        match &self.output_dir {
            Some(d) if d.is_absolute() => d.clone(),
            Some(d) => self.base_dir.join(d),
            None => self.base_dir.join(format!("{}.out", self.name)),
        }
    }

    /// Copy of the scenario with a different task list.
    pub fn with_tasks(&self, tasks: &[Task]) -> Scenario {
        let mut s = self.clone();
        s.tasks = normalize_tasks(tasks);
        s
    }
}

fn normalize_tasks(tasks: &[Task]) -> Vec<Task> {
    let mut v = tasks.to_vec();
    v.sort();
    v.dedup();
    v
}

fn complex(a: [f64; 2]) -> C64 {
    C64::new(a[0], a[1])
}

fn invalid(field: &str, message: impl Into<String>) -> LoadError {
    LoadError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    parse_scenario(&text, &name, &base)
}

/// Parses and validates scenario JSON.
pub fn parse_scenario(text: &str, name: &str, base_dir: &Path) -> Result<Scenario, LoadError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawScenario = serde_path_to_error::deserialize(de).map_err(|e| LoadError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;

    let t = &raw.time;
    for (field, v) in [
        ("time.t0", t.t0),
        ("time.t1", t.t1),
        ("time.dt_out", t.dt_out),
    ] {
        if !v.is_finite() {
            return Err(invalid(field, "must be finite"));
        }
    }
    if t.t1 <= t.t0 {
        return Err(invalid("time.t1", "must exceed time.t0"));
    }
    if t.dt_out <= 0.0 {
        return Err(invalid("time.dt_out", "must be positive"));
    }
    for (field, v) in [("time.rtol", t.rtol), ("time.atol", t.atol)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(invalid(field, "must lie in (0, 1)"));
        }
    }
    if raw.tasks.is_empty() {
        return Err(invalid("tasks", "at least one task is required"));
    }
    let mut tasks = Vec::with_capacity(raw.tasks.len());
    for (k, s) in raw.tasks.iter().enumerate() {
        tasks.push(
            s.parse::<Task>()
                .map_err(|m| invalid(&format!("tasks[{k}]"), m))?,
        );
    }

    let h = &raw.hamiltonian;
    let field_expr = |field: &str, src: &str| {
        parse(src).map_err(|source| LoadError::Profile {
            field: format!("hamiltonian.{field}"),
            source,
        })
    };
    let omega = field_expr("omega", &h.omega)?;
    let f = field_expr("f", &h.f)?;
    let g = field_expr("g", &h.g)?;
    let profiles = ProfileSet::new(omega, f, g).map_err(|source| LoadError::Profile {
        field: "hamiltonian".into(),
        source,
    })?;
    let grid = uniform_grid(t.t0, t.t1, t.dt_out).map_err(|e| invalid("time", e.to_string()))?;
    profiles
        .validate(&grid, REALITY_TOL)
        .map_err(|source| LoadError::Profile {
            field: "hamiltonian".into(),
            source,
        })?;

    let i = &raw.initial;
    let initial = NuState::new(complex(i.nu_plus), complex(i.nu_minus), complex(i.nu_3));
    for (field, z) in [
        ("initial.nu_plus", initial.nu_plus),
        ("initial.nu_minus", initial.nu_minus),
        ("initial.nu_3", initial.nu_3),
    ] {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(invalid(field, "must be finite"));
        }
    }
    let ic_report = validate_ic(initial, IC_TOL);
    let mut warnings = Vec::new();
    if !ic_report.passed {
        warnings.push(format!(
            "initial triple is not ladder-admissible (|ν₃² + 4ν₊ν₋| = {:e}, ||ν₋| + |ν₊| − 1| = {:e}); \
             B(t) is still invariant but not a fermion ladder operator",
            ic_report.rank_residual, ic_report.norm_residual
        ));
    }

    Ok(Scenario {
        name: name.into(),
        base_dir: base_dir.to_path_buf(),
        texts: ProfileTexts {
            omega: h.omega.clone(),
            f: h.f.clone(),
            g: h.g.clone(),
        },
        profiles,
        initial,
        t0: t.t0,
        t1: t.t1,
        dt_out: t.dt_out,
        rtol: t.rtol,
        atol: t.atol,
        tasks: normalize_tasks(&tasks),
        output_dir: raw.output_dir,
        grid,
        ic_report,
        warnings,
    })
}
