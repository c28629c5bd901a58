//! Flat `section.key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key is
//! optional; missing keys take the demo defaults. Errors name the line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use bopo_core::functionals::ProblemParams;
use bopo_core::grid::GridSpec;
use bopo_core::kernel::KernelParams;
use bopo_core::solver::{halving_schedule, validate_schedule, Mode, SolverConfig, StepRule};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Everything a run needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemParams,
    pub solver: SolverConfig,
    pub grid: GridSpec,
    pub schedule: Vec<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Resolved `key=value` lines in key order; hashed for provenance.
    pub canonical: String,
}

impl RunConfig {
    /// sha256 of the resolved configuration.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical.as_bytes()))
    }
}

const KEYS: &[&str] = &[
    "problem.p",
    "problem.q",
    "problem.a",
    "problem.epsilon",
    "grid.kind",
    "grid.n",
    "grid.r_max",
    "grid.cluster",
    "grid.n_per_axis",
    "grid.half_width",
    "solver.max_outer_iters",
    "solver.grad_tol",
    "solver.j_tol",
    "solver.pohozaev_tol",
    "solver.armijo_c",
    "solver.armijo_shrink",
    "solver.max_backtracks",
    "solver.initial_step",
    "solver.recenter",
    "solver.metric_mass",
    "continuation.schedule",
    "continuation.halvings",
    "output.dir",
    "run.seed",
];

pub fn default_text() -> String {
    "\
# demo configuration
problem.p = 4
problem.q = 1
problem.a = 1
problem.epsilon = 1
grid.kind = radial
grid.n = 2048
grid.cluster = 4
solver.max_outer_iters = 500
solver.grad_tol = 1e-6
solver.j_tol = 1e-8
solver.pohozaev_tol = 1e-4
continuation.schedule = halving
continuation.halvings = 10
output.dir = out
run.seed = 0
"
    .to_string()
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError { line: None, message: format!("cannot read {}: {e}", path.display()) })?;
    parse(&text)
}

struct Entry {
    line: usize,
    value: String,
}

struct Table(BTreeMap<String, Entry>);

impl Table {
    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.0.get(key).map(|e| (e.value.as_str(), e.line))
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some((v, line)) => v.parse().map_err(|_| ConfigError {
                line: Some(line),
                message: format!("{key}: cannot parse `{v}`"),
            }),
        }
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.0.get(key).map(|e| e.line)
    }

    fn fail(&self, key: &str, message: String) -> ConfigError {
        ConfigError { line: self.line(key), message }
    }
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let mut table = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let (k, v) = s.split_once('=').ok_or_else(|| ConfigError {
            line: Some(line),
            message: format!("expected `key = value`, got `{s}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(ConfigError { line: Some(line), message: format!("unknown key `{k}`") });
        }
        if table.insert(k.to_string(), Entry { line, value: v.to_string() }).is_some() {
            return Err(ConfigError { line: Some(line), message: format!("duplicate key `{k}`") });
        }
    }
    let t = Table(table);

    let p: f64 = t.get("problem.p", 4.0)?;
    let q: f64 = t.get("problem.q", 1.0)?;
    let a: f64 = t.get("problem.a", 1.0)?;
    let eps: f64 = t.get("problem.epsilon", 1.0)?;
    let kernel = KernelParams::new(a, q).map_err(|e| {
        let key = if !(a > 0.0) { "problem.a" } else { "problem.q" };
        t.fail(key, strip(e))
    })?;
    let problem = ProblemParams::new(kernel, p, eps).map_err(|e| {
        let key = if !(p > 3.0 && p < 6.0) { "problem.p" } else { "problem.epsilon" };
        t.fail(key, strip(e))
    })?;

    let kind: String = t.get("grid.kind", "radial".to_string())?;
    let (grid, mode) = match kind.as_str() {
        "radial" => {
            let n: usize = t.get("grid.n", 2048)?;
            let r_max: f64 = t.get("grid.r_max", 40.0 * a)?;
            let cluster: f64 = t.get("grid.cluster", 4.0)?;
            (GridSpec::Radial { n, r_max, cluster }, Mode::Radial)
        }
        "box" => {
            let n_per_axis: usize = t.get("grid.n_per_axis", 32)?;
            let half_width: f64 = t.get("grid.half_width", 4.0 * a)?;
            (GridSpec::Box { n_per_axis, half_width }, Mode::Box)
        }
        other => return Err(t.fail("grid.kind", format!("grid.kind must be radial or box, got `{other}`"))),
    };
    grid.build().map_err(|e| t.fail(if kind == "radial" { "grid.n" } else { "grid.n_per_axis" }, strip(e)))?;

    let d = SolverConfig::default();
    let StepRule::BacktrackingArmijo { c, shrink, max_backtracks } = d.step_rule;
    let metric_mass = match t.raw("solver.metric_mass") {
        None => None,
        Some(("auto", _)) => None,
        Some(_) => Some(t.get("solver.metric_mass", 0.0)?),
    };
    let solver = SolverConfig {
        max_outer_iters: t.get("solver.max_outer_iters", d.max_outer_iters)?,
        grad_tol: t.get("solver.grad_tol", d.grad_tol)?,
        j_tol: t.get("solver.j_tol", d.j_tol)?,
        pohozaev_tol: t.get("solver.pohozaev_tol", d.pohozaev_tol)?,
        step_rule: StepRule::BacktrackingArmijo {
            c: t.get("solver.armijo_c", c)?,
            shrink: t.get("solver.armijo_shrink", shrink)?,
            max_backtracks: t.get("solver.max_backtracks", max_backtracks)?,
        },
        initial_step: t.get("solver.initial_step", d.initial_step)?,
        recenter: t.get("solver.recenter", mode == Mode::Box)?,
        mode,
        metric_mass,
    };
    solver.validate().map_err(|e| ConfigError { line: None, message: strip(e) })?;

    let schedule = match t.raw("continuation.schedule") {
        None | Some(("halving", _)) => halving_schedule(t.get("continuation.halvings", 10u32)?),
        Some((list, line)) => list
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| ConfigError {
                line: Some(line),
                message: format!("continuation.schedule: expected `halving` or a comma list, got `{list}`"),
            })?,
    };
    validate_schedule(&schedule).map_err(|e| t.fail("continuation.schedule", strip(e)))?;

    let output_dir = PathBuf::from(t.get("output.dir", "out".to_string())?);
    let seed: u64 = t.get("run.seed", 0)?;

    let canonical = canonical_text(&problem, &solver, &grid, &schedule, seed);
    Ok(RunConfig { problem, solver, grid, schedule, output_dir, seed, canonical })
}

/// Removes the error-kind prefix so messages read as plain sentences.
fn strip(e: bopo_core::Error) -> String {
    let s = e.to_string();
    match s.split_once(": ") {
        Some((_, rest)) => rest.to_string(),
        None => s,
    }
}

fn canonical_text(pp: &ProblemParams, s: &SolverConfig, g: &GridSpec, schedule: &[f64], seed: u64) -> String {
    let mut m: BTreeMap<&str, String> = BTreeMap::new();
    m.insert("problem.p", pp.p.to_string());
    m.insert("problem.q", pp.kernel.q.to_string());
    m.insert("problem.a", pp.kernel.a.to_string());
    m.insert("problem.epsilon", pp.epsilon.to_string());
    match *g {
        GridSpec::Radial { n, r_max, cluster } => {
            m.insert("grid.kind", "radial".into());
            m.insert("grid.n", n.to_string());
            m.insert("grid.r_max", r_max.to_string());
            m.insert("grid.cluster", cluster.to_string());
        }
        GridSpec::Box { n_per_axis, half_width } => {
            m.insert("grid.kind", "box".into());
            m.insert("grid.n_per_axis", n_per_axis.to_string());
            m.insert("grid.half_width", half_width.to_string());
        }
    }
    let StepRule::BacktrackingArmijo { c, shrink, max_backtracks } = s.step_rule;
    m.insert("solver.max_outer_iters", s.max_outer_iters.to_string());
    m.insert("solver.grad_tol", s.grad_tol.to_string());
    m.insert("solver.j_tol", s.j_tol.to_string());
    m.insert("solver.pohozaev_tol", s.pohozaev_tol.to_string());
    m.insert("solver.armijo_c", c.to_string());
    m.insert("solver.armijo_shrink", shrink.to_string());
    m.insert("solver.max_backtracks", max_backtracks.to_string());
    m.insert("solver.initial_step", s.initial_step.to_string());
    m.insert("solver.recenter", s.recenter.to_string());
    m.insert("solver.metric_mass", s.metric_mass.map_or("auto".into(), |v| v.to_string()));
    m.insert(
        "continuation.schedule",
        schedule.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","),
    );
    m.insert("run.seed", seed.to_string());
    m.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse() {
        let c = parse(&default_text()).unwrap();
        assert_eq!(c.problem.p, 4.0);
        assert_eq!(c.schedule.len(), 11);
        assert_eq!(c.grid, GridSpec::Radial { n: 2048, r_max: 40.0, cluster: 4.0 });
        assert_eq!(c.hash(), parse("").unwrap().hash());
    }

    #[test]
    fn exponent_out_of_range_names_the_line() {
        let e = parse("problem.q = 1\nproblem.p = 7\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.message.contains("p must lie in (3,6)"), "{e}");
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed() {
        assert_eq!(parse("solver.nope = 1").unwrap_err().line, Some(1));
        assert_eq!(parse("run.seed = 1\nrun.seed = 2").unwrap_err().line, Some(2));
        assert_eq!(parse("\n\ngrid.n = many").unwrap_err().line, Some(3));
        assert_eq!(parse("problem.p 4").unwrap_err().line, Some(1));
        assert!(parse("continuation.schedule = 1, 0.5, 0.5").is_err());
    }

    #[test]
    fn output_dir_is_not_hashed() {
        let a = parse("output.dir = a").unwrap();
        let b = parse("output.dir = b").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), parse("run.seed = 3").unwrap().hash());
    }
}
