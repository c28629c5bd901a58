//! The four batch commands. Each returns the process exit code.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use bopo_core::functionals::{EnergyBreakdown, FiberingResult, ProblemParams};
use bopo_core::grid::{box_field_bytes, box_sidecar, radial_csv, AnyGrid, Field, GridSpec};
use bopo_core::kernel::{sample, KernelParams};
use bopo_core::solver::{
    continue_to_zero_mass, gaussian_init_box, gaussian_init_radial, solve_fixed_eps, weak_residual, GroundState,
    SolverGrid, TraceEntry,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{self, RunConfig};
use crate::output::{OutputDir, OUT_ENV};
use crate::suites::{run_suite, SuiteReport, SUITES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_BOUND_VIOLATED: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

pub const CHECKPOINT_FILE: &str = "checkpoint.json";

fn load(path: &Path) -> std::result::Result<RunConfig, i32> {
    config::load(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_CONFIG
    })
}

fn report(result: Result<i32>) -> i32 {
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        EXIT_NOT_CONVERGED
    })
}

/// Serialized summary of a ground state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundStateRecord {
    pub epsilon: f64,
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub grid: GridSpec,
    pub converged: bool,
    pub iterations: usize,
    pub residual_grad: f64,
    pub residual_j: f64,
    pub residual_p: f64,
    pub pohozaev_relative: f64,
    pub weak_residual: f64,
    pub min_u: f64,
    pub energy: EnergyBreakdown,
    pub fibering: FiberingResult,
}

impl GroundStateRecord {
    fn new<G: SolverGrid>(gs: &GroundState<G>, pp: &ProblemParams) -> Result<Self> {
        Ok(GroundStateRecord {
            epsilon: gs.epsilon,
            p: pp.p,
            q: pp.kernel.q,
            a: pp.kernel.a,
            grid: gs.u.grid().spec(),
            converged: gs.converged,
            iterations: gs.iterations,
            residual_grad: gs.residual_grad,
            residual_j: gs.residual_j,
            residual_p: gs.residual_p,
            pohozaev_relative: gs.pohozaev_relative(),
            weak_residual: weak_residual(&gs.u, pp)?,
            min_u: gs.min_u,
            energy: gs.breakdown,
            fibering: gs.fibering,
        })
    }
}

/// Writes the state files; grid-specific parts go through [`Artifacts`].
trait Artifacts: SolverGrid {
    fn init(grid: &Arc<Self>) -> Field<Self>;
    /// Euclidean distance of node `i` from the origin.
    fn plot_radius(&self, i: usize) -> f64;
    fn write_field(out: &OutputDir, u: &Field<Self>) -> Result<()>;
}

impl Artifacts for bopo_core::grid::RadialGrid {
    fn init(grid: &Arc<Self>) -> Field<Self> {
        gaussian_init_radial(grid)
    }

    fn plot_radius(&self, i: usize) -> f64 {
        self.nodes()[i]
    }

    fn write_field(out: &OutputDir, u: &Field<Self>) -> Result<()> {
        out.write_bytes("u.csv", radial_csv(u, &out.comments()).as_bytes())
    }
}

impl Artifacts for bopo_core::grid::BoxGrid {
    fn init(grid: &Arc<Self>) -> Field<Self> {
        gaussian_init_box(grid)
    }

    fn plot_radius(&self, i: usize) -> f64 {
        let x = self.point(i);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    fn write_field(out: &OutputDir, u: &Field<Self>) -> Result<()> {
        out.write_bytes("u.bin", &box_field_bytes(u))?;
        out.write_json("u.json", "sidecar", &box_sidecar(u, out.provenance()))
    }
}

fn write_state<G: Artifacts>(out: &OutputDir, gs: &GroundState<G>, pp: &ProblemParams) -> Result<()> {
    out.write_json("ground_state.json", "ground_state", &GroundStateRecord::new(gs, pp)?)?;
    G::write_field(out, &gs.u)?;
    let phi = G::solve_potential(&gs.u.square(), &pp.kernel)?;
    let grid = gs.u.grid();
    let mut rows: Vec<(f64, f64, f64)> = (0..grid.len())
        .map(|i| (grid.plot_radius(i), gs.u.values()[i], phi.field().values()[i]))
        .collect();
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut body = String::from("r,u,phi\n");
    for (r, u, f) in rows {
        body.push_str(&format!("{r:e},{u:e},{f:e}\n"));
    }
    out.write_csv("plot.csv", &body)
}

// ---------------------------------------------------------------------------
// solve

pub fn cmd_solve(path: &Path) -> i32 {
    let cfg = match load(path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    report(match cfg.grid.build() {
        Ok(AnyGrid::Radial(g)) => solve_on(&cfg, &g),
        Ok(AnyGrid::Box(g)) => solve_on(&cfg, &g),
        Err(e) => return config_error(path, e),
    })
}

fn config_error(path: &Path, e: impl std::fmt::Display) -> i32 {
    eprintln!("error: {}: {e}", path.display());
    EXIT_CONFIG
}

fn solve_on<G: Artifacts>(cfg: &RunConfig, grid: &Arc<G>) -> Result<i32> {
    let out = OutputDir::create(cfg)?;
    let gs = solve_fixed_eps(&G::init(grid), &cfg.problem, &cfg.solver)?;
    write_state(&out, &gs, &cfg.problem)?;
    out.write_metadata("solve", BTreeMap::new())?;
    print_state(&gs);
    Ok(if gs.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn print_state<G>(gs: &GroundState<G>) {
    println!(
        "eps={:e} converged={} iterations={} I_eps={:e} grad={:e} J={:e} P/scale={:e}",
        gs.epsilon,
        gs.converged,
        gs.iterations,
        gs.breakdown.i_eps,
        gs.residual_grad,
        gs.residual_j,
        gs.pohozaev_relative()
    );
}

// ---------------------------------------------------------------------------
// continue

/// Completed entries and the state after the last of them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config_hash: String,
    pub seed: u64,
    pub entries: Vec<TraceEntry>,
    pub state: Vec<f64>,
}

/// The continuation record written to `trace.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub entries: Vec<TraceEntry>,
    pub violations: Vec<String>,
    pub failure: Option<String>,
    pub min_m_eps: f64,
    pub lp_median: f64,
    pub zero_mass_energy: Option<f64>,
    pub zero_mass_residual: Option<f64>,
    pub zero_mass_dual_norm: Option<f64>,
}

pub fn cmd_continue(path: &Path, resume: bool) -> i32 {
    let cfg = match load(path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    report(match cfg.grid.build() {
        Ok(AnyGrid::Radial(g)) => continue_on(&cfg, &g, resume),
        Ok(AnyGrid::Box(g)) => continue_on(&cfg, &g, resume),
        Err(e) => return config_error(path, e),
    })
}

fn continue_on<G: Artifacts>(cfg: &RunConfig, grid: &Arc<G>, resume: bool) -> Result<i32> {
    let out = OutputDir::create(cfg)?;
    let pp0 = cfg.problem.with_epsilon(cfg.schedule[0])?;
    let restart = if resume { read_checkpoint(&out, grid)? } else { None };
    if let Some((entries, _)) = &restart {
        println!("resuming after {} completed eps values", entries.len());
    }
    let mut write_err = None;
    let run = continue_to_zero_mass(&G::init(grid), &pp0, &cfg.schedule, &cfg.solver, restart, |trace, gs| {
        let e = trace.entries.last().expect("an entry was just pushed");
        println!(
            "eps={:e} m_eps={:e} grad={:e} J={:e} iterations={} converged={}",
            e.epsilon, e.m_eps, e.grad_res, e.j_res, e.iterations, e.converged
        );
        let cp = Checkpoint {
            config_hash: out.config_hash.clone(),
            seed: out.seed,
            entries: trace.entries.clone(),
            state: gs.u.values().to_vec(),
        };
        if let Err(err) = out.write_json(CHECKPOINT_FILE, "checkpoint", &cp) {
            write_err.get_or_insert(err);
        }
    })?;
    if let Some(err) = write_err {
        return Err(err);
    }
    let trace = &run.trace;
    out.write_csv("trace.csv", &trace.to_csv())?;
    let record = TraceRecord {
        entries: trace.entries.clone(),
        violations: trace.violations.clone(),
        failure: trace.failure.clone(),
        min_m_eps: trace.entries.iter().map(|e| e.m_eps).fold(f64::INFINITY, f64::min),
        lp_median: trace.lp_median(),
        zero_mass_energy: run.zero_mass_energy,
        zero_mass_residual: run.zero_mass_residual,
        zero_mass_dual_norm: run.zero_mass_dual_norm,
    };
    out.write_json("trace.json", "trace", &record)?;
    if let Some(gs) = &run.last {
        let pp = pp0.with_epsilon(gs.epsilon)?;
        write_state(&out, gs, &pp)?;
    }
    let walls: BTreeMap<String, f64> = trace
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.wall_ms > 0.0)
        .map(|(i, e)| (format!("entry_{i:02}_wall_ms"), e.wall_ms))
        .collect();
    out.write_metadata("continue", walls)?;
    for v in &trace.violations {
        eprintln!("bound violated: {v}");
    }
    if let Some(f) = &trace.failure {
        eprintln!("{f}");
    }
    if let (Some(r), Some(d)) = (run.zero_mass_residual, run.zero_mass_dual_norm) {
        println!("zero-mass weak residual={r:e} dual norm={d:e}");
    }
    Ok(if !trace.violations.is_empty() {
        EXIT_BOUND_VIOLATED
    } else if trace.failure.is_some()
        || trace.entries.len() < cfg.schedule.len()
        || trace.entries.iter().any(|e| !e.converged)
    {
        EXIT_NOT_CONVERGED
    } else {
        EXIT_OK
    })
}

#[derive(Deserialize)]
struct StampedCheckpoint {
    config_hash: String,
    checkpoint: Checkpoint,
}

fn read_checkpoint<G: Artifacts>(out: &OutputDir, grid: &Arc<G>) -> Result<Option<(Vec<TraceEntry>, Field<G>)>> {
    let path = out.path(CHECKPOINT_FILE);
    if !path.exists() {
        println!("no checkpoint at {}; starting from the beginning", path.display());
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path)?;
    let s: StampedCheckpoint = serde_json::from_str(&text).with_context(|| format!("{}", path.display()))?;
    if s.config_hash != out.config_hash || s.checkpoint.config_hash != out.config_hash {
        bail!("{} was written by a different configuration", path.display());
    }
    let state = Field::new(grid.clone(), s.checkpoint.state)?;
    Ok(Some((s.checkpoint.entries, state)))
}

// ---------------------------------------------------------------------------
// verify

pub fn cmd_verify(suite: &str, seed: u64) -> i32 {
    let names: Vec<&str> = match suite {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => {
            eprintln!("error: unknown suite `{other}`; expected one of {}, all", SUITES.join(", "));
            return EXIT_CONFIG;
        }
    };
    let root = std::env::var_os(OUT_ENV).map_or_else(|| "out".into(), std::path::PathBuf::from);
    let hash = hex::encode(Sha256::digest(format!("verify={suite}\nseed={seed}\n").as_bytes()));
    let out = match OutputDir::at(root, hash, seed) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_CONFIG;
        }
    };
    let mut failed = false;
    for name in names {
        let rep = match run_suite(name, seed) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: suite {name}: {e:#}");
                failed = true;
                continue;
            }
        };
        print_suite(&rep);
        failed |= !rep.passed;
        if let Err(e) = out.write_json(&format!("verify_{name}.json"), "report", &rep) {
            eprintln!("error: {e:#}");
            failed = true;
        }
    }
    if let Err(e) = out.write_metadata("verify", BTreeMap::new()) {
        eprintln!("error: {e:#}");
    }
    if failed {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    }
}

fn print_suite(rep: &SuiteReport) {
    for c in &rep.checks {
        let worst = c.metrics.get("worst_error").copied().unwrap_or(c.worst_slack);
        println!(
            "{} {}/{} trials={} worst={worst:e}",
            if c.passed { "PASS" } else { "FAIL" },
            rep.suite,
            c.check,
            c.trials
        );
        for f in &c.failures {
            println!("    replay: {f}");
        }
    }
}

// ---------------------------------------------------------------------------
// kernel-table

/// CSV of `K`, `C`, `Y`, `∂_r K` and `ΔK` on `n` log-spaced radii.
pub fn kernel_table(a: f64, rmin: f64, rmax: f64, n: usize) -> Result<String> {
    let p = KernelParams::new(a, 1.0)?;
    if !(rmin > 0.0 && rmax > rmin && rmax.is_finite()) {
        bail!("need 0 < rmin < rmax, got rmin = {rmin}, rmax = {rmax}");
    }
    if n < 2 {
        bail!("need at least 2 rows, got {n}");
    }
    let mut s = String::from("r,K,C,Y,dK,lapK\n");
    let (l, h) = (rmin.ln(), rmax.ln());
    for i in 0..n {
        let r = match i {
            0 => rmin,
            _ if i == n - 1 => rmax,
            _ => (l + (h - l) * i as f64 / (n - 1) as f64).exp(),
        };
        let k = sample(r, &p);
        s.push_str(&format!("{:e},{:e},{:e},{:e},{:e},{:e}\n", k.r, k.k, k.c, k.y, k.dk, k.lap_k));
    }
    Ok(s)
}

pub fn cmd_kernel_table(a: f64, rmin: f64, rmax: f64, n: usize) -> i32 {
    match kernel_table(a, rmin, rmax, n) {
        Ok(s) => {
            print!("{s}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_CONFIG
        }
    }
}

