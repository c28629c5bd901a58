//! The Bopp–Podolsky energy `V(f,g) = ∫∫ K(x-y) f(x) g(y)`, a brute-force
//! oracle for it, and numerical checks of its bilinear-form properties and
//! the functional inequalities built on it.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{dirichlet_seminorm, lp_integral, BoxField, BoxGrid, Field, Grid, GridSpec, RadialField, RadialGrid};
use crate::kernel::{eval_k, KernelParams};
use crate::potential::{radial_exponential, ConvolutionGrid, Potential};
use crate::quad::{self, integrate, Tolerance};
use crate::{Error, Result};

/// How an energy value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMethod {
    Oracle,
    ViaPotential,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPair {
    pub value: f64,
    pub method: EnergyMethod,
    pub est_error: f64,
}

/// Exponents of the weights `W_α(x) = (1+|x|²)^{-1/4}(1+|log|x||)^{-α}` and
/// `Z_γ(x) = (1+|x|)^{-γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub alpha: f64,
    pub gamma: f64,
}

impl WeightParams {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.5) || !(gamma > 0.5) {
            return Err(Error::InvalidParameter(format!(
                "weight exponents must exceed 1/2, got alpha = {alpha}, gamma = {gamma}"
            )));
        }
        Ok(WeightParams { alpha, gamma })
    }
}

/// `W_α(r)`, extended by 0 at the origin.
pub fn weight_w(r: f64, alpha: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    1.0 / ((1.0 + r * r).powf(0.25) * (1.0 + r.ln().abs()).powf(alpha))
}

pub fn weight_z(r: f64, gamma: f64) -> f64 {
    (1.0 + r).powf(-gamma)
}

/// Result of a numerical check, serialized by the `verify` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub trials: usize,
    pub worst_slack: f64,
    pub seed: u64,
    pub grid: Option<GridSpec>,
    pub params: Option<KernelParams>,
    pub passed: bool,
    pub failures: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
}

impl CheckReport {
    pub fn new(check: &str, trials: usize, seed: u64, grid: Option<GridSpec>, params: Option<KernelParams>) -> Self {
        CheckReport {
            check: check.into(),
            trials,
            worst_slack: f64::INFINITY,
            seed,
            grid,
            params,
            passed: true,
            failures: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, slack: f64, floor: f64, what: impl FnOnce() -> String) {
        self.worst_slack = self.worst_slack.min(slack);
        if !(slack >= floor) {
            self.passed = false;
            self.failures.push(what());
        }
    }
}

// ---------------------------------------------------------------------------
// oracle

/// Spherically averaged kernel `k̄(r,s) = (1/2)∫₋₁¹ K(√(r²+s²-2rsμ)) dμ`,
/// written as `(1/2rs)∫_{|r-s|}^{r+s} d K(d) dd` and integrated adaptively.
pub fn averaged_kernel(r: f64, s: f64, p: &KernelParams) -> Result<(f64, f64)> {
    let tol = Tolerance { abs: 0.0, rel: 1e-13, max_intervals: 200 };
    let q = integrate(|d| d * eval_k(d, p), (r - s).abs(), r + s, tol)?;
    let scale = 1.0 / (2.0 * r * s);
    Ok((q.value * scale, q.error * scale))
}

/// Dense cache of `k̄` on a radial grid; the O(N²) double sum over it is the
/// reference value of `V` for radial fields.
#[derive(Debug)]
pub struct RadialOracle {
    grid: Arc<RadialGrid>,
    params: Option<KernelParams>,
    kbar: Vec<f64>,
    max_error: f64,
}

impl RadialOracle {
    pub fn new(grid: Arc<RadialGrid>, p: &KernelParams) -> Result<Self> {
        let r = grid.nodes();
        let n = r.len();
        let mut kbar = vec![0.0; n * n];
        let mut max_error = 0.0_f64;
        for i in 0..n {
            for j in 0..=i {
                let (v, e) = averaged_kernel(r[i], r[j], p)?;
                kbar[i * n + j] = v;
                kbar[j * n + i] = v;
                max_error = max_error.max(e);
            }
        }
        Ok(RadialOracle { grid, params: Some(*p), kbar, max_error })
    }

    /// The same double sum with the Coulomb kernel `1/|x|` (`a → 0`).
    pub fn coulomb(grid: Arc<RadialGrid>) -> Self {
        let r = grid.nodes();
        let n = r.len();
        let mut kbar = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                kbar[i * n + j] = 1.0 / r[i].max(r[j]);
            }
        }
        RadialOracle { grid, params: None, kbar, max_error: 0.0 }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn params(&self) -> Option<KernelParams> {
        self.params
    }

    pub fn energy(&self, f: &RadialField, g: &RadialField) -> Result<EnergyPair> {
        let spec = self.grid.spec();
        if f.grid().spec() != spec || g.grid().spec() != spec {
            return Err(Error::GridMismatch("oracle built for another grid".into()));
        }
        Ok(self.energy_values(f.values(), g.values()))
    }

    pub fn energy_values(&self, f: &[f64], g: &[f64]) -> EnergyPair {
        let w = self.grid.weights();
        let n = w.len();
        let wf: Vec<f64> = w.iter().zip(f).map(|(w, v)| w * v).collect();
        let wg: Vec<f64> = w.iter().zip(g).map(|(w, v)| w * v).collect();
        // (i,j) and (j,i) are summed as one commuting term, so swapping f and
        // g reproduces the value bit for bit
        let mut total = 0.0;
        for i in 0..n {
            let row = &self.kbar[i * n..i * n + i];
            let s: f64 = row
                .iter()
                .enumerate()
                .map(|(j, k)| k * (wf[i] * wg[j] + wf[j] * wg[i]))
                .sum();
            total += s + self.kbar[i * n + i] * (wf[i] * wg[i]);
        }
        let mass_f: f64 = wf.iter().map(|v| v.abs()).sum();
        let mass_g: f64 = wg.iter().map(|v| v.abs()).sum();
        EnergyPair { value: total, method: EnergyMethod::Oracle, est_error: self.max_error * mass_f * mass_g }
    }
}

type OracleKey = (usize, u64, u64, u64);

fn oracle_cache() -> &'static Mutex<HashMap<OracleKey, Arc<RadialOracle>>> {
    static CACHE: OnceLock<Mutex<HashMap<OracleKey, Arc<RadialOracle>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Oracle for `(grid, a)`, built once per process.
pub fn cached_oracle(grid: &Arc<RadialGrid>, p: &KernelParams) -> Result<Arc<RadialOracle>> {
    let key = (grid.len(), grid.r_max().to_bits(), grid.cluster().to_bits(), p.a.to_bits());
    if let Some(o) = oracle_cache().lock().expect("oracle cache poisoned").get(&key) {
        return Ok(o.clone());
    }
    let o = Arc::new(RadialOracle::new(grid.clone(), p)?);
    oracle_cache().lock().expect("oracle cache poisoned").insert(key, o.clone());
    Ok(o)
}

/// Largest box edge accepted by the O(N²) box oracle.
pub const BOX_ORACLE_MAX_N: usize = 32;

/// Mean of `K` over a cube of edge `h` centred at the origin.
pub fn cell_average_k(h: f64, p: &KernelParams) -> f64 {
    let (x, w) = quad::gauss_legendre_on(24, 0.0, h / 2.0);
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        for (yj, wj) in x.iter().zip(&w) {
            for (zk, wk) in x.iter().zip(&w) {
                s += wi * wj * wk * eval_k((xi * xi + yj * yj + zk * zk).sqrt(), p);
            }
        }
    }
    8.0 * s / (h * h * h)
}

/// Full double sum `h⁶ Σ K(x_i - x_j) f_i g_j` on a box, with the cell
/// average of `K` on the diagonal.
pub fn box_oracle(f: &BoxField, g: &BoxField, p: &KernelParams) -> Result<EnergyPair> {
    let grid = f.grid();
    let n = grid.n_per_axis();
    if n > BOX_ORACLE_MAX_N {
        return Err(Error::InvalidParameter(format!(
            "box oracle is O(N²); coarsen to n ≤ {BOX_ORACLE_MAX_N} (got {n})"
        )));
    }
    if !f.same_grid(g) {
        return Err(Error::GridMismatch("fields live on different grids".into()));
    }
    let h = grid.spacing();
    let m = 2 * n - 1;
    let mut table = vec![0.0; m * m * m];
    for di in 0..m {
        for dj in 0..m {
            for dk in 0..m {
                let d = [di, dj, dk].map(|x| (x as f64 - (n - 1) as f64) * h);
                let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                table[(di * m + dj) * m + dk] = eval_k(r, p);
            }
        }
    }
    let c = n - 1;
    table[(c * m + c) * m + c] = cell_average_k(h, p);
    let (fv, gv) = (f.values(), g.values());
    let mut total = 0.0;
    for a in 0..fv.len() {
        if fv[a] == 0.0 {
            continue;
        }
        let [ai, aj, ak] = grid.coords(a);
        let mut s = 0.0;
        for b in 0..gv.len() {
            let [bi, bj, bk] = grid.coords(b);
            let t = ((ai + c - bi) * m + (aj + c - bj)) * m + (ak + c - bk);
            s += table[t] * gv[b];
        }
        total += fv[a] * s;
    }
    let w = h.powi(3);
    Ok(EnergyPair { value: total * w * w, method: EnergyMethod::Oracle, est_error: f64::NAN })
}

/// Grids with a brute-force reference for `V`.
pub trait OracleGrid: ConvolutionGrid {
    fn v_oracle(f: &Field<Self>, g: &Field<Self>, p: &KernelParams) -> Result<EnergyPair>;
    const FAST_METHOD: EnergyMethod;
}

impl OracleGrid for RadialGrid {
    fn v_oracle(f: &RadialField, g: &RadialField, p: &KernelParams) -> Result<EnergyPair> {
        cached_oracle(f.grid(), p)?.energy(f, g)
    }
    const FAST_METHOD: EnergyMethod = EnergyMethod::ViaPotential;
}

impl OracleGrid for BoxGrid {
    fn v_oracle(f: &BoxField, g: &BoxField, p: &KernelParams) -> Result<EnergyPair> {
        box_oracle(f, g, p)
    }
    const FAST_METHOD: EnergyMethod = EnergyMethod::Spectral;
}

/// Brute-force `V(f,g)`.
pub fn v_oracle<G: OracleGrid>(f: &Field<G>, g: &Field<G>, p: &KernelParams) -> Result<EnergyPair> {
    G::v_oracle(f, g, p)
}

/// `V(f,g) = ∫ f (K∗g)`; the error estimate is the asymmetry against `∫ g (K∗f)`.
pub fn v_fast<G: OracleGrid>(f: &Field<G>, g: &Field<G>, p: &KernelParams) -> Result<EnergyPair> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch("fields live on different grids".into()));
    }
    let grid = f.grid();
    let w = grid.weights();
    let dot = |x: &[f64], y: &[f64]| -> f64 { w.iter().zip(x.iter().zip(y)).map(|(w, (a, b))| w * a * b).sum() };
    let phi_g = grid.potential_values(g.values(), p.a);
    let value = dot(f.values(), &phi_g);
    let est_error = if Arc::ptr_eq(grid, g.grid()) && f.values() == g.values() {
        0.0
    } else {
        let phi_f = grid.potential_values(f.values(), p.a);
        (value - dot(g.values(), &phi_f)).abs()
    };
    Ok(EnergyPair { value, method: G::FAST_METHOD, est_error })
}

/// `V(ρ,ρ)` by the fast route.
pub fn self_energy<G: ConvolutionGrid>(rho: &Field<G>, a: f64) -> f64 {
    let grid = rho.grid();
    grid.self_energies(rho.values(), &[a])[0].0
}

/// `‖u‖_E = (‖∇u‖₂² + V(u²,u²)^{1/2})^{1/2}`.
pub fn e_norm<G: ConvolutionGrid>(u: &Field<G>, p: &KernelParams) -> f64 {
    let d = u.grid().dirichlet_form(u.values());
    (d + self_energy(&u.square(), p.a).max(0.0).sqrt()).sqrt()
}

// ---------------------------------------------------------------------------
// random test fields

/// Random smooth radial field: a sum of 1–4 Gaussian shells
/// `A(e^{-((r-c)/σ)²} + e^{-((r+c)/σ)²})` with random signs when requested.
pub fn random_radial_mixture(grid: &Arc<RadialGrid>, rng: &mut impl Rng, signed: bool) -> RadialField {
    let reach = (grid.r_max() / 6.0).min(4.0);
    let terms: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..=4))
        .map(|_| {
            let amp = rng.gen_range(0.5..2.0) * if signed && rng.gen_bool(0.5) { -1.0 } else { 1.0 };
            (amp, rng.gen_range(0.0..reach), rng.gen_range(0.3..1.5))
        })
        .collect();
    RadialField::from_radial(grid.clone(), |r| {
        terms
            .iter()
            .map(|&(amp, c, s)| amp * ((-((r - c) / s).powi(2)).exp() + (-((r + c) / s).powi(2)).exp()))
            .sum()
    })
    .expect("mixture samples are finite")
}

// ---------------------------------------------------------------------------
// bilinear-form checks

/// `|V(f,g)|² ≤ V(f,f) V(g,g)` on random sign-indefinite pairs; slack is
/// normalized by `V(f,f)V(g,g)`.
pub fn check_cauchy_schwarz(oracle: &RadialOracle, trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = oracle.grid().clone();
    let mut rep = CheckReport::new("cauchy_schwarz", trials, seed, Some(grid.spec()), oracle.params());
    for trial in 0..trials {
        let f = random_radial_mixture(&grid, &mut rng, true);
        let g = random_radial_mixture(&grid, &mut rng, true);
        let vff = oracle.energy(&f, &f)?.value;
        let vgg = oracle.energy(&g, &g)?.value;
        let vfg = oracle.energy(&f, &g)?.value;
        let vgf = oracle.energy(&g, &f)?.value;
        let scale = (vff * vgg).abs().max(f64::MIN_POSITIVE);
        rep.record((vff * vgg - vfg * vfg) / scale, -1e-9, || {
            format!("trial {trial} (seed {seed}): V(f,g)² exceeds V(f,f)V(g,g)")
        });
        if vfg.to_bits() != vgf.to_bits() {
            rep.passed = false;
            rep.failures.push(format!("trial {trial} (seed {seed}): V(f,g) = {vfg:e} but V(g,f) = {vgf:e}"));
        }
        let asym = (vfg - vgf).abs() / vfg.abs().max(f64::MIN_POSITIVE);
        let worst = rep.metrics.entry("max_relative_asymmetry".into()).or_insert(0.0);
        *worst = worst.max(asym);
    }
    Ok(rep)
}

/// `V(f,f) > 0` for random nonzero sign-indefinite `f`.
pub fn check_positivity(oracle: &RadialOracle, trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = oracle.grid().clone();
    let mut rep = CheckReport::new("positivity", trials, seed, Some(grid.spec()), oracle.params());
    let mut min_value = f64::INFINITY;
    for trial in 0..trials {
        let f = random_radial_mixture(&grid, &mut rng, true);
        let v = oracle.energy(&f, &f)?.value;
        let norm2 = lp_integral(&f, 2.0);
        min_value = min_value.min(v);
        rep.worst_slack = rep.worst_slack.min(v / norm2);
        if !(v > 0.0) {
            rep.passed = false;
            rep.failures.push(format!("trial {trial} (seed {seed}): V(f,f) = {v:e}"));
        }
    }
    rep.metrics.insert("min_value".into(), min_value);
    rep.metrics.insert("min_value_over_l2_squared".into(), rep.worst_slack);
    Ok(rep)
}

/// `1 - e^{-x} = x ∫₀¹ e^{-tx} dt` on a log grid, and
/// `V(f,f) = (1/a)∫₀¹ ∫∫ e^{-t|x-y|/a} f f dt` against the oracle.
pub fn check_exponential_layer(oracle: &RadialOracle, trials: usize, seed: u64) -> Result<CheckReport> {
    let p = oracle
        .params()
        .ok_or_else(|| Error::InvalidParameter("exponential layers need a finite length a".into()))?;
    let mut rep = CheckReport::new("exponential_layer", trials, seed, Some(oracle.grid().spec()), Some(p));
    let tol = Tolerance { abs: 0.0, rel: 1e-14, max_intervals: 200 };
    let mut worst_scalar = 0.0_f64;
    for k in 0..=220 {
        let x = 10f64.powf(-8.0 + k as f64 * 0.05);
        let lhs = -(-x).exp_m1();
        let rhs = x * integrate(|t| (-t * x).exp(), 0.0, 1.0, tol)?.value;
        let err = (lhs - rhs).abs() / lhs;
        worst_scalar = worst_scalar.max(err);
        rep.record(1e-12 - err, 0.0, || format!("scalar layer identity off by {err:e} at x = {x:e}"));
    }
    rep.metrics.insert("scalar_worst_relative".into(), worst_scalar);

    let grid = oracle.grid().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ts, ws) = quad::gauss_legendre_on(48, 0.0, 1.0);
    let mut worst_layer = 0.0_f64;
    for trial in 0..trials {
        let f = random_radial_mixture(&grid, &mut rng, true);
        let reference = oracle.energy(&f, &f)?.value;
        let mut layered = 0.0;
        for (t, w) in ts.iter().zip(&ws) {
            let x = radial_exponential(&grid, f.values(), p.a / t);
            let xx: f64 = grid.weights().iter().zip(f.values().iter().zip(&x)).map(|(w, (a, b))| w * a * b).sum();
            layered += w * xx;
        }
        layered /= p.a;
        let err = (layered - reference).abs() / reference.abs();
        worst_layer = worst_layer.max(err);
        rep.record(1e-6 - err, 0.0, || format!("trial {trial}: layered V off by {err:e}"));
    }
    rep.metrics.insert("layered_worst_relative".into(), worst_layer);
    Ok(rep)
}

/// `u ↦ V(u²,u²)^{1/4}` is subadditive on random pairs; slack normalized by
/// the right-hand side.
pub fn check_triangle_inequality(grid: &Arc<RadialGrid>, p: &KernelParams, trials: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = CheckReport::new("triangle_inequality", trials, seed, Some(grid.spec()), Some(*p));
    let n4 = |u: &RadialField| self_energy(&u.square(), p.a).max(0.0).powf(0.25);
    for trial in 0..trials {
        let u = random_radial_mixture(grid, &mut rng, true);
        let v = random_radial_mixture(grid, &mut rng, true);
        let sum = Field::new(grid.clone(), u.values().iter().zip(v.values()).map(|(a, b)| a + b).collect())
            .expect("finite sum");
        let rhs = n4(&u) + n4(&v);
        rep.record((rhs - n4(&sum)) / rhs, -1e-9, || format!("trial {trial}: triangle inequality fails"));
    }
    rep
}

// ---------------------------------------------------------------------------
// inequalities

/// `V(f,f) / (∫W_α f)²`; zero input gives `+∞` with the flag set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundRatio {
    pub ratio: f64,
    pub zero_input: bool,
}

pub fn lower_bound_ratio(f: &RadialField, alpha: f64, p: &KernelParams) -> Result<LowerBoundRatio> {
    if !(alpha > 0.5) {
        return Err(Error::InvalidParameter(format!("alpha must exceed 1/2, got {alpha}")));
    }
    let max = f.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(i) = f.values().iter().position(|&v| v < -1e-12 * max) {
        return Err(Error::Precondition(format!("f must be nonnegative; sample {i} is {}", f.values()[i])));
    }
    if max == 0.0 {
        return Ok(LowerBoundRatio { ratio: f64::INFINITY, zero_input: true });
    }
    let grid = f.grid();
    let wint: f64 = grid
        .weights()
        .iter()
        .zip(grid.nodes().iter().zip(f.values()))
        .map(|(w, (&r, v))| w * weight_w(r, alpha) * v)
        .sum();
    let v = self_energy(f, p.a);
    Ok(LowerBoundRatio { ratio: v / (wint * wint), zero_input: false })
}

/// A named radial profile of the lower-bound test family.
pub struct FamilyMember {
    pub name: String,
    pub profile: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

/// Thirty nonnegative radial profiles: Gaussians of width `2^-4 … 2^6`,
/// shifted Gaussian shells, and `r^{-2}`-type profiles cut off smoothly.
pub fn lower_bound_family() -> Vec<FamilyMember> {
    let mut out = Vec::new();
    for k in -4..=6 {
        let s = 2f64.powi(k);
        out.push(FamilyMember {
            name: format!("gaussian_w{s}"),
            profile: Box::new(move |r| (-(r / s).powi(2)).exp()),
        });
    }
    for &c in &[1.0, 2.0, 4.0, 8.0, 16.0] {
        for &s in &[0.5, 2.0] {
            out.push(FamilyMember {
                name: format!("shell_c{c}_w{s}"),
                profile: Box::new(move |r| (-((r - c) / s).powi(2)).exp() + (-((r + c) / s).powi(2)).exp()),
            });
        }
    }
    for &s in &[0.25, 1.0, 4.0] {
        for &cut in &[10.0, 40.0, 100.0] {
            out.push(FamilyMember {
                name: format!("inverse_square_s{s}_cut{cut}"),
                profile: Box::new(move |r| (-(r / cut).powi(4)).exp() / (1.0 + (r / s).powi(2))),
            });
        }
    }
    out
}

/// `(1/π)‖φ_u‖_𝒜 ‖∇u‖₂ - ‖u‖₃³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L3Slack {
    pub slack: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub scale: f64,
}

pub fn check_l3_inequality<G: ConvolutionGrid>(u: &Field<G>, p: &KernelParams) -> Result<L3Slack> {
    let phi: Potential<G> = G::solve_potential(&u.square(), p)?;
    let lhs = phi.a_norm_sq().max(0.0).sqrt() * dirichlet_seminorm(u) / PI;
    let rhs = lp_integral(u, 3.0);
    Ok(L3Slack { slack: rhs.mul_add(-1.0, lhs), lhs, rhs, scale: lhs.max(rhs) })
}

/// Empirical embedding constants `∫Wu² / (‖∇u‖₂² + V(u²,u²)^{1/2})` and the
/// same with `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRatios {
    pub w_ratio: f64,
    pub z_ratio: f64,
}

pub fn check_weighted_embeddings(u: &RadialField, w: &WeightParams, p: &KernelParams) -> EmbeddingRatios {
    let grid = u.grid();
    let e2 = e_norm(u, p).powi(2);
    let (mut iw, mut iz) = (0.0, 0.0);
    for ((wt, &r), v) in grid.weights().iter().zip(grid.nodes()).zip(u.values()) {
        iw += wt * weight_w(r, w.alpha) * v * v;
        iz += wt * weight_z(r, w.gamma) * v * v;
    }
    if e2 == 0.0 {
        return EmbeddingRatios { w_ratio: 0.0, z_ratio: 0.0 };
    }
    EmbeddingRatios { w_ratio: iw / e2, z_ratio: iz / e2 }
}
