//! Instance generation, verification suites and reports.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coords::{geo_to_lax, qp_to_geo, symplectic_defect, OperCoords};
use crate::geogauge::{build_geo_l_qp, hamiltonians_geo, oracle_geo_l};
use crate::isospectral::{
    iso_hamiltonian_defect, isospectral_residual_with, lax_condition_residual, ode_residual, qp_to_iso,
    solve_q_profiles, solve_r_profiles, IsoOptions,
};
use crate::model::{free_directions, frozen_directions, normalize, DeformationVector, Direction, FinitePole, Pole, PoleProfile, TimeChart};
use crate::opergauge::{compatibility_residual, hamiltonians_oper, p2_finite, p2_inf, solve_h, CompatOptions};
use crate::ratcalc::{coeff_at_infinity, laurent_slice, sample_lambdas};
use crate::spectral::{det_geo_l, ham_vs_invariants};
use crate::model::ExtendedPoint;
use crate::{LaxError, Result, C};

/// A case: `r_∞` and the finite pole orders.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Case {
    /// Order at infinity.
    pub r_inf: usize,
    /// Orders of the finite poles.
    pub orders: Vec<usize>,
}

impl Case {
    /// Shorthand constructor.
    pub fn new(r_inf: usize, orders: &[usize]) -> Self {
        Case { r_inf, orders: orders.to_vec() }
    }
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{:?})", self.r_inf, self.orders)
    }
}

/// A random problem instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    /// Pole positions and orders.
    pub profile: PoleProfile,
    /// Normalized times.
    pub chart: TimeChart,
    /// Normalization constant `ω`.
    pub omega: C,
    /// Random `(q, p)`.
    pub oper: OperCoords,
}

const MAX_REJECTIONS: usize = 100;

fn disk(rng: &mut ChaCha8Rng, radius: f64) -> C {
    let r = radius * rng.gen::<f64>().sqrt();
    C::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

fn annulus(rng: &mut ChaCha8Rng) -> C {
    C::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU))
}

fn draw_separated(
    rng: &mut ChaCha8Rng,
    fixed: &[C],
    count: usize,
    radius: f64,
    sep: f64,
    avoid: &[C],
) -> Result<Vec<C>> {
    let mut out: Vec<C> = Vec::with_capacity(count);
    let mut failures = 0;
    while out.len() < count {
        let z = disk(rng, radius);
        if fixed.iter().chain(&out).all(|w| (z - w).norm() >= sep) && avoid.iter().all(|w| (z - w).norm() >= 0.1) {
            out.push(z);
        } else {
            failures += 1;
            if failures > MAX_REJECTIONS {
                return Err(LaxError::Degenerate("rejection sampling exhausted".into()));
            }
        }
    }
    Ok(out)
}

/// Draws a normalized instance of `case` from `seed`.
///
/// Times lie on the annulus `0.5 ≤ |t| ≤ 2`, with `Re t_{X_s,r_s−1} > 0.25`.
/// Positions are at least `0.5` apart and the `q_i` at least `0.1` apart and
/// from the poles.
pub fn generate_instance(case: &Case, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = case.orders.len();
    let n_fixed = match case.r_inf {
        1 => n.min(2),
        2 => n.min(1),
        _ => 0,
    };
    let fixed: Vec<C> = (0..n_fixed).map(|s| C::new(s as f64, 0.0)).collect();
    let free = draw_separated(&mut rng, &fixed, n - n_fixed, 2.0, 0.5, &[])?;
    let positions: Vec<C> = fixed.iter().chain(&free).copied().collect();
    let poles: Vec<FinitePole> = positions.iter().zip(&case.orders).map(|(&x, &r)| FinitePole { x, r }).collect();
    let profile = PoleProfile::new(case.r_inf, poles)?;
    let mut raw = TimeChart::zeros(&profile);
    for k in 0..case.r_inf {
        raw.inf[k] = annulus(&mut rng);
    }
    for (s, &r) in case.orders.iter().enumerate() {
        for k in 0..r {
            let mut t = annulus(&mut rng);
            if k == r - 1 {
                let mut failures = 0;
                while t.re <= 0.25 {
                    failures += 1;
                    if failures > MAX_REJECTIONS {
                        return Err(LaxError::Degenerate("rejection sampling exhausted".into()));
                    }
                    t = annulus(&mut rng);
                }
            }
            raw.finite[s][k] = t;
        }
    }
    for d in frozen_directions(&profile) {
        if let Direction::Time(p, k) = d {
            *raw.t_mut(p, k) = C::new(0.0, 0.0);
        }
    }
    let chart = normalize(&profile, &raw)?;
    let g = profile.genus();
    let q = draw_separated(&mut rng, &[], g, 2.0, 0.1, &positions)?;
    let p: Vec<C> = (0..g).map(|_| disk(&mut rng, 1.0)).collect();
    Ok(Instance { profile, chart, omega: C::new(1.0, 0.0), oper: OperCoords { q, p } })
}

/// Suite names accepted by [`SuiteConfig::suites`].
pub const SUITES: [&str; 7] =
    ["gauge", "symplectic", "hamiltonian-equivalence", "compatibility", "spectral", "isospectral", "ode"];

/// Size of every injected fault.
pub const FAULT_SIZE: f64 = 1e-3;

/// Quantity perturbed by fault injection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// Adds [`FAULT_SIZE`] to every coefficient `H` in the compatibility and
    /// Hamiltonian-equivalence checks.
    H,
    /// Scales the deformation matrices by `1 + FAULT_SIZE`, which scales
    /// every `ν` coefficient, in the compatibility and isospectral checks.
    #[serde(rename = "nu")]
    Nu,
    /// Adds [`FAULT_SIZE`] to every profile entry in the isospectral and
    /// ODE checks.
    F,
}

impl std::str::FromStr for Fault {
    type Err = LaxError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" => Ok(Fault::H),
            "nu" => Ok(Fault::Nu),
            "F" => Ok(Fault::F),
            _ => Err(LaxError::Config(format!("unknown fault `{s}`, expected H, nu or F"))),
        }
    }
}

/// Direction of the comparison of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Passes when the residual is below the tolerance.
    Upper,
    /// Passes when the residual exceeds the tolerance (negative controls).
    Lower,
}

/// A named check with its suite, comparison and default tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckSpec {
    /// Check name, also the key of [`SuiteConfig::tol`].
    pub name: &'static str,
    /// Suite the check belongs to.
    pub suite: &'static str,
    /// Comparison with the tolerance.
    pub bound: Bound,
    /// Default tolerance.
    pub tol: f64,
}

/// All checks, in execution order.
pub const CHECKS: [CheckSpec; 12] = [
    CheckSpec { name: "gauge", suite: "gauge", bound: Bound::Upper, tol: 1e-8 },
    CheckSpec { name: "symplectic", suite: "symplectic", bound: Bound::Upper, tol: 1e-6 },
    CheckSpec { name: "non-symplectic-witness", suite: "symplectic", bound: Bound::Lower, tol: 1e-3 },
    CheckSpec { name: "hamiltonian-equivalence", suite: "hamiltonian-equivalence", bound: Bound::Upper, tol: 1e-8 },
    CheckSpec { name: "compatibility", suite: "compatibility", bound: Bound::Upper, tol: 1e-5 },
    CheckSpec { name: "compatibility-control", suite: "compatibility", bound: Bound::Lower, tol: 1e-4 },
    CheckSpec { name: "spectral-determinant", suite: "spectral", bound: Bound::Upper, tol: 1e-9 },
    CheckSpec { name: "spectral-hamiltonian", suite: "spectral", bound: Bound::Upper, tol: 1e-8 },
    CheckSpec { name: "isospectral", suite: "isospectral", bound: Bound::Upper, tol: 1e-5 },
    CheckSpec { name: "isospectral-control", suite: "isospectral", bound: Bound::Lower, tol: 1e-2 },
    CheckSpec { name: "isospectral-hamiltonian", suite: "isospectral", bound: Bound::Upper, tol: 1e-6 },
    CheckSpec { name: "ode", suite: "ode", bound: Bound::Upper, tol: 1e-6 },
];

/// Configuration of [`run_suite`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    /// Cases to run.
    pub cases: Vec<Case>,
    /// Instances per case; instance `i` uses the seed `seed + i`.
    pub instances_per_case: usize,
    /// Base seed.
    pub seed: u64,
    /// Tolerance overrides keyed by check name.
    pub tol: BTreeMap<String, f64>,
    /// Suites to run.
    pub suites: Vec<String>,
    /// Optional fault injection.
    pub fault_inject: Option<Fault>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            cases: vec![
                Case::new(4, &[]),
                Case::new(3, &[2]),
                Case::new(2, &[2]),
                Case::new(1, &[3]),
                Case::new(5, &[1, 2]),
            ],
            instances_per_case: 10,
            seed: 0,
            tol: BTreeMap::new(),
            suites: SUITES.iter().map(|s| s.to_string()).collect(),
            fault_inject: None,
        }
    }
}

impl SuiteConfig {
    /// Rejects unknown suites and checks, non-positive tolerances and
    /// unsupported cases.
    pub fn validate(&self) -> Result<()> {
        for s in &self.suites {
            if !SUITES.contains(&s.as_str()) {
                return Err(LaxError::Config(format!("unknown suite `{s}`")));
            }
        }
        for (k, v) in &self.tol {
            if !CHECKS.iter().any(|c| c.name == k) {
                return Err(LaxError::Config(format!("unknown check `{k}`")));
            }
            if !(v.is_finite() && *v > 0.0) {
                return Err(LaxError::Config(format!("tolerance of `{k}` must be positive")));
            }
        }
        for case in &self.cases {
            let poles = case.orders.iter().enumerate().map(|(s, &r)| FinitePole { x: C::new(s as f64, 0.0), r }).collect();
            PoleProfile::new(case.r_inf, poles).map_err(|e| LaxError::Config(format!("case {case}: {e}")))?;
        }
        Ok(())
    }

    /// Tolerance of a check: the override if present, else the default.
    pub fn tolerance(&self, check: &CheckSpec) -> f64 {
        self.tol.get(check.name).copied().unwrap_or(check.tol)
    }

    fn runs(&self, suite: &str) -> bool {
        self.suites.iter().any(|s| s == suite)
    }
}

/// Outcome of one check on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    /// Case of the instance.
    pub case: Case,
    /// Seed of the instance.
    pub seed: u64,
    /// Check name.
    pub check: String,
    /// Suite of the check.
    pub suite: String,
    /// Residual, absent when the check raised an error.
    pub residual: Option<f64>,
    /// Tolerance applied.
    pub tolerance: f64,
    /// Comparison with the tolerance.
    pub bound: Bound,
    /// Whether the check passed.
    pub pass: bool,
    /// Error raised by the check.
    pub error: Option<String>,
    /// Wall time in milliseconds.
    pub wall_ms: f64,
}

/// Counts over a report.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    /// Number of records.
    pub total: usize,
    /// Passing records.
    pub passed: usize,
    /// Failing records.
    pub failed: usize,
}

/// Result of [`run_suite`], ordered by case, seed and check name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// One record per check and instance.
    pub records: Vec<CheckRecord>,
    /// Counts.
    pub summary: Summary,
}

impl Report {
    fn from_records(mut records: Vec<CheckRecord>) -> Self {
        records.sort_by(|a, b| (&a.case, a.seed, &a.check).cmp(&(&b.case, b.seed, &b.check)));
        let passed = records.iter().filter(|r| r.pass).count();
        let summary = Summary { total: records.len(), passed, failed: records.len() - passed };
        Report { records, summary }
    }

    /// Process exit status: 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.summary.failed > 0)
    }

    /// Copy with every wall time set to zero.
    pub fn without_timings(&self) -> Report {
        let mut out = self.clone();
        out.records.iter_mut().for_each(|r| r.wall_ms = 0.0);
        out
    }

    /// Pretty-printed JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Largest residual of a check over all records, `None` if the check
    /// never ran.
    pub fn worst(&self, check: &str) -> Option<f64> {
        self.records.iter().filter(|r| r.check == check).filter_map(|r| r.residual).reduce(f64::max)
    }
}

/// Runs the selected suites over the generated instances.
///
/// Instances run on a rayon pool whose size is capped by the environment
/// variable `LAXFORGE_THREADS` when set. Errors are configuration errors;
/// failing checks are reported in the records.
pub fn run_suite(config: &SuiteConfig) -> Result<Report> {
    config.validate()?;
    let jobs: Vec<(Case, u64)> = config
        .cases
        .iter()
        .flat_map(|c| (0..config.instances_per_case as u64).map(move |i| (c.clone(), config.seed.wrapping_add(i))))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("LAXFORGE_THREADS") {
        let n: usize = v.parse().map_err(|_| LaxError::Config(format!("LAXFORGE_THREADS = `{v}` is not a count")))?;
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| LaxError::Config(e.to_string()))?;
    let records = pool.install(|| jobs.par_iter().flat_map_iter(|(case, seed)| run_instance(config, case, *seed)).collect());
    Ok(Report::from_records(records))
}

fn run_instance(config: &SuiteConfig, case: &Case, seed: u64) -> Vec<CheckRecord> {
    let inst = generate_instance(case, seed);
    CHECKS
        .iter()
        .filter(|chk| config.runs(chk.suite))
        .filter_map(|chk| {
            let start = Instant::now();
            let outcome = match &inst {
                Ok(inst) => evaluate(chk.name, inst, config.fault_inject),
                Err(e) => Some(Err(e.clone())),
            }?;
            let tolerance = config.tolerance(chk);
            let (residual, error) = match outcome {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let pass = residual.is_some_and(|r| match chk.bound {
                Bound::Upper => r < tolerance,
                Bound::Lower => r > tolerance,
            });
            Some(CheckRecord {
                case: case.clone(),
                seed,
                check: chk.name.to_string(),
                suite: chk.suite.to_string(),
                residual,
                tolerance,
                bound: chk.bound,
                pass,
                error,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect()
}

fn fault_size(fault: Option<Fault>, which: Fault) -> f64 {
    if fault == Some(which) {
        FAULT_SIZE
    } else {
        0.0
    }
}

/// Residual of the named check on one instance, `None` when the check
/// does not apply to the instance.
pub fn evaluate(check: &str, inst: &Instance, fault: Option<Fault>) -> Option<Result<f64>> {
    let (pr, ch, omega) = (&inst.profile, &inst.chart, inst.omega);
    let nontrivial_profiles = pr.r_inf >= 4 || pr.poles.iter().any(|p| p.r >= 2);
    match check {
        "gauge" => Some(gauge_residual(inst)),
        "symplectic" => {
            let f = |x: &[C]| Ok(qp_to_geo(&OperCoords::from_flat(x), omega, pr)?.flatten());
            Some(symplectic_defect(&f, &inst.oper.flatten()))
        }
        "non-symplectic-witness" => {
            let p_norm = qp_to_geo(&inst.oper, omega, pr).map(|g| g.p.max_abs()).unwrap_or(0.0);
            (p_norm > 0.1).then(|| {
                let f = |x: &[C]| {
                    let oper = OperCoords::from_flat(x);
                    let g0 = solve_h(&oper, ch, pr)?.1;
                    Ok(geo_to_lax(&qp_to_geo(&oper, omega, pr)?, omega, g0, ch, pr).flatten())
                };
                symplectic_defect(&f, &inst.oper.flatten())
            })
        }
        "hamiltonian-equivalence" => Some(ham_equivalence_residual(inst, fault_size(fault, Fault::H))),
        "compatibility" => {
            let opts = CompatOptions {
                h_perturbation: C::new(fault_size(fault, Fault::H), 0.0),
                a_scale: 1.0 + fault_size(fault, Fault::Nu),
                ..CompatOptions::default()
            };
            Some(max_over_directions(pr, false, |alpha| compatibility_residual(alpha, &inst.oper, ch, pr, &opts)))
        }
        "compatibility-control" => {
            let opts = CompatOptions { h_perturbation: C::new(FAULT_SIZE, 0.0), ..CompatOptions::default() };
            Some(max_over_directions(pr, false, |alpha| compatibility_residual(alpha, &inst.oper, ch, pr, &opts)))
        }
        "spectral-determinant" => Some(determinant_residual(inst)),
        "spectral-hamiltonian" => Some((|| {
            let geo = qp_to_geo(&inst.oper, omega, pr)?;
            let l = build_geo_l_qp(&geo, ch, pr, omega)?;
            let ham = hamiltonians_geo(&geo, ch, pr, omega)?;
            Ok(ham_vs_invariants(&l, &ham, ch, pr)?.max_discrepancy())
        })()),
        "isospectral" => {
            let opts = IsoOptions {
                a_scale: 1.0 + fault_size(fault, Fault::Nu),
                f_perturbation: fault_size(fault, Fault::F),
                ..IsoOptions::default()
            };
            Some(qp_to_iso(&inst.oper, ch, pr, omega).and_then(|iso| {
                max_over_directions(pr, false, |alpha| isospectral_residual_with(&iso, alpha, ch, pr, omega, &opts))
            }))
        }
        "isospectral-control" => nontrivial_profiles.then(|| {
            let geo = qp_to_geo(&inst.oper, omega, pr)?;
            let l = build_geo_l_qp(&geo, ch, pr, omega)?;
            let lax = geo_to_lax(&geo, omega, l.g0, ch, pr);
            let family = |_: &PoleProfile, _: &TimeChart| Ok((lax.clone(), omega));
            max_over_directions(pr, true, |alpha| lax_condition_residual(&family, alpha, ch, pr, 1e-6))
        }),
        "isospectral-hamiltonian" => Some(qp_to_iso(&inst.oper, ch, pr, omega).and_then(|iso| {
            free_directions(pr)
                .into_iter()
                .filter(|d| matches!(d, Direction::Time(..)))
                .map(|d| iso_hamiltonian_defect(&iso, d, ch, pr, omega, 1e-6))
                .try_fold(0.0, |m, r| r.map(|r| f64::max(m, r)))
        })),
        "ode" => nontrivial_profiles.then(|| ode_check(inst, fault_size(fault, Fault::F))),
        _ => None,
    }
}

fn max_over_directions(
    profile: &PoleProfile,
    times_only: bool,
    f: impl Fn(&DeformationVector) -> Result<f64>,
) -> Result<f64> {
    free_directions(profile)
        .into_iter()
        .filter(|d| !times_only || matches!(d, Direction::Time(..)))
        .map(|d| f(&DeformationVector::single(d, C::new(1.0, 0.0))))
        .try_fold(0.0, |m, r| r.map(|r| f64::max(m, r)))
}

fn gauge_residual(inst: &Instance) -> Result<f64> {
    let (pr, ch, omega) = (&inst.profile, &inst.chart, inst.omega);
    let geo = qp_to_geo(&inst.oper, omega, pr)?;
    let l = build_geo_l_qp(&geo, ch, pr, omega)?;
    let o = oracle_geo_l(&inst.oper, ch, pr, omega)?;
    let zs = sample_lambdas(&pr.positions(), &inst.oper.q, 20, 0);
    let mut worst = (l.g0 - o.g0).norm() / (1.0 + o.g0.norm());
    for (a, b) in [(&l.l11, &o.l11), (&l.l12, &o.l12), (&l.l21, &o.l21), (&l.l22, &o.l22)] {
        for &z in &zs {
            let (x, y) = (a.eval(z), b.eval(z));
            worst = worst.max((x - y).norm() / (1.0 + y.norm()));
        }
    }
    Ok(worst)
}

fn ham_equivalence_residual(inst: &Instance, h_shift: f64) -> Result<f64> {
    let (pr, ch, omega) = (&inst.profile, &inst.chart, inst.omega);
    let (mut h, _) = solve_h(&inst.oper, ch, pr)?;
    h.inf.iter_mut().chain(h.finite.iter_mut().flatten()).for_each(|x| *x += h_shift);
    let oper = hamiltonians_oper(&h, ch, pr)?;
    let geo = hamiltonians_geo(&qp_to_geo(&inst.oper, omega, pr)?, ch, pr, omega)?;
    oper.iter().try_fold(0.0, |m, (d, v)| {
        let w = geo.get(d).ok_or_else(|| LaxError::InternalConsistency(format!("no geometric Hamiltonian for {d}")))?;
        Ok(f64::max(m, (v - w).norm() / (1.0 + v.norm())))
    })
}

/// Largest `|coefficient − convolution| / (1 + |convolution|)` over the
/// Laurent windows of `det L̃` fixed by the times.
fn determinant_residual(inst: &Instance) -> Result<f64> {
    let (pr, ch, omega) = (&inst.profile, &inst.chart, inst.omega);
    let l = build_geo_l_qp(&qp_to_geo(&inst.oper, omega, pr)?, ch, pr, omega)?;
    let det = det_geo_l(&l, ch, pr)?.exact;
    let r = pr.r_inf as i64;
    let rel = |got: C, want: C| (got - want).norm() / (1.0 + want.norm());
    let mut worst: f64 = 0.0;
    for k in (r - 3).max(0)..=2 * r - 4 {
        worst = worst.max(rel(coeff_at_infinity(&det, k as i32)?, p2_inf(ch, pr, k)));
    }
    let t = |k| ch.t(Pole::Inf, k);
    match r {
        2 => worst = worst.max(rel(coeff_at_infinity(&det, -1)?, -2.0 * t(1) * t(0))),
        1 => {
            worst = worst.max(rel(coeff_at_infinity(&det, -1)?, C::new(0.0, 0.0)));
            worst = worst.max(rel(coeff_at_infinity(&det, -2)?, -t(0) * t(0)));
        }
        _ => {}
    }
    for (s, p) in pr.poles.iter().enumerate() {
        let x = ExtendedPoint::Finite(p.x);
        for j in p.r + 1..=2 * p.r {
            let got = laurent_slice(&det, x, -(j as i32), -(j as i32))?.coeffs[0];
            worst = worst.max(rel(got, p2_finite(ch, pr, s, j)));
        }
    }
    Ok(worst)
}

fn ode_check(inst: &Instance, eps: f64) -> Result<f64> {
    let (pr, ch) = (&inst.profile, &inst.chart);
    let (q, r) = (solve_q_profiles(pr, ch)?, solve_r_profiles(pr, ch)?);
    let mut worst: f64 = 0.0;
    for pm in std::iter::once(&q.inf).chain(std::iter::once(&r.inf)).chain(&q.finite) {
        if pm.size() > 0 {
            worst = worst.max(ode_residual(&pm.perturbed(eps), ch.at(pm.pole), 1e-5)?);
        }
    }
    Ok(worst)
}
