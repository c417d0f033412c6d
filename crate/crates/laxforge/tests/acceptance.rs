mod common;

use std::io::Write;
use std::time::Instant;

use common::{acceptance_cases, c};
use laxforge::harness::{generate_instance, run_suite, Bound, Report, SuiteConfig, CHECKS};
use laxforge::isospectral::{ode_residual, solve_profile_finite, solve_profile_infinity, solve_r_profile_infinity};
use laxforge::model::dimensions;
use laxforge::C;

struct Outcome {
    criterion: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn config(suites: &[&str]) -> SuiteConfig {
    SuiteConfig {
        cases: acceptance_cases(),
        instances_per_case: 10,
        suites: suites.iter().map(|s| s.to_string()).collect(),
        ..SuiteConfig::default()
    }
}

/// Pass state and a summary of the given checks: the worst residual of
/// upper-bound checks and the smallest residual of lower-bound checks.
fn checks_outcome(report: &Report, names: &[&str]) -> (bool, String) {
    let mut pass = true;
    let mut parts = Vec::new();
    for &name in names {
        let chk = CHECKS.iter().find(|c| c.name == name).unwrap();
        let recs: Vec<_> = report.records.iter().filter(|r| r.check == name).collect();
        pass &= !recs.is_empty() && recs.iter().all(|r| r.pass);
        let residuals = recs.iter().filter_map(|r| r.residual);
        let (label, value) = match chk.bound {
            Bound::Upper => ("max", residuals.fold(0.0, f64::max)),
            Bound::Lower => ("min", residuals.fold(f64::INFINITY, f64::min)),
        };
        let failed = recs.iter().filter(|r| !r.pass).count();
        parts.push(format!("{name} {label} {value:.2e} over {} ({failed} failed)", recs.len()));
    }
    (pass, parts.join("; "))
}

fn isospectral_odes() -> (bool, String) {
    let base = [c(0.3, 0.1), c(-0.2, 0.5), c(0.7, -0.4), c(1.3, 0.6)];
    let mut worst: f64 = 0.0;
    let mut spots = true;
    for r in 2..=4 {
        let t = &base[..r];
        let pm = solve_profile_finite(0, r, t).unwrap();
        worst = worst.max(ode_residual(&pm, t, 1e-5).unwrap());
        let f = pm.matrix(t);
        let lead = t[r - 1];
        for j in 1..r {
            let power = (r - j) as f64 / (r - 1) as f64;
            spots &= (f[(j - 1, j - 1)] - lead.powf(power)).norm() < 1e-12;
            spots &= (f[(j - 1, 0)] - t[r - j]).norm() < 1e-12;
        }
    }
    for r in 4..=6 {
        let mut t: Vec<C> = (0..r).map(|k| c(0.4 - 0.1 * k as f64, 0.2 + 0.15 * k as f64)).collect();
        t[r - 1] = c(1.0, 0.0);
        t[r - 2] = c(0.0, 0.0);
        let q = solve_profile_infinity(r, &t).unwrap();
        let g = solve_r_profile_infinity(r, &t).unwrap();
        worst = worst.max(ode_residual(&q, &t, 1e-5).unwrap());
        worst = worst.max(ode_residual(&g, &t, 1e-5).unwrap());
        let shift = q.shift_values(&t).unwrap();
        let fq = q.matrix(&t);
        let fg = g.matrix(&t);
        for k in 1..=r - 4 {
            let entry = if k == 1 { shift[k] } else { fq[(k, k - 2)] };
            let want = (r - 3 - k) as f64 / (r - 3) as f64 * t[r - 3];
            spots &= (entry - want).norm() < 1e-12;
        }
        for j in 1..r - 4 {
            let want = (r - 4 - j) as f64 / (r - 3) as f64 * t[r - 3];
            spots &= (fg[(j + 1, j - 1)] - want).norm() < 1e-12;
        }
    }
    (worst < 1e-6 && spots, format!("max ode residual {worst:.2e}, spot values exact: {spots}"))
}

fn bookkeeping(a: &Report, b: &Report) -> (bool, String) {
    let same = a.without_timings().to_json() == b.without_timings().to_json();
    let mut dims = true;
    for case in acceptance_cases() {
        let d = dimensions(&generate_instance(&case, 0).unwrap().profile).unwrap();
        let r = case.r_inf + case.orders.iter().sum::<usize>();
        dims &= d.is_consistent() && d.r == r && d.genus + 3 == r && d.dim_space + 7 == 4 * r;
    }
    (same && dims, format!("byte-identical reports: {same}, dimension identities: {dims}"))
}

#[test]
fn acceptance_criteria() {
    let start = Instant::now();
    let gauge = run_suite(&config(&["gauge"])).unwrap();
    let gauge_secs = start.elapsed().as_secs_f64();
    let all = config(&["symplectic", "hamiltonian-equivalence", "compatibility", "spectral", "isospectral"]);
    let report = run_suite(&all).unwrap();
    let again = run_suite(&all).unwrap();

    let mut outcomes = Vec::new();
    let mut push = |criterion, name, (pass, detail): (bool, String)| outcomes.push(Outcome { criterion, name, pass, detail });

    let (pass, detail) = checks_outcome(&gauge, &["gauge"]);
    push(1, "gauge equivalence", (pass && gauge_secs < 30.0, format!("{detail}; {gauge_secs:.1} s")));
    push(2, "symplecticity", checks_outcome(&report, &["symplectic", "non-symplectic-witness"]));
    push(3, "hamiltonian equivalence", checks_outcome(&report, &["hamiltonian-equivalence"]));
    push(4, "zero curvature", checks_outcome(&report, &["compatibility", "compatibility-control"]));
    push(5, "spectral recovery", checks_outcome(&report, &["spectral-determinant"]));
    push(6, "hamiltonians and spectral invariants", checks_outcome(&report, &["spectral-hamiltonian"]));
    push(7, "isospectral odes", isospectral_odes());
    push(
        8,
        "isospectral condition",
        checks_outcome(&report, &["isospectral", "isospectral-control", "isospectral-hamiltonian"]),
    );
    push(9, "determinism and bookkeeping", bookkeeping(&report, &again));

    let mut out = std::io::stdout().lock();
    writeln!(out).unwrap();
    for o in &outcomes {
        let status = if o.pass { "PASS" } else { "FAIL" };
        writeln!(out, "criterion {} {status} {}: {}", o.criterion, o.name, o.detail).unwrap();
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.criterion).collect();
    assert!(failed.is_empty(), "failed criteria {failed:?}");
}
