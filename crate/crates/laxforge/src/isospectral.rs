//! Explicit time dependence of the coordinates `(Q, R)` that makes the
//! isospectral condition `δ_t L̃ = ∂_λ Ã` hold with `(u, v)` fixed.
//!
//! At each pole the coordinates are `Q = F(t) u` and `R = F(t) v` (plus a
//! shift at infinity), where the columns of `F` solve a lower-triangular
//! system `σ W ∂_{t_j} P = z^{s_j} P / j (mod z^n)` in the generating-series
//! notation `P(z) = Σ_b P_b z^b`:
//! - at `X_s`: `σ(z) = Σ_k t_{X_s,r_s−1−k} z^k`, `W = diag(1/(r_s−1−b))`,
//!   `s_j = r_s − 1 − j`, with `P = (Q_{X_s,r_s}, …, Q_{X_s,2})`;
//! - at `∞` for `Q`: `σ(z) = Σ_k t_{∞,r_∞−1−k} z^k`, `W = diag(1/(r_∞−2−b))`,
//!   `s_j = r_∞ − 1 − j`, with `P = (ω, Q_{∞,r_∞−4}, …, Q_{∞,0})`;
//! - at `∞` for `R`: the same `σ` and `s_j`, `W = diag(1/(r_∞−1−b))`, with
//!   `P = (−1, 0, R_{∞,r_∞−4}, …, R_{∞,0})`.
//!
//! The systems are invariant under the weighted scaling `z → cz`,
//! `t_{p,top−k} → c^{−k} t_{p,top−k}`, so each entry of a column starting
//! at row `m` is weighted-homogeneous of weight `b − m`. The Euler identity
//! `Σ_j w_j t_j ∂_j P_b = (b − m) P_b` then gives every row from the
//! derivatives prescribed by the system, which only involve earlier rows.
//! Entries are kept as sums of monomials with a fractional power of the
//! leading time `t_{X_s,r_s−1}` (see [`TimePoly`]).
//!
//! # Invariants
//! - `F` is lower triangular; at `X_s` its diagonal is
//!   `t_{X_s,r_s−1}^{(r_s−j)/(r_s−1)}`, at infinity it is unit.
//! - Integration constants are zero: every column is weighted-homogeneous,
//!   so any constant is absorbed into `(u, v)`.
//! - Fractional powers use the principal branch of the logarithm.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::coords::{geo_to_qp, lax_to_geo, qp_to_geo, IsoCoords, LaxCoords, OperCoords};
use crate::geogauge::{build_geo_a, build_geo_l_qp, build_geo_l_qr, GeoLax};
use crate::model::{apply_deformation, DeformationVector, Direction, Pole, PoleProfile, PoleVector, TimeChart};
use crate::opergauge::{hamilton_velocity, oper_gradient};
use crate::ratcalc::sample_lambdas;
use crate::spectral::spectral_invariants;
use crate::{LaxError, Result, C};

const ZERO: C = C::new(0.0, 0.0);
const PRUNE: f64 = 1e-14;
/// Largest finite order and order at infinity whose profiles are validated
/// by the test suite; larger ones are checked against the system at runtime.
const MAX_FINITE_ORDER: usize = 4;
const MAX_INF_ORDER: usize = 6;
const GATE_STEP: f64 = 1e-5;
const GATE_TOL: f64 = 1e-6;

/// Polynomial in the times of one pole, allowing a fractional power of one
/// of them: every exponent is stored as a numerator over the common
/// denominator `den`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimePoly {
    den: i64,
    nvars: usize,
    terms: BTreeMap<Vec<i64>, f64>,
}

impl TimePoly {
    fn zero(den: i64, nvars: usize) -> Self {
        TimePoly { den, nvars, terms: BTreeMap::new() }
    }

    fn constant(c: f64, den: i64, nvars: usize) -> Self {
        let mut p = Self::zero(den, nvars);
        p.insert(vec![0; nvars], c);
        p
    }

    /// `t_j^{num/den}`.
    fn power(j: usize, num: i64, den: i64, nvars: usize) -> Self {
        let mut e = vec![0; nvars];
        e[j] = num;
        let mut p = Self::zero(den, nvars);
        p.insert(e, 1.0);
        p
    }

    fn insert(&mut self, e: Vec<i64>, c: f64) {
        let v = self.terms.entry(e).or_insert(0.0);
        *v += c;
    }

    fn prune(mut self) -> Self {
        self.terms.retain(|_, c| c.abs() > PRUNE);
        self
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), *c);
        }
        out.prune()
    }

    fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|v| *v *= c);
        out.prune()
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.den, self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.insert(ea.iter().zip(eb).map(|(a, b)| a + b).collect(), ca * cb);
            }
        }
        out.prune()
    }

    /// `∂/∂t_j`.
    fn diff(&self, j: usize) -> Self {
        let mut out = Self::zero(self.den, self.nvars);
        for (e, c) in &self.terms {
            if e[j] != 0 {
                let mut e2 = e.clone();
                e2[j] -= self.den;
                out.insert(e2, c * e[j] as f64 / self.den as f64);
            }
        }
        out.prune()
    }

    /// True when no term survives.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as `(coefficient, exponents)` with the exponent of `t_j` at
    /// index `j`.
    pub fn terms(&self) -> Vec<(f64, Vec<f64>)> {
        self.terms.iter().map(|(e, c)| (*c, e.iter().map(|&n| n as f64 / self.den as f64).collect())).collect()
    }

    /// Value at the times `t_0, t_1, …` of the pole.
    pub fn eval(&self, times: &[C]) -> C {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = C::new(*c, 0.0);
                for (j, &n) in e.iter().enumerate() {
                    if n == 0 {
                        continue;
                    }
                    v *= if n % self.den == 0 {
                        times[j].powi((n / self.den) as i32)
                    } else {
                        (times[j].ln() * (n as f64 / self.den as f64)).exp()
                    };
                }
                v
            })
            .sum()
    }
}

/// Which coordinates a [`ProfileMatrix`] produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    /// `Q` from `u`.
    Q,
    /// `R` from `v`.
    R,
}

/// The triangular system solved by one profile.
#[derive(Clone, Debug, PartialEq)]
struct System {
    den: i64,
    nvars: usize,
    /// `σ_k` for `0 ≤ k < rows`.
    sigma: Vec<TimePoly>,
    /// `1/σ_0`.
    lead_inv: TimePoly,
    /// Row divisors `c_b`, so that `W = diag(1/c_b)`.
    divisor: Vec<f64>,
    /// `(j, s_j)` for every direction of the system; the Euler weight of
    /// `t_j` equals `s_j`.
    dirs: Vec<(usize, usize)>,
    /// First row carrying an equation.
    first_row: usize,
}

impl System {
    fn rows(&self) -> usize {
        self.divisor.len()
    }

    /// Column of the system whose first nonzero row is `m`, seeded by `init`.
    fn column(&self, m: usize, init: TimePoly) -> Vec<TimePoly> {
        let n = self.rows();
        let zero = TimePoly::zero(self.den, self.nvars);
        let mut p = vec![zero.clone(); n];
        p[m] = init;
        for b in m + 1..n {
            let mut acc = zero.clone();
            for &(j, s) in self.dirs.iter().filter(|d| d.1 > 0) {
                let mut rhs = if b >= s && b - s >= m { p[b - s].scale(1.0 / j as f64) } else { zero.clone() };
                for (bp, pb) in p.iter().enumerate().take(b).skip(m) {
                    let term = self.sigma[b - bp].mul(&pb.diff(j)).scale(-1.0 / self.divisor[bp]);
                    rhs = rhs.add(&term);
                }
                let d = self.lead_inv.mul(&rhs).scale(self.divisor[b]);
                let mut weighted = d.scale(s as f64);
                weighted = weighted.mul(&TimePoly::power(j, self.den, self.den, self.nvars));
                acc = acc.add(&weighted);
            }
            p[b] = acc.scale(1.0 / (b - m) as f64);
        }
        p
    }
}

/// Lower-triangular profile `F` at one pole, with the optional constant
/// column added at infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileMatrix {
    /// Pole of the profile.
    pub pole: Pole,
    /// Coordinates produced.
    pub kind: ProfileKind,
    /// `entries[i][j]` for `j ≤ i`, in the row order of the coordinate
    /// vector: `(Q_{X_s,r_s}, …, Q_{X_s,2})` at `X_s` and
    /// `(Q_{∞,r_∞−4}, …, Q_{∞,0})` at infinity.
    pub entries: Vec<Vec<TimePoly>>,
    /// The column multiplying `ω` for `Q` at infinity, and `−(t_{∞,r_∞−3}, …, t_{∞,1})`
    /// for `R` at infinity.
    pub shift: Option<Vec<TimePoly>>,
    system: System,
    /// Full solution columns (shift column first when present), over all
    /// rows of the system including the constant head rows at infinity.
    columns: Vec<Vec<TimePoly>>,
}

impl ProfileMatrix {
    /// Size of `F`.
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// `F` at the given times of the pole.
    pub fn matrix(&self, times: &[C]) -> DMatrix<C> {
        let n = self.size();
        DMatrix::from_fn(n, n, |i, j| if j <= i { self.entries[i][j].eval(times) } else { ZERO })
    }

    /// Shift vector at the given times.
    pub fn shift_values(&self, times: &[C]) -> Option<Vec<C>> {
        self.shift.as_ref().map(|s| s.iter().map(|p| p.eval(times)).collect())
    }

    /// `shift + F x`.
    pub fn apply(&self, times: &[C], x: &[C]) -> Vec<C> {
        let y = self.matrix(times) * DVector::from_column_slice(x);
        let mut out: Vec<C> = y.iter().copied().collect();
        if let Some(s) = self.shift_values(times) {
            out.iter_mut().zip(s).for_each(|(o, v)| *o += v);
        }
        out
    }

    /// Copy with `eps` added to every entry, for fault injection.
    pub fn perturbed(&self, eps: f64) -> ProfileMatrix {
        let bump = |p: &TimePoly| p.add(&TimePoly::constant(eps, p.den, p.nvars));
        ProfileMatrix {
            entries: self.entries.iter().map(|row| row.iter().map(bump).collect()).collect(),
            shift: self.shift.as_ref().map(|s| s.iter().map(bump).collect()),
            columns: self.columns.iter().map(|col| col.iter().map(bump).collect()).collect(),
            ..self.clone()
        }
    }

    /// Solves `shift + F x = y` for `x`.
    pub fn invert(&self, times: &[C], y: &[C]) -> Result<Vec<C>> {
        let mut rhs = DVector::from_column_slice(y);
        if let Some(s) = self.shift_values(times) {
            rhs.iter_mut().zip(s).for_each(|(o, v)| *o -= v);
        }
        let f = self.matrix(times);
        if f.diagonal().iter().any(|d| d.norm() == 0.0) {
            return Err(LaxError::Singular(format!("profile at {:?} has a vanishing diagonal", self.pole)));
        }
        f.solve_lower_triangular(&rhs)
            .map(|x| x.iter().copied().collect())
            .ok_or_else(|| LaxError::Singular("triangular profile solve failed".into()))
    }
}

fn check_lead(times: &[C], r: usize, pole: Pole) -> Result<()> {
    let t = times[r - 1];
    if t.norm() == 0.0 {
        return Err(LaxError::Singular(format!("leading time at {pole:?} vanishes")));
    }
    if r >= 3 && t.re < 0.0 && t.im.abs() <= 1e-12 * t.norm() {
        return Err(LaxError::BranchAmbiguity(format!("leading time at {pole:?} lies on the branch cut")));
    }
    Ok(())
}

/// Runs the system at `times` and rejects profiles that fail it.
fn gate(pm: &ProfileMatrix, times: &[C]) -> Result<()> {
    let scale = pm.columns.iter().flatten().map(|p| p.eval(times).norm()).fold(1.0, f64::max);
    let res = ode_residual(pm, times, GATE_STEP)?;
    if res > GATE_TOL * scale {
        return Err(LaxError::InternalConsistency(format!("profile at {:?} misses its system by {res:.2e}", pm.pole)));
    }
    Ok(())
}

/// Profile at the finite pole `X_s` of order `r_s`; `times` holds
/// `t_{X_s,0}, …, t_{X_s,r_s−1}`.
pub fn solve_profile_finite(s: usize, r_s: usize, times: &[C]) -> Result<ProfileMatrix> {
    let pole = Pole::X(s);
    if r_s == 0 || times.len() < r_s {
        return Err(LaxError::MalformedInput(format!("order {r_s} with {} times", times.len())));
    }
    check_lead(times, r_s, pole)?;
    let n = r_s - 1;
    let den = n.max(1) as i64;
    let nvars = r_s;
    let system = System {
        den,
        nvars,
        sigma: (0..n).map(|k| TimePoly::power(n - k, den, den, nvars)).collect(),
        lead_inv: TimePoly::power(n, -den, den, nvars),
        divisor: (0..n).map(|a| (n - a) as f64).collect(),
        dirs: (1..=n).map(|j| (j, n - j)).collect(),
        first_row: 0,
    };
    let columns: Vec<Vec<TimePoly>> =
        (0..n).map(|m| system.column(m, TimePoly::power(n, (n - m) as i64, den, nvars))).collect();
    let entries = (0..n).map(|a| (0..=a).map(|m| columns[m][a].clone()).collect()).collect();
    let pm = ProfileMatrix { pole, kind: ProfileKind::Q, entries, shift: None, system, columns };
    if r_s > MAX_FINITE_ORDER {
        gate(&pm, times)?;
    }
    Ok(pm)
}

fn infinity_system(r: usize, kind: ProfileKind) -> System {
    let nvars = r;
    let rows = match kind {
        ProfileKind::Q => r - 2,
        ProfileKind::R => r - 1,
    };
    let sigma = (0..rows)
        .map(|k| match k {
            0 => TimePoly::constant(1.0, 1, nvars),
            1 => TimePoly::zero(1, nvars),
            _ => TimePoly::power(r - 1 - k, 1, 1, nvars),
        })
        .collect();
    let top = match kind {
        ProfileKind::Q => r - 2,
        ProfileKind::R => r - 1,
    };
    System {
        den: 1,
        nvars,
        sigma,
        lead_inv: TimePoly::constant(1.0, 1, nvars),
        divisor: (0..rows).map(|b| (top - b) as f64).collect(),
        dirs: (1..=r - 3).map(|j| (j, r - 1 - j)).collect(),
        first_row: 2,
    }
}

fn check_normalized(r: usize, times: &[C]) -> Result<()> {
    if times.len() < r {
        return Err(LaxError::MalformedInput(format!("order {r} with {} times", times.len())));
    }
    if r >= 3 && (times[r - 1] != C::new(1.0, 0.0) || times[r - 2] != ZERO) {
        return Err(LaxError::NormalizationConflict("expected t[inf,r-1] = 1 and t[inf,r-2] = 0".into()));
    }
    Ok(())
}

fn empty_profile(kind: ProfileKind) -> ProfileMatrix {
    ProfileMatrix {
        pole: Pole::Inf,
        kind,
        entries: Vec::new(),
        shift: None,
        system: System {
            den: 1,
            nvars: 0,
            sigma: Vec::new(),
            lead_inv: TimePoly::zero(1, 0),
            divisor: Vec::new(),
            dirs: Vec::new(),
            first_row: 0,
        },
        columns: Vec::new(),
    }
}

/// Profile of `Q` at infinity; `times` holds `t_{∞,0}, …, t_{∞,r_∞−1}`
/// in the normalized chart. Empty for `r_∞ ≤ 3`.
pub fn solve_profile_infinity(r_inf: usize, times: &[C]) -> Result<ProfileMatrix> {
    check_normalized(r_inf, times)?;
    if r_inf < 4 {
        return Ok(empty_profile(ProfileKind::Q));
    }
    let system = infinity_system(r_inf, ProfileKind::Q);
    let one = TimePoly::constant(1.0, 1, r_inf);
    let columns: Vec<Vec<TimePoly>> = (0..=r_inf - 3).map(|m| system.column(m, one.clone())).collect();
    let size = r_inf - 3;
    let entries = (0..size).map(|i| (0..=i).map(|j| columns[j + 1][i + 1].clone()).collect()).collect();
    let shift = Some((0..size).map(|i| columns[0][i + 1].clone()).collect());
    let pm = ProfileMatrix { pole: Pole::Inf, kind: ProfileKind::Q, entries, shift, system, columns };
    if r_inf > MAX_INF_ORDER {
        gate(&pm, times)?;
    }
    Ok(pm)
}

/// Profile of `R` at infinity. Empty for `r_∞ ≤ 3`.
pub fn solve_r_profile_infinity(r_inf: usize, times: &[C]) -> Result<ProfileMatrix> {
    check_normalized(r_inf, times)?;
    if r_inf < 4 {
        return Ok(empty_profile(ProfileKind::R));
    }
    let system = infinity_system(r_inf, ProfileKind::R);
    let one = TimePoly::constant(1.0, 1, r_inf);
    let mut columns = vec![system.column(0, one.clone())];
    columns.extend((2..=r_inf - 2).map(|m| system.column(m, one.clone())));
    let size = r_inf - 3;
    let entries = (0..size).map(|i| (0..=i).map(|j| columns[j + 1][i + 2].clone()).collect()).collect();
    let shift = Some((0..size).map(|i| columns[0][i + 2].scale(-1.0)).collect());
    let pm = ProfileMatrix { pole: Pole::Inf, kind: ProfileKind::R, entries, shift, system, columns };
    if r_inf > MAX_INF_ORDER {
        gate(&pm, times)?;
    }
    Ok(pm)
}

/// Profiles of one chart: infinity first, then each finite pole.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileSet {
    /// Profile at infinity (empty for `r_∞ ≤ 3`).
    pub inf: ProfileMatrix,
    /// Profile at each finite pole.
    pub finite: Vec<ProfileMatrix>,
}

/// Profiles of `Q` for the whole profile.
pub fn solve_q_profiles(profile: &PoleProfile, chart: &TimeChart) -> Result<ProfileSet> {
    let inf = solve_profile_infinity(profile.r_inf, chart.at(Pole::Inf))?;
    let finite = profile
        .poles
        .iter()
        .enumerate()
        .map(|(s, p)| solve_profile_finite(s, p.r, chart.at(Pole::X(s))))
        .collect::<Result<_>>()?;
    Ok(ProfileSet { inf, finite })
}

/// Profiles of `R`: the finite-pole matrices are those of `Q`.
pub fn solve_r_profiles(profile: &PoleProfile, chart: &TimeChart) -> Result<ProfileSet> {
    let q = solve_q_profiles(profile, chart)?;
    let inf = solve_r_profile_infinity(profile.r_inf, chart.at(Pole::Inf))?;
    let finite = q.finite.into_iter().map(|pm| ProfileMatrix { kind: ProfileKind::R, ..pm }).collect();
    Ok(ProfileSet { inf, finite })
}

/// Largest residual of the profile's system with the derivatives taken by
/// central differences of step `h` in every direction of the system.
pub fn ode_residual(pm: &ProfileMatrix, times: &[C], h: f64) -> Result<f64> {
    let sys = &pm.system;
    if h.is_nan() || h <= 0.0 {
        return Err(LaxError::MalformedInput("step must be positive".into()));
    }
    let eval_cols = |t: &[C]| -> Vec<Vec<C>> {
        pm.columns.iter().map(|col| col.iter().map(|p| p.eval(t)).collect()).collect()
    };
    let base = eval_cols(times);
    let sigma: Vec<C> = sys.sigma.iter().map(|p| p.eval(times)).collect();
    let mut worst: f64 = 0.0;
    for &(j, s) in &sys.dirs {
        let (mut tp, mut tm) = (times.to_vec(), times.to_vec());
        tp[j] += h;
        tm[j] -= h;
        let (cp, cm) = (eval_cols(&tp), eval_cols(&tm));
        if cp.iter().chain(&cm).flatten().any(|v| !v.is_finite()) {
            return Err(LaxError::Degenerate("profile is not finite near the given times".into()));
        }
        for (c, col) in base.iter().enumerate() {
            let d: Vec<C> = (0..col.len()).map(|b| (cp[c][b] - cm[c][b]) / (2.0 * h)).collect();
            for b in sys.first_row..sys.rows() {
                let lhs: C = (0..=b).map(|bp| sigma[b - bp] * d[bp] / sys.divisor[bp]).sum();
                let rhs = if b >= s { col[b - s] / j as f64 } else { ZERO };
                worst = worst.max((lhs - rhs).norm());
            }
        }
    }
    Ok(worst)
}

fn sum_first(v: &PoleVector, profile: &PoleProfile) -> C {
    (0..profile.n()).map(|s| v.at(s, 1)).sum()
}

fn near(a: C, b: C) -> bool {
    (a - b).norm() <= 1e-9 * (1.0 + a.norm().max(b.norm()))
}

/// `ω` in the isospectral chart: the constant `omega` for `r_∞ ≥ 2`, and
/// `Σ_s X_s u_{X_s,1} + Σ_s Q_{X_s,2}(t, u)` for `r_∞ = 1`, which requires
/// `Σ_s u_{X_s,1} = 0`.
pub fn omega_profile(u: &PoleVector, chart: &TimeChart, profile: &PoleProfile, omega: C) -> Result<C> {
    if profile.r_inf >= 2 {
        return Ok(omega);
    }
    let s1 = sum_first(u, profile);
    if !near(s1, ZERO) {
        return Err(LaxError::Chart(format!("sum of u[X,1] is {s1}, expected 0")));
    }
    let mut w = ZERO;
    for (s, p) in profile.poles.iter().enumerate() {
        w += p.x * u.at(s, 1);
        if p.r >= 2 {
            let pm = solve_profile_finite(s, p.r, chart.at(Pole::X(s)))?;
            let x: Vec<C> = (0..p.r - 1).map(|a| u.at(s, p.r - a)).collect();
            w += pm.apply(chart.at(Pole::X(s)), &x)[p.r - 2];
        }
    }
    Ok(w)
}

fn check_iso_constraints(iso: &IsoCoords, chart: &TimeChart, profile: &PoleProfile, omega: C) -> Result<()> {
    let (su, sv) = (sum_first(&iso.u, profile), sum_first(&iso.v, profile));
    let t0 = chart.t(Pole::Inf, 0);
    match profile.r_inf {
        2 if !near(su, omega) => Err(LaxError::Chart(format!("sum of u[X,1] is {su}, expected omega = {omega}"))),
        1 if !near(omega, omega_profile(&iso.u, chart, profile, omega)?) => {
            Err(LaxError::Chart("omega differs from its isospectral profile".into()))
        }
        1 | 2 if !near(sv, -t0) => Err(LaxError::Chart(format!("sum of v[X,1] is {sv}, expected {}", -t0))),
        _ => Ok(()),
    }
}

/// `(u, v) ↦ (Q, R)` at the given times: `Q_{X_s,1} = u_{X_s,1}`,
/// `R_{X_s,1} = v_{X_s,1}`, the other finite entries through `F`, and at
/// infinity `Q = ω (shift + F u)`, `R = shift + F v`.
pub fn iso_to_lax(iso: &IsoCoords, chart: &TimeChart, profile: &PoleProfile, omega: C) -> Result<LaxCoords> {
    iso_to_lax_perturbed(iso, chart, profile, omega, 0.0)
}

/// [`iso_to_lax`] with every profile matrix replaced by
/// [`ProfileMatrix::perturbed`]`(eps)`.
pub fn iso_to_lax_perturbed(
    iso: &IsoCoords,
    chart: &TimeChart,
    profile: &PoleProfile,
    omega: C,
    eps: f64,
) -> Result<LaxCoords> {
    check_iso_constraints(iso, chart, profile, omega)?;
    let mut q = PoleVector::zeros(profile);
    let mut r = PoleVector::zeros(profile);
    let n_inf = q.inf.len();
    if n_inf > 0 {
        let t = chart.at(Pole::Inf);
        let rev = |v: &[C]| v.iter().rev().copied().collect::<Vec<C>>();
        let qi = solve_profile_infinity(profile.r_inf, t)?.perturbed(eps).apply(t, &rev(&iso.u.inf));
        q.inf = rev(&qi).iter().map(|x| omega * x).collect();
        r.inf = rev(&solve_r_profile_infinity(profile.r_inf, t)?.perturbed(eps).apply(t, &rev(&iso.v.inf)));
    }
    for (s, p) in profile.poles.iter().enumerate() {
        let t = chart.at(Pole::X(s));
        q.finite[s][0] = iso.u.at(s, 1);
        r.finite[s][0] = iso.v.at(s, 1);
        if p.r < 2 {
            continue;
        }
        let pm = solve_profile_finite(s, p.r, t)?.perturbed(eps);
        let pick = |v: &PoleVector| (0..p.r - 1).map(|a| v.at(s, p.r - a)).collect::<Vec<C>>();
        for (a, (qa, ra)) in pm.apply(t, &pick(&iso.u)).into_iter().zip(pm.apply(t, &pick(&iso.v))).enumerate() {
            q.finite[s][p.r - a - 1] = qa;
            r.finite[s][p.r - a - 1] = ra;
        }
    }
    Ok(LaxCoords { q, r })
}

/// Inverse of [`iso_to_lax`] at the given times.
pub fn lax_to_iso(lax: &LaxCoords, chart: &TimeChart, profile: &PoleProfile, omega: C) -> Result<IsoCoords> {
    let mut u = PoleVector::zeros(profile);
    let mut v = PoleVector::zeros(profile);
    if !u.inf.is_empty() {
        if omega == ZERO {
            return Err(LaxError::Singular("omega vanishes".into()));
        }
        let t = chart.at(Pole::Inf);
        let rev = |v: &[C]| v.iter().rev().copied().collect::<Vec<C>>();
        let scaled: Vec<C> = lax.q.inf.iter().map(|x| x / omega).collect();
        u.inf = rev(&solve_profile_infinity(profile.r_inf, t)?.invert(t, &rev(&scaled))?);
        v.inf = rev(&solve_r_profile_infinity(profile.r_inf, t)?.invert(t, &rev(&lax.r.inf))?);
    }
    for (s, p) in profile.poles.iter().enumerate() {
        let t = chart.at(Pole::X(s));
        u.finite[s][0] = lax.q.at(s, 1);
        v.finite[s][0] = lax.r.at(s, 1);
        if p.r < 2 {
            continue;
        }
        let pm = solve_profile_finite(s, p.r, t)?;
        let pick = |w: &PoleVector| (0..p.r - 1).map(|a| w.at(s, p.r - a)).collect::<Vec<C>>();
        let (x, y) = (pm.invert(t, &pick(&lax.q))?, pm.invert(t, &pick(&lax.r))?);
        for a in 0..p.r - 1 {
            u.finite[s][p.r - a - 1] = x[a];
            v.finite[s][p.r - a - 1] = y[a];
        }
    }
    Ok(IsoCoords { u, v })
}

/// Coordinates `(Q, R)` and `ω` as functions of the times and positions.
pub type LaxFamily<'a> = dyn Fn(&PoleProfile, &TimeChart) -> Result<(LaxCoords, C)> + 'a;

/// Options of [`isospectral_residual_with`] and [`lax_condition_residual_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct IsoOptions {
    /// Step of the central difference.
    pub h: f64,
    /// Factor applied to `Ã`; one for the genuine check.
    pub a_scale: f64,
    /// Constant added to every profile entry; zero for the genuine check.
    pub f_perturbation: f64,
}

impl Default for IsoOptions {
    fn default() -> Self {
        IsoOptions { h: 1e-6, a_scale: 1.0, f_perturbation: 0.0 }
    }
}

/// `max |δ_t L̃ − ∂_λ Ã| / (1 + |∂_λ Ã|)` over the entries `(1,1)`, `(1,2)`,
/// `(2,1)` at 20 sample points, for a family of coordinates. `δ_t L̃` is a
/// central difference of step `h` along `α`, positions included.
pub fn lax_condition_residual(
    family: &LaxFamily,
    alpha: &DeformationVector,
    chart: &TimeChart,
    profile: &PoleProfile,
    h: f64,
) -> Result<f64> {
    lax_condition_residual_with(family, alpha, chart, profile, &IsoOptions { h, ..IsoOptions::default() })
}

/// [`lax_condition_residual`] with options.
pub fn lax_condition_residual_with(
    family: &LaxFamily,
    alpha: &DeformationVector,
    chart: &TimeChart,
    profile: &PoleProfile,
    opts: &IsoOptions,
) -> Result<f64> {
    let h = opts.h;
    alpha.validate(profile)?;
    if alpha.alpha.values().all(|a| *a == ZERO) {
        return Ok(0.0);
    }
    let build = |p: &PoleProfile, t: &TimeChart| -> Result<(LaxCoords, GeoLax, C)> {
        let (lax, om) = family(p, t)?;
        let l = build_geo_l_qr(&lax, t, p, om)?;
        Ok((lax, l, om))
    };
    let (lax, l, om) = build(profile, chart)?;
    let (pp, tp) = apply_deformation(profile, chart, alpha, h);
    let (pm, tm) = apply_deformation(profile, chart, alpha, -h);
    let (_, lp, _) = build(&pp, &tp)?;
    let (_, lm, _) = build(&pm, &tm)?;
    let probe = build_geo_a(alpha, &lax, &l, chart, profile, om, ZERO)?;
    let l_omega = if profile.r_inf == 1 { -om * probe.nu_ext.nu_m1 } else { ZERO };
    let a = build_geo_a(alpha, &lax, &l, chart, profile, om, l_omega)?;
    let da = [a.a11.derivative(), a.a12.derivative(), a.a21.derivative()].map(|f| f.scale(C::new(opts.a_scale, 0.0)));
    let mut worst: f64 = 0.0;
    for z in sample_lambdas(&profile.positions(), &[], 20, 0) {
        let dl = [
            (lp.l11.eval(z) - lm.l11.eval(z)) / (2.0 * h),
            (lp.l12.eval(z) - lm.l12.eval(z)) / (2.0 * h),
            (lp.l21.eval(z) - lm.l21.eval(z)) / (2.0 * h),
        ];
        for (x, y) in dl.iter().zip(&da) {
            let y = y.eval(z);
            worst = worst.max((x - y).norm() / (1.0 + y.norm()));
        }
    }
    Ok(worst)
}

/// [`lax_condition_residual`] for the family built by [`iso_to_lax`] with
/// `(u, v)` fixed and `ω` from [`omega_profile`].
pub fn isospectral_residual(
    iso: &IsoCoords,
    alpha: &DeformationVector,
    chart: &TimeChart,
    profile: &PoleProfile,
    omega: C,
    h: f64,
) -> Result<f64> {
    isospectral_residual_with(iso, alpha, chart, profile, omega, &IsoOptions { h, ..IsoOptions::default() })
}

/// [`isospectral_residual`] with options.
pub fn isospectral_residual_with(
    iso: &IsoCoords,
    alpha: &DeformationVector,
    chart: &TimeChart,
    profile: &PoleProfile,
    omega: C,
    opts: &IsoOptions,
) -> Result<f64> {
    let family = |p: &PoleProfile, t: &TimeChart| -> Result<(LaxCoords, C)> {
        let om = omega_profile(&iso.u, t, p, omega)?;
        Ok((iso_to_lax_perturbed(iso, t, p, om, opts.f_perturbation)?, om))
    };
    lax_condition_residual_with(&family, alpha, chart, profile, opts)
}

/// `(q, p)` of the point with isospectral coordinates `iso` at the given times.
pub fn iso_to_qp(iso: &IsoCoords, chart: &TimeChart, profile: &PoleProfile, omega: C) -> Result<OperCoords> {
    let om = omega_profile(&iso.u, chart, profile, omega)?;
    let lax = iso_to_lax(iso, chart, profile, om)?;
    let g0 = build_geo_l_qr(&lax, chart, profile, om)?.g0;
    geo_to_qp(&lax_to_geo(&lax, om, g0, chart, profile)?, om, profile)
}

/// Isospectral coordinates of an oper point at the given times.
pub fn qp_to_iso(oper: &OperCoords, chart: &TimeChart, profile: &PoleProfile, omega: C) -> Result<IsoCoords> {
    let geo = qp_to_geo(oper, omega, profile)?;
    let l = build_geo_l_qp(&geo, chart, profile, omega)?;
    let lax = crate::coords::geo_to_lax(&geo, omega, l.g0, chart, profile);
    lax_to_iso(&lax, chart, profile, omega)
}

/// `2 I_{p,k}` as a function of `(q, p)`.
fn twice_invariant(oper: &OperCoords, pole: Pole, k: usize, chart: &TimeChart, profile: &PoleProfile, omega: C) -> Result<C> {
    let l = build_geo_l_qp(&qp_to_geo(oper, omega, profile)?, chart, profile, omega)?;
    let inv = spectral_invariants(&l, chart, profile)?;
    Ok(2.0 * inv.invariants.get(&(pole, k)).copied().unwrap_or_default())
}

/// Checks that `2 I_{p,k}` is the Hamiltonian of the time `t_{p,k}` in the
/// isospectral chart.
///
/// With `x = φ_t(y)` the map from `y = (u, v)` to the canonical `(q, p)`,
/// a Hamiltonian `K` in the chart `y` satisfies
/// `X_{Ham}(x) − X_K(x) = ∂_t φ_t(y)`. The vector fields come from
/// [`oper_gradient`], `∂_t φ_t` from a central difference of step `h`, and
/// the result is the largest entry of their
/// difference over `1 + max |X_{Ham}|`.
pub fn iso_hamiltonian_defect(
    iso: &IsoCoords,
    direction: Direction,
    chart: &TimeChart,
    profile: &PoleProfile,
    omega: C,
    h: f64,
) -> Result<f64> {
    let Direction::Time(pole, k) = direction else {
        return Err(LaxError::MalformedInput("only time directions carry spectral invariants".into()));
    };
    let alpha = DeformationVector::single(direction, C::new(1.0, 0.0));
    alpha.validate(profile)?;
    let om = omega_profile(&iso.u, chart, profile, omega)?;
    let x0 = iso_to_qp(iso, chart, profile, omega)?;
    let (_, tp) = apply_deformation(profile, chart, &alpha, h);
    let (_, tm) = apply_deformation(profile, chart, &alpha, -h);
    let (xp, xm) = (iso_to_qp(iso, &tp, profile, omega)?.flatten(), iso_to_qp(iso, &tm, profile, omega)?.flatten());
    let dphi: Vec<C> = xp.iter().zip(&xm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let (vq, vp) = hamilton_velocity(&alpha, &x0, chart, profile)?;
    let g = x0.q.len();
    let (kq, kp) = oper_gradient(&|x: &OperCoords| twice_invariant(x, pole, k, chart, profile, om), &x0, profile)?;
    let xk: Vec<C> = kp.into_iter().chain(kq.into_iter().map(|v| -v)).collect();
    let xh: Vec<C> = vq.into_iter().chain(vp).collect();
    let scale = 1.0 + xh.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok((0..2 * g).map(|i| (xh[i] - xk[i] - dphi[i]).norm()).fold(0.0, f64::max) / scale)
}
