//! Darboux charts and their transition maps.
//!
//! - [`OperCoords`] `(q, p)`: apparent singularities and dual momenta.
//! - [`GeoCoords`] `(Q, P)`: partial-fraction coefficients of `L̃_{1,2}` and
//!   the conjugate momenta defined by `p_i = Σ P ∂Q/∂q_i`.
//! - [`LaxCoords`] `(Q, R)`: the same `Q` with momenta adapted to `L̃_{1,1}`.
//! - [`IsoCoords`] `(u, v)`: time-independent coordinates of the
//!   isospectral chart, built in [`crate::isospectral`].
//!
//! # Invariants
//! - `(q, p)` has `g` entries each; `(Q, P)` and `(Q, R)` have
//!   `g + c/2` entries each where `c` is the constraint count of the profile.
//! - After [`geo_to_qp`] the `q` are in canonical order: lexicographic in
//!   `(Re, Im)`.
//!
//! When `r_∞ ≤ 2` the momenta `P` are fixed by solving the Jacobian
//! relations together with the linear constraints on `P` as one square
//! system, so no coordinate is singled out for elimination.

use nalgebra::DMatrix;

use crate::model::{PoleProfile, PoleVector, TimeChart};
use crate::ratcalc::{partial_fractions, Poly, RationalFunction};
use crate::structlin::{solve_dense, toeplitz_solve, LowerToeplitz};
use crate::{LaxError, Result, C};

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Apparent singularities `q` and dual momenta `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperCoords {
    /// `q_1, …, q_g`.
    pub q: Vec<C>,
    /// `p_1, …, p_g`.
    pub p: Vec<C>,
}

/// Geometric Darboux coordinates `(Q, P)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeoCoords {
    /// `Q_{p,k}`.
    pub q: PoleVector,
    /// `P_{p,k}`.
    pub p: PoleVector,
}

/// Geometric Lax coordinates `(Q, R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaxCoords {
    /// `Q_{p,k}`.
    pub q: PoleVector,
    /// `R_{p,k}`.
    pub r: PoleVector,
}

/// Isospectral coordinates `(u, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoCoords {
    /// `u_{p,k}`, indexed like `Q`.
    pub u: PoleVector,
    /// `v_{p,k}`, indexed like `R`.
    pub v: PoleVector,
}

impl OperCoords {
    /// Sorts the pairs `(q_i, p_i)` lexicographically by `(Re q, Im q)`.
    pub fn canonical(&self) -> Self {
        let mut pairs: Vec<(C, C)> = self.q.iter().copied().zip(self.p.iter().copied()).collect();
        pairs.sort_by(|a, b| {
            a.0.re.partial_cmp(&b.0.re).unwrap_or(std::cmp::Ordering::Equal).then(
                a.0.im.partial_cmp(&b.0.im).unwrap_or(std::cmp::Ordering::Equal),
            )
        });
        OperCoords { q: pairs.iter().map(|x| x.0).collect(), p: pairs.iter().map(|x| x.1).collect() }
    }

    /// Concatenation `(q, p)`.
    pub fn flatten(&self) -> Vec<C> {
        let mut out = self.q.clone();
        out.extend_from_slice(&self.p);
        out
    }

    /// Inverse of [`OperCoords::flatten`].
    pub fn from_flat(x: &[C]) -> Self {
        let g = x.len() / 2;
        OperCoords { q: x[..g].to_vec(), p: x[g..].to_vec() }
    }
}

impl GeoCoords {
    /// Concatenation `(Q, P)`.
    pub fn flatten(&self) -> Vec<C> {
        let mut out = self.q.flatten();
        out.extend(self.p.flatten());
        out
    }
}

impl LaxCoords {
    /// Concatenation `(Q, R)`.
    pub fn flatten(&self) -> Vec<C> {
        let mut out = self.q.flatten();
        out.extend(self.r.flatten());
        out
    }
}

/// `ω Π (λ − q_j) / Π (λ − X_s)^{r_s}` from the apparent singularities.
pub fn lt12_from_roots(q: &[C], omega: C, profile: &PoleProfile) -> RationalFunction {
    let roots: Vec<(C, u32)> = q.iter().map(|&x| (x, 1)).collect();
    let den: Vec<(C, u32)> = profile.poles.iter().map(|p| (p.x, p.r as u32)).collect();
    RationalFunction::from_factored(Poly::from_roots(&roots).scale(omega), &den)
}

/// `Σ Q_{X_s,k} (λ − X_s)^{−k} + Σ Q_{∞,k} λ^k + ω λ^{r_∞−3} δ_{r_∞≥3}`.
pub fn lt12_from_q(q: &PoleVector, omega: C, profile: &PoleProfile) -> RationalFunction {
    let mut poly = q.inf.clone();
    if profile.r_inf >= 3 {
        poly.resize(profile.r_inf - 2, ZERO);
        poly[profile.r_inf - 3] = omega;
    }
    let mut out = RationalFunction::from_poly(Poly::new(poly));
    for (s, p) in profile.poles.iter().enumerate() {
        out = &out + &pole_sum(p.x, &q.finite[s]);
    }
    out
}

/// `Σ_{k≥1} c[k−1] (λ − a)^{−k}` as a single fraction over `(λ − a)^{len}`.
pub fn pole_sum(a: C, c: &[C]) -> RationalFunction {
    let r = c.len();
    let mut num = Poly::zero();
    for (i, &ck) in c.iter().enumerate() {
        num = &num + &Poly::from_roots(&[(a, (r - 1 - i) as u32)]).scale(ck);
    }
    RationalFunction::from_factored(num, &[(a, r as u32)])
}

/// Jacobian `∂Q/∂q_i`: row `i` holds the derivatives of the flattened `Q`.
pub fn jacobian_dq_dq(q: &[C], geo_q: &PoleVector, omega: C, profile: &PoleProfile) -> DMatrix<C> {
    let cols = geo_q.len();
    let ninf = geo_q.inf.len();
    let mut jac = DMatrix::from_element(q.len(), cols, ZERO);
    for (i, &qi) in q.iter().enumerate() {
        for m in 0..ninf {
            let mut d = -omega * qi.powu((ninf - 1 - m) as u32);
            for k in m + 1..ninf {
                d -= geo_q.inf[k] * qi.powu((k - 1 - m) as u32);
            }
            jac[(i, m)] = d;
        }
        let mut col = ninf;
        for (s, p) in profile.poles.iter().enumerate() {
            let z = qi - p.x;
            for m in 1..=p.r {
                let mut d = ZERO;
                for j in m..=p.r {
                    d += z.powi(m as i32 - j as i32 - 1) * geo_q.at(s, j);
                }
                jac[(i, col)] = d;
                col += 1;
            }
        }
    }
    jac
}

/// Rows of the linear constraints on `P` (empty when `r_∞ ≥ 3`).
fn momentum_constraint_rows(geo_q: &PoleVector, profile: &PoleProfile) -> Vec<Vec<C>> {
    let ninf = geo_q.inf.len();
    let mut rows = Vec::new();
    if profile.r_inf <= 2 {
        let mut row = vec![ZERO; ninf];
        for f in &geo_q.finite {
            row.extend_from_slice(f);
        }
        rows.push(row);
    }
    if profile.r_inf == 1 {
        let mut row = vec![ZERO; ninf];
        for (s, p) in profile.poles.iter().enumerate() {
            for m in 1..=p.r {
                row.push(geo_q.at(s, m + 1) + p.x * geo_q.at(s, m));
            }
        }
        rows.push(row);
    }
    rows
}

/// `(q, p) ↦ (Q, P)`.
pub fn qp_to_geo(oper: &OperCoords, omega: C, profile: &PoleProfile) -> Result<GeoCoords> {
    let g = profile.genus();
    if oper.q.len() != g || oper.p.len() != g {
        return Err(LaxError::MalformedInput(format!("expected {g} coordinates")));
    }
    check_distinct(&oper.q, profile)?;
    let pf = partial_fractions(&lt12_from_roots(&oper.q, omega, profile), profile)?;
    let mut geo_q = PoleVector::zeros(profile);
    for (k, x) in geo_q.inf.iter_mut().enumerate() {
        *x = pf.poly.coeff(k);
    }
    geo_q.finite = pf.finite;
    let jac = jacobian_dq_dq(&oper.q, &geo_q, omega, profile);
    let extra = momentum_constraint_rows(&geo_q, profile);
    let n = geo_q.len();
    let mut a = DMatrix::from_element(n, n, ZERO);
    let mut b = vec![ZERO; n];
    for i in 0..g {
        for c in 0..n {
            a[(i, c)] = jac[(i, c)];
        }
        b[i] = oper.p[i];
    }
    for (e, row) in extra.iter().enumerate() {
        for c in 0..n {
            a[(g + e, c)] = row[c];
        }
    }
    let sol = solve_dense(&a, &b).map_err(|_| LaxError::Degenerate("momentum system is singular".into()))?;
    Ok(GeoCoords { p: PoleVector::from_flat(profile, &sol.x)?, q: geo_q })
}

fn check_distinct(q: &[C], profile: &PoleProfile) -> Result<()> {
    let scale = 1.0 + q.iter().map(|x| x.norm()).fold(0.0, f64::max);
    for i in 0..q.len() {
        for j in 0..i {
            if (q[i] - q[j]).norm() < 1e-8 * scale {
                return Err(LaxError::Degenerate(format!("q{} and q{} coincide", j + 1, i + 1)));
            }
        }
        if profile.poles.iter().any(|p| (q[i] - p.x).norm() < 1e-8 * scale) {
            return Err(LaxError::Degenerate(format!("q{} sits on a pole", i + 1)));
        }
    }
    Ok(())
}

/// Roots of a polynomial by companion-matrix eigenvalues, each polished by
/// one Newton step.
pub fn poly_roots(p: &Poly) -> Result<Vec<C>> {
    let d = p.degree().ok_or_else(|| LaxError::MalformedInput("zero polynomial".into()))?;
    let lead = p.leading();
    let mut comp = DMatrix::from_element(d, d, ZERO);
    for i in 1..d {
        comp[(i, i - 1)] = ONE;
    }
    for i in 0..d {
        comp[(i, d - 1)] = -p.coeff(i) / lead;
    }
    let eig = comp
        .schur()
        .eigenvalues()
        .ok_or_else(|| LaxError::Degenerate("companion eigenvalues failed".into()))?;
    let dp = p.derivative();
    Ok(eig
        .iter()
        .map(|&z| {
            let dz = dp.eval(z);
            if dz.norm() > 0.0 {
                z - p.eval(z) / dz
            } else {
                z
            }
        })
        .collect())
}

/// `(Q, P) ↦ (q, p)` with `q` in canonical order.
pub fn geo_to_qp(geo: &GeoCoords, omega: C, profile: &PoleProfile) -> Result<OperCoords> {
    let g = profile.genus();
    let f = lt12_from_q(&geo.q, omega, profile);
    let num = f.num();
    let scale = num.max_abs().max(omega.norm());
    for k in g + 1..num.coeffs().len() {
        if num.coeff(k).norm() > 1e-8 * scale {
            return Err(LaxError::Chart(format!("numerator of L12 has degree above {g}")));
        }
    }
    let trimmed = Poly::new(num.coeffs().iter().take(g + 1).copied().collect());
    if trimmed.degree() != Some(g) || trimmed.leading().norm() < 1e-8 * scale {
        return Err(LaxError::Chart("numerator of L12 has degree below the genus".into()));
    }
    let roots = poly_roots(&trimmed)?;
    let rs = 1.0 + roots.iter().map(|x| x.norm()).fold(0.0, f64::max);
    for i in 0..roots.len() {
        for j in 0..i {
            if (roots[i] - roots[j]).norm() < 1e-8 * rs {
                return Err(LaxError::Degenerate("multiple root of L12".into()));
            }
        }
    }
    let jac = jacobian_dq_dq(&roots, &geo.q, omega, profile);
    let pf = geo.p.flatten();
    let p: Vec<C> = (0..g).map(|i| (0..pf.len()).map(|c| jac[(i, c)] * pf[c]).sum()).collect();
    Ok(OperCoords { q: roots, p }.canonical())
}

/// `(Q, P) ↦ (Q, R)` for given `ω`, `g_0` and leading time `t_{∞,r_∞−1}`.
pub fn geo_to_lax(geo: &GeoCoords, omega: C, g0: C, chart: &TimeChart, profile: &PoleProfile) -> LaxCoords {
    let t = chart.t(crate::model::Pole::Inf, profile.r_inf - 1);
    let (q, p) = (&geo.q, &geo.p);
    let mut r = PoleVector::zeros(profile);
    let sum_q1: C = (0..profile.n()).map(|s| q.at(s, 1)).sum();
    let n = q.inf.len();
    for k in 0..n {
        let mut v = -omega * p.inf[n - 1 - k] - g0 / omega * q.inf[k];
        for m in 0..n.saturating_sub(k + 1) {
            v -= p.inf[m] * q.inf[k + 1 + m];
        }
        let below = if k == 0 { sum_q1 } else { q.inf[k - 1] };
        v -= t / omega * below;
        r.inf[k] = v;
    }
    for (s, pole) in profile.poles.iter().enumerate() {
        for k in 1..=pole.r {
            let mut v = ZERO;
            for m in 1..=pole.r + 1 - k {
                v += p.at(s, m) * q.at(s, k + m - 1);
            }
            v -= (g0 + t * pole.x) / omega * q.at(s, k) + t / omega * q.at(s, k + 1);
            r.finite[s][k - 1] = v;
        }
    }
    LaxCoords { q: q.clone(), r }
}

/// `(Q, R) ↦ (Q, P)` by the triangular Toeplitz solves.
pub fn lax_to_geo(lax: &LaxCoords, omega: C, g0: C, chart: &TimeChart, profile: &PoleProfile) -> Result<GeoCoords> {
    let t = chart.t(crate::model::Pole::Inf, profile.r_inf - 1);
    let (q, r) = (&lax.q, &lax.r);
    let mut p = PoleVector::zeros(profile);
    let sum_q1: C = (0..profile.n()).map(|s| q.at(s, 1)).sum();
    let n = q.inf.len();
    if n > 0 {
        if omega == ZERO {
            return Err(LaxError::Singular("omega vanishes".into()));
        }
        let mut col = vec![omega];
        col.extend((1..n).map(|d| q.inf[n - d]));
        let rhs: Vec<C> = (0..n)
            .map(|i| {
                let k = n - 1 - i;
                let below = if k == 0 { sum_q1 } else { q.inf[k - 1] };
                -(r.inf[k] + g0 / omega * q.inf[k] + t / omega * below)
            })
            .collect();
        p.inf = toeplitz_solve(&LowerToeplitz::new(col), &rhs)?;
    }
    for (s, pole) in profile.poles.iter().enumerate() {
        let rs = pole.r;
        if q.at(s, rs) == ZERO {
            return Err(LaxError::Singular(format!("Q[X{},{rs}] vanishes", s + 1)));
        }
        let col: Vec<C> = (0..rs).map(|d| q.at(s, rs - d)).collect();
        let rhs: Vec<C> = (0..rs)
            .map(|i| {
                let k = rs - i;
                r.at(s, k) + (g0 + t * pole.x) / omega * q.at(s, k) + t / omega * q.at(s, k + 1)
            })
            .collect();
        p.finite[s] = toeplitz_solve(&LowerToeplitz::new(col), &rhs)?;
    }
    Ok(GeoCoords { q: q.clone(), p })
}

/// Central-difference Jacobian of `f` at `x0` with step
/// `1e−6·max(1, |x_i|)` per input.
pub fn fd_jacobian(f: &dyn Fn(&[C]) -> Result<Vec<C>>, x0: &[C]) -> Result<DMatrix<C>> {
    let mut cols: Vec<Vec<C>> = Vec::with_capacity(x0.len());
    for i in 0..x0.len() {
        let h = 1e-6 * x0[i].norm().max(1.0);
        let mut xp = x0.to_vec();
        let mut xm = x0.to_vec();
        xp[i] += h;
        xm[i] -= h;
        let (fp, fm) = (f(&xp)?, f(&xm)?);
        if fp.len() != fm.len() {
            return Err(LaxError::Degenerate("map changed dimension under perturbation".into()));
        }
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect());
    }
    let rows = cols.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows, x0.len(), |i, j| cols[j][i]))
}

fn omega_form(m: usize) -> DMatrix<C> {
    DMatrix::from_fn(2 * m, 2 * m, |i, j| {
        if j == i + m {
            ONE
        } else if i == j + m {
            -ONE
        } else {
            ZERO
        }
    })
}

/// Symplectic defect `max |Jᵀ Ω J − Ω|` of a map between position-momentum
/// vectors `(x, y)`, with `J` the finite-difference Jacobian. The output
/// may have more entries than the input, as for the constrained charts.
pub fn symplectic_defect(f: &dyn Fn(&[C]) -> Result<Vec<C>>, x0: &[C]) -> Result<f64> {
    let jac = fd_jacobian(f, x0)?;
    let (nout, nin) = (jac.nrows(), jac.ncols());
    if nout % 2 != 0 || nin % 2 != 0 {
        return Err(LaxError::MalformedInput("odd number of coordinates".into()));
    }
    let d = jac.transpose() * omega_form(nout / 2) * &jac - omega_form(nin / 2);
    Ok(d.iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// One named constraint with its residual.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// Constraint label.
    pub name: String,
    /// Left side minus right side.
    pub residual: C,
}

/// Residuals of the chart constraints.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintReport {
    /// One entry per constraint of the chart.
    pub entries: Vec<Violation>,
}

impl ConstraintReport {
    /// Largest residual modulus (zero for an empty report).
    pub fn max_violation(&self) -> f64 {
        self.entries.iter().map(|v| v.residual.norm()).fold(0.0, f64::max)
    }

    fn push(&mut self, name: &str, residual: C) {
        self.entries.push(Violation { name: name.into(), residual });
    }
}

/// Any of the charts, for [`validate_chart_constraints`].
#[derive(Clone, Debug, PartialEq)]
pub enum CoordinateBundle {
    /// `(q, p)`.
    Oper(OperCoords),
    /// `(Q, P)`.
    Geo(GeoCoords),
    /// `(Q, R)`.
    Lax(LaxCoords),
    /// `(u, v)`; only the time-independent linear constraints are checked
    /// here.
    Iso(IsoCoords),
}

/// `Σ_s X_s² Q_{X_s,1} + 2 X_s Q_{X_s,2} + Q_{X_s,3}`.
pub fn second_moment(q: &PoleVector, profile: &PoleProfile) -> C {
    profile
        .poles
        .iter()
        .enumerate()
        .map(|(s, p)| p.x * p.x * q.at(s, 1) + 2.0 * p.x * q.at(s, 2) + q.at(s, 3))
        .sum()
}

fn q_constraints(q: &PoleVector, omega: C, profile: &PoleProfile, rep: &mut ConstraintReport) {
    let sum1: C = (0..profile.n()).map(|s| q.at(s, 1)).sum();
    match profile.r_inf {
        2 => rep.push("sum Q[X,1] = omega", sum1 - omega),
        1 => {
            rep.push("sum Q[X,1] = 0", sum1);
            let m: C = profile.poles.iter().enumerate().map(|(s, p)| q.at(s, 2) + p.x * q.at(s, 1)).sum();
            rep.push("sum Q[X,2] + X Q[X,1] = omega", m - omega);
        }
        _ => {}
    }
}

/// Residuals of the chart constraints. `g0` enters only the `(Q, R)`
/// constraint at `r_∞ = 1`.
pub fn validate_chart_constraints(
    coords: &CoordinateBundle,
    profile: &PoleProfile,
    chart: &TimeChart,
    omega: C,
    g0: C,
) -> ConstraintReport {
    let mut rep = ConstraintReport::default();
    let t0 = chart.t(crate::model::Pole::Inf, 0);
    match coords {
        CoordinateBundle::Oper(_) => {}
        CoordinateBundle::Geo(geo) => {
            q_constraints(&geo.q, omega, profile, &mut rep);
            for (e, row) in momentum_constraint_rows(&geo.q, profile).iter().enumerate() {
                let v: C = row.iter().zip(geo.p.flatten()).map(|(a, b)| a * b).sum();
                rep.push(if e == 0 { "sum P Q = 0" } else { "sum P (Q shifted + X Q) = 0" }, v);
            }
        }
        CoordinateBundle::Lax(lax) => {
            q_constraints(&lax.q, omega, profile, &mut rep);
            if profile.r_inf <= 2 {
                let sum1: C = (0..profile.n()).map(|s| lax.r.at(s, 1)).sum();
                rep.push("sum R[X,1] = -t[inf,0]", sum1 + t0);
            }
            if profile.r_inf == 1 {
                let lhs: C = profile
                    .poles
                    .iter()
                    .enumerate()
                    .map(|(s, p)| p.x * lax.r.at(s, 1) + lax.r.at(s, 2))
                    .sum();
                let rhs = -g0 - t0 / omega * second_moment(&lax.q, profile);
                rep.push("sum X R[X,1] + R[X,2] = beta[-1]", lhs - rhs);
            }
        }
        CoordinateBundle::Iso(iso) => {
            let su: C = (0..profile.n()).map(|s| iso.u.at(s, 1)).sum();
            let sv: C = (0..profile.n()).map(|s| iso.v.at(s, 1)).sum();
            match profile.r_inf {
                2 => rep.push("sum u[X,1] = omega", su - omega),
                1 => rep.push("sum u[X,1] = 0", su),
                _ => {}
            }
            if profile.r_inf <= 2 {
                rep.push("sum v[X,1] = -t[inf,0]", sv + t0);
            }
        }
    }
    rep
}
