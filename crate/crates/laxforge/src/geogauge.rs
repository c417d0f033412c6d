//! Geometric-gauge Lax pair `(L̃, Ã)` in the coordinates `(Q, P)` and
//! `(Q, R)`, the residue formula for the coefficients `H`, and the gauge
//! transformation from the oper gauge used as an independent oracle.
//!
//! # Invariants
//! - `L̃_{2,2} = −L̃_{1,1}` and `Ã_{2,2} = −Ã_{1,1}` exactly.
//! - `L̃_{1,2} = ω Π (λ − q_j) / Π (λ − X_s)^{r_s}`, so `L̃_{1,2}` has
//!   leading coefficient `ω` in the normalization at infinity.
//! - Every projector `[·]_{X_s,−}` and `[·]_{∞,+}` acts on an exact
//!   rational quotient.

use std::collections::BTreeMap;

use crate::coords::{
    geo_to_lax, lt12_from_q, lt12_from_roots, pole_sum, second_moment, GeoCoords, LaxCoords, OperCoords,
};
use crate::model::{DeformationVector, Direction, ExtendedPoint, Pole, PoleProfile, PoleVector, TimeChart};
use crate::opergauge::{
    build_l22, build_oper_a, build_oper_l, flow_step, hamilton_velocity, hamiltonians_oper, nu_coeffs, p2_finite,
    p2_inf, NuCoeffs,
};
use crate::ratcalc::{
    coeff_at_infinity, laurent_slice, polynomial_part_at_infinity, singular_part, Poly, RationalFunction,
};
use crate::{LaxError, Result, C};

const ZERO: C = C::new(0.0, 0.0);

/// Geometric-gauge Lax matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GeoLax {
    /// `L̃_{1,1}`.
    pub l11: RationalFunction,
    /// `L̃_{1,2}`.
    pub l12: RationalFunction,
    /// `L̃_{2,1}`.
    pub l21: RationalFunction,
    /// `L̃_{2,2} = −L̃_{1,1}`.
    pub l22: RationalFunction,
    /// `L̊_{1,1} = L̃_{1,1} + (t_{∞,0} λ + g_0) L̃_{1,2} / ω`, only for `r_∞ = 1`.
    pub mathring_l11: Option<RationalFunction>,
    /// Normalization constant `g_0`.
    pub g0: C,
    /// Subleading diagonal coefficient `β_{r_∞−2}`: the coefficient of
    /// `λ^{r_∞−3}` in `L̃_{1,1}`.
    pub beta: C,
}

/// Geometric-gauge auxiliary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GeoDeformation {
    /// `Ã_{1,1}`.
    pub a11: RationalFunction,
    /// `Ã_{1,2}`.
    pub a12: RationalFunction,
    /// `Ã_{2,1}`.
    pub a21: RationalFunction,
    /// `Ã_{2,2} = −Ã_{1,1}`.
    pub a22: RationalFunction,
    /// Coefficients `ν`; when `r_∞ ≥ 3` the vector `inf` is extended by
    /// `ν_{∞,r_∞−2}` and `ν_{∞,r_∞−1}`, when `r_∞ ≤ 2` the entries `nu0`
    /// and `nu_m1` come from the extra conditions.
    pub nu_ext: NuCoeffs,
}

fn t_lead(chart: &TimeChart, profile: &PoleProfile) -> C {
    chart.t(Pole::Inf, profile.r_inf - 1)
}

/// `Q_{∞,k}` extended by `Q_{∞,r_∞−3} = ω` and `Q_{∞,−1} = Σ Q_{X_s,1}`.
fn q_hat(q: &PoleVector, omega: C, profile: &PoleProfile, k: i64) -> C {
    let r = profile.r_inf as i64;
    if k == -1 && r >= 3 {
        (0..profile.n()).map(|s| q.at(s, 1)).sum()
    } else if k == r - 3 && r >= 3 {
        omega
    } else {
        q.at_inf(k)
    }
}

/// `Σ_j (Σ_m t t) λ^j = −Σ_j P^{(2)}_{∞,j} λ^j`, the squared polar part at infinity.
fn tsq_inf(chart: &TimeChart, profile: &PoleProfile) -> RationalFunction {
    let top = 2 * profile.r_inf as i64 - 4;
    let coeffs: Vec<C> = (0..=top.max(0)).map(|j| -p2_inf(chart, profile, j)).collect();
    RationalFunction::from_poly(Poly::new(coeffs))
}

/// `Σ_j (Σ_m t t) (λ − X_s)^{−j} = −Σ_j P^{(2)}_{X_s,j} (λ − X_s)^{−j}`.
fn tsq_finite(chart: &TimeChart, profile: &PoleProfile, s: usize) -> RationalFunction {
    let r = profile.poles[s].r;
    let c: Vec<C> = (1..=2 * r).map(|j| -p2_finite(chart, profile, s, j)).collect();
    pole_sum(profile.poles[s].x, &c)
}

/// `M_2 = Σ X_s² Q_{X_s,1} + 2 X_s Q_{X_s,2} + Q_{X_s,3}`.
fn m2(q: &PoleVector, profile: &PoleProfile) -> C {
    second_moment(q, profile)
}

/// Part of `L̃_{1,1}` bilinear in `(P, Q)`; for `r_∞ = 1` this is `L̊_{1,1}`.
pub fn l11_bilinear(geo: &GeoCoords, omega: C, profile: &PoleProfile) -> RationalFunction {
    let (q, p) = (&geo.q, &geo.p);
    let n_inf = q.inf.len();
    let mut poly = vec![ZERO; n_inf];
    for (k, c) in poly.iter_mut().enumerate() {
        *c = -omega * p.inf[n_inf - 1 - k];
        for m in 0..n_inf.saturating_sub(k + 1) {
            *c -= p.inf[m] * q.inf[k + 1 + m];
        }
    }
    let mut out = RationalFunction::from_poly(Poly::new(poly));
    for (s, pole) in profile.poles.iter().enumerate() {
        let c: Vec<C> = (1..=pole.r)
            .map(|k| (1..=pole.r + 1 - k).map(|m| p.at(s, m) * q.at(s, k + m - 1)).sum())
            .collect();
        out = &out + &pole_sum(pole.x, &c);
    }
    out
}

/// `(t_{∞,r_∞−1} λ + g_0) / ω · L̃_{1,2}`.
fn shift_term(l12: &RationalFunction, t: C, g0: C, omega: C) -> RationalFunction {
    let lin = RationalFunction::from_poly(Poly::new(vec![g0 / omega, t / omega]));
    &lin * l12
}

fn sum_singular_parts(f: &RationalFunction, profile: &PoleProfile) -> Result<RationalFunction> {
    let mut out = RationalFunction::zero();
    for p in &profile.poles {
        out = &out + &singular_part(f, p.x)?;
    }
    Ok(out)
}

/// `Σ_s [(T_s − f²)/L̃_{1,2}]_{X_s,−}`.
fn l21_finite_part(
    f: &RationalFunction,
    l12: &RationalFunction,
    chart: &TimeChart,
    profile: &PoleProfile,
) -> Result<RationalFunction> {
    let f2 = f * f;
    let mut out = RationalFunction::zero();
    for (s, p) in profile.poles.iter().enumerate() {
        let quo = (&tsq_finite(chart, profile, s) - &f2).checked_div(l12)?;
        out = &out + &singular_part(&quo, p.x)?;
    }
    Ok(out)
}

/// `L̃_{2,1}` for `r_∞ ≥ 2` from `L̃_{1,1}` and `L̃_{1,2}`.
fn l21_generic(
    l11: &RationalFunction,
    l12: &RationalFunction,
    chart: &TimeChart,
    profile: &PoleProfile,
) -> Result<RationalFunction> {
    let mut out = l21_finite_part(l11, l12, chart, profile)?;
    if profile.r_inf >= 3 {
        let quo = (&tsq_inf(chart, profile) - &(l11 * l11)).checked_div(l12)?;
        out = &out + &RationalFunction::from_poly(polynomial_part_at_infinity(&quo)?);
    }
    Ok(out)
}

/// `g_0` from `Q` when `r_∞ ≥ 2`.
fn g0_from_q(q: &PoleVector, chart: &TimeChart, profile: &PoleProfile, omega: C) -> C {
    let r = profile.r_inf;
    let t1 = t_lead(chart, profile);
    match r {
        2 => {
            let s: C = profile.poles.iter().enumerate().map(|(s, p)| q.at(s, 2) + p.x * q.at(s, 1)).sum();
            chart.t(Pole::Inf, 0) - t1 / omega * s
        }
        _ => chart.t(Pole::Inf, r - 2) - t1 / omega * q_hat(q, omega, profile, r as i64 - 4),
    }
}

/// `g_0` for `r_∞ = 1` from the residue formula in `L̊_{1,1}`.
fn g0_r_inf_one(
    ring: &RationalFunction,
    l12: &RationalFunction,
    q: &PoleVector,
    chart: &TimeChart,
    profile: &PoleProfile,
    omega: C,
) -> Result<C> {
    let t0 = chart.t(Pole::Inf, 0);
    if t0 == ZERO {
        return Err(LaxError::Degenerate("t_inf,0 vanishes".into()));
    }
    let bracket = &(&(&(ring * ring) + &ring.derivative()) - &(ring * &l12.derivative().checked_div(l12)?))
        + &(&l12.scale((t0 * t0 - t0) / omega) + &(l12 * &l21_finite_part(ring, l12, chart, profile)?));
    // Res_{λ→∞} λ² f is minus the coefficient of λ^{−3} in f.
    let res = -coeff_at_infinity(&bracket, -3)?;
    Ok((0.5 - t0) / omega * m2(q, profile) - res / (2.0 * t0))
}

/// `β_{r_∞−2}` read off `L̃_{1,1}`.
fn beta_of(l11: &RationalFunction, profile: &PoleProfile) -> Result<C> {
    coeff_at_infinity(l11, profile.r_inf as i32 - 3)
}

fn check_geo(geo: &GeoCoords, profile: &PoleProfile) -> Result<()> {
    let want = PoleVector::zeros(profile);
    let ok = |v: &PoleVector| {
        v.inf.len() == want.inf.len()
            && v.finite.len() == want.finite.len()
            && v.finite.iter().zip(&want.finite).all(|(a, b)| a.len() == b.len())
    };
    if !ok(&geo.q) || !ok(&geo.p) {
        return Err(LaxError::MalformedInput("coordinates do not match the profile".into()));
    }
    for (s, p) in profile.poles.iter().enumerate() {
        if geo.q.at(s, p.r) == ZERO {
            return Err(LaxError::Degenerate(format!("Q[X{},{}] vanishes", s + 1, p.r)));
        }
    }
    Ok(())
}

/// `L̃` from `(Q, P)`.
pub fn build_geo_l_qp(geo: &GeoCoords, chart: &TimeChart, profile: &PoleProfile, omega: C) -> Result<GeoLax> {
    check_geo(geo, profile)?;
    let l12 = lt12_from_q(&geo.q, omega, profile);
    let bil = l11_bilinear(geo, omega, profile);
    let t = t_lead(chart, profile);
    if profile.r_inf == 1 {
        let g0 = g0_r_inf_one(&bil, &l12, &geo.q, chart, profile, omega)?;
        let l11 = &bil - &shift_term(&l12, t, g0, omega);
        let lin = RationalFunction::from_poly(Poly::new(vec![g0, t]));
        let l21 = &(&l21_finite_part(&bil, &l12, chart, profile)? + &(&lin * &bil).scale(C::new(2.0, 0.0) / omega))
            + &(&(&(&lin * &lin) * &l12).scale(-1.0 / (omega * omega)) + &RationalFunction::constant(t * t / omega));
        let beta = beta_of(&l11, profile)?;
        return Ok(GeoLax { l22: -&l11, l11, l12, l21, mathring_l11: Some(bil), g0, beta });
    }
    let g0 = g0_from_q(&geo.q, chart, profile, omega);
    let l11 = &bil - &shift_term(&l12, t, g0, omega);
    let l21 = l21_generic(&l11, &l12, chart, profile)?;
    let beta = beta_of(&l11, profile)?;
    Ok(GeoLax { l22: -&l11, l11, l12, l21, mathring_l11: None, g0, beta })
}

/// `L̃_{1,1}` from `R`.
fn l11_from_r(lax: &LaxCoords, chart: &TimeChart, profile: &PoleProfile) -> RationalFunction {
    let r = profile.r_inf;
    let mut poly = lax.r.inf.clone();
    if r >= 2 {
        poly.resize(r - 1, ZERO);
        poly[r - 2] -= chart.t(Pole::Inf, r - 1);
    }
    if r >= 3 {
        poly[r - 3] -= chart.t(Pole::Inf, r - 2);
    }
    let mut out = RationalFunction::from_poly(Poly::new(poly));
    for (s, p) in profile.poles.iter().enumerate() {
        out = &out + &pole_sum(p.x, &lax.r.finite[s]);
    }
    out
}

/// `L̃` from `(Q, R)`.
pub fn build_geo_l_qr(lax: &LaxCoords, chart: &TimeChart, profile: &PoleProfile, omega: C) -> Result<GeoLax> {
    check_geo(&GeoCoords { q: lax.q.clone(), p: lax.r.clone() }, profile)?;
    let l12 = lt12_from_q(&lax.q, omega, profile);
    let l11 = l11_from_r(lax, chart, profile);
    let (g0, l21) = if profile.r_inf == 1 {
        let t0 = chart.t(Pole::Inf, 0);
        let s: C = profile
            .poles
            .iter()
            .enumerate()
            .map(|(s, p)| p.x * lax.r.at(s, 1) + lax.r.at(s, 2))
            .sum();
        let g0 = -s - t0 / omega * m2(&lax.q, profile);
        (g0, l21_finite_part(&l11, &l12, chart, profile)?)
    } else {
        (g0_from_q(&lax.q, chart, profile, omega), l21_generic(&l11, &l12, chart, profile)?)
    };
    let beta = beta_of(&l11, profile)?;
    Ok(GeoLax { l22: -&l11, l11, l12, l21, mathring_l11: None, g0, beta })
}

/// `L_{2,1} = L̃_{1,1}² + L̃_{2,1} L̃_{1,2} + L̃_{1,2} ∂_λ(L̃_{1,1}/L̃_{1,2})`.
pub fn oper_l21_from_geo(l: &GeoLax) -> Result<RationalFunction> {
    let log_d = l.l12.derivative().checked_div(&l.l12)?;
    Ok(&(&(&l.l11 * &l.l11) + &(&l.l21 * &l.l12)) + &(&l.l11.derivative() - &(&l.l11 * &log_d)))
}

/// The coefficients `H` by residues of `L_{2,1}` expressed through `L̃`.
pub fn h_from_geo(l: &GeoLax, profile: &PoleProfile) -> Result<PoleVector> {
    let d = oper_l21_from_geo(l)?;
    let mut h = PoleVector::zeros(profile);
    let n_inf = h.inf.len();
    if n_inf > 0 {
        let sl = laurent_slice(&d, ExtendedPoint::Infinity, -(n_inf as i32 - 1), 0)?;
        for j in 0..n_inf {
            h.inf[j] = sl.at(-(j as i32));
        }
    }
    for (s, p) in profile.poles.iter().enumerate() {
        let sl = laurent_slice(&d, ExtendedPoint::Finite(p.x), -(p.r as i32), -1)?;
        for j in 1..=p.r {
            h.finite[s][j - 1] = sl.at(-(j as i32));
        }
    }
    Ok(h)
}

/// Hamiltonians along the free directions from the residue formula.
pub fn hamiltonians_geo(
    geo: &GeoCoords,
    chart: &TimeChart,
    profile: &PoleProfile,
    omega: C,
) -> Result<BTreeMap<Direction, C>> {
    let l = build_geo_l_qp(geo, chart, profile, omega)?;
    hamiltonians_oper(&h_from_geo(&l, profile)?, chart, profile)
}

/// `ν` extended by the geometric relations: `ν_{∞,r_∞−2}` and
/// `ν_{∞,r_∞−1}` for `r_∞ ≥ 3`, `ν_{∞,0}` for `r_∞ = 2`, and
/// `ν_{∞,−1}`, `ν_{∞,0}` for `r_∞ = 1`.
pub fn extended_nu(
    alpha: &DeformationVector,
    q: &PoleVector,
    chart: &TimeChart,
    profile: &PoleProfile,
    omega: C,
) -> Result<NuCoeffs> {
    if omega == ZERO {
        return Err(LaxError::Singular("omega vanishes".into()));
    }
    let mut nu = nu_coeffs(alpha, chart, profile)?;
    let r = profile.r_inf as i64;
    let s1: C = profile
        .poles
        .iter()
        .enumerate()
        .map(|(s, p)| (1..=p.r).map(|k| nu.at(s, k - 1) * q.at(s, k)).sum::<C>())
        .sum();
    let s2: C = profile
        .poles
        .iter()
        .enumerate()
        .map(|(s, p)| {
            (2..=p.r).map(|k| nu.at(s, k - 2) * q.at(s, k)).sum::<C>()
                + p.x * (1..=p.r).map(|k| nu.at(s, k - 1) * q.at(s, k)).sum::<C>()
        })
        .sum();
    match r {
        1 => {
            nu.nu_m1 = s1 / omega;
            nu.nu0 = (s2 - m2(q, profile) * nu.nu_m1) / omega;
        }
        2 => nu.nu0 = s1 / omega,
        _ => {
            let mut top = s1;
            for j in 1..=r - 3 {
                top -= nu.at_inf(j as usize) * q_hat(q, omega, profile, j - 1);
            }
            nu.inf.push(top / omega);
            let mut top = s2;
            for j in 1..=r - 2 {
                top -= nu.at_inf(j as usize) * q_hat(q, omega, profile, j - 2);
            }
            nu.inf.push(top / omega);
        }
    }
    Ok(nu)
}

fn a12_geo(nu: &NuCoeffs, q: &PoleVector, profile: &PoleProfile, omega: C) -> RationalFunction {
    let r = profile.r_inf as i64;
    let mut poly = vec![ZERO; (r - 3).max(0) as usize];
    for j in 0..=r - 4 {
        let mut c = omega * nu.at_inf((r - 3 - j) as usize);
        for k in j + 1..=r - 4 {
            c += nu.at_inf((k - j) as usize) * q.at_inf(k);
        }
        poly[j as usize] = c;
    }
    let mut out = RationalFunction::from_poly(Poly::new(poly));
    for (s, p) in profile.poles.iter().enumerate() {
        let c: Vec<C> = (1..=p.r).map(|j| (j..=p.r).map(|k| nu.at(s, k - j) * q.at(s, k)).sum()).collect();
        out = &out + &pole_sum(p.x, &c);
    }
    out
}

fn a11_geo(nu: &NuCoeffs, lax: &LaxCoords, chart: &TimeChart, profile: &PoleProfile, omega: C, l_omega: C) -> RationalFunction {
    let r = profile.r_inf as i64;
    let mut c0 = l_omega / (2.0 * omega);
    if r == 2 {
        c0 -= chart.t(Pole::Inf, 1) * nu.nu0;
    }
    if r == 1 {
        c0 += (0.5 - chart.t(Pole::Inf, 0)) * nu.nu_m1;
    }
    let mut poly = vec![ZERO; (r - 2).max(1) as usize];
    poly[0] = c0;
    if r >= 3 {
        let (ta, tb) = (chart.t(Pole::Inf, r as usize - 1), chart.t(Pole::Inf, r as usize - 2));
        for j in 0..=r - 3 {
            poly[j as usize] -= ta * nu.at_inf((r - 2 - j) as usize);
        }
        for j in 0..=r - 4 {
            poly[j as usize] -= tb * nu.at_inf((r - 3 - j) as usize);
        }
        for j in 0..=r - 5 {
            for i in 1..=r - 4 - j {
                poly[j as usize] += nu.at_inf(i as usize) * lax.r.at_inf(j + i);
            }
        }
    }
    let mut out = RationalFunction::from_poly(Poly::new(poly));
    for (s, p) in profile.poles.iter().enumerate() {
        let c: Vec<C> = (1..=p.r).map(|j| (0..=p.r - j).map(|i| nu.at(s, i) * lax.r.at(s, i + j)).sum()).collect();
        out = &out + &pole_sum(p.x, &c);
    }
    out
}

/// `Ã` from `(Q, R)` and the already built `L̃`.
pub fn build_geo_a(
    alpha: &DeformationVector,
    lax: &LaxCoords,
    l: &GeoLax,
    chart: &TimeChart,
    profile: &PoleProfile,
    omega: C,
    l_omega: C,
) -> Result<GeoDeformation> {
    let nu = extended_nu(alpha, &lax.q, chart, profile, omega)?;
    let a12 = a12_geo(&nu, &lax.q, profile, omega);
    let a11 = a11_geo(&nu, lax, chart, profile, omega, l_omega);
    let r = profile.r_inf as i64;
    let ratio = l.l11.checked_div(&l.l12)?;
    let k = &ratio * &(&(&ratio * &a12) - &a11.scale(C::new(2.0, 0.0)));
    let mut a21 = sum_singular_parts(&k, profile)?;
    for (s, p) in profile.poles.iter().enumerate() {
        let rs = p.r;
        let c: Vec<C> = (1..=2 * rs)
            .map(|kk| {
                if kk <= rs {
                    return ZERO;
                }
                (kk..=2 * rs).map(|j| -p2_finite(chart, profile, s, j) * nu.at(s, j - kk)).sum()
            })
            .collect();
        a21 = &a21 + &singular_part(&pole_sum(p.x, &c).checked_div(&l.l12)?, p.x)?;
    }
    if r >= 3 {
        let mut ninf = vec![ZERO; (2 * r - 4) as usize];
        for kk in r - 3..=2 * r - 5 {
            ninf[kk as usize] =
                (kk + 1..=2 * r - 4).map(|j| -p2_inf(chart, profile, j) * nu.at_inf((j - kk) as usize)).sum();
        }
        let nq = RationalFunction::from_poly(Poly::new(ninf)).checked_div(&l.l12)?;
        a21 = &a21 + &RationalFunction::from_poly(polynomial_part_at_infinity(&nq)?);
        a21 = &a21 + &RationalFunction::from_poly(polynomial_part_at_infinity(&k)?);
        // Res_{λ→∞} f is minus the coefficient of λ^{−1}.
        let res = -coeff_at_infinity(&(&a11 - &(&ratio * &a12)), -1)?;
        let t = t_lead(chart, profile);
        let c0 = 2.0 / omega * res + q_hat(&lax.q, omega, profile, r - 4) * l_omega / (omega * omega * omega);
        let lin = Poly::new(vec![c0, -t / (omega * omega) * l_omega]);
        a21 = &a21 + &RationalFunction::from_poly(lin);
    }
    Ok(GeoDeformation { a22: -&a11, a11, a12, a21, nu_ext: nu })
}

/// `Ã` from `(Q, P)` through the chart `(Q, R)`.
pub fn build_geo_a_qp(
    alpha: &DeformationVector,
    geo: &GeoCoords,
    chart: &TimeChart,
    profile: &PoleProfile,
    omega: C,
    l_omega: C,
) -> Result<GeoDeformation> {
    let l = build_geo_l_qp(geo, chart, profile, omega)?;
    let lax = geo_to_lax(geo, omega, l.g0, chart, profile);
    build_geo_a(alpha, &lax, &l, chart, profile, omega, l_omega)
}

/// Second column of the gauge matrix `G = [[1, 0], [L̃_{1,1}, L̃_{1,2}]]`
/// assembled from `(q, p)`, the oper `g_0` and `ω`.
pub fn gauge_matrix(
    oper: &OperCoords,
    g0: C,
    chart: &TimeChart,
    profile: &PoleProfile,
    omega: C,
) -> Result<(RationalFunction, RationalFunction)> {
    let g = oper.q.len();
    let den: Vec<(C, u32)> = profile.poles.iter().map(|p| (p.x, p.r as u32)).collect();
    let mut qpoly = Poly::zero();
    for i in 0..g {
        let qi = oper.q[i];
        let mut w = oper.p[i];
        for p in &profile.poles {
            w *= (qi - p.x).powu(p.r as u32);
        }
        let mut basis = Poly::constant(C::new(1.0, 0.0));
        for j in (0..g).filter(|&j| j != i) {
            let d = qi - oper.q[j];
            if d == ZERO {
                return Err(LaxError::Degenerate("coinciding apparent singularities".into()));
            }
            basis = basis.mul_linear(oper.q[j]).scale(C::new(1.0, 0.0) / d);
        }
        qpoly = &qpoly + &basis.scale(w);
    }
    let l12 = lt12_from_roots(&oper.q, omega, profile);
    let l11 = &RationalFunction::from_factored(qpoly, &den) - &shift_term(&l12, t_lead(chart, profile), g0, omega);
    Ok((l11, l12))
}

/// `G⁻¹ L G − G⁻¹ ∂_λ G` from the oper-gauge `L`.
pub fn oracle_geo_l(oper: &OperCoords, chart: &TimeChart, profile: &PoleProfile, omega: C) -> Result<GeoLax> {
    let lax = build_oper_l(oper, chart, profile)?;
    let (a, b) = gauge_matrix(oper, lax.g0, chart, profile, omega)?;
    let l22 = build_l22(&oper.q, profile);
    let num = &(&(&lax.l21 + &(&l22 * &a)) - &(&a * &a)) - &a.derivative();
    let l21 = num.checked_div(&b)?;
    let beta = beta_of(&a, profile)?;
    Ok(GeoLax { l22: -&a, l11: a, l12: b, l21, mathring_l11: None, g0: lax.g0, beta })
}

/// `G⁻¹ A G − G⁻¹ 𝓛_α[G]` at each `λ`, returned as `[Ã11, Ã12, Ã21, Ã22]`.
///
/// `𝓛_α[G]` is a central difference of step `h` along the flow, with `ω`
/// transported by `𝓛_α[ω] = −ω ν_{∞,−1}` when `r_∞ = 1`.
pub fn oracle_geo_a(
    alpha: &DeformationVector,
    oper: &OperCoords,
    chart: &TimeChart,
    profile: &PoleProfile,
    omega: C,
    h: f64,
    lambdas: &[C],
) -> Result<Vec<[C; 4]>> {
    let lax = build_oper_l(oper, chart, profile)?;
    let probe = build_oper_a(alpha, oper, &lax, chart, profile, omega, ZERO)?;
    let l_omega = if profile.r_inf == 1 { -omega * probe.nu.nu_m1 } else { ZERO };
    let a = build_oper_a(alpha, oper, &lax, chart, profile, omega, l_omega)?;
    let (ga, gb) = gauge_matrix(oper, lax.g0, chart, profile, omega)?;
    let vel = hamilton_velocity(alpha, oper, chart, profile)?;
    let shifted = |sign: f64| -> Result<(RationalFunction, RationalFunction)> {
        let (o, t, p) = flow_step(alpha, oper, chart, profile, &vel, sign * h);
        let om = omega * (sign * h * l_omega / omega).exp();
        let l = build_oper_l(&o, &t, &p)?;
        gauge_matrix(&o, l.g0, &t, &p, om)
    };
    let (pa, pb) = shifted(1.0)?;
    let (ma, mb) = shifted(-1.0)?;
    let mut out = Vec::with_capacity(lambdas.len());
    for &z in lambdas {
        let (x, y) = (ga.eval(z), gb.eval(z));
        let (a11, a12, a21, a22) = (a.a11.eval(z), a.a12.eval(z), a.a21.eval(z), a.a22.eval(z));
        let dx = (pa.eval(z) - ma.eval(z)) / (2.0 * h);
        let dy = (pb.eval(z) - mb.eval(z)) / (2.0 * h);
        let t11 = a11 + a12 * x;
        let t12 = a12 * y;
        let t21 = (a21 + a22 * x - x * a11 - a12 * x * x - dx) / y;
        let t22 = a22 - x * a12 - dy / y;
        out.push([t11, t12, t21, t22]);
    }
    Ok(out)
}
