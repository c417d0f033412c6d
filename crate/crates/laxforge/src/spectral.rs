//! Determinant of the geometric Lax matrix, spectral invariants and their
//! relation to the Hamiltonians.
//!
//! The eigenvalues of `L̃` are `±λ₊` with `λ₊² = −det L̃`. Expanding `λ₊` at
//! each pole gives back the times in its leading coefficients and the
//! spectral invariants `I_{p,j}` in the next ones:
//!
//! - at `∞`: `λ₊ = Σ_{j<r_∞} t_{∞,j} λ^{j−1} + Σ_{j≥1} j I_{∞,j} λ^{−j−1} + O(λ^{−r_∞−1})`;
//! - at `X_s`: `λ₊ = −Σ_{j<r_s} t_{X_s,j} (λ − X_s)^{−j−1} − Σ_{j≥1} j I_{X_s,j} (λ − X_s)^{j−1} + …`.
//!
//! # Invariants
//! - `det L̃ = −L_{2,1} + L̃_{1,2} ∂_λ(L̃_{1,1}/L̃_{1,2})` with `L_{2,1}` the
//!   oper-gauge entry, so the determinant has poles only at the profile.

use std::collections::BTreeMap;

use crate::geogauge::{h_from_geo, GeoLax};
use crate::model::{Direction, ExtendedPoint, Pole, PoleProfile, TimeChart};
use crate::opergauge::build_tdp2;
use crate::ratcalc::{laurent_slice, polynomial_part_at_infinity, singular_part, LaurentSlice, Poly, RationalFunction};
use crate::structlin::{toeplitz_from_times, toeplitz_solve};
use crate::{LaxError, Result, C};

const ZERO: C = C::new(0.0, 0.0);

/// `det L̃` computed two ways.
#[derive(Clone, Debug, PartialEq)]
pub struct GeoDeterminant {
    /// `L̃_{1,1} L̃_{2,2} − L̃_{1,2} L̃_{2,1}`.
    pub exact: RationalFunction,
    /// `P̃_2 − Σ H + t_{∞,r_∞−1} λ^{r_∞−3} + [F]_{∞,+} + Σ_s [F]_{X_s,−}`
    /// with `F = L̃_{1,2} ∂_λ(L̃_{1,1}/L̃_{1,2})`.
    pub projector: RationalFunction,
}

/// Spectral invariants of one `L̃`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralInvariants {
    /// `I_{p,k}` for `1 ≤ k ≤ r_p − 1`.
    pub invariants: BTreeMap<(Pole, usize), C>,
    /// `t_{p,k}` for `0 ≤ k ≤ r_p − 1`, read off the leading coefficients of `λ₊`.
    pub recovered_times: BTreeMap<(Pole, usize), C>,
    /// Truncated expansion of `λ₊` at each pole, in the [`laurent_slice`]
    /// order convention.
    pub expansions: BTreeMap<Pole, LaurentSlice>,
}

impl SpectralInvariants {
    /// Largest deviation of the recovered times from `chart`.
    pub fn time_mismatch(&self, chart: &TimeChart) -> f64 {
        self.recovered_times.iter().map(|(&(p, k), v)| (v - chart.t(p, k)).norm()).fold(0.0, f64::max)
    }
}

/// One row of [`ham_vs_invariants`].
#[derive(Clone, Debug, PartialEq)]
pub struct HamSpectralEntry {
    /// Deformation time `t_{p,k}`.
    pub direction: Direction,
    /// `k · Ham^{t_{p,k}}`.
    pub lhs: C,
    /// `2k I_{p,k}` plus the correction from the gauge term.
    pub rhs: C,
}

/// Both sides of the Hamiltonian and spectral-invariant relation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HamSpectralReport {
    /// One row per free irregular time.
    pub entries: Vec<HamSpectralEntry>,
}

impl HamSpectralReport {
    /// Largest `|lhs − rhs| / (1 + |lhs|)`.
    pub fn max_discrepancy(&self) -> f64 {
        self.entries.iter().map(|e| (e.lhs - e.rhs).norm() / (1.0 + e.lhs.norm())).fold(0.0, f64::max)
    }
}

/// `F = L̃_{1,2} ∂_λ(L̃_{1,1}/L̃_{1,2})`.
pub fn gauge_term(l: &GeoLax) -> Result<RationalFunction> {
    Ok(&l.l12 * &l.l11.checked_div(&l.l12)?.derivative())
}

/// `det L̃`, exactly and in projector form.
pub fn det_geo_l(l: &GeoLax, chart: &TimeChart, profile: &PoleProfile) -> Result<GeoDeterminant> {
    let exact = &(&l.l11 * &l.l22) - &(&l.l12 * &l.l21);
    let h = h_from_geo(l, profile)?;
    let f = gauge_term(l)?;
    let mut poly = polynomial_part_at_infinity(&f)?.coeffs().to_vec();
    let n = poly.len().max(h.inf.len()).max(profile.r_inf.saturating_sub(2));
    poly.resize(n, ZERO);
    for (j, hj) in h.inf.iter().enumerate() {
        poly[j] -= hj;
    }
    if profile.r_inf >= 3 {
        poly[profile.r_inf - 3] += chart.t(Pole::Inf, profile.r_inf - 1);
    }
    let mut projector = &build_tdp2(chart, profile) + &RationalFunction::from_poly(Poly::new(poly));
    for (s, p) in profile.poles.iter().enumerate() {
        let minus_h: Vec<C> = h.finite[s].iter().map(|x| -x).collect();
        projector = &projector + &crate::coords::pole_sum(p.x, &minus_h);
        projector = &projector + &singular_part(&f, p.x)?;
    }
    Ok(GeoDeterminant { exact, projector })
}

/// `√(a_0 + a_1 z + …)` as a power series with `b_0 = root`.
fn series_sqrt(a: &[C], root: C) -> Vec<C> {
    let mut b = vec![ZERO; a.len()];
    if a.is_empty() {
        return b;
    }
    b[0] = root;
    for k in 1..a.len() {
        let cross: C = (1..k).map(|i| b[i] * b[k - i]).sum();
        b[k] = (a[k] - cross) / (2.0 * root);
    }
    b
}

/// Expansion of `λ₊` at `p`: `order` is the pole order of `λ₊` there and
/// `expected` the coefficient fixing the branch.
fn lambda_plus_at(minus_det: &RationalFunction, point: ExtendedPoint, order: usize, expected: C) -> Result<LaurentSlice> {
    let len = 2 * order - 1;
    let r = order as i32;
    // Orders in the slice convention: at X the window z^{−r} … z^{r−2}; at ∞
    // the window λ^{r−2} … λ^{−r}, i.e. orders 2 − r … r.
    let (lo, det_lo) = match point {
        ExtendedPoint::Finite(_) => (-r, -2 * r),
        ExtendedPoint::Infinity => (2 - r, 4 - 2 * r),
    };
    let sl = laurent_slice(minus_det, point, det_lo, det_lo + len as i32 - 1)?;
    let a0 = sl.coeffs[0];
    let scale = sl.coeffs.iter().map(|c| c.norm()).fold(1e-300, f64::max);
    if a0.norm() <= 1e-12 * scale {
        return Err(LaxError::BranchAmbiguity(format!("leading coefficient of −det vanishes at {point:?}")));
    }
    let s = a0.sqrt();
    let root = if (s - expected).norm() <= (s + expected).norm() { s } else { -s };
    Ok(LaurentSlice { point, k_lo: lo, coeffs: series_sqrt(&sl.coeffs, root) })
}

/// Spectral invariants and recovered times from `λ₊ = √(−det L̃)`.
///
/// The branch at each pole is the one whose leading coefficient is closer
/// to `t_{∞,r_∞−1}` at infinity and to `−t_{X_s,r_s−1}` at `X_s`.
pub fn spectral_invariants(l: &GeoLax, chart: &TimeChart, profile: &PoleProfile) -> Result<SpectralInvariants> {
    let minus_det = -(&(&l.l11 * &l.l22) - &(&l.l12 * &l.l21));
    invariants_from_det(&minus_det, chart, profile)
}

/// Spectral invariants from `−det L̃` directly.
pub fn invariants_from_det(minus_det: &RationalFunction, chart: &TimeChart, profile: &PoleProfile) -> Result<SpectralInvariants> {
    let mut out = SpectralInvariants {
        invariants: BTreeMap::new(),
        recovered_times: BTreeMap::new(),
        expansions: BTreeMap::new(),
    };
    let r = profile.r_inf;
    let sl = lambda_plus_at(minus_det, ExtendedPoint::Infinity, r, chart.t(Pole::Inf, r - 1))?;
    for j in 0..r {
        out.recovered_times.insert((Pole::Inf, j), sl.at(1 - j as i32));
    }
    for j in 1..r {
        out.invariants.insert((Pole::Inf, j), sl.at(j as i32 + 1) / j as f64);
    }
    out.expansions.insert(Pole::Inf, sl);
    for (s, p) in profile.poles.iter().enumerate() {
        let pole = Pole::X(s);
        let sl = lambda_plus_at(minus_det, ExtendedPoint::Finite(p.x), p.r, -chart.t(pole, p.r - 1))?;
        for j in 0..p.r {
            out.recovered_times.insert((pole, j), -sl.at(-(j as i32) - 1));
        }
        for j in 1..p.r {
            out.invariants.insert((pole, j), -sl.at(j as i32 - 1) / j as f64);
        }
        out.expansions.insert(pole, sl);
    }
    Ok(out)
}

/// Compares `k · Ham^{t_{p,k}}` with `2k I_{p,k} + (M_p⁻¹ c_p)_k`, where
/// `c_p` collects the time convolutions and the residues of the gauge term.
/// Rows are produced for every time present in `ham`.
pub fn ham_vs_invariants(
    l: &GeoLax,
    ham: &BTreeMap<Direction, C>,
    chart: &TimeChart,
    profile: &PoleProfile,
) -> Result<HamSpectralReport> {
    let inv = spectral_invariants(l, chart, profile)?;
    let f = gauge_term(l)?;
    let mut rep = HamSpectralReport::default();
    let mut push = |pole: Pole, correction: Vec<C>| -> Result<()> {
        let m = toeplitz_from_times(chart, profile, pole);
        let shifted = toeplitz_solve(&m, &correction)?;
        for (i, c) in shifted.iter().enumerate() {
            let k = i + 1;
            let direction = Direction::Time(pole, k);
            if let Some(h) = ham.get(&direction) {
                let i_k = inv.invariants.get(&(pole, k)).copied().unwrap_or(ZERO);
                rep.entries.push(HamSpectralEntry {
                    direction,
                    lhs: *h * k as f64,
                    rhs: 2.0 * k as f64 * i_k + c,
                });
            }
        }
        Ok(())
    };
    let r = profile.r_inf;
    if r >= 4 {
        let t = |j: usize| chart.t(Pole::Inf, j);
        let sl = laurent_slice(&f, ExtendedPoint::Infinity, -(r as i32 - 4), 0)?;
        let correction = (0..=r - 4)
            .rev()
            .map(|k| (0..=k + 2).map(|j| t(k + 2 - j) * t(j)).sum::<C>() + sl.at(-(k as i32)))
            .collect();
        push(Pole::Inf, correction)?;
    }
    for (s, p) in profile.poles.iter().enumerate() {
        if p.r < 2 {
            continue;
        }
        let pole = Pole::X(s);
        let t = |j: usize| chart.t(pole, j);
        let sl = laurent_slice(&f, ExtendedPoint::Finite(p.x), -(p.r as i32), -2)?;
        let correction = (2..=p.r)
            .rev()
            .map(|k| (0..=k - 2).map(|j| t(j) * t(k - 2 - j)).sum::<C>() + sl.at(-(k as i32)))
            .collect();
        push(pole, correction)?;
    }
    Ok(rep)
}
