//! Oper-gauge Lax pair `(L, A)` in the coordinates `(q, p)`.
//!
//! `L` is companion shaped with first row `(0, 1)`; all dynamical content
//! sits in `L_{2,1}`, which is fixed by the coefficients `H_{p,k}`. The
//! first row of `A` is fixed by the coefficients `ν` and `μ`; the second row
//! follows from the first row of the compatibility equation.
//!
//! # Invariants
//! - `L_{2,2} = Σ 1/(λ − q_j) − Σ r_s/(λ − X_s)` exactly.
//! - `A_{2,1} = ∂A_{1,1} + A_{1,2} L_{2,1}` and
//!   `A_{2,2} = ∂A_{1,2} + A_{1,1} + A_{1,2} L_{2,2}` exactly.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::coords::OperCoords;
use crate::model::{
    apply_deformation, free_directions, DeformationVector, Direction, Pole, PoleProfile, PoleVector, TimeChart,
};
use crate::ratcalc::{cauchy_derivative, sample_lambdas, Poly, RationalFunction};
use crate::structlin::{solve_dense, toeplitz_from_times, toeplitz_solve, VandermondeStack};
use crate::{LaxError, Result, C};

const ZERO: C = C::new(0.0, 0.0);

/// Coefficient `P^{(2)}_{∞,j}` for `max(0, r_∞ − 3) ≤ j ≤ 2r_∞ − 4`, zero otherwise.
pub fn p2_inf(chart: &TimeChart, profile: &PoleProfile, j: i64) -> C {
    let r = profile.r_inf as i64;
    if j < 0 || j < r - 3 || j > 2 * r - 4 {
        return ZERO;
    }
    let k = 2 * r - 4 - j;
    let t = |i: i64| chart.t(Pole::Inf, i as usize);
    -(0..=k).map(|i| t(r - 1 - i) * t(r - 1 - (k - i))).sum::<C>()
}

/// Coefficient `P^{(2)}_{X_s,j}` for `r_s + 1 ≤ j ≤ 2r_s`, zero otherwise.
pub fn p2_finite(chart: &TimeChart, profile: &PoleProfile, s: usize, j: usize) -> C {
    let r = profile.poles[s].r;
    if j <= r || j > 2 * r {
        return ZERO;
    }
    let k = 2 * r - j;
    let t = |i: usize| chart.t(Pole::X(s), i);
    -(0..=k).map(|i| t(r - 1 - i) * t(r - 1 - (k - i))).sum::<C>()
}

/// `P̃_2(λ)`.
pub fn build_tdp2(chart: &TimeChart, profile: &PoleProfile) -> RationalFunction {
    let top = 2 * profile.r_inf as i64 - 4;
    let coeffs: Vec<C> = (0..=top.max(0)).map(|j| p2_inf(chart, profile, j)).collect();
    let mut out = RationalFunction::from_poly(Poly::new(coeffs));
    for (s, p) in profile.poles.iter().enumerate() {
        for j in p.r + 1..=2 * p.r {
            out = &out + &RationalFunction::pole(p2_finite(chart, profile, s, j), p.x, j as u32);
        }
    }
    out
}

/// Oper-gauge `L` with the data it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct OperLax {
    /// `L_{2,1}`.
    pub l21: RationalFunction,
    /// `L_{2,2}`.
    pub l22: RationalFunction,
    /// Coefficients `H_{p,k}`, indexed like `Q`.
    pub h: PoleVector,
    /// Gauge constant `g_0`.
    pub g0: C,
    /// `P̃_2`.
    pub tdp2: RationalFunction,
}

/// Oper-gauge `A_α` with its expansion data.
#[derive(Clone, Debug, PartialEq)]
pub struct OperDeformation {
    /// `A_{1,1}`.
    pub a11: RationalFunction,
    /// `A_{1,2}`.
    pub a12: RationalFunction,
    /// `A_{2,1}`.
    pub a21: RationalFunction,
    /// `A_{2,2}`.
    pub a22: RationalFunction,
    /// Coefficients `ν`.
    pub nu: NuCoeffs,
    /// Residues `μ_j` of `A_{1,2}`.
    pub mu: Vec<C>,
    /// Constant `c_{∞,0}`.
    pub c_inf0: C,
}

/// Expansion coefficients `ν` of `A_{1,2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct NuCoeffs {
    /// `inf[k − 1] = ν_{∞,k}` for `1 ≤ k ≤ r_∞ − 3`.
    pub inf: Vec<C>,
    /// `finite[s][k] = ν_{X_s,k}` for `0 ≤ k ≤ r_s − 1`.
    pub finite: Vec<Vec<C>>,
    /// `ν_{∞,0}`, nonzero only when `r_∞ ≤ 2`.
    pub nu0: C,
    /// `ν_{∞,−1}`, nonzero only when `r_∞ = 1`.
    pub nu_m1: C,
}

impl NuCoeffs {
    /// `ν_{∞,k}` for `k ≥ 1`, zero outside the stored range.
    pub fn at_inf(&self, k: usize) -> C {
        if k == 0 {
            return self.nu0;
        }
        self.inf.get(k - 1).copied().unwrap_or_default()
    }

    /// `ν_{X_s,k}`, zero outside `0 ≤ k ≤ r_s − 1`.
    pub fn at(&self, s: usize, k: usize) -> C {
        self.finite[s].get(k).copied().unwrap_or_default()
    }
}

fn check_nodes(oper: &OperCoords, profile: &PoleProfile) -> Result<()> {
    let g = profile.genus();
    if oper.q.len() != g || oper.p.len() != g {
        return Err(LaxError::MalformedInput(format!("expected {g} coordinates")));
    }
    Ok(())
}

/// Solves for the coefficients `H` and returns them with `g_0`.
///
/// Row `i` reads `Σ_j H_{∞,j} q_i^j + Σ H_{X_s,k} (q_i − X_s)^{−k} = rhs_i`.
/// When `r_∞ ≤ 2` the additional linear relations complete the square
/// system.
pub fn solve_h(oper: &OperCoords, chart: &TimeChart, profile: &PoleProfile) -> Result<(PoleVector, C)> {
    check_nodes(oper, profile)?;
    let (q, p) = (&oper.q, &oper.p);
    let g = q.len();
    let stack = VandermondeStack::new(profile, q)?;
    let tdp2 = build_tdp2(chart, profile);
    let r_inf = profile.r_inf;
    let t_lead = chart.t(Pole::Inf, r_inf - 1);
    let mut rhs: Vec<C> = (0..g)
        .map(|i| {
            let mut v = p[i] * p[i] + tdp2.eval(q[i]);
            for pole in &profile.poles {
                v += p[i] * pole.r as f64 / (q[i] - pole.x);
            }
            for j in 0..g {
                if j != i {
                    v += (p[j] - p[i]) / (q[i] - q[j]);
                }
            }
            if r_inf >= 3 {
                v += t_lead * q[i].powu((r_inf - 3) as u32);
            }
            v
        })
        .collect();
    let n = stack.rows();
    let mut a = DMatrix::from_element(n, n, ZERO);
    for i in 0..g {
        for c in 0..n {
            a[(i, c)] = stack.matrix[(c, i)];
        }
    }
    let labels = PoleVector::labels(profile);
    let sum_p: C = p.iter().sum();
    let t0 = chart.t(Pole::Inf, 0);
    if r_inf <= 2 {
        for (c, l) in labels.iter().enumerate() {
            if l.1 == 1 {
                a[(g, c)] = C::new(1.0, 0.0);
            }
        }
        rhs.push(if r_inf == 2 { sum_p + 2.0 * t_lead * t0 - t_lead } else { sum_p });
    }
    if r_inf == 1 {
        for (c, l) in labels.iter().enumerate() {
            if let (Pole::X(s), k) = *l {
                if k == 1 {
                    a[(g + 1, c)] = profile.poles[s].x;
                } else if k == 2 {
                    a[(g + 1, c)] = C::new(1.0, 0.0);
                }
            }
        }
        let mut v: C = q.iter().zip(p).map(|(a, b)| a * b).sum();
        for (s, pole) in profile.poles.iter().enumerate() {
            if pole.r == 1 {
                v += chart.t(Pole::X(s), 0).powu(2);
            }
        }
        rhs.push(v + t0 * (t0 - 1.0));
    }
    let sol = solve_dense(&a, &rhs)?;
    let h = PoleVector::from_flat(profile, &sol.x)?;
    let shift: C = q.iter().sum::<C>() - profile.poles.iter().map(|p| p.x * p.r as f64).sum::<C>();
    let g0 = if r_inf >= 2 {
        chart.t(Pole::Inf, r_inf - 2) + t_lead * shift
    } else {
        g0_r_inf_one(oper, &h, chart, profile)?
    };
    Ok((h, g0))
}

fn g0_r_inf_one(oper: &OperCoords, h: &PoleVector, chart: &TimeChart, profile: &PoleProfile) -> Result<C> {
    let t0 = chart.t(Pole::Inf, 0);
    if t0 == ZERO {
        return Err(LaxError::Singular("t[inf,0] vanishes".into()));
    }
    let mut acc = ZERO;
    for (s, pole) in profile.poles.iter().enumerate() {
        let x = pole.x;
        if pole.r == 1 {
            acc -= 2.0 * x * p2_finite(chart, profile, s, 2);
        }
        if pole.r == 2 {
            acc -= p2_finite(chart, profile, s, 3);
        }
        acc += x * x * h.at(s, 1) + 2.0 * x * h.at(s, 2) + h.at(s, 3);
    }
    acc -= oper.q.iter().zip(&oper.p).map(|(q, p)| p * q * q).sum::<C>();
    let shift: C = oper.q.iter().sum::<C>() - profile.poles.iter().map(|p| p.x * p.r as f64).sum::<C>();
    acc += t0 * (2.0 * t0 - 1.0) * shift;
    Ok(acc / (2.0 * t0))
}

/// `L_{2,2} = Σ 1/(λ − q_j) − Σ r_s/(λ − X_s)`.
pub fn build_l22(q: &[C], profile: &PoleProfile) -> RationalFunction {
    let mut out = RationalFunction::zero();
    for &qj in q {
        out = &out + &RationalFunction::pole(C::new(1.0, 0.0), qj, 1);
    }
    for p in &profile.poles {
        out = &out + &RationalFunction::pole(C::new(-(p.r as f64), 0.0), p.x, 1);
    }
    out
}

/// `L_{2,1}` from given coefficients `H`.
pub fn build_l21(oper: &OperCoords, h: &PoleVector, chart: &TimeChart, profile: &PoleProfile) -> RationalFunction {
    let mut out = -build_tdp2(chart, profile);
    let mut poly = h.inf.clone();
    if profile.r_inf >= 3 {
        poly.resize(profile.r_inf - 2, ZERO);
        poly[profile.r_inf - 3] -= chart.t(Pole::Inf, profile.r_inf - 1);
    }
    out = &out + &RationalFunction::from_poly(Poly::new(poly));
    for (s, p) in profile.poles.iter().enumerate() {
        out = &out + &crate::coords::pole_sum(p.x, &h.finite[s]);
    }
    for (qj, pj) in oper.q.iter().zip(&oper.p) {
        out = &out + &RationalFunction::pole(-pj, *qj, 1);
    }
    out
}

/// Assembles `L` from `(q, p)` and the times.
pub fn build_oper_l(oper: &OperCoords, chart: &TimeChart, profile: &PoleProfile) -> Result<OperLax> {
    let (h, g0) = solve_h(oper, chart, profile)?;
    Ok(OperLax {
        l21: build_l21(oper, &h, chart, profile),
        l22: build_l22(&oper.q, profile),
        h,
        g0,
        tdp2: build_tdp2(chart, profile),
    })
}

/// Coefficients `ν` from the Toeplitz systems. `ν_{∞,0}` and `ν_{∞,−1}`
/// are left at zero here; when `r_∞ ≤ 2` they are fixed together with `μ`
/// in [`build_oper_a`].
pub fn nu_coeffs(alpha: &DeformationVector, chart: &TimeChart, profile: &PoleProfile) -> Result<NuCoeffs> {
    alpha.validate(profile)?;
    let r_inf = profile.r_inf;
    let mut inf = Vec::new();
    if r_inf >= 4 {
        let m = toeplitz_from_times(chart, profile, Pole::Inf);
        let rhs: Vec<C> = (1..=r_inf - 3).rev().map(|k| alpha.time(Pole::Inf, k) / k as f64).collect();
        inf = toeplitz_solve(&m, &rhs)?;
    }
    let mut finite = Vec::with_capacity(profile.n());
    for (s, p) in profile.poles.iter().enumerate() {
        let mut v = vec![-alpha.position(s)];
        if p.r >= 2 {
            let m = toeplitz_from_times(chart, profile, Pole::X(s));
            let rhs: Vec<C> = (1..p.r).rev().map(|k| -alpha.time(Pole::X(s), k) / k as f64).collect();
            v.extend(toeplitz_solve(&m, &rhs)?);
        }
        finite.push(v);
    }
    Ok(NuCoeffs { inf, finite, nu0: ZERO, nu_m1: ZERO })
}

/// Assembles `A_α` given `L`, `ω` and `𝓛_α[ω]`.
pub fn build_oper_a(
    alpha: &DeformationVector,
    oper: &OperCoords,
    lax: &OperLax,
    chart: &TimeChart,
    profile: &PoleProfile,
    omega: C,
    l_omega: C,
) -> Result<OperDeformation> {
    let mut nu = nu_coeffs(alpha, chart, profile)?;
    let g = oper.q.len();
    let stack = VandermondeStack::new(profile, &oper.q)?;
    let n = stack.rows();
    let r_inf = profile.r_inf;
    let extra = n - g;
    let mut a = DMatrix::from_element(n, n, ZERO);
    for i in 0..n {
        for j in 0..g {
            a[(i, j)] = stack.matrix[(i, j)];
        }
    }
    let mut rhs = vec![ZERO; n];
    let mut row = 0;
    for k in 0..r_inf.saturating_sub(3) {
        rhs[row] = nu.inf[k];
        row += 1;
    }
    for (s, p) in profile.poles.iter().enumerate() {
        for k in 1..=p.r {
            rhs[row] = -nu.at(s, k - 1);
            if k == 1 && r_inf <= 2 {
                a[(row, g)] = C::new(-1.0, 0.0);
            }
            if r_inf == 1 {
                if k == 1 {
                    a[(row, g + 1)] = -p.x;
                } else if k == 2 {
                    a[(row, g + 1)] = C::new(-1.0, 0.0);
                }
            }
            row += 1;
        }
    }
    let sol = solve_dense(&a, &rhs)?;
    let mu = sol.x[..g].to_vec();
    if extra >= 1 {
        nu.nu0 = sol.x[g];
    }
    if extra >= 2 {
        nu.nu_m1 = sol.x[g + 1];
    }
    let c_inf0 = l_omega / (2.0 * omega) + if r_inf == 1 { 0.5 * nu.nu_m1 } else { ZERO };
    let mut a11 = RationalFunction::constant(c_inf0);
    let mut a12 = RationalFunction::from_poly(Poly::new(vec![nu.nu0, nu.nu_m1]));
    for ((&m, &q), &p) in mu.iter().zip(&oper.q).zip(&oper.p) {
        a11 = &a11 + &RationalFunction::pole(-p * m, q, 1);
        a12 = &a12 + &RationalFunction::pole(m, q, 1);
    }
    let a21 = &a11.derivative() + &(&a12 * &lax.l21);
    let a22 = &(&a12.derivative() + &a11) + &(&a12 * &lax.l22);
    Ok(OperDeformation { a11, a12, a21, a22, nu, mu, c_inf0 })
}

/// Every Hamiltonian from the Toeplitz solves, frozen directions included.
pub fn hamiltonians_all(h: &PoleVector, chart: &TimeChart, profile: &PoleProfile) -> Result<BTreeMap<Direction, C>> {
    let mut out = BTreeMap::new();
    let r_inf = profile.r_inf;
    if r_inf >= 4 {
        let m = toeplitz_from_times(chart, profile, Pole::Inf);
        let rhs: Vec<C> = (0..r_inf - 3).rev().map(|j| h.inf[j]).collect();
        let x = toeplitz_solve(&m, &rhs)?;
        for (i, v) in x.iter().enumerate() {
            out.insert(Direction::Time(Pole::Inf, i + 1), v / (i + 1) as f64);
        }
    }
    for (s, p) in profile.poles.iter().enumerate() {
        if p.r >= 2 {
            let m = toeplitz_from_times(chart, profile, Pole::X(s));
            let rhs: Vec<C> = (2..=p.r).rev().map(|k| h.at(s, k)).collect();
            let x = toeplitz_solve(&m, &rhs)?;
            for (i, v) in x.iter().enumerate() {
                out.insert(Direction::Time(Pole::X(s), i + 1), v / (i + 1) as f64);
            }
        }
        out.insert(Direction::Position(s), h.at(s, 1));
    }
    Ok(out)
}

/// Hamiltonians along the free directions.
pub fn hamiltonians_oper(h: &PoleVector, chart: &TimeChart, profile: &PoleProfile) -> Result<BTreeMap<Direction, C>> {
    let free: Vec<Direction> = free_directions(profile);
    Ok(hamiltonians_all(h, chart, profile)?.into_iter().filter(|(d, _)| free.contains(d)).collect())
}

/// `Ham^{(α)} = Σ α_τ Ham^τ` at `(q, p)`.
pub fn ham_alpha(alpha: &DeformationVector, oper: &OperCoords, chart: &TimeChart, profile: &PoleProfile) -> Result<C> {
    let (h, _) = solve_h(oper, chart, profile)?;
    let ham = hamiltonians_all(&h, chart, profile)?;
    Ok(alpha.alpha.iter().map(|(d, a)| a * ham.get(d).copied().unwrap_or_default()).sum())
}

/// Nodes of the Cauchy-integral derivatives in [`oper_gradient`].
const GRADIENT_NODES: usize = 32;

/// Gradient `(∂f/∂q, ∂f/∂p)` of a function holomorphic in every `q_i` away
/// from the poles and the other `q_j`, and in every `p_i`.
///
/// Each partial derivative uses [`cauchy_derivative`] on a circle of radius
/// a quarter of the distance from `q_i` to the nearest pole or other `q_j`,
/// and of radius `max(|p_i|, 1)` in `p_i`, which keeps rounding small when
/// `q_i` approaches a pole.
pub fn oper_gradient(
    f: &dyn Fn(&OperCoords) -> Result<C>,
    oper: &OperCoords,
    profile: &PoleProfile,
) -> Result<(Vec<C>, Vec<C>)> {
    let g = oper.q.len();
    let mut dq = vec![ZERO; g];
    let mut dp = vec![ZERO; g];
    let positions = profile.positions();
    for i in 0..g {
        let gap = positions
            .iter()
            .chain(oper.q.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, q)| q))
            .map(|x| (x - oper.q[i]).norm())
            .fold(f64::INFINITY, f64::min);
        let rho = 0.25 * if gap.is_finite() { gap } else { 1.0 };
        dq[i] = cauchy_derivative(
            |z| {
                let mut x = oper.clone();
                x.q[i] = z;
                f(&x)
            },
            oper.q[i],
            rho,
            GRADIENT_NODES,
        )?;
        dp[i] = cauchy_derivative(
            |z| {
                let mut x = oper.clone();
                x.p[i] = z;
                f(&x)
            },
            oper.p[i],
            oper.p[i].norm().max(1.0),
            GRADIENT_NODES,
        )?;
    }
    Ok((dq, dp))
}

/// Hamilton's vector field `(∂Ham/∂p, −∂Ham/∂q)`, with the gradient from
/// [`oper_gradient`].
pub fn hamilton_velocity(
    alpha: &DeformationVector,
    oper: &OperCoords,
    chart: &TimeChart,
    profile: &PoleProfile,
) -> Result<(Vec<C>, Vec<C>)> {
    let (dq, dp) = oper_gradient(&|x: &OperCoords| ham_alpha(alpha, x, chart, profile), oper, profile)?;
    Ok((dp, dq.into_iter().map(|v| -v).collect()))
}

/// One explicit step of the deformation flow: times and positions move by
/// `h α`, the coordinates by `h` times Hamilton's vector field.
pub fn flow_step(
    alpha: &DeformationVector,
    oper: &OperCoords,
    chart: &TimeChart,
    profile: &PoleProfile,
    velocity: &(Vec<C>, Vec<C>),
    h: f64,
) -> (OperCoords, TimeChart, PoleProfile) {
    let (p2, t2) = apply_deformation(profile, chart, alpha, h);
    let q = oper.q.iter().zip(&velocity.0).map(|(q, v)| q + v * h).collect();
    let p = oper.p.iter().zip(&velocity.1).map(|(p, v)| p + v * h).collect();
    (OperCoords { q, p }, t2, p2)
}

/// Options of [`compatibility_residual`].
#[derive(Clone, Debug, PartialEq)]
pub struct CompatOptions {
    /// Step of the fourth-order central difference along the flow.
    pub h: f64,
    /// Number of sample points `λ`.
    pub samples: usize,
    /// Seed of the sample points.
    pub seed: u64,
    /// Relative perturbation `δ`: every coefficient `H` becomes
    /// `H + δ (1 + |H|)` when `L` is assembled; zero for the genuine check.
    pub h_perturbation: C,
    /// Factor applied to `A_α`; one for the genuine check.
    pub a_scale: f64,
}

impl Default for CompatOptions {
    fn default() -> Self {
        CompatOptions { h: 1e-6, samples: 20, seed: 0, h_perturbation: ZERO, a_scale: 1.0 }
    }
}

fn perturbed_l(oper: &OperCoords, chart: &TimeChart, profile: &PoleProfile, delta: C) -> Result<OperLax> {
    let mut lax = build_oper_l(oper, chart, profile)?;
    if delta != ZERO {
        for x in lax.h.inf.iter_mut().chain(lax.h.finite.iter_mut().flatten()) {
            *x += delta * (1.0 + x.norm());
        }
        lax.l21 = build_l21(oper, &lax.h, chart, profile);
    }
    Ok(lax)
}

/// Largest residual of `𝓛_α[L] = ∂_λ A − [L, A]` over the second-row
/// entries at the sample points, each divided by one plus the moduli of
/// `𝓛_α[L]`, `∂_λ A` and `[L, A]` there. The first row holds by
/// construction of `A`.
pub fn compatibility_residual(
    alpha: &DeformationVector,
    oper: &OperCoords,
    chart: &TimeChart,
    profile: &PoleProfile,
    opts: &CompatOptions,
) -> Result<f64> {
    if alpha.alpha.values().all(|v| *v == ZERO) {
        return Ok(0.0);
    }
    let lax = perturbed_l(oper, chart, profile, opts.h_perturbation)?;
    let mut dep = build_oper_a(alpha, oper, &lax, chart, profile, C::new(1.0, 0.0), ZERO)?;
    if opts.a_scale != 1.0 {
        let k = C::new(opts.a_scale, 0.0);
        for a in [&mut dep.a11, &mut dep.a12, &mut dep.a21, &mut dep.a22] {
            *a = a.scale(k);
        }
    }
    let vel = hamilton_velocity(alpha, oper, chart, profile)?;
    // Fourth-order central stencil at offsets ±h and ±2h along the flow.
    let mut steps = Vec::with_capacity(4);
    let mut avoid = oper.q.clone();
    let mut poles = profile.positions();
    for m in [1.0, -1.0, 2.0, -2.0] {
        let (o, t, p) = flow_step(alpha, oper, chart, profile, &vel, m * opts.h);
        steps.push(perturbed_l(&o, &t, &p, opts.h_perturbation)?);
        avoid.extend(o.q);
        poles.extend(p.positions());
    }
    let stencil = |f: &dyn Fn(&OperLax) -> C| {
        (8.0 * (f(&steps[0]) - f(&steps[1])) - (f(&steps[2]) - f(&steps[3]))) / (12.0 * opts.h)
    };
    let da21 = dep.a21.derivative();
    let da22 = dep.a22.derivative();
    let mut worst: f64 = 0.0;
    for z in sample_lambdas(&poles, &avoid, opts.samples, opts.seed) {
        let (l21, l22) = (lax.l21.eval(z), lax.l22.eval(z));
        let (a11, a12, a21, a22) = (dep.a11.eval(z), dep.a12.eval(z), dep.a21.eval(z), dep.a22.eval(z));
        let dl21 = stencil(&|l| l.l21.eval(z));
        let dl22 = stencil(&|l| l.l22.eval(z));
        // Second row of [L, A] with L = [[0, 1], [l21, l22]].
        let c21 = l21 * a11 + l22 * a21 - a22 * l21;
        let c22 = l21 * a12 + l22 * a22 - a21 - a22 * l22;
        let (d21, d22) = (da21.eval(z), da22.eval(z));
        let r21 = (dl21 - (d21 - c21)).norm() / (1.0 + dl21.norm() + d21.norm() + c21.norm());
        let r22 = (dl22 - (d22 - c22)).norm() / (1.0 + dl22.norm() + d22.norm() + c22.norm());
        worst = worst.max(r21).max(r22);
    }
    Ok(worst)
}
