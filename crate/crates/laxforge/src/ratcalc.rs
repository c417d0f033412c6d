//! Polynomial and rational-function calculus over complex scalars.
//!
//! [`RationalFunction`] keeps its denominator in factored form: a list of
//! known roots with multiplicities and a monic remainder polynomial whose
//! roots are not tracked. Pole orders at the known roots are therefore exact
//! and Laurent expansions about them never have to guess a valuation.
//!
//! Orders of a [`LaurentSlice`] follow the local coordinate of the point:
//! at a finite point `a` order `k` is the coefficient of `(λ − a)^k`, at
//! infinity order `k` is the coefficient of `λ^{−k}`.
//!
//! # Invariants
//! - Known roots are pairwise distinct and carry positive multiplicities.
//! - The remainder polynomial is monic.
//! - A zero function has numerator zero, no roots and remainder one.

use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{ExtendedPoint, PoleProfile};
use crate::{LaxError, Result, C};

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Two roots closer than this (relative to their size) are identified.
const ROOT_MERGE_TOL: f64 = 1e-12;

/// Relative size below which leading coefficients are dropped before a
/// polynomial is made monic.
const LEADING_TRIM_TOL: f64 = 1e-13;

fn same_point(a: C, b: C) -> bool {
    (a - b).norm() <= ROOT_MERGE_TOL * (1.0 + a.norm().max(b.norm()))
}

/// Scale-aware relative error `|a − b| / (1 + max(|a|, |b|))`.
pub fn rel_err(a: C, b: C) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}

/// Polynomial in `λ` with ascending coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<C>,
}

impl Poly {
    /// Builds a polynomial, dropping exactly zero leading coefficients.
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// The zero polynomial.
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    /// The constant `c`.
    pub fn constant(c: C) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `c λ^k`.
    pub fn monomial(c: C, k: usize) -> Self {
        let mut v = vec![ZERO; k + 1];
        v[k] = c;
        Poly::new(v)
    }

    /// `Π (λ − a)^m` over the given roots.
    pub fn from_roots(roots: &[(C, u32)]) -> Self {
        let mut p = Poly::constant(ONE);
        for &(a, m) in roots {
            for _ in 0..m {
                p = p.mul_linear(a);
            }
        }
        p
    }

    /// Ascending coefficients.
    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Coefficient of `λ^k` (zero past the degree).
    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// True for the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Leading coefficient (zero for the zero polynomial).
    pub fn leading(&self) -> C {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops leading coefficients below `tol · max_abs`.
    pub fn trim_relative(&self, tol: f64) -> Self {
        let scale = self.max_abs();
        let mut v = self.coeffs.clone();
        while let Some(c) = v.last() {
            if c.norm() <= tol * scale {
                v.pop();
            } else {
                break;
            }
        }
        Poly { coeffs: v }
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C) -> C {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Derivative in `λ`.
    pub fn derivative(&self) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Multiplication by the scalar `c`.
    pub fn scale(&self, c: C) -> Self {
        Poly::new(self.coeffs.iter().map(|&x| x * c).collect())
    }

    /// Multiplication by `(λ − a)`.
    pub fn mul_linear(&self, a: C) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let n = self.coeffs.len();
        let mut v = vec![ZERO; n + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            v[k + 1] += c;
            v[k] -= a * c;
        }
        Poly::new(v)
    }

    /// Integer power.
    pub fn pow(&self, k: u32) -> Self {
        let mut out = Poly::constant(ONE);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Coefficients of the same polynomial written in powers of `(λ − a)`.
    pub fn taylor_shift(&self, a: C) -> Vec<C> {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let hi = c[j + 1];
                c[j] += a * hi;
            }
        }
        c
    }

    /// Monic copy after trimming negligible leading coefficients; returns the
    /// removed leading factor as well.
    fn monic_trimmed(&self) -> Result<(Poly, C)> {
        let p = self.trim_relative(LEADING_TRIM_TOL);
        let lead = p.leading();
        if lead == ZERO {
            return Err(LaxError::MalformedInput("division by the zero polynomial".into()));
        }
        Ok((p.scale(ONE / lead), lead))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::new(v)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-ONE)
    }
}

/// Truncated power-series quotient `num / den` through order `n − 1`.
/// Requires `den[0] ≠ 0`.
pub fn series_div(num: &[C], den: &[C], n: usize) -> Vec<C> {
    let mut out = vec![ZERO; n];
    let d0 = den[0];
    for k in 0..n {
        let mut acc = num.get(k).copied().unwrap_or(ZERO);
        for j in 1..=k.min(den.len().saturating_sub(1)) {
            acc -= den[j] * out[k - j];
        }
        out[k] = acc / d0;
    }
    out
}

/// Truncated Laurent coefficients of a function at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSlice {
    /// Expansion point.
    pub point: ExtendedPoint,
    /// Lowest order stored.
    pub k_lo: i32,
    /// Coefficients for orders `k_lo, k_lo + 1, …`.
    pub coeffs: Vec<C>,
}

impl LaurentSlice {
    /// Highest order stored.
    pub fn k_hi(&self) -> i32 {
        self.k_lo + self.coeffs.len() as i32 - 1
    }

    /// Coefficient at order `k`; panics outside the stored window.
    pub fn at(&self, k: i32) -> C {
        assert!(k >= self.k_lo && k <= self.k_hi(), "order {k} outside slice window");
        self.coeffs[(k - self.k_lo) as usize]
    }
}

/// Rational function `num / (Π (λ − b)^m · rest)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    num: Poly,
    roots: Vec<(C, u32)>,
    rest: Poly,
}

impl RationalFunction {
    /// The zero function.
    pub fn zero() -> Self {
        RationalFunction { num: Poly::zero(), roots: Vec::new(), rest: Poly::constant(ONE) }
    }

    /// A polynomial seen as a rational function.
    pub fn from_poly(p: Poly) -> Self {
        RationalFunction { num: p, roots: Vec::new(), rest: Poly::constant(ONE) }.canonical()
    }

    /// The constant `c`.
    pub fn constant(c: C) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    /// `c / (λ − a)^k`.
    pub fn pole(c: C, a: C, k: u32) -> Self {
        Self::from_factored(Poly::constant(c), &[(a, k)])
    }

    /// `c λ^k`.
    pub fn monomial(c: C, k: usize) -> Self {
        Self::from_poly(Poly::monomial(c, k))
    }

    /// `num / Π (λ − b)^m` with known roots.
    pub fn from_factored(num: Poly, roots: &[(C, u32)]) -> Self {
        let mut merged: Vec<(C, u32)> = Vec::new();
        for &(b, m) in roots {
            if m == 0 {
                continue;
            }
            if let Some(e) = merged.iter_mut().find(|e| same_point(e.0, b)) {
                e.1 += m;
            } else {
                merged.push((b, m));
            }
        }
        RationalFunction { num, roots: merged, rest: Poly::constant(ONE) }.canonical()
    }

    /// `num / den` with an unfactored denominator.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(LaxError::MalformedInput("denominator is identically zero".into()));
        }
        let (rest, lead) = den.monic_trimmed()?;
        Ok(RationalFunction { num: num.scale(ONE / lead), roots: Vec::new(), rest }.canonical())
    }

    fn canonical(mut self) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        self.roots.retain(|r| r.1 > 0);
        self
    }

    /// Numerator polynomial.
    pub fn num(&self) -> &Poly {
        &self.num
    }

    /// Known roots of the denominator with multiplicities.
    pub fn known_roots(&self) -> &[(C, u32)] {
        &self.roots
    }

    /// Monic denominator as an expanded polynomial.
    pub fn den(&self) -> Poly {
        &Poly::from_roots(&self.roots) * &self.rest
    }

    /// True when the numerator vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Pole order at a known root `a` (zero when `a` is not a known root).
    pub fn pole_order_at(&self, a: C) -> u32 {
        self.roots.iter().find(|r| same_point(r.0, a)).map(|r| r.1).unwrap_or(0)
    }

    /// Pointwise value.
    pub fn eval(&self, z: C) -> C {
        let mut d = self.rest.eval(z);
        for &(b, m) in &self.roots {
            d *= (z - b).powu(m);
        }
        self.num.eval(z) / d
    }

    /// Multiplication by a scalar.
    pub fn scale(&self, c: C) -> Self {
        RationalFunction { num: self.num.scale(c), roots: self.roots.clone(), rest: self.rest.clone() }
            .canonical()
    }

    /// Derivative in `λ`.
    pub fn derivative(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let e = Poly::from_roots(&self.roots.iter().map(|r| (r.0, 1)).collect::<Vec<_>>());
        let mut sum = Poly::zero();
        for (i, &(_, m)) in self.roots.iter().enumerate() {
            let others: Vec<(C, u32)> = self
                .roots
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, r)| (r.0, 1))
                .collect();
            sum = &sum + &Poly::from_roots(&others).scale(C::new(m as f64, 0.0));
        }
        let roots: Vec<(C, u32)> = self.roots.iter().map(|r| (r.0, r.1 + 1)).collect();
        if self.rest.degree() == Some(0) {
            let num = &(&self.num.derivative() * &e) - &(&self.num * &sum);
            return RationalFunction { num, roots, rest: Poly::constant(ONE) }.canonical();
        }
        let r = &self.rest;
        let num = &(&(&self.num.derivative() * &e) * r)
            - &(&(&self.num * &(&r.derivative() * &e)) + &(&(&self.num * r) * &sum));
        RationalFunction { num, roots, rest: r * r }.canonical()
    }

    fn lcm_parts(&self, other: &Self) -> (Vec<(C, u32)>, Poly, Poly, Poly) {
        let mut roots = self.roots.clone();
        for &(b, m) in &other.roots {
            if let Some(e) = roots.iter_mut().find(|e| same_point(e.0, b)) {
                e.1 = e.1.max(m);
            } else {
                roots.push((b, m));
            }
        }
        let cof = |f: &Self| -> Vec<(C, u32)> {
            roots.iter().map(|&(b, m)| (b, m - f.pole_order_at(b))).collect()
        };
        let mut c1 = Poly::from_roots(&cof(self));
        let mut c2 = Poly::from_roots(&cof(other));
        let one = Poly::constant(ONE);
        let rest = if self.rest == other.rest {
            self.rest.clone()
        } else if self.rest == one {
            c1 = &c1 * &other.rest;
            other.rest.clone()
        } else if other.rest == one {
            c2 = &c2 * &self.rest;
            self.rest.clone()
        } else {
            c1 = &c1 * &other.rest;
            c2 = &c2 * &self.rest;
            &self.rest * &other.rest
        };
        (roots, rest, c1, c2)
    }

    /// Quotient; the divisor's numerator joins the denominator remainder and
    /// common known roots cancel exactly.
    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(LaxError::MalformedInput("division by the zero function".into()));
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let mut roots = self.roots.clone();
        let mut extra = Vec::new();
        for &(b, m) in &other.roots {
            if let Some(e) = roots.iter_mut().find(|e| same_point(e.0, b)) {
                let c = e.1.min(m);
                e.1 -= c;
                if m > c {
                    extra.push((b, m - c));
                }
            } else {
                extra.push((b, m));
            }
        }
        let (monic, lead) = other.num.monic_trimmed()?;
        let num = (&(&self.num * &Poly::from_roots(&extra)) * &other.rest).scale(ONE / lead);
        let one = Poly::constant(ONE);
        let rest = if self.rest == one {
            monic
        } else if monic == one {
            self.rest.clone()
        } else {
            &self.rest * &monic
        };
        Ok(RationalFunction { num, roots, rest }.canonical())
    }

    /// Expands the known-root factors other than `a` times the remainder.
    fn den_without(&self, a: C) -> (u32, Poly) {
        let v = self.pole_order_at(a);
        let others: Vec<(C, u32)> =
            self.roots.iter().filter(|r| !same_point(r.0, a)).copied().collect();
        (v, &Poly::from_roots(&others) * &self.rest)
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (roots, rest, c1, c2) = self.lcm_parts(rhs);
        let num = &(&self.num * &c1) + &(&rhs.num * &c2);
        RationalFunction { num, roots, rest }.canonical()
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        self.scale(-ONE)
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        if self.is_zero() || rhs.is_zero() {
            return RationalFunction::zero();
        }
        let mut roots = self.roots.clone();
        for &(b, m) in &rhs.roots {
            if let Some(e) = roots.iter_mut().find(|e| same_point(e.0, b)) {
                e.1 += m;
            } else {
                roots.push((b, m));
            }
        }
        let one = Poly::constant(ONE);
        let rest = if rhs.rest == one {
            self.rest.clone()
        } else if self.rest == one {
            rhs.rest.clone()
        } else {
            &self.rest * &rhs.rest
        };
        RationalFunction { num: &self.num * &rhs.num, roots, rest }.canonical()
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $t:ty) => {
        impl $tr for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_binop!(Add, add, Poly);
forward_binop!(Sub, sub, Poly);
forward_binop!(Mul, mul, Poly);
forward_binop!(Add, add, RationalFunction);
forward_binop!(Sub, sub, RationalFunction);
forward_binop!(Mul, mul, RationalFunction);

impl Neg for RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        -&self
    }
}

/// Laurent coefficients of `f` at `a` for orders `k_lo..=k_hi`.
///
/// At a finite point the expansion divides the Taylor-shifted numerator by
/// the Taylor-shifted cofactor of `(λ − a)^v`; at infinity it divides the
/// reversed coefficient sequences.
pub fn laurent_slice(f: &RationalFunction, a: ExtendedPoint, k_lo: i32, k_hi: i32) -> Result<LaurentSlice> {
    if k_lo > k_hi {
        return Err(LaxError::MalformedInput(format!("empty order window [{k_lo}, {k_hi}]")));
    }
    let len = (k_hi - k_lo + 1) as usize;
    let mut coeffs = vec![ZERO; len];
    if f.is_zero() {
        return Ok(LaurentSlice { point: a, k_lo, coeffs });
    }
    match a {
        ExtendedPoint::Finite(a0) => {
            let (v, dpoly) = f.den_without(a0);
            let d = dpoly.taylor_shift(a0);
            let scale = dpoly.max_abs().max(1.0) * (1.0 + a0.norm()).powi(dpoly.coeffs.len() as i32);
            if d[0].norm() <= 1e-13 * scale {
                return Err(LaxError::Degenerate(format!(
                    "{a0} is a root of the unfactored denominator"
                )));
            }
            let n = f.num.taylor_shift(a0);
            let top = k_hi + v as i32;
            if top >= 0 {
                let h = series_div(&n, &d, top as usize + 1);
                for (i, k) in (k_lo..=k_hi).enumerate() {
                    let j = k + v as i32;
                    if j >= 0 {
                        coeffs[i] = h[j as usize];
                    }
                }
            }
        }
        ExtendedPoint::Infinity => {
            let den = f.den();
            let nd = f.num.degree().unwrap_or(0) as i32;
            let dd = den.degree().unwrap_or(0) as i32;
            let nrev: Vec<C> = f.num.coeffs.iter().rev().copied().collect();
            let drev: Vec<C> = den.coeffs.iter().rev().copied().collect();
            // f = Σ_i S_i λ^{nd − dd − i}; order k is the coefficient of λ^{−k}.
            let top = k_hi + nd - dd;
            if top >= 0 {
                let s = series_div(&nrev, &drev, top as usize + 1);
                for (i, k) in (k_lo..=k_hi).enumerate() {
                    let j = k + nd - dd;
                    if j >= 0 {
                        coeffs[i] = s[j as usize];
                    }
                }
            }
        }
    }
    Ok(LaurentSlice { point: a, k_lo, coeffs })
}

/// Residue at a finite point: the coefficient of `(λ − a)^{−1}`.
pub fn residue(f: &RationalFunction, a: C) -> Result<C> {
    Ok(laurent_slice(f, ExtendedPoint::Finite(a), -1, -1)?.coeffs[0])
}

/// Coefficient of `λ^k` in the expansion at infinity.
pub fn coeff_at_infinity(f: &RationalFunction, k: i32) -> Result<C> {
    Ok(laurent_slice(f, ExtendedPoint::Infinity, -k, -k)?.coeffs[0])
}

/// Singular part `Σ_{k≥1} F_{−k} (λ − a)^{−k}` at a known pole `a`.
pub fn singular_part(f: &RationalFunction, a: C) -> Result<RationalFunction> {
    let v = f.pole_order_at(a);
    if v == 0 {
        return Ok(RationalFunction::zero());
    }
    let sl = laurent_slice(f, ExtendedPoint::Finite(a), -(v as i32), -1)?;
    let mut num = Poly::zero();
    // sl.coeffs[i] is the coefficient of (λ − a)^{−v + i}.
    for (i, &c) in sl.coeffs.iter().enumerate() {
        num = &num + &Poly::from_roots(&[(a, i as u32)]).scale(c);
    }
    Ok(RationalFunction::from_factored(num, &[(a, v)]))
}

/// Polynomial part at infinity, constant term included.
pub fn polynomial_part_at_infinity(f: &RationalFunction) -> Result<Poly> {
    if f.is_zero() {
        return Ok(Poly::zero());
    }
    let nd = f.num.degree().unwrap_or(0) as i32;
    let dd = f.den().degree().unwrap_or(0) as i32;
    if nd < dd {
        return Ok(Poly::zero());
    }
    let sl = laurent_slice(f, ExtendedPoint::Infinity, -(nd - dd), 0)?;
    Ok(Poly::new(sl.coeffs.iter().rev().copied().collect()))
}

/// Coefficients of the decomposition `Σ_s Σ_k Q_{X_s,k} (λ − X_s)^{−k} + Σ_k Q_{∞,k} λ^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialFractions {
    /// `finite[s][k − 1] = Q_{X_s,k}` for `1 ≤ k ≤ r_s`.
    pub finite: Vec<Vec<C>>,
    /// Polynomial part at infinity.
    pub poly: Poly,
}

/// Decomposes `f` along the poles of a profile.
///
/// Every known root of `f` must be a profile pole with order at most the
/// declared one, the denominator may not carry untracked roots, and the
/// polynomial part may not exceed degree `r_∞ − 3`.
pub fn partial_fractions(f: &RationalFunction, profile: &PoleProfile) -> Result<PartialFractions> {
    if f.rest.degree() != Some(0) {
        return Err(LaxError::ProfileMismatch("denominator has untracked roots".into()));
    }
    for &(b, m) in &f.roots {
        match profile.poles.iter().find(|p| same_point(p.x, b)) {
            None => return Err(LaxError::ProfileMismatch(format!("pole at {b} is not in the profile"))),
            Some(p) if m as usize > p.r => {
                return Err(LaxError::ProfileMismatch(format!(
                    "pole at {b} has order {m} above declared {}",
                    p.r
                )))
            }
            _ => {}
        }
    }
    let mut finite = Vec::with_capacity(profile.n());
    for p in &profile.poles {
        let sl = laurent_slice(f, ExtendedPoint::Finite(p.x), -(p.r as i32), -1)?;
        finite.push(sl.coeffs.iter().rev().copied().collect());
    }
    let poly = polynomial_part_at_infinity(f)?;
    let max_deg = profile.r_inf as i64 - 3;
    let tol = 1e-9 * (1.0 + poly.max_abs());
    for (k, c) in poly.coeffs().iter().enumerate() {
        if k as i64 > max_deg && c.norm() > tol {
            return Err(LaxError::ProfileMismatch(format!(
                "polynomial part of degree {k} exceeds r_inf - 3 = {max_deg}"
            )));
        }
    }
    Ok(PartialFractions { finite, poly })
}

/// Derivative at `z0` of a function holomorphic on a neighbourhood of the
/// closed disk of radius `radius`, from the trapezoidal rule with `n` nodes
/// on the Cauchy integral. The error decays like `(radius / R)^n`, with `R`
/// the distance from `z0` to the nearest singularity.
pub fn cauchy_derivative(f: impl Fn(C) -> Result<C>, z0: C, radius: f64, n: usize) -> Result<C> {
    if radius.is_nan() || radius <= 0.0 || n == 0 {
        return Err(LaxError::MalformedInput("radius and node count must be positive".into()));
    }
    let mut acc = C::new(0.0, 0.0);
    for k in 0..n {
        let w = C::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64);
        acc += f(z0 + w * radius)? / w;
    }
    Ok(acc / (n as f64 * radius))
}

/// Sample points on the circle of radius `2 (max |pole| + 1)`, rejecting any
/// point within `1e−3` of an entry of `avoid`.
pub fn sample_lambdas(poles: &[C], avoid: &[C], count: usize, seed: u64) -> Vec<C> {
    let radius = 2.0 * (poles.iter().map(|p| p.norm()).fold(0.0, f64::max) + 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let z = C::from_polar(radius, theta);
        if poles.iter().chain(avoid).all(|p| (z - p).norm() > 1e-3) {
            out.push(z);
        }
    }
    out
}
