//! Problem setup: pole profiles, time charts, deformation vectors and genus.
//!
//! A connection is described by the pole set `{∞, X_1, …, X_n}` with orders
//! `(r_∞, r_1, …, r_n)`. Each pole `p` carries times `t_{p,k}` for
//! `0 ≤ k ≤ r_p − 1`; `t_{p,0}` is the monodromy and the others are
//! irregular times. Some times and positions are frozen by the
//! normalization at infinity, and deformations along them are rejected.
//!
//! # Invariants
//! - Finite pole positions are pairwise distinct.
//! - A normalized chart satisfies the case-dependent frozen values listed in
//!   [`frozen_directions`].

use std::collections::{BTreeMap, BTreeSet};

use crate::{LaxError, Result, C};

/// A point of the Riemann sphere: finite or infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedPoint {
    /// A point of the complex plane.
    Finite(C),
    /// The point at infinity.
    Infinity,
}

/// A finite pole `X_s` of order `r_s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FinitePole {
    /// Position `X_s`.
    pub x: C,
    /// Pole order `r_s ≥ 1`.
    pub r: usize,
}

/// The set of poles with their orders.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleProfile {
    /// Order of the pole at infinity.
    pub r_inf: usize,
    /// Finite poles in their fixed order.
    pub poles: Vec<FinitePole>,
}

/// Label of a pole: infinity or the finite pole with index `s` (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pole {
    /// The pole at infinity.
    Inf,
    /// The finite pole `X_{s+1}`.
    X(usize),
}

/// A deformation direction: a time `t_{p,k}` with `k ≥ 1` or a position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// The time `t_{p,k}`.
    Time(Pole, usize),
    /// The position `X_{s+1}`.
    Position(usize),
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Time(Pole::Inf, k) => write!(f, "t[inf,{k}]"),
            Direction::Time(Pole::X(s), k) => write!(f, "t[X{},{k}]", s + 1),
            Direction::Position(s) => write!(f, "X{}", s + 1),
        }
    }
}

impl PoleProfile {
    /// Builds a profile after checking orders, distinct positions and genus.
    pub fn new(r_inf: usize, poles: Vec<FinitePole>) -> Result<Self> {
        if r_inf == 0 {
            return Err(LaxError::UnsupportedProfile("r_inf must be at least 1".into()));
        }
        if let Some(p) = poles.iter().find(|p| p.r == 0) {
            return Err(LaxError::UnsupportedProfile(format!("pole at {} has order 0", p.x)));
        }
        for i in 0..poles.len() {
            for j in 0..i {
                if (poles[i].x - poles[j].x).norm() < 1e-12 {
                    return Err(LaxError::Degenerate(format!(
                        "poles {} and {} coincide",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        let profile = PoleProfile { r_inf, poles };
        genus(&profile)?;
        Ok(profile)
    }

    /// Number of finite poles.
    pub fn n(&self) -> usize {
        self.poles.len()
    }

    /// Order of pole `p`.
    pub fn order(&self, p: Pole) -> usize {
        match p {
            Pole::Inf => self.r_inf,
            Pole::X(s) => self.poles[s].r,
        }
    }

    /// Total order `r = r_∞ + Σ r_s`.
    pub fn total_order(&self) -> usize {
        self.r_inf + self.poles.iter().map(|p| p.r).sum::<usize>()
    }

    /// Genus `g = r_∞ − 3 + Σ r_s` as a signed integer.
    pub fn genus_signed(&self) -> i64 {
        self.total_order() as i64 - 3
    }

    /// Genus; callers rely on the constructor having checked `g ≥ 1`.
    pub fn genus(&self) -> usize {
        self.genus_signed().max(0) as usize
    }

    /// Positions `X_s`.
    pub fn positions(&self) -> Vec<C> {
        self.poles.iter().map(|p| p.x).collect()
    }

    /// Copy with position `s` moved by `dx`.
    pub fn shifted(&self, s: usize, dx: C) -> Self {
        let mut out = self.clone();
        out.poles[s].x += dx;
        out
    }

    /// Number of coordinates `Q` in the geometric chart:
    /// `g`, `g + 1` or `g + 2` for `r_∞ ≥ 3`, `= 2`, `= 1`.
    pub fn geo_chart_size(&self) -> usize {
        self.genus() + self.constraint_count() / 2
    }

    /// Number of chart constraints: 0, 2 or 4 for `r_∞ ≥ 3`, `= 2`, `= 1`.
    pub fn constraint_count(&self) -> usize {
        match self.r_inf {
            1 => 4,
            2 => 2,
            _ => 0,
        }
    }
}

/// Genus `g = r_∞ − 3 + Σ r_s`, rejected below one.
pub fn genus(profile: &PoleProfile) -> Result<usize> {
    let g = profile.genus_signed();
    if g < 1 {
        return Err(LaxError::UnsupportedProfile(format!("genus {g} is below 1")));
    }
    Ok(g as usize)
}

/// Dimension bookkeeping for the space of connections.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dimensions {
    /// Total order `r`.
    pub r: usize,
    /// Genus `g`.
    pub genus: usize,
    /// `4r − 7`.
    pub dim_space: usize,
    /// Symplectic leaf dimension `2g`.
    pub dim_leaf: usize,
    /// Number of spectral parameters `t_{p,k}`, `0 ≤ k ≤ r_p − 1`, which is `r`.
    pub n_spectral: usize,
    /// Remaining Casimir directions `r − 1`.
    pub n_casimir: usize,
}

impl Dimensions {
    /// Checks `4r − 7 = 2g + r + (r − 1)` and `2g = 2r − 6`.
    pub fn is_consistent(&self) -> bool {
        self.dim_space == self.dim_leaf + self.n_spectral + self.n_casimir
            && self.dim_leaf + 6 == 2 * self.r
    }
}

/// Dimension report for a profile.
pub fn dimensions(profile: &PoleProfile) -> Result<Dimensions> {
    let g = genus(profile)?;
    let r = profile.total_order();
    Ok(Dimensions {
        r,
        genus: g,
        dim_space: 4 * r - 7,
        dim_leaf: 2 * g,
        n_spectral: r,
        n_casimir: r - 1,
    })
}

/// Times `t_{p,k}` for every pole, with the set of frozen directions.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeChart {
    /// `t_{∞,k}` for `0 ≤ k ≤ r_∞ − 1`.
    pub inf: Vec<C>,
    /// `t_{X_s,k}` for `0 ≤ k ≤ r_s − 1`.
    pub finite: Vec<Vec<C>>,
    /// Directions fixed by the normalization.
    pub frozen: BTreeSet<Direction>,
}

impl TimeChart {
    /// All times zero, nothing frozen.
    pub fn zeros(profile: &PoleProfile) -> Self {
        TimeChart {
            inf: vec![C::new(0.0, 0.0); profile.r_inf],
            finite: profile.poles.iter().map(|p| vec![C::new(0.0, 0.0); p.r]).collect(),
            frozen: BTreeSet::new(),
        }
    }

    /// Time `t_{p,k}`; zero when `k` is beyond the pole order.
    pub fn t(&self, p: Pole, k: usize) -> C {
        let v = match p {
            Pole::Inf => &self.inf,
            Pole::X(s) => &self.finite[s],
        };
        v.get(k).copied().unwrap_or(C::new(0.0, 0.0))
    }

    /// Mutable access to `t_{p,k}`.
    pub fn t_mut(&mut self, p: Pole, k: usize) -> &mut C {
        match p {
            Pole::Inf => &mut self.inf[k],
            Pole::X(s) => &mut self.finite[s][k],
        }
    }

    /// Times at pole `p` as a slice indexed by `k`.
    pub fn at(&self, p: Pole) -> &[C] {
        match p {
            Pole::Inf => &self.inf,
            Pole::X(s) => &self.finite[s],
        }
    }
}

/// Directions frozen by the normalization for this profile.
///
/// - `r_∞ ≥ 3`: `t_{∞,r_∞−1} = 1`, `t_{∞,r_∞−2} = 0`.
/// - `r_∞ = 2`: `t_{∞,1} = 1` and `X_1 = 0`.
/// - `r_∞ = 1`, `n ≥ 2`: `X_1 = 0`, `X_2 = 1`.
/// - `r_∞ = 1`, `n = 1`: `X_1 = 0` and `t_{X_1,r_1−1} = 1`.
pub fn frozen_directions(profile: &PoleProfile) -> BTreeSet<Direction> {
    let mut out = BTreeSet::new();
    let r = profile.r_inf;
    match r {
        1 => {
            if profile.n() >= 2 {
                out.insert(Direction::Position(0));
                out.insert(Direction::Position(1));
            } else if profile.n() == 1 {
                out.insert(Direction::Position(0));
                let r1 = profile.poles[0].r;
                if r1 >= 2 {
                    out.insert(Direction::Time(Pole::X(0), r1 - 1));
                }
            }
        }
        2 => {
            out.insert(Direction::Time(Pole::Inf, 1));
            if profile.n() >= 1 {
                out.insert(Direction::Position(0));
            }
        }
        _ => {
            out.insert(Direction::Time(Pole::Inf, r - 1));
            out.insert(Direction::Time(Pole::Inf, r - 2));
        }
    }
    out
}

/// All deformation directions of the profile, frozen or not.
pub fn all_directions(profile: &PoleProfile) -> Vec<Direction> {
    let mut out = Vec::new();
    for k in 1..profile.r_inf {
        out.push(Direction::Time(Pole::Inf, k));
    }
    for (s, p) in profile.poles.iter().enumerate() {
        for k in 1..p.r {
            out.push(Direction::Time(Pole::X(s), k));
        }
    }
    for s in 0..profile.n() {
        out.push(Direction::Position(s));
    }
    out
}

/// Unfrozen (isomonodromic) directions of the profile.
pub fn free_directions(profile: &PoleProfile) -> Vec<Direction> {
    let frozen = frozen_directions(profile);
    all_directions(profile).into_iter().filter(|d| !frozen.contains(d)).collect()
}

/// Value a frozen time must take, if the direction is a frozen time.
fn frozen_time_value(profile: &PoleProfile, d: Direction) -> Option<f64> {
    match d {
        Direction::Time(Pole::Inf, k) if profile.r_inf >= 3 => {
            if k == profile.r_inf - 1 {
                Some(1.0)
            } else {
                Some(0.0)
            }
        }
        Direction::Time(_, _) => Some(1.0),
        Direction::Position(_) => None,
    }
}

/// Enforces the frozen values of the normalization.
///
/// A frozen time left at zero is set to its normalized value; any other
/// value that differs from it is a conflict. Frozen positions must already
/// hold their normalized values (`X_1 = 0`, and `X_2 = 1` when `r_∞ = 1`).
pub fn normalize(profile: &PoleProfile, raw: &TimeChart) -> Result<TimeChart> {
    check_shape(profile, raw)?;
    let mut out = raw.clone();
    let frozen = frozen_directions(profile);
    for d in &frozen {
        match *d {
            Direction::Time(p, k) => {
                let want = C::new(frozen_time_value(profile, *d).unwrap_or(0.0), 0.0);
                let have = raw.t(p, k);
                if have != want && have != C::new(0.0, 0.0) {
                    return Err(LaxError::NormalizationConflict(format!(
                        "{d} is frozen to {want} but {have} was supplied"
                    )));
                }
                *out.t_mut(p, k) = want;
            }
            Direction::Position(s) => {
                let want = if s == 0 { 0.0 } else { 1.0 };
                if (profile.poles[s].x - C::new(want, 0.0)).norm() > 1e-14 {
                    return Err(LaxError::NormalizationConflict(format!(
                        "position X{} must be {want}",
                        s + 1
                    )));
                }
            }
        }
    }
    for p in 0..profile.n() {
        let r = profile.poles[p].r;
        if r >= 2 && out.finite[p][r - 1].norm() == 0.0 {
            return Err(LaxError::Singular(format!("t[X{},{}] vanishes", p + 1, r - 1)));
        }
    }
    out.frozen = frozen;
    Ok(out)
}

fn check_shape(profile: &PoleProfile, chart: &TimeChart) -> Result<()> {
    if chart.inf.len() != profile.r_inf
        || chart.finite.len() != profile.n()
        || chart.finite.iter().zip(&profile.poles).any(|(t, p)| t.len() != p.r)
    {
        return Err(LaxError::MalformedInput("time chart shape does not match profile".into()));
    }
    Ok(())
}

/// Normalization constants `ω` and `g_0` of the geometric gauge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormConstant {
    /// Subleading upper-right coefficient at infinity.
    pub omega: C,
    /// Constant `g_0` of the gauge transformation.
    pub g0: C,
}

/// Coefficients `α` of a general deformation operator.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DeformationVector {
    /// Nonzero entries.
    pub alpha: BTreeMap<Direction, C>,
}

impl DeformationVector {
    /// The zero deformation.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Deformation along a single direction.
    pub fn single(d: Direction, c: C) -> Self {
        let mut alpha = BTreeMap::new();
        alpha.insert(d, c);
        DeformationVector { alpha }
    }

    /// Coefficient along `d`.
    pub fn get(&self, d: Direction) -> C {
        self.alpha.get(&d).copied().unwrap_or(C::new(0.0, 0.0))
    }

    /// `α_{p,k}`.
    pub fn time(&self, p: Pole, k: usize) -> C {
        self.get(Direction::Time(p, k))
    }

    /// `α_{X_s}`.
    pub fn position(&self, s: usize) -> C {
        self.get(Direction::Position(s))
    }

    /// Rejects directions that are frozen or outside the profile.
    pub fn validate(&self, profile: &PoleProfile) -> Result<()> {
        let all: BTreeSet<Direction> = all_directions(profile).into_iter().collect();
        let frozen = frozen_directions(profile);
        for (d, v) in &self.alpha {
            if *v == C::new(0.0, 0.0) {
                continue;
            }
            if !all.contains(d) {
                return Err(LaxError::MalformedInput(format!("{d} is not a direction of the profile")));
            }
            if frozen.contains(d) {
                return Err(LaxError::FrozenDirection(format!("{d} is frozen")));
            }
        }
        Ok(())
    }
}

/// Moves times and positions by `h·α`.
pub fn apply_deformation(
    profile: &PoleProfile,
    chart: &TimeChart,
    alpha: &DeformationVector,
    h: f64,
) -> (PoleProfile, TimeChart) {
    let mut p = profile.clone();
    let mut t = chart.clone();
    for (d, v) in &alpha.alpha {
        match *d {
            Direction::Time(pole, k) => *t.t_mut(pole, k) += *v * h,
            Direction::Position(s) => p.poles[s].x += *v * h,
        }
    }
    (p, t)
}

/// Coefficients indexed like the geometric coordinates: `inf[k]` holds the
/// entry `(∞, k)` for `0 ≤ k ≤ r_∞ − 4` and `finite[s][k − 1]` holds the
/// entry `(X_s, k)` for `1 ≤ k ≤ r_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleVector {
    /// Entries at infinity.
    pub inf: Vec<C>,
    /// Entries at the finite poles.
    pub finite: Vec<Vec<C>>,
}

impl PoleVector {
    /// All entries zero, shaped after the profile.
    pub fn zeros(profile: &PoleProfile) -> Self {
        PoleVector {
            inf: vec![C::new(0.0, 0.0); profile.r_inf.saturating_sub(3)],
            finite: profile.poles.iter().map(|p| vec![C::new(0.0, 0.0); p.r]).collect(),
        }
    }

    /// Number of entries.
    pub fn len(&self) -> usize {
        self.inf.len() + self.finite.iter().map(Vec::len).sum::<usize>()
    }

    /// True when there are no entries.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries in the order `inf` then `finite[0]`, `finite[1]`, ….
    pub fn flatten(&self) -> Vec<C> {
        let mut out = self.inf.clone();
        for f in &self.finite {
            out.extend_from_slice(f);
        }
        out
    }

    /// Inverse of [`PoleVector::flatten`].
    pub fn from_flat(profile: &PoleProfile, flat: &[C]) -> Result<Self> {
        let mut out = Self::zeros(profile);
        if flat.len() != out.len() {
            return Err(LaxError::MalformedInput(format!(
                "expected {} entries, got {}",
                out.len(),
                flat.len()
            )));
        }
        let mut it = flat.iter().copied();
        for x in out.inf.iter_mut().chain(out.finite.iter_mut().flatten()) {
            *x = it.next().unwrap_or_default();
        }
        Ok(out)
    }

    /// Entry `(∞, k)`, zero outside `0 ≤ k ≤ r_∞ − 4`.
    pub fn at_inf(&self, k: i64) -> C {
        if k < 0 {
            return C::new(0.0, 0.0);
        }
        self.inf.get(k as usize).copied().unwrap_or_default()
    }

    /// Entry `(X_s, k)`, zero outside `1 ≤ k ≤ r_s`.
    pub fn at(&self, s: usize, k: usize) -> C {
        if k == 0 {
            return C::new(0.0, 0.0);
        }
        self.finite[s].get(k - 1).copied().unwrap_or_default()
    }

    /// Labels matching [`PoleVector::flatten`].
    pub fn labels(profile: &PoleProfile) -> Vec<(Pole, usize)> {
        let mut out: Vec<(Pole, usize)> = (0..profile.r_inf.saturating_sub(3)).map(|k| (Pole::Inf, k)).collect();
        for (s, p) in profile.poles.iter().enumerate() {
            out.extend((1..=p.r).map(|k| (Pole::X(s), k)));
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.flatten().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}
