#![allow(dead_code)]

use laxforge::harness::Case;
use laxforge::model::{normalize, FinitePole, Pole, PoleProfile, TimeChart};
use laxforge::ratcalc::RationalFunction;
use laxforge::C;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn acceptance_cases() -> Vec<Case> {
    vec![
        Case::new(4, &[]),
        Case::new(5, &[]),
        Case::new(3, &[2]),
        Case::new(3, &[1, 1]),
        Case::new(2, &[2]),
        Case::new(2, &[1, 2]),
        Case::new(1, &[3]),
        Case::new(1, &[2, 2]),
    ]
}

/// Largest `|a − b| / (1 + |b|)` over the points.
pub fn rel(a: &RationalFunction, b: &RationalFunction, zs: &[C]) -> f64 {
    zs.iter()
        .map(|&z| {
            let (x, y) = (a.eval(z), b.eval(z));
            (x - y).norm() / (1.0 + y.norm())
        })
        .fold(0.0, f64::max)
}

/// Profile with the given positions and orders.
pub fn profile(r_inf: usize, poles: &[(C, usize)]) -> PoleProfile {
    PoleProfile::new(r_inf, poles.iter().map(|&(x, r)| FinitePole { x, r }).collect()).unwrap()
}

/// Normalized chart with `inf` and `finite` times, frozen entries set by
/// the normalization.
pub fn chart(profile: &PoleProfile, inf: &[C], finite: &[Vec<C>]) -> TimeChart {
    let mut raw = TimeChart::zeros(profile);
    for (k, &t) in inf.iter().enumerate() {
        *raw.t_mut(Pole::Inf, k) = t;
    }
    for (s, ts) in finite.iter().enumerate() {
        for (k, &t) in ts.iter().enumerate() {
            *raw.t_mut(Pole::X(s), k) = t;
        }
    }
    normalize(profile, &raw).unwrap()
}
