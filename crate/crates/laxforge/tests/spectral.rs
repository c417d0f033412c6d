mod common;

use common::{acceptance_cases, c, chart, profile, rel};
use laxforge::coords::qp_to_geo;
use laxforge::geogauge::{build_geo_l_qp, h_from_geo, hamiltonians_geo, GeoLax};
use laxforge::harness::{generate_instance, Case, Instance};
use laxforge::model::{ExtendedPoint, Pole};
use laxforge::opergauge::{p2_finite, p2_inf};
use laxforge::ratcalc::{coeff_at_infinity, laurent_slice, sample_lambdas, Poly, RationalFunction};
use laxforge::spectral::{det_geo_l, gauge_term, ham_vs_invariants, invariants_from_det, spectral_invariants};
use laxforge::{LaxError, C};

fn geo_l(inst: &Instance) -> GeoLax {
    let geo = qp_to_geo(&inst.oper, inst.omega, &inst.profile).unwrap();
    build_geo_l_qp(&geo, &inst.chart, &inst.profile, inst.omega).unwrap()
}

fn cases() -> Vec<Case> {
    let mut out = acceptance_cases();
    out.extend([Case::new(6, &[]), Case::new(4, &[3]), Case::new(3, &[4])]);
    out
}

#[test]
fn determinant_forms_agree() {
    for case in cases() {
        for seed in 0..3 {
            let inst = generate_instance(&case, seed).unwrap();
            let l = geo_l(&inst);
            let det = det_geo_l(&l, &inst.chart, &inst.profile).unwrap();
            let zs = sample_lambdas(&inst.profile.positions(), &inst.oper.q, 20, seed);
            let e = rel(&det.projector, &det.exact, &zs);
            assert!(e < 1e-9, "{case} seed {seed}: {e:.2e}");
        }
    }
}

#[test]
fn determinant_leading_orders() {
    for case in cases() {
        let inst = generate_instance(&case, 7).unwrap();
        let (pr, ch) = (&inst.profile, &inst.chart);
        let det = det_geo_l(&geo_l(&inst), ch, pr).unwrap().exact;
        let r = pr.r_inf;
        if r >= 3 {
            let lead = coeff_at_infinity(&det, 2 * r as i32 - 4).unwrap();
            assert!((lead + ch.t(Pole::Inf, r - 1).powu(2)).norm() < 1e-9, "{case}");
        }
        for (s, p) in pr.poles.iter().enumerate() {
            let sl = laurent_slice(&det, ExtendedPoint::Finite(p.x), -2 * p.r as i32, -2 * p.r as i32).unwrap();
            assert!((sl.coeffs[0] + ch.t(Pole::X(s), p.r - 1).powu(2)).norm() < 1e-9, "{case}");
        }
        let t = |k| ch.t(Pole::Inf, k);
        match r {
            2 => {
                let v = coeff_at_infinity(&det, -1).unwrap();
                assert!((v + 2.0 * t(1) * t(0)).norm() < 1e-9, "{case}: {v}");
            }
            1 => {
                assert!(coeff_at_infinity(&det, -1).unwrap().norm() < 1e-9, "{case}");
                let v = coeff_at_infinity(&det, -2).unwrap();
                assert!((v + t(0) * t(0)).norm() < 1e-9, "{case}: {v}");
            }
            _ => {}
        }
    }
}

/// Rounding floor of `L̃_{1,1}L̃_{2,2} − L̃_{1,2}L̃_{2,1}` at `X`: both products
/// can be many orders larger than their difference when `Q` is large.
fn cancellation_floor(l: &GeoLax, x: ExtendedPoint, lo: i32) -> f64 {
    let a = laurent_slice(&(&l.l11 * &l.l22), x, lo, -1).unwrap();
    let b = laurent_slice(&(&l.l12 * &l.l21), x, lo, -1).unwrap();
    let m = a.coeffs.iter().chain(&b.coeffs).map(|v| v.norm()).fold(0.0, f64::max);
    8.0 * f64::EPSILON * m
}

#[test]
fn determinant_windows_are_time_convolutions() {
    for case in cases() {
        for seed in 0..3 {
            let inst = generate_instance(&case, seed).unwrap();
            let (pr, ch) = (&inst.profile, &inst.chart);
            let l = geo_l(&inst);
            let det = det_geo_l(&l, ch, pr).unwrap().exact;
            let r = pr.r_inf as i64;
            for k in (r - 3).max(0)..=2 * r - 4 {
                let (got, want) = (coeff_at_infinity(&det, k as i32).unwrap(), p2_inf(ch, pr, k));
                assert!((got - want).norm() < 1e-9 * (1.0 + want.norm()), "{case} seed {seed} λ^{k}");
            }
            for (s, p) in pr.poles.iter().enumerate() {
                let x = ExtendedPoint::Finite(p.x);
                let floor = cancellation_floor(&l, x, -2 * p.r as i32);
                for j in p.r + 1..=2 * p.r {
                    let got = laurent_slice(&det, x, -(j as i32), -(j as i32)).unwrap().coeffs[0];
                    let want = p2_finite(ch, pr, s, j);
                    assert!((got - want).norm() < 1e-9 * (1.0 + want.norm()) + floor, "{case} seed {seed} X{s} order {j}");
                }
            }
        }
    }
}

#[test]
fn lambda_plus_recovers_the_times() {
    for case in cases() {
        for seed in 0..3 {
            let inst = generate_instance(&case, seed).unwrap();
            let l = geo_l(&inst);
            let inv = spectral_invariants(&l, &inst.chart, &inst.profile).unwrap();
            // The sqrt recurrence divides by the leading coefficient at every
            // step, so rounding in the higher Laurent coefficients carries
            // over in proportion to their size.
            let scale = inv.expansions.values().flat_map(|sl| sl.coeffs.iter()).map(|v| v.norm()).fold(1.0, f64::max);
            let e = inv.time_mismatch(&inst.chart);
            assert!(e < 1e-8 * scale, "{case} seed {seed}: {e:.2e} at scale {scale:.1e}");
            let n_times: usize = inst.profile.r_inf + inst.profile.poles.iter().map(|p| p.r).sum::<usize>();
            assert_eq!(inv.recovered_times.len(), n_times);
        }
    }
}

#[test]
fn lambda_plus_squares_to_minus_det() {
    for case in cases() {
        let inst = generate_instance(&case, 4).unwrap();
        let l = geo_l(&inst);
        let minus_det = -(&(&l.l11 * &l.l22) - &(&l.l12 * &l.l21));
        let inv = spectral_invariants(&l, &inst.chart, &inst.profile).unwrap();
        for (pole, sl) in &inv.expansions {
            let n = sl.coeffs.len();
            let want = laurent_slice(&minus_det, sl.point, 2 * sl.k_lo, 2 * sl.k_lo + n as i32 - 1).unwrap();
            for k in 0..n {
                let sq: C = (0..=k).map(|i| sl.coeffs[i] * sl.coeffs[k - i]).sum();
                let w = want.coeffs[k];
                assert!((sq - w).norm() < 1e-9 * (1.0 + w.norm()), "{case} {pole:?} order {k}");
            }
        }
    }
}

#[test]
fn perfect_square_has_zero_invariants() {
    let pr = profile(4, &[]);
    let ch = chart(&pr, &[c(0.3, -0.2), c(1.1, 0.4)], &[]);
    let t = |k| ch.t(Pole::Inf, k);
    // λ₊ = (t3 λ³ + t2 λ² + t1 λ + t0) / λ.
    let lp = RationalFunction::from_factored(Poly::new(vec![t(0), t(1), t(2), t(3)]), &[(c(0.0, 0.0), 1)]);
    let inv = invariants_from_det(&(&lp * &lp), &ch, &pr).unwrap();
    assert!(inv.invariants.values().all(|v| v.norm() < 1e-14), "{:?}", inv.invariants);
    assert!(inv.time_mismatch(&ch) < 1e-14);
}

#[test]
fn vanishing_leading_coefficient_is_a_branch_error() {
    let pr = profile(4, &[]);
    let ch = chart(&pr, &[c(0.3, 0.0), c(1.0, 0.0)], &[]);
    let r = invariants_from_det(&RationalFunction::constant(c(1.0, 0.0)), &ch, &pr);
    assert!(matches!(r, Err(LaxError::BranchAmbiguity(_))));
}

#[test]
fn finite_pole_relation_between_h_and_invariants() {
    for case in cases() {
        for seed in 0..3 {
            let inst = generate_instance(&case, seed).unwrap();
            let (pr, ch) = (&inst.profile, &inst.chart);
            let l = geo_l(&inst);
            let inv = spectral_invariants(&l, ch, pr).unwrap();
            let h = h_from_geo(&l, pr).unwrap();
            let f = gauge_term(&l).unwrap();
            for (s, p) in pr.poles.iter().enumerate() {
                let pole = Pole::X(s);
                let t = |j: usize| ch.t(pole, j);
                let floor = cancellation_floor(&l, ExtendedPoint::Finite(p.x), -2 * p.r as i32);
                for k in 2..=p.r {
                    let res = laurent_slice(&f, ExtendedPoint::Finite(p.x), -(k as i32), -(k as i32)).unwrap().coeffs[0];
                    let conv: C = (0..=k - 2).map(|j| t(j) * t(k - 2 - j)).sum();
                    let from_inv: Vec<C> = (1..=p.r + 1 - k).map(|j| 2.0 * j as f64 * inv.invariants[&(pole, j)] * t(k + j - 2)).collect();
                    let want = h.at(s, k);
                    let got = res + conv + from_inv.iter().sum::<C>();
                    let scale = from_inv.iter().chain([&res, &conv, &want]).map(|v| v.norm()).fold(1.0, f64::max);
                    let err = (got - want).norm();
                    assert!(err < 1e-8 * scale + floor, "{case} seed {seed} X{s} k={k}: {err:.2e} at scale {scale:.1e}");
                }
            }
        }
    }
}

#[test]
fn hamiltonians_match_invariants_up_to_the_gauge_term() {
    for case in cases() {
        for seed in 0..3 {
            let inst = generate_instance(&case, seed).unwrap();
            let (pr, ch) = (&inst.profile, &inst.chart);
            let geo = qp_to_geo(&inst.oper, inst.omega, pr).unwrap();
            let l = build_geo_l_qp(&geo, ch, pr, inst.omega).unwrap();
            let ham = hamiltonians_geo(&geo, ch, pr, inst.omega).unwrap();
            let rep = ham_vs_invariants(&l, &ham, ch, pr).unwrap();
            let n_times = ham.keys().filter(|d| matches!(d, laxforge::model::Direction::Time(..))).count();
            assert_eq!(rep.entries.len(), n_times, "{case}");
            let e = rep.max_discrepancy();
            assert!(e < 1e-8, "{case} seed {seed}: {e:.2e} {:?}", rep.entries);
        }
    }
}



