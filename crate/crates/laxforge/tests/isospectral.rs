mod common;

use common::{acceptance_cases, c};
use laxforge::coords::{geo_to_lax, qp_to_geo};
use laxforge::geogauge::build_geo_l_qp;
use laxforge::harness::{generate_instance, Case, Instance};
use laxforge::isospectral::*;
use laxforge::model::{free_directions, DeformationVector, Direction, Pole};
use laxforge::{LaxError, C};

fn iso_of(inst: &Instance) -> laxforge::coords::IsoCoords {
    qp_to_iso(&inst.oper, &inst.chart, &inst.profile, inst.omega).unwrap()
}

#[test]
fn finite_profile_spot_values() {
    let pm = solve_profile_finite(0, 3, &[c(0.3, 0.0), c(0.5, 0.2), c(9.0, 0.0)]).unwrap();
    let f = pm.matrix(&[c(0.3, 0.0), c(0.5, 0.2), c(9.0, 0.0)]);
    assert!((f[(0, 0)] - c(9.0, 0.0)).norm() < 1e-12);
    assert!((f[(1, 1)] - c(3.0, 0.0)).norm() < 1e-12);
    assert!((f[(1, 0)] - c(0.5, 0.2)).norm() < 1e-12);

    let t = [c(0.1, 0.0), c(0.7, -0.3), c(1.1, 0.4), c(2.0, 0.5)];
    let f = solve_profile_finite(0, 4, &t).unwrap().matrix(&t);
    assert!((f[(1, 0)] - t[2]).norm() < 1e-12);
    assert!((f[(2, 0)] - t[1]).norm() < 1e-12);
    let expected = t[2] * 0.5 * t[3].powf(-1.0 / 3.0);
    assert!((f[(2, 1)] - expected).norm() < 1e-12);

    let t = [c(0.2, 0.1), c(-1.3, 0.6)];
    let f = solve_profile_finite(0, 2, &t).unwrap().matrix(&t);
    assert_eq!(f.shape(), (1, 1));
    assert!((f[(0, 0)] - t[1]).norm() < 1e-12);
}

/// Entry `(i, j)` of the full infinity matrix in 1-based indexing, whose
/// first column multiplies `ω` and whose first two rows are constant.
fn f_inf(q: &ProfileMatrix, t: &[C], i: usize, j: usize) -> C {
    if j == 1 {
        q.shift_values(t).unwrap()[i - 2]
    } else {
        q.matrix(t)[(i - 2, j - 2)]
    }
}

/// Entry `(i, j)` of the `R` matrix at infinity in 1-based indexing.
fn g_inf(r: &ProfileMatrix, t: &[C], i: usize, j: usize) -> C {
    r.matrix(t)[(i - 1, j - 1)]
}

fn normalized_inf(r: usize) -> Vec<C> {
    let base = [c(0.3, 0.1), c(0.2, -0.4), c(0.6, 0.3), c(-0.5, 0.2), c(0.8, -0.7), c(-0.4, 0.9), c(0.7, 0.2)];
    let mut t: Vec<C> = (0..r).map(|k| base[k % base.len()] * (1.0 + 0.1 * (k / base.len()) as f64)).collect();
    t[r - 1] = c(1.0, 0.0);
    t[r - 2] = c(0.0, 0.0);
    t
}

#[test]
fn infinity_profile_spot_values() {
    let t = normalized_inf(7);
    let q = solve_profile_infinity(7, &t).unwrap();
    assert!((f_inf(&q, &t, 3, 1) - 0.75 * t[4]).norm() < 1e-12);
    for r in 5..=9 {
        let t = normalized_inf(r);
        let q = solve_profile_infinity(r, &t).unwrap();
        let rr = solve_r_profile_infinity(r, &t).unwrap();
        for k in 1..=r - 4 {
            let want = (r - 3 - k) as f64 / (r - 3) as f64 * t[r - 3];
            assert!((f_inf(&q, &t, k + 2, k) - want).norm() < 1e-12, "f r = {r}, k = {k}");
        }
        for k in 1..r.saturating_sub(4) {
            let want = (r - 4 - k) as f64 / (r - 4) as f64 * t[r - 4];
            assert!((f_inf(&q, &t, k + 3, k) - want).norm() < 1e-12, "f r = {r}, k = {k}");
        }
        for j in 1..r.saturating_sub(4) {
            let want = (r - 4 - j) as f64 / (r - 3) as f64 * t[r - 3];
            assert!((g_inf(&rr, &t, j + 2, j) - want).norm() < 1e-12, "g r = {r}, j = {j}");
        }
        for j in 1..r.saturating_sub(5) {
            let want = (r - 5 - j) as f64 / (r - 4) as f64 * t[r - 4];
            assert!((g_inf(&rr, &t, j + 3, j) - want).norm() < 1e-12, "g r = {r}, j = {j}");
        }
    }
    let rr = solve_r_profile_infinity(7, &t).unwrap();
    assert!((g_inf(&rr, &t, 3, 1) - 0.5 * t[4]).norm() < 1e-12);
}

#[test]
fn infinity_coordinates_at_zero_input() {
    let t = normalized_inf(5);
    let zero = [c(0.0, 0.0); 2];
    let q = solve_profile_infinity(5, &t).unwrap().apply(&t, &zero);
    assert!(q[0].norm() < 1e-15);
    assert!((q[1] - 0.5 * t[2]).norm() < 1e-12);
    let r = solve_r_profile_infinity(5, &t).unwrap().apply(&t, &zero);
    assert!((r[0] + t[2]).norm() < 1e-15 && (r[1] + t[1]).norm() < 1e-15);

    let t = normalized_inf(4);
    let q = solve_profile_infinity(4, &t).unwrap();
    assert_eq!(q.apply(&t, &[c(0.7, 0.1)]), vec![c(0.7, 0.1)]);
}

#[test]
fn quadratic_term_of_the_seventh_row_at_infinity() {
    // Only t[inf,4] = 1 at r = 7: the shift entry of Q[inf,0] is
    // -(r-6)/(2 (r-3)^2) = -1/32.
    let mut t = vec![c(0.0, 0.0); 7];
    t[4] = c(1.0, 0.0);
    t[6] = c(1.0, 0.0);
    let shift = solve_profile_infinity(7, &t).unwrap().shift_values(&t).unwrap();
    assert!((shift[1] - c(0.75, 0.0)).norm() < 1e-15);
    assert!((shift[3] - c(-1.0 / 32.0, 0.0)).norm() < 1e-15);
    let inst = generate_instance(&Case::new(7, &[]), 0).unwrap();
    let iso = iso_of(&inst);
    for d in free_directions(&inst.profile) {
        let alpha = DeformationVector::single(d, c(1.0, 0.0));
        let res = isospectral_residual(&iso, &alpha, &inst.chart, &inst.profile, inst.omega, 1e-6).unwrap();
        assert!(res < 1e-5, "{d:?}: {res:e}");
    }
}

#[test]
fn profiles_solve_their_systems() {
    let base = [c(0.4, 0.2), c(-0.3, 0.5), c(0.7, -0.1), c(0.2, 0.3), c(-0.6, 0.1), c(0.9, 0.4), c(1.3, -0.2)];
    for r in 2..=6 {
        let t = &base[..r];
        let pm = solve_profile_finite(0, r, t).unwrap();
        let res = ode_residual(&pm, t, 1e-5).unwrap();
        assert!(res < 1e-6, "finite r = {r}: {res:e}");
    }
    for r in 4..=8 {
        let t = normalized_inf(r);
        for pm in [solve_profile_infinity(r, &t).unwrap(), solve_r_profile_infinity(r, &t).unwrap()] {
            let res = ode_residual(&pm, &t, 1e-5).unwrap();
            assert!(res < 1e-6, "infinity r = {r} {:?}: {res:e}", pm.kind);
        }
    }
}

#[test]
fn branch_and_singular_leading_times() {
    let t = [c(0.1, 0.0), c(0.2, 0.0), c(-2.0, 0.0)];
    assert!(matches!(solve_profile_finite(0, 3, &t), Err(LaxError::BranchAmbiguity(_))));
    let t = [c(0.1, 0.0), c(0.2, 0.0), c(0.0, 0.0)];
    assert!(matches!(solve_profile_finite(0, 3, &t), Err(LaxError::Singular(_))));
    let t = [c(0.1, 0.0), c(0.2, 0.0), c(0.5, 0.0), c(2.0, 0.0)];
    assert!(matches!(solve_profile_infinity(4, &t), Err(LaxError::NormalizationConflict(_))));
}

#[test]
fn r_profiles_share_the_finite_matrices() {
    let inst = generate_instance(&Case::new(2, &[1, 3]), 3).unwrap();
    let q = solve_q_profiles(&inst.profile, &inst.chart).unwrap();
    let r = solve_r_profiles(&inst.profile, &inst.chart).unwrap();
    for (a, b) in q.finite.iter().zip(&r.finite) {
        assert_eq!(a.entries, b.entries);
        assert_eq!(a.kind, ProfileKind::Q);
        assert_eq!(b.kind, ProfileKind::R);
    }
}

#[test]
fn round_trip_through_the_lax_chart() {
    for case in acceptance_cases() {
        for seed in 0..3 {
            let inst = generate_instance(&case, seed).unwrap();
            let iso = iso_of(&inst);
            let back = iso_to_qp(&iso, &inst.chart, &inst.profile, inst.omega).unwrap();
            let err = back
                .q
                .iter()
                .zip(&back.p)
                .map(|(q, p)| {
                    let i = (0..inst.oper.q.len())
                        .min_by(|&a, &b| (inst.oper.q[a] - q).norm().total_cmp(&(inst.oper.q[b] - q).norm()))
                        .unwrap();
                    (inst.oper.q[i] - q).norm().max((inst.oper.p[i] - p).norm())
                })
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "{case} seed {seed}: {err:e}");
            let om = omega_profile(&iso.u, &inst.chart, &inst.profile, inst.omega).unwrap();
            assert!((om - inst.omega).norm() < 1e-9, "{case}: omega {om}");
        }
    }
}

#[test]
fn isospectral_condition_holds_along_every_free_time() {
    for case in acceptance_cases() {
        for seed in 0..3 {
            let inst = generate_instance(&case, seed).unwrap();
            let iso = iso_of(&inst);
            for d in free_directions(&inst.profile) {
                let alpha = DeformationVector::single(d, c(1.0, 0.0));
                let res = isospectral_residual(&iso, &alpha, &inst.chart, &inst.profile, inst.omega, 1e-6).unwrap();
                assert!(res < 1e-5, "{case} seed {seed} {d:?}: {res:e}");
            }
        }
    }
}

#[test]
fn fixed_lax_coordinates_violate_the_condition() {
    for case in [Case::new(4, &[]), Case::new(5, &[]), Case::new(3, &[2]), Case::new(1, &[3])] {
        let inst = generate_instance(&case, 1).unwrap();
        let geo = qp_to_geo(&inst.oper, inst.omega, &inst.profile).unwrap();
        let l = build_geo_l_qp(&geo, &inst.chart, &inst.profile, inst.omega).unwrap();
        let lax = geo_to_lax(&geo, inst.omega, l.g0, &inst.chart, &inst.profile);
        let family = |_: &laxforge::model::PoleProfile, _: &laxforge::model::TimeChart| Ok((lax.clone(), inst.omega));
        let worst = free_directions(&inst.profile)
            .into_iter()
            .filter(|d| matches!(d, Direction::Time(..)))
            .map(|d| {
                let alpha = DeformationVector::single(d, c(1.0, 0.0));
                lax_condition_residual(&family, &alpha, &inst.chart, &inst.profile, 1e-6).unwrap()
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-2, "{case}: {worst:e}");
    }
}

#[test]
fn omega_follows_its_profile_at_a_simple_infinity() {
    for case in [Case::new(1, &[3]), Case::new(1, &[2, 2])] {
        let inst = generate_instance(&case, 4).unwrap();
        let iso = iso_of(&inst);
        for d in free_directions(&inst.profile) {
            let Direction::Time(..) = d else { continue };
            let alpha = DeformationVector::single(d, c(1.0, 0.0));
            let h = 1e-6;
            let (_, tp) = laxforge::model::apply_deformation(&inst.profile, &inst.chart, &alpha, h);
            let (_, tm) = laxforge::model::apply_deformation(&inst.profile, &inst.chart, &alpha, -h);
            let wp = omega_profile(&iso.u, &tp, &inst.profile, inst.omega).unwrap();
            let wm = omega_profile(&iso.u, &tm, &inst.profile, inst.omega).unwrap();
            let lax = iso_to_lax(&iso, &inst.chart, &inst.profile, inst.omega).unwrap();
            let l = laxforge::geogauge::build_geo_l_qr(&lax, &inst.chart, &inst.profile, inst.omega).unwrap();
            let a = laxforge::geogauge::build_geo_a(&alpha, &lax, &l, &inst.chart, &inst.profile, inst.omega, c(0.0, 0.0))
                .unwrap();
            let expected = -inst.omega * a.nu_ext.nu_m1;
            let got = (wp - wm) / (2.0 * h);
            assert!((got - expected).norm() < 1e-6 * (1.0 + expected.norm()), "{case} {d:?}: {got} vs {expected}");
        }
    }
}

#[test]
fn twice_the_invariants_are_the_isospectral_hamiltonians() {
    for case in acceptance_cases() {
        let inst = generate_instance(&case, 2).unwrap();
        let iso = iso_of(&inst);
        for d in free_directions(&inst.profile) {
            if let Direction::Time(Pole::Inf | Pole::X(_), _) = d {
                let res = iso_hamiltonian_defect(&iso, d, &inst.chart, &inst.profile, inst.omega, 1e-6).unwrap();
                assert!(res < 1e-6, "{case} {d:?}: {res:e}");
            }
        }
    }
}

#[test]
fn zero_deformation_has_zero_residual() {
    let inst = generate_instance(&Case::new(3, &[2]), 0).unwrap();
    let iso = iso_of(&inst);
    let res = isospectral_residual(&iso, &DeformationVector::zero(), &inst.chart, &inst.profile, inst.omega, 1e-6);
    assert_eq!(res.unwrap(), 0.0);
}

#[test]
fn double_poles_rescale_the_second_coordinate() {
    let inst = generate_instance(&Case::new(2, &[2]), 5).unwrap();
    let iso = iso_of(&inst);
    let lax = iso_to_lax(&iso, &inst.chart, &inst.profile, inst.omega).unwrap();
    let t1 = inst.chart.t(Pole::X(0), 1);
    assert!((lax.q.at(0, 2) - t1 * iso.u.at(0, 2)).norm() < 1e-12);
    assert!((lax.r.at(0, 2) - t1 * iso.v.at(0, 2)).norm() < 1e-12);
    assert_eq!(lax.q.at(0, 1), iso.u.at(0, 1));
}
