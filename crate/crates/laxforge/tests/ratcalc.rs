use laxforge::model::{ExtendedPoint, FinitePole, PoleProfile};
use laxforge::ratcalc::{
    cauchy_derivative, laurent_slice, partial_fractions, polynomial_part_at_infinity, rel_err, residue, sample_lambdas,
    singular_part, Poly, RationalFunction,
};
use laxforge::C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn lam() -> RationalFunction {
    RationalFunction::from_poly(Poly::new(vec![c(0.0), c(1.0)]))
}

fn close(a: C, b: C, tol: f64) -> bool {
    rel_err(a, b) < tol
}

fn rand_c(rng: &mut ChaCha8Rng) -> C {
    C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random rational function with poles at `xs` of the given orders plus a
/// polynomial part of degree `deg`.
fn random_rf(rng: &mut ChaCha8Rng, xs: &[(C, u32)], deg: usize) -> RationalFunction {
    let mut f = RationalFunction::from_poly(Poly::new((0..=deg).map(|_| rand_c(rng)).collect()));
    for &(x, r) in xs {
        for k in 1..=r {
            f = &f + &RationalFunction::pole(rand_c(rng), x, k);
        }
    }
    f
}

#[test]
fn slice_double_pole() {
    let f = RationalFunction::pole(c(1.0), c(2.0), 2);
    let s = laurent_slice(&f, ExtendedPoint::Finite(c(2.0)), -3, 0).unwrap();
    assert_eq!(s.coeffs.len(), 4);
    for (got, want) in s.coeffs.iter().zip([0.0, 1.0, 0.0, 0.0]) {
        assert!(close(*got, c(want), 1e-14));
    }
}

#[test]
fn slice_lambda_over_double_pole() {
    let f = &lam() * &RationalFunction::pole(c(1.0), c(1.0), 2);
    let s = laurent_slice(&f, ExtendedPoint::Finite(c(1.0)), -2, -1).unwrap();
    assert!(close(s.at(-2), c(1.0), 1e-14));
    assert!(close(s.at(-1), c(1.0), 1e-14));
}

#[test]
fn slice_at_infinity_long_division() {
    let f = RationalFunction::from_factored(Poly::monomial(c(1.0), 3), &[(c(1.0), 1)]);
    let s = laurent_slice(&f, ExtendedPoint::Infinity, -2, 0).unwrap();
    for k in -2..=0 {
        assert!(close(s.at(k), c(1.0), 1e-14));
    }
    // Next orders of λ³/(λ−1) = λ² + λ + 1 + 1/λ + 1/λ² + …
    let s = laurent_slice(&f, ExtendedPoint::Infinity, 1, 3).unwrap();
    for k in 1..=3 {
        assert!(close(s.at(k), c(1.0), 1e-14));
    }
}

#[test]
fn zero_denominator_is_rejected() {
    assert!(RationalFunction::new(Poly::constant(c(1.0)), Poly::zero()).is_err());
}

#[test]
fn singular_part_examples() {
    let f = &RationalFunction::pole(c(1.0), c(2.0), 1) + &RationalFunction::monomial(c(1.0), 2);
    let sp = singular_part(&f, c(2.0)).unwrap();
    let want = RationalFunction::pole(c(1.0), c(2.0), 1);
    for z in [C::new(0.3, 0.7), C::new(-1.0, 2.0)] {
        assert!(close(sp.eval(z), want.eval(z), 1e-13));
    }

    let f = &lam() * &RationalFunction::pole(c(1.0), c(1.0), 2);
    let sp = singular_part(&f, c(1.0)).unwrap();
    let want = &RationalFunction::pole(c(1.0), c(1.0), 2) + &RationalFunction::pole(c(1.0), c(1.0), 1);
    for z in [C::new(0.3, 0.7), C::new(-1.0, 2.0)] {
        assert!(close(sp.eval(z), want.eval(z), 1e-13));
    }

    let f = RationalFunction::from_poly(Poly::new(vec![c(3.0), c(0.0), c(1.0)]));
    assert!(singular_part(&f, c(0.0)).unwrap().is_zero());
}

#[test]
fn polynomial_part_examples() {
    let f = RationalFunction::from_factored(Poly::monomial(c(1.0), 3), &[(c(1.0), 1)]);
    let p = polynomial_part_at_infinity(&f).unwrap();
    assert_eq!(p.degree(), Some(2));
    for k in 0..3 {
        assert!(close(p.coeff(k), c(1.0), 1e-14));
    }
    let f = RationalFunction::pole(c(1.0), c(0.0), 1);
    assert!(polynomial_part_at_infinity(&f).unwrap().is_zero());
    let f = RationalFunction::constant(c(3.0));
    let p = polynomial_part_at_infinity(&f).unwrap();
    assert_eq!(p.degree(), Some(0));
    assert!(close(p.coeff(0), c(3.0), 1e-15));
}

#[test]
fn partial_fraction_examples() {
    let profile = PoleProfile::new(3, vec![FinitePole { x: c(0.0), r: 2 }]).unwrap();
    let num = Poly::from_roots(&[(c(1.0), 1), (c(2.0), 1)]);
    let f = RationalFunction::from_factored(num, &[(c(0.0), 2)]);
    let pf = partial_fractions(&f, &profile).unwrap();
    assert!(close(pf.finite[0][0], c(-3.0), 1e-14));
    assert!(close(pf.finite[0][1], c(2.0), 1e-14));
    assert!(close(pf.poly.coeff(0), c(1.0), 1e-14));

    let pf = partial_fractions(&RationalFunction::zero(), &profile).unwrap();
    assert!(pf.finite[0].iter().all(|x| x.norm() == 0.0));
    assert!(pf.poly.is_zero());

    let profile = PoleProfile::new(1, vec![FinitePole { x: c(5.0), r: 1 }, FinitePole { x: c(0.0), r: 2 }])
        .unwrap();
    let f = RationalFunction::pole(c(1.0), c(5.0), 1);
    let pf = partial_fractions(&f, &profile).unwrap();
    assert!(close(pf.finite[0][0], c(1.0), 1e-14));
}

#[test]
fn partial_fractions_rejects_foreign_or_excess_poles() {
    let profile = PoleProfile::new(4, vec![FinitePole { x: c(0.0), r: 1 }]).unwrap();
    let f = RationalFunction::pole(c(1.0), c(3.0), 1);
    assert!(partial_fractions(&f, &profile).is_err());
    let f = RationalFunction::pole(c(1.0), c(0.0), 2);
    assert!(partial_fractions(&f, &profile).is_err());
    let f = RationalFunction::monomial(c(1.0), 2);
    assert!(partial_fractions(&f, &profile).is_err());
}

#[test]
fn reconstruction_from_projectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let xs = [(rand_c(&mut rng), 3u32), (rand_c(&mut rng) + c(3.0), 2u32)];
        let f = random_rf(&mut rng, &xs, 3);
        // Multiply and divide to exercise canonicalization paths.
        let g = &f * &RationalFunction::pole(c(1.0), xs[0].0, 1);
        let g = &g * &RationalFunction::from_poly(Poly::from_roots(&[(xs[0].0, 1)]));
        let mut rebuilt = RationalFunction::from_poly(polynomial_part_at_infinity(&g).unwrap());
        for &(x, _) in &xs {
            rebuilt = &rebuilt + &singular_part(&g, x).unwrap();
        }
        let poles: Vec<C> = xs.iter().map(|p| p.0).collect();
        for z in sample_lambdas(&poles, &[], 20, 5) {
            assert!(close(rebuilt.eval(z), f.eval(z), 1e-10));
        }
    }
}

#[test]
fn projectors_are_linear_and_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x = C::new(0.4, -0.2);
    for _ in 0..10 {
        let f = random_rf(&mut rng, &[(x, 3), (c(2.0), 1)], 2);
        let g = random_rf(&mut rng, &[(x, 2), (c(-2.0), 2)], 4);
        let a = rand_c(&mut rng);
        let lhs = singular_part(&(&f + &g.scale(a)), x).unwrap();
        let rhs = &singular_part(&f, x).unwrap() + &singular_part(&g, x).unwrap().scale(a);
        let lp = polynomial_part_at_infinity(&(&f + &g.scale(a))).unwrap();
        let rp = &polynomial_part_at_infinity(&f).unwrap()
            + &polynomial_part_at_infinity(&g).unwrap().scale(a);
        let twice = singular_part(&singular_part(&f, x).unwrap(), x).unwrap();
        let once = singular_part(&f, x).unwrap();
        for z in sample_lambdas(&[x], &[], 10, 3) {
            assert!(close(lhs.eval(z), rhs.eval(z), 1e-12));
            assert!(close(lp.eval(z), rp.eval(z), 1e-12));
            assert!(close(twice.eval(z), once.eval(z), 1e-13));
        }
    }
}

#[test]
fn simple_pole_residue_matches_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let a = rand_c(&mut rng);
        let b = rand_c(&mut rng) + c(3.0);
        let num = Poly::new((0..4).map(|_| rand_c(&mut rng)).collect());
        let f = RationalFunction::from_factored(num.clone(), &[(a, 1), (b, 2)]);
        let limit = num.eval(a) / (a - b).powu(2);
        assert!(close(residue(&f, a).unwrap(), limit, 1e-12));
    }
}

#[test]
fn arithmetic_matches_pointwise_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let x = C::new(-0.5, 0.5);
    for _ in 0..10 {
        let f = random_rf(&mut rng, &[(x, 2)], 2);
        let g = random_rf(&mut rng, &[(x, 1), (c(1.5), 2)], 1);
        let q = f.checked_div(&g).unwrap();
        let df = f.derivative();
        let dq = q.derivative();
        for z in sample_lambdas(&[x, c(1.5)], &[], 10, 7) {
            assert!(close((&f * &g).eval(z), f.eval(z) * g.eval(z), 1e-12));
            assert!(close((&f - &g).eval(z), f.eval(z) - g.eval(z), 1e-12));
            assert!(close(q.eval(z), f.eval(z) / g.eval(z), 1e-11));
            let h = 1e-5;
            let fd = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
            assert!(close(df.eval(z), fd, 1e-8));
            let fdq = (q.eval(z + h) - q.eval(z - h)) / (2.0 * h);
            assert!(close(dq.eval(z), fdq, 1e-7));
        }
    }
}

#[test]
fn quotient_cancels_shared_poles() {
    let x = c(0.0);
    let f = RationalFunction::from_factored(Poly::new(vec![c(1.0), c(2.0)]), &[(x, 3)]);
    let g = RationalFunction::from_factored(Poly::new(vec![c(-1.0), c(1.0)]), &[(x, 3)]);
    let q = f.checked_div(&g).unwrap();
    assert_eq!(q.pole_order_at(x), 0);
    let s = laurent_slice(&q, ExtendedPoint::Finite(x), -1, 0).unwrap();
    assert!(s.at(-1).norm() < 1e-15);
    assert!(close(s.at(0), c(-1.0), 1e-14));
}

#[test]
fn taylor_shift_roundtrip() {
    let p = Poly::new(vec![c(1.0), c(-2.0), c(0.5), c(3.0)]);
    let a = C::new(0.3, -1.1);
    let shifted = p.taylor_shift(a);
    let q = Poly::new(shifted);
    for z in [C::new(0.1, 0.2), C::new(2.0, -1.0)] {
        assert!(close(q.eval(z - a), p.eval(z), 1e-13));
    }
}

#[test]
fn samples_avoid_poles() {
    let poles = [c(0.0), c(1.0)];
    let s = sample_lambdas(&poles, &[C::new(4.0, 0.0)], 20, 1);
    assert_eq!(s.len(), 20);
    for z in &s {
        assert!((z.norm() - 4.0).abs() < 1e-12);
        assert!((z - C::new(4.0, 0.0)).norm() > 1e-3);
    }
}

#[test]
fn cauchy_derivative_of_a_rational_function() {
    let f = RationalFunction::new(Poly::new(vec![c(1.0), c(0.0), c(2.0)]), Poly::new(vec![c(-1.0), c(1.0)])).unwrap();
    let z0 = C::new(0.4, 0.3);
    let d = cauchy_derivative(|z| Ok(f.eval(z)), z0, 0.15, 32).unwrap();
    let want = f.derivative().eval(z0);
    assert!((d - want).norm() < 1e-12 * want.norm(), "{d} vs {want}");
    assert!(cauchy_derivative(Ok, z0, 0.0, 32).is_err());
}
