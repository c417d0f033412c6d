use laxforge::model::{FinitePole, Pole, PoleProfile, TimeChart};
use laxforge::ratcalc::rel_err;
use laxforge::structlin::{
    solve_dense, toeplitz_from_times, toeplitz_solve, vandermonde_solve, LowerToeplitz, VandermondeStack,
};
use laxforge::C;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn rand_c(rng: &mut ChaCha8Rng) -> C {
    C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn assert_vec(a: &[C], b: &[C], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!(rel_err(*x, *y) < tol, "{x} vs {y}");
    }
}

#[test]
fn toeplitz_at_infinity_from_times() {
    let profile = PoleProfile::new(6, vec![]).unwrap();
    let mut chart = TimeChart::zeros(&profile);
    chart.inf[3] = c(2.0);
    chart.inf[4] = c(0.0);
    chart.inf[5] = c(1.0);
    let m = toeplitz_from_times(&chart, &profile, Pole::Inf);
    let want = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [2.0, 0.0, 1.0]];
    for (i, row) in want.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            assert_eq!(m.entry(i, j), c(w));
        }
    }
    let inv = m.inverse().unwrap();
    let want = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-2.0, 0.0, 1.0]];
    for (i, row) in want.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            assert!(rel_err(inv.entry(i, j), c(w)) < 1e-15);
        }
    }
    let x = toeplitz_solve(&m, &[c(0.0), c(0.0), c(1.0)]).unwrap();
    assert_vec(&x, &[c(0.0), c(0.0), c(1.0)], 1e-15);
}

#[test]
fn toeplitz_at_finite_pole_and_small_orders() {
    let profile = PoleProfile::new(3, vec![FinitePole { x: c(0.0), r: 2 }, FinitePole { x: c(1.0), r: 1 }])
        .unwrap();
    let mut chart = TimeChart::zeros(&profile);
    chart.finite[0][1] = c(7.0);
    let m = toeplitz_from_times(&chart, &profile, Pole::X(0));
    assert_eq!(m.size(), 1);
    assert_eq!(m.entry(0, 0), c(7.0));
    assert_eq!(toeplitz_from_times(&chart, &profile, Pole::X(1)).size(), 0);
    assert_eq!(toeplitz_from_times(&chart, &profile, Pole::Inf).size(), 0);
    chart.finite[0][1] = c(0.0);
    let m = toeplitz_from_times(&chart, &profile, Pole::X(0));
    assert!(m.is_singular());
    assert!(toeplitz_solve(&m, &[c(1.0)]).is_err());
}

#[test]
fn toeplitz_solve_examples() {
    let id = LowerToeplitz::new(vec![c(1.0), c(0.0), c(0.0)]);
    let b = [c(3.0), C::new(0.0, 1.0), c(-2.0)];
    assert_vec(&toeplitz_solve(&id, &b).unwrap(), &b, 1e-15);
    let m = LowerToeplitz::new(vec![c(1.0), c(2.0)]);
    assert_vec(&toeplitz_solve(&m, &[c(1.0), c(0.0)]).unwrap(), &[c(1.0), c(-2.0)], 1e-15);
}

#[test]
fn toeplitz_products_commute_and_solves_invert() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for m in 1..7 {
        let a = LowerToeplitz::new((0..m).map(|_| rand_c(&mut rng)).collect());
        let b = LowerToeplitz::new((0..m).map(|_| rand_c(&mut rng)).collect());
        let ab = a.to_matrix() * b.to_matrix();
        let ba = b.to_matrix() * a.to_matrix();
        assert!((ab.clone() - ba).norm() < 1e-12);
        assert!((ab - a.mul(&b).to_matrix()).norm() < 1e-12);
        let rhs: Vec<C> = (0..m).map(|_| rand_c(&mut rng)).collect();
        let x = toeplitz_solve(&a, &rhs).unwrap();
        assert_vec(&a.mul_vec(&x), &rhs, 1e-11);
    }
}

#[test]
fn vandermonde_examples() {
    let profile = PoleProfile::new(4, vec![]).unwrap();
    let stack = VandermondeStack::new(&profile, &[c(2.0)]).unwrap();
    let x = vandermonde_solve(&stack, &[c(5.0)], false).unwrap();
    assert_vec(&x.x, &[c(5.0)], 1e-15);

    let a = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.5), c(1.0), c(0.25)]);
    let sol = solve_dense(&a, &[c(1.0), c(1.0)]).unwrap();
    assert_vec(&sol.x, &[c(1.0), c(0.0)], 1e-14);

    let profile = PoleProfile::new(2, vec![FinitePole { x: c(0.0), r: 2 }]).unwrap();
    let stack = VandermondeStack::new(&profile, &[c(1.0)]).unwrap();
    assert_eq!(stack.rows(), 2);
    assert!(vandermonde_solve(&stack, &[c(1.0)], false).is_err());

    let profile = PoleProfile::new(3, vec![FinitePole { x: c(0.0), r: 2 }]).unwrap();
    let stack = VandermondeStack::new(&profile, &[c(1.0), c(2.0)]).unwrap();
    assert_eq!(stack.matrix[(0, 1)], c(0.5));
    assert_eq!(stack.matrix[(1, 1)], c(0.25));
    // Double pole at 0 with nodes (1, 2): rows (q−X)^{−1}, (q−X)^{−2}.
    let sol = vandermonde_solve(&stack, &[c(1.0), c(1.0)], false).unwrap();
    assert_vec(&sol.x, &[c(1.0), c(0.0)], 1e-14);
    let sol = vandermonde_solve(&stack, &[c(1.0), c(1.0)], true).unwrap();
    assert_vec(&sol.x, &[c(3.0), c(-2.0)], 1e-14);
    let zero = vandermonde_solve(&stack, &[c(0.0), c(0.0)], false).unwrap();
    assert_vec(&zero.x, &[c(0.0), c(0.0)], 1e-15);
}

#[test]
fn vandermonde_matches_explicit_inverses() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..10 {
        let x1 = rand_c(&mut rng) + c(3.0);
        let profile = PoleProfile::new(4, vec![FinitePole { x: x1, r: 1 }]).unwrap();
        let q = [rand_c(&mut rng), rand_c(&mut rng) - c(2.0)];
        let stack = VandermondeStack::new(&profile, &q).unwrap();
        let rhs = [rand_c(&mut rng), rand_c(&mut rng)];
        let m = &stack.matrix;
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let want = [
            (m[(1, 1)] * rhs[0] - m[(0, 1)] * rhs[1]) / det,
            (-m[(1, 0)] * rhs[0] + m[(0, 0)] * rhs[1]) / det,
        ];
        assert_vec(&vandermonde_solve(&stack, &rhs, false).unwrap().x, &want, 1e-12);

        let profile = PoleProfile::new(3, vec![FinitePole { x: x1, r: 3 }]).unwrap();
        let q = [rand_c(&mut rng), rand_c(&mut rng) - c(2.0), rand_c(&mut rng) + C::new(0.0, 2.0)];
        let stack = VandermondeStack::new(&profile, &q).unwrap();
        let rhs: Vec<C> = (0..3).map(|_| rand_c(&mut rng)).collect();
        let a = stack.matrix.transpose();
        let inv = a.clone().try_inverse().unwrap();
        let want: Vec<C> = (0..3).map(|i| (0..3).map(|j| inv[(i, j)] * rhs[j]).sum()).collect();
        assert_vec(&vandermonde_solve(&stack, &rhs, true).unwrap().x, &want, 1e-10);
    }
}

#[test]
fn coincident_nodes_are_degenerate() {
    let profile = PoleProfile::new(5, vec![]).unwrap();
    assert!(VandermondeStack::new(&profile, &[c(1.0), c(1.0)]).is_err());
    let profile = PoleProfile::new(3, vec![FinitePole { x: c(0.0), r: 1 }]).unwrap();
    assert!(VandermondeStack::new(&profile, &[c(0.0)]).is_err());
}
