//! Structured linear systems: lower-triangular Toeplitz matrices built from
//! times and Vandermonde-type stacks built from the apparent singularities.
//!
//! # Invariants
//! - A [`LowerToeplitz`] of size `m` has entry `(i, j) = c_{i−j}` for `i ≥ j`.
//! - A [`VandermondeStack`] has one column per node `q_i` and one row per
//!   monomial `q^j` (`0 ≤ j ≤ r_∞ − 4`) or pole power `(q − X_s)^{−k}`
//!   (`1 ≤ k ≤ r_s`), in that order.

use nalgebra::{DMatrix, DVector};

use crate::model::{Pole, PoleProfile, TimeChart};
use crate::{LaxError, Result, C};

const ZERO: C = C::new(0.0, 0.0);

/// Lower-triangular Toeplitz matrix given by its first column.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerToeplitz {
    first_column: Vec<C>,
}

impl LowerToeplitz {
    /// Builds the matrix from `(c_0, …, c_{m−1})`.
    pub fn new(first_column: Vec<C>) -> Self {
        LowerToeplitz { first_column }
    }

    /// Size `m`.
    pub fn size(&self) -> usize {
        self.first_column.len()
    }

    /// First column.
    pub fn first_column(&self) -> &[C] {
        &self.first_column
    }

    /// Entry `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> C {
        if i >= j {
            self.first_column[i - j]
        } else {
            ZERO
        }
    }

    /// True when the diagonal vanishes.
    pub fn is_singular(&self) -> bool {
        self.first_column.first().is_some_and(|c| *c == ZERO)
    }

    /// Dense copy.
    pub fn to_matrix(&self) -> DMatrix<C> {
        let m = self.size();
        DMatrix::from_fn(m, m, |i, j| self.entry(i, j))
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[C]) -> Vec<C> {
        (0..self.size()).map(|i| (0..=i).map(|j| self.first_column[i - j] * x[j]).sum()).collect()
    }

    /// Product of two Toeplitz matrices of equal size, itself Toeplitz.
    pub fn mul(&self, other: &LowerToeplitz) -> LowerToeplitz {
        LowerToeplitz::new(self.mul_vec(&other.first_column))
    }

    /// Inverse, again lower-triangular Toeplitz.
    pub fn inverse(&self) -> Result<LowerToeplitz> {
        let mut e = vec![ZERO; self.size()];
        if let Some(x) = e.first_mut() {
            *x = C::new(1.0, 0.0);
        }
        Ok(LowerToeplitz::new(toeplitz_solve(self, &e)?))
    }
}

/// `M_∞` with first column `(t_{∞,r_∞−1}, …, t_{∞,3})` or `M_{X_s}` with
/// first column `(t_{X_s,r_s−1}, …, t_{X_s,1})`. Empty when the order is too
/// small.
pub fn toeplitz_from_times(chart: &TimeChart, profile: &PoleProfile, p: Pole) -> LowerToeplitz {
    let r = profile.order(p);
    let col: Vec<C> = match p {
        Pole::Inf if r >= 4 => (3..r).rev().map(|k| chart.t(p, k)).collect(),
        Pole::X(_) if r >= 2 => (1..r).rev().map(|k| chart.t(p, k)).collect(),
        _ => Vec::new(),
    };
    LowerToeplitz::new(col)
}

/// Forward substitution.
pub fn toeplitz_solve(m: &LowerToeplitz, b: &[C]) -> Result<Vec<C>> {
    let n = m.size();
    if b.len() != n {
        return Err(LaxError::MalformedInput(format!("rhs length {} for size {n}", b.len())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if m.is_singular() {
        return Err(LaxError::Singular("Toeplitz diagonal vanishes".into()));
    }
    let c = &m.first_column;
    let mut x = vec![ZERO; n];
    for i in 0..n {
        let mut acc = b[i];
        for j in 0..i {
            acc -= c[i - j] * x[j];
        }
        x[i] = acc / c[0];
    }
    Ok(x)
}

/// Solution of a dense system with a condition estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSolution {
    /// Solution vector.
    pub x: Vec<C>,
    /// Ratio of extreme singular values.
    pub cond: f64,
    /// Set when `cond` exceeds `1e12`.
    pub ill_conditioned: bool,
}

/// Pivoted LU solve of a square system.
pub fn solve_dense(a: &DMatrix<C>, b: &[C]) -> Result<DenseSolution> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(LaxError::MalformedInput(format!(
            "system is {}x{} with rhs of length {}",
            n,
            a.ncols(),
            b.len()
        )));
    }
    if n == 0 {
        return Ok(DenseSolution { x: Vec::new(), cond: 1.0, ill_conditioned: false });
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin == 0.0 || !smin.is_finite() {
        return Err(LaxError::Singular("dense system is singular".into()));
    }
    let cond = smax / smin;
    let rhs = DVector::from_column_slice(b);
    let x = a
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| LaxError::Singular("LU factorization failed".into()))?;
    Ok(DenseSolution { x: x.iter().copied().collect(), cond, ill_conditioned: cond > 1e12 })
}

/// The stacked matrix `[V_∞; V_{X_1}; …; V_{X_n}]` over the nodes `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct VandermondeStack {
    /// Block labels with their number of rows.
    pub blocks: Vec<(Pole, usize)>,
    /// Nodes `q_1, …, q_g`.
    pub nodes: Vec<C>,
    /// Assembled matrix, one column per node.
    pub matrix: DMatrix<C>,
}

impl VandermondeStack {
    /// Assembles the stack after checking that nodes are distinct and avoid
    /// the finite poles.
    pub fn new(profile: &PoleProfile, nodes: &[C]) -> Result<Self> {
        let scale = 1.0 + nodes.iter().map(|q| q.norm()).fold(0.0, f64::max);
        for i in 0..nodes.len() {
            for j in 0..i {
                if (nodes[i] - nodes[j]).norm() < 1e-10 * scale {
                    return Err(LaxError::Degenerate(format!("nodes {j} and {i} coincide")));
                }
            }
            for p in &profile.poles {
                if (nodes[i] - p.x).norm() < 1e-10 * scale {
                    return Err(LaxError::Degenerate(format!("node {i} sits on a pole")));
                }
            }
        }
        let mut blocks = Vec::new();
        let mut rows: Vec<Vec<C>> = Vec::new();
        let ninf = profile.r_inf.saturating_sub(3);
        blocks.push((Pole::Inf, ninf));
        for j in 0..ninf {
            rows.push(nodes.iter().map(|q| q.powu(j as u32)).collect());
        }
        for (s, p) in profile.poles.iter().enumerate() {
            blocks.push((Pole::X(s), p.r));
            for k in 1..=p.r {
                rows.push(nodes.iter().map(|q| (q - p.x).powi(-(k as i32))).collect());
            }
        }
        let matrix = DMatrix::from_fn(rows.len(), nodes.len(), |i, j| rows[i][j]);
        Ok(VandermondeStack { blocks, nodes: nodes.to_vec(), matrix })
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    /// True when the stack is square.
    pub fn is_square(&self) -> bool {
        self.matrix.nrows() == self.matrix.ncols()
    }
}

/// Solves `V x = rhs` or `Vᵀ x = rhs` for a square stack.
pub fn vandermonde_solve(stack: &VandermondeStack, rhs: &[C], transposed: bool) -> Result<DenseSolution> {
    if !stack.is_square() {
        return Err(LaxError::MalformedInput("stack is not square".into()));
    }
    if transposed {
        solve_dense(&stack.matrix.transpose(), rhs)
    } else {
        solve_dense(&stack.matrix, rhs)
    }
}
