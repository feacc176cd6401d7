//! Finite differences for `-u''` on `(0, 1)` with Robin boundary conditions.
//!
//! The grid has `n` interior nodes and spacing `h = 1/(n+1)`; fields carry the
//! two boundary values as well, so every field has `n + 2` entries. The
//! boundary condition is `du/dη + c u = 0` with the outward normal, i.e.
//! `u'(0) = c u(0)` and `u'(1) = -c u(1)`. It is closed with a ghost node:
//! eliminating the ghost value from the centered stencil at `x = 0` gives the
//! boundary row
//!
//! ```text
//! (L u)_0 = 2 ((1 + h c) u_0 - u_1) / h²
//! ```
//!
//! and symmetrically at `x = 1`. The closure is second-order accurate and
//! exact on quadratics. Scaling the two boundary rows by 1/2 makes the matrix
//! symmetric, which is why the principal eigenpair is real and its
//! eigenfunction can be taken positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[0, 1]` with `n` interior nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid1D {
    n: usize,
}

impl Grid1D {
    pub const MIN_INTERIOR: usize = 8;
    pub const DEFAULT_INTERIOR: usize = 1024;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_INTERIOR {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    /// Number of interior nodes.
    pub fn interior(&self) -> usize {
        self.n
    }

    /// Number of stored values per field, boundary nodes included.
    pub fn len(&self) -> usize {
        self.n + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.n + 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / (self.n + 1) as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.x(i))
    }

    /// Trapezoid weights divided by `h` (1/2 at the ends, 1 inside).
    pub(crate) fn half_end_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n + 1 {
            0.5
        } else {
            1.0
        }
    }

    pub(crate) fn ensure_same(&self, other: &Grid1D) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

impl Default for Grid1D {
    fn default() -> Self {
        Self {
            n: Self::DEFAULT_INTERIOR,
        }
    }
}

/// Samples of a function at every node of a [`Grid1D`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_values(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "field has {} values, grid expects {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value {} at node {i}",
                values[i]
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Grid1D, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup-norm of the parabola through the largest node and its neighbours.
    ///
    /// Exact for sampled quadratics whose apex falls between nodes, which the
    /// nodal maximum misses by up to `h²/8` times the curvature.
    pub fn apex_sup_norm(&self) -> f64 {
        let abs: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        let (i, &peak) =
            abs.iter().enumerate().fold(
                (0, &0.0),
                |best, (i, v)| if *v > *best.1 { (i, v) } else { best },
            );
        if i == 0 || i + 1 == abs.len() {
            return peak;
        }
        let (a, c) = (abs[i - 1], abs[i + 1]);
        let curvature = a - 2.0 * peak + c;
        if curvature >= 0.0 {
            return peak;
        }
        peak - (c - a).powi(2) / (8.0 * curvature)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|v| factor * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Largest nodewise `|self - other|`.
    pub fn distance(&self, other: &ScalarField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Nodewise `self <= other + tol`.
    pub fn le(&self, other: &ScalarField, tol: f64) -> bool {
        self.grid == other.grid
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| *a <= *b + tol)
    }
}

/// Boundary coefficient `c` in `du/dη + c u = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobinCoefficient(f64);

impl RobinCoefficient {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidCoefficient(c));
        }
        Ok(Self(c))
    }

    pub fn neumann() -> Self {
        Self(0.0)
    }

    /// The coefficient `sqrt(lambda + mu)` of the coupled system.
    pub fn for_parameters(lambda: f64, mu: f64) -> Result<Self> {
        Self::new((lambda + mu).sqrt())
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Tridiagonal matrix stored by rows: `lower[i]` multiplies `x[i-1]`,
/// `upper[i]` multiplies `x[i+1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.lower[i] * x[i - 1];
                }
                if i + 1 < m {
                    acc += self.upper[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.lower[i] + self.diag[i] + self.upper[i]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (1..self.len()).all(|i| (self.lower[i] - self.upper[i - 1]).abs() <= tol)
    }

    /// Thomas elimination with `shift` added to the diagonal. Returns `None`
    /// on a vanishing pivot.
    pub fn solve_shifted(&self, rhs: &[f64], shift: f64) -> Option<Vec<f64>> {
        let m = self.len();
        let mut c_prime = vec![0.0; m];
        let mut d_prime = vec![0.0; m];
        let mut pivot = self.diag[0] + shift;
        if pivot == 0.0 || !pivot.is_finite() {
            return None;
        }
        c_prime[0] = self.upper[0] / pivot;
        d_prime[0] = rhs[0] / pivot;
        for i in 1..m {
            pivot = self.diag[i] + shift - self.lower[i] * c_prime[i - 1];
            if pivot == 0.0 || !pivot.is_finite() {
                return None;
            }
            c_prime[i] = if i + 1 < m {
                self.upper[i] / pivot
            } else {
                0.0
            };
            d_prime[i] = (rhs[i] - self.lower[i] * d_prime[i - 1]) / pivot;
        }
        let mut x = d_prime;
        for i in (0..m - 1).rev() {
            x[i] -= c_prime[i] * x[i + 1];
        }
        Some(x)
    }

    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        self.solve_shifted(rhs, 0.0)
    }
}

/// Discrete `-d²/dx²` with the ghost-node Robin closure.
#[derive(Clone, Debug)]
pub struct RobinOperator {
    grid: Grid1D,
    c: RobinCoefficient,
    matrix: Tridiagonal,
}

/// Builds the `(n+2) x (n+2)` operator for the coefficient `c`.
pub fn assemble_robin_operator(grid: Grid1D, c: RobinCoefficient) -> RobinOperator {
    let m = grid.len();
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let mut lower = vec![-inv_h2; m];
    let mut diag = vec![2.0 * inv_h2; m];
    let mut upper = vec![-inv_h2; m];
    lower[0] = 0.0;
    upper[m - 1] = 0.0;
    diag[0] = 2.0 * (1.0 + h * c.value()) * inv_h2;
    upper[0] = -2.0 * inv_h2;
    diag[m - 1] = diag[0];
    lower[m - 1] = -2.0 * inv_h2;
    RobinOperator {
        grid,
        c,
        matrix: Tridiagonal { lower, diag, upper },
    }
}

impl RobinOperator {
    pub fn new(grid: Grid1D, c: f64) -> Result<Self> {
        Ok(assemble_robin_operator(grid, RobinCoefficient::new(c)?))
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn coefficient(&self) -> RobinCoefficient {
        self.c
    }

    pub fn matrix(&self) -> &Tridiagonal {
        &self.matrix
    }

    /// Interior rows before the Robin closure is applied (the plain 3-point stencil).
    pub fn interior_stencil(&self) -> [f64; 3] {
        let inv_h2 = 1.0 / (self.grid.spacing() * self.grid.spacing());
        [-inv_h2, 2.0 * inv_h2, -inv_h2]
    }

    /// The boundary rows halved; this is the symmetric form of the operator.
    pub fn symmetric_matrix(&self) -> Tridiagonal {
        let mut s = self.matrix.clone();
        let last = s.len() - 1;
        for i in [0, last] {
            s.lower[i] *= 0.5;
            s.diag[i] *= 0.5;
            s.upper[i] *= 0.5;
        }
        s
    }

    pub fn apply(&self, u: &ScalarField) -> Result<ScalarField> {
        self.grid.ensure_same(&u.grid())?;
        Ok(ScalarField {
            grid: self.grid,
            values: self.matrix.apply(u.values()),
        })
    }

    /// Solves `(L + shift) u = rhs`; `shift >= 0` keeps the system an M-matrix.
    pub fn solve_shifted(&self, rhs: &ScalarField, shift: f64) -> Result<ScalarField> {
        self.grid.ensure_same(&rhs.grid())?;
        if self.c.value() == 0.0 && shift == 0.0 {
            return self.solve_neumann(rhs);
        }
        let values = self
            .matrix
            .solve_shifted(rhs.values(), shift)
            .ok_or(Error::SingularSystem { mean: f64::NAN })?;
        ScalarField::from_values(self.grid, values)
    }

    pub fn solve(&self, rhs: &ScalarField) -> Result<ScalarField> {
        self.solve_shifted(rhs, 0.0)
    }

    // Compatible Neumann data: pin u_0 = 0, drop row 0, then remove the mean.
    fn solve_neumann(&self, rhs: &ScalarField) -> Result<ScalarField> {
        let g = self.grid;
        let r = rhs.values();
        let total: f64 = (0..g.len()).map(|i| g.half_end_weight(i)).sum();
        let mean = (0..g.len())
            .map(|i| g.half_end_weight(i) * r[i])
            .sum::<f64>()
            / total;
        let scale = rhs.sup_norm().max(f64::MIN_POSITIVE);
        if mean.abs() > 1e-12 * scale {
            return Err(Error::SingularSystem { mean });
        }
        let m = g.len();
        let reduced = Tridiagonal {
            lower: self.matrix.lower[1..].to_vec(),
            diag: self.matrix.diag[1..].to_vec(),
            upper: self.matrix.upper[1..].to_vec(),
        };
        let mut sub_rhs = r[1..].to_vec();
        // u_0 = 0 removes the coupling of row 1 to node 0.
        sub_rhs[0] -= self.matrix.lower[1] * 0.0;
        let mut reduced = reduced;
        reduced.lower[0] = 0.0;
        let tail = reduced
            .solve(&sub_rhs)
            .ok_or(Error::SingularSystem { mean })?;
        let mut values = Vec::with_capacity(m);
        values.push(0.0);
        values.extend(tail);
        let avg = (0..m)
            .map(|i| g.half_end_weight(i) * values[i])
            .sum::<f64>()
            / total;
        values.iter_mut().for_each(|v| *v -= avg);
        ScalarField::from_values(g, values)
    }

    /// Rayleigh quotient of the symmetric form, written with edge differences
    /// so that no O(1/h²) cancellation occurs.
    pub fn rayleigh_quotient(&self, u: &ScalarField) -> f64 {
        let g = self.grid;
        let h = g.spacing();
        let v = u.values();
        let m = v.len();
        let edges: f64 = v.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
        let num = (edges + h * self.c.value() * (v[0] * v[0] + v[m - 1] * v[m - 1])) / (h * h);
        let den: f64 = (0..m).map(|i| g.half_end_weight(i) * v[i] * v[i]).sum();
        num / den
    }
}

/// Solves `-u'' = rhs` with `du/dη + c u = 0`.
pub fn solve_poisson(grid: Grid1D, c: RobinCoefficient, rhs: &ScalarField) -> Result<ScalarField> {
    assemble_robin_operator(grid, c).solve(rhs)
}

/// Solution of `-u'' = 1` with coefficient `c`; for `c = 1` this is the
/// torsion-type function whose sup-norm enters the multiplicity window.
pub fn unit_load_solution(grid: Grid1D, c: RobinCoefficient) -> Result<ScalarField> {
    solve_poisson(grid, c, &ScalarField::constant(grid, 1.0))
}

/// Principal eigenvalue and sup-normalized positive eigenfunction.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult {
    pub sigma: f64,
    pub phi: ScalarField,
    pub iterations: usize,
}

const EIGEN_MAX_ITER: usize = 10_000;
const EIGEN_RQ_TOL: f64 = 1e-12;
const EIGEN_VEC_TOL: f64 = 1e-11;
// The Neumann operator is singular, so the iteration runs on L + 1.
const EIGEN_SHIFT: f64 = 1.0;

/// Smallest eigenvalue of the Robin operator by shifted inverse iteration.
pub fn principal_eigenpair(grid: Grid1D, c: RobinCoefficient) -> Result<EigenResult> {
    let op = assemble_robin_operator(grid, c);
    let mut phi = ScalarField::constant(grid, 1.0);
    let mut sigma = op.rayleigh_quotient(&phi);
    for iteration in 1..=EIGEN_MAX_ITER {
        let next = op
            .matrix
            .solve_shifted(phi.values(), EIGEN_SHIFT)
            .ok_or(Error::SingularSystem { mean: f64::NAN })?;
        let peak = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let next = ScalarField {
            grid,
            values: next.into_iter().map(|v| v / peak).collect(),
        };
        let next_sigma = op.rayleigh_quotient(&next);
        let change = next.distance(&phi)?;
        let rq_change = (next_sigma - sigma).abs();
        phi = next;
        sigma = next_sigma;
        if rq_change < EIGEN_RQ_TOL * sigma.abs().max(1.0) && change < EIGEN_VEC_TOL {
            if phi.min() <= 0.0 {
                break;
            }
            return Ok(EigenResult {
                sigma,
                phi,
                iterations: iteration,
            });
        }
    }
    Err(Error::EigenNotConverged {
        iterations: EIGEN_MAX_ITER,
        last: Box::new(EigenResult {
            sigma,
            phi,
            iterations: EIGEN_MAX_ITER,
        }),
    })
}

const K1_LOWER: f64 = 1e-8;
const K1_UPPER: f64 = 1.0;
const K1_TOL: f64 = 1e-10;
const K1_CAP: f64 = 1e12;

/// Principal eigenvalue `K` of `-Θ'' = K Θ` with boundary coefficient `τ sqrt(K)`.
///
/// `K` is the root of `F(K) = σ₁(τ √K) − K`, found by bisection after
/// bracketing: `F > 0` near zero and `F < 0` once `K` outgrows the Dirichlet
/// limit of `σ₁`.
pub fn solve_k1(grid: Grid1D, tau: f64) -> Result<f64> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let residual = |k: f64| -> Result<f64> {
        let c = RobinCoefficient::new(tau * k.sqrt())?;
        Ok(principal_eigenpair(grid, c)?.sigma - k)
    };

    let mut lo = K1_LOWER;
    while residual(lo)? <= 0.0 {
        lo *= 1e-2;
        if lo < 1e-280 {
            return Err(Error::BracketNotFound {
                k_cap: lo,
                value_at_cap: residual(lo)?,
            });
        }
    }
    let mut hi = K1_UPPER.max(lo);
    loop {
        let value = residual(hi)?;
        if value < 0.0 {
            break;
        }
        hi *= 2.0;
        if hi > K1_CAP {
            return Err(Error::BracketNotFound {
                k_cap: hi,
                value_at_cap: residual(hi)?,
            });
        }
    }
    while hi - lo > K1_TOL * hi.min(1.0) {
        let mid = if hi > 4.0 * lo {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if residual(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Existence threshold `A₁ = K₁(1/sqrt(g'(0))) / g'(0)` for `lambda + mu`.
pub fn compute_a1(grid: Grid1D, gprime0: f64) -> Result<f64> {
    if !(gprime0.is_finite() && gprime0 > 0.0) {
        return Err(Error::HypothesisViolation(format!(
            "g'(0) must be positive, got {gprime0}"
        )));
    }
    Ok(solve_k1(grid, 1.0 / gprime0.sqrt())? / gprime0)
}

/// `ϱ_t = σ₁(sqrt(t)) − t g'(0)`; positive below `A₁`, zero at it, negative above.
pub fn compute_rho(grid: Grid1D, t: f64, gprime0: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidInput(format!("t must be positive, got {t}")));
    }
    let c = RobinCoefficient::new(t.sqrt())?;
    Ok(principal_eigenpair(grid, c)?.sigma - t * gprime0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid1D {
        Grid1D::new(n).unwrap()
    }

    /// Independent oracle: bisection on `s = 2 atan(c / s)` for `s = sqrt(σ)`.
    fn sigma_closed_form(c: f64) -> f64 {
        let (mut lo, mut hi) = (1e-12_f64, std::f64::consts::PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid - 2.0 * (c / mid).atan() < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        s * s
    }

    #[test]
    fn rejects_small_grid_and_negative_coefficient() {
        assert!(matches!(Grid1D::new(7), Err(Error::InvalidGrid(7))));
        assert!(matches!(
            RobinCoefficient::new(-0.1),
            Err(Error::InvalidCoefficient(_))
        ));
        assert!(RobinOperator::new(grid(16), -1.0).is_err());
    }

    #[test]
    fn neumann_annihilates_constants() {
        let g = grid(32);
        let op = assemble_robin_operator(g, RobinCoefficient::neumann());
        let out = op.apply(&ScalarField::constant(g, 3.7)).unwrap();
        assert!(out.values().iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn interior_stencil_rows_sum_to_zero() {
        let op = RobinOperator::new(grid(8), 1.0).unwrap();
        let s = op.interior_stencil();
        assert_eq!(s.iter().sum::<f64>(), 0.0);
        for i in 1..=8 {
            assert_eq!(op.matrix().row_sum(i), 0.0);
        }
        assert!(op.matrix().row_sum(0) > 0.0);
    }

    #[test]
    fn symmetric_form_is_symmetric() {
        let op = RobinOperator::new(grid(20), 2.5).unwrap();
        assert!(op.symmetric_matrix().is_symmetric(0.0));
        assert!(!op.matrix().is_symmetric(0.0));
    }

    #[test]
    fn exact_on_the_unit_load_quadratic() {
        let g = grid(64);
        let xi = ScalarField::from_fn(g, |x| -0.5 * x * x + 0.5 * x + 0.5);
        let op = RobinOperator::new(g, 1.0).unwrap();
        let out = op.apply(&xi).unwrap();
        for v in out.values() {
            assert!((v - 1.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn poisson_closed_forms() {
        let g = grid(1024);
        let xi = unit_load_solution(g, RobinCoefficient::new(1.0).unwrap()).unwrap();
        assert!((xi.apex_sup_norm() - 0.625).abs() < 1e-10);
        // n even: no node sits on the apex at x = 1/2.
        assert!(0.625 - xi.sup_norm() > 1e-7);
        assert!((xi.get(0) - 0.5).abs() < 1e-10);
        assert!((xi.get(g.len() - 1) - 0.5).abs() < 1e-10);
        let zeta = unit_load_solution(g, RobinCoefficient::new(2.0).unwrap()).unwrap();
        assert!((zeta.apex_sup_norm() - 0.375).abs() < 1e-10);
        let zero = solve_poisson(
            g,
            RobinCoefficient::new(0.7).unwrap(),
            &ScalarField::zeros(g),
        )
        .unwrap();
        assert_eq!(zero.sup_norm(), 0.0);
    }

    #[test]
    fn neumann_poisson_singular_unless_compatible() {
        let g = grid(16);
        let err = solve_poisson(
            g,
            RobinCoefficient::neumann(),
            &ScalarField::constant(g, 1.0),
        );
        assert!(matches!(err, Err(Error::SingularSystem { .. })));
        // cos(2πx) has zero mean and the Neumann condition at both ends.
        let rhs = ScalarField::from_fn(g, |x| (2.0 * std::f64::consts::PI * x).cos());
        let u = solve_poisson(g, RobinCoefficient::neumann(), &rhs).unwrap();
        let back = RobinOperator::new(g, 0.0).unwrap().apply(&u).unwrap();
        assert!(back.distance(&rhs).unwrap() < 1e-6);
    }

    #[test]
    fn neumann_eigenpair_is_constant() {
        let e = principal_eigenpair(grid(64), RobinCoefficient::neumann()).unwrap();
        assert!(e.sigma.abs() < 1e-12);
        assert!(e.phi.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn robin_eigenvalue_matches_transcendental_root() {
        let e = principal_eigenpair(grid(1024), RobinCoefficient::new(1.0).unwrap()).unwrap();
        let exact = sigma_closed_form(1.0);
        assert!((exact - 1.7071).abs() < 1e-4);
        assert!((e.sigma - exact).abs() < 1e-5, "{} vs {exact}", e.sigma);
        assert!(e.phi.min() > 0.0);
        assert!((e.phi.max() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_limit() {
        let e = principal_eigenpair(grid(1024), RobinCoefficient::new(1e6).unwrap()).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((e.sigma - pi2).abs() < 0.01 * pi2);
    }

    #[test]
    fn eigenvalue_increases_with_coefficient() {
        let g = grid(256);
        let ladder = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0];
        let sigmas: Vec<f64> = ladder
            .iter()
            .map(|&c| {
                principal_eigenpair(g, RobinCoefficient::new(c).unwrap())
                    .unwrap()
                    .sigma
            })
            .collect();
        assert!(sigmas.windows(2).all(|w| w[0] < w[1]), "{sigmas:?}");
    }

    #[test]
    fn k1_closed_form() {
        let g = grid(1024);
        for tau in [1.0_f64, 2.0] {
            let exact = (2.0 * tau.atan()).powi(2);
            let k1 = solve_k1(g, tau).unwrap();
            assert!((k1 - exact).abs() < 1e-5, "tau {tau}: {k1} vs {exact}");
        }
        assert!((solve_k1(g, 1.0).unwrap() - 2.467401).abs() < 1e-5);
    }

    #[test]
    fn k1_degenerates_to_zero_for_tiny_tau() {
        let k1 = solve_k1(grid(128), 1e-6).unwrap();
        assert!(k1 > 0.0 && k1 < 1e-6, "{k1}");
    }

    #[test]
    fn a1_scaling() {
        let g = grid(1024);
        let a1 = compute_a1(g, 1.0).unwrap();
        assert_eq!(a1, solve_k1(g, 1.0).unwrap());
        assert!((a1 - std::f64::consts::FRAC_PI_2.powi(2)).abs() < 1e-5);
        let a4 = compute_a1(g, 4.0).unwrap();
        let exact = (2.0 * 0.5_f64.atan()).powi(2) / 4.0;
        assert!((a4 - exact).abs() < 1e-5, "{a4} vs {exact}");
        assert!((exact - 0.2149).abs() < 1e-4);
        assert!(matches!(
            compute_a1(g, 0.0),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn rho_sign_pattern() {
        let g = grid(1024);
        let a1 = compute_a1(g, 1.0).unwrap();
        assert!(compute_rho(g, a1, 1.0).unwrap().abs() < 1e-6);
        assert!(compute_rho(g, 1.0, 1.0).unwrap() > 0.0);
        assert!(compute_rho(g, 4.0, 1.0).unwrap() < 0.0);
    }
}
