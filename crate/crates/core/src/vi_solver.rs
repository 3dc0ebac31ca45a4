//! Box-constrained SPD linear complementarity problems and SPD linear solves.
//!
//! The per-step obstacle problem is
//!
//! ```text
//! find x ≤ u with  r = Hx - q ≤ 0  and  r·(x - u) = 0,
//! ```
//!
//! i.e. the minimiser of `½xᵀHx - qᵀx` over `{x ≤ u}`. It is solved by
//! projected SOR; [`solve_active_set_oracle`] enumerates active sets for small
//! instances and serves as a reference.

use thiserror::Error;

use crate::dense::solve_dense;
use crate::scalar::{dot_slices, Scalar};
use crate::sparse::SparseSymMatrix;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dimension mismatch: matrix {matrix}, rhs {rhs}, bounds {bounds}")]
    DimensionMismatch { matrix: usize, rhs: usize, bounds: usize },
    #[error("row {row} has diagonal {diag:e}, too small for a Gauss-Seidel sweep")]
    IllConditioned { row: usize, diag: f64 },
    #[error("relaxation factor {0} outside (0, 2)")]
    BadRelaxation(f64),
    #[error("tolerance must be positive, got {0:e}")]
    BadTolerance(f64),
    #[error("active-set enumeration is limited to 15 unknowns, got {0}")]
    OracleTooLarge(usize),
    #[error("no active set satisfies the complementarity conditions")]
    NoKktCandidate,
    #[error("conjugate gradient did not reach relative residual {tol:e} in {iterations} iterations (reached {residual:e})")]
    CgNotConverged { iterations: usize, residual: f64, tol: f64 },
}

#[derive(Debug, Clone)]
pub struct LcpProblem<T> {
    pub h: SparseSymMatrix<T>,
    pub q: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> LcpProblem<T> {
    /// Validates dimensions and rejects rows whose diagonal is not safely
    /// positive.
    pub fn new(h: SparseSymMatrix<T>, q: Vec<T>, upper: Vec<T>) -> Result<Self, SolverError> {
        if h.dim() != q.len() || h.dim() != upper.len() {
            return Err(SolverError::DimensionMismatch { matrix: h.dim(), rhs: q.len(), bounds: upper.len() });
        }
        let diag = h.diagonal();
        let scale = diag.iter().fold(T::zero(), |m, d| m.max(d.abs()));
        let floor = scale * T::of(1e3) * T::epsilon();
        if let Some(row) = diag.iter().position(|&d| !(d > floor)) {
            return Err(SolverError::IllConditioned { row, diag: diag[row].to_f64_lossy() });
        }
        Ok(Self { h, q, upper })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// `½xᵀHx - qᵀx`.
    pub fn energy(&self, x: &[T]) -> T {
        T::of(0.5) * self.h.quad_form(x) - dot_slices(&self.q, x)
    }

    /// `r = Hx - q`.
    pub fn residual(&self, x: &[T]) -> Vec<T> {
        let mut r = self.h.mul_vec(x);
        for (ri, qi) in r.iter_mut().zip(&self.q) {
            *ri -= *qi;
        }
        r
    }

    /// KKT residuals of `x`: `(sign, complementarity)`.
    ///
    /// `sign` is the largest positive part of `r`. `complementarity` is
    /// `max |r_i (u_i - x_i)| / (1 + |u_i|)`, which tends to `|r_i|` for
    /// unbounded DOFs.
    pub fn kkt_residuals(&self, x: &[T]) -> (T, T) {
        kkt_residuals(&self.residual(x), x, &self.upper)
    }
}

pub(crate) fn kkt_residuals<T: Scalar>(r: &[T], x: &[T], upper: &[T]) -> (T, T) {
    let mut sign = T::zero();
    let mut comp = T::zero();
    for ((&ri, &xi), &ui) in r.iter().zip(x).zip(upper) {
        sign = sign.max(ri);
        let c = if ui.is_finite() { (ri * (ui - xi)).abs() / (T::one() + ui.abs()) } else { ri.abs() };
        comp = comp.max(c);
    }
    (sign, comp)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsorOptions<T> {
    pub omega: T,
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for PsorOptions<T> {
    fn default() -> Self {
        Self { omega: T::of(1.5), tol: T::of(1e-10), max_iter: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcpSolution<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub residual_complementarity: T,
    pub residual_sign: T,
    pub converged: bool,
}

/// Projected SOR. Each sweep updates
/// `x_i ← min(u_i, x_i + ω (q_i - (Hx)_i) / H_ii)` in index order. Sweeping
/// stops once the energy decrease of a sweep drops below `tol²` and the KKT
/// residuals are below `tol`.
///
/// Exceeding `max_iter` is not an error: the returned solution has
/// `converged == false` and carries its residuals.
pub fn solve_psor<T: Scalar>(p: &LcpProblem<T>, x0: &[T], opts: &PsorOptions<T>) -> Result<LcpSolution<T>, SolverError> {
    solve_psor_monitored(p, x0, opts, |_, _| {})
}

/// [`solve_psor`] with a callback invoked after every sweep with the sweep
/// number and the current iterate.
pub fn solve_psor_monitored<T: Scalar>(
    p: &LcpProblem<T>,
    x0: &[T],
    opts: &PsorOptions<T>,
    mut monitor: impl FnMut(usize, &[T]),
) -> Result<LcpSolution<T>, SolverError> {
    if !(opts.omega > T::zero() && opts.omega < T::of(2.0)) {
        return Err(SolverError::BadRelaxation(opts.omega.to_f64_lossy()));
    }
    if !(opts.tol > T::zero()) {
        return Err(SolverError::BadTolerance(opts.tol.to_f64_lossy()));
    }
    let n = p.dim();
    if x0.len() != n {
        return Err(SolverError::DimensionMismatch { matrix: n, rhs: x0.len(), bounds: p.upper.len() });
    }
    let mut x: Vec<T> = x0.iter().zip(&p.upper).map(|(&a, &u)| a.min(u)).collect();
    let diag = p.h.diagonal();
    let half = T::of(0.5);
    let stop = opts.tol * opts.tol;

    let mut iterations = 0;
    let mut residuals = (T::infinity(), T::infinity());
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut decrease = T::zero();
        for i in 0..n {
            let (cols, vals) = p.h.row(i);
            let ri = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum::<T>() - p.q[i];
            let next = (x[i] - opts.omega * ri / diag[i]).min(p.upper[i]);
            let d = next - x[i];
            decrease -= d * ri + half * diag[i] * d * d;
            x[i] = next;
        }
        monitor(iterations, &x);
        if decrease < stop {
            residuals = p.kkt_residuals(&x);
            if residuals.0 <= opts.tol && residuals.1 <= opts.tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        residuals = p.kkt_residuals(&x);
    }
    Ok(LcpSolution { x, iterations, residual_complementarity: residuals.1, residual_sign: residuals.0, converged })
}

/// Reference solver: enumerates every active set `S`, solves
/// `x_S = u_S, (Hx - q)_{S^c} = 0`, and returns the first candidate with
/// `r_S ≤ 0` and `x_{S^c} ≤ u_{S^c}`. Limited to 15 unknowns.
pub fn solve_active_set_oracle<T: Scalar>(p: &LcpProblem<T>) -> Result<Vec<T>, SolverError> {
    let n = p.dim();
    if n > 15 {
        return Err(SolverError::OracleTooLarge(n));
    }
    let h = p.h.to_dense();
    let scale = T::one()
        + p.q.iter().fold(T::zero(), |m, v| m.max(v.abs()))
        + p.upper.iter().filter(|u| u.is_finite()).fold(T::zero(), |m, v| m.max(v.abs()));
    let slack = T::of(1e-9) * scale;
    'sets: for mask in 0u32..(1u32 << n) {
        let active = |i: usize| mask & (1 << i) != 0;
        if (0..n).any(|i| active(i) && !p.upper[i].is_finite()) {
            continue;
        }
        let free: Vec<usize> = (0..n).filter(|&i| !active(i)).collect();
        let mut x: Vec<T> = (0..n).map(|i| if active(i) { p.upper[i] } else { T::zero() }).collect();
        if !free.is_empty() {
            let a: Vec<Vec<T>> = free.iter().map(|&i| free.iter().map(|&j| h[i][j]).collect()).collect();
            let b: Vec<T> = free
                .iter()
                .map(|&i| p.q[i] - (0..n).filter(|&j| active(j)).map(|j| h[i][j] * p.upper[j]).sum::<T>())
                .collect();
            let Some(xf) = solve_dense(a, b) else { continue };
            for (&i, v) in free.iter().zip(xf) {
                x[i] = v;
            }
        }
        for &i in &free {
            if x[i] > p.upper[i] + slack {
                continue 'sets;
            }
        }
        let r = p.residual(&x);
        if (0..n).any(|i| active(i) && r[i] > slack) {
            continue;
        }
        return Ok(x);
    }
    Err(SolverError::NoKktCandidate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub relative_residual: T,
}

/// Jacobi-preconditioned conjugate gradients from the initial guess `x0`,
/// stopping at `‖b - Hx‖ ≤ tol ‖b‖`.
pub fn conjugate_gradient<T: Scalar>(
    h: &SparseSymMatrix<T>,
    rhs: &[T],
    x0: Option<&[T]>,
    tol: T,
    max_iter: usize,
) -> Result<CgOutcome<T>, SolverError> {
    let n = h.dim();
    if rhs.len() != n || x0.is_some_and(|x| x.len() != n) {
        return Err(SolverError::DimensionMismatch { matrix: n, rhs: rhs.len(), bounds: n });
    }
    if !(tol > T::zero()) {
        return Err(SolverError::BadTolerance(tol.to_f64_lossy()));
    }
    let bnorm = dot_slices(rhs, rhs).sqrt();
    if bnorm == T::zero() {
        return Ok(CgOutcome { x: vec![T::zero(); n], iterations: 0, relative_residual: T::zero() });
    }
    let inv_diag: Vec<T> = h.diagonal().iter().map(|&d| if d > T::zero() { T::one() / d } else { T::one() }).collect();
    let mut x = x0.map_or_else(|| vec![T::zero(); n], <[T]>::to_vec);
    let mut r = h.mul_vec(&x);
    for (ri, bi) in r.iter_mut().zip(rhs) {
        *ri = *bi - *ri;
    }
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(a, b)| *a * *b).collect();
    let mut p = z.clone();
    let mut rz = dot_slices(&r, &z);
    let mut hp = vec![T::zero(); n];
    let mut rel = dot_slices(&r, &r).sqrt() / bnorm;
    let mut it = 0;
    while rel > tol && it < max_iter {
        it += 1;
        h.mul_vec_into(&p, &mut hp);
        let php = dot_slices(&p, &hp);
        if !(php > T::zero()) {
            break;
        }
        let alpha = rz / php;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * hp[i];
        }
        rel = dot_slices(&r, &r).sqrt() / bnorm;
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot_slices(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if rel > tol {
        return Err(SolverError::CgNotConverged {
            iterations: it,
            residual: rel.to_f64_lossy(),
            tol: tol.to_f64_lossy(),
        });
    }
    Ok(CgOutcome { x, iterations: it, relative_residual: rel })
}

/// Solves the SPD system `Hx = rhs` to relative residual `tol`.
pub fn solve_spd<T: Scalar>(h: &SparseSymMatrix<T>, rhs: &[T], tol: T) -> Result<Vec<T>, SolverError> {
    let cap = 10 * h.dim() + 100;
    conjugate_gradient(h, rhs, None, tol, cap).map(|o| o.x)
}
