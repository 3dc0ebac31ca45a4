//! Implicit gradient scheme: per time step, a damped Picard iteration on the
//! reaction arguments alternating an obstacle solve for `A` and a linear
//! solve for `B`.
//!
//! At Picard iterate `w = (A^k, B^k)` the step solves
//!
//! ```text
//! A* = argmin_{A ≤ χ_D}  ½Aᵀ(M/δt + K_A)A - (M/δt A^n + F_load(w))ᵀA
//! (M/δt + K_B) B* = M/δt B^n + G_load(w)
//! ```
//!
//! and relaxes `w ← (1-θ)w + θ(A*, B*)`.

use thiserror::Error;

use crate::assembly::{assemble_stiffness, mass_weights, reaction_load_with_weights, AssemblyError};
use crate::discretisation::{DofVector, GradientDiscretisation};
use crate::problem::ProblemSpec;
use crate::scalar::Scalar;
use crate::sparse::SparseSymMatrix;
use crate::vi_solver::{conjugate_gradient, kkt_residuals, solve_psor, LcpProblem, PsorOptions, SolverError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions<T> {
    pub picard_tol: T,
    pub picard_max: usize,
    pub psor: PsorOptions<T>,
    /// Relative residual for the `B` solve.
    pub cg_tol: T,
    /// Initial relaxation `θ ∈ (0, 1]`; halved when the Picard change grows
    /// twice in a row.
    pub damping: T,
}

impl<T: Scalar> Default for StepOptions<T> {
    fn default() -> Self {
        Self {
            picard_tol: T::of(1e-10),
            picard_max: 50,
            psor: PsorOptions::default(),
            cg_tol: T::of(1e-12),
            damping: T::one(),
        }
    }
}

#[derive(Debug, Error)]
pub enum StepError<T: Scalar> {
    #[error("time step {dt:e} violates the step restriction dt < 1/(2M) = {limit:e} (M = {lipschitz:e}) required by the energy estimate")]
    TimeStepTooLarge { dt: f64, limit: f64, lipschitz: f64 },
    #[error("invalid step options: {0}")]
    BadOptions(String),
    #[error("previous A level exceeds the discrete obstacle at DOF {dof}")]
    NotInConvexSet { dof: usize },
    #[error("Picard iteration did not reach {tol:e} in {iterations} iterations (last change {last:e})")]
    PicardNotConverged { iterations: usize, tol: f64, last: f64, a: DofVector<T>, b: DofVector<T>, history: Vec<T> },
    #[error("projected SOR did not converge in Picard iteration {picard}: sign residual {sign:e}, complementarity {comp:e}")]
    ObstacleSolveNotConverged { picard: usize, sign: f64, comp: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport<T> {
    pub picard_iterations: usize,
    /// Sup-norm change of `(A, B)` at each Picard iteration.
    pub change_history: Vec<T>,
    pub psor_sweeps: usize,
    pub cg_iterations: usize,
    /// Largest positive part of the discrete obstacle residual.
    pub residual_sign: T,
    /// `max |r_σ (A_σ - χ_σ)| / (1 + |χ_σ|)`.
    pub residual_complementarity: T,
    pub final_damping: T,
    /// The change sequence failed to decrease monotonically after the first
    /// iteration.
    pub contraction_violated: bool,
}

#[derive(Debug, Clone)]
pub struct StepOutcome<T> {
    pub a: DofVector<T>,
    pub b: DofVector<T>,
    pub report: StepReport<T>,
}

/// Operators for one discretisation and problem, with the step matrices
/// cached for the most recent `δt`.
pub struct Stepper<'a, T> {
    gd: &'a GradientDiscretisation<T>,
    spec: &'a ProblemSpec<T>,
    opts: StepOptions<T>,
    mass: Vec<T>,
    stiff_a: SparseSymMatrix<T>,
    stiff_b: SparseSymMatrix<T>,
    cached: Option<(T, SparseSymMatrix<T>, SparseSymMatrix<T>)>,
}

impl<'a, T: Scalar> Stepper<'a, T> {
    pub fn new(
        gd: &'a GradientDiscretisation<T>,
        spec: &'a ProblemSpec<T>,
        opts: StepOptions<T>,
    ) -> Result<Self, StepError<T>> {
        if !(opts.picard_tol > T::zero()) {
            return Err(StepError::BadOptions("picard_tol must be positive".into()));
        }
        if !(opts.damping > T::zero() && opts.damping <= T::one()) {
            return Err(StepError::BadOptions("damping must lie in (0, 1]".into()));
        }
        if opts.picard_max == 0 {
            return Err(StepError::BadOptions("picard_max must be at least 1".into()));
        }
        Ok(Self {
            gd,
            spec,
            opts,
            mass: mass_weights(gd),
            stiff_a: assemble_stiffness(gd, &spec.diff_a)?,
            stiff_b: assemble_stiffness(gd, &spec.diff_b)?,
            cached: None,
        })
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn stiffness_a(&self) -> &SparseSymMatrix<T> {
        &self.stiff_a
    }

    pub fn stiffness_b(&self) -> &SparseSymMatrix<T> {
        &self.stiff_b
    }

    /// `(M/δt + K_A, M/δt + K_B)`.
    pub fn step_matrices(&mut self, dt: T) -> (&SparseSymMatrix<T>, &SparseSymMatrix<T>) {
        if !matches!(&self.cached, Some((d, _, _)) if *d == dt) {
            let m = SparseSymMatrix::from_diagonal(&self.mass);
            let inv = T::one() / dt;
            let ha = SparseSymMatrix::linear_combination(inv, &m, T::one(), &self.stiff_a);
            let hb = SparseSymMatrix::linear_combination(inv, &m, T::one(), &self.stiff_b);
            self.cached = Some((dt, ha, hb));
        }
        let (_, ha, hb) = self.cached.as_ref().unwrap();
        (ha, hb)
    }

    pub fn check_time_step(&self, dt: T) -> Result<(), StepError<T>> {
        let limit = self.spec.max_time_step();
        if !(dt > T::zero()) || !(dt < limit) {
            return Err(StepError::TimeStepTooLarge {
                dt: dt.to_f64_lossy(),
                limit: limit.to_f64_lossy(),
                lipschitz: self.spec.lipschitz_constant().to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Obstacle problem for `A` with reactions frozen at `(a_k, b_k)`.
    pub fn obstacle_problem(&mut self, a_n: &[T], a_k: &[T], b_k: &[T], dt: T) -> Result<LcpProblem<T>, StepError<T>> {
        let load = reaction_load_with_weights(&self.mass, |a, b| self.spec.reaction_f.eval(a, b), a_k, b_k);
        let q = self.mass.iter().zip(a_n).zip(&load).map(|((&m, &a), &l)| m / dt * a + l).collect();
        let upper = self.gd.obstacle_dofs().to_vec();
        let (ha, _) = self.step_matrices(dt);
        Ok(LcpProblem::new(ha.clone(), q, upper)?)
    }

    /// Discrete residual `r = M/δt (A - A^n) + K_A A - F_load(A, B)` of the
    /// obstacle inequality.
    pub fn obstacle_residual(&self, a_n: &[T], a: &[T], b: &[T], dt: T) -> Vec<T> {
        let load = reaction_load_with_weights(&self.mass, |x, y| self.spec.reaction_f.eval(x, y), a, b);
        let ka = self.stiff_a.mul_vec(a);
        (0..a.len()).map(|i| self.mass[i] / dt * (a[i] - a_n[i]) + ka[i] - load[i]).collect()
    }

    pub fn advance(&mut self, a_n: &[T], b_n: &[T], dt: T) -> Result<StepOutcome<T>, StepError<T>> {
        self.check_time_step(dt)?;
        self.gd.check_len(a_n).map_err(|_| StepError::BadOptions("A level has wrong length".into()))?;
        self.gd.check_len(b_n).map_err(|_| StepError::BadOptions("B level has wrong length".into()))?;
        if let Some(dof) = self.gd.convex_set_violation(a_n) {
            return Err(StepError::NotInConvexSet { dof });
        }
        let chi = self.gd.obstacle_dofs().to_vec();
        let n = a_n.len();
        let mut a_k = a_n.to_vec();
        let mut b_k = b_n.to_vec();
        let mut theta = self.opts.damping;
        let mut history: Vec<T> = Vec::new();
        let (mut psor_sweeps, mut cg_iterations) = (0, 0);
        let cg_cap = 10 * n + 100;

        for k in 1..=self.opts.picard_max {
            let lcp = self.obstacle_problem(a_n, &a_k, &b_k, dt)?;
            let sol = solve_psor(&lcp, &a_k, &self.opts.psor)?;
            psor_sweeps += sol.iterations;
            if !sol.converged {
                return Err(StepError::ObstacleSolveNotConverged {
                    picard: k,
                    sign: sol.residual_sign.to_f64_lossy(),
                    comp: sol.residual_complementarity.to_f64_lossy(),
                });
            }

            let load_g = reaction_load_with_weights(&self.mass, |a, b| self.spec.reaction_g.eval(a, b), &a_k, &b_k);
            let rhs: Vec<T> = (0..n).map(|i| self.mass[i] / dt * b_n[i] + load_g[i]).collect();
            let cg_tol = self.opts.cg_tol;
            let (_, hb) = self.step_matrices(dt);
            let cg = conjugate_gradient(hb, &rhs, Some(&b_k), cg_tol, cg_cap)?;
            cg_iterations += cg.iterations;

            let mut change = T::zero();
            for i in 0..n {
                let a_next = ((T::one() - theta) * a_k[i] + theta * sol.x[i]).min(chi[i]);
                let b_next = (T::one() - theta) * b_k[i] + theta * cg.x[i];
                change = change.max((a_next - a_k[i]).abs()).max((b_next - b_k[i]).abs());
                a_k[i] = a_next;
                b_k[i] = b_next;
            }
            history.push(change);

            if change <= self.opts.picard_tol {
                let r = self.obstacle_residual(a_n, &a_k, &b_k, dt);
                let (residual_sign, residual_complementarity) = kkt_residuals(&r, &a_k, &chi);
                let contraction_violated = history.windows(2).skip(1).any(|w| w[1] > w[0]);
                return Ok(StepOutcome {
                    a: DofVector::constrained(a_k),
                    b: DofVector::free(b_k),
                    report: StepReport {
                        picard_iterations: k,
                        change_history: history,
                        psor_sweeps,
                        cg_iterations,
                        residual_sign,
                        residual_complementarity,
                        final_damping: theta,
                        contraction_violated,
                    },
                });
            }
            let len = history.len();
            if len >= 3 && history[len - 1] > history[len - 2] && history[len - 2] > history[len - 3] {
                theta = theta * T::of(0.5);
            }
        }
        Err(StepError::PicardNotConverged {
            iterations: self.opts.picard_max,
            tol: self.opts.picard_tol.to_f64_lossy(),
            last: history.last().copied().unwrap_or(T::zero()).to_f64_lossy(),
            a: DofVector::constrained(a_k),
            b: DofVector::free(b_k),
            history,
        })
    }
}

/// One implicit step from `(A^n, B^n)`.
pub fn advance_step<T: Scalar>(
    gd: &GradientDiscretisation<T>,
    spec: &ProblemSpec<T>,
    a_n: &[T],
    b_n: &[T],
    dt: T,
    opts: &StepOptions<T>,
) -> Result<StepOutcome<T>, StepError<T>> {
    Stepper::new(gd, spec, *opts)?.advance(a_n, b_n, dt)
}

/// Discrete solution: one `A` and one `B` level per time level, plus the
/// step reports.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub a: Vec<DofVector<T>>,
    pub b: Vec<DofVector<T>>,
    pub reports: Vec<StepReport<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn num_steps(&self) -> usize {
        self.reports.len()
    }

    pub fn max_residual_sign(&self) -> T {
        self.reports.iter().map(|r| r.residual_sign).fold(T::zero(), T::max)
    }

    pub fn max_residual_complementarity(&self) -> T {
        self.reports.iter().map(|r| r.residual_complementarity).fold(T::zero(), T::max)
    }

    pub fn total_picard_iterations(&self) -> usize {
        self.reports.iter().map(|r| r.picard_iterations).sum()
    }
}

#[derive(Debug, Error)]
#[error("time step {step} failed: {source}")]
pub struct EvolutionError<T: Scalar> {
    pub step: usize,
    #[source]
    pub source: StepError<T>,
    /// Levels computed before the failure.
    pub partial: Option<Trajectory<T>>,
}

/// Runs the scheme over the time grid of `gd`, starting from the clamped
/// midpoint interpolant of `A_ini` and the midpoint interpolant of `B_ini`.
pub fn solve_evolution<T: Scalar>(
    spec: &ProblemSpec<T>,
    gd: &GradientDiscretisation<T>,
    opts: &StepOptions<T>,
) -> Result<Trajectory<T>, EvolutionError<T>> {
    solve_evolution_with(spec, gd, opts, |_, _| {})
}

/// [`solve_evolution`] with a callback after each completed step.
pub fn solve_evolution_with<T: Scalar>(
    spec: &ProblemSpec<T>,
    gd: &GradientDiscretisation<T>,
    opts: &StepOptions<T>,
    mut on_step: impl FnMut(usize, &StepOutcome<T>),
) -> Result<Trajectory<T>, EvolutionError<T>> {
    let fail = |step, source, partial| EvolutionError { step, source, partial };
    let mut stepper = Stepper::new(gd, spec, *opts).map_err(|e| fail(0, e, None))?;
    let grid = gd.time_grid();
    for (n, dt) in grid.steps().enumerate() {
        stepper.check_time_step(dt).map_err(|e| fail(n, e, None))?;
    }
    let a0 = gd.interpolate(|p| (spec.a_ini)(p), true);
    let b0 = gd.interpolate(|p| (spec.b_ini)(p), false);
    let mut traj = Trajectory { a: vec![a0], b: vec![b0], reports: Vec::with_capacity(grid.num_steps()) };
    for (n, dt) in grid.steps().enumerate() {
        match stepper.advance(&traj.a[n], &traj.b[n], dt) {
            Ok(out) => {
                on_step(n, &out);
                traj.a.push(out.a);
                traj.b.push(out.b);
                traj.reports.push(out.report);
            }
            Err(e) => return Err(fail(n, e, Some(traj))),
        }
    }
    Ok(traj)
}
