//! Numerical estimators for the gradient discretisation properties and for
//! the a priori bounds satisfied by discrete solutions.
//!
//! Every supremum over `‖∇_D φ‖ = 1` is evaluated in closed form through a
//! solve with the identity-tensor stiffness matrix `K₁`:
//! `sup_φ ℓ(φ)/‖∇_D φ‖ = sqrt(bᵀK₁⁻¹b)` where `b` represents `ℓ`.
//!
//! The consistency estimators minimise the sum of squares
//! `‖Π φ - w‖² + ‖∇_D φ - ∇w‖²` and report its square root. This is within a
//! factor `√2` of the sum of the two norms: `s ≤ a + b ≤ √2 s`.

use std::io::Write;

use thiserror::Error;

use crate::assembly::{
    assemble_stiffness, assemble_stiffness_all_edges, mass_weights, mass_weights_all_edges, AssemblyError, TensorField,
};
use crate::discretisation::{DiscretisationError, GradientDiscretisation, SpaceTimeField};
use crate::quadrature::integrate_triangle;
use crate::scalar::{dot_slices, inf_norm, Scalar, Vec2};
use crate::sparse::SparseSymMatrix;
use crate::stepper::Trajectory;
use crate::vi_solver::{solve_psor, solve_spd, LcpProblem, PsorOptions, SolverError};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Discretisation(#[from] DiscretisationError),
    #[error("quadrature of the target field produced a non-finite value on cell {cell}")]
    NonFiniteQuadrature { cell: usize },
    #[error("constrained minimisation did not converge (sign residual {sign:e}, complementarity {comp:e})")]
    ConstrainedSolveNotConverged { sign: f64, comp: f64 },
}

/// Which discrete space the consistency minimisation runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryMode {
    /// Interior-edge DOFs only, homogeneous Dirichlet values on the boundary.
    #[default]
    Homogeneous,
    /// Every edge is free (no boundary condition).
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyOptions<T> {
    /// Minimise over the discrete convex set `{φ ≤ χ_D}` instead of the
    /// whole space.
    pub constrained: bool,
    pub boundary: BoundaryMode,
    pub psor: PsorOptions<T>,
    pub cg_tol: T,
}

impl<T: Scalar> Default for ConsistencyOptions<T> {
    fn default() -> Self {
        Self {
            constrained: false,
            boundary: BoundaryMode::Homogeneous,
            psor: PsorOptions { tol: T::of(1e-13), ..Default::default() },
            cg_tol: T::of(1e-14),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyEstimate<T> {
    pub value: T,
    /// Minimiser: one value per DOF, or per edge in [`BoundaryMode::Free`].
    pub minimiser: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityEstimate<T> {
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions<T> {
    pub rel_tol: T,
    pub max_iter: usize,
    pub cg_tol: T,
}

impl<T: Scalar> Default for PowerOptions<T> {
    fn default() -> Self {
        Self { rel_tol: T::of(1e-8), max_iter: 1000, cg_tol: T::of(1e-13) }
    }
}

/// Mass and identity-tensor stiffness of one discretisation.
#[derive(Debug, Clone)]
pub struct Diagnostics<'a, T> {
    gd: &'a GradientDiscretisation<T>,
    mass: Vec<T>,
    stiffness: SparseSymMatrix<T>,
    solve_tol: T,
}

impl<'a, T: Scalar> Diagnostics<'a, T> {
    pub fn new(gd: &'a GradientDiscretisation<T>) -> Result<Self, DiagnosticsError> {
        Ok(Self {
            gd,
            mass: mass_weights(gd),
            stiffness: assemble_stiffness(gd, &TensorField::identity())?,
            solve_tol: T::of(1e-13),
        })
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn stiffness(&self) -> &SparseSymMatrix<T> {
        &self.stiffness
    }

    /// `‖Π_D v‖_{L²}`.
    pub fn value_norm(&self, v: &[T]) -> T {
        v.iter().zip(&self.mass).map(|(&x, &m)| m * x * x).sum::<T>().sqrt()
    }

    /// `‖∇_D v‖_{L²}`.
    pub fn gradient_norm(&self, v: &[T]) -> T {
        self.stiffness.quad_form(v).max(T::zero()).sqrt()
    }

    /// `sqrt(bᵀ K₁⁻¹ b)`: the norm of the functional `φ ↦ bᵀφ` relative to
    /// `‖∇_D φ‖`.
    pub fn functional_norm(&self, b: &[T]) -> Result<T, DiagnosticsError> {
        let z = solve_spd(&self.stiffness, b, self.solve_tol)?;
        Ok(dot_slices(b, &z).max(T::zero()).sqrt())
    }

    /// Discrete Poincaré constant `C_D = max ‖Π_D φ‖ / ‖∇_D φ‖`, as the square
    /// root of the largest eigenvalue of `K₁⁻¹M` by power iteration.
    pub fn coercivity(&self, opts: &PowerOptions<T>) -> Result<CoercivityEstimate<T>, DiagnosticsError> {
        let n = self.gd.num_dofs();
        let mut v = vec![T::one(); n];
        let mut lambda = T::zero();
        for it in 1..=opts.max_iter {
            let mv: Vec<T> = v.iter().zip(&self.mass).map(|(&x, &m)| m * x).collect();
            let w = solve_spd(&self.stiffness, &mv, opts.cg_tol)?;
            let scale = inf_norm(&w);
            v = w.into_iter().map(|x| x / scale).collect();
            let next = self.value_norm(&v).powi(2) / self.stiffness.quad_form(&v);
            if (next - lambda).abs() <= opts.rel_tol * next {
                return Ok(CoercivityEstimate { value: next.sqrt(), iterations: it, converged: true });
            }
            lambda = next;
        }
        Ok(CoercivityEstimate { value: lambda.sqrt(), iterations: opts.max_iter, converged: false })
    }

    /// `S_D(w)` (constrained) or `S̃_D(w)` (unconstrained), as the root of the
    /// minimal sum of squares.
    pub fn consistency(
        &self,
        w: impl Fn(Vec2<T>) -> T,
        grad_w: impl Fn(Vec2<T>) -> Vec2<T>,
        opts: &ConsistencyOptions<T>,
    ) -> Result<ConsistencyEstimate<T>, DiagnosticsError> {
        let gd = self.gd;
        let mesh = gd.mesh();
        let (mass, stiff, upper, index): (Vec<T>, SparseSymMatrix<T>, Vec<T>, Box<dyn Fn(usize) -> Option<usize>>) =
            match opts.boundary {
                BoundaryMode::Homogeneous => (
                    self.mass.clone(),
                    self.stiffness.clone(),
                    gd.obstacle_dofs().to_vec(),
                    Box::new(|e| gd.dof_of_edge(e)),
                ),
                BoundaryMode::Free => (
                    mass_weights_all_edges(gd),
                    assemble_stiffness_all_edges(gd, &TensorField::identity())?,
                    gd.obstacle_edges().to_vec(),
                    Box::new(Some),
                ),
            };
        let dim = mass.len();
        let mut rhs = vec![T::zero(); dim];
        let two = T::of(2.0);
        for c in 0..mesh.num_cells() {
            let pts = mesh.cell_points(c);
            let grads = gd.basis_gradients(c);
            for (i, ce) in mesh.cell_edges(c).iter().enumerate() {
                let Some(d) = index(ce.edge) else { continue };
                let v = integrate_triangle(&pts, mesh.cell_area(c), |p, l| {
                    let gw = grad_w(p);
                    w(p) * (T::one() - two * l[i]) + gw[0] * grads[i][0] + gw[1] * grads[i][1]
                });
                if !v.is_finite() {
                    return Err(DiagnosticsError::NonFiniteQuadrature { cell: c });
                }
                rhs[d] += v;
            }
        }
        let system = SparseSymMatrix::linear_combination(T::one(), &SparseSymMatrix::from_diagonal(&mass), T::one(), &stiff);
        let minimiser = if opts.constrained {
            let lcp = LcpProblem::new(system, rhs, upper.clone())?;
            let x0: Vec<T> = upper.iter().map(|&u| u.min(T::zero())).collect();
            let sol = solve_psor(&lcp, &x0, &opts.psor)?;
            if !sol.converged {
                return Err(DiagnosticsError::ConstrainedSolveNotConverged {
                    sign: sol.residual_sign.to_f64_lossy(),
                    comp: sol.residual_complementarity.to_f64_lossy(),
                });
            }
            sol.x
        } else {
            solve_spd(&system, &rhs, opts.cg_tol)?
        };
        let value = self.consistency_functional(&minimiser, &w, &grad_w, opts.boundary);
        Ok(ConsistencyEstimate { value, minimiser })
    }

    /// `sqrt(‖Π φ - w‖² + ‖∇_D φ - ∇w‖²)` for a given discrete `φ`, by
    /// seven-point quadrature on every cell.
    pub fn consistency_functional(
        &self,
        phi: &[T],
        w: impl Fn(Vec2<T>) -> T,
        grad_w: impl Fn(Vec2<T>) -> Vec2<T>,
        boundary: BoundaryMode,
    ) -> T {
        let gd = self.gd;
        let mesh = gd.mesh();
        let mut total = T::zero();
        for c in 0..mesh.num_cells() {
            let local = match boundary {
                BoundaryMode::Homogeneous => gd.local_values(phi, c),
                BoundaryMode::Free => mesh.cell_edges(c).map(|ce| phi[ce.edge]),
            };
            let g = gd.gradient_in_cell(c, local);
            total += integrate_triangle(&mesh.cell_points(c), mesh.cell_area(c), |p, _| {
                let e = gd.value_in_cell(c, local, p) - w(p);
                let gw = grad_w(p);
                let (dx, dy) = (g[0] - gw[0], g[1] - gw[1]);
                e * e + dx * dx + dy * dy
            });
        }
        total.max(T::zero()).sqrt()
    }

    /// Representation `b_σ = ∫ (∇_D e_σ·ψ + Π_D e_σ div ψ)` of the Stokes-formula
    /// defect.
    pub fn limit_conformity_functional(
        &self,
        psi: impl Fn(Vec2<T>) -> Vec2<T>,
        div_psi: impl Fn(Vec2<T>) -> T,
    ) -> Vec<T> {
        let gd = self.gd;
        let mesh = gd.mesh();
        let mut b = vec![T::zero(); gd.num_dofs()];
        let two = T::of(2.0);
        for c in 0..mesh.num_cells() {
            let pts = mesh.cell_points(c);
            let grads = gd.basis_gradients(c);
            for (i, d) in gd.local_dofs(c).iter().enumerate() {
                let Some(d) = d else { continue };
                b[*d] += integrate_triangle(&pts, mesh.cell_area(c), |p, l| {
                    let s = psi(p);
                    grads[i][0] * s[0] + grads[i][1] * s[1] + (T::one() - two * l[i]) * div_psi(p)
                });
            }
        }
        b
    }

    /// `W_D(ψ)`.
    pub fn limit_conformity(
        &self,
        psi: impl Fn(Vec2<T>) -> Vec2<T>,
        div_psi: impl Fn(Vec2<T>) -> T,
    ) -> Result<T, DiagnosticsError> {
        let b = self.limit_conformity_functional(psi, div_psi);
        if b.iter().all(|&x| x == T::zero()) {
            return Ok(T::zero());
        }
        self.functional_norm(&b)
    }

    /// `‖Π_D u‖_{⋆,D} = sup { ∫ Π_D u Π_D ψ : ‖∇_D ψ‖ = 1 }`.
    pub fn dual_norm(&self, u: &[T]) -> Result<T, DiagnosticsError> {
        self.gd.check_len(u)?;
        if u.iter().all(|&x| x == T::zero()) {
            return Ok(T::zero());
        }
        let b: Vec<T> = u.iter().zip(&self.mass).map(|(&x, &m)| m * x).collect();
        self.functional_norm(&b)
    }

    /// The four norms bounded by the energy estimate, the time integral of
    /// the squared dual norm of `δ_D B`, and the trajectory's complementarity
    /// residual maxima.
    pub fn energy_report(&self, traj: &Trajectory<T>) -> Result<EnergyReport<T>, DiagnosticsError> {
        let grid = self.gd.time_grid();
        let a = SpaceTimeField::new(self.gd, &traj.a)?;
        let b = SpaceTimeField::new(self.gd, &traj.b)?;
        let mut dt_a_sq = T::zero();
        let mut grad_b_sq = T::zero();
        let mut dual_integral = T::zero();
        for (n, dt) in grid.steps().enumerate() {
            dt_a_sq += dt * self.value_norm(&a.derivative_dofs(n)).powi(2);
            grad_b_sq += dt * self.stiffness.quad_form(&traj.b[n + 1]);
            dual_integral += dt * self.dual_norm(&b.derivative_dofs(n))?.powi(2);
        }
        let sup = |levels: &[_], f: &dyn Fn(&[T]) -> T| {
            levels.iter().map(|l: &crate::discretisation::DofVector<T>| f(l)).fold(T::zero(), T::max)
        };
        Ok(EnergyReport {
            time_derivative_a: dt_a_sq.sqrt(),
            gradient_a_sup: sup(&traj.a, &|v| self.gradient_norm(v)),
            value_b_sup: sup(&traj.b, &|v| self.value_norm(v)),
            gradient_b_l2: grad_b_sq.max(T::zero()).sqrt(),
            dual_norm_integral: dual_integral,
            max_residual_sign: traj.max_residual_sign(),
            max_residual_complementarity: traj.max_residual_complementarity(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport<T> {
    /// `‖δ_D A‖_{L²(Ω×(0,T))}`.
    pub time_derivative_a: T,
    /// `‖∇_D A‖_{L∞(0,T;L²)}`.
    pub gradient_a_sup: T,
    /// `‖Π_D B‖_{L∞(0,T;L²)}`.
    pub value_b_sup: T,
    /// `‖∇_D B‖_{L²(Ω×(0,T))}`.
    pub gradient_b_l2: T,
    /// `∫_0^T ‖δ_D B‖²_{⋆,D} dt`.
    pub dual_norm_integral: T,
    pub max_residual_sign: T,
    pub max_residual_complementarity: T,
}

impl<T: Scalar> EnergyReport<T> {
    pub fn rows(&self) -> Vec<(&'static str, T)> {
        vec![
            ("energy.time_derivative_a_l2l2", self.time_derivative_a),
            ("energy.gradient_a_linf_l2", self.gradient_a_sup),
            ("energy.value_b_linf_l2", self.value_b_sup),
            ("energy.gradient_b_l2l2", self.gradient_b_l2),
            ("dual.time_derivative_b_integral", self.dual_norm_integral),
            ("complementarity.max_sign_residual", self.max_residual_sign),
            ("complementarity.max_product_residual", self.max_residual_complementarity),
        ]
    }
}

pub fn estimate_coercivity<T: Scalar>(gd: &GradientDiscretisation<T>) -> Result<CoercivityEstimate<T>, DiagnosticsError> {
    Diagnostics::new(gd)?.coercivity(&PowerOptions::default())
}

pub fn estimate_consistency<T: Scalar>(
    gd: &GradientDiscretisation<T>,
    w: impl Fn(Vec2<T>) -> T,
    grad_w: impl Fn(Vec2<T>) -> Vec2<T>,
    opts: &ConsistencyOptions<T>,
) -> Result<T, DiagnosticsError> {
    Ok(Diagnostics::new(gd)?.consistency(w, grad_w, opts)?.value)
}

pub fn estimate_limit_conformity<T: Scalar>(
    gd: &GradientDiscretisation<T>,
    psi: impl Fn(Vec2<T>) -> Vec2<T>,
    div_psi: impl Fn(Vec2<T>) -> T,
) -> Result<T, DiagnosticsError> {
    Diagnostics::new(gd)?.limit_conformity(psi, div_psi)
}

pub fn dual_norm<T: Scalar>(gd: &GradientDiscretisation<T>, u: &[T]) -> Result<T, DiagnosticsError> {
    Diagnostics::new(gd)?.dual_norm(u)
}

pub fn energy_report<T: Scalar>(
    gd: &GradientDiscretisation<T>,
    traj: &Trajectory<T>,
) -> Result<EnergyReport<T>, DiagnosticsError> {
    Diagnostics::new(gd)?.energy_report(traj)
}

/// Collected diagnostics for one discretisation level.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsReport<T> {
    pub coercivity: Option<T>,
    pub consistency: Vec<(String, T)>,
    pub limit_conformity: Vec<(String, T)>,
    pub energy: Option<EnergyReport<T>>,
}

impl<T: Scalar> DiagnosticsReport<T> {
    /// Metric name and value, in a fixed order.
    pub fn rows(&self) -> Vec<(String, T)> {
        let mut rows = Vec::new();
        if let Some(c) = self.coercivity {
            rows.push(("coercivity.C_D".to_string(), c));
        }
        rows.extend(self.consistency.iter().map(|(k, v)| (format!("consistency.{k}"), *v)));
        rows.extend(self.limit_conformity.iter().map(|(k, v)| (format!("limit_conformity.{k}"), *v)));
        if let Some(e) = &self.energy {
            rows.extend(e.rows().into_iter().map(|(k, v)| (k.to_string(), v)));
        }
        rows
    }

    /// Every entry is finite and nonnegative.
    pub fn is_well_formed(&self) -> bool {
        self.rows().iter().all(|(_, v)| v.is_finite() && *v >= T::zero())
    }

    pub fn write_csv<W: Write>(&self, mut out: W, level: usize, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "quantity,level,value_nondimensional")?;
        }
        for (k, v) in self.rows() {
            writeln!(out, "{k},{level},{v:.12e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretisation::{DofVector, TimeGrid};
    use crate::mesh::Mesh;
    use crate::stepper::StepReport;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn gd(n: usize) -> GradientDiscretisation<f64> {
        let mesh = Arc::new(Mesh::unit_square(n).unwrap());
        GradientDiscretisation::crouzeix_raviart(mesh, TimeGrid::uniform(1.0, 2).unwrap(), |_| 1.0).unwrap()
    }

    #[test]
    fn coercivity_dominates_rayleigh_samples() {
        let g = gd(4);
        let d = Diagnostics::new(&g).unwrap();
        let c = d.coercivity(&PowerOptions::default()).unwrap();
        assert!(c.converged && c.value > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let v: Vec<f64> = (0..g.num_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(d.value_norm(&v) / d.gradient_norm(&v) <= c.value * (1.0 + 1e-12));
        }
    }

    #[test]
    fn zero_targets() {
        let g = gd(3);
        let d = Diagnostics::new(&g).unwrap();
        let z = d.consistency(|_| 0.0, |_| [0.0, 0.0], &ConsistencyOptions::default()).unwrap();
        assert_eq!(z.value, 0.0);
        let opts = ConsistencyOptions { constrained: true, ..Default::default() };
        assert!(d.consistency(|_| 0.0, |_| [0.0, 0.0], &opts).unwrap().value < 1e-14);
        assert_eq!(d.limit_conformity(|_| [0.0, 0.0], |_| 0.0).unwrap(), 0.0);
        assert_eq!(d.dual_norm(&vec![0.0; g.num_dofs()]).unwrap(), 0.0);
    }

    #[test]
    fn reconstructed_field_has_zero_consistency() {
        let g = gd(3);
        let d = Diagnostics::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v: Vec<f64> = (0..g.num_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let locate = crate::mesh::PointLocator::new(g.mesh());
        // the target is Π_D v itself, evaluated through point location
        let w = |p: Vec2<f64>| {
            let c = locate.locate(g.mesh(), p).unwrap();
            g.value_in_cell(c, g.local_values(&v, c), p)
        };
        let grad = |p: Vec2<f64>| g.reconstruct_gradient(&v, locate.locate(g.mesh(), p).unwrap());
        // quadrature points are interior, so the located cell is the owning cell
        let s = d.consistency(w, grad, &ConsistencyOptions::default()).unwrap();
        assert!(s.value <= 1e-10, "{}", s.value);
    }

    #[test]
    fn affine_field_free_boundary() {
        let g = gd(4);
        let d = Diagnostics::new(&g).unwrap();
        let opts = ConsistencyOptions { boundary: BoundaryMode::Free, ..Default::default() };
        let s = d.consistency(|p| 1.0 + 2.0 * p[0] - 3.0 * p[1], |_| [2.0, -3.0], &opts).unwrap();
        assert!(s.value <= 1e-10, "{}", s.value);
    }

    #[test]
    fn limit_conformity_homogeneous_and_zero_for_constants() {
        let g = gd(4);
        let d = Diagnostics::new(&g).unwrap();
        let psi = |p: Vec2<f64>| [p[0] * p[1], (3.0 * p[0]).sin()];
        let div = |p: Vec2<f64>| p[1];
        let w1 = d.limit_conformity(psi, div).unwrap();
        let w3 = d.limit_conformity(|p| psi(p).map(|x| 3.0 * x), |p| 3.0 * div(p)).unwrap();
        assert!((w3 - 3.0 * w1).abs() < 1e-12);
        let wc = d.limit_conformity(|_| [0.3, -0.7], |_| 0.0).unwrap();
        assert!((0.0..1e-13).contains(&wc));
    }

    #[test]
    fn dual_norm_is_a_norm() {
        let g = gd(3);
        let d = Diagnostics::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = g.num_dofs();
        for _ in 0..10 {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let uv: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
            let (nu, nv, nuv) = (d.dual_norm(&u).unwrap(), d.dual_norm(&v).unwrap(), d.dual_norm(&uv).unwrap());
            assert!(nuv <= nu + nv + 1e-10);
            let su: Vec<f64> = u.iter().map(|x| -2.5 * x).collect();
            assert!((d.dual_norm(&su).unwrap() - 2.5 * nu).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_report_trivial_trajectories() {
        let g = gd(3);
        let d = Diagnostics::new(&g).unwrap();
        let n = g.num_dofs();
        let levels = g.time_grid().num_steps() + 1;
        let report = StepReport {
            picard_iterations: 1,
            change_history: vec![0.0],
            psor_sweeps: 1,
            cg_iterations: 0,
            residual_sign: 0.0,
            residual_complementarity: 0.0,
            final_damping: 1.0,
            contraction_violated: false,
        };
        let zero = Trajectory {
            a: vec![DofVector::constrained(vec![0.0; n]); levels],
            b: vec![DofVector::free(vec![0.0; n]); levels],
            reports: vec![report.clone(); levels - 1],
        };
        let e = d.energy_report(&zero).unwrap();
        assert!(e.rows().iter().all(|(_, v)| *v == 0.0));

        let a = g.interpolate(|p| (std::f64::consts::PI * p[0]).sin() * p[1] * (1.0 - p[1]), false);
        let constant = Trajectory { a: vec![a.clone(); levels], ..zero };
        let e = d.energy_report(&constant).unwrap();
        assert_eq!(e.time_derivative_a, 0.0);
        assert!((e.gradient_a_sup - d.gradient_norm(&a)).abs() < 1e-15);
    }

    #[test]
    fn report_csv_rows() {
        let r = DiagnosticsReport {
            coercivity: Some(0.25),
            consistency: vec![("sine.unconstrained".into(), 0.5)],
            limit_conformity: vec![],
            energy: None,
        };
        let mut buf = Vec::new();
        r.write_csv(&mut buf, 2, true).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s,
            "quantity,level,value_nondimensional\ncoercivity.C_D,2,2.500000000000e-1\nconsistency.sine.unconstrained,2,5.000000000000e-1\n"
        );
        assert!(r.is_well_formed());
    }
}
