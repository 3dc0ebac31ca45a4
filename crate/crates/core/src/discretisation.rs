//! Nonconforming P1 (Crouzeix-Raviart) gradient discretisation.
//!
//! Unknowns live on edge midpoints. Boundary edges carry the homogeneous
//! Dirichlet value and are not degrees of freedom; interior edges are numbered
//! in canonical edge order. On a cell `K` with local edge `i` opposite vertex
//! `i`, the basis function is `e_i = 1 - 2 λ_i`, so the reconstruction is
//! affine on each cell and takes the value `w_σ` at the midpoint of `σ`.

use std::io::{BufRead, Write};
use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use thiserror::Error;

use crate::mesh::{Mesh, MeshError};
use crate::quadrature::segment_average;
use crate::scalar::{Scalar, Vec2};

#[derive(Debug, Error)]
pub enum DiscretisationError {
    #[error("time grid needs at least one step")]
    EmptyTimeGrid,
    #[error("time grid must start at 0 and be strictly increasing (violated at index {index})")]
    BadTimeGrid { index: usize },
    #[error("obstacle is negative ({value:e}) on boundary edge {edge}; it must be nonnegative on the domain boundary")]
    NegativeObstacleOnBoundary { edge: usize, value: f64 },
    #[error("obstacle is not finite on edge {edge}")]
    NonFiniteObstacle { edge: usize },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("trajectory needs {expected} levels for this time grid, got {got}")]
    LevelCountMismatch { expected: usize, got: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Time levels `0 = t_0 < t_1 < ... < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<T> {
    times: Vec<T>,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn uniform(horizon: T, steps: usize) -> Result<Self, DiscretisationError> {
        if steps == 0 {
            return Err(DiscretisationError::EmptyTimeGrid);
        }
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(DiscretisationError::BadTimeGrid { index: steps });
        }
        let dt = horizon / T::of_usize(steps);
        let mut times: Vec<T> = (0..steps).map(|n| T::of_usize(n) * dt).collect();
        times.push(horizon);
        Ok(Self { times })
    }

    pub fn from_times(times: Vec<T>) -> Result<Self, DiscretisationError> {
        if times.len() < 2 {
            return Err(DiscretisationError::EmptyTimeGrid);
        }
        if times[0] != T::zero() {
            return Err(DiscretisationError::BadTimeGrid { index: 0 });
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(DiscretisationError::BadTimeGrid { index: i + 1 });
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn num_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> T {
        *self.times.last().unwrap()
    }

    /// Length of step `n`, i.e. `t_{n+1} - t_n`.
    pub fn step(&self, n: usize) -> T {
        self.times[n + 1] - self.times[n]
    }

    pub fn steps(&self) -> impl Iterator<Item = T> + '_ {
        self.times.windows(2).map(|w| w[1] - w[0])
    }

    pub fn max_step(&self) -> T {
        self.steps().fold(T::zero(), T::max)
    }

    /// Level whose value represents time `t`: `0` at `t = 0`, `n + 1` on
    /// `(t_n, t_{n+1}]`. Times beyond the horizon map to the last level.
    pub fn level_at(&self, t: T) -> usize {
        if t <= self.times[0] {
            return 0;
        }
        self.times.partition_point(|&s| s < t).min(self.num_steps())
    }
}

/// Whether a DOF vector is an obstacle-constrained field (member of the
/// discrete convex set) or an unconstrained one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldRole {
    Constrained,
    #[default]
    Free,
}

/// Values on the interior edges of a discretisation, one per DOF.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DofVector<T> {
    pub values: Vec<T>,
    pub role: FieldRole,
}

impl<T: Scalar> DofVector<T> {
    pub fn free(values: Vec<T>) -> Self {
        Self { values, role: FieldRole::Free }
    }

    pub fn constrained(values: Vec<T>) -> Self {
        Self { values, role: FieldRole::Constrained }
    }

    pub fn zeros(n: usize, role: FieldRole) -> Self {
        Self { values: vec![T::zero(); n], role }
    }

    /// One value per line in canonical edge order.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut s = String::with_capacity(self.values.len() * 24);
        for v in &self.values {
            s.push_str(&v.to_string());
            s.push('\n');
        }
        out.write_all(s.as_bytes())
    }

    pub fn read_text<R: BufRead>(input: R, role: FieldRole) -> Result<Self, DiscretisationError> {
        let mut values = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let v: f64 = t
                .parse()
                .map_err(|_| DiscretisationError::Parse { line: i + 1, msg: format!("not a number: {t:?}") })?;
            values.push(T::of(v));
        }
        Ok(Self { values, role })
    }
}

impl<T> Deref for DofVector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.values
    }
}

impl<T> DerefMut for DofVector<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.values
    }
}

/// The discrete space, reconstruction operators, discrete obstacle,
/// interpolants and time grid of the Crouzeix-Raviart scheme.
#[derive(Debug, Clone)]
pub struct GradientDiscretisation<T> {
    mesh: Arc<Mesh<T>>,
    dof_of_edge: Vec<Option<usize>>,
    edge_of_dof: Vec<usize>,
    basis_gradients: Vec<[Vec2<T>; 3]>,
    obstacle_edges: Vec<T>,
    obstacle_dofs: Vec<T>,
    time_grid: TimeGrid<T>,
}

impl<T: Scalar> GradientDiscretisation<T> {
    /// Builds the Crouzeix-Raviart discretisation. The discrete obstacle on
    /// each edge is the edge average of `obstacle` (two-point Gauss).
    pub fn crouzeix_raviart(
        mesh: Arc<Mesh<T>>,
        time_grid: TimeGrid<T>,
        obstacle: impl Fn(Vec2<T>) -> T,
    ) -> Result<Self, DiscretisationError> {
        let mut dof_of_edge = vec![None; mesh.num_edges()];
        let mut edge_of_dof = Vec::new();
        let mut obstacle_edges = Vec::with_capacity(mesh.num_edges());
        for (i, e) in mesh.edges().iter().enumerate() {
            let [a, b] = e.vertices.map(|v| mesh.vertices()[v]);
            let avg = segment_average(a, b, &obstacle);
            if !avg.is_finite() {
                return Err(DiscretisationError::NonFiniteObstacle { edge: i });
            }
            if e.boundary {
                let samples = [obstacle(a), obstacle(b), obstacle(e.midpoint), avg];
                if let Some(v) = samples.into_iter().find(|v| *v < T::zero()) {
                    return Err(DiscretisationError::NegativeObstacleOnBoundary { edge: i, value: v.to_f64_lossy() });
                }
            } else {
                dof_of_edge[i] = Some(edge_of_dof.len());
                edge_of_dof.push(i);
            }
            obstacle_edges.push(avg);
        }
        let obstacle_dofs = edge_of_dof.iter().map(|&e| obstacle_edges[e]).collect();

        let basis_gradients = (0..mesh.num_cells())
            .map(|c| {
                let p = mesh.cell_points(c);
                let two_area = mesh.cell_area(c) * T::of(2.0);
                std::array::from_fn(|i| {
                    let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                    // ∇e_i = -2 ∇λ_i
                    let grad_lambda = [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area];
                    [-T::of(2.0) * grad_lambda[0], -T::of(2.0) * grad_lambda[1]]
                })
            })
            .collect();

        Ok(Self { mesh, dof_of_edge, edge_of_dof, basis_gradients, obstacle_edges, obstacle_dofs, time_grid })
    }

    pub fn mesh(&self) -> &Mesh<T> {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn time_grid(&self) -> &TimeGrid<T> {
        &self.time_grid
    }

    /// Same space and obstacle with a different time grid.
    pub fn with_time_grid(&self, time_grid: TimeGrid<T>) -> Self {
        Self { time_grid, ..self.clone() }
    }

    pub fn num_dofs(&self) -> usize {
        self.edge_of_dof.len()
    }

    pub fn dof_of_edge(&self, edge: usize) -> Option<usize> {
        self.dof_of_edge[edge]
    }

    pub fn edge_of_dof(&self, dof: usize) -> usize {
        self.edge_of_dof[dof]
    }

    /// DOF indices of the three local edges of `cell` (`None` on the boundary).
    pub fn local_dofs(&self, cell: usize) -> [Option<usize>; 3] {
        self.mesh.cell_edges(cell).map(|ce| self.dof_of_edge[ce.edge])
    }

    /// Constant gradients of the three local basis functions of `cell`.
    pub fn basis_gradients(&self, cell: usize) -> &[Vec2<T>; 3] {
        &self.basis_gradients[cell]
    }

    /// Discrete obstacle on every edge (including boundary edges).
    pub fn obstacle_edges(&self) -> &[T] {
        &self.obstacle_edges
    }

    /// Discrete obstacle on each DOF.
    pub fn obstacle_dofs(&self) -> &[T] {
        &self.obstacle_dofs
    }

    /// Local values of a DOF vector on `cell`; boundary edges contribute 0.
    pub fn local_values(&self, v: &[T], cell: usize) -> [T; 3] {
        self.local_dofs(cell).map(|d| d.map_or(T::zero(), |d| v[d]))
    }

    /// Evaluates the affine reconstruction on `cell` from its three local edge
    /// values. No containment check: points outside the cell extrapolate.
    pub fn value_in_cell(&self, cell: usize, local: [T; 3], p: Vec2<T>) -> T {
        let l = self.mesh.barycentric(cell, p);
        (0..3).map(|i| local[i] * (T::one() - T::of(2.0) * l[i])).sum()
    }

    pub fn gradient_in_cell(&self, cell: usize, local: [T; 3]) -> Vec2<T> {
        let g = &self.basis_gradients[cell];
        let mut out = [T::zero(); 2];
        for i in 0..3 {
            out[0] += local[i] * g[i][0];
            out[1] += local[i] * g[i][1];
        }
        out
    }

    /// `Π_D v` at a point of `cell`.
    pub fn reconstruct_value(&self, v: &[T], cell: usize, p: Vec2<T>) -> Result<T, DiscretisationError> {
        self.check_len(v)?;
        if !self.mesh.contains(cell, p) {
            return Err(MeshError::PointOutsideCell { cell, x: p[0].to_f64_lossy(), y: p[1].to_f64_lossy() }.into());
        }
        Ok(self.value_in_cell(cell, self.local_values(v, cell), p))
    }

    /// `∇_D v` on `cell` (constant per cell).
    pub fn reconstruct_gradient(&self, v: &[T], cell: usize) -> Vec2<T> {
        self.gradient_in_cell(cell, self.local_values(v, cell))
    }

    /// Midpoint interpolant of `w`. With `clamp_to_obstacle`, each value is
    /// additionally capped by the discrete obstacle, so the result lies in the
    /// discrete convex set.
    pub fn interpolate(&self, w: impl Fn(Vec2<T>) -> T, clamp_to_obstacle: bool) -> DofVector<T> {
        let edges = self.mesh.edges();
        let values = self
            .edge_of_dof
            .iter()
            .zip(&self.obstacle_dofs)
            .map(|(&e, &chi)| {
                let z = w(edges[e].midpoint);
                if clamp_to_obstacle {
                    z.min(chi)
                } else {
                    z
                }
            })
            .collect();
        DofVector { values, role: if clamp_to_obstacle { FieldRole::Constrained } else { FieldRole::Free } }
    }

    /// Interpolant onto every edge, boundary included (no boundary condition).
    pub fn interpolate_all_edges(&self, w: impl Fn(Vec2<T>) -> T) -> Vec<T> {
        self.mesh.edges().iter().map(|e| w(e.midpoint)).collect()
    }

    /// Index of the first DOF violating `v ≤ χ_D`, if any.
    pub fn convex_set_violation(&self, v: &[T]) -> Option<usize> {
        v.iter().zip(&self.obstacle_dofs).position(|(x, chi)| !(*x <= *chi))
    }

    pub fn in_convex_set(&self, v: &[T]) -> bool {
        v.len() == self.num_dofs() && self.convex_set_violation(v).is_none()
    }

    /// Scatters DOF values onto all edges; boundary edges get zero.
    pub fn expand_to_edges(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.mesh.num_edges()];
        for (d, &e) in self.edge_of_dof.iter().enumerate() {
            out[e] = v[d];
        }
        out
    }

    pub(crate) fn check_len(&self, v: &[T]) -> Result<(), DiscretisationError> {
        if v.len() != self.num_dofs() {
            return Err(DiscretisationError::LengthMismatch { expected: self.num_dofs(), got: v.len() });
        }
        Ok(())
    }
}

/// Piecewise-constant-in-time reconstruction of a sequence of DOF vectors
/// together with its discrete time derivative.
#[derive(Debug, Clone, Copy)]
pub struct SpaceTimeField<'a, T> {
    gd: &'a GradientDiscretisation<T>,
    levels: &'a [DofVector<T>],
}

impl<'a, T: Scalar> SpaceTimeField<'a, T> {
    pub fn new(gd: &'a GradientDiscretisation<T>, levels: &'a [DofVector<T>]) -> Result<Self, DiscretisationError> {
        let expected = gd.time_grid().num_steps() + 1;
        if levels.len() != expected {
            return Err(DiscretisationError::LevelCountMismatch { expected, got: levels.len() });
        }
        for l in levels {
            gd.check_len(l)?;
        }
        Ok(Self { gd, levels })
    }

    pub fn levels(&self) -> &'a [DofVector<T>] {
        self.levels
    }

    /// DOF vector representing time `t`.
    pub fn at(&self, t: T) -> &'a DofVector<T> {
        &self.levels[self.gd.time_grid().level_at(t)]
    }

    pub fn value(&self, cell: usize, p: Vec2<T>, t: T) -> Result<T, DiscretisationError> {
        self.gd.reconstruct_value(self.at(t), cell, p)
    }

    pub fn gradient(&self, cell: usize, t: T) -> Vec2<T> {
        self.gd.reconstruct_gradient(self.at(t), cell)
    }

    /// DOFs of `(v_{n+1} - v_n) / δt_{n+1/2}`; by linearity of the
    /// reconstruction this is the discrete derivative on `(t_n, t_{n+1}]`.
    pub fn derivative_dofs(&self, n: usize) -> Vec<T> {
        let dt = self.gd.time_grid().step(n);
        self.levels[n + 1].iter().zip(self.levels[n].iter()).map(|(&b, &a)| (b - a) / dt).collect()
    }

    /// Discrete time derivative at `(p, t)`; `t` must be positive.
    pub fn derivative_value(&self, cell: usize, p: Vec2<T>, t: T) -> Result<T, DiscretisationError> {
        let level = self.gd.time_grid().level_at(t).max(1);
        self.gd.reconstruct_value(&self.derivative_dofs(level - 1), cell, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gd(n: usize, chi: impl Fn(Vec2<f64>) -> f64) -> GradientDiscretisation<f64> {
        let mesh = Arc::new(Mesh::unit_square(n).unwrap());
        GradientDiscretisation::crouzeix_raviart(mesh, TimeGrid::uniform(1.0, 4).unwrap(), chi).unwrap()
    }

    fn random_point_in(rng: &mut ChaCha8Rng, pts: &[Vec2<f64>; 3]) -> Vec2<f64> {
        let (mut a, mut b): (f64, f64) = (rng.gen(), rng.gen());
        if a + b > 1.0 {
            a = 1.0 - a;
            b = 1.0 - b;
        }
        let l = [1.0 - a - b, a, b];
        crate::quadrature::from_barycentric(pts, &l)
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::<f64>::uniform(1.0, 0).is_err());
        assert!(TimeGrid::from_times(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(TimeGrid::from_times(vec![0.1, 0.5]).is_err());
        let g = TimeGrid::from_times(vec![0.0, 0.1, 0.4, 1.0]).unwrap();
        assert_eq!(g.num_steps(), 3);
        assert!((g.max_step() - 0.6f64).abs() < 1e-15);
        assert_eq!(g.level_at(0.0), 0);
        assert_eq!(g.level_at(0.05), 1);
        assert_eq!(g.level_at(0.1), 1);
        assert_eq!(g.level_at(0.11), 2);
        assert_eq!(g.level_at(1.0), 3);
    }

    #[test]
    fn obstacle_edge_averages() {
        let g = gd(1, |_| 0.7);
        assert!(g.obstacle_edges().iter().all(|&c| (c - 0.7).abs() < 1e-15));
        let g = gd(1, |p| p[0]);
        let bottom = g.mesh().edges().iter().position(|e| e.vertices == [0, 1]).unwrap();
        assert!((g.obstacle_edges()[bottom] - 0.5).abs() < 1e-15);
        let g = gd(1, |p| p[0] * p[0]);
        // dense midpoint-rule oracle for the average of x² on [0, 1]
        let m = 100_000;
        let oracle: f64 = (0..m).map(|i| ((i as f64 + 0.5) / m as f64).powi(2)).sum::<f64>() / m as f64;
        assert!((g.obstacle_edges()[bottom] - oracle).abs() < 1e-9);
        assert!((g.obstacle_edges()[bottom] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_boundary_obstacle() {
        let mesh = Arc::new(Mesh::unit_square(2).unwrap());
        let r = GradientDiscretisation::crouzeix_raviart(mesh, TimeGrid::uniform(1.0, 1).unwrap(), |p: Vec2<f64>| {
            p[0] - 0.25
        });
        assert!(matches!(r, Err(DiscretisationError::NegativeObstacleOnBoundary { .. })));
    }

    #[test]
    fn basis_is_nodal_at_midpoints() {
        let g = gd(3, |_| 1.0);
        let m = g.mesh();
        for c in 0..m.num_cells() {
            for (j, ce) in m.cell_edges(c).iter().enumerate() {
                let mid = m.edges()[ce.edge].midpoint;
                for i in 0..3 {
                    let mut local = [0.0; 3];
                    local[i] = 1.0;
                    let v = g.value_in_cell(c, local, mid);
                    assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_and_zero_gradient_of_constants() {
        let g = gd(4, |_| 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for c in 0..g.mesh().num_cells() {
            let pts = g.mesh().cell_points(c);
            for _ in 0..10 {
                let p = random_point_in(&mut rng, &pts);
                assert!((g.value_in_cell(c, [1.0; 3], p) - 1.0).abs() < 1e-14);
            }
            let grad = g.gradient_in_cell(c, [1.0; 3]);
            assert!(grad[0].abs() < 1e-12 && grad[1].abs() < 1e-12);
        }
    }

    #[test]
    fn constant_dofs_reconstruct_constant_inside() {
        // interior cells only see DOFs; all DOFs equal to c gives c on cells
        // without boundary edges
        let g = gd(4, |_| 1.0);
        let v = vec![2.5; g.num_dofs()];
        for c in 0..g.mesh().num_cells() {
            if g.local_dofs(c).iter().all(Option::is_some) {
                let b = g.mesh().barycenter(c);
                assert!((g.reconstruct_value(&v, c, b).unwrap() - 2.5).abs() < 1e-14);
                let gr = g.reconstruct_gradient(&v, c);
                assert!(gr[0].abs() < 1e-12 && gr[1].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reproduces_x_on_interior_cells() {
        let g = gd(2, |_| 1.0);
        let v = g.interpolate(|p| p[0], false);
        for (d, &x) in v.iter().enumerate() {
            assert_eq!(x, g.mesh().edges()[g.edge_of_dof(d)].midpoint[0]);
        }
        let all = g.interpolate_all_edges(|p| p[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for c in 0..g.mesh().num_cells() {
            let local = g.mesh().cell_edges(c).map(|ce| all[ce.edge]);
            let p = random_point_in(&mut rng, &g.mesh().cell_points(c));
            assert!((g.value_in_cell(c, local, p) - p[0]).abs() < 1e-14);
            let gr = g.gradient_in_cell(c, local);
            assert!((gr[0] - 1.0).abs() < 1e-13 && gr[1].abs() < 1e-13);
        }
    }

    #[test]
    fn quadratic_interpolant_matches_barycentric_oracle() {
        // On each cell, Π v(barycenter) = Σ_i w(m_i) (1 - 2/3) = mean of the
        // three midpoint values of w.
        let g = gd(2, |_| 1.0);
        let all = g.interpolate_all_edges(|p| p[0] * p[0]);
        for c in 0..g.mesh().num_cells() {
            let pts = g.mesh().cell_points(c);
            // midpoints via barycentric coordinates (0, 1/2, 1/2) etc.
            let mids: Vec<Vec2<f64>> = (0..3)
                .map(|i| {
                    let mut l = [0.5; 3];
                    l[i] = 0.0;
                    crate::quadrature::from_barycentric(&pts, &l)
                })
                .collect();
            let oracle: f64 = mids.iter().map(|m| m[0] * m[0] * (1.0 - 2.0 / 3.0)).sum();
            let local = g.mesh().cell_edges(c).map(|ce| all[ce.edge]);
            let got = g.value_in_cell(c, local, g.mesh().barycenter(c));
            assert!((got - oracle).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mesh = Arc::new(Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap());
        let g = GradientDiscretisation::crouzeix_raviart(mesh, TimeGrid::uniform(1.0, 1).unwrap(), |_| 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let local = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let b = g.mesh().barycenter(0);
            let h = 1e-5;
            let f = |p: Vec2<f64>| g.value_in_cell(0, local, p);
            let fd = [
                (f([b[0] + h, b[1]]) - f([b[0] - h, b[1]])) / (2.0 * h),
                (f([b[0], b[1] + h]) - f([b[0], b[1] - h])) / (2.0 * h),
            ];
            let gr = g.gradient_in_cell(0, local);
            assert!((gr[0] - fd[0]).abs() < 1e-6 && (gr[1] - fd[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn reconstruct_value_rejects_outside_point() {
        let g = gd(2, |_| 1.0);
        let v = vec![0.0; g.num_dofs()];
        assert!(g.reconstruct_value(&v, 0, [0.9, 0.9]).is_err());
        assert!(g.reconstruct_value(&v[1..], 0, [0.1, 0.05]).is_err());
    }

    #[test]
    fn interpolation_with_clamp() {
        let g = gd(4, |_| 0.3);
        let z = g.interpolate(|_| 0.0, true);
        assert!(z.iter().all(|&v| v == 0.0));
        assert!(g.in_convex_set(&z));
        let g = gd(4, |_| 0.5);
        let z = g.interpolate(|_| 1.0, true);
        assert!(z.iter().all(|&v| v == 0.5));
        assert_eq!(z.role, FieldRole::Constrained);
        let g = gd(4, |p| 0.2 + p[0] * p[0]);
        let z = g.interpolate(|p| (3.0 * p[0]).sin(), true);
        assert!(g.in_convex_set(&z));
    }

    #[test]
    fn spacetime_derivative() {
        let g = gd(2, |_| 1.0);
        let n = g.num_dofs();
        let steps = g.time_grid().num_steps();
        let constant: Vec<DofVector<f64>> = (0..=steps).map(|_| DofVector::free(vec![0.3; n])).collect();
        let st = SpaceTimeField::new(&g, &constant).unwrap();
        for k in 0..steps {
            assert!(st.derivative_dofs(k).iter().all(|&d| d == 0.0));
        }
        let dt = g.time_grid().step(0);
        let ramp: Vec<DofVector<f64>> =
            (0..=steps).map(|k| DofVector::free(vec![k as f64 * dt; n])).collect();
        let st = SpaceTimeField::new(&g, &ramp).unwrap();
        for k in 0..steps {
            assert!(st.derivative_dofs(k).iter().all(|&d| (d - 1.0).abs() < 1e-12));
        }
        assert!(SpaceTimeField::new(&g, &ramp[1..]).is_err());
    }

    #[test]
    fn dof_vector_text_round_trip() {
        let v = DofVector::free(vec![0.1, -2.5e-17, 3.0]);
        let mut buf = Vec::new();
        v.write_text(&mut buf).unwrap();
        assert_eq!(DofVector::<f64>::read_text(buf.as_slice(), FieldRole::Free).unwrap(), v);
    }
}
