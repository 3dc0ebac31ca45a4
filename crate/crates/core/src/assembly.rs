//! Mass, diffusion and reaction operators of the gradient scheme.
//!
//! Integrals of products of reconstructed fields use the three-edge-midpoint
//! rule on each cell. It is exact for quadratics, makes the Crouzeix-Raviart
//! mass matrix diagonal with `M_σσ = Σ_{K∋σ} |K|/3`, and lets reaction terms be
//! evaluated directly from DOF values.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::discretisation::GradientDiscretisation;
use crate::scalar::{dot, Scalar, Vec2};
use crate::sparse::SparseSymMatrix;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("diffusion tensor at barycenter of cell {cell} is not symmetric (defect {defect:e})")]
    AsymmetricTensor { cell: usize, defect: f64 },
    #[error("diffusion tensor at barycenter of cell {cell} has eigenvalues [{lo:e}, {hi:e}] outside the declared bounds [{d1:e}, {d2:e}]")]
    TensorOutOfBounds { cell: usize, lo: f64, hi: f64, d1: f64, d2: f64 },
    #[error("tensor bounds must satisfy 0 < d1 <= d2, got [{d1:e}, {d2:e}]")]
    BadBounds { d1: f64, d2: f64 },
    #[error("vector lengths do not match the number of DOFs ({expected})")]
    LengthMismatch { expected: usize },
}

pub type Mat2<T> = [[T; 2]; 2];

type TensorFn<T> = dyn Fn(Vec2<T>) -> Mat2<T> + Send + Sync;

/// Symmetric 2×2 tensor field with declared eigenvalue bounds `[d1, d2]`.
#[derive(Clone)]
pub struct TensorField<T> {
    eval: Arc<TensorFn<T>>,
    d1: T,
    d2: T,
}

impl<T: Scalar> fmt::Debug for TensorField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TensorField").field("d1", &self.d1).field("d2", &self.d2).finish_non_exhaustive()
    }
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn sym_eigenvalues<T: Scalar>(m: &Mat2<T>) -> [T; 2] {
    let half = T::of(0.5);
    let mean = (m[0][0] + m[1][1]) * half;
    let rad = ((m[0][0] - m[1][1]) * half).hypot(m[0][1]);
    [mean - rad, mean + rad]
}

impl<T: Scalar> TensorField<T> {
    pub fn new(
        d1: T,
        d2: T,
        eval: impl Fn(Vec2<T>) -> Mat2<T> + Send + Sync + 'static,
    ) -> Result<Self, AssemblyError> {
        if !(d1 > T::zero() && d1 <= d2) {
            return Err(AssemblyError::BadBounds { d1: d1.to_f64_lossy(), d2: d2.to_f64_lossy() });
        }
        Ok(Self { eval: Arc::new(eval), d1, d2 })
    }

    pub fn identity() -> Self {
        Self::isotropic(T::one()).expect("unit diffusion is valid")
    }

    pub fn isotropic(c: T) -> Result<Self, AssemblyError> {
        Self::new(c, c, move |_| [[c, T::zero()], [T::zero(), c]])
    }

    /// Constant symmetric tensor; bounds are its eigenvalues.
    pub fn constant(m: Mat2<T>) -> Result<Self, AssemblyError> {
        let [lo, hi] = sym_eigenvalues(&m);
        Self::new(lo, hi, move |_| m)
    }

    pub fn bounds(&self) -> (T, T) {
        (self.d1, self.d2)
    }

    pub fn eval(&self, p: Vec2<T>) -> Mat2<T> {
        (self.eval)(p)
    }

    fn checked_at(&self, cell: usize, p: Vec2<T>) -> Result<Mat2<T>, AssemblyError> {
        let m = self.eval(p);
        let scale = m[0][0].abs().max(m[1][1].abs()).max(T::one());
        let tol = T::of(64.0) * T::epsilon() * scale;
        let defect = (m[0][1] - m[1][0]).abs();
        if defect > tol {
            return Err(AssemblyError::AsymmetricTensor { cell, defect: defect.to_f64_lossy() });
        }
        let [lo, hi] = sym_eigenvalues(&m);
        if lo < self.d1 - tol || hi > self.d2 + tol {
            return Err(AssemblyError::TensorOutOfBounds {
                cell,
                lo: lo.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
                d1: self.d1.to_f64_lossy(),
                d2: self.d2.to_f64_lossy(),
            });
        }
        Ok(m)
    }
}

/// Diagonal of the mass matrix on the DOFs.
pub fn mass_weights<T: Scalar>(gd: &GradientDiscretisation<T>) -> Vec<T> {
    let edge_weights = mass_weights_all_edges(gd);
    (0..gd.num_dofs()).map(|d| edge_weights[gd.edge_of_dof(d)]).collect()
}

/// Mass diagonal on every edge, boundary edges included (no boundary
/// condition). Sums to the domain area.
pub fn mass_weights_all_edges<T: Scalar>(gd: &GradientDiscretisation<T>) -> Vec<T> {
    let mesh = gd.mesh();
    let mut w = vec![T::zero(); mesh.num_edges()];
    let third = T::one() / T::of(3.0);
    for c in 0..mesh.num_cells() {
        let share = mesh.cell_area(c) * third;
        for ce in mesh.cell_edges(c) {
            w[ce.edge] += share;
        }
    }
    w
}

/// `M_στ = ∫ Π e_σ Π e_τ`, edge-midpoint rule.
pub fn assemble_mass<T: Scalar>(gd: &GradientDiscretisation<T>) -> SparseSymMatrix<T> {
    SparseSymMatrix::from_diagonal(&mass_weights(gd))
}

/// `K_στ = Σ_K |K| (D(x_K) ∇e_σ)·∇e_τ` on the DOFs, with `x_K` the cell
/// barycenter.
pub fn assemble_stiffness<T: Scalar>(
    gd: &GradientDiscretisation<T>,
    tensor: &TensorField<T>,
) -> Result<SparseSymMatrix<T>, AssemblyError> {
    let cells = 0..gd.mesh().num_cells();
    assemble_stiffness_in_order(gd, tensor, cells, |e| gd.dof_of_edge(e), gd.num_dofs())
}

/// Stiffness matrix over all edges, boundary included (no boundary
/// condition); its kernel contains the constants.
pub fn assemble_stiffness_all_edges<T: Scalar>(
    gd: &GradientDiscretisation<T>,
    tensor: &TensorField<T>,
) -> Result<SparseSymMatrix<T>, AssemblyError> {
    let cells = 0..gd.mesh().num_cells();
    assemble_stiffness_in_order(gd, tensor, cells, Some, gd.mesh().num_edges())
}

pub(crate) fn assemble_stiffness_in_order<T: Scalar>(
    gd: &GradientDiscretisation<T>,
    tensor: &TensorField<T>,
    cells: impl IntoIterator<Item = usize>,
    index_of_edge: impl Fn(usize) -> Option<usize>,
    dim: usize,
) -> Result<SparseSymMatrix<T>, AssemblyError> {
    let mesh = gd.mesh();
    let mut entries = Vec::with_capacity(6 * mesh.num_cells());
    for c in cells {
        let d = tensor.checked_at(c, mesh.barycenter(c))?;
        let area = mesh.cell_area(c);
        let grads = gd.basis_gradients(c);
        let idx = mesh.cell_edges(c).map(|ce| index_of_edge(ce.edge));
        for i in 0..3 {
            let Some(gi) = idx[i] else { continue };
            let dg = [d[0][0] * grads[i][0] + d[0][1] * grads[i][1], d[1][0] * grads[i][0] + d[1][1] * grads[i][1]];
            for j in 0..3 {
                let Some(gj) = idx[j] else { continue };
                if gj <= gi {
                    entries.push((gi, gj, area * dot(dg, grads[j])));
                }
            }
        }
    }
    Ok(SparseSymMatrix::from_symmetric_entries(dim, &entries))
}

/// `load_σ = Σ_{K∋σ} |K|/3 · f(a_σ, b_σ)`.
pub fn assemble_reaction_load<T: Scalar>(
    gd: &GradientDiscretisation<T>,
    f: impl Fn(T, T) -> T,
    a: &[T],
    b: &[T],
) -> Result<Vec<T>, AssemblyError> {
    if a.len() != gd.num_dofs() || b.len() != gd.num_dofs() {
        return Err(AssemblyError::LengthMismatch { expected: gd.num_dofs() });
    }
    Ok(reaction_load_with_weights(&mass_weights(gd), f, a, b))
}

pub(crate) fn reaction_load_with_weights<T: Scalar>(weights: &[T], f: impl Fn(T, T) -> T, a: &[T], b: &[T]) -> Vec<T> {
    weights.iter().zip(a.iter().zip(b)).map(|(&w, (&x, &y))| w * f(x, y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretisation::TimeGrid;
    use crate::mesh::Mesh;
    use crate::quadrature::integrate_triangle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gd(n: usize) -> GradientDiscretisation<f64> {
        let mesh = Arc::new(Mesh::unit_square(n).unwrap());
        GradientDiscretisation::crouzeix_raviart(mesh, TimeGrid::uniform(1.0, 1).unwrap(), |_| 1.0).unwrap()
    }

    /// ∫ e_σ e_τ by the 7-point rule over every cell, all edges.
    fn mass_oracle(g: &GradientDiscretisation<f64>) -> Vec<Vec<f64>> {
        let m = g.mesh();
        let ne = m.num_edges();
        let mut out = vec![vec![0.0; ne]; ne];
        for c in 0..m.num_cells() {
            let pts = m.cell_points(c);
            let ce = m.cell_edges(c);
            for i in 0..3 {
                for j in 0..3 {
                    let v = integrate_triangle(&pts, m.cell_area(c), |_, l| (1.0 - 2.0 * l[i]) * (1.0 - 2.0 * l[j]));
                    out[ce[i].edge][ce[j].edge] += v;
                }
            }
        }
        out
    }

    #[test]
    fn mass_matches_quadrature_oracle() {
        let g = gd(1);
        let diag_edge = g.edge_of_dof(0);
        let oracle = mass_oracle(&g);
        assert!((oracle[diag_edge][diag_edge] - 1.0 / 3.0).abs() < 1e-15);
        let m = assemble_mass(&g);
        assert!((m.get(0, 0) - 1.0 / 3.0).abs() < 1e-15);

        let g = gd(4);
        let oracle = mass_oracle(&g);
        let m = assemble_mass(&g);
        for i in 0..g.num_dofs() {
            for j in 0..g.num_dofs() {
                let o = oracle[g.edge_of_dof(i)][g.edge_of_dof(j)];
                assert!((m.get(i, j) - o).abs() < 1e-12, "({i},{j})");
            }
        }
        assert!((mass_weights_all_edges(&g).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stiffness_spd_and_linear_in_tensor() {
        let g = gd(3);
        let k = assemble_stiffness(&g, &TensorField::identity()).unwrap();
        assert_eq!(k.symmetry_defect(), 0.0);
        let k2 = assemble_stiffness(&g, &TensorField::isotropic(2.0).unwrap()).unwrap();
        for i in 0..k.dim() {
            let (cols, vals) = k.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                assert_eq!(k2.get(i, j), 2.0 * v);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x: Vec<f64> = (0..k.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(k.quad_form(&x) > 0.0);
        }
    }

    #[test]
    fn all_edge_stiffness_annihilates_constants() {
        let g = gd(3);
        let k = assemble_stiffness_all_edges(&g, &TensorField::identity()).unwrap();
        let y = k.mul_vec(&vec![1.0; k.dim()]);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn stiffness_independent_of_cell_order() {
        let g = gd(4);
        let t = TensorField::constant([[2.0, 0.3], [0.3, 1.0]]).unwrap();
        let fwd = assemble_stiffness(&g, &t).unwrap();
        let rev = assemble_stiffness_in_order(&g, &t, (0..g.mesh().num_cells()).rev(), |e| g.dof_of_edge(e), g.num_dofs())
            .unwrap();
        for i in 0..fwd.dim() {
            for j in 0..fwd.dim() {
                assert!((fwd.get(i, j) - rev.get(i, j)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn tensor_bounds_enforced() {
        let g = gd(2);
        let t = TensorField::new(1.0, 2.0, |_| [[3.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(assemble_stiffness(&g, &t), Err(AssemblyError::TensorOutOfBounds { .. })));
        let t = TensorField::new(1.0, 2.0, |_| [[1.5, 0.2], [0.1, 1.5]]).unwrap();
        assert!(matches!(assemble_stiffness(&g, &t), Err(AssemblyError::AsymmetricTensor { .. })));
        assert!(TensorField::<f64>::isotropic(0.0).is_err());
    }

    #[test]
    fn reaction_load_cases() {
        let g = gd(2);
        let n = g.num_dofs();
        let a = g.interpolate(|p| p[0], false);
        let b = vec![0.0; n];
        assert!(assemble_reaction_load(&g, |_, _| 0.0, &a, &b).unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(assemble_reaction_load(&g, |_, _| 1.0, &a, &b).unwrap(), mass_weights(&g));

        // f(a, b) = a with a the interpolant of x: ∫ (Π a) e_σ, 7-point oracle.
        // Π a is cellwise affine, so the product is quadratic and both rules are exact.
        let load = assemble_reaction_load(&g, |x, _| x, &a, &b).unwrap();
        let m = g.mesh();
        let mut oracle = vec![0.0; n];
        for c in 0..m.num_cells() {
            let local = g.local_values(&a, c);
            for (i, d) in g.local_dofs(c).iter().enumerate() {
                let Some(d) = d else { continue };
                oracle[*d] += integrate_triangle(&m.cell_points(c), m.cell_area(c), |p, l| {
                    g.value_in_cell(c, local, p) * (1.0 - 2.0 * l[i])
                });
            }
        }
        for (x, y) in load.iter().zip(&oracle) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn reaction_load_is_linear_in_f() {
        let g = gd(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = g.num_dofs();
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f1 = |x: f64, y: f64| x.sin() + 2.0 * y;
        let f2 = |x: f64, y: f64| (x * y).cos();
        let l1 = assemble_reaction_load(&g, f1, &a, &b).unwrap();
        let l2 = assemble_reaction_load(&g, f2, &a, &b).unwrap();
        let l12 = assemble_reaction_load(&g, |x, y| f1(x, y) + f2(x, y), &a, &b).unwrap();
        for i in 0..n {
            assert!((l12[i] - l1[i] - l2[i]).abs() < 1e-12);
        }
    }
}
