use std::sync::Arc;

use approx::assert_relative_eq;
use gdm_obstacle::diagnostics::{BoundaryMode, ConsistencyOptions, Diagnostics, PowerOptions};
use gdm_obstacle::quadrature::integrate_triangle;
use gdm_obstacle::vi_solver::solve_psor_monitored;
use gdm_obstacle::{
    assemble_mass, assemble_stiffness, solve_active_set_oracle, solve_psor, solve_spd, GradientDiscretisation,
    LcpProblem, Mesh, PsorOptions, SparseSymMatrix, TensorField, TimeGrid,
};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gd(n: usize, chi: f64) -> GradientDiscretisation<f64> {
    let mesh = Arc::new(Mesh::unit_square(n).unwrap());
    GradientDiscretisation::crouzeix_raviart(mesh, TimeGrid::uniform(1.0, 4).unwrap(), move |_| chi).unwrap()
}

fn random_point_in(mesh: &Mesh<f64>, cell: usize, rng: &mut ChaCha8Rng) -> [f64; 2] {
    let (mut s, mut t): (f64, f64) = (rng.gen(), rng.gen());
    if s + t > 1.0 {
        (s, t) = (1.0 - s, 1.0 - t);
    }
    let [p0, p1, p2] = mesh.cell_points(cell);
    [
        p0[0] + s * (p1[0] - p0[0]) + t * (p2[0] - p0[0]),
        p0[1] + s * (p1[1] - p0[1]) + t * (p2[1] - p0[1]),
    ]
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> SparseSymMatrix<f64> {
    let b: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = (0..n).map(|k| b[i][k] * b[j][k]).sum::<f64>();
        }
        a[i][i] += 0.5;
    }
    SparseSymMatrix::from_dense(&a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn structured_mesh_counts(n in 1usize..12) {
        let m = Mesh::<f64>::unit_square(n).unwrap();
        prop_assert_eq!(m.num_vertices(), (n + 1) * (n + 1));
        prop_assert_eq!(m.num_cells(), 2 * n * n);
        prop_assert_eq!(m.num_edges(), 3 * n * n + 2 * n);
        prop_assert_eq!(m.euler_characteristic(), 1);
        prop_assert!((m.total_area() - 1.0).abs() <= 1e-12);
        prop_assert!(m.check_invariants().is_ok());
        prop_assert!(m.refine_uniform().check_invariants().is_ok());
    }

    #[test]
    fn affine_fields_are_reproduced(n in 1usize..6, a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64, seed in 0u64..1000) {
        let g = gd(n, 1e6);
        let edges = g.interpolate_all_edges(|p| a + b * p[0] + c * p[1]);
        let mesh = g.mesh();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for cell in 0..mesh.num_cells() {
            let local = mesh.cell_edges(cell).map(|ce| edges[ce.edge]);
            let grad = g.gradient_in_cell(cell, local);
            prop_assert!((grad[0] - b).abs() <= 1e-12 && (grad[1] - c).abs() <= 1e-12);
            for _ in 0..3 {
                let p = random_point_in(mesh, cell, &mut rng);
                prop_assert!((g.value_in_cell(cell, local, p) - (a + b * p[0] + c * p[1])).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn psor_agrees_with_enumeration(seed in 0u64..10_000, n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_spd(&mut rng, n);
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let p = LcpProblem::new(h, q, u).unwrap();
        let oracle = solve_active_set_oracle(&p).unwrap();
        let opts = PsorOptions { tol: 1e-12, max_iter: 1_000_000, ..Default::default() };
        let s = solve_psor(&p, &vec![0.0; n], &opts).unwrap();
        prop_assert!(s.converged);
        let gap = s.x.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(gap <= 1e-8, "gap {gap:e}");
    }
}

#[test]
fn psor_energy_decreases_every_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let n = rng.gen_range(2..12);
        let h = random_spd(&mut rng, n);
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let p = LcpProblem::new(h, q, u).unwrap();
        let x0 = vec![0.0; n];
        let projected: Vec<f64> = p.upper.iter().map(|u| u.min(0.0)).collect();
        let mut last = p.energy(&projected);
        let mut sweeps = 0;
        let s = solve_psor_monitored(&p, &x0, &PsorOptions::default(), |_, x| {
            let e = p.energy(x);
            assert!(e <= last + 1e-14, "energy rose from {last} to {e}");
            last = e;
            sweeps += 1;
        })
        .unwrap();
        assert!(s.converged);
        assert_eq!(sweeps, s.iterations);
        assert!(s.x.iter().zip(&p.upper).all(|(x, u)| x <= u));
    }
}

#[test]
fn loose_bounds_reduce_to_linear_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = random_spd(&mut rng, 10);
    let q: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let lin = solve_spd(&h, &q, 1e-14).unwrap();
    let p = LcpProblem::new(h, q, vec![1e12; 10]).unwrap();
    let opts = PsorOptions { tol: 1e-12, max_iter: 1_000_000, ..Default::default() };
    let s = solve_psor(&p, &[0.0; 10], &opts).unwrap();
    for (a, b) in s.x.iter().zip(&lin) {
        assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
    }
}

#[test]
fn coercivity_matches_dense_generalised_eigenproblem() {
    let g = gd(2, 1.0);
    let k = assemble_stiffness(&g, &TensorField::identity()).unwrap().to_dense();
    let m = assemble_mass(&g).diagonal();
    let n = m.len();
    // λ_max(K⁻¹M) = 1 / λ_min(M^{-1/2} K M^{-1/2})
    let s = DMatrix::from_fn(n, n, |i, j| k[i][j] / (m[i] * m[j]).sqrt());
    let lambda_min = SymmetricEigen::new(s).eigenvalues.min();
    let oracle = (1.0 / lambda_min).sqrt();
    let est = Diagnostics::new(&g).unwrap().coercivity(&PowerOptions::default()).unwrap();
    assert!(est.converged);
    assert!((est.value - oracle).abs() <= 1e-6, "{} vs {}", est.value, oracle);
}

#[test]
fn mass_entries_match_seven_point_quadrature() {
    let g = gd(4, 1.0);
    let mesh = g.mesh();
    let mass = assemble_mass(&g);
    assert!(mass.is_diagonal());
    let mut oracle = vec![vec![0.0; g.num_dofs()]; g.num_dofs()];
    for c in 0..mesh.num_cells() {
        let dofs = g.local_dofs(c);
        for i in 0..3 {
            for j in 0..3 {
                if let (Some(di), Some(dj)) = (dofs[i], dofs[j]) {
                    oracle[di][dj] += integrate_triangle(&mesh.cell_points(c), mesh.cell_area(c), |_, l| {
                        (1.0 - 2.0 * l[i]) * (1.0 - 2.0 * l[j])
                    });
                }
            }
        }
    }
    let dense = mass.to_dense();
    for i in 0..g.num_dofs() {
        for j in 0..g.num_dofs() {
            assert!((dense[i][j] - oracle[i][j]).abs() <= 1e-12);
        }
    }
}

#[test]
fn dual_norm_dominates_random_test_functions() {
    let g = gd(2, 1.0);
    let d = Diagnostics::new(&g).unwrap();
    let mut u = vec![0.0; g.num_dofs()];
    u[3] = 1.0;
    let value = d.dual_norm(&u).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut best: f64 = 0.0;
    for _ in 0..10_000 {
        let psi: Vec<f64> = (0..g.num_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let pairing: f64 = (0..g.num_dofs()).map(|i| u[i] * d.mass()[i] * psi[i]).sum();
        best = best.max(pairing.abs() / d.gradient_norm(&psi));
    }
    assert!(best <= value * (1.0 + 1e-12));
    assert!(best >= 0.5 * value, "sampling far below the supremum: {best} vs {value}");
}

#[test]
fn estimators_are_certified_by_candidates() {
    let g = gd(4, 0.3);
    let d = Diagnostics::new(&g).unwrap();
    let pi = std::f64::consts::PI;
    let w = |p: [f64; 2]| 0.2 * (pi * p[0]).sin() * (pi * p[1]).sin();
    let gw = |p: [f64; 2]| {
        [0.2 * pi * (pi * p[0]).cos() * (pi * p[1]).sin(), 0.2 * pi * (pi * p[0]).sin() * (pi * p[1]).cos()]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for constrained in [false, true] {
        let opts = ConsistencyOptions { constrained, ..Default::default() };
        let est = d.consistency(w, gw, &opts).unwrap();
        let interp = g.interpolate(w, constrained);
        for k in 0..5 {
            let cand: Vec<f64> = interp
                .iter()
                .zip(g.obstacle_dofs())
                .map(|(v, c)| {
                    let x = v + if k == 0 { 0.0 } else { rng.gen_range(-0.01..0.01) };
                    if constrained { x.min(*c) } else { x }
                })
                .collect();
            let val = d.consistency_functional(&cand, w, gw, BoundaryMode::Homogeneous);
            assert!(est.value <= val * (1.0 + 1e-10), "min {} above candidate {}", est.value, val);
        }
    }

    let psi = |p: [f64; 2]| [p[0] * p[0], p[0] * p[1]];
    let div = |p: [f64; 2]| 3.0 * p[0];
    let wd = d.limit_conformity(psi, div).unwrap();
    let b = d.limit_conformity_functional(psi, div);
    for _ in 0..20 {
        let phi: Vec<f64> = (0..g.num_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ratio = b.iter().zip(&phi).map(|(x, y)| x * y).sum::<f64>().abs() / d.gradient_norm(&phi);
        assert!(ratio <= wd * (1.0 + 1e-10));
    }
}

#[test]
fn free_boundary_affine_consistency_vanishes() {
    let g = gd(3, 10.0);
    let d = Diagnostics::new(&g).unwrap();
    let opts = ConsistencyOptions { boundary: BoundaryMode::Free, constrained: true, ..Default::default() };
    let est = d.consistency(|p| 1.0 + 2.0 * p[0] - 3.0 * p[1], |_| [2.0, -3.0], &opts).unwrap();
    assert_relative_eq!(est.value, 0.0, epsilon = 1e-10);
}

#[test]
fn single_precision_pipeline_runs() {
    let mesh = Arc::new(Mesh::<f32>::unit_square(4).unwrap());
    let g = GradientDiscretisation::crouzeix_raviart(mesh, TimeGrid::uniform(0.1f32, 4).unwrap(), |_| 0.05).unwrap();
    let mut spec = gdm_obstacle::ProblemSpec::homogeneous(0.1f32, gdm_obstacle::field(|_| 0.05));
    let (f, gg) = gdm_obstacle::presets::linear(1.0f32, 0.0, 0.0, 1.0, 2.0);
    spec.reaction_f = f;
    spec.reaction_g = gg;
    let opts = gdm_obstacle::StepOptions {
        picard_tol: 1e-5,
        psor: PsorOptions { tol: 1e-5, ..Default::default() },
        cg_tol: 1e-5,
        ..Default::default()
    };
    let traj = gdm_obstacle::solve_evolution(&spec, &g, &opts).unwrap();
    assert_eq!(traj.num_steps(), 4);
    assert!(traj.a.iter().all(|l| g.in_convex_set(l)));
    let c = gdm_obstacle::estimate_coercivity(&g).unwrap();
    assert!(c.value > 0.0 && c.value.is_finite());
}
