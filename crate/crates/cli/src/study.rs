//! Self-convergence errors between nested refinement levels.

use gdm_obstacle::quadrature::integrate_triangle;
use gdm_obstacle::{GradientDiscretisation, PointLocator, Trajectory};

/// Errors of a coarse trajectory against a reference trajectory on a finer,
/// nested mesh and time grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LevelErrors {
    /// `max_t ‖Π A - Π A_ref‖_{L²}`.
    pub a_linf_l2: f64,
    /// `(∫ ‖∇_D A - ∇_D A_ref‖²_{L²} dt)^{1/2}`.
    pub grad_a_l2_l2: f64,
    pub b_linf_l2: f64,
    pub grad_b_l2_l2: f64,
}

impl LevelErrors {
    pub fn as_array(&self) -> [f64; 4] {
        [self.a_linf_l2, self.grad_a_l2_l2, self.b_linf_l2, self.grad_b_l2_l2]
    }
}

pub const ERROR_NAMES: [&str; 4] = ["A_Linf_L2", "gradA_L2_L2", "B_Linf_L2", "gradB_L2_L2"];

/// Owning coarse cell of every fine cell, found by locating the fine
/// barycenter.
pub fn cell_map(coarse: &GradientDiscretisation<f64>, fine: &GradientDiscretisation<f64>) -> Option<Vec<usize>> {
    let locator = PointLocator::new(coarse.mesh());
    (0..fine.mesh().num_cells()).map(|c| locator.locate(coarse.mesh(), fine.mesh().barycenter(c))).collect()
}

/// Squared `L²` distances of values and gradients between a coarse and a
/// fine discrete field. The coarse field is affine on each fine cell, so the
/// seven-point rule is exact.
fn squared_distance(
    coarse: &GradientDiscretisation<f64>,
    fine: &GradientDiscretisation<f64>,
    map: &[usize],
    vc: &[f64],
    vf: &[f64],
) -> (f64, f64) {
    let mesh = fine.mesh();
    let (mut val, mut grad) = (0.0, 0.0);
    for (c, &owner) in map.iter().enumerate() {
        let lc = coarse.local_values(vc, owner);
        let lf = fine.local_values(vf, c);
        let area = mesh.cell_area(c);
        val += integrate_triangle(&mesh.cell_points(c), area, |p, _| {
            let d = coarse.value_in_cell(owner, lc, p) - fine.value_in_cell(c, lf, p);
            d * d
        });
        let (gc, gf) = (coarse.gradient_in_cell(owner, lc), fine.gradient_in_cell(c, lf));
        grad += area * ((gc[0] - gf[0]).powi(2) + (gc[1] - gf[1]).powi(2));
    }
    (val, grad)
}

/// Both fields are piecewise constant in time; on every reference interval
/// the coarse field is the level whose interval contains the midpoint. The
/// `L∞` norms also include the initial levels.
pub fn level_errors(
    coarse: &GradientDiscretisation<f64>,
    coarse_traj: &Trajectory<f64>,
    fine: &GradientDiscretisation<f64>,
    fine_traj: &Trajectory<f64>,
) -> Option<LevelErrors> {
    let map = cell_map(coarse, fine)?;
    let (cg, fg) = (coarse.time_grid(), fine.time_grid());
    let mut e = LevelErrors::default();
    let (a0, _) = squared_distance(coarse, fine, &map, &coarse_traj.a[0], &fine_traj.a[0]);
    let (b0, _) = squared_distance(coarse, fine, &map, &coarse_traj.b[0], &fine_traj.b[0]);
    let (mut a_sup, mut b_sup) = (a0, b0);
    let (mut ga, mut gb) = (0.0, 0.0);
    for (m, dt) in fg.steps().enumerate() {
        let mid = 0.5 * (fg.times()[m] + fg.times()[m + 1]);
        let k = cg.level_at(mid);
        let (va, da) = squared_distance(coarse, fine, &map, &coarse_traj.a[k], &fine_traj.a[m + 1]);
        let (vb, db) = squared_distance(coarse, fine, &map, &coarse_traj.b[k], &fine_traj.b[m + 1]);
        a_sup = a_sup.max(va);
        b_sup = b_sup.max(vb);
        ga += dt * da;
        gb += dt * db;
    }
    e.a_linf_l2 = a_sup.sqrt();
    e.b_linf_l2 = b_sup.sqrt();
    e.grad_a_l2_l2 = ga.sqrt();
    e.grad_b_l2_l2 = gb.sqrt();
    Some(e)
}

/// `log₂(e_prev / e_next)`, or `None` when either error vanishes.
pub fn empirical_order(prev: f64, next: f64) -> Option<f64> {
    (prev > 0.0 && next > 0.0).then(|| (prev / next).log2())
}

/// Strict decrease, with identically vanishing errors accepted.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0))
}

/// `(max - min) / min` over the values; zero for an all-zero list.
pub fn relative_variation(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == 0.0 {
        0.0
    } else if lo <= 0.0 {
        f64::INFINITY
    } else {
        (hi - lo) / lo
    }
}
