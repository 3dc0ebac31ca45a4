//! Continuous data of the coupled obstacle / reaction-diffusion system.
//!
//! ```text
//! ∂t A - div(D_A ∇A) ≤ F(A, B),  A ≤ χ,  complementarity between the two,
//! ∂t B - div(D_B ∇B) = G(A, B),
//! A = B = 0 on ∂Ω,  (A, B)(·, 0) = (A_ini, B_ini).
//! ```

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::assembly::TensorField;
use crate::discretisation::GradientDiscretisation;
use crate::scalar::{Scalar, Vec2};

pub type ScalarField<T> = Arc<dyn Fn(Vec2<T>) -> T + Send + Sync>;

/// Wraps a closure as a shared scalar field.
pub fn field<T: Scalar>(f: impl Fn(Vec2<T>) -> T + Send + Sync + 'static) -> ScalarField<T> {
    Arc::new(f)
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("{name}: sampled Lipschitz ratio {estimate:e} exceeds 1.01 × declared constant {declared:e}")]
    LipschitzViolated { name: &'static str, estimate: f64, declared: f64 },
    #[error("{name}: declared Lipschitz constant must be finite and nonnegative, got {declared:e}")]
    BadLipschitz { name: &'static str, declared: f64 },
    #[error("initial datum A_ini = {value:e} exceeds the obstacle {obstacle:e} at edge midpoint ({x}, {y})")]
    InitialAboveObstacle { x: f64, y: f64, value: f64, obstacle: f64 },
    #[error("horizon must be positive, got {0:e}")]
    BadHorizon(f64),
}

/// Reaction term `ℝ² → ℝ` with a declared global Lipschitz constant
/// (Euclidean norm on the arguments).
#[derive(Clone)]
pub struct Reaction<T> {
    eval: Arc<dyn Fn(T, T) -> T + Send + Sync>,
    lipschitz: T,
}

impl<T: Scalar> fmt::Debug for Reaction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reaction").field("lipschitz", &self.lipschitz).finish_non_exhaustive()
    }
}

impl<T: Scalar> Reaction<T> {
    pub fn new(lipschitz: T, eval: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        Self { eval: Arc::new(eval), lipschitz }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), |_, _| T::zero())
    }

    #[inline]
    pub fn eval(&self, a: T, b: T) -> T {
        (self.eval)(a, b)
    }

    pub fn lipschitz(&self) -> T {
        self.lipschitz
    }

    /// Largest `|f(p) - f(q)| / |p - q|` over `samples` random pairs in
    /// `[-half_width, half_width]²`.
    pub fn sampled_lipschitz(&self, samples: usize, half_width: T, rng: &mut impl Rng) -> T {
        let hw = half_width.to_f64_lossy();
        let mut draw = || T::of(rng.gen_range(-hw..=hw));
        let mut best = T::zero();
        for _ in 0..samples {
            let (a0, b0, a1, b1) = (draw(), draw(), draw(), draw());
            let dist = (a1 - a0).hypot(b1 - b0);
            if dist > T::zero() {
                best = best.max((self.eval(a1, b1) - self.eval(a0, b0)).abs() / dist);
            }
        }
        best
    }
}

#[derive(Clone)]
pub struct ProblemSpec<T> {
    pub horizon: T,
    pub diff_a: TensorField<T>,
    pub diff_b: TensorField<T>,
    pub reaction_f: Reaction<T>,
    pub reaction_g: Reaction<T>,
    pub obstacle: ScalarField<T>,
    pub a_ini: ScalarField<T>,
    pub b_ini: ScalarField<T>,
}

impl<T: Scalar> fmt::Debug for ProblemSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("horizon", &self.horizon)
            .field("diff_a", &self.diff_a)
            .field("diff_b", &self.diff_b)
            .field("reaction_f", &self.reaction_f)
            .field("reaction_g", &self.reaction_g)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions<T> {
    pub samples: usize,
    pub half_width: T,
    pub seed: u64,
}

impl<T: Scalar> Default for ValidationOptions<T> {
    fn default() -> Self {
        Self { samples: 1000, half_width: T::of(2.0), seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport<T> {
    pub lipschitz_f: T,
    pub lipschitz_g: T,
}

impl<T: Scalar> ProblemSpec<T> {
    /// Zero reactions, zero data, unit diffusion and the given obstacle.
    pub fn homogeneous(horizon: T, obstacle: ScalarField<T>) -> Self {
        Self {
            horizon,
            diff_a: TensorField::identity(),
            diff_b: TensorField::identity(),
            reaction_f: Reaction::zero(),
            reaction_g: Reaction::zero(),
            obstacle,
            a_ini: field(|_| T::zero()),
            b_ini: field(|_| T::zero()),
        }
    }

    /// `M = max(M_F, M_G)`.
    pub fn lipschitz_constant(&self) -> T {
        self.reaction_f.lipschitz().max(self.reaction_g.lipschitz())
    }

    /// `C_0 = max(F(0, 0), G(0, 0))`.
    pub fn c0(&self) -> T {
        self.reaction_f.eval(T::zero(), T::zero()).max(self.reaction_g.eval(T::zero(), T::zero()))
    }

    /// Exclusive upper bound `1 / (2M)` on the time step; infinite when both
    /// reactions are constant.
    pub fn max_time_step(&self) -> T {
        let m = self.lipschitz_constant();
        if m > T::zero() {
            T::one() / (T::of(2.0) * m)
        } else {
            T::infinity()
        }
    }

    /// Samples the declared Lipschitz constants and checks `A_ini ≤ χ` at the
    /// edge midpoints of `gd`.
    pub fn validate(
        &self,
        gd: &GradientDiscretisation<T>,
        opts: &ValidationOptions<T>,
    ) -> Result<ValidationReport<T>, ProblemError> {
        if !(self.horizon > T::zero()) {
            return Err(ProblemError::BadHorizon(self.horizon.to_f64_lossy()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut check = |name: &'static str, r: &Reaction<T>| {
            let declared = r.lipschitz();
            if !(declared >= T::zero()) || !declared.is_finite() {
                return Err(ProblemError::BadLipschitz { name, declared: declared.to_f64_lossy() });
            }
            let estimate = r.sampled_lipschitz(opts.samples, opts.half_width, &mut rng);
            if estimate > declared * T::of(1.01) {
                return Err(ProblemError::LipschitzViolated {
                    name,
                    estimate: estimate.to_f64_lossy(),
                    declared: declared.to_f64_lossy(),
                });
            }
            Ok(estimate)
        };
        let lipschitz_f = check("F", &self.reaction_f)?;
        let lipschitz_g = check("G", &self.reaction_g)?;
        for e in gd.mesh().edges() {
            let (v, chi) = ((self.a_ini)(e.midpoint), (self.obstacle)(e.midpoint));
            if v > chi {
                return Err(ProblemError::InitialAboveObstacle {
                    x: e.midpoint[0].to_f64_lossy(),
                    y: e.midpoint[1].to_f64_lossy(),
                    value: v.to_f64_lossy(),
                    obstacle: chi.to_f64_lossy(),
                });
            }
        }
        Ok(ValidationReport { lipschitz_f, lipschitz_g })
    }
}

/// Reaction presets that satisfy the global Lipschitz hypothesis.
pub mod presets {
    use super::*;

    /// `F = s + α b - β a`, `G = γ a - δ b`.
    pub fn linear<T: Scalar>(alpha: T, beta: T, gamma: T, delta: T, source: T) -> (Reaction<T>, Reaction<T>) {
        (
            Reaction::new(alpha.hypot(beta), move |a, b| source + alpha * b - beta * a),
            Reaction::new(gamma.hypot(delta), move |a, b| gamma * a - delta * b),
        )
    }

    /// Monod kinetics with both arguments clamped to `[0, cap]`:
    ///
    /// ```text
    /// F = μ ā b̄/(k + b̄) - λ ā,    G = -ν ā b̄/(k + b̄),    s̄ = min(max(s, 0), cap).
    /// ```
    ///
    /// On the box, `∂_a [ab/(k+b)] ≤ cap/(k+cap)` and `∂_b [ab/(k+b)] ≤ cap/k`;
    /// the declared constants follow from these bounds.
    pub fn clamped_monod<T: Scalar>(mu: T, k: T, lambda: T, nu: T, cap: T) -> (Reaction<T>, Reaction<T>) {
        assert!(k > T::zero() && cap > T::zero(), "clamped-monod needs k > 0 and cap > 0");
        let clamp = move |s: T| s.max(T::zero()).min(cap);
        let monod = move |a: T, b: T| {
            let (a, b) = (clamp(a), clamp(b));
            a * b / (k + b)
        };
        let slope = (cap / (k + cap)).hypot(cap / k);
        (
            Reaction::new(mu.abs() * slope + lambda.abs(), move |a, b| mu * monod(a, b) - lambda * clamp(a)),
            Reaction::new(nu.abs() * slope, move |a, b| -nu * monod(a, b)),
        )
    }
}
