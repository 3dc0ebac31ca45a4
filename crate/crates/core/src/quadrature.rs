//! Quadrature rules on segments and triangles.

use crate::scalar::{Scalar, Vec2};

/// Two-point Gauss rule on `[0, 1]`: `(abscissa, weight)` pairs. Exact for
/// cubics.
pub fn gauss2_segment<T: Scalar>() -> [(T, T); 2] {
    let off = T::one() / (T::of(2.0) * T::of(3.0).sqrt());
    let half = T::of(0.5);
    [(half - off, half), (half + off, half)]
}

/// Mean value of `f` over the segment `[a, b]` by two-point Gauss.
pub fn segment_average<T: Scalar>(a: Vec2<T>, b: Vec2<T>, f: impl Fn(Vec2<T>) -> T) -> T {
    gauss2_segment::<T>()
        .iter()
        .map(|&(s, w)| w * f([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]))
        .sum()
}

/// Seven-point symmetric triangle rule (degree 5) in barycentric form:
/// `(λ, weight)` with weights summing to one.
pub fn triangle7<T: Scalar>() -> [([T; 3], T); 7] {
    let s15 = T::of(15.0).sqrt();
    let d21 = T::of(21.0);
    let a1 = (T::of(9.0) - T::of(2.0) * s15) / d21;
    let b1 = (T::of(6.0) + s15) / d21;
    let w1 = (T::of(155.0) + s15) / T::of(1200.0);
    let a2 = (T::of(9.0) + T::of(2.0) * s15) / d21;
    let b2 = (T::of(6.0) - s15) / d21;
    let w2 = (T::of(155.0) - s15) / T::of(1200.0);
    let third = T::one() / T::of(3.0);
    [
        ([third, third, third], T::of(9.0) / T::of(40.0)),
        ([a1, b1, b1], w1),
        ([b1, a1, b1], w1),
        ([b1, b1, a1], w1),
        ([a2, b2, b2], w2),
        ([b2, a2, b2], w2),
        ([b2, b2, a2], w2),
    ]
}

/// Maps barycentric coordinates to a point of the triangle `pts`.
#[inline]
pub fn from_barycentric<T: Scalar>(pts: &[Vec2<T>; 3], l: &[T; 3]) -> Vec2<T> {
    [
        l[0] * pts[0][0] + l[1] * pts[1][0] + l[2] * pts[2][0],
        l[0] * pts[0][1] + l[1] * pts[1][1] + l[2] * pts[2][1],
    ]
}

/// Integral of `f` over the triangle `pts` with area `area`, 7-point rule.
pub fn integrate_triangle<T: Scalar>(pts: &[Vec2<T>; 3], area: T, f: impl Fn(Vec2<T>, &[T; 3]) -> T) -> T {
    area * triangle7::<T>().iter().map(|(l, w)| *w * f(from_barycentric(pts, l), l)).sum::<T>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss2_integrates_cubics() {
        let avg = segment_average([0.0f64, 0.0], [1.0, 0.0], |p| p[0].powi(3));
        assert!((avg - 0.25).abs() < 1e-15);
    }

    #[test]
    fn triangle7_exact_to_degree_five() {
        // reference triangle (0,0),(1,0),(0,1): ∫ x^a y^b = a! b! / (a+b+2)!
        let fact = |n: u32| (1..=n).product::<u32>() as f64;
        let pts = [[0.0f64, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let q = integrate_triangle(&pts, 0.5, |p, _| p[0].powi(a as i32) * p[1].powi(b as i32));
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!((q - exact).abs() < 1e-15, "x^{a} y^{b}: {q} vs {exact}");
            }
        }
    }
}
