//! Small dense solves shared by the Newton and continuation code.
//!
//! Every solve goes through the SVD so that rank-deficient Jacobians (the
//! Morse–Bott families of round or symmetric curves) still yield the
//! minimum-norm Gauss–Newton step instead of failing outright.

use nalgebra::{Matrix2, Matrix4, Matrix5, Vector2, Vector4, Vector5};

/// Singular values below this fraction of the largest are treated as zero.
const RANK_CUTOFF: f64 = 1e-13;

/// Result of a minimum-norm solve.
#[derive(Clone, Copy, Debug)]
pub(crate) struct MinNormSolve<V> {
    pub x: V,
}

macro_rules! min_norm_solver {
    ($name:ident, $mat:ty, $vec:ty) => {
        pub(crate) fn $name(a: &$mat, b: &$vec) -> Option<MinNormSolve<$vec>> {
            let svd = a.svd(true, true);
            let smax = svd.singular_values.max();
            if !smax.is_finite() || smax == 0.0 {
                return None;
            }
            let x = svd.solve(b, smax * RANK_CUTOFF).ok()?;
            if x.iter().any(|v| !v.is_finite()) {
                return None;
            }
            Some(MinNormSolve { x })
        }
    };
}

min_norm_solver!(solve2, Matrix2<f64>, Vector2<f64>);
min_norm_solver!(solve4, Matrix4<f64>, Vector4<f64>);
min_norm_solver!(solve5, Matrix5<f64>, Vector5<f64>);

/// Condition number of a 4×4 matrix (`σ_max / σ_min`).
pub(crate) fn condition4(a: &Matrix4<f64>) -> f64 {
    let sv = a.singular_values();
    let smin = sv.min();
    if smin > 0.0 {
        sv.max() / smin
    } else {
        f64::INFINITY
    }
}

/// Right singular vector for the smallest singular value of a 4×4 matrix.
pub(crate) fn null_direction4(a: &Matrix4<f64>) -> Vector4<f64> {
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    v_t.row(imin).transpose()
}

/// Eigenvalues of a symmetric 2×2 matrix `[[a, b], [b, c]]`, ascending.
pub(crate) fn sym2_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mean - r, mean + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_system_gets_minimum_norm_solution() {
        // x + y = 2 twice: minimum-norm solution is (1, 1).
        let a = Matrix2::new(1.0, 1.0, 1.0, 1.0);
        let b = Vector2::new(2.0, 2.0);
        let s = solve2(&a, &b).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
        assert!(condition4(&Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 1.0, 0.0))).is_infinite());
    }

    #[test]
    fn symmetric_eigenvalues() {
        let (l0, l1) = sym2_eigenvalues(2.0, 1.0, 2.0);
        assert!((l0 - 1.0).abs() < 1e-14 && (l1 - 3.0).abs() < 1e-14);
    }
}
