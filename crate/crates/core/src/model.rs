//! The three machines: a fixed nonmonotonic true teacher `A`, a moving
//! teacher `B` and a student `J`, both simple perceptrons.

use crate::error::{Error, Result};

/// Tolerance on the Gram determinant below which a state is infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Static scalars of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Threshold of the true teacher's three-zero output function.
    pub a: f64,
    /// Learning rate of the moving teacher.
    pub eta_b: f64,
    /// Learning rate of the student.
    pub eta_j: f64,
}

impl ModelParams {
    pub fn new(a: f64, eta_b: f64, eta_j: f64) -> Result<Self> {
        let p = Self { a, eta_b, eta_j };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("a", self.a), ("eta_B", self.eta_b), ("eta_J", self.eta_j)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// For `a ≥ √(2 ln 2)` the generalization error is monotone in the
    /// direction cosine and has no interior minimum.
    pub fn is_monotone_regime(&self) -> bool {
        self.a >= (2.0 * std::f64::consts::LN_2).sqrt()
    }
}

/// The five order parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroState {
    /// Direction cosine between `A` and `B`.
    pub r_b: f64,
    /// Direction cosine between `A` and `J`.
    pub r_j: f64,
    /// Direction cosine between `B` and `J`.
    pub r_bj: f64,
    /// `‖B‖ / √N`
    pub l_b: f64,
    /// `‖J‖ / √N`
    pub l_j: f64,
}

impl MacroState {
    pub fn new(r_b: f64, r_j: f64, r_bj: f64, l_b: f64, l_j: f64) -> Self {
        Self { r_b, r_j, r_bj, l_b, l_j }
    }

    /// Determinant of the covariance of `(y, v, u)`.
    pub fn gram_determinant(&self) -> f64 {
        gram_determinant(self.r_b, self.r_j, self.r_bj)
    }

    pub fn validate(&self) -> Result<()> {
        let cosines = [self.r_b, self.r_j, self.r_bj];
        if cosines.iter().any(|r| !r.is_finite() || r.abs() > 1.0 + FEASIBILITY_TOL) {
            return Err(Error::InvalidParameter(format!(
                "direction cosines must lie in [-1, 1], got {cosines:?}"
            )));
        }
        if !(self.l_b > 0.0) || !(self.l_j > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lengths must be > 0, got l_B={}, l_J={}",
                self.l_b, self.l_j
            )));
        }
        let det = self.gram_determinant();
        if det < -FEASIBILITY_TOL {
            return Err(self.infeasible(det));
        }
        Ok(())
    }

    fn infeasible(&self, det: f64) -> Error {
        Error::InfeasibleState {
            det,
            r_b: self.r_b,
            r_j: self.r_j,
            r_bj: self.r_bj,
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.r_b, self.r_j, self.r_bj, self.l_b, self.l_j]
    }

    pub fn from_array(x: [f64; 5]) -> Self {
        Self::new(x[0], x[1], x[2], x[3], x[4])
    }
}

pub(crate) fn gram_determinant(r_b: f64, r_j: f64, r_bj: f64) -> f64 {
    1.0 + 2.0 * r_b * r_j * r_bj - r_b * r_b - r_j * r_j - r_bj * r_bj
}

/// Covariance of the internal potentials `(y, v, u)`: unit diagonal,
/// off-diagonals `R_B`, `R_J`, `R_BJ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covariance3 {
    m: [[f64; 3]; 3],
}

impl Covariance3 {
    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn r_b(&self) -> f64 {
        self.m[0][1]
    }

    pub fn r_j(&self) -> f64 {
        self.m[0][2]
    }

    pub fn r_bj(&self) -> f64 {
        self.m[1][2]
    }

    pub fn determinant(&self) -> f64 {
        gram_determinant(self.r_b(), self.r_j(), self.r_bj())
    }

    /// Lower-triangular factor `L` with `L Lᵀ = Σ`. Zero pivots (within
    /// tolerance) produce a zero column, so rank-deficient matrices still
    /// factor.
    pub fn cholesky(&self) -> Result<[[f64; 3]; 3]> {
        let m = &self.m;
        let mut l = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
                if i == j {
                    let pivot = m[i][i] - s;
                    if pivot < -FEASIBILITY_TOL {
                        return Err(Error::InfeasibleState {
                            det: self.determinant(),
                            r_b: self.r_b(),
                            r_j: self.r_j(),
                            r_bj: self.r_bj(),
                        });
                    }
                    l[i][i] = pivot.max(0.0).sqrt();
                } else if l[j][j] > 1e-12 {
                    l[i][j] = (m[i][j] - s) / l[j][j];
                }
            }
        }
        Ok(l)
    }

    /// Eigenvalues in ascending order (closed form for symmetric 3×3).
    pub fn eigenvalues(&self) -> [f64; 3] {
        let (p, q, r) = (self.r_b(), self.r_j(), self.r_bj());
        // Σ = I + K with K having zero diagonal; eigenvalues of K solve
        // λ³ - (p²+q²+r²) λ - 2pqr = 0.
        let s = p * p + q * q + r * r;
        if s < 1e-300 {
            return [1.0; 3];
        }
        let m = (s / 3.0).sqrt();
        let c = (p * q * r / (m * m * m)).clamp(-1.0, 1.0);
        let phi = c.acos() / 3.0;
        let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
        let mut ev = [
            1.0 + 2.0 * m * phi.cos(),
            1.0 + 2.0 * m * (phi + two_pi_3).cos(),
            1.0 + 2.0 * m * (phi - two_pi_3).cos(),
        ];
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Covariance of `(y, v, u)` at a macroscopic state. Rejects states whose
/// Gram determinant is below `-FEASIBILITY_TOL`; a slightly negative value
/// within tolerance is accepted with a warning.
pub fn build_covariance(state: &MacroState) -> Result<Covariance3> {
    let (r_b, r_j, r_bj) = (state.r_b, state.r_j, state.r_bj);
    let det = state.gram_determinant();
    if det < -FEASIBILITY_TOL || [r_b, r_j, r_bj].iter().any(|r| r.abs() > 1.0 + FEASIBILITY_TOL) {
        return Err(state.infeasible(det));
    }
    if det < 0.0 {
        log::warn!("Gram determinant {det:e} slightly negative; treated as singular");
    }
    Ok(Covariance3 {
        m: [[1.0, r_b, r_j], [r_b, 1.0, r_bj], [r_j, r_bj, 1.0]],
    })
}

/// `sgn(z)` with `sgn(0) = +1`.
#[inline]
pub fn sign(z: f64) -> f64 {
    if z >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Step function with `Θ(0) = 1`.
#[inline]
pub fn step_fn(z: f64) -> f64 {
    if z >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Output `sgn((y-a) y (y+a))` of the nonmonotonic true teacher.
#[inline]
pub fn true_teacher_output(y: f64, a: f64) -> f64 {
    sign((y - a) * y * (y + a))
}

/// Update magnitude of the moving teacher: `η_B Θ(-v d) d`.
#[inline]
pub fn g_magnitude(y: f64, v: f64, params: &ModelParams) -> f64 {
    let d = true_teacher_output(y, params.a);
    params.eta_b * step_fn(-v * d) * d
}

/// Update magnitude of the student: `η_J Θ(-u v) sgn(v)`.
#[inline]
pub fn f_magnitude(u: f64, v: f64, eta_j: f64) -> f64 {
    eta_j * step_fn(-u * v) * sign(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params() -> ModelParams {
        ModelParams::new(0.5, 0.1, 0.2).unwrap()
    }

    #[test]
    fn teacher_output_zones() {
        let a = 0.5;
        assert_eq!(true_teacher_output(a / 2.0, a), -1.0);
        assert_eq!(true_teacher_output(2.0 * a, a), 1.0);
        assert_eq!(true_teacher_output(0.0, a), 1.0);
        assert_eq!(true_teacher_output(a, a), 1.0);
        assert_eq!(true_teacher_output(-a, a), 1.0);
        assert_eq!(true_teacher_output(-0.3, a), 1.0);
        assert_eq!(true_teacher_output(-0.7, a), -1.0);
    }

    #[test]
    fn g_examples() {
        let p = params();
        assert_eq!(g_magnitude(1.0, -1.0, &p), 0.1);
        assert_eq!(g_magnitude(1.0, 1.0, &p), 0.0);
        assert_eq!(g_magnitude(0.25, 1.0, &p), -0.1);
    }

    #[test]
    fn f_examples() {
        assert_eq!(f_magnitude(-0.3, 0.7, 0.2), 0.2);
        assert_eq!(f_magnitude(0.3, 0.7, 0.2), 0.0);
        assert_eq!(f_magnitude(0.3, -0.7, 0.2), -0.2);
    }

    #[test]
    fn covariance_examples() {
        let c = build_covariance(&MacroState::new(0.0, 0.0, 0.0, 1.0, 1.0)).unwrap();
        assert_eq!(c.matrix(), &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(matches!(
            build_covariance(&MacroState::new(1.0, 1.0, 0.0, 1.0, 1.0)),
            Err(Error::InfeasibleState { .. })
        ));
        let c = build_covariance(&MacroState::new(0.5, 0.5, 0.5, 1.0, 1.0)).unwrap();
        // 1 + 2/8 - 3/4
        assert_abs_diff_eq!(c.determinant(), 0.5, epsilon = 1e-15);
        let ev = c.eigenvalues();
        assert_abs_diff_eq!(ev[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn cholesky_reproduces_matrix() {
        let c = build_covariance(&MacroState::new(0.6, -0.2, 0.3, 1.0, 1.0)).unwrap();
        let l = c.cholesky().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| l[i][k] * l[j][k]).sum();
                assert_abs_diff_eq!(s, c.matrix()[i][j], epsilon = 1e-14);
            }
        }
        // singular: u identical to v
        let c = build_covariance(&MacroState::new(0.4, 0.4, 1.0, 1.0, 1.0)).unwrap();
        let l = c.cholesky().unwrap();
        assert_abs_diff_eq!(l[2][2], 0.0, epsilon = 1e-7);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(-1.0, 0.1, 0.1).is_err());
        assert!(ModelParams::new(0.5, 0.0, 0.1).is_err());
        assert!(ModelParams::new(0.5, 0.1, f64::NAN).is_err());
        assert!(!params().is_monotone_regime());
        assert!(ModelParams::new(1.2, 0.1, 0.1).unwrap().is_monotone_regime());
    }

    #[test]
    fn state_validation() {
        assert!(MacroState::new(0.0, 0.0, 0.0, 1.0, 1.0).validate().is_ok());
        assert!(MacroState::new(1.2, 0.0, 0.0, 1.0, 1.0).validate().is_err());
        assert!(MacroState::new(0.0, 0.0, 0.0, 0.0, 1.0).validate().is_err());
        assert!(MacroState::new(0.9, -0.9, 0.9, 1.0, 1.0).validate().is_err());
    }

    fn feasible_cosines() -> impl Strategy<Value = (f64, f64, f64)> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("feasible", |&(p, q, r)| gram_determinant(p, q, r) >= 0.0)
    }

    proptest! {
        #[test]
        fn teacher_output_is_odd(y in -5.0f64..5.0, a in 0.05f64..2.0) {
            prop_assume!((y.abs() - a).abs() > 1e-12 && y != 0.0);
            prop_assert_eq!(true_teacher_output(-y, a), -true_teacher_output(y, a));
        }

        #[test]
        fn g_zero_iff_agreement(y in -5.0f64..5.0, v in -5.0f64..5.0) {
            let p = params();
            let d = true_teacher_output(y, p.a);
            prop_assert_eq!(g_magnitude(y, v, &p) == 0.0, v * d > 0.0);
        }

        #[test]
        fn f_odd_under_joint_flip(u in -5.0f64..5.0, v in -5.0f64..5.0) {
            prop_assume!(u * v != 0.0);
            prop_assert_eq!(f_magnitude(-u, -v, 0.3), -f_magnitude(u, v, 0.3));
            // only the signs of u and v matter
            prop_assert_eq!(f_magnitude(2.0 * u, 0.5 * v, 0.3), f_magnitude(u, v, 0.3));
        }

        #[test]
        fn covariance_is_psd((p, q, r) in feasible_cosines()) {
            let c = build_covariance(&MacroState::new(p, q, r, 1.0, 1.0)).unwrap();
            prop_assert!(c.eigenvalues()[0] >= -FEASIBILITY_TOL);
        }
    }
}
