//! Generalization error of a sign-output perceptron against the nonmonotonic
//! true teacher, as a function of their direction cosine `R`.
//!
//! With `(y, w)` jointly standard normal with correlation `R`, the error is
//! `P[(y-a) y (y+a) w < 0]`. Splitting on the teacher's sign regions and
//! using `y → -y` symmetry,
//!
//! ```text
//! ε_g(R, a) = 2 [ ∫_0^a H(-R y / √(1-R²)) Dy + ∫_a^∞ H(R y / √(1-R²)) Dy ]
//! ```
//!
//! At `R = ±1` the integrands become indicators and the limits are
//! `ε_g(1) = 1 - 2 H(a)` and `ε_g(-1) = 2 H(a)`.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::gaussmath::{h_tail, std_normal_density, try_integrate_1d, QuadratureSpec};
use crate::model::FEASIBILITY_TOL;

/// Below this `√(1-R²)` the analytic `R = ±1` limit is used.
const DEGENERATE_SQRT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenErrorResult {
    pub value: f64,
    pub quadrature_abs_err: f64,
}

pub fn gen_error(r: f64, a: f64, spec: &QuadratureSpec) -> Result<GenErrorResult> {
    if !(r.abs() <= 1.0 + FEASIBILITY_TOL) {
        return Err(Error::InvalidParameter(format!(
            "direction cosine must lie in [-1, 1], got {r}"
        )));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("a must be > 0, got {a}")));
    }
    let r = r.clamp(-1.0, 1.0);
    let s = (1.0 - r * r).max(0.0).sqrt();
    if s < DEGENERATE_SQRT {
        let at_one = 1.0 - 2.0 * h_tail(a);
        let value = if r > 0.0 { at_one } else { 1.0 - at_one };
        return Ok(GenErrorResult {
            value,
            quadrature_abs_err: 0.0,
        });
    }
    let k = r / s;
    // Each half carries half the tolerance; the result is doubled.
    let half_spec = QuadratureSpec {
        abs_tol: spec.abs_tol / 4.0,
        ..*spec
    };
    let inner = try_integrate_1d(|y| Ok(h_tail(-k * y) * std_normal_density(y)), 0.0, a, &half_spec)?;
    let outer = try_integrate_1d(
        |y| Ok(h_tail(k * y) * std_normal_density(y)),
        a,
        f64::INFINITY,
        &half_spec,
    )?;
    Ok(GenErrorResult {
        value: (2.0 * (inner.value + outer.value)).clamp(0.0, 1.0),
        quadrature_abs_err: 2.0 * (inner.abs_err + outer.abs_err),
    })
}

/// Location of the minimum of `ε_g` over `R ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalR {
    pub r: f64,
    /// `a ≥ √(2 ln 2)`: ε_g increases monotonically on `[0, 1]` and the
    /// minimum sits at `R = 0`.
    pub monotone: bool,
}

/// `R* = √((2 ln 2 - a²) / (2 ln 2))`, where `dε_g/dR ∝ 1 - 2 exp(-a² / (2(1-R²)))`
/// changes sign.
pub fn optimal_r(a: f64) -> OptimalR {
    let two_ln2 = 2.0 * LN_2;
    if a * a >= two_ln2 {
        OptimalR { r: 0.0, monotone: true }
    } else {
        OptimalR {
            r: ((two_ln2 - a * a) / two_ln2).sqrt(),
            monotone: false,
        }
    }
}

/// `ε_g` tabulated over `grid`, in input order.
pub fn gen_error_curve(a: f64, grid: &[f64], spec: &QuadratureSpec) -> Result<Vec<(f64, f64)>> {
    grid.iter()
        .map(|&r| gen_error(r, a, spec).map(|e| (r, e.value)))
        .collect()
}
