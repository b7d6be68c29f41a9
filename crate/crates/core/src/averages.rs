//! The nine sample averages over the trivariate Gaussian `(y, v, u)` that
//! drive the order-parameter equations, plus a brute-force Monte Carlo
//! oracle over the same distribution.
//!
//! Notation: `g = η_B Θ(-v d) d` is the moving teacher's update magnitude,
//! `f = η_J Θ(-u v) sgn(v)` the student's, `d` the true teacher's output and
//! `k = 2 exp(-a²/2) - 1`.
//!
//! ```text
//! <gv>  = η_B/√(2π) (R_B k - 1)          <gy> = η_B/√(2π) (k - R_B)
//! <gu>  = η_B/√(2π) (R_J k - R_BJ)       <g²> = η_B² ε_g(R_B)
//! <fu>  = η_J (R_BJ - 1)/√(2π) = -<fv>   <f²> = η_J² acos(R_BJ)/π
//! <fy>  = η_J (R_B - R_J)/√(2π)
//! <gf>  = -η_B η_J P[v d < 0, u v < 0]
//! ```
//!
//! When both gates are open `d = -sgn(v)`, so `g f = -η_B η_J`. The joint
//! probability is evaluated by conditioning on `y` and on
//! `z = (v - R_B y)/√(1-R_B²)`; given both, `u` is normal with mean
//! `R_J y + z (R_BJ - R_B R_J)/√(1-R_B²)` and standard deviation
//! `√det Σ / √(1-R_B²)`. With `y → -y` symmetry,
//!
//! ```text
//! <gf> = -2 η_B η_J (∫_0^a + ∫_{-∞}^{-a}) Dy ∫_{-y R_B/√(1-R_B²)}^∞ Dz
//!          H( (y R_J √(1-R_B²) + z (R_BJ - R_B R_J)) / √det Σ )
//! ```

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gaussmath::{h_tail, std_normal_density, try_integrate_1d, QuadratureSpec, INV_SQRT_2PI};
use crate::generalization::gen_error;
use crate::model::{build_covariance, f_magnitude, g_magnitude, Covariance3, MacroState, ModelParams};
use crate::rng::stream_rng;

/// Smallest `n_samples` accepted by the oracle.
pub const MIN_ORACLE_SAMPLES: usize = 10_000;
/// Samples used for `<gf>` at a singular covariance.
pub const DEGENERATE_ORACLE_SAMPLES: usize = 1_000_000;
const DEGENERATE_ORACLE_SEED: u64 = 0x6766_6f72_6163_6c65;
/// Conditional variances below this are treated as singular.
const DEGENERATE_TOL: f64 = 1e-12;

/// Names of the nine averages, in `AveragesSet::as_array` order.
pub const AVERAGE_NAMES: [&str; 9] = ["gv", "g2", "fu", "f2", "gu", "fv", "gf", "fy", "gy"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragesSet {
    pub gv: f64,
    pub g2: f64,
    pub fu: f64,
    pub f2: f64,
    pub gu: f64,
    pub fv: f64,
    pub gf: f64,
    pub fy: f64,
    pub gy: f64,
}

impl AveragesSet {
    pub fn as_array(&self) -> [f64; 9] {
        [
            self.gv, self.g2, self.fu, self.f2, self.gu, self.fv, self.gf, self.fy, self.gy,
        ]
    }

    /// Checks the a-priori magnitude bounds of every entry.
    pub fn within_bounds(&self, params: &ModelParams) -> bool {
        let sqrt_2_over_pi = (2.0 / std::f64::consts::PI).sqrt();
        let gb = params.eta_b * sqrt_2_over_pi + 1e-9;
        let fb = params.eta_j * sqrt_2_over_pi + 1e-9;
        self.g2 >= 0.0
            && self.f2 >= 0.0
            && self.gv.abs() <= gb
            && self.gu.abs() <= gb
            && self.gy.abs() <= gb
            && self.fu.abs() <= fb
            && self.fv.abs() <= fb
            && self.fy.abs() <= fb
            && self.gf.abs() <= params.eta_b * params.eta_j + 1e-12
    }
}

fn exp_factor(a: f64) -> f64 {
    2.0 * (-0.5 * a * a).exp() - 1.0
}

pub fn avg_gv(state: &MacroState, params: &ModelParams) -> f64 {
    params.eta_b * INV_SQRT_2PI * (state.r_b * exp_factor(params.a) - 1.0)
}

pub fn avg_g2(state: &MacroState, params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    Ok(params.eta_b * params.eta_b * gen_error(state.r_b, params.a, spec)?.value)
}

pub fn avg_fu(state: &MacroState, params: &ModelParams) -> f64 {
    params.eta_j * (state.r_bj - 1.0) * INV_SQRT_2PI
}

pub fn avg_fv(state: &MacroState, params: &ModelParams) -> f64 {
    -avg_fu(state, params)
}

/// `η_J² × P[sgn u ≠ sgn v]`, continuous over the whole range of `R_BJ`.
pub fn avg_f2(state: &MacroState, params: &ModelParams) -> f64 {
    params.eta_j * params.eta_j * state.r_bj.clamp(-1.0, 1.0).acos() / std::f64::consts::PI
}

pub fn avg_gu(state: &MacroState, params: &ModelParams) -> f64 {
    params.eta_b * INV_SQRT_2PI * (state.r_j * exp_factor(params.a) - state.r_bj)
}

/// `<gf>` by nested quadrature. Fails with `DegenerateCovariance` when the
/// covariance is singular (`R_B = ±1` or `det Σ = 0`).
pub fn avg_gf(state: &MacroState, params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    let cov = build_covariance(state)?;
    let (r_b, r_j, r_bj) = (cov.r_b(), cov.r_j(), cov.r_bj());
    let s2 = 1.0 - r_b * r_b;
    let det = cov.determinant();
    if s2 < DEGENERATE_TOL {
        return Err(Error::DegenerateCovariance(s2));
    }
    if det < DEGENERATE_TOL {
        return Err(Error::DegenerateCovariance(det));
    }
    let s = s2.sqrt();
    let sd = det.sqrt();
    let y_coef = r_j * s / sd;
    let z_coef = (r_bj - r_b * r_j) / sd;
    let lower = -r_b / s;

    let inner_spec = QuadratureSpec {
        abs_tol: spec.abs_tol / 10.0,
        ..*spec
    };
    let outer_spec = QuadratureSpec {
        abs_tol: spec.abs_tol / 4.0,
        ..*spec
    };
    let inner = |y: f64| -> Result<f64> {
        let z0 = lower * y;
        if z0 >= spec.infinite_cutoff {
            return Ok(0.0);
        }
        let q = try_integrate_1d(
            |z| Ok(std_normal_density(z) * h_tail(y_coef * y + z_coef * z)),
            z0,
            f64::INFINITY,
            &inner_spec,
        )?;
        Ok(std_normal_density(y) * q.value)
    };
    let a = params.a;
    let first = try_integrate_1d(inner, 0.0, a, &outer_spec)?;
    let second = try_integrate_1d(inner, f64::NEG_INFINITY, -a, &outer_spec)?;
    Ok(-2.0 * params.eta_b * params.eta_j * (first.value + second.value))
}

pub fn avg_fy(state: &MacroState, params: &ModelParams) -> f64 {
    params.eta_j * (state.r_b - state.r_j) * INV_SQRT_2PI
}

pub fn avg_gy(state: &MacroState, params: &ModelParams) -> f64 {
    params.eta_b * INV_SQRT_2PI * (exp_factor(params.a) - state.r_b)
}

/// All nine averages at one state. A singular covariance falls back to the
/// Monte Carlo oracle (fixed seed) for `<gf>`.
pub fn compute_all(state: &MacroState, params: &ModelParams, spec: &QuadratureSpec) -> Result<AveragesSet> {
    build_covariance(state)?;
    let gf = match avg_gf(state, params, spec) {
        Ok(v) => v,
        Err(Error::DegenerateCovariance(x)) => {
            log::warn!("singular covariance ({x:e}); <gf> from Monte Carlo oracle");
            let p = *params;
            oracle_average(
                move |y, v, u| g_magnitude(y, v, &p) * f_magnitude(u, v, p.eta_j),
                &build_covariance(state)?,
                DEGENERATE_ORACLE_SAMPLES,
                DEGENERATE_ORACLE_SEED,
            )?
            .mean
        }
        Err(e) => return Err(e),
    };
    Ok(AveragesSet {
        gv: avg_gv(state, params),
        g2: avg_g2(state, params, spec)?,
        fu: avg_fu(state, params),
        f2: avg_f2(state, params),
        gu: avg_gu(state, params),
        fv: avg_fv(state, params),
        gf,
        fy: avg_fy(state, params),
        gy: avg_gy(state, params),
    })
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub mean: f64,
    pub std_err: f64,
}

impl OracleEstimate {
    /// `|value - mean|` in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (value - self.mean).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_err
        }
    }
}

/// Monte Carlo estimates of `K` expectations over `(y, v, u) ~ N(0, cov)`,
/// sharing one sample stream. Samples are `L ξ` with `L` the Cholesky
/// factor of `cov` and `ξ` i.i.d. standard normal.
pub fn oracle_averages<const K: usize, F>(
    f: F,
    cov: &Covariance3,
    n_samples: usize,
    seed: u64,
) -> Result<[OracleEstimate; K]>
where
    F: Fn(f64, f64, f64) -> [f64; K],
{
    if n_samples < MIN_ORACLE_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "oracle needs at least {MIN_ORACLE_SAMPLES} samples, got {n_samples}"
        )));
    }
    let l = cov.cholesky()?;
    let mut rng = stream_rng(seed, 0);
    let mut mean = [0.0; K];
    let mut m2 = [0.0; K];
    for i in 0..n_samples {
        let e0: f64 = StandardNormal.sample(&mut rng);
        let e1: f64 = StandardNormal.sample(&mut rng);
        let e2: f64 = StandardNormal.sample(&mut rng);
        let y = l[0][0] * e0;
        let v = l[1][0] * e0 + l[1][1] * e1;
        let u = l[2][0] * e0 + l[2][1] * e1 + l[2][2] * e2;
        let x = f(y, v, u);
        let n = (i + 1) as f64;
        for k in 0..K {
            let delta = x[k] - mean[k];
            mean[k] += delta / n;
            m2[k] += delta * (x[k] - mean[k]);
        }
    }
    let n = n_samples as f64;
    Ok(std::array::from_fn(|k| OracleEstimate {
        mean: mean[k],
        std_err: (m2[k] / (n - 1.0) / n).sqrt(),
    }))
}

pub fn oracle_average<F>(f: F, cov: &Covariance3, n_samples: usize, seed: u64) -> Result<OracleEstimate>
where
    F: Fn(f64, f64, f64) -> f64,
{
    oracle_averages(|y, v, u| [f(y, v, u)], cov, n_samples, seed).map(|[e]| e)
}

/// Oracle estimates of all nine averages, in `AVERAGE_NAMES` order.
pub fn oracle_all(
    state: &MacroState,
    params: &ModelParams,
    n_samples: usize,
    seed: u64,
) -> Result<[OracleEstimate; 9]> {
    let cov = build_covariance(state)?;
    let p = *params;
    oracle_averages(
        move |y, v, u| {
            let g = g_magnitude(y, v, &p);
            let f = f_magnitude(u, v, p.eta_j);
            [g * v, g * g, f * u, f * f, g * u, f * v, g * f, f * y, g * y]
        },
        &cov,
        n_samples,
        seed,
    )
}
