//! Scalar Gaussian primitives and adaptive one-dimensional quadrature.
//!
//! Every expectation in the crate is an integral against the standard normal
//! measure `Dy = exp(-y²/2) dy / √(2π)`. The quadrature here is tuned for
//! that case: smooth integrands, semi-infinite ranges cut off a fixed number
//! of standard deviations out.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// `1 / √(2π)`
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Points per Gauss–Legendre panel.
const PANEL_ORDER: usize = 10;

/// Quadrature policy shared by every integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Target absolute error of the whole integral.
    pub abs_tol: f64,
    /// Maximum number of panel bisections before giving up.
    pub max_subdivisions: usize,
    /// Infinite limits are replaced by `±infinite_cutoff`.
    pub infinite_cutoff: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_subdivisions: 400,
            infinite_cutoff: 10.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "abs_tol must be > 0, got {}",
                self.abs_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidParameter(
                "max_subdivisions must be >= 1".into(),
            ));
        }
        if !(self.infinite_cutoff >= 8.0) {
            return Err(Error::InvalidParameter(format!(
                "infinite_cutoff must be >= 8, got {}",
                self.infinite_cutoff
            )));
        }
        Ok(())
    }
}

/// Value of an integral together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_err: f64,
}

/// Standard normal density `exp(-y²/2)/√(2π)`.
#[inline]
pub fn std_normal_density(y: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * y * y).exp()
}

/// Upper tail of the standard normal, `H(u) = ∫_u^∞ Dy`.
///
/// Goes through `erfc` so that large positive arguments keep full relative
/// precision. Accepts `±∞`.
#[inline]
pub fn h_tail(u: f64) -> f64 {
    0.5 * libm::erfc(u * FRAC_1_SQRT_2)
}

/// Standard normal CDF, `Φ(u) = H(-u)`.
#[inline]
pub fn std_normal_cdf(u: f64) -> f64 {
    h_tail(-u)
}

fn gauss_legendre() -> &'static ([f64; PANEL_ORDER], [f64; PANEL_ORDER]) {
    static RULE: OnceLock<([f64; PANEL_ORDER], [f64; PANEL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = PANEL_ORDER;
        let mut nodes = [0.0; PANEL_ORDER];
        let mut weights = [0.0; PANEL_ORDER];
        for i in 0..n.div_ceil(2) {
            // Newton iteration on P_n from the Chebyshev-like initial guess.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        (nodes, weights)
    })
}

fn panel<F>(f: &mut F, lo: f64, hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (nodes, weights) = gauss_legendre();
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        sum += w * f(mid + half * x)?;
    }
    Ok(sum * half)
}

struct Interval {
    lo: f64,
    hi: f64,
    left: f64,
    right: f64,
    err: f64,
}

impl Interval {
    fn new<F>(f: &mut F, lo: f64, hi: f64, whole: f64) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mid = 0.5 * (lo + hi);
        let left = panel(f, lo, mid)?;
        let right = panel(f, mid, hi)?;
        Ok(Self {
            lo,
            hi,
            left,
            right,
            err: (left + right - whole).abs(),
        })
    }

    fn value(&self) -> f64 {
        self.left + self.right
    }
}

/// Adaptive Gauss–Legendre quadrature of a fallible integrand.
///
/// Each interval carries the difference between its one-panel and two-panel
/// estimates as its error; the worst interval is bisected until the summed
/// error drops below `spec.abs_tol`.
pub fn try_integrate_1d<F>(mut f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    if lo.is_nan() || hi.is_nan() || !(lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "integration range must satisfy lo < hi, got ({lo}, {hi})"
        )));
    }
    let c = spec.infinite_cutoff;
    let lo = if lo == f64::NEG_INFINITY { -c } else { lo };
    let hi = if hi == f64::INFINITY { c } else { hi };
    if !(lo < hi) {
        // The whole range lies beyond the cutoff.
        return Ok(Quadrature {
            value: 0.0,
            abs_err: 0.0,
        });
    }

    let whole = panel(&mut f, lo, hi)?;
    let mut intervals = vec![Interval::new(&mut f, lo, hi, whole)?];
    let mut splits = 0;
    loop {
        let total_err: f64 = intervals.iter().map(|i| i.err).sum();
        if total_err <= spec.abs_tol {
            let value = intervals.iter().map(Interval::value).sum();
            return Ok(Quadrature {
                value,
                abs_err: total_err,
            });
        }
        if splits >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                subdivisions: splits,
                abs_err: total_err,
            });
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.err.total_cmp(&b.1.err))
            .map(|(k, _)| k)
            .expect("at least one interval");
        let iv = intervals.swap_remove(worst);
        let mid = 0.5 * (iv.lo + iv.hi);
        intervals.push(Interval::new(&mut f, iv.lo, mid, iv.left)?);
        intervals.push(Interval::new(&mut f, mid, iv.hi, iv.right)?);
        splits += 1;
    }
}

/// Adaptive quadrature of `f` over `(lo, hi)`; either limit may be infinite.
pub fn integrate_1d<F>(mut f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Quadrature>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_1d(|x| Ok(f(x)), lo, hi, spec)
}
