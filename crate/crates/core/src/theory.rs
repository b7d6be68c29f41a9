//! Deterministic order-parameter dynamics in the thermodynamic limit.
//!
//! With `t = m/N` and the averages of [`crate::averages`]:
//!
//! ```text
//! dl_B/dt  = <gv> + <g²>/(2 l_B)
//! dl_J/dt  = <fu> + <f²>/(2 l_J)
//! dR_BJ/dt = -R_BJ (l_J'/l_J + l_B'/l_B) + <gu>/l_B + <fv>/l_J + <gf>/(l_B l_J)
//! dR_J/dt  = (<fy> - R_J l_J') / l_J
//! dR_B/dt  = (<gy> - R_B <gv>)/l_B - R_B <g²>/(2 l_B²)
//! ```
//!
//! The last line follows from `d(R_B l_B)/dt = <gy>`.

use crate::averages::{compute_all, AveragesSet};
use crate::error::{Error, Result};
use crate::gaussmath::QuadratureSpec;
use crate::generalization::gen_error;
use crate::model::{MacroState, ModelParams};

/// Lengths below this abort the integration.
pub const MIN_LENGTH: f64 = 1e-6;

/// Time derivatives of the five order parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRates {
    pub r_b: f64,
    pub r_j: f64,
    pub r_bj: f64,
    pub l_b: f64,
    pub l_j: f64,
}

impl StateRates {
    pub fn as_array(&self) -> [f64; 5] {
        [self.r_b, self.r_j, self.r_bj, self.l_b, self.l_j]
    }
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub t: f64,
    pub state: MacroState,
    pub eg_b: f64,
    pub eg_j: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModelParams,
    pub dt: f64,
    pub records: Vec<Record>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }
}

/// Step size, horizon and sampling of a theory run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConfig {
    pub dt: f64,
    pub t_max: f64,
    pub record_interval: f64,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_max: 50.0,
            record_interval: 0.5,
        }
    }
}

impl TheoryConfig {
    /// Number of RK4 steps between records.
    pub fn record_every(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !(self.t_max >= 0.0) || !(self.record_interval > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need dt > 0, t_max >= 0, record_interval > 0; got {self:?}"
            )));
        }
        let ratio = self.record_interval / self.dt;
        let every = ratio.round();
        if every < 1.0 || (ratio - every).abs() > 1e-6 * ratio {
            return Err(Error::InvalidParameter(format!(
                "record_interval {} is not a whole multiple of dt {}",
                self.record_interval, self.dt
            )));
        }
        Ok(every as usize)
    }
}

/// Right-hand side assembled from a given set of averages.
pub fn rates_from_averages(state: &MacroState, avg: &AveragesSet) -> StateRates {
    let MacroState { r_b, r_j, r_bj, l_b, l_j } = *state;
    let dl_b = avg.gv + avg.g2 / (2.0 * l_b);
    let dl_j = avg.fu + avg.f2 / (2.0 * l_j);
    let dr_bj = -r_bj * (dl_j / l_j + dl_b / l_b) + avg.gu / l_b + avg.fv / l_j + avg.gf / (l_b * l_j);
    let dr_j = (-r_j * dl_j + avg.fy) / l_j;
    let dr_b = (avg.gy - avg.gv * r_b) / l_b - r_b * avg.g2 / (2.0 * l_b * l_b);
    StateRates {
        r_b: dr_b,
        r_j: dr_j,
        r_bj: dr_bj,
        l_b: dl_b,
        l_j: dl_j,
    }
}

pub fn rhs(state: &MacroState, params: &ModelParams, spec: &QuadratureSpec) -> Result<StateRates> {
    state.validate()?;
    let avg = compute_all(state, params, spec)?;
    Ok(rates_from_averages(state, &avg))
}

/// Thermodynamic-limit image of independent unit-variance initial vectors.
pub fn standard_init() -> MacroState {
    MacroState::new(0.0, 0.0, 0.0, 1.0, 1.0)
}

fn record(t: f64, state: MacroState, params: &ModelParams, spec: &QuadratureSpec) -> Result<Record> {
    Ok(Record {
        t,
        state,
        eg_b: gen_error(state.r_b, params.a, spec)?.value,
        eg_j: gen_error(state.r_j, params.a, spec)?.value,
    })
}

fn axpy(x: &MacroState, h: f64, k: &StateRates) -> MacroState {
    let (x, k) = (x.as_array(), k.as_array());
    MacroState::from_array(std::array::from_fn(|i| x[i] + h * k[i]))
}

/// Classical fixed-step RK4 from `init` to `cfg.t_max`, recording every
/// `cfg.record_interval`.
pub fn integrate(
    params: &ModelParams,
    init: &MacroState,
    cfg: &TheoryConfig,
    spec: &QuadratureSpec,
) -> Result<Trajectory> {
    params.validate()?;
    init.validate()?;
    spec.validate()?;
    let every = cfg.record_every()?;
    let n_steps = (cfg.t_max / cfg.dt).round() as usize;
    let dt = cfg.dt;

    let mut records = vec![record(0.0, *init, params, spec)?];
    let mut x = *init;
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let at = |e: Error| Error::Aborted { t, reason: e.to_string() };
        let f = |s: &MacroState| -> Result<StateRates> {
            if s.l_b < MIN_LENGTH || s.l_j < MIN_LENGTH {
                return Err(Error::InvalidParameter(format!(
                    "length vanished (l_B={}, l_J={})",
                    s.l_b, s.l_j
                )));
            }
            rhs(s, params, spec)
        };
        let k1 = f(&x).map_err(at)?;
        let k2 = f(&axpy(&x, 0.5 * dt, &k1)).map_err(at)?;
        let k3 = f(&axpy(&x, 0.5 * dt, &k2)).map_err(at)?;
        let k4 = f(&axpy(&x, dt, &k3)).map_err(at)?;
        let (xa, k1, k2, k3, k4) = (x.as_array(), k1.as_array(), k2.as_array(), k3.as_array(), k4.as_array());
        x = MacroState::from_array(std::array::from_fn(|i| {
            xa[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        }));
        if (step + 1) % every == 0 {
            let t_next = (step + 1) as f64 * dt;
            x.validate().map_err(|e| Error::Aborted {
                t: t_next,
                reason: e.to_string(),
            })?;
            records.push(record(t_next, x, params, spec)?);
        }
    }
    Ok(Trajectory {
        params: *params,
        dt,
        records,
    })
}
