//! Finite-N Monte Carlo realization of the learning process.
//!
//! Each step draws an input `x` with i.i.d. `N(0, 1/N)` components, computes
//! the three internal potentials and applies both perceptron updates from
//! that same example. The student is trained on the moving teacher's output
//! before the moving teacher's own update.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussmath::QuadratureSpec;
use crate::generalization::gen_error;
use crate::model::{f_magnitude, g_magnitude, sign, true_teacher_output, MacroState, ModelParams};
use crate::rng::{trial_rng, Purpose};
use crate::theory::{Record, Trajectory};

pub const MIN_DIMENSION: usize = 100;
pub const MIN_TEST_INPUTS: usize = 10_000;

/// Weight vectors of the three machines.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroState {
    a: Vec<f64>,
    b: Vec<f64>,
    j: Vec<f64>,
    steps: u64,
    x: Vec<f64>,
}

impl MicroState {
    /// All three vectors drawn i.i.d. from `N(0, 1)`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n < MIN_DIMENSION {
            return Err(Error::InvalidParameter(format!(
                "dimension must be >= {MIN_DIMENSION}, got {n}"
            )));
        }
        let mut draw = || -> Vec<f64> { (0..n).map(|_| StandardNormal.sample(rng)).collect() };
        let a = draw();
        let b = draw();
        let j = draw();
        Ok(Self::assemble(a, b, j))
    }

    pub fn from_vectors(a: Vec<f64>, b: Vec<f64>, j: Vec<f64>) -> Result<Self> {
        let n = a.len();
        if b.len() != n || j.len() != n {
            return Err(Error::InvalidParameter("vectors must share one dimension".into()));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("empty vectors".into()));
        }
        Ok(Self::assemble(a, b, j))
    }

    fn assemble(a: Vec<f64>, b: Vec<f64>, j: Vec<f64>) -> Self {
        let n = a.len();
        Self {
            a,
            b,
            j,
            steps: 0,
            x: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Continuous time `m / N`.
    pub fn time(&self) -> f64 {
        self.steps as f64 / self.dim() as f64
    }

    pub fn true_teacher(&self) -> &[f64] {
        &self.a
    }

    pub fn moving_teacher(&self) -> &[f64] {
        &self.b
    }

    pub fn student(&self) -> &[f64] {
        &self.j
    }

    fn draw_input<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let scale = 1.0 / (self.dim() as f64).sqrt();
        for xi in self.x.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *xi = z * scale;
        }
    }

    /// `(A·x, B·x, J·x)` for the current input buffer.
    fn potentials(&self) -> (f64, f64, f64) {
        let (mut y, mut bx, mut jx) = (0.0, 0.0, 0.0);
        for i in 0..self.x.len() {
            let xi = self.x[i];
            y += self.a[i] * xi;
            bx += self.b[i] * xi;
            jx += self.j[i] * xi;
        }
        (y, bx, jx)
    }

    /// One online update of both learners from a fresh example.
    ///
    /// `v = B·x / l_B` and `u = J·x / l_J` enter the rules only through
    /// their signs, so the unnormalized projections are used directly.
    pub fn step<R: Rng + ?Sized>(&mut self, params: &ModelParams, rng: &mut R) {
        self.draw_input(rng);
        self.learn_from_input(params);
    }

    fn learn_from_input(&mut self, params: &ModelParams) {
        let (y, v, u) = self.potentials();
        let g = g_magnitude(y, v, params);
        let f = f_magnitude(u, v, params.eta_j);
        if g != 0.0 {
            for (bi, xi) in self.b.iter_mut().zip(&self.x) {
                *bi += g * xi;
            }
        }
        if f != 0.0 {
            for (ji, xi) in self.j.iter_mut().zip(&self.x) {
                *ji += f * xi;
            }
        }
        self.steps += 1;
    }

    /// Exact order parameters of the current weights.
    pub fn measure(&self) -> MacroState {
        let (mut aa, mut bb, mut jj, mut ab, mut aj, mut bj) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..self.dim() {
            let (a, b, j) = (self.a[i], self.b[i], self.j[i]);
            aa += a * a;
            bb += b * b;
            jj += j * j;
            ab += a * b;
            aj += a * j;
            bj += b * j;
        }
        let n = self.dim() as f64;
        MacroState {
            r_b: ab / (aa * bb).sqrt(),
            r_j: aj / (aa * jj).sqrt(),
            r_bj: bj / (bb * jj).sqrt(),
            l_b: (bb / n).sqrt(),
            l_j: (jj / n).sqrt(),
        }
    }

    /// Empirical generalization errors of `B` and `J` on `test_inputs` fresh
    /// inputs. Leaves the weights untouched.
    pub fn estimate_gen_errors<R: Rng + ?Sized>(
        &mut self,
        params: &ModelParams,
        test_inputs: usize,
        rng: &mut R,
    ) -> Result<(f64, f64)> {
        if test_inputs < MIN_TEST_INPUTS {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_TEST_INPUTS} test inputs, got {test_inputs}"
            )));
        }
        let (mut wrong_b, mut wrong_j) = (0usize, 0usize);
        for _ in 0..test_inputs {
            self.draw_input(rng);
            let (y, v, u) = self.potentials();
            let d = true_teacher_output(y, params.a);
            wrong_b += (sign(v) != d) as usize;
            wrong_j += (sign(u) != d) as usize;
        }
        let n = test_inputs as f64;
        Ok((wrong_b as f64 / n, wrong_j as f64 / n))
    }
}

/// Seeded `MicroState` for trial 0.
pub fn init_micro(n: usize, seed: u64) -> Result<MicroState> {
    MicroState::random(n, &mut trial_rng(seed, 0, Purpose::Init))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub seed: u64,
    pub t_max: f64,
    pub record_interval: f64,
    /// 0: generalization errors from the analytic curve at the measured R.
    pub test_inputs: usize,
    pub trials: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            seed: 1,
            t_max: 50.0,
            record_interval: 0.5,
            test_inputs: 0,
            trials: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_DIMENSION {
            return Err(Error::InvalidParameter(format!("N must be >= {MIN_DIMENSION}, got {}", self.n)));
        }
        if self.test_inputs != 0 && self.test_inputs < MIN_TEST_INPUTS {
            return Err(Error::InvalidParameter(format!(
                "test_inputs must be 0 or >= {MIN_TEST_INPUTS}, got {}",
                self.test_inputs
            )));
        }
        if self.trials < 1 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if !(self.t_max >= 0.0) || !(self.record_interval > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need t_max >= 0 and record_interval > 0, got {} and {}",
                self.t_max, self.record_interval
            )));
        }
        self.steps_per_record().map(|_| ())
    }

    pub fn steps_per_record(&self) -> Result<u64> {
        let steps = self.record_interval * self.n as f64;
        let rounded = steps.round();
        if rounded < 1.0 || (steps - rounded).abs() > 1e-6 * steps {
            return Err(Error::InvalidParameter(format!(
                "record_interval × N = {steps} must be a positive whole number of steps"
            )));
        }
        Ok(rounded as u64)
    }

    pub fn total_steps(&self) -> u64 {
        (self.t_max * self.n as f64).round() as u64
    }
}

/// Per-trial trajectories plus their pointwise mean and standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub trials: Vec<Trajectory>,
    pub mean: Trajectory,
    /// Sample standard deviation across trials (zero for a single trial);
    /// the `state` fields hold deviations, not order parameters.
    pub std_dev: Vec<Record>,
}

fn sim_record(
    micro: &mut MicroState,
    params: &ModelParams,
    cfg: &SimConfig,
    test_rng: &mut impl Rng,
    spec: &QuadratureSpec,
) -> Result<Record> {
    let state = micro.measure();
    let (eg_b, eg_j) = if cfg.test_inputs == 0 {
        (
            gen_error(state.r_b, params.a, spec)?.value,
            gen_error(state.r_j, params.a, spec)?.value,
        )
    } else {
        micro.estimate_gen_errors(params, cfg.test_inputs, test_rng)?
    };
    Ok(Record {
        t: micro.time(),
        state,
        eg_b,
        eg_j,
    })
}

/// One trial; deterministic per `(cfg.seed, trial)`.
pub fn run_trial(cfg: &SimConfig, params: &ModelParams, trial: u64, spec: &QuadratureSpec) -> Result<Trajectory> {
    cfg.validate()?;
    params.validate()?;
    let every = cfg.steps_per_record()?;
    let total = cfg.total_steps();
    let mut micro = MicroState::random(cfg.n, &mut trial_rng(cfg.seed, trial, Purpose::Init))?;
    let mut train = trial_rng(cfg.seed, trial, Purpose::Train);
    let mut test = trial_rng(cfg.seed, trial, Purpose::Test);

    let mut records = vec![sim_record(&mut micro, params, cfg, &mut test, spec)?];
    for m in 1..=total {
        micro.step(params, &mut train);
        if m % every == 0 {
            records.push(sim_record(&mut micro, params, cfg, &mut test, spec)?);
        }
    }
    Ok(Trajectory {
        params: *params,
        dt: 1.0 / cfg.n as f64,
        records,
    })
}

fn record_values(r: &Record) -> [f64; 7] {
    let s = r.state;
    [s.r_b, s.r_j, s.r_bj, s.l_b, s.l_j, r.eg_b, r.eg_j]
}

fn record_from_values(t: f64, v: [f64; 7]) -> Record {
    Record {
        t,
        state: MacroState::new(v[0], v[1], v[2], v[3], v[4]),
        eg_b: v[5],
        eg_j: v[6],
    }
}

/// Runs `cfg.trials` independent trials (in parallel) and aggregates them
/// in trial order.
pub fn run_simulation(cfg: &SimConfig, params: &ModelParams, spec: &QuadratureSpec) -> Result<SimulationResult> {
    cfg.validate()?;
    let trials: Vec<Trajectory> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|k| run_trial(cfg, params, k, spec))
        .collect::<Result<_>>()?;

    let n_rec = trials[0].records.len();
    let n_trials = trials.len() as f64;
    let mut mean_records = Vec::with_capacity(n_rec);
    let mut std_records = Vec::with_capacity(n_rec);
    for i in 0..n_rec {
        let t = trials[0].records[i].t;
        let rows: Vec<[f64; 7]> = trials.iter().map(|tr| record_values(&tr.records[i])).collect();
        let mean: [f64; 7] = std::array::from_fn(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n_trials);
        let sd: [f64; 7] = std::array::from_fn(|c| {
            if trials.len() < 2 {
                0.0
            } else {
                (rows.iter().map(|r| (r[c] - mean[c]).powi(2)).sum::<f64>() / (n_trials - 1.0)).sqrt()
            }
        });
        mean_records.push(record_from_values(t, mean));
        std_records.push(record_from_values(t, sd));
    }
    Ok(SimulationResult {
        mean: Trajectory {
            params: *params,
            dt: trials[0].dt,
            records: mean_records,
        },
        trials,
        std_dev: std_records,
    })
}
