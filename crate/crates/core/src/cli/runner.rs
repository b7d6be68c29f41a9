//! Experiment runner behind the `teachsim` binary.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use super::config::{ConfigError, ExperimentConfig, Mode};
use super::csv::{fmt_num, preamble, record_values, trajectory_csv, VALUE_COLUMNS};
use crate::averages::{compute_all, oracle_all, AVERAGE_NAMES};
use crate::error::Error;
use crate::model::ModelParams;
use crate::simulator::run_simulation;
use crate::theory::{integrate, standard_init, Record, Trajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_BAND_FAILURE: i32 = 3;

/// Oracle rows pass within this many standard errors.
pub const ORACLE_BAND_SE: f64 = 4.0;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_INVALID,
            CliError::Model(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Model(_) => EXIT_INVALID,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
    /// False when an acceptance band was exceeded (averages-check, compare).
    pub passed: bool,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_BAND_FAILURE
        }
    }
}

struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let partial = self.dir.join(format!(".{name}.partial"));
        let io = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        fs::write(&partial, content).map_err(io)?;
        self.written.push(partial.clone());
        fs::rename(&partial, &path).map_err(io)?;
        self.written.pop();
        self.written.push(path);
        Ok(())
    }

    fn discard(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
    }
}

/// Runs `config`, writing CSV files into `out_dir`. On error every file
/// written by this run is removed again.
pub fn run(config: &ExperimentConfig, out_dir: &Path, quiet: bool) -> Result<RunReport, CliError> {
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut out = Outputs {
        dir: out_dir.to_path_buf(),
        written: Vec::new(),
    };
    let result = match config.mode {
        Mode::Theory => run_theory(config, &mut out),
        Mode::Simulate => run_simulate(config, &mut out),
        Mode::Compare => run_compare(config, &mut out),
        Mode::AveragesCheck => run_averages_check(config, &mut out),
        Mode::Sweep => run_sweep(config, &mut out),
    };
    match result {
        Ok((summary, passed)) => {
            if !quiet {
                for line in &summary {
                    eprintln!("[{}] {line}", config.mode);
                }
            }
            Ok(RunReport {
                files: out.written,
                summary,
                passed,
            })
        }
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

type ModeResult = Result<(Vec<String>, bool), CliError>;

fn theory_run(config: &ExperimentConfig, params: &ModelParams) -> Result<Trajectory, Error> {
    integrate(params, &standard_init(), &config.theory, &config.quadrature)
}

fn run_theory(config: &ExperimentConfig, out: &mut Outputs) -> ModeResult {
    let traj = theory_run(config, &config.params)?;
    out.write("theory.csv", &trajectory_csv(&preamble(&config.echo(), None, &[]), &traj.records))?;
    let last = traj.last().expect("initial record");
    Ok((
        vec![format!(
            "{} records to t={}; final R_B={:.6} R_J={:.6} R_BJ={:.6}",
            traj.records.len(),
            last.t,
            last.state.r_b,
            last.state.r_j,
            last.state.r_bj
        )],
        true,
    ))
}

fn run_sweep(config: &ExperimentConfig, out: &mut Outputs) -> ModeResult {
    let runs: Vec<(f64, Trajectory)> = config
        .eta_j_list
        .par_iter()
        .map(|&eta_j| {
            let params = ModelParams { eta_j, ..config.params };
            theory_run(config, &params).map(|t| (eta_j, t))
        })
        .collect::<Result<_, _>>()?;
    let mut summary = Vec::new();
    for (eta_j, traj) in runs {
        let extra = [format!("sweep entry eta_J={eta_j}")];
        let name = format!("sweep_eta_J_{eta_j}.csv");
        out.write(&name, &trajectory_csv(&preamble(&config.echo(), None, &extra), &traj.records))?;
        let max_rj = traj.records.iter().map(|r| r.state.r_j).fold(f64::MIN, f64::max);
        summary.push(format!("eta_J={eta_j}: max R_J={max_rj:.6} -> {name}"));
    }
    Ok((summary, true))
}

fn run_simulate(config: &ExperimentConfig, out: &mut Outputs) -> ModeResult {
    let res = run_simulation(&config.sim, &config.params, &config.quadrature)?;
    let seed = Some(config.seed());
    for (k, traj) in res.trials.iter().enumerate() {
        let extra = [format!("trial {k}")];
        out.write(
            &format!("simulate_trial_{k}.csv"),
            &trajectory_csv(&preamble(&config.echo(), seed, &extra), &traj.records),
        )?;
    }
    let extra = [format!("mean over {} trials", res.trials.len())];
    out.write(
        "simulate_mean.csv",
        &trajectory_csv(&preamble(&config.echo(), seed, &extra), &res.mean.records),
    )?;
    let extra = [format!("standard deviation over {} trials", res.trials.len())];
    out.write(
        "simulate_std.csv",
        &trajectory_csv(&preamble(&config.echo(), seed, &extra), &res.std_dev),
    )?;
    Ok((
        vec![format!(
            "{} trials, {} records each",
            res.trials.len(),
            res.mean.records.len()
        )],
        true,
    ))
}

/// Largest absolute difference per value column between two trajectories
/// sampled on the same time grid.
pub fn max_abs_deviation(theory: &[Record], sim: &[Record]) -> Result<[f64; 7], Error> {
    if theory.len() != sim.len() {
        return Err(Error::InvalidParameter(format!(
            "record counts differ: theory {} vs simulation {}",
            theory.len(),
            sim.len()
        )));
    }
    let mut max = [0.0f64; 7];
    for (a, b) in theory.iter().zip(sim) {
        if (a.t - b.t).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "time grids differ: {} vs {}",
                a.t, b.t
            )));
        }
        let (x, y) = (record_values(a), record_values(b));
        for c in 0..7 {
            max[c] = max[c].max((x[c] - y[c]).abs());
        }
    }
    Ok(max)
}

fn run_compare(config: &ExperimentConfig, out: &mut Outputs) -> ModeResult {
    let (theory, sim) = rayon::join(
        || theory_run(config, &config.params),
        || run_simulation(&config.sim, &config.params, &config.quadrature),
    );
    let theory = theory?;
    let sim = sim?;
    let max = max_abs_deviation(&theory.records, &sim.mean.records)?;

    let mut csv = preamble(
        &config.echo(),
        Some(config.seed()),
        &[format!("simulation: mean over {} trials", config.sim.trials)],
    );
    let mut header = vec!["t".to_string()];
    for name in VALUE_COLUMNS {
        header.push(format!("{name}_theory"));
        header.push(format!("{name}_sim"));
        header.push(format!("{name}_dev"));
    }
    csv.push_str(&header.join(","));
    csv.push('\n');
    for (a, b) in theory.records.iter().zip(&sim.mean.records) {
        let mut row = vec![fmt_num(a.t)];
        for (x, y) in record_values(a).into_iter().zip(record_values(b)) {
            row.push(fmt_num(x));
            row.push(fmt_num(y));
            row.push(fmt_num(y - x));
        }
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let footer: Vec<String> = VALUE_COLUMNS
        .iter()
        .zip(max)
        .map(|(n, m)| format!("{n}={}", fmt_num(m)))
        .collect();
    let footer = format!("max_abs_dev {}", footer.join(" "));
    csv.push_str(&format!("# {footer}\n"));
    out.write("compare.csv", &csv)?;

    let worst = max[..5].iter().cloned().fold(0.0, f64::max);
    let passed = worst <= config.compare_tol;
    Ok((
        vec![
            footer,
            format!(
                "order parameters {} (max {worst:.4} vs tolerance {})",
                if passed { "PASS" } else { "FAIL" },
                config.compare_tol
            ),
        ],
        passed,
    ))
}

fn run_averages_check(config: &ExperimentConfig, out: &mut Outputs) -> ModeResult {
    let params = &config.params;
    let states: Vec<Record> = if config.check_points > 1 {
        let traj = theory_run(config, params)?;
        let last = traj.records.len() - 1;
        let k_max = config.check_points - 1;
        (0..config.check_points)
            .map(|k| traj.records[(k * last + k_max / 2) / k_max])
            .collect()
    } else {
        vec![Record {
            t: 0.0,
            state: standard_init(),
            eg_b: 0.5,
            eg_j: 0.5,
        }]
    };

    let rows: Vec<Vec<(String, bool)>> = states
        .par_iter()
        .enumerate()
        .map(|(idx, rec)| -> Result<Vec<(String, bool)>, Error> {
            let s = rec.state;
            let closed = compute_all(&s, params, &config.quadrature)?.as_array();
            let oracle = oracle_all(&s, params, config.oracle_samples, config.seed().wrapping_add(idx as u64))?;
            Ok((0..9)
                .map(|k| {
                    let dev = (closed[k] - oracle[k].mean).abs();
                    let band = ORACLE_BAND_SE * oracle[k].std_err + 1e-12;
                    let pass = dev <= band;
                    let fields = [
                        idx.to_string(),
                        fmt_num(rec.t),
                        fmt_num(s.r_b),
                        fmt_num(s.r_j),
                        fmt_num(s.r_bj),
                        fmt_num(s.l_b),
                        fmt_num(s.l_j),
                        AVERAGE_NAMES[k].to_string(),
                        fmt_num(closed[k]),
                        fmt_num(oracle[k].mean),
                        fmt_num(oracle[k].std_err),
                        fmt_num(dev),
                        fmt_num(band),
                        if pass { "pass" } else { "FAIL" }.to_string(),
                    ];
                    (fields.join(","), pass)
                })
                .collect())
        })
        .collect::<Result<_, _>>()?;

    let mut csv = preamble(&config.echo(), Some(config.seed()), &[]);
    csv.push_str("state,t,R_B,R_J,R_BJ,l_B,l_J,average,closed_form,oracle_mean,oracle_se,abs_dev,band,pass\n");
    let mut failures = 0;
    for (line, pass) in rows.iter().flatten() {
        csv.push_str(line);
        csv.push('\n');
        failures += usize::from(!pass);
    }
    out.write("averages_check.csv", &csv)?;
    let total = rows.iter().map(Vec::len).sum::<usize>();
    Ok((
        vec![format!(
            "{} of {total} rows within {ORACLE_BAND_SE} standard errors",
            total - failures
        )],
        failures == 0,
    ))
}
