//! End-to-end acceptance checks. Runs as a plain binary (no libtest harness)
//! so that every criterion prints exactly one PASS/FAIL line; detail lines
//! are indented. Exits non-zero if any criterion fails.
//!
//! Expect roughly twenty minutes on a single core, dominated by the
//! N = 10⁴ simulations and the long-horizon theory runs.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;
use teachsim_core::averages::{compute_all, oracle_all, AVERAGE_NAMES};
use teachsim_core::cli::runner::max_abs_deviation;
use teachsim_core::gaussmath::{h_tail, std_normal_density};
use teachsim_core::rng::stream_rng;
use teachsim_core::theory::Record;
use teachsim_core::{
    gen_error, integrate, optimal_r, run_simulation, standard_init, MacroState, ModelParams, QuadratureSpec,
    SimConfig, TheoryConfig, Trajectory,
};

const A: f64 = 0.5;
const ETA_B: f64 = 0.1;
const ETA_J: [f64; 4] = [1.0, 0.2, 0.05, 0.01];
const T_MAX: f64 = 50.0;
const RECORD: f64 = 0.5;
/// Horizon of the long theory runs. By t = 800 every learning rate above
/// has settled (order parameters constant to 5 decimals).
const T_LONG: f64 = 800.0;
const R_OPT: f64 = 0.905;

struct Verdict {
    ok: bool,
    summary: String,
    details: Vec<String>,
}

impl Verdict {
    fn new(ok: bool, summary: impl Into<String>) -> Self {
        Self {
            ok,
            summary: summary.into(),
            details: Vec::new(),
        }
    }
}

fn reference(eta_j: f64) -> ModelParams {
    ModelParams::new(A, ETA_B, eta_j).unwrap()
}

fn theory(eta_j: f64, dt: f64, t_max: f64) -> Trajectory {
    let cfg = TheoryConfig {
        dt,
        t_max,
        record_interval: RECORD,
    };
    integrate(&reference(eta_j), &standard_init(), &cfg, &QuadratureSpec::default()).unwrap()
}

fn up_to(records: &[Record], t: f64) -> &[Record] {
    let n = records.iter().take_while(|r| r.t <= t + 1e-9).count();
    &records[..n]
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            (hi, x2, f2) = (x2, x1, f1);
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            (lo, x1, f1) = (x1, x2, f2);
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

fn criterion_1() -> Verdict {
    let spec = QuadratureSpec::default();
    let mut worst0: f64 = 0.0;
    for a in [0.25, 0.5, 1.0, 1.5] {
        worst0 = worst0.max((gen_error(0.0, a, &spec).unwrap().value - 0.5).abs());
    }
    let e1 = gen_error(1.0, 0.5, &spec).unwrap().value;
    let d1 = (e1 - 0.382_924_9).abs();
    Verdict::new(
        worst0 <= 1e-9 && d1 <= 1e-6,
        format!("max |eg(0,a) - 0.5| = {worst0:.1e} (tol 1e-9); eg(1,0.5) = {e1:.9} (|dev| {d1:.1e}, tol 1e-6)"),
    )
}

fn criterion_2() -> Verdict {
    let spec = QuadratureSpec {
        abs_tol: 1e-13,
        ..Default::default()
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for a in [0.5, 0.3, 0.8, 1.1] {
        let r = golden_min(|r| gen_error(r, a, &spec).unwrap().value, 0.0, 1.0, 1e-7);
        let closed = ((2.0 * std::f64::consts::LN_2 - a * a) / (2.0 * std::f64::consts::LN_2)).sqrt();
        let mut good = (r - closed).abs() <= 1e-3 && (optimal_r(a).r - closed).abs() <= 1e-12;
        if a == 0.5 {
            good &= (r - 0.9051).abs() <= 1e-3;
        }
        ok &= good;
        parts.push(format!("a={a}: argmin {r:.5} vs {closed:.5}"));
    }
    Verdict::new(ok, format!("{} (tol 1e-3)", parts.join("; ")))
}

fn random_states(n: usize, seed: u64) -> Vec<MacroState> {
    let mut rng = stream_rng(seed, 0);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let s = MacroState::new(
            rng.random_range(-0.95..0.95),
            rng.random_range(-0.95..0.95),
            rng.random_range(-0.95..0.95),
            rng.random_range(0.2..2.0),
            rng.random_range(0.2..2.0),
        );
        if s.gram_determinant() > 0.02 {
            out.push(s);
        }
    }
    out
}

fn criterion_3() -> Verdict {
    const SAMPLES: usize = 10_000_000;
    let spec = QuadratureSpec::default();
    let params = ModelParams::new(A, ETA_B, 0.2).unwrap();
    let mut ok = true;
    let mut worst_z: f64 = 0.0;
    let mut worst_gf: f64 = 0.0;
    let mut details = Vec::new();
    for (i, s) in random_states(20, 31_415).iter().enumerate() {
        let closed = compute_all(s, &params, &spec).unwrap().as_array();
        let est = oracle_all(s, &params, SAMPLES, 1000 + i as u64).unwrap();
        for k in 0..9 {
            let z = est[k].z_score(closed[k]);
            worst_z = worst_z.max(z);
            if z > 4.0 {
                ok = false;
                details.push(format!("state {i} {}: z = {z:.2}", AVERAGE_NAMES[k]));
            }
        }
        let gf = &est[6];
        let dev = (closed[6] - gf.mean).abs();
        worst_gf = worst_gf.max(dev);
        if dev > (1e-4f64).max(4.0 * gf.std_err) {
            ok = false;
            details.push(format!("state {i} gf: |dev| = {dev:.2e}, se {:.2e}", gf.std_err));
        }
    }
    let mut v = Verdict::new(
        ok,
        format!("20 states x 9 averages, 1e7 samples: max z = {worst_z:.2} (tol 4); max |gf dev| = {worst_gf:.1e}"),
    );
    v.details = details;
    v
}

fn compare_runs(theories: &[Trajectory], n: usize, trials: usize, tol: f64, budget: Option<Duration>) -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for (eta_j, th) in ETA_J.iter().zip(theories) {
        let cfg = SimConfig {
            n,
            seed: 20_240,
            t_max: T_MAX,
            record_interval: RECORD,
            test_inputs: 0,
            trials,
        };
        let sim = run_simulation(&cfg, &reference(*eta_j), &QuadratureSpec::default()).unwrap();
        let dev = max_abs_deviation(up_to(&th.records, T_MAX), &sim.mean.records).unwrap();
        let m = dev[..5].iter().cloned().fold(0.0, f64::max);
        worst = worst.max(m);
        details.push(format!(
            "N={n} eta_J={eta_j}: max dev R_B {:.4} R_J {:.4} R_BJ {:.4} l_B {:.4} l_J {:.4}",
            dev[0], dev[1], dev[2], dev[3], dev[4]
        ));
    }
    let elapsed = start.elapsed();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let mut v = Verdict::new(
        worst <= tol && in_time,
        format!("N={n}, {trials} trials: max dev {worst:.4} (tol {tol}) in {:.0} s", elapsed.as_secs_f64()),
    );
    v.details = details;
    v
}

fn criterion_4(theories: &[Trajectory]) -> Verdict {
    // The CI variant's time budget covers its own theory runs as well.
    let start = Instant::now();
    let short: Vec<Trajectory> = ETA_J.iter().map(|&e| theory(e, 0.01, T_MAX)).collect();
    let theory_time = start.elapsed();
    let mut ci = compare_runs(&short, 2000, 3, 0.06, Some(Duration::from_secs(300).saturating_sub(theory_time)));
    ci.summary
        .push_str(&format!(" + {:.0} s theory (budget 300 s)", theory_time.as_secs_f64()));
    let full = compare_runs(theories, 10_000, 5, 0.03, None);
    let mut v = Verdict::new(ci.ok && full.ok, format!("CI: {}; full: {}", ci.summary, full.summary));
    v.details = ci.details.into_iter().chain(full.details).collect();
    v
}

fn interior_minima(x: &[f64]) -> usize {
    x.windows(3).filter(|w| w[1] < w[0] && w[1] < w[2]).count()
}

fn crossings(x: &[f64], level: f64) -> usize {
    x.windows(2).filter(|w| (w[0] - level).signum() != (w[1] - level).signum()).count()
}

/// Claims (a)-(d) are judged on the whole long run, which contains the
/// t <= 50 window of criterion 4: at t = 50 the slow students have barely
/// started (R_J = 0.15 for eta_J = 0.01), so the claims cannot refer to that
/// window alone. The t <= 50 values are printed alongside.
fn criterion_5(long: &[Trajectory]) -> Verdict {
    let mut details = Vec::new();
    let mut ok = true;
    let mut check = |name: &str, pass: bool, what: String| {
        ok &= pass;
        details.push(format!("({name}) {} {what}", if pass { "pass" } else { "FAIL" }));
    };
    let short: Vec<&[Record]> = long.iter().map(|t| up_to(&t.records, T_MAX)).collect();
    let col = |recs: &[Record], f: fn(&Record) -> f64| recs.iter().map(f).collect::<Vec<f64>>();

    let gap = |recs: &[Record]| recs.iter().map(|r| r.eg_j - r.eg_b).fold(f64::INFINITY, f64::min);
    let first_below = long[0].records.iter().find(|r| r.eg_j < r.eg_b).map(|r| r.t);
    check(
        "a",
        gap(&long[0].records) >= 0.0,
        format!(
            "eta_J=1.0: min(eg_J - eg_B) = {:.2e} (t<=50: {:.2e}); first eg_J < eg_B at t = {first_below:?}",
            gap(&long[0].records),
            gap(short[0])
        ),
    );

    for (i, eta) in ETA_J.iter().enumerate().skip(1) {
        let first = long[i].records.iter().find(|r| r.eg_j < r.eg_b).map(|r| r.t);
        check("b", first.is_some(), format!("eta_J={eta}: first eg_J < eg_B at t = {first:?}"));
    }

    for i in [2, 3] {
        let rj = col(&long[i].records, |r| r.state.r_j);
        let egj = col(&long[i].records, |r| r.eg_j);
        let (c, m) = (crossings(&rj, R_OPT), interior_minima(&egj));
        let (c_s, m_s) = (
            crossings(&col(short[i], |r| r.state.r_j), R_OPT),
            interior_minima(&col(short[i], |r| r.eg_j)),
        );
        check(
            "c",
            c >= 2 && m >= 2,
            format!(
                "eta_J={}: crossings of {R_OPT} = {c}, eg_J interior minima = {m} (t<=50: {c_s} and {m_s})",
                ETA_J[i]
            ),
        );
    }

    let max_rj = |recs: &[Record]| recs.iter().map(|r| r.state.r_j).fold(f64::MIN, f64::max);
    check(
        "d",
        max_rj(&long[3].records) >= 0.99,
        format!(
            "eta_J=0.01: max R_J = {:.4} (t<=50: {:.4}; need >= 0.99)",
            max_rj(&long[3].records),
            max_rj(short[3])
        ),
    );

    for (eta, t) in ETA_J.iter().zip(long) {
        let s = t.last().unwrap().state;
        check(
            "e",
            (s.r_b - s.r_j).abs() <= 0.01 && s.r_bj <= 1.0 - 1e-3,
            format!(
                "eta_J={eta} at t={T_LONG}: |R_B - R_J| = {:.1e}, R_BJ = {:.4}",
                (s.r_b - s.r_j).abs(),
                s.r_bj
            ),
        );
    }

    let mut failed: Vec<String> = details.iter().filter(|d| d.contains("FAIL")).map(|d| d[..3].to_string()).collect();
    failed.dedup();
    let mut v = Verdict::new(
        ok,
        if ok {
            format!("t<={T_LONG}; all qualitative claims hold")
        } else {
            format!("t<={T_LONG}; failing sub-claims: {}", failed.join(" "))
        },
    );
    v.details = details;
    v
}

fn criterion_6(theories: &[Trajectory]) -> Verdict {
    let mut details = Vec::new();

    let mut worst_rk: f64 = 0.0;
    for (eta, coarse) in ETA_J.iter().zip(theories) {
        let fine = theory(*eta, 0.005, T_MAX);
        let coarse = up_to(&coarse.records, T_MAX);
        let mut d: f64 = 0.0;
        for (a, b) in coarse.iter().zip(&fine.records) {
            assert!((a.t - b.t).abs() < 1e-9);
            for (x, y) in a.state.as_array().iter().zip(b.state.as_array()) {
                d = d.max((x - y).abs());
            }
        }
        worst_rk = worst_rk.max(d);
        details.push(format!("step halving eta_J={eta}: max change {d:.1e}"));
    }
    let rk_ok = worst_rk <= 1e-6;

    // Five-point stencil; truncation and rounding both stay far below 1e-6
    // relative on this range.
    let h = 1e-3;
    let mut worst_fd: f64 = 0.0;
    for i in 0..=48 {
        let u = -4.0 + 0.25 * i as f64;
        let fd = (-h_tail(u + 2.0 * h) + 8.0 * h_tail(u + h) - 8.0 * h_tail(u - h) + h_tail(u - 2.0 * h)) / (12.0 * h);
        let exact = -std_normal_density(u);
        worst_fd = worst_fd.max(((fd - exact) / exact).abs());
    }
    details.push(format!("h_tail derivative on [-4, 8]: max relative error {worst_fd:.1e}"));
    let fd_ok = worst_fd <= 1e-6;

    let tmp = std::env::temp_dir().join(format!("teachsim-acceptance-{}", std::process::id()));
    let cfg = tmp.join("sim.cfg");
    fs::create_dir_all(&tmp).unwrap();
    fs::write(&cfg, "mode = simulate\na = 0.5\neta_B = 0.1\neta_J = 0.2\nN = 500\ntrials = 2\nt_max = 5\nseed = 99\ntest_inputs = 10000\n").unwrap();
    let mut outputs = Vec::new();
    for run in ["first", "second"] {
        let dir = tmp.join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_teachsim"))
            .args(["simulate", "--quiet", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&dir)
            .status()
            .unwrap();
        assert!(status.success());
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        outputs.push(files);
    }
    let _ = fs::remove_dir_all(&tmp);
    let bytes_ok = !outputs[0].is_empty() && outputs[0] == outputs[1];
    details.push(format!("{} CSV files byte-identical across repeated seeded runs: {bytes_ok}", outputs[0].len()));

    let mut v = Verdict::new(
        rk_ok && fd_ok && bytes_ok,
        format!("RK4 halving {worst_rk:.1e} (tol 1e-6); h_tail FD {worst_fd:.1e} (tol 1e-6); reproducible CSVs {bytes_ok}"),
    );
    v.details = details;
    v
}

fn report(n: usize, title: &str, v: &Verdict, elapsed: Duration) {
    println!(
        "criterion {n} [{}] {title}: {} ({:.0} s)",
        if v.ok { "PASS" } else { "FAIL" },
        v.summary,
        elapsed.as_secs_f64()
    );
    for d in &v.details {
        println!("    {d}");
    }
}

fn main() -> ExitCode {
    let mut all_ok = true;
    let mut timed = |n: usize, title: &str, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        report(n, title, &v, start.elapsed());
        all_ok &= v.ok;
    };

    timed(1, "generalization-error identities", &mut criterion_1);
    timed(2, "minimum location", &mut criterion_2);
    timed(3, "averages vs Monte Carlo oracle", &mut criterion_3);

    let start = Instant::now();
    let long: Vec<Trajectory> = ETA_J.iter().map(|&e| theory(e, 0.01, T_LONG)).collect();
    println!("    (theory runs to t={T_LONG} for eta_J={ETA_J:?}: {:.0} s)", start.elapsed().as_secs_f64());

    timed(4, "theory vs simulation", &mut || criterion_4(&long));
    timed(5, "qualitative trajectory claims", &mut || criterion_5(&long));
    timed(6, "numerical hygiene", &mut || criterion_6(&long));

    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
