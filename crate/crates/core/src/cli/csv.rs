//! CSV emission. Numbers carry 9 significant digits in scientific notation,
//! so identical inputs give byte-identical files.

use std::fmt::Write as _;

use crate::theory::Record;

pub const TRAJECTORY_COLUMNS: [&str; 8] = ["t", "R_B", "R_J", "R_BJ", "l_B", "l_J", "eg_B", "eg_J"];

/// Names of the seven value columns following `t`.
pub const VALUE_COLUMNS: [&str; 7] = ["R_B", "R_J", "R_BJ", "l_B", "l_J", "eg_B", "eg_J"];

pub fn fmt_num(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn record_values(r: &Record) -> [f64; 7] {
    let s = r.state;
    [s.r_b, s.r_j, s.r_bj, s.l_b, s.l_j, r.eg_b, r.eg_j]
}

/// `#`-prefixed preamble: tool version, configuration echo and seed.
pub fn preamble(echo: &str, seed: Option<u64>, extra: &[String]) -> String {
    let mut out = format!("# teachsim {}\n# config: {echo}\n", env!("CARGO_PKG_VERSION"));
    if let Some(seed) = seed {
        let _ = writeln!(out, "# seed: {seed}");
    }
    for line in extra {
        let _ = writeln!(out, "# {line}");
    }
    out
}

pub fn trajectory_csv(preamble: &str, records: &[Record]) -> String {
    let mut out = String::from(preamble);
    out.push_str(&TRAJECTORY_COLUMNS.join(","));
    out.push('\n');
    for r in records {
        out.push_str(&fmt_num(r.t));
        for v in record_values(r) {
            out.push(',');
            out.push_str(&fmt_num(v));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MacroState;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_num(0.5), "5.00000000e-1");
        assert_eq!(fmt_num(-0.0398942280401), "-3.98942280e-2");
        assert_eq!(fmt_num(0.0), "0.00000000e0");
    }

    #[test]
    fn trajectory_layout() {
        let r = Record {
            t: 0.0,
            state: MacroState::new(0.0, 0.0, 0.0, 1.0, 1.0),
            eg_b: 0.5,
            eg_j: 0.5,
        };
        let csv = trajectory_csv(&preamble("mode=theory", None, &[]), &[r]);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# teachsim "));
        assert_eq!(lines[2], "t,R_B,R_J,R_BJ,l_B,l_J,eg_B,eg_J");
        assert_eq!(lines[3].split(',').count(), 8);
    }
}
