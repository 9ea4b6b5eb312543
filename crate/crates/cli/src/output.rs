//! CSV, JSON and PGM writers. CSV numbers use 12 significant digits and LF
//! line endings, so identical runs produce identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lgcorr::{CoincidenceMatrix, ModeIndex, SweepRow};

use crate::error::CliError;

/// Which index is varied along the matrix axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisLabel {
    Radial,
    Azimuthal,
}

impl AxisLabel {
    fn label(self, m: ModeIndex) -> String {
        match self {
            AxisLabel::Radial => format!("p={}", m.p),
            AxisLabel::Azimuthal => format!("l={}", m.ell),
        }
    }
}

pub fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}

fn matrix_csv(m: &CoincidenceMatrix, axis: AxisLabel, values: &[f64]) -> String {
    let mut out = String::from("signal\\idler");
    for &c in m.idler_modes() {
        out.push(',');
        out.push_str(&axis.label(c));
    }
    out.push('\n');
    let n = m.n_cols();
    for (i, &r) in m.signal_modes().iter().enumerate() {
        out.push_str(&axis.label(r));
        for v in &values[i * n..(i + 1) * n] {
            out.push(',');
            out.push_str(&fmt_num(*v));
        }
        out.push('\n');
    }
    out
}

/// Rates scaled so the largest entry is 1.
pub fn normalized_matrix_csv(m: &CoincidenceMatrix, axis: AxisLabel) -> String {
    matrix_csv(m, axis, &m.normalized_rates())
}

/// Unscaled `|C'|²`.
pub fn raw_matrix_csv(m: &CoincidenceMatrix, axis: AxisLabel) -> String {
    matrix_csv(m, axis, m.rates())
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("waist_um,gamma,W,schmidt_estimate,diagonal_participation,max_pmax_used\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_num(r.waist),
            fmt_num(r.gamma),
            fmt_num(r.w),
            fmt_num(r.schmidt_estimate),
            fmt_num(r.diagonal_participation),
            r.max_pmax_used
        );
    }
    out
}

pub fn key_value_csv(pairs: &[(&str, f64)]) -> String {
    let mut out = String::from("quantity,value\n");
    for (k, v) in pairs {
        let _ = writeln!(out, "{k},{}", fmt_num(*v));
    }
    out
}

/// Output file names share a stem: `<task>_<stamp>`.
#[derive(Debug, Clone)]
pub struct OutputSet {
    dir: PathBuf,
    stem: String,
    written: Vec<PathBuf>,
}

impl OutputSet {
    pub fn new(dir: &Path, task: &str, stamp: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            stem: format!("{task}_{stamp}"),
            written: Vec::new(),
        })
    }

    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}", self.stem))
    }

    pub fn write(&mut self, suffix: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(suffix);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_json(&mut self, suffix: &str, value: &serde_json::Value) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
        text.push('\n');
        self.write(suffix, text.as_bytes())
    }

    pub fn file_name(&self, suffix: &str) -> String {
        format!("{}{suffix}", self.stem)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0), "1.00000000000e0");
        assert_eq!(fmt_num(0.000123456789012345), "1.23456789012e-4");
    }

    #[test]
    fn matrix_labels_and_line_endings() {
        let m = CoincidenceMatrix::from_real_rows(&[vec![4.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let csv = normalized_matrix_csv(&m, AxisLabel::Radial);
        let lines: Vec<&str> = csv.split('\n').collect();
        assert_eq!(lines[0], "signal\\idler,p=0,p=1");
        assert!(lines[1].starts_with("p=0,1.00000000000e0,6.25000000000e-2"));
        assert!(!csv.contains('\r'));
        assert!(csv.ends_with('\n'));
        let raw = raw_matrix_csv(&m, AxisLabel::Radial);
        assert!(raw.starts_with("signal\\idler,p=0,p=1\np=0,1.60000000000e1,"));
    }
}
