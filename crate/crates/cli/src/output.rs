//! CSV and JSON emission.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use kleinwave::cauchy::{CauchyProblem, GeneralizedWaveSolution, MeshValues};
use num_complex::Complex64;
use serde_json::Value;

use crate::error::CliError;

/// `v` in scientific notation with `digits` significant digits.
pub fn num(v: f64, digits: usize) -> String {
    format!("{:.*e}", digits.max(1) - 1, v)
}

/// `v` rounded to `digits` significant digits, for JSON output.
pub fn round_sig(v: f64, digits: usize) -> f64 {
    if !v.is_finite() {
        return v;
    }
    num(v, digits).parse().unwrap_or(v)
}

pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
    digits: usize,
}

impl CsvWriter {
    pub fn create(path: PathBuf, header: &[&str], digits: usize) -> Result<Self, CliError> {
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = CsvWriter {
            out: BufWriter::new(file),
            path,
            digits,
        };
        w.line(&header.join(","))?;
        Ok(w)
    }

    fn line(&mut self, s: &str) -> Result<(), CliError> {
        writeln!(self.out, "{s}").map_err(|e| CliError::io(&self.path, e))
    }

    pub fn row(&mut self, values: &[f64]) -> Result<(), CliError> {
        let cells: Vec<String> = values.iter().map(|&v| num(v, self.digits)).collect();
        self.line(&cells.join(","))
    }

    /// A row whose leading cells are text.
    pub fn labelled_row(&mut self, labels: &[&str], values: &[f64]) -> Result<(), CliError> {
        let mut cells: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        cells.extend(values.iter().map(|&v| num(v, self.digits)));
        self.line(&cells.join(","))
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.out.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}

/// Writes `x,t,re_u,im_u` rows, adding the exact solution and the error when
/// one is known. Returns the max error.
pub fn write_solution(
    path: PathBuf,
    values: &MeshValues,
    exact: Option<&(dyn Fn(f64, f64) -> Complex64 + Sync)>,
    digits: usize,
) -> Result<Option<f64>, CliError> {
    let mut header = vec!["x", "t", "re_u", "im_u"];
    if exact.is_some() {
        header.extend(["re_exact", "im_exact", "abs_err"]);
    }
    let mut w = CsvWriter::create(path, &header, digits)?;
    let mut worst: Option<f64> = None;
    for (x, t, u) in values.points() {
        match exact {
            Some(f) => {
                let e = f(x, t);
                let err = (u - e).norm();
                worst = Some(worst.map_or(err, |w| w.max(err)));
                w.row(&[x, t, u.re, u.im, e.re, e.im, err])?;
            }
            None => w.row(&[x, t, u.re, u.im])?,
        }
    }
    w.finish()?;
    Ok(worst)
}

/// `x,abs_err_g,abs_err_h` over the grid.
pub fn write_data_errors(
    path: PathBuf,
    problem: &CauchyProblem,
    sol: &GeneralizedWaveSolution,
    digits: usize,
) -> Result<(), CliError> {
    let eg = sol.g_fit.errors(&problem.g)?;
    let eh = sol.h_fit.errors(&problem.h_data)?;
    let mut w = CsvWriter::create(path, &["x", "abs_err_g", "abs_err_h"], digits)?;
    for (i, x) in problem.g.nodes().into_iter().enumerate() {
        w.row(&[x, eg[i], eh[i]])?;
    }
    w.finish()?;
    Ok(())
}

/// Rounds every float in `v` to `digits` significant digits.
pub fn round_json(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .and_then(|f| serde_json::Number::from_f64(round_sig(f, digits)))
            {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(|x| round_json(x, digits)),
        Value::Object(o) => o.values_mut().for_each(|x| round_json(x, digits)),
        _ => {}
    }
}

pub fn write_json(path: &Path, mut value: Value, digits: usize) -> Result<(), CliError> {
    round_json(&mut value, digits);
    let mut text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
