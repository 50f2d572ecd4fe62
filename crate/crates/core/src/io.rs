//! CSV and JSON artifacts.
//!
//! Every CSV carries a header row, uses `,` and LF, and prints reals with 17
//! significant digits so a parse reproduces the written `f64` exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::TimeSeries;
use crate::index::IndexReport;
use crate::wave::WaveProfile;

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// `{:.16e}` keeps 17 significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Column-oriented table with named columns of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: &[&str], columns: Vec<Vec<f64>>) -> Result<Self> {
        if headers.len() != columns.len() {
            return Err(Error::Dimension(format!(
                "{} headers for {} columns",
                headers.len(),
                columns.len()
            )));
        }
        if let Some(first) = columns.first() {
            if columns.iter().any(|c| c.len() != first.len()) {
                return Err(Error::Dimension("columns differ in length".into()));
            }
        }
        Ok(Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            columns,
        })
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    w.write_record(&table.headers)?;
    for r in 0..table.rows() {
        w.write_record(table.columns.iter().map(|c| format_real(c[r])))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let headers: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut columns = vec![Vec::new(); headers.len()];
    for (line, record) in r.records().enumerate() {
        let record = record?;
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Domain(format!(
                    "{}: row {} has non-numeric field {field:?}",
                    path.display(),
                    line + 2
                ))
            })?;
            columns[c].push(v);
        }
    }
    Ok(Table { headers, columns })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| io_error(path, e))?;
    w.flush().map_err(|e| io_error(path, e))
}

/// Columns `x, phi, dphi_dk`; `dphi_dk` is omitted when `Φ` is unavailable.
pub fn profile_table(profile: &WaveProfile) -> Table {
    let mut headers = vec!["x", "phi"];
    let mut columns = vec![profile.points(), profile.samples.clone()];
    if let Some(dk) = &profile.dk_samples {
        headers.push("dphi_dk");
        columns.push(dk.clone());
    }
    Table::new(&headers, columns).expect("profile columns share the grid")
}

pub fn time_series_table(series: &TimeSeries) -> Table {
    Table::new(
        &["t", "rho", "F", "M", "P"],
        vec![
            series.times.clone(),
            series.rho.clone(),
            series.f.clone(),
            series.m.clone(),
            series.p.clone(),
        ],
    )
    .expect("time series columns are recorded together")
}

pub fn index_table(rows: &[IndexReport]) -> Table {
    Table::new(
        &["k", "I", "f"],
        vec![
            rows.iter().map(|r| r.k).collect(),
            rows.iter().map(|r| r.index).collect(),
            rows.iter().map(|r| r.f).collect(),
        ],
    )
    .expect("one value per row")
}

/// `u` samples from a profile CSV, checked to sit on the uniform grid of
/// `n` points over `[0, L)`.
pub fn read_initial_condition(path: &Path, period: f64) -> Result<Vec<f64>> {
    let table = read_table(path)?;
    let (Some(x), Some(u)) = (table.column("x"), table.column("phi").or(table.column("u"))) else {
        return Err(Error::Domain(format!(
            "{}: needs columns x and phi (or u)",
            path.display()
        )));
    };
    let n = u.len();
    if !n.is_power_of_two() || n < 64 {
        return Err(Error::Dimension(format!(
            "{}: {n} rows, need a power of two >= 64",
            path.display()
        )));
    }
    let dx = period / n as f64;
    if x.iter()
        .enumerate()
        .any(|(j, &xj)| (xj - j as f64 * dx).abs() > 1e-9 * period)
    {
        return Err(Error::Domain(format!(
            "{}: x column is not the uniform grid on [0, {period})",
            path.display()
        )));
    }
    Ok(u.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::{sample_profile, Gamma, WaveParams};

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [
            std::f64::consts::PI,
            -1.0 / 3.0,
            1e-300,
            6.02214076e23,
            0.1 + 0.2,
        ] {
            assert_eq!(format_real(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn profile_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let prof = sample_profile(&WaveParams::new(0.4, 7.0, Gamma::One).unwrap(), 64).unwrap();
        write_table(&path, &profile_table(&prof)).unwrap();
        let back = read_table(&path).unwrap();
        assert_eq!(back.headers, ["x", "phi", "dphi_dk"]);
        assert_eq!(back.column("phi").unwrap(), prof.samples.as_slice());
        assert_eq!(read_initial_condition(&path, 7.0).unwrap(), prof.samples);
        assert!(read_initial_condition(&path, 8.0).is_err());
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(!text.contains('\r'));
    }

    #[test]
    fn ragged_columns_rejected() {
        assert!(Table::new(&["a", "b"], vec![vec![1.0], vec![]]).is_err());
        assert!(Table::new(&["a"], vec![vec![1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_table(Path::new("/nonexistent/dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
    }
}
