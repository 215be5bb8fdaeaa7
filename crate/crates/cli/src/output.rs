//! Tabular and matrix output.
//!
//! CSV uses `.` decimals, `,` separators and LF line endings. Reals are
//! written with 17 significant digits so that a parse reproduces the value.

use std::fmt::Write as _;

use decohere::qmat::{CMat, C64};
use serde::Deserialize;

use crate::scenario::DumpFormat;
use crate::RunError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => real(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match *self {
            Cell::Int(v) => Some(v as f64),
            Cell::Real(v) => Some(v),
            Cell::Text(_) => None,
        }
    }
}

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Column-oriented table with a mandatory header.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CurveOutput {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CurveOutput {
    pub fn new(header: Vec<String>) -> Self {
        CurveOutput { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric values of column `name`, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows.iter().map(|r| r[i].as_real()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Writes a square matrix as `re,im` column pairs, one matrix row per line.
pub fn dump_matrix<const N: usize>(m: &CMat<N>, format: DumpFormat) -> String {
    match format {
        DumpFormat::Csv => {
            let header: Vec<String> = (0..N).map(|j| format!("re_{j},im_{j}")).collect();
            let mut s = header.join(",");
            s.push('\n');
            for row in &m.0 {
                let cells: Vec<String> = row.iter().map(|z| format!("{},{}", real(z.re), real(z.im))).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
        DumpFormat::Json => {
            let part = |f: fn(&C64) -> f64| {
                let rows: Vec<String> = m
                    .0
                    .iter()
                    .map(|row| format!("[{}]", row.iter().map(|z| real(f(z))).collect::<Vec<_>>().join(", ")))
                    .collect();
                rows.join(", ")
            };
            let mut s = String::new();
            let _ = writeln!(s, "{{\"dim\": {N}, \"re\": [{}], \"im\": [{}]}}", part(|z| z.re), part(|z| z.im));
            s
        }
    }
}

#[derive(Deserialize)]
struct JsonMatrix {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// Inverse of [`dump_matrix`].
pub fn parse_matrix<const N: usize>(text: &str, format: DumpFormat) -> Result<CMat<N>, RunError> {
    let bad = |why: String| RunError::Parse { line: None, message: format!("matrix dump: {why}") };
    let mut out = CMat::<N>::zeros();
    match format {
        DumpFormat::Csv => {
            let rows: Vec<&str> = text.lines().skip(1).filter(|l| !l.trim().is_empty()).collect();
            if rows.len() != N {
                return Err(bad(format!("expected {N} rows, found {}", rows.len())));
            }
            for (i, line) in rows.iter().enumerate() {
                let vals: Vec<f64> = line
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| bad(format!("row {i}: {e}")))?;
                if vals.len() != 2 * N {
                    return Err(bad(format!("row {i}: expected {} values", 2 * N)));
                }
                for j in 0..N {
                    out.0[i][j] = C64::new(vals[2 * j], vals[2 * j + 1]);
                }
            }
        }
        DumpFormat::Json => {
            let m: JsonMatrix = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
            let shape_ok = |p: &Vec<Vec<f64>>| p.len() == N && p.iter().all(|r| r.len() == N);
            if m.dim != N || !shape_ok(&m.re) || !shape_ok(&m.im) {
                return Err(bad(format!("expected a {N}x{N} matrix")));
            }
            for i in 0..N {
                for j in 0..N {
                    out.0[i][j] = C64::new(m.re[i][j], m.im[i][j]);
                }
            }
        }
    }
    Ok(out)
}
