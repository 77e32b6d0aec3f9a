//! Sparse binary graph-by-feature incidence, shared by skeletons and
//! components.
//!
//! Text form, one line per graph: the graph id followed by the column
//! indices of its set bits, space separated and ascending.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum IncidenceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Incidence {
    columns: usize,
    rows: Vec<Vec<usize>>,
}

impl Incidence {
    /// Rows must hold ascending, de-duplicated indices below `columns`.
    pub fn from_rows(columns: usize, rows: Vec<Vec<usize>>) -> Self {
        for row in &rows {
            assert!(row.windows(2).all(|w| w[0] < w[1]), "row indices must ascend");
            assert!(row.last().is_none_or(|&c| c < columns), "column out of range");
        }
        Incidence { columns, rows }
    }

    pub fn empty(rows: usize) -> Self {
        Incidence { columns: 0, rows: vec![Vec::new(); rows] }
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.columns
    }

    /// Set columns of row `i`, ascending.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn contains(&self, i: usize, column: usize) -> bool {
        self.rows[i].binary_search(&column).is_ok()
    }

    pub fn dense_row(&self, i: usize) -> Vec<u8> {
        let mut out = vec![0; self.columns];
        for &c in &self.rows[i] {
            out[c] = 1;
        }
        out
    }

    pub fn column_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.columns];
        for row in &self.rows {
            for &c in row {
                sums[c] += 1;
            }
        }
        sums
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{i}");
            for c in row {
                let _ = write!(out, " {c}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, columns: usize) -> Result<Self, IncidenceError> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let err = |message: String| IncidenceError::Parse { line: n + 1, message };
            let mut fields = line.split_whitespace().map(|f| {
                f.parse::<usize>().map_err(|_| err(format!("not an index: {f:?}")))
            });
            let id = fields.next().transpose()?.unwrap_or_default();
            if id != rows.len() {
                return Err(err(format!("expected graph id {}, found {id}", rows.len())));
            }
            let row = fields.collect::<Result<Vec<_>, _>>()?;
            if !row.windows(2).all(|w| w[0] < w[1]) {
                return Err(err("indices must be strictly ascending".into()));
            }
            if let Some(&c) = row.last().filter(|&&c| c >= columns) {
                return Err(err(format!("column {c} outside vocabulary of {columns}")));
            }
            rows.push(row);
        }
        Ok(Incidence { columns, rows })
    }
}
