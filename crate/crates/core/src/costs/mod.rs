//! Edit cost functions over an alphabet extended with the gap element.
//!
//! A [`CostTable`] is the square matrix `c(x, y)` for `x, y` in the alphabet
//! plus gap; row `x` is the symbol being replaced (or deleted when `y` is the
//! gap) and column `y` the symbol it is replaced with.

mod audit;
mod cosine;
mod embedding;
mod gradcheck;
mod projection;

use std::fmt::{self, Write as _};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::trees::{Alphabet, Symbol, GAP};

pub use audit::{check_pseudometric, check_pseudometric_with_tolerance, MetricAudit};
pub use cosine::{cosine_cost, cosine_cost_gradient, CosineTransform};
pub use embedding::{
    cost_from_embedding, embedding_gradient, simplex_init, EmbeddingMatrix,
};
pub use gradcheck::{cosine_gradcheck, finite_diff_check};
pub use projection::{metric_projection, nearest_pseudometric};

/// Absolute/relative tolerance used by the metric audit.
pub const METRIC_TOLERANCE: f64 = 1e-12;

/// One element of the extended alphabet: a symbol or the gap.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Element {
    Symbol(Symbol),
    Gap,
}

impl Element {
    pub fn from_index(alphabet: &Alphabet, index: usize) -> Self {
        if index == alphabet.gap() {
            Element::Gap
        } else {
            Element::Symbol(alphabet.symbols()[index].clone())
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Symbol(s) => write!(f, "{s}"),
            Element::Gap => f.write_str(GAP),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    alphabet: Alphabet,
    entries: DMatrix<f64>,
}

impl CostTable {
    pub fn new(alphabet: Alphabet, entries: DMatrix<f64>) -> Result<Self> {
        let m = alphabet.len() + 1;
        if entries.nrows() != m || entries.ncols() != m {
            return Err(Error::Dimension(format!(
                "cost table must be {m}x{m}, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("cost table entries must be finite".into()));
        }
        Ok(CostTable { alphabet, entries })
    }

    pub fn zeros(alphabet: Alphabet) -> Self {
        let m = alphabet.len() + 1;
        CostTable {
            alphabet,
            entries: DMatrix::zeros(m, m),
        }
    }

    /// `value` off the diagonal, zero on it. With `value = ln 2` this is the
    /// default reference cost.
    pub fn uniform(alphabet: Alphabet, value: f64) -> Self {
        let m = alphabet.len() + 1;
        let entries = DMatrix::from_fn(m, m, |i, j| if i == j { 0.0 } else { value });
        CostTable { alphabet, entries }
    }

    /// Builds a table from `(from, to, value)` triples over symbol names and
    /// `-`; unspecified entries are zero.
    pub fn from_entries(alphabet: Alphabet, entries: &[(&str, &str, f64)]) -> Result<Self> {
        let mut table = CostTable::zeros(alphabet);
        for &(x, y, v) in entries {
            table.set_named(x, y, v)?;
        }
        Ok(table)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    /// Side length of the table, `|alphabet| + 1`.
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[(from, to)]
    }

    #[inline]
    pub fn set(&mut self, from: usize, to: usize, value: f64) {
        self.entries[(from, to)] = value;
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.alphabet
            .index_of_name(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn get_named(&self, from: &str, to: &str) -> Result<f64> {
        Ok(self.get(self.index(from)?, self.index(to)?))
    }

    pub fn set_named(&mut self, from: &str, to: &str, value: f64) -> Result<()> {
        let (i, j) = (self.index(from)?, self.index(to)?);
        self.set(i, j, value);
        Ok(())
    }

    /// Cost of an edit key; `None` stands for the gap.
    pub fn key_cost(&self, from: Option<&Symbol>, to: Option<&Symbol>) -> Result<f64> {
        let idx = |s: Option<&Symbol>| match s {
            None => Ok(self.alphabet.gap()),
            Some(s) => self
                .alphabet
                .index_of(s)
                .ok_or_else(|| Error::UnknownSymbol(s.to_string())),
        };
        Ok(self.get(idx(from)?, idx(to)?))
    }

    /// Sum of squared entries.
    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum()
    }

    pub fn has_negative(&self) -> bool {
        self.entries.iter().any(|&v| v < 0.0)
    }

    pub fn max_abs_diff(&self, other: &CostTable) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> CostTable {
        CostTable {
            alphabet: self.alphabet.clone(),
            entries: self.entries.transpose(),
        }
    }

    /// Text form: a header line with the symbols and `-`, then one line per
    /// row label followed by its entries. Values carry 17 significant digits
    /// so the round trip is exact.
    pub fn to_text(&self) -> String {
        let m = self.dim();
        let mut out = String::new();
        let names: Vec<&str> = (0..m).map(|i| self.alphabet.name(i)).collect();
        out.push_str(&names.join("\t"));
        out.push('\n');
        for (i, name) in names.iter().enumerate() {
            out.push_str(name);
            for j in 0..m {
                write!(out, "\t{:.16e}", self.get(i, j)).expect("write to string");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::Format("empty cost table".into()))?
            .split_whitespace()
            .collect();
        match header.split_last() {
            Some((&last, _)) if last == GAP => {}
            _ => return Err(Error::Format("header must end with '-'".into())),
        }
        let alphabet = Alphabet::from_names(&header[..header.len() - 1])?;
        let m = header.len();
        let mut entries = DMatrix::zeros(m, m);
        for (i, expected) in header.iter().enumerate() {
            let line = lines
                .next()
                .ok_or_else(|| Error::Format(format!("missing row '{expected}'")))?;
            let mut tokens = line.split_whitespace();
            let label = tokens.next().unwrap_or_default();
            if label != *expected {
                return Err(Error::Format(format!(
                    "row {i} labelled '{label}', expected '{expected}'"
                )));
            }
            let values = tokens
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Format(format!("bad number '{t}' in row '{label}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            if values.len() != m {
                return Err(Error::Format(format!(
                    "row '{label}' has {} values, expected {m}",
                    values.len()
                )));
            }
            for (j, v) in values.into_iter().enumerate() {
                entries[(i, j)] = v;
            }
        }
        if lines.next().is_some() {
            return Err(Error::Format("trailing lines after cost table".into()));
        }
        CostTable::new(alphabet, entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CostTable::from_text(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

impl fmt::Display for CostTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.dim();
        write!(f, "{:>8}", "")?;
        for j in 0..m {
            write!(f, "{:>10}", self.alphabet.name(j))?;
        }
        writeln!(f)?;
        for i in 0..m {
            write!(f, "{:>8}", self.alphabet.name(i))?;
            for j in 0..m {
                write!(f, "{:>10.4}", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
