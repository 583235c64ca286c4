use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::CostTable;
use crate::error::{Error, Result};
use crate::trees::{Alphabet, GAP};

/// Regular simplex with unit side length: a `dim x dim` matrix whose columns
/// have norm 1 and pairwise Euclidean distance 1, so together with the
/// origin they form `dim + 1` mutually unit-distant points.
///
/// Column `u` (1-based) is `(rho_1, ..., rho_{u-1}, rho_u * (u + 1), 0, ...)`
/// with `rho_u = 1 / sqrt(2 u (u + 1))`.
pub fn simplex_init(dim: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(dim, dim);
    let mut rho = vec![0.0; dim];
    for u in 0..dim {
        for v in 0..u {
            a[(v, u)] = rho[v];
        }
        let k = (u + 1) as f64;
        rho[u] = 1.0 / (2.0 * k * (k + 1.0)).sqrt();
        a[(u, u)] = rho[u] * (k + 1.0);
    }
    a
}

/// One vector per alphabet symbol (the columns); the gap sits at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    alphabet: Alphabet,
    vectors: DMatrix<f64>,
}

impl EmbeddingMatrix {
    pub fn new(alphabet: Alphabet, vectors: DMatrix<f64>) -> Result<Self> {
        if vectors.ncols() != alphabet.len() || vectors.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "embedding needs {} columns and at least one row, got {}x{}",
                alphabet.len(),
                vectors.nrows(),
                vectors.ncols()
            )));
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("embedding entries must be finite".into()));
        }
        Ok(EmbeddingMatrix { alphabet, vectors })
    }

    /// Simplex initialization in `dim >= |alphabet|` dimensions: every
    /// symbol and the gap are at distance 1 from each other.
    pub fn simplex(alphabet: Alphabet, dim: usize) -> Result<Self> {
        let n = alphabet.len();
        if dim < n {
            return Err(Error::Dimension(format!(
                "simplex embedding of {n} symbols needs dimension >= {n}, got {dim}"
            )));
        }
        let full = simplex_init(dim);
        let vectors = full.columns(0, n).into_owned();
        EmbeddingMatrix::new(alphabet, vectors)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn vectors_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.vectors
    }

    /// Squared distance between extended-alphabet elements `i` and `j`.
    fn distance(&self, i: usize, j: usize) -> f64 {
        let gap = self.alphabet.gap();
        let d = self.dim();
        (0..d)
            .map(|r| {
                let a = if i == gap { 0.0 } else { self.vectors[(r, i)] };
                let b = if j == gap { 0.0 } else { self.vectors[(r, j)] };
                (a - b) * (a - b)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Rows are dimensions; columns are the symbols then the gap (all zero).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = (0..=self.alphabet.len())
            .map(|i| self.alphabet.name(i))
            .collect();
        out.push_str(&names.join("\t"));
        out.push('\n');
        for r in 0..self.dim() {
            let row: Vec<String> = (0..self.alphabet.len())
                .map(|c| format!("{:.16e}", self.vectors[(r, c)]))
                .chain(std::iter::once(format!("{:.16e}", 0.0)))
                .collect();
            writeln!(out, "{}", row.join("\t")).expect("write to string");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::Format("empty embedding".into()))?
            .split_whitespace()
            .collect();
        if header.last() != Some(&GAP) {
            return Err(Error::Format("header must end with '-'".into()));
        }
        let alphabet = Alphabet::from_names(&header[..header.len() - 1])?;
        let n = alphabet.len();
        let mut rows: Vec<f64> = Vec::new();
        let mut dim = 0;
        for line in lines {
            let values = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Format(format!("bad number '{t}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            if values.len() != n + 1 {
                return Err(Error::Format(format!(
                    "embedding row has {} values, expected {}",
                    values.len(),
                    n + 1
                )));
            }
            if values[n] != 0.0 {
                return Err(Error::Format("gap column must be zero".into()));
            }
            rows.extend_from_slice(&values[..n]);
            dim += 1;
        }
        EmbeddingMatrix::new(alphabet, DMatrix::from_row_slice(dim, n, &rows))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        EmbeddingMatrix::from_text(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// `c(x, y) = |a(x) - a(y)|`, a pseudo-metric for any embedding.
pub fn cost_from_embedding(a: &EmbeddingMatrix) -> CostTable {
    let m = a.alphabet.len() + 1;
    let entries = DMatrix::from_fn(m, m, |i, j| if i == j { 0.0 } else { a.distance(i, j) });
    CostTable::new(a.alphabet.clone(), entries).expect("embedding costs are finite")
}

/// Pulls a gradient with respect to cost entries back to the symbol
/// vectors. Coincident points contribute the zero subgradient.
pub fn embedding_gradient(a: &EmbeddingMatrix, cost_grad: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.alphabet.len();
    let gap = a.alphabet.gap();
    let dim = a.dim();
    let mut grad = DMatrix::zeros(dim, n);
    let point = |i: usize, r: usize| if i == gap { 0.0 } else { a.vectors[(r, i)] };
    for i in 0..=n {
        for j in 0..=n {
            let g = cost_grad[(i, j)];
            if i == j || g == 0.0 {
                continue;
            }
            let d = a.distance(i, j);
            if d == 0.0 {
                continue;
            }
            for r in 0..dim {
                let u = g * (point(i, r) - point(j, r)) / d;
                if i != gap {
                    grad[(r, i)] += u;
                }
                if j != gap {
                    grad[(r, j)] -= u;
                }
            }
        }
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::check_pseudometric;

    fn ab() -> Alphabet {
        Alphabet::from_names(&["a", "b"]).unwrap()
    }

    #[test]
    fn two_dimensional_simplex() {
        let a = simplex_init(2);
        assert!((a[(0, 0)] - 1.0).abs() < 1e-15);
        assert!(a[(1, 0)].abs() < 1e-15);
        assert!((a[(0, 1)] - 0.5).abs() < 1e-15);
        assert!((a[(1, 1)] - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_simplex() {
        assert_eq!(simplex_init(1), DMatrix::from_element(1, 1, 1.0));
    }

    #[test]
    fn simplex_columns_are_unit_and_equidistant() {
        for dim in 1..=16 {
            let a = simplex_init(dim);
            for u in 0..dim {
                assert!((a.column(u).norm() - 1.0).abs() < 1e-12);
                for v in u + 1..dim {
                    assert!(((a.column(u) - a.column(v)).norm() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn simplex_embedding_gives_unit_costs() {
        let e = EmbeddingMatrix::simplex(ab(), 2).unwrap();
        let c = cost_from_embedding(&e);
        assert!((c.get_named("a", "b").unwrap() - 1.0).abs() < 1e-12);
        assert!((c.get_named("a", "-").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(c.get_named("a", "a").unwrap(), 0.0);
        assert!(check_pseudometric(&c).is_pseudometric());
        assert!(EmbeddingMatrix::simplex(ab(), 1).is_err());
    }

    #[test]
    fn euclidean_costs() {
        let e = EmbeddingMatrix::new(ab(), DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 4.0]))
            .unwrap();
        let c = cost_from_embedding(&e);
        assert!((c.get_named("a", "b").unwrap() - 5.0).abs() < 1e-12);
        let same = EmbeddingMatrix::new(ab(), DMatrix::from_element(2, 2, 1.5)).unwrap();
        assert_eq!(cost_from_embedding(&same).get_named("a", "b").unwrap(), 0.0);
    }

    #[test]
    fn text_round_trip() {
        let e = EmbeddingMatrix::simplex(ab(), 3).unwrap();
        assert_eq!(EmbeddingMatrix::from_text(&e.to_text()).unwrap(), e);
        assert!(EmbeddingMatrix::from_text("a -\n1 2\n").is_err());
    }

    #[test]
    fn embedding_gradient_matches_differences() {
        let e = EmbeddingMatrix::new(
            ab(),
            DMatrix::from_row_slice(2, 2, &[0.3, -0.2, 0.7, 0.4]),
        )
        .unwrap();
        // weights on a few cost entries
        let mut w = DMatrix::zeros(3, 3);
        w[(0, 1)] = 1.3;
        w[(1, 2)] = -0.4;
        w[(2, 0)] = 0.8;
        let f = |v: &DMatrix<f64>| {
            let c = cost_from_embedding(&EmbeddingMatrix::new(ab(), v.clone()).unwrap());
            c.entries().component_mul(&w).sum()
        };
        let g = embedding_gradient(&e, &w);
        let err = crate::costs::finite_diff_check(f, |_| g.clone(), e.vectors(), 1e-6);
        assert!(err < 1e-8, "err {err}");
    }
}
