use std::fmt;

use nalgebra::DMatrix;

use super::{tied, ted_dp, DistanceResult, EditScript};
use crate::costs::{check_pseudometric, CostTable};
use crate::error::{Error, Result};
use crate::trees::{Alphabet, Tree};

/// Expected multiplicity of each edit key `(u, v)` over a set of scripts,
/// indexed like a [`CostTable`] (gap last).
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptSummary {
    alphabet: Alphabet,
    counts: DMatrix<f64>,
}

impl ScriptSummary {
    pub fn new(alphabet: Alphabet, counts: DMatrix<f64>) -> Result<Self> {
        let m = alphabet.len() + 1;
        if counts.nrows() != m || counts.ncols() != m {
            return Err(Error::Dimension(format!(
                "summary must be {m}x{m}, got {}x{}",
                counts.nrows(),
                counts.ncols()
            )));
        }
        Ok(ScriptSummary { alphabet, counts })
    }

    pub fn zeros(alphabet: Alphabet) -> Self {
        let m = alphabet.len() + 1;
        ScriptSummary {
            alphabet,
            counts: DMatrix::zeros(m, m),
        }
    }

    /// Key counts of one script.
    pub fn from_script(alphabet: &Alphabet, script: &EditScript) -> Result<Self> {
        let mut s = ScriptSummary::zeros(alphabet.clone());
        for e in &script.edits {
            let (u, v) = e.key();
            let idx = |sym: Option<&crate::trees::Symbol>| match sym {
                None => Ok(alphabet.gap()),
                Some(sym) => alphabet
                    .index_of(sym)
                    .ok_or_else(|| Error::UnknownSymbol(sym.to_string())),
            };
            s.counts[(idx(u)?, idx(v)?)] += 1.0;
        }
        Ok(s)
    }

    /// Entrywise mean of several summaries over the same alphabet.
    pub fn mean(alphabet: &Alphabet, items: &[ScriptSummary]) -> Self {
        let mut s = ScriptSummary::zeros(alphabet.clone());
        for it in items {
            s.counts += &it.counts;
        }
        if !items.is_empty() {
            s.counts /= items.len() as f64;
        }
        s
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn counts(&self) -> &DMatrix<f64> {
        &self.counts
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.counts[(from, to)]
    }

    pub fn get_named(&self, from: &str, to: &str) -> Option<f64> {
        let i = self.alphabet.index_of_name(from)?;
        let j = self.alphabet.index_of_name(to)?;
        Some(self.counts[(i, j)])
    }

    /// `sum_{u,v} counts[u][v] * c(u, v)`; linear in `c`.
    pub fn inner(&self, c: &CostTable) -> f64 {
        self.counts.component_mul(c.entries()).sum()
    }
}

impl fmt::Display for ScriptSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.alphabet.len() + 1;
        for i in 0..m {
            for j in 0..m {
                let v = self.counts[(i, j)];
                if v != 0.0 {
                    writeln!(f, "({}, {}) {v}", self.alphabet.name(i), self.alphabet.name(j))?;
                }
            }
        }
        Ok(())
    }
}

/// Statistic accumulated over sets of mappings. `add` is disjoint union,
/// `extend` appends one edit key to every mapping, `product` joins two
/// independent parts.
pub(crate) trait Stats: Clone {
    fn none(keys: usize) -> Self;
    fn unit(keys: usize) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn extend(&self, key: usize) -> Self;
    fn product(&self, other: &Self) -> Self;
}

impl Stats for u128 {
    fn none(_: usize) -> Self {
        0
    }
    fn unit(_: usize) -> Self {
        1
    }
    fn add(&self, other: &Self) -> Self {
        self.saturating_add(*other)
    }
    fn extend(&self, _: usize) -> Self {
        *self
    }
    fn product(&self, other: &Self) -> Self {
        self.saturating_mul(*other)
    }
}

/// Number of mappings and, per key, the total multiplicity over them.
#[derive(Debug, Clone)]
pub(crate) struct KeyTotals {
    n: f64,
    sums: Vec<f64>,
}

impl Stats for KeyTotals {
    fn none(keys: usize) -> Self {
        KeyTotals {
            n: 0.0,
            sums: vec![0.0; keys],
        }
    }
    fn unit(keys: usize) -> Self {
        KeyTotals {
            n: 1.0,
            sums: vec![0.0; keys],
        }
    }
    fn add(&self, other: &Self) -> Self {
        KeyTotals {
            n: self.n + other.n,
            sums: self.sums.iter().zip(&other.sums).map(|(a, b)| a + b).collect(),
        }
    }
    fn extend(&self, key: usize) -> Self {
        let mut out = self.clone();
        out.sums[key] += self.n;
        out
    }
    fn product(&self, other: &Self) -> Self {
        KeyTotals {
            n: self.n * other.n,
            sums: self
                .sums
                .iter()
                .zip(&other.sums)
                .map(|(a, b)| a * other.n + self.n * b)
                .collect(),
        }
    }
}

/// Folds `S` over every optimal mapping, following the same keyroot order
/// as the distance pass. Each mapping of a prefix-forest pair is counted
/// once by splitting on its rightmost source root `v`: unmapped, mapped
/// while the rightmost target root `w` is unmapped, or mapped to `w`.
pub(crate) fn fold_optimal<S: Stats>(r: &DistanceResult) -> S {
    let (x, y) = (&r.x, &r.y);
    let e = r.cost.entries();
    let gap = r.cost.alphabet().gap();
    let m = gap + 1;
    let keys = m * m;
    let key = |u: usize, v: usize| u * m + v;
    let ny = y.len();
    let mut children: Vec<S> = vec![S::none(keys); x.len() * ny];
    let mut result = S::none(keys);
    for (kx, &i) in x.keyroots.iter().enumerate() {
        let li = x.lld[i];
        let rows = i - li + 2;
        for (ky, &j) in y.keyroots.iter().enumerate() {
            let lj = y.lld[j];
            let cols = j - lj + 2;
            let t = r.table(kx, ky);
            let mut all: Vec<S> = vec![S::none(keys); rows * cols];
            let mut mapped: Vec<S> = vec![S::none(keys); rows * cols];
            all[0] = S::unit(keys);
            for a in 1..rows {
                all[a * cols] = all[(a - 1) * cols].extend(key(x.labels[li + a - 1], gap));
            }
            for b in 1..cols {
                all[b] = all[b - 1].extend(key(gap, y.labels[lj + b - 1]));
            }
            for a in 1..rows {
                let v = li + a - 1;
                let (lv, xv) = (x.lld[v] - li, x.labels[v]);
                for b in 1..cols {
                    let w = lj + b - 1;
                    let (lw, yw) = (y.lld[w] - lj, y.labels[w]);
                    let here = t.get(a, b);
                    let cf = if lv == 0 && lw == 0 {
                        children[v * ny + w] = all[(a - 1) * cols + b - 1].clone();
                        t.get(a - 1, b - 1)
                    } else {
                        r.children[v * ny + w]
                    };
                    let mut mp = S::none(keys);
                    if tied(here, t.get(a, b - 1) + e[(gap, yw)]) {
                        mp = mp.add(&mapped[a * cols + b - 1].extend(key(gap, yw)));
                    }
                    if tied(here, t.get(lv, lw) + cf + e[(xv, yw)]) {
                        let joined = all[lv * cols + lw].product(&children[v * ny + w]);
                        mp = mp.add(&joined.extend(key(xv, yw)));
                    }
                    let mut al = mp.clone();
                    if tied(here, t.get(a - 1, b) + e[(xv, gap)]) {
                        al = al.add(&all[(a - 1) * cols + b].extend(key(xv, gap)));
                    }
                    all[a * cols + b] = al;
                    mapped[a * cols + b] = mp;
                }
            }
            result = all[rows * cols - 1].clone();
        }
    }
    result
}

fn require_pseudometric(c: &CostTable) -> Result<()> {
    let audit = check_pseudometric(c);
    if audit.is_pseudometric() {
        Ok(())
    } else {
        Err(Error::NotPseudoMetric(audit.summary()))
    }
}

impl DistanceResult {
    /// Average key counts over all optimal mappings of this result.
    pub fn cooptimal_summary(&self) -> ScriptSummary {
        let totals: KeyTotals = fold_optimal(self);
        let m = self.cost.alphabet().len() + 1;
        let counts = DMatrix::from_fn(m, m, |i, j| totals.sums[i * m + j] / totals.n);
        ScriptSummary::new(self.cost.alphabet().clone(), counts).expect("square summary")
    }

    /// Number of distinct optimal mappings (saturating).
    pub fn cooptimal_count(&self) -> u128 {
        fold_optimal(self)
    }
}

/// Average key counts over every co-optimal mapping from `x` to `y`.
pub fn summarize_cooptimal(x: &Tree, y: &Tree, c: &CostTable) -> Result<ScriptSummary> {
    require_pseudometric(c)?;
    Ok(ted_dp(x, y, c)?.cooptimal_summary())
}

pub fn count_cooptimal(x: &Tree, y: &Tree, c: &CostTable) -> Result<u128> {
    require_pseudometric(c)?;
    Ok(ted_dp(x, y, c)?.cooptimal_count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{alphabet, c0, c1};
    use crate::trees::parse_tree;

    fn t(s: &str) -> Tree {
        parse_tree(s, &alphabet()).unwrap()
    }

    #[test]
    fn two_cooptimal_mappings_for_the_crossed_pair() {
        let s = summarize_cooptimal(&t("1(2)"), &t("3"), &c0()).unwrap();
        for (u, v) in [("1", "-"), ("2", "3"), ("1", "3"), ("2", "-")] {
            assert!((s.get_named(u, v).unwrap() - 0.5).abs() < 1e-15, "{u},{v}");
        }
        assert!((s.counts().sum() - 2.0).abs() < 1e-15);
        assert_eq!(count_cooptimal(&t("1(2)"), &t("3"), &c0()).unwrap(), 2);
    }

    #[test]
    fn single_relabel() {
        let s = summarize_cooptimal(&t("2"), &t("3"), &c0()).unwrap();
        assert_eq!(s.get_named("2", "3"), Some(1.0));
        assert_eq!(s.counts().sum(), 1.0);
        assert_eq!(count_cooptimal(&t("2"), &t("3"), &c0()).unwrap(), 1);
    }

    #[test]
    fn identical_trees_use_the_identity() {
        let x = t("1(2(3,1),3(2),1)");
        let s = summarize_cooptimal(&x, &x, &c0()).unwrap();
        assert_eq!(s.get_named("1", "1"), Some(3.0));
        assert_eq!(s.get_named("2", "2"), Some(2.0));
        assert_eq!(s.get_named("3", "3"), Some(2.0));
        assert_eq!(s.counts().sum(), 7.0);
        assert_eq!(count_cooptimal(&x, &x, &c0()).unwrap(), 1);
    }

    #[test]
    fn summary_prices_back_to_the_distance() {
        let (x, y) = (t("1(2(3),3,1(2))"), t("3(1,2(2,3))"));
        let r = ted_dp(&x, &y, &c0()).unwrap();
        assert!((r.cooptimal_summary().inner(&c0()) - r.distance).abs() < 1e-9);
    }

    #[test]
    fn non_metric_cost_is_rejected() {
        assert!(matches!(
            summarize_cooptimal(&t("1"), &t("2"), &c1()),
            Err(Error::NotPseudoMetric(_))
        ));
        assert!(count_cooptimal(&t("1"), &t("2"), &c1()).is_err());
    }

    #[test]
    fn single_script_summary() {
        let r = ted_dp(&t("1(2)"), &t("3"), &c0()).unwrap();
        let s = ScriptSummary::from_script(&alphabet(), &crate::ted::backtrace_one(&r)).unwrap();
        assert_eq!(s.get_named("1", "3"), Some(1.0));
        assert_eq!(s.get_named("2", "-"), Some(1.0));
        assert_eq!(s.counts().sum(), 2.0);
    }
}
