use super::{tied, EditScript, IndexedTree};
use crate::costs::CostTable;
use crate::error::Result;
use crate::trees::Tree;

/// Forest-distance table of one keyroot pair. Cell `(a, b)` holds the
/// distance between the first `a` postorder nodes of the left keyroot's
/// subtree and the first `b` of the right one's.
#[derive(Debug, Clone)]
pub(crate) struct Table {
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Table {
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.cols + b]
    }
}

/// Outcome of the keyroot dynamic program, with every table kept for
/// backtracing and co-optimal summaries.
#[derive(Debug, Clone)]
pub struct DistanceResult {
    pub distance: f64,
    /// Set when the cost table has a negative entry; the value is then only
    /// the recurrence's output and need not be a minimal script cost.
    pub negative_cost_warning: bool,
    pub(crate) x: IndexedTree,
    pub(crate) y: IndexedTree,
    pub(crate) x_tree: Tree,
    pub(crate) y_tree: Tree,
    pub(crate) cost: CostTable,
    pub(crate) tables: Vec<Table>,
    /// `children[v * |y| + w]`: distance between the child forests of `v`
    /// and `w`.
    pub(crate) children: Vec<f64>,
}

impl DistanceResult {
    pub fn cost(&self) -> &CostTable {
        &self.cost
    }

    pub fn source(&self) -> &Tree {
        &self.x_tree
    }

    pub fn target(&self) -> &Tree {
        &self.y_tree
    }

    pub(crate) fn table(&self, kx: usize, ky: usize) -> &Table {
        &self.tables[kx * self.y.keyroots.len() + ky]
    }
}

/// Zhang-Shasha distance in `O(|x|^2 |y|^2)` time.
pub fn ted_dp(x: &Tree, y: &Tree, c: &CostTable) -> Result<DistanceResult> {
    let xi = IndexedTree::new(x, c.alphabet())?;
    let yi = IndexedTree::new(y, c.alphabet())?;
    let (distance, tables, children) = run(&xi, &yi, c, true);
    Ok(DistanceResult {
        distance,
        negative_cost_warning: c.has_negative(),
        x: xi,
        y: yi,
        x_tree: x.clone(),
        y_tree: y.clone(),
        cost: c.clone(),
        tables,
        children,
    })
}

/// Distance only; no tables are retained.
pub fn ted_distance(x: &Tree, y: &Tree, c: &CostTable) -> Result<f64> {
    let xi = IndexedTree::new(x, c.alphabet())?;
    let yi = IndexedTree::new(y, c.alphabet())?;
    Ok(run(&xi, &yi, c, false).0)
}

fn run(x: &IndexedTree, y: &IndexedTree, c: &CostTable, keep: bool) -> (f64, Vec<Table>, Vec<f64>) {
    let gap = c.alphabet().gap();
    let e = c.entries();
    let ny = y.len();
    let mut children = vec![0.0; x.len() * ny];
    let mut tables = Vec::new();
    let mut last = 0.0;
    for &i in &x.keyroots {
        let li = x.lld[i];
        let rows = i - li + 2;
        for &j in &y.keyroots {
            let lj = y.lld[j];
            let cols = j - lj + 2;
            let mut t = vec![0.0; rows * cols];
            for a in 1..rows {
                t[a * cols] = t[(a - 1) * cols] + e[(x.labels[li + a - 1], gap)];
            }
            for b in 1..cols {
                t[b] = t[b - 1] + e[(gap, y.labels[lj + b - 1])];
            }
            for a in 1..rows {
                let v = li + a - 1;
                let (lv, xv) = (x.lld[v] - li, x.labels[v]);
                for b in 1..cols {
                    let w = lj + b - 1;
                    let (lw, yw) = (y.lld[w] - lj, y.labels[w]);
                    let cf = if lv == 0 && lw == 0 {
                        let d = t[(a - 1) * cols + b - 1];
                        children[v * ny + w] = d;
                        d
                    } else {
                        children[v * ny + w]
                    };
                    let del = t[(a - 1) * cols + b] + e[(xv, gap)];
                    let ins = t[a * cols + b - 1] + e[(gap, yw)];
                    let rep = t[lv * cols + lw] + cf + e[(xv, yw)];
                    t[a * cols + b] = rep.min(del).min(ins);
                }
            }
            last = t[rows * cols - 1];
            if keep {
                tables.push(Table { cols, data: t });
            }
        }
    }
    (last, tables, children)
}

/// One optimal mapping as `(x preorder, y preorder)` pairs. Ties prefer
/// replacing over deleting over inserting, scanning from the right.
pub fn backtrace_mapping(r: &DistanceResult) -> Vec<(usize, usize)> {
    let (x, y) = (&r.x, &r.y);
    let e = r.cost.entries();
    let gap = r.cost.alphabet().gap();
    let ny = y.len();
    let mut mapping = Vec::new();
    let mut stack = vec![(x.keyroots.len() - 1, y.keyroots.len() - 1, x.len(), y.len())];
    while let Some((kx, ky, mut a, mut b)) = stack.pop() {
        let t = r.table(kx, ky);
        let (li, lj) = (x.lld[x.keyroots[kx]], y.lld[y.keyroots[ky]]);
        while a > 0 || b > 0 {
            let here = t.get(a, b);
            if a > 0 && b > 0 {
                let (v, w) = (li + a - 1, lj + b - 1);
                let (lv, lw) = (x.lld[v] - li, y.lld[w] - lj);
                let cf = r.children[v * ny + w];
                if tied(here, t.get(lv, lw) + cf + e[(x.labels[v], y.labels[w])]) {
                    mapping.push((x.preorder[v], y.preorder[w]));
                    let (cx, cy) = (v - x.lld[v], w - y.lld[w]);
                    if cx > 0 || cy > 0 {
                        stack.push((x.keyroot_of[v], y.keyroot_of[w], cx, cy));
                    }
                    a = lv;
                    b = lw;
                    continue;
                }
            }
            if a > 0 && tied(here, t.get(a - 1, b) + e[(x.labels[li + a - 1], gap)]) {
                a -= 1;
            } else {
                b -= 1;
            }
        }
    }
    mapping.sort_unstable();
    mapping
}

/// One cheapest edit script, deterministic under ties.
pub fn backtrace_one(r: &DistanceResult) -> EditScript {
    EditScript::from_mapping(&r.x_tree, &r.y_tree, &backtrace_mapping(r))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::LN_2;

    use super::*;
    use crate::reference::{alphabet, c0, c1};
    use crate::ted::script_cost;
    use crate::trees::parse_tree;

    fn t(s: &str) -> Tree {
        parse_tree(s, &alphabet()).unwrap()
    }

    fn keys(s: &EditScript) -> Vec<String> {
        let mut k: Vec<String> = s.edits.iter().map(|e| e.to_string()).collect();
        k.sort();
        k
    }

    #[test]
    fn reference_distances() {
        let d = |a: &str, b: &str, c: &CostTable| ted_dp(&t(a), &t(b), c).unwrap().distance;
        assert!((d("1(2)", "2", &c0()) - LN_2).abs() < 1e-15);
        assert!((d("1(2)", "3", &c0()) - 2.0 * LN_2).abs() < 1e-15);
        assert_eq!(d("1(2)", "1(2)", &c0()), 0.0);
        // the recurrence only sees single-mapping scripts: delete 1 and 2, insert 3
        assert!((d("1(2)", "3", &c1()) - LN_2 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn distance_only_agrees() {
        let (x, y) = (t("1(2(3),3,1(2))"), t("3(1,2(2,3))"));
        let full = ted_dp(&x, &y, &c1()).unwrap().distance;
        assert_eq!(ted_distance(&x, &y, &c1()).unwrap(), full);
    }

    #[test]
    fn backtrace_on_reference_pairs() {
        let r = ted_dp(&t("1(2)"), &t("2"), &c0()).unwrap();
        let s = backtrace_one(&r);
        assert_eq!(keys(&s), vec!["(1, -)", "(2, 2)"]);
        s.validate(&t("1(2)"), &t("2")).unwrap();

        let s = backtrace_one(&ted_dp(&t("2"), &t("3"), &c0()).unwrap());
        assert_eq!(keys(&s), vec!["(2, 3)"]);

        // the single scripts behind the single-script fit
        let s = backtrace_one(&ted_dp(&t("1(2)"), &t("3"), &c0()).unwrap());
        assert_eq!(keys(&s), vec!["(1, 3)", "(2, -)"]);
        let s = backtrace_one(&ted_dp(&t("3"), &t("1(2)"), &c0()).unwrap());
        assert_eq!(keys(&s), vec!["(-, 2)", "(3, 1)"]);
    }

    #[test]
    fn identity_backtrace() {
        let x = t("1(2(3,1),3(2))");
        let r = ted_dp(&x, &x, &c0()).unwrap();
        let s = backtrace_one(&r);
        assert_eq!(s.len(), x.size());
        assert!(s.edits.iter().all(|e| matches!(e, crate::ted::Edit::Replace { from, to, .. } if from == to)));
        assert_eq!(script_cost(&s, &c0()).unwrap(), 0.0);
    }

    #[test]
    fn negative_entries_raise_the_warning() {
        let mut c = c0();
        c.set(0, 1, -0.5);
        assert!(ted_dp(&t("1"), &t("2"), &c).unwrap().negative_cost_warning);
        assert!(!ted_dp(&t("1"), &t("2"), &c0()).unwrap().negative_cost_warning);
    }

    #[test]
    fn unknown_label_is_an_error() {
        let x = crate::trees::parse_tree_unchecked("q").unwrap();
        assert!(ted_dp(&x, &t("1"), &c0()).is_err());
    }
}
