use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::{forest_size, tied, Edit, EditScript, PreorderIndex};
use crate::costs::CostTable;
use crate::error::{Error, Result};
use crate::trees::{Symbol, Tree};

/// Largest `|x| * |y|` the exhaustive mapping search accepts.
pub const ENUMERATION_LIMIT: usize = 64;

/// Minimum mapping cost and every minimizing mapping, each as sorted
/// `(x preorder, y preorder)` pairs, by exhaustive search.
pub fn enumerate_optimal_mappings(
    x: &Tree,
    y: &Tree,
    c: &CostTable,
) -> Result<(f64, Vec<Vec<(usize, usize)>>)> {
    let product = x.size() * y.size();
    if product > ENUMERATION_LIMIT {
        return Err(Error::SizeGuard {
            product,
            limit: ENUMERATION_LIMIT,
        });
    }
    let a = c.alphabet();
    let label = |s: &Symbol| a.index_of(s).ok_or_else(|| Error::UnknownSymbol(s.to_string()));
    let xi = PreorderIndex::new(x);
    let yi = PreorderIndex::new(y);
    let xl = xi.labels.iter().map(label).collect::<Result<Vec<_>>>()?;
    let yl = yi.labels.iter().map(label).collect::<Result<Vec<_>>>()?;
    let mut search = Search {
        xi: &xi,
        yi: &yi,
        xl: &xl,
        yl: &yl,
        c,
        current: Vec::new(),
        best: f64::INFINITY,
        found: Vec::new(),
    };
    search.go(0);
    Ok((search.best, search.found))
}

struct Search<'a> {
    xi: &'a PreorderIndex,
    yi: &'a PreorderIndex,
    xl: &'a [usize],
    yl: &'a [usize],
    c: &'a CostTable,
    current: Vec<(usize, usize)>,
    best: f64,
    found: Vec<Vec<(usize, usize)>>,
}

impl Search<'_> {
    fn go(&mut self, v: usize) {
        if v == self.xi.len() {
            let cost = self.cost();
            if self.best.is_finite() && tied(cost, self.best) {
                self.found.push(self.current.clone());
            } else if cost < self.best {
                self.best = cost;
                self.found = vec![self.current.clone()];
            }
            return;
        }
        self.go(v + 1);
        for w in 0..self.yi.len() {
            if self.compatible(v, w) {
                self.current.push((v, w));
                self.go(v + 1);
                self.current.pop();
            }
        }
    }

    fn cost(&self) -> f64 {
        let gap = self.c.alphabet().gap();
        let e = self.c.entries();
        let mut image = vec![None; self.xi.len()];
        let mut hit = vec![false; self.yi.len()];
        for &(v, w) in &self.current {
            image[v] = Some(w);
            hit[w] = true;
        }
        let source: f64 = image
            .iter()
            .enumerate()
            .map(|(v, m)| match m {
                Some(w) => e[(self.xl[v], self.yl[*w])],
                None => e[(self.xl[v], gap)],
            })
            .sum();
        let inserted: f64 = (0..self.yi.len())
            .filter(|&w| !hit[w])
            .map(|w| e[(gap, self.yl[w])])
            .sum();
        source + inserted
    }

    /// Earlier pairs have smaller source preorder, so `w` must come later
    /// in target preorder with the same ancestry relation.
    fn compatible(&self, v: usize, w: usize) -> bool {
        self.current.iter().all(|&(pv, pw)| {
            pw < w && self.xi.is_ancestor(pv, v) == self.yi.is_ancestor(pw, w)
        })
    }
}

/// Exhaustive counterpart of the dynamic program: the minimum over all
/// valid mappings, with one script per minimizing mapping.
pub fn enumerate_mappings_oracle(
    x: &Tree,
    y: &Tree,
    c: &CostTable,
) -> Result<(f64, Vec<EditScript>)> {
    let (best, mappings) = enumerate_optimal_mappings(x, y, c)?;
    let scripts = mappings
        .iter()
        .map(|m| EditScript::from_mapping(x, y, m))
        .collect();
    Ok((best, scripts))
}

/// Cheapest chain of single edits from `x` to `y` through forests of at
/// most `size_cap` nodes (default `max(|x|, |y|) + 1`), by uniform-cost
/// search. Intermediate states may be forests.
pub fn true_distance_oracle(
    x: &Tree,
    y: &Tree,
    c: &CostTable,
    size_cap: Option<usize>,
) -> Result<f64> {
    if c.has_negative() {
        return Err(Error::NegativeCost(
            "shortest-path search needs nonnegative edges".into(),
        ));
    }
    for t in [x, y] {
        t.validate(c.alphabet())?;
    }
    let cap = size_cap.unwrap_or(x.size().max(y.size()) + 1);
    if cap < x.size().max(y.size()) {
        return Err(Error::Unreachable { cap });
    }
    let target = key(std::slice::from_ref(y));
    let symbols = c.alphabet().symbols().to_vec();
    let mut heap = BinaryHeap::new();
    let mut done: HashSet<String> = HashSet::new();
    heap.push(State {
        cost: 0.0,
        forest: vec![x.clone()],
    });
    while let Some(State { cost, forest }) = heap.pop() {
        let k = key(&forest);
        if k == target {
            return Ok(cost);
        }
        if !done.insert(k) {
            continue;
        }
        for (edit, step) in neighbours(&forest, &symbols, c, cap) {
            let mut next = forest.clone();
            edit.apply(&mut next).expect("generated edits are valid");
            if !done.contains(&key(&next)) {
                heap.push(State {
                    cost: cost + step,
                    forest: next,
                });
            }
        }
    }
    Err(Error::Unreachable { cap })
}

fn key(forest: &[Tree]) -> String {
    let parts: Vec<String> = forest.iter().map(Tree::to_string).collect();
    parts.join(",")
}

fn labels_preorder(forest: &[Tree]) -> Vec<Symbol> {
    forest
        .iter()
        .flat_map(|t| t.preorder().into_iter().cloned())
        .collect()
}

/// Child counts per preorder position.
fn arities(forest: &[Tree]) -> Vec<usize> {
    fn walk(t: &Tree, out: &mut Vec<usize>) {
        out.push(t.children.len());
        for ch in &t.children {
            walk(ch, out);
        }
    }
    let mut out = Vec::new();
    for t in forest {
        walk(t, &mut out);
    }
    out
}

fn neighbours(forest: &[Tree], symbols: &[Symbol], c: &CostTable, cap: usize) -> Vec<(Edit, f64)> {
    let labels = labels_preorder(forest);
    let mut out = Vec::new();
    for (pos, from) in labels.iter().enumerate() {
        for to in symbols {
            if to != from {
                let cost = c.key_cost(Some(from), Some(to)).expect("alphabet checked");
                out.push((
                    Edit::Replace {
                        pos,
                        from: from.clone(),
                        to: to.clone(),
                    },
                    cost,
                ));
            }
        }
        let cost = c.key_cost(Some(from), None).expect("alphabet checked");
        out.push((
            Edit::Delete {
                pos,
                label: from.clone(),
            },
            cost,
        ));
    }
    if forest_size(forest) < cap {
        let arity = arities(forest);
        let slots = std::iter::once((None, forest.len()))
            .chain(arity.iter().enumerate().map(|(p, &n)| (Some(p), n)));
        for (parent, n) in slots {
            for index in 0..=n {
                for adopt in 0..=n - index {
                    for label in symbols {
                        let cost = c.key_cost(None, Some(label)).expect("alphabet checked");
                        out.push((
                            Edit::Insert {
                                parent,
                                index,
                                adopt,
                                label: label.clone(),
                            },
                            cost,
                        ));
                    }
                }
            }
        }
    }
    out
}

struct State {
    cost: f64,
    forest: Vec<Tree>,
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for State {}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for State {
    // reversed: the heap pops the cheapest state first
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::LN_2;

    use super::*;
    use crate::reference::{alphabet, c0};
    use crate::trees::{parse_tree, Alphabet};

    fn t(s: &str) -> Tree {
        parse_tree(s, &alphabet()).unwrap()
    }

    fn detour_cost() -> CostTable {
        let a = Alphabet::from_names(&["a", "b", "c"]).unwrap();
        let mut c = CostTable::from_entries(
            a,
            &[("a", "b", 1.0), ("b", "a", 1.0), ("a", "c", 0.3), ("c", "a", 0.3)],
        )
        .unwrap();
        for (u, v) in [("b", "c"), ("c", "b")] {
            c.set_named(u, v, 0.3).unwrap();
        }
        for s in ["a", "b", "c"] {
            c.set_named(s, "-", 1.0).unwrap();
            c.set_named("-", s, 1.0).unwrap();
        }
        c
    }

    #[test]
    fn crossed_pair_has_two_minimizers() {
        let (d, scripts) = enumerate_mappings_oracle(&t("1(2)"), &t("3"), &c0()).unwrap();
        assert!((d - 2.0 * LN_2).abs() < 1e-15);
        assert_eq!(scripts.len(), 2);
        for s in &scripts {
            s.validate(&t("1(2)"), &t("3")).unwrap();
        }
    }

    #[test]
    fn identity_has_one_minimizer() {
        let x = t("1(2,3(1))");
        let (d, scripts) = enumerate_mappings_oracle(&x, &x, &c0()).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(scripts.len(), 1);
    }

    #[test]
    fn guard_rejects_large_inputs() {
        let x = t("1(1,1,1,1,1,1,1,1)");
        assert!(matches!(
            enumerate_mappings_oracle(&x, &x, &c0()),
            Err(Error::SizeGuard { product: 81, .. })
        ));
    }

    #[test]
    fn detour_through_an_intermediate_label() {
        let c = detour_cost();
        let a = c.alphabet().clone();
        let p = |s: &str| parse_tree(s, &a).unwrap();
        let d = true_distance_oracle(&p("a"), &p("b"), &c, Some(2)).unwrap();
        assert!((d - 0.6).abs() < 1e-12);
        let d = true_distance_oracle(&p("a(c)"), &p("b(c)"), &c, Some(3)).unwrap();
        assert!((d - 0.6).abs() < 1e-12);
        assert_eq!(true_distance_oracle(&p("a(b)"), &p("a(b)"), &c, None).unwrap(), 0.0);
    }

    #[test]
    fn oracle_matches_dp_on_metric_costs() {
        for (x, y) in [("1(2)", "3"), ("1(2,3)", "2(3)"), ("3", "1(1)")] {
            let d = true_distance_oracle(&t(x), &t(y), &c0(), None).unwrap();
            let dp = crate::ted::ted_distance(&t(x), &t(y), &c0()).unwrap();
            assert!((d - dp).abs() < 1e-12, "{x} {y}");
        }
    }

    #[test]
    fn zero_cost_chains_under_the_learned_cost() {
        let c1 = crate::reference::c1();
        for (x, y) in [("1(2)", "2"), ("1(2)", "3"), ("2", "3"), ("3", "1(2)")] {
            assert_eq!(true_distance_oracle(&t(x), &t(y), &c1, None).unwrap(), 0.0, "{x} {y}");
        }
    }

    #[test]
    fn oracle_errors() {
        let mut neg = c0();
        neg.set(0, 1, -0.1);
        assert!(matches!(
            true_distance_oracle(&t("1"), &t("2"), &neg, None),
            Err(Error::NegativeCost(_))
        ));
        assert!(matches!(
            true_distance_oracle(&t("1(2)"), &t("3"), &c0(), Some(1)),
            Err(Error::Unreachable { cap: 1 })
        ));
    }
}
