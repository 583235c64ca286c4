//! Zhang-Shasha tree edit distance, single-script backtracing, co-optimal
//! mapping summaries, and two brute-force oracles.

mod cooptimal;
mod dp;
mod oracle;
mod script;

pub use cooptimal::{count_cooptimal, summarize_cooptimal, ScriptSummary};
pub use dp::{backtrace_mapping, backtrace_one, ted_distance, ted_dp, DistanceResult};
pub use oracle::{
    enumerate_mappings_oracle, enumerate_optimal_mappings, true_distance_oracle,
    ENUMERATION_LIMIT,
};
pub use script::{forest_size, script_cost, Edit, EditScript};

use crate::error::{Error, Result};
use crate::trees::{Alphabet, Symbol, Tree};

/// Relative tolerance under which two accumulated costs count as equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub(crate) fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * 1f64.max(a.abs()).max(b.abs())
}

/// Preorder arrays of a tree.
pub(crate) struct PreorderIndex {
    pub labels: Vec<Symbol>,
    pub parent: Vec<Option<usize>>,
    pub size: Vec<usize>,
}

impl PreorderIndex {
    pub fn new(tree: &Tree) -> Self {
        let mut idx = PreorderIndex {
            labels: Vec::new(),
            parent: Vec::new(),
            size: Vec::new(),
        };
        idx.visit(tree, None);
        idx
    }

    fn visit(&mut self, t: &Tree, parent: Option<usize>) {
        let me = self.labels.len();
        self.labels.push(t.label.clone());
        self.parent.push(parent);
        self.size.push(0);
        for c in &t.children {
            self.visit(c, Some(me));
        }
        self.size[me] = self.labels.len() - me;
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_ancestor(&self, a: usize, d: usize) -> bool {
        a < d && d < a + self.size[a]
    }
}

/// Postorder arrays used by the keyroot recurrences. Node ids are postorder
/// positions; `lld[v]` is the leftmost leaf descendant of `v`.
#[derive(Debug, Clone)]
pub(crate) struct IndexedTree {
    pub labels: Vec<usize>,
    pub lld: Vec<usize>,
    /// Ascending; the root is last.
    pub keyroots: Vec<usize>,
    /// Position in `keyroots` of the keyroot sharing `lld[v]`.
    pub keyroot_of: Vec<usize>,
    pub preorder: Vec<usize>,
}

impl IndexedTree {
    pub fn new(tree: &Tree, alphabet: &Alphabet) -> Result<Self> {
        let n = tree.size();
        let mut it = IndexedTree {
            labels: Vec::with_capacity(n),
            lld: Vec::with_capacity(n),
            keyroots: Vec::new(),
            keyroot_of: vec![0; n],
            preorder: Vec::with_capacity(n),
        };
        let mut pre = 0;
        it.visit(tree, alphabet, &mut pre)?;
        let mut owner = vec![None; n];
        for v in (0..n).rev() {
            if owner[it.lld[v]].is_none() {
                owner[it.lld[v]] = Some(v);
            }
        }
        it.keyroots = owner.iter().flatten().copied().collect();
        it.keyroots.sort_unstable();
        for (k, &r) in it.keyroots.iter().enumerate() {
            owner[it.lld[r]] = Some(k);
        }
        for v in 0..n {
            it.keyroot_of[v] = owner[it.lld[v]].expect("every lld has a keyroot");
        }
        Ok(it)
    }

    fn visit(&mut self, t: &Tree, alphabet: &Alphabet, pre: &mut usize) -> Result<usize> {
        let my_pre = *pre;
        *pre += 1;
        let mut first_leaf = None;
        for c in &t.children {
            let l = self.visit(c, alphabet, pre)?;
            first_leaf.get_or_insert(l);
        }
        let label = alphabet
            .index_of(&t.label)
            .ok_or_else(|| Error::UnknownSymbol(t.label.to_string()))?;
        let me = self.labels.len();
        self.labels.push(label);
        self.lld.push(first_leaf.unwrap_or(me));
        self.preorder.push(my_pre);
        Ok(self.lld[me])
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::parse_tree;

    #[test]
    fn postorder_arrays() {
        let a = Alphabet::from_names(&["a", "b", "c", "d", "e"]).unwrap();
        // postorder: c d b e a
        let t = parse_tree("a(b(c,d),e)", &a).unwrap();
        let it = IndexedTree::new(&t, &a).unwrap();
        assert_eq!(it.labels, vec![2, 3, 1, 4, 0]);
        assert_eq!(it.lld, vec![0, 1, 0, 3, 0]);
        assert_eq!(it.keyroots, vec![1, 3, 4]);
        assert_eq!(it.keyroot_of, vec![2, 0, 2, 1, 2]);
        assert_eq!(it.preorder, vec![2, 3, 1, 4, 0]);
    }

    #[test]
    fn preorder_arrays() {
        let t = crate::trees::parse_tree_unchecked("a(b(c,d),e)").unwrap();
        let p = PreorderIndex::new(&t);
        assert_eq!(p.parent, vec![None, Some(0), Some(1), Some(1), Some(0)]);
        assert_eq!(p.size, vec![5, 3, 1, 1, 1]);
        assert!(p.is_ancestor(0, 3));
        assert!(!p.is_ancestor(1, 4));
    }

    #[test]
    fn tie_is_relative() {
        assert!(tied(1e6, 1e6 + 1e-7));
        assert!(!tied(1.0, 1.0 + 1e-9));
        assert!(tied(0.0, 1e-13));
    }
}
