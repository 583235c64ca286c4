use std::fmt;

use super::PreorderIndex;
use crate::costs::CostTable;
use crate::error::{Error, Result};
use crate::trees::{Symbol, Tree};

/// A single-node edit on a forest. Positions are preorder indices into the
/// forest as it stands when the edit is applied (roots concatenated left to
/// right).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Edit {
    Replace { pos: usize, from: Symbol, to: Symbol },
    /// Removes the node; its children take its place in the parent.
    Delete { pos: usize, label: Symbol },
    /// Creates a node under `parent` (a top-level root when `None`) at child
    /// slot `index`, adopting the `adopt` siblings that start at that slot.
    Insert {
        parent: Option<usize>,
        index: usize,
        adopt: usize,
        label: Symbol,
    },
}

impl Edit {
    /// Cost key: `(u, v)`, `(u, gap)` or `(gap, v)`.
    pub fn key(&self) -> (Option<&Symbol>, Option<&Symbol>) {
        match self {
            Edit::Replace { from, to, .. } => (Some(from), Some(to)),
            Edit::Delete { label, .. } => (Some(label), None),
            Edit::Insert { label, .. } => (None, Some(label)),
        }
    }

    pub fn cost(&self, c: &CostTable) -> Result<f64> {
        let (u, v) = self.key();
        c.key_cost(u, v)
    }

    /// Applies the edit in place.
    pub fn apply(&self, forest: &mut Vec<Tree>) -> Result<()> {
        match self {
            Edit::Replace { pos, from, to } => {
                let (list, idx) = locate(forest, *pos).ok_or_else(|| out_of_range(*pos))?;
                let node = &mut list[idx];
                if &node.label != from {
                    return Err(Error::InvalidScript(format!(
                        "replace at {pos} expects '{from}', found '{}'",
                        node.label
                    )));
                }
                node.label = to.clone();
            }
            Edit::Delete { pos, label } => {
                let (list, idx) = locate(forest, *pos).ok_or_else(|| out_of_range(*pos))?;
                if &list[idx].label != label {
                    return Err(Error::InvalidScript(format!(
                        "delete at {pos} expects '{label}', found '{}'",
                        list[idx].label
                    )));
                }
                let node = list.remove(idx);
                for (k, child) in node.children.into_iter().enumerate() {
                    list.insert(idx + k, child);
                }
            }
            Edit::Insert {
                parent,
                index,
                adopt,
                label,
            } => {
                let list = match parent {
                    None => forest,
                    Some(p) => {
                        let (list, idx) = locate(forest, *p).ok_or_else(|| out_of_range(*p))?;
                        &mut list[idx].children
                    }
                };
                if index + adopt > list.len() {
                    return Err(Error::InvalidScript(format!(
                        "insert slot {index}+{adopt} exceeds {} children",
                        list.len()
                    )));
                }
                let adopted: Vec<Tree> = list.drain(*index..index + adopt).collect();
                list.insert(*index, Tree::new(label.clone(), adopted));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (u, v) = self.key();
        let show = |s: Option<&Symbol>| s.map_or("-".to_string(), |s| s.to_string());
        write!(f, "({}, {})", show(u), show(v))
    }
}

fn out_of_range(pos: usize) -> Error {
    Error::InvalidScript(format!("position {pos} is outside the forest"))
}

/// The sibling list holding the node at preorder position `pos`, and its
/// index in that list.
fn locate(list: &mut Vec<Tree>, mut pos: usize) -> Option<(&mut Vec<Tree>, usize)> {
    let mut found = None;
    for (i, t) in list.iter().enumerate() {
        let s = t.size();
        if pos < s {
            found = Some(i);
            break;
        }
        pos -= s;
    }
    let i = found?;
    if pos == 0 {
        return Some((list, i));
    }
    locate(&mut list[i].children, pos - 1)
}

pub fn forest_size(forest: &[Tree]) -> usize {
    forest.iter().map(Tree::size).sum()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EditScript {
    pub edits: Vec<Edit>,
}

impl EditScript {
    pub fn new(edits: Vec<Edit>) -> Self {
        EditScript { edits }
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    pub fn apply(&self, tree: &Tree) -> Result<Vec<Tree>> {
        let mut forest = vec![tree.clone()];
        for e in &self.edits {
            e.apply(&mut forest)?;
        }
        Ok(forest)
    }

    /// Checks that applying the script to `x` yields exactly `y`.
    pub fn validate(&self, x: &Tree, y: &Tree) -> Result<()> {
        let out = self.apply(x)?;
        if out.len() == 1 && &out[0] == y {
            Ok(())
        } else {
            let shown: Vec<String> = out.iter().map(Tree::to_string).collect();
            Err(Error::InvalidScript(format!(
                "script yields [{}], expected {y}",
                shown.join(", ")
            )))
        }
    }

    /// Script realizing a tree mapping given as `(x preorder, y preorder)`
    /// pairs: replacements first, then deletions right to left, then
    /// insertions in target preorder. The mapping must be one-to-one and
    /// preserve ancestry and sibling order.
    pub fn from_mapping(x: &Tree, y: &Tree, mapping: &[(usize, usize)]) -> EditScript {
        let xi = PreorderIndex::new(x);
        let yi = PreorderIndex::new(y);
        let mut pairs = mapping.to_vec();
        pairs.sort_unstable();
        let mut x_mapped = vec![false; xi.len()];
        let mut present = vec![false; yi.len()];
        let mut edits = Vec::new();
        for &(v, w) in &pairs {
            x_mapped[v] = true;
            present[w] = true;
            edits.push(Edit::Replace {
                pos: v,
                from: xi.labels[v].clone(),
                to: yi.labels[w].clone(),
            });
        }
        for v in (0..xi.len()).rev().filter(|&v| !x_mapped[v]) {
            edits.push(Edit::Delete {
                pos: v,
                label: xi.labels[v].clone(),
            });
        }
        for w in 0..yi.len() {
            if present[w] {
                continue;
            }
            // ancestors of w precede it in preorder, so they are all present
            let parent = yi.parent[w];
            let pos = parent.map(|p| present[..p].iter().filter(|&&b| b).count());
            let present_parent = |u: usize| -> Option<usize> {
                let mut a = yi.parent[u];
                while let Some(p) = a {
                    if present[p] {
                        return Some(p);
                    }
                    a = yi.parent[p];
                }
                None
            };
            let siblings: Vec<usize> = (0..yi.len())
                .filter(|&u| present[u] && present_parent(u) == parent)
                .collect();
            let index = siblings.iter().filter(|&&u| u < w).count();
            let end = w + yi.size[w];
            let adopt = siblings.iter().filter(|&&u| u > w && u < end).count();
            edits.push(Edit::Insert {
                parent: pos,
                index,
                adopt,
                label: yi.labels[w].clone(),
            });
            present[w] = true;
        }
        EditScript { edits }
    }
}

impl fmt::Display for EditScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edits.iter().map(Edit::to_string).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Sum of edit costs. Negative entries are summed as they are.
pub fn script_cost(script: &EditScript, c: &CostTable) -> Result<f64> {
    script.edits.iter().map(|e| e.cost(c)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{parse_tree_unchecked as t, Symbol};

    fn s(name: &str) -> Symbol {
        Symbol::new(name).unwrap()
    }

    #[test]
    fn delete_splices_children() {
        let mut f = vec![t("a(b(c,d),e)").unwrap()];
        Edit::Delete { pos: 1, label: s("b") }.apply(&mut f).unwrap();
        assert_eq!(f, vec![t("a(c,d,e)").unwrap()]);
        Edit::Delete { pos: 0, label: s("a") }.apply(&mut f).unwrap();
        assert_eq!(f.len(), 3);
    }

    #[test]
    fn insert_adopts_siblings() {
        let mut f = vec![t("a(c,d,e)").unwrap()];
        Edit::Insert {
            parent: Some(0),
            index: 0,
            adopt: 2,
            label: s("b"),
        }
        .apply(&mut f)
        .unwrap();
        assert_eq!(f, vec![t("a(b(c,d),e)").unwrap()]);
        let mut g = vec![t("c").unwrap(), t("d").unwrap()];
        Edit::Insert {
            parent: None,
            index: 0,
            adopt: 2,
            label: s("r"),
        }
        .apply(&mut g)
        .unwrap();
        assert_eq!(g, vec![t("r(c,d)").unwrap()]);
    }

    #[test]
    fn wrong_label_or_position_is_rejected() {
        let mut f = vec![t("a(b)").unwrap()];
        assert!(Edit::Delete { pos: 1, label: s("a") }.apply(&mut f).is_err());
        assert!(Edit::Delete { pos: 2, label: s("b") }.apply(&mut f).is_err());
        assert!(Edit::Insert {
            parent: Some(1),
            index: 0,
            adopt: 1,
            label: s("x"),
        }
        .apply(&mut f)
        .is_err());
    }

    #[test]
    fn mapping_scripts_are_valid() {
        let x = t("a(b(c,d),e)").unwrap();
        let y = t("f(c,g(d,e))").unwrap();
        // a->f, c->c, d->d, e->e
        let script = EditScript::from_mapping(&x, &y, &[(0, 0), (2, 1), (3, 3), (4, 4)]);
        script.validate(&x, &y).unwrap();
        let empty = EditScript::from_mapping(&x, &y, &[]);
        empty.validate(&x, &y).unwrap();
        assert_eq!(empty.len(), x.size() + y.size());
    }

    #[test]
    fn script_cost_sums_keys() {
        let a = crate::trees::Alphabet::from_names(&["a", "b"]).unwrap();
        let c = CostTable::from_entries(a, &[("a", "b", -0.1), ("b", "a", -0.1)]).unwrap();
        let script = EditScript::new(vec![
            Edit::Replace { pos: 0, from: s("a"), to: s("b") },
            Edit::Replace { pos: 0, from: s("b"), to: s("a") },
        ]);
        assert!((script_cost(&script, &c).unwrap() + 0.2).abs() < 1e-15);
        assert_eq!(script_cost(&EditScript::default(), &c).unwrap(), 0.0);
    }
}
