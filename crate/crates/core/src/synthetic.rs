//! Seeded two-class tree data for end-to-end runs.
//!
//! Both classes share random shapes and a common pool of noise labels;
//! they differ only in which signal label dominates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::trees::{Alphabet, Dataset, Record, Symbol, Tree};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub per_class: usize,
    pub min_size: usize,
    pub max_size: usize,
    /// Probability that a node carries its class's signal label.
    pub signal: f64,
    /// Probability that a node carries the other class's signal label.
    pub crosstalk: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            per_class: 20,
            min_size: 4,
            max_size: 8,
            signal: 0.4,
            crosstalk: 0.1,
        }
    }
}

/// Labels `a` and `b` are the class signals, `c` and `d` are noise.
pub fn synthetic_alphabet() -> Alphabet {
    Alphabet::from_names(&["a", "b", "c", "d"]).expect("valid alphabet")
}

fn random_tree(rng: &mut ChaCha8Rng, size: usize, label: &mut impl FnMut(&mut ChaCha8Rng) -> Symbol) -> Tree {
    // node k > 0 hangs below a uniformly chosen earlier node, which keeps
    // node indices in preorder-compatible creation order
    let parent: Vec<usize> = (1..size).map(|k| rng.random_range(0..k)).collect();
    let labels: Vec<Symbol> = (0..size).map(|_| label(rng)).collect();
    fn build(v: usize, parent: &[usize], labels: &[Symbol]) -> Tree {
        let children = (1..labels.len())
            .filter(|&k| parent[k - 1] == v)
            .map(|k| build(k, parent, labels))
            .collect();
        Tree::new(labels[v].clone(), children)
    }
    build(0, &parent, &labels)
}

/// Classes `A` and `B`, interleaved record by record.
pub fn synthetic_dataset(cfg: &SyntheticConfig, seed: u64) -> Result<Dataset> {
    if cfg.per_class == 0 || cfg.min_size == 0 || cfg.min_size > cfg.max_size {
        return Err(Error::Config("need per_class >= 1 and 1 <= min_size <= max_size".into()));
    }
    if !(cfg.signal >= 0.0 && cfg.crosstalk >= 0.0 && cfg.signal + cfg.crosstalk <= 1.0) {
        return Err(Error::Config("signal and crosstalk must be probabilities summing to <= 1".into()));
    }
    let alphabet = synthetic_alphabet();
    let sym = |i: usize| alphabet.symbols()[i].clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(2 * cfg.per_class);
    for _ in 0..cfg.per_class {
        for (class, own, other) in [("A", 0, 1), ("B", 1, 0)] {
            let size = rng.random_range(cfg.min_size..=cfg.max_size);
            let mut label = |rng: &mut ChaCha8Rng| {
                let u: f64 = rng.random();
                if u < cfg.signal {
                    sym(own)
                } else if u < cfg.signal + cfg.crosstalk {
                    sym(other)
                } else {
                    sym(2 + rng.random_range(0..2))
                }
            };
            records.push(Record {
                tree: random_tree(&mut rng, size, &mut label),
                label: class.to_string(),
            });
        }
    }
    Dataset::new(alphabet, records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let cfg = SyntheticConfig::default();
        let d = synthetic_dataset(&cfg, 7).unwrap();
        assert_eq!(d.len(), 40);
        assert_eq!(d.classes(), vec!["A", "B"]);
        assert!(d.records.iter().all(|r| (4..=8).contains(&r.tree.size())));
        assert_eq!(d.to_json(), synthetic_dataset(&cfg, 7).unwrap().to_json());
        assert_ne!(d.to_json(), synthetic_dataset(&cfg, 8).unwrap().to_json());
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = SyntheticConfig {
            min_size: 5,
            max_size: 3,
            ..SyntheticConfig::default()
        };
        assert!(synthetic_dataset(&bad, 0).is_err());
        let bad = SyntheticConfig {
            signal: 0.8,
            crosstalk: 0.3,
            ..SyntheticConfig::default()
        };
        assert!(synthetic_dataset(&bad, 0).is_err());
    }
}
