//! Median LVQ over edit distances: medoid prototypes, the relative-distance
//! loss, and gradient learning of a cost table or a symbol embedding.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::costs::{
    check_pseudometric, cost_from_embedding, embedding_gradient, metric_projection, CostTable,
    EmbeddingMatrix,
};
use crate::error::{Error, Result};
use crate::ted::{ted_dp, ScriptSummary};
use crate::trees::Dataset;

/// Prototype record indices, grouped by class in first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrototypeSet {
    pub classes: Vec<String>,
    pub prototypes: Vec<Vec<usize>>,
}

impl PrototypeSet {
    pub fn all(&self) -> Vec<usize> {
        self.prototypes.iter().flatten().copied().collect()
    }
}

fn class_of(d: &Dataset, classes: &[String]) -> Vec<usize> {
    d.records
        .iter()
        .map(|r| classes.iter().position(|c| c == &r.label).expect("own class"))
        .collect()
}

/// The `per_class` records of each class with the smallest summed distance
/// to their classmates, lower index first on ties.
pub fn select_medoids(d: &Dataset, dist: &DMatrix<f64>, per_class: usize) -> Result<PrototypeSet> {
    if dist.nrows() != d.len() || dist.ncols() != d.len() {
        return Err(Error::Dimension(format!(
            "distance matrix is {}x{} for {} records",
            dist.nrows(),
            dist.ncols(),
            d.len()
        )));
    }
    if per_class == 0 {
        return Err(Error::Config("need at least one prototype per class".into()));
    }
    let classes = d.classes();
    let class = class_of(d, &classes);
    let prototypes = (0..classes.len())
        .map(|k| {
            let members: Vec<usize> = (0..d.len()).filter(|&i| class[i] == k).collect();
            let mut scored: Vec<(f64, usize)> = members
                .iter()
                .map(|&i| (members.iter().map(|&j| dist[(i, j)]).sum(), i))
                .collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            scored.iter().take(per_class).map(|s| s.1).collect()
        })
        .collect();
    Ok(PrototypeSet {
        classes,
        prototypes,
    })
}

/// One medoid per class.
pub fn select_medoid_prototypes(d: &Dataset, dist: &DMatrix<f64>) -> Result<PrototypeSet> {
    select_medoids(d, dist, 1)
}

/// Closest correct and wrong prototypes of one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlvqTerm {
    pub record: usize,
    pub plus: usize,
    pub d_plus: f64,
    pub minus: usize,
    pub d_minus: f64,
    pub mu: f64,
}

impl GlvqTerm {
    /// `(d mu / d d_plus, d mu / d d_minus)`; zero when both distances are.
    pub fn slopes(&self) -> (f64, f64) {
        let s = self.d_plus + self.d_minus;
        if s == 0.0 {
            (0.0, 0.0)
        } else {
            (2.0 * self.d_minus / (s * s), -2.0 * self.d_plus / (s * s))
        }
    }
}

/// `mu = (d+ - d-) / (d+ + d-)` per scored record. A record that is itself a
/// prototype is compared with its class's other prototypes, and skipped
/// when there are none.
pub fn glvq_terms(d: &Dataset, protos: &PrototypeSet, dist: &DMatrix<f64>) -> Result<Vec<GlvqTerm>> {
    if protos.classes.len() < 2 {
        return Err(Error::TooFewClasses(protos.classes.len()));
    }
    let class = class_of(d, &protos.classes);
    let nearest = |i: usize, candidates: &mut dyn Iterator<Item = usize>| {
        let mut best: Option<usize> = None;
        for p in candidates {
            if best.is_none_or(|b| dist[(i, p)] < dist[(i, b)]) {
                best = Some(p);
            }
        }
        best
    };
    let mut terms = Vec::new();
    for i in 0..d.len() {
        let own = &protos.prototypes[class[i]];
        let Some(plus) = nearest(i, &mut own.iter().copied().filter(|&p| p != i)) else {
            continue;
        };
        let minus = nearest(
            i,
            &mut protos
                .prototypes
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != class[i])
                .flat_map(|(_, ps)| ps.iter().copied()),
        )
        .expect("another class has a prototype");
        let (dp, dm) = (dist[(i, plus)], dist[(i, minus)]);
        let mu = if dp + dm == 0.0 { 0.0 } else { (dp - dm) / (dp + dm) };
        terms.push(GlvqTerm {
            record: i,
            plus,
            d_plus: dp,
            minus,
            d_minus: dm,
            mu,
        });
    }
    Ok(terms)
}

/// Sum of `mu` over scored records.
pub fn glvq_loss(d: &Dataset, protos: &PrototypeSet, dist: &DMatrix<f64>) -> Result<f64> {
    Ok(glvq_terms(d, protos, dist)?.iter().map(|t| t.mu).sum())
}

/// Gradient of the loss with respect to cost entries, given the key
/// counts that price each record-prototype distance.
pub fn glvq_cost_gradient<'a, F>(terms: &[GlvqTerm], summary: F, dim: usize) -> DMatrix<f64>
where
    F: Fn(usize, usize) -> &'a ScriptSummary,
{
    let mut g = DMatrix::zeros(dim, dim);
    for t in terms {
        let (sp, sm) = t.slopes();
        g += summary(t.record, t.plus).counts() * sp;
        g += summary(t.record, t.minus).counts() * sm;
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LvqMode {
    /// Gradient steps on the cost table itself.
    DirectCost,
    /// Gradient steps on symbol vectors; costs are their distances.
    Embedding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceHead {
    /// Scripts frozen under the initial cost.
    Pseudo,
    /// Edit distances recomputed every epoch.
    TrueTed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LvqConfig {
    pub mode: LvqMode,
    pub head: DistanceHead,
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop once no parameter moves more than this in an epoch.
    pub tolerance: f64,
    /// Direct-cost mode only: project onto pseudo-metrics after each step.
    pub enforce_metric: bool,
    /// Embedding mode only; defaults to the alphabet size.
    pub embedding_dimension: Option<usize>,
    pub prototypes_per_class: usize,
}

impl Default for LvqConfig {
    fn default() -> Self {
        LvqConfig {
            mode: LvqMode::Embedding,
            head: DistanceHead::TrueTed,
            learning_rate: 0.05,
            max_iters: 100,
            tolerance: 1e-9,
            enforce_metric: true,
            embedding_dimension: None,
            prototypes_per_class: 1,
        }
    }
}

impl LvqConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.max_iters == 0 || self.prototypes_per_class == 0 {
            return Err(Error::Config("epochs and prototype count must be positive".into()));
        }
        if self.embedding_dimension == Some(0) {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        Ok(())
    }
}

/// Starting point of a fit.
#[derive(Debug, Clone)]
pub enum LvqInit {
    Cost(CostTable),
    Embedding(EmbeddingMatrix),
}

#[derive(Debug, Clone)]
pub struct LvqResult {
    /// Cost of the best epoch.
    pub cost: CostTable,
    /// Embedding of the best epoch, in embedding mode.
    pub embedding: Option<EmbeddingMatrix>,
    pub prototypes: PrototypeSet,
    pub loss: f64,
    /// Loss of each epoch's iterate.
    pub loss_trace: Vec<f64>,
    /// Running minimum of `loss_trace`.
    pub best_trace: Vec<f64>,
    /// Whether each epoch's cost passed the pseudo-metric audit.
    pub metric_ok_trace: Vec<bool>,
    pub epochs: usize,
    pub converged: bool,
}

fn pairwise<F>(n: usize, f: F) -> Result<DMatrix<f64>>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let vals: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| f(k / n, k % n))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_row_slice(n, n, &vals))
}

/// Key-count summaries of every ordered record pair under `c`.
fn all_summaries(d: &Dataset, c: &CostTable) -> Result<Vec<ScriptSummary>> {
    let trees = d.trees();
    let n = d.len();
    (0..n * n)
        .into_par_iter()
        .map(|k| Ok(ted_dp(trees[k / n], trees[k % n], c)?.cooptimal_summary()))
        .collect()
}

/// Gradient descent on the GLVQ loss with medoids refreshed every epoch.
/// The pseudo head needs a pseudo-metric starting cost, which fixes the
/// scripts for the whole run.
pub fn lvq_fit(d: &Dataset, cfg: &LvqConfig, init: LvqInit) -> Result<LvqResult> {
    cfg.validate()?;
    let classes = d.classes();
    if classes.len() < 2 {
        return Err(Error::TooFewClasses(classes.len()));
    }
    let n = d.len();
    let (mut cost, mut embedding) = match (cfg.mode, init) {
        (LvqMode::DirectCost, LvqInit::Cost(c)) => (c, None),
        (LvqMode::Embedding, LvqInit::Embedding(a)) => (cost_from_embedding(&a), Some(a)),
        (LvqMode::Embedding, LvqInit::Cost(_)) => {
            let dim = cfg.embedding_dimension.unwrap_or(d.alphabet.len());
            let a = EmbeddingMatrix::simplex(d.alphabet.clone(), dim)?;
            (cost_from_embedding(&a), Some(a))
        }
        (LvqMode::DirectCost, LvqInit::Embedding(_)) => {
            return Err(Error::Config("direct-cost mode starts from a cost table".into()));
        }
    };
    if cost.alphabet() != &d.alphabet {
        return Err(Error::AlphabetMismatch("initial parameters and dataset differ".into()));
    }
    let frozen = match cfg.head {
        DistanceHead::Pseudo => {
            let audit = check_pseudometric(&cost);
            if !audit.is_pseudometric() {
                return Err(Error::NotPseudoMetric(audit.summary()));
            }
            Some(all_summaries(d, &cost)?)
        }
        DistanceHead::TrueTed => None,
    };
    let trees = d.trees();
    let dim = cost.dim();

    let mut loss_trace = Vec::new();
    let mut best_trace = Vec::new();
    let mut metric_ok_trace = Vec::new();
    let mut best: Option<(f64, CostTable, Option<EmbeddingMatrix>, PrototypeSet)> = None;
    let mut converged = false;
    let mut epochs = 0;
    for _ in 0..cfg.max_iters {
        epochs += 1;
        metric_ok_trace.push(check_pseudometric(&cost).is_pseudometric());
        let dist = match &frozen {
            Some(s) => pairwise(n, |i, j| Ok(s[i * n + j].inner(&cost)))?,
            None => pairwise(n, |i, j| crate::ted::ted_distance(trees[i], trees[j], &cost))?,
        };
        let protos = select_medoids(d, &dist, cfg.prototypes_per_class)?;
        let terms = glvq_terms(d, &protos, &dist)?;
        let loss: f64 = terms.iter().map(|t| t.mu).sum();
        loss_trace.push(loss);
        if best.as_ref().is_none_or(|b| loss < b.0) {
            best = Some((loss, cost.clone(), embedding.clone(), protos.clone()));
        }
        best_trace.push(best.as_ref().expect("set above").0);

        let grad = match &frozen {
            Some(s) => glvq_cost_gradient(&terms, |i, j| &s[i * n + j], dim),
            None => {
                let needed: Vec<(usize, usize)> = terms
                    .iter()
                    .flat_map(|t| [(t.record, t.plus), (t.record, t.minus)])
                    .collect();
                let fresh: HashMap<(usize, usize), ScriptSummary> = needed
                    .par_iter()
                    .map(|&(i, j)| Ok(((i, j), ted_dp(trees[i], trees[j], &cost)?.cooptimal_summary())))
                    .collect::<Result<_>>()?;
                glvq_cost_gradient(&terms, |i, j| &fresh[&(i, j)], dim)
            }
        };
        let moved = match embedding.as_mut() {
            Some(a) => {
                let g = embedding_gradient(a, &grad) * cfg.learning_rate;
                *a.vectors_mut() -= &g;
                cost = cost_from_embedding(a);
                g.amax()
            }
            None => {
                let before = cost.clone();
                let stepped = before.entries() - &grad * cfg.learning_rate;
                let mut next = CostTable::new(cost.alphabet().clone(), stepped)?;
                next = if cfg.enforce_metric {
                    metric_projection(&next)
                } else {
                    next.entries_mut().iter_mut().for_each(|v| *v = v.max(0.0));
                    next
                };
                let moved = next.max_abs_diff(&before);
                cost = next;
                moved
            }
        };
        if moved <= cfg.tolerance {
            converged = true;
            break;
        }
    }
    let (loss, cost, embedding, prototypes) = best.expect("at least one epoch");
    Ok(LvqResult {
        cost,
        embedding,
        prototypes,
        loss,
        loss_trace,
        best_trace,
        metric_ok_trace,
        epochs,
        converged,
    })
}

fn vote(order: &[usize], labels: &[&str], k: usize) -> String {
    let top = &order[..k];
    let mut counts: Vec<(&str, usize)> = Vec::new();
    for &j in top {
        match counts.iter_mut().find(|(l, _)| *l == labels[j]) {
            Some(entry) => entry.1 += 1,
            None => counts.push((labels[j], 1)),
        }
    }
    let most = counts.iter().map(|c| c.1).max().unwrap_or(0);
    // the first neighbour whose class has the top count decides ties
    top.iter()
        .map(|&j| labels[j])
        .find(|l| counts.iter().any(|(c, n)| c == l && *n == most))
        .expect("k >= 1")
        .to_string()
}

fn ranked(row: impl Iterator<Item = (usize, f64)>) -> Vec<usize> {
    let mut r: Vec<(usize, f64)> = row.collect();
    r.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    r.into_iter().map(|x| x.0).collect()
}

/// Leave-one-out k-nearest-neighbour error rate. Neighbours are ranked by
/// distance then index; among tied vote counts the class of the nearest
/// tied neighbour wins.
pub fn knn_evaluate(d: &Dataset, dist: &DMatrix<f64>, k: usize) -> Result<f64> {
    let n = d.len();
    if k == 0 || k >= n {
        return Err(Error::Config(format!("k must satisfy 1 <= k < {n}, got {k}")));
    }
    if dist.nrows() != n || dist.ncols() != n {
        return Err(Error::Dimension(format!("distance matrix must be {n}x{n}")));
    }
    let labels = d.labels();
    let wrong = (0..n)
        .filter(|&i| {
            let order = ranked((0..n).filter(|&j| j != i).map(|j| (j, dist[(i, j)])));
            vote(&order, &labels, k) != labels[i]
        })
        .count();
    Ok(wrong as f64 / n as f64)
}

/// k-nearest-neighbour labels for query rows of `dist` (queries x
/// references).
pub fn knn_predict(dist: &DMatrix<f64>, reference_labels: &[&str], k: usize) -> Result<Vec<String>> {
    if k == 0 || k > reference_labels.len() || dist.ncols() != reference_labels.len() {
        return Err(Error::Config("k or reference set size is inconsistent".into()));
    }
    Ok((0..dist.nrows())
        .map(|q| {
            let order = ranked((0..dist.ncols()).map(|j| (j, dist[(q, j)])));
            vote(&order, reference_labels, k)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{c0, dataset};
    use crate::ted::ted_distance;
    use crate::trees::{parse_tree, Alphabet, Record};

    fn c0_dist() -> DMatrix<f64> {
        let d = dataset();
        let t = d.trees();
        DMatrix::from_fn(4, 4, |i, j| ted_distance(t[i], t[j], &c0()).unwrap())
    }

    #[test]
    fn medoids_of_the_reference_instance() {
        let p = select_medoid_prototypes(&dataset(), &c0_dist()).unwrap();
        assert_eq!(p.classes, vec!["A", "B"]);
        assert_eq!(p.prototypes, vec![vec![0], vec![2]]);
    }

    #[test]
    fn reference_glvq_loss() {
        let protos = PrototypeSet {
            classes: vec!["A".into(), "B".into()],
            prototypes: vec![vec![1], vec![2]],
        };
        let terms = glvq_terms(&dataset(), &protos, &c0_dist()).unwrap();
        let scored: Vec<usize> = terms.iter().map(|t| t.record).collect();
        assert_eq!(scored, vec![0, 3]);
        assert!((terms[0].mu + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(terms[1].mu, -1.0);
        let loss = glvq_loss(&dataset(), &protos, &c0_dist()).unwrap();
        assert!((loss + 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_balanced_terms() {
        let protos = PrototypeSet {
            classes: vec!["A".into(), "B".into()],
            prototypes: vec![vec![0, 1], vec![2, 3]],
        };
        let zero = DMatrix::zeros(4, 4);
        assert_eq!(glvq_loss(&dataset(), &protos, &zero).unwrap(), 0.0);
        let ones = DMatrix::from_element(4, 4, 1.0);
        assert_eq!(glvq_loss(&dataset(), &protos, &ones).unwrap(), 0.0);
        let mut sep = DMatrix::from_element(4, 4, 2.0);
        sep[(0, 1)] = 0.0;
        sep[(1, 0)] = 0.0;
        sep[(2, 3)] = 0.0;
        sep[(3, 2)] = 0.0;
        assert_eq!(glvq_loss(&dataset(), &protos, &sep).unwrap(), -4.0);
    }

    #[test]
    fn knn_on_the_reference_instance() {
        assert_eq!(knn_evaluate(&dataset(), &c0_dist(), 1).unwrap(), 0.0);
        assert!(knn_evaluate(&dataset(), &c0_dist(), 0).is_err());
        assert!(knn_evaluate(&dataset(), &c0_dist(), 4).is_err());
    }

    #[test]
    fn knn_with_equal_distances_follows_the_index_rule() {
        let a = Alphabet::from_names(&["a"]).unwrap();
        let rec = |l: &str| Record {
            tree: parse_tree("a", &a).unwrap(),
            label: l.into(),
        };
        // labels A B B A: the nearest by index is record 0 (or 1 for record 0)
        let d = Dataset::new(a.clone(), vec![rec("A"), rec("B"), rec("B"), rec("A")]).unwrap();
        let flat = DMatrix::from_element(4, 4, 1.0);
        // 0 -> 1 (B, wrong), 1 -> 0 (A, wrong), 2 -> 0 (A, wrong), 3 -> 0 (A, right)
        assert_eq!(knn_evaluate(&d, &flat, 1).unwrap(), 0.75);
        // k = 3 from record 0: {1, 2, 3} votes B
        assert_eq!(knn_evaluate(&d, &flat, 3).unwrap(), 1.0);
    }

    #[test]
    fn knn_prediction() {
        let dist = DMatrix::from_row_slice(2, 3, &[0.1, 0.5, 0.2, 0.9, 0.3, 0.4]);
        let p = knn_predict(&dist, &["A", "B", "B"], 1).unwrap();
        assert_eq!(p, vec!["A", "B"]);
        let p = knn_predict(&dist, &["A", "B", "B"], 2).unwrap();
        assert_eq!(p, vec!["A", "B"]);
    }

    #[test]
    fn direct_cost_iterates_are_metric() {
        let cfg = LvqConfig {
            mode: LvqMode::DirectCost,
            head: DistanceHead::TrueTed,
            max_iters: 30,
            ..LvqConfig::default()
        };
        let r = lvq_fit(&dataset(), &cfg, LvqInit::Cost(c0())).unwrap();
        assert!(r.metric_ok_trace.iter().all(|&ok| ok));
        assert!(r.best_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn embedding_fit_does_not_worsen() {
        for head in [DistanceHead::Pseudo, DistanceHead::TrueTed] {
            let cfg = LvqConfig {
                head,
                max_iters: 200,
                ..LvqConfig::default()
            };
            let r = lvq_fit(&dataset(), &cfg, LvqInit::Cost(c0())).unwrap();
            assert!(r.loss <= r.loss_trace[0]);
            assert!(r.metric_ok_trace.iter().all(|&ok| ok));
            assert!(r.embedding.is_some());
        }
    }

    #[test]
    fn mismatched_init_is_rejected() {
        let cfg = LvqConfig {
            mode: LvqMode::DirectCost,
            ..LvqConfig::default()
        };
        let a = EmbeddingMatrix::simplex(dataset().alphabet, 3).unwrap();
        assert!(lvq_fit(&dataset(), &cfg, LvqInit::Embedding(a)).is_err());
    }
}
