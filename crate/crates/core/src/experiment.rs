//! Cross-validated comparison of the five learning variants under both
//! distance heads.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::costs::{cost_from_embedding, CostTable, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::gesl::{select_pairs, select_prototype_pairs, GeslConfig, GeslProblem, ScriptMode, SolverConfig};
use crate::lvq::{
    knn_predict, lvq_fit, select_medoid_prototypes, DistanceHead, LvqConfig, LvqInit, LvqMode,
};
use crate::ted::{backtrace_one, ted_dp, ted_distance, ScriptSummary};
use crate::trees::{Dataset, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// GESL with one backtraced script per pair.
    G1,
    /// GESL averaged over all co-optimal scripts.
    G2,
    /// G2 with pairs anchored at class medoids.
    G3,
    /// LVQ on the cost table with pseudo-metric projection.
    L1,
    /// LVQ on a symbol embedding.
    L2,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::G1, Variant::G2, Variant::G3, Variant::L1, Variant::L2];

    /// Row index `m` in the result tables, 1 to 5.
    pub fn index(self) -> usize {
        Variant::ALL.iter().position(|&v| v == self).expect("listed") + 1
    }

    pub fn is_gesl(self) -> bool {
        matches!(self, Variant::G1 | Variant::G2 | Variant::G3)
    }

    fn script_mode(self) -> ScriptMode {
        match self {
            Variant::G1 => ScriptMode::Single,
            _ => ScriptMode::AllCooptimal,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .iter()
            .copied()
            .find(|v| v.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown variant '{s}'; expected G1, G2, G3, L1 or L2")))
    }
}

/// Every cost starts here: unit replacement, deletion and insertion costs,
/// which is also the cost induced by the unit simplex embedding.
pub fn initial_cost(d: &Dataset) -> CostTable {
    CostTable::uniform(d.alphabet.clone(), 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnSettings {
    pub beta: f64,
    pub gamma: f64,
    /// Project GESL iterates onto pseudo-metrics.
    pub gesl_metric: bool,
    pub solver: SolverConfig,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for LearnSettings {
    fn default() -> Self {
        let g = GeslConfig::default();
        let l = LvqConfig::default();
        LearnSettings {
            beta: g.beta,
            gamma: g.margin_gamma,
            gesl_metric: false,
            solver: g.solver,
            learning_rate: l.learning_rate,
            epochs: l.max_iters,
        }
    }
}

/// Per-run traces kept for inspection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LearnDiagnostics {
    /// Objective per recorded step: solver checkpoints for GESL, epochs
    /// for LVQ.
    pub loss_trace: Vec<(usize, f64)>,
    /// Running best of the objective; empty for GESL, whose trace already
    /// is one.
    pub best_trace: Vec<f64>,
    pub metric_ok_trace: Vec<bool>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct LearnedModel {
    pub variant: Variant,
    pub head: DistanceHead,
    pub cost: CostTable,
    pub embedding: Option<EmbeddingMatrix>,
    /// Cost under which pseudo edit distances freeze their scripts.
    pub reference: CostTable,
    pub diagnostics: LearnDiagnostics,
}

impl LearnedModel {
    fn summary(&self, x: &Tree, y: &Tree) -> Result<ScriptSummary> {
        let r = ted_dp(x, y, &self.reference)?;
        match self.variant.script_mode() {
            ScriptMode::Single => ScriptSummary::from_script(self.reference.alphabet(), &backtrace_one(&r)),
            ScriptMode::AllCooptimal => Ok(r.cooptimal_summary()),
        }
    }

    /// Distances from each query to each reference tree under `head`.
    pub fn distances(&self, queries: &[&Tree], refs: &[&Tree], head: DistanceHead) -> Result<DMatrix<f64>> {
        let (n, m) = (queries.len(), refs.len());
        let vals: Vec<f64> = (0..n * m)
            .into_par_iter()
            .map(|k| {
                let (x, y) = (queries[k / m], refs[k % m]);
                match head {
                    DistanceHead::Pseudo => Ok(self.summary(x, y)?.inner(&self.cost)),
                    DistanceHead::TrueTed => ted_distance(x, y, &self.cost),
                }
            })
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_row_slice(n, m, &vals))
    }

    pub fn pairwise(&self, d: &Dataset, head: DistanceHead) -> Result<DMatrix<f64>> {
        let t = d.trees();
        self.distances(&t, &t, head)
    }
}

fn pairwise_under(d: &Dataset, c: &CostTable) -> Result<DMatrix<f64>> {
    let t = d.trees();
    let n = d.len();
    let vals: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| ted_distance(t[k / n], t[k % n], c))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_row_slice(n, n, &vals))
}

/// Trains one variant starting from `reference`, except L2, which always
/// starts from the simplex embedding. GESL variants learn against pseudo
/// edit distances whatever the head, so `head` only changes LVQ training.
pub fn learn_variant(
    train: &Dataset,
    variant: Variant,
    head: DistanceHead,
    s: &LearnSettings,
    reference: &CostTable,
) -> Result<LearnedModel> {
    let reference = if variant == Variant::L2 {
        cost_from_embedding(&EmbeddingMatrix::simplex(train.alphabet.clone(), train.alphabet.len())?)
    } else {
        reference.clone()
    };
    if variant.is_gesl() {
        let dist = pairwise_under(train, &reference)?;
        let pairs = if variant == Variant::G3 {
            let protos = select_medoid_prototypes(train, &dist)?;
            select_prototype_pairs(train, &dist, &protos.all())?
        } else {
            select_pairs(train, &dist)?
        };
        let cfg = GeslConfig {
            beta: s.beta,
            margin_gamma: s.gamma,
            script_mode: variant.script_mode(),
            enforce_metric: s.gesl_metric,
            solver: s.solver.clone(),
        };
        let fit = GeslProblem::new(train, pairs, &reference, cfg)?.solve_from(&reference, 0.0)?;
        let metric_ok = crate::costs::check_pseudometric(&fit.cost).is_pseudometric();
        return Ok(LearnedModel {
            variant,
            head,
            cost: fit.cost,
            embedding: None,
            reference,
            diagnostics: LearnDiagnostics {
                loss_trace: fit.loss_trace,
                best_trace: Vec::new(),
                metric_ok_trace: vec![metric_ok],
                converged: fit.converged,
            },
        });
    }
    let cfg = LvqConfig {
        mode: if variant == Variant::L1 { LvqMode::DirectCost } else { LvqMode::Embedding },
        head,
        learning_rate: s.learning_rate,
        max_iters: s.epochs,
        enforce_metric: true,
        ..LvqConfig::default()
    };
    let fit = lvq_fit(train, &cfg, LvqInit::Cost(reference.clone()))?;
    Ok(LearnedModel {
        variant,
        head,
        cost: fit.cost,
        embedding: fit.embedding,
        reference,
        diagnostics: LearnDiagnostics {
            loss_trace: fit.loss_trace.iter().copied().enumerate().collect(),
            best_trace: fit.best_trace,
            metric_ok_trace: fit.metric_ok_trace,
            converged: fit.converged,
        },
    })
}

/// Record indices per fold. Each class is shuffled and dealt round-robin,
/// so every fold sees every class.
pub fn stratified_folds(d: &Dataset, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::Infeasible(format!("need at least 2 folds, got {folds}")));
    }
    let classes = d.classes();
    if classes.len() < 2 {
        return Err(Error::TooFewClasses(classes.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![Vec::new(); folds];
    for class in &classes {
        let mut members: Vec<usize> = (0..d.len()).filter(|&i| &d.records[i].label == class).collect();
        if members.len() < folds {
            return Err(Error::Infeasible(format!(
                "class '{class}' has {} records, fewer than {folds} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for (k, i) in members.into_iter().enumerate() {
            out[k % folds].push(i);
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub variants: Vec<Variant>,
    pub folds: usize,
    pub seed: u64,
    pub neighbours: usize,
    pub settings: LearnSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            variants: Variant::ALL.to_vec(),
            folds: 5,
            seed: 0,
            neighbours: 1,
            settings: LearnSettings::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FoldRecord {
    pub variant: Variant,
    pub head: DistanceHead,
    pub fold: usize,
    pub knn_error: f64,
    pub mrglvq_error: f64,
    pub diagnostics: LearnDiagnostics,
}

/// Test error means and sample standard deviations across folds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub m: usize,
    pub variant: Variant,
    pub knn_mean: f64,
    pub knn_std: f64,
    pub mrglvq_mean: f64,
    pub mrglvq_std: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub pseudo: Vec<ExperimentRow>,
    pub true_ted: Vec<ExperimentRow>,
    pub folds: Vec<FoldRecord>,
}

impl ExperimentResult {
    pub fn rows(&self, head: DistanceHead) -> &[ExperimentRow] {
        match head {
            DistanceHead::Pseudo => &self.pseudo,
            DistanceHead::TrueTed => &self.true_ted,
        }
    }
}

pub const CSV_HEADER: &str = "m,knn_mean,knn_std,mrglvq_mean,mrglvq_std";

pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            r.m, r.knn_mean, r.knn_std, r.mrglvq_mean, r.mrglvq_std
        ));
    }
    out
}

pub fn rows_from_csv(text: &str) -> Result<Vec<(usize, [f64; 4])>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(CSV_HEADER) {
        return Err(Error::Format(format!("expected header '{CSV_HEADER}'")));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 5 {
                return Err(Error::Format(format!("expected 5 fields in '{l}'")));
            }
            let bad = |e: &dyn fmt::Display| Error::Format(format!("bad field in '{l}': {e}"));
            let m = f[0].trim().parse().map_err(|e| bad(&e))?;
            let mut v = [0.0; 4];
            for (k, s) in f[1..].iter().enumerate() {
                v[k] = s.trim().parse().map_err(|e| bad(&e))?;
            }
            Ok((m, v))
        })
        .collect()
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn error_rate(predicted: &[String], truth: &[&str]) -> f64 {
    let wrong = predicted.iter().zip(truth).filter(|(p, t)| p != *t).count();
    wrong as f64 / truth.len() as f64
}

fn run_fold(d: &Dataset, test: &[usize], variant: Variant, head: DistanceHead, cfg: &ExperimentConfig, fold: usize) -> Result<FoldRecord> {
    let train_idx: Vec<usize> = (0..d.len()).filter(|i| !test.contains(i)).collect();
    let train = d.subset(&train_idx)?;
    let tst = d.subset(test)?;
    let model = learn_variant(&train, variant, head, &cfg.settings, &initial_cost(d))?;
    let (train_trees, test_trees) = (train.trees(), tst.trees());
    let cross = model.distances(&test_trees, &train_trees, head)?;
    let train_labels = train.labels();
    let truth = tst.labels();
    let knn = knn_predict(&cross, &train_labels, cfg.neighbours)?;

    let within = model.distances(&train_trees, &train_trees, head)?;
    let protos = select_medoid_prototypes(&train, &within)?.all();
    let to_protos = DMatrix::from_fn(cross.nrows(), protos.len(), |q, k| cross[(q, protos[k])]);
    let proto_labels: Vec<&str> = protos.iter().map(|&p| train_labels[p]).collect();
    let nearest = knn_predict(&to_protos, &proto_labels, 1)?;
    Ok(FoldRecord {
        variant,
        head,
        fold,
        knn_error: error_rate(&knn, &truth),
        mrglvq_error: error_rate(&nearest, &truth),
        diagnostics: model.diagnostics,
    })
}

/// Every variant under both heads on the same folds: k-NN against the
/// training set, and nearest class medoid of the training set.
pub fn run_experiment(d: &Dataset, cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if cfg.variants.is_empty() {
        return Err(Error::Config("no variants requested".into()));
    }
    let folds = stratified_folds(d, cfg.folds, cfg.seed)?;
    let mut jobs = Vec::new();
    for &v in &cfg.variants {
        for head in [DistanceHead::Pseudo, DistanceHead::TrueTed] {
            for f in 0..folds.len() {
                jobs.push((v, head, f));
            }
        }
    }
    let records: Vec<FoldRecord> = jobs
        .par_iter()
        .map(|&(v, head, f)| run_fold(d, &folds[f], v, head, cfg, f))
        .collect::<Result<_>>()?;
    let rows = |head: DistanceHead| {
        cfg.variants
            .iter()
            .map(|&v| {
                let rs: Vec<&FoldRecord> = records.iter().filter(|r| r.variant == v && r.head == head).collect();
                let (knn_mean, knn_std) = mean_std(&rs.iter().map(|r| r.knn_error).collect::<Vec<_>>());
                let (mrglvq_mean, mrglvq_std) = mean_std(&rs.iter().map(|r| r.mrglvq_error).collect::<Vec<_>>());
                ExperimentRow {
                    m: v.index(),
                    variant: v,
                    knn_mean,
                    knn_std,
                    mrglvq_mean,
                    mrglvq_std,
                }
            })
            .collect()
    };
    Ok(ExperimentResult {
        pseudo: rows(DistanceHead::Pseudo),
        true_ted: rows(DistanceHead::TrueTed),
        folds: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{synthetic_dataset, SyntheticConfig};

    #[test]
    fn variant_names() {
        assert_eq!("g3".parse::<Variant>().unwrap(), Variant::G3);
        assert_eq!(Variant::L2.index(), 5);
        assert!("G4".parse::<Variant>().is_err());
    }

    #[test]
    fn folds_are_stratified_and_seeded() {
        let d = synthetic_dataset(&SyntheticConfig::default(), 1).unwrap();
        let f = stratified_folds(&d, 5, 3).unwrap();
        assert_eq!(f.len(), 5);
        let mut all: Vec<usize> = f.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..40).collect::<Vec<_>>());
        for fold in &f {
            let a = fold.iter().filter(|&&i| d.records[i].label == "A").count();
            assert_eq!(a, 4);
        }
        assert_eq!(f, stratified_folds(&d, 5, 3).unwrap());
        assert!(matches!(stratified_folds(&d, 21, 0), Err(Error::Infeasible(_))));
        assert!(stratified_folds(&d, 1, 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![ExperimentRow {
            m: 2,
            variant: Variant::G2,
            knn_mean: 0.125,
            knn_std: 0.0,
            mrglvq_mean: 0.25,
            mrglvq_std: 0.1,
        }];
        let text = rows_to_csv(&rows);
        assert!(text.starts_with(CSV_HEADER));
        let back = rows_from_csv(&text).unwrap();
        assert_eq!(back, vec![(2, [0.125, 0.0, 0.25, 0.1])]);
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[0.0, 1.0]);
        assert_eq!(m, 0.5);
        assert!((s - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
