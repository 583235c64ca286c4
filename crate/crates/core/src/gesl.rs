//! Good edit similarity learning: hinge-loss cost learning against edit
//! scripts frozen under a reference cost.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::costs::{check_pseudometric, nearest_pseudometric, CostTable};
use crate::error::{Error, Result};
use crate::ted::{backtrace_one, ted_dp, ted_distance, true_distance_oracle, ScriptSummary};
use crate::trees::{Dataset, Tree};

/// Positive (same-class) and negative (different-class) index pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairSet {
    pub positives: Vec<(usize, usize)>,
    pub negatives: Vec<(usize, usize)>,
}

impl PairSet {
    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn class_index(d: &Dataset) -> (Vec<String>, Vec<usize>) {
    let classes = d.classes();
    let idx = d
        .records
        .iter()
        .map(|r| classes.iter().position(|c| c == &r.label).expect("own class"))
        .collect();
    (classes, idx)
}

fn check_square(d: &Dataset, dist: &DMatrix<f64>) -> Result<()> {
    if dist.nrows() != d.len() || dist.ncols() != d.len() {
        return Err(Error::Dimension(format!(
            "distance matrix is {}x{} for {} records",
            dist.nrows(),
            dist.ncols(),
            d.len()
        )));
    }
    Ok(())
}

/// For every record, its nearest same-class partner and its furthest
/// other-class record. Ties go to the smaller index.
pub fn select_pairs(d: &Dataset, dist: &DMatrix<f64>) -> Result<PairSet> {
    check_square(d, dist)?;
    let (classes, class) = class_index(d);
    if classes.len() < 2 {
        return Err(Error::TooFewClasses(classes.len()));
    }
    let mut pairs = PairSet::default();
    for i in 0..d.len() {
        let mut near: Option<usize> = None;
        let mut far: Option<usize> = None;
        for j in 0..d.len() {
            if j == i {
                continue;
            }
            if class[j] == class[i] {
                if near.is_none_or(|n| dist[(i, j)] < dist[(i, n)]) {
                    near = Some(j);
                }
            } else if far.is_none_or(|f| dist[(i, j)] > dist[(i, f)]) {
                far = Some(j);
            }
        }
        let near = near.ok_or_else(|| Error::SingletonClass(classes[class[i]].clone()))?;
        pairs.positives.push((i, near));
        pairs.negatives.push((i, far.expect("two classes exist")));
    }
    Ok(pairs)
}

/// Prototype anchoring: each record pairs with its own class prototype
/// (its nearest classmate when it is the prototype) and with the nearest
/// prototype of another class.
pub fn select_prototype_pairs(
    d: &Dataset,
    dist: &DMatrix<f64>,
    prototypes: &[usize],
) -> Result<PairSet> {
    check_square(d, dist)?;
    let (classes, class) = class_index(d);
    if classes.len() < 2 {
        return Err(Error::TooFewClasses(classes.len()));
    }
    let nearest = select_pairs(d, dist)?;
    let mut pairs = PairSet::default();
    for i in 0..d.len() {
        let own = prototypes
            .iter()
            .copied()
            .find(|&p| class[p] == class[i] && p != i)
            .unwrap_or(nearest.positives[i].1);
        pairs.positives.push((i, own));
        let mut other: Option<usize> = None;
        for &p in prototypes {
            if class[p] != class[i] && other.is_none_or(|o| dist[(i, p)] < dist[(i, o)]) {
                other = Some(p);
            }
        }
        let other = other.ok_or_else(|| Error::Config("no prototype of another class".into()))?;
        pairs.negatives.push((i, other));
    }
    Ok(pairs)
}

/// `<summary, c>`: prices the frozen scripts with a new cost.
pub fn pseudo_distance(summary: &ScriptSummary, c: &CostTable) -> f64 {
    summary.inner(c)
}

fn hinge(z: f64) -> f64 {
    z.max(0.0)
}

/// `beta |c|^2 + sum_P [d - eta]_+ + sum_N [gamma + eta - d]_+`, with the
/// squared norm over all table entries.
pub fn gesl_loss<F>(dist: F, pairs: &PairSet, c: &CostTable, eta: f64, beta: f64, gamma: f64) -> f64
where
    F: Fn(usize, usize) -> f64,
{
    let pos: f64 = pairs.positives.iter().map(|&(i, j)| hinge(dist(i, j) - eta)).sum();
    let neg: f64 = pairs
        .negatives
        .iter()
        .map(|&(i, j)| hinge(gamma + eta - dist(i, j)))
        .sum();
    beta * c.squared_norm() + pos + neg
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptMode {
    /// One backtraced script per pair.
    Single,
    /// Average over every co-optimal mapping.
    AllCooptimal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Multiplier on the inverse Lipschitz constant, in (0, 1].
    pub step_size: f64,
    pub max_iters: usize,
    /// Stop a smoothing stage once no coordinate moves more than this.
    pub tolerance: f64,
    /// Final hinge smoothing width; stages shrink it tenfold from 0.1.
    pub smoothing: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step_size: 1.0,
            max_iters: 60_000,
            tolerance: 1e-12,
            smoothing: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeslConfig {
    pub beta: f64,
    pub margin_gamma: f64,
    pub script_mode: ScriptMode,
    pub enforce_metric: bool,
    pub solver: SolverConfig,
}

impl Default for GeslConfig {
    fn default() -> Self {
        GeslConfig {
            beta: 0.1,
            margin_gamma: LN_2,
            script_mode: ScriptMode::Single,
            enforce_metric: false,
            solver: SolverConfig::default(),
        }
    }
}

impl GeslConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.solver;
        if !(self.beta > 0.0) || !(self.margin_gamma > 0.0) {
            return Err(Error::Config("beta and margin must be positive".into()));
        }
        if !(s.step_size > 0.0 && s.step_size <= 1.0) {
            return Err(Error::Config("step size must lie in (0, 1]".into()));
        }
        if !(s.tolerance > 0.0) || !(s.smoothing > 0.0) || s.max_iters == 0 {
            return Err(Error::Config(
                "tolerance, smoothing and iteration budget must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GeslResult {
    pub cost: CostTable,
    pub eta: f64,
    pub loss: f64,
    /// `(iteration, best loss so far)`, non-increasing in the loss.
    pub loss_trace: Vec<(usize, f64)>,
    pub iterations: usize,
    pub converged: bool,
}

/// Summaries frozen under the reference cost, ready for repeated solves.
#[derive(Debug, Clone)]
pub struct GeslProblem {
    pub pairs: PairSet,
    pub config: GeslConfig,
    reference: CostTable,
    positive: Vec<ScriptSummary>,
    negative: Vec<ScriptSummary>,
}

fn summarize(trees: &[&Tree], pairs: &[(usize, usize)], c0: &CostTable, mode: ScriptMode) -> Result<Vec<ScriptSummary>> {
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let r = ted_dp(trees[i], trees[j], c0)?;
            match mode {
                ScriptMode::Single => ScriptSummary::from_script(c0.alphabet(), &backtrace_one(&r)),
                ScriptMode::AllCooptimal => Ok(r.cooptimal_summary()),
            }
        })
        .collect()
}

impl GeslProblem {
    pub fn new(d: &Dataset, pairs: PairSet, c0: &CostTable, config: GeslConfig) -> Result<Self> {
        config.validate()?;
        if c0.alphabet() != &d.alphabet {
            return Err(Error::AlphabetMismatch(
                "reference cost and dataset use different alphabets".into(),
            ));
        }
        let audit = check_pseudometric(c0);
        if !audit.is_pseudometric() {
            return Err(Error::NotPseudoMetric(audit.summary()));
        }
        for &(i, j) in pairs.positives.iter().chain(&pairs.negatives) {
            if i >= d.len() || j >= d.len() {
                return Err(Error::Config(format!("pair ({i}, {j}) is out of range")));
            }
        }
        let trees = d.trees();
        let positive = summarize(&trees, &pairs.positives, c0, config.script_mode)?;
        let negative = summarize(&trees, &pairs.negatives, c0, config.script_mode)?;
        Ok(GeslProblem {
            pairs,
            config,
            reference: c0.clone(),
            positive,
            negative,
        })
    }

    pub fn reference(&self) -> &CostTable {
        &self.reference
    }

    pub fn positive_summaries(&self) -> &[ScriptSummary] {
        &self.positive
    }

    pub fn negative_summaries(&self) -> &[ScriptSummary] {
        &self.negative
    }

    /// Exact objective with pseudo edit distances.
    pub fn loss(&self, c: &CostTable, eta: f64) -> f64 {
        let cfg = &self.config;
        let pos: f64 = self.positive.iter().map(|s| hinge(s.inner(c) - eta)).sum();
        let neg: f64 = self
            .negative
            .iter()
            .map(|s| hinge(cfg.margin_gamma + eta - s.inner(c)))
            .sum();
        cfg.beta * c.squared_norm() + pos + neg
    }

    /// Accelerated projected gradient on a Huber-smoothed hinge, shrinking
    /// the smoothing width stage by stage; returns the best exact-loss
    /// iterate seen.
    pub fn solve_from(&self, c_init: &CostTable, eta_init: f64) -> Result<GeslResult> {
        if c_init.alphabet() != self.reference.alphabet() {
            return Err(Error::AlphabetMismatch("initial cost alphabet differs".into()));
        }
        let cfg = &self.config;
        let m2 = c_init.dim() * c_init.dim();
        let n = m2 + 1;
        // each term: (sign, coefficients over the cost entries)
        let terms: Vec<(f64, &[f64])> = self
            .positive
            .iter()
            .map(|s| (1.0, s.counts().as_slice()))
            .chain(self.negative.iter().map(|s| (-1.0, s.counts().as_slice())))
            .collect();
        let spread: f64 = terms
            .iter()
            .map(|(_, a)| a.iter().map(|v| v * v).sum::<f64>() + 1.0)
            .sum();

        let alphabet = c_init.alphabet().clone();
        let m = c_init.dim();
        let to_cost = |z: &[f64]| {
            CostTable::new(alphabet.clone(), DMatrix::from_column_slice(m, m, &z[..m2]))
                .expect("finite iterate")
        };
        let project = |z: &mut Vec<f64>| {
            if cfg.enforce_metric {
                let p = nearest_pseudometric(&to_cost(z));
                z[..m2].copy_from_slice(p.entries().as_slice());
            } else {
                for v in &mut z[..m2] {
                    *v = v.max(0.0);
                }
            }
            z[m2] = z[m2].clamp(0.0, cfg.margin_gamma);
        };
        let gamma = cfg.margin_gamma;
        let margin = |sign: f64, a: &[f64], z: &[f64]| {
            let d: f64 = a.iter().zip(&z[..m2]).map(|(x, y)| x * y).sum();
            if sign > 0.0 {
                d - z[m2]
            } else {
                gamma + z[m2] - d
            }
        };
        let exact = |z: &[f64]| {
            cfg.beta * z[..m2].iter().map(|v| v * v).sum::<f64>()
                + terms.iter().map(|&(s, a)| hinge(margin(s, a, z))).sum::<f64>()
        };

        let mut x: Vec<f64> = c_init.entries().as_slice().to_vec();
        x.push(eta_init);
        project(&mut x);
        let mut best = x.clone();
        let mut best_loss = exact(&x);
        let mut trace = vec![(0, best_loss)];

        let mut widths = Vec::new();
        let mut w = 0.1f64.max(cfg.solver.smoothing);
        loop {
            widths.push(w);
            if w <= cfg.solver.smoothing {
                break;
            }
            w = (w / 10.0).max(cfg.solver.smoothing);
        }
        let budget = (cfg.solver.max_iters / widths.len()).max(1);
        let mut iter = 0;
        let mut converged = false;
        let mut grad = vec![0.0; n];
        for &delta in &widths {
            let lip = 2.0 * cfg.beta + spread / delta;
            let step = cfg.solver.step_size / lip;
            let mut y = x.clone();
            let mut t = 1.0f64;
            converged = false;
            for _ in 0..budget {
                iter += 1;
                grad.iter_mut().for_each(|g| *g = 0.0);
                for (g, v) in grad.iter_mut().zip(&y[..m2]) {
                    *g = 2.0 * cfg.beta * v;
                }
                for &(s, a) in &terms {
                    let slope = (margin(s, a, &y) / delta).clamp(0.0, 1.0);
                    if slope > 0.0 {
                        for (g, v) in grad.iter_mut().zip(a) {
                            *g += s * slope * v;
                        }
                        grad[m2] -= s * slope;
                    }
                }
                let mut next: Vec<f64> = y.iter().zip(&grad).map(|(v, g)| v - step * g).collect();
                project(&mut next);
                let moved = next
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                let uphill: f64 = y
                    .iter()
                    .zip(&next)
                    .zip(&x)
                    .map(|((yv, nv), xv)| (yv - nv) * (nv - xv))
                    .sum();
                if uphill > 0.0 {
                    t = 1.0;
                    y = next.clone();
                } else {
                    let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                    let beta_m = (t - 1.0) / t_next;
                    y = next
                        .iter()
                        .zip(&x)
                        .map(|(nv, xv)| nv + beta_m * (nv - xv))
                        .collect();
                    t = t_next;
                }
                x = next;
                let l = exact(&x);
                if l < best_loss {
                    best_loss = l;
                    best.clone_from(&x);
                }
                if iter % 100 == 0 {
                    trace.push((iter, best_loss));
                }
                if moved <= cfg.solver.tolerance {
                    converged = true;
                    break;
                }
            }
        }
        if trace.last().map(|&(i, _)| i) != Some(iter) {
            trace.push((iter, best_loss));
        }
        Ok(GeslResult {
            cost: to_cost(&best),
            eta: best[m2],
            loss: best_loss,
            loss_trace: trace,
            iterations: iter,
            converged,
        })
    }
}

/// Solves from the reference cost with `eta = 0`.
pub fn gesl_fit(d: &Dataset, pairs: &PairSet, c0: &CostTable, cfg: &GeslConfig) -> Result<GeslResult> {
    let problem = GeslProblem::new(d, pairs.clone(), c0, cfg.clone())?;
    problem.solve_from(c0, 0.0)
}

/// Largest tree for which the report runs the shortest-path search when
/// the learned cost is not a pseudo-metric.
pub const SEARCH_SIZE_LIMIT: usize = 5;

/// Edit distance under `c`: the recurrence when `c` is a pseudo-metric,
/// otherwise shortest-path search over edit chains for small trees. The
/// flag is false when neither exact route applies and the recurrence value
/// is returned as an upper bound.
pub fn edit_distance(x: &Tree, y: &Tree, c: &CostTable) -> Result<(f64, bool)> {
    if check_pseudometric(c).is_pseudometric() {
        return Ok((ted_distance(x, y, c)?, true));
    }
    if !c.has_negative() && x.size().max(y.size()) <= SEARCH_SIZE_LIMIT {
        return Ok((true_distance_oracle(x, y, c, None)?, true));
    }
    Ok((ted_distance(x, y, c)?, false))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub eta: f64,
    /// Pseudo edit distances with the learned cost.
    pub pseudo: f64,
    /// Edit distances with the learned cost.
    pub edit: f64,
    /// False when some edit distance could only be bounded from above.
    pub edit_exact: bool,
    /// Recurrence values with the learned cost.
    pub recurrence: f64,
    /// Edit distances with the reference cost and its own norm.
    pub reference: f64,
}

impl LossReport {
    pub fn edit_exceeds_pseudo(&self) -> bool {
        self.edit > self.pseudo
    }

    pub fn edit_exceeds_reference(&self) -> bool {
        self.edit > self.reference
    }
}

impl std::fmt::Display for LossReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "eta                    {:.11e}", self.eta)?;
        writeln!(f, "loss(pseudo, learned)  {:.11e}", self.pseudo)?;
        writeln!(
            f,
            "loss(edit, learned)    {:.11e}{}",
            self.edit,
            if self.edit_exact { "" } else { " (upper bound)" }
        )?;
        writeln!(f, "loss(recurrence)       {:.11e}", self.recurrence)?;
        writeln!(f, "loss(edit, reference)  {:.11e}", self.reference)?;
        writeln!(f, "edit > pseudo          {}", self.edit_exceeds_pseudo())?;
        write!(f, "edit > reference       {}", self.edit_exceeds_reference())
    }
}

/// Loss of the learned cost under its pseudo edit distances, its edit
/// distances and its raw recurrence values, against the reference cost's
/// edit distances, all at the learned `eta`.
pub fn loss_comparison_report(
    d: &Dataset,
    problem: &GeslProblem,
    c_learned: &CostTable,
    eta: f64,
) -> Result<LossReport> {
    let cfg = &problem.config;
    let pairs = &problem.pairs;
    let trees = d.trees();
    let all: Vec<(usize, usize)> = pairs.positives.iter().chain(&pairs.negatives).copied().collect();
    let edit: Vec<(f64, bool)> = all
        .par_iter()
        .map(|&(i, j)| edit_distance(trees[i], trees[j], c_learned))
        .collect::<Result<_>>()?;
    let rec: Vec<f64> = all
        .par_iter()
        .map(|&(i, j)| ted_distance(trees[i], trees[j], c_learned))
        .collect::<Result<_>>()?;
    let refd: Vec<f64> = all
        .par_iter()
        .map(|&(i, j)| ted_distance(trees[i], trees[j], problem.reference()))
        .collect::<Result<_>>()?;
    let lookup = |vals: &[f64], i: usize, j: usize| {
        vals[all.iter().position(|&p| p == (i, j)).expect("pair present")]
    };
    let edit_vals: Vec<f64> = edit.iter().map(|e| e.0).collect();
    let (beta, gamma) = (cfg.beta, cfg.margin_gamma);
    Ok(LossReport {
        eta,
        pseudo: problem.loss(c_learned, eta),
        edit: gesl_loss(|i, j| lookup(&edit_vals, i, j), pairs, c_learned, eta, beta, gamma),
        edit_exact: edit.iter().all(|e| e.1),
        recurrence: gesl_loss(|i, j| lookup(&rec, i, j), pairs, c_learned, eta, beta, gamma),
        reference: gesl_loss(
            |i, j| lookup(&refd, i, j),
            pairs,
            problem.reference(),
            eta,
            beta,
            gamma,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{c0, c1, c2, dataset};
    use crate::trees::{Alphabet, Record};

    const L: f64 = LN_2;
    const BETA: f64 = 0.1;

    fn c0_dist() -> DMatrix<f64> {
        let d = dataset();
        let t = d.trees();
        DMatrix::from_fn(4, 4, |i, j| ted_distance(t[i], t[j], &c0()).unwrap())
    }

    #[test]
    fn reference_pairs() {
        let p = select_pairs(&dataset(), &c0_dist()).unwrap();
        assert_eq!(p.positives, vec![(0, 1), (1, 0), (2, 3), (3, 2)]);
        assert_eq!(p.negatives, vec![(0, 2), (1, 2), (2, 0), (3, 0)]);
    }

    #[test]
    fn pair_selection_errors_and_ties() {
        let a = Alphabet::from_names(&["a"]).unwrap();
        let rec = |l: &str| Record {
            tree: crate::trees::parse_tree("a", &a).unwrap(),
            label: l.into(),
        };
        let same = Dataset::new(a.clone(), vec![rec("A"), rec("A")]).unwrap();
        assert!(matches!(
            select_pairs(&same, &DMatrix::zeros(2, 2)),
            Err(Error::TooFewClasses(1))
        ));
        let lonely = Dataset::new(a.clone(), vec![rec("A"), rec("A"), rec("B")]).unwrap();
        assert!(matches!(
            select_pairs(&lonely, &DMatrix::zeros(3, 3)),
            Err(Error::SingletonClass(_))
        ));
        let four = Dataset::new(a.clone(), vec![rec("A"), rec("A"), rec("B"), rec("B")]).unwrap();
        let p = select_pairs(&four, &DMatrix::from_element(4, 4, 1.0)).unwrap();
        assert_eq!(p.positives, vec![(0, 1), (1, 0), (2, 3), (3, 2)]);
        assert_eq!(p.negatives, vec![(0, 2), (1, 2), (2, 0), (3, 0)]);
    }

    fn problem(mode: ScriptMode, metric: bool) -> GeslProblem {
        let cfg = GeslConfig {
            beta: BETA,
            script_mode: mode,
            enforce_metric: metric,
            ..GeslConfig::default()
        };
        let pairs = select_pairs(&dataset(), &c0_dist()).unwrap();
        GeslProblem::new(&dataset(), pairs, &c0(), cfg).unwrap()
    }

    #[test]
    fn pseudo_distances_of_the_reference_instance() {
        let single = problem(ScriptMode::Single, false);
        // (x1, x3) prices c(1,3) + c(2,-)
        let s = &single.negative_summaries()[0];
        assert_eq!(s.get_named("1", "3"), Some(1.0));
        assert_eq!(s.get_named("2", "-"), Some(1.0));
        assert_eq!(s.counts().sum(), 2.0);
        let all = problem(ScriptMode::AllCooptimal, false);
        let s = &all.negative_summaries()[0];
        for (u, v) in [("1", "3"), ("2", "-"), ("1", "-"), ("2", "3")] {
            assert_eq!(s.get_named(u, v), Some(0.5));
        }
        assert_eq!(pseudo_distance(s, &CostTable::zeros(c0().alphabet().clone())), 0.0);
    }

    #[test]
    fn closed_form_losses() {
        let single = problem(ScriptMode::Single, false);
        let l0 = gesl_loss(|i, j| c0_dist()[(i, j)], &single.pairs, &c0(), 0.0, BETA, L);
        assert!((l0 - (12.0 * BETA * L * L + 2.0 * L)).abs() < 1e-12);
        assert!((single.loss(&c1(), 0.0) - 2.0 * BETA * L * L).abs() < 1e-12);
        let all = problem(ScriptMode::AllCooptimal, true);
        assert!((all.loss(&c2(), 0.0) - 3.5 * BETA * L * L).abs() < 1e-12);
    }

    #[test]
    fn single_script_fit_recovers_the_closed_form_optimum() {
        let p = problem(ScriptMode::Single, false);
        let r = p.solve_from(&c0(), 0.0).unwrap();
        assert!(r.cost.max_abs_diff(&c1()) < 5e-3, "{}", r.cost);
        assert!(r.eta.abs() < 5e-3);
        assert!((r.loss - 2.0 * BETA * L * L).abs() < 1e-4);
        assert!(r.loss_trace.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn empty_pairs_shrink_to_zero() {
        let cfg = GeslConfig::default();
        let p = GeslProblem::new(&dataset(), PairSet::default(), &c0(), cfg).unwrap();
        let r = p.solve_from(&c0(), 0.3).unwrap();
        assert!(r.cost.entries().amax() < 1e-6);
        assert!(r.loss < 1e-10);
    }

    #[test]
    fn metric_constrained_iterates_stay_metric() {
        let p = problem(ScriptMode::AllCooptimal, true);
        let r = p.solve_from(&c0(), 0.0).unwrap();
        assert!(check_pseudometric(&r.cost).is_pseudometric());
        assert!(r.eta >= 0.0 && r.eta <= L);
    }

    #[test]
    fn non_metric_reference_is_rejected() {
        let pairs = select_pairs(&dataset(), &c0_dist()).unwrap();
        assert!(matches!(
            GeslProblem::new(&dataset(), pairs, &c1(), GeslConfig::default()),
            Err(Error::NotPseudoMetric(_))
        ));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let bad = GeslConfig {
            beta: 0.0,
            ..GeslConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn report_on_the_learned_cost() {
        let p = problem(ScriptMode::Single, false);
        let rep = loss_comparison_report(&dataset(), &p, &c1(), 0.0).unwrap();
        assert!((rep.pseudo - 2.0 * BETA * L * L).abs() < 1e-12);
        assert!((rep.edit - (2.0 * BETA * L * L + 4.0 * L)).abs() < 1e-12);
        assert!(rep.edit_exact);
        assert!((rep.reference - (12.0 * BETA * L * L + 2.0 * L)).abs() < 1e-12);
        assert!(rep.edit_exceeds_pseudo() && rep.edit_exceeds_reference());
        let same = loss_comparison_report(&dataset(), &p, &c0(), 0.0).unwrap();
        assert!((same.pseudo - same.reference).abs() < 1e-12);
    }
}
