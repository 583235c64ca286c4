//! Executable counterexamples and worked instances. Each demo recomputes
//! its numbers from scratch and reports every assertion it checked.

use std::f64::consts::LN_2;
use std::fmt;

use crate::costs::{check_pseudometric, CostTable};
use crate::error::{Error, Result};
use crate::gesl::{
    edit_distance, gesl_fit, loss_comparison_report, select_pairs, GeslConfig, GeslProblem,
    ScriptMode,
};
use crate::reference;
use crate::ted::{backtrace_one, script_cost, ted_distance, ted_dp, true_distance_oracle, Edit, EditScript};
use crate::trees::{parse_tree, Alphabet, Tree};

/// Absolute tolerance for values that follow from exact arithmetic.
pub const EXACT_TOLERANCE: f64 = 1e-12;
/// Entrywise tolerance when comparing a fitted cost with a reference one.
pub const COST_TOLERANCE: f64 = 5e-3;
/// Tolerance on reference loss values.
pub const LOSS_TOLERANCE: f64 = 1e-3;
/// Longest degenerate script the negativity demo will materialize.
pub const MAX_CYCLES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub statement: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoReport {
    pub name: String,
    pub inputs: Vec<(String, String)>,
    pub quantities: Vec<(String, f64)>,
    pub assertions: Vec<Assertion>,
    /// True iff every assertion holds.
    pub pass: bool,
}

impl DemoReport {
    fn new(name: &str) -> Self {
        DemoReport {
            name: name.to_string(),
            inputs: Vec::new(),
            quantities: Vec::new(),
            assertions: Vec::new(),
            pass: true,
        }
    }

    fn input(&mut self, key: &str, value: impl fmt::Display) {
        self.inputs.push((key.to_string(), value.to_string()));
    }

    fn value(&mut self, key: &str, v: f64) -> f64 {
        self.quantities.push((key.to_string(), v));
        v
    }

    fn check(&mut self, statement: impl Into<String>, holds: bool) -> bool {
        self.assertions.push(Assertion {
            statement: statement.into(),
            holds,
        });
        self.pass &= holds;
        holds
    }

    fn close(&mut self, statement: &str, got: f64, want: f64, tol: f64) -> bool {
        self.check(
            format!("{statement}: |{got:.11e} - {want:.11e}| <= {tol:e}"),
            (got - want).abs() <= tol,
        )
    }

    /// Value recorded under `key`, if any.
    pub fn quantity(&self, key: &str) -> Option<f64> {
        self.quantities.iter().find(|(k, _)| k == key).map(|q| q.1)
    }
}

impl fmt::Display for DemoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "demo {}: {}", self.name, if self.pass { "PASS" } else { "FAIL" })?;
        for (k, v) in &self.inputs {
            for (i, line) in v.lines().enumerate() {
                if i == 0 {
                    writeln!(f, "  input {k}: {line}")?;
                } else {
                    writeln!(f, "    {line}")?;
                }
            }
        }
        for (k, v) in &self.quantities {
            writeln!(f, "  value {k} = {v:.11e}")?;
        }
        for a in &self.assertions {
            writeln!(f, "  [{}] {}", if a.holds { "ok" } else { "FAILED" }, a.statement)?;
        }
        Ok(())
    }
}

fn tree(text: &str, a: &Alphabet) -> Tree {
    parse_tree(text, a).expect("demo trees are well formed")
}

fn with_indels(a: &Alphabet, entries: &[(&str, &str, f64)], indel: f64) -> CostTable {
    let mut c = CostTable::from_entries(a.clone(), entries).expect("demo entries are valid");
    let gap = a.gap();
    for i in 0..a.len() {
        c.set(i, gap, indel);
        c.set(gap, i, indel);
    }
    c
}

/// Costs over `{a, b, c}` where replacing `a` by `b` directly costs more
/// than going through `c`.
pub fn detour_cost() -> CostTable {
    let a = Alphabet::from_names(&["a", "b", "c"]).expect("valid alphabet");
    with_indels(
        &a,
        &[
            ("a", "b", 1.0),
            ("b", "a", 1.0),
            ("a", "c", 0.3),
            ("c", "a", 0.3),
            ("b", "c", 0.3),
            ("c", "b", 0.3),
        ],
        1.0,
    )
}

/// The recurrence only compares a direct replacement with delete plus
/// insert, so under a triangle-violating cost it misses cheaper edit chains.
pub fn dp_overestimation_demo() -> Result<DemoReport> {
    let mut r = DemoReport::new("dp_overestimation");
    let c = detour_cost();
    let a = c.alphabet().clone();
    r.input("cost", c.to_text());
    let audit = check_pseudometric(&c);
    r.check("cost violates the triangle inequality", !audit.triangle_inequality);
    r.check(
        "cost is otherwise a pseudo-metric",
        audit.non_negativity && audit.self_identity && audit.symmetry,
    );
    let mut control = c.clone();
    control.set_named("a", "b", 0.6)?;
    control.set_named("b", "a", 0.6)?;
    r.check("control cost is a pseudo-metric", check_pseudometric(&control).is_pseudometric());

    for (tag, x, y) in [("single", "a", "b"), ("subtree", "a(c)", "b(c)")] {
        let (x, y) = (tree(x, &a), tree(y, &a));
        let dp = r.value(&format!("{tag}.dp"), ted_distance(&x, &y, &c)?);
        let oracle = r.value(&format!("{tag}.oracle"), true_distance_oracle(&x, &y, &c, None)?);
        let direct = c.get_named("a", "b")?;
        let via_gap = c.get_named("a", "-")? + c.get_named("-", "b")?;
        r.close(&format!("{tag}: dp = min(c(a,b), c(a,-) + c(-,b))"), dp, direct.min(via_gap), EXACT_TOLERANCE);
        r.close(&format!("{tag}: dp = 1.0"), dp, 1.0, EXACT_TOLERANCE);
        r.close(&format!("{tag}: shortest edit chain = 0.6"), oracle, 0.6, EXACT_TOLERANCE);
        r.value(&format!("{tag}.gap"), dp - oracle);
        r.check(format!("{tag}: dp overestimates ({dp} > {oracle})"), dp > oracle + EXACT_TOLERANCE);
        let dp_ctl = r.value(&format!("{tag}.control_dp"), ted_distance(&x, &y, &control)?);
        let or_ctl = r.value(
            &format!("{tag}.control_oracle"),
            true_distance_oracle(&x, &y, &control, None)?,
        );
        r.close(&format!("{tag}: control dp = control oracle"), dp_ctl, or_ctl, EXACT_TOLERANCE);
    }
    Ok(r)
}

/// Cost over `{x, y}` with a symmetric negative replacement pair and cheap
/// insertions and deletions.
pub fn negative_cycle_cost() -> CostTable {
    let a = Alphabet::from_names(&["x", "y"]).expect("valid alphabet");
    with_indels(&a, &[("x", "y", -0.1), ("y", "x", -0.1)], 0.05)
}

/// Most negative replacement cycle `(u, v)` with its per-cycle cost; `u ==
/// v` is a one-edit cycle.
fn cheapest_cycle(c: &CostTable) -> Option<(usize, usize, f64)> {
    let n = c.alphabet().len();
    let mut best: Option<(usize, usize, f64)> = None;
    for u in 0..n {
        for v in u..n {
            let cost = if u == v { c.get(u, u) } else { c.get(u, v) + c.get(v, u) };
            if cost < 0.0 && best.is_none_or(|b| cost < b.2) {
                best = Some((u, v, cost));
            }
        }
    }
    best
}

/// Negativity demo on the fixed instance `x -> x` under
/// [`negative_cycle_cost`].
pub fn negativity_degeneracy_demo(bound: f64) -> Result<DemoReport> {
    let c = negative_cycle_cost();
    let x = tree("x", c.alphabet());
    negativity_degeneracy_with(&c, &x, &x, bound)
}

/// Builds a valid script from `x` to `y` costing less than `bound`: an
/// optimal script, followed when needed by a fresh root that runs `k`
/// negative replacement cycles before being deleted again.
pub fn negativity_degeneracy_with(c: &CostTable, x: &Tree, y: &Tree, bound: f64) -> Result<DemoReport> {
    let (u, v, cycle) = cheapest_cycle(c).ok_or_else(|| {
        Error::Infeasible("no negative replacement cycle; edit costs cannot be driven down".into())
    })?;
    let mut r = DemoReport::new("negativity_degeneracy");
    r.input("cost", c.to_text());
    r.input("source", x);
    r.input("target", y);
    r.input("bound", bound);
    let base = backtrace_one(&ted_dp(x, y, c)?);
    let base_cost = r.value("base_cost", script_cost(&base, c)?);
    r.value("cycle_cost", cycle);
    let a = c.alphabet();
    let (su, sv) = (a.symbols()[u].clone(), a.symbols()[v].clone());
    let detour = c.get(a.gap(), u) + c.get(u, a.gap());
    let cycles = if base_cost < bound {
        0
    } else {
        // smallest k with base + detour + k * cycle < bound
        let mut k = ((base_cost + detour - bound) / -cycle).floor().max(0.0) as usize;
        while base_cost + detour + k as f64 * cycle >= bound {
            k += 1;
        }
        k
    };
    if cycles > MAX_CYCLES {
        return Err(Error::Config(format!(
            "bound {bound} needs {cycles} cycles, above the limit of {MAX_CYCLES}"
        )));
    }
    r.value("cycles", cycles as f64);
    let mut edits = base.edits.clone();
    if base_cost >= bound {
        let pos = y.size();
        edits.push(Edit::Insert {
            parent: None,
            index: 1,
            adopt: 0,
            label: su.clone(),
        });
        for _ in 0..cycles {
            if u == v {
                edits.push(Edit::Replace { pos, from: su.clone(), to: su.clone() });
            } else {
                edits.push(Edit::Replace { pos, from: su.clone(), to: sv.clone() });
                edits.push(Edit::Replace { pos, from: sv.clone(), to: su.clone() });
            }
        }
        edits.push(Edit::Delete { pos, label: su });
    }
    let script = EditScript::new(edits);
    let total = r.value("script_cost", script_cost(&script, c)?);
    r.value("script_length", script.len() as f64);
    r.check("script transforms source into target", script.validate(x, y).is_ok());
    r.check(format!("script cost {total:.11e} < bound {bound:e}"), total < bound);
    Ok(r)
}

/// A triangle-respecting cost with `c(x, x) = 0.2` makes a tree's distance to
/// itself positive.
pub fn self_identity_demo() -> Result<DemoReport> {
    let mut r = DemoReport::new("self_identity");
    let a = Alphabet::from_names(&["x"]).expect("valid alphabet");
    let c = with_indels(&a, &[("x", "x", 0.2)], 1.0);
    let control = with_indels(&a, &[], 1.0);
    r.input("cost", c.to_text());
    let audit = check_pseudometric(&c);
    r.check("cost satisfies the triangle inequality", audit.triangle_inequality);
    r.check("cost violates self-identity", !audit.self_identity);
    for (tag, t, want) in [("single", "x", 0.2), ("pair", "x(x)", 0.4)] {
        let t = tree(t, &a);
        let d = r.value(&format!("{tag}.distance"), ted_distance(&t, &t, &c)?);
        r.close(&format!("{tag}: d(t, t) = {want}"), d, want, EXACT_TOLERANCE);
        r.check(format!("{tag}: d(t, t) > 0"), d > 0.0);
        let d0 = r.value(&format!("{tag}.control"), ted_distance(&t, &t, &control)?);
        r.close(&format!("{tag}: control d(t, t) = 0"), d0, 0.0, EXACT_TOLERANCE);
    }
    Ok(r)
}

fn asymmetric_cost(forward: f64, backward: f64) -> CostTable {
    let a = Alphabet::from_names(&["x", "y", "z"]).expect("valid alphabet");
    with_indels(
        &a,
        &[
            ("x", "y", forward),
            ("y", "x", backward),
            ("x", "z", 1.0),
            ("z", "x", 1.0),
            ("y", "z", 1.0),
            ("z", "y", 1.0),
        ],
        1.0,
    )
}

/// A triangle-respecting cost with `c(x, y) = 0.3 < 0.7 = c(y, x)` yields an
/// asymmetric distance.
pub fn symmetry_demo() -> Result<DemoReport> {
    let mut r = DemoReport::new("symmetry");
    let c = asymmetric_cost(0.3, 0.7);
    let control = asymmetric_cost(0.3, 0.3);
    let a = c.alphabet().clone();
    r.input("cost", c.to_text());
    let audit = check_pseudometric(&c);
    r.check("cost satisfies the triangle inequality", audit.triangle_inequality);
    r.check("cost violates symmetry", !audit.symmetry);
    for (tag, x, y) in [("single", "x", "y"), ("subtree", "x(z)", "y(z)")] {
        let (x, y) = (tree(x, &a), tree(y, &a));
        let fwd = r.value(&format!("{tag}.forward"), ted_distance(&x, &y, &c)?);
        let bwd = r.value(&format!("{tag}.backward"), ted_distance(&y, &x, &c)?);
        r.close(&format!("{tag}: forward = 0.3"), fwd, 0.3, EXACT_TOLERANCE);
        r.close(&format!("{tag}: backward = 0.7"), bwd, 0.7, EXACT_TOLERANCE);
        r.check(format!("{tag}: forward < backward"), fwd < bwd);
        let f0 = ted_distance(&x, &y, &control)?;
        let b0 = ted_distance(&y, &x, &control)?;
        r.close(&format!("{tag}: symmetric control agrees both ways"), f0, b0, EXACT_TOLERANCE);
    }
    Ok(r)
}

/// Largest `beta` for which the single-script fit is known to reach `c1`.
pub fn worsening_beta_limit() -> f64 {
    1.0 / (5.0 * LN_2)
}

fn reference_fit(beta: f64, mode: ScriptMode, enforce_metric: bool) -> Result<(GeslProblem, CostTable, f64)> {
    let d = reference::dataset();
    let c0 = reference::c0();
    let trees = d.trees();
    let dist = nalgebra::DMatrix::from_fn(d.len(), d.len(), |i, j| {
        ted_distance(trees[i], trees[j], &c0).expect("reference trees")
    });
    let pairs = select_pairs(&d, &dist)?;
    let cfg = GeslConfig {
        beta,
        script_mode: mode,
        enforce_metric,
        ..GeslConfig::default()
    };
    let fit = gesl_fit(&d, &pairs, &c0, &cfg)?;
    let problem = GeslProblem::new(&d, pairs, &c0, cfg)?;
    Ok((problem, fit.cost, fit.eta))
}

/// Single-script learning on the worked instance: the learned cost fits the
/// frozen scripts well, but its real edit distances collapse and the loss
/// ends up above that of the starting cost.
pub fn gesl_worsening_demo(beta: f64) -> Result<DemoReport> {
    let limit = worsening_beta_limit();
    if !(beta > 0.0 && beta < limit) {
        return Err(Error::Config(format!("beta must lie in (0, {limit:.6}), got {beta}")));
    }
    let mut r = DemoReport::new("gesl_worsening");
    r.input("beta", beta);
    let (problem, fitted, eta) = reference_fit(beta, ScriptMode::Single, false)?;
    r.input("fitted cost", fitted.to_text());
    let diff = r.value("max_abs_diff_to_c1", fitted.max_abs_diff(&reference::c1()));
    r.check(format!("fitted cost matches c1 entrywise within {COST_TOLERANCE}"), diff <= COST_TOLERANCE);
    r.value("eta", eta);
    let d = reference::dataset();
    let report = loss_comparison_report(&d, &problem, &fitted, eta)?;
    let l2 = LN_2 * LN_2;
    let pseudo = r.value("loss_pseudo_learned", report.pseudo);
    let edit = r.value("loss_edit_learned", report.edit);
    r.value("loss_recurrence_learned", report.recurrence);
    let c0_loss = r.value(
        "loss_edit_reference_eta0",
        loss_comparison_report(&d, &problem, problem.reference(), 0.0)?.edit,
    );
    r.close("pseudo loss = 2 beta ln^2 2", pseudo, 2.0 * beta * l2, LOSS_TOLERANCE);
    r.check("learned edit distances are exact", report.edit_exact);
    r.close("edit loss = 2 beta ln^2 2 + 4 ln 2", edit, 2.0 * beta * l2 + 4.0 * LN_2, LOSS_TOLERANCE);
    r.close(
        "reference loss at eta = 0 is 12 beta ln^2 2 + 2 ln 2",
        c0_loss,
        12.0 * beta * l2 + 2.0 * LN_2,
        LOSS_TOLERANCE,
    );
    r.check("edit loss > pseudo loss", edit > pseudo);
    r.check("edit loss > reference loss", edit > c0_loss);
    let c1 = reference::c1();
    let trees = d.trees();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let dz = r.value(
            &format!("c1_distance_x{}_x{}", i + 1, j + 1),
            true_distance_oracle(trees[i], trees[j], &c1, None)?,
        );
        r.close(&format!("x{} and x{} are zero apart under c1", i + 1, j + 1), dz, 0.0, EXACT_TOLERANCE);
    }
    Ok(r)
}

/// All-scripts learning with metric enforcement on the worked instance,
/// checked against the reference cost `c2` and its loss.
pub fn metric_all_scripts_demo(beta: f64) -> Result<DemoReport> {
    if !(beta > 0.0) {
        return Err(Error::Config(format!("beta must be positive, got {beta}")));
    }
    let mut r = DemoReport::new("metric_all_scripts");
    r.input("beta", beta);
    let (problem, fitted, eta) = reference_fit(beta, ScriptMode::AllCooptimal, true)?;
    r.input("fitted cost", fitted.to_text());
    let c2 = reference::c2();
    let d = reference::dataset();
    r.value("eta", eta);
    r.check("fitted cost is a pseudo-metric", check_pseudometric(&fitted).is_pseudometric());
    let diff = r.value("max_abs_diff_to_c2", fitted.max_abs_diff(&c2));
    r.check(format!("fitted cost matches c2 entrywise within {COST_TOLERANCE}"), diff <= COST_TOLERANCE);
    let report = loss_comparison_report(&d, &problem, &fitted, eta)?;
    let want = 3.5 * beta * LN_2 * LN_2;
    let pseudo = r.value("loss_pseudo_learned", report.pseudo);
    let edit = r.value("loss_edit_learned", report.edit);
    r.close("pseudo loss = 3.5 beta ln^2 2", pseudo, want, LOSS_TOLERANCE);
    r.close("edit loss = 3.5 beta ln^2 2", edit, want, LOSS_TOLERANCE);
    r.close("pseudo loss = edit loss", pseudo, edit, LOSS_TOLERANCE);
    // the reference cost itself, for comparison
    let c2_metric = check_pseudometric(&c2).is_pseudometric();
    r.value("c2_is_pseudometric", if c2_metric { 1.0 } else { 0.0 });
    r.value("c2_loss_pseudo", problem.loss(&c2, 0.0));
    let trees = d.trees();
    let all: Vec<(usize, usize)> = problem.pairs.positives.iter().chain(&problem.pairs.negatives).copied().collect();
    let mut vals = Vec::new();
    for &(i, j) in &all {
        vals.push(edit_distance(trees[i], trees[j], &c2)?.0);
    }
    let lookup = |i: usize, j: usize| vals[all.iter().position(|&p| p == (i, j)).expect("pair")];
    r.value(
        "c2_loss_edit",
        crate::gesl::gesl_loss(lookup, &problem.pairs, &c2, 0.0, beta, problem.config.margin_gamma),
    );
    Ok(r)
}

/// Every demo at its default parameters.
pub fn run_all() -> Result<Vec<DemoReport>> {
    Ok(vec![
        dp_overestimation_demo()?,
        negativity_degeneracy_demo(-10.0)?,
        self_identity_demo()?,
        symmetry_demo()?,
        gesl_worsening_demo(0.1)?,
        metric_all_scripts_demo(0.1)?,
    ])
}

/// Demo names accepted by [`run_named`].
pub const DEMO_NAMES: [&str; 6] = [
    "dp_overestimation",
    "negativity_degeneracy",
    "self_identity",
    "symmetry",
    "gesl_worsening",
    "metric_all_scripts",
];

pub fn run_named(name: &str) -> Result<DemoReport> {
    match name {
        "dp_overestimation" => dp_overestimation_demo(),
        "negativity_degeneracy" => negativity_degeneracy_demo(-10.0),
        "self_identity" => self_identity_demo(),
        "symmetry" => symmetry_demo(),
        "gesl_worsening" => gesl_worsening_demo(0.1),
        "metric_all_scripts" => metric_all_scripts_demo(0.1),
        other => Err(Error::Config(format!(
            "unknown demo '{other}'; expected one of {}",
            DEMO_NAMES.join(", ")
        ))),
    }
}
