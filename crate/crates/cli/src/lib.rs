//! Command implementations behind the `tedlearn` binary. Each `cmd_*`
//! function does the work and returns a value the tests can inspect;
//! [`execute`] maps outcomes to exit codes.

use std::ffi::OsString;
use std::f64::consts::LN_2;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use tedlearn::costs::{check_pseudometric, cosine_gradcheck, cost_from_embedding, simplex_init, MetricAudit};
use tedlearn::experiment::{
    learn_variant, rows_to_csv, run_experiment, ExperimentConfig, ExperimentResult, LearnSettings,
    LearnedModel, Variant,
};
use tedlearn::lvq::{knn_evaluate, DistanceHead};
use tedlearn::synthetic::{synthetic_dataset, SyntheticConfig};
use tedlearn::ted::ted_distance;
use tedlearn::trees::{load_dataset, save_dataset};
use tedlearn::verify::{run_all, run_named, DemoReport};
use tedlearn::{CostTable, Dataset, EmbeddingMatrix, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Tolerance for the finite-difference gradient check.
pub const GRADCHECK_TOLERANCE: f64 = 1e-6;
/// Step of the finite-difference gradient check.
pub const GRADCHECK_STEP: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(name = "tedlearn", version, about = "Tree edit distances with learned edit costs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Gesl,
    Lvq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Head {
    Pseudo,
    True,
}

impl From<Head> for DistanceHead {
    fn from(h: Head) -> Self {
        match h {
            Head::Pseudo => DistanceHead::Pseudo,
            Head::True => DistanceHead::TrueTed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pairwise edit distance matrix of a dataset, as CSV.
    Dist {
        dataset: PathBuf,
        /// Cost table file, `default-log2` or `simplex`.
        #[arg(long, default_value = "default-log2")]
        cost: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn edit costs with one of the variants G1, G2, G3, L1, L2.
    Learn {
        dataset: PathBuf,
        #[arg(long)]
        variant: String,
        /// Optional; must agree with the variant when given.
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        #[arg(long, default_value_t = LN_2)]
        gamma: f64,
        /// Project GESL iterates onto pseudo-metrics.
        #[arg(long)]
        metric: bool,
        /// Distance the LVQ variants train against.
        #[arg(long, value_enum, default_value_t = Head::True)]
        head: Head,
        /// Starting cost: a file, `default-log2` or `simplex`.
        #[arg(long, default_value = "default-log2")]
        init: String,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 0.05)]
        learning_rate: f64,
        /// Accepted for interface symmetry; learning is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Audit a cost table; exit 0 iff it is a pseudo-metric.
    CheckMetric { cost: PathBuf },
    /// Run the demo suite or one named demo.
    Verify {
        #[arg(default_value = "all")]
        which: String,
    },
    /// Cross-validated variant grid under both distance heads.
    Experiment {
        dataset: PathBuf,
        /// Comma-separated variant list.
        #[arg(long, default_value = "G1,G2,G3,L1,L2")]
        variant: String,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        #[arg(long, default_value_t = LN_2)]
        gamma: f64,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the unit-side simplex matrix for `dim` symbols.
    Simplex { dim: usize },
    /// Finite-difference check of the cosine cost gradient.
    Gradcheck {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a seeded synthetic two-class dataset.
    Synth {
        #[arg(long, default_value_t = 20)]
        per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// `default-log2` (every off-diagonal entry `ln 2`), `simplex` (the cost of
/// the unit simplex embedding) or a cost file over the dataset's alphabet.
pub fn resolve_cost(spec: &str, d: &Dataset) -> Result<CostTable> {
    let c = match spec {
        "default-log2" => CostTable::uniform(d.alphabet.clone(), LN_2),
        "simplex" => cost_from_embedding(&EmbeddingMatrix::simplex(d.alphabet.clone(), d.alphabet.len())?),
        path => CostTable::load(path)?,
    };
    if c.alphabet() != &d.alphabet {
        return Err(Error::AlphabetMismatch(format!("cost '{spec}' does not match the dataset alphabet")));
    }
    Ok(c)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Header row `,0,1,...`, then one row per record led by its index.
pub fn distance_csv(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for j in 0..rows.len() {
        out.push_str(&format!(",{j}"));
    }
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        out.push_str(&i.to_string());
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn read_distance_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty distance file".into()))?;
    let n = header.split(',').count() - 1;
    let rows: Vec<Vec<f64>> = lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != n + 1 || fields[0] != i.to_string() {
                return Err(Error::Format(format!("malformed row {i}: '{line}'")));
            }
            fields[1..]
                .iter()
                .map(|f| f.parse().map_err(|e| Error::Format(format!("row {i}: {e}"))))
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.len() != n {
        return Err(Error::Format(format!("expected {n} rows, found {}", rows.len())));
    }
    Ok(rows)
}

pub fn cmd_dist(dataset: &Path, cost: &str, out: &Path) -> Result<Vec<Vec<f64>>> {
    let d = load_dataset(dataset)?;
    let c = resolve_cost(cost, &d)?;
    let trees = d.trees();
    let rows = trees
        .iter()
        .map(|x| trees.iter().map(|y| ted_distance(x, y, &c)).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    write_file(out, &distance_csv(&rows))?;
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub model: LearnedModel,
    /// Leave-one-out 1-NN error `(before, after)` under edit distances.
    pub edit_error: (f64, f64),
    /// The same under pseudo edit distances.
    pub pseudo_error: (f64, f64),
    pub files: Vec<PathBuf>,
}

impl LearnOutcome {
    pub fn evaluation_line(&self) -> String {
        format!(
            "1-NN leave-one-out error: edit distance {} -> {}, pseudo edit distance {} -> {}",
            self.edit_error.0, self.edit_error.1, self.pseudo_error.0, self.pseudo_error.1
        )
    }
}

#[derive(Debug, Clone)]
pub struct LearnRequest {
    pub variant: Variant,
    pub method: Option<Method>,
    pub head: DistanceHead,
    pub init: String,
    pub settings: LearnSettings,
}

fn loo(d: &Dataset, model: &LearnedModel, head: DistanceHead) -> Result<f64> {
    knn_evaluate(d, &model.pairwise(d, head)?, 1)
}

pub fn cmd_learn(dataset: &Path, req: &LearnRequest, out_dir: &Path) -> Result<LearnOutcome> {
    if let Some(m) = req.method {
        if (m == Method::Gesl) != req.variant.is_gesl() {
            return Err(Error::Config(format!(
                "variant {} does not belong to method {m:?}",
                req.variant
            )));
        }
    }
    let d = load_dataset(dataset)?;
    let init = resolve_cost(&req.init, &d)?;
    let model = learn_variant(&d, req.variant, req.head, &req.settings, &init)?;
    let mut before = model.clone();
    before.cost = model.reference.clone();
    let edit_error = (loo(&d, &before, DistanceHead::TrueTed)?, loo(&d, &model, DistanceHead::TrueTed)?);
    let pseudo_error = (loo(&d, &before, DistanceHead::Pseudo)?, loo(&d, &model, DistanceHead::Pseudo)?);

    let mut files = vec![out_dir.join("cost.txt")];
    write_file(&files[0], &model.cost.to_text())?;
    if let Some(e) = &model.embedding {
        files.push(out_dir.join("embedding.txt"));
        write_file(&files[1], &e.to_text())?;
    }
    let mut trace = String::from("step,loss\n");
    for (step, loss) in &model.diagnostics.loss_trace {
        trace.push_str(&format!("{step},{loss}\n"));
    }
    let trace_path = out_dir.join("loss_trace.csv");
    write_file(&trace_path, &trace)?;
    files.push(trace_path);
    let outcome = LearnOutcome {
        model,
        edit_error,
        pseudo_error,
        files,
    };
    let summary = format!(
        "variant {}\nconverged {}\n{}\n",
        req.variant,
        outcome.model.diagnostics.converged,
        outcome.evaluation_line()
    );
    let summary_path = out_dir.join("summary.txt");
    write_file(&summary_path, &summary)?;
    let mut outcome = outcome;
    outcome.files.push(summary_path);
    Ok(outcome)
}

pub fn cmd_check_metric(cost: &Path) -> Result<MetricAudit> {
    Ok(check_pseudometric(&CostTable::load(cost)?))
}

pub fn cmd_verify(which: &str) -> Result<Vec<DemoReport>> {
    if which == "all" {
        run_all()
    } else {
        Ok(vec![run_named(which)?])
    }
}

/// Result file names for a dataset stem: pseudo edit distance first.
pub fn experiment_paths(out_dir: &Path, dataset: &Path) -> (PathBuf, PathBuf) {
    let stem = dataset.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into());
    (
        out_dir.join(format!("{stem}_experiment_results_pseudo-edit_distance.csv")),
        out_dir.join(format!("{stem}_experiment_results_edit_distance.csv")),
    )
}

pub fn parse_variants(list: &str) -> Result<Vec<Variant>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect()
}

pub fn cmd_experiment(dataset: &Path, cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentResult> {
    let d = load_dataset(dataset)?;
    let result = run_experiment(&d, cfg)?;
    let (pseudo, edit) = experiment_paths(out_dir, dataset);
    write_file(&pseudo, &rows_to_csv(&result.pseudo))?;
    write_file(&edit, &rows_to_csv(&result.true_ted))?;
    Ok(result)
}

pub fn cmd_simplex(dim: usize) -> String {
    let a = simplex_init(dim);
    let mut out = String::new();
    for i in 0..dim {
        let row: Vec<String> = (0..dim).map(|j| format!("{:.17e}", a[(i, j)])).collect();
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

pub fn cmd_gradcheck(trials: usize, dim: usize, seed: u64) -> Result<f64> {
    cosine_gradcheck(trials, dim, seed, GRADCHECK_STEP)
}

pub fn cmd_synth(per_class: usize, seed: u64, out: &Path) -> Result<Dataset> {
    let cfg = SyntheticConfig {
        per_class,
        ..SyntheticConfig::default()
    };
    let d = synthetic_dataset(&cfg, seed)?;
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    save_dataset(&d, out)?;
    Ok(d)
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    let say = |out: &mut dyn Write, text: &str| {
        // a closed stdout is not worth failing the command over
        let _ = out.write_all(text.as_bytes());
    };
    match cmd {
        Command::Dist { dataset, cost, out: path } => {
            let rows = cmd_dist(&dataset, &cost, &path)?;
            say(out, &format!("wrote {}x{} distances to {}\n", rows.len(), rows.len(), path.display()));
            Ok(EXIT_OK)
        }
        Command::Learn {
            dataset,
            variant,
            method,
            beta,
            gamma,
            metric,
            head,
            init,
            epochs,
            learning_rate,
            seed: _,
            out: dir,
        } => {
            let req = LearnRequest {
                variant: variant.parse()?,
                method,
                head: head.into(),
                init,
                settings: LearnSettings {
                    beta,
                    gamma,
                    gesl_metric: metric,
                    learning_rate,
                    epochs,
                    ..LearnSettings::default()
                },
            };
            let o = cmd_learn(&dataset, &req, &dir)?;
            say(out, &format!("converged: {}\n{}\n", o.model.diagnostics.converged, o.evaluation_line()));
            for f in &o.files {
                say(out, &format!("wrote {}\n", f.display()));
            }
            Ok(EXIT_OK)
        }
        Command::CheckMetric { cost } => {
            let audit = cmd_check_metric(&cost)?;
            say(out, &format!("{audit}{}\n", audit.summary()));
            Ok(if audit.is_pseudometric() { EXIT_OK } else { EXIT_PROPERTY })
        }
        Command::Verify { which } => {
            let reports = cmd_verify(&which)?;
            for r in &reports {
                say(out, &format!("{r}\n"));
            }
            Ok(if reports.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_PROPERTY })
        }
        Command::Experiment {
            dataset,
            variant,
            folds,
            seed,
            beta,
            gamma,
            epochs,
            out: dir,
        } => {
            let cfg = ExperimentConfig {
                variants: parse_variants(&variant)?,
                folds,
                seed,
                settings: LearnSettings {
                    beta,
                    gamma,
                    epochs,
                    ..LearnSettings::default()
                },
                ..ExperimentConfig::default()
            };
            let result = cmd_experiment(&dataset, &cfg, &dir)?;
            let (p, e) = experiment_paths(&dir, &dataset);
            say(out, &format!("pseudo edit distance\n{}", rows_to_csv(&result.pseudo)));
            say(out, &format!("edit distance\n{}", rows_to_csv(&result.true_ted)));
            say(out, &format!("wrote {}\nwrote {}\n", p.display(), e.display()));
            Ok(EXIT_OK)
        }
        Command::Simplex { dim } => {
            say(out, &cmd_simplex(dim));
            Ok(EXIT_OK)
        }
        Command::Gradcheck { trials, dim, seed } => {
            let err = cmd_gradcheck(trials, dim, seed)?;
            say(out, &format!("max deviation {err:.6e} (tolerance {GRADCHECK_TOLERANCE:e})\n"));
            Ok(if err <= GRADCHECK_TOLERANCE { EXIT_OK } else { EXIT_PROPERTY })
        }
        Command::Synth { per_class, seed, out: path } => {
            let d = cmd_synth(per_class, seed, &path)?;
            say(out, &format!("wrote {} records to {}\n", d.len(), path.display()));
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code: 0 on success, 1 on a failed property, 2 on bad usage or input.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                return EXIT_USAGE;
            }
            let _ = out.write_all(text.as_bytes());
            return EXIT_OK;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
