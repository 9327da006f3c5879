use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use groupaug::analysis::{
    density_report, export_density, export_importance, importance_report, AnalysisSettings, ExportFormat,
};
use groupaug::bo::{load_history, HISTORY_FILE};
use groupaug::harness::{reevaluate_best, Surface};
use groupaug::image::{load_image, save_image};
use groupaug::policy::Policy;
use groupaug::run::{ObjectiveSpec, RunConfig};
use groupaug::space::{builtin_names, builtin_space, Configuration, SearchSpace};
use groupaug::{Error, Execution, Result, RngState};

#[derive(Parser)]
#[command(name = "groupaug", version, about = "Augmentation policy search toolkit")]
struct Cli {
    /// Run data-parallel work on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List builtin search spaces, or print one as JSON.
    Spaces { name: Option<String> },

    /// Draw augmentation sequences from a prior-sampled GroupAugment
    /// configuration.
    SamplePolicy {
        #[arg(long, default_value = "group_augment")]
        space: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },

    /// Augment one image with a policy file.
    Apply {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Run (or resume) a search.
    Search(SearchArgs),

    /// Re-evaluate the best trials of a finished run with fresh seeds.
    Reeval {
        /// Run directory holding `history.ndjson` and `space.json`.
        #[arg(long)]
        run_dir: PathBuf,
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Export importance or density reports from a history file.
    Analyze {
        #[arg(long)]
        history: PathBuf,
        #[arg(long, value_enum)]
        kind: ReportKind,
        #[arg(long)]
        output_dir: PathBuf,
        /// Space name or file; defaults to `space.json` beside the history.
        #[arg(long)]
        space: Option<String>,
        #[arg(long, default_value_t = 0.25)]
        best_fraction: f64,
        #[arg(long, default_value_t = 0.2)]
        top_fraction: f64,
        #[arg(long, default_value_t = 0.2)]
        bad_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportKind {
    Importance,
    Density,
}

#[derive(clap::Args)]
struct ObjectiveArgs {
    /// Synthetic surface: quadratic, additive_mix or collapse_valley.
    #[arg(long, conflicts_with = "evaluator")]
    objective: Option<String>,
    /// External evaluator command, split on whitespace.
    #[arg(long)]
    evaluator: Option<String>,
    #[arg(long)]
    timeout_secs: Option<f64>,
}

impl ObjectiveArgs {
    fn spec(&self) -> Result<Option<ObjectiveSpec>> {
        if let Some(name) = &self.objective {
            return Ok(Some(ObjectiveSpec::Synthetic {
                synthetic: name.parse::<Surface>()?,
                noise_std: 0.0,
            }));
        }
        if let Some(cmd) = &self.evaluator {
            let mut e = groupaug::harness::ExternalObjective::new(cmd.split_whitespace().map(String::from).collect());
            e.timeout_secs = self.timeout_secs;
            return Ok(Some(ObjectiveSpec::External(e)));
        }
        Ok(None)
    }
}

#[derive(clap::Args)]
struct SearchArgs {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    space: Option<String>,
    #[command(flatten)]
    objective: ObjectiveArgs,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    n_init: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
}

impl SearchArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => {
                let space = self.space.clone().ok_or_else(|| usage("--space or --config is required"))?;
                let objective = self
                    .objective
                    .spec()?
                    .ok_or_else(|| usage("--objective, --evaluator or --config is required"))?;
                serde_json::from_value(serde_json::json!({ "space": space, "objective": objective }))?
            }
        };
        if let Some(s) = &self.space {
            cfg.space = s.clone();
        }
        if let Some(o) = self.objective.spec()? {
            cfg.objective = o;
        }
        if let Some(b) = self.budget {
            cfg.budget = b;
        }
        if let Some(p) = self.parallelism {
            cfg.parallelism = p;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(d) = &self.output_dir {
            cfg.output_dir = Some(d.clone());
        }
        if let Some(n) = self.n_init {
            cfg.bo.n_init = n;
        }
        if self.gamma.is_some() {
            cfg.bo.gamma = self.gamma;
        }
        Ok(cfg)
    }
}

fn usage(msg: &str) -> Error {
    Error::InvalidConfiguration(msg.to_string())
}

/// 2 for anything the caller can fix in their input, 1 for runtime
/// failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Protocol(_) | Error::BudgetExhausted(_) => 1,
        _ => 2,
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
        _ => Ok(()),
    }
}

/// A policy file holds either a tagged policy or a space name plus a
/// configuration of that space (the `sample-policy` output qualifies).
fn read_policy(path: &Path) -> Result<Policy> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("kind").is_some() {
        return Policy::from_json(&text);
    }
    let space = value
        .get("space")
        .and_then(|s| s.as_str())
        .ok_or_else(|| usage("policy file needs `kind`, or `space` and `configuration`"))?;
    let cfg: Configuration = serde_json::from_value(
        value
            .get("configuration")
            .cloned()
            .ok_or_else(|| usage("policy file lacks `configuration`"))?,
    )?;
    Policy::from_configuration(&SearchSpace::resolve(space)?, &cfg)
}

fn run(cli: Cli) -> Result<()> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match cli.command {
        Command::Spaces { name: None } => {
            for n in builtin_names() {
                println!("{n}");
            }
            Ok(())
        }
        Command::Spaces { name: Some(n) } => print_json(&builtin_space(&n)?),
        Command::SamplePolicy { space, seed, count } => {
            let space = SearchSpace::resolve(&space)?;
            let mut rng = RngState::from_seed(seed);
            let cfg = space.sample_from_prior(&mut rng);
            let Policy::GroupAugment(policy) = Policy::from_configuration(&space, &cfg)? else {
                return Err(usage("sample-policy needs a GroupAugment space"));
            };
            let draws: Vec<_> = (0..count).map(|_| policy.sample_draw(&mut rng)).collect();
            print_json(&serde_json::json!({
                "space": space.name,
                "seed": seed,
                "configuration": cfg,
                "draws": draws,
            }))
        }
        Command::Apply {
            policy,
            input,
            output,
            seed,
        } => {
            let policy = read_policy(&policy)?;
            let img = load_image(&input)?;
            let out = policy.apply(&img, &mut RngState::from_seed(seed))?;
            save_image(&out, &output)
        }
        Command::Search(args) => {
            let cfg = args.config()?;
            let (state, summary, dir) = cfg.execute(exec)?;
            eprintln!(
                "{} trials ({} completed, {} failed, {} collapsed) in {}",
                state.finished(),
                summary.completed,
                summary.failed,
                summary.collapsed,
                dir.display()
            );
            print_json(&summary)?;
            if summary.completed == 0 {
                let reason = state
                    .history()
                    .iter()
                    .find_map(|t| t.error.clone())
                    .unwrap_or_else(|| "no trial completed".into());
                return Err(Error::Protocol(format!("every evaluation failed: {reason}")));
            }
            Ok(())
        }
        Command::Reeval {
            run_dir,
            objective,
            k,
            repeats,
            seed,
        } => {
            let space = SearchSpace::resolve(&run_dir.join("space.json").to_string_lossy())?;
            let history = load_history(&run_dir.join(HISTORY_FILE))?;
            let spec = objective
                .spec()?
                .ok_or_else(|| usage("--objective or --evaluator is required"))?;
            let obj = spec.build(&space);
            let report = reevaluate_best(&history, &space.name, k, repeats, obj.as_ref(), seed)?;
            let text = serde_json::to_string_pretty(&report)?;
            let path = run_dir.join("reeval.json");
            std::fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
            println!("{text}");
            Ok(())
        }
        Command::Analyze {
            history,
            kind,
            output_dir,
            space,
            best_fraction,
            top_fraction,
            bad_fraction,
            seed,
        } => {
            let space = match space {
                Some(s) => SearchSpace::resolve(&s)?,
                None => {
                    let beside = history.with_file_name("space.json");
                    SearchSpace::resolve(&beside.to_string_lossy())
                        .map_err(|_| usage("no --space given and no space.json beside the history"))?
                }
            };
            let trials = load_history(&history)?;
            let settings = AnalysisSettings {
                best_fraction,
                top_fraction,
                bad_fraction,
                seed,
                ..Default::default()
            };
            match kind {
                ReportKind::Importance => {
                    let report = importance_report(&trials, &space, &settings, exec)?;
                    export_importance(&report, &output_dir.join("importance.csv"), ExportFormat::Csv)?;
                    export_importance(&report, &output_dir.join("importance.json"), ExportFormat::Json)?;
                    for row in report.ranked() {
                        println!("{:<32} {:>4}% {:>4}%", row.dimension, row.percent_all, row.percent_best);
                    }
                }
                ReportKind::Density => {
                    let report = density_report(&trials, &space, settings.top_fraction, settings.bad_fraction)?;
                    export_density(&report, &output_dir.join("density.csv"), ExportFormat::Csv)?;
                    export_density(&report, &output_dir.join("density.json"), ExportFormat::Json)?;
                    for (g, n) in &report.group_sizes {
                        println!("{:<10} {n}{}", format!("{g:?}").to_lowercase(), if *n == 0 { " (empty)" } else { "" });
                    }
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
