use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use budget_feasible::generate::{generate, GenParams, GeneratorKind};
use budget_feasible::harness::{approximation_report_for, expected_value_monte_carlo, ExperimentReport, ProbeGrid};
use budget_feasible::io::{reports_to_csv, reports_to_json, InstanceFile};
use budget_feasible::lpcore::max_integrality_gap;
use budget_feasible::optimize::budgeted_opt_exact;
use budget_feasible::suites::verify_suite;
use budget_feasible::{Bids, Instance, MechanismId, Money};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bfm", version, about = "Budget-feasible mechanisms: generate, run, verify")]
struct Cli {
    /// Seed for generators and Monte Carlo runs.
    #[arg(long, global = true, env = "BFM_SEED", default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        clauses: usize,
        #[arg(long, default_value_t = 4)]
        max_value: i64,
        /// Budget as "p/q".
        #[arg(long, default_value = "1")]
        budget: String,
        #[arg(long, default_value_t = 8)]
        cost_steps: i64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one mechanism on one instance.
    Run {
        #[arg(long)]
        mech: String,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probe every mechanism on a named suite; exit 2 on any violation.
    Verify {
        #[arg(long)]
        suite: String,
        /// Write report.csv, report.json and violations.json here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the largest integrality gap of an instance's valuation.
    Gap {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Report every applicable mechanism on every instance file in a directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

enum Failure {
    Violations,
    Error(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure::Error(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violations) => ExitCode::from(2),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = InstanceFile::parse(&text).with_context(|| format!("{}", path.display()))?;
    file.to_instance().with_context(|| format!("{}", path.display()))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Write through a temporary file in the target directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen { kind, n, clauses, max_value, budget, cost_steps, out } => {
            let kind: GeneratorKind = kind.parse()?;
            let budget: Money = budget.parse().context("--budget")?;
            let params = GenParams { n, clauses, max_value, budget, cost_steps };
            emit(out.as_deref(), &generate(kind, &params, cli.seed)?.to_json())?;
        }
        Command::Run { mech, instance, mode, trials, out } => {
            let mech: MechanismId = mech.parse()?;
            let inst = load(&instance)?;
            if !mech.supports(&inst) {
                return Err(anyhow!("{mech} does not support the {} valuation", inst.spec().kind_name()).into());
            }
            let id = stem(&instance);
            let text = match mode {
                Mode::Exact => reports_to_csv(&[approximation_report_for(&id, None, mech, &inst)?]),
                Mode::Mc => {
                    let est = expected_value_monte_carlo(mech, &inst, &Bids::truthful(&inst), trials, cli.seed)?;
                    let opt = budgeted_opt_exact(&inst, inst.true_costs())?.value;
                    format!(
                        "instance_id,mechanism,n,opt,opt_decimal,mean,std_error,trials,seed\n{id},{mech},{},{opt},{},{:.6},{:.6},{},{}\n",
                        inst.n(),
                        opt.to_decimal_string(6),
                        est.mean,
                        est.std_error,
                        est.trials,
                        est.seed
                    )
                }
            };
            emit(out.as_deref(), &text)?;
        }
        Command::Verify { suite, out_dir } => {
            let v = verify_suite(&suite, &ProbeGrid::default(), &MechanismId::ALL)?;
            if let Some(dir) = out_dir {
                write_atomic(&dir.join("report.csv"), &reports_to_csv(&v.reports))?;
                write_atomic(&dir.join("report.json"), &reports_to_json(&v.reports))?;
                let mut violations = serde_json::to_string_pretty(&v)?;
                violations.push('\n');
                write_atomic(&dir.join("violations.json"), &violations)?;
            }
            println!(
                "suite {suite}: {} reports, {} probe runs, {} truthfulness violations, {} invariant violations, {} ratio bound failures",
                v.reports.len(),
                v.probes.runs,
                v.probes.truthfulness.len(),
                v.probes.invariants.len() + v.reports.iter().map(|r| r.invariant_violations.len()).sum::<usize>(),
                v.bound_failures.len()
            );
            for f in &v.bound_failures {
                println!("  {f}");
            }
            for t in v.probes.truthfulness.iter().take(20) {
                println!(
                    "  {} agent {} tape {:?}: cost {} bid {} gains {} over {}",
                    t.mechanism, t.agent, t.tape, t.true_cost, t.misreport, t.misreport_utility, t.truthful_utility
                );
            }
            if !v.is_clean() {
                return Err(Failure::Violations);
            }
        }
        Command::Gap { instance } => {
            let inst = load(&instance)?;
            let report = max_integrality_gap(inst.spec()).with_context(|| format!("{}", instance.display()))?;
            println!("I = {}", report.max_gap_string());
        }
        Command::Report { dir } => {
            let mut files: Vec<PathBuf> = fs::read_dir(&dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json") && !p.ends_with("report.json") && !p.ends_with("violations.json"))
                .collect();
            files.sort();
            if files.is_empty() {
                return Err(anyhow!("no instance files in {}", dir.display()).into());
            }
            let mut reports: Vec<ExperimentReport> = Vec::new();
            for path in &files {
                let inst = load(path)?;
                let seed = InstanceFile::parse(&fs::read_to_string(path)?)?.provenance.map(|p| p.seed);
                for mech in MechanismId::ALL {
                    if mech.supports(&inst) {
                        reports.push(approximation_report_for(&stem(path), seed, mech, &inst)?);
                    }
                }
            }
            write_atomic(&dir.join("report.csv"), &reports_to_csv(&reports))?;
            write_atomic(&dir.join("report.json"), &reports_to_json(&reports))?;
            println!("{} rows from {} instances", reports.len(), files.len());
        }
    }
    Ok(())
}
