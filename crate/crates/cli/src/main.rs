//! `modlab`: moduli, plan content and counterexample suites from the command
//! line.

mod fail;
mod instance;
mod report;
mod suites;
mod sweep;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use modlab_core::content::duality_gap;
use modlab_core::modulus::FunctionClass;
use modlab_core::random::{random_family, rng, RandomShape};

use fail::{Fail, Outcome};
use instance::{build_family, build_sequence, build_space, parse_class, Instance, Task};
use report::{base, emit, num, render};

#[derive(Parser)]
#[command(name = "modlab", version, about = "Moduli and plan content of finite families of measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Instance file (modlab.instance/1).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exponent, overriding the instance.
    #[arg(long)]
    p: Option<f64>,
    /// Function class: all, lip:L or bv.
    #[arg(long)]
    class: Option<String>,
    /// Threshold for the recorded checks.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads.
    #[arg(long, env = "MODLAB_JOBS", default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the instance's task (or --task) and write a report.
    Compute {
        #[command(flatten)]
        common: Common,
        /// modulus, content, duality or am-bracket.
        #[arg(long)]
        task: Option<String>,
    },
    /// Compare M_p^{1/p} with Ct_p on an instance or on seeded random families.
    Duality {
        #[command(flatten)]
        common: Common,
        /// Number of random families, seeded from --seed upwards.
        #[arg(long)]
        random: Option<usize>,
    },
    /// Tabulate modulus and content along one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// k, grid, L, p or depth.
        #[arg(long)]
        param: String,
        /// Comma-separated values; `a..b` and `2^a..2^b` ranges allowed.
        #[arg(long)]
        values: String,
        /// Directory for two-column plot files.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
    },
    /// Run a named counterexample suite.
    Counterexample {
        /// interval, nonouter, construction, radial, doubling or increasing.
        name: String,
        #[command(flatten)]
        common: Common,
        /// Truncation parameter override, `key=value`.
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// Check an instance file without solving it.
    Validate {
        /// Instance file; same as --instance.
        path: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("modlab: {f}");
            ExitCode::from(f.code() as u8)
        }
    }
}

fn require_instance(path: Option<&Path>) -> Outcome<Instance> {
    Instance::load(path.ok_or_else(|| Fail::Schema("--instance is required".into()))?)
}

fn exponent(common: &Common, inst: Option<&Instance>) -> Outcome<f64> {
    let p = common.p.or(inst.and_then(|i| i.options.p)).unwrap_or(1.0);
    if !(p.is_finite() && p >= 1.0) {
        return Err(Fail::Schema(format!("p must be at least 1, got {p}")));
    }
    Ok(p)
}

fn class_of(common: &Common, inst: Option<&Instance>) -> Outcome<FunctionClass> {
    match common.class.as_deref().or(inst.and_then(|i| i.options.class.as_deref())) {
        Some(s) => parse_class(s),
        None => Ok(FunctionClass::All),
    }
}

fn tol_of(common: &Common, inst: Option<&Instance>) -> Outcome<Option<f64>> {
    match common.tol.or(inst.and_then(|i| i.options.tol)) {
        Some(t) if !(t.is_finite() && t >= 0.0) => Err(Fail::Schema(format!("tolerance must be nonnegative, got {t}"))),
        t => Ok(t),
    }
}

/// Timing stays in its own key so the rest of the report is reproducible.
fn finish(mut report: Map<String, Value>, started: Instant, out: Option<&Path>) -> Outcome<()> {
    report.insert("timing".into(), json!({ "seconds": num(started.elapsed().as_secs_f64()) }));
    emit(&render(report), out)
}

fn run(command: Command) -> Outcome<()> {
    let started = Instant::now();
    match command {
        Command::Compute { common, task } => {
            let inst = require_instance(common.instance.as_deref())?;
            let task = match task {
                Some(t) => Task::parse(&t)?,
                None => inst.task,
            };
            let (p, class, tol) = (exponent(&common, Some(&inst))?, class_of(&common, Some(&inst))?, tol_of(&common, Some(&inst))?);
            let built = build_space(&inst.space)?;
            let family = build_family(&built, &inst.family)?;
            let (results, pass) = tasks::run_task(
                task,
                &family,
                || build_sequence(&built, &inst.family),
                p,
                class,
                tol,
                inst.options.horizon,
            )?;
            let mut r = base("compute");
            r.insert("instance".into(), inst.echo());
            r.insert("task".into(), serde_json::to_value(task).expect("task serializes"));
            r.insert("results".into(), results);
            r.insert("pass".into(), Value::Bool(pass));
            finish(r, started, common.out.as_deref())?;
            if !pass {
                return Err(Fail::Invariant("recorded check failed".into()));
            }
            Ok(())
        }
        Command::Duality { common, random } => {
            let inst = match (&common.instance, random) {
                (Some(_), Some(_)) => return Err(Fail::Schema("use either --instance or --random".into())),
                (None, None) => return Err(Fail::Schema("duality needs --instance or --random N".into())),
                (path, _) => path.as_deref().map(Instance::load).transpose()?,
            };
            let p = exponent(&common, inst.as_ref())?;
            let tol = tol_of(&common, inst.as_ref())?.unwrap_or_else(|| tasks::default_duality_tol(p));
            let mut r = base("duality");
            let pass = if let Some(inst) = inst {
                let built = build_space(&inst.space)?;
                let family = build_family(&built, &inst.family)?;
                let d = duality_gap(&family, p)?;
                r.insert("instance".into(), inst.echo());
                r.insert("results".into(), tasks::duality_section(&family, &d, tol)?);
                tasks::duality_ok(&d, tol)
            } else {
                let n = random.expect("checked above");
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(common.jobs.max(1))
                    .build()
                    .map_err(|e| Fail::Io(format!("thread pool: {e}")))?;
                let rows = pool.install(|| {
                    (0..n as u64)
                        .into_par_iter()
                        .map(|i| {
                            let family = random_family(&mut rng(common.seed + i), RandomShape::default())?;
                            let d = duality_gap(&family, p)?;
                            Ok((common.seed + i, family.space().len(), family.len(), d))
                        })
                        .collect::<Outcome<Vec<_>>>()
                })?;
                let max_gap = rows.iter().map(|row| row.3.gap.value()).fold(0.0, f64::max);
                let max_cross = rows.iter().map(|row| row.3.cross_check).fold(0.0, f64::max);
                let pass = rows.iter().all(|row| tasks::duality_ok(&row.3, tol));
                r.insert("random".into(), json!({ "count": n, "seed": common.seed, "p": num(p) }));
                r.insert(
                    "instances".into(),
                    Value::Array(
                        rows.iter()
                            .map(|(seed, points, members, d)| {
                                json!({
                                    "seed": seed,
                                    "points": points,
                                    "members": members,
                                    "modulus_root": report::extended(d.modulus_root),
                                    "content": report::extended(d.content.value),
                                    "gap": tasks::gap_value(d.gap),
                                })
                            })
                            .collect(),
                    ),
                );
                r.insert(
                    "results".into(),
                    json!({ "max_gap": num(max_gap), "max_cross_check": num(max_cross), "threshold": num(tol) }),
                );
                eprintln!("max gap {max_gap:.3e} over {n} instances (threshold {tol:e})");
                pass
            };
            r.insert("pass".into(), Value::Bool(pass));
            finish(r, started, common.out.as_deref())?;
            if !pass {
                return Err(Fail::Invariant(format!("duality gap above {tol:e}")));
            }
            Ok(())
        }
        Command::Sweep { common, param, values, plot_dir } => {
            let inst = require_instance(common.instance.as_deref())?;
            let param = sweep::Param::parse(&param)?;
            let values = sweep::parse_values(&values)?;
            let (p, class) = (exponent(&common, Some(&inst))?, class_of(&common, Some(&inst))?);
            let rows = sweep::run(&inst, class, p, param, &values, common.jobs)?;
            if let Some(dir) = &plot_dir {
                sweep::write_plots(dir, param, &rows)?;
            }
            emit(&sweep::table(param, &rows), common.out.as_deref())
        }
        Command::Counterexample { name, common, set } => {
            let given = suites::parse_sets(&set)?;
            let result = suites::run(&name, given, common.seed, common.jobs)?;
            let pass = result.checks.iter().all(|c| c.pass());
            let mut r = base("counterexample");
            r.insert("suite".into(), Value::String(name.clone()));
            r.insert("parameters".into(), Value::Object(result.parameters));
            r.insert("values".into(), Value::Object(result.values));
            r.insert("checks".into(), Value::Array(result.checks.iter().map(|c| c.to_json()).collect()));
            r.insert("pass".into(), Value::Bool(pass));
            finish(r, started, common.out.as_deref())?;
            if !pass {
                return Err(Fail::Invariant(format!("suite {name} has failing checks")));
            }
            Ok(())
        }
        Command::Validate { path, common } => {
            let path = path.or(common.instance.clone()).ok_or_else(|| Fail::Schema("no instance given".into()))?;
            let inst = Instance::load(&path)?;
            exponent(&common, Some(&inst))?;
            class_of(&common, Some(&inst))?;
            let built = build_space(&inst.space)?;
            let family = build_family(&built, &inst.family)?;
            let mut r = base("validate");
            r.insert("instance".into(), inst.echo());
            r.insert("points".into(), json!(built.space.len()));
            r.insert("members".into(), json!(family.len()));
            r.insert("valid".into(), Value::Bool(true));
            emit(&render(r), common.out.as_deref())
        }
    }
}
