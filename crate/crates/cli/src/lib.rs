//! Command-line driver: discovery runs, policy evaluation, result tables,
//! and Monte-Carlo checks of the stopping rule.

pub mod files;
pub mod report;
pub mod theorems;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use activeset::dcopf::{build_dcopf, build_ptdf};
use activeset::discovery::{Discovery, DiscoveryConfig, LpKeySource};
use activeset::parametric::{solve_for_sample, ParametricProgram, ReductionMode, Sample};
use activeset::policy::evaluate_policy;
use activeset::sampling::{make_distribution, DistributionKind, DistributionSpec};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use files::{
    load_case, read_json, resolve, write_json, write_json_compact, CaseInfo, CatalogEntry, EvalFile, FormatArg,
    ResultFile, EVAL_CSV, EVAL_JSON, KEYS_FILE, RESULT_FILE, SCHEMA_VERSION, SNAPSHOT_FILE,
};
use report::{build_table, fmt_rate, summary_line, Table, TableInput};
use theorems::{validate_theorems, TheoremConfig, TheoremReport};

#[derive(Parser, Debug)]
#[command(name = "activeset", version, about = "Learn the optimal active sets of DC-OPF under load uncertainty")]
pub struct Cli {
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run discovery on a case and write result, key catalog, and snapshot
    Discover(DiscoverArgs),
    /// Evaluate the ensemble policy of a discovery result on fresh samples
    Evaluate(EvaluateArgs),
    /// Tabulate discovery and evaluation results
    Table(TableArgs),
    /// Monte-Carlo check of the stopping guarantees on synthetic systems
    ValidateTheorems(TheoremArgs),
    /// Solve the nominal OPF of a case
    Solve(CaseArgs),
    /// Print the PTDF matrix of a case as CSV
    Ptdf(CaseArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CaseArgs {
    /// Case file, or the name of a bundled case (case3, case5, case6_congested)
    #[arg(long)]
    pub case: PathBuf,

    /// Case format; inferred from the extension when omitted
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistArg {
    Normal,
    Uniform,
}

#[derive(Args, Debug, Clone)]
pub struct DistArgs {
    #[arg(long, value_enum, default_value_t = DistArg::Normal)]
    pub dist: DistArg,

    /// Load standard deviation as a fraction of nominal load
    #[arg(long, default_value_t = 0.03)]
    pub sigma_frac: f64,

    /// Half-width of the uniform support, in standard deviations
    #[arg(long, default_value_t = 3.0)]
    pub support_sigmas: f64,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl DistArgs {
    pub fn spec(&self) -> DistributionSpec {
        DistributionSpec {
            kind: match self.dist {
                DistArg::Normal => DistributionKind::Normal,
                DistArg::Uniform => DistributionKind::Uniform,
            },
            sigma_fraction: self.sigma_frac,
            support_sigmas: self.support_sigmas,
            seed: self.seed,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct StoppingArgs {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.04)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 22_000)]
    pub max_m: usize,
}

impl StoppingArgs {
    pub fn config(&self) -> DiscoveryConfig {
        DiscoveryConfig {
            alpha: self.alpha,
            epsilon: self.epsilon,
            delta: self.delta,
            gamma: self.gamma,
            max_m: self.max_m,
        }
    }
}

impl Default for StoppingArgs {
    fn default() -> Self {
        let d = DiscoveryConfig::default();
        Self {
            alpha: d.alpha,
            epsilon: d.epsilon,
            delta: d.delta,
            gamma: d.gamma,
            max_m: d.max_m,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[command(flatten)]
    pub dist: DistArgs,
    #[command(flatten)]
    pub stopping: StoppingArgs,

    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Continue from the snapshot in the output directory
    #[arg(long)]
    pub resume: bool,

    /// Write a snapshot every this many iterations
    #[arg(long, default_value_t = 200)]
    pub checkpoint_every: usize,
}

#[derive(Args, Debug, Clone)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub case: CaseArgs,

    /// Discovery result file, or the directory holding it
    #[arg(long)]
    pub result: PathBuf,

    #[arg(long, default_value_t = 20_000)]
    pub n_test: usize,

    #[arg(long, default_value_t = 1)]
    pub eval_seed: u64,

    /// Solve each reduced problem with its rows as inequalities instead
    #[arg(long)]
    pub inequalities: bool,

    /// Output directory; defaults to the result's directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct TableArgs {
    /// Run directories (holding result.json and optionally eval.json) or
    /// result files
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,

    #[arg(long)]
    pub csv: Option<PathBuf>,

    #[arg(long)]
    pub markdown: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct TheoremArgs {
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 10)]
    pub k0: usize,
    #[arg(long, default_value_t = 0.01)]
    pub alpha0: f64,
    #[arg(long, default_value_t = 1000)]
    pub tail: usize,
    #[arg(long, default_value_t = 0.05)]
    pub delta0: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also write the report as JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
}

impl TheoremArgs {
    pub fn config(&self) -> TheoremConfig {
        TheoremConfig {
            trials: self.trials,
            discovery: DiscoveryConfig {
                alpha: self.alpha,
                epsilon: self.epsilon,
                delta: self.delta,
                gamma: self.gamma,
                max_m: 22_000,
            },
            k0: self.k0,
            alpha0: self.alpha0,
            tail: self.tail,
            delta0: self.delta0,
            seed: self.seed,
            ..TheoremConfig::default()
        }
    }
}

pub fn cmd_discover(args: &DiscoverArgs) -> Result<ResultFile> {
    let case = load_case(&args.case.case, args.case.format)?;
    let program = build_dcopf(&case.network)?;
    let spec = args.dist.spec();
    let dist = make_distribution(&spec, &case.network)?;
    let config = args.stopping.config();
    let source = LpKeySource::new(&program, &dist)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let snapshot_path = args.out.join(SNAPSHOT_FILE);

    let mut run = if args.resume {
        let snap = read_json(&snapshot_path)?;
        Discovery::from_snapshot(snap, config, &source)?
    } else {
        Discovery::new(config, &source)?
    };
    let start = std::time::Instant::now();
    let mut steps = 0usize;
    while run.terminated_by().is_none() {
        run.step()?;
        steps += 1;
        let p = run.progress();
        if steps % 100 == 0 {
            log::info!("M={} W={} R={:.4} K={} samples={}", p.m, p.window, p.rate, p.observed, p.samples);
        }
        if args.checkpoint_every > 0 && steps % args.checkpoint_every == 0 {
            write_json_compact(&snapshot_path, &run.snapshot())?;
        }
    }
    write_json_compact(&snapshot_path, &run.snapshot())?;
    let mut result = run.result().expect("run terminated");
    result.metadata.wall_clock_secs = start.elapsed().as_secs_f64();
    if result.infeasible > 0 {
        log::info!("{} infeasible samples skipped", result.infeasible);
    }

    let labels = program.labels();
    let catalog: Vec<CatalogEntry> = result
        .observed
        .iter()
        .map(|k| CatalogEntry {
            rows: k.key.indices().collect(),
            labels: k.key.indices().map(|j| labels[j].clone()).collect(),
            count: k.count,
            frequency: k.frequency,
            first_seen: k.first_seen,
        })
        .collect();
    let file = ResultFile {
        version: SCHEMA_VERSION,
        case: CaseInfo::new(&case.name, &program),
        distribution: spec,
        result,
    };
    write_json(&args.out.join(RESULT_FILE), &file)?;
    write_json(&args.out.join(KEYS_FILE), &catalog)?;
    Ok(file)
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<EvalFile> {
    let result_path = resolve(&args.result, RESULT_FILE);
    let file: ResultFile = read_json(&result_path)?;
    let case = load_case(&args.case.case, args.case.format)?;
    let program = build_dcopf(&case.network)?;
    let info = CaseInfo::new(&case.name, &program);
    if info.fingerprint != file.case.fingerprint {
        bail!(
            "case mismatch: {} was produced for '{}', not for '{}'",
            result_path.display(),
            file.case.name,
            case.name
        );
    }
    let dist = make_distribution(&file.distribution, &case.network)?;
    let mode = if args.inequalities {
        ReductionMode::AsInequalities
    } else {
        ReductionMode::AsEqualities
    };
    let keys = file.result.keys();
    let report = evaluate_policy(&keys, &program, &dist, args.n_test, args.eval_seed, mode)?;
    let eval = EvalFile {
        version: SCHEMA_VERSION,
        case: file.case.clone(),
        distribution: file.distribution.clone(),
        k_m: keys.len(),
        report,
    };
    let out = match &args.out {
        Some(dir) => dir.clone(),
        None => result_path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    write_json(&out.join(EVAL_JSON), &eval)?;
    fs::write(out.join(EVAL_CSV), eval_csv(&file, &eval)?)?;
    Ok(eval)
}

fn eval_csv(file: &ResultFile, eval: &EvalFile) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "case", "distribution", "K_M", "M", "W_M", "R", "P(p*)", "n_test", "failures",
        "excluded_infeasible", "max_relative_gap",
    ])?;
    let r = &file.result;
    let rep = &eval.report;
    w.write_record([
        file.case.name.clone(),
        format!("{:?}", file.distribution.kind).to_lowercase(),
        r.k_observed().to_string(),
        r.m.to_string(),
        r.window.to_string(),
        fmt_rate(r.rate),
        fmt_rate(rep.success_probability),
        rep.n_test.to_string(),
        rep.failure_count.to_string(),
        rep.excluded_infeasible.to_string(),
        format!("{:e}", rep.max_relative_gap),
    ])?;
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn cmd_table(args: &TableArgs) -> Result<Table> {
    let inputs = args
        .runs
        .iter()
        .map(|p| {
            let result_path = resolve(p, RESULT_FILE);
            let result: ResultFile = read_json(&result_path)?;
            let eval_path = result_path.with_file_name(EVAL_JSON);
            let eval = if eval_path.exists() {
                Some(read_json(&eval_path)?)
            } else {
                None
            };
            Ok(TableInput { result, eval })
        })
        .collect::<Result<Vec<_>>>()?;
    let table = build_table(&inputs)?;
    if let Some(path) = &args.csv {
        fs::write(path, table.to_csv()?)?;
    }
    if let Some(path) = &args.markdown {
        fs::write(path, table.to_markdown())?;
    }
    Ok(table)
}

pub fn cmd_validate_theorems(args: &TheoremArgs) -> Result<TheoremReport> {
    let report = validate_theorems(&args.config())?;
    if let Some(path) = &args.json {
        write_json(path, &report)?;
    }
    Ok(report)
}

pub fn cmd_solve(args: &CaseArgs) -> Result<String> {
    let case = load_case(&args.case, args.format)?;
    let program = build_dcopf(&case.network)?;
    let solved = solve_for_sample(&program, &Sample::zeros(program.sample_len()))?;
    let mut out = String::new();
    writeln!(out, "objective {:.4} $/h", solved.solution.objective)?;
    for (g, p) in case
        .network
        .generators
        .iter()
        .zip(program.dispatch_mw(&solved.solution.point))
    {
        writeln!(out, "gen at bus {:>4}: {:>10.4} MW  [{}, {}]", g.bus, p, g.pmin_mw, g.pmax_mw)?;
    }
    writeln!(out, "binding:")?;
    for j in solved.key.indices() {
        writeln!(out, "  {}", program.labels()[j])?;
    }
    Ok(out)
}

pub fn cmd_ptdf(args: &CaseArgs) -> Result<String> {
    let case = load_case(&args.case, args.format)?;
    let ptdf = build_ptdf(&case.network)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["branch".to_string(), "from".into(), "to".into()];
    header.extend(ptdf.bus_ids.iter().map(|b| format!("bus {b}")));
    w.write_record(&header)?;
    for (l, (row, br)) in ptdf.entries.iter().zip(&case.network.branches).enumerate() {
        let mut rec = vec![(l + 1).to_string(), br.from.to_string(), br.to.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:.6}")));
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Discover(a) => {
            let file = cmd_discover(a)?;
            println!("{}", summary_line(&file));
        }
        Command::Evaluate(a) => {
            let eval = cmd_evaluate(a)?;
            let r = &eval.report;
            println!(
                "P(p*)={} failures={}/{}",
                fmt_rate(r.success_probability),
                r.failure_count,
                r.n_test
            );
        }
        Command::Table(a) => {
            let table = cmd_table(a)?;
            print!("{}", table.to_markdown());
        }
        Command::ValidateTheorems(a) => {
            let report = cmd_validate_theorems(a)?;
            println!("iteration bound {:.1}, largest M seen {}", report.iteration_bound, report.max_m_seen);
            for s in &report.suites {
                println!("{}", s.line());
            }
            if !report.passed() {
                bail!("a guarantee was violated beyond its confidence bound");
            }
        }
        Command::Solve(a) => print!("{}", cmd_solve(a)?),
        Command::Ptdf(a) => print!("{}", cmd_ptdf(a)?),
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match cli.jobs {
        Some(0) => bail!("--jobs must be at least 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(|| dispatch(&cli.command)),
        None => dispatch(&cli.command),
    }
}
