use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cofo_core::algorithms::AlgSpec;
use cofo_core::engine::{run_online, validate_trace};
use cofo_core::experiments::{
    emit_plotdata, identity_suite, rows_to_csv, rows_to_json, run_experiments, theorem_suite,
    ArrivalKind, ExperimentSpec, PlotAxes, ResultRow, Scale, SuiteReport, SUITES,
};
use cofo_core::instances::{FamilySpec, Instance};
use cofo_core::oracles::OptKind;
use cofo_core::{ArrivalOrder, Error, Mode, RunTrace};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cofo",
    version,
    about = "Online coalition formation experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiments (cross product of --instance × --alg) and emit result rows.
    Run(RunArgs),
    /// Run named verification suites; `all` runs every suite.
    Suite(SuiteArgs),
    /// Check the combinatorial identities used by the analysis.
    Identities,
    /// Generate an instance file.
    Gen(GenArgs),
    /// Record a trace, or validate an existing JSON-lines trace.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArrivalArg {
    Canonical,
    Worst,
    Random,
}

impl From<ArrivalArg> for ArrivalKind {
    fn from(a: ArrivalArg) -> Self {
        match a {
            ArrivalArg::Canonical => ArrivalKind::Canonical,
            ArrivalArg::Worst => ArrivalKind::Worst,
            ArrivalArg::Random => ArrivalKind::Random,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OptArg {
    Coalition,
    Matching,
}

#[derive(Args)]
struct RunArgs {
    /// Instance spec, e.g. `trap:k=4` (repeatable).
    #[arg(long = "instance", value_name = "SPEC")]
    instances: Vec<String>,
    /// Algorithm name, e.g. `gdy`, `dta:3/2` (repeatable).
    #[arg(long = "alg", value_name = "NAME")]
    algs: Vec<String>,
    /// JSON-lines file of experiment specs, appended after the cross product.
    #[arg(long, value_name = "FILE")]
    specs: Option<PathBuf>,
    #[arg(long, default_value = "standard")]
    mode: String,
    #[arg(long, value_enum, default_value = "canonical")]
    arrival: ArrivalArg,
    /// Monte Carlo trials for random arrival; omit to enumerate all orders.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Offline benchmark; defaults to matching for matching algorithms.
    #[arg(long, value_enum)]
    opt: Option<OptArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Record wall time per row (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
    /// Also write long-format plot data here.
    #[arg(long, value_name = "FILE")]
    plot: Option<PathBuf>,
    /// Plot axes as `series,x,y` field names.
    #[arg(long, default_value = "algorithm,n,ratio_f64")]
    plot_axes: String,
    /// Constant asymptote column for the plot data.
    #[arg(long)]
    asymptote: Option<f64>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Suite names, or `all`.
    #[arg(default_value = "all")]
    names: Vec<String>,
    /// Reduced sample sizes for a fast smoke run.
    #[arg(long)]
    quick: bool,
    /// List suite names and exit.
    #[arg(long)]
    list: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    instance: String,
    /// Algorithm the adversary family plays against.
    #[arg(long)]
    alg: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    instance: String,
    #[arg(long)]
    alg: String,
    #[arg(long, default_value = "standard")]
    mode: String,
    /// Comma-separated agent indices; defaults to the instance's order.
    #[arg(long)]
    order: Option<String>,
    /// Trace to validate; without it a fresh trace is written.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Errors that are the caller's fault exit with 2; everything else with 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::IllegalMove { .. }) | Some(Error::Algorithm { .. }) => 1,
        _ => 2,
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_mode(s: &str) -> anyhow::Result<Mode> {
    Ok(s.parse::<Mode>()?)
}

fn load_instance(spec: &str, alg: Option<&AlgSpec>) -> anyhow::Result<Instance> {
    let fam: FamilySpec = spec.parse()?;
    Ok(match (fam.needs_algorithm(), alg) {
        (true, Some(a)) => fam.generate_against(a.build().as_mut())?,
        (true, None) => bail!(Error::Parse(format!("{spec} needs --alg to play against"))),
        (false, _) => fam.generate()?,
    })
}

fn cmd_run(a: RunArgs) -> anyhow::Result<u8> {
    let mode = parse_mode(&a.mode)?;
    let mut specs = Vec::new();
    for inst in &a.instances {
        let instance: FamilySpec = inst.parse()?;
        for alg in &a.algs {
            let mut s = ExperimentSpec::new(instance.clone(), alg.parse()?);
            s.mode = mode;
            s.arrival = a.arrival.into();
            s.trials = a.trials;
            s.seed = a.seed;
            s.opt = a.opt.map(|o| match o {
                OptArg::Coalition => OptKind::Coalition,
                OptArg::Matching => OptKind::Matching,
            });
            specs.push(s);
        }
    }
    if let Some(path) = &a.specs {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            specs.push(
                ExperimentSpec::from_json(line)
                    .with_context(|| format!("{}:{}", path.display(), i + 1))?,
            );
        }
    }
    if specs.is_empty() {
        bail!(Error::Parse(
            "nothing to run: give --instance and --alg, or --specs".into()
        ));
    }
    let results = run_experiments(&specs, a.jobs, a.timing)?;
    let mut rows: Vec<ResultRow> = Vec::new();
    let mut code = 0;
    for (spec, r) in specs.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                eprintln!("error: {} with {}: {e}", spec.instance, spec.algorithm);
                let e = anyhow::Error::new(e);
                code = code.max(exit_code(&e));
            }
        }
    }
    for spec in &specs {
        if let Some(path) = &spec.out {
            let mine: Vec<ResultRow> = rows
                .iter()
                .filter(|r| {
                    r.instance == spec.instance.to_string()
                        && r.algorithm == spec.algorithm.to_string()
                })
                .cloned()
                .collect();
            fs::write(path, rows_to_csv(&mine))
                .with_context(|| format!("writing {}", path.display()))?;
        }
    }
    let text = match a.format {
        Format::Csv => rows_to_csv(&rows),
        Format::Json => rows_to_json(&rows) + "\n",
    };
    emit(a.out.as_deref(), &text)?;
    if let Some(path) = &a.plot {
        let parts: Vec<&str> = a.plot_axes.split(',').map(str::trim).collect();
        let [series, x, y] = parts[..] else {
            bail!(Error::Parse(format!(
                "--plot-axes wants series,x,y; got {:?}",
                a.plot_axes
            )));
        };
        let mut axes = PlotAxes::new(series, x, y);
        if let Some(v) = a.asymptote {
            axes = axes.with_asymptote(v);
        }
        fs::write(path, emit_plotdata(&rows, &axes)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(code)
}

fn print_report(r: &SuiteReport) -> bool {
    println!("{r}");
    r.passed()
}

fn cmd_suite(a: SuiteArgs) -> anyhow::Result<u8> {
    if a.list {
        for s in SUITES {
            println!("{s}");
        }
        return Ok(0);
    }
    let scale = if a.quick { Scale::Quick } else { Scale::Full };
    let names: Vec<String> = if a.names.iter().any(|n| n == "all") {
        SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        a.names
    };
    // validate every name before spending time on any suite
    for n in &names {
        if !SUITES.contains(&n.as_str()) {
            bail!(Error::Parse(format!(
                "unknown suite {n:?}; expected one of {}",
                SUITES.join(", ")
            )));
        }
    }
    let mut ok = true;
    for n in &names {
        ok &= print_report(&theorem_suite(n, scale)?);
    }
    Ok(if ok { 0 } else { 1 })
}

fn cmd_gen(a: GenArgs) -> anyhow::Result<u8> {
    let alg = a.alg.as_deref().map(str::parse::<AlgSpec>).transpose()?;
    let inst = load_instance(&a.instance, alg.as_ref())?;
    emit(a.out.as_deref(), &(inst.to_json() + "\n"))?;
    Ok(0)
}

fn cmd_replay(a: ReplayArgs) -> anyhow::Result<u8> {
    let mode = parse_mode(&a.mode)?;
    let alg: AlgSpec = a.alg.parse()?;
    let inst = load_instance(&a.instance, Some(&alg))?;
    let order = match &a.order {
        Some(s) => {
            let idx = s
                .split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("--order: {e}")))?;
            ArrivalOrder::from_indices(&idx)?
        }
        None => inst.order.clone(),
    };
    let Some(path) = &a.trace else {
        let trace = run_online(&inst.game, &order, alg.build().as_mut(), mode)?;
        emit(a.out.as_deref(), &trace.to_jsonl())?;
        return Ok(0);
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let recorded = RunTrace::from_jsonl(&text, &alg.to_string(), mode)?;
    let order = if a.order.is_some() {
        order
    } else {
        recorded.order()?
    };
    let report = validate_trace(&inst.game, &order, &recorded, mode);
    for v in &report.violations {
        println!("step {}: {}", v.step, v.message);
    }
    let fresh = run_online(&inst.game, &order, alg.build().as_mut(), mode)?;
    let same = fresh
        .steps
        .iter()
        .map(|s| &s.mv)
        .eq(recorded.steps.iter().map(|s| &s.mv));
    if !same {
        println!("trace differs from a fresh {alg} run");
    }
    let ok = report.is_valid() && same;
    println!(
        "{} {}: {} steps, final SW {}",
        if ok { "VALID" } else { "INVALID" },
        path.display(),
        recorded.steps.len(),
        recorded.final_welfare()
    );
    Ok(if ok { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Command::Run(a) => cmd_run(a),
        Command::Suite(a) => cmd_suite(a),
        Command::Identities => Ok(if print_report(&identity_suite()) {
            0
        } else {
            1
        }),
        Command::Gen(a) => cmd_gen(a),
        Command::Replay(a) => cmd_replay(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
