use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use splitflow::discrete::StopKind;
use splitflow::harness::{
    builtin_rows, cmd_ode_compare, cmd_run, cmd_sweep, cmd_table, cmd_verify, parse_point, parse_schedule, GridSpec,
    HarnessError, OdeCompareConfig, RunConfig, TableSettings,
};
use splitflow::objective::ObjectiveSpec;

#[derive(Parser)]
#[command(
    name = "splitflow",
    version,
    about = "Inertial gradient methods: runs, sweeps, table reproductions and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method and write its trajectory.
    Run(RunArgs),
    /// Cartesian parameter sweep for one schedule family.
    Sweep(SweepArgs),
    /// Re-run the published case rows.
    Table(TableArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// Compare the first-order and second-order integrations.
    OdeCompare(OdeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StopArg {
    ConsecutiveF,
    KnownMinF,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    objective: Option<String>,
    #[arg(long)]
    algorithm: Option<String>,
    /// `label[:key=value,...]`, e.g. `e24:mu=0.01,a=4,b=10`.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated starting point.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, value_enum)]
    stop: Option<StopArg>,
    /// Hessian damping weight for the IGAHD-type methods.
    #[arg(long)]
    beta: Option<f64>,
    /// Friction for `pim`.
    #[arg(long)]
    friction: Option<f64>,
    /// Only stop once `n > N`.
    #[arg(long)]
    require_threshold: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON grid; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `e24`, `e25` or `e26`.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    objective: Option<String>,
    /// Comma-separated values.
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Also scan for the step size that best matches each published `N₂`.
    #[arg(long)]
    infer_s: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(default_value = "")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OdeArgs {
    #[arg(long)]
    objective: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn objective(name: &str) -> Result<ObjectiveSpec, HarnessError> {
    Ok(ObjectiveSpec::parse_name(name)?)
}

fn write_out(dir: &Option<PathBuf>, name: &str, bytes: &[u8]) -> Result<(), HarnessError> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|source| HarnessError::Io { path: d.clone(), source })?;
            let p = d.join(name);
            std::fs::write(&p, bytes).map_err(|source| HarnessError::Io { path: p.clone(), source })?;
            println!("file: {}", p.display());
        }
        None => print!("{}", String::from_utf8_lossy(bytes)),
    }
    Ok(())
}

fn load<T: serde::de::DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T, HarnessError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|source| HarnessError::Io { path: Path::new(p).into(), source })?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn run_cmd(a: RunArgs) -> Result<ExitCode, HarnessError> {
    let mut c: RunConfig = load(&a.config)?;
    let algorithm_given = a.algorithm.is_some();
    if let Some(v) = &a.objective {
        c.objective = objective(v)?;
    }
    if let Some(v) = a.algorithm {
        c.algorithm = v;
    }
    if let Some(v) = &a.schedule {
        c.schedule = Some(parse_schedule(v)?);
        if !algorithm_given && c.algorithm == RunConfig::default().algorithm {
            c.algorithm = "lt-s-igahd".into();
        }
    }
    if let Some(v) = a.s {
        c.s = v;
    }
    if let Some(v) = a.alpha {
        c.alpha = v;
    }
    if let Some(v) = &a.x0 {
        c.x0 = parse_point(v)?;
    }
    if let Some(v) = a.epsilon {
        c.epsilon = v;
    }
    if let Some(v) = a.max_iter {
        c.max_iter = v;
    }
    if let Some(v) = a.stop {
        c.stop_kind = match v {
            StopArg::ConsecutiveF => StopKind::ConsecutiveF,
            StopArg::KnownMinF => StopKind::KnownMinF,
        };
    }
    if let Some(v) = a.beta {
        c.beta = v;
    }
    if let Some(v) = a.friction {
        c.friction = v;
    }
    if a.require_threshold {
        c.require_threshold = true;
    }
    if let Some(v) = a.seed {
        c.seed = v;
    }
    if a.out.is_some() {
        c.out_dir = a.out;
    }
    let art = cmd_run(&c)?;
    print!("{}", art.summary.to_text());
    Ok(ExitCode::SUCCESS)
}

fn list(text: &str) -> Result<Vec<f64>, HarnessError> {
    parse_point(text)
}

fn sweep_cmd(a: SweepArgs) -> Result<ExitCode, HarnessError> {
    let mut g: GridSpec = load(&a.config)?;
    if let Some(v) = a.schedule {
        g.example = v;
    }
    if let Some(v) = &a.objective {
        g.objective = objective(v)?;
    }
    if let Some(v) = &a.mu {
        g.mu = list(v)?;
    }
    if let Some(v) = &a.a {
        g.a = list(v)?;
    }
    if let Some(v) = &a.b {
        g.b = list(v)?;
    }
    if let Some(v) = &a.beta {
        g.beta = list(v)?;
    }
    if let Some(v) = a.s {
        g.s = v;
    }
    if let Some(v) = a.alpha {
        g.alpha = v;
    }
    if let Some(v) = &a.x0 {
        g.x0 = parse_point(v)?;
    }
    if let Some(v) = a.epsilon {
        g.epsilon = v;
    }
    if let Some(v) = a.max_iter {
        g.max_iter = v;
    }
    if let Some(v) = a.workers {
        g.workers = v;
    }
    let (cells, bytes) = cmd_sweep(&g)?;
    write_out(&a.out, "sweep.csv", &bytes)?;
    let flagged = cells.iter().filter(|c| !c.admissible).count();
    eprintln!("cells: {}, flagged: {flagged}", cells.len());
    Ok(ExitCode::SUCCESS)
}

fn table_cmd(a: TableArgs) -> Result<ExitCode, HarnessError> {
    let mut t = TableSettings::default();
    if let Some(v) = a.s {
        t.s = v;
    }
    if let Some(v) = a.alpha {
        t.alpha = v;
    }
    if let Some(v) = &a.x0 {
        t.x0 = parse_point(v)?;
    }
    if let Some(v) = a.epsilon {
        t.epsilon = v;
    }
    if let Some(v) = a.max_iter {
        t.max_iter = v;
    }
    t.infer_s = a.infer_s;
    let (_, bytes) = cmd_table(&builtin_rows(), &t)?;
    write_out(&a.out, "table.csv", &bytes)?;
    Ok(ExitCode::SUCCESS)
}

fn verify_cmd(a: VerifyArgs) -> Result<ExitCode, HarnessError> {
    let rep = cmd_verify(&a.suite, a.seed)?;
    let text = rep.to_text();
    write_out(&a.out, "verify.txt", text.as_bytes())?;
    if a.out.is_some() {
        print!("{text}");
    }
    Ok(if rep.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn ode_cmd(a: OdeArgs) -> Result<ExitCode, HarnessError> {
    let mut c = OdeCompareConfig::default();
    if let Some(v) = &a.objective {
        c.objective = objective(v)?;
    }
    if let Some(v) = a.alpha {
        c.alpha = v;
    }
    if let Some(v) = a.beta {
        c.beta = v;
    }
    if let Some(v) = a.t0 {
        c.t0 = v;
    }
    if let Some(v) = a.t1 {
        c.t1 = v;
    }
    if let Some(v) = a.dt {
        c.dt = v;
    }
    if let Some(v) = &a.x0 {
        c.x0 = parse_point(v)?;
        c.xdot0 = vec![0.0; c.x0.len()];
    }
    let (rep, bytes) = cmd_ode_compare(&c)?;
    write_out(&a.out, "ode_compare.csv", &bytes)?;
    if let Some(o) = rep.min_order() {
        eprintln!("min observed order: {o:.3}");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Table(a) => table_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::OdeCompare(a) => ode_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
