mod output;
mod settings;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand};
use gauss_distill::protocol::{
    figure3_data, figure4_data, nested_protocol, InitialState, ProtocolConfig, QSchedule,
};
use gauss_distill::{StageReport, Tolerances};

use output::{Cell, LeakageSummary, Manifest, Table};
use settings::{Command, Settings};

const JOBS_ENV: &str = "GAUSS_DISTILL_JOBS";

#[derive(Parser)]
#[command(name = "gauss-distill", version, about = "Gaussian entanglement distillation by de-Gaussification")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the invariant suites; exit 1 if any fails.
    Validate(Flags),
    /// One de-Gaussification + Gaussification stage.
    Stage(Flags),
    /// Chain stages with q tuned per stage.
    Nested(Flags),
    /// ε after N stages over a grid of input ε.
    Figure3(Flags),
    /// Purity and entanglement of formation per stage over a T grid.
    Figure4(Flags),
}

#[derive(Args)]
struct Flags {
    /// Two-mode squeezing of the input (stage, nested) or held fixed (figure4).
    #[arg(long)]
    r: Option<f64>,
    /// Channel transmittance; a start:stop:step grid for figure4.
    #[arg(long = "T")]
    t: Option<String>,
    /// Covariance entry C; overrides r and T together with S.
    #[arg(long = "C")]
    c: Option<f64>,
    #[arg(long = "S")]
    s: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// `auto`, or a comma-separated value per stage.
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    target_r: Option<f64>,
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    cutoff: Option<usize>,
    /// start:stop:step grid of input ε.
    #[arg(long)]
    eps: Option<String>,
    /// Also iterate Gaussification in Fock space and report the distance.
    #[arg(long)]
    brute_force: bool,
    /// Worker threads; defaults to $GAUSS_DISTILL_JOBS, then all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// `key = value` file or a previous run's manifest.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; CSV goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, Option<String>)> {
        let s = |v: Option<f64>| v.map(|x| x.to_string());
        vec![
            ("r", s(self.r)),
            ("T", self.t.clone()),
            ("C", s(self.c)),
            ("S", s(self.s)),
            ("lambda", s(self.lambda)),
            ("q", self.q.clone()),
            ("target_r", s(self.target_r)),
            ("stages", self.stages.map(|v| v.to_string())),
            ("cutoff", self.cutoff.map(|v| v.to_string())),
            ("eps", self.eps.clone()),
            ("brute_force", self.brute_force.then(|| "true".to_string())),
            ("jobs", self.jobs.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ]
    }
}

enum Failure {
    Usage(String),
    Run(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Run(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match &cli.command {
        Cmd::Validate(f) => (Command::Validate, f),
        Cmd::Stage(f) => (Command::Stage, f),
        Cmd::Nested(f) => (Command::Nested, f),
        Cmd::Figure3(f) => (Command::Figure3, f),
        Cmd::Figure4(f) => (Command::Figure4, f),
    };
    match run(command, flags) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let mut cmd = Cli::command();
            let sub = cmd.find_subcommand_mut(command.name()).expect("subcommand").clone();
            eprintln!("error: {msg}\n\n{}", sub.bin_name(format!("gauss-distill {}", command.name())).render_usage());
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn jobs(settings: &Settings) -> Result<usize, Failure> {
    if settings.raw("jobs").is_some() {
        return settings.usize("jobs").map_err(usage);
    }
    match std::env::var(JOBS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("{JOBS_ENV} = {v:?} is not an integer"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn run(command: Command, flags: &Flags) -> Result<ExitCode, Failure> {
    let file = match &flags.config {
        Some(path) => {
            let manifest_command = read_manifest_command(path);
            if let Some(other) = manifest_command.filter(|c| c != command.name()) {
                return Err(usage(format!("manifest was written by `{other}`, not `{}`", command.name())));
            }
            Some(settings::read_config(path).map_err(usage)?)
        }
        None => None,
    };
    let settings = Settings::resolve(command, file, &flags.pairs()).map_err(usage)?;
    let jobs = jobs(&settings)?;
    if jobs == 0 {
        return Err(usage("jobs must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let out = settings.raw("out").map(PathBuf::from);
    pool.install(|| execute(&settings, out.as_deref()))
}

fn read_manifest_command(path: &Path) -> Option<String> {
    let text = std::fs::read_to_string(path).ok()?;
    let value: serde_json::Value = serde_json::from_str(&text).ok()?;
    value.get("command")?.as_str().map(str::to_string)
}

fn execute(settings: &Settings, out: Option<&Path>) -> Result<ExitCode, Failure> {
    let tol = Tolerances::default();
    let start = Instant::now();
    let (body, leakage, code) = match settings.command() {
        Command::Validate => {
            let lambda = settings.f64("lambda").map_err(usage)?;
            let cutoff = settings.usize("cutoff").map_err(usage)?;
            let results = validate::run_all(lambda, cutoff, &tol);
            for c in &results {
                println!("[{}] {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = results.iter().filter(|c| !c.pass).count();
            println!("{} of {} checks passed", results.len() - failed, results.len());
            let code = if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) };
            if out.is_none() {
                return Ok(code);
            }
            let mut json = serde_json::to_string_pretty(&results)?;
            json.push('\n');
            (json, None, code)
        }
        Command::Stage | Command::Nested => {
            let config = protocol_config(settings)?;
            let reports = nested_protocol(&config)?;
            for rep in &reports {
                if let Some(bf) = &rep.brute_force {
                    eprintln!(
                        "stage {}: brute force {} iterations (converged: {}), covariance distance {:.3e}",
                        rep.stage, bf.iterations, bf.converged, bf.covariance_distance
                    );
                }
            }
            let max = reports.iter().map(|r| r.leakage).fold(0.0, f64::max);
            let summary = LeakageSummary {
                max,
                rows: reports.len(),
            };
            (stage_table(&reports).render(), Some(summary), ExitCode::SUCCESS)
        }
        Command::Figure3 => {
            let grid = settings.grid("eps").map_err(usage)?;
            if let Some(bad) = grid.iter().find(|e| !(0.0..1.0).contains(*e)) {
                return Err(usage(format!("ε_in = {bad} outside [0, 1)")));
            }
            let stages = settings.usize("stages").map_err(usage)?;
            let rows = figure3_data(&grid, stages)
                .into_iter()
                .map(|row| vec![Cell::Num(row.eps_in), Cell::Int(row.n as u64), Cell::Num(row.eps_out)])
                .collect();
            let table = Table {
                header: "eps_in,N,eps_out",
                rows,
            };
            (table.render(), None, ExitCode::SUCCESS)
        }
        Command::Figure4 => {
            let grid = settings.grid("T").map_err(usage)?;
            let r = settings.f64("r").map_err(usage)?;
            let stages = settings.usize("stages").map_err(usage)?;
            let cutoff = settings.usize("cutoff").map_err(usage)?;
            let data = figure4_data(&grid, stages, r, cutoff, &tol)?;
            let summary = LeakageSummary {
                max: data.iter().map(|row| row.leakage).fold(0.0, f64::max),
                rows: data.len(),
            };
            let rows = data
                .iter()
                .map(|row| vec![Cell::Num(row.t), Cell::Int(row.n as u64), Cell::Num(row.purity), Cell::Num(row.eof)])
                .collect();
            let table = Table {
                header: "T,N,purity,eof",
                rows,
            };
            (table.render(), Some(summary), ExitCode::SUCCESS)
        }
    };
    output::emit(out, &body)?;
    if let Some(path) = out {
        let manifest = Manifest {
            command: settings.command().name().to_string(),
            config: settings.recorded(),
            versions: output::versions(),
            tolerances: tol,
            outputs: vec![path.to_path_buf()],
            wall_clock_seconds: start.elapsed().as_secs_f64(),
            leakage,
        };
        output::write_manifest(path, &manifest)?;
    }
    Ok(code)
}

fn protocol_config(settings: &Settings) -> Result<ProtocolConfig, Failure> {
    let stages = match settings.command() {
        Command::Stage => 1,
        _ => settings.usize("stages").map_err(usage)?,
    };
    let initial = match (settings.raw("C"), settings.raw("S")) {
        (None, None) => InitialState::Channel {
            r: settings.f64("r").map_err(usage)?,
            t: settings.f64("T").map_err(usage)?,
        },
        (Some(_), Some(_)) => InitialState::Covariance {
            c: settings.f64("C").map_err(usage)?,
            s: settings.f64("S").map_err(usage)?,
        },
        _ => return Err(usage("C and S must be given together")),
    };
    let q = match settings.raw("q") {
        None | Some("auto") => QSchedule::Auto,
        Some(list) => QSchedule::Explicit(
            list.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| usage(format!("bad q value {v:?}"))))
                .collect::<Result<_, _>>()?,
        ),
    };
    let config = ProtocolConfig {
        initial,
        stages,
        target_r: settings.f64("target_r").map_err(usage)?,
        q,
        cutoff: settings.usize("cutoff").map_err(usage)?,
        tolerances: Tolerances::default(),
        brute_force: settings.bool("brute_force").map_err(usage)?,
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn stage_table(reports: &[StageReport]) -> Table {
    let rows = reports
        .iter()
        .map(|rep| {
            let o = &rep.output;
            vec![
                Cell::Int(rep.stage as u64),
                Cell::Num(rep.q),
                Cell::Num(o.c),
                Cell::Num(o.s),
                Cell::Num(o.r),
                Cell::Num(o.t),
                Cell::Num(o.epsilon),
                Cell::Num(o.purity),
                Cell::Num(o.eof),
                Cell::Num(rep.weight),
                Cell::Num(rep.leakage),
            ]
        })
        .collect();
    Table {
        header: "stage,q,C,S,r,T,epsilon,purity,eof,weight,leakage",
        rows,
    }
}
