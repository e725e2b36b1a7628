//! Command-line front end: `verify`, `compute` and `describe`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::compute::run_compute;
use crate::config::{Experiment, Format, Grid, RunConfig};
use crate::describe::describe_fixture;
use crate::error::{EtherError, Result};
use crate::verify::run_verify;

/// Exit code of a configuration or I/O error.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code of a failed identity.
pub const EXIT_FAIL: i32 = 1;

#[derive(Parser, Debug)]
#[command(name = "etherphase", version, about = "Phase functions and membrane areas on chart-described symplectic manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every identity that applies to the fixture.
    Verify(Common),
    /// Evaluate one quantity over a grid.
    Compute {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        experiment: Option<ExperimentArg>,
    },
    /// Print fixture metadata and conventions.
    Describe {
        /// Fixture name (overrides --fixture).
        name: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    fixture: Option<String>,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// qmin:qmax:n,pmin:pmax:n
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExperimentArg {
    Phase,
    Triangle,
    Product,
    Chord,
    Groupoid,
    Torsion,
    Hj,
}

impl From<ExperimentArg> for Experiment {
    fn from(x: ExperimentArg) -> Self {
        match x {
            ExperimentArg::Phase => Experiment::Phase,
            ExperimentArg::Triangle => Experiment::Triangle,
            ExperimentArg::Product => Experiment::Product,
            ExperimentArg::Chord => Experiment::Chord,
            ExperimentArg::Groupoid => Experiment::Groupoid,
            ExperimentArg::Torsion => Experiment::Torsion,
            ExperimentArg::Hj => Experiment::Hj,
        }
    }
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_path(p)?,
            None => RunConfig::default(),
        };
        if let Some(f) = &self.fixture {
            cfg.fixture.name = f.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(g) = &self.grid {
            cfg.grid = Grid::parse(g)?;
        }
        if let Some(p) = &self.out {
            cfg.output.path = Some(p.clone());
        }
        if let Some(f) = self.format {
            cfg.output.format = match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Jsonl => Format::Jsonl,
            };
        }
        Ok(cfg)
    }
}

fn sink(cfg: &RunConfig, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let io = |e: std::io::Error| EtherError::Parameter(format!("output: {e}"));
    match &cfg.output.path {
        Some(p) => {
            let file = File::create(p).map_err(|e| EtherError::Parameter(format!("output {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w).map_err(io)?;
            w.flush().map_err(io)
        }
        None => f(stdout).map_err(io),
    }
}

/// Applies `ETHERPHASE_THREADS` to the global worker pool.
fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("ETHERPHASE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| EtherError::Parameter(format!("ETHERPHASE_THREADS=`{v}` is not a positive integer")))?;
    // A pool already built by an earlier call in the same process is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    configure_threads()?;
    match cli.command {
        Command::Verify(common) => {
            let cfg = common.config()?;
            let report = run_verify(&cfg)?;
            sink(&cfg, stdout, |w| report.write(w, cfg.output.format))?;
            let bad: Vec<&str> = report.records.iter().filter(|r| !r.ok()).map(|r| r.id.as_str()).collect();
            if !bad.is_empty() {
                let _ = writeln!(stderr, "failed identities on {}: {}", report.fixture, bad.join(", "));
            }
            Ok(report.exit_code())
        }
        Command::Compute { common, experiment } => {
            let mut cfg = common.config()?;
            if let Some(x) = experiment {
                cfg.experiment = x.into();
            }
            let table = run_compute(&cfg)?;
            sink(&cfg, stdout, |w| table.write(w, cfg.output.format))?;
            if table.failures() > 0 {
                let _ = writeln!(stderr, "{} of {} grid points failed (see reason column)", table.failures(), table.rows.len());
            }
            Ok(0)
        }
        Command::Describe { name, common } => {
            let mut cfg = common.config()?;
            if let Some(n) = name {
                cfg.fixture.name = n;
            }
            let text = describe_fixture(&cfg.fixture, &cfg.tolerances)?;
            sink(&cfg, stdout, |w| w.write_all(text.as_bytes()))?;
            Ok(0)
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_CONFIG
        }
    }
}
