//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 cap exceeded, 3 verification
//! mismatch or consistency error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::arrangement::{arrangement_from_json, arrangement_to_json, diagonal_arrangement, orbit_config_arrangement, Arrangement, MAX_SUPPORTED_ATOMS};
use crate::error::{Error, Result};
use crate::report::{betti_report, oracle_report, poset_report, ring_report, verify_report, Caps, Options};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "subcohom", version, about = "Mod-2 cohomology rings of real subspace arrangement complements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Write the report here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[arg(long, default_value_t = 24, global = true)]
    pub max_atoms: usize,
    #[arg(long, default_value_t = 200_000, global = true)]
    pub max_poset_nodes: usize,
    /// Cap on the total number of atom subsets enumerated for the basis.
    #[arg(long, default_value_t = 5_000_000, global = true)]
    pub max_block_dim: usize,
    /// Perturbations per class in the representative-independence audit.
    #[arg(long, default_value_t = 100, global = true)]
    pub audit_samples: usize,
    /// Worker threads; 0 picks the machine default.
    #[arg(long, default_value_t = 0, global = true)]
    pub jobs: usize,
    #[arg(long, default_value_t = 0x5EED, global = true)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a built-in arrangement as JSON.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Intersection poset: nodes, covers, Möbius values.
    Poset { file: PathBuf },
    /// Betti numbers from the cochain algebra.
    Betti { file: PathBuf },
    /// Cohomology ring: classes and nonzero structure constants.
    Ring { file: PathBuf },
    /// Betti numbers from order-complex homology.
    Oracle { file: PathBuf },
    /// Both pipelines, ring audits and their comparison.
    Verify { file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Orbit configuration space of n points in R^m under Z_2^m.
    OrbitConfig {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Ordinary configuration space of n points in R^k.
    Diagonal {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
}

impl GlobalArgs {
    fn options(&self) -> Result<Options> {
        if self.max_atoms == 0 || self.max_poset_nodes == 0 || self.max_block_dim == 0 {
            return Err(Error::Input("caps must be positive".into()));
        }
        if self.max_atoms > MAX_SUPPORTED_ATOMS {
            return Err(Error::Input(format!(
                "--max-atoms may not exceed {MAX_SUPPORTED_ATOMS}"
            )));
        }
        Ok(Options {
            caps: Caps {
                max_atoms: self.max_atoms,
                max_poset_nodes: self.max_poset_nodes,
                max_block_dim: self.max_block_dim,
            },
            audit_samples: self.audit_samples,
            seed: self.seed,
            ..Options::default()
        })
    }
}

fn read_arrangement(path: &Path) -> Result<Arrangement> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    arrangement_from_json(&text)
}

fn render<T: Serialize>(report: &T, text: impl FnOnce(&T) -> String, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => text(report),
    }
}

/// Output text and exit code of one command.
fn execute(cli: &Cli) -> Result<(String, i32)> {
    let g = &cli.global;
    let opts = g.options()?;
    let out = match &cli.command {
        Command::Gen(GenCommand::OrbitConfig { m, n }) => {
            arrangement_to_json(&orbit_config_arrangement(*m, *n, opts.caps.max_atoms)?) + "\n"
        }
        Command::Gen(GenCommand::Diagonal { k, n }) => {
            arrangement_to_json(&diagonal_arrangement(*k, *n, opts.caps.max_atoms)?) + "\n"
        }
        Command::Poset { file } => {
            let r = poset_report(&read_arrangement(file)?, &opts)?;
            render(&r, |r| r.to_text(), g.format)
        }
        Command::Betti { file } => {
            let r = betti_report(&read_arrangement(file)?, &opts)?;
            render(&r, |r| r.to_text(), g.format)
        }
        Command::Ring { file } => {
            let r = ring_report(&read_arrangement(file)?, &opts)?;
            render(&r, |r| r.to_text(), g.format)
        }
        Command::Oracle { file } => {
            let r = oracle_report(&read_arrangement(file)?, &opts)?;
            render(&r, |r| r.to_text(), g.format)
        }
        Command::Verify { file } => {
            let r = verify_report(&read_arrangement(file)?, &opts)?;
            let code = if r.passed() { 0 } else { 3 };
            return Ok((render(&r, |r| r.to_text(), g.format), code));
        }
    };
    Ok((out, 0))
}

/// Runs a parsed command inside a thread pool of the requested width and
/// writes its output. Returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(cli)) {
        Ok((text, code)) => {
            let written = match &cli.global.output {
                Some(path) => std::fs::write(path, &text)
                    .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display()))),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
