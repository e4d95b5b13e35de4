//! Command-line driver: one subcommand per experiment, seeded noise, CSV and
//! PGM artifacts, and a JSON manifest per run.
//!
//! Exit codes: 0 on success, 2 on usage errors (bad flags, values out of
//! range, malformed config), 1 on numerical or I/O failure.

mod args;
mod commands;
mod config;
pub mod output;
mod svdcheck;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use thiserror::Error;

pub use output::{emit_csv, emit_pgm, read_csv, RunManifest};

use args::{Cli, Count};
use config::{read_config, Resolver};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUT: &str = "./out";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

/// Maps a library error to a usage error if it reports a bad parameter, and
/// to a numerical failure otherwise.
macro_rules! classify {
    ($($ty:ty => [$($usage:pat),*]),+ $(,)?) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                #[allow(unreachable_patterns)]
                match e {
                    $($usage)|* => CliError::Usage(e.to_string()),
                    _ => CliError::Numerical(e.to_string()),
                }
            }
        })+
    };
}

classify! {
    invlab::heat1d::HeatError => [
        invlab::heat1d::HeatError::InvalidParameter(_),
        invlab::heat1d::HeatError::Spectral(invlab::spectral::SpectralError::InvalidParameter(_))
    ],
    invlab::tank::TankError => [invlab::tank::TankError::InvalidParameter(_)],
    invlab::born::BornError => [invlab::born::BornError::InvalidConfig(_), invlab::born::BornError::InvalidArgument(_)],
    invlab::radon::RadonError => [invlab::radon::RadonError::InvalidParameter(_)],
    invlab::optim::OptimError => [invlab::optim::OptimError::InvalidParameter(_), invlab::optim::OptimError::StepTooLarge { .. }],
    invlab::spectral::SpectralError => [invlab::spectral::SpectralError::InvalidParameter(_)],
}

/// Output directory plus the artifacts written so far.
pub(crate) struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self { dir, written: Vec::new() })
    }

    pub(crate) fn csv(&mut self, name: &str, columns: &[(&str, &[f64])]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        emit_csv(&path, columns).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub(crate) fn pgm(&mut self, name: &str, img: &invlab::radon::ImageGrid) -> Result<(), CliError> {
        let path = self.dir.join(name);
        emit_pgm(&path, img).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        self.written.push(output::scale_path(Path::new(name)).to_string_lossy().into_owned());
        Ok(())
    }
}

/// Parses `argv` (program name first), runs one subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("invlab: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => read_config(path)?,
        None => Default::default(),
    };
    let mut resolver = Resolver::new(config);
    let seed = resolver.take("seed", cli.seed.map(|s| Count(s as usize)), Count(DEFAULT_SEED as usize))?.0 as u64;
    let out =
        resolver.take("out", cli.out.clone().map(|p| p.to_string_lossy().into_owned()), DEFAULT_OUT.to_string())?;
    let plan = commands::plan(&cli.command, &mut resolver)?;
    let mut parameters = resolver.finish()?;
    // seed and out are recorded separately
    parameters.retain(|(k, _)| k != "seed" && k != "out");

    let mut outputs = Outputs::new(PathBuf::from(&out))?;
    let start = Instant::now();
    let result = plan.run(seed, &mut outputs);
    let manifest = RunManifest {
        subcommand: cli.command.name().to_string(),
        parameters,
        seed,
        out: PathBuf::from(&out),
        duration_seconds: start.elapsed().as_secs_f64(),
        artifacts: outputs.written.clone(),
        status: match &result {
            Ok(()) => "ok".to_string(),
            Err(e) => e.to_string(),
        },
    };
    manifest.write(&outputs.dir).map_err(|e| CliError::io(&outputs.dir, e))?;
    result
}
