use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "invlab", version, about = "Regularized inversion experiments: tank, heat, Born/Rytov, CT")]
pub struct Cli {
    /// Seed for every random stream in the run.
    #[arg(long, global = true, value_parser = parse_count)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// File of `key=value` lines; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-parameter tank model: closed form and regularized CG.
    Tank(TankArgs),
    /// Backward heat conduction by spectral filtering.
    Heat(HeatArgs),
    /// Backward heat conduction by Landweber iteration.
    Landweber(LandweberArgs),
    /// Inverse Born series for the radial optical tomography model.
    Born(SeriesArgs),
    /// Inverse Rytov series for the same model.
    Rytov(SeriesArgs),
    /// Annulus CT: sinogram, noise and filtered back projection.
    Radon(RadonArgs),
    /// Spectral and optimization property checks with a pass/fail table.
    Svdcheck(SvdcheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Tank(_) => "tank",
            Command::Heat(_) => "heat",
            Command::Landweber(_) => "landweber",
            Command::Born(_) => "born",
            Command::Rytov(_) => "rytov",
            Command::Radon(_) => "radon",
            Command::Svdcheck(_) => "svdcheck",
        }
    }
}

#[derive(Debug, Args)]
pub struct TankArgs {
    /// Observed readings `A1,A2`.
    #[arg(long, allow_negative_numbers = true)]
    pub obs: Option<Pair>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Starting point `x,y`.
    #[arg(long, allow_negative_numbers = true)]
    pub init: Option<Pair>,
    #[arg(long)]
    pub kmax: Option<Count>,
    #[arg(long)]
    pub beta: Option<Beta>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub ell0: Option<f64>,
    #[arg(long)]
    pub jmax: Option<Count>,
}

#[derive(Debug, Args)]
pub struct HeatArgs {
    /// Final time `T`.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long)]
    pub modes: Option<Count>,
    #[arg(long)]
    pub nx: Option<Count>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Relative multiplicative noise level.
    #[arg(long, allow_negative_numbers = true)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub method: Option<Method>,
}

#[derive(Debug, Args)]
pub struct LandweberArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long)]
    pub modes: Option<Count>,
    #[arg(long)]
    pub nx: Option<Count>,
    /// Relaxation `ω` as a multiple of `1/‖K‖²`.
    #[arg(long, allow_negative_numbers = true)]
    pub omega_scale: Option<f64>,
    #[arg(long)]
    pub iterations: Option<Count>,
    #[arg(long, allow_negative_numbers = true)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    /// Background wavenumber.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Robin length.
    #[arg(long, allow_negative_numbers = true)]
    pub ell: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub radius: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub target_radius: Option<f64>,
    /// Target contrast.
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub nr: Option<Count>,
    #[arg(long)]
    pub ms: Option<Count>,
    #[arg(long)]
    pub nmax: Option<Count>,
    /// Singular values kept in the first-order pseudoinverse.
    #[arg(long)]
    pub rank: Option<Count>,
    /// Number of series terms.
    #[arg(long)]
    pub terms: Option<Count>,
}

#[derive(Debug, Args)]
pub struct RadonArgs {
    #[arg(long)]
    pub nphi: Option<Count>,
    #[arg(long)]
    pub ns: Option<Count>,
    #[arg(long, allow_negative_numbers = true)]
    pub smax: Option<f64>,
    #[arg(long)]
    pub nl: Option<Count>,
    #[arg(long, allow_negative_numbers = true)]
    pub taumax: Option<f64>,
    /// Noise level in units of `Φ_max/100`.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// Sinogram source.
    #[arg(long)]
    pub data: Option<DataSource>,
}

#[derive(Debug, Args)]
pub struct SvdcheckArgs {
    /// Random matrices per check.
    #[arg(long)]
    pub trials: Option<Count>,
}

/// Nonnegative integer that also accepts exponent notation such as `1e4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Count(pub usize);

impl FromStr for Count {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_count(s).and_then(|v| usize::try_from(v).map_err(|e| e.to_string())).map(Count)
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v >= 0.0 && v.fract() == 0.0 && v <= 9_007_199_254_740_992.0 {
        Ok(v as u64)
    } else {
        Err(format!("`{s}` is not a nonnegative integer"))
    }
}

/// Two reals written `a,b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair(pub f64, pub f64);

impl FromStr for Pair {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        Ok(Pair(num(a)?, num(b)?))
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

macro_rules! text_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
        pub enum $name {
            $(#[value(name = $text)] $variant),+
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                <$name as ValueEnum>::from_str(s.trim(), true)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($name::$variant => $text),+ })
            }
        }
    };
}

text_enum!(Beta { Prp => "prp", Fr => "fr", Hs => "hs" });
text_enum!(Method { Tikhonov => "tikhonov", Truncated => "truncated" });
text_enum!(DataSource { Analytic => "analytic", Numeric => "numeric" });
