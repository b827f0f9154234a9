use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use pointproc::cluster::{DEFAULT_HOT_THRESHOLD, MIN_SCAN_SIMULATIONS};

#[derive(Debug, Parser)]
#[command(name = "pointproc", version, about = "Simulate and analyse temporal and spatial point processes")]
pub struct Cli {
    /// Base seed for every random stream
    #[arg(long, global = true, env = "POINTPROC_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Output directory (created if missing)
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Worker threads for Monte Carlo replicates; outputs do not depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Re-run the command recorded in a manifest, with its seed
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Simulate a temporal process or a CSR pattern
    #[command(subcommand)]
    Simulate(Simulate),
    /// Compute a pattern statistic
    #[command(subcommand)]
    Analyze(Analyze),
    /// Locate clusters
    #[command(subcommand)]
    Detect(Detect),
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Simulate {
    /// Homogeneous Poisson process on (0, horizon]
    #[command(allow_negative_numbers = true)]
    Hpp {
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        horizon: f64,
    },
    /// Non-homogeneous Poisson process by piecewise thinning
    #[command(allow_negative_numbers = true)]
    Nhpp(NhppArgs),
    /// Hawkes process with exponential kernel alpha * exp(-beta t)
    #[command(allow_negative_numbers = true)]
    Hawkes {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        horizon: f64,
    },
    /// Complete spatial randomness on a rectangle
    #[command(allow_negative_numbers = true)]
    Csr {
        #[arg(long)]
        rate: f64,
        #[command(flatten)]
        region: RegionArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityKind {
    Constant,
    Piecewise,
    Sinusoid,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct NhppArgs {
    #[arg(long)]
    pub horizon: f64,
    #[arg(long, value_enum)]
    pub intensity: IntensityKind,
    /// Constant rate
    #[arg(long)]
    pub rate: Option<f64>,
    /// Piecewise breakpoints, comma separated, from 0 to at least the horizon
    #[arg(long, value_delimiter = ',')]
    pub breakpoints: Vec<f64>,
    /// Piecewise rates, one per interval
    #[arg(long, value_delimiter = ',')]
    pub rates: Vec<f64>,
    #[arg(long)]
    pub base: Option<f64>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub period: Option<f64>,
    /// Envelope segments for the sinusoid
    #[arg(long, default_value_t = 32)]
    pub segments: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RegionArg {
    /// Study rectangle as xmin,xmax,ymin,ymax
    #[arg(long = "region", value_delimiter = ',', allow_hyphen_values = true, default_value = "0,1,0,1")]
    pub region: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PatternInput {
    /// `x,y` CSV or GeoJSON point file
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub region: RegionArg,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GridArgs {
    #[arg(long)]
    pub nx: usize,
    #[arg(long)]
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CurveArgs {
    #[command(flatten)]
    pub pattern: PatternInput,
    /// Comma list `r1,r2,...` or range `start:end:count`
    #[arg(long)]
    pub radii: String,
    /// Add a CSR envelope from this many replicates
    #[arg(long)]
    pub envelope: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    None,
    Border,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analyze {
    /// Kernel density surface
    #[command(allow_negative_numbers = true)]
    Kde {
        #[command(flatten)]
        pattern: PatternInput,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        bandwidth: f64,
    },
    /// Nearest-neighbour distance CDF
    #[command(allow_negative_numbers = true)]
    G {
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// Empty-space distance CDF over a probe grid
    #[command(allow_negative_numbers = true)]
    F {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, default_value_t = 50)]
        probe_nx: usize,
        #[arg(long, default_value_t = 50)]
        probe_ny: usize,
    },
    /// Ripley's K
    #[command(allow_negative_numbers = true)]
    K {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, value_enum, default_value_t = Correction::None)]
        correction: Correction,
    },
    /// Nearest-neighbour index
    #[command(allow_negative_numbers = true)]
    Nni {
        #[command(flatten)]
        pattern: PatternInput,
    },
    /// Quadrat counts with the chi-square test
    #[command(allow_negative_numbers = true)]
    Quadrat {
        #[command(flatten)]
        pattern: PatternInput,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Variance-to-mean ratio at several block sizes
    #[command(allow_negative_numbers = true)]
    Dispersion {
        #[command(flatten)]
        pattern: PatternInput,
        #[command(flatten)]
        grid: GridArgs,
        /// Block sizes, each dividing nx and ny
        #[arg(long, value_delimiter = ',', default_value = "1")]
        blocks: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detect {
    /// Getis-Ord Gi* z-scores on a count grid
    #[command(allow_negative_numbers = true)]
    Gistar {
        #[command(flatten)]
        pattern: PatternInput,
        #[command(flatten)]
        grid: GridArgs,
        /// Neighbour distance between cell centres
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = DEFAULT_HOT_THRESHOLD)]
        threshold: f64,
    },
    /// Space-time scan statistic
    #[command(allow_negative_numbers = true)]
    Scan(ScanArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ScanArgs {
    /// `x,y,t` CSV or GeoJSON with a `t` property
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub region: RegionArg,
    #[arg(long)]
    pub horizon: f64,
    /// Centre lattice columns
    #[arg(long)]
    pub nx: usize,
    /// Centre lattice rows
    #[arg(long)]
    pub ny: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub radii: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub durations: Vec<f64>,
    /// Start times are multiples of horizon / slices
    #[arg(long)]
    pub slices: usize,
    #[arg(long, value_parser = clap::value_parser!(u64).range(MIN_SCAN_SIMULATIONS as u64..))]
    pub nsim: u64,
    /// Population CSV `slice,cell_x,cell_y,value`; uniform when absent
    #[arg(long, requires_all = ["baseline_nx", "baseline_ny"])]
    pub baseline: Option<PathBuf>,
    #[arg(long)]
    pub baseline_nx: Option<usize>,
    #[arg(long)]
    pub baseline_ny: Option<usize>,
}
