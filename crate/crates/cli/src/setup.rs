//! Shared flag groups, error kinds and tile-table handling.

use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, ValueEnum};
use tailforge::rng::parse_seed;
use tailforge::tiler::{read_table, write_table};
use tailforge::validate::Report;
use tailforge::{
    build_tile_table, MlParams, RegionSpec, StableParams, TileTable, TilerConfig, TilerError, TransformMap, DEFAULT_SEED,
};

use crate::{SeedArgs, TableArgs};

/// Why a command stopped; each kind has its own exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or parameters: exit 2.
    Invalid(String),
    /// No part of the unit square maps into the region: exit 3.
    Unreachable(String),
    /// I/O or sampling failure: exit 1.
    Runtime(String),
    /// Checks that did not pass: exit 1.
    Checks(Vec<String>),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Unreachable(_) => 3,
            Failure::Runtime(_) | Failure::Checks(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "invalid arguments: {m}"),
            Failure::Unreachable(m) => write!(f, "{m}"),
            Failure::Runtime(m) => write!(f, "{m}"),
            Failure::Checks(names) => write!(f, "failed checks: {}", names.join(", ")),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dist {
    Stable,
    Ml,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[arg(long, value_enum)]
    pub dist: Dist,
    /// Stability index in (0, 2], or Mittag-Leffler index in (0, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Stable skewness, default 0.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Stable scale, default 1.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Stable location, default 0.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
}

impl DistArgs {
    pub fn map(&self) -> Result<TransformMap, Failure> {
        let invalid = |e: &dyn fmt::Display| Failure::Invalid(e.to_string());
        match self.dist {
            Dist::Stable => StableParams::new(
                self.alpha,
                self.beta.unwrap_or(0.0),
                self.gamma.unwrap_or(1.0),
                self.delta.unwrap_or(0.0),
            )
            .map(TransformMap::Stable)
            .map_err(|e| invalid(&e)),
            Dist::Ml => {
                if self.beta.is_some() || self.gamma.is_some() || self.delta.is_some() {
                    return Err(Failure::Invalid("--beta, --gamma and --delta apply to --dist stable only".into()));
                }
                MlParams::new(self.alpha).map(TransformMap::MittagLeffler).map_err(|e| invalid(&e))
            }
        }
    }
}

/// `key=value` description of a map, as used in headers and reports.
pub fn describe(map: &TransformMap) -> String {
    match map {
        TransformMap::Stable(p) => format!(
            "dist=stable alpha={} beta={} gamma={} delta={}",
            p.alpha(),
            p.beta(),
            p.gamma(),
            p.delta()
        ),
        TransformMap::MittagLeffler(p) => format!("dist=ml alpha={}", p.alpha()),
    }
}

#[derive(Debug, Args)]
pub struct TilerArgs {
    /// Upper bound on the rejection rate the tile table must reach.
    #[arg(long, default_value_t = 0.01)]
    pub target_rejection: f64,
    /// Deepest refinement level.
    #[arg(long, default_value_t = 20)]
    pub max_level: u32,
}

impl TilerArgs {
    pub fn config(&self) -> TilerConfig {
        TilerConfig::new(self.target_rejection, self.max_level)
    }
}

pub fn region(text: Option<&str>) -> Result<RegionSpec, Failure> {
    match text {
        None => Ok(RegionSpec::full_line()),
        Some(t) => t.parse().map_err(|e: tailforge::RegionError| Failure::Invalid(e.to_string())),
    }
}

pub fn seed(args: &SeedArgs) -> Result<u32, Failure> {
    match &args.seed {
        None => Ok(DEFAULT_SEED),
        Some(text) => parse_seed(text).map_err(|e| Failure::Invalid(e.to_string())),
    }
}

/// Builds without the warning for an unconverged table.
pub fn build_quiet(map: &TransformMap, region: &RegionSpec, config: &TilerConfig) -> Result<TileTable, Failure> {
    build_tile_table(map, region, config).map_err(|e| match e {
        TilerError::EmptyRegion => Failure::Unreachable(format!("{e} (region {region})")),
        TilerError::InvalidConfig(_) => Failure::Invalid(e.to_string()),
    })
}

pub fn build(map: &TransformMap, region: &RegionSpec, config: &TilerConfig) -> Result<TileTable, Failure> {
    let table = build_quiet(map, region, config)?;
    if !table.converged() {
        eprintln!(
            "tailforge: warning: tile table stopped at level {} with estimated rejection {:.4}, above the target {}",
            table.level(),
            table.est_rejection(),
            config.target_rejection
        );
    }
    Ok(table)
}

/// Loads the cached table if it was built for the same map and region and
/// meets the target; otherwise builds one and, with a cache path, saves it.
pub fn table(
    map: &TransformMap,
    region: &RegionSpec,
    tiler: &TilerArgs,
    cache: Option<&Path>,
) -> Result<Arc<TileTable>, Failure> {
    let config = tiler.config();
    if let Some(path) = cache.filter(|p| p.exists()) {
        let file = File::open(path)?;
        match read_table(BufReader::new(file)) {
            Ok(t) if t.map() == map && t.region() == region && t.est_rejection() <= config.target_rejection => {
                return Ok(Arc::new(t));
            }
            Ok(_) => {}
            Err(e) => eprintln!("tailforge: warning: ignoring unreadable table {}: {e}", path.display()),
        }
    }
    let t = build(map, region, &config)?;
    if let Some(path) = cache {
        save(&t, path)?;
    }
    Ok(Arc::new(t))
}

fn save(table: &TileTable, path: &Path) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    write_table(table, BufWriter::new(file))?;
    Ok(())
}

pub fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        None => Box::new(BufWriter::new(io::stdout().lock())),
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?,
        )),
    })
}

pub fn run_table(args: &TableArgs) -> Result<(), Failure> {
    let map = args.dist.map()?;
    let region = region(Some(&args.region))?;
    let clock = Instant::now();
    let t = build(&map, &region, &args.tiler.config())?;
    let seconds = clock.elapsed().as_secs_f64();
    save(&t, &args.out)?;
    let mut r = Report::new();
    r.push("map", describe(&map));
    r.push("region", &region);
    r.push("level", t.level());
    r.push("blocks", t.block_count());
    r.push("tiles", t.tile_count());
    r.push("intersected_tiles", t.intersected_count());
    r.push("est_rejection", t.est_rejection());
    r.push("converged", t.converged());
    r.push("setup_seconds", seconds);
    print!("{r}");
    Ok(())
}
