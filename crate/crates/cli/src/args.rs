//! Command line, JSON config file, and the merged settings every command
//! runs on. Flags given on the command line override the config file.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use landauer_core::collisional::ScheduleFamily;
use landauer_core::experiments::QConvention;
use landauer_core::Policy;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "landauer", version, about = "Erasure experiments on finite thermal baths")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Engineered-bath erasure for each n and policy, with bounds.
    ErasureSweep,
    /// Swap chains against fresh thermal qubits.
    Collisional,
    /// Lower and upper bounds plus the heat decomposition per n.
    Bounds,
    /// Bath heat capacity at beta for each family.
    HeatCapacity,
    /// Erasure with the two-level degenerate critical bath.
    Critical,
    /// Anneal the bath spectrum at fixed target occupation.
    Optimize,
    /// Entropy production against n for every protocol and reference.
    Fig1,
    /// Heat capacity per qubit around beta and its size scaling.
    Fig2,
    /// Critical-bath entropy production with 1/n and 1/n^2 guides.
    Fig3,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ErasureSweep => "erasure-sweep",
            Command::Collisional => "collisional",
            Command::Bounds => "bounds",
            Command::HeatCapacity => "heat-capacity",
            Command::Critical => "critical",
            Command::Optimize => "optimize",
            Command::Fig1 => "fig1",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
        }
    }

    /// Powers of two `4..=max` when neither --n nor --n-max is given.
    fn default_n_max(self) -> usize {
        match self {
            Command::Critical | Command::Optimize => 4,
            Command::Fig3 => 512,
            _ => 1024,
        }
    }

    fn default_n_min(self) -> usize {
        match self {
            Command::Fig2 | Command::HeatCapacity | Command::Bounds | Command::Fig3 => 16,
            _ => 4,
        }
    }

    pub fn plots(self) -> bool {
        !matches!(self, Command::Bounds | Command::HeatCapacity | Command::Optimize)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(clap::Args, Debug, Default)]
pub struct Flags {
    /// Comma-separated bath sizes.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Use powers of two up to this size.
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Inverse temperature of the bath (design temperature).
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// sorted, level_shift, or none. Comma-separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub policy: Option<Vec<String>>,
    /// linear, geometric, geodesic, or none. Comma-separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub family: Option<Vec<String>>,
    #[arg(long, global = true, value_parser = parse_convention)]
    pub q_convention: Option<QConvention>,
    /// Explicit target occupation, overriding the convention.
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Fixed ground weight for the critical bath instead of matching q.
    #[arg(long, global = true)]
    pub a: Option<f64>,
    /// Output directory. Tables go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Annealing steps per chain.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Independent annealing chains, seeds seed..seed+chains.
    #[arg(long, global = true)]
    pub chains: Option<usize>,
    /// Anneal degeneracies as well as energies.
    #[arg(long, global = true)]
    pub full: bool,
    /// Points in the inverse-temperature grid of fig2.
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    /// Drop the reference curves from fig1.
    #[arg(long, global = true)]
    pub no_references: bool,
    /// JSON file with any of the flags above, keys in snake_case.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

fn parse_convention(s: &str) -> Result<QConvention, String> {
    s.parse().map_err(|e: landauer_core::Error| e.to_string())
}

/// Config file mirror of [`Flags`].
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n: Option<Vec<usize>>,
    pub n_max: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub policy: Option<Vec<String>>,
    pub family: Option<Vec<String>>,
    pub q_convention: Option<QConvention>,
    pub q: Option<f64>,
    pub a: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Vec<Format>>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub steps: Option<usize>,
    pub chains: Option<usize>,
    pub full: Option<bool>,
    pub grid_points: Option<usize>,
    pub references: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Fully resolved, validated settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub n_list: Vec<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub policies: Vec<Policy>,
    pub families: Vec<ScheduleFamily>,
    pub q_convention: QConvention,
    pub q: Option<f64>,
    pub a: Option<f64>,
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub steps: usize,
    pub chains: usize,
    pub full: bool,
    pub grid_points: usize,
    pub references: bool,
}

fn selection<T>(raw: Option<Vec<String>>, all: &[T], what: &str) -> CliResult<Vec<T>>
where
    T: Copy + PartialEq + std::str::FromStr,
{
    let Some(raw) = raw else {
        return Ok(all.to_vec());
    };
    let mut out = Vec::new();
    for item in raw {
        let item = item.trim();
        if item == "none" || item.is_empty() {
            continue;
        }
        let v = item
            .parse::<T>()
            .map_err(|_| CliError::usage(format!("unknown {what} {item:?}")))?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

fn powers_of_two(lo: usize, hi: usize) -> Vec<usize> {
    std::iter::successors(Some(lo.min(hi)), |&k| k.checked_mul(2))
        .take_while(|&k| k <= hi)
        .collect()
}

impl Settings {
    pub fn resolve(command: Command, flags: Flags) -> CliResult<Self> {
        let cfg = match &flags.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let n_given = flags.n.or(cfg.n);
        let n_max = flags.n_max.or(cfg.n_max);
        let n_list = match (n_given, n_max) {
            (Some(_), Some(_)) => return Err(CliError::usage("give --n or --n-max, not both")),
            (Some(list), None) => list,
            (None, Some(max)) => powers_of_two(command.default_n_min(), max),
            (None, None) => powers_of_two(command.default_n_min(), command.default_n_max()),
        };
        if n_list.is_empty() {
            return Err(CliError::usage("empty n list"));
        }
        if let Some(&bad) = n_list.iter().find(|&&n| n < 2) {
            return Err(CliError::usage(format!("every n must be at least 2, got {bad}")));
        }
        if command == Command::Optimize && n_list.len() != 1 {
            return Err(CliError::usage("optimize takes a single n"));
        }

        let alpha = flags.alpha.or(cfg.alpha).unwrap_or(3.0);
        let beta = flags.beta.or(cfg.beta).unwrap_or(1.0);
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(CliError::usage(format!("alpha must be positive, got {alpha}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(CliError::usage(format!("beta must be positive, got {beta}")));
        }
        let policies = selection(flags.policy.or(cfg.policy), &[Policy::Sorted, Policy::LevelShift], "policy")?;
        let families = selection(flags.family.or(cfg.family), &ScheduleFamily::GENERATED, "family")?;
        let references = !flags.no_references && cfg.references.unwrap_or(true);

        let needs = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(CliError::usage(msg)) };
        match command {
            Command::ErasureSweep | Command::Bounds => needs(!policies.is_empty(), "no policy selected")?,
            Command::Collisional => needs(!families.is_empty(), "no schedule family selected")?,
            Command::Fig1 => needs(
                !policies.is_empty() || !families.is_empty() || references,
                "no curves selected",
            )?,
            _ => {}
        }

        let q = flags.q.or(cfg.q);
        if let Some(q) = q {
            needs(q > 0.0 && q < 0.5, "q must lie in (0, 1/2)")?;
        }
        if q.is_some() {
            needs(
                matches!(command, Command::Collisional | Command::Critical | Command::Fig3 | Command::Optimize),
                &format!("--q does not apply to {}", command.name()),
            )?;
        }
        let a = flags.a.or(cfg.a);
        if let Some(a) = a {
            needs(a > 0.0 && a < 1.0, "a must lie in (0, 1)")?;
            needs(command == Command::Critical, &format!("--a does not apply to {}", command.name()))?;
        }

        let formats = flags.format.or(cfg.format).unwrap_or_else(|| vec![Format::Csv]);
        needs(!formats.is_empty(), "no output format selected")?;
        let out = flags.out.or(cfg.out);
        if formats.contains(&Format::Svg) {
            needs(command.plots(), &format!("{} has no plot", command.name()))?;
            needs(out.is_some(), "svg output needs --out")?;
        }

        let threads = flags.threads.or(cfg.threads);
        needs(threads != Some(0), "threads must be at least 1")?;
        let chains = flags.chains.or(cfg.chains).unwrap_or(1);
        needs(chains >= 1, "chains must be at least 1")?;
        let grid_points = flags.grid_points.or(cfg.grid_points).unwrap_or(201);
        needs(grid_points >= 2, "grid_points must be at least 2")?;

        Ok(Settings {
            n_list,
            alpha,
            beta,
            policies,
            families,
            q_convention: flags.q_convention.or(cfg.q_convention).unwrap_or_default(),
            q,
            a,
            out,
            formats,
            seed: flags.seed.or(cfg.seed).unwrap_or(0),
            threads,
            steps: flags.steps.or(cfg.steps).unwrap_or(20_000),
            chains,
            full: flags.full || cfg.full.unwrap_or(false),
            grid_points,
            references,
        })
    }
}
