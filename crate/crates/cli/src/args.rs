//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_mode, ExperimentConfig};
use crate::Command;

#[derive(Debug, Parser)]
#[command(name = "lpframes", version, about = "Frames of translates in discretized L_p")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Build the unconditional frame of translates and verify it.
    Construct(Flags),
    /// Promote and verify a frame bundle (or the Haar basis).
    Verify(Flags),
    /// Split a point family into uniformly separated classes.
    Partition(Flags),
    /// Estimate frame and unconditional constants.
    Constants(Flags),
    /// Tail sums of restrictions of a system of translates.
    Compactness(Flags),
}

impl Sub {
    pub fn split(&self) -> (Command, &Flags) {
        match self {
            Sub::Construct(f) => (Command::Construct, f),
            Sub::Verify(f) => (Command::Verify, f),
            Sub::Partition(f) => (Command::Partition, f),
            Sub::Constants(f) => (Command::Constants, f),
            Sub::Compactness(f) => (Command::Compactness, f),
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub levels: Option<usize>,
    /// strict or demo.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<lpframes::BoundMode>,
    #[arg(long)]
    pub ku_bound: Option<f64>,
    /// linear, alternating, seeded-random-walk or a JSON file of points.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Cell width, a power of two.
    #[arg(long)]
    pub grid_h: Option<f64>,
    /// Half-width of the grid box.
    #[arg(long = "box")]
    pub box_half_width: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub draws: Option<usize>,
    /// Separation threshold.
    #[arg(long)]
    pub t: Option<f64>,
    /// JSON file of points to partition.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Frame bundle JSON.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    /// Number of translates or basis elements.
    #[arg(long)]
    pub count: Option<usize>,
    /// Support width of the indicator generator.
    #[arg(long)]
    pub width: Option<f64>,
    /// Restriction box `lo,hi`, applied in every coordinate.
    #[arg(long, value_parser = parse_region)]
    pub region: Option<[f64; 2]>,
    #[arg(long)]
    pub r_lower: Option<f64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV table path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl Flags {
    pub fn to_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            p: self.p,
            d: self.d,
            levels: self.levels,
            mode: self.mode,
            ku_bound: self.ku_bound,
            lambda: self.lambda.clone(),
            grid_h: self.grid_h,
            box_half_width: self.box_half_width,
            seed: self.seed,
            trials: self.trials,
            tol: self.tol,
            samples: self.samples,
            draws: self.draws,
            t: self.t,
            points: self.points.clone(),
            frame: self.frame.clone(),
            count: self.count,
            width: self.width,
            region: self.region,
            r_lower: self.r_lower,
            out: self.out.clone(),
            csv: self.csv.clone(),
        }
    }
}

fn parse_region(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [lo, hi] = parts.as_slice() else {
        return Err(format!("expected lo,hi, got {s:?}"));
    };
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok([num(lo)?, num(hi)?])
}
