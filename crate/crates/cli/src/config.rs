//! Experiment configuration: a JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use lpframes::{BoundMode, LambdaSource};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every field is optional so a config file and flags can be layered;
/// `resolved` fills in the documented defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: Option<f64>,
    pub d: Option<usize>,
    pub levels: Option<usize>,
    pub mode: Option<BoundMode>,
    pub ku_bound: Option<f64>,
    /// Built-in sequence name or a path to a JSON array of points.
    pub lambda: Option<String>,
    pub grid_h: Option<f64>,
    #[serde(rename = "box")]
    pub box_half_width: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub draws: Option<usize>,
    pub t: Option<f64>,
    pub points: Option<PathBuf>,
    pub frame: Option<PathBuf>,
    pub count: Option<usize>,
    pub width: Option<f64>,
    pub region: Option<[f64; 2]>,
    pub r_lower: Option<f64>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub csv: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 2024;

macro_rules! overlay_fields {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Values set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &ExperimentConfig) -> Self {
        overlay_fields!(
            self, top, p, d, levels, mode, ku_bound, lambda, grid_h, box_half_width, seed, trials, tol, samples,
            draws, t, points, frame, count, width, region, r_lower, out, csv
        );
        self
    }

    /// Defaults applied. Strict mode keeps `ku_bound` unset when it was not given,
    /// and `p` stays unset when a frame bundle supplies it.
    pub fn resolved(&self) -> Self {
        let mode = self.mode.unwrap_or(BoundMode::Demo);
        ExperimentConfig {
            p: self.p.or(self.frame.is_none().then_some(4.0)),
            d: Some(self.d.unwrap_or(1)),
            levels: Some(self.levels.unwrap_or(2)),
            mode: Some(mode),
            ku_bound: self.ku_bound.or((mode == BoundMode::Demo).then_some(0.5)),
            lambda: Some(self.lambda.clone().unwrap_or_else(|| "linear".into())),
            grid_h: self.grid_h,
            box_half_width: self.box_half_width,
            seed: Some(self.seed.unwrap_or(DEFAULT_SEED)),
            trials: Some(self.trials.unwrap_or(500)),
            tol: Some(self.tol.unwrap_or(1e-6)),
            samples: Some(self.samples.unwrap_or(50)),
            draws: Some(self.draws.unwrap_or(200)),
            t: self.t,
            points: self.points.clone(),
            frame: self.frame.clone(),
            count: Some(self.count.unwrap_or(20)),
            width: Some(self.width.unwrap_or(1.0)),
            region: Some(self.region.unwrap_or([0.0, 10.0])),
            r_lower: Some(self.r_lower.unwrap_or(0.0)),
            out: self.out.clone(),
            csv: self.csv.clone(),
        }
    }

    /// Checks the invariants shared by every command on a resolved config.
    pub fn validate(&self) -> Result<(), CliError> {
        let p = self.p();
        if !(p >= 1.0) || !p.is_finite() {
            return Err(CliError::Usage(format!("p = {p} must be finite and at least 1")));
        }
        if self.d() == 0 {
            return Err(CliError::Usage("dimension must be positive".into()));
        }
        if !(self.tol() > 0.0) {
            return Err(CliError::Usage("tolerance must be positive".into()));
        }
        if self.mode() == BoundMode::Strict && self.ku_bound.is_none() {
            return Err(CliError::Usage("strict mode needs an explicit --ku-bound".into()));
        }
        if let Some(h) = self.grid_h {
            grid_level(h)?;
        }
        if let Some(b) = self.box_half_width {
            if !(b > 0.0) || !b.is_finite() {
                return Err(CliError::Usage(format!("box half-width {b} must be positive")));
            }
        }
        Ok(())
    }

    pub fn p(&self) -> f64 {
        self.p.unwrap_or(4.0)
    }
    pub fn d(&self) -> usize {
        self.d.unwrap_or(1)
    }
    pub fn levels(&self) -> usize {
        self.levels.unwrap_or(2)
    }
    pub fn mode(&self) -> BoundMode {
        self.mode.unwrap_or(BoundMode::Demo)
    }
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(500)
    }
    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-6)
    }
    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(50)
    }
    pub fn draws(&self) -> usize {
        self.draws.unwrap_or(200)
    }
    pub fn count(&self) -> usize {
        self.count.unwrap_or(20)
    }
    pub fn width(&self) -> f64 {
        self.width.unwrap_or(1.0)
    }
    pub fn region(&self) -> [f64; 2] {
        self.region.unwrap_or([0.0, 10.0])
    }
    pub fn r_lower(&self) -> f64 {
        self.r_lower.unwrap_or(0.0)
    }

    /// Cell level from `--grid-h`, if given.
    pub fn level(&self) -> Result<Option<i32>, CliError> {
        self.grid_h.map(grid_level).transpose()
    }

    pub fn lambda_source(&self) -> Result<LambdaSource, CliError> {
        let name = self.lambda.as_deref().unwrap_or("linear");
        if let Some(src) = LambdaSource::builtin(name, self.d(), self.seed()) {
            return Ok(src);
        }
        let points = read_points(Path::new(name))?;
        let src = LambdaSource::from_points(points).map_err(|e| CliError::Usage(e.to_string()))?;
        if src.dim() != self.d() {
            return Err(CliError::Usage(format!(
                "λ points have dimension {}, expected {}",
                src.dim(),
                self.d()
            )));
        }
        Ok(src)
    }
}

/// `h = 2^{-m}` gives level `m`.
pub fn grid_level(h: f64) -> Result<i32, CliError> {
    let m = -h.log2();
    if !(h > 0.0) || !m.is_finite() || m.fract() != 0.0 {
        return Err(CliError::Usage(format!("grid width {h} is not a power of two")));
    }
    Ok(m as i32)
}

pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn parse_mode(s: &str) -> Result<BoundMode, String> {
    match s {
        "strict" => Ok(BoundMode::Strict),
        "demo" => Ok(BoundMode::Demo),
        other => Err(format!("unknown mode {other:?}, expected strict or demo")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file: ExperimentConfig = serde_json::from_str(r#"{"p": 3.0, "levels": 3, "box": 8.0}"#).unwrap();
        let flags = ExperimentConfig {
            p: Some(6.0),
            ..Default::default()
        };
        let merged = file.overlay(&flags).resolved();
        assert_eq!(merged.p, Some(6.0));
        assert_eq!(merged.levels, Some(3));
        assert_eq!(merged.box_half_width, Some(8.0));
        assert_eq!(merged.seed, Some(DEFAULT_SEED));
    }

    #[test]
    fn validation_rules() {
        assert!(grid_level(0.25).unwrap() == 2 && grid_level(2.0).unwrap() == -1);
        assert!(grid_level(0.3).is_err());
        let strict = ExperimentConfig {
            mode: Some(BoundMode::Strict),
            ..Default::default()
        }
        .resolved();
        assert!(strict.ku_bound.is_none());
        assert!(strict.validate().is_err());
        let low_p = ExperimentConfig {
            p: Some(0.5),
            ..Default::default()
        };
        assert!(low_p.resolved().validate().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"unknown": 1}"#).is_err());
    }
}
