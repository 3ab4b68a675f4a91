//! Run configuration: defaults, JSON config files, and flag overrides.

use cubicdist::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Knobs shared by every subcommand.  A JSON config file mirrors these
/// fields by name; command-line flags override the file, which overrides
/// the defaults.  The full configuration is echoed into every output
/// sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Real part of the evaluation point.
    pub sigma: f64,
    /// Imaginary part of the evaluation point.
    pub t: f64,
    /// 1 evaluates log L, 2 evaluates L'/L.
    pub case: u8,
    /// Prime-norm cutoff for Euler products and coefficient series.
    pub cutoff_prime: u64,
    /// Norm bound for family sweeps and count ladders.
    pub family_bound: u64,
    /// Evaluation-grid radius for `charfn`; frequency-disk radius for
    /// `density` and `compare` (envelope-chosen when absent).
    pub grid_radius: Option<f64>,
    /// Evaluation-grid step for `charfn`.
    pub grid_step: Option<f64>,
    /// Seed for sampler draws and density pilot samples.
    pub seed: u64,
    /// Draw count for `sample` and `compare`.
    pub draws: u64,
    /// Evaluation-point magnitude |y| for the `decay` window report.
    pub y_abs: f64,
    /// Rayon thread budget; 0 uses every core.  Outputs are byte-identical
    /// across reruns at a fixed budget.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sigma: 1.5,
            t: 0.0,
            case: 2,
            cutoff_prime: 10_000,
            family_bound: 100_000,
            grid_radius: None,
            grid_step: None,
            seed: 1,
            draws: 10_000,
            y_abs: 10_000.0,
            threads: 1,
        }
    }
}

impl RunConfig {
    /// Reads a JSON config file whose fields mirror the flags.
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::invalid(format!("cannot read config {}: {}", path.display(), e))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("config {}: {}", path.display(), e)))
    }

    /// Checks the fields every subcommand relies on; the library validates
    /// the analytic ranges.
    pub fn validate(&self) -> Result<()> {
        if self.case != 1 && self.case != 2 {
            return Err(Error::invalid(format!(
                "case must be 1 (log L) or 2 (L'/L), got {}",
                self.case
            )));
        }
        if !self.sigma.is_finite() || !self.t.is_finite() {
            return Err(Error::invalid("sigma and t must be finite"));
        }
        if self.draws == 0 {
            return Err(Error::invalid("draws must be positive"));
        }
        if !(self.y_abs.is_finite() && self.y_abs > 0.0) {
            return Err(Error::invalid("y-abs must be positive and finite"));
        }
        for (name, knob) in [("grid-radius", self.grid_radius), ("grid-step", self.grid_step)] {
            if let Some(v) = knob {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::invalid(format!("{} must be positive and finite", name)));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
