//! Subcommand implementations.  Every command computes one experiment,
//! writes its data as CSV to the output path, and writes a JSON sidecar
//! (`<out>.meta.json`) carrying the tool version, the full configuration
//! echo, and the error budgets of the computation.

use crate::config::RunConfig;
use cubicdist::charfn::{char_fn, decay_slope, product_tail_bound, verify_gbound, DecayWindow};
use cubicdist::density::{compare_2d, invert_density, ConvolutionSampler, DensityParams};
use cubicdist::eisenstein::enumerate_prime_ideals;
use cubicdist::empirics::{count_ladder, sweep_csv, sweep_family};
use cubicdist::lfunc::{EvalPoint, Mode};
use cubicdist::{Error, Result};
use serde_json::json;
use std::path::Path;

/// Decay-envelope fits and hybrid tail estimates need a prime table at
/// least this large, independently of the product cutoff.
const ENVELOPE_TABLE_BOUND: u64 = 100_000;

/// Quantile lattice used by the `compare` report.
const COMPARE_LATTICE: usize = 32;

fn eval_point(config: &RunConfig) -> Result<EvalPoint> {
    EvalPoint::new(config.sigma, config.t)
}

fn case_mode(config: &RunConfig) -> Result<Mode> {
    Mode::from_case_index(config.case)
}

fn write_pair(out: &Path, csv: &str, sidecar: &serde_json::Value) -> Result<()> {
    std::fs::write(out, csv)
        .map_err(|e| Error::invalid(format!("cannot write {}: {}", out.display(), e)))?;
    let meta = out.with_extension("meta.json");
    let text = serde_json::to_string_pretty(sidecar)
        .map_err(|e| Error::invalid(format!("sidecar serialization: {}", e)))?;
    std::fs::write(&meta, text + "\n")
        .map_err(|e| Error::invalid(format!("cannot write {}: {}", meta.display(), e)))?;
    Ok(())
}

fn sidecar(
    subcommand: &str,
    config: &RunConfig,
    out: &Path,
    budgets: serde_json::Value,
    report: serde_json::Value,
) -> serde_json::Value {
    json!({
        "tool": "cubicdist",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": subcommand,
        "config": config,
        "output": out.display().to_string(),
        "budgets": budgets,
        "report": report,
    })
}

fn grid_axis(radius: f64, step: f64) -> Result<Vec<f64>> {
    let n = (2.0 * radius / step).round() as i64;
    if n > 2000 {
        return Err(Error::capacity(format!(
            "grid of {} points per axis; coarsen grid-step or shrink grid-radius",
            n + 1
        )));
    }
    Ok((0..=n).map(|k| -radius + k as f64 * step).collect())
}

// ---------------------------------------------------------------------------
// charfn
// ---------------------------------------------------------------------------

/// Characteristic function of the limiting distribution on a square grid
/// of evaluation points.
pub fn charfn(config: &RunConfig, out: &Path) -> Result<()> {
    let s = eval_point(config)?;
    let mode = case_mode(config)?;
    let primes = enumerate_prime_ideals(config.cutoff_prime)?;
    let radius = config.grid_radius.unwrap_or(2.0);
    let step = config.grid_step.unwrap_or(0.5);
    let axis = grid_axis(radius, step)?;

    let mut csv = String::from("y1,y2,re,im,tail_bound\n");
    let mut max_tail = 0.0f64;
    for &y1 in &axis {
        for &y2 in &axis {
            let v = char_fn(s, (y1, y2), mode, &primes, config.cutoff_prime)?;
            max_tail = max_tail.max(v.tail_bound);
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                y1, y2, v.value.re, v.value.im, v.tail_bound
            ));
        }
    }

    let side = sidecar(
        "charfn",
        config,
        out,
        json!({ "max_product_tail_bound": max_tail }),
        json!({
            "grid_points_per_axis": axis.len(),
            "radius": radius,
            "step": step,
            "rigorous_tail": s.is_rigorous(),
        }),
    );
    write_pair(out, &csv, &side)
}

// ---------------------------------------------------------------------------
// density
// ---------------------------------------------------------------------------

/// Inverts the characteristic function into a joint density grid.
pub fn density(config: &RunConfig, out: &Path) -> Result<()> {
    let s = eval_point(config)?;
    let mode = case_mode(config)?;
    let primes = enumerate_prime_ideals(config.cutoff_prime.max(ENVELOPE_TABLE_BOUND))?;
    let params = DensityParams {
        radius: config.grid_radius,
        seed: config.seed,
        ..Default::default()
    };
    let grid = invert_density(s, mode, &primes, config.cutoff_prime, &params)?;

    let n2 = grid.axis2.len();
    let mut csv = String::from("x1,x2,density\n");
    for (i, &x1) in grid.axis1.iter().enumerate() {
        for (j, &x2) in grid.axis2.iter().enumerate() {
            csv.push_str(&format!("{},{},{}\n", x1, x2, grid.values[i * n2 + j]));
        }
    }

    let side = sidecar(
        "density",
        config,
        out,
        json!({
            "error_budget": grid.error_budget,
            "mass_defect": (grid.total_mass - 1.0).abs(),
            "max_imag_residue": grid.max_imag_residue,
            "min_value": grid.min_value,
        }),
        json!({
            "frequency_radius": grid.radius,
            "quadrature_step": grid.y_step,
            "grid_points_per_axis": grid.axis1.len(),
            "total_mass": grid.total_mass,
        }),
    );
    write_pair(out, &csv, &side)
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

/// Draws from the truncated infinite convolution.
pub fn sample(config: &RunConfig, out: &Path) -> Result<()> {
    let s = eval_point(config)?;
    let mode = case_mode(config)?;
    let primes = enumerate_prime_ideals(config.cutoff_prime)?;
    let sampler = ConvolutionSampler::new(s, mode, &primes, config.cutoff_prime, config.seed)?;
    let draws = sampler.sample(config.draws);

    let mut csv = String::from("index,re,im\n");
    for (i, z) in draws.iter().enumerate() {
        csv.push_str(&format!("{},{},{}\n", i, z.re, z.im));
    }

    let shift = sampler.shift();
    let mean = sampler.mean();
    let side = sidecar(
        "sample",
        config,
        out,
        json!({
            "cf_tail_bound_at_unit_y":
                product_tail_bound(s, 1.0, mode, config.cutoff_prime as f64),
        }),
        json!({
            "draws": config.draws,
            "shift": { "re": shift.re, "im": shift.im },
            "mean": { "re": mean.re, "im": mean.im },
        }),
    );
    write_pair(out, &csv, &side)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

/// Evaluates log L or L'/L at `s` for every family member up to the norm
/// bound.
pub fn sweep(config: &RunConfig, out: &Path) -> Result<()> {
    let s = eval_point(config)?;
    let mode = case_mode(config)?;
    let primes = enumerate_prime_ideals(config.cutoff_prime)?;
    let sweep = sweep_family(s, mode, &primes, config.family_bound, config.cutoff_prime)?;
    let csv = sweep_csv(&sweep);

    let max_truncation = sweep
        .records
        .iter()
        .map(|r| r.truncation_error)
        .fold(0.0f64, f64::max);
    let side = sidecar(
        "sweep",
        config,
        out,
        json!({
            "max_truncation_error": max_truncation,
            "heuristic": sweep.heuristic,
        }),
        json!({
            "members": sweep.records.len(),
            "family_bound": sweep.family_bound,
            "series_cutoff": sweep.series_cutoff,
        }),
    );
    write_pair(out, &csv, &side)
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

/// Compares seeded sampler draws against the inverted density through the
/// joint CDF on a quantile lattice.
pub fn compare(config: &RunConfig, out: &Path) -> Result<()> {
    let s = eval_point(config)?;
    let mode = case_mode(config)?;
    let primes = enumerate_prime_ideals(config.cutoff_prime.max(ENVELOPE_TABLE_BOUND))?;
    let params = DensityParams {
        radius: config.grid_radius,
        seed: config.seed,
        ..Default::default()
    };
    let grid = invert_density(s, mode, &primes, config.cutoff_prime, &params)?;
    let sampler = ConvolutionSampler::new(s, mode, &primes, config.cutoff_prime, config.seed)?;
    let draws = sampler.sample(config.draws);
    let report = compare_2d(&draws, &grid, COMPARE_LATTICE)?;

    let mut csv = String::from("quantity,value\n");
    csv.push_str(&format!("n_samples,{}\n", report.n_samples));
    csv.push_str(&format!("lattice,{}\n", report.lattice));
    csv.push_str(&format!("skipped,{}\n", report.skipped));
    csv.push_str(&format!("sup_abs_diff,{}\n", report.sup_abs_diff));
    csv.push_str(&format!("mean_abs_diff,{}\n", report.mean_abs_diff));
    csv.push_str(&format!("worst_point_x,{}\n", report.worst_point.0));
    csv.push_str(&format!("worst_point_y,{}\n", report.worst_point.1));

    let side = sidecar(
        "compare",
        config,
        out,
        json!({
            "density_error_budget": grid.error_budget,
            "sampling_noise_scale": 1.0 / (config.draws as f64).sqrt(),
        }),
        json!({
            "n_samples": report.n_samples,
            "lattice": report.lattice,
            "skipped": report.skipped,
            "sup_abs_diff": report.sup_abs_diff,
            "mean_abs_diff": report.mean_abs_diff,
            "worst_point": { "x": report.worst_point.0, "y": report.worst_point.1 },
        }),
    );
    write_pair(out, &csv, &side)
}

// ---------------------------------------------------------------------------
// decay
// ---------------------------------------------------------------------------

/// Verifies the Euler-factor modulus window at |y| and regresses the decay
/// exponent of |φ| along a |y| ladder.
pub fn decay(config: &RunConfig, out: &Path) -> Result<()> {
    let mode = case_mode(config)?;
    let window = DecayWindow::new(config.sigma, 0.01, config.y_abs)?;
    let report = verify_gbound(&window, config.t, 0.0)?;
    let primes = enumerate_prime_ideals(config.cutoff_prime.max(ENVELOPE_TABLE_BOUND))?;
    let ladder: Vec<f64> = (0..8)
        .map(|k| 10f64.powf(2.0 + 3.0 * k as f64 / 7.0))
        .collect();
    let slope = decay_slope(config.sigma, mode, &primes, &ladder)?;

    let mut csv = String::from("quantity,value\n");
    csv.push_str(&format!("y_abs,{}\n", window.y_abs));
    csv.push_str(&format!("window_norm_lo,{}\n", window.n_lo));
    csv.push_str(&format!("window_norm_hi,{}\n", window.n_hi));
    csv.push_str(&format!("examined,{}\n", report.examined));
    csv.push_str(&format!("min_abs_g,{}\n", report.min_abs_g));
    csv.push_str(&format!("max_abs_g,{}\n", report.max_abs_g));
    csv.push_str(&format!("violations,{}\n", report.violations.len()));
    csv.push_str(&format!("decay_slope,{}\n", slope));
    csv.push_str(&format!("expected_slope,{}\n", 1.0 / config.sigma));

    let side = sidecar(
        "decay",
        config,
        out,
        json!({
            "violations": report.violations.len(),
            "violations_truncated": report.violations_truncated,
            "slope_deviation": (slope - 1.0 / config.sigma).abs(),
        }),
        json!({
            "window": {
                "sigma": window.sigma,
                "epsilon": window.epsilon,
                "y_abs": window.y_abs,
                "norm_lo": window.n_lo,
                "norm_hi": window.n_hi,
            },
            "examined": report.examined,
            "min_abs_g": report.min_abs_g,
            "max_abs_g": report.max_abs_g,
            "case_steep": report.case_steep,
            "case_shallow": report.case_shallow,
            "passed": report.passed(),
            "decay_slope": slope,
            "expected_slope": 1.0 / config.sigma,
        }),
    );
    write_pair(out, &csv, &side)
}

// ---------------------------------------------------------------------------
// count
// ---------------------------------------------------------------------------

/// Smoothed family count along a doubling ladder against the derived
/// density constant.
pub fn count(config: &RunConfig, out: &Path) -> Result<()> {
    let report = count_ladder(config.family_bound)?;

    let mut csv = String::from("bound,ratio\n");
    for (bound, ratio) in &report.ladder {
        csv.push_str(&format!("{},{}\n", bound, ratio));
    }

    let side = sidecar(
        "count",
        config,
        out,
        json!({
            "half_step_drift": report.half_step_drift,
            "relative_error_vs_derived": report.relative_error_vs_derived,
        }),
        json!({
            "bound": report.bound,
            "fitted_constant": report.fitted_constant,
            "derived_constant": report.derived_constant,
        }),
    );
    write_pair(out, &csv, &side)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
