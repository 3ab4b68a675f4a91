//! Family-level empirics: sweeps of L-statistics across the cubic family,
//! smoothed empirical characteristic functions, discrepancy against an
//! inverted density, and smoothed member counts compared with an
//! independently derived density constant.

use crate::cubic_char::CubicCharacter;
use crate::density::{compare_2d_weighted, CompareReport, DensityGrid};
use crate::eisenstein::{enumerate_family, enumerate_family_norms, EisensteinInt, PrimeTable};
use crate::error::{Error, Result};
use crate::lfunc::{log_deriv_l, log_l, EvalPoint, Mode};
use num_complex::Complex64;
use rayon::prelude::*;

// ---------------------------------------------------------------------------
// family sweeps
// ---------------------------------------------------------------------------

/// One family member's L-statistic at a fixed evaluation point.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub a: i64,
    pub b: i64,
    pub norm: u64,
    pub value: Complex64,
    pub truncation_error: f64,
    pub heuristic: bool,
}

/// L-statistics of every family member of modulus norm ≤ `family_bound`,
/// sorted by (norm, a, b).
#[derive(Debug, Clone)]
pub struct FamilySweep {
    pub sigma: f64,
    pub t: f64,
    pub case_index: u8,
    pub family_bound: u64,
    pub series_cutoff: u64,
    /// Set when any member value is a smoothed truncation without a
    /// convergence guarantee (σ ≤ 1).
    pub heuristic: bool,
    pub records: Vec<SweepRecord>,
}

/// Evaluates log L (case 1) or L'/L (case 2) at `s` for every family
/// member, tabulating each character through per-factor residue tables.
pub fn sweep_family(
    s: EvalPoint,
    mode: Mode,
    primes: &PrimeTable,
    family_bound: u64,
    series_cutoff: u64,
) -> Result<FamilySweep> {
    let recs = primes.up_to(series_cutoff)?;
    let members = enumerate_family(family_bound)?;
    if members.is_empty() {
        return Err(Error::invalid(format!(
            "no family member has modulus norm ≤ {}",
            family_bound
        )));
    }
    let mut records: Vec<SweepRecord> = members
        .into_par_iter()
        .map(|member| -> Result<SweepRecord> {
            let (a, b, norm) = (member.c.a as i64, member.c.b as i64, member.norm);
            let chi = CubicCharacter::new(member)?;
            let tab = chi.tabulate_fast(recs)?;
            let lv = match mode {
                Mode::Log => log_l(s, &tab, recs, series_cutoff)?,
                Mode::LogDeriv => log_deriv_l(s, &tab, recs, series_cutoff)?,
            };
            Ok(SweepRecord {
                a,
                b,
                norm,
                value: lv.value,
                truncation_error: lv.truncation_error,
                heuristic: lv.heuristic,
            })
        })
        .collect::<Result<_>>()?;
    records.sort_by(|p, q| (p.norm, p.a, p.b).cmp(&(q.norm, q.a, q.b)));
    Ok(FamilySweep {
        sigma: s.sigma(),
        t: s.t(),
        case_index: mode.case_index(),
        family_bound,
        series_cutoff,
        heuristic: records.iter().any(|r| r.heuristic),
        records,
    })
}

/// Renders sweep records as CSV with a header row.
pub fn sweep_csv(sweep: &FamilySweep) -> String {
    let mut s = String::from("a,b,norm,re,im,truncation_error\n");
    for r in &sweep.records {
        s.push_str(&format!(
            "{},{},{},{:e},{:e},{:e}\n",
            r.a, r.b, r.norm, r.value.re, r.value.im, r.truncation_error
        ));
    }
    s
}

// ---------------------------------------------------------------------------
// smoothed empirical statistics
// ---------------------------------------------------------------------------

/// Smoothed empirical characteristic function of a sweep:
/// Σ_c w_c exp(i⟨y, L_c⟩) / Σ_c w_c with weights w_c = exp(−N(c)/smoothing)
/// and ⟨y, z⟩ = y₁ Re z + y₂ Im z.
pub fn empirical_cf(
    records: &[SweepRecord],
    y: (f64, f64),
    smoothing: f64,
) -> Result<Complex64> {
    if records.is_empty() {
        return Err(Error::invalid("empirical CF needs a nonempty sweep"));
    }
    if !(smoothing > 0.0) {
        return Err(Error::invalid("smoothing scale must be positive"));
    }
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for r in records {
        let w = (-(r.norm as f64) / smoothing).exp();
        let phase = y.0 * r.value.re + y.1 * r.value.im;
        num += Complex64::from_polar(w, phase);
        den += w;
    }
    Ok(num / den)
}

/// Discrepancy between the smoothed empirical joint distribution of a sweep
/// and an inverted density, as a sup of CDF differences over a lattice of
/// weighted marginal quantiles.
pub fn discrepancy_vs_density(
    records: &[SweepRecord],
    grid: &DensityGrid,
    smoothing: f64,
    lattice: usize,
) -> Result<CompareReport> {
    if !(smoothing > 0.0) {
        return Err(Error::invalid("smoothing scale must be positive"));
    }
    let samples: Vec<(f64, f64, f64)> = records
        .iter()
        .map(|r| {
            (
                r.value.re,
                r.value.im,
                (-(r.norm as f64) / smoothing).exp(),
            )
        })
        .collect();
    compare_2d_weighted(&samples, grid, lattice)
}

// ---------------------------------------------------------------------------
// smoothed counts and the density constant
// ---------------------------------------------------------------------------

/// Σ exp(−n/y) over a list of modulus norms.
pub fn smoothed_count(norms: &[u64], y: f64) -> f64 {
    norms.iter().map(|&n| (-(n as f64) / y).exp()).sum()
}

/// Smoothed family counts along a doubling ladder, with the leading
/// constant read off at the top rung and compared against the
/// lattice-derived prediction.
#[derive(Debug, Clone)]
pub struct CountReport {
    pub bound: u64,
    /// (y, 𝒩*(y)/y) along a doubling ladder ending at `bound`.
    pub ladder: Vec<(u64, f64)>,
    pub fitted_constant: f64,
    /// |ratio(bound/2) − ratio(bound)| / ratio(bound).
    pub half_step_drift: f64,
    pub derived_constant: f64,
    pub relative_error_vs_derived: f64,
}

/// Enumeration headroom so the exp(−n/y) tail beyond the enumerated norms
/// is negligible at the top rung.
const COUNT_HEADROOM: u64 = 12;

/// Measures 𝒩*(y) = Σ_c exp(−N(c)/y) on the ladder y ∈ {bound/8, bound/4,
/// bound/2, bound} and compares 𝒩*(bound)/bound with the derived constant.
pub fn count_ladder(bound: u64) -> Result<CountReport> {
    if bound < 1024 {
        return Err(Error::invalid("count ladder needs a bound of at least 1024"));
    }
    let norms = enumerate_family_norms(bound.saturating_mul(COUNT_HEADROOM))?;
    let ladder: Vec<(u64, f64)> = (0..4)
        .map(|k| bound >> (3 - k))
        .map(|y| (y, smoothed_count(&norms, y as f64) / y as f64))
        .collect();
    let fitted_constant = ladder[3].1;
    let half_step_drift = (ladder[2].1 - fitted_constant).abs() / fitted_constant;
    let derived_constant = derived_density_constant();
    Ok(CountReport {
        bound,
        ladder,
        fitted_constant,
        half_step_drift,
        derived_constant,
        relative_error_vs_derived: (fitted_constant - derived_constant).abs()
            / derived_constant,
    })
}

/// ζ_K(2) for the Eisenstein field by direct lattice summation: N(z)^{−2}
/// over nonzero lattice points of norm ≤ x, divided by the six units per
/// ideal.
pub fn zeta_k_2_lattice(x: u64) -> f64 {
    let c = (2.0 * (x as f64 / 3.0).sqrt()) as i64 + 2;
    let mut sum = 0.0;
    for a in -c..=c {
        for b in -c..=c {
            let n = a * a - a * b + b * b;
            if n == 0 || n as u64 > x {
                continue;
            }
            let nf = n as f64;
            sum += 1.0 / (nf * nf);
        }
    }
    sum / 6.0
}

/// The residue of ζ_K at s = 1 from lattice-point counts:
/// #{0 < N(z) ≤ x} / (6x) → π/(3√3).
pub fn residue_lattice(x: u64) -> f64 {
    let xi = x as i64;
    let norm = |a: i64, b: i64| a * a - a * b + b * b;
    let amax = (2.0 * (x as f64 / 3.0).sqrt()) as i64 + 1;
    let mut count: i64 = 0;
    for a in -amax..=amax {
        let disc = 4.0 * x as f64 - 3.0 * (a as f64) * (a as f64);
        if disc < 0.0 {
            continue;
        }
        // The integer strip {b : N(a + bω) ≤ x} is an interval around a/2;
        // float estimates are fixed up by exact norm checks at the edges.
        let bmid = (a as f64 / 2.0).round() as i64;
        if norm(a, bmid) > xi {
            continue;
        }
        let s = disc.sqrt();
        let mut lo = (((a as f64 - s) / 2.0).ceil() as i64).min(bmid);
        while norm(a, lo - 1) <= xi {
            lo -= 1;
        }
        while norm(a, lo) > xi {
            lo += 1;
        }
        let mut hi = (((a as f64 + s) / 2.0).floor() as i64).max(bmid);
        while norm(a, hi + 1) <= xi {
            hi += 1;
        }
        while norm(a, hi) > xi {
            hi -= 1;
        }
        count += hi - lo + 1;
    }
    (count - 1) as f64 / (6.0 * x as f64)
}

/// The number of residues mod ⟨9⟩ coprime to the ramified prime, and the
/// number of their orbits under the six units; the latter is the order of
/// the ray class group steering the family density.
pub fn ray_class_data() -> (usize, usize) {
    let mut coprime = Vec::new();
    for a in 0..9i128 {
        for b in 0..9i128 {
            let n = a * a - a * b + b * b;
            if n.rem_euclid(3) != 0 {
                coprime.push((a, b));
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    let mut orbits = 0;
    for &(a, b) in &coprime {
        if seen.contains(&(a, b)) {
            continue;
        }
        orbits += 1;
        for u in EisensteinInt::units() {
            let z = EisensteinInt::new(a, b) * u;
            seen.insert((z.a.rem_euclid(9), z.b.rem_euclid(9)));
        }
    }
    (coprime.len(), orbits)
}

/// The ray class order entering the family density constant.
pub fn ray_class_order() -> usize {
    ray_class_data().1
}

/// Predicted limit of 𝒩*(y)/y: three quarters of the lattice residue over
/// the ray class order times ζ_K(2).
pub fn derived_density_constant() -> f64 {
    let res = std::f64::consts::PI / (3.0 * 3.0f64.sqrt());
    let h = ray_class_order() as f64;
    3.0 * res / (4.0 * h * zeta_k_2_lattice(10_000_000))
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
