//! Truncated Hecke L-series attached to the cubic characters, their
//! logarithms and logarithmic derivatives, the multiplicative coefficients
//! λ_y, and the twisted double series I_y.
//!
//! Two regimes are kept strictly apart.  For σ > 1 every sum converges
//! absolutely and each value is returned together with a rigorous bound on
//! the dropped tail, derived from the Chebyshev-type majorant
//! #{prime ideals of norm ≤ u} ≤ 2.511(u + √u)/ln u + 1 by partial
//! summation.  For 1/2 < σ ≤ 1 the same truncated sums are returned with
//! exponential smoothing and flagged `heuristic`; no tail bound is claimed
//! there.

use crate::cubic_char::CharValue;
use crate::eisenstein::{IdealTable, PrimeIdealRec};
use crate::error::{Error, Result};
use num_complex::Complex64;

// ---------------------------------------------------------------------------
// evaluation points and modes
// ---------------------------------------------------------------------------

/// A point s = σ + it strictly right of the critical line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    sigma: f64,
    t: f64,
}

impl EvalPoint {
    pub fn new(sigma: f64, t: f64) -> Result<Self> {
        if !(sigma.is_finite() && t.is_finite()) {
            return Err(Error::invalid("evaluation point must be finite"));
        }
        if sigma <= 0.5 {
            return Err(Error::invalid(format!(
                "sigma = {} is not right of the critical line",
                sigma
            )));
        }
        Ok(EvalPoint { sigma, t })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }

    /// The reflected point s̄ = σ − it.
    pub fn conj(&self) -> EvalPoint {
        EvalPoint {
            sigma: self.sigma,
            t: -self.t,
        }
    }

    /// True when tails can be bounded rigorously (absolute convergence).
    pub fn is_rigorous(&self) -> bool {
        self.sigma > 1.0
    }
}

/// Which of the two value distributions is being studied: that of log L
/// (case 1) or of L'/L (case 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Log,
    LogDeriv,
}

impl Mode {
    pub fn case_index(&self) -> u8 {
        match self {
            Mode::Log => 1,
            Mode::LogDeriv => 2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Mode::Log => "log",
            Mode::LogDeriv => "logderiv",
        }
    }

    pub fn from_case_index(case: u8) -> Result<Mode> {
        match case {
            1 => Ok(Mode::Log),
            2 => Ok(Mode::LogDeriv),
            other => Err(Error::invalid(format!(
                "case must be 1 (log L) or 2 (L'/L), got {}",
                other
            ))),
        }
    }
}

/// A truncated series value with its error accounting.
#[derive(Debug, Clone, Copy)]
pub struct LValue {
    pub value: Complex64,
    /// Rigorous bound on the dropped tail; meaningful only when
    /// `heuristic` is false.
    pub truncation_error: f64,
    /// Set when σ ≤ 1 and the value is a smoothed truncation without a
    /// convergence guarantee.
    pub heuristic: bool,
}

// ---------------------------------------------------------------------------
// tail majorants
// ---------------------------------------------------------------------------

/// Upper bound for Σ N^{−q} over prime-ideal norms N > x, for q > 1, x ≥ 2.
///
/// Partial summation against the majorant
/// A(u) ≤ μ(u) = 2.511(u + √u)/ln u + 1 gives
/// Σ ≤ ∫ q u^{−q−1} μ(u) du ≤ (2.511q/ln x)(x^{1−q}/(q−1) + x^{1/2−q}/(q−1/2)) + x^{−q}.
fn prime_norm_tail(q: f64, x: f64) -> f64 {
    debug_assert!(q > 1.0 && x >= 2.0);
    let lx = x.ln();
    2.511 * q / lx * (x.powf(1.0 - q) / (q - 1.0) + x.powf(0.5 - q) / (q - 0.5)) + x.powf(-q)
}

/// Upper bound for Σ ln(N)·N^{−q} over prime-ideal norms N > x, q > 1, x ≥ 2.
///
/// Same partial summation with f = ln(u)·u^{−q}, using −f' ≤ q ln(u) u^{−q−1};
/// the ln(u) cancels against the 1/ln(u) of the majorant's main term.
fn log_prime_norm_tail(q: f64, x: f64) -> f64 {
    debug_assert!(q > 1.0 && x >= 2.0);
    let lx = x.ln();
    2.511 * q * (x.powf(1.0 - q) / (q - 1.0) + x.powf(0.5 - q) / (q - 0.5))
        + x.powf(-q) * (lx + 1.0 / q)
}

/// Upper bound for the log-L tail Σ_{N > x} Σ_{k ≥ 1} N^{−kσ}/k: each inner
/// series is at most N^{−σ}/(1 − x^{−σ}).
fn log_l_tail(sigma: f64, x: f64) -> f64 {
    prime_norm_tail(sigma, x) / (1.0 - x.powf(-sigma))
}

/// Upper bound for the L'/L tail when truncating by prime-power norm
/// N^k ≤ x: norms with N > x lose every power, and norms in
/// (x^{1/(j+1)}, x^{1/j}] lose powers k ≥ j + 1.
fn log_deriv_l_tail(sigma: f64, x: f64) -> f64 {
    let geom = 1.0 / (1.0 - 3.0f64.powf(-sigma));
    let mut total = log_prime_norm_tail(sigma, x) * geom;
    let mut j = 1u32;
    loop {
        let q = sigma * (j + 1) as f64;
        let lo = x.powf(1.0 / (j + 1) as f64).max(2.0);
        let term = log_prime_norm_tail(q, lo) * geom;
        total += term;
        if term < 1e-18 * total || q > 200.0 {
            break;
        }
        j += 1;
    }
    total
}

/// Upper bound for Σ N^{−σ} over integral-ideal norms N > x, σ > 1, from
/// the crude count #{ideals of norm ≤ u} ≤ 2u.
fn ideal_norm_tail(sigma: f64, x: f64) -> f64 {
    debug_assert!(sigma > 1.0);
    2.0 * sigma / (sigma - 1.0) * x.powf(1.0 - sigma)
}

/// Smoothing scale for the heuristic regime: with weights e^{−N/(x/12)} the
/// dropped mass beyond the truncation is suppressed by e^{−12}.
fn smoothing_scale(x: u64) -> f64 {
    (x as f64) / 12.0
}

// ---------------------------------------------------------------------------
// series over ideals
// ---------------------------------------------------------------------------

fn check_tab(chi_tab: &[CharValue], table: &IdealTable) -> Result<()> {
    if chi_tab.len() != table.primes.recs.len() {
        return Err(Error::invalid(format!(
            "character table has {} entries for {} prime ideals",
            chi_tab.len(),
            table.primes.recs.len()
        )));
    }
    Ok(())
}

fn chi_of_ideal(chi_tab: &[CharValue], factors: &[(u32, u8)]) -> CharValue {
    let mut acc = CharValue::One;
    for &(i, e) in factors {
        acc = acc.mul(chi_tab[i as usize].pow(e as u32));
        if acc == CharValue::Zero {
            return CharValue::Zero;
        }
    }
    acc
}

/// The truncated Dirichlet series Σ_{N(𝔞) ≤ X} χ(𝔞) N(𝔞)^{−s}.
///
/// Rigorous with a tail bound for σ > 1; exponentially smoothed and flagged
/// heuristic for 1/2 < σ ≤ 1.
pub fn l_series(
    s: EvalPoint,
    chi_tab: &[CharValue],
    table: &IdealTable,
    x: u64,
) -> Result<LValue> {
    check_tab(chi_tab, table)?;
    if x > table.bound {
        return Err(Error::invalid(format!(
            "cutoff {} exceeds ideal table bound {}",
            x, table.bound
        )));
    }
    let minus_s = -s.as_complex();
    let rigorous = s.is_rigorous();
    let scale = smoothing_scale(x);
    let mut value = Complex64::new(0.0, 0.0);
    for rec in &table.recs {
        if rec.norm > x {
            break;
        }
        let chi = chi_of_ideal(chi_tab, &rec.factors);
        if chi == CharValue::Zero {
            continue;
        }
        let mut term = chi.to_complex() * (minus_s * (rec.norm as f64).ln()).exp();
        if !rigorous {
            term *= (-(rec.norm as f64) / scale).exp();
        }
        value += term;
    }
    Ok(LValue {
        value,
        truncation_error: if rigorous {
            ideal_norm_tail(s.sigma(), x as f64)
        } else {
            0.0
        },
        heuristic: !rigorous,
    })
}

/// The truncated logarithm log L(s, χ) = Σ_{N(𝔭) ≤ X} Σ_{k ≥ 1} χ(𝔭)^k N(𝔭)^{−ks}/k,
/// with the inner series summed to machine exhaustion.
pub fn log_l(s: EvalPoint, chi_tab: &[CharValue], primes: &[PrimeIdealRec], x: u64) -> Result<LValue> {
    if chi_tab.len() != primes.len() {
        return Err(Error::invalid(format!(
            "character table has {} entries for {} prime ideals",
            chi_tab.len(),
            primes.len()
        )));
    }
    let minus_s = -s.as_complex();
    let rigorous = s.is_rigorous();
    let scale = smoothing_scale(x);
    let mut value = Complex64::new(0.0, 0.0);
    for (rec, chi) in primes.iter().zip(chi_tab) {
        if rec.norm > x {
            break;
        }
        if *chi == CharValue::Zero {
            continue;
        }
        let z = chi.to_complex() * (minus_s * (rec.norm as f64).ln()).exp();
        let mut zk = z;
        let mut k = 1u32;
        loop {
            let mut term = zk / k as f64;
            if !rigorous {
                let npk = (rec.norm as f64).powi(k as i32);
                if npk > 60.0 * scale {
                    break;
                }
                term *= (-npk / scale).exp();
            }
            value += term;
            zk *= z;
            k += 1;
            if zk.norm() < 1e-19 || k > 2048 {
                break;
            }
        }
    }
    Ok(LValue {
        value,
        truncation_error: if rigorous {
            log_l_tail(s.sigma(), x as f64)
        } else {
            0.0
        },
        heuristic: !rigorous,
    })
}

/// The truncated logarithmic derivative
/// (L'/L)(s, χ) = −Σ_{N(𝔭)^k ≤ X} ln N(𝔭) · χ(𝔭)^k N(𝔭)^{−ks},
/// truncated by prime-power norm.
pub fn log_deriv_l(
    s: EvalPoint,
    chi_tab: &[CharValue],
    primes: &[PrimeIdealRec],
    x: u64,
) -> Result<LValue> {
    if chi_tab.len() != primes.len() {
        return Err(Error::invalid(format!(
            "character table has {} entries for {} prime ideals",
            chi_tab.len(),
            primes.len()
        )));
    }
    let minus_s = -s.as_complex();
    let rigorous = s.is_rigorous();
    let scale = smoothing_scale(x);
    let mut value = Complex64::new(0.0, 0.0);
    for (rec, chi) in primes.iter().zip(chi_tab) {
        if rec.norm > x {
            break;
        }
        if *chi == CharValue::Zero {
            continue;
        }
        let ln_n = (rec.norm as f64).ln();
        let z = chi.to_complex() * (minus_s * ln_n).exp();
        let mut zk = z;
        let mut npk = rec.norm as f64;
        loop {
            if npk > x as f64 {
                break;
            }
            let mut term = -ln_n * zk;
            if !rigorous {
                term *= (-npk / scale).exp();
            }
            value += term;
            zk *= z;
            npk *= rec.norm as f64;
            if zk.norm() < 1e-19 {
                break;
            }
        }
    }
    Ok(LValue {
        value,
        truncation_error: if rigorous {
            log_deriv_l_tail(s.sigma(), x as f64)
        } else {
            0.0
        },
        heuristic: !rigorous,
    })
}

// ---------------------------------------------------------------------------
// the multiplicative coefficients λ_y
// ---------------------------------------------------------------------------

/// Largest prime-power exponent accepted by [`lambda_y`].
pub const MAX_LAMBDA_EXPONENT: u32 = 64;

fn binomial_f64(n: u32, k: u32) -> f64 {
    let k = k.min(n - k.min(n));
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// The polynomial G_r(u) = Σ_{m=1}^{r} C(r−1, m−1) u^m / m!, with G_0 = 1.
fn g_poly(r: u32, u: Complex64) -> Complex64 {
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut u_pow = Complex64::new(1.0, 0.0);
    let mut m_fact = 1.0f64;
    for m in 1..=r {
        u_pow *= u;
        m_fact *= m as f64;
        acc += binomial_f64(r - 1, m - 1) * u_pow / m_fact;
    }
    acc
}

/// The coefficient λ_y(𝔭^α) of the expansion
/// exp((i/2)·y·ℒ_𝔭(s)) = Σ_α λ_y(𝔭^α) N(𝔭)^{−αs}
/// of the local factor of the studied statistic: for case 1 (log L) it is
/// the rising factorial (β)(β+1)⋯(β+α−1)/α! with β = (i/2)y, and for case 2
/// (L'/L) it is G_α(u) with u = −(i/2)·y·ln N(𝔭).
pub fn lambda_y(prime: &PrimeIdealRec, alpha: u32, y: Complex64, mode: Mode) -> Result<Complex64> {
    if alpha > MAX_LAMBDA_EXPONENT {
        return Err(Error::invalid(format!(
            "prime-power exponent {} exceeds limit {}",
            alpha, MAX_LAMBDA_EXPONENT
        )));
    }
    let half_iy = Complex64::new(0.0, 0.5) * y;
    match mode {
        Mode::Log => {
            let mut acc = Complex64::new(1.0, 0.0);
            for m in 0..alpha {
                acc = acc * (half_iy + m as f64) / (m + 1) as f64;
            }
            Ok(acc)
        }
        Mode::LogDeriv => {
            let u = -half_iy * (prime.norm as f64).ln();
            Ok(g_poly(alpha, u))
        }
    }
}

/// Reference evaluation of λ_y(𝔭^α) that bypasses the closed forms: the
/// local logarithm series is exponentiated coefficient by coefficient with
/// the power-series recurrence e_m = (1/m) Σ_{k=1}^{m} k·c_k·e_{m−k}.
pub fn lambda_y_reference(
    prime: &PrimeIdealRec,
    alpha: u32,
    y: Complex64,
    mode: Mode,
) -> Result<Complex64> {
    if alpha > MAX_LAMBDA_EXPONENT {
        return Err(Error::invalid(format!(
            "prime-power exponent {} exceeds limit {}",
            alpha, MAX_LAMBDA_EXPONENT
        )));
    }
    let half_iy = Complex64::new(0.0, 0.5) * y;
    let c = |k: u32| -> Complex64 {
        match mode {
            // (i/2) y ℒ_𝔭 with ℒ_𝔭 = −ln(1 − X) = Σ X^k/k.
            Mode::Log => half_iy / k as f64,
            // (i/2) y ℒ_𝔭 with ℒ_𝔭 = −ln N · Σ X^k.
            Mode::LogDeriv => -half_iy * (prime.norm as f64).ln(),
        }
    };
    let mut e = vec![Complex64::new(0.0, 0.0); (alpha + 1) as usize];
    e[0] = Complex64::new(1.0, 0.0);
    for m in 1..=alpha as usize {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=m {
            acc += k as f64 * c(k as u32) * e[m - k];
        }
        e[m] = acc / m as f64;
    }
    Ok(e[alpha as usize])
}

// ---------------------------------------------------------------------------
// the twisted double series I_y
// ---------------------------------------------------------------------------

/// The truncated twisted series
/// I_y(s, χ) = Σ_{N(𝔞),N(𝔟) ≤ X} λ_ȳ(𝔞) λ_y(𝔟) χ(𝔞𝔟²) N(𝔞)^{−s} N(𝔟)^{−s̄},
/// which factors as (Σ_𝔞 λ_ȳ χ N^{−s})·(Σ_𝔟 λ_y χ² N^{−s̄}).
///
/// For the full series both factors are unimodular up to a common phase and
/// I_y = exp(i(y₁·Re ℒ + y₂·Im ℒ)).
pub fn i_y_series(
    s: EvalPoint,
    chi_tab: &[CharValue],
    table: &IdealTable,
    y: Complex64,
    mode: Mode,
    x: u64,
) -> Result<Complex64> {
    check_tab(chi_tab, table)?;
    if x > table.bound {
        return Err(Error::invalid(format!(
            "cutoff {} exceeds ideal table bound {}",
            x, table.bound
        )));
    }
    let lambda_cache = |param: Complex64| -> Result<Vec<Vec<Complex64>>> {
        table
            .primes
            .recs
            .iter()
            .map(|rec| {
                let mut max_e = 0u32;
                let mut n = rec.norm;
                while n <= x {
                    max_e += 1;
                    n = match n.checked_mul(rec.norm) {
                        Some(v) => v,
                        None => break,
                    };
                }
                (0..=max_e)
                    .map(|e| lambda_y(rec, e, param, mode))
                    .collect()
            })
            .collect()
    };
    let lam_a = lambda_cache(y.conj())?;
    let lam_b = lambda_cache(y)?;

    let minus_s = -s.as_complex();
    let minus_s_bar = -s.conj().as_complex();
    let mut sum_a = Complex64::new(0.0, 0.0);
    let mut sum_b = Complex64::new(0.0, 0.0);
    for rec in &table.recs {
        if rec.norm > x {
            break;
        }
        let chi = chi_of_ideal(chi_tab, &rec.factors);
        if chi == CharValue::Zero {
            continue;
        }
        let ln_n = (rec.norm as f64).ln();
        let mut la = Complex64::new(1.0, 0.0);
        let mut lb = Complex64::new(1.0, 0.0);
        for &(i, e) in &rec.factors {
            la *= lam_a[i as usize][e as usize];
            lb *= lam_b[i as usize][e as usize];
        }
        sum_a += la * chi.to_complex() * (minus_s * ln_n).exp();
        sum_b += lb * chi.pow(2).to_complex() * (minus_s_bar * ln_n).exp();
    }
    Ok(sum_a * sum_b)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
