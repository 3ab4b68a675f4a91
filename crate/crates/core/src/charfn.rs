//! The characteristic function φ of the limiting two-dimensional value
//! distribution, its local atomic measures, rigorous truncation bounds, and
//! the decay machinery: per-prime window bounds, a hybrid estimator for
//! −ln|φ| far beyond any enumerable truncation, and fitted decay envelopes.
//!
//! The distribution is an infinite convolution of independent local pieces,
//! one per prime ideal.  The ramified prime contributes a deterministic
//! shift.  Every unramified prime 𝔭 contributes the atomic measure
//!
//!   F_{s,𝔭} = 1/(N+1) · δ₀ + N/(3(N+1)) · Σ_{j=0}^{2} δ_{−a_{𝔭,j}},
//!
//! where N = N(𝔭) and a_{𝔭,j} is the local value of the studied statistic
//! when the character takes the value ζ₃^j: a_{𝔭,j} = log(1 − ζ₃^j N^{−s})
//! in case 1 and ζ₃^j ln N/(N^s − ζ₃^j) in case 2.  The pairing between
//! frequency y = y₁ + iy₂ and a sample z is ⟨y, z⟩ = Re(ȳz), so the local
//! characteristic factor is
//!
//!   φ_𝔭(y) = 1/(N+1) + N/(3(N+1)) · Σ_j exp(−i·Re(ȳ·a_{𝔭,j})).

use crate::eisenstein::{stream_prime_norms, PrimeIdealRec, PrimeTable, Splitting};
use crate::error::{Error, Result};
use crate::lfunc::{EvalPoint, Mode};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

const SQRT3: f64 = 1.7320508075688772;
/// The cube roots of unity ζ₃^0, ζ₃^1, ζ₃^2.
const ZETA3: [Complex64; 3] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(-0.5, 0.8660254037844386),
    Complex64::new(-0.5, -0.8660254037844386),
];

// ---------------------------------------------------------------------------
// local atoms
// ---------------------------------------------------------------------------

/// The local value a_{𝔭,j} of the studied statistic at a prime of norm
/// `N(𝔭)` when the character value is ζ₃^j.
pub fn local_a(prime: &PrimeIdealRec, j: u8, s: EvalPoint, mode: Mode) -> Result<Complex64> {
    local_a_at_norm(prime.norm as f64, j, s, mode)
}

/// [`local_a`] at a real norm argument; the continuum version used by the
/// tail quadrature of [`log_modulus_estimate`].
fn local_a_at_norm(norm: f64, j: u8, s: EvalPoint, mode: Mode) -> Result<Complex64> {
    if j > 2 {
        return Err(Error::invalid(format!("root index {} exceeds 2", j)));
    }
    let zeta = ZETA3[j as usize];
    let ln_n = norm.ln();
    match mode {
        Mode::Log => {
            let z = Complex64::new(1.0, 0.0) - zeta * (-s.as_complex() * ln_n).exp();
            if z.norm() < 1e-14 {
                return Err(Error::domain(
                    "logarithm branch point: N^{-s} hits a cube root of unity",
                ));
            }
            Ok(z.ln())
        }
        Mode::LogDeriv => {
            let denom = (s.as_complex() * ln_n).exp() - zeta;
            if denom.norm() < 1e-14 {
                return Err(Error::domain("pole: N^s hits a cube root of unity"));
            }
            Ok(zeta * ln_n / denom)
        }
    }
}

/// An exact nonnegative rational, used for the atomic weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// The atomic measure a single prime ideal contributes to the convolution.
///
/// Support points are the sample values themselves: the unramified measure
/// puts weight `weight_zero` at the origin and `weight_atom` at each entry
/// of `support` (which stores −a_{𝔭,j}); the ramified measure is the point
/// mass at `shift` = −a_{𝔭,0}.
#[derive(Debug, Clone)]
pub enum LocalAtomSet {
    Ramified {
        norm: u64,
        shift: Complex64,
    },
    Unramified {
        norm: u64,
        weight_zero: Rational,
        weight_atom: Rational,
        support: [Complex64; 3],
    },
}

impl LocalAtomSet {
    pub fn new(prime: &PrimeIdealRec, s: EvalPoint, mode: Mode) -> Result<Self> {
        if prime.splitting == Splitting::Ramified {
            return Ok(LocalAtomSet::Ramified {
                norm: prime.norm,
                shift: -local_a(prime, 0, s, mode)?,
            });
        }
        let n = prime.norm;
        let support = [
            -local_a(prime, 0, s, mode)?,
            -local_a(prime, 1, s, mode)?,
            -local_a(prime, 2, s, mode)?,
        ];
        Ok(LocalAtomSet::Unramified {
            norm: n,
            weight_zero: Rational { num: 1, den: n + 1 },
            weight_atom: Rational {
                num: n,
                den: 3 * (n + 1),
            },
            support,
        })
    }

    pub fn norm(&self) -> u64 {
        match self {
            LocalAtomSet::Ramified { norm, .. } => *norm,
            LocalAtomSet::Unramified { norm, .. } => *norm,
        }
    }

    /// The local characteristic factor E[exp(i⟨y, Z⟩)].
    ///
    /// Arranged as (1 + N·(S/3))/(N + 1) with S the sum over the three
    /// support phases, so that y = 0 evaluates to exactly 1.
    pub fn cf(&self, y: Complex64) -> Complex64 {
        match self {
            LocalAtomSet::Ramified { shift, .. } => {
                Complex64::from_polar(1.0, (y.conj() * shift).re)
            }
            LocalAtomSet::Unramified { norm, support, .. } => {
                let mut s = Complex64::new(0.0, 0.0);
                for z in support {
                    s += Complex64::from_polar(1.0, (y.conj() * z).re);
                }
                let n = *norm as f64;
                (1.0 + n * (s / 3.0)) / (n + 1.0)
            }
        }
    }

    /// The largest modulus among the support points.
    pub fn max_support(&self) -> f64 {
        match self {
            LocalAtomSet::Ramified { shift, .. } => shift.norm(),
            LocalAtomSet::Unramified { support, .. } => {
                support.iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
        }
    }
}

/// The local characteristic factor of an unramified prime of (possibly
/// non-integer) norm `u`, identical to [`LocalAtomSet::cf`] at integer
/// norms.  Shared by the truncated product and the tail quadrature.
pub fn local_factor(u: f64, s: EvalPoint, y: Complex64, mode: Mode) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..3u8 {
        let a = local_a_at_norm(u, j, s, mode).expect("no poles right of the critical line");
        sum += Complex64::from_polar(1.0, -(y.conj() * a).re);
    }
    (1.0 + u * (sum / 3.0)) / (u + 1.0)
}

// ---------------------------------------------------------------------------
// the truncated characteristic function
// ---------------------------------------------------------------------------

/// A truncated value of φ together with a rigorous bound on the relative
/// distance to the full infinite product.
#[derive(Debug, Clone, Copy)]
pub struct CharFnValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// φ(y₁, y₂) as the ramified prefactor times the product of local factors
/// over unramified primes of norm ≤ `cutoff`.
///
/// The tail bound is exp(Σ_{N > cutoff} m(N)) − 1 where m majorises
/// |φ_𝔭(y) − 1|; see [`product_tail_bound`].
pub fn char_fn(
    s: EvalPoint,
    y: (f64, f64),
    mode: Mode,
    primes: &PrimeTable,
    cutoff: u64,
) -> Result<CharFnValue> {
    if cutoff < 3 {
        return Err(Error::invalid("cutoff must include the ramified prime"));
    }
    let recs = primes.up_to(cutoff)?;
    let yc = Complex64::new(y.0, y.1);

    // Fixed-size chunks with an ordered reduction keep the result identical
    // across thread counts.
    let chunk_products: Vec<Complex64> = recs
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = Complex64::new(1.0, 0.0);
            for rec in chunk {
                let atoms = LocalAtomSet::new(rec, s, mode)
                    .expect("atom sets exist right of the critical line");
                acc *= atoms.cf(yc);
            }
            acc
        })
        .collect();
    let mut value = Complex64::new(1.0, 0.0);
    for p in chunk_products {
        value *= p;
    }
    Ok(CharFnValue {
        value,
        tail_bound: product_tail_bound(s, yc.norm(), mode, cutoff as f64),
    })
}

/// Rigorous majorant for the relative tail of the Euler product beyond the
/// cutoff x: |∏_{N > x} φ_𝔭(y)| deviates from 1 by at most exp(S) − 1 with
/// S = Σ_{N > x} m(N).
///
/// Writing φ_𝔭 − 1 = w_a Σ_j (e^{−iφ_j} − 1) with w_a ≤ 1/3 and using
/// |e^{ix} − 1 − ix| ≤ x²/2 gives |φ_𝔭 − 1| ≤ (1/3)(|Σ_j φ_j| + Σ_j φ_j²/2).
/// The three phases nearly cancel: Σ_j a_{𝔭,j} telescopes to
/// 3 ln N/(N^{3s} − 1) in case 2 and ln(1 − N^{−3s}) in case 1, so the
/// linear term decays like N^{−3σ} while the quadratic term carries N^{−2σ}.
/// The prime-ideal sums are bounded by partial summation against
/// #{N(𝔭) ≤ u} ≤ 2.511(u + √u)/ln u + 1.
pub fn product_tail_bound(s: EvalPoint, y_abs: f64, mode: Mode, x: f64) -> f64 {
    debug_assert!(x >= 3.0);
    let sigma = s.sigma();
    let c1 = 1.0 / (1.0 - x.powf(-sigma));
    let c3 = 1.0 / (1.0 - x.powf(-3.0 * sigma));
    let sum = match mode {
        Mode::LogDeriv => {
            y_abs * c3 * log_tail(3.0 * sigma, x)
                + 0.5 * (y_abs * c1).powi(2) * log2_tail(2.0 * sigma, x)
        }
        Mode::Log => {
            y_abs * c3 / 3.0 * plain_tail(3.0 * sigma, x)
                + 0.5 * (y_abs * c1).powi(2) * plain_tail(2.0 * sigma, x)
        }
    };
    sum.exp_m1()
}

// Partial-summation bounds for Σ f(N) over prime-ideal norms N > x against
// the majorant μ(u) = 2.511(u + √u)/ln u + 1, for the three shapes of f
// needed above.  All require q > 1 and x ≥ 3.

/// Σ N^{−q}  ≤  (2.511 q/ln x)(x^{1−q}/(q−1) + x^{½−q}/(q−½)) + x^{−q}.
fn plain_tail(q: f64, x: f64) -> f64 {
    let lx = x.ln();
    2.511 * q / lx * (x.powf(1.0 - q) / (q - 1.0) + x.powf(0.5 - q) / (q - 0.5)) + x.powf(-q)
}

/// Σ ln(N)·N^{−q}  ≤  2.511 q (x^{1−q}/(q−1) + x^{½−q}/(q−½)) + x^{−q}(ln x + 1/q).
fn log_tail(q: f64, x: f64) -> f64 {
    2.511 * q * (x.powf(1.0 - q) / (q - 1.0) + x.powf(0.5 - q) / (q - 0.5))
        + x.powf(-q) * (x.ln() + 1.0 / q)
}

/// Σ ln²(N)·N^{−q}  ≤  2.511 q Σ_{r∈{q−1, q−½}} x^{−r}(ln x/r + 1/r²)
///                     + x^{−q}(ln²x + 2 ln x/q + 2/q²).
fn log2_tail(q: f64, x: f64) -> f64 {
    let lx = x.ln();
    let piece = |r: f64| x.powf(-r) * (lx / r + 1.0 / (r * r));
    2.511 * q * (piece(q - 1.0) + piece(q - 0.5))
        + x.powf(-q) * (lx * lx + 2.0 * lx / q + 2.0 / (q * q))
}

/// Total reach of the truncated convolution: the sum over primes of norm
/// ≤ `cutoff` of the largest support modulus.  The truncated distribution
/// is supported inside the disk of this radius, which drives the alias
/// safety margin of the Fourier inversion.
pub fn support_radius(s: EvalPoint, mode: Mode, primes: &PrimeTable, cutoff: u64) -> Result<f64> {
    let recs = primes.up_to(cutoff)?;
    let mut total = 0.0;
    for rec in recs {
        total += LocalAtomSet::new(rec, s, mode)?.max_support();
    }
    Ok(total)
}

/// Largest deviation of a partial Euler product from 1 over a set of
/// frequencies: max_y |∏_{m < N ≤ n} φ_𝔭(y) − 1|.
pub fn partial_product_drift(
    s: EvalPoint,
    mode: Mode,
    primes: &PrimeTable,
    m: u64,
    n: u64,
    ys: &[(f64, f64)],
) -> Result<f64> {
    let recs = primes.up_to(n)?;
    let lo = recs.partition_point(|r| r.norm <= m);
    let band = &recs[lo..];
    let mut worst = 0.0f64;
    for &(y1, y2) in ys {
        let y = Complex64::new(y1, y2);
        let mut prod = Complex64::new(1.0, 0.0);
        for rec in band {
            if rec.splitting == Splitting::Ramified {
                continue;
            }
            prod *= LocalAtomSet::new(rec, s, mode)?.cf(y);
        }
        worst = worst.max((prod - Complex64::new(1.0, 0.0)).norm());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// per-prime window bounds
// ---------------------------------------------------------------------------

/// The norm window in which the first-order local factor of case 2 is
/// provably bounded away from modulus 1: primes with
/// a_lo ≤ N(𝔭)^σ ≤ b_hi, where
/// a_lo = |y|ln|y|/(σ(π/6 − ε)) and b_hi = |y|ln|y|/(σ(2π/(9√3) + ε)).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayWindow {
    pub sigma: f64,
    pub epsilon: f64,
    pub y_abs: f64,
    pub a_lo: f64,
    pub b_hi: f64,
    pub n_lo: u64,
    pub n_hi: u64,
}

impl DecayWindow {
    pub fn new(sigma: f64, epsilon: f64, y_abs: f64) -> Result<Self> {
        if sigma <= 0.5 {
            return Err(Error::invalid("window requires sigma > 1/2"));
        }
        if y_abs <= std::f64::consts::E {
            return Err(Error::invalid("window requires |y| > e"));
        }
        let c_hi = std::f64::consts::PI / 6.0;
        let c_lo = 2.0 * std::f64::consts::PI / (9.0 * SQRT3);
        if epsilon <= 0.0 || epsilon >= (c_hi - c_lo) / 2.0 {
            return Err(Error::invalid(format!(
                "epsilon {} leaves an empty phase window",
                epsilon
            )));
        }
        let scale = y_abs * y_abs.ln() / sigma;
        let a_lo = scale / (c_hi - epsilon);
        let b_hi = scale / (c_lo + epsilon);
        debug_assert!(a_lo < b_hi);
        let n_lo = (a_lo.powf(1.0 / sigma).floor() as u64).saturating_sub(2).max(3);
        let n_hi = b_hi.powf(1.0 / sigma).ceil() as u64 + 2;
        Ok(DecayWindow {
            sigma,
            epsilon,
            y_abs,
            a_lo,
            b_hi,
            n_lo,
            n_hi,
        })
    }
}

/// The first-order model of the case-2 local factor:
/// G = 1/(N+1) + N/(3(N+1)) · Σ_j exp(−i·ln N·Re(ȳ ζ₃^j N^{−it})/N^σ).
pub fn g_factor(norm: f64, s: EvalPoint, y: Complex64) -> Complex64 {
    let ln_n = norm.ln();
    let n_it = Complex64::from_polar(1.0, -s.t() * ln_n);
    let mut sum = Complex64::new(0.0, 0.0);
    for zeta in ZETA3 {
        let phase = ln_n * (y.conj() * zeta * n_it).re / norm.powf(s.sigma());
        sum += Complex64::from_polar(1.0, -phase);
    }
    1.0 / (norm + 1.0) + norm / (3.0 * (norm + 1.0)) * sum
}

/// The phase amplitude X = |y| ln N / N^σ and rotated angle
/// θ' = arg y + t ln N that parameterise the window analysis.
fn window_coords(norm: f64, s: EvalPoint, y: Complex64) -> (f64, f64) {
    let ln_n = norm.ln();
    let x = y.norm() * ln_n / norm.powf(s.sigma());
    let theta = y.arg() + s.t() * ln_n;
    (x, theta)
}

/// The three-phase factor H with
/// Σ_j exp(−iX cos(θ' − 2πj/3)) = e^{−iX cos θ'} · H.
pub fn h_factor(norm: f64, s: EvalPoint, y: Complex64) -> Complex64 {
    let (x, theta) = window_coords(norm, s, y);
    let pi6 = std::f64::consts::PI / 6.0;
    Complex64::new(1.0, 0.0)
        + Complex64::from_polar(1.0, SQRT3 * x * (theta + pi6).cos())
        + Complex64::from_polar(1.0, SQRT3 * x * (theta - pi6).cos())
}

/// The interference term J with |H|² = 3 + 2J.
pub fn j_quantity(norm: f64, s: EvalPoint, y: Complex64) -> f64 {
    let (x, theta) = window_coords(norm, s, y);
    2.0 * (1.5 * x * theta.cos()).cos() * (0.5 * SQRT3 * x * theta.sin()).cos()
        + (SQRT3 * x * theta.sin()).cos()
}

/// One prime at which a claimed bound on |G| failed.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowViolation {
    pub norm: u64,
    pub abs_g: f64,
    pub bound: f64,
}

/// Outcome of sweeping |G| over every prime ideal in a decay window.
#[derive(Debug, Clone, Serialize)]
pub struct WindowReport {
    pub window: DecayWindow,
    pub t: f64,
    pub theta_y: f64,
    /// Prime ideals examined, counted with multiplicity (split norms twice).
    pub examined: u64,
    pub min_abs_g: f64,
    pub max_abs_g: f64,
    /// Ideals in the steep regime |cos θ'| > √3/2, bounded by 0.9799.
    pub case_steep: u64,
    /// Ideals in the shallow regime |cos θ'| ≤ √3/2, bounded by 0.9978.
    pub case_shallow: u64,
    /// Diagnostic only: ideals whose phase amplitude X lies inside
    /// (2π/(9√3), π/6).  At numerically reachable |y| this interval misses
    /// most window primes; the modulus bounds below hold regardless.
    pub in_phase_interval: u64,
    pub violations: Vec<WindowViolation>,
    pub violations_truncated: bool,
}

impl WindowReport {
    pub fn passed(&self) -> bool {
        self.examined > 0 && self.violations.is_empty() && !self.violations_truncated
    }
}

/// Verifies the window bounds 0.097 < |G| < 0.9978 (sharpened to 0.9799 in
/// the steep-phase regime) for every prime ideal with N^σ inside the
/// window, at frequency y = y_abs·e^{iθ_y}.
pub fn verify_gbound(window: &DecayWindow, t: f64, theta_y: f64) -> Result<WindowReport> {
    let s = EvalPoint::new(window.sigma, t)?;
    let y = Complex64::from_polar(window.y_abs, theta_y);
    let phase_lo = 2.0 * std::f64::consts::PI / (9.0 * SQRT3);
    let phase_hi = std::f64::consts::PI / 6.0;
    const MAX_VIOLATIONS: usize = 100;

    let mut report = WindowReport {
        window: *window,
        t,
        theta_y,
        examined: 0,
        min_abs_g: f64::INFINITY,
        max_abs_g: 0.0,
        case_steep: 0,
        case_shallow: 0,
        in_phase_interval: 0,
        violations: Vec::new(),
        violations_truncated: false,
    };
    stream_prime_norms(window.n_lo, window.n_hi, &mut |norm, mult| {
        let u = norm as f64;
        let u_sigma = u.powf(window.sigma);
        if u_sigma < window.a_lo || u_sigma > window.b_hi {
            return;
        }
        let mult = mult as u64;
        report.examined += mult;
        let g = g_factor(u, s, y).norm();
        report.min_abs_g = report.min_abs_g.min(g);
        report.max_abs_g = report.max_abs_g.max(g);
        let (x, theta) = window_coords(u, s, y);
        let steep = theta.cos().abs() > SQRT3 / 2.0;
        let bound = if steep {
            report.case_steep += mult;
            0.9799
        } else {
            report.case_shallow += mult;
            0.9978
        };
        if x > phase_lo && x < phase_hi {
            report.in_phase_interval += mult;
        }
        if !(g > 0.097 && g < bound) {
            if report.violations.len() < MAX_VIOLATIONS {
                report.violations.push(WindowViolation {
                    norm,
                    abs_g: g,
                    bound,
                });
            } else {
                report.violations_truncated = true;
            }
        }
    })?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// hybrid −ln|φ| estimator and decay envelopes
// ---------------------------------------------------------------------------

/// Estimates −ln|φ(y)| for the full infinite product.
///
/// Local factors over the enumerated primes are multiplied exactly; beyond
/// the table the same exact factor formula is integrated against the smooth
/// prime-ideal density (1/ln u + 1/(2√u ln u)) du with phase-adaptive
/// Simpson panels; past the point where the phase amplitude drops below
/// 10⁻³ the integrand is replaced by its quadratic approximation in closed
/// form.  This is an estimator (the continuum density smooths prime gaps),
/// not a bound; the regression and envelope fits consume it.
pub fn log_modulus_estimate(
    s: EvalPoint,
    y: Complex64,
    mode: Mode,
    primes: &PrimeTable,
) -> Result<f64> {
    if primes.bound < 100_000 {
        return Err(Error::invalid(
            "hybrid estimator needs a prime table enumerated to at least 1e5",
        ));
    }
    let sigma = s.sigma();
    let y_abs = y.norm();

    // Exact part over enumerated unramified primes.
    let exact: f64 = primes
        .recs
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = 0.0;
            for rec in chunk {
                if rec.splitting == Splitting::Ramified {
                    continue;
                }
                let m = local_factor(rec.norm as f64, s, y, mode).norm();
                acc -= m.max(1e-300).ln();
            }
            acc
        })
        .sum();

    // Phase amplitude of the oscillatory regime.
    let amplitude = |u: f64| -> f64 {
        match mode {
            Mode::LogDeriv => y_abs * u.ln() / u.powf(sigma),
            Mode::Log => y_abs / u.powf(sigma),
        }
    };

    let u0 = primes.bound as f64;
    let mut u1 = u0;
    while amplitude(u1) > 1e-3 {
        u1 *= 2.0;
        if u1 > 1e300 {
            break;
        }
    }

    // Oscillatory middle: integrate −ln|M_u| against the prime-ideal
    // density in logarithmic coordinates, with steps tied to the local
    // phase so each Simpson panel sees a fraction of an oscillation.
    let integrand = |v: f64| -> f64 {
        let u = v.exp();
        let m = local_factor(u, s, y, mode).norm();
        let density = 1.0 / v + 1.0 / (2.0 * u.sqrt() * v);
        -(m.max(1e-300).ln()) * density * u
    };
    let mut middle = 0.0;
    if u1 > u0 {
        let v_end = u1.ln();
        let mut v = u0.ln();
        while v < v_end {
            let x_here = amplitude(v.exp());
            let h = (0.3 / (1.0 + 1.8 * sigma * x_here)).min(0.02).min(v_end - v);
            middle += h / 6.0 * (integrand(v) + 4.0 * integrand(v + h / 2.0) + integrand(v + h));
            v += h;
        }
    }

    // Quadratic remainder: −ln|M_u| ≈ X(u)²/4 with the same density.
    let q = 2.0 * sigma - 1.0;
    let lu = u1.ln();
    let remainder = match mode {
        Mode::LogDeriv => 0.25 * y_abs * y_abs * u1.powf(-q) * (lu / q + 1.0 / (q * q)),
        Mode::Log => 0.25 * y_abs * y_abs * u1.powf(-q) / (q * lu) * (1.0 + 1.0 / (q * lu)),
    };

    Ok(exact + middle + remainder)
}

/// A fitted upper envelope exp(−ĉ·|y|^{1/σ}(ln|y|)^p) for |φ|, with
/// p = 1/σ − 1 in case 2 and p = −1 in case 1.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayEnvelope {
    pub sigma: f64,
    pub case_index: u8,
    pub c_hat: f64,
    pub log_exponent: f64,
}

impl DecayEnvelope {
    /// Calibrates ĉ on a ladder |y| = 10^{2..4.5} so the envelope upper
    /// bounds the measured modulus at every ladder point.
    pub fn fit(sigma: f64, mode: Mode, primes: &PrimeTable) -> Result<Self> {
        let s = EvalPoint::new(sigma, 0.0)?;
        let log_exponent = match mode {
            Mode::LogDeriv => 1.0 / sigma - 1.0,
            Mode::Log => -1.0,
        };
        let mut c_hat = f64::INFINITY;
        for k in 0..=10 {
            let y_abs = 10f64.powf(2.0 + 0.25 * k as f64);
            let measured =
                log_modulus_estimate(s, Complex64::new(y_abs, 0.0), mode, primes)?;
            let shape = y_abs.powf(1.0 / sigma) * y_abs.ln().powf(log_exponent);
            c_hat = c_hat.min(measured / shape);
        }
        if !(c_hat.is_finite() && c_hat > 0.0) {
            return Err(Error::invalid("envelope calibration degenerated"));
        }
        Ok(DecayEnvelope {
            sigma,
            case_index: mode.case_index(),
            c_hat,
            log_exponent,
        })
    }

    /// The envelope value at |y| = `y_abs` (trivially 1 below |y| = e²).
    pub fn eval(&self, y_abs: f64) -> f64 {
        if y_abs < (2.0f64).exp() {
            return 1.0;
        }
        let shape = y_abs.powf(1.0 / self.sigma) * y_abs.ln().powf(self.log_exponent);
        (-self.c_hat * shape).exp()
    }

    /// The smallest ladder radius at which the envelope drops below
    /// `target`.
    pub fn choose_radius(&self, target: f64) -> Result<f64> {
        if !(target > 0.0 && target < 1.0) {
            return Err(Error::invalid("envelope target must be in (0, 1)"));
        }
        let mut r = 10.0f64;
        while r < 1e7 {
            if self.eval(r) <= target {
                return Ok(r);
            }
            r *= 1.05;
        }
        Err(Error::invalid(format!(
            "envelope never reaches target {}",
            target
        )))
    }
}

/// Least-squares slope of ln(−ln|φ|) against ln|y| over a ladder of
/// frequencies; the decay law predicts a slope near 1/σ.
pub fn decay_slope(
    sigma: f64,
    mode: Mode,
    primes: &PrimeTable,
    ladder: &[f64],
) -> Result<f64> {
    if ladder.len() < 3 {
        return Err(Error::invalid("regression needs at least three ladder points"));
    }
    let s = EvalPoint::new(sigma, 0.0)?;
    let mut xs = Vec::with_capacity(ladder.len());
    let mut ys = Vec::with_capacity(ladder.len());
    for &y_abs in ladder {
        let measured = log_modulus_estimate(s, Complex64::new(y_abs, 0.0), mode, primes)?;
        if measured <= 0.0 {
            return Err(Error::invalid(
                "modulus estimate not in the decaying regime",
            ));
        }
        xs.push(y_abs.ln());
        ys.push(measured.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(cov / var)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eisenstein::enumerate_prime_ideals;

    fn prime_of_norm(table: &PrimeTable, n: u64) -> PrimeIdealRec {
        table.recs.iter().find(|r| r.norm == n).unwrap().clone()
    }

    #[test]
    fn local_a_frozen_values() {
        // Frozen from an independent 40-digit evaluation.
        let table = enumerate_prime_ideals(20).unwrap();
        let p3 = prime_of_norm(&table, 3);
        let p7 = prime_of_norm(&table, 7);
        let p13 = prime_of_norm(&table, 13);

        let v = local_a(&p3, 0, EvalPoint::new(1.0, 0.0).unwrap(), Mode::LogDeriv).unwrap();
        assert!((v - Complex64::new(0.5493061443340548, 0.0)).norm() < 1e-15);

        let v = local_a(&p7, 1, EvalPoint::new(0.75, 0.0).unwrap(), Mode::LogDeriv).unwrap();
        assert!(
            (v - Complex64::new(-0.2574335343564828, 0.3044152067153105)).norm() < 1e-15,
            "got {}",
            v
        );

        let v = local_a(&p7, 2, EvalPoint::new(1.2, 0.3).unwrap(), Mode::Log).unwrap();
        assert!(
            (v - Complex64::new(0.0838381462983869, 0.0398022609590112)).norm() < 1e-15,
            "got {}",
            v
        );

        let v = local_a(&p13, 2, EvalPoint::new(0.6, 1.0).unwrap(), Mode::LogDeriv).unwrap();
        assert!(
            (v - Complex64::new(-0.1378267656329408, 0.5142814565255751)).norm() < 1e-14,
            "got {}",
            v
        );
    }

    #[test]
    fn local_a_rejects_bad_root_index() {
        let table = enumerate_prime_ideals(10).unwrap();
        let p = prime_of_norm(&table, 4);
        assert!(local_a(&p, 3, EvalPoint::new(1.0, 0.0).unwrap(), Mode::Log).is_err());
    }

    #[test]
    fn atom_weights_are_exact_rationals() {
        let table = enumerate_prime_ideals(200).unwrap();
        let s = EvalPoint::new(1.1, 0.4).unwrap();
        for rec in &table.recs {
            match LocalAtomSet::new(rec, s, Mode::LogDeriv).unwrap() {
                LocalAtomSet::Unramified {
                    weight_zero,
                    weight_atom,
                    ..
                } => {
                    // w0 + 3·wa = 1 exactly, checked in integer arithmetic.
                    let lhs = weight_zero.num as u128 * weight_atom.den as u128
                        + 3 * weight_atom.num as u128 * weight_zero.den as u128;
                    let rhs = weight_zero.den as u128 * weight_atom.den as u128;
                    assert_eq!(lhs, rhs);
                }
                LocalAtomSet::Ramified { norm, .. } => assert_eq!(norm, 3),
            }
        }
    }

    #[test]
    fn local_cf_is_one_at_zero_frequency() {
        let table = enumerate_prime_ideals(1_000).unwrap();
        let s = EvalPoint::new(0.8, -1.0).unwrap();
        for rec in &table.recs {
            for mode in [Mode::Log, Mode::LogDeriv] {
                let atoms = LocalAtomSet::new(rec, s, mode).unwrap();
                let v = atoms.cf(Complex64::new(0.0, 0.0));
                assert_eq!(v, Complex64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn local_factor_matches_atom_cf() {
        let table = enumerate_prime_ideals(500).unwrap();
        let s = EvalPoint::new(0.9, 0.7).unwrap();
        let y = Complex64::new(1.3, -2.2);
        for rec in &table.recs {
            if rec.splitting == Splitting::Ramified {
                continue;
            }
            for mode in [Mode::Log, Mode::LogDeriv] {
                let via_atoms = LocalAtomSet::new(rec, s, mode).unwrap().cf(y);
                let via_factor = local_factor(rec.norm as f64, s, y, mode);
                assert!((via_atoms - via_factor).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn char_fn_is_one_at_the_origin_and_contractive() {
        let primes = enumerate_prime_ideals(10_000).unwrap();
        for mode in [Mode::Log, Mode::LogDeriv] {
            for sigma in [0.75, 1.2, 1.5] {
                let s = EvalPoint::new(sigma, 0.0).unwrap();
                let at0 = char_fn(s, (0.0, 0.0), mode, &primes, 10_000).unwrap();
                assert_eq!(at0.value, Complex64::new(1.0, 0.0));
                for y in [(0.5, 0.0), (-2.0, 3.0), (10.0, -20.0), (31.0, 47.0)] {
                    let v = char_fn(s, y, mode, &primes, 10_000).unwrap();
                    assert!(v.value.norm() <= 1.0 + 1e-12, "|phi| = {}", v.value.norm());
                }
            }
        }
    }

    #[test]
    fn char_fn_symmetries() {
        let primes = enumerate_prime_ideals(10_000).unwrap();
        let y = (1.7, -0.9);
        for mode in [Mode::Log, Mode::LogDeriv] {
            for (sigma, t) in [(0.75, 0.0), (1.2, 0.7), (1.5, -1.3)] {
                let s = EvalPoint::new(sigma, t).unwrap();
                let plus = char_fn(s, y, mode, &primes, 10_000).unwrap().value;
                let minus = char_fn(s, (-y.0, -y.1), mode, &primes, 10_000).unwrap().value;
                assert!((plus.conj() - minus).norm() < 1e-13);

                let mirrored = char_fn(s.conj(), (y.0, y.1), mode, &primes, 10_000)
                    .unwrap()
                    .value;
                let flipped = char_fn(s, (y.0, -y.1), mode, &primes, 10_000).unwrap().value;
                assert!(
                    (mirrored - flipped).norm() < 1e-12,
                    "mirror defect {}",
                    (mirrored - flipped).norm()
                );
            }
        }
    }

    #[test]
    fn tail_bound_is_honest_and_small() {
        let primes = enumerate_prime_ideals(20_000).unwrap();
        let s = EvalPoint::new(1.5, 0.0).unwrap();
        let y = (0.3, -0.2);
        for mode in [Mode::Log, Mode::LogDeriv] {
            let coarse = char_fn(s, y, mode, &primes, 10_000).unwrap();
            let fine = char_fn(s, y, mode, &primes, 20_000).unwrap();
            assert!((fine.value - coarse.value).norm() <= coarse.tail_bound);
            assert!(fine.tail_bound < coarse.tail_bound);
            assert!(coarse.tail_bound < 1e-6, "tail = {}", coarse.tail_bound);
        }
        // The bound also holds at sigma below 1 where no series converges
        // absolutely but the product still does.
        let s_low = EvalPoint::new(0.75, 0.4).unwrap();
        let coarse = char_fn(s_low, (1.0, 1.0), Mode::LogDeriv, &primes, 10_000).unwrap();
        let fine = char_fn(s_low, (1.0, 1.0), Mode::LogDeriv, &primes, 20_000).unwrap();
        assert!((fine.value - coarse.value).norm() <= coarse.tail_bound);
    }

    #[test]
    fn char_fn_guards_cutoffs() {
        let primes = enumerate_prime_ideals(100).unwrap();
        let s = EvalPoint::new(1.0, 0.0).unwrap();
        assert!(char_fn(s, (0.0, 0.0), Mode::Log, &primes, 2).is_err());
        assert!(char_fn(s, (0.0, 0.0), Mode::Log, &primes, 101).is_err());
    }

    #[test]
    fn g_h_j_identities() {
        let s = EvalPoint::new(0.75, 1.0).unwrap();
        for (norm, y1, y2) in [
            (101.0, 500.0, 0.0),
            (1009.0, 30.0, -70.0),
            (65537.0, 1e4, 3e3),
            (29.0, 2.0, 1.0),
        ] {
            let y = Complex64::new(y1, y2);
            let (x, theta) = window_coords(norm, s, y);
            let g = g_factor(norm, s, y);
            let h = h_factor(norm, s, y);
            let recomposed = 1.0 / (norm + 1.0)
                + norm / (3.0 * (norm + 1.0))
                    * Complex64::from_polar(1.0, -x * theta.cos())
                    * h;
            assert!((g - recomposed).norm() < 1e-12, "defect {}", (g - recomposed).norm());
            let j = j_quantity(norm, s, y);
            assert!((h.norm_sqr() - (3.0 + 2.0 * j)).abs() < 1e-12);
        }
    }

    #[test]
    fn window_construction_guards() {
        assert!(DecayWindow::new(0.75, 0.2, 1e3).is_err());
        assert!(DecayWindow::new(0.75, 0.01, 1.0).is_err());
        assert!(DecayWindow::new(0.4, 0.01, 1e3).is_err());
        let w = DecayWindow::new(0.75, 0.01, 1e3).unwrap();
        assert!(w.a_lo < w.b_hi);
        assert!(w.n_lo as f64 <= w.a_lo.powf(1.0 / 0.75));
        assert!(w.n_hi as f64 >= w.b_hi.powf(1.0 / 0.75));
    }

    #[test]
    fn window_bounds_hold_at_moderate_frequency() {
        let w = DecayWindow::new(0.75, 0.01, 1e3).unwrap();
        let report = verify_gbound(&w, 0.0, 0.0).unwrap();
        assert!(report.passed(), "violations: {:?}", report.violations);
        assert!(report.examined > 1_000);
        assert!(report.min_abs_g > 0.097);
        assert!(report.max_abs_g < 0.9978);
        assert_eq!(
            report.examined,
            report.case_steep + report.case_shallow
        );
    }

    #[test]
    fn envelope_fits_and_bounds_the_measurements() {
        let primes = enumerate_prime_ideals(100_000).unwrap();
        let env = DecayEnvelope::fit(1.5, Mode::LogDeriv, &primes).unwrap();
        let s = EvalPoint::new(1.5, 0.0).unwrap();
        for k in 0..=10 {
            let y_abs = 10f64.powf(2.0 + 0.25 * k as f64);
            let measured =
                log_modulus_estimate(s, Complex64::new(y_abs, 0.0), Mode::LogDeriv, &primes)
                    .unwrap();
            assert!(env.eval(y_abs) >= (-measured).exp() * (1.0 - 1e-12));
        }
        assert!(env.eval(2e3) < env.eval(1e3));
        let r = env.choose_radius(1e-4).unwrap();
        assert!(env.eval(r) <= 1e-4);
        assert!(env.eval(r / 1.05) > 1e-4);
    }

    #[test]
    fn partial_products_stabilise() {
        let primes = enumerate_prime_ideals(1_000_000).unwrap();
        let grid: Vec<(f64, f64)> = vec![
            (1.0, 0.0),
            (0.0, 1.0),
            (-0.7, 0.7),
            (0.5, -0.86),
            (1.0, 1.0),
        ];
        let s = EvalPoint::new(1.2, 0.0).unwrap();
        let drift = partial_product_drift(s, Mode::LogDeriv, &primes, 10_000, 100_000, &grid)
            .unwrap();
        assert!(drift < 1e-3, "drift = {}", drift);

        // Below sigma = 1 the same bound needs far larger m; assert only the
        // convergence trend required by the existence criterion.
        let s_low = EvalPoint::new(0.8, 0.0).unwrap();
        let early = partial_product_drift(s_low, Mode::LogDeriv, &primes, 10_000, 100_000, &grid)
            .unwrap();
        let late = partial_product_drift(s_low, Mode::LogDeriv, &primes, 100_000, 1_000_000, &grid)
            .unwrap();
        assert!(late < early, "late {} vs early {}", late, early);
    }

    #[test]
    fn support_radius_grows_with_cutoff() {
        let primes = enumerate_prime_ideals(10_000).unwrap();
        let s = EvalPoint::new(1.5, 0.0).unwrap();
        let r1 = support_radius(s, Mode::LogDeriv, &primes, 1_000).unwrap();
        let r2 = support_radius(s, Mode::LogDeriv, &primes, 10_000).unwrap();
        assert!(r2 > r1);
        assert!(r1 > 0.0);
    }
}
