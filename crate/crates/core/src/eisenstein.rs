//! Arithmetic in the ring of Eisenstein integers Z[ω], ω² + ω + 1 = 0, and
//! enumeration of the objects the rest of the crate consumes: prime ideals,
//! integral ideals, and the family of squarefree moduli c ≡ 1 (mod 9).
//!
//! Elements are stored on the basis {1, ω} as `a + bω` with `i128`
//! coordinates.  The norm is `N(a + bω) = a² − ab + b²`, multiplicative and
//! non-negative.  The unit group has order six (±1, ±ω, ±ω²), the rational
//! prime 3 ramifies as ⟨1 − ω⟩², primes p ≡ 2 (mod 3) stay inert with norm
//! p², and primes p ≡ 1 (mod 3) split into a conjugate pair of ideals of
//! norm p.
//!
//! Every ideal is listed through a canonical generator: the unique associate
//! with positive first coordinate that is lexicographically least in
//! `(a, b)`.  All enumerations return sorted vectors so downstream results
//! are reproducible byte for byte.

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// capacity limits
// ---------------------------------------------------------------------------

/// Largest norm bound accepted by [`enumerate_prime_ideals`].
pub const MAX_PRIME_ENUMERATION: u64 = 30_000_000;
/// Largest norm bound accepted by [`enumerate_ideals`].
pub const MAX_IDEAL_ENUMERATION: u64 = 2_000_000;
/// Largest norm accepted by [`stream_prime_norms`].
pub const MAX_STREAM_NORM: u64 = 2_000_000_000;
/// Largest element norm accepted by [`factor`].
pub const MAX_FACTOR_NORM: u64 = 1_000_000_000_000;
/// Largest bound accepted by [`enumerate_family`] (full elements).
pub const MAX_FAMILY_FULL: u64 = 2_000_000;
/// Largest bound accepted by [`enumerate_family_norms`].
pub const MAX_FAMILY_NORMS: u64 = 20_000_000;

// ---------------------------------------------------------------------------
// elements
// ---------------------------------------------------------------------------

/// An Eisenstein integer `a + bω` on the basis {1, ω}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EisensteinInt {
    pub a: i128,
    pub b: i128,
}

impl EisensteinInt {
    pub const fn new(a: i128, b: i128) -> Self {
        EisensteinInt { a, b }
    }

    pub const fn zero() -> Self {
        EisensteinInt { a: 0, b: 0 }
    }

    pub const fn one() -> Self {
        EisensteinInt { a: 1, b: 0 }
    }

    pub const fn omega() -> Self {
        EisensteinInt { a: 0, b: 1 }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// `N(a + bω) = a² − ab + b² ≥ 0`.
    pub fn norm(&self) -> i128 {
        self.a * self.a - self.a * self.b + self.b * self.b
    }

    pub fn is_unit(&self) -> bool {
        self.norm() == 1
    }

    /// The six units of Z[ω] in a fixed order.
    pub fn units() -> [EisensteinInt; 6] {
        [
            EisensteinInt::new(1, 0),
            EisensteinInt::new(-1, 0),
            EisensteinInt::new(0, 1),
            EisensteinInt::new(0, -1),
            EisensteinInt::new(-1, -1),
            EisensteinInt::new(1, 1),
        ]
    }

    /// Complex conjugation: ω ↦ ω² = −1 − ω, so `a + bω ↦ (a − b) − bω`.
    pub fn conj(&self) -> Self {
        EisensteinInt::new(self.a - self.b, -self.b)
    }

    /// The canonical associate: among the six associates of a nonzero
    /// element, the one with `a > 0` that is lexicographically least in
    /// `(a, b)`.  Zero maps to zero.  Two elements generate the same ideal
    /// exactly when their canonical associates coincide.
    pub fn canonical_associate(&self) -> Self {
        if self.is_zero() {
            return *self;
        }
        let mut best: Option<EisensteinInt> = None;
        for u in EisensteinInt::units() {
            let cand = *self * u;
            if cand.a <= 0 {
                continue;
            }
            best = match best {
                None => Some(cand),
                Some(cur) if (cand.a, cand.b) < (cur.a, cur.b) => Some(cand),
                Some(cur) => Some(cur),
            };
        }
        best.expect("every nonzero element has an associate with a > 0")
    }

    /// True when `self` and `other` generate the same ideal.
    pub fn is_associate(&self, other: &EisensteinInt) -> bool {
        self.canonical_associate() == other.canonical_associate()
    }

    /// Rounded division: returns `(q, r)` with `self = q·d + r` and
    /// `N(r) ≤ (3/4)·N(d)`.  This is the norm-Euclidean division underlying
    /// [`gcd`] and exact-division tests.
    pub fn div_rem(&self, d: &EisensteinInt) -> (EisensteinInt, EisensteinInt) {
        assert!(!d.is_zero(), "division by zero");
        let num = *self * d.conj();
        let n = d.norm();
        let q = EisensteinInt::new(round_div(num.a, n), round_div(num.b, n));
        let r = *self - q * *d;
        debug_assert!(4 * r.norm() <= 3 * d.norm());
        (q, r)
    }

    /// Exact quotient `self / d` when `d` divides `self`.
    pub fn div_exact(&self, d: &EisensteinInt) -> Option<EisensteinInt> {
        let (q, r) = self.div_rem(d);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    pub fn divides(&self, other: &EisensteinInt) -> bool {
        other.div_exact(self).is_some()
    }
}

/// Nearest-integer division of `x` by `n > 0`, ties rounded up.
fn round_div(x: i128, n: i128) -> i128 {
    debug_assert!(n > 0);
    (2 * x + n).div_euclid(2 * n)
}

impl std::ops::Add for EisensteinInt {
    type Output = EisensteinInt;
    fn add(self, rhs: EisensteinInt) -> EisensteinInt {
        EisensteinInt::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl std::ops::Sub for EisensteinInt {
    type Output = EisensteinInt;
    fn sub(self, rhs: EisensteinInt) -> EisensteinInt {
        EisensteinInt::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl std::ops::Neg for EisensteinInt {
    type Output = EisensteinInt;
    fn neg(self) -> EisensteinInt {
        EisensteinInt::new(-self.a, -self.b)
    }
}

impl std::ops::Mul for EisensteinInt {
    type Output = EisensteinInt;
    /// `(a + bω)(c + dω) = (ac − bd) + (ad + bc − bd)ω`, using ω² = −1 − ω.
    fn mul(self, rhs: EisensteinInt) -> EisensteinInt {
        let EisensteinInt { a, b } = self;
        let EisensteinInt { a: c, b: d } = rhs;
        EisensteinInt::new(a * c - b * d, a * d + b * c - b * d)
    }
}

impl std::fmt::Display for EisensteinInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.b == 0 {
            write!(f, "{}", self.a)
        } else if self.a == 0 {
            write!(f, "{}w", self.b)
        } else if self.b < 0 {
            write!(f, "{}{}w", self.a, self.b)
        } else {
            write!(f, "{}+{}w", self.a, self.b)
        }
    }
}

/// Greatest common divisor up to units, returned as a canonical associate.
pub fn gcd(mut x: EisensteinInt, mut y: EisensteinInt) -> EisensteinInt {
    while !y.is_zero() {
        let (_, r) = x.div_rem(&y);
        x = y;
        y = r;
    }
    x.canonical_associate()
}

// ---------------------------------------------------------------------------
// prime ideals
// ---------------------------------------------------------------------------

/// How a rational prime behaves in Z[ω].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Splitting {
    /// p = 3 = unit·(1 − ω)², one prime ideal of norm 3.
    Ramified,
    /// p ≡ 1 (mod 3), two conjugate prime ideals of norm p.
    Split,
    /// p ≡ 2 (mod 3), one prime ideal of norm p².
    Inert,
}

impl Splitting {
    pub fn label(&self) -> &'static str {
        match self {
            Splitting::Ramified => "ramified",
            Splitting::Split => "split",
            Splitting::Inert => "inert",
        }
    }
}

/// A prime ideal, carried by its canonical generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeIdealRec {
    pub generator: EisensteinInt,
    pub norm: u64,
    pub splitting: Splitting,
    pub rational_prime: u64,
}

/// All prime ideals of norm ≤ `bound`, sorted by (norm, generator).
#[derive(Debug, Clone)]
pub struct PrimeTable {
    pub recs: Vec<PrimeIdealRec>,
    pub bound: u64,
}

impl PrimeTable {
    /// The prefix of prime ideals with norm ≤ `x`.  Errs when `x` exceeds
    /// the enumerated bound, so a stale table cannot silently truncate.
    pub fn up_to(&self, x: u64) -> Result<&[PrimeIdealRec]> {
        if x > self.bound {
            return Err(Error::invalid(format!(
                "prime table enumerated to {} cannot serve cutoff {}",
                self.bound, x
            )));
        }
        let idx = self.recs.partition_point(|r| r.norm <= x);
        Ok(&self.recs[..idx])
    }
}

/// Simple sieve of Eratosthenes.
fn rational_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

fn isqrt_u64(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

fn mod_mul_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn mod_pow_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul_u64(acc, base, m);
        }
        base = mod_mul_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for u64 (the standard twelve-base certificate).
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mod_mul_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Tonelli–Shanks square root of `n` modulo an odd prime `p`.
fn sqrt_mod(n: u64, p: u64) -> Option<u64> {
    let n = n % p;
    if n == 0 {
        return Some(0);
    }
    if mod_pow_u64(n, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(mod_pow_u64(n, (p + 1) / 4, p));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let mut z = 2u64;
    while mod_pow_u64(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow_u64(z, q, p);
    let mut t = mod_pow_u64(n, q, p);
    let mut r = mod_pow_u64(n, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0u32;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mod_mul_u64(t2, t2, p);
            i += 1;
        }
        let mut b = c;
        for _ in 0..(m - i - 1) {
            b = mod_mul_u64(b, b, p);
        }
        m = i;
        c = mod_mul_u64(b, b, p);
        t = mod_mul_u64(t, c, p);
        r = mod_mul_u64(r, b, p);
    }
    Some(r)
}

/// A generator of one of the two prime ideals over a split prime
/// p ≡ 1 (mod 3): Cornacchia descent on x² + 3y² = p, then the basis change
/// (a, b) = (x + y, 2y) so that a² − ab + b² = p.
fn split_prime_generator(p: u64) -> EisensteinInt {
    debug_assert!(p % 3 == 1);
    let root = sqrt_mod(p - 3 % p, p).expect("−3 is a square mod p ≡ 1 (mod 3)");
    for cand in [root, p - root] {
        let mut x0 = p;
        let mut x1 = cand;
        if x1 == 0 {
            continue;
        }
        while x1 * x1 > p {
            let r = x0 % x1;
            x0 = x1;
            x1 = r;
        }
        let rem = p - x1 * x1;
        if rem % 3 != 0 {
            continue;
        }
        let y = isqrt_u64(rem / 3);
        if y * y != rem / 3 {
            continue;
        }
        let g = EisensteinInt::new((x1 + y) as i128, 2 * y as i128);
        debug_assert_eq!(g.norm(), p as i128);
        return g;
    }
    unreachable!("Cornacchia descent must succeed for p ≡ 1 (mod 3)")
}

/// Enumerates all prime ideals of norm ≤ `x`, sorted by (norm, generator).
pub fn enumerate_prime_ideals(x: u64) -> Result<PrimeTable> {
    if x > MAX_PRIME_ENUMERATION {
        return Err(Error::capacity(format!(
            "prime-ideal enumeration bound {} exceeds limit {}",
            x, MAX_PRIME_ENUMERATION
        )));
    }
    let mut recs = Vec::new();
    for p in rational_primes(x) {
        if p == 3 {
            recs.push(PrimeIdealRec {
                generator: EisensteinInt::new(1, -1).canonical_associate(),
                norm: 3,
                splitting: Splitting::Ramified,
                rational_prime: 3,
            });
        } else if p % 3 == 1 {
            let g = split_prime_generator(p);
            for gen in [g, g.conj()] {
                recs.push(PrimeIdealRec {
                    generator: gen.canonical_associate(),
                    norm: p,
                    splitting: Splitting::Split,
                    rational_prime: p,
                });
            }
        } else if p.saturating_mul(p) <= x {
            recs.push(PrimeIdealRec {
                generator: EisensteinInt::new(p as i128, 0),
                norm: p * p,
                splitting: Splitting::Inert,
                rational_prime: p,
            });
        }
    }
    recs.sort_unstable_by_key(|r| (r.norm, r.generator.a, r.generator.b));
    Ok(PrimeTable { recs, bound: x })
}

/// Streams the norms of prime ideals with norm in `[lo, hi]` without
/// materialising generators, as `(norm, multiplicity)` pairs: split norms
/// arrive with multiplicity 2, inert and ramified with 1.  Ramified and
/// split norms are emitted first (ascending), then inert norms (ascending).
pub fn stream_prime_norms(lo: u64, hi: u64, f: &mut dyn FnMut(u64, u32)) -> Result<()> {
    if hi > MAX_STREAM_NORM {
        return Err(Error::capacity(format!(
            "norm stream bound {} exceeds limit {}",
            hi, MAX_STREAM_NORM
        )));
    }
    if lo > hi {
        return Ok(());
    }
    let base = rational_primes(isqrt_u64(hi) + 1);

    // Split and ramified: rational primes p in [lo, hi], segmented sieve.
    const SEGMENT: u64 = 1 << 22;
    let mut seg_lo = lo.max(2);
    let mut flags = Vec::new();
    while seg_lo <= hi {
        let seg_hi = (seg_lo + SEGMENT - 1).min(hi);
        let len = (seg_hi - seg_lo + 1) as usize;
        flags.clear();
        flags.resize(len, true);
        for &p in &base {
            if p * p > seg_hi {
                break;
            }
            let mut m = (seg_lo + p - 1) / p * p;
            if m < p * p {
                m = p * p;
            }
            while m <= seg_hi {
                flags[(m - seg_lo) as usize] = false;
                m += p;
            }
        }
        for (i, &is_prime) in flags.iter().enumerate() {
            if !is_prime {
                continue;
            }
            let p = seg_lo + i as u64;
            if p == 3 {
                f(3, 1);
            } else if p % 3 == 1 {
                f(p, 2);
            }
        }
        seg_lo = seg_hi + 1;
    }

    // Inert: p ≡ 2 (mod 3) with p² in [lo, hi].
    let p_lo = {
        let mut v = isqrt_u64(lo.saturating_sub(1)) + 1;
        while v * v < lo {
            v += 1;
        }
        v
    };
    let p_hi = isqrt_u64(hi);
    for p in rational_primes(p_hi) {
        if p >= p_lo && p % 3 == 2 {
            f(p * p, 1);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// factorization
// ---------------------------------------------------------------------------

/// Prime-ideal factorization of a nonzero non-unit element, sorted by
/// (norm, generator).
#[derive(Debug, Clone)]
pub struct IdealFactorization {
    pub factors: Vec<(PrimeIdealRec, u32)>,
}

impl IdealFactorization {
    /// Product of N(𝔭)^e over the factorization.
    pub fn norm(&self) -> u64 {
        self.factors
            .iter()
            .map(|(p, e)| p.norm.pow(*e))
            .product()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

/// Factors `z` into prime ideals.  Errs on zero and units, and on norms
/// beyond [`MAX_FACTOR_NORM`].
pub fn factor(z: &EisensteinInt) -> Result<IdealFactorization> {
    let n = z.norm();
    if n > MAX_FACTOR_NORM as i128 {
        return Err(Error::capacity(format!(
            "norm {} exceeds factorization limit {}",
            n, MAX_FACTOR_NORM
        )));
    }
    let primes = rational_primes(isqrt_u64(n as u64) + 1);
    factor_with_primes(z, &primes)
}

/// [`factor`] with a caller-supplied sieve of rational primes covering
/// √N(z); used by the family enumerator to amortise sieving.
pub fn factor_with_primes(z: &EisensteinInt, primes: &[u64]) -> Result<IdealFactorization> {
    if z.is_zero() {
        return Err(Error::domain("cannot factor zero"));
    }
    if z.is_unit() {
        return Err(Error::domain("cannot factor a unit"));
    }
    let norm = z.norm();
    if norm > MAX_FACTOR_NORM as i128 {
        return Err(Error::capacity(format!(
            "norm {} exceeds factorization limit {}",
            norm, MAX_FACTOR_NORM
        )));
    }
    let mut n = norm as u64;
    let mut rest = *z;
    let mut factors: Vec<(PrimeIdealRec, u32)> = Vec::new();
    let mut push_divisions =
        |rest: &mut EisensteinInt, gen: EisensteinInt, count: u32, rec: PrimeIdealRec| {
            for _ in 0..count {
                *rest = rest
                    .div_exact(&gen)
                    .expect("exponent bookkeeping guarantees exact division");
            }
            if count > 0 {
                factors.push((rec, count));
            }
        };

    let mut handle_prime = |p: u64, e: u32, rest: &mut EisensteinInt| {
        if p == 3 {
            let gen = EisensteinInt::new(1, -1);
            push_divisions(
                rest,
                gen,
                e,
                PrimeIdealRec {
                    generator: gen.canonical_associate(),
                    norm: 3,
                    splitting: Splitting::Ramified,
                    rational_prime: 3,
                },
            );
        } else if p % 3 == 2 {
            debug_assert!(e % 2 == 0, "inert prime exponent in a norm is even");
            let gen = EisensteinInt::new(p as i128, 0);
            push_divisions(
                rest,
                gen,
                e / 2,
                PrimeIdealRec {
                    generator: gen,
                    norm: p * p,
                    splitting: Splitting::Inert,
                    rational_prime: p,
                },
            );
        } else {
            let g = split_prime_generator(p).canonical_associate();
            let gc = g.conj().canonical_associate();
            let mut v1 = 0u32;
            let mut probe = *rest;
            while v1 < e {
                match probe.div_exact(&g) {
                    Some(q) => {
                        probe = q;
                        v1 += 1;
                    }
                    None => break,
                }
            }
            let v2 = e - v1;
            push_divisions(
                rest,
                g,
                v1,
                PrimeIdealRec {
                    generator: g,
                    norm: p,
                    splitting: Splitting::Split,
                    rational_prime: p,
                },
            );
            push_divisions(
                rest,
                gc,
                v2,
                PrimeIdealRec {
                    generator: gc,
                    norm: p,
                    splitting: Splitting::Split,
                    rational_prime: p,
                },
            );
        }
    };

    for &p in primes {
        if p * p > n {
            break;
        }
        let mut e = 0u32;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            handle_prime(p, e, &mut rest);
        }
    }
    if n > 1 {
        // Whatever survives trial division must be a single rational prime;
        // a composite leftover means the supplied sieve did not reach √N(z).
        if !is_prime_u64(n) {
            return Err(Error::invalid(format!(
                "prime list does not cover the factors of norm {}",
                norm
            )));
        }
        handle_prime(n, 1, &mut rest);
    }
    debug_assert!(rest.is_unit(), "residual after full division is a unit");

    factors.sort_unstable_by_key(|(r, _)| (r.norm, r.generator.a, r.generator.b));
    Ok(IdealFactorization { factors })
}

// ---------------------------------------------------------------------------
// the family of moduli
// ---------------------------------------------------------------------------

/// A member of the family: a squarefree c ≡ 1 (mod 9), c ≠ 1, with its norm
/// and prime-ideal factorization.
#[derive(Debug, Clone)]
pub struct FamilyElement {
    pub c: EisensteinInt,
    pub norm: u64,
    pub factorization: IdealFactorization,
}

/// Enumerates the family up to norm `bound`, sorted by (norm, a, b).
///
/// Elements are scanned on the lattice c = 1 + 9(u + vω) and kept when the
/// prime-ideal factorization of c is squarefree.  The ramified prime never
/// divides a member (c ≡ 1 mod 9 forces c ≢ 0 mod (1 − ω)).
pub fn enumerate_family(bound: u64) -> Result<Vec<FamilyElement>> {
    if bound > MAX_FAMILY_FULL {
        return Err(Error::capacity(format!(
            "family bound {} exceeds limit {}",
            bound, MAX_FAMILY_FULL
        )));
    }
    let primes = rational_primes(isqrt_u64(bound) + 1);
    let coord = coord_range(bound);
    use rayon::prelude::*;
    let mut out: Vec<FamilyElement> = coord
        .clone()
        .into_par_iter()
        .flat_map_iter(|u| {
            let primes = &primes;
            coord.clone().filter_map(move |v| {
                let c = EisensteinInt::new(1 + 9 * u, 9 * v);
                let n = c.norm();
                if n <= 0 || n > bound as i128 || c == EisensteinInt::one() {
                    return None;
                }
                let f = factor_with_primes(&c, primes).ok()?;
                if !f.is_squarefree() {
                    return None;
                }
                Some(FamilyElement {
                    c,
                    norm: n as u64,
                    factorization: f,
                })
            })
        })
        .collect();
    out.sort_unstable_by_key(|e| (e.norm, e.c.a, e.c.b));
    Ok(out)
}

/// Norms of family members up to `bound`, ascending, without generators or
/// factorizations.  Membership is decided purely from the rational
/// factorization of the norm: no factor of 3; inert primes with exponent at
/// most 2; split primes with exponent at most 1, or exactly 2 when the
/// rational prime divides both coordinates (the two conjugate ideals each
/// appearing once).
pub fn enumerate_family_norms(bound: u64) -> Result<Vec<u64>> {
    if bound > MAX_FAMILY_NORMS {
        return Err(Error::capacity(format!(
            "family bound {} exceeds limit {}",
            bound, MAX_FAMILY_NORMS
        )));
    }
    let primes = rational_primes(isqrt_u64(bound) + 1);
    let coord = coord_range(bound);
    use rayon::prelude::*;
    let mut out: Vec<u64> = coord
        .clone()
        .into_par_iter()
        .flat_map_iter(|u| {
            let primes = &primes;
            coord.clone().filter_map(move |v| {
                let a = 1 + 9 * u;
                let b = 9 * v;
                let n = a * a - a * b + b * b;
                if n <= 0 || n > bound as i128 || (a, b) == (1, 0) {
                    return None;
                }
                if norm_is_squarefree_member(n as u64, a, b, primes) {
                    Some(n as u64)
                } else {
                    None
                }
            })
        })
        .collect();
    out.sort_unstable();
    Ok(out)
}

fn coord_range(bound: u64) -> std::ops::RangeInclusive<i128> {
    // |a|, |b| ≤ 2√(N/3) for norm ≤ N; coordinates are 1 + 9u and 9v.
    let c_max = (2.0 * ((bound as f64) / 3.0).sqrt()) as i128 + 2;
    let span = c_max / 9 + 1;
    -span..=span
}

fn norm_is_squarefree_member(n: u64, a: i128, b: i128, primes: &[u64]) -> bool {
    let mut m = n;
    for &p in primes {
        if p * p > m {
            break;
        }
        let mut e = 0u32;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if e == 0 {
            continue;
        }
        if !exponent_admissible(p, e, a, b) {
            return false;
        }
    }
    if m > 1 && !exponent_admissible(m, 1, a, b) {
        return false;
    }
    true
}

fn exponent_admissible(p: u64, e: u32, a: i128, b: i128) -> bool {
    if p == 3 {
        return false;
    }
    if p % 3 == 2 {
        debug_assert!(e % 2 == 0);
        return e <= 2;
    }
    match e {
        0 | 1 => true,
        2 => a.rem_euclid(p as i128) == 0 && b.rem_euclid(p as i128) == 0,
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// integral ideals
// ---------------------------------------------------------------------------

/// An integral ideal as exponents over a [`PrimeTable`]: `factors[k] = (i, e)`
/// means the `i`-th prime ideal of the table occurs with exponent `e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealRec {
    pub norm: u64,
    pub factors: Vec<(u32, u8)>,
}

/// All integral ideals of norm ≤ `bound` together with the prime table they
/// are written over, sorted by (norm, factor list).
#[derive(Debug, Clone)]
pub struct IdealTable {
    pub primes: PrimeTable,
    pub recs: Vec<IdealRec>,
    pub bound: u64,
}

/// Enumerates all integral ideals of norm ≤ `x` (the unit ideal included)
/// by depth-first multiplication over the prime table.
pub fn enumerate_ideals(x: u64) -> Result<IdealTable> {
    if x > MAX_IDEAL_ENUMERATION {
        return Err(Error::capacity(format!(
            "ideal enumeration bound {} exceeds limit {}",
            x, MAX_IDEAL_ENUMERATION
        )));
    }
    let primes = enumerate_prime_ideals(x)?;
    let mut recs = vec![IdealRec {
        norm: 1,
        factors: Vec::new(),
    }];
    let mut stack = Vec::new();
    extend_ideals(&primes.recs, x, 0, 1, &mut stack, &mut recs);
    recs.sort_unstable_by(|l, r| (l.norm, &l.factors).cmp(&(r.norm, &r.factors)));
    Ok(IdealTable {
        primes,
        recs,
        bound: x,
    })
}

fn extend_ideals(
    primes: &[PrimeIdealRec],
    x: u64,
    start: usize,
    norm: u64,
    factors: &mut Vec<(u32, u8)>,
    out: &mut Vec<IdealRec>,
) {
    for i in start..primes.len() {
        let np = primes[i].norm;
        let mut n2 = match norm.checked_mul(np) {
            Some(v) if v <= x => v,
            _ => break,
        };
        let mut e = 1u8;
        loop {
            factors.push((i as u32, e));
            out.push(IdealRec {
                norm: n2,
                factors: factors.clone(),
            });
            extend_ideals(primes, x, i + 1, n2, factors, out);
            factors.pop();
            n2 = match n2.checked_mul(np) {
                Some(v) if v <= x => v,
                _ => break,
            };
            e += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// CSV rendering
// ---------------------------------------------------------------------------

/// Renders a prime-ideal table as CSV with a header row.
pub fn prime_ideal_csv(recs: &[PrimeIdealRec]) -> String {
    let mut s = String::from("a,b,norm,splitting,rational_prime\n");
    for r in recs {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.generator.a,
            r.generator.b,
            r.norm,
            r.splitting.label(),
            r.rational_prime
        ));
    }
    s
}

/// Renders family members as CSV with a header row.
pub fn family_csv(elems: &[FamilyElement]) -> String {
    let mut s = String::from("a,b,norm\n");
    for e in elems {
        s.push_str(&format!("{},{},{}\n", e.c.a, e.c.b, e.norm));
    }
    s
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(a: i128, b: i128) -> EisensteinInt {
        EisensteinInt::new(a, b)
    }

    #[test]
    fn norm_values() {
        assert_eq!(e(1, 0).norm(), 1);
        assert_eq!(e(1, -1).norm(), 3);
        assert_eq!(e(10, 9).norm(), 91);
        assert_eq!(e(0, 0).norm(), 0);
        assert_eq!(e(-3, 2).norm(), 19);
    }

    #[test]
    fn units_are_exactly_the_norm_one_elements() {
        let units = EisensteinInt::units();
        assert_eq!(units.len(), 6);
        for u in &units {
            assert!(u.is_unit());
        }
        // No other element of small height has norm 1.
        let mut count = 0;
        for a in -3..=3i128 {
            for b in -3..=3i128 {
                if e(a, b).norm() == 1 {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 6);
    }

    #[test]
    fn conjugation_realises_the_norm() {
        for a in -5..=5i128 {
            for b in -5..=5i128 {
                let z = e(a, b);
                assert_eq!(z * z.conj(), e(z.norm(), 0));
            }
        }
    }

    #[test]
    fn canonical_associate_is_stable_under_units() {
        for a in -6..=6i128 {
            for b in -6..=6i128 {
                let z = e(a, b);
                if z.is_zero() {
                    continue;
                }
                let c = z.canonical_associate();
                assert!(c.a > 0);
                for u in EisensteinInt::units() {
                    assert_eq!((z * u).canonical_associate(), c);
                }
                assert_eq!(c.canonical_associate(), c);
            }
        }
    }

    #[test]
    fn canonical_associate_examples() {
        assert_eq!(e(1, -1).canonical_associate(), e(1, -1));
        assert_eq!(e(0, 1).canonical_associate(), e(1, 0));
        assert_eq!(e(1, 9).canonical_associate(), e(1, 9));
        assert_eq!(e(-2, 0).canonical_associate(), e(2, 0));
    }

    #[test]
    fn gcd_divides_both_arguments() {
        let x = e(12, 5) * e(3, 2);
        let y = e(12, 5) * e(-1, 4);
        let g = gcd(x, y);
        assert!(g.divides(&x));
        assert!(g.divides(&y));
        assert!(e(12, 5).divides(&g) || g.is_associate(&e(12, 5)));
        assert_eq!(gcd(e(0, 0), e(3, 1)), e(3, 1).canonical_associate());
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(a1 in -10_000i128..10_000, b1 in -10_000i128..10_000,
                                  a2 in -10_000i128..10_000, b2 in -10_000i128..10_000) {
            let x = e(a1, b1);
            let y = e(a2, b2);
            prop_assert_eq!((x * y).norm(), x.norm() * y.norm());
        }

        #[test]
        fn div_rem_shrinks_the_norm(a1 in -100_000i128..100_000, b1 in -100_000i128..100_000,
                                    a2 in -1000i128..1000, b2 in -1000i128..1000) {
            prop_assume!(a2 != 0 || b2 != 0);
            let z = e(a1, b1);
            let d = e(a2, b2);
            let (q, r) = z.div_rem(&d);
            prop_assert_eq!(q * d + r, z);
            prop_assert!(r.norm() < d.norm());
        }

        #[test]
        fn gcd_is_a_common_divisor(a1 in -500i128..500, b1 in -500i128..500,
                                   a2 in -500i128..500, b2 in -500i128..500) {
            let x = e(a1, b1);
            let y = e(a2, b2);
            prop_assume!(!x.is_zero() || !y.is_zero());
            let g = gcd(x, y);
            prop_assert!(!g.is_zero());
            if !x.is_zero() { prop_assert!(g.divides(&x)); }
            if !y.is_zero() { prop_assert!(g.divides(&y)); }
        }
    }

    #[test]
    fn prime_ideals_up_to_twenty() {
        let table = enumerate_prime_ideals(20).unwrap();
        let norms: Vec<u64> = table.recs.iter().map(|r| r.norm).collect();
        assert_eq!(norms, vec![3, 4, 7, 7, 13, 13, 19, 19]);
        let table2 = enumerate_prime_ideals(2).unwrap();
        assert!(table2.recs.is_empty());
    }

    #[test]
    fn split_pairs_are_conjugate_and_canonical() {
        let table = enumerate_prime_ideals(200).unwrap();
        for r in &table.recs {
            assert_eq!(r.generator.norm(), r.norm as i128);
            assert_eq!(r.generator.canonical_associate(), r.generator);
            match r.splitting {
                Splitting::Split => {
                    let partner = r.generator.conj().canonical_associate();
                    assert!(table.recs.iter().any(|o| o.generator == partner));
                    assert_ne!(partner, r.generator);
                }
                Splitting::Inert => assert_eq!(r.norm, r.rational_prime * r.rational_prime),
                Splitting::Ramified => assert_eq!(r.norm, 3),
            }
        }
    }

    #[test]
    fn prime_ideal_count_matches_rational_sieve() {
        // Independent count from rational primes alone: one ideal for 3,
        // two per p ≡ 1 (mod 3) with p ≤ X, one per p ≡ 2 (mod 3) with p² ≤ X.
        let x = 10_000u64;
        let mut expected = 0usize;
        let mut sieve = vec![true; (x + 1) as usize];
        sieve[0] = false;
        sieve[1] = false;
        for p in 2..=x as usize {
            if sieve[p] {
                for m in (p * p..=x as usize).step_by(p) {
                    sieve[m] = false;
                }
                let p64 = p as u64;
                if p64 == 3 {
                    expected += 1;
                } else if p64 % 3 == 1 {
                    expected += 2;
                } else if p64 * p64 <= x {
                    expected += 1;
                }
            }
        }
        let table = enumerate_prime_ideals(x).unwrap();
        assert_eq!(table.recs.len(), expected);
        assert!(table.recs.windows(2).all(|w| w[0].norm <= w[1].norm));
    }

    #[test]
    fn cornacchia_agrees_with_brute_force() {
        for p in rational_primes(2_000).into_iter().filter(|p| p % 3 == 1) {
            let g = split_prime_generator(p);
            assert_eq!(g.norm(), p as i128);
            // Brute-force search for any representation.
            let mut found = false;
            let bound = (2.0 * (p as f64 / 3.0).sqrt()) as i128 + 1;
            'outer: for a in -bound..=bound {
                for b in -bound..=bound {
                    if e(a, b).norm() == p as i128 {
                        found = true;
                        break 'outer;
                    }
                }
            }
            assert!(found);
        }
    }

    #[test]
    fn enumeration_capacity_is_enforced() {
        assert!(matches!(
            enumerate_prime_ideals(MAX_PRIME_ENUMERATION + 1),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            enumerate_ideals(MAX_IDEAL_ENUMERATION + 1),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            enumerate_family(MAX_FAMILY_FULL + 1),
            Err(Error::Capacity(_))
        ));
        let mut sink = |_: u64, _: u32| {};
        assert!(matches!(
            stream_prime_norms(2, MAX_STREAM_NORM + 1, &mut sink),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn stream_matches_enumeration() {
        let table = enumerate_prime_ideals(50_000).unwrap();
        let mut expected: Vec<(u64, u32)> = Vec::new();
        for r in &table.recs {
            match expected.last_mut() {
                Some(last) if last.0 == r.norm && r.splitting == Splitting::Split => last.1 += 1,
                _ => expected.push((r.norm, 1)),
            }
        }
        let mut streamed: Vec<(u64, u32)> = Vec::new();
        stream_prime_norms(3, 50_000, &mut |n, m| streamed.push((n, m))).unwrap();
        streamed.sort_unstable();
        expected.sort_unstable();
        assert_eq!(streamed, expected);

        // A narrow window picks out exactly the norms inside it.
        let mut window: Vec<(u64, u32)> = Vec::new();
        stream_prime_norms(40_000, 41_000, &mut |n, m| window.push((n, m))).unwrap();
        window.sort_unstable();
        let expected_window: Vec<(u64, u32)> = expected
            .iter()
            .copied()
            .filter(|&(n, _)| (40_000..=41_000).contains(&n))
            .collect();
        assert_eq!(window, expected_window);
    }

    #[test]
    fn factoring_rational_integers() {
        let f10 = factor(&e(10, 0)).unwrap();
        let norms: Vec<(u64, u32)> = f10.factors.iter().map(|(p, e)| (p.norm, *e)).collect();
        assert_eq!(norms, vec![(4, 1), (25, 1)]);
        assert!(f10.is_squarefree());

        let f3 = factor(&e(3, 0)).unwrap();
        assert_eq!(f3.factors.len(), 1);
        assert_eq!(f3.factors[0].0.splitting, Splitting::Ramified);
        assert_eq!(f3.factors[0].1, 2);
        assert!(!f3.is_squarefree());

        let framified = factor(&e(1, -1)).unwrap();
        assert_eq!(framified.factors[0].1, 1);
        assert_eq!(framified.norm(), 3);
    }

    #[test]
    fn factoring_rejects_zero_and_units() {
        assert!(matches!(factor(&e(0, 0)), Err(Error::Domain(_))));
        assert!(matches!(factor(&e(0, 1)), Err(Error::Domain(_))));
        assert!(matches!(factor(&e(-1, 0)), Err(Error::Domain(_))));
    }

    #[test]
    fn factorization_round_trips() {
        for a in -50..=50i128 {
            for b in -50..=50i128 {
                let z = e(a, b);
                if z.is_zero() || z.is_unit() {
                    continue;
                }
                let f = factor(&z).unwrap();
                assert_eq!(f.norm(), z.norm() as u64);
                let mut prod = EisensteinInt::one();
                for (p, e) in &f.factors {
                    for _ in 0..*e {
                        prod = prod * p.generator;
                    }
                }
                assert!(prod.is_associate(&z), "round trip failed for {}", z);
            }
        }
    }

    #[test]
    fn family_smallest_members() {
        assert!(enumerate_family(72).unwrap().is_empty());
        let f73 = enumerate_family(73).unwrap();
        let coords: Vec<(i128, i128)> = f73.iter().map(|m| (m.c.a, m.c.b)).collect();
        assert_eq!(coords, vec![(-8, -9), (1, 9)]);
        assert!(f73.iter().all(|m| m.norm == 73));
    }

    #[test]
    fn family_members_satisfy_the_definition() {
        let fam = enumerate_family(5_000).unwrap();
        assert!(!fam.is_empty());
        for m in &fam {
            assert_eq!((m.c.a - 1).rem_euclid(9), 0);
            assert_eq!(m.c.b.rem_euclid(9), 0);
            assert!(m.factorization.is_squarefree());
            assert_eq!(m.factorization.norm(), m.norm);
            assert!(m.norm <= 5_000);
            assert_ne!(m.c, EisensteinInt::one());
            // Closed under conjugation: the conjugate is again ≡ 1 (mod 9).
            let cc = m.c.conj();
            assert!(fam.iter().any(|o| o.c == cc));
        }
        // Sorted deterministically.
        assert!(fam
            .windows(2)
            .all(|w| (w[0].norm, w[0].c.a, w[0].c.b) < (w[1].norm, w[1].c.a, w[1].c.b)));
    }

    #[test]
    fn family_norms_agree_with_full_enumeration() {
        let full = enumerate_family(10_000).unwrap();
        let mut full_norms: Vec<u64> = full.iter().map(|m| m.norm).collect();
        full_norms.sort_unstable();
        let norms = enumerate_family_norms(10_000).unwrap();
        assert_eq!(norms, full_norms);
    }

    #[test]
    fn family_matches_brute_force_membership() {
        // Independent oracle: squarefree test on the rational factorization
        // of the norm, written directly against the splitting rules.
        let bound = 8_000u64;
        let mut expected = 0usize;
        let reach = (2.0 * (bound as f64 / 3.0).sqrt()) as i128 + 2;
        let mut u = -(reach / 9 + 1);
        while u <= reach / 9 + 1 {
            let mut v = -(reach / 9 + 1);
            while v <= reach / 9 + 1 {
                let (a, b) = (1 + 9 * u, 9 * v);
                let n = a * a - a * b + b * b;
                if n > 0 && n <= bound as i128 && (a, b) != (1, 0) {
                    let mut ok = true;
                    let mut m = n as u64;
                    let mut p = 2u64;
                    while p * p <= m {
                        let mut ee = 0;
                        while m % p == 0 {
                            m /= p;
                            ee += 1;
                        }
                        if ee > 0 {
                            ok &= match p {
                                3 => false,
                                _ if p % 3 == 2 => ee <= 2,
                                _ => {
                                    ee <= 1
                                        || (ee == 2
                                            && a.rem_euclid(p as i128) == 0
                                            && b.rem_euclid(p as i128) == 0)
                                }
                            };
                        }
                        p += 1;
                    }
                    if m > 1 {
                        // A single leftover prime factor with exponent 1 is
                        // admissible unless it is 3.
                        ok &= m != 3;
                    }
                    if ok {
                        expected += 1;
                    }
                }
                v += 1;
            }
            u += 1;
        }
        let fam = enumerate_family(bound).unwrap();
        assert_eq!(fam.len(), expected);
    }

    #[test]
    fn ideal_counts_match_lattice_points() {
        // The number of integral ideals of norm ≤ X equals one sixth of the
        // nonzero lattice points with norm ≤ X.
        for x in [1u64, 4, 10, 100, 1_000, 10_000] {
            let table = enumerate_ideals(x).unwrap();
            let reach = (2.0 * (x as f64 / 3.0).sqrt()) as i128 + 2;
            let mut lattice = 0usize;
            for a in -reach..=reach {
                for b in -reach..=reach {
                    let n = e(a, b).norm();
                    if n > 0 && n <= x as i128 {
                        lattice += 1;
                    }
                }
            }
            assert_eq!(table.recs.len() * 6, lattice, "at X = {}", x);
        }
    }

    #[test]
    fn ideal_norms_are_consistent_with_factors() {
        let table = enumerate_ideals(500).unwrap();
        assert_eq!(table.recs[0].norm, 1);
        assert!(table.recs[0].factors.is_empty());
        for rec in &table.recs {
            let recomputed: u64 = rec
                .factors
                .iter()
                .map(|&(i, e)| table.primes.recs[i as usize].norm.pow(e as u32))
                .product();
            assert_eq!(recomputed, rec.norm);
        }
        assert!(table
            .recs
            .windows(2)
            .all(|w| (w[0].norm, &w[0].factors) < (w[1].norm, &w[1].factors)));
    }

    #[test]
    fn prime_table_prefix_is_guarded() {
        let table = enumerate_prime_ideals(100).unwrap();
        assert!(table.up_to(101).is_err());
        let prefix = table.up_to(13).unwrap();
        assert!(prefix.iter().all(|r| r.norm <= 13));
        assert_eq!(prefix.last().unwrap().norm, 13);
    }

    #[test]
    fn csv_rendering_is_stable() {
        let table = enumerate_prime_ideals(10).unwrap();
        let csv = prime_ideal_csv(&table.recs);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("a,b,norm,splitting,rational_prime"));
        assert_eq!(lines.next(), Some("1,-1,3,ramified,3"));
        assert_eq!(lines.next(), Some("2,0,4,inert,2"));
        assert_eq!(lines.next(), Some("1,-2,7,split,7"));
        assert_eq!(lines.next(), Some("1,3,7,split,7"));
        assert_eq!(lines.next(), None);

        let fam = enumerate_family(73).unwrap();
        let fcsv = family_csv(&fam);
        assert_eq!(fcsv, "a,b,norm\n-8,-9,73\n1,9,73\n");
    }
}
