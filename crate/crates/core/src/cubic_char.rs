//! The cubic residue character χ_c attached to a squarefree modulus
//! c ≡ 1 (mod 9).
//!
//! For an unramified prime ideal 𝔭 = ⟨π⟩ and x coprime to 𝔭, the cubic
//! residue symbol (x/π)₃ is the unique cube root of unity with
//! x^((N(𝔭)−1)/3) ≡ (x/π)₃ (mod π); it is 0 when 𝔭 divides x.  For a
//! composite squarefree c the character multiplies the symbols of the prime
//! divisors of c.  Because c ≡ 1 (mod 9), the resulting character kills all
//! six units, so its value depends only on the ideal ⟨x⟩ and canonical
//! generators can be used everywhere.

use crate::eisenstein::{EisensteinInt, FamilyElement, PrimeIdealRec, Splitting};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// A value of the cubic character: zero or a cube root of unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CharValue {
    Zero,
    One,
    Omega,
    OmegaSq,
}

impl CharValue {
    pub fn mul(self, other: CharValue) -> CharValue {
        use CharValue::*;
        match (self, other) {
            (Zero, _) | (_, Zero) => Zero,
            (One, x) | (x, One) => x,
            (Omega, Omega) => OmegaSq,
            (Omega, OmegaSq) | (OmegaSq, Omega) => One,
            (OmegaSq, OmegaSq) => Omega,
        }
    }

    /// `self` raised to the k-th power (k ≥ 1 keeps zero at zero; k = 0 of a
    /// nonzero value is one).
    pub fn pow(self, k: u32) -> CharValue {
        use CharValue::*;
        match self {
            Zero => {
                if k == 0 {
                    One
                } else {
                    Zero
                }
            }
            One => One,
            Omega => match k % 3 {
                0 => One,
                1 => Omega,
                _ => OmegaSq,
            },
            OmegaSq => match k % 3 {
                0 => One,
                1 => OmegaSq,
                _ => Omega,
            },
        }
    }

    /// Complex conjugation, which is also the square on nonzero values.
    pub fn conj(self) -> CharValue {
        use CharValue::*;
        match self {
            Omega => OmegaSq,
            OmegaSq => Omega,
            other => other,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        const HALF_SQRT3: f64 = 0.8660254037844386;
        match self {
            CharValue::Zero => Complex64::new(0.0, 0.0),
            CharValue::One => Complex64::new(1.0, 0.0),
            CharValue::Omega => Complex64::new(-0.5, HALF_SQRT3),
            CharValue::OmegaSq => Complex64::new(-0.5, -HALF_SQRT3),
        }
    }
}

/// `x mod m`, reduced through rounded division so the representative has
/// norm at most (3/4)·N(m).
pub fn mod_reduce(x: &EisensteinInt, m: &EisensteinInt) -> EisensteinInt {
    x.div_rem(m).1
}

fn mod_mul(x: &EisensteinInt, y: &EisensteinInt, m: &EisensteinInt) -> EisensteinInt {
    mod_reduce(&(*x * *y), m)
}

/// `x^e mod m` by square and multiply.
pub fn mod_pow(x: &EisensteinInt, mut e: u64, m: &EisensteinInt) -> EisensteinInt {
    let mut base = mod_reduce(x, m);
    let mut acc = mod_reduce(&EisensteinInt::one(), m);
    while e > 0 {
        if e & 1 == 1 {
            acc = mod_mul(&acc, &base, m);
        }
        base = mod_mul(&base, &base, m);
        e >>= 1;
    }
    acc
}

/// The cubic residue symbol (x/π)₃ at an unramified prime ideal.
///
/// Errs on the ramified prime, where the symbol is undefined.
pub fn cubic_symbol(x: &EisensteinInt, prime: &PrimeIdealRec) -> Result<CharValue> {
    if prime.splitting == Splitting::Ramified {
        return Err(Error::domain(
            "cubic symbol is undefined at the ramified prime",
        ));
    }
    let pi = &prime.generator;
    let reduced = mod_reduce(x, pi);
    if reduced.is_zero() {
        return Ok(CharValue::Zero);
    }
    debug_assert_eq!((prime.norm - 1) % 3, 0);
    let e = (prime.norm - 1) / 3;
    let r = mod_pow(&reduced, e, pi);
    let omega = EisensteinInt::omega();
    let candidates = [
        (EisensteinInt::one(), CharValue::One),
        (omega, CharValue::Omega),
        (omega * omega, CharValue::OmegaSq),
    ];
    for (root, value) in candidates {
        if pi.divides(&(r - root)) {
            return Ok(value);
        }
    }
    unreachable!("x^((N−1)/3) is a cube root of unity mod π")
}

/// The cubic character attached to a family modulus, evaluated by
/// multiplying the symbols at the prime divisors of c.
#[derive(Debug, Clone)]
pub struct CubicCharacter {
    modulus: FamilyElement,
}

impl CubicCharacter {
    pub fn new(modulus: FamilyElement) -> Result<Self> {
        if !modulus.factorization.is_squarefree() {
            return Err(Error::invalid("character modulus must be squarefree"));
        }
        if modulus
            .factorization
            .factors
            .iter()
            .any(|(p, _)| p.splitting == Splitting::Ramified)
        {
            return Err(Error::invalid(
                "character modulus must be coprime to the ramified prime",
            ));
        }
        Ok(CubicCharacter { modulus })
    }

    pub fn modulus(&self) -> &FamilyElement {
        &self.modulus
    }

    /// χ_c(x) = ∏_{π | c} (x/π)₃.
    pub fn chi(&self, x: &EisensteinInt) -> Result<CharValue> {
        let mut acc = CharValue::One;
        for (p, _) in &self.modulus.factorization.factors {
            acc = acc.mul(cubic_symbol(x, p)?);
            if acc == CharValue::Zero {
                return Ok(CharValue::Zero);
            }
        }
        Ok(acc)
    }

    /// Tabulates χ_c on the generators of a prime-ideal list.  Because the
    /// character is trivial on units, the table is a function of the ideals
    /// themselves and downstream sums over ideals evaluate the character by
    /// multiplying entries of this table.
    pub fn tabulate(&self, primes: &[PrimeIdealRec]) -> Result<Vec<CharValue>> {
        primes.iter().map(|p| self.chi(&p.generator)).collect()
    }

    /// Like [`tabulate`](Self::tabulate) but through per-factor residue
    /// lookup tables, turning every symbol evaluation into O(1) work after
    /// an O(N(𝔭)) build per prime divisor of c.  Intended for sweeps that
    /// tabulate one character on tens of thousands of prime ideals.
    pub fn tabulate_fast(&self, primes: &[PrimeIdealRec]) -> Result<Vec<CharValue>> {
        let tables: Vec<SymbolTable> = self
            .modulus
            .factorization
            .factors
            .iter()
            .map(|(p, _)| SymbolTable::build(p))
            .collect::<Result<_>>()?;
        Ok(primes
            .iter()
            .map(|rec| {
                let mut acc = CharValue::One;
                for table in &tables {
                    acc = acc.mul(table.value(&rec.generator));
                    if acc == CharValue::Zero {
                        break;
                    }
                }
                acc
            })
            .collect())
    }
}

// ---------------------------------------------------------------------------
// residue-class lookup tables
// ---------------------------------------------------------------------------

/// Largest prime-ideal norm for which a full residue table is built.
const MAX_SYMBOL_TABLE_NORM: u64 = 100_000_000;

const CODE_ONE: u8 = 0;
const CODE_OMEGA: u8 = 1;
const CODE_OMEGA_SQ: u8 = 2;
const CODE_ZERO: u8 = 3;
const CODE_UNSET: u8 = 255;

/// The cubic residue classes of the whole residue field at one unramified
/// prime ideal 𝔭, built by enumerating the cubes of the field.  A lookup
/// costs one reduction instead of an Euler-criterion power, and the class
/// labels are pinned to the criterion by classifying one non-cube with
/// [`cubic_symbol`].
pub struct SymbolTable {
    norm: u64,
    kind: TableKind,
    cls: Vec<u8>,
}

enum TableKind {
    /// Split prime of norm q: the residue field is ℤ/q with ω ↦ `omega_image`.
    Split { omega_image: u64 },
    /// Inert rational prime p of norm p²: residues a + bω with
    /// 0 ≤ a, b < p are indexed as a·p + b.
    Inert { p: u64 },
}

impl SymbolTable {
    pub fn build(prime: &PrimeIdealRec) -> Result<SymbolTable> {
        if prime.splitting == Splitting::Ramified {
            return Err(Error::domain(
                "cubic symbol is undefined at the ramified prime",
            ));
        }
        if prime.norm > MAX_SYMBOL_TABLE_NORM {
            return Err(Error::capacity(format!(
                "residue table at norm {} exceeds limit {}",
                prime.norm, MAX_SYMBOL_TABLE_NORM
            )));
        }
        match prime.splitting {
            Splitting::Split => Self::build_split(prime),
            Splitting::Inert => Self::build_inert(prime),
            Splitting::Ramified => unreachable!(),
        }
    }

    fn build_split(prime: &PrimeIdealRec) -> Result<SymbolTable> {
        let q = prime.norm;
        let (a, b) = (prime.generator.a, prime.generator.b);
        let qq = q as i128;
        // ω ≡ −a·b⁻¹ in ℤ/q because a + bω ≡ 0 mod the generator.
        let br = b.rem_euclid(qq) as u64;
        let ar = a.rem_euclid(qq) as u64;
        let inv_b = pow_mod_u64(br, q - 2, q);
        let r = (q - ar) % q * inv_b % q;
        debug_assert_eq!((r * r % q + r + 1) % q, 0);

        let mut cls = vec![CODE_UNSET; q as usize];
        cls[0] = CODE_ZERO;
        let mut cubes = Vec::with_capacity((q as usize - 1) / 3);
        for t in 1..q {
            let c = t * t % q * t % q;
            if cls[c as usize] == CODE_UNSET {
                cls[c as usize] = CODE_ONE;
                cubes.push(c);
            }
        }
        let eta = (1..q)
            .find(|&v| cls[v as usize] == CODE_UNSET)
            .expect("a non-cube exists when 3 divides q − 1");
        let eta_code = euler_code(&EisensteinInt::new(eta as i128, 0), prime)?;
        let eta_sq = eta * eta % q;
        let eta_sq_code = conj_code(eta_code);
        for &c in &cubes {
            cls[(eta * c % q) as usize] = eta_code;
            cls[(eta_sq * c % q) as usize] = eta_sq_code;
        }
        debug_assert!(cls.iter().all(|&v| v != CODE_UNSET));
        Ok(SymbolTable {
            norm: q,
            kind: TableKind::Split { omega_image: r },
            cls,
        })
    }

    fn build_inert(prime: &PrimeIdealRec) -> Result<SymbolTable> {
        let p = prime.rational_prime;
        let n = (p * p) as usize;
        // (a + bω)(c + dω) = (ac − bd) + (ad + bc − bd)ω in F_{p²}.
        let mul = |x: (u64, u64), y: (u64, u64)| -> (u64, u64) {
            let bd = x.1 * y.1 % p;
            let re = (x.0 * y.0 % p + p - bd) % p;
            let im = ((x.0 * y.1 + x.1 * y.0) % p + p - bd) % p;
            (re, im)
        };
        let idx = |x: (u64, u64)| (x.0 * p + x.1) as usize;

        let mut cls = vec![CODE_UNSET; n];
        cls[0] = CODE_ZERO;
        let mut cubes = Vec::with_capacity((n - 1) / 3);
        for a in 0..p {
            for b in 0..p {
                if a == 0 && b == 0 {
                    continue;
                }
                let x = (a, b);
                let c = mul(mul(x, x), x);
                if cls[idx(c)] == CODE_UNSET {
                    cls[idx(c)] = CODE_ONE;
                    cubes.push(c);
                }
            }
        }
        let eta_idx = (1..n)
            .find(|&v| cls[v] == CODE_UNSET)
            .expect("a non-cube exists when 3 divides p² − 1");
        let eta = (eta_idx as u64 / p, eta_idx as u64 % p);
        let eta_code = euler_code(
            &EisensteinInt::new(eta.0 as i128, eta.1 as i128),
            prime,
        )?;
        let eta_sq = mul(eta, eta);
        let eta_sq_code = conj_code(eta_code);
        for &c in &cubes {
            cls[idx(mul(eta, c))] = eta_code;
            cls[idx(mul(eta_sq, c))] = eta_sq_code;
        }
        debug_assert!(cls.iter().all(|&v| v != CODE_UNSET));
        Ok(SymbolTable {
            norm: p * p,
            kind: TableKind::Inert { p },
            cls,
        })
    }

    pub fn norm(&self) -> u64 {
        self.norm
    }

    /// The cubic residue symbol (x/𝔭)₃ by table lookup.
    pub fn value(&self, x: &EisensteinInt) -> CharValue {
        let code = match &self.kind {
            TableKind::Split { omega_image } => {
                let q = self.norm as i128;
                let u = x.a.rem_euclid(q) as u64;
                let v = x.b.rem_euclid(q) as u64;
                self.cls[((u + v * omega_image % self.norm) % self.norm) as usize]
            }
            TableKind::Inert { p } => {
                let pp = *p as i128;
                let u = x.a.rem_euclid(pp) as u64;
                let v = x.b.rem_euclid(pp) as u64;
                self.cls[(u * p + v) as usize]
            }
        };
        match code {
            CODE_ONE => CharValue::One,
            CODE_OMEGA => CharValue::Omega,
            CODE_OMEGA_SQ => CharValue::OmegaSq,
            _ => CharValue::Zero,
        }
    }
}

fn euler_code(eta: &EisensteinInt, prime: &PrimeIdealRec) -> Result<u8> {
    match cubic_symbol(eta, prime)? {
        CharValue::Omega => Ok(CODE_OMEGA),
        CharValue::OmegaSq => Ok(CODE_OMEGA_SQ),
        other => Err(Error::domain(format!(
            "representative non-cube classified as {:?} at norm {}",
            other, prime.norm
        ))),
    }
}

fn conj_code(code: u8) -> u8 {
    if code == CODE_OMEGA {
        CODE_OMEGA_SQ
    } else {
        CODE_OMEGA
    }
}

fn pow_mod_u64(mut base: u64, mut e: u64, m: u64) -> u64 {
    base %= m;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eisenstein::{enumerate_family, enumerate_prime_ideals};

    fn family_member(a: i128, b: i128, bound: u64) -> FamilyElement {
        enumerate_family(bound)
            .unwrap()
            .into_iter()
            .find(|m| m.c == EisensteinInt::new(a, b))
            .expect("requested member exists")
    }

    fn norm_73_prime() -> PrimeIdealRec {
        enumerate_prime_ideals(73)
            .unwrap()
            .recs
            .iter()
            .find(|r| r.norm == 73 && r.generator == EisensteinInt::new(1, 9))
            .cloned()
            .unwrap()
    }

    #[test]
    fn char_value_arithmetic() {
        use CharValue::*;
        assert_eq!(Omega.mul(Omega), OmegaSq);
        assert_eq!(Omega.mul(OmegaSq), One);
        assert_eq!(Zero.mul(Omega), Zero);
        assert_eq!(Omega.pow(3), One);
        assert_eq!(OmegaSq.pow(2), Omega);
        assert_eq!(Omega.conj(), OmegaSq);
        assert_eq!(Omega.conj(), Omega.pow(2));
        let w = Omega.to_complex();
        assert!((w * w * w - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((w.powi(2) - OmegaSq.to_complex()).norm() < 1e-15);
    }

    #[test]
    fn euler_criterion_fixed_value() {
        // 2^((73−1)/3) ≡ ω² (mod 1 + 9ω): frozen from an independent
        // big-integer evaluation (ω ≡ 8 mod the prime, 2^24 ≡ 64 ≡ 8²).
        let pi = norm_73_prime();
        let two = EisensteinInt::new(2, 0);
        assert_eq!(cubic_symbol(&two, &pi).unwrap(), CharValue::OmegaSq);
    }

    #[test]
    fn symbol_is_equidistributed_on_nonzero_residues() {
        // The residue field mod ⟨1 + 9ω⟩ has 73 elements, represented by the
        // rational integers 0..72.  Each nonzero value class has (N−1)/3
        // members.
        let pi = norm_73_prime();
        let mut counts = [0usize; 3];
        for a in 1..73i128 {
            match cubic_symbol(&EisensteinInt::new(a, 0), &pi).unwrap() {
                CharValue::One => counts[0] += 1,
                CharValue::Omega => counts[1] += 1,
                CharValue::OmegaSq => counts[2] += 1,
                CharValue::Zero => panic!("nonzero residue mapped to zero"),
            }
        }
        assert_eq!(counts, [24, 24, 24]);
        assert_eq!(
            cubic_symbol(&EisensteinInt::new(73, 0), &pi).unwrap(),
            CharValue::Zero
        );
    }

    #[test]
    fn symbol_is_one_on_cubes() {
        let pi = norm_73_prime();
        for a in 1..73i128 {
            let x = EisensteinInt::new(a, 0);
            let cube = x * x * x;
            assert_eq!(cubic_symbol(&cube, &pi).unwrap(), CharValue::One);
        }
    }

    #[test]
    fn symbol_rejects_the_ramified_prime() {
        let table = enumerate_prime_ideals(10).unwrap();
        let ram = table.recs.iter().find(|r| r.norm == 3).unwrap();
        assert!(matches!(
            cubic_symbol(&EisensteinInt::new(2, 0), ram),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn character_is_multiplicative_and_periodic() {
        // c = 73 splits, so this exercises the composite (two-factor) path.
        let c = family_member(73, 0, 73 * 73);
        let chi = CubicCharacter::new(c).unwrap();
        let mut k = 1i128;
        for a in [2i128, 5, 11, 17, 31] {
            for b in [0i128, 3, 7, 20] {
                let x = EisensteinInt::new(a, b);
                let y = EisensteinInt::new(b + 1, a);
                let lhs = chi.chi(&(x * y)).unwrap();
                let rhs = chi.chi(&x).unwrap().mul(chi.chi(&y).unwrap());
                assert_eq!(lhs, rhs);
                // Periodicity mod c.
                let shifted = x + EisensteinInt::new(73 * k, 0);
                assert_eq!(chi.chi(&shifted).unwrap(), chi.chi(&x).unwrap());
                k += 1;
            }
        }
    }

    #[test]
    fn character_conjugate_is_the_square() {
        let c = family_member(10, 9, 100);
        let chi = CubicCharacter::new(c).unwrap();
        for a in -6..=6i128 {
            for b in -6..=6i128 {
                let x = EisensteinInt::new(a, b);
                let v = chi.chi(&x).unwrap();
                assert_eq!(v.conj(), v.mul(v));
                assert_eq!(chi.chi(&(x * x)).unwrap(), v.pow(2));
            }
        }
    }

    #[test]
    fn character_kills_all_units() {
        for (a, b, bound) in [(1i128, 9i128, 73u64), (10, 9, 91), (73, 0, 5329), (-8, -9, 73)] {
            let c = family_member(a, b, bound);
            let chi = CubicCharacter::new(c).unwrap();
            for u in EisensteinInt::units() {
                assert_eq!(chi.chi(&u).unwrap(), CharValue::One, "unit {} at c = {}+{}w", u, a, b);
            }
        }
    }

    #[test]
    fn character_vanishes_exactly_on_divisors() {
        let c = family_member(10, 9, 91);
        let chi = CubicCharacter::new(c).unwrap();
        // 10 + 9ω has norm 91 = 7 · 13; the symbol dies on any multiple of a
        // prime divisor.
        let seven_factor = chi.modulus().factorization.factors[0].0.generator;
        assert_eq!(chi.chi(&seven_factor).unwrap(), CharValue::Zero);
        assert_eq!(chi.chi(&EisensteinInt::new(91, 0)).unwrap(), CharValue::Zero);
        assert_ne!(chi.chi(&EisensteinInt::new(2, 0)).unwrap(), CharValue::Zero);
    }

    #[test]
    fn tabulation_matches_pointwise_evaluation() {
        let c = family_member(1, 9, 73);
        let chi = CubicCharacter::new(c).unwrap();
        let table = enumerate_prime_ideals(100).unwrap();
        let tab = chi.tabulate(&table.recs).unwrap();
        for (rec, value) in table.recs.iter().zip(&tab) {
            assert_eq!(chi.chi(&rec.generator).unwrap(), *value);
        }
    }

    #[test]
    fn symbol_table_matches_euler_criterion() {
        // Every unramified prime of norm ≤ 200 covers both the split path
        // (residue field ℤ/q) and the inert path (residue field F_{p²}),
        // including zero classes at multiples of the prime.
        let table = enumerate_prime_ideals(200).unwrap();
        for prime in &table.recs {
            if prime.splitting == Splitting::Ramified {
                assert!(matches!(
                    SymbolTable::build(prime),
                    Err(Error::Domain(_))
                ));
                continue;
            }
            let lookup = SymbolTable::build(prime).unwrap();
            assert_eq!(lookup.norm(), prime.norm);
            for a in -9..=9i128 {
                for b in -9..=9i128 {
                    let x = EisensteinInt::new(a, b);
                    assert_eq!(
                        lookup.value(&x),
                        cubic_symbol(&x, prime).unwrap(),
                        "norm {} at {}+{}w",
                        prime.norm,
                        a,
                        b
                    );
                }
            }
        }
    }

    #[test]
    fn fast_tabulation_matches_symbol_products() {
        // c = 10 factors into two inert primes, c = 10 + 9ω into two split
        // primes, and c = 1 + 9ω is itself prime.
        let table = enumerate_prime_ideals(500).unwrap();
        for (a, b, bound) in [(10i128, 0i128, 100u64), (10, 9, 91), (1, 9, 73)] {
            let c = family_member(a, b, bound);
            let chi = CubicCharacter::new(c).unwrap();
            let slow = chi.tabulate(&table.recs).unwrap();
            let fast = chi.tabulate_fast(&table.recs).unwrap();
            assert_eq!(slow, fast, "c = {}+{}w", a, b);
        }
    }
}
