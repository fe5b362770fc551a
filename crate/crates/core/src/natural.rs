//! Arbitrary-precision natural numbers that stay usable far past what a dense
//! bignum can hold.
//!
//! Values below `2^EXACT_BITS` are plain [`BigUint`]s. Larger values are kept
//! as a sparse signed-binary expansion: a set of `±2^e` terms (exponents are
//! themselves arbitrary precision, all `>= EXACT_BITS`) plus an exact low word
//! in `[0, 2^EXACT_BITS)`. Numbers such as `2^(21!) - 1` or
//! `2^(2!) + 2^(3!) + ... + 2^(40!)` are therefore exact, and addition,
//! subtraction, small multiplication and shifts stay exact on them.
//!
//! Logarithms are computed from the leading exponent plus a mantissa
//! correction, with relative error far below `1e-12`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Sub};
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Width of the dense part. Values whose leading bit is below this are exact
/// `BigUint`s.
pub const EXACT_BITS: u64 = 1 << 16;

const LN_2: f64 = std::f64::consts::LN_2;

#[derive(Clone)]
enum Repr {
    Exact(BigUint),
    /// `value = Σ sign·2^exp + low`, exponents distinct and `>= EXACT_BITS`,
    /// digits `±1`, leading digit `+1`, `low < 2^EXACT_BITS`.
    Sparse {
        terms: BTreeMap<BigUint, i8>,
        low: BigUint,
    },
}

/// A nonnegative integer of unbounded magnitude.
#[derive(Clone)]
pub struct Natural(Repr);

impl Natural {
    pub fn zero() -> Self {
        Natural(Repr::Exact(BigUint::zero()))
    }

    pub fn one() -> Self {
        Natural::from(1u64)
    }

    /// `2^exp`.
    pub fn pow2<E: Into<BigUint>>(exp: E) -> Self {
        let exp = exp.into();
        match exp.to_u64() {
            Some(e) if e < EXACT_BITS => Natural(Repr::Exact(BigUint::one() << e)),
            _ => {
                let mut terms = BTreeMap::new();
                terms.insert(exp, 1i8);
                Natural(Repr::Sparse {
                    terms,
                    low: BigUint::zero(),
                })
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.0, Repr::Exact(n) if n.is_zero())
    }

    /// The dense value, if this number is held densely.
    pub fn as_biguint(&self) -> Option<&BigUint> {
        match &self.0 {
            Repr::Exact(n) => Some(n),
            Repr::Sparse { .. } => None,
        }
    }

    pub fn to_biguint(&self) -> Option<BigUint> {
        self.as_biguint().cloned()
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.as_biguint().and_then(|n| n.to_u64())
    }

    /// Nearest `f64`; `+inf` beyond the `f64` range.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Exact(n) => n.to_f64().unwrap_or(f64::INFINITY),
            Repr::Sparse { .. } => f64::INFINITY,
        }
    }

    /// Number of bits of the leading power, i.e. `floor(log2(n)) + 1`, zero for zero.
    pub fn bits(&self) -> BigUint {
        match self.floor_log2() {
            Some(e) => e + 1u32,
            None => BigUint::zero(),
        }
    }

    /// `floor(log2(n))`, `None` for zero.
    pub fn floor_log2(&self) -> Option<BigUint> {
        match &self.0 {
            Repr::Exact(n) if n.is_zero() => None,
            Repr::Exact(n) => Some(BigUint::from(n.bits() - 1)),
            Repr::Sparse { terms, .. } => {
                let mut it = terms.iter().rev();
                let (top, _) = it.next().expect("sparse value has a leading term");
                let rest_negative = match it.next() {
                    Some((_, d)) => *d < 0,
                    None => false,
                };
                if rest_negative {
                    Some(top - 1u32)
                } else {
                    Some(top.clone())
                }
            }
        }
    }

    /// Natural logarithm; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        match &self.0 {
            Repr::Exact(n) => ln_biguint(n),
            Repr::Sparse { terms, low } => {
                let mut it = terms.iter().rev();
                let (top, _) = it.next().expect("sparse value has a leading term");
                let mut correction = 0.0f64;
                for (e, d) in it {
                    let gap = top - e;
                    match gap.to_i32() {
                        Some(g) if g <= 1100 => correction += f64::from(*d) * 2f64.powi(-g),
                        _ => break,
                    }
                }
                if !low.is_zero() {
                    let gap = top.to_f64().unwrap_or(f64::INFINITY) - low.bits() as f64;
                    if gap < 1100.0 {
                        correction += (ln_biguint(low) - top_ln(top)).exp();
                    }
                }
                top_ln(top) + correction.ln_1p()
            }
        }
    }

    /// `(e, c)` with `n = 2^e * (1 + c)`, `-1 < c < 1`; `None` for zero.
    pub fn log2_split(&self) -> Option<(BigUint, f64)> {
        match &self.0 {
            Repr::Exact(n) if n.is_zero() => None,
            Repr::Exact(n) => {
                let e = n.bits() - 1;
                let c = if e < 64 {
                    n.to_f64().expect("small") / 2f64.powi(e as i32) - 1.0
                } else {
                    let head = (n >> (e - 63)).to_u64().expect("64-bit head");
                    head as f64 / 2f64.powi(63) - 1.0
                };
                Some((BigUint::from(e), c))
            }
            Repr::Sparse { terms, low } => {
                let mut it = terms.iter().rev();
                let (top, _) = it.next().expect("sparse value has a leading term");
                let mut c = 0.0f64;
                for (e, d) in it {
                    match (top - e).to_i32() {
                        Some(g) if g <= 1100 => c += f64::from(*d) * 2f64.powi(-g),
                        _ => break,
                    }
                }
                if !low.is_zero() {
                    let gap = top.to_f64().unwrap_or(f64::INFINITY) - low.bits() as f64;
                    if gap < 1100.0 {
                        c += (ln_biguint(low) - top_ln(top)).exp();
                    }
                }
                Some((top.clone(), c))
            }
        }
    }

    /// `ln(a / b)` for positive `a`, `b`, accurate even when both logarithms
    /// are too large to subtract in floating point.
    pub fn ln_ratio(a: &Natural, b: &Natural) -> f64 {
        let (Some((ea, ca)), Some((eb, cb))) = (a.log2_split(), b.log2_split()) else {
            return if a.is_zero() { f64::NEG_INFINITY } else { f64::INFINITY };
        };
        let de = BigInt::from(ea) - BigInt::from(eb);
        de.to_f64().unwrap_or(f64::NAN) * LN_2 + (ca.ln_1p() - cb.ln_1p())
    }

    /// `ln(1 + n)`.
    pub fn ln_1p(&self) -> f64 {
        match &self.0 {
            Repr::Exact(n) => match n.to_u64() {
                Some(v) if v < (1u64 << 53) => (v as f64).ln_1p(),
                _ => ln_biguint(&(n + 1u32)),
            },
            Repr::Sparse { .. } => (self + &Natural::one()).ln(),
        }
    }

    /// `ln(ln(1 + n))`, finite even when `ln(1 + n)` overflows `f64`.
    pub fn ln_ln_1p(&self) -> f64 {
        let l = self.ln_1p();
        if l.is_finite() {
            return l.ln();
        }
        // n ~ 2^e with e beyond f64: ln(e ln 2 + O(1)) = ln e + ln ln 2
        let e = self.floor_log2().expect("nonzero");
        ln_biguint(&e) + LN_2.ln()
    }

    /// Largest `m >= 1` with `m! <= x`, for `x >= 1`.
    pub fn factorial_floor_index(x: &BigUint) -> u64 {
        // exponential then binary search on the memoized table
        let (mut lo, mut hi) = (1u64, 2u64);
        while Natural::factorial(hi) <= *x {
            lo = hi;
            hi *= 2;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if Natural::factorial(mid) <= *x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// `floor(x)` for finite `x >= 0`.
    pub fn from_f64_floor(x: f64) -> Option<Self> {
        if !x.is_finite() || x < 0.0 {
            return None;
        }
        let (mantissa, exp) = decompose_f64(x.floor());
        let n = Natural::from(mantissa);
        Some(if exp >= 0 {
            n.shl(exp as u64)
        } else {
            n.shr_floor((-exp) as u64)
        })
    }

    /// Approximately `exp(ln_value)` as an integer (53 significant bits).
    pub fn from_ln(ln_value: f64) -> Option<Self> {
        if ln_value.is_nan() || ln_value == f64::INFINITY {
            return None;
        }
        if ln_value < 700.0 {
            return Natural::from_f64_floor(ln_value.exp());
        }
        let log2 = ln_value / LN_2;
        let shift = log2.floor() - 52.0;
        let mantissa = (log2 - shift).exp2().floor() as u64;
        Some(Natural::from(mantissa).shl(shift as u64))
    }

    /// `self + 2^exp`.
    pub fn add_pow2<E: Into<BigUint>>(&self, exp: E) -> Self {
        self + &Natural::pow2(exp)
    }

    pub fn checked_sub(&self, rhs: &Natural) -> Option<Natural> {
        if let (Repr::Exact(a), Repr::Exact(b)) = (&self.0, &rhs.0) {
            return if a >= b {
                Some(Natural(Repr::Exact(a - b)))
            } else {
                None
            };
        }
        let (mut terms, low) = self.parts();
        let (rterms, rlow) = rhs.parts();
        for (e, d) in rterms {
            *terms.entry(e).or_insert(0) -= d;
        }
        normalize(terms, low - rlow)
    }

    pub fn saturating_sub(&self, rhs: &Natural) -> Natural {
        self.checked_sub(rhs).unwrap_or_else(Natural::zero)
    }

    pub fn mul_u64(&self, a: u64) -> Natural {
        match &self.0 {
            Repr::Exact(n) if n.bits() + 64 <= EXACT_BITS => Natural(Repr::Exact(n * a)),
            _ => {
                let (terms, low) = self.parts();
                let mut out: BTreeMap<BigUint, i64> = BTreeMap::new();
                for bit in 0..64u32 {
                    if a >> bit & 1 == 1 {
                        for (e, d) in &terms {
                            *out.entry(e + bit).or_insert(0) += d;
                        }
                    }
                }
                normalize(out, low * BigInt::from(a)).expect("product of naturals is natural")
            }
        }
    }

    /// `floor(a * self)` for finite `a >= 0`, exact.
    pub fn mul_f64_floor(&self, a: f64) -> Natural {
        assert!(a.is_finite() && a >= 0.0, "scale factor must be finite and nonnegative");
        let (m, e) = decompose_f64(a);
        let p = self.mul_u64(m);
        if e >= 0 {
            p.shl(e as u64)
        } else {
            p.shr_floor((-e) as u64)
        }
    }

    /// Exact sign of `self - a * other` for finite `a >= 0`.
    pub fn cmp_scaled(&self, a: f64, other: &Natural) -> Ordering {
        assert!(a.is_finite() && a >= 0.0, "scale factor must be finite and nonnegative");
        let (m, e) = decompose_f64(a);
        let rhs = other.mul_u64(m);
        if e >= 0 {
            self.cmp(&rhs.shl(e as u64))
        } else {
            self.shl((-e) as u64).cmp(&rhs)
        }
    }

    /// `self * 2^shift`.
    pub fn shl(&self, shift: u64) -> Natural {
        match &self.0 {
            Repr::Exact(n) if n.is_zero() => Natural::zero(),
            Repr::Exact(n) if n.bits() + shift <= EXACT_BITS => {
                Natural(Repr::Exact(n << shift))
            }
            _ => {
                let (terms, low) = self.parts();
                let mut out: BTreeMap<BigUint, i64> =
                    terms.into_iter().map(|(e, d)| (e + shift, d)).collect();
                if shift < EXACT_BITS {
                    // carrying splits off the bits pushed past the dense width
                    return normalize(out, low << shift).expect("shift of a natural is natural");
                }
                let low = low.to_biguint().expect("low word is nonnegative");
                for i in 0..low.bits() {
                    if low.bit(i) {
                        *out.entry(BigUint::from(i + shift)).or_insert(0) += 1;
                    }
                }
                normalize(out, BigInt::zero()).expect("shift of a natural is natural")
            }
        }
    }

    /// `floor(self / 2^shift)`.
    pub fn shr_floor(&self, shift: u64) -> Natural {
        match &self.0 {
            Repr::Exact(n) => Natural(Repr::Exact(n >> shift)),
            Repr::Sparse { .. } => {
                let (terms, mut low) = self.parts();
                let fold_below = BigUint::from(EXACT_BITS + shift);
                let mut out = BTreeMap::new();
                for (e, d) in terms {
                    if e < fold_below {
                        let e = e.to_u64().expect("exponent below fold limit");
                        let term = BigInt::one() << e;
                        if d > 0 {
                            low += term;
                        } else {
                            low -= term;
                        }
                    } else {
                        out.insert(e - shift, d);
                    }
                }
                let low = low.div_floor(&(BigInt::one() << shift));
                normalize(out, low).expect("quotient of a natural is natural")
            }
        }
    }

    /// `n!` as a dense integer, memoized.
    pub fn factorial(n: u64) -> BigUint {
        static TABLE: OnceLock<RwLock<Vec<BigUint>>> = OnceLock::new();
        let table = TABLE.get_or_init(|| RwLock::new(vec![BigUint::one()]));
        let idx = n as usize;
        {
            let t = table.read().expect("factorial table poisoned");
            if let Some(v) = t.get(idx) {
                return v.clone();
            }
        }
        let mut t = table.write().expect("factorial table poisoned");
        while t.len() <= idx {
            let next = t.last().expect("nonempty") * BigUint::from(t.len());
            t.push(next);
        }
        t[idx].clone()
    }

    fn parts(&self) -> (BTreeMap<BigUint, i64>, BigInt) {
        match &self.0 {
            Repr::Exact(n) => split_dense(n),
            Repr::Sparse { terms, low } => (
                terms.iter().map(|(e, d)| (e.clone(), i64::from(*d))).collect(),
                BigInt::from(low.clone()),
            ),
        }
    }

    /// Sign of `self - rhs`.
    fn compare(&self, rhs: &Natural) -> Ordering {
        match (&self.0, &rhs.0) {
            (Repr::Exact(a), Repr::Exact(b)) => return a.cmp(b),
            // every sparse value is at least 2^EXACT_BITS, every exact one below it
            (Repr::Exact(_), Repr::Sparse { .. }) => return Ordering::Less,
            (Repr::Sparse { .. }, Repr::Exact(_)) => return Ordering::Greater,
            _ => {}
        }
        let (mut terms, low) = self.parts();
        let (rterms, rlow) = rhs.parts();
        for (e, d) in rterms {
            *terms.entry(e).or_insert(0) -= d;
        }
        let (terms, low) = carry(terms, low - rlow);
        match terms.iter().next_back() {
            Some((_, d)) if *d > 0 => Ordering::Greater,
            Some(_) => Ordering::Less,
            None => low.sign().cmp_to_ordering(),
        }
    }
}

trait SignOrdering {
    fn cmp_to_ordering(self) -> Ordering;
}

impl SignOrdering for Sign {
    fn cmp_to_ordering(self) -> Ordering {
        match self {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

fn top_ln(top: &BigUint) -> f64 {
    top.to_f64().unwrap_or(f64::INFINITY) * LN_2
}

fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        return n.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let head = (n >> shift).to_u64().expect("64-bit head");
    (head as f64).ln() + shift as f64 * LN_2
}

pub(crate) fn decompose_f64(x: f64) -> (u64, i64) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    }
}

fn split_dense(n: &BigUint) -> (BTreeMap<BigUint, i64>, BigInt) {
    if n.bits() <= EXACT_BITS {
        return (BTreeMap::new(), BigInt::from(n.clone()));
    }
    let low = n & ((BigUint::one() << EXACT_BITS) - 1u32);
    let high = n >> EXACT_BITS;
    let mut terms = BTreeMap::new();
    for i in 0..high.bits() {
        if high.bit(i) {
            terms.insert(BigUint::from(i + EXACT_BITS), 1i64);
        }
    }
    (terms, BigInt::from(low))
}

/// Moves the low word into `[0, 2^EXACT_BITS)` and reduces digits to `±1`.
fn carry(mut terms: BTreeMap<BigUint, i64>, low: BigInt) -> (BTreeMap<BigUint, i8>, BigInt) {
    let modulus = BigInt::one() << EXACT_BITS;
    let (q, low) = low.div_mod_floor(&modulus);
    if !q.is_zero() {
        let sign = if q.is_negative() { -1 } else { 1 };
        let mag = q.abs().to_biguint().expect("magnitude");
        for i in 0..mag.bits() {
            if mag.bit(i) {
                *terms.entry(BigUint::from(i + EXACT_BITS)).or_insert(0) += sign;
            }
        }
    }
    let mut out = BTreeMap::new();
    let mut pending: BTreeMap<BigUint, i64> = terms;
    while let Some((e, c)) = pending.pop_first() {
        if c == 0 {
            continue;
        }
        if (-1..=1).contains(&c) {
            out.insert(e, c as i8);
            continue;
        }
        let half = c / 2;
        let r = c - 2 * half;
        if r != 0 {
            out.insert(e.clone(), r as i8);
        }
        *pending.entry(e + 1u32).or_insert(0) += half;
    }
    (out, low)
}

fn normalize(terms: BTreeMap<BigUint, i64>, low: BigInt) -> Option<Natural> {
    let (terms, low) = carry(terms, low);
    let low = low.to_biguint().expect("carried low word is nonnegative");
    match terms.iter().next_back() {
        None => Some(Natural(Repr::Exact(low))),
        Some((_, d)) if *d < 0 => None,
        Some((top, _)) => {
            if top.to_u64().is_some_and(|t| t <= EXACT_BITS) {
                // small enough to hold densely
                let mut acc = BigInt::from(low);
                for (e, d) in &terms {
                    let t = BigInt::one() << e.to_u64().expect("small exponent");
                    if *d > 0 {
                        acc += t;
                    } else {
                        acc -= t;
                    }
                }
                let n = acc.to_biguint().expect("positive leading digit");
                if n.bits() <= EXACT_BITS {
                    return Some(Natural(Repr::Exact(n)));
                }
                let (t, l) = split_dense(&n);
                let (t, l) = carry(t, l);
                return Some(Natural(Repr::Sparse {
                    terms: t,
                    low: l.to_biguint().expect("nonnegative"),
                }));
            }
            Some(Natural(Repr::Sparse { terms, low }))
        }
    }
}

impl From<u64> for Natural {
    fn from(v: u64) -> Self {
        Natural(Repr::Exact(BigUint::from(v)))
    }
}

impl From<u32> for Natural {
    fn from(v: u32) -> Self {
        Natural::from(u64::from(v))
    }
}

impl From<usize> for Natural {
    fn from(v: usize) -> Self {
        Natural::from(v as u64)
    }
}

impl From<u128> for Natural {
    fn from(v: u128) -> Self {
        Natural(Repr::Exact(BigUint::from(v)))
    }
}

impl From<BigUint> for Natural {
    fn from(n: BigUint) -> Self {
        if n.bits() <= EXACT_BITS {
            Natural(Repr::Exact(n))
        } else {
            let (t, l) = split_dense(&n);
            normalize(t, l).expect("nonnegative")
        }
    }
}

impl<'a> Add<&'a Natural> for &'a Natural {
    type Output = Natural;

    fn add(self, rhs: &'a Natural) -> Natural {
        if let (Repr::Exact(a), Repr::Exact(b)) = (&self.0, &rhs.0) {
            let s = a + b;
            if s.bits() <= EXACT_BITS {
                return Natural(Repr::Exact(s));
            }
        }
        let (mut terms, low) = self.parts();
        let (rterms, rlow) = rhs.parts();
        for (e, d) in rterms {
            *terms.entry(e).or_insert(0) += d;
        }
        normalize(terms, low + rlow).expect("sum of naturals is natural")
    }
}

impl Add for Natural {
    type Output = Natural;

    fn add(self, rhs: Natural) -> Natural {
        &self + &rhs
    }
}

impl Add<u64> for &Natural {
    type Output = Natural;

    fn add(self, rhs: u64) -> Natural {
        self + &Natural::from(rhs)
    }
}

/// Panics when the result would be negative; use [`Natural::checked_sub`]
/// where that can happen.
impl<'a> Sub<&'a Natural> for &'a Natural {
    type Output = Natural;

    fn sub(self, rhs: &'a Natural) -> Natural {
        self.checked_sub(rhs).expect("natural subtraction underflow")
    }
}

impl Sub<u64> for &Natural {
    type Output = Natural;

    fn sub(self, rhs: u64) -> Natural {
        self - &Natural::from(rhs)
    }
}

impl PartialEq for Natural {
    fn eq(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Equal
    }
}

impl Eq for Natural {}

impl PartialOrd for Natural {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Natural {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

impl PartialEq<u64> for Natural {
    fn eq(&self, other: &u64) -> bool {
        self.to_u64() == Some(*other)
    }
}

impl Default for Natural {
    fn default() -> Self {
        Natural::zero()
    }
}

impl fmt::Display for Natural {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Exact(n) => write!(f, "{n}"),
            Repr::Sparse { terms, low } => {
                let mut first = true;
                for (e, d) in terms.iter().rev() {
                    match (first, *d > 0) {
                        (true, _) => write!(f, "2^{e}")?,
                        (false, true) => write!(f, "+2^{e}")?,
                        (false, false) => write!(f, "-2^{e}")?,
                    }
                    first = false;
                }
                if !low.is_zero() {
                    if low.bits() <= 256 {
                        write!(f, "+{low}")?;
                    } else {
                        write!(f, "+<{}-bit>", low.bits())?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Natural {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Natural({self})")
    }
}

impl Serialize for Natural {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn huge(e: u64) -> Natural {
        Natural::pow2(BigUint::from(e))
    }

    #[test]
    fn small_arithmetic_matches_u128() {
        let a = Natural::from(123_456_789u64);
        let b = Natural::from(987_654u64);
        assert_eq!((&a + &b).to_u64(), Some(124_444_443));
        assert_eq!((&a - &b).to_u64(), Some(122_469_135));
        assert!(b.checked_sub(&a).is_none());
        assert_eq!(a.mul_u64(1000).to_u64(), Some(123_456_789_000));
        assert_eq!(a.shl(3).to_u64(), Some(987_654_312));
        assert_eq!(a.shr_floor(3).to_u64(), Some(15_432_098));
    }

    #[test]
    fn sparse_powers_compare_and_cancel() {
        let e = 3 * EXACT_BITS;
        let p = huge(e);
        let pm1 = &p - &Natural::one();
        assert!(pm1 < p);
        assert!(Natural::from(u64::MAX) < pm1);
        assert_eq!(&pm1 + &Natural::one(), p);
        assert_eq!(pm1.floor_log2(), Some(BigUint::from(e - 1)));
        assert_eq!(p.floor_log2(), Some(BigUint::from(e)));
        let twice = &p + &p;
        assert_eq!(twice, huge(e + 1));
        assert_eq!(p.shl(1), twice);
        assert_eq!(twice.shr_floor(1), p);
        assert!((&twice - &p) == p);
    }

    #[test]
    fn factorial_exponents_beyond_u128() {
        let e = Natural::factorial(40);
        let p = Natural::pow2(e.clone());
        let q = Natural::pow2(Natural::factorial(39));
        let s = &p + &q;
        assert!(s > p);
        assert_eq!(s.floor_log2(), Some(e.clone()));
        let rel = (s.ln() - e.to_f64().unwrap() * LN_2).abs() / s.ln();
        assert!(rel < 1e-15);
    }

    #[test]
    fn ln_of_large_exact_values() {
        let n = BigUint::one() << 120u32;
        let got = Natural::from(n).ln_1p();
        let want = 120.0 * LN_2;
        assert!((got - want).abs() / want < 1e-12);
        assert_eq!(Natural::zero().ln(), f64::NEG_INFINITY);
        assert!((Natural::from(7u64).ln_1p() - 8f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn ln_of_sparse_value_with_correction() {
        // 2^e + 2^(e-1) = 1.5 * 2^e
        let e = 2 * EXACT_BITS;
        let v = &huge(e) + &huge(e - 1);
        let want = e as f64 * LN_2 + 1.5f64.ln();
        assert!((v.ln() - want).abs() / want < 1e-15);
    }

    #[test]
    fn factorial_inverse_and_iterated_log() {
        assert_eq!(Natural::factorial_floor_index(&BigUint::from(1u32)), 1);
        assert_eq!(Natural::factorial_floor_index(&BigUint::from(5u32)), 2);
        assert_eq!(Natural::factorial_floor_index(&BigUint::from(6u32)), 3);
        assert_eq!(Natural::factorial_floor_index(&Natural::factorial(30)), 30);
        assert_eq!(Natural::factorial_floor_index(&(Natural::factorial(31) - 1u32)), 30);
        let n = Natural::from(1000u64);
        assert!((n.ln_ln_1p() - 1001f64.ln().ln()).abs() < 1e-14);
        // 2^(200!): ln(ln(1+n)) = ln(200!) + ln(ln 2)
        let big = Natural::pow2(Natural::factorial(200));
        let want = (1..=200).map(|i| (i as f64).ln()).sum::<f64>() + LN_2.ln();
        assert!((big.ln_ln_1p() - want).abs() < 1e-9);
    }

    #[test]
    fn dyadic_scaling_is_exact() {
        let n = Natural::from(1000u64);
        assert_eq!(n.mul_f64_floor(0.5), Natural::from(500u64));
        assert_eq!(n.mul_f64_floor(1.5), Natural::from(1500u64));
        assert_eq!(n.mul_f64_floor(0.1), Natural::from(100u64)); // 0.1 is slightly above 1/10
        assert_eq!(Natural::from(3u64).mul_f64_floor(1.0 / 3.0), Natural::zero());
        assert_eq!(Natural::from(500u64).cmp_scaled(0.5, &n), Ordering::Equal);
        assert_eq!(Natural::from(499u64).cmp_scaled(0.5, &n), Ordering::Less);
        let big = Natural::pow2(Natural::factorial(30));
        assert_eq!(big.mul_f64_floor(0.5), Natural::pow2(Natural::factorial(30) - 1u32));
        assert_eq!((&big - 1u64).cmp_scaled(1.0, &big), Ordering::Less);
    }

    #[test]
    fn log_ratio_of_huge_neighbours() {
        let a = Natural::pow2(Natural::factorial(30));
        let b = a.shl(1);
        assert!((Natural::ln_ratio(&a, &b) + LN_2).abs() < 1e-15);
        let c = &a + &Natural::pow2(Natural::factorial(30) - 2u32);
        assert!((Natural::ln_ratio(&c, &a) - 1.25f64.ln()).abs() < 1e-15);
        let x = Natural::from(3u64 << 40);
        assert!((Natural::ln_ratio(&x, &Natural::from(1u64 << 40)) - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn float_round_trips() {
        assert_eq!(Natural::from_f64_floor(4.7).unwrap().to_u64(), Some(4));
        assert_eq!(Natural::from_f64_floor(0.3).unwrap().to_u64(), Some(0));
        let big = Natural::from_f64_floor(2f64.powi(80)).unwrap();
        assert_eq!(big, Natural::pow2(80u32));
        let approx = Natural::from_ln(5000.0).unwrap();
        assert!((approx.ln() - 5000.0).abs() < 1e-12);
        assert!(Natural::from_f64_floor(f64::NAN).is_none());
    }

    #[test]
    fn crossing_the_dense_boundary() {
        let edge = huge(EXACT_BITS);
        let below = &edge - &Natural::one();
        assert!(below.as_biguint().is_some());
        assert_eq!(below.bits(), BigUint::from(EXACT_BITS));
        assert_eq!(&below + &Natural::one(), edge);
        let doubled = below.mul_u64(2);
        assert_eq!(doubled, &edge.shl(1) - &Natural::from(2u64));
    }
}
