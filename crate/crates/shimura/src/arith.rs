//! Exact integer and rational primitives: Kronecker symbol, factorization,
//! squarefree parts and rational square roots.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rat = BigRational;

/// Bases for Miller-Rabin; deterministic below 3.3e24.
const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

fn mod_small(a: &BigInt, m: u32) -> u32 {
    a.mod_floor(&BigInt::from(m)).to_u32().unwrap()
}

/// Kronecker symbol `(a/n)` with the usual conventions at 2, -1 and 0.
pub fn kronecker_symbol(a: &BigInt, n: &BigInt) -> i8 {
    if n.is_zero() {
        return if a.abs().is_one() { 1 } else { 0 };
    }
    let mut k: i8 = if n.is_negative() && a.is_negative() { -1 } else { 1 };
    let mut n = n.abs();
    let v = n.trailing_zeros().unwrap_or(0);
    if v > 0 {
        if a.is_even() {
            return 0;
        }
        n >>= v;
        if v % 2 == 1 {
            let r = mod_small(a, 8);
            if r == 3 || r == 5 {
                k = -k;
            }
        }
    }
    let mut a = a.mod_floor(&n);
    while !a.is_zero() {
        let v = a.trailing_zeros().unwrap_or(0);
        a >>= v;
        if v % 2 == 1 {
            let r = mod_small(&n, 8);
            if r == 3 || r == 5 {
                k = -k;
            }
        }
        if mod_small(&a, 4) == 3 && mod_small(&n, 4) == 3 {
            k = -k;
        }
        std::mem::swap(&mut a, &mut n);
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        k
    } else {
        0
    }
}

pub fn kronecker_i64(a: i64, n: i64) -> i8 {
    kronecker_symbol(&BigInt::from(a), &BigInt::from(n))
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in MR_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for a in MR_BASES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin on big inputs; deterministic below 3.3e24, probable above.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'outer: for a in MR_BASES {
        let a = BigUint::from(a);
        if (n % &a).is_zero() {
            return false;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn rho_u64(n: u64) -> u64 {
    for c in 1..n {
        let f = |x: u64| (mulmod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
    }
    n
}

fn rho_big(n: &BigUint) -> BigUint {
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut x = BigUint::from(2u32);
        let mut y = x.clone();
        let mut d = BigUint::one();
        while d.is_one() {
            x = f(&x);
            y = f(&f(&y));
            let diff = if x > y { &x - &y } else { &y - &x };
            d = diff.gcd(n);
        }
        if &d != n {
            return d;
        }
        c += 1u32;
    }
}

fn split_into(n: BigUint, out: &mut BTreeMap<BigUint, u32>) {
    if n.is_one() {
        return;
    }
    if is_probable_prime(&n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let d = match n.to_u64() {
        Some(s) => BigUint::from(rho_u64(s)),
        None => rho_big(&n),
    };
    let q = &n / &d;
    split_into(d, out);
    split_into(q, out);
}

/// Complete factorization of a nonzero integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub sign: i8,
    pub factors: Vec<(BigInt, u32)>,
}

impl Factorization {
    pub fn value(&self) -> BigInt {
        let mut v = BigInt::from(self.sign);
        for (p, e) in &self.factors {
            v *= num_traits::pow(p.clone(), *e as usize);
        }
        v
    }

    pub fn primes(&self) -> Vec<BigInt> {
        self.factors.iter().map(|(p, _)| p.clone()).collect()
    }
}

/// Largest supported input for [`factor`], in bits.
pub const FACTOR_BITS: u64 = 128;

fn trial_divide(n: &mut BigUint, limit: u64, out: &mut BTreeMap<BigUint, u32>) {
    let mut p = 2u64;
    while p <= limit {
        let bp = BigUint::from(p);
        if &bp * &bp > *n {
            break;
        }
        while (&*n % &bp).is_zero() {
            *n /= &bp;
            *out.entry(bp.clone()).or_insert(0) += 1;
        }
        p += if p == 2 { 1 } else { 2 };
    }
}

pub fn factor(n: &BigInt) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::OutOfRange("factor(0)".into()));
    }
    if n.bits() > FACTOR_BITS {
        return Err(Error::OutOfRange(format!("factor: {} exceeds {} bits", n, FACTOR_BITS)));
    }
    let mut m = n.magnitude().clone();
    let mut map = BTreeMap::new();
    trial_divide(&mut m, 1000, &mut map);
    split_into(m, &mut map);
    Ok(Factorization {
        sign: if n.is_negative() { -1 } else { 1 },
        factors: map.into_iter().map(|(p, e)| (BigInt::from(p), e)).collect(),
    })
}

pub fn factor_i64(n: i64) -> Result<Factorization> {
    factor(&BigInt::from(n))
}

/// Distinct prime divisors of an integer of any size whose cofactor after
/// trial division is either within [`FACTOR_BITS`] or a probable prime.
pub fn prime_divisors(n: &BigInt) -> Result<Vec<BigInt>> {
    if n.is_zero() {
        return Err(Error::OutOfRange("prime_divisors(0)".into()));
    }
    let mut m = n.magnitude().clone();
    let mut map = BTreeMap::new();
    trial_divide(&mut m, 1 << 16, &mut map);
    if !m.is_one() {
        if m.bits() <= FACTOR_BITS || is_probable_prime(&m) {
            split_into(m, &mut map);
        } else {
            return Err(Error::OutOfRange(format!("cannot factor cofactor {}", m)));
        }
    }
    Ok(map.into_keys().map(BigInt::from).collect())
}

/// The unique squarefree `d` with `n/d` a positive square.
pub fn squarefree_part(n: &BigInt) -> Result<BigInt> {
    let fac = factor(n)?;
    let mut d = BigInt::from(fac.sign);
    for (p, e) in fac.factors {
        if e % 2 == 1 {
            d *= p;
        }
    }
    Ok(d)
}

pub fn squarefree_i64(n: i64) -> i64 {
    assert!(n != 0, "squarefree part of zero");
    let mut m = n.unsigned_abs();
    let mut d: i64 = n.signum();
    let mut p = 2u64;
    while p * p <= m {
        let mut e = 0;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        if e % 2 == 1 {
            d *= p as i64;
        }
        p += 1;
    }
    d * m as i64
}

/// Squarefree class of a nonzero rational, i.e. the `d` with `Q(sqrt q) = Q(sqrt d)`.
pub fn squarefree_part_rat(q: &Rat) -> Result<BigInt> {
    squarefree_part(&(q.numer() * q.denom()))
}

/// Exact square root of a nonnegative integer, if it is a square.
pub fn isqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let low = n.magnitude().iter_u32_digits().next().unwrap_or(0) & 0xff;
    // squares modulo 256 are restricted; cheap rejection before the root
    if !SQUARE_MOD_256[low as usize] {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

const SQUARE_MOD_256: [bool; 256] = {
    let mut t = [false; 256];
    let mut i = 0;
    while i < 256 {
        t[(i * i) % 256] = true;
        i += 1;
    }
    t
};

/// Nonnegative rational square root, when `q` is a square in `Q`.
pub fn is_rational_square(q: &Rat) -> Option<Rat> {
    let n = isqrt_exact(q.numer())?;
    let d = isqrt_exact(q.denom())?;
    Some(Rat::new(n, d))
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let bp = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&bp);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (2..=n).filter(|&k| sieve[k]).map(|k| k as u64).collect()
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {:?}", s));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if b.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(a, b))
        }
        None => Ok(Rat::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn fmt_rat(q: &Rat) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
