//! Dense univariate polynomials over `Z`, little-endian (constant term first).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::Rat;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<BigInt>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Poly::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn monomial(c: BigInt, k: usize) -> Self {
        let mut v = vec![BigInt::zero(); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn lc(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_rat(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + Rat::from_integer(c.clone());
        }
        acc
    }

    /// `sum c_i a^i b^(deg-i)`, the binary form of formal degree `deg`.
    pub fn hom_eval(&self, a: &BigInt, b: &BigInt, deg: usize) -> BigInt {
        debug_assert!(self.degree().is_none_or(|d| d <= deg));
        let mut total = BigInt::zero();
        let mut apow = BigInt::one();
        let mut bpows = Vec::with_capacity(deg + 1);
        let mut bp = BigInt::one();
        for _ in 0..=deg {
            bpows.push(bp.clone());
            bp *= b;
        }
        for i in 0..=deg {
            let c = self.coeff(i);
            if !c.is_zero() {
                total += c * &apow * &bpows[deg - i];
            }
            apow *= a;
        }
        total
    }

    /// Coefficients reduced into `[0, p)`.
    pub fn reduce_mod(&self, p: u64) -> Vec<u64> {
        let bp = BigInt::from(p);
        self.coeffs
            .iter()
            .map(|c| c.mod_floor(&bp).to_u64().unwrap())
            .collect()
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::new(v)
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Exact division of every coefficient by `k`.
    pub fn div_exact(&self, k: &BigInt) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .map(|c| {
                    debug_assert!((c % k).is_zero());
                    c / k
                })
                .collect(),
        )
    }

    /// `P(t0 + s*t)` as a polynomial in `t`.
    pub fn shift_scale(&self, t0: &BigInt, s: &BigInt) -> Poly {
        let lin = Poly::new(vec![t0.clone(), s.clone()]);
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&Poly::new(vec![c.clone()]));
        }
        acc
    }

    /// `x^deg P(1/x)`.
    pub fn reversed(&self, deg: usize) -> Poly {
        let mut v: Vec<BigInt> = (0..=deg).map(|i| self.coeff(i)).collect();
        v.reverse();
        Poly::new(v)
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn resultant(a: &Poly, b: &Poly) -> BigInt {
        let (m, n) = match (a.degree(), b.degree()) {
            (Some(m), Some(n)) => (m, n),
            _ => return BigInt::zero(),
        };
        if m + n == 0 {
            return BigInt::one();
        }
        let size = m + n;
        let mut mat = vec![vec![BigInt::zero(); size]; size];
        for r in 0..n {
            for i in 0..=m {
                mat[r][r + i] = a.coeff(m - i);
            }
        }
        for r in 0..m {
            for j in 0..=n {
                mat[n + r][r + j] = b.coeff(n - j);
            }
        }
        bareiss_det(mat)
    }

    /// `disc(P) = (-1)^(n(n-1)/2) Res(P, P') / lc(P)`.
    pub fn discriminant(&self) -> BigInt {
        let n = match self.degree() {
            Some(n) if n >= 1 => n,
            _ => return BigInt::zero(),
        };
        if n == 1 {
            return BigInt::one();
        }
        let r = Poly::resultant(self, &self.derivative());
        let d = r / self.lc();
        if (n * (n - 1) / 2) % 2 == 1 {
            -d
        } else {
            d
        }
    }

    /// Number of distinct real roots, by a Sturm sequence.
    pub fn real_root_count(&self) -> usize {
        if !self.degree().is_some_and(|d| d >= 1) {
            return 0;
        }
        let p0: Vec<Rat> = self.coeffs.iter().map(|c| Rat::from_integer(c.clone())).collect();
        let p1: Vec<Rat> = self
            .derivative()
            .coeffs
            .iter()
            .map(|c| Rat::from_integer(c.clone()))
            .collect();
        let mut seq = vec![p0, p1];
        loop {
            let n = seq.len();
            let r = rat_rem(&seq[n - 2], &seq[n - 1]);
            if r.is_empty() {
                break;
            }
            seq.push(r.into_iter().map(|c| -c).collect());
        }
        let at_pos: Vec<i8> = seq.iter().map(|p| sign_of(p.last().unwrap())).collect();
        let at_neg: Vec<i8> = seq
            .iter()
            .map(|p| {
                let s = sign_of(p.last().unwrap());
                if (p.len() - 1) % 2 == 1 {
                    -s
                } else {
                    s
                }
            })
            .collect();
        variations(&at_neg) - variations(&at_pos)
    }
}

fn sign_of(q: &Rat) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

fn variations(s: &[i8]) -> usize {
    let nz: Vec<i8> = s.iter().copied().filter(|&x| x != 0).collect();
    nz.windows(2).filter(|w| w[0] != w[1]).count()
}

fn rat_rem(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut r: Vec<Rat> = a.to_vec();
    let db = b.len() - 1;
    let lb = b[db].clone();
    while r.len() > db {
        let lr = r.last().unwrap().clone();
        if lr.is_zero() {
            r.pop();
            continue;
        }
        let q = lr / &lb;
        let shift = r.len() - 1 - db;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &q * c;
        }
        r.pop();
    }
    while r.last().is_some_and(|c| c.is_zero()) {
        r.pop();
    }
    r
}

fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show = !(a.is_one() && i > 0);
            if show {
                write!(f, "{}", a)?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{}", i)?,
            }
        }
        Ok(())
    }
}
