//! Curve identifiers, exact models `y^2 + h(x) y = f(x)`, rational points and
//! point counts over prime fields.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{fmt_rat, is_rational_square, parse_rat, powmod, prime_divisors, primes_up_to, Rat};
use crate::atkin_lehner::{is_hall_divisor, key_for, validate_level};
use crate::error::{Error, Result};
use crate::poly::Poly;

/// Quotient `X_0(D,N)/<w_m : m in W>`; an empty `w` is the curve itself.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurveId {
    pub d: u64,
    pub n: u64,
    pub w: Vec<u64>,
}

impl CurveId {
    pub fn new(d: u64, n: u64, w: Vec<u64>) -> Result<Self> {
        validate_level(d, n)?;
        for &m in &w {
            if m == 1 || !is_hall_divisor(m, d * n) {
                return Err(Error::AtkinLehner(format!(
                    "{} is not a nontrivial Hall divisor of {}",
                    m,
                    d * n
                )));
            }
        }
        Ok(CurveId { d, n, w })
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", key_for(self.d, self.n, &self.w))
    }
}

impl FromStr for CurveId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad curve id {:?}", s));
        let parts: Vec<&str> = s.trim().split('.').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let d: u64 = parts[0].parse().map_err(|_| bad())?;
        let n: u64 = parts[1].parse().map_err(|_| bad())?;
        let w: Vec<u64> = if parts[2] == "1" {
            Vec::new()
        } else {
            parts[2]
                .split('-')
                .map(|m| m.parse().map_err(|_| bad()))
                .collect::<Result<_>>()?
        };
        CurveId::new(d, n, w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    HyperellipticEven,
    HyperellipticOdd,
    Weierstrass,
    PlaneCubic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Plus,
    Minus,
    Odd,
}

/// A rational point; points at infinity carry their branch.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RatPoint {
    Affine { x: Rat, y: Rat },
    Infinity(Branch),
}

impl RatPoint {
    pub fn affine(x: Rat, y: Rat) -> Self {
        RatPoint::Affine { x, y }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, RatPoint::Infinity(_))
    }

    fn sort_key(&self) -> (u8, Option<(&Rat, &Rat)>, Option<Branch>) {
        match self {
            RatPoint::Affine { x, y } => (0, Some((x, y)), None),
            RatPoint::Infinity(b) => (1, None, Some(*b)),
        }
    }
}

impl Ord for RatPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for RatPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RatPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatPoint::Affine { x, y } => write!(f, "({},{})", fmt_rat(x), fmt_rat(y)),
            RatPoint::Infinity(Branch::Odd) => write!(f, "inf"),
            RatPoint::Infinity(Branch::Plus) => write!(f, "inf+"),
            RatPoint::Infinity(Branch::Minus) => write!(f, "inf-"),
        }
    }
}

impl FromStr for RatPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" => return Ok(RatPoint::Infinity(Branch::Odd)),
            "inf+" => return Ok(RatPoint::Infinity(Branch::Plus)),
            "inf-" => return Ok(RatPoint::Infinity(Branch::Minus)),
            _ => {}
        }
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("bad point {:?}", s)))?;
        let (x, y) = inner
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("bad point {:?}", s)))?;
        Ok(RatPoint::affine(parse_rat(x)?, parse_rat(y)?))
    }
}

impl Serialize for RatPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Exact model with the completed polynomial `F = 4f + h^2`, so that `(2y + h)^2 = F(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveModel {
    pub id: CurveId,
    pub kind: ModelKind,
    pub h: Poly,
    pub f: Poly,
    pub big_f: Poly,
    pub genus: usize,
    pub disc: BigInt,
}

impl CurveModel {
    /// Degree of the binary form attached to `F`, i.e. `2g + 2`.
    pub fn form_degree(&self) -> usize {
        2 * self.genus + 2
    }

    pub fn h_at(&self, x: &Rat) -> Rat {
        self.h.eval_rat(x)
    }

    /// Points at infinity permitted over `Q`.
    pub fn infinity_points(&self) -> Vec<RatPoint> {
        let deg = self.big_f.degree().unwrap_or(0);
        if deg % 2 == 1 {
            return vec![RatPoint::Infinity(Branch::Odd)];
        }
        let lc = Rat::from_integer(self.big_f.lc());
        if !lc.is_zero() && is_rational_square(&lc).is_some() {
            vec![RatPoint::Infinity(Branch::Plus), RatPoint::Infinity(Branch::Minus)]
        } else {
            Vec::new()
        }
    }

    /// The point `(x, y)` lies on the curve, or the infinity branch exists.
    pub fn evaluate(&self, p: &RatPoint) -> bool {
        match p {
            RatPoint::Affine { x, y } => {
                y * y + self.h.eval_rat(x) * y == self.f.eval_rat(x)
            }
            RatPoint::Infinity(_) => self.infinity_points().contains(p),
        }
    }

    /// `(2y + h(x))` evaluated at an affine point.
    pub fn completed_y(&self, x: &Rat, y: &Rat) -> Rat {
        Rat::from_integer(BigInt::from(2)) * y + self.h.eval_rat(x)
    }

    /// Converts weighted projective coordinates `(X : Y : Z)` with weights
    /// `(1, g+1, 1)` (plane coordinates for cubics) into a point.
    pub fn point_from_projective(&self, xx: &Rat, yy: &Rat, zz: &Rat) -> Result<RatPoint> {
        let w = if self.genus == 1 && self.big_f.degree() == Some(3) { 1 } else { self.genus as i32 + 1 };
        if zz.is_zero() {
            let deg = self.big_f.degree().unwrap_or(0);
            if deg % 2 == 1 {
                return Ok(RatPoint::Infinity(Branch::Odd));
            }
            if xx.is_zero() {
                return Err(Error::Parse("(0 : Y : 0) is not a point".into()));
            }
            // y / x^(g+1) tends to the root of Y^2 + h_{g+1} Y = f_{2g+2}
            let gp1 = self.genus + 1;
            let lead_y = yy / num_traits::pow(xx.clone(), gp1);
            let two = Rat::from_integer(BigInt::from(2));
            let t = two * lead_y + Rat::from_integer(self.h.coeff(gp1));
            let branch = if t.is_positive() { Branch::Plus } else { Branch::Minus };
            let p = RatPoint::Infinity(branch);
            return if self.evaluate(&p) { Ok(p) } else { Err(Error::Parse("point at infinity not on curve".into())) };
        }
        let x = xx / zz;
        let y = yy / num_traits::pow(zz.clone(), w as usize);
        Ok(RatPoint::affine(x, y))
    }

    pub fn count_points_mod_p(&self, p: u64) -> Result<FpPointCount> {
        if p == 2 || !self.is_good_prime(p) {
            return Err(Error::BadPrime(p));
        }
        let fc = self.big_f.reduce_mod(p);
        let mut chi = vec![-1i8; p as usize];
        chi[0] = 0;
        for t in 1..p {
            chi[(t * t % p) as usize] = 1;
        }
        let mut count: i64 = 0;
        for x in 0..p {
            let mut acc = 0u64;
            for c in fc.iter().rev() {
                acc = (acc * x + c) % p;
            }
            count += 1 + chi[acc as usize] as i64;
        }
        let top = self.big_f.coeff(self.form_degree()).mod_floor(&BigInt::from(p)).to_u64().unwrap();
        count += 1 + chi[top as usize] as i64;
        let count = count as u64;
        debug_assert!({
            let dev = (count as f64 - (p as f64 + 1.0)).abs();
            dev <= 2.0 * self.genus as f64 * (p as f64).sqrt() + 1e-9
        });
        Ok(FpPointCount { p, count })
    }

    /// Odd good primes up to `limit`: `p` divides neither `disc(F)` nor `lc(F)`.
    pub fn good_primes(&self, limit: u64) -> Vec<u64> {
        primes_up_to(limit).into_iter().filter(|&p| p > 2 && self.is_good_prime(p)).collect()
    }

    pub fn is_good_prime(&self, p: u64) -> bool {
        let bp = BigInt::from(p);
        !(&self.disc % &bp).is_zero() && !(self.big_f.lc() % &bp).is_zero()
    }

    /// Primes dividing `2 disc(F) lc(F)`.
    pub fn bad_primes(&self) -> Result<Vec<u64>> {
        let n = BigInt::from(2) * &self.disc * self.big_f.lc();
        prime_divisors(&n)?
            .into_iter()
            .map(|p| p.to_u64().ok_or_else(|| Error::OutOfRange(format!("bad prime {}", p))))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FpPointCount {
    pub p: u64,
    pub count: u64,
}

fn infer_kind(h: &Poly, f: &Poly, big_f: &Poly) -> ModelKind {
    let hd = h.degree().unwrap_or(0);
    if f.degree() == Some(3) && f.lc().is_one() && hd <= 1 {
        ModelKind::Weierstrass
    } else if big_f.degree().unwrap_or(0) % 2 == 1 {
        ModelKind::HyperellipticOdd
    } else {
        ModelKind::HyperellipticEven
    }
}

/// Builds a model, computing the genus and rejecting singular ones.
pub fn parse_model(h: &[i64], f: &[i64], id: CurveId) -> Result<CurveModel> {
    build_model(Poly::from_i64(h), Poly::from_i64(f), id, None)
}

pub fn build_model(h: Poly, f: Poly, id: CurveId, kind: Option<ModelKind>) -> Result<CurveModel> {
    let big_f = f.scale(&BigInt::from(4)).add(&h.mul(&h));
    let deg = match big_f.degree() {
        None => return Err(Error::InvalidModel("F = 4f + h^2 is zero".into())),
        Some(d) => d,
    };
    if deg < 3 {
        return Err(Error::InvalidModel(format!("F has degree {} < 3", deg)));
    }
    let disc = big_f.discriminant();
    if disc.is_zero() {
        return Err(Error::SingularModel);
    }
    let genus = deg.div_ceil(2) - 1;
    let inferred = infer_kind(&h, &f, &big_f);
    let kind = match kind {
        None => inferred,
        Some(k @ (ModelKind::Weierstrass | ModelKind::PlaneCubic)) => {
            if inferred != ModelKind::Weierstrass {
                return Err(Error::InvalidModel(format!("{:?} model must be a long Weierstrass cubic", k)));
            }
            k
        }
        Some(k) => {
            let parity_ok = match k {
                ModelKind::HyperellipticOdd => deg % 2 == 1,
                _ => deg % 2 == 0,
            };
            if !parity_ok {
                return Err(Error::InvalidModel(format!("{:?} does not match deg F = {}", k, deg)));
            }
            k
        }
    };
    Ok(CurveModel { id, kind, h, f, big_f, genus, disc })
}

/// Legendre symbol for odd prime `p`.
pub fn legendre(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if powmod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> CurveId {
        s.parse().unwrap()
    }

    fn cubic_26_13() -> CurveModel {
        parse_model(&[1, 1], &[-8, -5, 0, 1], id("26.1.13")).unwrap()
    }

    #[test]
    fn ids_round_trip() {
        for s in ["6.11.2-33", "26.1.1", "15.4.3-4-5", "93.1.93"] {
            assert_eq!(id(s).to_string(), s);
        }
        assert!("26.1.3".parse::<CurveId>().is_err());
        assert!("26.1".parse::<CurveId>().is_err());
    }

    #[test]
    fn parse_model_examples() {
        let m = parse_model(&[1, 1, 0, 1], &[-4, -16, 5, 16, -7, 0, -1], id("87.1.3")).unwrap();
        assert_eq!(m.genus, 2);
        let m = parse_model(&[1, 0, 1], &[-4, 5, 1, 1, 1, -7], id("35.1.5")).unwrap();
        assert_eq!(m.genus, 2);
        assert_eq!(m.kind, ModelKind::HyperellipticOdd);
        assert_eq!(m.infinity_points(), vec![RatPoint::Infinity(Branch::Odd)]);
        assert!(matches!(parse_model(&[], &[0, 0, 0, 1], id("26.1.13")), Err(Error::SingularModel)));
        assert_eq!(cubic_26_13().kind, ModelKind::Weierstrass);
    }

    #[test]
    fn evaluate_examples() {
        let m = cubic_26_13();
        assert!(m.evaluate(&"(4,-9)".parse().unwrap()));
        assert!(!m.evaluate(&"(4,5)".parse().unwrap()));
        assert!(m.evaluate(&"inf".parse().unwrap()));
        assert!(!m.evaluate(&"inf+".parse().unwrap()));
        let m = parse_model(&[1, 0, 1], &[-4, 5, 1, 1, 1, -7], id("35.1.5")).unwrap();
        assert!(m.evaluate(&"(3/4,-25/32)".parse().unwrap()));
    }

    #[test]
    fn point_strings() {
        for s in ["(3/4,-25/32)", "inf", "inf+", "inf-", "(0,0)"] {
            assert_eq!(s.parse::<RatPoint>().unwrap().to_string(), s);
        }
        assert!("(1;2)".parse::<RatPoint>().is_err());
    }

    #[test]
    fn projective_points() {
        let m = parse_model(&[1, 1], &[90, 9, 0, 1], id("38.1.19")).unwrap();
        let z = Rat::zero();
        let one = Rat::one();
        let p = m.point_from_projective(&z, &one, &z).unwrap();
        assert_eq!(p, RatPoint::Infinity(Branch::Odd));
        let p = m
            .point_from_projective(&z, &Rat::from_integer(BigInt::from(-20)), &Rat::from_integer(BigInt::from(2)))
            .unwrap();
        assert_eq!(p.to_string(), "(0,-10)");
    }

    #[test]
    fn good_primes_exclude_bad() {
        let m = cubic_26_13();
        let g = m.good_primes(20);
        assert!(!g.contains(&2) && !g.contains(&13));
        assert!(g.contains(&3) && g.contains(&5));
        assert!(m.good_primes(2).is_empty());
        assert!(m.count_points_mod_p(13).is_err());
    }
}
