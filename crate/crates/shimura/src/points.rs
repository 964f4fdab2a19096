//! Height-bounded point search, Stoll bounds, genus-1 torsion certificates and
//! completeness verdicts.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{isqrt_exact, prime_divisors, valuation, Rat};
use crate::catalog::{CatalogRecord, ExpectedN};
use crate::curve::{Branch, CurveModel, ModelKind, RatPoint};
use crate::error::{Error, Result};
use crate::local::{everywhere_locally_solvable, LocalReport};

pub const DEFAULT_HEIGHT: i64 = 100;
pub const QUADRATIC_CHABAUTY_NOTE: &str = "out-of-scope certification (quadratic Chabauty)";
pub const NO_MODEL_NOTE: &str = "model not transcribed";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub points: Vec<RatPoint>,
    pub height_bound: i64,
}

/// All points with `x = a/b`, `gcd(a, b) = 1`, `|a|, b <= height`, plus points at infinity.
pub fn search(model: &CurveModel, height: i64) -> SearchResult {
    assert!(height >= 1, "search height must be positive");
    let deg = model.form_degree();
    let gp1 = model.genus + 1;
    let two = Rat::from_integer(BigInt::from(2));
    let found: Vec<RatPoint> = (-height..=height)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut local = Vec::new();
            let ba = BigInt::from(a);
            for b in 1..=height {
                if a.gcd(&b) != 1 {
                    continue;
                }
                let bb = BigInt::from(b);
                let v = model.big_f.hom_eval(&ba, &bb, deg);
                let Some(s) = isqrt_exact(&v) else { continue };
                let x = Rat::new(ba.clone(), bb.clone());
                let bpow = num_traits::pow(bb.clone(), gp1);
                let hx = model.h_at(&x);
                let mut roots = vec![Rat::new(s.clone(), bpow.clone())];
                if !s.is_zero() {
                    roots.push(Rat::new(-s.clone(), bpow.clone()));
                }
                for yy in roots {
                    let y = (yy - &hx) / &two;
                    local.push(RatPoint::affine(x.clone(), y));
                }
            }
            local
        })
        .collect();
    let mut set: BTreeSet<RatPoint> = found.into_iter().collect();
    set.extend(model.infinity_points());
    debug_assert!(set.iter().all(|p| model.evaluate(p)));
    SearchResult { points: set.into_iter().collect(), height_bound: height }
}

/// The hyperelliptic involution `(x, y) -> (x, -y - h(x))`.
pub fn involution(model: &CurveModel, p: &RatPoint) -> RatPoint {
    match p {
        RatPoint::Affine { x, y } => RatPoint::affine(x.clone(), -y - model.h_at(x)),
        RatPoint::Infinity(Branch::Plus) => RatPoint::Infinity(Branch::Minus),
        RatPoint::Infinity(Branch::Minus) => RatPoint::Infinity(Branch::Plus),
        RatPoint::Infinity(Branch::Odd) => RatPoint::Infinity(Branch::Odd),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCertificate {
    pub p: u64,
    pub r: u64,
    pub fp_count: u64,
    pub bound: u64,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// `#X(Q) <= #X(F_p) + 2r`, valid when `r < g`, `p > 2r + 2` and `p` is good.
pub fn stoll_bound(model: &CurveModel, r: u64, p: u64) -> Result<BoundCertificate> {
    if model.genus < 2 {
        return Err(Error::Unsupported(format!("Stoll bound needs genus >= 2, got {}", model.genus)));
    }
    let mut cert = BoundCertificate { p, r, fp_count: 0, bound: 0, applicable: false, reason: None };
    if p == 2 || !model.is_good_prime(p) {
        cert.reason = Some(format!("bad reduction at {}", p));
        return Ok(cert);
    }
    let count = model.count_points_mod_p(p)?.count;
    cert.fp_count = count;
    cert.bound = count + 2 * r;
    if r >= model.genus as u64 {
        cert.reason = Some(format!("rank {} is not below genus {}", r, model.genus));
    } else if p <= 2 * r + 2 {
        cert.reason = Some(format!("p = {} is not above 2r + 2 = {}", p, 2 * r + 2));
    } else {
        cert.applicable = true;
    }
    Ok(cert)
}

/// The applicable certificate with the smallest bound over good `p <= p_limit`.
pub fn best_stoll_bound(model: &CurveModel, r: u64, p_limit: u64) -> Result<BoundCertificate> {
    let mut best: Option<BoundCertificate> = None;
    for p in model.good_primes(p_limit) {
        let c = stoll_bound(model, r, p)?;
        if c.applicable && best.as_ref().is_none_or(|b| c.bound < b.bound) {
            best = Some(c);
        }
    }
    if model.genus < 2 {
        return Err(Error::Unsupported("Stoll bound needs genus >= 2".into()));
    }
    Ok(best.unwrap_or(BoundCertificate {
        p: 0,
        r,
        fp_count: 0,
        bound: 0,
        applicable: false,
        reason: Some(format!("no applicable prime up to {}", p_limit)),
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionCertificate {
    pub primes: Vec<u64>,
    pub gcd_bound: u64,
    pub torsion_order: u64,
    pub torsion_points: Vec<RatPoint>,
    pub points_found: u64,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Long Weierstrass coefficients `[a1, a2, a3, a4, a6]` of a cubic model.
fn a_invariants(model: &CurveModel) -> Result<[BigInt; 5]> {
    if !matches!(model.kind, ModelKind::Weierstrass | ModelKind::PlaneCubic) {
        return Err(Error::Unsupported("torsion needs a Weierstrass cubic".into()));
    }
    Ok([
        model.h.coeff(1),
        model.f.coeff(2),
        model.h.coeff(0),
        model.f.coeff(1),
        model.f.coeff(0),
    ])
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum EPoint {
    Zero,
    Pt(Rat, Rat),
}

fn ec_add(a: &Rat, p: &EPoint, q: &EPoint) -> EPoint {
    match (p, q) {
        (EPoint::Zero, _) => q.clone(),
        (_, EPoint::Zero) => p.clone(),
        (EPoint::Pt(x1, y1), EPoint::Pt(x2, y2)) => {
            let lambda = if x1 == x2 {
                if (y1 + y2).is_zero() {
                    return EPoint::Zero;
                }
                (Rat::from_integer(BigInt::from(3)) * x1 * x1 + a) / (Rat::from_integer(BigInt::from(2)) * y1)
            } else {
                (y2 - y1) / (x2 - x1)
            };
            let x3 = &lambda * &lambda - x1 - x2;
            let y3 = lambda * (x1 - &x3) - y1;
            EPoint::Pt(x3, y3)
        }
    }
}

fn integral_roots_of_cubic(a: &BigInt, c0: &BigInt) -> Vec<BigInt> {
    // monic X^3 + a X + c0
    let g = |x: &BigInt| x * x * x + a * x + c0;
    let m = BigInt::one() + a.abs().max(c0.abs());
    let mut segments: Vec<(BigInt, BigInt, bool)> = Vec::new();
    if !a.is_negative() {
        segments.push((-m.clone(), m.clone(), true));
    } else {
        let cr = (-a / BigInt::from(3)).sqrt();
        segments.push((-m.clone(), -&cr - 1, true));
        segments.push((-cr.clone(), cr.clone(), false));
        segments.push((&cr + 1, m.clone(), true));
    }
    let mut out = Vec::new();
    for (mut lo, mut hi, inc) in segments {
        while lo <= hi {
            let mid = (&lo + &hi).div_floor(&BigInt::from(2));
            let v = g(&mid);
            if v.is_zero() {
                out.push(mid);
                break;
            }
            if v.is_negative() == inc {
                lo = mid + 1;
            } else {
                hi = mid - 1;
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Rational torsion points by Nagell-Lutz on the integral short model.
pub fn rational_torsion(model: &CurveModel) -> Result<Vec<RatPoint>> {
    let [a1, a2, a3, a4, a6] = a_invariants(model)?;
    let b2 = &a1 * &a1 + BigInt::from(4) * &a2;
    let b4 = BigInt::from(2) * &a4 + &a1 * &a3;
    let b6 = &a3 * &a3 + BigInt::from(4) * &a6;
    let c4 = &b2 * &b2 - BigInt::from(24) * &b4;
    let c6 = -(&b2 * &b2 * &b2) + BigInt::from(36) * &b2 * &b4 - BigInt::from(216) * &b6;
    let big_a = BigInt::from(-27) * &c4;
    let big_b = BigInt::from(-54) * &c6;
    let disc = BigInt::from(4) * &big_a * &big_a * &big_a + BigInt::from(27) * &big_b * &big_b;
    if disc.is_zero() {
        return Err(Error::SingularModel);
    }
    let mut ys: Vec<BigInt> = vec![BigInt::one()];
    for p in prime_divisors(&disc)? {
        let pu = p.to_u64().ok_or_else(|| Error::OutOfRange(p.to_string()))?;
        let e = valuation(&disc, pu) / 2;
        let mut next = Vec::new();
        for y in &ys {
            let mut q = y.clone();
            for _ in 0..=e {
                next.push(q.clone());
                q *= &p;
            }
        }
        ys = next;
    }
    ys.push(BigInt::zero());
    let ar = Rat::from_integer(big_a.clone());
    let mut candidates: Vec<EPoint> = Vec::new();
    for y in ys {
        let c0 = &big_b - &y * &y;
        for x in integral_roots_of_cubic(&big_a, &c0) {
            let (xr, yr) = (Rat::from_integer(x), Rat::from_integer(y.clone()));
            candidates.push(EPoint::Pt(xr.clone(), yr.clone()));
            if !y.is_zero() {
                candidates.push(EPoint::Pt(xr, -yr));
            }
        }
    }
    let mut torsion = vec![EPoint::Zero];
    'cand: for p in candidates {
        let mut q = p.clone();
        for _ in 1..12 {
            q = ec_add(&ar, &q, &p);
            match &q {
                EPoint::Zero => {
                    torsion.push(p);
                    continue 'cand;
                }
                EPoint::Pt(x, y) => {
                    if !x.is_integer() || !y.is_integer() {
                        continue 'cand;
                    }
                }
            }
        }
    }
    let r36 = Rat::from_integer(BigInt::from(36));
    let r108 = Rat::from_integer(BigInt::from(108));
    let three_b2 = Rat::from_integer(BigInt::from(3) * &b2);
    let two = Rat::from_integer(BigInt::from(2));
    let mut out: Vec<RatPoint> = torsion
        .into_iter()
        .map(|p| match p {
            EPoint::Zero => RatPoint::Infinity(Branch::Odd),
            EPoint::Pt(xx, yy) => {
                let x = (xx - &three_b2) / &r36;
                let y = (yy / &r108 - model.h_at(&x)) / &two;
                RatPoint::affine(x, y)
            }
        })
        .collect();
    out.sort();
    debug_assert!(out.iter().all(|p| model.evaluate(p)));
    Ok(out)
}

/// Certifies a rank-0 genus-1 point set: it must equal the rational torsion,
/// whose order divides `gcd #E(F_p)` over the supplied good primes.
pub fn torsion_certify(
    model: &CurveModel,
    rank: Option<u64>,
    primes: &[u64],
    found: &[RatPoint],
) -> Result<TorsionCertificate> {
    let good: Vec<u64> = primes.iter().copied().filter(|&p| p > 2 && model.is_good_prime(p)).collect();
    let mut g = 0u64;
    for &p in &good {
        g = g.gcd(&model.count_points_mod_p(p)?.count);
    }
    let torsion = rational_torsion(model)?;
    let order = torsion.len() as u64;
    let mut warning = None;
    if good.len() < 2 {
        warning = Some(format!("only {} good primes supplied", good.len()));
    }
    let found_set: BTreeSet<&RatPoint> = found.iter().collect();
    let tors_set: BTreeSet<&RatPoint> = torsion.iter().collect();
    let certified = warning.is_none()
        && rank == Some(0)
        && g.is_multiple_of(order)
        && found_set == tors_set;
    Ok(TorsionCertificate {
        primes: good,
        gcd_bound: g,
        torsion_order: order,
        torsion_points: torsion,
        points_found: found.len() as u64,
        certified,
        warning,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    EmptyLocal,
    CompleteCertified,
    CompleteMatchesCatalog,
    SearchOnly,
    Infinite,
    Untranscribed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Certificate {
    Stoll(BoundCertificate),
    Torsion(TorsionCertificate),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub points: Vec<RatPoint>,
    pub height: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local: Option<LocalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    pub matches_expected: Option<bool>,
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub height: i64,
    pub stoll_p_limit: u64,
    pub torsion_prime_limit: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { height: DEFAULT_HEIGHT, stoll_p_limit: 100, torsion_prime_limit: 60 }
    }
}

fn compare_expected(record: &CatalogRecord, points: &[RatPoint]) -> Option<bool> {
    if !record.expected.is_empty() {
        let a: BTreeSet<&RatPoint> = record.expected.iter().collect();
        let b: BTreeSet<&RatPoint> = points.iter().collect();
        return Some(a == b);
    }
    match record.data.expected_n {
        ExpectedN::Finite(n) => Some(n == points.len() as u64),
        ExpectedN::Infinite => None,
    }
}

/// Local check, search, certification and comparison with the catalog.
pub fn verdict(record: &CatalogRecord, cfg: &SearchConfig) -> Result<Verdict> {
    let mut v = Verdict {
        status: VerdictStatus::SearchOnly,
        points: Vec::new(),
        height: cfg.height,
        local: None,
        certificate: None,
        matches_expected: None,
        notes: Vec::new(),
    };
    let rank = record.data.rank;
    let genus = record.data.genus as u64;
    let beyond_chabauty = genus >= 2 && rank.is_some_and(|r| r >= genus);
    let Some(model) = &record.model else {
        if record.data.expected_n == ExpectedN::Infinite {
            v.status = VerdictStatus::Infinite;
            return Ok(v);
        }
        if beyond_chabauty {
            v.notes.push(QUADRATIC_CHABAUTY_NOTE.into());
            v.status = VerdictStatus::SearchOnly;
        } else {
            v.status = VerdictStatus::Untranscribed;
        }
        v.notes.push(NO_MODEL_NOTE.into());
        return Ok(v);
    };
    let local = everywhere_locally_solvable(model)?;
    let els = local.everywhere_locally_solvable;
    v.local = Some(local);
    if !els {
        v.status = VerdictStatus::EmptyLocal;
        v.matches_expected = compare_expected(record, &[]);
        return Ok(v);
    }
    let found = search(model, cfg.height).points;
    v.matches_expected = compare_expected(record, &found);
    if record.data.expected_n == ExpectedN::Infinite {
        v.points = found;
        v.status = VerdictStatus::Infinite;
        return Ok(v);
    }
    let mut certified = false;
    if model.genus == 1 {
        match rank {
            Some(r) => {
                let primes = model.good_primes(cfg.torsion_prime_limit);
                let cert = torsion_certify(model, Some(r), &primes, &found)?;
                certified = cert.certified;
                v.certificate = Some(Certificate::Torsion(cert));
            }
            None => v.notes.push("rank not supplied; torsion certificate needs rank 0".into()),
        }
    } else if beyond_chabauty {
        v.notes.push(QUADRATIC_CHABAUTY_NOTE.into());
    } else if let Some(r) = rank {
        let cert = best_stoll_bound(model, r, cfg.stoll_p_limit)?;
        certified = cert.applicable && cert.bound == found.len() as u64;
        v.certificate = Some(Certificate::Stoll(cert));
    } else {
        v.notes.push("rank not supplied; no Stoll certificate".into());
    }
    v.status = if certified {
        VerdictStatus::CompleteCertified
    } else if beyond_chabauty {
        VerdictStatus::SearchOnly
    } else if v.matches_expected == Some(true) {
        VerdictStatus::CompleteMatchesCatalog
    } else {
        VerdictStatus::SearchOnly
    };
    v.points = found;
    Ok(v)
}
