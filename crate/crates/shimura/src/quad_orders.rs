//! Imaginary quadratic orders, class numbers by reduced forms, Eichler symbols
//! and quadratic-subfield descriptors of ring class fields with `h <= 2`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{kronecker_i64, squarefree_i64};
use crate::error::{Error, Result};

const ORDERS_JSON: &str = include_str!("../../../catalog/cm_orders.json");

pub fn is_discriminant(d: i64) -> bool {
    d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1
}

pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => squarefree_i64(d) == d,
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && squarefree_i64(m) == m
        }
        _ => false,
    }
}

/// Writes a negative discriminant as `f^2 * delta_K` with `delta_K` fundamental.
pub fn split_discriminant(delta: i64) -> Result<(i64, i64)> {
    if delta >= 0 || !is_discriminant(delta) {
        return Err(Error::InvalidDiscriminant(delta));
    }
    let d = squarefree_i64(delta);
    let dk = if d.rem_euclid(4) == 1 { d } else { 4 * d };
    let f2 = delta / dk;
    let f = (f2 as f64).sqrt().round() as i64;
    if f * f != f2 || delta % dk != 0 {
        return Err(Error::InvalidDiscriminant(delta));
    }
    Ok((dk, f))
}

/// Number of reduced primitive positive definite forms of discriminant `delta`.
pub fn class_number(delta: i64) -> Result<u32> {
    Ok(reduced_forms(delta)?.len() as u32)
}

/// Reduced primitive forms `(a, b, c)`: `|b| <= a <= c`, `b >= 0` if `|b| = a` or `a = c`.
pub fn reduced_forms(delta: i64) -> Result<Vec<(i64, i64, i64)>> {
    if delta >= 0 || !is_discriminant(delta) {
        return Err(Error::InvalidDiscriminant(delta));
    }
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -delta {
        for b in (-a + 1)..=a {
            let num = b * b - delta;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (b < 0 && a == c) {
                continue;
            }
            if a.gcd(&b).gcd(&c) == 1 {
                out.push((a, b, c));
            }
        }
        a += 1;
    }
    Ok(out)
}

/// Whether `m` is a value of the principal form of discriminant `delta`.
pub fn principal_form_represents(delta: i64, m: i64) -> bool {
    let (b, c) = if delta.rem_euclid(4) == 0 { (0, -delta / 4) } else { (1, (1 - delta) / 4) };
    // 4m = (2x + b y)^2 + |delta| y^2
    let ymax = ((4 * m) as f64 / (-delta) as f64).sqrt() as i64 + 1;
    for y in -ymax..=ymax {
        let xmax = (m as f64).sqrt() as i64 + y.abs() + 1;
        for x in -xmax..=xmax {
            if x * x + b * x * y + c * y * y == m {
                return true;
            }
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RingClassField {
    pub degree_over_q: u32,
    pub quadratic_subfields: Vec<i64>,
}

impl RingClassField {
    pub fn contains(&self, d: i64) -> bool {
        d == 1 || self.quadratic_subfields.binary_search(&d).is_ok()
    }

    /// Containment for the biquadratic-or-quadratic fields arising with `h <= 2`.
    pub fn is_subfield_of(&self, other: &RingClassField) -> bool {
        self.degree_over_q <= other.degree_over_q
            && self.quadratic_subfields.iter().all(|d| other.contains(*d))
    }
}

pub fn field_contained(d: i64, h: &RingClassField) -> bool {
    h.contains(d)
}

fn sqfree_product(a: i64, b: i64) -> i64 {
    let g = a.gcd(&b);
    (a / g) * (b / g)
}

/// Prime discriminant generators of the genus field of `delta`, as squarefree radicands.
pub fn genus_generators(delta: i64) -> Vec<i64> {
    let mut gens = Vec::new();
    let mut m = -delta;
    while m % 2 == 0 {
        m /= 2;
    }
    let mut p = 3;
    let mut rest = m;
    while p * p <= rest {
        if rest % p == 0 {
            gens.push(if p % 4 == 1 { p } else { -p });
            while rest % p == 0 {
                rest /= p;
            }
        }
        p += 2;
    }
    if rest > 1 {
        gens.push(if rest % 4 == 1 { rest } else { -rest });
    }
    if delta.rem_euclid(4) == 0 {
        let n = -delta / 4;
        match n.rem_euclid(8) {
            3 | 7 => {}
            1 | 5 => gens.push(-1),
            2 => gens.push(-2),
            6 => gens.push(2),
            4 => gens.push(-1),
            _ => {
                gens.push(-1);
                gens.push(2);
            }
        }
    }
    gens
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ImagQuadOrder {
    pub delta_k: i64,
    pub f: i64,
    pub delta_r: i64,
    pub h: u32,
}

impl ImagQuadOrder {
    pub fn new(delta_k: i64, f: i64) -> Result<Self> {
        if delta_k >= 0 || !is_fundamental(delta_k) || f < 1 {
            return Err(Error::InvalidDiscriminant(delta_k));
        }
        let delta_r = f * f * delta_k;
        Ok(ImagQuadOrder { delta_k, f, delta_r, h: class_number(delta_r)? })
    }

    pub fn from_discriminant(delta: i64) -> Result<Self> {
        let (dk, f) = split_discriminant(delta)?;
        ImagQuadOrder::new(dk, f)
    }

    /// `(K/p)` if `p` does not divide the conductor, else 1.
    pub fn eichler_symbol(&self, p: u64) -> i8 {
        if self.f % p as i64 == 0 {
            1
        } else {
            kronecker_i64(self.delta_k, p as i64)
        }
    }

    pub fn ring_class_field(&self) -> Result<RingClassField> {
        if self.h > 2 {
            return Err(Error::Unsupported(format!(
                "ring class field of discriminant {} with h = {}",
                self.delta_r, self.h
            )));
        }
        let mut set: BTreeSet<i64> = BTreeSet::from([1]);
        for g in genus_generators(self.delta_r) {
            let more: Vec<i64> = set.iter().map(|&s| sqfree_product(s, g)).collect();
            set.extend(more);
        }
        set.remove(&1);
        let subs: Vec<i64> = set.into_iter().collect();
        let k = squarefree_i64(self.delta_k);
        if subs.len() as u32 != 2 * self.h - 1 || !subs.contains(&k) {
            return Err(Error::Unsupported(format!(
                "genus theory for {} gives subfields {:?}, inconsistent with h = {}",
                self.delta_r, subs, self.h
            )));
        }
        Ok(RingClassField { degree_over_q: 2 * self.h, quadratic_subfields: subs })
    }
}

impl fmt::Display for ImagQuadOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.f == 1 {
            write!(f, "({})", self.delta_k)
        } else {
            write!(f, "({}, f={})", self.delta_k, self.f)
        }
    }
}

#[derive(Deserialize)]
struct OrderRow {
    #[serde(rename = "delta_K")]
    delta_k: i64,
    f: i64,
    #[serde(rename = "h_R")]
    h_r: u32,
}

/// Parses a list of `{delta_K, f, h_R}` rows, recomputing each class number.
pub fn parse_orders_json(s: &str) -> Result<Vec<ImagQuadOrder>> {
    let rows: Vec<OrderRow> = serde_json::from_str(s)?;
    rows.into_iter()
        .map(|r| {
            let o = ImagQuadOrder::new(r.delta_k, r.f)?;
            if o.h != r.h_r {
                return Err(Error::Parse(format!(
                    "order ({}, {}) lists h = {} but has {} reduced forms",
                    r.delta_k, r.f, r.h_r, o.h
                )));
            }
            Ok(o)
        })
        .collect()
}

/// The 42 CM orders of class number at most 2, validated on first use.
pub fn cm_orders() -> &'static [ImagQuadOrder] {
    static ORDERS: OnceLock<Vec<ImagQuadOrder>> = OnceLock::new();
    ORDERS.get_or_init(|| parse_orders_json(ORDERS_JSON).expect("bundled order table is valid"))
}
