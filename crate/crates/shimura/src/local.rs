//! Solvability over `R` and over each `Q_p` of `(2y + h)^2 = F(x)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{primes_up_to, valuation};
use crate::curve::{legendre, CurveModel};
use crate::error::Result;
use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeCheck {
    pub p: u64,
    pub solvable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalReport {
    pub real_solvable: bool,
    pub bad_primes_checked: Vec<PrimeCheck>,
    pub small_good_primes_checked: Vec<PrimeCheck>,
    /// Good primes above this bound have points by Hasse-Weil and Hensel.
    pub good_prime_bound: u64,
    pub everywhere_locally_solvable: bool,
}

/// `F(x) >= 0` somewhere on `R`, or a real point at infinity.
pub fn real_solvable(model: &CurveModel) -> bool {
    let f = &model.big_f;
    let deg = f.degree().unwrap_or(0);
    deg % 2 == 1 || f.lc().is_positive() || f.real_root_count() > 0
}

/// Whether the smooth projective curve has a `Q_p`-point.
pub fn qp_solvable(model: &CurveModel, p: u64) -> bool {
    let f = &model.big_f;
    let extra = if p == 2 { 4 } else { 2 };
    let depth = valuation(&model.disc, p) + extra;
    let rev = f.reversed(model.form_degree());
    square_in_disk(f, p, depth) || square_in_disk(&rev, p, depth)
}

/// Is `G(t)` a square in `Q_p` (possibly zero) for some `t` in `Z_p`.
pub fn square_in_disk(g: &Poly, p: u64, depth: u32) -> bool {
    if g.is_zero() {
        return true;
    }
    let bp = BigInt::from(p);
    let c = g.content();
    let v = valuation(&c, p);
    let unit_content = &c / num_traits::pow(bp.clone(), v as usize);
    let g1 = g.div_exact(&(&c / &unit_content));
    // g = p^v * g1 with g1 primitive at p; squares only see v mod 2
    let odd = v % 2 == 1;
    search_disk(&g1, odd, p, depth)
}

fn eval_mod(g: &Poly, t: u64, m: u64) -> u64 {
    let bm = BigInt::from(m);
    g.eval(&BigInt::from(t)).mod_floor(&bm).to_u64().unwrap()
}

fn search_disk(g1: &Poly, odd: bool, p: u64, depth: u32) -> bool {
    let bp = BigInt::from(p);
    let dg = g1.derivative();
    for t0 in 0..p {
        let bt0 = BigInt::from(t0);
        let val = g1.eval(&bt0);
        if val.is_zero() {
            return true;
        }
        let r = val.mod_floor(&bp).to_u64().unwrap();
        if r != 0 {
            if odd {
                continue;
            }
            if p == 2 {
                // unit values are squares iff they are 1 mod 8
                if (0..4).any(|s| eval_mod(g1, t0 + 2 * s, 8) == 1) {
                    return true;
                }
            } else if legendre(r, p) == 1 {
                return true;
            }
            continue;
        }
        let simple = !dg.eval(&bt0).mod_floor(&bp).is_zero();
        if simple {
            return true;
        }
        if depth == 0 {
            continue;
        }
        let sub = g1.shift_scale(&bt0, &bp);
        let sub = if odd { sub.scale(&bp) } else { sub };
        if square_in_disk(&sub, p, depth - 1) {
            return true;
        }
    }
    false
}

pub fn everywhere_locally_solvable(model: &CurveModel) -> Result<LocalReport> {
    let real = real_solvable(model);
    let bad = model.bad_primes()?;
    let bound = (4 * model.genus * model.genus) as u64;
    let bad_checked: Vec<PrimeCheck> =
        bad.iter().map(|&p| PrimeCheck { p, solvable: qp_solvable(model, p) }).collect();
    let good_checked: Vec<PrimeCheck> = primes_up_to(bound)
        .into_iter()
        .filter(|p| !bad.contains(p))
        .map(|p| PrimeCheck { p, solvable: qp_solvable(model, p) })
        .collect();
    let all = real
        && bad_checked.iter().all(|c| c.solvable)
        && good_checked.iter().all(|c| c.solvable);
    Ok(LocalReport {
        real_solvable: real,
        bad_primes_checked: bad_checked,
        small_good_primes_checked: good_checked,
        good_prime_bound: bound,
        everywhere_locally_solvable: all,
    })
}
