//! The Atkin-Lehner group `W(D,N)`: Hall divisors of `DN` under
//! `w_m w_n = w_{mn/gcd(m,n)^2}`.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::Serialize;

use crate::arith::factor_i64;
use crate::error::{Error, Result};

fn distinct_primes(n: u64) -> Result<Vec<(u64, u32)>> {
    let f = factor_i64(n as i64)?;
    Ok(f.factors
        .iter()
        .map(|(p, e)| (u64::try_from(p).unwrap(), *e))
        .collect())
}

/// Checks that `D` is a product of an even number of distinct primes and
/// `gcd(D, N) = 1`.
pub fn validate_level(d: u64, n: u64) -> Result<()> {
    if d < 2 || n < 1 {
        return Err(Error::AtkinLehner(format!("D = {}, N = {}", d, n)));
    }
    let fd = distinct_primes(d)?;
    if fd.iter().any(|&(_, e)| e > 1) || fd.len() % 2 == 1 {
        return Err(Error::AtkinLehner(format!(
            "D = {} is not a product of an even number of distinct primes",
            d
        )));
    }
    if d.gcd(&n) != 1 {
        return Err(Error::AtkinLehner(format!("gcd({}, {}) != 1", d, n)));
    }
    Ok(())
}

pub fn is_hall_divisor(m: u64, n: u64) -> bool {
    m > 0 && n.is_multiple_of(m) && m.gcd(&(n / m)) == 1
}

pub fn hall_divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in distinct_primes(n).unwrap_or_default() {
        let q = p.pow(e);
        let more: Vec<u64> = out.iter().map(|m| m * q).collect();
        out.extend(more);
    }
    out.sort_unstable();
    out
}

pub fn compose_index(a: u64, b: u64) -> u64 {
    let g = a.gcd(&b);
    a / g * (b / g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AlElement {
    pub d: u64,
    pub n: u64,
    pub m: u64,
}

impl AlElement {
    pub fn new(d: u64, n: u64, m: u64) -> Result<Self> {
        if !is_hall_divisor(m, d * n) {
            return Err(Error::AtkinLehner(format!("{} is not a Hall divisor of {}", m, d * n)));
        }
        Ok(AlElement { d, n, m })
    }

    pub fn compose(&self, other: &AlElement) -> Result<AlElement> {
        if (self.d, self.n) != (other.d, other.n) {
            return Err(Error::AtkinLehner(format!(
                "ambient mismatch ({}, {}) vs ({}, {})",
                self.d, self.n, other.d, other.n
            )));
        }
        Ok(AlElement { m: compose_index(self.m, other.m), ..*self })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlSubgroup {
    pub d: u64,
    pub n: u64,
    pub elements: Vec<u64>,
    pub generators: Vec<u64>,
}

impl AlSubgroup {
    /// Catalog key `D.N.m1-m2`, or `D.N.1` for the trivial group.
    pub fn key(&self) -> String {
        key_for(self.d, self.n, &self.generators)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, m: u64) -> bool {
        self.elements.binary_search(&m).is_ok()
    }
}

pub fn key_for(d: u64, n: u64, gens: &[u64]) -> String {
    if gens.is_empty() {
        format!("{}.{}.1", d, n)
    } else {
        let g: Vec<String> = gens.iter().map(|m| m.to_string()).collect();
        format!("{}.{}.{}", d, n, g.join("-"))
    }
}

pub fn span(gens: &[u64]) -> Vec<u64> {
    let mut set: BTreeSet<u64> = BTreeSet::from([1]);
    for &g in gens {
        let more: Vec<u64> = set.iter().map(|&m| compose_index(m, g)).collect();
        set.extend(more);
    }
    set.into_iter().collect()
}

/// Repeatedly take the smallest element not yet in the span.
pub fn canonical_generators(elements: &[u64]) -> Vec<u64> {
    let mut sorted = elements.to_vec();
    sorted.sort_unstable();
    let mut gens = Vec::new();
    let mut cur = span(&gens);
    for &m in &sorted {
        if !cur.contains(&m) {
            gens.push(m);
            cur = span(&gens);
        }
    }
    gens
}

pub fn subgroup(d: u64, n: u64, gens: &[u64]) -> Result<AlSubgroup> {
    validate_level(d, n)?;
    for &m in gens {
        if !is_hall_divisor(m, d * n) {
            return Err(Error::AtkinLehner(format!("{} is not a Hall divisor of {}", m, d * n)));
        }
    }
    let elements = span(gens);
    let generators = canonical_generators(&elements);
    Ok(AlSubgroup { d, n, elements, generators })
}

pub fn full_group(d: u64, n: u64) -> Result<AlSubgroup> {
    validate_level(d, n)?;
    let elements = hall_divisors(d * n);
    let generators = canonical_generators(&elements);
    Ok(AlSubgroup { d, n, elements, generators })
}

/// Every subgroup of `W(D,N)`, ordered by size and then generator list.
pub fn subgroups(d: u64, n: u64) -> Result<Vec<AlSubgroup>> {
    let full = full_group(d, n)?;
    let mut found: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut frontier = vec![vec![1u64]];
    found.insert(vec![1]);
    while let Some(g) = frontier.pop() {
        for &m in &full.elements {
            if g.contains(&m) {
                continue;
            }
            let mut gens = canonical_generators(&g);
            gens.push(m);
            let s = span(&gens);
            if found.insert(s.clone()) {
                frontier.push(s);
            }
        }
    }
    let mut out: Vec<AlSubgroup> = found
        .into_iter()
        .map(|elements| AlSubgroup {
            d,
            n,
            generators: canonical_generators(&elements),
            elements,
        })
        .collect();
    out.sort_by(|a, b| (a.order(), &a.generators).cmp(&(b.order(), &b.generators)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_examples() {
        let a = AlElement::new(26, 1, 2).unwrap();
        let b = AlElement::new(26, 1, 13).unwrap();
        assert_eq!(a.compose(&b).unwrap().m, 26);
        assert_eq!(a.compose(&a).unwrap().m, 1);
        let x = AlElement::new(6, 11, 6).unwrap();
        let y = AlElement::new(6, 11, 22).unwrap();
        assert_eq!(x.compose(&y).unwrap().m, 33);
        let z = AlElement::new(10, 11, 2).unwrap();
        assert!(x.compose(&z).is_err());
        assert!(AlElement::new(15, 4, 2).is_err());
    }

    #[test]
    fn full_group_examples() {
        assert_eq!(full_group(6, 11).unwrap().elements, vec![1, 2, 3, 6, 11, 22, 33, 66]);
        assert_eq!(full_group(15, 4).unwrap().elements, vec![1, 3, 4, 5, 12, 15, 20, 60]);
        assert_eq!(full_group(26, 1).unwrap().elements, vec![1, 2, 13, 26]);
        assert!(full_group(30, 1).is_err());
        assert!(full_group(6, 3).is_err());
        assert!(full_group(12, 1).is_err());
    }

    #[test]
    fn subgroup_examples() {
        let s = subgroups(26, 1).unwrap();
        let keys: Vec<String> = s.iter().map(|g| g.key()).collect();
        assert_eq!(keys, vec!["26.1.1", "26.1.2", "26.1.13", "26.1.26", "26.1.2-13"]);
        assert_eq!(subgroups(6, 11).unwrap().len(), 16);
        assert_eq!(subgroups(6, 11).unwrap()[0].elements, vec![1]);
    }

    #[test]
    fn canonical_generators_smallest_first() {
        assert_eq!(canonical_generators(&[1, 6, 11, 66]), vec![6, 11]);
        assert_eq!(canonical_generators(&[1, 2, 33, 66]), vec![2, 33]);
    }
}
