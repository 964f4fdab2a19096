//! CM points: existence and counts per order, fixed points of `w_m`, rationality
//! of their images on the quotient, fiber fields and classification of rational points.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{is_rational_square, squarefree_part, squarefree_part_rat, Rat};
use crate::curve::{CurveId, CurveModel, RatPoint};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quad_orders::{principal_form_represents, cm_orders, ImagQuadOrder, RingClassField};

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn is_squarefree(n: u64) -> bool {
    prime_factors(n).iter().product::<u64>() == n
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CmContext {
    pub d: u64,
    pub n: u64,
    pub order: ImagQuadOrder,
    pub d_r: u64,
    pub n_r: u64,
    pub nstar_r: u64,
}

pub fn cm_context(d: u64, n: u64, order: &ImagQuadOrder) -> Result<CmContext> {
    crate::atkin_lehner::validate_level(d, n)?;
    if !is_squarefree(n) {
        return Err(Error::Unsupported(format!("CM analysis needs squarefree N, got {}", n)));
    }
    let d_r = prime_factors(d).into_iter().filter(|&p| order.eichler_symbol(p) == -1).product();
    let n_r = prime_factors(n).into_iter().filter(|&p| order.eichler_symbol(p) == 1).product();
    let nstar_r = prime_factors(n)
        .into_iter()
        .filter(|&p| order.f % p as i64 != 0 && order.eichler_symbol(p) == 1)
        .product();
    Ok(CmContext { d, n, order: order.clone(), d_r, n_r, nstar_r })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CmCount {
    pub nonempty: bool,
    pub count: u64,
}

/// CM points by `R` on `X_0(D,N)`.
///
/// Nonempty exactly when `DN / (D_R N*_R)` divides `Delta_R` and no prime of `D`
/// has Eichler symbol 1.
pub fn cm_count(ctx: &CmContext) -> CmCount {
    let dn = ctx.d * ctx.n;
    let q = dn / (ctx.d_r * ctx.nstar_r);
    let divides = (ctx.order.delta_r.unsigned_abs()).is_multiple_of(q);
    let no_split_d = prime_factors(ctx.d).iter().all(|&p| ctx.order.eichler_symbol(p) != 1);
    if !(divides && no_split_d) {
        return CmCount { nonempty: false, count: 0 };
    }
    let k = prime_factors(ctx.d_r * ctx.n_r).len() as u32;
    CmCount { nonempty: true, count: (1u64 << k) * ctx.order.h as u64 }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedPointSet {
    pub m: u64,
    pub discriminants: Vec<i64>,
}

impl FixedPointSet {
    pub fn contains(&self, r: &ImagQuadOrder) -> bool {
        self.discriminants.contains(&r.delta_r)
    }
}

/// Orders whose CM points are the fixed points of `w_m`.
pub fn fixed_point_orders(m: u64) -> Result<FixedPointSet> {
    if m < 2 {
        return Err(Error::AtkinLehner(format!("fixed points of w_{} are not isolated", m)));
    }
    let m_i = m as i64;
    let discriminants = if m == 2 {
        vec![-4, -8]
    } else if m % 4 == 3 {
        vec![-4 * m_i, -m_i]
    } else {
        vec![-4 * m_i]
    };
    Ok(FixedPointSet { m, discriminants })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageCase {
    AConjugation,
    AOther,
    BCase1,
    BCase2,
    NotRational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "d", rename_all = "snake_case")]
pub enum ImageField {
    Rational,
    Quadratic(i64),
    Larger,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RationalImageCount {
    pub order: ImagQuadOrder,
    pub m: u64,
    pub m_r: u64,
    pub case: ImageCase,
    pub cm_points: u64,
    pub fixed_points: u64,
    pub rational_points_on_quotient: u64,
    pub field_of_image: ImageField,
}

/// Rational images under `X_0(D,N) -> X_0(D,N)/<w_m>` of the CM points by `R`, for `h_R <= 2`.
pub fn rational_image_count(ctx: &CmContext, m: u64) -> Result<RationalImageCount> {
    let r = &ctx.order;
    if r.h > 2 {
        return Err(Error::Unsupported(format!("class number {} > 2", r.h)));
    }
    let dn = ctx.d * ctx.n;
    if m < 2 || !crate::atkin_lehner::is_hall_divisor(m, dn) {
        return Err(Error::AtkinLehner(format!("{} is not a Hall divisor of {}", m, dn)));
    }
    let count = cm_count(ctx);
    let m_r = m.gcd(&(dn / (ctx.d_r * ctx.n_r)));
    let q = m / m_r;
    let k_field = ImageField::Quadratic(crate::arith::squarefree_i64(r.delta_k));
    let mut out = RationalImageCount {
        order: r.clone(),
        m,
        m_r,
        case: ImageCase::NotRational,
        cm_points: count.count,
        fixed_points: 0,
        rational_points_on_quotient: 0,
        field_of_image: ImageField::Undetermined,
    };
    if !count.nonempty {
        return Ok(out);
    }
    if fixed_point_orders(m)?.contains(r) {
        out.fixed_points = count.count;
    }
    let sigma_b_nontrivial = !principal_form_represents(r.delta_r, m_r as i64);
    let star = ctx.d_r * ctx.nstar_r;
    let rational;
    if star != 1 {
        if q == star {
            out.case = ImageCase::AConjugation;
            rational = r.h == 1;
            out.field_of_image = if rational { ImageField::Rational } else { ImageField::Larger };
        } else {
            out.case = ImageCase::AOther;
            rational = false;
            out.field_of_image = match (r.h, q == 1) {
                (1, _) => k_field,
                (_, true) if sigma_b_nontrivial => k_field,
                _ => ImageField::Larger,
            };
        }
    } else if q == 1 {
        out.case = ImageCase::BCase1;
        rational = r.h == 1 || sigma_b_nontrivial;
        out.field_of_image = if rational { ImageField::Rational } else { ImageField::Undetermined };
    } else {
        out.case = ImageCase::BCase2;
        rational = r.h == 1;
        out.field_of_image = if rational { ImageField::Rational } else { ImageField::Undetermined };
    }
    if rational {
        out.rational_points_on_quotient = (count.count - out.fixed_points) / 2 + out.fixed_points;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

/// Degree-2 map from a source `y^2 = P(x^2)` to a target model, given by
/// `u = x^2`, `v = y` (even) or `v = x y` (odd), followed by
/// `x_T = (a u + b)/(c u + d)` and `2 y_T + h_T(x_T) = e v / (c u + d)^(g_T + 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientMap {
    pub source: CurveId,
    pub parity: Parity,
    pub mobius: [BigInt; 4],
    pub scale: Rat,
    pub p_poly: Poly,
    pub g_poly: Poly,
}

impl QuotientMap {
    /// Builds the map and checks `e^2 G(u) = F_T(a u + b, c u + d)` identically.
    pub fn new(source: &CurveModel, target: &CurveModel, parity: Parity, mobius: [i64; 4], scale: Rat) -> Result<Self> {
        let bad = |m: &str| Error::MapInconsistent(format!("{} -> {}: {}", source.id, target.id, m));
        if !source.h.is_zero() || source.f.coeffs().iter().skip(1).step_by(2).any(|c| !c.is_zero()) {
            return Err(bad("source is not of the form y^2 = P(x^2)"));
        }
        if scale.is_zero() || mobius[0] * mobius[3] == mobius[1] * mobius[2] {
            return Err(bad("degenerate transformation"));
        }
        let p_poly = Poly::new(source.f.coeffs().iter().step_by(2).cloned().collect());
        let g_poly = match parity {
            Parity::Even => p_poly.clone(),
            Parity::Odd => p_poly.mul(&Poly::from_i64(&[0, 1])),
        };
        let [a, b, c, d] = mobius.map(BigInt::from);
        let num = Poly::new(vec![b.clone(), a.clone()]);
        let den = Poly::new(vec![d.clone(), c.clone()]);
        let deg = target.form_degree();
        let mut rhs = Poly::zero();
        for i in 0..=deg {
            let ci = target.big_f.coeff(i);
            if ci.is_zero() {
                continue;
            }
            let mut term = Poly::new(vec![ci]);
            for _ in 0..i {
                term = term.mul(&num);
            }
            for _ in i..deg {
                term = term.mul(&den);
            }
            rhs = rhs.add(&term);
        }
        let (en, ed) = (scale.numer().clone(), scale.denom().clone());
        if g_poly.scale(&(&en * &en)) != rhs.scale(&(&ed * &ed)) {
            return Err(bad("e^2 G(u) differs from the target form"));
        }
        Ok(QuotientMap { source: source.id.clone(), parity, mobius: [a, b, c, d], scale, p_poly, g_poly })
    }

    /// The `u`-coordinate over a target point, `None` for `u = infinity`.
    fn u_of(&self, q: &RatPoint) -> Result<Option<Rat>> {
        let [a, b, c, d] = self.mobius.clone().map(Rat::from_integer);
        match q {
            RatPoint::Affine { x, .. } => {
                let den = &a - &c * x;
                let num = &d * x - &b;
                if den.is_zero() {
                    if num.is_zero() {
                        return Err(Error::MapInconsistent("indeterminate fiber".into()));
                    }
                    Ok(None)
                } else {
                    Ok(Some(num / den))
                }
            }
            RatPoint::Infinity(_) => {
                if c.is_zero() {
                    Ok(None)
                } else {
                    Ok(Some(-d / c))
                }
            }
        }
    }

    /// Squarefree `d` with the fiber over `q` defined over `Q(sqrt d)`; `d = 1` for a rational fiber.
    pub fn fiber_field(&self, target: &CurveModel, q: &RatPoint) -> Result<i64> {
        if !target.evaluate(q) {
            return Err(Error::MapInconsistent(format!("{} is not on {}", q, target.id)));
        }
        let u0 = self.u_of(q)?;
        if let (Some(u), RatPoint::Affine { x, y }) = (&u0, q) {
            let c = Rat::from_integer(self.mobius[2].clone());
            let d = Rat::from_integer(self.mobius[3].clone());
            let w = num_traits::pow(&c * u + d, target.genus + 1);
            let v0 = target.completed_y(x, y) * w / &self.scale;
            if &v0 * &v0 != self.g_poly.eval_rat(u) {
                return Err(Error::MapInconsistent(format!("fiber over {} is not a degree-2 fiber", q)));
            }
        }
        let d = match u0 {
            None => squarefree_part(&self.p_poly.lc())?,
            Some(u) if u.is_zero() => match self.parity {
                Parity::Even => BigInt::one(),
                Parity::Odd => {
                    let p0 = self.p_poly.coeff(0);
                    if p0.is_zero() {
                        return Err(Error::MapInconsistent("singular fiber".into()));
                    }
                    squarefree_part(&p0)?
                }
            },
            Some(u) => {
                if is_rational_square(&u).is_some() {
                    BigInt::one()
                } else {
                    squarefree_part_rat(&u)?
                }
            }
        };
        d.to_i64().ok_or_else(|| Error::OutOfRange(d.to_string()))
    }

    /// Fiber field for a target point in weighted projective coordinates.
    pub fn fiber_field_projective(&self, target: &CurveModel, xx: &Rat, yy: &Rat, zz: &Rat) -> Result<i64> {
        let q = target.point_from_projective(xx, yy, zz)?;
        self.fiber_field(target, &q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Cm,
    NonCm,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassificationMode {
    Fiber,
    CountsOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointClassification {
    pub point: RatPoint,
    pub status: PointStatus,
    pub fiber_field_d: Option<i64>,
    pub candidate_orders: Vec<ImagQuadOrder>,
    pub candidate_delta_k: Vec<i64>,
    pub ambiguity: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderSummary {
    pub context: CmContext,
    pub count: CmCount,
    pub image: RationalImageCount,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CmReport {
    pub d: u64,
    pub n: u64,
    pub m: u64,
    pub mode: ClassificationMode,
    pub total_cm_points: u64,
    pub rational_cm_total: u64,
    pub field_multiset: BTreeMap<i64, u64>,
    pub orders: Vec<OrderSummary>,
    pub points: Vec<PointClassification>,
}

/// Sum of `cm_count` over the bundled orders.
pub fn total_cm_points(d: u64, n: u64) -> Result<u64> {
    let mut t = 0;
    for r in cm_orders() {
        t += cm_count(&cm_context(d, n, r)?).count;
    }
    Ok(t)
}

/// Classifies rational points of `X_0(D,N)/<w_m>` against the bundled orders,
/// by fiber fields when a map is given and by counts otherwise.
pub fn classify_points(
    d: u64,
    n: u64,
    m: u64,
    points: &[RatPoint],
    map: Option<(&QuotientMap, &CurveModel)>,
) -> Result<CmReport> {
    let mut orders = Vec::new();
    for r in cm_orders() {
        let context = cm_context(d, n, r)?;
        let count = cm_count(&context);
        let image = rational_image_count(&context, m)?;
        orders.push(OrderSummary { context, count, image });
    }
    let positive: Vec<&OrderSummary> = orders.iter().filter(|o| o.image.rational_points_on_quotient > 0).collect();
    let mut field_multiset = BTreeMap::new();
    for o in &positive {
        *field_multiset.entry(o.context.order.delta_k).or_insert(0) += o.image.rational_points_on_quotient;
    }
    let rational_cm_total: u64 = field_multiset.values().sum();
    let total_cm_points = orders.iter().map(|o| o.count.count).sum();

    let classified = match map {
        Some((qm, target)) => classify_by_fibers(points, &positive, qm, target)?,
        None => classify_by_counts(points, &positive, rational_cm_total),
    };
    Ok(CmReport {
        d,
        n,
        m,
        mode: if map.is_some() { ClassificationMode::Fiber } else { ClassificationMode::CountsOnly },
        total_cm_points,
        rational_cm_total,
        field_multiset,
        orders,
        points: classified,
    })
}

fn delta_ks(orders: &[ImagQuadOrder]) -> Vec<i64> {
    let s: BTreeSet<i64> = orders.iter().map(|o| o.delta_k).collect();
    s.into_iter().collect()
}

fn classify_by_counts(points: &[RatPoint], positive: &[&OrderSummary], total: u64) -> Vec<PointClassification> {
    let resolved = total == points.len() as u64 && total > 0;
    let cands: Vec<ImagQuadOrder> = if resolved {
        positive.iter().map(|o| o.context.order.clone()).collect()
    } else {
        Vec::new()
    };
    let dks = delta_ks(&cands);
    points
        .iter()
        .map(|p| PointClassification {
            point: p.clone(),
            status: if resolved {
                PointStatus::Cm
            } else if total == 0 {
                PointStatus::NonCm
            } else {
                PointStatus::Inconclusive
            },
            fiber_field_d: None,
            candidate_orders: cands.clone(),
            candidate_delta_k: dks.clone(),
            ambiguity: dks.len() > 1,
        })
        .collect()
}

fn classify_by_fibers(
    points: &[RatPoint],
    positive: &[&OrderSummary],
    qm: &QuotientMap,
    target: &CurveModel,
) -> Result<Vec<PointClassification>> {
    let fibers: Vec<i64> = points.iter().map(|p| qm.fiber_field(target, p)).collect::<Result<_>>()?;
    let fields: Vec<RingClassField> =
        positive.iter().map(|o| o.context.order.ring_class_field()).collect::<Result<_>>()?;
    let mut distinct: Vec<&RingClassField> = Vec::new();
    for f in &fields {
        if !distinct.contains(&f) {
            distinct.push(f);
        }
    }
    let mut is_cm = vec![false; points.len()];
    let mut touched = vec![false; points.len()];
    for h in distinct {
        let a: Vec<usize> = (0..points.len()).filter(|&i| h.contains(fibers[i])).collect();
        let b: u64 = positive
            .iter()
            .zip(&fields)
            .filter(|(_, hs)| hs.is_subfield_of(h))
            .map(|(o, _)| o.image.rational_points_on_quotient)
            .sum();
        for &i in &a {
            touched[i] = true;
        }
        if b > 0 && a.len() as u64 == b {
            for &i in &a {
                is_cm[i] = true;
            }
        }
    }
    Ok(points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let cands: Vec<ImagQuadOrder> = if is_cm[i] {
                positive
                    .iter()
                    .zip(&fields)
                    .filter(|(_, hs)| hs.contains(fibers[i]))
                    .map(|(o, _)| o.context.order.clone())
                    .collect()
            } else {
                Vec::new()
            };
            let dks = delta_ks(&cands);
            PointClassification {
                point: p.clone(),
                status: if is_cm[i] {
                    PointStatus::Cm
                } else if touched[i] {
                    PointStatus::Inconclusive
                } else {
                    PointStatus::NonCm
                },
                fiber_field_d: Some(fibers[i]),
                candidate_orders: cands,
                candidate_delta_k: dks.clone(),
                ambiguity: dks.len() > 1,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::parse_model;

    fn order(dk: i64, f: i64) -> ImagQuadOrder {
        ImagQuadOrder::new(dk, f).unwrap()
    }

    #[test]
    fn context_d38() {
        let c = cm_context(38, 1, &order(-4, 1)).unwrap();
        assert_eq!((c.d_r, c.n_r, c.nstar_r), (19, 1, 1));
        let cnt = cm_count(&c);
        assert_eq!((cnt.nonempty, cnt.count), (true, 2));
        assert!(cm_context(15, 4, &order(-4, 1)).is_err());
    }

    #[test]
    fn fixed_points() {
        assert_eq!(fixed_point_orders(2).unwrap().discriminants, vec![-4, -8]);
        assert_eq!(fixed_point_orders(19).unwrap().discriminants, vec![-76, -19]);
        assert_eq!(fixed_point_orders(10).unwrap().discriminants, vec![-40]);
    }

    #[test]
    fn total_d38() {
        assert_eq!(total_cm_points(38, 1).unwrap(), 108);
    }

    #[test]
    fn image_examples() {
        let c = cm_context(38, 1, &order(-4, 1)).unwrap();
        let r = rational_image_count(&c, 19).unwrap();
        assert_eq!((r.case, r.m_r, r.rational_points_on_quotient), (ImageCase::AConjugation, 1, 1));
        let c = cm_context(93, 1, &order(-163, 1)).unwrap();
        let r = rational_image_count(&c, 93).unwrap();
        assert_eq!(r.rational_points_on_quotient, 2);
        let c = cm_context(38, 1, &order(-4, 1)).unwrap();
        let r = rational_image_count(&c, 2).unwrap();
        assert_eq!(r.case, ImageCase::AOther);
        assert_eq!(r.rational_points_on_quotient, 0);
    }

    #[test]
    fn multiset_d93() {
        let rep = classify_points(93, 1, 93, &[], None).unwrap();
        let want: BTreeMap<i64, u64> = [(-163, 2), (-4, 4), (-19, 2), (-67, 2), (-7, 4)].into_iter().collect();
        assert_eq!(rep.field_multiset, want);
    }

    #[test]
    fn fiber_fields_d38() {
        let src = parse_model(&[], &[-19, 0, -82, 0, -59, 0, -16], "38.1.1".parse().unwrap()).unwrap();
        let tgt = parse_model(&[1, 1], &[90, 9, 0, 1], "38.1.19".parse().unwrap()).unwrap();
        let qm = QuotientMap::new(&src, &tgt, Parity::Even, [-4, -5, 0, 1], Rat::from_integer(4.into())).unwrap();
        let p: RatPoint = "(0,-10)".parse().unwrap();
        assert_eq!(qm.fiber_field(&tgt, &p).unwrap(), -5);
        assert_eq!(qm.fiber_field(&tgt, &"inf".parse().unwrap()).unwrap(), -1);
        assert!(QuotientMap::new(&src, &tgt, Parity::Even, [-4, -5, 0, 1], Rat::from_integer(3.into())).is_err());
    }
}
