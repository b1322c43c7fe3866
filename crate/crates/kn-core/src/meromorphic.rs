//! Meromorphic functions on the two curve backends, stored in factored form.
//!
//! A genus-zero function is an exact product `c * prod (z - a_i)^{e_i}`
//! over Gaussian-rational points, with the order at infinity implied by
//! degree balance. A genus-one function is a product of Weierstrass sigma
//! factors `c * prod sigma(z - a_i)^{e_i}` whose zero and pole sums agree
//! exactly (the Abel condition is enforced by shifting one representative
//! by a lattice vector). Linear combinations keep a term list; products
//! concatenate factor lists, so expansions and evaluations stay cheap.

use crate::curve::{CurveModel, CurvePoint, Lattice, RatPoint, CONGRUENCE_TOL};
use crate::elliptic::EllipticCtx;
use crate::error::{KnError, Result};
use crate::field::{Coeff, Field, GaussQ, C64};
use crate::series::LaurentSeries;
use std::sync::Arc;

// ---------------------------------------------------------------------------
// Genus zero
// ---------------------------------------------------------------------------

/// `constant * prod (z - a)^{e}` over finite Gaussian-rational points.
#[derive(Clone, Debug)]
pub struct RationalAtom {
    pub constant: GaussQ,
    /// Factor list `(a, e)`, `e` signed.
    pub factors: Vec<(GaussQ, i64)>,
}

impl RationalAtom {
    pub fn constant(c: GaussQ) -> Self {
        RationalAtom {
            constant: c,
            factors: Vec::new(),
        }
    }

    /// Net order at infinity is the negated total finite degree.
    pub fn order_at_infinity(&self) -> i64 {
        -self.factors.iter().map(|&(_, e)| e).sum::<i64>()
    }

    pub fn order_at(&self, p: &RatPoint) -> i64 {
        match p {
            RatPoint::Infinity => self.order_at_infinity(),
            RatPoint::Finite(a) => self
                .factors
                .iter()
                .filter(|(b, _)| b == a)
                .map(|&(_, e)| e)
                .sum(),
        }
    }

    pub fn eval(&self, z: &GaussQ) -> Result<GaussQ> {
        let mut acc = self.constant.clone();
        for (a, e) in &self.factors {
            let base = z.clone() - a.clone();
            if Coeff::is_zero(&base) {
                if *e < 0 {
                    return Err(KnError::SampleOnDivisor);
                }
                return Ok(GaussQ::zero());
            }
            let p = if *e >= 0 { base } else { base.inv() };
            for _ in 0..e.abs() {
                acc = acc * p.clone();
            }
        }
        Ok(acc)
    }

    /// Expansion in the local parameter at `p`: `z - p` at a finite point,
    /// `1/z` at infinity. `order` is the number of terms past the lead.
    pub fn expansion_at(&self, p: &RatPoint, order: i64) -> LaurentSeries<GaussQ> {
        let lead = self.order_at(p);
        let prec = lead + order;
        let mut acc = LaurentSeries::monomial(0, self.constant.clone(), prec - lead + 1);
        match p {
            RatPoint::Finite(p0) => {
                for (a, e) in &self.factors {
                    let base = if a == p0 {
                        // (z - a) = h
                        LaurentSeries::monomial(1, GaussQ::one(), prec - lead + 2)
                    } else {
                        // (z - a) = (p - a) + h
                        LaurentSeries::new(
                            0,
                            {
                                let mut v = vec![GaussQ::zero(); (prec - lead + 2) as usize];
                                v[0] = p0.clone() - a.clone();
                                v[1] = GaussQ::one();
                                v
                            },
                        )
                    };
                    let f = base.powi(*e, 0.0).expect("exact factor power");
                    acc = acc.mul(&f);
                }
            }
            RatPoint::Infinity => {
                // z = 1/w: (z - a) = w^{-1} (1 - a w)
                for (a, e) in &self.factors {
                    let mut v = vec![GaussQ::zero(); (prec - lead + 2) as usize];
                    v[0] = GaussQ::one();
                    v[1] = -a.clone();
                    let base = LaurentSeries::new(-1, v);
                    let f = base.powi(*e, 0.0).expect("exact factor power");
                    acc = acc.mul(&f);
                }
            }
        }
        acc.truncate(prec).normalize()
    }
}

// ---------------------------------------------------------------------------
// Genus one
// ---------------------------------------------------------------------------

/// `constant * prod sigma(z - a)^{e}` with exactly balanced factor sums.
#[derive(Clone)]
pub struct SigmaAtom {
    pub ctx: Arc<EllipticCtx>,
    pub constant: C64,
    pub factors: Vec<(C64, i64)>,
}

impl std::fmt::Debug for SigmaAtom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SigmaAtom")
            .field("constant", &self.constant)
            .field("factors", &self.factors)
            .finish()
    }
}

impl SigmaAtom {
    /// Net order at `p`, counting factor points congruent to `p`.
    pub fn order_at(&self, p: C64) -> i64 {
        self.factors
            .iter()
            .filter(|(a, _)| self.ctx.lattice.congruent(*a, p, CONGRUENCE_TOL))
            .map(|&(_, e)| e)
            .sum()
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        let mut acc = self.constant;
        for (a, e) in &self.factors {
            let s = self.ctx.sigma(z - a);
            if *e < 0 && s.norm() < 1e-13 {
                return Err(KnError::SampleOnDivisor);
            }
            acc *= s.powi(*e as i32);
        }
        Ok(acc)
    }

    /// Laurent expansion in `h = z - p` with `order` terms past the lead.
    pub fn expansion_at(&self, p: C64, order: i64) -> Result<LaurentSeries<C64>> {
        let lead = self.order_at(p);
        let prec = lead + order;
        // Working precision for the unit parts of each factor.
        let unit_terms = order + 2;
        let mut acc = LaurentSeries::monomial(0, self.constant, unit_terms);
        for (a, e) in &self.factors {
            let f = self.ctx.sigma_factor_series(p, *a, unit_terms + 1);
            let f = f.normalize();
            let fe = f.powi(*e, 1e-300)?;
            acc = acc.mul(&fe);
        }
        Ok(acc.truncate(prec).normalize())
    }
}

// ---------------------------------------------------------------------------
// The public function type
// ---------------------------------------------------------------------------

/// A meromorphic function on the curve: a linear combination of factored
/// atoms, tagged by backend.
#[derive(Clone, Debug)]
pub enum MeromorphicFunction {
    Rational(Vec<(GaussQ, RationalAtom)>),
    Elliptic(Vec<(C64, SigmaAtom)>),
}

/// A cached local expansion at a marked or divisor point.
#[derive(Clone, Debug)]
pub enum Expansion {
    Exact(LaurentSeries<GaussQ>),
    Numeric(LaurentSeries<C64>),
}

impl Expansion {
    pub fn exact(self) -> LaurentSeries<GaussQ> {
        match self {
            Expansion::Exact(s) => s,
            Expansion::Numeric(_) => panic!("expected an exact expansion"),
        }
    }

    pub fn numeric(self) -> LaurentSeries<C64> {
        match self {
            Expansion::Exact(s) => {
                // Exact data embeds into the numeric regime.
                let lead = s.lead();
                let coeffs: Vec<C64> = (lead..s.prec())
                    .map(|k| s.coeff(k).unwrap().to_c64())
                    .collect();
                LaurentSeries::with_prec(lead, coeffs, s.prec())
            }
            Expansion::Numeric(s) => s,
        }
    }
}

impl MeromorphicFunction {
    pub fn rational_one() -> Self {
        MeromorphicFunction::Rational(vec![(GaussQ::one(), RationalAtom::constant(GaussQ::one()))])
    }

    /// `z^k` on the rational curve.
    pub fn monomial(k: i64) -> Self {
        let atom = RationalAtom {
            constant: GaussQ::one(),
            factors: if k == 0 {
                vec![]
            } else {
                vec![(GaussQ::zero(), k)]
            },
        };
        MeromorphicFunction::Rational(vec![(GaussQ::one(), atom)])
    }

    pub fn zero_like(&self) -> Self {
        match self {
            MeromorphicFunction::Rational(_) => MeromorphicFunction::Rational(vec![]),
            MeromorphicFunction::Elliptic(_) => MeromorphicFunction::Elliptic(vec![]),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (MeromorphicFunction::Rational(a), MeromorphicFunction::Rational(b)) => {
                let mut t = a.clone();
                t.extend(b.iter().cloned());
                MeromorphicFunction::Rational(t)
            }
            (MeromorphicFunction::Elliptic(a), MeromorphicFunction::Elliptic(b)) => {
                let mut t = a.clone();
                t.extend(b.iter().cloned());
                MeromorphicFunction::Elliptic(t)
            }
            _ => panic!("cannot mix curve backends"),
        }
    }

    pub fn scale_exact(&self, c: &GaussQ) -> Self {
        match self {
            MeromorphicFunction::Rational(a) => MeromorphicFunction::Rational(
                a.iter()
                    .map(|(k, at)| (k.clone() * c.clone(), at.clone()))
                    .collect(),
            ),
            MeromorphicFunction::Elliptic(a) => {
                let cc = c.to_c64();
                MeromorphicFunction::Elliptic(
                    a.iter().map(|(k, at)| (*k * cc, at.clone())).collect(),
                )
            }
        }
    }

    pub fn scale_numeric(&self, c: C64) -> Self {
        match self {
            MeromorphicFunction::Elliptic(a) => {
                MeromorphicFunction::Elliptic(a.iter().map(|(k, at)| (*k * c, at.clone())).collect())
            }
            MeromorphicFunction::Rational(_) => panic!("numeric scaling of exact data"),
        }
    }

    /// Product; factor lists concatenate term by term.
    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (MeromorphicFunction::Rational(a), MeromorphicFunction::Rational(b)) => {
                let mut t = Vec::with_capacity(a.len() * b.len());
                for (ca, fa) in a {
                    for (cb, fb) in b {
                        let mut factors = fa.factors.clone();
                        factors.extend(fb.factors.iter().cloned());
                        t.push((
                            ca.clone() * cb.clone(),
                            RationalAtom {
                                constant: fa.constant.clone() * fb.constant.clone(),
                                factors,
                            },
                        ));
                    }
                }
                MeromorphicFunction::Rational(t)
            }
            (MeromorphicFunction::Elliptic(a), MeromorphicFunction::Elliptic(b)) => {
                let mut t = Vec::with_capacity(a.len() * b.len());
                for (ca, fa) in a {
                    for (cb, fb) in b {
                        let mut factors = fa.factors.clone();
                        factors.extend(fb.factors.iter().cloned());
                        t.push((
                            *ca * *cb,
                            SigmaAtom {
                                ctx: fa.ctx.clone(),
                                constant: fa.constant * fb.constant,
                                factors,
                            },
                        ));
                    }
                }
                MeromorphicFunction::Elliptic(t)
            }
            _ => panic!("cannot mix curve backends"),
        }
    }

    pub fn eval_exact(&self, z: &GaussQ) -> Result<GaussQ> {
        match self {
            MeromorphicFunction::Rational(terms) => {
                let mut acc = GaussQ::zero();
                for (c, atom) in terms {
                    acc = acc + c.clone() * atom.eval(z)?;
                }
                Ok(acc)
            }
            _ => Err(KnError::ShapeMismatch("exact evaluation of numeric data".into())),
        }
    }

    pub fn eval_c64(&self, z: C64) -> Result<C64> {
        match self {
            MeromorphicFunction::Rational(terms) => {
                let mut acc = C64::new(0.0, 0.0);
                for (c, atom) in terms {
                    let mut v = atom.constant.to_c64();
                    for (a, e) in &atom.factors {
                        let base = z - a.to_c64();
                        if base.norm() < 1e-13 {
                            return Err(KnError::SampleOnDivisor);
                        }
                        v *= base.powi(*e as i32);
                    }
                    acc += c.to_c64() * v;
                }
                Ok(acc)
            }
            MeromorphicFunction::Elliptic(terms) => {
                let mut acc = C64::new(0.0, 0.0);
                for (c, atom) in terms {
                    acc += *c * atom.eval(z)?;
                }
                Ok(acc)
            }
        }
    }

    /// Local expansion at a marked or divisor point, `order` coefficients
    /// starting from the leading stored order.
    pub fn expansion_at(&self, curve: &CurveModel, point: &CurvePoint, order: i64) -> Result<Expansion> {
        if order > curve.expansion_order() {
            return Err(KnError::ExpansionOrderExceeded {
                requested: order,
                available: curve.expansion_order(),
            });
        }
        match (self, point) {
            (MeromorphicFunction::Rational(terms), CurvePoint::Rational(p)) => {
                let mut acc: Option<LaurentSeries<GaussQ>> = None;
                for (c, atom) in terms {
                    let s = atom.expansion_at(p, order).scale(c);
                    acc = Some(match acc {
                        None => s,
                        Some(t) => t.add(&s),
                    });
                }
                Ok(Expansion::Exact(acc.unwrap_or_else(|| LaurentSeries::zero(order))))
            }
            (MeromorphicFunction::Elliptic(terms), CurvePoint::Torus(p)) => {
                let mut acc: Option<LaurentSeries<C64>> = None;
                for (c, atom) in terms {
                    let s = atom.expansion_at(*p, order)?.scale(c);
                    acc = Some(match acc {
                        None => s,
                        Some(t) => t.add(&s),
                    });
                }
                Ok(Expansion::Numeric(acc.unwrap_or_else(|| LaurentSeries::zero(order))))
            }
            _ => Err(KnError::ShapeMismatch("point backend does not match function".into())),
        }
    }

    /// Residue (coefficient of the -1 power of the local parameter) at a
    /// finite point.
    pub fn residue_at(&self, curve: &CurveModel, point: &CurvePoint) -> Result<Expansion> {
        self.expansion_at(curve, point, curve.expansion_order().min(4))
    }
}

// ---------------------------------------------------------------------------
// Divisor constructors
// ---------------------------------------------------------------------------

/// Exact rational function with prescribed zeros and poles (positive
/// multiplicities; infinity allowed). Degree balance is required.
pub fn function_from_divisor_genus0(
    zeros: &[(RatPoint, i64)],
    poles: &[(RatPoint, i64)],
    normalization: GaussQ,
) -> Result<MeromorphicFunction> {
    for &(_, m) in zeros.iter().chain(poles) {
        if m <= 0 {
            return Err(KnError::Config("divisor multiplicities must be positive".into()));
        }
    }
    let deg_z: i64 = zeros.iter().map(|&(_, m)| m).sum();
    let deg_p: i64 = poles.iter().map(|&(_, m)| m).sum();
    if deg_z != deg_p {
        return Err(KnError::DegreeMismatch {
            zeros: deg_z,
            poles: deg_p,
        });
    }
    let mut factors: Vec<(GaussQ, i64)> = Vec::new();
    let mut inf_order: i64 = 0;
    for (p, m) in zeros {
        match p {
            RatPoint::Finite(a) => factors.push((a.clone(), *m)),
            RatPoint::Infinity => inf_order += m,
        }
    }
    for (p, m) in poles {
        match p {
            RatPoint::Finite(a) => factors.push((a.clone(), -m)),
            RatPoint::Infinity => inf_order -= m,
        }
    }
    let atom = RationalAtom {
        constant: normalization,
        factors,
    };
    // The implied order at infinity must agree with the explicit entries.
    if atom.order_at_infinity() != inf_order {
        return Err(KnError::DegreeMismatch {
            zeros: deg_z,
            poles: deg_p,
        });
    }
    Ok(MeromorphicFunction::Rational(vec![(GaussQ::one(), atom)]))
}

/// Sigma-product function on a torus with prescribed zeros and poles.
/// Requires degree balance and the Abel condition modulo the lattice; the
/// first zero representative is shifted by the lattice defect so the factor
/// sums agree exactly and the product is genuinely doubly periodic.
pub fn function_from_divisor_genus1(
    ctx: &Arc<EllipticCtx>,
    zeros: &[(C64, i64)],
    poles: &[(C64, i64)],
    normalization: C64,
) -> Result<MeromorphicFunction> {
    for &(_, m) in zeros.iter().chain(poles) {
        if m <= 0 {
            return Err(KnError::Config("divisor multiplicities must be positive".into()));
        }
    }
    let deg_z: i64 = zeros.iter().map(|&(_, m)| m).sum();
    let deg_p: i64 = poles.iter().map(|&(_, m)| m).sum();
    if deg_z != deg_p {
        return Err(KnError::DegreeMismatch {
            zeros: deg_z,
            poles: deg_p,
        });
    }
    let sum = |pts: &[(C64, i64)]| -> C64 {
        pts.iter()
            .map(|&(p, m)| p * (m as f64))
            .fold(C64::new(0.0, 0.0), |a, b| a + b)
    };
    let defect = sum(zeros) - sum(poles);
    let lattice = &ctx.lattice;
    let dist = lattice.lattice_distance(defect);
    if dist > CONGRUENCE_TOL.max(1e-8) {
        return Err(KnError::AbelConditionViolated { distance: dist });
    }
    let (rem, m1, m2) = lattice.reduce(defect);
    let lam = defect - rem; // exact lattice part; `rem` is numerical noise
    let _ = (m1, m2);

    // Expand into unit-multiplicity factors and shift the first zero by -lam.
    let mut zfac: Vec<C64> = Vec::new();
    for &(p, m) in zeros {
        for _ in 0..m {
            zfac.push(p);
        }
    }
    if let Some(first) = zfac.first_mut() {
        *first -= lam;
    }
    let mut factors: Vec<(C64, i64)> = zfac.into_iter().map(|p| (p, 1)).collect();
    for &(p, m) in poles {
        factors.push((p, -m));
    }
    let atom = SigmaAtom {
        ctx: ctx.clone(),
        constant: normalization,
        factors,
    };
    let f = MeromorphicFunction::Elliptic(vec![(C64::new(1.0, 0.0), atom)]);
    verify_double_periodicity(ctx, &f, 1e-8)?;
    Ok(f)
}

/// Samples `f(z + w) - f(z)` for both periods at generic points.
pub fn verify_double_periodicity(
    ctx: &Arc<EllipticCtx>,
    f: &MeromorphicFunction,
    tol: f64,
) -> Result<()> {
    let lattice: &Lattice = &ctx.lattice;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for k in 0..40 {
        if checked >= 20 {
            break;
        }
        let t = 0.618_033_988_749_894_8 * (k as f64 + 1.0);
        let s = 0.381_966_011_250_105_2 * (k as f64 + 1.0) + 0.155;
        let z = lattice.omega1 * (t - t.floor()) + lattice.omega2 * (s - s.floor());
        let fz = match f.eval_c64(z) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let scale = fz.norm().max(1.0);
        for w in [lattice.omega1, lattice.omega2] {
            match f.eval_c64(z + w) {
                Ok(fw) => worst = worst.max((fw - fz).norm() / scale),
                Err(_) => continue,
            }
        }
        checked += 1;
    }
    if worst > tol {
        return Err(KnError::CheckFailure(format!(
            "double periodicity violated: deviation {worst:.3e}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::make_rational_curve;

    fn q(v: i64) -> GaussQ {
        GaussQ::from_int(v)
    }

    fn square_ctx() -> Arc<EllipticCtx> {
        Arc::new(EllipticCtx::new(
            Lattice::new(C64::new(1.0, 0.0), C64::new(0.0, 1.0)).unwrap(),
        ))
    }

    #[test]
    fn z_minus_one_from_divisor() {
        let f = function_from_divisor_genus0(
            &[(RatPoint::Finite(q(1)), 1)],
            &[(RatPoint::Infinity, 1)],
            GaussQ::one(),
        )
        .unwrap();
        assert_eq!(f.eval_exact(&q(3)).unwrap(), q(2));
        assert_eq!(f.eval_exact(&q(0)).unwrap(), q(-1));
    }

    #[test]
    fn degree_mismatch_rejected() {
        let e = function_from_divisor_genus0(&[(RatPoint::Finite(q(1)), 1)], &[], GaussQ::one());
        assert!(matches!(e, Err(KnError::DegreeMismatch { .. })));
    }

    #[test]
    fn monomial_expansions() {
        let curve = make_rational_curve();
        let f = MeromorphicFunction::monomial(2);
        let at0 = f
            .expansion_at(&curve, &CurvePoint::Rational(RatPoint::zero()), 3)
            .unwrap()
            .exact();
        assert_eq!(at0.order(0.0), Some(2));
        assert_eq!(at0.coeff(2).unwrap(), q(1));
        assert_eq!(at0.coeff(3).unwrap(), q(0));
        let atinf = f
            .expansion_at(&curve, &CurvePoint::Rational(RatPoint::Infinity), 3)
            .unwrap()
            .exact();
        assert_eq!(atinf.order(0.0), Some(-2));
        assert_eq!(atinf.coeff(-2).unwrap(), q(1));
        assert_eq!(atinf.coeff(-1).unwrap(), q(0));
    }

    #[test]
    fn abel_violation_rejected() {
        let ctx = square_ctx();
        // One simple zero and one simple pole at non-congruent points.
        let e = function_from_divisor_genus1(
            &ctx,
            &[(C64::new(0.3, 0.3), 1)],
            &[(C64::new(0.1, 0.6), 1)],
            C64::new(1.0, 0.0),
        );
        assert!(matches!(e, Err(KnError::AbelConditionViolated { .. })));
    }

    #[test]
    fn elliptic_function_from_balanced_divisor() {
        let ctx = square_ctx();
        // zeros a, a' and a double pole at b with a + a' = 2b: Abel holds.
        let b = C64::new(0.31, 0.24);
        let a = C64::new(0.11, 0.05);
        let a2 = b * 2.0 - a;
        let f = function_from_divisor_genus1(
            &ctx,
            &[(a, 1), (a2, 1)],
            &[(b, 2)],
            C64::new(1.0, 0.0),
        )
        .unwrap();
        // Double periodicity at extra points beyond the constructor check.
        let z = C64::new(0.05, 0.55);
        let fz = f.eval_c64(z).unwrap();
        let f1 = f.eval_c64(z + ctx.lattice.omega1).unwrap();
        assert!((fz - f1).norm() < 1e-9 * fz.norm().max(1.0));
        // Zeros really vanish.
        assert!(f.eval_c64(a).unwrap().norm() < 1e-9);
    }

    #[test]
    fn abel_shift_across_lattice() {
        let ctx = square_ctx();
        // zeros sum - pole sum = omega1, a genuine lattice defect.
        let b = C64::new(0.31, 0.24);
        let a = C64::new(0.11, 0.05);
        let a2 = b * 2.0 - a + ctx.lattice.omega1;
        let f = function_from_divisor_genus1(
            &ctx,
            &[(a, 1), (a2, 1)],
            &[(b, 2)],
            C64::new(1.0, 0.0),
        )
        .unwrap();
        let z = C64::new(0.45, 0.15);
        let fz = f.eval_c64(z).unwrap();
        let f2 = f.eval_c64(z + ctx.lattice.omega2).unwrap();
        assert!((fz - f2).norm() < 1e-9 * fz.norm().max(1.0));
    }

    #[test]
    fn expansion_matches_direct_evaluation_genus1() {
        let ctx = square_ctx();
        let b = C64::new(0.31, 0.24);
        let a = C64::new(0.11, 0.05);
        let a2 = b * 2.0 - a;
        let f = function_from_divisor_genus1(
            &ctx,
            &[(a, 1), (a2, 1)],
            &[(b, 2)],
            C64::new(2.0, 1.0),
        )
        .unwrap();
        let curve = crate::curve::make_elliptic_curve(
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.17, 0.23),
            C64::new(0.61, 0.54),
        )
        .unwrap();
        // Expand around the double pole and re-evaluate nearby.
        let exp = f
            .expansion_at(&curve, &CurvePoint::Torus(b), 12)
            .unwrap()
            .numeric();
        assert_eq!(exp.order(1e-9), Some(-2));
        for h in [C64::new(0.02, 0.01), C64::new(-0.015, 0.02)] {
            let direct = f.eval_c64(b + h).unwrap();
            let via = exp.eval(h);
            assert!(
                (direct - via).norm() < 1e-8 * direct.norm().max(1.0),
                "{direct} vs {via}"
            );
        }
        // And around a regular point.
        let p = C64::new(0.51, 0.02);
        let exp2 = f
            .expansion_at(&curve, &CurvePoint::Torus(p), 10)
            .unwrap()
            .numeric();
        for h in [C64::new(0.01, -0.02)] {
            let direct = f.eval_c64(p + h).unwrap();
            let via = exp2.eval(h);
            assert!((direct - via).norm() < 1e-9 * direct.norm().max(1.0));
        }
    }

    #[test]
    fn leading_coefficient_matches_independent_series_route() {
        // The leading coefficient of the expansion at a zero equals the
        // product of sigma values of the other factors: an independent
        // evaluation route.
        let ctx = square_ctx();
        let b = C64::new(0.31, 0.24);
        let a = C64::new(0.11, 0.05);
        let a2 = b * 2.0 - a;
        let f = function_from_divisor_genus1(
            &ctx,
            &[(a, 1), (a2, 1)],
            &[(b, 2)],
            C64::new(1.0, 0.0),
        )
        .unwrap();
        let curve = crate::curve::make_elliptic_curve(
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            a,
            C64::new(0.61, 0.54),
        )
        .unwrap();
        let exp = f
            .expansion_at(&curve, &CurvePoint::Torus(a), 6)
            .unwrap()
            .numeric();
        let lead = exp.coeff(1).unwrap();
        // sigma'(0) = 1, so the lead is sigma(a - a2) / sigma(a - b)^2.
        let expect = ctx.sigma(a - a2) / (ctx.sigma(a - b) * ctx.sigma(a - b));
        assert!(
            (lead - expect).norm() < 1e-8 * expect.norm(),
            "{lead} vs {expect}"
        );
    }
}
