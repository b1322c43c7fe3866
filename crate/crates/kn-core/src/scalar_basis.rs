//! The scalar Krichever-Novikov basis `{A_m}` of the algebra of functions
//! regular away from the two marked points.
//!
//! `A_m` has order exactly `m` at `P+` (leading coefficient 1) and order
//! `-m + eps` at `P-`. On the rational line `A_m = z^m` and the algebra is
//! honestly graded. On a torus the pole at `P-` deepens by one on the strip
//! `-1 <= m <= 0`, where the plain pole budget admits no function; the
//! leftover one-parameter ambiguity there is fixed by demanding that the
//! coefficient just above the lead at `P+` vanishes.

use crate::curve::{CurveModel, CurvePoint, RatPoint};
use crate::elliptic::EllipticCtx;
use crate::error::{KnError, Result};
use crate::field::{Coeff, Field, GaussQ, C64};
use crate::linalg::{solve, Mat};
use crate::meromorphic::{Expansion, MeromorphicFunction};
use crate::riemann_roch::rr_basis_genus1;
use crate::series::{residue_pairing, LaurentSeries};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

/// The bridge between the typed coefficient regimes and the runtime-tagged
/// curve layer: exact scalars pair with genus zero, numeric ones with genus
/// one. Implementations pull expansions out of [`Expansion`] and know how to
/// build basis elements for their regime.
pub trait CurveScalar: Field {
    fn scalar_element(basis: &ScalarBasis<Self>, m: i64) -> Result<ScalarBasisElement<Self>>;
    fn extract(e: Expansion) -> LaurentSeries<Self>;
    fn scale_fn(f: &MeromorphicFunction, c: &Self) -> MeromorphicFunction;
}

impl CurveScalar for GaussQ {
    fn scalar_element(basis: &ScalarBasis<Self>, m: i64) -> Result<ScalarBasisElement<Self>> {
        basis.build_exact(m)
    }
    fn extract(e: Expansion) -> LaurentSeries<Self> {
        e.exact()
    }
    fn scale_fn(f: &MeromorphicFunction, c: &Self) -> MeromorphicFunction {
        f.scale_exact(c)
    }
}

impl CurveScalar for C64 {
    fn scalar_element(basis: &ScalarBasis<Self>, m: i64) -> Result<ScalarBasisElement<Self>> {
        basis.build_numeric(m)
    }
    fn extract(e: Expansion) -> LaurentSeries<Self> {
        e.numeric()
    }
    fn scale_fn(f: &MeromorphicFunction, c: &Self) -> MeromorphicFunction {
        f.scale_numeric(*c)
    }
}

#[derive(Clone, Debug)]
pub struct ScalarBasisElement<K> {
    pub m: i64,
    /// Conventional order shift at `P-`: `-gbar(m)`. The pole bound at `P-`
    /// is `m + gbar(m)`; every element attains it except `A_0`, which the
    /// strip normalization pins to the constant function.
    pub eps_minus: i64,
    /// Observed leading order of the expansion at `P-`.
    pub ord_minus: i64,
    pub function: MeromorphicFunction,
    /// Expansion at `P+` in `z+`; leading order `m`, leading coefficient 1.
    pub exp_plus: LaurentSeries<K>,
    /// Expansion at `P-` in `z-`.
    pub exp_minus: LaurentSeries<K>,
    /// Leading coefficient at `P-`.
    pub alpha_minus: K,
}

/// Curve-bound context with a race-free memo table of basis elements.
pub struct ScalarBasis<K> {
    pub curve: CurveModel,
    cache: Mutex<HashMap<i64, Arc<ScalarBasisElement<K>>>>,
    pub ell: Option<Arc<EllipticCtx>>,
}

impl ScalarBasis<GaussQ> {
    /// Exact genus-zero basis, `A_m = z^m`.
    pub fn new_exact(curve: CurveModel) -> Result<Self> {
        if curve.genus() != 0 {
            return Err(KnError::UnsupportedGenusOperation {
                required: 0,
                got: curve.genus(),
            });
        }
        Ok(ScalarBasis {
            curve,
            cache: Mutex::new(HashMap::new()),
            ell: None,
        })
    }
}

impl ScalarBasis<C64> {
    /// Numeric genus-one basis from sigma products.
    pub fn new_numeric(curve: CurveModel) -> Result<Self> {
        if curve.genus() != 1 {
            return Err(KnError::UnsupportedGenusOperation {
                required: 1,
                got: curve.genus(),
            });
        }
        let ell = Arc::new(EllipticCtx::new(curve.lattice()?.clone()));
        Ok(ScalarBasis {
            curve,
            cache: Mutex::new(HashMap::new()),
            ell: Some(ell),
        })
    }
}

impl<K: CurveScalar> ScalarBasis<K> {
    pub fn element(&self, m: i64) -> Result<Arc<ScalarBasisElement<K>>> {
        if let Some(e) = self.cache.lock().unwrap().get(&m) {
            return Ok(e.clone());
        }
        let built = Arc::new(K::scalar_element(self, m)?);
        // Idempotent insert: a concurrent builder produces the same value.
        let mut guard = self.cache.lock().unwrap();
        let entry = guard.entry(m).or_insert_with(|| built.clone());
        Ok(entry.clone())
    }

    /// Strip width `gbar(m) = -eps_minus(m)`: the pole-order excess of `A_m`
    /// over `m` at `P-`.
    pub fn gbar(&self, m: i64) -> i64 {
        match self.curve.genus() {
            0 => 0,
            _ => {
                if (-1..=0).contains(&m) {
                    2
                } else {
                    1
                }
            }
        }
    }

    fn build_exact(&self, m: i64) -> Result<ScalarBasisElement<K>> {
        let order = self.curve.expansion_order();
        let exp_plus = LaurentSeries::monomial(m, K::one(), m + order);
        let exp_minus = LaurentSeries::monomial(-m, K::one(), -m + order);
        Ok(ScalarBasisElement {
            m,
            eps_minus: 0,
            ord_minus: -m,
            function: MeromorphicFunction::monomial(m),
            exp_plus,
            exp_minus,
            alpha_minus: K::one(),
        })
    }
}

impl ScalarBasis<C64> {
    fn build_numeric(&self, m: i64) -> Result<ScalarBasisElement<C64>> {
        let ell = self.ell.as_ref().expect("numeric basis carries an elliptic context");
        let (p_plus, p_minus) = match &self.curve {
            CurveModel::Elliptic {
                p_plus, p_minus, ..
            } => (*p_plus, *p_minus),
            _ => unreachable!(),
        };
        let gbar = self.gbar(m);
        let eps_minus = -gbar;
        // Ansatz space L(-m P+ + (m + gbar) P-).
        let mut divisor: Vec<(C64, i64)> = Vec::new();
        if m != 0 {
            divisor.push((p_plus, -m));
        }
        divisor.push((p_minus, m + gbar));
        let ansatz = rr_basis_genus1(ell, &divisor)?;
        let d = ansatz.len();
        if d as i64 != gbar {
            return Err(KnError::SpecialConfigurationFailure(format!(
                "ansatz dimension {d} does not match strip width {gbar} for m={m}"
            )));
        }
        // Normalization rows: coeff(z+^m) = 1 and, on the strip, the next
        // coefficient vanishes.
        let probe_order = gbar + 2;
        let plus_exps: Vec<LaurentSeries<C64>> = ansatz
            .iter()
            .map(|f| {
                Ok(f.expansion_at(&self.curve, &CurvePoint::Torus(p_plus), probe_order)?
                    .numeric())
            })
            .collect::<Result<_>>()?;
        let mut rows: Vec<Vec<C64>> = Vec::new();
        let mut rhs: Vec<C64> = Vec::new();
        for r in 0..d as i64 {
            let row: Vec<C64> = plus_exps
                .iter()
                .map(|s| s.coeff(m + r))
                .collect::<Result<_>>()?;
            rows.push(row);
            rhs.push(if r == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            });
        }
        let a = Mat::from_rows(rows);
        let b: Vec<C64> = rhs;
        let tol = self.curve.tolerance();
        let x = solve(&a, &b, tol.max(1e-12)).map_err(|_| {
            KnError::SpecialConfigurationFailure(format!(
                "normalization system singular for m={m}; marked points may be torsion-related"
            ))
        })?;
        // x is over C64; combine the ansatz.
        let mut f = ansatz[0].scale_numeric(x[0]);
        for k in 1..d {
            f = f.add(&ansatz[k].scale_numeric(x[k]));
        }
        let order = self.curve.expansion_order();
        let exp_plus = f
            .expansion_at(&self.curve, &CurvePoint::Torus(p_plus), order)?
            .numeric();
        let exp_minus = f
            .expansion_at(&self.curve, &CurvePoint::Torus(p_minus), order)?
            .numeric();
        // Certify the normalization: leading coefficient 1 at order m.
        let lead_plus = exp_plus.coeff(m)?;
        if (lead_plus - C64::new(1.0, 0.0)).norm() > 1e-7 {
            return Err(KnError::SpecialConfigurationFailure(format!(
                "leading coefficient at P+ is {lead_plus}, expected 1 (m={m})"
            )));
        }
        if exp_plus.leading_order_local(1e-6, 6) != Some(m) {
            return Err(KnError::SpecialConfigurationFailure(format!(
                "order at P+ is {:?}, expected {m}",
                exp_plus.leading_order_local(1e-6, 6)
            )));
        }
        let want_minus = -m + eps_minus;
        let Some(ord_minus) = exp_minus.leading_order_local(1e-6, 6) else {
            return Err(KnError::SpecialConfigurationFailure(format!(
                "element for m={m} vanishes at P-"
            )));
        };
        let alpha_minus = exp_minus.coeff(ord_minus)?;
        // Off the strip the pole bound at P- must be attained exactly; on
        // the strip the normalization may land short of it (A_0 = 1).
        if gbar == 1 && ord_minus != want_minus {
            return Err(KnError::SpecialConfigurationFailure(format!(
                "order at P- is {ord_minus}, expected {want_minus}"
            )));
        }
        if ord_minus < want_minus {
            return Err(KnError::SpecialConfigurationFailure(format!(
                "pole at P- exceeds the budget: order {ord_minus} < {want_minus}"
            )));
        }
        Ok(ScalarBasisElement {
            m,
            eps_minus,
            ord_minus,
            function: f,
            exp_plus,
            exp_minus,
            alpha_minus,
        })
    }
}

impl<K: CurveScalar> ScalarBasis<K> {
    /// Expands `A_m * A_n` in the basis over the window `[lo, hi]` by
    /// sequential coefficient matching at `P+`, then certifies the residual
    /// at both marked points.
    pub fn structure_constants(
        &self,
        m: i64,
        n: i64,
        window: (i64, i64),
    ) -> Result<BTreeMap<i64, K>> {
        let (lo, hi) = window;
        if lo > m + n {
            return Err(KnError::WindowTooSmall(format!(
                "window starts above the product order {}",
                m + n
            )));
        }
        let am = self.element(m)?;
        let an = self.element(n)?;
        let prod_plus = am.exp_plus.mul(&an.exp_plus);
        let prod_minus = am.exp_minus.mul(&an.exp_minus);
        let tol = effective_tol::<K>(self.curve.tolerance());
        // Judge residuals against the coefficient scale inside the window,
        // not the full series, whose tail grows geometrically.
        let check_to = (hi + 4).min(prod_plus.prec() - 1);
        let scale = prod_plus.local_magnitude(lo, check_to).max(1.0);

        let pm_lead = prod_minus.lead();
        let pm_scale = prod_minus.local_magnitude(pm_lead, pm_lead + 6).max(1.0);

        let mut coeffs = BTreeMap::new();
        let mut residual_plus = prod_plus;
        let mut residual_minus = prod_minus;
        for h in lo..=hi {
            let c = residual_plus.coeff(h)?;
            if c.is_negligible(tol * scale) {
                continue;
            }
            let ah = self.element(h)?;
            residual_plus = residual_plus.sub(&ah.exp_plus.clone().scale(&c));
            residual_minus = residual_minus.sub(&ah.exp_minus.clone().scale(&c));
            coeffs.insert(h, c);
        }
        // Residual must vanish through the verifiable range at P+ ...
        for k in lo..=check_to {
            let c = residual_plus.coeff(k)?;
            if !c.is_negligible(tol * scale * 100.0) {
                return Err(KnError::WindowTooSmall(format!(
                    "P+ residual {:.3e} at order {k} for ({m},{n})",
                    c.magnitude()
                )));
            }
        }
        // ... and at P- over the orders the expansion certifies.
        let minus_lo = residual_minus.lead();
        let minus_hi = (residual_minus.prec() - 1).min(-lo + 2);
        let mscale = pm_scale;
        for k in minus_lo..=minus_hi {
            let c = residual_minus.coeff(k)?;
            if !c.is_negligible(tol * mscale * 100.0) {
                return Err(KnError::WindowTooSmall(format!(
                    "P- residual {:.3e} at order {k} for ({m},{n})",
                    c.magnitude()
                )));
            }
        }
        Ok(coeffs)
    }

    /// Default window for a product: `[m+n, m+n+gbar(m)+gbar(n)]`.
    pub fn default_window(&self, m: i64, n: i64) -> (i64, i64) {
        (m + n, m + n + self.gbar(m) + self.gbar(n))
    }

    /// `res_{P+}(A dB)` from the cached expansions.
    pub fn residue_pair(&self, m: i64, n: i64) -> Result<K> {
        let am = self.element(m)?;
        let bn = self.element(n)?;
        residue_pairing(&am.exp_plus, &bn.exp_plus)
    }
}

fn effective_tol<K: Coeff>(curve_tol: f64) -> f64 {
    if K::EXACT {
        0.0
    } else {
        curve_tol.max(1e-12)
    }
}

/// The central cocycle `gamma(x (x) A, y (x) B) = (x,y) res_{P+}(A dB)`
/// with `(x,y)` the trace form in the defining representation.
pub fn cocycle_gamma<K: Field>(
    x: &Mat<K>,
    a_plus: &LaurentSeries<K>,
    y: &Mat<K>,
    b_plus: &LaurentSeries<K>,
) -> Result<K> {
    let form = trace_form(x, y);
    Ok(form * residue_pairing(a_plus, b_plus)?)
}

/// Trace form `(x, y) = tr(xy)`.
pub fn trace_form<K: Field>(x: &Mat<K>, y: &Mat<K>) -> K {
    let p = x.matmul(y);
    let mut acc = K::zero();
    for i in 0..p.rows {
        acc = acc + p[(i, i)].clone();
    }
    acc
}

// ---------------------------------------------------------------------------
// Quasigrading verification
// ---------------------------------------------------------------------------

/// Empirical diversity of the product grading over a sampled index range.
#[derive(Debug, Clone)]
pub struct QuasigradingReport {
    /// Observed lower shift: products never reach below `m+n-R`.
    pub r_shift: i64,
    /// Observed upper shift: products never reach above `m+n+S`.
    pub s_shift: i64,
    /// Per-pair table of contributing degrees and coefficient magnitudes.
    pub table: Vec<((i64, i64), Vec<(i64, f64)>)>,
}

impl<K: CurveScalar> ScalarBasis<K> {
    /// Sweeps all pairs with `|m|, |n| <= range` and reports the tightest
    /// band containing every product, thresholding coefficients at
    /// `threshold` to separate structure from numerical noise.
    pub fn verify_quasigrading(&self, range: i64, threshold: f64) -> Result<QuasigradingReport> {
        let mut r_shift = 0i64;
        let mut s_shift = 0i64;
        let mut table = Vec::new();
        for m in -range..=range {
            for n in -range..=range {
                let window = self.default_window(m, n);
                let coeffs = self.structure_constants(m, n, window)?;
                let mut entries = Vec::new();
                for (h, c) in &coeffs {
                    if c.magnitude() > threshold {
                        entries.push((*h, c.magnitude()));
                        r_shift = r_shift.max(m + n - h);
                        s_shift = s_shift.max(h - (m + n));
                    }
                }
                table.push(((m, n), entries));
            }
        }
        Ok(QuasigradingReport {
            r_shift,
            s_shift,
            table,
        })
    }
}

/// Local parameter convention for the two marked points.
pub fn marked_point(curve: &CurveModel, plus: bool) -> CurvePoint {
    if plus {
        curve.p_plus()
    } else {
        curve.p_minus()
    }
}

/// Genus-zero check that a point is one of the marked points.
pub fn is_marked_rational(p: &RatPoint) -> bool {
    matches!(p, RatPoint::Infinity) || matches!(p, RatPoint::Finite(x) if Coeff::is_zero(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{make_elliptic_curve, make_rational_curve};

    fn exact_basis() -> ScalarBasis<GaussQ> {
        ScalarBasis::new_exact(make_rational_curve()).unwrap()
    }

    fn numeric_basis() -> ScalarBasis<C64> {
        let curve = make_elliptic_curve(
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.17, 0.23),
            C64::new(0.61, 0.54),
        )
        .unwrap();
        ScalarBasis::new_numeric(curve).unwrap()
    }

    #[test]
    fn genus0_elements_are_monomials() {
        let basis = exact_basis();
        for m in [-3i64, 0, 1, 5] {
            let e = basis.element(m).unwrap();
            assert_eq!(e.exp_plus.order(0.0), Some(m));
            assert_eq!(e.exp_minus.order(0.0), Some(-m));
            assert_eq!(e.eps_minus, 0);
        }
        // A_0 = 1
        let one = basis.element(0).unwrap();
        let v = one.function.eval_exact(&GaussQ::from_int(7)).unwrap();
        assert_eq!(v, GaussQ::one());
    }

    #[test]
    fn genus0_products_are_graded() {
        let basis = exact_basis();
        for (m, n) in [(2i64, 3i64), (-4, 1), (0, 5), (-2, -3)] {
            let c = basis
                .structure_constants(m, n, basis.default_window(m, n))
                .unwrap();
            assert_eq!(c.len(), 1);
            assert_eq!(c[&(m + n)], GaussQ::one());
        }
    }

    #[test]
    fn genus0_quasigrading_is_strict() {
        let basis = exact_basis();
        let report = basis.verify_quasigrading(4, 1e-8).unwrap();
        assert_eq!(report.r_shift, 0);
        assert_eq!(report.s_shift, 0);
    }

    #[test]
    fn genus1_element_orders() {
        let basis = numeric_basis();
        for m in [-3i64, -1, 2, 4] {
            let e = basis.element(m).unwrap();
            assert_eq!(
                e.exp_plus.leading_order_local(1e-6, 6),
                Some(m),
                "P+ order for m={m}"
            );
            // Leading coefficient 1 at P+.
            let lead = e.exp_plus.coeff(m).unwrap();
            assert!((lead - C64::new(1.0, 0.0)).norm() < 1e-8);
            assert_eq!(e.ord_minus, -m + e.eps_minus, "P- order for m={m}");
            assert_eq!(e.eps_minus, if m == -1 { -2 } else { -1 });
        }
        // The strip normalization pins A_0 to the constant function.
        let a0 = basis.element(0).unwrap();
        assert_eq!(a0.ord_minus, 0);
        let at = a0.function.eval_c64(C64::new(0.4, 0.1)).unwrap();
        assert!((at - C64::new(1.0, 0.0)).norm() < 1e-9, "A_0 = {at}");
        // A_{-1} attains the deepened pole bound exactly.
        let am1 = basis.element(-1).unwrap();
        assert_eq!(am1.ord_minus, -1);
    }

    #[test]
    fn genus1_strip_normalization_kills_next_coefficient() {
        let basis = numeric_basis();
        for m in [-1i64, 0] {
            let e = basis.element(m).unwrap();
            let next = e.exp_plus.coeff(m + 1).unwrap();
            assert!(next.norm() < 1e-8, "m={m}: {next}");
        }
    }

    #[test]
    fn genus1_products_expand_in_basis() {
        let basis = numeric_basis();
        for (m, n) in [(1i64, 2i64), (-2, 3), (0, 2), (-1, -1)] {
            let window = basis.default_window(m, n);
            let coeffs = basis.structure_constants(m, n, window).unwrap();
            // Leading coefficient is always 1.
            let lead = coeffs[&(m + n)];
            assert!(
                (lead - C64::new(1.0, 0.0)).norm() < 1e-7,
                "({m},{n}): {lead}"
            );
            // Direct evaluation check: A_m A_n - sum c_h A_h vanishes at
            // sample points.
            let am = basis.element(m).unwrap();
            let an = basis.element(n).unwrap();
            for k in 0..6 {
                let t = 0.37 * (k as f64 + 1.0);
                let s = 0.59 * (k as f64 + 1.0) + 0.21;
                let lat = &basis.ell.as_ref().unwrap().lattice;
                let z = lat.omega1 * (t - t.floor()) + lat.omega2 * (s - s.floor());
                let lhs = am.function.eval_c64(z).unwrap() * an.function.eval_c64(z).unwrap();
                let mut rhs = C64::new(0.0, 0.0);
                for (h, c) in &coeffs {
                    rhs += *c * basis.element(*h).unwrap().function.eval_c64(z).unwrap();
                }
                assert!(
                    (lhs - rhs).norm() < 1e-8 * lhs.norm().max(1.0),
                    "({m},{n}) at {z}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn genus1_band_is_sharp() {
        // R = 0 always. S = 3 exactly, attained only by products involving
        // the strip element A_{-1}: A_{-1}^2 needs an A_1 component to match
        // its order-two pole at P-, and A_{-1} A_{-2} reaches the constant
        // A_0 at offset three. Every other pair stays within S <= 2.
        let basis = numeric_basis();
        let report = basis.verify_quasigrading(4, 1e-8).unwrap();
        assert_eq!(report.r_shift, 0);
        assert_eq!(report.s_shift, 3, "S = {}", report.s_shift);
        let sharp = [(-1i64, -1i64), (-1, -2), (-2, -1)];
        for ((m, n), entries) in &report.table {
            for (h, _) in entries {
                if h - (m + n) > 2 {
                    assert!(
                        sharp.contains(&(*m, *n)),
                        "unexpected S=3 pair ({m},{n}) at h={h}"
                    );
                }
            }
        }
        // The forced coefficient matches alpha(-1)^2 / alpha(1).
        let am1 = basis.element(-1).unwrap();
        let a1 = basis.element(1).unwrap();
        let c = basis
            .structure_constants(-1, -1, basis.default_window(-1, -1))
            .unwrap();
        let expect = am1.alpha_minus * am1.alpha_minus / a1.alpha_minus;
        assert!(
            (c[&1] - expect).norm() < 1e-7 * expect.norm(),
            "{} vs {}",
            c[&1],
            expect
        );
    }

    #[test]
    fn cocycle_residue_closed_form_genus0() {
        // res(z^n d(z^m)) = m when n+m = 0, else 0.
        let basis = exact_basis();
        for n in -5i64..=5 {
            for m in -5i64..=5 {
                let r = basis.residue_pair(n, m).unwrap();
                let want = if n + m == 0 {
                    GaussQ::from_int(m)
                } else {
                    GaussQ::zero()
                };
                assert_eq!(r, want, "n={n}, m={m}");
            }
        }
    }

    #[test]
    fn cocycle_antisymmetry() {
        let basis = exact_basis();
        for (n, m) in [(1i64, -1i64), (3, -3), (2, 1)] {
            let ab = basis.residue_pair(n, m).unwrap();
            let ba = basis.residue_pair(m, n).unwrap();
            assert_eq!(ab + ba, GaussQ::zero());
        }
    }

    #[test]
    fn function_level_cocycle_identity_genus1() {
        // res(AB dC) + res(BC dA) + res(CA dB) = res d(ABC) = 0.
        let basis = numeric_basis();
        let ids = [(-2i64, 1i64, 2i64), (0, -1, 3), (1, 1, -3)];
        for (ma, mb, mc) in ids {
            let a = basis.element(ma).unwrap();
            let b = basis.element(mb).unwrap();
            let c = basis.element(mc).unwrap();
            let ab = a.exp_plus.mul(&b.exp_plus);
            let bc = b.exp_plus.mul(&c.exp_plus);
            let ca = c.exp_plus.mul(&a.exp_plus);
            let total = residue_pairing(&ab, &c.exp_plus).unwrap()
                + residue_pairing(&bc, &a.exp_plus).unwrap()
                + residue_pairing(&ca, &b.exp_plus).unwrap();
            assert!(total.norm() < 1e-7, "({ma},{mb},{mc}): {total}");
        }
    }

    #[test]
    fn order_bookkeeping_of_products() {
        // ord_{P+}(A_m A_n) = m+n and ord_{P-} adds the observed orders.
        let basis = numeric_basis();
        for (m, n) in [(2i64, 1i64), (-1, 2), (3, -2)] {
            let am = basis.element(m).unwrap();
            let an = basis.element(n).unwrap();
            let prod_plus = am.exp_plus.mul(&an.exp_plus);
            let prod_minus = am.exp_minus.mul(&an.exp_minus);
            assert_eq!(prod_plus.leading_order_local(1e-6, 6), Some(m + n));
            assert_eq!(
                prod_minus.leading_order_local(1e-6, 6),
                Some(am.ord_minus + an.ord_minus)
            );
            // Off the strip the observed orders realize the eps convention.
            if m != 0 {
                assert_eq!(am.ord_minus, am.eps_minus - m);
            }
        }
    }
}
