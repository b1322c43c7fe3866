//! Equivalence of fermion representations: the framing-change map
//! `gamma~ (psi_{N_1} ^ psi_{N_2} ^ ...) = gamma psi_{N_1} ^ gamma psi_{N_2} ^ ...`,
//! intertwining checks against conjugated representations, the Schur
//! stabilizer test, and highest-weight extraction from vacuum monomials.
//!
//! The infinite tail is handled by cutting at a bag boundary: full bags map
//! to `det(gamma)` times themselves, so the cut only contributes a power of
//! the determinant, which is normalized away against the reference vacuum
//! of the charge sector. With that normalization the map is exactly
//! multiplicative in `gamma`.

use crate::affine::{tensor_action_operator, BandedOperator, GRepresentation};
use crate::error::{KnError, Result};
use crate::field::{Coeff, Field};
use crate::linalg::{det, kernel, Mat};
use crate::vector_basis::{index_map, index_unmap, PsiBasis, VectorScalar};
use crate::wedge::{act_banded, canonicalize, Canonicalized, WedgeMonomial, WedgeVector};
use std::sync::Arc;

/// The data defining one fermion representation: basis context and an
/// sl(2) representation of the bundle rank.
#[derive(Clone)]
pub struct FermionRepData<K: VectorScalar> {
    pub basis: Arc<PsiBasis<K>>,
    pub tau: GRepresentation<K>,
}

impl<K: VectorScalar> FermionRepData<K> {
    pub fn new(basis: Arc<PsiBasis<K>>, tau: GRepresentation<K>) -> Result<Self> {
        if tau.dim != basis.rank() {
            return Err(KnError::RankMismatch {
                rep: tau.dim,
                rank: basis.rank(),
            });
        }
        Ok(FermionRepData { basis, tau })
    }

    /// The operator of `x (x) A_m` in this representation.
    pub fn operator(&self, x: &Mat<K>, m: i64, n_window: (i64, i64)) -> Result<BandedOperator<K>> {
        tensor_action_operator(&self.basis, x, m, &self.tau, n_window)
    }

    /// The bare Lie-algebra action (no function factor): `tau(x)` on the
    /// `i`-slot of every symbol.
    pub fn g_operator(&self, x: &Mat<K>) -> BandedOperator<K> {
        BandedOperator::bag_diagonal(self.tau.apply(x))
    }
}

// ---------------------------------------------------------------------------
// The framing-change map
// ---------------------------------------------------------------------------

/// A charge-preserving isomorphism of wedge spaces.
#[derive(Clone, Debug)]
pub enum WedgeIsomorphism<K> {
    /// The index identity (the only strong part instantiated here).
    Identity,
    /// The framing-change map of an invertible matrix on the `i`-slot.
    TildeGamma(Mat<K>),
}

impl<K: Field> WedgeIsomorphism<K> {
    pub fn apply(&self, l: usize, v: &WedgeVector<K>) -> Result<WedgeVector<K>> {
        match self {
            WedgeIsomorphism::Identity => Ok(v.clone()),
            WedgeIsomorphism::TildeGamma(g) => tilde_gamma_map(l, g, v),
        }
    }
}

fn ceil_bag(l: i64, x: i64) -> i64 {
    l * (x + l - 1).div_euclid(l)
}

/// Applies `gamma` to every factor of every monomial, expanding within each
/// `(n, j)` bag and normalizing the full-bag tail determinants against the
/// sector vacuum. Requires a uniform charge.
pub fn tilde_gamma_map<K: Field>(
    l: usize,
    gamma: &Mat<K>,
    v: &WedgeVector<K>,
) -> Result<WedgeVector<K>> {
    if gamma.rows != l || gamma.cols != l {
        return Err(KnError::ShapeMismatch(format!(
            "gamma is {}x{}, rank is {l}",
            gamma.rows, gamma.cols
        )));
    }
    let dg = det(gamma);
    if Coeff::is_zero(&dg) || dg.is_negligible(1e-12) {
        return Err(KnError::SingularGamma);
    }
    if v.terms.is_empty() {
        return Ok(WedgeVector::new());
    }
    let Some(charge) = v.charge() else {
        return Err(KnError::ShapeMismatch(
            "tilde-gamma needs a uniform charge sector".into(),
        ));
    };
    let lu = l as i64;
    let cut = ceil_bag(
        lu,
        v.terms.keys().map(|m| m.tail_start()).max().unwrap(),
    );
    // Reference vacuum full bags inside the window.
    let c_aligned = ceil_bag(lu, charge);
    let bags = ((cut - c_aligned) / lu).max(0);
    let mut norm = K::one();
    let dinv = dg.inv();
    for _ in 0..bags {
        norm = norm * dinv.clone();
    }

    let mut out = WedgeVector::new();
    for (mono, coeff) in &v.terms {
        let mut factors: Vec<i64> = mono.head().to_vec();
        factors.extend(mono.tail_start()..cut);
        // Expand gamma over each factor's i-slot.
        let mut partial: Vec<(Vec<i64>, K)> = vec![(Vec::new(), coeff.clone() * norm.clone())];
        for &f in &factors {
            let (n, j, i) = index_unmap(l, f);
            let mut next = Vec::with_capacity(partial.len() * l);
            for ip in 1..=l {
                let g = gamma[(ip - 1, i - 1)].clone();
                if Coeff::is_zero(&g) {
                    continue;
                }
                let idx = index_map(l, n, j, ip)?;
                for (chosen, c) in &partial {
                    let mut chosen = chosen.clone();
                    chosen.push(idx);
                    next.push((chosen, c.clone() * g.clone()));
                }
            }
            partial = next;
        }
        for (chosen, c) in partial {
            match canonicalize(&chosen, cut) {
                Canonicalized::Zero => {}
                Canonicalized::Term { sign, monomial } => {
                    out.add_term(monomial, c * K::from_i64(sign as i64));
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Intertwining
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct IntertwiningReport {
    pub checks: usize,
    pub max_deviation: f64,
    pub tol: f64,
}

impl IntertwiningReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tol
    }
}

/// Verifies `iso(pi_1(x (x) A_m) v) = pi_2(x (x) A_m)(iso v)` over the test
/// elements and vectors. The caller prepares `rep2` as `rep1` with the
/// framing changed by `gamma` and `tau` conjugated.
pub fn check_intertwining<K: VectorScalar>(
    rep1: &FermionRepData<K>,
    rep2: &FermionRepData<K>,
    iso: &WedgeIsomorphism<K>,
    elements: &[(Mat<K>, i64)],
    vectors: &[WedgeVector<K>],
    n_window: (i64, i64),
    tol: f64,
) -> Result<IntertwiningReport> {
    if rep1.basis.rank() != rep2.basis.rank() {
        return Err(KnError::ShapeMismatch("rank mismatch between representations".into()));
    }
    let l = rep1.basis.rank();
    let mut max_dev: f64 = 0.0;
    let mut checks = 0usize;
    for (x, m) in elements {
        let op1 = rep1.operator(x, *m, n_window)?;
        let op2 = rep2.operator(x, *m, n_window)?;
        for v in vectors {
            let lhs = iso.apply(l, &act_banded(&op1, v, true)?)?;
            let rhs = act_banded(&op2, &iso.apply(l, v)?, true)?;
            let diff = lhs.sub(&rhs);
            max_dev = max_dev.max(diff.max_magnitude());
            checks += 1;
        }
    }
    Ok(IntertwiningReport {
        checks,
        max_deviation: max_dev,
        tol,
    })
}

// ---------------------------------------------------------------------------
// Schur stabilizer
// ---------------------------------------------------------------------------

/// Constructive Schur check: the commutant of `tau` is computed as the
/// kernel of `g -> [g, tau(x)]` stacked over the generators. Returns the
/// commutant dimension; the stabilizer is scalar precisely when it is one.
pub fn commutant_dimension<K: Field>(tau: &GRepresentation<K>, tol: f64) -> usize {
    let d = tau.dim;
    let gens = [&tau.te, &tau.tf, &tau.th];
    let mut rows: Vec<Vec<K>> = Vec::new();
    for t in gens {
        // [g, t] = 0 reads: sum_k g_ik t_kj - t_ik g_kj = 0 for all (i, j).
        for i in 0..d {
            for j in 0..d {
                let mut row = vec![K::zero(); d * d];
                for k in 0..d {
                    row[i * d + k] = row[i * d + k].clone() + t[(k, j)].clone();
                    row[k * d + j] = row[k * d + j].clone() - t[(i, k)].clone();
                }
                rows.push(row);
            }
        }
    }
    let m = Mat::from_rows(rows);
    kernel(&m, tol).len()
}

pub fn stabilizer_is_scalar<K: Field>(tau: &GRepresentation<K>, tol: f64) -> bool {
    commutant_dimension(tau, tol) == 1
}

// ---------------------------------------------------------------------------
// Highest-weight extraction
// ---------------------------------------------------------------------------

/// Applies the bare Lie action of a Cartan element to the vacuum at `M`
/// and returns the eigenvalue; requires the top slot `i(M) = l`, where the
/// vacuum is a highest vector because the raising generator kills the slot
/// and every full bag is annihilated by trace-zero diagonals.
pub fn highest_weight_eigenvalue<K: VectorScalar>(
    rep: &FermionRepData<K>,
    h: &Mat<K>,
    m_index: i64,
) -> Result<K> {
    let l = rep.basis.rank();
    let (_, _, i) = index_unmap(l, m_index);
    if i != l {
        return Err(KnError::NotHighestSlot {
            index: m_index,
            component: i,
            rank: l,
        });
    }
    let vac = WedgeMonomial::vacuum(m_index);
    let op = rep.g_operator(h);
    let image = act_banded(&op, &WedgeVector::single(vac.clone(), K::one()), true)?;
    // The image must be a multiple of the vacuum itself.
    for (mono, c) in &image.terms {
        if mono != &vac && !c.is_negligible(1e-9) {
            return Err(KnError::CheckFailure(format!(
                "vacuum at {m_index} is not an eigenvector; stray term {:?}",
                mono
            )));
        }
    }
    Ok(image.coefficient(&vac))
}

/// The right side of the highest-monomial formula:
/// `(tau(x) psi_M) ^ psi_{M+1} ^ ...` assembled directly.
pub fn highest_monomial_image<K: VectorScalar>(
    rep: &FermionRepData<K>,
    x: &Mat<K>,
    m_index: i64,
) -> Result<WedgeVector<K>> {
    let l = rep.basis.rank();
    let (n, j, i) = index_unmap(l, m_index);
    if i != l {
        return Err(KnError::NotHighestSlot {
            index: m_index,
            component: i,
            rank: l,
        });
    }
    let tx = rep.tau.apply(x);
    let mut out = WedgeVector::new();
    for ip in 1..=l {
        let c = tx[(ip - 1, l - 1)].clone();
        if Coeff::is_zero(&c) {
            continue;
        }
        let idx = index_map(l, n, j, ip)?;
        match canonicalize(&[idx], m_index + 1) {
            Canonicalized::Zero => {}
            Canonicalized::Term { sign, monomial } => {
                out.add_term(monomial, c * K::from_i64(sign as i64));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::{sl2_e, sl2_f, sl2_h};
    use crate::bundle::random_framed_bundle;
    use crate::curve::make_rational_curve;
    use crate::field::GaussQ;
    use crate::wedge::monomials_with_head_in;

    fn q(v: i64) -> GaussQ {
        GaussQ::from_int(v)
    }

    fn qq(n: i64, d: i64) -> GaussQ {
        GaussQ::from_ratio(n, d)
    }

    fn exact_rep(l: usize) -> FermionRepData<GaussQ> {
        let curve = make_rational_curve();
        let bundle = random_framed_bundle(&curve, l, 0).unwrap();
        let basis = Arc::new(PsiBasis::new_exact(curve, bundle).unwrap());
        FermionRepData::new(basis, GRepresentation::sl2(l)).unwrap()
    }

    fn gmat(entries: [[GaussQ; 2]; 2]) -> Mat<GaussQ> {
        let mut m = Mat::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = entries[i][j].clone();
            }
        }
        m
    }

    #[test]
    fn tilde_gamma_identity_is_identity() {
        let id = Mat::<GaussQ>::identity(2);
        for mono in monomials_with_head_in(0, -3, 3).into_iter().take(20) {
            let v = WedgeVector::single(mono, q(1));
            let w = tilde_gamma_map(2, &id, &v).unwrap();
            assert_eq!(w, v);
        }
    }

    #[test]
    fn tilde_gamma_scalar_is_projectively_trivial() {
        // c * Id scales every monomial by c^{h - l B} with h the number of
        // explicit window factors; each monomial stays itself.
        let c = q(3);
        let mut g = Mat::<GaussQ>::zeros(2, 2);
        g[(0, 0)] = c.clone();
        g[(1, 1)] = c.clone();
        for mono in monomials_with_head_in(0, -2, 2) {
            let v = WedgeVector::single(mono.clone(), q(1));
            let w = tilde_gamma_map(2, &g, &v).unwrap();
            assert_eq!(w.terms.len(), 1);
            let (m2, coeff) = w.terms.iter().next().unwrap();
            assert_eq!(m2, &mono);
            // The scale is a (possibly negative) power of c.
            let mut val = coeff.clone();
            let cinv = c.clone().inv();
            for _ in 0..40 {
                if val == GaussQ::one() {
                    break;
                }
                if val.magnitude() > 1.0 {
                    val = val * cinv.clone();
                } else {
                    val = val * c.clone();
                }
            }
            assert_eq!(val, GaussQ::one(), "not a power of c");
        }
    }

    #[test]
    fn tilde_gamma_permutation_gives_bag_determinants() {
        // A permutation matrix on a bag-aligned vacuum: every full bag in
        // the window contributes det = -1, normalized away, so the vacuum
        // maps to itself.
        let mut g = Mat::<GaussQ>::zeros(2, 2);
        g[(0, 1)] = q(1);
        g[(1, 0)] = q(1);
        // Bag-aligned vacuum (index of a bag bottom: N(n, j, 1)).
        let aligned = index_map(2, -1, 0, 1).unwrap();
        let v = WedgeVector::single(WedgeMonomial::vacuum(aligned), q(1));
        let w = tilde_gamma_map(2, &g, &v).unwrap();
        assert_eq!(w, v);
        // On a top-slot vacuum the partial bag maps to the other slot with
        // coefficient +1: the minimal cut holds no full reference bag, and
        // enlarging the cut adds matching det factors to both sides.
        let top = index_map(2, -1, 0, 2).unwrap();
        let v2 = WedgeVector::single(WedgeMonomial::vacuum(top), q(1));
        let w2 = tilde_gamma_map(2, &g, &v2).unwrap();
        assert_eq!(w2.terms.len(), 1);
        let (m2, c2) = w2.terms.iter().next().unwrap();
        assert_eq!(m2.charge(), top);
        // The image monomial replaces slot 2 with slot 1 at the bag bottom.
        assert!(m2.contains(index_map(2, -1, 0, 1).unwrap()));
        assert_eq!(c2, &q(1));
    }

    #[test]
    fn tilde_gamma_multiplicative() {
        let g1 = gmat([[q(1), q(2)], [q(0), q(1)]]);
        let g2 = gmat([[q(1), q(0)], [q(3), q(2)]]);
        let g12 = g1.matmul(&g2);
        for mono in monomials_with_head_in(0, -2, 2).into_iter().take(12) {
            let v = WedgeVector::single(mono, q(1));
            let lhs = tilde_gamma_map(2, &g1, &tilde_gamma_map(2, &g2, &v).unwrap()).unwrap();
            let rhs = tilde_gamma_map(2, &g12, &v).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn tilde_gamma_matches_truncated_exterior_oracle() {
        // Brute-force oracle on a three-bag truncation: expand the wedge of
        // gamma-images of each factor over the 6 slots and compare.
        let g = gmat([[q(2), q(1)], [q(1), q(1)]]);
        let l = 2usize;
        let base = index_map(2, 0, 0, 1).unwrap(); // bag-aligned window start
        let cut = base + 6;
        // Pick monomials supported in the window [base, cut) with tail cut:
        // subsets of the six slots with the tail attached at the cut.
        for mask in 0u32..(1 << 6) {
            let head: Vec<i64> = (0..6)
                .filter(|k| mask >> k & 1 == 1)
                .map(|k| base + k as i64)
                .collect();
            let mono = match canonicalize(&head, cut) {
                Canonicalized::Term { monomial, .. } => monomial,
                Canonicalized::Zero => continue,
            };
            let v = WedgeVector::single(mono.clone(), q(1));
            let got = tilde_gamma_map(l, &g, &v).unwrap();
            // Oracle: expand factor images directly over the same window.
            let factors: Vec<i64> = {
                let mut f = mono.head().to_vec();
                f.extend(mono.tail_start()..cut);
                f
            };
            let mut terms: Vec<(Vec<i64>, GaussQ)> = vec![(vec![], q(1))];
            for &fidx in &factors {
                let (n, j, i) = index_unmap(l, fidx);
                let mut next = Vec::new();
                for ip in 1..=l {
                    let c = g[(ip - 1, i - 1)].clone();
                    if Coeff::is_zero(&c) {
                        continue;
                    }
                    for (ch, cc) in &terms {
                        let mut ch = ch.clone();
                        ch.push(index_map(l, n, j, ip).unwrap());
                        next.push((ch, cc.clone() * c.clone()));
                    }
                }
                terms = next;
            }
            let mut want = WedgeVector::<GaussQ>::new();
            // Window normalization: bags of the sector vacuum inside the cut.
            let charge = mono.charge();
            let lu = l as i64;
            let c_al = lu * (charge + lu - 1).div_euclid(lu);
            let bags = ((cut - c_al) / lu).max(0);
            let dg = det(&g);
            let mut norm = q(1);
            for _ in 0..bags {
                norm = norm * dg.clone().inv();
            }
            for (ch, cc) in terms {
                match canonicalize(&ch, cut) {
                    Canonicalized::Zero => {}
                    Canonicalized::Term { sign, monomial } => {
                        want.add_term(monomial, cc * norm.clone() * q(sign as i64));
                    }
                }
            }
            assert_eq!(got, want, "mismatch for mask {mask:06b}");
        }
    }

    #[test]
    fn intertwining_exact_at_genus_zero() {
        let rep1 = exact_rep(2);
        let g = gmat([[q(1), q(1)], [q(2), q(3)]]);
        let tau2 = rep1.tau.conjugated(&g, 0.0).unwrap();
        let rep2 = FermionRepData::new(rep1.basis.clone(), tau2).unwrap();
        let iso = WedgeIsomorphism::TildeGamma(g);
        let elements = vec![
            (sl2_e::<GaussQ>(), 0i64),
            (sl2_f(), 1),
            (sl2_h(), -1),
            (sl2_e(), 2),
        ];
        let vectors: Vec<WedgeVector<GaussQ>> = monomials_with_head_in(0, -3, 3)
            .into_iter()
            .take(40)
            .map(|m| WedgeVector::single(m, q(1)))
            .collect();
        let report =
            check_intertwining(&rep1, &rep2, &iso, &elements, &vectors, (-9, 9), 0.0).unwrap();
        assert!(report.passed(), "max deviation {}", report.max_deviation);
        assert_eq!(report.checks, 160);
    }

    #[test]
    fn intertwining_negative_control() {
        // Breaking the conjugation relation must produce a violation.
        let rep1 = exact_rep(2);
        let g = gmat([[q(1), q(1)], [q(2), q(3)]]);
        let mut tau2 = rep1.tau.conjugated(&g, 0.0).unwrap();
        tau2.th[(0, 0)] = tau2.th[(0, 0)].clone() + qq(1, 7);
        let rep2 = FermionRepData::new(rep1.basis.clone(), tau2).unwrap();
        let iso = WedgeIsomorphism::TildeGamma(g);
        let elements = vec![(sl2_h::<GaussQ>(), 0i64)];
        let vectors: Vec<WedgeVector<GaussQ>> = monomials_with_head_in(0, -2, 2)
            .into_iter()
            .take(10)
            .map(|m| WedgeVector::single(m, q(1)))
            .collect();
        let report =
            check_intertwining(&rep1, &rep2, &iso, &elements, &vectors, (-8, 8), 0.0).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn schur_check_on_irreducibles() {
        for dim in 1..=5 {
            let tau = GRepresentation::<GaussQ>::sl2(dim);
            assert_eq!(commutant_dimension(&tau, 0.0), 1, "dim {dim}");
            assert!(stabilizer_is_scalar(&tau, 0.0));
        }
    }

    #[test]
    fn schur_check_negative_control() {
        // Two trivial one-dimensional pieces: the commutant is everything.
        let z = Mat::<GaussQ>::zeros(2, 2);
        let tau = GRepresentation {
            dim: 2,
            te: z.clone(),
            tf: z.clone(),
            th: z,
        };
        assert_eq!(commutant_dimension(&tau, 0.0), 4);
        assert!(!stabilizer_is_scalar(&tau, 0.0));
    }

    #[test]
    fn highest_weight_on_top_slot_vacua() {
        let rep = exact_rep(2);
        // Top slots have i(M) = 2: M = N(n, j, 2).
        for (n, j) in [(0i64, 0usize), (-1, 1), (2, 0)] {
            let m_idx = index_map(2, n, j, 2).unwrap();
            let ev = highest_weight_eigenvalue(&rep, &sl2_h::<GaussQ>(), m_idx).unwrap();
            assert_eq!(ev, q(1), "highest weight at M={m_idx}");
        }
        // Non-highest slots are rejected.
        let bad = index_map(2, 0, 0, 1).unwrap();
        assert!(matches!(
            highest_weight_eigenvalue(&rep, &sl2_h::<GaussQ>(), bad),
            Err(KnError::NotHighestSlot { .. })
        ));
    }

    #[test]
    fn highest_monomial_formula() {
        // pi(x) vac_M = (tau(x) psi_M) ^ psi_{M+1} ^ ... for each generator.
        let rep = exact_rep(2);
        let m_idx = index_map(2, 0, 0, 2).unwrap(); // = -1
        for x in [sl2_e::<GaussQ>(), sl2_f(), sl2_h()] {
            let op = rep.g_operator(&x);
            let lhs = act_banded(
                &op,
                &WedgeVector::single(WedgeMonomial::vacuum(m_idx), q(1)),
                true,
            )
            .unwrap();
            let rhs = highest_monomial_image(&rep, &x, m_idx).unwrap();
            assert_eq!(lhs, rhs);
        }
        // The raising generator annihilates the highest vacuum.
        let lhs = act_banded(
            &rep.g_operator(&sl2_e::<GaussQ>()),
            &WedgeVector::single(WedgeMonomial::vacuum(m_idx), q(1)),
            true,
        )
        .unwrap();
        assert!(lhs.terms.is_empty());
    }
}
