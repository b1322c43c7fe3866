//! The affine algebra built on the function basis, and its realization by
//! banded operators on the flattened symbol indices.
//!
//! Lie-algebra elements are handled through their defining 2x2 matrices
//! (sl(2) built in; any triple of generator matrices satisfying the sl(2)
//! relations can be supplied). The invariant form is the trace form of the
//! defining representation.

use crate::error::{KnError, Result};
use crate::field::{Coeff, Field, C64};
use crate::linalg::{inverse, Mat};
use crate::scalar_basis::{cocycle_gamma, CurveScalar, ScalarBasis};
use crate::series::residue_pairing;
use crate::vector_basis::{index_map, index_unmap, PsiBasis, VectorScalar};
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// sl(2) and its irreducible representations
// ---------------------------------------------------------------------------

pub fn sl2_e<K: Coeff>() -> Mat<K> {
    let mut m = Mat::zeros(2, 2);
    m[(0, 1)] = K::one();
    m
}

pub fn sl2_f<K: Coeff>() -> Mat<K> {
    let mut m = Mat::zeros(2, 2);
    m[(1, 0)] = K::one();
    m
}

pub fn sl2_h<K: Coeff>() -> Mat<K> {
    let mut m = Mat::zeros(2, 2);
    m[(0, 0)] = K::one();
    m[(1, 1)] = -K::one();
    m
}

fn commutator<K: Field>(a: &Mat<K>, b: &Mat<K>) -> Mat<K> {
    let ab = a.matmul(b);
    let ba = b.matmul(a);
    let mut out = Mat::zeros(a.rows, a.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            out[(i, j)] = ab[(i, j)].clone() - ba[(i, j)].clone();
        }
    }
    out
}

fn mats_close<K: Coeff>(a: &Mat<K>, b: &Mat<K>, tol: f64) -> bool {
    if a.rows != b.rows || a.cols != b.cols {
        return false;
    }
    for i in 0..a.rows {
        for j in 0..a.cols {
            let d = a[(i, j)].clone() - b[(i, j)].clone();
            if !d.is_negligible(tol) {
                return false;
            }
        }
    }
    true
}

/// A representation of sl(2) by generator matrices. The weight basis is
/// ordered ascending, so the last basis vector is the highest-weight vector
/// (the raising generator is strictly lower triangular).
#[derive(Clone, Debug)]
pub struct GRepresentation<K> {
    pub dim: usize,
    pub te: Mat<K>,
    pub tf: Mat<K>,
    pub th: Mat<K>,
}

impl<K: Field> GRepresentation<K> {
    /// The irreducible sl(2) representation of the given dimension:
    /// `e v_k = (dim-k) v_{k+1}`, `f v_k = (k-1) v_{k-1}`,
    /// `h v_k = (2k-dim-1) v_k` with `k = 1..dim`.
    pub fn sl2(dim: usize) -> Self {
        assert!(dim >= 1);
        let mut te = Mat::zeros(dim, dim);
        let mut tf = Mat::zeros(dim, dim);
        let mut th = Mat::zeros(dim, dim);
        for k in 1..=dim {
            if k < dim {
                te[(k, k - 1)] = K::from_i64((dim - k) as i64);
            }
            if k > 1 {
                tf[(k - 2, k - 1)] = K::from_i64((k - 1) as i64);
            }
            th[(k - 1, k - 1)] = K::from_i64(2 * k as i64 - dim as i64 - 1);
        }
        GRepresentation { dim, te, tf, th }
    }

    /// Validates the commutation relations of supplied generator matrices.
    pub fn from_generators(te: Mat<K>, tf: Mat<K>, th: Mat<K>, tol: f64) -> Result<Self> {
        let dim = te.rows;
        if te.cols != dim || tf.rows != dim || tf.cols != dim || th.rows != dim || th.cols != dim {
            return Err(KnError::ShapeMismatch("generators must be square of one size".into()));
        }
        let ef = commutator(&te, &tf);
        if !mats_close(&ef, &th, tol) {
            return Err(KnError::CheckFailure("[e,f] != h".into()));
        }
        let he = commutator(&th, &te);
        let mut te2 = te.clone();
        for i in 0..dim {
            for j in 0..dim {
                te2[(i, j)] = te[(i, j)].clone() * K::from_i64(2);
            }
        }
        if !mats_close(&he, &te2, tol) {
            return Err(KnError::CheckFailure("[h,e] != 2e".into()));
        }
        let hf = commutator(&th, &tf);
        let mut tf2 = tf.clone();
        for i in 0..dim {
            for j in 0..dim {
                tf2[(i, j)] = -(tf[(i, j)].clone() * K::from_i64(2));
            }
        }
        if !mats_close(&hf, &tf2, tol) {
            return Err(KnError::CheckFailure("[h,f] != -2f".into()));
        }
        Ok(GRepresentation { dim, te, tf, th })
    }

    /// Applies the representation to a defining 2x2 matrix
    /// `x = a h + b e + c f`.
    pub fn apply(&self, x: &Mat<K>) -> Mat<K> {
        assert_eq!((x.rows, x.cols), (2, 2));
        let a = x[(0, 0)].clone();
        let b = x[(0, 1)].clone();
        let c = x[(1, 0)].clone();
        let mut out = Mat::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = a.clone() * self.th[(i, j)].clone()
                    + b.clone() * self.te[(i, j)].clone()
                    + c.clone() * self.tf[(i, j)].clone();
            }
        }
        out
    }

    /// The conjugated representation `x -> g tau(x) g^{ -1 }`.
    pub fn conjugated(&self, g: &Mat<K>, tol: f64) -> Result<Self> {
        let ginv = inverse(g, tol).map_err(|_| KnError::SingularGamma)?;
        Ok(GRepresentation {
            dim: self.dim,
            te: g.matmul(&self.te).matmul(&ginv),
            tf: g.matmul(&self.tf).matmul(&ginv),
            th: g.matmul(&self.th).matmul(&ginv),
        })
    }
}

// ---------------------------------------------------------------------------
// The affine algebra
// ---------------------------------------------------------------------------

/// A finitely supported element `sum_m x_m (x) A_m + a c`, the Lie part
/// stored as defining 2x2 matrices per degree.
#[derive(Clone, Debug)]
pub struct AffineElement<K> {
    pub terms: BTreeMap<i64, Mat<K>>,
    pub central: K,
}

impl<K: Field> AffineElement<K> {
    pub fn zero() -> Self {
        AffineElement {
            terms: BTreeMap::new(),
            central: K::zero(),
        }
    }

    pub fn generator(x: Mat<K>, m: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(m, x);
        AffineElement {
            terms,
            central: K::zero(),
        }
    }

    pub fn central(a: K) -> Self {
        AffineElement {
            terms: BTreeMap::new(),
            central: a,
        }
    }

    pub fn add_term(&mut self, m: i64, x: Mat<K>) {
        match self.terms.remove(&m) {
            None => {
                self.terms.insert(m, x);
            }
            Some(mut old) => {
                for i in 0..2 {
                    for j in 0..2 {
                        old[(i, j)] = old[(i, j)].clone() + x[(i, j)].clone();
                    }
                }
                self.terms.insert(m, old);
            }
        }
        self.prune();
    }

    fn prune(&mut self) {
        self.terms.retain(|_, x| {
            (0..2).any(|i| (0..2).any(|j| !Coeff::is_zero(&x[(i, j)])))
        });
    }

    pub fn is_zero_at(&self, tol: f64) -> bool {
        self.central.is_negligible(tol)
            && self.terms.values().all(|x| {
                (0..2).all(|i| (0..2).all(|j| x[(i, j)].is_negligible(tol)))
            })
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, x) in &other.terms {
            let mut neg = x.clone();
            for i in 0..2 {
                for j in 0..2 {
                    neg[(i, j)] = -neg[(i, j)].clone();
                }
            }
            out.add_term(*m, neg);
        }
        out.central = out.central.clone() - other.central.clone();
        out
    }
}

/// The bracket `[x (x) A, y (x) B] = [x,y] (x) AB + (x,y) res_{P+}(A dB) c`,
/// with the product expanded in the scalar basis.
pub fn affine_bracket<K: CurveScalar>(
    x: &AffineElement<K>,
    y: &AffineElement<K>,
    basis: &ScalarBasis<K>,
) -> Result<AffineElement<K>> {
    let mut out = AffineElement::zero();
    for (&m, xm) in &x.terms {
        for (&n, yn) in &y.terms {
            let lie = commutator(xm, yn);
            let window = basis.default_window(m, n);
            let coeffs = basis.structure_constants(m, n, window)?;
            for (h, c) in coeffs {
                let mut scaled = lie.clone();
                for i in 0..2 {
                    for j in 0..2 {
                        scaled[(i, j)] = scaled[(i, j)].clone() * c.clone();
                    }
                }
                out.add_term(h, scaled);
            }
            let am = basis.element(m)?;
            let an = basis.element(n)?;
            let gamma = cocycle_gamma(xm, &am.exp_plus, yn, &an.exp_plus)?;
            out.central = out.central.clone() + gamma;
        }
    }
    Ok(out)
}

/// `gamma` between two bare affine generators, without assembling elements.
pub fn cocycle_of_generators<K: CurveScalar>(
    x: &Mat<K>,
    m: i64,
    y: &Mat<K>,
    n: i64,
    basis: &ScalarBasis<K>,
) -> Result<K> {
    let am = basis.element(m)?;
    let an = basis.element(n)?;
    cocycle_gamma(x, &am.exp_plus, y, &an.exp_plus)
}

// ---------------------------------------------------------------------------
// Banded operators
// ---------------------------------------------------------------------------

/// An element of the algebra of matrices with finitely many nonzero
/// diagonals, stored as a column rule plus certified band bounds. Columns
/// outside a `Columns` domain are unknown, not zero; reading them is an
/// error rather than a silent truncation.
#[derive(Clone, Debug)]
pub struct BandedOperator<K> {
    pub band_lo: i64,
    pub band_hi: i64,
    pub kind: OpKind<K>,
}

#[derive(Clone, Debug)]
pub enum OpKind<K> {
    /// The matrix unit `E_{row,col}`.
    Elementary { row: i64, col: i64 },
    /// `c * Id` on every index.
    UniformDiagonal(K),
    /// A fixed matrix acting on the `i`-slot of every `(n, j)` bag.
    BagDiagonal { mat: Mat<K>, l: usize },
    /// Explicit columns over an inclusive certified domain.
    Columns {
        cols: BTreeMap<i64, Vec<(i64, K)>>,
        domain: (i64, i64),
    },
}

impl<K: Field> BandedOperator<K> {
    pub fn elementary(row: i64, col: i64) -> Self {
        BandedOperator {
            band_lo: row - col,
            band_hi: row - col,
            kind: OpKind::Elementary { row, col },
        }
    }

    pub fn identity() -> Self {
        BandedOperator {
            band_lo: 0,
            band_hi: 0,
            kind: OpKind::UniformDiagonal(K::one()),
        }
    }

    /// Action of a Lie element through `tau` on the `i`-slot: diagonal in
    /// `(n, j)`.
    pub fn bag_diagonal(mat: Mat<K>) -> Self {
        let l = mat.rows;
        BandedOperator {
            band_lo: -(l as i64 - 1),
            band_hi: l as i64 - 1,
            kind: OpKind::BagDiagonal { mat, l },
        }
    }

    /// Inclusive column domain, `None` when the rule is defined everywhere.
    pub fn domain(&self) -> Option<(i64, i64)> {
        match &self.kind {
            OpKind::Columns { domain, .. } => Some(*domain),
            _ => None,
        }
    }

    /// Entries `(row, coeff)` of one column.
    pub fn column(&self, n: i64) -> Result<Vec<(i64, K)>> {
        match &self.kind {
            OpKind::Elementary { row, col } => {
                if n == *col {
                    Ok(vec![(*row, K::one())])
                } else {
                    Ok(vec![])
                }
            }
            OpKind::UniformDiagonal(c) => Ok(vec![(n, c.clone())]),
            OpKind::BagDiagonal { mat, l } => {
                let (nn, j, i) = index_unmap(*l, n);
                let mut out = Vec::new();
                for ip in 1..=*l {
                    let c = mat[(ip - 1, i - 1)].clone();
                    if !Coeff::is_zero(&c) {
                        out.push((index_map(*l, nn, j, ip)?, c));
                    }
                }
                Ok(out)
            }
            OpKind::Columns { cols, domain } => {
                if n < domain.0 || n > domain.1 {
                    return Err(KnError::WindowTooSmall(format!(
                        "column {n} outside certified domain [{}, {}]",
                        domain.0, domain.1
                    )));
                }
                Ok(cols.get(&n).cloned().unwrap_or_default())
            }
        }
    }

    /// Diagonal coefficient of one column.
    pub fn diagonal_entry(&self, n: i64) -> Result<K> {
        Ok(self
            .column(n)?
            .into_iter()
            .find(|(r, _)| *r == n)
            .map(|(_, c)| c)
            .unwrap_or_else(K::zero))
    }

    /// Dense window `[lo, hi] x [lo, hi]`.
    pub fn materialize(&self, lo: i64, hi: i64) -> Result<Mat<K>> {
        let n = (hi - lo + 1) as usize;
        let mut m = Mat::zeros(n, n);
        for col in lo..=hi {
            for (row, c) in self.column(col)? {
                if row >= lo && row <= hi {
                    m[((row - lo) as usize, (col - lo) as usize)] = c;
                }
            }
        }
        Ok(m)
    }

    pub fn scale(mut self, c: &K) -> Self {
        match &mut self.kind {
            OpKind::Elementary { row, col } => {
                let (row, col) = (*row, *col);
                let mut cols = BTreeMap::new();
                cols.insert(col, vec![(row, c.clone())]);
                self.kind = OpKind::Columns {
                    cols,
                    domain: (i64::MIN / 4, i64::MAX / 4),
                };
            }
            OpKind::UniformDiagonal(d) => *d = d.clone() * c.clone(),
            OpKind::BagDiagonal { mat, .. } => {
                for i in 0..mat.rows {
                    for j in 0..mat.cols {
                        mat[(i, j)] = mat[(i, j)].clone() * c.clone();
                    }
                }
            }
            OpKind::Columns { cols, .. } => {
                for entries in cols.values_mut() {
                    for (_, v) in entries.iter_mut() {
                        *v = v.clone() * c.clone();
                    }
                }
            }
        }
        self
    }
}

/// `[P, Q] = PQ - QP` materialized as explicit columns over `window`;
/// errors if the certified domains cannot cover the composition.
pub fn operator_commutator<K: Field>(
    p: &BandedOperator<K>,
    q: &BandedOperator<K>,
    window: (i64, i64),
) -> Result<BandedOperator<K>> {
    let mut cols: BTreeMap<i64, Vec<(i64, K)>> = BTreeMap::new();
    for n in window.0..=window.1 {
        let mut acc: BTreeMap<i64, K> = BTreeMap::new();
        for (r, c) in q.column(n)? {
            for (r2, c2) in p.column(r)? {
                let e = acc.entry(r2).or_insert_with(K::zero);
                *e = e.clone() + c.clone() * c2.clone();
            }
        }
        for (r, c) in p.column(n)? {
            for (r2, c2) in q.column(r)? {
                let e = acc.entry(r2).or_insert_with(K::zero);
                *e = e.clone() - c.clone() * c2.clone();
            }
        }
        let entries: Vec<(i64, K)> = acc
            .into_iter()
            .filter(|(_, c)| !Coeff::is_zero(c))
            .collect();
        if !entries.is_empty() {
            cols.insert(n, entries);
        }
    }
    Ok(BandedOperator {
        band_lo: p.band_lo + q.band_lo,
        band_hi: p.band_hi + q.band_hi,
        kind: OpKind::Columns {
            cols,
            domain: window,
        },
    })
}

// ---------------------------------------------------------------------------
// Operators from structure constants
// ---------------------------------------------------------------------------

/// The scalar embedding of `A_m` into banded operators on the flattened
/// indices: `A_m psi_N = sum C^{N'} psi_{N'}` with the `i`-slot untouched.
/// Certified band `[l^2 m, l^2 m + l^2 gbar]`.
pub fn a_operator<K: VectorScalar>(
    basis: &PsiBasis<K>,
    m: i64,
    n_window: (i64, i64),
) -> Result<BandedOperator<K>> {
    let l = basis.rank();
    let lu = l as i64;
    let gbar = basis.scalar.gbar(m);
    let mut cols: BTreeMap<i64, Vec<(i64, K)>> = BTreeMap::new();
    for n in n_window.0..=n_window.1 {
        let table = basis.action_constants(m, n)?;
        for j in 0..l {
            for i in 1..=l {
                let col_idx = index_map(l, n, j, i)?;
                let mut entries = Vec::new();
                for (k, jp, c) in &table[j] {
                    entries.push((index_map(l, *k, *jp, i)?, c.clone()));
                }
                if !entries.is_empty() {
                    cols.insert(col_idx, entries);
                }
            }
        }
    }
    Ok(BandedOperator {
        band_lo: lu * lu * m,
        band_hi: lu * lu * m + lu * lu * gbar,
        kind: OpKind::Columns {
            cols,
            domain: (
                index_map(l, n_window.0, l - 1, 1)?,
                index_map(l, n_window.1, 0, l)?,
            ),
        },
    })
}

/// The tensor action of `x (x) A_m`: the scalar `A_m` action on `(n, j)`
/// composed with `tau(x)` on the `i`-slot. The `i`-mixing widens the
/// certified band by `l - 1` on both sides.
pub fn tensor_action_operator<K: VectorScalar>(
    basis: &PsiBasis<K>,
    x: &Mat<K>,
    m: i64,
    tau: &GRepresentation<K>,
    n_window: (i64, i64),
) -> Result<BandedOperator<K>> {
    let l = basis.rank();
    if tau.dim != l {
        return Err(KnError::RankMismatch {
            rep: tau.dim,
            rank: l,
        });
    }
    let lu = l as i64;
    let gbar = basis.scalar.gbar(m);
    let tx = tau.apply(x);
    let mut cols: BTreeMap<i64, Vec<(i64, K)>> = BTreeMap::new();
    for n in n_window.0..=n_window.1 {
        let table = basis.action_constants(m, n)?;
        for j in 0..l {
            for i in 1..=l {
                let col_idx = index_map(l, n, j, i)?;
                let mut entries = Vec::new();
                for (k, jp, c) in &table[j] {
                    for ip in 1..=l {
                        let t = tx[(ip - 1, i - 1)].clone();
                        if Coeff::is_zero(&t) {
                            continue;
                        }
                        entries.push((index_map(l, *k, *jp, ip)?, c.clone() * t));
                    }
                }
                if !entries.is_empty() {
                    cols.insert(col_idx, entries);
                }
            }
        }
    }
    Ok(BandedOperator {
        band_lo: lu * lu * m - (lu - 1),
        band_hi: lu * lu * m + lu * lu * gbar + (lu - 1),
        kind: OpKind::Columns {
            cols,
            domain: (
                index_map(l, n_window.0, l - 1, 1)?,
                index_map(l, n_window.1, 0, l)?,
            ),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::random_framed_bundle;
    use crate::curve::make_rational_curve;
    use crate::field::GaussQ;

    fn q(v: i64) -> GaussQ {
        GaussQ::from_int(v)
    }

    fn exact_scalar() -> ScalarBasis<GaussQ> {
        ScalarBasis::new_exact(make_rational_curve()).unwrap()
    }

    fn exact_psi(l: usize) -> PsiBasis<GaussQ> {
        let curve = make_rational_curve();
        let bundle = random_framed_bundle(&curve, l, 0).unwrap();
        PsiBasis::new_exact(curve, bundle).unwrap()
    }

    #[test]
    fn sl2_irreps_satisfy_relations() {
        for dim in 1..=5 {
            let rep = GRepresentation::<GaussQ>::sl2(dim);
            GRepresentation::from_generators(rep.te.clone(), rep.tf.clone(), rep.th.clone(), 0.0)
                .unwrap();
            // Trace zero.
            for g in [&rep.te, &rep.tf, &rep.th] {
                let mut tr = GaussQ::zero();
                for i in 0..dim {
                    tr = tr + g[(i, i)].clone();
                }
                assert!(Coeff::is_zero(&tr));
            }
            // Highest slot: e kills the last basis vector.
            let mut any = false;
            for i in 0..dim {
                if !Coeff::is_zero(&rep.te[(i, dim - 1)]) {
                    any = true;
                }
            }
            assert!(!any, "raising generator must kill the highest slot");
            // Highest weight on the last slot is dim - 1.
            assert_eq!(rep.th[(dim - 1, dim - 1)], q(dim as i64 - 1));
        }
    }

    #[test]
    fn defining_rep_is_sl2_of_dim_two() {
        let rep = GRepresentation::<GaussQ>::sl2(2);
        // apply() must reproduce the defining matrices up to basis order:
        // v_2 is highest, so tau(h) = diag(-1, 1).
        let th = rep.apply(&sl2_h::<GaussQ>());
        assert_eq!(th[(0, 0)], q(-1));
        assert_eq!(th[(1, 1)], q(1));
    }

    #[test]
    fn bracket_with_central_vanishes() {
        let basis = exact_scalar();
        let x = AffineElement::generator(sl2_e::<GaussQ>(), 2);
        let c = AffineElement::central(q(3));
        let b = affine_bracket(&x, &c, &basis).unwrap();
        assert!(b.is_zero_at(0.0));
    }

    #[test]
    fn standard_affine_relation() {
        // [e (x) z, f (x) z^{-1}] = h (x) 1 + tr(ef) res(z d z^{-1}) c
        //                         = h (x) 1 - c.
        let basis = exact_scalar();
        let x = AffineElement::generator(sl2_e::<GaussQ>(), 1);
        let y = AffineElement::generator(sl2_f::<GaussQ>(), -1);
        let b = affine_bracket(&x, &y, &basis).unwrap();
        assert_eq!(b.terms.len(), 1);
        let lie = &b.terms[&0];
        assert!(mats_close(lie, &sl2_h::<GaussQ>(), 0.0));
        assert_eq!(b.central, q(-1));
    }

    #[test]
    fn bracket_antisymmetry_exact() {
        let basis = exact_scalar();
        let pairs = [
            (sl2_e::<GaussQ>(), 2i64, sl2_h::<GaussQ>(), -1i64),
            (sl2_f(), 0, sl2_e(), 3),
            (sl2_h(), -2, sl2_f(), 2),
        ];
        for (xm, m, yn, n) in pairs {
            let x = AffineElement::generator(xm, m);
            let y = AffineElement::generator(yn, n);
            let xy = affine_bracket(&x, &y, &basis).unwrap();
            let yx = affine_bracket(&y, &x, &basis).unwrap();
            let mut sum = xy.clone();
            for (k, v) in yx.terms {
                sum.add_term(k, v);
            }
            sum.central = xy.central.clone() + yx.central.clone();
            assert!(sum.is_zero_at(0.0), "antisymmetry fails at ({m},{n})");
        }
    }

    #[test]
    fn jacobi_identity_exact() {
        let basis = exact_scalar();
        let a = AffineElement::generator(sl2_e::<GaussQ>(), 1);
        let b = AffineElement::generator(sl2_f::<GaussQ>(), -2);
        let c = AffineElement::generator(sl2_h::<GaussQ>(), 1);
        let ab_c = affine_bracket(&affine_bracket(&a, &b, &basis).unwrap(), &c, &basis).unwrap();
        let bc_a = affine_bracket(&affine_bracket(&b, &c, &basis).unwrap(), &a, &basis).unwrap();
        let ca_b = affine_bracket(&affine_bracket(&c, &a, &basis).unwrap(), &b, &basis).unwrap();
        let mut total = ab_c;
        for (k, v) in bc_a.terms.clone() {
            total.add_term(k, v);
        }
        for (k, v) in ca_b.terms.clone() {
            total.add_term(k, v);
        }
        total.central = total.central.clone() + bc_a.central + ca_b.central;
        assert!(total.is_zero_at(0.0), "Jacobi identity fails");
    }

    #[test]
    fn elementary_commutators_are_matrix_units() {
        // [E_IJ, E_JK] = E_IK for distinct I, J, K.
        let p = BandedOperator::<GaussQ>::elementary(2, 5);
        let r = BandedOperator::<GaussQ>::elementary(5, -3);
        let c = operator_commutator(&p, &r, (-10, 10)).unwrap();
        let m = c.materialize(-10, 10).unwrap();
        let expect = BandedOperator::<GaussQ>::elementary(2, -3)
            .materialize(-10, 10)
            .unwrap();
        assert_eq!(m, expect);
        // [P, P] = 0.
        let z = operator_commutator(&p, &p, (-10, 10)).unwrap();
        let zm = z.materialize(-10, 10).unwrap();
        assert_eq!(zm, Mat::zeros(21, 21));
    }

    #[test]
    fn genus0_a_operator_is_shift() {
        let basis = exact_psi(2);
        let op = a_operator(&basis, 3, (-4, 4)).unwrap();
        assert_eq!(op.band_lo, 12);
        assert_eq!(op.band_hi, 12);
        for n in -2i64..=2 {
            for j in 0..2 {
                for i in 1..=2 {
                    let col = op.column(index_map(2, n, j, i).unwrap()).unwrap();
                    assert_eq!(col.len(), 1);
                    assert_eq!(col[0].0, index_map(2, n + 3, j, i).unwrap());
                    assert_eq!(col[0].1, GaussQ::one());
                }
            }
        }
    }

    #[test]
    fn genus0_tensor_operator_h_is_diagonal() {
        let basis = exact_psi(2);
        let tau = GRepresentation::<GaussQ>::sl2(2);
        let op = tensor_action_operator(&basis, &sl2_h(), 0, &tau, (-3, 3)).unwrap();
        for n in -2i64..=2 {
            for j in 0..2 {
                for i in 1..=2 {
                    let nn = index_map(2, n, j, i).unwrap();
                    let col = op.column(nn).unwrap();
                    assert_eq!(col.len(), 1);
                    assert_eq!(col[0].0, nn);
                    // Ascending weights: i = 1 -> -1, i = 2 -> +1.
                    let want = if i == 1 { q(-1) } else { q(1) };
                    assert_eq!(col[0].1, want);
                }
            }
        }
    }

    #[test]
    fn genus0_action_leaves_n_j_fixed_for_m_zero() {
        let basis = exact_psi(2);
        let tau = GRepresentation::<GaussQ>::sl2(2);
        for x in [sl2_e::<GaussQ>(), sl2_f(), sl2_h()] {
            let op = tensor_action_operator(&basis, &x, 0, &tau, (-3, 3)).unwrap();
            for n in -2i64..=2 {
                for j in 0..2 {
                    for i in 1..=2 {
                        let nn = index_map(2, n, j, i).unwrap();
                        for (row, _) in op.column(nn).unwrap() {
                            let (rn, rj, _) = index_unmap(2, row);
                            assert_eq!((rn, rj), (n, j), "m=0 action moved (n,j)");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn representation_property_on_symbols() {
        // The operator of [x (x) A_m, y (x) A_n] (finite part) equals the
        // commutator of the operators, exactly at genus zero.
        let basis = exact_psi(2);
        let tau = GRepresentation::<GaussQ>::sl2(2);
        let cases = [
            (sl2_e::<GaussQ>(), 1i64, sl2_f::<GaussQ>(), -1i64),
            (sl2_h(), 2, sl2_e(), -1),
            (sl2_f(), 0, sl2_h(), 1),
        ];
        for (xm, m, yn, n) in cases {
            let px = tensor_action_operator(&basis, &xm, m, &tau, (-6, 6)).unwrap();
            let py = tensor_action_operator(&basis, &yn, n, &tau, (-6, 6)).unwrap();
            let comm = operator_commutator(&px, &py, (-8, 8)).unwrap();
            // Bracket in the affine algebra (genus zero: single term at m+n).
            let xel = AffineElement::generator(xm, m);
            let yel = AffineElement::generator(yn, n);
            let br = affine_bracket(&xel, &yel, &basis.scalar).unwrap();
            let mut expect_cols: BTreeMap<i64, BTreeMap<i64, GaussQ>> = BTreeMap::new();
            for (h, lie) in &br.terms {
                let op = tensor_action_operator(&basis, lie, *h, &tau, (-6, 6)).unwrap();
                for ncol in -8i64..=8 {
                    if let Ok(entries) = op.column(ncol) {
                        for (r, c) in entries {
                            let e = expect_cols
                                .entry(ncol)
                                .or_default()
                                .entry(r)
                                .or_insert_with(GaussQ::zero);
                            *e = e.clone() + c;
                        }
                    }
                }
            }
            // Compare on a safe interior window.
            for ncol in -4i64..=4 {
                let got: BTreeMap<i64, GaussQ> = comm
                    .column(ncol)
                    .unwrap()
                    .into_iter()
                    .filter(|(_, c)| !Coeff::is_zero(c))
                    .collect();
                let want = expect_cols.remove(&ncol).unwrap_or_default();
                let want: BTreeMap<i64, GaussQ> = want
                    .into_iter()
                    .filter(|(_, c)| !Coeff::is_zero(c))
                    .collect();
                assert_eq!(got, want, "column {ncol} for ({m},{n})");
            }
        }
    }

    #[test]
    fn tau_independence_of_constants() {
        // Fixing i = i' in the tensor operator of h (x) A_m recovers the
        // action constants independently of i.
        let basis = exact_psi(2);
        let tau = GRepresentation::<GaussQ>::sl2(2);
        let op = tensor_action_operator(&basis, &sl2_h(), 1, &tau, (-3, 3)).unwrap();
        for n in -2i64..=2 {
            for j in 0..2 {
                let mut per_i: Vec<BTreeMap<(i64, usize), GaussQ>> = Vec::new();
                for i in 1..=2 {
                    let nn = index_map(2, n, j, i).unwrap();
                    let mut map = BTreeMap::new();
                    let hval = if i == 1 { q(-1) } else { q(1) };
                    for (row, c) in op.column(nn).unwrap() {
                        let (rn, rj, ri) = index_unmap(2, row);
                        if ri == i {
                            map.insert((rn, rj), c / hval.clone());
                        }
                    }
                    per_i.push(map);
                }
                assert_eq!(per_i[0], per_i[1], "constants depend on i at (n={n}, j={j})");
            }
        }
    }
}
