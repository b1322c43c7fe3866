//! The rank-`l` vector-function basis `psi_{n,j}` attached to a framed
//! bundle: each column has order `n` at `P+` and `-n` at `P-`, at most
//! simple poles on the Tyurin divisor with residues parallel to the Tyurin
//! vectors, and the leading expansion matrices are normalized to be unit
//! upper triangular at `P+` and lower triangular at `P-`.
//!
//! The triangular pair is what makes the flattened action band one-sided at
//! both ends: at the bottom matching order the transfer matrix is unit
//! upper triangular, at the top it is lower triangular.

use crate::bundle::{FramedBundleData, KNVectorFunction};
use crate::curve::{CurveModel, CurvePoint};
use crate::error::{KnError, Result};
use crate::field::{Coeff, GaussQ, C64};
use crate::linalg::{rank, singular_values, solve, Mat};
use crate::meromorphic::MeromorphicFunction;
use crate::riemann_roch::rr_space_basis;
use crate::scalar_basis::{CurveScalar, ScalarBasis};
use crate::series::LaurentSeries;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

// ---------------------------------------------------------------------------
// Index flattening
// ---------------------------------------------------------------------------

/// Flattened symbol index: lexicographic in `(n, -j, i)` with
/// `N(0, 0, l) = -1`; explicitly `N = l^2 n - l j + i - l - 1`.
pub fn index_map(l: usize, n: i64, j: usize, i: usize) -> Result<i64> {
    let lu = l as i64;
    if j >= l || i < 1 || i > l {
        return Err(KnError::IndexOutOfRange(format!(
            "j={j} must be in [0,{l}) and i={i} in [1,{l}]"
        )));
    }
    Ok(lu * lu * n - lu * (j as i64) + (i as i64) - lu - 1)
}

/// Inverse of [`index_map`].
pub fn index_unmap(l: usize, n_index: i64) -> (i64, usize, usize) {
    let lu = l as i64;
    let v = n_index + lu * lu;
    let n = v.div_euclid(lu * lu);
    let k = v.rem_euclid(lu * lu);
    let j = (lu - 1 - k.div_euclid(lu)) as usize;
    let i = (k.rem_euclid(lu) + 1) as usize;
    (n, j, i)
}

// ---------------------------------------------------------------------------
// Psi matrices
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct PsiColumn<K> {
    pub function: KNVectorFunction,
    /// Component expansions at `P+` in `z+`.
    pub exp_plus: Vec<LaurentSeries<K>>,
    /// Component expansions at `P-` in `z-`.
    pub exp_minus: Vec<LaurentSeries<K>>,
}

#[derive(Clone, Debug)]
pub struct PsiMatrix<K> {
    pub n: i64,
    pub rank: usize,
    pub columns: Vec<PsiColumn<K>>,
}

impl<K: Coeff> PsiMatrix<K> {
    /// Matrix of `P+` coefficients at a given order; at order `n` this is
    /// the unit upper triangular leading matrix.
    pub fn coeff_plus(&self, order: i64) -> Result<Mat<K>> {
        let l = self.rank;
        let mut m = Mat::zeros(l, l);
        for (j, col) in self.columns.iter().enumerate() {
            for i in 0..l {
                m[(i, j)] = col.exp_plus[i].coeff(order)?;
            }
        }
        Ok(m)
    }

    pub fn coeff_minus(&self, order: i64) -> Result<Mat<K>> {
        let l = self.rank;
        let mut m = Mat::zeros(l, l);
        for (j, col) in self.columns.iter().enumerate() {
            for i in 0..l {
                m[(i, j)] = col.exp_minus[i].coeff(order)?;
            }
        }
        Ok(m)
    }

    pub fn xi_plus0(&self) -> Result<Mat<K>> {
        self.coeff_plus(self.n)
    }

    pub fn xi_minus0(&self) -> Result<Mat<K>> {
        self.coeff_minus(-self.n)
    }

    /// Evaluates the matrix of component functions at a point (numerically).
    pub fn eval_matrix(&self, z: C64) -> Result<Mat<C64>> {
        let l = self.rank;
        let mut m = Mat::zeros(l, l);
        for (j, col) in self.columns.iter().enumerate() {
            for i in 0..l {
                m[(i, j)] = col.function.components[i].eval_c64(z)?;
            }
        }
        Ok(m)
    }
}

// ---------------------------------------------------------------------------
// The basis context
// ---------------------------------------------------------------------------

/// Curve + bundle context producing and memoizing `Psi_n` and the structure
/// constants of the function-algebra action.
pub struct PsiBasis<K> {
    pub scalar: ScalarBasis<K>,
    pub bundle: FramedBundleData,
    cache: Mutex<HashMap<i64, Arc<PsiMatrix<K>>>>,
}

/// Regime extension that knows how to build `Psi_n`.
pub trait VectorScalar: CurveScalar {
    fn psi_matrix(basis: &PsiBasis<Self>, n: i64) -> Result<PsiMatrix<Self>>;
}

impl VectorScalar for GaussQ {
    fn psi_matrix(basis: &PsiBasis<Self>, n: i64) -> Result<PsiMatrix<Self>> {
        // Genus zero: Psi_n = z^n Id exactly. The unit upper and lower
        // triangular normalizations intersect in the identity.
        let l = basis.bundle.rank;
        let order = basis.scalar.curve.expansion_order();
        let mut columns = Vec::with_capacity(l);
        for j in 0..l {
            let mut comps = Vec::with_capacity(l);
            let mut exp_plus = Vec::with_capacity(l);
            let mut exp_minus = Vec::with_capacity(l);
            for i in 0..l {
                if i == j {
                    comps.push(MeromorphicFunction::monomial(n));
                    exp_plus.push(LaurentSeries::monomial(n, GaussQ::one(), n + order));
                    exp_minus.push(LaurentSeries::monomial(-n, GaussQ::one(), -n + order));
                } else {
                    comps.push(MeromorphicFunction::Rational(vec![]));
                    exp_plus.push(LaurentSeries::zero(n + order));
                    exp_minus.push(LaurentSeries::zero(-n + order));
                }
            }
            columns.push(PsiColumn {
                function: KNVectorFunction {
                    components: comps,
                    residues: Vec::new(),
                },
                exp_plus,
                exp_minus,
            });
        }
        Ok(PsiMatrix {
            n,
            rank: l,
            columns,
        })
    }
}

impl VectorScalar for C64 {
    fn psi_matrix(basis: &PsiBasis<Self>, n: i64) -> Result<PsiMatrix<Self>> {
        build_psi_generic(basis, n)
    }
}

impl PsiBasis<GaussQ> {
    pub fn new_exact(curve: CurveModel, bundle: FramedBundleData) -> Result<Self> {
        Ok(PsiBasis {
            scalar: ScalarBasis::new_exact(curve)?,
            bundle,
            cache: Mutex::new(HashMap::new()),
        })
    }
}

impl PsiBasis<C64> {
    pub fn new_numeric(curve: CurveModel, bundle: FramedBundleData) -> Result<Self> {
        let expect = curve.genus() as usize * bundle.rank;
        if bundle.points.len() != expect {
            return Err(KnError::NonGenericData(format!(
                "bundle has {} degeneration points, expected {expect}",
                bundle.points.len()
            )));
        }
        Ok(PsiBasis {
            scalar: ScalarBasis::new_numeric(curve)?,
            bundle,
            cache: Mutex::new(HashMap::new()),
        })
    }
}

impl<K: VectorScalar> PsiBasis<K> {
    pub fn curve(&self) -> &CurveModel {
        &self.scalar.curve
    }

    pub fn rank(&self) -> usize {
        self.bundle.rank
    }

    pub fn psi(&self, n: i64) -> Result<Arc<PsiMatrix<K>>> {
        if let Some(p) = self.cache.lock().unwrap().get(&n) {
            return Ok(p.clone());
        }
        let built = Arc::new(K::psi_matrix(self, n)?);
        let mut guard = self.cache.lock().unwrap();
        let entry = guard.entry(n).or_insert_with(|| built.clone());
        Ok(entry.clone())
    }

    /// Structure constants of `A_m psi_{n,j} = sum C^{k,j'} psi_{k,j'}`,
    /// obtained by block-triangular matching at `P+` and certified at both
    /// marked points. Returned as `per_j[j] = [(k, j', coeff), ...]`.
    pub fn action_constants(&self, m: i64, n: i64) -> Result<Vec<Vec<(i64, usize, K)>>> {
        let l = self.rank();
        let gbar = self.scalar.gbar(m);
        let am = self.scalar.element(m)?;
        let psi_n = self.psi(n)?;
        let tol = if K::EXACT {
            0.0
        } else {
            self.curve().tolerance().max(1e-12)
        };
        let lo = m + n;
        let hi = m + n + gbar;
        // Leading matrices of the target window.
        let mut xi0: BTreeMap<i64, Mat<K>> = BTreeMap::new();
        for k in lo..=hi {
            xi0.insert(k, self.psi(k)?.xi_plus0()?);
        }
        let mut out = Vec::with_capacity(l);
        for j in 0..l {
            // Residual components at P+ and P-.
            let mut res_plus: Vec<LaurentSeries<K>> = (0..l)
                .map(|i| am.exp_plus.mul(&psi_n.columns[j].exp_plus[i]))
                .collect();
            let mut res_minus: Vec<LaurentSeries<K>> = (0..l)
                .map(|i| am.exp_minus.mul(&psi_n.columns[j].exp_minus[i]))
                .collect();
            let scale = res_plus
                .iter()
                .map(|s| s.local_magnitude(lo, hi + 3))
                .fold(1.0f64, f64::max);
            let mscale = res_minus
                .iter()
                .map(|s| {
                    let lead = s.lead();
                    s.local_magnitude(lead, lead + 6)
                })
                .fold(1.0f64, f64::max);
            let mut entries: Vec<(i64, usize, K)> = Vec::new();
            for k in lo..=hi {
                let v: Vec<K> = res_plus
                    .iter()
                    .map(|s| s.coeff(k))
                    .collect::<Result<_>>()?;
                let c = solve(&xi0[&k], &v, tol.max(1e-12))?;
                let psi_k = self.psi(k)?;
                for (jp, cj) in c.iter().enumerate() {
                    if cj.is_negligible(tol * scale) {
                        continue;
                    }
                    for i in 0..l {
                        res_plus[i] = res_plus[i]
                            .sub(&psi_k.columns[jp].exp_plus[i].clone().scale(cj));
                        res_minus[i] = res_minus[i]
                            .sub(&psi_k.columns[jp].exp_minus[i].clone().scale(cj));
                    }
                    entries.push((k, jp, cj.clone()));
                }
            }
            // Certify the residual at P+ past the window ...
            for i in 0..l {
                let top = (hi + 3).min(res_plus[i].prec() - 1);
                for k in lo..=top {
                    let c = res_plus[i].coeff(k)?;
                    if !c.is_negligible(tol * scale * 100.0) {
                        return Err(KnError::ResidualTooLarge {
                            residual: c.magnitude(),
                            tol: tol * scale * 100.0,
                        });
                    }
                }
            }
            // ... and at P- through the certified range.
            for i in 0..l {
                let lead = res_minus[i].lead();
                let top = (res_minus[i].prec() - 1).min(-lo + 2);
                for k in lead..=top {
                    let c = res_minus[i].coeff(k)?;
                    if !c.is_negligible(tol * mscale * 100.0) {
                        return Err(KnError::ResidualTooLarge {
                            residual: c.magnitude(),
                            tol: tol * mscale * 100.0,
                        });
                    }
                }
            }
            out.push(entries);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Generic column solver
// ---------------------------------------------------------------------------

/// Builds `Psi_n` from the Riemann-Roch ansatz over `D + n P- - n P+`,
/// imposing the Tyurin residue constraints and the two triangular
/// normalizations. Works in either regime; the numeric backend uses it
/// directly, the exact backend uses it as a cross-check of the shortcut.
pub fn build_psi_generic<K: VectorScalar>(basis: &PsiBasis<K>, n: i64) -> Result<PsiMatrix<K>> {
    let curve = basis.curve();
    let l = basis.rank();
    let order = curve.expansion_order();
    // Ansatz divisor D + n P- - n P+.
    let mut divisor: Vec<(CurvePoint, i64)> = basis
        .bundle
        .points
        .iter()
        .map(|&p| (CurvePoint::Torus(p), 1))
        .collect();
    if n != 0 {
        divisor.push((curve.p_minus(), n));
        divisor.push((curve.p_plus(), -n));
    }
    let ansatz = rr_space_basis(curve, &divisor)?;
    let b = ansatz.len();
    if b == 0 {
        return Err(KnError::NonGenericData("empty ansatz space".into()));
    }
    // Cached expansions of the ansatz functions.
    let plus: Vec<LaurentSeries<K>> = ansatz
        .iter()
        .map(|f| Ok(K::extract(f.expansion_at(curve, &curve.p_plus(), order)?)))
        .collect::<Result<_>>()?;
    let minus: Vec<LaurentSeries<K>> = ansatz
        .iter()
        .map(|f| Ok(K::extract(f.expansion_at(curve, &curve.p_minus(), order)?)))
        .collect::<Result<_>>()?;
    let res_at: Vec<Vec<K>> = ansatz
        .iter()
        .map(|f| {
            basis
                .bundle
                .points
                .iter()
                .map(|&g| {
                    let e = K::extract(f.expansion_at(curve, &CurvePoint::Torus(g), 4)?);
                    e.coeff(-1)
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let tol = if K::EXACT {
        0.0
    } else {
        curve.tolerance().max(1e-10)
    };

    let gl = basis.bundle.points.len();
    let unknowns = l * b;
    let mut columns = Vec::with_capacity(l);
    for j in 0..l {
        // Row list: Tyurin constraints, then P+ rows (i >= j), then P-
        // rows (i < j).
        let mut rows: Vec<Vec<K>> = Vec::new();
        let mut rhs: Vec<K> = Vec::new();
        for (gi, alpha) in basis.bundle.alphas.iter().enumerate() {
            let pivot = alpha
                .iter()
                .position(|a| a.magnitude() > 1e-9)
                .ok_or_else(|| KnError::NonGenericData("zero Tyurin vector".into()))?;
            for i in 0..l {
                if i == pivot {
                    continue;
                }
                // res_i - alpha_i * res_pivot = 0 (alpha_pivot = 1).
                let mut row = vec![K::zero(); unknowns];
                let ai = alpha_to_k::<K>(&alpha[i]);
                for t in 0..b {
                    row[i * b + t] = res_at[t][gi].clone();
                    row[pivot * b + t] =
                        row[pivot * b + t].clone() - ai.clone() * res_at[t][gi].clone();
                }
                rows.push(row);
                rhs.push(K::zero());
            }
        }
        for i in j..l {
            let mut row = vec![K::zero(); unknowns];
            for t in 0..b {
                row[i * b + t] = plus[t].coeff(n)?;
            }
            rows.push(row);
            rhs.push(if i == j { K::one() } else { K::zero() });
        }
        for i in 0..j {
            let mut row = vec![K::zero(); unknowns];
            for t in 0..b {
                row[i * b + t] = minus[t].coeff(-n)?;
            }
            rows.push(row);
            rhs.push(K::zero());
        }
        let a = Mat::from_rows(rows);
        if a.rows != unknowns {
            // Over/underdetermined away from genus one; solve still handles
            // consistent systems, but flag the unexpected shape.
            if a.rows < unknowns {
                return Err(KnError::NonGenericData(format!(
                    "system with {} rows for {unknowns} unknowns",
                    a.rows
                )));
            }
        }
        let x = solve(&a, &rhs, tol.max(1e-12)).map_err(|_| {
            KnError::NonGenericData(format!("rank-deficient normalization system for n={n}"))
        })?;
        // Assemble the column.
        let mut comps = Vec::with_capacity(l);
        let mut exp_plus = Vec::with_capacity(l);
        let mut exp_minus = Vec::with_capacity(l);
        let mut residues: Vec<Vec<K>> = vec![Vec::new(); gl];
        for i in 0..l {
            let mut f = ansatz[0].zero_like();
            let mut ep: Option<LaurentSeries<K>> = None;
            let mut em: Option<LaurentSeries<K>> = None;
            for t in 0..b {
                let c = x[i * b + t].clone();
                if Coeff::is_zero(&c) {
                    continue;
                }
                f = f.add(&K::scale_fn(&ansatz[t], &c));
                let sp = plus[t].clone().scale(&c);
                let sm = minus[t].clone().scale(&c);
                ep = Some(match ep {
                    None => sp,
                    Some(acc) => acc.add(&sp),
                });
                em = Some(match em {
                    None => sm,
                    Some(acc) => acc.add(&sm),
                });
            }
            for gi in 0..gl {
                let mut r = K::zero();
                for t in 0..b {
                    r = r + x[i * b + t].clone() * res_at[t][gi].clone();
                }
                residues[gi].push(r);
            }
            comps.push(f);
            exp_plus.push(ep.unwrap_or_else(|| LaurentSeries::zero(n + order)));
            exp_minus.push(em.unwrap_or_else(|| LaurentSeries::zero(-n + order)));
        }
        let res_c64: Vec<Vec<C64>> = residues
            .iter()
            .map(|v| v.iter().map(k_to_c64).collect())
            .collect();
        columns.push(PsiColumn {
            function: KNVectorFunction {
                components: comps,
                residues: res_c64,
            },
            exp_plus,
            exp_minus,
        });
    }
    Ok(PsiMatrix {
        n,
        rank: l,
        columns,
    })
}

fn alpha_to_k<K: Coeff>(a: &C64) -> K {
    if K::EXACT {
        // Exact contexts carry no Tyurin data (genus zero has none), so this
        // path only converts exact zeros.
        assert!(a.norm() == 0.0, "exact regime cannot absorb numeric alphas");
        K::zero()
    } else {
        k_from_c64(*a)
    }
}

fn k_from_c64<K: Coeff>(v: C64) -> K {
    // Only instantiated at K = C64; the exact regime never passes through.
    let boxed: Box<dyn std::any::Any> = Box::new(v);
    match boxed.downcast::<K>() {
        Ok(k) => *k,
        Err(_) => panic!("numeric conversion outside the numeric regime"),
    }
}

fn k_to_c64<K: Coeff>(v: &K) -> C64 {
    let boxed: Box<dyn std::any::Any> = Box::new(v.clone());
    match boxed.downcast::<C64>() {
        Ok(c) => *c,
        Err(_) => {
            // Exact scalars embed through their float image.
            let boxed: Box<dyn std::any::Any> = Box::new(v.clone());
            match boxed.downcast::<GaussQ>() {
                Ok(g) => g.to_c64(),
                Err(_) => panic!("unsupported scalar type"),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

/// Rank data for the uniqueness statement: the raw Tyurin system has
/// nullity `l`, and adding the triangular normalization rows drops it to 0.
#[derive(Debug, Clone)]
pub struct PsiDiagnostics {
    pub raw_singular_values: Vec<f64>,
    pub raw_nullity: usize,
    pub normalized_nullity: usize,
    pub max_tyurin_violation: f64,
}

pub fn psi_diagnostics(basis: &PsiBasis<C64>, n: i64, sv_tol: f64) -> Result<PsiDiagnostics> {
    let curve = basis.curve();
    let l = basis.rank();
    let order = 8;
    let mut divisor: Vec<(CurvePoint, i64)> = basis
        .bundle
        .points
        .iter()
        .map(|&p| (CurvePoint::Torus(p), 1))
        .collect();
    if n != 0 {
        divisor.push((curve.p_minus(), n));
        divisor.push((curve.p_plus(), -n));
    }
    let ansatz = rr_space_basis(curve, &divisor)?;
    let b = ansatz.len();
    let res_at: Vec<Vec<C64>> = ansatz
        .iter()
        .map(|f| {
            basis
                .bundle
                .points
                .iter()
                .map(|&g| {
                    let e = f.expansion_at(curve, &CurvePoint::Torus(g), 4)?.numeric();
                    e.coeff(-1)
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let plus: Vec<LaurentSeries<C64>> = ansatz
        .iter()
        .map(|f| Ok(f.expansion_at(curve, &curve.p_plus(), order)?.numeric()))
        .collect::<Result<_>>()?;
    let minus: Vec<LaurentSeries<C64>> = ansatz
        .iter()
        .map(|f| Ok(f.expansion_at(curve, &curve.p_minus(), order)?.numeric()))
        .collect::<Result<_>>()?;

    let unknowns = l * b;
    // Raw system: Tyurin rows only.
    let mut raw_rows: Vec<Vec<C64>> = Vec::new();
    for (gi, alpha) in basis.bundle.alphas.iter().enumerate() {
        let pivot = alpha
            .iter()
            .position(|a| a.norm() > 1e-9)
            .ok_or_else(|| KnError::NonGenericData("zero Tyurin vector".into()))?;
        for i in 0..l {
            if i == pivot {
                continue;
            }
            let mut row = vec![C64::new(0.0, 0.0); unknowns];
            for t in 0..b {
                row[i * b + t] = res_at[t][gi];
                row[pivot * b + t] -= alpha[i] * res_at[t][gi];
            }
            raw_rows.push(row);
        }
    }
    let raw = Mat::from_rows(raw_rows.clone());
    let sv = singular_values(&raw);
    let positive = sv.iter().filter(|&&s| s > sv_tol).count();
    let raw_nullity = unknowns - positive;

    // Normalized homogeneous system for column j = 0.
    let mut rows = raw_rows;
    for i in 0..l {
        let mut row = vec![C64::new(0.0, 0.0); unknowns];
        for t in 0..b {
            row[i * b + t] = plus[t].coeff(n)?;
        }
        rows.push(row);
    }
    // Column 0 has no P- rows for i < 0; use the full triangular set of the
    // last column to exercise both ends.
    for i in 0..(l - 1) {
        let mut row = vec![C64::new(0.0, 0.0); unknowns];
        for t in 0..b {
            row[i * b + t] = minus[t].coeff(-n)?;
        }
        rows.push(row);
    }
    let full = Mat::from_rows(rows);
    let normalized_nullity = unknowns - rank(&full, sv_tol);

    // Tyurin violation of the built columns.
    let psi = basis.psi(n)?;
    let mut worst: f64 = 0.0;
    for col in &psi.columns {
        if let Some(v) = crate::bundle::max_tyurin_violation(&col.function, &basis.bundle) {
            worst = worst.max(v);
        }
    }
    Ok(PsiDiagnostics {
        raw_singular_values: sv,
        raw_nullity,
        normalized_nullity,
        max_tyurin_violation: worst,
    })
}
