//! The library-level verification battery behind the `full-suite` command:
//! a curated set of checks with one record per verdict, deterministic for a
//! fixed configuration and seed.

use crate::affine::{sl2_e, sl2_f, sl2_h, BandedOperator, GRepresentation, OpKind};
use crate::bundle::random_framed_bundle;
use crate::curve::CurveModel;
use crate::equivalence::{
    check_intertwining, commutant_dimension, FermionRepData, WedgeIsomorphism,
};
use crate::error::{KnError, Result};
use crate::field::{Coeff, GaussQ, C64};
use crate::linalg::{det, Mat};
use crate::report::VerificationReport;
use crate::vector_basis::{index_map, psi_diagnostics, PsiBasis, VectorScalar};
use crate::wedge::{
    monomials_with_head_in, vacuum_projection, vacuum_projection_formula, verify_commutators,
    WedgeVector,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub rank: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub c_table: Option<ExternalCTable>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            rank: 2,
            seed: 7,
            tolerance: 1e-9,
            c_table: None,
        }
    }
}

/// An action-constant table in interchange form, as emitted by
/// `vector-basis` and consumed by `full-suite --c-table`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExternalCTable {
    pub l: usize,
    pub entries: Vec<CTableEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CTableEntry {
    pub m: i64,
    pub n: i64,
    pub j: usize,
    pub k: i64,
    pub jp: usize,
    pub c: [f64; 2],
}

impl ExternalCTable {
    pub fn from_basis<K: VectorScalar>(
        basis: &PsiBasis<K>,
        m_range: (i64, i64),
        n_range: (i64, i64),
    ) -> Result<Self> {
        let mut entries = Vec::new();
        for m in m_range.0..=m_range.1 {
            for n in n_range.0..=n_range.1 {
                let table = basis.action_constants(m, n)?;
                for (j, list) in table.iter().enumerate() {
                    for (k, jp, c) in list {
                        let c64 = to_c64_generic(c);
                        entries.push(CTableEntry {
                            m,
                            n,
                            j,
                            k: *k,
                            jp: *jp,
                            c: [c64.re, c64.im],
                        });
                    }
                }
            }
        }
        Ok(ExternalCTable {
            l: basis.rank(),
            entries,
        })
    }

    /// Flattened scalar operator of `A_m` from the stored entries.
    pub fn a_operator(&self, m: i64) -> Result<BandedOperator<C64>> {
        let l = self.l;
        let mut cols: BTreeMap<i64, Vec<(i64, C64)>> = BTreeMap::new();
        let mut n_lo = i64::MAX;
        let mut n_hi = i64::MIN;
        for e in self.entries.iter().filter(|e| e.m == m) {
            n_lo = n_lo.min(e.n);
            n_hi = n_hi.max(e.n);
            for i in 1..=l {
                let col = index_map(l, e.n, e.j, i)?;
                cols.entry(col)
                    .or_default()
                    .push((index_map(l, e.k, e.jp, i)?, C64::new(e.c[0], e.c[1])));
            }
        }
        if n_lo > n_hi {
            return Err(KnError::WindowTooSmall(format!(
                "table holds no entries for m={m}"
            )));
        }
        let lu = l as i64;
        Ok(BandedOperator {
            band_lo: lu * lu * m,
            band_hi: lu * lu * m + lu * lu * 3,
            kind: OpKind::Columns {
                cols,
                domain: (index_map(l, n_lo, l - 1, 1)?, index_map(l, n_hi, 0, l)?),
            },
        })
    }
}

fn to_c64_generic<K: Coeff + 'static>(v: &K) -> C64 {
    let boxed: Box<dyn std::any::Any> = Box::new(v.clone());
    if let Ok(c) = boxed.downcast::<C64>() {
        return *c;
    }
    let boxed: Box<dyn std::any::Any> = Box::new(v.clone());
    if let Ok(g) = boxed.downcast::<GaussQ>() {
        return g.to_c64();
    }
    panic!("unsupported scalar type");
}

/// Runs the battery appropriate to the curve genus.
pub fn full_suite(curve: &CurveModel, cfg: &SuiteConfig) -> Result<VerificationReport> {
    match curve.genus() {
        0 => suite_genus0(curve, cfg),
        _ => suite_genus1(curve, cfg),
    }
}

fn record_bool(report: &mut VerificationReport, name: &str, inputs: String, ok: bool, dev: f64) {
    report.record(
        name,
        inputs,
        "pass".into(),
        if ok { "pass".into() } else { "fail".into() },
        dev,
        ok,
    );
}

fn seeded_rational_gamma(seed: u64) -> Mat<GaussQ> {
    // Small deterministic integer matrix with nonzero determinant.
    let mut vals = [(1i64, 1i64), (2, 1), (1, 3), (0, 1)];
    let s = seed as i64;
    vals[0].0 = 1 + (s % 3);
    vals[1].0 = 2 + (s % 5);
    vals[2].0 = 1 + ((s / 3) % 4);
    vals[3].0 = 3 + ((s / 7) % 3);
    let mut g = Mat::zeros(2, 2);
    g[(0, 0)] = GaussQ::from_int(vals[0].0);
    g[(0, 1)] = GaussQ::from_int(vals[1].0);
    g[(1, 0)] = GaussQ::from_int(vals[2].0);
    g[(1, 1)] = GaussQ::from_int(vals[3].0);
    if Coeff::is_zero(&det(&g)) {
        g[(1, 1)] = g[(1, 1)].clone() + GaussQ::from_int(1);
    }
    g
}

fn suite_genus0(curve: &CurveModel, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("full-suite-genus0", cfg.seed, cfg.tolerance);
    let bundle = random_framed_bundle(curve, cfg.rank, cfg.seed)?;
    let basis = Arc::new(PsiBasis::new_exact(curve.clone(), bundle)?);
    let scalar = &basis.scalar;

    // Scalar products are strictly graded with unit coefficients.
    let mut graded = true;
    for m in -4i64..=4 {
        for n in -4i64..=4 {
            let c = scalar.structure_constants(m, n, scalar.default_window(m, n))?;
            graded &= c.len() == 1 && c[&(m + n)] == GaussQ::from_int(1);
        }
    }
    record_bool(&mut report, "scalar-grading", "|m|,|n| <= 4".into(), graded, 0.0);

    // Cocycle residues match the closed form res(z^n d z^m) = m d_{n+m,0}.
    let mut cocycle_ok = true;
    for n in -6i64..=6 {
        for m in -6i64..=6 {
            let r = scalar.residue_pair(n, m)?;
            let want = if n + m == 0 {
                GaussQ::from_int(m)
            } else {
                GaussQ::from_int(0)
            };
            cocycle_ok &= r == want;
        }
    }
    record_bool(&mut report, "cocycle-closed-form", "|m|,|n| <= 6".into(), cocycle_ok, 0.0);

    // Psi matrices are monomial identities; the action is a pure shift.
    let mut psi_ok = true;
    for n in -3i64..=3 {
        let psi = basis.psi(n)?;
        psi_ok &= psi.xi_plus0()? == Mat::identity(cfg.rank)
            && psi.xi_minus0()? == Mat::identity(cfg.rank);
    }
    record_bool(&mut report, "psi-identity", "|n| <= 3".into(), psi_ok, 0.0);

    let mut kron = true;
    for m in -3i64..=3 {
        for n in -3i64..=3 {
            for (j, entries) in basis.action_constants(m, n)?.iter().enumerate() {
                kron &= entries.len() == 1
                    && entries[0] == (m + n, j, GaussQ::from_int(1));
            }
        }
    }
    record_bool(&mut report, "action-kronecker", "|m|,|n| <= 3".into(), kron, 0.0);

    // Regularized commutation relations on a small window.
    let sweep = verify_commutators(-4, 4, 0);
    record_bool(
        &mut report,
        "wedge-commutators",
        format!("window [-4,4], {} monomials", sweep.monomials),
        sweep.passed(),
        sweep.failures.len() as f64,
    );

    // Charge operator eigenvalue -M on every vacuum.
    let id = BandedOperator::<GaussQ>::identity();
    let mut charge_ok = true;
    for m in -6i64..=6 {
        charge_ok &= vacuum_projection(&id, m)? == GaussQ::from_int(-m);
    }
    record_bool(&mut report, "charge-operator", "M in [-6,6]".into(), charge_ok, 0.0);

    // Intertwining under a framing change with conjugated tau (rank 2).
    if cfg.rank == 2 {
        let rep1 = FermionRepData::new(basis.clone(), GRepresentation::sl2(2))?;
        let g = seeded_rational_gamma(cfg.seed);
        let tau2 = rep1.tau.conjugated(&g, 0.0)?;
        let rep2 = FermionRepData::new(basis.clone(), tau2)?;
        let iso = WedgeIsomorphism::TildeGamma(g);
        let elements = vec![
            (sl2_e::<GaussQ>(), 0i64),
            (sl2_f::<GaussQ>(), 1),
            (sl2_h::<GaussQ>(), -1),
        ];
        let vectors: Vec<WedgeVector<GaussQ>> = monomials_with_head_in(0, -3, 3)
            .into_iter()
            .take(40)
            .map(|m| WedgeVector::single(m, GaussQ::from_int(1)))
            .collect();
        let r = check_intertwining(&rep1, &rep2, &iso, &elements, &vectors, (-9, 9), 0.0)?;
        record_bool(
            &mut report,
            "framing-intertwining",
            format!("{} checks", r.checks),
            r.passed(),
            r.max_deviation,
        );
    }

    // Schur commutant dimension 1 for the irreducibles.
    let mut schur_ok = true;
    for d in 2..=4usize {
        schur_ok &= commutant_dimension(&GRepresentation::<GaussQ>::sl2(d), 0.0) == 1;
    }
    record_bool(&mut report, "schur-nullity", "dims 2..4".into(), schur_ok, 0.0);

    // External or self-computed C-table: the function action commutes.
    let table = match &cfg.c_table {
        Some(t) => t.clone(),
        None => ExternalCTable::from_basis(&basis, (-2, 2), (-6, 6))?,
    };
    check_table_commutativity(&mut report, &table, cfg.tolerance);

    Ok(report)
}

fn suite_genus1(curve: &CurveModel, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("full-suite-genus1", cfg.seed, cfg.tolerance);
    let bundle = random_framed_bundle(curve, cfg.rank, cfg.seed)?;
    let basis = Arc::new(PsiBasis::new_numeric(curve.clone(), bundle)?);
    let scalar = &basis.scalar;
    let tol = cfg.tolerance.max(1e-12);

    // Element construction certifies its own orders; record the sweep.
    let mut orders_ok = true;
    for m in -3i64..=3 {
        orders_ok &= scalar.element(m).is_ok();
    }
    record_bool(&mut report, "scalar-orders", "|m| <= 3".into(), orders_ok, 0.0);

    // Product expansions close in the basis with unit leading coefficient.
    let mut worst = 0.0f64;
    let mut prod_ok = true;
    for m in -2i64..=2 {
        for n in -2i64..=2 {
            match scalar.structure_constants(m, n, scalar.default_window(m, n)) {
                Ok(c) => {
                    let lead = to_c64_generic(&c[&(m + n)]);
                    let dev = (lead - C64::new(1.0, 0.0)).norm();
                    worst = worst.max(dev);
                    prod_ok &= dev < 1e-7;
                }
                Err(_) => prod_ok = false,
            }
        }
    }
    record_bool(&mut report, "scalar-products", "|m|,|n| <= 2".into(), prod_ok, worst);

    // Quasigrading band: R = 0, S <= 3 (S = 3 only from strip pairs).
    let q = scalar.verify_quasigrading(3, 1e-8)?;
    record_bool(
        &mut report,
        "quasigrading-band",
        format!("R={}, S={}", q.r_shift, q.s_shift),
        q.r_shift == 0 && q.s_shift <= 3,
        q.s_shift as f64,
    );

    // Uniqueness nullities and Tyurin constraints of the solved columns.
    let d = psi_diagnostics(&basis, 1, 1e-8)?;
    record_bool(
        &mut report,
        "psi-nullities",
        format!(
            "raw={}, normalized={}",
            d.raw_nullity, d.normalized_nullity
        ),
        d.raw_nullity == cfg.rank && d.normalized_nullity == 0,
        d.max_tyurin_violation,
    );
    record_bool(
        &mut report,
        "tyurin-constraints",
        "n = 1".into(),
        d.max_tyurin_violation < 1e-7,
        d.max_tyurin_violation,
    );

    // Action band bounds.
    let mut band_ok = true;
    for m in -2i64..=2 {
        for n in -2i64..=2 {
            let gbar = scalar.gbar(m);
            for entries in basis.action_constants(m, n)? {
                for (k, _, c) in entries {
                    if c.norm() > 1e-8 {
                        band_ok &= k >= m + n && k <= m + n + gbar;
                    }
                }
            }
        }
    }
    record_bool(&mut report, "action-band", "|m|,|n| <= 2".into(), band_ok, 0.0);

    // Vacuum weights: the wedge projection equals the diagonal-sum formula.
    let mut vac_ok = true;
    let mut vac_dev = 0.0f64;
    for m in [-1i64, 0] {
        let op = crate::affine::a_operator(&basis, m, (-6, 4))?;
        for big_m in -3i64..=-1 {
            let wedge = vacuum_projection(&op, big_m)?;
            let formula = vacuum_projection_formula(&op, big_m)?;
            let dev = (wedge - formula).norm();
            vac_dev = vac_dev.max(dev);
            vac_ok &= dev < 1e-7;
        }
    }
    record_bool(
        &mut report,
        "vacuum-weights",
        "m in {-1,0}, M in [-3,-1]".into(),
        vac_ok,
        vac_dev,
    );

    // Commutator sweep is genus independent; run a compact window.
    let sweep = verify_commutators(-3, 3, 0);
    record_bool(
        &mut report,
        "wedge-commutators",
        format!("window [-3,3], {} monomials", sweep.monomials),
        sweep.passed(),
        sweep.failures.len() as f64,
    );

    // External or self-computed C-table commutes.
    let table = match &cfg.c_table {
        Some(t) => t.clone(),
        None => ExternalCTable::from_basis(&basis, (-2, 2), (-5, 5))?,
    };
    check_table_commutativity(&mut report, &table, tol);

    Ok(report)
}

/// The images of `A_m` and `A_n` must commute as banded operators; a
/// corrupted table shows up here with the failing pair named.
fn check_table_commutativity(report: &mut VerificationReport, table: &ExternalCTable, tol: f64) {
    let pairs = [(0i64, 1i64), (1, -1), (-1, 2), (2, -2)];
    for (m, n) in pairs {
        let name = format!("c-table-commutator(m={m},n={n})");
        let result = (|| -> Result<f64> {
            let pm = table.a_operator(m)?;
            let pn = table.a_operator(n)?;
            // Interior window where both compositions stay inside the
            // certified domains.
            let dm = pm.domain().unwrap();
            let dn = pn.domain().unwrap();
            let lo = dm
                .0
                .max(dn.0)
                .max(dm.0 - pn.band_lo)
                .max(dn.0 - pm.band_lo);
            let hi = dm
                .1
                .min(dn.1)
                .min(dm.1 - pn.band_hi)
                .min(dn.1 - pm.band_hi);
            if lo > hi {
                return Err(KnError::WindowTooSmall("table too narrow".into()));
            }
            let comm = crate::affine::operator_commutator(&pm, &pn, (lo, hi))?;
            let mut worst = 0.0f64;
            for col in lo..=hi {
                for (_, c) in comm.column(col)? {
                    worst = worst.max(c.norm());
                }
            }
            Ok(worst)
        })();
        match result {
            Ok(worst) => {
                let ok = worst < tol.max(1e-12) * 1e4;
                report.record(
                    &name,
                    format!("pair ({m},{n})"),
                    "commuting".into(),
                    if ok { "commuting".into() } else { "violation".into() },
                    worst,
                    ok,
                );
            }
            Err(e) => {
                report.record(
                    &name,
                    format!("pair ({m},{n})"),
                    "commuting".into(),
                    format!("error: {e}"),
                    f64::INFINITY,
                    false,
                );
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{make_elliptic_curve, make_rational_curve};

    #[test]
    fn genus0_suite_passes() {
        let report = full_suite(&make_rational_curve(), &SuiteConfig::default()).unwrap();
        assert!(report.passed(), "failure: {:?}", report.first_failure());
    }

    #[test]
    fn genus1_suite_passes() {
        let curve = make_elliptic_curve(
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.17, 0.23),
            C64::new(0.61, 0.54),
        )
        .unwrap();
        let cfg = SuiteConfig {
            rank: 1,
            ..Default::default()
        };
        let report = full_suite(&curve, &cfg).unwrap();
        assert!(report.passed(), "failure: {:?}", report.first_failure());
    }

    #[test]
    fn corrupted_table_fails_with_named_commutator() {
        let curve = make_rational_curve();
        let bundle = random_framed_bundle(&curve, 2, 0).unwrap();
        let basis = Arc::new(PsiBasis::new_exact(curve.clone(), bundle).unwrap());
        let mut table = ExternalCTable::from_basis(&basis, (-2, 2), (-6, 6)).unwrap();
        // Corrupt a coefficient near the middle of the covered window.
        let idx = table
            .entries
            .iter()
            .position(|e| e.m == 1 && e.n == 0 && e.j == 0)
            .unwrap();
        table.entries[idx].c = [5.5, -1.0];
        let cfg = SuiteConfig {
            c_table: Some(table),
            ..Default::default()
        };
        let report = full_suite(&curve, &cfg).unwrap();
        assert!(!report.passed());
        let f = report.first_failure().unwrap();
        assert!(f.name.starts_with("c-table-commutator"), "{}", f.name);
    }
}
