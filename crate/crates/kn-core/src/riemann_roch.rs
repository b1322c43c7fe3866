//! Bases of the spaces `L(E) = { f : (f) + E >= 0 }` for signed divisors
//! on both curve backends.
//!
//! Genus zero is exact: `L(E)` is spanned by `h(z) * prod (z-p)^{-max(m_p,0)}`
//! over a polynomial range fixed by the degree at infinity.
//!
//! Genus one builds a chain of sigma-product functions with strictly
//! increasing exact pole prefixes, which makes them independent by
//! inspection of pole orders; an evaluation-matrix rank check certifies the
//! result. Free zeros come from a deterministic low-discrepancy sequence and
//! one zero absorbs the Abel defect.

use crate::curve::{CurveModel, CurvePoint, RatPoint, CONGRUENCE_TOL};
use crate::elliptic::EllipticCtx;
use crate::error::{KnError, Result};
use crate::field::{Coeff, GaussQ, C64};
use crate::linalg::{rank, Mat};
use crate::meromorphic::{
    function_from_divisor_genus1, MeromorphicFunction, RationalAtom, SigmaAtom,
};
use std::sync::Arc;

/// Basis of `L(divisor)`; entries `(point, mult)` with signed multiplicity
/// (positive allows poles, negative demands zeros).
pub fn rr_space_basis(
    curve: &CurveModel,
    divisor: &[(CurvePoint, i64)],
) -> Result<Vec<MeromorphicFunction>> {
    match curve {
        CurveModel::Rational { .. } => {
            let mut d: Vec<(RatPoint, i64)> = Vec::new();
            for (p, m) in divisor {
                match p {
                    CurvePoint::Rational(rp) => d.push((rp.clone(), *m)),
                    _ => return Err(KnError::ShapeMismatch("expected rational points".into())),
                }
            }
            rr_basis_genus0(&d)
        }
        CurveModel::Elliptic { .. } => {
            let ctx = Arc::new(EllipticCtx::new(curve.lattice()?.clone()));
            let mut d: Vec<(C64, i64)> = Vec::new();
            for (p, m) in divisor {
                d.push((p.as_torus()?, *m));
            }
            let basis = rr_basis_genus1(&ctx, &d)?;
            verify_independence_numeric(&ctx, &basis, &d)?;
            Ok(basis)
        }
    }
}

pub fn rr_basis_genus0(divisor: &[(RatPoint, i64)]) -> Result<Vec<MeromorphicFunction>> {
    // Merge multiplicities per point.
    let mut finite: Vec<(GaussQ, i64)> = Vec::new();
    let mut m_inf: i64 = 0;
    for (p, m) in divisor {
        match p {
            RatPoint::Infinity => m_inf += m,
            RatPoint::Finite(a) => {
                if let Some(e) = finite.iter_mut().find(|(b, _)| b == a) {
                    e.1 += m;
                } else {
                    finite.push((a.clone(), *m));
                }
            }
        }
    }
    // f = h(z) * prod_{m_p > 0} (z-p)^{-m_p} * prod_{m_p < 0} (z-p)^{-m_p},
    // with deg h <= t = deg(E); the fixed factor already carries order
    // -sum(max(m,0)) + sum(-min(m,0)) at infinity.
    let deg: i64 = finite.iter().map(|&(_, m)| m).sum::<i64>() + m_inf;
    if deg < 0 {
        return Ok(Vec::new());
    }
    let base_factors: Vec<(GaussQ, i64)> = finite.iter().map(|(a, m)| (a.clone(), -m)).collect();
    let mut basis = Vec::new();
    for k in 0..=deg {
        let mut factors = base_factors.clone();
        if k > 0 {
            factors.push((GaussQ::zero(), k));
        }
        let atom = RationalAtom {
            constant: GaussQ::one(),
            factors,
        };
        basis.push(MeromorphicFunction::Rational(vec![(GaussQ::one(), atom)]));
    }
    Ok(basis)
}

/// Deterministic generic point on the torus, away from a list of bad points.
fn generic_point(ctx: &EllipticCtx, avoid: &[C64], salt: usize) -> Result<C64> {
    let lat = &ctx.lattice;
    let scale = lat.omega1.norm().min(lat.omega2.norm());
    for k in 0..200 {
        let t = 0.618_033_988_749_894_8 * ((salt + k) as f64 + 1.0) + 0.137;
        let s = 0.414_213_562_373_095_0 * ((salt + k) as f64 + 1.0) + 0.291;
        let z = lat.omega1 * (t - t.floor()) + lat.omega2 * (s - s.floor());
        if avoid
            .iter()
            .all(|&a| lat.torus_distance(z, a) > 0.02 * scale)
        {
            return Ok(z);
        }
    }
    Err(KnError::SpecialDivisorUnresolved(
        "could not place a generic zero".into(),
    ))
}

pub fn rr_basis_genus1(
    ctx: &Arc<EllipticCtx>,
    divisor: &[(C64, i64)],
) -> Result<Vec<MeromorphicFunction>> {
    let lat = &ctx.lattice;
    // Split into pole part (positive) and required zeros (negative).
    let mut poles: Vec<C64> = Vec::new();
    let mut req_zeros: Vec<C64> = Vec::new();
    for &(p, m) in divisor {
        if m > 0 {
            for _ in 0..m {
                poles.push(p);
            }
        } else {
            for _ in 0..(-m) {
                req_zeros.push(p);
            }
        }
    }
    let deg = poles.len() as i64 - req_zeros.len() as i64;
    if deg <= 0 {
        if deg == 0 && req_zeros.is_empty() {
            return Ok(vec![constant_one(ctx)]);
        }
        return Err(KnError::SpecialDivisorUnresolved(format!(
            "divisor degree {deg} is below the generic range"
        )));
    }
    let nz = req_zeros.len();
    let total = poles.len();
    let mut avoid: Vec<C64> = poles.clone();
    avoid.extend_from_slice(&req_zeros);

    let mut basis: Vec<MeromorphicFunction> = Vec::new();
    let start_t = if nz == 0 {
        basis.push(constant_one(ctx));
        nz + 2
    } else {
        nz + 1
    };
    for t in start_t..=total {
        // Pole prefix of degree t; merged multiplicities for the divisor call.
        let prefix = &poles[..t];
        let mut attempt = 0usize;
        let f = loop {
            let free = t - nz - 1;
            let mut zeros: Vec<C64> = req_zeros.clone();
            for j in 0..free {
                zeros.push(generic_point(ctx, &avoid, 7 * t + 13 * j + 101 * attempt)?);
            }
            // Abel-fixing zero.
            let sum_p: C64 = prefix.iter().sum();
            let sum_z: C64 = zeros.iter().sum();
            let (zstar, _, _) = lat.reduce(sum_p - sum_z);
            // The forced zero must not cancel a pole.
            let collides = prefix
                .iter()
                .any(|&p| lat.torus_distance(zstar, p) < 1e-6);
            if !collides {
                zeros.push(zstar);
                let zz: Vec<(C64, i64)> = zeros.iter().map(|&z| (z, 1)).collect();
                let pp: Vec<(C64, i64)> = merge_points(lat, prefix);
                break function_from_divisor_genus1(ctx, &zz, &pp, C64::new(1.0, 0.0))?;
            }
            if free == 0 {
                return Err(KnError::SpecialDivisorUnresolved(
                    "forced Abel zero cancels a pole".into(),
                ));
            }
            attempt += 1;
            if attempt > 50 {
                return Err(KnError::SpecialDivisorUnresolved(
                    "no collision-free zero placement found".into(),
                ));
            }
        };
        basis.push(normalize_scale(ctx, f));
    }
    Ok(basis)
}

fn merge_points(lat: &crate::curve::Lattice, pts: &[C64]) -> Vec<(C64, i64)> {
    let mut out: Vec<(C64, i64)> = Vec::new();
    for &p in pts {
        if let Some(e) = out
            .iter_mut()
            .find(|(q, _)| lat.torus_distance(*q, p) < CONGRUENCE_TOL)
        {
            e.1 += 1;
        } else {
            out.push((p, 1));
        }
    }
    out
}

fn constant_one(ctx: &Arc<EllipticCtx>) -> MeromorphicFunction {
    MeromorphicFunction::Elliptic(vec![(
        C64::new(1.0, 0.0),
        SigmaAtom {
            ctx: ctx.clone(),
            constant: C64::new(1.0, 0.0),
            factors: vec![],
        },
    )])
}

/// Rescales a basis function to unit magnitude at a deterministic sample
/// point, keeping the linear solves downstream well conditioned.
fn normalize_scale(ctx: &Arc<EllipticCtx>, f: MeromorphicFunction) -> MeromorphicFunction {
    let lat = &ctx.lattice;
    for k in 0..20 {
        let t = 0.577_215_664_901_532_9 * (k as f64 + 1.0) + 0.05;
        let s = 0.718_281_828_459_045_2 * (k as f64 + 1.0) + 0.41;
        let z = lat.omega1 * (t - t.floor()) + lat.omega2 * (s - s.floor());
        if let Ok(v) = f.eval_c64(z) {
            if v.norm() > 1e-8 && v.norm().is_finite() {
                return f.scale_numeric(C64::new(1.0 / v.norm(), 0.0));
            }
        }
    }
    f
}

/// Certifies linear independence by the rank of an evaluation matrix at
/// `dim + 5` deterministic sample points.
fn verify_independence_numeric(
    ctx: &Arc<EllipticCtx>,
    basis: &[MeromorphicFunction],
    divisor: &[(C64, i64)],
) -> Result<()> {
    if basis.is_empty() {
        return Ok(());
    }
    let lat = &ctx.lattice;
    let avoid: Vec<C64> = divisor.iter().map(|&(p, _)| p).collect();
    let n = basis.len();
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut k = 0usize;
    while rows.len() < n + 5 && k < 200 {
        let t = 0.692_823_1 * (k as f64 + 1.0) + 0.171;
        let s = 0.276_393_2 * (k as f64 + 1.0) + 0.083;
        k += 1;
        let z = lat.omega1 * (t - t.floor()) + lat.omega2 * (s - s.floor());
        if avoid
            .iter()
            .any(|&a| lat.torus_distance(z, a) < 0.05 * lat.omega1.norm().min(lat.omega2.norm()))
        {
            continue;
        }
        let mut row = Vec::with_capacity(n);
        let mut ok = true;
        for f in basis {
            match f.eval_c64(z) {
                Ok(v) if v.norm().is_finite() => row.push(v),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            rows.push(row);
        }
    }
    let m = Mat::from_rows(rows);
    let r = rank(&m, 1e-8);
    if r < n {
        return Err(KnError::SpecialDivisorUnresolved(format!(
            "evaluation rank {r} below dimension {n}"
        )));
    }
    Ok(())
}
