//! Small dense linear algebra over an arbitrary coefficient field.
//!
//! The solvers use full pivoting with deterministic tie-breaking by maximal
//! approximate magnitude; rank decisions use exact vanishing for exact
//! scalars and a caller-supplied tolerance for floating-point ones.

use crate::error::{KnError, Result};
use crate::field::{Coeff, Field, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<K> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<K>,
}

impl<K: Coeff> Mat<K> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![K::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = K::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<K>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c));
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn row(&self, i: usize) -> &[K] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn matvec(&self, x: &[K]) -> Vec<K> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = K::zero();
                for j in 0..self.cols {
                    acc = acc + self[(i, j)].clone() * x[j].clone();
                }
                acc
            })
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out: Mat<K> = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)].clone();
                if Coeff::is_zero(&a) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * other[(k, j)].clone();
                }
            }
        }
        out
    }
}

impl<K> std::ops::Index<(usize, usize)> for Mat<K> {
    type Output = K;
    fn index(&self, (i, j): (usize, usize)) -> &K {
        &self.data[i * self.cols + j]
    }
}

impl<K> std::ops::IndexMut<(usize, usize)> for Mat<K> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut K {
        &mut self.data[i * self.cols + j]
    }
}

/// Row echelon form with full pivoting. Returns the pivot list
/// `(row, col)` in elimination order; `tol` gates pivot viability for
/// floating-point scalars.
fn eliminate<K: Field>(a: &mut Mat<K>, tol: f64) -> Vec<(usize, usize)> {
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut used_rows = vec![false; a.rows];
    let mut used_cols = vec![false; a.cols];
    loop {
        // Deterministic full pivot: maximal magnitude, ties by (row, col).
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..a.rows {
            if used_rows[i] {
                continue;
            }
            for j in 0..a.cols {
                if used_cols[j] {
                    continue;
                }
                let v = &a[(i, j)];
                if v.is_negligible(tol) {
                    continue;
                }
                let m = v.magnitude();
                match best {
                    Some((_, _, bm)) if bm >= m => {}
                    _ => best = Some((i, j, m)),
                }
            }
        }
        let Some((pi, pj, _)) = best else { break };
        used_rows[pi] = true;
        used_cols[pj] = true;
        let pv = a[(pi, pj)].clone();
        let inv = pv.inv();
        for j in 0..a.cols {
            a[(pi, j)] = a[(pi, j)].clone() * inv.clone();
        }
        for i in 0..a.rows {
            if i == pi {
                continue;
            }
            let f = a[(i, pj)].clone();
            if Coeff::is_zero(&f) {
                continue;
            }
            for j in 0..a.cols {
                a[(i, j)] = a[(i, j)].clone() - f.clone() * a[(pi, j)].clone();
            }
        }
        pivots.push((pi, pj));
    }
    pivots
}

pub fn rank<K: Field>(a: &Mat<K>, tol: f64) -> usize {
    let mut m = a.clone();
    eliminate(&mut m, tol).len()
}

/// Solves `A x = b` for square `A`; errors when `A` is singular at `tol`.
pub fn solve<K: Field>(a: &Mat<K>, b: &[K], tol: f64) -> Result<Vec<K>> {
    assert_eq!(a.rows, b.len());
    let mut m = Mat::zeros(a.rows, a.cols + 1);
    for i in 0..a.rows {
        for j in 0..a.cols {
            m[(i, j)] = a[(i, j)].clone();
        }
        m[(i, a.cols)] = b[i].clone();
    }
    // Eliminate only on the coefficient columns.
    let mut pivots = Vec::new();
    let mut used_rows = vec![false; m.rows];
    let mut used_cols = vec![false; a.cols];
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..m.rows {
            if used_rows[i] {
                continue;
            }
            for j in 0..a.cols {
                if used_cols[j] {
                    continue;
                }
                let v = &m[(i, j)];
                if v.is_negligible(tol) {
                    continue;
                }
                let mg = v.magnitude();
                match best {
                    Some((_, _, bm)) if bm >= mg => {}
                    _ => best = Some((i, j, mg)),
                }
            }
        }
        let Some((pi, pj, _)) = best else { break };
        used_rows[pi] = true;
        used_cols[pj] = true;
        let inv = m[(pi, pj)].clone().inv();
        for j in 0..=a.cols {
            m[(pi, j)] = m[(pi, j)].clone() * inv.clone();
        }
        for i in 0..m.rows {
            if i == pi {
                continue;
            }
            let f = m[(i, pj)].clone();
            if Coeff::is_zero(&f) {
                continue;
            }
            for j in 0..=a.cols {
                m[(i, j)] = m[(i, j)].clone() - f.clone() * m[(pi, j)].clone();
            }
        }
        pivots.push((pi, pj));
    }
    if pivots.len() < a.cols {
        return Err(KnError::SpecialConfigurationFailure(format!(
            "singular system: rank {} of {}",
            pivots.len(),
            a.cols
        )));
    }
    // Check consistency of unpivoted rows.
    for i in 0..m.rows {
        if !used_rows[i] && !m[(i, a.cols)].is_negligible(tol.max(1e-30)) && !K::EXACT {
            // Leave strict inconsistency detection to callers for numeric
            // data; exact data is checked below.
        }
        if K::EXACT && !used_rows[i] && !Coeff::is_zero(&m[(i, a.cols)]) {
            return Err(KnError::SpecialConfigurationFailure(
                "inconsistent linear system".into(),
            ));
        }
    }
    let mut x = vec![K::zero(); a.cols];
    for (pi, pj) in pivots {
        x[pj] = m[(pi, a.cols)].clone();
    }
    Ok(x)
}

/// Basis of the right kernel of `A`.
pub fn kernel<K: Field>(a: &Mat<K>, tol: f64) -> Vec<Vec<K>> {
    let mut m = a.clone();
    let pivots = eliminate(&mut m, tol);
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, j)| j).collect();
    let mut basis = Vec::new();
    for free in 0..a.cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![K::zero(); a.cols];
        v[free] = K::one();
        for &(pi, pj) in &pivots {
            // Row pi reads: x_pj + sum_{j != pj} m[pi][j] x_j = 0.
            v[pj] = -(m[(pi, free)].clone());
        }
        basis.push(v);
    }
    basis
}

pub fn det<K: Field>(a: &Mat<K>) -> K {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.clone();
    let mut d = K::one();
    for col in 0..n {
        // Partial pivot by magnitude within the column.
        let mut piv = None;
        let mut best = -1.0f64;
        for r in col..n {
            if !Coeff::is_zero(&m[(r, col)]) && m[(r, col)].magnitude() > best {
                best = m[(r, col)].magnitude();
                piv = Some(r);
            }
        }
        let Some(p) = piv else { return K::zero() };
        if p != col {
            for j in 0..n {
                let tmp = m[(p, j)].clone();
                m[(p, j)] = m[(col, j)].clone();
                m[(col, j)] = tmp;
            }
            d = -d;
        }
        let pv = m[(col, col)].clone();
        d = d * pv.clone();
        let inv = pv.inv();
        for r in (col + 1)..n {
            let f = m[(r, col)].clone() * inv.clone();
            if Coeff::is_zero(&f) {
                continue;
            }
            for j in col..n {
                m[(r, j)] = m[(r, j)].clone() - f.clone() * m[(col, j)].clone();
            }
        }
    }
    d
}

pub fn inverse<K: Field>(a: &Mat<K>, tol: f64) -> Result<Mat<K>> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut out = Mat::zeros(n, n);
    for j in 0..n {
        let mut e = vec![K::zero(); n];
        e[j] = K::one();
        let col = solve(a, &e, tol)?;
        for i in 0..n {
            out[(i, j)] = col[i].clone();
        }
    }
    Ok(out)
}

/// Singular values of a complex matrix by one-sided Jacobi, descending.
/// Avoids forming `A^H A`, so tiny singular values are resolved to roughly
/// machine precision times the largest one.
pub fn singular_values(a: &Mat<C64>) -> Vec<f64> {
    // Work on the taller orientation so columns outnumber nothing.
    let mut m = if a.rows >= a.cols {
        a.clone()
    } else {
        // Conjugate transpose has the same singular values.
        let t = a.transpose();
        let mut c = t.clone();
        for v in &mut c.data {
            *v = v.conj();
        }
        c
    };
    let n = m.cols;
    let rows = m.rows;
    let col = |m: &Mat<C64>, j: usize| -> Vec<C64> { (0..rows).map(|i| m[(i, j)]).collect() };
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let cp = col(&m, p);
                let cq = col(&m, q);
                let app: f64 = cp.iter().map(|x| x.norm_sqr()).sum();
                let aqq: f64 = cq.iter().map(|x| x.norm_sqr()).sum();
                let apq: C64 = cp.iter().zip(&cq).map(|(x, y)| x.conj() * y).sum();
                let scale = (app * aqq).sqrt();
                if apq.norm() <= 1e-300 || apq.norm() <= 1e-17 * scale {
                    continue;
                }
                off += apq.norm();
                // Complex Jacobi rotation zeroing the (p,q) inner product.
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let phase = apq / apq.norm();
                for i in 0..rows {
                    let xp = m[(i, p)];
                    let xq = m[(i, q)];
                    m[(i, p)] = xp * c - xq * phase.conj() * s;
                    m[(i, q)] = xp * phase * s + xq * c;
                }
            }
        }
        if off < 1e-30 {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n)
        .map(|j| (0..rows).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GaussQ;

    fn q(v: i64) -> GaussQ {
        GaussQ::from_int(v)
    }

    #[test]
    fn solve_exact() {
        let a = Mat::from_rows(vec![vec![q(2), q(1)], vec![q(1), q(3)]]);
        let x = solve(&a, &[q(5), q(10)], 0.0).unwrap();
        assert_eq!(a.matvec(&x), vec![q(5), q(10)]);
    }

    #[test]
    fn kernel_exact() {
        // x + y + z = 0 has a 2-dimensional kernel.
        let a = Mat::from_rows(vec![vec![q(1), q(1), q(1)]]);
        let k = kernel(&a, 0.0);
        assert_eq!(k.len(), 2);
        for v in k {
            let r = a.matvec(&v);
            assert!(Coeff::is_zero(&r[0]));
        }
    }

    #[test]
    fn det_exact() {
        let a = Mat::from_rows(vec![vec![q(1), q(2)], vec![q(3), q(4)]]);
        assert_eq!(det(&a), q(-2));
    }

    #[test]
    fn singular_values_known() {
        // diag(3, 4) embedded in a rotation has singular values 4, 3.
        let a = Mat::from_rows(vec![
            vec![C64::new(0.0, 3.0), C64::new(0.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(4.0, 0.0)],
        ]);
        let sv = singular_values(&a);
        assert!((sv[0] - 4.0).abs() < 1e-12);
        assert!((sv[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_values_rank_deficient() {
        let a = Mat::from_rows(vec![
            vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)],
            vec![C64::new(2.0, 0.0), C64::new(4.0, 0.0)],
        ]);
        let sv = singular_values(&a);
        assert!(sv[1] < 1e-14 * sv[0].max(1.0));
    }

    #[test]
    fn inverse_roundtrip() {
        let a = Mat::from_rows(vec![vec![q(1), q(2)], vec![q(3), q(5)]]);
        let inv = inverse(&a, 0.0).unwrap();
        assert_eq!(a.matmul(&inv), Mat::identity(2));
    }
}
