//! Semi-infinite wedge monomials and the regularized action of banded
//! operators on them.
//!
//! A monomial `psi_{N_0} ^ psi_{N_1} ^ ...` with strictly increasing and
//! eventually consecutive indices is stored as a finite head plus the start
//! of its consecutive tail. The charge is `tail_start - head_len`; the
//! degree sums `N_k - k - charge` over the head. Diagonal operators act
//! through the regularization that subtracts the identity on nonnegative
//! indices, which produces the anomaly cocycle `alpha` in the commutators:
//! `[r(E_IJ), r(E_JI)] = r(E_II) - r(E_JJ) + Id` for `I >= 0 > J`.

use crate::affine::{BandedOperator, OpKind};
use crate::error::{KnError, Result};
use crate::field::{Coeff, Field};
use rayon::prelude::*;
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Monomials
// ---------------------------------------------------------------------------

/// A canonical semi-infinite monomial: strictly increasing `head`, all
/// entries below `tail_start`, never adjacent to the tail (the minimal-head
/// normal form).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WedgeMonomial {
    head: Vec<i64>,
    tail_start: i64,
}

/// The highest (vacuum) monomial `psi_M ^ psi_{M+1} ^ ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VacuumMonomial(pub i64);

impl From<VacuumMonomial> for WedgeMonomial {
    fn from(v: VacuumMonomial) -> Self {
        WedgeMonomial::vacuum(v.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Canonicalized {
    /// A repeated index: the monomial vanishes.
    Zero,
    Term { sign: i8, monomial: WedgeMonomial },
}

impl WedgeMonomial {
    pub fn vacuum(m: i64) -> Self {
        WedgeMonomial {
            head: Vec::new(),
            tail_start: m,
        }
    }

    /// Builds the canonical form of head indices followed by the tail
    /// `tail_start, tail_start + 1, ...`; assumes the head is sorted,
    /// strictly increasing, and disjoint from the tail.
    fn from_sorted(mut head: Vec<i64>, mut tail_start: i64) -> Self {
        while head.last() == Some(&(tail_start - 1)) {
            head.pop();
            tail_start -= 1;
        }
        WedgeMonomial { head, tail_start }
    }

    pub fn head(&self) -> &[i64] {
        &self.head
    }

    pub fn tail_start(&self) -> i64 {
        self.tail_start
    }

    pub fn charge(&self) -> i64 {
        self.tail_start - self.head.len() as i64
    }

    /// `sum_k (N_k - k - charge)`; the tail contributes nothing in canonical
    /// form, and the value does not depend on where the head is cut.
    pub fn degree(&self) -> i64 {
        let m = self.charge();
        self.head
            .iter()
            .enumerate()
            .map(|(k, &n)| n - k as i64 - m)
            .sum()
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.tail_start || self.head.binary_search(&n).is_ok()
    }

    /// Number of indices strictly between `a` and `b`.
    fn count_between(&self, a: i64, b: i64) -> i64 {
        let (lo, hi) = (a.min(b), a.max(b));
        let head_count = self
            .head
            .iter()
            .filter(|&&n| n > lo && n < hi)
            .count() as i64;
        let tail_from = (lo + 1).max(self.tail_start);
        let tail_count = (hi - tail_from).max(0);
        head_count + tail_count
    }

    /// `E_{i,j}`-style replacement: removes the factor `j`, inserts `i`.
    /// `None` when the result vanishes.
    pub fn replace(&self, j: i64, i: i64) -> Option<(i8, WedgeMonomial)> {
        if !self.contains(j) {
            return None;
        }
        if i == j {
            return Some((1, self.clone()));
        }
        if self.contains(i) {
            return None;
        }
        let sign = if self.count_between(i, j) % 2 == 0 {
            1
        } else {
            -1
        };
        // Materialize up to the point where the tail is untouched.
        let cut = self.tail_start.max(j + 1).max(i + 1);
        let mut window: Vec<i64> = self.head.clone();
        window.extend(self.tail_start..cut);
        window.retain(|&n| n != j);
        let pos = window.partition_point(|&n| n < i);
        window.insert(pos, i);
        Some((sign, WedgeMonomial::from_sorted(window, cut)))
    }

    /// Indices of the holes `[0, infinity) \ S`, all below `tail_start`.
    pub fn nonnegative_holes(&self) -> Vec<i64> {
        (0..self.tail_start.max(0))
            .filter(|n| !self.contains(*n))
            .collect()
    }

    /// Members below zero (finitely many).
    pub fn negative_members(&self) -> Vec<i64> {
        let mut out: Vec<i64> = self.head.iter().copied().filter(|&n| n < 0).collect();
        if self.tail_start < 0 {
            out.extend(self.tail_start..0);
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Canonical form of an index sequence followed by a consecutive tail.
/// The sign is the parity of the sorting permutation (merge-sort counted).
pub fn canonicalize(indices: &[i64], tail_start: i64) -> Canonicalized {
    // Any listed index at or past the tail duplicates a tail factor.
    if indices.iter().any(|&n| n >= tail_start) {
        return Canonicalized::Zero;
    }
    let mut v: Vec<i64> = indices.to_vec();
    let mut buf = vec![0i64; v.len()];
    let inversions = merge_count(&mut v, &mut buf);
    for w in v.windows(2) {
        if w[0] == w[1] {
            return Canonicalized::Zero;
        }
    }
    let sign = if inversions % 2 == 0 { 1 } else { -1 };
    Canonicalized::Term {
        sign,
        monomial: WedgeMonomial::from_sorted(v, tail_start),
    }
}

fn merge_count(v: &mut [i64], buf: &mut [i64]) -> u64 {
    let n = v.len();
    if n <= 1 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (a, b) = v.split_at_mut(mid);
        merge_count(a, &mut buf[..mid]) + merge_count(b, &mut buf[mid..])
    };
    let (left, right) = (v[..mid].to_vec(), v[mid..].to_vec());
    let (mut i, mut j, mut k) = (0usize, 0usize, 0usize);
    while i < left.len() && j < right.len() {
        if left[i] <= right[j] {
            buf[k] = left[i];
            i += 1;
        } else {
            buf[k] = right[j];
            j += 1;
            inv += (left.len() - i) as u64;
        }
        k += 1;
    }
    while i < left.len() {
        buf[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        buf[k] = right[j];
        j += 1;
        k += 1;
    }
    v.copy_from_slice(&buf[..n]);
    inv
}

/// Enumerates every canonical monomial of the given charge whose head lies
/// inside `[lo, hi]`, by choosing the indices added below `charge` and the
/// reference-tail indices removed at or above it.
pub fn monomials_with_head_in(charge: i64, lo: i64, hi: i64) -> Vec<WedgeMonomial> {
    let mut out = Vec::new();
    if lo > charge {
        return vec![WedgeMonomial::vacuum(charge)];
    }
    let below: Vec<i64> = (lo..charge).collect();
    let above: Vec<i64> = (charge..=hi).collect();
    let max_extra = below.len();
    // removed = R0 subset of [charge, hi] plus a contiguous run just above
    // hi; the run keeps the head inside [lo, hi].
    for added_mask in 0u64..(1u64 << below.len()) {
        let added: Vec<i64> = below
            .iter()
            .enumerate()
            .filter(|(k, _)| added_mask >> k & 1 == 1)
            .map(|(_, &n)| n)
            .collect();
        let s = added.len();
        for run in 0..=s.min(max_extra) {
            let need = s - run;
            if need > above.len() {
                continue;
            }
            for r0_mask in subsets_of_size(above.len(), need) {
                let mut removed: Vec<i64> = above
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| r0_mask >> k & 1 == 1)
                    .map(|(_, &n)| n)
                    .collect();
                for t in 0..run {
                    removed.push(hi + 1 + t as i64);
                }
                let t = removed.iter().max().map_or(charge, |m| m + 1);
                let mut head: Vec<i64> = added.clone();
                for n in charge..t {
                    if !removed.contains(&n) {
                        head.push(n);
                    }
                }
                head.sort_unstable();
                out.push(WedgeMonomial::from_sorted(head, t));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn subsets_of_size(n: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << n) {
        if mask.count_ones() as usize == k {
            out.push(mask);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Wedge vectors
// ---------------------------------------------------------------------------

/// A sparse linear combination of canonical monomials. All arithmetic keeps
/// exact zeros pruned; numeric noise is pruned explicitly via `prune`.
#[derive(Clone, Debug, PartialEq)]
pub struct WedgeVector<K> {
    pub terms: BTreeMap<WedgeMonomial, K>,
}

impl<K: Coeff> Default for WedgeVector<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Coeff> WedgeVector<K> {
    pub fn new() -> Self {
        WedgeVector {
            terms: BTreeMap::new(),
        }
    }

    pub fn single(mono: WedgeMonomial, c: K) -> Self {
        let mut v = WedgeVector::new();
        v.add_term(mono, c);
        v
    }

    pub fn add_term(&mut self, mono: WedgeMonomial, c: K) {
        if Coeff::is_zero(&c) {
            return;
        }
        let entry = self.terms.entry(mono);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().clone() + c;
                if Coeff::is_zero(&v) {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &K) -> Self {
        let mut out = WedgeVector::new();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn coefficient(&self, mono: &WedgeMonomial) -> K {
        self.terms.get(mono).cloned().unwrap_or_else(K::zero)
    }

    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| !c.is_negligible(tol));
    }

    pub fn max_magnitude(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max)
    }

    /// Common charge of all monomials, if uniform.
    pub fn charge(&self) -> Option<i64> {
        let mut it = self.terms.keys();
        let first = it.next()?.charge();
        for m in it {
            if m.charge() != first {
                return None;
            }
        }
        Some(first)
    }
}

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

/// The action of a single matrix unit `E_{IJ}` on one monomial: the Leibniz
/// sum collapses to a single replacement (or a scalar on the diagonal).
/// With `regularized` the diagonal subtracts the identity for `I >= 0`.
pub fn act_elementary<K: Coeff>(
    i: i64,
    j: i64,
    mono: &WedgeMonomial,
    regularized: bool,
) -> WedgeVector<K> {
    let mut out = WedgeVector::new();
    if i == j {
        let mut lambda = if mono.contains(i) { 1i64 } else { 0 };
        if regularized && i >= 0 {
            lambda -= 1;
        }
        out.add_term(mono.clone(), K::from_i64(lambda));
        return out;
    }
    if let Some((sign, m)) = mono.replace(j, i) {
        out.add_term(m, K::from_i64(sign as i64));
    }
    out
}

/// Applies a banded operator to a wedge vector, the diagonal part
/// regularized. Column reads outside an operator's certified domain
/// surface as `WindowTooSmall` instead of truncating silently.
pub fn act_banded<K: Field>(
    op: &BandedOperator<K>,
    v: &WedgeVector<K>,
    regularized: bool,
) -> Result<WedgeVector<K>> {
    if !regularized {
        // Unregularized diagonal sums diverge unless the diagonal support
        // is a single matrix unit.
        match op.kind {
            OpKind::Elementary { .. } => {}
            _ => {
                return Err(KnError::WindowTooSmall(
                    "unregularized action is defined only for matrix units".into(),
                ))
            }
        }
    }
    let mut out = WedgeVector::new();
    for (mono, coeff) in &v.terms {
        // Off-diagonal terms: head factors plus the shallow end of the tail
        // that the band can still move out of the tail.
        let mut cols: Vec<i64> = mono.head().to_vec();
        if op.band_lo < 0 {
            cols.extend(mono.tail_start()..(mono.tail_start() - op.band_lo));
        }
        for col in cols {
            for (row, c) in op.column(col)? {
                if row == col {
                    continue;
                }
                if let Some((sign, m)) = mono.replace(col, row) {
                    out.add_term(
                        m,
                        coeff.clone() * c * K::from_i64(sign as i64),
                    );
                }
            }
        }
        // Diagonal: sum of entries on members below zero minus entries on
        // nonnegative holes.
        let mut lambda = K::zero();
        for n in mono.negative_members() {
            lambda = lambda + op.diagonal_entry(n)?;
        }
        if regularized {
            for n in mono.nonnegative_holes() {
                lambda = lambda - op.diagonal_entry(n)?;
            }
        } else {
            // Elementary only: the nonnegative member contributes directly.
            if let OpKind::Elementary { row, col } = op.kind {
                if row == col && row >= 0 && mono.contains(row) {
                    lambda = lambda + K::one();
                }
            }
        }
        out.add_term(mono.clone(), coeff.clone() * lambda);
    }
    Ok(out)
}

/// Coefficient of the vacuum in `op` applied to the vacuum: only the
/// diagonal contributes, giving `sum_{K=M..-1} d_K` for `M < 0`.
pub fn vacuum_projection<K: Field>(op: &BandedOperator<K>, m: i64) -> Result<K> {
    let vac = WedgeMonomial::vacuum(m);
    let image = act_banded(op, &WedgeVector::single(vac.clone(), K::one()), true)?;
    Ok(image.coefficient(&vac))
}

/// The diagonal-sum formula for the vacuum weight: `sum_{K=M}^{-1} d_K`,
/// an empty sum for `M >= 0`.
pub fn vacuum_projection_formula<K: Field>(op: &BandedOperator<K>, m: i64) -> Result<K> {
    let mut acc = K::zero();
    for k in m..0 {
        acc = acc + op.diagonal_entry(k)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Exhaustive commutator verification
// ---------------------------------------------------------------------------

/// Result of sweeping the regularized commutation relations over every
/// index tuple in a window and every canonical monomial of one charge.
#[derive(Debug, Clone)]
pub struct CommutatorReport {
    pub index_lo: i64,
    pub index_hi: i64,
    pub charge: i64,
    pub monomials: usize,
    pub tuples: u64,
    pub checks: u64,
    /// Relation instances where the anomaly `alpha` was nonzero.
    pub central_hits: u64,
    /// First few failing tuples `(i, j, m, n)`, empty on success.
    pub failures: Vec<(i64, i64, i64, i64)>,
}

impl CommutatorReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The anomaly table: `alpha(E_IJ, E_MN)` is `+1` for `I >= 0 > J`,
/// `(M,N) = (J,I)`; `-1` for the transposed case; zero otherwise.
pub fn alpha_cocycle(i: i64, j: i64, m: i64, n: i64) -> i64 {
    if (m, n) != (j, i) {
        return 0;
    }
    if i >= 0 && j < 0 {
        1
    } else if j >= 0 && i < 0 {
        -1
    } else {
        0
    }
}

/// Bit-set model of one charge sector used by the exhaustive sweep: bit `k`
/// holds membership of index `base + k`, everything past the window is tail.
#[derive(Clone, Copy)]
struct MayaWindow {
    base: i64,
    bits: u32,
}

impl MayaWindow {
    fn member(&self, state: u64, n: i64) -> bool {
        if n >= self.base + self.bits as i64 {
            return true;
        }
        if n < self.base {
            return false;
        }
        state >> (n - self.base) & 1 == 1
    }

    /// Replacement with sign; indices must lie inside the window.
    fn replace(&self, state: u64, j: i64, i: i64) -> Option<(u64, i64)> {
        if !self.member(state, j) {
            return None;
        }
        if i == j {
            return Some((state, 1));
        }
        if self.member(state, i) {
            return None;
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let lo_k = (lo - self.base) as u32;
        let hi_k = (hi - self.base) as u32;
        let mask = if hi_k > lo_k + 1 {
            (((1u64 << (hi_k - lo_k - 1)) - 1) << (lo_k + 1)) & u64::MAX
        } else {
            0
        };
        let between = (state & mask).count_ones() as i64;
        let sign = if between % 2 == 0 { 1 } else { -1 };
        let next = (state & !(1u64 << (j - self.base))) | 1u64 << (i - self.base);
        Some((next, sign))
    }

    /// Regularized application of `E_ij`: at most one term.
    fn rhat(&self, state: u64, i: i64, j: i64) -> Option<(u64, i64)> {
        if i == j {
            let lam = self.member(state, i) as i64 - (i >= 0) as i64;
            if lam == 0 {
                None
            } else {
                Some((state, lam))
            }
        } else {
            self.replace(state, j, i)
        }
    }
}

fn accumulate(acc: &mut Vec<(u64, i64)>, state: u64, coeff: i64) {
    if coeff == 0 {
        return;
    }
    for e in acc.iter_mut() {
        if e.0 == state {
            e.1 += coeff;
            return;
        }
    }
    acc.push((state, coeff));
}

/// Checks `[rhat(E_IJ), rhat(E_MN)] = d_JM rhat(E_IN) - d_NI rhat(E_MJ)
/// + alpha Id` on every canonical charge-`charge` monomial whose head lies
/// in `[lo, hi]`, exactly over the integers.
pub fn verify_commutators(lo: i64, hi: i64, charge: i64) -> CommutatorReport {
    let window = MayaWindow {
        base: lo,
        bits: ((hi - lo + 1) + (charge - lo).max(0) + 1) as u32,
    };
    assert!(window.bits <= 62, "window too wide for the bit-set engine");
    // Enumerate states.
    let monos = monomials_with_head_in(charge, lo, hi);
    let states: Vec<u64> = monos
        .iter()
        .map(|m| {
            let mut s: u64 = 0;
            for k in 0..window.bits as i64 {
                if m.contains(lo + k) {
                    s |= 1 << k;
                }
            }
            s
        })
        .collect();

    let idx: Vec<i64> = (lo..=hi).collect();
    let tuples: Vec<(i64, i64)> = idx
        .iter()
        .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
        .collect();

    let results: Vec<(u64, u64, Vec<(i64, i64, i64, i64)>)> = tuples
        .par_iter()
        .map(|&(i, j)| {
            let mut checks = 0u64;
            let mut central = 0u64;
            let mut failures = Vec::new();
            for &m in &idx {
                for &n in &idx {
                    let alpha = alpha_cocycle(i, j, m, n);
                    if alpha != 0 {
                        central += states.len() as u64;
                    }
                    for &s in &states {
                        checks += 1;
                        // LHS: E_IJ E_MN s - E_MN E_IJ s.
                        let mut lhs: Vec<(u64, i64)> = Vec::with_capacity(4);
                        if let Some((s1, c1)) = window.rhat(s, m, n) {
                            if let Some((s2, c2)) = window.rhat(s1, i, j) {
                                accumulate(&mut lhs, s2, c1 * c2);
                            }
                        }
                        if let Some((s1, c1)) = window.rhat(s, i, j) {
                            if let Some((s2, c2)) = window.rhat(s1, m, n) {
                                accumulate(&mut lhs, s2, -(c1 * c2));
                            }
                        }
                        // RHS: d_JM E_IN - d_NI E_MJ + alpha.
                        let mut rhs: Vec<(u64, i64)> = Vec::with_capacity(4);
                        if j == m {
                            if let Some((s1, c1)) = window.rhat(s, i, n) {
                                accumulate(&mut rhs, s1, c1);
                            }
                        }
                        if n == i {
                            if let Some((s1, c1)) = window.rhat(s, m, j) {
                                accumulate(&mut rhs, s1, -c1);
                            }
                        }
                        accumulate(&mut rhs, s, alpha);
                        // Compare.
                        let mut diff = lhs;
                        for (st, c) in rhs {
                            accumulate(&mut diff, st, -c);
                        }
                        if diff.iter().any(|&(_, c)| c != 0) {
                            if failures.len() < 8 {
                                failures.push((i, j, m, n));
                            }
                        }
                    }
                }
            }
            (checks, central, failures)
        })
        .collect();

    let mut report = CommutatorReport {
        index_lo: lo,
        index_hi: hi,
        charge,
        monomials: states.len(),
        tuples: (tuples.len() * tuples.len()) as u64,
        checks: 0,
        central_hits: 0,
        failures: Vec::new(),
    };
    for (checks, central, failures) in results {
        report.checks += checks;
        report.central_hits += central;
        for f in failures {
            if report.failures.len() < 16 {
                report.failures.push(f);
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GaussQ;

    fn q(v: i64) -> GaussQ {
        GaussQ::from_int(v)
    }

    #[test]
    fn canonicalize_examples() {
        // One transposition: (1, 0) with tail 2 is -(vacuum at 0).
        let c = canonicalize(&[1, 0], 2);
        assert_eq!(
            c,
            Canonicalized::Term {
                sign: -1,
                monomial: WedgeMonomial::vacuum(0)
            }
        );
        // Repeated index vanishes.
        assert_eq!(canonicalize(&[3, 3], 5), Canonicalized::Zero);
        // Already canonical.
        let c = canonicalize(&[-2, 0], 2);
        match c {
            Canonicalized::Term { sign, monomial } => {
                assert_eq!(sign, 1);
                assert_eq!(monomial.head(), &[-2, 0]);
                assert_eq!(monomial.tail_start(), 2);
            }
            _ => panic!("expected a term"),
        }
        // Index colliding with the tail vanishes.
        assert_eq!(canonicalize(&[4], 4), Canonicalized::Zero);
    }

    #[test]
    fn head_merges_into_tail() {
        let m = WedgeMonomial::from_sorted(vec![1], 2);
        assert_eq!(m, WedgeMonomial::vacuum(1));
        assert_eq!(m.charge(), 1);
        assert_eq!(m.degree(), 0);
    }

    #[test]
    fn degree_examples() {
        for m in [-3i64, 0, 4] {
            assert_eq!(WedgeMonomial::vacuum(m).degree(), 0);
        }
        // Charge 0, indices (-1, 1, 2, 3, ...): degree -1.
        let c = canonicalize(&[-1], 1);
        match c {
            Canonicalized::Term { monomial, .. } => {
                assert_eq!(monomial.charge(), 0);
                assert_eq!(monomial.degree(), -1);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn degree_invariant_under_head_cut() {
        // Splitting the same index set at different points never changes
        // the degree: compare against an explicitly extended head.
        let m = WedgeMonomial::from_sorted(vec![-4, -1], 1);
        let extended = canonicalize(&[-4, -1, 1, 2, 3], 4);
        match extended {
            Canonicalized::Term { sign, monomial } => {
                assert_eq!(sign, 1);
                assert_eq!(monomial, m);
                assert_eq!(monomial.degree(), m.degree());
            }
            _ => panic!(),
        }
    }

    #[test]
    fn replace_matches_transposition_count() {
        // E_{I,J} with J >= M, I < M on the vacuum: sign (-1)^{J-M}.
        for (mm, jj, ii) in [(0i64, 3i64, -2i64), (-1, 1, -5), (2, 2, 0)] {
            let vac = WedgeMonomial::vacuum(mm);
            let (sign, out) = vac.replace(jj, ii).unwrap();
            let want = if (jj - mm) % 2 == 0 { 1 } else { -1 };
            assert_eq!(sign as i64, want, "vacuum {mm}, {jj} -> {ii}");
            assert_eq!(out.charge(), mm);
            assert_eq!(out.degree(), ii - jj);
        }
    }

    #[test]
    fn regularized_diagonal_kills_nonpositive_vacua() {
        // rhat(E_II) on the vacuum at M <= 0: zero for I >= 0 or I < M,
        // identity for M <= I < 0.
        for m in [-3i64, -1, 0] {
            let vac = WedgeMonomial::vacuum(m);
            for i in -5i64..=5 {
                let v = act_elementary::<GaussQ>(i, i, &vac, true);
                let c = v.coefficient(&vac);
                let want = if i < 0 && i >= m { q(1) } else { q(0) };
                assert_eq!(c, want, "M={m}, I={i}");
            }
        }
    }

    #[test]
    fn identity_band_counts_regularized_slots() {
        // sum_N rhat(E_NN) has eigenvalue -M on the vacuum at M, for every
        // M: negative slots count up, nonnegative holes count down.
        let op = BandedOperator::<GaussQ>::identity();
        for m in -8i64..=8 {
            let c = vacuum_projection(&op, m).unwrap();
            assert_eq!(c, q(-m), "M={m}");
        }
    }

    #[test]
    fn charge_preserved_by_elementary_actions() {
        let mono = match canonicalize(&[-3, 0], 2) {
            Canonicalized::Term { monomial, .. } => monomial,
            _ => panic!(),
        };
        for i in -4i64..=4 {
            for j in -4i64..=4 {
                let v = act_elementary::<GaussQ>(i, j, &mono, true);
                for m in v.terms.keys() {
                    assert_eq!(m.charge(), mono.charge());
                }
            }
        }
    }

    #[test]
    fn commutator_sweep_small_window() {
        let report = verify_commutators(-3, 3, 0);
        assert!(report.passed(), "failures: {:?}", report.failures);
        assert!(report.central_hits > 0);
    }

    #[test]
    fn commutator_sweep_nonzero_charge() {
        let report = verify_commutators(-3, 3, 1);
        assert!(report.passed(), "failures: {:?}", report.failures);
        let report = verify_commutators(-3, 3, -1);
        assert!(report.passed(), "failures: {:?}", report.failures);
    }

    #[test]
    fn alpha_table() {
        assert_eq!(alpha_cocycle(0, -1, -1, 0), 1);
        assert_eq!(alpha_cocycle(-1, 0, 0, -1), -1);
        assert_eq!(alpha_cocycle(2, 5, 5, 2), 0);
        assert_eq!(alpha_cocycle(-2, -5, -5, -2), 0);
        assert_eq!(alpha_cocycle(1, -1, 2, 2), 0);
    }

    #[test]
    fn general_engine_matches_bitset_engine() {
        // The general monomial engine and the bit-set sweep must agree on
        // the same relation instances.
        let monos = monomials_with_head_in(0, -3, 3);
        let idx: Vec<i64> = (-3..=3).collect();
        for &i in &idx {
            for &j in &idx {
                for &m in &idx {
                    for &n in &idx {
                        if (i + j + m + n) % 3 != 0 {
                            continue; // subsample for speed
                        }
                        for mono in monos.iter().take(25) {
                            let v = WedgeVector::single(mono.clone(), q(1));
                            let emn = BandedOperator::<GaussQ>::elementary(m, n);
                            let eij = BandedOperator::<GaussQ>::elementary(i, j);
                            let lhs = act_banded(&eij, &act_banded(&emn, &v, true).unwrap(), true)
                                .unwrap()
                                .sub(
                                    &act_banded(&emn, &act_banded(&eij, &v, true).unwrap(), true)
                                        .unwrap(),
                                );
                            let mut rhs = WedgeVector::new();
                            if j == m {
                                rhs = rhs.add(&act_banded(
                                    &BandedOperator::elementary(i, n),
                                    &v,
                                    true,
                                )
                                .unwrap());
                            }
                            if n == i {
                                rhs = rhs.sub(&act_banded(
                                    &BandedOperator::elementary(m, j),
                                    &v,
                                    true,
                                )
                                .unwrap());
                            }
                            rhs.add_term(mono.clone(), q(alpha_cocycle(i, j, m, n)));
                            assert_eq!(
                                lhs, rhs,
                                "mismatch at ({i},{j},{m},{n}) on {:?}",
                                mono
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn monomial_enumeration_count() {
        // The charge-0 window [-6, 6] holds exactly 4096 canonical
        // monomials: pairs (added, removed-with-contiguous-top) biject with
        // 12 free bits.
        let monos = monomials_with_head_in(0, -6, 6);
        assert_eq!(monos.len(), 4096);
        for m in &monos {
            assert_eq!(m.charge(), 0);
            assert!(m.head().iter().all(|&n| (-6..=6).contains(&n)));
        }
    }

    #[test]
    fn boundary_touch_is_flagged() {
        // A columns-operator with a bounded domain refuses monomials whose
        // support reaches outside it.
        let mut cols = BTreeMap::new();
        cols.insert(0i64, vec![(1i64, q(1))]);
        let op = BandedOperator {
            band_lo: 0,
            band_hi: 1,
            kind: OpKind::Columns {
                cols,
                domain: (0, 4),
            },
        };
        let v = WedgeVector::single(WedgeMonomial::vacuum(-2), q(1));
        assert!(matches!(
            act_banded(&op, &v, true),
            Err(KnError::WindowTooSmall(_))
        ));
    }
}
