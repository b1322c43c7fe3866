//! Truncated Laurent series in a local parameter.
//!
//! A series stores coefficients for exponents `lead .. prec` (exclusive at
//! `prec`) and remembers `prec` as the certified truncation order: terms at
//! or beyond `prec` are unknown, not zero. Arithmetic propagates the
//! certificate so downstream code can refuse to read past it.

use crate::error::{KnError, Result};
use crate::field::{Coeff, Field};

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries<K> {
    lead: i64,
    coeffs: Vec<K>,
    prec: i64,
}

impl<K: Coeff> LaurentSeries<K> {
    /// Builds a series from the coefficient list of `z^lead, z^{lead+1}, ...`.
    pub fn new(lead: i64, coeffs: Vec<K>) -> Self {
        let prec = lead + coeffs.len() as i64;
        LaurentSeries { lead, coeffs, prec }
    }

    pub fn with_prec(lead: i64, coeffs: Vec<K>, prec: i64) -> Self {
        assert!(prec >= lead + coeffs.len() as i64 || coeffs.is_empty());
        let mut s = LaurentSeries { lead, coeffs, prec };
        s.pad_to_prec();
        s
    }

    /// The zero series, known to vanish below `prec`.
    pub fn zero(prec: i64) -> Self {
        LaurentSeries {
            lead: prec,
            coeffs: Vec::new(),
            prec,
        }
    }

    /// Constant one, known to order `prec`.
    pub fn one(prec: i64) -> Self {
        Self::monomial(0, K::one(), prec)
    }

    /// `c * z^k`, known to order `prec`.
    pub fn monomial(k: i64, c: K, prec: i64) -> Self {
        assert!(prec > k);
        let mut coeffs = vec![K::zero(); (prec - k) as usize];
        coeffs[0] = c;
        LaurentSeries {
            lead: k,
            coeffs,
            prec,
        }
    }

    fn pad_to_prec(&mut self) {
        let want = (self.prec - self.lead).max(0) as usize;
        while self.coeffs.len() < want {
            self.coeffs.push(K::zero());
        }
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// Lowest stored exponent (the storage offset, not necessarily the
    /// analytic order if leading coefficients vanish).
    pub fn lead(&self) -> i64 {
        self.lead
    }

    /// Coefficient of `z^k`; zero below the stored range, error at or past
    /// the truncation order.
    pub fn coeff(&self, k: i64) -> Result<K> {
        if k >= self.prec {
            return Err(KnError::ExpansionOrderExceeded {
                requested: k,
                available: self.prec,
            });
        }
        if k < self.lead {
            return Ok(K::zero());
        }
        Ok(self.coeffs[(k - self.lead) as usize].clone())
    }

    /// First exponent whose coefficient exceeds `tol` (exact types use exact
    /// nonzality). `None` when the series is zero to its precision.
    pub fn order(&self, tol: f64) -> Option<i64> {
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_negligible(tol) {
                return Some(self.lead + i as i64);
            }
        }
        None
    }

    /// Leading exponent and coefficient at tolerance `tol`.
    pub fn leading(&self, tol: f64) -> Option<(i64, K)> {
        self.order(tol).map(|k| (k, self.coeff(k).unwrap()))
    }

    /// Leading order judged against the local coefficient scale: the first
    /// exponent whose magnitude exceeds `rel` times the largest magnitude
    /// over the next `window` exponents. Robust for series whose high-order
    /// coefficients grow geometrically.
    pub fn leading_order_local(&self, rel: f64, window: usize) -> Option<i64> {
        for (i, c) in self.coeffs.iter().enumerate() {
            let local = self.coeffs[i..(i + window).min(self.coeffs.len())]
                .iter()
                .map(|x| x.magnitude())
                .fold(0.0f64, f64::max);
            if local > 0.0 && c.magnitude() > rel * local {
                return Some(self.lead + i as i64);
            }
        }
        None
    }

    /// Largest coefficient magnitude over exponents `[a, b]`, clipped to the
    /// stored range.
    pub fn local_magnitude(&self, a: i64, b: i64) -> f64 {
        let mut best = 0.0f64;
        for k in a.max(self.lead)..=b.min(self.prec - 1) {
            if k >= self.lead {
                best = best.max(self.coeffs[(k - self.lead) as usize].magnitude());
            }
        }
        best
    }

    /// Largest coefficient magnitude (for scaling residual thresholds).
    pub fn max_magnitude(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max)
    }

    /// Drops exact-zero leading coefficients. Numeric noise is left alone.
    pub fn normalize(mut self) -> Self {
        let mut k = 0;
        while k < self.coeffs.len() && Coeff::is_zero(&self.coeffs[k]) {
            k += 1;
        }
        if k > 0 {
            self.coeffs.drain(..k);
            self.lead += k as i64;
        }
        if self.coeffs.is_empty() {
            self.lead = self.prec;
        }
        self
    }

    pub fn truncate(mut self, prec: i64) -> Self {
        if prec < self.prec {
            self.prec = prec;
            let keep = (prec - self.lead).max(0) as usize;
            self.coeffs.truncate(keep);
            if self.coeffs.is_empty() {
                self.lead = prec;
            }
        }
        self
    }

    pub fn scale(mut self, c: &K) -> Self {
        for x in &mut self.coeffs {
            *x = x.clone() * c.clone();
        }
        self
    }

    pub fn shift(mut self, k: i64) -> Self {
        self.lead += k;
        self.prec += k;
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.min(other.prec);
        let lead = self.lead.min(other.lead).min(prec);
        let mut coeffs = vec![K::zero(); (prec - lead) as usize];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let k = lead + i as i64;
            let a = if k >= self.lead && k < self.prec {
                self.coeff(k).unwrap()
            } else {
                K::zero()
            };
            let b = if k >= other.lead && k < other.prec {
                other.coeff(k).unwrap()
            } else {
                K::zero()
            };
            *c = a + b;
        }
        LaurentSeries { lead, coeffs, prec }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.clone().neg())
    }

    pub fn neg(mut self) -> Self {
        for c in &mut self.coeffs {
            *c = -c.clone();
        }
        self
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            // A factor that is zero to its precision: the product is zero to
            // the best certified order.
            let prec = (self.prec + other.lead).min(other.prec + self.lead);
            return LaurentSeries::zero(prec);
        }
        let lead = self.lead + other.lead;
        let prec = (self.prec + other.lead).min(other.prec + self.lead);
        let n = (prec - lead) as usize;
        let mut coeffs = vec![K::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if Coeff::is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        LaurentSeries { lead, coeffs, prec }
    }

    /// Term-by-term derivative d/dz.
    pub fn derivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.lead + i as i64;
            coeffs.push(c.clone() * K::from_i64(k));
        }
        LaurentSeries {
            lead: self.lead - 1,
            coeffs,
            prec: self.prec - 1,
        }
    }

    /// Residue: the coefficient of `z^{-1}`.
    pub fn residue(&self) -> Result<K> {
        self.coeff(-1)
    }

    /// Evaluates the truncated series at `z`, for `|z|` inside the radius
    /// where the truncation error is acceptable.
    pub fn eval(&self, z: K) -> K
    where
        K: Field,
    {
        // Horner on the regular part, explicit powers for the pole part.
        let mut acc = K::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z.clone() + c.clone();
        }
        let mut zp = K::one();
        if self.lead >= 0 {
            for _ in 0..self.lead {
                zp = zp * z.clone();
            }
            acc * zp
        } else {
            for _ in 0..(-self.lead) {
                zp = zp * z.clone();
            }
            acc / zp
        }
    }
}

impl<K: Field> LaurentSeries<K> {
    /// Multiplicative inverse. The stored leading coefficient must be a unit
    /// (nonzero at tolerance `tol`); call `normalize()` first for exact data.
    pub fn recip(&self, tol: f64) -> Result<Self> {
        let s = self.clone().normalize();
        if s.coeffs.is_empty() || s.coeffs[0].is_negligible(tol) {
            return Err(KnError::SpecialConfigurationFailure(
                "cannot invert a series with vanishing leading coefficient".into(),
            ));
        }
        let n = s.coeffs.len();
        let a0 = s.coeffs[0].clone();
        let inv0 = a0.inv();
        let mut out = vec![K::zero(); n];
        out[0] = inv0.clone();
        for k in 1..n {
            // sum_{j=1..k} a_j * out_{k-j}
            let mut acc = K::zero();
            for j in 1..=k {
                if !Coeff::is_zero(&s.coeffs[j]) {
                    acc = acc + s.coeffs[j].clone() * out[k - j].clone();
                }
            }
            out[k] = -(acc * inv0.clone());
        }
        // 1/(a z^m (1 + ...)) has lead -m and the same number of known terms.
        Ok(LaurentSeries {
            lead: -s.lead,
            prec: -s.lead + n as i64,
            coeffs: out,
        })
    }

    /// Integer power, preserving precision certificates.
    pub fn powi(&self, e: i64, tol: f64) -> Result<Self> {
        if e == 0 {
            return Ok(LaurentSeries::one(self.prec - self.lead));
        }
        let base = if e > 0 {
            self.clone()
        } else {
            self.recip(tol)?
        };
        let mut acc = base.clone();
        for _ in 1..e.abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// exp of a series with zero constant term and no pole part.
    pub fn exp(&self) -> Result<Self> {
        if self.lead < 0 {
            for k in self.lead..0 {
                if !Coeff::is_zero(&self.coeff(k)?) {
                    return Err(KnError::SpecialConfigurationFailure(
                        "exp of a series with a pole part".into(),
                    ));
                }
            }
        }
        if self.prec <= 0 {
            return Err(KnError::ExpansionOrderExceeded {
                requested: 0,
                available: self.prec,
            });
        }
        if !Coeff::is_zero(&self.coeff(0)?) {
            return Err(KnError::SpecialConfigurationFailure(
                "exp requires zero constant term".into(),
            ));
        }
        let n = self.prec as usize;
        // l[k] = coefficient of z^k in self, for k >= 1
        let l = |k: usize| -> K {
            self.coeff(k as i64).unwrap_or_else(|_| K::zero())
        };
        let mut e = vec![K::zero(); n];
        e[0] = K::one();
        for k in 1..n {
            // e_k = (1/k) sum_{j=1..k} j * l_j * e_{k-j}
            let mut acc = K::zero();
            for j in 1..=k {
                let lj = l(j);
                if !Coeff::is_zero(&lj) {
                    acc = acc + K::from_i64(j as i64) * lj * e[k - j].clone();
                }
            }
            e[k] = acc * K::from_i64(k as i64).inv();
        }
        Ok(LaurentSeries {
            lead: 0,
            coeffs: e,
            prec: n as i64,
        })
    }
}

/// Residue pairing res(A dB) read off from two local expansions:
/// `sum_k k * b_k * a_{-k}`.
pub fn residue_pairing<K: Coeff>(a: &LaurentSeries<K>, b: &LaurentSeries<K>) -> Result<K> {
    let adb = a.mul(&b.derivative());
    adb.residue()
}
