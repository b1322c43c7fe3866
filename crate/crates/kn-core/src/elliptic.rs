//! Weierstrass functions on a torus `C / (Z w1 + Z w2)`.
//!
//! Evaluation goes through Jacobi theta series in `q = exp(i pi w2/w1)`,
//! which converge like `q^{n^2}`. Conventions, with `v = pi z / w1` and
//! `eta1 = zeta(w1/2)`:
//!
//! ```text
//! sigma(z) = (w1/pi) exp(eta1 z^2 / w1) theta1(v) / theta1'(0)
//! zeta(z)  = 2 eta1 z / w1 + (pi/w1) theta1'(v) / theta1(v)
//! wp(z)    = -2 eta1/w1 - (pi/w1)^2 [theta1''/theta1 - (theta1'/theta1)^2](v)
//! ```
//!
//! `g2`, `g3` come from Eisenstein series in `Q = q^2`. The identity
//! `wp'^2 = 4 wp^3 - g2 wp - g3` ties the two routes together and is checked
//! in the tests.
//!
//! Local expansions of sigma factors are produced by power-series recursions
//! seeded with `(sigma, zeta, wp, wp')` at the base point: the Taylor series
//! of `wp` follows from `wp'' = 6 wp^2 - g2/2`, `zeta` integrates `-wp`, and
//! `sigma` exponentiates the integral of `zeta`. This keeps coefficient
//! accuracy uniform in the order, which circle-quadrature extraction cannot.

use crate::curve::Lattice;
use crate::field::C64;
use crate::series::LaurentSeries;

const THETA_MAX_TERMS: usize = 64;

/// Cached constants for one lattice.
#[derive(Clone, Debug)]
pub struct EllipticCtx {
    pub lattice: Lattice,
    q: C64,
    theta1_d0: C64,
    pub eta1: C64,
    pub eta2: C64,
    pub g2: C64,
    pub g3: C64,
}

fn theta1_series(u: C64, q: C64, derivative: u32) -> C64 {
    // theta1(u) = 2 sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1)u)
    let mut acc = C64::new(0.0, 0.0);
    let logq = q.ln();
    for n in 0..THETA_MAX_TERMS {
        let k = 2.0 * n as f64 + 1.0;
        let qpow = (logq * (k * k / 4.0)).exp();
        let trig = match derivative % 4 {
            0 => (u * k).sin(),
            1 => (u * k).cos(),
            2 => -(u * k).sin(),
            _ => -(u * k).cos(),
        };
        let term = qpow * trig * k.powi(derivative as i32) * if n % 2 == 0 { 1.0 } else { -1.0 };
        acc += term;
        if n > 2 && term.norm() < 1e-18 * acc.norm().max(1e-30) {
            break;
        }
    }
    acc * 2.0
}

fn eisenstein(qq: C64, weight: u32) -> C64 {
    // E4 = 1 + 240 sum sigma3(n) Q^n, E6 = 1 - 504 sum sigma5(n) Q^n.
    let (coef, p) = match weight {
        4 => (240.0, 3u32),
        6 => (-504.0, 5u32),
        _ => unreachable!(),
    };
    let mut acc = C64::new(1.0, 0.0);
    let mut qn = C64::new(1.0, 0.0);
    for n in 1..THETA_MAX_TERMS {
        qn *= qq;
        // sigma_p(n)
        let mut s = 0.0f64;
        for d in 1..=n {
            if n % d == 0 {
                s += (d as f64).powi(p as i32);
            }
        }
        let term = qn * s * coef;
        acc += term;
        if term.norm() < 1e-18 * acc.norm().max(1e-30) {
            break;
        }
    }
    acc
}

impl EllipticCtx {
    pub fn new(lattice: Lattice) -> Self {
        let tau = lattice.tau();
        let q = (C64::new(0.0, std::f64::consts::PI) * tau).exp();
        let zero = C64::new(0.0, 0.0);
        let d1 = theta1_series(zero, q, 1);
        let d3 = theta1_series(zero, q, 3);
        let pi = std::f64::consts::PI;
        // eta1 = zeta(w1/2) = -pi^2 theta1'''(0) / (6 w1 theta1'(0))
        let eta1 = -C64::new(pi * pi, 0.0) * d3 / (lattice.omega1 * 6.0 * d1);
        // Legendre: eta1 w2 - eta2 w1 = i pi
        let eta2 = (eta1 * lattice.omega2 - C64::new(0.0, pi)) / lattice.omega1;
        let qq = q * q;
        let scale = C64::new(2.0 * pi, 0.0) / lattice.omega1;
        let g2 = scale.powi(4) * eisenstein(qq, 4) / 12.0;
        let g3 = scale.powi(6) * eisenstein(qq, 6) / 216.0;
        EllipticCtx {
            lattice,
            q,
            theta1_d0: d1,
            eta1,
            eta2,
            g2,
            g3,
        }
    }

    fn v(&self, z: C64) -> C64 {
        C64::new(std::f64::consts::PI, 0.0) * z / self.lattice.omega1
    }

    fn quasi_period_factor(&self, z0: C64, m1: i64, m2: i64) -> C64 {
        // sigma(z0 + m1 w1 + m2 w2) = eps * exp(eta_l (z0 + l/2)) sigma(z0)
        let lam = self.lattice.omega1 * (m1 as f64) + self.lattice.omega2 * (m2 as f64);
        let eta_l = self.eta1 * (2.0 * m1 as f64) + self.eta2 * (2.0 * m2 as f64);
        let sign = if (m1 + m2 + m1 * m2) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        (eta_l * (z0 + lam * 0.5)).exp() * sign
    }

    /// Weierstrass sigma, entire, odd, simple zeros on the lattice.
    pub fn sigma(&self, z: C64) -> C64 {
        let (z0, m1, m2) = self.lattice.reduce(z);
        let base = (self.lattice.omega1 / std::f64::consts::PI)
            * (self.eta1 * z0 * z0 / self.lattice.omega1).exp()
            * theta1_series(self.v(z0), self.q, 0)
            / self.theta1_d0;
        if m1 == 0 && m2 == 0 {
            base
        } else {
            self.quasi_period_factor(z0, m1, m2) * base
        }
    }

    /// Weierstrass zeta. Quasi-periodic: `zeta(z + w1) = zeta(z) + 2 eta1`.
    pub fn zeta(&self, z: C64) -> C64 {
        let (z0, m1, m2) = self.lattice.reduce(z);
        let v = self.v(z0);
        let t0 = theta1_series(v, self.q, 0);
        let t1 = theta1_series(v, self.q, 1);
        let pi_w = C64::new(std::f64::consts::PI, 0.0) / self.lattice.omega1;
        self.eta1 * 2.0 * z0 / self.lattice.omega1
            + pi_w * t1 / t0
            + self.eta1 * (2.0 * m1 as f64)
            + self.eta2 * (2.0 * m2 as f64)
    }

    /// Weierstrass wp, doubly periodic, even.
    pub fn wp(&self, z: C64) -> C64 {
        let (z0, _, _) = self.lattice.reduce(z);
        let v = self.v(z0);
        let t0 = theta1_series(v, self.q, 0);
        let t1 = theta1_series(v, self.q, 1);
        let t2 = theta1_series(v, self.q, 2);
        let pi_w = C64::new(std::f64::consts::PI, 0.0) / self.lattice.omega1;
        let r1 = t1 / t0;
        -self.eta1 * 2.0 / self.lattice.omega1 - pi_w * pi_w * (t2 / t0 - r1 * r1)
    }

    /// Derivative of wp.
    pub fn wp_prime(&self, z: C64) -> C64 {
        let (z0, _, _) = self.lattice.reduce(z);
        let v = self.v(z0);
        let t0 = theta1_series(v, self.q, 0);
        let t1 = theta1_series(v, self.q, 1);
        let t2 = theta1_series(v, self.q, 2);
        let t3 = theta1_series(v, self.q, 3);
        let pi_w = C64::new(std::f64::consts::PI, 0.0) / self.lattice.omega1;
        let r1 = t1 / t0;
        -pi_w.powi(3) * (t3 / t0 - r1 * t2 / t0 * 3.0 + r1 * r1 * r1 * 2.0)
    }

    // -----------------------------------------------------------------------
    // Power series machinery
    // -----------------------------------------------------------------------

    /// Laurent coefficients of `wp` at the origin: `wp = h^-2 + sum c_k h^{2k-2}`
    /// for `k >= 2`, via the classical recursion.
    fn origin_c(&self, kmax: usize) -> Vec<C64> {
        let mut c = vec![C64::new(0.0, 0.0); kmax + 1];
        if kmax >= 2 {
            c[2] = self.g2 / 20.0;
        }
        if kmax >= 3 {
            c[3] = self.g3 / 28.0;
        }
        for k in 4..=kmax {
            let mut s = C64::new(0.0, 0.0);
            for m in 2..=(k - 2) {
                s += c[m] * c[k - m];
            }
            c[k] = s * 3.0 / ((2 * k + 1) as f64 * (k - 3) as f64);
        }
        c
    }

    /// Taylor series of `sigma(h)` around the origin, `h - g2 h^5/240 - ...`,
    /// as `h * exp(-sum_k c_k h^{2k} / (2k (2k-1)))`.
    pub fn sigma_origin_series(&self, prec: i64) -> LaurentSeries<C64> {
        assert!(prec > 1);
        let kmax = (prec as usize) / 2 + 2;
        let c = self.origin_c(kmax);
        let mut logpart = LaurentSeries::zero(prec);
        for k in 2..=kmax {
            let e = 2 * k as i64;
            if e >= prec {
                break;
            }
            logpart = logpart.add(&LaurentSeries::monomial(
                e,
                -c[k] / (2.0 * k as f64 * (2.0 * k as f64 - 1.0)),
                prec,
            ));
        }
        let unit = logpart.exp().expect("exp of regular series");
        unit.shift(1)
    }

    /// Taylor series of `sigma(w0 + h)` around a point `w0` that is not a
    /// lattice point, to `O(h^prec)`.
    pub fn sigma_series_at(&self, w0: C64, prec: i64) -> LaurentSeries<C64> {
        assert!(prec > 0);
        let n = prec as usize;
        let p0 = self.wp(w0);
        let p1 = self.wp_prime(w0);
        // Taylor coefficients t_k of wp at w0 from wp'' = 6 wp^2 - g2/2.
        let mut t = vec![C64::new(0.0, 0.0); n + 2];
        t[0] = p0;
        if n + 2 > 1 {
            t[1] = p1;
        }
        for k in 0..n {
            let mut conv = C64::new(0.0, 0.0);
            for i in 0..=k {
                conv += t[i] * t[k - i];
            }
            let rhs = conv * 6.0 - if k == 0 { self.g2 * 0.5 } else { C64::new(0.0, 0.0) };
            t[k + 2] = rhs / ((k + 1) as f64 * (k + 2) as f64);
        }
        // zeta series: z_0 = zeta(w0), z_{k+1} = -t_k / (k+1).
        let mut zc = vec![C64::new(0.0, 0.0); n];
        zc[0] = self.zeta(w0);
        for k in 0..n.saturating_sub(1) {
            zc[k + 1] = -t[k] / (k + 1) as f64;
        }
        // log sigma increment L(h) = sum z_k h^{k+1}/(k+1), L(0) = 0.
        let mut lc = vec![C64::new(0.0, 0.0); n];
        for k in 0..n.saturating_sub(1) {
            lc[k + 1] = zc[k] / (k + 1) as f64;
        }
        let l = LaurentSeries::new(0, lc);
        let unit = l.exp().expect("exp of regular series");
        unit.scale(&self.sigma(w0))
    }

    /// Taylor series of `sigma(z - a)` in `h = z - p`, handling the case
    /// `a = p (mod lattice)` through the quasi-periodicity factors.
    pub fn sigma_factor_series(&self, p: C64, a: C64, prec: i64) -> LaurentSeries<C64> {
        let w0 = p - a;
        let (z0, m1, m2) = self.lattice.reduce(w0);
        if z0.norm() < crate::curve::CONGRUENCE_TOL {
            // sigma(h + lambda) = eps exp(eta_l (h + lambda/2)) sigma(h)
            let lam = self.lattice.omega1 * (m1 as f64) + self.lattice.omega2 * (m2 as f64);
            let eta_l = self.eta1 * (2.0 * m1 as f64) + self.eta2 * (2.0 * m2 as f64);
            let sign = if (m1 + m2 + m1 * m2) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            let constant = (eta_l * lam * 0.5).exp() * sign;
            let sig = self.sigma_origin_series(prec + 1);
            if m1 == 0 && m2 == 0 {
                return sig.truncate(prec + 1);
            }
            let expo = LaurentSeries::monomial(1, eta_l, prec);
            let expfac = expo.exp().expect("exp of linear series").scale(&constant);
            sig.mul(&expfac)
        } else {
            self.sigma_series_at(w0, prec)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_ctx() -> EllipticCtx {
        EllipticCtx::new(Lattice::new(C64::new(1.0, 0.0), C64::new(0.0, 1.0)).unwrap())
    }

    fn skew_ctx() -> EllipticCtx {
        EllipticCtx::new(Lattice::new(C64::new(1.3, 0.2), C64::new(0.4, 1.1)).unwrap())
    }

    fn sample_points() -> Vec<C64> {
        vec![
            C64::new(0.31, 0.17),
            C64::new(-0.22, 0.41),
            C64::new(0.11, -0.36),
            C64::new(0.47, 0.05),
            C64::new(-0.39, -0.27),
            C64::new(0.06, 0.44),
            C64::new(0.26, 0.31),
            C64::new(-0.17, 0.09),
            C64::new(0.43, -0.21),
            C64::new(-0.08, -0.12),
        ]
    }

    #[test]
    fn sigma_normalization_and_oddness() {
        for ctx in [square_ctx(), skew_ctx()] {
            assert!(ctx.sigma(C64::new(0.0, 0.0)).norm() < 1e-14);
            // sigma'(0) = 1 via a symmetric difference quotient.
            let h = 1e-5;
            let d = (ctx.sigma(C64::new(h, 0.0)) - ctx.sigma(C64::new(-h, 0.0))) / (2.0 * h);
            assert!((d - C64::new(1.0, 0.0)).norm() < 1e-9, "sigma'(0) = {d}");
            for z in sample_points() {
                let s = ctx.sigma(z) + ctx.sigma(-z);
                assert!(s.norm() < 1e-12, "sigma not odd at {z}: {s}");
            }
        }
    }

    #[test]
    fn wp_even_and_periodic() {
        for ctx in [square_ctx(), skew_ctx()] {
            for z in sample_points() {
                let d = ctx.wp(z) - ctx.wp(-z);
                assert!(d.norm() < 1e-10, "wp not even at {z}");
                let p1 = ctx.wp(z + ctx.lattice.omega1) - ctx.wp(z);
                let p2 = ctx.wp(z + ctx.lattice.omega2) - ctx.wp(z);
                assert!(p1.norm() < 1e-9 && p2.norm() < 1e-9, "wp not periodic at {z}");
            }
        }
    }

    #[test]
    fn differential_equation_ties_theta_and_eisenstein() {
        for ctx in [square_ctx(), skew_ctx()] {
            for z in sample_points() {
                let p = ctx.wp(z);
                let dp = ctx.wp_prime(z);
                let lhs = dp * dp;
                let rhs = p * p * p * 4.0 - ctx.g2 * p - ctx.g3;
                let scale = lhs.norm().max(rhs.norm()).max(1.0);
                assert!(
                    (lhs - rhs).norm() < 1e-9 * scale,
                    "wp'^2 mismatch at {z}: {} vs {}",
                    lhs,
                    rhs
                );
            }
        }
    }

    #[test]
    fn zeta_quasi_periods() {
        let ctx = square_ctx();
        for z in sample_points().into_iter().take(4) {
            let d1 = ctx.zeta(z + ctx.lattice.omega1) - ctx.zeta(z) - ctx.eta1 * 2.0;
            let d2 = ctx.zeta(z + ctx.lattice.omega2) - ctx.zeta(z) - ctx.eta2 * 2.0;
            assert!(d1.norm() < 1e-10, "eta1 off: {d1}");
            assert!(d2.norm() < 1e-10, "eta2 off: {d2}");
        }
    }

    #[test]
    fn zeta_derivative_is_minus_wp() {
        let ctx = skew_ctx();
        let z = C64::new(0.23, 0.11);
        let h = 1e-5;
        let d = (ctx.zeta(z + C64::new(h, 0.0)) - ctx.zeta(z - C64::new(h, 0.0))) / (2.0 * h);
        assert!((d + ctx.wp(z)).norm() < 1e-7);
    }

    #[test]
    fn sigma_quasi_periodicity() {
        let ctx = square_ctx();
        let z = C64::new(0.21, 0.13);
        let lhs = ctx.sigma(z + ctx.lattice.omega1);
        let rhs = -(ctx.eta1 * 2.0 * (z + ctx.lattice.omega1 * 0.5)).exp() * ctx.sigma(z);
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn origin_series_matches_evaluation() {
        let ctx = square_ctx();
        let s = ctx.sigma_origin_series(16);
        for h in [C64::new(0.08, 0.03), C64::new(-0.05, 0.06)] {
            let direct = ctx.sigma(h);
            let via = s.eval(h);
            assert!((direct - via).norm() < 1e-12, "{direct} vs {via}");
        }
    }

    #[test]
    fn shifted_series_matches_evaluation() {
        for ctx in [square_ctx(), skew_ctx()] {
            let w0 = C64::new(0.31, 0.22);
            let s = ctx.sigma_series_at(w0, 20);
            for h in [C64::new(0.04, -0.02), C64::new(-0.03, 0.05)] {
                let direct = ctx.sigma(w0 + h);
                let via = s.eval(h);
                assert!(
                    (direct - via).norm() < 1e-11 * direct.norm().max(1.0),
                    "{direct} vs {via}"
                );
            }
        }
    }

    #[test]
    fn factor_series_at_congruent_point() {
        // sigma(z - a) with a = p - w1: series in h = z - p must match
        // direct evaluation through the quasi-period factor.
        let ctx = square_ctx();
        let p = C64::new(0.3, 0.4);
        let a = p - ctx.lattice.omega1;
        let s = ctx.sigma_factor_series(p, a, 12);
        for h in [C64::new(0.03, 0.02), C64::new(-0.04, 0.01)] {
            let direct = ctx.sigma(p + h - a);
            let via = s.eval(h);
            assert!(
                (direct - via).norm() < 1e-11 * direct.norm().max(1.0),
                "{direct} vs {via}"
            );
        }
    }
}
