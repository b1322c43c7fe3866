//! Curve backends: the rational line with marked points `0` and `infinity`,
//! and complex tori `C / (Z w1 + Z w2)` with two marked points.
//!
//! Local parameters are fixed once and for all: `z` at `0` and `1/z` at
//! `infinity` for genus zero, and `z - p` at a point `p` of a torus.

use crate::error::{KnError, Result};
use crate::field::{GaussQ, C64};
use serde::{Deserialize, Serialize};

/// Tolerance used to decide congruence of points modulo the lattice.
pub const CONGRUENCE_TOL: f64 = 1e-10;

/// A point of the genus-zero model: a Gaussian rational or infinity.
#[derive(Clone, Debug, PartialEq)]
pub enum RatPoint {
    Finite(GaussQ),
    Infinity,
}

impl RatPoint {
    pub fn zero() -> Self {
        RatPoint::Finite(GaussQ::from_int(0))
    }
}

/// Marked points and divisor support points, tagged by backend.
#[derive(Clone, Debug, PartialEq)]
pub enum CurvePoint {
    Rational(RatPoint),
    Torus(C64),
}

impl CurvePoint {
    pub fn finite(re: f64, im: f64) -> Self {
        CurvePoint::Torus(C64::new(re, im))
    }

    pub fn as_torus(&self) -> Result<C64> {
        match self {
            CurvePoint::Torus(z) => Ok(*z),
            _ => Err(KnError::ShapeMismatch("expected a torus point".into())),
        }
    }
}

/// Lattice data for a genus-one curve, canonicalized so that
/// `Im(w2/w1) > 0`.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub omega1: C64,
    pub omega2: C64,
}

impl Lattice {
    pub fn new(omega1: C64, omega2: C64) -> Result<Self> {
        let ratio = omega2 / omega1;
        if ratio.im.abs() < 1e-12 {
            return Err(KnError::DegenerateLattice { ratio: ratio.re });
        }
        if ratio.im > 0.0 {
            Ok(Lattice { omega1, omega2 })
        } else {
            Ok(Lattice {
                omega1,
                omega2: -omega2,
            })
        }
    }

    pub fn tau(&self) -> C64 {
        self.omega2 / self.omega1
    }

    /// Real coordinates of `z` in the period basis.
    pub fn coords(&self, z: C64) -> (f64, f64) {
        let det = self.omega1.re * self.omega2.im - self.omega1.im * self.omega2.re;
        let c1 = (z.re * self.omega2.im - z.im * self.omega2.re) / det;
        let c2 = (self.omega1.re * z.im - self.omega1.im * z.re) / det;
        (c1, c2)
    }

    /// Reduces `z` into the fundamental cell centred at the origin and
    /// returns `(z0, m1, m2)` with `z = z0 + m1 w1 + m2 w2`.
    pub fn reduce(&self, z: C64) -> (C64, i64, i64) {
        let (c1, c2) = self.coords(z);
        let m1 = c1.round() as i64;
        let m2 = c2.round() as i64;
        let z0 = z - self.omega1 * (m1 as f64) - self.omega2 * (m2 as f64);
        (z0, m1, m2)
    }

    /// Nearest lattice point to `z` and the distance to it.
    pub fn lattice_distance(&self, z: C64) -> f64 {
        // The rounded representative is not always the closest for very
        // skew lattices; checking the 3x3 neighbourhood is enough here.
        let (z0, _, _) = self.reduce(z);
        let mut best = f64::INFINITY;
        for a in -1..=1 {
            for b in -1..=1 {
                let d = (z0 - self.omega1 * (a as f64) - self.omega2 * (b as f64)).norm();
                best = best.min(d);
            }
        }
        best
    }

    pub fn congruent(&self, a: C64, b: C64, tol: f64) -> bool {
        self.lattice_distance(a - b) < tol
    }

    /// Distance between `a` and `b` as points of the torus.
    pub fn torus_distance(&self, a: C64, b: C64) -> f64 {
        self.lattice_distance(a - b)
    }
}

/// A curve with two marked points. Genus zero is exact; genus one carries a
/// lattice, a working tolerance and a cached expansion order.
#[derive(Clone, Debug)]
pub enum CurveModel {
    Rational {
        expansion_order: i64,
    },
    Elliptic {
        lattice: Lattice,
        p_plus: C64,
        p_minus: C64,
        tolerance: f64,
        expansion_order: i64,
    },
}

impl CurveModel {
    pub fn genus(&self) -> u8 {
        match self {
            CurveModel::Rational { .. } => 0,
            CurveModel::Elliptic { .. } => 1,
        }
    }

    pub fn expansion_order(&self) -> i64 {
        match self {
            CurveModel::Rational { expansion_order } => *expansion_order,
            CurveModel::Elliptic {
                expansion_order, ..
            } => *expansion_order,
        }
    }

    pub fn tolerance(&self) -> f64 {
        match self {
            CurveModel::Rational { .. } => 0.0,
            CurveModel::Elliptic { tolerance, .. } => *tolerance,
        }
    }

    pub fn p_plus(&self) -> CurvePoint {
        match self {
            CurveModel::Rational { .. } => CurvePoint::Rational(RatPoint::zero()),
            CurveModel::Elliptic { p_plus, .. } => CurvePoint::Torus(*p_plus),
        }
    }

    pub fn p_minus(&self) -> CurvePoint {
        match self {
            CurveModel::Rational { .. } => CurvePoint::Rational(RatPoint::Infinity),
            CurveModel::Elliptic { p_minus, .. } => CurvePoint::Torus(*p_minus),
        }
    }

    pub fn lattice(&self) -> Result<&Lattice> {
        match self {
            CurveModel::Elliptic { lattice, .. } => Ok(lattice),
            _ => Err(KnError::UnsupportedGenusOperation {
                required: 1,
                got: 0,
            }),
        }
    }
}

/// The rational line with `P+ = 0`, `P- = infinity`, `z+ = z`, `z- = 1/z`.
pub fn make_rational_curve() -> CurveModel {
    CurveModel::Rational {
        expansion_order: 64,
    }
}

/// A torus `C / (Z w1 + Z w2)` with marked points `p_plus`, `p_minus`.
pub fn make_elliptic_curve(omega1: C64, omega2: C64, p_plus: C64, p_minus: C64) -> Result<CurveModel> {
    make_elliptic_curve_with(omega1, omega2, p_plus, p_minus, 1e-9, 24)
}

pub fn make_elliptic_curve_with(
    omega1: C64,
    omega2: C64,
    p_plus: C64,
    p_minus: C64,
    tolerance: f64,
    expansion_order: i64,
) -> Result<CurveModel> {
    let lattice = Lattice::new(omega1, omega2)?;
    if lattice.congruent(p_plus, p_minus, CONGRUENCE_TOL) {
        return Err(KnError::CoincidentPoints);
    }
    Ok(CurveModel::Elliptic {
        lattice,
        p_plus,
        p_minus,
        tolerance,
        expansion_order,
    })
}

// ---------------------------------------------------------------------------
// JSON configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct CurveConfig {
    pub genus: u8,
    #[serde(default)]
    pub omega1: Option<[f64; 2]>,
    #[serde(default)]
    pub omega2: Option<[f64; 2]>,
    #[serde(default)]
    pub p_plus: Option<[f64; 2]>,
    #[serde(default)]
    pub p_minus: Option<[f64; 2]>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub expansion_order: Option<i64>,
}

impl CurveConfig {
    pub fn build(&self) -> Result<CurveModel> {
        match self.genus {
            0 => Ok(make_rational_curve()),
            1 => {
                let c = |v: Option<[f64; 2]>, name: &str| -> Result<C64> {
                    v.map(|[re, im]| C64::new(re, im))
                        .ok_or_else(|| KnError::Config(format!("genus 1 requires `{name}`")))
                };
                make_elliptic_curve_with(
                    c(self.omega1, "omega1")?,
                    c(self.omega2, "omega2")?,
                    c(self.p_plus, "p_plus")?,
                    c(self.p_minus, "p_minus")?,
                    self.tolerance.unwrap_or(1e-9),
                    self.expansion_order.unwrap_or(24),
                )
            }
            g => Err(KnError::Config(format!("unsupported genus {g}"))),
        }
    }
}

pub fn curve_from_json(text: &str) -> Result<CurveModel> {
    let cfg: CurveConfig =
        serde_json::from_str(text).map_err(|e| KnError::Config(format!("curve config: {e}")))?;
    cfg.build()
}
