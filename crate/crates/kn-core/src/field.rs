//! Coefficient arithmetic.
//!
//! Genus-zero data is exact: coefficients live in the Gaussian rationals
//! `Q(i)`. Genus-one data is numeric: coefficients are complex doubles.
//! Everything downstream of the curve layer (bases, structure constants,
//! banded operators, wedge vectors) is generic over the [`Coeff`] / [`Field`]
//! traits so the same algorithms run in both regimes.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Complex double-precision scalar used by the genus-one backend.
pub type C64 = Complex64;

/// Ring operations required of every coefficient type.
pub trait Coeff:
    Clone
    + fmt::Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    /// Approximate magnitude, used only to rank pivots and report residuals.
    /// Exactness decisions never depend on it.
    fn magnitude(&self) -> f64;
    /// Whether the value counts as zero at tolerance `tol`. Exact types
    /// ignore `tol` and test exact vanishing.
    fn is_negligible(&self, tol: f64) -> bool;
    /// True for exact (rational) scalars, false for floating-point ones.
    const EXACT: bool;
}

/// Coefficient types supporting division.
pub trait Field: Coeff + Div<Output = Self> {
    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }
}

// ---------------------------------------------------------------------------
// Gaussian rationals
// ---------------------------------------------------------------------------

/// An exact Gaussian rational `re + im*i` with `BigRational` parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussQ {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussQ {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussQ { re, im }
    }

    pub fn from_int(v: i64) -> Self {
        GaussQ {
            re: BigRational::from_integer(BigInt::from(v)),
            im: BigRational::zero(),
        }
    }

    /// `num/den` as a real rational.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        GaussQ {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    /// `a + b*i` from integer parts.
    pub fn from_parts(a: i64, b: i64) -> Self {
        GaussQ {
            re: BigRational::from_integer(BigInt::from(a)),
            im: BigRational::from_integer(BigInt::from(b)),
        }
    }

    pub fn i() -> Self {
        GaussQ::from_parts(0, 1)
    }

    pub fn conj(&self) -> Self {
        GaussQ {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// |re| + |im|, an exact comparable norm.
    pub fn norm1(&self) -> BigRational {
        self.re.abs() + self.im.abs()
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl fmt::Debug for GaussQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl fmt::Display for GaussQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Add for GaussQ {
    type Output = GaussQ;
    fn add(self, rhs: GaussQ) -> GaussQ {
        GaussQ {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for GaussQ {
    type Output = GaussQ;
    fn sub(self, rhs: GaussQ) -> GaussQ {
        GaussQ {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Mul for GaussQ {
    type Output = GaussQ;
    fn mul(self, rhs: GaussQ) -> GaussQ {
        GaussQ {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for GaussQ {
    type Output = GaussQ;
    fn neg(self) -> GaussQ {
        GaussQ {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Div for GaussQ {
    type Output = GaussQ;
    fn div(self, rhs: GaussQ) -> GaussQ {
        let d = &rhs.re * &rhs.re + &rhs.im * &rhs.im;
        assert!(!d.is_zero(), "division by zero GaussQ");
        GaussQ {
            re: (&self.re * &rhs.re + &self.im * &rhs.im) / &d,
            im: (&self.im * &rhs.re - &self.re * &rhs.im) / &d,
        }
    }
}

impl Coeff for GaussQ {
    fn zero() -> Self {
        GaussQ {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }
    fn one() -> Self {
        GaussQ {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }
    fn from_i64(v: i64) -> Self {
        GaussQ::from_int(v)
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        Coeff::is_zero(self)
    }
    const EXACT: bool = true;
}

impl Field for GaussQ {}

// ---------------------------------------------------------------------------
// Complex doubles
// ---------------------------------------------------------------------------

impl Coeff for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        C64::new(v as f64, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() < tol
    }
    const EXACT: bool = false;
}

impl Field for C64 {}
