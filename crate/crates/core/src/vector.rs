//! Small complex vectors with an exact track.
//!
//! An exact vector is stored as Gaussian-integer numerators over the square
//! root of an integer, `num / √den_sq`. Squared overlaps of two such vectors
//! are exact rationals, so probabilities like 1/12 or 19/6 come out exactly.

use std::fmt;

use num_complex::{Complex, Complex64};
use num_integer::Roots;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VectorError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("numerators have squared norm {actual}, expected den_sq = {den_sq}")]
    NotNormalized { actual: i64, den_sq: i64 },
    #[error("vector is empty")]
    Empty,
    #[error("non-positive normalizer {0}")]
    BadNormalizer(i64),
    #[error("declared dim {declared} but {actual} amplitudes")]
    DeclaredDim { declared: usize, actual: usize },
    #[error("vector must carry either `num`/`den_sq` or `amp`")]
    MissingAmplitudes,
}

/// `num / √den_sq` with `Σ |num_k|² = den_sq`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactVector {
    num: Vec<Complex<i64>>,
    den_sq: i64,
}

impl ExactVector {
    pub fn new(num: Vec<Complex<i64>>, den_sq: i64) -> Result<Self, VectorError> {
        if num.is_empty() {
            return Err(VectorError::Empty);
        }
        if den_sq <= 0 {
            return Err(VectorError::BadNormalizer(den_sq));
        }
        let actual: i64 = num.iter().map(|z| z.norm_sqr()).sum();
        if actual != den_sq {
            return Err(VectorError::NotNormalized { actual, den_sq });
        }
        Ok(ExactVector { num, den_sq })
    }

    /// Real integer entries; the normalizer is their squared norm.
    pub fn from_integers(entries: &[i64]) -> Result<Self, VectorError> {
        let den_sq = entries.iter().map(|v| v * v).sum();
        Self::new(entries.iter().map(|&v| Complex::new(v, 0)).collect(), den_sq)
    }

    pub fn numerators(&self) -> &[Complex<i64>] {
        &self.num
    }

    pub fn den_sq(&self) -> i64 {
        self.den_sq
    }

    pub fn dim(&self) -> usize {
        self.num.len()
    }

    /// Unnormalized inner product `Σ conj(self_k) other_k` of the numerators.
    pub fn raw_inner(&self, other: &ExactVector) -> Result<Complex<i64>, VectorError> {
        if self.dim() != other.dim() {
            return Err(VectorError::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(self.num.iter().zip(&other.num).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|²` as an exact rational.
    pub fn overlap_sq(&self, other: &ExactVector) -> Result<Rational, VectorError> {
        let s = self.raw_inner(other)?;
        Ok(Rational::new(s.norm_sqr(), self.den_sq * other.den_sq))
    }

    pub fn to_float(&self) -> Vec<Complex64> {
        let n = (self.den_sq as f64).sqrt();
        self.num.iter().map(|z| Complex64::new(z.re as f64 / n, z.im as f64 / n)).collect()
    }
}

/// A unit vector, exact when its entries allow it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorRepr", into = "VectorRepr")]
pub enum StateVector {
    Exact(ExactVector),
    Float(Vec<Complex64>),
}

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    num: Option<Vec<Complex<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    den_sq: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amp: Option<Vec<Complex64>>,
}

impl TryFrom<VectorRepr> for StateVector {
    type Error = VectorError;
    fn try_from(r: VectorRepr) -> Result<Self, Self::Error> {
        let v = match (r.num, r.den_sq, r.amp) {
            (Some(num), Some(den_sq), _) => StateVector::Exact(ExactVector::new(num, den_sq)?),
            (_, _, Some(amp)) => StateVector::float(amp)?,
            _ => return Err(VectorError::MissingAmplitudes),
        };
        if v.dim() != r.dim {
            return Err(VectorError::DeclaredDim { declared: r.dim, actual: v.dim() });
        }
        Ok(v)
    }
}

impl From<StateVector> for VectorRepr {
    fn from(v: StateVector) -> Self {
        let dim = v.dim();
        match v {
            StateVector::Exact(e) => VectorRepr { dim, num: Some(e.num), den_sq: Some(e.den_sq), amp: None },
            StateVector::Float(a) => VectorRepr { dim, num: None, den_sq: None, amp: Some(a) },
        }
    }
}

/// Float unit-norm tolerance.
pub const NORM_TOL: f64 = 1e-12;

impl StateVector {
    pub fn exact(entries: &[i64]) -> Result<Self, VectorError> {
        ExactVector::from_integers(entries).map(StateVector::Exact)
    }

    /// Wraps float amplitudes without renormalizing.
    pub fn float(amp: Vec<Complex64>) -> Result<Self, VectorError> {
        if amp.is_empty() {
            return Err(VectorError::Empty);
        }
        Ok(StateVector::Float(amp))
    }

    /// Normalizes real amplitudes.
    pub fn normalized_real(entries: &[f64]) -> Result<Self, VectorError> {
        let n = entries.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self::float(entries.iter().map(|&v| Complex64::new(v / n, 0.0)).collect())
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut e = vec![0i64; dim];
        e[k] = 1;
        Self::exact(&e).expect("basis vector is normalized")
    }

    pub fn dim(&self) -> usize {
        match self {
            StateVector::Exact(e) => e.dim(),
            StateVector::Float(a) => a.len(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, StateVector::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&ExactVector> {
        match self {
            StateVector::Exact(e) => Some(e),
            StateVector::Float(_) => None,
        }
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        match self {
            StateVector::Exact(e) => e.to_float(),
            StateVector::Float(a) => a.clone(),
        }
    }

    /// `|‖v‖² − 1|`; exactly zero on the exact track.
    pub fn norm_residual(&self) -> f64 {
        match self {
            StateVector::Exact(_) => 0.0,
            StateVector::Float(a) => (a.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs(),
        }
    }

    /// `⟨self|other⟩` in floating point.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64, VectorError> {
        if self.dim() != other.dim() {
            return Err(VectorError::DimensionMismatch(self.dim(), other.dim()));
        }
        let (a, b) = (self.amplitudes(), other.amplitudes());
        Ok(a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum())
    }

    /// `|⟨self|other⟩|²`, exact when both vectors are.
    pub fn overlap_sq(&self, other: &StateVector) -> Result<Scalar, VectorError> {
        match (self, other) {
            (StateVector::Exact(a), StateVector::Exact(b)) => a.overlap_sq(b).map(Scalar::from),
            _ => self.inner(other).map(|z| Scalar::float(z.norm_sqr())),
        }
    }

    /// Whether the inner product vanishes: exactly on the exact track, else within `tol`.
    pub fn is_orthogonal_to(&self, other: &StateVector, tol: f64) -> Result<bool, VectorError> {
        match (self, other) {
            (StateVector::Exact(a), StateVector::Exact(b)) => Ok(a.raw_inner(b)?.is_zero()),
            _ => Ok(self.inner(other)?.norm() <= tol),
        }
    }
}

/// A real number that may also be known exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scalar {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Rational>,
}

impl Scalar {
    pub fn float(value: f64) -> Self {
        Scalar { value, exact: None }
    }

    pub fn zero() -> Self {
        Scalar::from(Rational::zero())
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar { value: *r.numer() as f64 / *r.denom() as f64, exact: Some(r) }
    }
}

impl std::ops::Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar {
            value: self.value + rhs.value,
            exact: match (self.exact, rhs.exact) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
        }
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |a, b| a + b)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Some(r) => write!(f, "{}/{} ({:.6})", r.numer(), r.denom(), self.value),
            None => write!(f, "{:.6}", self.value),
        }
    }
}

/// `±√square` for a non-negative rational `square`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtRational {
    pub negative: bool,
    pub square: Rational,
}

impl SqrtRational {
    /// `√(n/d)`.
    pub fn sqrt_of(n: i64, d: i64) -> Self {
        SqrtRational { negative: false, square: Rational::new(n, d) }
    }

    pub fn rational(r: Rational) -> Self {
        SqrtRational { negative: r.is_negative(), square: r * r }
    }

    pub fn to_f64(&self) -> f64 {
        let v = (*self.square.numer() as f64 / *self.square.denom() as f64).sqrt();
        if self.negative {
            -v
        } else {
            v
        }
    }

    /// The value as a rational, when `square` is a perfect rational square.
    pub fn as_rational(&self) -> Option<Rational> {
        rational_sqrt(self.square).map(|r| if self.negative { -r } else { r })
    }
}

/// Exact square root of a non-negative rational, if it is rational.
pub fn rational_sqrt(r: Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (*r.numer(), *r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (sn * sn == n && sd * sd == d).then(|| Rational::new(sn, sd))
}
