//! Exact positive-spectrum certificates.
//!
//! The characteristic polynomial is computed without division (Berkowitz),
//! split into square-free factors, and each factor's real roots are isolated
//! by Sturm sequences and bisection. Floating eigenvalues are reported next to
//! the certificate but never decide it.

use std::fmt;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::poly::{IntegerPoly, Poly, SturmChain};
use crate::scalar::{format_rational, rat, serde_rational, Rational, Scalar};

/// Isolating intervals are refined to at most this width before reporting.
pub fn refine_width() -> Rational {
    rat(1, 1_000_000_000_000)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumVerdict {
    #[serde(rename = "ALL_POSITIVE")]
    AllPositive,
    #[serde(rename = "NOT_ALL_POSITIVE")]
    NotAllPositive,
}

impl fmt::Display for SpectrumVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectrumVerdict::AllPositive => "ALL_POSITIVE",
            SpectrumVerdict::NotAllPositive => "NOT_ALL_POSITIVE",
        })
    }
}

/// A real root in `(lo, hi]`, or exactly `lo` when `lo == hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootInterval {
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
    pub multiplicity: usize,
}

impl RootInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        if self.is_exact() {
            x == &self.lo
        } else {
            &self.lo < x && x <= &self.hi
        }
    }
}

/// Result of [`isolate_positive_roots`].
#[derive(Debug, Clone, PartialEq)]
pub struct RootIsolation {
    pub intervals: Vec<RootInterval>,
    pub verdict: SpectrumVerdict,
    pub positive_count: usize,
    pub diagnostic: Option<String>,
}

/// Exact spectrum certificate for a square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub dim: usize,
    /// Monic characteristic polynomial `det(xI - M)`, highest degree first.
    #[serde(with = "serde_rational::vec")]
    pub charpoly: Vec<Rational>,
    pub isolating_intervals: Vec<RootInterval>,
    /// `[re, im]` pairs sorted by real part; advisory only.
    pub float_eigenvalues: Vec<[f64; 2]>,
    pub verdict: SpectrumVerdict,
    pub positive_count: usize,
    pub diagnostic: Option<String>,
}

impl SpectrumReport {
    /// Smallest left endpoint over all isolating intervals.
    pub fn min_root_lower_bound(&self) -> Option<Rational> {
        self.isolating_intervals.iter().map(|i| i.lo.clone()).min()
    }

    /// True when every float eigenvalue lies within `tol` of the midpoint of
    /// some isolating interval.
    pub fn float_agrees(&self, tol: f64) -> bool {
        self.float_eigenvalues.iter().all(|[re, im]| {
            self.isolating_intervals.iter().any(|i| {
                let mid = Scalar::to_f64(&i.midpoint());
                Complex64::new(re - mid, *im).norm() <= tol
            })
        })
    }
}

/// Division-free characteristic polynomial (Berkowitz), coefficients of
/// `det(xI - M)` from highest degree down.
pub fn berkowitz<S: Scalar>(m: &Matrix<S>) -> Vec<S> {
    assert!(m.is_square(), "characteristic polynomial of a non-square matrix");
    let n = m.rows();
    let mut poly = vec![S::one()];
    for k in 0..n {
        // leading k x k block A, column c = M[0..k, k], row r = M[k, 0..k]
        let col: Vec<S> = (0..k).map(|i| m[(i, k)].clone()).collect();
        let row: Vec<S> = (0..k).map(|j| m[(k, j)].clone()).collect();
        let mut toeplitz = Vec::with_capacity(k + 2);
        toeplitz.push(S::one());
        toeplitz.push(-m[(k, k)].clone());
        let mut power = col;
        for _ in 0..k {
            let dot = row.iter().zip(&power).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
            toeplitz.push(-dot);
            power = (0..k)
                .map(|i| (0..k).fold(S::zero(), |acc, j| acc + m[(i, j)].clone() * power[j].clone()))
                .collect();
        }
        // new poly = T * poly, T lower-triangular Toeplitz of size (k+2) x (k+1)
        poly = (0..k + 2)
            .map(|i| {
                (0..=k.min(i)).fold(S::zero(), |acc, j| {
                    if i - j < toeplitz.len() {
                        acc + toeplitz[i - j].clone() * poly[j].clone()
                    } else {
                        acc
                    }
                })
            })
            .collect();
    }
    poly
}

/// Exact monic characteristic polynomial.
pub fn charpoly_exact<S: Scalar>(m: &Matrix<S>) -> Result<Poly> {
    if !S::EXACT {
        return Err(Error::WrongBackend);
    }
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!("characteristic polynomial needs a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let exact = m.map(|x| x.to_rational().expect("exact backend"));
    Ok(Poly::from_descending(berkowitz(&exact)))
}

/// Narrows `(lo, hi]`, known to hold exactly one root of the square-free
/// polynomial `f`, to width at most `width`; a left endpoint of zero is pushed
/// strictly positive. The root is simple, so `f` has the sign of `f(hi)` on
/// `(root, hi]` and the opposite sign on `(lo, root)`.
fn refine(f: &IntegerPoly, mut lo: Rational, mut hi: Rational, width: &Rational) -> (Rational, Rational) {
    let two = Rational::from_integer(2.into());
    let hi_sign = f.sign_at(&hi);
    if hi_sign == 0 {
        return (hi.clone(), hi);
    }
    while &(&hi - &lo) > width || lo.is_zero() {
        let mid = (&lo + &hi) / &two;
        let sign = f.sign_at(&mid);
        if sign == 0 {
            return (mid.clone(), mid);
        }
        if sign == hi_sign {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// All real roots of a square-free polynomial, isolated and refined.
fn isolate_square_free(f: &Poly, width: &Rational) -> Vec<(Rational, Rational)> {
    let chain = SturmChain::new(f);
    let scaled = IntegerPoly::new(f);
    let bound = f.root_bound();
    let mut out = Vec::new();
    // splitting at zero keeps every interval on one side of it
    let mut pending = vec![(-bound.clone(), Rational::zero()), (Rational::zero(), bound)];
    while let Some((lo, hi)) = pending.pop() {
        match chain.roots_in(&lo, &hi) {
            0 => {}
            1 => out.push(refine(&scaled, lo, hi, width)),
            _ => {
                let mid = (&lo + &hi) / Rational::from_integer(2.into());
                pending.push((lo, mid.clone()));
                pending.push((mid, hi));
            }
        }
    }
    out
}

/// Isolates every real root of `p` (with multiplicity) and decides whether all
/// roots are real and strictly positive.
pub fn isolate_positive_roots(p: &Poly) -> Result<RootIsolation> {
    let Some(degree) = p.degree() else {
        return Err(Error::InvalidArgument("cannot isolate the roots of the zero polynomial".into()));
    };
    let width = refine_width();
    let mut intervals: Vec<RootInterval> = p
        .square_free_decomposition()
        .into_iter()
        .flat_map(|(factor, multiplicity)| {
            isolate_square_free(&factor, &width)
                .into_iter()
                .map(move |(lo, hi)| RootInterval { lo, hi, multiplicity })
        })
        .collect();
    intervals.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));

    let real: usize = intervals.iter().map(|i| i.multiplicity).sum();
    let positive_count: usize = intervals.iter().filter(|i| i.lo.is_positive()).map(|i| i.multiplicity).sum();
    let zero_root = p.eval(&Rational::zero()).is_zero();
    let diagnostic = if zero_root {
        Some("zero is a root".to_string())
    } else if real < degree {
        Some(format!("{real} of {degree} roots are real"))
    } else if positive_count < degree {
        Some(format!("{} of {degree} roots are negative", degree - positive_count))
    } else {
        None
    };
    let verdict = if diagnostic.is_none() { SpectrumVerdict::AllPositive } else { SpectrumVerdict::NotAllPositive };
    Ok(RootIsolation { intervals, verdict, positive_count, diagnostic })
}

/// Exact characteristic polynomial, root isolation and a floating cross-check.
pub fn certify_spectrum<S: Scalar>(m: &Matrix<S>) -> Result<SpectrumReport> {
    let p = charpoly_exact(m)?;
    let iso = isolate_positive_roots(&p)?;
    let float_eigenvalues = float_eigen(&m.to_f64())?.into_iter().map(|z| [z.re, z.im]).collect();
    Ok(SpectrumReport {
        dim: m.rows(),
        charpoly: p.descending(),
        isolating_intervals: iso.intervals,
        float_eigenvalues,
        verdict: iso.verdict,
        positive_count: iso.positive_count,
        diagnostic: iso.diagnostic,
    })
}

const MAX_SCHUR_ITERATIONS: usize = 100_000;

/// Eigenvalues by the real Schur decomposition, sorted by real part then
/// imaginary part.
pub fn float_eigen<S: Scalar>(m: &Matrix<S>) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("eigenvalues of a non-square matrix".into()));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let dense = DMatrix::from_fn(n, n, |i, j| m[(i, j)].to_f64());
    if dense.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericFailure("matrix has non-finite entries".into()));
    }
    let schur = Schur::try_new(dense, f64::EPSILON, MAX_SCHUR_ITERATIONS)
        .ok_or_else(|| Error::NumericFailure(format!("Schur iteration did not converge for a {n}x{n} matrix")))?;
    let mut eig: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(eig)
}

impl fmt::Display for RootInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{{{}}}", format_rational(&self.lo))?;
        } else {
            write!(f, "({}, {}]", format_rational(&self.lo), format_rational(&self.hi))?;
        }
        if self.multiplicity > 1 {
            write!(f, " x{}", self.multiplicity)?;
        }
        Ok(())
    }
}

impl SpectrumReport {
    pub fn is_all_positive(&self) -> bool {
        self.verdict == SpectrumVerdict::AllPositive
    }

    pub fn degree(&self) -> usize {
        self.charpoly.len().saturating_sub(1)
    }

    pub fn leading_is_one(&self) -> bool {
        self.charpoly.first().is_some_and(One::is_one)
    }
}
