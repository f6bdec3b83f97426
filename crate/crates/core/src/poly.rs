//! Univariate polynomials over the rationals, with the Sturm-sequence and
//! square-free machinery used for exact root isolation.

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, Zero};

use crate::scalar::{common_denominator, format_rational, Rational};

/// Polynomial with coefficients stored lowest degree first; never has a
/// trailing zero coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// From coefficients listed highest degree first.
    pub fn from_descending(coeffs: Vec<Rational>) -> Self {
        Self::new(coeffs.into_iter().rev().collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `x - root`.
    pub fn linear(root: Rational) -> Self {
        Self::new(vec![-root, Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn descending(&self) -> Vec<Rational> {
        self.coeffs.iter().rev().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has none.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(i.into()))
                .collect(),
        )
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lead = self.leading();
        Self::new(self.coeffs.iter().map(|c| c / &lead).collect())
    }

    pub fn scale(&self, t: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * t).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Self, i: usize| p.coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
        Self::new((0..n).map(|i| get(self, i) - get(other, i)).collect())
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let d = divisor.degree().expect("polynomial division by zero");
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - d];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + d] / &lead;
            if !c.is_zero() {
                for (j, b) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * b;
                }
            }
            quot[i] = c;
        }
        rem.truncate(d);
        (Self::new(quot), Self::new(rem))
    }

    /// Exact quotient, for divisors known to divide `self`.
    pub fn exact_div(&self, divisor: &Self) -> Self {
        let (q, r) = self.div_rem(divisor);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun's square-free decomposition: monic, pairwise coprime, square-free
    /// factors paired with their multiplicities.
    pub fn square_free_decomposition(&self) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.exact_div(&a0);
        let mut c = df.exact_div(&a0);
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), i));
            }
            b = b.exact_div(&a);
            c = d.exact_div(&a);
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    /// Canonical Sturm chain `p, p', -rem(p, p'), ...`.
    pub fn sturm_sequence(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone()];
        if self.is_zero() {
            return seq;
        }
        let mut next = self.derivative();
        while !next.is_zero() {
            let rem = seq.last().expect("nonempty").div_rem(&next).1;
            seq.push(next);
            next = rem.scale(&-Rational::one());
        }
        seq
    }

    /// Strict upper bound on the absolute value of every root.
    pub fn root_bound(&self) -> Rational {
        let lead = self.leading().abs();
        let n = self.coeffs.len().saturating_sub(1);
        let max = self.coeffs[..n].iter().map(|c| c.abs() / &lead).max().unwrap_or_else(Rational::zero);
        Rational::one() + max
    }
}

/// Sign variations of a Sturm chain at `x`, zeros skipped.
pub fn sign_variations(seq: &[Poly], x: &Rational) -> usize {
    count_variations(seq.iter().map(|p| IntegerPoly::new(p).sign_at(x)))
}

fn count_variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0;
    let mut count = 0;
    for s in signs.filter(|&s| s != 0) {
        if last == -s {
            count += 1;
        }
        last = s;
    }
    count
}

/// Number of distinct roots in `(a, b]` of the square-free polynomial whose
/// Sturm chain is `seq`.
pub fn roots_in(seq: &[Poly], a: &Rational, b: &Rational) -> usize {
    SturmChain::from_sequence(seq).roots_in(a, b)
}

/// A positive integer multiple of a polynomial, for fraction-free sign
/// evaluation.
#[derive(Debug, Clone)]
pub struct IntegerPoly {
    /// lowest degree first
    coeffs: Vec<BigInt>,
}

impl IntegerPoly {
    pub fn new(p: &Poly) -> Self {
        let d = common_denominator(p.coeffs.iter());
        let coeffs = p.coeffs.iter().map(|c| (c * Rational::from_integer(d.clone())).to_integer()).collect();
        Self { coeffs }
    }

    /// Sign of the polynomial at `x` as -1, 0 or 1. With `x = a/b`, `b > 0`,
    /// this is the sign of the homogenized value `sum c_i a^i b^(d-i)`.
    pub fn sign_at(&self, x: &Rational) -> i8 {
        let (a, b) = (x.numer(), x.denom());
        let mut acc = BigInt::zero();
        let mut b_pow = BigInt::one();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if i + 1 == self.coeffs.len() {
                acc = c.clone();
            } else {
                b_pow *= b;
                acc = acc * a + c * &b_pow;
            }
        }
        match acc.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }
}

/// Sturm chain prepared for repeated sign counting.
#[derive(Debug, Clone)]
pub struct SturmChain {
    seq: Vec<IntegerPoly>,
}

impl SturmChain {
    pub fn new(p: &Poly) -> Self {
        Self::from_sequence(&p.sturm_sequence())
    }

    pub fn from_sequence(seq: &[Poly]) -> Self {
        Self { seq: seq.iter().map(IntegerPoly::new).collect() }
    }

    pub fn sign_variations(&self, x: &Rational) -> usize {
        count_variations(self.seq.iter().map(|p| p.sign_at(x)))
    }

    /// Number of distinct roots in `(a, b]`.
    pub fn roots_in(&self, a: &Rational, b: &Rational) -> usize {
        self.sign_variations(a).saturating_sub(self.sign_variations(b))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format_rational(c),
                1 => format!("({})x", format_rational(c)),
                _ => format!("({})x^{i}", format_rational(c)),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn p(desc: &[i64]) -> Poly {
        Poly::from_descending(desc.iter().map(|&c| int(c)).collect())
    }

    #[test]
    fn arithmetic() {
        let a = p(&[1, -3, 2]);
        assert_eq!(a.eval(&int(2)), int(0));
        assert_eq!(a.derivative(), p(&[2, -3]));
        let (q, r) = p(&[1, 0, 0, -1]).div_rem(&p(&[1, -1]));
        assert_eq!((q, r), (p(&[1, 1, 1]), Poly::zero()));
        assert_eq!(p(&[1, -3, 2]).gcd(&p(&[1, -1])), p(&[1, -1]));
        assert_eq!(p(&[2, 4]).monic(), p(&[1, 2]));
    }

    #[test]
    fn square_free_parts() {
        // (x-1)^3 (x+2)
        let f = Poly::linear(int(1)).mul(&Poly::linear(int(1))).mul(&Poly::linear(int(1))).mul(&Poly::linear(int(-2)));
        let parts = f.square_free_decomposition();
        assert_eq!(parts, vec![(Poly::linear(int(-2)), 1), (Poly::linear(int(1)), 3)]);
        assert!(p(&[5]).square_free_decomposition().is_empty());
    }

    #[test]
    fn sturm_counts_roots() {
        let f = p(&[1, -5, 5, -1]);
        let seq = f.sturm_sequence();
        assert_eq!(roots_in(&seq, &int(-10), &int(10)), 3);
        assert_eq!(roots_in(&seq, &int(0), &rat(1, 2)), 1);
        // right endpoint root is counted, left one is not
        assert_eq!(roots_in(&seq, &int(0), &int(1)), 2);
        assert_eq!(roots_in(&seq, &int(1), &int(3)), 0);
        assert_eq!(roots_in(&p(&[1, 0, 1]).sturm_sequence(), &int(-5), &int(5)), 0);
        assert!(f.root_bound() > int(2) + rat(7, 4));
    }

    proptest::proptest! {
        #[test]
        fn integer_sign_matches_rational_eval(
            coeffs in proptest::collection::vec((-20i64..20, 1i64..9), 1..7),
            (xn, xd) in (-30i64..30, 1i64..12),
        ) {
            let f = Poly::new(coeffs.iter().map(|&(n, d)| rat(n, d)).collect());
            let x = rat(xn, xd);
            let want = f.eval(&x);
            let got = IntegerPoly::new(&f).sign_at(&x);
            proptest::prop_assert_eq!(got, if want.is_zero() { 0 } else if want.is_positive() { 1 } else { -1 });
        }
    }
}
