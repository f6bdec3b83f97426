//! Exact total-nonnegativity certificates.
//!
//! A matrix is totally nonnegative when every square submatrix (rows and
//! columns taken in increasing order) has a nonnegative determinant. The
//! certificate of record enumerates all of them.

use std::cmp::Ordering;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{det_bareiss, Matrix};
use crate::scalar::{common_denominator, serde_rational, Rational, Scalar};
use crate::transfer::StepMatrix;

/// Largest dimension accepted by [`all_minors_nonneg`].
pub const MAX_MINOR_DIM: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TnVerdict {
    #[serde(rename = "TNN")]
    Tnn,
    #[serde(rename = "NOT_TNN")]
    NotTnn,
}

impl fmt::Display for TnVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TnVerdict::Tnn => "TNN",
            TnVerdict::NotTnn => "NOT_TNN",
        })
    }
}

/// The lexicographically first negative minor. Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorWitness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorCertificate {
    pub dim: usize,
    pub minors_checked: u64,
    #[serde(with = "serde_rational")]
    pub min_minor: Rational,
    #[serde(with = "serde_rational")]
    pub determinant: Rational,
    pub verdict: TnVerdict,
    pub witness: Option<MinorWitness>,
}

fn mask(indices: &[usize]) -> u16 {
    indices.iter().fold(0, |m, &i| m | 1 << i)
}

/// Running minimum of values `numer / denom` with positive denominators.
struct MinTracker {
    best: Option<(BigInt, BigInt)>,
}

impl MinTracker {
    fn offer(&mut self, numer: &BigInt, denom: &BigInt) {
        let smaller = match &self.best {
            None => true,
            Some((n, _)) if !n.is_positive() && !numer.is_negative() => false,
            Some((n, d)) => (numer * d).cmp(&(n * denom)) == Ordering::Less,
        };
        if smaller {
            self.best = Some((numer.clone(), denom.clone()));
        }
    }
}

/// Evaluates every `k x k` minor, `k = 1..=dim`, exactly.
///
/// Rows are scaled to integers by their own common denominators (a positive
/// rescaling that preserves every minor's sign). Minors of order `k` are then
/// expanded along their last row from the stored minors of order `k - 1`, so
/// the whole enumeration stays in integer arithmetic. Minors are visited by
/// order, then row set, then column set, each in lexicographic order.
pub fn all_minors_nonneg<S: Scalar>(m: &Matrix<S>) -> Result<MinorCertificate> {
    if !S::EXACT {
        return Err(Error::WrongBackend);
    }
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!("minor enumeration needs a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let n = m.rows();
    if n > MAX_MINOR_DIM {
        return Err(Error::BudgetExceeded { dim: n, max: MAX_MINOR_DIM });
    }
    let exact = m.map(|x| x.to_rational().expect("exact backend"));
    let scales: Vec<BigInt> = (0..n).map(|i| common_denominator(exact.row(i))).collect();
    let a: Vec<Vec<BigInt>> = (0..n)
        .map(|i| exact.row(i).iter().map(|x| (x * Rational::from_integer(scales[i].clone())).to_integer()).collect())
        .collect();

    // Index sets of each order in lexicographic order, with their masks; a
    // set's position in its list is its rank.
    let combos: Vec<Vec<(Vec<usize>, u16)>> =
        (0..=n).map(|k| (0..n).combinations(k).map(|c| { let m = mask(&c); (c, m) }).collect()).collect();
    let mut rank_of = vec![0usize; 1 << n];
    for list in &combos {
        for (r, (_, m)) in list.iter().enumerate() {
            rank_of[*m as usize] = r;
        }
    }

    let mut checked = 0u64;
    let mut tracker = MinTracker { best: None };
    let mut witness: Option<MinorWitness> = None;
    // previous[row rank * width + col rank] holds the minors of order k - 1
    let mut previous = vec![BigInt::one()];
    let mut determinant = Rational::one();

    for k in 1..=n {
        let width = combos[k].len();
        let prev_width = combos[k - 1].len();
        let mut current = Vec::with_capacity(width * width);
        for (rows, _) in &combos[k] {
            let last = rows[k - 1];
            let head = rank_of[mask(&rows[..k - 1]) as usize] * prev_width;
            let row_scale: BigInt = rows.iter().map(|&i| &scales[i]).product();
            for (cols, col_mask) in &combos[k] {
                let mut value = BigInt::zero();
                for (t, &j) in cols.iter().enumerate() {
                    let entry = &a[last][j];
                    if entry.is_zero() {
                        continue;
                    }
                    let sub = &previous[head + rank_of[(col_mask & !(1 << j)) as usize]];
                    if sub.is_zero() {
                        continue;
                    }
                    let term = entry * sub;
                    if (k - 1 + t) % 2 == 0 {
                        value += term;
                    } else {
                        value -= term;
                    }
                }
                checked += 1;
                tracker.offer(&value, &row_scale);
                if witness.is_none() && value.is_negative() {
                    witness = Some(MinorWitness {
                        rows: rows.clone(),
                        cols: cols.clone(),
                        value: Rational::new(value.clone(), row_scale.clone()),
                    });
                }
                if k == n {
                    determinant = Rational::new(value.clone(), row_scale.clone());
                }
                current.push(value);
            }
        }
        previous = current;
    }

    let min_minor = tracker.best.map(|(p, q)| Rational::new(p, q)).unwrap_or_else(Rational::zero);
    let verdict = if witness.is_some() { TnVerdict::NotTnn } else { TnVerdict::Tnn };
    Ok(MinorCertificate { dim: n, minors_checked: checked, min_minor, determinant, verdict, witness })
}

/// Structural fast path and the defining minor check must both accept.
pub fn is_elementary_nonneg(step: &StepMatrix<Rational>) -> bool {
    let structural = step.is_well_shaped();
    let dense = all_minors_nonneg(&step.dense()).map(|c| c.verdict == TnVerdict::Tnn).unwrap_or(false);
    structural && dense
}

fn minor(m: &Matrix<Rational>, rows: &[usize], cols: &[usize]) -> Rational {
    det_bareiss(&m.select(rows, cols))
}

/// Checks `det(AB) = det(A) det(B)` and, for `samples` random index-set
/// pairs, the Cauchy–Binet expansion of the corresponding minor of `AB`.
pub fn cauchy_binet_check(a: &Matrix<Rational>, b: &Matrix<Rational>, samples: usize, seed: u64) -> Result<bool> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::InvalidArgument(format!(
            "Cauchy-Binet check needs equal square matrices, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = a.rows();
    let ab = a.mul(b);
    if det_bareiss(&ab) != det_bareiss(a) * det_bareiss(b) {
        return Ok(false);
    }
    if n == 0 {
        return Ok(true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let k = rng.gen_range(1..=n);
        let mut rows = sample(&mut rng, n, k).into_vec();
        let mut cols = sample(&mut rng, n, k).into_vec();
        rows.sort_unstable();
        cols.sort_unstable();
        let expanded = (0..n)
            .combinations(k)
            .fold(Rational::zero(), |acc, mid| acc + minor(a, &rows, &mid) * minor(b, &mid, &cols));
        if minor(&ab, &rows, &cols) != expanded {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).unwrap()
    }

    /// Brute force: Bareiss determinant of every submatrix.
    fn brute_force(m: &Matrix<Rational>) -> (u64, Rational, Option<(Vec<usize>, Vec<usize>)>) {
        let n = m.rows();
        let mut count = 0;
        let mut min: Option<Rational> = None;
        let mut first_negative = None;
        for k in 1..=n {
            for rows in (0..n).combinations(k) {
                for cols in (0..n).combinations(k) {
                    let d = minor(m, &rows, &cols);
                    count += 1;
                    if d.is_negative() && first_negative.is_none() {
                        first_negative = Some((rows.clone(), cols.clone()));
                    }
                    if min.as_ref().is_none_or(|x| &d < x) {
                        min = Some(d);
                    }
                }
            }
        }
        (count, min.unwrap(), first_negative)
    }

    #[test]
    fn identity_is_tnn() {
        let c = all_minors_nonneg(&Matrix::<Rational>::identity(5)).unwrap();
        assert_eq!(c.verdict, TnVerdict::Tnn);
        assert_eq!(c.minors_checked, 251);
        assert_eq!(c.min_minor, int(0));
        assert_eq!(c.determinant, int(1));
        assert!(c.witness.is_none());
    }

    #[test]
    fn negative_determinant_is_witnessed() {
        let c = all_minors_nonneg(&q(&[&[1, 2], &[3, 4]])).unwrap();
        assert_eq!(c.verdict, TnVerdict::NotTnn);
        let w = c.witness.unwrap();
        assert_eq!((w.rows, w.cols, w.value), (vec![0, 1], vec![0, 1], int(-2)));
        assert_eq!(c.min_minor, int(-2));
    }

    #[test]
    fn width_two_operator() {
        let m = q(&[&[1, 1, 0], &[1, 3, 1], &[0, 1, 1]]);
        let c = all_minors_nonneg(&m).unwrap();
        assert_eq!(c.verdict, TnVerdict::Tnn);
        assert_eq!(c.minors_checked, 19);
        assert_eq!(c.min_minor, int(0));
        assert_eq!(c.determinant, int(1));
        let (count, min, neg) = brute_force(&m);
        assert_eq!((count, min, neg), (19, int(0), None));
    }

    #[test]
    fn agrees_with_brute_force_on_mixed_signs() {
        let m = Matrix::from_rows(vec![
            vec![rat(1, 2), int(3), int(0), rat(-1, 3)],
            vec![int(2), rat(7, 5), int(1), int(0)],
            vec![int(0), int(1), rat(9, 4), int(2)],
            vec![rat(1, 7), int(0), int(1), int(5)],
        ])
        .unwrap();
        let c = all_minors_nonneg(&m).unwrap();
        let (count, min, neg) = brute_force(&m);
        assert_eq!(c.minors_checked, count);
        assert_eq!(c.min_minor, min);
        let w = c.witness.clone().unwrap();
        assert_eq!(Some((w.rows.clone(), w.cols.clone())), neg);
        assert_eq!(minor(&m, &w.rows, &w.cols), w.value);
        assert_eq!(c.determinant, det_bareiss(&m));
    }

    #[test]
    fn rejects_float_and_oversized_input() {
        assert_eq!(all_minors_nonneg(&Matrix::<f64>::identity(2)), Err(Error::WrongBackend));
        assert_eq!(
            all_minors_nonneg(&Matrix::<Rational>::identity(11)),
            Err(Error::BudgetExceeded { dim: 11, max: 10 })
        );
    }

    #[test]
    fn elementary_steps() {
        let interior = StepMatrix::from_row(5, 2, vec![int(0), int(1), int(1), int(1), int(0)]).unwrap();
        assert!(is_elementary_nonneg(&interior));
        let mixed = StepMatrix::from_row(3, 1, vec![int(1), int(-1), int(1)]).unwrap();
        assert!(!is_elementary_nonneg(&mixed));
        let identity = StepMatrix::from_row(4, 0, vec![int(1), int(0), int(0), int(0)]).unwrap();
        assert!(is_elementary_nonneg(&identity));
        // gap between the nonzero entries
        let gapped = StepMatrix::from_row(3, 0, vec![int(1), int(0), int(1)]).unwrap();
        assert!(!is_elementary_nonneg(&gapped));
    }

    #[test]
    fn cauchy_binet_on_small_steps() {
        let id = Matrix::<Rational>::identity(3);
        assert!(cauchy_binet_check(&id, &id, 10, 1).unwrap());
        let e1 = StepMatrix::from_row(3, 0, vec![int(1), int(1), int(0)]).unwrap().dense();
        let e2 = StepMatrix::from_row(3, 1, vec![int(1), int(1), int(1)]).unwrap().dense();
        assert!(cauchy_binet_check(&e2, &e1, 20, 2).unwrap());
        assert!(cauchy_binet_check(&id, &Matrix::identity(2), 1, 0).is_err());
    }

    #[test]
    fn diagonal_scaling_keeps_tnn() {
        let m = q(&[&[2, 4, 1], &[4, 11, 4], &[1, 4, 2]]);
        let d = Matrix::diagonal(&[rat(1, 3), int(2), rat(5, 2)]);
        for scaled in [d.mul(&m), m.mul(&d)] {
            assert_eq!(all_minors_nonneg(&scaled).unwrap().verdict, TnVerdict::Tnn);
        }
    }
}
