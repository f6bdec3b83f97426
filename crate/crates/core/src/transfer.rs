//! Transfer operators on signed edge-difference charts.
//!
//! A chart at column `k` is the zig-zag path of `2R-1` edges formed by the
//! horizontal edges `(k-1,r)-(k,r)` interleaved with the vertical edges of
//! column `k`. Slot `2(r-1)` holds the signed horizontal difference at row `r`
//! and slot `2r-1` the signed vertical difference between rows `r` and `r+1`
//! (slots are zero-based). Under the herringbone orientation every
//! elimination step that moves the chart one column to the right is an
//! elementary matrix with nonnegative entries, so the continuation operator
//! factors into totally nonnegative pieces.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::marching::{march, oracle_march_many, CauchyData};
use crate::matrix::Matrix;
use crate::network::{PotentialField, StripNetwork, Vertex};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

/// Signed edge-difference basis for Cauchy data modulo constants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chart {
    column: usize,
    rows: usize,
    signs: Vec<i8>,
}

/// Herringbone signs: `+` on the first horizontal slot, then each slot flips
/// sign relative to its predecessor on horizontal-to-vertical transitions and
/// keeps it on vertical-to-horizontal ones.
pub fn herringbone_signs(rows: usize) -> Vec<i8> {
    (0..2 * rows - 1)
        .map(|i| {
            let r = i / 2;
            let sigma: i8 = if r % 2 == 0 { 1 } else { -1 };
            if i % 2 == 0 { sigma } else { -sigma }
        })
        .collect()
}

pub fn herringbone_chart(rows: usize, column: usize) -> Result<Chart> {
    if rows < 2 || column < 2 {
        return Err(Error::InvalidArgument(format!("chart needs rows >= 2 and column >= 2, got {rows}, {column}")));
    }
    Ok(Chart { column, rows, signs: herringbone_signs(rows) })
}

impl Chart {
    pub fn with_signs(rows: usize, column: usize, signs: Vec<i8>) -> Result<Self> {
        if rows < 2 || column < 2 {
            return Err(Error::InvalidArgument(format!("chart needs rows >= 2 and column >= 2, got {rows}, {column}")));
        }
        if signs.len() != 2 * rows - 1 || signs.iter().any(|s| s.abs() != 1) {
            return Err(Error::InvalidArgument(format!("chart on {rows} rows needs {} signs of +-1", 2 * rows - 1)));
        }
        Ok(Self { column, rows, signs })
    }

    pub fn column(&self) -> usize {
        self.column
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn is_herringbone(&self) -> bool {
        self.signs == herringbone_signs(self.rows)
    }

    /// The same orientation at another column.
    pub fn at_column(&self, column: usize) -> Self {
        Self { column, ..self.clone() }
    }

    fn sign<S: Scalar>(&self, slot: usize) -> S {
        S::from_i64(self.signs[slot] as i64)
    }

    /// Slot values of `u` on this chart.
    pub fn evaluate<S: Scalar>(&self, u: &PotentialField<S>) -> Result<Vec<S>> {
        let k = self.column;
        let mut slots = Vec::with_capacity(self.dim());
        for r in 1..=self.rows {
            let here = u.value(Vertex::new(k, r))?.clone();
            let left = u.value(Vertex::new(k - 1, r))?.clone();
            slots.push(self.sign::<S>(2 * (r - 1)) * (here.clone() - left));
            if r < self.rows {
                let above = u.value(Vertex::new(k, r + 1))?.clone();
                slots.push(self.sign::<S>(2 * r - 1) * (above - here));
            }
        }
        Ok(slots)
    }

    /// Values on columns `(k-1, k)` whose chart is `slots`, pinned by
    /// `u(k-1, 1) = 0`.
    pub fn values_from_slots<S: Scalar>(&self, slots: &[S]) -> Result<(Vec<S>, Vec<S>)> {
        if slots.len() != self.dim() {
            return Err(Error::InvalidArgument(format!("chart has {} slots, got {}", self.dim(), slots.len())));
        }
        let horizontal = |r: usize| self.sign::<S>(2 * (r - 1)) * slots[2 * (r - 1)].clone();
        let mut right = vec![horizontal(1)];
        for r in 1..self.rows {
            let step = self.sign::<S>(2 * r - 1) * slots[2 * r - 1].clone();
            right.push(right[r - 1].clone() + step);
        }
        let left = (1..=self.rows).map(|r| right[r - 1].clone() - horizontal(r)).collect();
        Ok((left, right))
    }
}

/// Identity matrix except for one rewritten row.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMatrix<S> {
    dim: usize,
    row: usize,
    /// `(slot, coefficient)` pairs sorted by slot.
    entries: Vec<(usize, S)>,
}

impl<S: Scalar> StepMatrix<S> {
    pub fn new(dim: usize, row: usize, mut entries: Vec<(usize, S)>) -> Result<Self> {
        if row >= dim || entries.iter().any(|(j, _)| *j >= dim) {
            return Err(Error::InvalidArgument(format!("step row or slot outside dimension {dim}")));
        }
        entries.sort_by_key(|(j, _)| *j);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("duplicate slot in step row".into()));
        }
        entries.retain(|(_, v)| !v.is_zero());
        Ok(Self { dim, row, entries })
    }

    /// Builds a step from the dense rewritten row.
    pub fn from_row(dim: usize, row: usize, values: Vec<S>) -> Result<Self> {
        Self::new(dim, row, values.into_iter().enumerate().collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self) -> usize {
        self.row
    }

    pub fn entries(&self) -> &[(usize, S)] {
        &self.entries
    }

    /// The rewritten row as a dense vector.
    pub fn dense_row(&self) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim];
        for (j, v) in &self.entries {
            out[*j] = v.clone();
        }
        out
    }

    pub fn dense(&self) -> Matrix<S> {
        let mut m = Matrix::identity(self.dim);
        for j in 0..self.dim {
            m[(self.row, j)] = S::zero();
        }
        for (j, v) in &self.entries {
            m[(self.row, *j)] = v.clone();
        }
        m
    }

    /// Structural shape of an elementary nonnegative step: strictly positive
    /// entries on at most three consecutive slots that include the diagonal.
    pub fn is_well_shaped(&self) -> bool {
        let slots: Vec<usize> = self.entries.iter().map(|(j, _)| *j).collect();
        let consecutive = slots.windows(2).all(|w| w[1] == w[0] + 1);
        self.entries.iter().all(|(_, v)| v.is_positive())
            && slots.contains(&self.row)
            && consecutive
            && slots.len() <= 3
    }

    /// Applies the step to a slot vector in place.
    pub fn apply(&self, slots: &mut [S]) {
        let value = self.entries.iter().fold(S::zero(), |acc, (j, v)| acc + v.clone() * slots[*j].clone());
        slots[self.row] = value;
    }

    /// Replaces `m` by `self * m`.
    pub fn apply_left(&self, m: &mut Matrix<S>) {
        let row: Vec<S> = (0..m.cols())
            .map(|c| self.entries.iter().fold(S::zero(), |acc, (j, v)| acc + v.clone() * m[(*j, c)].clone()))
            .collect();
        for (c, value) in row.into_iter().enumerate() {
            m[(self.row, c)] = value;
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StepDoc {
    row: usize,
    slots: Vec<usize>,
    values: Vec<String>,
}

impl Serialize for StepMatrix<Rational> {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        StepDoc {
            row: self.row,
            slots: self.entries.iter().map(|(j, _)| *j).collect(),
            values: self.entries.iter().map(|(_, v)| format_rational(v)).collect(),
        }
        .serialize(s)
    }
}

/// Deserialized steps carry no dimension of their own; it is restored by the
/// enclosing [`TransferOperator`].
impl<'de> Deserialize<'de> for StepMatrix<Rational> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = StepDoc::deserialize(d)?;
        if doc.slots.len() != doc.values.len() {
            return Err(serde::de::Error::custom("step slots and values differ in length"));
        }
        let values = doc.values.iter().map(|t| parse_rational(t)).collect::<Result<Vec<_>>>().map_err(serde::de::Error::custom)?;
        let dim = doc.slots.iter().copied().chain([doc.row]).max().unwrap_or(0) + 1;
        StepMatrix::new(dim, doc.row, doc.slots.into_iter().zip(values).collect()).map_err(serde::de::Error::custom)
    }
}

fn check_rows<S: Scalar>(net: &StripNetwork<S>, chart: &Chart) -> Result<()> {
    if chart.rows() != net.rows() {
        return Err(Error::InvalidArgument(format!("chart has {} rows, network has {}", chart.rows(), net.rows())));
    }
    Ok(())
}

/// The step that rewrites horizontal slot `2(r-1)` using harmonicity at `(k, r)`.
pub fn horizontal_step<S: Scalar>(net: &StripNetwork<S>, k: usize, r: usize, chart: &Chart) -> Result<StepMatrix<S>> {
    check_rows(net, chart)?;
    if !(2..net.cols()).contains(&k) || !(1..=net.rows()).contains(&r) {
        return Err(Error::InvalidArgument(format!("no horizontal step at vertex ({k},{r})")));
    }
    let slot = 2 * (r - 1);
    let g_right = net.horizontal(k, r).clone();
    let g_left = net.horizontal(k - 1, r).clone();
    let sign = |j: usize| chart.sign::<S>(slot) * chart.sign::<S>(j);
    let mut entries = vec![(slot, g_left / g_right.clone())];
    if r > 1 {
        // u(k,r) - u(k,r-1) enters with a plus sign
        entries.push((slot - 1, sign(slot - 1) * net.vertical(k, r - 1).clone() / g_right.clone()));
    }
    if r < net.rows() {
        entries.push((slot + 1, -(sign(slot + 1) * net.vertical(k, r).clone() / g_right)));
    }
    StepMatrix::new(chart.dim(), slot, entries)
}

/// The step that rewrites vertical slot `2r-1` from the already-advanced
/// horizontal slots on either side of it.
pub fn vertical_update_step<S: Scalar>(r: usize, chart: &Chart) -> Result<StepMatrix<S>> {
    if !(1..chart.rows()).contains(&r) {
        return Err(Error::InvalidArgument(format!("no vertical slot between rows {r} and {}", r + 1)));
    }
    let slot = 2 * r - 1;
    let sign = |j: usize| chart.sign::<S>(slot) * chart.sign::<S>(j);
    let entries = vec![(slot - 1, -sign(slot - 1)), (slot, S::one()), (slot + 1, sign(slot + 1))];
    StepMatrix::new(chart.dim(), slot, entries)
}

/// Steps moving the herringbone chart from column `k` to column `k+1`.
pub fn advance<S: Scalar>(net: &StripNetwork<S>, k: usize) -> Result<Vec<StepMatrix<S>>> {
    advance_with_chart(net, k, &herringbone_chart(net.rows(), k)?)
}

/// [`advance`] for an arbitrary orientation: all horizontal steps bottom to
/// top, then all vertical updates bottom to top.
pub fn advance_with_chart<S: Scalar>(net: &StripNetwork<S>, k: usize, chart: &Chart) -> Result<Vec<StepMatrix<S>>> {
    let mut steps = (1..=net.rows()).map(|r| horizontal_step(net, k, r, chart)).collect::<Result<Vec<_>>>()?;
    for r in 1..net.rows() {
        steps.push(vertical_update_step(r, chart)?);
    }
    Ok(steps)
}

/// Product of steps applied in order (the last step is the leftmost factor).
pub fn product_of_steps<S: Scalar>(dim: usize, steps: &[StepMatrix<S>]) -> Matrix<S> {
    let mut m = Matrix::identity(dim);
    for step in steps {
        step.apply_left(&mut m);
    }
    m
}

/// Continuation operator from the chart at column 2 to the chart at column
/// `2 + shift`, with its elementary factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferOperator<S> {
    pub shift: usize,
    pub matrix: Matrix<S>,
    pub steps: Vec<StepMatrix<S>>,
    pub from_chart: Chart,
    pub to_chart: Chart,
}

fn check_shift<S: Scalar>(net: &StripNetwork<S>, shift: usize) -> Result<()> {
    if shift + 2 > net.cols() {
        return Err(Error::InvalidArgument(format!("shift {shift} exceeds {} for {} columns", net.cols() - 2, net.cols())));
    }
    Ok(())
}

pub fn modified_h<S: Scalar>(net: &StripNetwork<S>, shift: usize) -> Result<TransferOperator<S>> {
    check_shift(net, shift)?;
    let from_chart = herringbone_chart(net.rows(), 2)?;
    let mut steps = Vec::new();
    for k in 2..2 + shift {
        steps.extend(advance(net, k)?);
    }
    let matrix = product_of_steps(from_chart.dim(), &steps);
    let to_chart = from_chart.at_column(2 + shift);
    Ok(TransferOperator { shift, matrix, steps, from_chart, to_chart })
}

/// The same operator built without step matrices: chart basis vectors are
/// turned into Cauchy data, continued by a dense solve, and read off the
/// shifted chart.
pub fn oracle_modified_h<S: Scalar>(net: &StripNetwork<S>, shift: usize) -> Result<Matrix<S>> {
    check_shift(net, shift)?;
    let from = herringbone_chart(net.rows(), 2)?;
    let to = from.at_column(2 + shift);
    let dim = from.dim();
    let data = (0..dim)
        .map(|i| {
            let mut e = vec![S::zero(); dim];
            e[i] = S::one();
            let (left, right) = from.values_from_slots(&e)?;
            CauchyData::new(net.rows(), left, right)
        })
        .collect::<Result<Vec<_>>>()?;
    let fields = oracle_march_many(net, &data)?;
    let mut m = Matrix::zeros(dim, dim);
    for (j, u) in fields.iter().enumerate() {
        m.set_column(j, &to.evaluate(u)?);
    }
    Ok(m)
}

/// The `2R x 2R` map from raw values on columns `(1, 2)` to raw values on
/// columns `(1 + shift, 2 + shift)`.
pub fn value_transfer<S: Scalar>(net: &StripNetwork<S>, shift: usize) -> Result<Matrix<S>> {
    check_shift(net, shift)?;
    let n = 2 * net.rows();
    let mut m = Matrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![S::zero(); n];
        e[j] = S::one();
        let u = march(net, &CauchyData::from_vec(net.rows(), e)?)?;
        let mut image = u.column(1 + shift)?;
        image.extend(u.column(2 + shift)?);
        m.set_column(j, &image);
    }
    Ok(m)
}

/// Largest strip height accepted by [`sign_pattern_search`].
pub const MAX_SEARCH_ROWS: usize = 6;

/// Every `+-1` chart orientation for which all steps of every advance up to
/// `shift` have nonnegative rewritten rows. Bit `i` of the enumeration index
/// set means slot `i` is negative.
pub fn sign_pattern_search<S: Scalar>(net: &StripNetwork<S>, shift: usize) -> Result<Vec<Vec<i8>>> {
    check_shift(net, shift)?;
    if net.rows() > MAX_SEARCH_ROWS {
        return Err(Error::InvalidArgument(format!("sign search limited to {MAX_SEARCH_ROWS} rows")));
    }
    let dim = 2 * net.rows() - 1;
    let mut found = Vec::new();
    'patterns: for mask in 0u32..(1 << dim) {
        let signs: Vec<i8> = (0..dim).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
        let chart = Chart::with_signs(net.rows(), 2, signs)?;
        for k in 2..2 + shift {
            for step in advance_with_chart(net, k, &chart.at_column(k))? {
                if step.entries().iter().any(|(_, v)| v.is_negative()) {
                    continue 'patterns;
                }
            }
        }
        found.push(chart.signs);
    }
    Ok(found)
}

/// `D M D` for the diagonal sign matrix `D = diag(signs)`.
pub fn conjugate_by_signs<S: Scalar>(m: &Matrix<S>, signs: &[i8]) -> Matrix<S> {
    let mut out = m.clone();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if signs[i] * signs[j] < 0 {
                out[(i, j)] = -out[(i, j)].clone();
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct TransferDoc {
    shift: usize,
    dim: usize,
    from_chart: Chart,
    to_chart: Chart,
    matrix: Matrix<Rational>,
    steps: Vec<StepMatrix<Rational>>,
}

impl Serialize for TransferOperator<Rational> {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        TransferDoc {
            shift: self.shift,
            dim: self.matrix.rows(),
            from_chart: self.from_chart.clone(),
            to_chart: self.to_chart.clone(),
            matrix: self.matrix.clone(),
            steps: self.steps.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TransferOperator<Rational> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = TransferDoc::deserialize(d)?;
        let steps = doc
            .steps
            .into_iter()
            .map(|s| {
                if s.dim > doc.dim {
                    return Err(serde::de::Error::custom("step exceeds operator dimension"));
                }
                Ok(StepMatrix { dim: doc.dim, ..s })
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        Ok(TransferOperator { shift: doc.shift, matrix: doc.matrix, steps, from_chart: doc.from_chart, to_chart: doc.to_chart })
    }
}

impl TransferOperator<Rational> {
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("transfer operator serializes")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use num_traits::Signed;

    fn uniform(rows: usize, cols: usize) -> StripNetwork<Rational> {
        StripNetwork::build_uniform(rows, cols, int(1)).unwrap()
    }

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn herringbone_sign_patterns() {
        assert_eq!(herringbone_signs(2), vec![1, -1, -1]);
        assert_eq!(herringbone_signs(3), vec![1, -1, -1, 1, 1]);
        assert!(herringbone_chart(1, 2).is_err());
    }

    #[test]
    fn chart_on_symbolic_two_row_data() {
        let net = uniform(2, 3);
        let (a, b, c, d) = (int(3), int(-5), int(11), int(2));
        let u = march(&net, &CauchyData::new(2, vec![a.clone(), b.clone()], vec![c.clone(), d.clone()]).unwrap()).unwrap();
        let chart = herringbone_chart(2, 2).unwrap();
        assert_eq!(chart.evaluate(&u).unwrap(), vec![&c - &a, &c - &d, &b - &d]);
    }

    #[test]
    fn chart_inverse_round_trips() {
        let chart = herringbone_chart(3, 2).unwrap();
        let slots = vec![rat(1, 2), int(3), int(-1), rat(2, 3), int(5)];
        let (left, right) = chart.values_from_slots(&slots).unwrap();
        assert_eq!(left[0], int(0));
        let net = uniform(3, 4);
        let u = march(&net, &CauchyData::new(3, left, right).unwrap()).unwrap();
        assert_eq!(chart.evaluate(&u).unwrap(), slots);
    }

    #[test]
    fn interior_horizontal_step_is_the_displayed_pattern() {
        let net = uniform(3, 4);
        let chart = herringbone_chart(3, 2).unwrap();
        let step = horizontal_step(&net, 2, 2, &chart).unwrap();
        assert_eq!(step.row(), 2);
        assert_eq!(step.dense_row(), ints(&[0, 1, 1, 1, 0]));
        assert!(step.is_well_shaped());
        let mut expected = Matrix::identity(5);
        expected[(2, 1)] = int(1);
        expected[(2, 3)] = int(1);
        assert_eq!(step.dense(), expected);
    }

    #[test]
    fn horizontal_step_ratios() {
        // g_left = 2, g_down = 1, g_up = 3, g_right = 4 around vertex (2,2)
        let net = StripNetwork::from_fn(
            3,
            3,
            |c, r| match (c, r) {
                (1, 2) => int(2),
                (2, 2) => int(4),
                _ => int(1),
            },
            |c, r| match (c, r) {
                (2, 1) => int(1),
                (2, 2) => int(3),
                _ => int(1),
            },
        )
        .unwrap();
        let step = horizontal_step(&net, 2, 2, &herringbone_chart(3, 2).unwrap()).unwrap();
        assert_eq!(step.dense_row(), vec![int(0), rat(1, 4), rat(1, 2), rat(3, 4), int(0)]);
    }

    #[test]
    fn two_row_steps() {
        let net = uniform(2, 3);
        let chart = herringbone_chart(2, 2).unwrap();
        assert_eq!(horizontal_step(&net, 2, 1, &chart).unwrap().dense_row(), ints(&[1, 1, 0]));
        assert_eq!(vertical_update_step::<Rational>(1, &chart).unwrap().dense_row(), ints(&[1, 1, 1]));
        let chart3 = herringbone_chart(3, 2).unwrap();
        assert_eq!(vertical_update_step::<Rational>(1, &chart3).unwrap().dense_row(), ints(&[1, 1, 1, 0, 0]));
        assert_eq!(vertical_update_step::<Rational>(2, &chart3).unwrap().dense_row(), ints(&[0, 0, 1, 1, 1]));
        assert!(vertical_update_step::<Rational>(3, &chart3).is_err());
        assert!(horizontal_step(&net, 3, 1, &chart).is_err());
        assert!(horizontal_step(&net, 2, 3, &chart).is_err());
    }

    #[test]
    fn advance_maps_chart_to_next_column() {
        let net = uniform(2, 3);
        let steps = advance(&net, 2).unwrap();
        assert_eq!(steps.len(), 3);
        assert_eq!(product_of_steps(3, &steps), q(&[&[1, 1, 0], &[1, 3, 1], &[0, 1, 1]]));

        let (a, b, c, d) = (int(3), int(-5), int(11), int(2));
        let u = march(&net, &CauchyData::new(2, vec![a.clone(), b.clone()], vec![c.clone(), d.clone()]).unwrap()).unwrap();
        let mut slots = herringbone_chart(2, 2).unwrap().evaluate(&u).unwrap();
        for s in &steps {
            s.apply(&mut slots);
        }
        let expected = vec![
            int(2) * &c - &a - &d,
            int(4) * &c - int(4) * &d - &a + &b,
            &b + &c - int(2) * &d,
        ];
        assert_eq!(slots, expected);
        assert_eq!(herringbone_chart(2, 3).unwrap().evaluate(&u).unwrap(), expected);

        let mut zero = vec![int(0); 3];
        steps.iter().for_each(|s| s.apply(&mut zero));
        assert_eq!(zero, vec![int(0); 3]);
    }

    #[test]
    fn modified_h_fixtures() {
        let net = uniform(2, 4);
        let h0 = modified_h(&net, 0).unwrap();
        assert!(h0.steps.is_empty());
        assert_eq!(h0.matrix, Matrix::identity(3));
        assert_eq!(modified_h(&net, 1).unwrap().matrix, q(&[&[1, 1, 0], &[1, 3, 1], &[0, 1, 1]]));
        let h2 = q(&[&[2, 4, 1], &[4, 11, 4], &[1, 4, 2]]);
        assert_eq!(modified_h(&net, 2).unwrap().matrix, h2);
        assert_eq!(oracle_modified_h(&net, 2).unwrap(), h2);
        assert_eq!(oracle_modified_h(&net, 0).unwrap(), Matrix::identity(3));
        assert!(modified_h(&net, 3).is_err());

        let net3 = uniform(3, 3);
        let h = modified_h(&net3, 1).unwrap();
        assert_eq!(h.matrix, oracle_modified_h(&net3, 1).unwrap());
        assert!(h.matrix.to_rows().iter().flatten().all(|x| !x.is_negative()));
    }

    #[test]
    fn value_transfer_fixes_constants() {
        let net = StripNetwork::<Rational>::build_random(3, 5, 5, &rat(1, 8), &int(8)).unwrap();
        assert_eq!(value_transfer(&net, 0).unwrap(), Matrix::identity(6));
        let v = value_transfer(&net, 2).unwrap();
        assert_eq!(v.mul_vec(&vec![int(1); 6]), vec![int(1); 6]);
    }

    #[test]
    fn sign_search_finds_herringbone_only() {
        for rows in [2, 3] {
            let net = uniform(rows, 3);
            let found = sign_pattern_search(&net, 1).unwrap();
            let h = herringbone_signs(rows);
            let neg: Vec<i8> = h.iter().map(|s| -s).collect();
            assert_eq!(found.len(), 2);
            assert!(found.contains(&h) && found.contains(&neg));
        }
    }

    #[test]
    fn operator_text_round_trip() {
        let net = StripNetwork::<Rational>::build_random(3, 4, 3, &rat(1, 8), &int(8)).unwrap();
        let h = modified_h(&net, 2).unwrap();
        let text = h.to_text();
        assert_eq!(TransferOperator::from_text(&text).unwrap(), h);
    }

    #[test]
    fn conjugation_flips_mixed_entries() {
        let m = q(&[&[1, 2], &[3, 4]]);
        assert_eq!(conjugate_by_signs(&m, &[1, -1]), q(&[&[1, -2], &[-3, 4]]));
    }
}
