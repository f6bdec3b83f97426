//! Rectangular conductivity strips and the discrete harmonicity equation.
//!
//! Vertices are addressed as `(column, row)` with both coordinates starting at
//! one; columns increase in the continuation direction. The strip has `rows`
//! rows and `cols` columns with 4-neighbour adjacency.

use std::fmt;

use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, random_rational, Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub col: usize,
    pub row: usize,
}

impl Vertex {
    pub fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.col, self.row)
    }
}

/// An `rows x cols` lattice strip with a positive conductivity on every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct StripNetwork<S> {
    rows: usize,
    cols: usize,
    /// `horiz[(r-1)*(cols-1) + (c-1)]` is the edge `(c,r)-(c+1,r)`.
    horiz: Vec<S>,
    /// `vert[(r-1)*cols + (c-1)]` is the edge `(c,r)-(c,r+1)`.
    vert: Vec<S>,
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidArgument(format!(
            "strip needs at least 2 rows and 2 columns, got {rows}x{cols}"
        )));
    }
    Ok(())
}

impl<S: Scalar> StripNetwork<S> {
    /// Builds a network from dense row-major tables: `horiz` has `rows` rows of
    /// `cols-1` entries, `vert` has `rows-1` rows of `cols` entries.
    pub fn new(rows: usize, cols: usize, horiz: Vec<Vec<S>>, vert: Vec<Vec<S>>) -> Result<Self> {
        check_dims(rows, cols)?;
        let shape_ok = horiz.len() == rows
            && horiz.iter().all(|r| r.len() == cols - 1)
            && vert.len() == rows - 1
            && vert.iter().all(|r| r.len() == cols);
        if !shape_ok {
            return Err(Error::InvalidArgument(format!(
                "conductivity tables do not match a {rows}x{cols} strip"
            )));
        }
        let horiz: Vec<S> = horiz.into_iter().flatten().collect();
        let vert: Vec<S> = vert.into_iter().flatten().collect();
        if let Some(g) = horiz.iter().chain(&vert).find(|g| !g.is_positive()) {
            return Err(Error::InvalidArgument(format!("nonpositive conductivity {g:?}")));
        }
        Ok(Self { rows, cols, horiz, vert })
    }

    pub fn build_uniform(rows: usize, cols: usize, g: S) -> Result<Self> {
        check_dims(rows, cols)?;
        if !g.is_positive() {
            return Err(Error::InvalidArgument(format!("conductivity must be positive, got {g:?}")));
        }
        Ok(Self {
            rows,
            cols,
            horiz: vec![g.clone(); rows * (cols - 1)],
            vert: vec![g; (rows - 1) * cols],
        })
    }

    /// Seeded random network; conductivities are rationals in `[lo, hi]` with
    /// denominators at most 64, converted to the backend.
    pub fn build_random(rows: usize, cols: usize, seed: u64, lo: &Rational, hi: &Rational) -> Result<Self> {
        check_dims(rows, cols)?;
        if !lo.is_positive() || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "random conductivity range must satisfy 0 < lo <= hi, got [{}, {}]",
                format_rational(lo),
                format_rational(hi)
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize| -> Vec<S> {
            (0..n).map(|_| S::from_rational(&random_rational(&mut rng, lo, hi))).collect()
        };
        let horiz = draw(rows * (cols - 1));
        let vert = draw((rows - 1) * cols);
        Ok(Self { rows, cols, horiz, vert })
    }

    /// Builds a network from conductivity functions of the edge endpoints.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut horizontal: impl FnMut(usize, usize) -> S,
        mut vertical: impl FnMut(usize, usize) -> S,
    ) -> Result<Self> {
        let h = (1..=rows).map(|r| (1..cols).map(|c| horizontal(c, r)).collect()).collect();
        let v = (1..rows).map(|r| (1..=cols).map(|c| vertical(c, r)).collect()).collect();
        Self::new(rows, cols, h, v)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn horizontal_edge_count(&self) -> usize {
        self.horiz.len()
    }

    pub fn vertical_edge_count(&self) -> usize {
        self.vert.len()
    }

    /// Conductivity of the edge `(c,r)-(c+1,r)`.
    pub fn horizontal(&self, c: usize, r: usize) -> &S {
        assert!((1..self.cols).contains(&c) && (1..=self.rows).contains(&r), "no edge ({c},{r})-({},{r})", c + 1);
        &self.horiz[(r - 1) * (self.cols - 1) + (c - 1)]
    }

    /// Conductivity of the edge `(c,r)-(c,r+1)`.
    pub fn vertical(&self, c: usize, r: usize) -> &S {
        assert!((1..=self.cols).contains(&c) && (1..self.rows).contains(&r), "no edge ({c},{r})-({c},{})", r + 1);
        &self.vert[(r - 1) * self.cols + (c - 1)]
    }

    pub fn contains(&self, v: Vertex) -> bool {
        (1..=self.cols).contains(&v.col) && (1..=self.rows).contains(&v.row)
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("vertex {v} outside the {}x{} strip", self.rows, self.cols)))
        }
    }

    /// Neighbours of `v` with the conductivity of the connecting edge,
    /// in the order left, right, down, up.
    pub fn neighbors(&self, v: Vertex) -> Vec<(Vertex, S)> {
        let Vertex { col: c, row: r } = v;
        let mut out = Vec::with_capacity(4);
        if c > 1 {
            out.push((Vertex::new(c - 1, r), self.horizontal(c - 1, r).clone()));
        }
        if c < self.cols {
            out.push((Vertex::new(c + 1, r), self.horizontal(c, r).clone()));
        }
        if r > 1 {
            out.push((Vertex::new(c, r - 1), self.vertical(c, r - 1).clone()));
        }
        if r < self.rows {
            out.push((Vertex::new(c, r + 1), self.vertical(c, r).clone()));
        }
        out
    }

    /// Column-major vertex numbering shared with [`PotentialField`] and the
    /// Kirchhoff matrix.
    pub fn vertex_index(&self, v: Vertex) -> usize {
        (v.col - 1) * self.rows + (v.row - 1)
    }

    pub fn vertex_at(&self, index: usize) -> Vertex {
        Vertex::new(index / self.rows + 1, index % self.rows + 1)
    }

    pub fn vertex_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.vertex_count()).map(|i| self.vertex_at(i))
    }

    pub fn column_vertices(&self, c: usize) -> Vec<Vertex> {
        (1..=self.rows).map(|r| Vertex::new(c, r)).collect()
    }

    /// Vertices on the outer face: both end columns and the top and bottom rows.
    pub fn outer_vertices(&self) -> Vec<Vertex> {
        self.vertices()
            .filter(|v| v.col == 1 || v.col == self.cols || v.row == 1 || v.row == self.rows)
            .collect()
    }

    /// The sub-strip on columns `first..=last`, renumbered from column 1.
    pub fn sub_columns(&self, first: usize, last: usize) -> Result<Self> {
        if first < 1 || last > self.cols || last < first + 1 {
            return Err(Error::InvalidArgument(format!(
                "column range {first}..={last} invalid for {} columns",
                self.cols
            )));
        }
        Self::from_fn(
            self.rows,
            last - first + 1,
            |c, r| self.horizontal(c + first - 1, r).clone(),
            |c, r| self.vertical(c + first - 1, r).clone(),
        )
    }

    /// Every conductivity multiplied by `t`.
    pub fn scaled(&self, t: &S) -> Result<Self> {
        if !t.is_positive() {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            horiz: self.horiz.iter().map(|g| g.clone() * t.clone()).collect(),
            vert: self.vert.iter().map(|g| g.clone() * t.clone()).collect(),
        })
    }

    pub fn horizontal_table(&self) -> Vec<Vec<S>> {
        self.horiz.chunks(self.cols - 1).map(<[S]>::to_vec).collect()
    }

    pub fn vertical_table(&self) -> Vec<Vec<S>> {
        self.vert.chunks(self.cols).map(<[S]>::to_vec).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    rows: usize,
    cols: usize,
    horiz: Vec<Vec<String>>,
    vert: Vec<Vec<String>>,
}

impl StripNetwork<Rational> {
    /// The same network on another backend.
    pub fn to_backend<T: Scalar>(&self) -> StripNetwork<T> {
        StripNetwork {
            rows: self.rows,
            cols: self.cols,
            horiz: self.horiz.iter().map(T::from_rational).collect(),
            vert: self.vert.iter().map(T::from_rational).collect(),
        }
    }

    /// Plain-text form: `rows`, `cols` and the two dense row-major
    /// conductivity tables with entries written as `p/q`.
    pub fn to_text(&self) -> String {
        let fmt_table = |t: Vec<Vec<Rational>>| -> Vec<Vec<String>> {
            t.iter().map(|row| row.iter().map(format_rational).collect()).collect()
        };
        let doc = NetworkDoc {
            rows: self.rows,
            cols: self.cols,
            horiz: fmt_table(self.horizontal_table()),
            vert: fmt_table(self.vertical_table()),
        };
        toml::to_string(&doc).expect("network document serializes")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let doc: NetworkDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let parse_table = |t: &[Vec<String>]| -> Result<Vec<Vec<Rational>>> {
            t.iter().map(|row| row.iter().map(|x| parse_rational(x)).collect()).collect()
        };
        Self::new(doc.rows, doc.cols, parse_table(&doc.horiz)?, parse_table(&doc.vert)?)
    }
}

/// Vertex values on a strip, possibly only partially defined.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField<S> {
    rows: usize,
    cols: usize,
    values: Vec<Option<S>>,
}

impl<S: Scalar> PotentialField<S> {
    /// A field with no defined values, shaped like `net`.
    pub fn empty(net: &StripNetwork<S>) -> Self {
        Self { rows: net.rows, cols: net.cols, values: vec![None; net.rows * net.cols] }
    }

    pub fn from_fn(net: &StripNetwork<S>, f: impl Fn(Vertex) -> S) -> Self {
        Self { rows: net.rows, cols: net.cols, values: net.vertices().map(|v| Some(f(v))).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn index(&self, v: Vertex) -> Option<usize> {
        ((1..=self.cols).contains(&v.col) && (1..=self.rows).contains(&v.row))
            .then(|| (v.col - 1) * self.rows + (v.row - 1))
    }

    pub fn get(&self, v: Vertex) -> Option<&S> {
        self.index(v).and_then(|i| self.values[i].as_ref())
    }

    /// The value at `v`, or a missing-data error.
    pub fn value(&self, v: Vertex) -> Result<&S> {
        self.get(v).ok_or(Error::MissingData(v))
    }

    pub fn set(&mut self, v: Vertex, value: S) {
        let i = self.index(v).unwrap_or_else(|| panic!("vertex {v} outside the field"));
        self.values[i] = Some(value);
    }

    pub fn is_defined(&self, v: Vertex) -> bool {
        self.get(v).is_some()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// The set of vertices carrying a value, in column-major order.
    pub fn defined_vertices(&self) -> Vec<Vertex> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, x)| x.is_some())
            .map(|(i, _)| Vertex::new(i / self.rows + 1, i % self.rows + 1))
            .collect()
    }

    /// Values of column `c` from bottom to top; errors if any is undefined.
    pub fn column(&self, c: usize) -> Result<Vec<S>> {
        (1..=self.rows).map(|r| self.value(Vertex::new(c, r)).cloned()).collect()
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|x| x.as_ref().map(&f)).collect(),
        }
    }

    /// Pointwise combination of two fields; undefined where either is.
    pub fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "field shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| match (a, b) {
                    (Some(a), Some(b)) => Some(f(a, b)),
                    _ => None,
                })
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FieldDoc {
    rows: usize,
    cols: usize,
    /// One inner table per column, bottom row first.
    columns: Vec<Vec<String>>,
}

impl PotentialField<Rational> {
    /// Dense column-major table in the same plain-text style as networks.
    pub fn to_text(&self) -> Result<String> {
        let columns = (1..=self.cols)
            .map(|c| Ok(self.column(c)?.iter().map(format_rational).collect()))
            .collect::<Result<Vec<Vec<String>>>>()?;
        let doc = FieldDoc { rows: self.rows, cols: self.cols, columns };
        Ok(toml::to_string(&doc).expect("field document serializes"))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let doc: FieldDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.columns.len() != doc.cols || doc.columns.iter().any(|c| c.len() != doc.rows) {
            return Err(Error::Parse("field table does not match its dimensions".into()));
        }
        let values = doc
            .columns
            .iter()
            .flatten()
            .map(|t| parse_rational(t).map(Some))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows: doc.rows, cols: doc.cols, values })
    }
}

/// Left-hand side of the harmonicity equation at `v`:
/// the sum over neighbours `j` of `g_vj * (u_v - u_j)`.
pub fn residual<S: Scalar>(net: &StripNetwork<S>, u: &PotentialField<S>, v: Vertex) -> Result<S> {
    net.check_vertex(v)?;
    let uv = u.value(v)?;
    net.neighbors(v).into_iter().try_fold(S::zero(), |acc, (w, g)| {
        Ok(acc + g * (uv.clone() - u.value(w)?.clone()))
    })
}

/// Largest absolute residual over `vs`; zero iff `u` is harmonic on all of `vs`.
pub fn max_defect<S: Scalar>(net: &StripNetwork<S>, u: &PotentialField<S>, vs: &[Vertex]) -> Result<S> {
    vs.iter().try_fold(S::zero(), |best, &v| {
        let r = residual(net, u, v)?.abs();
        Ok(if r > best { r } else { best })
    })
}
