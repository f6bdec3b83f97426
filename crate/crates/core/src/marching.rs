//! Harmonic continuation of vertex values along a strip.
//!
//! Given the values on columns 1 and 2 (Cauchy data), the harmonicity equation
//! at each vertex of column `k` has exactly one unknown, the value at its right
//! neighbour, so the field on the whole strip is forced column by column.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::matrix::{solve, Matrix};
use crate::network::{PotentialField, StripNetwork, Vertex};
use crate::scalar::Scalar;

/// Values on the two leading columns of a strip, bottom row first.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData<S> {
    first: Vec<S>,
    second: Vec<S>,
}

impl<S: Scalar> CauchyData<S> {
    pub fn new(rows: usize, first: Vec<S>, second: Vec<S>) -> Result<Self> {
        if first.len() != rows || second.len() != rows {
            return Err(Error::InvalidArgument(format!(
                "Cauchy data needs {rows} values per column, got {} and {}",
                first.len(),
                second.len()
            )));
        }
        Ok(Self { first, second })
    }

    pub fn constant(rows: usize, k: S) -> Self {
        Self { first: vec![k.clone(); rows], second: vec![k; rows] }
    }

    /// Splits a length-`2R` vector into (column 1, column 2).
    pub fn from_vec(rows: usize, mut values: Vec<S>) -> Result<Self> {
        if values.len() != 2 * rows {
            return Err(Error::InvalidArgument(format!("expected {} values, got {}", 2 * rows, values.len())));
        }
        let second = values.split_off(rows);
        Ok(Self { first: values, second })
    }

    pub fn rows(&self) -> usize {
        self.first.len()
    }

    pub fn first(&self) -> &[S] {
        &self.first
    }

    pub fn second(&self) -> &[S] {
        &self.second
    }

    /// Column 1 followed by column 2.
    pub fn to_vec(&self) -> Vec<S> {
        self.first.iter().chain(&self.second).cloned().collect()
    }
}

/// The value at the right neighbour of `v` that makes `u` harmonic at `v`.
///
/// `u` must be defined at `v` and at every neighbour except the one in column
/// `v.col + 1`.
pub fn continue_vertex<S: Scalar>(net: &StripNetwork<S>, u: &PotentialField<S>, v: Vertex) -> Result<S> {
    net.check_vertex(v)?;
    let uv = u.value(v)?.clone();
    let neighbors = net.neighbors(v);
    let unknown: Vec<&(Vertex, S)> = neighbors.iter().filter(|(w, _)| !u.is_defined(*w)).collect();
    let target = Vertex::new(v.col + 1, v.row);
    let (_, g_target) = match unknown.as_slice() {
        [only] if only.0 == target => *only,
        _ => return Err(Error::IllPosedStep { vertex: v, unknown: unknown.len() }),
    };
    let flux = neighbors
        .iter()
        .filter(|(w, _)| *w != target)
        .fold(S::zero(), |acc, (w, g)| {
            acc + g.clone() * (uv.clone() - u.get(*w).expect("checked defined").clone())
        });
    Ok(uv + flux / g_target.clone())
}

/// Continues Cauchy data across the whole strip.
pub fn march<S: Scalar>(net: &StripNetwork<S>, data: &CauchyData<S>) -> Result<PotentialField<S>> {
    let mut u = seeded_field(net, data)?;
    for k in 2..net.cols() {
        for r in 1..=net.rows() {
            let value = continue_vertex(net, &u, Vertex::new(k, r))?;
            u.set(Vertex::new(k + 1, r), value);
        }
    }
    Ok(u)
}

fn seeded_field<S: Scalar>(net: &StripNetwork<S>, data: &CauchyData<S>) -> Result<PotentialField<S>> {
    if data.rows() != net.rows() {
        return Err(Error::InvalidArgument(format!(
            "Cauchy data has {} rows, network has {}",
            data.rows(),
            net.rows()
        )));
    }
    let mut u = PotentialField::empty(net);
    for r in 1..=net.rows() {
        u.set(Vertex::new(1, r), data.first[r - 1].clone());
        u.set(Vertex::new(2, r), data.second[r - 1].clone());
    }
    Ok(u)
}

/// Unknowns of the continuation system: every vertex in columns `3..=C`.
fn unknown_vertices<S: Scalar>(net: &StripNetwork<S>) -> Vec<Vertex> {
    (3..=net.cols()).flat_map(|c| net.column_vertices(c)).collect()
}

/// Vertices where harmonicity is imposed: columns `2..=C-1`.
fn equation_vertices<S: Scalar>(net: &StripNetwork<S>) -> Vec<Vertex> {
    (2..net.cols()).flat_map(|c| net.column_vertices(c)).collect()
}

/// Coefficient matrix of the continuation system (equations at columns
/// `2..=C-1`, unknowns at columns `3..=C`), independent of any marching order.
pub fn continuation_system<S: Scalar>(net: &StripNetwork<S>) -> Matrix<S> {
    let unknowns = unknown_vertices(net);
    let position: HashMap<Vertex, usize> = unknowns.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let equations = equation_vertices(net);
    let mut a: Matrix<S> = Matrix::zeros(equations.len(), unknowns.len());
    for (i, &v) in equations.iter().enumerate() {
        for (w, g) in net.neighbors(v) {
            if let Some(&j) = position.get(&v) {
                a[(i, j)] = a[(i, j)].clone() + g.clone();
            }
            if let Some(&j) = position.get(&w) {
                a[(i, j)] = a[(i, j)].clone() - g;
            }
        }
    }
    a
}

/// Continuation by one dense solve of the full system; used as an oracle for
/// [`march`].
pub fn oracle_march<S: Scalar>(net: &StripNetwork<S>, data: &CauchyData<S>) -> Result<PotentialField<S>> {
    oracle_march_many(net, std::slice::from_ref(data)).map(|mut v| v.remove(0))
}

/// [`oracle_march`] for several data sets sharing one system matrix.
pub fn oracle_march_many<S: Scalar>(net: &StripNetwork<S>, data: &[CauchyData<S>]) -> Result<Vec<PotentialField<S>>> {
    let seeded = data.iter().map(|d| seeded_field(net, d)).collect::<Result<Vec<_>>>()?;
    let unknowns = unknown_vertices(net);
    if unknowns.is_empty() {
        return Ok(seeded);
    }
    let known_flux = |u: &PotentialField<S>, v: Vertex| -> S {
        // residual contributions from known vertices, moved to the right-hand side
        let mut rhs = S::zero();
        for (w, g) in net.neighbors(v) {
            if v.col <= 2 {
                rhs = rhs - g.clone() * u.get(v).expect("seeded").clone();
            }
            if w.col <= 2 {
                rhs = rhs + g * u.get(w).expect("seeded").clone();
            }
        }
        rhs
    };
    let equations = equation_vertices(net);
    let mut b = Matrix::zeros(equations.len(), seeded.len());
    for (j, u) in seeded.iter().enumerate() {
        for (i, &v) in equations.iter().enumerate() {
            b[(i, j)] = known_flux(u, v);
        }
    }
    let a = continuation_system(net);
    let x = solve(&a, &b).ok_or_else(|| Error::Internal("continuation system is singular".into()))?;
    Ok(seeded
        .into_iter()
        .enumerate()
        .map(|(j, mut u)| {
            for (i, &w) in unknowns.iter().enumerate() {
                u.set(w, x[(i, j)].clone());
            }
            u
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::det_bareiss;
    use crate::network::max_defect;
    use crate::scalar::{int, rat, Rational};
    use num_traits::Zero;
    use proptest::prelude::*;

    fn uniform(rows: usize, cols: usize) -> StripNetwork<Rational> {
        StripNetwork::build_uniform(rows, cols, int(1)).unwrap()
    }

    #[test]
    fn single_steps_on_two_rows() {
        let net = uniform(2, 3);
        let (a, b, c, d) = (int(2), int(-3), rat(1, 2), int(7));
        let data = CauchyData::new(2, vec![a.clone(), b.clone()], vec![c.clone(), d.clone()]).unwrap();
        let u = march(&net, &data).unwrap();
        assert_eq!(u.value(Vertex::new(3, 1)).unwrap(), &(int(3) * &c - &a - &d));
        assert_eq!(u.value(Vertex::new(3, 2)).unwrap(), &(int(3) * &d - &b - &c));

        let mut partial = PotentialField::empty(&net);
        for (v, x) in [((1, 1), &a), ((1, 2), &b), ((2, 1), &c), ((2, 2), &d)] {
            partial.set(Vertex::new(v.0, v.1), x.clone());
        }
        assert_eq!(continue_vertex(&net, &partial, Vertex::new(2, 1)).unwrap(), int(3) * &c - &a - &d);
        assert_eq!(continue_vertex(&net, &partial, Vertex::new(2, 2)).unwrap(), int(3) * &d - &b - &c);
    }

    #[test]
    fn ill_posed_steps_are_rejected() {
        let net = uniform(3, 4);
        let mut u = PotentialField::empty(&net);
        u.set(Vertex::new(2, 2), int(1));
        u.set(Vertex::new(1, 2), int(1));
        // up, down and right neighbours all unknown
        assert_eq!(
            continue_vertex(&net, &u, Vertex::new(2, 2)),
            Err(Error::IllPosedStep { vertex: Vertex::new(2, 2), unknown: 3 })
        );
        let full = PotentialField::from_fn(&net, |_| int(0));
        assert!(matches!(continue_vertex(&net, &full, Vertex::new(2, 2)), Err(Error::IllPosedStep { unknown: 0, .. })));
        assert_eq!(continue_vertex(&net, &PotentialField::empty(&net), Vertex::new(2, 2)), Err(Error::MissingData(Vertex::new(2, 2))));
    }

    #[test]
    fn constants_and_bilinear_fields_continue() {
        let net = uniform(3, 4);
        let u = march(&net, &CauchyData::constant(3, int(4))).unwrap();
        assert!(net.vertices().all(|v| u.value(v).unwrap() == &int(4)));

        let linear = |c: usize, _r: usize| int(c as i64);
        let data = CauchyData::new(3, (1..=3).map(|r| linear(1, r)).collect(), (1..=3).map(|r| linear(2, r)).collect()).unwrap();
        let u = march(&net, &data).unwrap();
        assert!(net.vertices().all(|v| u.value(v).unwrap() == &linear(v.col, v.row)));

        // c*r is harmonic at degree-4 vertices only, so continuation keeps it
        // on the middle row but not on the boundary rows
        let bilinear = |c: usize, r: usize| int((c * r) as i64);
        let data = CauchyData::new(3, (1..=3).map(|r| bilinear(1, r)).collect(), (1..=3).map(|r| bilinear(2, r)).collect()).unwrap();
        let u = march(&net, &data).unwrap();
        assert_eq!(u.value(Vertex::new(3, 2)).unwrap(), &bilinear(3, 2));
        assert_ne!(u.value(Vertex::new(3, 1)).unwrap(), &bilinear(3, 1));
    }

    #[test]
    fn oracle_agrees_on_random_strip() {
        let net = StripNetwork::<Rational>::build_random(3, 5, 11, &rat(1, 8), &int(8)).unwrap();
        let data = CauchyData::new(3, vec![rat(1, 3), int(-2), rat(5, 7)], vec![int(0), rat(9, 4), int(1)]).unwrap();
        let marched = march(&net, &data).unwrap();
        let solved = oracle_march(&net, &data).unwrap();
        assert_eq!(marched, solved);
        let interior: Vec<Vertex> = (2..=4).flat_map(|c| net.column_vertices(c)).collect();
        assert!(max_defect(&net, &solved, &interior).unwrap().is_zero());
        assert_eq!(oracle_march(&net, &CauchyData::constant(3, int(2))).unwrap(), march(&net, &CauchyData::constant(3, int(2))).unwrap());
        assert!(!det_bareiss(&continuation_system(&net)).is_zero());
    }

    #[test]
    fn two_column_strip_is_just_the_data() {
        let net = uniform(2, 2);
        let data = CauchyData::new(2, vec![int(1), int(2)], vec![int(3), int(4)]).unwrap();
        assert_eq!(march(&net, &data).unwrap(), oracle_march(&net, &data).unwrap());
    }

    #[test]
    fn float_backend_marches() {
        let net = uniform(2, 3).to_backend::<f64>();
        let data = CauchyData::new(2, vec![1.0, 2.0], vec![0.5, 4.0]).unwrap();
        let u = march(&net, &data).unwrap();
        assert_eq!(*u.value(Vertex::new(3, 1)).unwrap(), 3.0 * 0.5 - 1.0 - 4.0);
    }

    fn small_rat() -> impl Strategy<Value = Rational> {
        (-12i64..=12, 1i64..=5).prop_map(|(p, q)| rat(p, q))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn march_is_linear_and_shift_equivariant(
            seed in 0u64..500,
            d1 in prop::collection::vec(small_rat(), 6),
            d2 in prop::collection::vec(small_rat(), 6),
            alpha in small_rat(),
            beta in small_rat(),
            k in small_rat(),
        ) {
            let net = StripNetwork::<Rational>::build_random(3, 5, seed, &rat(1, 8), &int(8)).unwrap();
            let a = CauchyData::from_vec(3, d1).unwrap();
            let b = CauchyData::from_vec(3, d2).unwrap();
            let combo = CauchyData::from_vec(
                3,
                a.to_vec().iter().zip(b.to_vec()).map(|(x, y)| x * &alpha + y * &beta).collect(),
            ).unwrap();
            let ua = march(&net, &a).unwrap();
            let ub = march(&net, &b).unwrap();
            let expected = ua.zip_with(&ub, |x, y| x * &alpha + y * &beta);
            prop_assert_eq!(march(&net, &combo).unwrap(), expected);

            let shifted = CauchyData::from_vec(3, a.to_vec().into_iter().map(|x| x + &k).collect()).unwrap();
            prop_assert_eq!(march(&net, &shifted).unwrap(), ua.map(|x| x + &k));
            prop_assert_eq!(oracle_march(&net, &a).unwrap(), ua.clone());

            // harmonicity survives a global conductivity scale
            let scaled = net.scaled(&rat(7, 3)).unwrap();
            let interior: Vec<Vertex> = (2..=4).flat_map(|c| net.column_vertices(c)).collect();
            prop_assert!(max_defect(&scaled, &ua, &interior).unwrap().is_zero());
        }
    }
}
