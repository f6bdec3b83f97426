//! Kirchhoff matrices and Dirichlet-to-Neumann maps of conductivity networks.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{solve, Matrix};
use crate::network::{StripNetwork, Vertex};
use crate::scalar::Rational;
use crate::spectral::{certify_spectrum, SpectrumReport};
use crate::transfer::modified_h;

/// Weighted graph Laplacian: `K[v][v]` is the total conductivity at `v`,
/// `K[v][w] = -g(v,w)` for every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct KirchhoffMatrix {
    matrix: Matrix<Rational>,
}

impl KirchhoffMatrix {
    /// Kirchhoff matrix of an arbitrary graph on `n` vertices.
    pub fn from_edges(n: usize, edges: &[(usize, usize, Rational)]) -> Result<Self> {
        let mut k = Matrix::zeros(n, n);
        for (a, b, g) in edges {
            if a >= &n || b >= &n || a == b {
                return Err(Error::InvalidArgument(format!("bad edge ({a},{b}) on {n} vertices")));
            }
            if !g.is_positive() {
                return Err(Error::InvalidArgument("edge conductivity must be positive".into()));
            }
            k[(*a, *a)] += g;
            k[(*b, *b)] += g;
            k[(*a, *b)] -= g;
            k[(*b, *a)] -= g;
        }
        Ok(Self { matrix: k })
    }

    pub fn matrix(&self) -> &Matrix<Rational> {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    /// Symmetric, zero row sums, nonpositive off-diagonal.
    pub fn is_valid(&self) -> bool {
        let n = self.size();
        self.matrix.is_symmetric()
            && (0..n).all(|i| self.matrix.row(i).iter().sum::<Rational>().is_zero())
            && (0..n).all(|i| (0..n).all(|j| i == j || !self.matrix[(i, j)].is_positive()))
    }
}

/// Kirchhoff matrix of a strip, vertices numbered column-major.
pub fn kirchhoff(net: &StripNetwork<Rational>) -> KirchhoffMatrix {
    let mut edges = Vec::with_capacity(net.horizontal_edge_count() + net.vertical_edge_count());
    for v in net.vertices() {
        for (w, g) in net.neighbors(v) {
            if w > v {
                edges.push((net.vertex_index(v), net.vertex_index(w), g));
            }
        }
    }
    KirchhoffMatrix::from_edges(net.vertex_count(), &edges).expect("strip edges are valid")
}

/// Boundary-potential to boundary-current map.
#[derive(Debug, Clone, PartialEq)]
pub struct DtNMap {
    pub boundary: Vec<usize>,
    pub matrix: Matrix<Rational>,
}

impl DtNMap {
    /// Symmetric with every row summing to zero.
    pub fn is_valid(&self) -> bool {
        self.matrix.is_symmetric()
            && (0..self.matrix.rows()).all(|i| self.matrix.row(i).iter().sum::<Rational>().is_zero())
    }
}

fn split_boundary(n: usize, boundary: &[usize]) -> Result<Vec<usize>> {
    if boundary.is_empty() {
        return Err(Error::InvalidArgument("boundary must be nonempty".into()));
    }
    let mut seen = vec![false; n];
    for &b in boundary {
        if b >= n || seen[b] {
            return Err(Error::InvalidArgument(format!("boundary vertex {b} repeated or out of range")));
        }
        seen[b] = true;
    }
    Ok((0..n).filter(|&i| !seen[i]).collect())
}

/// Schur complement `K_BB - K_BI K_II^{-1} K_IB` onto `boundary`, in the given
/// boundary order.
pub fn dtn_map(k: &KirchhoffMatrix, boundary: &[usize]) -> Result<DtNMap> {
    let interior = split_boundary(k.size(), boundary)?;
    let m = k.matrix();
    let kbb = m.select(boundary, boundary);
    if interior.is_empty() {
        return Ok(DtNMap { boundary: boundary.to_vec(), matrix: kbb });
    }
    let kii = m.select(&interior, &interior);
    let kib = m.select(&interior, boundary);
    let kbi = m.select(boundary, &interior);
    let x = solve(&kii, &kib).ok_or(Error::SingularInterior)?;
    Ok(DtNMap { boundary: boundary.to_vec(), matrix: kbb.sub(&kbi.mul(&x)) })
}

/// DtN map of a strip for the given boundary vertices.
pub fn dtn_map_strip(net: &StripNetwork<Rational>, boundary: &[Vertex]) -> Result<DtNMap> {
    for &v in boundary {
        net.check_vertex(v)?;
    }
    let idx: Vec<usize> = boundary.iter().map(|&v| net.vertex_index(v)).collect();
    dtn_map(&kirchhoff(net), &idx)
}

/// Boundary currents for unit potential at `boundary[p]` and zero potential
/// on the rest of the boundary, from one dense solve of the whole network.
pub fn dirichlet_currents(k: &KirchhoffMatrix, boundary: &[usize], p: usize) -> Result<Vec<Rational>> {
    split_boundary(k.size(), boundary)?;
    let n = k.size();
    let m = k.matrix();
    let mut a = Matrix::zeros(n, n);
    let mut rhs = Matrix::zeros(n, 1);
    for i in 0..n {
        match boundary.iter().position(|&b| b == i) {
            Some(pos) => {
                a[(i, i)] = Rational::from_integer(1.into());
                if pos == p {
                    rhs[(i, 0)] = Rational::from_integer(1.into());
                }
            }
            None => {
                for j in 0..n {
                    a[(i, j)] = m[(i, j)].clone();
                }
            }
        }
    }
    let u = solve(&a, &rhs).ok_or(Error::SingularInterior)?.column(0);
    let currents = m.mul_vec(&u);
    Ok(boundary.iter().map(|&b| currents[b].clone()).collect())
}

/// Continuation spectrum and DtN map of a strip, side by side. No relation
/// between the two is asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtnProbe {
    pub rows: usize,
    pub cols: usize,
    pub shift: usize,
    pub continuation: SpectrumReport,
    pub boundary: Vec<Vertex>,
    pub dtn: Matrix<Rational>,
}

pub fn dtn_spectrum_probe(net: &StripNetwork<Rational>, shift: usize) -> Result<DtnProbe> {
    let h = modified_h(net, shift)?;
    let continuation = certify_spectrum(&h.matrix)?;
    let boundary = net.outer_vertices();
    let dtn = dtn_map_strip(net, &boundary)?;
    Ok(DtnProbe { rows: net.rows(), cols: net.cols(), shift, continuation, boundary, dtn: dtn.matrix })
}

impl DtnProbe {
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("probe serializes")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{leading_minors_positive, rank};
    use crate::scalar::{int, rat};
    use crate::spectral::SpectrumVerdict;

    #[test]
    fn single_edge() {
        let k = KirchhoffMatrix::from_edges(2, &[(0, 1, rat(3, 2))]).unwrap();
        let expect = Matrix::from_rows(vec![vec![rat(3, 2), rat(-3, 2)], vec![rat(-3, 2), rat(3, 2)]]).unwrap();
        assert_eq!(k.matrix(), &expect);
        assert_eq!(dtn_map(&k, &[0, 1]).unwrap().matrix, expect);
    }

    #[test]
    fn two_by_two_grid() {
        let net = StripNetwork::build_uniform(2, 2, int(1)).unwrap();
        let k = kirchhoff(&net);
        assert!(k.is_valid());
        for i in 0..4 {
            assert_eq!(k.matrix()[(i, i)], int(2));
            assert_eq!(k.matrix().row(i).iter().filter(|x| **x == int(-1)).count(), 2);
        }
    }

    #[test]
    fn star_with_three_leaves() {
        let k = KirchhoffMatrix::from_edges(4, &[(0, 3, int(1)), (1, 3, int(1)), (2, 3, int(1))]).unwrap();
        let dtn = dtn_map(&k, &[0, 1, 2]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { rat(2, 3) } else { rat(-1, 3) };
                assert_eq!(dtn.matrix[(i, j)], expect);
            }
        }
        assert_eq!(dirichlet_currents(&k, &[0, 1, 2], 1).unwrap(), dtn.matrix.column(1));
    }

    #[test]
    fn isolated_interior_is_singular() {
        // vertex 2 is interior and touches nothing
        let k = KirchhoffMatrix::from_edges(3, &[(0, 1, int(1))]).unwrap();
        assert_eq!(dtn_map(&k, &[0, 1]), Err(Error::SingularInterior));
        assert!(dtn_map(&k, &[]).is_err());
        assert!(dtn_map(&k, &[0, 0]).is_err());
    }

    #[test]
    fn strip_dtn_properties() {
        let net = StripNetwork::<Rational>::build_random(4, 5, 21, &rat(1, 8), &int(8)).unwrap();
        let boundary = net.outer_vertices();
        let dtn = dtn_map_strip(&net, &boundary).unwrap();
        assert!(dtn.is_valid());
        let nb = boundary.len();
        assert_eq!(rank(&dtn.matrix), nb - 1);
        let head: Vec<usize> = (0..nb - 1).collect();
        assert!(leading_minors_positive(&dtn.matrix.select(&head, &head)));
        let k = kirchhoff(&net);
        for p in [0, 3, nb - 1] {
            assert_eq!(dirichlet_currents(&k, &dtn.boundary, p).unwrap(), dtn.matrix.column(p));
        }
    }

    #[test]
    fn probe_round_trips() {
        let net = StripNetwork::build_uniform(2, 4, int(1)).unwrap();
        let probe = dtn_spectrum_probe(&net, 1).unwrap();
        assert_eq!(probe.dtn.rows(), 8);
        assert_eq!(probe.continuation.verdict, SpectrumVerdict::AllPositive);
        assert_eq!(DtnProbe::from_text(&probe.to_text()).unwrap(), probe);
        let idle = dtn_spectrum_probe(&net, 0).unwrap();
        assert_eq!(idle.continuation.isolating_intervals.len(), 1);
        assert_eq!(idle.continuation.isolating_intervals[0].multiplicity, 3);
    }
}
