//! Classical correspondence analysis.
//!
//! The decomposition works on the standardized residuals
//! `S = Dr^{-1/2} (P - r cᵀ) Dc^{-1/2}`; centering removes the trivial unit
//! singular value, so every singular value equal to one reported here comes
//! from the block structure of the table.

use serde::{Deserialize, Serialize};

use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::matrix::LabeledMatrix;
use crate::scalar::Scalar;
use crate::svd::svd;

/// Default lateral-ordering threshold on the leading non-unit singular value.
pub const LATERAL_ORDERING_THRESHOLD: f64 = 0.837;

/// Correspondence matrix, masses and centered residual of a table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceScaffold<T> {
    pub n: T,
    /// `cells / n`.
    pub p: Dense<T>,
    pub row_masses: Vec<T>,
    pub col_masses: Vec<T>,
    /// `P - r cᵀ`; rows and columns sum to zero.
    pub residual: Dense<T>,
}

pub fn scaffold<T: Scalar>(m: &LabeledMatrix<T>) -> Result<CorrespondenceScaffold<T>> {
    m.require_nonzero_total()?;
    let n = m.total();
    let p = m.to_dense().map(|x| x / n);
    let row_masses = p.row_sums();
    let col_masses = p.col_sums();
    if let Some(i) = row_masses.iter().position(|&x| x <= T::zero()) {
        return Err(Error::ZeroMarginal {
            axis: "row",
            label: m.row_labels()[i].clone(),
        });
    }
    if let Some(j) = col_masses.iter().position(|&x| x <= T::zero()) {
        return Err(Error::ZeroMarginal {
            axis: "column",
            label: m.col_labels()[j].clone(),
        });
    }
    let residual = Dense::from_fn(p.nrows(), p.ncols(), |i, j| {
        p[(i, j)] - row_masses[i] * col_masses[j]
    });
    Ok(CorrespondenceScaffold {
        n,
        p,
        row_masses,
        col_masses,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaResult<T> {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub row_masses: Vec<T>,
    pub col_masses: Vec<T>,
    /// Full nontrivial spectrum, descending, `min(I, J) - 1` values.
    pub singular_values: Vec<T>,
    /// `I × k` principal coordinates.
    pub row_coords: Dense<T>,
    /// `J × k` principal coordinates.
    pub col_coords: Dense<T>,
    /// Percent contribution of each row to each retained axis.
    pub row_contrib: Dense<T>,
    pub col_contrib: Dense<T>,
}

impl<T: Scalar> CaResult<T> {
    pub fn axes(&self) -> usize {
        self.row_coords.ncols()
    }

    /// Number of singular values within `tol` of one.
    pub fn unit_count(&self, tol: T) -> usize {
        self.singular_values
            .iter()
            .filter(|&&s| (s - T::one()).abs() <= tol)
            .count()
    }

    /// Singular values that are neither one nor numerically zero.
    pub fn non_unit_spectrum(&self, tol: T) -> Vec<T> {
        self.singular_values
            .iter()
            .copied()
            .filter(|&s| (s - T::one()).abs() > tol && s > tol)
            .collect()
    }
}

/// Correspondence analysis retaining `k` axes of coordinates.
///
/// The spectrum is always complete; `k` only bounds the coordinate blocks.
pub fn ca<T: Scalar>(m: &LabeledMatrix<T>, k: usize) -> Result<CaResult<T>> {
    let sc = scaffold(m)?;
    let (ni, nj) = (m.nrows(), m.ncols());
    let rank_bound = ni.min(nj).saturating_sub(1);
    if k > rank_bound {
        return Err(Error::invalid(format!(
            "{k} axes requested but a {ni}x{nj} table has at most {rank_bound}"
        )));
    }
    let rs: Vec<T> = sc.row_masses.iter().map(|x| x.sqrt()).collect();
    let cs: Vec<T> = sc.col_masses.iter().map(|x| x.sqrt()).collect();
    let s = Dense::from_fn(ni, nj, |i, j| sc.residual[(i, j)] / (rs[i] * cs[j]));
    let dec = svd(&s)?;

    let singular_values: Vec<T> = dec.s.iter().take(rank_bound).copied().collect();
    let mut row_coords = Dense::from_fn(ni, k, |i, a| dec.u[(i, a)] * dec.s[a] / rs[i]);
    let mut col_coords = Dense::from_fn(nj, k, |j, a| dec.v[(j, a)] * dec.s[a] / cs[j]);

    // Orient each axis so its largest-magnitude column coordinate is positive.
    for a in 0..k {
        let mut best = 0;
        for j in 1..nj {
            if col_coords[(j, a)].abs() > col_coords[(best, a)].abs() {
                best = j;
            }
        }
        if col_coords[(best, a)] < T::zero() {
            for j in 0..nj {
                col_coords[(j, a)] = -col_coords[(j, a)];
            }
            for i in 0..ni {
                row_coords[(i, a)] = -row_coords[(i, a)];
            }
        }
    }

    let hundred = T::lit(100.0);
    let contrib = |coords: &Dense<T>, masses: &[T]| {
        Dense::from_fn(coords.nrows(), k, |i, a| {
            let lam = dec.s[a] * dec.s[a];
            if lam > T::zero() {
                hundred * masses[i] * coords[(i, a)] * coords[(i, a)] / lam
            } else {
                T::zero()
            }
        })
    };
    let row_contrib = contrib(&row_coords, &sc.row_masses);
    let col_contrib = contrib(&col_coords, &sc.col_masses);

    Ok(CaResult {
        row_labels: m.row_labels().to_vec(),
        col_labels: m.col_labels().to_vec(),
        row_masses: sc.row_masses,
        col_masses: sc.col_masses,
        singular_values,
        row_coords,
        col_coords,
        row_contrib,
        col_contrib,
    })
}

/// A connected component of the bipartite row/column graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Component {
    pub fn size(&self) -> usize {
        self.rows.len() + self.cols.len()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Components of the graph whose edges are the nonzero cells, largest first
/// (ties broken by first row index).
pub fn connected_components<T: Scalar>(m: &LabeledMatrix<T>) -> Vec<Component> {
    let ni = m.nrows();
    let mut uf = UnionFind::new(ni + m.ncols());
    for &(i, j, _) in m.triplets() {
        uf.union(i, ni + j);
    }
    let mut by_root: std::collections::BTreeMap<usize, Component> = Default::default();
    for x in 0..ni + m.ncols() {
        let root = uf.find(x);
        let c = by_root.entry(root).or_insert_with(|| Component {
            rows: Vec::new(),
            cols: Vec::new(),
        });
        if x < ni {
            c.rows.push(x);
        } else {
            c.cols.push(x - ni);
        }
    }
    let mut comps: Vec<Component> = by_root.into_values().collect();
    comps.sort_by(|a, b| {
        b.size()
            .cmp(&a.size())
            .then_with(|| a.rows.first().cmp(&b.rows.first()))
            .then_with(|| a.cols.first().cmp(&b.cols.first()))
    });
    comps
}

/// Checks that the unit singular values account for the components.
pub fn check_unit_structure<T: Scalar>(
    components: &[Component],
    result: &CaResult<T>,
    tol: T,
) -> Result<()> {
    let units = result.unit_count(tol);
    if units + 1 != components.len() {
        return Err(Error::DegenerateStructure(format!(
            "{} components but {units} unit singular values",
            components.len()
        )));
    }
    Ok(())
}

/// Submatrix of the largest connected component.
pub fn principal_block<T: Scalar>(m: &LabeledMatrix<T>) -> Result<LabeledMatrix<T>> {
    let comps = connected_components(m);
    let c = comps
        .first()
        .ok_or_else(|| Error::DegenerateStructure("empty matrix".into()))?;
    if c.rows.len() < 2 || c.cols.len() < 2 {
        return Err(Error::DegenerateStructure(format!(
            "largest component is only {}x{}",
            c.rows.len(),
            c.cols.len()
        )));
    }
    Ok(m.submatrix(&c.rows, &c.cols))
}

/// True iff the leading non-unit singular value exceeds `threshold`.
pub fn lateral_ordering_flag<T: Scalar>(result: &CaResult<T>, threshold: T) -> Result<bool> {
    leading_non_unit(result)
        .map(|rho| rho > threshold)
        .ok_or_else(|| Error::DegenerateStructure("no singular value below one".into()))
}

pub fn leading_non_unit<T: Scalar>(result: &CaResult<T>) -> Option<T> {
    result
        .singular_values
        .iter()
        .copied()
        .find(|&s| s < T::one() - T::unit_tol())
}
