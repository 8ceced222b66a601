//! Taxicab correspondence analysis.
//!
//! Each axis maximizes `‖D u‖₁` over sign vectors `u ∈ {−1, +1}^J`, where `D`
//! is the doubly centered residual `P − r cᵀ` deflated by the previous axes.
//! Small problems are solved exactly by enumerating the sign vectors of the
//! shorter side; larger ones by alternating `v ← sign(D u)`, `u ← sign(Dᵀ v)`
//! from many deterministic starts.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ca::scaffold;
use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::matrix::LabeledMatrix;
use crate::scalar::{sign, signed, Scalar};

/// Largest `min(I, J)` solved by enumeration under [`AxisStrategy::Auto`].
pub const EXHAUSTIVE_LIMIT: usize = 16;

/// Hard cap for explicit enumeration requests (2^(m−1) sign vectors).
const EXHAUSTIVE_HARD_LIMIT: usize = 26;

/// Population kept between recombination rounds of the multistart search.
const RECOMBINE_POPULATION: usize = 12;
const RECOMBINE_MAX_ROUNDS: usize = 64;
const CRISS_CROSS_MAX_ITERS: usize = 1000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisStrategy {
    /// Exhaustive when `min(I, J) <= 16`, multistart otherwise.
    #[default]
    Auto,
    Exhaustive,
    Multistart,
}

impl AxisStrategy {
    fn resolve(self, rows: usize, cols: usize) -> AxisStrategy {
        match self {
            AxisStrategy::Auto if rows.min(cols) <= EXHAUSTIVE_LIMIT => AxisStrategy::Exhaustive,
            AxisStrategy::Auto => AxisStrategy::Multistart,
            s => s,
        }
    }
}

/// One taxicab principal axis before rescaling by the masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignAxis<T> {
    pub lambda: T,
    /// Column signs, first entry +1.
    pub u: Vec<i8>,
    /// Row signs, `sign(a)`.
    pub v: Vec<i8>,
    /// `D u`.
    pub a: Vec<T>,
    /// `Dᵀ v`.
    pub b: Vec<T>,
    pub strategy: AxisStrategy,
}

#[derive(Clone, Debug)]
struct Candidate<T> {
    lambda: T,
    u: Vec<i8>,
}

/// Alternates `v ← sign(D u)`, `u ← sign(Dᵀ v)` until `u` is stable. The
/// objective never decreases along the way.
fn criss_cross<T: Scalar>(d: &Dense<T>, mut u: Vec<i8>) -> Candidate<T> {
    for _ in 0..CRISS_CROSS_MAX_ITERS {
        let a = d.mul_signs(&u);
        let v: Vec<i8> = a.iter().map(|&x| sign(x)).collect();
        let b = d.tmul_signs(&v);
        let next: Vec<i8> = b.iter().map(|&x| sign(x)).collect();
        if next == u {
            break;
        }
        u = next;
    }
    canonical(d, u)
}

/// Flips `u` so its first entry is +1 and evaluates the objective.
fn canonical<T: Scalar>(d: &Dense<T>, mut u: Vec<i8>) -> Candidate<T> {
    if u.first() == Some(&-1) {
        u.iter_mut().for_each(|s| *s = -*s);
    }
    let lambda = d.mul_signs(&u).iter().map(|x| x.abs()).sum();
    Candidate { lambda, u }
}

/// Best candidate: largest objective, then lexicographically smallest `u`
/// among those tied within the scalar's tie tolerance.
fn select<T: Scalar>(cands: impl IntoIterator<Item = Candidate<T>>) -> Option<Candidate<T>> {
    let cands: Vec<Candidate<T>> = cands.into_iter().collect();
    let best = cands
        .iter()
        .map(|c| c.lambda)
        .fold(T::neg_infinity(), T::max);
    let floor = best - T::tie_tol() * best.abs().max(T::min_positive_value());
    cands
        .into_iter()
        .filter(|c| c.lambda >= floor)
        .min_by(|x, y| x.u.cmp(&y.u))
}

fn finish<T: Scalar>(d: &Dense<T>, c: Candidate<T>, strategy: AxisStrategy) -> SignAxis<T> {
    let a = d.mul_signs(&c.u);
    let v: Vec<i8> = a.iter().map(|&x| sign(x)).collect();
    let b = d.tmul_signs(&v);
    let lambda = a.iter().map(|x| x.abs()).sum();
    SignAxis {
        lambda,
        u: c.u,
        v,
        a,
        b,
        strategy,
    }
}

/// Computes the leading taxicab axis of `d`.
pub fn taxicab_axis<T: Scalar>(d: &Dense<T>, strategy: AxisStrategy) -> Result<SignAxis<T>> {
    if d.nrows() == 0 || d.ncols() == 0 || d.max_abs() == T::zero() {
        return Err(Error::DegenerateAxis { axis: 1 });
    }
    let strategy = strategy.resolve(d.nrows(), d.ncols());
    let best = match strategy {
        AxisStrategy::Exhaustive => exhaustive(d)?,
        _ => multistart(d),
    };
    Ok(finish(d, best, strategy))
}

/// Enumerates every sign vector of the shorter side (first sign fixed).
fn exhaustive<T: Scalar>(d: &Dense<T>) -> Result<Candidate<T>> {
    let rows_side = d.nrows() <= d.ncols();
    let x = if rows_side { d.clone() } else { d.transpose() };
    let m = x.nrows();
    if m > EXHAUSTIVE_HARD_LIMIT {
        return Err(Error::invalid(format!(
            "exhaustive search over 2^{} sign vectors is not supported",
            m - 1
        )));
    }
    let count: usize = 1 << (m - 1);

    // Gray-code walk: w starts all +1; step k flips bit trailing_zeros(k)+1.
    let mut s: Vec<T> = x.col_sums();
    let mut w = vec![1i8; m];
    let mut values: Vec<T> = Vec::with_capacity(count);
    values.push(s.iter().map(|v| v.abs()).sum());
    for k in 1..count {
        let bit = k.trailing_zeros() as usize + 1;
        let row = x.row(bit);
        let two = T::lit(2.0);
        if w[bit] > 0 {
            for (acc, &r) in s.iter_mut().zip(row) {
                *acc = *acc - two * r;
            }
        } else {
            for (acc, &r) in s.iter_mut().zip(row) {
                *acc = *acc + two * r;
            }
        }
        w[bit] = -w[bit];
        values.push(s.iter().map(|v| v.abs()).sum());
    }

    // Running sums drift; re-evaluate every near-optimal code exactly.
    let top = values.iter().copied().fold(T::neg_infinity(), T::max);
    let window = top - (T::tie_tol() * T::lit(1e3)).max(T::epsilon() * T::lit(1e4)) * top.abs();
    let mut cands = Vec::new();
    for (k, &val) in values.iter().enumerate() {
        if val < window {
            continue;
        }
        let gray = k ^ (k >> 1);
        let w: Vec<i8> = (0..m)
            .map(|b| {
                if b > 0 && (gray >> (b - 1)) & 1 == 1 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        let u0 = if rows_side {
            d.tmul_signs(&w).iter().map(|&x| sign(x)).collect()
        } else {
            w
        };
        cands.push(criss_cross(d, u0));
    }
    Ok(select(cands).expect("at least one sign vector"))
}

/// Criss-cross from one start per column, then recombination of the local
/// optima found until the best objective stops improving.
fn multistart<T: Scalar>(d: &Dense<T>) -> Candidate<T> {
    let starts: Vec<Candidate<T>> = (0..d.ncols())
        .into_par_iter()
        .map(|j| {
            let v0: Vec<i8> = (0..d.nrows()).map(|i| sign(d[(i, j)])).collect();
            let u0: Vec<i8> = d.tmul_signs(&v0).iter().map(|&x| sign(x)).collect();
            criss_cross(d, u0)
        })
        .collect();

    let mut pool: BTreeMap<Vec<i8>, T> = BTreeMap::new();
    for c in starts {
        pool.insert(c.u, c.lambda);
    }
    let mut best = select(pool.iter().map(|(u, &l)| Candidate {
        lambda: l,
        u: u.clone(),
    }))
    .expect("at least one column");

    for _ in 0..RECOMBINE_MAX_ROUNDS {
        let population = top_population(&pool);
        let pairs: Vec<(usize, usize)> = (0..population.len())
            .flat_map(|p| (p + 1..population.len()).map(move |q| (p, q)))
            .collect();
        let children: Vec<Candidate<T>> = pairs
            .par_iter()
            .flat_map_iter(|&(p, q)| {
                let (x, y) = (&population[p], &population[q]);
                let mut out = Vec::with_capacity(4);
                for flip in [1i8, -1] {
                    let and: Vec<i8> = x
                        .iter()
                        .zip(y)
                        .map(|(&a, &b)| if a > 0 && b * flip > 0 { 1 } else { -1 })
                        .collect();
                    let or: Vec<i8> = x
                        .iter()
                        .zip(y)
                        .map(|(&a, &b)| if a > 0 || b * flip > 0 { 1 } else { -1 })
                        .collect();
                    for start in [and, or] {
                        if start.iter().any(|&s| s > 0) && start.iter().any(|&s| s < 0) {
                            out.push(criss_cross(d, start));
                        }
                    }
                }
                out
            })
            .collect();
        let mut fresh = false;
        for c in children {
            if let std::collections::btree_map::Entry::Vacant(e) = pool.entry(c.u) {
                e.insert(c.lambda);
                fresh = true;
            }
        }
        let round_best = select(pool.iter().map(|(u, &l)| Candidate {
            lambda: l,
            u: u.clone(),
        }))
        .expect("pool is nonempty");
        let improved = round_best.lambda > best.lambda + T::tie_tol() * best.lambda.abs();
        best = round_best;
        if !improved || !fresh {
            break;
        }
    }
    best
}

/// Top distinct sign vectors by objective, ties by lexicographic order.
fn top_population<T: Scalar>(pool: &BTreeMap<Vec<i8>, T>) -> Vec<Vec<i8>> {
    let mut all: Vec<(&Vec<i8>, T)> = pool.iter().map(|(u, &l)| (u, l)).collect();
    all.sort_by(|x, y| {
        y.1.partial_cmp(&x.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| x.0.cmp(y.0))
    });
    all.into_iter()
        .take(RECOMBINE_POPULATION)
        .map(|(u, _)| u.clone())
        .collect()
}

/// Removes the contribution of an axis: `D − a bᵀ / λ`.
pub fn deflate<T: Scalar>(d: &Dense<T>, axis: &SignAxis<T>) -> Result<Dense<T>> {
    if axis.lambda.is_nan() || axis.lambda <= T::zero() {
        return Err(Error::DegenerateAxis { axis: 0 });
    }
    Ok(Dense::from_fn(d.nrows(), d.ncols(), |i, j| {
        d[(i, j)] - axis.a[i] * axis.b[j] / axis.lambda
    }))
}

/// Signed-representation quality of one axis, in percent.
///
/// `pp` is the block of rows with `v = +1` and columns with `u = +1`, `np`
/// rows with `v = −1` and columns with `u = +1`, and so on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QsrRow<T> {
    pub pp: T,
    pub nn: T,
    pub np: T,
    pub pn: T,
    pub overall: T,
}

pub fn qsr<T: Scalar>(d: &Dense<T>, u: &[i8], v: &[i8]) -> QsrRow<T> {
    // [v sign][u sign], index 0 = positive.
    let mut net = [[T::zero(); 2]; 2];
    let mut abs = [[T::zero(); 2]; 2];
    for (i, &vi) in v.iter().enumerate() {
        let bi = usize::from(vi < 0);
        for (j, &uj) in u.iter().enumerate() {
            let bj = usize::from(uj < 0);
            let x = d[(i, j)];
            net[bi][bj] = net[bi][bj] + x;
            abs[bi][bj] = abs[bi][bj] + x.abs();
        }
    }
    let hundred = T::lit(100.0);
    // Divide first so a single-signed block gives exactly ±100.
    let ratio = |n: T, a: T| {
        if a > T::zero() {
            hundred * (n / a)
        } else {
            T::zero()
        }
    };
    let total_abs = d.abs_sum();
    let vdu: T = d
        .mul_signs(u)
        .iter()
        .zip(v)
        .map(|(&a, &s)| a * signed::<T>(s))
        .sum();
    QsrRow {
        pp: ratio(net[0][0], abs[0][0]),
        nn: ratio(net[1][1], abs[1][1]),
        np: ratio(net[1][0], abs[1][0]),
        pn: ratio(net[0][1], abs[0][1]),
        // |vᵀDu| <= Σ|d| exactly; the two sums round differently.
        overall: ratio(vdu, total_abs).max(-hundred).min(hundred),
    }
}

/// An axis with its factor scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TcaAxis<T> {
    /// Taxicab singular value, equal to the dispersion `Σ rᵢ |fᵢ|`.
    pub lambda: T,
    pub u: Vec<i8>,
    pub v: Vec<i8>,
    pub a: Vec<T>,
    pub b: Vec<T>,
    /// Row factor scores `aᵢ / rᵢ`.
    pub f: Vec<T>,
    /// Column factor scores `bⱼ / cⱼ`.
    pub g: Vec<T>,
    pub strategy: AxisStrategy,
}

impl<T: Scalar> TcaAxis<T> {
    pub fn dispersion(&self, row_masses: &[T]) -> T {
        self.f
            .iter()
            .zip(row_masses)
            .map(|(&f, &r)| r * f.abs())
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TcaResult<T> {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub row_masses: Vec<T>,
    pub col_masses: Vec<T>,
    pub axes: Vec<TcaAxis<T>>,
    pub qsr: Vec<QsrRow<T>>,
    /// Non-fatal observations, e.g. a dispersion that increased.
    pub diagnostics: Vec<String>,
}

impl<T: Scalar> TcaResult<T> {
    pub fn dispersions(&self) -> Vec<T> {
        self.axes.iter().map(|a| a.lambda).collect()
    }
}

/// Taxicab correspondence analysis with `k` axes.
pub fn tca<T: Scalar>(
    m: &LabeledMatrix<T>,
    k: usize,
    strategy: AxisStrategy,
) -> Result<TcaResult<T>> {
    let sc = scaffold(m)?;
    let bound = m.nrows().min(m.ncols()).saturating_sub(1);
    if k == 0 || k > bound {
        return Err(Error::invalid(format!(
            "{k} axes requested but a {}x{} table supports 1..={bound}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = sc.p.max_abs();
    let mut d = sc.residual;
    let mut axes = Vec::with_capacity(k);
    let mut qsrs = Vec::with_capacity(k);
    let mut diagnostics = Vec::new();
    for alpha in 1..=k {
        if d.max_abs() <= T::zero_tol() * scale {
            return Err(Error::DegenerateAxis { axis: alpha });
        }
        let ax = taxicab_axis(&d, strategy).map_err(|e| match e {
            Error::DegenerateAxis { .. } => Error::DegenerateAxis { axis: alpha },
            e => e,
        })?;
        qsrs.push(qsr(&d, &ax.u, &ax.v));
        let next = deflate(&d, &ax).map_err(|_| Error::DegenerateAxis { axis: alpha })?;
        let f =
            ax.a.iter()
                .zip(&sc.row_masses)
                .map(|(&a, &r)| a / r)
                .collect();
        let g =
            ax.b.iter()
                .zip(&sc.col_masses)
                .map(|(&b, &c)| b / c)
                .collect();
        if let Some(prev) = axes.last().map(|p: &TcaAxis<T>| p.lambda) {
            if ax.lambda > prev + T::tie_tol() * prev {
                let msg = format!(
                    "dispersion increased at axis {alpha}: {} > {}",
                    ax.lambda, prev
                );
                log::warn!("{msg}");
                diagnostics.push(msg);
            }
        }
        axes.push(TcaAxis {
            lambda: ax.lambda,
            u: ax.u,
            v: ax.v,
            a: ax.a,
            b: ax.b,
            f,
            g,
            strategy: ax.strategy,
        });
        d = next;
    }
    Ok(TcaResult {
        row_labels: m.row_labels().to_vec(),
        col_labels: m.col_labels().to_vec(),
        row_masses: sc.row_masses,
        col_masses: sc.col_masses,
        axes,
        qsr: qsrs,
        diagnostics,
    })
}

/// Residual matrices `D₁, D₂, …` seen by each axis of a result.
pub fn residual_sequence<T: Scalar>(
    m: &LabeledMatrix<T>,
    result: &TcaResult<T>,
) -> Result<Vec<Dense<T>>> {
    let mut d = scaffold(m)?.residual;
    let mut out = Vec::with_capacity(result.axes.len() + 1);
    for ax in &result.axes {
        let next = Dense::from_fn(d.nrows(), d.ncols(), |i, j| {
            d[(i, j)] - ax.a[i] * ax.b[j] / ax.lambda
        });
        out.push(std::mem::replace(&mut d, next));
    }
    out.push(d);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointContribution<T> {
    pub label: String,
    pub first: T,
    pub second: T,
    pub plane: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contributions<T> {
    pub axes: [usize; 2],
    pub rows: Vec<PointContribution<T>>,
    pub cols: Vec<PointContribution<T>>,
}

fn check_axes<T: Scalar>(result: &TcaResult<T>, axes: [usize; 2]) -> Result<()> {
    let n = result.axes.len();
    if axes[0] >= n || axes[1] >= n || axes[0] == axes[1] {
        return Err(Error::invalid(format!(
            "axes {} and {} not available in a {n}-axis result",
            axes[0] + 1,
            axes[1] + 1
        )));
    }
    Ok(())
}

/// Relative contributions (percent) of every row and column to two axes
/// (zero-based) and to the plane they span.
pub fn contributions<T: Scalar>(
    result: &TcaResult<T>,
    axes: [usize; 2],
) -> Result<Contributions<T>> {
    check_axes(result, axes)?;
    let hundred = T::lit(100.0);
    let (x, y) = (&result.axes[axes[0]], &result.axes[axes[1]]);
    let side =
        |scores: (&[T], &[T]), masses: &[T], labels: &[String]| -> Vec<PointContribution<T>> {
            labels
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    let c1 = masses[i] * scores.0[i].abs();
                    let c2 = masses[i] * scores.1[i].abs();
                    PointContribution {
                        label: l.clone(),
                        first: hundred * c1 / x.lambda,
                        second: hundred * c2 / y.lambda,
                        plane: hundred * (c1 + c2) / (x.lambda + y.lambda),
                    }
                })
                .collect()
        };
    Ok(Contributions {
        axes,
        rows: side((&x.f, &y.f), &result.row_masses, &result.row_labels),
        cols: side((&x.g, &y.g), &result.col_masses, &result.col_labels),
    })
}

/// Per-point contributions (percent) to a single axis: `(rows, cols)`.
pub fn axis_contributions<T: Scalar>(
    result: &TcaResult<T>,
    axis: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    let ax = result
        .axes
        .get(axis)
        .ok_or_else(|| Error::invalid(format!("axis {} not available", axis + 1)))?;
    let hundred = T::lit(100.0);
    let rows =
        ax.f.iter()
            .zip(&result.row_masses)
            .map(|(&f, &r)| hundred * r * f.abs() / ax.lambda)
            .collect();
    let cols =
        ax.g.iter()
            .zip(&result.col_masses)
            .map(|(&g, &c)| hundred * c * g.abs() / ax.lambda)
            .collect();
    Ok((rows, cols))
}

/// Signed contributions used as map coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContributionCoordinates<T> {
    pub axes: [usize; 2],
    pub rows: Vec<[T; 2]>,
    pub cols: Vec<[T; 2]>,
}

pub fn contribution_coordinates<T: Scalar>(
    result: &TcaResult<T>,
    axes: [usize; 2],
) -> Result<ContributionCoordinates<T>> {
    check_axes(result, axes)?;
    let hundred = T::lit(100.0);
    let (x, y) = (&result.axes[axes[0]], &result.axes[axes[1]]);
    let rows = (0..result.row_labels.len())
        .map(|i| {
            let r = result.row_masses[i];
            [
                hundred * r * x.f[i] / x.lambda,
                hundred * r * y.f[i] / y.lambda,
            ]
        })
        .collect();
    let cols = (0..result.col_labels.len())
        .map(|j| {
            let c = result.col_masses[j];
            [
                hundred * c * x.g[j] / x.lambda,
                hundred * c * y.g[j] / y.lambda,
            ]
        })
        .collect();
    Ok(ContributionCoordinates { axes, rows, cols })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[Vec<f64>]) -> Dense<f64> {
        Dense::from_rows(rows)
    }

    /// Brute force over every u ∈ {±1}^J without any shortcut.
    fn brute_lambda(d: &Dense<f64>) -> f64 {
        let n = d.ncols();
        (0..1usize << n)
            .map(|mask| {
                let u: Vec<i8> = (0..n)
                    .map(|j| if (mask >> j) & 1 == 1 { -1 } else { 1 })
                    .collect();
                d.mul_signs(&u).iter().map(|x| x.abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn checkerboard() {
        let d = dense(&[vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert_eq!(brute_lambda(&d), 4.0);
        for s in [AxisStrategy::Exhaustive, AxisStrategy::Multistart] {
            let ax = taxicab_axis(&d, s).unwrap();
            assert_eq!(ax.lambda, 4.0);
            assert_eq!(ax.u, vec![1, -1]);
            assert_eq!(ax.v, vec![1, -1]);
            let next = deflate(&d, &ax).unwrap();
            assert!(next.max_abs() < 1e-15);
        }
    }

    #[test]
    fn single_entry() {
        let d = dense(&[vec![0.0, 0.0, 0.0], vec![0.0, -2.5, 0.0]]);
        assert_eq!(taxicab_axis(&d, AxisStrategy::Auto).unwrap().lambda, 2.5);
    }

    #[test]
    fn positive_rank_one() {
        let x = [1.0_f64, 2.0, 0.5];
        let y = [3.0, 1.0];
        let d = Dense::from_fn(3, 2, |i, j| x[i] * y[j]);
        let ax = taxicab_axis(&d, AxisStrategy::Exhaustive).unwrap();
        assert!((ax.lambda - 3.5 * 4.0).abs() < 1e-12);
        assert_eq!(ax.u, vec![1, 1]);
        assert!(deflate(&d, &ax).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        assert!(matches!(
            taxicab_axis(&Dense::<f64>::zeros(3, 3), AxisStrategy::Auto),
            Err(Error::DegenerateAxis { .. })
        ));
        let ax = SignAxis {
            lambda: 0.0,
            u: vec![1],
            v: vec![1],
            a: vec![0.0],
            b: vec![0.0],
            strategy: AxisStrategy::Auto,
        };
        assert!(deflate(&Dense::zeros(1, 1), &ax).is_err());
    }

    #[test]
    fn exhaustive_matches_brute_force() {
        let d = dense(&[
            vec![0.3, -0.2, 0.1, -0.4, 0.2],
            vec![-0.1, 0.5, -0.3, 0.2, -0.3],
            vec![0.2, -0.1, 0.4, -0.2, -0.3],
            vec![-0.4, -0.2, -0.2, 0.4, 0.4],
        ]);
        let exact = brute_lambda(&d);
        for x in [d.clone(), d.transpose()] {
            let ax = taxicab_axis(&x, AxisStrategy::Exhaustive).unwrap();
            assert!((ax.lambda - exact).abs() < 1e-12);
            let ms = taxicab_axis(&x, AxisStrategy::Multistart).unwrap();
            assert!(ms.lambda <= ax.lambda + 1e-12);
        }
    }

    #[test]
    fn qsr_by_enumeration() {
        let d = dense(&[
            vec![0.2, -0.1, -0.1],
            vec![-0.3, 0.1, 0.2],
            vec![0.1, 0.0, -0.1],
        ]);
        let u = [1i8, -1, 1];
        let v = [1i8, -1, 1];
        let q = qsr(&d, &u, &v);
        // Direct cell-by-cell sums for each sign block.
        let blocks = |vs: i8, us: i8| {
            let mut n = 0.0;
            let mut a = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    if v[i] == vs && u[j] == us {
                        n += d[(i, j)];
                        a += f64::abs(d[(i, j)]);
                    }
                }
            }
            if a > 0.0 {
                100.0 * n / a
            } else {
                0.0
            }
        };
        assert!((q.pp - blocks(1, 1)).abs() < 1e-12);
        assert!((q.nn - blocks(-1, -1)).abs() < 1e-12);
        assert!((q.np - blocks(-1, 1)).abs() < 1e-12);
        assert!((q.pn - blocks(1, -1)).abs() < 1e-12);
        let vdu = 0.2 + 0.1 - 0.1 + 0.3 + 0.1 - 0.2 + 0.1 - 0.0 - 0.1;
        let total: f64 = d.as_slice().iter().map(|x| x.abs()).sum();
        assert!((q.overall - 100.0 * vdu / total).abs() < 1e-12);
    }

    #[test]
    fn positive_block_is_plus_hundred() {
        let d = dense(&[
            vec![0.3, 0.1, -0.2],
            vec![0.2, 0.4, -0.1],
            vec![-0.5, -0.5, 0.3],
        ]);
        let q = qsr(&d, &[1, 1, -1], &[1, 1, -1]);
        assert_eq!(q.pp, 100.0);
        assert_eq!(q.nn, 100.0);
        assert_eq!(q.pn, -100.0);
    }

    #[test]
    fn empty_block_reports_zero() {
        let d = dense(&[vec![1.0, -1.0], vec![-1.0, 1.0]]);
        let q = qsr(&d, &[1, 1], &[1, 1]);
        assert_eq!((q.nn, q.np, q.pn), (0.0, 0.0, 0.0));
    }

    fn table() -> LabeledMatrix<f64> {
        LabeledMatrix::from_rows(&[
            vec![4.0, 2.0, 0.0, 1.0],
            vec![3.0, 5.0, 1.0, 0.0],
            vec![0.0, 1.0, 6.0, 2.0],
            vec![1.0, 0.0, 3.0, 5.0],
            vec![2.0, 2.0, 2.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn tca_identities() {
        let m = table();
        let res = tca(&m, 3, AxisStrategy::Auto).unwrap();
        let ds = residual_sequence(&m, &res).unwrap();
        for (alpha, ax) in res.axes.iter().enumerate() {
            assert!((ax.dispersion(&res.row_masses) - ax.lambda).abs() < 1e-12);
            let l1a: f64 = ax.a.iter().map(|x| x.abs()).sum();
            let l1b: f64 = ax.b.iter().map(|x| x.abs()).sum();
            assert!((l1a - ax.lambda).abs() < 1e-12 && (l1b - ax.lambda).abs() < 1e-12);
            assert!(ax.v.iter().zip(&ax.a).all(|(&s, &a)| s == sign(a)));
            let next = &ds[alpha + 1];
            assert!(next.mul_signs(&ax.u).iter().all(|x| x.abs() < 1e-12));
            assert!(next.tmul_signs(&ax.v).iter().all(|x| x.abs() < 1e-12));
            let fr: f64 = ax.f.iter().zip(&res.row_masses).map(|(f, r)| f * r).sum();
            let gc: f64 = ax.g.iter().zip(&res.col_masses).map(|(g, c)| g * c).sum();
            assert!(fr.abs() < 1e-12 && gc.abs() < 1e-12);
            assert_eq!(ax.u[0], 1);
        }
        assert!(tca(&m, 4, AxisStrategy::Auto).is_err());
    }

    #[test]
    fn independence_is_degenerate() {
        let r = [1.0, 2.0, 3.0];
        let c = [2.0, 1.0, 1.0];
        let rows: Vec<Vec<f64>> = r
            .iter()
            .map(|a| c.iter().map(|b| a * b).collect())
            .collect();
        let m = LabeledMatrix::from_rows(&rows).unwrap();
        assert!(matches!(
            tca(&m, 1, AxisStrategy::Auto),
            Err(Error::DegenerateAxis { axis: 1 })
        ));
    }

    #[test]
    fn two_blocks_split_on_first_axis() {
        let m = LabeledMatrix::from_rows(&[
            vec![2.0, 1.0, 1.0, 0.0, 0.0, 0.0],
            vec![1.0, 3.0, 1.0, 0.0, 0.0, 0.0],
            vec![1.0, 1.0, 2.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 2.0, 1.0, 2.0],
            vec![0.0, 0.0, 0.0, 1.0, 2.0, 1.0],
            vec![0.0, 0.0, 0.0, 1.0, 1.0, 3.0],
        ])
        .unwrap();
        let res = tca(&m, 2, AxisStrategy::Exhaustive).unwrap();
        let v = &res.axes[0].v;
        assert!(v[..3].iter().all(|&s| s == v[0]));
        assert!(v[3..].iter().all(|&s| s == -v[0]));
    }

    #[test]
    fn contributions_sum_to_hundred() {
        let res = tca(&table(), 2, AxisStrategy::Auto).unwrap();
        let c = contributions(&res, [0, 1]).unwrap();
        for side in [&c.rows, &c.cols] {
            let s1: f64 = side.iter().map(|p| p.first).sum();
            let s2: f64 = side.iter().map(|p| p.second).sum();
            let sp: f64 = side.iter().map(|p| p.plane).sum();
            assert!(
                (s1 - 100.0).abs() < 1e-9 && (s2 - 100.0).abs() < 1e-9 && (sp - 100.0).abs() < 1e-9
            );
        }
        let cc = contribution_coordinates(&res, [0, 1]).unwrap();
        for (i, p) in cc.rows.iter().enumerate() {
            assert_eq!(sign(p[0]), sign(res.axes[0].f[i]));
            assert!((p[0].abs() - c.rows[i].first).abs() < 1e-12);
        }
        assert!(contributions(&res, [0, 2]).is_err());
        assert!(contribution_coordinates(&res, [1, 1]).is_err());
    }

    #[test]
    fn contribution_coordinates_hand_case() {
        let m = LabeledMatrix::<f64>::from_rows(&[
            vec![3.0, 1.0, 0.0],
            vec![1.0, 2.0, 1.0],
            vec![0.0, 1.0, 4.0],
            vec![2.0, 0.0, 1.0],
        ])
        .unwrap();
        let res = tca(&m, 2, AxisStrategy::Exhaustive).unwrap();
        let cc = contribution_coordinates(&res, [0, 1]).unwrap();
        for i in 0..4 {
            for (k, ax) in res.axes.iter().enumerate() {
                // 100 r f / λ = 100 a / λ
                let direct = 100.0 * ax.a[i] / ax.lambda;
                assert!((cc.rows[i][k] - direct).abs() < 1e-12);
            }
        }
        for k in 0..2 {
            let s: f64 = cc.cols.iter().map(|p| p[k].abs()).sum();
            assert!((s - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_precision_tca() {
        let m32 = table().cast::<f32>();
        let r32 = tca(&m32, 2, AxisStrategy::Auto).unwrap();
        let r64 = tca(&table(), 2, AxisStrategy::Auto).unwrap();
        for (a, b) in r32.axes.iter().zip(&r64.axes) {
            assert!((a.lambda as f64 - b.lambda).abs() < 1e-5);
            assert_eq!(a.u, b.u);
        }
    }
}
