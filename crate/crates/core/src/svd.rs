//! One-sided (Hestenes) Jacobi singular value decomposition.
//!
//! Columns of the working matrix are rotated pairwise until mutually
//! orthogonal; their norms are then the singular values. The method is slow
//! compared to bidiagonalization but accurate to high relative precision,
//! which matters when counting singular values equal to one.

use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(s) Vᵀ` with `s` in descending order.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    /// `m × r` left singular vectors, `r = min(m, n)`.
    pub u: Dense<T>,
    pub s: Vec<T>,
    /// `n × r` right singular vectors.
    pub v: Dense<T>,
    pub sweeps: usize,
}

pub fn svd<T: Scalar>(a: &Dense<T>) -> Result<Svd<T>> {
    if a.nrows() >= a.ncols() {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.transpose())?;
        Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
            sweeps: t.sweeps,
        })
    }
}

/// Requires `m >= n`.
fn jacobi_tall<T: Scalar>(a: &Dense<T>) -> Result<Svd<T>> {
    let (m, n) = (a.nrows(), a.ncols());
    // Column-major working copy: cols[j] is column j.
    let mut cols: Vec<Vec<T>> = (0..n)
        .map(|j| (0..m).map(|i| a[(i, j)]).collect())
        .collect();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    let tol = T::svd_tol();
    let tiny = T::min_positive_value().sqrt();

    let mut sweeps = 0;
    loop {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NonConvergence { sweeps });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = T::zero();
                    let mut beta = T::zero();
                    let mut gamma = T::zero();
                    for (&x, &y) in cp.iter().zip(cq) {
                        alpha = alpha + x * x;
                        beta = beta + y * y;
                        gamma = gamma + x * y;
                    }
                    (alpha, beta, gamma)
                };
                if gamma.abs() <= tol * (alpha * beta).sqrt() || gamma.abs() < tiny {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(T, usize)> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| (c.iter().map(|&x| x * x).sum::<T>().sqrt(), j))
        .collect();
    // Stable: equal singular values keep column order.
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut u = Dense::zeros(m, n);
    let mut vv = Dense::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &(sigma, j)) in order.iter().enumerate() {
        s.push(sigma);
        if sigma > tiny {
            for i in 0..m {
                u[(i, k)] = cols[j][i] / sigma;
            }
        }
        for i in 0..n {
            vv[(i, k)] = v[j][i];
        }
    }
    Ok(Svd {
        u,
        s,
        v: vv,
        sweeps,
    })
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct<T: Scalar>(d: &Svd<T>) -> Dense<T> {
        let (m, n) = (d.u.nrows(), d.v.nrows());
        Dense::from_fn(m, n, |i, j| {
            (0..d.s.len())
                .map(|k| d.u[(i, k)] * d.s[k] * d.v[(j, k)])
                .sum()
        })
    }

    #[test]
    fn diagonal() {
        let a = Dense::from_rows(&[vec![3.0_f64, 0.0], vec![0.0, -5.0], vec![0.0, 0.0]]);
        let d = svd(&a).unwrap();
        assert!((d.s[0] - 5.0).abs() < 1e-14);
        assert!((d.s[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_wide_and_tall() {
        let a = Dense::from_rows(&[
            vec![1.0_f64, 2.0, 3.0, 4.0],
            vec![2.0, -1.0, 0.5, 0.0],
            vec![0.0, 1.0, 1.0, -2.0],
        ]);
        for x in [a.clone(), a.transpose()] {
            let d = svd(&x).unwrap();
            let r = reconstruct(&d);
            for i in 0..x.nrows() {
                for j in 0..x.ncols() {
                    assert!((r[(i, j)] - x[(i, j)]).abs() < 1e-12);
                }
            }
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn known_spectrum() {
        // [[2, 0], [0, 1]] rotated on the left by 45 degrees keeps {2, 1}.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = Dense::from_rows(&[vec![2.0 * h, -h], vec![2.0 * h, h]]);
        let d = svd(&a).unwrap();
        assert!((d.s[0] - 2.0).abs() < 1e-14 && (d.s[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_precision() {
        let a = Dense::from_rows(&[vec![4.0_f32, 0.0], vec![3.0, 0.0]]);
        let d = svd(&a).unwrap();
        assert!((d.s[0] - 5.0).abs() < 1e-5);
        assert!(d.s[1].abs() < 1e-5);
    }
}
