//! Least squares through the normal equations.

use crate::error::{Error, Result};
use crate::num::Real;

/// Result of a least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit<T> {
    /// Intercept first when one was fitted, then one slope per regressor.
    pub coefficients: Vec<T>,
    pub rss: T,
    /// The design was rank deficient; dependent columns got a zero slope.
    pub degenerate: bool,
}

/// Fits `y ≈ a₀ + Σ bᵢ·regressorᵢ` (intercept optional) by ordinary least squares.
///
/// Columns are centred (when an intercept is fitted) and equilibrated before
/// Gaussian elimination with partial pivoting. A pivot below the rank
/// tolerance marks the design degenerate; the offending column is dropped,
/// which leaves the residual sum of squares at its true minimum.
pub fn ols_fit<T: Real>(y: &[T], regressors: &[&[T]], intercept: bool) -> Result<OlsFit<T>> {
    let rows = y.len();
    let k = regressors.len();
    if let Some(r) = regressors.iter().find(|r| r.len() != rows) {
        return Err(Error::LengthMismatch(rows, r.len()));
    }
    let params = k + usize::from(intercept);
    if rows <= params + 1 {
        return Err(Error::SeriesTooShort {
            need: params + 2,
            got: rows,
        });
    }

    let n = T::from_usize(rows).unwrap();
    let mean = |c: &[T]| {
        if intercept {
            c.iter().copied().sum::<T>() / n
        } else {
            T::zero()
        }
    };
    let y_mean = mean(y);
    let col_means: Vec<T> = regressors.iter().map(|c| mean(c)).collect();

    // Centred cross products.
    let mut gram = vec![T::zero(); k * k];
    let mut rhs = vec![T::zero(); k];
    for i in 0..k {
        let ci = regressors[i];
        let mi = col_means[i];
        for j in i..k {
            let cj = regressors[j];
            let mj = col_means[j];
            let s: T = ci.iter().zip(cj).map(|(&a, &b)| (a - mi) * (b - mj)).sum();
            gram[i * k + j] = s;
            gram[j * k + i] = s;
        }
        rhs[i] = ci.iter().zip(y).map(|(&a, &b)| (a - mi) * (b - y_mean)).sum();
    }

    let (slopes, degenerate) = solve_equilibrated(&mut gram, &mut rhs, k);

    let mut rss = T::zero();
    for t in 0..rows {
        let mut fit = T::zero();
        for (j, c) in regressors.iter().enumerate() {
            fit += slopes[j] * (c[t] - col_means[j]);
        }
        let r = (y[t] - y_mean) - fit;
        rss += r * r;
    }

    let mut coefficients = Vec::with_capacity(params);
    if intercept {
        let a0 = y_mean - slopes.iter().zip(&col_means).map(|(&b, &m)| b * m).sum::<T>();
        coefficients.push(a0);
    }
    coefficients.extend(slopes);
    Ok(OlsFit {
        coefficients,
        rss,
        degenerate,
    })
}

/// Relative pivot below which a column counts as linearly dependent.
fn rank_tolerance<T: Real>() -> T {
    T::epsilon().powf(T::c(0.625))
}

/// Solves the symmetric system in place. Returns the solution and whether
/// any column had to be dropped.
fn solve_equilibrated<T: Real>(a: &mut [T], b: &mut [T], k: usize) -> (Vec<T>, bool) {
    let mut degenerate = false;
    let scale: Vec<T> = (0..k)
        .map(|i| {
            let d = a[i * k + i];
            if d > T::zero() {
                d.sqrt()
            } else {
                T::zero()
            }
        })
        .collect();
    for i in 0..k {
        for j in 0..k {
            a[i * k + j] = if scale[i] > T::zero() && scale[j] > T::zero() {
                a[i * k + j] / (scale[i] * scale[j])
            } else {
                T::zero()
            };
        }
        b[i] = if scale[i] > T::zero() {
            b[i] / scale[i]
        } else {
            T::zero()
        };
    }

    let tol = rank_tolerance::<T>();
    // pivot_row[c] = row holding the pivot for column c, if the column is kept.
    let mut pivot_row: Vec<Option<usize>> = vec![None; k];
    let mut row = 0;
    for col in 0..k {
        if row == k {
            degenerate = true;
            break;
        }
        let (best, best_abs) = (row..k)
            .map(|r| (r, a[r * k + col].abs()))
            .fold((row, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_abs <= tol {
            degenerate = true;
            continue;
        }
        if best != row {
            for j in 0..k {
                a.swap(best * k + j, row * k + j);
            }
            b.swap(best, row);
        }
        let p = a[row * k + col];
        for r in row + 1..k {
            let f = a[r * k + col] / p;
            if f == T::zero() {
                continue;
            }
            for j in col..k {
                let v = a[row * k + j];
                a[r * k + j] -= f * v;
            }
            let v = b[row];
            b[r] -= f * v;
        }
        pivot_row[col] = Some(row);
        row += 1;
    }

    let mut z = vec![T::zero(); k];
    for col in (0..k).rev() {
        let Some(r) = pivot_row[col] else { continue };
        let mut s = b[r];
        for j in col + 1..k {
            s -= a[r * k + j] * z[j];
        }
        z[col] = s / a[r * k + col];
    }
    let x = z
        .iter()
        .zip(&scale)
        .map(|(&v, &s)| if s > T::zero() { v / s } else { T::zero() })
        .collect();
    (x, degenerate)
}
