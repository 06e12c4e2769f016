//! Granger causality between a ground-truth series and device traffic.
//!
//! Restricted model: `y_t = a₀ + Σ_{i=1..n} a_i·y_{t−i}`.
//! Augmented model adds `Σ_{i=1..m} b_i·x_{t−i}`. The F statistic compares
//! the two residual sums of squares over the rows both models can use.

use std::fmt;

use super::fdist::f_sf;
use super::ols::{ols_fit, OlsFit};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::trace::TimeSeries;

/// Accelerometer axis a test was run against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrangerResult<T> {
    /// Own-history order `n` of the restricted model.
    pub lag_y: usize,
    /// Order `m` of the added x history.
    pub lag_x: usize,
    pub coeffs_restricted: Vec<T>,
    pub coeffs_augmented: Vec<T>,
    pub rss_restricted: T,
    pub rss_augmented: T,
    pub f_stat: T,
    pub p_value: T,
    /// Numerator and denominator degrees of freedom.
    pub df: (usize, usize),
    /// A fit was rank deficient or y was perfectly predicted by its own past;
    /// the null is then never rejected.
    pub degenerate: bool,
    pub axis: Option<Axis>,
}

/// Minimum number of rows beyond the parameter count.
const MIN_SLACK: usize = 10;

fn lagged<T>(s: &[T], start: usize, lag: usize) -> &[T] {
    &s[start - lag..s.len() - lag]
}

fn restricted_fit<T: Real>(y: &[T], p: usize, n: usize) -> Result<OlsFit<T>> {
    let cols: Vec<&[T]> = (1..=n).map(|i| lagged(y, p, i)).collect();
    ols_fit(&y[p..], &cols, true)
}

fn augmented_fit<T: Real>(y: &[T], x: &[T], p: usize, n: usize, m: usize) -> Result<OlsFit<T>> {
    let mut cols: Vec<&[T]> = (1..=n).map(|i| lagged(y, p, i)).collect();
    cols.extend((1..=m).map(|i| lagged(x, p, i)));
    ols_fit(&y[p..], &cols, true)
}

fn compare<T: Real>(
    y: &[T],
    p: usize,
    n: usize,
    m: usize,
    restricted: &OlsFit<T>,
    augmented: OlsFit<T>,
) -> GrangerResult<T> {
    let rows = y.len() - p;
    let df2 = rows - n - m - 1;
    let ys = &y[p..];
    let mean = ys.iter().copied().sum::<T>() / T::from_usize(rows).unwrap();
    let tss: T = ys.iter().map(|&v| (v - mean) * (v - mean)).sum();
    let rss_r = restricted.rss;
    let rss_a = augmented.rss;
    let perfectly_predicted = rss_r <= tss * T::c(1e-12);
    let degenerate = restricted.degenerate || augmented.degenerate || tss == T::zero() || perfectly_predicted;

    let (f_stat, p_value) = if degenerate {
        (T::zero(), T::one())
    } else if rss_a <= T::zero() {
        (T::infinity(), T::zero())
    } else {
        let num = (rss_r - rss_a).max(T::zero()) / T::from_usize(m).unwrap();
        let den = rss_a / T::from_usize(df2).unwrap();
        let f = num / den;
        let pv = f_sf(f, T::from_usize(m).unwrap(), T::from_usize(df2).unwrap());
        (f, pv.max(T::zero()).min(T::one()))
    };

    GrangerResult {
        lag_y: n,
        lag_x: m,
        coeffs_restricted: restricted.coefficients.clone(),
        coeffs_augmented: augmented.coefficients,
        rss_restricted: rss_r,
        rss_augmented: rss_a,
        f_stat,
        p_value,
        df: (m, df2),
        degenerate,
        axis: None,
    }
}

fn check_len<T>(y: &[T], x: &[T], n: usize, m: usize) -> Result<()> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch(y.len(), x.len()));
    }
    if n == 0 || m == 0 {
        return Err(Error::Config("lag orders must be at least 1".into()));
    }
    let need = n + m + MIN_SLACK;
    if y.len() < need {
        return Err(Error::SeriesTooShort { need, got: y.len() });
    }
    Ok(())
}

/// Tests whether `x` Granger-causes `y` with own-lag order `n` and x-lag order `m`.
///
/// Both fits use rows `t = max(n, m) .. L`, so the denominator degrees of
/// freedom are `rows − n − m − 1`.
pub fn granger_test<T: Real>(y: &TimeSeries<T>, x: &TimeSeries<T>, n: usize, m: usize) -> Result<GrangerResult<T>> {
    granger_test_slices(&y.values, &x.values, n, m)
}

pub fn granger_test_slices<T: Real>(y: &[T], x: &[T], n: usize, m: usize) -> Result<GrangerResult<T>> {
    check_len(y, x, n, m)?;
    let p = n.max(m);
    let restricted = restricted_fit(y, p, n)?;
    let augmented = augmented_fit(y, x, p, n, m)?;
    Ok(compare(y, p, n, m, &restricted, augmented))
}

/// Lag sweep settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    /// Largest lag tested, in windows (2 s at 100 ms windows).
    pub max_lag: usize,
    /// A device is flagged when some axis reaches a p-value below this.
    pub p_threshold: f64,
    /// Extra delay, in windows, between the ground truth and the traffic.
    /// With offset `o`, x lags `o+1 ..= o+max_lag` are tested.
    pub lag_offset: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            max_lag: 20,
            p_threshold: 0.08,
            lag_offset: 0,
        }
    }
}

/// Outcome of sweeping lags over the three accelerometer axes.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalityVerdict<T> {
    pub monitoring: bool,
    /// Lag (in windows, excluding any offset) of the overall minimum p-value.
    pub best_lag: usize,
    pub best_axis: Axis,
    pub min_p: T,
    /// Lowest-p result for each axis.
    pub per_axis: Vec<GrangerResult<T>>,
}

/// Runs `granger_test` with `n = m = lag` for lags `1..=max_lag` on every axis
/// and keeps the smallest p-value per axis.
pub fn granger_sweep<T: Real>(
    y: &TimeSeries<T>,
    axes: &[TimeSeries<T>; 3],
    cfg: &SweepConfig,
) -> Result<CausalityVerdict<T>> {
    if cfg.max_lag == 0 {
        return Err(Error::Config("max lag must be at least 1".into()));
    }
    for a in axes {
        if a.len() != y.len() {
            return Err(Error::LengthMismatch(y.len(), a.len()));
        }
    }
    let o = cfg.lag_offset;
    let usable = y.len().saturating_sub(o);
    let need = 3 * cfg.max_lag;
    if usable < need {
        return Err(Error::InsufficientData { need, got: usable });
    }
    let ys = &y.values[o..];
    let xs: Vec<&[T]> = axes.iter().map(|a| &a.values[..a.len() - o]).collect();

    let mut best: Vec<Option<GrangerResult<T>>> = vec![None, None, None];
    for lag in 1..=cfg.max_lag {
        if ys.len() < 2 * lag + MIN_SLACK {
            break;
        }
        let restricted = restricted_fit(ys, lag, lag)?;
        for (k, x) in xs.iter().enumerate() {
            let augmented = augmented_fit(ys, x, lag, lag, lag)?;
            let mut r = compare(ys, lag, lag, lag, &restricted, augmented);
            r.axis = Some(Axis::ALL[k]);
            if best[k].as_ref().is_none_or(|b| r.p_value < b.p_value) {
                best[k] = Some(r);
            }
        }
    }
    let per_axis: Vec<GrangerResult<T>> = best.into_iter().map(|b| b.expect("lag 1 always fits")).collect();
    let top = per_axis
        .iter()
        .fold(&per_axis[0], |acc, r| if r.p_value < acc.p_value { r } else { acc });
    Ok(CausalityVerdict {
        monitoring: top.p_value.to_f64_lossy() < cfg.p_threshold,
        best_lag: top.lag_x,
        best_axis: top.axis.unwrap(),
        min_p: top.p_value,
        per_axis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn ts(v: Vec<f64>) -> TimeSeries<f64> {
        TimeSeries::new(0, 100_000, v).unwrap()
    }

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(0.0, 1.0).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn planted_lag_one_cause_is_found() {
        let x = noise(1, 200);
        let e = noise(2, 200);
        let mut y = vec![0.0; 200];
        for t in 1..200 {
            y[t] = 0.9 * x[t - 1] + 0.1 * e[t];
        }
        let r = granger_test(&ts(y), &ts(x), 2, 2).unwrap();
        assert!(r.p_value < 0.01, "{}", r.p_value);
        assert!(r.rss_augmented <= r.rss_restricted);
    }

    #[test]
    fn noiseless_shift_is_a_perfect_predictor() {
        let x = noise(3, 120);
        let mut y = vec![0.0; 120];
        y[1..].copy_from_slice(&x[..119]);
        let r = granger_test(&ts(y), &ts(x), 1, 1).unwrap();
        assert!(r.rss_augmented < 1e-20);
        assert!(r.f_stat > 1e6);
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn constant_traffic_is_degenerate() {
        let x = noise(4, 100);
        let r = granger_test(&ts(vec![250.0; 100]), &ts(x), 3, 3).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn length_preconditions() {
        let a = ts(vec![0.0; 20]);
        let b = ts(vec![0.0; 21]);
        assert!(matches!(granger_test(&a, &b, 1, 1), Err(Error::LengthMismatch(..))));
        assert!(matches!(
            granger_test(&a, &a, 6, 6),
            Err(Error::SeriesTooShort { need: 22, got: 20 })
        ));
    }

    #[test]
    fn sweep_rejects_short_series() {
        let y = ts(vec![1.0; 59]);
        let axes = [y.clone(), y.clone(), y.clone()];
        assert!(matches!(
            granger_sweep(&y, &axes, &SweepConfig::default()),
            Err(Error::InsufficientData { need: 60, got: 59 })
        ));
    }

    #[test]
    fn sweep_finds_the_planted_lag_and_axis() {
        let n = 400;
        let xs = [noise(10, n), noise(11, n), noise(12, n)];
        let e = noise(13, n);
        let mut y = vec![0.0; n];
        for t in 4..n {
            y[t] = 0.3 * y[t - 1] + 2.0 * xs[1][t - 4] + e[t];
        }
        let axes = [ts(xs[0].clone()), ts(xs[1].clone()), ts(xs[2].clone())];
        let v = granger_sweep(&ts(y), &axes, &SweepConfig::default()).unwrap();
        assert!(v.monitoring);
        assert_eq!(v.best_axis, Axis::Y);
        assert!(v.best_lag >= 4);
        assert_eq!(v.per_axis.len(), 3);
    }

    #[test]
    fn offset_recovers_a_long_delay() {
        let n = 700;
        let x = noise(20, n);
        let e = noise(21, n);
        let d = 300;
        let mut y = vec![0.0; n];
        for t in d + 1..n {
            y[t] = x[t - d - 1] + 0.2 * e[t];
        }
        let axes = [ts(x.clone()), ts(noise(22, n)), ts(noise(23, n))];
        let cfg = SweepConfig {
            lag_offset: d,
            ..SweepConfig::default()
        };
        let v = granger_sweep(&ts(y), &axes, &cfg).unwrap();
        assert!(v.monitoring);
        assert_eq!(v.best_axis, Axis::X);
        assert!(v.min_p < 1e-10);
    }

    #[test]
    fn sweep_is_bit_deterministic() {
        let n = 300;
        let y = ts(noise(30, n));
        let axes = [ts(noise(31, n)), ts(noise(32, n)), ts(noise(33, n))];
        let a = granger_sweep(&y, &axes, &SweepConfig::default()).unwrap();
        let b = granger_sweep(&y, &axes, &SweepConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.min_p.to_bits(), b.min_p.to_bits());
    }
}
