//! Scalar entropy estimates from finite-`k` series.
//!
//! Lower and upper limits in `k` are approximated over a tail window of
//! rows. Limits in `eps` are reported, never extrapolated.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::{EntropySeries, SeriesRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitMethod {
    TailMean,
    /// Surrogate for the lower limit.
    TailMin,
    /// Surrogate for the upper limit.
    TailMax,
    /// Slope of `k * value` against `k`, which removes an `O(1/k)` bias.
    SlopeFit,
}

impl LimitMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            LimitMethod::TailMean => "tail-mean",
            LimitMethod::TailMin => "tail-min",
            LimitMethod::TailMax => "tail-max",
            LimitMethod::SlopeFit => "slope-fit",
        }
    }
}

impl fmt::Display for LimitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LimitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tail-mean" => Ok(LimitMethod::TailMean),
            "tail-min" => Ok(LimitMethod::TailMin),
            "tail-max" => Ok(LimitMethod::TailMax),
            "slope-fit" => Ok(LimitMethod::SlopeFit),
            other => Err(Error::InvalidArgument {
                name: "method",
                reason: format!("unknown limit method `{}`", other),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Inclusive `(k_min, k_max)` of the rows used.
    pub window: (usize, usize),
    pub method: LimitMethod,
    pub epsilon: f64,
}

/// Rows of `series` inside `window`, or the upper half of the rows when no
/// window is given.
fn window_rows(series: &EntropySeries, window: Option<(usize, usize)>) -> Result<Vec<&SeriesRow>> {
    let rows: Vec<&SeriesRow> = match window {
        Some((lo, hi)) => series.rows.iter().filter(|r| r.k >= lo && r.k <= hi).collect(),
        None => series.rows[series.rows.len() / 2..].iter().collect(),
    };
    if rows.len() < 3 {
        return Err(Error::WindowTooSmall { rows: rows.len() });
    }
    Ok(rows)
}

/// Limit in `k` of `series` over `window` (default: upper half of the rows).
pub fn k_limit(series: &EntropySeries, window: Option<(usize, usize)>, method: LimitMethod) -> Result<LimitEstimate> {
    let rows = window_rows(series, window)?;
    let n = rows.len() as f64;
    let (value, stderr) = match method {
        LimitMethod::TailMean => {
            let mean = rows.iter().map(|r| r.value).sum::<f64>() / n;
            // rows share their random numbers, so errors are not averaged down
            let se = rows.iter().map(|r| r.stderr).sum::<f64>() / n;
            (mean, se)
        }
        LimitMethod::TailMin => {
            let row = rows.iter().min_by(|a, b| a.value.total_cmp(&b.value)).unwrap();
            (row.value, row.stderr)
        }
        LimitMethod::TailMax => {
            let row = rows.iter().max_by(|a, b| a.value.total_cmp(&b.value)).unwrap();
            (row.value, row.stderr)
        }
        LimitMethod::SlopeFit => {
            let xs: Vec<f64> = rows.iter().map(|r| r.k as f64).collect();
            let ys: Vec<f64> = rows.iter().map(|r| r.k as f64 * r.value).collect();
            let x_mean = xs.iter().sum::<f64>() / n;
            let y_mean = ys.iter().sum::<f64>() / n;
            let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
            let se = rows
                .iter()
                .zip(&xs)
                .map(|(r, x)| ((x - x_mean) / sxx).abs() * x * r.stderr)
                .sum();
            (sxy / sxx, se)
        }
    };
    Ok(LimitEstimate {
        value,
        stderr,
        window: (rows[0].k, rows[rows.len() - 1].k),
        method,
        epsilon: series.epsilon,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrendFlag {
    Converged,
    NotConverged,
}

impl TrendFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrendFlag::Converged => "converged",
            TrendFlag::NotConverged => "not converged in eps",
        }
    }
}

impl fmt::Display for TrendFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Limits across `eps`, largest `eps` first.
#[derive(Clone, Debug, PartialEq)]
pub struct TrendReport {
    pub values: Vec<(f64, LimitEstimate)>,
    /// Value at the smallest `eps`.
    pub headline: f64,
    pub headline_stderr: f64,
    /// Values never decrease as `eps` shrinks.
    pub monotone: bool,
    pub flag: TrendFlag,
}

/// Summarizes per-`eps` limits. Values count as converged when their spread
/// is within `1e-9` relative or two standard errors.
pub fn epsilon_trend(estimates: &[(f64, LimitEstimate)]) -> Result<TrendReport> {
    if estimates.is_empty() {
        return Err(Error::InvalidArgument {
            name: "estimates",
            reason: "at least one epsilon is required".into(),
        });
    }
    let mut values = estimates.to_vec();
    values.sort_by(|a, b| b.0.total_cmp(&a.0));
    let vs: Vec<f64> = values.iter().map(|(_, e)| e.value).collect();
    let monotone = vs.windows(2).all(|w| w[1] >= w[0]);
    let lo = vs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let worst_se = values.iter().map(|(_, e)| e.stderr).fold(0.0, f64::max);
    let tol = (1e-9 * hi.abs().max(lo.abs()).max(1.0)).max(2.0 * worst_se);
    let flag = if hi - lo <= tol {
        TrendFlag::Converged
    } else {
        TrendFlag::NotConverged
    };
    let last = &values[values.len() - 1].1;
    Ok(TrendReport {
        headline: last.value,
        headline_stderr: last.stderr,
        values,
        monotone,
        flag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn series(values: &[(usize, f64)]) -> EntropySeries {
        EntropySeries {
            kind: "test".into(),
            epsilon: 0.25,
            q: None,
            rows: values.iter().map(|&(k, v)| SeriesRow::exact(k, v)).collect(),
        }
    }

    const METHODS: [LimitMethod; 4] = [
        LimitMethod::TailMean,
        LimitMethod::TailMin,
        LimitMethod::TailMax,
        LimitMethod::SlopeFit,
    ];

    #[test]
    fn constant_series() {
        let s = series(&(1..=10).map(|k| (k, 0.7)).collect::<Vec<_>>());
        for m in METHODS {
            let est = k_limit(&s, None, m).unwrap();
            assert!((est.value - 0.7).abs() < 1e-12, "{}", m);
            assert_eq!(est.window, (6, 10));
        }
    }

    #[test]
    fn slope_fit_removes_inverse_k_term() {
        let s = series(&(1..=64).map(|k| (k, LN_2 / 2.0 + 1.5 * LN_2 / k as f64)).collect::<Vec<_>>());
        let est = k_limit(&s, Some((8, 64)), LimitMethod::SlopeFit).unwrap();
        assert!((est.value - LN_2 / 2.0).abs() < 1e-9);
        assert_eq!(est.window, (8, 64));
    }

    #[test]
    fn alternating_noise() {
        let delta = 0.01;
        let s = series(
            &(1..=20)
                .map(|k| (k, 1.0 + if k % 2 == 0 { delta } else { -delta }))
                .collect::<Vec<_>>(),
        );
        let max = k_limit(&s, None, LimitMethod::TailMax).unwrap().value;
        let min = k_limit(&s, None, LimitMethod::TailMin).unwrap().value;
        assert!((max - min - 2.0 * delta).abs() < 1e-12);
        let mean = k_limit(&s, None, LimitMethod::TailMean).unwrap().value;
        assert!(min <= mean && mean <= max);
    }

    #[test]
    fn small_windows_rejected() {
        let s = series(&[(1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0)]);
        assert_eq!(k_limit(&s, None, LimitMethod::TailMean), Err(Error::WindowTooSmall { rows: 2 }));
        assert!(k_limit(&s, Some((2, 4)), LimitMethod::TailMean).is_ok());
        assert!(k_limit(&s, Some((10, 40)), LimitMethod::TailMean).is_err());
    }

    #[test]
    fn trend_flags() {
        let est = |eps: f64, v: f64| {
            (
                eps,
                LimitEstimate {
                    value: v,
                    stderr: 0.0,
                    window: (1, 3),
                    method: LimitMethod::TailMean,
                    epsilon: eps,
                },
            )
        };
        let same = epsilon_trend(&[est(0.25, 0.3), est(0.125, 0.3), est(0.0625, 0.3)]).unwrap();
        assert_eq!(same.flag, TrendFlag::Converged);
        assert_eq!(same.headline, 0.3);
        let rising = epsilon_trend(&[est(0.0625, 0.5), est(0.25, 0.3), est(0.125, 0.4)]).unwrap();
        assert_eq!(rising.flag, TrendFlag::NotConverged);
        assert!(rising.monotone);
        assert_eq!(rising.headline, 0.5);
        assert_eq!(rising.values[0].0, 0.25);
    }

    proptest::proptest! {
        #[test]
        fn tail_order_and_window_invariance(
            values in proptest::collection::vec(-5.0f64..5.0, 6..30),
            extra in proptest::collection::vec(-5.0f64..5.0, 0..10),
        ) {
            let rows: Vec<(usize, f64)> = values.iter().enumerate().map(|(i, &v)| (i + 1, v)).collect();
            let s = series(&rows);
            let window = Some((3, values.len()));
            let min = k_limit(&s, window, LimitMethod::TailMin).unwrap().value;
            let mean = k_limit(&s, window, LimitMethod::TailMean).unwrap().value;
            let max = k_limit(&s, window, LimitMethod::TailMax).unwrap().value;
            proptest::prop_assert!(min <= mean + 1e-12 && mean <= max + 1e-12);

            let mut longer = rows.clone();
            longer.extend(extra.iter().enumerate().map(|(i, &v)| (values.len() + 1 + i, v)));
            let t = series(&longer);
            for m in METHODS {
                proptest::prop_assert_eq!(
                    k_limit(&s, window, m).unwrap().value,
                    k_limit(&t, window, m).unwrap().value
                );
            }
        }

        #[test]
        fn slope_fit_recovers_affine_intercept(limit in -3.0f64..3.0, c in -10.0f64..10.0, start in 1usize..20) {
            let rows: Vec<(usize, f64)> = (start..start + 30).map(|k| (k, limit + c / k as f64)).collect();
            let est = k_limit(&series(&rows), None, LimitMethod::SlopeFit).unwrap();
            proptest::prop_assert!((est.value - limit).abs() <= 1e-9 * limit.abs().max(1.0));
        }
    }
}
