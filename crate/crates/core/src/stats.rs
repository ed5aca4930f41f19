//! Two-sample and paired t tests.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("each sample needs at least two values")]
    TooFewValues,
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("zero variance: the statistic is undefined")]
    DegenerateVariance,
    #[error("non-finite input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Independent,
    Welch,
    Paired,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p: f64,
    pub kind: TestKind,
}

impl TestResult {
    /// Result used in reports when the statistic is undefined.
    pub fn degenerate(kind: TestKind, df: f64) -> Self {
        TestResult {
            t: 0.0,
            df,
            p: 1.0,
            kind,
        }
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn check(x: &[f64]) -> Result<(), StatsError> {
    if x.len() < 2 {
        return Err(StatsError::TooFewValues);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

fn finish(t: f64, df: f64, kind: TestKind) -> TestResult {
    TestResult {
        t,
        df,
        p: two_sided_p(t, df),
        kind,
    }
}

/// Pooled-variance two-sample test.
pub fn t_independent(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    check(x)?;
    check(y)?;
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let df = nx + ny - 2.0;
    let pooled = ((nx - 1.0) * variance(x) + (ny - 1.0) * variance(y)) / df;
    let se = libm::sqrt(pooled * (1.0 / nx + 1.0 / ny));
    if se == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    Ok(finish((mean(x) - mean(y)) / se, df, TestKind::Independent))
}

/// Unequal-variance two-sample test with Welch–Satterthwaite degrees of freedom.
pub fn t_welch(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    check(x)?;
    check(y)?;
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (vx, vy) = (variance(x) / nx, variance(y) / ny);
    let se2 = vx + vy;
    if se2 == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let df = se2 * se2 / (vx * vx / (nx - 1.0) + vy * vy / (ny - 1.0));
    Ok(finish((mean(x) - mean(y)) / libm::sqrt(se2), df, TestKind::Welch))
}

pub fn t_paired(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    check(x)?;
    check(y)?;
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let n = diff.len() as f64;
    let se = libm::sqrt(variance(&diff) / n);
    if se == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    Ok(finish(mean(&diff) / se, n - 1.0, TestKind::Paired))
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    reg_inc_beta(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Student's t cumulative distribution function.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    let tail = two_sided_p(t, df) / 2.0;
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Regularised incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b) + a * libm::log(x) + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    // The continued fraction converges fast only below the mean.
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let mut c = 1.0;
    let mut d = 1.0 - (a + b) * x / (a + 1.0);
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = f64::from(m);
        let m2 = 2.0 * m;
        let even = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        for coef in [even, -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0))] {
            d = 1.0 + coef * d;
            if d.abs() < TINY {
                d = TINY;
            }
            c = 1.0 + coef / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            h *= d * c;
        }
        if (d * c - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    #[test]
    fn pooled_hand_value() {
        // Means 2 and 5, both variances 1: t = -3 / sqrt(2/3).
        let r = t_independent(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_relative_eq!(r.t, -3.0 / (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert!((r.t + 3.674).abs() < 1e-3);
        assert_eq!(r.df, 4.0);
    }

    #[test]
    fn cdf_matches_reference_implementation() {
        for df in [1.0, 2.5, 4.0, 30.0, 139.0] {
            let reference = StudentsT::new(0.0, 1.0, df).unwrap();
            for t in [-6.0, -2.1, -0.3, 0.0, 0.7, 1.96, 3.674, 12.0] {
                assert_relative_eq!(t_cdf(t, df), reference.cdf(t), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn welch_equals_pooled_for_balanced_equal_variances() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 3.0, 4.0, 5.0];
        let p = t_independent(&x, &y).unwrap();
        let w = t_welch(&x, &y).unwrap();
        assert_relative_eq!(p.t, w.t, epsilon = 1e-12);
        assert_relative_eq!(p.df, w.df, epsilon = 1e-12);
    }

    #[test]
    fn paired_cases() {
        let x = [0.5, 0.6, 0.7, 0.8];
        assert_eq!(t_paired(&x, &x), Err(StatsError::DegenerateVariance));
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| v - 0.5 + [1e-3, -1e-3, 2e-3, -2e-3][i])
            .collect();
        let r = t_paired(&x, &y).unwrap();
        assert!(r.p < 1e-3, "{r:?}");
        assert_eq!(t_paired(&x, &x[..3]), Err(StatsError::LengthMismatch(4, 3)));
        assert_eq!(t_independent(&[1.0], &x), Err(StatsError::TooFewValues));
    }
}
