//! Forecast scoring: MAE, sample CRPS, 1-D Wasserstein distance and
//! baseline-normalized errors. Steps whose truth is missing are skipped
//! everywhere.

use serde::{Deserialize, Serialize};

use crate::series::TimeSeries;
use crate::stats::{mean_and_stderr, sort_floats};
use crate::{Error, Result};

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

fn mean_present(steps: &[Option<f64>]) -> Result<f64> {
    let present: Vec<f64> = steps.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(Error::EmptyInput("truth has no observed steps"));
    }
    Ok(present.iter().sum::<f64>() / present.len() as f64)
}

/// Absolute error per step, `None` where the truth is missing.
pub fn abs_errors(point: &[f64], truth: &TimeSeries) -> Result<Vec<Option<f64>>> {
    check_len(truth.len(), point.len())?;
    Ok(truth
        .iter()
        .zip(point)
        .map(|(y, p)| y.map(|y| (p - y).abs()))
        .collect())
}

pub fn mae(point: &[f64], truth: &TimeSeries) -> Result<f64> {
    mean_present(&abs_errors(point, truth)?)
}

/// CRPS of the empirical distribution of `samples` at observation `y`.
///
/// Evaluates `E|X - y| - E|X - X'| / 2` with the all-pairs `1/m²`
/// estimator, which is the exact integral of the squared difference
/// between the sample step CDF and the step at `y`. The rank weights sum
/// to zero, so samples are centred on `y` before weighting.
pub fn crps_sample(samples: &[f64], y: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    let mut sorted = samples.to_vec();
    sort_floats(&mut sorted);
    let m = sorted.len() as f64;
    let abs_dev: f64 = sorted.iter().map(|x| (x - y).abs()).sum::<f64>() / m;
    let spread: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * i as f64 - m + 1.0) * (x - y))
        .sum::<f64>()
        / (m * m);
    Ok((abs_dev - spread).max(0.0))
}

/// Per-step and mean CRPS of a sample matrix (`samples[i][t]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crps {
    pub per_step: Vec<Option<f64>>,
    pub mean: f64,
}

pub fn crps(samples: &[Vec<f64>], truth: &TimeSeries) -> Result<Crps> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    for s in samples {
        check_len(truth.len(), s.len())?;
    }
    let per_step = truth
        .iter()
        .enumerate()
        .map(|(t, y)| match y {
            Some(y) => {
                let column: Vec<f64> = samples.iter().map(|s| s[t]).collect();
                crps_sample(&column, y).map(Some)
            }
            None => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = mean_present(&per_step)?;
    Ok(Crps { per_step, mean })
}

/// 1-D Wasserstein-1 distance between two empirical distributions,
/// computed as the integral of `|F_a - F_b|`. For equal sizes this is the
/// mean absolute difference of the sorted samples.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("sample set"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    sort_floats(&mut a);
    sort_floats(&mut b);
    if a.len() == b.len() {
        let total: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        return Ok(total / a.len() as f64);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut prev = a[0].min(b[0]);
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        total += (i as f64 / na - j as f64 / nb).abs() * (next - prev);
        while i < a.len() && a[i] == next {
            i += 1;
        }
        while j < b.len() && b[j] == next {
            j += 1;
        }
        prev = next;
    }
    Ok(total)
}

/// MAE of repeating the last observed training value over the horizon.
pub fn naive_mae(train: &TimeSeries, truth: &TimeSeries) -> Result<f64> {
    let last = (0..train.len())
        .rev()
        .find_map(|i| train.get(i))
        .ok_or(Error::EmptySeries)?;
    mae(&vec![last; truth.len()], truth)
}

/// `mae` divided by the naive last-value MAE.
pub fn normalized_mae(mae: f64, train: &TimeSeries, truth: &TimeSeries) -> Result<f64> {
    let naive = naive_mae(train, truth)?;
    if naive == 0.0 {
        return Err(Error::DegenerateNaive);
    }
    Ok(mae / naive)
}

/// `mae` divided by the smallest baseline MAE on the same dataset.
pub fn normalize_by_lowest_baseline(mae: f64, baseline_maes: &[f64]) -> Result<f64> {
    let lowest = baseline_maes.iter().copied().fold(f64::INFINITY, f64::min);
    if baseline_maes.is_empty() {
        return Err(Error::EmptyInput("baseline MAEs"));
    }
    if lowest <= 0.0 {
        return Err(Error::DegenerateNaive);
    }
    Ok(mae / lowest)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Naive,
    LowestBaseline,
}

/// Mean and standard error of a metric across datasets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

pub fn aggregate(values: &[f64]) -> Result<Aggregate> {
    if values.is_empty() {
        return Err(Error::EmptyInput("metric values"));
    }
    let (mean, stderr) = mean_and_stderr(values);
    Ok(Aggregate {
        mean,
        stderr,
        count: values.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerStep {
    pub crps: Vec<Option<f64>>,
    pub abs_error: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mae: f64,
    pub crps_mean: f64,
    pub nll_per_dim: Option<f64>,
    pub normalized_mae: Option<f64>,
    pub per_step: PerStep,
}

impl MetricReport {
    /// Scores a sample forecast against `truth`. The naive normalization
    /// is left empty when the naive error is zero.
    pub fn compute(
        samples: &[Vec<f64>],
        point: &[f64],
        truth: &TimeSeries,
        train: &TimeSeries,
        nll_per_dim: Option<f64>,
    ) -> Result<Self> {
        let abs_error = abs_errors(point, truth)?;
        let mae = mean_present(&abs_error)?;
        let crps = crps(samples, truth)?;
        let normalized_mae = match normalized_mae(mae, train, truth) {
            Ok(v) => Some(v),
            Err(Error::DegenerateNaive) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            mae,
            crps_mean: crps.mean,
            nll_per_dim,
            normalized_mae,
            per_step: PerStep {
                crps: crps.per_step,
                abs_error,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::from_values(v.to_vec())
    }

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[1.0, 3.0], &ts(&[2.0, 2.0])).unwrap(), 1.0);
        assert_eq!(mae(&[5.0, 6.0], &ts(&[5.0, 6.0])).unwrap(), 0.0);
        assert_eq!(mae(&[1.0, 100.0], &ts(&[2.0, f64::NAN])).unwrap(), 1.0);
        assert!(matches!(
            mae(&[1.0], &ts(&[1.0, 2.0])),
            Err(Error::LengthMismatch { expected: 2, actual: 1 })
        ));
        assert!(mae(&[1.0], &ts(&[f64::NAN])).is_err());
    }

    #[test]
    fn crps_examples() {
        assert_eq!(crps_sample(&[0.0, 1.0], 0.0).unwrap(), 0.25);
        assert_eq!(crps_sample(&[3.0], 1.5).unwrap(), 1.5);
        assert_eq!(crps_sample(&[2.0, 2.0, 2.0], 2.0).unwrap(), 0.0);
        assert!(crps_sample(&[], 0.0).is_err());
        let c = crps(&[vec![1.0, 5.0], vec![3.0, 5.0]], &ts(&[2.0, f64::NAN])).unwrap();
        assert_eq!(c.per_step[1], None);
        assert_eq!(c.mean, c.per_step[0].unwrap());
    }

    #[test]
    fn wasserstein_examples() {
        assert_eq!(wasserstein1(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(wasserstein1(&[3.0, 1.0, 2.0], &[2.0, 3.0, 1.0]).unwrap(), 0.0);
        // Point mass at 0 against {0, 2}: |F_a - F_b| = 1/2 on [0, 2).
        assert!((wasserstein1(&[0.0], &[0.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(wasserstein1(&[], &[1.0]).is_err());
    }

    #[test]
    fn normalization_examples() {
        let train = ts(&[0.0, 2.0]);
        let truth = ts(&[2.0, 4.0]);
        let m = mae(&[2.0, 2.0], &truth).unwrap();
        assert_eq!(m, 1.0);
        assert_eq!(normalized_mae(m, &train, &truth).unwrap(), 1.0);
        assert_eq!(normalized_mae(0.0, &train, &truth).unwrap(), 0.0);
        assert!(matches!(
            normalized_mae(1.0, &ts(&[3.0]), &ts(&[3.0, 3.0])),
            Err(Error::DegenerateNaive)
        ));
        assert_eq!(normalize_by_lowest_baseline(2.0, &[4.0, 1.0, 8.0]).unwrap(), 2.0);
    }

    #[test]
    fn report_for_naive_forecast() {
        let train = ts(&[1.0, 2.0]);
        let truth = ts(&[3.0, 4.0]);
        let r = MetricReport::compute(&[vec![2.0, 2.0]], &[2.0, 2.0], &truth, &train, None).unwrap();
        assert_eq!(r.mae, 1.5);
        assert_eq!(r.crps_mean, 1.5);
        assert_eq!(r.normalized_mae, Some(1.0));
        assert_eq!(r.per_step.crps.len(), 2);
    }

    #[test]
    fn aggregate_reports_stderr() {
        let a = aggregate(&[1.0, 3.0]).unwrap();
        assert_eq!(a.mean, 2.0);
        assert!((a.stderr - 1.0).abs() < 1e-12);
        assert_eq!(a.count, 2);
    }

    fn small_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 1..8)
    }

    proptest! {
        #[test]
        fn mae_is_translation_invariant(
            pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..20),
            c in -1e3f64..1e3,
        ) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let shifted_a: Vec<f64> = a.iter().map(|x| x + c).collect();
            let shifted_b: Vec<f64> = b.iter().map(|x| x + c).collect();
            let m1 = mae(&a, &ts(&b)).unwrap();
            let m2 = mae(&shifted_a, &ts(&shifted_b)).unwrap();
            prop_assert!((m1 - m2).abs() < 1e-9);
        }

        #[test]
        fn single_sample_crps_is_abs_error(x in -1e6f64..1e6, y in -1e6f64..1e6) {
            prop_assert_eq!(crps_sample(&[x], y).unwrap(), (x - y).abs());
        }

        #[test]
        fn crps_nonnegative_and_zero_iff_all_equal(s in small_vec(), y in -10.0f64..10.0) {
            let c = crps_sample(&s, y).unwrap();
            prop_assert!(c >= 0.0);
            prop_assert_eq!(crps_sample(&vec![y; s.len()], y).unwrap(), 0.0);
            if s.iter().any(|x| *x != y) {
                prop_assert!(c > 0.0);
            }
        }

        #[test]
        fn wasserstein_is_a_metric(
            triple in (1usize..10).prop_flat_map(|n| (
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
            )),
        ) {
            let (a, b, c) = triple;
            let ab = wasserstein1(&a, &b).unwrap();
            prop_assert_eq!(ab, wasserstein1(&b, &a).unwrap());
            prop_assert_eq!(wasserstein1(&a, &a).unwrap(), 0.0);
            let ac = wasserstein1(&a, &c).unwrap();
            let cb = wasserstein1(&c, &b).unwrap();
            prop_assert!(ab <= ac + cb + 1e-12);
        }

        #[test]
        fn unequal_sizes_match_replicated_equal_sizes(a in small_vec(), b in small_vec()) {
            // Repeating each sample of a to length |a|·|b| leaves its
            // distribution unchanged.
            let rep_a: Vec<f64> = a.iter().flat_map(|x| std::iter::repeat_n(*x, b.len())).collect();
            let rep_b: Vec<f64> = b.iter().flat_map(|x| std::iter::repeat_n(*x, a.len())).collect();
            let direct = wasserstein1(&a, &b).unwrap();
            let replicated = wasserstein1(&rep_a, &rep_b).unwrap();
            prop_assert!((direct - replicated).abs() < 1e-9);
        }

        #[test]
        fn masking_a_step_leaves_others_unchanged(
            rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..6),
            truth in prop::collection::vec(-5.0f64..5.0, 3),
            masked in 0usize..3,
        ) {
            let full = crps(&rows, &ts(&truth)).unwrap();
            let mut holed = truth.clone();
            holed[masked] = f64::NAN;
            let part = crps(&rows, &ts(&holed)).unwrap();
            for t in 0..3 {
                if t == masked {
                    prop_assert_eq!(part.per_step[t], None);
                } else {
                    prop_assert_eq!(part.per_step[t], full.per_step[t]);
                }
            }
        }
    }
}
