//! Support-recovery scoring: which coefficients were declared nonzero, and
//! how that compares to the ground truth.

use ndarray::ArrayView1;

use crate::error::{Error, Result};
use crate::linalg::l2_norm;

/// Counts and rates for one recovered support against the truth.
///
/// A false alarm is a true-zero coefficient declared nonzero; a miss is a
/// true-nonzero coefficient declared zero. Rates are normalized by the
/// sizes of those two populations: `false_alarms / (n - K)` and
/// `misses / K`, with the degenerate denominators defined as rate zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportScore {
    pub false_alarms: usize,
    pub misses: usize,
    pub n: usize,
    pub k: usize,
    pub false_alarm_rate: f64,
    pub miss_rate: f64,
}

/// Indices whose magnitude exceeds `tau` times the largest magnitude.
/// The all-zero vector yields the empty set.
pub fn extract_support(x: &ArrayView1<f64>, tau: f64) -> Vec<usize> {
    let peak = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let cut = tau * peak;
    x.iter()
        .enumerate()
        .filter(|(_, &v)| v.abs() > cut)
        .map(|(i, _)| i)
        .collect()
}

/// Scores an estimated support against the true one over `[0, n)`.
/// Inputs are treated as sets; duplicates are ignored.
pub fn score_support(
    true_support: &[usize],
    est_support: &[usize],
    n: usize,
) -> Result<SupportScore> {
    let mut truth = vec![false; n];
    for &i in true_support {
        if i >= n {
            return Err(Error::invalid(format!(
                "true support index {i} out of range for n={n}"
            )));
        }
        truth[i] = true;
    }
    let mut estimated = vec![false; n];
    for &i in est_support {
        if i >= n {
            return Err(Error::invalid(format!(
                "estimated support index {i} out of range for n={n}"
            )));
        }
        estimated[i] = true;
    }
    let k = truth.iter().filter(|&&t| t).count();
    let false_alarms = (0..n).filter(|&i| estimated[i] && !truth[i]).count();
    let misses = (0..n).filter(|&i| truth[i] && !estimated[i]).count();
    let false_alarm_rate = if n > k {
        false_alarms as f64 / (n - k) as f64
    } else {
        0.0
    };
    let miss_rate = if k > 0 { misses as f64 / k as f64 } else { 0.0 };
    Ok(SupportScore {
        false_alarms,
        misses,
        n,
        k,
        false_alarm_rate,
        miss_rate,
    })
}

/// Euclidean distance between the two vectors after projecting both onto
/// the unit sphere; lies in `[0, 2]` and ignores positive scaling.
pub fn unit_sphere_error(x_true: &ArrayView1<f64>, x_est: &ArrayView1<f64>) -> Result<f64> {
    if x_true.len() != x_est.len() {
        return Err(Error::invalid(format!(
            "unit_sphere_error: lengths {} and {} differ",
            x_true.len(),
            x_est.len()
        )));
    }
    let nt = l2_norm(x_true);
    let ne = l2_norm(x_est);
    if nt == 0.0 || ne == 0.0 {
        return Err(Error::invalid("unit_sphere_error: zero vector input"));
    }
    let diff: f64 = x_true
        .iter()
        .zip(x_est.iter())
        .map(|(&a, &b)| {
            let d = a / nt - b / ne;
            d * d
        })
        .sum();
    Ok(diff.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};
    use proptest::prelude::*;

    #[test]
    fn extract_support_examples() {
        assert_eq!(extract_support(&array![0.0, 5.0, 0.0].view(), 0.01), vec![1]);
        assert_eq!(
            extract_support(&array![1.0, 1.0, 1.0].view(), 0.0),
            vec![0, 1, 2]
        );
        assert!(extract_support(&array![0.0, 0.0].view(), 0.5).is_empty());
    }

    #[test]
    fn score_support_examples() {
        let s = score_support(&[1, 3], &[1, 4], 5).unwrap();
        assert_eq!(s.false_alarms, 1);
        assert_eq!(s.misses, 1);
        assert!((s.false_alarm_rate - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.miss_rate - 0.5).abs() < 1e-15);

        let perfect = score_support(&[0, 2], &[0, 2], 4).unwrap();
        assert_eq!(perfect.false_alarm_rate, 0.0);
        assert_eq!(perfect.miss_rate, 0.0);

        let empty = score_support(&[0, 1, 2], &[], 6).unwrap();
        assert_eq!(empty.miss_rate, 1.0);
        assert_eq!(empty.false_alarm_rate, 0.0);
    }

    #[test]
    fn full_support_has_no_false_alarm_denominator() {
        let s = score_support(&[0, 1, 2], &[0, 1], 3).unwrap();
        assert_eq!(s.false_alarm_rate, 0.0);
        assert!((s.miss_rate - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_indices_are_rejected() {
        assert!(score_support(&[5], &[], 5).is_err());
        assert!(score_support(&[], &[9], 5).is_err());
    }

    #[test]
    fn sphere_error_examples() {
        let x = array![1.0, 2.0, -1.0];
        let scaled = x.mapv(|v| 3.5 * v);
        assert!(unit_sphere_error(&x.view(), &scaled.view()).unwrap() < 1e-15);

        let flipped = x.mapv(|v| -v);
        let d = unit_sphere_error(&x.view(), &flipped.view()).unwrap();
        assert!((d - 2.0).abs() < 1e-12);

        let e1 = array![1.0, 0.0];
        let e2 = array![0.0, 1.0];
        let d = unit_sphere_error(&e1.view(), &e2.view()).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sphere_error_rejects_zero_vectors() {
        let z = Array1::zeros(3);
        let x = array![1.0, 0.0, 0.0];
        assert!(unit_sphere_error(&z.view(), &x.view()).is_err());
        assert!(unit_sphere_error(&x.view(), &z.view()).is_err());
    }

    proptest! {
        #[test]
        fn extraction_ignores_positive_scale(
            values in proptest::collection::vec(-5.0f64..5.0, 1..20),
            scale in 1e-3f64..1e3,
            tau in 0.0f64..0.5,
        ) {
            let x = Array1::from_vec(values);
            let scaled = x.mapv(|v| v * scale);
            prop_assert_eq!(
                extract_support(&x.view(), tau),
                extract_support(&scaled.view(), tau)
            );
        }

        #[test]
        fn sphere_error_is_symmetric_and_scale_free(
            values in proptest::collection::vec(-5.0f64..5.0, 2..10),
            shift in 1usize..5,
            scale in 1e-2f64..1e2,
        ) {
            let mut v2 = values.clone();
            v2.rotate_left(shift % values.len());
            v2[0] += 1.0; // keep it nonzero and distinct
            let a = Array1::from_vec(values);
            let b = Array1::from_vec(v2);
            prop_assume!(a.iter().any(|&v| v != 0.0) && b.iter().any(|&v| v != 0.0));
            let ab = unit_sphere_error(&a.view(), &b.view()).unwrap();
            let ba = unit_sphere_error(&b.view(), &a.view()).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            let scaled = unit_sphere_error(&a.mapv(|v| v * scale).view(), &b.view()).unwrap();
            prop_assert!((ab - scaled).abs() < 1e-9);
            prop_assert!((0.0..=2.0 + 1e-12).contains(&ab));
        }

        #[test]
        fn rates_stay_in_unit_interval(
            n in 1usize..30,
            seed in 0u64..500,
        ) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            use rand::{Rng, SeedableRng};
            let truth: Vec<usize> = (0..n).filter(|_| rng.random::<bool>()).collect();
            let est: Vec<usize> = (0..n).filter(|_| rng.random::<bool>()).collect();
            let s = score_support(&truth, &est, n).unwrap();
            prop_assert!((0.0..=1.0).contains(&s.false_alarm_rate));
            prop_assert!((0.0..=1.0).contains(&s.miss_rate));
        }
    }
}
