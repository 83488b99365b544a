use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// One-sided paired t-test of `mean(a − b) < 0`. Returns the p-value.
pub fn paired_t_less(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len();
    if n < 2 {
        return 1.0;
    }
    let (m, v) = (mean(&d), variance(&d));
    if v == 0.0 {
        return if m < 0.0 { 0.0 } else { 1.0 };
    }
    let t = m / (v / n as f64).sqrt();
    StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("degrees of freedom").cdf(t)
}

/// Standard error of the mean.
pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len().max(1) as f64).sqrt()
}
