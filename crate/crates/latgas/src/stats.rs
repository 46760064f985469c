//! Small numeric helpers: compensated summation, batch-means errors,
//! integrated autocorrelation time.

/// Kahan–Babuška compensated accumulator. Keeps long sums (e.g. 2^24
/// enumeration weights) accurate to a few ulps regardless of term count.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Number of batches used by default for batch-means error bars.
pub const DEFAULT_BATCHES: usize = 64;

/// Mean and batch-means standard error of a series.
///
/// The series is split into `min(max_batches, len)` equal batches (any
/// remainder is folded into the mean but not the error estimate); the
/// standard error is the sample standard deviation of batch means divided by
/// sqrt(#batches). With one observation the error is reported as 0.
pub fn batch_means(values: &[f64], max_batches: usize) -> (f64, f64) {
    assert!(!values.is_empty(), "batch_means needs at least one value");
    let mut total = KahanSum::new();
    for &v in values {
        total.add(v);
    }
    let mean = total.value() / values.len() as f64;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let n_batches = max_batches.clamp(2, values.len());
    let batch_len = values.len() / n_batches;
    let mut batch_sumsq = 0.0;
    for b in 0..n_batches {
        let chunk = &values[b * batch_len..(b + 1) * batch_len];
        let bm: f64 = chunk.iter().sum::<f64>() / batch_len as f64;
        batch_sumsq += (bm - mean) * (bm - mean);
    }
    let var_of_mean = batch_sumsq / (n_batches as f64 * (n_batches as f64 - 1.0));
    (mean, var_of_mean.sqrt())
}

/// Integrated autocorrelation time of a series, in units of the series
/// spacing, via the standard self-consistent window (sum rho(t) until the
/// window exceeds 6x the running estimate). Clamped below at 0.5, the value
/// of an uncorrelated series.
pub fn integrated_autocorr_time(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 0.5;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let c0: f64 = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return 0.5;
    }
    let mut tau = 0.5;
    for t in 1..n / 2 {
        let mut ct = 0.0;
        for i in 0..n - t {
            ct += (series[i] - mean) * (series[i + t] - mean);
        }
        ct /= (n - t) as f64;
        tau += ct / c0;
        if (t as f64) >= 6.0 * tau {
            break;
        }
    }
    tau.max(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut s = KahanSum::new();
        s.add(1.0e16);
        for _ in 0..10_000 {
            s.add(1.0);
        }
        s.add(-1.0e16);
        assert_relative_eq!(s.value(), 10_000.0, max_relative = 1e-12);
    }

    #[test]
    fn batch_means_of_constant_series() {
        let v = vec![3.0; 128];
        let (mean, se) = batch_means(&v, 64);
        assert_relative_eq!(mean, 3.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn batch_means_matches_plain_standard_error_for_iid() {
        // Deterministic pseudo-random series; with batch length 1 the batch
        // means estimator reduces to the plain standard error of the mean.
        let v: Vec<f64> = (0..256).map(|i| ((i * 2654435761_u64 as usize) % 1000) as f64).collect();
        let (mean, se) = batch_means(&v, 256);
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0);
        assert_relative_eq!(mean, m, max_relative = 1e-13);
        assert_relative_eq!(se, (var / v.len() as f64).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn autocorr_time_of_uncorrelated_series_is_half() {
        let v: Vec<f64> = (0..4096)
            .map(|i| ((i as u64).wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407) >> 33) as f64)
            .collect();
        let tau = integrated_autocorr_time(&v);
        assert!(tau > 0.3 && tau < 0.8, "tau = {tau}");
    }

    #[test]
    fn autocorr_time_grows_for_persistent_series() {
        // AR(1)-like series with strong persistence.
        let mut v = Vec::with_capacity(8192);
        let mut x = 0.0_f64;
        let mut state = 12345_u64;
        for _ in 0..8192 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let noise = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            x = 0.95 * x + noise;
            v.push(x);
        }
        let tau = integrated_autocorr_time(&v);
        // Exact tau for AR(1) with rho = 0.95 is (1+rho)/(2(1-rho)) = 19.5.
        assert!(tau > 8.0, "tau = {tau}");
    }
}
