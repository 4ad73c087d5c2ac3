use super::rng::RngStream;
use crate::error::{Error, Result};

/// One draw from the zero-mean Laplace density `p(x) ∝ exp(-rate·|x|)`.
///
/// `rate` is the inverse diversity: `E|X| = 1/rate`, `Var X = 2/rate²`.
/// Sampling is by inverse CDF on a single open-interval uniform draw.
pub fn sample_laplace(rate: f64, rng: &mut RngStream) -> Result<f64> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::InvalidScale(rate));
    }
    let u = rng.uniform_open() - 0.5;
    Ok(-u.signum() * (1.0 - 2.0 * u.abs()).ln() / rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_rate() {
        let mut rng = RngStream::new(1);
        assert_eq!(sample_laplace(0.0, &mut rng), Err(Error::InvalidScale(0.0)));
        assert!(sample_laplace(-1.0, &mut rng).is_err());
        assert!(sample_laplace(f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn moments_match_analytic_values() {
        let mut rng = RngStream::new(2024);
        let rate = 0.5;
        let n = 1_000_000;
        let (mut sum, mut sum_abs, mut sum_sq) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = sample_laplace(rate, &mut rng).unwrap();
            sum += x;
            sum_abs += x.abs();
            sum_sq += x * x;
        }
        let n = n as f64;
        let mean = sum / n;
        let mean_abs = sum_abs / n;
        let var = sum_sq / n - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((mean_abs - 2.0).abs() < 0.02, "E|X| {mean_abs}");
        let var_expected = 2.0 / (rate * rate);
        assert!((var / var_expected - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn same_seed_same_draws() {
        let mut a = RngStream::new(9);
        let mut b = RngStream::new(9);
        for _ in 0..100 {
            assert_eq!(
                sample_laplace(1.3, &mut a).unwrap().to_bits(),
                sample_laplace(1.3, &mut b).unwrap().to_bits()
            );
        }
    }
}
