//! Small numeric helpers shared across modules.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased (n - 1) sample variance; zero for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Moment skewness `g1 = m3 / m2^(3/2)`; zero when the sample has no spread.
pub fn skewness(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    let (m2, m3) = xs.iter().fold((0.0, 0.0), |(a, b), x| {
        let d = x - m;
        (a + d * d, b + d * d * d)
    });
    let (m2, m3) = (m2 / n, m3 / n);
    let scale = xs.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if m2 <= (1e-14 * scale).powi(2) {
        return 0.0;
    }
    m3 / m2.powf(1.5)
}

/// Linear-interpolation quantile (Hyndman-Fan type 7) of an unsorted sample.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

/// Draw from Inverse-Gamma(shape, scale) with density proportional to
/// `x^(-shape-1) exp(-scale / x)`.
pub fn inverse_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, scale: f64) -> Option<f64> {
    if !(shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()) {
        return None;
    }
    let g = Gamma::new(shape, 1.0 / scale).ok()?.sample(rng);
    let x = 1.0 / g;
    x.is_finite().then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_interpolates() {
        let xs = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
        assert!((quantile(&xs, 0.5) - 2.5).abs() < 1e-15);
        assert_eq!(quantile(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn skewness_of_symmetric_and_constant() {
        assert!(skewness(&[-1.0, 0.0, 1.0, -1.0, 0.0, 1.0]).abs() < 1e-15);
        assert_eq!(skewness(&[3.0; 12]), 0.0);
        // {0, 0, 0, 3}: m = .75, m2 = 1.6875, m3 = 2.53125 -> 2/sqrt(3)
        assert!((skewness(&[0.0, 0.0, 0.0, 3.0]) - 1.154_700_538_379_251_5).abs() < 1e-12);
    }
}
