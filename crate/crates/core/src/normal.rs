//! Standard-normal CDF and the folded-normal mean.

use statrs::function::erf::erfc;

/// `Φ(x)` through the complementary error function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `E|X|` for `X ~ N(mean, sd²)`. Degenerates to `|mean|` when `sd = 0`.
pub fn folded_normal_mean(mean: f64, sd: f64) -> f64 {
    if sd <= 0.0 {
        return mean.abs();
    }
    let z = mean / sd;
    sd * (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * z * z).exp()
        + mean * (2.0 * std_normal_cdf(z) - 1.0)
}
