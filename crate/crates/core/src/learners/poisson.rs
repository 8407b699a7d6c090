use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// Draws `k ~ Poisson(lambda)`; `lambda <= 0` always yields 0.
pub fn poisson_k<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda.is_nan() || lambda <= 0.0 {
        return 0;
    }
    if lambda < 30.0 {
        // Knuth: count uniforms until their product drops below e^-lambda.
        let limit = (-lambda).exp();
        let mut k = 0;
        let mut prod = rng.random::<f64>();
        while prod > limit {
            k += 1;
            prod *= rng.random::<f64>();
        }
        k
    } else {
        Poisson::new(lambda)
            .map(|d| d.sample(rng) as u64)
            .unwrap_or(0)
    }
}
