//! Seeded generators for boundaries and boundary data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{PeriodicGrid, SpectralField};

/// Highest mode used by the random generators.
pub const RANDOM_MAX_MODE: usize = 16;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Zero-mean trigonometric polynomial with modes `1..=kmax` whose cosine and
/// sine amplitudes are uniform on `[-1, 1]` times `k^{-decay}`.
pub fn random_trig<T: Scalar, R: Rng>(
    grid: &PeriodicGrid<T>,
    rng: &mut R,
    kmax: usize,
    decay: f64,
) -> SpectralField<T> {
    let kmax = kmax.min(grid.len() / 2 - 1).max(1);
    let terms: Vec<(T, T, T)> = (1..=kmax)
        .map(|k| {
            let w = (k as f64).powf(-decay);
            let a = rng.gen_range(-1.0..=1.0) * w;
            let b = rng.gen_range(-1.0..=1.0) * w;
            (T::lit(k as f64), T::lit(a), T::lit(b))
        })
        .collect();
    SpectralField::from_fn(grid, |x| {
        terms.iter().fold(T::zero(), |s, &(k, a, b)| {
            s + a * (k * x).cos() + b * (k * x).sin()
        })
    })
}

/// Random Lipschitz boundary: truncated Fourier series with `|k|^{-2}` decay,
/// rescaled so that `max |f'|` equals `lipschitz`.
pub fn random_lipschitz<T: Scalar>(
    grid: &PeriodicGrid<T>,
    seed: u64,
    lipschitz: T,
) -> Result<SpectralField<T>> {
    if !(lipschitz >= T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "Lipschitz target must be nonnegative, got {lipschitz}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let kmax = RANDOM_MAX_MODE.min(grid.len() / 4);
    let f = random_trig(grid, &mut rng, kmax, 2.0);
    let slope = f
        .fine_derivative()
        .iter()
        .fold(T::zero(), |m, v| m.max(v.abs()));
    if slope == T::zero() || lipschitz == T::zero() {
        return Ok(SpectralField::zeros(grid));
    }
    Ok(f.scaled(lipschitz / slope))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BoundaryFn;

    #[test]
    fn lipschitz_target_is_met() {
        let g = PeriodicGrid::<f64>::torus(128).unwrap();
        let f = random_lipschitz(&g, 11, 0.7).unwrap();
        assert!((BoundaryFn::new(f.clone()).lipschitz() - 0.7).abs() < 1e-12);
        assert!(f.mean().abs() < 1e-14);
    }

    #[test]
    fn seeds_are_deterministic() {
        let g = PeriodicGrid::<f64>::torus(64).unwrap();
        let a = random_lipschitz(&g, 3, 1.0).unwrap();
        let b = random_lipschitz(&g, 3, 1.0).unwrap();
        let c = random_lipschitz(&g, 4, 1.0).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
    }
}
