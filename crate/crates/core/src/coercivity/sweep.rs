use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryFn, Geometry, HalfSpaceGeometry, StripGeometry};
use crate::error::Result;
use crate::random::{random_lipschitz, random_trig, seeded_rng, RANDOM_MAX_MODE};
use crate::scalar::Scalar;
use crate::spectral::{PeriodicGrid, SpectralField};

/// Families of random geometries used by the certification sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometryFamily {
    /// Truncated half-space with a random top of slope at most `max_lipschitz`.
    HalfSpace { depth: f64, max_lipschitz: f64 },
    /// Strip with random top and bottom, separated by at least `h_min`.
    Strip { h_min: f64, max_lipschitz: f64 },
}

/// Draw `index` of a sweep seeded with `seed`.
pub fn draw_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random geometry of the family. Slopes are uniform in
/// `[0.1, 1] × max_lipschitz`; strip depths add a uniform `[0, 1]` margin to
/// `h_min`.
pub fn random_geometry<T: Scalar>(
    family: GeometryFamily,
    grid: &PeriodicGrid<T>,
    seed: u64,
) -> Result<Geometry<T>> {
    let mut rng = seeded_rng(seed);
    match family {
        GeometryFamily::HalfSpace {
            depth,
            max_lipschitz,
        } => {
            let lip = max_lipschitz * rng.gen_range(0.1..=1.0);
            let f = random_lipschitz(grid, rng.gen(), T::lit(lip))?;
            Ok(Geometry::HalfSpace(HalfSpaceGeometry::new(
                BoundaryFn::new(f),
                T::lit(depth),
            )?))
        }
        GeometryFamily::Strip {
            h_min,
            max_lipschitz,
        } => {
            let lip_f = max_lipschitz * rng.gen_range(0.1..=1.0);
            let lip_b = max_lipschitz * rng.gen_range(0.1..=1.0);
            let top = BoundaryFn::new(random_lipschitz(grid, rng.gen(), T::lit(lip_f))?);
            let b0 = BoundaryFn::new(random_lipschitz(grid, rng.gen(), T::lit(lip_b))?);
            let overlap = top
                .fine_values()
                .iter()
                .zip(b0.fine_values())
                .chain(top.field().values().iter().zip(b0.field().values()))
                .fold(T::neg_infinity(), |m, (&f, &b)| m.max(b - f));
            let shift = overlap + T::lit(h_min + rng.gen_range(0.0..=1.0));
            let bottom = BoundaryFn::new(b0.field().shifted(-shift));
            Ok(Geometry::Strip(StripGeometry::with_min_separation(
                top,
                bottom,
                T::lit(h_min),
            )?))
        }
    }
}

/// Zero-mean random data: modes up to 16 with `1/k` amplitude decay.
pub fn random_data<T: Scalar>(grid: &PeriodicGrid<T>, seed: u64) -> SpectralField<T> {
    let mut rng = seeded_rng(seed);
    let kmax = RANDOM_MAX_MODE.min(grid.len() / 4);
    random_trig(grid, &mut rng, kmax, 1.0)
}

/// Runs `f` on draws `0..count` in parallel, keeping draw order.
pub fn run_sweep<R, F>(seed: u64, count: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(u64, u64) -> Result<R> + Sync,
{
    (0..count as u64)
        .into_par_iter()
        .map(|i| f(i, draw_seed(seed, i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_respect_separation() {
        let grid = PeriodicGrid::<f64>::torus(64).unwrap();
        let family = GeometryFamily::Strip {
            h_min: 0.5,
            max_lipschitz: 1.0,
        };
        for s in 0..20 {
            let Geometry::Strip(strip) = random_geometry(family, &grid, s).unwrap() else {
                panic!("expected a strip")
            };
            assert!(strip.separation() >= 0.5);
            assert!(strip.top().lipschitz() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn draws_are_reproducible() {
        let grid = PeriodicGrid::<f64>::torus(32).unwrap();
        let a = random_data(&grid, draw_seed(7, 3));
        let b = random_data(&grid, draw_seed(7, 3));
        assert_eq!(a.values(), b.values());
        assert!(a.mean().abs() < 1e-15);
        assert_ne!(draw_seed(7, 3), draw_seed(7, 4));
        let sums = run_sweep(7, 50, |i, s| Ok(i + s % 3)).unwrap();
        let again = run_sweep(7, 50, |i, s| Ok(i + s % 3)).unwrap();
        assert_eq!(sums, again);
    }
}
