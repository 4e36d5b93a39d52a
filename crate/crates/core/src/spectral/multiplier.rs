use std::fmt;
use std::sync::Arc;

use super::field::SpectralField;
use crate::scalar::Scalar;

/// Radial Fourier multiplier `k ↦ m(|ξ_k|)` with `m ≥ 0`.
#[derive(Clone)]
pub struct MultiplierSymbol<T: Scalar> {
    name: String,
    symbol: Arc<dyn Fn(T) -> T + Send + Sync>,
}

impl<T: Scalar> MultiplierSymbol<T> {
    pub fn new(name: impl Into<String>, symbol: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            symbol: Arc::new(symbol),
        }
    }

    pub fn identity() -> Self {
        Self::new("1", |_| T::one())
    }

    /// `|D|`, the half-space Dirichlet-to-Neumann symbol.
    pub fn abs_d() -> Self {
        Self::new("|D|", |xi: T| xi)
    }

    /// `|D| tanh(a|D|)`, the symbol of a flat strip of depth `a`.
    pub fn abs_d_tanh(depth: T) -> Self {
        Self::new(format!("|D|tanh({depth}|D|)"), move |xi: T| {
            xi * (depth * xi).tanh()
        })
    }

    /// `|D| + λ`, handy for implicit solves.
    pub fn shifted_abs_d(dt: T) -> Self {
        Self::new(format!("1+{dt}|D|"), move |xi: T| T::one() + dt * xi)
    }

    #[inline]
    pub fn eval(&self, xi: T) -> T {
        (self.symbol)(xi.abs())
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl<T: Scalar> fmt::Debug for MultiplierSymbol<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("MultiplierSymbol").field(&self.name).finish()
    }
}

/// Multiplies every coefficient of `g` by `m(|ξ_k|)`.
pub fn apply_multiplier<T: Scalar>(
    g: &SpectralField<T>,
    m: &MultiplierSymbol<T>,
) -> SpectralField<T> {
    let grid = g.grid();
    let coeffs: Vec<_> = g
        .coefficients()
        .iter()
        .enumerate()
        .map(|(k, c)| c * m.eval(grid.frequency(k)))
        .collect();
    SpectralField::from_coefficients(grid, &coeffs).expect("same grid")
}

/// Divides every coefficient by `m(|ξ_k|)`; `m` must not vanish on the grid.
pub fn apply_inverse_multiplier<T: Scalar>(
    g: &SpectralField<T>,
    m: &MultiplierSymbol<T>,
) -> SpectralField<T> {
    let grid = g.grid();
    let coeffs: Vec<_> = g
        .coefficients()
        .iter()
        .enumerate()
        .map(|(k, c)| c / m.eval(grid.frequency(k)))
        .collect();
    SpectralField::from_coefficients(grid, &coeffs).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::PeriodicGrid;
    use crate::spectral::norms::seminorm_hs;
    use proptest::prelude::*;

    #[test]
    fn abs_d_on_cosine_and_constant() {
        let grid = PeriodicGrid::<f64>::torus(32).unwrap();
        let c = SpectralField::from_fn(&grid, |x| x.cos());
        let out = apply_multiplier(&c, &MultiplierSymbol::abs_d());
        assert!(out.max_abs_diff(&c).unwrap() < 1e-14);
        let k = SpectralField::constant(&grid, 2.5);
        assert!(apply_multiplier(&k, &MultiplierSymbol::abs_d()).sup_norm() < 1e-14);
    }

    #[test]
    fn tanh_symbol_on_cosine() {
        let grid = PeriodicGrid::<f64>::torus(32).unwrap();
        let c = SpectralField::from_fn(&grid, |x| x.cos());
        let out = apply_multiplier(&c, &MultiplierSymbol::abs_d_tanh(1.0));
        let expected = c.scaled(0.761_594_155_955_764_9);
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn translation_commutes() {
        let grid = PeriodicGrid::<f64>::torus(32).unwrap();
        let f = SpectralField::from_fn(&grid, |x| (x.sin() * 2.0).exp());
        let mut shifted = f.values().to_vec();
        shifted.rotate_left(5);
        let fs = SpectralField::from_values(&grid, shifted).unwrap();
        let m = MultiplierSymbol::abs_d_tanh(0.7);
        let mut a = apply_multiplier(&f, &m).into_values();
        a.rotate_left(5);
        let b = apply_multiplier(&fs, &m);
        for (x, y) in a.iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn identity_and_quadratic_form(vals in proptest::collection::vec(-1.0f64..1.0, 32)) {
            let grid = PeriodicGrid::<f64>::torus(32).unwrap();
            let g = SpectralField::from_values(&grid, vals).unwrap();
            let id = apply_multiplier(&g, &MultiplierSymbol::identity());
            prop_assert!(id.max_abs_diff(&g).unwrap() <= 1e-12 * g.sup_norm().max(1e-300));
            let dg = apply_multiplier(&g, &MultiplierSymbol::abs_d());
            let lhs = dg.pairing(&g).unwrap();
            let rhs = seminorm_hs(&g, 0.5).powi(2);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300));
        }
    }
}
