//! Periodic grids, Fourier transforms, multipliers and norms.

pub mod field;
pub mod grid;
pub mod multiplier;
pub mod norms;

pub use field::SpectralField;
pub use grid::PeriodicGrid;
pub use multiplier::{apply_inverse_multiplier, apply_multiplier, MultiplierSymbol};
pub use norms::{
    boundary_seminorm, holder_norm, lp_norm, norm_h_neg_half, norm_hs, norm_wt_half, seminorm_hs,
};
