//! Coercivity certificates for the DN quadratic form, the convex pairing and
//! the `L^p` pairing, plus Rayleigh-quotient estimates of the best constant.
//!
//! The dimensional constant in front of the structural factor is not known in
//! closed form. It is calibrated once per depth kind on flat geometries and
//! reported next to every certificate.

mod convex;
mod lp;
mod sharp;
mod sweep;

pub use convex::{
    convex_certify, psi_from_phi, ConvexPair, ConvexReport, PsiTable, PSI_TABLE_SIZE,
};
pub use lp::{lp_certify, poincare_quotient, LpReport};
pub use sharp::{sharp_constant, SharpOptions, SharpResult};
pub use sweep::{draw_seed, random_data, random_geometry, run_sweep, GeometryFamily};

use serde::{Deserialize, Serialize};

use crate::dno::DnOperator;
use crate::domain::{BoundaryFn, DepthKind, Geometry, HalfSpaceGeometry, StripGeometry};
use crate::elliptic::{dirichlet_energy, dn_trace};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{boundary_seminorm, PeriodicGrid, SpectralField};

/// Largest strip depth in the calibration family.
pub const CALIBRATION_MAX_DEPTH: f64 = 10.0;
/// Number of depths sampled in the calibration family.
pub const CALIBRATION_DEPTHS: usize = 16;

/// Calibrated constants, one per depth kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub finite: f64,
    pub infinite: f64,
    /// Smallest strip depth of the finite-depth family.
    pub h_min: f64,
}

impl Calibration {
    pub fn for_kind(&self, kind: DepthKind) -> f64 {
        match kind {
            DepthKind::Finite => self.finite,
            DepthKind::Truncated => self.infinite,
        }
    }
}

/// Smallest ratio `⟨G g, g⟩ / (factor · ‖g‖²)` over every Fourier mode of a
/// flat geometry. Flat operators are diagonal in the modes, so this is the
/// minimum over the whole zero-mean subspace.
fn flat_min_ratio<T: Scalar>(geom: Geometry<T>, nz: usize) -> Result<f64> {
    let factor = geom.structural_factor().to64();
    let op = DnOperator::new(geom, nz)?;
    let grid = op.system().grid().clone();
    let mut min = f64::INFINITY;
    for k in 1..=grid.nyquist() {
        let g = SpectralField::from_fn(&grid, |x| {
            (T::from_usize_lossy(k) * x * T::TAU() / grid.period()).cos()
        });
        let pairing = op.apply(&g)?.pairing(&g)?.to64();
        let semi = boundary_seminorm(&g).to64();
        min = min.min(pairing / (semi * semi) / factor);
    }
    Ok(min)
}

/// Calibrates both constants at the resolution that will be certified.
///
/// Finite depth: minimum over flat strips of depth `a ∈ [h_min, 10]`
/// (log-spaced). Truncated half-space: the flat half-space of depth `depth`.
pub fn calibrate<T: Scalar>(
    grid: &PeriodicGrid<T>,
    nz: usize,
    h_min: T,
    depth: T,
) -> Result<Calibration> {
    if !(h_min > T::zero()) || h_min.to64() > CALIBRATION_MAX_DEPTH {
        return Err(Error::InvalidParameter(format!(
            "calibration needs 0 < h_min <= {CALIBRATION_MAX_DEPTH}, got {h_min}"
        )));
    }
    let lo = h_min.to64();
    let mut finite = f64::INFINITY;
    for i in 0..CALIBRATION_DEPTHS {
        let s = i as f64 / (CALIBRATION_DEPTHS - 1) as f64;
        let a = lo * (CALIBRATION_MAX_DEPTH / lo).powf(s);
        let geom = Geometry::Strip(StripGeometry::flat(grid, T::lit(a))?);
        finite = finite.min(flat_min_ratio(geom, nz)?);
    }
    let flat = Geometry::HalfSpace(HalfSpaceGeometry::new(
        BoundaryFn::flat(grid, T::zero()),
        depth,
    )?);
    let infinite = flat_min_ratio(flat, nz)?;
    Ok(Calibration {
        finite,
        infinite,
        h_min: lo,
    })
}

/// Measured DN pairing against the calibrated lower bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub geometry: String,
    pub seed: Option<u64>,
    /// `⟨G g, g⟩` from the boundary trace.
    pub pairing: f64,
    /// The same quantity as the Dirichlet energy of the extension.
    pub pairing_volume: f64,
    pub seminorm2: f64,
    pub ratio: f64,
    pub structural_factor: f64,
    #[serde(rename = "C_cal")]
    pub c_cal: f64,
    /// `C_cal × structural_factor`.
    pub bound: f64,
    pub pass: bool,
}

impl CoercivityReport {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

pub fn certify<T: Scalar>(
    op: &DnOperator<T>,
    g: &SpectralField<T>,
    c_cal: f64,
) -> Result<CoercivityReport> {
    if g.is_constant() {
        return Err(Error::ConstantInput);
    }
    let sol = op.solve(g, None)?;
    let pairing = dn_trace(&sol).pairing(g)?.to64();
    let pairing_volume = dirichlet_energy(&sol).to64();
    let semi = boundary_seminorm(g).to64();
    let seminorm2 = semi * semi;
    let ratio = pairing / seminorm2;
    let structural_factor = op.geometry().structural_factor().to64();
    let bound = c_cal * structural_factor;
    Ok(CoercivityReport {
        geometry: op.geometry().describe(),
        seed: None,
        pairing,
        pairing_volume,
        seminorm2,
        ratio,
        structural_factor,
        c_cal,
        bound,
        pass: ratio >= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(n: usize) -> PeriodicGrid<f64> {
        PeriodicGrid::torus(n).unwrap()
    }

    #[test]
    fn calibration_values() {
        let grid = torus(32);
        let cal = calibrate(&grid, 64, 0.5, 8.0).unwrap();
        // tanh(a)(1 + a²)/a is smallest at the shallow end
        let expected = 0.5f64.tanh() * 1.25 / 0.5;
        assert!((cal.finite - expected).abs() < 1e-4, "{}", cal.finite);
        assert!((cal.infinite - 1.0).abs() < 1e-6, "{}", cal.infinite);
    }

    #[test]
    fn flat_certificates() {
        let grid = torus(32);
        let g = SpectralField::from_fn(&grid, |x| x.cos());
        let op = DnOperator::half_space(BoundaryFn::flat(&grid, 0.0), 10.0, 64).unwrap();
        let rep = certify(&op, &g, 1.0).unwrap();
        assert!((rep.ratio - 1.0).abs() < 1e-8);
        assert!((rep.pairing - rep.pairing_volume).abs() <= 1e-10 * rep.pairing);

        let op = DnOperator::strip(
            BoundaryFn::flat(&grid, 0.0),
            BoundaryFn::flat(&grid, -1.0),
            128,
        )
        .unwrap();
        let rep = certify(&op, &g, 1.0).unwrap();
        assert!((rep.ratio - 1f64.tanh()).abs() < 1e-5);
        assert!(matches!(
            certify(&op, &SpectralField::constant(&grid, 2.0), 1.0),
            Err(Error::ConstantInput)
        ));
    }

    #[test]
    fn bilinear_scaling() {
        let grid = torus(32);
        let top = BoundaryFn::new(SpectralField::from_fn(&grid, |x| 0.3 * x.cos()));
        let op = DnOperator::half_space(top, 8.0, 32).unwrap();
        let g = SpectralField::from_fn(&grid, |x| x.sin() + 0.2 * (3.0 * x).cos());
        let a = certify(&op, &g, 1.0).unwrap();
        let b = certify(&op, &g.scaled(-3.0), 1.0).unwrap();
        assert!((b.pairing - 9.0 * a.pairing).abs() <= 1e-10 * b.pairing);
        assert!((a.ratio - b.ratio).abs() <= 1e-10);
    }

    #[test]
    fn report_json_fields() {
        let rep = CoercivityReport {
            geometry: "flat".into(),
            seed: Some(7),
            pairing: 1.0,
            pairing_volume: 1.0,
            seminorm2: 1.0,
            ratio: 1.0,
            structural_factor: 1.0,
            c_cal: 1.0,
            bound: 1.0,
            pass: true,
        };
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        for key in [
            "geometry",
            "seed",
            "pairing",
            "seminorm2",
            "ratio",
            "structural_factor",
            "C_cal",
            "pass",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
