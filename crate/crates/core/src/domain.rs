//! Boundary data, domain geometry and the flattening change of variables.
//!
//! A strip `{b(x) < y < f(x)}` is mapped onto `(-1, 0)` in `z` through
//! `ρ(x, z) = (z + 1) f(x) - z b(x)`; a half-space `{y < f(x)}` is mapped onto
//! `(-L, 0)` through `ρ(x, z) = z + f(x)` and truncated at depth `L` with a
//! homogeneous Neumann condition. Harmonic functions pulled back by
//! `(x, z) ↦ (x, ρ)` solve `div(A ∇v) = 0` with
//!
//! ```text
//!     A = [ ρ_z        -ρ_x            ]
//!         [ -ρ_x   (1 + ρ_x²) / ρ_z    ]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::random_lipschitz;
use crate::scalar::Scalar;
use crate::spectral::{PeriodicGrid, SpectralField};

/// Default lower bound accepted for `min(f - b)`.
pub const DEFAULT_MIN_SEPARATION: f64 = 1e-6;

/// A Lipschitz graph sampled on a periodic grid.
#[derive(Clone, Debug)]
pub struct BoundaryFn<T: Scalar> {
    field: SpectralField<T>,
    fine_values: Vec<T>,
    fine_slope: Vec<T>,
    lipschitz: T,
}

impl<T: Scalar> BoundaryFn<T> {
    pub fn new(field: SpectralField<T>) -> Self {
        let fine_values = field.fine_values();
        let fine_slope = field.fine_derivative();
        let lipschitz = fine_slope.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        Self {
            field,
            fine_values,
            fine_slope,
            lipschitz,
        }
    }

    pub fn flat(grid: &PeriodicGrid<T>, level: T) -> Self {
        Self::new(SpectralField::constant(grid, level))
    }

    #[inline]
    pub fn field(&self) -> &SpectralField<T> {
        &self.field
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid<T> {
        self.field.grid()
    }

    /// `max |f'|`, measured on the dealiasing grid.
    #[inline]
    pub fn lipschitz(&self) -> T {
        self.lipschitz
    }

    pub fn sup_norm(&self) -> T {
        self.fine_values
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    #[inline]
    pub fn fine_values(&self) -> &[T] {
        &self.fine_values
    }

    #[inline]
    pub fn fine_slope(&self) -> &[T] {
        &self.fine_slope
    }

    pub fn is_flat(&self) -> bool {
        self.field.is_constant()
    }
}

/// Finite-depth domain `{b < y < f}`.
#[derive(Clone, Debug)]
pub struct StripGeometry<T: Scalar> {
    top: BoundaryFn<T>,
    bottom: BoundaryFn<T>,
    separation: T,
}

impl<T: Scalar> StripGeometry<T> {
    pub fn new(top: BoundaryFn<T>, bottom: BoundaryFn<T>) -> Result<Self> {
        Self::with_min_separation(top, bottom, T::lit(DEFAULT_MIN_SEPARATION))
    }

    /// The separation `h` is the grid minimum of `f - b`, never taken on trust.
    pub fn with_min_separation(
        top: BoundaryFn<T>,
        bottom: BoundaryFn<T>,
        h_min: T,
    ) -> Result<Self> {
        top.field().same_grid(bottom.field())?;
        let separation = top
            .fine_values()
            .iter()
            .zip(bottom.fine_values())
            .map(|(&f, &b)| f - b)
            .fold(T::infinity(), |m, d| m.min(d));
        let coarse_min = top
            .field()
            .values()
            .iter()
            .zip(bottom.field().values())
            .map(|(&f, &b)| f - b)
            .fold(T::infinity(), |m, d| m.min(d));
        let separation = separation.min(coarse_min);
        if !(separation >= h_min) {
            return Err(Error::SeparationViolation {
                min: separation.to64(),
                required: h_min.to64(),
            });
        }
        Ok(Self {
            top,
            bottom,
            separation,
        })
    }

    /// Flat strip `f = 0`, `b = -depth`.
    pub fn flat(grid: &PeriodicGrid<T>, depth: T) -> Result<Self> {
        Self::new(
            BoundaryFn::flat(grid, T::zero()),
            BoundaryFn::flat(grid, -depth),
        )
    }

    #[inline]
    pub fn top(&self) -> &BoundaryFn<T> {
        &self.top
    }

    #[inline]
    pub fn bottom(&self) -> &BoundaryFn<T> {
        &self.bottom
    }

    #[inline]
    pub fn separation(&self) -> T {
        self.separation
    }

    /// `‖f - b‖_{W^{1,∞}} = ‖f - b‖_∞ + ‖(f - b)'‖_∞`.
    pub fn thickness_w1inf(&self) -> T {
        let sup = self
            .top
            .fine_values()
            .iter()
            .zip(self.bottom.fine_values())
            .fold(T::zero(), |m, (&f, &b)| m.max((f - b).abs()));
        let slope = self
            .top
            .fine_slope()
            .iter()
            .zip(self.bottom.fine_slope())
            .fold(T::zero(), |m, (&f, &b)| m.max((f - b).abs()));
        sup + slope
    }
}

/// Half-space `{y < f}` truncated at depth `L` below `z = 0`.
#[derive(Clone, Debug)]
pub struct HalfSpaceGeometry<T: Scalar> {
    top: BoundaryFn<T>,
    depth: T,
}

impl<T: Scalar> HalfSpaceGeometry<T> {
    pub fn new(top: BoundaryFn<T>, depth: T) -> Result<Self> {
        if !(depth > T::zero()) || !depth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "truncation depth must be positive, got {depth}"
            )));
        }
        Ok(Self { top, depth })
    }

    pub fn flat(grid: &PeriodicGrid<T>, depth: T) -> Result<Self> {
        Self::new(BoundaryFn::flat(grid, T::zero()), depth)
    }

    #[inline]
    pub fn top(&self) -> &BoundaryFn<T> {
        &self.top
    }

    #[inline]
    pub fn depth(&self) -> T {
        self.depth
    }
}

#[derive(Clone, Debug)]
pub enum Geometry<T: Scalar> {
    Strip(StripGeometry<T>),
    HalfSpace(HalfSpaceGeometry<T>),
}

impl<T: Scalar> Geometry<T> {
    pub fn top(&self) -> &BoundaryFn<T> {
        match self {
            Geometry::Strip(s) => s.top(),
            Geometry::HalfSpace(h) => h.top(),
        }
    }

    pub fn grid(&self) -> &PeriodicGrid<T> {
        self.top().grid()
    }

    pub fn is_flat(&self) -> bool {
        match self {
            Geometry::Strip(s) => s.top().is_flat() && s.bottom().is_flat(),
            Geometry::HalfSpace(h) => h.top().is_flat(),
        }
    }

    /// Geometric factor of the coercivity constant, without the dimensional
    /// constant: `h / (1 + ‖f'‖²_∞ + ‖f - b‖²_{W^{1,∞}})` for strips and
    /// `1 / (1 + ‖f'‖_∞)` for half-spaces.
    pub fn structural_factor(&self) -> T {
        match self {
            Geometry::Strip(s) => {
                let lip = s.top().lipschitz();
                let w = s.thickness_w1inf();
                s.separation() / (T::one() + lip * lip + w * w)
            }
            Geometry::HalfSpace(h) => T::one() / (T::one() + h.top().lipschitz()),
        }
    }

    pub fn kind(&self) -> DepthKind {
        match self {
            Geometry::Strip(_) => DepthKind::Finite,
            Geometry::HalfSpace(_) => DepthKind::Truncated,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Geometry::Strip(s) => format!(
                "strip(h={:.6}, lip_f={:.6}, lip_b={:.6})",
                s.separation().to64(),
                s.top().lipschitz().to64(),
                s.bottom().lipschitz().to64()
            ),
            Geometry::HalfSpace(h) => format!(
                "half-space(L={}, lip_f={:.6})",
                h.depth().to64(),
                h.top().lipschitz().to64()
            ),
        }
    }

    pub fn flatten(&self, nz: usize) -> Result<FlattenedSystem<T>> {
        match self {
            Geometry::Strip(s) => build_flatten_finite(s, nz),
            Geometry::HalfSpace(h) => build_flatten_infinite(h, nz),
        }
    }
}

/// Lower bound `M = C_cal × structural factor` of the DN quadratic form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoercivityBound {
    pub structural_factor: f64,
    pub c_cal: f64,
    pub m: f64,
}

pub fn coercivity_bound_m<T: Scalar>(geom: &Geometry<T>, c_cal: f64) -> CoercivityBound {
    let structural_factor = geom.structural_factor().to64();
    CoercivityBound {
        structural_factor,
        c_cal,
        m: c_cal * structural_factor,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepthKind {
    /// `z ∈ (-1, 0)`, Neumann bottom from the physical bottom boundary.
    Finite,
    /// `z ∈ (-L, 0)`, Neumann at the truncation depth.
    Truncated,
}

/// Flattened coefficient field on a uniform `z` mesh of `nz` cells.
///
/// Coefficients are stored at cell midpoints on the 3/2-padded `x` grid,
/// element-major, which is where the stiffness form evaluates them.
#[derive(Clone, Debug)]
pub struct FlattenedSystem<T: Scalar> {
    grid: PeriodicGrid<T>,
    kind: DepthKind,
    nz: usize,
    extent: T,
    top: Vec<T>,
    bottom: Vec<T>,
    top_slope: Vec<T>,
    bottom_slope: Vec<T>,
    a11: Vec<T>,
    a12: Vec<T>,
    a22: Vec<T>,
}

fn coefficient_matrix<T: Scalar>(rho_z: T, rho_x: T) -> [[T; 2]; 2] {
    [
        [rho_z, -rho_x],
        [-rho_x, (T::one() + rho_x * rho_x) / rho_z],
    ]
}

/// Flattening of a strip: `ρ = (z + 1) f - z b` on `z ∈ (-1, 0)`.
pub fn build_flatten_finite<T: Scalar>(
    geom: &StripGeometry<T>,
    nz: usize,
) -> Result<FlattenedSystem<T>> {
    check_nz(nz)?;
    let grid = geom.top().grid().clone();
    let f = geom.top();
    let b = geom.bottom();
    let fine_thickness: Vec<T> = f
        .fine_values()
        .iter()
        .zip(b.fine_values())
        .map(|(&x, &y)| x - y)
        .collect();
    let min = fine_thickness.iter().fold(T::infinity(), |m, &d| m.min(d));
    if !(min > T::zero()) {
        return Err(Error::SeparationViolation {
            min: min.to64(),
            required: 0.0,
        });
    }
    let dz = T::one() / T::from_usize_lossy(nz);
    let m = grid.fine_len();
    let mut a11 = Vec::with_capacity(nz * m);
    let mut a12 = Vec::with_capacity(nz * m);
    let mut a22 = Vec::with_capacity(nz * m);
    for e in 0..nz {
        let zm = -T::one() + (T::from_usize_lossy(e) + T::lit(0.5)) * dz;
        for i in 0..m {
            let rho_z = fine_thickness[i];
            let rho_x = (zm + T::one()) * f.fine_slope()[i] - zm * b.fine_slope()[i];
            let a = coefficient_matrix(rho_z, rho_x);
            a11.push(a[0][0]);
            a12.push(a[0][1]);
            a22.push(a[1][1]);
        }
    }
    Ok(FlattenedSystem {
        kind: DepthKind::Finite,
        nz,
        extent: T::one(),
        top: f.field().values().to_vec(),
        bottom: b.field().values().to_vec(),
        top_slope: f.field().derivative().into_values(),
        bottom_slope: b.field().derivative().into_values(),
        grid,
        a11,
        a12,
        a22,
    })
}

/// Flattening of a truncated half-space: `ρ = z + f` on `z ∈ (-L, 0)`.
pub fn build_flatten_infinite<T: Scalar>(
    geom: &HalfSpaceGeometry<T>,
    nz: usize,
) -> Result<FlattenedSystem<T>> {
    check_nz(nz)?;
    let grid = geom.top().grid().clone();
    let f = geom.top();
    let m = grid.fine_len();
    let mut a11 = Vec::with_capacity(nz * m);
    let mut a12 = Vec::with_capacity(nz * m);
    let mut a22 = Vec::with_capacity(nz * m);
    for _ in 0..nz {
        for &slope in f.fine_slope() {
            let a = coefficient_matrix(T::one(), slope);
            a11.push(a[0][0]);
            a12.push(a[0][1]);
            a22.push(a[1][1]);
        }
    }
    let n = grid.len();
    Ok(FlattenedSystem {
        kind: DepthKind::Truncated,
        nz,
        extent: geom.depth(),
        top: f.field().values().to_vec(),
        bottom: vec![T::zero(); n],
        top_slope: f.field().derivative().into_values(),
        bottom_slope: vec![T::zero(); n],
        grid,
        a11,
        a12,
        a22,
    })
}

fn check_nz(nz: usize) -> Result<()> {
    if nz < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 cells in z, got {nz}"
        )));
    }
    Ok(())
}

impl<T: Scalar> FlattenedSystem<T> {
    #[inline]
    pub fn grid(&self) -> &PeriodicGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn kind(&self) -> DepthKind {
        self.kind
    }

    #[inline]
    pub fn nz(&self) -> usize {
        self.nz
    }

    /// Vertical extent of the reference strip: 1, or the truncation depth.
    #[inline]
    pub fn extent(&self) -> T {
        self.extent
    }

    #[inline]
    pub fn dz(&self) -> T {
        self.extent / T::from_usize_lossy(self.nz)
    }

    /// Node `j` sits at `z_j = -extent + j·dz`; node `nz` is the top.
    pub fn z_node(&self, j: usize) -> T {
        -self.extent + T::from_usize_lossy(j) * self.dz()
    }

    /// `ρ` at grid point `i`, node `j`.
    pub fn rho(&self, i: usize, j: usize) -> T {
        let z = self.z_node(j);
        match self.kind {
            DepthKind::Finite => (z + T::one()) * self.top[i] - z * self.bottom[i],
            DepthKind::Truncated => z + self.top[i],
        }
    }

    pub fn rho_z(&self, i: usize) -> T {
        match self.kind {
            DepthKind::Finite => self.top[i] - self.bottom[i],
            DepthKind::Truncated => T::one(),
        }
    }

    pub fn rho_x(&self, i: usize, j: usize) -> T {
        let z = self.z_node(j);
        match self.kind {
            DepthKind::Finite => (z + T::one()) * self.top_slope[i] - z * self.bottom_slope[i],
            DepthKind::Truncated => self.top_slope[i],
        }
    }

    /// Coefficient matrix at grid point `i`, node `j`.
    pub fn matrix_at_node(&self, i: usize, j: usize) -> [[T; 2]; 2] {
        coefficient_matrix(self.rho_z(i), self.rho_x(i, j))
    }

    /// Midpoint coefficients `(A11, A12, A22)` of cell `e` on the padded grid.
    pub fn cell_coefficients(&self, e: usize) -> (&[T], &[T], &[T]) {
        let m = self.grid.fine_len();
        let r = e * m..(e + 1) * m;
        (&self.a11[r.clone()], &self.a12[r.clone()], &self.a22[r])
    }

    /// x-averages of `A11` and `A22` per cell; `A12` averages to zero.
    pub fn averaged_coefficients(&self) -> Vec<(T, T)> {
        let m = T::from_usize_lossy(self.grid.fine_len());
        (0..self.nz)
            .map(|e| {
                let (a11, _, a22) = self.cell_coefficients(e);
                let s11 = a11.iter().fold(T::zero(), |s, &v| s + v);
                let s22 = a22.iter().fold(T::zero(), |s, &v| s + v);
                (s11 / m, s22 / m)
            })
            .collect()
    }
}

/// Named boundary presets accepted by configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundaryPreset {
    Flat {
        #[serde(default)]
        level: f64,
    },
    SingleMode {
        amplitude: f64,
        #[serde(default = "one_usize")]
        mode: usize,
        #[serde(default)]
        level: f64,
    },
    MultiMode {
        /// `(mode, cosine amplitude)` pairs.
        modes: Vec<(usize, f64)>,
        #[serde(default)]
        level: f64,
    },
    RandomLip {
        seed: u64,
        lipschitz: f64,
        #[serde(default)]
        level: f64,
    },
    Csv {
        path: String,
    },
}

fn one_usize() -> usize {
    1
}

impl BoundaryPreset {
    pub fn realize<T: Scalar>(&self, grid: &PeriodicGrid<T>) -> Result<SpectralField<T>> {
        match self {
            BoundaryPreset::Flat { level } => Ok(SpectralField::constant(grid, T::lit(*level))),
            BoundaryPreset::SingleMode {
                amplitude,
                mode,
                level,
            } => {
                let (a, k, c) = (T::lit(*amplitude), T::lit(*mode as f64), T::lit(*level));
                Ok(SpectralField::from_fn(grid, |x| c + a * (k * x).cos()))
            }
            BoundaryPreset::MultiMode { modes, level } => {
                let terms: Vec<(T, T)> = modes
                    .iter()
                    .map(|&(k, a)| (T::lit(k as f64), T::lit(a)))
                    .collect();
                let c = T::lit(*level);
                Ok(SpectralField::from_fn(grid, |x| {
                    terms.iter().fold(c, |s, &(k, a)| s + a * (k * x).cos())
                }))
            }
            BoundaryPreset::RandomLip {
                seed,
                lipschitz,
                level,
            } => Ok(random_lipschitz(grid, *seed, T::lit(*lipschitz))?.shifted(T::lit(*level))),
            BoundaryPreset::Csv { path } => read_boundary_csv(grid, Path::new(path)),
        }
    }
}

/// Reads `N` samples, one per line (or comma separated). A non-numeric first
/// line is treated as a header.
pub fn read_boundary_csv<T: Scalar>(
    grid: &PeriodicGrid<T>,
    path: &Path,
) -> Result<SpectralField<T>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    parse_boundary_csv(grid, &text)
}

pub fn parse_boundary_csv<T: Scalar>(
    grid: &PeriodicGrid<T>,
    text: &str,
) -> Result<SpectralField<T>> {
    let mut values = Vec::with_capacity(grid.len());
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        for tok in line.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match tok.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(T::lit(v)),
                Ok(_) => return Err(Error::Csv(format!("line {}: non-finite value", lineno + 1))),
                Err(_) if lineno == 0 && values.is_empty() => break,
                Err(_) => {
                    return Err(Error::Csv(format!(
                        "line {}: cannot parse {tok:?}",
                        lineno + 1
                    )))
                }
            }
        }
    }
    if values.len() != grid.len() {
        return Err(Error::Csv(format!(
            "expected {} samples, found {}",
            grid.len(),
            values.len()
        )));
    }
    SpectralField::from_values(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(n: usize) -> PeriodicGrid<f64> {
        PeriodicGrid::torus(n).unwrap()
    }

    #[test]
    fn flat_unit_strip_is_identity() {
        let g = torus(16);
        let s = StripGeometry::flat(&g, 1.0).unwrap();
        let sys = build_flatten_finite(&s, 8).unwrap();
        for j in 0..=8 {
            for i in 0..16 {
                let a = sys.matrix_at_node(i, j);
                assert!((a[0][0] - 1.0).abs() < 1e-15);
                assert!(a[0][1].abs() < 1e-15);
                assert!((a[1][1] - 1.0).abs() < 1e-15);
                assert!((sys.rho(i, j) - sys.z_node(j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn flat_strip_of_depth_a() {
        let g = torus(16);
        let a = 2.5;
        let sys = build_flatten_finite(&StripGeometry::flat(&g, a).unwrap(), 4).unwrap();
        let m = sys.matrix_at_node(3, 2);
        assert!((m[0][0] - a).abs() < 1e-14);
        assert!((m[1][1] - 1.0 / a).abs() < 1e-14);
        assert!(m[0][1].abs() < 1e-14);
    }

    #[test]
    fn cosine_top_matches_hand_formula() {
        let g = torus(32);
        let top = BoundaryFn::new(SpectralField::from_fn(&g, |x| 0.1 * x.cos()));
        let s = StripGeometry::new(top, BoundaryFn::flat(&g, -1.0)).unwrap();
        let sys = build_flatten_finite(&s, 10).unwrap();
        let dx = g.spacing();
        for (i, j) in [
            (0, 0),
            (3, 7),
            (5, 10),
            (11, 2),
            (17, 4),
            (20, 9),
            (25, 1),
            (29, 6),
            (31, 3),
            (8, 5),
        ] {
            let x = i as f64 * dx;
            let z = -1.0 + j as f64 / 10.0;
            let rho_z = 0.1 * x.cos() + 1.0;
            let rho_x = (z + 1.0) * (-0.1 * x.sin());
            let m = sys.matrix_at_node(i, j);
            assert!((m[0][0] - rho_z).abs() < 1e-12);
            assert!((m[0][1] + rho_x).abs() < 1e-12);
            assert!((m[1][1] - (1.0 + rho_x * rho_x) / rho_z).abs() < 1e-12);
            // unit determinant and positivity
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            assert!((det - 1.0).abs() < 1e-12);
            assert!(m[0][0] > 0.0 && m[1][1] > 0.0);
        }
        // ρ strictly increasing in z
        for i in 0..32 {
            for j in 0..10 {
                assert!(sys.rho(i, j + 1) > sys.rho(i, j));
            }
        }
    }

    #[test]
    fn half_space_slope_independent_of_depth() {
        let g = torus(32);
        let top = BoundaryFn::new(SpectralField::from_fn(&g, |x| x.cos()));
        let sys = build_flatten_infinite(&HalfSpaceGeometry::new(top, 6.0).unwrap(), 12).unwrap();
        for j in 0..=12 {
            for (i, x) in g.points().enumerate() {
                assert!((sys.rho_x(i, j) + x.sin()).abs() < 1e-12);
                assert_eq!(sys.rho_z(i), 1.0);
            }
        }
        assert!((sys.dz() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn separation_violation() {
        let g = torus(16);
        let top = BoundaryFn::new(SpectralField::from_fn(&g, |x| 0.5 * x.cos()));
        let bottom = BoundaryFn::flat(&g, -0.2);
        assert!(matches!(
            StripGeometry::new(top, bottom),
            Err(Error::SeparationViolation { .. })
        ));
    }

    #[test]
    fn structural_factors() {
        let g = torus(32);
        let strip = Geometry::Strip(StripGeometry::flat(&g, 1.0).unwrap());
        assert!((strip.structural_factor() - 0.5).abs() < 1e-14);
        let half = Geometry::HalfSpace(HalfSpaceGeometry::flat(&g, 8.0).unwrap());
        assert!((half.structural_factor() - 1.0).abs() < 1e-14);
        let sloped = BoundaryFn::new(SpectralField::from_fn(&g, |x| x.sin()));
        let half = Geometry::HalfSpace(HalfSpaceGeometry::new(sloped, 8.0).unwrap());
        assert!((half.structural_factor() - 0.5).abs() < 1e-12);
        let b = coercivity_bound_m(&half, 0.8);
        assert!((b.m - 0.4).abs() < 1e-12);
    }

    #[test]
    fn csv_parsing() {
        let g = torus(8);
        let text = "f\n0\n1\n2\n3\n4\n5\n6\n7\n";
        let f = parse_boundary_csv(&g, text).unwrap();
        assert_eq!(f.values()[7], 7.0);
        assert!(parse_boundary_csv(&g, "1,2,3").is_err());
        assert!(parse_boundary_csv(&g, "0\n1\nx\n").is_err());
    }

    #[test]
    fn presets_deserialize() {
        let p: BoundaryPreset =
            serde_json::from_str(r#"{"preset":"single-mode","amplitude":0.2,"mode":3}"#).unwrap();
        let f = p.realize(&torus(32)).unwrap();
        assert!((f.values()[0] - 0.2).abs() < 1e-15);
        let bad: std::result::Result<BoundaryPreset, _> =
            serde_json::from_str(r#"{"preset":"flat","levle":1}"#);
        assert!(bad.is_err());
    }
}
