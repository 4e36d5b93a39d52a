//! Experiment configuration: JSON files, flag overrides and resolution
//! defaults per command.

use std::path::Path;

use dnlab::coercivity::GeometryFamily;
use dnlab::domain::BoundaryPreset;
use dnlab::muskat::MuskatConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    FlatCheck,
    Coercivity,
    Convex,
    Lp,
    Sharp,
    Muskat,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::FlatCheck => "flat-check",
            Command::Coercivity => "coercivity",
            Command::Convex => "convex",
            Command::Lp => "lp",
            Command::Sharp => "sharp",
            Command::Muskat => "muskat",
        }
    }

    pub fn is_sweep(self) -> bool {
        matches!(self, Command::Coercivity | Command::Convex | Command::Lp)
    }

    /// `(nx, nz)` used when neither the file nor the flags set them.
    fn default_resolution(self) -> (usize, usize) {
        match self {
            Command::FlatCheck => (32, 128),
            Command::Coercivity | Command::Convex | Command::Lp => (128, 64),
            Command::Sharp => (64, 64),
            Command::Muskat => (64, 64),
        }
    }
}

/// Smallest admissible half-space truncation depth.
pub const MIN_DEPTH: f64 = 4.0;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Resolution {
    pub nx: Option<usize>,
    pub nz: Option<usize>,
    /// Half-space truncation depth.
    pub depth: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Shallowest flat strip of the finite-depth calibration family.
    pub h_min: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self { h_min: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlatCheckConfig {
    pub strip_depths: Vec<f64>,
    pub half_space: bool,
    /// Modes `1..=max_mode` are checked.
    pub max_mode: usize,
    pub tol: f64,
    pub min_order: f64,
}

impl Default for FlatCheckConfig {
    fn default() -> Self {
        Self {
            strip_depths: vec![1.0, 2.0],
            half_space: true,
            max_mode: 8,
            tol: 1e-4,
            min_order: 1.9,
        }
    }
}

/// Random geometry family; half-spaces use the resolution depth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    HalfSpace { max_lipschitz: f64 },
    Strip { h_min: f64, max_lipschitz: f64 },
}

impl FamilySpec {
    pub fn resolve(self, depth: f64) -> GeometryFamily {
        match self {
            FamilySpec::HalfSpace { max_lipschitz } => GeometryFamily::HalfSpace {
                depth,
                max_lipschitz,
            },
            FamilySpec::Strip {
                h_min,
                max_lipschitz,
            } => GeometryFamily::Strip {
                h_min,
                max_lipschitz,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Draws per family.
    pub draws: usize,
    pub families: Vec<FamilySpec>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            draws: 100,
            families: vec![
                FamilySpec::HalfSpace { max_lipschitz: 1.0 },
                FamilySpec::Strip {
                    h_min: 0.5,
                    max_lipschitz: 1.0,
                },
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhiSpec {
    Quadratic,
    Power { p: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvexConfig {
    pub phi: PhiSpec,
}

impl Default for ConvexConfig {
    fn default() -> Self {
        Self {
            phi: PhiSpec::Power { p: 4.0 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpConfig {
    pub p: Vec<f64>,
    /// Zero-mean draws for the empirical Poincaré constant.
    pub draws: usize,
    /// Leading draws per family that are also certified.
    pub certify_draws: usize,
    /// Allowed relative spread of the constant between the two halves.
    pub stability_tol: f64,
}

impl Default for LpConfig {
    fn default() -> Self {
        Self {
            p: vec![2.0, 4.0],
            draws: 1000,
            certify_draws: 50,
            stability_tol: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometrySpec {
    FlatStrip {
        depth: f64,
    },
    FlatHalfSpace,
    HalfSpace {
        top: BoundaryPreset,
    },
    Strip {
        top: BoundaryPreset,
        bottom: BoundaryPreset,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharpConfig {
    pub geometries: Vec<GeometrySpec>,
    pub mean_zero: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub block: usize,
    /// Allowed deviation from the closed form on flat strips.
    pub strip_oracle_tol: f64,
    /// Allowed deviation from 1 on the flat half-space.
    pub half_space_oracle_tol: f64,
}

impl Default for SharpConfig {
    fn default() -> Self {
        Self {
            geometries: vec![
                GeometrySpec::FlatStrip { depth: 1.0 },
                GeometrySpec::FlatStrip { depth: 2.0 },
                GeometrySpec::FlatHalfSpace,
            ],
            mean_zero: true,
            tol: 1e-8,
            max_iter: 200,
            block: 2,
            strip_oracle_tol: 1e-3,
            half_space_oracle_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloorConfig {
    /// Amplitude of the near-linear calibration run `a cos x`.
    pub amplitude: f64,
    pub t_end: f64,
}

impl Default for FloorConfig {
    fn default() -> Self {
        Self {
            amplitude: 1e-3,
            t_end: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MuskatRunConfig {
    pub initial: BoundaryPreset,
    pub t_end: f64,
    /// Also write the interface at every sample time.
    pub snapshots: bool,
    /// Fit window; the whole run when absent.
    pub fit_window: Option<(f64, f64)>,
    /// Decay-floor calibration; skipped when absent.
    pub floor: Option<FloorConfig>,
    /// `nz` and `depth` here are replaced by the resolution when it sets them.
    pub stepper: MuskatConfig,
}

impl Default for MuskatRunConfig {
    fn default() -> Self {
        Self {
            initial: BoundaryPreset::SingleMode {
                amplitude: 0.1,
                mode: 1,
                level: 0.0,
            },
            t_end: 10.0,
            snapshots: false,
            fit_window: None,
            floor: Some(FloorConfig::default()),
            stepper: MuskatConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub resolution: Resolution,
    pub calibration: CalibrationConfig,
    pub flat_check: FlatCheckConfig,
    pub sweep: SweepConfig,
    pub convex: ConvexConfig,
    pub lp: LpConfig,
    pub sharp: SharpConfig,
    pub muskat: MuskatRunConfig,
}

/// What a run writes next to its outputs; also accepted as `--config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub config: ExperimentConfig,
    pub outputs: Vec<String>,
}

pub const TOOL: &str = "dnlab";

/// Flag values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub nx: Option<usize>,
    pub nz: Option<usize>,
    pub depth: Option<f64>,
}

fn json_error(path: &Path, e: &serde_json::Error) -> CliError {
    let msg = e.to_string();
    let msg = msg.rfind(" at line ").map_or(msg.as_str(), |i| &msg[..i]);
    CliError::Config(format!(
        "{}:{}:{}: {msg}",
        path.display(),
        e.line(),
        e.column()
    ))
}

/// Reads a config or a manifest. Manifests are recognised by their `tool`
/// key, and their command must match the one requested.
pub fn load(path: &Path, command: Command) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: cannot read: {e}", path.display())))?;
    let probe: serde_json::Value = serde_json::from_str(&text).map_err(|e| json_error(path, &e))?;
    let is_manifest = probe.as_object().is_some_and(|o| o.contains_key("tool"));
    let config = if is_manifest {
        let m: Manifest = serde_json::from_str(&text).map_err(|e| json_error(path, &e))?;
        if m.tool != TOOL {
            return Err(CliError::Config(format!(
                "{}: not a {TOOL} manifest",
                path.display()
            )));
        }
        if m.command != command {
            return Err(CliError::Config(format!(
                "{}: manifest records command {}, not {}",
                path.display(),
                m.command.name(),
                command.name()
            )));
        }
        m.config
    } else {
        serde_json::from_str(&text).map_err(|e| json_error(path, &e))?
    };
    if let Some(c) = config.command {
        if c != command {
            return Err(CliError::Config(format!(
                "{}: config is for command {}, not {}",
                path.display(),
                c.name(),
                command.name()
            )));
        }
    }
    Ok(config)
}

impl ExperimentConfig {
    /// Applies flags and defaults, then validates. The result is what the
    /// manifest records, so replaying it needs no flags.
    pub fn resolve(mut self, command: Command, flags: &Overrides) -> Result<Self, CliError> {
        self.command = Some(command);
        if flags.seed.is_some() {
            self.seed = flags.seed;
        }
        let r = &mut self.resolution;
        r.nx = flags.nx.or(r.nx);
        r.nz = flags.nz.or(r.nz);
        r.depth = flags.depth.or(r.depth);
        let (nx, nz) = command.default_resolution();
        if command == Command::Muskat {
            let st = &mut self.muskat.stepper;
            st.nz = *r.nz.get_or_insert(st.nz);
            st.depth = *r.depth.get_or_insert(st.depth);
        }
        r.nx.get_or_insert(nx);
        r.nz.get_or_insert(nz);
        r.depth.get_or_insert(8.0);
        self.validate(command)?;
        Ok(self)
    }

    pub fn nx(&self) -> usize {
        self.resolution.nx.expect("resolved")
    }

    pub fn nz(&self) -> usize {
        self.resolution.nz.expect("resolved")
    }

    pub fn depth(&self) -> f64 {
        self.resolution.depth.expect("resolved")
    }

    fn validate(&self, command: Command) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if command.is_sweep() && self.seed.is_none() {
            return bad(format!(
                "{} is a seeded sweep: pass --seed or set \"seed\"",
                command.name()
            ));
        }
        let (nx, nz, depth) = (self.nx(), self.nz(), self.depth());
        if nx < 8 || nx % 2 != 0 {
            return bad(format!(
                "resolution.nx must be even and at least 8, got {nx}"
            ));
        }
        if nz < 4 {
            return bad(format!("resolution.nz must be at least 4, got {nz}"));
        }
        if !(depth >= MIN_DEPTH) {
            return bad(format!(
                "resolution.depth must be at least {MIN_DEPTH}, got {depth}"
            ));
        }
        let h_min = self.calibration.h_min;
        if !(h_min > 0.0 && h_min <= dnlab::coercivity::CALIBRATION_MAX_DEPTH) {
            return bad(format!(
                "calibration.h_min must lie in (0, 10], got {h_min}"
            ));
        }
        match command {
            Command::FlatCheck => {
                let fc = &self.flat_check;
                if fc.max_mode == 0 || fc.max_mode > nx / 2 {
                    return bad(format!("flat_check.max_mode must lie in 1..={}", nx / 2));
                }
                if fc.strip_depths.iter().any(|a| !(*a > 0.0)) {
                    return bad("flat_check.strip_depths must be positive".into());
                }
                if nz % 4 != 0 {
                    return bad(format!(
                        "flat-check halves nz twice, so nz must be a multiple of 4, got {nz}"
                    ));
                }
            }
            Command::Coercivity | Command::Convex | Command::Lp => {
                if self.sweep.families.is_empty() {
                    return bad("sweep.families must not be empty".into());
                }
                for f in &self.sweep.families {
                    let (lip, h) = match *f {
                        FamilySpec::HalfSpace { max_lipschitz } => (max_lipschitz, None),
                        FamilySpec::Strip {
                            h_min: h,
                            max_lipschitz,
                        } => (max_lipschitz, Some(h)),
                    };
                    if !(lip > 0.0) {
                        return bad(format!("max_lipschitz must be positive, got {lip}"));
                    }
                    if let Some(h) = h {
                        if !(h >= h_min) {
                            return bad(format!(
                                "strip h_min {h} is below the calibrated range (calibration.h_min = {h_min})"
                            ));
                        }
                    }
                }
                if command == Command::Convex {
                    if let PhiSpec::Power { p } = self.convex.phi {
                        if !(p >= 2.0) {
                            return bad(format!("convex.phi power needs p >= 2, got {p}"));
                        }
                    }
                }
                if command == Command::Lp {
                    let lp = &self.lp;
                    if lp.p.is_empty() || lp.p.iter().any(|p| !(*p >= 2.0)) {
                        return bad(format!(
                            "lp.p must be a nonempty list of exponents >= 2, got {:?}",
                            lp.p
                        ));
                    }
                    if lp.draws < 2 || lp.certify_draws > lp.draws {
                        return bad("lp needs draws >= 2 and certify_draws <= draws".into());
                    }
                }
            }
            Command::Sharp => {
                if self.sharp.geometries.is_empty() {
                    return bad("sharp.geometries must not be empty".into());
                }
            }
            Command::Muskat => {
                let m = &self.muskat;
                if !(m.t_end >= 0.0) {
                    return bad(format!("muskat.t_end must be nonnegative, got {}", m.t_end));
                }
                m.stepper
                    .validate()
                    .map_err(|e| CliError::Config(format!("muskat.stepper: {e}")))?;
                if let Some(f) = &m.floor {
                    if !(f.amplitude > 0.0 && f.t_end > 0.0) {
                        return bad("muskat.floor needs positive amplitude and t_end".into());
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = ExperimentConfig::default()
            .resolve(
                Command::Coercivity,
                &Overrides {
                    seed: Some(3),
                    ..Default::default()
                },
            )
            .unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(
            back.resolve(Command::Coercivity, &Overrides::default())
                .unwrap(),
            c
        );
    }

    #[test]
    fn sweeps_need_a_seed() {
        let e = ExperimentConfig::default().resolve(Command::Lp, &Overrides::default());
        assert!(matches!(e, Err(CliError::Config(_))));
        assert!(ExperimentConfig::default()
            .resolve(Command::Sharp, &Overrides::default())
            .is_ok());
    }

    #[test]
    fn flags_override_file() {
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"resolution": {"nz": 32, "depth": 6}}"#).unwrap();
        let flags = Overrides {
            nz: Some(48),
            ..Default::default()
        };
        let c = c.resolve(Command::Muskat, &flags).unwrap();
        assert_eq!((c.nz(), c.depth()), (48, 6.0));
        assert_eq!((c.muskat.stepper.nz, c.muskat.stepper.depth), (48, 6.0));
    }

    #[test]
    fn shallow_truncation_rejected() {
        let flags = Overrides {
            depth: Some(2.0),
            ..Default::default()
        };
        assert!(ExperimentConfig::default()
            .resolve(Command::Sharp, &flags)
            .is_err());
    }
}
