//! Run configuration: a TOML file with the sections `[domain]`, `[law]`,
//! `[scenario]`, `[bounds]`, `[solver]`, `[constants]`, `[harness]` and
//! `[output]`. Unknown keys are rejected. The grammar is documented in
//! `docs/config.md`.

use porebound_core::bounds::BoundOptions;
use porebound_core::constitutive::{lambda_from_gamma, preset_law, LawPreset};
use porebound_core::grid::{Grid, SpatialField};
use porebound_core::harness::{EmbeddingConstants, SobolevParams, TestFunctionFamily};
use porebound_core::solver::{Scenario, SolverConfig, ZSpec};
use porebound_core::FieldSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSection,
    pub law: LawSection,
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub constants: ConstantsSection,
    #[serde(default)]
    pub harness: HarnessSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub n: usize,
    /// One entry for every axis, or a single entry used on all axes.
    pub cells: Vec<usize>,
    /// `[lo, hi]` per axis; the unit box when absent.
    pub extents: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSection {
    /// `two_term`, `three_term`, `power_law` or `custom`.
    pub preset: String,
    pub a: Option<String>,
    pub b: Option<String>,
    pub c: Option<String>,
    pub d: Option<String>,
    pub m: Option<f64>,
    pub exponents: Option<Vec<f64>>,
    pub coefficients: Option<Vec<String>>,
}

fn default_phi() -> String {
    "constant:1".into()
}

fn default_psi() -> String {
    "constant:0".into()
}

fn default_direction() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(default = "default_phi")]
    pub phi: String,
    pub lambda: Option<f64>,
    /// Polytropic exponent; `lambda = 1/(gamma + 1)`.
    pub gamma: Option<f64>,
    #[serde(default)]
    pub c_z: f64,
    #[serde(default = "default_direction")]
    pub direction: [f64; 3],
    #[serde(default = "default_psi")]
    pub psi: String,
    /// Piecewise-linear `[t, scale]` table multiplying `psi` in time.
    #[serde(default)]
    pub psi_time: Vec<[f64; 2]>,
    pub u0: String,
    pub t_final: Option<f64>,
    /// Final time as a fraction of the blow-up time of the weighted bound.
    pub t_final_fraction: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub r1: Option<f64>,
    pub r: Option<f64>,
    pub alpha0: Option<f64>,
    pub kappa_tilde: Option<f64>,
    pub p: Option<[f64; 5]>,
    pub epsilon: Option<f64>,
    /// `epsilon` as a fraction of `min(1, T)`.
    pub epsilon_fraction: Option<f64>,
    pub beta: Option<f64>,
    pub truncation_tol: Option<f64>,
    #[serde(default)]
    pub optimize: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt_initial: Option<f64>,
    pub dt_min: Option<f64>,
    pub dt_max: Option<f64>,
    /// Fixed step count used for any step size left unset.
    pub steps: Option<usize>,
    pub picard_tol: Option<f64>,
    pub picard_max: Option<usize>,
    pub snapshot_interval: Option<f64>,
    pub alphas: Option<Vec<f64>>,
}

fn default_source() -> String {
    "user".into()
}

fn default_safety() -> f64 {
    porebound_core::harness::DEFAULT_SAFETY_FACTOR
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    /// `user` takes `values`; `calibrated` fits them on the harness family.
    #[serde(default = "default_source")]
    pub source: String,
    pub values: Option<[f64; 7]>,
    #[serde(default = "default_safety")]
    pub safety_factor: f64,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        ConstantsSection { source: default_source(), values: None, safety_factor: default_safety() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSet {
    pub p: f64,
    pub r1: f64,
    pub s: f64,
    pub r: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessSection {
    pub seed: u64,
    pub count: usize,
    pub max_frequency: usize,
    pub decay: f64,
    /// Seed of the calibration family; `seed + 1` when absent.
    pub calibration_seed: Option<u64>,
    /// Cells per axis of the harness grid; the domain grid when absent.
    pub cells: Option<usize>,
    pub phi: String,
    pub w: String,
    /// Parameter sets; the built-in twelve when absent.
    pub params: Option<Vec<ParamSet>>,
    /// Multiplies every constant, to check that a suite can fail.
    pub sabotage: Option<f64>,
    /// Exponents of the `calibrate` command; `2 - a` and the default `r1` when absent.
    pub calibrate_p: Option<f64>,
    pub calibrate_r1: Option<f64>,
}

impl Default for HarnessSection {
    fn default() -> Self {
        let fam = TestFunctionFamily::default();
        HarnessSection {
            seed: fam.seed,
            count: fam.count,
            max_frequency: fam.max_frequency,
            decay: fam.decay,
            calibration_seed: None,
            cells: None,
            phi: default_phi(),
            w: default_phi(),
            params: None,
            sabotage: None,
            calibrate_p: None,
            calibrate_r1: None,
        }
    }
}

fn default_directory() -> String {
    "out".into()
}

fn default_cadence() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: String,
    /// Write every `cadence`-th step to `trace.csv`.
    #[serde(default = "default_cadence")]
    pub cadence: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: default_directory(), cadence: default_cadence() }
    }
}

/// Errors in the configuration, reported with exit code 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn cfg_err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

fn spec(s: &str, what: &str) -> Result<FieldSpec, ConfigError> {
    s.parse().map_err(|e| cfg_err(format!("{what}: {e}")))
}

/// A parsed configuration with the directory its relative paths resolve against.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| cfg_err(format!("config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
    let config = parse_config(&text)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { config, base_dir })
}

impl RunConfig {
    /// Checks what the schema cannot express.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let d = &self.domain;
        if !(1..=3).contains(&d.n) {
            return Err(cfg_err(format!("domain.n must be 1, 2 or 3, got {}", d.n)));
        }
        if d.cells.len() != 1 && d.cells.len() != d.n {
            return Err(cfg_err(format!("domain.cells needs 1 or {} entries, got {}", d.n, d.cells.len())));
        }
        if let Some(e) = &d.extents {
            if e.len() != d.n {
                return Err(cfg_err(format!("domain.extents needs {} entries, got {}", d.n, e.len())));
            }
        }
        let s = &self.scenario;
        match (s.lambda, s.gamma) {
            (Some(_), Some(_)) => return Err(cfg_err("scenario: give lambda or gamma, not both")),
            (None, None) => return Err(cfg_err("scenario: lambda or gamma is required")),
            _ => {}
        }
        match (s.t_final, s.t_final_fraction) {
            (Some(_), Some(_)) => return Err(cfg_err("scenario: give t_final or t_final_fraction, not both")),
            (None, None) => return Err(cfg_err("scenario: t_final or t_final_fraction is required")),
            (_, Some(f)) if !(f > 0.0 && f < 1.0) => {
                return Err(cfg_err(format!("scenario.t_final_fraction must lie in (0, 1), got {f}")))
            }
            _ => {}
        }
        if self.bounds.epsilon.is_some() && self.bounds.epsilon_fraction.is_some() {
            return Err(cfg_err("bounds: give epsilon or epsilon_fraction, not both"));
        }
        if !matches!(self.constants.source.as_str(), "user" | "calibrated") {
            return Err(cfg_err(format!("constants.source must be `user` or `calibrated`, got `{}`", self.constants.source)));
        }
        if self.output.cadence == 0 {
            return Err(cfg_err("output.cadence must be at least 1"));
        }
        for (what, text) in [("scenario.phi", &s.phi), ("scenario.psi", &s.psi), ("scenario.u0", &s.u0)] {
            spec(text, what)?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        self.grid_with(None)
    }

    fn grid_with(&self, cells_override: Option<usize>) -> Result<Grid, ConfigError> {
        let d = &self.domain;
        let cells: Vec<usize> = match cells_override {
            Some(c) => vec![c; d.n],
            None if d.cells.len() == 1 => vec![d.cells[0]; d.n],
            None => d.cells.clone(),
        };
        let extents: Vec<(f64, f64)> = match &d.extents {
            Some(e) => e.iter().map(|p| (p[0], p[1])).collect(),
            None => vec![(0.0, 1.0); d.n],
        };
        Grid::new(&cells, &extents).map_err(|e| cfg_err(format!("domain: {e}")))
    }

    pub fn lambda(&self) -> Result<f64, ConfigError> {
        match (self.scenario.lambda, self.scenario.gamma) {
            (Some(l), _) => Ok(l),
            (None, Some(g)) => lambda_from_gamma(g).map_err(|e| cfg_err(format!("scenario.gamma: {e}"))),
            (None, None) => Err(cfg_err("scenario: lambda or gamma is required")),
        }
    }

    pub fn law_preset(&self) -> Result<LawPreset, ConfigError> {
        let l = &self.law;
        let need = |v: &Option<String>, key: &str| -> Result<FieldSpec, ConfigError> {
            let text = v.as_deref().ok_or_else(|| cfg_err(format!("law.{key} is required for preset `{}`", l.preset)))?;
            spec(text, &format!("law.{key}"))
        };
        let unused = |keys: &[(&str, bool)]| -> Result<(), ConfigError> {
            match keys.iter().find(|(_, set)| *set) {
                Some((k, _)) => Err(cfg_err(format!("law.{k} does not apply to preset `{}`", l.preset))),
                None => Ok(()),
            }
        };
        let lists = [("exponents", l.exponents.is_some()), ("coefficients", l.coefficients.is_some())];
        match l.preset.as_str() {
            "two_term" => {
                unused(&[("c", l.c.is_some()), ("d", l.d.is_some()), ("m", l.m.is_some()), lists[0], lists[1]])?;
                Ok(LawPreset::TwoTerm { a: need(&l.a, "a")?, b: need(&l.b, "b")? })
            }
            "three_term" => {
                unused(&[("d", l.d.is_some()), ("m", l.m.is_some()), lists[0], lists[1]])?;
                Ok(LawPreset::ThreeTerm { a: need(&l.a, "a")?, b: need(&l.b, "b")?, c: need(&l.c, "c")? })
            }
            "power_law" => {
                unused(&[("b", l.b.is_some()), ("c", l.c.is_some()), lists[0], lists[1]])?;
                let m = l.m.ok_or_else(|| cfg_err("law.m is required for preset `power_law`"))?;
                Ok(LawPreset::PowerLaw { a: need(&l.a, "a")?, d: need(&l.d, "d")?, m })
            }
            "custom" => {
                unused(&[("a", l.a.is_some()), ("b", l.b.is_some()), ("c", l.c.is_some()), ("d", l.d.is_some()), ("m", l.m.is_some())])?;
                let exponents = l.exponents.clone().ok_or_else(|| cfg_err("law.exponents is required for preset `custom`"))?;
                let coefficients = l
                    .coefficients
                    .as_ref()
                    .ok_or_else(|| cfg_err("law.coefficients is required for preset `custom`"))?
                    .iter()
                    .enumerate()
                    .map(|(i, s)| spec(s, &format!("law.coefficients[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(LawPreset::Custom { exponents, coefficients })
            }
            other => Err(cfg_err(format!("law.preset `{other}` is not one of two_term, three_term, power_law, custom"))),
        }
    }

    /// The scenario with final time `t_final`.
    pub fn scenario(&self, base_dir: &Path, t_final: f64) -> Result<Scenario, ConfigError> {
        let grid = self.grid()?;
        let s = &self.scenario;
        let law = preset_law(&self.law_preset()?, &grid, Some(base_dir)).map_err(|e| cfg_err(format!("law: {e}")))?;
        let field = |text: &str, what: &str| -> Result<SpatialField, ConfigError> {
            spec(text, what)?.to_field(&grid, what, Some(base_dir)).map_err(|e| cfg_err(format!("{what}: {e}")))
        };
        let phi = field(&s.phi, "phi")?;
        let u0 = field(&s.u0, "u0")?;
        let table: Vec<(f64, f64)> = s.psi_time.iter().map(|p| (p[0], p[1])).collect();
        let psi = spec(&s.psi, "scenario.psi")?
            .to_boundary_field(&grid, &table)
            .map_err(|e| cfg_err(format!("scenario.psi: {e}")))?;
        let z = ZSpec::new(s.c_z, s.direction).map_err(|e| cfg_err(format!("scenario: {e}")))?;
        Scenario::new(law, phi, self.lambda()?, z, psi, u0, t_final, None).map_err(|e| cfg_err(format!("scenario: {e}")))
    }

    pub fn bound_options(&self, t_final: f64) -> BoundOptions {
        let b = &self.bounds;
        let base = BoundOptions::default();
        BoundOptions {
            r1: b.r1,
            r: b.r,
            alpha0: b.alpha0,
            kappa_tilde: b.kappa_tilde,
            p: b.p,
            epsilon: b.epsilon.or(b.epsilon_fraction.map(|f| f * t_final.min(1.0))),
            beta: b.beta,
            truncation_tol: b.truncation_tol.unwrap_or(base.truncation_tol),
        }
    }

    /// Solver controls; unset step sizes become `T/steps` (64 steps by default).
    pub fn solver_config(&self, t_final: f64, extra_alphas: &[f64]) -> SolverConfig {
        let s = &self.solver;
        let base = SolverConfig::default();
        let dt = t_final / s.steps.unwrap_or(64) as f64;
        let mut alphas = s.alphas.clone().unwrap_or_else(|| base.alphas.clone());
        for a in extra_alphas {
            if !alphas.contains(a) {
                alphas.push(*a);
            }
        }
        SolverConfig {
            dt_initial: s.dt_initial.unwrap_or(dt),
            dt_min: s.dt_min.unwrap_or(dt * 1e-8),
            dt_max: s.dt_max.unwrap_or(dt),
            picard_tol: s.picard_tol.unwrap_or(base.picard_tol),
            picard_max: s.picard_max.unwrap_or(base.picard_max),
            snapshot_interval: s.snapshot_interval.unwrap_or(base.snapshot_interval),
            alphas,
        }
    }

    pub fn family(&self, seed: u64) -> TestFunctionFamily {
        let h = &self.harness;
        TestFunctionFamily { seed, count: h.count, max_frequency: h.max_frequency, decay: h.decay, ..Default::default() }
    }

    pub fn harness_grid(&self) -> Result<Grid, ConfigError> {
        self.grid_with(self.harness.cells)
    }

    pub fn harness_params(&self) -> Result<Option<Vec<SobolevParams>>, ConfigError> {
        let n = self.domain.n;
        self.harness
            .params
            .as_ref()
            .map(|sets| {
                sets.iter()
                    .enumerate()
                    .map(|(i, q)| {
                        SobolevParams::new(n, q.p, q.r1, q.s, q.r, q.alpha, q.epsilon)
                            .map_err(|e| cfg_err(format!("harness.params[{i}]: {e}")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn user_constants(&self) -> Result<EmbeddingConstants, ConfigError> {
        EmbeddingConstants::user_supplied(self.constants.values.unwrap_or([1.0; 7]))
            .map_err(|e| cfg_err(format!("constants.values: {e}")))
    }

    pub fn harness_field(&self, grid: &Grid, text: &str, what: &str, base_dir: &Path) -> Result<SpatialField, ConfigError> {
        spec(text, what)?.to_field(grid, what, Some(base_dir)).map_err(|e| cfg_err(format!("{what}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const REFERENCE: &str = r#"
[domain]
n = 2
cells = [8]

[law]
preset = "two_term"
a = "constant:1"
b = "constant:1"

[scenario]
lambda = 0.5
psi = "constant:0.5"
u0 = "preset:gauss_bump(0.5,0.5,0.1,1.0,1.0)"
t_final_fraction = 0.5

[bounds]
r = 0.05
"#;

    #[test]
    fn round_trip_is_identical() {
        let cfg = parse_config(REFERENCE).unwrap();
        let again = parse_config(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_keys_are_named() {
        let bad = REFERENCE.replace("r = 0.05", "r = 0.05\nwobble = 1");
        let e = parse_config(&bad).unwrap_err();
        assert!(e.0.contains("wobble"), "{e}");
    }

    #[test]
    fn conflicting_keys_are_rejected() {
        let both = REFERENCE.replace("lambda = 0.5", "lambda = 0.5\ngamma = 1.0");
        assert!(parse_config(&both).is_err());
        let bad_spec = REFERENCE.replace("constant:0.5", "konstant:0.5");
        assert!(parse_config(&bad_spec).unwrap_err().0.contains("scenario.psi"));
        let stray = REFERENCE.replace("b = \"constant:1\"", "b = \"constant:1\"\nm = 1.5");
        let cfg = parse_config(&stray).unwrap();
        assert!(cfg.law_preset().unwrap_err().0.contains("law.m"));
    }

    #[test]
    fn solver_steps_follow_the_final_time() {
        let cfg = parse_config(REFERENCE).unwrap();
        let s = cfg.solver_config(1e-20, &[2.5]);
        assert_eq!(s.dt_initial, 1e-20 / 64.0);
        assert!(s.dt_min <= s.dt_initial && s.alphas.contains(&2.5));
    }
}
