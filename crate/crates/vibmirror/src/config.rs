//! Layered run configuration.
//!
//! Values come from four layers, each overriding the one below: compiled-in
//! defaults (preset "a" plus library defaults), a named preset, a
//! structured-text config file, and command-line flags. A file is flat
//! INI-style text: `[section]` headers, `key = value` lines, `#` or `;`
//! comments. Unknown sections and keys are rejected.

use crate::constants::ConstantsTable;
use crate::error::{Error, Result};
use crate::imaging::{CameraGeometry, FlightPath};
use crate::oracle::OracleConfig;
use crate::params::{ExperimentParams, MirrorModel, ModulationSettings};

/// One optional slot per recognised key; `None` defers to the layer below.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConfigDraft {
    // [constants]
    pub atom_mass: Option<f64>,
    pub hbar: Option<f64>,
    pub g: Option<f64>,
    pub d2_wavelength: Option<f64>,
    // [experiment]
    pub drop_height: Option<f64>,
    pub fall_time: Option<f64>,
    pub bounce_time: Option<f64>,
    pub horizontal_velocity: Option<f64>,
    pub base_power: Option<f64>,
    pub power_swing: Option<f64>,
    pub base_detuning: Option<f64>,
    pub detuning_swing: Option<f64>,
    pub mod_frequency: Option<f64>,
    pub kappa: Option<f64>,
    pub u0_over_e: Option<f64>,
    // [oracle]
    pub oracle_n_orders: Option<u32>,
    pub oracle_sigma_z: Option<f64>,
    pub oracle_grid_points: Option<usize>,
    pub oracle_dt_safety: Option<f64>,
    pub oracle_convergence: Option<bool>,
    // [imaging]
    pub sigma_v_recoils: Option<f64>,
    pub atoms: Option<usize>,
    pub seed: Option<u64>,
    pub pixel_pitch: Option<f64>,
    pub camera_width: Option<f64>,
    pub camera_height: Option<f64>,
    pub imaging_n_orders: Option<u32>,
    pub shot_noise: Option<bool>,
}

macro_rules! overlay_fields {
    ($low:expr, $high:expr; $($field:ident),+ $(,)?) => {
        ConfigDraft {
            $($field: $high.$field.or($low.$field)),+
        }
    };
}

impl ConfigDraft {
    /// Combines two layers; where `high` has a value it wins.
    pub fn overlay(low: ConfigDraft, high: ConfigDraft) -> ConfigDraft {
        overlay_fields!(low, high;
            atom_mass, hbar, g, d2_wavelength,
            drop_height, fall_time, bounce_time, horizontal_velocity,
            base_power, power_swing, base_detuning, detuning_swing,
            mod_frequency, kappa, u0_over_e,
            oracle_n_orders, oracle_sigma_z, oracle_grid_points,
            oracle_dt_safety, oracle_convergence,
            sigma_v_recoils, atoms, seed, pixel_pitch,
            camera_width, camera_height, imaging_n_orders, shot_noise,
        )
    }
}

/// The three built-in experiment presets.
pub fn preset(tag: &str) -> Result<ConfigDraft> {
    let common = ConfigDraft {
        drop_height: Some(3.6e-3),
        fall_time: Some(27e-3),
        bounce_time: Some(27e-3),
        horizontal_velocity: Some(30e-3),
        base_power: Some(50e-3),
        power_swing: Some(0.0),
        base_detuning: Some(2.1e9),
        detuning_swing: Some(130e6),
        mod_frequency: Some(500e3),
        kappa: Some(1.0 / 93e-9),
        u0_over_e: Some(4.0),
        ..ConfigDraft::default()
    };
    match tag {
        "a" => Ok(common),
        "b" => Ok(ConfigDraft {
            detuning_swing: Some(163e6),
            ..common
        }),
        "c" => Ok(ConfigDraft {
            drop_height: Some(2.05e-3),
            fall_time: Some(20.5e-3),
            bounce_time: Some(19.5e-3),
            base_detuning: Some(1.9e9),
            detuning_swing: Some(163e6),
            ..common
        }),
        other => Err(Error::config(format!(
            "unknown preset {other:?}, expected a, b, or c"
        ))),
    }
}

/// Published detection offsets to print beside computed positions, µm.
pub fn reference_offsets_um(tag: &str) -> Result<Vec<(i32, f64)>> {
    match tag {
        "a" | "b" => Ok(vec![
            (-2, -479.0),
            (-1, -235.0),
            (0, 0.0),
            (1, 228.0),
            (2, 449.0),
        ]),
        "c" => Ok(vec![(-1, -228.0), (0, 0.0), (1, 216.0)]),
        other => Err(Error::config(format!(
            "unknown preset {other:?}, expected a, b, or c"
        ))),
    }
}

fn parse_f64(section: &str, key: &str, value: &str, line: usize) -> Result<f64> {
    let parsed: f64 = value.parse().map_err(|_| {
        Error::config(format!(
            "line {line}: {section}.{key} expects a number, got {value:?}"
        ))
    })?;
    if !parsed.is_finite() {
        return Err(Error::config(format!(
            "line {line}: {section}.{key} must be finite, got {value:?}"
        )));
    }
    Ok(parsed)
}

fn parse_int<T: std::str::FromStr>(
    section: &str,
    key: &str,
    value: &str,
    line: usize,
) -> Result<T> {
    value.parse().map_err(|_| {
        Error::config(format!(
            "line {line}: {section}.{key} expects an integer, got {value:?}"
        ))
    })
}

fn parse_bool(section: &str, key: &str, value: &str, line: usize) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::config(format!(
            "line {line}: {section}.{key} expects true or false, got {other:?}"
        ))),
    }
}

/// Parses a config file. Later occurrences of a key override earlier ones.
pub fn parse(text: &str) -> Result<ConfigDraft> {
    let mut draft = ConfigDraft::default();
    let mut section: Option<&str> = None;
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw
            .split_once(['#', ';'])
            .map_or(raw, |(head, _)| head)
            .trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::config(format!("line {line}: unterminated section header")))?
                .trim();
            section = Some(match name {
                "constants" => "constants",
                "experiment" => "experiment",
                "oracle" => "oracle",
                "imaging" => "imaging",
                other => {
                    return Err(Error::config(format!(
                        "line {line}: unknown section [{other}]"
                    )))
                }
            });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| {
            Error::config(format!(
                "line {line}: expected key = value, got {content:?}"
            ))
        })?;
        let (key, value) = (key.trim(), value.trim());
        let section = section.ok_or_else(|| {
            Error::config(format!(
                "line {line}: key {key:?} appears before any [section]"
            ))
        })?;
        match (section, key) {
            ("constants", "atom_mass_kg") => {
                draft.atom_mass = Some(parse_f64(section, key, value, line)?)
            }
            ("constants", "hbar_js") => draft.hbar = Some(parse_f64(section, key, value, line)?),
            ("constants", "g_mps2") => draft.g = Some(parse_f64(section, key, value, line)?),
            ("constants", "d2_wavelength_m") => {
                draft.d2_wavelength = Some(parse_f64(section, key, value, line)?)
            }
            ("experiment", "drop_height_m") => {
                draft.drop_height = Some(parse_f64(section, key, value, line)?)
            }
            ("experiment", "fall_time_s") => {
                draft.fall_time = Some(parse_f64(section, key, value, line)?)
            }
            ("experiment", "bounce_time_s") => {
                draft.bounce_time = Some(parse_f64(section, key, value, line)?)
            }
            ("experiment", "horizontal_velocity_mps") => {
                draft.horizontal_velocity = Some(parse_f64(section, key, value, line)?)
            }
            ("experiment", "base_power_w") => {
                draft.base_power = Some(parse_f64(section, key, value, line)?)
            }
            ("experiment", "power_swing_w") => {
                draft.power_swing = Some(parse_f64(section, key, value, line)?)
            }
            ("experiment", "base_detuning_hz") => {
                draft.base_detuning = Some(parse_f64(section, key, value, line)?)
            }
            ("experiment", "detuning_swing_hz") => {
                draft.detuning_swing = Some(parse_f64(section, key, value, line)?)
            }
            ("experiment", "mod_frequency_hz") => {
                draft.mod_frequency = Some(parse_f64(section, key, value, line)?)
            }
            ("experiment", "kappa_per_m") => {
                draft.kappa = Some(parse_f64(section, key, value, line)?)
            }
            ("experiment", "u0_over_e") => {
                draft.u0_over_e = Some(parse_f64(section, key, value, line)?)
            }
            ("oracle", "n_orders") => {
                draft.oracle_n_orders = Some(parse_int(section, key, value, line)?)
            }
            ("oracle", "sigma_z") => {
                draft.oracle_sigma_z = Some(parse_f64(section, key, value, line)?)
            }
            ("oracle", "grid_points") => {
                draft.oracle_grid_points = Some(parse_int(section, key, value, line)?)
            }
            ("oracle", "dt_safety") => {
                draft.oracle_dt_safety = Some(parse_f64(section, key, value, line)?)
            }
            ("oracle", "check_convergence") => {
                draft.oracle_convergence = Some(parse_bool(section, key, value, line)?)
            }
            ("imaging", "sigma_v_recoils") => {
                draft.sigma_v_recoils = Some(parse_f64(section, key, value, line)?)
            }
            ("imaging", "atoms") => draft.atoms = Some(parse_int(section, key, value, line)?),
            ("imaging", "seed") => draft.seed = Some(parse_int(section, key, value, line)?),
            ("imaging", "pixel_pitch_m") => {
                draft.pixel_pitch = Some(parse_f64(section, key, value, line)?)
            }
            ("imaging", "camera_width_m") => {
                draft.camera_width = Some(parse_f64(section, key, value, line)?)
            }
            ("imaging", "camera_height_m") => {
                draft.camera_height = Some(parse_f64(section, key, value, line)?)
            }
            ("imaging", "n_orders") => {
                draft.imaging_n_orders = Some(parse_int(section, key, value, line)?)
            }
            ("imaging", "shot_noise") => {
                draft.shot_noise = Some(parse_bool(section, key, value, line)?)
            }
            _ => {
                return Err(Error::config(format!(
                    "line {line}: unknown key {section}.{key}"
                )))
            }
        }
    }
    Ok(draft)
}

/// Oracle dial overrides applied on top of the physical mapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub n_orders: u32,
    pub sigma_z: Option<f64>,
    pub grid_points: Option<usize>,
    pub dt_safety: f64,
    pub check_convergence: bool,
}

/// Resolved imaging run inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagingSettings {
    /// Transverse velocity spread, m/s.
    pub sigma_v: f64,
    pub atoms: usize,
    pub seed: u64,
    pub camera: CameraGeometry,
    pub n_orders: u32,
    pub shot_noise: bool,
}

/// Fully validated configuration for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub constants: ConstantsTable,
    pub experiment: ExperimentParams,
    /// Barrier height over the incident kinetic energy.
    pub u0_over_e: f64,
    pub oracle: OracleSettings,
    pub imaging: ImagingSettings,
}

impl ConfigDraft {
    /// Resolves the draft against the compiled-in defaults and validates
    /// everything through the domain constructors.
    pub fn build(self) -> Result<RunConfig> {
        let base = preset("a").expect("built-in preset");
        let draft = ConfigDraft::overlay(base, self);
        let defaults = ConstantsTable::default();
        let constants = ConstantsTable {
            atom_mass: draft.atom_mass.unwrap_or(defaults.atom_mass),
            hbar: draft.hbar.unwrap_or(defaults.hbar),
            g: draft.g.unwrap_or(defaults.g),
            d2_wavelength: draft.d2_wavelength.unwrap_or(defaults.d2_wavelength),
        };
        constants.validate()?;

        let modulation = ModulationSettings::new(
            draft.base_power.expect("preset fills base power"),
            draft.power_swing.expect("preset fills power swing"),
            draft.base_detuning.expect("preset fills base detuning"),
            draft.detuning_swing.expect("preset fills detuning swing"),
            draft.mod_frequency.expect("preset fills drive frequency"),
        )?;
        let drop_height = draft.drop_height.expect("preset fills drop height");
        let u0_over_e = draft.u0_over_e.expect("preset fills barrier ratio");
        if !(u0_over_e.is_finite() && u0_over_e > 1.0) {
            return Err(Error::domain(format!(
                "barrier to energy ratio must exceed 1, got {u0_over_e}"
            )));
        }
        let barrier_height = u0_over_e * constants.atom_mass * constants.g * drop_height;
        let mirror = MirrorModel::new(
            draft.kappa.expect("preset fills kappa"),
            barrier_height,
            &modulation,
        )?;
        let experiment = ExperimentParams::new(
            drop_height,
            draft.fall_time.expect("preset fills fall time"),
            draft.bounce_time.expect("preset fills bounce time"),
            draft.horizontal_velocity.expect("preset fills drift"),
            modulation,
            mirror,
        )?;

        let oracle = OracleSettings {
            n_orders: draft.oracle_n_orders.unwrap_or(3),
            sigma_z: draft.oracle_sigma_z,
            grid_points: draft.oracle_grid_points,
            dt_safety: draft.oracle_dt_safety.unwrap_or(0.45),
            check_convergence: draft.oracle_convergence.unwrap_or(true),
        };

        let camera = CameraGeometry::new(
            draft.camera_width.unwrap_or(5.5e-3),
            draft.camera_height.unwrap_or(4.4e-3),
            draft.pixel_pitch.unwrap_or(2.75e-5),
        )?;
        let sigma_v_recoils = draft.sigma_v_recoils.unwrap_or(6.6);
        if !(sigma_v_recoils.is_finite() && sigma_v_recoils >= 0.0) {
            return Err(Error::domain(format!(
                "velocity spread must be non-negative, got {sigma_v_recoils} recoils"
            )));
        }
        let imaging = ImagingSettings {
            sigma_v: sigma_v_recoils * constants.recoil_velocity(),
            atoms: draft.atoms.unwrap_or(100_000),
            seed: draft.seed.unwrap_or(1),
            camera,
            n_orders: draft.imaging_n_orders.unwrap_or(3),
            shot_noise: draft.shot_noise.unwrap_or(false),
        };

        Ok(RunConfig {
            constants,
            experiment,
            u0_over_e,
            oracle,
            imaging,
        })
    }
}

impl RunConfig {
    /// Oracle dial set for this configuration.
    pub fn oracle_config(&self) -> Result<OracleConfig> {
        let mapped =
            OracleConfig::from_experiment(&self.experiment, &self.constants, self.u0_over_e)?;
        let config = OracleConfig {
            n_orders: self.oracle.n_orders,
            sigma_z: self.oracle.sigma_z,
            grid_points: self.oracle.grid_points,
            dt_safety: self.oracle.dt_safety,
            check_convergence: self.oracle.check_convergence,
            ..mapped
        };
        config.validate()?;
        Ok(config)
    }

    /// Ballistic inputs for the imaging pipeline.
    pub fn flight(&self) -> FlightPath {
        FlightPath::from_experiment(&self.experiment)
    }
}
