//! Experiment configuration: TOML schema, dotted-path overrides, and the
//! bundled presets.
//!
//! Every physical quantity carries its unit in the key name, and all
//! dB/dBm values are converted to linear exactly once, in `build_*` —
//! the core library never sees logarithmic units.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vlc_secrecy_core::channel::{
    channel_constant, ChannelConstants, DriveConfig, OpticalFrontEnd,
};
use vlc_secrecy_core::geometry::{
    build_grid_layout, IntensityField, RoomConfig, TransmitterLayout,
};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub room: Room,
    pub layout: Layout,
    pub front_end: FrontEnd,
    pub drive: Drive,
    pub eavesdroppers: Eavesdroppers,
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Room {
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
}

/// Fixture placement: either a regular grid (rows/cols/edge) or explicit
/// positions. The grid form is required by the outage experiments, which
/// need the coverage-cell shape.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Layout {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions_m: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FrontEnd {
    pub conversion: f64,
    pub half_angle_deg: f64,
    pub pd_area_cm2: f64,
    pub lens_index: f64,
    pub fov_deg: f64,
    pub responsivity_ma_per_mw: f64,
    #[serde(default = "one")]
    pub tia_gain: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Drive {
    pub dc_bias_a: f64,
    pub mod_index: f64,
    pub noise_power_dbm: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Eavesdroppers {
    pub intensity_per_m2: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Beamform,
    Select,
    SopClosed,
    SopMc,
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Minimize the eavesdropper average SNR at a UE SNR floor.
    #[default]
    MinEd,
    /// Maximize the UE SNR under an eavesdropper average-SNR cap.
    MaxUe,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub mode: Mode,
    #[serde(default = "default_threshold")]
    pub threshold_bits: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "one_u64")]
    pub seed: u64,
    #[serde(default)]
    pub objective: Objective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_ue_snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ed_snr_cap_db: Option<f64>,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ue_points_m: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ue_grid: Option<UeGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

/// Evenly spaced UE evaluation points across the room.
#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct UeGrid {
    pub nx: usize,
    pub ny: usize,
}

/// Parameter sweep: dotted config paths (comma-separated paths receive
/// the same value, e.g. "layout.rows,layout.cols") against a value list;
/// an optional second axis forms a cross product.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: String,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values2: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

fn one_u64() -> u64 {
    1
}

fn default_threshold() -> f64 {
    0.5
}

fn default_trials() -> usize {
    100_000
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

impl Config {
    /// Parses TOML text, applies `--set` overrides, then validates
    /// against the schema (unknown keys rejected).
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut value: toml::Table = text
            .parse()
            .map_err(|e| ConfigError(format!("TOML parse failure: {e}")))?;
        for spec in overrides {
            apply_override(&mut value, spec)?;
        }
        Self::from_value(value)
    }

    pub fn from_value(value: toml::Table) -> Result<Self, ConfigError> {
        let cfg: Config = Config::deserialize(toml::Value::Table(value))
            .map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let l = &self.layout;
        let grid_keys = [l.rows.is_some(), l.cols.is_some(), l.edge_m.is_some()];
        let grid = grid_keys.iter().any(|k| *k);
        if grid && !grid_keys.iter().all(|k| *k) {
            return err("layout grid needs all of rows, cols, edge_m");
        }
        if grid == l.positions_m.is_some() {
            return err("layout must give either rows/cols/edge_m or positions_m");
        }
        if self.eavesdroppers.intensity_per_m2 < 0.0 {
            return err("eavesdroppers.intensity_per_m2 must be non-negative");
        }
        let e = &self.experiment;
        if e.trials == 0 {
            return err("experiment.trials must be at least 1");
        }
        if !(0.0..=1.0).contains(&e.omega) {
            return err("experiment.omega must lie in [0, 1]");
        }
        match e.mode {
            Mode::Beamform => {
                match e.objective {
                    Objective::MinEd if e.target_ue_snr_db.is_none() => {
                        return err("beamform with min-ed needs experiment.target_ue_snr_db")
                    }
                    Objective::MaxUe if e.ed_snr_cap_db.is_none() => {
                        return err("beamform with max-ue needs experiment.ed_snr_cap_db")
                    }
                    _ => {}
                }
                self.require_ue_points()?;
            }
            Mode::Select => self.require_ue_points()?,
            Mode::SopClosed | Mode::SopMc => {
                if !grid {
                    return err("outage experiments need a grid layout (rows/cols/edge_m)");
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return err("sweep.values is empty");
            }
            if sweep.parameter2.is_some() != sweep.values2.is_some() {
                return err("sweep.parameter2 and sweep.values2 go together");
            }
            for path in sweep_paths(sweep) {
                let mut probe: toml::Table = self.to_toml().parse().expect("round trip");
                apply_override(&mut probe, &format!("{path}=0.0"))
                    .map_err(|_| ConfigError(format!("sweep parameter {path} is malformed")))?;
                if lookup_path(&toml::Value::Table(probe), &path).is_none() {
                    return err(format!("sweep parameter {path} does not exist"));
                }
            }
        }
        Ok(())
    }

    fn require_ue_points(&self) -> Result<(), ConfigError> {
        let e = &self.experiment;
        match (!e.ue_points_m.is_empty(), e.ue_grid.is_some()) {
            (true, true) => err("give either ue_points_m or ue_grid, not both"),
            (false, false) => err("this mode needs ue_points_m or ue_grid"),
            _ => Ok(()),
        }
    }

    /// The UE evaluation points (explicit list or generated grid).
    pub fn ue_points(&self) -> Vec<[f64; 2]> {
        if let Some(grid) = self.experiment.ue_grid {
            let (l, w) = (self.room.length_m, self.room.width_m);
            let coord = |i: usize, n: usize, span: f64| {
                if n == 1 {
                    0.0
                } else {
                    -span / 2.0 + span * i as f64 / (n - 1) as f64
                }
            };
            let mut pts = Vec::with_capacity(grid.nx * grid.ny);
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    pts.push([coord(i, grid.nx, l), coord(j, grid.ny, w)]);
                }
            }
            pts
        } else {
            self.experiment.ue_points_m.clone()
        }
    }

    pub fn build_room(&self) -> Result<RoomConfig, vlc_secrecy_core::Error> {
        RoomConfig::new(self.room.length_m, self.room.width_m, self.room.height_m)
    }

    pub fn build_layout(&self, room: &RoomConfig) -> Result<TransmitterLayout, vlc_secrecy_core::Error> {
        match (&self.layout.positions_m, self.layout.rows) {
            (Some(positions), _) => TransmitterLayout::from_positions(positions.clone()),
            (None, Some(rows)) => build_grid_layout(
                room,
                rows,
                self.layout.cols.expect("validated"),
                self.layout.edge_m.expect("validated"),
            ),
            (None, None) => unreachable!("validated"),
        }
    }

    pub fn build_channel(&self) -> Result<ChannelConstants, vlc_secrecy_core::Error> {
        channel_constant(&self.build_front_end(), self.room.height_m)
    }

    pub fn build_front_end(&self) -> OpticalFrontEnd {
        let fe = &self.front_end;
        OpticalFrontEnd {
            conversion: fe.conversion,
            half_angle: fe.half_angle_deg.to_radians(),
            pd_area: fe.pd_area_cm2 * 1e-4,
            lens_index: fe.lens_index,
            fov: fe.fov_deg.to_radians(),
            responsivity: fe.responsivity_ma_per_mw,
            tia_gain: fe.tia_gain,
        }
    }

    pub fn build_drive(&self) -> Result<DriveConfig, vlc_secrecy_core::Error> {
        DriveConfig::new(
            self.drive.dc_bias_a,
            self.drive.mod_index,
            dbm_to_watts(self.drive.noise_power_dbm),
        )
    }

    pub fn build_field(&self) -> Result<IntensityField, vlc_secrecy_core::Error> {
        IntensityField::homogeneous(self.eavesdroppers.intensity_per_m2)
    }
}

pub fn sweep_paths(sweep: &Sweep) -> Vec<String> {
    let mut paths: Vec<String> = sweep
        .parameter
        .split(',')
        .map(|p| p.trim().to_string())
        .collect();
    if let Some(p2) = &sweep.parameter2 {
        paths.extend(p2.split(',').map(|p| p.trim().to_string()));
    }
    paths
}

fn lookup_path<'v>(root: &'v toml::Value, path: &str) -> Option<&'v toml::Value> {
    let mut node = root;
    for seg in path.split('.') {
        node = node.get(seg)?;
    }
    Some(node)
}

/// Applies one `key.path=value` override; the value is parsed as TOML so
/// numbers, booleans, arrays, and quoted strings all work.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let Some((path, raw)) = spec.split_once('=') else {
        return err(format!("override `{spec}` is not key.path=value"));
    };
    let parsed: toml::Table = format!("value = {raw}")
        .parse()
        .or_else(|_| format!("value = \"{raw}\"").parse())
        .map_err(|e| ConfigError(format!("override value `{raw}`: {e}")))?;
    let value = parsed["value"].clone();
    let segments: Vec<&str> = path.trim().split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return err(format!("override path `{path}` has empty segments"));
    }
    let mut node = table;
    for seg in &segments[..segments.len() - 1] {
        node = node
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| ConfigError(format!("override path `{path}` crosses a non-table")))?;
    }
    node.insert(segments[segments.len() - 1].to_string(), value);
    Ok(())
}

/// Sweep values may land on integer fields (e.g. layout.rows); coerce
/// whole floats so `values = [2, 3, 4]` works for both kinds.
pub fn set_sweep_value(table: &mut toml::Table, path: &str, value: f64) -> Result<(), ConfigError> {
    let rendered = if value.fract() == 0.0 && value.abs() < 1e15 {
        // try integer first; fall back to float if the field wants one
        format!("{}", value as i64)
    } else {
        format!("{value:?}")
    };
    apply_override(table, &format!("{path}={rendered}"))
}

pub fn load_config(source: &str, overrides: &[String]) -> Result<Config, ConfigError> {
    let text = if Path::new(source).exists() {
        std::fs::read_to_string(source)
            .map_err(|e| ConfigError(format!("cannot read {source}: {e}")))?
    } else if let Some(preset) = preset(source) {
        preset.to_string()
    } else {
        return err(format!(
            "`{source}` is neither a readable file nor a preset; see `vlc-secrecy list`"
        ));
    };
    Config::from_toml(&text, overrides)
}

pub const PRESETS: &[(&str, &str, &str)] = &[
    (
        "fig2",
        include_str!("presets/fig2.toml"),
        "two-fixture beamforming example: optimal weights at two UE positions",
    ),
    (
        "fig3",
        include_str!("presets/fig3.toml"),
        "UE SNR surface of the ED-minimizing beamformer over the room",
    ),
    (
        "fig4",
        include_str!("presets/fig4.toml"),
        "ED average SNR surface of the UE-maximizing beamformer",
    ),
    (
        "fig5",
        include_str!("presets/fig5.toml"),
        "UE SNR surface under nearest-fixture selection",
    ),
    (
        "fig6",
        include_str!("presets/fig6.toml"),
        "capacity-bound metrics under selection across the room",
    ),
    (
        "fig7",
        include_str!("presets/fig7.toml"),
        "SOP bounds vs eavesdropper intensity: closed form against Monte Carlo",
    ),
    (
        "fig8",
        include_str!("presets/fig8.toml"),
        "closed-form SOP upper bound vs fixture grid size",
    ),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, text, _)| *text)
}
