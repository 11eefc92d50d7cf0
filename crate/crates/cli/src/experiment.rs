//! Experiment orchestration: turns a validated config into CSV rows and
//! per-point summary lines.

use std::io::Write;

use vlc_secrecy_core::beamform::{
    compute_bbar, max_ue_snr_beamformer, min_ed_snr_beamformer, GramMatrices,
};
use vlc_secrecy_core::channel::gain_vector;
use vlc_secrecy_core::montecarlo::{estimate_sop, Scenario, Scheme, TrialConfig};
use vlc_secrecy_core::quadrature::QuadratureSpec;
use vlc_secrecy_core::secrecy::{SecrecyThreshold, SopBound, SopModel};
use vlc_secrecy_core::selection::{
    select_and_weight, selection_metrics, ConstraintReading, WeightRule,
};

use crate::config::{
    db_to_linear, linear_to_db, set_sweep_value, Config, ConfigError, Mode,
    Objective,
};

/// Failure classes drive the exit code: config problems exit 1,
/// numerical failures (infeasibility, non-convergence, singular Gram)
/// exit 2.
#[derive(Debug)]
pub enum AppError {
    Config(String),
    Numerical(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "{m}"),
            AppError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Config(e.to_string())
    }
}

impl From<vlc_secrecy_core::Error> for AppError {
    fn from(e: vlc_secrecy_core::Error) -> Self {
        AppError::Numerical(e.to_string())
    }
}

/// A finished run: header plus rows, ready for CSV serialization.
pub struct RunOutput {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summaries: Vec<String>,
}

impl RunOutput {
    pub fn write_csv<W: Write>(&self, sink: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn friendly_name(path: &str) -> String {
    match path {
        "eavesdroppers.intensity_per_m2" => "lambda_e".into(),
        "experiment.threshold_bits" => "c_th".into(),
        _ => path
            .split(',')
            .next()
            .unwrap_or(path)
            .trim()
            .replace('.', "_"),
    }
}

pub fn run(cfg: &Config, workers: usize) -> Result<RunOutput, AppError> {
    match &cfg.sweep {
        None => run_single(cfg, &[], &[], workers),
        Some(sweep) => {
            if matches!(cfg.experiment.mode, Mode::Beamform | Mode::Select) {
                return Err(AppError::Config(
                    "sweeps support the outage modes only (sop-closed, sop-mc)".into(),
                ));
            }
            let axes: Vec<(String, Vec<f64>)> = {
                let mut axes = vec![(sweep.parameter.clone(), sweep.values.clone())];
                if let (Some(p2), Some(v2)) = (&sweep.parameter2, &sweep.values2) {
                    axes.push((p2.clone(), v2.clone()));
                }
                axes
            };
            let sweep_cols: Vec<String> =
                axes.iter().map(|(p, _)| friendly_name(p)).collect();
            let mut combined: Option<RunOutput> = None;
            let combos: Vec<Vec<f64>> = match axes.len() {
                1 => axes[0].1.iter().map(|v| vec![*v]).collect(),
                _ => axes[1]
                    .1
                    .iter()
                    .flat_map(|v2| axes[0].1.iter().map(move |v1| vec![*v1, *v2]))
                    .collect(),
            };
            for combo in combos {
                let mut table: toml::Table =
                    cfg.to_toml().parse().expect("config round-trips");
                // drop the sweep block so the point config runs standalone
                table.remove("sweep");
                for (axis, value) in axes.iter().zip(&combo) {
                    for path in axis.0.split(',') {
                        set_sweep_value(&mut table, path.trim(), *value)?;
                    }
                }
                let point_cfg = Config::from_value(table)?;
                let point =
                    run_single(&point_cfg, &sweep_cols, &combo, workers)?;
                match &mut combined {
                    None => combined = Some(point),
                    Some(out) => {
                        out.rows.extend(point.rows);
                        out.summaries.extend(point.summaries);
                    }
                }
            }
            Ok(combined.expect("at least one sweep value"))
        }
    }
}

fn run_single(
    cfg: &Config,
    sweep_cols: &[String],
    sweep_vals: &[f64],
    workers: usize,
) -> Result<RunOutput, AppError> {
    let room = cfg.build_room()?;
    let layout = cfg.build_layout(&room)?;
    let cc = cfg.build_channel()?;
    let drive = cfg.build_drive()?;
    let field = cfg.build_field()?;
    let e = &cfg.experiment;

    let prefix_header: Vec<String> = sweep_cols.to_vec();
    let prefix: Vec<String> = sweep_vals.iter().map(|v| fmt(*v)).collect();

    let mut out = RunOutput {
        header: prefix_header,
        rows: Vec::new(),
        summaries: Vec::new(),
    };

    match e.mode {
        Mode::Beamform => {
            let quad = QuadratureSpec::default();
            let (bbar, qerr) = compute_bbar(&layout, &cc, &field, &room, &quad)?;
            out.header.extend(["ue_x_m".into(), "ue_y_m".into()]);
            out.header
                .extend((1..=layout.len()).map(|i| format!("w_{i}")));
            out.header.extend([
                "snr_ue_db".into(),
                "avg_ed_snr_db".into(),
                "interior".into(),
            ]);
            for ue in cfg.ue_points() {
                let gm = GramMatrices::new(gain_vector(&layout, &cc, ue), bbar.clone(), qerr)?;
                let sol = match e.objective {
                    Objective::MinEd => min_ed_snr_beamformer(
                        &gm,
                        &drive,
                        db_to_linear(e.target_ue_snr_db.expect("validated")),
                    )?,
                    Objective::MaxUe => max_ue_snr_beamformer(
                        &gm,
                        &drive,
                        db_to_linear(e.ed_snr_cap_db.expect("validated")),
                    )?,
                };
                let mut row = prefix.clone();
                row.extend([fmt(ue[0]), fmt(ue[1])]);
                row.extend(sol.weights.weights().iter().map(|w| fmt(*w)));
                row.extend([
                    fmt(linear_to_db(sol.snr_ue)),
                    fmt(linear_to_db(sol.avg_snr_ed)),
                    sol.interior.to_string(),
                ]);
                out.rows.push(row);
                out.summaries.push(format!(
                    "beamform ue=({}, {}): snr_ue {:.2} dB, avg_ed {:.2} dB, interior {}",
                    ue[0],
                    ue[1],
                    linear_to_db(sol.snr_ue),
                    linear_to_db(sol.avg_snr_ed),
                    sol.interior
                ));
            }
        }
        Mode::Select => {
            let quad = QuadratureSpec::default();
            let (bbar, qerr) = compute_bbar(&layout, &cc, &field, &room, &quad)?;
            out.header.extend([
                "ue_x_m".into(),
                "ue_y_m".into(),
                "index".into(),
                "omega".into(),
                "snr_ue_db".into(),
                "avg_ed_snr_db".into(),
                "ue_capacity_lower_bits".into(),
                "ed_avg_capacity_upper_bits".into(),
            ]);
            for ue in cfg.ue_points() {
                let gm = GramMatrices::new(gain_vector(&layout, &cc, ue), bbar.clone(), qerr)?;
                let rule = match (e.target_ue_snr_db, e.ed_snr_cap_db) {
                    (Some(db), None) => WeightRule::MinUeSnr {
                        rho_u: db_to_linear(db),
                    },
                    (None, Some(db)) => WeightRule::MaxEdAvgSnr {
                        rhobar_e: db_to_linear(db),
                    },
                    (None, None) if e.omega == 1.0 => WeightRule::Unit,
                    (None, None) => {
                        // fixed sub-unit weight: reuse the floor rule at
                        // exactly the SNR omega achieves
                        let h = gain_vector(&layout, &cc, ue);
                        let i = vlc_secrecy_core::geometry::nearest_transmitter(&layout, ue);
                        WeightRule::MinUeSnr {
                            rho_u: drive.snr_coefficient() * (e.omega * h[i]).powi(2),
                        }
                    }
                    (Some(_), Some(_)) => {
                        return Err(AppError::Config(
                            "select takes at most one of target_ue_snr_db / ed_snr_cap_db"
                                .into(),
                        ))
                    }
                };
                let sel = select_and_weight(
                    &layout,
                    &cc,
                    &drive,
                    ue,
                    rule,
                    ConstraintReading::Consistent,
                    Some(&gm),
                )?;
                let metrics =
                    selection_metrics(&sel, &gm, &drive, &layout, &cc, &field, &room, &quad)?;
                let mut row = prefix.clone();
                row.extend([
                    fmt(ue[0]),
                    fmt(ue[1]),
                    sel.index.to_string(),
                    fmt(sel.omega),
                    fmt(linear_to_db(metrics.snr_ue)),
                    fmt(linear_to_db(metrics.avg_snr_ed)),
                    fmt(metrics.ue_capacity_lower),
                    fmt(metrics.ed_avg_capacity_upper),
                ]);
                out.rows.push(row);
                out.summaries.push(format!(
                    "select ue=({}, {}): fixture {}, omega {:.3}, snr_ue {:.2} dB",
                    ue[0],
                    ue[1],
                    sel.index,
                    sel.omega,
                    linear_to_db(metrics.snr_ue)
                ));
            }
        }
        Mode::SopClosed | Mode::SopMc => {
            let grid = layout.grid().ok_or_else(|| {
                AppError::Config("outage experiments need a grid layout".into())
            })?;
            let lambda = cfg.eavesdroppers.intensity_per_m2;
            let n_fixtures = layout.len();
            let threshold = SecrecyThreshold::new(e.threshold_bits)?;
            let model = SopModel::build(grid.half_width, grid.aspect, &cc, &drive, lambda)?;
            let upper_cf = model.sop(&threshold, SopBound::Upper)?;
            let lower_cf = model.sop(&threshold, SopBound::Lower)?;
            let new_cols: Vec<String> =
                ["lambda_e", "c_th", "n_fixtures", "sop_upper_cf", "sop_lower_cf"]
                    .iter()
                    .filter(|c| !out.header.iter().any(|h| h == *c))
                    .map(|c| c.to_string())
                    .collect();
            out.header.extend(new_cols);
            let mut row = prefix.clone();
            for (name, value) in [
                ("lambda_e", fmt(lambda)),
                ("c_th", fmt(e.threshold_bits)),
                ("n_fixtures", layout.len().to_string()),
                ("sop_upper_cf", fmt(upper_cf)),
                ("sop_lower_cf", fmt(lower_cf)),
            ] {
                if !sweep_cols.iter().any(|c| c == name) {
                    row.push(value);
                }
            }
            if e.mode == Mode::SopMc {
                let scenario = Scenario {
                    room,
                    layout,
                    cc,
                    drive,
                    field,
                    threshold,
                };
                let trial_cfg = TrialConfig {
                    trials: e.trials,
                    seed: e.seed,
                    scheme: Scheme::Selection { omega: e.omega },
                };
                let upper_mc = estimate_sop(&scenario, &trial_cfg, SopBound::Upper)?;
                let lower_mc = estimate_sop(&scenario, &trial_cfg, SopBound::Lower)?;
                let mc_cols: Vec<String> = [
                    "sop_upper_mc",
                    "sop_upper_mc_se",
                    "sop_lower_mc",
                    "sop_lower_mc_se",
                    "trials",
                    "seed",
                    "workers",
                ]
                .iter()
                .filter(|c| !out.header.iter().any(|h| h == *c))
                .map(|c| c.to_string())
                .collect();
                out.header.extend(mc_cols);
                row.extend([
                    fmt(upper_mc.value),
                    fmt(upper_mc.std_error),
                    fmt(lower_mc.value),
                    fmt(lower_mc.std_error),
                    e.trials.to_string(),
                    e.seed.to_string(),
                    workers.to_string(),
                ]);
                out.summaries.push(format!(
                    "sop lambda_e={lambda} c_th={}: upper cf {:.4} / mc {:.4} (se {:.4}), lower cf {:.4} / mc {:.4} (se {:.4})",
                    e.threshold_bits,
                    upper_cf,
                    upper_mc.value,
                    upper_mc.std_error,
                    lower_cf,
                    lower_mc.value,
                    lower_mc.std_error,
                ));
            } else {
                out.summaries.push(format!(
                    "sop lambda_e={lambda} c_th={} fixtures={n_fixtures}: upper {:.4}, lower {:.4}",
                    e.threshold_bits, upper_cf, lower_cf
                ));
            }
            out.rows.push(row);
        }
    }
    // duplicate-safe: a sweep over lambda_e or c_th must not double columns
    debug_assert_eq!(out.header.len(), out.rows[0].len());
    Ok(out)
}
