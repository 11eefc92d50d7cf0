//! Simulation oracle for the analytic results: outage probabilities,
//! average eavesdropper SNR, and empirical distribution checks.
//!
//! Determinism contract: every trial owns a counter-derived ChaCha stream
//! from the master seed, and per-trial outputs are collected in index
//! order before aggregation, so results are bit-identical regardless of
//! worker count or whether the parallel feature is enabled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::beamform::{min_ed_snr_beamformer, BeamVector, GramMatrices};
use crate::channel::{gain_vector, ChannelConstants, DriveConfig};
use crate::geometry::{sample_ppp, sample_ue, IntensityField, RoomConfig, TransmitterLayout};
use crate::quadrature::QuadratureSpec;
use crate::secrecy::{secrecy_capacity_bounds, SecrecyThreshold, SopBound};
use crate::{Error, Result};

/// Everything a trial needs about the physical setup.
#[derive(Clone)]
pub struct Scenario {
    pub room: RoomConfig,
    pub layout: TransmitterLayout,
    pub cc: ChannelConstants,
    pub drive: DriveConfig,
    pub field: IntensityField,
    pub threshold: SecrecyThreshold,
}

/// Transmission scheme simulated per trial.
#[derive(Debug, Clone, Copy)]
pub enum Scheme {
    /// Nearest fixture at fixed weight.
    Selection { omega: f64 },
    /// Per-trial eavesdropper-minimizing beamformer at a UE SNR floor.
    Beamforming { rho_u: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct TrialConfig {
    pub trials: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

/// A simulation estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub trials_used: usize,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn run_trials<T, F>(trials: usize, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..trials).into_par_iter().map(body).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(body).collect()
    }
}

/// Estimates the secrecy outage probability of the chosen bound.
///
/// Per trial: the UE lands uniformly in a uniformly chosen coverage cell,
/// eavesdroppers form a Poisson draw over the room, the strongest
/// eavesdropper sets `gamma_E*` (zero when the draw is empty), and an
/// outage is `C_s <= C_th` with non-strict inequality.
pub fn estimate_sop(scenario: &Scenario, cfg: &TrialConfig, bound: SopBound) -> Result<Estimate> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("zero trials".into()));
    }
    if let Scheme::Selection { omega } = cfg.scheme {
        if !(0.0..=1.0).contains(&omega) {
            return Err(Error::InvalidParameter(format!(
                "selection weight {omega} outside [0, 1]"
            )));
        }
    }
    // the beamforming scheme reuses one Gram matrix across trials
    let bbar = match cfg.scheme {
        Scheme::Beamforming { .. } => Some(crate::beamform::compute_bbar(
            &scenario.layout,
            &scenario.cc,
            &scenario.field,
            &scenario.room,
            &QuadratureSpec::default(),
        )?),
        Scheme::Selection { .. } => None,
    };
    let phi = scenario.drive.snr_coefficient();
    let cells = scenario.layout.len();
    let outcomes = run_trials(cfg.trials, |i| -> Result<bool> {
        let mut rng = trial_rng(cfg.seed, i);
        let cell = rng.random_range(0..cells);
        let ue = sample_ue(&scenario.layout, cell, &mut rng)?;
        let h_ue = gain_vector(&scenario.layout, &scenario.cc, ue);
        let w: Vec<f64> = match cfg.scheme {
            Scheme::Selection { omega } => {
                let mut w = vec![0.0; cells];
                w[cell] = omega;
                w
            }
            Scheme::Beamforming { rho_u } => {
                let (bbar, err) = bbar.as_ref().expect("precomputed above");
                let gm = GramMatrices::new(h_ue.clone(), bbar.clone(), *err)?;
                min_ed_snr_beamformer(&gm, &scenario.drive, rho_u)?
                    .weights
                    .weights()
                    .to_vec()
            }
        };
        let dot = |h: &[f64]| -> f64 { w.iter().zip(h).map(|(w, h)| w * h).sum() };
        let gamma_ue = phi * dot(&h_ue).powi(2);
        let mut gamma_ed = 0.0f64;
        for p in sample_ppp(&scenario.field, &scenario.room, &mut rng) {
            let h_ed = gain_vector(&scenario.layout, &scenario.cc, p);
            gamma_ed = gamma_ed.max(phi * dot(&h_ed).powi(2));
        }
        let (cs_lower, cs_upper) = secrecy_capacity_bounds(gamma_ue, gamma_ed)?;
        let cs = match bound {
            SopBound::Upper => cs_lower,
            SopBound::Lower => cs_upper,
        };
        Ok(cs <= scenario.threshold.bits)
    });
    let mut hits = 0usize;
    for o in outcomes {
        if o? {
            hits += 1;
        }
    }
    let n = cfg.trials as f64;
    let p = hits as f64 / n;
    Ok(Estimate {
        value: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
        trials_used: cfg.trials,
    })
}

/// Mean eavesdropper SNR of a fixed beam vector, sampling one ED per
/// trial from the normalized intensity. Cross-checks `phi w^T Bbar w`.
pub fn estimate_avg_ed_snr(
    w: &BeamVector,
    scenario: &Scenario,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("zero trials".into()));
    }
    if w.len() != scenario.layout.len() {
        return Err(Error::InvalidParameter(
            "beam vector length does not match the layout".into(),
        ));
    }
    if !(scenario.field.mean_count(&scenario.room) > 0.0) {
        return Err(Error::InvalidParameter(
            "eavesdropper intensity integrates to zero".into(),
        ));
    }
    let phi = scenario.drive.snr_coefficient();
    let room = &scenario.room;
    let samples = run_trials(trials, |i| {
        let mut rng = trial_rng(seed, i);
        let p = loop {
            let cand = [
                rng.random_range(-room.length / 2.0..room.length / 2.0),
                rng.random_range(-room.width / 2.0..room.width / 2.0),
            ];
            match &scenario.field {
                IntensityField::Homogeneous { .. } => break cand,
                IntensityField::Inhomogeneous { max_density, .. } => {
                    let accept: f64 = rng.random();
                    if accept * max_density <= scenario.field.density_at(cand[0], cand[1]) {
                        break cand;
                    }
                }
            }
        };
        let h = gain_vector(&scenario.layout, &scenario.cc, p);
        let dot: f64 = w.weights().iter().zip(&h).map(|(w, h)| w * h).sum();
        phi * dot * dot
    });
    let n = trials as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(Estimate {
        value: mean,
        std_error: (var / n).sqrt(),
        trials_used: trials,
    })
}

/// Right-continuous empirical CDF of a sample, with a KS distance against
/// any analytic CDF.
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

pub fn empirical_cdf(samples: &[f64]) -> Result<EmpiricalCdf> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("NaN sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN screened above"));
    Ok(EmpiricalCdf { sorted })
}

impl EmpiricalCdf {
    pub fn eval(&self, x: f64) -> f64 {
        let count = self.sorted.partition_point(|s| *s <= x);
        count as f64 / self.sorted.len() as f64
    }

    /// Sup-norm distance against `cdf`, checking both sides of each step.
    pub fn ks_statistic<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.sorted.len() as f64;
        let mut sup = 0.0f64;
        for (i, &x) in self.sorted.iter().enumerate() {
            let f = cdf(x);
            sup = sup.max((f - (i + 1) as f64 / n).abs());
            sup = sup.max((f - i as f64 / n).abs());
        }
        sup
    }
}
