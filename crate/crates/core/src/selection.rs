//! Nearest-fixture selection: one LED serves the user with a scalar
//! weight, the baseline the beamformers are compared against.

use crate::beamform::{BeamVector, GramMatrices};
use crate::channel::{gain_vector, ChannelConstants, DriveConfig};
use crate::geometry::{nearest_transmitter, IntensityField, RoomConfig, TransmitterLayout};
use crate::quadrature::{integrate_2d, QuadratureSpec};
use crate::{Error, Result};

/// How the scalar weight is chosen once the fixture is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightRule {
    /// Full drive, the convention for outage analysis.
    Unit,
    /// Smallest weight meeting a UE SNR floor.
    MinUeSnr { rho_u: f64 },
    /// Largest weight (capped at 1) meeting an ED average-SNR ceiling.
    MaxEdAvgSnr { rhobar_e: f64 },
}

/// The weight conditions appear in two readings: one consistent with the
/// SNR quadratic forms (`phi omega^2 A_ii >= rho_U`), and a verbatim one
/// on the squared Gram diagonals with no SNR coefficient
/// (`omega^2 A_ii^2 >= rho_U`). The verbatim reading is dimensionally
/// odd but kept selectable for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstraintReading {
    #[default]
    Consistent,
    Verbatim,
}

/// A chosen fixture plus its scalar weight, materialized as a beam vector
/// with a single non-zero entry.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub index: usize,
    pub omega: f64,
    pub weights: BeamVector,
}

impl SelectionResult {
    fn build(index: usize, omega: f64, dim: usize) -> Result<Self> {
        let mut w = vec![0.0; dim];
        w[index] = omega;
        Ok(Self {
            index,
            omega,
            weights: BeamVector::new(w)?,
        })
    }
}

/// Selects the fixture nearest to the UE and picks its weight per the
/// rule. The ED-ceiling rule needs `Bbar`, so `gm` is required there;
/// the other rules only use the UE gain.
pub fn select_and_weight(
    layout: &TransmitterLayout,
    cc: &ChannelConstants,
    drive: &DriveConfig,
    ue: [f64; 2],
    rule: WeightRule,
    reading: ConstraintReading,
    gm: Option<&GramMatrices>,
) -> Result<SelectionResult> {
    let index = nearest_transmitter(layout, ue);
    let gains = gain_vector(layout, cc, ue);
    let h_i = gains[index];
    let phi = drive.snr_coefficient();
    let omega = match rule {
        WeightRule::Unit => 1.0,
        WeightRule::MinUeSnr { rho_u } => {
            if !(rho_u >= 0.0) {
                return Err(Error::InvalidParameter(format!("bad SNR floor {rho_u}")));
            }
            let omega = match reading {
                ConstraintReading::Consistent => (rho_u / (phi * h_i * h_i)).sqrt(),
                ConstraintReading::Verbatim => rho_u.sqrt() / (h_i * h_i),
            };
            if omega > 1.0 {
                let attainable = match reading {
                    ConstraintReading::Consistent => phi * h_i * h_i,
                    ConstraintReading::Verbatim => (h_i * h_i).powi(2),
                };
                return Err(Error::Infeasible {
                    required: rho_u,
                    attainable,
                });
            }
            omega
        }
        WeightRule::MaxEdAvgSnr { rhobar_e } => {
            if !(rhobar_e >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "bad SNR ceiling {rhobar_e}"
                )));
            }
            let gm = gm.ok_or_else(|| {
                Error::InvalidParameter(
                    "the ED-ceiling weight rule needs the Gram matrices".into(),
                )
            })?;
            let b_ii = gm.bbar()[(index, index)];
            let omega = match reading {
                ConstraintReading::Consistent => (rhobar_e / (phi * b_ii)).sqrt(),
                ConstraintReading::Verbatim => rhobar_e.sqrt() / b_ii,
            };
            omega.min(1.0)
        }
    };
    SelectionResult::build(index, omega, layout.len())
}

/// SNR and capacity-bound metrics of a selection decision.
#[derive(Debug, Clone, Copy)]
pub struct SelectionMetrics {
    pub snr_ue: f64,
    pub avg_snr_ed: f64,
    /// Capacity lower bound of the UE link, bits.
    pub ue_capacity_lower: f64,
    /// Average (over the ED location) of the ED capacity upper bound,
    /// bits, by the same quadrature scheme the Gram matrix uses.
    pub ed_avg_capacity_upper: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn selection_metrics(
    sel: &SelectionResult,
    gm: &GramMatrices,
    drive: &DriveConfig,
    layout: &TransmitterLayout,
    cc: &ChannelConstants,
    field: &IntensityField,
    room: &RoomConfig,
    quad: &QuadratureSpec,
) -> Result<SelectionMetrics> {
    if gm.dim() != sel.weights.len() || gm.dim() != layout.len() {
        return Err(Error::InvalidParameter(
            "selection, Gram, and layout dimensions disagree".into(),
        ));
    }
    let phi = drive.snr_coefficient();
    let w = sel.weights.weights();
    let snr_ue = phi * gm.ue_quadratic_form(w);
    let avg_snr_ed = phi * gm.ed_quadratic_form(w);
    let (ue_capacity_lower, _) = crate::secrecy::capacity_bounds(snr_ue)?;

    let mean_count = field.mean_count(room);
    if !(mean_count > 0.0) {
        return Err(Error::InvalidParameter(
            "eavesdropper intensity integrates to zero".into(),
        ));
    }
    let uniform = matches!(field, IntensityField::Homogeneous { .. });
    let inv_area = 1.0 / room.area();
    let t = layout.positions()[sel.index];
    let omega2 = sel.omega * sel.omega;
    let bounds = [
        -room.length / 2.0,
        room.length / 2.0,
        -room.width / 2.0,
        room.width / 2.0,
    ];
    let ed_avg_capacity_upper = integrate_2d(
        &|x, y| {
            let weight = if uniform {
                inv_area
            } else {
                field.density_at(x, y) / mean_count
            };
            let h = cc.gain_at_offset((x - t[0]).powi(2) + (y - t[1]).powi(2));
            weight * 0.5 * (1.0 + phi * omega2 * h * h).log2()
        },
        bounds,
        quad.nodes,
    );
    Ok(SelectionMetrics {
        snr_ue,
        avg_snr_ed,
        ue_capacity_lower,
        ed_avg_capacity_upper,
    })
}
