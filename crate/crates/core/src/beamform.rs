//! Amplitude-constrained secrecy beamformers.
//!
//! Every optimization here reduces to the dominant eigenmode of
//! `Bbar^-1 A`, where `A = h_U h_U^T` captures the intended link and
//! `Bbar = E[h_E h_E^T]` averages the eavesdropper channel over the
//! intensity of the point process. Since `A` is rank one, the eigenmode
//! is a single linear solve. When the scaled eigenvector leaves the
//! weight box, a projected-gradient solver takes over.

use nalgebra::{DMatrix, DVector};

use crate::channel::{ChannelConstants, DriveConfig};
use crate::geometry::{IntensityField, RoomConfig, TransmitterLayout};
use crate::quadrature::{integrate_2d, QuadratureSpec};
use crate::{Error, Result};

/// Condition-number threshold above which `Bbar` is reported singular.
const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// Per-fixture weight vector under the amplitude constraint `|w_i| <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamVector(Vec<f64>);

impl BeamVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.abs() <= 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "weight {w} violates the amplitude constraint |w| <= 1"
            )));
        }
        Ok(Self(weights))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn from_dvector(v: &DVector<f64>) -> Result<Self> {
        // tolerate round-off at the box boundary
        Self::new(v.iter().map(|w| w.clamp(-1.0, 1.0)).collect())
    }
}

/// The two Gram matrices every optimization uses, plus the UE gain vector
/// behind `A` (the rank-1 structure is what makes the eigenproblem cheap).
#[derive(Debug, Clone)]
pub struct GramMatrices {
    h_ue: DVector<f64>,
    a: DMatrix<f64>,
    bbar: DMatrix<f64>,
    /// Estimated absolute quadrature error of the `Bbar` entries.
    pub quadrature_error: f64,
}

impl GramMatrices {
    pub fn new(h_ue: Vec<f64>, bbar: DMatrix<f64>, quadrature_error: f64) -> Result<Self> {
        let n = h_ue.len();
        if bbar.nrows() != n || bbar.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "Bbar is {}x{} but the gain vector has length {n}",
                bbar.nrows(),
                bbar.ncols()
            )));
        }
        let h_ue = DVector::from_vec(h_ue);
        let a = compute_a(h_ue.as_slice())?;
        Ok(Self {
            h_ue,
            a,
            bbar,
            quadrature_error,
        })
    }

    pub fn dim(&self) -> usize {
        self.h_ue.len()
    }

    pub fn h_ue(&self) -> &[f64] {
        self.h_ue.as_slice()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn bbar(&self) -> &DMatrix<f64> {
        &self.bbar
    }

    /// `w^T A w`, i.e. `(w^T h_U)^2`.
    pub fn ue_quadratic_form(&self, w: &[f64]) -> f64 {
        let dot: f64 = w.iter().zip(self.h_ue.iter()).map(|(w, h)| w * h).sum();
        dot * dot
    }

    /// `w^T Bbar w`.
    pub fn ed_quadratic_form(&self, w: &[f64]) -> f64 {
        let wv = DVector::from_column_slice(w);
        (wv.transpose() * &self.bbar * &wv)[(0, 0)]
    }
}

/// Outer product `h_U h_U^T`.
pub fn compute_a(h_ue: &[f64]) -> Result<DMatrix<f64>> {
    if h_ue.iter().all(|&h| h == 0.0) {
        return Err(Error::InvalidParameter("UE gain vector is zero".into()));
    }
    let h = DVector::from_column_slice(h_ue);
    Ok(&h * h.transpose())
}

/// Eavesdropper-averaged Gram matrix
/// `Bbar_ij = (1/N_E) iint lambda(x,y) h_i(x,y) h_j(x,y) dx dy`
/// by tensor Gauss-Legendre quadrature, with the refinement difference
/// reported as the entry-wise error estimate.
pub fn compute_bbar(
    layout: &TransmitterLayout,
    cc: &ChannelConstants,
    field: &IntensityField,
    room: &RoomConfig,
    quad: &QuadratureSpec,
) -> Result<(DMatrix<f64>, f64)> {
    let mean_count = field.mean_count(room);
    if !(mean_count > 0.0) {
        return Err(Error::InvalidParameter(
            "eavesdropper intensity integrates to zero".into(),
        ));
    }
    let evaluate = |n: usize| bbar_at_order(layout, cc, field, room, mean_count, n);
    let bbar = evaluate(quad.nodes);
    let error = if quad.check_nodes > quad.nodes {
        let refined = evaluate(quad.check_nodes);
        (&refined - &bbar).abs().max()
    } else {
        0.0
    };
    Ok((bbar, error))
}

fn bbar_at_order(
    layout: &TransmitterLayout,
    cc: &ChannelConstants,
    field: &IntensityField,
    room: &RoomConfig,
    mean_count: f64,
    n: usize,
) -> DMatrix<f64> {
    let dim = layout.len();
    let bounds = [
        -room.length / 2.0,
        room.length / 2.0,
        -room.width / 2.0,
        room.width / 2.0,
    ];
    // normalized density lambda / N_E; constant fields reduce to 1/area
    // exactly so the result cannot depend on the intensity value
    let uniform = matches!(field, IntensityField::Homogeneous { .. });
    let inv_area = 1.0 / room.area();
    let mut bbar = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..=i {
            let ti = layout.positions()[i];
            let tj = layout.positions()[j];
            let value = integrate_2d(
                &|x, y| {
                    let weight = if uniform {
                        inv_area
                    } else {
                        field.density_at(x, y) / mean_count
                    };
                    let hi = cc.gain_at_offset((x - ti[0]).powi(2) + (y - ti[1]).powi(2));
                    let hj = cc.gain_at_offset((x - tj[0]).powi(2) + (y - tj[1]).powi(2));
                    weight * hi * hj
                },
                bounds,
                n,
            );
            bbar[(i, j)] = value;
            bbar[(j, i)] = value;
        }
    }
    bbar
}

/// Dominant eigenpair of `Bbar^-1 A` via the rank-1 shortcut: the single
/// non-zero eigenvalue is `h_U^T Bbar^-1 h_U` with eigenvector
/// `Bbar^-1 h_U`, normalized so the first non-zero component is positive.
pub fn max_eigenpair(gm: &GramMatrices) -> Result<(f64, DVector<f64>)> {
    let svd = gm.bbar.clone().svd(false, false);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let condition = if s_min > 0.0 {
        s_max / s_min
    } else {
        f64::INFINITY
    };
    if !(condition < GRAM_CONDITION_LIMIT) {
        return Err(Error::SingularGram { condition });
    }
    let lu = gm.bbar.clone().lu();
    let mut v = lu
        .solve(&gm.h_ue)
        .ok_or(Error::SingularGram { condition })?;
    let eigenvalue = gm.h_ue.dot(&v);
    v /= v.norm();
    if let Some(first) = v.iter().find(|x| **x != 0.0) {
        if *first < 0.0 {
            v = -v;
        }
    }
    Ok((eigenvalue, v))
}

/// A solved beamforming problem: the weights plus both achieved SNRs.
#[derive(Debug, Clone)]
pub struct BeamformSolution {
    pub weights: BeamVector,
    /// Achieved UE SNR, linear.
    pub snr_ue: f64,
    /// Achieved eavesdropper average SNR, linear.
    pub avg_snr_ed: f64,
    /// True when the scaled eigenvector already satisfied the box strictly.
    pub interior: bool,
}

/// Settings for the projected-gradient fallback.
#[derive(Debug, Clone, Copy)]
pub struct SolverParams {
    pub objective_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            objective_tolerance: 1e-9,
            max_iterations: 100_000,
        }
    }
}

fn max_attainable_ue_snr(gm: &GramMatrices, drive: &DriveConfig) -> f64 {
    let sum: f64 = gm.h_ue().iter().map(|h| h.abs()).sum();
    drive.snr_coefficient() * sum * sum
}

/// Minimizes the eavesdropper average SNR subject to a required UE SNR.
///
/// Interior case: the dominant eigenvector scaled to meet the UE
/// constraint with equality; the achieved ED average is `rho_u / eta_max`.
/// Otherwise falls through to the projected-gradient solver.
pub fn min_ed_snr_beamformer(
    gm: &GramMatrices,
    drive: &DriveConfig,
    rho_u: f64,
) -> Result<BeamformSolution> {
    if !(rho_u > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "required UE SNR must be positive, got {rho_u}"
        )));
    }
    let phi = drive.snr_coefficient();
    let attainable = max_attainable_ue_snr(gm, drive);
    if rho_u > attainable {
        return Err(Error::Infeasible {
            required: rho_u,
            attainable,
        });
    }
    let (_, v) = max_eigenpair(gm)?;
    let projection: f64 = v
        .iter()
        .zip(gm.h_ue())
        .map(|(v, h)| v * h)
        .sum::<f64>()
        .abs();
    let scale = (rho_u / phi).sqrt() / projection;
    let scaled = v * scale;
    if scaled.amax() < 1.0 {
        let avg_snr_ed = phi * gm.ed_quadratic_form(scaled.as_slice());
        return Ok(BeamformSolution {
            weights: BeamVector::from_dvector(&scaled)?,
            snr_ue: rho_u,
            avg_snr_ed,
            interior: true,
        });
    }
    let weights = constrained_qp_fallback(gm, drive, rho_u, &SolverParams::default())?;
    let snr_ue = phi * gm.ue_quadratic_form(weights.weights());
    let avg_snr_ed = phi * gm.ed_quadratic_form(weights.weights());
    Ok(BeamformSolution {
        weights,
        snr_ue,
        avg_snr_ed,
        interior: false,
    })
}

/// Maximizes the UE SNR subject to a cap on the eavesdropper average SNR.
///
/// The eigenvector is scaled to meet the ED cap with equality; if that
/// leaves the box, the scale is clamped to the largest feasible magnitude
/// and the cap goes slack.
pub fn max_ue_snr_beamformer(
    gm: &GramMatrices,
    drive: &DriveConfig,
    rhobar_e: f64,
) -> Result<BeamformSolution> {
    if !(rhobar_e > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ED SNR cap must be positive, got {rhobar_e}"
        )));
    }
    let phi = drive.snr_coefficient();
    let (_, v) = max_eigenpair(gm)?;
    let ed_form = gm.ed_quadratic_form(v.as_slice());
    let scale_to_cap = (rhobar_e / (phi * ed_form)).sqrt();
    let scale_to_box = 1.0 / v.amax();
    let (scale, interior) = if scale_to_cap < scale_to_box {
        (scale_to_cap, true)
    } else {
        (scale_to_box, false)
    };
    let scaled = v * scale;
    Ok(BeamformSolution {
        snr_ue: phi * gm.ue_quadratic_form(scaled.as_slice()),
        avg_snr_ed: phi * gm.ed_quadratic_form(scaled.as_slice()),
        weights: BeamVector::from_dvector(&scaled)?,
        interior,
    })
}

/// UE capacity floor (bits) to the equivalent required UE SNR:
/// `M1 = (2^(2 xi) - 1) pi e / 2`.
pub fn ue_capacity_to_min_snr(xi_u: f64) -> f64 {
    (2f64.powf(2.0 * xi_u) - 1.0) * std::f64::consts::PI * std::f64::consts::E / 2.0
}

/// ED average-capacity cap (bits) to the equivalent ED average-SNR cap:
/// `M2 = 2^(2 xi) - 1`.
pub fn ed_capacity_to_avg_snr(xibar_e: f64) -> f64 {
    2f64.powf(2.0 * xibar_e) - 1.0
}

/// Capacity-constrained variant of [`min_ed_snr_beamformer`] via the
/// Jensen reformulation.
pub fn min_ed_capacity_beamformer(
    gm: &GramMatrices,
    drive: &DriveConfig,
    xi_u: f64,
) -> Result<BeamformSolution> {
    min_ed_snr_beamformer(gm, drive, ue_capacity_to_min_snr(xi_u))
}

/// Capacity-constrained variant of [`max_ue_snr_beamformer`].
pub fn max_ue_capacity_beamformer(
    gm: &GramMatrices,
    drive: &DriveConfig,
    xibar_e: f64,
) -> Result<BeamformSolution> {
    max_ue_snr_beamformer(gm, drive, ed_capacity_to_avg_snr(xibar_e))
}

/// Projected-gradient solver for the box-bound case: minimize `w^T Bbar w`
/// over `{ w : w^T h_U >= sqrt(rho_u / phi), |w| <= 1 }`, the UE SNR
/// constraint linearized through the rank-1 structure of `A`.
pub fn constrained_qp_fallback(
    gm: &GramMatrices,
    drive: &DriveConfig,
    rho_u: f64,
    params: &SolverParams,
) -> Result<BeamVector> {
    let phi = drive.snr_coefficient();
    let attainable = max_attainable_ue_snr(gm, drive);
    if rho_u > attainable {
        return Err(Error::Infeasible {
            required: rho_u,
            attainable,
        });
    }
    let h = &gm.h_ue;
    let threshold = (rho_u / phi).sqrt();
    let h_norm2 = h.dot(h);

    // feasible start: the signed box corner shrunk onto the constraint plane
    let corner_reach: f64 = h.iter().map(|h| h.abs()).sum();
    let mut w = DVector::from_iterator(
        gm.dim(),
        h.iter().map(|hi| hi.signum() * (threshold / corner_reach)),
    );

    // Lipschitz constant of the gradient 2 Bbar w
    let lipschitz = 2.0 * gm.bbar.clone().svd(false, false).singular_values.max();
    let step = 1.0 / lipschitz.max(f64::MIN_POSITIVE);

    let project = |mut w: DVector<f64>| -> DVector<f64> {
        // Dykstra's alternating projections onto box and half-space
        let mut p = DVector::zeros(w.len());
        let mut q = DVector::zeros(w.len());
        for _ in 0..200 {
            let before = w.clone();
            let y = (&w + &p).map(|x| x.clamp(-1.0, 1.0));
            p = &w + &p - &y;
            let shifted = &y + &q;
            let gap = threshold - shifted.dot(h);
            let z = if gap > 0.0 {
                &shifted + &(h * (gap / h_norm2))
            } else {
                shifted.clone()
            };
            q = shifted - &z;
            w = z;
            if (&w - before).amax() < 1e-14 {
                break;
            }
        }
        w.map(|x| x.clamp(-1.0, 1.0))
    };

    w = project(w);
    let mut objective = gm.ed_quadratic_form(w.as_slice());
    let mut last_decrease = f64::INFINITY;
    for _ in 0..params.max_iterations {
        let gradient = &gm.bbar * &w * 2.0;
        let candidate = project(&w - &gradient * step);
        let next = gm.ed_quadratic_form(candidate.as_slice());
        last_decrease = objective - next;
        w = candidate;
        if last_decrease.abs() < params.objective_tolerance * objective.max(1e-300) {
            return BeamVector::from_dvector(&w);
        }
        objective = next;
    }
    Err(Error::NoConvergence {
        iterations: params.max_iterations,
        last_decrease,
    })
}

/// Exhaustive grid oracle over `[-1, 1]^N`; test use only, so `N <= 3`.
pub fn brute_force_beamformer(
    gm: &GramMatrices,
    drive: &DriveConfig,
    rho_u: f64,
    step: f64,
) -> Result<BeamVector> {
    let n = gm.dim();
    if n > 3 {
        return Err(Error::InvalidParameter(format!(
            "brute force limited to 3 fixtures, got {n}"
        )));
    }
    if !(step > 0.0 && step <= 2.0) {
        return Err(Error::InvalidParameter(format!("bad grid step {step}")));
    }
    let phi = drive.snr_coefficient();
    let points = (2.0 / step).round() as usize + 1;
    let coord = |i: usize| -1.0 + i as f64 * step;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx = vec![0usize; n];
    loop {
        let w: Vec<f64> = idx.iter().map(|&i| coord(i).clamp(-1.0, 1.0)).collect();
        if phi * gm.ue_quadratic_form(&w) >= rho_u {
            let objective = gm.ed_quadratic_form(&w);
            if best.as_ref().is_none_or(|(b, _)| objective < *b) {
                best = Some((objective, w));
            }
        }
        // odometer increment
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < points {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == n {
                return match best {
                    Some((_, w)) => BeamVector::new(w),
                    None => Err(Error::Infeasible {
                        required: rho_u,
                        attainable: max_attainable_ue_snr(gm, drive),
                    }),
                };
            }
        }
    }
}
