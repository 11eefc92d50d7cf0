//! Lambertian line-of-sight channel gains and peak SNR under the
//! amplitude constraint.

use crate::beamform::BeamVector;
use crate::geometry::TransmitterLayout;
use crate::{Error, Result};

/// LED emitter and photodiode constants feeding the channel gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalFrontEnd {
    /// Current-to-light conversion efficiency, W/A.
    pub conversion: f64,
    /// Half-intensity angle of the LED, radians.
    pub half_angle: f64,
    /// Physical photodiode area, m^2.
    pub pd_area: f64,
    /// Refractive index of the optical concentrator.
    pub lens_index: f64,
    /// Receiver field of view, radians.
    pub fov: f64,
    /// Photodetector responsivity, A/W.
    pub responsivity: f64,
    /// Transimpedance amplifier gain, V/A.
    pub tia_gain: f64,
}

impl OpticalFrontEnd {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.conversion,
            self.pd_area,
            self.lens_index,
            self.responsivity,
            self.tia_gain,
        ];
        if positive.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidParameter(
                "front-end constants must all be positive".into(),
            ));
        }
        if !(self.half_angle > 0.0 && self.half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!(
                "half angle {} rad must lie in (0, pi/2)",
                self.half_angle
            )));
        }
        if !(self.fov > 0.0 && self.fov <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!(
                "field of view {} rad must lie in (0, pi/2]",
                self.fov
            )));
        }
        Ok(())
    }
}

/// Bias, modulation depth, and receiver noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    /// Fixed bias current per fixture, A.
    pub dc_bias: f64,
    /// Modulation index, in [0, 1]; signal amplitude is bounded by
    /// `mod_index * dc_bias`.
    pub mod_index: f64,
    /// Noise power in squared-signal units.
    pub noise_power: f64,
}

impl DriveConfig {
    pub fn new(dc_bias: f64, mod_index: f64, noise_power: f64) -> Result<Self> {
        if !(dc_bias > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "DC bias must be positive, got {dc_bias}"
            )));
        }
        if !(0.0..=1.0).contains(&mod_index) {
            return Err(Error::InvalidParameter(format!(
                "modulation index {mod_index} must lie in [0, 1]"
            )));
        }
        if !(noise_power > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise power must be positive, got {noise_power}"
            )));
        }
        Ok(Self {
            dc_bias,
            mod_index,
            noise_power,
        })
    }

    /// SNR scale factor `alpha^2 I_DC^2 / sigma^2`.
    pub fn snr_coefficient(&self) -> f64 {
        (self.mod_index * self.dc_bias).powi(2) / self.noise_power
    }
}

/// Lambertian order and the constant of the simplified power-law gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConstants {
    /// Lambertian order m.
    pub lambertian_m: f64,
    /// Gain constant K in `h = K l^-(m+3)`.
    pub gain_k: f64,
    /// Ceiling height above the work plane, meters.
    pub height: f64,
}

/// Lambertian order `m = -ln 2 / ln cos(half_angle)`.
pub fn lambertian_order(half_angle: f64) -> Result<f64> {
    if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!(
            "half angle {half_angle} rad must lie in (0, pi/2)"
        )));
    }
    let m = -std::f64::consts::LN_2 / half_angle.cos().ln();
    // Half angles specified in degrees pick up an ulp of error in the
    // radian conversion (cos(60 deg) evaluates to 0.5 + 1 ulp), which
    // would make nominally integer orders like m(60 deg) = 1 inexact.
    // Snap when the result is within a few ulps of an integer; genuine
    // non-integer orders are never this close.
    let snapped = m.round();
    if snapped >= 1.0 && (m - snapped).abs() <= 1e-13 * snapped {
        return Ok(snapped);
    }
    Ok(m)
}

/// Collapses the front end into `K = eta (m+1) A_PD Z^(m+1) kappa^2 R T
/// / (2 pi sin^2 fov)` for a receiver facing straight up.
pub fn channel_constant(fe: &OpticalFrontEnd, height: f64) -> Result<ChannelConstants> {
    fe.validate()?;
    if !(height > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "height must be positive, got {height}"
        )));
    }
    let m = lambertian_order(fe.half_angle)?;
    let gain_k = fe.conversion
        * (m + 1.0)
        * fe.pd_area
        * height.powf(m + 1.0)
        * fe.lens_index.powi(2)
        * fe.responsivity
        * fe.tia_gain
        / (2.0 * std::f64::consts::PI * fe.fov.sin().powi(2));
    Ok(ChannelConstants {
        lambertian_m: m,
        gain_k,
        height,
    })
}

/// Full Lambertian gain at work-plane distance `d`, receiver facing up:
/// `cos(phi) = cos(psi) = Z / l`. With `apply_fov`, incidence beyond the
/// field of view yields zero.
pub fn gain_full(fe: &OpticalFrontEnd, height: f64, d: f64, apply_fov: bool) -> Result<f64> {
    fe.validate()?;
    if !(height > 0.0 && d >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need height > 0 and d >= 0, got Z={height}, d={d}"
        )));
    }
    let m = lambertian_order(fe.half_angle)?;
    let l2 = d * d + height * height;
    let l = l2.sqrt();
    let cos_psi = height / l;
    if apply_fov && cos_psi < fe.fov.cos() {
        return Ok(0.0);
    }
    Ok(fe.conversion
        * (m + 1.0)
        * fe.pd_area
        * fe.lens_index.powi(2)
        * cos_psi.powf(m)
        * cos_psi
        * fe.responsivity
        * fe.tia_gain
        / (2.0 * std::f64::consts::PI * l2 * fe.fov.sin().powi(2)))
}

impl ChannelConstants {
    /// Simplified power-law gain `K l^-(m+3)` at emitter-receiver distance `l`.
    pub fn gain(&self, l: f64) -> Result<f64> {
        if l < self.height {
            return Err(Error::InvalidParameter(format!(
                "distance l={l} below ceiling height {}; receivers sit on the work plane",
                self.height
            )));
        }
        Ok(self.gain_k * l.powf(-(self.lambertian_m + 3.0)))
    }

    /// Gain at work-plane offset `d` from the fixture, `l = sqrt(d^2 + Z^2)`.
    pub fn gain_at_offset(&self, d2: f64) -> f64 {
        self.gain_k * (d2 + self.height * self.height).powf(-0.5 * (self.lambertian_m + 3.0))
    }

    /// SNR scale `zeta = alpha^2 I_DC^2 K^2 / sigma^2` of the selection
    /// closed forms.
    pub fn zeta(&self, drive: &DriveConfig) -> f64 {
        drive.snr_coefficient() * self.gain_k * self.gain_k
    }
}

/// Gains from every fixture to the work-plane point `p`.
pub fn gain_vector(layout: &TransmitterLayout, cc: &ChannelConstants, p: [f64; 2]) -> Vec<f64> {
    layout
        .positions()
        .iter()
        .map(|t| cc.gain_at_offset((p[0] - t[0]).powi(2) + (p[1] - t[1]).powi(2)))
        .collect()
}

/// Peak SNR `alpha^2 I_DC^2 (w^T h)^2 / sigma^2`.
pub fn peak_snr(w: &BeamVector, gains: &[f64], drive: &DriveConfig) -> Result<f64> {
    if w.len() != gains.len() {
        return Err(Error::InvalidParameter(format!(
            "weight/gain length mismatch: {} vs {}",
            w.len(),
            gains.len()
        )));
    }
    let dot: f64 = w.weights().iter().zip(gains).map(|(w, h)| w * h).sum();
    Ok(drive.snr_coefficient() * dot * dot)
}
