//! Special-function helpers for the outage closed forms.

use crate::{Error, Result};

/// Upper incomplete gamma function at order 3/2.
///
/// Uses the half-integer identity
/// `Gamma(3/2, x) = (sqrt(pi)/2) erfc(sqrt(x)) + sqrt(x) exp(-x)`,
/// which is exact, so accuracy is limited only by `erfc`.
pub fn upper_gamma_3half(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "upper_gamma_3half requires x >= 0, got {x}"
        )));
    }
    let s = x.sqrt();
    Ok(0.5 * std::f64::consts::PI.sqrt() * statrs::function::erf::erfc(s) + s * (-x).exp())
}
