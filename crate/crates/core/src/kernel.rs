//! Smoothing kernels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel used by every smoother in the crate.
///
/// All variants are symmetric, supported on `[-1, 1]`, nonincreasing on
/// `[0, ∞)` and integrate to one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelId {
    /// `15/16 (1 - u²)²` on `|u| < 1`.
    #[default]
    Quartic,
}

impl KernelId {
    /// Evaluates the kernel without input validation.
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        match self {
            KernelId::Quartic => quartic_unchecked(u),
        }
    }
}

#[inline]
fn quartic_unchecked(u: f64) -> f64 {
    let u2 = u * u;
    // |u| = 1 maps to zero as well, so the support test is closed.
    if u2 >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u2;
        0.9375 * t * t
    }
}

/// Quartic (biweight) kernel `(15/16)(1 - u²)²` for `|u| ≤ 1`, else 0.
pub fn quartic_kernel(u: f64) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::NonFinite {
            what: "kernel argument",
            value: u,
        });
    }
    Ok(quartic_unchecked(u))
}

/// Scaled kernel `K((u - center)/h) / h`.
pub fn kernel_weight(u: f64, center: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidBandwidth(h));
    }
    Ok(quartic_kernel((u - center) / h)? / h)
}
