//! Special functions shared by the channel models: log-gamma, the
//! exponentially scaled modified Bessel function of the first kind and the
//! noncentral chi-squared density.
//!
//! Everything that can overflow is carried in log space and exponentiated at
//! the boundary.

use std::f64::consts::{LN_2, PI};

use crate::error::{domain, Result};

/// A value kept as `value * exp(log_scale)` so that large or tiny magnitudes
/// survive intermediate arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub value: f64,
    pub log_scale: f64,
}

impl KernelEval {
    pub fn ln(&self) -> f64 {
        self.value.ln() + self.log_scale
    }

    /// `value * exp(log_scale)`; may overflow to infinity or underflow to 0.
    pub fn reconstruct(&self) -> f64 {
        self.value * self.log_scale.exp()
    }
}

/// log Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma requires a finite positive argument, got {x}"));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

// Below this argument the power series is used; above it the large-argument
// expansion. The expansion's smallest term is roughly e^{-2x}, so 30 keeps it
// far below double precision, and the ν² term keeps it inside its region of
// rapid decrease for larger orders.
fn asymptotic_threshold(order: f64) -> f64 {
    30.0_f64.max(25.0 + 0.5 * order * order)
}

/// Normalised power series Σ_k (x²/4)^k Γ(ν+1) / (k! Γ(k+ν+1)), returned as
/// (mantissa, log of the extra scale factor applied to avoid overflow).
fn series_sum(order: f64, x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut log_scale = 0.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + order));
        sum += term;
        if term < 1e-17 * sum && k > 0.5 * x {
            break;
        }
        if sum > 1e200 {
            sum *= 1e-200;
            term *= 1e-200;
            log_scale += 200.0 * std::f64::consts::LN_10;
        }
    }
    (sum, log_scale)
}

fn asymptotic_scaled(order: f64, x: f64) -> f64 {
    let mu = 4.0 * order * order;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (kf * 8.0 * x);
        if term.abs() > prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// e^{-x} I_ν(x) for ν ≥ 0 and x ≥ 0.
pub fn bessel_i_scaled(order: f64, x: f64) -> Result<f64> {
    if !(order >= 0.0) || !(x >= 0.0) || !order.is_finite() || !x.is_finite() {
        return domain(format!(
            "bessel_i_scaled requires order >= 0 and x >= 0, got order={order}, x={x}"
        ));
    }
    Ok(ive(order, x))
}

pub(crate) fn ive(order: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if order == 0.0 { 1.0 } else { 0.0 };
    }
    if x >= asymptotic_threshold(order) {
        return asymptotic_scaled(order, x);
    }
    let (sum, log_scale) = series_sum(order, x);
    let lp = order * (0.5 * x).ln() - x - ln_gamma(order + 1.0) + log_scale;
    (lp + sum.ln()).exp()
}

/// log( I_ν(z) / z^ν ), finite down to z = 0 where it equals
/// −ν log 2 − log Γ(ν+1).
pub(crate) fn log_bessel_i_over_pow(order: f64, z: f64) -> f64 {
    let base = -order * LN_2 - ln_gamma(order + 1.0);
    if z == 0.0 {
        return base;
    }
    if z < asymptotic_threshold(order) {
        let (sum, log_scale) = series_sum(order, z);
        base + sum.ln() + log_scale
    } else {
        asymptotic_scaled(order, z).ln() + z - order * z.ln()
    }
}

/// Ratio ρ(z) = I_{ν+1}(z)/I_ν(z) with ρ(z)/z and ρ'(z).
#[derive(Debug, Clone, Copy)]
pub(crate) struct BesselRatio {
    pub ratio: f64,
    pub ratio_over_z: f64,
    pub deriv: f64,
}

pub(crate) fn bessel_ratio(order: f64, z: f64) -> BesselRatio {
    if z == 0.0 {
        let roz = 0.5 / (order + 1.0);
        return BesselRatio {
            ratio: 0.0,
            ratio_over_z: roz,
            deriv: roz,
        };
    }
    let (ratio, ratio_over_z) = if z < asymptotic_threshold(order + 1.0) {
        let (s1, l1) = series_sum(order + 1.0, z);
        let (s0, l0) = series_sum(order, z);
        let roz = 0.5 / (order + 1.0) * (s1 / s0) * (l1 - l0).exp();
        (roz * z, roz)
    } else {
        let r = asymptotic_scaled(order + 1.0, z) / asymptotic_scaled(order, z);
        (r, r / z)
    };
    let deriv = 1.0 - ratio * ratio - (2.0 * order + 1.0) * ratio_over_z;
    BesselRatio {
        ratio,
        ratio_over_z,
        deriv,
    }
}

/// −(t² + r²)/2 + log( I_ν(rt) / (rt)^ν ), computed without forming the
/// large exponentials separately.
pub(crate) fn log_shell_term(order: f64, r: f64, t: f64) -> f64 {
    let z = r * t;
    if z < asymptotic_threshold(order) {
        -0.5 * (t * t + r * r) + log_bessel_i_over_pow(order, z)
    } else {
        -0.5 * (t - r) * (t - r) + asymptotic_scaled(order, z).ln() - order * z.ln()
    }
}

/// Scaled Bessel value packaged with its exponential factor: I_ν(x) =
/// value · e^{log_scale}.
pub fn bessel_i_kernel(order: f64, x: f64) -> Result<KernelEval> {
    let value = bessel_i_scaled(order, x)?;
    Ok(KernelEval { value, log_scale: x })
}

/// log of the noncentral χ² density with `n` degrees of freedom and
/// noncentrality r², at x > 0.
pub fn log_noncentral_chi2_pdf(n: u32, r: f64, x: f64) -> Result<f64> {
    if n < 1 {
        return domain("noncentral_chi2_pdf requires n >= 1");
    }
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("noncentral_chi2_pdf requires x > 0, got {x}"));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return domain(format!("noncentral_chi2_pdf requires r >= 0, got {r}"));
    }
    let s = x.sqrt();
    if n == 1 {
        // I_{-1/2}(z) = sqrt(2/(πz)) cosh z
        let a = -0.5 * (s - r) * (s - r);
        let b = -0.5 * (s + r) * (s + r);
        let m = a.max(b);
        let lse = m + ((a - m).exp() + (b - m).exp()).ln();
        return Ok(lse - 0.5 * (2.0 * PI * x).ln() - LN_2);
    }
    let order = 0.5 * n as f64 - 1.0;
    Ok(-LN_2 + order * x.ln() + log_shell_term(order, r, s))
}

/// Noncentral χ² density with `n` degrees of freedom and noncentrality r².
pub fn noncentral_chi2_pdf(n: u32, r: f64, x: f64) -> Result<f64> {
    Ok(log_noncentral_chi2_pdf(n, r, x)?.exp())
}

/// log of the radial density 2t·f_{χ²ₙ}(t²|r) of ‖r·e + Z‖ at t ≥ 0.
pub(crate) fn log_radial_kernel(n: u32, r: f64, t: f64) -> f64 {
    let order = 0.5 * n as f64 - 1.0;
    let lt = if t > 0.0 {
        (n as f64 - 1.0) * t.ln()
    } else {
        f64::NEG_INFINITY
    };
    lt + log_shell_term(order, r, t)
}
