//! Problem instances and the density machinery built on them: output
//! densities, their derivatives and the marginal information densities for
//! the scalar channel, the radial density `g_n` for shell inputs, and the
//! tilted density used with a power constraint.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::specfun::{bessel_ratio, ln_gamma, log_radial_kernel, log_shell_term};

/// Differential entropy of a standard normal, ½ log(2πe).
pub const H_Z: f64 = 1.418_938_533_204_672_7;

/// Tolerance on Σp = 1 for in-memory inputs.
const PROB_SUM_TOL: f64 = 1e-12;
/// Looser tolerance accepted when loading serialized inputs, which carry
/// 12 significant digits; loaded probabilities are renormalized.
const LOAD_SUM_TOL: f64 = 1e-9;
/// Half-width of the Gaussian window used in scalar integrals.
const TAIL: f64 = 12.0;

pub(crate) const DEFAULT_QUAD_TOL: f64 = 1e-12;

#[inline]
fn ln_sqrt_2pi() -> f64 {
    0.5 * (2.0 * PI).ln()
}

pub(crate) fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Dimension, amplitude and optional average-power constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub n: u32,
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
}

impl ChannelConfig {
    pub fn new(n: u32, amplitude: f64, power: Option<f64>) -> Result<Self> {
        let cfg = Self {
            n,
            amplitude,
            power,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn scalar(amplitude: f64) -> Result<Self> {
        Self::new(1, amplitude, None)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return domain("dimension n must be at least 1");
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return domain(format!("amplitude must be positive, got {}", self.amplitude));
        }
        if let Some(p) = self.power {
            if !(p > 0.0 && p.is_finite()) {
                return domain(format!("power must be positive, got {p}"));
            }
            if self.n != 1 {
                return domain("a power constraint is only supported for n = 1");
            }
        }
        Ok(())
    }
}

fn check_probs(probs: &[f64], tol: f64) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::Invalid("distribution has no mass points".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(Error::Invalid(format!("probability {p} is not positive")));
    }
    let s: f64 = probs.iter().sum();
    if (s - 1.0).abs() > tol {
        return Err(Error::Invalid(format!("probabilities sum to {s}, not 1")));
    }
    Ok(())
}

fn check_ascending(xs: &[f64], what: &str) -> Result<()> {
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(Error::Invalid(format!("{what} {x} is not finite")));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid(format!("{what}s must be strictly ascending")));
    }
    Ok(())
}

/// A discrete scalar input law. Points are strictly ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteInput {
    points: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteInput {
    /// Validates a symmetric law: the point set is closed under negation and
    /// mirrored points carry equal mass.
    pub fn new(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let d = Self::new_asymmetric(points, probs)?;
        d.check_symmetric(1e-12)?;
        Ok(d)
    }

    /// Validates everything except symmetry.
    pub fn new_asymmetric(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if points.len() != probs.len() {
            return Err(Error::Invalid(format!(
                "{} points but {} probabilities",
                points.len(),
                probs.len()
            )));
        }
        check_ascending(&points, "point")?;
        check_probs(&probs, PROB_SUM_TOL)?;
        Ok(Self { points, probs })
    }

    /// Builds a symmetric law from its nonnegative half. A location `u > 0`
    /// with weight `w` becomes ±u with w/2 each; `u = 0` keeps weight w.
    pub fn from_half(half: &[f64], weights: &[f64]) -> Result<Self> {
        if half.len() != weights.len() {
            return Err(Error::Invalid("half locations and weights differ in length".into()));
        }
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(2 * half.len());
        for (&u, &w) in half.iter().zip(weights) {
            if u < 0.0 {
                return Err(Error::Invalid(format!("half location {u} is negative")));
            }
            if u == 0.0 {
                pairs.push((0.0, w));
            } else {
                pairs.push((u, 0.5 * w));
                pairs.push((-u, 0.5 * w));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (points, probs) = pairs.into_iter().unzip();
        Self::new(points, probs)
    }

    /// Symmetric two-point law on ±a.
    pub fn binary(a: f64) -> Result<Self> {
        Self::new(vec![-a, a], vec![0.5, 0.5])
    }

    pub fn point_mass(x: f64) -> Self {
        Self {
            points: vec![x],
            probs: vec![1.0],
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.points.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn second_moment(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.probs)
            .map(|(x, p)| p * x * x)
            .sum()
    }

    /// Smallest gap between adjacent mass points, `None` for a point mass.
    pub fn min_gap(&self) -> Option<f64> {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .min_by(f64::total_cmp)
    }

    pub fn check_symmetric(&self, tol: f64) -> Result<()> {
        let k = self.points.len();
        let scale = self.max_abs().max(1.0);
        for i in 0..k {
            let j = k - 1 - i;
            if (self.points[i] + self.points[j]).abs() > tol * scale
                || (self.probs[i] - self.probs[j]).abs() > tol
            {
                return Err(Error::Invalid(format!(
                    "input is not symmetric: ({}, {}) vs ({}, {})",
                    self.points[i], self.probs[i], self.points[j], self.probs[j]
                )));
            }
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.check_symmetric(1e-12).is_ok()
    }

    /// Nonnegative half: locations ascending and their total weights.
    pub fn half(&self) -> (Vec<f64>, Vec<f64>) {
        let mut u = Vec::new();
        let mut w = Vec::new();
        for (&x, &p) in self.points.iter().zip(&self.probs) {
            if x == 0.0 {
                u.push(0.0);
                w.push(p);
            } else if x > 0.0 {
                u.push(x);
                w.push(2.0 * p);
            }
        }
        (u, w)
    }
}

/// Radial law of a spherically symmetric input in n ≥ 2 dimensions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellInput {
    radii: Vec<f64>,
    probs: Vec<f64>,
}

impl ShellInput {
    pub fn new(radii: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if radii.len() != probs.len() {
            return Err(Error::Invalid(format!(
                "{} radii but {} probabilities",
                radii.len(),
                probs.len()
            )));
        }
        check_ascending(&radii, "radius")?;
        if radii.first().is_some_and(|r| *r < 0.0) {
            return Err(Error::Invalid("radii must be nonnegative".into()));
        }
        check_probs(&probs, PROB_SUM_TOL)?;
        Ok(Self { radii, probs })
    }

    pub fn single(r: f64) -> Result<Self> {
        Self::new(vec![r], vec![1.0])
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.last().copied().unwrap_or(0.0)
    }
}

/// Lagrange multiplier and threshold for the tilted density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltedParams {
    pub lambda: f64,
    pub kappa: f64,
}

impl TiltedParams {
    pub fn new(lambda: f64, kappa: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&lambda) {
            return domain(format!("lambda must lie in [0, 1/2), got {lambda}"));
        }
        if !(kappa > 0.0) {
            return domain(format!("kappa must be positive, got {kappa}"));
        }
        Ok(Self { lambda, kappa })
    }
}

/// An input law of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Scalar(DiscreteInput),
    Shell { n: u32, input: ShellInput },
}

impl Witness {
    pub fn support_size(&self) -> usize {
        match self {
            Witness::Scalar(d) => d.len(),
            Witness::Shell { input, .. } => input.len(),
        }
    }

    pub fn dimension(&self) -> u32 {
        match self {
            Witness::Scalar(_) => 1,
            Witness::Shell { n, .. } => *n,
        }
    }
}

/// On-disk form shared by both input kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub kind: String,
    pub n: u32,
    pub points: Vec<f64>,
    pub probs: Vec<f64>,
}

impl From<&Witness> for InputFile {
    fn from(w: &Witness) -> Self {
        match w {
            Witness::Scalar(d) => InputFile {
                kind: "scalar".into(),
                n: 1,
                points: d.points.clone(),
                probs: d.probs.clone(),
            },
            Witness::Shell { n, input } => InputFile {
                kind: "shell".into(),
                n: *n,
                points: input.radii.clone(),
                probs: input.probs.clone(),
            },
        }
    }
}

impl InputFile {
    /// Validates and converts. Probabilities within 1e-9 of summing to one are
    /// renormalized; symmetry is checked to 1e-9 unless `allow_asymmetric`.
    pub fn into_witness(self, allow_asymmetric: bool) -> Result<Witness> {
        if self.points.len() != self.probs.len() {
            return Err(Error::Invalid("points and probs differ in length".into()));
        }
        check_probs(&self.probs, LOAD_SUM_TOL)?;
        let s: f64 = self.probs.iter().sum();
        let probs: Vec<f64> = self.probs.iter().map(|p| p / s).collect();
        match self.kind.as_str() {
            "scalar" => {
                if self.n != 1 {
                    return Err(Error::Invalid(format!("scalar input with n = {}", self.n)));
                }
                let d = DiscreteInput::new_asymmetric(self.points, probs)?;
                if !allow_asymmetric {
                    d.check_symmetric(1e-9)?;
                }
                Ok(Witness::Scalar(d))
            }
            "shell" => {
                if self.n < 2 {
                    return Err(Error::Invalid("shell inputs need n >= 2".into()));
                }
                Ok(Witness::Shell {
                    n: self.n,
                    input: ShellInput::new(self.points, probs)?,
                })
            }
            other => Err(Error::Invalid(format!("unknown input kind '{other}'"))),
        }
    }
}

/// Parses a JSON input description.
pub fn load_input(json: &str, allow_asymmetric: bool) -> Result<Witness> {
    let file: InputFile =
        serde_json::from_str(json).map_err(|e| Error::Invalid(e.to_string()))?;
    file.into_witness(allow_asymmetric)
}

// ---------------------------------------------------------------------------
// scalar channel

/// log f_Y(y).
pub fn log_output_pdf(input: &DiscreteInput, y: f64) -> f64 {
    let terms = input
        .points
        .iter()
        .zip(&input.probs)
        .map(move |(x, p)| p.ln() - 0.5 * (y - x) * (y - x));
    log_sum_exp(terms) - ln_sqrt_2pi()
}

/// Output density f_Y(y) = E[φ(y − X)].
pub fn output_pdf(input: &DiscreteInput, y: f64) -> f64 {
    log_output_pdf(input, y).exp()
}

/// f_Y'(y) = E[(X − y) φ(y − X)].
pub fn output_pdf_deriv(input: &DiscreteInput, y: f64) -> f64 {
    let c = (-ln_sqrt_2pi()).exp();
    input
        .points
        .iter()
        .zip(&input.probs)
        .map(|(x, p)| p * (x - y) * (-0.5 * (y - x) * (y - x)).exp())
        .sum::<f64>()
        * c
}

/// Information density i(x) = ∫ φ(y − x) log(1/f_Y(y)) dy − h(Z), with the
/// adaptive quadrature held to `tol`.
pub fn marginal_info_density_tol(input: &DiscreteInput, x: f64, tol: f64) -> Result<f64> {
    let c = (-ln_sqrt_2pi()).exp();
    let v = integrate_adaptive(
        |t| -c * (-0.5 * t * t).exp() * log_output_pdf(input, x + t),
        -TAIL,
        TAIL,
        tol,
        8,
    )?;
    Ok(v.value - H_Z)
}

pub fn marginal_info_density(input: &DiscreteInput, x: f64) -> Result<f64> {
    marginal_info_density_tol(input, x, DEFAULT_QUAD_TOL)
}

/// I(X;Y) = Σ pᵢ i(xᵢ).
pub fn mutual_information(input: &DiscreteInput) -> Result<f64> {
    let mut s = 0.0;
    for (&x, &p) in input.points.iter().zip(&input.probs) {
        s += p * marginal_info_density(input, x)?;
    }
    Ok(s)
}

/// e^{λy²} f_Y(y) − κ.
pub fn tilted_output(input: &DiscreteInput, params: TiltedParams, y: f64) -> f64 {
    (params.lambda * y * y + log_output_pdf(input, y)).exp() - params.kappa
}

// ---------------------------------------------------------------------------
// vector channel, radial form

/// νₙ = n/2 + log(2^{n/2−1} Γ(n/2)).
pub fn nu_n(n: u32) -> f64 {
    let h = 0.5 * n as f64;
    h + (h - 1.0) * std::f64::consts::LN_2 + ln_gamma(h)
}

fn check_shell_args(n: u32, x: f64) -> Result<()> {
    if n < 2 {
        return domain("shell operations need n >= 2");
    }
    if !(x > 0.0) {
        return domain(format!("radial argument must be positive, got {x}"));
    }
    Ok(())
}

fn log_shell_pdf_sqrt(n: u32, input: &ShellInput, s: f64) -> f64 {
    let order = 0.5 * n as f64 - 1.0;
    let terms = input
        .radii
        .iter()
        .zip(&input.probs)
        .map(move |(r, p)| p.ln() + log_shell_term(order, *r, s));
    log_sum_exp(terms)
}

/// log gₙ(x).
pub fn log_shell_output_pdf(n: u32, input: &ShellInput, x: f64) -> Result<f64> {
    check_shell_args(n, x)?;
    Ok(log_shell_pdf_sqrt(n, input, x.sqrt()))
}

/// gₙ(x) = Σ pᵢ 2 f_{χ²ₙ}(x | rᵢ) / x^{n/2−1}.
pub fn shell_output_pdf(n: u32, input: &ShellInput, x: f64) -> Result<f64> {
    Ok(log_shell_output_pdf(n, input, x)?.exp())
}

/// dgₙ/dx.
pub fn shell_output_pdf_deriv(n: u32, input: &ShellInput, x: f64) -> Result<f64> {
    check_shell_args(n, x)?;
    let order = 0.5 * n as f64 - 1.0;
    let s = x.sqrt();
    let mut acc = 0.0;
    for (&r, &p) in input.radii.iter().zip(&input.probs) {
        let e = log_shell_term(order, r, s).exp();
        // (r/√x) I_{ν+1}/I_ν = r² ρ(z)/z with z = r√x
        let br = bessel_ratio(order, r * s);
        acc += p * 0.5 * e * (r * r * br.ratio_over_z - 1.0);
    }
    Ok(acc)
}

/// Integration window in t = √x for a shell at radius r.
pub(crate) fn radial_window(n: u32, r: f64) -> (f64, f64) {
    ((r - TAIL).max(0.0), r + (n as f64).sqrt() + TAIL)
}

/// iₙ(r) = ∫ f_{χ²ₙ}(x | r) log(1/gₙ(x)) dx, held to `tol`.
pub fn shell_info_density_tol(n: u32, input: &ShellInput, r: f64, tol: f64) -> Result<f64> {
    if n < 2 {
        return domain("shell operations need n >= 2");
    }
    if !(r >= 0.0) {
        return domain(format!("radius must be nonnegative, got {r}"));
    }
    let (lo, hi) = radial_window(n, r);
    let v = integrate_adaptive(
        |t| {
            if t <= 0.0 {
                return 0.0;
            }
            -log_radial_kernel(n, r, t).exp() * log_shell_pdf_sqrt(n, input, t)
        },
        lo,
        hi,
        tol,
        8,
    )?;
    Ok(v.value)
}

pub fn shell_info_density(n: u32, input: &ShellInput, r: f64) -> Result<f64> {
    shell_info_density_tol(n, input, r, DEFAULT_QUAD_TOL)
}

/// Cₙ-style mutual information of a shell input: Σ pᵢ iₙ(rᵢ) − νₙ.
pub fn shell_mutual_information(n: u32, input: &ShellInput) -> Result<f64> {
    let mut s = 0.0;
    for (&r, &p) in input.radii.iter().zip(&input.probs) {
        s += p * shell_info_density(n, input, r)?;
    }
    Ok(s - nu_n(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Box–Muller
    fn normal(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    #[test]
    fn config_validation() {
        assert!(ChannelConfig::new(1, 1.0, None).is_ok());
        assert!(ChannelConfig::new(2, 1.0, Some(1.0)).is_err());
        assert!(ChannelConfig::new(1, 0.0, None).is_err());
        assert!(ChannelConfig::new(1, 1.0, Some(-1.0)).is_err());
    }

    #[test]
    fn input_validation() {
        assert!(DiscreteInput::new(vec![-1.0, 1.0], vec![0.5, 0.5]).is_ok());
        assert!(DiscreteInput::new(vec![-1.0, 1.0], vec![0.4, 0.6]).is_err());
        assert!(DiscreteInput::new(vec![-1.0, 2.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteInput::new_asymmetric(vec![-1.0, 2.0], vec![0.5, 0.5]).is_ok());
        assert!(DiscreteInput::new(vec![1.0, -1.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteInput::new(vec![-1.0, 1.0], vec![0.5, 0.49]).is_err());
        assert!(DiscreteInput::new(vec![0.0], vec![1.0]).is_ok());
        assert!(ShellInput::new(vec![-0.1], vec![1.0]).is_err());
        assert!(TiltedParams::new(0.5, 0.1).is_err());
    }

    #[test]
    fn half_roundtrip() {
        let d = DiscreteInput::from_half(&[0.0, 2.0], &[0.4, 0.6]).unwrap();
        assert_eq!(d.points(), &[-2.0, 0.0, 2.0]);
        assert_eq!(d.probs(), &[0.3, 0.4, 0.3]);
        let (u, w) = d.half();
        assert_eq!(u, vec![0.0, 2.0]);
        assert_eq!(w, vec![0.4, 0.6]);
    }

    #[test]
    fn json_loading() {
        let w = load_input(r#"{"kind":"scalar","n":1,"points":[-1,1],"probs":[0.5,0.5]}"#, false)
            .unwrap();
        assert_eq!(w.support_size(), 2);
        let asym = r#"{"kind":"scalar","n":1,"points":[-1,2],"probs":[0.5,0.5]}"#;
        assert!(load_input(asym, false).is_err());
        assert!(load_input(asym, true).is_ok());
        assert!(load_input("{not json", false).is_err());
        let shell = r#"{"kind":"shell","n":2,"points":[0.5],"probs":[1.0]}"#;
        let w = load_input(shell, false).unwrap();
        assert_eq!(w.dimension(), 2);
        let back = serde_json::to_string(&InputFile::from(&w)).unwrap();
        assert_eq!(load_input(&back, false).unwrap(), w);
        // 12 significant digits
        let rounded = r#"{"kind":"scalar","n":1,"points":[-2,0,2],"probs":[0.333333333333,0.333333333333,0.333333333333]}"#;
        assert!(load_input(rounded, false).is_ok());
    }

    #[test]
    fn output_pdf_examples() {
        let c = 1.0 / (2.0 * PI).sqrt();
        let pm = DiscreteInput::point_mass(0.0);
        assert!((output_pdf(&pm, 0.0) - c).abs() < 1e-15);
        let b = DiscreteInput::binary(1.0).unwrap();
        assert!((output_pdf(&b, 0.0) - c * (-0.5f64).exp()).abs() < 1e-15);
        assert!((output_pdf(&b, 0.0) - 0.2419707).abs() < 1e-7);
        let total = integrate_adaptive(|y| output_pdf(&b, y), -11.0, 11.0, 1e-12, 8).unwrap();
        assert!((total.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn output_pdf_deriv_examples() {
        let pm = DiscreteInput::point_mass(0.0);
        assert!((output_pdf_deriv(&pm, 1.0) + 0.2419707245).abs() < 1e-9);
        let d = DiscreteInput::from_half(&[0.0, 0.7, 2.0], &[0.2, 0.5, 0.3]).unwrap();
        assert!(output_pdf_deriv(&d, 0.0).abs() < 1e-16);
        let h = 1e-5;
        let mut y = -4.0;
        while y <= 4.0 {
            let fd = (output_pdf(&d, y + h) - output_pdf(&d, y - h)) / (2.0 * h);
            assert!((fd - output_pdf_deriv(&d, y)).abs() < 1e-8, "y={y}");
            assert!((output_pdf(&d, y) - output_pdf(&d, -y)).abs() < 1e-15);
            assert!((output_pdf_deriv(&d, y) + output_pdf_deriv(&d, -y)).abs() < 1e-15);
            y += 0.173;
        }
    }

    #[test]
    fn info_density_point_mass_is_zero() {
        let pm = DiscreteInput::point_mass(0.0);
        assert!(marginal_info_density(&pm, 0.0).unwrap().abs() < 1e-12);
        assert!(mutual_information(&pm).unwrap().abs() < 1e-12);
    }

    #[test]
    fn info_density_even() {
        let d = DiscreteInput::from_half(&[0.0, 1.3], &[0.35, 0.65]).unwrap();
        for x in [0.1, 0.5, 1.0, 1.3, 2.0] {
            let a = marginal_info_density(&d, x).unwrap();
            let b = marginal_info_density(&d, -x).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn info_density_matches_monte_carlo() {
        let b = DiscreteInput::binary(1.0).unwrap();
        let exact = marginal_info_density(&b, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = 400_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..m {
            let y = 1.0 + normal(&mut rng);
            // closed-form two-term density, independent of the library path
            let f = ((-0.5 * (y - 1.0) * (y - 1.0)).exp() + (-0.5 * (y + 1.0) * (y + 1.0)).exp())
                / (2.0 * (2.0 * PI).sqrt());
            let v = -f.ln() - 0.5 * (2.0 * PI * std::f64::consts::E).ln();
            s += v;
            s2 += v * v;
        }
        let mean = s / m as f64;
        let sd = ((s2 / m as f64 - mean * mean) / m as f64).sqrt();
        assert!((mean - exact).abs() < 3.0 * sd + 1e-12, "{mean} vs {exact} (sd {sd})");
    }

    #[test]
    fn mutual_information_matches_entropy_difference() {
        let b = DiscreteInput::binary(1.0).unwrap();
        let mi = mutual_information(&b).unwrap();
        // h(Y) by a plain composite Simpson rule on the explicit density
        let f = |y: f64| {
            ((-0.5 * (y - 1.0) * (y - 1.0)).exp() + (-0.5 * (y + 1.0) * (y + 1.0)).exp())
                / (2.0 * (2.0 * PI).sqrt())
        };
        let (a, bnd, m) = (-14.0, 14.0, 40_000);
        let h = (bnd - a) / m as f64;
        let mut hy = 0.0;
        for i in 0..=m {
            let y = a + i as f64 * h;
            let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let fy = f(y);
            hy -= w * fy * fy.ln();
        }
        hy *= h / 3.0;
        assert!((mi - (hy - H_Z)).abs() < 1e-8, "{mi} vs {}", hy - H_Z);
    }

    #[test]
    fn mutual_information_limits() {
        let b = DiscreteInput::binary(10.0).unwrap();
        let mi = mutual_information(&b).unwrap();
        assert!((mi - 2f64.ln()).abs() < 1e-3);
        for a in [0.3, 1.0, 2.5] {
            let d = DiscreteInput::from_half(&[0.0, a], &[0.3, 0.7]).unwrap();
            let mi = mutual_information(&d).unwrap();
            assert!(mi >= 0.0 && mi <= 0.5 * (1.0 + a * a).ln() + 1e-9);
            assert!(mi <= 3f64.ln());
        }
    }

    #[test]
    fn tilted_output_examples() {
        let d = DiscreteInput::binary(1.0).unwrap();
        let p0 = TiltedParams::new(0.0, 0.1).unwrap();
        assert!((tilted_output(&d, p0, 0.7) - (output_pdf(&d, 0.7) - 0.1)).abs() < 1e-15);
        let p = TiltedParams::new(0.3, 0.1).unwrap();
        assert!((tilted_output(&d, p, 1.9) - tilted_output(&d, p, -1.9)).abs() < 1e-14);
    }

    #[test]
    fn nu_values() {
        assert!((nu_n(2) - 1.0).abs() < 1e-15);
        let direct = 1.5 + (2f64.sqrt() * PI.sqrt() / 2.0).ln();
        assert!((nu_n(3) - direct).abs() < 1e-14);
        assert!((nu_n(3) - 1.7257913526).abs() < 1e-9);
    }

    #[test]
    fn shell_pdf_closed_form_n2() {
        let pm = ShellInput::single(0.0).unwrap();
        for x in [0.01, 0.5, 2.0, 10.0, 60.0] {
            let g = shell_output_pdf(2, &pm, x).unwrap();
            assert!((g / (-0.5 * x).exp() - 1.0).abs() < 1e-13);
            let dg = shell_output_pdf_deriv(2, &pm, x).unwrap();
            assert!((dg / (-0.5 * (-0.5 * x).exp()) - 1.0).abs() < 1e-13);
            assert!(dg < 0.0);
        }
        assert!(shell_output_pdf(2, &pm, 0.0).is_err());
        assert!(shell_output_pdf(1, &pm, 1.0).is_err());
    }

    #[test]
    fn shell_pdf_normalization() {
        let inputs = [
            ShellInput::single(0.0).unwrap(),
            ShellInput::new(vec![0.5, 2.0], vec![0.3, 0.7]).unwrap(),
            ShellInput::single(4.0).unwrap(),
        ];
        for n in 2..=6u32 {
            let nu = 0.5 * n as f64 - 1.0;
            for s in &inputs {
                // x = t², dx = 2t dt
                let v = integrate_adaptive(
                    |t| {
                        if t <= 0.0 {
                            return 0.0;
                        }
                        let x = t * t;
                        x.powf(nu) * 0.5 * shell_output_pdf(n, s, x).unwrap() * 2.0 * t
                    },
                    0.0,
                    s.max_radius() + 16.0,
                    1e-12,
                    16,
                )
                .unwrap();
                assert!((v.value - 1.0).abs() < 1e-7, "n={n} got {}", v.value);
            }
        }
    }

    #[test]
    fn shell_deriv_matches_finite_difference() {
        let s = ShellInput::new(vec![0.0, 1.5, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        for n in [2u32, 3, 4, 7] {
            let mut x = 0.1f64;
            while x <= 50.0 {
                let h = 1e-5 * x.max(1.0);
                let fd = (shell_output_pdf(n, &s, x + h).unwrap()
                    - shell_output_pdf(n, &s, x - h).unwrap())
                    / (2.0 * h);
                let an = shell_output_pdf_deriv(n, &s, x).unwrap();
                assert!((fd - an).abs() < 1e-7, "n={n} x={x}: {fd} vs {an}");
                x *= 1.37;
            }
        }
    }

    fn unit_sphere(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let v: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.into_iter().map(|a| a / norm).collect()
    }

    #[test]
    fn shell_pdf_matches_spherical_monte_carlo() {
        // gₙ(‖y‖²) = |S^{n−1}| (2π)^{−n/2} E_U[exp(−‖y − rU‖²/2)]
        let n = 3usize;
        let r = 1.0;
        let s = ShellInput::single(r).unwrap();
        let area = 4.0 * PI; // |S²|
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for x in [0.3f64, 1.0, 2.5] {
            let y = [x.sqrt(), 0.0, 0.0];
            let m = 200_000;
            let (mut acc, mut acc2) = (0.0, 0.0);
            for _ in 0..m {
                let u = unit_sphere(&mut rng, n);
                let d2: f64 = (0..n).map(|i| (y[i] - r * u[i]).powi(2)).sum();
                let v = area * (2.0 * PI).powf(-1.5) * (-0.5 * d2).exp();
                acc += v;
                acc2 += v * v;
            }
            let mean = acc / m as f64;
            let sd = ((acc2 / m as f64 - mean * mean) / m as f64).sqrt();
            let g = shell_output_pdf(3, &s, x).unwrap();
            assert!((mean - g).abs() < 3.0 * sd, "x={x}: {mean} vs {g}");
        }
    }

    #[test]
    fn shell_info_density_matches_monte_carlo() {
        let n = 3usize;
        let r = 1.2;
        let s = ShellInput::new(vec![0.4, r], vec![0.4, 0.6]).unwrap();
        let exact = shell_info_density(3, &s, r).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = 200_000;
        let (mut acc, mut acc2) = (0.0, 0.0);
        for _ in 0..m {
            let mut x2 = 0.0;
            for i in 0..n {
                let z = normal(&mut rng) + if i == 0 { r } else { 0.0 };
                x2 += z * z;
            }
            let v = -shell_output_pdf(3, &s, x2).unwrap().ln();
            acc += v;
            acc2 += v * v;
        }
        let mean = acc / m as f64;
        let sd = ((acc2 / m as f64 - mean * mean) / m as f64).sqrt();
        assert!((mean - exact).abs() < 3.0 * sd, "{mean} vs {exact}");
    }

    #[test]
    fn shell_mutual_information_bounds() {
        for (n, a) in [(2u32, 0.5), (3, 1.0), (4, 2.0)] {
            let s = ShellInput::single(a).unwrap();
            let mi = shell_mutual_information(n, &s).unwrap();
            assert!(mi > 0.0);
            assert!(mi <= 0.5 * n as f64 * (1.0 + a * a).ln() + 1e-9, "n={n}: {mi}");
        }
        let origin = ShellInput::single(0.0).unwrap();
        assert!(shell_mutual_information(2, &origin).unwrap().abs() < 1e-10);
    }
}
