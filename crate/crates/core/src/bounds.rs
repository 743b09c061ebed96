//! Closed-form support-size bounds and the auxiliary constants they are
//! built from: zero-location radii, κ thresholds, the Lagrange multiplier
//! bound and the Tijdeman oscillation bound with its free parameter.

use std::collections::BTreeMap;
use std::f64::consts::{E, LN_2, PI};

use serde::Serialize;

use crate::channel::{nu_n, ChannelConfig, H_Z};
use crate::error::{domain, Error, Result};
use crate::specfun::ln_gamma;

/// Margin added where a radius must strictly exceed its bound.
pub const STRICT_MARGIN: f64 = 1e-9;

fn sqrt_e() -> f64 {
    E.sqrt()
}

/// (a₂, a₁, a₀) of the scalar upper bound.
pub fn scalar_constants() -> (f64, f64, f64) {
    let se = sqrt_e();
    let a2 = 9.0 * E + 6.0 * se + 5.0;
    let a1 = 6.0 * E + 2.0 * se;
    let a0 = E + 2.0 * (4.0 * se + 2.0).ln() + 1.0;
    (a2, a1, a0)
}

/// a₂A² + a₁A + a₀, valid for A ≥ 1.
pub fn scalar_upper_bound(a: f64) -> Result<f64> {
    if !(a >= 1.0) {
        return domain(format!("the scalar upper bound assumes A >= 1, got {a}"));
    }
    let (a2, a1, a0) = scalar_constants();
    Ok(a2 * a * a + a1 * a + a0)
}

/// √(1 + 2A²/(πe)).
pub fn scalar_lower_bound(a: f64) -> f64 {
    (1.0 + 2.0 * a * a / (PI * E)).sqrt()
}

/// Interval containing κ₁ = e^{−C−h(Z)} and, given a capacity, its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kappa1 {
    pub lo: f64,
    pub hi: f64,
    pub point: Option<f64>,
}

pub fn kappa1_interval(a: f64, capacity: Option<f64>) -> Result<Kappa1> {
    if !(a >= 0.0) {
        return domain(format!("amplitude must be nonnegative, got {a}"));
    }
    let lo = (2.0 * PI * E * (1.0 + a * a)).powf(-0.5);
    let hi = (2.0 * PI * E + 4.0 * a * a).powf(-0.5);
    let point = match capacity {
        None => None,
        Some(c) => {
            if !(c >= 0.0) {
                return domain(format!("capacity must be nonnegative, got {c}"));
            }
            let k = (-c - H_Z).exp();
            let slack = 1e-12 * hi;
            if k < lo - slack || k > hi + slack {
                return Err(Error::Inconsistent(format!(
                    "kappa1 = {k} from capacity {c} lies outside [{lo}, {hi}]"
                )));
            }
            Some(k)
        }
    };
    Ok(Kappa1 { lo, hi, point })
}

/// A + √(log(1/(2πκ²))): beyond this radius f_Y − κ is negative.
pub fn scalar_zero_radius(a: f64, kappa: f64) -> Result<f64> {
    let kmax = 1.0 / (2.0 * PI).sqrt();
    if !(kappa > 0.0 && kappa <= kmax * (1.0 + 1e-15)) {
        return domain(format!("kappa must lie in (0, 1/sqrt(2 pi)], got {kappa}"));
    }
    let l = (1.0 / (2.0 * PI * kappa * kappa)).ln().max(0.0);
    Ok(a + l.sqrt())
}

/// The simplified radius 2A + 1 that holds for the capacity-induced κ₁.
pub fn scalar_zero_radius_simplified(a: f64) -> f64 {
    2.0 * a + 1.0
}

/// Value of the oscillation bound and the parameter it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TijdemanBound {
    pub value: f64,
    pub s: f64,
}

fn tijdeman_at(a: f64, r: f64, s: f64) -> f64 {
    let ars = (a + r) * s;
    ((ars + a).powi(2) / 2.0 + 2.0 * a * a + (2.0 + ars / a).ln()) / s.ln()
}

/// Bound on the number of extreme points of f_Y on [−R, R]. With `s` given
/// the formula is evaluated there; otherwise it is minimized over s > 1.
pub fn tijdeman_osc_bound(a: f64, r: f64, s: Option<f64>) -> Result<TijdemanBound> {
    if !(a > 0.0) {
        return domain(format!("amplitude must be positive, got {a}"));
    }
    if !(r > a) {
        return domain(format!("radius {r} must exceed the amplitude {a}"));
    }
    if let Some(s) = s {
        if !(s > 1.0) {
            return domain(format!("Tijdeman parameter must exceed 1, got {s}"));
        }
        return Ok(TijdemanBound {
            value: tijdeman_at(a, r, s),
            s,
        });
    }
    let g = |t: f64| tijdeman_at(a, r, t.exp());
    let (lo, hi) = (0.05f64, 5.0f64);
    let m = 64;
    let grid: Vec<f64> = (0..m)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (m - 1) as f64).exp())
        .collect();
    let (ib, _) = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| (i, g(t)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("non-empty grid");
    let bl = grid[ib.saturating_sub(1)];
    let bh = grid[(ib + 1).min(m - 1)];
    let mut best_t = grid[ib];
    let mut best = g(best_t);
    for (x0, x1) in [(bl, bh), (lo, hi)] {
        let t = golden_section(&g, x0, x1, 1e-8);
        let v = g(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    Ok(TijdemanBound {
        value: best,
        s: best_t.exp(),
    })
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

// ---------------------------------------------------------------------------
// vector channel

fn check_dim(n: u32) -> Result<()> {
    if n < 2 {
        return domain(format!("the vector bounds need n >= 2, got {n}"));
    }
    Ok(())
}

/// log(√π Γ(n/2) / Γ((n−1)/2)).
fn log_gamma_ratio(n: u32) -> f64 {
    let h = 0.5 * n as f64;
    0.5 * PI.ln() + ln_gamma(h) - ln_gamma(h - 0.5)
}

/// (𝔞ₙ₂, 𝔞ₙ₁, 𝔞ₙ₀).
pub fn vector_constants(n: u32) -> Result<(f64, f64, f64)> {
    check_dim(n)?;
    let nf = n as f64;
    let c = 3.0 + 4.0 * E + (2.0 * E + 1.0).sqrt();
    let an2 = 4.0 + 4.0 * E + (8.0 * E + 4.0).sqrt();
    let an1 = c * nf + (32.0 / (nf - 1.0)).sqrt();
    let lg = log_gamma_ratio(n);
    let an0 = 2.0 + lg + c * (0.5 * nf + lg);
    Ok((an2, an1, an0))
}

pub fn vector_upper_bound(n: u32, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return domain(format!("amplitude must be positive, got {a}"));
    }
    let (an2, an1, an0) = vector_constants(n)?;
    Ok(an2 * a * a + an1 * a + an0)
}

/// γₙ = √π / (2^{n/2−1} Γ((n−1)/2)).
pub fn gamma_n(n: u32) -> Result<f64> {
    check_dim(n)?;
    let h = 0.5 * n as f64;
    Ok((0.5 * PI.ln() - (h - 1.0) * LN_2 - ln_gamma(h - 0.5)).exp())
}

/// Smallest κₙ = exp(−Cₙ − νₙ) compatible with Cₙ ≤ (n/2) log(1 + A²).
pub fn vector_kappa_lower(n: u32, a: f64) -> f64 {
    (-0.5 * n as f64 * (1.0 + a * a).ln() - nu_n(n)).exp()
}

/// (A + √(A² + 2 log(γₙ/κₙ)))²: zeros of gₙ − κₙ lie in [0, B].
pub fn vector_zero_radius(n: u32, a: f64, kappa_n: f64) -> Result<f64> {
    let g = gamma_n(n)?;
    if !(kappa_n > 0.0) {
        return domain(format!("kappa_n must be positive, got {kappa_n}"));
    }
    let ratio = g / kappa_n;
    if ratio < 1.0 {
        return Err(Error::Inconsistent(format!(
            "gamma_n / kappa_n = {ratio} is below 1"
        )));
    }
    Ok((a + (a * a + 2.0 * ratio.ln()).sqrt()).powi(2))
}

// ---------------------------------------------------------------------------
// power constraint

/// log(1+P)/(2P) · 1{P < A²}.
pub fn lambda_bound(a: f64, p: f64) -> f64 {
    if p < a * a {
        p.ln_1p() / (2.0 * p)
    } else {
        0.0
    }
}

/// A_P = AP / (P − log(1+P) 1{P < A²}).
pub fn power_amplitude(a: f64, p: f64) -> f64 {
    if p < a * a {
        a * p / (p - p.ln_1p())
    } else {
        a
    }
}

/// (a_P₂, a_P₁, a_P₀) at multiplier bound λ.
pub fn power_constants(lambda: f64) -> (f64, f64, f64) {
    let se = sqrt_e();
    let t = 1.0 + 2.0 * lambda;
    let ap2 = t * (9.0 * E + 6.0 * se + 1.0) + 2.0 * (2.0 - lambda) * (1.0 - 2.0 * lambda);
    let ap1 = t * (6.0 * E + 2.0 * se);
    let ap0 = t * E + 2.0 * ((2.0 + 4.0 * se * t) / (1.0 - 2.0 * lambda)).ln() + 1.0;
    (ap2, ap1, ap0)
}

pub fn power_upper_bound(a: f64, p: f64) -> Result<f64> {
    if !(a >= 1.0) {
        return domain(format!("the power-constrained bound assumes A >= 1, got {a}"));
    }
    if !(p > 0.0) {
        return domain(format!("power must be positive, got {p}"));
    }
    let (ap2, ap1, ap0) = power_constants(lambda_bound(a, p));
    let ap = power_amplitude(a, p);
    Ok(ap2 * ap * ap + ap1 * ap + ap0)
}

/// √(1 + 2 min{A², 3P}/(πe)).
pub fn power_lower_bound(a: f64, p: f64) -> f64 {
    (1.0 + 2.0 * (a * a).min(3.0 * p) / (PI * E)).sqrt()
}

/// Smallest κ_{A,P} compatible with C(A,P) ≤ ½ log(1+P) at multiplier λ.
pub fn power_kappa_lower(p: f64, lambda: f64) -> f64 {
    (lambda * (p + 1.0)).exp() / (2.0 * PI * E * (1.0 + p)).sqrt()
}

/// Radius outside which e^{λy²} f_Y(y) − κ is negative.
pub fn power_zero_radius(a: f64, lambda: f64, kappa: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&lambda) {
        return domain(format!("lambda must lie in [0, 1/2), got {lambda}"));
    }
    let kmax = 1.0 / (2.0 * PI).sqrt();
    if !(kappa > 0.0 && kappa <= kmax * (1.0 + 1e-15)) {
        return domain(format!("kappa must lie in (0, 1/sqrt(2 pi)], got {kappa}"));
    }
    let d = 1.0 - 2.0 * lambda;
    let l = (1.0 / (2.0 * PI * kappa * kappa)).ln().max(0.0);
    Ok(a / d + (l / d + 2.0 * lambda * a * a / (d * d)).sqrt())
}

/// The loosened radius 2A_P + 1.
pub fn power_zero_radius_loosened(a: f64, p: f64) -> f64 {
    2.0 * power_amplitude(a, p) + 1.0
}

// ---------------------------------------------------------------------------
// report

/// Every bound and constant that applies to one channel configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub config: ChannelConfig,
    pub lower: f64,
    pub upper: f64,
    pub kappa: f64,
    #[serde(rename = "B")]
    pub zero_radius: f64,
    pub s_star: f64,
    pub constants: BTreeMap<String, f64>,
}

/// Builds the report matching the shape of `config`. The scalar and power
/// upper bounds are evaluated at max(A, 1); κ is the smallest value the
/// capacity ceiling allows, so the radius is the largest it can be. A power
/// level P ≥ A² cannot bind and yields the amplitude-only report.
pub fn bound_report(config: &ChannelConfig) -> Result<BoundReport> {
    config.validate()?;
    let a = config.amplitude;
    let mut c = BTreeMap::new();
    let report = match (config.n, config.power) {
        (1, power) if power.is_none_or(|p| p >= a * a) => {
            let (a2, a1, a0) = scalar_constants();
            let kappa = kappa1_interval(a, None)?.lo;
            let b = scalar_zero_radius(a, kappa)?;
            let t = tijdeman_osc_bound(a, scalar_zero_radius_simplified(a), None)?;
            c.insert("a2".into(), a2);
            c.insert("a1".into(), a1);
            c.insert("a0".into(), a0);
            c.insert("upper_min".into(), 1.0 + t.value);
            BoundReport {
                config: *config,
                lower: scalar_lower_bound(a),
                upper: scalar_upper_bound(a.max(1.0))?,
                kappa,
                zero_radius: b,
                s_star: t.s,
                constants: c,
            }
        }
        (1, Some(p)) => {
            let lambda = lambda_bound(a, p);
            let (ap2, ap1, ap0) = power_constants(lambda);
            let kappa = power_kappa_lower(p, lambda).min(1.0 / (2.0 * PI).sqrt());
            let b = power_zero_radius(a, lambda, kappa)?;
            c.insert("aP2".into(), ap2);
            c.insert("aP1".into(), ap1);
            c.insert("aP0".into(), ap0);
            c.insert("lambdaP".into(), lambda);
            c.insert("AP".into(), power_amplitude(a, p));
            c.insert("B_loose".into(), power_zero_radius_loosened(a, p));
            BoundReport {
                config: *config,
                lower: power_lower_bound(a, p),
                upper: power_upper_bound(a.max(1.0), p)?,
                kappa,
                zero_radius: b,
                s_star: sqrt_e(),
                constants: c,
            }
        }
        (n, _) => {
            let (an2, an1, an0) = vector_constants(n)?;
            let kappa = vector_kappa_lower(n, a);
            let b = vector_zero_radius(n, a, kappa)?;
            c.insert("an2".into(), an2);
            c.insert("an1".into(), an1);
            c.insert("an0".into(), an0);
            c.insert("nun".into(), nu_n(n));
            c.insert("gamman".into(), gamma_n(n)?);
            BoundReport {
                config: *config,
                lower: 1.0,
                upper: vector_upper_bound(n, a)?,
                kappa,
                zero_radius: b,
                s_star: sqrt_e(),
                constants: c,
            }
        }
    };
    let mut report = report;
    report.constants.insert("kappa".into(), report.kappa);
    report.constants.insert("B".into(), report.zero_radius);
    report.constants.insert("s_star".into(), report.s_star);
    if !(report.lower >= 1.0 && report.lower <= report.upper) {
        return Err(Error::TheoryViolation(format!(
            "lower bound {} exceeds upper bound {}",
            report.lower, report.upper
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Decimal expansions computed independently (50-digit arithmetic).
    const A2: f64 = 39.356_864_080_332_17;
    const A1: f64 = 19.607_133_512_154_53;
    const A0: f64 = 8.020_616_365_473_003;

    #[test]
    fn slack_power_report_matches_amplitude_only() {
        let r0 = bound_report(&ChannelConfig::new(1, 1.0, None).unwrap()).unwrap();
        let r1 = bound_report(&ChannelConfig::new(1, 1.0, Some(2.0)).unwrap()).unwrap();
        assert_eq!((r0.lower, r0.upper, r0.kappa), (r1.lower, r1.upper, r1.kappa));
        assert_eq!(r0.constants, r1.constants);
    }

    #[test]
    fn scalar_constant_values() {
        let (a2, a1, a0) = scalar_constants();
        assert!((a2 - A2).abs() < 1e-12);
        assert!((a1 - A1).abs() < 1e-12);
        assert!((a0 - A0).abs() < 1e-12);
        assert!((scalar_upper_bound(1.0).unwrap() - 66.985).abs() < 1e-3);
        assert!((scalar_upper_bound(2.0).unwrap() - 204.66).abs() < 1e-2);
        assert!(scalar_upper_bound(0.99).is_err());
    }

    #[test]
    fn scalar_upper_monotone() {
        let mut prev = 0.0;
        for i in 0..100 {
            let v = scalar_upper_bound(1.0 + 0.1 * i as f64).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn scalar_lower_values() {
        assert!((scalar_lower_bound(1e-9) - 1.0).abs() < 1e-15);
        assert!((scalar_lower_bound(1.0) - 1.1109).abs() < 1e-4);
        assert!((scalar_lower_bound(10.0) - 4.941_652_821_650_633).abs() < 1e-12);
        for i in 0..=90 {
            let a = 1.0 + 0.1 * i as f64;
            assert!(scalar_lower_bound(a) <= scalar_upper_bound(a).unwrap());
        }
    }

    #[test]
    fn kappa_interval_values() {
        let k = kappa1_interval(1.0, None).unwrap();
        assert!((k.lo - 0.171_099_140).abs() < 1e-8);
        assert!((k.hi - 0.217_806_167).abs() < 1e-8);
        let z = kappa1_interval(0.0, Some(0.0)).unwrap();
        assert!((z.point.unwrap() - 1.0 / (2.0 * PI * E).sqrt()).abs() < 1e-15);
        assert!((z.point.unwrap() - 0.241_971).abs() < 1e-6);
        // a capacity above ½ log(1 + A²) pushes κ₁ below the interval
        assert!(matches!(
            kappa1_interval(1.0, Some(0.6)),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn scalar_zero_radius_values() {
        let b = scalar_zero_radius(1.0, 0.1).unwrap();
        let l: f64 = (1.0 / (2.0 * PI * 0.01)).ln();
        assert!((b - (1.0 + l.sqrt())).abs() < 1e-14);
        assert!((b - 2.6635).abs() < 1e-4);
        let top = 1.0 / (2.0 * PI).sqrt();
        assert!((scalar_zero_radius(3.0, top).unwrap() - 3.0).abs() < 1e-7);
        assert!(scalar_zero_radius(1.0, 0.0).is_err());
        assert!(scalar_zero_radius(1.0, 0.5).is_err());
        // worst-case κ₁ at A = 1 keeps the radius inside 2A + 1
        let k = kappa1_interval(1.0, None).unwrap();
        assert!(scalar_zero_radius(1.0, k.lo).unwrap() <= 3.0);
    }

    #[test]
    fn tijdeman_values() {
        let v = tijdeman_osc_bound(1.0, 3.0, Some(E.sqrt())).unwrap();
        assert!((v.value - 65.985).abs() < 0.01, "{}", v.value);
        assert!((1.0 + v.value - scalar_upper_bound(1.0).unwrap()).abs() < 1e-9);
        let m = tijdeman_osc_bound(1.0, 3.0, None).unwrap();
        assert!(m.value <= v.value);
        assert!(m.s > 1.0);
        // A = 2, R = 5 at √e by hand: (((7√e+2)²/2 + 8 + log(2+3.5√e)) / ½
        let se = E.sqrt();
        let hand = 2.0 * ((7.0 * se + 2.0).powi(2) / 2.0 + 8.0 + (2.0 + 3.5 * se).ln());
        let v2 = tijdeman_osc_bound(2.0, 5.0, Some(se)).unwrap();
        assert!((v2.value - hand).abs() < 1e-10 * hand);
        assert!(tijdeman_osc_bound(1.0, 1.0, None).is_err());
        assert!(tijdeman_osc_bound(1.0, 3.0, Some(1.0)).is_err());
    }

    #[test]
    fn tijdeman_minimum_is_stationary() {
        for (a, r) in [(1.0, 3.0), (2.0, 5.0), (5.0, 11.0), (0.5, 2.0)] {
            let m = tijdeman_osc_bound(a, r, None).unwrap();
            for f in [0.999, 1.001] {
                let near = tijdeman_osc_bound(a, r, Some(m.s * f)).unwrap();
                assert!(near.value >= m.value - 1e-9);
            }
        }
    }

    #[test]
    fn quadratic_bound_dominates_oscillation_bound() {
        for i in 0..=40 {
            let a = 1.0 + 0.25 * i as f64;
            let exact = tijdeman_osc_bound(a, 2.0 * a + 1.0, Some(E.sqrt())).unwrap();
            assert!(scalar_upper_bound(a).unwrap() >= 1.0 + exact.value - 1e-9);
        }
    }

    #[test]
    fn vector_constant_values() {
        let (an2, an1, an0) = vector_constants(2).unwrap();
        assert!((an2 - 19.947).abs() < 1e-3);
        assert!((an1 - 38.477).abs() < 1e-3);
        assert!((an0 - 18.410).abs() < 1e-3);
        assert!((vector_upper_bound(2, 1.0).unwrap() - 76.83).abs() < 1e-2);
        let (b2, _, _) = vector_constants(7).unwrap();
        assert_eq!(an2, b2);
        let v3 = vector_upper_bound(3, 1.0).unwrap();
        assert!(v3.is_finite() && v3 > 0.0);
        assert!(vector_constants(1).is_err());
    }

    #[test]
    fn gamma_n_values() {
        assert!((gamma_n(2).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma_n(3).unwrap() - (PI / 2.0).sqrt()).abs() < 1e-14);
        assert!((gamma_n(3).unwrap() - 1.25331).abs() < 1e-5);
    }

    #[test]
    fn vector_zero_radius_values() {
        let g = gamma_n(3).unwrap();
        assert!((vector_zero_radius(3, 1.5, g).unwrap() - 9.0).abs() < 1e-12);
        let k = (-nu_n(2)).exp();
        let b = vector_zero_radius(2, 1.0, k).unwrap();
        let hand: f64 = (1.0 + (1.0 + 2.0 * 1.0f64).sqrt()).powi(2);
        assert!((b - hand).abs() < 1e-12);
        assert!(matches!(
            vector_zero_radius(2, 1.0, 1.0),
            Ok(v) if (v - 4.0).abs() < 1e-12
        ));
        assert!(matches!(
            vector_zero_radius(4, 1.0, 1.0),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn lambda_values() {
        assert_eq!(lambda_bound(1.0, 2.0), 0.0);
        assert!((lambda_bound(2.0, 1.0) - LN_2 / 2.0).abs() < 1e-15);
        assert!((lambda_bound(2.0, 1.0) - 0.34657).abs() < 1e-5);
        let l = lambda_bound(1.0, 1e-6);
        assert!(l < 0.5 && 0.5 - l < 1e-6);
        for p in [1e-3, 0.1, 1.0, 10.0, 100.0] {
            assert!(lambda_bound(1e3, p) < 0.5);
        }
    }

    #[test]
    fn power_reduces_to_scalar() {
        for a in [1.0, 1.5, 2.0, 4.0, 7.5] {
            let p = a * a * 1.01;
            let d = power_upper_bound(a, p).unwrap() - scalar_upper_bound(a).unwrap();
            assert!(d.abs() < 1e-9);
            assert_eq!(power_lower_bound(a, a * a / 3.0), scalar_lower_bound(a));
            assert_eq!(power_zero_radius_loosened(a, p), 2.0 * a + 1.0);
        }
        let (p2, p1, p0) = power_constants(0.0);
        let (a2, a1, a0) = scalar_constants();
        assert!((p2 - a2).abs() < 1e-12 && (p1 - a1).abs() < 1e-12 && (p0 - a0).abs() < 1e-12);
        assert!((power_upper_bound(1.0, 2.0).unwrap() - 66.985).abs() < 1e-3);
        assert!(power_upper_bound(0.5, 2.0).is_err());
    }

    #[test]
    fn power_values() {
        assert!((power_amplitude(2.0, 1.0) - 2.0 / (1.0 - LN_2)).abs() < 1e-14);
        assert!((power_amplitude(2.0, 1.0) - 6.5178).abs() < 1e-4);
        assert!((power_lower_bound(3.0, 1.0) - 1.304_836_379_9).abs() < 1e-9);
        assert!((power_lower_bound(1.0, 0.1) - 1.0346).abs() < 1e-4);
    }

    #[test]
    fn power_zero_radius_values() {
        let (a, p) = (2.0, 1.0);
        let lam = lambda_bound(a, p);
        let k = power_kappa_lower(p, lam);
        let b = power_zero_radius(a, lam, k).unwrap();
        let loose = power_zero_radius_loosened(a, p);
        assert!((loose - 14.036).abs() < 1e-3);
        assert!(b < loose, "{b} vs {loose}");
        let s = scalar_zero_radius(1.3, 0.2).unwrap();
        assert!((power_zero_radius(1.3, 0.0, 0.2).unwrap() - s).abs() < 1e-14);
        assert!(power_zero_radius(1.0, 0.5, 0.2).is_err());
    }

    #[test]
    fn reports() {
        let r = bound_report(&ChannelConfig::scalar(1.0).unwrap()).unwrap();
        assert!((r.upper - 66.985).abs() < 1e-3);
        assert!((r.lower - 1.111).abs() < 1e-3);
        assert!(r.zero_radius >= 1.0);
        for key in ["a2", "a1", "a0", "kappa", "B", "s_star"] {
            assert!(r.constants.contains_key(key), "{key}");
        }
        let v = bound_report(&ChannelConfig::new(2, 1.0, None).unwrap()).unwrap();
        assert!((v.upper - 76.83).abs() < 1e-2);
        for key in ["an2", "an1", "an0", "nun", "gamman"] {
            assert!(v.constants.contains_key(key), "{key}");
        }
        let p = bound_report(&ChannelConfig::new(1, 1.0, Some(2.0)).unwrap()).unwrap();
        assert_eq!(p.upper, r.upper);
        assert_eq!(p.lower, r.lower);
        let q = bound_report(&ChannelConfig::new(1, 2.0, Some(1.0)).unwrap()).unwrap();
        for key in ["aP2", "aP1", "aP0", "lambdaP", "AP"] {
            assert!(q.constants.contains_key(key), "{key}");
        }
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("B").is_some());
    }
}
