//! Gauss–Legendre quadrature: node generation, fixed composite panel rules
//! and an adaptive panel-splitting integrator with an error estimate.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on the Legendre polynomial roots.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over [a, b] with this rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    if n == 1 {
        (x, 1.0)
    } else {
        (p1, d)
    }
}

pub(crate) fn gl15() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(15))
}

pub(crate) fn gl20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

/// A composite rule: the interval is cut into equal panels, each carrying a
/// copy of a fixed Gauss–Legendre rule. Used where the same integration grid
/// is reused for many integrands.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(a: f64, b: f64, max_width: f64) -> Self {
        let rule = gl20();
        let panels = (((b - a) / max_width).ceil() as usize).max(1);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * rule.nodes().len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                nodes.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * w);
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Value of an adaptive integral together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

const MAX_DEPTH: u32 = 40;

/// Adaptive Gauss–Legendre integration of `f` over [a, b].
///
/// The interval starts as `initial_panels` equal pieces. A piece is accepted
/// when the 15-point rule on it and the sum of the 15-point rules on its two
/// halves agree within its share of `tol`; otherwise it is split.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    initial_panels: usize,
) -> Result<Integral> {
    if !(b > a) {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
        });
    }
    let rule = gl15();
    let total = b - a;
    let n0 = initial_panels.max(1);
    let h0 = total / n0 as f64;
    let mut stack: Vec<(f64, f64, f64, u32)> = (0..n0)
        .map(|i| {
            let lo = a + i as f64 * h0;
            let hi = if i + 1 == n0 { b } else { lo + h0 };
            (lo, hi, rule.integrate(lo, hi, &f), 0)
        })
        .collect();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut failed = false;
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &f);
        let right = rule.integrate(mid, hi, &f);
        let fine = left + right;
        let err = (fine - coarse).abs();
        if !fine.is_finite() {
            return Err(Error::Quadrature {
                achieved: f64::INFINITY,
                requested: tol,
            });
        }
        let share = tol * (hi - lo) / total;
        if err <= share.max(f64::EPSILON * fine.abs()) {
            value += fine;
            error += err;
        } else if depth >= MAX_DEPTH {
            value += fine;
            error += err;
            failed = true;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    if failed && error > tol {
        return Err(Error::Quadrature {
            achieved: error,
            requested: tol,
        });
    }
    Ok(Integral { value, error })
}
