//! Discretized objective for the optimizer.
//!
//! An input in half form is a list of locations θⱼ ≥ 0 with weights qⱼ. Each
//! location contributes a kernel ψ(t; θ) = exp K(t; θ) on the half line: the
//! symmetrized Gaussian pair for the scalar channel and the radial density
//! of ‖θe + Z‖ for shells. Both share the form
//!
//!   K = c(t) − (t² + θ²)/2 + Λ(θt),   ∂θK = −θ + t ρ(θt),   ∂²θK = −1 + t² ρ'(θt)
//!
//! with Λ = log cosh, ρ = tanh in the scalar case and Λ = log(I_ν(z)/z^ν),
//! ρ = I_{ν+1}/I_ν for shells. All integrals run on one fixed panel rule.

use nalgebra::DMatrix;

use crate::channel::{nu_n, H_Z};
use crate::quadrature::PanelRule;
use crate::specfun::{bessel_ratio, log_radial_kernel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Kind {
    Scalar,
    Shell(u32),
}

const TAIL: f64 = 12.0;
const PANEL_WIDTH: f64 = 0.5;

pub(crate) struct Problem {
    pub kind: Kind,
    pub amplitude: f64,
    /// Power multiplier; the objective is I − λ(E[X²] − P).
    pub lambda: f64,
    pub power: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    omega: Vec<f64>,
    offset: f64,
}

/// Per-node kernel values for every location.
struct Table {
    /// log ψ_{ij}, row-major over (node, location)
    logpsi: Vec<f64>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    logf: Vec<f64>,
    /// log f + ω: the log-density whose negative integrates to the entropy term
    ell: Vec<f64>,
}

pub(crate) struct Eval {
    pub objective: f64,
    pub grad_q: Vec<f64>,
    pub grad_t: Vec<f64>,
}

fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl Problem {
    pub fn new(kind: Kind, amplitude: f64, lambda: f64, power: f64) -> Self {
        let (hi, offset) = match kind {
            Kind::Scalar => (amplitude + TAIL, H_Z),
            Kind::Shell(n) => (amplitude + (n as f64).sqrt() + TAIL, nu_n(n)),
        };
        let rule = PanelRule::new(0.0, hi, PANEL_WIDTH);
        let (nodes, mut weights) = (rule.nodes, rule.weights);
        let omega = match kind {
            Kind::Scalar => {
                // even integrands: ∫_R = 2 ∫_0^∞
                weights.iter_mut().for_each(|w| *w *= 2.0);
                vec![0.0; nodes.len()]
            }
            Kind::Shell(n) => nodes.iter().map(|t| -(n as f64 - 1.0) * t.ln()).collect(),
        };
        Self {
            kind,
            amplitude,
            lambda,
            power,
            nodes,
            weights,
            omega,
            offset,
        }
    }

    /// (K, ∂θK, ∂²θK) at node t.
    fn kernel(&self, theta: f64, t: f64) -> (f64, f64, f64) {
        match self.kind {
            Kind::Scalar => {
                let z = theta * t;
                let th = z.tanh();
                let k = -0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * (t * t + theta * theta)
                    + log_cosh(z);
                (k, t * th - theta, t * t * (1.0 - th * th) - 1.0)
            }
            Kind::Shell(n) => {
                let order = 0.5 * n as f64 - 1.0;
                let k = log_radial_kernel(n, theta, t);
                let br = bessel_ratio(order, theta * t);
                (k, -theta + t * br.ratio, -1.0 + t * t * br.deriv)
            }
        }
    }

    fn table(&self, q: &[f64], th: &[f64], derivs: bool) -> Table {
        let m = th.len();
        let n = self.nodes.len();
        let mut logpsi = vec![0.0; n * m];
        let mut k1 = vec![0.0; if derivs { n * m } else { 0 }];
        let mut k2 = vec![0.0; if derivs { n * m } else { 0 }];
        let mut logf = vec![0.0; n];
        let mut ell = vec![0.0; n];
        let lq: Vec<f64> = q.iter().map(|x| x.ln()).collect();
        for i in 0..n {
            let t = self.nodes[i];
            let mut top = f64::NEG_INFINITY;
            for j in 0..m {
                let (k, a, b) = self.kernel(th[j], t);
                logpsi[i * m + j] = k;
                if derivs {
                    k1[i * m + j] = a;
                    k2[i * m + j] = b;
                }
                top = top.max(lq[j] + k);
            }
            let s: f64 = (0..m).map(|j| (lq[j] + logpsi[i * m + j] - top).exp()).sum();
            logf[i] = top + s.ln();
            ell[i] = logf[i] + self.omega[i];
        }
        Table {
            logpsi,
            k1,
            k2,
            logf,
            ell,
        }
    }

    fn penalty(&self, q: &[f64], th: &[f64]) -> f64 {
        let m2: f64 = q.iter().zip(th).map(|(q, t)| q * t * t).sum();
        self.lambda * (m2 - self.power)
    }

    /// Penalized objective I − λ(E[X²] − P).
    pub fn objective(&self, q: &[f64], th: &[f64]) -> f64 {
        let tb = self.table(q, th, false);
        let mut s = 0.0;
        for i in 0..self.nodes.len() {
            s -= self.weights[i] * tb.logf[i].exp() * tb.ell[i];
        }
        s - self.offset - self.penalty(q, th)
    }

    /// Objective with its gradient.
    pub fn eval(&self, q: &[f64], th: &[f64]) -> Eval {
        let m = th.len();
        let tb = self.table(q, th, true);
        let mut obj = 0.0;
        let mut d = vec![0.0; m];
        let mut gt = vec![0.0; m];
        for i in 0..self.nodes.len() {
            let w = self.weights[i];
            let l = tb.ell[i];
            obj -= w * tb.logf[i].exp() * l;
            for j in 0..m {
                let psi = tb.logpsi[i * m + j].exp();
                d[j] -= w * psi * l;
                gt[j] -= w * psi * tb.k1[i * m + j] * l;
            }
        }
        let lam = self.lambda;
        Eval {
            objective: obj - self.offset - self.penalty(q, th),
            grad_q: (0..m).map(|j| d[j] - self.offset - lam * th[j] * th[j]).collect(),
            grad_t: (0..m)
                .map(|j| q[j] * gt[j] - 2.0 * lam * q[j] * th[j])
                .collect(),
        }
    }

    /// Hessian of the penalized objective in the order (q₁..q_m, θ₁..θ_m).
    pub fn hessian(&self, q: &[f64], th: &[f64]) -> DMatrix<f64> {
        let m = th.len();
        let tb = self.table(q, th, true);
        let mut h = DMatrix::<f64>::zeros(2 * m, 2 * m);
        let mut r = vec![0.0; m];
        let mut rk = vec![0.0; m];
        let mut diag_qt = vec![0.0; m];
        let mut diag_tt = vec![0.0; m];
        for i in 0..self.nodes.len() {
            let w = self.weights[i];
            let f = tb.logf[i].exp();
            let l = tb.ell[i];
            for j in 0..m {
                let idx = i * m + j;
                // ψ/f, bounded by 1/qⱼ
                r[j] = (tb.logpsi[idx] - tb.logf[i]).exp();
                rk[j] = r[j] * tb.k1[idx];
                let psi = tb.logpsi[idx].exp();
                diag_qt[j] -= w * psi * tb.k1[idx] * l;
                diag_tt[j] -= w * psi * (tb.k2[idx] + tb.k1[idx] * tb.k1[idx]) * l;
            }
            let wf = w * f;
            for a in 0..m {
                for b in 0..m {
                    h[(a, b)] -= wf * r[a] * r[b];
                    h[(a, m + b)] -= wf * r[a] * q[b] * rk[b];
                    h[(m + a, m + b)] -= wf * q[a] * rk[a] * q[b] * rk[b];
                }
            }
        }
        let lam = self.lambda;
        for a in 0..m {
            h[(a, m + a)] += diag_qt[a] - 2.0 * lam * th[a];
            h[(m + a, m + a)] += q[a] * diag_tt[a] - 2.0 * lam * q[a];
        }
        for a in 0..m {
            for b in 0..m {
                h[(m + b, a)] = h[(a, m + b)];
            }
        }
        h
    }
}
