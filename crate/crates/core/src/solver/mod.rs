//! Capacity-achieving input search with support escalation.
//!
//! For k = 1, 2, … the optimizer maximizes the (penalized) mutual information
//! over inputs with k mass points (scalar, symmetric) or k shells, from
//! several starts. The first k whose best candidate passes the KKT check is
//! accepted.

mod kernel;
mod kkt;
mod optimize;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{lambda_bound, scalar_upper_bound, vector_upper_bound};
use crate::channel::{
    mutual_information, shell_mutual_information, ChannelConfig, DiscreteInput, InputFile,
    ShellInput, Witness,
};
use crate::error::{domain, Error, Result};
use kernel::{Kind, Problem};
use optimize::{ascend, cleanup, polish, HalfState, MERGE_FRACTION};

pub use kkt::{default_grid_step, verify_kkt, KktResiduals};

const ASCENT_ITERS: usize = 400;
const NEWTON_ITERS: usize = 40;
/// Consecutive escalation steps whose optimum collapses onto fewer points
/// before the search is declared stuck.
const MAX_STALLS: usize = 3;
const MAX_BISECTIONS: usize = 200;

/// Knobs of a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub seed: u64,
    pub starts: usize,
    /// KKT grid step; `None` uses 1e-3·A.
    pub grid_step: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            seed: 0,
            starts: 8,
            grid_step: None,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// An accepted optimum together with its certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SolveResultFile", try_from = "SolveResultFile")]
pub struct SolveResult {
    pub config: ChannelConfig,
    pub input: Witness,
    /// nats
    pub capacity: f64,
    pub kkt_equality_residual: f64,
    pub kkt_inequality_residual: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub support_size: usize,
    pub seed: u64,
    pub tol: f64,
}

impl SolveResult {
    /// E[X²] of a scalar witness, E[R²] of a shell witness.
    pub fn second_moment(&self) -> f64 {
        match &self.input {
            Witness::Scalar(d) => d.second_moment(),
            Witness::Shell { input, .. } => {
                input.radii().iter().zip(input.probs()).map(|(r, p)| p * r * r).sum()
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SolveResultFile {
    config: ChannelConfig,
    input: InputFile,
    capacity: f64,
    kkt_equality_residual: f64,
    kkt_inequality_residual: f64,
    lambda: f64,
    iterations: usize,
    support_size: usize,
    seed: u64,
    tol: f64,
}

impl From<SolveResult> for SolveResultFile {
    fn from(r: SolveResult) -> Self {
        Self {
            config: r.config,
            input: InputFile::from(&r.input),
            capacity: r.capacity,
            kkt_equality_residual: r.kkt_equality_residual,
            kkt_inequality_residual: r.kkt_inequality_residual,
            lambda: r.lambda,
            iterations: r.iterations,
            support_size: r.support_size,
            seed: r.seed,
            tol: r.tol,
        }
    }
}

impl TryFrom<SolveResultFile> for SolveResult {
    type Error = Error;

    fn try_from(f: SolveResultFile) -> Result<Self> {
        f.config.validate()?;
        let input = f.input.into_witness(true)?;
        if input.dimension() != f.config.n {
            return Err(Error::Invalid("input dimension does not match config".into()));
        }
        Ok(Self {
            support_size: input.support_size(),
            config: f.config,
            input,
            capacity: f.capacity,
            kkt_equality_residual: f.kkt_equality_residual,
            kkt_inequality_residual: f.kkt_inequality_residual,
            lambda: f.lambda,
            iterations: f.iterations,
            seed: f.seed,
            tol: f.tol,
        })
    }
}

pub fn solve_scalar(a: f64, tol: f64) -> Result<SolveResult> {
    solve_scalar_with(a, SolveOptions::with_tol(tol))
}

pub fn solve_scalar_power(a: f64, p: f64, tol: f64) -> Result<SolveResult> {
    solve_scalar_power_with(a, p, SolveOptions::with_tol(tol))
}

pub fn solve_vector(n: u32, a: f64, tol: f64) -> Result<SolveResult> {
    solve_vector_with(n, a, SolveOptions::with_tol(tol))
}

/// Dispatches on the shape of `config`.
pub fn solve(config: &ChannelConfig, opts: SolveOptions) -> Result<SolveResult> {
    config.validate()?;
    match (config.n, config.power) {
        (1, None) => solve_scalar_with(config.amplitude, opts),
        (1, Some(p)) => solve_scalar_power_with(config.amplitude, p, opts),
        (n, _) => solve_vector_with(n, config.amplitude, opts),
    }
}

fn check_opts(a: f64, opts: &SolveOptions) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return domain(format!("amplitude must be positive, got {a}"));
    }
    if !(opts.tol > 0.0) {
        return domain(format!("tolerance must be positive, got {}", opts.tol));
    }
    if opts.starts == 0 {
        return domain("at least one start is required");
    }
    Ok(())
}

pub fn solve_scalar_with(a: f64, opts: SolveOptions) -> Result<SolveResult> {
    check_opts(a, &opts)?;
    let cap = scalar_upper_bound(a.max(1.0))?.floor() as usize;
    let esc = escalate(Kind::Scalar, a, 0.0, &opts, cap, 1, &[])?;
    esc.into_result(ChannelConfig::scalar(a)?, 0.0, &opts)
}

pub fn solve_vector_with(n: u32, a: f64, opts: SolveOptions) -> Result<SolveResult> {
    check_opts(a, &opts)?;
    if n < 2 {
        return domain("shell solves need n >= 2");
    }
    let cap = vector_upper_bound(n, a.max(1.0))?.floor() as usize;
    let esc = escalate(Kind::Shell(n), a, 0.0, &opts, cap, 1, &[])?;
    esc.into_result(ChannelConfig::new(n, a, None)?, 0.0, &opts)
}

/// Amplitude and average-power constrained scalar solve. The multiplier is
/// found by safeguarded false position (Illinois variant) on E[X²](λ) − P
/// over (0, λ_P].
pub fn solve_scalar_power_with(a: f64, p: f64, opts: SolveOptions) -> Result<SolveResult> {
    check_opts(a, &opts)?;
    let config = ChannelConfig::new(1, a, Some(p))?;
    let cap = scalar_upper_bound(a.max(1.0))?.floor() as usize;
    let base = escalate(Kind::Scalar, a, 0.0, &opts, cap, 1, &[])?;
    let m0 = base.moment();
    if m0 <= p + opts.tol {
        return base.into_result(config, 0.0, &opts);
    }
    let lam_hi = lambda_bound(a, p);
    let mut iterations = base.iterations;
    let mut solve_at = |lam: f64, warm: &Escalation| -> Result<Escalation> {
        let k0 = warm.support_size().saturating_sub(2).max(1);
        let e = escalate(Kind::Scalar, a, lam, &opts, cap, k0, std::slice::from_ref(&warm.state))?;
        iterations += e.iterations;
        Ok(e)
    };
    // The moment at the ceiling is not evaluated: theory places it at or
    // below P, and the penalized problem is badly conditioned there. Plain
    // bisection runs until both signs have been seen.
    let (mut lo, mut g_lo, mut lo_sol) = (0.0, m0 - p, base);
    let mut upper: Option<(f64, Escalation)> = None;
    let mut hi = lam_hi;
    let mut side = 0i8;
    for _ in 0..MAX_BISECTIONS {
        let lam = match &upper {
            Some((g_hi, _)) => {
                let x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
                if x > lo && x < hi { x } else { 0.5 * (lo + hi) }
            }
            None => 0.5 * (lo + hi),
        };
        let warm = match &upper {
            Some((g_hi, s)) if g_hi.abs() < g_lo.abs() => s,
            _ => &lo_sol,
        };
        let sol = solve_at(lam, warm)?;
        let g = sol.moment() - p;
        if g.abs() <= opts.tol {
            let mut r = sol.into_result(config, lam, &opts)?;
            r.iterations = iterations;
            return Ok(r);
        }
        if g > 0.0 {
            (lo, g_lo, lo_sol) = (lam, g, sol);
            if side == 1 {
                if let Some((g_hi, _)) = upper.as_mut() {
                    *g_hi *= 0.5;
                }
            }
            side = 1;
        } else {
            hi = lam;
            upper = Some((g, sol));
            if side == -1 {
                g_lo *= 0.5;
            }
            side = -1;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    if upper.is_none() {
        return Err(Error::Convergence(format!(
            "power bracket failed: E[X^2] stays above P = {p} up to the multiplier ceiling {lam_hi}"
        )));
    }
    Err(Error::Convergence(format!(
        "multiplier search stalled in [{lo}, {hi}] without meeting the moment tolerance"
    )))
}

/// Outcome of one escalation run.
struct Escalation {
    kind: Kind,
    amplitude: f64,
    state: HalfState,
    witness: Witness,
    capacity: f64,
    kkt: KktResiduals,
    iterations: usize,
}

impl Escalation {
    fn moment(&self) -> f64 {
        self.state.q.iter().zip(&self.state.th).map(|(q, t)| q * t * t).sum()
    }

    fn support_size(&self) -> usize {
        self.witness.support_size()
    }

    fn into_result(self, config: ChannelConfig, lambda: f64, opts: &SolveOptions) -> Result<SolveResult> {
        // residuals against the nominal power level
        let kkt = if lambda > 0.0 {
            let p = config.power.unwrap_or(0.0);
            kkt::kkt_residuals(
                &self.witness,
                self.amplitude,
                self.capacity,
                lambda,
                p,
                grid_step(self.amplitude, opts),
                quad_tol(opts),
            )?
        } else {
            self.kkt
        };
        let _ = self.kind;
        Ok(SolveResult {
            config,
            support_size: self.witness.support_size(),
            input: self.witness,
            capacity: self.capacity,
            kkt_equality_residual: kkt.equality,
            kkt_inequality_residual: kkt.inequality,
            lambda,
            iterations: self.iterations,
            seed: opts.seed,
            tol: opts.tol,
        })
    }
}

fn grid_step(a: f64, opts: &SolveOptions) -> f64 {
    opts.grid_step.unwrap_or_else(|| default_grid_step(a))
}

fn quad_tol(opts: &SolveOptions) -> f64 {
    (0.1 * opts.tol).min(1e-10)
}

/// Number of mass points of the full law described by a half state.
fn full_size(kind: Kind, s: &HalfState) -> usize {
    match kind {
        Kind::Scalar => s.th.iter().map(|&t| if t == 0.0 { 1 } else { 2 }).sum(),
        Kind::Shell(_) => s.th.len(),
    }
}

fn to_witness(kind: Kind, s: &HalfState) -> Result<Witness> {
    match kind {
        Kind::Scalar => Ok(Witness::Scalar(DiscreteInput::from_half(&s.th, &s.q)?)),
        Kind::Shell(n) => Ok(Witness::Shell {
            n,
            input: ShellInput::new(s.th.clone(), s.q.clone())?,
        }),
    }
}

fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![hi];
    }
    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
}

/// Deterministic starting layouts with k points in the full law.
fn base_layouts(kind: Kind, a: f64, k: usize) -> Vec<HalfState> {
    match kind {
        Kind::Scalar => {
            if k == 1 {
                return vec![HalfState { q: vec![1.0], th: vec![0.0] }];
            }
            // equispaced on [−A, A], folded onto [0, A]
            let th: Vec<f64> = linspace(-a, a, k).into_iter().filter(|x| *x >= -1e-15).map(f64::abs).collect();
            let kf = k as f64;
            let q: Vec<f64> = th.iter().map(|&t| if t < 1e-12 * a { 1.0 / kf } else { 2.0 / kf }).collect();
            let th = th.into_iter().map(|t| if t < 1e-12 * a { 0.0 } else { t }).collect();
            vec![HalfState { q, th }]
        }
        Kind::Shell(_) => {
            let q = vec![1.0 / k as f64; k];
            let mut v = vec![HalfState {
                q: q.clone(),
                th: (1..=k).map(|j| a * j as f64 / k as f64).collect(),
            }];
            if k >= 2 {
                v.push(HalfState { q, th: linspace(0.0, a, k) });
            }
            v
        }
    }
}

fn perturb(s: &HalfState, a: f64, rng: &mut ChaCha8Rng) -> HalfState {
    let m = s.q.len() as f64;
    let mut q: Vec<f64> = s.q.iter().map(|q| q * rng.random_range(-0.5f64..0.5).exp()).collect();
    let tot: f64 = q.iter().sum();
    q.iter_mut().for_each(|x| *x /= tot);
    let th = s
        .th
        .iter()
        .map(|&t| if t == 0.0 { 0.0 } else { (t + rng.random_range(-0.5..0.5) * a / m).clamp(1e-3 * a, a) })
        .collect();
    HalfState { q, th }
}

/// Adds a light mass point at `x`, the location of the largest KKT excess.
fn insert_point(kind: Kind, a: f64, s: &HalfState, x: f64) -> HalfState {
    const W: f64 = 0.05;
    let mut x = x.abs().min(a);
    if kind == Kind::Scalar && x < MERGE_FRACTION * a {
        x = 0.0;
    }
    let mut out = HalfState {
        q: s.q.iter().map(|q| q * (1.0 - W)).collect(),
        th: s.th.clone(),
    };
    match out.th.iter().position(|&t| (t - x).abs() < MERGE_FRACTION * a) {
        Some(j) => out.q[j] += W,
        None => {
            out.th.push(x);
            out.q.push(W);
        }
    }
    out
}

struct Candidate {
    state: HalfState,
    objective: f64,
    iterations: usize,
}

fn run_start(p: &Problem, s: HalfState) -> Candidate {
    let scalar = p.kind == Kind::Scalar;
    let (mut s, mut it) = ascend(p, s, ASCENT_ITERS);
    cleanup(&mut s, p.amplitude, scalar);
    for _ in 0..3 {
        let (t, n, _) = polish(p, s, NEWTON_ITERS);
        s = t;
        it += n;
        if !cleanup(&mut s, p.amplitude, scalar) {
            break;
        }
    }
    Candidate {
        objective: p.objective(&s.q, &s.th),
        state: s,
        iterations: it,
    }
}

fn lex_cmp(a: &HalfState, b: &HalfState) -> std::cmp::Ordering {
    a.th.iter()
        .chain(&a.q)
        .zip(b.th.iter().chain(&b.q))
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(a.th.len().cmp(&b.th.len()))
}

/// Best candidate over the multi-start set at support size k.
fn best_at(p: &Problem, k: usize, opts: &SolveOptions, warm: &[HalfState]) -> Candidate {
    let mut starts: Vec<HalfState> = warm.to_vec();
    let layouts = base_layouts(p.kind, p.amplitude, k);
    starts.extend(layouts.iter().cloned());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut i = 0;
    // a lone point has nothing to perturb in the scalar case
    let trivial = p.kind == Kind::Scalar && k == 1;
    while starts.len() < opts.starts && !trivial {
        starts.push(perturb(&layouts[i % layouts.len()], p.amplitude, &mut rng));
        i += 1;
    }
    let cands: Vec<Candidate> = starts.into_par_iter().map(|s| run_start(p, s)).collect();
    let iterations = cands.iter().map(|c| c.iterations).sum();
    let mut best = cands
        .into_iter()
        .reduce(|a, b| {
            match b.objective.total_cmp(&a.objective) {
                std::cmp::Ordering::Greater => b,
                std::cmp::Ordering::Less => a,
                std::cmp::Ordering::Equal => {
                    if lex_cmp(&b.state, &a.state).is_lt() { b } else { a }
                }
            }
        })
        .expect("at least one start");
    best.iterations = iterations;
    best
}

fn escalate(
    kind: Kind,
    a: f64,
    lambda: f64,
    opts: &SolveOptions,
    cap: usize,
    k_start: usize,
    warm: &[HalfState],
) -> Result<Escalation> {
    let problem_power = 0.0;
    let p = Problem::new(kind, a, lambda, problem_power);
    let mut iterations = 0;
    let mut stalls = 0;
    let mut best_seen: Option<(f64, KktResiduals, Witness)> = None;
    let mut k = k_start.max(1);
    let mut pool: Vec<HalfState> = warm.to_vec();

    loop {
        if k > cap {
            return Err(Error::TheoryViolation(format!(
                "support escalation passed the proven bound of {cap} points at A = {a}"
            )));
        }
        let (ready, later): (Vec<_>, Vec<_>) =
            pool.into_iter().partition(|s| full_size(kind, s) <= k);
        pool = later;
        let cand = best_at(&p, k, opts, &ready);
        iterations += cand.iterations;
        let witness = to_witness(kind, &cand.state)?;
        let capacity = match &witness {
            Witness::Scalar(d) => mutual_information(d)?,
            Witness::Shell { n, input } => shell_mutual_information(*n, input)?,
        };
        let moment: f64 = cand.state.q.iter().zip(&cand.state.th).map(|(q, t)| q * t * t).sum();
        let kkt = kkt::kkt_residuals(
            &witness,
            a,
            capacity,
            lambda,
            moment,
            grid_step(a, opts),
            quad_tol(opts),
        )?;
        if kkt.passes(opts.tol) {
            return Ok(Escalation {
                kind,
                amplitude: a,
                state: cand.state,
                witness,
                capacity,
                kkt,
                iterations,
            });
        }
        pool.push(insert_point(kind, a, &cand.state, kkt.worst_x));
        if full_size(kind, &cand.state) < k {
            stalls += 1;
        } else {
            stalls = 0;
        }
        let worse = best_seen.as_ref().is_none_or(|(_, r, _)| {
            kkt.equality.max(kkt.inequality) < r.equality.max(r.inequality)
        });
        if worse {
            best_seen = Some((capacity, kkt, witness));
        }
        if stalls >= MAX_STALLS {
            let (c, r, w) = best_seen.expect("recorded above");
            return Err(Error::Convergence(format!(
                "no {k}-point candidate passes KKT at A = {a}; best iterate {:?} with capacity {c}, residuals ({:.3e}, {:.3e})",
                InputFile::from(&w),
                r.equality,
                r.inequality
            )));
        }
        k += 1;
    }
}
