//! Counting real zeros by sign changes: a certified grid scan, extreme
//! points of the output density, a randomized worst-case search over
//! inputs, the Gaussian-combination zero oracle and the support sandwich.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::tijdeman_osc_bound;
use crate::channel::{output_pdf, output_pdf_deriv, DiscreteInput};
use crate::error::{domain, Error, Result};
use crate::format::fmt_sig;

/// Sign changes found on an interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroCount {
    pub count: usize,
    pub zeros: Vec<f64>,
    pub interval: (f64, f64),
    pub grid_step: f64,
    pub certified: bool,
}

const BISECT_WIDTH: f64 = 1e-12;

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: x, value: v })
    }
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, fa: f64) -> Result<f64> {
    let sa = fa > 0.0;
    for _ in 0..200 {
        if b - a <= BISECT_WIDTH {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = eval(f, m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm > 0.0) == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Zeros (one per sign change) of `f` on a uniform grid over [lo, hi].
/// Grid values that are exactly zero carry no sign and are skipped.
fn scan<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    let n = (((hi - lo) / step).ceil() as usize).max(1);
    let h = (hi - lo) / n as f64;
    let mut zeros = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for i in 0..=n {
        let x = if i == n { hi } else { lo + i as f64 * h };
        let v = eval(f, x)?;
        if v == 0.0 {
            continue;
        }
        if let Some((xp, vp)) = last {
            if (vp > 0.0) != (v > 0.0) {
                zeros.push(bisect(f, xp, x, vp)?);
            }
        }
        last = Some((x, v));
    }
    Ok(zeros)
}

/// Counts sign changes of `f` on [lo, hi] with grid spacing `step`.
///
/// Wherever two sign changes fall within four steps of each other the
/// region is rescanned once at a tenth of the step. The count is certified
/// when, after that, adjacent zeros are more than four (local) steps apart.
pub fn count_sign_changes<F>(f: F, lo: f64, hi: f64, step: f64) -> Result<ZeroCount>
where
    F: Fn(f64) -> f64,
{
    if !(lo < hi) {
        return domain(format!("empty interval [{lo}, {hi}]"));
    }
    if !(step > 0.0) {
        return domain(format!("scan step must be positive, got {step}"));
    }
    let coarse = scan(&f, lo, hi, step)?;
    let close = 4.0 * step;
    let mut zeros = Vec::with_capacity(coarse.len());
    let mut certified = true;
    let mut i = 0;
    while i < coarse.len() {
        let mut j = i;
        while j + 1 < coarse.len() && coarse[j + 1] - coarse[j] <= close {
            j += 1;
        }
        if j == i {
            zeros.push(coarse[i]);
        } else {
            let a = (coarse[i] - step).max(lo);
            let b = (coarse[j] + step).min(hi);
            let fine_step = step / 10.0;
            let fine = scan(&f, a, b, fine_step)?;
            if fine.windows(2).any(|w| w[1] - w[0] <= 4.0 * fine_step) {
                certified = false;
            }
            zeros.extend(fine);
        }
        i = j + 1;
    }
    Ok(ZeroCount {
        count: zeros.len(),
        zeros,
        interval: (lo, hi),
        grid_step: step,
        certified,
    })
}

/// Zeros of f_Y' on `interval`, by default [−(2A+1), 2A+1] with A the
/// largest |xᵢ|. The step is min(0.01, Δ/20) for smallest point gap Δ.
pub fn count_extreme_points(
    input: &DiscreteInput,
    interval: Option<(f64, f64)>,
) -> Result<ZeroCount> {
    let (lo, hi) = interval.unwrap_or_else(|| {
        let r = 2.0 * input.max_abs() + 1.0;
        (-r, r)
    });
    let step = input.min_gap().map_or(0.01, |d| (d / 20.0).min(0.01));
    count_sign_changes(|y| output_pdf_deriv(input, y), lo, hi, step)
}

// ---------------------------------------------------------------------------
// worst-case search

/// Best input found by [`worst_case_zero_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub max_count: usize,
    pub witness: DiscreteInput,
    pub certified: bool,
    pub evaluations: usize,
}

/// Symmetric candidate in half form: nonnegative locations, pair weights.
#[derive(Debug, Clone)]
struct Half {
    u: Vec<f64>,
    w: Vec<f64>,
}

const MIN_GAP: f64 = 0.05;
const BATCH: usize = 32;

impl Half {
    fn is_admissible(&self, a: f64) -> bool {
        let mut prev: Option<f64> = None;
        for &u in &self.u {
            if !(0.0..=a).contains(&u) {
                return false;
            }
            let gap = match prev {
                None if u == 0.0 => f64::INFINITY,
                None => 2.0 * u,
                Some(p) => u - p,
            };
            if gap < MIN_GAP {
                return false;
            }
            prev = Some(u);
        }
        true
    }

    fn to_input(&self) -> Option<DiscreteInput> {
        let s: f64 = self.w.iter().sum();
        let w: Vec<f64> = self.w.iter().map(|x| x / s).collect();
        DiscreteInput::from_half(&self.u, &w).ok()
    }
}

fn equispaced_half(a: f64, k: usize) -> Vec<f64> {
    // half of linspace(−A, A, k)
    let step = 2.0 * a / (k - 1) as f64;
    (0..k)
        .map(|i| -a + i as f64 * step)
        .filter(|x| *x >= -1e-12 * a)
        .map(|x| x.max(0.0))
        .collect()
}

fn random_weights(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(0.05..1.0)).collect()
}

fn random_half(rng: &mut ChaCha8Rng, a: f64, k: usize) -> Half {
    for _ in 0..100 {
        let with_zero = k % 2 == 1;
        let m = k / 2;
        let mut u: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..=a)).collect();
        if with_zero {
            u.push(0.0);
        }
        u.sort_by(f64::total_cmp);
        let h = Half {
            w: random_weights(rng, u.len()),
            u,
        };
        if h.is_admissible(a) {
            return h;
        }
    }
    let u = equispaced_half(a, k);
    Half {
        w: random_weights(rng, u.len()),
        u,
    }
}

fn perturb(rng: &mut ChaCha8Rng, base: &Half, a: f64) -> Half {
    let scale = 0.1 * a / base.u.len() as f64;
    for _ in 0..100 {
        let mut u: Vec<f64> = base
            .u
            .iter()
            .map(|&x| {
                if x == 0.0 {
                    0.0
                } else {
                    (x + scale * rng.random_range(-1.0..1.0)).clamp(0.0, a)
                }
            })
            .collect();
        u.sort_by(f64::total_cmp);
        let w: Vec<f64> = base
            .w
            .iter()
            .map(|&x| x * (0.3 * rng.random_range(-1.0..1.0f64)).exp())
            .collect();
        let h = Half { u, w };
        if h.is_admissible(a) {
            return h;
        }
    }
    base.clone()
}

fn lex_cmp(a: &DiscreteInput, b: &DiscreteInput) -> Ordering {
    let pa = a.points().iter().chain(a.probs());
    let pb = b.points().iter().chain(b.probs());
    a.len()
        .cmp(&b.len())
        .then_with(|| pa.zip(pb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal))
}

#[derive(Debug, Clone)]
struct Scored {
    half: Half,
    input: DiscreteInput,
    count: usize,
    certified: bool,
}

/// Ranking: certified before uncertified, then more zeros, then the
/// lexicographically smaller witness.
fn better(x: &Scored, y: &Scored) -> bool {
    (x.certified, x.count)
        .cmp(&(y.certified, y.count))
        .then_with(|| lex_cmp(&y.input, &x.input))
        == Ordering::Greater
}

fn score_batch(batch: Vec<Half>) -> Result<Vec<Scored>> {
    batch
        .into_par_iter()
        .filter_map(|half| half.to_input().map(|input| (half, input)))
        .map(|(half, input)| {
            let z = count_extreme_points(&input, None)?;
            Ok(Scored {
                half,
                input,
                count: z.count,
                certified: z.certified,
            })
        })
        .collect()
}

/// Searches symmetric inputs on [−A, A] with at most `k_max` mass points
/// for the largest number of extreme points of f_Y.
///
/// A quarter of the budget goes to equispaced supports with random
/// weights, a quarter to random supports, and the rest to hill climbing
/// around the incumbent. Candidates in a batch are scored in parallel and
/// reduced in generation order, so the result depends only on the seed.
pub fn worst_case_zero_search(
    a: f64,
    k_max: usize,
    budget: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    if !(a > 0.0) {
        return domain(format!("amplitude must be positive, got {a}"));
    }
    if k_max < 2 {
        return domain(format!("k_max must be at least 2, got {k_max}"));
    }
    if budget == 0 {
        return domain("search budget must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Scored> = None;
    let mut used = 0usize;
    let take = |batch: Vec<Half>, best: &mut Option<Scored>, used: &mut usize| -> Result<()> {
        *used += batch.len();
        for s in score_batch(batch)? {
            if best.as_ref().is_none_or(|b| better(&s, b)) {
                *best = Some(s);
            }
        }
        Ok(())
    };

    let structured = budget / 4;
    let random = budget / 4;
    let mut batch = Vec::new();
    for j in 0..structured {
        let k = 2 + j % (k_max - 1);
        let u = equispaced_half(a, k);
        let w = if j < k_max - 1 {
            vec![1.0; u.len()]
        } else {
            random_weights(&mut rng, u.len())
        };
        batch.push(Half { u, w });
    }
    for _ in 0..random {
        let k = rng.random_range(2..=k_max);
        batch.push(random_half(&mut rng, a, k));
    }
    take(batch, &mut best, &mut used)?;
    if best.is_none() {
        let u = equispaced_half(a, 2);
        take(vec![Half { w: vec![1.0; u.len()], u }], &mut best, &mut used)?;
    }
    while used < budget {
        let incumbent = best.as_ref().expect("at least one scored candidate").half.clone();
        let n = BATCH.min(budget - used);
        let batch: Vec<Half> = (0..n).map(|_| perturb(&mut rng, &incumbent, a)).collect();
        take(batch, &mut best, &mut used)?;
    }
    let best = best.expect("at least one scored candidate");
    Ok(SearchOutcome {
        max_count: best.count,
        witness: best.input,
        certified: best.certified,
        evaluations: used,
    })
}

/// One row of a zero-count sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "A")]
    pub a: f64,
    pub max_count: usize,
    pub bound: f64,
    pub log_a_count: f64,
    pub seed: u64,
    pub budget: usize,
    pub certified: bool,
}

/// 1 + the oscillation bound at radius 2A + 1, minimized over s: the ceiling
/// on the number of extreme points of f_Y for amplitude A.
pub fn tijdeman_bound_at(a: f64) -> Result<f64> {
    Ok(1.0 + tijdeman_osc_bound(a, 2.0 * a + 1.0, None)?.value)
}

/// Default support cap used by the sweep for amplitude A.
pub fn default_k_max(a: f64) -> usize {
    ((2.0 * a).ceil() as usize + 2).max(4)
}

/// Runs the worst-case search at each amplitude and pairs the result with
/// 1 + the minimized oscillation bound at radius 2A + 1.
///
/// A measured count above the bound is a [`Error::TheoryViolation`].
pub fn zero_sweep(amplitudes: &[f64], k_max: Option<usize>, budget: usize, seed: u64) -> Result<Vec<SweepRow>> {
    amplitudes
        .iter()
        .map(|&a| {
            let k = k_max.unwrap_or_else(|| default_k_max(a));
            let out = worst_case_zero_search(a, k, budget, seed)?;
            let bound = tijdeman_bound_at(a)?;
            if out.max_count as f64 > bound {
                return Err(Error::TheoryViolation(format!(
                    "{} extreme points at A = {a} exceed the bound {bound}",
                    out.max_count
                )));
            }
            let log_a_count = if a == 1.0 {
                f64::NAN
            } else {
                (out.max_count as f64).ln() / a.ln()
            };
            Ok(SweepRow {
                a,
                max_count: out.max_count,
                bound,
                log_a_count,
                seed,
                budget,
                certified: out.certified,
            })
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str = "A,max_count,bound,log_A_count,seed,budget,certified";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_sig(r.a),
            r.max_count,
            fmt_sig(r.bound),
            fmt_sig(r.log_a_count),
            r.seed,
            r.budget,
            r.certified
        ));
    }
    s
}

// ---------------------------------------------------------------------------
// Gaussian-combination oracle

/// A linear combination Σ wᵢ exp(−(y − mᵢ)²/(2vᵢ)) of k + 1 Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCombination {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl GaussianCombination {
    /// Perturbed form of f_Y − κ multiplied by e^{−y²/2}: each unit-variance
    /// bump (xᵢ, pᵢ) is sharpened by 1 + εᵢ and the constant −κ becomes a
    /// negative unit-variance Gaussian at the origin. `eps` must be
    /// positive and pairwise distinct.
    pub fn from_output_density(
        points: &[f64],
        probs: &[f64],
        kappa: f64,
        eps: &[f64],
    ) -> Self {
        let shift = points.iter().fold(0.0f64, |m, x| m.max(-x)).max(0.0) + 1.0;
        let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let mut weights = vec![-kappa];
        let mut means = vec![0.0];
        let mut variances = vec![1.0];
        for ((&x, &p), &e) in points.iter().zip(probs).zip(eps) {
            let u = x + shift;
            weights.push(c * p * (-(1.0 + e) * u * u / (2.0 * (2.0 + e))).exp());
            means.push((1.0 + e) * u / (2.0 + e));
            variances.push(1.0 / (2.0 + e));
        }
        Self {
            weights,
            means,
            variances,
        }
    }

    /// Sign-preserving evaluation: the combination divided by its largest
    /// term magnitude, with sums below the rounding floor returned as 0.
    fn normalized(&self, y: f64) -> f64 {
        let exps: Vec<f64> = self
            .means
            .iter()
            .zip(&self.variances)
            .zip(&self.weights)
            .map(|((m, v), w)| w.abs().ln() - (y - m) * (y - m) / (2.0 * v))
            .collect();
        let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        let mut mag = 0.0;
        for (e, w) in exps.iter().zip(&self.weights) {
            let t = (e - top).exp();
            sum += w.signum() * t;
            mag += t;
        }
        if sum.abs() <= 64.0 * f64::EPSILON * mag {
            0.0
        } else {
            sum
        }
    }

    /// Half-width outside which the widest Gaussian dominates every other
    /// term by a factor of at least e·k.
    fn dominance_radius(&self) -> f64 {
        let (star, _) = self
            .variances
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty combination");
        let (ws, ms, vs) = (self.weights[star], self.means[star], self.variances[star]);
        let k = self.weights.len() as f64;
        let mut r = self.means.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..self.weights.len() {
            if i == star {
                continue;
            }
            let (wi, mi, vi) = (self.weights[i], self.means[i], self.variances[i]);
            let d = 0.5 / vi - 0.5 / vs;
            let b = mi.abs() / vi + ms.abs() / vs;
            let c = ms * ms / (2.0 * vs);
            let l = (ws.abs() / (k * wi.abs())).ln() - 1.0;
            let y = (b + (b * b + 4.0 * d * (c - l).max(0.0)).sqrt()) / (2.0 * d);
            r = r.max(y);
        }
        r + 1.0
    }
}

/// Counts the real zeros of a combination of k + 1 Gaussians with distinct
/// variances and exactly one negative weight. More than 2k zeros is
/// impossible, so such a count is reported as a theory violation.
pub fn mixture_zero_oracle(weights: &[f64], means: &[f64], variances: &[f64]) -> Result<usize> {
    let m = weights.len();
    if m < 2 || means.len() != m || variances.len() != m {
        return domain("need k + 1 >= 2 weights, means and variances of equal length");
    }
    if weights.iter().filter(|w| **w < 0.0).count() != 1 || weights.contains(&0.0) {
        return domain("exactly one weight must be negative and none zero");
    }
    if variances.iter().any(|v| !(*v > 0.0)) {
        return domain("variances must be positive");
    }
    let mut sorted = variances.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return domain("variances must be pairwise distinct");
    }
    let g = GaussianCombination {
        weights: weights.to_vec(),
        means: means.to_vec(),
        variances: variances.to_vec(),
    };
    let r = g.dominance_radius();
    let step = (2.0 * r / 20_000.0).min(1e-3);
    let z = count_sign_changes(|y| g.normalized(y), -r, r, step)?;
    let k = m - 1;
    if z.count > 2 * k {
        return Err(Error::TheoryViolation(format!(
            "{} zeros found for a combination of {} Gaussians (at most {})",
            z.count,
            m,
            2 * k
        )));
    }
    Ok(z.count)
}

// ---------------------------------------------------------------------------
// support sandwich

/// Outcome of comparing |supp| with the zeros of f_Y − κ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sandwich {
    pub zeros: ZeroCount,
    pub support: usize,
    /// ½N ≤ k
    pub lower_ok: bool,
    /// k ≤ N
    pub upper_ok: bool,
}

impl Sandwich {
    pub fn n(&self) -> usize {
        self.zeros.count
    }
}

/// Counts N = zeros of f_Y − κ on [−radius, radius] and checks ½N ≤ k ≤ N.
pub fn sandwich_check(input: &DiscreteInput, kappa: f64, radius: f64) -> Result<Sandwich> {
    if !(radius > 0.0) {
        return domain(format!("radius must be positive, got {radius}"));
    }
    let step = 1e-3 * 2.0 * radius;
    let zeros = count_sign_changes(|y| output_pdf(input, y) - kappa, -radius, radius, step)?;
    let k = input.len();
    Ok(Sandwich {
        lower_ok: zeros.count <= 2 * k,
        upper_ok: k <= zeros.count,
        support: k,
        zeros,
    })
}
