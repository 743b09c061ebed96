//! Local optimization of a half-form input: projected gradient ascent
//! followed by a Newton polish on the stationarity conditions, with
//! clean-up of vanished and coincident mass points.

use nalgebra::{DMatrix, DVector};

use super::kernel::{Eval, Problem};

/// Weights below this are treated as vanished.
pub(crate) const DROP_WEIGHT: f64 = 1e-6;
/// Locations closer than this multiple of A are merged.
pub(crate) const MERGE_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HalfState {
    pub q: Vec<f64>,
    pub th: Vec<f64>,
}

/// Euclidean projection onto the probability simplex (sort-based).
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut tau = 0.0;
    for (i, &x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (i as f64 + 1.0);
        if x - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

fn is_pinned_zero(th0: f64) -> bool {
    th0 == 0.0
}

/// Projected gradient ascent with Armijo backtracking. Locations that start
/// at exactly 0 stay there; the rest are clamped to [0, A].
pub(crate) fn ascend(p: &Problem, mut s: HalfState, max_iter: usize) -> (HalfState, usize) {
    let a = p.amplitude;
    let pinned: Vec<bool> = s.th.iter().map(|&t| is_pinned_zero(t)).collect();
    let mut step = 1.0;
    let mut iters = 0;
    while iters < max_iter {
        iters += 1;
        let e = p.eval(&s.q, &s.th);
        let mut moved = false;
        loop {
            let qn = project_simplex(
                &s.q.iter().zip(&e.grad_q).map(|(q, g)| q + step * g).collect::<Vec<_>>(),
            );
            let thn: Vec<f64> = s
                .th
                .iter()
                .zip(&e.grad_t)
                .zip(&pinned)
                .map(|((t, g), &pin)| if pin { 0.0 } else { (t + step * g).clamp(0.0, a) })
                .collect();
            let ascent: f64 = qn
                .iter()
                .zip(&s.q)
                .zip(&e.grad_q)
                .map(|((n, o), g)| (n - o) * g)
                .chain(thn.iter().zip(&s.th).zip(&e.grad_t).map(|((n, o), g)| (n - o) * g))
                .sum();
            if !(ascent > 1e-15) {
                break;
            }
            let on = p.objective(&qn, &thn);
            if on >= e.objective + 1e-4 * ascent {
                let dx = qn
                    .iter()
                    .zip(&s.q)
                    .chain(thn.iter().zip(&s.th))
                    .fold(0.0f64, |m, (n, o)| m.max((n - o).abs()));
                s = HalfState { q: qn, th: thn };
                step = (step * 2.0).min(1e3);
                moved = dx > 1e-10;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
        if !moved {
            break;
        }
    }
    (s, iters)
}

/// Indices of locations whose θ is a free variable: not pinned at 0 and not
/// pressed against the amplitude bound.
fn free_locations(p: &Problem, s: &HalfState, grad_t: &[f64]) -> Vec<usize> {
    (0..s.th.len())
        .filter(|&j| {
            let t = s.th[j];
            let at_top = t >= p.amplitude * (1.0 - 1e-12) && grad_t[j] >= 0.0;
            t > 0.0 && !at_top
        })
        .collect()
}

/// Norm of the stationarity residual: ∂J/∂qⱼ − μ with μ = Σ qⱼ ∂J/∂qⱼ, and
/// ∂J/∂θⱼ at free locations.
fn stationarity(s: &HalfState, e: &Eval, free: &[usize]) -> f64 {
    let mu: f64 = s.q.iter().zip(&e.grad_q).map(|(q, g)| q * g).sum();
    let a = e.grad_q.iter().map(|g| (g - mu) * (g - mu)).sum::<f64>();
    let b = free.iter().map(|&j| e.grad_t[j] * e.grad_t[j]).sum::<f64>();
    (a + b).sqrt()
}

/// Orthonormal basis of {v : Σ vⱼ = 0} in R^m.
fn simplex_tangent(m: usize) -> DMatrix<f64> {
    if m == 1 {
        return DMatrix::zeros(1, 0);
    }
    let mut b = DMatrix::<f64>::zeros(m, m - 1);
    for i in 0..m - 1 {
        b[(i, i)] = 1.0;
        b[(m - 1, i)] = -1.0;
    }
    b.qr().q()
}

/// Second-order ascent on the simplex × box. The Hessian, reduced to the
/// tangent space of Σq = 1 and the free locations, has its eigenvalues
/// replaced by −max(|λ|, δ) so every step is an ascent direction; steps are
/// kept feasible by a fraction-to-boundary rule and accepted on the
/// objective (or, below its rounding level, on the stationarity residual).
/// Points whose weight vanishes or that run into a neighbour are removed
/// between steps. Returns the state, iterations used and the final
/// stationarity residual.
pub(crate) fn polish(p: &Problem, mut s: HalfState, max_iter: usize) -> (HalfState, usize, f64) {
    let a = p.amplitude;
    let scalar = p.kind == super::kernel::Kind::Scalar;
    let mut iters = 0;
    let mut e = p.eval(&s.q, &s.th);
    let mut free = free_locations(p, &s, &e.grad_t);
    let mut res = stationarity(&s, &e, &free);
    while iters < max_iter && res > 1e-14 {
        iters += 1;
        let m = s.q.len();
        let nf = free.len();
        let h = p.hessian(&s.q, &s.th);
        let zq = simplex_tangent(m);
        let dim = m - 1 + nf;
        if dim == 0 {
            break;
        }
        // Z = blockdiag(zq, I) mapping reduced coordinates to (q, θ_free)
        let mut z = DMatrix::<f64>::zeros(m + nf, dim);
        z.view_mut((0, 0), (m, m - 1)).copy_from(&zq);
        for k in 0..nf {
            z[(m + k, m - 1 + k)] = 1.0;
        }
        let idx: Vec<usize> = (0..m).chain(free.iter().map(|&j| m + j)).collect();
        let hs = DMatrix::from_fn(m + nf, m + nf, |r, c| h[(idx[r], idx[c])]);
        let gs = DVector::from_iterator(
            m + nf,
            e.grad_q.iter().copied().chain(free.iter().map(|&j| e.grad_t[j])),
        );
        let hr = z.transpose() * &hs * &z;
        let gr = z.transpose() * &gs;
        let eig = hr.symmetric_eigen();
        let scale = eig.eigenvalues.amax().max(1e-300);
        let mut y = DVector::<f64>::zeros(dim);
        for i in 0..dim {
            let v = eig.eigenvectors.column(i);
            let lam = eig.eigenvalues[i].abs().max(1e-12 * scale);
            y += v * (v.dot(&gr) / lam);
        }
        let delta = &z * y;
        // fraction to the boundary of q ≥ 0, 0 ≤ θ ≤ A
        let mut alpha: f64 = 1.0;
        for j in 0..m {
            if delta[j] < 0.0 {
                alpha = alpha.min(0.99 * s.q[j] / -delta[j]);
            }
        }
        for (k, &j) in free.iter().enumerate() {
            let d = delta[m + k];
            if d > 0.0 {
                alpha = alpha.min((a - s.th[j]) / d);
            } else if d < 0.0 {
                alpha = alpha.min(0.99 * s.th[j] / -d);
            }
        }
        let slope = gs.dot(&delta);
        let noise = 1e-14 * e.objective.abs().max(1e-3);
        let mut accepted = None;
        while alpha > 1e-12 {
            let mut trial = s.clone();
            for j in 0..m {
                trial.q[j] = (trial.q[j] + alpha * delta[j]).max(0.0);
            }
            for (k, &j) in free.iter().enumerate() {
                trial.th[j] = (trial.th[j] + alpha * delta[m + k]).clamp(0.0, a);
            }
            let et = p.eval(&trial.q, &trial.th);
            let gain = et.objective - e.objective;
            let ok = if alpha * slope > noise {
                gain >= 1e-4 * alpha * slope
            } else {
                gain > -noise && stationarity(&trial, &et, &free) < res
            };
            if ok {
                accepted = Some((trial, et));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, et)) = accepted else {
            break;
        };
        s = trial;
        e = et;
        let mut probe = s.clone();
        if cleanup(&mut probe, a, scalar) {
            s = probe;
            e = p.eval(&s.q, &s.th);
        }
        free = free_locations(p, &s, &e.grad_t);
        res = stationarity(&s, &e, &free);
    }
    (s, iters, res)
}

/// Drops vanished weights and merges coincident locations. Returns whether
/// anything changed.
pub(crate) fn cleanup(s: &mut HalfState, amplitude: f64, scalar: bool) -> bool {
    let before = s.clone();
    let mut pts: Vec<(f64, f64)> = s
        .th
        .iter()
        .zip(&s.q)
        .filter(|(_, &q)| q >= DROP_WEIGHT)
        .map(|(&t, &q)| (t, q))
        .collect();
    if pts.is_empty() {
        // keep the heaviest point rather than return an empty law
        let j = (0..s.q.len()).max_by(|&a, &b| s.q[a].total_cmp(&s.q[b])).unwrap_or(0);
        pts.push((s.th[j], 1.0));
    }
    let tol = MERGE_FRACTION * amplitude;
    if scalar {
        // ±θ closer than the merge distance collapse onto 0
        for p in pts.iter_mut() {
            if 2.0 * p.0 < tol {
                p.0 = 0.0;
            }
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (t, q) in pts {
        match merged.last_mut() {
            Some(last) if t - last.0 < tol => {
                let w = last.1 + q;
                last.0 = if last.0 == 0.0 { 0.0 } else { (last.0 * last.1 + t * q) / w };
                last.1 = w;
            }
            _ => merged.push((t, q)),
        }
    }
    let total: f64 = merged.iter().map(|p| p.1).sum();
    s.th = merged.iter().map(|p| p.0).collect();
    s.q = merged.iter().map(|p| p.1 / total).collect();
    *s != before
}
