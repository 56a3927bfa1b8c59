//! Maximisers of `w -> alt_inf(w)` over the simplex.
//!
//! `Barrier` solves the equivalent convex program
//!
//! ```text
//! minimise   sum_i 1/u_i
//! subject to sum_{i in S} u_i <= c_S   for every piece S of the alternative min
//! ```
//!
//! where `u_i = 1/w_i` up to scale and `c_S` is the squared separation of the
//! piece over `2 sigma2`. Each pair constraint `1/w_a + 1/w_b <= c_ab / v` is
//! exactly `w_a w_b / (w_a + w_b) * c_ab >= v`, so the optimum value of the
//! program is `T*` and `w* ∝ 1/u*`. A log-barrier interior point method with
//! Newton centring gets this to ~1e-12 relative accuracy.
//!
//! `MirrorAscent` is exponentiated supergradient ascent with averaged
//! iterates; it is slower to converge and kept as an alternate route.

use nalgebra::{DMatrix, DVector};

use super::{piece_value, pieces, Piece};
use crate::instance::Task;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorAscentConfig {
    pub max_iterations: usize,
    /// Step size is `step_scale / (sqrt(n) * max_i g_i)`.
    pub step_scale: f64,
    pub window: usize,
    pub rel_tol: f64,
}

impl Default for MirrorAscentConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            step_scale: 1.0,
            window: 100,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AllocationSolver {
    #[default]
    Barrier,
    MirrorAscent(MirrorAscentConfig),
}

impl AllocationSolver {
    /// Maximiser of `alt_inf` for a non-degenerate instance.
    pub(crate) fn solve(&self, task: Task, means: &[f64], sigma2: f64) -> Vec<f64> {
        match self {
            AllocationSolver::Barrier => barrier_allocation(task, means, sigma2),
            AllocationSolver::MirrorAscent(cfg) => mirror_ascent(task, means, sigma2, cfg),
        }
    }
}

struct Constraint {
    arms: [usize; 2],
    len: usize,
    cap: f64,
}

impl Constraint {
    fn arms(&self) -> &[usize] {
        &self.arms[..self.len]
    }

    fn slack(&self, u: &[f64]) -> f64 {
        self.cap - self.arms().iter().map(|&i| u[i]).sum::<f64>()
    }
}

fn constraints(task: Task, means: &[f64], sigma2: f64) -> Vec<Constraint> {
    pieces(task, means)
        .into_iter()
        .map(|p| match p {
            Piece::Pair { a, b } => Constraint {
                arms: [a, b],
                len: 2,
                cap: (means[a] - means[b]).powi(2) / (2.0 * sigma2),
            },
            Piece::Single { i } => {
                let tau = match task {
                    Task::Thresholding { tau } => tau,
                    Task::TopK { .. } => unreachable!(),
                };
                Constraint {
                    arms: [i, i],
                    len: 1,
                    cap: (means[i] - tau).powi(2) / (2.0 * sigma2),
                }
            }
        })
        .collect()
}

fn barrier_allocation(task: Task, means: &[f64], sigma2: f64) -> Vec<f64> {
    let n = means.len();
    if let Task::Thresholding { tau } = task {
        // Every constraint bounds a single arm, so each optimal u_i sits at its cap.
        let inv: Vec<f64> = means.iter().map(|m| (m - tau).powi(-2)).collect();
        let total: f64 = inv.iter().sum();
        return inv.into_iter().map(|x| x / total).collect();
    }
    let mut cons = constraints(task, means, sigma2);
    let scale = cons.iter().map(|c| c.cap).fold(0.0, f64::max);
    debug_assert!(scale > 0.0);
    for c in &mut cons {
        c.cap /= scale;
    }
    let u = minimise_inverse_sum(n, &cons);
    let inv: Vec<f64> = u.iter().map(|x| 1.0 / x).collect();
    let total: f64 = inv.iter().sum();
    inv.into_iter().map(|x| x / total).collect()
}

const REL_GAP: f64 = 1e-13;
const MAX_OUTER: usize = 80;
const MAX_NEWTON: usize = 200;
const CENTRE_TOL: f64 = 1e-10;

/// Interior point solve of `min sum 1/u_i` s.t. the constraint caps.
fn minimise_inverse_sum(n: usize, cons: &[Constraint]) -> Vec<f64> {
    let m = cons.len() as f64;
    // Strictly feasible start: a quarter of the tightest cap touching each arm.
    let mut u = vec![f64::INFINITY; n];
    for c in cons {
        for &i in c.arms() {
            u[i] = u[i].min(0.25 * c.cap);
        }
    }
    debug_assert!(u.iter().all(|x| x.is_finite() && *x > 0.0));

    let objective = |u: &[f64]| u.iter().map(|x| 1.0 / x).sum::<f64>();
    let mut t = m / objective(&u);
    for _ in 0..MAX_OUTER {
        centre(&mut u, cons, t);
        if m / t <= REL_GAP * objective(&u) {
            break;
        }
        t *= 16.0;
    }
    u
}

fn feasible(u: &[f64], cons: &[Constraint]) -> bool {
    u.iter().all(|&x| x > 0.0) && cons.iter().all(|c| c.slack(u) > 0.0)
}

fn barrier_value(u: &[f64], cons: &[Constraint], t: f64) -> f64 {
    t * u.iter().map(|x| 1.0 / x).sum::<f64>() - cons.iter().map(|c| c.slack(u).ln()).sum::<f64>()
}

fn centre(u: &mut Vec<f64>, cons: &[Constraint], t: f64) {
    let n = u.len();
    for _ in 0..MAX_NEWTON {
        let mut grad = DVector::<f64>::zeros(n);
        let mut hess = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            grad[i] = -t / (u[i] * u[i]);
            hess[(i, i)] = 2.0 * t / (u[i] * u[i] * u[i]);
        }
        for c in cons {
            let s = c.slack(u);
            let (g, h) = (1.0 / s, 1.0 / (s * s));
            for &i in c.arms() {
                grad[i] += g;
                for &j in c.arms() {
                    hess[(i, j)] += h;
                }
            }
        }
        let step = match hess.clone().cholesky() {
            Some(ch) => -ch.solve(&grad),
            None => {
                // Numerically indefinite only at extreme t; fall back to LU.
                match hess.lu().solve(&(-&grad)) {
                    Some(s) => s,
                    None => return,
                }
            }
        };
        let decrement2 = -grad.dot(&step);
        // Centred to well below the outer duality gap, which is what bounds accuracy.
        if !(decrement2 > 2.0 * CENTRE_TOL) {
            return;
        }
        let mut s = 1.0;
        let base = barrier_value(u, cons, t);
        let slope = grad.dot(&step);
        let mut accepted = false;
        let mut stalled = false;
        for _ in 0..60 {
            let cand: Vec<f64> = (0..n).map(|i| u[i] + s * step[i]).collect();
            if feasible(&cand, cons) {
                let val = barrier_value(&cand, cons, t);
                if val <= base + 0.25 * s * slope + 1e-14 * base.abs() {
                    // At large t rounding noise keeps the decrement above tolerance
                    // while the iterate no longer moves.
                    stalled = u.iter().zip(&cand).all(|(a, b)| (a - b).abs() <= 1e-14 * a);
                    *u = cand;
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !accepted || stalled {
            return;
        }
    }
}

fn mirror_ascent(task: Task, means: &[f64], sigma2: f64, cfg: &MirrorAscentConfig) -> Vec<f64> {
    let n = means.len();
    let pcs = pieces(task, means);
    let value_and_grad = |w: &[f64]| {
        let mut best = (f64::INFINITY, [(0usize, 0.0f64); 2]);
        for &p in &pcs {
            let (v, g) = piece_value(p, task, w, means, sigma2);
            if v < best.0 {
                best = (v, g);
            }
        }
        best
    };

    let mut w = vec![1.0 / n as f64; n];
    let mut avg = vec![0.0; n];
    let mut best_iterate = (value_and_grad(&w).0, w.clone());
    let mut last_check = f64::NEG_INFINITY;
    for it in 1..=cfg.max_iterations {
        let (value, entries) = value_and_grad(&w);
        if value > best_iterate.0 {
            best_iterate = (value, w.clone());
        }
        let mut grad = vec![0.0; n];
        for (i, g) in entries {
            grad[i] += g;
        }
        let gmax = grad.iter().cloned().fold(0.0, f64::max);
        if gmax <= 0.0 {
            break;
        }
        let eta = cfg.step_scale / ((it as f64).sqrt() * gmax);
        // Shift exponents by the max for stability.
        let shift = eta * gmax;
        for i in 0..n {
            w[i] *= (eta * grad[i] - shift).exp();
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        for i in 0..n {
            avg[i] += (w[i] - avg[i]) / it as f64;
        }
        if it % cfg.window == 0 {
            let v = value_and_grad(&avg).0;
            if last_check.is_finite() && (v - last_check) <= cfg.rel_tol * last_check.abs() {
                break;
            }
            last_check = v;
        }
    }
    let avg_value = value_and_grad(&avg).0;
    if best_iterate.0 > avg_value {
        best_iterate.1
    } else {
        avg
    }
}
