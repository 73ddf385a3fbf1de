//! Sequential minimal optimization for the class-weighted SVM dual
//!
//! ```text
//! minimize   f(α) = ½ αᵀQα − Σ α_i,   Q_ij = y_i y_j K_ij
//! subject to 0 ≤ α_i ≤ C_i,  Σ y_i α_i = 0
//! ```
//!
//! Working pairs are the maximal violating pair (first-order selection);
//! each pair is solved analytically and clipped to its box. The stopping
//! rule `m(α) − M(α) ≤ tol` bounds every KKT residual by `tol`.

use super::kernel::KernelRows;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct SmoResult {
    pub alpha: Vec<f64>,
    /// Threshold `b` of the decision function `Σ α_i y_i K(x_i, x) − b`.
    pub bias: f64,
    /// Final `Qα − 1`.
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Final `m(α) − M(α)`.
    pub max_violation: f64,
}

pub(crate) struct SmoParams<'a> {
    pub y: &'a [f64],
    pub upper: &'a [f64],
    pub tol: f64,
    pub max_iterations: usize,
}

#[inline]
fn in_up(y: f64, a: f64, c: f64) -> bool {
    if y > 0.0 {
        a < c
    } else {
        a > 0.0
    }
}

#[inline]
fn in_low(y: f64, a: f64, c: f64) -> bool {
    if y > 0.0 {
        a > 0.0
    } else {
        a < c
    }
}

/// Maps a solution found under box bounds `prev_upper` onto a feasible
/// starting point for the bounds `upper`: each coefficient is rescaled by the
/// change of its own bound (so bounded coefficients stay bounded), then one
/// class is rescaled to restore `Σ y_i α_i = 0`. The lighter class is scaled
/// up when that stays inside its boxes, otherwise the heavier one down.
pub(crate) fn repair_start(alpha: &mut [f64], y: &[f64], upper: &[f64], prev_upper: &[f64]) {
    for ((a, c), p) in alpha.iter_mut().zip(upper).zip(prev_upper) {
        *a = (*a * (c / p)).clamp(0.0, *c);
    }
    let class_sum = |sign: f64, alpha: &[f64]| -> f64 {
        alpha.iter().zip(y).filter(|(_, &yi)| yi == sign).map(|(a, _)| a).sum()
    };
    let pos = class_sum(1.0, alpha);
    let neg = class_sum(-1.0, alpha);
    if pos == neg {
        return;
    }
    let (heavy_sign, heavy, light) = if pos > neg { (1.0, pos, neg) } else { (-1.0, neg, pos) };
    let grow = heavy / light;
    let can_grow = light > 0.0
        && alpha
            .iter()
            .zip(y)
            .zip(upper)
            .all(|((a, &yi), c)| yi == heavy_sign || a * grow <= *c);
    let (sign, factor) = if can_grow { (-heavy_sign, grow) } else { (heavy_sign, light / heavy) };
    for ((a, &yi), c) in alpha.iter_mut().zip(y).zip(upper) {
        if yi == sign {
            *a = (*a * factor).min(*c);
        }
    }
}

#[cfg(test)]
/// `G = Qα − 1` computed directly from the nonzero coefficients.
pub(crate) fn gradient(rows: &mut KernelRows, y: &[f64], alpha: &[f64]) -> Vec<f64> {
    let n = rows.len();
    let mut grad = vec![-1.0; n];
    for j in 0..n {
        if alpha[j] != 0.0 {
            let row = rows.row(j);
            let s = alpha[j] * y[j];
            for t in 0..n {
                grad[t] += y[t] * s * row[t];
            }
        }
    }
    grad
}

/// Runs SMO from the feasible point `alpha` whose gradient `Qα − 1` is
/// `grad`. When `objective_trace` is given, the dual objective after every
/// pair update is appended to it.
pub(crate) fn solve(
    rows: &mut KernelRows,
    params: &SmoParams<'_>,
    mut alpha: Vec<f64>,
    mut grad: Vec<f64>,
    mut objective_trace: Option<&mut Vec<f64>>,
) -> SmoResult {
    let n = rows.len();
    let y = params.y;
    let c = params.upper;
    debug_assert_eq!(alpha.len(), n);
    debug_assert_eq!(grad.len(), n);

    let mut dual = if objective_trace.is_some() {
        // D = Σα − ½αᵀQα = −½ Σ α_t (G_t − 1)
        alpha.iter().zip(&grad).map(|(a, g)| -0.5 * a * (g - 1.0)).sum::<f64>()
    } else {
        0.0
    };

    let mut iterations = 0;
    let mut converged = false;
    let mut gap = f64::INFINITY;
    while iterations < params.max_iterations {
        // Maximal violating pair.
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let mut i = usize::MAX;
        let mut j = usize::MAX;
        for t in 0..n {
            let score = -y[t] * grad[t];
            if in_up(y[t], alpha[t], c[t]) && score > gmax {
                gmax = score;
                i = t;
            }
            if in_low(y[t], alpha[t], c[t]) && score < gmin {
                gmin = score;
                j = t;
            }
        }
        gap = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || gap <= params.tol {
            converged = true;
            break;
        }

        let row_i = rows.row(i);
        let row_j = rows.row(j);
        let (ci, cj) = (c[i], c[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let q_ij = y[i] * y[j] * row_i[j];
        let (q_ii, q_jj) = (row_i[i], row_j[j]);

        if y[i] != y[j] {
            let quad = (q_ii + q_jj + 2.0 * q_ij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let quad = (q_ii + q_jj - 2.0 * q_ij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        if let Some(trace) = objective_trace.as_deref_mut() {
            // f(α + Δ) − f(α) = G_i Δ_i + G_j Δ_j + ½(Q_ii Δ_i² + Q_jj Δ_j²) + Q_ij Δ_i Δ_j
            let df = grad[i] * di
                + grad[j] * dj
                + 0.5 * (q_ii * di * di + q_jj * dj * dj)
                + q_ij * di * dj;
            dual -= df;
            trace.push(dual);
        }
        let si = y[i] * di;
        let sj = y[j] * dj;
        for t in 0..n {
            grad[t] += y[t] * (si * row_i[t] + sj * row_j[t]);
        }
        iterations += 1;
    }
    if !converged {
        gap = violation(&alpha, &grad, y, c);
        converged = gap <= params.tol;
    }

    SmoResult {
        bias: bias(&alpha, &grad, y, c),
        alpha,
        grad,
        iterations,
        converged,
        max_violation: gap,
    }
}

fn violation(alpha: &[f64], grad: &[f64], y: &[f64], c: &[f64]) -> f64 {
    let mut gmax = f64::NEG_INFINITY;
    let mut gmin = f64::INFINITY;
    for t in 0..alpha.len() {
        let score = -y[t] * grad[t];
        if in_up(y[t], alpha[t], c[t]) {
            gmax = gmax.max(score);
        }
        if in_low(y[t], alpha[t], c[t]) {
            gmin = gmin.min(score);
        }
    }
    (gmax - gmin).max(0.0)
}

/// `b` from the average `y_t G_t` over free variables; without free
/// variables, the midpoint of the interval the bounded ones allow.
fn bias(alpha: &[f64], grad: &[f64], y: &[f64], c: &[f64]) -> f64 {
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c[t] {
            if y[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else {
        0.5 * (upper + lower)
    }
}
