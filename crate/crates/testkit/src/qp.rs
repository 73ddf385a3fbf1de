//! Dense solver for the kernel SVM dual, used as an oracle on small problems.
//!
//! Solves
//!
//! ```text
//! maximize   Σ α_i − ½ Σ_ij α_i α_j y_i y_j K_ij
//! subject to 0 ≤ α_i ≤ c_i,  Σ α_i y_i = 0
//! ```
//!
//! by accelerated projected gradient (exact Euclidean projection onto the box
//! intersected with the hyperplane), followed by an active-set polish that
//! solves the KKT linear system on the free variables. The bias follows the
//! decision convention `g(x) = Σ α_i y_i K(x_i, x) − b`.

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    /// Dual objective value (maximization form).
    pub objective: f64,
    /// Whether the active-set polish succeeded.
    pub polished: bool,
}

pub fn dual_objective(gram: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * gram[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Projection of `v` onto `{0 ≤ a ≤ c, yᵀa = 0}`.
fn project(v: &[f64], y: &[f64], c: &[f64]) -> Vec<f64> {
    let at = |lambda: f64| -> Vec<f64> {
        v.iter()
            .zip(y)
            .zip(c)
            .map(|((&vi, &yi), &ci)| (vi - lambda * yi).clamp(0.0, ci))
            .collect()
    };
    let residual = |a: &[f64]| a.iter().zip(y).map(|(ai, yi)| ai * yi).sum::<f64>();
    let bound = v.iter().map(|x| x.abs()).fold(0.0, f64::max)
        + c.iter().cloned().fold(0.0, f64::max)
        + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if residual(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

fn q_times(q: &[Vec<f64>], a: &[f64]) -> Vec<f64> {
    q.iter()
        .map(|row| row.iter().zip(a).map(|(x, y)| x * y).sum())
        .collect()
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Bias from the KKT interval when no free variable pins it.
fn interval_bias(grad: &[f64], y: &[f64], alpha: &[f64], c: &[f64], tol: f64) -> f64 {
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut free = Vec::new();
    for i in 0..alpha.len() {
        let at_zero = alpha[i] <= tol * c[i];
        let at_cap = alpha[i] >= c[i] * (1.0 - tol);
        // y g − 1 = grad − y b
        match (at_zero, at_cap, y[i] > 0.0) {
            (true, _, true) => upper = upper.min(grad[i]),
            (true, _, false) => lower = lower.max(-grad[i]),
            (false, true, true) => lower = lower.max(grad[i]),
            (false, true, false) => upper = upper.min(-grad[i]),
            (false, false, _) => free.push(y[i] * grad[i]),
        }
    }
    if !free.is_empty() {
        return free.iter().sum::<f64>() / free.len() as f64;
    }
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => 0.5 * (lower + upper),
        (true, false) => lower,
        (false, true) => upper,
        (false, false) => 0.0,
    }
}

pub fn solve_svm_dual(gram: &[Vec<f64>], y: &[f64], c: &[f64]) -> QpSolution {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| y[i] * y[j] * gram[i][j]).collect())
        .collect();
    let lipschitz = q
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-12);
    let step = 1.0 / lipschitz;

    let mut alpha = project(&vec![0.0; n], y, c);
    let mut momentum = alpha.clone();
    let mut t = 1.0f64;
    for _ in 0..400_000 {
        let grad: Vec<f64> = q_times(&q, &momentum).iter().map(|g| g - 1.0).collect();
        let trial: Vec<f64> = momentum.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
        let next = project(&trial, y, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        // Adaptive restart when the step opposes the momentum direction.
        let restart = next
            .iter()
            .zip(&alpha)
            .zip(&grad)
            .map(|((nx, a), g)| g * (nx - a))
            .sum::<f64>()
            > 0.0;
        let delta = next
            .iter()
            .zip(&alpha)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if restart {
            t = 1.0;
            momentum = next.clone();
        } else {
            momentum = next
                .iter()
                .zip(&alpha)
                .map(|(nx, a)| nx + (t - 1.0) / t_next * (nx - a))
                .collect();
            t = t_next;
        }
        alpha = next;
        if delta < 1e-15 {
            break;
        }
    }

    let grad: Vec<f64> = q_times(&q, &alpha).iter().map(|g| g - 1.0).collect();
    let pg_bias = interval_bias(&grad, y, &alpha, c, 1e-9);
    let pg = QpSolution {
        objective: dual_objective(gram, y, &alpha),
        alpha: alpha.clone(),
        bias: pg_bias,
        polished: false,
    };

    match polish(&q, y, c, &alpha) {
        Some((a, b)) => {
            let obj = dual_objective(gram, y, &a);
            if obj >= pg.objective - 1e-12 {
                QpSolution {
                    objective: obj,
                    alpha: a,
                    bias: b,
                    polished: true,
                }
            } else {
                pg
            }
        }
        None => pg,
    }
}

/// Re-solves the KKT system exactly on the active set guessed from `alpha`.
fn polish(q: &[Vec<f64>], y: &[f64], c: &[f64], alpha: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = y.len();
    let tol = 1e-7;
    let free: Vec<usize> = (0..n)
        .filter(|&i| alpha[i] > tol * c[i] && alpha[i] < c[i] * (1.0 - tol))
        .collect();
    if free.is_empty() {
        return None;
    }
    let capped: Vec<usize> = (0..n).filter(|&i| alpha[i] >= c[i] * (1.0 - tol)).collect();
    let nf = free.len();
    // Unknowns: α_F (nf) and b.
    let mut a = vec![vec![0.0; nf + 1]; nf + 1];
    let mut rhs = vec![0.0; nf + 1];
    for (r, &i) in free.iter().enumerate() {
        for (k, &j) in free.iter().enumerate() {
            a[r][k] = q[i][j];
        }
        a[r][nf] = -y[i];
        rhs[r] = 1.0 - capped.iter().map(|&j| q[i][j] * c[j]).sum::<f64>();
    }
    for (k, &j) in free.iter().enumerate() {
        a[nf][k] = y[j];
    }
    rhs[nf] = -capped.iter().map(|&j| y[j] * c[j]).sum::<f64>();
    let sol = solve_linear(a, rhs)?;

    let mut out = vec![0.0; n];
    for &j in &capped {
        out[j] = c[j];
    }
    for (k, &j) in free.iter().enumerate() {
        if sol[k] < 0.0 || sol[k] > c[j] {
            return None;
        }
        out[j] = sol[k];
    }
    let b = sol[nf];
    let grad: Vec<f64> = q_times(q, &out).iter().map(|g| g - 1.0).collect();
    for i in 0..n {
        let slack = grad[i] - y[i] * b; // y g − 1
        let ok = if free.contains(&i) {
            true
        } else if out[i] == 0.0 {
            slack >= -1e-9
        } else {
            slack <= 1e-9
        };
        if !ok {
            return None;
        }
    }
    Some((out, b))
}
