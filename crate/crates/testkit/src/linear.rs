//! Fisher linear discriminant with a training-error-minimizing threshold.

/// Fits `w = S_w⁻¹ (μ₊ − μ₋)` on 3-D points and returns the fraction of
/// training points misclassified at the best threshold along `w`.
pub fn lda_training_error(points: &[[f64; 3]], labels: &[i8]) -> f64 {
    let mean = |sign: i8| {
        let pts: Vec<&[f64; 3]> = points
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == sign)
            .map(|(p, _)| p)
            .collect();
        let mut m = [0.0; 3];
        for p in &pts {
            for d in 0..3 {
                m[d] += p[d];
            }
        }
        m.iter_mut().for_each(|v| *v /= pts.len() as f64);
        m
    };
    let mp = mean(1);
    let mn = mean(-1);
    let mut sw = [[0.0; 3]; 3];
    for (p, &l) in points.iter().zip(labels) {
        let m = if l == 1 { &mp } else { &mn };
        for r in 0..3 {
            for c in 0..3 {
                sw[r][c] += (p[r] - m[r]) * (p[c] - m[c]);
            }
        }
    }
    for (r, row) in sw.iter_mut().enumerate() {
        row[r] += 1e-9;
    }
    let diff = [mp[0] - mn[0], mp[1] - mn[1], mp[2] - mn[2]];
    let w = solve3(sw, diff);

    let mut proj: Vec<(f64, i8)> = points
        .iter()
        .zip(labels)
        .map(|(p, &l)| (w[0] * p[0] + w[1] * p[1] + w[2] * p[2], l))
        .collect();
    proj.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // Threshold before index i: everything at or after i is called positive.
    let total_pos = proj.iter().filter(|(_, l)| *l == 1).count();
    let total_neg = proj.len() - total_pos;
    let mut best = total_neg;
    let mut pos_below = 0;
    let mut neg_below = 0;
    for (_, l) in &proj {
        if *l == 1 {
            pos_below += 1;
        } else {
            neg_below += 1;
        }
        let err = pos_below + (total_neg - neg_below);
        best = best.min(err);
    }
    best as f64 / proj.len() as f64
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    let mut x = [0.0; 3];
    for (col, xc) in x.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][col] = b[r];
        }
        *xc = det(&m) / d;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_clusters_have_zero_error() {
        let pts = [
            [1.0, 1.0, 1.0],
            [1.1, 0.9, 1.0],
            [1.0, 1.2, 0.8],
            [-1.0, -1.0, -1.0],
            [-0.9, -1.1, -1.0],
            [-1.2, -1.0, -0.9],
        ];
        let labels = [1, 1, 1, -1, -1, -1];
        assert_eq!(lda_training_error(&pts, &labels), 0.0);
    }
}
