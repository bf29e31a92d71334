//! Floating-point kernels: pairwise summation, population standard deviation
//! and least squares through the normal equations.

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (cascade) summation. Error grows with log n rather than n.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| pairwise_sum(xs) / xs.len() as f64)
}

/// Population standard deviation, two-pass.
pub fn std_pop(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    Some((pairwise_sum(&sq) / xs.len() as f64).sqrt())
}

pub const PIVOT_EPS: f64 = 1e-12;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `PIVOT_EPS` relative to the
/// largest entry of `a`.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = PIVOT_EPS * scale;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if !(a[pivot][col].abs() > tol) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Ordinary least squares `y ~ 1 + x`. Returns `[intercept, b_1, .., b_k]`,
/// or `None` when the system is underdetermined or singular.
///
/// Features are centered before forming the normal equations, which keeps
/// large-offset features (epoch days) well conditioned.
pub fn ols(xs: &[Vec<f64>], ys: &[f64]) -> Option<Vec<f64>> {
    let n = ys.len();
    let k = xs.first().map_or(0, Vec::len);
    if n < k + 1 || xs.len() != n {
        return None;
    }
    let means: Vec<f64> = (0..k)
        .map(|j| mean(&xs.iter().map(|r| r[j]).collect::<Vec<_>>()).unwrap_or(0.0))
        .collect();
    let y_mean = mean(ys)?;
    let centered: Vec<Vec<f64>> = xs
        .iter()
        .map(|r| r.iter().zip(&means).map(|(x, m)| x - m).collect())
        .collect();
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for i in 0..k {
        for j in i..k {
            let terms: Vec<f64> = centered.iter().map(|r| r[i] * r[j]).collect();
            let s = pairwise_sum(&terms);
            xtx[i][j] = s;
            xtx[j][i] = s;
        }
        let terms: Vec<f64> = centered.iter().zip(ys).map(|(r, y)| r[i] * (y - y_mean)).collect();
        xty[i] = pairwise_sum(&terms);
    }
    let slopes = if k == 0 { Vec::new() } else { solve(xtx, xty)? };
    let intercept = y_mean - slopes.iter().zip(&means).map(|(b, m)| b * m).sum::<f64>();
    let mut coef = Vec::with_capacity(k + 1);
    coef.push(intercept);
    coef.extend(slopes);
    coef.iter().all(|c| c.is_finite()).then_some(coef)
}

/// Largest `s` with `s^k <= cap`, computed without floating-point roots.
pub fn integer_root(cap: u64, k: u32) -> u64 {
    if k == 0 {
        return cap;
    }
    let mut s = 1u64;
    while (s + 1).checked_pow(k).is_some_and(|p| p <= cap) {
        s += 1;
    }
    s
}
