//! Small dense-vector helpers on `&[f64]`.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `a + s * b`
#[inline]
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` for (numerically) singular matrices.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-13 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Unit directions used for ray casting: `±e_i` in 1D, `count` equally spaced
/// angles in 2D, and the 26 lattice directions in 3D and above (first three axes).
pub fn ray_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        0 => vec![],
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count.max(4))
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / count.max(4) as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut dirs = Vec::new();
            for i in -1i32..=1 {
                for j in -1i32..=1 {
                    for k in -1i32..=1 {
                        if i == 0 && j == 0 && k == 0 {
                            continue;
                        }
                        let mut d = vec![0.0; n];
                        d[0] = i as f64;
                        d[1] = j as f64;
                        d[2] = k as f64;
                        let nd = norm(&d);
                        dirs.push(scale(&d, 1.0 / nd));
                    }
                }
            }
            for axis in 3..n {
                for s in [1.0, -1.0] {
                    let mut d = vec![0.0; n];
                    d[axis] = s;
                    dirs.push(d);
                }
            }
            dirs
        }
    }
}
