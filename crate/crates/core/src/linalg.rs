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
pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `y += s * x`
#[inline]
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

#[inline]
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Gram-Schmidt completion: orthonormal vectors (Euclidean) spanning the
/// complement of `fixed` (assumed orthonormal) in R^n.
pub fn orthonormal_complement(fixed: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = fixed.to_vec();
    let mut out = Vec::new();
    // Try the coordinate axes in order of least overlap with the fixed span
    // so the construction stays well conditioned.
    let mut axes: Vec<(f64, usize)> = (0..n)
        .map(|k| (fixed.iter().map(|f| f[k] * f[k]).sum::<f64>(), k))
        .collect();
    axes.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, k) in axes {
        if basis.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                axpy(&mut v, -c, b);
            }
        }
        let nv = norm(&v);
        if nv > 1e-6 {
            let v = scale(&v, 1.0 / nv);
            basis.push(v.clone());
            out.push(v);
        }
    }
    out
}
