//! Products of group elements and inverses ("words") and the gradient of
//! their squared distance to the identity.
//!
//! Every Lie-group difference is such a word, e.g. `u_{i+1} ∘ u_i⁻¹`, so one
//! adjoint rule covers all of them: for `P = A ∘ h ∘ B` the variation in `h`
//! enters as `DL_A ∘ DR_B`, whose adjoint is `DR_{B⁻¹} ∘ DL_{A⁻¹}` for a
//! bi-invariant metric.

use crate::error::Result;
use crate::linalg::scale;
use crate::manifold::LieGroup;

/// One letter of a word: a group element, possibly inverted.
#[derive(Clone, Copy, Debug)]
pub struct Letter<'a> {
    pub point: &'a [f64],
    pub inverted: bool,
}

impl<'a> Letter<'a> {
    pub fn plain(point: &'a [f64]) -> Self {
        Letter { point, inverted: false }
    }
    pub fn inv(point: &'a [f64]) -> Self {
        Letter { point, inverted: true }
    }
}

fn letter_value(g: &dyn LieGroup, l: &Letter<'_>) -> Vec<f64> {
    if l.inverted {
        g.inverse(l.point)
    } else {
        l.point.to_vec()
    }
}

/// The product `h_1 ∘ h_2 ∘ … ∘ h_m`.
pub fn word_value(g: &dyn LieGroup, word: &[Letter<'_>]) -> Vec<f64> {
    let mut p = g.identity();
    for l in word {
        p = g.compose(&p, &letter_value(g, l));
    }
    p
}

/// `dist(word, e)`.
pub fn word_dist(g: &dyn LieGroup, word: &[Letter<'_>]) -> f64 {
    g.dist(&word_value(g, word), &g.identity())
}

/// `dist²(word, e)` and its gradient with respect to each letter's point.
pub fn word_dist_sq_grad(g: &dyn LieGroup, word: &[Letter<'_>]) -> Result<(f64, Vec<Vec<f64>>)> {
    let m = word.len();
    let vals: Vec<Vec<f64>> = word.iter().map(|l| letter_value(g, l)).collect();
    let mut prefix = vec![g.identity()];
    for v in &vals {
        let last = prefix.last().unwrap();
        prefix.push(g.compose(last, v));
    }
    let mut suffix = vec![g.identity(); m + 1];
    for k in (0..m).rev() {
        suffix[k] = g.compose(&vals[k], &suffix[k + 1]);
    }
    let p = &prefix[m];
    let e = g.identity();
    let d2 = g.dist(p, &e).powi(2);
    let g_p = scale(&g.log(p, &e)?, -2.0);
    let mut grads = Vec::with_capacity(m);
    for k in 0..m {
        let a = &prefix[k];
        let b = &suffix[k + 1];
        let hb = &suffix[k];
        // Pull back through the left factor A, then the right factor B.
        let t = g.left_translate_tangent(&g.inverse(a), p, &g_p);
        let t = g.right_translate_tangent(&g.inverse(b), hb, &t);
        let t = if word[k].inverted { g.inverse_tangent(&vals[k], &t) } else { t };
        grads.push(t);
    }
    Ok((d2, grads))
}
