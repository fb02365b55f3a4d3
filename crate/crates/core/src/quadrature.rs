//! Gauss–Laguerre quadrature and scaled Laguerre functions.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest supported node count. Beyond this the scaled Laguerre functions
/// underflow at the outermost node.
pub const MAX_NODES: usize = 320;

/// `e_j(s) = L_j(s) exp(-s/2)` for `j = 0..n`, via the three-term
/// recurrence. These stay bounded by 1 in magnitude for `s >= 0`.
pub fn laguerre_functions(n: usize, s: f64, out: &mut [f64]) {
    debug_assert!(out.len() >= n);
    if n == 0 {
        return;
    }
    out[0] = (-0.5 * s).exp();
    if n == 1 {
        return;
    }
    out[1] = (1.0 - s) * out[0];
    for j in 1..n - 1 {
        let jf = j as f64;
        out[j + 1] = ((2.0 * jf + 1.0 - s) * out[j] - jf * out[j - 1]) / (jf + 1.0);
    }
}

/// Nodes `s_i` and modified weights `w_i` such that
/// `∫_0^∞ g(s) ds ≈ Σ w_i g(s_i)` is exact whenever `g(s) exp(s)` is a
/// polynomial of degree at most `2n - 1`.
pub fn gauss_laguerre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > MAX_NODES {
        return Err(Error::InvalidResolution(format!("Gauss-Laguerre node count {n} outside 1..={MAX_NODES}")));
    }
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * i as f64 + 1.0
        } else if i + 1 == j {
            j as f64
        } else if j + 1 == i {
            i as f64
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);

    let mut buf = vec![0.0; n + 2];
    let nf = n as f64;
    for s in nodes.iter_mut() {
        // Newton on L_n using s L_n' = n (L_n - L_{n-1}).
        for _ in 0..4 {
            laguerre_functions(n + 1, *s, &mut buf);
            let (ln, lm) = (buf[n], buf[n - 1]);
            let denom = nf * (ln - lm);
            if denom == 0.0 {
                break;
            }
            let step = *s * ln / denom;
            *s -= step;
            if step.abs() <= 1e-16 * s.abs() {
                break;
            }
        }
    }
    let weights = nodes
        .iter()
        .map(|&s| {
            laguerre_functions(n + 2, s, &mut buf);
            let e = buf[n + 1];
            s / ((nf + 1.0) * (nf + 1.0) * e * e)
        })
        .collect();
    Ok((nodes, weights))
}
