//! Matrix-free iterative solvers on plain real vectors: restarted GMRES with
//! right preconditioning, and block LOBPCG for the lowest eigenpairs of a
//! symmetric operator.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += s x`
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += s * x);
}

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    /// Target for `‖b − A x‖ / ‖b‖`.
    pub rel_tol: f64,
    /// Krylov dimension between restarts.
    pub restart: usize,
    /// Total number of operator applications.
    pub max_iter: usize,
    /// A restart cycle that reduces the residual by less than this factor
    /// counts as stagnation.
    pub stagnation: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions { rel_tol: 1e-10, restart: 50, max_iter: 500, stagnation: 0.999 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovInfo {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Solve `A x = b` with right preconditioner `M ≈ A^{-1}`.
pub fn gmres(
    op: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: GmresOptions,
) -> Result<(Vec<f64>, KrylovInfo)> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = x0.map(|x| x.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], KrylovInfo { iterations: 0, rel_residual: 0.0 }));
    }
    let residual_of = |x: &[f64]| -> Vec<f64> {
        let ax = op(x);
        b.iter().zip(&ax).map(|(b, a)| b - a).collect()
    };
    let mut r = residual_of(&x);
    let mut rel = norm(&r) / bnorm;
    let mut iterations = 0;
    while rel > opts.rel_tol {
        if iterations >= opts.max_iter {
            return Err(Error::NotConverged { iterations, residual: rel });
        }
        let beta = norm(&r);
        let m = opts.restart.min(opts.max_iter - iterations).max(1);
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..m {
            let mut w = op(&precond(&v[j]));
            iterations += 1;
            // modified Gram–Schmidt, applied twice
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let hij = dot(&w, vi);
                    h[i][j] += hij;
                    axpy(&mut w, -hij, vi);
                }
            }
            let hn = norm(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = h[j][j].hypot(h[j + 1][j]);
            if d == 0.0 {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = h[j][j] / d;
                sn[j] = h[j + 1][j] / d;
            }
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            if g[j + 1].abs() / bnorm <= opts.rel_tol || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|x| x / hn).collect());
        }
        // back substitution
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let s: f64 = (i + 1..used).map(|k| h[i][k] * y[k]).sum();
            y[i] = if h[i][i] == 0.0 { 0.0 } else { (g[i] - s) / h[i][i] };
        }
        let mut z = vec![0.0; n];
        for (yi, vi) in y.iter().zip(&v) {
            axpy(&mut z, *yi, vi);
        }
        axpy(&mut x, 1.0, &precond(&z));
        r = residual_of(&x);
        let new_rel = norm(&r) / bnorm;
        if new_rel > opts.rel_tol && new_rel > opts.stagnation * rel {
            return Err(Error::NotConverged { iterations, residual: new_rel });
        }
        rel = new_rel;
    }
    Ok((x, KrylovInfo { iterations, rel_residual: rel }))
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

fn gram(a: &[Vec<f64>], b: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| dot(&a[i], &b[j]))
}

/// `Σ_j vs[j] * c[(j, col)]` for every column of `c`.
fn combine(vs: &[Vec<f64>], c: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let n = vs.first().map_or(0, |v| v.len());
    (0..c.ncols())
        .map(|col| {
            let mut out = vec![0.0; n];
            for (j, v) in vs.iter().enumerate() {
                axpy(&mut out, c[(j, col)], v);
            }
            out
        })
        .collect()
}

/// Orthonormalize `vs` (and the images `avs` alongside) through the
/// eigendecomposition of their Gram matrix, dropping near-dependent
/// directions.
fn svqb(vs: &[Vec<f64>], avs: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    if vs.is_empty() {
        return (vec![], vec![]);
    }
    let g = gram(vs, vs);
    let d: Vec<f64> = (0..vs.len()).map(|i| g[(i, i)].sqrt().max(f64::MIN_POSITIVE)).collect();
    let gs = DMatrix::from_fn(vs.len(), vs.len(), |i, j| g[(i, j)] / (d[i] * d[j]));
    let se = SymmetricEigen::new(gs);
    let smax = se.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..vs.len()).filter(|&i| se.eigenvalues[i] > 1e-12 * smax).collect();
    let c = DMatrix::from_fn(vs.len(), keep.len(), |i, j| se.eigenvectors[(i, keep[j])] / (d[i] * se.eigenvalues[keep[j]].sqrt()));
    (combine(vs, &c), combine(avs, &c))
}

/// Lowest `x0.len()` eigenpairs of a symmetric operator with a symmetric
/// positive definite preconditioner. Converged when every residual norm is
/// at most `tol` (eigenvectors have unit norm).
pub fn lobpcg(
    op: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    x0: Vec<Vec<f64>>,
    tol: f64,
    max_iter: usize,
) -> Result<EigenPairs> {
    let nb = x0.len();
    let ax0: Vec<Vec<f64>> = x0.iter().map(|x| op(x)).collect();
    let (mut x, mut ax) = svqb(&x0, &ax0);
    if x.len() < nb {
        return Err(Error::InvalidParams("initial block is rank deficient".into()));
    }
    let mut p: Vec<Vec<f64>> = vec![];
    let mut ap: Vec<Vec<f64>> = vec![];
    // initial Rayleigh–Ritz
    let h = gram(&x, &ax);
    let se = SymmetricEigen::new((&h + h.transpose()) * 0.5);
    let order = sorted(&se.eigenvalues);
    let y = DMatrix::from_fn(nb, nb, |i, j| se.eigenvectors[(i, order[j])]);
    let mut theta: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    x = combine(&x, &y);
    ax = combine(&ax, &y);
    let mut res_norms = vec![f64::INFINITY; nb];

    for it in 0..max_iter {
        let r: Vec<Vec<f64>> = (0..nb).map(|i| ax[i].iter().zip(&x[i]).map(|(a, x)| a - theta[i] * x).collect()).collect();
        res_norms = r.iter().map(|r| norm(r)).collect();
        if res_norms.iter().all(|&rn| rn <= tol) {
            return Ok(EigenPairs { values: theta, vectors: x, residuals: res_norms, iterations: it });
        }
        // Converged columns contribute no new directions (soft locking).
        let active: Vec<usize> = (0..nb).filter(|&i| res_norms[i] > tol).collect();
        let w: Vec<Vec<f64>> = active.iter().map(|&i| precond(&r[i])).collect();
        let aw: Vec<Vec<f64>> = w.iter().map(|w| op(w)).collect();
        let mut z = w;
        z.append(&mut p);
        let mut az = aw;
        az.append(&mut ap);
        for _ in 0..2 {
            project_out(&x, &ax, &mut z, &mut az);
            (z, az) = svqb(&z, &az);
        }
        let mut s = x.clone();
        s.extend(z.iter().cloned());
        let mut as_ = ax.clone();
        as_.extend(az.iter().cloned());
        let h = gram(&s, &as_);
        let se = SymmetricEigen::new((&h + h.transpose()) * 0.5);
        let order = sorted(&se.eigenvalues);
        let ns = s.len();
        let y = DMatrix::from_fn(ns, nb, |i, j| se.eigenvectors[(i, order[j])]);
        theta = order.iter().take(nb).map(|&i| se.eigenvalues[i]).collect();
        x = combine(&s, &y);
        ax = combine(&as_, &y);
        let yz = y.rows(nb, ns - nb).into_owned();
        p = combine(&z, &yz);
        ap = combine(&az, &yz);
    }
    let worst = res_norms.iter().copied().fold(0.0, f64::max);
    Err(Error::EigsNotConverged { iterations: max_iter, residual: worst })
}

/// Remove the components along the orthonormal block `x` from `z`,
/// updating the images alongside.
fn project_out(x: &[Vec<f64>], ax: &[Vec<f64>], z: &mut [Vec<f64>], az: &mut [Vec<f64>]) {
    for (v, av) in z.iter_mut().zip(az.iter_mut()) {
        for (xi, axi) in x.iter().zip(ax) {
            let c = dot(v, xi);
            axpy(v, -c, xi);
            axpy(av, -c, axi);
        }
    }
}

fn sorted(values: &nalgebra::DVector<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}
