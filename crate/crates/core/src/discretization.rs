//! Tensor spectral grid: radial oscillator eigenbasis in the confined plane,
//! periodic Fourier basis along the free axis.
//!
//! Coefficient arrays have shape `(K, Mz)` with the axial index in FFT order;
//! nodal arrays have shape `(N_r, Mz)` over (radial node, axial node).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2, ArrayViewMut2};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quadrature::{gauss_laguerre, laguerre_functions};

/// Tolerance on the quadrature Gram matrix of the radial basis.
pub const GRAM_TOL: f64 = 1e-10;

/// Resolution and geometry of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Number of radial oscillator modes.
    pub k: usize,
    /// Number of axial Fourier modes (even).
    pub mz: usize,
    /// Axial half-box length; the box is `[-lz, lz)`.
    pub lz: f64,
    /// Length scale of the Laguerre functions spanning the radial space.
    pub radial_scale: f64,
    /// Coefficient `ω²` of the transverse potential `ω²|y|²`.
    pub trap: f64,
    /// Number of radial quadrature nodes.
    pub radial_nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::new(48, 256, 24.0)
    }
}

impl GridSpec {
    /// Unit trap, unit radial scale, radial nodes oversampled twofold.
    pub fn new(k: usize, mz: usize, lz: f64) -> Self {
        GridSpec { k, mz, lz, radial_scale: 1.0, trap: 1.0, radial_nodes: 2 * k }
    }

    pub fn with_radial_scale(mut self, scale: f64) -> Self {
        self.radial_scale = scale;
        self
    }

    pub fn with_trap(mut self, trap: f64) -> Self {
        self.trap = trap;
        self
    }

    pub fn with_radial_nodes(mut self, n: usize) -> Self {
        self.radial_nodes = n;
        self
    }

    /// Geometry adapted to the decay and width of the ground state at
    /// `params`, keeping the mode counts `k` and `mz`.
    ///
    /// Along z the state decays like `exp(-sqrt(τ)|z|)`, so the box grows as
    /// `τ^{-1/2}` near the threshold. For very negative λ the state shrinks to
    /// width `|λ|^{-1/2}` in every direction and the radial functions are
    /// narrowed to match.
    pub fn adapted(k: usize, mz: usize, params: &ModelParams) -> Self {
        let tau = params.tau();
        let lz = AXIAL_DECAY_LENGTHS / tau.sqrt();
        let radial_scale = (FAR_RADIAL_SCALE / tau.sqrt()).min(TRAP_RADIAL_SCALE);
        GridSpec::new(k, mz, lz).with_radial_scale(radial_scale)
    }

    /// [`GridSpec::adapted`] with mode counts that resolve the state to
    /// roughly `1e-9` relative accuracy. Once the state is narrower than the
    /// trap ground mode its exponential radial tail converges slowly in the
    /// Gaussian-weighted basis and many more radial modes are needed.
    pub fn auto(params: &ModelParams) -> Self {
        if params.tau() < 3.0 {
            GridSpec::adapted(64, 384, params)
        } else {
            GridSpec::adapted(160, 512, params)
        }
    }
    fn validate(&self) -> Result<()> {
        if self.k < 4 {
            return Err(Error::InvalidResolution(format!("K = {} < 4", self.k)));
        }
        if self.mz < 8 || !self.mz.is_multiple_of(2) {
            return Err(Error::InvalidResolution(format!("Mz = {} must be even and >= 8", self.mz)));
        }
        if !(self.lz.is_finite() && self.lz > 0.0) {
            return Err(Error::InvalidResolution(format!("Lz = {} must be positive", self.lz)));
        }
        if !(self.radial_scale.is_finite() && self.radial_scale > 0.0) {
            return Err(Error::InvalidResolution(format!("radial scale {} must be positive", self.radial_scale)));
        }
        if !(self.trap.is_finite() && self.trap > 0.0) {
            return Err(Error::InvalidResolution(format!("trap {} must be positive", self.trap)));
        }
        if self.radial_nodes < self.k {
            return Err(Error::InvalidResolution(format!("{} radial nodes cannot resolve {} modes", self.radial_nodes, self.k)));
        }
        Ok(())
    }
}

/// How a grid is chosen for given parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum Resolution {
    /// [`GridSpec::auto`].
    #[default]
    Auto,
    /// [`GridSpec::adapted`] with fixed mode counts.
    Adapted { k: usize, mz: usize },
    /// The same grid for every parameter.
    Fixed(GridSpec),
}


impl Resolution {
    pub fn spec(&self, params: &ModelParams) -> GridSpec {
        match *self {
            Resolution::Auto => GridSpec::auto(params),
            Resolution::Adapted { k, mz } => GridSpec::adapted(k, mz, params),
            Resolution::Fixed(spec) => spec,
        }
    }
}

/// Decay lengths `1/sqrt(τ)` covered by the adapted axial half-box.
const AXIAL_DECAY_LENGTHS: f64 = 26.0;
/// Radial scale, in units of `τ^{-1/2}`, used once the state is narrower than
/// the trap ground mode.
const FAR_RADIAL_SCALE: f64 = 0.78;
/// Radial scale for states of trap width. Narrower than the ground mode
/// itself, which the basis still represents to roundoff, but the algebraic
/// tails of the excited radial content converge much faster.
const TRAP_RADIAL_SCALE: f64 = 0.5;

/// The tensor grid. Immutable after construction and cheap to share.
#[derive(Clone)]
pub struct Discretization {
    spec: GridSpec,
    r: Vec<f64>,
    rho: Vec<f64>,
    z: Vec<f64>,
    eig: Vec<f64>,
    /// ψ_k(r_i), shape (N_r, K).
    basis: Array2<f64>,
    /// ρ_i ψ_k(r_i), shape (K, N_r).
    analysis: Array2<f64>,
    /// Coefficients of ψ_k in the Laguerre functions, shape (K, K).
    rotation: Array2<f64>,
    /// Matrix of |y|² in the ψ basis.
    r2: Array2<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Discretization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Discretization").field("spec", &self.spec).finish()
    }
}

impl Discretization {
    /// Unit-trap grid with `K` radial modes, `Mz` axial modes and half-box `Lz`.
    pub fn build(k: usize, mz: usize, lz: f64) -> Result<Self> {
        Self::from_spec(GridSpec::new(k, mz, lz))
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let k = spec.k;
        let nr = spec.radial_nodes;
        let ell = spec.radial_scale;

        // Galerkin matrix of -Δ_y + ω²|y|² in the Laguerre functions of scale ℓ.
        // These are eigenfunctions of -Δ_y + |y|²/ℓ⁴, and the matrix of |y|²/ℓ²
        // is tridiagonal.
        let shift = spec.trap * ell * ell - 1.0 / (ell * ell);
        let t = |i: usize, j: usize| -> f64 {
            if i == j {
                2.0 * i as f64 + 1.0
            } else if i + 1 == j {
                -(j as f64)
            } else if j + 1 == i {
                -(i as f64)
            } else {
                0.0
            }
        };
        let h = DMatrix::from_fn(k, k, |i, j| {
            let d = if i == j { (4.0 * i as f64 + 2.0) / (ell * ell) } else { 0.0 };
            d + shift * t(i, j)
        });
        let se = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let eig: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let mut rotation = Array2::<f64>::zeros((k, k));
        for (col, &src) in order.iter().enumerate() {
            let v = se.eigenvectors.column(src);
            let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            for j in 0..k {
                rotation[[j, col]] = sign * v[j];
            }
        }

        let tmat = Array2::from_shape_fn((k, k), |(i, j)| ell * ell * t(i, j));
        let r2 = rotation.t().dot(&tmat).dot(&rotation);

        let (s, w) = gauss_laguerre(nr)?;
        let r: Vec<f64> = s.iter().map(|&s| ell * s.sqrt()).collect();
        let rho: Vec<f64> = w.iter().map(|&w| PI * ell * ell * w).collect();

        let norm = 1.0 / (ell * PI.sqrt());
        let mut chi = Array2::<f64>::zeros((nr, k));
        let mut buf = vec![0.0; k];
        for (i, &si) in s.iter().enumerate() {
            laguerre_functions(k, si, &mut buf);
            for j in 0..k {
                chi[[i, j]] = norm * buf[j];
            }
        }
        let basis = chi.dot(&rotation);
        let (basis, analysis) = if nr == k {
            orthonormalize(&basis, &rho)
        } else {
            let mut analysis = basis.t().to_owned();
            for (mut col, &w) in analysis.columns_mut().into_iter().zip(&rho) {
                col *= w;
            }
            (basis, analysis)
        };

        let mz = spec.mz;
        let z = (0..mz).map(|j| -spec.lz + 2.0 * spec.lz * j as f64 / mz as f64).collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(mz);
        let ifft = planner.plan_fft_inverse(mz);

        let grid = Discretization { spec, r, rho, z, eig, basis, analysis, rotation, r2, fft, ifft };
        let dev = grid.gram_deviation();
        if !(dev <= GRAM_TOL) {
            return Err(Error::GramCheckFailed { deviation: dev });
        }
        if spec.trap == 1.0 && spec.radial_scale == 1.0 {
            // Unit geometry: the Galerkin matrix is diagonal with entries 4k+2.
            for (kk, &e) in grid.eig.iter().enumerate() {
                let want = 4.0 * kk as f64 + 2.0;
                if (e - want).abs() > 1e-8 * want {
                    return Err(Error::InvalidResolution(format!("oscillator eigenvalue {kk} = {e}, expected {want}")));
                }
            }
        }
        Ok(grid)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn k(&self) -> usize {
        self.spec.k
    }

    pub fn mz(&self) -> usize {
        self.spec.mz
    }

    pub fn lz(&self) -> f64 {
        self.spec.lz
    }

    pub fn trap(&self) -> f64 {
        self.spec.trap
    }

    pub fn n_radial(&self) -> usize {
        self.spec.radial_nodes
    }

    pub fn radial_nodes(&self) -> &[f64] {
        &self.r
    }

    /// Weights ρ_i with `Σ ρ_i f(r_i) ≈ ∫_{ℝ²} f(|y|) dy`.
    pub fn radial_weights(&self) -> &[f64] {
        &self.rho
    }

    pub fn axial_nodes(&self) -> &[f64] {
        &self.z
    }

    /// Uniform axial quadrature weight.
    pub fn dz(&self) -> f64 {
        2.0 * self.spec.lz / self.spec.mz as f64
    }

    /// Eigenvalues of `-Δ_y + ω²|y|²` on the radial sector, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig
    }

    /// ψ_k(r_i), shape (N_r, K).
    pub fn basis(&self) -> &Array2<f64> {
        &self.basis
    }

    /// Matrix of `|y|²` in the radial eigenbasis.
    pub fn r2_matrix(&self) -> &Array2<f64> {
        &self.r2
    }

    /// Signed integer wavenumber of FFT slot `m`; the Nyquist slot maps to `-Mz/2`.
    pub fn wavenumber(&self, m: usize) -> isize {
        let mz = self.spec.mz;
        if m < mz / 2 {
            m as isize
        } else {
            m as isize - mz as isize
        }
    }

    /// FFT slot holding the wavenumber opposite to slot `m`.
    pub fn mirror(&self, m: usize) -> usize {
        (self.spec.mz - m) % self.spec.mz
    }

    /// Axial frequency ξ_m = π m / Lz.
    pub fn xi(&self, m: usize) -> f64 {
        PI * self.wavenumber(m) as f64 / self.spec.lz
    }

    pub fn is_nyquist(&self, m: usize) -> bool {
        m == self.spec.mz / 2
    }

    /// Whether fields on `self` and `other` may be combined.
    pub fn compatible(&self, other: &Discretization) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        let (a, b) = (&self.spec, &other.spec);
        a.k == b.k
            && a.mz == b.mz
            && a.radial_nodes == b.radial_nodes
            && close(a.lz, b.lz)
            && close(a.radial_scale, b.radial_scale)
            && close(a.trap, b.trap)
    }

    /// Largest deviation of the quadrature Gram matrix of the radial basis
    /// from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let g = self.analysis.dot(&self.basis);
        g.indexed_iter().map(|((a, b), &v)| (v - if a == b { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max)
    }

    /// Diagonal multiplier `a λ_k + b ξ_m² + c`, shape (K, Mz).
    pub fn multiplier(&self, a: f64, b: f64, c: f64) -> Array2<f64> {
        Array2::from_shape_fn((self.k(), self.mz()), |(k, m)| {
            let xi = self.xi(m);
            a * self.eig[k] + b * xi * xi + c
        })
    }

    /// Synthesis: coefficients (K, Mz) to node values (N_r, Mz).
    pub fn to_nodes(&self, coeffs: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        self.check_shape(coeffs, (self.k(), self.mz()))?;
        let scale = 1.0 / (2.0 * self.spec.lz).sqrt();
        let mut tmp = coeffs.as_standard_layout().into_owned();
        for row in tmp.rows_mut() {
            for (m, c) in row.into_iter().enumerate() {
                *c *= if m % 2 == 0 { scale } else { -scale };
            }
        }
        self.ifft.process(tmp.as_slice_mut().expect("standard layout"));
        Ok(radial_matmul(&self.basis, &tmp.view()))
    }

    /// Analysis: node values (N_r, Mz) to coefficients (K, Mz).
    pub fn to_coeffs(&self, nodes: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        self.check_shape(nodes, (self.n_radial(), self.mz()))?;
        let nodes = nodes.as_standard_layout();
        let mut tmp = radial_matmul(&self.analysis, &nodes.view());
        self.fft.process(tmp.as_slice_mut().expect("standard layout"));
        let scale = (2.0 * self.spec.lz).sqrt() / self.mz() as f64;
        for row in tmp.rows_mut() {
            for (m, c) in row.into_iter().enumerate() {
                *c *= if m % 2 == 0 { scale } else { -scale };
            }
        }
        Ok(tmp)
    }

    fn check_shape(&self, a: &Array2<Complex64>, want: (usize, usize)) -> Result<()> {
        let got = a.dim();
        if got != want {
            return Err(Error::ShapeMismatch { expected: want, got });
        }
        Ok(())
    }

    /// ψ_k(r) for all k at an arbitrary radius.
    pub fn radial_values_at(&self, r: f64) -> Vec<f64> {
        let k = self.k();
        let ell = self.spec.radial_scale;
        let mut chi = vec![0.0; k];
        laguerre_functions(k, (r / ell).powi(2), &mut chi);
        let norm = 1.0 / (ell * PI.sqrt());
        (0..k).map(|col| (0..k).map(|j| self.rotation[[j, col]] * chi[j]).sum::<f64>() * norm).collect()
    }

    /// Axial basis functions `exp(i ξ_m z)/sqrt(2 Lz)` at `z`, in FFT order.
    /// The Nyquist mode is taken as its real (cosine) part. Outside the box
    /// all values are zero.
    pub fn axial_values_at(&self, z: f64) -> Vec<Complex64> {
        let lz = self.spec.lz;
        let mz = self.mz();
        if z.abs() > lz * (1.0 + 1e-14) {
            return vec![Complex64::new(0.0, 0.0); mz];
        }
        let norm = 1.0 / (2.0 * lz).sqrt();
        (0..mz)
            .map(|m| {
                let phase = self.xi(m) * z;
                if self.is_nyquist(m) {
                    Complex64::new(norm * phase.cos(), 0.0)
                } else {
                    Complex64::from_polar(norm, phase)
                }
            })
            .collect()
    }

    /// The same basis with coordinates stretched: `r ↦ sy r`, `z ↦ sz z`.
    ///
    /// The basis functions are relabeled exactly (no recomputation), so a
    /// coefficient array describes the stretched function up to the factor
    /// `1/(sy sqrt(sz))` carried by the L² normalization. Eigenvalues scale by
    /// `sy^{-2}` and the trap coefficient by `sy^{-4}`.
    pub fn stretched(&self, sy: f64, sz: f64) -> Result<Discretization> {
        if !(sy.is_finite() && sy > 0.0 && sz.is_finite() && sz > 0.0) {
            return Err(Error::InvalidParams(format!("invalid stretch ({sy}, {sz})")));
        }
        let mut g = self.clone();
        g.spec.radial_scale *= sy;
        g.spec.trap /= sy.powi(4);
        g.spec.lz *= sz;
        g.r.iter_mut().for_each(|r| *r *= sy);
        g.rho.iter_mut().for_each(|w| *w *= sy * sy);
        g.z.iter_mut().for_each(|z| *z *= sz);
        g.eig.iter_mut().for_each(|e| *e /= sy * sy);
        g.basis /= sy;
        g.analysis *= sy;
        g.r2 *= sy * sy;
        Ok(g)
    }
}

/// Replace `W^{1/2} B` by its nearest matrix with orthonormal columns (the
/// polar factor). The correction is at the level of the quadrature error
/// (about 1e-12), but afterwards the square radial transforms of collocation
/// grids are isometries to roundoff, which long time integrations rely on.
fn orthonormalize(basis: &Array2<f64>, rho: &[f64]) -> (Array2<f64>, Array2<f64>) {
    let (nr, k) = basis.dim();
    let q = DMatrix::from_fn(nr, k, |i, j| rho[i].sqrt() * basis[[i, j]]);
    let svd = q.svd(true, true);
    let polar = svd.u.expect("left vectors") * svd.v_t.expect("right vectors");
    let b = Array2::from_shape_fn((nr, k), |(i, j)| polar[(i, j)] / rho[i].sqrt());
    let a = Array2::from_shape_fn((k, nr), |(j, i)| polar[(i, j)] * rho[i].sqrt());
    (b, a)
}

fn real_view<'a>(a: &'a ArrayView2<'_, Complex64>) -> ArrayView2<'a, f64> {
    let (rows, cols) = a.dim();
    let flat: &[f64] = bytemuck::cast_slice(a.as_slice().expect("standard layout"));
    ArrayView2::from_shape((rows, 2 * cols), flat).expect("shape")
}

/// `m (real, r×k) · a (complex, k×n)`, computed as one real product on the
/// interleaved representation.
pub(crate) fn radial_matmul(m: &Array2<f64>, a: &ArrayView2<'_, Complex64>) -> Array2<Complex64> {
    let rows = m.nrows();
    let cols = a.ncols();
    let mut out = Array2::<Complex64>::zeros((rows, cols));
    {
        let flat: &mut [f64] = bytemuck::cast_slice_mut(out.as_slice_mut().expect("standard layout"));
        let mut ov = ArrayViewMut2::from_shape((rows, 2 * cols), flat).expect("shape");
        general_mat_mul(1.0, m, &real_view(a), 0.0, &mut ov);
    }
    out
}
