//! Functions on the tensor grid, held in nodal and/or coefficient form.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::{radial_matmul, Discretization, GridSpec};
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Symmetry flags carried by a field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symmetry {
    pub even_z: bool,
    pub real: bool,
    pub positive: bool,
}

/// A scalar field. Both representations are computed on demand and cached;
/// fields are never mutated in place.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Discretization>,
    real: bool,
    nodes: OnceLock<Array2<Complex64>>,
    coeffs: OnceLock<Array2<Complex64>>,
    symmetry: Symmetry,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl Field {
    pub fn zeros(grid: Arc<Discretization>) -> Field {
        let dim = (grid.k(), grid.mz());
        Field::with_coeffs_unchecked(grid, Array2::zeros(dim), true)
    }

    pub fn from_real_nodes(grid: Arc<Discretization>, values: Array2<f64>) -> Result<Field> {
        let want = (grid.n_radial(), grid.mz());
        if values.dim() != want {
            return Err(Error::ShapeMismatch { expected: want, got: values.dim() });
        }
        let nodes = values.mapv(|v| Complex64::new(v, 0.0));
        Ok(Field::with_nodes_unchecked(grid, nodes, true))
    }

    pub fn from_complex_nodes(grid: Arc<Discretization>, values: Array2<Complex64>) -> Result<Field> {
        let want = (grid.n_radial(), grid.mz());
        if values.dim() != want {
            return Err(Error::ShapeMismatch { expected: want, got: values.dim() });
        }
        Ok(Field::with_nodes_unchecked(grid, values, false))
    }

    /// Field from coefficients. For a real field the coefficients are
    /// projected onto the Hermitian-symmetric subspace `c_{-m} = conj(c_m)`.
    pub fn from_coeffs(grid: Arc<Discretization>, coeffs: Array2<Complex64>, real: bool) -> Result<Field> {
        let want = (grid.k(), grid.mz());
        if coeffs.dim() != want {
            return Err(Error::ShapeMismatch { expected: want, got: coeffs.dim() });
        }
        let coeffs = if real { hermitian_part(&grid, &coeffs) } else { coeffs };
        Ok(Field::with_coeffs_unchecked(grid, coeffs, real))
    }

    /// Real field sampled from `f(r, z)` at the nodes.
    pub fn from_fn(grid: Arc<Discretization>, f: impl Fn(f64, f64) -> f64) -> Field {
        let values = Array2::from_shape_fn((grid.n_radial(), grid.mz()), |(i, j)| {
            Complex64::new(f(grid.radial_nodes()[i], grid.axial_nodes()[j]), 0.0)
        });
        Field::with_nodes_unchecked(grid, values, true)
    }

    /// Real product field `f(r) g(z)`.
    pub fn separable(grid: Arc<Discretization>, f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> Field {
        let fr: Vec<f64> = grid.radial_nodes().iter().map(|&r| f(r)).collect();
        let gz: Vec<f64> = grid.axial_nodes().iter().map(|&z| g(z)).collect();
        Field::from_fn(grid.clone(), |_, _| 0.0).map_nodes_indexed(|i, j, _| Complex64::new(fr[i] * gz[j], 0.0))
    }

    fn with_nodes_unchecked(grid: Arc<Discretization>, nodes: Array2<Complex64>, real: bool) -> Field {
        let cell = OnceLock::new();
        let _ = cell.set(nodes);
        Field { grid, real, nodes: cell, coeffs: OnceLock::new(), symmetry: Symmetry { real, ..Symmetry::default() } }
    }

    fn with_coeffs_unchecked(grid: Arc<Discretization>, coeffs: Array2<Complex64>, real: bool) -> Field {
        let cell = OnceLock::new();
        let _ = cell.set(coeffs);
        Field { grid, real, nodes: OnceLock::new(), coeffs: cell, symmetry: Symmetry { real, ..Symmetry::default() } }
    }

    pub fn grid(&self) -> &Arc<Discretization> {
        &self.grid
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Field {
        self.symmetry = Symmetry { real: self.real, ..symmetry };
        self
    }

    /// Node values, shape (N_r, Mz). Imaginary parts of real fields are zero.
    pub fn nodes(&self) -> &Array2<Complex64> {
        self.nodes.get_or_init(|| {
            let c = self.coeffs.get().expect("field holds coefficients");
            let mut v = self.grid.to_nodes(c).expect("coefficient shape checked at construction");
            if self.real {
                v.mapv_inplace(|z| Complex64::new(z.re, 0.0));
            }
            v
        })
    }

    /// Spectral coefficients, shape (K, Mz).
    pub fn coeffs(&self) -> &Array2<Complex64> {
        self.coeffs.get_or_init(|| {
            let v = self.nodes.get().expect("field holds node values");
            self.grid.to_coeffs(v).expect("node shape checked at construction")
        })
    }

    pub fn real_nodes(&self) -> Array2<f64> {
        self.nodes().mapv(|z| z.re)
    }

    fn check_grid(&self, other: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.compatible(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Same function regarded as complex-valued.
    pub fn to_complex(&self) -> Field {
        let mut f = self.clone();
        f.real = false;
        f.symmetry.real = false;
        f.symmetry.positive = false;
        f
    }

    /// Real part.
    pub fn re(&self) -> Field {
        let nodes = self.nodes().mapv(|z| Complex64::new(z.re, 0.0));
        Field::with_nodes_unchecked(self.grid.clone(), nodes, true)
    }

    pub fn map_coeffs(&self, f: impl Fn(usize, usize, Complex64) -> Complex64) -> Field {
        let c = Array2::from_shape_fn(self.coeffs().dim(), |(k, m)| f(k, m, self.coeffs()[[k, m]]));
        Field::from_coeffs(self.grid.clone(), c, self.real).expect("shape preserved")
    }

    pub fn map_nodes_indexed(&self, f: impl Fn(usize, usize, Complex64) -> Complex64) -> Field {
        let v = Array2::from_shape_fn(self.nodes().dim(), |(i, j)| f(i, j, self.nodes()[[i, j]]));
        let real = self.real && v.iter().all(|z| z.im == 0.0);
        Field::with_nodes_unchecked(self.grid.clone(), v, real)
    }

    pub fn scale(&self, s: f64) -> Field {
        let mut out = Field::with_coeffs_unchecked(self.grid.clone(), self.coeffs() * s, self.real);
        if let Some(n) = self.nodes.get() {
            let _ = out.nodes.set(n * s);
        }
        out.symmetry = Symmetry { positive: self.symmetry.positive && s > 0.0, ..self.symmetry };
        out
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Field) -> Result<Field> {
        self.check_grid(other)?;
        let c = self.coeffs() + &(other.coeffs() * s);
        let real = self.real && other.real;
        Ok(Field::with_coeffs_unchecked(self.grid.clone(), c, real))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpy(-1.0, other)
    }

    /// L² inner product `∫ conj(self) other`, evaluated on coefficients.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.check_grid(other)?;
        Ok(self.coeffs().iter().zip(other.coeffs().iter()).map(|(a, b)| a.conj() * b).sum())
    }

    /// Real part of the L² inner product.
    pub fn dot(&self, other: &Field) -> Result<f64> {
        Ok(self.inner(other)?.re)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs().iter().map(|c| c.norm_sqr()).sum()
    }

    /// `∫ |f|²` by nodal quadrature.
    pub fn l2_norm_sq_nodal(&self) -> f64 {
        let g = &self.grid;
        let dz = g.dz();
        self.nodes()
            .rows()
            .into_iter()
            .zip(g.radial_weights())
            .map(|(row, &w)| w * dz * row.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// `∫ conj(self) other` by nodal quadrature.
    pub fn inner_nodal(&self, other: &Field) -> Result<Complex64> {
        self.check_grid(other)?;
        let g = &self.grid;
        let dz = g.dz();
        let mut acc = zero();
        for (i, &w) in g.radial_weights().iter().enumerate() {
            let mut row = zero();
            for j in 0..g.mz() {
                row += self.nodes()[[i, j]].conj() * other.nodes()[[i, j]];
            }
            acc += row * (w * dz);
        }
        Ok(acc)
    }

    /// Apply `a(-Δ_y + ω²|y|²) + b(-∂_zz) + c`.
    pub fn apply_linear(&self, a: f64, b: f64, c: f64) -> Field {
        let mult = self.grid.multiplier(a, b, c);
        let coeffs = self.coeffs() * &mult.mapv(|x| Complex64::new(x, 0.0));
        let mut out = Field::with_coeffs_unchecked(self.grid.clone(), coeffs, self.real);
        out.symmetry = Symmetry { positive: false, ..self.symmetry };
        out
    }

    /// Inverse of [`Field::apply_linear`]. Fails with `SingularMode` when a
    /// vanishing divisor meets nonzero content.
    pub fn solve_linear(&self, a: f64, b: f64, c: f64) -> Result<Field> {
        let g = &self.grid;
        let mut out = self.coeffs().clone();
        for ((k, m), v) in out.indexed_iter_mut() {
            let xi = g.xi(m);
            let (ta, tb) = (a * g.eigenvalues()[k], b * xi * xi);
            let d = ta + tb + c;
            let size = ta.abs() + tb.abs() + c.abs();
            if d == 0.0 || d.abs() <= 1e-13 * size {
                if *v != zero() {
                    return Err(Error::SingularMode(k, g.wavenumber(m)));
                }
                continue;
            }
            *v /= d;
        }
        let mut f = Field::with_coeffs_unchecked(self.grid.clone(), out, self.real);
        f.symmetry = Symmetry { positive: false, ..self.symmetry };
        Ok(f)
    }

    /// Keep only the lowest transverse mode.
    pub fn project_p(&self) -> Field {
        self.map_coeffs(|k, _, c| if k == 0 { c } else { zero() }).with_symmetry(Symmetry { positive: false, ..self.symmetry })
    }

    /// Remove the lowest transverse mode.
    pub fn project_q(&self) -> Field {
        self.map_coeffs(|k, _, c| if k == 0 { zero() } else { c }).with_symmetry(Symmetry { positive: false, ..self.symmetry })
    }

    /// Project onto real fields even in z: `c_{k,m} ← Re((c_{k,m} + c_{k,-m})/2)`.
    /// Idempotent bit-for-bit.
    pub fn symmetrize(&self) -> Field {
        let g = &self.grid;
        let c = self.coeffs();
        let out = Array2::from_shape_fn(c.dim(), |(k, m)| {
            let mm = g.mirror(m);
            Complex64::new((c[[k, m]].re + c[[k, mm]].re) / 2.0, 0.0)
        });
        let mut f = Field::with_coeffs_unchecked(self.grid.clone(), out, true);
        f.symmetry = Symmetry { even_z: true, real: true, positive: self.symmetry.positive };
        f
    }

    /// Whether all node values are strictly positive.
    pub fn nodes_positive(&self) -> bool {
        self.nodes().iter().all(|z| z.re > 0.0)
    }

    /// Value at an arbitrary point, zero outside the axial box.
    pub fn value_at(&self, r: f64, z: f64) -> Complex64 {
        let psi = self.grid.radial_values_at(r);
        let e = self.grid.axial_values_at(z);
        let c = self.coeffs();
        let mut acc = zero();
        for (k, &pk) in psi.iter().enumerate() {
            let mut row = zero();
            for (m, em) in e.iter().enumerate() {
                row += c[[k, m]] * em;
            }
            acc += row * pk;
        }
        if self.real {
            Complex64::new(acc.re, 0.0)
        } else {
            acc
        }
    }

    /// Fraction of `∫|f|²` (nodal) carried by nodes with `|z| > half_width`.
    pub fn mass_fraction_beyond(&self, half_width: f64) -> f64 {
        let g = &self.grid;
        let total = self.l2_norm_sq_nodal();
        if total == 0.0 {
            return 0.0;
        }
        let dz = g.dz();
        let mut outside = 0.0;
        for (i, &w) in g.radial_weights().iter().enumerate() {
            for (j, &z) in g.axial_nodes().iter().enumerate() {
                if z.abs() > half_width {
                    outside += w * dz * self.nodes()[[i, j]].norm_sqr();
                }
            }
        }
        outside / total
    }

    /// Spectral interpolation onto another grid. Values outside the source
    /// box are zero. Fails when more than `tail_tol` of the mass lies beyond
    /// the target box.
    pub fn resample(&self, target: Arc<Discretization>, tail_tol: f64) -> Result<Field> {
        let fraction = self.mass_fraction_beyond(target.lz());
        if fraction > tail_tol {
            return Err(Error::TailNotResolved { fraction });
        }
        let src = &self.grid;
        let axial = Array2::from_shape_fn((src.mz(), target.mz()), |_| zero());
        let mut axial = axial;
        for (j, &z) in target.axial_nodes().iter().enumerate() {
            for (m, e) in src.axial_values_at(z).into_iter().enumerate() {
                axial[[m, j]] = e;
            }
        }
        let mut radial = Array2::<f64>::zeros((target.n_radial(), src.k()));
        for (i, &r) in target.radial_nodes().iter().enumerate() {
            for (k, v) in src.radial_values_at(r).into_iter().enumerate() {
                radial[[i, k]] = v;
            }
        }
        let tmp = self.coeffs().dot(&axial);
        let mut nodes = radial_matmul(&radial, &tmp.view());
        if self.real {
            nodes.mapv_inplace(|z| Complex64::new(z.re, 0.0));
        }
        let mut f = Field::with_nodes_unchecked(target, nodes, self.real);
        f.symmetry = self.symmetry;
        Ok(f)
    }

    /// Reinterpret the coefficients on a grid of identical shape, multiplied
    /// by `factor`. With a stretched grid this realizes `x ↦ f(x / s)`.
    pub fn relabel(&self, target: Arc<Discretization>, factor: f64) -> Result<Field> {
        if target.k() != self.grid.k() || target.mz() != self.grid.mz() || target.n_radial() != self.grid.n_radial() {
            return Err(Error::GridMismatch);
        }
        let mut f = Field::with_coeffs_unchecked(target, self.coeffs() * factor, self.real);
        f.symmetry = Symmetry { positive: self.symmetry.positive && factor > 0.0, ..self.symmetry };
        Ok(f)
    }

    /// Largest node magnitude at the axial box edge `z = -Lz`.
    pub fn edge_value(&self) -> f64 {
        self.nodes().column(0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.nodes().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn hermitian_part(grid: &Discretization, c: &Array2<Complex64>) -> Array2<Complex64> {
    Array2::from_shape_fn(c.dim(), |(k, m)| {
        let mm = grid.mirror(m);
        if mm == m {
            Complex64::new(c[[k, m]].re, 0.0)
        } else {
            (c[[k, m]] + c[[k, mm]].conj()) / 2.0
        }
    })
}

/// Header of a field snapshot (`NAME.json`, paired with `NAME.bin`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub p: f64,
    pub lambda: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "Mz")]
    pub mz: usize,
    #[serde(rename = "Lz")]
    pub lz: f64,
    pub dtype: String,
    pub layout: String,
    pub radial_scale: f64,
    pub radial_nodes: usize,
    pub trap: f64,
}

const LAYOUT: &str = "row-major nodes (i,j)";

impl SnapshotHeader {
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::new(self.k, self.mz, self.lz)
            .with_radial_scale(self.radial_scale)
            .with_trap(self.trap)
            .with_radial_nodes(self.radial_nodes)
    }
}

fn snapshot_paths(dir: &Path, name: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{name}.json")), dir.join(format!("{name}.bin")))
}

/// Write `field` as `dir/NAME.json` + `dir/NAME.bin`; returns both paths.
pub fn write_snapshot(field: &Field, params: &ModelParams, dir: &Path, name: &str) -> Result<(PathBuf, PathBuf)> {
    let spec = field.grid().spec();
    let header = SnapshotHeader {
        p: params.p(),
        lambda: params.lambda(),
        k: spec.k,
        mz: spec.mz,
        lz: spec.lz,
        dtype: if field.is_real() { "f64" } else { "c128" }.to_string(),
        layout: LAYOUT.to_string(),
        radial_scale: spec.radial_scale,
        radial_nodes: spec.radial_nodes,
        trap: spec.trap,
    };
    let (json, bin) = snapshot_paths(dir, name);
    serde_json::to_writer_pretty(BufWriter::new(File::create(&json)?), &header)?;
    let mut out = BufWriter::new(File::create(&bin)?);
    for z in field.nodes().as_standard_layout().iter() {
        out.write_all(&z.re.to_le_bytes())?;
        if !field.is_real() {
            out.write_all(&z.im.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok((json, bin))
}

/// Read a snapshot written by [`write_snapshot`]. The grid is rebuilt from
/// the header.
pub fn read_snapshot(dir: &Path, name: &str) -> Result<(SnapshotHeader, Field)> {
    let (json, bin) = snapshot_paths(dir, name);
    let header: SnapshotHeader = serde_json::from_reader(BufReader::new(File::open(&json)?))?;
    let grid = Arc::new(Discretization::from_spec(header.grid_spec())?);
    let mut bytes = Vec::new();
    BufReader::new(File::open(&bin)?).read_to_end(&mut bytes)?;
    let vals: Vec<f64> = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
    let dim = (grid.n_radial(), grid.mz());
    let field = match header.dtype.as_str() {
        "f64" => {
            let a = Array2::from_shape_vec(dim, vals).map_err(|_| Error::ShapeMismatch { expected: dim, got: (0, 0) })?;
            Field::from_real_nodes(grid, a)?
        }
        "c128" => {
            let zs: Vec<Complex64> = vals.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
            let a = Array2::from_shape_vec(dim, zs).map_err(|_| Error::ShapeMismatch { expected: dim, got: (0, 0) })?;
            Field::from_complex_nodes(grid, a)?
        }
        other => return Err(Error::InvalidParams(format!("unknown dtype {other}"))),
    };
    Ok((header, field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Arc<Discretization> {
        Arc::new(Discretization::build(12, 32, 8.0).unwrap())
    }

    fn bump(g: &Arc<Discretization>) -> Field {
        Field::from_fn(g.clone(), |r, z| (-(r * r) / 2.0 - z * z / 3.0 + 0.3 * z).exp() * (1.0 + 0.2 * r * r))
    }

    #[test]
    fn zero_field_has_zero_coefficients() {
        let g = grid();
        let f = Field::from_fn(g.clone(), |_, _| 0.0);
        assert!(f.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn ground_mode_times_cosine_is_an_eigenfunction() {
        let g = grid();
        let lz = g.lz();
        let f = Field::separable(g.clone(), |r| (-r * r / 2.0).exp() / PI.sqrt(), |z| (PI * z / lz).cos());
        let af = f.apply_linear(0.0, 1.0, 0.0);
        let want = f.scale((PI / lz).powi(2));
        assert!(af.sub(&want).unwrap().l2_norm_sq().sqrt() < 1e-12);
        let two = f.apply_linear(1.0, 0.0, 0.0).sub(&f.scale(2.0)).unwrap();
        assert!(two.l2_norm_sq().sqrt() < 1e-12);
        let flat = Field::separable(g.clone(), |r| (-r * r / 2.0).exp() / PI.sqrt(), |_| 1.0);
        assert!(flat.apply_linear(1.0, 1.0, -2.0).l2_norm_sq().sqrt() < 1e-12);
        let third = flat.solve_linear(1.0, 1.0, 1.0).unwrap().sub(&flat.scale(1.0 / 3.0)).unwrap();
        assert!(third.l2_norm_sq().sqrt() < 1e-12);
        match flat.solve_linear(1.0, 1.0, -2.0) {
            Err(Error::SingularMode(0, 0)) => {}
            other => panic!("expected SingularMode(0,0), got {other:?}"),
        }
    }

    #[test]
    fn projections_split_the_ground_mode() {
        let g = grid();
        let e1g = Field::separable(g.clone(), |r| (-r * r / 2.0).exp() / PI.sqrt(), |z| (-z * z).exp());
        assert!(e1g.project_q().l2_norm_sq().sqrt() < 1e-12);
        assert!(e1g.project_p().sub(&e1g).unwrap().l2_norm_sq().sqrt() < 1e-12);
        let phi1 = Field::separable(g.clone(), |r| (1.0 - r * r) * (-r * r / 2.0).exp() / PI.sqrt(), |z| (-z * z).exp());
        assert!(phi1.project_p().l2_norm_sq().sqrt() < 1e-12);
    }

    #[test]
    fn symmetrize_is_idempotent_bitwise() {
        let g = grid();
        let f = bump(&g);
        let s1 = f.symmetrize();
        let s2 = s1.symmetrize();
        assert_eq!(s1.coeffs(), s2.coeffs());
        assert!(s1.symmetry().even_z);
        // even in z: node values mirror across z = 0
        let v = s1.real_nodes();
        for j in 1..g.mz() {
            let jm = g.mz() - j;
            for i in 0..g.n_radial() {
                assert!((v[[i, j]] - v[[i, jm]]).abs() < 1e-12 * (1.0 + v[[i, j]].abs()));
            }
        }
    }

    #[test]
    fn resample_onto_a_larger_box_preserves_values() {
        let g = grid();
        let f = bump(&g);
        let big = Arc::new(Discretization::build(12, 64, 16.0).unwrap());
        let h = f.resample(big.clone(), 1e-8).unwrap();
        for &(r, z) in &[(0.3, 0.1), (1.2, -2.0), (0.0, 3.0)] {
            assert!((h.value_at(r, z) - f.value_at(r, z)).norm() < 1e-7, "at ({r},{z})");
        }
        let small = Arc::new(Discretization::build(12, 32, 1.0).unwrap());
        assert!(matches!(f.resample(small, 1e-8), Err(Error::TailNotResolved { .. })));
    }

    #[test]
    fn snapshot_round_trip() {
        let g = grid();
        let f = bump(&g).to_complex().map_nodes_indexed(|i, j, z| z * Complex64::new(1.0, 0.01 * (i + j) as f64));
        let params = ModelParams::new(4.0, 0.5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_snapshot(&f, &params, dir.path(), "psi").unwrap();
        let (h, back) = read_snapshot(dir.path(), "psi").unwrap();
        assert_eq!(h.dtype, "c128");
        assert_eq!(h.k, 12);
        assert_eq!(back.nodes(), f.nodes());
        let r = bump(&g);
        write_snapshot(&r, &params, dir.path(), "u").unwrap();
        let (h, back) = read_snapshot(dir.path(), "u").unwrap();
        assert_eq!(h.dtype, "f64");
        assert_eq!(back.nodes(), r.nodes());
    }
}
