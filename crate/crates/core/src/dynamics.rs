//! Time evolution of `iψ_t + Δψ - |y|²ψ + |ψ|^{p-2}ψ = 0` by Strang
//! splitting, and the orbital distance to a standing wave.
//!
//! The linear flow is exact in coefficient space. The nonlinear flow is an
//! exact phase rotation at the nodes. Both are isometries of the discrete L²
//! norm when the radial quadrature has exactly `K` nodes, since the radial
//! transform is then square and orthogonal; [`collocation`] builds such grids.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discretization::{Discretization, GridSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::Field;
use crate::limits::e1;
use crate::params::ModelParams;

/// `spec` with one radial node per radial mode.
pub fn collocation(spec: GridSpec) -> GridSpec {
    spec.with_radial_nodes(spec.k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationShape {
    /// The state times a random smooth modulation.
    Random,
    /// Lowest transverse mode times the axial profile of the state.
    TransverseMode,
    /// `z ∂_z u`, the generator of axial dilations.
    AxialDilation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    /// Real, even in z.
    Symmetric,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `∫(|∇ψ|² + |y|²|ψ|² + |ψ|²)`.
    H1V,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    /// Size relative to the state, measured in the configured metric.
    pub amplitude: f64,
    pub shape: PerturbationShape,
    pub seed: u64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Perturbation { amplitude: 0.0, shape: PerturbationShape::Random, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub perturbation: Perturbation,
    pub record_every: usize,
    pub sector: Sector,
    pub metric: Metric,
    /// Stop once the orbital distance exceeds this value.
    pub stop_above: Option<f64>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 1e-3,
            t_final: 1.0,
            perturbation: Perturbation::default(),
            record_every: 100,
            sector: Sector::Symmetric,
            metric: Metric::H1V,
            stop_above: None,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParams(format!("horizon must be positive, got {}", self.t_final)));
        }
        let a = self.perturbation.amplitude;
        if !(0.0..=0.2).contains(&a) {
            return Err(Error::InvalidParams(format!("perturbation amplitude {a} outside [0, 0.2]")));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParams("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub orbital_distance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub points: Vec<TracePoint>,
    pub config: EvolutionConfig,
    pub p: f64,
    pub lambda: f64,
}

impl EvolutionTrace {
    /// Largest `|M(t)/M(0) - 1|`.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.points[0].mass;
        self.points.iter().map(|q| (q.mass / m0 - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest `|E(t) - E(0)|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.points[0].energy;
        self.points.iter().map(|q| (q.energy - e0).abs()).fold(0.0, f64::max)
    }

    pub fn max_distance(&self) -> f64 {
        self.points.iter().map(|q| q.orbital_distance).fold(0.0, f64::max)
    }

    /// First recorded time with orbital distance above `level`.
    pub fn first_exceeding(&self, level: f64) -> Option<f64> {
        self.points.iter().find(|q| q.orbital_distance > level).map(|q| q.t)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "t,mass,energy,orbital_distance")?;
        for q in &self.points {
            writeln!(out, "{},{},{},{}", q.t, q.mass, q.energy, q.orbital_distance)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn check_grid(grid: &Discretization) -> Result<()> {
    if grid.trap() != 1.0 {
        return Err(Error::InvalidParams(format!("evolution needs the unit trap, grid has {}", grid.trap())));
    }
    Ok(())
}

/// Strang splitting: half nonlinear rotation, exact linear step, half rotation.
pub struct Propagator {
    grid: Arc<Discretization>,
    p: f64,
    dt: f64,
    linear: Array2<Complex64>,
}

impl Propagator {
    /// `dt` may be negative to run backward in time.
    pub fn new(grid: Arc<Discretization>, p: f64, dt: f64) -> Result<Propagator> {
        check_grid(&grid)?;
        let linear = Array2::from_shape_fn((grid.k(), grid.mz()), |(k, m)| {
            let xi = grid.xi(m);
            Complex64::from_polar(1.0, -dt * (grid.eigenvalues()[k] + xi * xi))
        });
        Ok(Propagator { grid, p, dt, linear })
    }

    fn rotate(&self, nodes: &mut Array2<Complex64>, h: f64) {
        let q = self.p - 2.0;
        nodes.mapv_inplace(|z| z * Complex64::from_polar(1.0, h * z.norm().powf(q)));
    }

    /// Advance nodal values by `steps` steps in place.
    pub fn advance(&self, nodes: &mut Array2<Complex64>, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.rotate(nodes, 0.5 * self.dt);
            let mut c = self.grid.to_coeffs(nodes)?;
            c.zip_mut_with(&self.linear, |a, b| *a *= b);
            *nodes = self.grid.to_nodes(&c)?;
            self.rotate(nodes, 0.5 * self.dt);
        }
        Ok(())
    }
}

/// `ψ` after `steps` steps of size `dt`.
pub fn propagate(psi: &Field, p: f64, dt: f64, steps: usize) -> Result<Field> {
    let prop = Propagator::new(psi.grid().clone(), p, dt)?;
    let mut nodes = psi.nodes().clone();
    prop.advance(&mut nodes, steps)?;
    Field::from_complex_nodes(psi.grid().clone(), nodes)
}

/// `½∫(|∇ψ|² + |y|²|ψ|²) - (1/p)∫|ψ|^p` on a unit-trap grid.
pub fn energy(psi: &Field, p: f64) -> f64 {
    let g = psi.grid();
    let mut quad = 0.0;
    for ((k, m), c) in psi.coeffs().indexed_iter() {
        let xi = g.xi(m);
        quad += (g.eigenvalues()[k] + xi * xi) * c.norm_sqr();
    }
    0.5 * quad - crate::functionals::lp_integral(psi, p) / p
}

fn metric_weights(grid: &Discretization, metric: Metric) -> Array2<f64> {
    Array2::from_shape_fn((grid.k(), grid.mz()), |(k, m)| match metric {
        Metric::H1V => {
            let xi = grid.xi(m);
            grid.eigenvalues()[k] + xi * xi + 1.0
        }
        Metric::L2 => 1.0,
    })
}

fn metric_norm_sq(c: &Array2<Complex64>, w: &Array2<f64>) -> f64 {
    c.iter().zip(w.iter()).map(|(a, w)| w * a.norm_sqr()).sum()
}

/// Orbital distance with precomputed pieces of the reference state.
struct Orbit {
    grid: Arc<Discretization>,
    weights: Array2<f64>,
    u: Array2<Complex64>,
    u_norm_sq: f64,
}

impl Orbit {
    fn new(u: &Field, metric: Metric) -> Result<Orbit> {
        check_grid(u.grid())?;
        let weights = metric_weights(u.grid(), metric);
        let u_c = u.coeffs().clone();
        let u_norm_sq = metric_norm_sq(&u_c, &weights);
        if u_norm_sq == 0.0 {
            return Err(Error::ZeroField);
        }
        Ok(Orbit { grid: u.grid().clone(), weights, u: u_c, u_norm_sq })
    }

    fn distance(&self, psi: &Array2<Complex64>) -> f64 {
        let g = &self.grid;
        let mz = g.mz();
        // h_m = Σ_k w conj(ψ) u, so ⟨ψ, e^{iθ} u(· - s)⟩ = e^{iθ} Σ_m h_m e^{-iξ_m s}.
        let mut h = vec![Complex64::new(0.0, 0.0); mz];
        for ((k, m), a) in psi.indexed_iter() {
            h[m] += self.weights[[k, m]] * a.conj() * self.u[[k, m]];
        }
        let shift = |m: usize, s: f64| -> Complex64 {
            let phase = g.xi(m) * s;
            if g.is_nyquist(m) {
                Complex64::new(phase.cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, -phase)
            }
        };
        // overlap and its first two derivatives in s
        let overlap = |s: f64| -> (Complex64, Complex64, Complex64) {
            let mut acc = [Complex64::new(0.0, 0.0); 3];
            for (m, hm) in h.iter().enumerate() {
                let xi = if g.is_nyquist(m) { 0.0 } else { g.xi(m) };
                let e = hm * shift(m, s);
                acc[0] += e;
                acc[1] += Complex64::new(0.0, -xi) * e;
                acc[2] += -xi * xi * e;
            }
            (acc[0], acc[1], acc[2])
        };
        let size = |s: f64| overlap(s).0.norm();
        // coarse scan over one period, golden-section refinement, Newton polish
        let dz = g.dz();
        let mut best = (0.0, size(0.0));
        for &z in g.axial_nodes() {
            let v = size(z);
            if v > best.1 {
                best = (z, v);
            }
        }
        let (mut a, mut b) = (best.0 - dz, best.0 + dz);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - r * (b - a);
        let mut x2 = a + r * (b - a);
        let (mut f1, mut f2) = (size(x1), size(x2));
        for _ in 0..60 {
            if f1 > f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = size(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = size(x2);
            }
        }
        let mut s = if f1.max(f2) >= best.1 { 0.5 * (a + b) } else { best.0 };
        for _ in 0..4 {
            let (o, d1, d2) = overlap(s);
            let f1 = 2.0 * (o.conj() * d1).re;
            let f2 = 2.0 * (d1.norm_sqr() + (o.conj() * d2).re);
            if f2 < 0.0 {
                let step = -f1 / f2;
                if step.abs() > dz {
                    break;
                }
                // near the optimum the overlap is flat to roundoff, so compare loosely
                if size(s + step) >= size(s) * (1.0 - 1e-14) {
                    s += step;
                }
            }
        }
        let (o, _, _) = overlap(s);
        let rot = if o.norm() > 0.0 { o.conj() / o.norm() } else { Complex64::new(1.0, 0.0) };
        let mut d = 0.0;
        for ((k, m), a) in psi.indexed_iter() {
            let diff = a - rot * self.u[[k, m]] * shift(m, s);
            d += self.weights[[k, m]] * diff.norm_sqr();
        }
        (d / self.u_norm_sq).sqrt()
    }
}

/// `inf_{θ, s} ‖ψ - e^{iθ} u(·, · - s)‖ / ‖u‖` in the chosen metric.
pub fn orbital_distance(psi: &Field, u: &Field, metric: Metric) -> Result<f64> {
    if !psi.grid().compatible(u.grid()) {
        return Err(Error::GridMismatch);
    }
    Ok(Orbit::new(u, metric)?.distance(psi.coeffs()))
}

/// `u` plus a perturbation of relative size `pert.amplitude`.
pub fn perturb(u: &Field, pert: &Perturbation, sector: Sector, metric: Metric) -> Result<Field> {
    let g = u.grid().clone();
    let un = u.real_nodes();
    let phi = match pert.shape {
        PerturbationShape::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(pert.seed);
            let (mut m0, mut my, mut mz) = (0.0, 0.0, 0.0);
            for (i, (&r, &w)) in g.radial_nodes().iter().zip(g.radial_weights()).enumerate() {
                for (j, &z) in g.axial_nodes().iter().enumerate() {
                    let d = w * un[[i, j]].powi(2);
                    m0 += d;
                    my += r * r * d;
                    mz += z * z * d;
                }
            }
            let sy2 = (my / m0).max(1e-300);
            let sz = (mz / m0).sqrt().max(1e-150);
            let mut coef = [[Complex64::new(0.0, 0.0); 4]; 3];
            let mut odd = [[Complex64::new(0.0, 0.0); 4]; 3];
            for i in 0..3 {
                for j in 0..4 {
                    coef[i][j].re = rng.random_range(-1.0..1.0);
                    if sector == Sector::Full {
                        coef[i][j].im = rng.random_range(-1.0..1.0);
                        odd[i][j] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    }
                }
            }
            let k0 = PI / (4.0 * sz);
            let nodes = Array2::from_shape_fn(un.dim(), |(i, j)| {
                let s = g.radial_nodes()[i].powi(2) / sy2;
                let z = g.axial_nodes()[j];
                let mut acc = Complex64::new(0.0, 0.0);
                for (ii, (row, orow)) in coef.iter().zip(&odd).enumerate() {
                    for (jj, (c, o)) in row.iter().zip(orow).enumerate() {
                        let a = k0 * jj as f64 * z;
                        acc += s.powi(ii as i32) * (c * a.cos() + o * (k0 * (jj + 1) as f64 * z).sin());
                    }
                }
                acc * un[[i, j]]
            });
            Field::from_complex_nodes(g.clone(), nodes)?
        }
        PerturbationShape::TransverseMode => {
            let axis: Vec<f64> = un.row(0).to_vec();
            let nodes = Array2::from_shape_fn(un.dim(), |(i, j)| Complex64::new(e1(g.radial_nodes()[i]) * axis[j], 0.0));
            Field::from_complex_nodes(g.clone(), nodes)?
        }
        PerturbationShape::AxialDilation => {
            let dz = u.map_coeffs(|_, m, c| if g.is_nyquist(m) { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, g.xi(m)) * c });
            let z = g.axial_nodes().to_vec();
            dz.to_complex().map_nodes_indexed(|_, j, v| v * z[j])
        }
    };
    let phi = match sector {
        Sector::Symmetric => phi.re().symmetrize(),
        Sector::Full => phi.to_complex(),
    };
    let w = metric_weights(&g, metric);
    let pn = metric_norm_sq(phi.coeffs(), &w).sqrt();
    let un_h = metric_norm_sq(u.coeffs(), &w).sqrt();
    if pn == 0.0 || pert.amplitude == 0.0 {
        return Ok(u.to_complex());
    }
    u.to_complex().axpy(pert.amplitude * un_h / pn, &phi.to_complex())
}

/// Energy drift tolerated over the first ten steps, relative to `max(|E₀|, 1)`.
const STARTUP_DRIFT: f64 = 1e-3;

/// Evolve `psi0` and record mass, energy and the orbital distance to `u`.
pub fn evolve(psi0: &Field, u: &Field, params: &ModelParams, cfg: &EvolutionConfig) -> Result<EvolutionTrace> {
    cfg.validate()?;
    if !psi0.grid().compatible(u.grid()) {
        return Err(Error::GridMismatch);
    }
    let p = params.p();
    let grid = psi0.grid().clone();
    let prop = Propagator::new(grid.clone(), p, cfg.dt)?;
    let orbit = Orbit::new(u, cfg.metric)?;
    let record = |t: f64, nodes: &Array2<Complex64>| -> Result<TracePoint> {
        let f = Field::from_complex_nodes(grid.clone(), nodes.clone())?;
        Ok(TracePoint { t, mass: f.l2_norm_sq(), energy: energy(&f, p), orbital_distance: orbit.distance(f.coeffs()) })
    };
    let total = (cfg.t_final / cfg.dt).round() as usize;
    let mut nodes = psi0.to_complex().nodes().clone();
    let mut points = vec![record(0.0, &nodes)?];
    let e0 = points[0].energy;
    let mut step = 0;
    let startup = total.min(10);
    prop.advance(&mut nodes, startup)?;
    step += startup;
    let early = record(step as f64 * cfg.dt, &nodes)?;
    let drift = (early.energy - e0).abs();
    if drift > STARTUP_DRIFT * e0.abs().max(1.0) {
        return Err(Error::StepTooLarge { drift });
    }
    if step % cfg.record_every == 0 || step == total {
        points.push(early);
    }
    while step < total {
        let next = (step + cfg.record_every - step % cfg.record_every).min(total);
        prop.advance(&mut nodes, next - step)?;
        step = next;
        let q = record(step as f64 * cfg.dt, &nodes)?;
        let stop = cfg.stop_above.is_some_and(|s| q.orbital_distance > s);
        points.push(q);
        if stop {
            break;
        }
    }
    Ok(EvolutionTrace { points, config: *cfg, p, lambda: params.lambda() })
}

/// Perturb `u` per each configuration and evolve; runs are independent.
pub fn run_ensemble(u: &Field, params: &ModelParams, cfgs: Vec<EvolutionConfig>, exec: Execution) -> Vec<Result<EvolutionTrace>> {
    exec.map(cfgs, |cfg| {
        let psi0 = perturb(u, &cfg.perturbation, cfg.sector, cfg.metric)?;
        evolve(&psi0, u, params, &cfg)
    })
}
