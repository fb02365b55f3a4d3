//! Positive even ground states by Nehari-projected preconditioned descent
//! followed by Newton–GMRES, plus the linearized operator, its lowest
//! eigenvalues and the branch derivative `χ = ∂_λ u`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::{Field, Symmetry};
use crate::functionals::{lp_integral, nonlinearity, pohozaev_residual, report, Equation, FunctionalReport};
use crate::krylov::{gmres, lobpcg, GmresOptions};
use crate::limits::{e1, shoot_3d, soliton_1d};
use crate::params::ModelParams;

/// Real fields even in z, as vectors whose Euclidean product is the L²
/// product: entry `(k, m)`, `0 ≤ m ≤ Mz/2`, holds `sqrt(w_m) Re c_{k,m}`
/// with `w_m = 2` except for `m = 0` and the Nyquist slot.
#[derive(Debug, Clone)]
pub struct Sector {
    grid: Arc<Discretization>,
    half: usize,
    weight_sqrt: Vec<f64>,
}

impl Sector {
    pub fn new(grid: Arc<Discretization>) -> Sector {
        let half = grid.mz() / 2 + 1;
        let weight_sqrt = (0..half).map(|m| if m == 0 || m == half - 1 { 1.0 } else { 2f64.sqrt() }).collect();
        Sector { grid, half, weight_sqrt }
    }

    pub fn dim(&self) -> usize {
        self.grid.k() * self.half
    }

    pub fn grid(&self) -> &Arc<Discretization> {
        &self.grid
    }

    pub fn from_field(&self, f: &Field) -> Vec<f64> {
        let c = f.coeffs();
        let mut x = vec![0.0; self.dim()];
        for k in 0..self.grid.k() {
            for m in 0..self.half {
                let mm = self.grid.mirror(m);
                x[k * self.half + m] = self.weight_sqrt[m] * 0.5 * (c[[k, m]].re + c[[k, mm]].re);
            }
        }
        x
    }

    pub fn to_field(&self, x: &[f64]) -> Field {
        let (k_n, mz) = (self.grid.k(), self.grid.mz());
        let mut c = Array2::<Complex64>::zeros((k_n, mz));
        for k in 0..k_n {
            for m in 0..self.half {
                let v = Complex64::new(x[k * self.half + m] / self.weight_sqrt[m], 0.0);
                c[[k, m]] = v;
                c[[k, self.grid.mirror(m)]] = v;
            }
        }
        Field::from_coeffs(self.grid.clone(), c, true).expect("sector shape").with_symmetry(Symmetry {
            even_z: true,
            real: true,
            positive: false,
        })
    }

    /// Diagonal of the linear part of `eq` on the sector.
    pub fn multiplier(&self, eq: &Equation) -> Vec<f64> {
        let g = &self.grid;
        let mut d = vec![0.0; self.dim()];
        for k in 0..g.k() {
            for m in 0..self.half {
                let xi = g.xi(m);
                d[k * self.half + m] = eq.a * g.eigenvalues()[k] + eq.b * xi * xi + eq.c;
            }
        }
        d
    }
}

/// `φ ↦ A φ − (p−1)|u|^{p−2} φ` on the even real sector.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    eq: Equation,
    sector: Sector,
    diag: Vec<f64>,
    /// `(p−1)|u|^{p−2}` at the nodes.
    potential: Array2<f64>,
}

impl LinearizedOperator {
    pub fn new(eq: Equation, u: &Field) -> LinearizedOperator {
        let sector = Sector::new(u.grid().clone());
        let diag = sector.multiplier(&eq);
        let potential = u.nodes().mapv(|z| (eq.p - 1.0) * z.norm().powf(eq.p - 2.0));
        LinearizedOperator { eq, sector, diag, potential }
    }

    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    pub fn equation(&self) -> &Equation {
        &self.eq
    }

    /// Apply to a field (any symmetry).
    pub fn apply_field(&self, phi: &Field) -> Field {
        let pot = phi.map_nodes_indexed(|i, j, z| z * self.potential[[i, j]]);
        self.eq.apply(phi).sub(&pot).expect("same grid")
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let phi = self.sector.to_field(x);
        let pot = phi.map_nodes_indexed(|i, j, z| z * self.potential[[i, j]]);
        let vp = self.sector.from_field(&pot);
        x.iter().zip(&self.diag).zip(&vp).map(|((x, d), v)| d * x - v).collect()
    }

    /// `A^{-1}` on the sector.
    pub fn precondition(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.diag).map(|(x, d)| x / d).collect()
    }
}

/// Tolerances and limits of the stationary solver.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Absolute L² tolerance on the gradient.
    pub tol_grad: f64,
    /// Tolerance on the Nehari residual relative to `∫|u|^p`.
    pub tol_nehari: f64,
    pub max_grad_iters: usize,
    pub max_newton: usize,
    /// Descent hands over to Newton when `‖∇J‖ / ‖|u|^{p-2}u‖` drops below this.
    pub newton_switch: f64,
    pub gmres_restart: usize,
    pub exec: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_grad: 1e-9,
            tol_nehari: 1e-10,
            max_grad_iters: 5000,
            max_newton: 50,
            newton_switch: 1e-3,
            gmres_restart: 50,
            exec: Execution::default(),
        }
    }
}

/// Converged solution of `A u = |u|^{p-2} u` in some picture.
#[derive(Debug, Clone)]
pub struct StationaryState {
    pub u: Field,
    pub eq: Equation,
    pub action: f64,
    pub gradient_norm: f64,
    pub nehari_residual: f64,
    pub lp_integral: f64,
    pub iterations: usize,
    pub newton_iterations: usize,
    pub converged: bool,
    /// Actions after each accepted descent step (starting on the manifold).
    pub action_history: Vec<f64>,
}

/// `t` and `t u` with `t u` on the Nehari manifold of `eq`.
pub fn nehari_project(eq: &Equation, u: &Field) -> Result<(f64, Field)> {
    let t = eq.nehari_scale(u)?;
    Ok((t, u.scale(t)))
}

/// Nehari projection for the original problem at `params`.
pub fn nehari_scale(u: &Field, params: &ModelParams) -> Result<(f64, Field)> {
    nehari_project(&Equation::u_picture(params), u)
}

fn l2(f: &Field) -> f64 {
    f.l2_norm_sq().sqrt()
}

/// Critical point of the action of `eq` near `init`, restricted to even
/// real fields.
pub fn solve_stationary(eq: &Equation, init: &Field, opts: &SolverOptions) -> Result<StationaryState> {
    let grid = init.grid().clone();
    let sector = Sector::new(grid.clone());
    let diag = sector.multiplier(eq);
    if let Some(d) = diag.iter().find(|d| !(**d > 0.0)) {
        return Err(Error::InvalidParams(format!("linear part is not positive (divisor {d})")));
    }
    let mut u = init.symmetrize();
    if u.l2_norm_sq() < 1e-24 {
        return Err(Error::CollapsedToZero);
    }
    u = nehari_project(eq, &u)?.1;

    let precond = |f: &Field| sector.to_field(&sector.from_field(f).iter().zip(&diag).map(|(x, d)| x / d).collect::<Vec<_>>());
    let a_dot = |f: &Field, g: &Field| -> f64 {
        sector.from_field(f).iter().zip(&sector.from_field(g)).zip(&diag).map(|((x, y), d)| x * y * d).sum()
    };

    let mut action = eq.action(&u);
    let mut history = vec![action];
    let mut grad = eq.gradient(&u);
    let mut gnorm = l2(&grad);
    let scale_of = |u: &Field| l2(&nonlinearity(u, eq.p)).max(f64::MIN_POSITIVE);
    let mut alpha = 1.0;
    let mut iterations = 0;

    while gnorm > opts.newton_switch * scale_of(&u) && gnorm > opts.tol_grad {
        if iterations >= opts.max_grad_iters {
            return Err(Error::NotConverged { iterations, residual: gnorm });
        }
        iterations += 1;
        let dir = precond(&grad);
        let mut step = alpha;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = u.axpy(-step, &dir)?.symmetrize();
            if trial.l2_norm_sq() < 1e-24 {
                return Err(Error::CollapsedToZero);
            }
            let trial = match nehari_project(eq, &trial) {
                Ok((_, t)) => t,
                Err(_) => {
                    step *= 0.5;
                    continue;
                }
            };
            let j = eq.action(&trial);
            if j <= action + 1e-12 * action.abs() {
                accepted = Some((trial, j));
                break;
            }
            step *= 0.5;
        }
        let Some((next, j)) = accepted else {
            return Err(Error::NotConverged { iterations, residual: gnorm });
        };
        if next.l2_norm_sq() < 1e-24 {
            return Err(Error::CollapsedToZero);
        }
        let next_grad = eq.gradient(&next);
        // Barzilai–Borwein step in the metric of A.
        let s = next.sub(&u)?;
        let y = next_grad.sub(&grad)?;
        let sy = s.dot(&y)?;
        let sas = a_dot(&s, &s);
        alpha = if sy > 0.0 { (sas / sy).clamp(1e-4, 1e2) } else { 1.0 };
        u = next;
        action = j;
        history.push(action);
        grad = next_grad;
        gnorm = l2(&grad);
    }

    // Newton–GMRES on the sector.
    let mut newton = 0;
    let mut stalled = 0;
    while gnorm > opts.tol_grad || stalled == 0 && newton == 0 {
        if newton >= opts.max_newton {
            break;
        }
        let lin = LinearizedOperator::new(*eq, &u);
        let rhs: Vec<f64> = sector.from_field(&grad).iter().map(|g| -g).collect();
        let rel_tol = (gnorm / scale_of(&u)).clamp(1e-13, 1e-4);
        let gopts = GmresOptions { rel_tol, restart: opts.gmres_restart, max_iter: 1000, ..GmresOptions::default() };
        let delta = match gmres(|x| lin.apply(x), |x| lin.precondition(x), &rhs, None, gopts) {
            Ok((d, _)) => d,
            Err(Error::NotConverged { .. }) => break,
            Err(e) => return Err(e),
        };
        newton += 1;
        let dfield = sector.to_field(&delta);
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..10 {
            let trial = u.axpy(step, &dfield)?.symmetrize();
            let tg = eq.gradient(&trial);
            let tn = l2(&tg);
            if tn < gnorm {
                u = trial;
                grad = tg;
                improved = tn < 0.5 * gnorm;
                gnorm = tn;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            stalled += 1;
            if stalled >= 2 {
                break;
            }
        } else {
            stalled = 0;
        }
        if gnorm <= opts.tol_grad * 1e-3 {
            break;
        }
    }

    // Final projection removes the last Nehari defect left by Newton.
    let (_, projected) = nehari_project(eq, &u)?;
    let pg = eq.gradient(&projected);
    if l2(&pg) <= gnorm.max(opts.tol_grad) {
        u = projected;
        grad = pg;
        gnorm = l2(&grad);
    }
    let lp = lp_integral(&u, eq.p);
    let nehari_residual = eq.nehari_residual(&u);
    let converged = gnorm <= opts.tol_grad && nehari_residual.abs() <= opts.tol_nehari * lp;
    if !converged {
        return Err(Error::NotConverged { iterations: iterations + newton, residual: gnorm });
    }
    let floor = -1e-8 * u.max_abs();
    let positive = u.nodes().iter().all(|z| z.re >= floor);
    let u = u.with_symmetry(Symmetry { even_z: true, real: true, positive });
    Ok(StationaryState {
        action: eq.action(&u),
        u,
        eq: *eq,
        gradient_norm: gnorm,
        nehari_residual,
        lp_integral: lp,
        iterations,
        newton_iterations: newton,
        converged,
        action_history: history,
    })
}

/// Named initial guesses for the original problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Guess {
    /// `τ^{1/(p-2)} e₁(y) ŵ(sqrt(τ) z)`.
    DimensionReduction,
    /// `τ^{1/(p-2)} ṽ(sqrt(τ) |x|)`.
    Soliton3D,
    /// `exp(-κ|x|²/2)` with `κ = max(1, τ)`.
    Gaussian,
}

impl Guess {
    pub const ALL: [Guess; 3] = [Guess::DimensionReduction, Guess::Soliton3D, Guess::Gaussian];

    pub fn name(&self) -> &'static str {
        match self {
            Guess::DimensionReduction => "dimension-reduction",
            Guess::Soliton3D => "soliton-3d",
            Guess::Gaussian => "gaussian",
        }
    }
}

pub fn initial_guess(grid: Arc<Discretization>, params: &ModelParams, guess: Guess) -> Result<Field> {
    let p = params.p();
    let tau = params.tau();
    let amp = tau.powf(1.0 / (p - 2.0));
    let s = tau.sqrt();
    Ok(match guess {
        Guess::DimensionReduction => {
            let w = soliton_1d(p)?;
            Field::separable(grid, e1, |z| amp * w.eval(s * z))
        }
        Guess::Soliton3D => {
            let v = shoot_3d(p)?;
            Field::from_fn(grid, |r, z| amp * v.eval(s * (r * r + z * z).sqrt()))
        }
        Guess::Gaussian => {
            let kappa = tau.max(1.0);
            Field::from_fn(grid, |r, z| (-0.5 * kappa * (r * r + z * z)).exp())
        }
    })
}

/// Where the iteration starts.
#[derive(Debug, Clone)]
pub enum Start {
    Field(Field),
    Guess(Guess),
    /// All named guesses; the least action among converged positive states wins.
    MultiStart,
}

/// Ground state at `params` with diagnostics.
#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub u: Field,
    pub params: ModelParams,
    pub action: f64,
    pub mass: f64,
    pub gradient_norm: f64,
    pub nehari_residual: f64,
    pub pohozaev_residual: f64,
    pub iterations: usize,
    pub newton_iterations: usize,
    pub converged: bool,
    pub positive: bool,
    /// Largest node magnitude on the axial box edge.
    pub edge_value: f64,
    pub start: String,
    pub report: FunctionalReport,
    pub action_history: Vec<f64>,
}

/// JSON metadata written next to a ground-state snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundStateMeta {
    pub lambda: f64,
    pub p: f64,
    pub action: f64,
    pub mass: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub newton_iterations: usize,
    pub nehari_residual: f64,
    pub pohozaev_residual: f64,
    pub edge_value: f64,
    pub positive: bool,
    pub start: String,
}

impl GroundStateResult {
    fn from_state(state: StationaryState, params: ModelParams, start: &str) -> GroundStateResult {
        let rep = report(&state.u, &params);
        GroundStateResult {
            pohozaev_residual: pohozaev_residual(&state.u, &params),
            edge_value: state.u.edge_value(),
            positive: state.u.symmetry().positive,
            mass: rep.l2_mass,
            action: state.action,
            gradient_norm: state.gradient_norm,
            nehari_residual: state.nehari_residual,
            iterations: state.iterations,
            newton_iterations: state.newton_iterations,
            converged: state.converged,
            start: start.to_string(),
            report: rep,
            action_history: state.action_history,
            u: state.u,
            params,
        }
    }

    pub fn meta(&self) -> GroundStateMeta {
        GroundStateMeta {
            lambda: self.params.lambda(),
            p: self.params.p(),
            action: self.action,
            mass: self.mass,
            gradient_norm: self.gradient_norm,
            iterations: self.iterations,
            newton_iterations: self.newton_iterations,
            nehari_residual: self.nehari_residual,
            pohozaev_residual: self.pohozaev_residual,
            edge_value: self.edge_value,
            positive: self.positive,
            start: self.start.clone(),
        }
    }

    pub fn equation(&self) -> Equation {
        Equation::u_picture(&self.params)
    }
}

pub fn solve_ground_state(
    params: &ModelParams,
    grid: Arc<Discretization>,
    start: Start,
    opts: &SolverOptions,
) -> Result<GroundStateResult> {
    let eq = Equation::u_picture(params);
    let run = |init: Field, name: &str| -> Result<GroundStateResult> {
        let state = solve_stationary(&eq, &init, opts)?;
        Ok(GroundStateResult::from_state(state, *params, name))
    };
    match start {
        Start::Field(f) => run(f, "field"),
        Start::Guess(g) => run(initial_guess(grid, params, g)?, g.name()),
        Start::MultiStart => {
            let results = opts.exec.map(Guess::ALL.to_vec(), |g| initial_guess(grid.clone(), params, g).and_then(|f| run(f, g.name())));
            pick_least_action(results)
        }
    }
}

/// Least action among converged, positive candidates; otherwise the first error.
pub fn pick_least_action(results: Vec<Result<GroundStateResult>>) -> Result<GroundStateResult> {
    let mut best: Option<GroundStateResult> = None;
    let mut first_err = None;
    let mut fallback: Option<GroundStateResult> = None;
    for r in results {
        match r {
            Ok(res) if res.positive => {
                if best.as_ref().is_none_or(|b| res.action < b.action) {
                    best = Some(res);
                }
            }
            Ok(res) => {
                if fallback.as_ref().is_none_or(|b| res.action < b.action) {
                    fallback = Some(res);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.or(fallback).ok_or_else(|| first_err.unwrap_or(Error::CollapsedToZero))
}

/// Lowest eigenpairs of the linearized operator on the even sector.
#[derive(Debug, Clone)]
pub struct SectorSpectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<Field>,
    pub residuals: Vec<f64>,
}

impl SectorSpectrum {
    /// Number of negative eigenvalues found.
    pub fn negative_count(&self) -> usize {
        self.values.iter().filter(|&&v| v < 0.0).count()
    }

    /// Eigenvalue of smallest magnitude.
    pub fn closest_to_zero(&self) -> f64 {
        self.values.iter().copied().min_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(f64::NAN)
    }
}

pub fn linearized_smallest_eigs(op: &LinearizedOperator, n: usize, base: &Field) -> Result<SectorSpectrum> {
    let sector = op.sector();
    let grid = sector.grid().clone();
    // Seeds: the base state and smooth modulations of it, plus a broad Gaussian.
    let broad = Field::from_fn(grid.clone(), |r, z| (-(r * r) / 2.0 - z * z / (8.0 * grid.lz())).exp());
    let mut seeds = vec![
        base.clone(),
        base.map_nodes_indexed(|i, _, v| v * grid.radial_nodes()[i].powi(2)),
        base.map_nodes_indexed(|_, j, v| v * grid.axial_nodes()[j].powi(2)),
        broad.clone(),
        broad.map_nodes_indexed(|_, j, v| v * (PI * grid.axial_nodes()[j] / grid.lz()).cos()),
        broad.map_nodes_indexed(|i, _, v| v * (1.0 - grid.radial_nodes()[i].powi(2))),
    ];
    let block = (n + 2).min(seeds.len());
    seeds.truncate(block);
    let x0: Vec<Vec<f64>> = seeds.iter().map(|f| sector.from_field(&f.symmetrize())).collect();
    let eig = lobpcg(|x| op.apply(x), |x| op.precondition(x), x0, 1e-6, 2000)?;
    let take = n.min(eig.values.len());
    Ok(SectorSpectrum {
        values: eig.values[..take].to_vec(),
        vectors: eig.vectors[..take].iter().map(|v| sector.to_field(v)).collect(),
        residuals: eig.residuals[..take].to_vec(),
    })
}

/// Solution of `L χ = u` and the slope `dM/dλ = 2∫uχ`.
#[derive(Debug, Clone)]
pub struct ChiSolution {
    pub chi: Field,
    pub slope: f64,
    pub rel_residual: f64,
}

pub fn solve_chi(result: &GroundStateResult) -> Result<ChiSolution> {
    let op = LinearizedOperator::new(result.equation(), &result.u);
    let sector = op.sector();
    let rhs = sector.from_field(&result.u);
    let opts = GmresOptions { rel_tol: 1e-10, restart: 80, max_iter: 2000, ..GmresOptions::default() };
    let (x, info) = match gmres(|x| op.apply(x), |x| op.precondition(x), &rhs, None, opts) {
        Ok(v) => v,
        Err(Error::NotConverged { .. }) => return Err(Error::NearSingular),
        Err(e) => return Err(e),
    };
    let chi = sector.to_field(&x);
    let slope = 2.0 * result.u.dot(&chi)?;
    Ok(ChiSolution { chi, slope, rel_residual: info.rel_residual })
}
