//! Continuation of the ground-state branch `λ ↦ u_λ`, the mass curve and
//! its slope, prescribed-mass pairs and the mass bound.
//!
//! `dM/dλ = 2∫u χ` with `L χ = u`, `L` the linearized operator. The branch is
//! orbitally stable where the mass decreases in λ and unstable where it
//! increases.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::discretization::{Discretization, Resolution};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ground_state::{
    linearized_smallest_eigs, solve_chi, solve_ground_state, GroundStateResult, LinearizedOperator, SolverOptions, Start,
};
use crate::limits::{shoot_3d, soliton_1d, Regime};
use crate::params::{ModelParams, LAMBDA0};

/// Warm-started solves taking more descent steps than this trigger step halving.
const MAX_WARM_ITERATIONS: usize = 500;
/// Smallest continuation step.
const MIN_STEP: f64 = 1e-4;
/// Mass fraction tolerated outside the box when moving a warm start between grids.
const WARM_TAIL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Undetermined,
}

impl Stability {
    pub fn from_slope(slope: f64, tol: f64) -> Stability {
        if slope < -tol {
            Stability::Stable
        } else if slope > tol {
            Stability::Unstable
        } else {
            Stability::Undetermined
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Undetermined => "undetermined",
        })
    }
}

/// One point of the branch. Quantities that could not be computed are NaN.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchSample {
    pub lambda: f64,
    pub mass: f64,
    pub action: f64,
    pub slope_chi: f64,
    pub slope_fd: f64,
    pub stability: Stability,
    /// Eigenvalue of the linearized operator closest to zero on the even sector.
    pub eig_min: f64,
    pub converged: bool,
    #[serde(skip)]
    pub state: Option<GroundStateResult>,
}

impl BranchSample {
    fn failed(lambda: f64) -> BranchSample {
        BranchSample {
            lambda,
            mass: f64::NAN,
            action: f64::NAN,
            slope_chi: f64::NAN,
            slope_fd: f64::NAN,
            stability: Stability::Undetermined,
            eig_min: f64::NAN,
            converged: false,
            state: None,
        }
    }

    /// `|slope_chi - slope_fd| ≤ max(1e-2 |slope_fd|, 1e-6)`, when both exist.
    pub fn slopes_agree(&self) -> Option<bool> {
        if self.slope_chi.is_finite() && self.slope_fd.is_finite() {
            Some((self.slope_chi - self.slope_fd).abs() <= (1e-2 * self.slope_fd.abs()).max(1e-6))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchCurve {
    pub p: f64,
    pub samples: Vec<BranchSample>,
}

impl BranchCurve {
    pub fn converged(&self) -> impl Iterator<Item = &BranchSample> {
        self.samples.iter().filter(|s| s.converged)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "lambda,mass,action,slope_chi,slope_fd,stability,eig_min")?;
        for s in &self.samples {
            writeln!(out, "{},{},{},{},{},{},{}", s.lambda, s.mass, s.action, s.slope_chi, s.slope_fd, s.stability, s.eig_min)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweepOptions {
    pub resolution: Resolution,
    pub solver: SolverOptions,
    /// Slopes within `±slope_tol` are left undetermined.
    pub slope_tol: f64,
    pub finite_differences: bool,
    pub eigenvalues: bool,
    pub exec: Execution,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            resolution: Resolution::Auto,
            solver: SolverOptions::default(),
            slope_tol: 1e-6,
            finite_differences: true,
            eigenvalues: true,
            exec: Execution::default(),
        }
    }
}

fn grid_for(params: &ModelParams, resolution: &Resolution) -> Result<Arc<Discretization>> {
    Ok(Arc::new(Discretization::from_spec(resolution.spec(params))?))
}

fn acceptable(r: &GroundStateResult) -> bool {
    r.converged && r.positive
}

/// Ground state at `params`, warm-started from `prev` when given, otherwise
/// from every named guess.
fn solve_at(params: &ModelParams, prev: Option<&GroundStateResult>, opts: &SweepOptions) -> Result<GroundStateResult> {
    let grid = grid_for(params, &opts.resolution)?;
    if let Some(prev) = prev {
        let warm = prev
            .u
            .resample(grid.clone(), WARM_TAIL_TOL)
            .and_then(|init| solve_ground_state(params, grid.clone(), Start::Field(init), &opts.solver));
        if let Ok(r) = warm {
            if acceptable(&r) && r.iterations <= MAX_WARM_ITERATIONS {
                return Ok(r);
            }
        }
    }
    solve_ground_state(params, grid, Start::MultiStart, &opts.solver)
}

/// Walk from `prev` to `target`, halving the step while warm starts struggle.
fn continue_to(prev: &GroundStateResult, target: f64, opts: &SweepOptions) -> Result<GroundStateResult> {
    let p = prev.params.p();
    let mut current = prev.clone();
    let mut next = target;
    loop {
        let params = ModelParams::new(p, next)?;
        let grid = grid_for(&params, &opts.resolution)?;
        let warm = current
            .u
            .resample(grid.clone(), WARM_TAIL_TOL)
            .and_then(|init| solve_ground_state(&params, grid, Start::Field(init), &opts.solver));
        match warm {
            Ok(r) if acceptable(&r) && r.iterations <= MAX_WARM_ITERATIONS => {
                if next == target {
                    return Ok(r);
                }
                current = r;
                next = target;
            }
            _ => {
                let step = 0.5 * (next - current.params.lambda());
                if step.abs() < MIN_STEP {
                    return solve_at(&ModelParams::new(p, target)?, None, opts);
                }
                next = current.params.lambda() + step;
            }
        }
    }
}

/// Central difference of the mass on the grid of `state`.
pub fn slope_fd(state: &GroundStateResult, solver: &SolverOptions) -> Result<f64> {
    let lam = state.params.lambda();
    let delta = (0.25 * state.params.tau()).min(1e-3);
    let grid = state.u.grid().clone();
    let side = |l: f64| -> Result<f64> {
        let params = state.params.with_lambda(l)?;
        let r = solve_ground_state(&params, grid.clone(), Start::Field(state.u.clone()), solver)?;
        Ok(r.mass)
    };
    let (plus, minus) = solver.exec.join(|| side(lam + delta), || side(lam - delta));
    Ok((plus? - minus?) / (2.0 * delta))
}

/// Slopes, eigenvalue and stability tag of a solved state.
pub fn analyze(state: GroundStateResult, opts: &SweepOptions) -> BranchSample {
    let ((chi, fd), eig) = opts.exec.join(
        || {
            opts.exec.join(
                || solve_chi(&state).map(|c| c.slope).unwrap_or(f64::NAN),
                || {
                    if opts.finite_differences {
                        slope_fd(&state, &opts.solver).unwrap_or(f64::NAN)
                    } else {
                        f64::NAN
                    }
                },
            )
        },
        || {
            if opts.eigenvalues {
                let op = LinearizedOperator::new(state.equation(), &state.u);
                linearized_smallest_eigs(&op, 2, &state.u).map(|s| s.closest_to_zero()).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            }
        },
    );
    let tag_slope = if chi.is_finite() { chi } else { fd };
    BranchSample {
        lambda: state.params.lambda(),
        mass: state.mass,
        action: state.action,
        slope_chi: chi,
        slope_fd: fd,
        stability: if tag_slope.is_finite() { Stability::from_slope(tag_slope, opts.slope_tol) } else { Stability::Undetermined },
        eig_min: eig,
        converged: true,
        state: Some(state),
    }
}

fn chain(p: f64, lambdas: &[f64], opts: &SweepOptions) -> Vec<BranchSample> {
    let mut out = Vec::with_capacity(lambdas.len());
    let mut prev: Option<GroundStateResult> = None;
    for &lam in lambdas {
        let solved = ModelParams::new(p, lam).and_then(|params| match &prev {
            Some(prev) => continue_to(prev, lam, opts),
            None => solve_at(&params, None, opts),
        });
        match solved {
            Ok(state) => {
                prev = Some(state.clone());
                out.push(analyze(state, opts));
            }
            Err(_) => out.push(BranchSample::failed(lam)),
        }
    }
    out
}

/// Solve the branch at every λ in `lambdas`. Two warm-start chains run
/// inward from the two ends and meet in the middle of the grid.
pub fn sweep(p: f64, lambdas: &[f64], opts: &SweepOptions) -> Result<BranchCurve> {
    let mut grid: Vec<f64> = lambdas.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    for &l in &grid {
        ModelParams::new(p, l)?;
    }
    let split = grid.len() / 2;
    let (low, high) = grid.split_at(split);
    let high_rev: Vec<f64> = high.iter().rev().copied().collect();
    let (mut a, b) = opts.exec.join(|| chain(p, low, opts), || chain(p, &high_rev, opts));
    a.extend(b.into_iter().rev());
    Ok(BranchCurve { p, samples: a })
}

/// Default sampling: geometric toward `-∞` down to `lambda_min` and toward
/// `Λ₀` down to `tau_min`, plus a uniform middle.
pub fn default_lambdas(lambda_min: f64, tau_min: f64, per_decade: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let per = per_decade.max(1) as f64;
    // far: -1 ... lambda_min
    if lambda_min < -1.0 {
        let n = (per * (-lambda_min).log10()).ceil() as usize;
        for i in 0..n {
            out.push(-(10f64.powf((-lambda_min).log10() * i as f64 / n.max(1) as f64)));
        }
        out.push(lambda_min);
    }
    for i in 0..8 {
        out.push(-1.0 + 2.5 * i as f64 / 8.0);
    }
    // near: τ from 0.5 down to tau_min
    let top = 0.5f64;
    let n = (per * (top / tau_min).log10()).ceil() as usize;
    for i in 0..n {
        let tau = top * (tau_min / top).powf(i as f64 / n.max(1) as f64);
        out.push(LAMBDA0 - tau);
    }
    out.push(LAMBDA0 - tau_min);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out
}

/// Extrapolated limit of the rescaled mass in one asymptotic regime.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub regime: Regime,
    /// Exponent `e` with `|λ|^e M` (far) or `τ^e M` (near) tending to the limit.
    pub exponent: f64,
    /// `(λ, rescaled mass)` of the tail samples used.
    pub scaled: Vec<(f64, f64)>,
    /// Linear extrapolation in `1/λ²` (far) or `τ` (near) to the limit.
    pub extrapolated: f64,
    /// `∫ṽ²` or `∫ŵ²` from the limit problem.
    pub predicted: f64,
    pub relative_error: f64,
    /// `3/2 - 2/(p-2)` (far) or `2/(p-2) - 1/2` with reversed sign (near), times the limit mass.
    pub predicted_slope_prefactor: f64,
    /// Rescaled `slope_chi` at the most asymptotic sample.
    pub observed_slope_prefactor: f64,
    pub slope_signs_agree: bool,
}

/// Samples counted as asymptotic.
const FAR_TAIL: f64 = -5.0;
const NEAR_TAIL: f64 = 0.25;

pub fn asymptotic_constants(curve: &BranchCurve, regime: Regime) -> Result<AsymptoticFit> {
    let p = curve.p;
    let mut tail: Vec<&BranchSample> = curve
        .converged()
        .filter(|s| match regime {
            Regime::Far => s.lambda <= FAR_TAIL,
            Regime::Near => LAMBDA0 - s.lambda <= NEAR_TAIL,
        })
        .collect();
    if tail.len() < 3 {
        return Err(Error::InsufficientTail { needed: 3, have: tail.len() });
    }
    // most asymptotic first
    if regime == Regime::Near {
        tail.reverse();
    }
    let (exponent, predicted, slope_factor) = match regime {
        Regime::Far => {
            let e = 1.5 - 2.0 / (p - 2.0);
            let v = shoot_3d(p)?.l2_norm_sq();
            (e, v, e * v)
        }
        Regime::Near => {
            let e = 0.5 - 2.0 / (p - 2.0);
            let w = soliton_1d(p)?.l2_norm_sq();
            (e, w, e * w)
        }
    };
    let small = |s: &BranchSample| match regime {
        Regime::Far => 1.0 / (s.lambda * s.lambda),
        Regime::Near => LAMBDA0 - s.lambda,
    };
    let size = |s: &BranchSample| match regime {
        Regime::Far => -s.lambda,
        Regime::Near => LAMBDA0 - s.lambda,
    };
    let scaled: Vec<(f64, f64)> = tail.iter().map(|s| (s.lambda, size(s).powf(exponent) * s.mass)).collect();
    let fit: Vec<(f64, f64)> = tail.iter().take(3).zip(&scaled).map(|(s, &(_, m))| (small(s), m)).collect();
    let extrapolated = linear_intercept(&fit);
    let first = tail[0];
    // d/dλ of size^{-e} C is e C size^{-e-1} for both regimes.
    let observed = first.slope_chi * size(first).powf(exponent + 1.0);
    Ok(AsymptoticFit {
        regime,
        exponent,
        scaled,
        extrapolated,
        predicted,
        relative_error: (extrapolated / predicted - 1.0).abs(),
        predicted_slope_prefactor: slope_factor,
        observed_slope_prefactor: observed,
        slope_signs_agree: observed.signum() == slope_factor.signum(),
    })
}

/// Intercept of the least-squares line through `points`.
fn linear_intercept(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    if det.abs() <= 1e-300 {
        return sy / n;
    }
    (sxx * sy - sx * sxy) / det
}

/// Two ground states of equal mass on either side of the mass maximum.
#[derive(Debug, Clone)]
pub struct MassPair {
    pub c: f64,
    pub lambda_low: f64,
    pub lambda_high: f64,
    pub low: BranchSample,
    pub high: BranchSample,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassPairSummary {
    pub c: f64,
    pub target_mass: f64,
    pub lambda_low: f64,
    pub lambda_high: f64,
    pub mass_low: f64,
    pub mass_high: f64,
    pub stability_low: Stability,
    pub stability_high: Stability,
    pub slope_low: f64,
    pub slope_high: f64,
}

impl MassPair {
    pub fn summary(&self) -> MassPairSummary {
        MassPairSummary {
            c: self.c,
            target_mass: self.c * self.c,
            lambda_low: self.lambda_low,
            lambda_high: self.lambda_high,
            mass_low: self.low.mass,
            mass_high: self.high.mass,
            stability_low: self.low.stability,
            stability_high: self.high.stability,
            slope_low: self.low.slope_chi,
            slope_high: self.high.slope_chi,
        }
    }
}

/// Coarse samples used to locate the mass maximum.
const SCOUT: [f64; 9] = [-20.0, -5.0, -1.0, 0.0, 0.5, 1.0, 1.5, 1.8, 1.95];
/// Relative mass tolerance of the pair.
const PAIR_TOL: f64 = 1e-8;

/// States with `∫u² = c²` on the increasing and decreasing parts of the
/// mass curve.
pub fn find_mass_pair(p: f64, c: f64, opts: &SweepOptions) -> Result<MassPair> {
    if !(p > 10.0 / 3.0 && p < 6.0) {
        return Err(Error::InvalidParams(format!("a mass pair needs 10/3 < p < 6, got {p}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParams(format!("prescribed norm must be positive, got {c}")));
    }
    let target = c * c;
    let solver_opts = SweepOptions { finite_differences: false, eigenvalues: false, ..*opts };
    let scout = opts.exec.map(SCOUT.to_vec(), |l| ModelParams::new(p, l).and_then(|params| solve_at(&params, None, &solver_opts)));
    let mut best: Option<(f64, f64, GroundStateResult)> = None;
    for (l, r) in SCOUT.iter().zip(scout) {
        if let Ok(r) = r {
            if best.as_ref().is_none_or(|b| r.mass > b.1) {
                best = Some((*l, r.mass, r));
            }
        }
    }
    let Some((peak_lambda, peak_mass, peak)) = best else {
        return Err(Error::BracketNotFound("no scouting solve converged".into()));
    };
    if peak_mass <= target {
        return Err(Error::MassTooLarge { target, reached: peak_mass });
    }
    let (low, high) = opts.exec.join(
        || tail_solution(&peak, peak_lambda, target, Regime::Far, &solver_opts),
        || tail_solution(&peak, peak_lambda, target, Regime::Near, &solver_opts),
    );
    let (low, high) = (low?, high?);
    let (low, high) = opts.exec.join(|| analyze(low, opts), || analyze(high, opts));
    Ok(MassPair { c, lambda_low: low.lambda, lambda_high: high.lambda, low, high })
}

/// Mass `target` on one side of the peak: march outward until the mass
/// drops below the target, then safeguarded Newton on λ using the χ slope.
fn tail_solution(
    peak: &GroundStateResult,
    peak_lambda: f64,
    target: f64,
    regime: Regime,
    opts: &SweepOptions,
) -> Result<GroundStateResult> {
    // outward march
    let mut inner = peak.clone();
    let mut outer = None;
    let mut lam = peak_lambda;
    for _ in 0..60 {
        lam = match regime {
            Regime::Far => (2.0 * lam).min(lam - 1.0),
            Regime::Near => LAMBDA0 - 0.5 * (LAMBDA0 - lam),
        };
        let r = continue_to(&inner, lam, opts)?;
        if r.mass < target {
            outer = Some(r);
            break;
        }
        inner = r;
    }
    let Some(outer) = outer else {
        return Err(Error::BracketNotFound(format!("mass stays above {target} toward the {regime:?} end")));
    };
    // Newton inside [inner, outer]
    let mut current = if (inner.mass - target).abs() < (outer.mass - target).abs() { inner.clone() } else { outer.clone() };
    let mut outer = outer;
    for _ in 0..60 {
        let defect = current.mass - target;
        if defect.abs() <= PAIR_TOL * target {
            return Ok(current);
        }
        let (a, b) = (inner.params.lambda(), outer.params.lambda());
        let slope = solve_chi(&current).map(|c| c.slope).unwrap_or(f64::NAN);
        let mut next = current.params.lambda() - defect / slope;
        let (lo, hi) = (a.min(b), a.max(b));
        if !(next.is_finite() && next > lo && next < hi) {
            next = 0.5 * (a + b);
        }
        let r = continue_to(&current, next, opts)?;
        if r.mass >= target {
            inner = r.clone();
        } else {
            outer = r.clone();
        }
        current = r;
        if (inner.params.lambda() - outer.params.lambda()).abs() < 1e-14 * (1.0 + lam.abs()) {
            break;
        }
    }
    if (current.mass - target).abs() <= PAIR_TOL * target {
        Ok(current)
    } else {
        Err(Error::BisectionStalled(format!("mass {} vs target {target}", current.mass)))
    }
}

/// Largest sampled mass and the action-based bound over the middle window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassSupReport {
    pub max_mass: f64,
    pub argmax_lambda: f64,
    /// The maximum lies strictly between the extreme samples.
    pub interior: bool,
    /// Masses at the extreme samples divided by the maximum.
    pub left_tail_ratio: f64,
    pub right_tail_ratio: f64,
    /// Last sample of the increasing tail and first of the decreasing tail.
    pub window: (f64, f64),
    /// No samples between the two tails; the bound uses the tails only.
    pub window_empty: bool,
    /// Largest action over the window.
    pub window_action: f64,
    /// `(p-2)/(2p(Λ₀-Λ̃₂)) · C̃`.
    pub bound_as_stated: f64,
    /// `2p/(p-2) · C̃/(Λ₀-Λ̃₂)`, from `J = (1/2-1/p)‖u‖_λ² ≥ (1/2-1/p)(Λ₀-λ)M` on the Nehari manifold.
    pub bound_derived: f64,
    /// Largest window mass below each bound.
    pub stated_bound_holds: bool,
    pub derived_bound_holds: bool,
}

pub fn mass_sup_scan(curve: &BranchCurve) -> Result<MassSupReport> {
    let p = curve.p;
    let samples: Vec<&BranchSample> = curve.converged().collect();
    if samples.is_empty() {
        return Err(Error::InsufficientTail { needed: 1, have: 0 });
    }
    let (imax, top) = samples.iter().enumerate().max_by(|a, b| a.1.mass.total_cmp(&b.1.mass)).map(|(i, s)| (i, *s)).expect("non-empty");
    let n = samples.len();
    // Increasing tail: leading run with positive slope; decreasing tail: trailing run with negative slope.
    let slope = |s: &BranchSample| if s.slope_chi.is_finite() { s.slope_chi } else { s.slope_fd };
    let mut left = 0;
    while left + 1 < n && slope(samples[left + 1]) > 0.0 && slope(samples[left]) > 0.0 {
        left += 1;
    }
    let mut right = n - 1;
    while right > 0 && slope(samples[right - 1]) < 0.0 && slope(samples[right]) < 0.0 {
        right -= 1;
    }
    let window: Vec<&BranchSample> =
        samples.iter().copied().filter(|s| s.lambda >= samples[left].lambda && s.lambda <= samples[right].lambda).collect();
    let window_empty = right <= left + 1;
    let source: Vec<&BranchSample> = if window.is_empty() { samples.clone() } else { window.clone() };
    let c_tilde = source.iter().map(|s| s.action).fold(f64::NEG_INFINITY, f64::max);
    let lam2 = samples[right].lambda;
    let gap = LAMBDA0 - lam2;
    let stated = (p - 2.0) / (2.0 * p * gap) * c_tilde;
    let derived = 2.0 * p / (p - 2.0) * c_tilde / gap;
    let window_max = source.iter().map(|s| s.mass).fold(f64::NEG_INFINITY, f64::max);
    Ok(MassSupReport {
        max_mass: top.mass,
        argmax_lambda: top.lambda,
        interior: imax > 0 && imax + 1 < n,
        left_tail_ratio: samples[0].mass / top.mass,
        right_tail_ratio: samples[n - 1].mass / top.mass,
        window: (samples[left].lambda, lam2),
        window_empty,
        window_action: c_tilde,
        bound_as_stated: stated,
        bound_derived: derived,
        stated_bound_holds: window_max <= stated,
        derived_bound_holds: window_max <= derived,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(points: &[(f64, f64, f64)]) -> BranchCurve {
        // (λ, mass, slope)
        BranchCurve {
            p: 4.0,
            samples: points
                .iter()
                .map(|&(lambda, mass, slope)| BranchSample {
                    lambda,
                    mass,
                    action: mass * (LAMBDA0 - lambda).abs() / 4.0,
                    slope_chi: slope,
                    slope_fd: slope,
                    stability: Stability::from_slope(slope, 1e-6),
                    eig_min: f64::NAN,
                    converged: true,
                    state: None,
                })
                .collect(),
        }
    }

    #[test]
    fn stability_follows_slope_sign() {
        assert_eq!(Stability::from_slope(-1.0, 1e-6), Stability::Stable);
        assert_eq!(Stability::from_slope(1.0, 1e-6), Stability::Unstable);
        assert_eq!(Stability::from_slope(1e-7, 1e-6), Stability::Undetermined);
        assert_eq!(Stability::Undetermined.to_string(), "undetermined");
    }

    #[test]
    fn default_lambdas_cover_both_tails() {
        let l = default_lambdas(-40.0, 0.01, 3);
        assert!(l.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(l[0], -40.0);
        assert!((l[l.len() - 1] - (LAMBDA0 - 0.01)).abs() < 1e-12);
        assert!(l.iter().all(|&x| x < LAMBDA0));
    }

    #[test]
    fn sup_scan_finds_interior_maximum() {
        let curve = synthetic(&[(-10.0, 1.0, 0.5), (-1.0, 4.0, 0.5), (0.0, 5.0, 0.1), (1.0, 4.5, -1.0), (1.9, 1.0, -5.0)]);
        let r = mass_sup_scan(&curve).unwrap();
        assert_eq!(r.max_mass, 5.0);
        assert_eq!(r.argmax_lambda, 0.0);
        assert!(r.interior);
        assert!((r.left_tail_ratio - 0.2).abs() < 1e-15);
        assert!(r.derived_bound_holds);
        // a sub-grid never reports a larger maximum
        let sub = synthetic(&[(-10.0, 1.0, 0.5), (1.0, 4.5, -1.0), (1.9, 1.0, -5.0)]);
        assert!(mass_sup_scan(&sub).unwrap().max_mass <= r.max_mass);
    }

    #[test]
    fn sup_scan_flags_empty_window() {
        let curve = synthetic(&[(-10.0, 1.0, 0.5), (1.0, 4.5, -1.0)]);
        let r = mass_sup_scan(&curve).unwrap();
        assert!(r.window_empty);
        assert!(!r.interior);
    }

    #[test]
    fn tails_need_three_samples() {
        let curve = synthetic(&[(-10.0, 1.0, 0.5), (-6.0, 1.2, 0.5), (1.9, 1.0, -5.0)]);
        assert!(matches!(asymptotic_constants(&curve, Regime::Far), Err(Error::InsufficientTail { needed: 3, have: 2 })));
    }

    #[test]
    fn intercept_of_exact_line() {
        let pts = [(0.1, 3.0 + 0.2), (0.2, 3.0 + 0.4), (0.5, 3.0 + 1.0)];
        assert!((linear_intercept(&pts) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn pair_preconditions() {
        let opts = SweepOptions::default();
        assert!(matches!(find_mass_pair(3.0, 1.0, &opts), Err(Error::InvalidParams(_))));
        assert!(matches!(find_mass_pair(4.0, 0.0, &opts), Err(Error::InvalidParams(_))));
        assert!(matches!(find_mass_pair(10.0 / 3.0, 1.0, &opts), Err(Error::InvalidParams(_))));
    }
}
