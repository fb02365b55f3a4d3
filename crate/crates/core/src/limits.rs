//! The two limit problems: the one-dimensional soliton (closed form, with a
//! shooting cross-check) and the three-dimensional radial soliton (shooting).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::field::{Field, Symmetry};
use crate::ode::{dopri5, OdeOptions};
use crate::params::ModelParams;

fn check_p(p: f64) -> Result<()> {
    if p > 2.0 && p < 6.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("p = {p} outside (2, 6)")))
    }
}

/// Coupling `κ = (2/p) π^{1-p/2}` of the one-dimensional limit equation
/// `-w'' + w = κ w^{p-1}`.
pub fn coupling_1d(p: f64) -> f64 {
    2.0 / p * PI.powf(1.0 - p / 2.0)
}

/// `ŵ(z) = A sech^{2/(p-2)}(β z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Soliton1D {
    pub p: f64,
    pub amplitude: f64,
    pub width: f64,
}

pub fn soliton_1d(p: f64) -> Result<Soliton1D> {
    check_p(p)?;
    Ok(Soliton1D { p, amplitude: PI.sqrt() * (p * p / 4.0).powf(1.0 / (p - 2.0)), width: (p - 2.0) / 2.0 })
}

impl Soliton1D {
    fn exponent(&self) -> f64 {
        2.0 / (self.p - 2.0)
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.amplitude / (self.width * z).cosh().powf(self.exponent())
    }

    pub fn deriv(&self, z: f64) -> f64 {
        -self.exponent() * self.width * (self.width * z).tanh() * self.eval(z)
    }

    pub fn second_deriv(&self, z: f64) -> f64 {
        let (q, b) = (self.exponent(), self.width);
        let th = (b * z).tanh();
        self.eval(z) * q * b * b * (q * th * th - (1.0 - th * th))
    }

    /// `-ŵ'' + ŵ − κ ŵ^{p-1}` at `z`.
    pub fn ode_residual(&self, z: f64) -> f64 {
        let w = self.eval(z);
        -self.second_deriv(z) + w - coupling_1d(self.p) * w.powf(self.p - 1.0)
    }

    /// `∫ŵ² dz`, by composite Simpson quadrature on `[-60, 60]`.
    pub fn l2_norm_sq(&self) -> f64 {
        simpson(|z| self.eval(z).powi(2), -60.0 / self.width.min(1.0), 60.0 / self.width.min(1.0), 24_000)
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// A shot profile on `[0, R]`, sampled on a uniform grid with derivatives,
/// extended beyond `R` by its linear decay law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Profile {
    pub p: f64,
    /// Spatial dimension of the radial problem (1 or 3).
    pub dim: usize,
    /// Converged shooting parameter `v(0)`.
    pub shooting_value: f64,
    pub step: f64,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    /// Where the bisected trajectories separated and the tail took over.
    pub stitch: f64,
}

impl Profile {
    pub fn radius(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    pub fn coordinates(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| i as f64 * self.step)
    }

    fn tail(&self, x: f64) -> (f64, f64) {
        let r = self.radius();
        let vr = *self.values.last().expect("non-empty profile");
        if self.dim == 3 {
            let v = vr * (r / x) * (-(x - r)).exp();
            (v, -v * (1.0 + 1.0 / x))
        } else {
            let v = vr * (-(x - r)).exp();
            (v, -v)
        }
    }

    fn hermite(&self, x: f64) -> (f64, f64) {
        let x = x.abs();
        if x >= self.radius() {
            return self.tail(x);
        }
        let h = self.step;
        let i = ((x / h) as usize).min(self.values.len() - 2);
        let s = (x - i as f64 * h) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.derivs[i] * h, self.derivs[i + 1] * h);
        let (s2, s3) = (s * s, s * s * s);
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1;
        let dv = ((6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * d0 + (-6.0 * s2 + 6.0 * s) * y1 + (3.0 * s2 - 2.0 * s) * d1) / h;
        (v, dv)
    }

    /// Value at coordinate `x` (even extension for negative `x`).
    pub fn eval(&self, x: f64) -> f64 {
        self.hermite(x).0
    }

    /// Derivative in `|x|`.
    pub fn deriv(&self, x: f64) -> f64 {
        self.hermite(x).1
    }

    /// `∫ v²` over ℝ (dim 1) or ℝ³ (dim 3), Simpson on the samples plus the
    /// analytic tail.
    pub fn l2_norm_sq(&self) -> f64 {
        let n = self.values.len();
        let weight = |i: usize| {
            let x = i as f64 * self.step;
            let v2 = self.values[i] * self.values[i];
            if self.dim == 3 {
                4.0 * PI * x * x * v2
            } else {
                2.0 * v2
            }
        };
        let m = if (n - 1).is_multiple_of(2) { n - 1 } else { n - 2 };
        let mut s = weight(0) + weight(m);
        for i in 1..m {
            s += weight(i) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let mut total = s * self.step / 3.0;
        // trapezoid for a possible leftover interval, then the tail
        if m < n - 1 {
            total += 0.5 * self.step * (weight(m) + weight(n - 1));
        }
        let r = self.radius();
        let vr = self.values[n - 1];
        total += if self.dim == 3 { 4.0 * PI * r * r * vr * vr / 2.0 } else { vr * vr };
        total
    }

    /// Two-column CSV `coordinate,value`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "coordinate,value")?;
        for (x, v) in self.coordinates().zip(&self.values) {
            writeln!(out, "{x:.10e},{v:.16e}")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Settings of the shooting oracles.
#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    /// Output grid spacing.
    pub step: f64,
    /// Extent of the sampled profile.
    pub radius: f64,
    /// Largest separation of the bracketing trajectories still accepted as
    /// the profile.
    pub separation: f64,
    pub ode: OdeOptions,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions { step: 0.01, radius: 40.0, separation: 1e-11, ode: OdeOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fate {
    /// Crossed zero: initial value too large.
    Over,
    /// Turned upward while positive: initial value too small.
    Under,
    /// Neither within the integration range.
    Undecided,
}

struct Shot {
    fate: Fate,
    samples: Vec<[f64; 2]>,
}

fn shoot(
    rhs: &impl Fn(f64, &[f64; 2]) -> [f64; 2],
    start: &impl Fn(f64) -> (f64, [f64; 2]),
    a: f64,
    outputs: &[f64],
    ode: OdeOptions,
) -> Shot {
    let (t0, y0) = start(a);
    let tr = dopri5(rhs, t0, y0, outputs, ode, |_, y| y[0] < 0.0 || y[1] > 0.0);
    let fate = match tr.event_at {
        Some((_, y)) if y[0] < 0.0 => Fate::Over,
        Some(_) => Fate::Under,
        None => Fate::Undecided,
    };
    Shot { fate, samples: tr.samples }
}

/// Bisect the initial value between an undershooting and an overshooting
/// guess down to adjacent floating-point numbers.
fn bisect(
    rhs: &impl Fn(f64, &[f64; 2]) -> [f64; 2],
    start: &impl Fn(f64) -> (f64, [f64; 2]),
    mut lo: f64,
    outputs: &[f64],
    ode: OdeOptions,
) -> Result<(f64, f64)> {
    if shoot(rhs, start, lo, outputs, ode).fate != Fate::Under {
        return Err(Error::BisectionStalled(format!("lower guess {lo} does not undershoot")));
    }
    let mut hi = 1.5 * lo;
    loop {
        match shoot(rhs, start, hi, outputs, ode).fate {
            Fate::Over => break,
            Fate::Under => {
                lo = hi;
                hi *= 1.5;
            }
            Fate::Undecided => return Err(Error::BisectionStalled(format!("amplitude {hi} neither decays nor oscillates"))),
        }
        if hi > 1e8 {
            return Err(Error::BisectionStalled("no overshooting amplitude found".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(rhs, start, mid, outputs, ode).fate {
            Fate::Over => hi = mid,
            Fate::Under => lo = mid,
            Fate::Undecided => return Ok((mid, mid)),
        }
    }
    Ok((lo, hi))
}

/// Common part of both oracles: bisect, average the bracketing
/// trajectories up to their separation point, and hand the rest to `tail`.
fn shoot_profile(
    p: f64,
    dim: usize,
    lo: f64,
    rhs: impl Fn(f64, &[f64; 2]) -> [f64; 2],
    start: impl Fn(f64) -> (f64, [f64; 2]),
    tail: impl Fn(f64, [f64; 2], &[f64]) -> Vec<[f64; 2]>,
    opts: ShootingOptions,
) -> Result<Profile> {
    let n = (opts.radius / opts.step).round() as usize;
    let outputs: Vec<f64> = (1..=n).map(|i| i as f64 * opts.step).collect();
    let (a_lo, a_hi) = bisect(&rhs, &start, lo, &outputs, opts.ode)?;
    let s_lo = shoot(&rhs, &start, a_lo, &outputs, opts.ode).samples;
    let s_hi = shoot(&rhs, &start, a_hi, &outputs, opts.ode).samples;
    let mut keep = 0;
    while keep < s_lo.len().min(s_hi.len()) {
        let (a, b) = (s_lo[keep], s_hi[keep]);
        if (a[0] - b[0]).abs() > opts.separation || a[1] > 0.0 || b[1] > 0.0 || a[0] <= 0.0 || b[0] <= 0.0 {
            break;
        }
        keep += 1;
    }
    if keep < 2 {
        return Err(Error::BisectionStalled("bracketing trajectories separate immediately".into()));
    }
    let a = 0.5 * (a_lo + a_hi);
    let mut values = vec![a];
    let mut derivs = vec![0.0];
    for i in 0..keep {
        values.push(0.5 * (s_lo[i][0] + s_hi[i][0]));
        derivs.push(0.5 * (s_lo[i][1] + s_hi[i][1]));
    }
    let stitch = outputs[keep - 1];
    let last = [*values.last().unwrap(), *derivs.last().unwrap()];
    for y in tail(stitch, last, &outputs[keep..]) {
        values.push(y[0]);
        derivs.push(y[1]);
    }
    Ok(Profile { p, dim, shooting_value: a, step: opts.step, values, derivs, stitch })
}

/// Shooting oracle for `-w'' + w = κ w^{p-1}`, `w'(0) = 0`.
pub fn shoot_1d(p: f64) -> Result<Profile> {
    shoot_1d_with(p, ShootingOptions::default())
}

pub fn shoot_1d_with(p: f64, opts: ShootingOptions) -> Result<Profile> {
    check_p(p)?;
    let kappa = coupling_1d(p);
    let rhs = move |_: f64, y: &[f64; 2]| [y[1], y[0] - kappa * y[0].abs().powf(p - 2.0) * y[0]];
    let start = |a: f64| (0.0, [a, 0.0]);
    // Below this amplitude w'' > 0 at the origin.
    let lo = (0.5 / kappa).powf(1.0 / (p - 2.0));
    // Past the separation point follow the zero-energy orbit
    // w' = -w sqrt(1 - (2κ/p) w^{p-2}), which is stable forward in z.
    let tail = move |z0: f64, y: [f64; 2], outs: &[f64]| -> Vec<[f64; 2]> {
        let slope = move |w: f64| -w * (1.0 - 2.0 * kappa / p * w.abs().powf(p - 2.0)).max(0.0).sqrt();
        let tr = dopri5(|_, w: &[f64; 1]| [slope(w[0])], z0, [y[0]], outs, OdeOptions::default(), |_, _| false);
        tr.samples.iter().map(|w| [w[0], slope(w[0])]).collect()
    };
    shoot_profile(p, 1, lo, rhs, start, tail, opts)
}

/// Shooting oracle for the radial ground state of `-Δv + v = |v|^{p-2}v`
/// in ℝ³. The singular origin is handled by a Taylor start at small ρ.
pub fn shoot_3d(p: f64) -> Result<Arc<Profile>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Profile>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("cache lock").get(&p.to_bits()) {
        return Ok(hit.clone());
    }
    let profile = Arc::new(shoot_3d_with(p, ShootingOptions::default())?);
    cache.lock().expect("cache lock").insert(p.to_bits(), profile.clone());
    Ok(profile)
}

/// Starting radius of the Taylor start.
const RHO0: f64 = 1e-3;

pub fn shoot_3d_with(p: f64, opts: ShootingOptions) -> Result<Profile> {
    check_p(p)?;
    let rhs = move |rho: f64, y: &[f64; 2]| [y[1], -2.0 / rho * y[1] + y[0] - y[0].abs().powf(p - 2.0) * y[0]];
    let start = move |a: f64| {
        let curv = (a - a.powf(p - 1.0)) / 3.0;
        (RHO0, [a + 0.5 * curv * RHO0 * RHO0, curv * RHO0])
    };
    // Exact decaying solution e^{-ρ}/ρ of the linear part.
    let tail = |r0: f64, y: [f64; 2], outs: &[f64]| -> Vec<[f64; 2]> {
        outs.iter()
            .map(|&r| {
                let v = y[0] * (r0 / r) * (-(r - r0)).exp();
                [v, -v * (1.0 + 1.0 / r)]
            })
            .collect()
    };
    shoot_profile(p, 3, 0.5, rhs, start, tail, opts)
}

/// Which asymptotic description seeds a reference profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// λ → −∞: `|λ|^{1/(p-2)} ṽ(sqrt(|λ|) x)`.
    Far,
    /// λ → Λ₀: `τ^{1/(p-2)} e₁(y) ŵ(sqrt(τ) z)`.
    Near,
}

/// The lowest transverse mode `e₁(y) = π^{-1/2} exp(-|y|²/2)`.
pub fn e1(r: f64) -> f64 {
    (-0.5 * r * r).exp() / PI.sqrt()
}

/// Asymptotic profile of the ground state at `params` on `grid`.
pub fn reference_profile(grid: Arc<Discretization>, params: &ModelParams, regime: Regime) -> Result<Field> {
    let p = params.p();
    let field = match regime {
        Regime::Far => {
            let lam = params.lambda();
            if lam >= 0.0 {
                return Err(Error::RegimeMismatch(format!("far regime needs λ < 0, got {lam}")));
            }
            let v = shoot_3d(p)?;
            let s = (-lam).sqrt();
            let amp = (-lam).powf(1.0 / (p - 2.0));
            Field::from_fn(grid, |r, z| amp * v.eval(s * (r * r + z * z).sqrt()))
        }
        Regime::Near => {
            let tau = params.tau();
            if tau >= 1.0 {
                return Err(Error::RegimeMismatch(format!("near regime needs τ < 1, got {tau}")));
            }
            let w = soliton_1d(p)?;
            let s = tau.sqrt();
            let amp = tau.powf(1.0 / (p - 2.0));
            Field::separable(grid, e1, |z| amp * w.eval(s * z))
        }
    };
    Ok(field.symmetrize().with_symmetry(Symmetry { even_z: true, real: true, positive: true }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_solves_the_1d_equation() {
        for &p in &[3.0, 10.0 / 3.0, 4.0, 5.0] {
            let w = soliton_1d(p).unwrap();
            assert_eq!(w.deriv(0.0), 0.0);
            for i in 0..200 {
                let z = -10.0 + 0.1 * i as f64;
                assert_eq!(w.eval(z), w.eval(-z));
                assert!(w.ode_residual(z).abs() <= 1e-10 * w.amplitude, "p={p} z={z}");
            }
        }
        let w4 = soliton_1d(4.0).unwrap();
        assert!((w4.amplitude - 2.0 * PI.sqrt()).abs() < 1e-14);
        assert!((w4.l2_norm_sq() / (8.0 * PI) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tiny_amplitude_undershoots() {
        let kappa = coupling_1d(4.0);
        let rhs = move |_: f64, y: &[f64; 2]| [y[1], y[0] - kappa * y[0].powi(3)];
        let outs: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1).collect();
        let shot = shoot(&rhs, &|a| (0.0, [a, 0.0]), 1e-6, &outs, OdeOptions::default());
        assert_eq!(shot.fate, Fate::Under);
    }

    #[test]
    fn regime_checks() {
        let g = Arc::new(Discretization::build(8, 16, 8.0).unwrap());
        let params = ModelParams::new(4.0, 0.5).unwrap();
        assert!(matches!(reference_profile(g.clone(), &params, Regime::Near), Err(Error::RegimeMismatch(_))));
        assert!(matches!(reference_profile(g, &params, Regime::Far), Err(Error::RegimeMismatch(_))));
    }
}
