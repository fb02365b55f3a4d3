//! Changes of variables between the original problem and its two rescaled
//! forms.
//!
//! For `λ < 0` the far picture is `v(x) = |λ|^{-1/(p-2)} u(x / sqrt|λ|)`,
//! which solves `-Δv + μ|y|²v + v = |v|^{p-2}v` with `μ = 1/λ²`. For any
//! `λ < Λ₀` the near picture is `w(y, z) = τ^{-1/(p-2)} u(y, z / sqrt τ)`,
//! which solves `(1/τ)(-Δ_y + |y|² - Λ₀)w - ∂_zz w + w = |w|^{p-2}w`.
//!
//! Both maps are exact relabelings of the grid: the basis functions are
//! stretched together with the field, so no interpolation takes place and
//! the maps and their inverses are exact up to roundoff. Moving a rescaled
//! field onto some other grid goes through [`onto`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::functionals::{action_v, action_w, Equation, Moments};
use crate::params::ModelParams;

/// Largest mass fraction allowed beyond the target box in [`onto`].
pub const TAIL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Picture {
    U,
    VMu,
    WTau,
}

fn far_scale(params: &ModelParams) -> Result<f64> {
    let lam = params.lambda();
    if lam >= 0.0 {
        return Err(Error::InvalidParams(format!("the far picture needs λ < 0, got {lam}")));
    }
    Ok((-lam).sqrt())
}

/// `u ↦ v`. The result lives on the grid stretched by `sqrt|λ|` in every
/// direction, whose trap coefficient is `μ` times that of `u`'s grid.
pub fn to_v(u: &Field, params: &ModelParams) -> Result<Field> {
    let s = far_scale(params)?;
    let amp = (s * s).powf(-1.0 / (params.p() - 2.0));
    let grid = Arc::new(u.grid().stretched(s, s)?);
    u.relabel(grid, amp * s.powf(1.5))
}

pub fn from_v(v: &Field, params: &ModelParams) -> Result<Field> {
    let s = far_scale(params)?;
    let amp = (s * s).powf(1.0 / (params.p() - 2.0));
    let grid = Arc::new(v.grid().stretched(1.0 / s, 1.0 / s)?);
    v.relabel(grid, amp * s.powf(-1.5))
}

/// `u ↦ w`. Only the axial direction is stretched, by `sqrt τ`.
pub fn to_w(u: &Field, params: &ModelParams) -> Result<Field> {
    let s = params.tau().sqrt();
    let amp = params.tau().powf(-1.0 / (params.p() - 2.0));
    let grid = Arc::new(u.grid().stretched(1.0, s)?);
    u.relabel(grid, amp * s.sqrt())
}

pub fn from_w(w: &Field, params: &ModelParams) -> Result<Field> {
    let s = params.tau().sqrt();
    let amp = params.tau().powf(1.0 / (params.p() - 2.0));
    let grid = Arc::new(w.grid().stretched(1.0, 1.0 / s)?);
    w.relabel(grid, amp / s.sqrt())
}

/// Spectral interpolation of a (rescaled) field onto `target`, refusing
/// fields with more than [`TAIL_TOLERANCE`] of their mass outside it.
pub fn onto(f: &Field, target: Arc<Discretization>) -> Result<Field> {
    f.resample(target, TAIL_TOLERANCE)
}

/// `J̃_μ(v) / J_λ(u)`, equal to `|λ|^{3/2 - p/(p-2)}`.
pub fn far_action_factor(params: &ModelParams) -> f64 {
    let p = params.p();
    (-params.lambda()).powf(1.5 - p / (p - 2.0))
}

/// `∫v² / ∫u²`, equal to `|λ|^{3/2 - 2/(p-2)}`.
pub fn far_mass_factor(params: &ModelParams) -> f64 {
    (-params.lambda()).powf(1.5 - 2.0 / (params.p() - 2.0))
}

/// `Ĵ_τ(w) / J_λ(u)`, equal to `τ^{-1/2 - 2/(p-2)}`. Obtained by the same
/// change of variables as the far factor: every quadratic term picks up
/// `τ^{-2/(p-2)} τ^{-1/2}` once the `1/τ` stiffness is accounted for, and the
/// `L^p` term picks up `τ^{-p/(p-2)} τ^{1/2}`, which is the same power.
pub fn near_action_factor(params: &ModelParams) -> f64 {
    let p = params.p();
    params.tau().powf(-0.5 - 2.0 / (p - 2.0))
}

/// `∫w² / ∫u²`, equal to `τ^{1/2 - 2/(p-2)}`.
pub fn near_mass_factor(params: &ModelParams) -> f64 {
    params.tau().powf(0.5 - 2.0 / (params.p() - 2.0))
}

/// Actions, masses and Nehari residuals on both sides of a map, with the
/// analytic and observed ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub picture: Picture,
    pub action_in: f64,
    pub action_out: f64,
    pub mass_in: f64,
    pub mass_out: f64,
    pub nehari_in: f64,
    pub nehari_out: f64,
    /// Predicted action ratio.
    pub predicted_factor: f64,
    pub observed_factor: f64,
    pub predicted_mass_factor: f64,
    pub observed_mass_factor: f64,
}

impl ScalingReport {
    /// Relative mismatch of the observed ratios, the larger of action and mass.
    pub fn defect(&self) -> f64 {
        let a = (self.observed_factor / self.predicted_factor - 1.0).abs();
        let m = (self.observed_mass_factor / self.predicted_mass_factor - 1.0).abs();
        a.max(m)
    }

    /// Maps `u` to the requested picture and compares.
    pub fn measure(u: &Field, params: &ModelParams, picture: Picture) -> Result<ScalingReport> {
        let p = params.p();
        let eq_u = Equation::u_picture(params);
        let mu = Moments::of(u, p);
        let (out, eq_out, predicted, predicted_mass) = match picture {
            Picture::U => (u.clone(), eq_u, 1.0, 1.0),
            Picture::VMu => (to_v(u, params)?, Equation::v_picture(p), far_action_factor(params), far_mass_factor(params)),
            Picture::WTau => (to_w(u, params)?, Equation::w_picture(params), near_action_factor(params), near_mass_factor(params)),
        };
        let action_in = eq_u.action(u);
        let action_out = match picture {
            Picture::U => action_in,
            Picture::VMu => action_v(&out, out.grid().trap(), p),
            Picture::WTau => action_w(&out, params.tau(), p),
        };
        let mass_out = out.l2_norm_sq();
        Ok(ScalingReport {
            picture,
            action_in,
            action_out,
            mass_in: mu.mass,
            mass_out,
            nehari_in: eq_u.nehari_residual(u),
            nehari_out: eq_out.nehari_residual(&out),
            predicted_factor: predicted,
            observed_factor: action_out / action_in,
            predicted_mass_factor: predicted_mass,
            observed_mass_factor: mass_out / mu.mass,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::GridSpec;
    use crate::ground_state::{solve_stationary, SolverOptions};
    use crate::limits::shoot_3d;
    use ndarray::Array2;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Arc<Discretization>, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Array2::from_shape_fn((grid.k(), grid.mz()), |(k, m)| {
            if k < 6 && grid.wavenumber(m).abs() < 8 {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Field::from_coeffs(grid, c, true).unwrap()
    }

    fn small_grid() -> Arc<Discretization> {
        Arc::new(Discretization::from_spec(GridSpec::new(16, 64, 10.0)).unwrap())
    }

    #[test]
    fn factors_hold_on_random_fields() {
        let grid = small_grid();
        for (seed, &lam) in [-0.3, -2.0, -7.5, 0.4, 1.9].iter().enumerate() {
            for &p in &[3.0, 4.0, 5.5] {
                let params = ModelParams::new(p, lam).unwrap();
                let u = random_field(grid.clone(), seed as u64);
                if lam < 0.0 {
                    let r = ScalingReport::measure(&u, &params, Picture::VMu).unwrap();
                    assert!(r.defect() < 1e-10, "{r:?}");
                    assert!((r.nehari_out / r.nehari_in / r.predicted_factor - 1.0).abs() < 1e-10);
                }
                let r = ScalingReport::measure(&u, &params, Picture::WTau).unwrap();
                assert!(r.defect() < 1e-10, "{r:?}");
            }
        }
    }

    #[test]
    fn maps_invert() {
        let grid = small_grid();
        let params = ModelParams::new(4.0, -3.7).unwrap();
        let u = random_field(grid.clone(), 7);
        let back = from_v(&to_v(&u, &params).unwrap(), &params).unwrap();
        let back_w = from_w(&to_w(&u, &params).unwrap(), &params).unwrap();
        let scale = u.max_abs();
        for f in [&back, &back_w] {
            for (a, b) in f.nodes().iter().zip(u.nodes().iter()) {
                assert!((a - b).norm() <= 1e-12 * scale);
            }
            assert!((f.grid().lz() - grid.lz()).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_parameters_are_identities() {
        let grid = small_grid();
        let u = random_field(grid.clone(), 3);
        let params = ModelParams::new(4.0, -1.0).unwrap();
        let v = to_v(&u, &params).unwrap();
        assert_eq!(v.coeffs(), u.coeffs());
        assert_eq!(v.grid().trap(), 1.0);
        let params = ModelParams::new(3.0, 1.0).unwrap();
        let w = to_w(&u, &params).unwrap();
        assert_eq!(w.coeffs(), u.coeffs());
        assert_eq!(w.grid().lz(), grid.lz());
    }

    #[test]
    fn rescaled_values_match_pointwise() {
        let grid = small_grid();
        let params = ModelParams::new(4.0, -2.5).unwrap();
        let u = random_field(grid, 11);
        let v = to_v(&u, &params).unwrap();
        let s = 2.5f64.sqrt();
        let amp = 2.5f64.powf(-0.5);
        for &(r, z) in &[(0.3, 0.0), (1.1, -2.0), (2.0, 4.5)] {
            let a = v.value_at(r * s, z * s);
            let b = u.value_at(r, z) * amp;
            assert!((a - b).norm() < 1e-12 * u.max_abs(), "{a} {b}");
        }
    }

    #[test]
    fn onto_rejects_truncating_boxes() {
        let grid = small_grid();
        let f = Field::from_fn(grid.clone(), |r, z| (-(r * r) / 2.0 - z * z / 8.0).exp());
        let small = Arc::new(Discretization::from_spec(GridSpec::new(16, 64, 3.0)).unwrap());
        assert!(matches!(onto(&f, small), Err(Error::TailNotResolved { .. })));
        let big = Arc::new(Discretization::from_spec(GridSpec::new(16, 96, 12.0)).unwrap());
        let g = onto(&f, big).unwrap();
        assert!((g.l2_norm_sq() / f.l2_norm_sq() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn far_picture_solves_agree() {
        let params = ModelParams::new(4.0, -6.0).unwrap();
        let grid = Arc::new(Discretization::from_spec(GridSpec::adapted(64, 128, &params)).unwrap());
        let opts = SolverOptions::default();
        let guess = crate::ground_state::initial_guess(grid.clone(), &params, crate::ground_state::Guess::Soliton3D).unwrap();
        let u = solve_stationary(&Equation::u_picture(&params), &guess, &opts).unwrap().u;
        let v = to_v(&u, &params).unwrap();
        let eq_v = Equation::v_picture(4.0);
        assert!(eq_v.nehari_residual(&v).abs() <= 1e-9 * eq_v.quadratic(&v));
        let tilde = shoot_3d(4.0).unwrap();
        let init = Field::from_fn(v.grid().clone(), |r, z| tilde.eval((r * r + z * z).sqrt()));
        let direct = solve_stationary(&eq_v, &init, &opts).unwrap().u;
        let d = crate::functionals::h1_norm_sq(&direct.sub(&v).unwrap()).sqrt();
        assert!(d <= 1e-4, "distance {d}");
    }
}
