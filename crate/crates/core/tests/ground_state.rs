use std::sync::Arc;

use confinement_core::functionals::{h1_norm_sq, h_norm_sq, Equation};
use confinement_core::ground_state::{
    linearized_smallest_eigs, nehari_scale, solve_chi, solve_ground_state, GroundStateResult, Guess, LinearizedOperator, SolverOptions,
    Start,
};
use confinement_core::krylov::dot;
use confinement_core::limits::{e1, shoot_3d, soliton_1d};
use confinement_core::scaling::{to_v, to_w};
use confinement_core::{Discretization, Error, Field, GridSpec, ModelParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn solve(params: &ModelParams, start: Start) -> GroundStateResult {
    let g = Arc::new(Discretization::from_spec(GridSpec::auto(params)).unwrap());
    solve_ground_state(params, g, start, &SolverOptions::default()).unwrap()
}

fn rel(a: &Field, b: &Field, norm: fn(&Field) -> f64) -> f64 {
    (norm(&a.sub(b).unwrap()) / norm(b)).sqrt()
}

#[test]
fn nehari_scale_is_covariant() {
    let params = ModelParams::new(4.0, 0.0).unwrap();
    let g = Arc::new(Discretization::build(32, 128, 16.0).unwrap());
    let u = Field::from_fn(g, |r, z| (-0.5 * (r * r + z * z)).exp());
    let (t, on) = nehari_scale(&u, &params).unwrap();
    assert!((t - (5.0 * 2f64.sqrt()).sqrt()).abs() < 1e-8);
    assert!((nehari_scale(&on, &params).unwrap().0 - 1.0).abs() < 1e-12);
    for s in [0.1, 2.5, 40.0] {
        let (ts, ons) = nehari_scale(&u.scale(s), &params).unwrap();
        assert!((ts * s / t - 1.0).abs() < 1e-12);
        assert!(ons.sub(&on).unwrap().l2_norm_sq().sqrt() <= 1e-12 * on.l2_norm_sq().sqrt());
    }
}

#[test]
fn zero_start_is_rejected() {
    let params = ModelParams::new(4.0, 0.0).unwrap();
    let g = Arc::new(Discretization::build(16, 64, 12.0).unwrap());
    let r = solve_ground_state(&params, g.clone(), Start::Field(Field::zeros(g)), &SolverOptions::default());
    assert!(matches!(r, Err(Error::CollapsedToZero) | Err(Error::ZeroField)), "{r:?}");
}

#[test]
fn near_threshold_state_matches_the_product_profile() {
    let params = ModelParams::from_tau(4.0, 0.05).unwrap();
    let r = solve(&params, Start::Guess(Guess::DimensionReduction));
    assert!(r.converged && r.positive);
    assert!(r.gradient_norm <= SolverOptions::default().tol_grad);
    assert!(r.action_history.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
    let w = to_w(&r.u, &params).unwrap();
    let w_hat = soliton_1d(4.0).unwrap();
    let reference = Field::separable(w.grid().clone(), e1, |z| w_hat.eval(z));
    assert!(rel(&w, &reference, h_norm_sq) <= 0.05);
}

#[test]
fn strong_confinement_state_matches_the_soliton() {
    let params = ModelParams::new(4.0, -40.0).unwrap();
    let r = solve(&params, Start::Guess(Guess::Soliton3D));
    assert!(r.converged && r.positive);
    let v = to_v(&r.u, &params).unwrap();
    let v_tilde = shoot_3d(4.0).unwrap();
    let reference = Field::from_fn(v.grid().clone(), |r, z| v_tilde.eval((r * r + z * z).sqrt()));
    assert!(rel(&v, &reference, h1_norm_sq) <= 0.05);
}

#[test]
fn multistart_returns_the_least_action() {
    let params = ModelParams::new(4.0, 1.5).unwrap();
    let best = solve(&params, Start::MultiStart);
    for guess in Guess::ALL {
        if let Ok(r) = solve_ground_state(
            &params,
            Arc::new(Discretization::from_spec(GridSpec::auto(&params)).unwrap()),
            Start::Guess(guess),
            &SolverOptions::default(),
        ) {
            if r.positive {
                assert!(best.action <= r.action + 1e-10 * r.action.abs());
            }
        }
    }
}

#[test]
fn free_oscillator_bottom_is_two() {
    let params = ModelParams::new(4.0, 0.0).unwrap();
    let g = Arc::new(Discretization::build(16, 64, 12.0).unwrap());
    let op = LinearizedOperator::new(Equation::u_picture(&params), &Field::zeros(g.clone()));
    let seed = Field::from_fn(g, |r, z| (-(r * r) * 0.4 - z * z / 20.0).exp());
    let spec = linearized_smallest_eigs(&op, 2, &seed).unwrap();
    assert!((spec.values[0] - 2.0).abs() <= 1e-8, "{:?}", spec.values);
}

#[test]
fn linearization_near_threshold() {
    let params = ModelParams::from_tau(4.0, 0.05).unwrap();
    let r = solve(&params, Start::Guess(Guess::DimensionReduction));
    let op = LinearizedOperator::new(r.equation(), &r.u);
    let spec = linearized_smallest_eigs(&op, 4, &r.u).unwrap();
    assert_eq!(spec.negative_count(), 1, "{:?}", spec.values);
    assert!(spec.closest_to_zero().abs() > 1e-3, "{:?}", spec.values);
    for (res, v) in spec.residuals.iter().zip(&spec.vectors) {
        assert!(*res <= 1e-6 * v.l2_norm_sq().sqrt().max(1.0));
    }

    // symmetric on the sector
    let n = op.sector().dim();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut random = || -> Vec<f64> {
        let smooth = op.sector().from_field(&r.u);
        smooth.iter().map(|s| s * rng.random_range(0.5..1.5)).collect()
    };
    let (a, b) = (random(), random());
    assert_eq!(a.len(), n);
    let (la, lb) = (op.apply(&a), op.apply(&b));
    let (x, y) = (dot(&la, &b), dot(&a, &lb));
    assert!((x - y).abs() <= 1e-9 * x.abs().max(y.abs()));

    // axial translations are in the kernel outside the symmetric sector
    let g = r.u.grid().clone();
    let dz = r.u.map_coeffs(|_, m, c| if g.is_nyquist(m) { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, g.xi(m)) * c });
    let l_dz = op.apply_field(&dz);
    assert!(l_dz.l2_norm_sq().sqrt() <= 1e-6 * dz.l2_norm_sq().sqrt(), "{}", (l_dz.l2_norm_sq() / dz.l2_norm_sq()).sqrt());
}

#[test]
fn chi_approaches_the_near_limit_shape() {
    let p = 4.0;
    let w_hat = soliton_1d(p).unwrap();
    let mut dists = Vec::new();
    for tau in [0.2, 0.1, 0.05] {
        let params = ModelParams::from_tau(p, tau).unwrap();
        let r = solve(&params, Start::Guess(Guess::DimensionReduction));
        let chi = solve_chi(&r).unwrap();
        assert!(chi.rel_residual <= 1e-8);
        let scaled = to_w(&chi.chi, &params).unwrap().scale(tau);
        let limit = Field::separable(scaled.grid().clone(), e1, |_| 1.0).map_nodes_indexed(|_, j, v| {
            let z = scaled.grid().axial_nodes()[j];
            v * (w_hat.eval(z) / (2.0 - p) - 0.5 * z * w_hat.deriv(z))
        });
        dists.push((scaled.sub(&limit).unwrap().l2_norm_sq() / limit.l2_norm_sq()).sqrt());
    }
    assert!(dists.windows(2).all(|w| w[1] < w[0]), "{dists:?}");
    assert!(dists[2] < 0.1, "{dists:?}");
}

#[test]
fn chi_approaches_the_far_limit_shape() {
    let p = 4.0;
    let v_tilde = shoot_3d(p).unwrap();
    let mut dists = Vec::new();
    for lam in [-10.0, -20.0, -40.0] {
        let params = ModelParams::new(p, lam).unwrap();
        let r = solve(&params, Start::Guess(Guess::Soliton3D));
        let chi = solve_chi(&r).unwrap();
        let scaled = to_v(&chi.chi, &params).unwrap().scale(-lam);
        let limit = Field::from_fn(scaled.grid().clone(), |r, z| {
            let rho = (r * r + z * z).sqrt();
            v_tilde.eval(rho) / (2.0 - p) - 0.5 * rho * v_tilde.deriv(rho)
        });
        dists.push((scaled.sub(&limit).unwrap().l2_norm_sq() / limit.l2_norm_sq()).sqrt());
    }
    assert!(dists.windows(2).all(|w| w[1] < w[0]), "{dists:?}");
    assert!(dists[2] < 0.05, "{dists:?}");
}
