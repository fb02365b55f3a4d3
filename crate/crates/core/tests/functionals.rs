use std::f64::consts::PI;
use std::sync::Arc;

use confinement_core::functionals::{gradient, pohozaev_residual, report, scaled_actions};
use confinement_core::ground_state::{nehari_scale, solve_ground_state, Guess, SolverOptions, Start};
use confinement_core::limits::{e1, soliton_1d};
use confinement_core::scaling::{from_w, to_v, to_w};
use confinement_core::{Discretization, Field, GridSpec, ModelParams};

fn grid() -> Arc<Discretization> {
    Arc::new(Discretization::build(32, 128, 16.0).unwrap())
}

#[test]
fn zero_field_reports_zero() {
    let params = ModelParams::new(4.0, 0.5).unwrap();
    let zero = Field::zeros(grid());
    let r = report(&zero, &params);
    for v in [r.l2_mass, r.h1_norm_sq, r.h_norm_sq, r.lambda_norm_sq, r.lp_integral, r.action, r.nehari_residual] {
        assert_eq!(v, 0.0);
    }
    assert_eq!(gradient(&zero, &params).l2_norm_sq(), 0.0);
    assert_eq!(pohozaev_residual(&zero, &params), 0.0);
    let w = to_w(&zero, &params).unwrap();
    let (_, jw) = scaled_actions(&zero, &w, &params);
    assert_eq!(jw, 0.0);
    let far = ModelParams::new(4.0, -3.0).unwrap();
    let v = to_v(&zero, &far).unwrap();
    assert_eq!(scaled_actions(&v, &w, &far).0, Some(0.0));
}

#[test]
fn gaussian_integrals() {
    let params = ModelParams::new(4.0, 0.0).unwrap();
    let u = Field::from_fn(grid(), |r, z| (-0.5 * (r * r + z * z)).exp());
    let r = report(&u, &params);
    assert!((r.lambda_norm_sq - 2.5 * PI.powf(1.5)).abs() < 1e-9);
    assert!((r.lp_integral - (PI / 2.0).powf(1.5)).abs() < 1e-9);
}

#[test]
fn projected_product_state_is_on_the_manifold() {
    let params = ModelParams::from_tau(4.0, 0.5).unwrap();
    let w = soliton_1d(4.0).unwrap();
    let s = params.tau().sqrt();
    let g = Arc::new(Discretization::from_spec(GridSpec::auto(&params)).unwrap());
    let (_, u) = nehari_scale(&Field::separable(g, e1, |z| w.eval(s * z)), &params).unwrap();
    let pairing = gradient(&u, &params).dot(&u).unwrap();
    assert!(pairing.abs() <= 1e-10 * report(&u, &params).lp_integral, "{pairing}");
}

#[test]
fn identities_on_a_ground_state() {
    let params = ModelParams::new(4.0, 0.0).unwrap();
    let g = Arc::new(Discretization::from_spec(GridSpec::auto(&params)).unwrap());
    let r = solve_ground_state(&params, g, Start::MultiStart, &SolverOptions::default()).unwrap();
    let rep = report(&r.u, &params);
    assert!((rep.action / ((0.5 - 0.25) * rep.lp_integral) - 1.0).abs() <= 1e-8);
    assert!(pohozaev_residual(&r.u, &params).abs() <= 1e-6 * rep.l2_mass);
    assert!(pohozaev_residual(&r.u.scale(2.0), &params).abs() > 1e-3);
}

#[test]
fn transverse_excess_shrinks_toward_threshold() {
    let mut ratios = Vec::new();
    for tau in [0.2, 0.1, 0.05] {
        let params = ModelParams::from_tau(4.0, tau).unwrap();
        let g = Arc::new(Discretization::from_spec(GridSpec::auto(&params)).unwrap());
        let r = solve_ground_state(&params, g, Start::Guess(Guess::DimensionReduction), &SolverOptions::default()).unwrap();
        let w = to_w(&r.u, &params).unwrap();
        ratios.push((w.project_q().l2_norm_sq() / w.l2_norm_sq()).sqrt());
        // mass identity and inverse map
        let want = tau.powf(0.5 - 2.0 / (4.0 - 2.0));
        assert!((w.l2_norm_sq() / r.mass / want - 1.0).abs() < 1e-10);
        let back = from_w(&w, &params).unwrap();
        assert!(back.sub(&r.u).unwrap().l2_norm_sq().sqrt() <= 1e-8 * r.mass.sqrt());
    }
    assert!(ratios[2] <= 0.1, "{ratios:?}");
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}

#[test]
fn unit_parameters_leave_fields_alone() {
    let g = Arc::new(Discretization::build(16, 64, 8.0).unwrap());
    let u = Field::from_fn(g, |r, z| (-(r * r) - 0.5 * z * z).exp());
    for (params, map) in [
        (ModelParams::new(4.0, -1.0).unwrap(), to_v as fn(&Field, &ModelParams) -> confinement_core::Result<Field>),
        (ModelParams::new(4.0, 1.0).unwrap(), to_w),
    ] {
        let out = map(&u, &params).unwrap();
        for (r, z) in [(0.0, 0.0), (0.7, 1.1), (1.5, -2.0)] {
            assert!((out.value_at(r, z) - u.value_at(r, z)).norm() < 1e-12);
        }
    }
}
