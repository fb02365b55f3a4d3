use std::sync::Arc;

use confinement_core::field::{read_snapshot, write_snapshot};
use confinement_core::params::reparametrize;
use confinement_core::{Discretization, Field, GridSpec, ModelParams};

#[test]
fn reparametrize_examples() {
    let (mu, tau) = reparametrize(&ModelParams::new(4.0, -2.0).unwrap());
    assert_eq!(mu, Some(0.25));
    assert_eq!(tau, 4.0);
    let (mu, tau) = reparametrize(&ModelParams::new(4.0, 1.9).unwrap());
    assert_eq!(mu, None);
    assert!((tau - 0.1).abs() < 1e-15);
    let (mu, tau) = reparametrize(&ModelParams::new(10.0 / 3.0, -10.0).unwrap());
    assert!((mu.unwrap() - 0.01).abs() < 1e-15);
    assert_eq!(tau, 12.0);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(ModelParams::new(2.0, 0.0).is_err());
    assert!(ModelParams::new(6.0, 0.0).is_err());
    assert!(ModelParams::new(4.0, 2.0).is_err());
    assert!(ModelParams::new(4.0, f64::NAN).is_err());
    assert!(ModelParams::from_tau(4.0, 0.0).is_err());
}

#[test]
fn symmetrize_is_idempotent() {
    let g = Arc::new(Discretization::build(12, 32, 6.0).unwrap());
    let f = Field::from_fn(g, |r, z| (-(r * r) - (z - 0.7).powi(2)).exp() + 0.1 * z);
    let once = f.symmetrize();
    let twice = once.symmetrize();
    assert_eq!(once.coeffs(), twice.coeffs());
    assert!(once.symmetry().even_z && once.symmetry().real);
}

#[test]
fn snapshots_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let params = ModelParams::new(4.0, 1.5).unwrap();
    let g = Arc::new(Discretization::from_spec(GridSpec::new(12, 32, 6.0).with_radial_scale(0.8)).unwrap());
    let f = Field::from_fn(g, |r, z| (-(r * r) - z * z).exp());
    write_snapshot(&f, &params, dir.path(), "u").unwrap();
    let (header, back) = read_snapshot(dir.path(), "u").unwrap();
    assert_eq!(header.lambda, 1.5);
    assert_eq!(header.radial_scale, 0.8);
    assert_eq!(back.nodes(), f.nodes());

    let c = f.to_complex().map_nodes_indexed(|i, j, v| v * num_complex::Complex64::from_polar(1.0, (i + j) as f64));
    write_snapshot(&c, &params, dir.path(), "psi").unwrap();
    let (header, back) = read_snapshot(dir.path(), "psi").unwrap();
    assert_eq!(header.dtype, "c128");
    assert_eq!(back.nodes(), c.nodes());
}
