use confinement_core::branch::{asymptotic_constants, find_mass_pair, mass_sup_scan, sweep, BranchCurve, Stability, SweepOptions};
use confinement_core::limits::Regime;
use confinement_core::{Error, LAMBDA0};
use std::f64::consts::PI;

fn quick() -> SweepOptions {
    SweepOptions { eigenvalues: false, finite_differences: false, ..SweepOptions::default() }
}

#[test]
fn mass_vanishes_at_both_ends_and_slopes_change_sign() {
    let opts = SweepOptions { eigenvalues: false, ..SweepOptions::default() };
    let curve = sweep(4.0, &[-40.0, -10.0, 0.0, 1.0, 1.9, LAMBDA0 - 0.05], &opts).unwrap();
    let m: Vec<f64> = curve.samples.iter().map(|s| s.mass).collect();
    assert!(m[0] < m[1] && m[1] < m[2], "{m:?}");
    assert!(m[3] > m[4] && m[4] > m[5], "{m:?}");
    let first = &curve.samples[0];
    let last = curve.samples.last().unwrap();
    assert!(first.slope_chi > 0.0 && first.stability == Stability::Unstable);
    assert!(last.slope_chi < 0.0 && last.stability == Stability::Stable);
    for s in &curve.samples {
        assert_eq!(s.slopes_agree(), Some(true), "λ = {}", s.lambda);
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("branch.csv");
    curve.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "lambda,mass,action,slope_chi,slope_fd,stability,eig_min");
    assert_eq!(text.lines().count(), 1 + curve.samples.len());

    // a sub-grid never reports a larger maximum
    let full = mass_sup_scan(&curve).unwrap();
    let sub = BranchCurve { p: curve.p, samples: curve.samples.iter().step_by(2).cloned().collect() };
    assert!(mass_sup_scan(&sub).unwrap().max_mass <= full.max_mass);
    assert!(full.interior);
}

#[test]
fn near_tail_extrapolates_to_the_soliton_mass() {
    let taus = [0.2, 0.1, 0.05, 0.025];
    let lambdas: Vec<f64> = taus.iter().map(|t| LAMBDA0 - t).collect();
    let curve = sweep(4.0, &lambdas, &SweepOptions { eigenvalues: false, finite_differences: false, ..SweepOptions::default() }).unwrap();
    let fit = asymptotic_constants(&curve, Regime::Near).unwrap();
    assert!((fit.predicted - 8.0 * PI).abs() < 1e-9);
    assert!(fit.relative_error < 0.05, "{fit:?}");
    assert!(fit.slope_signs_agree);
    assert!(matches!(asymptotic_constants(&curve, Regime::Far), Err(Error::InsufficientTail { .. })));
}

#[test]
fn mass_pair_preconditions() {
    assert!(find_mass_pair(3.0, 1.0, &quick()).is_err());
    assert!(find_mass_pair(4.0, 0.0, &quick()).is_err());
    assert!(matches!(find_mass_pair(4.0, 10.0, &quick()), Err(Error::MassTooLarge { .. })));
}
