use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C;
use pointdamp_core::eigenfunctions::eval_phi;
use pointdamp_core::resolvent::{det_alpha, resolvent_apply};
use pointdamp_core::spectrum::{count_zeros, refine_root_in, ContourBox};
use pointdamp_core::{
    compute_spectrum, BeamParams, GridFunction, ResolventInput, Sign, SpectrumResult,
};

fn params(alpha: f64) -> BeamParams {
    BeamParams::damped(1.0, 1.0, alpha, FRAC_1_SQRT_2).unwrap()
}

#[test]
fn spectrum_json_round_trips() {
    let spec = compute_spectrum(&params(0.05), 6).unwrap();
    let back: SpectrumResult = serde_json::from_str(&spec.to_json()).unwrap();
    assert_eq!(back, spec);
    let csv = spec.to_csv();
    assert_eq!(csv.lines().count(), spec.eigenvalues.len() + 1);
    assert!(csv.starts_with("n,sign,re_mu,im_mu,residual,provenance"));
}

#[test]
fn contour_zeros_are_the_recorded_eigenvalues() {
    let p = params(0.2);
    let spec = compute_spectrum(&p, 6).unwrap();
    for rec in spec.eigenvalues.iter().take(8) {
        let bx = ContourBox::around(rec.mu() + C::new(0.013, -0.007), 0.05);
        assert_eq!(count_zeros(&p, &bx).unwrap(), 1);
        let found = refine_root_in(&p, bx.center(), Some(&bx)).unwrap();
        assert!((found.mu() - rec.mu()).norm() <= 1e-8);
        let d = det_alpha(&p, found.point.lambda, found.mu()).unwrap();
        assert!(d.value.norm() <= 1e-8 * 8.0 * found.point.lambda.norm().powi(5));
    }
}

#[test]
fn resolvent_near_a_pole_points_along_the_eigenfunction() {
    let p = params(0.05);
    let spec = compute_spectrum(&p, 3).unwrap();
    let rec = spec.find(2, Sign::Plus).unwrap();
    let phi = eval_phi(&p, &rec.point, 1024).unwrap().first;
    let u1 = GridFunction::from_fn(1024, |x| {
        C::new((PI * x).sin() + 0.3 * (2.0 * PI * x).sin(), 0.0)
    })
    .unwrap();
    let v1 = GridFunction::zeros(1024).unwrap();
    let input = ResolventInput::new(u1, v1, rec.mu() + C::new(1e-6, 1e-6)).unwrap();
    let u = resolvent_apply(&p, &input).unwrap().u;
    let dot: C = u
        .samples
        .iter()
        .zip(&phi.samples)
        .map(|(a, b)| a * b.conj())
        .sum();
    let cos = dot.norm() / (u.l2() * phi.l2()) * (1.0 / 1024.0);
    assert!((1.0 - cos).abs() < 1e-4, "{cos}");
}

#[test]
fn grid_csv_has_fixed_precision() {
    let g = GridFunction::from_fn(16, |x| C::new(x, -x)).unwrap();
    let csv = g.to_csv();
    let row = csv.lines().nth(3).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields.len(), 3);
    assert!(fields.iter().all(|f| f.contains('e')));
    assert_eq!(fields[0].parse::<f64>().unwrap(), 2.0 / 16.0);
}
