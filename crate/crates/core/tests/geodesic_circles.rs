//! End-to-end checks across modules: metric → geodesic → circle → rectifier.

use std::sync::Arc;

use kcircles::beltrami::{
    line_constancy_defect, momentum_polynomial_fit, normalized_h, ComplexLine,
};
use kcircles::circles::{complex_line_defect, fit_circle, CurveKind};
use kcircles::connection::{christoffel, energy_drift, exp_jet2, extract_l, geodesic};
use kcircles::metrics::{fubini_metric, metric_from_id, MetricField};
use kcircles::projective::{image_of_line, rectifier, Side};
use kcircles::quaternion::classify_a;
use kcircles::sample::{self, Region};
use kcircles::Point4;

#[test]
fn fubini_geodesics_are_circles_in_complex_lines() {
    let mut rng = sample::rng(2024);
    for alpha in [-1.0, -0.5, 0.5, 1.0] {
        let g = fubini_metric(alpha);
        for _ in 0..10 {
            let p = g.sample_region().sample(&mut rng);
            let v = sample::unit_vector(&mut rng);
            let traj = geodesic(&g, &p, &v, 1.0, 2048).unwrap();
            let fit = fit_circle(&traj.points).unwrap();
            assert!(fit.relative_residual <= 1e-6, "α={alpha}: {fit:?}");
            assert!(complex_line_defect(&traj) <= 1e-7);
            assert!(energy_drift(&g, &traj).unwrap() <= 1e-8);
        }
    }
}

#[test]
fn flat_geodesics_are_lines() {
    let g = metric_from_id("fubini:0").unwrap();
    let mut rng = sample::rng(5);
    for _ in 0..10 {
        let p = g.sample_region().sample(&mut rng);
        let traj = geodesic(g.as_ref(), &p, &sample::unit_vector(&mut rng), 1.0, 64).unwrap();
        assert_eq!(fit_circle(&traj.points).unwrap().kind, CurveKind::Line);
    }
}

#[test]
fn rectifier_built_from_connection_reproduces_geodesic() {
    let g = fubini_metric(-1.0);
    let p = Point4::new(0.1, -0.2, 0.25, 0.05);
    let jet = exp_jet2(&g, &p).unwrap();
    let a = classify_a(&jet.fit, 1e-6)
        .functional()
        .expect("complex linear");
    let l = extract_l(&christoffel(&g, &p, 1e-4).unwrap(), 1e-6);
    assert!(a.coefficient_distance(&l.complex_functional().scale((-1.0).into())) <= 1e-9);

    let v = Point4::new(0.2, 0.3, -0.1, 0.4);
    let image = image_of_line(&rectifier(&p, &a, Side::Left), &Point4::ZERO, &v, 0.4, 200).unwrap();
    let geo = fit_circle(&geodesic(&g, &p, &v, 1.0, 2048).unwrap().points).unwrap();
    assert!(image.center.unwrap().distance(&geo.center.unwrap()) <= 1e-5 * geo.radius.unwrap());
    assert!((image.radius.unwrap() / geo.radius.unwrap() - 1.0).abs() <= 1e-5);
}

#[test]
fn line_constancy_and_momentum_fit_co_occur() {
    let battery = [
        "euclidean",
        "fubini:1",
        "fubini:-1",
        "fubini:0.5",
        "testfield:perturbed",
        "testfield:generic",
    ];
    let mut rng = sample::rng(9);
    for id in battery {
        let g = metric_from_id(id).unwrap();
        let hf = Arc::new(normalized_h(g.clone()).unwrap());
        let region = Region::ball(g.sample_region().outer * 0.6);
        let constancy = (0..10)
            .map(|_| {
                let line = ComplexLine {
                    point: region.sample(&mut rng),
                    direction: sample::unit_vector(&mut rng),
                    extent: 0.1,
                };
                line_constancy_defect(hf.as_ref(), &line, 16).unwrap()
            })
            .fold(0.0, f64::max);
        let momentum = momentum_polynomial_fit(hf.as_ref(), 200, 11)
            .unwrap()
            .residual;
        assert_eq!(
            constancy <= 1e-6,
            momentum <= 1e-6,
            "{id}: constancy {constancy:e}, momentum {momentum:e}"
        );
    }
}
