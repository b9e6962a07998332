//! The suite registry: one entry per verified claim, with its residuals and default tolerances.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use kcircles::beltrami::{
    derivative_identity_defect, line_constancy_defect, momentum_polynomial_fit, normalized_h,
    ratio_spread, recover_g, ComplexLine,
};
use kcircles::circles::{
    complex_line_defect, complex_line_defect_points, fit_circle, fit_line, CircleFit, CurveKind,
};
use kcircles::connection::{
    christoffel, complex_bilinearity_defect, energy_drift, exp_jet2, extract_l, geodesic,
};
use kcircles::curvature::hsc_constancy_scan;
use kcircles::families::{exterior_ball_curve, poincare_family, suspend};
use kcircles::metrics::{kahler_defect, metric_from_id, BallMetric, MetricField, DEFAULT_STEP};
use kcircles::projective::{image_of_line, jet2_of_map, rectifier, Jet2, Side, DEFAULT_JET_STEP};
use kcircles::quaternion::{classify_a, decompose_a};
use kcircles::sample::{self, Region, SeededRng};
use kcircles::{BilinearMap, GeomError, Point4, SharedMetric};
use nalgebra::Matrix4;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{SuiteConfig, SuiteId};
use crate::report::{Case, Residual, VerificationReport};

type Params = BTreeMap<String, Value>;
type CaseResult = kcircles::Result<Vec<Residual>>;

pub struct SuiteEntry {
    pub id: SuiteId,
    /// The property the suite checks, in one line.
    pub claim: &'static str,
    /// Residual names and their default tolerances.
    pub residuals: &'static [(&'static str, f64)],
    run: fn(&Ctx) -> Vec<Case>,
}

pub static REGISTRY: [SuiteEntry; 12] = [
    SuiteEntry {
        id: SuiteId::GeodesicCircles,
        claim: "geodesics of a Fubini metric are circles or lines",
        residuals: &[("circle_fit", 1e-6)],
        run: geodesic_circles,
    },
    SuiteEntry {
        id: SuiteId::ComplexLines,
        claim: "geodesics of a Fubini metric stay in the complex line of their initial velocity",
        residuals: &[("complex_line_defect", 1e-7)],
        run: complex_lines,
    },
    SuiteEntry {
        id: SuiteId::Kahler,
        claim: "a Hermitian metric is Kähler exactly when its Christoffel form is complex bilinear",
        residuals: &[
            ("kahler_defect", 1e-6),
            ("complex_bilinearity_defect", 1e-6),
        ],
        run: kahler,
    },
    SuiteEntry {
        id: SuiteId::Bilinearity,
        claim: "the Christoffel form of a Kähler metric is complex bilinear",
        residuals: &[("complex_bilinearity_defect", 1e-6)],
        run: bilinearity,
    },
    SuiteEntry {
        id: SuiteId::ExpJet,
        claim: "the exponential map has a holomorphic 2-jet of the form x + A(x)x",
        residuals: &[("holomorphy_defect", 1e-6), ("beta_coefficient", 1e-6)],
        run: exp_jet,
    },
    SuiteEntry {
        id: SuiteId::Proportionality,
        claim: "Γ(v, v) = L(v)·v with L complex linear",
        residuals: &[
            ("proportionality_residual", 1e-6),
            ("complex_linearity_defect", 1e-6),
        ],
        run: proportionality,
    },
    SuiteEntry {
        id: SuiteId::Rectifier,
        claim: "a projective map with 2-jet (id, A(x)x) straightens every geodesic through a point",
        residuals: &[
            ("jet_defect", 1e-7),
            ("line_image_residual", 1e-8),
            ("geodesic_match", 1e-5),
        ],
        run: rectifier_suite,
    },
    SuiteEntry {
        id: SuiteId::Curvature,
        claim: "holomorphic sectional curvature of a Fubini metric is constant",
        residuals: &[("spread", 1e-4), ("gauss_disagreement", 1e-4)],
        run: curvature,
    },
    SuiteEntry {
        id: SuiteId::Gram,
        claim: "g/G^(2/3) is constant on complex lines and recovers g, with XG = 3 Re L(X) G",
        residuals: &[
            ("ratio_spread", 1e-8),
            ("line_constancy_defect", 1e-6),
            ("derivative_identity_defect", 1e-5),
        ],
        run: gram,
    },
    SuiteEntry {
        id: SuiteId::Momentum,
        claim: "a line-constant Hermitian form is quadratic in momentum and angular momentum",
        residuals: &[("momentum_residual", 1e-6)],
        run: momentum,
    },
    SuiteEntry {
        id: SuiteId::FamilySuspension,
        claim: "the suspension of the Poincaré family is complete and pointwise rectifiable",
        residuals: &[
            ("tangency_defect", 1e-8),
            ("circle_fit", 1e-8),
            ("complex_line_defect", 1e-8),
            ("rectified_line_residual", 1e-6),
        ],
        run: family_suspension,
    },
    SuiteEntry {
        id: SuiteId::FamilyExterior,
        claim: "curves of the indefinite metric outside the unit ball are circles",
        residuals: &[("circle_fit", 1e-5), ("energy_drift", 1e-7)],
        run: family_exterior,
    },
];

pub fn entry(id: SuiteId) -> &'static SuiteEntry {
    REGISTRY
        .iter()
        .find(|s| s.id == id)
        .expect("every suite id is registered")
}

/// Runs a suite; runtime errors become failed cases.
pub fn run_suite(config: &SuiteConfig) -> VerificationReport {
    let start = Instant::now();
    let entry = entry(config.suite);
    let ctx = Ctx { config, entry };
    let cases = (entry.run)(&ctx);
    VerificationReport::new(config, cases, start.elapsed().as_secs_f64())
}

/// Geodesic integration settings shared by the metric suites.
pub const GEODESIC_TIME: f64 = 1.0;
pub const GEODESIC_STEPS: usize = 2048;
pub const EXTERIOR_TIME: f64 = 0.5;
pub const EXTERIOR_STEPS: usize = 4096;
pub const LINES_PER_RECTIFIER: usize = 20;

struct Ctx<'a> {
    config: &'a SuiteConfig,
    entry: &'static SuiteEntry,
}

impl Ctx<'_> {
    fn tol(&self, name: &str) -> f64 {
        let default = self
            .entry
            .residuals
            .iter()
            .find(|(n, _)| *n == name)
            .unwrap_or_else(|| panic!("residual {name} not registered for {}", self.entry.id))
            .1;
        self.config.tolerance(default)
    }

    fn residual(&self, name: &str, value: f64) -> Residual {
        Residual::new(name, value, self.tol(name))
    }

    fn metric(&self) -> SharedMetric {
        metric_from_id(&self.config.metric).expect("metric id validated with the config")
    }

    fn rng(&self) -> SeededRng {
        sample::rng(self.config.seed)
    }

    fn step(&self) -> f64 {
        self.config.step_or(DEFAULT_STEP)
    }
}

fn case_id(i: usize) -> String {
    format!("{i:04}")
}

fn finish(id: String, mut params: Params, result: CaseResult) -> Case {
    match result {
        Ok(residuals) => Case::new(id, params, residuals, None),
        Err(e) => {
            if let GeomError::DomainExit { time, .. } = &e {
                params.insert("exit_time".into(), json!(time));
            }
            Case::new(id, params, Vec::new(), Some(e.to_string()))
        }
    }
}

/// Evaluates pre-drawn inputs in parallel, keeping input order.
fn run_cases<T: Sync>(inputs: &[T], f: impl Fn(&T) -> (Params, CaseResult) + Sync) -> Vec<Case> {
    inputs
        .par_iter()
        .enumerate()
        .map(|(i, input)| {
            let (params, result) = f(input);
            finish(case_id(i), params, result)
        })
        .collect()
}

fn setup_failure(e: GeomError) -> Vec<Case> {
    vec![Case::new(
        "setup".into(),
        Params::new(),
        Vec::new(),
        Some(e.to_string()),
    )]
}

fn point_params(p: &Point4) -> Params {
    Params::from([("point".to_owned(), json!(p))])
}

fn state_params(p: &Point4, v: &Point4) -> Params {
    let mut params = point_params(p);
    params.insert("velocity".into(), json!(v));
    params
}

fn draw_points(ctx: &Ctx, g: &dyn MetricField) -> Vec<Point4> {
    let region = g.sample_region();
    let mut rng = ctx.rng();
    (0..ctx.config.samples)
        .map(|_| region.sample(&mut rng))
        .collect()
}

fn draw_states(ctx: &Ctx, region: &Region) -> Vec<(Point4, Point4)> {
    let mut rng = ctx.rng();
    (0..ctx.config.samples)
        .map(|_| (region.sample(&mut rng), sample::unit_vector(&mut rng)))
        .collect()
}

fn kind_name(fit: &CircleFit) -> &'static str {
    match fit.kind {
        CurveKind::Circle => "circle",
        CurveKind::Line => "line",
    }
}

fn geodesic_circles(ctx: &Ctx) -> Vec<Case> {
    let g = ctx.metric();
    run_cases(&draw_states(ctx, &g.sample_region()), |(p, v)| {
        let mut params = state_params(p, v);
        let result = geodesic(g.as_ref(), p, v, GEODESIC_TIME, GEODESIC_STEPS)
            .and_then(|traj| fit_circle(&traj.points))
            .map(|fit| {
                params.insert("kind".into(), json!(kind_name(&fit)));
                vec![ctx.residual("circle_fit", fit.relative_residual)]
            });
        (params, result)
    })
}

fn complex_lines(ctx: &Ctx) -> Vec<Case> {
    let g = ctx.metric();
    run_cases(&draw_states(ctx, &g.sample_region()), |(p, v)| {
        let result = geodesic(g.as_ref(), p, v, GEODESIC_TIME, GEODESIC_STEPS)
            .map(|traj| vec![ctx.residual("complex_line_defect", complex_line_defect(&traj))]);
        (state_params(p, v), result)
    })
}

fn kahler(ctx: &Ctx) -> Vec<Case> {
    let g = ctx.metric();
    run_cases(&draw_points(ctx, g.as_ref()), |p| {
        let result = (|| {
            let kahler = kahler_defect(g.as_ref(), p, ctx.step())?;
            let bilinear = complex_bilinearity_defect(&christoffel(g.as_ref(), p, ctx.step())?);
            Ok(vec![
                ctx.residual("kahler_defect", kahler),
                ctx.residual("complex_bilinearity_defect", bilinear),
            ])
        })();
        (point_params(p), result)
    })
}

fn bilinearity(ctx: &Ctx) -> Vec<Case> {
    let g = ctx.metric();
    run_cases(&draw_points(ctx, g.as_ref()), |p| {
        let result = christoffel(g.as_ref(), p, ctx.step()).map(|gamma| {
            vec![ctx.residual(
                "complex_bilinearity_defect",
                complex_bilinearity_defect(&gamma),
            )]
        });
        (point_params(p), result)
    })
}

fn exp_jet(ctx: &Ctx) -> Vec<Case> {
    let g = ctx.metric();
    run_cases(&draw_points(ctx, g.as_ref()), |p| {
        let mut params = point_params(p);
        let result = exp_jet2(g.as_ref(), p).map(|jet| {
            let classification = classify_a(&jet.fit, ctx.tol("holomorphy_defect"));
            params.insert(
                "complex_linear".into(),
                json!(classification.is_complex_linear()),
            );
            vec![
                ctx.residual("holomorphy_defect", jet.holomorphy_defect()),
                ctx.residual(
                    "beta_coefficient",
                    decompose_a(&jet.fit).beta.max_coefficient(),
                ),
            ]
        });
        (params, result)
    })
}

fn proportionality(ctx: &Ctx) -> Vec<Case> {
    let g = ctx.metric();
    run_cases(&draw_points(ctx, g.as_ref()), |p| {
        let result = christoffel(g.as_ref(), p, ctx.step()).map(|gamma| {
            let fit = extract_l(&gamma, ctx.tol("proportionality_residual"));
            vec![
                ctx.residual("proportionality_residual", fit.residual),
                ctx.residual(
                    "complex_linearity_defect",
                    fit.complex_linearity_defect.unwrap_or(f64::INFINITY),
                ),
            ]
        });
        (point_params(p), result)
    })
}

struct RectifierInput {
    point: Point4,
    velocity: Point4,
    lines: Vec<(Point4, Point4)>,
}

/// Half-length of the straight segments pushed through the rectifier.
const RECTIFIER_SEGMENT: f64 = 0.4;
const RECTIFIER_SAMPLES: usize = 200;

fn rectifier_suite(ctx: &Ctx) -> Vec<Case> {
    let g = ctx.metric();
    let region = g.sample_region();
    let mut rng = ctx.rng();
    let inputs: Vec<RectifierInput> = (0..ctx.config.samples)
        .map(|_| RectifierInput {
            point: region.sample(&mut rng),
            velocity: sample::unit_vector(&mut rng),
            lines: (0..LINES_PER_RECTIFIER)
                .map(|_| {
                    (
                        sample::gaussian_point(&mut rng) * 0.1,
                        sample::unit_vector(&mut rng),
                    )
                })
                .collect(),
        })
        .collect();
    run_cases(&inputs, |input| {
        let p = input.point;
        let result = (|| {
            let jet = exp_jet2(g.as_ref(), &p)?;
            let a = classify_a(&jet.fit, ctx.tol("jet_defect").max(1e-6))
                .functional()
                .ok_or_else(|| {
                    GeomError::Precondition("exponential 2-jet is not complex linear".into())
                })?;
            let map = rectifier(&p, &a, Side::Left);
            let measured = jet2_of_map(
                |x| map.apply(x).map(|y| y - p),
                &Point4::ZERO,
                ctx.config.step_or(DEFAULT_JET_STEP),
            )?;
            let expected = Jet2 {
                linear: Matrix4::identity(),
                quadratic: BilinearMap::from_quadratic(|x| x.scale_complex(a.eval(x))),
            };
            let mut line_residual = 0.0_f64;
            for (q, dir) in &input.lines {
                let fit = image_of_line(&map, q, dir, RECTIFIER_SEGMENT, RECTIFIER_SAMPLES)?;
                line_residual = line_residual.max(fit.relative_residual);
            }
            let image = image_of_line(
                &map,
                &Point4::ZERO,
                &input.velocity,
                RECTIFIER_SEGMENT,
                RECTIFIER_SAMPLES,
            )?;
            let traj = geodesic(
                g.as_ref(),
                &p,
                &input.velocity,
                GEODESIC_TIME,
                GEODESIC_STEPS,
            )?;
            let geo = fit_circle(&traj.points)?;
            Ok(vec![
                ctx.residual("jet_defect", measured.max_abs_diff(&expected)),
                ctx.residual("line_image_residual", line_residual),
                ctx.residual("geodesic_match", circle_mismatch(&image, &geo)),
            ])
        })();
        (state_params(&p, &input.velocity), result)
    })
}

/// Relative distance between two fitted curves: center offset and radius ratio for
/// circles, plane misalignment for lines.
fn circle_mismatch(a: &CircleFit, b: &CircleFit) -> f64 {
    match (a.center.zip(a.radius), b.center.zip(b.radius)) {
        (Some((ca, ra)), Some((cb, rb))) => (ca.distance(&cb) / rb).max((ra / rb - 1.0).abs()),
        (None, None) => {
            let dir = a.plane[0];
            (dir - b.plane[0] * dir.dot(&b.plane[0])).norm()
        }
        _ => f64::INFINITY,
    }
}

/// Below this `|mean|` the spread is measured absolutely.
const ZERO_CURVATURE: f64 = 1e-12;

fn curvature(ctx: &Ctx) -> Vec<Case> {
    let g = ctx.metric();
    let mut params = Params::from([("n".to_owned(), json!(ctx.config.samples))]);
    let result = hsc_constancy_scan(
        g.as_ref(),
        &g.sample_region(),
        ctx.config.samples,
        ctx.config.seed,
    )
    .map(|scan| {
        params.insert("mean".into(), json!(scan.mean));
        params.insert("std".into(), json!(scan.std));
        params.insert("max_dev".into(), json!(scan.max_dev));
        let spread = if scan.mean.abs() > ZERO_CURVATURE {
            scan.relative_spread()
        } else {
            scan.max_dev
        };
        vec![
            ctx.residual("spread", spread),
            ctx.residual("gauss_disagreement", scan.max_disagreement()),
        ]
    });
    vec![finish("scan".into(), params, result)]
}

/// Fraction of the metric's sample region used for line tests, leaving room for the lines.
const LINE_REGION_SCALE: f64 = 0.6;
const LINE_EXTENT: f64 = 0.1;
const LINE_SAMPLES: usize = 16;

fn gram(ctx: &Ctx) -> Vec<Case> {
    let g = ctx.metric();
    let hf = match normalized_h(g.clone()) {
        Ok(hf) => Arc::new(hf),
        Err(e) => return setup_failure(e),
    };
    let region = Region::ball(g.sample_region().outer * LINE_REGION_SCALE);
    let lines: Vec<ComplexLine> = draw_states(ctx, &region)
        .into_iter()
        .map(|(point, direction)| ComplexLine {
            point,
            direction,
            extent: LINE_EXTENT,
        })
        .collect();
    let mut cases = run_cases(&lines, |line| {
        let result = (|| {
            Ok(vec![
                ctx.residual(
                    "line_constancy_defect",
                    line_constancy_defect(hf.as_ref(), line, LINE_SAMPLES)?,
                ),
                ctx.residual(
                    "derivative_identity_defect",
                    derivative_identity_defect(g.as_ref(), &line.point)?,
                ),
            ])
        })();
        (state_params(&line.point, &line.direction), result)
    });
    let pairs: kcircles::Result<Vec<_>> = lines
        .iter()
        .map(|l| Ok((recover_g(&hf, &l.point)?, g.evaluate(&l.point)?)))
        .collect();
    let round_trip = pairs.map(|pairs| vec![ctx.residual("ratio_spread", ratio_spread(&pairs))]);
    let params = Params::from([("points".to_owned(), json!(lines.len()))]);
    cases.push(finish("round-trip".into(), params, round_trip));
    cases
}

fn momentum(ctx: &Ctx) -> Vec<Case> {
    let g = ctx.metric();
    let params = Params::from([("n_samples".to_owned(), json!(ctx.config.samples))]);
    let result = normalized_h(g).and_then(|hf| {
        let fit = momentum_polynomial_fit(&hf, ctx.config.samples, ctx.config.seed)?;
        Ok(vec![ctx.residual("momentum_residual", fit.residual)])
    });
    vec![finish("fit".into(), params, result)]
}

pub const SUSPENSION_CURVE_SAMPLES: usize = 65;
pub const SUSPENSION_EXTENT: f64 = 1.0;

fn family_suspension(ctx: &Ctx) -> Vec<Case> {
    let family = suspend(poincare_family());
    let mut rng = ctx.rng();
    let inputs: Vec<(Point4, Point4)> = (0..ctx.config.samples)
        .map(|_| (family.sample_point(&mut rng), sample::unit_vector(&mut rng)))
        .collect();
    run_cases(&inputs, |(a, dir)| {
        let result = (|| {
            let pts = family.sample_curve(a, dir, SUSPENSION_CURVE_SAMPLES, SUSPENSION_EXTENT)?;
            let map = family.rectifier(a)?;
            let image = pts
                .iter()
                .map(|x| map.apply(x))
                .collect::<kcircles::Result<Vec<_>>>()?;
            Ok(vec![
                ctx.residual("tangency_defect", family.tangency_defect(a, dir)?),
                ctx.residual("circle_fit", fit_circle(&pts)?.relative_residual),
                ctx.residual(
                    "complex_line_defect",
                    complex_line_defect_points(&pts, a, dir),
                ),
                ctx.residual(
                    "rectified_line_residual",
                    fit_line(&image)?.relative_residual,
                ),
            ])
        })();
        (state_params(a, dir), result)
    })
}

fn family_exterior(ctx: &Ctx) -> Vec<Case> {
    let metric = BallMetric::exterior();
    let inputs = draw_states(ctx, &metric.sample_region());
    run_cases(&inputs, |(p, v)| {
        let result = (|| {
            let traj = exterior_ball_curve(p, v, EXTERIOR_TIME, EXTERIOR_STEPS)?;
            Ok(vec![
                ctx.residual("circle_fit", fit_circle(&traj.points)?.relative_residual),
                ctx.residual("energy_drift", energy_drift(&metric, &traj)?),
            ])
        })();
        (state_params(p, v), result)
    })
}
