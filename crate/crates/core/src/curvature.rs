//! Riemann tensor, holomorphic sectional curvature and constancy scans.
//!
//! `R^ρ_{σμν} = ∂_μ Γ^ρ_{νσ} − ∂_ν Γ^ρ_{μσ} + Γ^ρ_{μλ} Γ^λ_{νσ} − Γ^ρ_{νλ} Γ^λ_{μσ}`,
//! lowered as `R_{ρσμν} = g_{ρλ} R^λ_{σμν}`, so that the sectional curvature
//! of `span(X, Y)` is `R(X, Y, X, Y) / (g(X,X) g(Y,Y) − g(X,Y)²)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connection::christoffel;
use crate::error::{GeomError, Result};
use crate::forms::{form_apply, Form};
use crate::metrics::{MetricField, DEFAULT_STEP};
use crate::quaternion::Point4;
use crate::sample::{self, Region};

/// Difference step for quantities needing two derivatives of the metric.
pub const CURVATURE_STEP: f64 = 1e-3;

const PLANE_THRESHOLD: f64 = 1e-12;

type Tensor4 = [[[[f64; 4]; 4]; 4]; 4];

fn zero_tensor() -> Tensor4 {
    [[[[0.0; 4]; 4]; 4]; 4]
}

/// Curvature tensor at a point, with the index convention of the module docs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Riemann {
    pub point: Point4,
    pub metric: Form,
    /// `R^ρ_{σμν}` as `[ρ][σ][μ][ν]`.
    pub mixed: Tensor4,
    /// `R_{ρσμν}`.
    pub lowered: Tensor4,
}

pub fn riemann(g: &dyn MetricField, p: &Point4, step: f64) -> Result<Riemann> {
    let metric = g.evaluate(p)?;
    let gamma = christoffel(g, p, DEFAULT_STEP)?.symbols.coeffs;
    // [m][k][i][j] = ∂_m Γ^k_ij, central differences at step and step/2, Richardson-combined
    let mut d_gamma = [[[[0.0; 4]; 4]; 4]; 4];
    for m in 0..4 {
        for (h, weight) in [(step, -1.0 / 3.0), (0.5 * step, 4.0 / 3.0)] {
            let e = Point4::basis(m) * h;
            let plus = christoffel(g, &(*p + e), DEFAULT_STEP)?.symbols.coeffs;
            let minus = christoffel(g, &(*p - e), DEFAULT_STEP)?.symbols.coeffs;
            for k in 0..4 {
                for i in 0..4 {
                    for j in 0..4 {
                        d_gamma[m][k][i][j] +=
                            weight * (plus[k][i][j] - minus[k][i][j]) / (2.0 * h);
                    }
                }
            }
        }
    }
    let mut mixed = zero_tensor();
    for rho in 0..4 {
        for sigma in 0..4 {
            for mu in 0..4 {
                for nu in 0..4 {
                    let mut r = d_gamma[mu][rho][nu][sigma] - d_gamma[nu][rho][mu][sigma];
                    for l in 0..4 {
                        r += gamma[rho][mu][l] * gamma[l][nu][sigma]
                            - gamma[rho][nu][l] * gamma[l][mu][sigma];
                    }
                    mixed[rho][sigma][mu][nu] = r;
                }
            }
        }
    }
    let mut lowered = zero_tensor();
    for rho in 0..4 {
        for sigma in 0..4 {
            for mu in 0..4 {
                for nu in 0..4 {
                    lowered[rho][sigma][mu][nu] = (0..4)
                        .map(|l| metric[(rho, l)] * mixed[l][sigma][mu][nu])
                        .sum();
                }
            }
        }
    }
    Ok(Riemann {
        point: *p,
        metric,
        mixed,
        lowered,
    })
}

/// Maximum defect of each curvature-tensor identity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymmetryDefects {
    /// `R_{ρσμν} + R_{ρσνμ}`.
    pub last_pair_antisymmetry: f64,
    /// `R_{ρσμν} + R_{σρμν}`.
    pub first_pair_antisymmetry: f64,
    /// `R_{ρσμν} − R_{μνρσ}`.
    pub pair_symmetry: f64,
    /// `R_{ρσμν} + R_{ρμνσ} + R_{ρνσμ}`.
    pub first_bianchi: f64,
}

impl SymmetryDefects {
    pub fn max(&self) -> f64 {
        self.last_pair_antisymmetry
            .max(self.first_pair_antisymmetry)
            .max(self.pair_symmetry)
            .max(self.first_bianchi)
    }
}

impl Riemann {
    /// `R_{ρσμν} a^ρ b^σ c^μ d^ν`.
    pub fn apply(&self, a: &Point4, b: &Point4, c: &Point4, d: &Point4) -> f64 {
        let mut s = 0.0;
        for rho in 0..4 {
            for sigma in 0..4 {
                let ab = a[rho] * b[sigma];
                if ab == 0.0 {
                    continue;
                }
                for mu in 0..4 {
                    for nu in 0..4 {
                        s += self.lowered[rho][sigma][mu][nu] * ab * c[mu] * d[nu];
                    }
                }
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.lowered
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn symmetry_defects(&self) -> SymmetryDefects {
        let r = &self.lowered;
        let mut d = SymmetryDefects::default();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for e in 0..4 {
                        let v = r[a][b][c][e];
                        d.last_pair_antisymmetry =
                            d.last_pair_antisymmetry.max((v + r[a][b][e][c]).abs());
                        d.first_pair_antisymmetry =
                            d.first_pair_antisymmetry.max((v + r[b][a][c][e]).abs());
                        d.pair_symmetry = d.pair_symmetry.max((v - r[c][e][a][b]).abs());
                        d.first_bianchi = d
                            .first_bianchi
                            .max((v + r[a][c][e][b] + r[a][e][b][c]).abs());
                    }
                }
            }
        }
        d
    }

    /// Sectional curvature of `span(x, y)`.
    pub fn sectional(&self, x: &Point4, y: &Point4) -> Result<f64> {
        let g = &self.metric;
        let denominator = form_apply(g, x, x) * form_apply(g, y, y) - form_apply(g, x, y).powi(2);
        if denominator.abs() <= PLANE_THRESHOLD {
            return Err(GeomError::DegeneratePlane { denominator });
        }
        Ok(self.apply(x, y, x, y) / denominator)
    }
}

/// Holomorphic sectional curvature: sectional curvature of `span(ξ, Jξ)`.
pub fn hsc(g: &dyn MetricField, p: &Point4, xi: &Point4) -> Result<f64> {
    if xi.norm_sq() == 0.0 {
        return Err(GeomError::ZeroVelocity);
    }
    riemann(g, p, CURVATURE_STEP)?.sectional(xi, &xi.j())
}

/// Gauss curvature of the surface `(u, t) ↦ p + u·ξ + t·Jξ` with the induced
/// metric, by the Brioschi formula.
pub fn gauss_on_complex_line(
    g: &dyn MetricField,
    p: &Point4,
    xi: &Point4,
    step: f64,
) -> Result<f64> {
    let jxi = xi.j();
    let efg = |u: f64, t: f64| -> Result<[f64; 3]> {
        let form = g.evaluate(&(*p + *xi * u + jxi * t))?;
        Ok([
            form_apply(&form, xi, xi),
            form_apply(&form, xi, &jxi),
            form_apply(&form, &jxi, &jxi),
        ])
    };
    let h = step;
    let c = efg(0.0, 0.0)?;
    let (up, um) = (efg(h, 0.0)?, efg(-h, 0.0)?);
    let (tp, tm) = (efg(0.0, h)?, efg(0.0, -h)?);
    let (pp, pm, mp, mm) = (efg(h, h)?, efg(h, -h)?, efg(-h, h)?, efg(-h, -h)?);
    let du = |k: usize| (up[k] - um[k]) / (2.0 * h);
    let dt = |k: usize| (tp[k] - tm[k]) / (2.0 * h);
    let duu = |k: usize| (up[k] - 2.0 * c[k] + um[k]) / (h * h);
    let dtt = |k: usize| (tp[k] - 2.0 * c[k] + tm[k]) / (h * h);
    let dut = |k: usize| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h);
    let [e, f, gg] = c;
    let (e_u, e_t, f_u, f_t, g_u, g_t) = (du(0), dt(0), du(1), dt(1), du(2), dt(2));
    let (e_tt, f_ut, g_uu) = (dtt(0), dut(1), duu(2));

    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let first = det3([
        [-0.5 * e_tt + f_ut - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_t],
        [f_t - 0.5 * g_u, e, f],
        [0.5 * g_t, f, gg],
    ]);
    let second = det3([
        [0.0, 0.5 * e_t, 0.5 * g_u],
        [0.5 * e_t, e, f],
        [0.5 * g_u, f, gg],
    ]);
    let denominator = e * gg - f * f;
    if denominator.abs() <= PLANE_THRESHOLD {
        return Err(GeomError::DegeneratePlane { denominator });
    }
    Ok((first - second) / (denominator * denominator))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub point: Point4,
    pub direction: Point4,
    pub k: f64,
    /// Gauss curvature of the complex line through `point`; equals `k` when that line is totally geodesic.
    pub line_gauss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub max_dev: f64,
    pub seed: u64,
    #[serde(skip)]
    pub samples: Vec<CurvatureSample>,
}

impl ScanReport {
    /// `std / |mean|`, infinite when the mean vanishes with nonzero spread.
    pub fn relative_spread(&self) -> f64 {
        if self.std == 0.0 {
            0.0
        } else {
            self.std / self.mean.abs()
        }
    }

    /// Largest `|k − line_gauss|` over the samples.
    pub fn max_disagreement(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.k - s.line_gauss).abs())
            .fold(0.0, f64::max)
    }
}

/// Holomorphic sectional curvature at `n` seeded (point, direction) pairs.
pub fn hsc_constancy_scan(
    g: &dyn MetricField,
    region: &Region,
    n: usize,
    seed: u64,
) -> Result<ScanReport> {
    if n < 10 {
        return Err(GeomError::Precondition(format!(
            "scan needs n >= 10, got {n}"
        )));
    }
    let mut rng = sample::rng(seed);
    let draws: Vec<(Point4, Point4)> = (0..n)
        .map(|_| (region.sample(&mut rng), sample::unit_vector(&mut rng)))
        .collect();
    let samples = draws
        .par_iter()
        .map(|(p, xi)| {
            Ok(CurvatureSample {
                point: *p,
                direction: *xi,
                k: hsc(g, p, xi)?,
                line_gauss: gauss_on_complex_line(g, p, xi, CURVATURE_STEP)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = samples.iter().map(|s| s.k).sum::<f64>() / n as f64;
    let std = (samples.iter().map(|s| (s.k - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let max_dev = samples
        .iter()
        .map(|s| (s.k - mean).abs())
        .fold(0.0, f64::max);
    Ok(ScanReport {
        metric: g.name(),
        n,
        mean,
        std,
        max_dev,
        seed,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{fubini_metric, BallMetric, Euclidean, TestField};

    #[test]
    fn euclidean_is_flat() {
        let r = riemann(&Euclidean, &Point4::new(0.1, 0.2, 0.3, 0.4), CURVATURE_STEP).unwrap();
        assert!(r.max_abs() <= 1e-12);
        assert_eq!(
            hsc(&Euclidean, &Point4::ZERO, &Point4::basis(0)).unwrap(),
            0.0
        );
        assert_eq!(
            gauss_on_complex_line(&Euclidean, &Point4::ZERO, &Point4::basis(0), 1e-3).unwrap(),
            0.0
        );
    }

    #[test]
    fn tensor_symmetries() {
        let mut rng = sample::rng(70);
        let fields: [&dyn MetricField; 4] = [
            &fubini_metric(1.0),
            &fubini_metric(-1.0),
            &TestField::Generic,
            &TestField::Perturbed,
        ];
        for g in fields {
            for _ in 0..20 {
                let p = g.sample_region().sample(&mut rng) * 0.8;
                let d = riemann(g, &p, CURVATURE_STEP).unwrap().symmetry_defects();
                assert!(d.first_bianchi <= 1e-6, "{} {d:?}", g.name());
                assert!(d.last_pair_antisymmetry <= 1e-8, "{} {d:?}", g.name());
                assert!(d.max() <= 1e-6, "{} {d:?}", g.name());
            }
        }
    }

    #[test]
    fn fubini_value_is_four_times_sign() {
        // rescaling z by sqrt|α| maps every Fubini field to the α = ±1 one,
        // whose holomorphic sectional curvature in this normalization is ±4
        let mut rng = sample::rng(71);
        for alpha in [1.0, 0.5, -1.0, -0.5] {
            let g = fubini_metric(alpha);
            for _ in 0..10 {
                let p = g.sample_region().sample(&mut rng);
                let xi = sample::unit_vector(&mut rng);
                let k = hsc(&g, &p, &xi).unwrap();
                assert!((k - 4.0 * alpha.signum()).abs() <= 4e-4, "α={alpha} K={k}");
            }
        }
    }

    #[test]
    fn invariance_under_direction_changes() {
        let g = fubini_metric(-0.5);
        let p = Point4::new(0.2, 0.1, -0.3, 0.4);
        let xi = Point4::new(0.3, -0.7, 0.2, 0.5);
        let k = hsc(&g, &p, &xi).unwrap();
        assert!((hsc(&g, &p, &(xi * -3.5)).unwrap() - k).abs() <= 1e-6);
        assert!((hsc(&g, &p, &xi.j()).unwrap() - k).abs() <= 1e-6);

        let g = TestField::Generic;
        let k = hsc(&g, &p, &xi).unwrap();
        assert!((hsc(&g, &p, &(xi * 2.0)).unwrap() - k).abs() <= 1e-6);
    }

    #[test]
    fn gauss_cross_check() {
        for alpha in [1.0, -1.0] {
            let g = fubini_metric(alpha);
            for xi in [Point4::basis(0), Point4::basis(2)] {
                let k = hsc(&g, &Point4::ZERO, &xi).unwrap();
                let gauss = gauss_on_complex_line(&g, &Point4::ZERO, &xi, CURVATURE_STEP).unwrap();
                assert!((k - gauss).abs() <= 1e-4);
            }
        }
    }

    #[test]
    fn scans() {
        let flat = hsc_constancy_scan(&Euclidean, &Region::ball(1.0), 20, 1).unwrap();
        assert_eq!(flat.mean, 0.0);
        assert!(flat.max_dev <= 1e-10);

        let up = hsc_constancy_scan(&fubini_metric(1.0), &Region::ball(1.0), 50, 2).unwrap();
        let down = hsc_constancy_scan(&fubini_metric(-1.0), &Region::ball(0.5), 50, 2).unwrap();
        assert!(up.relative_spread() <= 1e-4 && down.relative_spread() <= 1e-4);
        assert!(down.mean < 0.0);
        assert!((down.mean + up.mean).abs() <= 1e-4 * up.mean.abs());
        assert!(up.max_disagreement() <= 1e-4 && down.max_disagreement() <= 1e-4);

        let bent = hsc_constancy_scan(&TestField::Perturbed, &Region::ball(1.0), 50, 2).unwrap();
        assert!(bent.relative_spread() >= 1e-2, "{}", bent.relative_spread());

        assert!(matches!(
            hsc_constancy_scan(&Euclidean, &Region::ball(1.0), 5, 1),
            Err(GeomError::Precondition(_))
        ));
    }

    #[test]
    fn ball_interior_matches_fubini_minus_one() {
        let k = hsc(
            &BallMetric::interior(),
            &Point4::new(0.1, 0.3, 0.2, 0.0),
            &Point4::basis(1),
        )
        .unwrap();
        assert!((k + 4.0).abs() <= 4e-4);
    }

    #[test]
    fn scan_json_keys() {
        let s = hsc_constancy_scan(&Euclidean, &Region::ball(1.0), 10, 3).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["max_dev", "mean", "metric", "n", "seed", "std"]);
    }
}
