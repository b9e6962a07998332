//! Complete complex families of circles: suspensions of planar families and
//! the exterior-ball family.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::connection::{geodesic, Trajectory};
use crate::error::{GeomError, Result};
use crate::metrics::{BallMetric, EXTERIOR_MARGIN};
use crate::projective::ProjectiveMap;
use crate::quaternion::Point4;

const VERTICAL_TOLERANCE: f64 = 1e-14;

/// A line or circle in C.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PlanarCurve {
    Line {
        point: Complex64,
        direction: Complex64,
    },
    Circle {
        center: Complex64,
        radius: f64,
    },
}

impl PlanarCurve {
    /// Point at signed arc length `s` from the point of the curve nearest `z0`.
    pub fn at(&self, z0: Complex64, s: f64) -> Complex64 {
        match *self {
            PlanarCurve::Line { point, direction } => {
                let u = direction / direction.norm();
                let t0 = ((z0 - point) * u.conj()).re;
                point + u * (t0 + s)
            }
            PlanarCurve::Circle { center, radius } => {
                let phi0 = (z0 - center).arg();
                center + Complex64::from_polar(radius, phi0 + s / radius)
            }
        }
    }

    /// Unit tangent at the point nearest `z`, oriented by increasing arc length.
    pub fn tangent(&self, z: Complex64) -> Complex64 {
        match *self {
            PlanarCurve::Line { direction, .. } => direction / direction.norm(),
            PlanarCurve::Circle { center, .. } => {
                let r = z - center;
                Complex64::i() * r / r.norm()
            }
        }
    }

    pub fn distance(&self, z: Complex64) -> f64 {
        match *self {
            PlanarCurve::Line { point, direction } => {
                let u = direction / direction.norm();
                ((z - point) * u.conj()).im.abs()
            }
            PlanarCurve::Circle { center, radius } => ((z - center).norm() - radius).abs(),
        }
    }

    /// Distance from `z0` plus `|sin|` of the angle between the tangent and `theta`.
    pub fn tangency_defect(&self, z0: Complex64, theta: Complex64) -> f64 {
        let t = self.tangent(z0);
        let sin = (t.conj() * theta / theta.norm()).im.abs();
        self.distance(z0) + sin
    }
}

/// `z ↦ (a1·z + b1)/(a2·z + b2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a1: Complex64,
    pub b1: Complex64,
    pub a2: Complex64,
    pub b2: Complex64,
}

impl Mobius {
    pub fn identity() -> Self {
        Mobius {
            a1: Complex64::new(1.0, 0.0),
            b1: Complex64::new(0.0, 0.0),
            a2: Complex64::new(0.0, 0.0),
            b2: Complex64::new(1.0, 0.0),
        }
    }

    pub fn numerator(&self, z: Complex64) -> Complex64 {
        self.a1 * z + self.b1
    }

    pub fn denominator(&self, z: Complex64) -> Complex64 {
        self.a2 * z + self.b2
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.numerator(z) / self.denominator(z)
    }
}

/// A family of circles in a domain of C with one curve per point and direction.
pub trait PlanarFamily: Send + Sync + std::fmt::Debug {
    fn name(&self) -> String;

    fn contains(&self, z: Complex64) -> bool;

    /// The curve through `z0` tangent to `theta`.
    fn curve(&self, z0: Complex64, theta: Complex64) -> Result<PlanarCurve>;

    /// A Möbius map straightening every family curve through `z0`.
    fn rectifier(&self, z0: Complex64) -> Result<Mobius>;

    /// Draws a random point of the domain.
    fn sample_point(&self, rng: &mut crate::sample::SeededRng) -> Complex64;

    /// `n` points of the curve through `z0`, spaced by arc length symmetrically
    /// about `z0`, shrunk until all lie in the domain.
    fn sample_curve(
        &self,
        z0: Complex64,
        theta: Complex64,
        n: usize,
        extent: f64,
    ) -> Result<Vec<Complex64>> {
        Ok(self.sample_arc(z0, theta, n, extent)?.points)
    }

    /// As [`PlanarFamily::sample_curve`], with arc-length parameters and unit velocities.
    fn sample_arc(
        &self,
        z0: Complex64,
        theta: Complex64,
        n: usize,
        extent: f64,
    ) -> Result<PlanarArc> {
        let curve = self.curve(z0, theta)?;
        let orient = if (curve.tangent(z0).conj() * theta).re < 0.0 {
            -1.0
        } else {
            1.0
        };
        let mut e = extent;
        for _ in 0..60 {
            let params: Vec<f64> = (0..n)
                .map(|k| -e + 2.0 * e * k as f64 / (n.max(2) - 1) as f64)
                .collect();
            let points: Vec<Complex64> = params.iter().map(|s| curve.at(z0, orient * s)).collect();
            if points.iter().all(|z| self.contains(*z)) {
                let velocities = points.iter().map(|z| curve.tangent(*z) * orient).collect();
                return Ok(PlanarArc {
                    params,
                    points,
                    velocities,
                });
            }
            e *= 0.5;
        }
        Err(GeomError::Sampling(format!(
            "no in-domain arc through {z0}"
        )))
    }
}

/// A sampled arc of a planar curve, parametrized by arc length.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarArc {
    pub params: Vec<f64>,
    pub points: Vec<Complex64>,
    pub velocities: Vec<Complex64>,
}

/// Geodesics of the Poincaré upper half-plane.
#[derive(Clone, Copy, Debug, Default)]
pub struct PoincareFamily;

pub fn poincare_family() -> PoincareFamily {
    PoincareFamily
}

impl PlanarFamily for PoincareFamily {
    fn name(&self) -> String {
        "poincare".into()
    }

    fn contains(&self, z: Complex64) -> bool {
        z.im > 0.0
    }

    fn curve(&self, z0: Complex64, theta: Complex64) -> Result<PlanarCurve> {
        if !self.contains(z0) {
            return Err(GeomError::Domain {
                field: self.name(),
                constraint: "Im z > 0".into(),
                point: Point4::from_complex(z0, Complex64::new(0.0, 0.0)),
            });
        }
        if theta.norm() == 0.0 {
            return Err(GeomError::ZeroVelocity);
        }
        if theta.re.abs() <= VERTICAL_TOLERANCE * theta.norm() {
            return Ok(PlanarCurve::Line {
                point: z0,
                direction: Complex64::i(),
            });
        }
        let center = Complex64::new(z0.re + z0.im * theta.im / theta.re, 0.0);
        Ok(PlanarCurve::Circle {
            center,
            radius: (z0 - center).norm(),
        })
    }

    fn rectifier(&self, z0: Complex64) -> Result<Mobius> {
        self.curve(z0, Complex64::i())?;
        Ok(Mobius {
            a1: Complex64::new(0.0, 0.0),
            b1: Complex64::new(1.0, 0.0),
            a2: Complex64::new(1.0, 0.0),
            b2: -z0.conj(),
        })
    }

    fn sample_point(&self, rng: &mut crate::sample::SeededRng) -> Complex64 {
        use crate::sample::uniform;
        Complex64::new(uniform(rng, -2.0, 2.0), uniform(rng, 0.2, 3.0))
    }
}

/// A curve of a suspension family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SuspensionCurve {
    /// A real line inside a vertical complex line `z = const`.
    Vertical { point: Point4, direction: Point4 },
    /// Preimage of a base curve under the projection of the complex line
    /// `w = w0 + (z − z0)·slope` onto the `z` axis.
    Lifted {
        base: PlanarCurve,
        z0: Complex64,
        w0: Complex64,
        slope: Complex64,
    },
}

/// The suspension of a planar family to `U × C`.
#[derive(Clone, Debug)]
pub struct Suspension<F: PlanarFamily> {
    pub base: F,
}

pub fn suspend<F: PlanarFamily>(base: F) -> Suspension<F> {
    Suspension { base }
}

impl<F: PlanarFamily> Suspension<F> {
    pub fn name(&self) -> String {
        format!("suspension:{}", self.base.name())
    }

    fn check(&self, a: &Point4) -> Result<()> {
        if self.base.contains(a.z1()) {
            Ok(())
        } else {
            Err(GeomError::Domain {
                field: self.name(),
                constraint: "z in the base domain".into(),
                point: *a,
            })
        }
    }

    pub fn sample_point(&self, rng: &mut crate::sample::SeededRng) -> Point4 {
        let z = self.base.sample_point(rng);
        let w = Complex64::new(crate::sample::normal(rng), crate::sample::normal(rng));
        Point4::from_complex(z, w)
    }

    pub fn curve(&self, a: &Point4, dir: &Point4) -> Result<SuspensionCurve> {
        self.check(a)?;
        if dir.norm() == 0.0 {
            return Err(GeomError::ZeroVelocity);
        }
        let [dz, dw] = dir.complex();
        if dz.norm() <= VERTICAL_TOLERANCE * dir.norm() {
            return Ok(SuspensionCurve::Vertical {
                point: *a,
                direction: *dir,
            });
        }
        Ok(SuspensionCurve::Lifted {
            base: self.base.curve(a.z1(), dz / dz.norm())?,
            z0: a.z1(),
            w0: a.z2(),
            slope: dw / dz,
        })
    }

    /// `n` points of the curve through `a` in direction `dir`.
    pub fn sample_curve(
        &self,
        a: &Point4,
        dir: &Point4,
        n: usize,
        extent: f64,
    ) -> Result<Vec<Point4>> {
        Ok(self.sample_trajectory(a, dir, n, extent)?.points)
    }

    /// The curve through `a` as a trajectory in its arc-length parameter
    /// (of the base curve for lifted curves), with `a` at the middle sample.
    pub fn sample_trajectory(
        &self,
        a: &Point4,
        dir: &Point4,
        n: usize,
        extent: f64,
    ) -> Result<Trajectory> {
        let (times, points, velocities) = match self.curve(a, dir)? {
            SuspensionCurve::Vertical { point, direction } => {
                let u = direction.normalized();
                let times: Vec<f64> = (0..n)
                    .map(|k| -extent + 2.0 * extent * k as f64 / (n.max(2) - 1) as f64)
                    .collect();
                let points = times.iter().map(|t| point + u * *t).collect();
                (times, points, vec![u; n])
            }
            SuspensionCurve::Lifted { z0, w0, slope, .. } => {
                let [dz, _] = dir.complex();
                let arc = self.base.sample_arc(z0, dz, n, extent)?;
                let points = arc
                    .points
                    .iter()
                    .map(|z| Point4::from_complex(*z, w0 + (z - z0) * slope))
                    .collect();
                let velocities = arc
                    .velocities
                    .iter()
                    .map(|t| Point4::from_complex(*t, t * slope))
                    .collect();
                (arc.params, points, velocities)
            }
        };
        Ok(Trajectory {
            metric: self.name(),
            initial_point: *a,
            initial_velocity: *dir,
            times,
            points,
            velocities,
        })
    }

    /// Distance of `a` from the curve plus `|sin|` of the angle between its tangent and `dir`.
    pub fn tangency_defect(&self, a: &Point4, dir: &Point4) -> Result<f64> {
        Ok(match self.curve(a, dir)? {
            SuspensionCurve::Vertical { .. } => 0.0,
            SuspensionCurve::Lifted {
                base,
                z0,
                w0,
                slope,
                ..
            } => {
                let t = base.tangent(z0);
                let lifted_tangent = Point4::from_complex(t, t * slope).normalized();
                let d = dir.normalized();
                let sin = (d - lifted_tangent * d.dot(&lifted_tangent)).norm();
                let on_line = (a.z2() - w0).norm();
                base.distance(a.z1()) + on_line + sin
            }
        })
    }

    /// `(z, w) ↦ (P(z), w/L2(z))` for the base rectifier `P = L1/L2` at `z(a)`.
    pub fn rectifier(&self, a: &Point4) -> Result<ProjectiveMap> {
        self.check(a)?;
        let p = self.base.rectifier(a.z1())?;
        if p.denominator(a.z1()).norm() < 1e-12 {
            return Err(GeomError::SingularLocus {
                field: self.name(),
                locus: "L2(z) = 0".into(),
                point: *a,
            });
        }
        Ok(suspension_rectifier(&p)?)
    }
}

/// Projective matrix of `(z, w) ↦ (L1(z)/L2(z), w/L2(z))`.
pub fn suspension_rectifier(p: &Mobius) -> Result<ProjectiveMap> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    ProjectiveMap::new(nalgebra::Matrix3::new(
        p.a1, zero, p.b1, //
        zero, one, zero, //
        p.a2, zero, p.b2,
    ))
}

/// A geodesic of the indefinite metric on the exterior of the unit ball.
pub fn exterior_ball_curve(p: &Point4, v: &Point4, t_end: f64, n: usize) -> Result<Trajectory> {
    if p.norm_sq() <= 1.0 + EXTERIOR_MARGIN {
        return Err(GeomError::Domain {
            field: "ball-exterior".into(),
            constraint: "|z|^2 > 1 + 1e-6".into(),
            point: *p,
        });
    }
    geodesic(&BallMetric::exterior(), p, v, t_end, n)
}
