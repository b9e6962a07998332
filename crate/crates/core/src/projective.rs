//! Complex projective transformations of the affine chart `C² ⊂ CP²`.

use nalgebra::{Matrix3, Matrix4, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circles::{fit_circle, CircleFit};
use crate::error::{GeomError, Result};
use crate::forms::BilinearMap;
use crate::quaternion::{ComplexFunctional, Point4, RealLinearFunctional};

/// Minimum distance of sampled points from a map's singular hyperplane.
pub const HYPERPLANE_MARGIN: f64 = 1e-6;

pub const DEFAULT_JET_STEP: f64 = 1e-3;

const SINGULARITY_RATIO: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A nonsingular 3×3 complex matrix acting on `(z1, z2)` through `[z1, z2, 1]`,
/// stored with unit Frobenius norm and positive real leading entry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[Complex64; 9]", try_from = "[Complex64; 9]")]
pub struct ProjectiveMap {
    matrix: Matrix3<Complex64>,
}

impl From<ProjectiveMap> for [Complex64; 9] {
    fn from(m: ProjectiveMap) -> Self {
        std::array::from_fn(|k| m.matrix[(k / 3, k % 3)])
    }
}

impl TryFrom<[Complex64; 9]> for ProjectiveMap {
    type Error = GeomError;

    fn try_from(entries: [Complex64; 9]) -> Result<Self> {
        ProjectiveMap::new(Matrix3::from_row_slice(&entries))
    }
}

impl ProjectiveMap {
    pub fn new(matrix: Matrix3<Complex64>) -> Result<Self> {
        let frob = matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let det = matrix.determinant();
        if !(frob > 0.0) || det.norm() < SINGULARITY_RATIO * frob.powi(3) {
            return Err(GeomError::SingularMatrix { det: det.norm() });
        }
        let mut m = matrix / c(frob);
        let lead = (0..9)
            .map(|k| m[(k / 3, k % 3)])
            .find(|z| z.norm() > 1e-15)
            .expect("nonzero matrix");
        m *= lead.conj() / lead.norm();
        Ok(ProjectiveMap { matrix: m })
    }

    pub fn identity() -> Self {
        ProjectiveMap::new(Matrix3::identity()).expect("identity is nonsingular")
    }

    /// Translation `x ↦ x + p`.
    pub fn translation(p: &Point4) -> Self {
        let [p1, p2] = p.complex();
        let mut m = Matrix3::identity();
        m[(0, 2)] = p1;
        m[(1, 2)] = p2;
        ProjectiveMap::new(m).expect("translations are nonsingular")
    }

    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.matrix
    }

    /// Euclidean distance from `x` to `{x : last homogeneous image coordinate = 0}`.
    pub fn singular_distance(&self, x: &Point4) -> f64 {
        let [z1, z2] = x.complex();
        let (a, b, d) = (
            self.matrix[(2, 0)],
            self.matrix[(2, 1)],
            self.matrix[(2, 2)],
        );
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if n == 0.0 {
            return f64::INFINITY;
        }
        (a * z1 + b * z2 + d).norm() / n
    }

    pub fn apply(&self, x: &Point4) -> Result<Point4> {
        let [z1, z2] = x.complex();
        let h = self.matrix * Vector3::new(z1, z2, c(1.0));
        let out = Point4::from_complex(h[0] / h[2], h[1] / h[2]);
        if h[2].norm() == 0.0 || !out.is_finite() {
            return Err(GeomError::SingularHyperplane {
                point: *x,
                distance: self.singular_distance(x),
            });
        }
        Ok(out)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ProjectiveMap) -> ProjectiveMap {
        ProjectiveMap::new(self.matrix * other.matrix).expect("product of nonsingular maps")
    }

    pub fn inverse(&self) -> ProjectiveMap {
        let inv = self
            .matrix
            .try_inverse()
            .expect("stored maps are nonsingular");
        ProjectiveMap::new(inv).expect("inverse of a nonsingular map")
    }

    pub fn max_entry_diff(&self, other: &ProjectiveMap) -> f64 {
        (self.matrix - other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Which side the scalar `(1 − ½A(x))⁻¹` multiplies from. Both give the same
/// action on C² since the factor is complex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Left,
    Right,
}

/// The projective map `x ↦ p + (1 − ½A(x))⁻¹·x`.
pub fn rectifier(p: &Point4, a: &ComplexFunctional, _side: Side) -> ProjectiveMap {
    let mut n = Matrix3::identity();
    n[(2, 0)] = -0.5 * a.c1;
    n[(2, 1)] = -0.5 * a.c2;
    let t = ProjectiveMap::translation(p);
    ProjectiveMap::new(t.matrix * n).expect("rectifiers are unimodular up to scale")
}

/// As [`rectifier`], for a functional that must be complex linear within `tol`.
pub fn rectifier_from_real(
    p: &Point4,
    a: &RealLinearFunctional,
    side: Side,
    tol: f64,
) -> Result<ProjectiveMap> {
    let defect = a.complex_linearity_defect();
    if defect > tol {
        return Err(GeomError::NotComplexLinear { defect });
    }
    Ok(rectifier(p, &a.complex_part(), side))
}

/// First and second differentials of a map at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    /// Column `i` is `∂F/∂x_i`.
    pub linear: Matrix4<f64>,
    /// `coeffs[k][i][j] = ∂_i ∂_j F_k`.
    pub quadratic: BilinearMap,
}

impl Jet2 {
    pub fn max_abs_diff(&self, other: &Jet2) -> f64 {
        let lin = (self.linear - other.linear).abs().max();
        lin.max(self.quadratic.max_abs_diff(&other.quadratic))
    }
}

fn difference_jet(f: &dyn Fn(&Point4) -> Result<Point4>, base: &Point4, h: f64) -> Result<Jet2> {
    let e = |i: usize| Point4::basis(i) * h;
    let f0 = f(base)?;
    let mut linear = Matrix4::zeros();
    let mut quadratic = BilinearMap::zero();
    let mut plus = [Point4::ZERO; 4];
    let mut minus = [Point4::ZERO; 4];
    for i in 0..4 {
        plus[i] = f(&(*base + e(i)))?;
        minus[i] = f(&(*base - e(i)))?;
        let d1 = (plus[i] - minus[i]) * (0.5 / h);
        let d2 = (plus[i] - f0 * 2.0 + minus[i]) * (1.0 / (h * h));
        for k in 0..4 {
            linear[(k, i)] = d1[k];
            quadratic.coeffs[k][i][i] = d2[k];
        }
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            let pp = f(&(*base + e(i) + e(j)))?;
            let pm = f(&(*base + e(i) - e(j)))?;
            let mp = f(&(*base - e(i) + e(j)))?;
            let mm = f(&(*base - e(i) - e(j)))?;
            let d = (pp - pm - mp + mm) * (0.25 / (h * h));
            for k in 0..4 {
                quadratic.coeffs[k][i][j] = d[k];
                quadratic.coeffs[k][j][i] = d[k];
            }
        }
    }
    Ok(Jet2 { linear, quadratic })
}

/// Central-difference 2-jet with one Richardson extrapolation (`step`, `step/2`).
pub fn jet2_of_map(
    f: impl Fn(&Point4) -> Result<Point4>,
    base: &Point4,
    step: f64,
) -> Result<Jet2> {
    let coarse = difference_jet(&f, base, step)?;
    let fine = difference_jet(&f, base, 0.5 * step)?;
    let mut quadratic = BilinearMap::zero();
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                quadratic.coeffs[k][i][j] =
                    (4.0 * fine.quadratic.coeffs[k][i][j] - coarse.quadratic.coeffs[k][i][j]) / 3.0;
            }
        }
    }
    Ok(Jet2 {
        linear: (fine.linear * 4.0 - coarse.linear) / 3.0,
        quadratic,
    })
}

/// `F(q + t·dir)` for `n` values of `t` evenly spaced in `[−t_max, t_max]`.
pub fn image_points(
    f: &ProjectiveMap,
    q: &Point4,
    dir: &Point4,
    t_max: f64,
    n: usize,
) -> Result<Vec<Point4>> {
    (0..n)
        .map(|k| {
            let t = -t_max + 2.0 * t_max * k as f64 / (n.max(2) - 1) as f64;
            let x = *q + *dir * t;
            let distance = f.singular_distance(&x);
            if distance < HYPERPLANE_MARGIN {
                return Err(GeomError::SingularHyperplane { point: x, distance });
            }
            f.apply(&x)
        })
        .collect()
}

/// Circle fit of the image of a line segment.
pub fn image_of_line(
    f: &ProjectiveMap,
    q: &Point4,
    dir: &Point4,
    t_max: f64,
    n: usize,
) -> Result<CircleFit> {
    fit_circle(&image_points(f, q, dir, t_max, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circles::{complex_line_defect_points, CurveKind};
    use crate::connection::{christoffel, extract_l, geodesic};
    use crate::metrics::{fubini_metric, MetricField};
    use crate::sample;

    fn z1_functional() -> ComplexFunctional {
        ComplexFunctional::new(c(1.0), c(0.0))
    }

    fn random_functional(rng: &mut sample::SeededRng, scale: f64) -> ComplexFunctional {
        let mut z = || Complex64::new(sample::normal(rng), sample::normal(rng)) * scale;
        ComplexFunctional::new(z(), z())
    }

    fn expected_jet(l: &ComplexFunctional) -> Jet2 {
        Jet2 {
            linear: Matrix4::identity(),
            quadratic: BilinearMap::from_quadratic(|x| x.scale_complex(l.eval(x))),
        }
    }

    #[test]
    fn zero_functional_gives_translation() {
        let p = Point4::new(0.5, -1.0, 0.25, 2.0);
        let r = rectifier(&p, &ComplexFunctional::zero(), Side::Left);
        assert!(r.max_entry_diff(&ProjectiveMap::translation(&p)) < 1e-15);
        let x = Point4::new(0.1, 0.2, 0.3, 0.4);
        assert!((r.apply(&x).unwrap() - (x + p)).norm() < 1e-15);
    }

    #[test]
    fn hand_evaluated_rectifier() {
        let r = rectifier(&Point4::ZERO, &z1_functional(), Side::Left);
        for eps in [1e-3, 0.1, 0.5] {
            let y = r.apply(&Point4::new(eps, 0.0, 0.0, 0.0)).unwrap();
            assert!((y - Point4::new(eps / (1.0 - eps / 2.0), 0.0, 0.0, 0.0)).norm() < 1e-15);
        }
        let right = rectifier(&Point4::ZERO, &z1_functional(), Side::Right);
        assert_eq!(r, right);
    }

    #[test]
    fn canonical_scaling() {
        let m = Matrix3::from_fn(|i, j| {
            Complex64::new(((i + 1) * (j + 2) % 5) as f64 - 1.5, (i * i + j) as f64)
        });
        let a = ProjectiveMap::new(m).unwrap();
        let b = ProjectiveMap::new(m * Complex64::new(-2.0, 3.0)).unwrap();
        assert!(a.max_entry_diff(&b) < 1e-15);
        let frob: f64 = a.matrix().iter().map(|z| z.norm_sqr()).sum();
        assert!((frob - 1.0).abs() < 1e-15);
        let lead = a.matrix()[(0, 0)];
        assert!(lead.im == 0.0 && lead.re > 0.0);
    }

    #[test]
    fn singular_matrix_rejected() {
        let m = Matrix3::from_fn(|i, _| c(i as f64 + 1.0));
        assert!(matches!(
            ProjectiveMap::new(m),
            Err(GeomError::SingularMatrix { .. })
        ));
    }

    #[test]
    fn non_complex_linear_rejected() {
        let conj = RealLinearFunctional {
            re: [1.0, 0.0, 0.0, 0.0],
            im: [0.0, -1.0, 0.0, 0.0],
        };
        assert!(matches!(
            rectifier_from_real(&Point4::ZERO, &conj, Side::Left, 1e-9),
            Err(GeomError::NotComplexLinear { .. })
        ));
        let ok = rectifier_from_real(
            &Point4::ZERO,
            &z1_functional().to_real_linear(),
            Side::Left,
            1e-9,
        )
        .unwrap();
        assert_eq!(ok, rectifier(&Point4::ZERO, &z1_functional(), Side::Left));
    }

    #[test]
    fn identity_jet() {
        let jet = jet2_of_map(
            |x| Ok(*x),
            &Point4::new(0.3, 0.1, -0.2, 0.5),
            DEFAULT_JET_STEP,
        )
        .unwrap();
        assert!(
            jet.max_abs_diff(&Jet2 {
                linear: Matrix4::identity(),
                quadratic: BilinearMap::zero()
            }) < 1e-9
        );
    }

    #[test]
    fn rectifier_jet_examples() {
        let l = z1_functional();
        let r = rectifier(&Point4::ZERO, &l, Side::Left);
        let jet = jet2_of_map(|x| r.apply(x), &Point4::ZERO, DEFAULT_JET_STEP).unwrap();
        assert!(jet.max_abs_diff(&expected_jet(&l)) <= 1e-7);

        let quadratic_map = |x: &Point4| Ok(*x + x.scale_complex(l.eval(x)) * 0.5);
        let qjet = jet2_of_map(quadratic_map, &Point4::ZERO, DEFAULT_JET_STEP).unwrap();
        assert!(qjet.max_abs_diff(&jet) <= 1e-7);
    }

    #[test]
    fn rectifier_jets_at_random_points() {
        let mut rng = sample::rng(50);
        for _ in 0..50 {
            let p = sample::gaussian_point(&mut rng);
            let l = random_functional(&mut rng, 1.0);
            let r = rectifier(&p, &l, Side::Left);
            let jet = jet2_of_map(
                |x| r.apply(x).map(|y| y - p),
                &Point4::ZERO,
                DEFAULT_JET_STEP,
            )
            .unwrap();
            assert!(jet.max_abs_diff(&expected_jet(&l)) <= 1e-7);
        }
    }

    #[test]
    fn group_laws() {
        let mut rng = sample::rng(51);
        for _ in 0..20 {
            let a = rectifier(
                &sample::gaussian_point(&mut rng),
                &random_functional(&mut rng, 0.5),
                Side::Left,
            );
            let b = rectifier(
                &sample::gaussian_point(&mut rng),
                &random_functional(&mut rng, 0.5),
                Side::Left,
            );
            let ab = a.compose(&b);
            let x = sample::gaussian_point(&mut rng) * 0.1;
            if b.singular_distance(&x) < 1e-2 {
                continue;
            }
            let y = b.apply(&x).unwrap();
            if a.singular_distance(&y) < 1e-2 {
                continue;
            }
            let direct = a.apply(&y).unwrap();
            assert!((ab.apply(&x).unwrap() - direct).norm() <= 1e-12 * direct.norm().max(1.0));
            let back = b.inverse().apply(&y).unwrap();
            assert!((back - x).norm() <= 1e-12);
        }
    }

    #[test]
    fn line_images() {
        let id = ProjectiveMap::identity();
        let fit = image_of_line(
            &id,
            &Point4::ZERO,
            &Point4::new(1.0, 2.0, 0.0, -1.0),
            1.0,
            64,
        )
        .unwrap();
        assert_eq!(fit.kind, CurveKind::Line);

        let r = rectifier(&Point4::ZERO, &z1_functional(), Side::Left);
        let mut rng = sample::rng(52);
        for _ in 0..20 {
            let dir = sample::unit_vector(&mut rng);
            let fit = image_of_line(&r, &Point4::ZERO, &dir, 1.0, 64).unwrap();
            assert!(fit.relative_residual <= 1e-8);
        }
    }

    #[test]
    fn singular_hyperplane_is_avoided() {
        let r = rectifier(&Point4::ZERO, &z1_functional(), Side::Left);
        // 1 − z1/2 vanishes at z1 = 2
        let err = image_of_line(&r, &Point4::ZERO, &Point4::basis(0), 2.0, 65).unwrap_err();
        assert!(matches!(err, GeomError::SingularHyperplane { .. }));
    }

    #[test]
    fn complex_lines_map_to_complex_lines() {
        let mut rng = sample::rng(53);
        for _ in 0..20 {
            let p = sample::gaussian_point(&mut rng);
            let r = rectifier(&p, &random_functional(&mut rng, 0.5), Side::Left);
            let u = sample::unit_vector(&mut rng);
            let pts: Vec<Point4> = (0..32)
                .map(|k| {
                    let c = Complex64::from_polar(0.3 * (k as f64 + 1.0) / 32.0, 0.7 * k as f64);
                    r.apply(&u.scale_complex(c)).unwrap()
                })
                .collect();
            assert!(complex_line_defect_points(&pts, &p, &(pts[0] - p)) <= 1e-9);
        }
    }

    #[test]
    fn rectifier_image_matches_geodesic() {
        let g = fubini_metric(1.0);
        let mut rng = sample::rng(54);
        for _ in 0..5 {
            let p = g.sample_region().sample(&mut rng);
            let v = sample::unit_vector(&mut rng) * 0.5;
            let l = extract_l(&christoffel(&g, &p, 1e-4).unwrap(), 1e-6);
            // exp_p(x) = p + x + ½A(x)x with A = −L
            let a = l.complex_functional().scale(c(-1.0));
            let image =
                image_of_line(&rectifier(&p, &a, Side::Left), &Point4::ZERO, &v, 0.5, 256).unwrap();
            let geo = fit_circle(&geodesic(&g, &p, &v, 1.0, 2048).unwrap().points).unwrap();
            let (ci, cg) = (image.center.unwrap(), geo.center.unwrap());
            let (ri, rg) = (image.radius.unwrap(), geo.radius.unwrap());
            assert!(ci.distance(&cg) <= 1e-5 * rg);
            assert!((ri / rg - 1.0).abs() <= 1e-5);
        }
    }

    #[test]
    fn json_is_nine_complex_pairs() {
        let r = rectifier(
            &Point4::new(1.0, 0.0, 0.0, 0.5),
            &z1_functional(),
            Side::Left,
        );
        let json = serde_json::to_value(r).unwrap();
        let arr = json.as_array().unwrap();
        assert_eq!(arr.len(), 9);
        assert!(arr.iter().all(|e| e.as_array().unwrap().len() == 2));
        let back: ProjectiveMap = serde_json::from_value(json).unwrap();
        assert!(back.max_entry_diff(&r) < 1e-15);
    }
}
