//! Metric fields on open subsets of C² and the Hermitian/Kähler tests.
//!
//! Every field is presented as a real 4×4 symmetric form so that
//! non-Hermitian counterexamples are expressible; being Hermitian is then a
//! property to check, not an assumption of the representation.

use std::fmt;
use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{GeomError, Result};
use crate::forms::{form_apply, real_form, Form};
use crate::quaternion::Point4;
use crate::sample::Region;

/// Default central-difference step for first derivatives.
pub const DEFAULT_STEP: f64 = 1e-4;

pub trait MetricField: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn check_domain(&self, p: &Point4) -> Result<()>;

    fn in_domain(&self, p: &Point4) -> bool {
        self.check_domain(p).is_ok()
    }

    /// The bilinear form `g_p`.
    fn evaluate(&self, p: &Point4) -> Result<Form>;

    /// Exact partial derivatives `∂g/∂x_m`, when the field knows them.
    fn derivatives(&self, _p: &Point4) -> Option<Result<[Form; 4]>> {
        None
    }

    /// Signature parameter of Fubini fields.
    fn alpha(&self) -> Option<f64> {
        None
    }

    fn positive_definite_claimed(&self) -> bool;

    /// Named base point of the domain, used for normalizations.
    fn base_point(&self) -> Point4 {
        Point4::ZERO
    }

    /// Where seeded verification samples are drawn from.
    fn sample_region(&self) -> Region;
}

pub type SharedMetric = Arc<dyn MetricField>;

/// Partial derivatives of the form, exact when available, otherwise by
/// central differences with the given step.
pub fn form_derivatives(g: &dyn MetricField, p: &Point4, step: f64) -> Result<[Form; 4]> {
    if let Some(exact) = g.derivatives(p) {
        return exact;
    }
    let mut out = [Form::zeros(); 4];
    for (m, d) in out.iter_mut().enumerate() {
        let e = Point4::basis(m) * step;
        let plus = g.evaluate(&(*p + e))?;
        let minus = g.evaluate(&(*p - e))?;
        *d = (plus - minus) / (2.0 * step);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Euclidean;

impl MetricField for Euclidean {
    fn name(&self) -> String {
        "euclidean".into()
    }

    fn check_domain(&self, _p: &Point4) -> Result<()> {
        Ok(())
    }

    fn evaluate(&self, _p: &Point4) -> Result<Form> {
        Ok(Form::identity())
    }

    fn derivatives(&self, _p: &Point4) -> Option<Result<[Form; 4]>> {
        Some(Ok([Form::zeros(); 4]))
    }

    fn alpha(&self) -> Option<f64> {
        Some(0.0)
    }

    fn positive_definite_claimed(&self) -> bool {
        true
    }

    fn sample_region(&self) -> Region {
        Region::ball(1.0)
    }
}

/// The Hermitian matrix `scale·(δ_jk/s − α·conj(z_j)·z_k/s²)` with
/// `s = 1 + α|z|²`, shared by the Fubini family and the ball metric.
#[derive(Clone, Copy, Debug)]
struct ProjectiveForm {
    alpha: f64,
    scale: f64,
}

impl ProjectiveForm {
    fn s(&self, p: &Point4) -> f64 {
        1.0 + self.alpha * p.norm_sq()
    }

    fn hermitian(&self, p: &Point4) -> [[Complex64; 2]; 2] {
        let z = p.complex();
        let s = self.s(p);
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                let delta = if j == k { 1.0 / s } else { 0.0 };
                (Complex64::new(delta, 0.0) - z[j].conj() * z[k] * (self.alpha / (s * s)))
                    * self.scale
            })
        })
    }

    fn hermitian_derivative(&self, p: &Point4, m: usize) -> [[Complex64; 2]; 2] {
        let z = p.complex();
        let u = Point4::basis(m).complex();
        let s = self.s(p);
        let sm = 2.0 * self.alpha * p[m];
        let (s2, s3) = (s * s, s * s * s);
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                let delta = if j == k { -sm / s2 } else { 0.0 };
                let zz = z[j].conj() * z[k];
                let dzz = u[j].conj() * z[k] + z[j].conj() * u[k];
                (Complex64::new(delta, 0.0) - dzz * (self.alpha / s2)
                    + zz * (2.0 * self.alpha * sm / s3))
                    * self.scale
            })
        })
    }

    fn form(&self, p: &Point4) -> Form {
        real_form(&self.hermitian(p))
    }

    fn derivatives(&self, p: &Point4) -> [Form; 4] {
        std::array::from_fn(|m| real_form(&self.hermitian_derivative(p, m)))
    }
}

/// Fubini metric of the affine chart for the form `|Z0|² + α·Σ|Zj|²`.
///
/// At `z` the squared length of `v` is
/// `(⟨V,V⟩⟨X,X⟩ − |⟨X,V⟩|²) / ⟨X,X⟩²` with `X = (1, z)`, `V = (0, v)`,
/// negated for `α < 0`; `α = 0` is the Euclidean metric.
#[derive(Clone, Copy, Debug)]
pub struct Fubini {
    pub alpha: f64,
}

pub fn fubini_metric(alpha: f64) -> Fubini {
    Fubini { alpha }
}

impl Fubini {
    fn projective(&self) -> ProjectiveForm {
        ProjectiveForm {
            alpha: self.alpha,
            scale: self.alpha.abs(),
        }
    }
}

impl MetricField for Fubini {
    fn name(&self) -> String {
        format!("fubini:{}", self.alpha)
    }

    fn check_domain(&self, p: &Point4) -> Result<()> {
        if self.alpha < 0.0 && self.projective().s(p) <= 0.0 {
            return Err(GeomError::Domain {
                field: self.name(),
                constraint: "1 + alpha*|z|^2 > 0".into(),
                point: *p,
            });
        }
        Ok(())
    }

    fn evaluate(&self, p: &Point4) -> Result<Form> {
        self.check_domain(p)?;
        if self.alpha == 0.0 {
            return Ok(Form::identity());
        }
        Ok(self.projective().form(p))
    }

    fn derivatives(&self, p: &Point4) -> Option<Result<[Form; 4]>> {
        Some(self.check_domain(p).map(|_| {
            if self.alpha == 0.0 {
                [Form::zeros(); 4]
            } else {
                self.projective().derivatives(p)
            }
        }))
    }

    fn alpha(&self) -> Option<f64> {
        Some(self.alpha)
    }

    fn positive_definite_claimed(&self) -> bool {
        true
    }

    fn sample_region(&self) -> Region {
        if self.alpha > 0.0 {
            Region::ball(1.0 / self.alpha.sqrt())
        } else if self.alpha < 0.0 {
            Region::ball(0.5 / (-self.alpha).sqrt())
        } else {
            Region::ball(1.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallPart {
    /// `|z| < 1`: the complex hyperbolic plane.
    Interior,
    /// `|z|² > 1 + EXTERIOR_MARGIN`: indefinite extension.
    Exterior,
    /// Everything off the unit sphere.
    Full,
}

/// Margin kept between exterior points and the unit sphere.
pub const EXTERIOR_MARGIN: f64 = 1e-6;

/// The complex hyperbolic metric of the unit ball,
/// `((|dz|²)(1 − |z|²) + |Σ dz_j·conj(z_j)|²) / (1 − |z|²)²`,
/// also evaluated outside the ball where it is indefinite.
#[derive(Clone, Copy, Debug)]
pub struct BallMetric {
    pub part: BallPart,
}

pub fn ball_metric() -> BallMetric {
    BallMetric {
        part: BallPart::Full,
    }
}

impl BallMetric {
    pub fn interior() -> Self {
        BallMetric {
            part: BallPart::Interior,
        }
    }

    pub fn exterior() -> Self {
        BallMetric {
            part: BallPart::Exterior,
        }
    }

    const FORM: ProjectiveForm = ProjectiveForm {
        alpha: -1.0,
        scale: 1.0,
    };
}

impl MetricField for BallMetric {
    fn name(&self) -> String {
        match self.part {
            BallPart::Interior => "ball".into(),
            BallPart::Exterior => "ball-exterior".into(),
            BallPart::Full => "ball-full".into(),
        }
    }

    fn check_domain(&self, p: &Point4) -> Result<()> {
        let r2 = p.norm_sq();
        if (r2 - 1.0).abs() < 1e-12 {
            return Err(GeomError::SingularLocus {
                field: self.name(),
                locus: "|z|^2 = 1".into(),
                point: *p,
            });
        }
        let constraint = match self.part {
            BallPart::Interior if r2 >= 1.0 => "|z|^2 < 1",
            BallPart::Exterior if r2 <= 1.0 + EXTERIOR_MARGIN => "|z|^2 > 1 + 1e-6",
            _ => return Ok(()),
        };
        Err(GeomError::Domain {
            field: self.name(),
            constraint: constraint.into(),
            point: *p,
        })
    }

    fn evaluate(&self, p: &Point4) -> Result<Form> {
        self.check_domain(p)?;
        Ok(Self::FORM.form(p))
    }

    fn derivatives(&self, p: &Point4) -> Option<Result<[Form; 4]>> {
        Some(self.check_domain(p).map(|_| Self::FORM.derivatives(p)))
    }

    fn positive_definite_claimed(&self) -> bool {
        self.part == BallPart::Interior
    }

    fn base_point(&self) -> Point4 {
        match self.part {
            BallPart::Exterior => Point4::new(2.0, 0.0, 0.0, 0.0),
            _ => Point4::ZERO,
        }
    }

    fn sample_region(&self) -> Region {
        match self.part {
            BallPart::Exterior => Region::shell(1.5, 2.5),
            _ => Region::ball(0.5),
        }
    }
}

/// Built-in counterexample fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestField {
    /// Constant `diag(2, 1, 1, 1)`: not Hermitian, flat.
    Diag2,
    /// `e^{x2}·I`: Hermitian but not Kähler.
    NonKahler,
    /// `diag(e^{x1}, e^{x2}, e^{x3}, e^{x0})`: generic, not Hermitian.
    Generic,
    /// Fubini `α = 1` scaled by `1 + 0.1·x0²`: Hermitian, not Kähler.
    Perturbed,
}

impl TestField {
    pub const ALL: [TestField; 4] = [
        TestField::Diag2,
        TestField::NonKahler,
        TestField::Generic,
        TestField::Perturbed,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            TestField::Diag2 => "diag2",
            TestField::NonKahler => "nonkahler",
            TestField::Generic => "generic",
            TestField::Perturbed => "perturbed",
        }
    }

    fn perturbation(p: &Point4) -> (f64, f64) {
        (1.0 + 0.1 * p[0] * p[0], 0.2 * p[0])
    }
}

impl MetricField for TestField {
    fn name(&self) -> String {
        format!("testfield:{}", self.id())
    }

    fn check_domain(&self, _p: &Point4) -> Result<()> {
        Ok(())
    }

    fn evaluate(&self, p: &Point4) -> Result<Form> {
        Ok(match self {
            TestField::Diag2 => Form::from_diagonal(&[2.0, 1.0, 1.0, 1.0].into()),
            TestField::NonKahler => Form::identity() * p[2].exp(),
            TestField::Generic => {
                Form::from_diagonal(&[p[1].exp(), p[2].exp(), p[3].exp(), p[0].exp()].into())
            }
            TestField::Perturbed => {
                let (f, _) = Self::perturbation(p);
                fubini_metric(1.0).evaluate(p)? * f
            }
        })
    }

    fn derivatives(&self, p: &Point4) -> Option<Result<[Form; 4]>> {
        let mut d = [Form::zeros(); 4];
        match self {
            TestField::Diag2 => {}
            TestField::NonKahler => d[2] = Form::identity() * p[2].exp(),
            TestField::Generic => {
                // entry (a, a) depends on x_{(a+1) mod 4}
                for a in 0..4 {
                    let m = (a + 1) % 4;
                    d[m][(a, a)] = p[m].exp();
                }
            }
            TestField::Perturbed => {
                let base = fubini_metric(1.0);
                let (f, df0) = Self::perturbation(p);
                let g = ProjectiveForm {
                    alpha: 1.0,
                    scale: 1.0,
                };
                let dg = g.derivatives(p);
                for m in 0..4 {
                    d[m] = dg[m] * f;
                }
                d[0] += base.projective().form(p) * df0;
            }
        }
        Some(Ok(d))
    }

    fn positive_definite_claimed(&self) -> bool {
        true
    }

    fn sample_region(&self) -> Region {
        Region::ball(1.0)
    }
}

/// Parses a metric id: `euclidean`, `fubini:<alpha>`, `ball`,
/// `ball-exterior`, `ball-full`, `testfield:<id>`.
pub fn metric_from_id(id: &str) -> Result<SharedMetric> {
    let unknown = || GeomError::UnknownId(id.to_string());
    Ok(match id {
        "euclidean" => Arc::new(Euclidean),
        "ball" => Arc::new(BallMetric::interior()),
        "ball-exterior" => Arc::new(BallMetric::exterior()),
        "ball-full" => Arc::new(ball_metric()),
        _ => {
            if let Some(alpha) = id.strip_prefix("fubini:") {
                let alpha: f64 = alpha.parse().map_err(|_| unknown())?;
                if !alpha.is_finite() {
                    return Err(unknown());
                }
                Arc::new(fubini_metric(alpha))
            } else if let Some(name) = id.strip_prefix("testfield:") {
                let field = TestField::ALL
                    .into_iter()
                    .find(|t| t.id() == name)
                    .ok_or_else(unknown)?;
                Arc::new(field)
            } else {
                return Err(unknown());
            }
        }
    })
}

/// `ω(x, y) = ½(g(Jx, y) − g(Jy, x))`, which is `g(Jx, y)` when `g` is Hermitian.
pub fn omega(g: &Form, x: &Point4, y: &Point4) -> f64 {
    0.5 * (form_apply(g, &x.j(), y) - form_apply(g, &y.j(), x))
}

/// `max_{a,b} |g(J e_a, J e_b) − g(e_a, e_b)|`.
pub fn hermitian_defect(g: &dyn MetricField, p: &Point4) -> Result<f64> {
    let form = g.evaluate(p)?;
    Ok(form_hermitian_defect(&form))
}

pub fn form_hermitian_defect(form: &Form) -> f64 {
    let mut defect = 0.0_f64;
    for a in 0..4 {
        for b in 0..4 {
            let (ea, eb) = (Point4::basis(a), Point4::basis(b));
            defect = defect.max((form_apply(form, &ea.j(), &eb.j()) - form[(a, b)]).abs());
        }
    }
    defect
}

/// Components of the antisymmetrized form `(x, y) ↦ ½(g(Jx, y) − g(Jy, x))`.
fn omega_components(form: &Form) -> [[f64; 4]; 4] {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let (ea, eb) = (Point4::basis(a), Point4::basis(b));
            omega(form, &ea, &eb)
        })
    })
}

/// Largest component of `dω` at `p`, with all first derivatives of `ω`
/// taken by central differences.
pub fn kahler_defect(g: &dyn MetricField, p: &Point4, step: f64) -> Result<f64> {
    assert!(step > 0.0, "step must be positive");
    let mut d_omega = [[[0.0; 4]; 4]; 4];
    for (m, dm) in d_omega.iter_mut().enumerate() {
        let e = Point4::basis(m) * step;
        let plus = omega_components(&g.evaluate(&(*p + e))?);
        let minus = omega_components(&g.evaluate(&(*p - e))?);
        for a in 0..4 {
            for b in 0..4 {
                dm[a][b] = (plus[a][b] - minus[a][b]) / (2.0 * step);
            }
        }
    }
    let mut defect = 0.0_f64;
    for a in 0..4 {
        for b in (a + 1)..4 {
            for c in (b + 1)..4 {
                let v = d_omega[a][b][c] + d_omega[b][c][a] + d_omega[c][a][b];
                defect = defect.max(v.abs());
            }
        }
    }
    Ok(defect)
}

/// `⟨X, Y⟩ = g(X, Y) − i·ω(X, Y)`.
pub fn hermitian_inner(
    g: &dyn MetricField,
    p: &Point4,
    x: &Point4,
    y: &Point4,
) -> Result<Complex64> {
    Ok(form_hermitian_inner(&g.evaluate(p)?, x, y))
}

pub fn form_hermitian_inner(form: &Form, x: &Point4, y: &Point4) -> Complex64 {
    Complex64::new(form_apply(form, x, y), -omega(form, x, y))
}

/// Gram determinant `⟨X,X⟩⟨Y,Y⟩ − ⟨X,Y⟩⟨Y,X⟩` (real part).
pub fn gram_g(g: &dyn MetricField, p: &Point4, x: &Point4, y: &Point4) -> Result<f64> {
    form_gram(&g.evaluate(p)?, x, y)
}

pub fn form_gram(form: &Form, x: &Point4, y: &Point4) -> Result<f64> {
    let wedge = x.wedge(y).norm();
    if wedge < 1e-12 {
        return Err(GeomError::Dependent { wedge });
    }
    let xx = form_hermitian_inner(form, x, x);
    let yy = form_hermitian_inner(form, y, y);
    let xy = form_hermitian_inner(form, x, y);
    let yx = form_hermitian_inner(form, y, x);
    Ok((xx * yy - xy * yx).re)
}

/// Eigenvalues in ascending order.
pub fn eigenvalues(form: &Form) -> [f64; 4] {
    let eig = SymmetricEigen::new(*form);
    let mut ev: [f64; 4] = std::array::from_fn(|i| eig.eigenvalues[i]);
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{max_abs, symmetry_defect};
    use crate::sample;

    fn seeded_points(g: &dyn MetricField, n: usize, seed: u64) -> Vec<Point4> {
        let mut rng = sample::rng(seed);
        let region = g.sample_region();
        (0..n).map(|_| region.sample(&mut rng)).collect()
    }

    #[test]
    fn fubini_special_values() {
        let p = Point4::new(0.3, -0.2, 1.1, 0.4);
        assert_eq!(fubini_metric(0.0).evaluate(&p).unwrap(), Form::identity());
        for alpha in [1.0, -1.0] {
            let g = fubini_metric(alpha).evaluate(&Point4::ZERO).unwrap();
            assert!(max_abs(&(g - Form::identity())) < 1e-15);
        }
    }

    #[test]
    fn fubini_matches_homogeneous_formula() {
        // Oracle: evaluate (⟨V,V⟩⟨X,X⟩ − |⟨X,V⟩|²)/⟨X,X⟩² with H = |Z0|² + α Σ|Zj|².
        let mut rng = sample::rng(17);
        for alpha in [1.0, 0.5, -0.5, -1.0] {
            let g = fubini_metric(alpha);
            for _ in 0..20 {
                let p = g.sample_region().sample(&mut rng);
                let v = sample::gaussian_point(&mut rng);
                let h = |a: [Complex64; 3], b: [Complex64; 3]| {
                    a[0] * b[0].conj() + (a[1] * b[1].conj() + a[2] * b[2].conj()) * alpha
                };
                let one = Complex64::new(1.0, 0.0);
                let zero = Complex64::new(0.0, 0.0);
                let x = [one, p.z1(), p.z2()];
                let vv = [zero, v.z1(), v.z2()];
                let xx = h(x, x).re;
                let num = (h(vv, vv) * h(x, x) - h(x, vv) * h(vv, x)).re;
                let expected = alpha.signum() * num / (xx * xx);
                let got = form_apply(&g.evaluate(&p).unwrap(), &v, &v);
                assert!((got - expected).abs() <= 1e-13 * expected.abs().max(1.0));
            }
        }
    }

    #[test]
    fn fubini_domain_errors() {
        let g = fubini_metric(-1.0);
        let err = g.evaluate(&Point4::new(1.5, 0.0, 0.0, 0.0)).unwrap_err();
        match err {
            GeomError::Domain { constraint, .. } => assert!(constraint.contains("1 + alpha")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(fubini_metric(1.0)
            .evaluate(&Point4::new(50.0, 0.0, 0.0, 0.0))
            .is_ok());
    }

    #[test]
    fn ball_examples() {
        let g = ball_metric();
        assert!(max_abs(&(g.evaluate(&Point4::ZERO).unwrap() - Form::identity())) < 1e-15);
        let inside = Point4::new(0.3, 0.1, -0.2, 0.3);
        assert!(eigenvalues(&g.evaluate(&inside).unwrap())[0] > 0.0);
        let ev = eigenvalues(&g.evaluate(&Point4::new(2.0, 0.0, 0.0, 0.0)).unwrap());
        assert!(ev[0] < 0.0 && ev[3] > 0.0);
        assert!(ev.iter().all(|e| e.abs() > 1e-3));
        assert!(matches!(
            g.evaluate(&Point4::new(0.6, 0.0, 0.8, 0.0)),
            Err(GeomError::SingularLocus { .. })
        ));
    }

    #[test]
    fn symmetric_and_hermitian_on_samples() {
        let fields: Vec<SharedMetric> = vec![
            Arc::new(fubini_metric(1.0)),
            Arc::new(fubini_metric(-1.0)),
            Arc::new(fubini_metric(0.5)),
            Arc::new(BallMetric::interior()),
            Arc::new(BallMetric::exterior()),
        ];
        for g in &fields {
            for p in seeded_points(g.as_ref(), 100, 1) {
                let form = g.evaluate(&p).unwrap();
                assert!(symmetry_defect(&form) <= 1e-15);
                assert!(hermitian_defect(g.as_ref(), &p).unwrap() <= 1e-12);
                if g.positive_definite_claimed() {
                    assert!(eigenvalues(&form)[0] > 0.0);
                }
            }
        }
    }

    #[test]
    fn hermitian_defect_examples() {
        assert_eq!(hermitian_defect(&Euclidean, &Point4::ZERO).unwrap(), 0.0);
        assert_eq!(
            hermitian_defect(&TestField::Diag2, &Point4::ZERO).unwrap(),
            1.0
        );
    }

    #[test]
    fn kahler_defect_examples() {
        assert!(
            kahler_defect(&Euclidean, &Point4::new(0.1, 0.2, 0.3, 0.4), 1e-4).unwrap() <= 1e-14
        );
        for alpha in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let g = fubini_metric(alpha);
            for p in seeded_points(&g, 50, 2) {
                assert!(
                    kahler_defect(&g, &p, 1e-4).unwrap() <= 1e-6,
                    "alpha {alpha} at {p:?}"
                );
            }
        }
        let nk = TestField::NonKahler;
        assert!(hermitian_defect(&nk, &Point4::ZERO).unwrap() <= 1e-15);
        assert!(kahler_defect(&nk, &Point4::ZERO, 1e-4).unwrap() >= 1e-2);
    }

    #[test]
    fn kahler_defect_reports_stencil_exit() {
        let g = BallMetric::interior();
        let edge = Point4::new(1.0 - 1e-5, 0.0, 0.0, 0.0);
        assert!(kahler_defect(&g, &edge, 1e-4).unwrap_err().is_domain());
    }

    #[test]
    fn exact_derivatives_match_differences() {
        let fields: Vec<SharedMetric> = vec![
            Arc::new(fubini_metric(1.0)),
            Arc::new(fubini_metric(-0.5)),
            Arc::new(BallMetric::exterior()),
            Arc::new(TestField::Generic),
            Arc::new(TestField::Perturbed),
            Arc::new(TestField::NonKahler),
        ];
        for g in &fields {
            for p in seeded_points(g.as_ref(), 10, 3) {
                let exact = g.derivatives(&p).unwrap().unwrap();
                for (m, dm) in exact.iter().enumerate() {
                    let h = 1e-5;
                    let e = Point4::basis(m) * h;
                    let fd =
                        (g.evaluate(&(p + e)).unwrap() - g.evaluate(&(p - e)).unwrap()) / (2.0 * h);
                    let scale = max_abs(dm).max(1.0);
                    assert!(max_abs(&(fd - dm)) <= 1e-7 * scale, "{} d{m}", g.name());
                }
            }
        }
    }

    #[test]
    fn hermitian_inner_examples() {
        let e0 = Point4::basis(0);
        let e1 = Point4::basis(1);
        assert_eq!(
            hermitian_inner(&Euclidean, &Point4::ZERO, &e0, &e0).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        // ω(e0, e1) = g(J e0, e1) = g(e1, e1) = 1, so ⟨e0, e1⟩ = 0 − i·1.
        assert_eq!(
            hermitian_inner(&Euclidean, &Point4::ZERO, &e0, &e1).unwrap(),
            Complex64::new(0.0, -1.0)
        );

        let mut rng = sample::rng(9);
        let fields: Vec<SharedMetric> = vec![
            Arc::new(fubini_metric(1.0)),
            Arc::new(BallMetric::interior()),
            Arc::new(TestField::Generic),
            Arc::new(TestField::Diag2),
        ];
        for i in 0..100 {
            let g = &fields[i % fields.len()];
            let p = g.sample_region().sample(&mut rng);
            let x = sample::gaussian_point(&mut rng);
            let v = hermitian_inner(g.as_ref(), &p, &x, &x).unwrap();
            assert!(v.im.abs() <= 1e-14 * v.re.abs().max(1.0));
        }
    }

    #[test]
    fn gram_examples() {
        let (e0, e2) = (Point4::basis(0), Point4::basis(2));
        assert!((gram_g(&Euclidean, &Point4::ZERO, &e0, &e2).unwrap() - 1.0).abs() < 1e-15);
        assert!(
            (gram_g(&fubini_metric(1.0), &Point4::ZERO, &e0, &e2).unwrap() - 1.0).abs() < 1e-15
        );
        assert!(matches!(
            gram_g(&Euclidean, &Point4::ZERO, &e0, &Point4::basis(1)),
            Err(GeomError::Dependent { .. })
        ));

        let mut rng = sample::rng(21);
        let g = fubini_metric(1.0);
        for _ in 0..100 {
            let p = g.sample_region().sample(&mut rng);
            let x = sample::gaussian_point(&mut rng);
            let y = sample::gaussian_point(&mut rng);
            assert!(gram_g(&g, &p, &x, &y).unwrap() > 0.0);
        }
    }

    #[test]
    fn gram_invariant_under_unimodular_frames() {
        let mut rng = sample::rng(22);
        let g = fubini_metric(-1.0);
        for _ in 0..50 {
            let p = g.sample_region().sample(&mut rng);
            let x = sample::gaussian_point(&mut rng);
            let y = sample::gaussian_point(&mut rng);
            let c =
                |r: &mut sample::SeededRng| Complex64::new(sample::normal(r), sample::normal(r));
            let (a, b, cc) = (c(&mut rng), c(&mut rng), c(&mut rng));
            // well-conditioned frames only: rounding of x2, y2 scales with |a||d|
            if a.norm() < 0.5 || b.norm() > 2.0 || cc.norm() > 2.0 {
                continue;
            }
            // ad − bc = 1
            let d = (Complex64::new(1.0, 0.0) + b * cc) / a;
            let x2 = x.scale_complex(a) + y.scale_complex(b);
            let y2 = x.scale_complex(cc) + y.scale_complex(d);
            let g1 = gram_g(&g, &p, &x, &y).unwrap();
            let g2 = gram_g(&g, &p, &x2, &y2).unwrap();
            assert!((g1 - g2).abs() <= 1e-12 * g1.abs().max(1.0), "{g1} {g2}");
        }
    }

    #[test]
    fn ball_is_proportional_to_fubini_minus_one() {
        let ball = BallMetric::interior();
        let fub = fubini_metric(-1.0);
        let mut ratios = Vec::new();
        for p in seeded_points(&ball, 50, 4) {
            let a = ball.evaluate(&p).unwrap();
            let b = fub.evaluate(&p).unwrap();
            let ratio = a.dot(&b) / b.dot(&b);
            assert!(max_abs(&(a - b * ratio)) <= 1e-12 * max_abs(&a));
            ratios.push(ratio);
        }
        let (lo, hi) = ratios
            .iter()
            .fold((f64::MAX, f64::MIN), |(l, h), r| (l.min(*r), h.max(*r)));
        assert!(lo > 0.0 && (hi - lo) / lo <= 1e-10);
        // the displayed ball form coincides with fubini(-1), not just up to scale
        assert!((lo - 1.0).abs() <= 1e-12 && (hi - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ids_parse() {
        for id in [
            "euclidean",
            "fubini:1",
            "fubini:-0.5",
            "ball",
            "ball-exterior",
            "testfield:nonkahler",
        ] {
            let g = metric_from_id(id).unwrap();
            assert!(!g.name().is_empty());
        }
        assert_eq!(metric_from_id("fubini:-0.5").unwrap().name(), "fubini:-0.5");
        for bad in ["sphere", "fubini:x", "testfield:nope", "fubini:nan"] {
            assert!(matches!(metric_from_id(bad), Err(GeomError::UnknownId(_))));
        }
    }
}
