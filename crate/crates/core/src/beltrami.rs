//! Gram-determinant normalization `h = g / G^{2/3}`, its constancy along
//! complex lines, recovery `g = h / H²` and the momentum-polynomial form of `h`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::connection::{christoffel, extract_l};
use crate::error::{GeomError, Result};
use crate::forms::{form_apply, Form};
use crate::metrics::{
    form_derivatives, form_hermitian_inner, MetricField, SharedMetric, DEFAULT_STEP,
};
use crate::quaternion::Point4;
use crate::sample::{self, Region};

/// Residual bound under which `Γ(v, v) = L(v)·v` is considered to hold.
pub const PROPORTIONALITY_TOL: f64 = 1e-6;

const DEFINITENESS_PROBES: usize = 64;
const DEFINITENESS_SEED: u64 = 0x6a3;

/// Gram determinant `⟨X,X⟩⟨Y,Y⟩ − ⟨X,Y⟩⟨Y,X⟩` of a form on a fixed frame,
/// without the independence check.
fn frame_gram(form: &Form, x: &Point4, y: &Point4) -> f64 {
    let xx = form_hermitian_inner(form, x, x);
    let yy = form_hermitian_inner(form, y, y);
    let xy = form_hermitian_inner(form, x, y);
    let yx = form_hermitian_inner(form, y, x);
    (xx * yy - xy * yx).re
}

/// Derivative of [`frame_gram`] given the derivative `d` of the form.
fn frame_gram_derivative(form: &Form, d: &Form, x: &Point4, y: &Point4) -> f64 {
    let h = |f: &Form, a: &Point4, b: &Point4| form_hermitian_inner(f, a, b);
    let (xx, yy, xy, yx) = (h(form, x, x), h(form, y, y), h(form, x, y), h(form, y, x));
    let (dxx, dyy, dxy, dyx) = (h(d, x, x), h(d, y, y), h(d, x, y), h(d, y, x));
    (dxx * yy + xx * dyy - dxy * yx - xy * dyx).re
}

/// The field `h = g / (G/G(p*))^{2/3}` for a constant complex frame.
#[derive(Clone, Debug)]
pub struct NormalizedField {
    base: SharedMetric,
    frame: [Point4; 2],
    base_point: Point4,
    base_gram: f64,
}

impl NormalizedField {
    pub fn base(&self) -> &SharedMetric {
        &self.base
    }

    pub fn frame(&self) -> [Point4; 2] {
        self.frame
    }

    /// `G(p*)` of the base metric.
    pub fn base_gram(&self) -> f64 {
        self.base_gram
    }

    /// `G(p) / G(p*)` for the base metric.
    pub fn gram(&self, p: &Point4) -> Result<f64> {
        let form = self.base.evaluate(p)?;
        self.checked_gram(&form, p)
    }

    fn checked_gram(&self, form: &Form, p: &Point4) -> Result<f64> {
        let gram = frame_gram(form, &self.frame[0], &self.frame[1]);
        if !(gram > 0.0) {
            return Err(GeomError::Definiteness { gram, point: *p });
        }
        Ok(gram / self.base_gram)
    }
}

/// Normalization on the frame `(e0, e2)`.
pub fn normalized_h(g: SharedMetric) -> Result<NormalizedField> {
    normalized_h_with_frame(g, [Point4::basis(0), Point4::basis(2)])
}

pub fn normalized_h_with_frame(g: SharedMetric, frame: [Point4; 2]) -> Result<NormalizedField> {
    let wedge = frame[0].wedge(&frame[1]).norm();
    if wedge < 1e-12 {
        return Err(GeomError::Dependent { wedge });
    }
    let base_point = g.base_point();
    let form = g.evaluate(&base_point)?;
    let base_gram = frame_gram(&form, &frame[0], &frame[1]);
    if !(base_gram > 0.0) {
        return Err(GeomError::Definiteness {
            gram: base_gram,
            point: base_point,
        });
    }
    let field = NormalizedField {
        base: g,
        frame,
        base_point,
        base_gram,
    };
    let region = field.base.sample_region();
    let mut rng = sample::rng(DEFINITENESS_SEED);
    for _ in 0..DEFINITENESS_PROBES {
        let p = region.sample(&mut rng);
        if field.base.in_domain(&p) {
            field.gram(&p)?;
        }
    }
    Ok(field)
}

impl MetricField for NormalizedField {
    fn name(&self) -> String {
        format!("normalized({})", self.base.name())
    }

    fn check_domain(&self, p: &Point4) -> Result<()> {
        self.base.check_domain(p)
    }

    fn evaluate(&self, p: &Point4) -> Result<Form> {
        let form = self.base.evaluate(p)?;
        let gram = self.checked_gram(&form, p)?;
        Ok(form / gram.powf(2.0 / 3.0))
    }

    fn derivatives(&self, p: &Point4) -> Option<Result<[Form; 4]>> {
        let run = || -> Result<[Form; 4]> {
            let form = self.base.evaluate(p)?;
            let gram = self.checked_gram(&form, p)?;
            let dg = form_derivatives(self.base.as_ref(), p, DEFAULT_STEP)?;
            let scale = gram.powf(-2.0 / 3.0);
            Ok(std::array::from_fn(|m| {
                let d_gram = frame_gram_derivative(&form, &dg[m], &self.frame[0], &self.frame[1])
                    / self.base_gram;
                dg[m] * scale - form * (2.0 / 3.0 * scale * d_gram / gram)
            }))
        };
        Some(run())
    }

    fn positive_definite_claimed(&self) -> bool {
        self.base.positive_definite_claimed()
    }

    fn base_point(&self) -> Point4 {
        self.base_point
    }

    fn sample_region(&self) -> Region {
        self.base.sample_region()
    }
}

/// An affine complex line `{point + c·direction}`, sampled for `|c| ≤ extent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexLine {
    pub point: Point4,
    pub direction: Point4,
    pub extent: f64,
}

impl ComplexLine {
    /// Deterministic spiral of `n` points in the disk `|c| ≤ extent`.
    pub fn samples(&self, n: usize) -> Vec<Point4> {
        let u = self.direction.normalized();
        (0..n)
            .map(|k| {
                let r = self.extent * k as f64 / (n.max(2) - 1) as f64;
                self.point + u.scale_complex(Complex64::from_polar(r, 2.399_963 * k as f64))
            })
            .collect()
    }
}

/// Largest spread of `h(u,u)`, `h(Ju,Ju)`, `h(u,Ju)` across points of the line,
/// for a Euclidean-unit `u` along it.
pub fn line_constancy_defect(
    h: &dyn MetricField,
    line: &ComplexLine,
    samples: usize,
) -> Result<f64> {
    let u = line.direction.normalized();
    let ju = u.j();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for x in line.samples(samples) {
        let form = h.evaluate(&x)?;
        let values = [
            form_apply(&form, &u, &u),
            form_apply(&form, &ju, &ju),
            form_apply(&form, &u, &ju),
        ];
        for k in 0..3 {
            lo[k] = lo[k].min(values[k]);
            hi[k] = hi[k].max(values[k]);
        }
    }
    Ok((0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max))
}

/// `h / H²` with `H` the Gram determinant of `h` on the same frame.
pub fn recover_g(hf: &NormalizedField, p: &Point4) -> Result<Form> {
    let h = hf.evaluate(p)?;
    let gram = frame_gram(&h, &hf.frame[0], &hf.frame[1]);
    if !(gram > 0.0) {
        return Err(GeomError::Definiteness { gram, point: *p });
    }
    Ok(h / (gram * gram))
}

/// How far a set of forms is from `a_k = c·b_k` with a single constant `c`:
/// the relative spread of the pointwise Frobenius ratios plus the largest
/// pointwise non-proportional part.
pub fn ratio_spread(pairs: &[(Form, Form)]) -> f64 {
    let mut ratios = Vec::with_capacity(pairs.len());
    let mut defect = 0.0_f64;
    for (a, b) in pairs {
        let r = a.dot(b) / b.dot(b);
        defect = defect.max((a - b * r).norm() / a.norm());
        ratios.push(r);
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    (hi - lo) / mean.abs() + defect
}

/// Residuals of `X·G = 3 Re L(X)·G` and `X·g(X,X) = 2 Re L(X)·g(X,X)` on the frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeIdentity {
    pub defect: f64,
    pub gram_defect: f64,
    pub energy_defect: f64,
    /// Residual of the `Γ(v, v) = L(v)·v` fit used for `L`.
    pub proportionality_residual: f64,
}

/// Evaluates the identities with whatever `L` best fits `Γ`, with no precondition.
pub fn derivative_identity_report(g: &dyn MetricField, p: &Point4) -> Result<DerivativeIdentity> {
    let fit = extract_l(&christoffel(g, p, DEFAULT_STEP)?, PROPORTIONALITY_TOL);
    let frame = [Point4::basis(0), Point4::basis(2)];
    let h = DEFAULT_STEP;
    let mut gram_defect = 0.0_f64;
    let mut energy_defect = 0.0_f64;
    for x in frame {
        let re_l = fit.functional.eval(&x).re;
        let (plus, minus, here) = (
            g.evaluate(&(*p + x * h))?,
            g.evaluate(&(*p - x * h))?,
            g.evaluate(p)?,
        );
        let gram = |f: &Form| frame_gram(f, &frame[0], &frame[1]);
        let d_gram = (gram(&plus) - gram(&minus)) / (2.0 * h);
        gram_defect =
            gram_defect.max((d_gram - 3.0 * re_l * gram(&here)).abs() / gram(&here).abs());
        let energy = |f: &Form| form_apply(f, &x, &x);
        let d_energy = (energy(&plus) - energy(&minus)) / (2.0 * h);
        energy_defect =
            energy_defect.max((d_energy - 2.0 * re_l * energy(&here)).abs() / energy(&here).abs());
    }
    Ok(DerivativeIdentity {
        defect: gram_defect.max(energy_defect),
        gram_defect,
        energy_defect,
        proportionality_residual: fit.residual,
    })
}

/// As [`derivative_identity_report`], requiring `Γ(v, v) = L(v)·v` at `p`.
pub fn derivative_identity_defect(g: &dyn MetricField, p: &Point4) -> Result<f64> {
    let report = derivative_identity_report(g, p)?;
    if report.proportionality_residual > PROPORTIONALITY_TOL {
        return Err(GeomError::Precondition(format!(
            "Γ(v,v) = L(v)v fails at {p:?}: residual {:e}",
            report.proportionality_residual
        )));
    }
    Ok(report.defect)
}

/// Least-squares fit of `h_x(v, v)` as a Hermitian form in `(v1, v2, z1·v2 − z2·v1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumFit {
    /// `‖fit − h‖ / ‖h‖` over the samples.
    pub residual: f64,
    /// Diagonal entries `H00, H11, H22`, then `Re, Im` of `H01, H02, H12`.
    pub coefficients: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

const MOMENTUM_PARAMS: usize = 9;

fn momentum_features(x: &Point4, v: &Point4) -> [f64; MOMENTUM_PARAMS] {
    let [z1, z2] = x.complex();
    let [v1, v2] = v.complex();
    let w = [v1, v2, z1 * v2 - z2 * v1];
    let cross = |a: usize, b: usize| w[a] * w[b].conj();
    let (c01, c02, c12) = (cross(0, 1), cross(0, 2), cross(1, 2));
    [
        w[0].norm_sqr(),
        w[1].norm_sqr(),
        w[2].norm_sqr(),
        2.0 * c01.re,
        -2.0 * c01.im,
        2.0 * c02.re,
        -2.0 * c02.im,
        2.0 * c12.re,
        -2.0 * c12.im,
    ]
}

pub fn momentum_polynomial_fit(
    h: &dyn MetricField,
    n_samples: usize,
    seed: u64,
) -> Result<MomentumFit> {
    if n_samples < MOMENTUM_PARAMS {
        return Err(GeomError::Sampling(format!(
            "{n_samples} samples for {MOMENTUM_PARAMS} coefficients"
        )));
    }
    let region = h.sample_region();
    let mut rng = sample::rng(seed);
    let mut design = DMatrix::<f64>::zeros(n_samples, MOMENTUM_PARAMS);
    let mut target = DVector::<f64>::zeros(n_samples);
    for row in 0..n_samples {
        let x = region.sample(&mut rng);
        let v = sample::unit_vector(&mut rng);
        let form = h.evaluate(&x)?;
        target[row] = form_apply(&form, &v, &v);
        for (col, f) in momentum_features(&x, &v).into_iter().enumerate() {
            design[(row, col)] = f;
        }
    }
    let svd = design.clone().svd(true, true);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if !(smin > 1e-12 * smax) {
        return Err(GeomError::Sampling(format!(
            "rank-deficient momentum sample (condition {:e}); increase n_samples",
            smax / smin
        )));
    }
    let coeffs = svd
        .solve(&target, 0.0)
        .expect("SVD solve with both factors computed");
    let residual = (&design * &coeffs - &target).norm() / target.norm();
    Ok(MomentumFit {
        residual,
        coefficients: coeffs.iter().copied().collect(),
        n_samples,
        seed,
    })
}
