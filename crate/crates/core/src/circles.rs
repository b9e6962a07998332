//! Circle and line recognition in R⁴.

use nalgebra::{DMatrix, Matrix3, Matrix4, SymmetricEigen, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::connection::Trajectory;
use crate::error::{GeomError, Result};
use crate::quaternion::Point4;

pub const MIN_FIT_POINTS: usize = 8;

/// A fit is a line when its curvature is at most this times the inverse sample diameter.
pub const LINE_CURVATURE_THRESHOLD: f64 = 1e-9;

const COINCIDENT_SPREAD: f64 = 1e-14;
const DIAMETER_SUBSAMPLE: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Circle,
    Line,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleFit {
    pub kind: CurveKind,
    pub center: Option<Point4>,
    pub radius: Option<f64>,
    /// Orthonormal pair spanning the affine plane of the curve.
    pub plane: [Point4; 2],
    pub rms_residual: f64,
    /// `rms_residual / radius` for circles, `rms_residual / diameter` for lines.
    pub relative_residual: f64,
}

impl CircleFit {
    pub fn is_circle(&self) -> bool {
        self.kind == CurveKind::Circle
    }
}

/// Intermediate residuals of a fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// RMS of the algebraic circle before refinement.
    pub algebraic_rms: Option<f64>,
    /// RMS after the Gauss–Newton step.
    pub refined_rms: Option<f64>,
    pub line_rms: f64,
    pub diameter: f64,
}

/// Largest pairwise distance over at most 512 evenly strided points.
pub fn sample_diameter(points: &[Point4]) -> f64 {
    let stride = points.len().div_ceil(DIAMETER_SUBSAMPLE).max(1);
    let mut sub: Vec<Point4> = points.iter().step_by(stride).copied().collect();
    if let Some(last) = points.last() {
        if sub.last() != Some(last) {
            sub.push(*last);
        }
    }
    let mut d = 0.0_f64;
    for (i, a) in sub.iter().enumerate() {
        for b in &sub[i + 1..] {
            d = d.max(a.distance(b));
        }
    }
    d
}

fn centroid(points: &[Point4]) -> Point4 {
    let mut c = Point4::ZERO;
    for p in points {
        c += *p;
    }
    c * (1.0 / points.len() as f64)
}

/// Principal axes of the second-moment matrix, by decreasing variance.
fn principal_axes(points: &[Point4], c: &Point4) -> [Point4; 4] {
    let mut m = Matrix4::<f64>::zeros();
    for p in points {
        let d = (*p - *c).to_vector();
        m += d * d.transpose();
    }
    let eig = SymmetricEigen::new(m);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let axes: [Point4; 4] = std::array::from_fn(|k| {
        Point4::from_vector(&eig.eigenvectors.column(order[k]).into_owned())
    });
    // re-orthonormalize the leading pair to full precision
    let u = axes[0].normalized();
    let w = axes[1] - u * u.dot(&axes[1]);
    [u, w.normalized(), axes[2], axes[3]]
}

fn line_residuals(points: &[Point4], c: &Point4, dir: &Point4) -> f64 {
    let sum: f64 = points
        .iter()
        .map(|p| {
            let d = *p - *c;
            (d - *dir * d.dot(dir)).norm_sq()
        })
        .sum();
    (sum / points.len() as f64).sqrt()
}

/// Least-squares line through the points.
pub fn fit_line(points: &[Point4]) -> Result<CircleFit> {
    let (c, axes, diameter) = prepare(points)?;
    let rms = line_residuals(points, &c, &axes[0]);
    Ok(line_fit(axes[0], axes[1], rms, diameter))
}

fn line_fit(dir: Point4, other: Point4, rms: f64, diameter: f64) -> CircleFit {
    CircleFit {
        kind: CurveKind::Line,
        center: None,
        radius: None,
        plane: [dir, other],
        rms_residual: rms,
        relative_residual: if diameter > 0.0 { rms / diameter } else { 0.0 },
    }
}

fn prepare(points: &[Point4]) -> Result<(Point4, [Point4; 4], f64)> {
    if points.len() < MIN_FIT_POINTS {
        return Err(GeomError::TooFewPoints {
            required: MIN_FIT_POINTS,
            got: points.len(),
        });
    }
    let c = centroid(points);
    let spread = points.iter().map(|p| p.distance(&c)).fold(0.0, f64::max);
    if spread < COINCIDENT_SPREAD {
        return Err(GeomError::RankDeficient { spread });
    }
    Ok((c, principal_axes(points, &c), sample_diameter(points)))
}

/// Planar circle `(cx, cy, r)` from algebraic Pratt fit of centered data.
fn pratt_fit(xy: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let n = xy.len();
    let z = DMatrix::from_fn(n, 4, |i, k| {
        let (x, y) = xy[i];
        match k {
            0 => x * x + y * y,
            1 => x,
            2 => y,
            _ => 1.0,
        }
    });
    let svd = z.svd(false, true);
    let vt = svd.v_t?;
    let s = svd.singular_values;
    // nalgebra sorts singular values in decreasing order
    let v: Matrix4<f64> = Matrix4::from_iterator(vt.transpose().iter().copied());
    let a = if s[3] / s[0] < 1e-12 {
        v.column(3).into_owned()
    } else {
        let w = v * Matrix4::from_diagonal(&Vector4::new(s[0], s[1], s[2], s[3]));
        let binv = Matrix4::new(
            0.0, 0.0, 0.0, -0.5, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            -0.5, 0.0, 0.0, 0.0,
        );
        let eig = SymmetricEigen::new(w.transpose() * binv * w);
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let e = eig.eigenvectors.column(order[1]).into_owned();
        let sinv = Vector4::new(1.0 / s[0], 1.0 / s[1], 1.0 / s[2], 1.0 / s[3]);
        v * e.component_mul(&sinv)
    };
    if a[0] == 0.0 || !a.iter().all(|x| x.is_finite()) {
        return None;
    }
    let cx = -a[1] / (2.0 * a[0]);
    let cy = -a[2] / (2.0 * a[0]);
    let disc = a[1] * a[1] + a[2] * a[2] - 4.0 * a[0] * a[3];
    if disc <= 0.0 {
        return None;
    }
    let r = disc.sqrt() / (2.0 * a[0].abs());
    (cx.is_finite() && cy.is_finite() && r.is_finite()).then_some((cx, cy, r))
}

fn circle_cost(xy: &[(f64, f64)], (cx, cy, r): (f64, f64, f64)) -> f64 {
    xy.iter()
        .map(|&(x, y)| {
            let d = (x - cx).hypot(y - cy) - r;
            d * d
        })
        .sum()
}

/// One Gauss–Newton step on geometric distance, kept only if the cost does not increase.
fn gauss_newton_step(xy: &[(f64, f64)], start: (f64, f64, f64)) -> (f64, f64, f64) {
    let (cx, cy, r) = start;
    let mut jtj = Matrix3::<f64>::zeros();
    let mut jtr = Vector3::<f64>::zeros();
    for &(x, y) in xy {
        let d = (x - cx).hypot(y - cy);
        if d == 0.0 {
            continue;
        }
        let row = Vector3::new(-(x - cx) / d, -(y - cy) / d, -1.0);
        let res = d - r;
        jtj += row * row.transpose();
        jtr += row * res;
    }
    let Some(delta) = jtj.lu().solve(&(-jtr)) else {
        return start;
    };
    let next = (cx + delta[0], cy + delta[1], r + delta[2]);
    if next.2 > 0.0 && circle_cost(xy, next) <= circle_cost(xy, start) {
        next
    } else {
        start
    }
}

/// Fits a circle or line to points in R⁴.
pub fn fit_circle(points: &[Point4]) -> Result<CircleFit> {
    fit_circle_detailed(points).map(|(fit, _)| fit)
}

pub fn fit_circle_detailed(points: &[Point4]) -> Result<(CircleFit, FitDiagnostics)> {
    let (c, axes, diameter) = prepare(points)?;
    let [u, w, ..] = axes;
    let line_rms = line_residuals(points, &c, &u);
    let mut out_of_plane_sq = 0.0;
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let d = *p - c;
            let (x, y) = (d.dot(&u), d.dot(&w));
            out_of_plane_sq += (d - u * x - w * y).norm_sq();
            (x, y)
        })
        .collect();
    let n = points.len() as f64;
    let rms_of =
        |circle: (f64, f64, f64)| ((circle_cost(&xy, circle) + out_of_plane_sq) / n).sqrt();

    let line = line_fit(u, w, line_rms, diameter);
    let Some(algebraic) = pratt_fit(&xy) else {
        let diag = FitDiagnostics {
            algebraic_rms: None,
            refined_rms: None,
            line_rms,
            diameter,
        };
        return Ok((line, diag));
    };
    let refined = gauss_newton_step(&xy, algebraic);
    let (algebraic_rms, rms) = (rms_of(algebraic), rms_of(refined));
    let diag = FitDiagnostics {
        algebraic_rms: Some(algebraic_rms),
        refined_rms: Some(rms),
        line_rms,
        diameter,
    };
    let (cx, cy, r) = refined;
    let flat = 1.0 / r <= LINE_CURVATURE_THRESHOLD / diameter;
    if flat || line_rms <= rms {
        return Ok((line, diag));
    }
    let fit = CircleFit {
        kind: CurveKind::Circle,
        center: Some(c + u * cx + w * cy),
        radius: Some(r),
        plane: [u, w],
        rms_residual: rms,
        relative_residual: rms / r,
    };
    Ok((fit, diag))
}

/// The osculating circle of a curve with velocity `v` and acceleration `a` at `p`.
pub fn circle_from_jet(p: &Point4, v: &Point4, a: &Point4) -> Result<CircleFit> {
    let vv = v.norm_sq();
    if vv == 0.0 {
        return Err(GeomError::ZeroVelocity);
    }
    let a_perp = *a - *v * (a.dot(v) / vv);
    let k = a_perp.norm();
    let dir = *v * (1.0 / vv.sqrt());
    if k <= 1e-12 * a.norm() + 1e-300 {
        return Ok(line_fit(dir, dir.j(), 0.0, 1.0));
    }
    Ok(CircleFit {
        kind: CurveKind::Circle,
        center: Some(*p + a_perp * (vv / (k * k))),
        radius: Some(vv / k),
        plane: [dir, a_perp * (1.0 / k)],
        rms_residual: 0.0,
        relative_residual: 0.0,
    })
}

/// Distance of `x` from the complex affine line `{base + c·dir}`.
pub fn distance_to_complex_line(x: &Point4, base: &Point4, dir: &Point4) -> f64 {
    let d = *x - *base;
    let nn = dir.norm_sq();
    let jd = dir.j();
    (d - *dir * (d.dot(dir) / nn) - jd * (d.dot(&jd) / nn)).norm()
}

/// Max distance of the points from `{base + c·dir}`, relative to the sample diameter.
pub fn complex_line_defect_points(points: &[Point4], base: &Point4, dir: &Point4) -> f64 {
    let diameter = sample_diameter(points);
    if diameter == 0.0 || dir.norm_sq() == 0.0 {
        return 0.0;
    }
    points
        .iter()
        .map(|x| distance_to_complex_line(x, base, dir))
        .fold(0.0, f64::max)
        / diameter
}

/// How far a trajectory strays from the complex line of its initial point and velocity.
pub fn complex_line_defect(traj: &Trajectory) -> f64 {
    complex_line_defect_points(&traj.points, &traj.initial_point, &traj.initial_velocity)
}
