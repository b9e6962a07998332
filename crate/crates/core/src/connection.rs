//! Christoffel form, geodesics and exponential 2-jets.
//!
//! Sign convention: `∇_X Y = ∂_X Y + Γ(X, Y)`, so geodesics satisfy
//! `ẍ = −Γ(ẋ, ẋ)` and the exponential map at `p` is
//! `x ↦ p + x + ½·A(x)x + O(|x|³)` with `A(x)x = −Γ_p(x, x)`.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::forms::{form_apply, form_vector, BilinearMap, Form};
use crate::metrics::{form_derivatives, MetricField, DEFAULT_STEP};
use crate::quaternion::{
    fit_quaternion_functional, quadratic_holomorphy_defect, ComplexFunctional, Point4,
    QuaternionFunctional, RealLinearFunctional,
};
use crate::sample;

/// Threshold below which `|det g|` is treated as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Christoffel symbols `Γ^k_ij` at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChristoffelData {
    pub point: Point4,
    pub symbols: BilinearMap,
}

impl ChristoffelData {
    pub fn apply(&self, v: &Point4, w: &Point4) -> Point4 {
        self.symbols.apply(v, w)
    }

    pub fn quadratic(&self, v: &Point4) -> Point4 {
        self.symbols.quadratic(v)
    }
}

fn inverse_form(form: &Form, point: &Point4) -> Result<Matrix4<f64>> {
    let det = form.determinant();
    if det.abs() < DEGENERACY_THRESHOLD || !det.is_finite() {
        return Err(GeomError::Degenerate { point: *point, det });
    }
    form.try_inverse()
        .ok_or(GeomError::Degenerate { point: *point, det })
}

/// Levi-Civita Christoffel symbols from first derivatives of `g` (exact
/// when the field provides them, central differences with `step` otherwise).
pub fn christoffel(g: &dyn MetricField, p: &Point4, step: f64) -> Result<ChristoffelData> {
    let form = g.evaluate(p)?;
    let inv = inverse_form(&form, p)?;
    let dg = form_derivatives(g, p, step)?;
    let mut symbols = BilinearMap::zero();
    for i in 0..4 {
        for j in i..4 {
            // first kind: Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
            let first: [f64; 4] =
                std::array::from_fn(|l| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]));
            for k in 0..4 {
                let v: f64 = (0..4).map(|l| inv[(k, l)] * first[l]).sum();
                symbols.coeffs[k][i][j] = v;
                symbols.coeffs[k][j][i] = v;
            }
        }
    }
    Ok(ChristoffelData { point: *p, symbols })
}

/// `Γ_p(v, v)` without assembling the full symbol table.
pub fn christoffel_quadratic(g: &dyn MetricField, p: &Point4, v: &Point4) -> Result<Point4> {
    let form = g.evaluate(p)?;
    let dg = form_derivatives(g, p, DEFAULT_STEP)?;
    let mut directional = Form::zeros();
    for (i, d) in dg.iter().enumerate() {
        directional += d * v[i];
    }
    let dv = form_vector(&directional, v);
    let w = Point4(std::array::from_fn(|l| {
        dv[l] - 0.5 * form_apply(&dg[l], v, v)
    }));
    let det = form.determinant();
    if det.abs() < DEGENERACY_THRESHOLD || !det.is_finite() {
        return Err(GeomError::Degenerate { point: *p, det });
    }
    let sol = form
        .lu()
        .solve(&w.to_vector())
        .ok_or(GeomError::Degenerate { point: *p, det })?;
    Ok(Point4::from_vector(&sol))
}

/// `max_{v,w ∈ basis} ‖Γ(Jv, w) − J·Γ(v, w)‖`.
pub fn complex_bilinearity_defect(gamma: &ChristoffelData) -> f64 {
    let mut defect = 0.0_f64;
    for a in 0..4 {
        for b in 0..4 {
            let (v, w) = (Point4::basis(a), Point4::basis(b));
            let d = gamma.apply(&v.j(), &w) - gamma.apply(&v, &w).j();
            defect = defect.max(d.norm());
        }
    }
    defect
}

/// Result of fitting `Γ(v, v) ≈ L(v)·v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProportionalityFit {
    pub functional: RealLinearFunctional,
    pub residual: f64,
    /// `max |L(Jv) − i·L(v)|`, reported when the residual passed.
    pub complex_linearity_defect: Option<f64>,
}

impl ProportionalityFit {
    pub fn complex_functional(&self) -> ComplexFunctional {
        self.functional.complex_part()
    }
}

/// Least-squares fit of a complex-valued real-linear `L` minimizing
/// `‖Γ(v, v) − L(v)·v‖` over the evaluation sample.
pub fn extract_l(gamma: &ChristoffelData, tol: f64) -> ProportionalityFit {
    let sample = sample::evaluation_sample();
    let mut design = DMatrix::<f64>::zeros(4 * sample.len(), 8);
    let mut rhs = DVector::<f64>::zeros(4 * sample.len());
    for (s, v) in sample.iter().enumerate() {
        let jv = v.j();
        let target = gamma.quadratic(v);
        for k in 0..4 {
            for m in 0..4 {
                design[(4 * s + k, m)] = v[m] * v[k];
                design[(4 * s + k, 4 + m)] = v[m] * jv[k];
            }
            rhs[4 * s + k] = target[k];
        }
    }
    let sol = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .expect("SVD solve with both factors computed");
    let functional = RealLinearFunctional {
        re: std::array::from_fn(|m| sol[m]),
        im: std::array::from_fn(|m| sol[4 + m]),
    };
    let residual = sample
        .iter()
        .map(|v| (gamma.quadratic(v) - v.scale_complex(functional.eval(v))).norm())
        .fold(0.0, f64::max);
    let complex_linearity_defect = (residual <= tol).then(|| functional.complex_linearity_defect());
    ProportionalityFit {
        functional,
        residual,
        complex_linearity_defect,
    }
}

/// A sampled geodesic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub metric: String,
    pub initial_point: Point4,
    pub initial_velocity: Point4,
    pub times: Vec<f64>,
    pub points: Vec<Point4>,
    pub velocities: Vec<Point4>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last_state(&self) -> (Point4, Point4) {
        (
            *self
                .points
                .last()
                .expect("trajectory has the initial sample"),
            *self
                .velocities
                .last()
                .expect("trajectory has the initial sample"),
        )
    }

    /// CSV with header `t,x0,x1,x2,x3,v0,v1,v2,v3`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,x0,x1,x2,x3,v0,v1,v2,v3")?;
        for ((t, x), v) in self.times.iter().zip(&self.points).zip(&self.velocities) {
            write!(out, "{t:.16e}")?;
            for c in x.0.iter().chain(v.0.iter()) {
                write!(out, ",{c:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// Integrates `ẍ = −Γ_x(ẋ, ẋ)` with classical RK4, `n` steps over `[0, t_end]`.
pub fn geodesic(
    g: &dyn MetricField,
    p: &Point4,
    v: &Point4,
    t_end: f64,
    n: usize,
) -> Result<Trajectory> {
    if n < 16 {
        return Err(GeomError::Precondition(format!("n = {n} < 16 steps")));
    }
    g.check_domain(p)?;
    let h = t_end / n as f64;
    let mut traj = Trajectory {
        metric: g.name(),
        initial_point: *p,
        initial_velocity: *v,
        times: Vec::with_capacity(n + 1),
        points: Vec::with_capacity(n + 1),
        velocities: Vec::with_capacity(n + 1),
    };
    traj.times.push(0.0);
    traj.points.push(*p);
    traj.velocities.push(*v);

    let accel = |x: &Point4, u: &Point4| christoffel_quadratic(g, x, u).map(|a| -a);
    let (mut x, mut u) = (*p, *v);
    for step in 0..n {
        let t = step as f64 * h;
        let stage = || -> Result<(Point4, Point4)> {
            let a1 = accel(&x, &u)?;
            let (x2, u2) = (x + u * (0.5 * h), u + a1 * (0.5 * h));
            let a2 = accel(&x2, &u2)?;
            let (x3, u3) = (x + u2 * (0.5 * h), u + a2 * (0.5 * h));
            let a3 = accel(&x3, &u3)?;
            let (x4, u4) = (x + u3 * h, u + a3 * h);
            let a4 = accel(&x4, &u4)?;
            let nx = x + (u + u2 * 2.0 + u3 * 2.0 + u4) * (h / 6.0);
            let nu = u + (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
            g.check_domain(&nx)?;
            Ok((nx, nu))
        };
        match stage() {
            Ok((nx, nu)) if nx.is_finite() && nu.is_finite() => {
                x = nx;
                u = nu;
            }
            Ok(_) => {
                return Err(GeomError::DomainExit {
                    time: t,
                    reason: "state became non-finite".into(),
                    partial: Box::new(traj),
                })
            }
            Err(e) if e.is_domain() => {
                return Err(GeomError::DomainExit {
                    time: t,
                    reason: e.to_string(),
                    partial: Box::new(traj),
                })
            }
            Err(e) => return Err(e),
        }
        traj.times.push((step + 1) as f64 * h);
        traj.points.push(x);
        traj.velocities.push(u);
    }
    Ok(traj)
}

/// `g(ẋ, ẋ)` along the trajectory.
pub fn energies(g: &dyn MetricField, traj: &Trajectory) -> Result<Vec<f64>> {
    traj.points
        .iter()
        .zip(&traj.velocities)
        .map(|(x, v)| Ok(form_apply(&g.evaluate(x)?, v, v)))
        .collect()
}

/// `max_t |E(t) − E(0)| / |E(0)|` for `E = g(ẋ, ẋ)`.
pub fn energy_drift(g: &dyn MetricField, traj: &Trajectory) -> Result<f64> {
    let e = energies(g, traj)?;
    let e0 = e[0];
    Ok(e.iter().map(|x| (x - e0).abs()).fold(0.0, f64::max) / e0.abs().max(f64::MIN_POSITIVE))
}

/// Second-order part of the exponential map at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpJet {
    pub point: Point4,
    /// `Q(x) = −Γ_p(x, x)`.
    pub quadratic: BilinearMap,
    /// Best-fit `A` with `A(x)·x ≈ Q(x)`.
    pub fit: QuaternionFunctional,
    pub fit_residual: f64,
}

impl ExpJet {
    pub fn eval(&self, x: &Point4) -> Point4 {
        self.quadratic.quadratic(x)
    }

    pub fn holomorphy_defect(&self) -> f64 {
        quadratic_holomorphy_defect(|x| self.eval(x))
    }
}

pub fn exp_jet2(g: &dyn MetricField, p: &Point4) -> Result<ExpJet> {
    let gamma = christoffel(g, p, DEFAULT_STEP)?;
    let quadratic = gamma.symbols.scaled(-1.0);
    let (fit, fit_residual) = fit_quaternion_functional(|x| quadratic.quadratic(x));
    Ok(ExpJet {
        point: *p,
        quadratic,
        fit,
        fit_residual,
    })
}
