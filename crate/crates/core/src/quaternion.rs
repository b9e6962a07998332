//! Quaternions and the fixed identification R⁴ ≅ C² ≅ H.
//!
//! A point `(x0, x1, x2, x3)` is read as the complex pair
//! `z1 = x0 + i·x1`, `z2 = x2 + i·x3` and as the quaternion
//! `q = z1 + z2·j = x0 + x1·i + x2·j + x3·k`. With this choice left
//! multiplication by `i` on H is componentwise multiplication by `i` on C²,
//! which is the complex structure `J` used everywhere in the crate.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Matrix2x4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sample;

/// A point (or tangent vector) of R⁴ = C².
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point4(pub [f64; 4]);

impl Point4 {
    pub const ZERO: Point4 = Point4([0.0; 4]);

    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Point4([x0, x1, x2, x3])
    }

    pub fn basis(i: usize) -> Self {
        let mut p = [0.0; 4];
        p[i] = 1.0;
        Point4(p)
    }

    pub fn from_complex(z1: Complex64, z2: Complex64) -> Self {
        Point4([z1.re, z1.im, z2.re, z2.im])
    }

    pub fn z1(&self) -> Complex64 {
        Complex64::new(self.0[0], self.0[1])
    }

    pub fn z2(&self) -> Complex64 {
        Complex64::new(self.0[2], self.0[3])
    }

    pub fn complex(&self) -> [Complex64; 2] {
        [self.z1(), self.z2()]
    }

    pub fn to_quaternion(self) -> Quaternion {
        let [w, x, y, z] = self.0;
        Quaternion { w, x, y, z }
    }

    pub fn from_quaternion(q: Quaternion) -> Self {
        Point4([q.w, q.x, q.y, q.z])
    }

    /// The complex structure: `(z1, z2) ↦ (i·z1, i·z2)`.
    pub fn j(&self) -> Self {
        let [x0, x1, x2, x3] = self.0;
        Point4([-x1, x0, -x3, x2])
    }

    /// Complex scalar multiple `c·(z1, z2)`.
    pub fn scale_complex(&self, c: Complex64) -> Self {
        Point4::from_complex(c * self.z1(), c * self.z2())
    }

    pub fn dot(&self, other: &Point4) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Standard Hermitian product `z1·conj(w1) + z2·conj(w2)`.
    pub fn hermitian_dot(&self, other: &Point4) -> Complex64 {
        self.z1() * other.z1().conj() + self.z2() * other.z2().conj()
    }

    /// Complex wedge `z1·w2 − z2·w1`.
    pub fn wedge(&self, other: &Point4) -> Complex64 {
        self.z1() * other.z2() - self.z2() * other.z1()
    }

    pub fn distance(&self, other: &Point4) -> f64 {
        (*self - *other).norm()
    }

    pub fn normalized(&self) -> Self {
        *self * (1.0 / self.norm())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::from(self.0)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Point4([v[0], v[1], v[2], v[3]])
    }
}

impl Add for Point4 {
    type Output = Point4;
    fn add(self, rhs: Point4) -> Point4 {
        Point4(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl AddAssign for Point4 {
    fn add_assign(&mut self, rhs: Point4) {
        for i in 0..4 {
            self.0[i] += rhs.0[i];
        }
    }
}

impl Sub for Point4 {
    type Output = Point4;
    fn sub(self, rhs: Point4) -> Point4 {
        Point4(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Neg for Point4 {
    type Output = Point4;
    fn neg(self) -> Point4 {
        Point4(self.0.map(|x| -x))
    }
}

impl Mul<f64> for Point4 {
    type Output = Point4;
    fn mul(self, rhs: f64) -> Point4 {
        Point4(self.0.map(|x| x * rhs))
    }
}

impl Mul<Point4> for f64 {
    type Output = Point4;
    fn mul(self, rhs: Point4) -> Point4 {
        rhs * self
    }
}

impl Index<usize> for Point4 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Point4 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Quaternion `w + x·i + y·j + z·k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn from_complex(c: Complex64) -> Self {
        Quaternion::new(c.re, c.im, 0.0, 0.0)
    }

    pub fn conj(&self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.w + r.w, self.x + r.x, self.y + r.y, self.z + r.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.w - r.w, self.x - r.x, self.y - r.y, self.z - r.z)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, b: Quaternion) -> Quaternion {
        qmul(self, b)
    }
}

/// Hamilton product.
pub fn qmul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion {
        w: a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        x: a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        y: a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        z: a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    }
}

/// Multiplication by `i` on C², i.e. left quaternion multiplication by `i`.
pub fn jmul(v: Point4) -> Point4 {
    v.j()
}

/// Complex linear functional `(z1, z2) ↦ c1·z1 + c2·z2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexFunctional {
    pub c1: Complex64,
    pub c2: Complex64,
}

impl ComplexFunctional {
    pub fn new(c1: Complex64, c2: Complex64) -> Self {
        ComplexFunctional { c1, c2 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn eval(&self, x: &Point4) -> Complex64 {
        self.c1 * x.z1() + self.c2 * x.z2()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexFunctional::new(self.c1 * s, self.c2 * s)
    }

    pub fn coefficient_distance(&self, other: &ComplexFunctional) -> f64 {
        (self.c1 - other.c1).norm().max((self.c2 - other.c2).norm())
    }

    /// As a complex-valued real-linear functional.
    pub fn to_real_linear(&self) -> RealLinearFunctional {
        RealLinearFunctional::from_fn(|x| self.eval(x))
    }

    /// As a quaternion-valued map whose values are complex.
    pub fn to_quaternion_map(&self) -> QuaternionFunctional {
        QuaternionFunctional::from_fn(|x| Quaternion::from_complex(self.eval(x)))
    }
}

/// Complex-valued, real-linear functional on R⁴, stored as real and imaginary
/// coefficient rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RealLinearFunctional {
    pub re: [f64; 4],
    pub im: [f64; 4],
}

impl RealLinearFunctional {
    pub fn from_fn(f: impl Fn(&Point4) -> Complex64) -> Self {
        let mut out = RealLinearFunctional::default();
        for m in 0..4 {
            let v = f(&Point4::basis(m));
            out.re[m] = v.re;
            out.im[m] = v.im;
        }
        out
    }

    pub fn eval(&self, x: &Point4) -> Complex64 {
        let re = (0..4).map(|m| self.re[m] * x[m]).sum();
        let im = (0..4).map(|m| self.im[m] * x[m]).sum();
        Complex64::new(re, im)
    }

    /// `max_m |f(J e_m) − i·f(e_m)|`; zero iff the functional is complex linear.
    pub fn complex_linearity_defect(&self) -> f64 {
        (0..4)
            .map(|m| {
                let e = Point4::basis(m);
                (self.eval(&e.j()) - Complex64::i() * self.eval(&e)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Coefficients read from the action on `(1, 0)` and `(0, 1)`.
    pub fn complex_part(&self) -> ComplexFunctional {
        ComplexFunctional::new(self.eval(&Point4::basis(0)), self.eval(&Point4::basis(2)))
    }

    /// Operator norm over the Euclidean unit sphere.
    pub fn operator_norm(&self) -> f64 {
        let m = Matrix2x4::from_rows(&[self.re.into(), self.im.into()]);
        m.singular_values().max()
    }

    pub fn max_coefficient(&self) -> f64 {
        self.re
            .iter()
            .chain(self.im.iter())
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// A real-linear map R⁴ → H. Row `r` holds the coefficients of the
/// quaternion component `r` in the basis `(1, i, j, k)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuaternionFunctional {
    pub rows: [[f64; 4]; 4],
}

/// Components of a quaternion-valued map: `A(x) = a(x) + b(x)i + c(x)j + d(x)k`,
/// regrouped as `alpha = a + b·i` and `beta = d + c·i`, so that
/// `A(x) = alpha(x) + k·beta(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decomposition {
    pub a: [f64; 4],
    pub b: [f64; 4],
    pub c: [f64; 4],
    pub d: [f64; 4],
    pub alpha: RealLinearFunctional,
    pub beta: RealLinearFunctional,
}

impl QuaternionFunctional {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_rows(rows: [[f64; 4]; 4]) -> Self {
        QuaternionFunctional { rows }
    }

    pub fn from_fn(f: impl Fn(&Point4) -> Quaternion) -> Self {
        let mut rows = [[0.0; 4]; 4];
        for m in 0..4 {
            let q = f(&Point4::basis(m));
            rows[0][m] = q.w;
            rows[1][m] = q.x;
            rows[2][m] = q.y;
            rows[3][m] = q.z;
        }
        QuaternionFunctional { rows }
    }

    pub fn eval(&self, x: &Point4) -> Quaternion {
        let row = |r: usize| (0..4).map(|m| self.rows[r][m] * x[m]).sum::<f64>();
        Quaternion::new(row(0), row(1), row(2), row(3))
    }

    /// The quadratic map `x ↦ A(x)·x` (left multiplication).
    pub fn quadratic(&self, x: &Point4) -> Point4 {
        Point4::from_quaternion(qmul(self.eval(x), x.to_quaternion()))
    }

    /// The quadratic map `x ↦ x·A(x)` (right multiplication).
    pub fn quadratic_right(&self, x: &Point4) -> Point4 {
        Point4::from_quaternion(qmul(x.to_quaternion(), self.eval(x)))
    }

    pub fn max_abs_diff(&self, other: &QuaternionFunctional) -> f64 {
        let mut m = 0.0_f64;
        for r in 0..4 {
            for c in 0..4 {
                m = m.max((self.rows[r][c] - other.rows[r][c]).abs());
            }
        }
        m
    }
}

pub fn decompose_a(map: &QuaternionFunctional) -> Decomposition {
    let [a, b, c, d] = map.rows;
    Decomposition {
        a,
        b,
        c,
        d,
        alpha: RealLinearFunctional { re: a, im: b },
        beta: RealLinearFunctional { re: d, im: c },
    }
}

/// Holomorphy defect of an arbitrary real quadratic map `Q: R⁴ → R⁴`.
///
/// Sum of two maxima over [`sample::evaluation_sample`]:
/// `‖Q(Jx) + Q(x)‖` and the Cauchy–Riemann defect `‖DQ_x(Jv) − J·DQ_x(v)‖`
/// over basis directions `v`. The differential is taken by central
/// differences with unit step, which is exact for quadratic maps.
pub fn quadratic_holomorphy_defect(q: impl Fn(&Point4) -> Point4) -> f64 {
    const STEP: f64 = 1.0;
    let sample = sample::evaluation_sample();
    let mut algebraic = 0.0_f64;
    let mut cauchy_riemann = 0.0_f64;
    for x in sample {
        algebraic = algebraic.max((q(&x.j()) + q(x)).norm());
        let diff = |v: &Point4| (q(&(*x + *v * STEP)) - q(&(*x - *v * STEP))) * (0.5 / STEP);
        for m in 0..4 {
            let v = Point4::basis(m);
            let lhs = diff(&v.j());
            let rhs = diff(&v).j();
            cauchy_riemann = cauchy_riemann.max((lhs - rhs).norm());
        }
    }
    algebraic + cauchy_riemann
}

/// Holomorphy defect of `x ↦ A(x)·x`.
pub fn holomorphy_defect_quadratic(map: &QuaternionFunctional) -> f64 {
    quadratic_holomorphy_defect(|x| map.quadratic(x))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Classification {
    ComplexLinear {
        functional: ComplexFunctional,
        beta_norm: f64,
        defect: f64,
    },
    NotHolomorphic {
        defect: f64,
    },
}

impl Classification {
    pub fn is_complex_linear(&self) -> bool {
        matches!(self, Classification::ComplexLinear { .. })
    }

    pub fn functional(&self) -> Option<ComplexFunctional> {
        match self {
            Classification::ComplexLinear { functional, .. } => Some(*functional),
            Classification::NotHolomorphic { .. } => None,
        }
    }
}

/// Decides whether `x ↦ A(x)·x` is holomorphic and, if so, returns `A` as a
/// complex linear functional. A holomorphic quadratic map of this form must
/// have vanishing `beta`; a residual `beta` above `tol` is reported as
/// non-holomorphic.
pub fn classify_a(map: &QuaternionFunctional, tol: f64) -> Classification {
    assert!(tol > 0.0, "tolerance must be positive");
    let defect = holomorphy_defect_quadratic(map);
    if defect > tol {
        return Classification::NotHolomorphic { defect };
    }
    let parts = decompose_a(map);
    let beta_norm = parts.beta.max_coefficient();
    if beta_norm > tol {
        return Classification::NotHolomorphic {
            defect: defect.max(beta_norm),
        };
    }
    Classification::ComplexLinear {
        functional: parts.alpha.complex_part(),
        beta_norm,
        defect,
    }
}

/// Least-squares fit of a quaternion-valued `A` with `A(x)·x ≈ q(x)` over the
/// evaluation sample. Returns the map and the maximal residual.
pub fn fit_quaternion_functional(q: impl Fn(&Point4) -> Point4) -> (QuaternionFunctional, f64) {
    let sample = sample::evaluation_sample();
    let mut design = DMatrix::<f64>::zeros(4 * sample.len(), 16);
    let mut rhs = DVector::<f64>::zeros(4 * sample.len());
    for (s, x) in sample.iter().enumerate() {
        let xq = x.to_quaternion();
        for r in 0..4 {
            let unit = match r {
                0 => Quaternion::ONE,
                1 => Quaternion::I,
                2 => Quaternion::J,
                _ => Quaternion::K,
            };
            let prod = qmul(unit, xq);
            let comps = [prod.w, prod.x, prod.y, prod.z];
            for m in 0..4 {
                for (k, c) in comps.iter().enumerate() {
                    design[(4 * s + k, 4 * r + m)] = c * x[m];
                }
            }
        }
        let target = q(x);
        for k in 0..4 {
            rhs[4 * s + k] = target[k];
        }
    }
    let solution = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .expect("SVD solve with both factors computed");
    let mut rows = [[0.0; 4]; 4];
    for r in 0..4 {
        for m in 0..4 {
            rows[r][m] = solution[4 * r + m];
        }
    }
    let fit = QuaternionFunctional { rows };
    let residual = sample
        .iter()
        .map(|x| (fit.quadratic(x) - q(x)).norm())
        .fold(0.0, f64::max);
    (fit, residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn multiplication_table() {
        assert_eq!(qmul(Quaternion::I, Quaternion::J), Quaternion::K);
        assert_eq!(qmul(Quaternion::J, Quaternion::K), Quaternion::I);
        assert_eq!(qmul(Quaternion::K, Quaternion::I), Quaternion::J);
        assert_eq!(qmul(Quaternion::I, Quaternion::I), Quaternion::ONE * -1.0);
        assert_eq!(qmul(Quaternion::J, Quaternion::J), Quaternion::ONE * -1.0);
        assert_eq!(qmul(Quaternion::K, Quaternion::K), Quaternion::ONE * -1.0);
        let q = Quaternion::new(0.3, -1.2, 2.5, 0.7);
        assert_eq!(qmul(Quaternion::ONE, q), q);
        assert_eq!(qmul(q, Quaternion::ONE), q);
    }

    #[test]
    fn views_round_trip_bitwise() {
        let p = Point4::new(0.1, -2.7e-9, 3.0e5, -0.333);
        assert_eq!(Point4::from_complex(p.z1(), p.z2()), p);
        assert_eq!(Point4::from_quaternion(p.to_quaternion()), p);
    }

    #[test]
    fn jmul_examples() {
        assert_eq!(jmul(Point4::basis(0)), Point4::basis(1));
        assert_eq!(jmul(Point4::basis(2)), Point4::basis(3));
        let mut rng = sample::rng(11);
        for _ in 0..100 {
            let p = sample::gaussian_point(&mut rng);
            assert_eq!(jmul(jmul(p)), -p);
            let left = Point4::from_quaternion(qmul(Quaternion::I, p.to_quaternion()));
            assert_eq!(jmul(p), left);
            assert_eq!(jmul(p), p.scale_complex(Complex64::i()));
        }
    }

    #[test]
    fn decompose_examples() {
        let z1 = QuaternionFunctional::from_fn(|x| Quaternion::from_complex(x.z1()));
        let d = decompose_a(&z1);
        assert_eq!(d.a, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(d.b, [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(d.c, [0.0; 4]);
        assert_eq!(d.d, [0.0; 4]);
        assert_eq!(d.beta, RealLinearFunctional::default());

        // k·(x0 + x1·i) = x0·k + x1·(k·i) = x0·k + x1·j
        let kz1 = QuaternionFunctional::from_fn(|x| {
            qmul(Quaternion::K, Quaternion::from_complex(x.z1()))
        });
        let d = decompose_a(&kz1);
        assert_eq!(d.a, [0.0; 4]);
        assert_eq!(d.b, [0.0; 4]);
        assert_eq!(d.alpha, RealLinearFunctional::default());
        assert_eq!(d.c, [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(d.d, [1.0, 0.0, 0.0, 0.0]);
        assert!(d.beta.max_coefficient() > 0.5);

        let zero = decompose_a(&QuaternionFunctional::zero());
        assert_eq!(zero.alpha, RealLinearFunctional::default());
        assert_eq!(zero.beta, RealLinearFunctional::default());
    }

    #[test]
    fn holomorphy_defect_examples() {
        let z1 = ComplexFunctional::new(c(1.0, 0.0), c(0.0, 0.0)).to_quaternion_map();
        assert!(holomorphy_defect_quadratic(&z1) <= 1e-12);

        // A(x) = conj(z1) at x = e0: A(Jx)(Jx) + A(x)x = (-i)(i) + 1 = 2.
        let conj_z1 = QuaternionFunctional::from_fn(|x| Quaternion::from_complex(x.z1().conj()));
        let e0 = Point4::basis(0);
        let by_hand = (conj_z1.quadratic(&e0.j()) + conj_z1.quadratic(&e0)).norm();
        assert!((by_hand - 2.0).abs() < 1e-15);
        assert!(holomorphy_defect_quadratic(&conj_z1) > 0.1);

        // k·z1 passes the algebraic identity but fails Cauchy–Riemann.
        let kz1 = QuaternionFunctional::from_fn(|x| {
            qmul(Quaternion::K, Quaternion::from_complex(x.z1()))
        });
        let algebraic = (kz1.quadratic(&e0.j()) + kz1.quadratic(&e0)).norm();
        assert!(algebraic < 1e-15);
        assert!(holomorphy_defect_quadratic(&kz1) > 0.1);
    }

    #[test]
    fn classify_examples() {
        let l = ComplexFunctional::new(c(2.0, 1.0), c(3.0, 0.0));
        match classify_a(&l.to_quaternion_map(), 1e-9) {
            Classification::ComplexLinear { functional, .. } => {
                assert!(functional.coefficient_distance(&l) <= 1e-15)
            }
            other => panic!("expected complex linear, got {other:?}"),
        }
        let conj_z2 = QuaternionFunctional::from_fn(|x| Quaternion::from_complex(x.z2().conj()));
        assert!(!classify_a(&conj_z2, 1e-9).is_complex_linear());

        let mut rng = sample::rng(5);
        let mut checked = 0;
        while checked < 20 {
            let rows = std::array::from_fn(|_| std::array::from_fn(|_| sample::normal(&mut rng)));
            let map = QuaternionFunctional::from_rows(rows);
            if decompose_a(&map).beta.operator_norm() < 0.5 {
                continue;
            }
            assert!(!classify_a(&map, 1e-9).is_complex_linear());
            checked += 1;
        }
    }

    #[test]
    fn fit_recovers_exact_map() {
        let l = ComplexFunctional::new(c(0.5, -1.0), c(0.25, 2.0)).to_quaternion_map();
        let (fit, residual) = fit_quaternion_functional(|x| l.quadratic(x));
        assert!(residual < 1e-13);
        assert!(fit.max_abs_diff(&l) < 1e-13);
    }
}
