//! Bilinear forms on R⁴ and vector-valued symmetric bilinear maps.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quaternion::Point4;

pub type Form = Matrix4<f64>;

pub fn form_apply(g: &Form, v: &Point4, w: &Point4) -> f64 {
    let mut s = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            s += v[a] * g[(a, b)] * w[b];
        }
    }
    s
}

pub fn form_vector(g: &Form, v: &Point4) -> Point4 {
    Point4::from_vector(&(g * v.to_vector()))
}

pub fn max_abs(m: &Form) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn symmetry_defect(m: &Form) -> f64 {
    max_abs(&(m - m.transpose()))
}

/// Real 4×4 form of the Hermitian form `h(v, w) = Σ v_j·M_jk·conj(w_k)`,
/// i.e. `g = Re h`. Symmetric by construction when `M` is Hermitian.
pub fn real_form(m: &[[Complex64; 2]; 2]) -> Form {
    let mut g = Form::zeros();
    for j in 0..2 {
        for k in j..2 {
            let p = m[j][k].re;
            let q = m[j][k].im;
            let block = [[p, q], [-q, p]];
            for r in 0..2 {
                for c in 0..2 {
                    g[(2 * j + r, 2 * k + c)] = block[r][c];
                    g[(2 * k + c, 2 * j + r)] = block[r][c];
                }
            }
        }
    }
    g
}

/// Vector-valued bilinear map `(v, w) ↦ Σ coeffs[k][i][j]·v_i·w_j·e_k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BilinearMap {
    pub coeffs: [[[f64; 4]; 4]; 4],
}

impl BilinearMap {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn apply(&self, v: &Point4, w: &Point4) -> Point4 {
        let mut out = Point4::ZERO;
        for k in 0..4 {
            let mut s = 0.0;
            for i in 0..4 {
                if v[i] == 0.0 {
                    continue;
                }
                for j in 0..4 {
                    s += self.coeffs[k][i][j] * v[i] * w[j];
                }
            }
            out[k] = s;
        }
        out
    }

    pub fn quadratic(&self, v: &Point4) -> Point4 {
        self.apply(v, v)
    }

    /// Symmetric bilinear map obtained by polarizing a quadratic map.
    pub fn from_quadratic(q: impl Fn(&Point4) -> Point4) -> Self {
        let mut out = BilinearMap::zero();
        let diag: [Point4; 4] = std::array::from_fn(|i| q(&Point4::basis(i)));
        for i in 0..4 {
            for j in i..4 {
                let value = if i == j {
                    diag[i]
                } else {
                    (q(&(Point4::basis(i) + Point4::basis(j))) - diag[i] - diag[j]) * 0.5
                };
                for k in 0..4 {
                    out.coeffs[k][i][j] = value[k];
                    out.coeffs[k][j][i] = value[k];
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    out.coeffs[k][i][j] *= s;
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &BilinearMap) -> f64 {
        let mut m = 0.0_f64;
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    m = m.max((self.coeffs[k][i][j] - other.coeffs[k][i][j]).abs());
                }
            }
        }
        m
    }
}
