//! Small fixed-size linear algebra: 4x4 characteristic polynomials, closed-form
//! quartic roots, and central finite differences on R^4.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat4 = [[f64; 4]; 4];
pub type Vec4 = [f64; 4];

/// Default step for central-difference gradients.
pub const GRAD_STEP: f64 = 1e-5;
/// Default step for central-difference Hessians.
pub const HESS_STEP: f64 = 1e-4;

pub fn zeros() -> Mat4 {
    [[0.0; 4]; 4]
}

pub fn identity() -> Mat4 {
    let mut m = zeros();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = zeros();
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn mat_vec(a: &Mat4, v: &Vec4) -> Vec4 {
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = (0..4).map(|k| a[i][k] * v[k]).sum();
    }
    out
}

pub fn transpose(a: &Mat4) -> Mat4 {
    let mut t = zeros();
    for i in 0..4 {
        for j in 0..4 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn mat_add(a: &Mat4, b: &Mat4, sb: f64) -> Mat4 {
    let mut c = *a;
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] += sb * b[i][j];
        }
    }
    c
}

pub fn scale(a: &Mat4, s: f64) -> Mat4 {
    mat_add(&zeros(), a, s)
}

pub fn max_abs_diff(a: &Mat4, b: &Mat4) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            d = d.max((a[i][j] - b[i][j]).abs());
        }
    }
    d
}

pub fn trace(a: &Mat4) -> f64 {
    (0..4).map(|i| a[i][i]).sum()
}

/// Standard symplectic matrix with 2x2 diagonal blocks `[[0,-1],[1,0]]`.
pub fn omega_st() -> Mat4 {
    let mut w = zeros();
    w[0][1] = -1.0;
    w[1][0] = 1.0;
    w[2][3] = -1.0;
    w[3][2] = 1.0;
    w
}

/// Inverse of [`omega_st`], which equals its transpose.
pub fn omega_st_inv() -> Mat4 {
    transpose(&omega_st())
}

/// Coefficients of the monic polynomial `det(xi I - A) = xi^4 + c3 xi^3 + c2 xi^2 + c1 xi + c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharPoly {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl CharPoly {
    pub fn eval(&self, x: Complex64) -> Complex64 {
        (((x + self.c3) * x + self.c2) * x + self.c1) * x + self.c0
    }

    fn eval_deriv(&self, x: Complex64) -> Complex64 {
        ((x * 4.0 + 3.0 * self.c3) * x + 2.0 * self.c2) * x + self.c1
    }

    /// Size of the largest term at `x`, used to make residuals relative.
    fn term_scale(&self, x: Complex64) -> f64 {
        let r = x.norm();
        r.powi(4)
            + self.c3.abs() * r.powi(3)
            + self.c2.abs() * r * r
            + self.c1.abs() * r
            + self.c0.abs()
    }
}

/// Faddeev-LeVerrier recursion.
pub fn char_poly_4x4(a: &Mat4) -> CharPoly {
    let mut c = [0.0; 5];
    c[4] = 1.0;
    let mut mk = zeros();
    for k in 1..=4 {
        let mut next = mat_mul(a, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c[5 - k];
        }
        mk = next;
        c[4 - k] = -trace(&mat_mul(a, &mk)) / k as f64;
    }
    CharPoly {
        c0: c[0],
        c1: c[1],
        c2: c[2],
        c3: c[3],
    }
}

/// Four eigenvalues in lexicographic (real, imaginary) order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenQuadruple(pub [Complex64; 4]);

impl EigenQuadruple {
    pub fn new(mut roots: [Complex64; 4]) -> Self {
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        EigenQuadruple(roots)
    }

    pub fn as_pairs(&self) -> [[f64; 2]; 4] {
        let mut out = [[0.0; 2]; 4];
        for (o, z) in out.iter_mut().zip(self.0.iter()) {
            *o = [z.re, z.im];
        }
        out
    }
}

/// Roots of `xi^4 + p xi^2 + q` together with the discriminant `p^2 - 4q`
/// of the quadratic in `xi^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiquadraticSpectrum {
    pub roots: EigenQuadruple,
    pub discriminant: f64,
    /// The two roots of the quadratic in `xi^2`.
    pub squares: [Complex64; 2],
}

/// Roots of `w^2 + p w + q`, using the cancellation-free branch.
pub fn quadratic_roots(p: Complex64, q: Complex64) -> [Complex64; 2] {
    let s = (p * p - q * 4.0).sqrt();
    let big = if (p.conj() * s).re >= 0.0 {
        -(p + s) * 0.5
    } else {
        (s - p) * 0.5
    };
    if big.norm() == 0.0 {
        return [Complex64::new(0.0, 0.0); 2];
    }
    [big, q / big]
}

pub fn solve_biquadratic(p: f64, q: f64) -> BiquadraticSpectrum {
    let disc = p * p - 4.0 * q;
    let w = quadratic_roots(Complex64::new(p, 0.0), Complex64::new(q, 0.0));
    let a = w[0].sqrt();
    let b = w[1].sqrt();
    BiquadraticSpectrum {
        roots: EigenQuadruple::new([a, -a, b, -b]),
        discriminant: disc,
        squares: w,
    }
}

fn cubic_roots(b: Complex64, c: Complex64, d: Complex64) -> [Complex64; 3] {
    // x^3 + b x^2 + c x + d via Cardano on the depressed cubic.
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = b * b * b * (2.0 / 27.0) - b * c / 3.0 + d;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let mut u3 = -q / 2.0 + disc;
    if u3.norm() < (-q / 2.0 - disc).norm() {
        u3 = -q / 2.0 - disc;
    }
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut out = [Complex64::new(0.0, 0.0); 3];
    if u3.norm() == 0.0 {
        for o in out.iter_mut() {
            *o = -shift;
        }
        return out;
    }
    let u = u3.powf(1.0 / 3.0);
    let mut rot = Complex64::new(1.0, 0.0);
    for o in out.iter_mut() {
        let uk = u * rot;
        *o = uk - p / (uk * 3.0) - shift;
        rot *= omega;
    }
    out
}

/// Closed-form roots of a monic quartic (Ferrari), without polishing.
pub fn quartic_roots(cp: &CharPoly) -> [Complex64; 4] {
    let a = cp.c3;
    let p = cp.c2 - 3.0 * a * a / 8.0;
    let q = cp.c1 - a * cp.c2 / 2.0 + a * a * a / 8.0;
    let r = cp.c0 - a * cp.c1 / 4.0 + a * a * cp.c2 / 16.0 - 3.0 * a.powi(4) / 256.0;
    let scale = 1.0 + p.abs() + r.abs().sqrt();
    let ys: [Complex64; 4] = if q.abs() <= 1e-14 * scale.powi(2) {
        let w = quadratic_roots(Complex64::new(p, 0.0), Complex64::new(r, 0.0));
        let (s0, s1) = (w[0].sqrt(), w[1].sqrt());
        [s0, -s0, s1, -s1]
    } else {
        let ms = cubic_roots(
            Complex64::new(-p / 2.0, 0.0),
            Complex64::new(-r, 0.0),
            Complex64::new(p * r / 2.0 - q * q / 8.0, 0.0),
        );
        let m = ms
            .iter()
            .copied()
            .max_by(|x, y| (*x * 2.0 - p).norm().total_cmp(&(*y * 2.0 - p).norm()))
            .unwrap_or_default();
        let s = (m * 2.0 - p).sqrt();
        let k = Complex64::new(q, 0.0) / (s * 2.0);
        let r1 = quadratic_roots(-s, m + k);
        let r2 = quadratic_roots(s, m - k);
        [r1[0], r1[1], r2[0], r2[1]]
    };
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (o, y) in out.iter_mut().zip(ys.iter()) {
        *o = *y - a / 4.0;
    }
    out
}

/// Newton-polishes a root of `cp`; returns the root and its relative residual.
fn polish(cp: &CharPoly, mut x: Complex64) -> (Complex64, f64) {
    for _ in 0..12 {
        let d = cp.eval_deriv(x);
        if d.norm() == 0.0 {
            break;
        }
        let step = cp.eval(x) / d;
        let next = x - step;
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        if cp.eval(next).norm() > cp.eval(x).norm() {
            break;
        }
        x = next;
        if step.norm() <= 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    let res = cp.eval(x).norm() / cp.term_scale(x).max(f64::MIN_POSITIVE);
    (x, res)
}

/// Eigenvalues of a general real 4x4 matrix: closed-form quartic on the
/// characteristic polynomial, then Newton polish.
pub fn eig4_general(m: &Mat4) -> Result<EigenQuadruple> {
    let cp = char_poly_4x4(m);
    let raw = quartic_roots(&cp);
    let mut roots = [Complex64::new(0.0, 0.0); 4];
    for (r, x) in roots.iter_mut().zip(raw.iter()) {
        let (y, res) = polish(&cp, *x);
        if !(res < 1e-8) {
            let condition = 1.0 / cp.eval_deriv(y).norm().max(f64::MIN_POSITIVE);
            return Err(Error::PolishFailed {
                residual: res,
                condition,
            });
        }
        *r = y;
    }
    Ok(EigenQuadruple::new(roots))
}

/// Membership in the imaginary band `|Re lambda| < 1e-9 (1 + |lambda|)`.
pub fn is_imaginary(z: Complex64) -> bool {
    z.re.abs() < 1e-9 * (1.0 + z.norm())
}

pub fn fd_gradient<F>(f: F, x: &Vec4, h: f64) -> Result<Vec4>
where
    F: Fn(&Vec4) -> Result<f64>,
{
    let mut g = [0.0; 4];
    for i in 0..4 {
        let mut xp = *x;
        let mut xm = *x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(&xp)? - f(&xm)?) / (2.0 * h);
    }
    Ok(g)
}

pub fn fd_hessian<F>(f: F, x: &Vec4, h: f64) -> Result<Mat4>
where
    F: Fn(&Vec4) -> Result<f64>,
{
    let f0 = f(x)?;
    let shifted = |i: usize, si: f64, j: usize, sj: f64| {
        let mut y = *x;
        y[i] += si * h;
        y[j] += sj * h;
        f(&y)
    };
    let mut hm = zeros();
    for i in 0..4 {
        let mut xp = *x;
        let mut xm = *x;
        xp[i] += h;
        xm[i] -= h;
        hm[i][i] = (f(&xp)? - 2.0 * f0 + f(&xm)?) / (h * h);
        for j in (i + 1)..4 {
            let v =
                (shifted(i, 1.0, j, 1.0)? - shifted(i, 1.0, j, -1.0)? - shifted(i, -1.0, j, 1.0)?
                    + shifted(i, -1.0, j, -1.0)?)
                    / (4.0 * h * h);
            hm[i][j] = v;
            hm[j][i] = v;
        }
    }
    Ok(hm)
}

pub fn norm4(v: &Vec4) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot4(a: &Vec4, b: &Vec4) -> f64 {
    (0..4).map(|i| a[i] * b[i]).sum()
}

/// Product of affine factors `a_i + b_i q1 + c_i q2` with its first and
/// second partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineProduct {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d11: f64,
    pub d12: f64,
    pub d22: f64,
}

pub fn affine_product(factors: &[[f64; 3]], q1: f64, q2: f64) -> AffineProduct {
    let vals: Vec<f64> = factors
        .iter()
        .map(|f| f[0] + f[1] * q1 + f[2] * q2)
        .collect();
    let n = factors.len();
    let prod_except = |skip: &[usize]| -> f64 {
        (0..n)
            .filter(|k| !skip.contains(k))
            .map(|k| vals[k])
            .product()
    };
    let mut out = AffineProduct {
        value: prod_except(&[]),
        d1: 0.0,
        d2: 0.0,
        d11: 0.0,
        d12: 0.0,
        d22: 0.0,
    };
    for i in 0..n {
        let pi = prod_except(&[i]);
        out.d1 += factors[i][1] * pi;
        out.d2 += factors[i][2] * pi;
        for k in 0..n {
            if k == i {
                continue;
            }
            let pik = prod_except(&[i, k]);
            out.d11 += factors[i][1] * factors[k][1] * pik;
            out.d12 += factors[i][1] * factors[k][2] * pik;
            out.d22 += factors[i][2] * factors[k][2] * pik;
        }
    }
    out
}
