//! The integrable family `F_t = (J, H_t)`, its reduced form in `(j, rho, theta)`
//! and sampling of the image `F_t(M)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{admissible_rho_range, from_reduced, AmbientPoint, ReducedCoords};
use crate::numerics::affine_product;

pub const DEFAULT_GAMMA: f64 = 1.0 / 60.0;
/// The coupling has to stay strictly below this bound.
pub const GAMMA_BOUND: f64 = 1.0 / 48.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub t: f64,
    pub gamma: f64,
}

impl Params {
    pub fn new(t: f64, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParams(format!("t = {t} is outside [0, 1]")));
        }
        if !(gamma > 0.0 && gamma < GAMMA_BOUND) {
            return Err(Error::InvalidParams(format!(
                "gamma = {gamma} is outside (0, 1/48)"
            )));
        }
        Ok(Params { t, gamma })
    }

    pub fn with_t(&self, t: f64) -> Result<Self> {
        Params::new(t, self.gamma)
    }
}

pub fn j_value(p: &AmbientPoint) -> f64 {
    p.z[0].norm_sqr() / 2.0
}

pub fn h_value(p: &AmbientPoint) -> f64 {
    p.z[2].norm_sqr() / 2.0
}

/// `conj(z2 z3 z4) z6 z7 z8`.
pub fn z_function(p: &AmbientPoint) -> Complex64 {
    let z = &p.z;
    (z[1] * z[2] * z[3]).conj() * z[5] * z[6] * z[7]
}

pub fn x_function(p: &AmbientPoint) -> f64 {
    z_function(p).re
}

pub fn y_function(p: &AmbientPoint) -> f64 {
    z_function(p).im
}

pub fn ht_value(p: &AmbientPoint, params: &Params) -> f64 {
    (1.0 - 2.0 * params.t) * h_value(p) + params.t * params.gamma * x_function(p)
}

pub fn momentum_map(p: &AmbientPoint, params: &Params) -> [f64; 2] {
    [j_value(p), ht_value(p, params)]
}

/// The sextic `h(h+j-1)(h-j+2)(5-h-j)(3-h)(2-h+j)` whose 64-fold is `X^2 + Y^2`.
pub fn sextic(j: f64, h: f64) -> f64 {
    h * (h + j - 1.0) * (h - j + 2.0) * (-h - j + 5.0) * (3.0 - h) * (2.0 - h + j)
}

/// Both sides of the identity `X^2 + Y^2 = 64 sextic(J, H)`.
pub fn identity_x2y2(p: &AmbientPoint) -> (f64, f64) {
    let z = z_function(p);
    (z.norm_sqr(), 64.0 * sextic(j_value(p), h_value(p)))
}

/// `X(j, h) = 8 sqrt(sextic)`, the radius of the level circle of `(X, Y)`.
pub fn profile_x(j: f64, h: f64) -> Result<f64> {
    let s = sextic(j, h);
    if s < -1e-12 {
        return Err(Error::Domain(format!(
            "({j}, {h}) lies outside the image of (J, H)"
        )));
    }
    Ok(8.0 * s.max(0.0).sqrt())
}

/// Interval of `h` over which `profile_x(j, .)` is defined.
pub fn h_range(j: f64) -> Result<(f64, f64)> {
    if !(0.0..=3.0).contains(&j) {
        return Err(Error::Domain(format!("j = {j} is outside [0, 3]")));
    }
    Ok((
        0f64.max(1.0 - j).max(j - 2.0),
        3f64.min(2.0 + j).min(5.0 - j),
    ))
}

/// Points `(X cos phi, X sin phi, h)` of the surface of revolution over a `j`-slice.
pub fn revolution_mesh(j: f64, n_h: usize, n_phi: usize) -> Result<Vec<[f64; 3]>> {
    let (lo, hi) = h_range(j)?;
    let mut out = Vec::with_capacity(n_h * n_phi);
    for i in 0..n_h {
        let h = if n_h == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n_h - 1) as f64
        };
        let x = profile_x(j, h)?;
        for k in 0..n_phi {
            let phi = std::f64::consts::TAU * k as f64 / n_phi as f64;
            out.push([x * phi.cos(), x * phi.sin(), h]);
        }
    }
    Ok(out)
}

fn g_factors(j: f64) -> [[f64; 3]; 5] {
    // Affine in R = rho^2.
    [
        [2.0 - 2.0 * j, 1.0, 0.0],
        [6.0 - 4.0 * j, 1.0, 0.0],
        [8.0, -1.0, 0.0],
        [4.0 + 2.0 * j, -1.0, 0.0],
        [2.0 + 4.0 * j, -1.0, 0.0],
    ]
}

/// `g(rho, j)` with its first two `rho`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GReduced {
    pub g: f64,
    pub g_rho: f64,
    pub g_rhorho: f64,
}

pub fn g_reduced(rho: f64, j: f64) -> GReduced {
    let r = rho * rho;
    let a = affine_product(&g_factors(j), r, 0.0);
    GReduced {
        g: a.value,
        g_rho: 2.0 * rho * a.d1,
        g_rhorho: 2.0 * a.d1 + 4.0 * r * a.d11,
    }
}

/// `H_t` in reduced coordinates.
pub fn reduced_height(rc: &ReducedCoords, params: &Params) -> Result<f64> {
    let (lo, hi) = admissible_rho_range(rc.j)?;
    if rc.rho < lo - 1e-12 || rc.rho > hi + 1e-12 {
        return Err(Error::Domain(format!(
            "rho = {} is outside [{lo}, {hi}] at j = {}",
            rc.rho, rc.j
        )));
    }
    Ok(reduced_height_unchecked(rc.rho, rc.j, rc.theta, params))
}

pub(crate) fn reduced_height_unchecked(rho: f64, j: f64, theta: f64, params: &Params) -> f64 {
    let g = g_reduced(rho, j).g.max(0.0);
    (1.0 - 2.0 * params.t) / 2.0 * (2.0 - 2.0 * j + rho * rho)
        + params.gamma * params.t * rho * theta.cos() * g.sqrt()
}

/// `d/d rho` of the reduced height; singular where `g` vanishes.
pub fn reduced_height_drho(rho: f64, j: f64, theta: f64, params: &Params) -> f64 {
    let gr = g_reduced(rho, j);
    let sg = gr.g.max(0.0).sqrt();
    (1.0 - 2.0 * params.t) * rho
        + params.gamma * params.t * theta.cos() * (sg + rho * gr.g_rho / (2.0 * sg))
}

/// Deterministic sample of `F_t(M)`: a `(j, rho^2, theta)` grid pushed through
/// the ambient model, plus the images of the four `t`-independent fixed points.
pub fn momentum_image_samples(
    params: &Params,
    nj: usize,
    nrho: usize,
    ntheta: usize,
) -> Result<Vec<[f64; 2]>> {
    if nj < 2 || nrho < 2 || ntheta < 1 {
        return Err(Error::InvalidParams(
            "sampling grid needs nj >= 2, nrho >= 2, ntheta >= 1".into(),
        ));
    }
    let rows: Result<Vec<Vec<[f64; 2]>>> = (0..nj)
        .into_par_iter()
        .map(|i| {
            let j = 3.0 * i as f64 / (nj - 1) as f64;
            let (lo, hi) = admissible_rho_range(j)?;
            let (lo2, hi2) = (lo * lo, hi * hi);
            let mut row = Vec::with_capacity(nrho * ntheta);
            for k in 0..nrho {
                let rho = (lo2 + (hi2 - lo2) * k as f64 / (nrho - 1) as f64).sqrt();
                for l in 0..ntheta {
                    let theta = std::f64::consts::TAU * l as f64 / ntheta as f64;
                    let p = from_reduced(&ReducedCoords { j, rho, theta })?;
                    row.push(momentum_map(&p, params));
                }
            }
            Ok(row)
        })
        .collect();
    let mut out: Vec<[f64; 2]> = rows?.into_iter().flatten().collect();
    for fp in crate::critical::static_fixed_points() {
        out.push(momentum_map(&fp.1, params));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceBounds {
    pub j: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// True when each extremum was confirmed either at an endpoint or by a
    /// sign change of the `rho`-derivative.
    pub certified: bool,
}

/// Minimum of `sign * phi` over `[lo, hi]` where `phi` is the reduced height
/// at `theta = 0` (`sign = -1`) or `theta = pi` (`sign = +1`).
fn extremize(j: f64, lo: f64, hi: f64, theta: f64, sign: f64, params: &Params) -> (f64, f64, bool) {
    let phi = |r: f64| sign * reduced_height_unchecked(r, j, theta, params);
    if hi - lo < 1e-14 {
        return (lo, phi(lo), true);
    }
    const N: usize = 256;
    let xs: Vec<f64> = (0..=N)
        .map(|i| lo + (hi - lo) * i as f64 / N as f64)
        .collect();
    let (ibest, _) = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (i, phi(x)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, phi(lo)));
    let mut a = xs[ibest.saturating_sub(1)];
    let mut b = xs[(ibest + 1).min(N)];
    // Golden-section search.
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    while b - a > 1e-12 * (1.0 + hi) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = phi(d);
        }
    }
    let mut x = 0.5 * (a + b);
    let mut certified = false;
    // Bisection on the derivative when the optimum is interior.
    let dphi = |r: f64| sign * reduced_height_drho(r, j, theta, params);
    let (bl, br) = (xs[ibest.saturating_sub(1)], xs[(ibest + 1).min(N)]);
    if bl > lo && br < hi {
        let (mut l, mut r) = (bl, br);
        let (dl, dr) = (dphi(l), dphi(r));
        if dl < 0.0 && dr > 0.0 {
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                if dphi(m) < 0.0 {
                    l = m;
                } else {
                    r = m;
                }
                if r - l < 1e-15 * (1.0 + hi) {
                    break;
                }
            }
            x = 0.5 * (l + r);
            certified = true;
        }
    }
    let mut best = (x, phi(x));
    for e in [lo, hi] {
        let v = phi(e);
        if v < best.1 {
            best = (e, v);
            certified = true;
        }
    }
    if best.0 == lo || best.0 == hi {
        certified = true;
    }
    (best.0, best.1, certified)
}

/// `min` and `max` of `H_t` on the slice `J = j`. The minimum is attained at
/// `theta = pi` and the maximum at `theta = 0`, which reduces both to
/// one-dimensional problems in `rho`.
pub fn image_slice_bounds(params: &Params, j: f64) -> Result<SliceBounds> {
    let (lo, hi) = admissible_rho_range(j)?;
    let (rmin, vmin, c1) = extremize(j, lo, hi, std::f64::consts::PI, 1.0, params);
    let (rmax, vmax, c2) = extremize(j, lo, hi, 0.0, -1.0, params);
    Ok(SliceBounds {
        j,
        h_min: vmin,
        h_max: -vmax,
        rho_min: rmin,
        rho_max: rmax,
        certified: c1 && c2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_at_unit() {
        assert!((profile_x(1.0, 1.0).unwrap() - 8.0 * 24f64.sqrt()).abs() < 1e-12);
        assert!(profile_x(0.0, 2.5).is_err());
    }

    #[test]
    fn slice_bounds_at_t0() {
        let p = Params::new(0.0, DEFAULT_GAMMA).unwrap();
        let b = image_slice_bounds(&p, 1.5).unwrap();
        assert!(b.h_min.abs() < 1e-12 && (b.h_max - 3.0).abs() < 1e-12);
        let b = image_slice_bounds(&p, 0.0).unwrap();
        assert!((b.h_min - 1.0).abs() < 1e-12 && (b.h_max - 2.0).abs() < 1e-12);
    }

    #[test]
    fn params_rejected() {
        assert!(Params::new(0.5, 0.03).is_err());
        assert!(Params::new(1.5, 0.01).is_err());
    }
}
