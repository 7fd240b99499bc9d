//! Fibres of `F_t`: the closed-form double-pinched torus over `(1, 0)` at
//! `t = 1/2`, a numeric sampler for arbitrary values, and mesh export.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::critical::{ht_jet, j_jet, static_fixed_points, FixedPointLabel};
use crate::error::{Error, Result};
use crate::manifold::{
    admissible_rho_range, best_chart, from_reduced, j_flow, to_chart, AmbientPoint, ReducedCoords,
};
use crate::momentum::{g_reduced, momentum_map, z_function, Params};
use crate::numerics::norm4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sheet {
    Plus,
    Minus,
}

impl Sheet {
    pub fn sign(self) -> f64 {
        match self {
            Sheet::Plus => 1.0,
            Sheet::Minus => -1.0,
        }
    }
}

const PINCH_RADIUS_SQ: f64 = 6.0;

/// Point of the `(1, 0)` fibre at `t = 1/2`, for `r` in `[0, sqrt 6]`.
pub fn pinched_fibre_point(r: f64, theta: f64, sheet: Sheet) -> Result<AmbientPoint> {
    if !(0.0..=PINCH_RADIUS_SQ.sqrt() + 1e-14).contains(&r) {
        return Err(Error::Domain(format!("r = {r} is outside [0, sqrt 6]")));
    }
    let mut r2 = (r * r).min(PINCH_RADIUS_SQ);
    if PINCH_RADIUS_SQ - r2 < 1e-12 {
        r2 = PINCH_RADIUS_SQ;
    }
    let re = |x: f64| Complex64::new(x.max(0.0).sqrt(), 0.0);
    let e = Complex64::from_polar(1.0, theta);
    let z7 = Complex64::new(0.0, sheet.sign() * r) * e.conj();
    Ok(AmbientPoint::from_raw([
        re(2.0),
        re(6.0 - r2),
        re(6.0 - r2),
        re(8.0 - r2),
        re(4.0),
        re(2.0 + r2),
        z7,
        e * r,
    ]))
}

/// Equivalence test under the subtorus: equal moduli and equal `Z`.
pub fn gauge_equivalent(p: &AmbientPoint, q: &AmbientPoint, tol: f64) -> bool {
    let (a, b) = (p.moduli(), q.moduli());
    a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
        && (z_function(p) - z_function(q)).norm() <= tol
}

fn check_pinch_request(value: [f64; 2], params: &Params) -> Result<[FixedPointLabel; 2]> {
    if (params.t - 0.5).abs() > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "double-pinched fibres exist only at t = 1/2, got t = {}",
            params.t
        )));
    }
    if value[1].abs() <= 1e-12 && (value[0] - 1.0).abs() <= 1e-12 {
        Ok([FixedPointLabel::A, FixedPointLabel::B])
    } else if value[1].abs() <= 1e-12 && (value[0] - 2.0).abs() <= 1e-12 {
        Ok([FixedPointLabel::C, FixedPointLabel::D])
    } else {
        Err(Error::InvalidParams(format!(
            "({}, {}) is not a focus-focus value; use (1,0) or (2,0)",
            value[0], value[1]
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublePinchReport {
    pub value: [f64; 2],
    pub pinch_labels: Vec<FixedPointLabel>,
    pub samples_checked: usize,
    pub rank_zero_samples: usize,
    pub max_residual: f64,
    pub max_value_error: f64,
    pub failures: Vec<String>,
}

impl DoublePinchReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Rank-zero test on `dF_t` in the chart where `p` is most interior.
fn has_rank_zero(p: &AmbientPoint, params: &Params) -> Result<bool> {
    let nu = best_chart(p)?;
    let cp = to_chart(p, nu)?;
    let dj = norm4(&j_jet(&cp)?.grad);
    let dh = norm4(&ht_jet(&cp, params)?.grad);
    Ok(dj < 1e-8 && dh < 1e-8)
}

/// Checks that `samples` lie on the fibre over `value` and that the only
/// samples where `dF_t` vanishes are the designated pinch points.
pub fn verify_fibre_samples(
    value: [f64; 2],
    params: &Params,
    samples: &[AmbientPoint],
    value_tol: f64,
) -> Result<DoublePinchReport> {
    let designated = check_pinch_request(value, params)?;
    let statics = static_fixed_points();
    let mut report = DoublePinchReport {
        value,
        pinch_labels: Vec::new(),
        samples_checked: samples.len(),
        rank_zero_samples: 0,
        max_residual: 0.0,
        max_value_error: 0.0,
        failures: Vec::new(),
    };
    for label in designated {
        let p = statics
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, p)| *p)
            .expect("static label");
        let f = momentum_map(&p, params);
        let err = (f[0] - value[0]).abs().max((f[1] - value[1]).abs());
        if err > 1e-12 {
            report.failures.push(format!(
                "{label} maps to ({}, {}), not onto the value",
                f[0], f[1]
            ));
        } else if !has_rank_zero(&p, params)? {
            report
                .failures
                .push(format!("{label} is not a rank-zero point"));
        } else {
            report.pinch_labels.push(label);
        }
    }
    for (i, s) in samples.iter().enumerate() {
        let res = s.max_residual();
        report.max_residual = report.max_residual.max(res);
        if !(res < 1e-12) {
            report
                .failures
                .push(format!("sample {i}: manifold residual {res:.3e}"));
            continue;
        }
        let f = momentum_map(s, params);
        let err = (f[0] - value[0]).abs().max((f[1] - value[1]).abs());
        report.max_value_error = report.max_value_error.max(err);
        if !(err < value_tol) {
            report
                .failures
                .push(format!("sample {i}: F_t is off the value by {err:.3e}"));
            continue;
        }
        if has_rank_zero(s, params)? {
            report.rank_zero_samples += 1;
            let known = designated.iter().any(|label| {
                statics
                    .iter()
                    .any(|(l, p)| l == label && gauge_equivalent(p, s, 1e-9))
            });
            if !known {
                report.failures.push(format!(
                    "sample {i}: rank-zero point that is not a designated pinch"
                ));
            }
        }
    }
    Ok(report)
}

/// Samples `n x n` per sheet on the `(1, 0)` fibre; `(2, 0)` uses the numeric sampler.
pub fn verify_double_pinch(value: [f64; 2], params: &Params) -> Result<DoublePinchReport> {
    let designated = check_pinch_request(value, params)?;
    if designated[0] == FixedPointLabel::A {
        const N: usize = 32;
        let mut samples = Vec::with_capacity(2 * N * N);
        for sheet in [Sheet::Plus, Sheet::Minus] {
            for i in 0..N {
                let r = PINCH_RADIUS_SQ.sqrt() * i as f64 / (N - 1) as f64;
                for k in 0..N {
                    samples.push(pinched_fibre_point(r, TAU * k as f64 / N as f64, sheet)?);
                }
            }
        }
        verify_fibre_samples(value, params, &samples, 1e-12)
    } else {
        let fib = fibre_sampler_numeric(value, params, 1024, 0)?;
        let mut samples: Vec<AmbientPoint> = fib.samples.iter().map(|s| s.point).collect();
        // The pinch points themselves sit on the boundary of the reduced chart.
        for (l, p) in static_fixed_points() {
            if designated.contains(&l) {
                samples.push(p);
            }
        }
        verify_fibre_samples(value, params, &samples, 1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FibreSample {
    pub point: AmbientPoint,
    pub rho: f64,
    pub theta: f64,
    /// Angle of the residual `J`-action applied to the reduced point.
    pub torus_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericFibre {
    pub value: [f64; 2],
    pub samples: Vec<FibreSample>,
    pub diagnostic: Option<String>,
}

/// Samples `F_t^{-1}(value)` on the reduced chart. For each `rho` sample the
/// angle `theta` is solved in closed form; for each `theta` sample the radius
/// is found by bracketed bisection. The two sweeps cover each other's
/// degenerate cases. Deterministic for a given `seed`.
pub fn fibre_sampler_numeric(
    value: [f64; 2],
    params: &Params,
    n: usize,
    seed: u64,
) -> Result<NumericFibre> {
    let (j0, h0) = (value[0], value[1]);
    let mut out = NumericFibre {
        value,
        samples: Vec::new(),
        diagnostic: None,
    };
    let Ok((lo, hi)) = admissible_rho_range(j0) else {
        out.diagnostic = Some(format!("j = {j0} is outside the image [0, 3]"));
        return Ok(out);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gt = params.gamma * params.t;
    let kf = (1.0 - 2.0 * params.t) / 2.0;
    let height = |rho: f64, theta: f64| {
        let g = g_reduced(rho, j0).g.max(0.0);
        kf * (2.0 - 2.0 * j0 + rho * rho) + gt * rho * theta.cos() * g.sqrt()
    };
    let mut raw: Vec<(f64, f64)> = Vec::new();

    // Sweep 1: theta from rho.
    for i in 0..n {
        let rho = lo + (hi - lo) * (i as f64 + rng.gen_range(0.0..1.0)) / n as f64;
        let g = g_reduced(rho, j0).g.max(0.0);
        let amp = gt * rho * g.sqrt();
        let base = kf * (2.0 - 2.0 * j0 + rho * rho);
        if amp <= 1e-300 {
            continue;
        }
        let c = (h0 - base) / amp;
        if c.abs() <= 1.0 {
            let th = c.acos();
            raw.push((rho, th));
            if th > 0.0 && th < PI {
                raw.push((rho, TAU - th));
            }
        }
    }

    // Sweep 2: rho from theta.
    const BRACKETS: usize = 256;
    for k in 0..n {
        let theta = TAU * (k as f64 + rng.gen_range(0.0..1.0)) / n as f64;
        let f = |r: f64| height(r, theta) - h0;
        let xs: Vec<f64> = (0..=BRACKETS)
            .map(|i| lo + (hi - lo) * i as f64 / BRACKETS as f64)
            .collect();
        let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        for i in 0..BRACKETS {
            if vs[i] == 0.0 {
                raw.push((xs[i], theta));
                continue;
            }
            if vs[i].signum() == vs[i + 1].signum() || vs[i + 1] == 0.0 {
                continue;
            }
            let (mut l, mut r, mut fl) = (xs[i], xs[i + 1], vs[i]);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                let fm = f(m);
                if fm.signum() == fl.signum() {
                    l = m;
                    fl = fm;
                } else {
                    r = m;
                }
                if r - l < 1e-15 * (1.0 + hi) {
                    break;
                }
            }
            raw.push((0.5 * (l + r), theta));
        }
        if vs[BRACKETS] == 0.0 {
            raw.push((xs[BRACKETS], theta));
        }
    }

    for (rho, theta) in raw {
        let p = from_reduced(&ReducedCoords { j: j0, rho, theta })?;
        let s = rng.gen_range(0.0..TAU);
        let q = j_flow(&p, s);
        let f = momentum_map(&q, params);
        if (f[0] - j0).abs() < 1e-10 && (f[1] - h0).abs() < 1e-10 {
            out.samples.push(FibreSample {
                point: q,
                rho,
                theta,
                torus_angle: s,
            });
        }
    }
    if out.samples.is_empty() {
        out.diagnostic = Some(format!("no preimage of ({j0}, {h0}) found"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshVertex {
    pub sheet: Sheet,
    pub r: f64,
    pub theta: f64,
    pub xyz: [f64; 3],
    pub ambient: AmbientPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinchVertex {
    pub label: FixedPointLabel,
    pub xyz: [f64; 3],
    pub ambient: AmbientPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FibreMesh {
    pub value: [f64; 2],
    pub vertices: Vec<MeshVertex>,
    pub pinch_points: Vec<PinchVertex>,
}

const MESH_MAJOR: f64 = 2.0;
const MESH_MINOR: f64 = 0.6;

/// Immersion in R^3 of a torus whose meridians collapse at `r = 0` and `r = sqrt 6`.
fn immerse(sheet: Sheet, r: f64, theta: f64) -> [f64; 3] {
    let s = r / PINCH_RADIUS_SQ.sqrt();
    let phi = match sheet {
        Sheet::Plus => PI * s,
        Sheet::Minus => TAU - PI * s,
    };
    let a = MESH_MINOR * (PI * s).sin();
    let rad = MESH_MAJOR + a * theta.cos();
    [rad * phi.cos(), rad * phi.sin(), a * theta.sin()]
}

/// Fibre point at mesh parameters `(r, theta)`. Over `(2, 0)` the point is
/// the reduced point `(2, sqrt(8 - r^2), +-pi/2)` moved by the `J`-flow.
fn mesh_point(
    designated: [FixedPointLabel; 2],
    sheet: Sheet,
    r: f64,
    theta: f64,
) -> Result<AmbientPoint> {
    if designated[0] == FixedPointLabel::A {
        pinched_fibre_point(r, theta, sheet)
    } else {
        let rho = (8.0 - r * r).max(0.0).sqrt();
        let p = from_reduced(&ReducedCoords {
            j: 2.0,
            rho,
            theta: sheet.sign() * PI / 2.0,
        })?;
        Ok(j_flow(&p, theta))
    }
}

pub fn fibre_mesh(
    value: [f64; 2],
    params: &Params,
    n_r: usize,
    n_theta: usize,
) -> Result<FibreMesh> {
    let designated = check_pinch_request(value, params)?;
    let rmax = PINCH_RADIUS_SQ.sqrt();
    let mut vertices = Vec::with_capacity(2 * n_r * n_theta);
    for sheet in [Sheet::Plus, Sheet::Minus] {
        for i in 0..n_r {
            let r = rmax * (i + 1) as f64 / (n_r + 1) as f64;
            for k in 0..n_theta {
                let theta = TAU * k as f64 / n_theta as f64;
                vertices.push(MeshVertex {
                    sheet,
                    r,
                    theta,
                    xyz: immerse(sheet, r, theta),
                    ambient: mesh_point(designated, sheet, r, theta)?,
                });
            }
        }
    }
    let statics = static_fixed_points();
    let pinch_points = designated
        .iter()
        .zip([0.0, rmax])
        .map(|(label, r)| PinchVertex {
            label: *label,
            xyz: immerse(Sheet::Plus, r, 0.0),
            ambient: statics
                .iter()
                .find(|(l, _)| l == label)
                .map(|(_, p)| *p)
                .expect("static label"),
        })
        .collect();
    Ok(FibreMesh {
        value,
        vertices,
        pinch_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinch_endpoints() {
        let a = static_fixed_points()[0].1;
        let b = static_fixed_points()[1].1;
        let p0 = pinched_fibre_point(0.0, 0.3, Sheet::Plus).unwrap();
        assert!(p0.max_abs_diff(&a) < 1e-14);
        let p1 = pinched_fibre_point(6f64.sqrt(), 1.1, Sheet::Minus).unwrap();
        assert!(gauge_equivalent(&p1, &b, 1e-12));
    }

    #[test]
    fn wrong_value_rejected() {
        let p = Params::new(0.5, 1.0 / 60.0).unwrap();
        assert!(verify_double_pinch([1.5, 0.0], &p).is_err());
        let p = Params::new(0.4, 1.0 / 60.0).unwrap();
        assert!(verify_double_pinch([1.0, 0.0], &p).is_err());
    }
}
