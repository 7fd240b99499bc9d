//! The compact symplectic 4-manifold cut out of C^8 by six quadrics, its
//! eight Darboux charts, and the reduced coordinates `(j, rho, theta)`.

use std::sync::OnceLock;

use num_complex::Complex64;
use num_rational::Rational64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::delzant::construction_data;
use crate::error::{Error, Result};
use crate::numerics::{omega_st, Mat4, Vec4};

/// Maximal manifold residual accepted for an ambient point.
pub const POINT_TOL: f64 = 1e-10;
/// Moduli below this count as zero when deciding chart membership.
pub const ZERO_TOL: f64 = 1e-9;
/// Negative radicands down to `-RADICAND_TOL` are clamped to zero.
pub const RADICAND_TOL: f64 = 1e-12;

/// A point of C^8, stored as eight complex numbers (`z[0]` is `z_1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[[f64; 2]; 8]", into = "[[f64; 2]; 8]")]
pub struct AmbientPoint {
    pub z: [Complex64; 8],
}

impl From<[[f64; 2]; 8]> for AmbientPoint {
    fn from(v: [[f64; 2]; 8]) -> Self {
        let mut z = [Complex64::new(0.0, 0.0); 8];
        for (zk, p) in z.iter_mut().zip(v.iter()) {
            *zk = Complex64::new(p[0], p[1]);
        }
        AmbientPoint { z }
    }
}

impl From<AmbientPoint> for [[f64; 2]; 8] {
    fn from(p: AmbientPoint) -> Self {
        let mut v = [[0.0; 2]; 8];
        for (o, zk) in v.iter_mut().zip(p.z.iter()) {
            *o = [zk.re, zk.im];
        }
        v
    }
}

impl AmbientPoint {
    /// Validated constructor: the manifold residual must be below [`POINT_TOL`].
    pub fn new(z: [Complex64; 8]) -> Result<Self> {
        let p = AmbientPoint { z };
        let r = p.max_residual();
        if !(r < POINT_TOL) {
            return Err(Error::NotOnManifold { residual: r });
        }
        Ok(p)
    }

    /// Unchecked constructor for arbitrary vectors of C^8.
    pub fn from_raw(z: [Complex64; 8]) -> Self {
        AmbientPoint { z }
    }

    pub fn from_real(x: [f64; 8]) -> Self {
        let mut z = [Complex64::new(0.0, 0.0); 8];
        for (zk, xk) in z.iter_mut().zip(x.iter()) {
            *zk = Complex64::new(*xk, 0.0);
        }
        AmbientPoint { z }
    }

    pub fn sq(&self) -> [f64; 8] {
        let mut s = [0.0; 8];
        for (sk, zk) in s.iter_mut().zip(self.z.iter()) {
            *sk = zk.norm_sqr();
        }
        s
    }

    pub fn moduli(&self) -> [f64; 8] {
        let mut s = [0.0; 8];
        for (sk, zk) in s.iter_mut().zip(self.z.iter()) {
            *sk = zk.norm();
        }
        s
    }

    pub fn residuals(&self) -> [f64; 6] {
        manifold_residuals(&self.z)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn max_abs_diff(&self, other: &AmbientPoint) -> f64 {
        self.z
            .iter()
            .zip(other.z.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

fn equations() -> &'static [([i64; 8], i64); 6] {
    static EQ: OnceLock<[([i64; 8], i64); 6]> = OnceLock::new();
    EQ.get_or_init(|| construction_data().manifold_equations())
}

/// The six residuals `lhs - rhs` of the defining quadrics.
pub fn manifold_residuals(z: &[Complex64; 8]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (o, (w, rhs)) in out.iter_mut().zip(equations().iter()) {
        let lhs: f64 = (0..8).map(|k| w[k] as f64 * z[k].norm_sqr()).sum();
        *o = lhs - *rhs as f64;
    }
    out
}

/// Acts by the subtorus with angles `t`: `z_k -> exp(i <ell_k, t>) z_k`.
pub fn apply_torus_action(p: &AmbientPoint, t: &[f64; 6]) -> AmbientPoint {
    let ell = construction_data().ell;
    let mut z = p.z;
    for k in 0..8 {
        let phase: f64 = (0..6).map(|c| ell[k][c] as f64 * t[c]).sum();
        z[k] *= Complex64::from_polar(1.0, phase);
    }
    AmbientPoint { z }
}

/// Time-`s` flow of `J = |z_1|^2 / 2`.
pub fn j_flow(p: &AmbientPoint, s: f64) -> AmbientPoint {
    let mut z = p.z;
    z[0] *= Complex64::from_polar(1.0, -s);
    AmbientPoint { z }
}

/// Zero-based indices of the six entries made positive real in chart `nu`.
pub fn gauge_indices(nu: usize) -> [usize; 6] {
    let mut g = [0; 6];
    for (i, gi) in g.iter_mut().enumerate() {
        *gi = (nu - 1 + 2 + i) % 8;
    }
    g
}

/// Zero-based indices of the two free entries `z_nu, z_{nu+1}`.
pub fn free_indices(nu: usize) -> [usize; 2] {
    [nu - 1, nu % 8]
}

fn check_nu(nu: usize) -> Result<()> {
    if (1..=8).contains(&nu) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "chart index {nu} is not in 1..=8"
        )))
    }
}

pub type RatMat6 = [[Rational64; 6]; 6];

fn invert6(m: &RatMat6) -> Option<RatMat6> {
    let zero = Rational64::from_integer(0);
    let one = Rational64::from_integer(1);
    let mut a = *m;
    let mut inv = [[zero; 6]; 6];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = one;
    }
    for col in 0..6 {
        let piv = (col..6).find(|&r| a[r][col] != zero)?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for k in 0..6 {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..6 {
            if r != col && a[r][col] != zero {
                let f = a[r][col];
                for k in 0..6 {
                    let (ack, ick) = (a[col][k], inv[col][k]);
                    a[r][k] -= f * ack;
                    inv[r][k] -= f * ick;
                }
            }
        }
    }
    Some(inv)
}

fn det6(m: &RatMat6) -> Rational64 {
    let zero = Rational64::from_integer(0);
    let mut a = *m;
    let mut det = Rational64::from_integer(1);
    for col in 0..6 {
        let Some(piv) = (col..6).find(|&r| a[r][col] != zero) else {
            return zero;
        };
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        det *= a[col][col];
        for r in (col + 1)..6 {
            let f = a[r][col] / a[col][col];
            for k in col..6 {
                let v = a[col][k];
                a[r][k] -= f * v;
            }
        }
    }
    det
}

/// Squared modulus of a gauge entry as an affine function
/// `alpha + beta |z_nu|^2 + delta |z_{nu+1}|^2` of the free entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radicand {
    pub index: usize,
    pub alpha: Rational64,
    pub beta: Rational64,
    pub delta: Rational64,
}

impl Radicand {
    pub fn eval(&self, q1: f64, q2: f64) -> f64 {
        r2f(self.alpha) + r2f(self.beta) * q1 + r2f(self.delta) * q2
    }
}

fn r2f(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone)]
pub struct ChartData {
    pub nu: usize,
    pub gauge: [usize; 6],
    /// Inverse of the 6x6 weight matrix restricted to the gauge entries.
    pub weight_inverse: RatMat6,
    pub weight_det: Rational64,
    pub radicands: [Radicand; 6],
}

fn build_chart(nu: usize) -> ChartData {
    let data = construction_data();
    let gauge = gauge_indices(nu);
    let [f1, f2] = free_indices(nu);
    let zero = Rational64::from_integer(0);

    let mut w = [[zero; 6]; 6];
    for (r, &k) in gauge.iter().enumerate() {
        for c in 0..6 {
            w[r][c] = Rational64::from_integer(data.ell[k][c]);
        }
    }
    let weight_inverse = invert6(&w).expect("gauge weight matrix is invertible");
    let weight_det = det6(&w);

    let eqs = data.manifold_equations();
    let mut a = [[zero; 6]; 6];
    for (e, (wts, _)) in eqs.iter().enumerate() {
        for (c, &k) in gauge.iter().enumerate() {
            a[e][c] = Rational64::from_integer(wts[k]);
        }
    }
    let ainv = invert6(&a).expect("manifold equations are solvable for the gauge entries");
    let mut radicands = [Radicand {
        index: 0,
        alpha: zero,
        beta: zero,
        delta: zero,
    }; 6];
    for (c, rad) in radicands.iter_mut().enumerate() {
        let mut alpha = zero;
        let mut beta = zero;
        let mut delta = zero;
        for (e, (wts, rhs)) in eqs.iter().enumerate() {
            alpha += ainv[c][e] * *rhs;
            beta -= ainv[c][e] * wts[f1];
            delta -= ainv[c][e] * wts[f2];
        }
        *rad = Radicand {
            index: gauge[c],
            alpha,
            beta,
            delta,
        };
    }
    ChartData {
        nu,
        gauge,
        weight_inverse,
        weight_det,
        radicands,
    }
}

pub fn chart_data(nu: usize) -> &'static ChartData {
    static CHARTS: OnceLock<Vec<ChartData>> = OnceLock::new();
    &CHARTS.get_or_init(|| (1..=8).map(build_chart).collect())[nu - 1]
}

/// Darboux coordinates `(x_nu, y_nu, x_{nu+1}, y_{nu+1})` in chart `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub nu: usize,
    pub coords: Vec4,
}

impl ChartPoint {
    pub fn new(nu: usize, coords: Vec4) -> Result<Self> {
        check_nu(nu)?;
        Ok(ChartPoint { nu, coords })
    }

    /// `(|z_nu|^2, |z_{nu+1}|^2)`.
    pub fn free_squares(&self) -> (f64, f64) {
        let c = self.coords;
        (c[0] * c[0] + c[1] * c[1], c[2] * c[2] + c[3] * c[3])
    }

    /// Values of the six gauge radicands, keyed by zero-based entry index.
    pub fn radicands(&self) -> [(usize, f64); 6] {
        let (q1, q2) = self.free_squares();
        let mut out = [(0, 0.0); 6];
        for (o, r) in out.iter_mut().zip(chart_data(self.nu).radicands.iter()) {
            *o = (r.index, r.eval(q1, q2));
        }
        out
    }

    /// Smallest gauge radicand; positive exactly on the open chart domain.
    pub fn min_radicand(&self) -> f64 {
        self.radicands()
            .iter()
            .fold(f64::INFINITY, |m, r| m.min(r.1))
    }
}

pub fn from_chart(cp: &ChartPoint) -> Result<AmbientPoint> {
    check_nu(cp.nu)?;
    let mut z = [Complex64::new(0.0, 0.0); 8];
    let [f1, f2] = free_indices(cp.nu);
    z[f1] = Complex64::new(cp.coords[0], cp.coords[1]);
    z[f2] = Complex64::new(cp.coords[2], cp.coords[3]);
    for (k, s) in cp.radicands() {
        if !s.is_finite() || s < -RADICAND_TOL {
            return Err(Error::Domain(format!(
                "chart {}: radicand for |z{}|^2 is {s:.6e} < 0",
                cp.nu,
                k + 1
            )));
        }
        z[k] = Complex64::new(s.max(0.0).sqrt(), 0.0);
    }
    Ok(AmbientPoint { z })
}

/// Charts containing `p`: all `nu` whose gauge entries are nonzero.
pub fn membership(p: &AmbientPoint) -> Vec<usize> {
    (1..=8)
        .filter(|&nu| gauge_indices(nu).iter().all(|&k| p.z[k].norm() > ZERO_TOL))
        .collect()
}

/// The chart in which `p` sits furthest from the chart boundary.
pub fn best_chart(p: &AmbientPoint) -> Result<usize> {
    membership(p)
        .into_iter()
        .map(|nu| {
            let m = gauge_indices(nu)
                .iter()
                .fold(f64::INFINITY, |m, &k| m.min(p.z[k].norm()));
            (nu, m)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(nu, _)| nu)
        .ok_or_else(|| Error::InvalidPoint("point lies in no chart".into()))
}

pub fn to_chart(p: &AmbientPoint, nu: usize) -> Result<ChartPoint> {
    check_nu(nu)?;
    let cd = chart_data(nu);
    if cd.gauge.iter().any(|&k| p.z[k].norm() <= ZERO_TOL) {
        return Err(Error::NotInChart { nu });
    }
    let phases: Vec<f64> = cd.gauge.iter().map(|&k| p.z[k].arg()).collect();
    let mut t = [0.0; 6];
    for (c, tc) in t.iter_mut().enumerate() {
        *tc = -(0..6)
            .map(|r| r2f(cd.weight_inverse[c][r]) * phases[r])
            .sum::<f64>();
    }
    let q = apply_torus_action(p, &t);
    let [f1, f2] = free_indices(nu);
    Ok(ChartPoint {
        nu,
        coords: [q.z[f1].re, q.z[f1].im, q.z[f2].re, q.z[f2].im],
    })
}

/// One-based indices of the vanishing entries; at most two, and adjacent mod 8.
pub fn vanishing_pattern(p: &AmbientPoint) -> Result<Vec<usize>> {
    let zeros: Vec<usize> = (0..8).filter(|&k| p.z[k].norm() <= ZERO_TOL).collect();
    let ok = match zeros.as_slice() {
        [] | [_] => true,
        [a, b] => b - a == 1 || (*a == 0 && *b == 7),
        _ => false,
    };
    if !ok {
        let list: Vec<String> = zeros.iter().map(|k| format!("z{}", k + 1)).collect();
        return Err(Error::InvalidPoint(format!(
            "entries {} vanish simultaneously",
            list.join(", ")
        )));
    }
    Ok(zeros.into_iter().map(|k| k + 1).collect())
}

/// Jacobian of the chart embedding R^4 -> R^16, rows ordered
/// `(Re z_1, Im z_1, ..., Re z_8, Im z_8)`. Requires an interior point.
pub fn embedding_jacobian(cp: &ChartPoint) -> Result<[[f64; 4]; 16]> {
    check_nu(cp.nu)?;
    let mut jac = [[0.0; 4]; 16];
    let [f1, f2] = free_indices(cp.nu);
    jac[2 * f1][0] = 1.0;
    jac[2 * f1 + 1][1] = 1.0;
    jac[2 * f2][2] = 1.0;
    jac[2 * f2 + 1][3] = 1.0;
    let (q1, q2) = cp.free_squares();
    let c = cp.coords;
    for r in chart_data(cp.nu).radicands.iter() {
        let s = r.eval(q1, q2);
        if !(s > RADICAND_TOL) {
            return Err(Error::Domain(format!(
                "chart {}: point is on the boundary (|z{}|^2 = {s:.3e})",
                cp.nu,
                r.index + 1
            )));
        }
        let x = s.sqrt();
        let (b, d) = (r2f(r.beta), r2f(r.delta));
        jac[2 * r.index] = [b * c[0] / x, b * c[1] / x, d * c[2] / x, d * c[3] / x];
    }
    Ok(jac)
}

/// Pullback of the ambient form `sum dx_k ^ dy_k` through the chart embedding.
pub fn symplectic_form_in_chart(cp: &ChartPoint) -> Result<Mat4> {
    let jac = embedding_jacobian(cp)?;
    let mut w = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for k in 0..8 {
                // Block [[0,-1],[1,0]] on (x_k, y_k).
                s += -jac[2 * k][a] * jac[2 * k + 1][b] + jac[2 * k + 1][a] * jac[2 * k][b];
            }
            w[a][b] = s;
        }
    }
    Ok(w)
}

/// Checks that the pulled-back form equals the standard one within `tol`.
pub fn check_darboux(cp: &ChartPoint, tol: f64) -> Result<f64> {
    let w = symplectic_form_in_chart(cp)?;
    let err = crate::numerics::max_abs_diff(&w, &omega_st());
    if err > tol {
        return Err(Error::Domain(format!(
            "chart {} is not Darboux here (error {err:.3e})",
            cp.nu
        )));
    }
    Ok(err)
}

/// Coordinates `(j, rho, theta)` on the complement of `{z_1 z_2 z_5 = 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedCoords {
    pub j: f64,
    pub rho: f64,
    pub theta: f64,
}

/// Admissible interval of `rho` at level `j`, from the positivity of the
/// chart-1 radicands.
pub fn admissible_rho_range(j: f64) -> Result<(f64, f64)> {
    if !(0.0..=3.0).contains(&j) {
        return Err(Error::Domain(format!("j = {j} is outside [0, 3]")));
    }
    let lo = 0f64.max(2.0 * j - 2.0).max(4.0 * j - 6.0);
    let hi = 8f64.min(4.0 + 2.0 * j).min(2.0 + 4.0 * j);
    Ok((lo.sqrt(), hi.sqrt()))
}

pub fn from_reduced(rc: &ReducedCoords) -> Result<AmbientPoint> {
    if !(0.0..=3.0).contains(&rc.j) {
        return Err(Error::Domain(format!("j = {} is outside [0, 3]", rc.j)));
    }
    if rc.rho < 0.0 {
        return Err(Error::Domain(format!("rho = {} is negative", rc.rho)));
    }
    let cp = ChartPoint {
        nu: 1,
        coords: [
            (2.0 * rc.j).sqrt(),
            0.0,
            rc.rho * rc.theta.cos(),
            rc.rho * rc.theta.sin(),
        ],
    };
    from_chart(&cp)
}

/// Gauge-invariant reduced coordinates; `theta` is read off from `arg Z`.
pub fn to_reduced(p: &AmbientPoint) -> ReducedCoords {
    let zz = crate::momentum::z_function(p);
    ReducedCoords {
        j: p.z[0].norm_sqr() / 2.0,
        rho: p.z[1].norm(),
        theta: -zz.arg(),
    }
}

/// Uniform sample of chart coordinates whose radicands all exceed `margin`.
pub fn random_interior_chart_point<R: Rng + ?Sized>(
    nu: usize,
    rng: &mut R,
    margin: f64,
) -> ChartPoint {
    loop {
        let mut c = [0.0; 4];
        for ck in c.iter_mut() {
            *ck = rng.gen_range(-3.0..3.0);
        }
        let cp = ChartPoint { nu, coords: c };
        if cp.min_radicand() > margin {
            return cp;
        }
    }
}

/// A generic point: interior chart sample moved by a random subtorus element.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, margin: f64) -> AmbientPoint {
    let nu = rng.gen_range(1..=8);
    let cp = random_interior_chart_point(nu, rng, margin);
    let p = from_chart(&cp).expect("interior chart point");
    let mut t = [0.0; 6];
    for tk in t.iter_mut() {
        *tk = rng.gen_range(0.0..std::f64::consts::TAU);
    }
    apply_torus_action(&p, &t)
}
