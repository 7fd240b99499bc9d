//! Rank-zero and rank-one points of `F_t`: the eight fixed points, their
//! Williamson type, the two transition times, and rank-one points on the
//! regular and extremal `J`-levels.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{
    best_chart, chart_data, free_indices, from_chart, from_reduced, to_chart, vanishing_pattern,
    AmbientPoint, ChartPoint, ReducedCoords, RADICAND_TOL,
};
use crate::momentum::{
    g_reduced, ht_value, j_value, reduced_height_drho, reduced_height_unchecked, Params,
};
use crate::numerics::{
    affine_product, char_poly_4x4, dot4, is_imaginary, mat_add, mat_mul, mat_vec, norm4,
    omega_st_inv, scale, solve_biquadratic, zeros, BiquadraticSpectrum, EigenQuadruple, Mat4, Vec4,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SingularityType {
    EllipticElliptic,
    FocusFocus,
    EllipticHyperbolic,
    HyperbolicHyperbolic,
    Degenerate,
    EllipticRegular,
    HyperbolicRegular,
    Regular,
}

impl fmt::Display for SingularityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FixedPointLabel {
    A,
    B,
    C,
    D,
    Pmin,
    Pmax,
    Qmin,
    Qmax,
}

impl FixedPointLabel {
    pub const ALL: [FixedPointLabel; 8] = [
        FixedPointLabel::A,
        FixedPointLabel::B,
        FixedPointLabel::C,
        FixedPointLabel::D,
        FixedPointLabel::Pmin,
        FixedPointLabel::Pmax,
        FixedPointLabel::Qmin,
        FixedPointLabel::Qmax,
    ];

    /// The four points whose type changes with `t`.
    pub fn is_static(&self) -> bool {
        matches!(
            self,
            FixedPointLabel::A | FixedPointLabel::B | FixedPointLabel::C | FixedPointLabel::D
        )
    }
}

impl fmt::Display for FixedPointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for FixedPointLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FixedPointLabel::ALL
            .into_iter()
            .find(|l| l.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown fixed point label {s:?}")))
    }
}

fn real_point(x: [f64; 8]) -> AmbientPoint {
    AmbientPoint::from_real(x)
}

/// The fixed points `A, B, C, D`, which do not move with `t`.
pub fn static_fixed_points() -> [(FixedPointLabel, AmbientPoint); 4] {
    let (s2, s6, r8) = (SQRT_2, 6f64.sqrt(), 2.0 * SQRT_2);
    [
        (
            FixedPointLabel::A,
            real_point([s2, s6, s6, r8, 2.0, s2, 0.0, 0.0]),
        ),
        (
            FixedPointLabel::B,
            real_point([s2, 0.0, 0.0, s2, 2.0, r8, s6, s6]),
        ),
        (
            FixedPointLabel::C,
            real_point([2.0, r8, s6, s6, s2, 0.0, 0.0, s2]),
        ),
        (
            FixedPointLabel::D,
            real_point([2.0, s2, 0.0, 0.0, s2, s6, s6, r8]),
        ),
    ]
}

/// `(2+x)(6+x)(8-x)(4-x)(2-x)`.
pub fn f_poly(x: f64) -> f64 {
    (2.0 + x) * (6.0 + x) * (8.0 - x) * (4.0 - x) * (2.0 - x)
}

pub fn f_poly_exact(x: i64) -> i128 {
    let x = x as i128;
    (2 + x) * (6 + x) * (8 - x) * (4 - x) * (2 - x)
}

pub fn f_poly_deriv(x: f64) -> f64 {
    ((-5.0 * x + 24.0) * x + 132.0) * x * x - 432.0 * x - 160.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Points `(0, 0, u, 0)` of chart 1.
    U,
    /// Points `(0, 0, v, 0)` of chart 5.
    V,
}

impl Family {
    fn sign(self) -> f64 {
        match self {
            Family::U => 1.0,
            Family::V => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    UMinus,
    UPlus,
    VMinus,
    VPlus,
}

impl Branch {
    pub fn family(self) -> Family {
        match self {
            Branch::UMinus | Branch::UPlus => Family::U,
            Branch::VMinus | Branch::VPlus => Family::V,
        }
    }

    pub fn initial(self) -> f64 {
        match self {
            Branch::UMinus | Branch::VPlus => 0.0,
            Branch::UPlus => SQRT_2,
            Branch::VMinus => -SQRT_2,
        }
    }
}

/// Criticality condition for the points `(0, 0, u, 0)` in chart 1 (family U)
/// or chart 5 (family V).
pub fn branch_residual(t: f64, u: f64, gamma: f64, family: Family) -> f64 {
    let w = u * u;
    let f = f_poly(w);
    family.sign() * (1.0 - 2.0 * t) * u * f.max(0.0).sqrt()
        + gamma * t * f
        + gamma * t * w * f_poly_deriv(w)
}

const BRANCH_STEP: f64 = 0.01;
const BRANCH_GUARD: f64 = 0.2;
const BRANCH_RESIDUAL: f64 = 1e-12;

fn branch_root_near(t: f64, guess: f64, gamma: f64, family: Family) -> Option<f64> {
    let lo = (guess - BRANCH_GUARD).max(-SQRT_2);
    let hi = (guess + BRANCH_GUARD).min(SQRT_2);
    let f = |u: f64| branch_residual(t, u, gamma, family);
    const N: usize = 64;
    let xs: Vec<f64> = (0..=N)
        .map(|i| lo + (hi - lo) * i as f64 / N as f64)
        .collect();
    let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    // A sign change that survives bisection down to a few ulps certifies a
    // root even where the residual is steep (near u^2 = 2 for small gamma).
    let mut best: Option<(f64, f64, bool)> = None;
    for i in 0..N {
        let (a, b) = (xs[i], xs[i + 1]);
        let (fa, fb) = (vs[i], vs[i + 1]);
        let (root, certified) = if fa == 0.0 {
            (a, true)
        } else if fb == 0.0 {
            (b, true)
        } else if fa.signum() != fb.signum() {
            let (mut l, mut r, mut fl) = (a, b, fa);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                let fm = f(m);
                if fm == 0.0 {
                    l = m;
                    r = m;
                    break;
                }
                if fm.signum() == fl.signum() {
                    l = m;
                    fl = fm;
                } else {
                    r = m;
                }
                if r - l <= 1e-16 * (1.0 + l.abs()) {
                    break;
                }
            }
            let (fl, fr) = (f(l), f(r));
            let root = if fl.abs() <= fr.abs() { l } else { r };
            (root, r - l <= 4.0 * f64::EPSILON * (1.0 + l.abs()))
        } else {
            continue;
        };
        let d = (root - guess).abs();
        if best.map_or(true, |(_, bd, _)| d < bd) {
            best = Some((root, d, certified));
        }
    }
    best.filter(|&(r, _, certified)| certified || f(r).abs() < BRANCH_RESIDUAL)
        .map(|(r, _, _)| r)
}

/// Continues `branch` from `t = 0` through the sorted `targets`, returning the
/// branch value at each target.
pub fn branch_path(branch: Branch, gamma: f64, targets: &[f64]) -> Result<Vec<f64>> {
    let family = branch.family();
    let mut t_cur = 0.0;
    let mut u_cur = branch.initial();
    let mut out = Vec::with_capacity(targets.len());
    for &target in targets {
        if target < t_cur {
            return Err(Error::InvalidParams("branch targets must be sorted".into()));
        }
        while t_cur < target {
            let mut step = BRANCH_STEP.min(target - t_cur);
            loop {
                let t_next = if t_cur + step >= target {
                    target
                } else {
                    t_cur + step
                };
                match branch_root_near(t_next, u_cur, gamma, family) {
                    Some(u) if (u - u_cur).abs() < BRANCH_GUARD => {
                        t_cur = t_next;
                        u_cur = u;
                        break;
                    }
                    _ => {
                        step /= 2.0;
                        if step < 1e-9 {
                            return Err(Error::NoConvergence(format!(
                                "branch {branch:?} lost at t = {t_cur} (gamma = {gamma})"
                            )));
                        }
                    }
                }
            }
        }
        out.push(u_cur);
    }
    Ok(out)
}

pub fn solve_branch(branch: Branch, params: &Params) -> Result<f64> {
    Ok(branch_path(branch, params.gamma, &[params.t])?[0])
}

pub fn p_point(u: f64) -> Result<AmbientPoint> {
    from_chart(&ChartPoint {
        nu: 1,
        coords: [0.0, 0.0, u, 0.0],
    })
}

pub fn q_point(v: f64) -> Result<AmbientPoint> {
    from_chart(&ChartPoint {
        nu: 5,
        coords: [0.0, 0.0, v, 0.0],
    })
}

pub fn transition_times(gamma: f64) -> (f64, f64) {
    (
        1.0 / (2.0 * (1.0 + 24.0 * gamma)),
        1.0 / (2.0 * (1.0 - 24.0 * gamma)),
    )
}

/// Half-width of the window around each transition time classified as degenerate.
pub const DEGENERATE_WINDOW: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Closed-form derivatives in a chart.

/// Value, gradient and Hessian of a function on chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec4,
    pub hess: Mat4,
}

/// Jet of `|z_k|^2` in chart `nu` (zero-based `k`).
fn square_jet(cp: &ChartPoint, k: usize) -> Jet {
    let [f1, f2] = free_indices(cp.nu);
    let c = cp.coords;
    let mut jet = Jet {
        value: 0.0,
        grad: [0.0; 4],
        hess: zeros(),
    };
    let (q1, q2) = cp.free_squares();
    let (b, d, value) = if k == f1 {
        (1.0, 0.0, q1)
    } else if k == f2 {
        (0.0, 1.0, q2)
    } else {
        let r = chart_data(cp.nu)
            .radicands
            .iter()
            .find(|r| r.index == k)
            .copied()
            .expect("gauge entry");
        let b = *r.beta.numer() as f64 / *r.beta.denom() as f64;
        let d = *r.delta.numer() as f64 / *r.delta.denom() as f64;
        (b, d, r.eval(q1, q2))
    };
    jet.value = value;
    jet.grad = [
        2.0 * b * c[0],
        2.0 * b * c[1],
        2.0 * d * c[2],
        2.0 * d * c[3],
    ];
    jet.hess[0][0] = 2.0 * b;
    jet.hess[1][1] = 2.0 * b;
    jet.hess[2][2] = 2.0 * d;
    jet.hess[3][3] = 2.0 * d;
    jet
}

fn check_in_chart(cp: &ChartPoint) -> Result<()> {
    if !(1..=8).contains(&cp.nu) {
        return Err(Error::InvalidParams(format!(
            "chart index {} is not in 1..=8",
            cp.nu
        )));
    }
    for (k, s) in cp.radicands() {
        if s < -RADICAND_TOL {
            return Err(Error::Domain(format!(
                "chart {}: radicand for |z{}|^2 is {s:.6e} < 0",
                cp.nu,
                k + 1
            )));
        }
    }
    Ok(())
}

/// Closed-form jet of `J` in chart `nu`.
pub fn j_jet(cp: &ChartPoint) -> Result<Jet> {
    check_in_chart(cp)?;
    let s = square_jet(cp, 0);
    Ok(Jet {
        value: s.value / 2.0,
        grad: s.grad.map(|x| x / 2.0),
        hess: scale(&s.hess, 0.5),
    })
}

// Zero-based indices entering Z = conj(z2 z3 z4) z6 z7 z8.
const Z_CONJ: [usize; 3] = [1, 2, 3];
const Z_PLAIN: [usize; 3] = [5, 6, 7];

/// Closed-form jet of `H_t` in chart `nu`, written as `K + gamma t L sqrt(M)`
/// with `K` affine in the squared moduli, `L` the real part of the product of
/// the chart factors of `Z`, and `M` the product of the remaining radicands.
pub fn ht_jet(cp: &ChartPoint, params: &Params) -> Result<Jet> {
    check_in_chart(cp)?;
    let [f1, f2] = free_indices(cp.nu);
    let c = cp.coords;
    let (q1, q2) = cp.free_squares();

    // K = (1 - 2t) |z3|^2 / 2.
    let s3 = square_jet(cp, 2);
    let kf = (1.0 - 2.0 * params.t) / 2.0;

    // L and its derivatives.
    let in_z = |k: usize| Z_CONJ.contains(&k) || Z_PLAIN.contains(&k);
    let conj_sign = |k: usize| if Z_CONJ.contains(&k) { -1.0 } else { 1.0 };
    let mut l_val = 0.0;
    let mut l_grad = [0.0; 4];
    let mut l_hess = zeros();
    match (in_z(f1), in_z(f2)) {
        (true, true) => {
            let ss = conj_sign(f1) * conj_sign(f2);
            l_val = c[0] * c[2] - ss * c[1] * c[3];
            l_grad = [c[2], -ss * c[3], c[0], -ss * c[1]];
            l_hess[0][2] = 1.0;
            l_hess[2][0] = 1.0;
            l_hess[1][3] = -ss;
            l_hess[3][1] = -ss;
        }
        (true, false) => {
            l_val = c[0];
            l_grad[0] = 1.0;
        }
        (false, true) => {
            l_val = c[2];
            l_grad[2] = 1.0;
        }
        (false, false) => {}
    }

    // M as a product of affine radicands.
    let factors: Vec<[f64; 3]> = chart_data(cp.nu)
        .radicands
        .iter()
        .filter(|r| in_z(r.index))
        .map(|r| {
            let f = |x: num_rational::Rational64| *x.numer() as f64 / *x.denom() as f64;
            [f(r.alpha), f(r.beta), f(r.delta)]
        })
        .collect();
    let ap = affine_product(&factors, q1, q2);
    let dq1 = [2.0 * c[0], 2.0 * c[1], 0.0, 0.0];
    let dq2 = [0.0, 0.0, 2.0 * c[2], 2.0 * c[3]];
    let mut m_grad = [0.0; 4];
    let mut m_hess = zeros();
    for i in 0..4 {
        m_grad[i] = ap.d1 * dq1[i] + ap.d2 * dq2[i];
        for j in 0..4 {
            m_hess[i][j] = ap.d11 * dq1[i] * dq1[j]
                + ap.d12 * (dq1[i] * dq2[j] + dq2[i] * dq1[j])
                + ap.d22 * dq2[i] * dq2[j];
        }
    }
    for i in 0..2 {
        m_hess[i][i] += 2.0 * ap.d1;
        m_hess[i + 2][i + 2] += 2.0 * ap.d2;
    }

    let gt = params.gamma * params.t;
    let m = ap.value;
    let l_trivial = l_val == 0.0 && l_grad.iter().all(|x| *x == 0.0);
    let mut jet = Jet {
        value: kf * s3.value,
        grad: s3.grad.map(|x| kf * x),
        hess: scale(&s3.hess, kf),
    };
    if gt == 0.0 {
        return Ok(jet);
    }
    if m < -RADICAND_TOL {
        return Err(Error::Domain(format!(
            "chart {}: product radicand is {m:.3e}",
            cp.nu
        )));
    }
    if m <= 1e-14 {
        if l_trivial {
            jet.hess = mat_add(&jet.hess, &l_hess, gt * m.max(0.0).sqrt());
            return Ok(jet);
        }
        return Err(Error::Singular(format!(
            "chart {}: sqrt of a vanishing radicand is not differentiable here",
            cp.nu
        )));
    }
    let sm = m.sqrt();
    jet.value += gt * l_val * sm;
    for i in 0..4 {
        jet.grad[i] += gt * (l_grad[i] * sm + l_val * m_grad[i] / (2.0 * sm));
        for j in 0..4 {
            jet.hess[i][j] += gt
                * (l_hess[i][j] * sm
                    + (l_grad[i] * m_grad[j] + m_grad[i] * l_grad[j]) / (2.0 * sm)
                    - l_val * m_grad[i] * m_grad[j] / (4.0 * m * sm)
                    + l_val * m_hess[i][j] / (2.0 * sm));
        }
    }
    Ok(jet)
}

pub fn hessian_ht_chart(cp: &ChartPoint, params: &Params) -> Result<Mat4> {
    Ok(ht_jet(cp, params)?.hess)
}

/// `J` composed with the inverse chart, evaluated through the ambient model.
pub fn j_in_chart(cp: &ChartPoint) -> Result<f64> {
    Ok(j_value(&from_chart(cp)?))
}

/// `H_t` composed with the inverse chart, evaluated through the ambient model.
pub fn ht_in_chart(cp: &ChartPoint, params: &Params) -> Result<f64> {
    Ok(ht_value(&from_chart(cp)?, params))
}

/// Diagonal Hessian entries `(a, b, c)` of `H_t` at `(0, 0, u, 0)` in chart 1
/// (family U) or chart 5 (family V), in closed form.
pub fn branch_hessian_entries(u: f64, params: &Params, family: Family) -> Result<(f64, f64, f64)> {
    let w = u * u;
    let m = f_poly(w);
    if !(m > 0.0) {
        return Err(Error::Singular(format!("f({w}) = {m} is not positive")));
    }
    let sm = m.sqrt();
    let s = family.sign() * (1.0 - 2.0 * params.t);
    let gt = params.gamma * params.t;
    let a_poly = ((((6.0 * w - 42.0) * w - 128.0) * w + 600.0) * w) + 320.0;
    let a = -s + gt * u * a_poly / sm;
    let b = s - 2.0 * gt * u * g_poly(w) / (m * sm);
    let c = s + gt * u * f_poly_deriv(w) / sm;
    Ok((a, b, c))
}

/// Numerator polynomial of the `b` entry, in `w = u^2`.
pub fn g_poly(w: f64) -> f64 {
    const C: [f64; 10] = [
        184320.0, 803840.0, -510336.0, -159552.0, 126288.0, 3984.0, -9216.0, 652.0, 153.0, -15.0,
    ];
    C.iter().rev().fold(0.0, |acc, c| acc * w + c)
}

const P_COEFFS: [i128; 11] = [
    -589824, 0, -995328, 678912, 193728, -173952, -6624, 14112, -1044, -240, 24,
];

/// Numerator of the on-branch `b` entry, exactly, as a polynomial in `w = u^2`.
pub fn p_poly_exact(w: i64) -> i128 {
    P_COEFFS
        .iter()
        .rev()
        .fold(0i128, |acc, c| acc * w as i128 + c)
}

pub fn p_poly(u: f64) -> f64 {
    let w = u * u;
    P_COEFFS
        .iter()
        .rev()
        .fold(0.0, |acc, c| acc * w + *c as f64)
}

// ---------------------------------------------------------------------------
// Classification.

/// Relative tolerance for repeated or vanishing squared eigenvalues.
const SPECTRUM_TOL: f64 = 1e-10;

/// Williamson type from the biquadratic spectrum of a Hamiltonian 4x4 matrix,
/// or `None` when the spectrum is repeated or contains zero.
fn type_from_spectrum(spec: &BiquadraticSpectrum, p: f64, q: f64) -> Option<SingularityType> {
    let sc = p * p + q.abs();
    if sc == 0.0 || spec.discriminant.abs() <= SPECTRUM_TOL * sc {
        return None;
    }
    let wscale = p.abs() + q.abs().sqrt();
    if spec
        .squares
        .iter()
        .any(|w| w.norm() <= SPECTRUM_TOL * wscale)
    {
        return None;
    }
    if spec.discriminant < 0.0 {
        return Some(SingularityType::FocusFocus);
    }
    let neg = spec.squares.iter().filter(|w| w.re < 0.0).count();
    Some(match neg {
        2 => SingularityType::EllipticElliptic,
        1 => SingularityType::EllipticHyperbolic,
        _ => SingularityType::HyperbolicHyperbolic,
    })
}

/// Spectrum of `omega^{-1} S` for a symmetric `S`, via its even characteristic polynomial.
pub fn hamiltonian_spectrum(s: &Mat4) -> (BiquadraticSpectrum, f64, f64) {
    let m = mat_mul(&omega_st_inv(), s);
    let cp = char_poly_4x4(&m);
    (solve_biquadratic(cp.c2, cp.c0), cp.c2, cp.c0)
}

/// The `(mu, lambda)` pairs tried when `omega^{-1} d^2 H_t` alone is degenerate.
pub fn combination_grid(gamma: f64) -> [(f64, f64); 16] {
    let k = 1.0 / (12.0 * gamma);
    [
        (1.0, -k),
        (1.0, k),
        (0.0, 1.0),
        (1.0, 0.0),
        (1.0, 1.0),
        (1.0, -1.0),
        (1.0, 2.0),
        (1.0, -2.0),
        (2.0, 1.0),
        (2.0, -1.0),
        (1.0, 0.5),
        (1.0, -0.5),
        (1.0, 3.0),
        (1.0, -3.0),
        (3.0, 1.0),
        (3.0, -1.0),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankZeroClassification {
    pub stype: SingularityType,
    /// Eigenvalues of `omega^{-1} d^2 H_t`.
    pub eigenvalues: EigenQuadruple,
    /// The `(mu, lambda)` pair that separated the spectrum, if `H_t` alone did not.
    pub combination: Option<(f64, f64)>,
}

/// Williamson type of a rank-zero point given in chart coordinates.
pub fn classify_rank_zero(cp: &ChartPoint, params: &Params) -> Result<RankZeroClassification> {
    let hj = j_jet(cp)?;
    let hh = ht_jet(cp, params)?;
    let (spec, p, q) = hamiltonian_spectrum(&hh.hess);
    if let Some(stype) = type_from_spectrum(&spec, p, q) {
        return Ok(RankZeroClassification {
            stype,
            eigenvalues: spec.roots,
            combination: None,
        });
    }
    for (mu, lambda) in combination_grid(params.gamma) {
        let s = mat_add(&scale(&hj.hess, mu), &hh.hess, lambda);
        let (cs, cp2, cq) = hamiltonian_spectrum(&s);
        if let Some(stype) = type_from_spectrum(&cs, cp2, cq) {
            return Ok(RankZeroClassification {
                stype,
                eigenvalues: spec.roots,
                combination: Some((mu, lambda)),
            });
        }
    }
    Ok(RankZeroClassification {
        stype: SingularityType::Degenerate,
        eigenvalues: spec.roots,
        combination: None,
    })
}

/// Ambient coordinates of a labelled fixed point at `params`.
pub fn fixed_point_ambient(label: FixedPointLabel, params: &Params) -> Result<AmbientPoint> {
    if let Some((_, p)) = static_fixed_points().into_iter().find(|(l, _)| *l == label) {
        return Ok(p);
    }
    let pts = moving_fixed_points(params.gamma, &[params.t])?;
    Ok(pts[0]
        .iter()
        .find(|(l, _)| *l == label)
        .map(|(_, p)| *p)
        .expect("label present"))
}

/// `Pmin, Pmax, Qmin, Qmax` at each `t` in the sorted slice `ts`. Min and max
/// are assigned by comparing `H_t` between the two points of each family.
pub fn moving_fixed_points(
    gamma: f64,
    ts: &[f64],
) -> Result<Vec<[(FixedPointLabel, AmbientPoint); 4]>> {
    let um = branch_path(Branch::UMinus, gamma, ts)?;
    let up = branch_path(Branch::UPlus, gamma, ts)?;
    let vm = branch_path(Branch::VMinus, gamma, ts)?;
    let vp = branch_path(Branch::VPlus, gamma, ts)?;
    let mut out = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let params = Params { t, gamma };
        let order = |a: AmbientPoint, b: AmbientPoint| {
            if ht_value(&a, &params) <= ht_value(&b, &params) {
                (a, b)
            } else {
                (b, a)
            }
        };
        let (pmin, pmax) = order(canonical(p_point(um[i])?)?, canonical(p_point(up[i])?)?);
        let (qmin, qmax) = order(canonical(q_point(vm[i])?)?, canonical(q_point(vp[i])?)?);
        out.push([
            (FixedPointLabel::Pmin, pmin),
            (FixedPointLabel::Pmax, pmax),
            (FixedPointLabel::Qmin, qmin),
            (FixedPointLabel::Qmax, qmax),
        ]);
    }
    Ok(out)
}

/// Points with two vanishing entries are replaced by the origin of the chart
/// in which both entries are free, whose entries are all nonnegative.
fn canonical(p: AmbientPoint) -> Result<AmbientPoint> {
    let zeros = vanishing_pattern(&p)?;
    if let [a, b] = zeros.as_slice() {
        let nu = if *a == 1 && *b == 8 { 8 } else { *a };
        return from_chart(&ChartPoint {
            nu,
            coords: [0.0; 4],
        });
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub label: FixedPointLabel,
    pub t: f64,
    pub gamma: f64,
    pub ambient: AmbientPoint,
    pub eigenvalues: [[f64; 2]; 4],
    #[serde(rename = "type")]
    pub stype: SingularityType,
}

fn in_degenerate_window(label: FixedPointLabel, params: &Params) -> bool {
    let (tm, tp) = transition_times(params.gamma);
    label.is_static()
        && ((params.t - tm).abs() <= DEGENERATE_WINDOW
            || (params.t - tp).abs() <= DEGENERATE_WINDOW)
}

fn record_for(
    label: FixedPointLabel,
    p: AmbientPoint,
    params: &Params,
) -> Result<FixedPointRecord> {
    let r = p.max_residual();
    if !(r < 1e-12) {
        return Err(Error::NoConvergence(format!(
            "{label} has manifold residual {r:.3e}"
        )));
    }
    let nu = best_chart(&p)?;
    let cp = to_chart(&p, nu)?;
    let c = classify_rank_zero(&cp, params)?;
    let stype = if in_degenerate_window(label, params) {
        SingularityType::Degenerate
    } else {
        c.stype
    };
    Ok(FixedPointRecord {
        label,
        t: params.t,
        gamma: params.gamma,
        ambient: p,
        eigenvalues: c.eigenvalues.as_pairs(),
        stype,
    })
}

pub fn fixed_points(params: &Params) -> Result<Vec<FixedPointRecord>> {
    Ok(fixed_points_along(params.gamma, &[params.t])?.remove(0))
}

/// Fixed-point records at each `t` of a sorted grid, continuing the branches once.
pub fn fixed_points_along(gamma: f64, ts: &[f64]) -> Result<Vec<Vec<FixedPointRecord>>> {
    for &t in ts {
        Params::new(t, gamma)?;
    }
    let moving = moving_fixed_points(gamma, ts)?;
    let mut out = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let params = Params { t, gamma };
        let mut recs = Vec::with_capacity(8);
        for (l, p) in static_fixed_points().into_iter().chain(moving[i]) {
            recs.push(record_for(l, p, &params)?);
        }
        out.push(recs);
    }
    Ok(out)
}

pub fn classify_fixed_point(
    label: FixedPointLabel,
    params: &Params,
) -> Result<(SingularityType, EigenQuadruple)> {
    let p = fixed_point_ambient(label, params)?;
    let rec = record_for(label, p, params)?;
    let mut eig = [Complex64::new(0.0, 0.0); 4];
    for (e, v) in eig.iter_mut().zip(rec.eigenvalues.iter()) {
        *e = Complex64::new(v[0], v[1]);
    }
    Ok((rec.stype, EigenQuadruple(eig)))
}

/// Discriminant of the biquadratic spectrum of `omega^{-1} d^2 H_t` at `A`;
/// negative exactly in the focus-focus regime.
pub fn spectrum_discriminant_at_a(params: &Params) -> Result<f64> {
    let a = static_fixed_points()[0].1;
    let cp = to_chart(&a, 7)?;
    let (spec, _, _) = hamiltonian_spectrum(&hessian_ht_chart(&cp, params)?);
    Ok(spec.discriminant)
}

/// Locates the elliptic-elliptic / focus-focus switches of `A` by bisection on
/// the sign of the spectral discriminant, away from the degenerate `t = 1/2`.
pub fn detect_transitions_numeric(gamma: f64) -> Result<(f64, f64)> {
    Params::new(0.0, gamma)?;
    let disc = |t: f64| spectrum_discriminant_at_a(&Params { t, gamma });
    const N: usize = 400;
    let mut crossings = Vec::new();
    let ts: Vec<f64> = (0..=N)
        .map(|i| i as f64 / N as f64)
        .filter(|t| (t - 0.5).abs() > 1e-6)
        .collect();
    let mut prev = (ts[0], disc(ts[0])?);
    for &t in &ts[1..] {
        let d = disc(t)?;
        if d.signum() != prev.1.signum() && !(prev.0 < 0.5 && t > 0.5) {
            let (mut l, mut r, mut dl) = (prev.0, t, prev.1);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                let dm = disc(m)?;
                if dm.signum() == dl.signum() {
                    l = m;
                    dl = dm;
                } else {
                    r = m;
                }
                if r - l < 1e-15 {
                    break;
                }
            }
            crossings.push(0.5 * (l + r));
        }
        prev = (t, d);
    }
    match crossings.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::NoConvergence(format!(
            "expected two type changes of A, found {}",
            crossings.len()
        ))),
    }
}

// ---------------------------------------------------------------------------
// Rank-one points.

/// `2 rho^2 g g'' + 2 rho g g' - rho^2 g'^2 - 4 g^2`, with derivatives in `rho`.
pub fn f_rank1(rho: f64, j: f64) -> f64 {
    let gr = g_reduced(rho, j);
    2.0 * rho * rho * gr.g * gr.g_rhorho + 2.0 * rho * gr.g * gr.g_rho
        - rho * rho * gr.g_rho * gr.g_rho
        - 4.0 * gr.g * gr.g
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankOnePoint {
    pub j: f64,
    pub rho: f64,
    pub theta: f64,
    pub h: f64,
    /// Determinant of the reduced Hessian in `(rho, theta)`.
    pub determinant: f64,
    pub stype: SingularityType,
}

/// Reduced Hessian entries `(H_rr, H_rt, H_tt)` at `(rho, theta)`.
pub fn reduced_hessian(rho: f64, j: f64, theta: f64, params: &Params) -> (f64, f64, f64) {
    let gr = g_reduced(rho, j);
    let sg = gr.g.max(0.0).sqrt();
    let gt = params.gamma * params.t;
    let h = sg + rho * gr.g_rho / (2.0 * sg);
    let dh = gr.g_rho / sg + rho * gr.g_rhorho / (2.0 * sg)
        - rho * gr.g_rho * gr.g_rho / (4.0 * gr.g * sg);
    let hrr = 1.0 - 2.0 * params.t + gt * theta.cos() * dh;
    let hrt = -gt * theta.sin() * h;
    let htt = -gt * rho * theta.cos() * sg;
    (hrr, hrt, htt)
}

const RANK_ONE_BRACKETS: usize = 512;

/// Critical points of the reduced height on the level `J = j`; they lie on
/// `theta in {0, pi}`.
pub fn rank_one_reduced(params: &Params, j: f64) -> Result<Vec<RankOnePoint>> {
    let (lo, hi) = crate::manifold::admissible_rho_range(j)?;
    let mut out = Vec::new();
    if hi - lo < 1e-12 {
        return Ok(out);
    }
    for theta in [0.0, PI] {
        let d = |r: f64| reduced_height_drho(r, j, theta, params);
        let xs: Vec<f64> = (0..=RANK_ONE_BRACKETS)
            .map(|i| {
                let s = (i as f64 / RANK_ONE_BRACKETS as f64).clamp(1e-9, 1.0 - 1e-9);
                lo + (hi - lo) * s
            })
            .collect();
        let vs: Vec<f64> = xs.iter().map(|&x| d(x)).collect();
        for i in 0..RANK_ONE_BRACKETS {
            let (fa, fb) = (vs[i], vs[i + 1]);
            if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
                continue;
            }
            let (mut l, mut r, mut fl) = (xs[i], xs[i + 1], fa);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                let fm = d(m);
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
            let rho = 0.5 * (l + r);
            let (hrr, hrt, htt) = reduced_hessian(rho, j, theta, params);
            let det = hrr * htt - hrt * hrt;
            let scale = hrr.abs() * htt.abs() + hrt * hrt;
            let stype = if det.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
                SingularityType::Degenerate
            } else if det > 0.0 {
                SingularityType::EllipticRegular
            } else {
                SingularityType::HyperbolicRegular
            };
            out.push(RankOnePoint {
                j,
                rho,
                theta,
                h: reduced_height_unchecked(rho, j, theta, params),
                determinant: det,
                stype,
            });
        }
    }
    Ok(out)
}

pub fn rank_one_ambient(pt: &RankOnePoint) -> Result<AmbientPoint> {
    from_reduced(&ReducedCoords {
        j: pt.j,
        rho: pt.rho,
        theta: pt.theta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankOneClassification {
    pub stype: SingularityType,
    /// Eigenvalues of the linearised `J`-flow on `L^perp / L`.
    pub eigenvalues: [Complex64; 2],
}

/// Type of a rank-one point on an extremal level `J in {0, 3}`, from the
/// action of `omega^{-1} d^2 J` on the quotient of `ker dH_t` by the
/// `H_t`-direction.
pub fn classify_rank_one_extremal(
    p: &AmbientPoint,
    params: &Params,
) -> Result<RankOneClassification> {
    let j = j_value(p);
    if !(j.abs() < 1e-9 || (j - 3.0).abs() < 1e-9) {
        return Err(Error::InvalidPoint(format!(
            "J = {j} is not an extremal level"
        )));
    }
    let nu = best_chart(p)?;
    let cp = to_chart(p, nu)?;
    let gh = ht_jet(&cp, params)?.grad;
    let gn = norm4(&gh);
    if gn < 1e-10 {
        return Err(Error::InvalidPoint(
            "dH_t vanishes: the point has rank zero".into(),
        ));
    }
    let n = gh.map(|x| x / gn);
    let x = mat_vec(&omega_st_inv(), &gh);
    let xn = x.map(|v| v / norm4(&x));
    let mut basis: Vec<Vec4> = Vec::new();
    for k in 0..4 {
        let mut e = [0.0; 4];
        e[k] = 1.0;
        for b in [n, xn].iter().chain(basis.clone().iter()) {
            let d = dot4(&e, b);
            for i in 0..4 {
                e[i] -= d * b[i];
            }
        }
        let en = norm4(&e);
        if en > 0.1 {
            basis.push(e.map(|v| v / en));
        }
        if basis.len() == 2 {
            break;
        }
    }
    let a = mat_mul(&omega_st_inv(), &j_jet(&cp)?.hess);
    let mut b = [[0.0; 2]; 2];
    for c in 0..2 {
        let ae = mat_vec(&a, &basis[c]);
        for r in 0..2 {
            b[r][c] = dot4(&basis[r], &ae);
        }
    }
    let tr = b[0][0] + b[1][1];
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let disc = Complex64::new(tr * tr - 4.0 * det, 0.0).sqrt();
    let l1 = (Complex64::new(tr, 0.0) + disc) / 2.0;
    let l2 = (Complex64::new(tr, 0.0) - disc) / 2.0;
    let sc = tr.abs() + det.abs().sqrt();
    let stype = if det.abs() <= 1e-10 * sc.max(f64::MIN_POSITIVE) || sc == 0.0 {
        SingularityType::Degenerate
    } else if is_imaginary(l1) && is_imaginary(l2) && det > 0.0 {
        SingularityType::EllipticRegular
    } else if l1.im == 0.0 && l2.im == 0.0 && det < 0.0 {
        SingularityType::HyperbolicRegular
    } else {
        SingularityType::Degenerate
    };
    Ok(RankOneClassification {
        stype,
        eigenvalues: [l1, l2],
    })
}
