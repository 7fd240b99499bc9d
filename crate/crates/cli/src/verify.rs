//! Invariant suites behind `semitoric-lab verify`.

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use semitoric_core::critical::{
    detect_transitions_numeric, f_rank1, fixed_points, fixed_points_along, ht_in_chart, ht_jet,
    j_in_chart, rank_one_reduced, transition_times, SingularityType,
};
use semitoric_core::delzant::octagon;
use semitoric_core::fibre::verify_double_pinch;
use semitoric_core::manifold::{
    admissible_rho_range, apply_torus_action, check_darboux, from_chart,
    random_interior_chart_point, random_point, to_chart, ChartPoint,
};
use semitoric_core::momentum::{identity_x2y2, momentum_image_samples, momentum_map, Params};
use semitoric_core::numerics::{
    fd_gradient, fd_hessian, max_abs_diff, omega_st_inv, GRAD_STEP, HESS_STEP,
};

use crate::output::Report;
use crate::{CliError, GlobalArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Charts,
    IdentityX2y2,
    Poisson,
    HessianCrosscheck,
    Transitions,
    FixedPoints,
    Classification,
    DoublePinch,
    RankOne,
    MomentumImage,
}

impl Suite {
    const ALL: [Suite; 10] = [
        Suite::Charts,
        Suite::IdentityX2y2,
        Suite::Poisson,
        Suite::HessianCrosscheck,
        Suite::Transitions,
        Suite::FixedPoints,
        Suite::Classification,
        Suite::DoublePinch,
        Suite::RankOne,
        Suite::MomentumImage,
    ];

    fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }

    fn default_tol(self) -> f64 {
        match self {
            Suite::Charts => 1e-8,
            Suite::IdentityX2y2 => 1e-9,
            Suite::Poisson | Suite::HessianCrosscheck => 1e-6,
            Suite::Transitions => 1e-8,
            Suite::FixedPoints => 1e-12,
            Suite::Classification | Suite::DoublePinch => 0.0,
            // f_rank1 must stay strictly negative on the grid.
            Suite::RankOne => 0.0,
            Suite::MomentumImage => 1e-9,
        }
    }
}

struct Tally {
    checked: usize,
    failed: usize,
    max_error: f64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checked: 0,
            failed: 0,
            max_error: 0.0,
        }
    }

    /// Records one check whose error must not exceed `tol`.
    fn add(&mut self, err: f64, tol: f64) {
        self.checked += 1;
        self.max_error = self.max_error.max(err);
        if !(err <= tol) {
            self.failed += 1;
        }
    }

    fn flag(&mut self, ok: bool) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
        }
    }
}

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn charts(n: usize, seed: u64, tol: f64) -> Result<Tally, CliError> {
    let mut r = rng(seed, 1);
    let mut t = Tally::new();
    for nu in 1..=8 {
        for _ in 0..n {
            let cp = random_interior_chart_point(nu, &mut r, 1e-6);
            let p = from_chart(&cp)?;
            let g: [f64; 6] = std::array::from_fn(|_| r.gen_range(-3.2..3.2));
            let back = to_chart(&apply_torus_action(&p, &g), nu)?;
            let rt = (0..4)
                .map(|k| (back.coords[k] - cp.coords[k]).abs())
                .fold(0.0, f64::max);
            let om = check_darboux(&cp, f64::INFINITY)?;
            t.add(p.max_residual().max(rt).max(om), tol);
        }
    }
    Ok(t)
}

fn identity(n: usize, seed: u64, tol: f64) -> Tally {
    let mut r = rng(seed, 2);
    let mut t = Tally::new();
    for _ in 0..n {
        let p = random_point(&mut r, 1e-3);
        let (lhs, rhs) = identity_x2y2(&p);
        t.add((lhs - rhs).abs() / rhs.abs().max(1e-300), tol);
    }
    t
}

fn poisson(n: usize, seed: u64, tol: f64) -> Result<Tally, CliError> {
    let mut r = rng(seed, 3);
    let mut t = Tally::new();
    let w = omega_st_inv();
    for nu in 1..=8 {
        for _ in 0..n {
            let params = Params::new(r.gen_range(0.0..1.0), r.gen_range(1e-3..1.0 / 48.0))?;
            let cp = random_interior_chart_point(nu, &mut r, 0.05);
            let gj = fd_gradient(
                |x| j_in_chart(&ChartPoint { nu, coords: *x }),
                &cp.coords,
                GRAD_STEP,
            )?;
            let gh = fd_gradient(
                |x| ht_in_chart(&ChartPoint { nu, coords: *x }, &params),
                &cp.coords,
                GRAD_STEP,
            )?;
            let mut pb = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    pb += gj[a] * w[a][b] * gh[b];
                }
            }
            t.add(f64::abs(pb), tol);
        }
    }
    Ok(t)
}

fn hessian(n: usize, seed: u64, tol: f64) -> Result<Tally, CliError> {
    let mut r = rng(seed, 4);
    let mut t = Tally::new();
    for _ in 0..n {
        let nu = r.gen_range(1..=8);
        let params = Params::new(r.gen_range(0.0..1.0), r.gen_range(1e-3..1.0 / 48.0))?;
        // Gauge moduli at least 1.5, where the pinned FD step is accurate.
        let cp = random_interior_chart_point(nu, &mut r, 1.5);
        let exact = ht_jet(&cp, &params)?.hess;
        let fd = fd_hessian(
            |x| ht_in_chart(&ChartPoint { nu, coords: *x }, &params),
            &cp.coords,
            HESS_STEP,
        )?;
        t.add(max_abs_diff(&exact, &fd), tol);
    }
    Ok(t)
}

fn transitions(tol: f64) -> Result<Tally, CliError> {
    let mut t = Tally::new();
    for gamma in [1.0 / 60.0, 1.0 / 100.0, 1.0 / 50.0] {
        let (tm, tp) = transition_times(gamma);
        let (nm, np) = detect_transitions_numeric(gamma)?;
        t.add((tm - nm).abs(), tol);
        t.add((tp - np).abs(), tol);
    }
    Ok(t)
}

fn fixed_point_suite(gamma: f64, tol: f64) -> Result<Tally, CliError> {
    let params = Params::new(0.0, gamma)?;
    let oct = octagon().vertices_f64();
    let mut t = Tally::new();
    for rec in fixed_points(&params)? {
        let f = momentum_map(&rec.ambient, &params);
        let dist = oct
            .iter()
            .map(|v| (v[0] - f[0]).abs().max((v[1] - f[1]).abs()))
            .fold(f64::INFINITY, f64::min);
        t.add(dist.max(rec.ambient.max_residual()), tol);
    }
    Ok(t)
}

fn classification(gamma: f64) -> Result<Tally, CliError> {
    let (tm, tp) = transition_times(gamma);
    let ts: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let mut t = Tally::new();
    for (time, recs) in ts.iter().zip(fixed_points_along(gamma, &ts)?) {
        for rec in recs {
            let want = if !rec.label.is_static() {
                SingularityType::EllipticElliptic
            } else if (time - tm).abs() <= 1e-9 || (time - tp).abs() <= 1e-9 {
                SingularityType::Degenerate
            } else if *time > tm && *time < tp {
                SingularityType::FocusFocus
            } else {
                SingularityType::EllipticElliptic
            };
            t.flag(rec.stype == want);
        }
    }
    Ok(t)
}

fn double_pinch(gamma: f64) -> Result<Tally, CliError> {
    let params = Params::new(0.5, gamma)?;
    let mut t = Tally::new();
    for value in [[1.0, 0.0], [2.0, 0.0]] {
        let rep = verify_double_pinch(value, &params)?;
        t.checked += rep.samples_checked;
        t.failed += rep.failures.len();
        t.max_error = t.max_error.max(rep.max_residual).max(rep.max_value_error);
    }
    Ok(t)
}

fn rank_one(gamma: f64, tol: f64) -> Result<Tally, CliError> {
    let mut t = Tally::new();
    for a in 0..20 {
        let j = 3.0 * (a as f64 + 0.5) / 20.0;
        for b in 0..10 {
            let params = Params::new((b as f64 + 0.5) / 10.0, gamma)?;
            for p in rank_one_reduced(&params, j)? {
                t.flag(p.determinant > 0.0 && p.stype == SingularityType::EllipticRegular);
            }
        }
    }
    let fmax = (0..200)
        .into_par_iter()
        .map(|a| {
            let j = 3.0 * (a as f64 + 0.5) / 200.0;
            let (lo, hi) = admissible_rho_range(j).expect("j in [0, 3]");
            (0..200)
                .map(|b| {
                    let r2 = lo * lo + (hi * hi - lo * lo) * (b as f64 + 0.5) / 200.0;
                    f_rank1(r2.sqrt(), j)
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    // Reported error is the grid maximum of f_rank1, which must be negative.
    t.checked += 1;
    t.max_error = fmax;
    if !(fmax < tol) {
        t.failed += 1;
    }
    Ok(t)
}

fn momentum_image(gamma: f64, tol: f64) -> Result<Tally, CliError> {
    let params = Params::new(0.0, gamma)?;
    let oct = octagon();
    let mut t = Tally::new();
    for s in momentum_image_samples(&params, 50, 40, 50)? {
        t.flag(oct.contains_with_slack(s, tol));
    }
    Ok(t)
}

pub fn run(g: &GlobalArgs, suite: Option<Suite>, n: Option<usize>) -> Result<Report, CliError> {
    if n == Some(0) {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let gamma = g.gamma;
    Params::new(0.0, gamma)?;
    let suites: Vec<Suite> = suite.map_or(Suite::ALL.to_vec(), |s| vec![s]);
    let cfg = json!({
        "gamma": gamma,
        "seed": g.seed,
        "n": n,
        "tol": g.tol,
        "suite": suite.map(|s| s.name()),
    });
    let mut r = Report::new(
        "verify",
        cfg,
        vec!["suite", "checked", "failed", "max_error", "tol", "passed"],
    );
    let mut failed = Vec::new();
    for s in suites {
        let tol = g.tol.unwrap_or(s.default_tol());
        let tally = match s {
            Suite::Charts => charts(n.unwrap_or(100), g.seed, tol)?,
            Suite::IdentityX2y2 => identity(n.unwrap_or(1000), g.seed, tol),
            Suite::Poisson => poisson(n.unwrap_or(100), g.seed, tol)?,
            Suite::HessianCrosscheck => hessian(n.unwrap_or(100), g.seed, tol)?,
            Suite::Transitions => transitions(tol)?,
            Suite::FixedPoints => fixed_point_suite(gamma, tol)?,
            Suite::Classification => classification(gamma)?,
            Suite::DoublePinch => double_pinch(gamma)?,
            Suite::RankOne => rank_one(gamma, tol)?,
            Suite::MomentumImage => momentum_image(gamma, tol)?,
        };
        let passed = tally.failed == 0 && tally.checked > 0;
        if !passed {
            failed.push(s.name());
        }
        r.push(vec![
            json!(s.name()),
            json!(tally.checked),
            json!(tally.failed),
            json!(tally.max_error),
            json!(tol),
            json!(passed),
        ]);
    }
    r.note("suites_failed", failed.len());
    if !failed.is_empty() {
        r.failure = Some(format!("suites failed: {}", failed.join(", ")));
    }
    Ok(r)
}
