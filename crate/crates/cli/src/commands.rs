use std::path::Path;
use std::str::FromStr;

use semitoric_core::critical::{
    classify_rank_zero, detect_transitions_numeric, fixed_points, rank_one_reduced,
    transition_times, FixedPointLabel, SingularityType,
};
use semitoric_core::delzant::octagon;
use semitoric_core::fibre::{fibre_mesh, fibre_sampler_numeric, verify_double_pinch, Sheet};
use semitoric_core::manifold::{best_chart, to_chart, AmbientPoint};
use semitoric_core::momentum::{
    h_range, momentum_image_samples, momentum_map, profile_x, revolution_mesh, Params,
};
use serde_json::{json, Value};

use crate::output::Report;
use crate::svg::Plot;
use crate::{CliError, GlobalArgs};

/// `AxBxC` grid sizes, each at least 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid(pub Vec<usize>);

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let dims = s
            .split('x')
            .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if dims.iter().any(|&d| d < 2) {
            return Err(format!("grid sizes must be at least 2, got {s}"));
        }
        Ok(Grid(dims))
    }
}

impl Grid {
    fn dims<const N: usize>(&self, what: &str) -> Result<[usize; N], CliError> {
        self.0.as_slice().try_into().map_err(|_| {
            CliError::Usage(format!(
                "--grid for {what} takes {N} sizes separated by 'x'"
            ))
        })
    }
}

/// A fibre value `j,h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Value2(pub [f64; 2]);

impl FromStr for Value2 {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').collect();
        let [a, b] = parts.as_slice() else {
            return Err(format!("expected j,h, got {s:?}"));
        };
        let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        Ok(Value2([p(a)?, p(b)?]))
    }
}

const Z_COLUMNS: [&str; 16] = [
    "z1_re", "z1_im", "z2_re", "z2_im", "z3_re", "z3_im", "z4_re", "z4_im", "z5_re", "z5_im",
    "z6_re", "z6_im", "z7_re", "z7_im", "z8_re", "z8_im",
];

const EV_COLUMNS: [&str; 8] = [
    "ev1_re", "ev1_im", "ev2_re", "ev2_im", "ev3_re", "ev3_im", "ev4_re", "ev4_im",
];

fn columns(head: &[&'static str], tails: &[&[&'static str]]) -> Vec<&'static str> {
    let mut c = head.to_vec();
    for t in tails {
        c.extend_from_slice(t);
    }
    c
}

fn z_cells(p: &AmbientPoint) -> impl Iterator<Item = Value> + '_ {
    p.z.iter().flat_map(|z| [json!(z.re), json!(z.im)])
}

fn params(g: &GlobalArgs, default_t: f64) -> Result<Params, CliError> {
    Ok(Params::new(g.t.unwrap_or(default_t), g.gamma)?)
}

fn base_config(p: &Params) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("t".into(), json!(p.t));
    m.insert("gamma".into(), json!(p.gamma));
    m
}

fn write_svg(path: Option<&Path>, svg: &Option<String>) -> Result<(), CliError> {
    if let (Some(path), Some(s)) = (path, svg) {
        std::fs::write(path, s)?;
    }
    Ok(())
}

pub fn fixed_point_table(g: &GlobalArgs) -> Result<Report, CliError> {
    let p = params(g, 0.0)?;
    let cfg = Value::Object(base_config(&p));
    let mut r = Report::new(
        "fixed-points",
        cfg,
        columns(&["label", "type", "j", "h_t"], &[&Z_COLUMNS, &EV_COLUMNS]),
    );
    for rec in fixed_points(&p)? {
        let f = momentum_map(&rec.ambient, &p);
        let mut row = vec![
            json!(rec.label.to_string()),
            json!(rec.stype.to_string()),
            json!(f[0]),
            json!(f[1]),
        ];
        row.extend(z_cells(&rec.ambient));
        row.extend(
            rec.eigenvalues
                .iter()
                .flat_map(|e| [json!(e[0]), json!(e[1])]),
        );
        r.push(row);
    }
    Ok(r)
}

pub fn classify(
    g: &GlobalArgs,
    label: Option<FixedPointLabel>,
    j: Option<f64>,
) -> Result<Report, CliError> {
    let p = params(g, 0.0)?;
    let mut cfg = base_config(&p);
    if let Some(j) = j {
        if label.is_some() {
            return Err(CliError::Usage(
                "--label and --j are mutually exclusive".into(),
            ));
        }
        cfg.insert("j".into(), json!(j));
        let mut r = Report::new(
            "classify",
            Value::Object(cfg),
            vec!["j", "rho", "theta", "h_t", "determinant", "type"],
        );
        for pt in rank_one_reduced(&p, j)? {
            r.push(vec![
                json!(pt.j),
                json!(pt.rho),
                json!(pt.theta),
                json!(pt.h),
                json!(pt.determinant),
                json!(pt.stype.to_string()),
            ]);
        }
        return Ok(r);
    }
    cfg.insert("label".into(), json!(label.map(|l| l.to_string())));
    let mut r = Report::new(
        "classify",
        Value::Object(cfg),
        columns(
            &["label", "type", "chart"],
            &[&EV_COLUMNS, &["mu", "lambda"]],
        ),
    );
    for rec in fixed_points(&p)? {
        if label.is_some_and(|l| l != rec.label) {
            continue;
        }
        let nu = best_chart(&rec.ambient)?;
        let c = classify_rank_zero(&to_chart(&rec.ambient, nu)?, &p)?;
        let mut row = vec![
            json!(rec.label.to_string()),
            json!(rec.stype.to_string()),
            json!(nu),
        ];
        row.extend(
            rec.eigenvalues
                .iter()
                .flat_map(|e| [json!(e[0]), json!(e[1])]),
        );
        row.push(json!(c.combination.map(|c| c.0)));
        row.push(json!(c.combination.map(|c| c.1)));
        r.push(row);
    }
    Ok(r)
}

pub fn transitions(g: &GlobalArgs) -> Result<Report, CliError> {
    Params::new(0.0, g.gamma)?;
    let tol = g.tol.unwrap_or(1e-8);
    let (tm, tp) = transition_times(g.gamma);
    let (nm, np) = detect_transitions_numeric(g.gamma)?;
    let mut r = Report::new(
        "transitions",
        json!({ "gamma": g.gamma, "tol": tol }),
        vec!["which", "closed_form", "numeric", "abs_diff"],
    );
    let mut worst: f64 = 0.0;
    for (name, c, n) in [("t_minus", tm, nm), ("t_plus", tp, np)] {
        worst = worst.max((c - n).abs());
        r.push(vec![json!(name), json!(c), json!(n), json!((c - n).abs())]);
    }
    if !(worst <= tol) {
        r.failure = Some(format!(
            "numeric transition times differ by {worst:.3e} > {tol:.1e}"
        ));
    }
    Ok(r)
}

pub fn momentum_image(
    g: &GlobalArgs,
    grid: &Grid,
    svg_path: Option<&Path>,
) -> Result<Report, CliError> {
    let p = params(g, 0.0)?;
    let [nj, nr, nt] = grid.dims::<3>("momentum-image")?;
    let mut cfg = base_config(&p);
    cfg.insert("grid".into(), json!([nj, nr, nt]));
    let cfg = Value::Object(cfg);
    let samples = momentum_image_samples(&p, nj, nr, nt)?;
    let oct = octagon();
    let fps = fixed_points(&p)?;

    let mut r = Report::new("momentum-image", cfg.clone(), vec!["j", "h_t"]);
    r.note("samples", samples.len());
    // The toric image is the octagon itself; for t > 0 there is nothing to compare.
    let toric = p.t == 0.0;
    if toric {
        let outside = samples
            .iter()
            .filter(|s| !oct.contains_with_slack(**s, 1e-9))
            .count();
        r.note("outside_octagon", outside);
    }
    let mut marks: Vec<([f64; 2], Vec<String>, bool)> = Vec::new();
    for rec in &fps {
        let f = momentum_map(&rec.ambient, &p);
        let ff = rec.stype == SingularityType::FocusFocus;
        match marks
            .iter_mut()
            .find(|m| (m.0[0] - f[0]).abs() < 1e-9 && (m.0[1] - f[1]).abs() < 1e-9)
        {
            Some(m) => {
                m.1.push(rec.label.to_string());
                m.2 |= ff;
            }
            None => marks.push((f, vec![rec.label.to_string()], ff)),
        }
    }
    r.note(
        "fixed_point_images",
        marks
            .iter()
            .map(|(f, l, ff)| json!({ "value": f, "labels": l, "focus_focus": ff }))
            .collect::<Vec<_>>(),
    );
    for s in &samples {
        r.push(vec![json!(s[0]), json!(s[1])]);
    }

    let overlay = if toric {
        oct.vertices_f64()
    } else {
        Vec::new()
    };
    let ((x0, x1), (y0, y1)) = Plot::bounds(samples.iter().copied().chain(overlay.iter().copied()));
    let mut plot = Plot::new((x0, x1), (y0, y1));
    let stride = samples.len().div_ceil(20_000).max(1);
    let shown: Vec<[f64; 2]> = samples.iter().step_by(stride).copied().collect();
    plot.scatter(&shown, 0.8, "#3b6ea5");
    if toric {
        plot.polygon(&overlay, "#222");
    }
    for (f, labels, ff) in &marks {
        plot.marker(*f, &labels.join("/"), if *ff { "#c0392b" } else { "#222" });
    }
    r.svg = Some(plot.finish("momentum-image", &cfg, "j", "h_t"));
    write_svg(svg_path, &r.svg)?;
    Ok(r)
}

/// Roots of the six linear factors of the sextic at fixed `j`, inside the
/// `h`-range, with the number of factors vanishing at each.
fn profile_zeros(j: f64) -> Result<Vec<(f64, usize)>, CliError> {
    let (lo, hi) = h_range(j)?;
    let mut roots: Vec<f64> = [0.0, 1.0 - j, j - 2.0, 5.0 - j, 3.0, 2.0 + j]
        .into_iter()
        .filter(|h| *h >= lo - 1e-12 && *h <= hi + 1e-12)
        .collect();
    roots.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for h in roots {
        match out.last_mut() {
            Some(last) if (last.0 - h).abs() <= 1e-12 => last.1 += 1,
            _ => out.push((h, 1)),
        }
    }
    Ok(out)
}

pub fn reduced_space(j: f64, grid: &Grid, svg_path: Option<&Path>) -> Result<Report, CliError> {
    let [nh, nphi] = grid.dims::<2>("reduced-space")?;
    let cfg = json!({ "j": j, "grid": [nh, nphi] });
    let mesh = revolution_mesh(j, nh, nphi)?;
    let (lo, hi) = h_range(j)?;
    let zeros = profile_zeros(j)?;
    let mut r = Report::new("reduced-space", cfg.clone(), vec!["x", "y", "h"]);
    r.note("h_range", json!([lo, hi]));
    r.note(
        "profile_zeros",
        zeros.iter().map(|z| z.0).collect::<Vec<_>>(),
    );
    r.note(
        "singular_h",
        zeros
            .iter()
            .filter(|z| z.1 >= 2)
            .map(|z| z.0)
            .collect::<Vec<_>>(),
    );
    for v in &mesh {
        r.push(vec![json!(v[0]), json!(v[1]), json!(v[2])]);
    }
    let mut profile = Vec::new();
    for i in 0..=400 {
        let h = lo + (hi - lo) * i as f64 / 400.0;
        let x = profile_x(j, h)?;
        profile.push([x, h]);
        profile.push([-x, h]);
    }
    let (bx, by) = Plot::bounds(profile.iter().copied());
    let mut plot = Plot::new(bx, by);
    plot.scatter(&profile, 1.0, "#3b6ea5");
    r.svg = Some(plot.finish("reduced-space", &cfg, "X", "h"));
    write_svg(svg_path, &r.svg)?;
    Ok(r)
}

fn is_pinch_value(v: [f64; 2], p: &Params) -> bool {
    (p.t - 0.5).abs() <= 1e-12
        && v[1].abs() <= 1e-12
        && ((v[0] - 1.0).abs() <= 1e-12 || (v[0] - 2.0).abs() <= 1e-12)
}

const FIBRE_COLUMNS: [&str; 11] = [
    "kind",
    "label",
    "sheet",
    "r",
    "theta",
    "torus_angle",
    "x",
    "y",
    "z",
    "j",
    "h_t",
];

fn sheet_name(s: Sheet) -> &'static str {
    match s {
        Sheet::Plus => "plus",
        Sheet::Minus => "minus",
    }
}

pub fn fibre(
    g: &GlobalArgs,
    value: Value2,
    grid: &Grid,
    n: usize,
    svg_path: Option<&Path>,
) -> Result<Report, CliError> {
    let p = params(g, 0.5)?;
    let value = value.0;
    let mut cfg = base_config(&p);
    cfg.insert("value".into(), json!(value));
    let cols = columns(&FIBRE_COLUMNS, &[&Z_COLUMNS]);

    if is_pinch_value(value, &p) {
        let [nr, nt] = grid.dims::<2>("fibre")?;
        cfg.insert("grid".into(), json!([nr, nt]));
        let cfg = Value::Object(cfg);
        let mesh = fibre_mesh(value, &p, nr, nt)?;
        let rep = verify_double_pinch(value, &p)?;
        let mut r = Report::new("fibre", cfg.clone(), cols);
        r.note("mode", "double-pinch");
        r.note(
            "pinch_labels",
            rep.pinch_labels
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>(),
        );
        r.note("samples_checked", rep.samples_checked);
        r.note("rank_zero_samples", rep.rank_zero_samples);
        r.note("max_residual", rep.max_residual);
        r.note("max_value_error", rep.max_value_error);
        r.note("passed", rep.passed());
        for v in &mesh.vertices {
            let f = momentum_map(&v.ambient, &p);
            let mut row = vec![
                json!("vertex"),
                Value::Null,
                json!(sheet_name(v.sheet)),
                json!(v.r),
                json!(v.theta),
                Value::Null,
                json!(v.xyz[0]),
                json!(v.xyz[1]),
                json!(v.xyz[2]),
                json!(f[0]),
                json!(f[1]),
            ];
            row.extend(z_cells(&v.ambient));
            r.push(row);
        }
        for pv in &mesh.pinch_points {
            let f = momentum_map(&pv.ambient, &p);
            let mut row = vec![
                json!("pinch"),
                json!(pv.label.to_string()),
                Value::Null,
                Value::Null,
                Value::Null,
                Value::Null,
                json!(pv.xyz[0]),
                json!(pv.xyz[1]),
                json!(pv.xyz[2]),
                json!(f[0]),
                json!(f[1]),
            ];
            row.extend(z_cells(&pv.ambient));
            r.push(row);
        }
        if !rep.passed() {
            r.failure = Some(rep.failures.join("; "));
        }
        let top: Vec<[f64; 2]> = mesh.vertices.iter().map(|v| [v.xyz[0], v.xyz[1]]).collect();
        let (bx, by) = Plot::bounds(top.iter().copied());
        let mut plot = Plot::new(bx, by);
        plot.scatter(&top, 1.2, "#3b6ea5");
        for pv in &mesh.pinch_points {
            plot.marker([pv.xyz[0], pv.xyz[1]], &pv.label.to_string(), "#c0392b");
        }
        r.svg = Some(plot.finish("fibre", &cfg, "x", "y"));
        write_svg(svg_path, &r.svg)?;
        return Ok(r);
    }

    if n < 2 {
        return Err(CliError::Usage("--n must be at least 2".into()));
    }
    cfg.insert("n".into(), json!(n));
    cfg.insert("seed".into(), json!(g.seed));
    let cfg = Value::Object(cfg);
    let fib = fibre_sampler_numeric(value, &p, n, g.seed)?;
    let mut r = Report::new("fibre", cfg.clone(), cols);
    r.note("mode", "sampled");
    r.note("samples", fib.samples.len());
    if let Some(d) = &fib.diagnostic {
        r.note("diagnostic", d.as_str());
    }
    for s in &fib.samples {
        let f = momentum_map(&s.point, &p);
        let mut row = vec![
            json!("sample"),
            Value::Null,
            Value::Null,
            json!(s.rho),
            json!(s.theta),
            json!(s.torus_angle),
            Value::Null,
            Value::Null,
            Value::Null,
            json!(f[0]),
            json!(f[1]),
        ];
        row.extend(z_cells(&s.point));
        r.push(row);
    }
    let pts: Vec<[f64; 2]> = fib.samples.iter().map(|s| [s.theta, s.rho]).collect();
    let (bx, by) = Plot::bounds(pts.iter().copied());
    let mut plot = Plot::new(bx, by);
    plot.scatter(&pts, 1.2, "#3b6ea5");
    r.svg = Some(plot.finish("fibre", &cfg, "theta", "rho"));
    write_svg(svg_path, &r.svg)?;
    Ok(r)
}
