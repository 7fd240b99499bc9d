//! Delzant polygons and the fixed combinatorial data of the octagon model.

use num_rational::Rational64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The set `<x, normal> <= offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub normal: [i64; 2],
    pub offset: i64,
}

impl HalfPlane {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        x[0] * self.normal[0] as f64 + x[1] * self.normal[1] as f64 - self.offset as f64
    }
}

/// Convex polygon with counterclockwise vertices and the matching halfplanes.
#[derive(Debug, Clone, PartialEq)]
pub struct DelzantPolygon {
    pub vertices: Vec<[Rational64; 2]>,
    pub halfplanes: Vec<HalfPlane>,
}

#[derive(Serialize, Deserialize)]
struct PolygonRepr {
    vertices: Vec<[f64; 2]>,
    halfplanes: Vec<HalfPlane>,
}

fn rat_to_f64(r: &Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl Serialize for DelzantPolygon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolygonRepr {
            vertices: self.vertices_f64(),
            halfplanes: self.halfplanes.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DelzantPolygon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PolygonRepr::deserialize(d)?;
        let mut vertices = Vec::with_capacity(repr.vertices.len());
        for v in repr.vertices {
            let x = Rational64::approximate_float(v[0])
                .ok_or_else(|| D::Error::custom("vertex not rational"))?;
            let y = Rational64::approximate_float(v[1])
                .ok_or_else(|| D::Error::custom("vertex not rational"))?;
            vertices.push([x, y]);
        }
        Ok(DelzantPolygon {
            vertices,
            halfplanes: repr.halfplanes,
        })
    }
}

impl DelzantPolygon {
    pub fn from_integer_vertices(vertices: &[[i64; 2]]) -> Self {
        let vertices: Vec<[Rational64; 2]> = vertices
            .iter()
            .map(|v| {
                [
                    Rational64::from_integer(v[0]),
                    Rational64::from_integer(v[1]),
                ]
            })
            .collect();
        let halfplanes = halfplanes_from_vertices(&vertices);
        DelzantPolygon {
            vertices,
            halfplanes,
        }
    }

    pub fn vertices_f64(&self) -> Vec<[f64; 2]> {
        self.vertices
            .iter()
            .map(|v| [rat_to_f64(&v[0]), rat_to_f64(&v[1])])
            .collect()
    }

    /// Membership with the default slack `1e-12`.
    pub fn contains(&self, x: [f64; 2]) -> bool {
        self.contains_with_slack(x, 1e-12)
    }

    pub fn contains_with_slack(&self, x: [f64; 2], slack: f64) -> bool {
        self.halfplanes.iter().all(|h| h.value(x) <= slack)
    }

    /// Indices of the halfplanes whose boundary passes through `x`.
    pub fn active_halfplanes(&self, x: [f64; 2], tol: f64) -> Vec<usize> {
        self.halfplanes
            .iter()
            .enumerate()
            .filter(|(_, h)| h.value(x).abs() <= tol)
            .map(|(i, _)| i)
            .collect()
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Primitive integer vector along a rational direction.
fn primitive(d: [Rational64; 2]) -> Option<[i64; 2]> {
    let l = d[0].denom() / gcd(*d[0].denom(), *d[1].denom()) * d[1].denom();
    let x = (d[0] * l).to_integer();
    let y = (d[1] * l).to_integer();
    let g = gcd(x, y);
    if g == 0 {
        return None;
    }
    Some([x / g, y / g])
}

fn halfplanes_from_vertices(vs: &[[Rational64; 2]]) -> Vec<HalfPlane> {
    let n = vs.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let a = vs[k];
        let b = vs[(k + 1) % n];
        let Some(e) = primitive([b[0] - a[0], b[1] - a[1]]) else {
            continue;
        };
        // Outward normal of a counterclockwise edge.
        let normal = [e[1], -e[0]];
        let off = a[0] * normal[0] + a[1] * normal[1];
        if off.is_integer() {
            out.push(HalfPlane {
                normal,
                offset: off.to_integer(),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelzantReport {
    pub is_delzant: bool,
    /// `det(w_out, w_in)` of the primitive edge vectors at each vertex.
    pub vertex_determinants: Vec<i64>,
    pub diagnostics: Vec<String>,
}

pub fn verify_delzant(p: &DelzantPolygon) -> DelzantReport {
    let n = p.vertices.len();
    let mut dets = Vec::with_capacity(n);
    let mut diagnostics = Vec::new();
    if n < 3 {
        diagnostics.push(format!("polygon has {n} vertices"));
        return DelzantReport {
            is_delzant: false,
            vertex_determinants: dets,
            diagnostics,
        };
    }
    for k in 0..n {
        let v = p.vertices[k];
        let next = p.vertices[(k + 1) % n];
        let prev = p.vertices[(k + n - 1) % n];
        let out = primitive([next[0] - v[0], next[1] - v[1]]);
        let back = primitive([prev[0] - v[0], prev[1] - v[1]]);
        let (Some(w1), Some(w2)) = (out, back) else {
            diagnostics.push(format!("vertex {k} repeats a neighbour"));
            dets.push(0);
            continue;
        };
        let det = w1[0] * w2[1] - w1[1] * w2[0];
        dets.push(det);
        if det <= 0 {
            diagnostics.push(format!("vertex {k} is not strictly convex (det {det})"));
        } else if det != 1 {
            diagnostics.push(format!(
                "vertex {k}: edge vectors ({}, {}) and ({}, {}) span a sublattice of index {det}",
                w1[0], w1[1], w2[0], w2[1]
            ));
        }
    }
    if p.halfplanes.len() != n {
        diagnostics.push(format!(
            "{} halfplanes for {n} vertices",
            p.halfplanes.len()
        ));
    } else {
        for (k, v) in p.vertices.iter().enumerate() {
            let x = [rat_to_f64(&v[0]), rat_to_f64(&v[1])];
            let active = p.active_halfplanes(x, 1e-12);
            if active.len() != 2 {
                diagnostics.push(format!(
                    "vertex {k} lies on {} halfplane boundaries",
                    active.len()
                ));
            }
            if !p.contains(x) {
                diagnostics.push(format!("vertex {k} violates a halfplane"));
            }
        }
    }
    DelzantReport {
        is_delzant: diagnostics.is_empty(),
        vertex_determinants: dets,
        diagnostics,
    }
}

/// Octagon vertices, counterclockwise.
pub const OCTAGON_VERTICES: [[i64; 2]; 8] = [
    [0, 2],
    [0, 1],
    [1, 0],
    [2, 0],
    [3, 1],
    [3, 2],
    [2, 3],
    [1, 3],
];

pub fn octagon() -> DelzantPolygon {
    DelzantPolygon::from_integer_vertices(&OCTAGON_VERTICES)
}

/// Integer and rational matrices of the symplectic-cut construction for the octagon.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionData {
    /// 2x8 matrix of facet normals, column k belongs to coordinate `z_{k+1}`.
    pub theta: [[i64; 8]; 2],
    /// 8x6 matrix whose columns span the kernel of `theta`; row k gives the
    /// weights of the subtorus action on `z_{k+1}`.
    pub ell: [[i64; 6]; 8],
    /// Transpose of `ell`.
    pub ell_star: [[i64; 8]; 6],
    /// Right inverse `theta^T / 6`.
    pub sigma: [[Rational64; 2]; 8],
    /// Facet offsets `c`.
    pub offset_c: [i64; 8],
}

impl ConstructionData {
    pub fn self_check(&self) -> Result<()> {
        let oct = octagon();
        for k in 0..8 {
            let hp = oct.halfplanes[k];
            if hp.normal != [self.theta[0][k], self.theta[1][k]] || hp.offset != self.offset_c[k] {
                return Err(Error::SelfCheck(format!(
                    "column {k} of theta does not match the octagon facet"
                )));
            }
        }
        for r in 0..2 {
            for c in 0..6 {
                let s: i64 = (0..8).map(|k| self.theta[r][k] * self.ell[k][c]).sum();
                if s != 0 {
                    return Err(Error::SelfCheck(format!(
                        "theta * ell is nonzero at ({r}, {c})"
                    )));
                }
            }
        }
        for r in 0..2 {
            for c in 0..2 {
                let s: Rational64 = (0..8).map(|k| self.sigma[k][c] * self.theta[r][k]).sum();
                if s != Rational64::from_integer(i64::from(r == c)) {
                    return Err(Error::SelfCheck(format!(
                        "theta * sigma is not the identity at ({r}, {c})"
                    )));
                }
            }
        }
        for r in 0..6 {
            for k in 0..8 {
                if self.ell_star[r][k] != self.ell[k][r] {
                    return Err(Error::SelfCheck(
                        "ell_star is not the transpose of ell".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Constant term and squared-modulus weights of the six manifold equations,
    /// each written as `sum_k w_k |z_k|^2 = rhs`.
    pub fn manifold_equations(&self) -> [([i64; 8], i64); 6] {
        // Sign convention that keeps the right-hand sides positive.
        const SIGN: [i64; 6] = [1, 1, 1, 1, -1, 1];
        let mut out = [([0; 8], 0); 6];
        for (c, o) in out.iter_mut().enumerate() {
            let mut w = [0; 8];
            let mut rhs = 0;
            for k in 0..8 {
                w[k] = SIGN[c] * self.ell[k][c];
                rhs += 2 * SIGN[c] * self.ell[k][c] * self.offset_c[k];
            }
            *o = (w, rhs);
        }
        out
    }
}

pub fn construction_data() -> ConstructionData {
    let theta = [[-1, -1, 0, 1, 1, 1, 0, -1], [0, -1, -1, -1, 0, 1, 1, 1]];
    let ell = [
        [1, 0, 0, 0, 0, 0],
        [0, 1, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0],
        [0, 0, 0, 1, 0, 0],
        [1, 1, 0, -1, -1, 1],
        [0, 0, 0, 0, 1, 0],
        [0, 1, 1, 1, -1, -1],
        [0, 0, 0, 0, 0, 1],
    ];
    let mut ell_star = [[0; 8]; 6];
    for k in 0..8 {
        for c in 0..6 {
            ell_star[c][k] = ell[k][c];
        }
    }
    let mut sigma = [[Rational64::from_integer(0); 2]; 8];
    for k in 0..8 {
        for r in 0..2 {
            sigma[k][r] = Rational64::new(theta[r][k], 6);
        }
    }
    let data = ConstructionData {
        theta,
        ell,
        ell_star,
        sigma,
        offset_c: [0, -1, 0, 2, 3, 5, 3, 2],
    };
    if let Err(e) = data.self_check() {
        panic!("octagon construction data is inconsistent: {e}");
    }
    data
}
