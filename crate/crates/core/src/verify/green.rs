//! Green's formula `∫_{Γ_T} (σν)·u = ∫ σ:E(u) + ∫ (div σ)·u` for polynomial
//! fields vanishing on the displacement boundary, integrated exactly.

use crate::error::{Error, Result};
use crate::mesh::{BoundaryPartition, EdgeLabel, TriangleMesh};

use super::poly::{DisplacementPoly, Poly, StressPoly};

const MAX_DEGREE: u32 = 2;

// Gauss–Legendre on [0, 1]
const GL3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 0.277_777_777_777_777_8),
    (0.5, 0.444_444_444_444_444_4),
    (0.887_298_334_620_741_7, 0.277_777_777_777_777_8),
];
const GL4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_9),
    (0.330_009_478_207_571_9, 0.326_072_577_431_273_1),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_1),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_9),
];

/// Collapsed-square (Duffy) rule: exact for polynomials of degree ≤ 6.
/// Weights sum to the triangle's area.
pub(crate) fn triangle_rule(p: [[f64; 2]; 3]) -> Vec<([f64; 2], f64)> {
    let two_area =
        (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let mut out = Vec::with_capacity(16);
    for &(xi, wx) in &GL4 {
        for &(eta, we) in &GL4 {
            let (a, b) = (xi * (1.0 - eta), xi * eta);
            let q = [
                p[0][0] + a * (p[1][0] - p[0][0]) + b * (p[2][0] - p[0][0]),
                p[0][1] + a * (p[1][1] - p[0][1]) + b * (p[2][1] - p[0][1]),
            ];
            out.push((q, wx * we * xi * two_area));
        }
    }
    out
}

/// Three-point Gauss rule on a segment, exact to degree 5; weights sum to its length.
pub(crate) fn edge_rule(a: [f64; 2], b: [f64; 2]) -> Vec<([f64; 2], f64)> {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    GL3.iter()
        .map(|&(t, w)| ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], w * len))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenResidual {
    /// `∫_{Γ_T} (σν)·u`.
    pub boundary: f64,
    /// `∫ σ:E(u) + ∫ (div σ)·u`.
    pub volume: f64,
    pub residual: f64,
}

pub fn green_residual(
    mesh: &TriangleMesh<f64>,
    partition: &BoundaryPartition,
    sigma: &StressPoly,
    u: &DisplacementPoly,
) -> Result<GreenResidual> {
    for degree in [sigma.degree(), u.degree()] {
        if degree > MAX_DEGREE {
            return Err(Error::DegreeTooHigh {
                degree: degree as usize,
                max: MAX_DEGREE as usize,
            });
        }
    }
    if partition.labels().len() != mesh.boundary_edges().len() {
        return Err(Error::DimensionMismatch {
            expected: mesh.boundary_edges().len(),
            found: partition.labels().len(),
        });
    }
    let vertices = mesh.vertices();
    let mut boundary = 0.0;
    let mut max_on_dirichlet: f64 = 0.0;
    for (e, edge) in mesh.boundary_edges().iter().enumerate() {
        let [a, b] = edge.vertices.map(|v| vertices[v]);
        match partition.label(e) {
            EdgeLabel::Dirichlet => {
                for p in [a, b, [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]] {
                    let v = u.eval(p);
                    max_on_dirichlet = max_on_dirichlet.max(v[0].abs()).max(v[1].abs());
                }
            }
            EdgeLabel::Traction => {
                let n = edge.normal;
                for (p, w) in edge_rule(a, b) {
                    let s = sigma.eval(p);
                    let v = u.eval(p);
                    let t = [
                        s[0][0] * n[0] + s[0][1] * n[1],
                        s[1][0] * n[0] + s[1][1] * n[1],
                    ];
                    boundary += w * (t[0] * v[0] + t[1] * v[1]);
                }
            }
        }
    }
    // a quadratic vanishing at both endpoints and the midpoint vanishes on the edge
    if max_on_dirichlet > 1e-12 {
        return Err(Error::NonVanishingDisplacement {
            max_value: max_on_dirichlet,
        });
    }
    let mut volume = 0.0;
    for t in 0..mesh.triangles().len() {
        for (p, w) in triangle_rule(mesh.triangle_vertices(t)) {
            let s = sigma.eval(p);
            let eps = u.strain(p);
            let div = sigma.div(p);
            let v = u.eval(p);
            let contraction = s[0][0] * eps[0][0]
                + 2.0 * s[0][1] * eps[0][1]
                + s[1][1] * eps[1][1];
            volume += w * (contraction + div[0] * v[0] + div[1] * v[1]);
        }
    }
    Ok(GreenResidual {
        boundary,
        volume,
        residual: (boundary - volume).abs(),
    })
}

/// A named polynomial pair with the partition it is evaluated on.
#[derive(Debug, Clone)]
pub struct GreenPair {
    pub name: &'static str,
    pub mesh: TriangleMesh<f64>,
    pub partition: BoundaryPartition,
    pub sigma: StressPoly,
    pub u: DisplacementPoly,
}

/// Built-in pairs on the unit square (m = 4): left edge pinned (every `u`
/// carries a factor `x`), plus an all-traction pair.
pub fn builtin_green_pairs() -> Vec<GreenPair> {
    let mesh = TriangleMesh::<f64>::structured_unit_square(4).expect("m = 4");
    let left = BoundaryPartition::from_fn(&mesh, |p, _| {
        if p[0] < 1e-12 {
            EdgeLabel::Dirichlet
        } else {
            EdgeLabel::Traction
        }
    });
    let all_traction = BoundaryPartition::uniform(&mesh, EdgeLabel::Traction);
    let p = Poly::new;
    let pairs = [
        (
            "constant-stress/linear-u",
            &left,
            StressPoly {
                xx: Poly::constant(1.0),
                yy: Poly::constant(2.0),
                xy: Poly::constant(0.5),
            },
            DisplacementPoly {
                x: p(&[(1.0, 1, 0)]),
                y: p(&[(2.0, 1, 0)]),
            },
        ),
        (
            "zero-stress",
            &left,
            StressPoly {
                xx: Poly::zero(),
                yy: Poly::zero(),
                xy: Poly::zero(),
            },
            DisplacementPoly {
                x: p(&[(1.0, 1, 1)]),
                y: p(&[(1.0, 1, 0)]),
            },
        ),
        (
            "linear-stress/quadratic-u",
            &left,
            StressPoly {
                xx: p(&[(1.0, 1, 0), (1.0, 0, 1)]),
                yy: p(&[(1.0, 0, 1), (-1.0, 0, 0)]),
                xy: p(&[(2.0, 1, 0)]),
            },
            DisplacementPoly {
                x: p(&[(1.0, 2, 0)]),
                y: p(&[(1.0, 1, 1), (1.0, 1, 0)]),
            },
        ),
        (
            "quadratic-stress/quadratic-u",
            &left,
            StressPoly {
                xx: p(&[(1.0, 2, 0)]),
                yy: p(&[(1.0, 0, 2)]),
                xy: p(&[(1.0, 1, 1), (-0.5, 0, 0)]),
            },
            DisplacementPoly {
                x: p(&[(1.0, 1, 1)]),
                y: p(&[(1.0, 1, 0), (-1.0, 2, 0)]),
            },
        ),
        (
            "all-traction/quadratic",
            &all_traction,
            StressPoly {
                xx: p(&[(1.0, 0, 0), (2.0, 1, 1)]),
                yy: p(&[(-1.0, 2, 0), (1.0, 0, 1)]),
                xy: p(&[(3.0, 0, 2), (1.0, 1, 0)]),
            },
            DisplacementPoly {
                x: p(&[(1.0, 0, 0), (1.0, 2, 0)]),
                y: p(&[(1.0, 0, 1), (-1.0, 1, 1)]),
            },
        ),
    ];
    pairs
        .into_iter()
        .map(|(name, partition, sigma, u)| GreenPair {
            name,
            mesh: mesh.clone(),
            partition: partition.clone(),
            sigma,
            u,
        })
        .collect()
}
