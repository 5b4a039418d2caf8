//! Closed-form `(u, ε, σ, F)` cases, their finite-difference certification,
//! and convergence studies of the discrete stress against them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DVector, Vector3};
use rand::Rng;

use crate::error::{Error, Result};
use crate::fem::ProblemSpec;
use crate::mesh::{BcMode, BoundaryPartition, EdgeLabel, TriangleMesh};
use crate::solver;
use crate::tensor::ElasticityTensor;

use super::audit_rng;
use super::green::edge_rule;

pub type VectorField = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;
/// Symmetric 2×2 tensor field as a matrix.
pub type TensorField = Arc<dyn Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync>;

const FD_STEP: f64 = 1e-6;
const FD_TOL: f64 = 1e-5;

#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub u_exact: VectorField,
    pub eps_exact: TensorField,
    pub sigma_exact: TensorField,
    pub f_exact: VectorField,
    pub material: ElasticityTensor<f64>,
}

impl fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

fn unit_lame() -> ElasticityTensor<f64> {
    ElasticityTensor::isotropic(1.0, 1.0, 2).expect("λ = μ = 1")
}

fn mandel(t: [[f64; 2]; 2]) -> Vector3<f64> {
    Vector3::new(t[0][0], t[1][1], std::f64::consts::SQRT_2 * t[0][1])
}

impl ManufacturedCase {
    /// `u = (x, 0)`, `σ = [[3, 0], [0, 1]]`, `F = 0` with `λ = μ = 1`.
    pub fn patch() -> Self {
        Self {
            name: "patch".into(),
            u_exact: Arc::new(|p| [p[0], 0.0]),
            eps_exact: Arc::new(|_| [[1.0, 0.0], [0.0, 0.0]]),
            sigma_exact: Arc::new(|_| [[3.0, 0.0], [0.0, 1.0]]),
            f_exact: Arc::new(|_| [0.0, 0.0]),
            material: unit_lame(),
        }
    }

    /// `u = (sin πx sin πy, 0)` with `λ = μ = 1`.
    pub fn sine() -> Self {
        Self {
            name: "sine".into(),
            u_exact: Arc::new(|[x, y]| [(PI * x).sin() * (PI * y).sin(), 0.0]),
            eps_exact: Arc::new(|[x, y]| {
                let shear = 0.5 * PI * (PI * x).sin() * (PI * y).cos();
                [[PI * (PI * x).cos() * (PI * y).sin(), shear], [shear, 0.0]]
            }),
            sigma_exact: Arc::new(|[x, y]| {
                let c = PI * (PI * x).cos() * (PI * y).sin();
                let shear = PI * (PI * x).sin() * (PI * y).cos();
                [[3.0 * c, shear], [shear, c]]
            }),
            f_exact: Arc::new(|[x, y]| {
                [
                    4.0 * PI * PI * (PI * x).sin() * (PI * y).sin(),
                    -2.0 * PI * PI * (PI * x).cos() * (PI * y).cos(),
                ]
            }),
            material: unit_lame(),
        }
    }

    /// The same case with its body force scaled; any factor ≠ 1 on a case
    /// with nonzero `F` makes it inconsistent.
    pub fn with_scaled_force(&self, factor: f64) -> Self {
        let f = self.f_exact.clone();
        Self {
            name: format!("{}-force×{factor}", self.name),
            f_exact: Arc::new(move |p| {
                let v = f(p);
                [factor * v[0], factor * v[1]]
            }),
            ..self.clone()
        }
    }

    /// The discrete problem on the structured `m × m` square: all edges pinned
    /// for [`BcMode::DisplacementOnly`], only `x = 0` for [`BcMode::Mixed`].
    /// `u0` interpolates `u_exact`, the body force is its element average and
    /// the traction the edge average of `σ_exact ν`.
    pub fn problem(&self, m: usize, mode: BcMode) -> Result<ProblemSpec<f64>> {
        let mesh = TriangleMesh::structured_unit_square(m)?;
        let partition = match mode {
            BcMode::DisplacementOnly => BoundaryPartition::uniform(&mesh, EdgeLabel::Dirichlet),
            BcMode::Mixed => BoundaryPartition::from_fn(&mesh, |p, _| {
                if p[0] < 1e-12 {
                    EdgeLabel::Dirichlet
                } else {
                    EdgeLabel::Traction
                }
            }),
        };
        self.problem_on(mesh, partition)
    }

    pub fn problem_on(
        &self,
        mesh: TriangleMesh<f64>,
        partition: BoundaryPartition,
    ) -> Result<ProblemSpec<f64>> {
        let u0 = mesh.vertices().iter().map(|&p| (self.u_exact)(p)).collect();
        let body_force = (0..mesh.triangles().len())
            .map(|t| {
                let mut avg = [0.0; 2];
                for q in edge_midpoints(mesh.triangle_vertices(t)) {
                    let f = (self.f_exact)(q);
                    avg[0] += f[0] / 3.0;
                    avg[1] += f[1] / 3.0;
                }
                avg
            })
            .collect();
        let traction = mesh
            .boundary_edges()
            .iter()
            .map(|edge| {
                let [a, b] = edge.vertices.map(|v| mesh.vertices()[v]);
                let n = edge.normal;
                let mut avg = [0.0; 2];
                for (p, w) in edge_rule(a, b) {
                    let s = (self.sigma_exact)(p);
                    avg[0] += w * (s[0][0] * n[0] + s[0][1] * n[1]) / edge.length;
                    avg[1] += w * (s[1][0] * n[0] + s[1][1] * n[1]) / edge.length;
                }
                avg
            })
            .collect();
        let nt = mesh.triangles().len();
        ProblemSpec::new(
            mesh,
            partition,
            vec![self.material.clone(); nt],
            u0,
            body_force,
            traction,
        )
    }
}

fn edge_midpoints(p: [[f64; 2]; 3]) -> [[f64; 2]; 3] {
    let mid = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    [mid(p[0], p[1]), mid(p[1], p[2]), mid(p[2], p[0])]
}

/// `‖σ_h − σ_exact‖_{L²}` with the edge-midpoint rule (exact for quadratics).
pub fn stress_l2_error(
    mesh: &TriangleMesh<f64>,
    sigma_h: &DVector<f64>,
    sigma_exact: &TensorField,
) -> f64 {
    let mut sum = 0.0;
    for t in 0..mesh.triangles().len() {
        let sh = sigma_h.fixed_rows::<3>(3 * t);
        let w = mesh.area(t) / 3.0;
        for q in edge_midpoints(mesh.triangle_vertices(t)) {
            sum += w * (sh - mandel(sigma_exact(q))).norm_squared();
        }
    }
    sum.sqrt()
}

/// Checks `ε = sym ∇u`, `σ = C ε` and `F = −div σ` at `samples` random points
/// of `[0.1, 0.9]²` by central differences; returns the largest residual.
pub fn certify_manufactured(case: &ManufacturedCase, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = audit_rng(seed, "certify-manufactured");
    let h = FD_STEP;
    let shift = |p: [f64; 2], axis: usize, s: f64| {
        let mut q = p;
        q[axis] += s;
        q
    };
    let fail = |detail: &str, residual: f64| Error::InconsistentCase {
        case: case.name.clone(),
        detail: detail.into(),
        residual,
    };
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = [rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)];

        // grad[i][j] = ∂_j u_i
        let mut grad = [[0.0; 2]; 2];
        for j in 0..2 {
            let (up, dn) = ((case.u_exact)(shift(p, j, h)), (case.u_exact)(shift(p, j, -h)));
            for i in 0..2 {
                grad[i][j] = (up[i] - dn[i]) / (2.0 * h);
            }
        }
        let eps = (case.eps_exact)(p);
        let mut r: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                r = r.max((0.5 * (grad[i][j] + grad[j][i]) - eps[i][j]).abs());
            }
        }
        if r > FD_TOL {
            return Err(fail("strain differs from the symmetric gradient", r));
        }
        worst = worst.max(r);

        let sigma = mandel((case.sigma_exact)(p));
        let r = (case.material.matrix() * DVector::from_column_slice(mandel(eps).as_slice()))
            .iter()
            .zip(sigma.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if r > FD_TOL {
            return Err(fail("stress differs from C applied to strain", r));
        }
        worst = worst.max(r);

        let mut div = [0.0; 2];
        for j in 0..2 {
            let (up, dn) = (
                (case.sigma_exact)(shift(p, j, h)),
                (case.sigma_exact)(shift(p, j, -h)),
            );
            for i in 0..2 {
                div[i] += (up[i][j] - dn[i][j]) / (2.0 * h);
            }
        }
        let f = (case.f_exact)(p);
        let r = (f[0] + div[0]).abs().max((f[1] + div[1]).abs());
        if r > FD_TOL {
            return Err(fail("body force differs from −div σ", r));
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub m: usize,
    pub h: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub case: String,
    pub mode: BcMode,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log error` against `log h`; `None` when exact.
    pub rate: Option<f64>,
    /// Every error at or below `1e-10`.
    pub exact: bool,
}

const EXACT_TOL: f64 = 1e-10;

pub fn convergence_study(
    case: &ManufacturedCase,
    sizes: &[usize],
    mode: BcMode,
) -> Result<ConvergenceReport> {
    if sizes.len() < 3 || sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
        return Err(Error::InvalidProblem(
            "convergence sizes must be positive, strictly increasing, at least three".into(),
        ));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &m in sizes {
        let spec = case.problem(m, mode)?;
        let sol = solver::solve(&spec, mode)?;
        rows.push(ConvergenceRow {
            m,
            h: 1.0 / m as f64,
            error: stress_l2_error(&spec.mesh, &sol.sigma, &case.sigma_exact),
        });
    }
    let exact = rows.iter().all(|r| r.error <= EXACT_TOL);
    let rate = (!exact).then(|| {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.h.ln(), r.error.ln())).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(ConvergenceReport {
        case: case.name.clone(),
        mode,
        rows,
        rate,
        exact,
    })
}
