//! Korn, kernel-dimension and orthogonal-decomposition audits.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::Result;
use crate::fem::{shape_gradients, ProblemSpec, StrainOperator};
use crate::linalg::{csr_to_dense, numerical_rank, singular_values};
use crate::mesh::{emit_mesh, BcMode, BoundaryPartition, EdgeLabel, TriangleMesh};
use crate::solver::{OperatorPair, StressSolver};
use crate::tensor::ElasticityTensor;

use super::{audit_rng, jittered_square, random_anisotropic, random_isotropic, random_mixed_partition};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KornReport {
    pub max_ratio: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Largest `‖∇u‖ / ‖E_h u‖` (both L² over the mesh) over random admissible
/// fields. Meaningful as a Korn audit when every boundary vertex is pinned.
pub fn korn_audit(
    strain_op: &StrainOperator<f64>,
    mesh: &TriangleMesh<f64>,
    trials: usize,
    seed: u64,
) -> KornReport {
    let mut rng = audit_rng(seed, "korn");
    let grads: Vec<_> = (0..mesh.triangles().len())
        .map(|t| shape_gradients(mesh.triangle_vertices(t)))
        .collect();
    let areas = mesh.areas();
    let nfree = strain_op.free_dofs().len();
    let mut max_ratio: f64 = 0.0;
    for _ in 0..trials {
        let w = DVector::from_fn(nfree, |_, _| rng.gen_range(-1.0..1.0));
        let u = strain_op.scatter(&w);
        let eps = strain_op.apply(&u);
        let mut grad_sq = 0.0;
        let mut eps_sq = 0.0;
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let mut g = [[0.0; 2]; 2];
            for a in 0..3 {
                for i in 0..2 {
                    for j in 0..2 {
                        g[i][j] += u[2 * tri[a] + i] * grads[t][a][j];
                    }
                }
            }
            grad_sq += areas[t] * g.iter().flatten().map(|v| v * v).sum::<f64>();
            eps_sq += areas[t] * eps.fixed_rows::<3>(3 * t).norm_squared();
        }
        if eps_sq > 0.0 {
            max_ratio = max_ratio.max((grad_sq / eps_sq).sqrt());
        }
    }
    KornReport {
        max_ratio,
        trials,
        seed,
    }
}

/// Dimension of `Ker E_h` on the operator's free dofs.
pub fn kernel_dimension(strain_op: &StrainOperator<f64>, rel_tol: f64) -> usize {
    let dense = csr_to_dense(strain_op.free());
    dense.ncols() - numerical_rank(&dense, rel_tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelDimensions {
    pub unpinned: usize,
    /// With the partition's displacement edges pinned.
    pub pinned: usize,
    /// With both components of vertex 0 pinned.
    pub single_vertex: usize,
}

pub fn kernel_dimensions(
    mesh: &TriangleMesh<f64>,
    partition: &BoundaryPartition,
    rel_tol: f64,
) -> KernelDimensions {
    let unpinned = StrainOperator::with_pinned_dofs(mesh, &BTreeSet::new());
    let pinned = StrainOperator::assemble(mesh, partition);
    let single = StrainOperator::with_pinned_dofs(mesh, &BTreeSet::from([0, 1]));
    KernelDimensions {
        unpinned: kernel_dimension(&unpinned, rel_tol),
        pinned: kernel_dimension(&pinned, rel_tol),
        single_vertex: kernel_dimension(&single, rel_tol),
    }
}

/// `1 / σ_min(E_h)` on free dofs, or `None` when the kernel is nontrivial.
pub fn discrete_korn_constant(strain_op: &StrainOperator<f64>, rel_tol: f64) -> Option<f64> {
    let s = singular_values(&csr_to_dense(strain_op.free()));
    let (top, bottom) = (*s.iter().next()?, *s.iter().next_back()?);
    if s.len() < strain_op.free_dofs().len() || bottom <= rel_tol * top {
        return None;
    }
    Some(1.0 / bottom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubspaceDimensions {
    /// `dim Im(C E_h)`.
    pub image: usize,
    /// `dim Ker D_h`.
    pub kernel: usize,
    /// Length of a stress vector.
    pub total: usize,
}

/// Ranks computed by SVD of the assembled `C E_h` and `D_h`.
pub fn subspace_dimensions(pair: &OperatorPair<f64>, rel_tol: f64) -> SubspaceDimensions {
    let (ns, nd) = (pair.stress_len(), pair.dof_len());
    let mut ce = DMatrix::zeros(ns, nd);
    for k in 0..nd {
        let mut e = DVector::zeros(nd);
        e[k] = 1.0;
        ce.set_column(k, &pair.compatible_stress(&e));
    }
    let mut d = DMatrix::zeros(nd, ns);
    for k in 0..ns {
        let mut e = DVector::zeros(ns);
        e[k] = 1.0;
        d.set_column(k, &pair.adjoint(&e));
    }
    SubspaceDimensions {
        image: numerical_rank(&ce, rel_tol),
        kernel: ns - numerical_rank(&d, rel_tol),
        total: ns,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityReport {
    pub instances: usize,
    /// Largest `|⟨P_U s, P_V s⟩| / (‖P_U s‖ ‖P_V s‖)` in the weighted product.
    pub max_cross: f64,
    /// Largest `‖D P_V s‖ / ‖D s‖`.
    pub max_equilibrium: f64,
    /// Instances where `dim Im(C E) + dim Ker D ≠` stress length.
    pub dimension_failures: usize,
    pub seed: u64,
    /// Mesh text and material of the instance with the largest cross product.
    pub worst_instance: String,
}

/// Random stresses decomposed on `meshes` random jittered squares (m in
/// 2..=8, random partitions), each with three materials: uniform isotropic,
/// uniform anisotropic, and element-wise heterogeneous.
pub fn orthogonality_audit(
    meshes: usize,
    samples: usize,
    seed: u64,
    rel_tol: f64,
) -> Result<OrthogonalityReport> {
    let mut rng = audit_rng(seed, "orthogonality");
    let mut report = OrthogonalityReport {
        instances: 0,
        max_cross: 0.0,
        max_equilibrium: 0.0,
        dimension_failures: 0,
        seed,
        worst_instance: String::new(),
    };
    for i in 0..meshes {
        let mesh = jittered_square(rng.gen_range(2..=8), &mut rng);
        let (partition, mode) = if i % 3 == 0 {
            (
                BoundaryPartition::uniform(&mesh, EdgeLabel::Dirichlet),
                BcMode::DisplacementOnly,
            )
        } else {
            (random_mixed_partition(&mesh, &mut rng), BcMode::Mixed)
        };
        let nt = mesh.triangles().len();
        let iso = random_isotropic(&mut rng);
        let aniso = random_anisotropic(&mut rng);
        let hetero: Vec<ElasticityTensor<f64>> = (0..nt)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    random_isotropic(&mut rng)
                } else {
                    random_anisotropic(&mut rng)
                }
            })
            .collect();
        for (label, material) in [
            ("isotropic", vec![iso.clone(); nt]),
            ("anisotropic", vec![aniso.clone(); nt]),
            ("heterogeneous", hetero),
        ] {
            let zero = [0.0; 2];
            let spec = ProblemSpec::new(
                mesh.clone(),
                partition.clone(),
                material,
                vec![zero; mesh.vertices().len()],
                vec![zero; nt],
                vec![zero; mesh.boundary_edges().len()],
            )?;
            let solver = StressSolver::new(&spec, mode)?;
            let pair = solver.pair();
            let dims = subspace_dimensions(pair, rel_tol);
            if dims.image + dims.kernel != dims.total {
                report.dimension_failures += 1;
            }
            for _ in 0..samples {
                let s = DVector::from_fn(pair.stress_len(), |_, _| rng.gen_range(-1.0..1.0));
                let pu = pair.project_u(&s)?;
                let pv = pair.project_v(&s)?;
                let denom = pair.weighted_norm(&pu) * pair.weighted_norm(&pv);
                let cross = if denom > 0.0 {
                    pair.weighted_ip(&pu, &pv).abs() / denom
                } else {
                    0.0
                };
                let ds = pair.adjoint(&s).norm();
                let eq = if ds > 0.0 {
                    pair.adjoint(&pv).norm() / ds
                } else {
                    0.0
                };
                report.max_equilibrium = report.max_equilibrium.max(eq);
                if cross > report.max_cross || report.worst_instance.is_empty() {
                    report.max_cross = report.max_cross.max(cross);
                    report.worst_instance =
                        format!("# material: {label}\n{}", emit_mesh(&mesh, &partition));
                }
            }
            report.instances += 1;
        }
    }
    Ok(report)
}
