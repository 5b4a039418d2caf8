//! Independent oracles and property audits (double precision).
//!
//! Every randomized audit draws from a ChaCha stream derived from a user seed
//! and the audit's name, so runs are reproducible audit by audit.

mod audits;
mod green;
pub mod library;
mod manufactured;
mod poly;
mod suite;
mod truss;

pub use audits::{
    discrete_korn_constant, kernel_dimension, kernel_dimensions, korn_audit, orthogonality_audit,
    subspace_dimensions, KernelDimensions, KornReport, OrthogonalityReport, SubspaceDimensions,
};
pub use green::{builtin_green_pairs, green_residual, GreenPair, GreenResidual};
pub use manufactured::{
    certify_manufactured, convergence_study, stress_l2_error, ConvergenceReport, ConvergenceRow,
    ManufacturedCase,
};
pub use poly::{DisplacementPoly, Poly, StressPoly};
pub use suite::{run_suite, AuditRecord};
pub use truss::{direct_stiffness, framework_cross_check, random_framework, DirectStiffness};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{BoundaryPartition, EdgeLabel, TriangleMesh};
use crate::tensor::ElasticityTensor;

/// Default audit seed.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// RNG stream for one audit: the seed mixed with an FNV-1a hash of its name.
pub fn audit_rng(seed: u64, audit: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in audit.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

/// Structured unit-square mesh with interior vertices jittered by up to
/// `0.12 h` per coordinate; the boundary stays on the square.
pub fn jittered_square(m: usize, rng: &mut impl Rng) -> TriangleMesh<f64> {
    let base = TriangleMesh::<f64>::structured_unit_square(m).expect("m ≥ 1");
    let h = 1.0 / m as f64;
    let vertices = base
        .vertices()
        .iter()
        .map(|&[x, y]| {
            let interior = x > 1e-12 && x < 1.0 - 1e-12 && y > 1e-12 && y < 1.0 - 1e-12;
            if interior {
                [
                    x + rng.gen_range(-0.12..0.12) * h,
                    y + rng.gen_range(-0.12..0.12) * h,
                ]
            } else {
                [x, y]
            }
        })
        .collect();
    TriangleMesh::new(vertices, base.triangles().to_vec(), false).expect("jitter keeps orientation")
}

/// A mixed partition: displacement on one side of the square up to a random
/// fraction of its length (always at least its first edge), traction elsewhere.
pub fn random_mixed_partition(mesh: &TriangleMesh<f64>, rng: &mut impl Rng) -> BoundaryPartition {
    let side = rng.gen_range(0..4);
    let cut: f64 = rng.gen_range(0.3..=1.0);
    let classify = |e: usize| {
        let (p, n) = (mesh.midpoint(e), mesh.boundary_edges()[e].normal);
        match side {
            0 => (n[0] < -0.5, p[1]),
            1 => (n[0] > 0.5, p[1]),
            2 => (n[1] < -0.5, p[0]),
            _ => (n[1] > 0.5, p[0]),
        }
    };
    let edges = 0..mesh.boundary_edges().len();
    let first = edges
        .clone()
        .map(classify)
        .filter(|&(on, _)| on)
        .map(|(_, along)| along)
        .fold(f64::INFINITY, f64::min);
    let labels = edges
        .map(|e| match classify(e) {
            (true, along) if along <= cut.max(first) => EdgeLabel::Dirichlet,
            _ => EdgeLabel::Traction,
        })
        .collect();
    BoundaryPartition::new(mesh, labels).expect("one label per edge")
}

/// Random SPD Mandel matrix `A Aᵀ + s I` with `s ∈ [0.2, 1)`.
pub fn random_anisotropic(rng: &mut impl Rng) -> ElasticityTensor<f64> {
    let a = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
    let m = &a * a.transpose() + DMatrix::identity(3, 3) * rng.gen_range(0.2..1.0);
    ElasticityTensor::from_mandel(m, 2).expect("shifted Gram matrix is SPD")
}

pub fn random_isotropic(rng: &mut impl Rng) -> ElasticityTensor<f64> {
    ElasticityTensor::isotropic(rng.gen_range(0.0..2.0), rng.gen_range(0.2..2.0), 2)
        .expect("valid moduli")
}

/// A mixed problem on a random jittered square (m in 2..=8) with a random
/// partition, element-wise random materials and random data.
pub fn random_mixed_problem(rng: &mut impl Rng) -> crate::fem::ProblemSpec<f64> {
    let mesh = jittered_square(rng.gen_range(2..=8), rng);
    let partition = random_mixed_partition(&mesh, rng);
    let nt = mesh.triangles().len();
    let uniform = rng.gen_bool(0.5);
    let base = random_anisotropic(rng);
    let material = (0..nt)
        .map(|_| {
            if uniform {
                base.clone()
            } else if rng.gen_bool(0.5) {
                random_isotropic(rng)
            } else {
                random_anisotropic(rng)
            }
        })
        .collect();
    let mut pair = |n: usize, scale: f64| -> Vec<[f64; 2]> {
        (0..n)
            .map(|_| [rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)])
            .collect()
    };
    let u0 = pair(mesh.vertices().len(), 0.1);
    let body_force = pair(nt, 1.0);
    let traction = pair(mesh.boundary_edges().len(), 1.0);
    crate::fem::ProblemSpec::new(mesh, partition, material, u0, body_force, traction)
        .expect("consistent sizes")
}
