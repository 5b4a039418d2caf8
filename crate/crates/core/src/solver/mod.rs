//! Stress solves on triangle meshes.
//!
//! The stress is computed as `σ = P_V g + Q f` with `g = C E u0` and `f` the
//! assembled load; the displacement is recovered afterwards from the same
//! stiffness solves. A classical displacement-first route is provided
//! separately for cross-checking.

mod pair;

pub use pair::{OperatorPair, PairSolution};

use nalgebra::DVector;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use crate::error::Result;
use crate::fem::{
    assemble_load_f, assemble_load_full, assemble_shift_g, shape_gradients, ProblemSpec,
    StrainOperator, StressSpace, STRESS_BLOCK,
};
use crate::linalg::{symmetric_from_upper, SpdSystem};
use crate::mesh::{validate_partition, BcMode};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics<T: Scalar> {
    /// `‖D σ − f‖` relative to the load scale.
    pub equilibrium_residual: T,
    /// Relative `V`-component of `σ − g`.
    pub orthogonality_residual: T,
    /// Largest `|C⁻¹σ − E u|` entry.
    pub strain_mismatch: T,
    pub complementary_energy: T,
    pub potential_energy: T,
}

#[derive(Debug, Clone)]
pub struct StressSolution<T: Scalar> {
    /// Per-element Mandel stress.
    pub sigma: DVector<T>,
    /// Per-element Mandel strain `C⁻¹ σ`.
    pub epsilon: DVector<T>,
    /// Nodal displacement, `2·vertex + axis`.
    pub u: DVector<T>,
    pub diagnostics: Diagnostics<T>,
}

/// Operators and stiffness factorization for one geometry/partition/material;
/// reusable across load data.
pub struct StressSolver<T: Scalar> {
    strain: StrainOperator<T>,
    space: StressSpace<T>,
    pair: OperatorPair<T>,
}

impl<T: Scalar> StressSolver<T> {
    pub fn new(spec: &ProblemSpec<T>, mode: BcMode) -> Result<Self> {
        validate_partition(&spec.mesh, &spec.partition, mode)?;
        let strain = StrainOperator::assemble(&spec.mesh, &spec.partition);
        let space = spec.stress_space()?;
        let (material, compliance) = space.material_blocks();
        let pair = OperatorPair::new(
            strain.free().clone(),
            STRESS_BLOCK,
            space.areas().to_vec(),
            material,
            compliance,
        )?;
        Ok(Self {
            strain,
            space,
            pair,
        })
    }

    pub fn strain_operator(&self) -> &StrainOperator<T> {
        &self.strain
    }

    pub fn space(&self) -> &StressSpace<T> {
        &self.space
    }

    pub fn pair(&self) -> &OperatorPair<T> {
        &self.pair
    }

    /// `K = Eᵀ diag(area) C E` on free dofs.
    pub fn stiffness(&self) -> &CscMatrix<T> {
        self.pair.stiffness()
    }

    pub fn lift_q(&self, f: &DVector<T>) -> Result<DVector<T>> {
        self.pair.lift(f)
    }

    pub fn project_v(&self, g: &DVector<T>) -> Result<DVector<T>> {
        self.pair.project_v(g)
    }

    pub fn project_u(&self, s: &DVector<T>) -> Result<DVector<T>> {
        self.pair.project_u(s)
    }

    /// Solves for the data carried by `spec`, which must share this solver's
    /// mesh, partition and material.
    pub fn solve(&self, spec: &ProblemSpec<T>) -> Result<StressSolution<T>> {
        let g = assemble_shift_g(spec, &self.strain);
        let f = assemble_load_f(spec, &self.strain);
        let sol = self.pair.solve(&g, &f)?;
        let u = spec.u0_vector() + self.strain.scatter(&sol.correction);
        let epsilon = self.space.apply_compliance(&sol.sigma)?;
        let strain_mismatch = (&epsilon - self.strain.apply(&u)).amax();
        let diagnostics = Diagnostics {
            equilibrium_residual: self.pair.equilibrium_residual(&sol.sigma, &f, &g),
            orthogonality_residual: self.pair.orthogonality_residual(&sol.sigma, &g)?,
            strain_mismatch,
            complementary_energy: self.pair.complementary_energy(&sol.sigma, &g),
            potential_energy: potential_energy(spec, &u),
        };
        Ok(StressSolution {
            sigma: sol.sigma,
            epsilon,
            u,
            diagnostics,
        })
    }
}

pub fn solve_mixed<T: Scalar>(spec: &ProblemSpec<T>) -> Result<StressSolution<T>> {
    StressSolver::new(spec, BcMode::Mixed)?.solve(spec)
}

pub fn solve_displacement_bc<T: Scalar>(spec: &ProblemSpec<T>) -> Result<StressSolution<T>> {
    StressSolver::new(spec, BcMode::DisplacementOnly)?.solve(spec)
}

pub fn solve<T: Scalar>(spec: &ProblemSpec<T>, mode: BcMode) -> Result<StressSolution<T>> {
    match mode {
        BcMode::Mixed => solve_mixed(spec),
        BcMode::DisplacementOnly => solve_displacement_bc(spec),
    }
}

/// Displacement-first solution: element stiffness matrices assembled
/// directly, `K_ff u_f = f_f − K_fp u0_p`, then `σ = C ε(u)` per element.
///
/// Returns `(u, σ)`.
pub fn solve_displacement_route<T: Scalar>(
    spec: &ProblemSpec<T>,
    mode: BcMode,
) -> Result<(DVector<T>, DVector<T>)> {
    validate_partition(&spec.mesh, &spec.partition, mode)?;
    let mesh = &spec.mesh;
    let strain = StrainOperator::assemble(mesh, &spec.partition);
    let ndofs = 2 * mesh.vertices().len();
    let nfree = strain.free_dofs().len();
    let u0 = spec.u0_vector();
    let mut rhs = strain.gather(&assemble_load_full(spec));
    let mut upper = CooMatrix::new(nfree, nfree);
    let sqrt2 = T::lit(2.0).sqrt();
    let mut sigma = DVector::zeros(3 * mesh.triangles().len());
    let mut element_b = Vec::with_capacity(mesh.triangles().len());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let grads = shape_gradients(mesh.triangle_vertices(t));
        // engineering-shear B matrix, converted to Mandel via the D scaling below
        let mut b = nalgebra::SMatrix::<T, 3, 6>::zeros();
        for a in 0..3 {
            b[(0, 2 * a)] = grads[a][0];
            b[(1, 2 * a + 1)] = grads[a][1];
            b[(2, 2 * a)] = grads[a][1];
            b[(2, 2 * a + 1)] = grads[a][0];
        }
        // Voigt-form material: D_voigt = S C S with S = diag(1, 1, 1/√2)
        let c = spec.material[t].matrix();
        let mut d = nalgebra::Matrix3::<T>::zeros();
        let scale = [T::one(), T::one(), T::one() / sqrt2];
        for i in 0..3 {
            for j in 0..3 {
                d[(i, j)] = scale[i] * c[(i, j)] * scale[j];
            }
        }
        let ke = b.transpose() * d * b * mesh.area(t);
        let dofs: Vec<usize> = tri.iter().flat_map(|&v| [2 * v, 2 * v + 1]).collect();
        for (i, &di) in dofs.iter().enumerate() {
            let Some(p) = strain.free_index(di) else {
                continue;
            };
            for (j, &dj) in dofs.iter().enumerate() {
                match strain.free_index(dj) {
                    Some(q) if p <= q => upper.push(p, q, ke[(i, j)]),
                    Some(_) => {}
                    None => rhs[p] -= ke[(i, j)] * u0[dj],
                }
            }
        }
        element_b.push((b, d, dofs));
    }
    let system = SpdSystem::factor(symmetric_from_upper(&upper))?;
    let uf = system.solve(&rhs);
    let mut u = u0.clone();
    for (k, &d) in strain.free_dofs().iter().enumerate() {
        u[d] = uf[k];
    }
    debug_assert_eq!(u.len(), ndofs);
    for (t, (b, d, dofs)) in element_b.iter().enumerate() {
        let ue = nalgebra::SVector::<T, 6>::from_iterator(dofs.iter().map(|&k| u[k]));
        let voigt = d * (b * ue);
        sigma[3 * t] = voigt[0];
        sigma[3 * t + 1] = voigt[1];
        sigma[3 * t + 2] = voigt[2] * sqrt2;
    }
    Ok((u, sigma))
}

/// `½⟨σ,σ⟩_{C⁻¹} − ⟨g,σ⟩_{C⁻¹}`.
pub fn complementary_energy<T: Scalar>(
    space: &StressSpace<T>,
    sigma: &DVector<T>,
    g: &DVector<T>,
) -> Result<T> {
    Ok(T::lit(0.5) * space.weighted_ip(sigma, sigma)? - space.weighted_ip(g, sigma)?)
}

/// `½∫ E(u):C E(u) − ∫ F·u − ∫_{Γ_T} T·u`, integrated exactly for P1 `u`.
pub fn potential_energy<T: Scalar>(spec: &ProblemSpec<T>, u: &DVector<T>) -> T {
    let mesh = &spec.mesh;
    let inv_sqrt2 = T::one() / T::lit(2.0).sqrt();
    let mut energy = T::zero();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let grads = shape_gradients(mesh.triangle_vertices(t));
        let mut eps = nalgebra::Vector3::<T>::zeros();
        for a in 0..3 {
            let (ux, uy) = (u[2 * tri[a]], u[2 * tri[a] + 1]);
            eps[0] += grads[a][0] * ux;
            eps[1] += grads[a][1] * uy;
            eps[2] += (grads[a][1] * ux + grads[a][0] * uy) * inv_sqrt2;
        }
        energy += T::lit(0.5) * mesh.area(t) * eps.dot(&(spec.material[t].matrix() * eps));
    }
    energy - assemble_load_full(spec).dot(u)
}
