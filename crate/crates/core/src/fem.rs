//! Discrete operators for P1 displacements and element-wise constant stresses
//! on a triangle mesh.
//!
//! Displacement dofs are numbered `2·vertex + axis`. Stresses and strains are
//! stored per triangle as Mandel 3-vectors, so a stress field is a vector of
//! length `3 × triangles`.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::error::{Error, Result};
use crate::linalg::{csr_mul, csr_tr_mul, select_columns};
use crate::mesh::{signed_area2, BoundaryPartition, EdgeLabel, TriangleMesh};
use crate::scalar::Scalar;
use crate::tensor::ElasticityTensor;

/// Mandel components per element.
pub const STRESS_BLOCK: usize = 3;

/// Shape-function gradients of a P1 triangle, one `[∂x, ∂y]` per vertex.
pub fn shape_gradients<T: Scalar>(p: [[T; 2]; 3]) -> [[T; 2]; 3] {
    let two_area = signed_area2(p[0], p[1], p[2]);
    let mut grads = [[T::zero(); 2]; 3];
    for a in 0..3 {
        let (j, k) = ((a + 1) % 3, (a + 2) % 3);
        grads[a] = [
            (p[j][1] - p[k][1]) / two_area,
            (p[k][0] - p[j][0]) / two_area,
        ];
    }
    grads
}

/// The discrete strain operator `u ↦ ½(∇u + ∇uᵀ)` (Mandel, per element).
#[derive(Debug, Clone)]
pub struct StrainOperator<T: Scalar> {
    full: CsrMatrix<T>,
    free: CsrMatrix<T>,
    free_dofs: Vec<usize>,
    free_index: Vec<Option<usize>>,
}

impl<T: Scalar> StrainOperator<T> {
    /// Pins both components of every vertex that touches a pinned-label edge.
    pub fn assemble(mesh: &TriangleMesh<T>, partition: &BoundaryPartition) -> Self {
        let mut pinned = BTreeSet::new();
        for (edge, &label) in mesh.boundary_edges().iter().zip(partition.labels()) {
            if label == EdgeLabel::Dirichlet {
                for v in edge.vertices {
                    pinned.insert(2 * v);
                    pinned.insert(2 * v + 1);
                }
            }
        }
        Self::with_pinned_dofs(mesh, &pinned)
    }

    pub fn with_pinned_dofs(mesh: &TriangleMesh<T>, pinned: &BTreeSet<usize>) -> Self {
        let ndofs = 2 * mesh.vertices().len();
        let rows: Vec<[[(usize, T); 6]; 3]> = (0..mesh.triangles().len())
            .map(|t| element_rows(mesh, t))
            .collect();
        let mut coo = CooMatrix::new(STRESS_BLOCK * mesh.triangles().len(), ndofs);
        for (t, block) in rows.iter().enumerate() {
            for (r, row) in block.iter().enumerate() {
                for &(dof, v) in row {
                    if v != T::zero() {
                        coo.push(STRESS_BLOCK * t + r, dof, v);
                    }
                }
            }
        }
        let full = CsrMatrix::from(&coo);
        let free_dofs: Vec<usize> = (0..ndofs).filter(|d| !pinned.contains(d)).collect();
        let mut free_index = vec![None; ndofs];
        for (k, &d) in free_dofs.iter().enumerate() {
            free_index[d] = Some(k);
        }
        let free = select_columns(&full, &free_dofs);
        Self {
            full,
            free,
            free_dofs,
            free_index,
        }
    }

    /// Matrix on all dofs.
    pub fn full(&self) -> &CsrMatrix<T> {
        &self.full
    }

    /// Matrix restricted to admissible (free) dofs.
    pub fn free(&self) -> &CsrMatrix<T> {
        &self.free
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free_index[dof]
    }

    pub fn dof_count(&self) -> usize {
        self.full.ncols()
    }

    pub fn element_count(&self) -> usize {
        self.full.nrows() / STRESS_BLOCK
    }

    pub fn apply(&self, u: &DVector<T>) -> DVector<T> {
        csr_mul(&self.full, u)
    }

    pub fn apply_free(&self, w: &DVector<T>) -> DVector<T> {
        csr_mul(&self.free, w)
    }

    /// Embeds a free-dof vector into all dofs, zero on pinned ones.
    pub fn scatter(&self, w: &DVector<T>) -> DVector<T> {
        let mut u = DVector::zeros(self.dof_count());
        for (k, &d) in self.free_dofs.iter().enumerate() {
            u[d] = w[k];
        }
        u
    }

    pub fn gather(&self, u: &DVector<T>) -> DVector<T> {
        DVector::from_iterator(self.free_dofs.len(), self.free_dofs.iter().map(|&d| u[d]))
    }
}

fn element_rows<T: Scalar>(mesh: &TriangleMesh<T>, t: usize) -> [[(usize, T); 6]; 3] {
    let tri = mesh.triangles()[t];
    let grads = shape_gradients(mesh.triangle_vertices(t));
    let inv_sqrt2 = T::one() / T::lit(2.0).sqrt();
    let mut rows = [[(0usize, T::zero()); 6]; 3];
    for a in 0..3 {
        let (ux, uy) = (2 * tri[a], 2 * tri[a] + 1);
        let [gx, gy] = grads[a];
        rows[0][2 * a] = (ux, gx);
        rows[0][2 * a + 1] = (uy, T::zero());
        rows[1][2 * a] = (ux, T::zero());
        rows[1][2 * a + 1] = (uy, gy);
        // √2 · ½(∂y ux + ∂x uy)
        rows[2][2 * a] = (ux, gy * inv_sqrt2);
        rows[2][2 * a + 1] = (uy, gx * inv_sqrt2);
    }
    rows
}

/// Element areas and materials: the weighted stress space.
#[derive(Debug, Clone)]
pub struct StressSpace<T: Scalar> {
    areas: Vec<T>,
    material: Vec<ElasticityTensor<T>>,
}

impl<T: Scalar> StressSpace<T> {
    pub fn new(mesh: &TriangleMesh<T>, material: Vec<ElasticityTensor<T>>) -> Result<Self> {
        if material.len() != mesh.triangles().len() {
            return Err(Error::DimensionMismatch {
                expected: mesh.triangles().len(),
                found: material.len(),
            });
        }
        if let Some(c) = material.iter().find(|c| c.dim() != 2) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: c.dim(),
            });
        }
        Ok(Self {
            areas: mesh.areas(),
            material,
        })
    }

    pub fn areas(&self) -> &[T] {
        &self.areas
    }

    pub fn material(&self) -> &[ElasticityTensor<T>] {
        &self.material
    }

    pub fn element_count(&self) -> usize {
        self.areas.len()
    }

    fn check(&self, s: &DVector<T>) -> Result<()> {
        let n = STRESS_BLOCK * self.areas.len();
        if s.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.len(),
            });
        }
        Ok(())
    }

    /// `Σ_e |e| σ_e : C_e⁻¹ τ_e`.
    pub fn weighted_ip(&self, sigma: &DVector<T>, tau: &DVector<T>) -> Result<T> {
        self.check(sigma)?;
        self.check(tau)?;
        let mut acc = T::zero();
        for (e, (&area, c)) in self.areas.iter().zip(&self.material).enumerate() {
            let s = sigma.fixed_rows::<3>(3 * e);
            let t = tau.fixed_rows::<3>(3 * e);
            acc += area * s.dot(&(c.compliance() * t));
        }
        Ok(acc)
    }

    /// Unweighted `Σ_e |e| σ_e : τ_e`.
    pub fn l2_ip(&self, sigma: &DVector<T>, tau: &DVector<T>) -> Result<T> {
        self.check(sigma)?;
        self.check(tau)?;
        Ok(self.areas.iter().enumerate().fold(T::zero(), |acc, (e, &a)| {
            acc + a * sigma.fixed_rows::<3>(3 * e).dot(&tau.fixed_rows::<3>(3 * e))
        }))
    }

    pub fn apply_material(&self, strain: &DVector<T>) -> Result<DVector<T>> {
        self.check(strain)?;
        let mut out = DVector::zeros(strain.len());
        for (e, c) in self.material.iter().enumerate() {
            out.fixed_rows_mut::<3>(3 * e)
                .copy_from(&(c.matrix() * strain.fixed_rows::<3>(3 * e)));
        }
        Ok(out)
    }

    pub fn apply_compliance(&self, stress: &DVector<T>) -> Result<DVector<T>> {
        self.check(stress)?;
        let mut out = DVector::zeros(stress.len());
        for (e, c) in self.material.iter().enumerate() {
            out.fixed_rows_mut::<3>(3 * e)
                .copy_from(&(c.compliance() * stress.fixed_rows::<3>(3 * e)));
        }
        Ok(out)
    }

    pub(crate) fn material_blocks(&self) -> (Vec<DMatrix<T>>, Vec<DMatrix<T>>) {
        (
            self.material.iter().map(|c| c.matrix().clone()).collect(),
            self.material.iter().map(|c| c.compliance().clone()).collect(),
        )
    }
}

/// Given data of a static problem: geometry, boundary partition, material,
/// the displacement datum `u0` (all vertices), body force per element, and
/// traction per boundary edge (read only on traction-labeled edges).
#[derive(Debug, Clone)]
pub struct ProblemSpec<T: Scalar> {
    pub mesh: TriangleMesh<T>,
    pub partition: BoundaryPartition,
    pub material: Vec<ElasticityTensor<T>>,
    pub u0: Vec<[T; 2]>,
    pub body_force: Vec<[T; 2]>,
    pub traction: Vec<[T; 2]>,
}

impl<T: Scalar> ProblemSpec<T> {
    pub fn new(
        mesh: TriangleMesh<T>,
        partition: BoundaryPartition,
        material: Vec<ElasticityTensor<T>>,
        u0: Vec<[T; 2]>,
        body_force: Vec<[T; 2]>,
        traction: Vec<[T; 2]>,
    ) -> Result<Self> {
        let checks = [
            ("material", material.len(), mesh.triangles().len()),
            ("u0", u0.len(), mesh.vertices().len()),
            ("body force", body_force.len(), mesh.triangles().len()),
            ("traction", traction.len(), mesh.boundary_edges().len()),
            ("partition", partition.labels().len(), mesh.boundary_edges().len()),
        ];
        for (name, found, expected) in checks {
            if found != expected {
                return Err(Error::InvalidProblem(format!(
                    "{name} has {found} entries, expected {expected}"
                )));
            }
        }
        let finite = |v: &[[T; 2]]| v.iter().flatten().all(|x| x.is_finite());
        if !finite(&u0) || !finite(&body_force) || !finite(&traction) {
            return Err(Error::InvalidProblem("non-finite load data".into()));
        }
        Ok(Self {
            mesh,
            partition,
            material,
            u0,
            body_force,
            traction,
        })
    }

    /// Zero data with a uniform material.
    pub fn homogeneous(
        mesh: TriangleMesh<T>,
        partition: BoundaryPartition,
        material: ElasticityTensor<T>,
    ) -> Result<Self> {
        let (nt, nv, nb) = (
            mesh.triangles().len(),
            mesh.vertices().len(),
            mesh.boundary_edges().len(),
        );
        let zero = [T::zero(); 2];
        Self::new(
            mesh,
            partition,
            vec![material; nt],
            vec![zero; nv],
            vec![zero; nt],
            vec![zero; nb],
        )
    }

    pub fn u0_vector(&self) -> DVector<T> {
        DVector::from_iterator(2 * self.u0.len(), self.u0.iter().flatten().copied())
    }

    pub fn stress_space(&self) -> Result<StressSpace<T>> {
        StressSpace::new(&self.mesh, self.material.clone())
    }
}

/// `∫ F·φ + ∫_{Γ_T} T·φ` for every dof (pinned ones included): area/3 per
/// vertex for the element-constant body force, length/2 per endpoint for the
/// edge-constant traction.
pub fn assemble_load_full<T: Scalar>(spec: &ProblemSpec<T>) -> DVector<T> {
    let mesh = &spec.mesh;
    let mut f = DVector::zeros(2 * mesh.vertices().len());
    let third = T::one() / T::lit(3.0);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let w = mesh.area(t) * third;
        for &v in tri {
            f[2 * v] += w * spec.body_force[t][0];
            f[2 * v + 1] += w * spec.body_force[t][1];
        }
    }
    let half = T::lit(0.5);
    for (e, edge) in mesh.boundary_edges().iter().enumerate() {
        if spec.partition.label(e) != EdgeLabel::Traction {
            continue;
        }
        let w = edge.length * half;
        for v in edge.vertices {
            f[2 * v] += w * spec.traction[e][0];
            f[2 * v + 1] += w * spec.traction[e][1];
        }
    }
    f
}

/// The load vector restricted to free dofs.
pub fn assemble_load_f<T: Scalar>(spec: &ProblemSpec<T>, strain: &StrainOperator<T>) -> DVector<T> {
    strain.gather(&assemble_load_full(spec))
}

/// `g = C E u0`, element by element.
pub fn assemble_shift_g<T: Scalar>(spec: &ProblemSpec<T>, strain: &StrainOperator<T>) -> DVector<T> {
    let eps = strain.apply(&spec.u0_vector());
    let mut g = DVector::zeros(eps.len());
    for (e, c) in spec.material.iter().enumerate() {
        g.fixed_rows_mut::<3>(3 * e)
            .copy_from(&(c.matrix() * eps.fixed_rows::<3>(3 * e)));
    }
    g
}

/// The discrete divergence/traction operator: the free-dof vector `r` with
/// `r · w = Σ_e |e| σ_e : (E w)_e` for every admissible `w`.
pub fn apply_divergence<T: Scalar>(
    space: &StressSpace<T>,
    strain: &StrainOperator<T>,
    sigma: &DVector<T>,
) -> Result<DVector<T>> {
    space.check(sigma)?;
    if strain.element_count() != space.element_count() {
        return Err(Error::DimensionMismatch {
            expected: space.element_count(),
            found: strain.element_count(),
        });
    }
    let mut scaled = sigma.clone();
    for (e, &a) in space.areas().iter().enumerate() {
        scaled.fixed_rows_mut::<3>(3 * e).scale_mut(a);
    }
    Ok(csr_tr_mul(strain.free(), &scaled))
}
