//! Orthogonal-subspace machinery for one adjoint operator pair.
//!
//! The stress space is a direct sum of blocks (one per element or bar), each
//! carrying a measure `|e|` and an SPD material block `C_e`. It is equipped
//! with the weighted inner product `⟨σ, τ⟩ = Σ_e |e| σ_e · C_e⁻¹ τ_e`.
//!
//! Given the strain map `E` on admissible displacements, the two subspaces are
//! `U = C · Im E` and `V = Ker D`, where `D = Eᵀ diag(|e|)` is the adjoint of
//! `C E` in the weighted product. Both `P_V` and the lift `Q = (D|_U)⁻¹` are
//! realized through the stiffness `K = D C E`, factored once.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CscMatrix, CsrMatrix};

use crate::error::{Error, Result};
use crate::linalg::{csr_mul, csr_tr_mul, symmetric_from_upper, SpdSystem};
use crate::scalar::Scalar;

/// Result of `σ = P_V g + Q f` together with the displacement correction
/// `w = K⁻¹ (f − D g)` that recovers the kinematic unknowns.
#[derive(Debug, Clone)]
pub struct PairSolution<T: Scalar> {
    pub sigma: DVector<T>,
    pub projected_shift: DVector<T>,
    pub lifted_load: DVector<T>,
    pub correction: DVector<T>,
}

pub struct OperatorPair<T: Scalar> {
    strain: CsrMatrix<T>,
    block: usize,
    measure: Vec<T>,
    material: Vec<DMatrix<T>>,
    compliance: Vec<DMatrix<T>>,
    stiffness: SpdSystem<T>,
}

impl<T: Scalar> OperatorPair<T> {
    pub fn new(
        strain: CsrMatrix<T>,
        block: usize,
        measure: Vec<T>,
        material: Vec<DMatrix<T>>,
        compliance: Vec<DMatrix<T>>,
    ) -> Result<Self> {
        let blocks = measure.len();
        if strain.nrows() != blocks * block {
            return Err(Error::DimensionMismatch {
                expected: blocks * block,
                found: strain.nrows(),
            });
        }
        if material.len() != blocks || compliance.len() != blocks {
            return Err(Error::DimensionMismatch {
                expected: blocks,
                found: material.len().min(compliance.len()),
            });
        }
        let stiffness = SpdSystem::factor(assemble_stiffness(&strain, block, &measure, &material))?;
        Ok(Self {
            strain,
            block,
            measure,
            material,
            compliance,
            stiffness,
        })
    }

    pub fn stress_len(&self) -> usize {
        self.strain.nrows()
    }

    pub fn dof_len(&self) -> usize {
        self.strain.ncols()
    }

    pub fn strain_matrix(&self) -> &CsrMatrix<T> {
        &self.strain
    }

    pub fn stiffness(&self) -> &CscMatrix<T> {
        self.stiffness.matrix()
    }

    fn blockwise(&self, x: &DVector<T>, mats: &[DMatrix<T>]) -> DVector<T> {
        let s = self.block;
        let mut out = DVector::zeros(x.len());
        for (b, m) in mats.iter().enumerate() {
            let xs = x.rows(b * s, s);
            out.rows_mut(b * s, s).copy_from(&(m * xs));
        }
        out
    }

    pub fn apply_material(&self, strain: &DVector<T>) -> DVector<T> {
        self.blockwise(strain, &self.material)
    }

    pub fn apply_compliance(&self, stress: &DVector<T>) -> DVector<T> {
        self.blockwise(stress, &self.compliance)
    }

    pub fn weighted_ip(&self, a: &DVector<T>, b: &DVector<T>) -> T {
        let cb = self.apply_compliance(b);
        self.l2_ip(a, &cb)
    }

    pub fn weighted_norm(&self, a: &DVector<T>) -> T {
        self.weighted_ip(a, a).max(T::zero()).sqrt()
    }

    /// Unweighted `Σ_e |e| a_e · b_e`.
    pub fn l2_ip(&self, a: &DVector<T>, b: &DVector<T>) -> T {
        let s = self.block;
        self.measure
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (e, &m)| {
                acc + m * a.rows(e * s, s).dot(&b.rows(e * s, s))
            })
    }

    /// `E w` for an admissible displacement `w`.
    pub fn strain_of(&self, w: &DVector<T>) -> DVector<T> {
        csr_mul(&self.strain, w)
    }

    /// `C E w`: the element of `U` generated by `w`.
    pub fn compatible_stress(&self, w: &DVector<T>) -> DVector<T> {
        self.apply_material(&self.strain_of(w))
    }

    /// `D σ = Eᵀ diag(|e|) σ`, so that `(D σ) · w = ⟨σ, C E w⟩` for every `w`.
    pub fn adjoint(&self, sigma: &DVector<T>) -> DVector<T> {
        let s = self.block;
        let mut scaled = sigma.clone();
        for (e, &m) in self.measure.iter().enumerate() {
            scaled.rows_mut(e * s, s).scale_mut(m);
        }
        csr_tr_mul(&self.strain, &scaled)
    }

    pub fn solve_stiffness(&self, rhs: &DVector<T>) -> Result<DVector<T>> {
        if rhs.len() != self.dof_len() {
            return Err(Error::DimensionMismatch {
                expected: self.dof_len(),
                found: rhs.len(),
            });
        }
        let x = self.stiffness.solve(rhs);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolveFailure("non-finite stiffness solution".into()));
        }
        Ok(x)
    }

    /// `Q f`: the unique element of `U` whose adjoint image is `f`.
    pub fn lift(&self, f: &DVector<T>) -> Result<DVector<T>> {
        Ok(self.compatible_stress(&self.solve_stiffness(f)?))
    }

    /// Orthogonal projection onto `V = Ker D`.
    pub fn project_v(&self, g: &DVector<T>) -> Result<DVector<T>> {
        self.check_stress(g)?;
        let w = self.solve_stiffness(&self.adjoint(g))?;
        Ok(g - self.compatible_stress(&w))
    }

    /// Orthogonal projection onto `U = C Im E`.
    pub fn project_u(&self, s: &DVector<T>) -> Result<DVector<T>> {
        self.check_stress(s)?;
        let w = self.solve_stiffness(&self.adjoint(s))?;
        Ok(self.compatible_stress(&w))
    }

    fn check_stress(&self, s: &DVector<T>) -> Result<()> {
        if s.len() != self.stress_len() {
            return Err(Error::DimensionMismatch {
                expected: self.stress_len(),
                found: s.len(),
            });
        }
        Ok(())
    }

    /// The intersection point of `U + g` and `V + Q f`.
    pub fn solve(&self, g: &DVector<T>, f: &DVector<T>) -> Result<PairSolution<T>> {
        self.check_stress(g)?;
        let shift_dofs = self.solve_stiffness(&self.adjoint(g))?;
        let load_dofs = self.solve_stiffness(f)?;
        let projected_shift = g - self.compatible_stress(&shift_dofs);
        let lifted_load = self.compatible_stress(&load_dofs);
        let sigma = &projected_shift + &lifted_load;
        Ok(PairSolution {
            sigma,
            projected_shift,
            lifted_load,
            correction: load_dofs - shift_dofs,
        })
    }

    /// `‖D σ − f‖ / max(‖f‖, ‖D g‖)`, falling back to the absolute residual
    /// when both scales vanish.
    pub fn equilibrium_residual(&self, sigma: &DVector<T>, f: &DVector<T>, g: &DVector<T>) -> T {
        let r = (self.adjoint(sigma) - f).norm();
        let scale = f.norm().max(self.adjoint(g).norm());
        if scale > T::zero() {
            r / scale
        } else {
            r
        }
    }

    /// Relative size of the `V` component of `σ − g`; zero exactly when
    /// `σ ∈ U + g`.
    pub fn orthogonality_residual(&self, sigma: &DVector<T>, g: &DVector<T>) -> Result<T> {
        let d = sigma - g;
        let n = self.weighted_norm(&d);
        let pv = self.weighted_norm(&self.project_v(&d)?);
        Ok(if n > T::zero() { pv / n } else { pv })
    }

    /// `½⟨σ,σ⟩ − ⟨g,σ⟩` in the weighted product.
    pub fn complementary_energy(&self, sigma: &DVector<T>, g: &DVector<T>) -> T {
        T::lit(0.5) * self.weighted_ip(sigma, sigma) - self.weighted_ip(g, sigma)
    }
}

fn assemble_stiffness<T: Scalar>(
    strain: &CsrMatrix<T>,
    block: usize,
    measure: &[T],
    material: &[DMatrix<T>],
) -> CscMatrix<T> {
    let n = strain.ncols();
    let mut upper = CooMatrix::new(n, n);
    let mut entries: Vec<(usize, usize, T)> = Vec::new();
    for (b, (&m, c)) in measure.iter().zip(material).enumerate() {
        entries.clear();
        for local in 0..block {
            let row = strain.row(b * block + local);
            for (&col, &v) in row.col_indices().iter().zip(row.values()) {
                entries.push((local, col, v));
            }
        }
        for &(i, p, a) in &entries {
            for &(j, q, v) in &entries {
                if p <= q {
                    upper.push(p, q, a * m * c[(i, j)] * v);
                }
            }
        }
    }
    symmetric_from_upper(&upper)
}
