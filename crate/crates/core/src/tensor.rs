//! Pointwise symmetric-tensor algebra in Mandel form and the elasticity tensor.
//!
//! A symmetric `n × n` tensor is stored as a vector of length `n(n+1)/2`: the
//! diagonal entries first, then the off-diagonal entries scaled by `√2`. With
//! this scaling the Euclidean dot product of two Mandel vectors equals the
//! double contraction `τ₁ : τ₂`, so every orthogonality statement about stresses
//! can be checked with plain dot products.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of Mandel components of a symmetric tensor in `dim` dimensions.
pub fn mandel_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Off-diagonal index pairs in Mandel order, following the diagonal entries.
///
/// 2-D: `(0,1)`. 3-D: `(1,2), (0,2), (0,1)`. Higher dimensions fall back to
/// lexicographic order.
pub fn mandel_off_diagonal(dim: usize) -> Vec<(usize, usize)> {
    match dim {
        2 => vec![(0, 1)],
        3 => vec![(1, 2), (0, 2), (0, 1)],
        _ => (0..dim)
            .flat_map(|i| (i + 1..dim).map(move |j| (i, j)))
            .collect(),
    }
}

/// A symmetric second-order tensor in Mandel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor<T: Scalar> {
    components: DVector<T>,
    dim: usize,
}

impl<T: Scalar> SymTensor<T> {
    pub fn from_mandel(components: DVector<T>, dim: usize) -> Result<Self> {
        if components.len() != mandel_len(dim) {
            return Err(Error::DimensionMismatch {
                expected: mandel_len(dim),
                found: components.len(),
            });
        }
        Ok(Self { components, dim })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            components: DVector::zeros(mandel_len(dim)),
            dim,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut components = DVector::zeros(mandel_len(dim));
        for i in 0..dim {
            components[i] = T::one();
        }
        Self { components, dim }
    }

    /// Converts a symmetric matrix, rejecting asymmetry above `1e-12` relative
    /// to the largest entry.
    pub fn to_mandel(matrix: &DMatrix<T>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.ncols(),
            });
        }
        let deviation = asymmetry(matrix);
        if deviation > T::tol(1e-12) * matrix.amax().max(T::one()) {
            return Err(Error::AsymmetricInput {
                deviation: deviation.as_f64(),
            });
        }
        let sqrt2 = T::lit(2.0).sqrt();
        let mut components = DVector::zeros(mandel_len(dim));
        for i in 0..dim {
            components[i] = matrix[(i, i)];
        }
        for (k, (i, j)) in mandel_off_diagonal(dim).into_iter().enumerate() {
            let avg = (matrix[(i, j)] + matrix[(j, i)]) * T::lit(0.5);
            components[dim + k] = avg * sqrt2;
        }
        Ok(Self { components, dim })
    }

    pub fn to_matrix(&self) -> DMatrix<T> {
        let dim = self.dim;
        let inv_sqrt2 = T::one() / T::lit(2.0).sqrt();
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = self.components[i];
        }
        for (k, (i, j)) in mandel_off_diagonal(dim).into_iter().enumerate() {
            let v = self.components[dim + k] * inv_sqrt2;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    /// Double contraction `self : other`.
    pub fn dot(&self, other: &Self) -> T {
        self.components.dot(&other.components)
    }

    pub fn trace(&self) -> T {
        (0..self.dim).fold(T::zero(), |acc, i| acc + self.components[i])
    }

    pub fn components(&self) -> &DVector<T> {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn asymmetry<T: Scalar>(m: &DMatrix<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in i + 1..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Symmetric positive definite material map `σ = C ε` acting on Mandel vectors.
///
/// `c0` and `c_upper` are the certified extreme eigenvalues; the compliance
/// `C⁻¹` is stored alongside and its eigenvalues lie in `[1/c_upper, 1/c0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticityTensor<T: Scalar> {
    matrix: DMatrix<T>,
    inverse: DMatrix<T>,
    c0: T,
    c_upper: T,
    dim: usize,
}

impl<T: Scalar> ElasticityTensor<T> {
    /// Accepts an arbitrary (anisotropic) SPD Mandel matrix.
    pub fn from_mandel(matrix: DMatrix<T>, dim: usize) -> Result<Self> {
        let s = mandel_len(dim);
        if matrix.nrows() != s || matrix.ncols() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        let deviation = asymmetry(&matrix);
        if deviation > T::tol(1e-12) * matrix.amax().max(T::one()) {
            return Err(Error::AsymmetricInput {
                deviation: deviation.as_f64(),
            });
        }
        // exact symmetry keeps assembled stiffness matrices exactly symmetric
        let matrix = (&matrix + matrix.transpose()) * T::lit(0.5);
        let (c0, c_upper) = certify_bounds(&matrix)?;
        let inverse = matrix
            .clone()
            .cholesky()
            .ok_or(Error::SingularTensor)?
            .inverse();
        let inverse = (&inverse + inverse.transpose()) * T::lit(0.5);
        Ok(Self {
            matrix,
            inverse,
            c0,
            c_upper,
            dim,
        })
    }

    /// Isotropic law `σ = 2μ ε + λ tr(ε) I`, restricted to `μ > 0, λ ≥ 0`.
    pub fn isotropic(lambda: T, mu: T, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidModuli(format!("dimension {dim} < 2")));
        }
        if !(mu > T::zero()) || !mu.is_finite() {
            return Err(Error::InvalidModuli(format!("shear modulus {mu} must be positive")));
        }
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidModuli(format!(
                "Lamé parameter {lambda} must be non-negative"
            )));
        }
        let s = mandel_len(dim);
        let two_mu = mu + mu;
        let mut matrix = DMatrix::identity(s, s) * two_mu;
        for i in 0..dim {
            for j in 0..dim {
                matrix[(i, j)] += lambda;
            }
        }
        let c_upper = two_mu + lambda * T::lit(dim as f64);
        let inverse = matrix
            .clone()
            .cholesky()
            .ok_or(Error::SingularTensor)?
            .inverse();
        let inverse = (&inverse + inverse.transpose()) * T::lit(0.5);
        Ok(Self {
            matrix,
            inverse,
            c0: two_mu,
            c_upper,
            dim,
        })
    }

    pub fn apply(&self, strain: &SymTensor<T>) -> Result<SymTensor<T>> {
        self.check_dim(strain)?;
        SymTensor::from_mandel(&self.matrix * strain.components(), self.dim)
    }

    pub fn apply_compliance(&self, stress: &SymTensor<T>) -> Result<SymTensor<T>> {
        self.check_dim(stress)?;
        SymTensor::from_mandel(&self.inverse * stress.components(), self.dim)
    }

    fn check_dim(&self, t: &SymTensor<T>) -> Result<()> {
        if t.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: t.dim(),
            });
        }
        Ok(())
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn compliance(&self) -> &DMatrix<T> {
        &self.inverse
    }

    pub fn c0(&self) -> T {
        self.c0
    }

    pub fn c_upper(&self) -> T {
        self.c_upper
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Smallest and largest eigenvalue of a symmetric Mandel matrix.
///
/// Fails with [`Error::NotCoercive`] when the smallest eigenvalue is not
/// positive (relative to the largest at working precision).
pub fn certify_bounds<T: Scalar>(matrix: &DMatrix<T>) -> Result<(T, T)> {
    let eig = SymmetricEigen::new(matrix.clone());
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    if min <= T::tol(1e-14) * max.abs() {
        return Err(Error::NotCoercive {
            min_eigenvalue: min.as_f64(),
        });
    }
    Ok((min, max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use proptest::prelude::*;

    fn sym2(a: f64, b: f64, c: f64) -> DMatrix<f64> {
        dmatrix![a, c; c, b]
    }

    #[test]
    fn mandel_examples() {
        let id = SymTensor::<f64>::to_mandel(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(id.components().as_slice(), &[1.0, 1.0, 0.0]);
        let shear = SymTensor::<f64>::to_mandel(&sym2(0.0, 0.0, 0.5)).unwrap();
        assert!((shear.components()[2] - 2f64.sqrt() / 2.0).abs() < 1e-16);
    }

    #[test]
    fn asymmetric_rejected() {
        let m = dmatrix![1.0, 0.5; 0.4, 1.0];
        assert!(matches!(
            SymTensor::<f64>::to_mandel(&m),
            Err(Error::AsymmetricInput { .. })
        ));
    }

    #[test]
    fn isotropic_matrix_and_bounds() {
        let c = ElasticityTensor::<f64>::isotropic(1.0, 1.0, 2).unwrap();
        // σ(e_k) evaluated on each Mandel basis vector by hand.
        let expected = dmatrix![3.0, 1.0, 0.0; 1.0, 3.0, 0.0; 0.0, 0.0, 2.0];
        assert_eq!(c.matrix(), &expected);
        let (lo, hi) = certify_bounds(c.matrix()).unwrap();
        assert!((lo - 2.0).abs() < 1e-12 && (hi - 4.0).abs() < 1e-12);
        assert_eq!((c.c0(), c.c_upper()), (2.0, 4.0));

        let unit = ElasticityTensor::<f64>::isotropic(0.0, 0.5, 2).unwrap();
        assert_eq!(unit.matrix(), &DMatrix::identity(3, 3));
    }

    #[test]
    fn isotropic_rejects_bad_moduli() {
        assert!(ElasticityTensor::<f64>::isotropic(1.0, 0.0, 2).is_err());
        assert!(ElasticityTensor::<f64>::isotropic(-0.1, 1.0, 2).is_err());
    }

    #[test]
    fn hooke_on_identity_and_shear() {
        let c = ElasticityTensor::<f64>::isotropic(1.0, 1.0, 2).unwrap();
        let sigma = c.apply(&SymTensor::identity(2)).unwrap();
        assert_eq!(sigma.to_matrix(), DMatrix::identity(2, 2) * 4.0);
        let eps = SymTensor::to_mandel(&sym2(0.0, 0.0, 0.5)).unwrap();
        let sigma = c.apply(&eps).unwrap().to_matrix();
        assert!((sigma - sym2(0.0, 0.0, 1.0)).amax() < 1e-15);

        let back = c
            .apply_compliance(&SymTensor::to_mandel(&(DMatrix::identity(2, 2) * 4.0)).unwrap())
            .unwrap();
        assert!((back.to_matrix() - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn compliance_of_identity_map() {
        let c = ElasticityTensor::<f64>::from_mandel(DMatrix::identity(3, 3), 2).unwrap();
        let s = SymTensor::from_mandel(DVector::from_vec(vec![0.3, -1.0, 2.0]), 2).unwrap();
        assert_eq!(c.apply_compliance(&s).unwrap(), s);
        assert_eq!(certify_bounds(c.matrix()).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn zero_eigenvalue_is_not_coercive() {
        let m = dmatrix![1.0, 1.0, 0.0; 1.0, 1.0, 0.0; 0.0, 0.0, 1.0];
        assert!(matches!(certify_bounds(&m), Err(Error::NotCoercive { .. })));
        assert!(ElasticityTensor::from_mandel(m, 2).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let c = ElasticityTensor::<f64>::isotropic(1.0, 1.0, 2).unwrap();
        assert!(matches!(
            c.apply(&SymTensor::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn three_dimensional_round_trip() {
        let m = dmatrix![1.0, 2.0, 3.0; 2.0, 4.0, 5.0; 3.0, 5.0, 6.0];
        let t = SymTensor::<f64>::to_mandel(&m).unwrap();
        assert_eq!(t.components().len(), 6);
        assert!((t.to_matrix() - &m).amax() < 1e-15);
        assert!((t.dot(&t) - m.component_mul(&m).sum()).abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let c = ElasticityTensor::<f32>::isotropic(1.0, 1.0, 2).unwrap();
        let s = c.apply(&SymTensor::identity(2)).unwrap();
        assert_eq!(s.components().as_slice(), &[4.0f32, 4.0, 0.0]);
    }

    fn spd3() -> impl Strategy<Value = DMatrix<f64>> {
        (proptest::collection::vec(-1.0f64..1.0, 9), 0.1f64..2.0).prop_map(|(v, shift)| {
            let a = DMatrix::from_vec(3, 3, v);
            &a * a.transpose() + DMatrix::identity(3, 3) * shift
        })
    }

    proptest! {
        #[test]
        fn mandel_dot_is_double_contraction(a in proptest::collection::vec(-5.0f64..5.0, 3),
                                            b in proptest::collection::vec(-5.0f64..5.0, 3)) {
            let ma = sym2(a[0], a[1], a[2]);
            let mb = sym2(b[0], b[1], b[2]);
            let ta = SymTensor::to_mandel(&ma).unwrap();
            let tb = SymTensor::to_mandel(&mb).unwrap();
            let direct: f64 = ma.component_mul(&mb).sum();
            prop_assert!((ta.dot(&tb) - direct).abs() <= 1e-14 * (1.0 + direct.abs()));
            // √2 scaling round-trips to within one rounding step
            prop_assert!((ta.to_matrix() - &ma).amax() <= 4.0 * f64::EPSILON * ma.amax());
        }

        #[test]
        fn energy_bounds_hold(m in spd3(), eps in proptest::collection::vec(-3.0f64..3.0, 3)) {
            let c = ElasticityTensor::from_mandel(m, 2).unwrap();
            let e = DVector::from_vec(eps);
            let energy = e.dot(&(c.matrix() * &e));
            let norm2 = e.dot(&e);
            let slack = 1e-12 * (1.0 + norm2 * c.c_upper());
            prop_assert!(c.c0() * norm2 <= energy + slack);
            prop_assert!(energy <= c.c_upper() * norm2 + slack);
            let comp = e.dot(&(c.compliance() * &e));
            prop_assert!(norm2 / c.c_upper() <= comp + slack);
            prop_assert!(comp <= norm2 / c.c0() + slack);
        }

        #[test]
        fn compliance_inverts_stiffness(m in spd3(), eps in proptest::collection::vec(-3.0f64..3.0, 3)) {
            let c = ElasticityTensor::from_mandel(m, 2).unwrap();
            let e = SymTensor::from_mandel(DVector::from_vec(eps), 2).unwrap();
            let back = c.apply_compliance(&c.apply(&e).unwrap()).unwrap();
            let err = (back.components() - e.components()).amax();
            prop_assert!(err <= 1e-12 * (1.0 + e.components().amax()) * c.c_upper() / c.c0());
            prop_assert_eq!(c.matrix().transpose(), c.matrix().clone());
        }
    }
}
