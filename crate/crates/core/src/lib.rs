//! Stress-first static linear elasticity.
//!
//! The stress is the intersection point of two orthogonal affine sets in the
//! weighted stress space: kinematically compatible stresses shifted by the
//! prescribed displacement, and self-equilibrated stresses shifted by a lift of
//! the loads. Two exact finite-dimensional settings are provided: bar
//! frameworks ([`framework`]) and P1 finite elements on triangle meshes
//! ([`mesh`], [`fem`], [`solver`]). [`verify`] holds the independent oracles.
//!
//! Everything up to the solver is generic over [`Scalar`] (`f32`/`f64`); the
//! aliases below fix the usual double-precision instantiation.

pub mod error;
pub mod fem;
pub mod framework;
pub mod linalg;
pub mod mesh;
pub mod scalar;
pub mod solver;
pub mod tensor;
pub mod verify;

pub use error::{Error, ErrorCategory, Result};
pub use scalar::Scalar;

pub type SymTensor = tensor::SymTensor<f64>;
pub type ElasticityTensor = tensor::ElasticityTensor<f64>;
pub type BarFramework = framework::BarFramework<f64>;
pub type TriangleMesh = mesh::TriangleMesh<f64>;
pub type ProblemSpec = fem::ProblemSpec<f64>;
pub type StrainOperator = fem::StrainOperator<f64>;
pub type StressSpace = fem::StressSpace<f64>;
pub type StressSolution = solver::StressSolution<f64>;
pub type StressSolver = solver::StressSolver<f64>;

pub type SymTensor32 = tensor::SymTensor<f32>;
pub type ElasticityTensor32 = tensor::ElasticityTensor<f32>;
pub type BarFramework32 = framework::BarFramework<f32>;
pub type TriangleMesh32 = mesh::TriangleMesh<f32>;
pub type ProblemSpec32 = fem::ProblemSpec<f32>;
pub type StressSolution32 = solver::StressSolution<f32>;

pub use mesh::{BcMode, BoundaryPartition, EdgeLabel};
