//! Bar frameworks (pin-jointed trusses) as the finite-dimensional model of the
//! elasticity problem.
//!
//! The compatibility matrix maps nodal displacements to bar strains and plays
//! the role of the strain operator; the equilibrium matrix maps bar tensions to
//! net nodal forces and is its adjoint in the weighted bar-stress inner product
//! `Σ_b (L_b / k_b) σ_b τ_b`. Pinned degrees of freedom carry prescribed
//! displacements, free ones carry loads.
//!
//! Bar stiffness `k` is the axial rigidity: tension `= k × strain`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::error::{Error, Result};
use crate::linalg::{csr_to_dense, csr_tr_mul, numerical_rank, select_columns, DEFAULT_RANK_TOL};
use crate::scalar::Scalar;
use crate::solver::OperatorPair;
use crate::tensor::mandel_len;

#[derive(Debug, Clone, PartialEq)]
pub struct Bar<T: Scalar> {
    pub nodes: [usize; 2],
    pub stiffness: T,
    pub rest_length: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarFramework<T: Scalar> {
    dim: usize,
    nodes: Vec<Vec<T>>,
    bars: Vec<Bar<T>>,
    /// dof → prescribed displacement
    pinned: BTreeMap<usize, T>,
    /// dof → applied force
    loads: BTreeMap<usize, T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub mechanisms: usize,
    pub self_stresses: usize,
    pub free_dofs: usize,
    pub bars: usize,
}

#[derive(Debug, Clone)]
pub struct BarSolution<T: Scalar> {
    /// Axial tension per bar (negative in compression).
    pub tensions: DVector<T>,
    /// Displacement of every dof; pinned dofs hold their prescribed values.
    pub displacements: DVector<T>,
    pub free_dofs: Vec<usize>,
    pub equilibrium_residual: T,
}

impl<T: Scalar> BarSolution<T> {
    pub fn free_displacements(&self) -> DVector<T> {
        DVector::from_iterator(
            self.free_dofs.len(),
            self.free_dofs.iter().map(|&d| self.displacements[d]),
        )
    }
}

impl<T: Scalar> BarFramework<T> {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidFramework(format!("dimension {dim} < 2")));
        }
        Ok(Self {
            dim,
            nodes: Vec::new(),
            bars: Vec::new(),
            pinned: BTreeMap::new(),
            loads: BTreeMap::new(),
        })
    }

    pub fn add_node(&mut self, coords: &[T]) -> Result<usize> {
        if coords.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidFramework("non-finite node coordinate".into()));
        }
        self.nodes.push(coords.to_vec());
        Ok(self.nodes.len() - 1)
    }

    /// Adds a bar whose rest length is the current node distance.
    pub fn add_bar(&mut self, i: usize, j: usize, stiffness: T) -> Result<usize> {
        let n = self.nodes.len();
        if i >= n || j >= n {
            return Err(Error::InvalidFramework(format!(
                "bar ({i}, {j}) references a node outside 0..{n}"
            )));
        }
        if i == j {
            return Err(Error::InvalidFramework(format!("bar ({i}, {j}) is a self-loop")));
        }
        if !(stiffness > T::zero()) || !stiffness.is_finite() {
            return Err(Error::InvalidFramework(format!(
                "bar ({i}, {j}) stiffness {stiffness} must be positive"
            )));
        }
        let length = self.distance(i, j);
        if !(length > T::zero()) {
            return Err(Error::DegenerateBar {
                bar: self.bars.len(),
            });
        }
        self.bars.push(Bar {
            nodes: [i, j],
            stiffness,
            rest_length: length,
        });
        Ok(self.bars.len() - 1)
    }

    pub fn pin(&mut self, node: usize, axis: usize, value: T) -> Result<()> {
        let dof = self.dof(node, axis)?;
        if self.loads.contains_key(&dof) {
            return Err(Error::InvalidFramework(format!(
                "node {node} axis {axis} is both loaded and pinned"
            )));
        }
        self.pinned.insert(dof, value);
        Ok(())
    }

    pub fn pin_node(&mut self, node: usize) -> Result<()> {
        for axis in 0..self.dim {
            self.pin(node, axis, T::zero())?;
        }
        Ok(())
    }

    pub fn load(&mut self, node: usize, axis: usize, value: T) -> Result<()> {
        let dof = self.dof(node, axis)?;
        if self.pinned.contains_key(&dof) {
            return Err(Error::InvalidFramework(format!(
                "node {node} axis {axis} is both pinned and loaded"
            )));
        }
        *self.loads.entry(dof).or_insert_with(T::zero) += value;
        Ok(())
    }

    fn dof(&self, node: usize, axis: usize) -> Result<usize> {
        if node >= self.nodes.len() || axis >= self.dim {
            return Err(Error::InvalidFramework(format!(
                "dof (node {node}, axis {axis}) out of range"
            )));
        }
        Ok(node * self.dim + axis)
    }

    fn distance(&self, i: usize, j: usize) -> T {
        self.nodes[i]
            .iter()
            .zip(&self.nodes[j])
            .fold(T::zero(), |acc, (&a, &b)| acc + (b - a) * (b - a))
            .sqrt()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[Vec<T>] {
        &self.nodes
    }

    pub fn bars(&self) -> &[Bar<T>] {
        &self.bars
    }

    pub fn pinned(&self) -> &BTreeMap<usize, T> {
        &self.pinned
    }

    pub fn loads(&self) -> &BTreeMap<usize, T> {
        &self.loads
    }

    pub fn dof_count(&self) -> usize {
        self.dim * self.nodes.len()
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.dof_count())
            .filter(|d| !self.pinned.contains_key(d))
            .collect()
    }

    /// `(bars × dofs)` map from nodal displacement to axial bar strain.
    pub fn compatibility_matrix(&self) -> CsrMatrix<T> {
        let dim = self.dim;
        let mut coo = CooMatrix::new(self.bars.len(), self.dof_count());
        for (b, bar) in self.bars.iter().enumerate() {
            let [i, j] = bar.nodes;
            let length = self.distance(i, j);
            for axis in 0..dim {
                let dir = (self.nodes[j][axis] - self.nodes[i][axis]) / length;
                let v = dir / bar.rest_length;
                if v != T::zero() {
                    coo.push(b, i * dim + axis, -v);
                    coo.push(b, j * dim + axis, v);
                }
            }
        }
        CsrMatrix::from(&coo)
    }

    fn free_compatibility(&self) -> CsrMatrix<T> {
        select_columns(&self.compatibility_matrix(), &self.free_dofs())
    }

    /// `(free dofs × bars)` map from bar tensions to net nodal force.
    ///
    /// This is the weighted transpose `Bᵀ diag(L)` of the free-dof
    /// compatibility matrix `B`.
    pub fn equilibrium_matrix(&self) -> CsrMatrix<T> {
        let b = self.free_compatibility();
        let mut coo = CooMatrix::new(b.ncols(), b.nrows());
        for (bar, row) in b.row_iter().enumerate() {
            let length = self.bars[bar].rest_length;
            for (&col, &v) in row.col_indices().iter().zip(row.values()) {
                coo.push(col, bar, v * length);
            }
        }
        CsrMatrix::from(&coo)
    }

    /// Net free-dof force produced by the given bar tensions.
    pub fn apply_equilibrium(&self, tensions: &DVector<T>) -> DVector<T> {
        let mut scaled = tensions.clone();
        for (b, bar) in self.bars.iter().enumerate() {
            scaled[b] *= bar.rest_length;
        }
        csr_tr_mul(&self.free_compatibility(), &scaled)
    }

    /// Weighted bar-stress inner product `Σ_b (L_b / k_b) σ_b τ_b`.
    pub fn weighted_ip(&self, sigma: &DVector<T>, tau: &DVector<T>) -> T {
        self.bars
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (b, bar)| {
                acc + bar.rest_length / bar.stiffness * sigma[b] * tau[b]
            })
    }

    /// The operator pair with `E` = free-dof compatibility, material `k`,
    /// measure `L`.
    pub fn operator_pair(&self) -> Result<OperatorPair<T>> {
        let measure = self.bars.iter().map(|b| b.rest_length).collect();
        let material = self
            .bars
            .iter()
            .map(|b| DMatrix::from_element(1, 1, b.stiffness))
            .collect();
        let compliance = self
            .bars
            .iter()
            .map(|b| DMatrix::from_element(1, 1, T::one() / b.stiffness))
            .collect();
        OperatorPair::new(self.free_compatibility(), 1, measure, material, compliance)
    }

    pub fn classify(&self) -> Classification {
        self.classify_with(T::lit(DEFAULT_RANK_TOL))
    }

    /// Mechanism and self-stress counts from singular values above
    /// `rank_tol × σ_max`.
    pub fn classify_with(&self, rank_tol: T) -> Classification {
        let free = self.free_dofs().len();
        let bars = self.bars.len();
        let compat_rank = numerical_rank(&csr_to_dense(&self.free_compatibility()), rank_tol);
        let equil_rank = numerical_rank(&csr_to_dense(&self.equilibrium_matrix()), rank_tol);
        Classification {
            mechanisms: free - compat_rank,
            self_stresses: bars - equil_rank,
            free_dofs: free,
            bars,
        }
    }

    /// Stiffness-weighted strain of the prescribed displacement field.
    pub fn prescribed_stress(&self) -> DVector<T> {
        let mut u0 = DVector::zeros(self.dof_count());
        for (&dof, &v) in &self.pinned {
            u0[dof] = v;
        }
        let strain = crate::linalg::csr_mul(&self.compatibility_matrix(), &u0);
        DVector::from_iterator(
            self.bars.len(),
            strain.iter().zip(&self.bars).map(|(&e, b)| e * b.stiffness),
        )
    }

    pub fn free_loads(&self) -> DVector<T> {
        let free = self.free_dofs();
        DVector::from_iterator(
            free.len(),
            free.iter()
                .map(|d| self.loads.get(d).copied().unwrap_or_else(T::zero)),
        )
    }

    /// Tensions `P_V g + Q f` and the recovered displacements.
    pub fn solve_bar_stress(&self) -> Result<BarSolution<T>> {
        let class = self.classify();
        if class.mechanisms > 0 {
            return Err(Error::MechanismPresent {
                mechanisms: class.mechanisms,
            });
        }
        let pair = self.operator_pair().map_err(|e| match e {
            Error::SingularStiffness => Error::MechanismPresent { mechanisms: 1 },
            other => other,
        })?;
        let g = self.prescribed_stress();
        let f = self.free_loads();
        let sol = pair.solve(&g, &f)?;
        let free_dofs = self.free_dofs();
        let mut displacements = DVector::zeros(self.dof_count());
        for (&dof, &v) in &self.pinned {
            displacements[dof] = v;
        }
        for (k, &dof) in free_dofs.iter().enumerate() {
            displacements[dof] = sol.correction[k];
        }
        let equilibrium_residual = pair.equilibrium_residual(&sol.sigma, &f, &g);
        Ok(BarSolution {
            tensions: sol.sigma,
            displacements,
            free_dofs,
            equilibrium_residual,
        })
    }

    /// Parses the line format `node x y [z]`, `bar i j k`, `pin node axis [value]`,
    /// `load node axis value`; `#` starts a comment. Axes are `0|1|2` or `x|y|z`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut fw: Option<Self> = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens = tokenize(content);
            let Some(&(col, keyword)) = tokens.first() else {
                continue;
            };
            let args = &tokens[1..];
            match keyword {
                "node" => {
                    let coords = args
                        .iter()
                        .map(|&(c, t)| parse_num::<T>(t, line, c))
                        .collect::<Result<Vec<_>>>()?;
                    if coords.len() < 2 {
                        return Err(Error::parse(line, col, "node needs at least 2 coordinates"));
                    }
                    let fw = match &mut fw {
                        Some(fw) => fw,
                        None => fw.insert(Self::new(coords.len())?),
                    };
                    fw.add_node(&coords)
                        .map_err(|e| Error::parse(line, col, e.to_string()))?;
                }
                "bar" | "pin" | "load" => {
                    let fw = fw
                        .as_mut()
                        .ok_or_else(|| Error::parse(line, col, format!("{keyword} before any node")))?;
                    match (keyword, args) {
                        ("bar", [i, j, k]) => {
                            let i = parse_index(i.1, line, i.0)?;
                            let j = parse_index(j.1, line, j.0)?;
                            let k = parse_num(k.1, line, k.0)?;
                            fw.add_bar(i, j, k)?;
                        }
                        ("pin", [n, a, rest @ ..]) if rest.len() <= 1 => {
                            let node = parse_index(n.1, line, n.0)?;
                            let axis = parse_axis(a.1, line, a.0)?;
                            let value = match rest {
                                [v] => parse_num(v.1, line, v.0)?,
                                _ => T::zero(),
                            };
                            fw.pin(node, axis, value)
                                .map_err(|e| Error::parse(line, col, e.to_string()))?;
                        }
                        ("load", [n, a, v]) => {
                            let node = parse_index(n.1, line, n.0)?;
                            let axis = parse_axis(a.1, line, a.0)?;
                            let value = parse_num(v.1, line, v.0)?;
                            fw.load(node, axis, value)
                                .map_err(|e| Error::parse(line, col, e.to_string()))?;
                        }
                        _ => {
                            return Err(Error::parse(
                                line,
                                col,
                                format!("wrong number of arguments for '{keyword}'"),
                            ))
                        }
                    }
                }
                other => {
                    return Err(Error::parse(line, col, format!("unknown record '{other}'")));
                }
            }
        }
        fw.ok_or_else(|| Error::parse(1, 1, "framework has no nodes"))
    }

    /// Emits the text format; `parse(to_text())` reproduces the framework.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            out.push_str("node");
            for c in node {
                let _ = write!(out, " {c}");
            }
            out.push('\n');
        }
        for bar in &self.bars {
            let _ = writeln!(out, "bar {} {} {}", bar.nodes[0], bar.nodes[1], bar.stiffness);
        }
        for (&dof, &v) in &self.pinned {
            let _ = writeln!(out, "pin {} {} {}", dof / self.dim, dof % self.dim, v);
        }
        for (&dof, &v) in &self.loads {
            let _ = writeln!(out, "load {} {} {}", dof / self.dim, dof % self.dim, v);
        }
        out
    }
}

/// Columns spanning the infinitesimal rigid motions `a + Bx` (`B` skew) at
/// the given nodes: `dim` translations followed by `dim(dim−1)/2` rotations.
pub fn rigid_motion_basis<T: Scalar>(nodes: &[Vec<T>], dim: usize) -> DMatrix<T> {
    let cols = mandel_len(dim);
    let mut basis = DMatrix::zeros(nodes.len() * dim, cols);
    for (n, x) in nodes.iter().enumerate() {
        for axis in 0..dim {
            basis[(n * dim + axis, axis)] = T::one();
        }
        let mut c = dim;
        // rotation in the (i, j) plane: u_i = -x_j, u_j = x_i
        let planes: Vec<(usize, usize)> = match dim {
            3 => vec![(1, 2), (2, 0), (0, 1)],
            _ => (0..dim)
                .flat_map(|i| (i + 1..dim).map(move |j| (i, j)))
                .collect(),
        };
        for (i, j) in planes {
            basis[(n * dim + i, c)] = -x[j];
            basis[(n * dim + j, c)] = x[i];
            c += 1;
        }
    }
    basis
}

pub(crate) fn tokenize(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        if ch.is_whitespace() {
            if let Some(st) = start.take() {
                out.push((s[..st].chars().count() + 1, &s[st..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push((s[..st].chars().count() + 1, &s[st..]));
    }
    out
}

pub(crate) fn parse_num<T: Scalar>(tok: &str, line: usize, col: usize) -> Result<T> {
    let v: T = tok
        .parse()
        .map_err(|_| Error::parse(line, col, format!("invalid number '{tok}'")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, col, format!("non-finite number '{tok}'")));
    }
    Ok(v)
}

pub(crate) fn parse_index(tok: &str, line: usize, col: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::parse(line, col, format!("invalid index '{tok}'")))
}

fn parse_axis(tok: &str, line: usize, col: usize) -> Result<usize> {
    match tok {
        "x" | "X" => Ok(0),
        "y" | "Y" => Ok(1),
        "z" | "Z" => Ok(2),
        _ => parse_index(tok, line, col),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> BarFramework<f64> {
        let mut fw = BarFramework::new(2).unwrap();
        let h = 3f64.sqrt() / 2.0;
        fw.add_node(&[0.0, 0.0]).unwrap();
        fw.add_node(&[1.0, 0.0]).unwrap();
        fw.add_node(&[0.5, h]).unwrap();
        fw.add_bar(0, 1, 1.0).unwrap();
        fw.add_bar(1, 2, 1.0).unwrap();
        fw.add_bar(2, 0, 1.0).unwrap();
        fw
    }

    #[test]
    fn single_bar_row() {
        let mut fw = BarFramework::<f64>::new(2).unwrap();
        fw.add_node(&[0.0, 0.0]).unwrap();
        fw.add_node(&[1.0, 0.0]).unwrap();
        fw.add_bar(0, 1, 1.0).unwrap();
        let c = csr_to_dense(&fw.compatibility_matrix());
        assert_eq!(c.row(0).iter().copied().collect::<Vec<_>>(), vec![-1.0, 0.0, 1.0, 0.0]);

        let e = csr_to_dense(&fw.equilibrium_matrix());
        assert_eq!(e.column(0).iter().copied().collect::<Vec<_>>(), vec![-1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn construction_errors() {
        let mut fw = BarFramework::<f64>::new(2).unwrap();
        fw.add_node(&[0.0, 0.0]).unwrap();
        fw.add_node(&[0.0, 0.0]).unwrap();
        assert!(matches!(fw.add_bar(0, 1, 1.0), Err(Error::DegenerateBar { .. })));
        assert!(fw.add_bar(0, 0, 1.0).is_err());
        assert!(fw.add_bar(0, 5, 1.0).is_err());
        assert!(fw.add_node(&[1.0]).is_err());
        fw.pin(0, 0, 0.0).unwrap();
        assert!(fw.load(0, 0, 1.0).is_err());
    }

    #[test]
    fn translation_in_kernel() {
        let fw = triangle();
        let u = DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let s = crate::linalg::csr_mul(&fw.compatibility_matrix(), &u);
        assert!(s.amax() < 1e-15);
        let basis = rigid_motion_basis(fw.nodes(), 2);
        let c = csr_to_dense(&fw.compatibility_matrix());
        assert!((c * basis).amax() < 1e-13);
    }

    #[test]
    fn rigid_basis_shapes() {
        let nodes = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        let b = rigid_motion_basis(&nodes, 2);
        assert_eq!(b.ncols(), 3);
        assert_eq!(b.column(2).iter().copied().collect::<Vec<_>>(), vec![-2.0, 1.0, -4.0, 3.0]);
        let nodes3 = vec![vec![1.0, 2.0, 3.0]];
        assert_eq!(rigid_motion_basis(&nodes3, 3).ncols(), 6);
    }

    #[test]
    fn unpinned_triangle_classification() {
        let c = triangle().classify();
        assert_eq!((c.mechanisms, c.self_stresses), (3, 0));
    }

    #[test]
    fn text_round_trip() {
        let mut fw = triangle();
        fw.pin_node(0).unwrap();
        fw.pin(1, 1, 0.25).unwrap();
        fw.load(2, 0, -1.5).unwrap();
        let text = fw.to_text();
        let back = BarFramework::<f64>::parse(&text).unwrap();
        assert_eq!(back, fw);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = BarFramework::<f64>::parse("node 0 0\nnode 1 0\nbar 0 1 abc\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                column: 9,
                message: "invalid number 'abc'".into()
            }
        );
        assert!(BarFramework::<f64>::parse("bar 0 1 1\n").is_err());
        assert!(BarFramework::<f64>::parse("node 0 0\nfoo\n").is_err());
    }

    #[test]
    fn mechanism_rejected() {
        let mut fw = BarFramework::<f64>::new(2).unwrap();
        for p in [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] {
            fw.add_node(&p).unwrap();
        }
        for (i, j) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            fw.add_bar(i, j, 1.0).unwrap();
        }
        fw.pin_node(0).unwrap();
        fw.pin_node(1).unwrap();
        assert!(matches!(
            fw.solve_bar_stress(),
            Err(Error::MechanismPresent { mechanisms: 1 })
        ));
    }
}
