//! Planar triangulations with labeled boundary edges.
//!
//! Text format, one record per line, `#` comments, 0-based indices:
//!
//! ```text
//! v x y        vertex
//! t i j k      counterclockwise triangle
//! bd i j       boundary edge with prescribed displacement
//! bt i j       boundary edge with prescribed traction
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::framework::{parse_index, parse_num, tokenize};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge<T: Scalar> {
    /// Endpoints in the boundary's counterclockwise direction.
    pub vertices: [usize; 2],
    /// Outward unit normal.
    pub normal: [T; 2],
    pub length: T,
    /// Triangle the edge belongs to.
    pub triangle: usize,
}

impl<T: Scalar> BoundaryEdge<T> {
    pub fn key(&self) -> (usize, usize) {
        edge_key(self.vertices[0], self.vertices[1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh<T: Scalar> {
    vertices: Vec<[T; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabel {
    /// Prescribed displacement.
    Dirichlet,
    /// Prescribed traction.
    Traction,
}

/// One label per boundary edge, in the mesh's boundary-edge order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryPartition {
    labels: Vec<EdgeLabel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcMode {
    DisplacementOnly,
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionReport<T: Scalar> {
    pub dirichlet_edges: usize,
    pub traction_edges: usize,
    pub dirichlet_length: T,
    pub traction_length: T,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn signed_area2<T: Scalar>(p: [T; 2], q: [T; 2], r: [T; 2]) -> T {
    (q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1])
}

impl<T: Scalar> TriangleMesh<T> {
    /// Validates and builds a mesh. With `fix_orientation`, clockwise
    /// triangles are flipped instead of rejected.
    pub fn new(
        vertices: Vec<[T; 2]>,
        mut triangles: Vec<[usize; 3]>,
        fix_orientation: bool,
    ) -> Result<Self> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no triangles".into()));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMesh("non-finite vertex coordinate".into()));
        }
        let mut used = vec![false; nv];
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references a vertex outside 0..{nv}"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex")));
            }
            let a2 = signed_area2(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if a2 < T::zero() && fix_orientation {
                tri.swap(1, 2);
            } else if !(a2 > T::zero()) {
                return Err(Error::Orientation {
                    triangle: t,
                    signed_area: (a2 * T::lit(0.5)).as_f64(),
                });
            }
            for &v in tri.iter() {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(Error::InvalidMesh(format!("vertex {v} belongs to no triangle")));
        }

        // directed edge → triangle; a repeated directed edge means inconsistent
        // orientation or more than two incident triangles
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut undirected: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if directed.insert((a, b), t).is_some() {
                    return Err(Error::NonManifoldEdge(a.min(b), a.max(b)));
                }
                let inc = undirected.entry(edge_key(a, b)).or_default();
                inc.push(t);
                if inc.len() > 2 {
                    return Err(Error::NonManifoldEdge(a.min(b), a.max(b)));
                }
            }
        }

        // connectivity through shared edges
        let mut parent: Vec<usize> = (0..triangles.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for inc in undirected.values() {
            if let [a, b] = inc[..] {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
        let root = find(&mut parent, 0);
        if (0..triangles.len()).any(|t| find(&mut parent, t) != root) {
            return Err(Error::InvalidMesh("mesh is not edge-connected".into()));
        }

        let mut boundary = Vec::new();
        for (&(lo, hi), inc) in &undirected {
            if inc.len() == 1 {
                let t = inc[0];
                let (a, b) = if directed.get(&(lo, hi)) == Some(&t) {
                    (lo, hi)
                } else {
                    (hi, lo)
                };
                let (pa, pb) = (vertices[a], vertices[b]);
                let dx = pb[0] - pa[0];
                let dy = pb[1] - pa[1];
                let length = (dx * dx + dy * dy).sqrt();
                boundary.push(BoundaryEdge {
                    vertices: [a, b],
                    normal: [dy / length, -dx / length],
                    length,
                    triangle: t,
                });
            }
        }
        Ok(Self {
            vertices,
            triangles,
            boundary,
        })
    }

    /// `[0,1]²` split into `m × m` squares, each cut along its
    /// lower-left to upper-right diagonal.
    pub fn structured_unit_square(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidMesh("need at least one subdivision".into()));
        }
        let h = T::one() / T::lit(m as f64);
        let idx = |i: usize, j: usize| j * (m + 1) + i;
        let mut vertices = Vec::with_capacity((m + 1) * (m + 1));
        for j in 0..=m {
            for i in 0..=m {
                vertices.push([T::lit(i as f64) * h, T::lit(j as f64) * h]);
            }
        }
        // exact unit coordinates on the far edges
        for j in 0..=m {
            vertices[idx(m, j)][0] = T::one();
            vertices[idx(j, m)][1] = T::one();
        }
        let mut triangles = Vec::with_capacity(2 * m * m);
        for j in 0..m {
            for i in 0..m {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        Self::new(vertices, triangles, false)
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge<T>] {
        &self.boundary
    }

    pub fn triangle_vertices(&self, t: usize) -> [[T; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> T {
        let [p, q, r] = self.triangle_vertices(t);
        signed_area2(p, q, r) * T::lit(0.5)
    }

    pub fn areas(&self) -> Vec<T> {
        (0..self.triangles.len()).map(|t| self.area(t)).collect()
    }

    pub fn boundary_edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = edge_key(a, b);
        self.boundary.binary_search_by(|e| e.key().cmp(&key)).ok()
    }

    pub fn midpoint(&self, edge: usize) -> [T; 2] {
        let [a, b] = self.boundary[edge].vertices;
        let half = T::lit(0.5);
        [
            (self.vertices[a][0] + self.vertices[b][0]) * half,
            (self.vertices[a][1] + self.vertices[b][1]) * half,
        ]
    }

    /// Mesh with the same geometry but triangles listed in a different order.
    pub fn with_triangle_order(&self, order: &[usize]) -> Result<Self> {
        let triangles = order.iter().map(|&t| self.triangles[t]).collect();
        Self::new(self.vertices.clone(), triangles, false)
    }
}

impl BoundaryPartition {
    pub fn new<T: Scalar>(mesh: &TriangleMesh<T>, labels: Vec<EdgeLabel>) -> Result<Self> {
        if labels.len() != mesh.boundary_edges().len() {
            return Err(Error::DimensionMismatch {
                expected: mesh.boundary_edges().len(),
                found: labels.len(),
            });
        }
        Ok(Self { labels })
    }

    pub fn uniform<T: Scalar>(mesh: &TriangleMesh<T>, label: EdgeLabel) -> Self {
        Self {
            labels: vec![label; mesh.boundary_edges().len()],
        }
    }

    /// Labels each edge from its midpoint and outward normal.
    pub fn from_fn<T: Scalar>(
        mesh: &TriangleMesh<T>,
        mut label: impl FnMut([T; 2], [T; 2]) -> EdgeLabel,
    ) -> Self {
        let labels = (0..mesh.boundary_edges().len())
            .map(|e| label(mesh.midpoint(e), mesh.boundary_edges()[e].normal))
            .collect();
        Self { labels }
    }

    pub fn labels(&self) -> &[EdgeLabel] {
        &self.labels
    }

    pub fn label(&self, edge: usize) -> EdgeLabel {
        self.labels[edge]
    }

    pub fn count(&self, label: EdgeLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Checks the partition against the boundary-condition mode and reports the
/// length of each part.
pub fn validate_partition<T: Scalar>(
    mesh: &TriangleMesh<T>,
    partition: &BoundaryPartition,
    mode: BcMode,
) -> Result<PartitionReport<T>> {
    if partition.labels().len() != mesh.boundary_edges().len() {
        return Err(Error::DimensionMismatch {
            expected: mesh.boundary_edges().len(),
            found: partition.labels().len(),
        });
    }
    let mut report = PartitionReport {
        dirichlet_edges: 0,
        traction_edges: 0,
        dirichlet_length: T::zero(),
        traction_length: T::zero(),
    };
    for (edge, &label) in mesh.boundary_edges().iter().zip(partition.labels()) {
        match label {
            EdgeLabel::Dirichlet => {
                report.dirichlet_edges += 1;
                report.dirichlet_length += edge.length;
            }
            EdgeLabel::Traction => {
                report.traction_edges += 1;
                report.traction_length += edge.length;
            }
        }
    }
    if report.dirichlet_edges == 0 {
        return Err(Error::EmptyDirichletSet);
    }
    match mode {
        BcMode::DisplacementOnly if report.traction_edges > 0 => {
            Err(Error::UnexpectedTractionEdges {
                count: report.traction_edges,
            })
        }
        BcMode::Mixed if report.traction_edges == 0 => Err(Error::EmptyTractionSet),
        _ => Ok(report),
    }
}

/// Parses the mesh text format into a validated mesh and complete partition.
pub fn parse_mesh<T: Scalar>(
    text: &str,
    fix_orientation: bool,
) -> Result<(TriangleMesh<T>, BoundaryPartition)> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut labels: Vec<(usize, usize, usize, EdgeLabel)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        let Some(&(col, keyword)) = tokens.first() else {
            continue;
        };
        let args = &tokens[1..];
        let arity = match keyword {
            "v" | "bd" | "bt" => 2,
            "t" => 3,
            other => return Err(Error::parse(line, col, format!("unknown record '{other}'"))),
        };
        if args.len() != arity {
            return Err(Error::parse(
                line,
                col,
                format!("'{keyword}' expects {arity} values, found {}", args.len()),
            ));
        }
        match keyword {
            "v" => vertices.push([
                parse_num(args[0].1, line, args[0].0)?,
                parse_num(args[1].1, line, args[1].0)?,
            ]),
            "t" => triangles.push([
                parse_index(args[0].1, line, args[0].0)?,
                parse_index(args[1].1, line, args[1].0)?,
                parse_index(args[2].1, line, args[2].0)?,
            ]),
            _ => {
                let label = if keyword == "bd" {
                    EdgeLabel::Dirichlet
                } else {
                    EdgeLabel::Traction
                };
                labels.push((
                    line,
                    parse_index(args[0].1, line, args[0].0)?,
                    parse_index(args[1].1, line, args[1].0)?,
                    label,
                ));
            }
        }
    }
    let mesh = TriangleMesh::new(vertices, triangles, fix_orientation)?;
    let mut assigned: Vec<Option<EdgeLabel>> = vec![None; mesh.boundary_edges().len()];
    for (line, a, b, label) in labels {
        let edge = mesh
            .boundary_edge_index(a, b)
            .ok_or(Error::DanglingLabel { line, a, b })?;
        if assigned[edge].replace(label).is_some() {
            return Err(Error::DuplicateLabel(a.min(b), a.max(b)));
        }
    }
    let labels = assigned
        .iter()
        .zip(mesh.boundary_edges())
        .map(|(l, e)| l.ok_or(Error::MissingLabel(e.key().0, e.key().1)))
        .collect::<Result<Vec<_>>>()?;
    let partition = BoundaryPartition::new(&mesh, labels)?;
    Ok((mesh, partition))
}

/// Canonical text: vertices sorted lexicographically by coordinates,
/// triangles rotated to start at their smallest index and sorted, labels
/// sorted by edge. Numbers use the shortest round-trip representation.
pub fn emit_mesh<T: Scalar>(mesh: &TriangleMesh<T>, partition: &BoundaryPartition) -> String {
    let nv = mesh.vertices().len();
    let mut order: Vec<usize> = (0..nv).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        pa[0].partial_cmp(&pb[0])
            .unwrap()
            .then(pa[1].partial_cmp(&pb[1]).unwrap())
            .then(a.cmp(&b))
    });
    let mut new_index = vec![0; nv];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    let mut tris: Vec<[usize; 3]> = mesh
        .triangles()
        .iter()
        .map(|t| {
            let r = [new_index[t[0]], new_index[t[1]], new_index[t[2]]];
            let k = (0..3).min_by_key(|&k| r[k]).unwrap();
            [r[k], r[(k + 1) % 3], r[(k + 2) % 3]]
        })
        .collect();
    tris.sort_unstable();
    let mut edges: Vec<(usize, usize, EdgeLabel)> = mesh
        .boundary_edges()
        .iter()
        .zip(partition.labels())
        .map(|(e, &l)| {
            let (a, b) = edge_key(new_index[e.vertices[0]], new_index[e.vertices[1]]);
            (a, b, l)
        })
        .collect();
    edges.sort_unstable();

    let mut out = String::new();
    for &old in &order {
        let p = mesh.vertices()[old];
        let _ = writeln!(out, "v {} {}", p[0], p[1]);
    }
    for t in &tris {
        let _ = writeln!(out, "t {} {} {}", t[0], t[1], t[2]);
    }
    for (a, b, l) in edges {
        let tag = match l {
            EdgeLabel::Dirichlet => "bd",
            EdgeLabel::Traction => "bt",
        };
        let _ = writeln!(out, "{tag} {a} {b}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_TRIANGLES: &str = "\
# unit square
v 0 0
v 1 0
v 1 1
v 0 1
t 0 1 2
t 0 2 3
bd 0 3
bt 0 1
bt 1 2
bt 2 3
";

    #[test]
    fn structured_counts() {
        for (m, nv, nt, nb) in [(1, 4, 2, 4), (2, 9, 8, 8), (5, 36, 50, 20)] {
            let mesh = TriangleMesh::<f64>::structured_unit_square(m).unwrap();
            assert_eq!(mesh.vertices().len(), nv);
            assert_eq!(mesh.triangles().len(), nt);
            assert_eq!(mesh.boundary_edges().len(), nb);
            let area: f64 = mesh.areas().iter().sum();
            assert!((area - 1.0).abs() < 1e-14);
        }
        assert!(TriangleMesh::<f64>::structured_unit_square(0).is_err());
    }

    #[test]
    fn normals_close_the_boundary() {
        let mesh = TriangleMesh::<f64>::structured_unit_square(7).unwrap();
        let mut s = [0.0; 2];
        for e in mesh.boundary_edges() {
            s[0] += e.length * e.normal[0];
            s[1] += e.length * e.normal[1];
            // outward: the normal points away from the unit square's center
            let [a, _] = e.vertices;
            let p = mesh.vertices()[a];
            assert!((p[0] - 0.5) * e.normal[0] + (p[1] - 0.5) * e.normal[1] > 0.0);
        }
        assert!(s[0].abs() < 1e-13 && s[1].abs() < 1e-13);
    }

    #[test]
    fn parse_sample() {
        let (mesh, part) = parse_mesh::<f64>(TWO_TRIANGLES, false).unwrap();
        assert_eq!(mesh.triangles().len(), 2);
        assert_eq!(part.count(EdgeLabel::Dirichlet), 1);
        let left = mesh.boundary_edge_index(3, 0).unwrap();
        assert_eq!(part.label(left), EdgeLabel::Dirichlet);
        let r = validate_partition(&mesh, &part, BcMode::Mixed).unwrap();
        assert_eq!(r.dirichlet_length, 1.0);
        assert_eq!(r.traction_length, 3.0);
    }

    #[test]
    fn parse_errors() {
        let interior = TWO_TRIANGLES.replace("bt 2 3", "bt 2 3\nbd 0 2");
        assert!(matches!(
            parse_mesh::<f64>(&interior, false),
            Err(Error::DanglingLabel { line: 12, a: 0, b: 2 })
        ));
        let cw = TWO_TRIANGLES.replace("t 0 1 2", "t 0 2 1");
        assert!(matches!(
            parse_mesh::<f64>(&cw, false),
            Err(Error::Orientation { triangle: 0, .. })
        ));
        let (fixed, _) = parse_mesh::<f64>(&cw, true).unwrap();
        assert!(fixed.area(0) > 0.0);
        let missing = TWO_TRIANGLES.replace("bt 1 2\n", "");
        assert!(matches!(parse_mesh::<f64>(&missing, false), Err(Error::MissingLabel(1, 2))));
        let bad = TWO_TRIANGLES.replace("v 1 1", "v 1 x");
        assert!(matches!(
            parse_mesh::<f64>(&bad, false),
            Err(Error::Parse { line: 4, column: 5, .. })
        ));
    }

    #[test]
    fn non_manifold_edge_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.6, 2.0]];
        let t = vec![[0, 1, 2], [1, 0, 3], [1, 4, 0]];
        assert!(matches!(
            TriangleMesh::<f64>::new(v, t, false),
            Err(Error::NonManifoldEdge(0, 1))
        ));
    }

    #[test]
    fn disconnected_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 0.0], [6.0, 0.0], [5.0, 1.0]];
        let t = vec![[0, 1, 2], [3, 4, 5]];
        assert!(TriangleMesh::<f64>::new(v, t, false).is_err());
    }

    #[test]
    fn partition_validation() {
        let mesh = TriangleMesh::<f64>::structured_unit_square(3).unwrap();
        let left = BoundaryPartition::from_fn(&mesh, |p, _| {
            if p[0] < 1e-12 {
                EdgeLabel::Dirichlet
            } else {
                EdgeLabel::Traction
            }
        });
        let r = validate_partition(&mesh, &left, BcMode::Mixed).unwrap();
        assert!((r.dirichlet_length - 1.0).abs() < 1e-14);
        assert!((r.traction_length - 3.0).abs() < 1e-14);
        assert!(matches!(
            validate_partition(&mesh, &left, BcMode::DisplacementOnly),
            Err(Error::UnexpectedTractionEdges { count: 9 })
        ));
        let all_t = BoundaryPartition::uniform(&mesh, EdgeLabel::Traction);
        assert_eq!(
            validate_partition(&mesh, &all_t, BcMode::Mixed),
            Err(Error::EmptyDirichletSet)
        );
        let all_d = BoundaryPartition::uniform(&mesh, EdgeLabel::Dirichlet);
        assert!(validate_partition(&mesh, &all_d, BcMode::DisplacementOnly).is_ok());
    }

    #[test]
    fn canonical_emit_is_a_fixed_point() {
        let (mesh, part) = parse_mesh::<f64>(TWO_TRIANGLES, false).unwrap();
        let once = emit_mesh(&mesh, &part);
        let (m2, p2) = parse_mesh::<f64>(&once, false).unwrap();
        assert_eq!(emit_mesh(&m2, &p2), once);

        let sq = TriangleMesh::<f64>::structured_unit_square(4).unwrap();
        let part = BoundaryPartition::from_fn(&sq, |p, _| {
            if p[1] < 0.3 {
                EdgeLabel::Dirichlet
            } else {
                EdgeLabel::Traction
            }
        });
        let text = emit_mesh(&sq, &part);
        let (m3, p3) = parse_mesh::<f64>(&text, false).unwrap();
        assert_eq!(emit_mesh(&m3, &p3), text);
        assert_eq!(p3.count(EdgeLabel::Dirichlet), 6);
    }
}
