//! Named built-in problems, so audits and command-line runs need no files.

use crate::error::Result;
use crate::fem::ProblemSpec;
use crate::framework::BarFramework;
use crate::mesh::BcMode;

use super::manufactured::ManufacturedCase;

pub const FRAMEWORKS: [&str; 4] = ["two-bar", "square-diagonals", "square-open", "triangle-two-pins"];
pub const MESH_PROBLEMS: [&str; 4] = ["patch", "patch-displacement", "sine", "sine-displacement"];

/// Supports at `(−1, 0)` and `(1, 0)`, apex `(0, 1)` loaded by `(0, −1)`,
/// unit axial rigidity. Both bars carry a compressive force of `1/√2`.
pub fn two_bar_truss() -> BarFramework<f64> {
    let mut fw = BarFramework::new(2).expect("dim 2");
    let a = fw.add_node(&[-1.0, 0.0]).expect("finite");
    let b = fw.add_node(&[1.0, 0.0]).expect("finite");
    let c = fw.add_node(&[0.0, 1.0]).expect("finite");
    fw.add_bar(a, c, 1.0).expect("valid bar");
    fw.add_bar(b, c, 1.0).expect("valid bar");
    fw.pin_node(a).expect("valid node");
    fw.pin_node(b).expect("valid node");
    fw.load(c, 1, -1.0).expect("free dof");
    fw
}

fn unit_square_nodes(fw: &mut BarFramework<f64>) {
    for p in [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] {
        fw.add_node(&p).expect("finite");
    }
    for (i, j) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
        fw.add_bar(i, j, 1.0).expect("valid bar");
    }
}

/// Unit square with both diagonals on a pin (node 0) and a vertical roller
/// (node 1): statically indeterminate with one self-stress.
pub fn square_diagonals() -> BarFramework<f64> {
    let mut fw = BarFramework::new(2).expect("dim 2");
    unit_square_nodes(&mut fw);
    fw.add_bar(0, 2, 1.0).expect("valid bar");
    fw.add_bar(1, 3, 1.0).expect("valid bar");
    fw.pin_node(0).expect("valid node");
    fw.pin(1, 1, 0.0).expect("valid pin");
    fw.load(2, 0, 1.0).expect("free dof");
    fw.load(3, 1, -1.0).expect("free dof");
    fw
}

/// Unit square without diagonals on a pin and a roller: one sway mechanism.
pub fn square_open() -> BarFramework<f64> {
    let mut fw = BarFramework::new(2).expect("dim 2");
    unit_square_nodes(&mut fw);
    fw.pin_node(0).expect("valid node");
    fw.pin(1, 1, 0.0).expect("valid pin");
    fw.load(2, 0, 1.0).expect("free dof");
    fw
}

/// Equilateral triangle pinned at both base nodes: the base bar joins two
/// supports and is a self-stress.
pub fn triangle_two_pins() -> BarFramework<f64> {
    let mut fw = BarFramework::new(2).expect("dim 2");
    fw.add_node(&[0.0, 0.0]).expect("finite");
    fw.add_node(&[1.0, 0.0]).expect("finite");
    fw.add_node(&[0.5, 0.75f64.sqrt()]).expect("finite");
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        fw.add_bar(i, j, 1.0).expect("valid bar");
    }
    fw.pin_node(0).expect("valid node");
    fw.pin_node(1).expect("valid node");
    fw.load(2, 0, 1.0).expect("free dof");
    fw
}

pub fn framework(name: &str) -> Option<BarFramework<f64>> {
    match name {
        "two-bar" => Some(two_bar_truss()),
        "square-diagonals" => Some(square_diagonals()),
        "square-open" => Some(square_open()),
        "triangle-two-pins" => Some(triangle_two_pins()),
        _ => None,
    }
}

/// A named mesh problem on the structured `m × m` square, with the mode it
/// is meant to be solved in.
pub fn mesh_problem(name: &str, m: usize) -> Option<Result<(ProblemSpec<f64>, BcMode)>> {
    let (case, mode) = match name {
        "patch" => (ManufacturedCase::patch(), BcMode::Mixed),
        "patch-displacement" => (ManufacturedCase::patch(), BcMode::DisplacementOnly),
        "sine" => (ManufacturedCase::sine(), BcMode::Mixed),
        "sine-displacement" => (ManufacturedCase::sine(), BcMode::DisplacementOnly),
        _ => return None,
    };
    Some(case.problem(m, mode).map(|spec| (spec, mode)))
}

pub fn manufactured_case(name: &str) -> Option<ManufacturedCase> {
    match name {
        "patch" | "patch-displacement" => Some(ManufacturedCase::patch()),
        "sine" | "sine-displacement" => Some(ManufacturedCase::sine()),
        _ => None,
    }
}
