use std::path::Path;
use std::process::Command;

use stressfirst::mesh::emit_mesh;
use stressfirst::verify::library;
use stressfirst::{BoundaryPartition, EdgeLabel, TriangleMesh};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stressfirst"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write_mesh(dir: &Path, name: &str, left_only: bool) -> String {
    let mesh = TriangleMesh::structured_unit_square(2).unwrap();
    let part = BoundaryPartition::from_fn(&mesh, |p, _| {
        if !left_only || p[0] < 1e-12 {
            EdgeLabel::Dirichlet
        } else {
            EdgeLabel::Traction
        }
    });
    let path = dir.join(name);
    std::fs::write(&path, emit_mesh(&mesh, &part)).unwrap();
    path.to_str().unwrap().to_string()
}

fn field(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn patch_mesh_file_reproduces_constant_stress() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = write_mesh(dir.path(), "square.mesh", true);
    let (code, out, _) = run(&["solve", "--mesh", &mesh, "--case", "patch", "--format", "records"]);
    assert_eq!(code, 0);
    let stresses: Vec<&str> = out.lines().filter(|l| l.starts_with("record=stress ")).collect();
    assert_eq!(stresses.len(), 8);
    for line in stresses {
        assert!((field(line, "s11") - 3.0).abs() <= 1e-10);
        assert!((field(line, "s22") - 1.0).abs() <= 1e-10);
        assert!(field(line, "s12").abs() <= 1e-10);
    }
}

#[test]
fn classify_framework_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two-bar.fw");
    std::fs::write(&path, library::two_bar_truss().to_text()).unwrap();
    let (code, out, _) = run(&["classify", "--framework", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "mechanisms: 0, self_stresses: 0");
}

#[test]
fn output_file_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for p in [&a, &b] {
        let (code, out, _) = run(&[
            "solve", "--builtin", "sine", "--size", "4", "--format", "records", "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert!(out.is_empty());
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);
}

#[test]
fn loads_and_material_file() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = write_mesh(dir.path(), "square.mesh", true);
    let mat = dir.path().join("c.txt");
    std::fs::write(&mat, "# Mandel stiffness\n3 1 0\n1 3 0\n0 0 2\n").unwrap();
    let (code, out, _) = run(&[
        "solve", "--mesh", &mesh, "--material", mat.to_str().unwrap(), "--traction", "1,0",
        "--body-force", "0,-1", "--format", "records",
    ]);
    assert_eq!(code, 0, "{out}");
    let diag = out.lines().find(|l| l.starts_with("record=diagnostics")).unwrap();
    assert!(field(diag, "equilibrium_residual") <= 1e-12);
    assert!(field(diag, "orthogonality_residual") <= 1e-12);

    std::fs::write(&mat, "1 2 0\n2 1 0\n0 0 1\n").unwrap();
    let (code, _, err) = run(&["solve", "--mesh", &mesh, "--material", mat.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("not coercive"), "{err}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let all_d = write_mesh(dir.path(), "all-d.mesh", false);
    // traction edges present in displacement mode, and vice versa
    let (code, _, _) = run(&["solve", "--mesh", &all_d, "--mode", "mixed"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["solve", "--mesh", &all_d, "--mode", "displacement"]);
    assert_eq!(code, 0);
    let (code, _, err) = run(&["solve", "--mesh", "/nonexistent/file.mesh"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));
    let (code, _, err) = run(&["solve", "--builtin", "square-open"]);
    assert_eq!(code, 2);
    assert!(err.contains("mechanism"));
    let (code, _, _) = run(&["solve"]);
    assert_eq!(code, 1);
}

#[test]
fn verify_and_convergence_records() {
    let (code, out, _) = run(&["verify", "--format", "records"]);
    assert_eq!(code, 0);
    let summary = out.lines().last().unwrap();
    assert!(summary.starts_with("record=summary"));
    assert_eq!(field(summary, "failed"), 0.0);

    let (code, out, _) = run(&["convergence", "--builtin", "patch", "--sizes", "1,2,4", "--format", "records"]);
    assert_eq!(code, 0);
    assert!(out.contains("rate=exact"), "{out}");
    let (code, _, _) = run(&["convergence", "--builtin", "sine", "--sizes", "4,2,8"]);
    assert_eq!(code, 1);
}
