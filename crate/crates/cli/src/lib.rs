//! Command-line front end: solves, framework classification, the audit suite
//! and convergence studies, reported as text or `key=value` records.
//!
//! Exit codes: 0 success, 1 input error, 2 solve failure, 3 audit failure.

mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use nalgebra::DMatrix;
use stressfirst::linalg::DEFAULT_RANK_TOL;
use stressfirst::mesh::parse_mesh;
use stressfirst::solver::StressSolver;
use stressfirst::verify::{self, library, ManufacturedCase};
use stressfirst::{
    BarFramework, BcMode, EdgeLabel, ElasticityTensor, Error, ErrorCategory, ProblemSpec,
};

pub use report::{num, Format, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SOLVE: i32 = 2;
pub const EXIT_AUDIT: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Stress (and displacement) of a mesh problem or framework.
    Solve,
    /// Mechanism and self-stress counts of a framework.
    Classify,
    /// The full randomized audit suite.
    Verify,
    /// Stress error table and fitted rate for a manufactured case.
    Convergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Mixed,
    Displacement,
}

impl From<Mode> for BcMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Mixed => BcMode::Mixed,
            Mode::Displacement => BcMode::DisplacementOnly,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "stressfirst", version, about = "Stress-first linear elasticity solver")]
#[command(group(clap::ArgGroup::new("input").args(["mesh", "framework", "builtin"])))]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,

    /// Triangle mesh file (`v`, `t`, `bd`, `bt` lines).
    #[arg(long, value_name = "PATH")]
    pub mesh: Option<PathBuf>,
    /// Bar framework file (`node`, `bar`, `pin`, `load` lines).
    #[arg(long, value_name = "PATH")]
    pub framework: Option<PathBuf>,
    /// Built-in problem: patch, patch-displacement, sine, sine-displacement,
    /// two-bar, square-diagonals, square-open, triangle-two-pins.
    #[arg(long, value_name = "NAME")]
    pub builtin: Option<String>,
    /// Manufactured data (patch or sine) applied to a `--mesh` geometry.
    #[arg(long, value_name = "NAME", requires = "mesh")]
    pub case: Option<String>,

    #[arg(long, value_name = "X", conflicts_with = "material", default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, value_name = "X", conflicts_with = "material", default_value_t = 1.0)]
    pub mu: f64,
    /// File holding a 3×3 Mandel stiffness matrix.
    #[arg(long, value_name = "PATH")]
    pub material: Option<PathBuf>,

    /// Boundary condition mode; built-in mesh problems default to their own.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Uniform body force `X,Y` for `--mesh` input.
    #[arg(long, value_name = "X,Y", value_parser = parse_pair, allow_hyphen_values = true)]
    pub body_force: Option<[f64; 2]>,
    /// Uniform traction `X,Y` on traction edges for `--mesh` input.
    #[arg(long, value_name = "X,Y", value_parser = parse_pair, allow_hyphen_values = true)]
    pub traction: Option<[f64; 2]>,
    /// Repair clockwise triangles in `--mesh` input instead of rejecting them.
    #[arg(long)]
    pub fix_orientation: bool,

    /// Mesh size `m` for built-in mesh problems.
    #[arg(long, value_name = "M", default_value_t = 8, value_parser = clap::value_parser!(usize))]
    pub size: usize,
    /// Mesh sizes for `convergence`, strictly increasing.
    #[arg(long, value_name = "M,M,M", value_delimiter = ',', default_values_t = [8usize, 16, 32])]
    pub sizes: Vec<usize>,

    /// Seed for randomized audits (decimal or 0x-hex).
    #[arg(long, value_name = "N", value_parser = parse_seed, default_value = "0x5EED")]
    pub seed: u64,
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, value_name = "X", value_parser = parse_positive, default_value_t = DEFAULT_RANK_TOL)]
    pub tol_rank: f64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let x: f64 = a.parse().map_err(|e| format!("{a}: {e}"))?;
            let y: f64 = b.parse().map_err(|e| format!("{b}: {e}"))?;
            if x.is_finite() && y.is_finite() {
                Ok([x, y])
            } else {
                Err("components must be finite".into())
            }
        }
        _ => Err("expected two comma-separated numbers".into()),
    }
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    r.map_err(|e| e.to_string())
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err("tolerance must be positive".into())
    }
}

/// Exit status, report text, and an error message for standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub output: String,
    pub error: Option<String>,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.category() {
            ErrorCategory::Input => EXIT_INPUT,
            ErrorCategory::Solve => EXIT_SOLVE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

/// Parses arguments (program name first). Help and version requests become
/// an exit-0 outcome carrying their text; other argument errors exit 1.
pub fn parse_args<I, T>(args: I) -> Result<RunConfig, Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    RunConfig::try_parse_from(args).map_err(|e| {
        let text = e.to_string();
        match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                Outcome {
                    code: EXIT_OK,
                    output: text,
                    error: None,
                }
            }
            _ => Outcome {
                code: EXIT_INPUT,
                output: String::new(),
                error: Some(text),
            },
        }
    })
}

pub fn run_from<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_args(args) {
        Ok(config) => run(&config),
        Err(outcome) => outcome,
    }
}

pub fn run(config: &RunConfig) -> Outcome {
    let mut report = Report::new(config.format);
    let result = match config.command {
        Command::Solve => solve(config, &mut report),
        Command::Classify => classify(config, &mut report),
        Command::Verify => verify_suite(config, &mut report),
        Command::Convergence => convergence(config, &mut report),
    };
    let (code, error) = match result {
        Ok(code) => (code, None),
        Err(f) => (f.code, Some(f.message)),
    };
    Outcome {
        code,
        output: report.into_string(),
        error,
    }
}

enum Input {
    Mesh(ProblemSpec, BcMode, String),
    Framework(BarFramework, String),
}

fn material(config: &RunConfig) -> Result<ElasticityTensor, Failure> {
    match &config.material {
        Some(path) => {
            let text = read(path)?;
            let mut values = Vec::new();
            for (line_no, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("");
                for tok in line.split_whitespace() {
                    let v: f64 = tok.parse().map_err(|_| {
                        input_error(format!(
                            "{}: line {}: '{tok}' is not a number",
                            path.display(),
                            line_no + 1
                        ))
                    })?;
                    values.push(v);
                }
            }
            if values.len() != 9 {
                return Err(input_error(format!(
                    "{}: expected a 3×3 Mandel matrix (9 numbers), found {}",
                    path.display(),
                    values.len()
                )));
            }
            Ok(ElasticityTensor::from_mandel(
                DMatrix::from_row_slice(3, 3, &values),
                2,
            )?)
        }
        None => Ok(ElasticityTensor::isotropic(config.lambda, config.mu, 2)?),
    }
}

fn manufactured(name: &str) -> Result<ManufacturedCase, Failure> {
    library::manufactured_case(name)
        .ok_or_else(|| input_error(format!("unknown manufactured case '{name}' (patch, sine)")))
}

fn load_input(config: &RunConfig) -> Result<Input, Failure> {
    if let Some(path) = &config.framework {
        let fw = BarFramework::parse(&read(path)?)?;
        return Ok(Input::Framework(fw, path.display().to_string()));
    }
    if let Some(path) = &config.mesh {
        let (mesh, partition) = parse_mesh::<f64>(&read(path)?, config.fix_orientation)?;
        let mode = config.mode.map(BcMode::from).unwrap_or(BcMode::Mixed);
        let spec = match &config.case {
            Some(name) => manufactured(name)?.problem_on(mesh, partition)?,
            None => {
                let mut spec = ProblemSpec::homogeneous(mesh, partition, material(config)?)?;
                if let Some(f) = config.body_force {
                    spec.body_force.iter_mut().for_each(|v| *v = f);
                }
                if let Some(t) = config.traction {
                    for (e, v) in spec.traction.iter_mut().enumerate() {
                        if spec.partition.label(e) == EdgeLabel::Traction {
                            *v = t;
                        }
                    }
                }
                spec
            }
        };
        return Ok(Input::Mesh(spec, mode, path.display().to_string()));
    }
    let Some(name) = &config.builtin else {
        return Err(input_error(
            "no input: give --mesh, --framework or --builtin",
        ));
    };
    if let Some(fw) = library::framework(name) {
        return Ok(Input::Framework(fw, name.clone()));
    }
    if config.size == 0 {
        return Err(input_error("--size must be at least 1"));
    }
    match library::mesh_problem(name, config.size) {
        Some(r) => {
            let (spec, default_mode) = r?;
            let mode = config.mode.map(BcMode::from).unwrap_or(default_mode);
            let spec = if mode == default_mode {
                spec
            } else {
                manufactured(name)?.problem(config.size, mode)?
            };
            Ok(Input::Mesh(spec, mode, name.clone()))
        }
        None => Err(input_error(format!(
            "unknown built-in '{name}'; available: {}, {}",
            library::MESH_PROBLEMS.join(", "),
            library::FRAMEWORKS.join(", ")
        ))),
    }
}

fn mode_name(mode: BcMode) -> &'static str {
    match mode {
        BcMode::Mixed => "mixed",
        BcMode::DisplacementOnly => "displacement",
    }
}

fn solve(config: &RunConfig, report: &mut Report) -> Result<i32, Failure> {
    match load_input(config)? {
        Input::Mesh(spec, mode, name) => {
            let solution = StressSolver::new(&spec, mode)?.solve(&spec)?;
            let (nt, nv) = (spec.mesh.triangles().len(), spec.mesh.vertices().len());
            report.record(
                "problem",
                vec![
                    ("name", name.as_str().into()),
                    ("mode", mode_name(mode).into()),
                    ("elements", nt.into()),
                    ("vertices", nv.into()),
                ],
            );
            report.human(format!(
                "problem {name}: {nt} elements, {nv} vertices, {} mode",
                mode_name(mode)
            ));
            report.human("element stress (Mandel: s11 s22 √2·s12)");
            for t in 0..nt {
                let s = solution.sigma.fixed_rows::<3>(3 * t);
                report.record(
                    "stress",
                    vec![
                        ("element", t.into()),
                        ("s11", s[0].into()),
                        ("s22", s[1].into()),
                        ("s12", s[2].into()),
                    ],
                );
                report.human(format!("{t:>6} {:>24} {:>24} {:>24}", num(s[0]), num(s[1]), num(s[2])));
            }
            report.human("vertex displacement");
            for v in 0..nv {
                let (ux, uy) = (solution.u[2 * v], solution.u[2 * v + 1]);
                report.record(
                    "displacement",
                    vec![("vertex", v.into()), ("u1", ux.into()), ("u2", uy.into())],
                );
                report.human(format!("{v:>6} {:>24} {:>24}", num(ux), num(uy)));
            }
            let d = &solution.diagnostics;
            let diag = [
                ("equilibrium_residual", d.equilibrium_residual),
                ("orthogonality_residual", d.orthogonality_residual),
                ("strain_mismatch", d.strain_mismatch),
                ("complementary_energy", d.complementary_energy),
                ("potential_energy", d.potential_energy),
            ];
            report.record(
                "diagnostics",
                diag.iter().map(|&(k, v)| (k, v.into())).collect(),
            );
            report.human("diagnostics");
            for (k, v) in diag {
                report.human(format!("  {k}: {}", num(v)));
            }
        }
        Input::Framework(fw, name) => {
            let sol = fw.solve_bar_stress()?;
            report.record(
                "framework",
                vec![
                    ("name", name.as_str().into()),
                    ("nodes", fw.nodes().len().into()),
                    ("bars", fw.bars().len().into()),
                ],
            );
            report.human(format!(
                "framework {name}: {} nodes, {} bars",
                fw.nodes().len(),
                fw.bars().len()
            ));
            report.human("bar tension (negative in compression)");
            for (b, t) in sol.tensions.iter().enumerate() {
                report.record("tension", vec![("bar", b.into()), ("value", (*t).into())]);
                report.human(format!("{b:>6} {:>24}", num(*t)));
            }
            report.human("node displacement");
            let dim = fw.dim();
            for n in 0..fw.nodes().len() {
                let mut fields = vec![("node", n.into())];
                for (a, name) in ["u1", "u2", "u3"].into_iter().take(dim).enumerate() {
                    fields.push((name, sol.displacements[dim * n + a].into()));
                }
                report.record("displacement", fields);
                let comps: Vec<String> = (0..dim)
                    .map(|a| format!("{:>24}", num(sol.displacements[dim * n + a])))
                    .collect();
                report.human(format!("{n:>6} {}", comps.join(" ")));
            }
            report.record(
                "diagnostics",
                vec![("equilibrium_residual", sol.equilibrium_residual.into())],
            );
            report.human(format!(
                "diagnostics\n  equilibrium_residual: {}",
                num(sol.equilibrium_residual)
            ));
        }
    }
    Ok(EXIT_OK)
}

fn classify(config: &RunConfig, report: &mut Report) -> Result<i32, Failure> {
    let Input::Framework(fw, name) = load_input(config)? else {
        return Err(input_error("classify needs a framework (--framework or a built-in framework)"));
    };
    let c = fw.classify_with(config.tol_rank);
    report.record(
        "classification",
        vec![
            ("name", name.as_str().into()),
            ("mechanisms", c.mechanisms.into()),
            ("self_stresses", c.self_stresses.into()),
            ("free_dofs", c.free_dofs.into()),
            ("bars", c.bars.into()),
        ],
    );
    report.human(format!(
        "mechanisms: {}, self_stresses: {}",
        c.mechanisms, c.self_stresses
    ));
    Ok(EXIT_OK)
}

fn verify_suite(config: &RunConfig, report: &mut Report) -> Result<i32, Failure> {
    let records = verify::run_suite(config.seed, config.tol_rank)?;
    let mut failed = 0;
    for r in &records {
        let status = if r.passed { "pass" } else { "fail" };
        failed += usize::from(!r.passed);
        report.record(
            "audit",
            vec![
                ("name", r.name.as_str().into()),
                ("status", status.into()),
                ("value", r.value.into()),
                ("threshold", r.threshold.into()),
                ("seed", r.seed.to_string().into()),
            ],
        );
        report.human(format!(
            "{} {:<36} value {} threshold {}",
            status.to_uppercase(),
            r.name,
            num(r.value),
            num(r.threshold)
        ));
        if let Some(instance) = &r.instance {
            report.human(format!("  replay with --seed {:#x}; offending instance:", r.seed));
            report.block(instance);
        }
    }
    report.record(
        "summary",
        vec![
            ("audits", records.len().into()),
            ("failed", failed.into()),
            ("seed", config.seed.to_string().into()),
        ],
    );
    report.human(format!(
        "{} of {} audits passed (seed {:#x})",
        records.len() - failed,
        records.len(),
        config.seed
    ));
    Ok(if failed == 0 { EXIT_OK } else { EXIT_AUDIT })
}

fn convergence(config: &RunConfig, report: &mut Report) -> Result<i32, Failure> {
    let name = config.builtin.as_deref().unwrap_or("sine");
    let case = manufactured(name)?;
    let mode = config.mode.map(BcMode::from).unwrap_or(match name {
        "patch-displacement" | "sine-displacement" => BcMode::DisplacementOnly,
        _ => BcMode::Mixed,
    });
    let r = verify::convergence_study(&case, &config.sizes, mode)?;
    report.human(format!("case {} ({} mode)", r.case, mode_name(mode)));
    report.human(format!("{:>6} {:>24} {:>24}", "m", "h", "stress L2 error"));
    for row in &r.rows {
        report.record(
            "convergence_row",
            vec![("m", row.m.into()), ("h", row.h.into()), ("error", row.error.into())],
        );
        report.human(format!("{:>6} {:>24} {:>24}", row.m, num(row.h), num(row.error)));
    }
    let rate = match r.rate {
        Some(v) => num(v),
        None => "exact".to_string(),
    };
    report.record(
        "convergence_rate",
        vec![
            ("case", r.case.as_str().into()),
            ("mode", mode_name(mode).into()),
            ("rate", rate.as_str().into()),
        ],
    );
    report.human(format!("fitted rate: {rate}"));
    Ok(EXIT_OK)
}
