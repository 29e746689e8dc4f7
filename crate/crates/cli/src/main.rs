use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod output;
mod run;
mod spec;

use run::{Diagnostics, Status, EXIT_INVALID_SPEC, EXIT_OTHER};
use spec::{Kind, ProblemSpec};

#[derive(Parser, Debug)]
#[command(name = "cmrev", version, about = "Radial Monge-Ampère solutions and convex bodies of revolution from spec files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Problem spec (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the absolute and relative quadrature tolerance.
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    /// Overrides the number of sampled angles or radii.
    #[arg(long)]
    samples: Option<usize>,
    /// Also write a triangulated surface of revolution.
    #[arg(long)]
    mesh: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a hessian_dirichlet, mixed_dirichlet, mixed_entire, cm or bar_sj problem.
    Solve(RunArgs),
    /// Evaluate the area measure of a preset body (kind forward_body).
    Forward(RunArgs),
    /// Solve, map the body forward and compare with the input measure.
    Roundtrip(RunArgs),
    /// Check a spec file without solving.
    Validate {
        #[arg(long)]
        spec: PathBuf,
    },
}

fn load(path: &Path) -> Result<ProblemSpec, i32> {
    spec::parse_file(path).map_err(|e| {
        eprintln!("invalid spec {}:", path.display());
        for v in &e.violations {
            eprintln!("  {v}");
        }
        EXIT_INVALID_SPEC
    })
}

fn apply_overrides(spec: &mut ProblemSpec, args: &RunArgs) -> Result<(), String> {
    if let Some(t) = args.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(format!("--tol must be positive and finite, got {t}"));
        }
        spec.tolerance.abs_tol = t;
        spec.tolerance.rel_tol = t;
    }
    if let Some(s) = args.samples {
        if s < 2 {
            return Err(format!("--samples must be at least 2, got {s}"));
        }
        spec.samples = s;
    }
    spec.mesh |= args.mesh;
    Ok(())
}

fn write_diagnostics(out: &Path, diag: &Diagnostics) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(diag).map_err(|e| e.to_string())?;
    text.push('\n');
    let path = out.join("diagnostics.json");
    std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn execute(args: &RunArgs, allowed: &[Kind], name: &str) -> i32 {
    let mut spec = match load(&args.spec) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("cannot create {}: {e}", args.out.display());
        return EXIT_OTHER;
    }
    let kind = spec.kind;
    let refuse = |msg: String| {
        eprintln!("{msg}");
        let mut diag = Diagnostics::new(kind.to_string(), Status::InvalidSpec);
        diag.message = Some(msg);
        if let Err(e) = write_diagnostics(&args.out, &diag) {
            eprintln!("{e}");
        }
        EXIT_INVALID_SPEC
    };
    if !allowed.contains(&kind) {
        return refuse(format!("`{name}` does not handle kind {kind}"));
    }
    if let Err(msg) = apply_overrides(&mut spec, args) {
        return refuse(msg);
    }
    let mut result = run::run(&spec, &args.out);
    result.diagnostics.artifacts.push("diagnostics.json".into());
    if let Err(e) = write_diagnostics(&args.out, &result.diagnostics) {
        eprintln!("{e}");
        return EXIT_OTHER;
    }
    match &result.diagnostics.message {
        Some(m) => eprintln!("{}: {m}", spec.kind),
        None => println!("{}: solved, outputs in {}", spec.kind, args.out.display()),
    }
    result.exit_code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Solve(a) => execute(
            a,
            &[Kind::HessianDirichlet, Kind::MixedDirichlet, Kind::MixedEntire, Kind::Cm, Kind::BarSj],
            "solve",
        ),
        Command::Forward(a) => execute(a, &[Kind::ForwardBody], "forward"),
        Command::Roundtrip(a) => execute(a, &[Kind::Roundtrip], "roundtrip"),
        Command::Validate { spec } => match load(spec) {
            Ok(s) => {
                println!("{}: valid {} spec", spec.display(), s.kind);
                0
            }
            Err(code) => code,
        },
    };
    ExitCode::from(code as u8)
}
