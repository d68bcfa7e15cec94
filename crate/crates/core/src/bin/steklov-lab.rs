use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use steklov_core::domain::{boundary_points, clip_ball, DomainSpec};
use steklov_core::experiments::{self, ExperimentConfig, RunScope};
use steklov_core::mesh::{triangulate, triangulate_domain, triangulate_region, MarkedPolygon};
use steklov_core::mixed::solve_mixed;
use steklov_core::nodal::analyze;
use steklov_core::oracles::sloshing_eigenvalue;
use steklov_core::steklov::{solve_steklov_with, MassKind};
use steklov_core::{Error, Result};

/// Steklov spectral lab: FEM spectra, mixed problems and nodal geometry.
#[derive(Parser)]
#[command(name = "steklov-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steklov eigenvalues of one domain.
    Solve(SolveArgs),
    /// Mixed Steklov-Dirichlet eigenvalues: the sloshing tank or a boundary ball.
    Mixed(MixedArgs),
    /// Nodal geometry of each computed eigenfunction (CSV on stdout).
    Nodal(TargetArgs),
    /// Full density-radius and inner-radius sweep from a config.
    Scaling(RunArgs),
    /// Mesh in the plain-text format.
    MeshDump(MeshArgs),
    /// Every configured experiment, writing all artifacts.
    Run(RunArgs),
}

fn parse_domain(id: &str) -> std::result::Result<DomainSpec, String> {
    DomainSpec::by_id(id).ok_or_else(|| {
        let known: Vec<String> = DomainSpec::catalog().into_iter().map(|d| d.id).collect();
        format!("unknown domain '{id}' (known: {}, flat_graph)", known.join(", "))
    })
}

#[derive(Args)]
struct TargetArgs {
    #[arg(long, value_parser = parse_domain)]
    domain: DomainSpec,
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    #[arg(long, default_value_t = 8)]
    k: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum MassArg {
    Lumped,
    Consistent,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long, value_enum, default_value = "lumped")]
    mass: MassArg,
    /// Directory for spectrum.json and eigenvector exports.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Eigenvector indices to export as mesh text with a value column.
    #[arg(long, value_delimiter = ',')]
    export: Vec<usize>,
}

#[derive(Args)]
struct MixedArgs {
    /// `sloshing` or a catalog domain id (then --s is required).
    #[arg(long)]
    domain: String,
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Tank length (sloshing only).
    #[arg(long, default_value_t = std::f64::consts::PI)]
    length: f64,
    /// Tank depth (sloshing only).
    #[arg(long, default_value_t = std::f64::consts::PI)]
    depth: f64,
    /// Ball radius.
    #[arg(long)]
    s: Option<f64>,
    /// Ball center: index into 64 equally spaced boundary samples.
    #[arg(long, default_value_t = 0)]
    x0_index: usize,
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long, value_parser = parse_domain)]
    domain: DomainSpec,
    #[arg(long, default_value_t = 0.1)]
    h: f64,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config and STEKLOV_LAB_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent solves.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Mixed(a) => mixed(a),
        Command::Nodal(a) => nodal(a),
        Command::Scaling(a) => run(a, RunScope::Scaling),
        Command::MeshDump(a) => mesh_dump(a),
        Command::Run(a) => run(a, RunScope::All),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            println!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(1)
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn solve(a: SolveArgs) -> Result<()> {
    let t = &a.target;
    let mass = match a.mass {
        MassArg::Lumped => MassKind::Lumped,
        MassArg::Consistent => MassKind::Consistent,
    };
    let mesh = triangulate_domain(&t.domain, t.h)?;
    let spec = solve_steklov_with(&mesh, t.k, mass)?;
    let summary = json!({
        "domain_id": t.domain.id,
        "h": t.h,
        "eigenvalues": spec.eigenvalues,
        "residuals": spec.residuals,
    });
    for l in &spec.eigenvalues {
        println!("{l}");
    }
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(|e| Error::InvalidInput(e.to_string()))?;
        write_file(&dir.join("spectrum.json"), &(serde_json::to_string_pretty(&summary).unwrap() + "\n"))?;
        for &i in &a.export {
            let u = spec
                .interior_extensions
                .get(i)
                .ok_or_else(|| Error::InvalidInput(format!("no eigenvector {i}")))?;
            write_file(&dir.join(format!("eigvec_{i}.txt")), &mesh.to_text_with_values(Some(u)))?;
        }
    }
    Ok(())
}

fn mixed(a: MixedArgs) -> Result<()> {
    if a.domain == "sloshing" {
        let mesh = triangulate(&MarkedPolygon::sloshing_tank(a.length, a.depth), a.h)?;
        let spec = solve_mixed(&mesh, a.k)?;
        for (i, l) in spec.eigenvalues.iter().enumerate() {
            println!("{l} {}", sloshing_eigenvalue(a.length, a.depth, i as u32 + 1));
        }
        return Ok(());
    }
    let domain = parse_domain(&a.domain).map_err(Error::InvalidInput)?;
    let s = a.s.ok_or_else(|| Error::InvalidInput("--s is required for ball regions".into()))?;
    let samples = boundary_points(&domain, 64)?;
    let x0 = samples
        .get(a.x0_index)
        .ok_or_else(|| Error::InvalidInput("--x0-index must be below 64".into()))?
        .point;
    let mesh = triangulate_region(&clip_ball(&domain, x0, s)?, a.h)?;
    for l in solve_mixed(&mesh, a.k)?.eigenvalues {
        println!("{l}");
    }
    Ok(())
}

fn nodal(a: TargetArgs) -> Result<()> {
    let mesh = triangulate_domain(&a.domain, a.h)?;
    let spec = solve_steklov_with(&mesh, a.k, MassKind::Lumped)?;
    let mut w = csv::Writer::from_writer(std::io::stdout());
    let header = &experiments::NODAL_HEADER[..experiments::NODAL_HEADER.len() - 2];
    let _ = w.write_record(header);
    for i in 1..spec.len() {
        let r = analyze(&mesh, &spec.interior_extensions[i], spec.eigenvalues[i], i, None)?;
        let _ = w.write_record([
            a.domain.id.clone(),
            a.h.to_string(),
            i.to_string(),
            r.lambda.to_string(),
            r.n_domains.to_string(),
            r.density_radius.to_string(),
            r.density_radius_times_lambda.to_string(),
            r.min_rho.to_string(),
            r.min_rho_times_lambda.to_string(),
            r.max_rayleigh_residual.to_string(),
        ]);
    }
    let _ = w.flush();
    Ok(())
}

fn mesh_dump(a: MeshArgs) -> Result<()> {
    let text = triangulate_domain(&a.domain, a.h)?.to_text();
    match a.out {
        Some(p) => write_file(&p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(a: RunArgs, scope: RunScope) -> Result<()> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let dir = a.out.unwrap_or_else(|| cfg.resolved_output_dir());
    let results = experiments::run(&cfg, scope, a.jobs)?;
    for s in &results.scaling {
        println!(
            "{} h={} rows={} density_ratio_upper_half={} min_rho_times_lambda={}",
            s.domain_id,
            s.h,
            s.rows_in_window,
            s.density_ratio_upper_half.map_or("-".into(), |v| format!("{v:.4}")),
            s.min_rho_times_lambda.map_or("-".into(), |v| format!("{v:.4}")),
        );
    }
    for p in experiments::write_outputs(&results, &dir, scope)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
