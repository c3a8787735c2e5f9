//! Command-line front end: mesh generation and inspection, single solves
//! with VTK export, convergence tables, and the CIP ablation study.
//!
//! Exit codes: 2 for argument/usage errors, 3 for I/O problems, 4 for solver
//! failures. Logging is controlled by the VEM_LOG environment variable.

use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use vem2d::bench::{self, Problem};
use vem2d::forms::CipDeltas;
use vem2d::mesh::{
    channel_mesh, read_mesh, square_grid, voronoi_lloyd, write_mesh, write_vtk, ChannelConfig,
    PolygonalMesh, UNIT_SQUARE,
};
use vem2d::VemError;

#[derive(Parser)]
#[command(name = "vem", version, about = "Divergence-free VEM solver for the 2D Oseen problem")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a mesh and write it to a file.
    Mesh(MeshCmd),
    /// Print mesh statistics.
    Info(InfoCmd),
    /// Solve one problem on one mesh.
    Solve(SolveCmd),
    /// Error convergence table over a mesh sequence.
    Convergence(ConvergenceCmd),
    /// Boundary-layer stabilization on/off comparison.
    Ablate(AblateCmd),
}

#[derive(Args)]
struct MeshCmd {
    /// grid:N | voronoi:N[,ITERS[,SEED]] | channel[:SEEDS[,ITERS[,SEED]]] | file:PATH
    #[arg(long)]
    mesh: Option<String>,
    /// Output mesh file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a VTK view of the mesh.
    #[arg(long)]
    vtk: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct InfoCmd {
    #[arg(long)]
    mesh: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SolveCmd {
    /// boundary-layer | trig | pressure-robust | channel
    #[arg(long)]
    problem: Option<String>,
    /// Polynomial order (2..=4).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    mesh: Option<String>,
    /// Jump penalties "d1,d2,d3" (defaults to the problem's).
    #[arg(long)]
    delta: Option<String>,
    /// Solution VTK output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ConvergenceCmd {
    #[arg(long)]
    problem: Option<String>,
    /// Comma-separated orders, e.g. "2,3".
    #[arg(long)]
    k: Option<String>,
    /// Comma-separated Voronoi cell counts.
    #[arg(long)]
    cells: Option<String>,
    /// RNG seed for the mesh sequence.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct AblateCmd {
    #[arg(long)]
    k: Option<usize>,
    /// Structured n x n grid resolution.
    #[arg(long)]
    grid: Option<usize>,
    /// Semicolon-separated penalty triples, e.g. "0,0,0;0.1,0.01,0.01".
    #[arg(long)]
    deltas: Option<String>,
    /// CSV output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Key = value config file with [section] headers; command-line flags
    /// take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the effective settings (config format) before running.
    #[arg(long)]
    show_config: bool,
    /// Worker threads for element assembly (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VEM_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Mesh(c) => run_mesh(c),
        Cmd::Info(c) => run_info(c),
        Cmd::Solve(c) => run_solve(c),
        Cmd::Convergence(c) => run_convergence(c),
        Cmd::Ablate(c) => run_ablate(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match &e {
                VemError::Io(_) | VemError::MeshFormat { .. } => 3,
                VemError::SolverFailure(_) | VemError::SingularElement { .. } => 4,
                _ => 2,
            })
        }
    }
}

type Config = BTreeMap<String, BTreeMap<String, String>>;

/// Flat "key = value" file with [section] headers, '#' comments.
fn parse_config(path: &Path) -> Result<Config, VemError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Config::new();
    let mut section = String::from("global");
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(VemError::InvalidArgument(format!(
                "{}:{}: expected 'key = value' or '[section]'",
                path.display(),
                ln + 1
            )));
        };
        out.entry(section.clone())
            .or_default()
            .insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// Option resolution: command line beats config beats default.
struct Settings {
    config: Config,
    section: &'static str,
}

impl Settings {
    fn load(common: &Common, section: &'static str) -> Result<Self, VemError> {
        let config = match &common.config {
            Some(path) => parse_config(path)?,
            None => Config::new(),
        };
        if let Some(n) = common.threads {
            init_threads(n);
        }
        Ok(Self { config, section })
    }

    fn lookup(&self, key: &str) -> Option<&str> {
        self.config
            .get(self.section)
            .and_then(|s| s.get(key))
            .or_else(|| self.config.get("global").and_then(|s| s.get(key)))
            .map(String::as_str)
    }

    fn string(&self, cli: &Option<String>, key: &str, default: &str) -> String {
        cli.clone()
            .or_else(|| self.lookup(key).map(str::to_string))
            .unwrap_or_else(|| default.to_string())
    }

    fn parse<T: std::str::FromStr>(
        &self,
        cli: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, VemError> {
        if let Some(v) = cli {
            return Ok(v);
        }
        match self.lookup(key) {
            Some(raw) => raw.parse().map_err(|_| {
                VemError::InvalidArgument(format!("config key '{key}': bad value '{raw}'"))
            }),
            None => Ok(default),
        }
    }
}

fn init_threads(n: usize) {
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        log::warn!("thread pool already initialized: {e}");
    }
}

fn show_config(section: &str, entries: &[(&str, String)]) {
    let mut s = format!("[{section}]\n");
    for (k, v) in entries {
        let _ = writeln!(s, "{k} = {v}");
    }
    print!("{s}");
}

/// grid:N | voronoi:N[,ITERS[,SEED]] | channel[:SEEDS[,ITERS[,SEED]]] | file:PATH
fn parse_mesh_spec(spec: &str) -> Result<PolygonalMesh, VemError> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let nums = |s: &str| -> Result<Vec<u64>, VemError> {
        s.split(',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| VemError::InvalidArgument(format!("bad mesh parameter '{t}'")))
            })
            .collect()
    };
    match kind {
        "grid" => {
            let v = nums(rest)?;
            let n = *v.first().ok_or_else(|| {
                VemError::InvalidArgument("grid:N needs a resolution".into())
            })?;
            square_grid(n as usize)
        }
        "voronoi" => {
            let v = nums(rest)?;
            let n = *v.first().ok_or_else(|| {
                VemError::InvalidArgument("voronoi:N needs a cell count".into())
            })?;
            let iters = v.get(1).copied().unwrap_or(80) as usize;
            let seed = v.get(2).copied().unwrap_or(1);
            voronoi_lloyd(n as usize, iters, seed, UNIT_SQUARE)
        }
        "channel" => {
            let v = nums(rest)?;
            let mut cfg = ChannelConfig::default();
            if let Some(&n) = v.first() {
                cfg.n_seeds = n as usize;
            }
            if let Some(&it) = v.get(1) {
                cfg.lloyd_iters = it as usize;
            }
            if let Some(&s) = v.get(2) {
                cfg.rng_seed = s;
            }
            channel_mesh(&cfg)
        }
        "file" => read_mesh(rest),
        other => Err(VemError::InvalidArgument(format!(
            "unknown mesh kind '{other}' (expected grid | voronoi | channel | file)"
        ))),
    }
}

fn parse_deltas(s: &str) -> Result<CipDeltas, VemError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| VemError::InvalidArgument(format!("bad delta '{t}'")))
        })
        .collect::<Result<_, _>>()?;
    if parts.len() != 3 {
        return Err(VemError::InvalidArgument(
            "expected three comma-separated deltas".into(),
        ));
    }
    Ok(CipDeltas::new(parts[0], parts[1], parts[2]))
}

fn load_problem(name: &str) -> Result<Problem, VemError> {
    bench::builtin(name).ok_or_else(|| {
        VemError::InvalidArgument(format!(
            "unknown problem '{name}' (available: {})",
            bench::builtin_names().join(", ")
        ))
    })
}

fn run_mesh(cmd: MeshCmd) -> Result<(), VemError> {
    let st = Settings::load(&cmd.common, "mesh")?;
    let spec = st.string(&cmd.mesh, "mesh", "voronoi:256");
    let out = cmd
        .out
        .or_else(|| st.lookup("out").map(PathBuf::from))
        .ok_or_else(|| VemError::InvalidArgument("mesh: --out is required".into()))?;
    if cmd.common.show_config {
        show_config(
            "mesh",
            &[("mesh", spec.clone()), ("out", out.display().to_string())],
        );
    }
    let mesh = parse_mesh_spec(&spec)?;
    write_mesh(&out, &mesh)?;
    if let Some(vtk) = cmd.vtk {
        write_vtk(&vtk, &mesh, &Default::default())?;
    }
    println!(
        "wrote {} ({} cells, {} vertices)",
        out.display(),
        mesh.n_cells(),
        mesh.n_vertices()
    );
    Ok(())
}

fn run_info(cmd: InfoCmd) -> Result<(), VemError> {
    let st = Settings::load(&cmd.common, "info")?;
    let spec = st.string(&cmd.mesh, "mesh", "voronoi:256");
    let mesh = parse_mesh_spec(&spec)?;
    let q = mesh.quality_report();
    println!("mesh          {spec}");
    println!("vertices      {}", q.n_vertices);
    println!("edges         {}", q.n_edges);
    println!("cells         {}", q.n_cells);
    println!("max vertices  {}", q.max_cell_vertices);
    println!("h max         {:.6e}", q.h_max);
    println!("h min         {:.6e}", q.h_min);
    println!("edge ratio    {:.4}", q.min_edge_ratio);
    println!("total area    {:.12}", q.total_area);
    let labels: Vec<&str> = mesh.labels.iter().map(String::as_str).collect();
    println!("labels        {}", labels.join(", "));
    Ok(())
}

fn run_solve(cmd: SolveCmd) -> Result<(), VemError> {
    let st = Settings::load(&cmd.common, "solve")?;
    let problem_name = st.string(&cmd.problem, "problem", "boundary-layer");
    let mut problem = load_problem(&problem_name)?;
    let default_mesh = if problem_name == "channel" {
        "channel".to_string()
    } else {
        "grid:16".to_string()
    };
    let mesh_spec = st.string(&cmd.mesh, "mesh", &default_mesh);
    let k = st.parse(cmd.k, "k", 3)?;
    let delta_spec = cmd
        .delta
        .clone()
        .or_else(|| st.lookup("delta").map(str::to_string));
    if let Some(ds) = &delta_spec {
        problem.deltas = parse_deltas(ds)?;
    }
    if cmd.common.show_config {
        let d = problem.deltas;
        show_config(
            "solve",
            &[
                ("problem", problem_name.clone()),
                ("k", k.to_string()),
                ("mesh", mesh_spec.clone()),
                ("delta", format!("{},{},{}", d.d1, d.d2, d.d3)),
            ],
        );
    }

    let mesh = parse_mesh_spec(&mesh_spec)?;
    log::info!(
        "solving '{problem_name}' at k={k} on {} cells",
        mesh.n_cells()
    );
    let (disc, sol) = bench::run_case(&problem, mesh, k)?;
    println!("unknowns      {}", sol.n_unknowns);
    println!("residual      {:.3e}", sol.residual);
    println!("div ||.||     {:.3e}", sol.divergence_l2(&disc));
    if let Some(exact) = &problem.exact {
        let e = bench::compute_errors(&disc, &sol, exact)?;
        println!("e_H1          {:.6e}", e.e_h1);
        println!("e_L2          {:.6e}", e.e_l2);
        println!("e_p           {:.6e}", e.e_p);
    }
    if problem_name == "channel" {
        let r = bench::channel_report(&disc, &sol);
        println!("inflow        {:.9}", r.inflow);
        println!("outflow       {:.9}", r.outflow);
        println!("imbalance     {:.3e}", r.imbalance);
        println!("peak speed    {:.4}", r.peak_speed);
    }
    if let Some(out) = cmd.out {
        write_vtk(&out, &disc.mesh, &bench::solution_vtk(&disc, &sol))?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn run_convergence(cmd: ConvergenceCmd) -> Result<(), VemError> {
    let st = Settings::load(&cmd.common, "convergence")?;
    let problem_name = st.string(&cmd.problem, "problem", "trig");
    let problem = load_problem(&problem_name)?;
    if problem.exact.is_none() {
        return Err(VemError::InvalidArgument(format!(
            "problem '{problem_name}' has no exact solution"
        )));
    }
    let ks: Vec<usize> = st
        .string(&cmd.k, "k", "2,3")
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| VemError::InvalidArgument(format!("bad order '{t}'")))
        })
        .collect::<Result<_, _>>()?;
    let cells: Vec<usize> = st
        .string(&cmd.cells, "cells", "64,256,1024")
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| VemError::InvalidArgument(format!("bad cell count '{t}'")))
        })
        .collect::<Result<_, _>>()?;
    let seed = st.parse(cmd.seed, "seed", 1u64)?;
    if cmd.common.show_config {
        show_config(
            "convergence",
            &[
                ("problem", problem_name.clone()),
                (
                    "k",
                    ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
                ),
                (
                    "cells",
                    cells.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","),
                ),
                ("seed", seed.to_string()),
            ],
        );
    }

    let mut csv = String::new();
    for (i, &k) in ks.iter().enumerate() {
        log::info!("convergence sweep k={k}");
        let meshes = bench::voronoi_sequence(&cells, seed)?;
        let rows = bench::convergence_study(&problem, k, meshes)?;
        let table = bench::convergence_csv(k, &rows);
        if i == 0 {
            csv.push_str(&table);
        } else {
            // skip the repeated header
            csv.push_str(table.split_once('\n').map(|x| x.1).unwrap_or(""));
        }
    }
    match cmd.out {
        Some(path) => {
            std::fs::write(&path, &csv)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn run_ablate(cmd: AblateCmd) -> Result<(), VemError> {
    let st = Settings::load(&cmd.common, "ablate")?;
    let k = st.parse(cmd.k, "k", 3)?;
    let grid = st.parse(cmd.grid, "grid", 16usize)?;
    let spec = st.string(&cmd.deltas, "deltas", "0,0,0;0.1,0.01,0.01");
    let cases: Vec<CipDeltas> = spec
        .split(';')
        .map(parse_deltas)
        .collect::<Result<_, _>>()?;
    if cmd.common.show_config {
        show_config(
            "ablate",
            &[
                ("k", k.to_string()),
                ("grid", grid.to_string()),
                ("deltas", spec.clone()),
            ],
        );
    }
    let results = bench::layer_ablation(k, grid, &cases)?;
    let mut csv = String::from("d1,d2,d3,smooth_region_error,peak_u2\n");
    for (d, m) in &results {
        let _ = writeln!(
            csv,
            "{},{},{},{:.6e},{:.6e}",
            d.d1, d.d2, d.d3, m.smooth_region_error, m.peak_u2
        );
    }
    match cmd.out {
        Some(path) => {
            std::fs::write(&path, &csv)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
