use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Context;
use clap::{Parser, Subcommand};
use nalgebra::{Complex, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use rispr_core::geometry::ris_correlation_kernel;
use rispr_core::phase_opt::{build_quadratic, optimize_phases};
use rispr_core::placement::{build_angle_grid, spacing_warning, validate_placement};
use rispr_core::sim::output::{write_csv, write_jsonl};
use rispr_core::sim::{emit_results, run_experiment, Format, Preset, SystemConfig};
use rispr_core::{CMat, Error, RMat};

#[derive(Parser)]
#[command(name = "rispr", version, about = "RIS-aided pilot reuse simulator for massive MIMO")]
struct Cli {
    /// Base RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials per point.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML file with `SystemConfig` keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extra `key=value` config override, repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment preset (fig3, fig4, fig6, fig7, fig8, fig9, fig10).
    Run {
        preset: String,
        /// csv or jsonl; defaults to the output extension.
        #[arg(long)]
        format: Option<String>,
    },
    /// Print the optimized angular grid as CSV.
    Grid,
    /// Solve the phase problem for a saved BS-RIS channel.
    OptimizePhases {
        /// JSON with `h_re`, `h_im` (M x N rows) and optional `kernel` (N x N).
        input: PathBuf,
    },
    /// Check RIS angles (radians, one per line or comma separated).
    ValidatePlacement { file: PathBuf },
}

#[derive(Deserialize)]
struct PhaseInput {
    h_re: Vec<Vec<f64>>,
    h_im: Vec<Vec<f64>>,
    kernel: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct PhaseOutput {
    objective: f64,
    iterations: usize,
    converged: bool,
    gradient_norm: f64,
    phases_rad: Vec<f64>,
}

fn bad_input(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn rows_to_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, Error> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(bad_input(format!("{what} must be a non-empty rectangular array")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn resolve(cli: &Cli, base: SystemConfig) -> Result<SystemConfig, Error> {
    let mut c = match &cli.config {
        Some(path) => base.overlay_file(path)?,
        None => base,
    };
    for s in &cli.sets {
        c = c.set(s)?;
    }
    if let Some(seed) = cli.seed {
        c.seed = seed;
    }
    if let Some(trials) = cli.trials {
        c.trials = trials;
    }
    if let Some(threads) = cli.threads {
        c.threads = threads;
    }
    c.validate()?;
    Ok(c)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p).map_err(io(p))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn out_path(out: &Option<PathBuf>) -> PathBuf {
    out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"))
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Run { preset, format } => {
            let preset = Preset::from_str(preset)?;
            let config = resolve(cli, preset.base_config())?;
            let format = match (format, &cli.out) {
                (Some(f), _) => Format::from_str(f)?,
                (None, Some(p)) => Format::for_path(p),
                (None, None) => Format::Csv,
            };
            let result = run_experiment(&config, preset)?;
            match &cli.out {
                Some(p) => emit_results(&result, format, p)?,
                None => {
                    let stdout = std::io::stdout();
                    let lock = stdout.lock();
                    match format {
                        Format::Csv => write_csv(&result, lock),
                        Format::JsonLines => write_jsonl(&result, lock),
                    }
                    .map_err(io(&out_path(&cli.out)))?;
                }
            }
            eprintln!("{}: {} rows, config hash {}", preset.name(), result.rows.len(), result.meta.config_hash);
        }
        Command::Grid => {
            let c = resolve(cli, SystemConfig::default())?;
            if let Some(w) = spacing_warning(c.bs_spacing, 1.0) {
                eprintln!("warning: {w}");
            }
            let grid = build_angle_grid(c.antennas, c.bs_spacing, 1.0)?;
            let mut w = sink(&cli.out)?;
            let path = out_path(&cli.out);
            let write = |w: &mut dyn Write| -> std::io::Result<()> {
                writeln!(w, "angle_rad,sin_value")?;
                for p in &grid.points {
                    writeln!(w, "{},{}", p.angle, grid.sin_value(p))?;
                }
                w.flush()
            };
            write(&mut w).map_err(io(&path))?;
            eprintln!("{} angles, worst gap {:.4} rad", grid.len(), grid.worst_gap());
        }
        Command::OptimizePhases { input } => {
            let c = resolve(cli, SystemConfig::default())?;
            let text = std::fs::read_to_string(input).map_err(io(input))?;
            let parsed: PhaseInput = serde_json::from_str(&text)
                .map_err(|e| bad_input(format!("{}: {e}", input.display())))?;
            let re = rows_to_matrix(&parsed.h_re, "h_re")?;
            let im = rows_to_matrix(&parsed.h_im, "h_im")?;
            if re.shape() != im.shape() {
                return Err(bad_input("h_re and h_im differ in shape").into());
            }
            let h: CMat<f64> = re.zip_map(&im, Complex::new);
            let kernel: RMat<f64> = match &parsed.kernel {
                Some(k) => rows_to_matrix(k, "kernel")?,
                None => {
                    let g = c.geometry()?;
                    if g.ris_elements() != h.ncols() {
                        return Err(bad_input(format!(
                            "h has {} columns but the configured surface has {} elements",
                            h.ncols(),
                            g.ris_elements()
                        ))
                        .into());
                    }
                    ris_correlation_kernel(&g)
                }
            };
            let form = build_quadratic(&h, &kernel)?;
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let rep = optimize_phases(&form, &c.ascent_options(), c.restarts, &mut rng)?;
            let out = PhaseOutput {
                objective: rep.objective(),
                iterations: rep.iterations,
                converged: rep.converged,
                gradient_norm: rep.gradient_norm_final,
                phases_rad: rep.phases.iter().map(|z| z.arg()).collect(),
            };
            let mut w = sink(&cli.out)?;
            let path = out_path(&cli.out);
            serde_json::to_writer_pretty(&mut w, &out).context("serializing phases")?;
            writeln!(w).and_then(|_| w.flush()).map_err(io(&path))?;
        }
        Command::ValidatePlacement { file } => {
            let c = resolve(cli, SystemConfig::default())?;
            let text = std::fs::read_to_string(file).map_err(io(file))?;
            let angles = parse_angles(&text)?;
            if let Some(w) = spacing_warning(c.bs_spacing, 1.0) {
                eprintln!("warning: {w}");
            }
            let grid = build_angle_grid(c.antennas, c.bs_spacing, 1.0)?;
            let violations = validate_placement(&angles, c.bs_spacing, 1.0);
            let mut w = sink(&cli.out)?;
            let path = out_path(&cli.out);
            let report = |w: &mut dyn Write| -> std::io::Result<()> {
                for (i, &a) in angles.iter().enumerate() {
                    let on = if grid.contains(a) { "on grid" } else { "off grid" };
                    writeln!(w, "position {i}: {a} rad, {on}")?;
                }
                for v in &violations {
                    writeln!(w, "violation: {v}")?;
                }
                writeln!(w, "{} violation(s)", violations.len())?;
                w.flush()
            };
            report(&mut w).map_err(io(&path))?;
            if !violations.is_empty() {
                return Err(Error::InfeasibleSchedule(format!(
                    "{} placement violation(s)",
                    violations.len()
                ))
                .into());
            }
        }
    }
    Ok(())
}

fn parse_angles(text: &str) -> Result<Vec<f64>, Error> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split([',', ' ', '\t']))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad_input(format!("not an angle: {s:?}")))
        })
        .collect()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::InvalidArgument(_)) => 2,
        Some(Error::InfeasibleSchedule(_) | Error::PlacementExhausted(_)) => 3,
        Some(Error::Io { .. }) => 4,
        _ => 1,
    }
}

fn broken_pipe(err: &anyhow::Error) -> bool {
    matches!(
        err.downcast_ref::<Error>(),
        Some(Error::Io { source, .. }) if source.kind() == std::io::ErrorKind::BrokenPipe
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
