//! Command-line surface.
//!
//! Exit codes: 0 success, 2 configuration or parse error, 3 a bound was
//! requested on a disconnected topology, 4 the simulation timed out before
//! agreement, 1 any other failure (I/O, numerical blow-up).

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bounds::{self, BoundsReport};
use crate::error::{Error, Result};
use crate::output::{self, ReproReport};
use crate::protocols::ProtocolKind;
use crate::repro;
use crate::scenario::parse_scenario;
use crate::sim::{self, Scenario, Status};
use crate::spectral::{algebraic_connectivity, eigenvalues_symmetric};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DISCONNECTED: i32 = 3;
pub const EXIT_TIMED_OUT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "ftconsensus",
    version,
    about = "Finite-time agreement protocol simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a scenario until agreement or t_max
    Simulate {
        file: PathBuf,
        /// Trajectory CSV destination
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON report destination
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print Lyapunov energies, connectivities and settling-time bounds
    Bounds { file: PathBuf },
    /// List Laplacian eigenvalues of every topology in a scenario
    Spectral { file: PathBuf },
    /// Run the built-in six-agent benchmark
    Repro {
        /// Directory for report.json and trajectory CSVs
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

/// Settling-time bounds for a scenario whose referenced topologies are all connected.
///
/// `V1`, `λ2(L_A)` and `λ2(L_B)` refer to the topology active at `t = 0`; `t3`
/// uses the minimum `λ2(L_B)` over every scheduled topology and equals `t2`
/// for a fixed topology.
pub fn bounds_command(sc: &Scenario) -> Result<BoundsReport> {
    let alpha = sc.protocol.alpha();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let referenced = sc.referenced_topologies();
    if referenced.iter().any(|(_, t)| !t.is_connected()) {
        return Err(Error::DisconnectedTopology);
    }
    let initial = sc.initial_topology()?;
    let x0: &[f64] = &sc.x0;
    let v1_0 = bounds::v1(initial, x0)?;
    let v2_0 = bounds::v2(x0);
    let lambda2_a = algebraic_connectivity(initial)?;
    let lambda2_b = algebraic_connectivity(&initial.exponent_transform(alpha)?)?;
    let mut lambda_min = f64::INFINITY;
    for (_, t) in &referenced {
        lambda_min = lambda_min.min(algebraic_connectivity(&t.exponent_transform(alpha)?)?);
    }
    let hi = x0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = x0.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(BoundsReport {
        alpha,
        v1_0,
        v2_0,
        lambda2_a,
        lambda2_b,
        t1: bounds::t1_bound(v1_0, lambda2_a, alpha)?,
        t2: bounds::t2_bound(v2_0, lambda2_b, alpha)?,
        t3: Some(bounds::t3_bound(v2_0, lambda_min, alpha)?),
        lambda_min: Some(lambda_min),
        t1_limit_alpha0: bounds::t1_limit_alpha0(v1_0, lambda2_a)?,
        alpha0_reference_time: (hi - lo) / 2.0,
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DisconnectedTopology => EXIT_DISCONNECTED,
        Error::Io(_)
        | Error::Json(_)
        | Error::NumericalBlowup { .. }
        | Error::NoConvergence { .. } => EXIT_FAILURE,
        _ => EXIT_CONFIG,
    }
}

fn load(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text)
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn simulate(
    file: &Path,
    csv: Option<&Path>,
    report: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32> {
    let sc = load(file)?;
    let traj = sim::integrate(&sc)?;
    if let Some(path) = csv {
        write_file(path, |w| output::write_trajectory_csv(&traj, w).map(|_| ()))?;
    }

    let x0: &[f64] = &sc.x0;
    let mut rows = vec![
        ReproReport::observed("V2(0)", bounds::v2(x0), "initial disagreement energy"),
        ReproReport::observed("mean(x0)", bounds::mean(x0), "initial average"),
    ];
    match traj.converged_at {
        Some(t) => {
            rows.push(ReproReport::observed(
                "convergence time",
                t,
                "first time spread <= agree_tol",
            ));
            if let Some(v) = traj.final_value {
                rows.push(ReproReport::observed(
                    "final value",
                    v,
                    "common agreement value",
                ));
            }
        }
        None => rows.push(ReproReport::observed(
            "t_max",
            sc.t_max,
            "timed out before agreement",
        )),
    }
    // Bounds are informative only; a disconnected or linear scenario still simulates.
    if let Ok(b) = bounds_command(&sc) {
        let (name, value) = match (sc.protocol.kind(), &sc.source) {
            (ProtocolKind::P1, _) => ("t1 bound", b.t1),
            (_, sim::TopologySource::Switching(_)) => ("t3 bound", b.t3.unwrap_or(b.t2)),
            _ => ("t2 bound", b.t2),
        };
        rows.push(ReproReport::observed(
            name,
            value,
            "closed-form settling-time upper bound",
        ));
    }
    if let Ok(drift) = sim::conservation_drift(&traj) {
        rows.push(ReproReport::observed(
            "sum drift",
            drift,
            "max |sum x(t) - sum x(0)|",
        ));
    }
    if let Some(path) = report {
        write_file(path, |w| output::write_report_json(&rows, w))?;
    }

    match traj.converged_at {
        Some(t) => writeln!(
            out,
            "status=converged converged_at={} final_value={}",
            output::format_sig9(t),
            output::format_sig9(traj.final_value.unwrap_or(f64::NAN))
        )?,
        None => writeln!(
            out,
            "status=timed_out t_max={} spread={}",
            output::format_sig9(sc.t_max),
            output::format_sig9(traj.samples.last().map_or(f64::NAN, |s| s.spread))
        )?,
    }
    Ok(if traj.status == Status::Converged {
        EXIT_OK
    } else {
        EXIT_TIMED_OUT
    })
}

fn print_bounds(file: &Path, out: &mut dyn Write) -> Result<i32> {
    let sc = load(file)?;
    let b = bounds_command(&sc)?;
    let mut line = |k: &str, v: f64| writeln!(out, "{k}={v:.6}");
    line("alpha", b.alpha)?;
    line("V1(0)", b.v1_0)?;
    line("V2(0)", b.v2_0)?;
    line("lambda2_A", b.lambda2_a)?;
    line("lambda2_B", b.lambda2_b)?;
    line("t1", b.t1)?;
    line("t1_limit_alpha0", b.t1_limit_alpha0)?;
    line("t2", b.t2)?;
    if let Some(l) = b.lambda_min {
        line("lambda_min", l)?;
    }
    if let Some(t3) = b.t3 {
        line("t3", t3)?;
    }
    line("alpha0_reference_time", b.alpha0_reference_time)?;
    Ok(EXIT_OK)
}

fn print_spectral(file: &Path, out: &mut dyn Write) -> Result<i32> {
    let sc = load(file)?;
    let alpha = sc.protocol.alpha();
    for (name, t) in &sc.topologies {
        let spectrum = eigenvalues_symmetric(t.laplacian().matrix())?;
        let values: Vec<String> = spectrum
            .eigenvalues
            .iter()
            .map(|v| format!("{v:.9}"))
            .collect();
        write!(
            out,
            "{name}: connected={} lambda2={:.9}",
            t.is_connected(),
            algebraic_connectivity(t)?
        )?;
        if alpha > 0.0 && alpha < 1.0 {
            write!(
                out,
                " lambda2_B={:.9}",
                algebraic_connectivity(&t.exponent_transform(alpha)?)?
            )?;
        }
        writeln!(
            out,
            " eigenvalues=[{}] residual={:.3e}",
            values.join(", "),
            spectrum.residual
        )?;
    }
    Ok(EXIT_OK)
}

fn run_repro(out_dir: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let outcome = repro::run_repro()?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        write_file(&dir.join("report.json"), |w| {
            output::write_report_json(&outcome.reports, w)
        })?;
        for (name, traj) in &outcome.trajectories {
            write_file(&dir.join(format!("{name}.csv")), |w| {
                output::write_trajectory_csv(traj, w).map(|_| ())
            })?;
        }
    }
    output::write_report_json(&outcome.reports, &mut *out)?;
    Ok(EXIT_OK)
}

/// Runs one command with explicit output streams and returns the exit code.
pub fn run_cli_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Simulate {
            file,
            out: csv,
            report,
        } => simulate(file, csv.as_deref(), report.as_deref(), out),
        Command::Bounds { file } => print_bounds(file, out),
        Command::Spectral { file } => print_spectral(file, out),
        Command::Repro { out_dir } => run_repro(out_dir.as_deref(), out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run_cli<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}
