//! Command line frontend for the two-layer shallow water solver.
//!
//! Three subcommands: `run` integrates one scenario and writes its frames,
//! `converge` sweeps grid resolutions against a fine self-generated
//! reference, `well-balanced-suite` measures rest-state preservation over
//! the four lake-at-rest cases. Exit codes: 0 success, 2 configuration
//! error, 3 solver failure.

mod outputs;
mod report;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use twolayer::error::ParamError;
use twolayer::params::EigenMethod;
use twolayer::scenarios::{
    build_scenario, convergence_order, error_norms, parse_kv, Bathymetry, Perturbation,
    ScenarioError, ScenarioSpec,
};

#[derive(Parser)]
#[command(name = "twolayer", version, about = "1D two-layer shallow water solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its solution frames.
    Run(RunArgs),
    /// Refinement sweep against a fine self-generated reference.
    Converge(ConvergeArgs),
    /// Rest-state preservation errors for the four lake-at-rest cases.
    WellBalancedSuite(SuiteArgs),
}

/// Flags shared by scenario-selecting commands. A scenario comes from
/// `--scenario` or from the `name` key of a `--config` file; the file's
/// other keys override scenario defaults, and flags override the file.
#[derive(Args)]
struct SpecArgs {
    /// Scenario: wave3, wave4, wb-smooth-wet, wb-smooth-dry, wb-jump-wet,
    /// wb-jump-dry, baroclinic-wetting, or ocean-shelf.
    #[arg(long)]
    scenario: Option<String>,
    /// Flat key-value config file; flags override its entries.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Grid cells.
    #[arg(long, value_name = "N")]
    n: Option<usize>,
    /// Final time (s).
    #[arg(long, value_name = "T")]
    t_final: Option<f64>,
    /// Eigensolver: velocity-difference, linearized-static,
    /// linearized-dynamic, or direct.
    #[arg(long)]
    eigen: Option<String>,
    /// Slope limiter: none, minmod, or mc.
    #[arg(long)]
    limiter: Option<String>,
    /// Extra override as `key=value`, repeatable; keys as in config files.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Output snapshots, evenly spaced over [0, t_final], final included.
    #[arg(long)]
    frames: Option<usize>,
    /// Output root (default: $TWOLAYER_OUT, then ./out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Comma-separated run resolutions (at least three for the fit).
    #[arg(long, default_value = "64,128,256,512,1024")]
    resolutions: String,
    /// Reference grid cells; must exceed every run resolution.
    #[arg(long, default_value_t = 5000)]
    reference_n: usize,
    /// Eigensolver for the reference run.
    #[arg(long, default_value = "direct")]
    reference_eigen: String,
    /// Replace the bathymetry with a flat bed at its left-edge level.
    #[arg(long)]
    flat: bool,
    /// Output root (default: $TWOLAYER_OUT, then ./out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Grid cells per case.
    #[arg(long, value_name = "N")]
    n: Option<usize>,
    /// Final time (s).
    #[arg(long, value_name = "T")]
    t_final: Option<f64>,
    /// Eigensolver for every case.
    #[arg(long)]
    eigen: Option<String>,
    /// Extra override as `key=value`, repeatable; applied to every case.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output root (default: $TWOLAYER_OUT, then ./out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

enum CliError {
    Config(String),
    Solver(String),
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Config(format!("io: {e}"))
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Param(p) => CliError::Config(p.to_string()),
            ScenarioError::Step(s) => CliError::Solver(format!(
                "{s}\n  left cell:  {:?}\n  right cell: {:?}",
                s.left, s.right
            )),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Converge(a) => cmd_converge(a),
        Command::WellBalancedSuite(a) => cmd_suite(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("solver failure: {msg}");
            ExitCode::from(3)
        }
    }
}

/// Build the scenario from name/config file, then apply flag overrides.
/// `frames` is passed by commands that fix their own snapshot count.
fn resolve_spec(args: &SpecArgs, frames: Option<usize>) -> Result<ScenarioSpec, CliError> {
    let file_map = match &args.config {
        Some(path) => Some(parse_kv(&fs::read_to_string(path)?)?),
        None => None,
    };
    let name = args
        .scenario
        .clone()
        .or_else(|| file_map.as_ref().and_then(|m| m.get("name").cloned()))
        .ok_or_else(|| {
            CliError::Config("pass --scenario or a --config file with a name key".into())
        })?;
    let mut spec = build_scenario(&name)?;
    if let Some(mut map) = file_map {
        map.remove("name");
        spec.apply_overrides(&map)?;
    }
    let mut flags: BTreeMap<String, String> = parse_kv(&args.set.join("\n"))?;
    if let Some(n) = args.n {
        flags.insert("n_cells".into(), n.to_string());
    }
    if let Some(t) = args.t_final {
        flags.insert("t_final".into(), t.to_string());
    }
    if let Some(e) = &args.eigen {
        flags.insert("eigen".into(), e.clone());
    }
    if let Some(l) = &args.limiter {
        flags.insert("limiter".into(), l.clone());
    }
    if let Some(f) = frames {
        flags.insert("frames".into(), f.to_string());
    }
    spec.apply_overrides(&flags)?;
    Ok(spec)
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let spec = resolve_spec(&args.spec, args.frames)?;
    if spec.frames < 1 {
        return Err(CliError::Config("frames must be >= 1".into()));
    }
    let dir = outputs::resolve_out_root(args.out).join(&spec.name);
    let t0 = Instant::now();
    let (frames, driver) = spec.run_frames()?;
    let wall = t0.elapsed();
    outputs::write_frames(&dir, &frames)?;
    outputs::write_manifest(&dir, &spec, &driver.stats, wall, frames.len())?;
    println!(
        "scenario {}: {} cells, t_final = {} s, eigen = {}",
        spec.name,
        spec.n_cells,
        spec.t_final,
        spec.eigen_method.name()
    );
    println!(
        "steps = {} ({} rejected), max CFL = {:.3}, clipped mass = {:e}",
        driver.stats.steps, driver.stats.rejected, driver.stats.max_cfl, driver.stats.clipped_mass
    );

    // An unperturbed scenario has a known exact solution, the initial rest
    // state; report how well the final frame preserves it.
    if matches!(spec.perturbation, Perturbation::None) && frames.len() >= 2 {
        let rep = error_norms(frames.last().unwrap(), &frames[0])?;
        let cases = vec![(spec.name.clone(), rep)];
        fs::write(dir.join("errors.csv"), report::suite_errors_csv(&cases))?;
        let table = report::suite_table(&cases);
        fs::write(dir.join("table.txt"), &table)?;
        print!("{table}");
    }
    println!("artifacts: {}", dir.display());
    Ok(())
}

fn cmd_converge(args: ConvergeArgs) -> Result<(), CliError> {
    let mut base = resolve_spec(&args.spec, Some(1))?;
    if args.flat {
        base.bathymetry = Bathymetry::Flat { b: base.bathymetry.eval(base.x_lo) };
    }
    let ns = parse_resolutions(&args.resolutions)?;
    if ns.iter().any(|&n| n >= args.reference_n) {
        return Err(CliError::Config(format!(
            "every resolution must be below the reference grid ({} cells)",
            args.reference_n
        )));
    }
    let mut refspec = base.clone();
    refspec.n_cells = args.reference_n;
    refspec.eigen_method = EigenMethod::parse(&args.reference_eigen)?;

    let dir_name = if args.flat {
        format!("{}-flat-converge", base.name)
    } else {
        format!("{}-converge", base.name)
    };
    let dir = outputs::resolve_out_root(args.out).join(dir_name);

    // Fan the coarse runs out across threads while the reference runs on
    // this one; each run writes to its own subdirectory afterwards.
    let (ref_result, coarse_results) = std::thread::scope(|scope| {
        let handles: Vec<_> = ns
            .iter()
            .map(|&n| {
                let spec = ScenarioSpec { n_cells: n, ..base.clone() };
                scope.spawn(move || {
                    let t0 = Instant::now();
                    spec.run_frames().map(|(f, d)| (spec, f, d, t0.elapsed()))
                })
            })
            .collect();
        let t0 = Instant::now();
        let ref_result = refspec.run_frames().map(|(f, d)| (f, d, t0.elapsed()));
        let coarse: Vec<_> = handles
            .into_iter()
            .map(|h| h.join().expect("run thread panicked"))
            .collect();
        (ref_result, coarse)
    });

    let (ref_frames, ref_driver, ref_wall) = ref_result?;
    let reference = ref_frames.last().unwrap();
    let refdir = dir.join("reference");
    outputs::write_frames(&refdir, &ref_frames)?;
    outputs::write_manifest(&refdir, &refspec, &ref_driver.stats, ref_wall, ref_frames.len())?;

    let mut reports = Vec::new();
    for result in coarse_results {
        let (spec, frames, driver, wall) = result?;
        let sub = dir.join(format!("n{}", spec.n_cells));
        outputs::write_frames(&sub, &frames)?;
        outputs::write_manifest(&sub, &spec, &driver.stats, wall, frames.len())?;
        reports.push(error_norms(frames.last().unwrap(), reference)?);
    }

    // Per-field orders from the L1 norms; fields with too few usable
    // points (identically zero error, e.g. the bed) get no fit.
    let mut orders = Vec::new();
    for (i, f) in reports[0].fields.iter().enumerate() {
        let points: Vec<(usize, f64)> =
            reports.iter().map(|r| (r.n, r.fields[i].l1)).collect();
        if let Ok(fit) = convergence_order(&points) {
            orders.push((f.name, fit));
        }
    }

    fs::write(dir.join("errors.csv"), report::sweep_errors_csv(&reports))?;
    fs::write(dir.join("orders.csv"), report::orders_csv(&orders))?;
    let title = format!(
        "L1 errors for {} vs a {}-cell {} reference at t = {} s",
        base.name,
        args.reference_n,
        refspec.eigen_method.name(),
        base.t_final
    );
    let table = report::sweep_table(&title, &reports, &orders);
    fs::write(dir.join("table.txt"), &table)?;
    print!("{table}");
    println!("artifacts: {}", dir.display());
    Ok(())
}

const SUITE_CASES: [&str; 4] = ["wb-smooth-wet", "wb-smooth-dry", "wb-jump-wet", "wb-jump-dry"];

fn cmd_suite(args: SuiteArgs) -> Result<(), CliError> {
    let root = outputs::resolve_out_root(args.out).join("well-balanced");
    let mut overrides: BTreeMap<String, String> = parse_kv(&args.set.join("\n"))?;
    if let Some(n) = args.n {
        overrides.insert("n_cells".into(), n.to_string());
    }
    if let Some(t) = args.t_final {
        overrides.insert("t_final".into(), t.to_string());
    }
    if let Some(e) = &args.eigen {
        overrides.insert("eigen".into(), e.clone());
    }

    let mut cases = Vec::new();
    for name in SUITE_CASES {
        let mut spec = build_scenario(name)?;
        spec.apply_overrides(&overrides)?;
        // The initial frame doubles as the exact solution.
        spec.frames = spec.frames.max(2);
        let dir = root.join(name);
        let t0 = Instant::now();
        let (frames, driver) = spec.run_frames()?;
        outputs::write_frames(&dir, &frames)?;
        outputs::write_manifest(&dir, &spec, &driver.stats, t0.elapsed(), frames.len())?;
        cases.push((name.to_string(), error_norms(frames.last().unwrap(), &frames[0])?));
    }

    fs::write(root.join("errors.csv"), report::suite_errors_csv(&cases))?;
    let table = report::suite_table(&cases);
    fs::write(root.join("table.txt"), &table)?;
    print!("{table}");
    println!("artifacts: {}", root.display());
    Ok(())
}

fn parse_resolutions(s: &str) -> Result<Vec<usize>, CliError> {
    let ns: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse::<usize>()).collect();
    let ns = ns.map_err(|e| CliError::Config(format!("bad --resolutions '{s}': {e}")))?;
    if ns.len() < 3 {
        return Err(CliError::Config(
            "need at least three resolutions for an order fit".into(),
        ));
    }
    Ok(ns)
}
