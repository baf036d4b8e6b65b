//! `esd-adapt`: two-qubit channel adaptation from the command line.
//!
//! Subcommands: `asym` (loss-channel example with optional adapter), `scan`
//! (phase diagram over γ and p), `optimize` (filter search at one point),
//! `verify` (invariant and formula cross-checks), `pipeline` (raw JSON spec
//! execution). Exit codes: 0 ok, 1 verify failure, 2 bad parameters, 3 I/O
//! error, 4 no feasible/recovering filter.

mod verify;

use clap::{Parser, Subcommand, ValueEnum};
use esd_adapt_core::adaptation::{
    loss_mixture_concurrence, loss_mixture_state, loss_mixture_threshold, run_pipeline,
    LocalFilter, PipelineRun, PipelineSpec, StageOp,
};
use esd_adapt_core::channels::{ket0, ket1, replace_channel};
use esd_adapt_core::optimize::{
    genetic_optimize, grid_search_diag, GaConfig, Objective, OptimizationProblem,
    OptimizationResult, PipelineTemplate, SearchSpace,
};
use esd_adapt_core::scan::{scan_grid, write_csv, write_pgm, write_svg, ScanConfig, DEAD_BAND};
use esd_adapt_core::states::BellKind;
use esd_adapt_core::{fmt_sig12, Error as CoreError};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_VERIFY_FAIL: u8 = 1;
const EXIT_BAD_PARAMS: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "esd-adapt",
    version,
    about = "Two-qubit noisy-channel adaptation: Kraus pipelines, entanglement diagnostics, filter search, phase diagrams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Asymmetric loss-channel composite on |Ψ−>, with an optional adapter
    /// between the channels
    Asym {
        /// Transmission probability of the first channel (replaces with |0>)
        #[arg(long)]
        p1: f64,
        /// Transmission probability of the second channel (replaces with |1>)
        #[arg(long)]
        p2: f64,
        /// Adapter between the channels: "none", "swap", or a path to a
        /// filter JSON {"r": .., "u_angles": [..], "v_angles": [..]}
        #[arg(long, default_value = "none")]
        adapter: String,
    },
    /// Scan the (γ, p) plane, classify each cell and emit CSV/PGM/SVG
    Scan {
        /// JSON config file (same fields as the flags below)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Grid size as GAMMAxP, e.g. 50x50
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        gamma_min: Option<f64>,
        #[arg(long)]
        gamma_max: Option<f64>,
        #[arg(long)]
        p_min: Option<f64>,
        #[arg(long)]
        p_max: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Diagonal-filter grid resolution per cell
        #[arg(long)]
        r_steps: Option<usize>,
        #[arg(long, default_value = "scan.csv")]
        csv: PathBuf,
        #[arg(long, default_value = "scan.pgm")]
        pgm: PathBuf,
        #[arg(long, default_value = "scan.svg")]
        svg: PathBuf,
    },
    /// Search for the adaptation filter at one (γ, p) point
    Optimize {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        p: f64,
        /// Bell state entering the preparation (isotropic-noise) stage
        #[arg(long, value_enum)]
        input: InputKind,
        #[arg(long, value_enum, default_value_t = SpaceArg::Diagonal)]
        space: SpaceArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        r_steps: usize,
        /// Minimum acceptable success rate
        #[arg(long, default_value_t = 0.0)]
        s_min: f64,
        /// JSON config file overriding GA hyperparameters etc.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the result JSON here as well as to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant and closed-form verification suites
    Verify {
        /// Test hook: tighten all tolerances to force failures
        #[arg(long, hide = true)]
        corrupt_tolerances: bool,
    },
    /// Execute a pipeline spec from JSON and report its diagnostics
    Pipeline {
        /// Path to the PipelineSpec JSON
        #[arg(long)]
        spec: PathBuf,
        /// Write the run report JSON here as well as to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InputKind {
    PsiMinus,
    PhiMinus,
}

impl InputKind {
    fn bell(self) -> BellKind {
        match self {
            InputKind::PsiMinus => BellKind::PsiMinus,
            InputKind::PhiMinus => BellKind::PhiMinus,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            InputKind::PsiMinus => "psi_minus",
            InputKind::PhiMinus => "phi_minus",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Diagonal,
    Full,
}

enum CmdError {
    BadParams(String),
    Io(String),
    Infeasible(String),
    VerifyFailed,
}

impl CmdError {
    fn exit_code(&self) -> u8 {
        match self {
            CmdError::VerifyFailed => EXIT_VERIFY_FAIL,
            CmdError::BadParams(_) => EXIT_BAD_PARAMS,
            CmdError::Io(_) => EXIT_IO,
            CmdError::Infeasible(_) => EXIT_INFEASIBLE,
        }
    }
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NoFeasiblePoint => CmdError::Infeasible(e.to_string()),
            other => CmdError::BadParams(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CmdError {
    CmdError::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Asym { p1, p2, adapter } => cmd_asym(p1, p2, &adapter),
        Command::Scan {
            config,
            grid,
            gamma_min,
            gamma_max,
            p_min,
            p_max,
            seed,
            r_steps,
            csv,
            pgm,
            svg,
        } => cmd_scan(ScanArgs {
            config,
            grid,
            gamma_min,
            gamma_max,
            p_min,
            p_max,
            seed,
            r_steps,
            csv,
            pgm,
            svg,
        }),
        Command::Optimize {
            gamma,
            p,
            input,
            space,
            seed,
            r_steps,
            s_min,
            config,
            out,
        } => cmd_optimize(gamma, p, input, space, seed, r_steps, s_min, config, out),
        Command::Verify { corrupt_tolerances } => cmd_verify(corrupt_tolerances),
        Command::Pipeline { spec, out } => cmd_pipeline(&spec, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CmdError::BadParams(msg) => eprintln!("error: {msg}"),
                CmdError::Io(msg) => eprintln!("i/o error: {msg}"),
                CmdError::Infeasible(msg) => eprintln!("infeasible: {msg}"),
                CmdError::VerifyFailed => {}
            }
            ExitCode::from(e.exit_code())
        }
    }
}

/// ESD_ADAPT_THREADS caps the scan's parallelism; 0 or unset picks the number
/// of cores. Output ordering never depends on the thread count.
fn init_thread_pool() {
    if let Ok(value) = std::env::var("ESD_ADAPT_THREADS") {
        if let Ok(n) = value.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn print_state(rho: &esd_adapt_core::linalg::CMat4) {
    for i in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|j| {
                let z = rho[(i, j)];
                format!("{}{:+.11e}i", fmt_sig12(z.re), z.im)
            })
            .collect();
        println!("  [{}]", row.join(", "));
    }
}

fn report_run(run: &PipelineRun) {
    println!(
        "success rate      : {}",
        fmt_sig12(run.outcome.success_rate)
    );
    println!(
        "min PT eigenvalue : {}",
        fmt_sig12(run.report.min_pt_eigenvalue)
    );
    println!("concurrence       : {}", fmt_sig12(run.report.concurrence));
    println!(
        "verdict           : {}",
        if run.report.entangled {
            "entangled"
        } else {
            "separable"
        }
    );
}

fn cmd_asym(p1: f64, p2: f64, adapter: &str) -> Result<(), CmdError> {
    for (name, v) in [("p1", p1), ("p2", p2)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(CmdError::BadParams(format!("{name}={v} outside [0,1]")));
        }
    }
    let mut stages = vec![StageOp::Channel(replace_channel(p1, ket0())?)];
    let adapter_stage = match adapter {
        "none" => None,
        "swap" => Some(LocalFilter::swap()),
        path => {
            let text = fs::read_to_string(path).map_err(|e| io_err(Path::new(path), e))?;
            let filter: LocalFilter = serde_json::from_str(&text)
                .map_err(|e| CmdError::BadParams(format!("adapter spec: {e}")))?;
            Some(filter)
        }
    };
    if let Some(f) = adapter_stage {
        stages.push(StageOp::Filter(f));
    }
    stages.push(StageOp::Channel(replace_channel(p2, ket1())?));
    let spec = PipelineSpec::asymmetric(BellKind::PsiMinus, stages);
    let run = run_pipeline(&spec)?;

    println!(
        "asymmetric composite: p1 = {}, p2 = {}, adapter = {adapter}",
        fmt_sig12(p1),
        fmt_sig12(p2)
    );
    println!("output state:");
    print_state(run.outcome.state.rho());
    report_run(&run);

    match adapter {
        "none" => {
            let unadapted = loss_mixture_state(p1, p2)?;
            let drift = run.outcome.state.rho().max_abs_diff(unadapted.rho());
            println!("mixture-state drift        : {}", fmt_sig12(drift));
            let formula = loss_mixture_concurrence(p1, p2).max(0.0);
            println!("closed-form concurrence    : {}", fmt_sig12(formula));
            println!(
                "closed-form p2 threshold   : {} (entangled iff p2 above it)",
                fmt_sig12(loss_mixture_threshold(p1))
            );
        }
        "swap" => {
            let formula = p1 * p2;
            println!(
                "closed-form concurrence    : {} (= p1*p2)",
                fmt_sig12(formula)
            );
        }
        _ => {}
    }
    Ok(())
}

struct ScanArgs {
    config: Option<PathBuf>,
    grid: Option<String>,
    gamma_min: Option<f64>,
    gamma_max: Option<f64>,
    p_min: Option<f64>,
    p_max: Option<f64>,
    seed: Option<u64>,
    r_steps: Option<usize>,
    csv: PathBuf,
    pgm: PathBuf,
    svg: PathBuf,
}

fn parse_grid(text: &str) -> Result<(usize, usize), CmdError> {
    let (g, p) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| CmdError::BadParams(format!("grid '{text}' is not GAMMAxP")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| CmdError::BadParams(format!("grid '{text}' is not GAMMAxP")))
    };
    Ok((parse(g)?, parse(p)?))
}

fn cmd_scan(args: ScanArgs) -> Result<(), CmdError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            serde_json::from_str::<ScanConfig>(&text)
                .map_err(|e| CmdError::BadParams(format!("scan config: {e}")))?
        }
        None => ScanConfig::default(),
    };
    if let Some(grid) = &args.grid {
        let (g, p) = parse_grid(grid)?;
        config.gamma_steps = g;
        config.p_steps = p;
    }
    if let Some(v) = args.gamma_min {
        config.gamma_min = v;
    }
    if let Some(v) = args.gamma_max {
        config.gamma_max = v;
    }
    if let Some(v) = args.p_min {
        config.p_min = v;
    }
    if let Some(v) = args.p_max {
        config.p_max = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.r_steps {
        config.r_steps = v;
    }

    let output = scan_grid(&config)?;

    let mut csv = Vec::new();
    write_csv(&output.records, &mut csv).expect("in-memory write");
    fs::write(&args.csv, &csv).map_err(|e| io_err(&args.csv, e))?;
    let mut pgm = Vec::new();
    write_pgm(&output, &mut pgm).expect("in-memory write");
    fs::write(&args.pgm, &pgm).map_err(|e| io_err(&args.pgm, e))?;
    let mut svg = Vec::new();
    write_svg(&output, &mut svg).expect("in-memory write");
    fs::write(&args.svg, &svg).map_err(|e| io_err(&args.svg, e))?;

    println!(
        "scan {}x{} over gamma [{}, {}], p [{}, {}], seed {}",
        config.gamma_steps,
        config.p_steps,
        config.gamma_min,
        config.gamma_max,
        config.p_min,
        config.p_max,
        config.seed
    );
    for (class, count) in &output.summary.counts {
        println!("  {:<22} {count}", class.as_str());
    }
    println!(
        "wrote {}, {}, {}",
        args.csv.display(),
        args.pgm.display(),
        args.svg.display()
    );
    Ok(())
}

/// File-config for `optimize`; unknown keys are rejected.
#[derive(serde::Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct OptimizeFileConfig {
    objective: Option<Objective>,
    space: Option<SearchSpace>,
    seed: Option<u64>,
    s_min: Option<f64>,
    r_steps: Option<usize>,
    identical_filters: Option<bool>,
    ga: Option<GaConfig>,
}

#[derive(Serialize)]
struct OptimizeReport {
    gamma: f64,
    p: f64,
    input: &'static str,
    space: SearchSpace,
    best_r: f64,
    objective: Objective,
    objective_value: f64,
    success_rate: f64,
    evaluations: u64,
    result: OptimizationResult,
}

#[allow(clippy::too_many_arguments)]
fn cmd_optimize(
    gamma: f64,
    p: f64,
    input: InputKind,
    space: SpaceArg,
    seed: u64,
    r_steps: usize,
    s_min: f64,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), CmdError> {
    let template = PipelineTemplate::symmetric_adaptation(input.bell(), p, gamma)?;
    let mut problem = OptimizationProblem::new(template);
    problem.seed = seed;
    problem.s_min = s_min;
    problem.space = match space {
        SpaceArg::Diagonal => SearchSpace::DiagonalOnly,
        SpaceArg::Full => SearchSpace::FullFilter,
    };
    let mut r_steps = r_steps;
    if let Some(path) = &config {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let file: OptimizeFileConfig = serde_json::from_str(&text)
            .map_err(|e| CmdError::BadParams(format!("optimize config: {e}")))?;
        if let Some(v) = file.objective {
            problem.objective = v;
        }
        if let Some(v) = file.space {
            problem.space = v;
        }
        if let Some(v) = file.seed {
            problem.seed = v;
        }
        if let Some(v) = file.s_min {
            problem.s_min = v;
        }
        if let Some(v) = file.identical_filters {
            problem.identical_filters = v;
        }
        if let Some(v) = file.ga {
            problem.ga = v;
        }
        if let Some(v) = file.r_steps {
            r_steps = v;
        }
    }

    let result = match problem.space {
        SearchSpace::DiagonalOnly => grid_search_diag(&problem, r_steps)?,
        SearchSpace::FullFilter => genetic_optimize(&problem)?,
    };
    if result.objective_value <= DEAD_BAND {
        return Err(CmdError::Infeasible(format!(
            "no filter recovers entanglement at gamma={gamma}, p={p} (best objective {})",
            fmt_sig12(result.objective_value)
        )));
    }

    let report = OptimizeReport {
        gamma,
        p,
        input: input.as_str(),
        space: problem.space,
        best_r: result.filters[0].r(),
        objective: problem.objective,
        objective_value: result.objective_value,
        success_rate: result.success_rate,
        evaluations: result.evaluations,
        result,
    };
    let json = serde_json::to_string_pretty(&report).expect("serializable report");
    println!("{json}");
    if let Some(path) = out {
        let mut file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        file.write_all(json.as_bytes())
            .map_err(|e| io_err(&path, e))?;
        file.write_all(b"\n").map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

fn cmd_verify(corrupt: bool) -> Result<(), CmdError> {
    let tols = if corrupt {
        verify::Tolerances::corrupted()
    } else {
        verify::Tolerances::standard()
    };
    let report = verify::run_all(&tols);
    for suite in &report.suites {
        if suite.failures == 0 {
            println!("PASS {:<32} ({} checks)", suite.name, suite.checks);
        } else {
            println!(
                "FAIL {:<32} ({} checks, {} failures)",
                suite.name, suite.checks, suite.failures
            );
            for note in &suite.notes {
                println!("     {note}");
            }
        }
    }
    let passed = report.suites.iter().filter(|s| s.failures == 0).count();
    println!("result: {}/{} suites passed", passed, report.suites.len());
    if report.ok() {
        Ok(())
    } else {
        Err(CmdError::VerifyFailed)
    }
}

#[derive(Serialize)]
struct PipelineReport {
    success_rate: f64,
    min_pt_eigenvalue: f64,
    concurrence: f64,
    entangled: bool,
    state: Vec<Vec<[f64; 2]>>,
}

fn cmd_pipeline(spec_path: &Path, out: Option<PathBuf>) -> Result<(), CmdError> {
    let text = fs::read_to_string(spec_path).map_err(|e| io_err(spec_path, e))?;
    let spec: PipelineSpec = serde_json::from_str(&text)
        .map_err(|e| CmdError::BadParams(format!("pipeline spec: {e}")))?;
    let run = run_pipeline(&spec)?;
    println!("pipeline: {}", spec_path.display());
    println!("output state:");
    print_state(run.outcome.state.rho());
    report_run(&run);

    if let Some(path) = out {
        let rho = run.outcome.state.rho();
        let state = (0..4)
            .map(|i| (0..4).map(|j| [rho[(i, j)].re, rho[(i, j)].im]).collect())
            .collect();
        let report = PipelineReport {
            success_rate: run.outcome.success_rate,
            min_pt_eigenvalue: run.report.min_pt_eigenvalue,
            concurrence: run.report.concurrence,
            entangled: run.report.entangled,
            state,
        };
        let json = serde_json::to_string_pretty(&report).expect("serializable report");
        fs::write(&path, json + "\n").map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}
