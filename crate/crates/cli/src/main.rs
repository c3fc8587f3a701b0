//! Command-line front end: forward data generation, transfer-matrix
//! inversion, potential recovery, and the large-parameter validation suite.
//!
//! Exit codes: 1 parse error, 2 domain violation, 3 numerical failure,
//! 4 validation-suite failure.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use scatterline::asymptotics::appendix_suite;
use scatterline::forward::{bound_states, reflection_grid};
use scatterline::inverse::{ab_traces_from_data, invert_scattering, MCase};
use scatterline::weyl::{recover_potential, RecoverOptions};
use scatterline::{
    Error, Interpolation, OdeOptions, PotentialGrid, ScatteringData, TransferMatrix,
};
use serde::Serialize;

use config::*;

#[derive(Parser)]
#[command(name = "scatterline", version, about = "Scattering on the line with a transfer condition at the origin")]
struct Cli {
    /// Optional JSON config file; command-line flags win over its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for the frequency/spectral loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed recorded in the run configuration (reserved for stochastic
    /// restarts; the default solvers are deterministic).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward problem: reflection coefficient and bound states.
    Forward(ForwardArgs),
    /// Reconstruct the transfer matrix and the A/B traces from data.
    Invert(InvertArgs),
    /// Recover a piecewise-constant potential from scattering data.
    Recover(RecoverArgs),
    /// Run the numerical validation suite for the asymptotic estimates.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ForwardArgs {
    /// Potential CSV (header `x,q`); omit for the zero potential.
    #[arg(long)]
    potential: Option<PathBuf>,
    /// Transfer matrix JSON.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Half-width of the essential support.
    #[arg(long)]
    support: Option<f64>,
    /// `constant` or `linear` interpolation between potential nodes.
    #[arg(long)]
    interpolation: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    xi_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    xi_max: Option<f64>,
    /// Frequencies per half-axis (the grid is mirrored about 0).
    #[arg(long)]
    n_xi: Option<usize>,
    /// Upper end of the bound-state scan.
    #[arg(long)]
    eta_max: Option<f64>,
    /// Integrator tolerance (absolute and relative).
    #[arg(long)]
    tol: Option<f64>,
    /// Augment the grid with log-spaced frequencies from this floor up to
    /// xi_min (recommended ~1e-4 when the data feed an inversion: the
    /// dispersion integrand is log-singular at the origin).
    #[arg(long)]
    log_floor: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a tidy CSV with per-frequency quantities.
    #[arg(long)]
    emit_plot_data: Option<PathBuf>,
}

#[derive(Args)]
struct InvertArgs {
    /// Scattering data JSON.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Smallest |xi| at which boundary A/B values are evaluated.
    #[arg(long)]
    xi_floor: Option<f64>,
    /// Reconstruct the matrix record only (no A/B traces).
    #[arg(long)]
    skip_traces: bool,
    #[arg(long)]
    emit_plot_data: Option<PathBuf>,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    support: Option<f64>,
    #[arg(long)]
    cells: Option<usize>,
    /// Second-difference regularization weight.
    #[arg(long)]
    reg: Option<f64>,
    /// Number of spectral samples drawn from the data grid.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    xi_fit_min: Option<f64>,
    #[arg(long)]
    xi_fit_max: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Misfit history CSV (`iter,misfit,gradnorm`).
    #[arg(long)]
    misfit_out: Option<PathBuf>,
    /// Comma-separated list of regularization weights; runs the recovery for
    /// each and writes an L-curve summary next to the output.
    #[arg(long)]
    reg_sweep: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Which suite to run; `appendix` is the only one.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    potential: Option<PathBuf>,
    #[arg(long)]
    support: Option<f64>,
    #[arg(long)]
    interpolation: Option<String>,
    /// Largest contour index checked (default 20).
    #[arg(long)]
    k_max: Option<u32>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Parse(_) => 1,
        Error::BadTransferMatrix { .. }
        | Error::BadPotential(_)
        | Error::BadScatteringData(_)
        | Error::Contract(_)
        | Error::Domain(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file_cfg = match load_config_file(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let threads = cli.threads.or(file_cfg.threads);
    let seed = cli.seed.or(file_cfg.seed).unwrap_or(0);

    let body = || -> Result<u8, Error> {
        match &cli.command {
            Command::Forward(args) => run_forward(args, &file_cfg.forward, seed).map(|_| 0),
            Command::Invert(args) => run_invert(args, &file_cfg.invert, seed).map(|_| 0),
            Command::Recover(args) => run_recover(args, &file_cfg.recover, seed).map(|_| 0),
            Command::Validate(args) => run_validate(args, &file_cfg.validate, seed),
        }
    };
    let outcome = match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build();
            match pool {
                Ok(pool) => pool.install(body),
                Err(e) => {
                    eprintln!("error: could not build thread pool: {e}");
                    return ExitCode::from(3);
                }
            }
        }
        None => body(),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn load_config_file(path: Option<&Path>) -> Result<ConfigFile, Error> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn parse_interpolation(tag: &str) -> Result<Interpolation, Error> {
    match tag {
        "constant" => Ok(Interpolation::PiecewiseConstant),
        "linear" => Ok(Interpolation::PiecewiseLinear),
        other => Err(Error::Parse(format!(
            "unknown interpolation '{other}' (expected 'constant' or 'linear')"
        ))),
    }
}

fn require_positive(name: &str, v: f64) -> Result<f64, Error> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

fn load_potential(path: &str, support: f64, interp: Interpolation) -> Result<PotentialGrid, Error> {
    if path.is_empty() {
        Ok(PotentialGrid::zero(support))
    } else {
        PotentialGrid::from_csv_path(Path::new(path), support, interp)
    }
}

fn path_string(p: &Option<PathBuf>, section: &Option<String>, default: &str) -> String {
    p.as_ref()
        .map(|v| v.to_string_lossy().into_owned())
        .or_else(|| section.clone())
        .unwrap_or_else(|| default.to_string())
}

// forward ------------------------------------------------------------------

fn run_forward(args: &ForwardArgs, sec: &ForwardSection, seed: u64) -> Result<(), Error> {
    let cfg = ForwardConfig {
        command: "forward",
        potential: path_string(&args.potential, &sec.potential, ""),
        matrix: path_string(&args.matrix, &sec.matrix, ""),
        support: args.support.or(sec.support).unwrap_or(1.0),
        interpolation: args
            .interpolation
            .clone()
            .or_else(|| sec.interpolation.clone())
            .unwrap_or_else(|| "constant".to_string()),
        xi_min: args.xi_min.or(sec.xi_min).unwrap_or(0.25),
        xi_max: args.xi_max.or(sec.xi_max).unwrap_or(60.0),
        n_xi: args.n_xi.or(sec.n_xi).unwrap_or(240),
        eta_max: args.eta_max.or(sec.eta_max).unwrap_or(10.0),
        tol: args.tol.or(sec.tol).unwrap_or(1e-10),
        log_floor: args.log_floor.or(sec.log_floor),
        out: path_string(&args.out, &sec.out, "sd.json"),
        seed,
    };
    let hash = config_hash(&cfg);
    require_positive("tol", cfg.tol)?;
    require_positive("support", cfg.support)?;
    require_positive("eta_max", cfg.eta_max)?;
    if !(cfg.xi_min > 0.0 && cfg.xi_max > cfg.xi_min) {
        return Err(Error::Domain(format!(
            "frequency range must satisfy 0 < xi_min < xi_max (got {} .. {}); \
             the grid excludes 0",
            cfg.xi_min, cfg.xi_max
        )));
    }
    if cfg.n_xi < 2 {
        return Err(Error::Domain("need at least two frequencies per side".into()));
    }
    let interp = parse_interpolation(&cfg.interpolation)?;
    let q = load_potential(&cfg.potential, cfg.support, interp)?;
    let m = if cfg.matrix.is_empty() {
        TransferMatrix::identity()
    } else {
        TransferMatrix::from_json_path(Path::new(&cfg.matrix))?
    };
    let opts = OdeOptions::with_tol(cfg.tol);

    let mut grid = Vec::with_capacity(2 * cfg.n_xi);
    for k in 0..cfg.n_xi {
        let x = cfg.xi_min + (cfg.xi_max - cfg.xi_min) * k as f64 / (cfg.n_xi - 1) as f64;
        grid.push(-x);
        grid.push(x);
    }
    if let Some(floor) = cfg.log_floor {
        if !(floor > 0.0 && floor < cfg.xi_min) {
            return Err(Error::Domain(format!(
                "log floor must satisfy 0 < floor < xi_min, got {floor}"
            )));
        }
        // ~12 points per octave keeps the near-origin log singularity of the
        // dispersion integrand resolved
        let ratio = 1.06f64;
        let mut x = floor;
        while x < cfg.xi_min {
            grid.push(-x);
            grid.push(x);
            x *= ratio;
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let r = reflection_grid(&q, &m, &grid, &opts)?;
    let scan = bound_states(&q, &m, cfg.eta_max, &opts)?;
    for w in &scan.warnings {
        eprintln!("warning: {w}");
    }
    let sd = ScatteringData::new(grid.clone(), r.clone(), scan.etas)?;
    sd.to_json_path(Path::new(&cfg.out), Some(hash.clone()))?;

    if let Some(plot) = &args.emit_plot_data {
        let mut csv = format!("# config_hash: {hash}\nxi,R_re,R_im,abs_R,abs_A,abs_B,unitarity_defect\n");
        for (xi, rv) in grid.iter().zip(&r) {
            // |A|^2 (1 - |R|^2) = 1 on the real axis
            let a2 = 1.0 / (1.0 - rv.norm_sqr());
            let b2 = a2 - 1.0;
            let defect = (a2 * (1.0 - rv.norm_sqr()) - 1.0).abs();
            csv.push_str(&format!(
                "{xi},{},{},{},{},{},{defect}\n",
                rv.re,
                rv.im,
                rv.norm(),
                a2.sqrt(),
                b2.max(0.0).sqrt()
            ));
        }
        std::fs::write(plot, csv)?;
    }
    println!("wrote {} ({} frequencies, {} bound states)", cfg.out, sd.len(), sd.etas().len());
    Ok(())
}

// invert -------------------------------------------------------------------

#[derive(Serialize)]
struct BranchJson {
    m11: f64,
    m12: f64,
    m21: Option<f64>,
    m22: f64,
}

#[derive(Serialize)]
struct InversionJson {
    case: String,
    c1: Option<f64>,
    c2: Option<f64>,
    k1: Option<f64>,
    k2: Option<f64>,
    constraint: Option<String>,
    /// Index of the default (positive-trace) branch.
    selected_branch: Option<usize>,
    branches: Vec<BranchJson>,
    c1_fit_residual: Option<f64>,
    c2_fit_residual: Option<f64>,
    c2_imag_part: Option<f64>,
    k_fit_residual: Option<f64>,
    trace_xi: Vec<f64>,
    a_re: Vec<f64>,
    a_im: Vec<f64>,
    b_re: Vec<f64>,
    b_im: Vec<f64>,
    max_unitarity_residual: Option<f64>,
    config_hash: String,
}

fn run_invert(args: &InvertArgs, sec: &InvertSection, seed: u64) -> Result<(), Error> {
    let cfg = InvertConfig {
        command: "invert",
        data: path_string(&args.data, &sec.data, "sd.json"),
        out: path_string(&args.out, &sec.out, "mrec.json"),
        xi_floor: args
            .xi_floor
            .or(sec.xi_floor)
            .unwrap_or(scatterline::inverse::BOUNDARY_XI_FLOOR),
        skip_traces: args.skip_traces || sec.skip_traces.unwrap_or(false),
        seed,
    };
    let hash = config_hash(&cfg);
    let sd = ScatteringData::from_json_path(Path::new(&cfg.data))?;
    let report = invert_scattering(&sd)?;
    let mrec = &report.mrec;

    let (trace_xi, a_re, a_im, b_re, b_im, max_resid) = if cfg.skip_traces {
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), None)
    } else {
        let (a_trace, b) = ab_traces_from_data(&sd, mrec, cfg.xi_floor)?;
        if !b.consistent {
            eprintln!(
                "warning: reconstruction inconsistency, unitarity residual {:.3e}",
                b.max_unitarity_residual
            );
        }
        (
            a_trace.abscissae().iter().map(|z| z.re).collect(),
            a_trace.values().iter().map(|v| v.re).collect(),
            a_trace.values().iter().map(|v| v.im).collect(),
            b.trace.values().iter().map(|v| v.re).collect(),
            b.trace.values().iter().map(|v| v.im).collect(),
            Some(b.max_unitarity_residual),
        )
    };

    let selected = mrec.selected().map(|sel| {
        mrec.branches
            .iter()
            .position(|b| std::ptr::eq(b, sel))
            .unwrap_or(0)
    });
    let out = InversionJson {
        case: match mrec.case {
            MCase::Diag => "diag".into(),
            MCase::OffDiag => "offdiag".into(),
        },
        c1: mrec.c1,
        c2: mrec.c2,
        k1: mrec.k1,
        k2: mrec.k2,
        constraint: mrec.constraint.clone(),
        selected_branch: selected,
        branches: mrec
            .branches
            .iter()
            .map(|b| BranchJson { m11: b.m11, m12: b.m12, m21: b.m21, m22: b.m22 })
            .collect(),
        c1_fit_residual: report.c1_estimate.map(|e| e.residual),
        c2_fit_residual: report.c2_estimate.map(|e| e.residual),
        c2_imag_part: report.c2_estimate.map(|e| e.imag_part),
        k_fit_residual: report.k_estimate.map(|e| e.residual),
        trace_xi: trace_xi.clone(),
        a_re: a_re.clone(),
        a_im: a_im.clone(),
        b_re,
        b_im,
        max_unitarity_residual: max_resid,
        config_hash: hash.clone(),
    };
    std::fs::write(Path::new(&cfg.out), serde_json::to_string_pretty(&out)?)?;

    if let Some(plot) = &args.emit_plot_data {
        let mut csv = format!("# config_hash: {hash}\nxi,abs_A,abs_B\n");
        for (k, xi) in trace_xi.iter().enumerate() {
            let a = Complex64::new(a_re[k], a_im[k]).norm();
            let b = Complex64::new(out.b_re[k], out.b_im[k]).norm();
            csv.push_str(&format!("{xi},{a},{b}\n"));
        }
        std::fs::write(plot, csv)?;
    }
    println!(
        "wrote {} (case {}, {} sign branches)",
        cfg.out,
        out.case,
        out.branches.len()
    );
    Ok(())
}

// recover ------------------------------------------------------------------

fn run_recover(args: &RecoverArgs, sec: &RecoverSection, seed: u64) -> Result<(), Error> {
    let reg_sweep: Vec<f64> = match &args.reg_sweep {
        Some(list) => list
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad reg-sweep entry '{t}': {e}")))
            })
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let cfg = RecoverConfig {
        command: "recover",
        data: path_string(&args.data, &sec.data, "sd.json"),
        matrix: path_string(&args.matrix, &sec.matrix, ""),
        support: args.support.or(sec.support).unwrap_or(1.0),
        cells: args.cells.or(sec.cells).unwrap_or(8),
        reg: args.reg.or(sec.reg).unwrap_or(1e-4),
        samples: args.samples.or(sec.samples).unwrap_or(48),
        xi_fit_min: args.xi_fit_min.or(sec.xi_fit_min),
        xi_fit_max: args.xi_fit_max.or(sec.xi_fit_max),
        max_iterations: args.max_iterations.or(sec.max_iterations).unwrap_or(80),
        tol: args.tol.or(sec.tol).unwrap_or(1e-10),
        out: path_string(&args.out, &sec.out, "qhat.csv"),
        misfit_out: args
            .misfit_out
            .as_ref()
            .map(|p| p.to_string_lossy().into_owned())
            .or_else(|| sec.misfit_out.clone()),
        reg_sweep,
        seed,
    };
    let hash = config_hash(&cfg);
    require_positive("tol", cfg.tol)?;
    require_positive("support", cfg.support)?;
    if cfg.matrix.is_empty() {
        return Err(Error::Parse("recover needs --matrix".into()));
    }
    let sd = ScatteringData::from_json_path(Path::new(&cfg.data))?;
    let m = TransferMatrix::from_json_path(Path::new(&cfg.matrix))?;

    let run_once = |reg: f64| -> Result<scatterline::weyl::RecoverReport, Error> {
        let opts = RecoverOptions {
            reg,
            n_samples: cfg.samples,
            xi_min: cfg.xi_fit_min,
            xi_max: cfg.xi_fit_max,
            max_iterations: cfg.max_iterations,
            ode: OdeOptions::with_tol(cfg.tol),
            initial: None,
        };
        recover_potential(&sd, &m, cfg.support, cfg.cells, &opts, None)
    };

    if !cfg.reg_sweep.is_empty() {
        // L-curve data: data misfit against the roughness of the recovered grid
        let mut sweep = format!("# config_hash: {hash}\nreg,misfit,roughness\n");
        for &reg in &cfg.reg_sweep {
            let rep = run_once(reg)?;
            let cells = rep.grid.cell_values();
            let rough: f64 = cells
                .windows(3)
                .map(|w| (w[0] - 2.0 * w[1] + w[2]).powi(2))
                .sum::<f64>()
                .sqrt();
            let misfit = rep.misfit_history.last().map(|h| h.1).unwrap_or(f64::NAN);
            sweep.push_str(&format!("{reg},{misfit},{rough}\n"));
        }
        let sweep_path = format!("{}.regsweep.csv", cfg.out);
        std::fs::write(&sweep_path, sweep)?;
        println!("wrote {sweep_path}");
    }

    let report = run_once(cfg.reg)?;
    if report.stagnated {
        eprintln!("warning: misfit stagnated before convergence");
    }
    report
        .grid
        .to_csv_path(Path::new(&cfg.out), Some(&format!("config_hash: {hash}")))?;
    if let Some(misfit_path) = &cfg.misfit_out {
        let mut csv = format!("# config_hash: {hash}\niter,misfit,gradnorm\n");
        for (iter, misfit, gradnorm) in &report.misfit_history {
            csv.push_str(&format!("{iter},{misfit},{gradnorm}\n"));
        }
        std::fs::write(misfit_path, csv)?;
    }
    println!(
        "wrote {} ({} cells, {} spectral samples, final misfit {:.3e})",
        cfg.out,
        cfg.cells,
        report.kept_xi.len(),
        report.misfit_history.last().map(|h| h.1).unwrap_or(f64::NAN)
    );
    Ok(())
}

// validate -----------------------------------------------------------------

#[derive(Serialize)]
struct ReportEntryJson {
    tag: String,
    value: Option<f64>,
    band: f64,
    pass: bool,
    note: String,
}

#[derive(Serialize)]
struct ReportJson {
    suite: String,
    all_pass: bool,
    entries: Vec<ReportEntryJson>,
    config_hash: String,
}

fn run_validate(args: &ValidateArgs, sec: &ValidateSection, seed: u64) -> Result<u8, Error> {
    let cfg = ValidateConfig {
        command: "validate",
        suite: args
            .suite
            .clone()
            .or_else(|| sec.suite.clone())
            .unwrap_or_else(|| "appendix".to_string()),
        matrix: path_string(&args.matrix, &sec.matrix, ""),
        potential: path_string(&args.potential, &sec.potential, ""),
        support: args.support.or(sec.support).unwrap_or(1.0),
        interpolation: args
            .interpolation
            .clone()
            .or_else(|| sec.interpolation.clone())
            .unwrap_or_else(|| "linear".to_string()),
        k_max: args.k_max.or(sec.k_max).unwrap_or(20),
        tol: args.tol.or(sec.tol).unwrap_or(1e-9),
        report: path_string(&args.report, &sec.report, "report.json"),
        seed,
    };
    let hash = config_hash(&cfg);
    if cfg.suite != "appendix" {
        return Err(Error::Parse(format!("unknown suite '{}'", cfg.suite)));
    }
    require_positive("tol", cfg.tol)?;
    require_positive("support", cfg.support)?;
    let interp = parse_interpolation(&cfg.interpolation)?;
    let q = load_potential(&cfg.potential, cfg.support, interp)?;
    let m = if cfg.matrix.is_empty() {
        TransferMatrix::identity()
    } else {
        TransferMatrix::from_json_path(Path::new(&cfg.matrix))?
    };
    let suite = appendix_suite(&q, &m, cfg.k_max, &OdeOptions::with_tol(cfg.tol))?;
    let out = ReportJson {
        suite: cfg.suite.clone(),
        all_pass: suite.all_pass(),
        entries: suite
            .entries
            .iter()
            .map(|e| ReportEntryJson {
                tag: e.tag.clone(),
                value: e.value,
                band: e.band,
                pass: e.pass,
                note: e.note.clone(),
            })
            .collect(),
        config_hash: hash,
    };
    std::fs::write(Path::new(&cfg.report), serde_json::to_string_pretty(&out)?)?;
    for e in &out.entries {
        println!(
            "{}: {} (value {:?}, band {})",
            e.tag,
            if e.pass { "pass" } else { "FAIL" },
            e.value,
            e.band
        );
    }
    println!("wrote {}", cfg.report);
    Ok(if out.all_pass { 0 } else { 4 })
}
