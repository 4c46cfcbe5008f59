//! Command-line front end: resolve a run configuration, execute the
//! requested verification suite, figure-data sweep, or single gate shot,
//! and emit CSV/JSON artifacts with deterministic data hashes.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numeric failure (unreachable herald or an intolerable truncation leak).

mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::process::ExitCode;

use qpgate::analysis::{
    efficiency_grid, fidelity_sweep, process_tensor, SweepRecord,
};
use qpgate::closed_form::{conditional_map_matrix, first_order_map};
use qpgate::gate::run_gate_lossy;

use config::{parse_float_list, parse_name_list, ConfigError, RunConfig};
use output::{emit_csv, emit_json, fmt_f64, EmitError};

#[derive(Debug, Parser)]
#[command(
    name = "qpgate",
    version,
    about = "Simulator of a heralded, qubit-programmed operation on optical fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the oracle and invariant suite, printing one line per check
    Verify(CommonArgs),
    /// Fidelity sweep over input families and mean photon numbers
    Fig2(CommonArgs),
    /// Photon-number transfer table of the tuned map, raw and 2/r²-rescaled
    Fig3(CommonArgs),
    /// Coherence-transfer slices under detector loss, raw and 4/r²-rescaled
    Fig4(CommonArgs),
    /// Fidelity grid over tap transmissivity and detector efficiency
    Fig5(CommonArgs),
    /// Run the gate once and dump the heralded output ensemble
    Gate(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Flat key-value JSON config file; flags override its values
    #[arg(long)]
    config: Option<String>,
    /// Tap transmissivity t ∈ (0,1]
    #[arg(long)]
    t: Option<f64>,
    /// Explicit amplifier gain (used when gain tuning is off)
    #[arg(long)]
    g: Option<f64>,
    /// Match the amplifier gain to the tap (Γ = r/t², the default)
    #[arg(long = "tune-gain", overrides_with = "no_tune_gain")]
    tune_gain: bool,
    /// Use the explicit --g gain instead of matching it to the tap
    #[arg(long = "no-tune-gain")]
    no_tune_gain: bool,
    /// Detector efficiency η ∈ [0,1]
    #[arg(long)]
    eta: Option<f64>,
    /// Modelled lost photons per detector (default adapts to η)
    #[arg(long = "loss-cap")]
    loss_cap: Option<usize>,
    /// Relative unmodelled-population budget before a run aborts
    #[arg(long = "leak-tolerance")]
    leak_tolerance: Option<f64>,
    /// Photon-pair series order of the amplifier expansion
    #[arg(long = "series-order")]
    series_order: Option<usize>,
    /// Herald pattern as "h1,v1,h2,v2"
    #[arg(long)]
    herald: Option<String>,
    /// Named programme: a, adag, x, or p
    #[arg(long)]
    programme: Option<String>,
    /// Programme H amplitude as "re,im" (pairs with --qubit-v)
    #[arg(long = "qubit-h")]
    qubit_h: Option<String>,
    /// Programme V amplitude as "re,im" (pairs with --qubit-h)
    #[arg(long = "qubit-v")]
    qubit_v: Option<String>,
    /// Accept non-normalized programme amplitudes and rescale them
    #[arg(long = "renormalize-qubit")]
    renormalize_qubit: bool,
    /// Gate input as "kind:parameter", e.g. fock:2 or coherent:1.0
    #[arg(long)]
    input: Option<String>,
    /// Coherent amplitude for the efficiency grid
    #[arg(long)]
    alpha: Option<f64>,
    /// Highest occupation of process-tensor tables
    #[arg(long)]
    dim: Option<usize>,
    /// Mean photon numbers, comma separated
    #[arg(long)]
    nbars: Option<String>,
    /// Input families, comma separated
    #[arg(long)]
    families: Option<String>,
    /// Operators, comma separated (a, adag, x, p)
    #[arg(long)]
    operators: Option<String>,
    /// Transmissivity grid, comma separated
    #[arg(long)]
    ts: Option<String>,
    /// Efficiency grid, comma separated
    #[arg(long)]
    etas: Option<String>,
    /// Output artifact path
    #[arg(long)]
    out: Option<String>,
    /// Output format: csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Debug)]
enum RunError {
    Config(ConfigError),
    Numeric(qpgate::Error),
    Emit(EmitError),
}

impl RunError {
    fn code(&self) -> ExitCode {
        match self {
            RunError::Config(_) | RunError::Emit(_) => ExitCode::from(2),
            RunError::Numeric(_) => ExitCode::from(3),
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Numeric(e) => write!(f, "numeric failure: {e}"),
            RunError::Emit(e) => write!(f, "output error: {e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<qpgate::Error> for RunError {
    fn from(e: qpgate::Error) -> Self {
        RunError::Numeric(e)
    }
}

impl From<EmitError> for RunError {
    fn from(e: EmitError) -> Self {
        RunError::Emit(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Verify(a) => ("verify", a),
        Command::Fig2(a) => ("fig2", a),
        Command::Fig3(a) => ("fig3", a),
        Command::Fig4(a) => ("fig4", a),
        Command::Fig5(a) => ("fig5", a),
        Command::Gate(a) => ("gate", a),
    };
    let cfg = match resolve(name, args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let run = match name {
        "verify" => run_verify(),
        "fig2" => run_fig2(&cfg),
        "fig3" => run_fig3(&cfg),
        "fig4" => run_fig4(&cfg),
        "fig5" => run_fig5(&cfg),
        "gate" => run_gate_shot(&cfg),
        _ => unreachable!(),
    };
    match run {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}

fn resolve(command: &str, args: &CommonArgs) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::defaults(command);
    if let Some(path) = &args.config {
        cfg.merge_file(path)?;
    }
    if let Some(t) = args.t {
        cfg.t = t;
    }
    if let Some(g) = args.g {
        cfg.g = Some(g);
    }
    if args.tune_gain {
        cfg.tune_gain = true;
    }
    if args.no_tune_gain {
        cfg.tune_gain = false;
    }
    if let Some(eta) = args.eta {
        cfg.eta = eta;
    }
    if let Some(cap) = args.loss_cap {
        cfg.loss_cap = Some(cap);
    }
    if let Some(tol) = args.leak_tolerance {
        cfg.leak_tolerance = tol;
    }
    if let Some(order) = args.series_order {
        cfg.series_order = order;
    }
    if let Some(h) = &args.herald {
        cfg.herald = parse_herald(h)?;
    }
    if let Some(p) = &args.programme {
        cfg.programme = Some(p.clone());
        cfg.qubit_h = None;
        cfg.qubit_v = None;
    }
    if args.qubit_h.is_some() || args.qubit_v.is_some() {
        if args.programme.is_some() {
            return Err(ConfigError(
                "give either --programme or --qubit-h/--qubit-v, not both".into(),
            ));
        }
        cfg.programme = None;
        cfg.qubit_h = args.qubit_h.clone();
        cfg.qubit_v = args.qubit_v.clone();
    }
    if args.renormalize_qubit {
        cfg.renormalize_qubit = true;
    }
    if let Some(input) = &args.input {
        cfg.input = input.clone();
    }
    if let Some(alpha) = args.alpha {
        cfg.alpha = alpha;
    }
    if let Some(dim) = args.dim {
        cfg.dim = dim;
    }
    if let Some(list) = &args.nbars {
        cfg.nbars = parse_float_list(list)?;
    }
    if let Some(list) = &args.families {
        cfg.families = parse_name_list(list);
    }
    if let Some(list) = &args.operators {
        cfg.operators = parse_name_list(list);
    }
    if let Some(list) = &args.ts {
        cfg.ts = parse_float_list(list)?;
    }
    if let Some(list) = &args.etas {
        cfg.etas = parse_float_list(list)?;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if let Some(format) = &args.format {
        cfg.format = format.clone();
    }
    cfg.validate_format()?;
    Ok(cfg)
}

fn parse_herald(s: &str) -> Result<[usize; 4], ConfigError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(ConfigError(format!(
            "herald '{s}' must be four comma-separated counts h1,v1,h2,v2"
        )));
    }
    let mut counts = [0usize; 4];
    for (slot, tok) in counts.iter_mut().zip(&parts) {
        *slot = tok
            .parse()
            .map_err(|_| ConfigError(format!("herald count '{tok}' is not a non-negative integer")))?;
    }
    Ok(counts)
}

fn run_verify() -> Result<ExitCode, RunError> {
    let start = std::time::Instant::now();
    let reports = qpgate::checks::run_all();
    let mut all_passed = true;
    for r in &reports {
        println!(
            "{} {:<42} {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        all_passed &= r.passed;
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!(
        "{passed}/{} checks passed in {:.2}s",
        reports.len(),
        start.elapsed().as_secs_f64()
    );
    if all_passed {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn sweep_row(r: &SweepRecord, with_grid: bool) -> Vec<String> {
    let mut row = vec![r.family.clone(), r.operator.clone(), fmt_f64(r.nbar)];
    if with_grid {
        row.push(fmt_f64(r.t));
        row.push(fmt_f64(r.eta));
    }
    row.push(fmt_f64(r.fidelity));
    row.push(fmt_f64(r.success_prob));
    row.push(fmt_f64(r.leak));
    row
}

fn emit_sweep(
    cfg: &RunConfig,
    records: &[SweepRecord],
    with_grid: bool,
) -> Result<(), RunError> {
    if cfg.format == "json" {
        emit_json(&cfg.out, cfg, &records)?;
    } else {
        let header: &[&str] = if with_grid {
            &["family", "operator", "nbar", "t", "eta", "fidelity", "success_prob", "leak"]
        } else {
            &["family", "operator", "nbar", "fidelity", "success_prob", "leak"]
        };
        let rows: Vec<Vec<String>> = records.iter().map(|r| sweep_row(r, with_grid)).collect();
        emit_csv(&cfg.out, header, &rows)?;
    }
    println!("{} records -> {}", records.len(), cfg.out);
    Ok(())
}

fn run_fig2(cfg: &RunConfig) -> Result<ExitCode, RunError> {
    let p = cfg.gate_params()?;
    let families = cfg.parsed_families()?;
    let operators = cfg.parsed_operators()?;
    let records = fidelity_sweep(&families, &operators, &cfg.nbars, &p)?;
    emit_sweep(cfg, &records, false)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct DiagRecord {
    n: usize,
    l: usize,
    diag: f64,
    diag_rescaled: f64,
}

fn run_fig3(cfg: &RunConfig) -> Result<ExitCode, RunError> {
    let p = cfg.gate_params()?;
    let q = cfg.qubit()?;
    let map = conditional_map_matrix(&p, &q, cfg.dim);
    let tensor = process_tensor(std::slice::from_ref(&map), cfg.dim)?;
    let diag = tensor.diagonal_slice();
    let rescale = 2.0 / (p.bs.r() * p.bs.r());
    let mut records = Vec::new();
    for (n, row) in diag.iter().enumerate() {
        for (l, &value) in row.iter().enumerate() {
            records.push(DiagRecord {
                n,
                l,
                diag: value,
                diag_rescaled: value * rescale,
            });
        }
    }
    if cfg.format == "json" {
        emit_json(&cfg.out, cfg, &records)?;
    } else {
        let rows: Vec<Vec<String>> = records
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.l.to_string(),
                    fmt_f64(r.diag),
                    fmt_f64(r.diag_rescaled),
                ]
            })
            .collect();
        emit_csv(&cfg.out, &["n", "l", "diag", "diag_rescaled"], &rows)?;
    }
    println!("{} records -> {}", records.len(), cfg.out);
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct CoherenceRecord {
    eta: f64,
    n: usize,
    m: usize,
    coh_re: f64,
    coh_im: f64,
    coh_rescaled_re: f64,
    coh_rescaled_im: f64,
}

fn run_fig4(cfg: &RunConfig) -> Result<ExitCode, RunError> {
    let q = cfg.qubit()?;
    let mut records = Vec::new();
    for &eta in &cfg.etas {
        let p = cfg.gate_params_at(cfg.t, eta)?;
        let branches = first_order_map(&p, &q, eta, cfg.dim)?;
        let tensor = process_tensor(&branches, cfg.dim)?;
        let rescale = 4.0 / (p.bs.r() * p.bs.r());
        let coherence = tensor.coherence_slice();
        for (n, row) in coherence.iter().enumerate() {
            for (m, &value) in row.iter().enumerate() {
                records.push(CoherenceRecord {
                    eta,
                    n,
                    m,
                    coh_re: value.re,
                    coh_im: value.im,
                    coh_rescaled_re: value.re * rescale,
                    coh_rescaled_im: value.im * rescale,
                });
            }
        }
    }
    if cfg.format == "json" {
        emit_json(&cfg.out, cfg, &records)?;
    } else {
        let rows: Vec<Vec<String>> = records
            .iter()
            .map(|r| {
                vec![
                    fmt_f64(r.eta),
                    r.n.to_string(),
                    r.m.to_string(),
                    fmt_f64(r.coh_re),
                    fmt_f64(r.coh_im),
                    fmt_f64(r.coh_rescaled_re),
                    fmt_f64(r.coh_rescaled_im),
                ]
            })
            .collect();
        emit_csv(
            &cfg.out,
            &["eta", "n", "m", "coh_re", "coh_im", "coh_rescaled_re", "coh_rescaled_im"],
            &rows,
        )?;
    }
    println!("{} records -> {}", records.len(), cfg.out);
    Ok(ExitCode::SUCCESS)
}

fn run_fig5(cfg: &RunConfig) -> Result<ExitCode, RunError> {
    let operators = cfg.parsed_operators()?;
    // validate the whole grid before the heavy sweep so range mistakes are
    // reported as configuration errors
    for &t in &cfg.ts {
        for &eta in &cfg.etas {
            cfg.gate_params_at(t, eta)?;
        }
    }
    if !cfg.alpha.is_finite() || cfg.alpha < 0.0 {
        return Err(ConfigError(format!(
            "coherent amplitude must be finite and non-negative, got {}",
            cfg.alpha
        ))
        .into());
    }
    let records = efficiency_grid(cfg.alpha, &operators, &cfg.ts, &cfg.etas)?;
    emit_sweep(cfg, &records, true)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct AmplitudeRecord {
    occupations: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(Debug, Serialize)]
struct MemberRecord {
    lost: [usize; 4],
    norm_sqr: f64,
    amplitudes: Vec<AmplitudeRecord>,
}

#[derive(Debug, Serialize)]
struct GateDump {
    success_probability: f64,
    truncation_leak: f64,
    carrier_modes: Vec<String>,
    members: Vec<MemberRecord>,
}

fn run_gate_shot(cfg: &RunConfig) -> Result<ExitCode, RunError> {
    let p = cfg.gate_params()?;
    let q = cfg.qubit()?;
    let input = cfg.input_state()?;
    let result = run_gate_lossy(&input, &q, &p)?;
    let carrier_modes: Vec<String> = result
        .members
        .first()
        .map(|m| m.state.modes().iter().map(|l| format!("{l:?}")).collect())
        .unwrap_or_default();
    let members: Vec<MemberRecord> = result
        .members
        .iter()
        .filter(|m| m.state.norm_sqr() > 0.0)
        .map(|m| {
            let dims: Vec<usize> = m
                .state
                .modes()
                .iter()
                .map(|&label| m.state.cap(label).expect("own mode") + 1)
                .collect();
            let amplitudes = m
                .state
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(flat, a)| {
                    let mut occ = vec![0usize; dims.len()];
                    let mut rest = flat;
                    for (ax, &d) in dims.iter().enumerate().rev() {
                        occ[ax] = rest % d;
                        rest /= d;
                    }
                    AmplitudeRecord {
                        occupations: occ,
                        re: a.re,
                        im: a.im,
                    }
                })
                .collect();
            MemberRecord {
                lost: m.lost,
                norm_sqr: m.state.norm_sqr(),
                amplitudes,
            }
        })
        .collect();
    let dump = GateDump {
        success_probability: result.success_probability,
        truncation_leak: result.truncation_leak,
        carrier_modes,
        members,
    };
    if cfg.format == "json" {
        emit_json(&cfg.out, cfg, &dump)?;
    } else {
        let mut rows = Vec::new();
        for m in &dump.members {
            for a in &m.amplitudes {
                rows.push(vec![
                    m.lost[0].to_string(),
                    m.lost[1].to_string(),
                    m.lost[2].to_string(),
                    m.lost[3].to_string(),
                    a.occupations
                        .iter()
                        .map(usize::to_string)
                        .collect::<Vec<_>>()
                        .join(";"),
                    fmt_f64(a.re),
                    fmt_f64(a.im),
                ]);
            }
        }
        emit_csv(
            &cfg.out,
            &["lost_h1", "lost_v1", "lost_h2", "lost_v2", "occupations", "amp_re", "amp_im"],
            &rows,
        )?;
    }
    println!(
        "success probability {:.6e}, truncation leak {:.3e}, {} ensemble member(s) -> {}",
        dump.success_probability,
        dump.truncation_leak,
        dump.members.len(),
        cfg.out
    );
    Ok(ExitCode::SUCCESS)
}
