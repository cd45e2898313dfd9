mod config;
mod output;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use bose2d::bogoliubov::{cp_coefficients, diagonalize, reconstruct, ModePair, QuadraticModel};
use bose2d::coefficients::{bogoliubov_defect, build_table_with, lemma_bounds, norm_checks, tau_upsilon, GPParams};
use bose2d::fock::{compare_analytic_with, gp_slice_check};
use bose2d::lanczos::{EigenMethod, LanczosOptions};
use bose2d::lattice::{
    default_sbog_cutoff, energy_en, energy_enr, i_ell, spectrum_enumerate, sum_j0, sum_sbog_with, EnergyOptions, J0Options, SbogOptions,
    SumStrategy,
};
use bose2d::scattering::{solve_neumann, NeumannOptions};
use bose2d::verify::{run_suite, Suite};
use bose2d::Potential;

use config::{pick, RunConfig};
use output::{emit_json, fmt_f64, to_csv, write_bytes};

const DEFAULT_POTENTIAL: &str = "soft-disk:v0=2,r0=1";

#[derive(Debug)]
pub enum CliError {
    /// Missing or malformed arguments; carries the usage text.
    Usage(String, String),
    Validation(String),
    Numerical(String),
}

impl From<bose2d::Error> for CliError {
    fn from(e: bose2d::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o error: {e}"))
    }
}

type CliResult<T> = Result<T, CliError>;

/// Bogoliubov numerics for the two-dimensional Bose gas.
#[derive(Debug, Parser)]
#[command(name = "bose2d", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// JSON run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (0 = one per core). Falls back to BOSE2D_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format: json or csv.
    #[arg(long, global = true)]
    format: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Neumann scattering solution on a disk of radius R.
    Scatter(ScatterArgs),
    /// Coefficient table η, ω̂, F, G, τ, υ per lattice shell.
    Coeffs(CoeffsArgs),
    /// Ground-state energy formulas.
    Energy(EnergyArgs),
    /// Excitation ladder below ζ.
    Spectrum(SpectrumArgs),
    /// Individual regularized lattice sums.
    Sums(SumsArgs),
    /// Closed-form diagonalization of one pair.
    Diag(DiagArgs),
    /// Exact diagonalization on a truncated Fock space.
    Ed(EdArgs),
    /// Consistency suites.
    Verify(VerifyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Scatter(_) => "scatter",
            Command::Coeffs(_) => "coeffs",
            Command::Energy(_) => "energy",
            Command::Spectrum(_) => "spectrum",
            Command::Sums(_) => "sums",
            Command::Diag(_) => "diag",
            Command::Ed(_) => "ed",
            Command::Verify(_) => "verify",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "scatter" => Command::Scatter(ScatterArgs::default()),
            "coeffs" => Command::Coeffs(CoeffsArgs::default()),
            "energy" => Command::Energy(EnergyArgs::default()),
            "spectrum" => Command::Spectrum(SpectrumArgs::default()),
            "sums" => Command::Sums(SumsArgs::default()),
            "diag" => Command::Diag(DiagArgs::default()),
            "ed" => Command::Ed(EdArgs::default()),
            "verify" => Command::Verify(VerifyArgs::default()),
            _ => return None,
        })
    }
}

#[derive(Debug, Args, Default)]
struct ScatterArgs {
    /// soft-disk:v0=..,r0=.. | gaussian:v0=..,r0=.. | table:<file.csv>
    #[arg(long)]
    potential: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    /// Log-spaced radii R1:R2:n.
    #[arg(long)]
    sweep: Option<String>,
    /// Relative tolerance on λ.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args, Default)]
struct CoeffsArgs {
    #[arg(long = "N")]
    n: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    potential: Option<String>,
    #[arg(long)]
    pmax: Option<f64>,
    /// Also write the shell table as CSV to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args, Default)]
struct EnergyArgs {
    #[arg(long = "N")]
    n: Option<u64>,
    #[arg(long)]
    a: Option<f64>,
    /// eN (ℓ = 𝔞) or remark4 (ℓ = 1).
    #[arg(long)]
    form: Option<String>,
    /// Coupling R of E_N^(R).
    #[arg(long = "R")]
    coupling: Option<f64>,
    /// Shell cutoff of S_Bog.
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args, Default)]
struct SpectrumArgs {
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    max_states: Option<usize>,
}

#[derive(Debug, Args, Default)]
struct SumsArgs {
    /// sbog | j0 | i-ell
    #[arg(long)]
    sum: Option<String>,
    /// plain-shells | shell-average | integral-tail | ewald
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long = "R")]
    coupling: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
}

#[derive(Debug, Args, Default)]
struct DiagArgs {
    #[arg(long = "F", allow_negative_numbers = true)]
    f: Option<f64>,
    #[arg(long = "G", allow_negative_numbers = true)]
    g: Option<f64>,
}

#[derive(Debug, Args, Default)]
struct EdArgs {
    /// "F,G;F,G;..."
    #[arg(long, allow_hyphen_values = true)]
    pairs: Option<String>,
    /// Coefficient CSV written by `coeffs`.
    #[arg(long)]
    from_table: Option<PathBuf>,
    /// Build an N-particle table and run the per-shell check.
    #[arg(long)]
    gp_n: Option<u64>,
    #[arg(long)]
    shells: Option<usize>,
    #[arg(long)]
    nmax: Option<u32>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    dense: bool,
    #[arg(long)]
    lanczos: bool,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    potential: Option<String>,
}

#[derive(Debug, Args, Default)]
struct VerifyArgs {
    /// identities | scattering | coefficients | sums | ed | all
    #[arg(long)]
    suite: Option<String>,
}

struct Ctx {
    cfg: RunConfig,
    out: Option<PathBuf>,
    format: String,
}

impl Ctx {
    fn json_only(&self, cmd: &str) -> CliResult<()> {
        if self.format != "json" {
            return Err(CliError::Validation(format!("{cmd} supports only json output")));
        }
        Ok(())
    }

    fn emit<T: Serialize + ?Sized>(&self, v: &T) -> CliResult<()> {
        emit_json(v, self.out.as_deref())?;
        Ok(())
    }
}

fn usage(cmd: &str) -> String {
    let mut c = Cli::command();
    c.build();
    match c.find_subcommand_mut(cmd) {
        Some(s) => s.render_usage().to_string(),
        None => c.render_usage().to_string(),
    }
}

fn required<T>(flag: Option<T>, config: Option<T>, cmd: &str, name: &str) -> CliResult<T> {
    flag.or(config)
        .ok_or_else(|| CliError::Usage(format!("{cmd}: missing required flag --{name}"), usage(cmd)))
}

fn parse_potential(spec: &str) -> CliResult<Potential> {
    Ok(spec.parse::<Potential>()?)
}

fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var("BOSE2D_THREADS") {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Validation(format!("BOSE2D_THREADS must be a nonnegative integer, got '{s}'"))),
        _ => Ok(None),
    }
}

fn run() -> CliResult<()> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            return Err(CliError::Usage(e.to_string(), String::new()));
        }
    };
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let command = match (cli.command, cfg.subcommand.as_deref()) {
        (Some(c), Some(s)) if c.name() != s => {
            return Err(CliError::Validation(format!(
                "config subcommand '{s}' conflicts with '{}' on the command line",
                c.name()
            )))
        }
        (Some(c), _) => c,
        (None, Some(s)) => Command::from_name(s).ok_or_else(|| CliError::Validation(format!("unknown subcommand '{s}' in config")))?,
        (None, None) => {
            return Err(CliError::Usage(
                "missing subcommand".into(),
                Cli::command().render_usage().to_string(),
            ))
        }
    };

    let threads = match cli.threads.or(cfg.threads) {
        Some(t) => Some(t),
        None => threads_from_env()?,
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot configure thread pool: {e}")))?;
    }
    let format = pick(cli.format, cfg.format.clone(), "json".to_string());
    if format != "json" && format != "csv" {
        return Err(CliError::Validation(format!("unknown format '{format}', expected json or csv")));
    }
    let ctx = Ctx {
        out: cli.out.or(cfg.out.clone()),
        cfg,
        format,
    };
    match command {
        Command::Scatter(a) => scatter(&ctx, a),
        Command::Coeffs(a) => coeffs(&ctx, a),
        Command::Energy(a) => energy(&ctx, a),
        Command::Spectrum(a) => spectrum(&ctx, a),
        Command::Sums(a) => sums(&ctx, a),
        Command::Diag(a) => diag(&ctx, a),
        Command::Ed(a) => ed(&ctx, a),
        Command::Verify(a) => verify(&ctx, a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg, usage)) => {
            // clap messages carry their own prefix
            if msg.starts_with("error:") {
                eprintln!("{}", msg.trim_end());
            } else {
                eprintln!("error: {}", msg.trim_end());
            }
            if !usage.is_empty() {
                eprintln!("\n{usage}");
            }
            ExitCode::from(1)
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}

// ---------------------------------------------------------------------------

fn parse_sweep(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Validation(format!("--sweep expects R1:R2:n, got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let r1: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let r2: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(r1 > 0.0 && r2 >= r1) || n == 0 {
        return Err(CliError::Validation("--sweep needs 0 < R1 <= R2 and n >= 1".into()));
    }
    if n == 1 {
        return Ok(vec![r1]);
    }
    let (l1, l2) = (r1.ln(), r2.ln());
    Ok((0..n).map(|i| (l1 + (l2 - l1) * i as f64 / (n - 1) as f64).exp()).collect())
}

fn scatter(ctx: &Ctx, a: ScatterArgs) -> CliResult<()> {
    ctx.json_only("scatter")?;
    let c = &ctx.cfg;
    let pot = parse_potential(&pick(a.potential, c.potential.clone(), DEFAULT_POTENTIAL.into()))?;
    let radii = match (a.sweep.or(c.sweep.clone()), a.radius.or(c.radius)) {
        (Some(s), _) => parse_sweep(&s)?,
        (None, Some(r)) => vec![r],
        (None, None) => return Err(CliError::Usage("scatter: missing required flag --radius (or --sweep)".into(), usage("scatter"))),
    };
    let opts = NeumannOptions::with_tol(pick(a.tol, c.tol, NeumannOptions::default().tol));
    let mut rows = Vec::with_capacity(radii.len());
    for r in radii {
        let s = solve_neumann(&pot, r, &opts)?;
        rows.push(json!({
            "R": s.radius,
            "lambda": s.lambda,
            "lambda_rel_tol": opts.tol,
            "eps_sq": s.eps_sq,
            "intVf": s.int_vf,
            "intF": s.int_f,
            "scattering_length": s.scattering_length,
            "asymptotic_defects": s.asymptotic_defects(),
        }));
    }
    ctx.emit(&json!({ "potential": pot.to_string(), "radii": rows }))
}

const COEFF_HEADER: [&str; 10] = ["m", "p_sq", "multiplicity", "eta", "omega_hat", "F", "G", "tau", "upsilon", "alpha"];

fn coeffs(ctx: &Ctx, a: CoeffsArgs) -> CliResult<()> {
    let c = &ctx.cfg;
    let n = required(a.n, c.n, "coeffs", "N")?;
    let pot = parse_potential(&pick(a.potential, c.potential.clone(), DEFAULT_POTENTIAL.into()))?;
    let mut params = GPParams::new(n);
    params.alpha = pick(a.alpha, c.alpha, params.alpha);
    params.nu = pick(a.nu, c.nu, params.nu);
    params.p_max = a.pmax.or(c.pmax);
    let opts = NeumannOptions::with_tol(pick(a.tol, c.tol, NeumannOptions::default().tol));
    let table = build_table_with(&pot, &params, &opts)?;
    let rows: Vec<Vec<String>> = table
        .shells
        .iter()
        .map(|s| {
            vec![
                s.m.to_string(),
                fmt_f64(s.p_sq),
                s.multiplicity.to_string(),
                fmt_f64(s.eta),
                fmt_f64(s.omega_hat),
                fmt_f64(s.f),
                fmt_f64(s.g),
                fmt_f64(s.tau),
                fmt_f64(s.upsilon),
                fmt_f64(s.alpha),
            ]
        })
        .collect();
    let csv = to_csv(&COEFF_HEADER, &rows)?;
    if let Some(p) = a.csv.or(c.csv.clone()) {
        write_bytes(&csv, Some(&p))?;
    }
    if ctx.format == "csv" {
        write_bytes(&csv, ctx.out.as_deref())?;
        return Ok(());
    }
    let defect = bogoliubov_defect(&table)?;
    let summary = json!({
        "N": n,
        "alpha": params.alpha,
        "nu": params.nu,
        "potential": pot.to_string(),
        "ell": table.ell,
        "R": table.radius,
        "cutoff": table.cutoff,
        "proof_cutoff": table.proof_cutoff,
        "shells": table.shells.len(),
        "g_N": table.g_n,
        "lambda": table.lambda,
        "lambda_rel_tol": opts.tol,
        "eps_sq": table.eps_sq,
        "intVf": table.int_vf,
        "scattering_length": table.scattering_length,
        "eta0": table.eta0,
        "omega_hat0": table.omega_hat0,
        "norms": norm_checks(&table),
        "bounds": lemma_bounds(&table),
        "defect": {
            "max_defect": defect.max_defect,
            "max_defect_p_sq": defect.max_defect_p_sq,
            "defect_constant": defect.defect_constant,
            "omega0_defect": defect.omega0_defect,
            "g_n_defect": defect.g_n_defect,
        },
    });
    ctx.emit(&summary)
}

fn energy(ctx: &Ctx, a: EnergyArgs) -> CliResult<()> {
    ctx.json_only("energy")?;
    let c = &ctx.cfg;
    let n = required(a.n, c.n, "energy", "N")?;
    let scat = required(a.a, c.a, "energy", "a")?;
    let form = pick(a.form, c.form.clone(), "eN".into());
    if form != "eN" && form != "remark4" {
        return Err(CliError::Validation(format!("--form must be eN or remark4, got '{form}'")));
    }
    let opts = EnergyOptions {
        sbog_cutoff: a.cutoff.or(c.cutoff),
        ..EnergyOptions::default()
    };
    let (value, tail, mut v) = match a.coupling.or(c.coupling) {
        Some(r) => {
            if form != "eN" {
                return Err(CliError::Validation("--R selects E_N^(R), which has a single form".into()));
            }
            let rep = energy_enr(r, n, scat, &opts)?;
            let mut v = serde_json::to_value(rep).map_err(std::io::Error::other)?;
            v["cutoffs"] = json!({ "s_bog": rep.s_bog.cutoff, "j0": rep.j0_sum.cutoff });
            (rep.e, rep.tail_bound, v)
        }
        None => {
            let rep = energy_en(n, scat, &opts)?;
            let mut v = serde_json::to_value(rep).map_err(std::io::Error::other)?;
            if form == "remark4" {
                let tail = rep.s_bog.tail_bound + 4.0 * PI * PI * rep.j0_sum_unit.tail_bound;
                v["E"] = json!(rep.e_unit_ell);
                v["E_ell_a"] = json!(rep.e);
                v["j0_sum"] = serde_json::to_value(rep.j0_sum_unit).map_err(std::io::Error::other)?;
                v["tail_bound"] = json!(tail);
                v["cutoffs"]["j0"] = json!(rep.j0_sum_unit.cutoff);
                (rep.e_unit_ell, tail, v)
            } else {
                (rep.e, rep.tail_bound, v)
            }
        }
    };
    v["form"] = json!(form);
    if a.json || ctx.out.is_some() {
        return ctx.emit(&v);
    }
    println!("E = {} (tail bound {})", fmt_f64(value), fmt_f64(tail));
    Ok(())
}

fn spectrum(ctx: &Ctx, a: SpectrumArgs) -> CliResult<()> {
    let c = &ctx.cfg;
    let zeta = required(a.zeta, c.zeta, "spectrum", "zeta")?;
    let levels = spectrum_enumerate(zeta, pick(a.max_states, c.max_states, 1_000_000))?;
    let rows: Vec<Vec<String>> = levels
        .iter()
        .map(|l| vec![fmt_f64(l.value), l.degeneracy.to_string(), l.labels.join("; ")])
        .collect();
    let csv = to_csv(&["value", "degeneracy", "occupation_labels"], &rows)?;
    if let Some(p) = a.csv.or(c.csv.clone()) {
        write_bytes(&csv, Some(&p))?;
    }
    if ctx.format == "csv" {
        write_bytes(&csv, ctx.out.as_deref())?;
        return Ok(());
    }
    let states: usize = levels.iter().map(|l| l.degeneracy).sum();
    // exact enumeration: nothing beyond ζ is omitted from the listed range
    ctx.emit(&json!({
        "zeta": zeta,
        "cutoff": zeta,
        "tail_bound": 0.0,
        "states": states,
        "levels": levels,
    }))
}

fn sums(ctx: &Ctx, a: SumsArgs) -> CliResult<()> {
    ctx.json_only("sums")?;
    let c = &ctx.cfg;
    let which = pick(a.sum, c.sum.clone(), "sbog".into());
    let strategy: Option<SumStrategy> = a.strategy.or(c.strategy.clone()).map(|s| s.parse()).transpose()?;
    let cutoff = a.cutoff.or(c.cutoff);
    match which.as_str() {
        "sbog" => {
            let coupling = pick(a.coupling, c.coupling, 1.0);
            let r = sum_sbog_with(&SbogOptions {
                cutoff: cutoff.unwrap_or_else(|| default_sbog_cutoff(coupling)),
                strategy: strategy.unwrap_or(SumStrategy::IntegralTail),
                coupling,
            })?;
            ctx.emit(&r)
        }
        "j0" => {
            let ell = required(a.ell, c.ell, "sums", "ell")?;
            let opts = J0Options {
                strategy: strategy.unwrap_or(SumStrategy::Ewald),
                cutoff,
                ..J0Options::default()
            };
            ctx.emit(&sum_j0(ell, &opts)?)
        }
        "i-ell" => {
            let ell = required(a.ell, c.ell, "sums", "ell")?;
            let scat = required(a.a, c.a, "sums", "a")?;
            let opts = J0Options {
                strategy: strategy.unwrap_or(SumStrategy::Ewald),
                cutoff,
                ..J0Options::default()
            };
            ctx.emit(&i_ell(ell, scat, &opts)?)
        }
        other => Err(CliError::Validation(format!("unknown sum '{other}', expected sbog, j0 or i-ell"))),
    }
}

fn diag(ctx: &Ctx, a: DiagArgs) -> CliResult<()> {
    ctx.json_only("diag")?;
    let c = &ctx.cfg;
    let f = required(a.f, c.f, "diag", "F")?;
    let g = required(a.g, c.g, "diag", "G")?;
    let model = QuadraticModel::new(vec![ModePair::new("pair", f, g)?])?;
    let d = diagonalize(&model)?;
    let cp = cp_coefficients(f, g)?;
    let (tau, upsilon) = tau_upsilon(f, g)?;
    let (f2, g2) = reconstruct(cp.frequency, cp.alpha)?;
    let (cosh, sinh) = d.cosh_sinh[0];
    ctx.emit(&json!({
        "F": f,
        "G": g,
        "frequency": d.frequencies[0],
        "shift": d.shift,
        "cosh_tau": cosh,
        "sinh_tau": sinh,
        "tau": tau,
        "upsilon": upsilon,
        "alpha": cp.alpha,
        "normalization": cp.normalization,
        "reconstruction_error": (f2 - f).abs().max((g2 - g).abs()),
    }))
}

fn parse_pairs(s: &str) -> CliResult<Vec<(f64, f64)>> {
    let bad = || CliError::Validation(format!("--pairs expects \"F,G;F,G;...\", got '{s}'"));
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (f, g) = p.split_once(',').ok_or_else(bad)?;
            Ok((f.trim().parse().map_err(|_| bad())?, g.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn read_table_pairs(path: &Path, shells: usize) -> CliResult<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let headers = r
        .headers()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Validation(format!("{}: no column '{name}'", path.display())))
    };
    let (fi, gi) = (col("F")?, col("G")?);
    let mut out = Vec::new();
    for rec in r.records().take(shells) {
        let rec = rec.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let num = |i: usize| {
            rec.get(i)
                .and_then(|x| x.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::Validation(format!("{}: malformed row", path.display())))
        };
        out.push((num(fi)?, num(gi)?));
    }
    if out.len() < shells {
        return Err(CliError::Validation(format!("{} has only {} shells", path.display(), out.len())));
    }
    Ok(out)
}

fn ed(ctx: &Ctx, a: EdArgs) -> CliResult<()> {
    ctx.json_only("ed")?;
    let c = &ctx.cfg;
    let n_max = pick(a.nmax, c.nmax, 40);
    let levels = pick(a.levels, c.levels, 6);
    let shells = pick(a.shells, c.shells, 1);
    let dense = a.dense || c.dense.unwrap_or(false);
    let lanczos = a.lanczos || c.lanczos.unwrap_or(false);
    let method = match (dense, lanczos) {
        (true, true) => return Err(CliError::Validation("--dense and --lanczos are exclusive".into())),
        (true, false) => EigenMethod::Dense,
        (false, true) => EigenMethod::Lanczos,
        _ => EigenMethod::Auto,
    };
    let defaults = LanczosOptions::default();
    let opts = LanczosOptions {
        tol: pick(a.tol, c.tol, defaults.tol),
        seed: pick(a.seed, c.seed, defaults.seed),
        ..defaults
    };
    if let Some(n) = a.gp_n.or(c.gp_n) {
        let pot = parse_potential(&pick(a.potential, c.potential.clone(), DEFAULT_POTENTIAL.into()))?;
        let table = bose2d::coefficients::build_table(&pot, &GPParams::new(n))?;
        return ctx.emit(&gp_slice_check(&table, shells, n_max)?);
    }
    let fg = match (a.pairs.or(c.pairs.clone()), a.from_table.or(c.from_table.clone())) {
        (Some(_), Some(_)) => return Err(CliError::Validation("--pairs and --from-table are exclusive".into())),
        (Some(p), None) => parse_pairs(&p)?,
        (None, Some(t)) => read_table_pairs(&t, shells)?,
        (None, None) => {
            return Err(CliError::Usage(
                "ed: missing required flag --pairs (or --from-table, --gp-n)".into(),
                usage("ed"),
            ))
        }
    };
    let model = QuadraticModel::from_fg(&fg)?;
    ctx.emit(&compare_analytic_with(&model, n_max, levels, method, &opts)?)
}

fn verify(ctx: &Ctx, a: VerifyArgs) -> CliResult<()> {
    ctx.json_only("verify")?;
    let suite: Suite = pick(a.suite, ctx.cfg.suite.clone(), "all".into()).parse()?;
    let report = run_suite(suite);
    ctx.emit(&report)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::Numerical(format!("verification failed: {}", failed.join(", "))))
    }
}
