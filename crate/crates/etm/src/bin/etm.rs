use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{Datelike, NaiveDate};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use etm::estimate::{estimate_params, EstimateOptions};
use etm::hedging::{pnl_study, HedgeCoefficients, HedgeTarget, PnlReport};
use etm::io::{self, fmt_human};
use etm::pricing::{mc_price, ContractKind, ContractSpec, PriceBreakdown, Pricer};
use etm::validation::{run_suite, Outcome, Suite};
use etm::{CfContext, EtmError, EtmParams, McEngine, McReport, PathState};

#[derive(Parser)]
#[command(name = "etm", version, about = "Coupled electricity price / temperature model")]
struct Cli {
    /// Worker threads for Monte Carlo and daily sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the model to daily price and temperature series.
    Estimate {
        /// CSV `date,value` of daily prices (EUR/MWh, strictly positive).
        #[arg(long)]
        prices: PathBuf,
        /// CSV `date,value` of daily mean temperatures (°C).
        #[arg(long)]
        temps: PathBuf,
        /// Restrict the λ estimate to `FROM:TO` (ISO dates).
        #[arg(long)]
        window: Option<String>,
        /// Rank bins per axis of the χ² independence table.
        #[arg(long, default_value_t = 3)]
        bins: usize,
        #[arg(long)]
        allow_gaps: bool,
        /// Parameter file to write.
        #[arg(long)]
        out: PathBuf,
        /// Diagnostics JSON; stdout when absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Price a contract over a delivery window.
    Price {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        kind: ContractKind,
        #[command(flatten)]
        window: Window,
        #[arg(long, default_value_t = 50.0)]
        s_bar: f64,
        #[arg(long, default_value_t = 18.0)]
        t_bar: f64,
        #[arg(long, value_enum, default_value_t = Method::Formula)]
        method: Method,
        #[arg(long, default_value_t = 100_000)]
        n_paths: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Machine-readable output.
        #[arg(long)]
        json: bool,
    },
    /// Static hedge of a monthly E-HDD or quanto: coefficient table and PnL study.
    Hedge {
        #[arg(long)]
        params: PathBuf,
        /// Delivery month `YYYY-MM`.
        #[arg(long)]
        month: String,
        #[arg(long, value_enum)]
        kind: HedgeKind,
        #[arg(long, default_value_t = 50.0)]
        s_bar: f64,
        #[arg(long, default_value_t = 18.0)]
        t_bar: f64,
        /// Build the hedge with λ = 0 while simulating the fitted λ.
        #[arg(long)]
        zero_lambda: bool,
        #[arg(long, default_value_t = 100_000)]
        n_paths: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Coefficient CSV `date,c0,c1,c2`; stdout when absent.
        #[arg(long)]
        coeffs: Option<PathBuf>,
        /// PnL report JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the consistency battery and report pass/fail as JSON.
    Validate {
        /// Run at these parameters; the reference-figure reproductions are skipped.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value = "quick")]
        suite: String,
        #[arg(long, default_value_t = 20180101)]
        seed: u64,
    },
}

#[derive(clap::Args)]
struct Window {
    /// Delivery month `YYYY-MM`.
    #[arg(long, conflicts_with_all = ["from", "to"])]
    month: Option<String>,
    #[arg(long, requires = "to")]
    from: Option<NaiveDate>,
    #[arg(long, requires = "from")]
    to: Option<NaiveDate>,
    /// Valuation date; default 30 days before delivery starts.
    #[arg(long)]
    t0: Option<NaiveDate>,
    /// Spot price at the valuation date; default the seasonal level.
    #[arg(long)]
    s0: Option<f64>,
    /// Temperature at the valuation date; default the seasonal level.
    #[arg(long)]
    temp0: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Formula,
    Mc,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum HedgeKind {
    Ehdd,
    Quanto,
}

fn parse_month(s: &str, p: &EtmParams) -> etm::Result<(i64, i64)> {
    let d = NaiveDate::parse_from_str(&format!("{s}-01"), "%Y-%m-%d")
        .map_err(|_| EtmError::Usage(format!("month must be YYYY-MM, got {s:?}")))?;
    p.month_window(d.year(), d.month())
}

fn parse_window(s: &str) -> etm::Result<(NaiveDate, NaiveDate)> {
    let bad = || EtmError::Usage(format!("window must be FROM:TO with ISO dates, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let from = NaiveDate::parse_from_str(a, "%Y-%m-%d").map_err(|_| bad())?;
    let to = NaiveDate::parse_from_str(b, "%Y-%m-%d").map_err(|_| bad())?;
    if to < from {
        return Err(bad());
    }
    Ok((from, to))
}

#[derive(Serialize)]
struct PriceOutput {
    spec: ContractSpec,
    formula: Option<PriceBreakdown>,
    mc: Option<McReport>,
    /// Formula value inside the MC 99% interval.
    in_ci: Option<bool>,
}

fn cmd_price(
    params: &Path,
    kind: ContractKind,
    w: &Window,
    s_bar: f64,
    t_bar: f64,
    method: Method,
    n_paths: usize,
    seed: u64,
    json: bool,
) -> etm::Result<()> {
    let p = io::read_params_file(params)?;
    let (t1, t2) = match (&w.month, w.from, w.to) {
        (Some(m), _, _) => parse_month(m, &p)?,
        (None, Some(a), Some(b)) => (p.day_index(a), p.day_index(b)),
        _ => return Err(EtmError::Usage("give --month or --from/--to".into())),
    };
    let t0 = w.t0.map_or(t1 - 30, |d| p.day_index(d));
    let spec = ContractSpec { kind, s_bar, t_bar, t0, t1, t2 };
    spec.validate()?;
    let mut state = PathState::on_mean(&p, t0 as f64);
    if let Some(s0) = w.s0 {
        if !(s0 > 0.0) {
            return Err(EtmError::Usage("--s0 must be positive".into()));
        }
        state.x = s0.ln();
    }
    if let Some(temp) = w.temp0 {
        state.temp = temp;
    }
    let formula = match method {
        Method::Formula | Method::Both => Some(Pricer::new(CfContext::matched(p.clone())).price(&spec, &state)?),
        Method::Mc => None,
    };
    let mc = match method {
        Method::Mc | Method::Both => Some(mc_price(&spec, &p, &state, &McEngine::new(n_paths, seed))?),
        Method::Formula => None,
    };
    let in_ci = formula.as_ref().zip(mc.as_ref()).map(|(f, m)| m.contains(f.value));
    let out = PriceOutput { spec, formula, mc, in_ci };
    if json {
        return io::write_json(&out, std::io::stdout().lock());
    }
    println!("{kind:?} {} .. {} (valued {})", p.date_at(t1), p.date_at(t2), p.date_at(t0));
    if let Some(f) = &out.formula {
        println!("formula   {}", fmt_human(f.value));
        if let (Some(z), Some(first)) = (f.zeroth, f.first_order) {
            println!("  λ=0 term {}  first order {}", fmt_human(z), fmt_human(first));
        }
    }
    if let Some(m) = &out.mc {
        println!(
            "mc        {}  se {}  99% CI [{}, {}]",
            fmt_human(m.estimate),
            fmt_human(m.std_error),
            fmt_human(m.ci99.0),
            fmt_human(m.ci99.1)
        );
    }
    if let Some(v) = out.in_ci {
        let degenerate = out.mc.is_some_and(|m| m.std_error == 0.0);
        println!("verdict   {}", if degenerate { "no spread in the simulated payoffs" } else if v { "in" } else { "out" });
    }
    Ok(())
}

#[derive(Serialize)]
struct HedgeOutput {
    month: String,
    target: HedgeTarget,
    zero_lambda: bool,
    pnl: PnlReport,
}

#[allow(clippy::too_many_arguments)]
fn cmd_hedge(
    params: &Path,
    month: &str,
    kind: HedgeKind,
    s_bar: f64,
    t_bar: f64,
    zero_lambda: bool,
    n_paths: usize,
    seed: u64,
    coeffs_out: Option<&PathBuf>,
    report: Option<&Path>,
) -> etm::Result<()> {
    let p = io::read_params_file(params)?;
    let (t1, t2) = parse_month(month, &p)?;
    let target = match kind {
        HedgeKind::Ehdd => HedgeTarget::Ehdd,
        HedgeKind::Quanto => HedgeTarget::Quanto,
    };
    let mut ctx = CfContext::matched(p.clone());
    if zero_lambda {
        ctx = ctx.with_lambda(0.0);
    }
    let coeffs = HedgeCoefficients::compute(target, &ctx, t1, t2, s_bar, t_bar)?;
    match coeffs_out {
        Some(path) => {
            let f = std::fs::File::create(path)?;
            io::write_coefficients_csv(&coeffs, &p, f)?;
        }
        None => io::write_coefficients_csv(&coeffs, &p, std::io::stdout().lock())?,
    }
    let pnl = pnl_study(&coeffs, &p, &McEngine::new(n_paths, seed))?;
    eprintln!(
        "{target:?} {month}: unhedged mean {} sd {} | hedged mean {} sd {}",
        fmt_human(pnl.unhedged.mean),
        fmt_human(pnl.unhedged.sd),
        fmt_human(pnl.hedged.mean),
        fmt_human(pnl.hedged.sd)
    );
    let out = HedgeOutput { month: month.to_string(), target, zero_lambda, pnl };
    if let Some(path) = report {
        io::write_json_file(&out, path)?;
    }
    Ok(())
}

fn cmd_estimate(
    prices: &Path,
    temps: &Path,
    window: Option<&str>,
    bins: usize,
    allow_gaps: bool,
    out: &Path,
    report: Option<&Path>,
) -> etm::Result<()> {
    let opts = EstimateOptions { lambda_window: window.map(parse_window).transpose()?, bins: Some(bins) };
    if !(2..=5).contains(&bins) {
        return Err(EtmError::Usage(format!("--bins must be in 2..=5, got {bins}")));
    }
    let series = io::align(&io::read_series_file(prices)?, &io::read_series_file(temps)?, allow_gaps)?;
    let (params, diag) = estimate_params(&series, &opts)?;
    io::write_params_file(&params, out)?;
    match report {
        Some(path) => io::write_json_file(&diag, path),
        None => io::write_json(&diag, std::io::stdout().lock()),
    }
}

#[derive(Serialize)]
struct ValidateOutput {
    suite: String,
    seed: u64,
    passed: bool,
    criteria: Vec<Outcome>,
}

/// Returns whether every criterion passed.
fn cmd_validate(params: Option<&PathBuf>, suite: &str, seed: u64) -> etm::Result<bool> {
    let which: Suite = suite.parse()?;
    let p = params.map(|f| io::read_params_file(f)).transpose()?;
    let criteria = run_suite(which, p.as_ref(), seed);
    for c in &criteria {
        eprintln!("{}", c.summary());
    }
    let passed = criteria.iter().all(|c| c.passed);
    io::write_json(&ValidateOutput { suite: suite.to_string(), seed, passed, criteria }, std::io::stdout().lock())?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Estimate { prices, temps, window, bins, allow_gaps, out, report } => {
            cmd_estimate(prices, temps, window.as_deref(), *bins, *allow_gaps, out, report.as_deref()).map(|_| true)
        }
        Command::Price { params, kind, window, s_bar, t_bar, method, n_paths, seed, json } => {
            cmd_price(params, *kind, window, *s_bar, *t_bar, *method, *n_paths, *seed, *json).map(|_| true)
        }
        Command::Hedge { params, month, kind, s_bar, t_bar, zero_lambda, n_paths, seed, coeffs, report } => cmd_hedge(
            params,
            month,
            *kind,
            *s_bar,
            *t_bar,
            *zero_lambda,
            *n_paths,
            *seed,
            coeffs.as_ref(),
            report.as_deref(),
        )
        .map(|_| true),
        Command::Validate { params, suite, seed } => cmd_validate(params.as_ref(), suite, *seed),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(5),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
