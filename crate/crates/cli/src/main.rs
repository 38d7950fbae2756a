//! mkteq: equilibrium solvers for exchange markets.
//!
//! Exit codes: 0 success; 2 invalid input or validation failure; 3
//! non-convergence or budget exhaustion; 4 exact-phase verification failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use mkteq_core::config::Overrides;
use mkteq_core::demand::{exact_demand_bundles, smooth_demand_bundles, OraclePrecision};
use mkteq_core::error::Error;
use mkteq_core::exact::solve_exact_market;
use mkteq_core::flow::{build_network, max_flow};
use mkteq_core::gen::{generate_instance, InstanceClass};
use mkteq_core::market::{load_market, market_to_json, Market};
use mkteq_core::rat::{parse_rat, rat_str, Rat};
use mkteq_core::spending::{rounding, solve_spending};
use mkteq_core::verify::check_approx_equilibrium;
use mkteq_core::wgs::{solve_wgs_market, SolveRun, Trace};
use mkteq_core::{Result, SolverConfig};

#[derive(Parser)]
#[command(
    name = "mkteq",
    version,
    about = "Market equilibrium solvers for exchange economies",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute a (1+eps)-approximate equilibrium by ascending prices.
    Solve(SolveArgs),
    /// Compute exact rational equilibrium prices (spending-constraint
    /// markets; exits 0 only if the zero-surplus check passes).
    Exact(ExactArgs),
    /// Evaluate per-agent demand bundles and the surplus vector at given
    /// prices.
    Demand(DemandArgs),
    /// Check whether given prices form an approximate equilibrium.
    Verify(VerifyArgs),
    /// Round a price vector onto M-bit ratios (standalone rounding step).
    RoundPrices(RoundPricesArgs),
    /// Generate a deterministic random market instance.
    Gen(GenArgs),
}

#[derive(Args)]
struct CommonSolveArgs {
    /// Market instance file (JSON).
    #[arg(long)]
    market: PathBuf,
    /// Price-range exponent D1 (prices stay within [1, 2^D1]).
    #[arg(long)]
    d1: Option<u64>,
    /// Surplus-derivative exponent D2 (smooth markets).
    #[arg(long)]
    d2: Option<u64>,
    /// Input bit-length parameter L (defaults to the instance's total).
    #[arg(long)]
    l: Option<u64>,
    /// Grid constant R1 (default 16).
    #[arg(long)]
    r1: Option<u64>,
    /// Step-classification constant R2 (default 128).
    #[arg(long)]
    r2: Option<u64>,
    /// Round budget override.
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Write the per-round trace as newline-delimited JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the equilibrium JSON here instead of stdout.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonSolveArgs,
    /// Accuracy epsilon, as a rational ("1/1000") or decimal ("1e-6").
    #[arg(long)]
    epsilon: String,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    common: CommonSolveArgs,
}

#[derive(Args)]
struct DemandArgs {
    #[arg(long)]
    market: PathBuf,
    /// Prices JSON: either {"prices": {good: "a/b"}} or a bare map.
    #[arg(long)]
    prices: PathBuf,
    /// Oracle accuracy for smooth markets.
    #[arg(long, default_value = "1/1000000")]
    mu: String,
    /// Dump the equality network and its balanced flow as JSON.
    #[arg(long)]
    dump_network: Option<PathBuf>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    market: PathBuf,
    #[arg(long)]
    prices: PathBuf,
    /// Oversell factor to check against (demand <= factor * supply).
    #[arg(long, default_value = "1")]
    mu_factor: String,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RoundPricesArgs {
    #[arg(long)]
    prices: PathBuf,
    /// Rounding bit parameter M.
    #[arg(long)]
    m_bits: u64,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// linear | cobb_douglas | ces | spending_constraint
    #[arg(long)]
    class: String,
    #[arg(long)]
    goods: usize,
    #[arg(long)]
    agents: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mkteq: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Validation(_) | Error::Unsupported(_) | Error::Io(_) => 2,
        Error::NonConvergence { .. } | Error::BitBudget(_) | Error::OracleInconsistent(_) => 3,
        Error::Verification(_) | Error::RankDeficient(_) => 4,
        Error::Internal(_) => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Exact(args) => cmd_exact(args),
        Cmd::Demand(args) => cmd_demand(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::RoundPrices(args) => cmd_round_prices(args),
        Cmd::Gen(args) => cmd_gen(args),
    }
}

fn overrides_from(common: &CommonSolveArgs) -> Result<Overrides> {
    let max_bits = match std::env::var("MKTEQ_MAX_BITS") {
        Ok(v) => Some(v.parse::<u64>().map_err(|_| {
            Error::Validation(format!("MKTEQ_MAX_BITS must be an integer, got {v:?}"))
        })?),
        Err(_) => None,
    };
    Ok(Overrides {
        d1: common.d1,
        d2: common.d2,
        l: common.l,
        r1: common.r1,
        r2: common.r2,
        r: None,
        max_rounds: common.max_rounds,
        max_bits,
    })
}

fn rat_map(market: &Market, v: &[Rat]) -> Value {
    let mut map = Map::new();
    for (name, x) in market.goods.iter().zip(v) {
        map.insert(name.clone(), Value::String(rat_str(x)));
    }
    Value::Object(map)
}

fn write_output(path: &Option<PathBuf>, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Internal(format!("serialize: {e}")))?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_trace(market: &Market, trace: &Trace, path: &PathBuf) -> Result<()> {
    use std::fmt::Write as _;
    let mut out = String::new();
    for st in &trace.states {
        let line = json!({
            "t": st.t,
            "p": st.p.iter().map(rat_str).collect::<Vec<_>>(),
            "s_tilde": st.s_tilde.iter().map(rat_str).collect::<Vec<_>>(),
            "phi": rat_str(&st.phi),
            "k": st.action.as_ref().map(|a| a.k),
            "g1": st.action.as_ref().map(|a| a.g1.clone()),
            "x": st.action.as_ref().map(|a| rat_str(&a.x)),
        });
        let _ = writeln!(
            out,
            "{}",
            serde_json::to_string(&line).map_err(|e| Error::Internal(e.to_string()))?
        );
    }
    let _ = market;
    std::fs::write(path, out).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn equilibrium_json(
    market: &Market,
    prices: &[Rat],
    surplus: &[Rat],
    rounds: u64,
    oracle_calls: u64,
    mode: &str,
) -> Value {
    json!({
        "prices": rat_map(market, prices),
        "surplus": rat_map(market, surplus),
        "rounds": rounds,
        "oracle_calls": oracle_calls,
        "mode": mode,
    })
}

fn finish_solve(
    market: &Market,
    run: &SolveRun,
    config: &SolverConfig,
    common: &CommonSolveArgs,
) -> Result<()> {
    if let Some(path) = &common.trace {
        emit_trace(market, &run.trace, path)?;
    }
    if !run.converged {
        return Err(Error::NonConvergence {
            rounds: run.trace.rounds(),
            detail: format!("round budget {} exhausted", config.max_rounds),
        });
    }
    // Internal verify pass: the returned prices must clear the market within
    // the promised factor before we report success.
    let factor = Rat::from_integer(1.into()) + &config.epsilon;
    let report = check_approx_equilibrium(market, &run.prices, &factor)?;
    if !report.passed {
        return Err(Error::Verification(format!(
            "solver output fails re-verification: {}",
            report.violation.unwrap_or_default()
        )));
    }
    let final_state = run.trace.final_state();
    write_output(
        &common.output,
        &equilibrium_json(
            market,
            &run.prices,
            &final_state.s_tilde,
            run.trace.rounds(),
            run.oracle_calls,
            "approx",
        ),
    )
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let market = load_market(&args.common.market)?;
    let epsilon = parse_rat(&args.epsilon)?;
    let overrides = overrides_from(&args.common)?;
    let config = SolverConfig::derive(&market, &epsilon, &overrides)?;
    let run = if market.all_segment_based() {
        solve_spending(&market, &config)?
    } else if market.all_smooth() {
        solve_wgs_market(&market, &config)?
    } else {
        return Err(Error::Unsupported(
            "markets mixing smooth and segment-based utilities are not supported".into(),
        ));
    };
    finish_solve(&market, &run, &config, &args.common)
}

fn cmd_exact(args: ExactArgs) -> Result<()> {
    let market = load_market(&args.common.market)?;
    let overrides = overrides_from(&args.common)?;
    let outcome = solve_exact_market(&market, &overrides)?;
    if let Some(path) = &args.common.trace {
        emit_trace(&market, &outcome.run.trace, path)?;
    }
    // Exit 0 only with an exactly zero surplus vector.
    let surplus = mkteq_core::demand::exact_oracle(&market, &outcome.prices)?;
    let zero = Rat::from_integer(0.into());
    if surplus.iter().any(|s| *s != zero) {
        return Err(Error::Verification(
            "extracted prices do not clear the market exactly".into(),
        ));
    }
    write_output(
        &args.common.output,
        &equilibrium_json(
            &market,
            &outcome.prices,
            &surplus,
            outcome.run.trace.rounds(),
            outcome.run.oracle_calls,
            "exact",
        ),
    )
}

fn load_prices(market: &Market, path: &PathBuf) -> Result<Vec<Rat>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Parse("prices file must be a JSON object".into()))?;
    let map = match obj.get("prices") {
        Some(Value::Object(inner)) => inner,
        _ => obj,
    };
    let mut prices = vec![Rat::from_integer(0.into()); market.goods_count()];
    let mut seen = vec![false; market.goods_count()];
    for (name, v) in map {
        let j = market.good_index(name)?;
        let r = match v {
            Value::String(s) => parse_rat(s)?,
            Value::Number(n) if n.is_i64() => Rat::from_integer(n.as_i64().unwrap().into()),
            other => {
                return Err(Error::Parse(format!(
                    "price of {name} must be a rational string or integer, got {other}"
                )))
            }
        };
        prices[j] = r;
        seen[j] = true;
    }
    if let Some(j) = seen.iter().position(|s| !s) {
        return Err(Error::Validation(format!(
            "missing price for good {}",
            market.goods[j]
        )));
    }
    Ok(prices)
}

fn cmd_demand(args: DemandArgs) -> Result<()> {
    let market = load_market(&args.market)?;
    let p = load_prices(&market, &args.prices)?;
    let mu = parse_rat(&args.mu)?;
    let (bundles, surplus) = if market.all_segment_based() {
        exact_demand_bundles(&market, &p)?
    } else {
        let precision = OraclePrecision::for_prices(&mu, &p, market.goods_count());
        let bundles = smooth_demand_bundles(&market, &p, &precision)?;
        let surplus = mkteq_core::demand::surplus_from_bundles(&market, &p, &bundles)?;
        (bundles, surplus)
    };
    if let Some(path) = &args.dump_network {
        if market.all_segment_based() {
            let (net, _) = build_network(&market, &p)?;
            let flow = max_flow(&net);
            let dump = json!({
                "source_cap": net.source_cap.iter().map(rat_str).collect::<Vec<_>>(),
                "edges": net.edges.iter().map(|e| json!({
                    "agent": market.agents[e.agent].name,
                    "good": market.goods[e.good],
                    "segment": e.seg,
                    "cap": rat_str(&e.cap),
                })).collect::<Vec<_>>(),
                "spent_good": rat_map(&market, &net.spent_good),
                "max_flow_value": rat_str(&flow.value),
                "sink_flow": rat_map(&market, &flow.sink),
            });
            write_output(&Some(path.clone()), &dump)?;
        } else {
            return Err(Error::Unsupported(
                "network dump is defined for segment-based markets".into(),
            ));
        }
    }
    let mut agents = Map::new();
    for (a, b) in market.agents.iter().zip(&bundles) {
        let mut bundle = Map::new();
        for (name, x) in market.goods.iter().zip(b) {
            bundle.insert(name.clone(), Value::String(rat_str(x)));
        }
        agents.insert(a.name.clone(), Value::Object(bundle));
    }
    write_output(
        &args.output,
        &json!({
            "bundles": agents,
            "surplus": rat_map(&market, &surplus),
        }),
    )
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let market = load_market(&args.market)?;
    let p = load_prices(&market, &args.prices)?;
    let mu_factor = parse_rat(&args.mu_factor)?;
    let report = check_approx_equilibrium(&market, &p, &mu_factor)?;
    write_output(
        &args.output,
        &json!({
            "passed": report.passed,
            "max_oversell": rat_str(&report.max_oversell),
            "optimality_slack": report.optimality_slack,
            "violation": report.violation,
        }),
    )
}

fn cmd_round_prices(args: RoundPricesArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.prices)
        .map_err(|e| Error::Io(format!("{}: {e}", args.prices.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Parse("prices file must be a JSON object".into()))?;
    let map = match obj.get("prices") {
        Some(Value::Object(inner)) => inner,
        _ => obj,
    };
    let mut names: Vec<&String> = map.keys().collect();
    names.sort();
    let mut p = Vec::with_capacity(names.len());
    for name in &names {
        match &map[name.as_str()] {
            Value::String(s) => p.push(parse_rat(s)?),
            Value::Number(n) if n.is_i64() => {
                p.push(Rat::from_integer(n.as_i64().unwrap().into()))
            }
            other => {
                return Err(Error::Parse(format!(
                    "price of {name} must be a rational string or integer, got {other}"
                )))
            }
        }
    }
    let rounded = rounding(&p, args.m_bits)?;
    let mut out = Map::new();
    for (name, x) in names.iter().zip(&rounded) {
        out.insert((*name).clone(), Value::String(rat_str(x)));
    }
    write_output(&args.output, &json!({ "prices": out }))
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let class: InstanceClass = args.class.parse()?;
    let market = generate_instance(class, args.goods, args.agents, args.seed)?;
    write_output(&args.output, &market_to_json(&market))
}
