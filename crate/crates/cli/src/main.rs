//! `qpd`: command-line driver for the quantized Prisoner's Dilemma.
//!
//! Exit status is 0 on success, 1 on domain errors (invalid table, strategy
//! parse errors, ...) and 2 on usage errors.

mod report;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qpd_core::equilibrium::{
    best_response, classify_table, haar_convergence, haar_equilibrium_check, pure_nash_scan,
    StrategySpace,
};
use qpd_core::par::Execution;
use qpd_core::prelude::*;
use qpd_core::protocol::play_monte_carlo;
use qpd_core::strategies::parse_number;
use serde::Serialize;
use serde_json::{json, Value};

use report::{fmt_f64, to_csv, to_json};

#[derive(Parser, Debug)]
#[command(name = "qpd", version, about = "Quantized Prisoner's Dilemma: play, counter, scan and classify")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Payoff table T,R,P,S.
    #[arg(long, global = true, default_value = "5,3,1,0", value_parser = parse_table)]
    table: [f64; 4],

    /// Entangling angle in radians, in [0, pi/2]; accepts `pi` expressions.
    #[arg(long, global = true, default_value = "pi/2", value_parser = parse_angle)]
    gamma: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Root seed for Monte Carlo sampling.
    #[arg(long, global = true, env = "QPD_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Play a profile and report the outcome distribution and payoffs.
    Play {
        #[arg(long)]
        alice: String,
        #[arg(long)]
        bob: String,
        /// Also estimate the result by Monte Carlo with this many samples.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// The ideal counter-strategy against a pure move.
    Counter {
        #[arg(long)]
        against: String,
        #[arg(long, value_enum, default_value_t = Player::B)]
        player: Player,
    },
    /// The equivalent move on the other player's qubit.
    Mirror {
        #[arg(long = "move")]
        mv: String,
    },
    /// Test membership in the two-parameter restricted family.
    Membership {
        #[arg(long = "move")]
        mv: String,
    },
    /// Enumerate grid profiles that are epsilon-equilibria.
    NashScan {
        #[arg(long, value_enum, default_value_t = SpaceKind::Full)]
        space: SpaceKind,
        /// Points per angle; defaults to 12,10,12 (full) or 19,10 (ewl).
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
    },
    /// Best response to a strategy within a strategy space.
    BestResponse {
        #[arg(long)]
        against: String,
        #[arg(long, value_enum, default_value_t = Player::B)]
        player: Player,
        #[arg(long, value_enum, default_value_t = SpaceKind::Full)]
        space: SpaceKind,
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
    },
    /// Check the Haar-random mixed equilibrium against B's strategy.
    Haar {
        #[arg(long, default_value = "C")]
        bob: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Sample sizes for a convergence series.
        #[arg(long, value_delimiter = ',')]
        series: Option<Vec<usize>>,
    },
    /// Classify the table by where (T+R+P+S)/4 falls.
    Classify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
enum Player {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

impl From<Player> for Role {
    fn from(p: Player) -> Role {
        match p {
            Player::A => Role::A,
            Player::B => Role::B,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SpaceKind {
    Full,
    Ewl,
}

fn parse_angle(s: &str) -> Result<f64, String> {
    parse_number(s).map_err(|e| e.to_string())
}

fn parse_table(s: &str) -> Result<[f64; 4], String> {
    let v = s
        .split(',')
        .map(|x| parse_number(x.trim()).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    v.try_into()
        .map_err(|v: Vec<f64>| format!("expected four values T,R,P,S, got {}", v.len()))
}

enum CliError {
    Usage(String),
    Domain(String),
}

impl From<qpd_core::Error> for CliError {
    fn from(e: qpd_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

/// Effective configuration, embedded in every report.
#[derive(Serialize, Default)]
struct Config {
    command: &'static str,
    table: [f64; 4],
    gamma: f64,
    seed: u64,
    format: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    alice: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bob: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    against: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    player: Option<Player>,
    #[serde(rename = "move", skip_serializing_if = "Option::is_none")]
    mv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    space: Option<SpaceKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    series: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'static str,
    config: &'a Config,
    result: Value,
}

struct Ctx {
    table: PayoffTable,
    gamma: EntanglerSpec,
    seed: u64,
    format: Format,
}

fn strategy(expr: &str) -> Result<Strategy, CliError> {
    Ok(parse_strategy(expr)?)
}

fn pure(expr: &str) -> Result<Unitary2, CliError> {
    match parse_strategy(expr)? {
        Strategy::Pure(u) => Ok(u),
        other => Err(CliError::Domain(format!("'{expr}' must denote a pure move, got {other}"))),
    }
}

fn space_for(kind: SpaceKind, grid: Option<Vec<usize>>) -> Result<(StrategySpace, Vec<usize>), CliError> {
    let grid = grid.unwrap_or_else(|| match kind {
        SpaceKind::Full => vec![12, 10, 12],
        SpaceKind::Ewl => vec![19, 10],
    });
    let space = match (kind, grid.as_slice()) {
        (SpaceKind::Full, &[a, b, d]) => StrategySpace::full(a, b, d)?,
        (SpaceKind::Ewl, &[t, p]) => StrategySpace::ewl(t, p)?,
        _ => {
            return Err(CliError::Usage(format!(
                "--grid needs {} counts for space {kind:?}",
                if kind == SpaceKind::Full { 3 } else { 2 }
            )))
        }
    };
    Ok((space, grid))
}

fn dist_json(d: &OutcomeDistribution) -> Value {
    json!({"CC": d.p_cc, "CD": d.p_cd, "DC": d.p_dc, "DD": d.p_dd})
}

fn game_json(r: &GameResult) -> Value {
    json!({"distribution": dist_json(&r.distribution), "payoffs": [r.payoff_a, r.payoff_b]})
}

fn require_json(ctx: &Ctx, command: &str) -> Result<(), CliError> {
    if ctx.format == Format::Csv {
        return Err(CliError::Usage(format!(
            "CSV output is only available for nash-scan and haar, not {command}"
        )));
    }
    Ok(())
}

enum Output {
    Json(Value),
    Csv(Vec<String>, Vec<Vec<String>>),
}

fn run(cli: Cli) -> Result<Vec<u8>, CliError> {
    let [t, r, p, s] = cli.table;
    let mut config = Config {
        table: cli.table,
        gamma: cli.gamma,
        seed: cli.seed,
        format: match cli.format {
            Format::Json => "json",
            Format::Csv => "csv",
        },
        ..Config::default()
    };
    let gamma = EntanglerSpec::new(cli.gamma)?;
    // classify reports its own table errors, including boundary ties
    let table = PayoffTable { t, r, p, s, strict_iterated: false };
    if !matches!(cli.command, Command::Classify) {
        table.validate()?;
    }
    let ctx = Ctx {
        table,
        gamma,
        seed: cli.seed,
        format: cli.format,
    };

    let (command, output) = match cli.command {
        Command::Play { alice, bob, samples } => {
            require_json(&ctx, "play")?;
            let (a, b) = (strategy(&alice)?, strategy(&bob)?);
            let exact = play(&a, &b, &ctx.table, &ctx.gamma);
            let mut result = json!({
                "alice": a.to_string(),
                "bob": b.to_string(),
                "exact": game_json(&exact),
            });
            if let Some(n) = samples {
                if n == 0 {
                    return Err(CliError::Usage("--samples must be at least 1".into()));
                }
                let mc = play_monte_carlo(&a, &b, &ctx.table, &ctx.gamma, n, ctx.seed, Execution::default());
                result["monte_carlo"] = game_json(&mc);
            }
            config.alice = Some(alice);
            config.bob = Some(bob);
            config.samples = samples;
            ("play", Output::Json(result))
        }
        Command::Counter { against, player } => {
            require_json(&ctx, "counter")?;
            let x = pure(&against)?;
            let role = Role::from(player);
            let c = counter_strategy(&x, role);
            let profile = match role {
                Role::A => (c, x),
                Role::B => (x, c),
            };
            let r = play(&profile.0.into(), &profile.1.into(), &ctx.table, &ctx.gamma);
            config.against = Some(against);
            config.player = Some(player);
            (
                "counter",
                Output::Json(json!({
                    "against": x,
                    "player": role.to_string(),
                    "counter": c,
                    "expression": c.to_string(),
                    "outcome": game_json(&r),
                })),
            )
        }
        Command::Mirror { mv } => {
            require_json(&ctx, "mirror")?;
            let x = pure(&mv)?;
            let y = mirror(&x);
            let psi = initial_state(&EntanglerSpec::maximal());
            let fid = state_fidelity(
                &tensor_apply(&x, &Unitary2::IDENTITY, &psi),
                &tensor_apply(&Unitary2::IDENTITY, &y, &psi),
            );
            config.mv = Some(mv);
            (
                "mirror",
                Output::Json(json!({
                    "move": x,
                    "mirror": y,
                    "expression": y.to_string(),
                    "relation_fidelity": fid,
                })),
            )
        }
        Command::Membership { mv } => {
            require_json(&ctx, "membership")?;
            let x = pure(&mv)?;
            let params = ewl_membership(&x);
            config.mv = Some(mv);
            (
                "membership",
                Output::Json(json!({
                    "move": x,
                    "member": params.is_some(),
                    "params": params,
                })),
            )
        }
        Command::NashScan { space, grid, epsilon } => {
            let (sp, grid) = space_for(space, grid)?;
            let scan = pure_nash_scan(&sp, epsilon, &ctx.table, &ctx.gamma)?;
            config.space = Some(space);
            config.grid = Some(grid);
            config.epsilon = Some(epsilon);
            let out = match ctx.format {
                Format::Json => {
                    let eq: Vec<Value> = scan
                        .equilibria
                        .iter()
                        .map(|e| {
                            let (pa, pb) = (&scan.points[e.a_index], &scan.points[e.b_index]);
                            json!({
                                "a_index": e.a_index,
                                "b_index": e.b_index,
                                "a_coords": pa.coords,
                                "b_coords": pb.coords,
                                "a_move": pa.unitary.to_string(),
                                "b_move": pb.unitary.to_string(),
                                "payoffs": [e.payoff_a, e.payoff_b],
                                "gains": [e.gain_a, e.gain_b],
                            })
                        })
                        .collect();
                    Output::Json(json!({
                        "space": scan.space,
                        "profiles_checked": scan.profiles_checked,
                        "min_max_gain": scan.min_max_gain,
                        "count": eq.len(),
                        "equilibria": eq,
                    }))
                }
                Format::Csv => {
                    let names: &[&str] = match space {
                        SpaceKind::Full => &["alpha", "beta", "delta"],
                        SpaceKind::Ewl => &["theta", "phi"],
                    };
                    let mut header = vec!["a_index".to_string(), "b_index".to_string()];
                    for who in ["a", "b"] {
                        header.extend(names.iter().map(|n| format!("{who}_{n}")));
                    }
                    header.extend(["payoff_a", "payoff_b", "gain_a", "gain_b"].map(String::from));
                    let rows = scan
                        .equilibria
                        .iter()
                        .map(|e| {
                            let mut row = vec![e.a_index.to_string(), e.b_index.to_string()];
                            row.extend(scan.points[e.a_index].coords.iter().map(|&c| fmt_f64(c)));
                            row.extend(scan.points[e.b_index].coords.iter().map(|&c| fmt_f64(c)));
                            row.extend([e.payoff_a, e.payoff_b, e.gain_a, e.gain_b].map(fmt_f64));
                            row
                        })
                        .collect();
                    Output::Csv(header, rows)
                }
            };
            ("nash-scan", out)
        }
        Command::BestResponse { against, player, space, grid } => {
            require_json(&ctx, "best-response")?;
            let opp = strategy(&against)?;
            let (sp, grid) = space_for(space, grid)?;
            let br = best_response(&opp, player.into(), &sp, &ctx.table, &ctx.gamma)?;
            config.against = Some(against);
            config.player = Some(player);
            config.space = Some(space);
            config.grid = Some(grid);
            (
                "best-response",
                Output::Json(json!({
                    "move": br.unitary,
                    "expression": br.unitary.to_string(),
                    "payoff": br.payoff,
                    "method": br.method,
                    "coords": br.coords,
                })),
            )
        }
        Command::Haar { bob, samples, series } => {
            let b = strategy(&bob)?;
            if samples == 0 || series.as_ref().is_some_and(|s| s.contains(&0)) {
                return Err(CliError::Usage("sample counts must be at least 1".into()));
            }
            let report = haar_equilibrium_check(&b, samples, ctx.seed, &ctx.table, &ctx.gamma)?;
            let sizes = series.clone().unwrap_or_else(|| vec![samples]);
            let conv = haar_convergence(&b, &sizes, ctx.seed, &ctx.gamma, Execution::default());
            config.bob = Some(bob);
            config.samples = Some(samples);
            config.series = series;
            let out = match ctx.format {
                Format::Json => Output::Json(json!({
                    "analytic": dist_json(&report.analytic),
                    "monte_carlo": dist_json(&report.monte_carlo),
                    "max_mc_deviation": report.max_mc_deviation,
                    "mc_tolerance": report.mc_tolerance,
                    "expected_payoffs": [report.expected_payoff_a, report.expected_payoff_b],
                    "max_deviation_gain": report.max_deviation_gain,
                    "series": conv.iter().map(|c| json!({
                        "samples": c.samples,
                        "distribution": dist_json(&c.distribution),
                        "max_deviation": c.max_deviation,
                    })).collect::<Vec<_>>(),
                })),
                Format::Csv => {
                    let header = ["samples", "p_cc", "p_cd", "p_dc", "p_dd", "max_deviation"]
                        .map(String::from)
                        .to_vec();
                    let rows = conv
                        .iter()
                        .map(|c| {
                            let mut row = vec![c.samples.to_string()];
                            row.extend(c.distribution.to_array().map(fmt_f64));
                            row.push(fmt_f64(c.max_deviation));
                            row
                        })
                        .collect();
                    Output::Csv(header, rows)
                }
            };
            ("haar", out)
        }
        Command::Classify => {
            require_json(&ctx, "classify")?;
            let class = classify_table(&ctx.table)?;
            (
                "classify",
                Output::Json(json!({
                    "classification": class,
                    "qbar": ctx.table.quantum_equilibrium_payoff(),
                    "classical_equilibrium": ctx.table.p,
                    "cooperative": ctx.table.r,
                })),
            )
        }
    };
    config.command = command;

    match output {
        Output::Json(result) => to_json(&Report {
            command,
            config: &config,
            result,
        })
        .map_err(|e| CliError::Domain(e.to_string())),
        Output::Csv(header, rows) => to_csv(&header, &rows).map_err(|e| CliError::Domain(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    let bytes = match run(cli) {
        Ok(b) => b,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let written = match output {
        Some(path) => fs::write(&path, &bytes),
        None => std::io::stdout().write_all(&bytes),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
