//! Command-line driver: balanced-subgroup queries, order-2 exception
//! scans, membership censuses, function-field curve ranks, interval rank
//! statistics, and the cross-check suites.
//!
//! Text output is human-oriented and unstable; the CSV and JSON schemas
//! are the stable machine contracts. Exit codes: 0 success, 1 failed
//! verification, 2 invalid input, 3 decider disagreement.

use anyhow::{bail, Context};
use balanced_core::balanced::{
    is_balanced_characters, is_balanced_definition, is_balanced_fast, order2_scan,
    BalancedVerdict, Method, Witness,
};
use balanced_core::census::{census_scan, CensusConfig, RecordEmission};
use balanced_core::rank::{rank_ed, rank_stats};
use balanced_core::unitgroup::{cyclic_subgroup, subgroup_generated, Subgroup};
use balanced_core::verify::{run_all, Tier};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "balanced",
    version,
    about = "Balanced subgroups of (Z/dZ)^*: deciders, membership censuses, and ranks of y^2 = x(x+1)(x+u^d) over F_q(u)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format (text is unstable; csv and json are contracts).
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a subgroup of (Z/dZ)^* is balanced.
    Balanced(BalancedArgs),
    /// List balanced order-2 subgroups outside the two ubiquitous families.
    Order2Scan(Order2Args),
    /// Classify every d <= x-max by whether the powers of p balance.
    Census(CensusArgs),
    /// Rank of y^2 = x(x+1)(x+u^d) over F_q(u) with its divisor breakdown.
    Rank(RankArgs),
    /// Average, maximum, and histogram of ranks over an interval of d.
    Stats(StatsArgs),
    /// Run the cross-check suites; nonzero exit on any failure.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct BalancedArgs {
    /// Modulus, at least 3.
    #[arg(long)]
    d: u64,
    /// Subgroup generators (comma-separated); mutually exclusive with --p.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    h: Vec<i64>,
    /// Generate the subgroup from powers of this integer.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "h")]
    p: Option<i64>,
    /// Decision method; `all` cross-checks the three and flags disagreement.
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Def,
    Char,
    Fast,
    All,
}

#[derive(Args)]
struct Order2Args {
    /// Scan all moduli up to this bound.
    #[arg(long)]
    d_max: u64,
}

#[derive(Args)]
struct CensusArgs {
    /// The base whose power subgroup is classified; may be negative.
    #[arg(long, allow_hyphen_values = true)]
    p: i64,
    /// Upper end of the scan.
    #[arg(long)]
    x_max: u64,
    /// Checkpoint positions (comma-separated); defaults to x-max alone.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<u64>,
    /// Retain a record for every scanned d, not just counts.
    #[arg(long)]
    records: bool,
    /// Retain records only for d whose power subgroup balances.
    #[arg(long, conflicts_with = "records")]
    members_only: bool,
    /// Worker count; the output is identical for every value.
    #[arg(long, env = "BALANCED_SHARDS", default_value_t = 1)]
    shards: usize,
    /// Precompute a smallest-prime-factor table (memory for speed).
    #[arg(long)]
    sieve: bool,
}

#[derive(Args)]
struct RankArgs {
    /// Field size, an odd prime power.
    #[arg(long)]
    q: u64,
    /// Exponent in y^2 = x(x+1)(x+u^d); must be coprime to q.
    #[arg(long)]
    d: u64,
}

#[derive(Args)]
struct StatsArgs {
    /// Field size, an odd prime power.
    #[arg(long)]
    q: u64,
    /// Scan d up to this bound.
    #[arg(long)]
    x_max: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Sweep sizes: quick for iteration, full for the complete contracts.
    #[arg(long, value_enum, default_value_t = TierArg::Quick)]
    tier: TierArg,
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TierArg {
    Quick,
    Full,
}

struct Output {
    format: Format,
    path: Option<PathBuf>,
}

impl Output {
    fn write(&self, content: String) -> anyhow::Result<()> {
        match &self.path {
            Some(path) => std::fs::write(path, content)
                .with_context(|| format!("writing {}", path.display())),
            None => {
                print!("{content}");
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = Output {
        format: cli.format,
        path: cli.output,
    };
    match dispatch(cli.command, &out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command, out: &Output) -> anyhow::Result<ExitCode> {
    match command {
        Command::Balanced(args) => cmd_balanced(args, out),
        Command::Order2Scan(args) => cmd_order2_scan(args, out),
        Command::Census(args) => cmd_census(args, out),
        Command::Rank(args) => cmd_rank(args, out),
        Command::Stats(args) => cmd_stats(args, out),
        Command::Verify(args) => cmd_verify(args, out),
    }
}

fn method_name(method: Method) -> &'static str {
    match method {
        Method::Definition => "definition",
        Method::Characters => "characters",
        Method::Fast => "fast",
    }
}

fn witness_json(witness: &Witness) -> serde_json::Value {
    match witness {
        Witness::Coset(elements) => json!({"type": "coset", "elements": elements}),
        Witness::Character(chi) => json!({
            "type": "character",
            "modulus": chi.modulus(),
            "exponents": chi.exponents(),
        }),
    }
}

fn witness_text(witness: &Witness) -> String {
    match witness {
        Witness::Coset(elements) => format!("unbalanced coset {elements:?}"),
        Witness::Character(chi) => format!(
            "witness character with exponents {:?} (values in roots of unity of order {})",
            chi.exponents(),
            chi.value_order()
        ),
    }
}

fn cmd_balanced(args: BalancedArgs, out: &Output) -> anyhow::Result<ExitCode> {
    let d = args.d;
    let sub: Subgroup = match (&args.h[..], args.p) {
        (generators, None) if !generators.is_empty() => subgroup_generated(d, generators)?,
        ([], Some(p)) => cyclic_subgroup(d, p)?,
        _ => bail!("give generators with --h or a base with --p"),
    };
    let methods = match args.method {
        MethodArg::Def => vec![Method::Definition],
        MethodArg::Char => vec![Method::Characters],
        MethodArg::Fast => vec![Method::Fast],
        MethodArg::All => vec![Method::Definition, Method::Characters, Method::Fast],
    };
    let verdicts: Vec<BalancedVerdict> = methods
        .into_iter()
        .map(|m| match m {
            Method::Definition => is_balanced_definition(d, &sub),
            Method::Characters => is_balanced_characters(d, &sub),
            Method::Fast => is_balanced_fast(d, &sub),
        })
        .collect::<Result<_, _>>()?;
    let agree = verdicts.windows(2).all(|w| w[0].balanced == w[1].balanced);

    let content = match out.format {
        Format::Text => {
            let mut s = format!(
                "d={d} generators={:?} order={}\n",
                sub.generators,
                sub.order()
            );
            for v in &verdicts {
                s.push_str(&format!(
                    "  {}: {}\n",
                    method_name(v.method),
                    if v.balanced { "balanced" } else { "not balanced" }
                ));
                if let Some(w) = &v.witness {
                    s.push_str(&format!("    {}\n", witness_text(w)));
                }
            }
            if !agree {
                s.push_str("DISAGREEMENT: the deciders returned mixed verdicts\n");
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("d,method,balanced\n");
            for v in &verdicts {
                s.push_str(&format!(
                    "{d},{},{}\n",
                    method_name(v.method),
                    u8::from(v.balanced)
                ));
            }
            s
        }
        Format::Json => {
            let results: Vec<serde_json::Value> = verdicts
                .iter()
                .map(|v| {
                    json!({
                        "method": method_name(v.method),
                        "balanced": v.balanced,
                        "witness": v.witness.as_ref().map(witness_json),
                    })
                })
                .collect();
            let doc = json!({
                "d": d,
                "generators": sub.generators,
                "order": sub.order(),
                "results": results,
                "agree": agree,
            });
            format!("{doc}\n")
        }
    };
    out.write(content)?;
    if !agree {
        eprintln!("DISAGREEMENT: deciders returned mixed verdicts for d={d}");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_order2_scan(args: Order2Args, out: &Output) -> anyhow::Result<ExitCode> {
    let pairs = order2_scan(args.d_max);
    let content = match out.format {
        Format::Text => {
            let mut s = format!(
                "{} exceptional balanced order-2 pairs up to d={}\n",
                pairs.len(),
                args.d_max
            );
            for (d, h) in &pairs {
                s.push_str(&format!("  d={d} h={h}\n"));
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("d,h\n");
            for (d, h) in &pairs {
                s.push_str(&format!("{d},{h}\n"));
            }
            s
        }
        Format::Json => {
            let items: Vec<serde_json::Value> =
                pairs.iter().map(|(d, h)| json!({"d": d, "h": h})).collect();
            format!("{}\n", json!(items))
        }
    };
    out.write(content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_census(args: CensusArgs, out: &Output) -> anyhow::Result<ExitCode> {
    if args.shards == 0 {
        bail!("--shards must be at least 1");
    }
    let records = if args.records {
        RecordEmission::All
    } else if args.members_only {
        RecordEmission::MembersOnly
    } else {
        RecordEmission::None
    };
    let config = CensusConfig {
        p: args.p,
        x_max: args.x_max,
        checkpoints: args.checkpoints,
        records,
        shards: args.shards,
        use_sieve: args.sieve,
    };
    let table = census_scan(&config)?;
    let content = match out.format {
        Format::Text => {
            let mut s = format!("p={} x_max={}\n", table.p, table.x_max);
            for c in &table.checkpoints {
                s.push_str(&format!(
                    "  x={}: balanced={} half-shift={} negation={} star={} norm={} ratio={}\n",
                    c.x,
                    c.bp,
                    c.bp0,
                    c.bp1,
                    c.bpstar,
                    c.bp0_norm,
                    c.ratio_star_over_b1
                        .map_or("-".to_string(), |v| v.to_string()),
                ));
            }
            if records != RecordEmission::None {
                s.push_str(&format!("  records retained: {}\n", table.records.len()));
            }
            s
        }
        Format::Csv => {
            if records == RecordEmission::None {
                table.checkpoints_csv()
            } else {
                table.records_csv()
            }
        }
        Format::Json => format!("{}\n", table.to_json()),
    };
    out.write(content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_rank(args: RankArgs, out: &Output) -> anyhow::Result<ExitCode> {
    let report = rank_ed(args.q, args.d)?;
    let content = match out.format {
        Format::Text => {
            let mut s = format!(
                "q={} (characteristic {}, degree {}), d={}\n",
                report.q, report.p, report.f, report.d
            );
            for row in &report.rows {
                s.push_str(&format!(
                    "  e={}: {}, phi={}, l={}, contribution {}\n",
                    row.e,
                    if row.balanced {
                        "balanced"
                    } else {
                        "not balanced"
                    },
                    row.phi,
                    row.l,
                    row.contribution
                ));
            }
            s.push_str(&format!("rank = {}\n", report.rank));
            s
        }
        Format::Csv => {
            let mut s = String::from("e,balanced,phi,l,contribution\n");
            for row in &report.rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    row.e,
                    u8::from(row.balanced),
                    row.phi,
                    row.l,
                    row.contribution
                ));
            }
            s.push_str(&format!("# rank,{}\n", report.rank));
            s
        }
        Format::Json => format!("{}\n", report.to_json()),
    };
    out.write(content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(args: StatsArgs, out: &Output) -> anyhow::Result<ExitCode> {
    let stats = rank_stats(args.q, args.x_max)?;
    let content = match out.format {
        Format::Text => {
            let mut s = format!(
                "q={} x_max={}: average rank {}, maximum {} at d={}\n",
                stats.q, stats.x_max, stats.average, stats.max_rank, stats.argmax_d
            );
            s.push_str("rank histogram:\n");
            for (rank, count) in &stats.histogram {
                s.push_str(&format!("  rank {rank}: {count} moduli\n"));
            }
            s
        }
        Format::Csv => stats.to_csv(),
        Format::Json => format!("{}\n", stats.to_json()),
    };
    out.write(content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs, out: &Output) -> anyhow::Result<ExitCode> {
    let tier = match args.tier {
        TierArg::Quick => Tier::Quick,
        TierArg::Full => Tier::Full,
    };
    let checks = run_all(tier);
    let failed = checks.iter().filter(|c| !c.passed).count();
    let content = match out.format {
        Format::Text => {
            let mut s = String::new();
            for c in &checks {
                s.push_str(&format!(
                    "{} {:<24} {:>8.2}s  {}\n",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.seconds,
                    c.detail
                ));
            }
            s.push_str(&format!(
                "{} passed, {} failed\n",
                checks.len() - failed,
                failed
            ));
            s
        }
        Format::Csv => {
            let mut s = String::from("name,passed,seconds\n");
            for c in &checks {
                s.push_str(&format!("{},{},{:.3}\n", c.name, u8::from(c.passed), c.seconds));
            }
            s
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = checks
                .iter()
                .map(|c| {
                    json!({
                        "name": c.name,
                        "passed": c.passed,
                        "seconds": c.seconds,
                        "detail": c.detail,
                    })
                })
                .collect();
            format!("{}\n", json!(items))
        }
    };
    out.write(content)?;
    if failed > 0 {
        eprintln!("{failed} verification check(s) failed");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}
