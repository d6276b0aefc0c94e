use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use supersplit::catalog::{builtin, tangent_report};
use supersplit::cohomology::rao_table_windowed;
use supersplit::sheaf::{make_split, Bundle};
use supersplit::splitting::{split_certify, Verdict, DEFAULT_SEED};
use supersplit::superring::SuperSpaceSig;
use supersplit::Error;

const EXIT_MISMATCH: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NOT_STABILIZED: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Parser)]
#[command(name = "supersplit", version, about = "Cohomology and splitting of supervector bundles on P^{n|m}")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print H^i(E(t)) over a range of twists.
    Cohomology(CohomologyArgs),
    /// Decide whether a bundle splits and print the certificate.
    SplitCheck(SplitArgs),
    /// Reproduce the T_{P^{1|1}} computations against the quoted values.
    Examples(ExampleArgs),
    /// Parse a bundle and print it back as JSON.
    RoundTrip(Source),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Table,
    Json,
}

#[derive(Args)]
struct Source {
    /// Superspace as `n,m`; required with --builtin.
    #[arg(long, value_parser = parse_space)]
    space: Option<SuperSpaceSig>,
    /// Builtin bundle: O, O(a), zero, split:a,b;c, tangent, cotangent.
    #[arg(long, conflicts_with = "input")]
    builtin: Option<String>,
    /// Bundle JSON file, or inline JSON starting with `{`.
    #[arg(long)]
    input: Option<String>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct CohomologyArgs {
    #[command(flatten)]
    source: Source,
    /// Single twist; ignored when --window is given.
    #[arg(long, allow_hyphen_values = true)]
    twist: Option<i64>,
    /// Cohomological degree; all degrees when omitted.
    #[arg(long)]
    i: Option<usize>,
    /// Twist range `A,B`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    window: Option<(i64, i64)>,
    /// Pin the Čech pole window instead of the automatic one.
    #[arg(long)]
    cech_window: Option<i64>,
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct ExampleArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Replace the tangent bundle by the split model O(2) + ΠO(1).
    #[arg(long, hide = true)]
    substitute_split_tangent: bool,
}

fn parse_pair(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected A,B, got {s:?}"))?;
    let a = a.trim().parse().map_err(|_| format!("bad integer {a:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad integer {b:?}"))?;
    Ok((a, b))
}

fn parse_space(s: &str) -> Result<SuperSpaceSig, String> {
    let (n, m) = parse_pair(s)?;
    if n < 0 || m < 0 {
        return Err(format!("negative dimension in {s:?}"));
    }
    SuperSpaceSig::new(n as usize, m as usize).map_err(|e| e.to_string())
}

/// Failure of a command, mapped onto the exit-code contract.
enum Failure {
    Input(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(Error::NotStabilized { .. }) => EXIT_NOT_STABILIZED,
            _ => EXIT_INPUT,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Failure::Core(Error::NotStabilized {
                degree,
                twist,
                window,
                next,
                low,
                high,
            }) => json!({
                "error": "NOT_STABILIZED",
                "degree": degree,
                "twist": twist,
                "window": window,
                "next_window": next,
                "low": low,
                "high": high,
            }),
            Failure::Core(e) => json!({ "error": "INVALID_INPUT", "message": e.to_string() }),
            Failure::Input(m) => json!({ "error": "INVALID_INPUT", "message": m }),
        }
    }
}

fn load(src: &Source) -> Result<Bundle, Failure> {
    match (&src.builtin, &src.input) {
        (Some(name), _) => {
            let space = src
                .space
                .ok_or_else(|| Failure::Input("--builtin needs --space n,m".into()))?;
            Ok(builtin(name, space)?)
        }
        (None, Some(input)) => {
            let text = if input.trim_start().starts_with('{') {
                input.clone()
            } else {
                fs::read_to_string(input)
                    .map_err(|e| Failure::Input(format!("cannot read {input}: {e}")))?
            };
            Ok(Bundle::from_json_str(&text)?)
        }
        (None, None) => Err(Failure::Input("give --builtin or --input".into())),
    }
}

fn cohomology(args: &CohomologyArgs) -> Result<u8, Failure> {
    let bundle = load(&args.source)?;
    let (lo, hi) = match (args.window, args.twist) {
        (Some(w), _) => w,
        (None, Some(t)) => (t, t),
        (None, None) => (-3, 3),
    };
    if lo > hi {
        return Err(Failure::Input(format!("window {lo},{hi} has t_min > t_max")));
    }
    let n = bundle.space().n;
    let degrees: Vec<usize> = match args.i {
        Some(i) if i > n => return Err(Failure::Input(format!("degree {i} exceeds n = {n}"))),
        Some(i) => vec![i],
        None => (0..=n).collect(),
    };
    let tables = degrees
        .iter()
        .map(|&i| rao_table_windowed(&bundle, i, lo, hi, args.cech_window))
        .collect::<Result<Vec<_>, _>>()?;
    match args.source.format {
        Format::Json => {
            let out = json!({
                "space": bundle.space().to_string(),
                "tables": tables.iter().map(|t| t.to_json()).collect::<Vec<_>>(),
            });
            println!("{out}");
        }
        Format::Table if lo == hi && tables.len() == 1 => {
            println!("{}", tables[0].entries[&lo]);
        }
        Format::Table => {
            for t in &tables {
                print!("{}", t.to_text());
            }
        }
    }
    Ok(0)
}

fn split_check(args: &SplitArgs) -> Result<u8, Failure> {
    let bundle = load(&args.source)?;
    let cert = split_certify(&bundle.to_transition(), args.seed)?;
    match args.source.format {
        Format::Json => println!("{}", cert.to_json()),
        Format::Table => {
            println!("verdict: {}", cert.to_json()["verdict"].as_str().unwrap_or("?"));
            println!("even: {:?}", cert.even);
            println!("odd: {:?}", cert.odd);
            if let Some(w) = &cert.witness {
                println!("witness: {w}");
            }
        }
    }
    Ok(if cert.verdict == Verdict::Inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        0
    })
}

fn examples(args: &ExampleArgs) -> Result<u8, Failure> {
    let space = SuperSpaceSig::new(1, 1)?;
    let tangent = if args.substitute_split_tangent {
        make_split(space, &[2], &[1])
    } else {
        builtin("tangent", space)?.to_transition()
    };
    let report = tangent_report(&tangent, args.seed)?;
    match args.format {
        Format::Json => println!("{}", report.to_json()),
        Format::Table => print!("{}", report.to_text()),
    }
    Ok(if report.mismatches() > 0 { EXIT_MISMATCH } else { 0 })
}

fn round_trip(src: &Source) -> Result<u8, Failure> {
    let bundle = load(src)?;
    println!("{}", bundle.to_json_string());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, format) = match &cli.command {
        Command::Cohomology(a) => (cohomology(a), a.source.format),
        Command::SplitCheck(a) => (split_check(a), a.source.format),
        Command::Examples(a) => (examples(a), a.format),
        Command::RoundTrip(a) => (round_trip(a), a.format),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            match format {
                Format::Json => println!("{}", f.to_json()),
                Format::Table => eprintln!("error: {}", f.to_json()),
            }
            ExitCode::from(f.code())
        }
    }
}
