use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use tslsat::engine::report::{render_json, render_text};
use tslsat::engine::{Outcome, Prepared, Verdict};
use tslsat::euf::ExternalSolver;
use tslsat::generators::{
    desugar_goto, encode_goto, gen_random, gen_scal_sat, gen_scal_unsat, load_corpus_dir, parse_goto, random_batch,
    RandomSpec, Theory,
};
use tslsat::{parse_formula, run_checker, run_validity, CheckerConfig, Mode};

const EXIT_SAT: u8 = 0;
const EXIT_UNSAT: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "tslsat", version, about = "Satisfiability checking for TSL modulo uninterpreted functions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide satisfiability of a formula (file, or stdin when absent or `-`).
    Check {
        input: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Decide validity by checking the negation.
    Valid {
        input: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Generate benchmark formulas.
    Gen {
        #[command(subcommand)]
        family: GenCmd,
    },
    /// Translate a GOTO program into a formula.
    EncodeGoto {
        program: PathBuf,
        #[arg(long, value_enum, default_value_t = TheoryArg::Tu)]
        theory: TheoryArg,
    },
    /// Check every `*.tsl` file of a corpus directory against its `#!expect` header.
    Bench {
        dir: PathBuf,
        /// Do not fail the run because of UNKNOWN results.
        #[arg(long)]
        soft_fail: bool,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    ScalSat {
        n: usize,
    },
    ScalUnsat {
        n: usize,
    },
    Random {
        #[arg(long, env = "TSLSAT_SEED", default_value_t = 0)]
        seed: u64,
        /// Syntax tree size.
        #[arg(long, default_value_t = 20)]
        size: usize,
        #[arg(long, default_value_t = 2)]
        cells: usize,
        #[arg(long, default_value_t = 2)]
        updates: usize,
        #[arg(long, default_value_t = 2)]
        predicates: usize,
        /// Number of formulas, with consecutive seeds.
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// The fixed batch of 30 formulas for each size 5, 10, ..., 95.
        #[arg(long, conflicts_with_all = ["size", "count"])]
        batch: bool,
        /// Write one corpus file per formula into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Finitary,
    General,
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoryArg {
    Tu,
    Te,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Finitary)]
    mode: ModeArg,
    /// Seconds.
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(1..))]
    timeout: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    workers: u8,
    /// Single worker with a fixed exploration order.
    #[arg(long, conflicts_with = "workers")]
    deterministic: bool,
    #[arg(long, default_value_t = 4096)]
    letter_cap: usize,
    #[arg(long, default_value_t = 5_000_000)]
    block_budget: usize,
    #[arg(long)]
    json: bool,
    /// Use this HOA automaton instead of the built-in LTL translation.
    #[arg(long, value_name = "HOA")]
    nba_from: Option<PathBuf>,
    /// Write every congruence query as an SMT-LIB script into this directory.
    #[arg(long, value_name = "DIR")]
    smt_dump: Option<PathBuf>,
    /// Cross-check every query with an external solver, e.g. `z3 -in`.
    #[arg(long, value_name = "CMD")]
    solver: Option<String>,
    #[arg(long)]
    no_empty_shortcut: bool,
}

struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

impl RunArgs {
    /// The checker configuration and the digest of the injected automaton, if any.
    fn config(&self) -> Result<(CheckerConfig, Option<String>), InputError> {
        let mut cfg = CheckerConfig {
            mode: match self.mode {
                ModeArg::Finitary => Mode::Finitary,
                ModeArg::General => Mode::General,
            },
            timeout: Duration::from_secs(self.timeout),
            workers: if self.deterministic { 1 } else { self.workers as usize },
            letter_cap: self.letter_cap,
            block_budget: self.block_budget,
            smt_dump: self.smt_dump.clone(),
            empty_shortcut: !self.no_empty_shortcut,
            ..CheckerConfig::default()
        };
        let mut digest = None;
        if let Some(p) = &self.nba_from {
            let bytes = std::fs::read(p).map_err(|e| InputError(format!("{}: {e}", p.display())))?;
            digest = Some(hex(&Sha256::digest(&bytes)));
            cfg.nba_hoa = Some(String::from_utf8(bytes).map_err(|_| InputError(format!("{}: not UTF-8", p.display())))?);
        }
        if let Some(cmd) = &self.solver {
            cfg.solver = Some(ExternalSolver::from_command(cmd).ok_or_else(|| InputError("empty --solver command".into()))?);
        }
        Ok((cfg, digest))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn read_input(input: Option<&Path>) -> Result<String, InputError> {
    match input {
        None => read_stdin(),
        Some(p) if p.as_os_str() == "-" => read_stdin(),
        Some(p) => std::fs::read_to_string(p).map_err(|e| InputError(format!("{}: {e}", p.display()))),
    }
}

fn read_stdin() -> Result<String, InputError> {
    let mut s = String::new();
    std::io::stdin().read_to_string(&mut s)?;
    Ok(s)
}

/// Blanks `#` header lines so that parse positions still match the file.
fn strip_headers(text: &str) -> String {
    text.lines().map(|l| if l.trim_start().starts_with('#') { "" } else { l }).collect::<Vec<_>>().join("\n")
}

fn exit_code(o: &Outcome) -> u8 {
    match o {
        Outcome::Sat(_) => EXIT_SAT,
        Outcome::Unsat(_) => EXIT_UNSAT,
        Outcome::Unknown(_) => EXIT_UNKNOWN,
    }
}

fn report(v: &Verdict, prep: Option<&Prepared>, json: bool, digest: Option<&str>) -> String {
    if json {
        let mut o = render_json(v, prep);
        if let Some(d) = digest {
            o["nba_sha256"] = Value::String(d.to_string());
        }
        let mut s = o.to_string();
        s.push('\n');
        s
    } else {
        let mut s = render_text(v, prep);
        if let Some(d) = digest {
            s.push_str(&format!("nba-sha256: {d}\n"));
        }
        s
    }
}

fn cmd_check(input: Option<&Path>, run: &RunArgs, validity: bool) -> Result<u8, InputError> {
    let (cfg, digest) = run.config()?;
    let text = strip_headers(&read_input(input)?);
    let problem = parse_formula(&text, None)?;
    let (v, prep) = if validity { run_validity(&problem, &cfg)? } else { run_checker(&problem, &cfg)? };
    let mut out = report(&v, prep.as_ref(), run.json, digest.as_deref());
    if validity && !run.json {
        // The negation's verdict, restated for the original formula.
        let first = match &v.outcome {
            Outcome::Sat(_) => "INVALID".to_string(),
            Outcome::Unsat(_) => "VALID".to_string(),
            Outcome::Unknown(r) => format!("UNKNOWN({r})"),
        };
        let rest = out.split_once('\n').map(|(_, r)| r.to_string()).unwrap_or_default();
        out = format!("{first}\n{rest}");
    }
    print!("{out}");
    Ok(match (&v.outcome, validity) {
        (Outcome::Sat(_), true) => EXIT_UNSAT,
        (Outcome::Unsat(_), true) => EXIT_SAT,
        (o, _) => exit_code(o),
    })
}

fn cmd_gen(family: &GenCmd) -> Result<u8, InputError> {
    match family {
        GenCmd::ScalSat { n } => println!("{}", gen_scal_sat(*n)),
        GenCmd::ScalUnsat { n } => println!("{}", gen_scal_unsat(*n)?),
        GenCmd::Random { seed, size, cells, updates, predicates, count, batch, out } => {
            let specs: Vec<RandomSpec> = if *batch {
                random_batch(*seed)
            } else {
                (0..*count)
                    .map(|k| RandomSpec {
                        cells: *cells,
                        updates: *updates,
                        predicates: *predicates,
                        ..RandomSpec::new(seed.wrapping_add(k), *size)
                    })
                    .collect()
            };
            if let Some(dir) = out {
                std::fs::create_dir_all(dir)?;
            }
            for (i, spec) in specs.iter().enumerate() {
                let f = gen_random(spec);
                match out {
                    None => println!("{f}"),
                    Some(dir) => {
                        let name = format!("random_{:04}_s{}_n{}", i, spec.seed, spec.tree_size);
                        let header = format!("#!name: {name}\n#!tags: random\n// {}\n", serde_json::to_string(spec)?);
                        std::fs::write(dir.join(format!("{name}.tsl")), format!("{header}{f}\n"))?;
                    }
                }
            }
        }
    }
    Ok(0)
}

fn cmd_encode_goto(program: &Path, theory: TheoryArg) -> Result<u8, InputError> {
    let text = std::fs::read_to_string(program).map_err(|e| InputError(format!("{}: {e}", program.display())))?;
    let g = desugar_goto(&parse_goto(&text)?)?;
    let theory = match theory {
        TheoryArg::Tu => Theory::Tu,
        TheoryArg::Te => Theory::Te,
    };
    println!("{}", encode_goto(&g, theory)?);
    Ok(0)
}

fn cmd_bench(dir: &Path, soft_fail: bool, run: &RunArgs) -> Result<u8, InputError> {
    let (cfg, digest) = run.config()?;
    let entries = load_corpus_dir(dir)?;
    let (mut mismatches, mut unknowns) = (0usize, 0usize);
    if !run.json {
        println!("{:<28} {:>8} {:>10} {:>10}", "name", "expected", "got", "time_s");
    }
    for e in &entries {
        let expected = e.expect.map(|x| x.label()).unwrap_or("-");
        let mut row = json!({ "name": e.name, "file": e.file, "expected": expected });
        let got = match parse_formula(&e.text, None) {
            Err(err) => {
                row["error"] = Value::String(err.to_string());
                row["stats"] = json!({ "wall_ms": 0 });
                "ERROR".to_string()
            }
            Ok(problem) => match run_checker(&problem, &cfg) {
                Err(err) => {
                    row["error"] = Value::String(err.to_string());
                    row["stats"] = json!({ "wall_ms": 0 });
                    "ERROR".to_string()
                }
                Ok((v, _)) => {
                    row["stats"] = serde_json::to_value(&v.stats)?;
                    if let Outcome::Unknown(r) = &v.outcome {
                        row["reason"] = Value::String(r.to_string());
                    }
                    v.outcome.label().to_string()
                }
            },
        };
        let ok = match got.as_str() {
            "UNKNOWN" => {
                unknowns += 1;
                soft_fail
            }
            g => e.expect.is_none() || g == expected,
        };
        if !ok && got != "UNKNOWN" {
            mismatches += 1;
        }
        row["got"] = Value::String(got.clone());
        row["ok"] = Value::Bool(ok);
        if let Some(d) = &digest {
            row["nba_sha256"] = Value::String(d.clone());
        }
        if run.json {
            println!("{row}");
        } else {
            let secs = row["stats"]["wall_ms"].as_u64().unwrap_or(0) as f64 / 1000.0;
            let mark = if ok { "" } else { "  <-- mismatch" };
            println!("{:<28} {:>8} {:>10} {:>10.2}{mark}", e.name, expected, got, secs);
        }
    }
    eprintln!("{} instances, {mismatches} mismatches, {unknowns} unknown", entries.len());
    Ok(if mismatches > 0 || (unknowns > 0 && !soft_fail) { 1 } else { 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INPUT),
            };
        }
    };
    let r = match &cli.cmd {
        Cmd::Check { input, run } => cmd_check(input.as_deref(), run, false),
        Cmd::Valid { input, run } => cmd_check(input.as_deref(), run, true),
        Cmd::Gen { family } => cmd_gen(family),
        Cmd::EncodeGoto { program, theory } => cmd_encode_goto(program, *theory),
        Cmd::Bench { dir, soft_fail, run } => cmd_bench(dir, *soft_fail, run),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
