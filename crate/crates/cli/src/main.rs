use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use latmid::dvr::fmt_rat;
use latmid::forms::set_dual_fault;
use latmid::fp::FpMat;
use latmid::isoforms::FormedKGModule;
use latmid::lattices::middles;
use latmid::pipeline::{reduce_with_form_from, ReductionReport};
use latmid::problem::{MiddlesFile, ProblemFile};
use latmid::suite::{middle_checks, random_pair, run, SuiteConfig, CRITERIA};
use latmid::witt::WittClass;
use latmid::{Lattice, QMat};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;

#[derive(Parser)]
#[command(name = "latmid", version, about = "Lattice middles and reduction of forms modulo p")]
struct Cli {
    /// Corrupt every dual lattice computation (harness self-check).
    #[arg(long, global = true, hide = true)]
    inject_fault: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reduce an invariant form modulo p and check the result.
    Reduce {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        /// Seed for the randomized semisimplification (overrides the file).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print m₋, m₊, L∩M and L+M for two lattices.
    Middles {
        /// File with `p`, `L` and `M`; omit with --random.
        file: Option<PathBuf>,
        /// Re-check the middle-lattice laws.
        #[arg(long)]
        verify: bool,
        /// Use N random pairs instead of a file.
        #[arg(long, value_name = "N")]
        random: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the property suite.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cases per criterion (default: the full acceptance sizes).
        #[arg(long, alias = "sizes")]
        cases: Option<usize>,
        #[arg(long, default_value_t = 6)]
        max_dim: usize,
        #[arg(long, value_delimiter = ',', default_value = "3,5,7")]
        primes: Vec<u64>,
    },
}

struct Paint(bool);

impl Paint {
    fn new() -> Paint {
        let off = std::env::var("LM_COLOR").is_ok_and(|v| v == "0");
        Paint(!off && std::io::stdout().is_terminal())
    }

    fn verdict(&self, ok: bool, yes: &str, no: &str) -> String {
        match (self.0, ok) {
            (true, true) => format!("\x1b[32m{yes}\x1b[0m"),
            (true, false) => format!("\x1b[31m{no}\x1b[0m"),
            (false, true) => yes.to_string(),
            (false, false) => no.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })
}

fn precondition(e: latmid::Error) -> ExitCode {
    eprintln!("precondition violated: {e}");
    ExitCode::from(EXIT_PRECONDITION)
}

fn qmat_json(m: &QMat) -> Value {
    m.to_rows().iter().map(|r| r.iter().map(fmt_rat).collect::<Vec<_>>()).collect()
}

fn fpmat_json(m: &FpMat) -> Value {
    json!(m.to_rows())
}

fn formed_json(e: &Option<FormedKGModule>) -> Value {
    match e {
        None => Value::Null,
        Some(e) => json!({
            "dim": e.dim(),
            "generators": e.module().generators().iter().map(fpmat_json).collect::<Vec<_>>(),
            "form": fpmat_json(e.form().matrix()),
        }),
    }
}

fn witt_json(w: &WittClass) -> Value {
    json!({ "rank_parity": w.rank_parity(), "disc": w.disc_class() })
}

/// The machine-readable report. Keys are sorted, so re-serializing a parsed
/// document gives the same bytes.
fn report_json(r: &ReductionReport) -> Value {
    let witt = match (&r.springer, &r.witt_e) {
        (Some((d1, d2)), Some((w1, w2))) => json!({
            "d1": witt_json(d1),
            "d2": witt_json(d2),
            "e1": witt_json(w1),
            "e2": witt_json(w2),
        }),
        _ => Value::Null,
    };
    json!({
        "input": {
            "dim": r.input.dim,
            "epsilon": r.input.epsilon.sign(),
            "p": r.input.p,
            "generators": r.input.generators,
        },
        "asd_basis": qmat_json(&r.asd_lattice.basis()),
        "e1": formed_json(&r.e1),
        "e2": formed_json(&r.e2),
        "witt": witt,
        "checks": r.checks.iter().map(|c| json!({ "name": c.name, "ok": c.ok })).collect::<Vec<_>>(),
    })
}

fn cmd_reduce(path: &Path, as_json: bool, seed: Option<u64>) -> ExitCode {
    let text = match read(path) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let pf = match ProblemFile::parse(&text) {
        Ok(pf) => pf,
        Err(e) => {
            eprintln!("parse error: {e}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let seed = seed.unwrap_or(pf.seed);
    let report = match reduce_with_form_from(&pf.rep(), &pf.form(), &pf.start_lattice(), seed) {
        Ok(r) => r,
        Err(e) => return precondition(e),
    };
    if as_json {
        println!("{}", serde_json::to_string_pretty(&report_json(&report)).expect("serializable"));
    } else {
        let paint = Paint::new();
        let mut text = report.to_string();
        if paint.0 {
            text = text.replace("[ok]", &paint.verdict(true, "[ok]", "")).replace("[FAILED]", &paint.verdict(false, "", "[FAILED]"));
        }
        print!("{text}");
    }
    if report.all_ok() {
        ExitCode::SUCCESS
    } else {
        eprintln!(
            "check failed: {}. The input satisfied every precondition, so this is an implementation bug.",
            report.failed().join(", ")
        );
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}

/// Prints the four lattices; returns whether every law held (when verifying).
fn show_middles(l: &Lattice, m: &Lattice, verify: bool, paint: &Paint) -> Result<bool, latmid::Error> {
    let (lo, hi) = middles(l, m)?;
    println!("m-   = {lo}");
    println!("m+   = {hi}");
    println!("L∩M  = {}", l.intersection(m)?);
    println!("L+M  = {}", l.sum(m)?);
    if !verify {
        return Ok(true);
    }
    let mut all = true;
    for (name, ok) in middle_checks(l, m, (-1, 2))? {
        all &= ok;
        println!("  {} {name}", paint.verdict(ok, "[ok]", "[FAILED]"));
    }
    Ok(all)
}

fn cmd_middles(file: Option<&Path>, verify: bool, random: Option<u64>, seed: u64) -> ExitCode {
    let paint = Paint::new();
    let result = match (file, random) {
        (Some(path), None) => {
            let text = match read(path) {
                Ok(t) => t,
                Err(code) => return code,
            };
            let mf = match MiddlesFile::parse(&text) {
                Ok(mf) => mf,
                Err(e) => {
                    eprintln!("parse error: {e}");
                    return ExitCode::from(EXIT_PARSE);
                }
            };
            let (l, m) = mf.lattices();
            show_middles(&l, &m, verify, &paint)
        }
        (None, Some(n)) => {
            let cfg = SuiteConfig { seed, ..SuiteConfig::default() };
            let mut all = Ok(true);
            for i in 0..n {
                let (l, m) = random_pair(&cfg, i);
                println!("pair {i}: p = {}\nL    = {l}\nM    = {m}", l.p());
                match show_middles(&l, &m, verify, &paint) {
                    Ok(ok) => all = all.map(|a| a && ok),
                    Err(e) => {
                        all = Err(e);
                        break;
                    }
                }
            }
            all
        }
        _ => {
            eprintln!("error: give either a file or --random N");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed: a middle-lattice law does not hold. This is an implementation bug.");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
        Err(e) => precondition(e),
    }
}

fn cmd_selftest(cfg: SuiteConfig) -> ExitCode {
    if cfg.primes.iter().any(|&p| latmid::ValConfig::new(p).is_err()) || cfg.primes.is_empty() {
        eprintln!("error: --primes must list primes");
        return ExitCode::from(EXIT_PARSE);
    }
    let paint = Paint::new();
    let (mut cases, mut failures) = (0, 0);
    for id in 1..=CRITERIA.len() {
        let o = run(id, &cfg);
        cases += o.cases;
        failures += o.failures;
        let line = o.to_string();
        let tag = if o.passed() { "[PASS]" } else { "[FAIL]" };
        println!("{}", line.replacen(tag, &paint.verdict(o.passed(), "[PASS]", "[FAIL]"), 1));
        if let Some(c) = &o.counterexample {
            println!("counterexample for criterion {id} ({})", c.lines().next().unwrap_or_default());
            for l in c.lines().skip(1) {
                println!("    {l}");
            }
        }
    }
    println!("total: {cases} cases, {failures} failures");
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.inject_fault {
        set_dual_fault(true);
    }
    match cli.cmd {
        Cmd::Reduce { file, json, seed } => cmd_reduce(&file, json, seed),
        Cmd::Middles { file, verify, random, seed } => cmd_middles(file.as_deref(), verify, random, seed),
        Cmd::Selftest { seed, cases, max_dim, primes } => {
            cmd_selftest(SuiteConfig { seed, cases, max_dim, primes })
        }
    }
}
