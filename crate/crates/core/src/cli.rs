//! Command-line surface. Exit codes: 0 accept/pass, 2 reject/fail,
//! 3 undecided/inconclusive, 64 usage, 1 any other error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::Error;
use crate::generators::{gen_counterexample, gen_dual_complete, gen_odd_cycle_stab, CounterexampleKind};
use crate::instance::ProblemInstance;
use crate::io::{emit, instance_to_json, parse_instance, write_instance, Format};
use crate::linalg::IntMatrix;
use crate::pipeline::{build_ef, check_conditions, stab_box_intersect, EfArtifact, Verdict};
use crate::verify::{verify_hull, verify_size_bound, Verdict as CheckVerdict};
use crate::Caps;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REJECT: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "hullform", version, about = "Exact extended formulations for integer hulls of strictly Delta-modular translated cones")]
struct Cli {
    /// Largest |det H| accepted for coset enumeration.
    #[arg(long, global = true, default_value_t = Caps::default().delta_cap)]
    delta_cap: u64,
    /// Largest number of n x n minors enumerated by the modularity check.
    #[arg(long, global = true, default_value_t = Caps::default().enum_cap)]
    enum_cap: u128,
    /// Largest lattice box scanned by verification.
    #[arg(long, global = true, default_value_t = Caps::default().lattice_cap)]
    lattice_cap: u128,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report the three conditions and the verdict.
    Check { file: PathBuf },
    /// Build the extended formulation and write it out.
    Build {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "lp", value_parser = ["lp", "mps", "json"])]
        format: String,
        /// Intersect with the unit box (edge-node incidence, b = 1).
        #[arg(long)]
        stab: bool,
    },
    /// Build, then compare against brute-force lattice enumeration.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 6)]
        radius: u64,
        #[arg(long, default_value_t = 25)]
        objectives: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        stab: bool,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write a generated instance.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Debug, Args)]
struct OutArg {
    /// Destination file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Strictly Delta-modular representation of the dual of K_r.
    DualComplete {
        #[arg(long)]
        r: usize,
        /// Diagonal of the scaling matrix, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "2,1,1")]
        scale: Vec<i64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Strictly bimodular instance whose row matroid is graphic but, for
    /// six or more nodes, not cographic.
    Cevallos {
        #[arg(long, default_value_t = 4)]
        size: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Instance with b outside the column span.
    Jia {
        #[arg(long, default_value_t = 2)]
        size: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Edge-node incidence of an odd cycle with b = 1.
    OddCycle {
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[command(flatten)]
        out: OutArg,
    },
}

fn build(inst: &ProblemInstance, stab: bool, caps: &Caps) -> crate::Result<EfArtifact> {
    let art = build_ef(inst, caps)?;
    if stab {
        stab_box_intersect(&art, inst.n())
    } else {
        Ok(art)
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Undecided(_) => EXIT_UNDECIDED,
        Error::Rejected(_) | Error::NotInSpan | Error::NotGraphic(_) | Error::NotStrictlyModular => EXIT_REJECT,
        Error::CapExceeded { .. } | Error::DeltaCapExceeded { .. } | Error::SearchBudget(_) => EXIT_UNDECIDED,
        _ => EXIT_ERROR,
    }
}

fn run(cli: Cli, out: &mut dyn Write) -> crate::Result<i32> {
    let caps = Caps { delta_cap: cli.delta_cap, enum_cap: cli.enum_cap, lattice_cap: cli.lattice_cap, ..Caps::default() };
    match cli.command {
        Command::Check { file } => {
            let inst = parse_instance(&file)?;
            let report = check_conditions(&inst, &caps)?;
            writeln!(out, "instance: {}", inst.label)?;
            writeln!(out, "{report}")?;
            Ok(match report.verdict {
                Verdict::Accept => EXIT_OK,
                Verdict::Reject(_) => EXIT_REJECT,
                Verdict::Undecided(_) => EXIT_UNDECIDED,
            })
        }
        Command::Build { file, out: path, format, stab } => {
            let inst = parse_instance(&file)?;
            let art = build(&inst, stab, &caps)?;
            emit(&art, format.parse::<Format>()?, &path)?;
            let s = &art.formulation.size;
            writeln!(
                out,
                "{}: {} branch, {} variables, {} inequalities, {} equations -> {}",
                art.label,
                art.branch.name(),
                art.formulation.num_vars(),
                s.inequalities,
                s.equations,
                path.display()
            )?;
            Ok(EXIT_OK)
        }
        Command::Verify { file, radius, objectives, seed, stab, json } => {
            let inst = parse_instance(&file)?;
            let art = build(&inst, stab, &caps)?;
            let report = verify_hull(&art, &inst, radius, objectives, seed, &caps)?;
            let size = verify_size_bound(&art);
            if json {
                let mut doc = report.to_json();
                doc["size"] = serde_json::json!({
                    "inequalities": size.inequalities,
                    "bound": size.bound.to_string(),
                    "poly_bound": size.poly_bound.to_string(),
                    "holds": size.holds,
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable"))?;
            } else {
                writeln!(out, "branch: {}", art.branch.name())?;
                writeln!(out, "size: {} inequalities, bound {} ({})", size.inequalities, size.bound, if size.holds { "holds" } else { "VIOLATED" })?;
                writeln!(out, "{report}")?;
            }
            Ok(match (report.verdict, size.holds) {
                (CheckVerdict::Pass, true) => EXIT_OK,
                (CheckVerdict::Inconclusive, true) => EXIT_UNDECIDED,
                _ => EXIT_REJECT,
            })
        }
        Command::Gen(g) => {
            let (inst, path) = match g {
                GenCommand::DualComplete { r, scale, out } => {
                    let n = scale.len();
                    let m = IntMatrix::from_fn(n, n, |i, j| if i == j { BigInt::from(scale[i]) } else { BigInt::zero() });
                    (gen_dual_complete(r, &m, caps.delta_cap)?, out.out)
                }
                GenCommand::Cevallos { size, out } => (gen_counterexample(CounterexampleKind::Cevallos, size)?, out.out),
                GenCommand::Jia { size, out } => (gen_counterexample(CounterexampleKind::Jia, size)?, out.out),
                GenCommand::OddCycle { k, out } => (gen_odd_cycle_stab(k)?, out.out),
            };
            match &path {
                Some(p) => write_instance(&inst, p)?,
                None => out.write_all(instance_to_json(&inst).as_bytes())?,
            }
            Ok(EXIT_OK)
        }
    }
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            error_code(&e)
        }
    }
}
