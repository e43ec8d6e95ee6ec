//! Command-line front end. Every subcommand prints JSON lines; exact values are
//! `m/2^e` or `p/q` strings. Exit status: 0 success, 1 domain error (or a trace
//! that fails its check), 2 usage error.

mod spec;

pub use spec::{parse_name_spec, NameSpec, DEFAULT_STAR_LEN};

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::json;

use crate::analysis::{remainder_identity_check, TailModel, DEFAULT_GRID_BITS};
use crate::combinators::{product_name, sum_name};
use crate::diagonal::{
    builtin_suite, check_trace_with_header, parse_opponent, rho_from_label, run_diagonalization, Opponent, Trace,
};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::names::{compare_tails, partial_sum, star, u_profile, Permutation};
use crate::sigma::{sigma_estimate, sigma_preservation_check, CombineMode};
use crate::transfer::{set_to_reordered_name, solovay_transfer, split_name};

/// Environment variable overriding the root-enclosure grid, in bits.
pub const GRID_ENV: &str = "REORDERED_GRID_BITS";

#[derive(Parser, Debug)]
#[command(name = "reordered", version, about = "Exact experiments with dyadic-series names")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Sum,
    Product,
}

impl From<Mode> for CombineMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Sum => CombineMode::Sum,
            Mode::Product => CombineMode::Product,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Prefix and partial sum of a name.
    Eval {
        #[arg(long)]
        name: String,
        #[arg(long)]
        n: usize,
    },
    /// Multiplicity profile with its complete window.
    Profile {
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 16)]
        n_max: u64,
        #[arg(long, default_value_t = 4096)]
        len: usize,
    },
    /// Sorted rearrangement of a prefix and its tails against the original.
    Reorder {
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 64)]
        len: usize,
    },
    /// Both sides of the prefix-sum remainder identity for a closed-form model.
    Tails {
        /// linear(a), constant(c) or geometric(p/q)
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 0)]
        c: u64,
        #[arg(long, default_value_t = 16)]
        n: u64,
    },
    /// Sum or product of two names.
    Combine {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 32)]
        len: usize,
    },
    /// Name from an increasing approximation whose steps are bounded by a name g.
    Solovay {
        /// Truncate this rational to `bits-per-stage · t` binary digits at stage t.
        #[arg(long, default_value = "1/3", conflicts_with = "approx")]
        target: String,
        #[arg(long, default_value_t = 2)]
        bits_per_stage: u64,
        /// File of dyadic approximations `m/2^e`, one per line.
        #[arg(long)]
        approx: Option<String>,
        #[arg(long, default_value = "linear(0)")]
        g: String,
        #[arg(long, default_value_t = 0)]
        c: u64,
        #[arg(long, default_value_t = 8)]
        stages: usize,
    },
    /// Name for `Σ_{a∈A} 2^(-(a+1))` from an increasing set approximation.
    CompileSet {
        /// File whose line m lists the members of A_m (commas or spaces).
        #[arg(long)]
        sets: Option<String>,
        /// Without `--sets`: A_m = {0, 2, …, 2(m-1)}.
        #[arg(long, default_value_t = 2)]
        h_mul: u64,
        #[arg(long, default_value_t = 2)]
        h_add: u64,
        #[arg(long, default_value_t = 6)]
        stages: usize,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
    },
    /// Split a witnessed name into two staggered names, with r(n) = base^(n+1).
    Split {
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 8)]
        r_base: u64,
        #[arg(long, default_value_t = 512)]
        len: usize,
    },
    /// Window estimate of the n-th root growth of a profile, or its behaviour
    /// under sum or product with a second name.
    Sigma {
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 16)]
        n_max: u64,
        #[arg(long, default_value_t = 4096)]
        len: usize,
        #[arg(long, requires = "mode")]
        with: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Run the staged diagonal construction.
    Diag {
        /// none, builtin, or labels separated by ';' (divergent, echo(d), table(v@t,...))
        #[arg(long, default_value = "builtin")]
        opponents: String,
        #[arg(long, default_value = "one")]
        rho: String,
        #[arg(long, default_value_t = 100)]
        stages: u64,
        /// Trace destination; without it the trace goes to stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Replay a trace and report every rule violation.
    CheckTrace {
        trace: String,
        /// Override the opponents named in the trace header.
        #[arg(long)]
        opponents: Option<String>,
    },
}

fn grid_bits() -> Result<u32> {
    match std::env::var(GRID_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .ok()
            .filter(|&b| (1..=64).contains(&b))
            .ok_or_else(|| Error::InvalidParameter(format!("{GRID_ENV}={v:?} is not an integer in 1..=64"))),
        Err(_) => Ok(DEFAULT_GRID_BITS),
    }
}

fn rational(text: &str) -> Result<BigRational> {
    let bad = || Error::InvalidParameter(format!("not a rational: {text:?}"));
    let (p, q) = text.split_once('/').unwrap_or((text, "1"));
    let p: BigInt = p.trim().parse().map_err(|_| bad())?;
    let q: BigInt = q.trim().parse().map_err(|_| bad())?;
    if q == BigInt::from(0) {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

fn tail_model(text: &str) -> Result<TailModel> {
    let bad = || Error::InvalidParameter(format!("unknown model {text:?}; expected linear(a), constant(c) or geometric(p/q)"));
    let (head, rest) = text.trim().split_once('(').ok_or_else(bad)?;
    let arg = rest.strip_suffix(')').ok_or_else(bad)?.trim();
    match head.trim() {
        "linear" => Ok(TailModel::linear(arg.parse().map_err(|_| bad())?)),
        "constant" => Ok(TailModel::constant(arg.parse().map_err(|_| bad())?)),
        "geometric" => TailModel::geometric(rational(arg)?),
        _ => Err(bad()),
    }
}

fn opponents(text: &str) -> Result<Vec<Box<dyn Opponent>>> {
    match text.trim() {
        "none" => Ok(Vec::new()),
        "builtin" => Ok(builtin_suite()),
        list => list.split(';').map(parse_opponent).collect(),
    }
}

fn emit(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    let line = serde_json::to_string(value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out, "{line}").map_err(|e| Error::Io(e.to_string()))
}

fn io<T>(r: std::io::Result<T>, what: &str) -> Result<T> {
    r.map_err(|e| Error::Io(format!("{what}: {e}")))
}

/// Parses `argv` (including the program name), runs the subcommand and returns
/// the exit status.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let status = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if status == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return status;
        }
    };
    match execute(cli.command, out) {
        Ok(status) => status,
        Err(e) => {
            let _ = emit(out, &json!({"kind": "error", "error": e.kind(), "message": e.to_string()}));
            1
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Eval { name, n } => {
            let spec = parse_name_spec(&name)?;
            let mut f = spec.build()?;
            let sum = partial_sum(&mut f, n)?;
            emit(out, &json!({"kind": "eval", "name": spec.to_string(), "n": n, "prefix": f.prefix(n)?, "sum": sum}))?;
        }
        Command::Profile { name, n_max, len } => {
            let spec = parse_name_spec(&name)?;
            let mut f = spec.build()?;
            let p = u_profile(&mut f, n_max, len)?;
            emit(
                out,
                &json!({
                    "kind": "profile",
                    "name": spec.to_string(),
                    "inspected": p.inspected,
                    "counts": p.counts,
                    "complete_window": p.complete_window(),
                    "grouped_sum": p.grouped_sum(),
                }),
            )?;
        }
        Command::Reorder { name, len } => {
            let spec = parse_name_spec(&name)?;
            let mut f = spec.build()?;
            let values = f.prefix_up_to(len)?.to_vec();
            let certified = star(&mut f, len)?;
            let id = Permutation::identity(values.len());
            let mut tails = Vec::new();
            for n in 0..=values.len() {
                let (sorted, original) = compare_tails(&values, &id, n)?;
                tails.push(json!({"n": n, "sorted": sorted, "original": original, "holds": sorted <= original}));
            }
            let mut sorted = values.clone();
            sorted.sort_unstable();
            emit(
                out,
                &json!({
                    "kind": "reorder",
                    "name": spec.to_string(),
                    "prefix": values,
                    "sorted": sorted,
                    "certified_sorted_len": certified.realized().len(),
                    "tails": tails,
                }),
            )?;
        }
        Command::Tails { model, c, n } => {
            let m = tail_model(&model)?;
            for k in 0..=n {
                let (lhs, rhs) = remainder_identity_check(&m, c, k)?;
                emit(
                    out,
                    &json!({
                        "kind": "tails",
                        "model": model.trim(),
                        "c": c,
                        "n": k,
                        "lhs": lhs.to_string(),
                        "rhs": rhs.to_string(),
                        "equal": lhs == rhs,
                    }),
                )?;
            }
        }
        Command::Combine { mode, f, g, len } => {
            let (fs, gs) = (parse_name_spec(&f)?, parse_name_spec(&g)?);
            let mut h = match mode {
                Mode::Sum => sum_name(fs.build()?, gs.build()?),
                Mode::Product => product_name(fs.build()?, gs.build()?),
            };
            let prefix = h.prefix_up_to(len)?.to_vec();
            let sum = crate::dyadic::sum_pow2_neg(&prefix);
            emit(
                out,
                &json!({
                    "kind": "combine",
                    "mode": CombineMode::from(mode),
                    "f": fs.to_string(),
                    "g": gs.to_string(),
                    "prefix": prefix,
                    "sum": sum,
                }),
            )?;
        }
        Command::Solovay { target, bits_per_stage, approx, g, c, stages } => {
            let xs: Vec<Dyadic> = match approx {
                Some(path) => {
                    let text = io(std::fs::read_to_string(&path), &path)?;
                    text.lines().filter(|l| !l.trim().is_empty()).map(str::parse).collect::<Result<_>>()?
                }
                None => {
                    let q = rational(&target)?;
                    (0..=stages as u64)
                        .map(|t| Dyadic::floor_rational(&q, t * bits_per_stage))
                        .collect()
                }
            };
            let spec = parse_name_spec(&g)?;
            let mut gn = spec.build()?;
            let outcome = solovay_transfer(&mut xs.into_iter(), &mut gn, c, stages)?;
            for s in &outcome.report.stages {
                emit(out, &json!({"kind": "solovay-stage", "stage": s}))?;
            }
            let r = &outcome.report;
            emit(
                out,
                &json!({
                    "kind": "solovay",
                    "values": outcome.values,
                    "all_land": r.all_land(),
                    "profile_holds": r.profile_holds(),
                    "complete_window": r.complete_window,
                    "profile": r.profile,
                    "halted": r.halted,
                }),
            )?;
            if let Some(e) = outcome.error {
                return Err(e);
            }
        }
        Command::CompileSet { sets, h_mul, h_add, stages, budget } => {
            let approximations: Vec<BTreeSet<u64>> = match sets {
                Some(path) => {
                    let text = io(std::fs::read_to_string(&path), &path)?;
                    text.lines()
                        .map(|line| {
                            line.split(|c: char| c == ',' || c.is_whitespace())
                                .filter(|s| !s.is_empty())
                                .map(|s| {
                                    s.parse().map_err(|_| Error::InvalidParameter(format!("{path}: bad member {s:?}")))
                                })
                                .collect::<Result<BTreeSet<u64>>>()
                        })
                        .collect::<Result<_>>()?
                }
                None => (0..budget as u64).map(|m| (0..m).map(|k| 2 * k).collect()).collect(),
            };
            let h = move |n: u64| h_mul.saturating_mul(n).saturating_add(h_add);
            let outcome = set_to_reordered_name(&mut approximations.into_iter(), &h, stages, budget)?;
            for s in &outcome.report.stages {
                emit(out, &json!({"kind": "compile-stage", "stage": s}))?;
            }
            emit(
                out,
                &json!({
                    "kind": "compile-set",
                    "values": outcome.values,
                    "balanced": outcome.report.balanced(),
                    "bounds_hold": outcome.report.bounds_hold(),
                    "multiplicity": outcome.report.multiplicity,
                }),
            )?;
        }
        Command::Split { name, r_base, len } => {
            if r_base < 2 {
                return Err(Error::InvalidParameter("r-base must be at least 2".into()));
            }
            let spec = parse_name_spec(&name)?;
            let mut f = spec.build()?;
            let r = move |n: u64| r_base.checked_pow(n as u32 + 1).unwrap_or(u64::MAX);
            let outcome = split_name(&mut f, &r, len)?;
            emit(
                out,
                &json!({
                    "kind": "split",
                    "name": spec.to_string(),
                    "g": outcome.g_values,
                    "h": outcome.h_values,
                    "holds": outcome.report.holds(),
                    "report": outcome.report,
                }),
            )?;
        }
        Command::Sigma { name, n_max, len, with, mode } => {
            let grid = grid_bits()?;
            let spec = parse_name_spec(&name)?;
            let mut f = spec.build()?;
            match (with, mode) {
                (Some(other), Some(mode)) => {
                    let gs = parse_name_spec(&other)?;
                    let report = sigma_preservation_check(&mut f, &mut gs.build()?, mode.into(), n_max, grid)?;
                    emit(
                        out,
                        &json!({
                            "kind": "sigma-combine",
                            "label": "window estimate",
                            "f": spec.to_string(),
                            "g": gs.to_string(),
                            "grid_bits": grid,
                            "holds": report.holds(),
                            "report": report,
                        }),
                    )?;
                }
                _ => {
                    let est = sigma_estimate(&u_profile(&mut f, n_max, len)?, grid)?;
                    emit(
                        out,
                        &json!({
                            "kind": "sigma",
                            "label": "window estimate",
                            "name": spec.to_string(),
                            "grid_bits": grid,
                            "window": est.window,
                            "max": est.roots.max,
                            "argmax": est.roots.argmax,
                            "min": est.roots.min,
                            "below_one": est.below_one,
                        }),
                    )?;
                }
            }
        }
        Command::Diag { opponents: ops, rho, stages, out: dest } => {
            let ops = opponents(&ops)?;
            let run = run_diagonalization(&ops, &rho_from_label(&rho)?, stages)?;
            let text = run.trace.to_json_lines();
            match &dest {
                Some(path) => io(std::fs::write(path, &text), path)?,
                None => io(out.write_all(text.as_bytes()), "stdout")?,
            }
            emit(
                out,
                &json!({
                    "kind": "diag",
                    "rho": run.trace.header.rho,
                    "stages": stages,
                    "opponents": run.trace.header.opponents,
                    "values": run.values,
                    "final_x": run.final_x,
                    "trace": dest,
                }),
            )?;
        }
        Command::CheckTrace { trace, opponents: ops } => {
            let text = io(std::fs::read_to_string(&trace), &trace)?;
            let parsed = Trace::from_json_lines(&text)?;
            let ops = match ops {
                Some(list) => opponents(&list)?,
                None => parsed.header.opponents.iter().map(|l| parse_opponent(l)).collect::<Result<_>>()?,
            };
            let report = check_trace_with_header(&parsed, &ops)?;
            let ok = report.ok();
            emit(out, &json!({"kind": "check-trace", "ok": ok, "report": report}))?;
            return Ok(if ok { 0 } else { 1 });
        }
    }
    Ok(0)
}
