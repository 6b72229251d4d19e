//! Command-line front end: each subcommand drives one part of the toolkit
//! and emits a CSV or JSON report embedding its resolved configuration.
//! Identical invocations produce byte-identical outputs.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use gapsieve::chen;
use gapsieve::constants::{
    sweep_optimizer, total_bound, ChenParameters, SolverProducts, CERTIFIED_BELOW,
};
use gapsieve::greedy::{greedy_witness, measure_bound_verify, Verdict};
use gapsieve::primes::{normalized_histogram_segmented, DEFAULT_SEGMENT_LEN};
use gapsieve::report;
use gapsieve::sieve_functions::{solve_buchstab, solve_linear_sieve, DEFAULT_STEP, DEFAULT_S_MAX};
use gapsieve::Rat;
use num::rational::Rational64;
use num::ToPrimitive;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gapsieve",
    version,
    about = "Prime-gap statistics, sieve-function solvers, sifting constants, and exact interval-set checks",
    arg_required_else_help = true
)]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads for parallel subcommands (default: RAYON_NUM_THREADS
    /// or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Histogram of normalized prime gaps vs the exponential reference (CSV).
    Gaps {
        /// Sieve primes up to this limit.
        #[arg(long, default_value_t = 1_000_000)]
        limit: u64,
        /// Ascending bin edges; the last edge opens the overflow bin.
        #[arg(long, default_value = "0,0.25,0.5,0.75,1,1.25,1.5,1.75,2,2.5,3,4")]
        edges: String,
        /// Segment span of the sieve.
        #[arg(long, default_value_t = DEFAULT_SEGMENT_LEN)]
        segment_size: u64,
    },
    /// Dump a solved sieve function on its grid (CSV).
    Sievefun {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = DEFAULT_S_MAX)]
        smax: f64,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
    },
    /// Compute the sifting constants and the 3.99 certificate (JSON).
    Constants {
        /// Sifting exponent alpha as a rational, e.g. 1/7.
        #[arg(long, default_value = "1/7")]
        alpha: String,
        /// Sifting exponent beta as a rational, e.g. 3/14.
        #[arg(long, default_value = "3/14")]
        beta: String,
        /// Base quadrature tolerance (the triple integral runs at 10x).
        #[arg(long, default_value_t = 1e-6)]
        quad_tol: f64,
        #[arg(long, default_value_t = DEFAULT_S_MAX)]
        smax: f64,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
    },
    /// Sweep an (alpha, beta) grid for the smallest total (JSON).
    Sweep {
        #[arg(long, default_value = "1/15")]
        alpha_min: String,
        #[arg(long, default_value = "1/6")]
        alpha_max: String,
        #[arg(long, default_value_t = 20)]
        alpha_steps: usize,
        #[arg(long, default_value = "1/8")]
        beta_min: String,
        #[arg(long, default_value = "1/4")]
        beta_max: String,
        #[arg(long, default_value_t = 20)]
        beta_steps: usize,
        #[arg(long, default_value_t = 1e-5)]
        quad_tol: f64,
        #[arg(long, default_value_t = DEFAULT_S_MAX)]
        smax: f64,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
    },
    /// Run the combinatorial verification suite (PASS/FAIL report).
    Verify {
        /// Run every check (the default; kept for explicitness).
        #[arg(long)]
        all: bool,
        /// Range bound for the exhaustive pointwise-inequality checks.
        #[arg(long, default_value_t = 100_000)]
        n_max: u64,
    },
    /// Greedy difference-avoiding walk over an exact interval set (JSON).
    Measure {
        /// IntervalSet JSON, or @path to read it from a file.
        #[arg(long)]
        set: String,
        /// Arity of the difference hypothesis.
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Slack epsilon as a rational (half-open sets work with 0).
        #[arg(long, default_value = "0")]
        epsilon: String,
        /// Window height as a rational.
        #[arg(long)]
        window: String,
        /// Verify the measure bound at this T (default: the window).
        #[arg(long)]
        t: Option<String>,
    },
    /// Admissibility / smoothness of a tuple, or the residue construction (JSON).
    Tuples {
        /// Comma-separated shifts, e.g. 0,2,6.
        #[arg(long, conflicts_with_all = ["x", "y", "z", "betas"])]
        shifts: Option<String>,
        /// Construction scale x (rational).
        #[arg(long, requires_all = ["y", "z", "betas"])]
        x: Option<String>,
        /// Sieve primes up to y.
        #[arg(long)]
        y: Option<u64>,
        /// Survivor window (0, z].
        #[arg(long)]
        z: Option<u64>,
        /// Comma-separated rational betas, e.g. 1,3.
        #[arg(long)]
        betas: Option<String>,
        /// Prime excluded from the residue choices.
        #[arg(long)]
        excluded: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    FlinUpper,
    FlinLower,
    Buchstab,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // A later global-pool build is a no-op; ignore the race with rayon's
        // lazy default initialization.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Returns whether every requested check passed.
fn run(cli: &Cli) -> Result<bool> {
    let threads_json = match cli.threads {
        Some(n) => n.to_string(),
        None => "null".into(),
    };
    match &cli.cmd {
        Cmd::Gaps {
            limit,
            edges,
            segment_size,
        } => {
            let edge_values = parse_f64_list(edges)?;
            let (hist, reference) =
                normalized_histogram_segmented(*limit, &edge_values, *segment_size)
                    .map_err(|e| anyhow!("{e}"))?;
            let config = format!(
                "{{\"subcommand\":\"gaps\",\"limit\":{limit},\"edges\":\"{edges}\",\"segment_size\":{segment_size},\"threads\":{threads_json}}}"
            );
            emit(cli, report::histogram_csv(&hist, &reference, &config))?;
            Ok(true)
        }
        Cmd::Sievefun { kind, smax, step } => {
            let solution = match kind {
                KindArg::FlinUpper => solve_linear_sieve(*smax, *step).map(|(u, _)| u),
                KindArg::FlinLower => solve_linear_sieve(*smax, *step).map(|(_, l)| l),
                KindArg::Buchstab => solve_buchstab(*smax, *step),
            }
            .map_err(|e| anyhow!("{e}"))?;
            let config = format!(
                "{{\"subcommand\":\"sievefun\",\"kind\":\"{kind:?}\",\"smax\":{},\"step\":{},\"threads\":{threads_json}}}",
                report::fmt_real(*smax),
                report::fmt_real(*step),
            );
            emit(cli, report::solution_csv(&solution, &config))?;
            Ok(true)
        }
        Cmd::Constants {
            alpha,
            beta,
            quad_tol,
            smax,
            step,
        } => {
            let a = parse_rational(alpha)?;
            let b = parse_rational(beta)?;
            let params = ChenParameters::new(
                a.to_f64().context("alpha out of f64 range")?,
                b.to_f64().context("beta out of f64 range")?,
            )
            .map_err(|e| anyhow!("{e}"))?;
            let products = SolverProducts::solve(*smax, *step).map_err(|e| anyhow!("{e}"))?;
            let constants =
                total_bound(&params, &products, *quad_tol).map_err(|e| anyhow!("{e}"))?;
            let config = format!(
                "{{\"subcommand\":\"constants\",\"alpha\":\"{alpha}\",\"beta\":\"{beta}\",\"quad_tol\":{},\"smax\":{},\"step\":{},\"threads\":{threads_json}}}",
                report::fmt_real(*quad_tol),
                report::fmt_real(*smax),
                report::fmt_real(*step),
            );
            emit(cli, report::constants_json(&constants, &config))?;
            Ok(constants.certified())
        }
        Cmd::Sweep {
            alpha_min,
            alpha_max,
            alpha_steps,
            beta_min,
            beta_max,
            beta_steps,
            quad_tol,
            smax,
            step,
        } => {
            let alphas = rational_grid(alpha_min, alpha_max, *alpha_steps)?;
            let betas = rational_grid(beta_min, beta_max, *beta_steps)?;
            let products = SolverProducts::solve(*smax, *step).map_err(|e| anyhow!("{e}"))?;
            let (best, table) =
                sweep_optimizer(&alphas, &betas, &products, *quad_tol).map_err(|e| anyhow!("{e}"))?;
            let config = format!(
                "{{\"subcommand\":\"sweep\",\"alpha_min\":\"{alpha_min}\",\"alpha_max\":\"{alpha_max}\",\"alpha_steps\":{alpha_steps},\"beta_min\":\"{beta_min}\",\"beta_max\":\"{beta_max}\",\"beta_steps\":{beta_steps},\"quad_tol\":{},\"smax\":{},\"step\":{},\"threads\":{threads_json}}}",
                report::fmt_real(*quad_tol),
                report::fmt_real(*smax),
                report::fmt_real(*step),
            );
            emit(cli, report::sweep_json(&best, &table, &config))?;
            Ok(best.total < CERTIFIED_BELOW)
        }
        Cmd::Verify { all: _, n_max } => {
            let (text, all_passed) = verify_report(*n_max);
            emit(cli, text)?;
            Ok(all_passed)
        }
        Cmd::Measure {
            set,
            k,
            epsilon,
            window,
            t,
        } => {
            let set_text = if let Some(path) = set.strip_prefix('@') {
                fs::read_to_string(path).with_context(|| format!("reading {path}"))?
            } else {
                set.clone()
            };
            let interval_set =
                report::interval_set_from_json(&set_text).map_err(|e| anyhow!(e))?;
            let eps = big_rational(epsilon)?;
            let win = big_rational(window)?;
            let t_value = match t {
                Some(s) => big_rational(s)?,
                None => win.clone(),
            };
            let trace = greedy_witness(&interval_set, *k, eps, win.clone())
                .map_err(|e| anyhow!("{e}"))?;
            let bound = match &trace.verdict {
                Verdict::Certificate { .. } | Verdict::WindowExhausted { .. } => Some(
                    measure_bound_verify(&interval_set, &trace, &t_value)
                        .map_err(|e| anyhow!("{e}"))?,
                ),
                Verdict::Witness { .. } => None,
            };
            let gap = interval_set
                .max_gap_within(&win)
                .map_err(|e| anyhow!("{e}"))?;
            let config = format!(
                "{{\"subcommand\":\"measure\",\"k\":{k},\"epsilon\":\"{epsilon}\",\"window\":\"{window}\",\"t\":\"{}\",\"threads\":{threads_json}}}",
                t.as_deref().unwrap_or(window),
            );
            emit(cli, report::trace_json(&trace, bound, &gap, &config))?;
            Ok(bound.unwrap_or(true))
        }
        Cmd::Tuples {
            shifts,
            x,
            y,
            z,
            betas,
            excluded,
        } => match (shifts, x) {
            (Some(list), None) => {
                let shifts = parse_u64_list(list)?;
                let tuple = gapsieve::tuples::KTuple::new(shifts).map_err(|e| anyhow!("{e}"))?;
                let adm = gapsieve::tuples::is_admissible(&tuple);
                let p_plus = if tuple.k() >= 2 {
                    gapsieve::tuples::diff_smoothness(&tuple).map_err(|e| anyhow!("{e}"))?
                } else {
                    1
                };
                let config = format!(
                    "{{\"subcommand\":\"tuples\",\"shifts\":\"{list}\",\"threads\":{threads_json}}}"
                );
                emit(
                    cli,
                    report::tuple_json(tuple.shifts(), adm.admissible, p_plus, None, &config),
                )?;
                Ok(adm.admissible)
            }
            (None, Some(x_str)) => {
                let x_rat = parse_rational(x_str)?;
                let y = y.ok_or_else(|| anyhow!("--y is required with --x"))?;
                let z = z.ok_or_else(|| anyhow!("--z is required with --x"))?;
                let betas_str = betas
                    .as_deref()
                    .ok_or_else(|| anyhow!("--betas is required with --x"))?;
                let beta_list = parse_rational_list(betas_str)?;
                let er = gapsieve::tuples::erdos_rankin_construct(
                    x_rat, y, z, &beta_list, *excluded,
                )
                .map_err(|e| anyhow!("{e}"))?;
                let config = format!(
                    "{{\"subcommand\":\"tuples\",\"x\":\"{x_str}\",\"y\":{y},\"z\":{z},\"betas\":\"{betas_str}\",\"excluded\":{},\"threads\":{threads_json}}}",
                    excluded.map_or("null".into(), |p| p.to_string()),
                );
                let text = report::tuple_json(
                    er.survivors.shifts(),
                    er.admissibility.admissible,
                    er.p_plus_diffs,
                    Some(&er),
                    &config,
                );
                emit(cli, text)?;
                Ok(true)
            }
            _ => bail!("pass either --shifts or the construction parameters --x/--y/--z/--betas"),
        },
    }
}

fn emit(cli: &Cli, text: String) -> Result<()> {
    match &cli.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            use std::io::Write;
            match std::io::stdout().write_all(text.as_bytes()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => other.context("writing to stdout"),
            }
        }
    }
}

/// The default verification suite: one line per check.
fn verify_report(n_max: u64) -> (String, bool) {
    let mut out = String::new();
    let mut all = true;
    let mut item = |ok: bool, line: String| {
        all &= ok;
        out.push_str(if ok { "PASS " } else { "FAIL " });
        out.push_str(&line);
        out.push('\n');
    };

    for (y, z) in [(10u64, 30u64), (20, 80)] {
        match chen::verify_chen_range(n_max, y, z) {
            Ok(report) => {
                let suffix = report
                    .counterexample
                    .as_ref()
                    .map(|(n, sides)| {
                        format!(" counterexample={n} lhs={} rhs={}", sides.lhs, sides.rhs)
                    })
                    .unwrap_or_default();
                item(
                    report.holds,
                    format!("chen_pointwise Y={y} Z={z} n_max={n_max}{suffix}"),
                );
            }
            Err(e) => item(false, format!("chen_pointwise Y={y} Z={z} error={e}")),
        }
    }

    item(
        chen::verify_chen_abstract(50),
        "chen_abstract k=0..50".into(),
    );

    let mu_ok = (1..=100i64).all(|l| {
        chen::mu_prime(Rational64::new(1, l)).is_ok_and(|(value, argmax)| {
            value == Rational64::new(1 + l, 2) && argmax == vec![l as u64, l as u64 + 1]
        })
    });
    item(mu_ok, "mu_prime mu=1/L L=1..100".into());

    let mut quant_ok = true;
    for m in 2..=6u32 {
        for a in 1..m {
            for mu in [Rational64::new(1, 2), Rational64::new(1, 3), Rational64::new(1, 5)] {
                quant_ok &= chen::quant_bound_check(m, a, mu, 8).unwrap_or(false);
                quant_ok &= chen::quant_bound_tight(m, a, mu, 8).unwrap_or(false);
            }
        }
    }
    item(quant_ok, "quant_bound M=2..6 a<M c_max=8 mu in {1/2,1/3,1/5}".into());

    let frak_ok = chen::frak_s_display_bound(100, 400, 400)
        .map(|(value, closed)| value == closed)
        .unwrap_or(false);
    item(frak_ok, "frak_s_lower_bound a=100 M=400 L=M equals a/(2(M-1))".into());

    let pigeon_ok = (1..=4).all(chen::pigeonhole_check);
    item(pigeon_ok, "pigeonhole 4xa grids a=1..4".into());

    let mut summary = String::new();
    writeln!(summary, "{}", if all { "ALL PASS" } else { "FAILURES PRESENT" }).unwrap();
    (out + &summary, all)
}

fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let (numer, denom) = match s.split_once('/') {
        Some((n, d)) => (
            n.trim().parse::<i64>().with_context(|| format!("bad numerator in {s:?}"))?,
            d.trim().parse::<i64>().with_context(|| format!("bad denominator in {s:?}"))?,
        ),
        None => (
            s.parse::<i64>().with_context(|| format!("bad rational {s:?}"))?,
            1,
        ),
    };
    if denom == 0 {
        bail!("zero denominator in {s:?}");
    }
    Ok(Rational64::new(numer, denom))
}

fn big_rational(s: &str) -> Result<Rat> {
    let r = parse_rational(s)?;
    Ok(Rat::new((*r.numer()).into(), (*r.denom()).into()))
}

fn parse_rational_list(s: &str) -> Result<Vec<Rational64>> {
    s.split(',').map(parse_rational).collect()
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .with_context(|| format!("bad integer {part:?}"))
        })
        .collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number {part:?}"))
        })
        .collect()
}

fn rational_grid(min: &str, max: &str, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        bail!("grid needs at least one step");
    }
    let lo = parse_rational(min)?.to_f64().context("grid bound out of range")?;
    let hi = parse_rational(max)?.to_f64().context("grid bound out of range")?;
    if hi < lo {
        bail!("grid bounds out of order");
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let h = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps).map(|i| lo + i as f64 * h).collect())
}
