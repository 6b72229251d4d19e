//! Deterministic text emitters for the CSV/JSON interfaces. Floats are
//! printed in scientific form with 16 significant digits so identical runs
//! produce byte-identical files.

use crate::constants::{SieveConstants, CERTIFIED_BELOW};
use crate::greedy::{GreedyTrace, Verdict};
use crate::intervals::IntervalSet;
use crate::primes::GapHistogram;
use crate::sieve_functions::PiecewiseSolution;
use crate::tuples::ErConstruction;
use num::rational::Ratio;
use num::{BigRational, ToPrimitive};
use std::fmt::Write;

/// 16 significant digits, scientific; "inf" for infinities.
pub fn fmt_real(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.15e}")
}

fn fmt_rat_big(r: &BigRational) -> String {
    format!("[{},{}]", r.numer(), r.denom())
}

/// `# config {...}` comment line carried at the top of CSV outputs.
pub fn config_comment(config_json: &str) -> String {
    format!("# config {config_json}\n")
}

/// Histogram CSV: `bin_lo,bin_hi,count,fraction,poisson_ref`, one row per
/// bin including the overflow row (`bin_hi = inf`).
pub fn histogram_csv(hist: &GapHistogram, reference: &[f64], config_json: &str) -> String {
    let mut out = config_comment(config_json);
    out.push_str("bin_lo,bin_hi,count,fraction,poisson_ref\n");
    let n = hist.bin_edges.len();
    for i in 0..n {
        let lo = hist.bin_edges[i];
        let hi = if i + 1 < n {
            hist.bin_edges[i + 1]
        } else {
            f64::INFINITY
        };
        let fraction = hist.counts[i] as f64 / hist.total as f64;
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_real(lo),
            fmt_real(hi),
            hist.counts[i],
            fmt_real(fraction),
            fmt_real(reference[i]),
        )
        .unwrap();
    }
    out
}

/// Solution CSV: `s,value` rows at grid resolution.
pub fn solution_csv(solution: &PiecewiseSolution<f64>, config_json: &str) -> String {
    let mut out = config_comment(config_json);
    out.push_str("s,value\n");
    for (s, v) in solution.samples() {
        writeln!(out, "{},{}", fmt_real(s), fmt_real(v)).unwrap();
    }
    out
}

/// Constants JSON with the certificate threshold and resolved config.
pub fn constants_json(c: &SieveConstants<f64>, config_json: &str) -> String {
    format!(
        concat!(
            "{{\"alpha\":{},\"beta\":{},\"omega1\":{},\"omega2\":{},\"omega3\":{},",
            "\"total\":{},\"quad_tol\":{},\"certified_below\":{},\"certified\":{},",
            "\"omega3_error_estimate\":{},\"config\":{}}}\n"
        ),
        fmt_real(c.params.alpha),
        fmt_real(c.params.beta),
        fmt_real(c.omega1),
        fmt_real(c.omega2),
        fmt_real(c.omega3),
        fmt_real(c.total),
        fmt_real(c.quad_tol),
        fmt_real(CERTIFIED_BELOW),
        c.certified(),
        fmt_real(c.omega3_error_estimate),
        config_json,
    )
}

/// Sweep JSON: full grid table plus the best point.
pub fn sweep_json(
    best: &SieveConstants<f64>,
    table: &[SieveConstants<f64>],
    config_json: &str,
) -> String {
    let mut out = String::from("{\"grid\":[");
    for (i, c) in table.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(
            out,
            "{{\"alpha\":{},\"beta\":{},\"omega1\":{},\"omega2\":{},\"omega3\":{},\"total\":{}}}",
            fmt_real(c.params.alpha),
            fmt_real(c.params.beta),
            fmt_real(c.omega1),
            fmt_real(c.omega2),
            fmt_real(c.omega3),
            fmt_real(c.total),
        )
        .unwrap();
    }
    write!(
        out,
        "],\"best\":{{\"alpha\":{},\"beta\":{},\"total\":{},\"certified_below\":{}}},\"config\":{}}}",
        fmt_real(best.params.alpha),
        fmt_real(best.params.beta),
        fmt_real(best.total),
        fmt_real(CERTIFIED_BELOW),
        config_json,
    )
    .unwrap();
    out.push('\n');
    out
}

/// IntervalSet JSON: `{"intervals":[[lo_num,lo_den,hi_num,hi_den],...]}`.
pub fn interval_set_json(set: &IntervalSet<BigRational>) -> String {
    let mut out = String::from("{\"intervals\":[");
    for (i, (lo, hi)) in set.intervals().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(
            out,
            "[{},{},{},{}]",
            lo.numer(),
            lo.denom(),
            hi.numer(),
            hi.denom()
        )
        .unwrap();
    }
    out.push_str("]}");
    out
}

/// Parse the IntervalSet JSON shape written by [`interval_set_json`].
pub fn interval_set_from_json(text: &str) -> Result<IntervalSet<BigRational>, String> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let arr = value
        .get("intervals")
        .and_then(|v| v.as_array())
        .ok_or("missing \"intervals\" array")?;
    let mut pieces = Vec::with_capacity(arr.len());
    for entry in arr {
        let quad = entry.as_array().filter(|a| a.len() == 4).ok_or(
            "each interval must be [lo_num,lo_den,hi_num,hi_den]",
        )?;
        let nums: Vec<i64> = quad
            .iter()
            .map(|v| v.as_i64().ok_or("interval endpoints must be integers"))
            .collect::<Result<_, _>>()?;
        if nums[1] == 0 || nums[3] == 0 {
            return Err("zero denominator".into());
        }
        pieces.push((
            BigRational::new(nums[0].into(), nums[1].into()),
            BigRational::new(nums[2].into(), nums[3].into()),
        ));
    }
    IntervalSet::new(pieces).map_err(|e| e.to_string())
}

/// GreedyTrace JSON with per-level r, s, the verdict, and the bound check.
pub fn trace_json(
    trace: &GreedyTrace<BigRational>,
    bound_holds: Option<bool>,
    syndetic_gap: &BigRational,
    config_json: &str,
) -> String {
    let mut out = String::from("{\"r\":[");
    for (i, r) in trace.r.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_rat_big(r));
    }
    out.push_str("],\"s\":[");
    for (i, s) in trace.s.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_rat_big(s));
    }
    write!(out, "],\"epsilon\":{}", fmt_rat_big(&trace.epsilon)).unwrap();
    match &trace.verdict {
        Verdict::Witness { betas } => {
            out.push_str(",\"verdict\":\"WITNESS\",\"betas\":[");
            for (i, b) in betas.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&fmt_rat_big(b));
            }
            out.push(']');
        }
        Verdict::Certificate { lambda } => {
            write!(out, ",\"verdict\":\"CERTIFICATE\",\"terminated_level\":{}", lambda + 1)
                .unwrap();
            write!(out, ",\"lambda\":{lambda}").unwrap();
        }
        Verdict::WindowExhausted { completed_levels } => {
            write!(
                out,
                ",\"verdict\":\"WINDOW_EXHAUSTED\",\"completed_levels\":{completed_levels}"
            )
            .unwrap();
        }
    }
    if let Some(holds) = bound_holds {
        write!(out, ",\"measure_bound_holds\":{holds}").unwrap();
    }
    write!(
        out,
        ",\"syndetic_gap\":{},\"config\":{}}}",
        fmt_rat_big(syndetic_gap),
        config_json
    )
    .unwrap();
    out.push('\n');
    out
}

/// Tuple JSON: shifts, admissibility, difference smoothness, and (for
/// constructions) targets and the maximal deviation.
pub fn tuple_json(
    shifts: &[u64],
    admissible: bool,
    p_plus_diffs: u64,
    construction: Option<&ErConstruction>,
    config_json: &str,
) -> String {
    let mut out = String::from("{\"shifts\":[");
    for (i, h) in shifts.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{h}").unwrap();
    }
    write!(
        out,
        "],\"admissible\":{admissible},\"p_plus_diffs\":{p_plus_diffs},\"targets\":["
    )
    .unwrap();
    if let Some(er) = construction {
        for (i, t) in er.targets.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{t}").unwrap();
        }
    }
    out.push(']');
    if let Some(er) = construction {
        let deviation = er
            .max_deviation
            .as_ref()
            .map_or("null".to_string(), |d| fmt_real(ratio_to_f64(d)));
        write!(
            out,
            ",\"max_deviation\":{},\"success\":{},\"residues\":[",
            deviation, er.success
        )
        .unwrap();
        for (i, (p, a)) in er.residues.residues().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "[{p},{a}]").unwrap();
        }
        out.push(']');
    } else {
        out.push_str(",\"max_deviation\":null");
    }
    write!(out, ",\"config\":{}}}", config_json).unwrap();
    out.push('\n');
    out
}

fn ratio_to_f64(r: &Ratio<i64>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
