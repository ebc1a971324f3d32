use clap::{Args, Subcommand};
use hbat_core::chc::expected_appearances;
use hbat_core::cop::cop_bruteforce_complexity;
use hbat_core::pas::pas_bruteforce_complexity;
use hbat_core::s3pas::{expected_triangle_area, typo_false_alarm_prob};
use serde_json::json;

use crate::{CliError, CliResult, Format, SchemeArg};

/// The figure printed for n = 9 in the literature; the formula gives a tenth of it.
const PRINTED_ES_N9: f64 = 0.753;

#[derive(Debug, Subcommand)]
pub enum FormulaCmd {
    /// Expected random-triangle area on an n x n lattice of the unit square.
    Es {
        #[arg(long, default_value_t = 9)]
        n: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Expected icon appearances over r basic CHC challenges.
    ChcExpect {
        #[arg(long = "N", default_value_t = 112)]
        n: usize,
        #[arg(long = "M", default_value_t = 70)]
        m: usize,
        #[arg(long = "K", default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        r: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Brute-force search space of a scheme.
    Complexity(ComplexityArgs),
    /// S3PAS typo false-alarm probability (TR/T)^rounds.
    Typo {
        #[arg(long, default_value_t = 3.0)]
        tr: f64,
        #[arg(long, default_value_t = 80.0)]
        t: f64,
        #[arg(long, default_value_t = 4)]
        rounds: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Debug, Args)]
pub struct ComplexityArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// PAS: blocks per table.
    #[arg(long = "M", default_value_t = 25)]
    m: u64,
    /// PAS: cells per block.
    #[arg(long = "H", default_value_t = 26)]
    h: u64,
    /// PAS: cells chosen per predicate.
    #[arg(long, default_value_t = 1)]
    c: u64,
    /// PAS: predicates.
    #[arg(long, default_value_t = 2)]
    p: u32,
    /// COP: grid cells.
    #[arg(long, default_value_t = 66)]
    n: u64,
    /// COP: secret length.
    #[arg(long, default_value_t = 4)]
    len: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn emit(format: Format, text: String, value: serde_json::Value) {
    match format {
        Format::Json => println!("{value}"),
        Format::Text | Format::Csv => print!("{text}"),
    }
}

pub fn run(cmd: FormulaCmd) -> CliResult<()> {
    match cmd {
        FormulaCmd::Es { n, format } => {
            if n == 0 {
                return Err(CliError::Usage("--n must be at least 1".into()));
            }
            let es = expected_triangle_area(n);
            let mut text = format!("E[S] n={n}: {es:.10}\n");
            if n == 9 {
                text.push_str(&format!(
                    "printed figure {PRINTED_ES_N9} is {:.2}x this value; it reads as 0.0753 with the decimal point shifted\n",
                    PRINTED_ES_N9 / es
                ));
            }
            emit(format, text, json!({"n": n, "es": es, "printed_n9": (n == 9).then_some(PRINTED_ES_N9)}));
        }
        FormulaCmd::ChcExpect { n, m, k, r, format } => {
            if m > n {
                return Err(CliError::Usage("--M cannot exceed --N".into()));
            }
            let pass = expected_appearances(n, m, k, r, true).map_err(|e| CliError::Usage(e.to_string()))?;
            let non = expected_appearances(n, m, k, r, false).map_err(|e| CliError::Usage(e.to_string()))?;
            emit(
                format,
                format!("pass {pass:.4}\nnon-pass {non:.4}\n"),
                json!({"N": n, "M": m, "K": k, "r": r, "pass": pass, "non_pass": non}),
            );
        }
        FormulaCmd::Complexity(a) => {
            let (value, params) = match a.scheme {
                SchemeArg::Pas => {
                    if a.m == 0 || a.h == 0 || a.p == 0 {
                        return Err(CliError::Usage("--M, --H and --p must be positive".into()));
                    }
                    (pas_bruteforce_complexity(a.m, a.h, a.c, a.p), json!({"M": a.m, "H": a.h, "c": a.c, "p": a.p}))
                }
                SchemeArg::Cop => {
                    if a.n == 0 || a.len == 0 {
                        return Err(CliError::Usage("--n and --len must be positive".into()));
                    }
                    (cop_bruteforce_complexity(a.n, a.len), json!({"n": a.n, "len": a.len}))
                }
                SchemeArg::S3pas | SchemeArg::Chc => {
                    return Err(CliError::Usage("complexity is defined for pas and cop".into()));
                }
            };
            let scheme = format!("{:?}", a.scheme).to_lowercase();
            emit(
                a.format,
                format!(
                    "{scheme} complexity {value}\nguessing probability {:e}\n",
                    1.0 / value.to_string().parse::<f64>().unwrap_or(f64::INFINITY)
                ),
                json!({"scheme": scheme, "params": params, "complexity": value.to_string()}),
            );
        }
        FormulaCmd::Typo { tr, t, rounds, format } => {
            if !(t > 0.0 && (0.0..=t).contains(&tr)) {
                return Err(CliError::Usage("need 0 <= tr <= t and t > 0".into()));
            }
            let p = typo_false_alarm_prob(tr, t, rounds);
            emit(format, format!("typo probability {p:.2e}\n"), json!({"tr": tr, "t": t, "rounds": rounds, "p": p}));
        }
    }
    Ok(())
}
