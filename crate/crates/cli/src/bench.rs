use clap::Args;
use hbat_core::s3pas::{challenge_gen_stats, gen_stats_csv, S3pasParams};

use crate::{CliError, CliResult, Format, SeedArg};

#[derive(Debug, Clone)]
pub struct KValues(pub Vec<usize>);

/// `4..8`, `4..=8`, `4,6,8` or `6`.
pub fn parse_k_values(s: &str) -> Result<KValues, String> {
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("bad k {x:?}"));
    let values = if let Some((a, b)) = s.split_once("..") {
        let (lo, hi) = (num(a)?, num(b.trim_start_matches('='))?);
        if lo > hi {
            return Err(format!("empty range {s:?}"));
        }
        (lo..=hi).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if values.iter().any(|&k| k < 2) {
        return Err("k must be at least 2".into());
    }
    Ok(KValues(values))
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// k values: a range `4..8` (inclusive) or a list `4,6`.
    #[arg(long, default_value = "4..8", value_parser = parse_k_values)]
    k: KValues,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Resampling cap per generation.
    #[arg(long, default_value_t = 10_000_000)]
    max_iters: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

pub fn run(a: BenchArgs) -> CliResult<()> {
    if a.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let seed = a.seed.resolve();
    let rows = challenge_gen_stats(&S3pasParams::default(), &a.k.0, a.runs, seed, a.max_iters)?;
    match a.format {
        Format::Csv | Format::Text => print!("{}", gen_stats_csv(&rows)),
        Format::Json => println!("{}", serde_json::to_string_pretty(&rows).expect("serializes")),
    }
    Ok(())
}
