use std::str::FromStr;

use clap::Args;
use hbat_core::chc::{Chc, ChcParams};
use hbat_core::cop::{Cop, CopParams};
use hbat_core::framework::{identify_sweetword, simulate_login, Transcript};
use hbat_core::honeychecker::{CheckOutcome, HoneyChecker};
use hbat_core::honeygen::generate_sweetwords;
use hbat_core::pas::{Pas, PasParams};
use hbat_core::s3pas::{S3pas, S3pasParams};
use hbat_core::{Scheme, SchemeTag, SweetIndex, Verdict};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{default_k, CliError, CliResult, Format, SchemeArg, SeedArg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulatedUser {
    Legit,
    /// Answers as the holder of sweetword J (1-based).
    Honeyword(usize),
    Random,
}

impl FromStr for SimulatedUser {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "legit" => Ok(Self::Legit),
            "random" => Ok(Self::Random),
            _ => {
                let j =
                    s.strip_prefix("honeyword:").ok_or(format!("expected legit, random or honeyword:J, got {s:?}"))?;
                match j.parse::<usize>() {
                    Ok(j) if j >= 1 => Ok(Self::Honeyword(j)),
                    _ => Err(format!("bad honeyword index {j:?}")),
                }
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value = "legit")]
    simulate_user: SimulatedUser,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Serialize)]
pub struct SessionReport {
    seed: u64,
    scheme: SchemeTag,
    k: usize,
    rounds: usize,
    sweetwords: Vec<String>,
    /// Held by the honeyChecker; shown because this is a simulation.
    password_index: usize,
    simulated_user: SimulatedUser,
    responses: Vec<String>,
    identified: Option<usize>,
    honeychecker: Option<&'static str>,
    verdict: &'static str,
}

fn simulate<S: Scheme>(scheme: &S, k: usize, user: SimulatedUser, seed: u64) -> CliResult<SessionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let password = scheme.random_secret(&mut rng);
    let g = generate_sweetwords(scheme, &password, k, &mut rng)?;
    let challenge = scheme.generate_challenge(&g.list, &mut rng)?;
    let transcript = match user {
        SimulatedUser::Legit => simulate_login(scheme, &challenge, &password, &mut rng),
        SimulatedUser::Honeyword(j) => {
            let sw = g.list.get(SweetIndex(j)).ok_or_else(|| CliError::Usage(format!("honeyword:{j} but k = {k}")))?;
            simulate_login(scheme, &challenge, sw, &mut rng)
        }
        SimulatedUser::Random => {
            let responses = (1..=scheme.rounds())
                .map(|r| {
                    scheme.response_space(&challenge, r).choose(&mut rng).cloned().expect("non-empty response space")
                })
                .collect();
            Transcript::new(scheme.tag(), responses)
        }
    };
    let checker = HoneyChecker::new();
    checker.set("user", g.index);
    let verdict = identify_sweetword(scheme, &challenge, &g.list, &transcript).unwrap_or(Verdict::Reject);
    let (identified, hc, result) = match verdict {
        Verdict::Identified(j) => match checker.check("user", j)? {
            CheckOutcome::Ok => (Some(j.0), Some("OK"), "accepted"),
            CheckOutcome::Alarm => (Some(j.0), Some("ALARM"), "denied"),
        },
        Verdict::Reject => (None, None, "denied"),
    };
    Ok(SessionReport {
        seed,
        scheme: scheme.tag(),
        k,
        rounds: scheme.rounds(),
        sweetwords: g.list.entries().iter().map(|w| scheme.encode_sweetword(w)).collect(),
        password_index: g.index.0,
        simulated_user: user,
        responses: transcript.responses.iter().map(|r| scheme.encode_response(r)).collect(),
        identified,
        honeychecker: hc,
        verdict: result,
    })
}

fn text(r: &SessionReport) -> String {
    let mut out = format!("scheme {} k={} rounds={} seed={}\n", r.scheme, r.k, r.rounds, r.seed);
    for (i, w) in r.sweetwords.iter().enumerate() {
        let mark = if i + 1 == r.password_index { "  <- password" } else { "" };
        out.push_str(&format!("  sweetword {}: {w}{mark}\n", i + 1));
    }
    for (i, resp) in r.responses.iter().enumerate() {
        out.push_str(&format!("  round {}: {resp}\n", i + 1));
    }
    match r.identified {
        Some(j) => out.push_str(&format!("identified sweetword {j}; honeyChecker {}\n", r.honeychecker.unwrap_or("-"))),
        None => out.push_str("no sweetword matched every round\n"),
    }
    out.push_str(&format!("verdict: {}\n", r.verdict));
    out
}

pub fn run(a: SessionArgs) -> CliResult<()> {
    let tag: SchemeTag = a.scheme.into();
    let k = a.k.unwrap_or(default_k(tag));
    let seed = a.seed.resolve();
    let report = match tag {
        SchemeTag::S3pas => simulate(&S3pas::new(S3pasParams::default())?, k, a.simulate_user, seed)?,
        SchemeTag::Chc => simulate(&Chc::new(ChcParams::default())?, k, a.simulate_user, seed)?,
        SchemeTag::Pas => simulate(&Pas::new(PasParams::default())?, k, a.simulate_user, seed)?,
        SchemeTag::Cop => simulate(&Cop::new(CopParams::default())?, k, a.simulate_user, seed)?,
    };
    match a.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("serializes")),
        Format::Text | Format::Csv => print!("{}", text(&report)),
    }
    Ok(())
}
