use clap::{Args, ValueEnum};
use hbat_core::attacks::{
    all_distinct_strings, all_strings, bruteforce_observer, dos_analytic, dos_attack_sim, flatness_estimate, msv_sim,
    observe_sessions, random_click_attack, s3pas_typo_check, typo_false_alarm_sim, Distinguisher, WrongResponseModel,
};
use hbat_core::chc::{Chc, ChcParams};
use hbat_core::cop::{Cop, CopParams};
use hbat_core::honeygen::generate_sweetwords;
use hbat_core::pas::{Pas, PasParams, PUBLISHED_TYPO_RATE};
use hbat_core::s3pas::{expected_triangle_area, typo_false_alarm_prob, S3pas, S3pasParams};
use hbat_core::stats::{derive_seed, trial_rng};
use hbat_core::{Scheme, SchemeTag};

use crate::report::{Metric, Report};
use crate::{default_k, CliError, CliResult, Format, SchemeArg, SeedArg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackKind {
    Bruteforce,
    RandomClick,
    Dos,
    Msv,
    Typo,
    Flatness,
}

impl AttackKind {
    fn name(self) -> &'static str {
        match self {
            Self::Bruteforce => "bruteforce",
            Self::RandomClick => "random-click",
            Self::Dos => "dos",
            Self::Msv => "msv",
            Self::Typo => "typo",
            Self::Flatness => "flatness",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    EveryRound,
    OneRound,
}

impl From<ModelArg> for WrongResponseModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::EveryRound => WrongResponseModel::EveryRound,
            ModelArg::OneRound => WrongResponseModel::OneRound,
        }
    }
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(value_enum)]
    kind: AttackKind,
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long)]
    k: Option<usize>,
    /// Trials; for flatness, the number of generated accounts.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Observed sessions (bruteforce).
    #[arg(long, default_value_t = 5)]
    sessions: usize,
    /// Where wrong responses go (dos, typo).
    #[arg(long, value_enum, default_value = "every-round")]
    model: ModelArg,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

struct Ctx {
    kind: AttackKind,
    k: usize,
    trials: u64,
    sessions: usize,
    model: WrongResponseModel,
    workers: usize,
    seed: u64,
}

fn generic<S: Scheme>(scheme: &S, c: &Ctx) -> CliResult<Vec<Metric>> {
    let single = scheme.rounds() == 1;
    let elements = scheme.response_element_count();
    let metrics = match c.kind {
        AttackKind::RandomClick => {
            let r = random_click_attack(scheme, c.k, c.trials, c.seed, c.workers)?;
            let mut own = Metric::estimate("password_only", &r.password_only);
            let mut any = Metric::estimate("any_sweetword", &r.any_sweetword);
            if single {
                own = own.against(1.0 / elements as f64);
                any = any.against(c.k as f64 / elements as f64);
            }
            vec![own, any]
        }
        AttackKind::Dos => {
            let est = dos_attack_sim(scheme, c.k, c.model, c.trials, c.seed, c.workers)?;
            let m = Metric::estimate("alarm_probability", &est);
            vec![if single { m.against(dos_analytic(c.k, elements)) } else { m }]
        }
        AttackKind::Msv => {
            let est = msv_sim(scheme, c.k, c.trials, c.seed, c.workers)?;
            vec![Metric::estimate("intersection_is_password", &est)]
        }
        AttackKind::Typo => {
            let est = typo_false_alarm_sim(scheme, c.k, c.model, c.trials, c.seed, c.workers)?;
            let m = Metric::estimate("false_alarm_rate", &est);
            vec![if single { m.against(dos_analytic(c.k, elements)) } else { m }]
        }
        AttackKind::Flatness => {
            let accounts = usize::try_from(c.trials).map_err(|_| CliError::Usage("too many accounts".into()))?;
            let mut out = Vec::new();
            for (i, d) in [Distinguisher::RandomPick, Distinguisher::CharacterFrequency].into_iter().enumerate() {
                let mut rng = trial_rng(c.seed, i as u64);
                let r = flatness_estimate(scheme, c.k, accounts, d, &mut rng)?;
                let name = match d {
                    Distinguisher::RandomPick => "random_pick",
                    Distinguisher::CharacterFrequency => "character_frequency",
                };
                out.push(Metric::estimate(&format!("success_{name}"), &r.success).against(r.baseline));
                out.push(Metric::value(&format!("advantage_{name}"), r.advantage));
            }
            out
        }
        AttackKind::Bruteforce => unreachable!("handled per scheme"),
    };
    Ok(metrics)
}

/// Observer brute force on a reduced grid, where the candidate space is enumerable.
fn bruteforce<S: Scheme<Sweetword = String>>(
    scheme: &S,
    candidates: Vec<String>,
    k: usize,
    c: &Ctx,
) -> CliResult<Vec<Metric>> {
    let mut rng = trial_rng(c.seed, 0);
    let password = scheme.random_secret(&mut rng);
    let g = generate_sweetwords(scheme, &password, k, &mut rng)?;
    let obs = observe_sessions(scheme, &g.list, &password, c.sessions, &mut rng)?;
    let (trace, alive) = bruteforce_observer(scheme, candidates, &obs);
    let mut out: Vec<Metric> =
        trace.iter().enumerate().map(|(i, &n)| Metric::value(&format!("candidates_after_{i}"), n as f64)).collect();
    out.push(Metric::value("secret_survives", alive.contains(&password) as u8 as f64));
    Ok(out)
}

const REDUCED_ALPHABET: &str = "ABCDEFGHIJKL";

pub fn run(a: AttackArgs) -> CliResult<()> {
    let tag: SchemeTag = a.scheme.into();
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if a.kind == AttackKind::Flatness && a.trials < 100 {
        return Err(CliError::Usage("flatness needs --trials of at least 100 accounts".into()));
    }
    let workers = a.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    let mut c = Ctx {
        kind: a.kind,
        k: a.k.unwrap_or(default_k(tag)),
        trials: a.trials,
        sessions: a.sessions,
        model: a.model.into(),
        workers,
        seed: a.seed.resolve(),
    };
    let metrics = match (a.kind, tag) {
        (AttackKind::Bruteforce, SchemeTag::S3pas) => {
            c.k = a.k.unwrap_or(2);
            let e = S3pas::new(S3pasParams::reduced(4, 3, REDUCED_ALPHABET))?;
            let cands = all_strings(&e.params().alphabet, e.params().password_len);
            bruteforce(&e, cands, c.k, &c)?
        }
        (AttackKind::Bruteforce, SchemeTag::Cop) => {
            c.k = a.k.unwrap_or(2);
            let e = Cop::new(CopParams::reduced(4, 3, REDUCED_ALPHABET, 2))?;
            let cands = all_distinct_strings(&e.params().alphabet, 2);
            bruteforce(&e, cands, c.k, &c)?
        }
        (AttackKind::Bruteforce, _) => {
            return Err(CliError::Usage("bruteforce runs on reduced s3pas or cop grids only".into()));
        }
        (AttackKind::Typo, SchemeTag::S3pas) => {
            // full-scale rates are far too small to sample; check the formula on a 5x4 grid
            let analytic = typo_false_alarm_prob(3.0, 80.0, 4);
            let e = S3pas::new(S3pasParams::reduced(5, 4, "ABCDEFGHIJKLMNOPQRST"))?;
            let k = a.k.unwrap_or(2);
            let check = s3pas_typo_check(&e, k, c.trials, c.seed, c.workers)?;
            c.k = k;
            vec![
                Metric::value("analytic_full_grid", analytic),
                Metric::estimate("reduced_simulated", &check.simulated).against(check.predicted),
                Metric::value("reduced_naive", check.naive),
            ]
        }
        (AttackKind::Typo, SchemeTag::Pas) => {
            let e = Pas::new(PasParams::default())?;
            let mut m = generic(&e, &c)?;
            m[0].reference = Some(PUBLISHED_TYPO_RATE);
            m
        }
        (AttackKind::RandomClick, SchemeTag::S3pas) => {
            let e = S3pas::new(S3pasParams::default())?;
            let mut m = generic(&e, &c)?;
            let tr = e.mean_triangle_cells(c.trials as usize, &mut trial_rng(derive_seed(c.seed, 1), 0));
            m.push(Metric::value("mean_tr_over_t", tr / e.params().cells() as f64));
            m.push(Metric::value("expected_area_n9", expected_triangle_area(9)));
            m
        }
        (_, SchemeTag::S3pas) => generic(&S3pas::new(S3pasParams::default())?, &c)?,
        (_, SchemeTag::Chc) => generic(&Chc::new(ChcParams::default())?, &c)?,
        (_, SchemeTag::Pas) => generic(&Pas::new(PasParams::default())?, &c)?,
        (_, SchemeTag::Cop) => generic(&Cop::new(CopParams::default())?, &c)?,
    };
    let trials = if a.kind == AttackKind::Bruteforce { c.sessions as u64 } else { c.trials };
    let report =
        Report { attack: a.kind.name().into(), scheme: tag.to_string(), k: c.k, trials, seed: c.seed, metrics };
    print!("{}", report.render(a.format));
    Ok(())
}
