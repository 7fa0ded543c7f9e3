//! Parallel experiment drivers. Trials fan out over rayon's pool; each
//! trial draws from its own `(seed, trial)` stream and outcomes are
//! collected in trial order, so reports do not depend on scheduling.

use std::io::Write;

use rayon::prelude::*;

use bqsm_core::bp::{Circuit, Formula};
use bqsm_core::broadcast::br_setup;
use bqsm_core::harness::{
    broadcast_attack, ot_dis_params, ot_dis_trial, qdcca1_params, qdcca1_trial, token_exp_params, token_exp_trial,
    trial_rng, AdversaryStrategy, BroadcastAttack, CcaAdversary, ExperimentReport, Scheme, StrategyKind,
    TokenExpKind, TokenStrategy,
};
use bqsm_core::ot::OtParams;
use bqsm_core::otp::OtpConfig;
use bqsm_core::transcript::ParamValue;
use bqsm_core::Result;

pub fn run_trials<F>(trials: u64, trial: F) -> Result<Vec<bool>>
where
    F: Fn(u64) -> Result<bool> + Send + Sync,
{
    (0..trials).into_par_iter().map(trial).collect()
}

pub fn ot_dis(strategy: &AdversaryStrategy, params: OtParams, trials: u64, seed: u64) -> Result<ExperimentReport> {
    let outcomes = run_trials(trials, |t| ot_dis_trial(strategy, params, seed, t))?;
    Ok(ExperimentReport::from_outcomes("ot-dis", ot_dis_params(strategy, params), &outcomes, seed))
}

pub fn qdcca1(
    scheme: Scheme,
    adversary: CcaAdversary,
    lambda: u64,
    s: usize,
    queries: (usize, usize),
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    let outcomes = run_trials(trials, |t| qdcca1_trial(scheme, adversary, lambda, s, queries, seed, t))?;
    Ok(ExperimentReport::from_outcomes("qdcca1", qdcca1_params(scheme, adversary, lambda, s, queries), &outcomes, seed))
}

#[allow(clippy::too_many_arguments)]
pub fn token_exp(
    kind: TokenExpKind,
    lambda: u64,
    q: usize,
    e: usize,
    d: usize,
    strategy: TokenStrategy,
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    let outcomes = run_trials(trials, |t| token_exp_trial(kind, lambda, q, e, d, strategy, seed, t))?;
    Ok(ExperimentReport::from_outcomes("token-exp", token_exp_params(kind, lambda, q, e, d, strategy), &outcomes, seed))
}

/// The four-input, four-output program the broadcast experiments attack.
pub fn toy_broadcast_program() -> Circuit {
    let f = |s: &str| Formula::parse(s).expect("fixed formula");
    Circuit::from_formulas(4, vec![f("x0 & x1"), f("x2"), f("x1 | x3"), f("!x0")])
}

pub fn broadcast_store_trial(program: &Circuit, copies: usize, s: usize, seed: u64, trial: u64) -> Result<BroadcastAttack> {
    let mut rng = trial_rng(seed, trial);
    let mut st = br_setup(program, s, OtpConfig::new(s), &mut rng)?;
    broadcast_attack(&mut st, copies, &AdversaryStrategy::new(StrategyKind::StoreFirstS, s), &mut rng)
}

/// Summary of storage attacks on many independent broadcasts. The report
/// counts pad guesses on copies the adversary could not fully store.
#[derive(Clone, Debug, PartialEq)]
pub struct BroadcastStoreSummary {
    pub attacks: Vec<BroadcastAttack>,
    pub report: ExperimentReport,
}

pub fn broadcast_store(program: &Circuit, copies: usize, s: usize, runs: u64, seed: u64) -> Result<BroadcastStoreSummary> {
    let attacks: Vec<BroadcastAttack> =
        (0..runs).into_par_iter().map(|t| broadcast_store_trial(program, copies, s, seed, t)).collect::<Result<_>>()?;
    let mut guesses = Vec::new();
    for a in &attacks {
        guesses.extend((0..a.guessed_total).map(|i| i < a.guessed_correct));
    }
    let recovered_min = attacks.iter().map(|a| a.recovered).min().unwrap_or(0);
    let recovered_max = attacks.iter().map(|a| a.recovered).max().unwrap_or(0);
    let params: Vec<(String, ParamValue)> = vec![
        ("copies".into(), copies.into()),
        ("s".into(), s.into()),
        ("outputs".into(), program.outputs.len().into()),
        ("runs".into(), (runs as usize).into()),
        ("recovered_min".into(), recovered_min.into()),
        ("recovered_max".into(), recovered_max.into()),
    ];
    let report = ExperimentReport::from_outcomes("broadcast-store", params, &guesses, seed);
    Ok(BroadcastStoreSummary { attacks, report })
}

/// Append one report as a CSV row, writing the header first when `header`
/// is set. Parameters become a single `key=value;…` column.
pub fn write_csv_row<W: Write>(out: W, report: &ExperimentReport, header: bool) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    if header {
        w.write_record(["experiment", "params", "trials", "successes", "rate", "ci95_low", "ci95_high", "seed"])?;
    }
    let params = report
        .params
        .iter()
        .map(|(k, v)| match v {
            ParamValue::Int(i) => format!("{k}={i}"),
            ParamValue::Float(x) => format!("{k}={x}"),
            ParamValue::Text(t) => format!("{k}={t}"),
        })
        .collect::<Vec<_>>()
        .join(";");
    w.write_record([
        report.experiment.clone(),
        params,
        report.trials.to_string(),
        report.successes.to_string(),
        report.rate.to_string(),
        report.ci95.0.to_string(),
        report.ci95.1.to_string(),
        report.seed.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use bqsm_core::harness::run_ot_dis;

    #[test]
    fn parallel_matches_sequential() {
        let p = OtParams::new(64, 4, 0);
        let st = AdversaryStrategy::new(StrategyKind::MeasureAllRandom, 0);
        assert_eq!(ot_dis(&st, p, 40, 11).unwrap(), run_ot_dis(&st, p, 40, 11).unwrap());
    }

    #[test]
    fn csv_row_shape() {
        let r = ExperimentReport::from_outcomes("x", vec![("m".into(), 4usize.into())], &[true, false], 1);
        let mut buf = Vec::new();
        write_csv_row(&mut buf, &r, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("experiment,params,"));
        assert!(text.lines().nth(1).unwrap().starts_with("x,m=4,2,1,0.5,"));
    }
}
