//! Seeded verification sweeps.
//!
//! Trial `k` (counting across all requested dimensions) draws everything
//! from `SeedSpec::new(seed, k)`, so rows do not depend on scheduling.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::processes::{compose_measurement_after_channel, induced_channel, induced_povm, Channel, Instrument, TransferMap};
use crate::report::{ChainRow, ReportRow, Summary};
use crate::sampling::{
    random_channel, random_density, random_instrument, random_labels, random_observable, random_povm, SeedSpec,
};
use crate::systems::{commutator_expectation, DensityOp, HermitianOp};
use crate::tolerance::{Tolerances, REDUCTION_TOL};
use crate::transport::compose_check;
use crate::uncertainty::{
    channel_predicates, check_relation_error_disturbance, check_relation_errors, decomposition_check, disturbance,
    error, optimal_secondary, ozawa_chain_check, robertson_reduction, round_trip_channel, semi_inner_product,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    ErrorsJoint,
    ErrorDisturbance,
    OzawaChain,
    Robertson,
    Properties,
}

impl SweepMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepMode::ErrorsJoint => "errors-joint",
            SweepMode::ErrorDisturbance => "error-disturbance",
            SweepMode::OzawaChain => "ozawa-chain",
            SweepMode::Robertson => "robertson",
            SweepMode::Properties => "properties",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub mode: SweepMode,
    pub tol: Tolerances,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("--trials must be at least 1".into()));
        }
        if self.dims.is_empty() {
            return Err(Error::InvalidInput("at least one --dim is required".into()));
        }
        if let Some(d) = self.dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidInput(format!("--dim {d}: dimensions must be at least 2")));
        }
        Ok(())
    }

    /// `(trial seed, dim)` for every trial, in output order.
    pub fn plan(&self) -> Vec<(u64, usize)> {
        self.dims
            .iter()
            .enumerate()
            .flat_map(|(k, &d)| {
                (0..self.trials).map(move |t| ((k * self.trials + t) as u64, d))
            })
            .map(|(idx, d)| (SeedSpec::new(self.seed, idx).trial_seed(), d))
            .collect()
    }
}

/// Shared random instance: state, two observables, an instrument on `d`.
pub struct Instance {
    pub rho: DensityOp,
    pub a: HermitianOp,
    pub b: HermitianOp,
    pub ins: Instrument,
}

pub fn random_instance<R: Rng + ?Sized>(d: usize, labelled: bool, rng: &mut R) -> Result<Instance> {
    let rho = random_density(d, rng);
    let a = random_observable(d, rng);
    let b = random_observable(d, rng);
    let n_outcomes = rng.random_range(2..=3);
    let n_kraus = rng.random_range(1..=2);
    let mut ins = random_instrument(d, d, n_outcomes, n_kraus, rng)?;
    if labelled {
        ins = ins.with_labels(random_labels(n_outcomes, rng))?;
    }
    Ok(Instance { rho, a, b, ins })
}

fn secondary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<crate::Povm> {
    let n = rng.random_range(2..=d + 1);
    random_povm(d, n, rng)
}

pub fn errors_joint_trial(seed: u64, d: usize, tol: &Tolerances) -> Result<ReportRow> {
    let mut rng = crate::sampling::rng_from_seed(seed);
    let inst = random_instance(d, false, &mut rng)?;
    let l = secondary(d, &mut rng)?;
    let rep = check_relation_errors(&inst.a, &inst.b, &inst.ins, &l, &inst.rho, tol)?;
    Ok(ReportRow::from_relation(&rep, seed, d))
}

pub fn error_disturbance_trial(seed: u64, d: usize, tol: &Tolerances) -> Result<ReportRow> {
    let mut rng = crate::sampling::rng_from_seed(seed);
    let inst = random_instance(d, false, &mut rng)?;
    let rep = check_relation_error_disturbance(&inst.a, &inst.b, &inst.ins, &inst.rho, tol)?;
    Ok(ReportRow::from_relation(&rep, seed, d))
}

pub fn chain_trial(seed: u64, d: usize, tol: &Tolerances) -> Result<crate::uncertainty::OzawaChain> {
    let mut rng = crate::sampling::rng_from_seed(seed);
    let inst = random_instance(d, true, &mut rng)?;
    ozawa_chain_check(&inst.a, &inst.b, &inst.ins, &inst.rho, tol)
}

pub fn robertson_trial(seed: u64, d: usize, tol: &Tolerances) -> Result<(ReportRow, f64)> {
    let mut rng = crate::sampling::rng_from_seed(seed);
    let rho = random_density(d, &mut rng);
    let a = random_observable(d, &mut rng);
    let b = random_observable(d, &mut rng);
    let rep = robertson_reduction(&a, &b, &rho, tol)?;
    let deviation = rep.eps_deviation.max(rep.bound_deviation);
    Ok((ReportRow::from_robertson(&rep, seed, d, REDUCTION_TOL), deviation))
}

/// Property columns, in CSV order. Each value is a slack: nonnegative when
/// the property holds, `−deviation` for identities.
pub const PROPERTY_NAMES: [&str; 10] = [
    "decomposition",
    "optimal_secondary",
    "alternative_secondary",
    "composition",
    "contraction",
    "transpose_composition",
    "predicates",
    "monotonicity",
    "luders",
    "cauchy_schwarz",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyRow {
    pub seed: u64,
    pub dim: usize,
    pub slacks: Vec<f64>,
    pub min_slack: f64,
    pub satisfied: bool,
}

pub fn properties_trial(seed: u64, d: usize, tol: &Tolerances) -> Result<PropertyRow> {
    let mut rng = crate::sampling::rng_from_seed(seed);
    let inst = random_instance(d, false, &mut rng)?;
    let (rho, a, b) = (&inst.rho, &inst.a, &inst.b);
    let theta: Channel = induced_channel(&inst.ins).into();
    let m = induced_povm(&inst.ins);
    let l = secondary(d, &mut rng)?;

    let decomposition = -decomposition_check(a, &theta, &l, rho, tol)?.deviation;

    let eta = disturbance(b, &theta, rho, tol)?;
    let best = optimal_secondary(&theta, b, rho, tol)?;
    let optimal = -(error(b, &compose_measurement_after_channel(&best, &theta)?, rho, tol)? - eta).abs();
    let alternative = error(b, &compose_measurement_after_channel(&l, &theta)?, rho, tol)? - eta;

    let k2 = rng.random_range(1..=2);
    let second: Channel = random_channel(d, d, k2, &mut rng)?.into();
    let c = random_observable(d, &mut rng);
    let chain = compose_check(&[theta.clone(), second.clone()], rho, a, &c, tol)?;
    let composition = -chain.max_deviation();
    let contraction = chain.contraction_slack;
    let transpose: Channel = TransferMap::transpose(d).into();
    let with_transpose = compose_check(&[theta.clone(), transpose], rho, a, &c, tol)?;
    let transpose_composition = (-with_transpose.max_deviation()).min(with_transpose.contraction_slack);

    let predicates = if channel_predicates(b, &theta, rho, tol)?.agree() { 0.0 } else { -1.0 };
    let monotonicity = disturbance(b, &theta.then(&second)?, rho, tol)? - eta;

    let luders_ins = Instrument::luders_of(a, tol.spec);
    let luders_theta: Channel = induced_channel(&luders_ins).into();
    let q = round_trip_channel(&luders_theta, rho, b, tol)?;
    let luders = -commutator_expectation(a, &q, rho)?.abs();

    let n = compose_measurement_after_channel(&l, &theta)?;
    let joint = crate::processes::joint_measurement(&inst.ins, &l)?;
    let s = semi_inner_product(a, b, &m, &n, &joint, rho, tol)?;
    let cauchy_schwarz = s.norm_first * s.norm_second - s.value.norm();

    let slacks = vec![
        decomposition,
        optimal,
        alternative,
        composition,
        contraction,
        transpose_composition,
        predicates,
        monotonicity,
        luders,
        cauchy_schwarz,
    ];
    let min_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PropertyRow { seed, dim: d, slacks, min_slack, satisfied: min_slack >= -tol.num })
}

/// Rows of one sweep, in trial order.
#[derive(Debug, Clone, PartialEq)]
pub enum Rows {
    Relation(Vec<ReportRow>),
    Chain(Vec<ChainRow>),
    Properties(Vec<PropertyRow>),
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Rows,
    pub summary: Summary,
    /// `(seed, message)` for every trial that broke down.
    pub breakdowns: Vec<(u64, String)>,
}

impl SweepOutcome {
    /// 0 all pass, 2 any violation, 3 breakdowns without violations.
    pub fn exit_code(&self) -> i32 {
        if self.summary.failures > 0 {
            2
        } else if self.summary.breakdowns > 0 {
            3
        } else {
            0
        }
    }
}

struct Trial<T> {
    row: T,
    slack: f64,
    ok: bool,
    deviation: Option<f64>,
    tightest: Option<&'static str>,
}

type TrialResult<T> = std::result::Result<Trial<T>, (u64, String)>;

fn run_trials<T, F>(cfg: &SweepConfig, f: F) -> (Vec<TrialResult<T>>, Vec<u64>)
where
    T: Send,
    F: Fn(u64, usize) -> Result<Trial<T>> + Sync,
{
    let plan = cfg.plan();
    let results: Vec<_> = plan.par_iter().map(|&(seed, d)| f(seed, d).map_err(|e| (seed, e.to_string()))).collect();
    (results, plan.into_iter().map(|(s, _)| s).collect())
}

fn finish<T>(
    cfg: &SweepConfig,
    started: Instant,
    results: Vec<TrialResult<T>>,
    seeds: Vec<u64>,
    wrap: impl FnOnce(Vec<T>) -> Rows,
) -> SweepOutcome {
    let mut rows = Vec::with_capacity(results.len());
    let mut breakdowns = Vec::new();
    let mut failing_seeds = Vec::new();
    let mut min_slack = f64::INFINITY;
    let mut max_deviation: Option<f64> = None;
    let mut tightest: BTreeMap<String, usize> = BTreeMap::new();
    for (res, seed) in results.into_iter().zip(seeds) {
        match res {
            Ok(t) => {
                min_slack = min_slack.min(t.slack);
                if !t.ok {
                    failing_seeds.push(seed);
                }
                if let Some(dev) = t.deviation {
                    max_deviation = Some(max_deviation.map_or(dev, |m| m.max(dev)));
                }
                if let Some(name) = t.tightest {
                    *tightest.entry(name.to_string()).or_default() += 1;
                }
                rows.push(t.row);
            }
            Err(b) => breakdowns.push(b),
        }
    }
    let summary = Summary {
        mode: cfg.mode.as_str().to_string(),
        trials: cfg.trials * cfg.dims.len(),
        failures: failing_seeds.len(),
        breakdowns: breakdowns.len(),
        min_slack,
        runtime: started.elapsed().as_secs_f64(),
        failing_seeds,
        breakdown_seeds: breakdowns.iter().map(|(s, _)| *s).collect(),
        max_deviation,
        tightest_counts: (!tightest.is_empty()).then_some(tightest),
    };
    SweepOutcome { rows: wrap(rows), summary, breakdowns }
}

fn relation_trial(row: ReportRow) -> Trial<ReportRow> {
    Trial { slack: row.slack, ok: row.satisfied, deviation: None, tightest: None, row }
}

/// Runs the configured sweep. Rows come back in trial order whatever the
/// thread count.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let tol = cfg.tol;
    Ok(match cfg.mode {
        SweepMode::ErrorsJoint => {
            let (r, s) = run_trials(cfg, |seed, d| errors_joint_trial(seed, d, &tol).map(relation_trial));
            finish(cfg, started, r, s, Rows::Relation)
        }
        SweepMode::ErrorDisturbance => {
            let (r, s) = run_trials(cfg, |seed, d| error_disturbance_trial(seed, d, &tol).map(relation_trial));
            finish(cfg, started, r, s, Rows::Relation)
        }
        SweepMode::Robertson => {
            let (r, s) = run_trials(cfg, |seed, d| {
                robertson_trial(seed, d, &tol).map(|(row, dev)| Trial { deviation: Some(dev), ..relation_trial(row) })
            });
            finish(cfg, started, r, s, Rows::Relation)
        }
        SweepMode::OzawaChain => {
            let (r, s) = run_trials(cfg, |seed, d| {
                chain_trial(seed, d, &tol).map(|chain| Trial {
                    slack: chain.min_slack(),
                    ok: chain.holds(&tol),
                    deviation: None,
                    tightest: Some(crate::uncertainty::OzawaChain::LINK_NAMES[chain.tightest_link()]),
                    row: ChainRow::new(&chain, seed, d, &tol),
                })
            });
            finish(cfg, started, r, s, Rows::Chain)
        }
        SweepMode::Properties => {
            let (r, s) = run_trials(cfg, |seed, d| {
                properties_trial(seed, d, &tol).map(|row| Trial {
                    slack: row.min_slack,
                    ok: row.satisfied,
                    deviation: None,
                    tightest: None,
                    row,
                })
            });
            finish(cfg, started, r, s, Rows::Properties)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(mode: SweepMode, trials: usize) -> SweepConfig {
        SweepConfig { dims: vec![2, 3], trials, seed: 11, mode, tol: Tolerances::default() }
    }

    #[test]
    fn plan_is_counter_based() {
        let c = cfg(SweepMode::ErrorDisturbance, 3);
        let plan = c.plan();
        assert_eq!(plan.len(), 6);
        assert_eq!(plan[4], (SeedSpec::new(11, 4).trial_seed(), 3));
        let mut seeds: Vec<u64> = plan.iter().map(|p| p.0).collect();
        seeds.dedup();
        assert_eq!(seeds.len(), 6);
    }

    #[test]
    fn config_validation() {
        assert!(cfg(SweepMode::Robertson, 0).validate().is_err());
        let mut c = cfg(SweepMode::Robertson, 1);
        c.dims = vec![1];
        assert!(c.validate().is_err());
    }

    #[test]
    fn every_mode_passes_a_small_sweep() {
        for mode in [
            SweepMode::ErrorsJoint,
            SweepMode::ErrorDisturbance,
            SweepMode::OzawaChain,
            SweepMode::Robertson,
            SweepMode::Properties,
        ] {
            let out = run_sweep(&cfg(mode, 8)).unwrap();
            assert_eq!(out.exit_code(), 0, "{mode:?}: {:?} {:?}", out.summary, out.breakdowns);
            assert!(out.summary.min_slack >= -1e-8);
        }
    }

    #[test]
    fn exit_codes_rank_violations_over_breakdowns() {
        let mut out = run_sweep(&cfg(SweepMode::Robertson, 1)).unwrap();
        assert_eq!(out.exit_code(), 0);
        out.summary.breakdowns = 1;
        assert_eq!(out.exit_code(), 3);
        out.summary.failures = 1;
        assert_eq!(out.exit_code(), 2);
    }

    #[test]
    fn rows_are_independent_of_thread_count() {
        let c = cfg(SweepMode::ErrorsJoint, 6);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_sweep(&c).unwrap());
        let many = run_sweep(&c).unwrap();
        assert_eq!(one.rows, many.rows);
    }
}
