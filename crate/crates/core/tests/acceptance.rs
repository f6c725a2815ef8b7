//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::process::Command as Process;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use uqrel::cli::sweep::{
    error_disturbance_trial, errors_joint_trial, random_instance, run_sweep, Rows, SweepConfig, SweepMode,
};
use uqrel::processes::{compose_measurement_after_channel, induced_channel, induced_povm};
use uqrel::report::write_report_csv;
use uqrel::sampling::{
    non_informative_povm, random_channel, random_density, random_observable, random_povm, random_real_fn, rng_from_seed,
    SeedSpec,
};
use uqrel::systems::seminorm_c;
use uqrel::transport::{compose_check, pullback_measurement, pushforward_measurement};
use uqrel::uncertainty::{
    channel_predicates, decomposition_check, disturbance, error, measurement_predicates, no_free_measurement,
    optimal_secondary, robertson_reduction, round_trip_channel,
};
use uqrel::{Channel, DensityOp, HermitianOp, Instrument, KrausChannel, ProbDist, Tolerances, TransferMap};

const TOL: f64 = 1e-8;
const SEED: u64 = 20240601;

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn seeds(block: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|k| SeedSpec::new(SEED ^ (block << 32), k).trial_seed()).collect()
}

fn min_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::INFINITY, f64::min)
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

fn sweep(mode: SweepMode, dim: usize, trials: usize) -> uqrel::cli::sweep::SweepOutcome {
    let cfg = SweepConfig { dims: vec![dim], trials, seed: SEED, mode, tol: Tolerances::default() };
    run_sweep(&cfg).expect("sweep config")
}

fn relation_slack(out: &uqrel::cli::sweep::SweepOutcome) -> (usize, f64) {
    match &out.rows {
        Rows::Relation(rows) => (rows.len(), min_of(rows.iter().map(|r| r.slack))),
        _ => unreachable!(),
    }
}

fn c1_joint_errors() -> Outcome {
    let started = Instant::now();
    let q2 = sweep(SweepMode::ErrorsJoint, 2, 1000);
    let q3 = sweep(SweepMode::ErrorsJoint, 3, 300);
    let secs = started.elapsed().as_secs_f64();
    let (n2, s2) = relation_slack(&q2);
    let (n3, s3) = relation_slack(&q3);
    // Errors against the weak-value oracle on a subset.
    let tol = Tolerances::default();
    let oracle_gap = max_of(seeds(1, 200).into_iter().map(|seed| {
        let mut rng = rng_from_seed(seed);
        let inst = random_instance(2, false, &mut rng).unwrap();
        let m = induced_povm(&inst.ins);
        (error(&inst.a, &m, &inst.rho, &tol).unwrap().powi(2) - common::error_sq(&inst.a, &m, &inst.rho)).abs()
    }));
    let slack = s2.min(s3);
    let ok = n2 == 1000 && n3 == 300 && slack >= -TOL && oracle_gap <= TOL && secs < 60.0;
    outcome(
        ok,
        format!("{n2} qubit + {n3} qutrit, min slack {slack:.3e}, error oracle gap {oracle_gap:.1e}, {secs:.1} s (< 60 s)"),
    )
}

fn c2_error_disturbance() -> Outcome {
    let q2 = sweep(SweepMode::ErrorDisturbance, 2, 1000);
    let q3 = sweep(SweepMode::ErrorDisturbance, 3, 300);
    let (n2, s2) = relation_slack(&q2);
    let (n3, s3) = relation_slack(&q3);
    let tol = Tolerances::default();
    let oracle_gap = max_of(seeds(2, 200).into_iter().map(|seed| {
        let mut rng = rng_from_seed(seed);
        let d = 2 + (seed % 2) as usize;
        let inst = random_instance(d, false, &mut rng).unwrap();
        let theta: Channel = induced_channel(&inst.ins).into();
        let eta_sq = disturbance(&inst.b, &theta, &inst.rho, &tol).unwrap().powi(2);
        (eta_sq - common::disturbance_sq(&common::kraus_of(&inst.ins), &inst.rho, &inst.b)).abs()
    }));
    let slack = s2.min(s3);
    let ok = n2 == 1000 && n3 == 300 && slack >= -TOL && oracle_gap <= TOL;
    outcome(ok, format!("{n2} qubit + {n3} qutrit, min slack {slack:.3e}, disturbance oracle gap {oracle_gap:.1e}"))
}

fn c3_decomposition() -> Outcome {
    let tol = Tolerances::default();
    let devs: Vec<f64> = seeds(3, 1000)
        .into_par_iter()
        .map(|seed| {
            let mut rng = rng_from_seed(seed);
            let d = 2 + (seed % 2) as usize;
            let inst = random_instance(d, false, &mut rng).unwrap();
            let n = rng.random_range(2..=d + 1);
            let l = random_povm(d, n, &mut rng).unwrap();
            let theta: Channel = induced_channel(&inst.ins).into();
            decomposition_check(&inst.a, &theta, &l, &inst.rho, &tol).unwrap().deviation
        })
        .collect();
    let worst = max_of(devs.iter().copied());
    outcome(devs.len() == 1000 && worst <= TOL, format!("1000 instances, max deviation {worst:.3e}"))
}

fn c4_infimum() -> Outcome {
    let tol = Tolerances::default();
    let res: Vec<(f64, f64)> = seeds(4, 200)
        .into_par_iter()
        .map(|seed| {
            let mut rng = rng_from_seed(seed);
            let d = 2 + (seed % 2) as usize;
            let inst = random_instance(d, false, &mut rng).unwrap();
            let theta: Channel = induced_channel(&inst.ins).into();
            let eta = disturbance(&inst.b, &theta, &inst.rho, &tol).unwrap();
            let best = optimal_secondary(&theta, &inst.b, &inst.rho, &tol).unwrap();
            let attained = error(&inst.b, &compose_measurement_after_channel(&best, &theta).unwrap(), &inst.rho, &tol).unwrap();
            let undercut = min_of((0..100).map(|_| {
                let n = rng.random_range(2..=d + 2);
                let l = random_povm(d, n, &mut rng).unwrap();
                error(&inst.b, &compose_measurement_after_channel(&l, &theta).unwrap(), &inst.rho, &tol).unwrap() - eta
            }));
            ((attained - eta).abs(), undercut)
        })
        .collect();
    let gap = max_of(res.iter().map(|r| r.0));
    let undercut = min_of(res.iter().map(|r| r.1));
    outcome(
        gap <= TOL && undercut >= -TOL,
        format!("200 instances x 100 alternatives, optimal gap {gap:.3e}, min alternative slack {undercut:.3e}"),
    )
}

fn c5_contraction_composition() -> Outcome {
    let tol = Tolerances::default();
    let run = |block: u64, n: usize, len: usize| -> Vec<(f64, f64)> {
        seeds(block, n)
            .into_par_iter()
            .map(|seed| {
                let mut rng = rng_from_seed(seed);
                let d = 2 + (seed % 2) as usize;
                let rho = random_density(d, &mut rng);
                let a = random_observable(d, &mut rng);
                let c = random_observable(d, &mut rng);
                let mut chain: Vec<Channel> = (0..len)
                    .map(|_| {
                        let k = rng.random_range(1..=3);
                        random_channel(d, d, k, &mut rng).unwrap().into()
                    })
                    .collect();
                // Every fourth chain carries the transpose exhibit.
                if seed % 4 == 0 {
                    let at = rng.random_range(0..len);
                    chain[at] = TransferMap::transpose(d).into();
                }
                let rep = compose_check(&chain, &rho, &a, &c, &tol).unwrap();
                // Measurement transport contracts too.
                let m = random_povm(d, rng.random_range(2..=4), &mut rng).unwrap();
                let pf = pushforward_measurement(&m, &rho, &a, &tol).unwrap();
                let f = random_real_fn(m.outcomes(), &mut rng);
                let p = m.apply(&rho).unwrap();
                let pb = pullback_measurement(&m, &rho, &f, &tol).unwrap();
                let meas_slack = (uqrel::systems::seminorm_q(&a, &rho).unwrap() - pf.seminorm())
                    .min(seminorm_c(&f, &p).unwrap() - pb.seminorm());
                (rep.max_deviation(), rep.contraction_slack.min(meas_slack))
            })
            .collect()
    };
    let mut all = run(5, 1000, 2);
    all.extend(run(55, 100, 3));
    let dev = max_of(all.iter().map(|r| r.0));
    let slack = min_of(all.iter().map(|r| r.1));
    outcome(
        all.len() == 1100 && dev <= TOL && slack >= -TOL,
        format!("1000 length-2 + 100 length-3 chains, max composition deviation {dev:.3e}, min contraction slack {slack:.3e}"),
    )
}

fn c6_equivalences() -> Outcome {
    let tol = Tolerances::default();
    let random_ok = seeds(6, 1000)
        .into_par_iter()
        .filter(|&seed| {
            let mut rng = rng_from_seed(seed);
            let d = 2 + (seed % 2) as usize;
            let inst = random_instance(d, false, &mut rng).unwrap();
            let theta: Channel = induced_channel(&inst.ins).into();
            channel_predicates(&inst.a, &theta, &inst.rho, &tol).unwrap().agree()
                && measurement_predicates(&inst.a, &induced_povm(&inst.ins), &inst.rho, &tol).unwrap().agree()
        })
        .count();

    // Constructed cases with known answers.
    let mut constructed = 0;
    let mut constructed_ok = 0;
    for seed in seeds(66, 50) {
        let mut rng = rng_from_seed(seed);
        let d = 2 + (seed % 2) as usize;
        let rho = random_density(d, &mut rng);
        let a = random_observable(d, &mut rng);
        let b = random_observable(d, &mut rng);
        let luders = Instrument::luders_of(&a, tol.spec);
        let luders_theta: Channel = induced_channel(&luders).into();
        let u: Channel = KrausChannel::unitary(uqrel::sampling::random_unitary(d, &mut rng)).unwrap().into();
        let expect = [
            // Lüders of A measures A without error and leaves it undisturbed.
            (measurement_predicates(&a, &induced_povm(&luders), &rho, &tol).unwrap(), true),
            (channel_predicates(&a, &luders_theta, &rho, &tol).unwrap(), true),
            // Unitaries disturb nothing; the transpose exhibit neither.
            (channel_predicates(&b, &u, &rho, &tol).unwrap(), true),
            (channel_predicates(&b, &TransferMap::transpose(d).into(), &rho, &tol).unwrap(), true),
            // Full depolarization erases any non-constant observable.
            (channel_predicates(&b, &depolarizer(d), &rho, &tol).unwrap(), false),
        ];
        for (pred, want) in expect {
            constructed += 1;
            if pred.agree() && pred.vanishing_loss == want {
                constructed_ok += 1;
            }
        }
    }
    outcome(
        random_ok == 1000 && constructed_ok == constructed,
        format!("{random_ok}/1000 random agree, {constructed_ok}/{constructed} constructed cases agree with the known answer"),
    )
}

fn depolarizer(d: usize) -> Channel {
    // ρ ↦ Tr[ρ] I/d via Kraus operators |j⟩⟨k|/√d.
    let s = (d as f64).sqrt().recip();
    let mut kraus = Vec::new();
    for j in 0..d {
        for k in 0..d {
            let mut m = uqrel::linalg::CMatrix::zeros(d, d);
            m[(j, k)] = uqrel::linalg::c(s, 0.0);
            kraus.push(m);
        }
    }
    KrausChannel::new(kraus).unwrap().into()
}

fn c7_schrodinger() -> Outcome {
    let tol = Tolerances::default();
    let res: Vec<(f64, f64, f64)> = seeds(7, 200)
        .into_par_iter()
        .map(|seed| {
            let mut rng = rng_from_seed(seed);
            let d = 2 + (seed % 2) as usize;
            let rho = random_density(d, &mut rng);
            let a = random_observable(d, &mut rng);
            let b = random_observable(d, &mut rng);
            let rep = robertson_reduction(&a, &b, &rho, &tol).unwrap();
            let (sa, sb, cov, comm) = common::schrodinger_terms(&a, &b, &rho);
            // A second non-informative measurement with uneven weights.
            let q = ProbDist::new(vec![0.2, 0.3, 0.5]).unwrap();
            let eps_q = error(&a, &non_informative_povm(d, &q), &rho, &tol).unwrap();
            let eps_dev = (rep.eps_a - sa).abs().max((rep.eps_b - sb).abs()).max((eps_q - sa).abs());
            (eps_dev, (rep.bounds.full - cov.hypot(comm)).abs(), rep.lhs - rep.bounds.full)
        })
        .collect();
    let eps_dev = max_of(res.iter().map(|r| r.0));
    let bound_dev = max_of(res.iter().map(|r| r.1));
    let slack = min_of(res.iter().map(|r| r.2));
    outcome(
        eps_dev <= 1e-10 && bound_dev <= 1e-10 && slack >= -TOL,
        format!("200 instances, max |eps - sigma| {eps_dev:.3e}, max bound deviation {bound_dev:.3e}"),
    )
}

fn c8_ozawa_chain() -> Outcome {
    let out = sweep(SweepMode::OzawaChain, 2, 500);
    let Rows::Chain(rows) = &out.rows else { unreachable!() };
    let link = |f: fn(&uqrel::report::ChainRow) -> f64| min_of(rows.iter().map(f));
    let links = [
        link(|r| r.slack_error),
        link(|r| r.slack_disturbance),
        link(|r| r.slack_product),
        link(|r| r.slack_quadrature),
        link(|r| r.slack_commutator),
    ];
    let ok = rows.len() == 500 && links.iter().all(|&s| s >= -TOL);
    let shown: Vec<String> = links.iter().map(|s| format!("{s:.2e}")).collect();
    outcome(ok, format!("{} labelled qubit instruments, min link slacks [{}]", rows.len(), shown.join(", ")))
}

fn c9_naive_violation() -> Outcome {
    let tol = Tolerances::default();
    let rho = DensityOp::basis_state(2, 0);
    let nf = no_free_measurement(&HermitianOp::pauli_x(), &HermitianOp::pauli_y(), &rho, &tol).unwrap();
    let product = nf.relation.lhs;
    let bound = nf.relation.bounds.simple;
    let ok = product.abs() <= TOL
        && (nf.naive_bound - 1.0).abs() <= TOL
        && bound.abs() <= TOL
        && nf.violates_naive
        && nf.relation.satisfied();
    outcome(ok, format!("eps*eta = {product:.1e} < |<[A,B]>|/2 = {:.6}, relation bound |I| = {bound:.1e}", nf.naive_bound))
}

fn c10_luders_property() -> Outcome {
    let tol = Tolerances::default();
    let worst = max_of(
        seeds(10, 500)
            .into_par_iter()
            .map(|seed| {
                let mut rng = rng_from_seed(seed);
                let d = 2 + (seed % 2) as usize;
                let a = random_observable(d, &mut rng);
                let b = random_observable(d, &mut rng);
                let rho = random_density(d, &mut rng);
                let theta: Channel = induced_channel(&Instrument::luders_of(&a, tol.spec)).into();
                let q = round_trip_channel(&theta, &rho, &b, &tol).unwrap();
                common::commutator_abs(a.matrix(), q.matrix(), rho.matrix())
            })
            .collect::<Vec<_>>(),
    );
    outcome(worst <= TOL, format!("500 (B, rho), max |<[A, round trip B]>| {worst:.3e}"))
}

fn sweep_csv(mode: SweepMode, threads: usize) -> Vec<u8> {
    let cfg = SweepConfig { dims: vec![2, 3], trials: 40, seed: 99, mode, tol: Tolerances::default() };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let out = pool.install(|| run_sweep(&cfg).unwrap());
    let mut buf = Vec::new();
    match &out.rows {
        Rows::Relation(rows) => write_report_csv(&mut buf, rows).unwrap(),
        Rows::Chain(rows) => uqrel::report::write_chain_csv(&mut buf, rows).unwrap(),
        Rows::Properties(rows) => {
            uqrel::report::write_properties_csv(&mut buf, &uqrel::cli::sweep::PROPERTY_NAMES, rows).unwrap()
        }
    }
    buf
}

fn binary_csv(args: &[&str]) -> Vec<u8> {
    let out = Process::new(env!("CARGO_BIN_EXE_uqrel")).args(args).output().expect("run uqrel");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn c11_determinism() -> Outcome {
    let modes = [
        SweepMode::ErrorsJoint,
        SweepMode::ErrorDisturbance,
        SweepMode::OzawaChain,
        SweepMode::Robertson,
        SweepMode::Properties,
    ];
    let lib_ok = modes.iter().all(|&m| {
        let a = sweep_csv(m, 1);
        !a.is_empty() && a == sweep_csv(m, 4) && a == sweep_csv(m, 4)
    });
    let args = ["verify", "--mode", "error-disturbance", "--dim", "2,3", "--trials", "50", "--seed", "7"];
    let first = binary_csv(&args);
    let bin_ok = !first.is_empty() && first == binary_csv(&args);
    let cmp = ["compare", "--trials", "50", "--seed", "7"];
    let cmp_ok = binary_csv(&cmp) == binary_csv(&cmp);
    outcome(
        lib_ok && bin_ok && cmp_ok,
        format!("all modes at 1 and 4 threads identical: {lib_ok}; CLI verify reruns identical: {bin_ok}; compare: {cmp_ok}"),
    )
}

fn single_trials_are_reproducible() -> bool {
    let tol = Tolerances::default();
    let s = SeedSpec::new(SEED, 5).trial_seed();
    errors_joint_trial(s, 2, &tol).unwrap() == errors_joint_trial(s, 2, &tol).unwrap()
        && error_disturbance_trial(s, 3, &tol).unwrap() == error_disturbance_trial(s, 3, &tol).unwrap()
}

fn main() {
    let criteria: [Check; 11] = [
        ("joint-errors relation", c1_joint_errors),
        ("error-disturbance relation", c2_error_disturbance),
        ("decomposition law", c3_decomposition),
        ("infimum characterization", c4_infimum),
        ("contraction and composition", c5_contraction_composition),
        ("equivalent lossless conditions", c6_equivalences),
        ("Schrödinger reduction", c7_schrodinger),
        ("Ozawa chain", c8_ozawa_chain),
        ("naive-bound violation", c9_naive_violation),
        ("Lüders additional property", c10_luders_property),
        ("determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let o = check();
        let mark = if o.passed { "PASS" } else { "FAIL" };
        println!("[{mark}] {:>2} {name}: {} ({:.1} s)", k + 1, o.detail, started.elapsed().as_secs_f64());
        if !o.passed {
            failed += 1;
        }
    }
    assert!(single_trials_are_reproducible());
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
