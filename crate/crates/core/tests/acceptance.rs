//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use serde_json::Value;

use infodesign::channel::{bsc, capacity};
use infodesign::coding::{
    deviation_gaps, deviation_test, generate_codebook, posterior_belief_audit, random_responses,
    run_experiment_with, Codebook, CodingConfig,
};
use infodesign::mac::{build_scenario, MacConfig};
use infodesign::persuasion::{
    best_reply, in_q2, receiver_expected_utility, sender_value, solve_equilibrium, Scenario,
    SolveMode,
};
use infodesign::prob::{
    binary_entropy, compose_markov, entropy, kl_divergence, l1_distance, mutual_information,
    Distribution, JointDistribution, StochasticMatrix,
};
use infodesign::splitting::{
    block_feasible, bsc_capacity, is_valid_split, one_shot_feasible, posteriors_from_signal,
    region_scan, signal_from_posteriors, BinarySignal, PosteriorPair, RegionLabel,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const REVEALING_BENCHMARK: f64 = 0.67;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_infodesign")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn mac() -> Scenario {
    build_scenario(&MacConfig::default()).unwrap()
}

fn experiment() -> CodingConfig {
    let text = std::fs::read_to_string(configs().join("experiment.json")).unwrap();
    CodingConfig::from_json(&text).unwrap()
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(bin())
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "infodesign {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn pair(p1: f64, p2: f64) -> PosteriorPair {
    PosteriorPair::new(p1, p2).unwrap()
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

fn mac_unconstrained() -> Outcome {
    let start = Instant::now();
    let stdout = run_cli(&["solve", "--mode", "unconstrained", "--resolution", "0.001"])?;
    let elapsed = start.elapsed();
    let r: Value = serde_json::from_slice(&stdout).map_err(|e| e.to_string())?;
    let phi = r["phi1_star"].as_f64().unwrap();
    let (p1, p2) = (
        r["posteriors"]["p1"].as_f64().unwrap(),
        r["posteriors"]["p2"].as_f64().unwrap(),
    );
    ensure!((phi - 0.74).abs() <= 0.01, "phi1* = {phi}");
    ensure!(
        p1.abs() <= 0.005 && (p2 - 0.6415).abs() <= 0.005,
        "posteriors ({p1}, {p2})"
    );
    ensure!(elapsed < Duration::from_secs(10), "took {}", secs(elapsed));
    Ok(format!(
        "phi1* = {phi:.4} at ({p1}, {p2}) in {}",
        secs(elapsed)
    ))
}

fn revealing_benchmark() -> Outcome {
    let sc = mac();
    let (revealing, _) = sender_value(&pair(1.0, 0.0), 0.5, &sc).map_err(|e| e.to_string())?;
    let best = solve_equilibrium(&sc, SolveMode::Unconstrained, 1e-3).unwrap();
    let ratio = 100.0 * (best.phi1_star - REVEALING_BENCHMARK) / REVEALING_BENCHMARK;
    ensure!(
        (revealing - 0.67).abs() <= 0.01,
        "revealing value {revealing}"
    );
    ensure!((ratio - 9.1).abs() <= 1.5, "improvement {ratio:.2}%");
    Ok(format!(
        "revealing = {revealing:.4}, improvement = {ratio:.2}%"
    ))
}

fn rate_limited() -> Outcome {
    let sc = mac();
    let eps = 0.25;
    let block_mode = SolveMode::Block {
        capacity: bsc_capacity(eps).unwrap(),
    };
    let one_mode = SolveMode::OneShot { eps };
    let block = solve_equilibrium(&sc, block_mode, 1e-3).unwrap();
    let one = solve_equilibrium(&sc, one_mode, 1e-3).unwrap();
    ensure!(
        (block.phi1_star - 0.73).abs() <= 0.01,
        "block phi1* = {}",
        block.phi1_star
    );
    ensure!(
        (one.phi1_star - 0.72).abs() <= 0.01,
        "one-shot phi1* = {}",
        one.phi1_star
    );
    let revealing = pair(1.0, 0.0);
    ensure!(
        !block_mode.verdict(0.5, &revealing).feasible,
        "revealing split is block-feasible"
    );
    ensure!(
        !one_mode.verdict(0.5, &revealing).feasible,
        "revealing split is one-shot feasible"
    );
    Ok(format!(
        "block = {:.4}, one-shot = {:.4}, revealing excluded from both",
        block.phi1_star, one.phi1_star
    ))
}

fn signal_consistency() -> Outcome {
    let r = solve_equilibrium(&mac(), SolveMode::Unconstrained, 1e-3).unwrap();
    let p = r.prior;
    let s = signal_from_posteriors(p, &r.posteriors).map_err(|e| e.to_string())?;
    let back = posteriors_from_signal(p, &s).map_err(|e| e.to_string())?;
    let err = (back.pair.p1 - r.posteriors.p1)
        .abs()
        .max((back.pair.p2 - r.posteriors.p2).abs());
    ensure!(err <= 1e-9, "round trip error {err:e}");
    let reported = (1.0, 0.4424);
    let dev = (s.alpha - reported.0)
        .abs()
        .max((s.beta - reported.1).abs());
    ensure!(dev <= 2e-3, "(alpha, beta) = ({}, {})", s.alpha, s.beta);
    Ok(format!(
        "(alpha, beta) = ({}, {:.5}), round trip error {err:.1e}",
        s.alpha, s.beta
    ))
}

fn region_geometry() -> Outcome {
    let (p, eps) = (0.5, 0.25);
    let cap = bsc_capacity(eps).unwrap();
    let start = Instant::now();
    let grid = region_scan(p, eps, 1.0 / 500.0).map_err(|e| e.to_string())?;
    let mut violations = 0;
    let mut one_shot = 0;
    let mut block_only = 0;
    for (p1, p2, label) in grid.cells() {
        match label {
            RegionLabel::OneShot => {
                one_shot += 1;
                let s = signal_from_posteriors(p, &pair(p1, p2)).unwrap();
                if !block_feasible(p, &s, cap).unwrap().feasible {
                    violations += 1;
                }
            }
            RegionLabel::BlockOnly => block_only += 1,
            _ => {}
        }
    }
    let elapsed = start.elapsed();
    ensure!(
        violations == 0,
        "{violations} one-shot cells outside the block region"
    );
    ensure!(
        one_shot > 0 && block_only > 0,
        "one-shot {one_shot}, block-only {block_only}"
    );
    let target = pair(0.0, 0.6415);
    let s = signal_from_posteriors(p, &target).unwrap();
    ensure!(
        is_valid_split(p, &target),
        "(0, 0.6415) is not a valid split"
    );
    ensure!(
        !one_shot_feasible(p, &target, eps).unwrap().feasible,
        "(0, 0.6415) one-shot feasible"
    );
    ensure!(
        !block_feasible(p, &s, cap).unwrap().feasible,
        "(0, 0.6415) block feasible"
    );
    let cell = grid.label(grid.nearest(0.0), grid.nearest(0.6415));
    ensure!(
        cell == RegionLabel::Infeasible,
        "grid cell near (0, 0.6415) is {cell:?}"
    );
    ensure!(elapsed < Duration::from_secs(5), "took {}", secs(elapsed));
    Ok(format!(
        "{one_shot} one-shot cells, {block_only} block-only cells, 0 violations in {}",
        secs(elapsed)
    ))
}

fn capacity_cross_check() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let eps = 0.5 * i as f64 / 49.0;
        let c = capacity(&bsc(eps).unwrap())
            .map_err(|e| e.to_string())?
            .capacity;
        worst = worst.max((c - (1.0 - binary_entropy(eps).unwrap())).abs());
    }
    ensure!(worst <= 1e-6, "max deviation {worst:e}");
    Ok(format!("max |C - (1 - h)| = {worst:.1e} over 50 values"))
}

fn simplex_of(len: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.0f64..1.0, len).prop_filter_map("zero mass", move |v| {
        let s: f64 = v.iter().sum();
        if s < 1e-6 {
            return None;
        }
        let mut p: Vec<f64> = v.iter().map(|x| x / s).collect();
        let head: f64 = p[..len - 1].iter().sum();
        p[len - 1] = (1.0 - head).max(0.0);
        Distribution::new(p).ok()
    })
}

fn matrix_of(rows: usize, cols: usize) -> impl Strategy<Value = StochasticMatrix> {
    prop::collection::vec(simplex_of(cols), rows)
        .prop_map(|r| StochasticMatrix::from_rows(r).unwrap())
}

fn markov_chain() -> impl Strategy<Value = (Distribution, StochasticMatrix, StochasticMatrix)> {
    (1usize..=4, 1usize..=4, 1usize..=4)
        .prop_flat_map(|(u, w, v)| (simplex_of(u), matrix_of(u, w), matrix_of(w, v)))
}

fn random_scenario() -> impl Strategy<Value = Scenario> {
    (0.05f64..0.95, 2usize..=4).prop_flat_map(|(p, k)| {
        let table = prop::collection::vec(prop::collection::vec(-1.0f64..1.0, k), 2);
        (table.clone(), table).prop_map(move |(phi1, phi2)| {
            let actions = (0..k).map(|i| format!("a{i}")).collect();
            Scenario::new(Distribution::bernoulli(p).unwrap(), actions, phi1, phi2).unwrap()
        })
    })
}

fn check(
    name: &str,
    cases: u32,
    f: impl FnOnce(&mut TestRunner) -> Result<(), String>,
) -> Result<String, String> {
    let mut runner = TestRunner::new(Config {
        cases,
        max_global_rejects: cases * 4,
        failure_persistence: None,
        ..Config::default()
    });
    f(&mut runner).map_err(|e| format!("{name}: {e}"))?;
    Ok(format!("{name} x{cases}"))
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn property_suites() -> Outcome {
    const PROB_CASES: u32 = 10_000;
    let mut passed = Vec::new();

    passed.push(check("entropy", PROB_CASES, |r| {
        r.run(&(1usize..=8).prop_flat_map(simplex_of), |d| {
            let h = entropy(&d);
            let top = (d.support_size() as f64).log2();
            if h < -1e-9 || h > top + 1e-9 {
                return Err(fail(format!("H = {h} outside [0, {top}]")));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?);

    passed.push(check("mutual information", PROB_CASES, |r| {
        let joint = (1usize..=4, 1usize..=4).prop_flat_map(|(a, b)| {
            simplex_of(a * b).prop_map(move |d| {
                JointDistribution::new(vec![a, b], vec!["A".into(), "B".into()], d.into_vec())
                    .unwrap()
            })
        });
        r.run(&joint, |j| {
            let mi = mutual_information(&j).unwrap();
            let ha = entropy(&j.marginal_of(0).unwrap());
            let hb = entropy(&j.marginal_of(1).unwrap());
            if mi < 0.0 || mi > ha.min(hb) + 1e-9 {
                return Err(fail(format!("I = {mi}, H(A) = {ha}, H(B) = {hb}")));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?);

    passed.push(check("pinsker", PROB_CASES, |r| {
        let pairs = (1usize..=6).prop_flat_map(|n| (simplex_of(n), simplex_of(n)));
        r.run(&pairs, |(p, q)| {
            if q.probs().iter().any(|&x| x <= 0.0) {
                return Ok(());
            }
            let kl = kl_divergence(&p, &q).unwrap();
            let l1 = l1_distance(&p, &q).unwrap();
            if l1 > (2.0 * std::f64::consts::LN_2 * kl).sqrt() + 1e-9 {
                return Err(fail(format!("L1 = {l1}, KL = {kl}")));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?);

    passed.push(check("markov round trip", PROB_CASES, |r| {
        r.run(&markov_chain(), |(prior, signal, response)| {
            let j = compose_markov(&prior, &signal, &response).unwrap();
            let u = j.marginal(&[0, 2]).unwrap().marginal_of(0).unwrap();
            for (a, b) in u.probs().iter().zip(prior.probs()) {
                if (a - b).abs() > 1e-12 {
                    return Err(fail(format!("U marginal {u:?} vs prior {prior:?}")));
                }
            }
            let cond = j.marginal(&[0, 1]).unwrap().conditional(0).unwrap();
            for (i, row) in cond.matrix.rows().iter().enumerate() {
                if prior[i] == 0.0 {
                    continue;
                }
                let d = l1_distance(row, signal.row(i)).unwrap();
                if d > 1e-9 {
                    return Err(fail(format!("row {i} off by {d}")));
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?);

    passed.push(check("affine invariance", 2_000, |r| {
        let input = (random_scenario(), 0.1f64..10.0, -5.0f64..5.0, 0.0f64..=1.0);
        r.run(&input, |(sc, scale, shift, q)| {
            let moved_phi2 = sc
                .phi2()
                .iter()
                .map(|row| row.iter().map(|x| scale * x + shift).collect())
                .collect();
            let moved = Scenario::new(
                sc.prior().clone(),
                sc.actions().to_vec(),
                sc.phi1().to_vec(),
                moved_phi2,
            )
            .unwrap();
            let post = Distribution::bernoulli(q).unwrap();
            let a = best_reply(&post, &sc).unwrap();
            let near_tie = (0..sc.actions().len()).any(|v| {
                let gap = a.receiver_value - receiver_expected_utility(&post, v, &sc).unwrap();
                gap > 0.0 && gap <= 1e-9
            });
            if near_tie {
                return Ok(());
            }
            let b = best_reply(&post, &moved).unwrap();
            if a.optimal_actions != b.optimal_actions {
                return Err(fail(format!(
                    "{:?} vs {:?}",
                    a.optimal_actions, b.optimal_actions
                )));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?);

    passed.push(check("mode monotonicity", 200, |r| {
        r.run(&(random_scenario(), 0.0f64..0.5), |(sc, eps)| {
            let res = 0.02;
            let cap = bsc_capacity(eps).unwrap();
            let one = solve_equilibrium(&sc, SolveMode::OneShot { eps }, res).unwrap();
            let block = solve_equilibrium(&sc, SolveMode::Block { capacity: cap }, res).unwrap();
            let free = solve_equilibrium(&sc, SolveMode::Unconstrained, res).unwrap();
            if one.phi1_star > block.phi1_star + 1e-12 || block.phi1_star > free.phi1_star + 1e-12 {
                return Err(fail(format!(
                    "one-shot {} block {} unconstrained {}",
                    one.phi1_star, block.phi1_star, free.phi1_star
                )));
            }
            for res in [&one, &block, &free] {
                let resp = res.response_matrix(sc.actions().len()).unwrap();
                if !in_q2(sc.prior(), &res.signal.to_matrix(), &resp, &sc).unwrap() {
                    return Err(fail("equilibrium response is not a best reply".into()));
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?);

    passed.push(check("bayes plausibility", PROB_CASES, |r| {
        r.run(&(0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0), |(p, a, b)| {
            let s = BinarySignal::new(a, b).unwrap();
            let induced = posteriors_from_signal(p, &s).unwrap();
            if induced.undefined.iter().any(|&u| u) {
                return Ok(());
            }
            let w = induced.weight_w1;
            let mean = w * induced.pair.p1 + (1.0 - w) * induced.pair.p2;
            if (mean - p).abs() > 1e-12 {
                return Err(fail(format!("mean posterior {mean} vs prior {p}")));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?);

    Ok(passed.join(", "))
}

const LADDER: [usize; 3] = [20, 40, 60];
const TRIALS: usize = 200;
const ALTERNATIVES: usize = 50;
const ALTERNATIVES_SEED: u64 = 77;

fn ladder() -> Vec<(CodingConfig, Codebook)> {
    LADDER
        .iter()
        .map(|&n| {
            let cfg = experiment().with_n(n).unwrap();
            let cb = generate_codebook(&cfg).unwrap();
            (cfg, cb)
        })
        .collect()
}

fn convergence_trends() -> Outcome {
    let start = Instant::now();
    let base = experiment();
    let bounds = base.rate_bounds().map_err(|e| e.to_string())?;
    ensure!(
        bounds.source_information < bounds.rate && bounds.rate < bounds.channel_information,
        "rate {} not strictly inside ({}, {})",
        bounds.rate,
        bounds.source_information,
        bounds.channel_information
    );
    let runs: Vec<_> = ladder()
        .iter()
        .map(|(cfg, cb)| run_experiment_with(cfg, cb, TRIALS).unwrap().summary)
        .collect();
    for w in runs.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        ensure!(
            b.error_rate <= a.error_rate + a.error_rate_se.max(b.error_rate_se),
            "error rate rises from {} to {} (n = {} -> {})",
            a.error_rate,
            b.error_rate,
            a.n,
            b.n
        );
        ensure!(
            b.median_l1 <= a.median_l1,
            "median L1 rises from {} to {}",
            a.median_l1,
            b.median_l1
        );
        let gap = |s: &infodesign::coding::ExperimentSummary| (s.mean_util1 - s.target_util1).abs();
        ensure!(
            gap(b) <= gap(a),
            "utility gap rises from {} to {}",
            gap(a),
            gap(b)
        );
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(300), "took {}", secs(elapsed));
    let fmt = |f: &dyn Fn(&infodesign::coding::ExperimentSummary) -> f64| {
        runs.iter()
            .map(|s| format!("{:.3}", f(s)))
            .collect::<Vec<_>>()
            .join(" -> ")
    };
    Ok(format!(
        "error {}, median L1 {}, |util1 - target| {} in {}",
        fmt(&|s| s.error_rate),
        fmt(&|s| s.median_l1),
        fmt(&|s| (s.mean_util1 - s.target_util1).abs()),
        secs(elapsed)
    ))
}

fn deviation_trends() -> Outcome {
    let base = experiment();
    let sc = &base.scenario;
    ensure!(
        in_q2(&base.prior, &base.signal, &base.response, sc).unwrap(),
        "prescribed response is not a best reply"
    );
    let violating = StochasticMatrix::new(vec![vec![0.0, 0.0, 0.0, 0.0, 1.0]; 2]).unwrap();
    ensure!(
        !in_q2(&base.prior, &base.signal, &violating, sc).unwrap(),
        "violating response passes the best-reply check"
    );
    let alts = random_responses(ALTERNATIVES, 2, sc.actions().len(), ALTERNATIVES_SEED).unwrap();
    let mut max_gaps = Vec::new();
    let mut fix_gaps = Vec::new();
    for (cfg, cb) in ladder() {
        let gaps = deviation_gaps(&cfg, &cb, &alts, TRIALS).unwrap();
        max_gaps.push(gaps.into_iter().fold(f64::NEG_INFINITY, f64::max));
        let mut bad = cfg.clone();
        bad.response = violating.clone();
        fix_gaps.push(deviation_test(&bad, &cb, &base.response, TRIALS).unwrap());
    }
    ensure!(
        max_gaps.windows(2).all(|w| w[1] < w[0]),
        "max gap does not shrink: {max_gaps:?}"
    );
    ensure!(max_gaps[2] < 0.05, "max gap {} at n = 60", max_gaps[2]);
    ensure!(
        fix_gaps.iter().all(|&g| g > 0.0),
        "fixing gaps {fix_gaps:?}"
    );
    let show = |v: &[f64]| {
        v.iter()
            .map(|g| format!("{g:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    Ok(format!(
        "max gap [{}], fixing gap [{}]",
        show(&max_gaps),
        show(&fix_gaps)
    ))
}

/// Measured on the bundled experiment at n = 12.
const AUDIT_GOLDEN: f64 = 0.054531714295253574;

fn belief_audit() -> Outcome {
    let start = Instant::now();
    let n = 12;
    let cfg = experiment().with_n(n).unwrap();
    let cb = generate_codebook(&cfg).unwrap();
    let report = posterior_belief_audit(&cfg, &cb, TRIALS).map_err(|e| e.to_string())?;
    let measured = report.mean_l1_belief.ok_or("no successful trial")?;
    ensure!(
        (measured - AUDIT_GOLDEN).abs() <= 1e-12,
        "audit {measured} differs from golden {AUDIT_GOLDEN}"
    );

    let base = experiment();
    let uniform = Distribution::uniform(2).unwrap();
    let flat = StochasticMatrix::new(vec![vec![0.5, 0.5]; 2]).unwrap();
    let uninformative = CodingConfig::new(
        n,
        0.3,
        0.2,
        uniform.clone(),
        flat,
        base.response.clone(),
        base.channel.clone(),
        base.input_dist.clone(),
        base.scenario.clone(),
        8,
    )
    .unwrap();
    let cb = generate_codebook(&uninformative).unwrap();
    let control1 = posterior_belief_audit(&uninformative, &cb, TRIALS).unwrap();

    let id = StochasticMatrix::identity(2).unwrap();
    let identity = CodingConfig::new(
        n,
        1.0,
        0.15,
        uniform.clone(),
        id.clone(),
        base.response.clone(),
        infodesign::channel::Dmc::new(id),
        uniform,
        base.scenario.clone(),
        8,
    )
    .unwrap();
    let words: Vec<Vec<u8>> = (0..1u32 << n)
        .map(|s| (0..n).map(|i| ((s >> i) & 1) as u8).collect())
        .collect();
    let cb = Codebook::from_words(n, words.clone(), words).unwrap();
    let control2 = posterior_belief_audit(&identity, &cb, TRIALS).unwrap();

    for (name, r) in [("uninformative", &control1), ("identity", &control2)] {
        let v = r
            .mean_l1_belief
            .ok_or(format!("{name} control had no successful trial"))?;
        ensure!(v.abs() <= 1e-12, "{name} control gives {v}");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {}", secs(elapsed));
    Ok(format!(
        "audit = {measured:.6} (ceiling {:.4}), controls 0, in {}",
        report.ceiling,
        secs(elapsed)
    ))
}

fn strip_duration(bytes: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(bytes).unwrap();
    v.as_object_mut().unwrap().remove("duration_ms");
    v
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = configs();
    let experiment = cfg.join("experiment.json");
    let id3 = cfg.join("id3.json");
    let aligned = cfg.join("aligned.json");
    let s = |p: &Path| p.display().to_string();
    let runs: Vec<(&str, Vec<String>)> = vec![
        (
            "capacity",
            vec!["capacity".into(), "--matrix".into(), s(&id3)],
        ),
        (
            "region",
            vec![
                "region".into(),
                "--p".into(),
                "0.5".into(),
                "--eps".into(),
                "0.25".into(),
            ],
        ),
        ("bestreply", vec!["bestreply".into()]),
        (
            "surface",
            vec!["surface".into(), "--mode".into(), "block".into()],
        ),
        (
            "solve",
            vec![
                "solve".into(),
                "--scenario".into(),
                s(&aligned),
                "--mode".into(),
                "one-shot".into(),
                "--eps".into(),
                "0.1".into(),
            ],
        ),
        (
            "simulate",
            vec![
                "simulate".into(),
                "--experiment".into(),
                s(&experiment),
                "--n".into(),
                "20".into(),
                "--deviations".into(),
                "5".into(),
            ],
        ),
    ];
    let mut files = 0;
    for (name, args) in &runs {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{name}.{rep}.out"));
            let trials = dir.path().join(format!("{name}.{rep}.trials.csv"));
            let mut full = args.clone();
            full.extend(["-o".into(), s(&out)]);
            if *name == "simulate" {
                full.extend(["--trials-csv".into(), s(&trials)]);
            }
            let refs: Vec<&str> = full.iter().map(String::as_str).collect();
            run_cli(&refs)?;
            let mut manifest = std::fs::read(format!("{}.manifest.json", out.display())).unwrap();
            let normalized = strip_duration(&manifest)
                .to_string()
                .replace(&s(&out), "OUT")
                .replace(&s(&trials), "TRIALS");
            manifest = normalized.into_bytes();
            let mut data = vec![std::fs::read(&out).unwrap(), manifest];
            if *name == "simulate" {
                data.push(std::fs::read(&trials).unwrap());
            }
            outputs.push(data);
        }
        ensure!(
            outputs[0] == outputs[1],
            "{name} outputs differ between runs"
        );
        files += outputs[0].len();
    }
    Ok(format!(
        "{} subcommands, {files} files byte-identical across two runs",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("MAC unconstrained equilibrium", mac_unconstrained),
        ("revealing benchmark", revealing_benchmark),
        ("rate-limited equilibria", rate_limited),
        ("signal/posterior consistency", signal_consistency),
        ("region geometry", region_geometry),
        ("capacity cross-check", capacity_cross_check),
        ("property suites", property_suites),
        ("simulator convergence trends", convergence_trends),
        ("deviation test", deviation_trends),
        ("posterior-belief audit", belief_audit),
        ("determinism", determinism),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let k = i + 1;
        if only.is_some_and(|o| o != k) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {k:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failures += 1;
                println!("criterion {k:>2} FAIL  {name}: {why}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
