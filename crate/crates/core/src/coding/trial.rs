use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::codebook::{generate_actions, generate_codebook, Codebook, Prepared};
use super::{sample_index, stream_rng, CodingConfig, Stream};
use crate::error::{Error, Result};
use crate::prob::{Distribution, JointDistribution, StochasticMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: u64,
    pub error_event: bool,
    /// no codeword covered the source
    pub no_cover: bool,
    /// zero or several codewords matched the channel output
    pub decode_fail: bool,
    pub chosen_m: Option<usize>,
    pub decoded_m: Option<usize>,
    /// joint type of `(Uⁿ, Ŵⁿ, Vⁿ)`
    pub empirical: JointDistribution,
    pub l1_to_target: f64,
    pub util1_n: f64,
    pub util2_n: f64,
}

/// Source, codeword choice, channel and decoding of one trial; the actions
/// come later so that several responses can share them.
struct Transmission {
    u: Vec<u8>,
    chosen: Option<usize>,
    decoded: Option<usize>,
    /// decoded `W` word, or the all-first-symbol word on a decoding failure
    w: Vec<u8>,
}

fn transmission(prep: &Prepared, cb: &Codebook, trial: u64) -> Transmission {
    let mut src = stream_rng(prep.seed, Stream::Source, trial);
    let u: Vec<u8> = (0..prep.n)
        .map(|_| sample_index(&prep.prior, src.random::<f64>()) as u8)
        .collect();
    let chosen = prep.encode(&u, cb, &mut stream_rng(prep.seed, Stream::Encoder, trial));
    let x = cb.x_word(chosen.unwrap_or(0));
    let y = {
        let mut rng = stream_rng(prep.seed, Stream::Channel, trial);
        x.iter()
            .map(|&s| sample_index(&prep.channel[s as usize], rng.random::<f64>()) as u8)
            .collect::<Vec<u8>>()
    };
    let decoded = prep.decode(&y, cb);
    let w = match decoded {
        Some(m) => cb.w_word(m).to_vec(),
        None => vec![0; prep.n],
    };
    Transmission {
        u,
        chosen,
        decoded,
        w,
    }
}

fn utilities(table1: &[Vec<f64>], table2: &[Vec<f64>], u: &[u8], v: &[u8]) -> (f64, f64) {
    let n = u.len() as f64;
    let (a, b) = u.iter().zip(v).fold((0.0, 0.0), |(a, b), (&s, &t)| {
        (
            a + table1[s as usize][t as usize],
            b + table2[s as usize][t as usize],
        )
    });
    (a / n, b / n)
}

fn actions(prep: &Prepared, response: &StochasticMatrix, w: &[u8], trial: u64) -> Vec<u8> {
    generate_actions(
        w,
        response,
        &mut stream_rng(prep.seed, Stream::Actions, trial),
    )
}

fn finish(
    prep: &Prepared,
    response: &StochasticMatrix,
    t: Transmission,
    trial: u64,
) -> Result<TrialResult> {
    let v = actions(prep, response, &t.w, trial);
    let [nu, nw, nv] = prep.dims;
    let mut counts = vec![0u32; nu * nw * nv];
    for ((&a, &b), &c) in t.u.iter().zip(&t.w).zip(&v) {
        counts[(a as usize * nw + b as usize) * nv + c as usize] += 1;
    }
    let inv = 1.0 / prep.n as f64;
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 * inv).collect();
    let l1 = probs
        .iter()
        .zip(&prep.target)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>();
    let empirical = JointDistribution::new(
        vec![nu, nw, nv],
        vec!["U".into(), "W".into(), "V".into()],
        probs,
    )?;
    let (util1_n, util2_n) = utilities(&prep.phi1, &prep.phi2, &t.u, &v);
    let matched = t.chosen.is_some() && t.chosen == t.decoded;
    Ok(TrialResult {
        trial,
        error_event: !(matched && l1 <= prep.radius + 1e-12),
        no_cover: t.chosen.is_none(),
        decode_fail: t.decoded.is_none(),
        chosen_m: t.chosen,
        decoded_m: t.decoded,
        empirical,
        l1_to_target: l1,
        util1_n,
        util2_n,
    })
}

/// One encode → transmit → decode → act round on the streams of `trial`.
pub fn run_trial(cfg: &CodingConfig, cb: &Codebook, trial: u64) -> Result<TrialResult> {
    let prep = Prepared::new(cfg, cb)?;
    finish(&prep, &cfg.response, transmission(&prep, cb, trial), trial)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub n: usize,
    pub rate: f64,
    pub radius: f64,
    pub codebook_size: usize,
    pub seed: u64,
    pub trials: usize,
    pub error_rate: f64,
    /// binomial standard error of `error_rate`
    pub error_rate_se: f64,
    pub no_cover_rate: f64,
    pub decode_fail_rate: f64,
    pub mean_l1: f64,
    pub median_l1: f64,
    pub l1_half_width: f64,
    pub mean_util1: f64,
    pub util1_half_width: f64,
    pub mean_util2: f64,
    pub util2_half_width: f64,
    /// single-letter utilities of the target
    pub target_util1: f64,
    pub target_util2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment {
    pub summary: ExperimentSummary,
    pub trials: Vec<TrialResult>,
}

/// Mean and 95% normal half-width; the half-width is 0 for a single sample.
fn mean_and_half_width(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, 1.96 * (var / k).sqrt())
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn rate(results: &[TrialResult], f: impl Fn(&TrialResult) -> bool) -> f64 {
    results.iter().filter(|r| f(r)).count() as f64 / results.len() as f64
}

/// Run `trials` independent trials against the codebook of `cfg`.
pub fn run_experiment(cfg: &CodingConfig, trials: usize) -> Result<Experiment> {
    let cb = generate_codebook(cfg)?;
    run_experiment_with(cfg, &cb, trials)
}

pub fn run_experiment_with(cfg: &CodingConfig, cb: &Codebook, trials: usize) -> Result<Experiment> {
    if trials == 0 {
        return Err(Error::InvalidConfig(
            "trials: at least one trial is required".into(),
        ));
    }
    let prep = Prepared::new(cfg, cb)?;
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|t| finish(&prep, &cfg.response, transmission(&prep, cb, t), t))
        .collect::<Result<Vec<_>>>()?;
    let err = rate(&results, |r| r.error_event);
    let l1: Vec<f64> = results.iter().map(|r| r.l1_to_target).collect();
    let u1: Vec<f64> = results.iter().map(|r| r.util1_n).collect();
    let u2: Vec<f64> = results.iter().map(|r| r.util2_n).collect();
    let (mean_l1, l1_half_width) = mean_and_half_width(&l1);
    let (mean_util1, util1_half_width) = mean_and_half_width(&u1);
    let (mean_util2, util2_half_width) = mean_and_half_width(&u2);
    let (target_util1, target_util2) = cfg.target_utilities();
    let summary = ExperimentSummary {
        n: cfg.n,
        rate: cfg.rate,
        radius: prep.radius,
        codebook_size: cb.len(),
        seed: cfg.seed,
        trials,
        error_rate: err,
        error_rate_se: (err * (1.0 - err) / trials as f64).sqrt(),
        no_cover_rate: rate(&results, |r| r.no_cover),
        decode_fail_rate: rate(&results, |r| r.decode_fail),
        mean_l1,
        median_l1: median(&l1),
        l1_half_width,
        mean_util1,
        util1_half_width,
        mean_util2,
        util2_half_width,
        target_util1,
        target_util2,
    };
    Ok(Experiment {
        summary,
        trials: results,
    })
}

/// Mean paired gap `util2(alt) − util2(prescribed)` for each alternative
/// response. Every trial shares its source, codeword, channel and action
/// uniforms across all responses.
pub fn deviation_gaps(
    cfg: &CodingConfig,
    cb: &Codebook,
    alts: &[StochasticMatrix],
    trials: usize,
) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(Error::InvalidConfig(
            "trials: at least one trial is required".into(),
        ));
    }
    for (i, a) in alts.iter().enumerate() {
        if a.inputs() != cfg.response.inputs() || a.outputs() != cfg.response.outputs() {
            return Err(Error::DimensionMismatch(format!(
                "alternative response {i} is {}x{}, prescribed is {}x{}",
                a.inputs(),
                a.outputs(),
                cfg.response.inputs(),
                cfg.response.outputs()
            )));
        }
    }
    let prep = Prepared::new(cfg, cb)?;
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let tx = transmission(&prep, cb, t);
            let util2 = |resp: &StochasticMatrix| {
                let v = actions(&prep, resp, &tx.w, t);
                utilities(&prep.phi1, &prep.phi2, &tx.u, &v).1
            };
            let base = util2(&cfg.response);
            alts.iter().map(|a| util2(a) - base).collect()
        })
        .collect();
    Ok((0..alts.len())
        .map(|i| per_trial.iter().map(|g| g[i]).sum::<f64>() / trials as f64)
        .collect())
}

pub fn deviation_test(
    cfg: &CodingConfig,
    cb: &Codebook,
    alt: &StochasticMatrix,
    trials: usize,
) -> Result<f64> {
    Ok(deviation_gaps(cfg, cb, std::slice::from_ref(alt), trials)?[0])
}

/// `count` random deterministic responses (each message mapped to a uniformly
/// drawn action).
pub fn random_responses(
    count: usize,
    messages: usize,
    actions: usize,
    seed: u64,
) -> Result<Vec<StochasticMatrix>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rows = (0..messages)
                .map(|_| Distribution::degenerate(actions, rng.random_range(0..actions)))
                .collect::<Result<Vec<_>>>()?;
            StochasticMatrix::from_rows(rows)
        })
        .collect()
}
