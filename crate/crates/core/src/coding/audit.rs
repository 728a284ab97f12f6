use rayon::prelude::*;
use serde::Serialize;

use super::codebook::{Codebook, Prepared};
use super::trial::run_experiment_with;
use super::CodingConfig;
use crate::error::{Error, Result};
use crate::prob::JointDistribution;

/// Largest number of source sequences the audit enumerates.
pub const AUDIT_MAX_SEQUENCES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    /// mean over successful trials of `(1/n) Σᵢ ‖P(Uᵢ | m) − Q(Uᵢ | wᵢ(m))‖₁`;
    /// absent when no trial succeeded
    pub mean_l1_belief: Option<f64>,
    pub successful_trials: usize,
    pub trials: usize,
    pub radius: f64,
    /// asymptotic ceiling `2√(ln 2 · radius)`
    pub ceiling: f64,
}

/// Exact posterior beliefs of a receiver who knows the code and the decoded
/// index, compared with the single-letter posteriors of the target.
///
/// `P(uⁿ | m) ∝ P(uⁿ) · 1[(uⁿ, wⁿ(m)) typical] / K(uⁿ)`, where `K(uⁿ)` counts
/// the codewords covering `uⁿ`. Conditioning on successful decoding does not
/// change it because the channel noise is independent of the source.
pub fn posterior_belief_audit(
    cfg: &CodingConfig,
    cb: &Codebook,
    trials: usize,
) -> Result<AuditReport> {
    let nu = cfg.prior.len();
    let n = cfg.n;
    let required = (nu as f64).powi(n as i32);
    if n > 16 || required > AUDIT_MAX_SEQUENCES as f64 {
        return Err(Error::Intractable {
            required,
            bound: AUDIT_MAX_SEQUENCES,
        });
    }
    let sequences = required as usize;
    let prep = Prepared::new(cfg, cb)?;
    let prior = cfg.prior.probs();

    let decode_seq = |mut s: usize| -> Vec<u8> {
        (0..n)
            .map(|_| {
                let d = (s % nu) as u8;
                s /= nu;
                d
            })
            .collect()
    };
    let covers: Vec<(f64, Vec<usize>)> = (0..sequences)
        .into_par_iter()
        .map(|s| {
            let u = decode_seq(s);
            let p: f64 = u.iter().map(|&x| prior[x as usize]).product();
            let mut counts = Vec::new();
            let hits = (0..cb.len())
                .filter(|&m| prep.source.typical(&u, cb.w_word(m), &mut counts))
                .collect();
            (p, hits)
        })
        .collect();

    // belief[m][i][u], unnormalized
    let mut belief = vec![0.0; cb.len() * n * nu];
    let mut mass = vec![0.0; cb.len()];
    for (s, (p, hits)) in covers.iter().enumerate() {
        if hits.is_empty() || *p == 0.0 {
            continue;
        }
        let share = p / hits.len() as f64;
        let u = decode_seq(s);
        for &m in hits {
            mass[m] += share;
            for (i, &x) in u.iter().enumerate() {
                belief[(m * n + i) * nu + x as usize] += share;
            }
        }
    }

    let uw = JointDistribution::from_conditional(&cfg.prior, &cfg.signal)?;
    let single = uw.conditional(1)?.matrix;
    let gap = |m: usize| -> f64 {
        let w = cb.w_word(m);
        (0..n)
            .map(|i| {
                let q = single.row(w[i] as usize).probs();
                (0..nu)
                    .map(|x| (belief[(m * n + i) * nu + x] / mass[m] - q[x]).abs())
                    .sum::<f64>()
            })
            .sum::<f64>()
            / n as f64
    };

    let exp = run_experiment_with(cfg, cb, trials)?;
    let values: Vec<f64> = exp
        .trials
        .iter()
        .filter(|r| !r.error_event)
        .map(|r| gap(r.decoded_m.expect("successful trials decode")))
        .collect();
    let radius = cfg.radius();
    Ok(AuditReport {
        mean_l1_belief: (!values.is_empty())
            .then(|| values.iter().sum::<f64>() / values.len() as f64),
        successful_trials: values.len(),
        trials,
        radius,
        ceiling: 2.0 * (std::f64::consts::LN_2 * radius).sqrt(),
    })
}
