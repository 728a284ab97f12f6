//! Monte Carlo random-coding simulator for the separated source/channel
//! scheme: a random `W` codebook covers the source, a random `X` codebook
//! carries the index over the channel, and the receiver acts on the decoded
//! `W` word.

mod audit;
mod codebook;
mod trial;

pub use audit::{posterior_belief_audit, AuditReport, AUDIT_MAX_SEQUENCES};
pub use codebook::{
    decode, encode, generate_actions, generate_codebook, transmit, Codebook, MAX_CODEBOOK_WORDS,
};
pub use trial::{
    deviation_gaps, deviation_test, random_responses, run_experiment, run_experiment_with,
    run_trial, Experiment, ExperimentSummary, TrialResult,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::Dmc;
use crate::error::{Error, Result};
use crate::mac::scenario_from_json;
use crate::persuasion::Scenario;
use crate::prob::{
    compose_markov, mutual_information, Distribution, JointDistribution, StochasticMatrix,
};

/// Block length at which `eps_typ` is the radius under `sqrt_n` scaling.
pub const RADIUS_REFERENCE_N: usize = 20;

pub const DEFAULT_TRIALS: usize = 200;

/// How the L1 typicality radius depends on the block length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusScaling {
    /// radius = `eps_typ` at every `n`
    #[default]
    Fixed,
    /// radius = `eps_typ · √(20/n)`
    SqrtN,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodingConfigRaw {
    n: usize,
    rate: f64,
    eps_typ: f64,
    #[serde(default)]
    radius_scaling: RadiusScaling,
    #[serde(default)]
    prior: Option<Distribution>,
    signal: StochasticMatrix,
    response: StochasticMatrix,
    channel: Dmc,
    input_dist: Distribution,
    scenario: serde_json::Value,
    seed: u64,
    #[serde(default)]
    trials: Option<usize>,
}

/// One simulator experiment. The target joint `Q(u, w, v)` is
/// `prior × signal × response`; utilities come from `scenario`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodingConfigRaw")]
pub struct CodingConfig {
    pub n: usize,
    /// bits per source symbol
    pub rate: f64,
    pub eps_typ: f64,
    pub radius_scaling: RadiusScaling,
    pub prior: Distribution,
    pub signal: StochasticMatrix,
    pub response: StochasticMatrix,
    pub channel: Dmc,
    pub input_dist: Distribution,
    pub scenario: Scenario,
    pub seed: u64,
    pub trials: usize,
}

impl TryFrom<CodingConfigRaw> for CodingConfig {
    type Error = Error;

    fn try_from(raw: CodingConfigRaw) -> Result<Self> {
        let scenario = scenario_from_json(&raw.scenario.to_string())
            .map_err(|e| Error::InvalidConfig(format!("scenario: {e}")))?;
        let prior = raw.prior.unwrap_or_else(|| scenario.prior().clone());
        CodingConfig::new(
            raw.n,
            raw.rate,
            raw.eps_typ,
            prior,
            raw.signal,
            raw.response,
            raw.channel,
            raw.input_dist,
            scenario,
            raw.seed,
        )
        .map(|c| CodingConfig {
            radius_scaling: raw.radius_scaling,
            trials: raw.trials.unwrap_or(DEFAULT_TRIALS),
            ..c
        })
        .and_then(|c| {
            if c.trials == 0 {
                Err(Error::InvalidConfig(
                    "trials: at least one trial is required".into(),
                ))
            } else {
                Ok(c)
            }
        })
    }
}

impl CodingConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        rate: f64,
        eps_typ: f64,
        prior: Distribution,
        signal: StochasticMatrix,
        response: StochasticMatrix,
        channel: Dmc,
        input_dist: Distribution,
        scenario: Scenario,
        seed: u64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "n: block length must be at least 1".into(),
            ));
        }
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "rate: must be finite and >= 0, got {rate}"
            )));
        }
        if !(eps_typ > 0.0 && eps_typ < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "eps_typ: {eps_typ} is outside (0, 1)"
            )));
        }
        if signal.inputs() != prior.len() {
            return Err(Error::InvalidConfig(format!(
                "signal: expected {} rows (one per state), got {}",
                prior.len(),
                signal.inputs()
            )));
        }
        if response.inputs() != signal.outputs() {
            return Err(Error::InvalidConfig(format!(
                "response: expected {} rows (one per message), got {}",
                signal.outputs(),
                response.inputs()
            )));
        }
        if response.outputs() != scenario.actions().len() {
            return Err(Error::InvalidConfig(format!(
                "response: expected {} columns (one per scenario action), got {}",
                scenario.actions().len(),
                response.outputs()
            )));
        }
        if scenario.prior().len() != prior.len() {
            return Err(Error::InvalidConfig(format!(
                "scenario: {} states, prior has {}",
                scenario.prior().len(),
                prior.len()
            )));
        }
        if input_dist.len() != channel.inputs() {
            return Err(Error::InvalidConfig(format!(
                "input_dist: expected {} entries (one per channel input), got {}",
                channel.inputs(),
                input_dist.len()
            )));
        }
        for (name, size) in [
            ("prior", prior.len()),
            ("signal", signal.outputs()),
            ("response", response.outputs()),
            ("channel", channel.outputs().max(channel.inputs())),
        ] {
            if size > 256 {
                return Err(Error::InvalidConfig(format!(
                    "{name}: alphabets are limited to 256 symbols, got {size}"
                )));
            }
        }
        compose_markov(&prior, &signal, &response)?;
        Ok(CodingConfig {
            n,
            rate,
            eps_typ,
            radius_scaling: RadiusScaling::Fixed,
            prior,
            signal,
            response,
            channel,
            input_dist,
            scenario,
            seed,
            trials: DEFAULT_TRIALS,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Same experiment at another block length.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "n: block length must be at least 1".into(),
            ));
        }
        Ok(CodingConfig { n, ..self.clone() })
    }

    /// `Q(u, w, v)` with axes labeled U, W, V.
    pub fn target(&self) -> JointDistribution {
        compose_markov(&self.prior, &self.signal, &self.response).expect("validated config")
    }

    /// L1 typicality radius at this block length.
    pub fn radius(&self) -> f64 {
        match self.radius_scaling {
            RadiusScaling::Fixed => self.eps_typ,
            RadiusScaling::SqrtN => {
                self.eps_typ * (RADIUS_REFERENCE_N as f64 / self.n as f64).sqrt()
            }
        }
    }

    /// `⌈2^{nR}⌉`, with near-integral exponents snapped so that e.g.
    /// `20 × 0.4` gives exactly 256 words.
    pub fn codebook_exponent(&self) -> f64 {
        let e = self.n as f64 * self.rate;
        if (e - e.round()).abs() < 1e-9 {
            e.round()
        } else {
            e
        }
    }

    pub fn codebook_size(&self) -> Result<usize> {
        let e = self.codebook_exponent();
        let required = e.exp2().ceil();
        if required > MAX_CODEBOOK_WORDS as f64 {
            return Err(Error::CodebookTooLarge {
                required,
                cap: MAX_CODEBOOK_WORDS,
            });
        }
        Ok(required.max(1.0) as usize)
    }

    /// Information quantities that bound the rate.
    pub fn rate_bounds(&self) -> Result<RateBounds> {
        let uw = JointDistribution::from_conditional(&self.prior, &self.signal)?;
        let xy = JointDistribution::from_conditional(&self.input_dist, self.channel.transition())?;
        Ok(RateBounds {
            rate: self.rate,
            source_information: mutual_information(&uw)?,
            channel_information: mutual_information(&xy)?,
        })
    }

    /// Reject rates that cannot cover the source or cannot be packed into the
    /// channel.
    pub fn check_rate(&self) -> Result<RateBounds> {
        let b = self.rate_bounds()?;
        if b.rate <= b.source_information {
            return Err(Error::InfeasibleRate {
                rate: b.rate,
                constraint: "covering",
                detail: format!("need R > I(U;W) = {} bits", b.source_information),
            });
        }
        if b.rate >= b.channel_information {
            return Err(Error::InfeasibleRate {
                rate: b.rate,
                constraint: "packing",
                detail: format!(
                    "need R < I(X;Y) = {} bits under input_dist",
                    b.channel_information
                ),
            });
        }
        Ok(b)
    }

    /// Single-letter `(Φ₁, Φ₂)` of the target.
    pub fn target_utilities(&self) -> (f64, f64) {
        let t = self.target();
        let (nu, nw, nv) = (t.dims()[0], t.dims()[1], t.dims()[2]);
        let mut out = (0.0, 0.0);
        for u in 0..nu {
            for w in 0..nw {
                for v in 0..nv {
                    let q = t.get(&[u, w, v]);
                    out.0 += q * self.scenario.phi1()[u][v];
                    out.1 += q * self.scenario.phi2()[u][v];
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateBounds {
    pub rate: f64,
    /// `I(U;W)` in bits, the covering lower bound
    pub source_information: f64,
    /// `I(X;Y)` in bits under `input_dist`, the packing upper bound
    pub channel_information: f64,
}

/// Independent random streams of one experiment. Each trial gets its own
/// stream of every kind, so changing one stage never perturbs another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Codebook = 1,
    Source = 2,
    Encoder = 3,
    Channel = 4,
    Actions = 5,
}

/// `ChaCha8(seed)` on stream `(kind << 56) | trial`.
pub fn stream_rng(seed: u64, kind: Stream, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((kind as u64) << 56) | (trial & ((1 << 56) - 1)));
    rng
}

/// Inverse-CDF draw from `probs` with one uniform `x ∈ [0, 1)`.
#[inline]
pub(crate) fn sample_index(probs: &[f64], x: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if x < acc {
            return i;
        }
    }
    last
}
