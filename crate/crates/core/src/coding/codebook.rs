use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{sample_index, stream_rng, CodingConfig, Stream};
use crate::channel::Dmc;
use crate::error::{Error, Result};
use crate::prob::{JointDistribution, StochasticMatrix};

pub const MAX_CODEBOOK_WORDS: usize = 1 << 24;

/// `M` pairs of words `(Wⁿ(m), Xⁿ(m))`, stored flat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Codebook {
    n: usize,
    words: usize,
    w_words: Vec<u8>,
    x_words: Vec<u8>,
}

impl Codebook {
    /// Build a codebook from explicit words, e.g. to enumerate every source
    /// sequence.
    pub fn from_words(n: usize, w_words: Vec<Vec<u8>>, x_words: Vec<Vec<u8>>) -> Result<Self> {
        if w_words.is_empty() || w_words.len() != x_words.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} W words and {} X words",
                w_words.len(),
                x_words.len()
            )));
        }
        if let Some(bad) = w_words.iter().chain(&x_words).find(|w| w.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "word of length {} in a codebook of block length {n}",
                bad.len()
            )));
        }
        Ok(Codebook {
            n,
            words: w_words.len(),
            w_words: w_words.concat(),
            x_words: x_words.concat(),
        })
    }

    pub fn len(&self) -> usize {
        self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words == 0
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn w_word(&self, m: usize) -> &[u8] {
        &self.w_words[m * self.n..(m + 1) * self.n]
    }

    pub fn x_word(&self, m: usize) -> &[u8] {
        &self.x_words[m * self.n..(m + 1) * self.n]
    }

    fn check_alphabets(&self, w_size: usize, x_size: usize) -> Result<()> {
        let over = |words: &[u8], size: usize| words.iter().any(|&s| s as usize >= size);
        if over(&self.w_words, w_size) || over(&self.x_words, x_size) {
            return Err(Error::DimensionMismatch(format!(
                "codebook symbols outside the W ({w_size}) or X ({x_size}) alphabet"
            )));
        }
        Ok(())
    }
}

/// Draw the `W` words i.i.d. from the target's `W` marginal, then the `X`
/// words i.i.d. from `input_dist`, all from the codebook stream.
pub fn generate_codebook(cfg: &CodingConfig) -> Result<Codebook> {
    let m = cfg.codebook_size()?;
    let n = cfg.n;
    let qw = cfg.target().marginal_of(1)?;
    let mut rng = stream_rng(cfg.seed, Stream::Codebook, 0);
    let mut draw = |probs: &[f64], len: usize| -> Vec<u8> {
        (0..len)
            .map(|_| sample_index(probs, rng.random::<f64>()) as u8)
            .collect()
    };
    let w_words = draw(qw.probs(), m * n);
    let x_words = draw(cfg.input_dist.probs(), m * n);
    Ok(Codebook {
        n,
        words: m,
        w_words,
        x_words,
    })
}

/// L1 test of the joint type of two sequences against a target pair law.
#[derive(Debug, Clone)]
pub(crate) struct PairTest {
    cols: usize,
    target: Vec<f64>,
    radius: f64,
}

impl PairTest {
    pub(crate) fn new(joint: &JointDistribution, radius: f64) -> Self {
        PairTest {
            cols: joint.dims()[1],
            target: joint.probs().to_vec(),
            radius,
        }
    }

    pub(crate) fn distance(&self, a: &[u8], b: &[u8], counts: &mut Vec<u32>) -> f64 {
        counts.clear();
        counts.resize(self.target.len(), 0);
        for (&x, &y) in a.iter().zip(b) {
            counts[x as usize * self.cols + y as usize] += 1;
        }
        let inv = 1.0 / a.len() as f64;
        counts
            .iter()
            .zip(&self.target)
            .map(|(&c, &q)| (c as f64 * inv - q).abs())
            .sum()
    }

    pub(crate) fn typical(&self, a: &[u8], b: &[u8], counts: &mut Vec<u32>) -> bool {
        self.distance(a, b, counts) <= self.radius + 1e-12
    }
}

/// Everything a trial needs, precomputed once per experiment.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub n: usize,
    pub radius: f64,
    pub seed: u64,
    pub prior: Vec<f64>,
    pub source: PairTest,
    pub link: PairTest,
    pub channel: Vec<Vec<f64>>,
    pub dims: [usize; 3],
    pub target: Vec<f64>,
    pub phi1: Vec<Vec<f64>>,
    pub phi2: Vec<Vec<f64>>,
}

impl Prepared {
    pub(crate) fn new(cfg: &CodingConfig, cb: &Codebook) -> Result<Self> {
        if cb.block_length() != cfg.n {
            return Err(Error::DimensionMismatch(format!(
                "codebook block length {} for a config with n = {}",
                cb.block_length(),
                cfg.n
            )));
        }
        cb.check_alphabets(cfg.signal.outputs(), cfg.channel.inputs())?;
        let radius = cfg.radius();
        let target = cfg.target();
        let uw = JointDistribution::from_conditional(&cfg.prior, &cfg.signal)?;
        let xy = JointDistribution::from_conditional(&cfg.input_dist, cfg.channel.transition())?;
        let d = target.dims();
        Ok(Prepared {
            n: cfg.n,
            radius,
            seed: cfg.seed,
            prior: cfg.prior.probs().to_vec(),
            source: PairTest::new(&uw, radius),
            link: PairTest::new(&xy, radius),
            channel: cfg.channel.transition().to_vecs(),
            dims: [d[0], d[1], d[2]],
            target: target.probs().to_vec(),
            phi1: cfg.scenario.phi1().to_vec(),
            phi2: cfg.scenario.phi2().to_vec(),
        })
    }

    pub(crate) fn encode(&self, u: &[u8], cb: &Codebook, rng: &mut ChaCha8Rng) -> Option<usize> {
        let mut counts = Vec::new();
        let hits: Vec<usize> = (0..cb.len())
            .filter(|&m| self.source.typical(u, cb.w_word(m), &mut counts))
            .collect();
        match hits.len() {
            0 => None,
            1 => Some(hits[0]),
            k => Some(hits[rng.random_range(0..k)]),
        }
    }

    pub(crate) fn decode(&self, y: &[u8], cb: &Codebook) -> Option<usize> {
        let mut counts = Vec::new();
        let mut found = None;
        for m in 0..cb.len() {
            if self.link.typical(cb.x_word(m), y, &mut counts) {
                if found.is_some() {
                    return None;
                }
                found = Some(m);
            }
        }
        found
    }
}

/// Index of a codeword jointly typical with `u`, chosen uniformly among all
/// such indices, or `None` when no word covers `u`.
pub fn encode(
    u: &[u8],
    cb: &Codebook,
    cfg: &CodingConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Option<usize>> {
    check_length(u, cfg.n)?;
    Ok(Prepared::new(cfg, cb)?.encode(u, cb, rng))
}

/// The unique codeword index jointly typical with `y`, or `None` when zero or
/// several qualify.
pub fn decode(y: &[u8], cb: &Codebook, cfg: &CodingConfig) -> Result<Option<usize>> {
    check_length(y, cfg.n)?;
    Ok(Prepared::new(cfg, cb)?.decode(y, cb))
}

fn check_length(seq: &[u8], n: usize) -> Result<()> {
    if seq.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "sequence of length {} for block length {n}",
            seq.len()
        )));
    }
    Ok(())
}

/// Memoryless channel output, one uniform per symbol.
pub fn transmit(x: &[u8], channel: &Dmc, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let rows = channel.transition().rows();
    x.iter()
        .map(|&s| sample_index(rows[s as usize].probs(), rng.random::<f64>()) as u8)
        .collect()
}

/// Symbolwise draws from the response rows, one uniform per symbol, so two
/// responses driven by the same stream are coupled draw by draw.
pub fn generate_actions(w: &[u8], response: &StochasticMatrix, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let rows = response.rows();
    w.iter()
        .map(|&s| sample_index(rows[s as usize].probs(), rng.random::<f64>()) as u8)
        .collect()
}
