//! Discrete memoryless channels and their capacity.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::prob::{Distribution, StochasticMatrix};

/// Default stopping tolerance on the capacity bracket, in bits.
pub const CAPACITY_TOL: f64 = 1e-9;
pub const CAPACITY_MAX_ITER: usize = 100_000;

/// A discrete memoryless channel `T(y|x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dmc {
    transition: StochasticMatrix,
}

impl Dmc {
    pub fn new(transition: StochasticMatrix) -> Self {
        Dmc { transition }
    }

    pub fn transition(&self) -> &StochasticMatrix {
        &self.transition
    }

    pub fn inputs(&self) -> usize {
        self.transition.inputs()
    }

    pub fn outputs(&self) -> usize {
        self.transition.outputs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    /// bits per channel use
    pub capacity: f64,
    pub optimal_input: Distribution,
    pub iterations: usize,
    /// upper minus lower capacity bound at termination
    pub residual: f64,
}

fn check_noise(eps: f64) -> Result<()> {
    if (0.0..=0.5).contains(&eps) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            range: "[0, 0.5]",
        })
    }
}

/// Binary symmetric channel with crossover probability `eps`.
pub fn bsc(eps: f64) -> Result<Dmc> {
    check_noise(eps)?;
    Ok(Dmc::new(StochasticMatrix::new(vec![
        vec![1.0 - eps, eps],
        vec![eps, 1.0 - eps],
    ])?))
}

/// `α ⋆ ε = (1 − α)·ε + α·(1 − ε)`, the crossover of a binary signal
/// followed by a BSC.
pub fn effective_noise(alpha: f64, eps: f64) -> Result<f64> {
    check_probability("alpha", alpha)?;
    check_noise(eps)?;
    Ok(star(alpha, eps))
}

#[inline]
pub(crate) fn star(alpha: f64, eps: f64) -> f64 {
    (1.0 - alpha) * eps + alpha * (1.0 - eps)
}

/// `P(y|u)` for a signal feeding the channel input.
pub fn concat(signal: &StochasticMatrix, ch: &Dmc) -> Result<StochasticMatrix> {
    signal.then(&ch.transition)
}

/// Capacity by Blahut–Arimoto alternating maximization with the default
/// tolerance and iteration cap.
pub fn capacity(ch: &Dmc) -> Result<CapacityResult> {
    capacity_with(ch, CAPACITY_TOL, CAPACITY_MAX_ITER)
}

pub fn capacity_with(ch: &Dmc, tol: f64, max_iter: usize) -> Result<CapacityResult> {
    let t = ch.transition();
    let (nx, ny) = (t.inputs(), t.outputs());
    let mut input = vec![1.0 / nx as f64; nx];
    let mut divergence = vec![0.0; nx];
    let mut residual = f64::INFINITY;

    for iteration in 1..=max_iter {
        let output: Vec<f64> = (0..ny)
            .map(|y| (0..nx).map(|x| input[x] * t.get(x, y)).sum())
            .collect();
        for (x, d) in divergence.iter_mut().enumerate() {
            *d = t
                .row(x)
                .probs()
                .iter()
                .zip(&output)
                .filter(|(&txy, _)| txy > 0.0)
                .map(|(&txy, &qy)| txy * (txy / qy).log2())
                .sum();
        }
        // I(p; T) = Σ p(x) D(T(.|x) || q) is a lower bound, max_x D(...) an upper one.
        let lower = input
            .iter()
            .zip(&divergence)
            .map(|(p, d)| p * d)
            .sum::<f64>();
        let upper = divergence.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        residual = (upper - lower).max(0.0);
        if residual <= tol {
            return Ok(CapacityResult {
                capacity: lower.max(0.0),
                optimal_input: normalized(input)?,
                iterations: iteration,
                residual,
            });
        }
        let weights: Vec<f64> = input
            .iter()
            .zip(&divergence)
            .map(|(p, d)| p * d.exp2())
            .collect();
        let total: f64 = weights.iter().sum();
        input = weights.into_iter().map(|w| w / total).collect();
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}

fn normalized(mut v: Vec<f64>) -> Result<Distribution> {
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    Distribution::new(v)
}
