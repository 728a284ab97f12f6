//! The one-shot persuasion game: receiver best replies, membership in the
//! information-constrained and strategically compatible sets, and the
//! sender-optimal (Stackelberg) signaling structure.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{mutual_information, Distribution, JointDistribution, StochasticMatrix};
use crate::splitting::{
    self, grid_axis, is_valid_split, BinarySignal, FeasibilityMode, FeasibilityVerdict,
    PosteriorPair,
};

/// Tolerance for ties in the receiver's expected utility.
pub const BEST_REPLY_TOL: f64 = 1e-12;

/// A split must beat the no-information value by this relative margin to be
/// preferred over it.
pub const NO_INFO_MARGIN: f64 = 1e-12;

/// Default posterior grid step of the equilibrium solver.
pub const DEFAULT_SOLVER_RESOLUTION: f64 = 1e-3;

#[derive(Debug, Deserialize)]
struct ScenarioRaw {
    #[serde(default)]
    states: Option<Vec<String>>,
    prior: Distribution,
    actions: Vec<String>,
    phi1: Vec<Vec<f64>>,
    phi2: Vec<Vec<f64>>,
}

/// A persuasion game: a prior over states, the receiver's actions and the
/// two utility tables indexed `[state][action]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioRaw")]
pub struct Scenario {
    states: Vec<String>,
    prior: Distribution,
    actions: Vec<String>,
    phi1: Vec<Vec<f64>>,
    phi2: Vec<Vec<f64>>,
}

impl TryFrom<ScenarioRaw> for Scenario {
    type Error = Error;

    fn try_from(raw: ScenarioRaw) -> Result<Self> {
        let states = raw
            .states
            .unwrap_or_else(|| (1..=raw.prior.len()).map(|i| format!("u{i}")).collect());
        Scenario::with_states(states, raw.prior, raw.actions, raw.phi1, raw.phi2)
    }
}

impl Scenario {
    pub fn new(
        prior: Distribution,
        actions: Vec<String>,
        phi1: Vec<Vec<f64>>,
        phi2: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let states = (1..=prior.len()).map(|i| format!("u{i}")).collect();
        Self::with_states(states, prior, actions, phi1, phi2)
    }

    pub fn with_states(
        states: Vec<String>,
        prior: Distribution,
        actions: Vec<String>,
        phi1: Vec<Vec<f64>>,
        phi2: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::InvalidConfig(
                "actions: at least one action is required".into(),
            ));
        }
        if states.len() != prior.len() {
            return Err(Error::InvalidConfig(format!(
                "states: {} labels for a prior over {} states",
                states.len(),
                prior.len()
            )));
        }
        for (name, table) in [("phi1", &phi1), ("phi2", &phi2)] {
            if table.len() != prior.len() {
                return Err(Error::InvalidConfig(format!(
                    "{name}: expected {} rows (one per state), got {}",
                    prior.len(),
                    table.len()
                )));
            }
            for (u, row) in table.iter().enumerate() {
                if row.len() != actions.len() {
                    return Err(Error::InvalidConfig(format!(
                        "{name}[{u}]: expected {} entries (one per action), got {}",
                        actions.len(),
                        row.len()
                    )));
                }
                if let Some(v) = row.iter().position(|x| !x.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "{name}[{u}][{v}]: utility must be finite"
                    )));
                }
            }
        }
        Ok(Scenario {
            states,
            prior,
            actions,
            phi1,
            phi2,
        })
    }

    pub fn prior(&self) -> &Distribution {
        &self.prior
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn phi1(&self) -> &[Vec<f64>] {
        &self.phi1
    }

    pub fn phi2(&self) -> &[Vec<f64>] {
        &self.phi2
    }

    pub fn with_prior(&self, prior: Distribution) -> Result<Scenario> {
        Scenario::with_states(
            self.states.clone(),
            prior,
            self.actions.clone(),
            self.phi1.clone(),
            self.phi2.clone(),
        )
    }

    /// Prior probability of the first state, for binary scenarios.
    pub fn binary_prior(&self) -> Result<f64> {
        if self.prior.len() != 2 {
            return Err(Error::Unsupported(format!(
                "the solver handles two states, this scenario has {}",
                self.prior.len()
            )));
        }
        Ok(self.prior[0])
    }

    fn expected(table: &[Vec<f64>], posterior: &[f64], v: usize) -> f64 {
        posterior.iter().zip(table).map(|(q, row)| q * row[v]).sum()
    }
}

pub fn receiver_expected_utility(posterior: &Distribution, v: usize, sc: &Scenario) -> Result<f64> {
    check_posterior(posterior, sc)?;
    if v >= sc.actions.len() {
        return Err(Error::InvalidConfig(format!(
            "unknown action index {v}; the scenario has {} actions",
            sc.actions.len()
        )));
    }
    Ok(Scenario::expected(&sc.phi2, posterior.probs(), v))
}

fn check_posterior(posterior: &Distribution, sc: &Scenario) -> Result<()> {
    if posterior.len() != sc.prior.len() {
        return Err(Error::DimensionMismatch(format!(
            "posterior over {} states for a scenario with {}",
            posterior.len(),
            sc.prior.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestReplySet {
    pub optimal_actions: Vec<usize>,
    pub receiver_value: f64,
    /// The sender-preferred optimal action, lowest index on further ties.
    pub selected: usize,
    /// Sender's expected utility under `selected`.
    pub sender_value: f64,
}

pub fn best_reply(posterior: &Distribution, sc: &Scenario) -> Result<BestReplySet> {
    check_posterior(posterior, sc)?;
    Ok(best_reply_unchecked(posterior.probs(), sc))
}

fn best_reply_unchecked(q: &[f64], sc: &Scenario) -> BestReplySet {
    let receiver: Vec<f64> = (0..sc.actions.len())
        .map(|v| Scenario::expected(&sc.phi2, q, v))
        .collect();
    let best = receiver.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let optimal_actions: Vec<usize> = (0..receiver.len())
        .filter(|&v| receiver[v] >= best - BEST_REPLY_TOL)
        .collect();
    let mut selected = optimal_actions[0];
    let mut sender_value = Scenario::expected(&sc.phi1, q, selected);
    for &v in &optimal_actions[1..] {
        let s = Scenario::expected(&sc.phi1, q, v);
        if s > sender_value {
            selected = v;
            sender_value = s;
        }
    }
    BestReplySet {
        optimal_actions,
        receiver_value: best,
        selected,
        sender_value,
    }
}

/// Whether the induced `I(U;W)` fits under `cap`. The receiver's response does
/// not enter this constraint.
pub fn in_q0(
    prior: &Distribution,
    signal: &StochasticMatrix,
    cap: f64,
) -> Result<FeasibilityVerdict> {
    let joint = JointDistribution::from_conditional(prior, signal)?;
    let info = mutual_information(&joint)?;
    Ok(FeasibilityVerdict::from_slack(
        cap - info,
        FeasibilityMode::Block,
    ))
}

/// Whether every message sent with positive probability is answered only
/// with best replies to its posterior.
pub fn in_q2(
    prior: &Distribution,
    signal: &StochasticMatrix,
    response: &StochasticMatrix,
    sc: &Scenario,
) -> Result<bool> {
    if prior.len() != sc.prior.len() || response.outputs() != sc.actions.len() {
        return Err(Error::DimensionMismatch(format!(
            "response over {} actions for a scenario with {} states and {} actions",
            response.outputs(),
            sc.prior.len(),
            sc.actions.len()
        )));
    }
    if signal.outputs() != response.inputs() {
        return Err(Error::DimensionMismatch(format!(
            "signal has {} messages, response has {} rows",
            signal.outputs(),
            response.inputs()
        )));
    }
    let joint = JointDistribution::from_conditional(prior, signal)?;
    let message = joint.marginal_of(1)?;
    let posteriors = joint.conditional(1)?;
    for w in 0..signal.outputs() {
        if message[w] <= 0.0 {
            continue;
        }
        let br = best_reply_unchecked(posteriors.matrix.row(w).probs(), sc);
        let off_support = response
            .row(w)
            .probs()
            .iter()
            .enumerate()
            .any(|(v, &m)| m > 0.0 && !br.optimal_actions.contains(&v));
        if off_support {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sender and receiver values of one posterior under the selected best reply.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PointValue {
    phi1: f64,
    phi2: f64,
    action: usize,
}

fn point_value(q: f64, sc: &Scenario) -> PointValue {
    let br = best_reply_unchecked(&[q, 1.0 - q], sc);
    PointValue {
        phi1: br.sender_value,
        phi2: br.receiver_value,
        action: br.selected,
    }
}

#[inline]
fn combine(p: f64, t: &PosteriorPair, a: PointValue, b: PointValue) -> (f64, f64) {
    if t.p1 == t.p2 {
        return (a.phi1, a.phi2);
    }
    let lambda = t.weight_w1(p);
    (
        lambda * a.phi1 + (1.0 - lambda) * b.phi1,
        lambda * a.phi2 + (1.0 - lambda) * b.phi2,
    )
}

/// Expected `(φ₁, φ₂)` of the split `t` of prior `p` when the receiver best
/// replies to each posterior. `t = (p, p)` is the no-information point.
pub fn sender_value(t: &PosteriorPair, p: f64, sc: &Scenario) -> Result<(f64, f64)> {
    sc.binary_prior()?;
    let no_info = t.p1 == p && t.p2 == p;
    if !no_info && !is_valid_split(p, t) {
        return Err(Error::InvalidSplit {
            prior: p,
            p1: t.p1,
            p2: t.p2,
        });
    }
    Ok(combine(p, t, point_value(t.p1, sc), point_value(t.p2, sc)))
}

/// Which posterior splits the sender may choose from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveMode {
    Unconstrained,
    /// single channel use over a BSC with crossover `eps`
    OneShot {
        eps: f64,
    },
    /// block coding over a channel of the given capacity (bits/use)
    Block {
        capacity: f64,
    },
}

impl SolveMode {
    pub fn feasibility_mode(&self) -> FeasibilityMode {
        match self {
            SolveMode::Unconstrained => FeasibilityMode::Unconstrained,
            SolveMode::OneShot { .. } => FeasibilityMode::OneShot,
            SolveMode::Block { .. } => FeasibilityMode::Block,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            SolveMode::OneShot { eps } if !(0.0..=0.5).contains(&eps) => Err(Error::OutOfRange {
                name: "eps",
                value: eps,
                range: "[0, 0.5]",
            }),
            SolveMode::Block { capacity } if !(capacity >= 0.0 && capacity.is_finite()) => {
                Err(Error::OutOfRange {
                    name: "capacity",
                    value: capacity,
                    range: "[0, inf)",
                })
            }
            _ => Ok(()),
        }
    }

    /// Verdict for a valid split, or for the no-information point.
    pub fn verdict(&self, p: f64, t: &PosteriorPair) -> FeasibilityVerdict {
        let no_info = t.p1 == t.p2;
        let slack = match *self {
            SolveMode::Unconstrained => 0.0,
            SolveMode::OneShot { eps } if no_info => 0.5 - eps,
            SolveMode::OneShot { eps } => splitting::one_shot_slack(p, t, eps),
            SolveMode::Block { capacity } if no_info => capacity,
            SolveMode::Block { capacity } => {
                let (a, b) = splitting::required_parameters(p, t);
                capacity - splitting::information_unchecked(p, a, b)
            }
        };
        FeasibilityVerdict::from_slack(slack, self.feasibility_mode())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumResult {
    pub mode: SolveMode,
    pub prior: f64,
    pub resolution: f64,
    pub posteriors: PosteriorPair,
    pub signal: BinarySignal,
    pub no_information: bool,
    /// `(P(w₁), P(w₂))`
    pub message_weights: Distribution,
    /// receiver action index per message
    pub receiver_actions: [usize; 2],
    pub receiver_action_labels: [String; 2],
    pub phi1_star: f64,
    pub phi2_star: f64,
    pub feasibility: FeasibilityVerdict,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    p1: f64,
    p2: f64,
}

impl Candidate {
    /// Higher value wins; ties go to the lowest `p₁`, then the lowest `p₂`.
    fn beats(&self, other: &Candidate) -> bool {
        self.value > other.value
            || (self.value == other.value && (self.p1, self.p2) < (other.p1, other.p2))
    }
}

/// Grid search for the sender-optimal split under `mode`. The no-information
/// point is always a candidate and wins ties.
pub fn solve_equilibrium(
    sc: &Scenario,
    mode: SolveMode,
    resolution: f64,
) -> Result<EquilibriumResult> {
    let p = sc.binary_prior()?;
    mode.validate()?;
    let axis = grid_axis(resolution)?;
    let values: Vec<PointValue> = axis.iter().map(|&q| point_value(q, sc)).collect();

    let best = axis
        .par_iter()
        .enumerate()
        .filter_map(|(i, &p1)| {
            let mut row_best: Option<Candidate> = None;
            for (j, &p2) in axis.iter().enumerate() {
                let t = PosteriorPair { p1, p2 };
                if !is_valid_split(p, &t) || !mode.verdict(p, &t).feasible {
                    continue;
                }
                let (value, _) = combine(p, &t, values[i], values[j]);
                let c = Candidate { value, p1, p2 };
                if row_best.is_none_or(|b| c.beats(&b)) {
                    row_best = Some(c);
                }
            }
            row_best
        })
        .collect::<Vec<_>>();

    let no_info = {
        let v = point_value(p, sc);
        Candidate {
            value: v.phi1,
            p1: p,
            p2: p,
        }
    };
    let split = best
        .into_iter()
        .reduce(|acc, c| if c.beats(&acc) { c } else { acc });
    let winner = match split {
        Some(c) if c.value > no_info.value + NO_INFO_MARGIN * no_info.value.abs().max(1.0) => c,
        _ => no_info,
    };
    equilibrium_at(
        sc,
        mode,
        resolution,
        PosteriorPair::new(winner.p1, winner.p2)?,
    )
}

/// Assemble the full result for a chosen split (or the no-information point).
pub fn equilibrium_at(
    sc: &Scenario,
    mode: SolveMode,
    resolution: f64,
    t: PosteriorPair,
) -> Result<EquilibriumResult> {
    let p = sc.binary_prior()?;
    let no_information = t.p1 == t.p2;
    if no_information && t.p1 != p {
        return Err(Error::InvalidSplit {
            prior: p,
            p1: t.p1,
            p2: t.p2,
        });
    }
    let (signal, weight) = if no_information {
        let s = BinarySignal::uninformative();
        (s, s.weight_w1(p))
    } else {
        (splitting::signal_from_posteriors(p, &t)?, t.weight_w1(p))
    };
    let (a, b) = (point_value(t.p1, sc), point_value(t.p2, sc));
    let (phi1_star, phi2_star) = combine(p, &t, a, b);
    Ok(EquilibriumResult {
        mode,
        prior: p,
        resolution,
        posteriors: t,
        signal,
        no_information,
        message_weights: Distribution::new(vec![weight, 1.0 - weight])?,
        receiver_actions: [a.action, b.action],
        receiver_action_labels: [sc.actions[a.action].clone(), sc.actions[b.action].clone()],
        phi1_star,
        phi2_star,
        feasibility: mode.verdict(p, &t),
    })
}

impl EquilibriumResult {
    /// Deterministic best-reply response table `Q(v|w)`.
    pub fn response_matrix(&self, actions: usize) -> Result<StochasticMatrix> {
        let rows = self
            .receiver_actions
            .iter()
            .map(|&v| Distribution::degenerate(actions, v))
            .collect::<Result<Vec<_>>>()?;
        StochasticMatrix::from_rows(rows)
    }
}
