//! Parallel fading multiple-access case study: two transmitters share two
//! bands; the first transmitter (sender) has a fixed power split, the second
//! (receiver) picks its band-2 share `v` knowing only a posterior over the
//! channel gains.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persuasion::{sender_value, Scenario, SolveMode};
use crate::prob::Distribution;
use crate::splitting::{self, grid_axis, PosteriorPair, RegionLabel};

/// The bundled default configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/mac.json");

/// Power gains of one channel state. `gij` is the gain of transmitter `i` on
/// band `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainState {
    pub name: String,
    pub g11: f64,
    pub g12: f64,
    pub g21: f64,
    pub g22: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateUnit {
    #[default]
    Nats,
    Bits,
}

impl RateUnit {
    fn log1p(self, x: f64) -> f64 {
        match self {
            RateUnit::Nats => x.ln_1p(),
            RateUnit::Bits => x.ln_1p() / std::f64::consts::LN_2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacConfig {
    /// exactly two states; the first has probability `prior_p`
    pub states: Vec<GainState>,
    /// sender's band-1 power share
    pub a1: f64,
    pub sigma2: f64,
    pub prior_p: f64,
    /// receiver's candidate band-1 power shares
    pub actions: Vec<f64>,
    #[serde(default)]
    pub rate_unit: RateUnit,
}

impl Default for MacConfig {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_CONFIG).expect("bundled MAC config parses")
    }
}

impl MacConfig {
    pub fn validate(&self) -> Result<()> {
        if self.states.len() != 2 {
            return Err(Error::InvalidConfig(format!(
                "states: expected 2 gain states, got {}",
                self.states.len()
            )));
        }
        for (i, g) in self.states.iter().enumerate() {
            for (name, x) in [
                ("g11", g.g11),
                ("g12", g.g12),
                ("g21", g.g21),
                ("g22", g.g22),
            ] {
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "states[{i}].{name}: gain must be finite and >= 0, got {x}"
                    )));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.a1) {
            return Err(Error::InvalidConfig(format!(
                "a1: {} is outside [0, 1]",
                self.a1
            )));
        }
        if !(0.0..=1.0).contains(&self.prior_p) {
            return Err(Error::InvalidConfig(format!(
                "prior_p: {} is outside [0, 1]",
                self.prior_p
            )));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sigma2: noise variance must be positive, got {}",
                self.sigma2
            )));
        }
        if self.actions.is_empty() {
            return Err(Error::InvalidConfig(
                "actions: at least one action is required".into(),
            ));
        }
        if let Some(i) = self.actions.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidConfig(format!(
                "actions[{i}]: {} is outside [0, 1]",
                self.actions[i]
            )));
        }
        Ok(())
    }
}

/// Receiver's (second transmitter's) sum rate over both bands.
pub fn phi2(g: &GainState, v: f64, cfg: &MacConfig) -> f64 {
    let u = cfg.rate_unit;
    u.log1p(v * g.g21 / (cfg.sigma2 + cfg.a1 * g.g11))
        + u.log1p((1.0 - v) * g.g22 / (cfg.sigma2 + (1.0 - cfg.a1) * g.g12))
}

/// Sender's (first transmitter's) sum rate over both bands.
pub fn phi1(g: &GainState, v: f64, cfg: &MacConfig) -> f64 {
    let u = cfg.rate_unit;
    u.log1p(cfg.a1 * g.g11 / (cfg.sigma2 + v * g.g12))
        + u.log1p((1.0 - cfg.a1) * g.g12 / (cfg.sigma2 + (1.0 - v) * g.g22))
}

/// Action labels are the shortest decimal form of each power share.
pub fn action_label(v: f64) -> String {
    format!("{v}")
}

pub fn build_scenario(cfg: &MacConfig) -> Result<Scenario> {
    cfg.validate()?;
    let table = |f: fn(&GainState, f64, &MacConfig) -> f64| -> Vec<Vec<f64>> {
        cfg.states
            .iter()
            .map(|g| cfg.actions.iter().map(|&v| f(g, v, cfg)).collect())
            .collect()
    };
    Scenario::with_states(
        cfg.states.iter().map(|g| g.name.clone()).collect(),
        Distribution::bernoulli(cfg.prior_p)?,
        cfg.actions.iter().map(|&v| action_label(v)).collect(),
        table(phi1),
        table(phi2),
    )
}

/// Load either an explicit scenario (`prior`, `actions`, `phi1`, `phi2`) or a
/// MAC configuration (recognized by its `a1` field).
pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("a1").is_some() {
        let cfg: MacConfig = serde_json::from_value(value)?;
        build_scenario(&cfg)
    } else {
        Ok(serde_json::from_value(value)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    /// prior (or posterior) probability of the first state
    pub p: f64,
    pub action: usize,
    pub label: String,
    pub receiver_value: f64,
    pub sender_value: f64,
}

fn best_at(sc: &Scenario, q: f64) -> (usize, f64, f64) {
    let post = Distribution::new(vec![q, 1.0 - q]).expect("grid point is a probability");
    let br = crate::persuasion::best_reply(&post, sc).expect("binary posterior");
    (br.selected, br.receiver_value, br.sender_value)
}

/// Receiver best reply along a grid of posteriors `0, step, …, 1`.
pub fn best_reply_curve(sc: &Scenario, step: f64) -> Result<Vec<CurvePoint>> {
    sc.binary_prior()?;
    if !(step > 0.0 && step < 1.0) {
        return Err(Error::OutOfRange {
            name: "step",
            value: step,
            range: "(0, 1)",
        });
    }
    let axis = if step <= 0.5 {
        grid_axis(step)?
    } else {
        vec![0.0, step, 1.0]
    };
    Ok(axis
        .par_iter()
        .map(|&q| {
            let (action, receiver_value, sender_value) = best_at(sc, q);
            CurvePoint {
                p: q,
                action,
                label: sc.actions()[action].clone(),
                receiver_value,
                sender_value,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Switch {
    pub at: f64,
    pub from: usize,
    pub to: usize,
}

/// Posteriors at which the selected best reply changes, located by bisection
/// between the points of a coarse sweep. Each threshold is the infimum of the
/// posteriors playing `to`.
pub fn best_reply_switches(sc: &Scenario, step: f64) -> Result<Vec<Switch>> {
    let curve = best_reply_curve(sc, step)?;
    let mut out = Vec::new();
    for pair in curve.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.action == b.action {
            continue;
        }
        let (mut lo, mut hi) = (a.p, b.p);
        let mut to = b.action;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let (m, _, _) = best_at(sc, mid);
            if m == a.action {
                lo = mid;
            } else {
                hi = mid;
                to = m;
            }
        }
        out.push(Switch {
            at: hi,
            from: a.action,
            to,
        });
    }
    Ok(out)
}

/// One `(p₁, p₂)` cell of a utility surface. Values are absent on invalid
/// splits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceCell {
    pub p1: f64,
    pub p2: f64,
    pub phi1: Option<f64>,
    pub phi2: Option<f64>,
    /// region label for the surface's channel, or `NO_INFO`
    pub label: String,
    /// whether the cell passes the surface mode's feasibility predicate
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Surface {
    pub prior: f64,
    pub mode: SolveMode,
    pub eps: f64,
    pub resolution: f64,
    /// row-major in `p₁`, then `p₂`
    pub cells: Vec<SurfaceCell>,
    pub no_information: SurfaceCell,
}

pub const NO_INFO_LABEL: &str = "NO_INFO";

/// Solver mode for a feasibility kind over a BSC(`eps`) link.
pub fn mode_for(kind: splitting::FeasibilityMode, eps: f64) -> Result<SolveMode> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            range: "[0, 0.5]",
        });
    }
    Ok(match kind {
        splitting::FeasibilityMode::Unconstrained => SolveMode::Unconstrained,
        splitting::FeasibilityMode::OneShot => SolveMode::OneShot { eps },
        splitting::FeasibilityMode::Block => SolveMode::Block {
            capacity: splitting::bsc_capacity(eps)?,
        },
    })
}

/// Expected utilities on the posterior grid, labeled by the region geometry of
/// a BSC(`eps`) link and flagged by the feasibility predicate of `kind`.
pub fn utility_surface(
    sc: &Scenario,
    kind: splitting::FeasibilityMode,
    eps: f64,
    resolution: f64,
) -> Result<Surface> {
    let p = sc.binary_prior()?;
    let mode = mode_for(kind, eps)?;
    let cap = splitting::bsc_capacity(eps)?;
    let axis = grid_axis(resolution)?;
    let cells: Vec<SurfaceCell> = axis
        .par_iter()
        .flat_map_iter(|&p1| {
            axis.iter().map(move |&p2| {
                let t = PosteriorPair { p1, p2 };
                let label = splitting::classify(p, &t, eps, cap);
                let valid = label != RegionLabel::InvalidSplit;
                let values = valid.then(|| sender_value(&t, p, sc).expect("valid split"));
                SurfaceCell {
                    p1,
                    p2,
                    phi1: values.map(|v| v.0),
                    phi2: values.map(|v| v.1),
                    label: label.as_str().to_string(),
                    feasible: valid && mode.verdict(p, &t).feasible,
                }
            })
        })
        .collect();
    let t = PosteriorPair { p1: p, p2: p };
    let (a, b) = sender_value(&t, p, sc)?;
    Ok(Surface {
        prior: p,
        mode,
        eps,
        resolution,
        cells,
        no_information: SurfaceCell {
            p1: p,
            p2: p,
            phi1: Some(a),
            phi2: Some(b),
            label: NO_INFO_LABEL.to_string(),
            feasible: true,
        },
    })
}

/// Re-reduce a surface to its sender-optimal cell with the solver's rules:
/// highest `φ₁` among feasible cells, ties to the lowest `(p₁, p₂)`, and the
/// no-information point unless strictly beaten.
pub fn surface_argmax(cells: &[SurfaceCell], no_information: &SurfaceCell) -> SurfaceCell {
    let mut best: Option<&SurfaceCell> = None;
    for c in cells
        .iter()
        .filter(|c| c.feasible && is_valid_split_cell(c))
    {
        let v = c.phi1.unwrap_or(f64::NEG_INFINITY);
        let better = match best {
            None => true,
            Some(b) => {
                let bv = b.phi1.unwrap_or(f64::NEG_INFINITY);
                v > bv || (v == bv && (c.p1, c.p2) < (b.p1, b.p2))
            }
        };
        if better {
            best = Some(c);
        }
    }
    let base = no_information.phi1.unwrap_or(f64::NEG_INFINITY);
    match best {
        Some(c)
            if c.phi1.unwrap_or(f64::NEG_INFINITY)
                > base + crate::persuasion::NO_INFO_MARGIN * base.abs().max(1.0) =>
        {
            c.clone()
        }
        _ => no_information.clone(),
    }
}

fn is_valid_split_cell(c: &SurfaceCell) -> bool {
    c.phi1.is_some() && c.label != NO_INFO_LABEL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persuasion::{best_reply, in_q2, solve_equilibrium, DEFAULT_SOLVER_RESOLUTION};
    use crate::splitting::FeasibilityMode;
    use approx::assert_abs_diff_eq;

    const PHI1_A: [f64; 5] = [
        0.641_679_175_453_516_7,
        0.644_351_139_505_042_3,
        0.667_015_414_659_571_4,
        0.706_396_362_750_109_6,
        0.763_272_011_577_370_9,
    ];
    const PHI2_A: [f64; 5] = [
        0.27701901561742053,
        0.377_260_088_517_382_1,
        0.45055914501612476,
        0.5019315049233766,
        0.534_410_555_646_218_2,
    ];
    const PHI1_B: [f64; 5] = [
        0.571_620_676_520_343_2,
        0.610_460_239_409_119_8,
        0.661_377_084_106_165,
        0.725_739_238_138_745_2,
        0.807_428_127_993_384_9,
    ];
    const PHI2_B: [f64; 5] = [
        0.269_638_130_623_813_3,
        0.22600477716171187,
        0.178127029647757,
        0.125_466_214_382_534_7,
        0.067_360_403_538_388_7,
    ];

    const PHI1_A_BITS: [f64; 5] = [
        0.925_747_364_268_507_6,
        0.929_602_193_555_077_2,
        0.962_299_830_925_859_1,
        1.0191145294415845,
        1.1011687459520165,
    ];
    const PHI2_B_BITS: [f64; 5] = [
        0.389005593885546,
        0.32605597122841696,
        0.256_982_982_321_100_4,
        0.18100948528879433,
        0.097_180_520_137_112_74,
    ];

    /// Exact crossing points of the receiver's expected utilities in the
    /// default scenario (actions 0 → 1 → 2 → 3 → 4 as the probability of `g_A`
    /// grows). The selected switch may precede a crossing by ~1e-11 because
    /// near-ties within the best-reply tolerance go to the sender.
    const SWITCHES: [f64; 4] = [
        0.303273865727,
        0.395106537955,
        0.506192521548,
        0.641451671273,
    ];

    fn default_scenario() -> Scenario {
        build_scenario(&MacConfig::default()).unwrap()
    }

    #[test]
    fn bundled_config_shape() {
        let cfg = MacConfig::default();
        assert_eq!(cfg.states[0].name, "g_A");
        assert_eq!(cfg.actions, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(cfg.rate_unit, RateUnit::Nats);
        let sc = default_scenario();
        assert_eq!(sc.prior().probs(), &[0.5, 0.5]);
        assert_eq!(sc.actions(), &["0", "0.25", "0.5", "0.75", "1"]);
        assert_eq!(sc.phi1().len(), 2);
        assert!(sc.phi1().iter().chain(sc.phi2()).all(|r| r.len() == 5));
    }

    #[test]
    fn table_fidelity() {
        let sc = default_scenario();
        for v in 0..5 {
            assert_abs_diff_eq!(sc.phi1()[0][v], PHI1_A[v], epsilon = 1e-12);
            assert_abs_diff_eq!(sc.phi2()[0][v], PHI2_A[v], epsilon = 1e-12);
            assert_abs_diff_eq!(sc.phi1()[1][v], PHI1_B[v], epsilon = 1e-12);
            assert_abs_diff_eq!(sc.phi2()[1][v], PHI2_B[v], epsilon = 1e-12);
        }
        let bits = build_scenario(&MacConfig {
            rate_unit: RateUnit::Bits,
            ..MacConfig::default()
        })
        .unwrap();
        for v in 0..5 {
            assert_abs_diff_eq!(bits.phi1()[0][v], PHI1_A_BITS[v], epsilon = 1e-12);
            assert_abs_diff_eq!(bits.phi2()[1][v], PHI2_B_BITS[v], epsilon = 1e-12);
        }
    }

    #[test]
    fn formula_edge_cases() {
        let cfg = MacConfig::default();
        let g = cfg.states[0].clone();
        let second_only = RateUnit::Nats.log1p(g.g22 / (cfg.sigma2 + (1.0 - cfg.a1) * g.g12));
        assert_abs_diff_eq!(phi2(&g, 0.0, &cfg), second_only, epsilon = 1e-15);
        let first_no_v = RateUnit::Nats.log1p(cfg.a1 * g.g11 / cfg.sigma2);
        let second = RateUnit::Nats.log1p((1.0 - cfg.a1) * g.g12 / (cfg.sigma2 + g.g22));
        assert_abs_diff_eq!(phi1(&g, 0.0, &cfg), first_no_v + second, epsilon = 1e-15);
        let zero = GainState {
            name: "zero".into(),
            g11: 0.0,
            g12: 0.0,
            g21: 0.0,
            g22: 0.0,
        };
        for v in [0.0, 0.3, 1.0] {
            assert_eq!(phi1(&zero, v, &cfg), 0.0);
            assert_eq!(phi2(&zero, v, &cfg), 0.0);
        }
    }

    #[test]
    fn more_noise_lowers_every_utility() {
        let base = default_scenario();
        let cfg = MacConfig::default();
        let noisy = build_scenario(&MacConfig {
            sigma2: 2.0 * cfg.sigma2,
            ..cfg
        })
        .unwrap();
        for u in 0..2 {
            for v in 0..5 {
                assert!(noisy.phi1()[u][v] < base.phi1()[u][v]);
                assert!(noisy.phi2()[u][v] < base.phi2()[u][v]);
            }
        }
    }

    #[test]
    fn config_validation() {
        let cfg = MacConfig {
            sigma2: 0.0,
            ..MacConfig::default()
        };
        assert!(build_scenario(&cfg)
            .unwrap_err()
            .to_string()
            .contains("sigma2"));
        let mut cfg = MacConfig::default();
        cfg.actions.push(1.5);
        assert!(build_scenario(&cfg)
            .unwrap_err()
            .to_string()
            .contains("actions[5]"));
        let mut cfg = MacConfig::default();
        cfg.states[1].g21 = -1.0;
        assert!(build_scenario(&cfg)
            .unwrap_err()
            .to_string()
            .contains("states[1].g21"));
        let err = scenario_from_json(r#"{"a1": 0.2, "sigma2": 1}"#).unwrap_err();
        assert!(err.to_string().contains("states"), "{err}");
    }

    #[test]
    fn single_action_is_trivial() {
        let cfg = MacConfig {
            actions: vec![0.5],
            ..MacConfig::default()
        };
        let sc = build_scenario(&cfg).unwrap();
        assert!(sc.phi1().iter().all(|r| r.len() == 1));
        let r = solve_equilibrium(&sc, SolveMode::Unconstrained, 0.01).unwrap();
        assert!(r.no_information);
    }

    #[test]
    fn receiver_values_at_even_prior() {
        let sc = default_scenario();
        let even = Distribution::uniform(2).unwrap();
        for v in 0..5 {
            let got = crate::persuasion::receiver_expected_utility(&even, v, &sc).unwrap();
            assert_abs_diff_eq!(got, 0.5 * (PHI2_A[v] + PHI2_B[v]), epsilon = 1e-15);
        }
    }

    #[test]
    fn staircase_goldens() {
        let sc = default_scenario();
        let switches = best_reply_switches(&sc, DEFAULT_SOLVER_RESOLUTION).unwrap();
        assert_eq!(switches.len(), 4);
        for (k, s) in switches.iter().enumerate() {
            assert_eq!((s.from, s.to), (k, k + 1));
            assert_abs_diff_eq!(s.at, SWITCHES[k], epsilon = 1e-10);
        }
        let curve = best_reply_curve(&sc, DEFAULT_SOLVER_RESOLUTION).unwrap();
        assert_eq!(curve.len(), 1001);
        assert!(curve.windows(2).all(|w| w[0].action <= w[1].action));
        let first = |a: usize| curve.iter().find(|c| c.action == a).unwrap().p;
        assert_abs_diff_eq!(first(1), 0.304, epsilon = 1e-12);
        assert_abs_diff_eq!(first(2), 0.396, epsilon = 1e-12);
        assert_abs_diff_eq!(first(3), 0.507, epsilon = 1e-12);
        assert_abs_diff_eq!(first(4), 0.642, epsilon = 1e-12);
    }

    #[test]
    fn curve_endpoints_are_per_state_argmaxes() {
        let sc = default_scenario();
        let curve = best_reply_curve(&sc, 0.01).unwrap();
        let argmax = |row: &[f64]| {
            (0..row.len())
                .max_by(|&a, &b| row[a].partial_cmp(&row[b]).unwrap())
                .unwrap()
        };
        assert_eq!(curve.last().unwrap().action, argmax(&sc.phi2()[0]));
        assert_eq!(curve[0].action, argmax(&sc.phi2()[1]));
        let at_a = best_reply(&Distribution::degenerate(2, 0).unwrap(), &sc).unwrap();
        assert_eq!(at_a.optimal_actions, vec![4]);
    }

    #[test]
    fn staircase_actions_are_compatible() {
        let sc = default_scenario();
        let t = PosteriorPair::new(0.0, 0.6415).unwrap();
        let signal = splitting::signal_from_posteriors(0.5, &t).unwrap();
        let response = crate::prob::StochasticMatrix::from_rows(vec![
            Distribution::degenerate(5, 0).unwrap(),
            Distribution::degenerate(5, 4).unwrap(),
        ])
        .unwrap();
        assert!(in_q2(sc.prior(), &signal.to_matrix(), &response, &sc).unwrap());
    }

    #[test]
    fn surface_matches_solver_and_is_symmetric() {
        let sc = default_scenario();
        for kind in [
            FeasibilityMode::Unconstrained,
            FeasibilityMode::OneShot,
            FeasibilityMode::Block,
        ] {
            let s = utility_surface(&sc, kind, 0.25, 0.01).unwrap();
            let best = surface_argmax(&s.cells, &s.no_information);
            let r = solve_equilibrium(&sc, s.mode, 0.01).unwrap();
            assert_eq!((best.p1, best.p2), (r.posteriors.p1, r.posteriors.p2));
            assert_eq!(best.phi1, Some(r.phi1_star));
        }
        let s = utility_surface(&sc, FeasibilityMode::Unconstrained, 0.25, 0.05).unwrap();
        let n = 21;
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (&s.cells[i * n + j], &s.cells[j * n + i]);
                match (a.phi1, b.phi1) {
                    (Some(x), Some(y)) => {
                        assert_abs_diff_eq!(x, y, epsilon = 1e-12);
                        assert_abs_diff_eq!(a.phi2.unwrap(), b.phi2.unwrap(), epsilon = 1e-12);
                    }
                    (None, None) => {}
                    _ => panic!("asymmetric validity at ({i}, {j})"),
                }
            }
        }
    }

    #[test]
    fn revealing_corner_value() {
        let sc = default_scenario();
        let (v, _) = sender_value(&PosteriorPair::new(1.0, 0.0).unwrap(), 0.5, &sc).unwrap();
        assert_abs_diff_eq!(v, 0.5 * (PHI1_A[4] + PHI1_B[0]), epsilon = 1e-15);
    }
}
