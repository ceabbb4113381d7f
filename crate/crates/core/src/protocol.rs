//! The quantized Prisoner's Dilemma: entangle `|CC>` with `J(gamma)`, apply the
//! players' local moves, disentangle with `J(gamma)^dagger`, measure.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::qmath::{tensor_apply, SeededRng, TwoQubitState, Unitary2, STRUCT_TOL};
use crate::strategies::{NamedStrategy, Strategy};

/// Entangling strength. `J(gamma) = cos(gamma/2) I + i sin(gamma/2) D⊗D`;
/// `gamma = pi/2` is the maximally entangling gate, `gamma = 0` the classical game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct EntanglerSpec {
    gamma: f64,
}

impl EntanglerSpec {
    const MAXIMAL_TOL: f64 = 1e-12;

    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < -Self::MAXIMAL_TOL || gamma > FRAC_PI_2 + Self::MAXIMAL_TOL {
            return Err(Error::InvalidGamma(gamma));
        }
        Ok(EntanglerSpec {
            gamma: gamma.clamp(0.0, FRAC_PI_2),
        })
    }

    pub fn maximal() -> Self {
        EntanglerSpec { gamma: FRAC_PI_2 }
    }

    pub fn classical() -> Self {
        EntanglerSpec { gamma: 0.0 }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_maximal(&self) -> bool {
        (self.gamma - FRAC_PI_2).abs() <= Self::MAXIMAL_TOL
    }

    fn apply(&self, s: &TwoQubitState, adjoint: bool) -> TwoQubitState {
        let d = NamedStrategy::D.unitary();
        let dd = tensor_apply(&d, &d, s).amplitudes();
        let half = self.gamma / 2.0;
        let c = half.cos();
        let js = if adjoint { -half.sin() } else { half.sin() };
        let amps = s.amplitudes();
        TwoQubitState::from_raw(std::array::from_fn(|k| {
            amps[k] * c + dd[k] * Complex64::new(0.0, js)
        }))
    }
}

impl Default for EntanglerSpec {
    fn default() -> Self {
        Self::maximal()
    }
}

impl TryFrom<f64> for EntanglerSpec {
    type Error = Error;

    fn try_from(gamma: f64) -> Result<Self> {
        Self::new(gamma)
    }
}

impl From<EntanglerSpec> for f64 {
    fn from(e: EntanglerSpec) -> f64 {
        e.gamma
    }
}

/// Payoffs `T > R > P > S`. Outcome pairs are `(A, B)`:
/// `CC -> (R, R)`, `CD -> (S, T)`, `DC -> (T, S)`, `DD -> (P, P)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffTable {
    pub t: f64,
    pub r: f64,
    pub p: f64,
    pub s: f64,
    #[serde(default)]
    pub strict_iterated: bool,
}

impl PayoffTable {
    pub fn new(t: f64, r: f64, p: f64, s: f64) -> Result<Self> {
        let table = PayoffTable {
            t,
            r,
            p,
            s,
            strict_iterated: false,
        };
        table.validate()?;
        Ok(table)
    }

    /// Additionally requires `2R > T + S`.
    pub fn new_strict(t: f64, r: f64, p: f64, s: f64) -> Result<Self> {
        let table = PayoffTable {
            t,
            r,
            p,
            s,
            strict_iterated: true,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        let PayoffTable { t, r, p, s, .. } = *self;
        if ![t, r, p, s].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("payoff table"));
        }
        if !(t > r && r > p && p > s) {
            return Err(Error::InvalidTable(format!(
                "need T > R > P > S, got T={t}, R={r}, P={p}, S={s}"
            )));
        }
        if self.strict_iterated && 2.0 * r <= t + s {
            return Err(Error::InvalidTable(format!(
                "need 2R > T + S, got 2R={}, T+S={}",
                2.0 * r,
                t + s
            )));
        }
        Ok(())
    }

    /// `(A, B)` payoffs for outcome index `CC=0, CD=1, DC=2, DD=3`.
    pub fn outcome_payoffs(&self, outcome: usize) -> (f64, f64) {
        match outcome {
            0 => (self.r, self.r),
            1 => (self.s, self.t),
            2 => (self.t, self.s),
            3 => (self.p, self.p),
            _ => panic!("outcome index {outcome} out of range"),
        }
    }

    /// Expected payoff when outcomes are uniform: `(T + R + P + S) / 4`.
    pub fn quantum_equilibrium_payoff(&self) -> f64 {
        (self.t + self.r + self.p + self.s) / 4.0
    }
}

impl Default for PayoffTable {
    fn default() -> Self {
        PayoffTable {
            t: 5.0,
            r: 3.0,
            p: 1.0,
            s: 0.0,
            strict_iterated: false,
        }
    }
}

/// Measurement probabilities over `CC, CD, DC, DD`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub p_cc: f64,
    pub p_cd: f64,
    pub p_dc: f64,
    pub p_dd: f64,
}

impl OutcomeDistribution {
    pub const UNIFORM: OutcomeDistribution = OutcomeDistribution {
        p_cc: 0.25,
        p_cd: 0.25,
        p_dc: 0.25,
        p_dd: 0.25,
    };

    pub fn new(probs: [f64; 4]) -> Result<Self> {
        if !probs.iter().all(|p| p.is_finite()) {
            return Err(Error::NonFinite("probability"));
        }
        if probs.iter().any(|&p| p < -STRUCT_TOL) {
            return Err(Error::InvalidArgument(format!("negative probability in {probs:?}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > STRUCT_TOL {
            return Err(Error::InvalidArgument(format!("probabilities sum to {sum}")));
        }
        Ok(Self::from_array(probs))
    }

    pub(crate) fn from_array(p: [f64; 4]) -> Self {
        OutcomeDistribution {
            p_cc: p[0],
            p_cd: p[1],
            p_dc: p[2],
            p_dd: p[3],
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.p_cc, self.p_cd, self.p_dc, self.p_dd]
    }

    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `J(gamma)|CC>`.
pub fn initial_state(e: &EntanglerSpec) -> TwoQubitState {
    e.apply(&TwoQubitState::basis(TwoQubitState::CC), false)
}

/// `J^dagger (a ⊗ b) J |CC>`.
pub fn final_state(a: &Unitary2, b: &Unitary2, e: &EntanglerSpec) -> TwoQubitState {
    e.apply(&tensor_apply(a, b, &initial_state(e)), true)
}

pub fn outcome_distribution(s: &TwoQubitState) -> OutcomeDistribution {
    OutcomeDistribution::from_array(s.amplitudes().map(|z| z.norm_sqr()))
}

/// `(A, B)` expected payoffs.
pub fn expected_payoff(d: &OutcomeDistribution, table: &PayoffTable) -> (f64, f64) {
    d.to_array()
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(pa, pb), (k, &w)| {
            let (a, b) = table.outcome_payoffs(k);
            (pa + w * a, pb + w * b)
        })
}

/// Outcome probabilities for a pure profile, as a raw array.
pub fn pure_probabilities(a: &Unitary2, b: &Unitary2, e: &EntanglerSpec) -> [f64; 4] {
    final_state(a, b, e).amplitudes().map(|z| z.norm_sqr())
}

/// Distribution and `(A, B)` payoffs of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub distribution: OutcomeDistribution,
    pub payoff_a: f64,
    pub payoff_b: f64,
}

impl GameResult {
    pub fn from_distribution(distribution: OutcomeDistribution, table: &PayoffTable) -> Self {
        let (payoff_a, payoff_b) = expected_payoff(&distribution, table);
        GameResult {
            distribution,
            payoff_a,
            payoff_b,
        }
    }
}

/// The finite weighted support used for exact evaluation. A Haar-random move
/// is replaced by the uniform mixture over `{I, i sx, i sy, i sz}`: outcome
/// probabilities are quadratic in the move and its conjugate, and that set is
/// a unitary 1-design, so the average matches the Haar integral exactly.
pub(crate) fn exact_support(s: &Strategy) -> Vec<(f64, Unitary2)> {
    match s {
        Strategy::Pure(u) => vec![(1.0, *u)],
        Strategy::Mixed(m) => m.components().to_vec(),
        Strategy::HaarRandom => [
            NamedStrategy::C,
            NamedStrategy::SX,
            NamedStrategy::SY,
            NamedStrategy::SZ,
        ]
        .iter()
        .map(|n| (0.25, n.unitary()))
        .collect(),
    }
}

/// Outcome probabilities of a profile, computed exactly.
///
/// At maximal entanglement a Haar-random player makes every outcome equally
/// likely whatever the opponent does, and the uniform distribution is
/// returned directly.
pub fn profile_probabilities(a: &Strategy, b: &Strategy, e: &EntanglerSpec) -> [f64; 4] {
    if e.is_maximal() && (a.is_haar() || b.is_haar()) {
        return OutcomeDistribution::UNIFORM.to_array();
    }
    weighted_probabilities(&exact_support(a), &exact_support(b), e)
}

pub(crate) fn weighted_probabilities(
    sa: &[(f64, Unitary2)],
    sb: &[(f64, Unitary2)],
    e: &EntanglerSpec,
) -> [f64; 4] {
    let mut acc = [0.0; 4];
    for (wa, x) in sa {
        for (wb, y) in sb {
            let p = pure_probabilities(x, y, e);
            for k in 0..4 {
                acc[k] += wa * wb * p[k];
            }
        }
    }
    acc
}

/// Plays a profile; pure and finite mixtures are evaluated exactly, Haar
/// players analytically.
pub fn play(a: &Strategy, b: &Strategy, table: &PayoffTable, e: &EntanglerSpec) -> GameResult {
    let p = profile_probabilities(a, b, e);
    GameResult::from_distribution(OutcomeDistribution::from_array(p), table)
}

/// Samples per Monte Carlo shard. Each shard owns RNG stream `shard index`.
pub const MC_SHARD: usize = 4096;

/// Mean of `f` over `samples` draws, sharded deterministically under `seed`.
pub fn monte_carlo_mean<F>(samples: usize, seed: u64, exec: Execution, f: F) -> [f64; 4]
where
    F: Fn(&mut SeededRng) -> [f64; 4] + Sync + Send,
{
    assert!(samples > 0, "at least one sample required");
    let shards = samples.div_ceil(MC_SHARD);
    let sums = par::map_indices(exec, shards, |shard| {
        let mut rng = SeededRng::with_stream(seed, shard as u64);
        let n = MC_SHARD.min(samples - shard * MC_SHARD);
        let mut acc = [0.0; 4];
        for _ in 0..n {
            let p = f(&mut rng);
            for k in 0..4 {
                acc[k] += p[k];
            }
        }
        acc
    });
    let mut total = [0.0; 4];
    for s in sums {
        for k in 0..4 {
            total[k] += s[k];
        }
    }
    total.map(|x| x / samples as f64)
}

/// Monte Carlo estimate: each Haar-random player draws a fresh move per
/// sample, finite strategies are averaged exactly inside each sample.
pub fn play_monte_carlo(
    a: &Strategy,
    b: &Strategy,
    table: &PayoffTable,
    e: &EntanglerSpec,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> GameResult {
    let fixed_a = (!a.is_haar()).then(|| exact_support(a));
    let fixed_b = (!b.is_haar()).then(|| exact_support(b));
    let p = monte_carlo_mean(samples, seed, exec, |rng| {
        let sa = fixed_a.clone().unwrap_or_else(|| vec![(1.0, rng.haar_sample())]);
        let sb = fixed_b.clone().unwrap_or_else(|| vec![(1.0, rng.haar_sample())]);
        weighted_probabilities(&sa, &sb, e)
    });
    GameResult::from_distribution(OutcomeDistribution::from_array(p), table)
}
