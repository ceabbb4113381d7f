//! Best responses, epsilon-Nash verification, grid scans for pure equilibria,
//! the Haar mixed-equilibrium check, and payoff-table classification.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::protocol::{
    exact_support, expected_payoff, monte_carlo_mean, play, profile_probabilities,
    pure_probabilities, weighted_probabilities, EntanglerSpec, GameResult, OutcomeDistribution,
    PayoffTable,
};
use crate::qmath::{SeededRng, Unitary2};
use crate::strategies::{counter_strategy, ewl_unitary, EwlParams, Role, Strategy};

/// Strategy space searched for deviations, with grid resolution per angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum StrategySpace {
    /// The two-parameter family `U(theta, phi)`; grids include both endpoints.
    EwlRestricted { theta: usize, phi: usize },
    /// All of SU(2) as `[[e^{i alpha} cos beta, e^{i delta} sin beta], [-e^{-i delta} sin beta, e^{-i alpha} cos beta]]`.
    /// `alpha` and `delta` are periodic grids on `[0, 2 pi)`; `beta` includes both ends of `[0, pi/2]`.
    FullSU2 { alpha: usize, beta: usize, delta: usize },
}

#[derive(Debug, Clone, Copy)]
enum Bound {
    Clamp(f64, f64),
    Periodic,
}

/// One grid cell: its index in lexicographic order, angle coordinates and move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    pub coords: Vec<f64>,
    pub unitary: Unitary2,
}

/// Full-SU(2) chart used by the search grids.
pub fn su2_from_angles(alpha: f64, beta: f64, delta: f64) -> Unitary2 {
    let (s, c) = beta.sin_cos();
    Unitary2::from_top_row(Complex64::from_polar(c, alpha), Complex64::from_polar(s, delta))
        .expect("angle chart is in SU(2)")
}

impl StrategySpace {
    pub fn ewl(theta: usize, phi: usize) -> Result<Self> {
        let s = StrategySpace::EwlRestricted { theta, phi };
        s.validate()?;
        Ok(s)
    }

    pub fn full(alpha: usize, beta: usize, delta: usize) -> Result<Self> {
        let s = StrategySpace::FullSU2 { alpha, beta, delta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution().iter().any(|&n| n < 2) {
            return Err(Error::InvalidResolution);
        }
        Ok(())
    }

    pub fn is_full(&self) -> bool {
        matches!(self, StrategySpace::FullSU2 { .. })
    }

    pub fn resolution(&self) -> Vec<usize> {
        match *self {
            StrategySpace::EwlRestricted { theta, phi } => vec![theta, phi],
            StrategySpace::FullSU2 { alpha, beta, delta } => vec![alpha, beta, delta],
        }
    }

    pub fn len(&self) -> usize {
        self.resolution().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn bounds(&self) -> Vec<Bound> {
        match self {
            StrategySpace::EwlRestricted { .. } => {
                vec![Bound::Clamp(0.0, PI), Bound::Clamp(0.0, FRAC_PI_2)]
            }
            StrategySpace::FullSU2 { .. } => {
                vec![Bound::Periodic, Bound::Clamp(0.0, FRAC_PI_2), Bound::Periodic]
            }
        }
    }

    fn spacing(&self) -> Vec<f64> {
        match *self {
            StrategySpace::EwlRestricted { theta, phi } => {
                vec![PI / (theta - 1) as f64, FRAC_PI_2 / (phi - 1) as f64]
            }
            StrategySpace::FullSU2 { alpha, beta, delta } => vec![
                TAU / alpha as f64,
                FRAC_PI_2 / (beta - 1) as f64,
                TAU / delta as f64,
            ],
        }
    }

    /// The move at the given angle coordinates.
    pub fn unitary_at(&self, coords: &[f64]) -> Unitary2 {
        match self {
            StrategySpace::EwlRestricted { .. } => ewl_unitary(&EwlParams {
                theta: coords[0],
                phi: coords[1],
            }),
            StrategySpace::FullSU2 { .. } => su2_from_angles(coords[0], coords[1], coords[2]),
        }
    }

    fn coords_at(&self, index: usize) -> Vec<f64> {
        match *self {
            StrategySpace::EwlRestricted { theta, phi } => {
                let (i, j) = (index / phi, index % phi);
                vec![
                    PI * i as f64 / (theta - 1) as f64,
                    FRAC_PI_2 * j as f64 / (phi - 1) as f64,
                ]
            }
            StrategySpace::FullSU2 { alpha, beta, delta } => {
                let (i, rest) = (index / (beta * delta), index % (beta * delta));
                let (j, k) = (rest / delta, rest % delta);
                vec![
                    TAU * i as f64 / alpha as f64,
                    FRAC_PI_2 * j as f64 / (beta - 1) as f64,
                    TAU * k as f64 / delta as f64,
                ]
            }
        }
    }

    /// Grid points in lexicographic index order.
    pub fn points(&self) -> Vec<GridPoint> {
        (0..self.len())
            .map(|index| {
                let coords = self.coords_at(index);
                let unitary = self.unitary_at(&coords);
                GridPoint {
                    index,
                    coords,
                    unitary,
                }
            })
            .collect()
    }
}

/// How a best response was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResponseMethod {
    /// The counter-strategy construction (full SU(2), maximal entanglement, pure opponent).
    AnalyticCounter,
    /// Every move earns the same payoff (Haar opponent at maximal entanglement).
    Indifferent,
    /// Grid search followed by coordinate refinement; the payoff is a lower
    /// bound on the supremum.
    GridRefined,
    /// Grid search only.
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub unitary: Unitary2,
    pub payoff: f64,
    pub coords: Option<Vec<f64>>,
    pub method: ResponseMethod,
}

/// Responder's expected payoff as a function of its move.
struct ResponderPayoff<'a> {
    support: Vec<(f64, Unitary2)>,
    responder: Role,
    table: &'a PayoffTable,
    entangler: &'a EntanglerSpec,
}

impl<'a> ResponderPayoff<'a> {
    fn new(opponent: &Strategy, responder: Role, table: &'a PayoffTable, entangler: &'a EntanglerSpec) -> Self {
        ResponderPayoff {
            support: exact_support(opponent),
            responder,
            table,
            entangler,
        }
    }

    fn eval(&self, u: &Unitary2) -> f64 {
        let own = [(1.0, *u)];
        let p = match self.responder {
            Role::A => weighted_probabilities(&own, &self.support, self.entangler),
            Role::B => weighted_probabilities(&self.support, &own, self.entangler),
        };
        let d = OutcomeDistribution::from_array(p);
        let (a, b) = expected_payoff(&d, self.table);
        match self.responder {
            Role::A => a,
            Role::B => b,
        }
    }
}

/// Payoff to `role` in a profile.
fn role_payoff(r: &GameResult, role: Role) -> f64 {
    match role {
        Role::A => r.payoff_a,
        Role::B => r.payoff_b,
    }
}

/// Best grid move against `opponent` without refinement. Ties keep the lowest
/// grid index.
pub fn grid_best_response(
    opponent: &Strategy,
    responder: Role,
    space: &StrategySpace,
    table: &PayoffTable,
    e: &EntanglerSpec,
    exec: Execution,
) -> Result<BestResponse> {
    space.validate()?;
    let f = ResponderPayoff::new(opponent, responder, table, e);
    let points = space.points();
    let values = par::map_slice(exec, &points, |p| f.eval(&p.unitary));
    let (best, payoff) = argmax(&values);
    Ok(BestResponse {
        unitary: points[best].unitary,
        payoff,
        coords: Some(points[best].coords.clone()),
        method: ResponseMethod::Grid,
    })
}

fn argmax(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
}

/// Refinement stops once a sweep at the finest step gains less than this.
pub const REFINE_TOL: f64 = 1e-9;
const MIN_STEP: f64 = 1e-8;
const MAX_SWEEPS: usize = 20_000;

/// Coordinate pattern search: try `+-step` along each angle, keep any
/// improvement, halve the steps after a sweep that gains less than
/// [`REFINE_TOL`], stop at [`MIN_STEP`].
fn refine(
    space: &StrategySpace,
    start: Vec<f64>,
    start_value: f64,
    f: &ResponderPayoff<'_>,
) -> (Vec<f64>, f64) {
    let bounds = space.bounds();
    let mut steps = space.spacing();
    let mut x = start;
    let mut best = start_value;
    for _ in 0..MAX_SWEEPS {
        let mut gained = 0.0;
        for c in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut cand = x.clone();
                cand[c] = match bounds[c] {
                    Bound::Clamp(lo, hi) => (cand[c] + dir * steps[c]).clamp(lo, hi),
                    Bound::Periodic => (cand[c] + dir * steps[c]).rem_euclid(TAU),
                };
                let v = f.eval(&space.unitary_at(&cand));
                if v > best {
                    gained += v - best;
                    best = v;
                    x = cand;
                    break;
                }
            }
        }
        if gained < REFINE_TOL {
            if steps.iter().all(|&s| s < MIN_STEP) {
                break;
            }
            steps.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    (x, best)
}

/// Best response of `responder` to `opponent` within `space`.
///
/// Uses the analytic counter-strategy in full SU(2) at maximal entanglement
/// against a pure opponent, reports indifference against a Haar opponent at
/// maximal entanglement, and otherwise searches the grid and refines.
pub fn best_response(
    opponent: &Strategy,
    responder: Role,
    space: &StrategySpace,
    table: &PayoffTable,
    e: &EntanglerSpec,
) -> Result<BestResponse> {
    best_response_with(opponent, responder, space, table, e, Execution::default())
}

pub fn best_response_with(
    opponent: &Strategy,
    responder: Role,
    space: &StrategySpace,
    table: &PayoffTable,
    e: &EntanglerSpec,
    exec: Execution,
) -> Result<BestResponse> {
    space.validate()?;
    if e.is_maximal() {
        if opponent.is_haar() {
            let mv = Strategy::Pure(Unitary2::IDENTITY);
            let r = play_as(responder, &mv, opponent, table, e);
            return Ok(BestResponse {
                unitary: Unitary2::IDENTITY,
                payoff: role_payoff(&r, responder),
                coords: None,
                method: ResponseMethod::Indifferent,
            });
        }
        if let (true, Some(x)) = (space.is_full(), opponent.as_pure()) {
            let counter = counter_strategy(x, responder);
            let r = play_as(responder, &Strategy::Pure(counter), opponent, table, e);
            return Ok(BestResponse {
                unitary: counter,
                payoff: role_payoff(&r, responder),
                coords: None,
                method: ResponseMethod::AnalyticCounter,
            });
        }
    }
    let grid = grid_best_response(opponent, responder, space, table, e, exec)?;
    let f = ResponderPayoff::new(opponent, responder, table, e);
    let (coords, payoff) = refine(space, grid.coords.expect("grid coords"), grid.payoff, &f);
    Ok(BestResponse {
        unitary: space.unitary_at(&coords),
        payoff,
        coords: Some(coords),
        method: ResponseMethod::GridRefined,
    })
}

fn play_as(
    role: Role,
    own: &Strategy,
    opponent: &Strategy,
    table: &PayoffTable,
    e: &EntanglerSpec,
) -> GameResult {
    match role {
        Role::A => play(own, opponent, table, e),
        Role::B => play(opponent, own, table, e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub a: Strategy,
    pub b: Strategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumVerdict {
    pub is_epsilon_nash: bool,
    pub epsilon: f64,
    pub payoff_a: f64,
    pub payoff_b: f64,
    pub best_gain_a: f64,
    pub best_gain_b: f64,
    /// Best deviations, in the strategy expression grammar.
    pub witness_a: String,
    pub witness_b: String,
    pub method_a: ResponseMethod,
    pub method_b: ResponseMethod,
    pub space: StrategySpace,
}

/// Checks whether neither player can gain more than `epsilon` by deviating to
/// a pure move in `space`. Pure deviations suffice: against a fixed opponent
/// some pure move does at least as well as any mixture.
pub fn is_epsilon_nash(
    profile: &Profile,
    space: &StrategySpace,
    epsilon: f64,
    table: &PayoffTable,
    e: &EntanglerSpec,
) -> Result<EquilibriumVerdict> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let current = play(&profile.a, &profile.b, table, e);
    let br_a = best_response(&profile.b, Role::A, space, table, e)?;
    let br_b = best_response(&profile.a, Role::B, space, table, e)?;
    let best_gain_a = (br_a.payoff - current.payoff_a).max(0.0);
    let best_gain_b = (br_b.payoff - current.payoff_b).max(0.0);
    Ok(EquilibriumVerdict {
        is_epsilon_nash: best_gain_a.max(best_gain_b) <= epsilon,
        epsilon,
        payoff_a: current.payoff_a,
        payoff_b: current.payoff_b,
        best_gain_a,
        best_gain_b,
        witness_a: br_a.unitary.to_string(),
        witness_b: br_b.unitary.to_string(),
        method_a: br_a.method,
        method_b: br_b.method,
        space: *space,
    })
}

/// A grid profile surviving the scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub a_index: usize,
    pub b_index: usize,
    pub payoff_a: f64,
    pub payoff_b: f64,
    pub gain_a: f64,
    pub gain_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub space: StrategySpace,
    pub epsilon: f64,
    pub points: Vec<GridPoint>,
    pub profiles_checked: usize,
    /// Smallest over all profiles of the larger player's deviation gain.
    pub min_max_gain: f64,
    pub equilibria: Vec<ScanEntry>,
}

/// Enumerates every grid profile and keeps those where neither player gains
/// more than `epsilon` by switching to another grid move. Output is ordered
/// by `(a_index, b_index)`.
pub fn pure_nash_scan(
    space: &StrategySpace,
    epsilon: f64,
    table: &PayoffTable,
    e: &EntanglerSpec,
) -> Result<ScanResult> {
    pure_nash_scan_with(space, epsilon, table, e, Execution::default())
}

pub fn pure_nash_scan_with(
    space: &StrategySpace,
    epsilon: f64,
    table: &PayoffTable,
    e: &EntanglerSpec,
    exec: Execution,
) -> Result<ScanResult> {
    space.validate()?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let points = space.points();
    let n = points.len();
    // payoffs[i][j] = (A, B) when A plays point i and B plays point j
    let payoffs: Vec<Vec<(f64, f64)>> = par::map_slice(exec, &points, |pa| {
        points
            .iter()
            .map(|pb| {
                let p = pure_probabilities(&pa.unitary, &pb.unitary, e);
                let d = OutcomeDistribution::from_array(p);
                expected_payoff(&d, table)
            })
            .collect()
    });
    let mut best_a = vec![f64::NEG_INFINITY; n];
    for row in &payoffs {
        for (j, &(a, _)) in row.iter().enumerate() {
            best_a[j] = best_a[j].max(a);
        }
    }
    let best_b: Vec<f64> = payoffs
        .iter()
        .map(|row| row.iter().map(|&(_, b)| b).fold(f64::NEG_INFINITY, f64::max))
        .collect();

    let mut min_max_gain = f64::INFINITY;
    let mut equilibria = Vec::new();
    for (i, row) in payoffs.iter().enumerate() {
        for (j, &(pa, pb)) in row.iter().enumerate() {
            let gain_a = best_a[j] - pa;
            let gain_b = best_b[i] - pb;
            let worst = gain_a.max(gain_b);
            min_max_gain = min_max_gain.min(worst);
            if worst <= epsilon {
                equilibria.push(ScanEntry {
                    a_index: i,
                    b_index: j,
                    payoff_a: pa,
                    payoff_b: pb,
                    gain_a,
                    gain_b,
                });
            }
        }
    }
    Ok(ScanResult {
        space: *space,
        epsilon,
        points,
        profiles_checked: n * n,
        min_max_gain,
        equilibria,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarReport {
    pub analytic: OutcomeDistribution,
    pub monte_carlo: OutcomeDistribution,
    pub samples: usize,
    pub seed: u64,
    /// `max_i |MC_i - 1/4|`.
    pub max_mc_deviation: f64,
    /// Four binomial standard errors, `4 sqrt((1/4)(3/4)/N)`.
    pub mc_tolerance: f64,
    pub expected_payoff_a: f64,
    pub expected_payoff_b: f64,
    /// Largest gain B can obtain by changing its move against the Haar player.
    pub max_deviation_gain: f64,
}

/// Verifies that a Haar-random A leaves B indifferent: the analytic outcome
/// distribution is uniform for any B, and the Monte Carlo average over
/// sampled A moves approaches it.
pub fn haar_equilibrium_check(
    b_move: &Strategy,
    samples: usize,
    seed: u64,
    table: &PayoffTable,
    e: &EntanglerSpec,
) -> Result<HaarReport> {
    haar_equilibrium_check_with(b_move, samples, seed, table, e, Execution::default())
}

pub fn haar_equilibrium_check_with(
    b_move: &Strategy,
    samples: usize,
    seed: u64,
    table: &PayoffTable,
    e: &EntanglerSpec,
    exec: Execution,
) -> Result<HaarReport> {
    if !e.is_maximal() {
        return Err(Error::InvalidArgument(
            "the Haar equilibrium check requires maximal entanglement (gamma = pi/2)".into(),
        ));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let analytic = play(&Strategy::HaarRandom, b_move, table, e);
    let mc = haar_monte_carlo(b_move, samples, seed, e, exec);
    let max_mc_deviation = mc
        .to_array()
        .iter()
        .map(|p| (p - 0.25).abs())
        .fold(0.0, f64::max);
    let space = StrategySpace::FullSU2 {
        alpha: 4,
        beta: 3,
        delta: 4,
    };
    let br = best_response(&Strategy::HaarRandom, Role::B, &space, table, e)?;
    Ok(HaarReport {
        analytic: analytic.distribution,
        monte_carlo: mc,
        samples,
        seed,
        max_mc_deviation,
        mc_tolerance: 4.0 * (0.25f64 * 0.75 / samples as f64).sqrt(),
        expected_payoff_a: analytic.payoff_a,
        expected_payoff_b: analytic.payoff_b,
        max_deviation_gain: (br.payoff - analytic.payoff_b).max(0.0),
    })
}

/// Outcome distribution averaged over `samples` Haar-random A moves against `b_move`.
pub fn haar_monte_carlo(
    b_move: &Strategy,
    samples: usize,
    seed: u64,
    e: &EntanglerSpec,
    exec: Execution,
) -> OutcomeDistribution {
    let b_fixed = (!b_move.is_haar()).then(|| exact_support(b_move));
    let p = monte_carlo_mean(samples, seed, exec, |rng| {
        let x = [(1.0, rng.haar_sample())];
        let sb = b_fixed.clone().unwrap_or_else(|| vec![(1.0, rng.haar_sample())]);
        weighted_probabilities(&x, &sb, e)
    });
    OutcomeDistribution::from_array(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub samples: usize,
    pub distribution: OutcomeDistribution,
    pub max_deviation: f64,
}

/// Monte Carlo deviation from uniform at several sample sizes, all under `seed`.
pub fn haar_convergence(
    b_move: &Strategy,
    sizes: &[usize],
    seed: u64,
    e: &EntanglerSpec,
    exec: Execution,
) -> Vec<ConvergencePoint> {
    sizes
        .iter()
        .map(|&samples| {
            let distribution = haar_monte_carlo(b_move, samples, seed, e, exec);
            let max_deviation = distribution
                .to_array()
                .iter()
                .map(|p| (p - 0.25).abs())
                .fold(0.0, f64::max);
            ConvergencePoint {
                samples,
                distribution,
                max_deviation,
            }
        })
        .collect()
}

/// Where the quantum equilibrium payoff `(T + R + P + S) / 4` falls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableClassification {
    BelowClassicalEquilibrium,
    BetweenEquilibriumAndCooperative,
    AboveCooperative,
}

/// Ties closer than this are reported as [`Error::BoundaryTie`].
pub const BOUNDARY_TOL: f64 = 1e-12;

pub fn classify_table(table: &PayoffTable) -> Result<TableClassification> {
    table.validate()?;
    let qbar = table.quantum_equilibrium_payoff();
    for (against, value) in [("P", table.p), ("R", table.r)] {
        if (qbar - value).abs() <= BOUNDARY_TOL {
            return Err(Error::BoundaryTie { qbar, against, value });
        }
    }
    Ok(if qbar < table.p {
        TableClassification::BelowClassicalEquilibrium
    } else if qbar < table.r {
        TableClassification::BetweenEquilibriumAndCooperative
    } else {
        TableClassification::AboveCooperative
    })
}

/// Random valid table: four sorted uniforms on `[0, 100]` assigned `S < P < R < T`,
/// redrawn when any two are within `1e-9` or, if `strict_iterated`, when `2R <= T + S`.
pub fn random_table(rng: &mut SeededRng, strict_iterated: bool) -> PayoffTable {
    loop {
        let mut v: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..=100.0));
        v.sort_by(f64::total_cmp);
        if v.windows(2).any(|w| w[1] - w[0] < 1e-9) {
            continue;
        }
        let [s, p, r, t] = v;
        let table = if strict_iterated {
            PayoffTable::new_strict(t, r, p, s)
        } else {
            PayoffTable::new(t, r, p, s)
        };
        if let Ok(table) = table {
            return table;
        }
    }
}

/// Exact outcome distribution of a profile.
pub fn profile_distribution(profile: &Profile, e: &EntanglerSpec) -> OutcomeDistribution {
    let p = profile_probabilities(&profile.a, &profile.b, e);
    OutcomeDistribution::from_array(p)
}
