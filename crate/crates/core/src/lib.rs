//! Quantized Prisoner's Dilemma.
//!
//! Two players share a maximally entangled pair of qubits, each applies an
//! SU(2) move to their own qubit, and the pair is disentangled and measured.
//! This crate simulates that protocol exactly and analyses it:
//!
//! - [`qmath`]: SU(2) moves, two-qubit states, seeded Haar sampling.
//! - [`protocol`]: state preparation, moves, measurement, payoffs.
//! - [`strategies`]: named moves, the two-parameter restricted family, the
//!   mirror map, counter-strategies, and the strategy expression parser.
//! - [`equilibrium`]: best responses, epsilon-Nash checks, grid scans, the
//!   Haar mixed equilibrium and payoff-table classification.
//!
//! Batch work (grid scans, Monte Carlo) runs on rayon when the default
//! `parallel` feature is enabled and sequentially otherwise; results are
//! bit-identical either way.
//!
//! ```
//! use qpd_core::prelude::*;
//!
//! let q = parse_strategy("Q").unwrap();
//! let counter = parse_strategy("Q*D").unwrap();
//! let r = play(&q, &counter, &PayoffTable::default(), &EntanglerSpec::maximal());
//! assert!((r.payoff_b - 5.0).abs() < 1e-12);
//! ```

pub mod equilibrium;
pub mod error;
pub mod par;
pub mod protocol;
pub mod qmath;
pub mod strategies;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::equilibrium::{
        best_response, classify_table, haar_equilibrium_check, is_epsilon_nash, pure_nash_scan,
        Profile, StrategySpace, TableClassification,
    };
    pub use crate::par::Execution;
    pub use crate::protocol::{
        expected_payoff, final_state, initial_state, outcome_distribution, play, EntanglerSpec,
        GameResult, OutcomeDistribution, PayoffTable,
    };
    pub use crate::qmath::{haar_sample, state_fidelity, tensor_apply, SeededRng, TwoQubitState, Unitary2};
    pub use crate::strategies::{
        counter_strategy, ewl_membership, ewl_unitary, mirror, parse_strategy, EwlParams, Mixture,
        NamedStrategy, Role, Strategy,
    };
}
