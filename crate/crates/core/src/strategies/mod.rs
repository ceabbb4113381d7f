//! Moves and strategies: named operators, the two-parameter restricted family,
//! the mirror map between the players' qubits, and ideal counter-strategies.

mod parse;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{Unitary2, I, ONE, STRUCT_TOL, ZERO};

pub use parse::{parse_number, parse_strategy};

/// Named single-qubit moves. `C` cooperates (identity), `D` defects (`i sy`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NamedStrategy {
    C,
    D,
    Q,
    SX,
    SY,
    SZ,
}

impl NamedStrategy {
    pub const ALL: [NamedStrategy; 6] = [
        NamedStrategy::C,
        NamedStrategy::D,
        NamedStrategy::Q,
        NamedStrategy::SX,
        NamedStrategy::SY,
        NamedStrategy::SZ,
    ];

    pub fn unitary(self) -> Unitary2 {
        let (a, b, c, d) = match self {
            NamedStrategy::C => (ONE, ZERO, ZERO, ONE),
            NamedStrategy::D | NamedStrategy::SY => (ZERO, ONE, -ONE, ZERO),
            NamedStrategy::Q | NamedStrategy::SZ => (I, ZERO, ZERO, -I),
            NamedStrategy::SX => (ZERO, I, I, ZERO),
        };
        Unitary2::new(a, b, c, d).expect("named moves are in SU(2)")
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedStrategy::C => "C",
            NamedStrategy::D => "D",
            NamedStrategy::Q => "Q",
            NamedStrategy::SX => "sx",
            NamedStrategy::SY => "sy",
            NamedStrategy::SZ => "sz",
        }
    }
}

/// Parameters of the restricted family, `theta in [0, pi]`, `phi in [0, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EwlParams {
    pub theta: f64,
    pub phi: f64,
}

impl EwlParams {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        let ok = theta.is_finite()
            && phi.is_finite()
            && (0.0..=PI).contains(&theta)
            && (0.0..=FRAC_PI_2).contains(&phi);
        if !ok {
            return Err(Error::ParamsOutOfRange { theta, phi });
        }
        Ok(EwlParams { theta, phi })
    }
}

/// `U(theta, phi) = [[e^{i phi} cos(theta/2), sin(theta/2)], [-sin(theta/2), e^{-i phi} cos(theta/2)]]`.
pub fn ewl_unitary(p: &EwlParams) -> Unitary2 {
    let (s, c) = (p.theta / 2.0).sin_cos();
    Unitary2::from_top_row(Complex64::from_polar(c, p.phi), Complex64::new(s, 0.0))
        .expect("restricted family is in SU(2)")
}

/// Recovers `(theta, phi)` with `ewl_unitary(theta, phi) = u`, or `None` when
/// `u` lies outside the restricted family. At `theta = pi` the phase is
/// unobservable and `phi = 0` is reported.
pub fn ewl_membership(u: &Unitary2) -> Option<EwlParams> {
    let u11 = u.entry(0, 0);
    let u12 = u.entry(0, 1);
    if u12.im.abs() > STRUCT_TOL || u12.re < -STRUCT_TOL {
        return None;
    }
    let sin_half = u12.re.max(0.0);
    let cos_half = u11.norm();
    let theta = (2.0 * sin_half.atan2(cos_half)).clamp(0.0, PI);
    let phi = if cos_half <= 1e-12 {
        0.0
    } else {
        let arg = u11.arg();
        if !(-STRUCT_TOL..=FRAC_PI_2 + STRUCT_TOL).contains(&arg) {
            return None;
        }
        arg.clamp(0.0, FRAC_PI_2)
    };
    let params = EwlParams { theta, phi };
    (ewl_unitary(&params).max_abs_diff(u) <= STRUCT_TOL).then_some(params)
}

/// The move `Y` for player B equivalent to `x` played by A on the maximally
/// entangled state: `(x ⊗ I) J|CC> = (I ⊗ Y) J|CC>`.
///
/// With `J|CC> = (|CC> + i|DD>)/sqrt 2` written as the coefficient matrix
/// `M = diag(1, i)/sqrt 2`, the relation reads `x M = M Y^T`, hence
/// `Y = [[x11, -i x21], [i x12, x22]] = [[x11, i conj(x12)], [i x12, conj(x11)]]`.
/// The map is an involution.
pub fn mirror(x: &Unitary2) -> Unitary2 {
    let m = x.entries();
    Unitary2::new(m[0][0], -I * m[1][0], I * m[0][1], m[1][1]).expect("mirror preserves SU(2)")
}

/// Player roles. A holds the first qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    A,
    B,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::A => Role::B,
            Role::B => Role::A,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::A => "A",
            Role::B => "B",
        })
    }
}

/// `D · mirror(opponent)^dagger`: against a maximally entangled opponent move
/// this forces outcome `CD` when B counters and `DC` when A counters.
pub fn counter_strategy(opponent_move: &Unitary2, who_counters: Role) -> Unitary2 {
    // mirror is an involution, so the same formula serves both roles
    let _ = who_counters;
    NamedStrategy::D.unitary() * mirror(opponent_move).dagger()
}

/// Tolerance on mixture weight sums.
pub const WEIGHT_TOL: f64 = 1e-9;

/// A finite mixture of moves with non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mixture {
    components: Vec<(f64, Unitary2)>,
}

impl Mixture {
    pub fn new(components: Vec<(f64, Unitary2)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMixture("empty support".into()));
        }
        if let Some((w, _)) = components.iter().find(|(w, _)| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidMixture(format!("weight {w} is negative or non-finite")));
        }
        let sum: f64 = components.iter().map(|(w, _)| w).sum();
        if (sum - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidMixture(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Mixture { components })
    }

    pub fn components(&self) -> &[(f64, Unitary2)] {
        &self.components
    }
}

impl<'de> Deserialize<'de> for Mixture {
    fn deserialize<De: serde::Deserializer<'de>>(d: De) -> std::result::Result<Self, De::Error> {
        #[derive(Deserialize)]
        struct Raw {
            components: Vec<(f64, Unitary2)>,
        }
        let raw = Raw::deserialize(d)?;
        Mixture::new(raw.components).map_err(serde::de::Error::custom)
    }
}

/// A player's full choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    Pure(Unitary2),
    Mixed(Mixture),
    HaarRandom,
}

impl Strategy {
    pub fn is_haar(&self) -> bool {
        matches!(self, Strategy::HaarRandom)
    }

    pub fn as_pure(&self) -> Option<&Unitary2> {
        match self {
            Strategy::Pure(u) => Some(u),
            _ => None,
        }
    }
}

impl From<Unitary2> for Strategy {
    fn from(u: Unitary2) -> Self {
        Strategy::Pure(u)
    }
}

impl From<NamedStrategy> for Strategy {
    fn from(n: NamedStrategy) -> Self {
        Strategy::Pure(n.unitary())
    }
}

/// Prints in the strategy expression grammar.
impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Pure(u) => write!(f, "{u}"),
            Strategy::HaarRandom => f.write_str("haar"),
            Strategy::Mixed(m) => {
                f.write_str("mix(")?;
                for (k, (w, u)) in m.components().iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{w:?}:{u}")?;
                }
                f.write_str(")")
            }
        }
    }
}
