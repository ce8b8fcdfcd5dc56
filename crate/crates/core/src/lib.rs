//! Number-theoretic toolkit around *balanced* subgroups of the unit group
//! (Z/dZ)^*: a subgroup H is balanced when every coset uH has as many
//! members with least positive representative below d/2 as above it.
//!
//! The crate provides
//!
//! * exact elementary number theory on `u64` ([`numtheory`]),
//! * the cyclic decomposition of (Z/dZ)^* with discrete logarithms
//!   ([`unitgroup`]),
//! * Dirichlet characters together with exact arithmetic in Z[zeta_n] for
//!   the half-interval character sums that detect balance ([`characters`],
//!   [`cyclotomic`]),
//! * three independent deciders for balance plus classification helpers
//!   ([`balanced`]),
//! * bulk scans of the moduli d for which the powers of a fixed integer p
//!   form a balanced subgroup ([`census`]),
//! * the rank formula for the elliptic curves y^2 = x(x+1)(x+u^d) over
//!   F_q(u), which consumes the balance decisions ([`rank`]),
//! * and a self-check suite wiring the fast paths against brute-force
//!   oracles ([`verify`]).

pub mod balanced;
pub mod census;
pub mod characters;
pub mod cyclotomic;
pub mod numtheory;
pub mod rank;
pub mod unitgroup;
pub mod verify;

/// Errors shared by every module: input rejection is explicit, never a panic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("input must be a positive integer")]
    ZeroInput,
    #[error("modulus {0} is too small; the group (Z/dZ)^* is only considered for d > 2")]
    ModulusTooSmall(u64),
    #[error("{a} is not a unit modulo {modulus}")]
    NotAUnit { a: i64, modulus: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("{0} is not an odd prime power")]
    NotOddPrimePower(u64),
    #[error("base {0} must have absolute value greater than 1")]
    BaseTooSmall(i64),
    #[error("base {0} must be odd")]
    EvenBase(i64),
    #[error("{0} must be odd")]
    EvenModulus(u64),

    /// The supersingular rank shortcut was asked about a (q, d) pair
    /// outside its hypotheses.
    #[error("supersingular preconditions not met: {0}")]
    SupersingularPrecondition(String),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("character is even; only odd characters are admissible here")]
    EvenCharacter,
    #[error("characteristic {p} divides d = {d}")]
    CharacteristicDividesD { p: u64, d: u64 },
    #[error("internal arithmetic invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
