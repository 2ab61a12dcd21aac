//! Slow-manifold reduction for a hinged Rayleigh beam on a nonlinear elastic
//! foundation, driven by weak time-periodic forcing:
//!
//! ```text
//! u_tt − μ u_ttxx = −α u_xxxx + β u_txx − γ u − δ u_t − κ u³ + ε cos(ωt) sin(x)
//! ```
//!
//! on (0, π) with u = u_xx = 0 at both ends. Expanded in the sine basis, every
//! mode n carries a damped-oscillator pair λₙ± and the slowest pair spans a
//! two-dimensional attracting invariant manifold. This crate builds that
//! manifold explicitly to cubic order ([`ssm`]), extends it to first order in
//! the forcing amplitude ([`forced`]), and checks everything against a direct
//! Galerkin discretization of the PDE ([`galerkin`]).
//!
//! The [`cli`] module wires the pieces into the `ssm-beam` binary.

pub mod cli;
pub mod forced;
pub mod galerkin;
pub mod model;
pub mod ode;
pub mod ssm;

/// Crate-wide error type. The CLI maps variants onto process exit codes:
/// configuration and regime problems → 2, resonances → 3, numerical
/// breakdowns → 4.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Parameter or configuration rejected before any numerics ran.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A mode pair has real eigenvalues; the per-mode eigenbasis is not
    /// defined and none of the complex-coordinate machinery applies.
    #[error("mode {n} is overdamped (real eigenvalue pair); no oscillatory eigenbasis")]
    Overdamped { n: usize },

    /// A denominator that must stay away from zero got too small: internal
    /// resonance between eigenvalue combinations, or forcing frequency
    /// hitting an eigenfrequency.
    #[error("resonance: {0}")]
    Resonance(String),

    /// Blow-up, step-size underflow, or an iteration that failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the `ssm-beam` binary reports for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Invalid(_) | Error::Overdamped { .. } | Error::Io(_) => 2,
            Error::Resonance(_) => 3,
            Error::Numerical(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
