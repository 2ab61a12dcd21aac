//! Modal structure of the linearized beam.
//!
//! In the sine basis on (0, π), mode n of the linear problem satisfies
//!
//! ```text
//! (1 + μn²) λ² + (βn² + δ) λ + (αn⁴ + γ) = 0,
//! ```
//!
//! so each mode carries the eigenvalue pair
//!
//! ```text
//! λₙ± = −(βn² + δ)/(2 + 2μn²) ± √( ((βn² + δ)/(2 + 2μn²))² − (αn⁴ + γ)/(1 + μn²) ).
//! ```
//!
//! For μ > 0 the real parts stay bounded: Re λₙ → −β/(2μ) as n → ∞. That
//! bounded decay-rate ladder is what makes a slow 2-dimensional reduction
//! meaningful, and everything in this module exists to certify it: the
//! damping inequalities, monotonicity of Re λₙ, the spectral quotient q, and
//! the nonresonance scans that the manifold construction requires.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default tolerance for resonance distances and integer-proximity tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Physical parameters of the beam equation
/// `u_tt − μ u_ttxx = −α u_xxxx + β u_txx − γ u − δ u_t − κ u³ + ε cos(ωt) sin(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParameters {
    /// Bending stiffness (α > 0).
    pub alpha: f64,
    /// Strain-rate (structural) damping (β ≥ 0).
    pub beta: f64,
    /// Linear foundation stiffness (γ > 0).
    pub gamma: f64,
    /// External viscous damping (δ ≥ 0).
    pub delta: f64,
    /// Rotary inertia (μ > 0); keeps Re λₙ bounded from below.
    pub mu: f64,
    /// Cubic foundation coefficient (κ ≥ 0).
    pub kappa: f64,
    /// Forcing amplitude (ε ≥ 0).
    pub epsilon: f64,
    /// Forcing angular frequency (ω > 0).
    pub omega: f64,
}

impl BeamParameters {
    /// Rejects parameter sets for which the modal quadratic or the energy
    /// functional degenerates.
    pub fn validate(&self) -> Result<()> {
        let checks: [(&str, bool); 8] = [
            ("alpha must be > 0", self.alpha > 0.0),
            ("beta must be >= 0", self.beta >= 0.0),
            ("gamma must be > 0", self.gamma > 0.0),
            ("delta must be >= 0", self.delta >= 0.0),
            ("mu must be > 0", self.mu > 0.0),
            ("kappa must be >= 0", self.kappa >= 0.0),
            ("epsilon must be >= 0", self.epsilon >= 0.0),
            ("omega must be > 0", self.omega > 0.0),
        ];
        for (msg, ok) in checks {
            if !ok {
                return Err(Error::Invalid(msg.into()));
            }
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("mu", self.mu),
            ("kappa", self.kappa),
            ("epsilon", self.epsilon),
            ("omega", self.omega),
        ] {
            if !v.is_finite() {
                return Err(Error::Invalid(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// β keeping mode 1 exactly four times slower than the asymptotic decay
    /// rate: β = 4δμ/(1 − 3μ). Only meaningful for μ < 1/3.
    pub fn beta_preset_q4(delta: f64, mu: f64) -> Option<f64> {
        (mu > 0.0 && mu < 1.0 / 3.0 && delta > 0.0).then(|| 4.0 * delta * mu / (1.0 - 3.0 * mu))
    }
}

/// Eigenvalue pair of one sine mode. For an underdamped mode `minus` is the
/// complex conjugate of `plus` and `plus` carries the positive imaginary
/// part; for an overdamped mode both are real with `plus ≥ minus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub n: usize,
    pub plus: Complex64,
    pub minus: Complex64,
}

impl EigenPair {
    pub fn is_overdamped(&self) -> bool {
        self.plus.im == 0.0
    }

    /// λ̄ₙ − λₙ, the Vandermonde determinant of the mode's eigenbasis.
    fn gap(&self) -> Complex64 {
        self.minus - self.plus
    }

    /// Coordinates of the modal state (uₙ, vₙ) in the eigenbasis
    /// {(1, λₙ), (1, λ̄ₙ)}: applies V⁻¹ = [[λ̄, −1], [−λ, 1]]/(λ̄ − λ).
    pub fn to_eigen(&self, u: Complex64, v: Complex64) -> Result<[Complex64; 2]> {
        if self.is_overdamped() {
            return Err(Error::Overdamped { n: self.n });
        }
        let d = self.gap();
        Ok([(self.minus * u - v) / d, (v - self.plus * u) / d])
    }

    /// Back to modal coordinates: applies V = [[1, 1], [λ, λ̄]].
    pub fn to_modal(&self, c: [Complex64; 2]) -> [Complex64; 2] {
        [c[0] + c[1], self.plus * c[0] + self.minus * c[1]]
    }
}

/// Eigenvalue pair of sine mode `n ≥ 1`.
pub fn eigenvalues(params: &BeamParameters, n: usize) -> EigenPair {
    assert!(n >= 1, "modes are numbered from 1");
    let n2 = (n * n) as f64;
    let half_trace = -(params.beta * n2 + params.delta) / (2.0 + 2.0 * params.mu * n2);
    let freq2 = (params.alpha * n2 * n2 + params.gamma) / (1.0 + params.mu * n2);
    let radicand = half_trace * half_trace - freq2;
    if radicand < 0.0 {
        let im = (-radicand).sqrt();
        EigenPair {
            n,
            plus: Complex64::new(half_trace, im),
            minus: Complex64::new(half_trace, -im),
        }
    } else {
        let s = radicand.sqrt();
        EigenPair {
            n,
            plus: Complex64::new(half_trace + s, 0.0),
            minus: Complex64::new(half_trace - s, 0.0),
        }
    }
}

/// Pairs for modes 1..=n_max.
pub fn spectrum(params: &BeamParameters, n_max: usize) -> Vec<EigenPair> {
    (1..=n_max).map(|n| eigenvalues(params, n)).collect()
}

/// Value of the monic-free modal quadratic at λ; zero (to rounding) for
/// genuine eigenvalues. Used as an independent check on the closed form.
pub fn characteristic_residual(params: &BeamParameters, n: usize, lambda: Complex64) -> Complex64 {
    let n2 = (n * n) as f64;
    (1.0 + params.mu * n2) * lambda * lambda
        + (params.beta * n2 + params.delta) * lambda
        + (params.alpha * n2 * n2 + params.gamma)
}

/// lim_{n→∞} Re λₙ = −β/(2μ).
pub fn real_part_limit(params: &BeamParameters) -> f64 {
    -params.beta / (2.0 * params.mu)
}

/// Most negative real part among modes n > n_slow. Re λₙ is monotone in n
/// (the sign of d Re λ/dn² is fixed by β − δμ), so the infimum is attained
/// either at n_slow + 1 or in the n → ∞ limit.
fn tail_infimum(params: &BeamParameters, n_slow: usize) -> f64 {
    let next = eigenvalues(params, n_slow + 1);
    next.plus.re.min(next.minus.re).min(real_part_limit(params))
}

/// Relative spectral quotient q = ⌊inf_{j>N} Re λⱼ / Re λ₁⌋ for the slow
/// subspace spanned by modes 1..=n_slow. The floor is taken with a small
/// upward nudge so parameter sets engineered to land exactly on an integer
/// are not knocked down by rounding.
pub fn spectral_quotient(params: &BeamParameters, n_slow: usize) -> Result<u32> {
    let lead = eigenvalues(params, 1);
    if lead.plus.re >= 0.0 {
        return Err(Error::Invalid(
            "mode 1 is undamped or growing; spectral quotient undefined".into(),
        ));
    }
    let ratio = tail_infimum(params, n_slow) / lead.plus.re;
    let q = (ratio + DEFAULT_TOL).floor();
    if q < 1.0 {
        return Err(Error::Invalid(format!(
            "tail modes decay slower than mode 1 (ratio {ratio:.6}); \
             spectral quotient undefined"
        )));
    }
    Ok(q as u32)
}

/// Checks L ≥ inf_{j>N} Re λⱼ / sup_{j≤N} Re λⱼ − 1, the smoothness-degree
/// condition a degree-L reduced polynomial must satisfy.
pub fn check_ratio_condition(params: &BeamParameters, n_slow: usize, l: u32) -> Result<bool> {
    let sup = (1..=n_slow)
        .map(|n| {
            let p = eigenvalues(params, n);
            p.plus.re.max(p.minus.re)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    if sup >= 0.0 {
        return Err(Error::Invalid(
            "slow modes are not strictly decaying; ratio condition undefined".into(),
        ));
    }
    let ratio = tail_infimum(params, n_slow) / sup;
    Ok(l as f64 >= ratio - 1.0 - DEFAULT_TOL)
}

/// Inner nonresonance for the slow subspace of modes 1..=n_slow: no integer
/// combination s of the slow eigenvalues {λₖ, λ̄ₖ} with 2 ≤ |s| ≤ q may land
/// within `tol` of a fast eigenvalue λⱼ± (j > n_slow).
///
/// The scan over j terminates once it provably cannot fail any more:
/// |Im λⱼ| grows like n√(α/μ) while every combination satisfies
/// |Im Σ| ≤ q·maxₖ Im λₖ, so beyond the first j with
/// Im λⱼ > q·maxₖ Im λₖ + tol the imaginary parts alone keep the distance
/// above `tol`. A hard cap guards against pathological parameters.
pub fn check_inner_nonresonance(
    params: &BeamParameters,
    n_slow: usize,
    q: u32,
    tol: f64,
) -> Result<bool> {
    if q < 2 {
        return Ok(true);
    }
    let slow = spectrum(params, n_slow);
    let mut values = Vec::with_capacity(2 * n_slow);
    for pair in &slow {
        if pair.is_overdamped() {
            return Err(Error::Overdamped { n: pair.n });
        }
        values.push(pair.plus);
        values.push(pair.minus);
    }
    let mut sums = Vec::new();
    combination_sums(&values, q as usize, 0, 0, Complex64::ZERO, &mut sums);
    let max_im = sums.iter().map(|s| s.im.abs()).fold(0.0, f64::max);

    const J_CAP: usize = 2_000_000;
    for j in n_slow + 1..=J_CAP {
        let fast = eigenvalues(params, j);
        for target in [fast.plus, fast.minus] {
            for s in &sums {
                if (s - target).norm() <= tol {
                    return Ok(false);
                }
            }
        }
        if !fast.is_overdamped() && fast.plus.im > max_im + tol {
            return Ok(true);
        }
    }
    Err(Error::Numerical(
        "inner nonresonance scan did not terminate within the mode cap".into(),
    ))
}

/// All Σᵢ sᵢ·values[i] with total degree 2..=q, gathered recursively.
fn combination_sums(
    values: &[Complex64],
    q: usize,
    index: usize,
    degree: usize,
    acc: Complex64,
    out: &mut Vec<Complex64>,
) {
    if index == values.len() {
        if degree >= 2 {
            out.push(acc);
        }
        return;
    }
    let mut term = Complex64::ZERO;
    for s in 0..=(q - degree) {
        combination_sums(values, q, index + 1, degree + s, acc + term, out);
        term += values[index];
    }
}

/// Nonresonance between the forcing frequency and the beam spectrum, for
/// modes up to `n_max`:
///
/// (a) Im λₙ/ω stays at least `tol` away from every integer (skipped for
///     overdamped modes, which have no oscillation to lock onto), and
/// (b) |iℓω − λₙ±| > tol for |ℓ| ≤ m_max, so the forcing harmonics never
///     collide with an eigenvalue. Damped modes (Re λ < 0) pass (b)
///     automatically; the check matters on the margin Re λₙ → 0.
pub fn check_forcing_nonresonance(
    params: &BeamParameters,
    n_max: usize,
    m_max: u32,
    tol: f64,
) -> bool {
    let omega = params.omega;
    for pair in spectrum(params, n_max) {
        if !pair.is_overdamped() {
            let frac = pair.plus.im / omega;
            if (frac - frac.round()).abs() <= tol {
                return false;
            }
        }
        for l in -(m_max as i64)..=m_max as i64 {
            let harmonic = Complex64::new(0.0, l as f64 * omega);
            if (harmonic - pair.plus).norm() <= tol || (harmonic - pair.minus).norm() <= tol {
                return false;
            }
        }
    }
    true
}

/// Outcome of the full parameter audit. `spectral_quotient` is `None` when
/// mode 1 is not strictly the slowest (then the whole slow-manifold picture,
/// and with it the nonresonance bookkeeping, is void).
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// β² < 4α: strain-rate damping subcritical against bending.
    pub beta_subcritical: bool,
    /// 2βδ < 4γμ: mixed damping subcritical against foundation/inertia.
    pub mixed_subcritical: bool,
    /// δ² < 4γ: viscous damping subcritical against the foundation.
    pub delta_subcritical: bool,
    /// δμ < β: decay rates decrease with n, so mode 1 is the slowest.
    /// When this fails the spectrum accumulates at its fastest rate from
    /// below and no finite collection of modes dominates.
    pub slow_manifold_regime: bool,
    /// Largest scanned prefix of modes with genuinely complex pairs.
    pub underdamped_up_to: usize,
    /// Re λₙ strictly decreasing over the scanned range.
    pub monotone_real_parts: bool,
    pub inner_nonresonant: bool,
    pub forcing_nonresonant: bool,
    pub spectral_quotient: Option<u32>,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.beta_subcritical
            && self.mixed_subcritical
            && self.delta_subcritical
            && self.slow_manifold_regime
            && self.monotone_real_parts
            && self.inner_nonresonant
            && self.forcing_nonresonant
            && self.spectral_quotient.is_some()
    }
}

/// Audits the damping inequalities, the spectral layout over modes
/// 1..=n_max, and both nonresonance conditions (forcing harmonics up to
/// |ℓ| = 16).
pub fn check_assumptions(params: &BeamParameters, n_max: usize, tol: f64) -> AssumptionReport {
    let (a, b, g, d, mu) = (
        params.alpha,
        params.beta,
        params.gamma,
        params.delta,
        params.mu,
    );
    let pairs = spectrum(params, n_max);
    let underdamped_up_to = pairs
        .iter()
        .position(|p| p.is_overdamped())
        .unwrap_or(n_max);
    let monotone_real_parts = pairs.windows(2).all(|w| w[1].plus.re < w[0].plus.re);
    let quotient = spectral_quotient(params, 1).ok();
    let inner_nonresonant = match quotient {
        Some(q) => check_inner_nonresonance(params, 1, q, tol).unwrap_or(false),
        None => false,
    };
    AssumptionReport {
        beta_subcritical: b * b < 4.0 * a,
        mixed_subcritical: 2.0 * b * d < 4.0 * g * mu,
        delta_subcritical: d * d < 4.0 * g,
        slow_manifold_regime: d * mu < b,
        underdamped_up_to,
        monotone_real_parts,
        inner_nonresonant,
        forcing_nonresonant: check_forcing_nonresonance(params, n_max, 16, tol),
        spectral_quotient: quotient,
    }
}

/// Per-mode change from modal coordinates (uₙ, vₙ) into eigen coordinates;
/// `modal[i]` belongs to sine mode i + 1.
pub fn modal_to_eigen(
    params: &BeamParameters,
    modal: &[[f64; 2]],
) -> Result<Vec<[Complex64; 2]>> {
    modal
        .iter()
        .enumerate()
        .map(|(i, &[u, v])| {
            eigenvalues(params, i + 1).to_eigen(Complex64::new(u, 0.0), Complex64::new(v, 0.0))
        })
        .collect()
}

/// Inverse of [`modal_to_eigen`]; the result is genuinely complex unless the
/// eigen components are conjugate-paired.
pub fn eigen_to_modal(params: &BeamParameters, eigen: &[[Complex64; 2]]) -> Vec<[Complex64; 2]> {
    eigen
        .iter()
        .enumerate()
        .map(|(i, &c)| eigenvalues(params, i + 1).to_modal(c))
        .collect()
}
