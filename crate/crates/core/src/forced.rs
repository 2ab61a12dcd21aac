//! Periodic forcing at first order in ε.
//!
//! Three layers, all anchored on the forcing shape ε cos(ωt) sin x:
//!
//! * the periodic response of the linear beam, solved per mode and temporal
//!   harmonic through the characteristic polynomial at imω;
//! * the ε-expansion of the invariant manifold, W = W⁰ + εW¹(θ), where the
//!   mode-1 component of the forcing drops tangentially into the reduced
//!   dynamics ż = λ₁z + R₀z²z̄ + ε cos θ · R₁ and the remaining corrections
//!   K¹ follow from harmonic-balance solves
//!   (n·λ + ihω − λ_{l,±}) K = −S with S the feed of the order-3
//!   coefficients through the new ε-term of ż;
//! * the stroboscopic map of the reduced flow over one forcing period,
//!   whose fixed point tracks the periodic orbit.
//!
//! The phase is never integrated: θ(t) = θ₀ + ωt exactly.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::galerkin::{cubic_projection, ForcingSpec, GalerkinState};
use crate::model::{characteristic_residual, BeamParameters};
use crate::ode::{self, AdaptiveOpts};
use crate::ssm::{CoefficientTable, ReducedModel};
use crate::{Error, Result};

/// Relative floor for the linear-response denominators.
const RESPONSE_DENOM_REL: f64 = 1e-9;
/// Relative floor for the harmonic-balance denominators.
const HARMONIC_DENOM_REL: f64 = 1e-8;
/// Below this radius the polar form's 1/r term is meaningless; callers are
/// pointed at the Cartesian field instead.
const POLAR_MIN_RADIUS: f64 = 1e-6;

/// Periodic response written as w(x,t) = Σ ŵ_{n,m} e^{imωt} sin(nx) with
/// conjugate symmetry ŵ_{n,−m} = conj ŵ_{n,m}.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub omega: f64,
    pub coefficients: BTreeMap<(usize, i32), Complex64>,
}

impl PeriodicOrbit {
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn displacement_at(&self, t: f64, n_modes: usize) -> Vec<f64> {
        self.sum_at(t, n_modes, |_, coef| coef)
    }

    pub fn velocity_at(&self, t: f64, n_modes: usize) -> Vec<f64> {
        self.sum_at(t, n_modes, |m, coef| {
            Complex64::new(0.0, m as f64 * self.omega) * coef
        })
    }

    pub fn state_at(&self, t: f64, n_modes: usize) -> GalerkinState {
        GalerkinState::new(
            t,
            self.displacement_at(t, n_modes),
            self.velocity_at(t, n_modes),
        )
    }

    fn sum_at(
        &self,
        t: f64,
        n_modes: usize,
        weight: impl Fn(i32, Complex64) -> Complex64,
    ) -> Vec<f64> {
        let mut out = vec![0.0; n_modes];
        for (&(n, m), &coef) in &self.coefficients {
            if n >= 1 && n <= n_modes {
                let phase = Complex64::new(0.0, m as f64 * self.omega * t).exp();
                out[n - 1] += (weight(m, coef) * phase).re;
            }
        }
        out
    }
}

/// ε ĥ / D for one mode and harmonic, where D is the modal characteristic
/// polynomial at imω: D = imω(δ+βn²) + (αn⁴+γ) − (mω)²(1+μn²).
pub fn response_coefficient(
    params: &BeamParameters,
    n: usize,
    m: i32,
    h_hat: Complex64,
    eps: f64,
) -> Result<Complex64> {
    let den = characteristic_residual(params, n, Complex64::new(0.0, m as f64 * params.omega));
    let scale = params.alpha * (n * n * n * n) as f64 + params.gamma;
    if den.norm() <= RESPONSE_DENOM_REL * scale {
        return Err(Error::Resonance(format!(
            "linear resonance at (n = {n}, m = {m}): |D| = {:.3e}",
            den.norm()
        )));
    }
    Ok(eps * h_hat / den)
}

/// Periodic orbit of the linear (κ = 0) beam under ε cos(ωt)·Σ cₙ sin(nx):
/// harmonics m = ±1 with ĥ_{n,±1} = cₙ/2.
pub fn linear_periodic_response(
    params: &BeamParameters,
    forcing: &ForcingSpec,
    eps: f64,
) -> Result<PeriodicOrbit> {
    params.validate()?;
    let mut coefficients = BTreeMap::new();
    for (&n, &c) in &forcing.modal_amplitudes {
        for m in [1i32, -1] {
            let h_hat = Complex64::new(c / 2.0, 0.0);
            coefficients.insert((n, m), response_coefficient(params, n, m, h_hat, eps)?);
        }
    }
    Ok(PeriodicOrbit {
        omega: params.omega,
        coefficients,
    })
}

/// Reduced dynamics with the tangential forcing term:
/// ż = λ₁z + R₀z²z̄ + ε cos θ · R₁, with R₁ = −c₁/(λ̄₁ − λ₁).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcedReducedModel {
    pub base: ReducedModel,
    /// Multiplies ε cos θ in ż.
    pub r1_coeff: Complex64,
    pub epsilon: f64,
    pub omega: f64,
}

impl ForcedReducedModel {
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn vector_field(&self, z: Complex64, theta: f64) -> Complex64 {
        self.base.vector_field(z) + self.epsilon * theta.cos() * self.r1_coeff
    }

    /// The same field in polar coordinates z = re^{iφ}, written out in real
    /// trigonometry as an independent route (R₁ is purely imaginary because
    /// λ̄₁ − λ₁ is):
    ///
    /// ```text
    /// ṙ = Ar + ε cos θ · Im(R₁) sin φ
    /// φ̇ = B + Im(R₀) r² + (ε cos θ / r) · Im(R₁) cos φ
    /// ```
    pub fn polar_vector_field(&self, r: f64, phi: f64, theta: f64) -> Result<(f64, f64)> {
        if r < POLAR_MIN_RADIUS {
            return Err(Error::Invalid(format!(
                "polar form is singular near r = 0 (r = {r:.3e}); use the Cartesian field"
            )));
        }
        let drive = self.epsilon * theta.cos() * self.r1_coeff.im;
        let r_dot = self.base.a_real * r + self.base.r0.re * r * r * r + drive * phi.sin();
        let phi_dot = self.base.b_imag + self.base.r0.im * r * r + drive * phi.cos() / r;
        Ok((r_dot, phi_dot))
    }
}

/// First-order-in-ε manifold corrections K¹, keyed by (n₁, n₂), then by
/// (sine mode, θ-harmonic); values are eigenbasis pairs. Order 0 and 1 in z
/// need no correction under mode-1 forcing, so only |n| = 2 is stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FirstOrderTable {
    pub entries: BTreeMap<(u32, u32), BTreeMap<(usize, i32), [Complex64; 2]>>,
}

/// Assembles the forced reduced model and the K¹ table from the unforced
/// manifold. Implemented for forcing shaped on sine mode 1 (where it is
/// tangential); other shapes would add normal-direction corrections at
/// order z⁰ that nothing downstream consumes.
pub fn first_order_coefficients(
    params: &BeamParameters,
    forcing: &ForcingSpec,
    table: &CoefficientTable,
    model: &ReducedModel,
) -> Result<(ForcedReducedModel, FirstOrderTable)> {
    let mut c1 = 0.0;
    for (&n, &c) in &forcing.modal_amplitudes {
        if n == 1 {
            c1 = c;
        } else if c != 0.0 {
            return Err(Error::Invalid(format!(
                "first-order manifold corrections support forcing on sine mode 1 only \
                 (found mode {n})"
            )));
        }
    }
    let lambda1 = model.lambda1;
    let d1 = lambda1.conj() - lambda1;
    let r1_coeff = -c1 / d1;
    let fmodel = ForcedReducedModel {
        base: *model,
        r1_coeff,
        epsilon: params.epsilon,
        omega: params.omega,
    };

    // Per-harmonic tangential amplitudes: ż picks up ε(f e^{iθ} + f e^{−iθ})
    // with f = R₁/2, and the conjugate path ε(f̄ e^{iθ} + f̄ e^{−iθ}).
    let f = r1_coeff / 2.0;
    let fbar = f.conj();
    let denom_floor = HARMONIC_DENOM_REL * lambda1.norm().max(params.omega);

    let mut entries: BTreeMap<(u32, u32), BTreeMap<(usize, i32), [Complex64; 2]>> =
        BTreeMap::new();
    for (m1, m2) in [(2u32, 0u32), (1, 1), (0, 2)] {
        let mut per_mode: BTreeMap<(usize, i32), [Complex64; 2]> = BTreeMap::new();
        let up = &table.entries[&(m1 + 1, m2)];
        let down = &table.entries[&(m1, m2 + 1)];
        for (&mode, &lam) in &table.lambdas {
            // Feed of the order-3 coefficients through the ε-term of ż:
            // S = (m1+1) K⁰_{m+(1,0)} f + (m2+1) K⁰_{m+(0,1)} f̄, the same
            // for both harmonics since cos θ is even.
            let ku = up[&mode];
            let kd = down[&mode];
            let s = [
                (m1 + 1) as f64 * ku[0] * f + (m2 + 1) as f64 * kd[0] * fbar,
                (m1 + 1) as f64 * ku[1] * f + (m2 + 1) as f64 * kd[1] * fbar,
            ];
            let n_dot = m1 as f64 * lambda1 + m2 as f64 * lambda1.conj();
            for h in [1i32, -1] {
                let shift = n_dot + Complex64::new(0.0, h as f64 * params.omega);
                let mut k = [Complex64::ZERO; 2];
                for (branch, target) in [lam, lam.conj()].into_iter().enumerate() {
                    let den = shift - target;
                    if den.norm() <= denom_floor {
                        return Err(Error::Resonance(format!(
                            "forced resonance at monomial ({m1},{m2}), harmonic {h}, \
                             mode {mode}{}: |denominator| = {:.3e}",
                            if branch == 0 { "⁺" } else { "⁻" },
                            den.norm()
                        )));
                    }
                    k[branch] = -s[branch] / den;
                }
                per_mode.insert((mode, h), k);
            }
        }
        entries.insert((m1, m2), per_mode);
    }
    Ok((fmodel, FirstOrderTable { entries }))
}

/// Norm of the ε-order conjugacy defect at (z, θ): the defect of
/// A·W + G(W) + ε·h(θ) = DW·ż + ω ∂θW with W = W⁰ + εW¹ under the forced
/// reduced field, minus the ε = 0 defect of W⁰ at the same point, over the
/// first `n_modes` sine modes. The subtraction removes the ε-independent
/// truncation tail O(|z|⁵), so correct first-order tables leave
/// O(ε²) + O(ε|z|⁴).
pub fn eps_residual(
    params: &BeamParameters,
    table: &CoefficientTable,
    first_order: &FirstOrderTable,
    fmodel: &ForcedReducedModel,
    z: Complex64,
    theta: f64,
    n_modes: usize,
) -> Result<f64> {
    if n_modes < table.max_mode() {
        return Err(Error::Invalid(format!(
            "residual needs at least {} modes, got {n_modes}",
            table.max_mode()
        )));
    }
    let full = conjugacy_defect(params, table, first_order, fmodel, z, theta, n_modes);
    let frozen = ForcedReducedModel {
        epsilon: 0.0,
        ..*fmodel
    };
    let base = conjugacy_defect(params, table, first_order, &frozen, z, theta, n_modes);
    let mut sum = 0.0;
    for (f, b) in full.iter().zip(&base) {
        sum += (f[0] - b[0]).norm_sqr() + (f[1] - b[1]).norm_sqr();
    }
    Ok(sum.sqrt())
}

fn conjugacy_defect(
    params: &BeamParameters,
    table: &CoefficientTable,
    first_order: &FirstOrderTable,
    fmodel: &ForcedReducedModel,
    z: Complex64,
    theta: f64,
    n_modes: usize,
) -> Vec<[Complex64; 2]> {
    let zb = z.conj();
    let eps = fmodel.epsilon;
    let zdot = fmodel.vector_field(z, theta);
    let zbdot = zdot.conj();

    // Gather every monomial term (n1, n2, harmonic, mode, K, weight).
    struct Term {
        n1: u32,
        n2: u32,
        h: i32,
        mode: usize,
        k: [Complex64; 2],
        weight: f64,
    }
    let mut terms = Vec::new();
    for (&(n1, n2), modes) in &table.entries {
        for (&mode, &k) in modes {
            terms.push(Term {
                n1,
                n2,
                h: 0,
                mode,
                k,
                weight: 1.0,
            });
        }
    }
    for (&(n1, n2), modes) in &first_order.entries {
        for (&(mode, h), &k) in modes {
            terms.push(Term {
                n1,
                n2,
                h,
                mode,
                k,
                weight: eps,
            });
        }
    }

    let zpow = |base: Complex64, k: u32| -> Complex64 {
        let mut acc = Complex64::ONE;
        for _ in 0..k {
            acc *= base;
        }
        acc
    };

    let mut w = vec![[Complex64::ZERO; 2]; n_modes];
    let mut tangent = vec![[Complex64::ZERO; 2]; n_modes];
    for term in &terms {
        let phase = Complex64::new(0.0, term.h as f64 * theta).exp();
        let mono = zpow(z, term.n1) * zpow(zb, term.n2) * phase;
        let mut dmono = Complex64::ZERO;
        if term.n1 > 0 {
            dmono += term.n1 as f64 * zpow(z, term.n1 - 1) * zpow(zb, term.n2) * phase * zdot;
        }
        if term.n2 > 0 {
            dmono += term.n2 as f64 * zpow(z, term.n1) * zpow(zb, term.n2 - 1) * phase * zbdot;
        }
        // ω ∂θ of the e^{ihθ} factor.
        dmono += Complex64::new(0.0, term.h as f64 * fmodel.omega) * mono;
        let lam = table.lambdas[&term.mode];
        let idx = term.mode - 1;
        let (cp, cm) = (term.k[0] * term.weight, term.k[1] * term.weight);
        w[idx][0] += (cp + cm) * mono;
        w[idx][1] += (lam * cp + lam.conj() * cm) * mono;
        tangent[idx][0] += (cp + cm) * dmono;
        tangent[idx][1] += (lam * cp + lam.conj() * cm) * dmono;
    }

    let a_real: Vec<f64> = w.iter().map(|uv| uv[0].re).collect();
    let f_cubic = cubic_projection(&a_real, params.kappa);
    let drive = eps * theta.cos();

    let mut defect = Vec::with_capacity(n_modes);
    for m in 0..n_modes {
        let n2 = ((m + 1) * (m + 1)) as f64;
        let mass = 1.0 + params.mu * n2;
        let freq2 = (params.alpha * n2 * n2 + params.gamma) / mass;
        let damp = (params.beta * n2 + params.delta) / mass;
        let h_m = if m == 0 { drive } else { 0.0 };
        let res_u = w[m][1] - tangent[m][0];
        let res_v = -freq2 * w[m][0] - damp * w[m][1] + f_cubic[m] + h_m - tangent[m][1];
        defect.push([res_u, res_v]);
    }
    defect
}

/// z after one forcing period 2π/ω of the reduced flow started at
/// (z0, θ = θ0); the phase advances exactly as θ0 + ωt.
pub fn stroboscopic_map(
    model: &ForcedReducedModel,
    z0: Complex64,
    theta0: f64,
) -> Result<Complex64> {
    let period = model.period();
    let mut y = [z0.re, z0.im];
    let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let zd = model.vector_field(Complex64::new(y[0], y[1]), theta0 + model.omega * t);
        dy[0] = zd.re;
        dy[1] = zd.im;
    };
    let opts = AdaptiveOpts {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        dt_init: period / 64.0,
        dt_min: 1e-14,
    };
    ode::rkf45_integrate(&mut rhs, 0.0, period, opts, &mut y)?;
    Ok(Complex64::new(y[0], y[1]))
}

/// Fixed point of the stroboscopic map by damped Newton from the origin
/// with a finite-difference Jacobian; converges when the update drops
/// below 1e−12. Returns the point and the number of Newton updates.
pub fn stroboscopic_fixed_point(
    model: &ForcedReducedModel,
    theta0: f64,
) -> Result<(Complex64, u32)> {
    const FD_STEP: f64 = 1e-7;
    const STEP_TOL: f64 = 1e-12;
    let residual = |z: Complex64| -> Result<Complex64> { Ok(stroboscopic_map(model, z, theta0)? - z) };

    let mut z = Complex64::ZERO;
    let mut fz = residual(z)?;
    for iter in 0..25u32 {
        if fz.norm() == 0.0 {
            return Ok((z, iter));
        }
        let fx = (residual(z + FD_STEP)? - fz) / FD_STEP;
        let fy = (residual(z + Complex64::new(0.0, FD_STEP))? - fz) / FD_STEP;
        // Solve the real 2×2 system [fx fy]·(dx, dy) = −F.
        let det = fx.re * fy.im - fy.re * fx.im;
        if det.abs() < 1e-14 {
            return Err(Error::Numerical(
                "singular Jacobian in stroboscopic fixed-point search".into(),
            ));
        }
        let dx = (-fz.re * fy.im + fz.im * fy.re) / det;
        let dy = (-fx.re * fz.im + fz.re * fx.im) / det;
        let mut step = Complex64::new(dx, dy);
        let mut scale = 1.0;
        for _ in 0..7 {
            let trial = residual(z + scale * step)?;
            if trial.norm() < fz.norm() {
                z += scale * step;
                fz = trial;
                break;
            }
            scale *= 0.5;
        }
        step *= scale;
        if step.norm() < STEP_TOL {
            return Ok((z, iter + 1));
        }
    }
    Err(Error::Numerical(format!(
        "stroboscopic Newton did not converge (last residual {:.3e})",
        fz.norm()
    )))
}

/// Periodic solution of the linearized reduced dynamics
/// ż = λ₁z + ε(R₁/2)(e^{iθ} + e^{−iθ}), evaluated at phase θ. The strobe
/// fixed point approaches this point as ε³ (the cubic term is the only
/// omission).
pub fn linear_reduced_orbit(model: &ForcedReducedModel, theta: f64) -> Complex64 {
    let f = model.r1_coeff / 2.0;
    let iw = Complex64::new(0.0, model.omega);
    let c_plus = model.epsilon * f / (iw - model.base.lambda1);
    let c_minus = model.epsilon * f / (-iw - model.base.lambda1);
    let e = Complex64::new(0.0, theta).exp();
    c_plus * e + c_minus * e.conj()
}
