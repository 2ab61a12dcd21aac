//! Third-order slow spectral submanifold of the unforced beam.
//!
//! The manifold is parametrized over the mode-1 eigenplane by
//! W(z, z̄) = Σ K₍n₁,n₂₎ z^{n₁} z̄^{n₂}, with each coefficient a per-mode
//! pair in the eigenbasis {(1, λₙ), (1, λ̄ₙ)}. Order 1 is the tangency
//! K₍₁,₀₎ = (1, 0), K₍₀,₁₎ = (0, 1) on mode 1; order 2 vanishes because the
//! nonlinearity is odd; order 3 follows from the homological equations
//!
//! ```text
//! (n₁λ₁ + n₂λ̄₁ − λ_{l,±}) K = G,
//! ```
//!
//! where G collects the eigen-projected cubic coefficients. The single
//! near-resonant slot (monomial z²z̄ on the tangent direction, denominator
//! λ₁ + λ̄₁) is not divided through; its right-hand side becomes the
//! normal-form coefficient R₀ of the reduced dynamics ż = λ₁z + R₀z²z̄
//! instead. R₀ comes out purely imaginary, so |z| decays at exactly Re λ₁
//! while the phase velocity Ω(r) = Im λ₁ + Im(R₀) r² bends with amplitude:
//! the backbone curve.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::galerkin::cubic_projection;
use crate::model::{eigenvalues, BeamParameters};
use crate::{Error, Result};

/// Relative modulus floor for homological denominators; anything smaller is
/// reported as a resonance instead of being divided through.
const SMALL_DENOMINATOR_REL: f64 = 1e-8;

/// Largest tolerated imaginary residue when a conjugate-symmetric
/// evaluation is cast back to real modal coordinates.
const REALNESS_TOL: f64 = 1e-12;

/// Manifold coefficients K₍n₁,n₂₎, keyed by the (n₁, n₂) powers of (z, z̄),
/// then by sine mode; values are eigenbasis pairs [K⁺, K⁻]. `lambdas` holds
/// the plus-branch eigenvalue of every mode the table touches.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub entries: BTreeMap<(u32, u32), BTreeMap<usize, [Complex64; 2]>>,
    pub lambdas: BTreeMap<usize, Complex64>,
}

impl CoefficientTable {
    /// Highest sine mode the parametrization reaches.
    pub fn max_mode(&self) -> usize {
        self.lambdas.keys().next_back().copied().unwrap_or(0)
    }

    /// All eigen components at z: mode → [c⁺, c⁻].
    fn eval_eigen(&self, z: Complex64) -> BTreeMap<usize, [Complex64; 2]> {
        let zb = z.conj();
        let mut acc: BTreeMap<usize, [Complex64; 2]> = BTreeMap::new();
        for (&(n1, n2), modes) in &self.entries {
            let mono = zpow(z, n1) * zpow(zb, n2);
            for (&mode, k) in modes {
                let slot = acc.entry(mode).or_insert([Complex64::ZERO; 2]);
                slot[0] += k[0] * mono;
                slot[1] += k[1] * mono;
            }
        }
        acc
    }

    /// Modal complex pairs (uₙ, vₙ) at z, indexed from mode 1; real up to
    /// rounding whenever the table is conjugate-symmetric.
    fn eval_modal(&self, z: Complex64) -> Vec<[Complex64; 2]> {
        let mut out = vec![[Complex64::ZERO; 2]; self.max_mode()];
        for (mode, c) in self.eval_eigen(z) {
            let lam = self.lambdas[&mode];
            out[mode - 1] = [c[0] + c[1], lam * c[0] + lam.conj() * c[1]];
        }
        out
    }
}

/// Reduced dynamics on the manifold: ż = λ₁z + R₀z²z̄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedModel {
    pub lambda1: Complex64,
    pub r0: Complex64,
    /// Re λ₁, the amplitude decay rate.
    pub a_real: f64,
    /// Im λ₁, the linear phase velocity.
    pub b_imag: f64,
}

impl ReducedModel {
    pub fn vector_field(&self, z: Complex64) -> Complex64 {
        self.lambda1 * z + self.r0 * z * z * z.conj()
    }

    /// Instantaneous phase velocity Ω(r) = B + Im(R₀) r².
    pub fn omega_inst(&self, r: f64) -> f64 {
        self.b_imag + self.r0.im * r * r
    }

    /// d|z|/dt at |z| = r; equals A·r exactly since Re R₀ = 0.
    pub fn radial_rate(&self, r: f64) -> f64 {
        (self.a_real + self.r0.re * r * r) * r
    }
}

/// Which modal components enter the backbone amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmpNorm {
    /// Displacement and velocity coefficients together (full state).
    State,
    /// Displacement coefficients only.
    Displacement,
}

impl AmpNorm {
    pub fn name(self) -> &'static str {
        match self {
            AmpNorm::State => "state",
            AmpNorm::Displacement => "displacement",
        }
    }
}

/// One point of the backbone curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackbonePoint {
    pub r: f64,
    pub omega_inst: f64,
    pub amplitude: f64,
}

fn zpow(z: Complex64, k: u32) -> Complex64 {
    let mut acc = Complex64::ONE;
    for _ in 0..k {
        acc *= z;
    }
    acc
}

/// Coefficient of (z+z̄)³ in the eigen-projected cubic term, per mode.
/// Mode 1 receives −(3κ/4)(z+z̄)³ and mode 3 +(κ/4)(z+z̄)³ on the velocity
/// row (sin³x = (3 sin x − sin 3x)/4); projecting (0, f) onto the
/// eigenvectors gives the pair f·(−1, 1)/(λ̄ − λ).
fn cubic_eigen_coefficients(params: &BeamParameters) -> Result<BTreeMap<usize, [Complex64; 2]>> {
    let mut out = BTreeMap::new();
    for (mode, f_coef) in [(1usize, -0.75 * params.kappa), (3, 0.25 * params.kappa)] {
        let pair = eigenvalues(params, mode);
        if pair.is_overdamped() {
            return Err(Error::Overdamped { n: mode });
        }
        let d = pair.minus - pair.plus;
        out.insert(mode, [-f_coef / d, f_coef / d]);
    }
    Ok(out)
}

/// Eigen-projected cubic term of the order-1 manifold, evaluated at z:
/// per-mode pairs
/// (κ/4)(z+z̄)³ · [3/(λ̄₁−λ₁) on mode 1, −1/(λ̄₃−λ₃) on mode 3] ⊗ (1, −1).
pub fn cubic_eigenbasis_projection(
    params: &BeamParameters,
    z: Complex64,
) -> Result<BTreeMap<usize, [Complex64; 2]>> {
    let cube = zpow(z + z.conj(), 3);
    let mut out = cubic_eigen_coefficients(params)?;
    for pair in out.values_mut() {
        pair[0] *= cube;
        pair[1] *= cube;
    }
    Ok(out)
}

/// Builds the order-3 manifold table and the reduced model.
///
/// Every order-3 coefficient solves (n·λ − λ_{l,±})K = G with G the
/// binomially weighted cubic eigen coefficient; the tangential z²z̄ slot is
/// instead absorbed into R₀ (and its conjugate zz̄² twin into the implied
/// conjugate dynamics), which removes the λ₁+λ̄₁ small denominator.
pub fn build_ssm(params: &BeamParameters) -> Result<(CoefficientTable, ReducedModel)> {
    params.validate()?;
    let pair1 = eigenvalues(params, 1);
    if pair1.is_overdamped() {
        return Err(Error::Overdamped { n: 1 });
    }
    let lambda1 = pair1.plus;
    let cubic = cubic_eigen_coefficients(params)?;

    let mut entries: BTreeMap<(u32, u32), BTreeMap<usize, [Complex64; 2]>> = BTreeMap::new();
    entries.insert(
        (1, 0),
        BTreeMap::from([(1, [Complex64::ONE, Complex64::ZERO])]),
    );
    entries.insert(
        (0, 1),
        BTreeMap::from([(1, [Complex64::ZERO, Complex64::ONE])]),
    );
    for idx in [(2, 0), (1, 1), (0, 2)] {
        entries.insert(
            idx,
            BTreeMap::from([(1, [Complex64::ZERO; 2]), (3, [Complex64::ZERO; 2])]),
        );
    }

    let denom_floor = SMALL_DENOMINATOR_REL * lambda1.norm();
    let mut r0 = Complex64::ZERO;
    let mut r0_conj = Complex64::ZERO;
    for (n1, n2) in [(3u32, 0u32), (2, 1), (1, 2), (0, 3)] {
        let binom = match n1 {
            0 | 3 => 1.0,
            _ => 3.0,
        };
        let n_dot_lambda = n1 as f64 * lambda1 + n2 as f64 * lambda1.conj();
        let mut modes = BTreeMap::new();
        for (&mode, g_pair) in &cubic {
            let pair = eigenvalues(params, mode);
            let mut k = [Complex64::ZERO; 2];
            for (branch, target) in [pair.plus, pair.minus].into_iter().enumerate() {
                let g = g_pair[branch] * binom;
                let tangential_plus = mode == 1 && (n1, n2) == (2, 1) && branch == 0;
                let tangential_minus = mode == 1 && (n1, n2) == (1, 2) && branch == 1;
                if tangential_plus {
                    r0 = g;
                    continue;
                }
                if tangential_minus {
                    r0_conj = g;
                    continue;
                }
                let den = n_dot_lambda - target;
                if den.norm() <= denom_floor {
                    return Err(Error::Resonance(format!(
                        "inner resonance at cubic order: \
                         |{n1}λ₁ + {n2}λ̄₁ − λ_{mode}{}| = {:.3e}",
                        if branch == 0 { "⁺" } else { "⁻" },
                        den.norm()
                    )));
                }
                k[branch] = g / den;
            }
            modes.insert(mode, k);
        }
        entries.insert((n1, n2), modes);
    }
    debug_assert!((r0_conj - r0.conj()).norm() <= 1e-14 * (1.0 + r0.norm()));

    let lambdas = BTreeMap::from([(1, lambda1), (3, eigenvalues(params, 3).plus)]);
    Ok((
        CoefficientTable { entries, lambdas },
        ReducedModel {
            lambda1,
            r0,
            a_real: lambda1.re,
            b_imag: lambda1.im,
        },
    ))
}

/// Physical state on the manifold at z: real sine coefficients of u and uₜ,
/// indexed from mode 1 up to the table's highest mode. Errors if the table
/// has lost its conjugation symmetry (imaginary residue above 1e−12).
pub fn evaluate_parametrization(
    table: &CoefficientTable,
    z: Complex64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let modal = table.eval_modal(z);
    let mut a = Vec::with_capacity(modal.len());
    let mut b = Vec::with_capacity(modal.len());
    for (idx, [u, v]) in modal.iter().enumerate() {
        let scale = 1.0 + u.norm() + v.norm();
        if u.im.abs() > REALNESS_TOL * scale || v.im.abs() > REALNESS_TOL * scale {
            return Err(Error::Numerical(format!(
                "parametrization lost realness at mode {} (imaginary residue {:.3e})",
                idx + 1,
                u.im.abs().max(v.im.abs())
            )));
        }
        a.push(u.re);
        b.push(v.re);
    }
    Ok((a, b))
}

/// Norm of the conjugacy defect A·W + G₀(W) − DW·(reduced flow) at z, over
/// the first `n_modes` sine modes. The linear part acts through the modal
/// 2×2 blocks, the cubic through the exact Galerkin projection, and DW by
/// analytic differentiation of the table; for a correct order-3 table the
/// result is the O(|z|⁵) truncation remainder.
pub fn invariance_residual(
    params: &BeamParameters,
    table: &CoefficientTable,
    model: &ReducedModel,
    z: Complex64,
    n_modes: usize,
) -> Result<f64> {
    if n_modes < table.max_mode() {
        return Err(Error::Invalid(format!(
            "residual needs at least {} modes, got {n_modes}",
            table.max_mode()
        )));
    }
    let zb = z.conj();
    let zdot = model.vector_field(z);
    let zbdot = zdot.conj();

    // Manifold point and tangent motion DW·ż, both as eigen pairs per mode.
    let w_eigen = table.eval_eigen(z);
    let mut t_eigen: BTreeMap<usize, [Complex64; 2]> = BTreeMap::new();
    for (&(n1, n2), modes) in &table.entries {
        let mut dmono = Complex64::ZERO;
        if n1 > 0 {
            dmono += n1 as f64 * zpow(z, n1 - 1) * zpow(zb, n2) * zdot;
        }
        if n2 > 0 {
            dmono += n2 as f64 * zpow(z, n1) * zpow(zb, n2 - 1) * zbdot;
        }
        for (&mode, k) in modes {
            let slot = t_eigen.entry(mode).or_insert([Complex64::ZERO; 2]);
            slot[0] += k[0] * dmono;
            slot[1] += k[1] * dmono;
        }
    }

    // Both sides in modal coordinates, padded to n_modes.
    let mut u = vec![Complex64::ZERO; n_modes];
    let mut v = vec![Complex64::ZERO; n_modes];
    let mut udot = vec![Complex64::ZERO; n_modes];
    let mut vdot = vec![Complex64::ZERO; n_modes];
    for (mode, c) in &w_eigen {
        let lam = table.lambdas[mode];
        u[mode - 1] = c[0] + c[1];
        v[mode - 1] = lam * c[0] + lam.conj() * c[1];
    }
    for (mode, c) in &t_eigen {
        let lam = table.lambdas[mode];
        udot[mode - 1] = c[0] + c[1];
        vdot[mode - 1] = lam * c[0] + lam.conj() * c[1];
    }

    let a_real: Vec<f64> = u.iter().map(|c| c.re).collect();
    let f = cubic_projection(&a_real, params.kappa);

    let mut sum = 0.0;
    for m in 0..n_modes {
        let n2 = ((m + 1) * (m + 1)) as f64;
        let mass = 1.0 + params.mu * n2;
        let freq2 = (params.alpha * n2 * n2 + params.gamma) / mass;
        let damp = (params.beta * n2 + params.delta) / mass;
        let res_u = v[m] - udot[m];
        let res_v = -freq2 * u[m] - damp * v[m] + f[m] - vdot[m];
        sum += res_u.norm_sqr() + res_v.norm_sqr();
    }
    Ok(sum.sqrt())
}

/// Exact solution of the reduced polar dynamics ṙ = Ar, θ̇ = B + Im(R₀)r²:
/// r(t) = e^{At} r₀ and θ(t) = θ₀ + Bt + (Im(R₀) r₀²/(2A))(e^{2At} − 1).
pub fn reduced_flow_closed_form(
    model: &ReducedModel,
    r0: f64,
    theta0: f64,
    t: f64,
) -> Result<(f64, f64)> {
    let a = model.a_real;
    if a >= 0.0 {
        return Err(Error::Invalid(format!(
            "closed-form flow needs a strictly decaying slow mode (Re λ₁ = {a})"
        )));
    }
    let r = r0 * (a * t).exp();
    let theta = theta0
        + model.b_imag * t
        + model.r0.im * r0 * r0 / (2.0 * a) * (2.0 * a * t).exp_m1();
    Ok((r, theta))
}

/// Number of uniform θ samples in the backbone amplitude quadrature; the
/// integrand is a trigonometric polynomial of degree ≤ 6, for which the
/// uniform (periodic trapezoid) rule is exact far below this count.
const AMP_SAMPLES: usize = 256;

/// Backbone curve over the given reduced amplitudes: Ω(r) paired with the
/// rotating-frame RMS amplitude Amp(r) = √( (1/2π)∫‖W(re^{iθ})‖² dθ ).
pub fn backbone(
    model: &ReducedModel,
    table: &CoefficientTable,
    r_grid: &[f64],
    norm: AmpNorm,
) -> Vec<BackbonePoint> {
    r_grid
        .iter()
        .map(|&r| {
            let mut acc = 0.0;
            for k in 0..AMP_SAMPLES {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / AMP_SAMPLES as f64;
                let z = Complex64::from_polar(r, theta);
                for [u, v] in table.eval_modal(z) {
                    acc += u.re * u.re;
                    if norm == AmpNorm::State {
                        acc += v.re * v.re;
                    }
                }
            }
            BackbonePoint {
                r,
                omega_inst: model.omega_inst(r),
                amplitude: (acc / AMP_SAMPLES as f64).sqrt(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin;
    use crate::ode;
    use approx::assert_relative_eq;

    fn reference() -> BeamParameters {
        BeamParameters {
            alpha: 1.0,
            beta: 0.6,
            gamma: 1.0,
            delta: 0.5,
            mu: 1.0,
            kappa: 1.0,
            epsilon: 0.0,
            omega: 1.0,
        }
    }

    fn build_reference() -> (CoefficientTable, ReducedModel) {
        build_ssm(&reference()).expect("reference set is resonance-free")
    }

    #[test]
    fn r0_is_purely_imaginary_with_the_expected_magnitude() {
        let (_, model) = build_reference();
        assert_eq!(model.r0.re, 0.0);
        assert_relative_eq!(model.r0.im, 9.0 / (8.0 * model.b_imag), epsilon = 1e-15);
        // Magnitude check against the damped mode-1 frequency 0.9614…
        assert!((model.r0.im - 1.1703).abs() < 5e-4, "Im R₀ = {}", model.r0.im);
        assert_relative_eq!(model.a_real, -0.275, epsilon = 1e-15);
    }

    #[test]
    fn order_three_entries_match_their_closed_forms() {
        let p = reference();
        let (table, _) = build_reference();
        let l1 = eigenvalues(&p, 1).plus;
        let l3 = eigenvalues(&p, 3).plus;
        let d1 = l1.conj() - l1;
        let d3 = l3.conj() - l3;
        let k = p.kappa;

        let k30 = &table.entries[&(3, 0)];
        let expect30_1 = [
            3.0 * k / (4.0 * d1) / (2.0 * l1),
            3.0 * k / (4.0 * d1) / (l1.conj() - 3.0 * l1),
        ];
        let expect30_3 = [
            k / (4.0 * d3) / (l3 - 3.0 * l1),
            k / (4.0 * d3) / (3.0 * l1 - l3.conj()),
        ];
        for (got, want) in k30[&1].iter().zip(&expect30_1) {
            assert_relative_eq!((got - want).norm(), 0.0, epsilon = 1e-15);
        }
        for (got, want) in k30[&3].iter().zip(&expect30_3) {
            assert_relative_eq!((got - want).norm(), 0.0, epsilon = 1e-15);
        }

        let k21 = &table.entries[&(2, 1)];
        assert_eq!(k21[&1][0], Complex64::ZERO, "tangential slot moved into R₀");
        let expect21_1m = -9.0 * k / (8.0 * d1 * l1);
        assert_relative_eq!((k21[&1][1] - expect21_1m).norm(), 0.0, epsilon = 1e-15);
        let expect21_3 = [
            3.0 * k / (4.0 * d3) / (l3 - 2.0 * l1 - l1.conj()),
            3.0 * k / (4.0 * d3) / (l1.conj() + 2.0 * l1 - l3.conj()),
        ];
        for (got, want) in k21[&3].iter().zip(&expect21_3) {
            assert_relative_eq!((got - want).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn order_three_entries_solve_the_homological_equations() {
        // Independent of the closed forms: every stored coefficient must
        // satisfy (n·λ)K + feed = A_block·K + G mode-wise in modal
        // coordinates, with feed = R₀ (resp. conj R₀) on the tangential
        // slots. Catches sign or placement errors in the divided solve.
        let p = reference();
        let (table, model) = build_reference();
        let l1 = table.lambdas[&1];
        let cubic = cubic_eigen_coefficients(&p).unwrap();
        for (n1, n2) in [(3u32, 0u32), (2, 1), (1, 2), (0, 3)] {
            let binom = if n1 == 0 || n1 == 3 { 1.0 } else { 3.0 };
            let n_dot = n1 as f64 * l1 + n2 as f64 * l1.conj();
            for (&mode, k_eigen) in &table.entries[&(n1, n2)] {
                let pair = eigenvalues(&p, mode);
                let k_modal = pair.to_modal(*k_eigen);
                let g_modal = pair.to_modal([
                    cubic[&mode][0] * binom,
                    cubic[&mode][1] * binom,
                ]);
                let mut feed = [Complex64::ZERO; 2];
                if mode == 1 && (n1, n2) == (2, 1) {
                    feed = pair.to_modal([model.r0, Complex64::ZERO]);
                }
                if mode == 1 && (n1, n2) == (1, 2) {
                    feed = pair.to_modal([Complex64::ZERO, model.r0.conj()]);
                }
                let n2f = ((mode * mode) as f64) * p.mu + 1.0;
                let freq2 = (p.alpha * (mode * mode * mode * mode) as f64 + p.gamma) / n2f;
                let damp = (p.beta * (mode * mode) as f64 + p.delta) / n2f;
                let lhs = [
                    n_dot * k_modal[0] + feed[0],
                    n_dot * k_modal[1] + feed[1],
                ];
                let rhs = [
                    k_modal[1] + g_modal[0],
                    -freq2 * k_modal[0] - damp * k_modal[1] + g_modal[1],
                ];
                for (l, r) in lhs.iter().zip(&rhs) {
                    assert!(
                        (l - r).norm() <= 1e-13 * (1.0 + l.norm()),
                        "monomial ({n1},{n2}) mode {mode}: {l} vs {r}"
                    );
                }
            }
        }
    }

    #[test]
    fn non_resonant_entry_matches_direct_linear_solve() {
        // Solve (3λ₁·I − A_block)K = G for mode 3 by Cramer's rule in modal
        // coordinates and compare with the divided eigenbasis solution.
        let p = reference();
        let (table, _) = build_reference();
        let l1 = table.lambdas[&1];
        let three = 3.0 * l1;
        let mass = 1.0 + p.mu * 9.0;
        let freq2 = (p.alpha * 81.0 + p.gamma) / mass;
        let damp = (p.beta * 9.0 + p.delta) / mass;
        // Rows of 3λ₁I − A for mode 3; G = (0, κ/4) from sin³x.
        let (a11, a12) = (three, Complex64::from(-1.0));
        let (a21, a22) = (Complex64::from(freq2), three + damp);
        let g = Complex64::from(0.25 * p.kappa);
        let det = a11 * a22 - a12 * a21;
        let k_modal_direct = [-a12 * g / det, a11 * g / det];
        let pair3 = eigenvalues(&p, 3);
        let k_modal_table = pair3.to_modal(table.entries[&(3, 0)][&3]);
        for (direct, tabled) in k_modal_direct.iter().zip(&k_modal_table) {
            assert!(
                (direct - tabled).norm() <= 1e-13,
                "{direct} vs {tabled}"
            );
        }
    }

    #[test]
    fn table_is_conjugation_symmetric() {
        let (table, _) = build_reference();
        for (&(n1, n2), modes) in &table.entries {
            let twin = &table.entries[&(n2, n1)];
            for (mode, k) in modes {
                let t = twin[mode];
                assert_eq!(t[0], k[1].conj(), "({n1},{n2}) mode {mode}");
                assert_eq!(t[1], k[0].conj(), "({n1},{n2}) mode {mode}");
            }
        }
    }

    #[test]
    fn table_shape_invariants() {
        let (table, _) = build_reference();
        for &(n1, n2) in table.entries.keys() {
            let total = n1 + n2;
            assert!((1..=3).contains(&total), "stored degree {total}");
        }
        for idx in [(2, 0), (1, 1), (0, 2)] {
            for k in table.entries[&idx].values() {
                assert_eq!(k[0], Complex64::ZERO);
                assert_eq!(k[1], Complex64::ZERO);
            }
        }
        // Cubic-order support is exactly sine modes 1 and 3.
        for idx in [(3, 0), (2, 1), (1, 2), (0, 3)] {
            let modes: Vec<usize> = table.entries[&idx].keys().copied().collect();
            assert_eq!(modes, vec![1, 3]);
        }
    }

    #[test]
    fn parametrization_vanishes_at_origin_and_is_tangent() {
        let (table, _) = build_reference();
        let (a0, b0) = evaluate_parametrization(&table, Complex64::ZERO).unwrap();
        assert!(a0.iter().chain(&b0).all(|&x| x == 0.0));

        // Near z = 0 the map is z ↦ (z + z̄, λ₁z + λ̄₁z̄) + O(|z|³) on mode 1.
        let l1 = table.lambdas[&1];
        let z = Complex64::new(3e-5, -2e-5);
        let (a, b) = evaluate_parametrization(&table, z).unwrap();
        let lin_u = 2.0 * z.re;
        let lin_v = (l1 * z + l1.conj() * z.conj()).re;
        assert_relative_eq!(a[0], lin_u, max_relative = 1e-7);
        assert_relative_eq!(b[0], lin_v, max_relative = 1e-7);
        // Mode 3 is purely cubic: third order in |z|, far below mode 1.
        assert!(a[2].abs() <= 10.0 * z.norm().powi(3), "{:.3e}", a[2].abs());
        assert!(a[2].abs() < 1e-7 * a[0].abs());
    }

    #[test]
    fn parametrization_is_real_for_random_points() {
        let (table, _) = build_reference();
        for &(re, im) in &[(0.21, -0.13), (-0.05, 0.4), (0.3, 0.3)] {
            let (a, b) = evaluate_parametrization(&table, Complex64::new(re, im))
                .expect("imaginary residue stays below tolerance");
            assert!(a.iter().chain(&b).all(|x| x.is_finite()));
        }
    }

    #[test]
    fn cubic_projection_consistency_between_bases() {
        // Pushing the eigen-projected cubic back to modal coordinates must
        // put zero on the displacement row and the sine expansion of
        // −κ(2 Re z)³ sin³x on the velocity row.
        let p = reference();
        let z = Complex64::new(0.17, -0.06);
        let g = cubic_eigenbasis_projection(&p, z).unwrap();
        let modal: Vec<[Complex64; 2]> = [1usize, 3]
            .iter()
            .map(|&mode| eigenvalues(&p, mode).to_modal(g[&mode]))
            .collect();
        let u1 = 2.0 * z.re;
        let f = galerkin::cubic_projection(&[u1, 0.0, 0.0], p.kappa);
        for (i, m) in modal.iter().enumerate() {
            assert!(m[0].norm() <= 1e-14, "displacement row must vanish");
            let mode = if i == 0 { 0 } else { 2 };
            assert_relative_eq!(m[1].re, f[mode], max_relative = 1e-12);
            assert!(m[1].im.abs() <= 1e-14 * (1.0 + m[1].re.abs()));
        }

        // Purely imaginary z has z + z̄ = 0 and no cubic term at all.
        let g0 = cubic_eigenbasis_projection(&p, Complex64::new(0.0, 0.3)).unwrap();
        for pair in g0.values() {
            assert_eq!(pair[0], Complex64::ZERO);
            assert_eq!(pair[1], Complex64::ZERO);
        }
    }

    #[test]
    fn invariance_residual_vanishes_where_it_must() {
        let p = reference();
        let (table, model) = build_reference();
        assert_eq!(
            invariance_residual(&p, &table, &model, Complex64::ZERO, 8).unwrap(),
            0.0
        );

        let linear = BeamParameters { kappa: 0.0, ..p };
        let (table0, model0) = build_ssm(&linear).unwrap();
        assert_eq!(model0.r0, Complex64::ZERO);
        let res = invariance_residual(&linear, &table0, &model0, Complex64::new(0.05, 0.02), 8)
            .unwrap();
        assert!(res <= 1e-12, "linear conjugacy must be exact, got {res}");
    }

    #[test]
    fn invariance_residual_decays_at_fifth_order() {
        let p = reference();
        let (table, model) = build_reference();
        let mut logs_r = Vec::new();
        let mut logs_res = Vec::new();
        for k in 0..8 {
            let r = 10f64.powf(-2.5 + 1.5 * k as f64 / 7.0);
            let z = Complex64::from_polar(r, 0.7);
            let res = invariance_residual(&p, &table, &model, z, 16).unwrap();
            logs_r.push(r.ln());
            logs_res.push(res.ln());
        }
        let (slope, _) = ode::fit_line(&logs_r, &logs_res);
        println!("invariance residual slope: {slope:.3}");
        assert!(slope > 4.8, "odd nonlinearity leaves an O(|z|⁵) defect, got {slope}");
    }

    #[test]
    fn closed_form_flow_matches_numerical_integration() {
        let (_, model) = build_reference();
        let (r0, theta0): (f64, f64) = (0.3, 0.4);
        let mut y = [r0 * theta0.cos(), r0 * theta0.sin()];
        let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            let z = Complex64::new(y[0], y[1]);
            let zd = model.vector_field(z);
            dy[0] = zd.re;
            dy[1] = zd.im;
        };
        let mut worst: f64 = 0.0;
        let mut t = 0.0;
        for k in 1..=100 {
            let target = 50.0 * k as f64 / 100.0;
            ode::rkf45_integrate(
                &mut rhs,
                t,
                target,
                ode::AdaptiveOpts::default(),
                &mut y,
            )
            .unwrap();
            t = target;
            let (r, theta) = reduced_flow_closed_form(&model, r0, theta0, t).unwrap();
            let z_closed = Complex64::from_polar(r, theta);
            let z_num = Complex64::new(y[0], y[1]);
            worst = worst.max((z_num - z_closed).norm());
            worst = worst.max((z_num.norm() - r).abs());
        }
        println!("closed form vs ODE deviation: {worst:.3e}");
        assert!(worst < 1e-8, "deviation {worst}");
    }

    #[test]
    fn closed_form_flow_edge_cases() {
        let (_, model) = build_reference();
        let (r, theta) = reduced_flow_closed_form(&model, 0.0, 1.2, 7.0).unwrap();
        assert_eq!(r, 0.0);
        assert_relative_eq!(theta, 1.2 + model.b_imag * 7.0, epsilon = 1e-14);

        let (r0, th0) = reduced_flow_closed_form(&model, 0.25, -0.3, 0.0).unwrap();
        assert_eq!(r0, 0.25);
        assert_eq!(th0, -0.3);

        let growing = ReducedModel {
            lambda1: Complex64::new(0.1, 1.0),
            r0: Complex64::ZERO,
            a_real: 0.1,
            b_imag: 1.0,
        };
        assert!(reduced_flow_closed_form(&growing, 0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn radial_decoupling_under_numerical_integration() {
        // R₀ is purely imaginary, so |z(t)| must follow e^{At}|z₀| even
        // though the phase bends.
        let (_, model) = build_reference();
        let z0 = Complex64::from_polar(0.2, 1.1);
        let mut y = [z0.re, z0.im];
        let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            let zd = model.vector_field(Complex64::new(y[0], y[1]));
            dy[0] = zd.re;
            dy[1] = zd.im;
        };
        ode::rkf45_integrate(&mut rhs, 0.0, 12.0, ode::AdaptiveOpts::default(), &mut y).unwrap();
        let expected = 0.2 * (model.a_real * 12.0).exp();
        assert_relative_eq!(
            Complex64::new(y[0], y[1]).norm(),
            expected,
            max_relative = 1e-9
        );
    }

    #[test]
    fn backbone_leading_order_and_kappa_scaling() {
        let p = reference();
        let (table, model) = build_reference();
        let points = backbone(&model, &table, &[0.0, 1e-3], AmpNorm::State);
        assert_eq!(points[0].omega_inst, model.b_imag);
        assert_eq!(points[0].amplitude, 0.0);
        let ratio = points[1].amplitude / (2.0 * 1e-3);
        assert!(
            (ratio - 1.0).abs() < 1e-2,
            "Amp(r)/2r = {ratio} at r = 1e-3"
        );

        // Displacement-only convention gives √2·r at leading order instead.
        let disp = backbone(&model, &table, &[1e-3], AmpNorm::Displacement);
        assert_relative_eq!(
            disp[0].amplitude / 1e-3,
            std::f64::consts::SQRT_2,
            max_relative = 1e-4
        );

        // Ω(r) − B is linear in κ.
        let r = 0.2;
        let mut bends = Vec::new();
        for kappa in [0.8, 1.0, 1.2] {
            let (_, m) = build_ssm(&BeamParameters { kappa, ..p }).unwrap();
            bends.push(m.omega_inst(r) - m.b_imag);
        }
        assert_relative_eq!(bends[0] / bends[1], 0.8, epsilon = 1e-12);
        assert_relative_eq!(bends[2] / bends[1], 1.2, epsilon = 1e-12);
        assert!(bends[1] > 0.0, "κ/B > 0 must harden the response");
    }

    #[test]
    fn kappa_zero_reduces_to_the_eigenplane() {
        let p = BeamParameters {
            kappa: 0.0,
            ..reference()
        };
        let (table, model) = build_ssm(&p).unwrap();
        assert_eq!(model.r0, Complex64::ZERO);
        for (idx, modes) in &table.entries {
            if idx.0 + idx.1 == 3 {
                for k in modes.values() {
                    assert_eq!(k[0], Complex64::ZERO);
                    assert_eq!(k[1], Complex64::ZERO);
                }
            }
        }
        let z = Complex64::new(0.1, 0.0);
        let (a, b) = evaluate_parametrization(&table, z).unwrap();
        assert_relative_eq!(a[0], 0.2, epsilon = 1e-15);
        assert_relative_eq!(b[0], 0.2 * model.a_real, epsilon = 1e-15);
    }

    #[test]
    fn reduced_vector_field_values() {
        let (_, model) = build_reference();
        assert_eq!(model.vector_field(Complex64::ZERO), Complex64::ZERO);
        let z = Complex64::from(0.1);
        let expect = model.lambda1 * 0.1 + model.r0 * 0.001;
        assert_relative_eq!((model.vector_field(z) - expect).norm(), 0.0, epsilon = 1e-16);
        // Radial rate is independent of R₀.
        for &(re, im) in &[(0.3, -0.2), (0.01, 0.07)] {
            let z = Complex64::new(re, im);
            let radial = (model.vector_field(z) * z.conj()).re / z.norm();
            assert_relative_eq!(radial, model.radial_rate(z.norm()), max_relative = 1e-12);
        }
    }
}
