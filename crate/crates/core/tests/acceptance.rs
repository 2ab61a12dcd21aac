//! Twelve end-to-end checks spanning the whole pipeline, from the modal
//! spectrum through the manifold construction to the forced periodic orbit.
//! Each prints one pass/fail line; the test fails if any criterion does.

use num_complex::Complex64;
use ssm_beam::galerkin::{self, ForcingSpec, GalerkinConfig, GalerkinState, Integrator};
use ssm_beam::model::{self, BeamParameters};
use ssm_beam::ode::{self, AdaptiveOpts};
use ssm_beam::ssm::{self, AmpNorm};
use ssm_beam::forced;

fn reference() -> BeamParameters {
    BeamParameters {
        alpha: 1.0,
        beta: 0.6,
        gamma: 1.0,
        delta: 0.5,
        mu: 1.0,
        kappa: 1.0,
        epsilon: 1e-3,
        omega: 1.3,
    }
}

type Verdict = Result<String, String>;

fn err_str(e: ssm_beam::Error) -> String {
    e.to_string()
}

/// Slow-pair eigenvalues at the reference parameters.
fn c01_spectrum_reproduction() -> Verdict {
    let pair = model::eigenvalues(&reference(), 1);
    let expected = Complex64::new(-0.275, 0.9614);
    let d = (pair.plus - expected).norm();
    let d_conj = (pair.minus - expected.conj()).norm();
    if d <= 1e-3 && d_conj <= 1e-3 {
        Ok(format!(
            "λ₁ = {:.6} {:+.6}i, off by {d:.2e}",
            pair.plus.re, pair.plus.im
        ))
    } else {
        Err(format!("λ₁ = {}, expected within 1e-3 of {expected}", pair.plus))
    }
}

/// High modes approach the decay-rate ceiling −β/(2μ).
fn c02_real_part_limit() -> Verdict {
    let p = BeamParameters {
        alpha: 1.0,
        beta: 0.08,
        gamma: 1.0,
        delta: 0.04,
        mu: 0.5,
        kappa: 0.0,
        epsilon: 0.0,
        omega: 1.0,
    };
    let re = model::eigenvalues(&p, 1000).plus.re;
    let d = (re - (-0.08)).abs();
    if d <= 1e-3 {
        Ok(format!("Re λ₁₀₀₀ = {re:.9}, off the −0.08 limit by {d:.2e}"))
    } else {
        Err(format!("Re λ₁₀₀₀ = {re}, more than 1e-3 from −0.08"))
    }
}

/// The damping preset that makes the spectral quotient exactly 4.
fn c03_spectral_quotient() -> Verdict {
    let (delta, mu) = (0.05, 0.2);
    let beta = BeamParameters::beta_preset_q4(delta, mu)
        .ok_or_else(|| "preset undefined for these (δ, μ)".to_string())?;
    let p = BeamParameters {
        alpha: 1.0,
        beta,
        gamma: 1.0,
        delta,
        mu,
        kappa: 1.0,
        epsilon: 0.0,
        omega: 1.0,
    };
    let q = model::spectral_quotient(&p, 1).map_err(err_str)?;
    if q == 4 {
        Ok(format!("β = {beta} gives q = 4"))
    } else {
        Err(format!("β = {beta} gave q = {q}, expected exactly 4"))
    }
}

/// sin³x = (3 sin x − sin 3x)/4, pushed through the cubic projection.
fn c04_cubic_identity() -> Verdict {
    let mut e1 = vec![0.0; 8];
    e1[0] = 1.0;
    let f = galerkin::cubic_projection(&e1, 1.0);
    let expected: Vec<f64> = (0..8)
        .map(|m| match m {
            0 => -0.75,
            2 => 0.25,
            _ => 0.0,
        })
        .collect();
    if f == expected {
        Ok("cubic_projection(e₁) = (−3/4)e₁ + (1/4)e₃ bit-exactly".to_string())
    } else {
        Err(format!("got {f:?}"))
    }
}

/// The order-3 manifold leaves a residual of order ≥ 4 (here 5, by oddness).
fn c05_invariance_residual_order() -> Verdict {
    let p = reference();
    let (table, model) = ssm::build_ssm(&p).map_err(err_str)?;
    let mut logs_r = Vec::new();
    let mut logs_res = Vec::new();
    for k in 0..9 {
        let r = 10f64.powf(-4.0 + 2.0 * k as f64 / 8.0);
        let z = Complex64::from_polar(r, 0.7);
        let res = ssm::invariance_residual(&p, &table, &model, z, 16).map_err(err_str)?;
        logs_r.push(r.ln());
        logs_res.push(res.ln());
    }
    let (slope, _) = ode::fit_line(&logs_r, &logs_res);
    if slope >= 3.9 {
        Ok(format!("residual slope {slope:.3} over |z| ∈ [1e-4, 1e-2]"))
    } else {
        Err(format!("residual slope {slope:.3} < 3.9"))
    }
}

/// Closed-form reduced flow against a high-accuracy ODE solve.
fn c06_closed_form_flow() -> Verdict {
    let (_, model) = ssm::build_ssm(&reference()).map_err(err_str)?;
    let z0 = Complex64::from_polar(0.3, 0.4);
    let mut y = [z0.re, z0.im];
    let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let zd = model.vector_field(Complex64::new(y[0], y[1]));
        dy[0] = zd.re;
        dy[1] = zd.im;
    };
    let opts = AdaptiveOpts {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        ..AdaptiveOpts::default()
    };
    let mut worst = 0.0f64;
    let mut t = 0.0;
    for k in 1..=100 {
        let t_next = 0.5 * k as f64;
        ode::rkf45_integrate(&mut rhs, t, t_next, opts, &mut y).map_err(err_str)?;
        t = t_next;
        let (r, theta) = ssm::reduced_flow_closed_form(&model, 0.3, 0.4, t).map_err(err_str)?;
        let closed = Complex64::from_polar(r, theta);
        worst = worst.max((closed - Complex64::new(y[0], y[1])).norm());
    }
    if worst < 1e-8 {
        Ok(format!("max |closed − integrated| = {worst:.2e} over t ∈ [0, 50]"))
    } else {
        Err(format!("max deviation {worst:.2e} ≥ 1e-8"))
    }
}

/// Backbone amplitude is 2r to leading order under the state norm.
fn c07_backbone_leading_order() -> Verdict {
    let (table, model) = ssm::build_ssm(&reference()).map_err(err_str)?;
    let r = 1e-3;
    let pts = ssm::backbone(&model, &table, &[r], AmpNorm::State);
    let ratio = pts[0].amplitude / (2.0 * r);
    let d = (ratio - 1.0).abs();
    if d < 0.01 {
        Ok(format!(
            "Amp(r)/(2r) = {ratio:.6} under the {} norm (displacement and velocity)",
            AmpNorm::State.name()
        ))
    } else {
        Err(format!("Amp(r)/(2r) = {ratio}, off 1 by {d:.2e} ≥ 1%"))
    }
}

/// Fixed-step RK4 against the exact modal flow of the linear beam.
fn c08_galerkin_linear_oracle() -> Verdict {
    let p = BeamParameters {
        kappa: 0.0,
        epsilon: 0.0,
        ..reference()
    };
    let n = 16;
    let mut state0 = GalerkinState::zeros(n);
    for m in 0..n {
        state0.a[m] = 0.1 / ((m + 1) * (m + 1)) as f64;
        state0.b[m] = 0.05 * f64::from(m % 2 == 0) / (m + 1) as f64;
    }
    let exact = galerkin::linear_flow_exact(&p, &state0, 1.0).map_err(err_str)?;
    let run = |dt: f64| -> Result<f64, String> {
        let config = GalerkinConfig {
            n_modes: n,
            dt,
            integrator: Integrator::Rk4,
            ..GalerkinConfig::default()
        };
        let end = galerkin::integrate_to(&p, &ForcingSpec::none(), &config, &state0, 1.0)
            .map_err(err_str)?;
        Ok(exact
            .a
            .iter()
            .zip(&end.a)
            .chain(exact.b.iter().zip(&end.b))
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt())
    };
    let err_fine = run(1e-4)?;
    // Convergence order is measured at steps where truncation still
    // dominates rounding; at dt = 1e-4 the error is already pure noise,
    // orders of magnitude under the bound.
    let ratio = run(1.6e-3)? / run(8e-4)?;
    if err_fine < 1e-10 && ratio >= 12.0 {
        Ok(format!(
            "error {err_fine:.2e} at dt = 1e-4; halving dt gains {ratio:.1}×"
        ))
    } else {
        Err(format!(
            "error at dt = 1e-4 is {err_fine:.2e} (need < 1e-10), halving gain {ratio:.1}× (need ≥ 12)"
        ))
    }
}

/// Energy decreases along the unforced nonlinear flow, every sample.
fn c09_energy_dissipation() -> Verdict {
    let p = BeamParameters {
        epsilon: 0.0,
        ..reference()
    };
    let n = 16;
    let mut state0 = GalerkinState::zeros(n);
    state0.a[0] = 0.1;
    debug_assert!((state0.norm() - 0.1).abs() < 1e-15);
    let times: Vec<f64> = (0..=500).map(|k| 0.1 * k as f64).collect();
    let config = GalerkinConfig {
        n_modes: n,
        ..GalerkinConfig::default()
    };
    let trajectory =
        galerkin::integrate(&p, &ForcingSpec::none(), &config, &state0, &times).map_err(err_str)?;
    let energies: Vec<f64> = trajectory
        .iter()
        .map(|s| galerkin::energy(&p, s).total)
        .collect();
    let mut worst_rise = f64::MIN;
    for w in energies.windows(2) {
        worst_rise = worst_rise.max(w[1] - w[0]);
    }
    if worst_rise <= 1e-10 {
        Ok(format!(
            "energy fell from {:.6e} to {:.6e}; worst step-to-step rise {worst_rise:.2e}",
            energies[0],
            energies.last().unwrap()
        ))
    } else {
        Err(format!("energy rose by {worst_rise:.2e} at some sample (slack 1e-10)"))
    }
}

/// The reduced model predicts the full model's decay and phase rates.
fn c10_full_model_validation() -> Verdict {
    let p = reference();
    let (table, model) = ssm::build_ssm(&p).map_err(err_str)?;
    let config = GalerkinConfig {
        n_modes: 16,
        ..GalerkinConfig::default()
    };
    let z0 = Complex64::from_polar(0.05, 0.0);
    let report =
        galerkin::validate_ssm(&p, &table, &model, &config, z0, 6.5).map_err(err_str)?;
    let decay_ok = report.decay_rel_err <= 0.02;
    let phase_ok = report.phase_max_rel_err <= 0.02;
    if decay_ok && phase_ok {
        Ok(format!(
            "decay slope {:.6} vs Re λ₁ = {:.6} ({:.3}%), phase rate off Ω(r) by ≤ {:.3}% on r ∈ [{:.2}, {:.2}]",
            report.decay_slope,
            report.decay_expected,
            100.0 * report.decay_rel_err,
            100.0 * report.phase_max_rel_err,
            report.phase_window.0,
            report.phase_window.1
        ))
    } else {
        Err(format!(
            "decay error {:.3}% (≤ 2% needed), phase error {:.3}% (≤ 2% needed)",
            100.0 * report.decay_rel_err,
            100.0 * report.phase_max_rel_err
        ))
    }
}

/// The first-order forced manifold leaves an ε² defect.
fn c11_forced_first_order() -> Verdict {
    let p = reference();
    let (table, model) = ssm::build_ssm(&p).map_err(err_str)?;
    let (fmodel, first) =
        forced::first_order_coefficients(&p, &ForcingSpec::mode_one(), &table, &model)
            .map_err(err_str)?;
    let z = Complex64::from_polar(0.01, 0.6);
    let mut logs_e = Vec::new();
    let mut logs_r = Vec::new();
    for k in 0..7 {
        let eps = 10f64.powf(-4.0 + 2.0 * k as f64 / 6.0);
        let fm = forced::ForcedReducedModel { epsilon: eps, ..fmodel };
        let res = forced::eps_residual(&p, &table, &first, &fm, z, 1.1, 8).map_err(err_str)?;
        logs_e.push(eps.ln());
        logs_r.push(res.ln());
    }
    let (slope, _) = ode::fit_line(&logs_e, &logs_r);
    if slope >= 1.9 {
        Ok(format!("ε-residual slope {slope:.3} over ε ∈ [1e-4, 1e-2] at |z| = 0.01"))
    } else {
        Err(format!("ε-residual slope {slope:.3} < 1.9"))
    }
}

/// Periodic orbit of the full forced system: fast Newton, ε³-close to the
/// linear periodic response.
fn c12_poincare_fixed_point() -> Verdict {
    let config = GalerkinConfig {
        n_modes: 16,
        dt: 5e-4,
        ..GalerkinConfig::default()
    };
    let forcing = ForcingSpec::mode_one();
    let mut distances = Vec::new();
    let mut iterations = Vec::new();
    for eps in [1e-3, 5e-4] {
        let p = BeamParameters {
            epsilon: eps,
            ..reference()
        };
        let result = galerkin::poincare_fixed_point(&p, &forcing, &config, 0.0).map_err(err_str)?;
        iterations.push(result.iterations);
        let orbit = forced::linear_periodic_response(&p, &forcing, eps).map_err(err_str)?;
        let lin = orbit.state_at(0.0, config.n_modes);
        let d: f64 = result
            .state
            .a
            .iter()
            .zip(&lin.a)
            .chain(result.state.b.iter().zip(&lin.b))
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        distances.push(d);
    }
    let slope = (distances[0] / distances[1]).log2();
    let iter_ok = iterations.iter().all(|&i| i <= 10);
    if iter_ok && slope >= 2.5 {
        Ok(format!(
            "Newton took {:?} iterations; distance {:.2e} → {:.2e} under ε halving (slope {slope:.2})",
            iterations, distances[0], distances[1]
        ))
    } else {
        Err(format!(
            "iterations {iterations:?} (≤ 10 each needed), distance slope {slope:.2} (≥ 2.5 needed)"
        ))
    }
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Verdict)> = vec![
        ("spectrum reproduction", c01_spectrum_reproduction),
        ("real-part limit", c02_real_part_limit),
        ("spectral quotient", c03_spectral_quotient),
        ("cubic identity", c04_cubic_identity),
        ("invariance-residual order", c05_invariance_residual_order),
        ("closed-form reduced flow", c06_closed_form_flow),
        ("backbone leading order", c07_backbone_leading_order),
        ("Galerkin linear oracle", c08_galerkin_linear_oracle),
        ("energy dissipation", c09_energy_dissipation),
        ("full-model validation", c10_full_model_validation),
        ("forced first order", c11_forced_first_order),
        ("Poincaré fixed point", c12_poincare_fixed_point),
    ];
    let mut failures = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} pass  {name}: {detail}", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
                failures.push(format!("{} ({name}): {detail}", i + 1));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "{} of 12 criteria failed:\n  {}",
        failures.len(),
        failures.join("\n  ")
    );
}
