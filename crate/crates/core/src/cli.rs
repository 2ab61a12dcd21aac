//! Configuration loading and the command implementations behind the
//! `ssm-beam` binary.
//!
//! Every command reads one TOML file and writes its artifacts into the
//! output directory. All floating-point output, CSV and stdout alike, is
//! printed with `{:.16e}` so runs are reproducible byte for byte.

use num_complex::Complex64;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::galerkin::{self, ForcingSpec, GalerkinConfig, GalerkinState, Integrator};
use crate::model::{self, BeamParameters};
use crate::ssm::{self, AmpNorm};
use crate::{forced, Error, Result};

/// One run configuration. `[params]` is required; every other section has
/// usable defaults and only matters to the commands that read it.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    #[serde(default)]
    pub forcing: ForcingSection,
    #[serde(default)]
    pub galerkin: GalerkinSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub backbone: BackboneSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub validate: ValidateSection,
    #[serde(default)]
    pub poincare: PoincareSection,
    #[serde(default)]
    pub forced: ForcedSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub mu: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub omega: f64,
}

/// Spatial forcing shape as sine-mode amplitudes, keyed by mode number.
/// Defaults to the single shape sin(x).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSection {
    pub modes: BTreeMap<String, f64>,
}

impl Default for ForcingSection {
    fn default() -> Self {
        Self {
            modes: BTreeMap::from([("1".to_string(), 1.0)]),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GalerkinSection {
    pub n_modes: usize,
    pub dt: f64,
    pub integrator: IntegratorChoice,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for GalerkinSection {
    fn default() -> Self {
        let g = GalerkinConfig::default();
        Self {
            n_modes: g.n_modes,
            dt: g.dt,
            integrator: IntegratorChoice::Rk4,
            abs_tol: g.abs_tol,
            rel_tol: g.rel_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorChoice {
    Rk4,
    Adaptive,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    /// Scan depth, shared by `spectrum` and the assumption audit of `check`.
    pub n_max: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { n_max: 32 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackboneSection {
    pub r_min: f64,
    pub r_max: f64,
    pub samples: usize,
    pub amp_norm: AmpNorm,
}

impl Default for BackboneSection {
    fn default() -> Self {
        Self {
            r_min: 0.0,
            r_max: 0.3,
            samples: 61,
            amp_norm: AmpNorm::State,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    /// Initial displacement coefficients, zero-padded to `n_modes`.
    pub a0: Vec<f64>,
    /// Initial velocity coefficients, zero-padded to `n_modes`.
    pub b0: Vec<f64>,
    pub t_final: f64,
    pub samples: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            a0: vec![0.1],
            b0: Vec::new(),
            t_final: 50.0,
            samples: 501,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSection {
    /// Reduced coordinate of the on-manifold initial condition, z₀ = r₀e^{iθ₀}.
    pub r0: f64,
    pub theta0: f64,
    pub t_final: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self {
            r0: 0.05,
            theta0: 0.0,
            t_final: 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoincareSection {
    /// Forcing phase at which the period map is based.
    pub theta0: f64,
}

impl Default for PoincareSection {
    fn default() -> Self {
        Self { theta0: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForcedSection {
    /// Start of the stroboscopic iteration, as [re, im].
    pub z0: [f64; 2],
    pub theta0: f64,
    /// Number of stroboscopic map applications recorded.
    pub iterates: usize,
}

impl Default for ForcedSection {
    fn default() -> Self {
        Self {
            z0: [0.0, 0.0],
            theta0: 0.0,
            iterates: 32,
        }
    }
}

impl RunConfig {
    pub fn beam(&self) -> BeamParameters {
        let p = &self.params;
        BeamParameters {
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            delta: p.delta,
            mu: p.mu,
            kappa: p.kappa,
            epsilon: p.epsilon,
            omega: p.omega,
        }
    }

    pub fn forcing_spec(&self) -> Result<ForcingSpec> {
        let mut spec = ForcingSpec::none();
        for (key, &amp) in &self.forcing.modes {
            let n: usize = key.parse().map_err(|_| {
                Error::Invalid(format!("forcing mode key {key:?} is not a mode number"))
            })?;
            if n == 0 {
                return Err(Error::Invalid("forcing mode numbers start at 1".into()));
            }
            spec.modal_amplitudes.insert(n, amp);
        }
        Ok(spec)
    }

    pub fn galerkin_config(&self) -> GalerkinConfig {
        let g = &self.galerkin;
        GalerkinConfig {
            n_modes: g.n_modes,
            dt: g.dt,
            integrator: match g.integrator {
                IntegratorChoice::Rk4 => Integrator::Rk4,
                IntegratorChoice::Adaptive => Integrator::Adaptive,
            },
            abs_tol: g.abs_tol,
            rel_tol: g.rel_tol,
        }
    }
}

/// Reads and validates a TOML run configuration.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    let cfg: RunConfig = toml::from_str(&text)
        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    cfg.beam().validate()?;
    cfg.forcing_spec()?;
    Ok(cfg)
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_complex(z: Complex64) -> String {
    format!("{} {}", fmt(z.re), fmt(z.im))
}

fn write_artifact(out: &Path, name: &str, content: &str) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join(name), content)?;
    Ok(())
}

fn sample_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(hi > lo) {
        return Err(Error::Invalid(format!(
            "need an increasing grid with at least 2 samples, got [{lo}, {hi}] with {count}"
        )));
    }
    Ok((0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect())
}

/// `spectrum`: eigenvalue pairs for modes 1..=n_max plus the accumulation
/// rate of the real parts.
pub fn cmd_spectrum(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = cfg.beam();
    let n_max = cfg.spectrum.n_max;
    if n_max == 0 {
        return Err(Error::Invalid("spectrum.n_max must be at least 1".into()));
    }
    let mut csv = String::from("n,re_plus,im_plus,re_minus,im_minus\n");
    for pair in model::spectrum(&p, n_max) {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            pair.n,
            fmt(pair.plus.re),
            fmt(pair.plus.im),
            fmt(pair.minus.re),
            fmt(pair.minus.im)
        );
    }
    write_artifact(out, "spectrum.csv", &csv)?;
    println!("modes: {n_max}");
    println!("real part limit: {}", fmt(model::real_part_limit(&p)));
    Ok(())
}

/// `check`: audits the standing assumptions. Returns whether all hold; the
/// caller turns a failed audit into exit code 1.
pub fn cmd_check(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let p = cfg.beam();
    let report = model::check_assumptions(&p, cfg.spectrum.n_max, model::DEFAULT_TOL);
    let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
    let mut text = String::new();
    let _ = writeln!(text, "beta_subcritical (beta^2 < 4 alpha): {}", verdict(report.beta_subcritical));
    let _ = writeln!(text, "mixed_subcritical (2 beta delta < 4 gamma mu): {}", verdict(report.mixed_subcritical));
    let _ = writeln!(text, "delta_subcritical (delta^2 < 4 gamma): {}", verdict(report.delta_subcritical));
    let _ = writeln!(text, "slow_manifold_regime (delta mu < beta): {}", verdict(report.slow_manifold_regime));
    let _ = writeln!(text, "monotone_real_parts: {}", verdict(report.monotone_real_parts));
    let _ = writeln!(text, "inner_nonresonant: {}", verdict(report.inner_nonresonant));
    let _ = writeln!(text, "forcing_nonresonant: {}", verdict(report.forcing_nonresonant));
    let _ = writeln!(
        text,
        "underdamped modes: 1..={} of {} scanned",
        report.underdamped_up_to, cfg.spectrum.n_max
    );
    match report.spectral_quotient {
        Some(q) => {
            let _ = writeln!(text, "spectral quotient: {q}");
        }
        None => {
            let _ = writeln!(text, "spectral quotient: undefined");
        }
    }
    let _ = writeln!(text, "verdict: {}", if report.all_hold() { "pass" } else { "FAIL" });
    print!("{text}");
    write_artifact(out, "check.txt", &text)?;
    if !report.slow_manifold_regime {
        eprintln!(
            "note: fast-manifold regime (delta*mu >= beta); mode-1 reduction does not apply"
        );
    }
    Ok(report.all_hold())
}

/// `ssm`: builds the cubic manifold table and reduced model. The table goes
/// to ssm.json keyed "n1,n2" → sine mode → eigen pair as [re, im] arrays;
/// the reduced model is printed.
pub fn cmd_ssm(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = cfg.beam();
    let (table, model) = ssm::build_ssm(&p)?;
    let mut json: BTreeMap<String, BTreeMap<String, [[f64; 2]; 2]>> = BTreeMap::new();
    for (&(n1, n2), modes) in &table.entries {
        let mut per_mode = BTreeMap::new();
        for (&mode, k) in modes {
            per_mode.insert(
                mode.to_string(),
                [[k[0].re, k[0].im], [k[1].re, k[1].im]],
            );
        }
        json.insert(format!("{n1},{n2}"), per_mode);
    }
    let body = serde_json::to_string_pretty(&json)
        .map_err(|e| Error::Numerical(format!("serializing table: {e}")))?;
    write_artifact(out, "ssm.json", &body)?;
    println!("lambda1: {}", fmt_complex(model.lambda1));
    println!("R0: {}", fmt_complex(model.r0));
    println!("decay rate A: {}", fmt(model.a_real));
    println!("frequency B: {}", fmt(model.b_imag));
    Ok(())
}

/// `backbone`: instantaneous frequency and physical amplitude over a grid
/// of reduced amplitudes.
pub fn cmd_backbone(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = cfg.beam();
    let b = &cfg.backbone;
    let (table, model) = ssm::build_ssm(&p)?;
    let grid = if b.r_min == b.r_max {
        vec![b.r_min]
    } else {
        sample_grid(b.r_min, b.r_max, b.samples)?
    };
    let mut csv = String::from("r,omega_inst,amplitude\n");
    for pt in ssm::backbone(&model, &table, &grid, b.amp_norm) {
        let _ = writeln!(csv, "{},{},{}", fmt(pt.r), fmt(pt.omega_inst), fmt(pt.amplitude));
    }
    write_artifact(out, "backbone.csv", &csv)?;
    println!("amplitude norm: {}", b.amp_norm.name());
    println!("points: {}", grid.len());
    Ok(())
}

fn initial_state(section: &SimulateSection, n_modes: usize) -> Result<GalerkinState> {
    if section.a0.len() > n_modes || section.b0.len() > n_modes {
        return Err(Error::Invalid(format!(
            "initial data has more coefficients than the {n_modes} configured modes"
        )));
    }
    let mut state = GalerkinState::zeros(n_modes);
    state.a[..section.a0.len()].copy_from_slice(&section.a0);
    state.b[..section.b0.len()].copy_from_slice(&section.b0);
    Ok(state)
}

/// `simulate`: integrates the Galerkin system and tracks the energy split.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = cfg.beam();
    let forcing = cfg.forcing_spec()?;
    let gc = cfg.galerkin_config();
    let state0 = initial_state(&cfg.simulate, gc.n_modes)?;
    let times = sample_grid(0.0, cfg.simulate.t_final, cfg.simulate.samples)?;
    let trajectory = galerkin::integrate(&p, &forcing, &gc, &state0, &times)?;

    let n = gc.n_modes;
    let mut header = String::from("t");
    for m in 1..=n {
        let _ = write!(header, ",a{m}");
    }
    for m in 1..=n {
        let _ = write!(header, ",b{m}");
    }
    let mut csv = header + "\n";
    let mut energy_csv = String::from("t,total,kinetic,bending,foundation,rotary,quartic\n");
    for state in &trajectory {
        let _ = write!(csv, "{}", fmt(state.t));
        for x in state.a.iter().chain(&state.b) {
            let _ = write!(csv, ",{}", fmt(*x));
        }
        csv.push('\n');
        let e = galerkin::energy(&p, state);
        let _ = writeln!(
            energy_csv,
            "{},{},{},{},{},{},{}",
            fmt(state.t),
            fmt(e.total),
            fmt(e.kinetic),
            fmt(e.bending),
            fmt(e.foundation),
            fmt(e.rotary),
            fmt(e.potential_f)
        );
    }
    write_artifact(out, "simulate.csv", &csv)?;
    write_artifact(out, "energy.csv", &energy_csv)?;
    let last = trajectory.last().expect("grid is nonempty");
    println!("final time: {}", fmt(last.t));
    println!("final energy: {}", fmt(galerkin::energy(&p, last).total));
    Ok(())
}

/// `validate`: seeds the Galerkin system on the manifold and reports how
/// well the reduced model predicts decay, frequency, and distance.
pub fn cmd_validate(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = cfg.beam();
    let v = &cfg.validate;
    let gc = cfg.galerkin_config();
    let (table, model) = ssm::build_ssm(&p)?;
    let z0 = Complex64::from_polar(v.r0, v.theta0);
    let report = galerkin::validate_ssm(&p, &table, &model, &gc, z0, v.t_final)?;

    let mut csv = String::from("t,r,distance,phase_rate,predicted_rate\n");
    for i in 1..report.times.len() - 1 {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt(report.times[i]),
            fmt(report.radii[i]),
            fmt(report.distances[i]),
            fmt(report.phase_rates[i - 1]),
            fmt(report.predicted_rates[i - 1])
        );
    }
    write_artifact(out, "validate.csv", &csv)?;

    let mut text = String::new();
    let _ = writeln!(text, "decay slope: {}", fmt(report.decay_slope));
    let _ = writeln!(text, "decay expected: {}", fmt(report.decay_expected));
    let _ = writeln!(text, "decay relative error: {}", fmt(report.decay_rel_err));
    let _ = writeln!(
        text,
        "phase window: [{}, {}]",
        fmt(report.phase_window.0),
        fmt(report.phase_window.1)
    );
    let _ = writeln!(
        text,
        "phase rate max relative error: {}",
        fmt(report.phase_max_rel_err)
    );
    print!("{text}");
    write_artifact(out, "validate.txt", &text)?;
    Ok(())
}

/// `poincare`: periodic orbit of the forced Galerkin system as a period-map
/// fixed point, next to the linear periodic response it should stay ε³-close
/// to for weak forcing.
pub fn cmd_poincare(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = cfg.beam();
    let forcing = cfg.forcing_spec()?;
    let gc = cfg.galerkin_config();
    let result = galerkin::poincare_fixed_point(&p, &forcing, &gc, cfg.poincare.theta0)?;

    let mut csv = String::from("n,a,b\n");
    for m in 0..result.state.n_modes() {
        let _ = writeln!(csv, "{},{},{}", m + 1, fmt(result.state.a[m]), fmt(result.state.b[m]));
    }
    write_artifact(out, "poincare.csv", &csv)?;

    let orbit = forced::linear_periodic_response(&p, &forcing, p.epsilon)?;
    let mut lin = String::from("n,m,re,im\n");
    for (&(n, m), coef) in &orbit.coefficients {
        let _ = writeln!(lin, "{n},{m},{},{}", fmt(coef.re), fmt(coef.im));
    }
    write_artifact(out, "linear_response.csv", &lin)?;

    let lin_state = orbit.state_at(cfg.poincare.theta0 / p.omega, result.state.n_modes());
    let dist: f64 = result
        .state
        .a
        .iter()
        .zip(&lin_state.a)
        .chain(result.state.b.iter().zip(&lin_state.b))
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    println!("newton iterations: {}", result.iterations);
    println!("map residual: {}", fmt(result.residual));
    println!("distance from linear response: {}", fmt(dist));
    Ok(())
}

/// `forced`: stroboscopic iterates of the forced reduced dynamics and the
/// fixed point they contract to.
pub fn cmd_forced(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = cfg.beam();
    let forcing = cfg.forcing_spec()?;
    let f = &cfg.forced;
    let (table, model) = ssm::build_ssm(&p)?;
    let (fmodel, _) = forced::first_order_coefficients(&p, &forcing, &table, &model)?;

    let mut csv = String::from("k,re_z,im_z\n");
    let mut z = Complex64::new(f.z0[0], f.z0[1]);
    let _ = writeln!(csv, "0,{},{}", fmt(z.re), fmt(z.im));
    for k in 1..=f.iterates {
        z = forced::stroboscopic_map(&fmodel, z, f.theta0)?;
        let _ = writeln!(csv, "{k},{},{}", fmt(z.re), fmt(z.im));
    }
    write_artifact(out, "forced.csv", &csv)?;

    let (z_star, iterations) = forced::stroboscopic_fixed_point(&fmodel, f.theta0)?;
    println!("fixed point: {}", fmt_complex(z_star));
    println!("newton iterations: {iterations}");
    println!(
        "distance from linearized orbit: {}",
        fmt((z_star - forced::linear_reduced_orbit(&fmodel, f.theta0)).norm())
    );
    Ok(())
}
