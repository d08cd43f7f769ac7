//! Subcommand bodies. Each is a pure function of its config and seed.

use std::fmt::Write as _;

use catsim_core::acoustics::{delocalization, mass_model, MassConvention};
use catsim_core::catfit::{
    fit_analytical, fit_css, sensitivity_interval, AnalyticalFit, CssFit, FitRef, JcTarget,
};
use catsim_core::dynamics::{
    characteristic_times, excited_population, fit_collapse_envelope, jc_evolve_exact,
    lindblad_evolve, revival_contrast, revival_time, SystemParams, Trajectory,
};
use catsim_core::hilbert::{fidelity, purity, truncate_phonon, HilbertSpace, JointState, C64};
use catsim_core::output::{csv_table, fmt_f64, json_f64};
use catsim_core::phase_space::{self, negativity};
use catsim_core::pipeline::{prepare_cat, simulate_decay, CatPreparation, PreparedCat};
use catsim_core::tomography::{
    calibrate_drive, calibrate_parity, extract_fock_populations, mle_reconstruct, sample_wigner,
    ParityNormalization,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{
    CalibrateConfig, DecayConfig, DriveData, FockData, MassConfig, Method, PhaseScanConfig,
    SimulateConfig, TomoConfig, WignerConfig,
};
use crate::{CliError, Output};

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result records serialize")
}

/// `Ok` value as JSON, or `null` when the quantity is not defined for this run.
fn optional<T: serde::Serialize>(r: catsim_core::Result<T>) -> Value {
    r.map(|v| to_value(&v)).unwrap_or(Value::Null)
}

fn time_axis(t_max: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(t_max > 0.0 && t_max.is_finite()) || n < 2 {
        return Err(CliError::Config("(invalid value): need t_max > 0 and n_times >= 2".into()));
    }
    Ok((0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect())
}

fn closed(p: &SystemParams) -> bool {
    p.kappa_phonon == 0.0 && p.gamma_qubit == 0.0 && p.gamma_phi == 0.0
}

fn trajectory(
    params: &SystemParams,
    times: &[f64],
    exact: bool,
    opts: &catsim_core::dynamics::LindbladOptions,
) -> Result<Trajectory, CliError> {
    if exact {
        let states = times
            .par_iter()
            .map(|&t| jc_evolve_exact(params, t))
            .collect::<catsim_core::Result<Vec<_>>>()?;
        Ok(Trajectory::from_states(times, states, false)?)
    } else {
        Ok(lindblad_evolve(&params.initial_state()?, params, true, times, opts)?)
    }
}

pub fn simulate(cfg: SimulateConfig, _seed: Option<u64>) -> Result<Output, CliError> {
    let p = cfg.params;
    p.validate()?;
    let times = time_axis(cfg.t_max, cfg.n_times)?;
    let exact = match cfg.method {
        Method::Auto => closed(&p),
        Method::Exact if !closed(&p) => {
            return Err(CliError::Config(
                "at `method`: the exact series has no dissipation; use lindblad".into(),
            ))
        }
        Method::Exact => true,
        Method::Lindblad => false,
    };
    let traj = trajectory(&p, &times, exact, &cfg.lindblad)?;
    let summary = json!({
        "method": if exact { "exact" } else { "lindblad" },
        "n_max": p.cutoff(),
        "times": optional(characteristic_times(&p)),
        "revival_time": optional(revival_time(&traj, &p)),
        "revival_contrast": optional(revival_contrast(&traj, &p)),
        "collapse_fit": optional(fit_collapse_envelope(&traj, &p, None)),
    });
    let mut out = Output::default();
    out.file("trajectory.csv", traj.to_csv());
    out.json("summary.json", &summary);
    out.summary = format!(
        "simulate: {} points to t = {} us, revival at {}\n",
        times.len(),
        cfg.t_max,
        summary["revival_time"]
    );
    Ok(out)
}

pub fn qubit_phase_scan(cfg: PhaseScanConfig, _seed: Option<u64>) -> Result<Output, CliError> {
    if cfg.n_phases == 0 {
        return Err(CliError::Config("at `n_phases`: must be positive".into()));
    }
    let times = time_axis(cfg.t_max, cfg.n_times)?;
    let (c, s) = ((cfg.polar / 2.0).cos(), (cfg.polar / 2.0).sin());
    let phases: Vec<f64> = (0..cfg.n_phases)
        .map(|k| std::f64::consts::TAU * k as f64 / cfg.n_phases as f64)
        .collect();
    let base = cfg.params;
    base.validate()?;
    let t_c = characteristic_times(&base)?.t_c;
    let exact = closed(&base);
    let runs = phases
        .par_iter()
        .map(|&phi| {
            let p = base.with_qubit(C64::new(c, 0.0), C64::from_polar(s, phi));
            let traj = trajectory(&p, &times, exact, &cfg.lindblad)?;
            let at_c = trajectory(&p, &[t_c], exact, &cfg.lindblad)?;
            Ok((traj, at_c))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut rows = Vec::new();
    let mut cat_rows = Vec::new();
    for (&phi, (traj, at_c)) in phases.iter().zip(&runs) {
        for i in 0..traj.len() {
            rows.push(vec![
                phi,
                traj.times[i],
                traj.p_e[i],
                traj.sx[i],
                traj.sy[i],
                traj.sz[i],
                traj.purity[i],
            ]);
        }
        // root fidelity of the reduced qubit to |-Y>
        let f = ((1.0 - at_c.sy[0]) / 2.0).max(0.0).sqrt();
        cat_rows.push(vec![phi, at_c.sx[0], at_c.sy[0], at_c.sz[0], f]);
    }
    let worst = cat_rows.iter().map(|r| r[4]).fold(f64::INFINITY, f64::min);
    let mut out = Output::default();
    out.file(
        "phase_scan.csv",
        csv_table(&["phi", "t", "P_e", "sx", "sy", "sz", "purity"], rows),
    );
    out.file(
        "cat_time.csv",
        csv_table(&["phi", "sx", "sy", "sz", "fidelity_minus_y"], cat_rows),
    );
    out.summary = format!(
        "qubit-phase-scan: {} phases, t_C = {}, lowest -Y fidelity {}\n",
        phases.len(),
        fmt_f64(t_c),
        fmt_f64(worst)
    );
    Ok(out)
}

fn fits(prep: &CatPreparation, t_c: f64, rho: &JointState) -> Result<(CssFit, AnalyticalFit, JcTarget), CliError> {
    let target = JcTarget {
        g0: prep.params.g0,
        c_g: prep.params.c_g,
        c_e: prep.params.c_e,
        t_c,
    };
    Ok((fit_css(rho)?, fit_analytical(rho, &target)?, target))
}

fn prepared_json(cat: &PreparedCat) -> Value {
    json!({
        "t_c": json_f64(cat.t_c),
        "qubit_purity": json_f64(cat.qubit_purity),
        "phonon_purity": json_f64(purity(&cat.phonon)),
        "n_max": cat.phonon.space().n_max(),
    })
}

pub fn wigner(cfg: WignerConfig, _seed: Option<u64>) -> Result<Output, CliError> {
    let prep = cfg.state.preparation()?;
    let cat = prepare_cat(&prep)?;
    let w = phase_space::wigner(&cat.phonon, &cfg.grid)?;
    let (css, analytical, _) = fits(&prep, cat.t_c, &cat.phonon)?;
    let report = json!({
        "preparation": to_value(&prep),
        "state": prepared_json(&cat),
        "negativity": optional(negativity(&w)),
        "css_fit": to_value(&css),
        "analytical_fit": to_value(&analytical),
    });
    let mut out = Output::default();
    out.file("wigner.csv", w.to_csv());
    out.json("state.json", &report);
    out.summary = format!(
        "wigner: {} points, cat size D = {}, CSS fidelity {}\n",
        w.len(),
        fmt_f64(css.d),
        fmt_f64(css.fidelity)
    );
    Ok(out)
}

pub fn tomo(cfg: TomoConfig, seed: Option<u64>) -> Result<Output, CliError> {
    let prep = cfg.state.preparation()?;
    let cat = prepare_cat(&prep)?;
    let mut model = cfg.readout;
    model.seed = seed.unwrap_or(cfg.seed);
    let normalization = if cfg.calibration_points == 0 {
        ParityNormalization::identity()
    } else {
        calibrate_parity(&model, cfg.calibration_points)?
    };
    let betas = cfg.samples.points();
    let samples = sample_wigner(&cat.phonon, &betas, &model, &normalization)?;
    let space = HilbertSpace::phonon(cfg.reconstruction_cutoff)?;
    let mle = mle_reconstruct(&samples, space, &cfg.mle)?;
    let truth = truncate_phonon(&cat.phonon, cfg.reconstruction_cutoff)?;
    let f_truth = fidelity(&mle.state, &truth)?;
    let (css, analytical, target) = fits(&prep, cat.t_c, &mle.state)?;
    let css_interval = sensitivity_interval(&mle.state, FitRef::Css(&css), cfg.sensitivity_drop)?;
    let alpha_interval = sensitivity_interval(
        &mle.state,
        FitRef::Analytical(&analytical, &target),
        cfg.sensitivity_drop,
    )?;
    let report = json!({
        "preparation": to_value(&prep),
        "state": prepared_json(&cat),
        "normalization": to_value(&normalization),
        "fidelity_to_truth": json_f64(f_truth),
        "css_fit": to_value(&css),
        "css_d_interval": to_value(&css_interval),
        "analytical_fit": to_value(&analytical),
        "analytical_alpha_interval": to_value(&alpha_interval),
    });
    let mut out = Output::default();
    out.file("samples.csv", samples.to_csv());
    out.json("reconstruction.json", &mle.to_json());
    out.json("fits.json", &report);
    out.summary = format!(
        "tomo: {} points x {} shots, {} MLE iterations, fidelity to truth {}, D = {}\n",
        samples.len(),
        model.shots,
        mle.iterations,
        fmt_f64(f_truth),
        fmt_f64(css.d)
    );
    Ok(out)
}

pub fn decay(cfg: DecayConfig, _seed: Option<u64>) -> Result<Output, CliError> {
    if !(cfg.t1_phonon > 0.0) {
        return Err(CliError::Config("at `t1_phonon`: must be positive".into()));
    }
    let prep = cfg.state.preparation()?;
    let cat = prepare_cat(&prep)?;
    let css = fit_css(&cat.phonon)?;
    let sim = simulate_decay(&cat.phonon, 1.0 / cfg.t1_phonon, &cfg.waits, &cfg.crosscut)?;
    let report = json!({
        "preparation": to_value(&prep),
        "state": prepared_json(&cat),
        "css_d": json_f64(css.d),
        "fit": to_value(&sim.fit),
        "tau_large_alpha": json_f64(cfg.t1_phonon / (2.0 * css.d * css.d)),
    });
    let mut out = Output::default();
    out.file(
        "decay.csv",
        csv_table(&["tau", "negativity"], sim.taus.iter().zip(&sim.deltas).map(|(&t, &d)| vec![t, d])),
    );
    out.json("fit.json", &report);
    out.summary = format!(
        "decay: D = {}, tau_cat = {} us\n",
        fmt_f64(css.d),
        fmt_f64(sim.fit.tau_cat)
    );
    Ok(out)
}

pub fn mass(cfg: MassConfig, _seed: Option<u64>) -> Result<Output, CliError> {
    let mut csv = String::from("convention,S0,M0_ug,M_eff_ug,x_zpf_m,alpha,x_eff_m,separation_m\n");
    let mut models = Vec::new();
    for conv in [MassConvention::Max, MassConvention::Rms] {
        let m = mass_model(&cfg.mode, conv)?;
        let name = match conv {
            MassConvention::Max => "max",
            MassConvention::Rms => "rms",
        };
        for &a in &cfg.alphas {
            let d = delocalization(&m, a)?;
            let _ = writeln!(
                csv,
                "{name},{},{},{},{},{},{},{}",
                fmt_f64(m.s0),
                fmt_f64(m.m0_ug),
                fmt_f64(m.m_eff_ug),
                fmt_f64(m.x_zpf_m),
                fmt_f64(a),
                fmt_f64(d.x_eff_m),
                fmt_f64(d.separation_m)
            );
        }
        models.push(m);
    }
    let report = json!({
        "mode": to_value(&cfg.mode),
        "longitudinal_index": cfg.mode.longitudinal_index(),
        "rayleigh_length_um": json_f64(cfg.mode.rayleigh_length_um()),
        "half_wavelength_mass_ng": json_f64(cfg.mode.half_wavelength_mass_kg() * 1e12),
        "models": to_value(&models),
    });
    let mut out = Output::default();
    out.file("mass.csv", csv);
    out.json("mass.json", &report);
    out.summary = format!(
        "mass: M0 = {} ug, M_eff max = {} ug, rms = {} ug\n",
        fmt_f64(models[0].m0_ug),
        fmt_f64(models[0].m_eff_ug),
        fmt_f64(models[1].m_eff_ug)
    );
    Ok(out)
}

/// Stream salts so the three synthetic data sets draw independent noise.
const DRIVE_SALT: u64 = 0x6472_6976_65;
const FOCK_SALT: u64 = 0x666f_636b;

pub fn calibrate(cfg: CalibrateConfig, seed: Option<u64>) -> Result<Output, CliError> {
    let seed = seed.unwrap_or(cfg.seed);
    let samples: Vec<(f64, f64)> = match &cfg.drive {
        DriveData::Measured { samples } => samples.clone(),
        DriveData::Synthetic { b, c, amplitudes, noise } => {
            let normal = Normal::new(0.0, *noise)
                .map_err(|e| CliError::Config(format!("at `drive.noise`: {e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ DRIVE_SALT);
            amplitudes
                .iter()
                .map(|&a| (a, c * ((a / b).exp() - 1.0) * (1.0 + normal.sample(&mut rng))))
                .collect()
        }
    };
    let drive = calibrate_drive(&samples)?;

    let mut readout = cfg.parity;
    readout.seed = seed;
    let parity = calibrate_parity(&readout, cfg.parity_points)?;

    let (times, p_e) = match &cfg.fock {
        FockData::Measured { times, p_e } => (times.clone(), p_e.clone()),
        FockData::Synthetic { beta, t_max, n_times, shots } => {
            let times = time_axis(*t_max, *n_times)?;
            let p = SystemParams::new(cfg.g0, C64::new(*beta, 0.0))
                .with_qubit(C64::new(0.0, 0.0), C64::new(1.0, 0.0));
            let exact = excited_population(&p, &times)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ FOCK_SALT);
            let noisy = exact
                .iter()
                .map(|&q| {
                    let b = Binomial::new(*shots, q.clamp(0.0, 1.0))
                        .map_err(|e| CliError::Config(format!("at `fock.shots`: {e}")))?;
                    Ok(b.sample(&mut rng) as f64 / *shots as f64)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            (times, noisy)
        }
    };
    let fock = extract_fock_populations(&times, &p_e, cfg.g0, cfg.n_fit)?;

    let mut out = Output::default();
    out.file(
        "drive.csv",
        csv_table(
            &["amplitude", "beta_abs", "model"],
            samples.iter().map(|&(a, b)| vec![a, b, drive.beta_abs(a)]),
        ),
    );
    out.file(
        "fock_trace.csv",
        csv_table(&["t", "P_e"], times.iter().zip(&p_e).map(|(&t, &p)| vec![t, p])),
    );
    out.json(
        "calibration.json",
        &json!({
            "drive": to_value(&drive),
            "parity": to_value(&parity),
            "fock": to_value(&fock),
        }),
    );
    out.summary = format!(
        "calibrate: B = {}, C = {}, parity contrast {}, Poisson |beta| = {}\n",
        fmt_f64(drive.b),
        fmt_f64(drive.c),
        fmt_f64(parity.amplitude),
        fmt_f64(fock.beta_abs)
    );
    Ok(out)
}
