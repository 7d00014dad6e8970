use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context};
use num::rational::Ratio;

use cpt_core::analysis::{self, zeeman_linear_fit};
use cpt_core::atomic::{self, TransitionLabel};
use cpt_core::comb;
use cpt_core::dressed;
use cpt_core::scenario::Scenario;
use cpt_core::spectroscopy::{self, io as spec_io, Spectrum};

use crate::report::*;

pub struct AppError {
    pub error: anyhow::Error,
    pub exit_code: u8,
}

type CmdResult = Result<(), AppError>;

fn cfg_err(e: impl Into<anyhow::Error>) -> AppError {
    AppError { error: e.into(), exit_code: crate::EXIT_CONFIG }
}

fn num_err(e: impl Into<anyhow::Error>) -> AppError {
    AppError { error: e.into(), exit_code: crate::EXIT_NUMERICAL }
}

pub fn configure_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("warning: thread pool already initialised: {e}");
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        eprintln!("warning: built without the parallel feature; --threads ignored");
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, AppError> {
    Scenario::load(path)
        .with_context(|| format!("loading scenario {}", path.display()))
        .map_err(cfg_err)
}

pub fn run_scan(scenario_path: &Path, out: &Path, seed: Option<u64>) -> CmdResult {
    let scenario = load_scenario(scenario_path)?;
    let mut config = scenario.to_scan_config().map_err(cfg_err)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    std::fs::create_dir_all(out).map_err(cfg_err)?;
    eprintln!(
        "cpt {} scan: config digest {}",
        env!("CARGO_PKG_VERSION"),
        config.digest()
    );

    let spectrum = spectroscopy::scan(&config).map_err(num_err)?;

    let csv_path = out.join("spectrum.csv");
    let sidecar_path = out.join("spectrum.json");
    spec_io::write_csv(&spectrum, &csv_path).map_err(num_err)?;
    spec_io::write_sidecar(&spectrum, &sidecar_path).map_err(num_err)?;
    eprintln!(
        "wrote {} ({} points) and {}",
        csv_path.display(),
        spectrum.points.len(),
        sidecar_path.display()
    );

    if !spectrum.diagnostics.failed_points.is_empty() {
        let mut msg = String::from("steady-state failures:\n");
        for f in &spectrum.diagnostics.failed_points {
            writeln!(msg, "  point {} (detuning {} Hz): {}", f.index, f.detuning_hz, f.message)
                .unwrap();
        }
        return Err(num_err(anyhow!(msg)));
    }
    Ok(())
}

/// Predicted dark-line position per Zeeman component, in the swept-laser
/// coordinate of the given spectrum configuration.
fn predicted_positions(spectrum: &Spectrum) -> Option<Vec<(Ratio<i64>, f64)>> {
    let sys = &spectrum.config.system;
    if spectrum.config.sweep != TransitionLabel::R {
        return None;
    }
    let shift = dressed::quadrupole_light_shift(sys.lasers.c.rabi, sys.lasers.c.detuning)
        .unwrap_or(0.0);
    let base =
        dressed::dark_resonance_detuning(sys.lasers.b.detuning, sys.lasers.c.detuning, shift);
    Some(
        atomic::relative_couplings()
            .into_iter()
            .map(|l| (l.m_thz, base + atomic::zeeman_shift(l.m_thz, sys.b_field)))
            .collect(),
    )
}

pub fn run_fit(spectrum_path: &Path, out: &Path, min_depth_sigma: f64) -> CmdResult {
    let spectrum = spec_io::read_csv(spectrum_path)
        .with_context(|| format!("reading spectrum {}", spectrum_path.display()))
        .map_err(cfg_err)?;
    std::fs::create_dir_all(out).map_err(cfg_err)?;

    let predictions = predicted_positions(&spectrum);
    let step = spectrum.config.step;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (window, fit) in analysis::fit_all_lines(&spectrum, min_depth_sigma) {
        match fit {
            Ok(fit) => {
                let m_thz = predictions.as_ref().and_then(|preds| {
                    let tolerance = (5.0 * step).max(fit.fwhm);
                    preds
                        .iter()
                        .map(|(m, pos)| (*m, (pos - fit.center).abs()))
                        .filter(|(_, d)| *d < tolerance)
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .map(|(m, _)| atomic::format_m_thz(m))
                });
                records.push(FitRecord { m_thz, fit });
            }
            Err(e) => skipped.push(format!(
                "window [{}..{}]: {e}",
                window.start, window.end
            )),
        }
    }

    let report = FitReport {
        config_digest: spectrum.diagnostics.config_digest.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        sweep: format!("{:?}", spectrum.config.sweep),
        records,
        skipped_windows: skipped,
    };

    let json_path = out.join("fit_records.json");
    std::fs::write(&json_path, format!("{}\n", serde_json::to_string_pretty(&report).unwrap()))
        .map_err(num_err)?;

    // tabular summary mirroring the analysis axes
    let mut csv = String::from(
        "m_thz,center_hz,center_sigma_hz,fwhm_hz,fwhm_sigma_hz,contrast,blended,model_mismatch\n",
    );
    for r in &report.records {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.m_thz.as_deref().unwrap_or(""),
            r.fit.center,
            r.fit.center_sigma,
            r.fit.fwhm,
            r.fit.fwhm_sigma,
            r.fit.contrast,
            r.fit.window.blended,
            r.fit.model_mismatch
        )
        .unwrap();
    }
    let csv_path = out.join("fit_summary.csv");
    std::fs::write(&csv_path, csv).map_err(num_err)?;
    eprintln!(
        "fitted {} lines ({} windows skipped); wrote {} and {}",
        report.records.len(),
        report.skipped_windows.len(),
        json_path.display(),
        csv_path.display()
    );
    Ok(())
}

fn comb_budget_report(scenario: &Scenario) -> Result<Option<CombBudgetReport>, AppError> {
    let Some((comb_config, locks)) = scenario.comb_setup().map_err(cfg_err)? else {
        return Ok(None);
    };
    let lasers = locks
        .iter()
        .map(|l| {
            Ok(CombLaserBudget {
                label: format!("{:?}", l.label),
                mode_index: l.mode_index,
                beat_hz: l.beat,
                shg_factor: l.shg_factor,
                frequency_hz: comb::laser_frequency(l, &comb_config).map_err(cfg_err)?,
                uncertainty_hz: comb::frequency_uncertainty(l, &comb_config),
            })
        })
        .collect::<Result<Vec<_>, AppError>>()?;
    let combined_index = comb::effective_index(&locks[0])
        - comb::effective_index(&locks[1])
        - comb::effective_index(&locks[2]);
    Ok(Some(CombBudgetReport {
        f_rep_hz: comb_config.f_rep,
        sigma_rep_hz: comb_config.sigma_rep,
        lasers,
        combined_index,
        combined_uncertainty_hz: comb::combined_thz_uncertainty(
            &locks[0], &locks[1], &locks[2], &comb_config,
        ),
    }))
}

pub fn run_reference(
    fits_path: &Path,
    scenario_path: &Path,
    out: &Path,
    m_thz_override: Option<&str>,
    json_table: bool,
) -> CmdResult {
    let report: FitReport = serde_json::from_str(
        &std::fs::read_to_string(fits_path)
            .with_context(|| format!("reading fit report {}", fits_path.display()))
            .map_err(cfg_err)?,
    )
    .map_err(cfg_err)?;
    let scenario = load_scenario(scenario_path)?;
    let freqs = scenario.atomic_frequencies().map_err(cfg_err)?;
    let lasers = scenario.lasers().map_err(cfg_err)?;
    let config = scenario.to_scan_config().map_err(cfg_err)?;
    std::fs::create_dir_all(out).map_err(cfg_err)?;

    let mut warnings = Vec::new();

    // identified lines
    let mut identified: Vec<(Ratio<i64>, &cpt_core::analysis::FitResult)> = Vec::new();
    for r in &report.records {
        if let Some(label) = &r.m_thz {
            if let Some(m) = atomic::parse_m_thz(label) {
                identified.push((m, &r.fit));
            }
        }
    }
    if let Some(label) = m_thz_override {
        let m = atomic::parse_m_thz(label)
            .ok_or_else(|| cfg_err(anyhow!("cannot parse m_thz override {label:?}")))?;
        if report.records.len() == 1 {
            identified = vec![(m, &report.records[0].fit)];
        } else {
            return Err(cfg_err(anyhow!(
                "--m-thz override requires a single-line fit report, got {}",
                report.records.len()
            )));
        }
    }
    if identified.is_empty() {
        return Err(cfg_err(anyhow!(
            "fit report contains no identified lines; run on an R-sweep spectrum or pass --m-thz"
        )));
    }

    // field estimate: Zeeman ladder regression when possible
    let mut distinct: Vec<Ratio<i64>> = identified.iter().map(|(m, _)| *m).collect();
    distinct.sort();
    distinct.dedup();
    let (b_est, b_sigma, b_source) = if distinct.len() >= 2 {
        let lines: Vec<(Ratio<i64>, f64, f64)> = identified
            .iter()
            .map(|(m, f)| (*m, f.center, f.center_sigma))
            .collect();
        let fit = zeeman_linear_fit(&lines).map_err(num_err)?;
        (fit.b_estimate, fit.b_sigma, "zeeman-fit".to_string())
    } else {
        warnings.push("single line: Zeeman shift uses the scenario field, not a ladder fit".into());
        (config.system.b_field, 0.0, "scenario".to_string())
    };

    let f_dd = scenario.f_dd().map_err(cfg_err)?;
    let mu = cpt_core::constants::mu_b_over_h();
    let lines: Vec<ReferenceLine> = identified
        .iter()
        .map(|(m, f)| {
            let mf = atomic::ratio_to_f64(*m);
            let delta_z = mf * mu * b_est;
            let delta_z_sigma = mf.abs() * mu * b_sigma;
            let omega_r_c = freqs.f_pd + f.center;
            let omega_c = freqs.f_qs + lasers.c.detuning;
            let omega_b = freqs.f_ps + lasers.b.detuning;
            let delta_rcb = omega_r_c + omega_c - omega_b;
            ReferenceLine {
                m_thz: atomic::format_m_thz(*m),
                center_hz: f.center,
                center_sigma_hz: f.center_sigma,
                delta_rcb_hz: delta_rcb,
                delta_z_hz: delta_z,
                delta_z_sigma_hz: delta_z_sigma,
                delta_f_hz: analysis::thz_shift(f.center + freqs.f_pd, omega_c, omega_b, delta_z, f_dd),
            }
        })
        .collect();

    let comb = comb_budget_report(&scenario)?;
    if comb.is_none() {
        warnings.push("scenario has no comb section: uncertainty budget omitted".into());
        eprintln!("warning: scenario has no comb section: uncertainty budget omitted");
    }

    let reference = ReferenceReport {
        config_digest: report.config_digest.clone(),
        f_dd_hz: f_dd,
        b_estimate_tesla: b_est,
        b_sigma_tesla: b_sigma,
        b_source,
        lines,
        comb,
        warnings,
    };

    let json_path = out.join("reference.json");
    std::fs::write(&json_path, format!("{}\n", serde_json::to_string_pretty(&reference).unwrap()))
        .map_err(num_err)?;
    if !json_table {
        let mut csv = String::from(
            "m_thz,center_hz,center_sigma_hz,delta_rcb_hz,delta_z_hz,delta_f_hz\n",
        );
        for l in &reference.lines {
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                l.m_thz, l.center_hz, l.center_sigma_hz, l.delta_rcb_hz, l.delta_z_hz, l.delta_f_hz
            )
            .unwrap();
        }
        std::fs::write(out.join("reference.csv"), csv).map_err(num_err)?;
    }
    eprintln!("wrote {}", json_path.display());
    Ok(())
}

pub fn run_comb_budget(scenario_path: &Path, out: Option<&Path>) -> CmdResult {
    let scenario = load_scenario(scenario_path)?;
    let budget = comb_budget_report(&scenario)?
        .ok_or_else(|| cfg_err(anyhow!("scenario has no [comb] section")))?;
    let json = format!("{}\n", serde_json::to_string_pretty(&budget).unwrap());
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(cfg_err)?;
            std::fs::write(dir.join("comb_budget.json"), &json).map_err(num_err)?;
            eprintln!("wrote {}", dir.join("comb_budget.json").display());
        }
        None => print!("{json}"),
    }
    Ok(())
}

pub fn run_dark_predict(scenario_path: &Path, m_thz: Option<&str>) -> CmdResult {
    let scenario = load_scenario(scenario_path)?;
    let config = scenario.to_scan_config().map_err(cfg_err)?;
    let sys = &config.system;
    let shift = dressed::quadrupole_light_shift(sys.lasers.c.rabi, sys.lasers.c.detuning)
        .map_err(|e| num_err(anyhow!(e.to_string())))?;
    let base = dressed::dark_resonance_detuning(sys.lasers.b.detuning, sys.lasers.c.detuning, shift);
    println!("# three-photon resonance prediction (repumper detuning, Hz)");
    println!("light_shift_hz: {shift}");
    println!("base_hz: {base}");
    let lines = match m_thz {
        Some(label) => {
            let m = atomic::parse_m_thz(label)
                .ok_or_else(|| cfg_err(anyhow!("cannot parse m_thz {label:?}")))?;
            vec![atomic::line_by_label(m)
                .ok_or_else(|| cfg_err(anyhow!("unknown Zeeman line {label}")))?]
        }
        None => atomic::relative_couplings(),
    };
    println!("m_thz,position_hz");
    for line in lines {
        let pos = base + atomic::zeeman_shift(line.m_thz, sys.b_field);
        println!("{},{}", atomic::format_m_thz(line.m_thz), pos);
    }
    Ok(())
}

pub fn run_table() -> CmdResult {
    println!("mj_d32,mj_d52,m_thz,rel_rabi_c,rel_rabi_r");
    for line in atomic::relative_couplings() {
        println!(
            "{},{},{},{:.12},{:.12}",
            line.mj_d32,
            line.mj_d52,
            atomic::format_m_thz(line.m_thz),
            line.rel_rabi_c,
            line.rel_rabi_r
        );
    }
    Ok(())
}
