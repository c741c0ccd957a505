use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use nahn_core::circuit::{monte_carlo, CirculantBloch};
use nahn_core::topology::{braiding_degree_of, compute_phase_diagram_with, PhaseDiagramRequest};
use nahn_core::{
    admittance_bloch, band_trajectories, braiding_degree, circuit_chain, circuit_to_model, classify_localization,
    eig2x2, eig_dense, exceptional_scan, obc_eigenstates, real_space_hamiltonian, simulated_measurement,
    sort_bands_by_continuity, BandTrajectories, BoundaryCondition, CircuitParams, ComplexMatrix, EigenstateSet, Error,
    KGrid, Localization, LocalizationReport, MeasurementSetup, NoiseModel, Protocol,
};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{Command, Format, RunConfig, System};
use crate::output::{provenance, render_report, sibling, write_file, Cell, Meta, Table};
use crate::CliError;

/// Short machine-readable name for a numerical failure.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Validation { .. } => "validation",
        Error::NotConverged { .. } => "not_converged",
        Error::OnPhaseBoundary { .. } => "on_phase_boundary",
        Error::GridTooCoarse { .. } => "grid_too_coarse",
        Error::ReferenceOnSpectrum { .. } => "reference_on_spectrum",
        Error::OpenTrajectory { .. } => "open_trajectory",
        Error::DegenerateDenominator => "degenerate_denominator",
        Error::SingularNetwork { .. } => "singular_network",
    }
}

fn verdict_json(r: &Result<i32, Error>) -> Value {
    match r {
        Ok(n) => json!(n),
        Err(e) => json!({ "error": error_kind(e), "detail": e.to_string() }),
    }
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Runs the configured command and returns the files written.
pub fn execute(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| CliError::Config("no output path: pass --out or set `out`".into()))?;
    match cfg.command {
        Command::Spectrum => cmd_spectrum(cfg, &out),
        Command::PhaseDiagram => cmd_phase_diagram(cfg, &out),
        Command::Skin => cmd_skin(cfg, &out),
        Command::Measure => cmd_measure(cfg, &out),
    }
}

fn bands_table(traj: &BandTrajectories) -> Table {
    let mut t = Table::new(&["k", "band", "re_E", "im_E"]);
    for (j, k) in traj.k_grid.iter().enumerate() {
        for (b, band) in traj.bands.iter().enumerate() {
            t.push(vec![(*k).into(), b.into(), band[j].re.into(), band[j].im.into()]);
        }
    }
    t
}

fn eigenvalue_table(values: &[Complex64]) -> Table {
    let mut t = Table::new(&["index", "re_E", "im_E"]);
    for (i, e) in values.iter().enumerate() {
        t.push(vec![i.into(), e.re.into(), e.im.into()]);
    }
    t
}

fn eigenstate_table(states: &EigenstateSet) -> Table {
    let mut t = Table::new(&["state_index", "re_E", "im_E", "site", "density"]);
    for (s, (e, d)) in states.eigenvalues.iter().zip(&states.densities).enumerate() {
        for (x, rho) in d.iter().enumerate() {
            t.push(vec![s.into(), e.re.into(), e.im.into(), (x + 1).into(), (*rho).into()]);
        }
    }
    t
}

fn circuit_meta(meta: &mut Meta, c: &CircuitParams, omega: f64) -> Result<(), CliError> {
    let cm = circuit_to_model(c)?;
    meta.insert("omega_rad_s".into(), json!(omega));
    meta.insert("omega0_rad_s".into(), json!(cm.omega0));
    meta.insert("units".into(), json!("siemens"));
    Ok(())
}

fn cmd_spectrum(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let grid = KGrid::new(cfg.kpoints)?;
    let mut meta = provenance(cfg);
    meta.insert("boundary".into(), json!(cfg.boundary.to_string()));
    let table = match (&cfg.system, cfg.boundary) {
        (System::Lattice(_), BoundaryCondition::Pbc) => {
            let p = cfg.model().expect("checked at load");
            let traj = band_trajectories(&p, &grid)?;
            meta.insert("nu".into(), verdict_json(&braiding_degree(&p, &grid)));
            meta.insert("bands_swap_on_closure".into(), json!(traj.closes_with_swap));
            meta.insert("exceptional_k".into(), json!(exceptional_scan(&p, &grid, cfg.ep_tol)));
            bands_table(&traj)
        }
        (System::Lattice(_), BoundaryCondition::Obc) => {
            let p = cfg.model().expect("checked at load");
            meta.insert("N".into(), json!(cfg.sites));
            let h = real_space_hamiltonian(&p, cfg.sites, BoundaryCondition::Obc)?;
            eigenvalue_table(&eig_dense(&h, false)?.eigenvalues)
        }
        (System::Circuit(c), BoundaryCondition::Pbc) => {
            let omega = c.drive_frequency();
            circuit_meta(&mut meta, c, omega)?;
            let samples = grid
                .values()
                .map(|k| {
                    let s = eig2x2(&admittance_bloch(c, omega, k))?;
                    Ok((k, [s.eigenvalues[0], s.eigenvalues[1]]))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let traj = sort_bands_by_continuity(&samples)?;
            let nu = braiding_degree_of(|k| admittance_bloch(c, omega, k), &grid);
            meta.insert("nu".into(), verdict_json(&nu));
            meta.insert("bands_swap_on_closure".into(), json!(traj.closes_with_swap));
            bands_table(&traj)
        }
        (System::Circuit(c), BoundaryCondition::Obc) => {
            let omega = c.drive_frequency();
            circuit_meta(&mut meta, c, omega)?;
            meta.insert("N".into(), json!(cfg.sites));
            let j = circuit_chain(c, cfg.sites, BoundaryCondition::Obc, omega)?;
            eigenvalue_table(&eig_dense(&j, false)?.eigenvalues)
        }
    };
    write_file(out, &table.render(&meta, cfg.format)?)?;
    Ok(vec![out.to_path_buf()])
}

fn cmd_phase_diagram(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let System::Lattice(m) = cfg.system else {
        unreachable!("checked at load")
    };
    let req = PhaseDiagramRequest {
        t_range: cfg.t_range,
        resolution: cfg.resolution,
        chain_sites: cfg.chain_sites,
        grid: KGrid::new(cfg.kpoints)?,
        d_left: m.d_left,
        d_right: m.d_right,
    };
    let done = AtomicUsize::new(0);
    let pd = compute_phase_diagram_with(&req, |row| {
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        eprintln!("phase-diagram: row {row} done ({n}/{})", cfg.resolution);
    })?;

    let mut meta = provenance(cfg);
    meta.insert("resolution".into(), json!(cfg.resolution));
    meta.insert("t_range".into(), json!([cfg.t_range.0, cfg.t_range.1]));
    meta.insert("chain_N".into(), json!(cfg.chain_sites));
    meta.insert("dL".into(), json!(m.d_left.components()));
    meta.insert("dR".into(), json!(m.d_right.components()));
    meta.insert(
        "nu_sentinels".into(),
        json!({ "on_boundary": nahn_core::topology::NU_ON_BOUNDARY, "unresolved": nahn_core::topology::NU_UNRESOLVED }),
    );

    let mut t = Table::new(&["tL", "tR", "nu", "gamma", "boundary_residual"]);
    for (i, tl) in pd.tl_axis.iter().enumerate() {
        for (j, tr) in pd.tr_axis.iter().enumerate() {
            t.push(vec![
                (*tl).into(),
                (*tr).into(),
                pd.nu_values[i][j].into(),
                pd.gamma_values[i][j].into(),
                pd.boundary_residuals[i][j].into(),
            ]);
        }
    }
    write_file(out, &t.render(&meta, cfg.format)?)?;
    Ok(vec![out.to_path_buf()])
}

fn class_name(c: Localization) -> &'static str {
    match c {
        Localization::Left => "left",
        Localization::Right => "right",
        Localization::Extended => "extended",
    }
}

fn report_json(states: &EigenstateSet, r: &LocalizationReport) -> Value {
    let monopolar = if r.is_monopolar_right() {
        json!("right")
    } else if r.is_monopolar_left() {
        json!("left")
    } else {
        Value::Null
    };
    let per_state: Vec<Value> = states
        .eigenvalues
        .iter()
        .zip(r.classes.iter().zip(&r.weights))
        .enumerate()
        .map(|(i, (e, (c, (wl, wr))))| {
            json!({ "index": i, "re_E": e.re, "im_E": e.im, "class": class_name(*c), "w_left": wl, "w_right": wr })
        })
        .collect();
    json!({
        "N": states.sites,
        "gamma": r.gamma,
        "bipolar": r.bipolar,
        "monopolar": monopolar,
        "left_count": r.left_count,
        "right_count": r.right_count,
        "extended_count": r.extended_count,
        "states": per_state,
    })
}

fn cmd_skin(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut meta = provenance(cfg);
    meta.insert("N".into(), json!(cfg.sites));
    let states = match &cfg.system {
        System::Lattice(_) => obc_eigenstates(&cfg.model().expect("checked at load"), cfg.sites)?,
        System::Circuit(c) => {
            let omega = c.drive_frequency();
            circuit_meta(&mut meta, c, omega)?;
            EigenstateSet::from_chain(&circuit_chain(c, cfg.sites, BoundaryCondition::Obc, omega)?)?
        }
    };
    let report = classify_localization(&states, cfg.window_fraction, cfg.threshold)?;
    let report_path = sibling(out, "report.json");
    write_file(out, &eigenstate_table(&states).render(&meta, cfg.format)?)?;
    write_file(&report_path, &render_report(&meta, report_json(&states, &report))?)?;
    Ok(vec![out.to_path_buf(), report_path])
}

/// Topology read from one reconstructed network.
#[derive(Debug, Clone, PartialEq)]
struct Verdict {
    nu: Option<i32>,
    bipolar: Option<bool>,
    gamma: Option<f64>,
}

fn measured(
    setup: &MeasurementSetup,
    protocol: Protocol,
    noise: Option<NoiseModel>,
) -> Result<ComplexMatrix, CliError> {
    simulated_measurement(setup, protocol, noise).map_err(|e| match e {
        Error::SingularNetwork { condition } => CliError::Singular {
            omega: Some(setup.omega),
            condition,
        },
        other => other.into(),
    })
}

fn verdict_of(j: &ComplexMatrix, states: Option<&EigenstateSet>, cfg: &RunConfig) -> Result<Verdict, Error> {
    match cfg.protocol {
        Protocol::PbcUnitCell => {
            let bloch = CirculantBloch::from_chain(j)?;
            let nu = braiding_degree_of(|k| bloch.at(k), &KGrid::new(cfg.kpoints)?)?;
            Ok(Verdict {
                nu: Some(nu),
                bipolar: None,
                gamma: None,
            })
        }
        Protocol::ObcAllNodes => {
            let owned;
            let states = match states {
                Some(s) => s,
                None => {
                    owned = EigenstateSet::from_chain(j)?;
                    &owned
                }
            };
            let r = classify_localization(states, cfg.window_fraction, cfg.threshold)?;
            Ok(Verdict {
                nu: None,
                bipolar: Some(r.bipolar),
                gamma: Some(r.gamma),
            })
        }
    }
}

fn verdict_value(v: &Verdict) -> Value {
    json!({ "nu": v.nu, "bipolar": v.bipolar, "gamma": v.gamma })
}

fn measure_meta(cfg: &RunConfig, setup: &MeasurementSetup) -> Result<Meta, CliError> {
    let mut meta = provenance(cfg);
    circuit_meta(&mut meta, &setup.circuit, setup.omega)?;
    meta.insert("N".into(), json!(cfg.sites));
    meta.insert("protocol".into(), json!(cfg.protocol));
    meta.insert(
        "noise".into(),
        json!({
            "sigma": cfg.sigma,
            "seed": cfg.seed,
            "seeds": cfg.seeds,
            "model": "each component instance scaled by max(1 + Normal(0, sigma), 0.05), ChaCha8 stream per seed",
        }),
    );
    Ok(meta)
}

fn cmd_measure(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let System::Circuit(c) = cfg.system else {
        unreachable!("checked at load")
    };
    let setup = MeasurementSetup::at_drive(c, cfg.sites);
    let meta = measure_meta(cfg, &setup)?;
    let noise_for = |seed: u64| {
        (cfg.sigma > 0.0).then_some(NoiseModel {
            component_rel_sigma: cfg.sigma,
            seed,
        })
    };

    if cfg.seeds == 1 {
        let j = measured(&setup, cfg.protocol, noise_for(cfg.seed))?;
        let states = EigenstateSet::from_chain(&j)?;
        let mut meta = meta;
        let verdict = verdict_of(&j, Some(&states), cfg);
        meta.insert(
            "verdict".into(),
            match &verdict {
                Ok(v) => verdict_value(v),
                Err(e) => json!({ "error": error_kind(e), "detail": e.to_string() }),
            },
        );
        let states_path = sibling(out, &format!("eigenstates.{}", extension(cfg.format)));
        write_file(out, &eigenvalue_table(&states.eigenvalues).render(&meta, cfg.format)?)?;
        write_file(&states_path, &eigenstate_table(&states).render(&meta, cfg.format)?)?;
        return Ok(vec![out.to_path_buf(), states_path]);
    }

    let reference = {
        let j = measured(&setup, cfg.protocol, None)?;
        verdict_of(&j, None, cfg)?
    };
    let seeds: Vec<u64> = (0..cfg.seeds as u64).map(|i| cfg.seed.wrapping_add(i)).collect();
    let runs = monte_carlo(&seeds, |seed| {
        simulated_measurement(&setup, cfg.protocol, noise_for(seed)).and_then(|j| verdict_of(&j, None, cfg))
    });

    let mut t = Table::new(&["seed", "status", "nu", "bipolar", "gamma"]);
    let mut histogram: BTreeMap<String, usize> = BTreeMap::new();
    let mut failures: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut agree = 0;
    for (seed, r) in &runs {
        match r {
            Ok(v) => {
                let key = match (v.nu, v.bipolar) {
                    (Some(nu), _) => nu.to_string(),
                    (None, Some(b)) => if b { "bipolar" } else { "not_bipolar" }.to_string(),
                    (None, None) => "none".to_string(),
                };
                *histogram.entry(key).or_default() += 1;
                agree += usize::from(v.nu == reference.nu && v.bipolar == reference.bipolar);
                t.push(vec![
                    (*seed).into(),
                    "ok".into(),
                    v.nu.map_or(Cell::Text(String::new()), Cell::from),
                    v.bipolar.map_or("", |b| if b { "true" } else { "false" }).into(),
                    v.gamma.map_or(Cell::Text(String::new()), Cell::from),
                ]);
            }
            Err(e) => {
                *failures.entry(error_kind(e)).or_default() += 1;
                t.push(vec![
                    (*seed).into(),
                    error_kind(e).into(),
                    "".into(),
                    "".into(),
                    "".into(),
                ]);
            }
        }
    }
    let report = json!({
        "reference": verdict_value(&reference),
        "histogram": histogram,
        "failures": failures,
        "agreement": agree as f64 / runs.len() as f64,
        "runs": runs.len(),
    });
    let report_path = sibling(out, "report.json");
    write_file(out, &t.render(&meta, cfg.format)?)?;
    write_file(&report_path, &render_report(&meta, report)?)?;
    Ok(vec![out.to_path_buf(), report_path])
}
