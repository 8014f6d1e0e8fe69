//! Subcommand bodies. Each returns the JSON summary it printed.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use affine_estimation::asymptotics::{
    heisenberg_ratio, isotropic_params, model_density, rms_predictions, separate_optima, uncertainty_product_ratio,
    AsymptoticModel,
};
use affine_estimation::distribution::{argmax, moments, scan, DensityMap, MeasureConvention, Window};
use affine_estimation::grid::{make_coherent, make_displaced_squeezed, QuadratureGrid, StateVector};
use affine_estimation::group::GroupElement;
use affine_estimation::povm::{build_seed, optimal_likelihood, srm_likelihood};
use affine_estimation::two_mode::{concentration_profile, make_truncated_pointer, pointer_overlap, PointerSign};
use affine_estimation::validation::{run_validation, ValidationConfig};
use affine_estimation::Error;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{RunConfig, StateKind};
use crate::CliError;

/// Prepares the configured state on its grid.
pub fn prepare_state(config: &RunConfig) -> Result<StateVector, CliError> {
    let kind = config.state_kind()?;
    if kind == StateKind::SampledFile {
        return read_sampled(Path::new(&config.state_file));
    }
    let (a, z) = match kind {
        StateKind::Vacuum => (0.0, 0.0),
        StateKind::Coherent => (config.a, 0.0),
        _ => (config.a, config.z),
    };
    let grid = if config.y_max > 0.0 || config.grid_nodes > 0 {
        let auto = QuadratureGrid::covering(a, 0.5 * (-z).exp());
        let y_max = if config.y_max > 0.0 { config.y_max } else { auto.y_max() };
        let n = if config.grid_nodes > 0 { config.grid_nodes } else { auto.len() };
        QuadratureGrid::new(y_max, n).map_err(config_error)?
    } else {
        QuadratureGrid::covering(a, 0.5 * (-z).exp())
    };
    let state = if z == 0.0 { make_coherent(a, grid) } else { make_displaced_squeezed(a, z, grid) };
    Ok(state?)
}

/// Reads `y,re,im` rows on a uniform midpoint grid symmetric about zero.
fn read_sampled(path: &Path) -> Result<StateVector, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read state file {}: {e}", path.display())))?;
    let mut ys = Vec::new();
    let mut amps = Vec::new();
    for row in reader.deserialize::<(f64, f64, f64)>() {
        let (y, re, im) = row.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        ys.push(y);
        amps.push(Complex64::new(re, im));
    }
    let n = ys.len();
    if n < 2 {
        return Err(CliError::Config(format!("{}: need at least two samples", path.display())));
    }
    let spacing = (ys[n - 1] - ys[0]) / (n - 1) as f64;
    let grid = QuadratureGrid::new(0.5 * spacing * n as f64, n).map_err(config_error)?;
    if let Some((k, y)) = ys.iter().enumerate().find(|(k, y)| (grid.node(*k) - **y).abs() > 1e-9 * grid.y_max()) {
        return Err(CliError::Config(format!(
            "{}: sample {k} at y = {y} is off the midpoint grid (expected {})",
            path.display(),
            grid.node(k)
        )));
    }
    Ok(StateVector::from_samples(grid, amps).map_err(config_error)?.normalized()?)
}

fn config_error(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

fn state_json(config: &RunConfig, psi: &StateVector) -> Value {
    let mut v = json!({
        "kind": config.state,
        "y_max": psi.grid().y_max(),
        "grid_nodes": psi.grid().len(),
    });
    match config.state_kind() {
        Ok(StateKind::Coherent) => v["a"] = json!(config.a),
        Ok(StateKind::DisplacedSqueezed) => {
            v["a"] = json!(config.a);
            v["z"] = json!(config.z);
        }
        Ok(StateKind::SampledFile) => v["file"] = json!(config.state_file),
        _ => {}
    }
    v
}

fn density_window(config: &RunConfig) -> Result<Window, CliError> {
    if !config.auto_window {
        return config.explicit_window();
    }
    Ok(match config.state_kind()? {
        StateKind::Vacuum | StateKind::SampledFile => Window::vacuum_default(),
        _ if config.a == 0.0 => Window::vacuum_default(),
        _ => Window::coherent_default(config.a),
    })
}

/// Writes `x,r,density` rows in scan order with 17 significant digits.
fn write_csv(map: &DensityMap, path: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Output(format!("{}: {e}", path.display()));
    let mut writer = csv::Writer::from_writer(File::create(path).map_err(io)?);
    writer.write_record(["x", "r", "density"]).map_err(|e| CliError::Output(e.to_string()))?;
    for (x, r, p) in map.points() {
        writer
            .write_record([format!("{x:.16e}"), format!("{r:.16e}"), format!("{p:.16e}")])
            .map_err(|e| CliError::Output(e.to_string()))?;
    }
    writer.flush().map_err(io)
}

/// Prints the summary and mirrors it to `json_path` when set.
fn emit(config: &RunConfig, summary: Value) -> Result<Value, CliError> {
    let text = serde_json::to_string_pretty(&summary).expect("summary is plain data");
    println!("{text}");
    if !config.json_path.is_empty() {
        let path = Path::new(&config.json_path);
        let mut f = File::create(path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        writeln!(f, "{text}").map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    }
    Ok(summary)
}

/// Scans the estimate density, writes the CSV and prints the summary.
///
/// Moments are `null` when the window holds too little probability; the
/// vacuum's density has heavy tails in `x` and is the usual case.
pub fn density(config: &RunConfig) -> Result<Value, CliError> {
    let window = density_window(config)?;
    let psi = prepare_state(config)?;
    let kind = config.seed()?;
    let seed = build_seed(kind, &psi)?;
    let map = scan(&seed, &psi, &window, (config.resolution_x, config.resolution_r))?;
    write_csv(&map, &config.csv_path())?;
    let (ax, ar, _) = argmax(&map);
    let stats = match moments(&map) {
        Ok(s) => Some(s),
        Err(Error::InsufficientMass { mass, required }) => {
            eprintln!("warning: window holds {mass:.4} of the probability (< {required}); moments omitted");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let field = |f: fn(&affine_estimation::SummaryStats) -> f64| stats.as_ref().map(f);
    emit(
        config,
        json!({
            "likelihood": seed.likelihood(),
            "argmax_x": ax,
            "argmax_r": ar,
            "mean_x": field(|s| s.mean_x),
            "mean_r": field(|s| s.mean_r),
            "delta_x": field(|s| s.delta_x),
            "delta_r": field(|s| s.delta_r),
            "mass": map.mass(),
            "seed_kind": kind.label(),
            "state": state_json(config, &psi),
        }),
    )
}

pub fn likelihood(config: &RunConfig) -> Result<Value, CliError> {
    let psi = prepare_state(config)?;
    let kind = config.seed()?;
    let seed = build_seed(kind, &psi)?;
    emit(
        config,
        json!({ "likelihood": seed.likelihood(), "seed_kind": kind.label(), "state": state_json(config, &psi) }),
    )
}

pub fn compare_srm(config: &RunConfig) -> Result<Value, CliError> {
    let psi = prepare_state(config)?;
    let l_opt = optimal_likelihood(&psi)?;
    let l_srm = srm_likelihood(&psi)?;
    let ratio = l_srm / l_opt;
    if ratio > 1.0 + 1e-9 {
        return Err(CliError::Numeric(format!("square-root likelihood exceeds the optimum: ratio {ratio}")));
    }
    emit(config, json!({ "l_opt": l_opt, "l_srm": l_srm, "ratio": ratio }))
}

/// Asymptotic error laws for `(a, z)`, the measured Heisenberg ratio, the
/// isotropic parameters at `n_bar`, and the model density on the scan window.
pub fn asymptotics(config: &RunConfig) -> Result<Value, CliError> {
    let (a, z) = match config.state_kind()? {
        StateKind::Coherent => (config.a, 0.0),
        StateKind::DisplacedSqueezed => (config.a, config.z),
        _ => return Err(CliError::Config("asymptotics needs a coherent or displaced-squeezed state".into())),
    };
    let model = AsymptoticModel::new(a, z)?;
    let psi = prepare_state(config)?;
    let (dx, dr) = rms_predictions(a, z);
    let (ox, or) = separate_optima(a, z);
    let iso = isotropic_params(config.n_bar)?;
    let window = density_window(config)?;
    let map = DensityMap::tabulate(
        window,
        (config.resolution_x, config.resolution_r),
        MeasureConvention::Lebesgue,
        |x, r| Ok(model_density(&model, x, r)),
    )?;
    write_csv(&map, &config.csv_path())?;
    emit(
        config,
        json!({
            "a": a,
            "z": z,
            "n_bar": a * a + z.sinh().powi(2),
            "in_asymptotic_regime": model.in_asymptotic_regime(),
            "delta_x": dx,
            "delta_r": dr,
            "delta_x_opt": ox,
            "delta_r_opt": or,
            "product_ratio": uncertainty_product_ratio(a, z),
            "heisenberg_ratio": heisenberg_ratio(&psi, a)?,
            "isotropic": iso,
        }),
    )
}

/// Concentration profile of the two-mode pointer and its cross overlap.
pub fn two_mode(config: &RunConfig) -> Result<Value, CliError> {
    let window = if config.auto_window { Window::symmetric(3.0, 1.5)? } else { config.explicit_window()? };
    let profile =
        concentration_profile(config.lambda, config.cutoff, &window, (config.resolution_x, config.resolution_r))?;
    write_csv(&profile.map, &config.csv_path())?;
    let plus = make_truncated_pointer(config.lambda, PointerSign::Plus, config.cutoff)?;
    let minus = make_truncated_pointer(config.lambda, PointerSign::Minus, config.cutoff)?;
    let cross = pointer_overlap(&minus, &GroupElement::new(0.0, 0.0), &plus)?.norm_sqr();
    emit(
        config,
        json!({
            "lambda": config.lambda,
            "n_max": config.cutoff,
            "width_x": profile.width_x,
            "width_r": profile.width_r,
            "tail": profile.tail,
            "cross_overlap": cross,
            "mean_energy": plus.mean_energy(),
            "mass": profile.map.mass(),
        }),
    )
}

/// Runs the invariant suite, one line per check. Zero grid fields keep the
/// suite's own defaults.
pub fn validate(config: &RunConfig) -> Result<bool, CliError> {
    let defaults = ValidationConfig::default();
    let vc = ValidationConfig {
        y_max: if config.y_max > 0.0 { config.y_max } else { defaults.y_max },
        grid_nodes: if config.grid_nodes > 0 { config.grid_nodes } else { defaults.grid_nodes },
        convergence_tolerance: config.convergence_tolerance,
    };
    let report = run_validation(&vc).map_err(config_error)?;
    for c in &report.checks {
        println!("{} {:<26} {:>8.3}s  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.seconds, c.detail);
    }
    let failed = report.failures().count();
    println!("{} checks, {} failed", report.checks.len(), failed);
    Ok(failed == 0)
}
