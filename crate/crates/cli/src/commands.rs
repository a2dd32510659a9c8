//! Subcommand bodies. Each writes its files under `config.out` and returns
//! the text printed on stdout.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde_json::json;
use ultralab_core::evolution::evolve_with_spectrum;
use ultralab_core::io::{
    write_evolution_csv, write_level_scan_csv, write_spectrum_csv, write_traces_csv, write_ultrafunction_csv,
};
use ultralab_core::quantum::{
    delta_ratio, gaussian, normalized_delta, sine_mode, singular_bump, spectrum_with, SpectrumOptions, SpectrumResult,
    StateKind,
};
use ultralab_core::scalar::evaluate;
use ultralab_core::space::battery_error;
use ultralab_core::{
    asymptotic_profile, build_derivative, build_grid, check_axioms, classify_state, commutator, conservation_traces,
    expectation, hamiltonian, measure, momentum_operator, neumann_hamiltonian, numerosity, position_operator,
    AxiomThresholds, Complex64, DerivativeOperator, Grid, Net, Observable, SetSpec, Ultrafunction,
};

use crate::config::{ExperimentConfig, ObservableKind, PotentialConfig, Quantity, StateConfig};
use crate::error::CliError;

/// Grid and derivative of one level.
pub struct Setup {
    pub grid: Arc<Grid>,
    pub d: DerivativeOperator,
}

impl Setup {
    pub fn new(config: &ExperimentConfig, m: i32) -> Result<Self, CliError> {
        let [a, b] = config.domain;
        let grid = build_grid(m, (a, b), config.pad, &config.required_points())?;
        let d = build_derivative(&grid, config.p, config.w)?;
        Ok(Setup { grid, d })
    }

    pub fn hamiltonian(&self, potential: &PotentialConfig) -> Result<Observable, CliError> {
        Ok(match (potential.spec(), potential) {
            (Some(spec), _) => hamiltonian(&self.d, &spec)?,
            (None, PotentialConfig::Neumann { lo, hi }) => neumann_hamiltonian(&self.d, (*lo, *hi))?,
            (None, _) => unreachable!("only the Neumann form has no potential term"),
        })
    }

    pub fn observable(&self, config: &ExperimentConfig) -> Result<Observable, CliError> {
        match config.observable {
            ObservableKind::Position => Ok(position_operator(&self.grid)),
            ObservableKind::Momentum => Ok(momentum_operator(&self.d)?),
            ObservableKind::Hamiltonian => self.hamiltonian(&config.potential),
        }
    }

    /// The configured unit state; `spec` resolves eigenvector states.
    pub fn state(&self, state: &StateConfig, spec: Option<&SpectrumResult>) -> Result<Ultrafunction, CliError> {
        Ok(match *state {
            StateConfig::Gaussian { center, sigma } => gaussian(&self.grid, center, sigma)?,
            StateConfig::Delta { at } => normalized_delta(&self.grid, at)?,
            StateConfig::Sine { n, lo, hi } => sine_mode(&self.grid, n, lo, hi).normalized()?,
            StateConfig::SingularBump { center, radius } => singular_bump(&self.grid, center, radius)?,
            StateConfig::Eigenvector { index } => {
                let spec = spec.ok_or_else(|| CliError::validation("eigenvector state needs a spectrum"))?;
                if index >= spec.len() {
                    return Err(CliError::validation(format!(
                        "state.index {index} exceeds the dimension {}",
                        spec.len()
                    )));
                }
                spec.eigenvector(index)
            }
        })
    }
}

pub fn spectrum_options(config: &ExperimentConfig) -> SpectrumOptions {
    SpectrumOptions {
        st_tolerance: config.tolerances.st,
        residual_tolerance: config.tolerances.residual,
        orthonormality_tolerance: config.tolerances.orthonormality,
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
    let mut f = create(dir, name)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

pub fn axioms(config: &ExperimentConfig) -> Result<String, CliError> {
    let s = Setup::new(config, config.level)?;
    let thresholds = AxiomThresholds {
        integral: config.tolerances.integral,
        consistency_safety: config.tolerances.consistency_safety,
        kernel: config.tolerances.kernel,
        ..AxiomThresholds::default()
    };
    let report = check_axioms(&s.grid, &s.d, &thresholds)?;
    let mut entries = serde_json::Map::new();
    let mut text = String::new();
    for (name, e) in report.entries() {
        entries.insert(name.to_string(), serde_json::to_value(e)?);
        text.push_str(&format!(
            "{name}: {} value={:e} threshold={:e}\n",
            if e.pass { "pass" } else { "FAIL" },
            e.value,
            e.threshold
        ));
    }
    write_json(
        &config.out,
        "axioms.json",
        &json!({
            "level": config.level,
            "p": config.p,
            "w": config.w,
            "dim": s.grid.dim(),
            "entries": entries,
            "all_pass": report.all_pass(),
        }),
    )?;
    Ok(text)
}

pub fn spectrum(config: &ExperimentConfig) -> Result<String, CliError> {
    let s = Setup::new(config, config.level)?;
    let spec = spectrum_with(&s.observable(config)?, &spectrum_options(config))?;
    let mut f = create(&config.out, "spectrum.csv")?;
    write_spectrum_csv(&spec, &mut f)?;
    f.flush()?;
    for &j in &config.eigenvectors {
        if j >= spec.len() {
            return Err(CliError::validation(format!("eigenvector {j} exceeds the dimension {}", spec.len())));
        }
        let mut f = create(&config.out, &format!("eigenvector_{j}.csv"))?;
        write_ultrafunction_csv(&spec.eigenvector(j), &mut f)?;
        f.flush()?;
    }
    let mut text = format!(
        "dim={} groups={} max_residual={:e}\n",
        spec.len(),
        spec.groups().len(),
        spec.max_residual()
    );
    for (k, g) in spec.groups().iter().take(5).enumerate() {
        text.push_str(&format!("group {k}: value={} size={}\n", g.value, g.len()));
    }
    Ok(text)
}

pub fn evolve(config: &ExperimentConfig) -> Result<String, CliError> {
    let s = Setup::new(config, config.level)?;
    let h = s.hamiltonian(&config.potential)?;
    let spec = spectrum_with(&h, &spectrum_options(config))?;
    let psi0 = s.state(&config.state, Some(&spec))?;
    let result = evolve_with_spectrum(&spec, config.mode, &psi0, &config.times)?;
    let traces = conservation_traces(&result, h.operator())?;
    let mut f = create(&config.out, "evolution.csv")?;
    write_evolution_csv(&result, &mut f)?;
    f.flush()?;
    let mut f = create(&config.out, "traces.csv")?;
    write_traces_csv(&traces, &mut f)?;
    f.flush()?;
    let mut text = String::new();
    for r in &traces {
        text.push_str(&format!("t={} norm={} energy={} integral={}\n", r.t, r.norm, r.energy, r.integral.re));
    }
    Ok(text)
}

pub fn measure_cmd(config: &ExperimentConfig) -> Result<String, CliError> {
    let s = Setup::new(config, config.level)?;
    let spec = spectrum_with(&s.observable(config)?, &spectrum_options(config))?;
    let psi = s.state(&config.state, Some(&spec))?;
    let dist = measure(&psi, &spec)?;
    write_json(&config.out, "measurement.json", &serde_json::to_value(&dist)?)?;
    let top = dist.most_likely().map(|o| (o.value, o.probability)).unwrap_or((f64::NAN, 0.0));
    Ok(format!(
        "outcomes={} total_probability={} most_likely={} p={}\n",
        dist.outcomes.len(),
        dist.total_probability(),
        top.0,
        top.1
    ))
}

/// `⟨[P,Q]δ_a, δ_a⟩` over all nodes and `⟨[Q,P]ψ, ψ⟩` for the configured
/// state.
pub fn commutator_cmd(config: &ExperimentConfig) -> Result<String, CliError> {
    let s = Setup::new(config, config.level)?;
    let q = position_operator(&s.grid);
    let p = momentum_operator(&s.d)?;
    let pq = commutator(&p, &q)?;
    let qp = commutator(&q, &p)?;
    let mut delta_max = 0.0f64;
    for i in 0..s.grid.dim() {
        let delta = Ultrafunction::delta_at(s.grid.clone(), i)?;
        delta_max = delta_max.max(expectation(&pq, &delta)?.norm());
    }
    let psi = s.state(&config.state, None)?;
    let value = expectation(&qp, &psi)?;
    let error = (value - Complex64::new(0.0, 1.0)).norm();
    let h = s.grid.spacing();
    write_json(
        &config.out,
        "commutator.json",
        &json!({
            "level": config.level,
            "h": h,
            "pq_delta_max": delta_max,
            "pq_delta_bound": 1e-10 / h,
            "qp_state": [value.re, value.im],
            "qp_state_error": error,
        }),
    )?;
    Ok(format!("pq_delta_max={delta_max:e} qp_state={}{:+}i error={error:e}\n", value.re, value.im))
}

/// Measures the configured quantity at level `m`.
pub fn quantity_at(config: &ExperimentConfig, m: i32) -> Result<f64, CliError> {
    let s = Setup::new(config, m)?;
    Ok(match config.quantity {
        Quantity::Poincare => {
            let [a, b] = config.domain;
            delta_ratio(&s.d, s.grid.nearest_index(0.5 * (a + b)))?
        }
        Quantity::Consistency => battery_error(&s.d),
        Quantity::Energy => {
            let h = s.hamiltonian(&config.potential)?;
            expectation(&h, &s.state(&config.state, None)?)?.re
        }
    })
}

pub fn refine(config: &ExperimentConfig) -> Result<String, CliError> {
    let chain = config.levels.chain()?;
    let rows: Vec<(i32, f64)> = chain
        .levels()
        .map(|m| quantity_at(config, m).map(|v| (m, v)))
        .collect::<Result<_, _>>()?;
    let profile = asymptotic_profile(&Net::from_samples(rows.iter().copied()), &chain)?;
    let mut f = create(&config.out, "refine.csv")?;
    write_level_scan_csv(&rows, &mut f)?;
    f.flush()?;
    let mut report = json!({
        "quantity": config.quantity,
        "levels": config.levels.to_string(),
        "exponent": profile.exponent,
        "coefficient": profile.coefficient,
        "r_squared": profile.r_squared,
        "rendered": profile.rendered.to_string(),
    });
    let mut text = String::new();
    for (m, v) in &rows {
        text.push_str(&format!("m={m} value={v}\n"));
    }
    text.push_str(&format!("exponent={} r_squared={}\n", profile.exponent, profile.r_squared));
    if config.quantity == Quantity::Energy {
        let class = classify_state(&chain, |m| {
            let s = Setup::new(config, m).map_err(core_error)?;
            let h = s.hamiltonian(&config.potential).map_err(core_error)?;
            let psi = s.state(&config.state, None).map_err(core_error)?;
            Ok((h, psi))
        })?;
        let kind = match class.kind {
            StateKind::Physical => "physical",
            StateKind::Ideal => "ideal",
        };
        report["class"] = json!(kind);
        text.push_str(&format!("class={kind}\n"));
    }
    write_json(&config.out, "refine.json", &report)?;
    Ok(text)
}

fn core_error(e: CliError) -> ultralab_core::Error {
    match e {
        CliError::Validation(msg) => ultralab_core::Error::Domain(msg),
        CliError::Failure(msg) => ultralab_core::Error::Numeric(msg),
    }
}

/// `set` is `naturals`, an empty string, or a comma-separated list of reals.
pub fn numerosity_cmd(set: &str, level: i32) -> Result<String, CliError> {
    let spec = parse_set(set)?;
    Ok(format!("{}\n", numerosity(&spec, level)))
}

pub fn parse_set(set: &str) -> Result<SetSpec, CliError> {
    let t = set.trim();
    if t.eq_ignore_ascii_case("naturals") {
        return Ok(SetSpec::Naturals);
    }
    let points = t
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| CliError::validation(format!("set element `{s}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SetSpec::Finite(points))
}

pub fn scalar_eval(expr: &str) -> Result<String, CliError> {
    Ok(format!("{}\n", evaluate(expr)?))
}
