//! Config-file parsing: a TOML document describing the market instance,
//! plus optional sweep and simulation sections.
//!
//! Symmetric matrices may be written as full square row lists or as lower
//! triangles (row i holding i + 1 entries), which are mirrored.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use fogpact_core::solver::PlanKind;
use fogpact_core::{
    EvaluationMode, MarketInstance, SimConfig, SweepParameter, SweepSpec, SymMatrix,
};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub instance: InstanceSection,
    pub sweep: Option<SweepSection>,
    pub sim: Option<SimSection>,
    /// Default plan for `solve` and `simulate` when no flag is given.
    pub plan: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSection {
    pub n: Option<usize>,
    pub c: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
    pub eta: f64,
    pub w_bar: f64,
    #[serde(default)]
    pub allow_complementarity: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// One of `eta`, `c_ii`, `sigma_ii`, `beta`.
    pub parameter: String,
    /// Coordinate for the indexed parameters; rejected for `eta`.
    pub index: Option<usize>,
    pub values: Vec<f64>,
    /// Plan labels; all six when omitted.
    pub plans: Option<Vec<String>>,
    /// `own` (default) or `true`.
    pub mode: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub samples: u64,
    pub seed: u64,
    #[serde(default)]
    pub antithetic: bool,
}

pub fn load_document(path: &Path) -> Result<ConfigDocument, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| {
        // toml errors carry line/column context in their display form
        CliError::Config(format!("{}: {}", path.display(), e.to_string().replace('\n', " ")))
    })
}

fn build_matrix(name: &str, rows: &[Vec<f64>]) -> Result<SymMatrix, CliError> {
    let n = rows.len();
    if n == 0 {
        return Err(CliError::Config(format!("instance.{name}: matrix is empty")));
    }
    let is_full = rows.iter().all(|r| r.len() == n);
    let is_lower = rows.iter().enumerate().all(|(i, r)| r.len() == i + 1);
    let full_rows: Vec<Vec<f64>> = if is_full {
        rows.to_vec()
    } else if is_lower {
        let mut full = vec![vec![0.0; n]; n];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                full[i][j] = v;
                full[j][i] = v;
            }
        }
        full
    } else {
        return Err(CliError::Config(format!(
            "instance.{name}: rows must form a full {n}x{n} matrix or a lower triangle"
        )));
    };
    SymMatrix::from_rows(&full_rows)
        .map_err(|e| CliError::Config(format!("instance.{name}: {e}")))
}

pub fn build_instance(section: &InstanceSection) -> Result<MarketInstance, CliError> {
    let c = build_matrix("c", &section.c)?;
    let sigma = build_matrix("sigma", &section.sigma)?;
    if let Some(n) = section.n {
        if n != c.n() {
            return Err(CliError::Config(format!(
                "instance.n = {n} but c is {0}x{0}",
                c.n()
            )));
        }
    }
    let built = if section.allow_complementarity {
        MarketInstance::with_complementarity(
            c,
            sigma,
            section.beta.clone(),
            section.eta,
            section.w_bar,
        )
    } else {
        MarketInstance::new(c, sigma, section.beta.clone(), section.eta, section.w_bar)
    };
    built.map_err(|e| CliError::Config(format!("instance: {e}")))
}

pub fn parse_plan(label: &str) -> Result<PlanKind, CliError> {
    label
        .parse::<PlanKind>()
        .map_err(CliError::Config)
}

fn parse_sweep_parameter(section: &SweepSection) -> Result<SweepParameter, CliError> {
    let need_index = |what: &str| {
        section.index.ok_or_else(|| {
            CliError::Config(format!("sweep.index is required for parameter \"{what}\""))
        })
    };
    match section.parameter.as_str() {
        "eta" => {
            if section.index.is_some() {
                return Err(CliError::Config(
                    "sweep.index must be omitted for parameter \"eta\"".into(),
                ));
            }
            Ok(SweepParameter::Eta)
        }
        "c_ii" => Ok(SweepParameter::CostDiagonal(need_index("c_ii")?)),
        "sigma_ii" => Ok(SweepParameter::NoiseDiagonal(need_index("sigma_ii")?)),
        "beta" => Ok(SweepParameter::Beta(need_index("beta")?)),
        other => Err(CliError::Config(format!(
            "sweep.parameter \"{other}\" unknown (expected eta, c_ii, sigma_ii, or beta)"
        ))),
    }
}

pub fn build_sweep(
    base: MarketInstance,
    section: &SweepSection,
    mode_flag: Option<&str>,
) -> Result<SweepSpec, CliError> {
    let parameter = parse_sweep_parameter(section)?;
    let mut spec = SweepSpec::new(base, parameter, section.values.clone());
    if let Some(labels) = &section.plans {
        let plans = labels
            .iter()
            .map(|l| parse_plan(l))
            .collect::<Result<Vec<_>, _>>()?;
        spec = spec.with_plans(plans);
    }
    let mode_str = mode_flag.or(section.mode.as_deref());
    if let Some(mode) = mode_str {
        let mode = mode
            .parse::<EvaluationMode>()
            .map_err(CliError::Config)?;
        spec = spec.with_mode(mode);
    }
    spec.validate().map_err(CliError::Core)?;
    Ok(spec)
}

pub fn build_sim_config(
    section: Option<&SimSection>,
    samples_flag: Option<u64>,
    seed_flag: Option<u64>,
) -> Result<SimConfig, CliError> {
    const DEFAULT_SAMPLES: u64 = 100_000;
    let samples = samples_flag
        .or(section.map(|s| s.samples))
        .unwrap_or(DEFAULT_SAMPLES);
    let seed = seed_flag.or(section.map(|s| s.seed)).unwrap_or(0);
    let antithetic = section.map(|s| s.antithetic).unwrap_or(false);
    SimConfig::new(samples, seed, antithetic).map_err(CliError::Core)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCALAR: &str = r#"
[instance]
c = [[2.0]]
sigma = [[1.0]]
beta = [1.0]
eta = 1.0
w_bar = 0.0
"#;

    #[test]
    fn parses_minimal_document() {
        let doc: ConfigDocument = toml::from_str(SCALAR).unwrap();
        let inst = build_instance(&doc.instance).unwrap();
        assert_eq!(inst.n(), 1);
        assert_eq!(inst.cost_matrix().get(0, 0), 2.0);
    }

    #[test]
    fn lower_triangle_is_mirrored() {
        let doc: ConfigDocument = toml::from_str(
            r#"
[instance]
c = [[1.0], [0.2, 1.0]]
sigma = [[1.0], [0.8, 1.0]]
beta = [1.0, 1.0]
eta = 1.0
w_bar = 0.0
"#,
        )
        .unwrap();
        let inst = build_instance(&doc.instance).unwrap();
        assert_eq!(inst.cost_matrix().get(0, 1), 0.2);
        assert_eq!(inst.noise_cov().get(1, 0), 0.8);
    }

    #[test]
    fn ragged_matrix_is_rejected() {
        let doc: ConfigDocument = toml::from_str(
            r#"
[instance]
c = [[1.0, 0.0], [0.0]]
sigma = [[1.0], [0.0, 1.0]]
beta = [1.0, 1.0]
eta = 1.0
w_bar = 0.0
"#,
        )
        .unwrap();
        let err = build_instance(&doc.instance).unwrap_err();
        assert!(err.to_string().contains("instance.c"));
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = toml::from_str::<ConfigDocument>(
            r#"
[instance]
c = [[1.0]]
sigma = [[1.0]]
beta = [1.0]
eta = 1.0
w_bar = 0.0
typo_field = 3
"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("typo_field"));
    }

    #[test]
    fn sweep_requires_index_for_c_ii() {
        let doc: ConfigDocument = toml::from_str(&format!(
            "{SCALAR}\n[sweep]\nparameter = \"c_ii\"\nvalues = [1.0, 2.0]\n"
        ))
        .unwrap();
        let inst = build_instance(&doc.instance).unwrap();
        let err = build_sweep(inst, doc.sweep.as_ref().unwrap(), None).unwrap_err();
        assert!(err.to_string().contains("sweep.index"));
    }

    #[test]
    fn sim_flags_override_config() {
        let doc: ConfigDocument = toml::from_str(&format!(
            "{SCALAR}\n[sim]\nsamples = 10\nseed = 3\n"
        ))
        .unwrap();
        let cfg = build_sim_config(doc.sim.as_ref(), Some(99), None).unwrap();
        assert_eq!(cfg.samples(), 99);
        assert_eq!(cfg.seed(), 3);
    }
}
