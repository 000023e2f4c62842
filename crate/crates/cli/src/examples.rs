//! Named example pipelines.
//!
//! Every example takes `n` (points per axis of the unit square, default
//! 129) and `output` (default `out`) besides its own parameters.

use std::collections::BTreeMap;

use moutard_core::planar::{OmegaChoice, Variant};
use moutard_core::verify::EquationId;

use crate::config::{FieldSpec, GridSpec, PipelineConfig, SeedSpec, SolutionSpec, Step};
use crate::error::CliError;

pub struct ExampleInfo {
    pub name: &'static str,
    pub summary: &'static str,
    /// Parameters with their defaults.
    pub params: &'static [(&'static str, &'static str)],
}

pub const CATALOG: &[ExampleInfo] = &[
    ExampleInfo {
        name: "example1",
        summary: "sigma = w^2 and u = phi/w for harmonic w, phi (multidimensional map on sigma = 1)",
        params: &[("w", "2+x1"), ("phi", "x2")],
    },
    ExampleInfo {
        name: "example2",
        summary: "sigma = w^-2 with the potential built from harmonic phi (M_R on sigma = 1)",
        params: &[("w", "2+x1"), ("phi", "x2"), ("c", "0")],
    },
    ExampleInfo {
        name: "example3",
        summary: "sigma = w^-2 u1^2 and U = u/u1, with u1, u potentials of example2 (M_R then M_I)",
        params: &[("w", "2+x1"), ("phi1", "x2"), ("c1", "4"), ("phi", "1"), ("c", "0")],
    },
    ExampleInfo {
        name: "alternating",
        summary: "depth transforms alternating M_R and M_I, starting from three harmonic pairs on sigma = 1",
        params: &[("depth", "2"), ("offset", "2")],
    },
];

pub fn list_examples() -> &'static [ExampleInfo] {
    CATALOG
}

/// Builds the config of a named example. Unknown parameters are an error.
pub fn make_example(name: &str, params: &BTreeMap<String, String>) -> Result<PipelineConfig, CliError> {
    let info = CATALOG
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CliError::Config(format!("unknown example {name:?}")))?;
    for key in params.keys() {
        if key != "n" && key != "output" && !info.params.iter().any(|(p, _)| p == key) {
            return Err(CliError::Config(format!("example {name} has no parameter {key:?}")));
        }
    }
    let get = |key: &str| -> String {
        params.get(key).cloned().unwrap_or_else(|| {
            info.params.iter().find(|(p, _)| *p == key).map(|(_, d)| d.to_string()).expect("known parameter")
        })
    };
    let number = |key: &str| -> Result<f64, CliError> {
        let s = get(key);
        s.parse().map_err(|_| CliError::Config(format!("parameter {key}: {s:?} is not a number")))
    };
    let n = match params.get("n") {
        Some(s) => s.parse().map_err(|_| CliError::Config(format!("parameter n: {s:?} is not a grid size")))?,
        None => 129,
    };
    let mut config = PipelineConfig {
        grid: GridSpec::unit(2, n),
        sigma: FieldSpec::expr("1"),
        solutions: vec![],
        steps: vec![],
        verify: vec![EquationId::Hc1],
        output: params.get("output").cloned().unwrap_or_else(|| "out".into()),
        base: None,
        singular_mode: None,
        tolerance_scale: None,
        max_depth: None,
    };
    let stream = |src: String| SolutionSpec { u: None, v: Some(FieldSpec::Expr(src)) };
    let moutard = |variant, seed| Step::Moutard2d { variant, seed, omega_mode: OmegaChoice::Seed, base: None };
    match name {
        "example1" => {
            config.solutions = vec![SolutionSpec { u: Some(FieldSpec::Expr(get("phi"))), v: None }];
            config.steps = vec![Step::Theorem3 { w: FieldSpec::Expr(get("w")) }];
        }
        "example2" => {
            config.solutions = vec![stream(get("phi"))];
            config.steps = vec![
                moutard(Variant::R, SeedSpec::Field(FieldSpec::Expr(get("w")))),
                Step::RecoverUV { base: None, u_values: Some(vec![number("c")?]), v_values: None },
            ];
            config.verify = vec![EquationId::Hc1, EquationId::Conj13];
        }
        "example3" => {
            config.solutions = vec![stream(get("phi1")), stream(get("phi"))];
            config.steps = vec![
                moutard(Variant::R, SeedSpec::Field(FieldSpec::Expr(get("w")))),
                Step::RecoverUV { base: None, u_values: Some(vec![number("c1")?, number("c")?]), v_values: None },
                moutard(Variant::I, SeedSpec::Solution { solution: 0, offset: 0.0 }),
            ];
            config.verify = vec![EquationId::Hc1, EquationId::Conj13];
        }
        "alternating" => {
            let depth = get("depth");
            let depth: usize =
                depth.parse().map_err(|_| CliError::Config(format!("parameter depth: {depth:?} is not a count")))?;
            let offset = number("offset")?;
            config.solutions = [("x1", "x2"), ("x1^2 - x2^2", "2*x1*x2"), ("exp(x1)*cos(x2)", "exp(x1)*sin(x2)")]
                .iter()
                .map(|(u, v)| SolutionSpec { u: Some(FieldSpec::expr(u)), v: Some(FieldSpec::expr(v)) })
                .collect();
            config.steps = (0..depth)
                .map(|k| {
                    let variant = if k % 2 == 0 { Variant::R } else { Variant::I };
                    moutard(variant, SeedSpec::Solution { solution: 0, offset })
                })
                .collect();
            config.verify = vec![EquationId::Hc1, EquationId::Conj13];
            config.max_depth = Some(depth.max(crate::config::DEFAULT_MAX_DEPTH));
        }
        _ => unreachable!("catalog names are matched above"),
    }
    Ok(config)
}
