//! Model specifications, parameter vectors and constraint strings.
//!
//! A model spec is a JSON object, given inline or as a path to a file:
//!
//! ```text
//! {"family": "bernoulli", "theta": [0.4]}
//! {"family": "categorical", "categories": 3, "source": [0.2, 0.3, 0.5]}
//! {"family": "gaussian_fixed_var", "sigma": 2.0, "theta": [1.0]}
//! {"family": "mixture", "components": [{"kind": "gaussian", "mu": 0, "sigma": 1},
//!                                      {"kind": "laplace", "mu": 2, "b": 1}], "theta": [0.3]}
//! ```
//!
//! `theta` holds natural parameters (mixture weights of all but the first
//! component for `mixture`); `source` is accepted instead for the
//! exponential families and holds the usual parameters.

use std::path::Path;

use infogeo::divergence::DiscreteDistribution;
use infogeo::{ComponentDensity, ExponentialFamily, MixtureFamily, Potential, StatisticalModel};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// A parsed family.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Exp(ExponentialFamily),
    Mixture(MixtureFamily),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Exp(ExponentialFamily::Bernoulli) => "bernoulli",
            Family::Exp(ExponentialFamily::Categorical { .. }) => "categorical",
            Family::Exp(ExponentialFamily::Poisson) => "poisson",
            Family::Exp(ExponentialFamily::Gaussian) => "gaussian",
            Family::Exp(ExponentialFamily::GaussianLocation { .. }) => "gaussian_fixed_var",
            Family::Exp(ExponentialFamily::Exponential) => "exponential",
            Family::Mixture(_) => "mixture",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Family::Exp(f) => Potential::dim(f),
            Family::Mixture(m) => m.order(),
        }
    }

    pub fn model(&self) -> &dyn StatisticalModel {
        match self {
            Family::Exp(f) => f,
            Family::Mixture(m) => m,
        }
    }

    /// Runs `k` with the family's potential: the cumulant function, or the
    /// quadrature negative entropy for mixtures.
    pub fn with_potential<T>(&self, k: impl FnOnce(&dyn Potential) -> T) -> T {
        match self {
            Family::Exp(f) => k(f),
            Family::Mixture(m) => k(&m.exact_generator()),
        }
    }

    pub fn check(&self, flag: &str, theta: &[f64]) -> CliResult<()> {
        self.model()
            .check_parameter(theta)
            .map_err(|e| CliError::usage(flag, format!("not a valid {} parameter: {e}", self.name())))
    }
}

/// A family with an optional parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub family: Family,
    pub theta: Option<Vec<f64>>,
}

impl ModelSpec {
    /// The parameter, or a usage error naming `flag` when the spec has none.
    pub fn require_theta(&self, flag: &str) -> CliResult<&[f64]> {
        self.theta
            .as_deref()
            .ok_or_else(|| CliError::usage(flag, "model spec has no \"theta\" or \"source\""))
    }
}

/// Inline JSON when the argument starts with `{` or `[`, otherwise the
/// contents of the named file.
pub fn load_json(flag: &str, arg: &str) -> CliResult<Value> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(Path::new(arg)).map_err(|e| CliError::Io {
            path: arg.into(),
            source: e,
        })?
    };
    serde_json::from_str(&text).map_err(|e| CliError::usage(flag, format!("invalid JSON: {e}")))
}

pub fn parse_model(flag: &str, arg: &str) -> CliResult<ModelSpec> {
    match load_json(flag, arg)? {
        Value::Object(obj) => model_from_object(flag, &obj),
        _ => Err(CliError::usage(flag, "model spec must be a JSON object")),
    }
}

fn field<'a>(flag: &str, obj: &'a Map<String, Value>, key: &str) -> CliResult<&'a Value> {
    obj.get(key)
        .ok_or_else(|| CliError::usage(&format!("{flag}.{key}"), "missing field"))
}

fn number(flag: &str, obj: &Map<String, Value>, key: &str) -> CliResult<f64> {
    field(flag, obj, key)?
        .as_f64()
        .ok_or_else(|| CliError::usage(&format!("{flag}.{key}"), "expected a number"))
}

fn numbers(flag: &str, v: &Value) -> CliResult<Vec<f64>> {
    let items = v
        .as_array()
        .ok_or_else(|| CliError::usage(flag, "expected an array of numbers"))?;
    items
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| CliError::usage(flag, format!("{x} is not a number"))))
        .collect()
}

pub fn model_from_object(flag: &str, obj: &Map<String, Value>) -> CliResult<ModelSpec> {
    let name = field(flag, obj, "family")?
        .as_str()
        .ok_or_else(|| CliError::usage(&format!("{flag}.family"), "expected a string"))?;
    let theta = obj.get("theta").map(|v| numbers(&format!("{flag}.theta"), v)).transpose()?;
    let source = obj.get("source").map(|v| numbers(&format!("{flag}.source"), v)).transpose()?;
    let invalid = |key: &str, e: infogeo::Error| CliError::usage(&format!("{flag}.{key}"), e.to_string());
    let family = match name {
        "bernoulli" => Family::Exp(ExponentialFamily::Bernoulli),
        "poisson" => Family::Exp(ExponentialFamily::Poisson),
        "gaussian" => Family::Exp(ExponentialFamily::Gaussian),
        "exponential" => Family::Exp(ExponentialFamily::Exponential),
        "gaussian_fixed_var" => {
            let sigma = number(flag, obj, "sigma")?;
            Family::Exp(ExponentialFamily::gaussian_location(sigma).map_err(|e| invalid("sigma", e))?)
        }
        "categorical" => {
            let categories = match obj.get("categories") {
                Some(v) => v
                    .as_u64()
                    .ok_or_else(|| CliError::usage(&format!("{flag}.categories"), "expected a positive integer"))?
                    as usize,
                None => match (&theta, &source) {
                    (Some(t), _) => t.len() + 1,
                    (None, Some(s)) => s.len(),
                    (None, None) => return Err(CliError::usage(&format!("{flag}.categories"), "missing field")),
                },
            };
            Family::Exp(ExponentialFamily::categorical(categories).map_err(|e| invalid("categories", e))?)
        }
        "mixture" => {
            let comps = field(flag, obj, "components")?
                .as_array()
                .ok_or_else(|| CliError::usage(&format!("{flag}.components"), "expected an array"))?;
            let parsed = comps
                .iter()
                .enumerate()
                .map(|(i, c)| component(&format!("{flag}.components[{i}]"), c))
                .collect::<CliResult<Vec<_>>>()?;
            Family::Mixture(MixtureFamily::new(parsed).map_err(|e| invalid("components", e))?)
        }
        other => {
            return Err(CliError::usage(
                &format!("{flag}.family"),
                format!(
                    "unknown family {other:?}; expected bernoulli, categorical, poisson, gaussian, \
                     gaussian_fixed_var, exponential or mixture"
                ),
            ))
        }
    };
    let theta = match (theta, source) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage(&format!("{flag}.source"), "give either \"theta\" or \"source\""))
        }
        (Some(t), None) => {
            family.check(&format!("{flag}.theta"), &t)?;
            Some(t)
        }
        (None, Some(s)) => match &family {
            Family::Exp(f) => Some(f.natural_from_source(&s).map_err(|e| invalid("source", e))?),
            Family::Mixture(_) => {
                return Err(CliError::usage(
                    &format!("{flag}.source"),
                    "mixtures take their weights in \"theta\"",
                ))
            }
        },
        (None, None) => None,
    };
    Ok(ModelSpec { family, theta })
}

fn component(flag: &str, v: &Value) -> CliResult<ComponentDensity> {
    let obj = v
        .as_object()
        .ok_or_else(|| CliError::usage(flag, "expected an object"))?;
    let kind = field(flag, obj, "kind")?
        .as_str()
        .ok_or_else(|| CliError::usage(&format!("{flag}.kind"), "expected a string"))?;
    let c = match kind {
        "gaussian" => ComponentDensity::gaussian(number(flag, obj, "mu")?, number(flag, obj, "sigma")?),
        "laplace" => ComponentDensity::laplace(number(flag, obj, "mu")?, number(flag, obj, "b")?),
        "cauchy" => ComponentDensity::cauchy(number(flag, obj, "x0")?, number(flag, obj, "gamma")?),
        other => {
            return Err(CliError::usage(
                &format!("{flag}.kind"),
                format!("unknown component {other:?}; expected gaussian, laplace or cauchy"),
            ))
        }
    };
    c.map_err(|e| CliError::usage(flag, e.to_string()))
}

/// A mixture family given either as a full model spec or as
/// `{"components": [...]}`.
pub fn parse_mixture(flag: &str, arg: &str) -> CliResult<MixtureFamily> {
    let mut obj = match load_json(flag, arg)? {
        Value::Object(obj) => obj,
        _ => return Err(CliError::usage(flag, "expected a JSON object")),
    };
    obj.entry("family").or_insert_with(|| Value::String("mixture".into()));
    match model_from_object(flag, &obj)?.family {
        Family::Mixture(m) => Ok(m),
        other => Err(CliError::usage(
            &format!("{flag}.family"),
            format!("expected mixture, got {}", other.name()),
        )),
    }
}

/// A JSON array of numbers or a comma-separated list.
pub fn parse_vector(flag: &str, arg: &str) -> CliResult<Vec<f64>> {
    let s = arg.trim();
    if s.starts_with('[') {
        let v: Value = serde_json::from_str(s).map_err(|e| CliError::usage(flag, format!("invalid JSON: {e}")))?;
        return numbers(flag, &v);
    }
    if s.is_empty() {
        return Err(CliError::usage(flag, "empty vector"));
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(flag, format!("{:?} is not a number", t.trim())))
        })
        .collect()
}

/// A JSON array of number arrays, inline or from a file.
pub fn parse_points(flag: &str, arg: &str) -> CliResult<Vec<Vec<f64>>> {
    let v = load_json(flag, arg)?;
    let rows = v
        .as_array()
        .ok_or_else(|| CliError::usage(flag, "expected an array of parameter vectors"))?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| numbers(&format!("{flag}[{i}]"), r))
        .collect()
}

/// Either side of a `divergence` call: a probability vector or a model.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Discrete(DiscreteDistribution),
    Model(ModelSpec),
}

pub fn parse_operand(flag: &str, arg: &str) -> CliResult<Operand> {
    match load_json(flag, arg)? {
        Value::Array(_) => {
            let probs = parse_vector(flag, arg)?;
            DiscreteDistribution::new(probs)
                .map(Operand::Discrete)
                .map_err(|e| CliError::usage(flag, e.to_string()))
        }
        Value::Object(obj) => {
            let spec = model_from_object(flag, &obj)?;
            spec.require_theta(flag)?;
            Ok(Operand::Model(spec))
        }
        _ => Err(CliError::usage(flag, "expected a probability array or a model spec")),
    }
}

/// `A;b` where `A` is a JSON matrix or one comma-separated row and `b` a
/// JSON array or comma-separated list.
pub fn parse_constraint(flag: &str, arg: &str) -> CliResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let (a, b) = arg
        .rsplit_once(';')
        .ok_or_else(|| CliError::usage(flag, "expected \"A;b\""))?;
    let a = a.trim();
    let rows = if a.starts_with("[[") {
        parse_points(flag, a)?
    } else {
        vec![parse_vector(flag, a)?]
    };
    let b = parse_vector(flag, b)?;
    if rows.len() != b.len() {
        return Err(CliError::usage(
            flag,
            format!("{} constraint rows but {} right-hand sides", rows.len(), b.len()),
        ));
    }
    Ok((rows, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn usage_flag(r: CliResult<impl std::fmt::Debug>) -> String {
        match r.unwrap_err() {
            CliError::Usage { flag, .. } => flag,
            other => panic!("expected a usage error, got {other:?}"),
        }
    }

    #[test]
    fn parses_each_family() {
        let cases = [
            (r#"{"family":"bernoulli","source":[0.5]}"#, vec![0.0]),
            (r#"{"family":"poisson","source":[1.0]}"#, vec![0.0]),
            (r#"{"family":"gaussian","source":[1.0,1.0]}"#, vec![1.0, -0.5]),
            (r#"{"family":"exponential","theta":[-2.0]}"#, vec![-2.0]),
            (r#"{"family":"gaussian_fixed_var","sigma":2,"theta":[1]}"#, vec![1.0]),
            (r#"{"family":"categorical","source":[0.25,0.25,0.5]}"#, vec![(0.5f64).ln(), (0.5f64).ln()]),
        ];
        for (text, theta) in cases {
            let spec = parse_model("--model", text).unwrap();
            let got = spec.theta.unwrap();
            for (g, t) in got.iter().zip(&theta) {
                assert!((g - t).abs() < 1e-15, "{text}: {got:?}");
            }
        }
        let m = parse_model(
            "--model",
            r#"{"family":"mixture","components":[{"kind":"gaussian","mu":0,"sigma":1},{"kind":"cauchy","x0":1,"gamma":2}],"theta":[0.4]}"#,
        )
        .unwrap();
        assert_eq!(m.family.name(), "mixture");
        assert_eq!(m.family.dim(), 1);
    }

    #[test]
    fn errors_name_the_offending_field() {
        assert_eq!(usage_flag(parse_model("--model", r#"{"theta":[0]}"#)), "--model.family");
        assert_eq!(usage_flag(parse_model("--model", r#"{"family":"gamma"}"#)), "--model.family");
        assert_eq!(
            usage_flag(parse_model("--model", r#"{"family":"exponential","theta":[1.0]}"#)),
            "--model.theta"
        );
        assert_eq!(
            usage_flag(parse_model("--model", r#"{"family":"gaussian_fixed_var","theta":[1.0]}"#)),
            "--model.sigma"
        );
        assert_eq!(
            usage_flag(parse_model(
                "--model",
                r#"{"family":"mixture","components":[{"kind":"gaussian","mu":0,"sigma":1},{"kind":"beta"}]}"#
            )),
            "--model.components[1].kind"
        );
        assert_eq!(usage_flag(parse_vector("--eta", "1,x")), "--eta");
    }

    #[test]
    fn vectors_accept_json_and_csv() {
        assert_eq!(parse_vector("--p", "[0.5, 0.5]").unwrap(), vec![0.5, 0.5]);
        assert_eq!(parse_vector("--p", "0.5, 0.5").unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn constraints_split_at_the_last_semicolon() {
        let (a, b) = parse_constraint("--constraint", "1,1;0.5").unwrap();
        assert_eq!((a, b), (vec![vec![1.0, 1.0]], vec![0.5]));
        let (a, b) = parse_constraint("--constraint", "[[1,0],[0,1]];[1,2]").unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(b, vec![1.0, 2.0]);
        assert!(parse_constraint("--constraint", "[[1,0],[0,1]];[1]").is_err());
    }
}
