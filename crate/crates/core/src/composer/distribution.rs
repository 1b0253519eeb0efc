//! Distribution-parameterized scene values.
//!
//! Scene configs encode every tunable as a tagged spec: `["const", v]`,
//! `["choose", [...]]`, `["uniform", lo, hi]`, or `["normal", mean, std]`
//! with optional truncation bounds `["normal", mean, std, lo, hi]`. An empty
//! `choose` list means "choose from the discovered file corpus".

use rand::Rng;
use serde_json::Value;

use crate::error::{Error, Result};

/// Re-sampling budget for truncated normals.
const TRUNCATION_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    Const(Value),
    Choose(Vec<Value>),
    Uniform { lo: f64, hi: f64 },
    Normal {
        mean: f64,
        std: f64,
        bounds: Option<(f64, f64)>,
    },
}

impl DistributionSpec {
    pub fn constant(v: impl Into<Value>) -> Self {
        DistributionSpec::Const(v.into())
    }

    /// Parse the JSON encoding described in the module docs.
    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Sampling(format!("distribution spec must be an array, got {v}")))?;
        let tag = arr
            .first()
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Sampling("distribution spec needs a string tag".into()))?;
        match tag {
            "const" => {
                if arr.len() != 2 {
                    return Err(Error::Sampling("const takes exactly one value".into()));
                }
                Ok(DistributionSpec::Const(arr[1].clone()))
            }
            "choose" => {
                let list = arr
                    .get(1)
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Sampling("choose takes a list".into()))?;
                Ok(DistributionSpec::Choose(list.clone()))
            }
            "uniform" => {
                let lo = number(arr.get(1), "uniform lo")?;
                let hi = number(arr.get(2), "uniform hi")?;
                if !(lo <= hi) {
                    return Err(Error::Sampling(format!(
                        "uniform bounds are inverted: [{lo}, {hi}]"
                    )));
                }
                Ok(DistributionSpec::Uniform { lo, hi })
            }
            "normal" => {
                let mean = number(arr.get(1), "normal mean")?;
                let std = number(arr.get(2), "normal std")?;
                if std < 0.0 {
                    return Err(Error::Sampling(format!("normal std must be >= 0, got {std}")));
                }
                let bounds = match (arr.get(3), arr.get(4)) {
                    (Some(lo), Some(hi)) => {
                        Some((number(Some(lo), "normal lo")?, number(Some(hi), "normal hi")?))
                    }
                    (None, None) => None,
                    _ => {
                        return Err(Error::Sampling(
                            "normal truncation needs both bounds".into(),
                        ))
                    }
                };
                Ok(DistributionSpec::Normal { mean, std, bounds })
            }
            other => Err(Error::Sampling(format!("unknown distribution tag '{other}'"))),
        }
    }

    /// JSON encoding of this spec, the inverse of [`Self::from_json`].
    pub fn to_json(&self) -> Value {
        match self {
            DistributionSpec::Const(v) => serde_json::json!(["const", v]),
            DistributionSpec::Choose(list) => serde_json::json!(["choose", list]),
            DistributionSpec::Uniform { lo, hi } => serde_json::json!(["uniform", lo, hi]),
            DistributionSpec::Normal { mean, std, bounds } => match bounds {
                Some((lo, hi)) => serde_json::json!(["normal", mean, std, lo, hi]),
                None => serde_json::json!(["normal", mean, std]),
            },
        }
    }
}

fn number(v: Option<&Value>, what: &str) -> Result<f64> {
    v.and_then(Value::as_f64)
        .ok_or_else(|| Error::Sampling(format!("{what} must be a number")))
}

/// Draw one value from `spec`. `corpus` backs the empty-`choose` form; pass
/// the candidate list when one is in scope.
pub fn sample_distribution<R: Rng>(
    spec: &DistributionSpec,
    rng: &mut R,
    corpus: Option<&[Value]>,
) -> Result<Value> {
    match spec {
        DistributionSpec::Const(v) => Ok(v.clone()),
        DistributionSpec::Choose(list) => {
            let pool: &[Value] = if list.is_empty() {
                corpus.ok_or_else(|| {
                    Error::Corpus("choose([]) used where no corpus is in scope".into())
                })?
            } else {
                list
            };
            if pool.is_empty() {
                return Err(Error::Corpus("choose pool is empty".into()));
            }
            Ok(pool[rng.gen_range(0..pool.len())].clone())
        }
        DistributionSpec::Uniform { lo, hi } => {
            let u: f64 = rng.gen();
            Ok(Value::from(lo + u * (hi - lo)))
        }
        DistributionSpec::Normal { mean, std, bounds } => {
            for _ in 0..TRUNCATION_ATTEMPTS {
                let v = mean + std * standard_normal(rng);
                match bounds {
                    Some((lo, hi)) if v < *lo || v > *hi => continue,
                    _ => return Ok(Value::from(v)),
                }
            }
            Err(Error::Sampling(format!(
                "truncated normal({mean}, {std}) produced no in-bounds sample in {TRUNCATION_ATTEMPTS} attempts"
            )))
        }
    }
}

/// Draw and coerce to a number.
pub fn sample_f64<R: Rng>(
    spec: &DistributionSpec,
    rng: &mut R,
    what: &str,
) -> Result<f64> {
    let v = sample_distribution(spec, rng, None)?;
    v.as_f64()
        .ok_or_else(|| Error::Sampling(format!("{what} resolved to a non-number: {v}")))
}

/// Draw and coerce to a string, with an optional corpus pool for
/// empty-`choose` specs.
pub fn sample_string<R: Rng>(
    spec: &DistributionSpec,
    rng: &mut R,
    corpus: Option<&[Value]>,
    what: &str,
) -> Result<String> {
    let v = sample_distribution(spec, rng, corpus)?;
    v.as_str()
        .map(str::to_owned)
        .ok_or_else(|| Error::Sampling(format!("{what} resolved to a non-string: {v}")))
}

/// Standard normal via Box-Muller.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
