//! JSON representations: log values use `null` for `-inf`, and bodies flatten to a tagged object.

use serde::{Deserialize, Serialize};

use crate::bodies::BodySpec;
use crate::error::Error;

pub(crate) mod vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        super::to_nullable(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(super::from_nullable(Vec::<Option<f64>>::deserialize(d)?))
    }
}

pub(crate) fn to_nullable(v: &[f64]) -> Vec<Option<f64>> {
    v.iter()
        .map(|&x| (x != f64::NEG_INFINITY).then_some(x))
        .collect()
}

pub(crate) fn from_nullable(v: Vec<Option<f64>>) -> Vec<f64> {
    v.into_iter()
        .map(|x| x.unwrap_or(f64::NEG_INFINITY))
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct BodyRepr {
    variant: String,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sides: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<Box<BodyRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<Box<BodyRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generators: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    log_values: Option<Vec<Option<f64>>>,
}

impl BodyRepr {
    fn bare(variant: &str, n: usize) -> Self {
        Self {
            variant: variant.to_string(),
            n,
            scale: None,
            sides: None,
            left: None,
            right: None,
            generators: None,
            log_values: None,
        }
    }
}

impl From<BodySpec> for BodyRepr {
    fn from(b: BodySpec) -> Self {
        let n = b.dim();
        match b {
            BodySpec::Ball { scale, .. } => BodyRepr {
                scale: Some(scale),
                ..Self::bare("ball", n)
            },
            BodySpec::Cube { scale, .. } => BodyRepr {
                scale: Some(scale),
                ..Self::bare("cube", n)
            },
            BodySpec::Parallelotope { sides } => BodyRepr {
                sides: Some(sides),
                ..Self::bare("parallelotope", n)
            },
            BodySpec::Product { left, right } => BodyRepr {
                left: Some(Box::new((*left).into())),
                right: Some(Box::new((*right).into())),
                ..Self::bare("product", n)
            },
            BodySpec::Zonotope { generators, .. } => BodyRepr {
                generators: Some(generators),
                ..Self::bare("zonotope", n)
            },
            BodySpec::Explicit { log_values } => BodyRepr {
                log_values: Some(to_nullable(&log_values)),
                ..Self::bare("explicit", n)
            },
        }
    }
}

fn missing(variant: &str, field: &str) -> Error {
    Error::Usage(format!("body variant '{variant}' requires field '{field}'"))
}

impl TryFrom<BodyRepr> for BodySpec {
    type Error = Error;

    fn try_from(r: BodyRepr) -> Result<Self, Error> {
        let v = r.variant.as_str();
        let body = match v {
            "ball" => BodySpec::Ball {
                n: r.n,
                scale: r.scale.ok_or_else(|| missing(v, "scale"))?,
            },
            "cube" => BodySpec::Cube {
                n: r.n,
                scale: r.scale.ok_or_else(|| missing(v, "scale"))?,
            },
            "parallelotope" => BodySpec::Parallelotope {
                sides: r.sides.ok_or_else(|| missing(v, "sides"))?,
            },
            "product" => BodySpec::Product {
                left: Box::new((*r.left.ok_or_else(|| missing(v, "left"))?).try_into()?),
                right: Box::new((*r.right.ok_or_else(|| missing(v, "right"))?).try_into()?),
            },
            "zonotope" => BodySpec::Zonotope {
                dim: r.n,
                generators: r.generators.ok_or_else(|| missing(v, "generators"))?,
            },
            "explicit" => BodySpec::Explicit {
                log_values: from_nullable(r.log_values.ok_or_else(|| missing(v, "log_values"))?),
            },
            other => return Err(Error::Usage(format!("unknown body variant '{other}'"))),
        };
        if body.dim() != r.n {
            return Err(Error::Usage(format!(
                "declared dimension {} does not match the {v} body (dimension {})",
                r.n,
                body.dim()
            )));
        }
        body.validate()?;
        Ok(body)
    }
}
