//! JSON description of a (problem, K) pair.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::funcalg::{ExprFn, Interval, Params};
use crate::ktransform::{KTransform, SLProblem};
use crate::{Error, Result};

/// Interval end: a number, or "inf" / "-inf".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bound(pub f64);

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Bound, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Bound(v)),
            Raw::Text(t) => match t.trim() {
                "inf" | "+inf" | "infinity" => Ok(Bound(f64::INFINITY)),
                "-inf" | "-infinity" => Ok(Bound(f64::NEG_INFINITY)),
                other => other
                    .parse::<f64>()
                    .map(Bound)
                    .map_err(|_| serde::de::Error::custom(format!("bad interval end {other:?}"))),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KSpec {
    #[serde(rename = "A")]
    pub a: String,
    pub phi: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_inv: Option<String>,
    #[serde(rename = "C", default = "one")]
    pub c: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub interval: [Bound; 2],
    pub p: String,
    pub q: String,
    pub r: String,
    #[serde(default)]
    pub params: Params,
    #[serde(rename = "K")]
    pub k: KSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gallery_id: Option<String>,
    /// Working length for infinite endpoints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<ProblemSpec> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("problem spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn interval(&self) -> Result<Interval> {
        Interval::new(self.interval[0].0, self.interval[1].0)
    }

    pub fn with_param(mut self, name: &str, value: f64) -> ProblemSpec {
        self.params.insert(name.to_string(), value);
        self
    }

    /// Parse every expression; singular endpoints are those where a
    /// coefficient is not finite or p vanishes.
    pub fn build(&self) -> Result<(SLProblem, KTransform)> {
        let dom = self.interval()?;
        let parse = |what: &str, src: &str| {
            ExprFn::parse(src, &self.params, dom).map_err(|e| Error::Input(format!("{what}: {e}")))
        };
        let (p, q, r) = (parse("p", &self.p)?, parse("q", &self.q)?, parse("r", &self.r)?);
        let singular: Vec<f64> = [dom.a, dom.b]
            .into_iter()
            .filter(|&d| {
                d.is_finite() && {
                    let pv = p.eval(d);
                    !(pv > 0.0 && pv.is_finite() && q.eval(d).is_finite() && r.eval(d).is_finite() && r.eval(d) > 0.0)
                }
            })
            .collect();
        let mut problem = SLProblem::new(p, q, r, dom).with_singular(&singular);
        if let Some(l) = self.truncation {
            if !(l > 0.0) {
                return Err(Error::Input(format!("truncation {l} must be positive")));
            }
            problem = problem.with_truncation(l);
        }
        if !(self.k.c > 0.0) {
            return Err(Error::Input(format!("C = {} must be positive", self.k.c)));
        }
        let mut k = KTransform::new(parse("A", &self.k.a)?, parse("phi", &self.k.phi)?, self.k.c);
        if let Some(inv) = &self.k.phi_inv {
            k = k.with_inverse(parse("phi_inv", inv)?);
        }
        Ok((problem, k))
    }
}
