//! JSON description of a left-invariant metric.
//!
//! Either explicit structure constants with a Gram matrix,
//!
//! ```json
//! { "structure_constants": [[[0,0,0],[0,0,2],[0,-2,0]], ...], "metric": [[1,0,0],[0,1,0],[0,0,1]] }
//! ```
//!
//! where `structure_constants[k][i][j]` is the `X_k` component of `[X_i, X_j]`, or a Berger
//! metric on su(2), `{ "berger": { "s": 1, "t": 3 } }`. Unknown keys are rejected.

use serde::Deserialize;

use crate::lie_curvature::{
    su2_structure_constants, BergerParams, FrameMetric, LieAlgebraFrame, Tensor3,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub structure_constants: Tensor3,
    pub metric: [[f64; 3]; 3],
    #[serde(default)]
    pub labels: Option<[String; 3]>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BergerSpec {
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct BergerWrapper {
    berger: BergerSpec,
}

#[derive(Debug, Clone)]
pub enum MetricSpec {
    Frame(FrameSpec),
    Berger(BergerSpec),
}

/// A validated frame and metric, with the Berger parameters when the input named them.
#[derive(Debug, Clone)]
pub struct ResolvedMetric {
    pub frame: LieAlgebraFrame,
    pub metric: FrameMetric,
    pub berger: Option<BergerParams>,
}

impl MetricSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("metric spec is not valid JSON: {e}")))?;
        let is_berger = value.as_object().is_some_and(|o| o.contains_key("berger"));
        if is_berger {
            let w: BergerWrapper = serde_json::from_value(value)
                .map_err(|e| Error::InvalidInput(format!("berger metric spec: {e}")))?;
            Ok(MetricSpec::Berger(w.berger))
        } else {
            let f: FrameSpec = serde_json::from_value(value)
                .map_err(|e| Error::InvalidInput(format!("frame metric spec: {e}")))?;
            Ok(MetricSpec::Frame(f))
        }
    }

    pub fn resolve(&self) -> Result<ResolvedMetric> {
        match self {
            MetricSpec::Berger(b) => {
                let p = BergerParams::new(b.s, b.t)?;
                Ok(ResolvedMetric {
                    frame: su2_structure_constants()?,
                    metric: p.frame_metric(),
                    berger: Some(p),
                })
            }
            MetricSpec::Frame(f) => Ok(ResolvedMetric {
                frame: LieAlgebraFrame::new(f.structure_constants, f.labels.clone())?,
                metric: FrameMetric::from_rows(f.metric)?,
                berger: None,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn berger_spec() {
        let r = MetricSpec::from_json(r#"{"berger": {"s": 1, "t": 3}}"#)
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(r.berger.unwrap().t(), 3.0);
        assert_eq!(r.metric.matrix()[(2, 2)], 3.0);
    }

    #[test]
    fn frame_spec() {
        let text = r#"{
            "structure_constants": [
                [[0,0,0],[0,0,2],[0,-2,0]],
                [[0,0,-2],[0,0,0],[2,0,0]],
                [[0,2,0],[-2,0,0],[0,0,0]]
            ],
            "metric": [[1,0,0],[0,1,0],[0,0,1]]
        }"#;
        let r = MetricSpec::from_json(text).unwrap().resolve().unwrap();
        assert!(r.berger.is_none());
        assert_eq!(r.frame.c(2, 0, 1), 2.0);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(MetricSpec::from_json(r#"{"berger": {"s": 1, "t": 3, "u": 2}}"#).is_err());
        assert!(MetricSpec::from_json(r#"{"berger": {"s": 1, "t": 3}, "x": 1}"#).is_err());
        let bad = MetricSpec::from_json(r#"{"berger": {"s": 3, "t": 1}}"#).unwrap();
        assert!(matches!(bad.resolve(), Err(Error::InvalidBergerParams { .. })));
        let not_antisym = r#"{
            "structure_constants": [[[0,1,0],[0,0,0],[0,0,0]],[[0,0,0],[0,0,0],[0,0,0]],[[0,0,0],[0,0,0],[0,0,0]]],
            "metric": [[1,0,0],[0,1,0],[0,0,1]]
        }"#;
        assert!(matches!(
            MetricSpec::from_json(not_antisym).unwrap().resolve(),
            Err(Error::InvalidFrame(_))
        ));
    }
}
