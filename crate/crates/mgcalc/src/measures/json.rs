//! Interchange format for measure specifications:
//!
//! ```json
//! { "interval": [0.0, 1.0], "type": "salem", "p": 0.7, "q": 0.5 }
//! { "interval": [0.0, 1.0], "type": "ifs",
//!   "maps": [ { "r": 0.5, "c": 0.0 }, { "r": 0.333, "c": 0.667 } ],
//!   "weights": [0.7, 0.3] }
//! { "interval": [-1.0, 1.0], "type": "density-arcsine" }
//! ```
//!
//! Only densities with a named identity are representable; general density
//! closures cannot round-trip through JSON.

use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

use super::{AffineMap, Interval, MeasureSpec, MeasureVariant, NamedDensity};

const TYPE_ARCSINE: &str = "density-arcsine";
const TYPE_SALEM: &str = "salem";
const TYPE_IFS: &str = "ifs";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    interval: [f64; 2],
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    maps: Option<Vec<AffineMap>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

impl TryFrom<&MeasureSpec> for SpecDoc {
    type Error = Error;

    fn try_from(spec: &MeasureSpec) -> Result<SpecDoc> {
        let iv = spec.interval();
        let interval = [iv.a(), iv.b()];
        match spec.variant() {
            MeasureVariant::Density(dm) => match dm.kind() {
                Some(NamedDensity::Arcsine) => Ok(SpecDoc {
                    interval,
                    kind: TYPE_ARCSINE.to_string(),
                    p: None,
                    q: None,
                    maps: None,
                    weights: None,
                }),
                None => Err(Error::Serialization(
                    "density measures without a named identity cannot be serialized".into(),
                )),
            },
            MeasureVariant::Salem(sp) => Ok(SpecDoc {
                interval,
                kind: TYPE_SALEM.to_string(),
                p: Some(sp.p),
                q: Some(sp.q),
                maps: None,
                weights: None,
            }),
            MeasureVariant::SelfSimilar(ifs) => Ok(SpecDoc {
                interval,
                kind: TYPE_IFS.to_string(),
                p: None,
                q: None,
                maps: Some(ifs.maps().to_vec()),
                weights: Some(ifs.weights().to_vec()),
            }),
        }
    }
}

impl TryFrom<SpecDoc> for MeasureSpec {
    type Error = Error;

    fn try_from(doc: SpecDoc) -> Result<MeasureSpec> {
        let interval = Interval::new(doc.interval[0], doc.interval[1])?;
        match doc.kind.as_str() {
            TYPE_ARCSINE => {
                if doc.interval != [-1.0, 1.0] {
                    return Err(Error::validation(format!(
                        "{TYPE_ARCSINE} requires interval [-1, 1], got {:?}",
                        doc.interval
                    )));
                }
                reject_extra(&doc, &[])?;
                Ok(super::arcsine_measure())
            }
            TYPE_SALEM => {
                if doc.interval != [0.0, 1.0] {
                    return Err(Error::validation(format!(
                        "{TYPE_SALEM} requires interval [0, 1], got {:?}",
                        doc.interval
                    )));
                }
                reject_extra(&doc, &["p", "q"])?;
                let p = doc
                    .p
                    .ok_or_else(|| Error::validation("salem spec requires field p"))?;
                let q = doc
                    .q
                    .ok_or_else(|| Error::validation("salem spec requires field q"))?;
                MeasureSpec::salem(p, q)
            }
            TYPE_IFS => {
                reject_extra(&doc, &["maps", "weights"])?;
                let maps = doc
                    .maps
                    .ok_or_else(|| Error::validation("ifs spec requires field maps"))?;
                let weights = doc
                    .weights
                    .ok_or_else(|| Error::validation("ifs spec requires field weights"))?;
                MeasureSpec::self_similar(interval, maps, weights)
            }
            other => Err(Error::validation(format!(
                "unknown measure type {other:?}, expected one of \
                 {TYPE_ARCSINE:?}, {TYPE_SALEM:?}, {TYPE_IFS:?}"
            ))),
        }
    }
}

fn reject_extra(doc: &SpecDoc, allowed: &[&str]) -> Result<()> {
    let fields: [(&str, bool); 4] = [
        ("p", doc.p.is_some()),
        ("q", doc.q.is_some()),
        ("maps", doc.maps.is_some()),
        ("weights", doc.weights.is_some()),
    ];
    for (name, present) in fields {
        if present && !allowed.contains(&name) {
            return Err(Error::validation(format!(
                "field {name:?} is not valid for type {:?}",
                doc.kind
            )));
        }
    }
    Ok(())
}

impl Serialize for MeasureSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SpecDoc::try_from(self)
            .map_err(S::Error::custom)?
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MeasureSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = SpecDoc::deserialize(deserializer)?;
        MeasureSpec::try_from(doc).map_err(D::Error::custom)
    }
}

impl MeasureSpec {
    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<MeasureSpec> {
        serde_json::from_str(s).map_err(|e| Error::validation(format!("invalid spec JSON: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::ScalarFn;

    #[test]
    fn salem_round_trips() {
        let spec = MeasureSpec::salem(0.7, 0.5).unwrap();
        let s = spec.to_json_string().unwrap();
        let back = MeasureSpec::from_json_str(&s).unwrap();
        match back.variant() {
            MeasureVariant::Salem(sp) => assert_eq!((sp.p, sp.q), (0.7, 0.5)),
            other => panic!("expected salem, got {}", other.name()),
        }
        assert_eq!(back.to_json_string().unwrap(), s);
    }

    #[test]
    fn ifs_round_trips() {
        let maps = vec![
            AffineMap::new(0.5, 0.0),
            AffineMap::new(1.0 / 3.0, 2.0 / 3.0),
        ];
        let spec = MeasureSpec::self_similar(
            Interval::new(0.0, 1.0).unwrap(),
            maps.clone(),
            vec![0.7, 0.3],
        )
        .unwrap();
        let s = spec.to_json_string().unwrap();
        let back = MeasureSpec::from_json_str(&s).unwrap();
        match back.variant() {
            MeasureVariant::SelfSimilar(ifs) => {
                assert_eq!(ifs.maps(), &maps[..]);
                assert_eq!(ifs.weights(), &[0.7, 0.3]);
            }
            other => panic!("expected self-similar, got {}", other.name()),
        }
        assert_eq!(back.to_json_string().unwrap(), s);
    }

    #[test]
    fn arcsine_round_trips_by_name() {
        let spec = super::super::arcsine_measure();
        let s = spec.to_json_string().unwrap();
        assert!(s.contains(TYPE_ARCSINE));
        let back = MeasureSpec::from_json_str(&s).unwrap();
        match back.variant() {
            MeasureVariant::Density(dm) => assert_eq!(dm.kind(), Some(NamedDensity::Arcsine)),
            other => panic!("expected density, got {}", other.name()),
        }
    }

    #[test]
    fn unnamed_densities_cannot_serialize() {
        let spec = MeasureSpec::density(
            Interval::new(0.0, 1.0).unwrap(),
            ScalarFn::new(|_| 1.0),
            Some(ScalarFn::new(|x| x)),
        )
        .unwrap();
        assert!(matches!(
            spec.to_json_string(),
            Err(Error::Serialization(_))
        ));
    }

    #[test]
    fn malformed_documents_are_rejected() {
        let cases = [
            // unknown field anywhere in the document
            r#"{"interval":[0.0,1.0],"type":"salem","p":0.7,"q":0.5,"extra":1}"#,
            // field that belongs to another type
            r#"{"interval":[0.0,1.0],"type":"ifs","p":0.7,"maps":[{"r":0.5,"c":0.0}],"weights":[1.0]}"#,
            // missing required parameter
            r#"{"interval":[0.0,1.0],"type":"salem","p":0.7}"#,
            r#"{"interval":[0.0,1.0],"type":"ifs","maps":[{"r":0.5,"c":0.0}]}"#,
            // wrong interval for the fixed-interval types
            r#"{"interval":[0.0,2.0],"type":"salem","p":0.7,"q":0.5}"#,
            r#"{"interval":[0.0,1.0],"type":"density-arcsine"}"#,
            // parameters that fail spec validation
            r#"{"interval":[0.0,1.0],"type":"salem","p":1.2,"q":0.5}"#,
            // not a document at all
            "not json",
        ];
        for case in cases {
            assert!(MeasureSpec::from_json_str(case).is_err(), "{case}");
        }
        let err = MeasureSpec::from_json_str(r#"{"interval":[0.0,1.0],"type":"gaussian"}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains(TYPE_SALEM), "{err}");
    }
}
